//! The localization construction on a double-well potential: local ground
//! energies, the sets F, U_s(F), G, the smooth cutoff and the residual of the
//! localization identity.

use heatbound::geometry::{
    ball_ground_energy, cutoff_build, cutoff_reports, lemma41_check, lemma42_check, local_energy_map, localization_residual,
    mollifier_build, mollifier_reports, sublevel_sets, DerivativeScheme, DEFAULT_C_LOC, DEFAULT_SMOOTHING,
};
use heatbound::{assemble_operator, build_mask, counting_function, eigensolve_lowest, GridSpec, PotentialField, Result, Shape, ShapeOp, SliceRequest};

fn main() -> Result<()> {
    let g = GridSpec::unit(1, 400)?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))])?;
    let v = PotentialField::from_fn(&g, |x| 200.0 * (((x[0] - 0.5) / 0.25).powi(2) - 1.0).powi(2))?;
    let op = assemble_operator(&mask, &v)?;
    let spec = eigensolve_lowest(&op, SliceRequest::Full)?;

    let r = 0.1;
    let e0d = ball_ground_energy(1)?;
    let field = local_energy_map(&op, r)?;
    println!("local energies on B(x, {r}): min {:.2}, max {:.2}", field.min(), field.max_finite());

    let moll = mollifier_build(1, DEFAULT_SMOOTHING)?;
    for rep in mollifier_reports(&moll) {
        println!("  {} : {:.6} <= {:.6}", rep.label, rep.lhs, rep.rhs);
    }
    for t in [250.0, 350.0, 600.0] {
        let sets = sublevel_sets(&field, t, r)?;
        let n = counting_function(&spec, t)?;
        let a = lemma41_check(&sets.f, r, r, n);
        let b = lemma42_check(&sets.g, &op, t, r, e0d)?;
        println!("t={t}: |F|={:.3} |U_s(F)|={:.3} <= {:.3}; E0(H_G)={:.2} >= {:.2}", sets.f.volume(), a.lhs, a.rhs, b.rhs, b.lhs);
        if !sets.f.is_empty() {
            let cutoff = cutoff_build(&sets.f, r, &moll)?;
            for rep in cutoff_reports(&cutoff) {
                println!("    {}: {:.4} vs {:.4} pass={}", rep.label, rep.lhs, rep.rhs, rep.pass);
            }
        }
    }

    // residual of the localization identity with a ramp cutoff on (0.1, 0.4)
    let ramp = |x: f64| {
        let s = ((x - 0.1) / 0.3).clamp(0.0, 1.0);
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    };
    let xi: Vec<f64> = (0..g.node_count()).map(|k| ramp(g.coords(k)[0])).collect();
    let u = op.mask().filter(|k| g.coords(k)[0] > 0.1).expect("nonempty");
    for scheme in [DerivativeScheme::Forward, DerivativeScheme::Centered] {
        let rep = localization_residual(&op, &spec.pairs()[0], &u, &xi, scheme, DEFAULT_C_LOC)?;
        println!("residual ({scheme:?}): {:.3e} <= {:.3e}", rep.lhs, rep.rhs);
    }
    Ok(())
}
