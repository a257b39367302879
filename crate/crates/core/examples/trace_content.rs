//! Heat trace `Z(t)` and heat content `Q(t)` of the interval, with the
//! content-versus-trace bound and the counting bound `N_λ <= Z(T) e^{Tλ}`.

use heatbound::bounds::{lemma18_rhs, thm17_rhs};
use heatbound::heat::{heat_content, heat_trace};
use heatbound::{assemble_operator, build_mask, counting_function, eigensolve_lowest, GridSpec, PotentialField, Result, Shape, ShapeOp, SliceRequest};

fn main() -> Result<()> {
    let g = GridSpec::unit(1, 400)?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))])?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g))?;
    let spec = eigensolve_lowest(&op, SliceRequest::Full)?;
    let l1 = spec.pairs()[0].value;

    println!("{:>6} {:>12} {:>12} {:>12}", "t", "Z(t)", "Q(t)", "bound(eps=1)");
    for t in [0.01, 0.05, 0.1, 0.5] {
        let z = heat_trace(&spec, t)?;
        let q = heat_content(&op, &spec, t)?;
        let bound = thm17_rhs(1, 1.0, l1, heat_trace(&spec, t / 3.0)?.value)?;
        println!("{t:>6} {:>12.6} {:>12.6} {:>12.2}", z.value, q.value, bound);
    }

    let t = 0.05;
    let z = heat_trace(&spec, t)?.value;
    for lambda in [20.0, 100.0, 400.0] {
        let n = counting_function(&spec, lambda)?;
        println!("N_{lambda} = {n} <= Z({t}) e^({t} lambda) = {:.3}", lemma18_rhs(z, t, lambda)?);
    }
    Ok(())
}
