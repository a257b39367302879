//! L1 norms of Dirichlet eigenfunctions against the upper bound driven by
//! the counting function and the lower bound `(2πd/e)^{d/2} λ^{-d/2}`.

use heatbound::bounds::{proof_parameters, thm11_lower, thm11_rhs};
use heatbound::geometry::ball_ground_energy;
use heatbound::spectral::{grid_norm, GridNorm};
use heatbound::{assemble_operator, build_mask, counting_function, eigensolve_lowest, GridSpec, PotentialField, Result, Shape, ShapeOp, SliceRequest};

fn main() -> Result<()> {
    let g = GridSpec::unit(2, 32)?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0]))])?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g))?;
    let spec = eigensolve_lowest(&op, SliceRequest::Full)?;

    println!("{:>3} {:>10} {:>10} {:>10} {:>12}", "k", "lambda", "lower", "||phi||_1^2", "upper(t=2l)");
    for (k, p) in spec.pairs().iter().take(6).enumerate() {
        let l1 = grid_norm(&op, &p.vector, GridNorm::L1)?;
        let t = 2.0 * p.value;
        let n = counting_function(&spec, t)?;
        println!(
            "{:>3} {:>10.4} {:>10.5} {:>10.5} {:>12.1}",
            k + 1,
            p.value,
            thm11_lower(2, p.value)?,
            l1 * l1,
            thm11_rhs(2, p.value, t, n)?
        );
    }

    // the internal parameters of the upper bound's proof at k = 1
    let lambda = spec.pairs()[0].value;
    let pp = proof_parameters(2, lambda, 2.0 * lambda, ball_ground_energy(2)?)?;
    println!("proof parameters at t = 2 lambda_1: c = {:.4}, r = {:.4}, eps = {:.4}, invariants hold: {}", pp.c, pp.r, pp.eps, pp.invariants_hold());
    Ok(())
}
