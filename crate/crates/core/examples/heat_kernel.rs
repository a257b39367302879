//! Heat kernel of the unit interval: point values, the Gaussian envelope for
//! `t >= d/(2E₀)`, and entrywise domination by the free lattice semigroup.

use heatbound::bounds::{combined_hke_rhs, hke_rhs};
use heatbound::heat::{domination_check, heat_kernel_point, padded_free_operator, t_min};
use heatbound::{assemble_operator, build_mask, eigensolve_lowest, GridSpec, PotentialField, Result, Shape, ShapeOp, SliceRequest};

fn main() -> Result<()> {
    let g = GridSpec::unit(1, 400)?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))])?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g))?;
    let spec = eigensolve_lowest(&op, SliceRequest::Full)?;
    let e0 = spec.pairs()[0].value;
    println!("E0 = {e0:.6}, t_min = {:.2e}, envelope valid from t = {:.4}", t_min(op.h()), 1.0 / (2.0 * e0));

    for (t, x, y) in [(0.1, 0.5, 0.5), (0.1, 0.3, 0.7), (0.5, 0.2, 0.5)] {
        let k = heat_kernel_point(&op, &spec, t, &[x], &[y])?;
        let r = (x - y as f64).abs();
        println!(
            "t={t} x={x} y={y}: p={:.6}  envelope={:.6}  combined={:.6}",
            k.value,
            hke_rhs(1, e0, t, r)?,
            combined_hke_rhs(1, e0, t, r)?
        );
    }

    // coarser grid: the domination check builds dense columns
    let g = GridSpec::unit(1, 50)?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))])?;
    let op = assemble_operator(&mask, &PotentialField::constant(&g, 3.0)?)?;
    let t = 0.01;
    let free = padded_free_operator(&op, t)?;
    let rep = domination_check(&op, &free, t)?;
    println!("{}: max excess {:.3e}, pass = {}", rep.label, rep.lhs, rep.pass);
    Ok(())
}
