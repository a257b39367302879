//! Dirichlet eigenvalues of an interval, a square and an L-shape, against
//! the analytic values where they exist.

use std::f64::consts::PI;

use heatbound::{assemble_operator, build_mask, eigensolve_lowest, GridSpec, PotentialField, Result, Shape, ShapeOp, SliceRequest};

fn main() -> Result<()> {
    let g = GridSpec::unit(1, 400)?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))])?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g))?;
    let spec = eigensolve_lowest(&op, SliceRequest::Count(5))?;
    println!("interval, h = 1/400");
    for (k, p) in spec.pairs().iter().enumerate() {
        let exact = ((k + 1) as f64 * PI).powi(2);
        println!("  k={} lambda={:.6} (k pi)^2={:.6} rel.err={:.2e}", k + 1, p.value, exact, (p.value - exact).abs() / exact);
    }

    let g = GridSpec::unit(2, 64)?;
    let square = build_mask(&g, &[ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0]))])?;
    let op = assemble_operator(&square, &PotentialField::zero(&g))?;
    let spec = eigensolve_lowest(&op, SliceRequest::Count(4))?;
    println!("unit square, h = 1/64 (dof {})", op.dim());
    println!("  lambda_1 = {:.5} vs 2 pi^2 = {:.5}", spec.pairs()[0].value, 2.0 * PI * PI);
    println!("  clusters (value, multiplicity): {:?}", spec.clusters());

    let lshape = build_mask(
        &g,
        &[
            ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0])),
            ShapeOp::difference(Shape::rect(&[0.5, 0.5], &[1.0, 1.0])),
        ],
    )?;
    let op = assemble_operator(&lshape, &PotentialField::zero(&g))?;
    let spec = eigensolve_lowest(&op, SliceRequest::Threshold(200.0))?;
    println!("L-shape, h = 1/64: {} eigenvalues below {}", spec.len(), spec.cutoff());
    println!("  lowest: {:?}", &spec.values()[..3]);
    Ok(())
}
