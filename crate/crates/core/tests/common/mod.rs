//! Random small operators and the structural properties they must satisfy.
//! Shared by the `properties` and `acceptance` targets.
#![allow(dead_code)]

use heatbound::heat::{domination_check, heat_content, heat_trace, padded_free_operator, semigroup_apply, t_min};
use heatbound::{
    assemble_operator, build_mask, counting_function, eigensolve_lowest, restrict_to_open_set, DiscreteOperator, DomainMask,
    GridSpec, PotentialField, Shape, ShapeOp, SliceRequest, SpectrumSlice,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub struct Instance {
    pub mask: DomainMask,
    pub potential: PotentialField,
    pub op: DiscreteOperator,
    pub spec: SpectrumSlice,
    rng: ChaCha8Rng,
}

fn random_box(rng: &mut ChaCha8Rng, dim: usize) -> Shape {
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for _ in 0..dim {
        let a: f64 = rng.gen_range(0.0..0.6);
        let w = rng.gen_range(0.25..(1.0 - a).max(0.26));
        lo.push(a);
        hi.push((a + w).min(1.0));
    }
    Shape::rect(&lo, &hi)
}

/// A union of one to three boxes in the unit cube (1D at h = 1/40 or 2D at
/// h = 1/14) with a nonnegative piecewise-constant potential.
pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = if rng.gen_bool(0.5) { 1 } else { 2 };
    let grid = GridSpec::unit(dim, if dim == 1 { 40 } else { 14 }).unwrap();
    let shapes: Vec<ShapeOp> = (0..rng.gen_range(1..=3))
        .map(|_| ShapeOp::union(random_box(&mut rng, dim)))
        .collect();
    let mask = build_mask(&grid, &shapes).unwrap();
    let bump = random_box(&mut rng, dim);
    let (base, height) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..200.0));
    let potential = PotentialField::from_fn(&grid, |x| base + if bump.contains_closed(x) { height } else { 0.0 }).unwrap();
    let op = assemble_operator(&mask, &potential).unwrap();
    let spec = eigensolve_lowest(&op, SliceRequest::Full).unwrap();
    Instance {
        mask,
        potential,
        op,
        spec,
        rng,
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn t_range(inst: &mut Instance) -> f64 {
    let tm = t_min(inst.op.h());
    tm * (1.0 + inst.rng.gen_range(0.0..200.0))
}

/// `0 <= e^{-tH}(x, y) <= e^{tΔ_h}(x, y)` entrywise.
pub fn domination(seed: u64) -> Check {
    let mut inst = instance(seed);
    let t = t_range(&mut inst).min(0.02);
    let free = padded_free_operator(&inst.op, t).map_err(|e| e.to_string())?;
    let rep = domination_check(&inst.op, &free, t).map_err(|e| e.to_string())?;
    ensure(rep.pass, || format!("seed {seed}: domination excess {} at t={t}", rep.lhs))
}

/// `e^{-(s+t)H} = e^{-sH} e^{-tH}` to 1e-9 relative.
pub fn semigroup_law(seed: u64) -> Check {
    let mut inst = instance(seed);
    let (s, t) = (t_range(&mut inst), t_range(&mut inst));
    let v: Vec<f64> = (0..inst.op.dim()).map(|_| inst.rng.gen_range(0.0..1.0)).collect();
    let run = |t: f64, v: &[f64]| semigroup_apply(&inst.op, &inst.spec, t, v, 1e-14).unwrap().values;
    let two = run(s, &run(t, &v));
    let one = run(s + t, &v);
    let scale = one.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let err = two.iter().zip(&one).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    ensure(err <= 1e-9 * scale, || format!("seed {seed}: semigroup defect {err:e} (scale {scale:e})"))
}

/// Shrinking the domain or raising the potential cannot lower any `λ_k`.
pub fn eigenvalue_monotonicity(seed: u64) -> Check {
    let mut inst = instance(seed);
    let grid = inst.mask.grid().clone();
    let cut = random_box(&mut inst.rng, grid.dim());
    let sub = inst.mask.filter(|flat| !cut.contains_closed(&grid.coords(flat)));
    let base = inst.spec.values();
    if let Some(sub) = sub {
        let small = restrict_to_open_set(&inst.op, &sub).map_err(|e| e.to_string())?;
        let vals = eigensolve_lowest(&small, SliceRequest::Full).unwrap().values();
        for (k, (a, b)) in base.iter().zip(&vals).take(5).enumerate() {
            ensure(*b >= a * (1.0 - 1e-10), || format!("seed {seed}: subdomain lambda_{} {b} < {a}", k + 1))?;
        }
    }
    let extra = inst.rng.gen_range(0.0..50.0);
    let bump = random_box(&mut inst.rng, grid.dim());
    let raised = PotentialField::from_fn(&grid, |x| {
        let i = grid.nearest_node(x).unwrap();
        inst.potential.at(i) + if bump.contains_closed(x) { extra } else { 0.0 }
    })
    .unwrap();
    let op = assemble_operator(&inst.mask, &raised).unwrap();
    let vals = eigensolve_lowest(&op, SliceRequest::Full).unwrap().values();
    for (k, (a, b)) in base.iter().zip(&vals).take(5).enumerate() {
        ensure(*b >= a * (1.0 - 1e-10), || format!("seed {seed}: raised-potential lambda_{} {b} < {a}", k + 1))?;
    }
    Ok(())
}

/// `λ ↦ N_λ` is nondecreasing.
pub fn counting_monotone(seed: u64) -> Check {
    let inst = instance(seed);
    let top = inst.spec.values().last().copied().unwrap_or(1.0) * 1.1;
    let mut prev = 0;
    for i in 0..=60 {
        let n = counting_function(&inst.spec, top * i as f64 / 60.0).map_err(|e| e.to_string())?;
        ensure(n >= prev, || format!("seed {seed}: N drops from {prev} to {n}"))?;
        prev = n;
    }
    ensure(prev == inst.op.dim(), || format!("seed {seed}: N_top = {prev} != dim {}", inst.op.dim()))
}

/// `Z(t)` and `Q(t)` are decreasing in `t`.
pub fn trace_content_decreasing(seed: u64) -> Check {
    let inst = instance(seed);
    let tm = t_min(inst.op.h());
    let (mut z0, mut q0) = (f64::INFINITY, f64::INFINITY);
    for i in 0..20 {
        let t = tm * 1.5f64.powi(i);
        let z = heat_trace(&inst.spec, t).map_err(|e| e.to_string())?.value;
        let q = heat_content(&inst.op, &inst.spec, t).map_err(|e| e.to_string())?.value;
        ensure(z <= z0 && q <= q0, || format!("seed {seed}: Z or Q increases at t={t}"))?;
        (z0, q0) = (z, q);
    }
    Ok(())
}

pub const PROPERTIES: [(&str, fn(u64) -> Check); 5] = [
    ("domination by the free semigroup", domination),
    ("semigroup law", semigroup_law),
    ("eigenvalue monotonicity in domain and potential", eigenvalue_monotonicity),
    ("counting function monotone", counting_monotone),
    ("Z(t), Q(t) decreasing", trace_content_decreasing),
];
