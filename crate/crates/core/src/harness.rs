//! Scenario runner: builds the operator and one spectrum slice, runs each
//! requested suite (concurrently) and assembles an order-stable report list.
//!
//! Kernel suites evaluate on a logarithmic grid from `max(d/(2E₀), t_min(h))`
//! to `horizon/E₀`. Below that the lattice kernel is not close to the
//! continuum one in the far field and no continuum envelope applies.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{
    combined_hke_rhs, cor13_rhs, davies_rhs, hke_rhs, lemma18_rhs, liyau_default_k, liyau_rhs, thm11_lower,
    thm11_rhs, thm17_rhs, thm34_rhs,
};
use crate::error::{Error, Result};
use crate::freespace::{offdiag_resolvent_exact, prop35_bound, remark36_bound, OffDiagonalSetup};
use crate::geometry::{
    ball_energy_report, ball_ground_energy, cutoff_build, cutoff_reports, lemma41_check, lemma42_check,
    local_energy_map, localization_residual, mollifier_build, mollifier_reports, sublevel_sets, DerivativeScheme,
    EnergyField,
};
use crate::heat::{heat_content, heat_trace, kernel_block, t_min, weighted_norm};
use crate::operator::DiscreteOperator;
use crate::report::{BoundReport, GridMeta};
use crate::scenario::ScenarioConfig;
use crate::spectral::{
    counting_function, eigensolve_lowest, grid_norm, EigenPair, GridNorm, SliceRequest, SpectrumSlice,
    DENSE_LIMIT,
};

/// Kernel truncation target: `dim h^{-d} e^{-tΛ} <= e^{-KERNEL_DIGITS}`.
const KERNEL_DIGITS: f64 = 30.0;
/// Trace truncation target, relative to `e^{-tλ₁}`.
const TRACE_DIGITS: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Worker threads; rayon's default when absent.
    pub jobs: Option<usize>,
    /// Multiplies every configured slack.
    pub slack_factor: f64,
    /// Records per-suite wall time in the reports (breaks bit-identical reruns).
    pub wall_time: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: None,
            slack_factor: 1.0,
            wall_time: false,
        }
    }
}

/// Runs every suite of `config` with default options.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<BoundReport>> {
    run_scenario_with(config, &RunOptions::default())
}

pub fn run_scenario_with(config: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<BoundReport>> {
    config.validate()?;
    if !(opts.slack_factor >= 1.0 && opts.slack_factor.is_finite()) {
        return Err(Error::config("slack", format!("factor {} is below 1", opts.slack_factor)));
    }
    if opts.jobs == Some(0) {
        return Err(Error::config("jobs", "must be positive"));
    }
    let mut cfg = config.clone();
    cfg.slack = cfg.slack.scaled(opts.slack_factor);
    let op = cfg.operator()?;
    let run = || run_suites(&cfg, &op, opts.wall_time);
    match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Margins of matching reports at `h` and `h/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub suite: String,
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub margin_h: Option<f64>,
    pub margin_h2: Option<f64>,
}

impl Convergence {
    /// `margin(h/2) / margin(h)`.
    pub fn ratio(&self) -> Option<f64> {
        Some(self.margin_h2? / self.margin_h?)
    }
}

/// Runs at `h` and at `h/2`; reports are paired by suite and position.
pub fn run_refined(
    config: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<(Vec<BoundReport>, Vec<BoundReport>, Vec<Convergence>)> {
    let coarse = run_scenario_with(config, opts)?;
    let fine = run_scenario_with(&config.refined()?, opts)?;
    let group = |reps: &[BoundReport]| {
        let mut m: BTreeMap<String, Vec<BoundReport>> = BTreeMap::new();
        for r in reps {
            m.entry(r.suite.clone()).or_default().push(r.clone());
        }
        m
    };
    let (gc, gf) = (group(&coarse), group(&fine));
    let mut conv = Vec::new();
    for (suite, rows) in &gc {
        let Some(other) = gf.get(suite) else { continue };
        if other.len() != rows.len() {
            continue;
        }
        for (a, b) in rows.iter().zip(other) {
            if a.label == b.label {
                conv.push(Convergence {
                    suite: suite.clone(),
                    label: a.label.clone(),
                    params: a.params.clone(),
                    margin_h: a.margin,
                    margin_h2: b.margin,
                });
            }
        }
    }
    Ok((coarse, fine, conv))
}

fn param_order(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Ordering {
    for ((ka, va), (kb, vb)) in a.iter().zip(b) {
        let o = ka.cmp(kb).then(va.total_cmp(vb));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn run_suites(cfg: &ScenarioConfig, op: &DiscreteOperator, wall_time: bool) -> Result<Vec<BoundReport>> {
    let ctx = Context::new(cfg, op);
    let mut suites = cfg.suites.clone();
    suites.sort();
    let per_suite: Vec<Vec<BoundReport>> = suites
        .par_iter()
        .map(|s| {
            let start = Instant::now();
            let mut reps = match run_suite(&ctx, s) {
                Ok(r) => r,
                Err(e) => vec![BoundReport::new(s, "suite completed", f64::NAN, f64::NAN, 1.0)
                    .fail_with(format!("suite error: {e}"))],
            };
            let elapsed = start.elapsed().as_secs_f64();
            for r in &mut reps {
                r.scenario = cfg.name.clone();
                r.suite = s.clone();
                if r.grid.is_none() && !matches!(s.as_str(), "prop35" | "rmk36") {
                    r.grid = Some(ctx.meta());
                }
                if wall_time {
                    r.wall_time_s = Some(elapsed);
                }
            }
            reps.sort_by(|a, b| param_order(&a.params, &b.params));
            reps
        })
        .collect();
    Ok(per_suite.into_iter().flatten().collect())
}

fn run_suite(ctx: &Context, suite: &str) -> Result<Vec<BoundReport>> {
    match suite {
        "thm11" => thm11(ctx),
        "lower12a" => lower12a(ctx),
        "cor13" => cor13(ctx),
        "liyau14" => liyau14(ctx),
        "hke15" => kernel_envelope(ctx, "hke15"),
        "combined16a" => kernel_envelope(ctx, "combined16a"),
        "thm34" => thm34(ctx),
        "thm17" => thm17(ctx),
        "lemma18" => lemma18(ctx),
        "weighted31" => weighted31(ctx),
        "davies33" => davies33(ctx),
        "prop35" => prop35(ctx),
        "rmk36" => rmk36(ctx),
        "lemma24" => lemma24(ctx),
        "lemma41" => lemma41(ctx),
        "lemma42" => lemma42(ctx),
        "lemma44" => lemma44(ctx),
        other => Err(Error::config("suites", format!("unknown suite `{other}`"))),
    }
}

/// Spectrum slice plus the derived kernel t-grid.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub slice: SpectrumSlice,
    pub e0: f64,
    pub t_grid: Vec<f64>,
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    op: &'a DiscreteOperator,
    spectral: OnceLock<Result<Spectral>>,
    energy: OnceLock<Result<EnergyField>>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ScenarioConfig, op: &'a DiscreteOperator) -> Self {
        Self {
            cfg,
            op,
            spectral: OnceLock::new(),
            energy: OnceLock::new(),
        }
    }

    fn d(&self) -> usize {
        self.op.space_dim()
    }

    fn meta(&self) -> GridMeta {
        GridMeta {
            dim: self.d(),
            h: self.op.h(),
            dof: self.op.dim(),
        }
    }

    fn spectral(&self) -> Result<&Spectral> {
        self.spectral
            .get_or_init(|| spectral_data(self.cfg, self.op))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn energy(&self) -> Result<&EnergyField> {
        self.energy
            .get_or_init(|| local_energy_map(self.op, self.cfg.params.geometry_r))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Levels for the counting-function suites: `n` equal steps from `λ₁`
    /// up to `max factor · λ_k`. `λ₁` itself is left out, since counting at
    /// an eigenvalue is decided by round-off.
    fn levels(&self, n: usize) -> Result<Vec<f64>> {
        let s = self.spectral()?;
        let top = self.level_top()?;
        Ok((1..=n).map(|i| s.e0 + (top - s.e0) * i as f64 / n as f64).collect())
    }

    fn level_top(&self) -> Result<f64> {
        let s = self.spectral()?;
        let k = self.cfg.params.eigen_count.min(s.slice.len());
        let fmax = self.cfg.params.t_factors.iter().copied().fold(1.0, f64::max);
        let mut top = s.slice.pairs()[k - 1].value * fmax;
        if !s.slice.is_full() {
            top = top.min(0.95 * s.slice.cutoff());
        }
        Ok(top)
    }
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| match i {
            0 => a,
            _ if i == n - 1 => b,
            _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// The kernel t-grid `max(d/(2E₀), t_min(h)) ..= horizon/E₀`.
pub fn kernel_t_grid(d: usize, h: f64, e0: f64, horizon: f64, n: usize) -> Result<Vec<f64>> {
    let lo = (d as f64 / (2.0 * e0)).max(t_min(h));
    let hi = horizon / e0;
    if !(hi > lo) {
        return Err(Error::config(
            "params.horizon",
            format!("t-grid is empty: horizon/E0 = {hi} <= {lo}"),
        ));
    }
    Ok(logspace(lo, hi, n))
}

fn uses_any(cfg: &ScenarioConfig, ids: &[&str]) -> bool {
    cfg.suites.iter().any(|s| ids.contains(&s.as_str()))
}

/// One slice serving every suite: the full spectrum when dense, otherwise
/// every eigenvalue below a level that certifies the L1 counting values and
/// the kernel/trace truncations on the t-grid.
pub fn spectral_data(cfg: &ScenarioConfig, op: &DiscreteOperator) -> Result<Spectral> {
    let p = &cfg.params;
    let d = op.space_dim();
    let h = op.h();
    if op.dim() <= DENSE_LIMIT {
        let slice = eigensolve_lowest(op, SliceRequest::Full)?;
        let e0 = slice.pairs()[0].value;
        let t_grid = kernel_t_grid(d, h, e0, p.horizon, p.t_points)?;
        return Ok(Spectral { slice, e0, t_grid });
    }
    let head = eigensolve_lowest(op, SliceRequest::Count(p.eigen_count.min(op.dim())))?;
    let e0 = head.pairs()[0].value;
    let lam_k = head.pairs()[p.eigen_count.min(head.len()) - 1].value;
    let t_grid = kernel_t_grid(d, h, e0, p.horizon, p.t_points)?;
    let fmax = p.t_factors.iter().copied().fold(1.0, f64::max);
    let emax = p.cor13_eps.iter().copied().fold(0.0, f64::max);
    let mut level = lam_k * fmax.max(1.0 + emax) * 1.05;
    let dim = op.dim() as f64;
    if uses_any(cfg, &["hke15", "combined16a", "thm34", "davies33", "weighted31"]) {
        let kernel = ((dim * h.powi(-(d as i32))).ln() + KERNEL_DIGITS) / t_grid[0];
        level = level.max(kernel);
    }
    if uses_any(cfg, &["thm17", "lemma18"]) {
        let e_max = p.thm17_eps.iter().copied().fold(0.0, f64::max);
        let t_small = t_grid[0] / (2.0 + e_max);
        level = level.max(dim.ln() / t_small + TRACE_DIGITS / t_small + e0);
    }
    let slice = eigensolve_lowest(op, SliceRequest::Threshold(level))?;
    Ok(Spectral { slice, e0, t_grid })
}

fn norms(ctx: &Context, k: usize) -> Result<(f64, f64, f64)> {
    let s = ctx.spectral()?;
    let pair = &s.slice.pairs()[k];
    let l1 = grid_norm(ctx.op, &pair.vector, GridNorm::L1)?;
    let l2 = grid_norm(ctx.op, &pair.vector, GridNorm::L2)?;
    Ok((pair.value, l1, l2))
}

fn eigen_indices(ctx: &Context) -> Result<std::ops::Range<usize>> {
    Ok(0..ctx.cfg.params.eigen_count.min(ctx.spectral()?.slice.len()))
}

fn thm11(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let spec = &ctx.spectral()?.slice;
    let mut out = Vec::new();
    for k in eigen_indices(ctx)? {
        let (lambda, l1, l2) = norms(ctx, k)?;
        for &f in &ctx.cfg.params.t_factors {
            let t = f * lambda;
            let n = counting_function(spec, t)?;
            out.push(
                BoundReport::new(
                    "thm11",
                    "||phi||_1^2 <= c_d (t-l)^{-d/2} ln(3t/(t-l))^d N_t ||phi||_2^2",
                    l1 * l1,
                    thm11_rhs(d, lambda, t, n)? * l2 * l2,
                    ctx.cfg.slack.eigen,
                )
                .param("k", (k + 1) as f64)
                .param("lambda", lambda)
                .param("t_factor", f)
                .param("t", t)
                .param("n_t", n as f64),
            );
        }
    }
    Ok(out)
}

fn lower12a(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    eigen_indices(ctx)?
        .map(|k| {
            let (lambda, l1, l2) = norms(ctx, k)?;
            Ok(BoundReport::new(
                "lower12a",
                "(2 pi d/e)^{d/2} l^{-d/2} ||phi||_2^2 <= ||phi||_1^2",
                thm11_lower(d, lambda)? * l2 * l2,
                l1 * l1,
                ctx.cfg.slack.eigen,
            )
            .param("k", (k + 1) as f64)
            .param("lambda", lambda))
        })
        .collect()
}

fn cor13(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let spec = &ctx.spectral()?.slice;
    let mut out = Vec::new();
    for k in eigen_indices(ctx)? {
        let (lambda, l1, l2) = norms(ctx, k)?;
        for &eps in &ctx.cfg.params.cor13_eps {
            let n = counting_function(spec, (1.0 + eps) * lambda)?;
            out.push(
                BoundReport::new(
                    "cor13",
                    "||phi||_1^2 <= c_d C_eps^d l^{-d/2} N_{(1+eps)l} ||phi||_2^2",
                    l1 * l1,
                    cor13_rhs(d, lambda, eps, n)? * l2 * l2,
                    ctx.cfg.slack.eigen,
                )
                .param("k", (k + 1) as f64)
                .param("lambda", lambda)
                .param("eps", eps)
                .param("n", n as f64),
            );
        }
    }
    Ok(out)
}

fn liyau14(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let spec = &ctx.spectral()?.slice;
    let vol = ctx.op.mask().volume();
    let (k, note) = match ctx.cfg.params.liyau_k {
        Some(k) => (k, "K_d from the scenario"),
        None => (
            liyau_default_k(d),
            "K_d = (1+2/d)^{d/2} (2 pi)^{-d} omega_d, an external (Berezin-Li-Yau) constant",
        ),
    };
    ctx.levels(ctx.cfg.params.lemma18_levels)?
        .into_iter()
        .map(|t| {
            let n = counting_function(spec, t)?;
            Ok(BoundReport::new(
                "liyau14",
                "N_t <= K_d vol t^{d/2}",
                n as f64,
                liyau_rhs(d, vol, t, Some(k))?,
                ctx.cfg.slack.spectral,
            )
            .param("t", t)
            .param("K_d", k)
            .param("vol", vol)
            .with_note(note))
        })
        .collect()
}

/// Sample DOFs: `n` interior points per axis, nearest occupied nodes only.
fn sample_dofs(op: &DiscreteOperator, n: usize) -> Vec<usize> {
    let g = op.grid();
    let d = g.dim();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = (0..d)
            .map(|a| g.lo()[a] + (idx[a] + 1) as f64 * (g.hi()[a] - g.lo()[a]) / (n + 1) as f64)
            .collect();
        if let Ok(i) = op.dof_at(&x) {
            if !out.contains(&i) {
                out.push(i);
            }
        }
        let mut a = 0;
        loop {
            if a == d {
                return out;
            }
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Worst pair of `p_t + truncation <= bound(|x-y|)` over the sample, by ratio.
fn worst_pair(
    ctx: &Context,
    t: f64,
    samples: &[usize],
    bound: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64, usize, usize, f64)> {
    let spec = &ctx.spectral()?.slice;
    let (block, trunc) = kernel_block(ctx.op, spec, t, samples, samples)?;
    let coords: Vec<Vec<f64>> = samples.iter().map(|&i| ctx.op.coords(i)).collect();
    let mut best: Option<(f64, f64, f64, usize, usize)> = None;
    for a in 0..samples.len() {
        for b in 0..samples.len() {
            let lhs = block[a * samples.len() + b] + trunc;
            let rhs = bound(dist(&coords[a], &coords[b]))?;
            let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
            if best.map_or(true, |w| ratio > w.0) {
                best = Some((ratio, lhs, rhs, samples[a], samples[b]));
            }
        }
    }
    let (_, lhs, rhs, i, j) = best.ok_or_else(|| Error::domain("no sample point lies in the domain"))?;
    Ok((lhs, rhs, i, j, trunc))
}

fn with_pair(mut rep: BoundReport, op: &DiscreteOperator, i: usize, j: usize) -> BoundReport {
    for (a, v) in op.coords(i).into_iter().enumerate() {
        rep = rep.param(&format!("x{a}"), v);
    }
    for (a, v) in op.coords(j).into_iter().enumerate() {
        rep = rep.param(&format!("y{a}"), v);
    }
    rep
}

fn kernel_envelope(ctx: &Context, suite: &str) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let s = ctx.spectral()?;
    let e0 = s.e0;
    let samples = sample_dofs(ctx.op, ctx.cfg.params.kernel_samples);
    let label = match suite {
        "hke15" => "p_t(x,y) <= (e E0/(2 pi d))^{d/2} exp(-E0 t - |x-y|^2/4t)",
        _ => "p_t(x,y) <= (4 pi t)^{-d/2} (1 + (2e/d) E0 t)^{d/2} exp(-E0 t - |x-y|^2/4t)",
    };
    s.t_grid
        .iter()
        .map(|&t| {
            let (lhs, rhs, i, j, trunc) = worst_pair(ctx, t, &samples, |r| match suite {
                "hke15" => hke_rhs(d, e0, t, r),
                _ => combined_hke_rhs(d, e0, t, r),
            })?;
            let rep = BoundReport::new(suite, label, lhs, rhs, ctx.cfg.slack.kernel)
                .param("t", t)
                .param("E0", e0)
                .param("truncation", trunc);
            Ok(with_pair(rep, ctx.op, i, j))
        })
        .collect()
}

fn thm34(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let s = ctx.spectral()?;
    let samples = sample_dofs(ctx.op, ctx.cfg.params.kernel_samples);
    let mut out = Vec::new();
    for &eps in &ctx.cfg.params.thm34_eps {
        for &t in &s.t_grid {
            let (lhs, rhs, i, j, trunc) = worst_pair(ctx, t, &samples, |r| thm34_rhs(d, eps, s.e0, t, r))?;
            let rep = BoundReport::new(
                "thm34",
                "p_t(x,y) <= eps^{-d/2} e^{-(1-eps) E0 t} k_t(x-y)",
                lhs,
                rhs,
                ctx.cfg.slack.kernel,
            )
            .param("eps", eps)
            .param("t", t)
            .param("truncation", trunc);
            out.push(with_pair(rep, ctx.op, i, j));
        }
    }
    Ok(out)
}

fn thm17(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let s = ctx.spectral()?;
    let mut out = Vec::new();
    for &eps in &ctx.cfg.params.thm17_eps {
        for &t in &s.t_grid {
            let q = heat_content(ctx.op, &s.slice, t)?;
            let z = heat_trace(&s.slice, t / (2.0 + eps))?;
            out.push(
                BoundReport::new(
                    "thm17",
                    "Q(t) <= c_d C_eps^d l_1^{-d/2} Z(t/(2+eps))^2",
                    q.value + q.tail_bound,
                    thm17_rhs(d, eps, s.e0, z.value)?,
                    ctx.cfg.slack.spectral,
                )
                .param("eps", eps)
                .param("t", t)
                .param("Z", z.value),
            );
        }
    }
    Ok(out)
}

fn lemma18(ctx: &Context) -> Result<Vec<BoundReport>> {
    let s = ctx.spectral()?;
    let p = &ctx.cfg.params;
    let times = logspace(s.t_grid[0], s.t_grid[s.t_grid.len() - 1], p.lemma18_times);
    let levels = ctx.levels(p.lemma18_levels)?;
    let mut out = Vec::new();
    for &tt in &times {
        let z = heat_trace(&s.slice, tt)?;
        for &l in &levels {
            let n = counting_function(&s.slice, l)?;
            out.push(
                BoundReport::new(
                    "lemma18",
                    "N_l <= Z(T) e^{T l}",
                    n as f64,
                    lemma18_rhs(z.value, tt, l)?,
                    ctx.cfg.slack.spectral,
                )
                .param("T", tt)
                .param("lambda", l),
            );
        }
    }
    Ok(out)
}

fn weighted_times(ctx: &Context) -> Result<Vec<f64>> {
    let g = &ctx.spectral()?.t_grid;
    let m = ctx.cfg.params.weighted_points.min(g.len());
    if m == 1 {
        return Ok(vec![g[0]]);
    }
    Ok((0..m)
        .map(|k| g[(k as f64 * (g.len() - 1) as f64 / (m - 1) as f64).round() as usize])
        .collect())
}

fn xi_vector(d: usize, norm: f64) -> Vec<f64> {
    vec![norm / (d as f64).sqrt(); d]
}

fn weighted31(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let s = ctx.spectral()?;
    let mut out = Vec::new();
    for t in weighted_times(ctx)? {
        for &xi in &ctx.cfg.params.xi_values {
            let w = weighted_norm(ctx.op, &s.slice, t, &xi_vector(d, xi))?;
            out.push(
                BoundReport::new(
                    "weighted31",
                    "||rho_xi e^{-tH} rho_xi^{-1}||_{2->2} <= e^{t|xi|^2 - E0 t}",
                    w.norm,
                    w.continuum_bound,
                    ctx.cfg.slack.weighted,
                )
                .param("t", t)
                .param("xi", xi)
                .param("lattice_bound", w.discrete_bound),
            );
        }
    }
    Ok(out)
}

fn davies33(ctx: &Context) -> Result<Vec<BoundReport>> {
    let d = ctx.d();
    let s = ctx.spectral()?;
    let (samples, note) = if d == 1 && ctx.op.dim() <= DENSE_LIMIT {
        ((0..ctx.op.dim()).collect::<Vec<_>>(), "sup over all node pairs")
    } else {
        (
            sample_dofs(ctx.op, ctx.cfg.params.davies_samples),
            "sup over a sample of node pairs",
        )
    };
    let coords: Vec<Vec<f64>> = samples.iter().map(|&i| ctx.op.coords(i)).collect();
    let mut out = Vec::new();
    for t in weighted_times(ctx)? {
        let (block, trunc) = kernel_block(ctx.op, &s.slice, t, &samples, &samples)?;
        for &xi in &ctx.cfg.params.xi_values {
            let xv = xi_vector(d, xi);
            let mut lhs: f64 = 0.0;
            for a in 0..samples.len() {
                for b in 0..samples.len() {
                    let shift: f64 = (0..d).map(|k| xv[k] * (coords[a][k] - coords[b][k])).sum();
                    lhs = lhs.max(shift.exp() * (block[a * samples.len() + b] + trunc));
                }
            }
            out.push(
                BoundReport::new(
                    "davies33",
                    "sup e^{xi.(x-y)} p_t(x,y) <= (4 pi t)^{-d/2} e^{|xi|^2 t}",
                    lhs,
                    davies_rhs(d, t, xi)?,
                    ctx.cfg.slack.kernel,
                )
                .param("t", t)
                .param("xi", xi)
                .with_note(note),
            );
        }
    }
    Ok(out)
}

fn prop35(ctx: &Context) -> Result<Vec<BoundReport>> {
    let p = &ctx.cfg.params;
    let mut out = Vec::new();
    for &d in &p.freespace_dims {
        for &mu in &p.mu {
            for &r in &p.radii {
                let exact = offdiag_resolvent_exact(&OffDiagonalSetup::half_spaces(d, r, mu, 0.5))?;
                for &theta in &p.theta {
                    out.push(
                        BoundReport::new(
                            "prop35",
                            "sup_B int_A G_mu <= (1-theta^2)^{-d/2} (1/mu) e^{-theta sqrt(mu) r}",
                            exact.value + exact.error,
                            prop35_bound(d, mu, theta, r)?,
                            ctx.cfg.slack.freespace,
                        )
                        .param("d", d as f64)
                        .param("mu", mu)
                        .param("r", r)
                        .param("theta", theta),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Grid points violating `μ > (d/(2r))²` are outside the remark and skipped.
fn rmk36(ctx: &Context) -> Result<Vec<BoundReport>> {
    let p = &ctx.cfg.params;
    let mut out = Vec::new();
    for &d in &p.freespace_dims {
        for &mu in &p.mu {
            for &r in &p.radii {
                if !(mu > (d as f64 / (2.0 * r)).powi(2)) {
                    continue;
                }
                let exact = offdiag_resolvent_exact(&OffDiagonalSetup::half_spaces(d, r, mu, 0.5))?;
                out.push(
                    BoundReport::new(
                        "rmk36",
                        "sup_B int_A G_mu <= (2e/d + r sqrt(mu))^{d/2} (1/mu) e^{-r sqrt(mu)}",
                        exact.value + exact.error,
                        remark36_bound(d, mu, r)?,
                        ctx.cfg.slack.freespace,
                    )
                    .param("d", d as f64)
                    .param("mu", mu)
                    .param("r", r),
                );
            }
        }
    }
    Ok(out)
}

/// Quintic smoothstep from 0 at `a` to 1 at `b`.
fn ramp(x: f64, a: f64, b: f64) -> f64 {
    let s = ((x - a) / (b - a)).clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// A ground state fixed independently of the solver: the projection of the
/// indicator of `region` onto the lowest eigenspace. For a simple eigenvalue
/// this is `±φ₁`; for a degenerate one (several equal components) it picks
/// the same function at every `h`.
fn canonical_ground_state(op: &DiscreteOperator, region: impl Fn(&[f64]) -> bool) -> Result<EigenPair> {
    let slice = eigensolve_lowest(op, SliceRequest::Count(1))?;
    let mult = slice.clusters()[0].1;
    let cluster = &slice.pairs()[..mult];
    if mult == 1 {
        return Ok(cluster[0].clone());
    }
    let w: Vec<f64> = (0..op.dim())
        .map(|i| if region(&op.coords(i)) { 1.0 } else { 0.0 })
        .collect();
    let mut v = vec![0.0; op.dim()];
    for p in cluster {
        let c: f64 = w.iter().zip(&p.vector).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&p.vector).for_each(|(x, f)| *x += c * f);
    }
    let n = grid_norm(op, &v, GridNorm::L2)?;
    if !(n > 0.0) {
        return Err(Error::domain("region is orthogonal to the ground eigenspace"));
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(EigenPair {
        value: cluster[0].value,
        vector: v,
        residual: cluster.iter().map(|p| p.residual).fold(0.0, f64::max),
    })
}

fn residual_report(op: &DiscreteOperator, scheme: DerivativeScheme, c_loc: f64) -> Result<BoundReport> {
    let g = op.grid();
    let (lo, len) = (g.lo()[0], g.hi()[0] - g.lo()[0]);
    let (a, b) = (lo + 0.1 * len, lo + 0.4 * len);
    let pair = canonical_ground_state(op, |x| a <= x[0] && x[0] <= b)?;
    let xi: Vec<f64> = (0..g.node_count()).map(|k| ramp(g.coords(k)[0], a, b)).collect();
    let u = op
        .mask()
        .filter(|k| g.coords(k)[0] > a)
        .ok_or_else(|| Error::domain("localization set U is empty"))?;
    localization_residual(op, &pair, &u, &xi, scheme, c_loc)
}

fn lemma24(ctx: &Context) -> Result<Vec<BoundReport>> {
    let p = &ctx.cfg.params;
    let scheme: DerivativeScheme = p.lemma24_scheme.into();
    let coarse = residual_report(ctx.op, scheme, p.c_loc)?;
    let fine_op = ctx.cfg.refined()?.operator()?;
    let fine = residual_report(&fine_op, scheme, p.c_loc)?;
    let order = match scheme {
        DerivativeScheme::Forward => 1,
        DerivativeScheme::Centered => 2,
    };
    let expected = 2f64.powi(order);
    let ratio = coarse.lhs / fine.lhs;
    let conv = BoundReport::new(
        "lemma24",
        "|residual(h)/residual(h/2) - 2^p| <= 0.15 * 2^p",
        (ratio - expected).abs(),
        0.15 * expected,
        1.0,
    )
    .param("ratio", ratio)
    .param("order", order as f64)
    .param("h", ctx.op.h())
    .with_grid(ctx.meta());
    Ok(vec![coarse, fine, conv])
}

struct GeometrySetup {
    r: f64,
    s: f64,
    e0d: f64,
    levels: Vec<f64>,
}

fn geometry_setup(ctx: &Context) -> Result<GeometrySetup> {
    let p = &ctx.cfg.params;
    let r = p.geometry_r;
    let e0d = ball_ground_energy(ctx.d())?;
    let levels = if p.geometry_t.is_empty() {
        [0.8, 1.2, 2.0].iter().map(|f| f * e0d / (r * r)).collect()
    } else {
        p.geometry_t.clone()
    };
    Ok(GeometrySetup {
        r,
        s: p.geometry_s.unwrap_or(r),
        e0d,
        levels,
    })
}

fn lemma41(ctx: &Context) -> Result<Vec<BoundReport>> {
    let g = geometry_setup(ctx)?;
    let field = ctx.energy()?;
    let spec = &ctx.spectral()?.slice;
    g.levels
        .iter()
        .map(|&t| {
            let sets = sublevel_sets(field, t, g.s)?;
            let n = counting_function(spec, t)?;
            Ok(lemma41_check(&sets.f, g.r, g.s, n).param("t", t).with_grid(ctx.meta()))
        })
        .collect()
}

fn lemma42(ctx: &Context) -> Result<Vec<BoundReport>> {
    let g = geometry_setup(ctx)?;
    let field = ctx.energy()?;
    let mut out = Vec::new();
    for d in 1..=3 {
        out.push(ball_energy_report(d)?);
    }
    for &t in &g.levels {
        let sets = sublevel_sets(field, t, g.s)?;
        out.push(lemma42_check(&sets.g, ctx.op, t, g.r, g.e0d)?);
    }
    Ok(out)
}

fn lemma44(ctx: &Context) -> Result<Vec<BoundReport>> {
    let g = geometry_setup(ctx)?;
    let moll = mollifier_build(ctx.d(), ctx.cfg.params.mollifier_s)?;
    let mut out = mollifier_reports(&moll);
    let field = ctx.energy()?;
    for &t in &g.levels {
        let sets = sublevel_sets(field, t, g.s)?;
        if sets.f.is_empty() {
            continue;
        }
        let cutoff = cutoff_build(&sets.f, g.r, &moll)?;
        out.extend(
            cutoff_reports(&cutoff)
                .into_iter()
                .map(|r| r.param("t", t).with_grid(ctx.meta())),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bundled;

    fn small_interval(suites: &[&str]) -> ScenarioConfig {
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.grid.h = 1.0 / 100.0;
        cfg.suites = suites.iter().map(|s| s.to_string()).collect();
        cfg
    }

    #[test]
    fn grids() {
        let g = logspace(0.1, 10.0, 3);
        assert_eq!(g[0], 0.1);
        assert!((g[1] - 1.0).abs() < 1e-15);
        assert_eq!(g[2], 10.0);
        let t = kernel_t_grid(1, 1.0 / 400.0, 9.8696, 5.0, 20).unwrap();
        assert_eq!(t.len(), 20);
        assert!((t[0] - 1.0 / (2.0 * 9.8696)).abs() < 1e-15);
        assert!(kernel_t_grid(1, 0.1, 1000.0, 0.1, 20).is_err());
    }

    #[test]
    fn sample_points_skip_holes() {
        let cfg = bundled("lshape-2d").unwrap();
        let op = cfg.operator().unwrap();
        let s = sample_dofs(&op, 9);
        // the removed square is closed, so the 5x5 points with x, y >= 0.5 go
        assert_eq!(s.len(), 81 - 25);
    }

    #[test]
    fn thm11_spot_margin() {
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.suites = vec!["thm11".into()];
        let reps = run_scenario(&cfg).unwrap();
        assert_eq!(reps.len(), 40);
        let r = reps
            .iter()
            .find(|r| r.params["k"] == 1.0 && r.params["t_factor"] == 2.0)
            .unwrap();
        assert!((r.lhs - 0.8106).abs() < 1e-3, "{r:?}");
        assert!((r.margin.unwrap() - 862.0).abs() < 5.0, "{r:?}");
        assert!(reps.iter().all(|r| r.pass));
    }

    #[test]
    fn ordering_and_suite_errors() {
        let cfg = small_interval(&["thm11", "lower12a", "cor13"]);
        let reps = run_scenario(&cfg).unwrap();
        let suites: Vec<&str> = reps.iter().map(|r| r.suite.as_str()).collect();
        let mut sorted = suites.clone();
        sorted.sort();
        assert_eq!(suites, sorted);
        assert!(reps.iter().all(|r| r.scenario == "interval-1d" && r.pass));

        // a t-grid that cannot exist is reported against each kernel suite
        let mut cfg = small_interval(&["hke15", "lower12a"]);
        cfg.params.horizon = 0.1;
        let reps = run_scenario(&cfg).unwrap();
        let bad: Vec<_> = reps.iter().filter(|r| !r.pass).collect();
        assert!(!bad.is_empty());
        assert!(bad[0].note.as_deref().unwrap().contains("t-grid"));
    }

    #[test]
    fn options_are_validated() {
        let cfg = small_interval(&["lower12a"]);
        let opts = RunOptions {
            slack_factor: 0.5,
            ..Default::default()
        };
        assert!(matches!(run_scenario_with(&cfg, &opts), Err(Error::Config { .. })));
        let opts = RunOptions {
            jobs: Some(2),
            ..Default::default()
        };
        assert_eq!(run_scenario_with(&cfg, &opts).unwrap(), run_scenario(&cfg).unwrap());
    }

    #[test]
    fn kernel_suites_on_coarse_interval() {
        let cfg = small_interval(&["hke15", "combined16a", "thm34"]);
        let reps = run_scenario(&cfg).unwrap();
        assert_eq!(reps.len(), 20 + 20 + 60);
        for r in &reps {
            assert!(r.pass, "{r:?}");
        }
    }
}
