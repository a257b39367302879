//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use heatbound::bounds::{hke_rhs, thm11_lower, thm17_rhs};
use heatbound::freespace::{offdiag_resolvent_exact, prop35_bound, OffDiagonalSetup};
use heatbound::heat::{heat_content, heat_kernel_point, heat_trace};
use heatbound::scenario::{bundled, BUNDLED};
use heatbound::spectral::{grid_norm, GridNorm};
use heatbound::{
    assemble_operator, build_mask, eigensolve_lowest, run_scenario, BoundReport, GridSpec, PotentialField, Shape, ShapeOp,
    SliceRequest,
};

type Outcome = Result<String, String>;

fn close(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn suites(scenario: &str, ids: &[&str]) -> Result<Vec<BoundReport>, String> {
    let mut cfg = bundled(scenario).ok_or_else(|| format!("no bundled scenario {scenario}"))?;
    cfg.suites.retain(|s| ids.contains(&s.as_str()));
    if cfg.suites.is_empty() {
        return Err(format!("{scenario} runs none of {ids:?}"));
    }
    run_scenario(&cfg).map_err(|e| format!("{scenario}: {e}"))
}

/// All reports pass; returns the count and the smallest finite margin.
fn all_pass(scenario: &str, reports: &[BoundReport]) -> Result<(usize, f64), String> {
    if let Some(r) = reports.iter().find(|r| !r.pass) {
        return Err(format!(
            "{scenario}/{}: {} fails (lhs {:e}, rhs {:e}, {:?})",
            r.suite, r.label, r.lhs, r.rhs, r.params
        ));
    }
    let m = reports.iter().filter_map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok((reports.len(), m))
}

fn suite_over(scenarios: &[&str], ids: &[&str]) -> Outcome {
    let mut parts = Vec::new();
    for s in scenarios {
        let reports = suites(s, ids)?;
        for id in ids {
            let rs: Vec<BoundReport> = reports.iter().filter(|r| r.suite == *id).cloned().collect();
            if rs.is_empty() {
                return Err(format!("{s}/{id}: no reports"));
            }
            let (n, m) = all_pass(s, &rs)?;
            parts.push(format!("{s}/{id} {n} checks, min margin {m:.4}"));
        }
    }
    Ok(parts.join("; "))
}

fn spectral_oracle() -> Outcome {
    let start = Instant::now();
    let g = GridSpec::unit(1, 400).map_err(|e| e.to_string())?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).map_err(|e| e.to_string())?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g)).map_err(|e| e.to_string())?;
    let spec = eigensolve_lowest(&op, SliceRequest::Count(5)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (k, p) in spec.pairs().iter().take(5).enumerate() {
        let exact = ((k + 1) as f64 * PI).powi(2);
        worst = worst.max((p.value - exact).abs() / exact);
    }
    if spec.len() < 5 || worst > 5e-3 {
        return Err(format!("interval worst relative error {worst:e}"));
    }

    let g = GridSpec::unit(2, 64).map_err(|e| e.to_string())?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0]))]).map_err(|e| e.to_string())?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g)).map_err(|e| e.to_string())?;
    let spec = eigensolve_lowest(&op, SliceRequest::Count(4)).map_err(|e| e.to_string())?;
    let clusters = spec.clusters();
    let l1 = clusters[0].0;
    if clusters[0].1 != 1 || !close(l1, 2.0 * PI * PI, 0.01) {
        return Err(format!("square lambda_1 cluster {:?}", clusters[0]));
    }
    let second = clusters.get(1).copied().unwrap_or((f64::NAN, 0));
    if second.1 != 2 || !close(second.0, 5.0 * PI * PI, 0.01) {
        return Err(format!("square second cluster {second:?}, want 5 pi^2 x2"));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 10.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!(
        "interval k<=5 max rel.err {worst:.2e}; square lambda_1 {l1:.4}, 5pi^2 cluster {:.4} x{}; {secs:.2} s",
        second.0, second.1
    ))
}

fn eigenfunction_lower() -> Outcome {
    let summary = suite_over(&["interval-1d", "square-2d", "lshape-2d", "well-potential-1d"], &["lower12a"])?;
    let g = GridSpec::unit(1, 400).map_err(|e| e.to_string())?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).map_err(|e| e.to_string())?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g)).map_err(|e| e.to_string())?;
    let gs = eigensolve_lowest(&op, SliceRequest::Count(1)).map_err(|e| e.to_string())?.pairs()[0].clone();
    let l1 = grid_norm(&op, &gs.vector, GridNorm::L1).map_err(|e| e.to_string())?;
    let measured = l1 * l1;
    let bound = thm11_lower(1, gs.value).map_err(|e| e.to_string())?;
    let exact_bound = (2.0 * PI / std::f64::consts::E).sqrt() / PI;
    if !close(measured, 8.0 / (PI * PI), 0.01) || !close(bound, exact_bound, 0.01) {
        return Err(format!("ground state {measured} vs bound {bound}"));
    }
    Ok(format!("{summary}; interval ground state {measured:.4} >= {bound:.5}"))
}

fn kernel_envelope() -> Outcome {
    let summary = suite_over(&["interval-1d", "square-2d"], &["hke15", "combined16a"])?;
    for s in ["interval-1d", "square-2d"] {
        let reports = suites(s, &["hke15"])?;
        let mut ts: Vec<f64> = reports.iter().filter_map(|r| r.params.get("t").copied()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        if ts.len() != 20 {
            return Err(format!("{s}: {} distinct t values, want 20", ts.len()));
        }
    }
    let g = GridSpec::unit(1, 400).map_err(|e| e.to_string())?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).map_err(|e| e.to_string())?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g)).map_err(|e| e.to_string())?;
    let spec = eigensolve_lowest(&op, SliceRequest::Full).map_err(|e| e.to_string())?;
    let p = heat_kernel_point(&op, &spec, 0.1, &[0.5], &[0.5]).map_err(|e| e.to_string())?.value;
    let env = hke_rhs(1, spec.pairs()[0].value, 0.1, 0.0).map_err(|e| e.to_string())?;
    if !close(p, 0.7457, 1e-3) || !close(env, 0.7702, 1e-3) || p > env * 1.05 {
        return Err(format!("spot p={p} envelope={env}"));
    }
    Ok(format!("{summary}; spot p_0.1(0.5,0.5) = {p:.4} <= {env:.4}"))
}

fn free_resolvent() -> Outcome {
    let summary = suite_over(&["interval-1d"], &["prop35", "rmk36"])?;
    let exact = offdiag_resolvent_exact(&OffDiagonalSetup::half_spaces(1, 1.0, 4.0, 0.5)).map_err(|e| e.to_string())?;
    let bound = prop35_bound(1, 4.0, 0.5, 1.0).map_err(|e| e.to_string())?;
    // the printed bound 0.10621 is the formula value rounded loosely
    if !close(exact.value, 0.0169169, 1e-5) || !close(bound, 0.10621, 2e-4) || exact.value > bound {
        return Err(format!("spot {} vs {bound}", exact.value));
    }
    Ok(format!("{summary}; spot {:.7} <= {bound:.5}", exact.value))
}

fn heat_content_suite() -> Outcome {
    let summary = suite_over(&["interval-1d", "square-2d"], &["thm17", "lemma18"])?;
    for s in ["interval-1d", "square-2d"] {
        let n = suites(s, &["lemma18"])?.len();
        if n != 50 {
            return Err(format!("{s}: {n} lemma18 pairs, want 50"));
        }
    }
    let g = GridSpec::unit(1, 400).map_err(|e| e.to_string())?;
    let mask = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).map_err(|e| e.to_string())?;
    let op = assemble_operator(&mask, &PotentialField::zero(&g)).map_err(|e| e.to_string())?;
    let spec = eigensolve_lowest(&op, SliceRequest::Full).map_err(|e| e.to_string())?;
    let q = heat_content(&op, &spec, 0.1).map_err(|e| e.to_string())?.value;
    let z = heat_trace(&spec, 0.1 / 3.0).map_err(|e| e.to_string())?.value;
    let bound = thm17_rhs(1, 1.0, spec.pairs()[0].value, z).map_err(|e| e.to_string())?;
    if !close(q, 0.30214, 1e-3) || !close(bound, 763.2, 1e-3) {
        return Err(format!("spot Q={q} bound={bound}"));
    }
    Ok(format!("{summary}; spot Q(0.1) = {q:.5} <= {bound:.1}"))
}

fn geometry() -> Outcome {
    let start = Instant::now();
    let reports = suites("interval-1d", &["lemma41", "lemma42", "lemma44"])?;
    let secs = start.elapsed().as_secs_f64();
    let (n, m) = all_pass("interval-1d", &reports)?;
    let balls = reports.iter().filter(|r| r.suite == "lemma42" && r.params.contains_key("d") && !r.params.contains_key("t")).count();
    let moll = reports.iter().filter(|r| r.suite == "lemma44").count();
    if balls < 3 || moll == 0 {
        return Err(format!("ball-energy reports {balls}, mollifier/cutoff reports {moll}"));
    }
    if secs > 60.0 {
        return Err(format!("geometry suites took {secs:.1} s"));
    }
    Ok(format!(
        "{n} checks ({balls} ball energies, {moll} mollifier/cutoff), min margin {m:.4}; {secs:.1} s"
    ))
}

fn localization_order() -> Outcome {
    let mut parts = Vec::new();
    for s in ["interval-1d", "square-2d"] {
        let reports = suites(s, &["lemma24"])?;
        all_pass(s, &reports)?;
        let ratio = reports
            .iter()
            .find_map(|r| r.params.get("ratio").copied())
            .ok_or_else(|| format!("{s}: no convergence report"))?;
        if !(1.7..=2.3).contains(&ratio) {
            return Err(format!("{s}: residual ratio {ratio}"));
        }
        parts.push(format!("{s} ratio {ratio:.4}"));
    }
    Ok(parts.join("; "))
}

fn properties() -> Outcome {
    let mut parts = Vec::new();
    for (i, (name, prop)) in common::PROPERTIES.iter().enumerate() {
        for case in 0..20u64 {
            prop(0x5eed_0000 + 100 * i as u64 + case).map_err(|e| format!("{name}: {e}"))?;
        }
        parts.push(format!("{name} 20/20"));
    }
    Ok(parts.join("; "))
}

fn verify_into(bin: &str, scenario: &str, dir: &Path) -> Result<(), String> {
    let out = Command::new(bin)
        .args(["verify", scenario, "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("verify {scenario} exited with {}", out.status));
    }
    Ok(())
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_heatbound");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for s in BUNDLED {
        let (a, b) = (tmp.path().join(s).join("a"), tmp.path().join(s).join("b"));
        verify_into(bin, s, &a)?;
        verify_into(bin, s, &b)?;
        let mut names: Vec<_> = std::fs::read_dir(&a)
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        if names.is_empty() {
            return Err(format!("{s}: no report files"));
        }
        for n in names {
            let x = std::fs::read(a.join(&n)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.join(&n)).map_err(|e| format!("{s}/{n:?}: {e}"))?;
            if x != y {
                return Err(format!("{s}/{n:?} differs between runs"));
            }
            files += 1;
        }
    }
    Ok(format!("{files} report files identical across two runs of {} scenarios", BUNDLED.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("spectral oracle", spectral_oracle),
        ("eigenfunction L1 upper bound", || {
            suite_over(&["interval-1d", "square-2d", "lshape-2d", "well-potential-1d"], &["thm11"])
        }),
        ("eigenfunction L1 lower bound", eigenfunction_lower),
        ("Gaussian kernel envelope", kernel_envelope),
        ("kernel vs free kernel", || suite_over(&["interval-1d", "square-2d"], &["thm34"])),
        ("free resolvent off-diagonal mass", free_resolvent),
        ("heat content vs heat trace, counting bound", heat_content_suite),
        ("geometry: sublevel sets, ball energies, mollifier", geometry),
        ("localization residual is first order", localization_order),
        ("randomized properties", properties),
        ("determinism of verify", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
