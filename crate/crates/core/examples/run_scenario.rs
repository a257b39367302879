//! Runs a bundled scenario (or a JSON file given on the command line) and
//! writes JSON, CSV and plot data to `target/scenario-out`.

use std::path::Path;

use heatbound::report::ReportFormat;
use heatbound::{emit_report, run_scenario, Result, ScenarioConfig};

fn main() -> Result<()> {
    let source = std::env::args().nth(1).unwrap_or_else(|| "two-components-1d".into());
    let cfg = ScenarioConfig::load(&source)?;
    let reports = run_scenario(&cfg)?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    println!("{}: {} checks, {} failed", cfg.name, reports.len(), failed.len());
    for r in &failed {
        println!("  FAIL {} {}: {} > {} x {}", r.suite, r.label, r.lhs, r.rhs, r.slack);
    }
    let dir = Path::new("target/scenario-out").join(&cfg.name);
    for f in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::PlotData] {
        emit_report(&reports, f, &dir)?;
    }
    println!("reports in {}", dir.display());
    Ok(())
}
