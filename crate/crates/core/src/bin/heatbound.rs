use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use heatbound::error::{Error, Result};
use heatbound::harness::{run_refined, run_scenario_with, spectral_data, Convergence, RunOptions};
use heatbound::heat::heat_kernel_point;
use heatbound::report::{emit_report, from_json, sig12, BoundReport, ReportFormat};
use heatbound::scenario::{suite_anchor, ScenarioConfig};

#[derive(Parser)]
#[command(name = "heatbound", version, about = "Check heat-kernel and eigenfunction inequalities on grid scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also run at h/2 and print margin ratios.
    #[arg(long, global = true)]
    h_refine: bool,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiplies every slack factor (>= 1).
    #[arg(long, global = true, default_value_t = 1.0)]
    slack: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's suites (bundled name or JSON file).
    Verify {
        config: String,
        /// Record per-suite wall time in the reports.
        #[arg(long)]
        wall_time: bool,
    },
    /// Print the computed eigenpairs.
    Spectrum {
        config: String,
        /// Number of eigenvalues to print; the scenario's eigen_count by default.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Evaluate p_t(x, y) at the nodes nearest to x and y.
    Kernel {
        config: String,
        #[arg(long)]
        t: f64,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        y: Vec<f64>,
    },
    /// Convert a reports.json file.
    Report {
        results: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

fn print_reports(reports: &[BoundReport]) {
    let mut suite = "";
    for r in reports {
        if r.suite != suite {
            suite = &r.suite;
            println!("== {} [{}]: {}", r.scenario, suite, suite_anchor(suite).unwrap_or(""));
        }
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", sig12(*v))).collect();
        println!(
            "  {} lhs={} rhs={} margin={} slack={} {}{}",
            if r.pass { "PASS" } else { "FAIL" },
            sig12(r.lhs),
            sig12(r.rhs),
            r.margin.map(sig12).unwrap_or_else(|| "inf".into()),
            sig12(r.slack),
            params.join(" "),
            r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default(),
        );
    }
}

fn write_all(reports: &[BoundReport], dir: &Path) -> Result<()> {
    for f in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::PlotData] {
        emit_report(reports, f, dir)?;
    }
    Ok(())
}

fn convergence_csv(rows: &[Convergence]) -> String {
    let mut out = String::from("suite,label,margin_h,margin_h2,ratio\n");
    for c in rows {
        let f = |x: Option<f64>| x.map(sig12).unwrap_or_default();
        out.push_str(&format!(
            "{},\"{}\",{},{},{}\n",
            c.suite,
            c.label.replace('"', "\"\""),
            f(c.margin_h),
            f(c.margin_h2),
            f(c.ratio())
        ));
    }
    out
}

fn summary(reports: &[BoundReport]) -> bool {
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} failed", reports.len(), failed);
    failed == 0
}

fn verify(cli: &Cli, config: &str, wall_time: bool) -> Result<bool> {
    let cfg = ScenarioConfig::load(config)?;
    let opts = RunOptions {
        jobs: cli.jobs,
        slack_factor: cli.slack,
        wall_time,
    };
    if !cli.h_refine {
        let reports = run_scenario_with(&cfg, &opts)?;
        print_reports(&reports);
        if let Some(dir) = &cli.out {
            write_all(&reports, dir)?;
        }
        return Ok(summary(&reports));
    }
    let (coarse, fine, conv) = run_refined(&cfg, &opts)?;
    print_reports(&coarse);
    print_reports(&fine);
    println!("== margin(h/2) / margin(h)");
    for c in &conv {
        println!(
            "  {} {} {}",
            c.suite,
            c.ratio().map(sig12).unwrap_or_else(|| "-".into()),
            c.label
        );
    }
    if let Some(dir) = &cli.out {
        write_all(&coarse, &dir.join("h"))?;
        write_all(&fine, &dir.join("h2"))?;
        std::fs::write(dir.join("convergence.csv"), convergence_csv(&conv))?;
    }
    let ok = summary(&coarse) & summary(&fine);
    Ok(ok)
}

fn spectrum(cli: &Cli, config: &str, count: Option<usize>) -> Result<bool> {
    let cfg = ScenarioConfig::load(config)?;
    let op = cfg.operator()?;
    let s = spectral_data(&cfg, &op)?;
    let n = count.unwrap_or(cfg.params.eigen_count).min(s.slice.len());
    println!("# {} dof={} h={} complete_below={}", cfg.name, op.dim(), sig12(op.h()), sig12(s.slice.cutoff()));
    println!("# k lambda residual");
    let mut text = String::new();
    for (k, p) in s.slice.pairs()[..n].iter().enumerate() {
        let line = format!("{} {} {}", k + 1, sig12(p.value), sig12(p.residual));
        println!("{line}");
        text.push_str(&line);
        text.push('\n');
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("spectrum.dat"), text)?;
    }
    Ok(true)
}

fn kernel(config: &str, t: f64, x: &[f64], y: &[f64]) -> Result<bool> {
    let cfg = ScenarioConfig::load(config)?;
    let op = cfg.operator()?;
    let s = spectral_data(&cfg, &op)?;
    let k = heat_kernel_point(&op, &s.slice, t, x, y)?;
    println!(
        "p_t(x, y) = {}  (t={}, x={:?}, y={:?}, truncation <= {})",
        sig12(k.value),
        sig12(k.t),
        k.x.iter().map(|v| sig12(*v)).collect::<Vec<_>>(),
        k.y.iter().map(|v| sig12(*v)).collect::<Vec<_>>(),
        sig12(k.truncation)
    );
    Ok(true)
}

fn report(cli: &Cli, results: &Path, format: &str) -> Result<bool> {
    let format: ReportFormat = format.parse()?;
    let reports = from_json(&std::fs::read_to_string(results)?)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for p in emit_report(&reports, format, &dir)? {
        println!("{}", p.display());
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { config, wall_time } => verify(&cli, config, *wall_time),
        Command::Spectrum { config, count } => spectrum(&cli, config, *count),
        Command::Kernel { config, t, x, y } => kernel(config, *t, x, y),
        Command::Report { results, format } => report(&cli, results, format),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Config { .. } | Error::Io(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
