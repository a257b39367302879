//! A scenario written as JSON: a disk with a potential barrier, a few suites
//! and a custom parameter grid.

use heatbound::{run_scenario, Result, ScenarioConfig};

const CONFIG: &str = r#"{
    "name": "disk-barrier",
    "grid": {"dim": 2, "lo": [-1, -1], "hi": [1, 1], "h": 0.0625},
    "domain": [{"op": "union", "shape": {"kind": "ball", "center": [0, 0], "radius": 0.95}}],
    "potential": {"kind": "barriers", "regions": [
        {"shape": {"kind": "box", "lo": [-0.1, -1], "hi": [0.1, 1]}, "value": 50}
    ]},
    "suites": ["thm11", "lower12a", "hke15", "thm17"],
    "params": {"eigen_count": 4, "t_factors": [1.5, 3], "t_points": 6}
}"#;

fn main() -> Result<()> {
    let cfg = ScenarioConfig::from_json(CONFIG)?;
    for r in run_scenario(&cfg)? {
        println!(
            "{:<9} {} lhs={:.5e} rhs={:.5e} margin={:.3}",
            r.suite,
            if r.pass { "PASS" } else { "FAIL" },
            r.lhs,
            r.rhs,
            r.margin.unwrap_or(f64::INFINITY)
        );
    }
    Ok(())
}
