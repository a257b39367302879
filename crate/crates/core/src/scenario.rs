//! Declarative scenario files: grid, domain, potential, suites and their
//! parameter grids. Configs are JSON; five bundles ship with the crate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DerivativeScheme, DEFAULT_C_LOC, DEFAULT_SMOOTHING, MAX_SMOOTHING};
use crate::grid::{build_mask, DomainMask, GridSpec, PotentialField, Shape, ShapeOp};
use crate::operator::{assemble_operator, DiscreteOperator};

/// Every suite id the harness understands, in report order.
pub const SUITES: [&str; 17] = [
    "combined16a",
    "cor13",
    "davies33",
    "hke15",
    "lemma18",
    "lemma24",
    "lemma41",
    "lemma42",
    "lemma44",
    "liyau14",
    "lower12a",
    "prop35",
    "rmk36",
    "thm11",
    "thm17",
    "thm34",
    "weighted31",
];

/// The inequality each suite checks, printed in report headers.
pub fn suite_anchor(suite: &str) -> Option<&'static str> {
    Some(match suite {
        "thm11" => "||phi||_1^2 <= c_d (t-l)^{-d/2} ln(3t/(t-l))^d N_t(H) ||phi||_2^2, c_d = 35^{d+1} d^{d/2}",
        "lower12a" => "||phi||_1^2 >= (2 pi d/e)^{d/2} l^{-d/2} ||phi||_2^2",
        "cor13" => "||phi||_1^2 <= c_d C_eps^d l^{-d/2} N_{(1+eps)l}(H) ||phi||_2^2",
        "liyau14" => "N_t(H) <= K_d vol(Omega) t^{d/2}",
        "hke15" => "p_t(x,y) <= (e E0/(2 pi d))^{d/2} exp(-E0 t - |x-y|^2/4t) for t >= d/(2 E0)",
        "combined16a" => "p_t(x,y) <= (1 + (2e/d) E0 t)^{d/2} (4 pi t)^{-d/2} exp(-E0 t - |x-y|^2/4t)",
        "thm17" => "Q_H(t) <= c_{eps,d} l_1^{-d/2} Z_H(t/(2+eps))^2",
        "lemma18" => "N_l(H) <= Z_H(T) e^{T l}",
        "weighted31" => "||rho_xi T(t) rho_xi^{-1}||_{2->2} <= e^{t|xi|^2 - E0 t}",
        "davies33" => "||rho_xi T(t) rho_xi^{-1}||_{1->inf} <= (4 pi t)^{-d/2} e^{|xi|^2 t}",
        "thm34" => "T(t) <= eps^{-d/2} e^{-(1-eps) E0 t} e^{t Delta}",
        "prop35" => "sup_B int_A G_mu <= (1-theta^2)^{-d/2} (1/mu) exp(-theta sqrt(mu) d(A,B))",
        "rmk36" => "sup_B int_A G_mu <= (2e/d + r sqrt(mu))^{d/2} (1/mu) exp(-r sqrt(mu))",
        "lemma24" => "(H_U - l)(xi phi) = -2 grad xi . grad phi - (lap xi) phi",
        "lemma41" => "|U_s(F_r(t))| <= omega_d (2r+s)^d N_t(H)",
        "lemma42" => "E0(H_{G_r(t)}) >= t - E_{0,d}/r^2, E_{0,d} <= (d+1)(d+2)/2",
        "lemma44" => "||grad rho||_1 <= d+1, ||lap rho||_1 <= 2(d+1)^2, xi = 1 - rho_{r/2} * 1_{U_{3r/2}(F)}",
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub h: f64,
}

/// A region with its own potential value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub shape: Shape,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    Constant { value: f64 },
    /// `background` everywhere, region values inside (later regions win).
    Wells { background: f64, regions: Vec<Region> },
    /// Zero background with raised regions.
    Barriers { regions: Vec<Region> },
    /// `height (((x₀ - center)/separation)² - 1)²`, minima at `center ± separation`.
    DoubleWell { center: f64, separation: f64, height: f64 },
    /// One value per grid node, axis 0 fastest.
    Table { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn sample(&self, grid: &GridSpec) -> Result<PotentialField> {
        let regions = |background: f64, regions: &[Region]| {
            PotentialField::from_fn(grid, |x| {
                regions
                    .iter()
                    .rev()
                    .find(|r| r.shape.contains_closed(x))
                    .map_or(background, |r| r.value)
            })
        };
        match self {
            PotentialSpec::Zero => Ok(PotentialField::zero(grid)),
            PotentialSpec::Constant { value } => PotentialField::constant(grid, *value),
            PotentialSpec::Wells { background, regions: r } => regions(*background, r),
            PotentialSpec::Barriers { regions: r } => regions(0.0, r),
            PotentialSpec::DoubleWell {
                center,
                separation,
                height,
            } => PotentialField::from_fn(grid, |x| {
                let q = ((x[0] - center) / separation).powi(2) - 1.0;
                height * q * q
            }),
            PotentialSpec::Table { values } => PotentialField::new(grid.clone(), values.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    Forward,
    Centered,
}

impl From<SchemeName> for DerivativeScheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Forward => DerivativeScheme::Forward,
            SchemeName::Centered => DerivativeScheme::Centered,
        }
    }
}

/// Parameter grids. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    /// Eigenpairs checked by the L1 suites.
    pub eigen_count: usize,
    /// `t = factor · λ` for the L1 upper bound.
    pub t_factors: Vec<f64>,
    pub cor13_eps: Vec<f64>,
    /// Points on the logarithmic kernel t-grid.
    pub t_points: usize,
    /// The t-grid ends at `horizon / λ₁`.
    pub horizon: f64,
    /// Kernel sample points per axis.
    pub kernel_samples: usize,
    pub thm34_eps: Vec<f64>,
    pub thm17_eps: Vec<f64>,
    pub lemma18_times: usize,
    pub lemma18_levels: usize,
    /// Counting-function constant; the Berezin–Li–Yau value when absent.
    pub liyau_k: Option<f64>,
    /// `|ξ|` values, along `(1,…,1)/√d`.
    pub xi_values: Vec<f64>,
    /// Times taken from the t-grid by the weighted suites.
    pub weighted_points: usize,
    /// Sample points per axis for the `1 → ∞` norm; all DOFs in 1D.
    pub davies_samples: usize,
    pub mu: Vec<f64>,
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    pub freespace_dims: Vec<usize>,
    /// Energy-map radius `r`.
    pub geometry_r: f64,
    /// Dilation `s`; defaults to `r`.
    pub geometry_s: Option<f64>,
    /// Energy levels; defaults to `E_{0,d}/r² · {0.8, 1.2, 2}`.
    pub geometry_t: Vec<f64>,
    pub mollifier_s: f64,
    pub c_loc: f64,
    pub lemma24_scheme: SchemeName,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            eigen_count: 10,
            t_factors: vec![1.1, 1.5, 2.0, 3.0],
            cor13_eps: vec![0.5, 1.0],
            t_points: 20,
            horizon: 5.0,
            kernel_samples: 9,
            thm34_eps: vec![0.25, 0.5, 1.0],
            thm17_eps: vec![0.5, 1.0],
            lemma18_times: 5,
            lemma18_levels: 10,
            liyau_k: None,
            xi_values: vec![0.0, 1.0, 4.0],
            weighted_points: 4,
            davies_samples: 17,
            mu: vec![0.5, 1.0, 4.0, 16.0],
            radii: vec![0.25, 1.0, 4.0],
            theta: crate::freespace::theta_grid(),
            freespace_dims: vec![1, 2, 3],
            geometry_r: 0.1,
            geometry_s: None,
            geometry_t: Vec::new(),
            mollifier_s: DEFAULT_SMOOTHING,
            c_loc: DEFAULT_C_LOC,
            lemma24_scheme: SchemeName::Forward,
        }
    }
}

/// Slack factors; every check passes iff `lhs <= rhs · slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Slacks {
    /// L1 eigenfunction bounds (discretized L1 norm).
    pub eigen: f64,
    /// Pointwise kernel bounds against continuum envelopes.
    pub kernel: f64,
    /// Weighted 2→2 norms (power-iteration accuracy).
    pub weighted: f64,
    /// Counting, trace and content bounds.
    pub spectral: f64,
    /// Free-space resolvent bounds.
    pub freespace: f64,
}

impl Default for Slacks {
    fn default() -> Self {
        Self {
            eigen: 1.02,
            kernel: 1.05,
            weighted: 1.001,
            spectral: 1.0,
            freespace: 1.0,
        }
    }
}

impl Slacks {
    /// Multiplies every factor by `f` (the `--slack` flag).
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            eigen: self.eigen * f,
            kernel: self.kernel * f,
            weighted: self.weighted * f,
            spectral: self.spectral * f,
            freespace: self.freespace * f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridConfig,
    pub domain: Vec<ShapeOp>,
    #[serde(default)]
    pub potential: PotentialSpec,
    pub suites: Vec<String>,
    #[serde(default)]
    pub params: SuiteParams,
    #[serde(default)]
    pub slack: Slacks,
}

fn nonempty<T>(path: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::config(path, "parameter grid is empty"));
    }
    Ok(())
}

fn all_in<'a>(path: &str, v: impl IntoIterator<Item = &'a f64>, ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    for (i, &x) in v.into_iter().enumerate() {
        if !ok(x) {
            return Err(Error::config(format!("{path}[{i}]"), format!("{x} {what}")));
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// A bundled scenario name or a path to a JSON file.
    pub fn load(source: &str) -> Result<Self> {
        if let Some(cfg) = bundled(source) {
            return Ok(cfg);
        }
        let path = Path::new(source);
        if !path.exists() {
            return Err(Error::config(
                "config",
                format!("`{source}` is neither a bundled scenario nor a file"),
            ));
        }
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks suite names, grid shapes, parameter grids and slacks.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if self.suites.is_empty() {
            return Err(Error::config("suites", "no suite requested"));
        }
        for (i, s) in self.suites.iter().enumerate() {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::config(format!("suites[{i}]"), format!("unknown suite `{s}`")));
            }
        }
        if let Some(i) = (1..self.suites.len()).find(|&i| self.suites[..i].contains(&self.suites[i])) {
            return Err(Error::config(format!("suites[{i}]"), "duplicate suite"));
        }
        self.grid_spec().map_err(|e| Error::config("grid", e.to_string()))?;
        if self.domain.is_empty() {
            return Err(Error::config("domain", "no shapes"));
        }
        if let PotentialSpec::Table { values } = &self.potential {
            let nodes = self.grid_spec()?.node_count();
            if values.len() != nodes {
                return Err(Error::config(
                    "potential.values",
                    format!("{} entries for {nodes} grid nodes", values.len()),
                ));
            }
        }

        let p = &self.params;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if p.eigen_count == 0 {
            return Err(Error::config("params.eigen_count", "must be positive"));
        }
        nonempty("params.t_factors", &p.t_factors)?;
        all_in("params.t_factors", &p.t_factors, |x| x > 1.0 && x.is_finite(), "must exceed 1")?;
        for (path, v) in [
            ("params.cor13_eps", &p.cor13_eps),
            ("params.thm17_eps", &p.thm17_eps),
            ("params.mu", &p.mu),
            ("params.radii", &p.radii),
        ] {
            nonempty(path, v)?;
            all_in(path, v, positive, "must be positive")?;
        }
        nonempty("params.thm34_eps", &p.thm34_eps)?;
        all_in("params.thm34_eps", &p.thm34_eps, |x| x > 0.0 && x <= 1.0, "must lie in (0, 1]")?;
        nonempty("params.theta", &p.theta)?;
        all_in("params.theta", &p.theta, |x| x > 0.0 && x < 1.0, "must lie in (0, 1)")?;
        nonempty("params.xi_values", &p.xi_values)?;
        all_in("params.xi_values", &p.xi_values, |x| x >= 0.0 && x.is_finite(), "must be nonnegative")?;
        nonempty("params.freespace_dims", &p.freespace_dims)?;
        if let Some(i) = p.freespace_dims.iter().position(|d| !(1..=3).contains(d)) {
            return Err(Error::config(format!("params.freespace_dims[{i}]"), "must lie in 1..=3"));
        }
        all_in("params.geometry_t", &p.geometry_t, positive, "must be positive")?;
        for (path, n, min) in [
            ("params.t_points", p.t_points, 2),
            ("params.kernel_samples", p.kernel_samples, 1),
            ("params.lemma18_times", p.lemma18_times, 1),
            ("params.lemma18_levels", p.lemma18_levels, 1),
            ("params.weighted_points", p.weighted_points, 1),
            ("params.davies_samples", p.davies_samples, 1),
        ] {
            if n < min {
                return Err(Error::config(path, format!("must be at least {min}")));
            }
        }
        for (path, x) in [
            ("params.horizon", p.horizon),
            ("params.geometry_r", p.geometry_r),
            ("params.c_loc", p.c_loc),
            ("params.geometry_s", p.geometry_s.unwrap_or(1.0)),
            ("params.liyau_k", p.liyau_k.unwrap_or(1.0)),
        ] {
            if !positive(x) {
                return Err(Error::config(path, format!("{x} must be positive")));
            }
        }
        if !(p.mollifier_s > 0.0 && p.mollifier_s <= MAX_SMOOTHING) {
            return Err(Error::config(
                "params.mollifier_s",
                format!("{} must lie in (0, {MAX_SMOOTHING}]", p.mollifier_s),
            ));
        }

        let s = &self.slack;
        for (path, x) in [
            ("slack.eigen", s.eigen),
            ("slack.kernel", s.kernel),
            ("slack.weighted", s.weighted),
            ("slack.spectral", s.spectral),
            ("slack.freespace", s.freespace),
        ] {
            if !(x >= 1.0 && x.is_finite()) {
                return Err(Error::config(path, format!("{x} is below 1")));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.dim, &self.grid.lo, &self.grid.hi, self.grid.h)
    }

    pub fn mask(&self) -> Result<DomainMask> {
        build_mask(&self.grid_spec()?, &self.domain)
    }

    pub fn operator(&self) -> Result<DiscreteOperator> {
        let grid = self.grid_spec()?;
        let mask = build_mask(&grid, &self.domain)?;
        assemble_operator(&mask, &self.potential.sample(&grid)?)
    }

    /// The same scenario at spacing `h/2`. Tabulated potentials cannot be
    /// refined.
    pub fn refined(&self) -> Result<Self> {
        if matches!(self.potential, PotentialSpec::Table { .. }) {
            return Err(Error::config("potential", "a tabulated potential cannot be refined"));
        }
        let mut out = self.clone();
        out.grid.h /= 2.0;
        Ok(out)
    }
}

fn box_domain(lo: &[f64], hi: &[f64]) -> Vec<ShapeOp> {
    vec![ShapeOp::union(Shape::rect(lo, hi))]
}

fn suites(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

/// Names of the bundled scenarios.
pub const BUNDLED: [&str; 5] = [
    "interval-1d",
    "square-2d",
    "lshape-2d",
    "well-potential-1d",
    "two-components-1d",
];

/// Suites that do not depend on a domain.
const DOMAIN_FREE: [&str; 2] = ["prop35", "rmk36"];

pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    let unit1 = GridConfig {
        dim: 1,
        lo: vec![0.0],
        hi: vec![1.0],
        h: 1.0 / 400.0,
    };
    let one_d: Vec<String> = SUITES
        .iter()
        .filter(|s| !DOMAIN_FREE.contains(s))
        .map(|s| s.to_string())
        .collect();
    let cfg = match name {
        "interval-1d" => ScenarioConfig {
            name: name.into(),
            grid: unit1,
            domain: box_domain(&[0.0], &[1.0]),
            potential: PotentialSpec::Zero,
            suites: suites(&SUITES),
            params: SuiteParams::default(),
            slack: Slacks::default(),
        },
        "square-2d" => ScenarioConfig {
            name: name.into(),
            grid: GridConfig {
                dim: 2,
                lo: vec![0.0, 0.0],
                hi: vec![1.0, 1.0],
                h: 1.0 / 32.0,
            },
            domain: box_domain(&[0.0, 0.0], &[1.0, 1.0]),
            potential: PotentialSpec::Zero,
            suites: suites(&[
                "combined16a", "cor13", "davies33", "hke15", "lemma18", "lemma24", "liyau14",
                "lower12a", "thm11", "thm17", "thm34", "weighted31",
            ]),
            // |xi| h must stay within 0.1
            params: SuiteParams {
                xi_values: vec![0.0, 1.0, 3.0],
                ..SuiteParams::default()
            },
            slack: Slacks::default(),
        },
        "lshape-2d" => ScenarioConfig {
            name: name.into(),
            grid: GridConfig {
                dim: 2,
                lo: vec![0.0, 0.0],
                hi: vec![1.0, 1.0],
                h: 1.0 / 64.0,
            },
            domain: vec![
                ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0])),
                ShapeOp::difference(Shape::rect(&[0.5, 0.5], &[1.0, 1.0])),
            ],
            potential: PotentialSpec::Zero,
            suites: suites(&[
                "combined16a", "cor13", "hke15", "lemma18", "liyau14", "lower12a", "thm11",
                "thm17", "thm34",
            ]),
            params: SuiteParams::default(),
            slack: Slacks::default(),
        },
        "well-potential-1d" => ScenarioConfig {
            name: name.into(),
            grid: unit1,
            domain: box_domain(&[0.0], &[1.0]),
            potential: PotentialSpec::DoubleWell {
                center: 0.5,
                separation: 0.25,
                height: 200.0,
            },
            suites: one_d,
            params: SuiteParams::default(),
            slack: Slacks::default(),
        },
        "two-components-1d" => ScenarioConfig {
            name: name.into(),
            grid: unit1,
            domain: vec![
                ShapeOp::union(Shape::interval(0.05, 0.45)),
                ShapeOp::union(Shape::interval(0.55, 0.95)),
            ],
            potential: PotentialSpec::Zero,
            suites: one_d,
            params: SuiteParams::default(),
            slack: Slacks::default(),
        },
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundles_validate_and_round_trip() {
        for name in BUNDLED {
            let cfg = bundled(name).unwrap();
            cfg.validate().unwrap();
            let back = ScenarioConfig::from_json(&cfg.to_json().unwrap()).unwrap();
            assert_eq!(back, cfg, "{name}");
            assert!(cfg.suites.iter().all(|s| suite_anchor(s).is_some()));
        }
        assert!(bundled("nope").is_none());
    }

    #[test]
    fn minimal_json_gets_defaults() {
        let text = r#"{
            "name": "mini",
            "grid": {"dim": 1, "lo": [0], "hi": [1], "h": 0.01},
            "domain": [{"op": "union", "shape": {"kind": "box", "lo": [0], "hi": [1]}}],
            "suites": ["thm11"]
        }"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.params.eigen_count, 10);
        assert_eq!(cfg.potential, PotentialSpec::Zero);
        assert_eq!(cfg.operator().unwrap().dim(), 99);
    }

    #[test]
    fn unknown_suite_reports_its_path() {
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.suites.push("thm99".into());
        match cfg.validate() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "suites[17]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.params.t_factors.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "params.t_factors"));
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.params.thm34_eps = vec![0.5, 1.5];
        assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "params.thm34_eps[1]"));
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.slack.kernel = 0.9;
        assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "slack.kernel"));
        let mut cfg = bundled("interval-1d").unwrap();
        cfg.grid.h = 0.3;
        assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "grid"));
        let text = r#"{"name": "x", "grid": {"dim": 1, "lo": [0], "hi": [1], "h": 0.1},
            "domain": [], "suites": ["thm11"], "colour": 3}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(Error::Config { .. })));
    }

    #[test]
    fn potentials_sample_as_described() {
        let g = GridSpec::unit(1, 8).unwrap();
        let dw = PotentialSpec::DoubleWell {
            center: 0.5,
            separation: 0.25,
            height: 200.0,
        };
        let v = dw.sample(&g).unwrap();
        assert_eq!(v.at(4), 200.0);
        assert_eq!(v.at(2), 0.0);
        assert_eq!(v.at(0), 1800.0);
        let wells = PotentialSpec::Wells {
            background: 5.0,
            regions: vec![Region {
                shape: Shape::interval(0.2, 0.4),
                value: 1.0,
            }],
        };
        let v = wells.sample(&g).unwrap();
        assert_eq!(v.values()[..5], [5.0, 5.0, 1.0, 1.0, 5.0]);
        let bad = PotentialSpec::Constant { value: -1.0 };
        assert!(bad.sample(&g).is_err());
    }

    #[test]
    fn refinement_halves_spacing() {
        let cfg = bundled("square-2d").unwrap();
        assert_eq!(cfg.refined().unwrap().grid.h, 1.0 / 64.0);
        let mut tab = bundled("interval-1d").unwrap();
        tab.potential = PotentialSpec::Table { values: vec![0.0; 401] };
        tab.validate().unwrap();
        assert!(tab.refined().is_err());
    }
}
