//! Verified-inequality records and their JSON / CSV / plot-data output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization the check was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub dim: usize,
    pub h: f64,
    pub dof: usize,
}

/// JSON has no infinities; non-finite values travel as `"inf"`, `"-inf"`, `"nan"`.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn parse<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: `{other}`"))),
            },
        }
    }

    fn text(x: f64) -> &'static str {
        if x.is_nan() {
            "nan"
        } else if x > 0.0 {
            "inf"
        } else {
            "-inf"
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(text(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        parse(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(parse).transpose()
        }
    }
}

/// One checked inequality `lhs <= rhs * slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub scenario: String,
    pub suite: String,
    /// The inequality in words/formula form.
    pub label: String,
    #[serde(with = "nonfinite")]
    pub lhs: f64,
    #[serde(with = "nonfinite")]
    pub rhs: f64,
    /// `rhs / lhs`; absent when `lhs <= 0` (the check is then trivially met).
    #[serde(with = "nonfinite::option")]
    pub margin: Option<f64>,
    pub slack: f64,
    pub pass: bool,
    pub params: BTreeMap<String, f64>,
    pub grid: Option<GridMeta>,
    /// Only recorded on request: it would break bit-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub fn new(suite: &str, label: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = if lhs > 0.0 { Some(rhs / lhs) } else { None };
        Self {
            scenario: String::new(),
            suite: suite.to_string(),
            label: label.to_string(),
            lhs,
            rhs,
            margin,
            slack,
            pass: lhs.is_finite() && !rhs.is_nan() && lhs <= rhs * slack,
            params: BTreeMap::new(),
            grid: None,
            wall_time_s: None,
            note: None,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_grid(mut self, grid: GridMeta) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Marks the report failed regardless of the numbers (side conditions).
    pub fn fail_with(mut self, note: impl Into<String>) -> Self {
        self.pass = false;
        self.note = Some(note.into());
        self
    }
}

/// Formats with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "plotdata" => Ok(Self::PlotData),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }
}

pub fn to_json(reports: &[BoundReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Vec<BoundReport>> {
    serde_json::from_str(text).map_err(|e| Error::config("reports", e.to_string()))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_params(params: &BTreeMap<String, f64>) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={}", sig12(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("scenario,suite,label,lhs,rhs,margin,slack,pass,h,dof,params\n");
    for r in reports {
        let (h, dof) = r
            .grid
            .map(|g| (sig12(g.h), g.dof.to_string()))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.scenario),
            csv_field(&r.suite),
            csv_field(&r.label),
            sig12(r.lhs),
            sig12(r.rhs),
            r.margin.map(sig12).unwrap_or_default(),
            sig12(r.slack),
            r.pass,
            h,
            dof,
            csv_field(&fmt_params(&r.params)),
        );
    }
    out
}

/// Whitespace-separated columns per suite: the first parameter (sorted by
/// name, `t` preferred), LHS, RHS, margin. Returns `(suite, text)` pairs.
pub fn to_plotdata(reports: &[BoundReport]) -> Vec<(String, String)> {
    let mut by_suite: BTreeMap<(String, String), Vec<&BoundReport>> = BTreeMap::new();
    for r in reports {
        by_suite
            .entry((r.scenario.clone(), r.suite.clone()))
            .or_default()
            .push(r);
    }
    by_suite
        .into_iter()
        .map(|((scenario, suite), rows)| {
            let key = if rows.iter().all(|r| r.params.contains_key("t")) {
                Some("t".to_string())
            } else {
                rows[0].params.keys().next().cloned()
            };
            let mut sorted = rows;
            if let Some(k) = &key {
                sorted.sort_by(|a, b| {
                    let x = a.params.get(k).copied().unwrap_or(f64::NAN);
                    let y = b.params.get(k).copied().unwrap_or(f64::NAN);
                    x.total_cmp(&y)
                });
            }
            let col = key.clone().unwrap_or_else(|| "index".into());
            let mut text = format!("# {scenario} {suite}\n# {col} lhs rhs margin\n");
            for (i, r) in sorted.iter().enumerate() {
                let x = key
                    .as_ref()
                    .and_then(|k| r.params.get(k).copied())
                    .unwrap_or(i as f64);
                let _ = writeln!(
                    text,
                    "{} {} {} {}",
                    sig12(x),
                    sig12(r.lhs),
                    sig12(r.rhs),
                    r.margin.map(sig12).unwrap_or_else(|| "inf".into())
                );
            }
            let name = if scenario.is_empty() {
                suite
            } else {
                format!("{scenario}.{suite}")
            };
            (name, text)
        })
        .collect()
}

/// Writes reports to `dir`, returning the files created.
pub fn emit_report(reports: &[BoundReport], format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::config("reports", "nothing to emit"));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Json => {
            let p = dir.join("reports.json");
            std::fs::write(&p, to_json(reports)?)?;
            written.push(p);
        }
        ReportFormat::Csv => {
            let p = dir.join("reports.csv");
            std::fs::write(&p, to_csv(reports))?;
            written.push(p);
        }
        ReportFormat::PlotData => {
            for (name, text) in to_plotdata(reports) {
                let p = dir.join(format!("{name}.dat"));
                std::fs::write(&p, text)?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Vec<BoundReport> {
        (0..n)
            .map(|i| {
                BoundReport::new("hke15", "p_t <= envelope", 0.5 + i as f64, 2.0, 1.05)
                    .param("t", 0.1 * (n - i) as f64)
                    .with_grid(GridMeta { dim: 1, h: 0.0025, dof: 399 })
            })
            .collect()
    }

    #[test]
    fn pass_and_margin() {
        let r = BoundReport::new("x", "l", 1.0, 2.0, 1.0);
        assert!(r.pass);
        assert_eq!(r.margin, Some(2.0));
        let r = BoundReport::new("x", "l", 2.05, 2.0, 1.05);
        assert!(r.pass);
        let r = BoundReport::new("x", "l", 3.0, 2.0, 1.05);
        assert!(!r.pass);
        assert_eq!(BoundReport::new("x", "l", 0.0, 1.0, 1.0).margin, None);
        assert!(!BoundReport::new("x", "l", f64::NAN, 1.0, 1.0).pass);
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig12(698.6), "698.6");
        assert_eq!(sig12(1.5e-9), "1.50000000000e-9");
        assert_eq!(sig12(0.0), "0");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = to_csv(&sample(3));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().next().unwrap().starts_with("scenario,suite"));
    }

    #[test]
    fn json_round_trip() {
        let reps = sample(4);
        assert_eq!(from_json(&to_json(&reps).unwrap()).unwrap(), reps);
    }

    #[test]
    fn json_keeps_non_finite_values() {
        let mut reps = sample(1);
        reps.push(BoundReport::new("lemma42", "vacuous", 3.0, f64::INFINITY, 1.0));
        reps.push(BoundReport::new("x", "error", f64::NAN, f64::NEG_INFINITY, 1.0));
        let back = from_json(&to_json(&reps).unwrap()).unwrap();
        assert_eq!(back[1], reps[1]);
        assert!(back[2].lhs.is_nan() && back[2].rhs == f64::NEG_INFINITY);
        assert_eq!(back[1].margin, Some(f64::INFINITY));
    }

    #[test]
    fn plotdata_sorted_by_t() {
        let files = to_plotdata(&sample(20));
        assert_eq!(files.len(), 1);
        let rows: Vec<f64> = files[0]
            .1
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(rows.len(), 20);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_emit_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(&[], ReportFormat::Csv, dir.path()).is_err());
        let files = emit_report(&sample(2), ReportFormat::PlotData, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
    }
}
