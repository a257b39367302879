//! Finite-difference spectral toolkit for Dirichlet Schrödinger operators
//! `H = -Δ + V` on grid domains, plus a harness that checks explicit
//! inequalities between eigenfunctions, heat kernels, heat trace, heat
//! content and the counting function.
//!
//! ```no_run
//! use heatbound::{run_scenario, ScenarioConfig};
//!
//! let cfg = ScenarioConfig::load("interval-1d").unwrap();
//! let reports = run_scenario(&cfg).unwrap();
//! assert!(reports.iter().all(|r| r.pass));
//! ```

pub mod error;
pub mod grid;
pub mod linalg;
pub mod operator;
pub mod spectral;
pub mod report;
pub mod heat;
pub mod freespace;
pub mod quadrature;
pub mod bounds;
pub mod geometry;
pub mod scenario;
pub mod harness;

pub use error::{Error, Result};
pub use grid::{build_mask, DomainMask, GridSpec, PotentialField, Shape, ShapeOp};
pub use harness::{run_scenario, run_scenario_with, RunOptions};
pub use operator::{assemble_operator, restrict_to_open_set, DiscreteOperator};
pub use report::{emit_report, BoundReport, ReportFormat};
pub use scenario::ScenarioConfig;
pub use spectral::{counting_function, eigensolve_lowest, ground_energy, ground_state, EigenPair, SliceRequest, SpectrumSlice};
