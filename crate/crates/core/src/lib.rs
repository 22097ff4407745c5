//! Monte Carlo laboratory and inference toolkit for the panel AR(1) model
//!
//! ```text
//! y_it = ρ y_i,t-1 + ε_it,   y_i0 = 0,   i = 1..N, t = 1..T
//! ```
//!
//! with i.i.d. standardized innovations. The pooled least-squares estimator is
//! asymptotically normal in every regime of ρ (stationary, unit root,
//! local-to-unity, mildly integrated, mildly explosive, explosive) once scaled
//! by the regime's rate. The crate simulates all six regimes reproducibly,
//! computes the estimator and its decomposition, checks the limit laws and the
//! `N^{-1/3}` normal approximation rate by replication, and builds confidence
//! intervals and a panel unit-root test for observed panels.

pub mod asymptotics;
pub mod error;
pub mod estimate;
pub mod inference;
pub mod ingest;
pub mod innovations;
pub mod montecarlo;
pub mod panel;
pub mod regime;
pub mod rng;
pub mod stats;
pub mod summation;

pub use error::{Error, Result};
pub use estimate::{
    cross_section_stats, explosive_uv_stats, lse, CrossSectionStats, ExplosiveUvStats, LseResult,
    NumeratorMode, Standardization,
};
pub use inference::{
    confidence_interval, unit_root_test, Alternative, InferenceResult, RegimeParams,
};
pub use ingest::{ingest_panel, PanelFormat};
pub use innovations::InnovationSpec;
pub use montecarlo::{
    berry_esseen_curve, ks_distance, run_replications, variance_convergence, McConfig, McReport,
    Statistic,
};
pub use panel::{simulate_panel, PanelData};
pub use regime::{limit_law, resolve_rho, LimitLaw, RegimeKind, RegimeSpec};
