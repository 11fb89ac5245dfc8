//! Delayed susceptible-infected-recovered model with vaccination and
//! treatment.
//!
//! The crate covers the full analysis pipeline for the three-compartment
//! system with an incubation delay `tau` and a recovery delay `delta`:
//!
//! * [`model`]: response functions, the right-hand side, equilibria and the
//!   linearization coefficients;
//! * [`stability`]: characteristic-equation coefficients, the delay-free,
//!   incubation-delay, recovery-delay and combined-delay criteria, the
//!   global-stability verdicts, and an independent characteristic-root scan;
//! * [`integrator`]: method-of-steps RK4 with Hermite dense output;
//! * [`analytics`]: long-run trajectory classification and delay sweeps;
//! * [`presets`], [`config`], [`plot`]: bundled scenarios, scenario files
//!   and SVG output;
//! * [`acceptance`]: the end-to-end verification suite.

pub mod acceptance;
pub mod analytics;
pub mod config;
pub mod error;
pub mod integrator;
pub mod model;
pub mod plot;
pub mod presets;
pub mod stability;

pub use config::ScenarioConfig;
pub use error::{AnalysisError, ConfigError, IntegrationError, ModelError};
pub use integrator::{integrate, HistorySpec, Trajectory};
pub use model::{eval_rhs, Equilibrium, EquilibriumKind, JacCoeffs, ModelSpec, Params, ResponseFn, State};
