//! Bennett-type deviation inequalities and generalization bounds.
//!
//! Modules, bottom-up:
//!
//! - [`special_functions`]: Γ, its numeric inverse, the exponent γ(β; x).
//! - [`bounds`]: tail bounds and their inverses (radii).
//! - [`constants`]: re-derivation of the β intervals and thresholds.
//! - [`complexity`]: covering numbers, UEN estimates, Rademacher complexity.
//! - [`simulate`]: seeded Monte Carlo validation of the tail bounds.
//! - [`rates`]: radius-vs-N curves and log-log slope fits.
//! - [`report`]: configuration, CSV/JSON output and the CLI commands.

pub mod bounds;
pub mod complexity;
pub mod constants;
pub mod rates;
mod rng;
pub mod report;
pub mod simulate;
pub mod special_functions;
