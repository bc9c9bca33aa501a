//! Monte Carlo and analytic verification.

mod decay;
mod dissipation;
mod drift;
mod events;
mod gibbs;
mod observable;
mod oracle;
mod stationary;

pub use decay::{observable_decay_fit, DecayOptions, DecayReport, DEFAULT_BURN_IN};
pub use dissipation::{dissipation_scan, dissipation_tail, DissipationConfig, DissipationReport, TailEstimate};
pub use drift::{drift_estimate, drift_scan, DriftConfig, DriftEstimate, DriftLevel, DriftReport};
pub use events::{classify_event, EventClass, EventFrequencies, EventTracker};
pub use gibbs::{gibbs_invariance_test, GibbsOptions, GibbsReport, GibbsSampler, ObservableShift, ACCEPTANCE_FLOOR};
pub use observable::Observable;
pub use oracle::{
    gaussian_stationary_covariance, gibbs_covariance, linear_drift, lyapunov_residual, solve_lyapunov, GaussianOracle,
    OracleSummary,
};
pub use stationary::{stationary_moment_test, Moment, MomentComparison, MomentEntry, StationaryOptions, StationaryReport};
