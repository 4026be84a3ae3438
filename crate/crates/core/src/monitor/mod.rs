//! Post-processing of trajectories: norm and energy series, rate fits and
//! checks of the smoothing, dissipation, Gronwall, continuity, uniqueness
//! and weak-form properties.

mod checks;
mod decay;
mod rates;
mod series;

pub use checks::{
    check_continuity, check_dissipation, check_gronwall, check_uniqueness_stability,
    residual_weak_form, shuffled_control, ContinuityReport, DissipationOrder, DissipationReport,
    UniquenessReport, DISSIPATION_TOLERANCE, GRONWALL_MAX_C, GRONWALL_TOLERANCE,
};
pub use decay::{
    compare_profiles, spectral_decay_profile, DecayProfile, ProfileComparison, DOMINANCE_TOLERANCE,
    ROUNDOFF_FLOOR,
};
pub use rates::{
    check_smoothing_bound, default_window, linear_fit, linear_spaced, log_spaced, rate_fit,
    RateFit, SmoothingBound, EARLY_SLOPE_TOLERANCE, MIN_FIT_SAMPLES,
};
pub use series::{energy_series, energy_weights, norm_series, DataNorms, EnergySeries, NormSeries};
