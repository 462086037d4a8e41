//! Numerical experiments on pinching families: windowed spectral
//! convergence, escaping-mass checks, the two-piece Rayleigh quotient
//! bound, band round trips, neck concentration and eigenfunction traces.

mod corollary23;
mod hausdorff;
mod lemma21;
mod lemma33;
mod pinch;
mod theorem_a;

pub use corollary23::{corollary23_roundtrip, BandTransfer, Corollary23Report};
pub use hausdorff::hausdorff_window;
pub use lemma21::{lemma21_near_extremal, lemma21_property_trial, Lemma21Report, Lemma21Trial};
pub use lemma33::{calibrate_delta, lemma33_property_trial, DeltaCalibration, Lemma33Report};
pub use pinch::{pinch_eigenfunction_trace, tune_insert, tuned_insert_family, window_continuity, PinchRow, PinchTrace};
pub use theorem_a::{
    effective_convergence_check, eigenfunction_convergence, escaping_mu1, theorem_a_experiment, ConvergenceReport,
    ConvergenceRow, Discretization, EffectiveRow, EigenfunctionLimitRow, ReportMeta, SampledFunction,
};
