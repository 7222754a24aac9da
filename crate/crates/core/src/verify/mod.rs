//! Numerical checks of the inequalities and limits relating the fractional
//! energies to their local counterparts.

mod bbm;
mod hardy;
mod mollify;
mod recovery;
mod translation;
mod weight_gap;

pub use bbm::{bbm_sweep, local_target, SweepResult, EXTRAPOLATION_POINTS};
pub use hardy::{hardy_check, HardyResult, StepFunction};
pub use mollify::{mollification_inequality, mollify, MollificationCheck};
pub use recovery::{recovery_sequence, RecoveryReport, RecoveryRow};
pub use translation::{translation_estimate_check, TranslationReport, TranslationRow};
pub use weight_gap::{weight_stability_gap, WeightGapReport, WeightGapRow};
