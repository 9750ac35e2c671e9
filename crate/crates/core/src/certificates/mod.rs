//! Certificates for systems outside the bounded regime: structural
//! obstructions to a Lyapunov-like function and a blow-up criterion for the
//! symmetric Weinberger reduction.

mod blowup;
mod nollf;

pub use blowup::{
    blowup_certificate, c_root, h, level_curve_v, reduce_symmetric, simulate_reduced, verify_gronwall,
    BlowupCertificate, GronwallReport, ReducedSamples, ReducedSystem, Verdict, REFERENCE_DELTA_BOUND,
};
pub use nollf::{no_llf_mutualism_test, no_llf_ratio_test, NoLlfCertificate, NoLlfCondition};
