//! The constant ledger: `F_max`, the flux thresholds `G_u`, `G_v`, `G`, the
//! chained threshold `C`, the simulation threshold `C̲` and the a priori bound
//! `B`.
//!
//! Every field records the fields it was derived from. [`LedgerBuilder`]
//! refuses to compute a field whose prerequisites are missing.

mod ledger;

pub use ledger::{
    compute_b, compute_c, compute_c_underbar, compute_f_max, compute_g, compute_g_u, compute_g_v,
    ChainStep, ConstantLedger, FMax, FluxThreshold, LedgerBuilder, LedgerEntry,
};
