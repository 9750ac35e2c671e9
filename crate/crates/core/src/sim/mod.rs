//! Time integration of the discretized system with runtime monitors.

mod export;
mod integrator;
pub mod monitor;

pub use export::{write_monitors_csv, write_trajectory_csv};
pub use integrator::{
    integrate, integrate_ode, IntegratorSettings, OdeRun, OdeSystem, Termination, TrajectoryRecord, BLOWUP_GUARD,
    CLIP_TOL,
};
pub use monitor::{
    assert_lemmas, detect_crossings, flux_effects, snapshot_partition, Crossing, Direction, FluxEffects, LemmaId,
    Monitor, MonitorFrame, MonitorLimits, PartitionSnapshot, Violation,
};
