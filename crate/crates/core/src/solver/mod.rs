//! Time integration, successive approximations and initial data.

mod config;
mod etd;
mod initial;
mod picard;
mod run;

pub use config::{DissipationParams, SolverConfig};
pub use etd::{phi, EtdStepper, Scheme};
pub use initial::{make_initial_data, InitialData};
pub use picard::{
    calibrate_existence_constant, existence_time_estimate, existence_time_from_norm,
    picard_iterate, picard_on_existence_interval, CalibrationReport, CalibrationSetup,
    CalibrationTrial, PicardRun, PicardState, PicardStatus, CONTRACTION_THRESHOLD, RATIO_FLOOR,
};
pub use run::{dissipation_rate, run_simulation, step_etd, top_octave_fraction};
