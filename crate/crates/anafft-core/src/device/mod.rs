//! Crossbar device model: programming, bit-serial input, analog MVM and
//! digitization.

mod array;
mod calibrate;
mod input;
mod model;
mod mvm;

pub use array::{
    map_dft_to_targets, map_matrix_to_targets, program, weight_error_stats, Layout, ProgrammedArray, TargetGrid,
    WeightErrorStats,
};
pub use calibrate::{calibrate_gmax, unit_column_currents, CalibrationOptions};
pub use input::{complex_components, quantize_input, quantize_with_scale, BitPlanes, InputEncoding};
pub use model::{HardwareModel, Pwl};
pub use mvm::{
    accumulate_bits, analog_mvm, default_strides, subsample_view, Columns, DftView, ExecStats, MvmReadout,
    SliceReadout,
};
