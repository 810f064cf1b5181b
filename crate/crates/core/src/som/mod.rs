//! Self-organizing map domain: sizing, initialization, lattice, serial training.

mod codebook;
mod geometry;
pub mod pca;
mod schedule;
mod som_file;
mod train;

pub use codebook::{
    assign, bmu_serial, linear_init, linear_init_from, quantization_error, sq_distance_reassociated,
    sq_distance_sequential, Accumulation, BmuResult, Codebook,
};
pub use geometry::{grid_distance, hex_position, map_geometry, MapGeometry};
pub use pca::{top2_principal, PrincipalPlane};
pub use schedule::{neighborhood, Decayed, TrainingSchedule, DEFAULT_ALPHA0, DEFAULT_DECAY};
pub use som_file::{decode, encode, read_som, write_som, SOM_MAGIC};
pub use train::{
    train_serial, train_serial_from, update_step, update_unit, update_with_activation, Engine,
    SampleStream, TrainedMap,
};

pub(crate) use codebook::scan_units;
pub(crate) use train::activation;
