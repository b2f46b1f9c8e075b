//! Empirical measures, path fields, the weak distance and the energy norm.

pub mod density;
pub mod path;
pub mod weak;

pub use density::{block_average, cumulative_l1, empirical_density, l1_distance};
pub use path::{energy_norm, record_path_field, PathField};
pub use weak::{weak_distance, Atoms, FourierMoments, N_MAX};
