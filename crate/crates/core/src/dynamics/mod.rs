//! Event-driven simulation of the exclusion process and the random walker.

pub mod dump;
pub mod replacement;
pub mod simulate;
pub mod tilt;
pub mod trajectory;
pub mod xi;

pub use dump::{read_dump, write_dump, Dump};
pub use replacement::{block_weights, replacement_error};
pub use simulate::{simulate, Outcome, SimulationSpec, TiltMode};
pub use tilt::{smoothed_h, smoothed_mode, PreparedTilt, TiltParams};
pub use trajectory::{Event, EventKind, Snapshot, TiltAccumulators, Trajectory};
pub use xi::{environment_view, recover_walker_counts, WalkerCounts, XiEvent, XiEventKind, XiPath};
