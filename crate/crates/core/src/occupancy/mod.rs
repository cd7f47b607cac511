//! The 4D occupancy ledger, building rasterization and duplicate-occupancy metrics.

mod ledger;
mod metrics;
mod raster;

pub use ledger::{LedgerError, OccupancyLedger, Owner, Reservation, TimeInterval};
pub use metrics::{conflict_event_count, duplicate_occupancy_time, sample_range, DuplicateCounter};
pub use raster::{point_in_polygon, rasterize_buildings, BuildingFootprint, RasterError};
