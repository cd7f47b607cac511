//! Block-discretized urban airspace, aircraft speed model, occupancy
//! ledger and conflict-free 4D trajectory planning.

pub mod batch;
pub mod grid;
pub mod occupancy;
pub mod performance;
pub mod reporting;
pub mod search;
