//! Flight-time heuristics over the 26-connected block lattice.

use crate::grid::{GridSpec, LinkKind, VerticalSign};
use crate::performance::{AircraftPerformance, PerformanceError};
use serde::Serialize;

/// Single-step flight times for the seven move directions of one
/// (aircraft, grid, speed scale) combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeTable {
    pub t_x00: f64,
    pub t_0y0: f64,
    pub t_00z: f64,
    pub t_xy0: f64,
    pub t_x0z: f64,
    pub t_0yz: f64,
    pub t_xyz: f64,
}

impl TimeTable {
    pub fn new(
        perf: &AircraftPerformance,
        grid: &GridSpec,
        scale: f64,
    ) -> Result<Self, PerformanceError> {
        let time = |kind, sign| perf.link_time(&grid.link(kind, sign), scale);
        let axis = time(LinkKind::AxisH, VerticalSign::Level)?;
        let face = time(LinkKind::FaceDiag, VerticalSign::Up)?;
        Ok(Self {
            t_x00: axis,
            t_0y0: axis,
            t_00z: time(LinkKind::Vert, VerticalSign::Up)?,
            t_xy0: time(LinkKind::DiagH, VerticalSign::Level)?,
            t_x0z: face,
            t_0yz: face,
            t_xyz: time(LinkKind::CornerDiag, VerticalSign::Up)?,
        })
    }

    /// Time for one link of the given kind.
    #[inline]
    pub fn link(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::AxisH => self.t_x00,
            LinkKind::DiagH => self.t_xy0,
            LinkKind::Vert => self.t_00z,
            LinkKind::FaceDiag => self.t_x0z,
            LinkKind::CornerDiag => self.t_xyz,
        }
    }
}

/// Level-flight time over `δx × δy` block offsets: as many horizontal
/// diagonals as possible, then straight steps along the longer axis.
pub fn heuristic_2d(dx: u32, dy: u32, tt: &TimeTable) -> f64 {
    if dx >= dy {
        dy as f64 * tt.t_xy0 + (dx - dy) as f64 * tt.t_x00
    } else {
        dx as f64 * tt.t_xy0 + (dy - dx) as f64 * tt.t_0y0
    }
}

/// Greedy three-axis decomposition: corner diagonals for the smallest
/// offset, then the two-axis diagonal spanning the two largest offsets,
/// then straight steps along the largest.
///
/// This is exact whenever a corner diagonal plus a vertical step is no
/// faster than two face diagonals. When it is not (e.g. offset `(1, 1, 2)`
/// for typical multirotors) it overestimates; [`heuristic_3d`] is exact.
pub fn heuristic_3d_sorted(dx: u32, dy: u32, dz: u32, tt: &TimeTable) -> f64 {
    let (x, y, z) = (dx as f64, dy as f64, dz as f64);
    if dx >= dy && dy >= dz {
        z * tt.t_xyz + (y - z) * tt.t_xy0 + (x - y) * tt.t_x00
    } else if dx >= dz && dz >= dy {
        y * tt.t_xyz + (z - y) * tt.t_x0z + (x - z) * tt.t_x00
    } else if dy >= dx && dx >= dz {
        z * tt.t_xyz + (x - z) * tt.t_xy0 + (y - x) * tt.t_0y0
    } else if dy >= dz && dz >= dx {
        x * tt.t_xyz + (z - x) * tt.t_0yz + (y - z) * tt.t_0y0
    } else if dz >= dx && dx >= dy {
        y * tt.t_xyz + (x - y) * tt.t_x0z + (z - x) * tt.t_00z
    } else {
        x * tt.t_xyz + (y - x) * tt.t_0yz + (z - y) * tt.t_00z
    }
}

/// Shortest flight time between blocks `(δx, δy, δz)` apart on an
/// obstacle-free lattice.
///
/// A shortest path never moves against an offset sign and uses exactly
/// `δz` climbing links, because zeroing a component never makes a link
/// slower under the speed model. Each climbing link carries a horizontal
/// step of none, one axis, or a diagonal (vertical, face-diagonal, or
/// corner-diagonal link); the remaining horizontal offset is flown level
/// at octile cost. The minimum is taken over every such assignment, which
/// costs `O(δz³)` and `δz < K`.
pub fn heuristic_3d(dx: u32, dy: u32, dz: u32, tt: &TimeTable) -> f64 {
    let (x, y) = if dx >= dy { (dx, dy) } else { (dy, dx) };
    let z = dz;
    let mut best = f64::INFINITY;
    for corners in 0..=z.min(y) {
        let faces_max = z - corners;
        for fx in 0..=faces_max.min(x - corners) {
            for fy in 0..=(faces_max - fx).min(y - corners) {
                let verts = z - corners - fx - fy;
                let cost = corners as f64 * tt.t_xyz
                    + fx as f64 * tt.t_x0z
                    + fy as f64 * tt.t_0yz
                    + verts as f64 * tt.t_00z
                    + heuristic_2d(x - corners - fx, y - corners - fy, tt);
                if cost < best {
                    best = cost;
                }
            }
        }
    }
    best
}
