//! Building footprints to permanently occupied blocks.
//!
//! A block is occupied when the interior of its horizontal cell meets the
//! interior of the footprint polygon and its layer starts below the roof.
//! Contact along a shared edge or at a corner does not occupy a block.

use crate::grid::{BlockIndex, BlockSet, GridSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingFootprint {
    pub polygon: Vec<[f64; 2]>,
    pub height: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("building {index}: {reason}")]
    MalformedPolygon { index: usize, reason: &'static str },
    #[error("building {index}: height {height} must be positive and finite")]
    InvalidHeight { index: usize, height: f64 },
}

impl BuildingFootprint {
    pub fn validate(&self, index: usize) -> Result<(), RasterError> {
        let malformed = |reason| RasterError::MalformedPolygon { index, reason };
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(RasterError::InvalidHeight {
                index,
                height: self.height,
            });
        }
        let n = self.polygon.len();
        if n < 3 {
            return Err(malformed("fewer than 3 vertices"));
        }
        if self.polygon.iter().flatten().any(|c| !c.is_finite()) {
            return Err(malformed("non-finite vertex"));
        }
        if signed_area(&self.polygon) == 0.0 {
            return Err(malformed("zero area"));
        }
        for e1 in 0..n {
            for e2 in e1 + 1..n {
                let adjacent = e2 == e1 + 1 || (e1 == 0 && e2 == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = edge(&self.polygon, e1);
                let (c, d) = edge(&self.polygon, e2);
                if segments_intersect(a, b, c, d) {
                    return Err(malformed("self-intersecting"));
                }
            }
        }
        Ok(())
    }

    fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.polygon {
            for axis in 0..2 {
                lo[axis] = lo[axis].min(p[axis]);
                hi[axis] = hi[axis].max(p[axis]);
            }
        }
        (lo, hi)
    }

    /// Positive-area intersection of the footprint with the rectangle `lo..hi`.
    pub fn overlaps_rect(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        let n = self.polygon.len();
        (0..n).any(|e| {
            let (a, b) = edge(&self.polygon, e);
            segment_enters_rect(a, b, lo, hi)
        }) || point_in_polygon(
            [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
            &self.polygon,
        )
    }
}

/// Blocks touched by any footprint.
pub fn rasterize_buildings(
    footprints: &[BuildingFootprint],
    grid: &GridSpec,
) -> Result<BlockSet, RasterError> {
    for (n, f) in footprints.iter().enumerate() {
        f.validate(n)?;
    }
    let mut set = BlockSet::new(grid);
    let (ni, nj, nk) = grid.dims();
    let [ox, oy, oz] = grid.origin();
    let (a, h) = (grid.side(), grid.height());
    for f in footprints {
        let top = (0..nk)
            .take_while(|&k| oz + (k as f64) * h < f.height)
            .filter(|&k| oz + (k + 1) as f64 * h > 0.0)
            .collect::<Vec<_>>();
        if top.is_empty() {
            continue;
        }
        let (lo, hi) = f.bbox();
        let Some((i0, i1)) = cell_span(lo[0] - ox, hi[0] - ox, a, ni) else {
            continue;
        };
        let Some((j0, j1)) = cell_span(lo[1] - oy, hi[1] - oy, a, nj) else {
            continue;
        };
        for j in j0..=j1 {
            for i in i0..=i1 {
                let cell_lo = [ox + i as f64 * a, oy + j as f64 * a];
                let cell_hi = [ox + (i + 1) as f64 * a, oy + (j + 1) as f64 * a];
                if f.overlaps_rect(cell_lo, cell_hi) {
                    for &k in &top {
                        set.insert(grid, BlockIndex::new(i, j, k));
                    }
                }
            }
        }
    }
    Ok(set)
}

fn cell_span(lo: f64, hi: f64, cell: f64, n: u32) -> Option<(u32, u32)> {
    let first = (lo / cell).floor();
    let last = (hi / cell).ceil() - 1.0;
    if last < 0.0 || first > (n - 1) as f64 {
        return None;
    }
    Some((first.max(0.0) as u32, last.min((n - 1) as f64) as u32))
}

fn edge(poly: &[[f64; 2]], e: usize) -> ([f64; 2], [f64; 2]) {
    (poly[e], poly[(e + 1) % poly.len()])
}

pub(crate) fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|e| {
            let (p, q) = edge(poly, e);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Closed segment intersection, touching included.
pub(crate) fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// True when some point of segment `a..b` lies strictly inside the rectangle.
/// Parametric clipping with open slabs per axis.
fn segment_enters_rect(a: [f64; 2], b: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for axis in 0..2 {
        let d = b[axis] - a[axis];
        if d == 0.0 {
            if !(lo[axis] < a[axis] && a[axis] < hi[axis]) {
                return false;
            }
            continue;
        }
        let (t0, t1) = ((lo[axis] - a[axis]) / d, (hi[axis] - a[axis]) / d);
        t_lo = t_lo.max(t0.min(t1));
        t_hi = t_hi.min(t0.max(t1));
    }
    t_lo < t_hi && t_lo < 1.0 && t_hi > 0.0
}

/// Even-odd crossing test.
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi[1] > p[1]) != (pj[1] > p[1]) {
            let x = pj[0] + (p[1] - pj[1]) * (pi[0] - pj[0]) / (pi[1] - pj[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}
