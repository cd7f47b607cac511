//! AirMatrix geometry: block addressing, point/block mapping and the
//! 26-connected link structure between neighbouring blocks.
//!
//! Indices are zero-based (`i` along x, `j` along y, `k` along z). A block
//! `(i, j, k)` spans `[origin + (i·a, j·a, k·h), origin + ((i+1)·a, (j+1)·a, (k+1)·h))`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use thiserror::Error;

pub const DEFAULT_SIDE: f64 = 20.0;
pub const DEFAULT_HEIGHT: f64 = 40.0;
pub const DEFAULT_LAYERS: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("block dimensions must be positive and finite (a={a}, h={h})")]
    InvalidDimensions { a: f64, h: f64 },
    #[error("block counts must be at least 1 (I={i}, J={j}, K={k})")]
    EmptyGrid { i: u32, j: u32, k: u32 },
    #[error("grid origin must be finite")]
    InvalidOrigin,
    #[error("point ({x}, {y}, {z}) lies outside the grid")]
    PointOutOfBounds { x: f64, y: f64, z: f64 },
    #[error("block {0} lies outside the grid")]
    BlockOutOfBounds(BlockIndex),
}

/// Zero-based block coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockIndex {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl BlockIndex {
    pub const fn new(i: u32, j: u32, k: u32) -> Self {
        Self { i, j, k }
    }

    /// Ordering key used wherever blocks must be compared deterministically: `(k, j, i)`.
    #[inline]
    pub fn layer_major_key(self) -> (u32, u32, u32) {
        (self.k, self.j, self.i)
    }

    /// Per-axis absolute index differences.
    #[inline]
    pub fn abs_delta(self, other: BlockIndex) -> (u32, u32, u32) {
        (
            self.i.abs_diff(other.i),
            self.j.abs_diff(other.j),
            self.k.abs_diff(other.k),
        )
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

/// Geometric family of a link between neighbouring blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LinkKind {
    /// One horizontal axis step.
    AxisH,
    /// Horizontal diagonal (x and y).
    DiagH,
    /// Pure vertical step.
    Vert,
    /// One horizontal axis plus one vertical step.
    FaceDiag,
    /// x, y and z all change.
    CornerDiag,
}

impl LinkKind {
    pub const ALL: [LinkKind; 5] = [
        LinkKind::AxisH,
        LinkKind::DiagH,
        LinkKind::Vert,
        LinkKind::FaceDiag,
        LinkKind::CornerDiag,
    ];

    /// Classifies a unit offset. `None` for the zero offset.
    pub fn from_offset(di: i32, dj: i32, dk: i32) -> Option<LinkKind> {
        let horizontal = (di != 0) as u8 + (dj != 0) as u8;
        match (horizontal, dk != 0) {
            (0, false) => None,
            (1, false) => Some(LinkKind::AxisH),
            (2, false) => Some(LinkKind::DiagH),
            (0, true) => Some(LinkKind::Vert),
            (1, true) => Some(LinkKind::FaceDiag),
            (_, true) => Some(LinkKind::CornerDiag),
            _ => unreachable!("offset components are in -1..=1"),
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(
            self,
            LinkKind::Vert | LinkKind::FaceDiag | LinkKind::CornerDiag
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerticalSign {
    Down,
    Level,
    Up,
}

impl VerticalSign {
    pub fn from_dk(dk: i32) -> Self {
        match dk.signum() {
            -1 => VerticalSign::Down,
            0 => VerticalSign::Level,
            _ => VerticalSign::Up,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            VerticalSign::Down => VerticalSign::Up,
            VerticalSign::Level => VerticalSign::Level,
            VerticalSign::Up => VerticalSign::Down,
        }
    }

    fn factor(self) -> f64 {
        match self {
            VerticalSign::Down => -1.0,
            VerticalSign::Level => 0.0,
            VerticalSign::Up => 1.0,
        }
    }
}

/// A link type together with its length and signed elevation angle for a given grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkClass {
    pub kind: LinkKind,
    pub sign: VerticalSign,
    /// Link length between block centres, meters.
    pub length: f64,
    /// Signed elevation angle, radians.
    pub elevation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawGrid {
    origin: [f64; 3],
    a: f64,
    h: f64,
    #[serde(rename = "I")]
    ni: u32,
    #[serde(rename = "J")]
    nj: u32,
    #[serde(rename = "K")]
    nk: u32,
}

/// AirMatrix geometry. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    origin: [f64; 3],
    a: f64,
    h: f64,
    dims: [u32; 3],
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = GridError;

    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        GridSpec::new(raw.origin, raw.a, raw.h, raw.ni, raw.nj, raw.nk)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            origin: g.origin,
            a: g.a,
            h: g.h,
            ni: g.dims[0],
            nj: g.dims[1],
            nk: g.dims[2],
        }
    }
}

/// The 26 unit offsets ordered by `(dk, dj, di)`.
const OFFSETS: [(i32, i32, i32); 26] = {
    let mut out = [(0, 0, 0); 26];
    let mut n = 0;
    let mut dk = -1;
    while dk <= 1 {
        let mut dj = -1;
        while dj <= 1 {
            let mut di = -1;
            while di <= 1 {
                if !(di == 0 && dj == 0 && dk == 0) {
                    out[n] = (di, dj, dk);
                    n += 1;
                }
                di += 1;
            }
            dj += 1;
        }
        dk += 1;
    }
    out
};

impl GridSpec {
    pub fn new(
        origin: [f64; 3],
        a: f64,
        h: f64,
        ni: u32,
        nj: u32,
        nk: u32,
    ) -> Result<Self, GridError> {
        if !(a.is_finite() && h.is_finite() && a > 0.0 && h > 0.0) {
            return Err(GridError::InvalidDimensions { a, h });
        }
        if ni == 0 || nj == 0 || nk == 0 {
            return Err(GridError::EmptyGrid {
                i: ni,
                j: nj,
                k: nk,
            });
        }
        if origin.iter().any(|c| !c.is_finite()) {
            return Err(GridError::InvalidOrigin);
        }
        Ok(Self {
            origin,
            a,
            h,
            dims: [ni, nj, nk],
        })
    }

    /// `I×J` blocks of 20 m × 20 m × 40 m, three layers (150 m ceiling rounded to whole blocks).
    pub fn with_defaults(ni: u32, nj: u32) -> Result<Self, GridError> {
        Self::new(
            [0.0; 3],
            DEFAULT_SIDE,
            DEFAULT_HEIGHT,
            ni,
            nj,
            DEFAULT_LAYERS,
        )
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    /// Horizontal side length of a block.
    pub fn side(&self) -> f64 {
        self.a
    }

    /// Vertical height of a block.
    pub fn height(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (u32, u32, u32) {
        (self.dims[0], self.dims[1], self.dims[2])
    }

    /// Altitude span covered by the grid, `K·h`.
    pub fn ceiling(&self) -> f64 {
        self.dims[2] as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, b: BlockIndex) -> bool {
        b.i < self.dims[0] && b.j < self.dims[1] && b.k < self.dims[2]
    }

    pub fn check(&self, b: BlockIndex) -> Result<BlockIndex, GridError> {
        if self.contains(b) {
            Ok(b)
        } else {
            Err(GridError::BlockOutOfBounds(b))
        }
    }

    /// Dense index used by per-block storage. `b` must be in bounds.
    #[inline]
    pub fn linear(&self, b: BlockIndex) -> usize {
        debug_assert!(self.contains(b));
        let [ni, nj, _] = self.dims;
        b.i as usize + ni as usize * (b.j as usize + nj as usize * b.k as usize)
    }

    #[inline]
    pub fn from_linear(&self, idx: usize) -> BlockIndex {
        let ni = self.dims[0] as usize;
        let nj = self.dims[1] as usize;
        BlockIndex {
            i: (idx % ni) as u32,
            j: ((idx / ni) % nj) as u32,
            k: (idx / (ni * nj)) as u32,
        }
    }

    /// All blocks in linear order.
    pub fn blocks(&self) -> impl Iterator<Item = BlockIndex> + '_ {
        (0..self.len()).map(|n| self.from_linear(n))
    }

    /// Maps a point to its block. Points on a shared face belong to the
    /// higher-index block; points on the outer upper faces are clamped inward.
    pub fn block_of_point(&self, p: [f64; 3]) -> Result<BlockIndex, GridError> {
        let cell = [self.a, self.a, self.h];
        let mut idx = [0u32; 3];
        for axis in 0..3 {
            let rel = p[axis] - self.origin[axis];
            let extent = self.dims[axis] as f64 * cell[axis];
            if !(rel >= 0.0 && rel <= extent) {
                return Err(GridError::PointOutOfBounds {
                    x: p[0],
                    y: p[1],
                    z: p[2],
                });
            }
            let n = (rel / cell[axis]).floor() as u64;
            idx[axis] = n.min(self.dims[axis] as u64 - 1) as u32;
        }
        Ok(BlockIndex::new(idx[0], idx[1], idx[2]))
    }

    pub fn center(&self, b: BlockIndex) -> [f64; 3] {
        [
            self.origin[0] + (b.i as f64 + 0.5) * self.a,
            self.origin[1] + (b.j as f64 + 0.5) * self.a,
            self.origin[2] + (b.k as f64 + 0.5) * self.h,
        ]
    }

    /// Link geometry for a kind and vertical direction on this grid.
    pub fn link(&self, kind: LinkKind, sign: VerticalSign) -> LinkClass {
        let (a, h) = (self.a, self.h);
        let sign = if kind.is_vertical() {
            debug_assert!(sign != VerticalSign::Level);
            sign
        } else {
            VerticalSign::Level
        };
        let (length, magnitude) = match kind {
            LinkKind::AxisH => (a, 0.0),
            LinkKind::DiagH => (std::f64::consts::SQRT_2 * a, 0.0),
            LinkKind::Vert => (h, FRAC_PI_2),
            LinkKind::FaceDiag => (a.hypot(h), (h / a).atan()),
            LinkKind::CornerDiag => (
                (2.0 * a * a + h * h).sqrt(),
                (h / (std::f64::consts::SQRT_2 * a)).atan(),
            ),
        };
        LinkClass {
            kind,
            sign,
            length,
            elevation: sign.factor() * magnitude,
        }
    }

    /// Every link class of this grid: two level kinds plus the three
    /// climbing kinds in both vertical directions.
    pub fn link_table(&self) -> Vec<LinkClass> {
        let mut table = Vec::with_capacity(8);
        for kind in LinkKind::ALL {
            if kind.is_vertical() {
                table.push(self.link(kind, VerticalSign::Down));
                table.push(self.link(kind, VerticalSign::Up));
            } else {
                table.push(self.link(kind, VerticalSign::Level));
            }
        }
        table
    }

    /// In-bounds neighbours of `b`, ordered by `(dk, dj, di)`.
    pub fn neighbors(&self, b: BlockIndex) -> impl Iterator<Item = (BlockIndex, LinkClass)> + '_ {
        let dims = self.dims;
        OFFSETS.iter().filter_map(move |&(di, dj, dk)| {
            let i = b.i as i64 + di as i64;
            let j = b.j as i64 + dj as i64;
            let k = b.k as i64 + dk as i64;
            if i < 0
                || j < 0
                || k < 0
                || i >= dims[0] as i64
                || j >= dims[1] as i64
                || k >= dims[2] as i64
            {
                return None;
            }
            let kind = LinkKind::from_offset(di, dj, dk)?;
            let n = BlockIndex::new(i as u32, j as u32, k as u32);
            Some((n, self.link(kind, VerticalSign::from_dk(dk))))
        })
    }

    /// Link between two blocks if they are 26-neighbours.
    pub fn link_between(&self, from: BlockIndex, to: BlockIndex) -> Option<LinkClass> {
        let (di, dj, dk) = (
            to.i as i64 - from.i as i64,
            to.j as i64 - from.j as i64,
            to.k as i64 - from.k as i64,
        );
        if di.abs() > 1 || dj.abs() > 1 || dk.abs() > 1 {
            return None;
        }
        let kind = LinkKind::from_offset(di as i32, dj as i32, dk as i32)?;
        Some(self.link(kind, VerticalSign::from_dk(dk as i32)))
    }
}

/// Dense per-block boolean set (static obstacles, visited marks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSet {
    bits: Vec<bool>,
    count: usize,
}

impl BlockSet {
    pub fn new(grid: &GridSpec) -> Self {
        Self {
            bits: vec![false; grid.len()],
            count: 0,
        }
    }

    pub fn insert(&mut self, grid: &GridSpec, b: BlockIndex) -> bool {
        let slot = &mut self.bits[grid.linear(b)];
        let fresh = !*slot;
        *slot = true;
        self.count += fresh as usize;
        fresh
    }

    #[inline]
    pub fn contains(&self, grid: &GridSpec, b: BlockIndex) -> bool {
        self.bits[grid.linear(b)]
    }

    #[inline]
    pub fn contains_linear(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter<'a>(&'a self, grid: &'a GridSpec) -> impl Iterator<Item = BlockIndex> + 'a {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(n, _)| grid.from_linear(n))
    }

    /// Number of members on layer `k`.
    pub fn count_on_layer(&self, grid: &GridSpec, k: u32) -> usize {
        let (ni, nj, _) = grid.dims();
        let per_layer = ni as usize * nj as usize;
        let start = k as usize * per_layer;
        self.bits[start..start + per_layer]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}
