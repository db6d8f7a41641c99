//! Synthetic occupancy-grid planning instances.
//!
//! Maps are square `M x M` grids with rectangular obstacles and a goal cell
//! drawn uniformly from the remaining free space. Generation is a pure
//! function of `(GenSpec, record index)`, so datasets can be produced in
//! parallel and regenerated record-by-record.

use crate::rng::{derive_seed, SplitMix64};
use thiserror::Error;

pub const FREE: u8 = 0;
pub const OBSTACLE: u8 = 1;

/// Redraw budget for maps whose obstacles cover every cell.
pub const RETRY_LIMIT: u32 = 100;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
    #[error("gave up after {RETRY_LIMIT} redraws at record {index} for spec {spec:?}")]
    RetryLimitExceeded { index: u64, spec: GenSpec },
}

/// A square occupancy grid plus its goal cell (row-major indexing).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    pub size: usize,
    pub occupancy: Vec<u8>,
    pub goal: usize,
}

impl GridMap {
    pub fn new(size: usize, occupancy: Vec<u8>, goal: usize) -> Result<Self, GenError> {
        let map = Self { size, occupancy, goal };
        map.validate()?;
        Ok(map)
    }

    /// All-free map with the goal at `goal`.
    pub fn empty(size: usize, goal: usize) -> Result<Self, GenError> {
        Self::new(size, vec![FREE; size * size], goal)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.size < 2 {
            return Err(GenError::InvalidSpec(format!("map size {} < 2", self.size)));
        }
        if self.occupancy.len() != self.size * self.size {
            return Err(GenError::InvalidSpec(format!(
                "occupancy length {} != {}^2",
                self.occupancy.len(),
                self.size
            )));
        }
        if self.occupancy.iter().any(|&c| c != FREE && c != OBSTACLE) {
            return Err(GenError::InvalidSpec("occupancy byte outside {0,1}".into()));
        }
        if self.goal >= self.occupancy.len() || self.occupancy[self.goal] != FREE {
            return Err(GenError::InvalidSpec(format!("goal {} is not a free cell", self.goal)));
        }
        Ok(())
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.size * self.size
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.size + col
    }

    #[inline]
    pub fn is_free(&self, idx: usize) -> bool {
        self.occupancy[idx] == FREE
    }

    pub fn goal_row_col(&self) -> (usize, usize) {
        (self.goal / self.size, self.goal % self.size)
    }
}

/// Parameters of one synthetic map distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub map_size: usize,
    pub max_obstacles: u32,
    /// Rectangle side bounds in cells, inclusive.
    pub min_side: usize,
    pub max_side: usize,
    pub seed: u64,
    pub count: u32,
}

impl GenSpec {
    /// Spec with the default obstacle shape: sides uniform in `[1, ceil(M/4)]`.
    pub fn new(map_size: usize, max_obstacles: u32, seed: u64, count: u32) -> Self {
        Self {
            map_size,
            max_obstacles,
            min_side: 1,
            max_side: map_size.div_ceil(4).max(1),
            seed,
            count,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.map_size < 2 {
            return Err(GenError::InvalidSpec(format!("map size {} < 2", self.map_size)));
        }
        if self.min_side < 1 || self.min_side > self.max_side || self.max_side > self.map_size {
            return Err(GenError::InvalidSpec(format!(
                "obstacle sides must satisfy 1 <= {} <= {} <= {}",
                self.min_side, self.max_side, self.map_size
            )));
        }
        Ok(())
    }
}

/// Per-record generation byproducts, recoverable from the spec alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenMeta {
    /// Obstacle count drawn for the accepted attempt.
    pub obstacles_drawn: u32,
    /// Redraws before a map with free space was produced (0 = first try).
    pub attempts: u32,
}

/// Deterministically generate record `index` of `spec`.
///
/// Draw order within an attempt is pinned: obstacle count, then per rectangle
/// (height, width, top row, left column), then the goal among free cells.
/// Rectangles may overlap and are clipped at the borders. A fully blocked map
/// is redrawn from a sub-seed derived from (seed, index, attempt).
pub fn generate_map(spec: &GenSpec, index: u64) -> Result<GridMap, GenError> {
    generate_map_with_meta(spec, index).map(|(map, _)| map)
}

pub fn generate_map_with_meta(spec: &GenSpec, index: u64) -> Result<(GridMap, GenMeta), GenError> {
    spec.validate()?;
    let m = spec.map_size;
    for attempt in 0..RETRY_LIMIT {
        let mut rng = SplitMix64::new(derive_seed(spec.seed, "map", &[index, attempt as u64]));
        let k = rng.uniform(spec.max_obstacles as u64 + 1) as u32;
        let mut occupancy = vec![FREE; m * m];
        let side_range = (spec.max_side - spec.min_side + 1) as u64;
        for _ in 0..k {
            let h = spec.min_side + rng.uniform(side_range) as usize;
            let w = spec.min_side + rng.uniform(side_range) as usize;
            let r0 = rng.uniform(m as u64) as usize;
            let c0 = rng.uniform(m as u64) as usize;
            for r in r0..(r0 + h).min(m) {
                let row = &mut occupancy[r * m..(r + 1) * m];
                for cell in &mut row[c0..(c0 + w).min(m)] {
                    *cell = OBSTACLE;
                }
            }
        }
        let free: Vec<usize> = (0..m * m).filter(|&i| occupancy[i] == FREE).collect();
        if free.is_empty() {
            continue;
        }
        let goal = free[rng.uniform(free.len() as u64) as usize];
        let map = GridMap { size: m, occupancy, goal };
        let meta = GenMeta { obstacles_drawn: k, attempts: attempt };
        return Ok((map, meta));
    }
    Err(GenError::RetryLimitExceeded { index, spec: spec.clone() })
}

/// Obstacle count drawn for record `index`, replayed from the spec. Used for
/// per-obstacle-count evaluation breakdowns without storing the count.
pub fn drawn_obstacle_count(spec: &GenSpec, index: u64) -> Result<u32, GenError> {
    generate_map_with_meta(spec, index).map(|(_, meta)| meta.obstacles_drawn)
}
