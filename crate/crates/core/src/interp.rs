//! MSB/LSB decomposition and simplex interpolation over clipped lattices.
//!
//! An input tuple selects a hypercube cell with its MSBs. Sorting the LSBs
//! in descending order picks one of the 24 simplices inside the cell; its
//! five nested vertices are blended with integer weights summing to the
//! sampling interval `W`, and the sum is rounded half up.
//!
//! The top cell of each axis spans `[240, 255]`, 15 apart, but is weighted
//! as if it were 16 wide. The maximal sample (255) is routed to the last bin
//! with a zero LSB so that every lattice point, including the top one, is
//! reproduced exactly.

use crate::lut::{ClippedLut, LatticeGrid, LUT_DIMS};

/// Splits an 8-bit sample into its 4 most and 4 least significant bits.
#[inline]
pub fn split_msb_lsb(v: u8) -> (u8, u8) {
    (v >> 4, v & 0x0f)
}

/// Cell (bin) and in-cell offset of a sample on `grid`.
#[inline]
pub fn locate(grid: LatticeGrid, v: u8) -> (usize, u32) {
    let max = grid.max_sample();
    let v = v.min(max);
    if v == max {
        return (grid.bins_per_dim() - 1, 0);
    }
    let lsb_bits = grid.lsb_bits();
    ((v >> lsb_bits) as usize, (v & ((1u8 << lsb_bits) - 1)) as u32)
}

/// One of the 24 simplices of a 4D cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimplexCase {
    /// Dimensions sorted by descending LSB, ties by ascending index.
    pub order: [usize; LUT_DIMS],
    /// Nested corner offsets: the origin, then one more dimension set per step.
    pub vertices: [[u8; LUT_DIMS]; LUT_DIMS + 1],
    /// Non-negative vertex weights summing to the interval `W`.
    pub weights: [u32; LUT_DIMS + 1],
}

/// Simplex for LSBs on the standard grid (`W = 16`).
pub fn simplex_case(lsb: [u32; LUT_DIMS]) -> SimplexCase {
    simplex_case_with(lsb, LatticeGrid::STANDARD.interval())
}

pub fn simplex_case_with(lsb: [u32; LUT_DIMS], interval: u32) -> SimplexCase {
    debug_assert!(lsb.iter().all(|&l| l < interval));
    let mut order = [0usize, 1, 2, 3];
    // stable: equal LSBs keep ascending dimension order
    order.sort_by(|&a, &b| lsb[b].cmp(&lsb[a]));

    let mut vertices = [[0u8; LUT_DIMS]; LUT_DIMS + 1];
    for k in 0..LUT_DIMS {
        vertices[k + 1] = vertices[k];
        vertices[k + 1][order[k]] = 1;
    }

    let sorted = order.map(|d| lsb[d]);
    let weights = [
        interval - sorted[0],
        sorted[0] - sorted[1],
        sorted[1] - sorted[2],
        sorted[2] - sorted[3],
        sorted[3],
    ];
    SimplexCase {
        order,
        vertices,
        weights,
    }
}

/// Interpolated retrieval of `lut` at the input tuple `q`.
pub fn interp_4d(lut: &ClippedLut, q: [u8; LUT_DIMS]) -> u8 {
    let grid = lut.grid();
    let strides = grid.strides();
    let top = grid.bins_per_dim() - 1;

    let mut msb = [0usize; LUT_DIMS];
    let mut lsb = [0u32; LUT_DIMS];
    for d in 0..LUT_DIMS {
        let (m, l) = locate(grid, q[d]);
        msb[d] = m;
        lsb[d] = l;
    }
    let case = simplex_case_with(lsb, grid.interval());

    let values = lut.values();
    let mut idx: usize = (0..LUT_DIMS).map(|d| msb[d] * strides[d]).sum();
    let mut acc = case.weights[0] * values[idx] as u32;
    for k in 0..LUT_DIMS {
        let d = case.order[k];
        // only reachable with a zero weight (maximal sample on the top bin)
        if msb[d] < top {
            idx += strides[d];
        }
        acc += case.weights[k + 1] * values[idx] as u32;
    }
    ((acc + grid.interval() / 2) >> grid.lsb_bits()) as u8
}

/// A 17×17 table indexed by two lattice bins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lut2d {
    values: Vec<u8>,
}

const BINS: usize = 17;

impl Lut2d {
    pub fn from_fn<F: Fn(usize, usize) -> u8>(f: F) -> Self {
        let mut values = Vec::with_capacity(BINS * BINS);
        for i in 0..BINS {
            for j in 0..BINS {
                values.push(f(i, j));
            }
        }
        Self { values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.values[i * BINS + j]
    }
}

/// Bounding triangle of a 2D query: `[P11, P10 or P01, P00]` and their weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle2d {
    pub vertices: [(usize, usize); 3],
    pub weights: [u32; 3],
}

/// Triangle selection for a 2D query; `P10` is chosen when the first LSB is
/// strictly larger, `P01` otherwise.
pub fn triangle_2d(i0: u8, i1: u8) -> Triangle2d {
    let grid = LatticeGrid::STANDARD;
    let top = grid.bins_per_dim() - 1;
    let w = grid.interval();
    let (m0, lx) = locate(grid, i0);
    let (m1, ly) = locate(grid, i1);
    let n0 = (m0 + 1).min(top);
    let n1 = (m1 + 1).min(top);
    let (mid, hi, lo) = if lx > ly {
        ((n0, m1), lx, ly)
    } else {
        ((m0, n1), ly, lx)
    };
    Triangle2d {
        vertices: [(n0, n1), mid, (m0, m1)],
        weights: [lo, hi - lo, w - hi],
    }
}

pub fn interp_2d(lut: &Lut2d, i0: u8, i1: u8) -> u8 {
    let t = triangle_2d(i0, i1);
    let acc: u32 = t
        .vertices
        .iter()
        .zip(t.weights)
        .map(|(&(a, b), w)| w * lut.get(a, b) as u32)
        .sum();
    ((acc + 8) >> 4) as u8
}
