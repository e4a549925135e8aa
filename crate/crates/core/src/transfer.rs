//! Caching a filter into clipped LUTs by traversing every lattice input.
//!
//! [`build_full_lut`] and [`clipped_vs_full_report`] exist for testing: at a
//! reduced bit depth an exhaustive table is small enough to serve as ground
//! truth for the clipped + interpolated path.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::interp_4d;
use crate::lut::{ClippedLut, LatticeGrid, LUT_DIMS};

/// A deterministic 4-input filter. `max` is the largest sample of the
/// working bit depth; a well-behaved oracle returns values in `0..=max`.
pub trait FilterOracle: Sync {
    fn eval(&self, q: [u8; LUT_DIMS], max: u8) -> i32;
}

impl<F> FilterOracle for F
where
    F: Fn([u8; LUT_DIMS], u8) -> i32 + Sync,
{
    fn eval(&self, q: [u8; LUT_DIMS], max: u8) -> i32 {
        self(q, max)
    }
}

/// Built-in oracles.
#[derive(Clone, Debug, PartialEq)]
pub enum Oracle {
    /// Returns the target pixel.
    Identity,
    /// Rounded mean of the four inputs.
    Mean,
    /// `clamp(round(Σ cᵢ·qᵢ + bias), 0, max)`, rounding half up.
    Affine { coeffs: [f64; LUT_DIMS], bias: f64 },
}

impl FilterOracle for Oracle {
    fn eval(&self, q: [u8; LUT_DIMS], max: u8) -> i32 {
        match self {
            Oracle::Identity => q[0] as i32,
            Oracle::Mean => (q.iter().map(|&v| v as i32).sum::<i32>() + 2) / 4,
            Oracle::Affine { coeffs, bias } => {
                let v: f64 = coeffs.iter().zip(q).map(|(c, x)| c * x as f64).sum::<f64>() + bias;
                ((v + 0.5).floor() as i32).clamp(0, max as i32)
            }
        }
    }
}

fn checked_eval(oracle: &dyn FilterOracle, q: [u8; LUT_DIMS], max: u8) -> Result<u8> {
    let value = oracle.eval(q, max);
    if value < 0 || value > max as i32 {
        return Err(Error::OracleOutOfRange { input: q, value, max });
    }
    Ok(value as u8)
}

/// Samples `oracle` at every lattice point of `grid` (row-major, first
/// dimension outermost).
pub fn cache_clipped_lut(
    oracle: &dyn FilterOracle,
    grid: LatticeGrid,
    pattern_id: u8,
    stage: u8,
    qp: i32,
) -> Result<ClippedLut> {
    let max = grid.max_sample();
    let values = (0..grid.table_len())
        .into_par_iter()
        .map(|i| {
            let bins = grid.bins_of(i);
            let q = bins.map(|b| grid.lattice_value(b).expect("bin in range"));
            checked_eval(oracle, q, max)
        })
        .collect::<Result<Vec<u8>>>()?;
    ClippedLut::new(grid, values, pattern_id, stage, qp)
}

/// Exhaustive 4D table at a reduced bit depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullLut {
    bit_depth: u8,
    values: Vec<u8>,
}

pub const MAX_FULL_LUT_BITS: u8 = 6;

impl FullLut {
    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    #[inline]
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn side(&self) -> usize {
        1 << self.bit_depth
    }

    pub fn index(&self, q: [u8; LUT_DIMS]) -> usize {
        let n = self.side();
        q.iter().fold(0, |acc, &v| acc * n + v as usize)
    }

    pub fn get(&self, q: [u8; LUT_DIMS]) -> u8 {
        self.values[self.index(q)]
    }
}

pub fn build_full_lut(oracle: &dyn FilterOracle, bit_depth: u8) -> Result<FullLut> {
    if bit_depth == 0 || bit_depth > MAX_FULL_LUT_BITS {
        return Err(Error::BitDepth(bit_depth));
    }
    let n = 1usize << bit_depth;
    let max = (n - 1) as u8;
    let values = (0..n.pow(LUT_DIMS as u32))
        .into_par_iter()
        .map(|i| {
            let q = [(i / (n * n * n)) % n, (i / (n * n)) % n, (i / n) % n, i % n].map(|v| v as u8);
            checked_eval(oracle, q, max)
        })
        .collect::<Result<Vec<u8>>>()?;
    Ok(FullLut { bit_depth, values })
}

/// Absolute deviation of clipped + interpolated retrieval from the full table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationReport {
    pub max_abs: u32,
    pub mean_abs: f64,
    pub samples: u64,
}

pub fn clipped_vs_full_report(
    oracle: &dyn FilterOracle,
    msb_bits: u8,
    lsb_bits: u8,
    bit_depth: u8,
) -> Result<DeviationReport> {
    if msb_bits + lsb_bits != bit_depth {
        return Err(Error::Grid(format!(
            "msb_bits + lsb_bits = {} but bit depth is {bit_depth}",
            msb_bits + lsb_bits
        )));
    }
    let grid = LatticeGrid::new(msb_bits, lsb_bits)?;
    let full = build_full_lut(oracle, bit_depth)?;
    let clipped = cache_clipped_lut(oracle, grid, 0, 1, 0)?;
    let n = full.side();

    let (max_abs, sum) = (0..full.values().len())
        .into_par_iter()
        .map(|i| {
            let q = [(i / (n * n * n)) % n, (i / (n * n)) % n, (i / n) % n, i % n].map(|v| v as u8);
            let d = (interp_4d(&clipped, q) as i32 - full.values()[i] as i32).unsigned_abs();
            (d, d as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    let samples = full.values().len() as u64;
    Ok(DeviationReport {
        max_abs,
        mean_abs: sum as f64 / samples as f64,
        samples,
    })
}
