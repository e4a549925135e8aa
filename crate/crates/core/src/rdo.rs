//! CTU-level on/off decision for the LUT filter.
//!
//! Each CTU compares `J = SSD + λ·R_flag` for the filtered and the
//! unfiltered reconstruction against the original and keeps the cheaper one.
//! The flag rate is a constant bit cost per branch.


use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::plane::PlaneU8;

pub const DEFAULT_CTU_SIZE: usize = 128;

/// Conventional QP-to-λ schedule, `0.57 · 2^((QP − 12) / 3)`.
pub fn lambda_for_qp(qp: i32) -> f64 {
    0.57 * 2f64.powf((qp - 12) as f64 / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdoConfig {
    pub ctu_size: usize,
    pub lambda: f64,
    pub flag_bits_on: f64,
    pub flag_bits_off: f64,
}

impl Default for RdoConfig {
    fn default() -> Self {
        Self {
            ctu_size: DEFAULT_CTU_SIZE,
            lambda: 0.0,
            flag_bits_on: 1.0,
            flag_bits_off: 1.0,
        }
    }
}

impl RdoConfig {
    pub fn for_qp(qp: i32) -> Self {
        Self {
            lambda: lambda_for_qp(qp),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ctu_size == 0 {
            return Err(Error::Config("ctu_size must be >= 1".into()));
        }
        let finite_non_neg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_non_neg(self.lambda) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !finite_non_neg(self.flag_bits_on) || !finite_non_neg(self.flag_bits_off) {
            return Err(Error::Config("flag bit costs must be >= 0".into()));
        }
        Ok(())
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

fn check_shape(a: &PlaneU8, b: &PlaneU8) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Sum of squared differences over whole planes.
pub fn ssd(a: &PlaneU8, b: &PlaneU8) -> Result<u64> {
    check_shape(a, b)?;
    Ok(a.samples()
        .iter()
        .zip(b.samples())
        .map(|(&p, &q)| {
            let d = p as i64 - q as i64;
            (d * d) as u64
        })
        .sum())
}

/// Sum of squared differences restricted to `region`.
pub fn ssd_region(a: &PlaneU8, b: &PlaneU8, region: Region) -> Result<u64> {
    check_shape(a, b)?;
    if region.x + region.width > a.width() || region.y + region.height > a.height() {
        return Err(Error::Shape(format!("region {region:?} outside plane")));
    }
    let mut acc = 0u64;
    for y in region.y..region.y + region.height {
        let ra = &a.row(y)[region.x..region.x + region.width];
        let rb = &b.row(y)[region.x..region.x + region.width];
        acc += ra
            .iter()
            .zip(rb)
            .map(|(&p, &q)| {
                let d = p as i64 - q as i64;
                (d * d) as u64
            })
            .sum::<u64>();
    }
    Ok(acc)
}

/// PSNR in dB for 8-bit planes; `+∞` when the planes are identical.
pub fn psnr(a: &PlaneU8, b: &PlaneU8) -> Result<f64> {
    let e = ssd(a, b)?;
    if e == 0 {
        return Ok(f64::INFINITY);
    }
    let n = a.samples().len() as f64;
    Ok(10.0 * (255.0 * 255.0 * n / e as f64).log10())
}

/// One flag per CTU, row-major, with the cost of both branches.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagMap {
    pub cols: usize,
    pub rows: usize,
    pub ctu_size: usize,
    pub flags: Vec<bool>,
    pub cost_on: Vec<f64>,
    pub cost_off: Vec<f64>,
}

impl FlagMap {
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.flags[row * self.cols + col]
    }

    /// Pixel rectangle of CTU `(col, row)` on a `width`×`height` plane.
    pub fn region(&self, col: usize, row: usize, width: usize, height: usize) -> Region {
        ctu_region(self.ctu_size, col, row, width, height)
    }

    /// Rows of `0`/`1`, one character per CTU.
    pub fn to_text_grid(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(c, r) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_text_grid(text: &str) -> Result<Vec<Vec<bool>>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::Config(format!("bad flag grid character {other:?}"))),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.flags
            .iter()
            .zip(self.cost_on.iter().zip(&self.cost_off))
            .map(|(&f, (&on, &off))| if f { on } else { off })
            .sum()
    }
}

fn ctu_region(ctu: usize, col: usize, row: usize, width: usize, height: usize) -> Region {
    let x = col * ctu;
    let y = row * ctu;
    Region {
        x,
        y,
        width: ctu.min(width - x),
        height: ctu.min(height - y),
    }
}

/// `N_test / N_total`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UsageStats {
    pub n_test: usize,
    pub n_total: usize,
}

impl UsageStats {
    pub fn ratio(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_test as f64 / self.n_total as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct RdoDecision {
    pub flags: FlagMap,
    pub output: PlaneU8,
    pub stats: UsageStats,
}

pub fn decide(recon: &PlaneU8, filtered: &PlaneU8, original: &PlaneU8, cfg: &RdoConfig) -> Result<RdoDecision> {
    cfg.validate()?;
    check_shape(recon, filtered)?;
    check_shape(recon, original)?;
    let (w, h) = (recon.width(), recon.height());
    let ctu = cfg.ctu_size;
    let cols = w.div_ceil(ctu);
    let rows = h.div_ceil(ctu);

    let costs: Vec<(f64, f64)> = (0..rows * cols)
        .into_par_iter()
        .map(|i| {
            let region = ctu_region(ctu, i % cols, i / cols, w, h);
            let on = ssd_region(filtered, original, region).expect("region in bounds") as f64
                + cfg.lambda * cfg.flag_bits_on;
            let off = ssd_region(recon, original, region).expect("region in bounds") as f64
                + cfg.lambda * cfg.flag_bits_off;
            (on, off)
        })
        .collect();

    // ties keep the unfiltered reconstruction
    let flags: Vec<bool> = costs.iter().map(|&(on, off)| on < off).collect();
    let mut output = recon.clone();
    for (i, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
        let r = ctu_region(ctu, i % cols, i / cols, w, h);
        for y in r.y..r.y + r.height {
            let src = &filtered.row(y)[r.x..r.x + r.width];
            output.samples_mut()[y * w + r.x..y * w + r.x + r.width].copy_from_slice(src);
        }
    }
    let stats = UsageStats {
        n_test: flags.iter().filter(|&&f| f).count(),
        n_total: flags.len(),
    };
    Ok(RdoDecision {
        flags: FlagMap {
            cols,
            rows,
            ctu_size: ctu,
            flags,
            cost_on: costs.iter().map(|c| c.0).collect(),
            cost_off: costs.iter().map(|c| c.1).collect(),
        },
        output,
        stats,
    })
}

/// Short human-readable summary of a decision.
pub fn describe(stats: &UsageStats) -> String {
    format!("usage ratio {:.4} ({}/{})", stats.ratio(), stats.n_test, stats.n_total)
}
