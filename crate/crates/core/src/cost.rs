//! Operation counts, worst-case kMACs and theoretical energy per pixel.
//!
//! Energies are held in femtojoules so that the per-pixel totals are exact
//! integers; they are converted to pJ only for display.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lut::{PipelinePreset, PresetName};

/// Per-pixel (or per-frame) operation counts by kind and integer width.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostVector {
    pub int8_add: u64,
    pub int8_mul: u64,
    pub int32_add: u64,
    pub int32_mul: u64,
}

impl CostVector {
    pub const fn new(int8_add: u64, int8_mul: u64, int32_add: u64, int32_mul: u64) -> Self {
        Self {
            int8_add,
            int8_mul,
            int32_add,
            int32_mul,
        }
    }

    #[inline]
    pub fn total_add(&self) -> u64 {
        self.int8_add + self.int32_add
    }

    #[inline]
    pub fn total_mul(&self) -> u64 {
        self.int8_mul + self.int32_mul
    }

    /// Worst case of additions and multiplications, in MACs.
    #[inline]
    pub fn worst_case_macs(&self) -> u64 {
        self.total_add().max(self.total_mul())
    }

    fn checked_scale(&self, factor: u64) -> Option<Self> {
        Some(Self {
            int8_add: self.int8_add.checked_mul(factor)?,
            int8_mul: self.int8_mul.checked_mul(factor)?,
            int32_add: self.int32_add.checked_mul(factor)?,
            int32_mul: self.int32_mul.checked_mul(factor)?,
        })
    }
}

impl std::ops::Add for CostVector {
    type Output = CostVector;

    fn add(self, o: CostVector) -> CostVector {
        CostVector::new(
            self.int8_add + o.int8_add,
            self.int8_mul + o.int8_mul,
            self.int32_add + o.int32_add,
            self.int32_mul + o.int32_mul,
        )
    }
}

/// Energy per operation in femtojoules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnergyTable {
    pub int8_add_fj: u64,
    pub int8_mul_fj: u64,
    pub int32_add_fj: u64,
    pub int32_mul_fj: u64,
}

impl Default for EnergyTable {
    /// 0.03 / 0.2 / 0.1 / 3.1 pJ (45 nm figures).
    fn default() -> Self {
        Self {
            int8_add_fj: 30,
            int8_mul_fj: 200,
            int32_add_fj: 100,
            int32_mul_fj: 3100,
        }
    }
}

impl EnergyTable {
    /// Builds a table from pJ values, rounded to the nearest fJ.
    pub fn from_pj(int8_add: f64, int8_mul: f64, int32_add: f64, int32_mul: f64) -> Result<Self> {
        let fj = |pj: f64| -> Result<u64> {
            if !pj.is_finite() || pj < 0.0 {
                return Err(Error::Config(format!("energy {pj} pJ must be finite and >= 0")));
            }
            Ok((pj * 1000.0).round() as u64)
        };
        Ok(Self {
            int8_add_fj: fj(int8_add)?,
            int8_mul_fj: fj(int8_mul)?,
            int32_add_fj: fj(int32_add)?,
            int32_mul_fj: fj(int32_mul)?,
        })
    }
}

/// Published per-pixel operation counts of the U and V presets.
pub fn preset_cost(name: PresetName) -> Result<CostVector> {
    match name {
        PresetName::U => Ok(CostVector::new(70, 4, 68, 55)),
        PresetName::V => Ok(CostVector::new(206, 4, 190, 152)),
        other => Err(Error::UnpublishedCost(other.to_string())),
    }
}

/// Counts for a whole `width`×`height` frame.
pub fn frame_cost(cv: &CostVector, width: u64, height: u64) -> Result<CostVector> {
    if width == 0 || height == 0 {
        return Err(Error::Config(format!("frame size {width}x{height}")));
    }
    let pixels = width.checked_mul(height).ok_or(Error::Overflow("frame pixel count"))?;
    let scaled = cv.checked_scale(pixels).ok_or(Error::Overflow("frame cost"))?;
    scaled
        .int8_add
        .checked_add(scaled.int32_add)
        .and(scaled.int8_mul.checked_add(scaled.int32_mul))
        .ok_or(Error::Overflow("frame cost totals"))?;
    Ok(scaled)
}

/// Worst-case kMACs per pixel.
pub fn kmacs(cv: &CostVector) -> f64 {
    cv.worst_case_macs() as f64 / 1000.0
}

/// How a kMACs value is cut to two decimals for display.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KmacsRounding {
    Truncate,
    Nearest,
}

/// The two-decimal convention under which each preset's kMACs figure is
/// quoted: U is truncated (0.138 → 0.13), V rounded (0.396 → 0.40).
pub fn published_kmacs_rounding(name: PresetName) -> KmacsRounding {
    match name {
        PresetName::U => KmacsRounding::Truncate,
        _ => KmacsRounding::Nearest,
    }
}

/// Two-decimal kMACs string, computed on the integer MAC count.
pub fn format_kmacs(cv: &CostVector, rounding: KmacsRounding) -> String {
    let macs = cv.worst_case_macs();
    let hundredths = match rounding {
        KmacsRounding::Truncate => macs / 10,
        KmacsRounding::Nearest => (macs + 5) / 10,
    };
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Energy in femtojoules.
pub fn energy_fj(cv: &CostVector, table: &EnergyTable) -> u64 {
    cv.int8_add * table.int8_add_fj
        + cv.int8_mul * table.int8_mul_fj
        + cv.int32_add * table.int32_add_fj
        + cv.int32_mul * table.int32_mul_fj
}

/// Energy in pJ.
pub fn energy(cv: &CostVector, table: &EnergyTable) -> f64 {
    energy_fj(cv, table) as f64 / 1000.0
}

/// Rough operation count derived from a preset's structure.
///
/// Per 4D retrieval: 6 LSB comparisons and 4 weight differences (int8 adds),
/// 3 multiplies and 7 adds for vertex addressing, 5 multiplies and 5 adds for
/// the weighted sum with rounding (int32). Per pattern: 4 retrievals, 4 adds
/// for the rotation mean, one weight multiply and one accumulate. Per stage:
/// one rounding add. Not calibrated against the published U/V vectors.
pub fn analytic_cost(preset: &PipelinePreset) -> CostVector {
    let retrieval = CostVector::new(10, 0, 12, 8);
    let mut total = CostVector::default();
    for stage in preset.stages() {
        for _ in stage.patterns() {
            for _ in 0..4 {
                total = total + retrieval;
            }
            total = total + CostVector::new(0, 0, 4 + 1, 1);
        }
        total = total + CostVector::new(0, 0, 1, 0);
    }
    total
}

fn group_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn fj_to_pj_string(fj: u64, decimals: u32) -> String {
    let unit = 10u64.pow(3 - decimals);
    let v = (fj + unit / 2) / unit;
    if decimals == 0 {
        return v.to_string();
    }
    let d = 10u64.pow(decimals);
    format!("{}.{:0width$}", v / d, v % d, width = decimals as usize)
}

/// Everything the `cost` command prints.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub label: String,
    pub per_pixel: CostVector,
    pub width: u64,
    pub height: u64,
    pub frame: CostVector,
    pub rounding: KmacsRounding,
    pub energy_fj: u64,
}

impl CostReport {
    pub fn new(
        label: impl Into<String>,
        per_pixel: CostVector,
        width: u64,
        height: u64,
        rounding: KmacsRounding,
        table: &EnergyTable,
    ) -> Result<Self> {
        Ok(Self {
            label: label.into(),
            frame: frame_cost(&per_pixel, width, height)?,
            per_pixel,
            width,
            height,
            rounding,
            energy_fj: energy_fj(&per_pixel, table),
        })
    }

    pub fn energy_pj(&self) -> f64 {
        self.energy_fj as f64 / 1000.0
    }

    pub fn to_text(&self) -> String {
        let p = &self.per_pixel;
        let f = &self.frame;
        let mut s = String::new();
        let _ = writeln!(s, "cost model: {}", self.label);
        let _ = writeln!(s, "{:<22} {:>16}", "pixel-wise", "");
        for (name, v) in [
            ("int8 add", p.int8_add),
            ("int8 multiply", p.int8_mul),
            ("int32 add", p.int32_add),
            ("int32 multiply", p.int32_mul),
            ("total add", p.total_add()),
            ("total multiply", p.total_mul()),
        ] {
            let _ = writeln!(s, "  {:<20} {:>16}", name, group_thousands(v));
        }
        let _ = writeln!(s, "frame-wise ({}x{})", self.width, self.height);
        for (name, v) in [
            ("int8 add", f.int8_add),
            ("int8 multiply", f.int8_mul),
            ("int32 add", f.int32_add),
            ("int32 multiply", f.int32_mul),
            ("total add", f.total_add()),
            ("total multiply", f.total_mul()),
        ] {
            let _ = writeln!(s, "  {:<20} {:>16}", name, group_thousands(v));
        }
        let _ = writeln!(
            s,
            "worst-case kMACs/pixel {:>16} (raw {})",
            format_kmacs(p, self.rounding),
            kmacs(p)
        );
        let _ = writeln!(
            s,
            "energy pJ/pixel        {:>16} (raw {})",
            fj_to_pj_string(self.energy_fj, 1),
            fj_to_pj_string(self.energy_fj, 3)
        );
        s
    }

    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let p = &self.per_pixel;
        let f = &self.frame;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("label", self.label.clone());
        kv("width", self.width.to_string());
        kv("height", self.height.to_string());
        kv("pixel.int8_add", p.int8_add.to_string());
        kv("pixel.int8_mul", p.int8_mul.to_string());
        kv("pixel.int32_add", p.int32_add.to_string());
        kv("pixel.int32_mul", p.int32_mul.to_string());
        kv("pixel.total_add", p.total_add().to_string());
        kv("pixel.total_mul", p.total_mul().to_string());
        kv("frame.int8_add", f.int8_add.to_string());
        kv("frame.int8_mul", f.int8_mul.to_string());
        kv("frame.int32_add", f.int32_add.to_string());
        kv("frame.int32_mul", f.int32_mul.to_string());
        kv("frame.total_add", f.total_add().to_string());
        kv("frame.total_mul", f.total_mul().to_string());
        kv("kmacs_per_pixel.raw", kmacs(p).to_string());
        kv("kmacs_per_pixel", format_kmacs(p, self.rounding));
        kv("energy_pj.raw", fj_to_pj_string(self.energy_fj, 3));
        kv("energy_pj", fj_to_pj_string(self.energy_fj, 1));
        s
    }
}
