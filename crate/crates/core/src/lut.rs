//! LUT containers, reference-pixel patterns and pipeline presets.
//!
//! A [`ClippedLut`] stores filter outputs only at the sampled lattice
//! `[0, 16, ..., 240, 255]` in each of its four input dimensions, which
//! brings a 4D table from 256⁴ entries down to 17⁴ = 83521 bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of input dimensions of every LUT (target pixel plus three references).
pub const LUT_DIMS: usize = 4;

/// Sampling of an 8-bit (or reduced-depth) input axis into MSB lattice bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeGrid {
    msb_bits: u8,
    lsb_bits: u8,
}

impl LatticeGrid {
    /// 4 MSBs index the lattice, 4 LSBs drive interpolation: 17 bins per dimension.
    pub const STANDARD: LatticeGrid = LatticeGrid {
        msb_bits: 4,
        lsb_bits: 4,
    };

    pub fn new(msb_bits: u8, lsb_bits: u8) -> Result<Self> {
        if msb_bits == 0 || lsb_bits == 0 || msb_bits + lsb_bits > 8 {
            return Err(Error::Grid(format!(
                "msb_bits={msb_bits}, lsb_bits={lsb_bits}; need both >= 1 and sum <= 8"
            )));
        }
        Ok(Self { msb_bits, lsb_bits })
    }

    #[inline]
    pub fn msb_bits(&self) -> u8 {
        self.msb_bits
    }

    #[inline]
    pub fn lsb_bits(&self) -> u8 {
        self.lsb_bits
    }

    /// Total input bit depth.
    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.msb_bits + self.lsb_bits
    }

    #[inline]
    pub fn bins_per_dim(&self) -> usize {
        (1usize << self.msb_bits) + 1
    }

    /// Sampling interval `W`; interpolation weights of one cell sum to it.
    #[inline]
    pub fn interval(&self) -> u32 {
        1 << self.lsb_bits
    }

    /// Largest representable input (and output) sample.
    #[inline]
    pub fn max_sample(&self) -> u8 {
        ((1u16 << self.bit_depth()) - 1) as u8
    }

    #[inline]
    pub fn table_len(&self) -> usize {
        self.bins_per_dim().pow(LUT_DIMS as u32)
    }

    /// Input sample represented by lattice bin `bin`: `min(W * bin, max)`.
    pub fn lattice_value(&self, bin: usize) -> Result<u8> {
        let max = self.bins_per_dim() - 1;
        if bin > max {
            return Err(Error::BinOutOfRange { index: bin, max });
        }
        Ok((bin as u32 * self.interval()).min(self.max_sample() as u32) as u8)
    }

    /// Row-major table index of a bin tuple, first dimension outermost.
    #[inline]
    pub fn index(&self, bins: [usize; LUT_DIMS]) -> usize {
        let n = self.bins_per_dim();
        ((bins[0] * n + bins[1]) * n + bins[2]) * n + bins[3]
    }

    /// Inverse of [`LatticeGrid::index`].
    pub fn bins_of(&self, mut index: usize) -> [usize; LUT_DIMS] {
        let n = self.bins_per_dim();
        let mut bins = [0; LUT_DIMS];
        for b in bins.iter_mut().rev() {
            *b = index % n;
            index /= n;
        }
        bins
    }

    /// Table stride of each dimension.
    #[inline]
    pub fn strides(&self) -> [usize; LUT_DIMS] {
        let n = self.bins_per_dim();
        [n * n * n, n * n, n, 1]
    }
}

impl Default for LatticeGrid {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Lattice value of bin `bin` on the standard 17-bin grid.
pub fn lattice_value(bin: usize) -> Result<u8> {
    LatticeGrid::STANDARD.lattice_value(bin)
}

/// A sampled 4D table of 8-bit output samples for one (pattern, stage, QP).
#[derive(Clone, PartialEq, Eq)]
pub struct ClippedLut {
    grid: LatticeGrid,
    values: Vec<u8>,
    pattern_id: u8,
    stage: u8,
    qp: i32,
}

impl ClippedLut {
    pub fn new(grid: LatticeGrid, values: Vec<u8>, pattern_id: u8, stage: u8, qp: i32) -> Result<Self> {
        if values.len() != grid.table_len() {
            return Err(Error::Lut(format!(
                "expected {} values, got {}",
                grid.table_len(),
                values.len()
            )));
        }
        if !(1..=2).contains(&stage) {
            return Err(Error::Lut(format!("stage index {stage} not in 1..=2")));
        }
        let max = grid.max_sample();
        if let Some(v) = values.iter().find(|&&v| v > max) {
            return Err(Error::Lut(format!("value {v} exceeds grid maximum {max}")));
        }
        Ok(Self {
            grid,
            values,
            pattern_id,
            stage,
            qp,
        })
    }

    /// Build a table by evaluating `f` at every bin tuple.
    pub fn from_bins_fn<F>(grid: LatticeGrid, pattern_id: u8, stage: u8, qp: i32, mut f: F) -> Result<Self>
    where
        F: FnMut([usize; LUT_DIMS]) -> u8,
    {
        let values = (0..grid.table_len()).map(|i| f(grid.bins_of(i))).collect();
        Self::new(grid, values, pattern_id, stage, qp)
    }

    #[inline]
    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn pattern_id(&self) -> u8 {
        self.pattern_id
    }

    #[inline]
    pub fn stage(&self) -> u8 {
        self.stage
    }

    #[inline]
    pub fn qp(&self) -> i32 {
        self.qp
    }

    #[inline]
    pub fn get(&self, bins: [usize; LUT_DIMS]) -> u8 {
        self.values[self.grid.index(bins)]
    }

    /// Storage of the value payload in bytes (one byte per entry).
    #[inline]
    pub fn storage_bytes(&self) -> usize {
        self.values.len()
    }
}

impl fmt::Debug for ClippedLut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClippedLut")
            .field("grid", &self.grid)
            .field("pattern_id", &self.pattern_id)
            .field("stage", &self.stage)
            .field("qp", &self.qp)
            .field("len", &self.values.len())
            .finish()
    }
}

/// Spatial displacement of a reference pixel relative to the target pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Offset {
    pub dy: i8,
    pub dx: i8,
}

impl Offset {
    pub const ORIGIN: Offset = Offset { dy: 0, dx: 0 };

    pub const fn new(dy: i8, dx: i8) -> Self {
        Self { dy, dx }
    }

    /// Chebyshev distance from the target pixel.
    #[inline]
    pub fn reach(&self) -> u8 {
        self.dy.unsigned_abs().max(self.dx.unsigned_abs())
    }
}

/// Largest offset magnitude a pattern may use (keeps a stage inside 7×7).
pub const MAX_PATTERN_REACH: u8 = 3;

/// Four pixel offsets addressing one 4D LUT; the first is always the target pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatternGeometry {
    id: u8,
    offsets: [Offset; LUT_DIMS],
}

impl PatternGeometry {
    pub fn new(id: u8, offsets: [Offset; LUT_DIMS]) -> Result<Self> {
        if id == 0 {
            return Err(Error::Pattern("pattern id must be >= 1".into()));
        }
        if offsets[0] != Offset::ORIGIN {
            return Err(Error::Pattern(format!(
                "pattern {id}: first offset must be (0,0), got ({},{})",
                offsets[0].dy, offsets[0].dx
            )));
        }
        for i in 0..LUT_DIMS {
            if offsets[i].reach() > MAX_PATTERN_REACH {
                return Err(Error::Pattern(format!(
                    "pattern {id}: offset ({},{}) exceeds reach {MAX_PATTERN_REACH}",
                    offsets[i].dy, offsets[i].dx
                )));
            }
            for j in 0..i {
                if offsets[i] == offsets[j] {
                    return Err(Error::Pattern(format!(
                        "pattern {id}: duplicate offset ({},{})",
                        offsets[i].dy, offsets[i].dx
                    )));
                }
            }
        }
        Ok(Self { id, offsets })
    }

    /// Built-in geometry for pattern ids 1 through 7.
    pub fn builtin(id: u8) -> Result<Self> {
        let o = |dy, dx| Offset::new(dy, dx);
        let offsets = match id {
            // I0 I1 / I4 I5 on a stride-4 window
            1 => [o(0, 0), o(0, 1), o(1, 0), o(1, 1)],
            // I0 I2 / I8 I10: the 2×2 kernel dilated by 2
            2 => [o(0, 0), o(0, 2), o(2, 0), o(2, 2)],
            3 => [o(0, 0), o(1, 1), o(1, 2), o(2, 1)],
            4 => [o(0, 0), o(0, 3), o(3, 0), o(3, 3)],
            5 => [o(0, 0), o(1, 3), o(3, 1), o(3, 3)],
            6 => [o(0, 0), o(2, 3), o(3, 2), o(2, 2)],
            7 => [o(0, 0), o(0, 2), o(3, 0), o(1, 3)],
            _ => return Err(Error::Pattern(format!("no built-in pattern {id}"))),
        };
        Self::new(id, offsets)
    }

    #[inline]
    pub fn id(&self) -> u8 {
        self.id
    }

    #[inline]
    pub fn offsets(&self) -> &[Offset; LUT_DIMS] {
        &self.offsets
    }

    pub fn reach(&self) -> u8 {
        self.offsets.iter().map(Offset::reach).max().unwrap_or(0)
    }
}

/// Denominator of fixed-point pattern weights.
pub const WEIGHT_SCALE: u32 = 256;

/// One cascade stage: parallel patterns combined by fixed-point weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSpec {
    patterns: Vec<PatternGeometry>,
    weights: Vec<u32>,
}

impl StageSpec {
    /// Uniform weights over `patterns`.
    pub fn uniform(patterns: Vec<PatternGeometry>) -> Result<Self> {
        let raw = vec![1u32; patterns.len()];
        Self::with_weights(patterns, &raw)
    }

    /// Raw non-negative weights are renormalized so they sum to [`WEIGHT_SCALE`].
    pub fn with_weights(patterns: Vec<PatternGeometry>, raw_weights: &[u32]) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::Stage("stage has no patterns".into()));
        }
        if raw_weights.len() != patterns.len() {
            return Err(Error::Stage(format!(
                "{} weights for {} patterns",
                raw_weights.len(),
                patterns.len()
            )));
        }
        for (i, p) in patterns.iter().enumerate() {
            if patterns[..i].iter().any(|q| q.id() == p.id()) {
                return Err(Error::Stage(format!("duplicate pattern id {}", p.id())));
            }
        }
        let weights = renormalize_weights(raw_weights, WEIGHT_SCALE)?;
        Ok(Self { patterns, weights })
    }

    #[inline]
    pub fn patterns(&self) -> &[PatternGeometry] {
        &self.patterns
    }

    #[inline]
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    #[inline]
    pub fn weight_scale(&self) -> u32 {
        WEIGHT_SCALE
    }

    /// Largest offset magnitude over all patterns of the stage.
    pub fn reach(&self) -> u8 {
        self.patterns.iter().map(PatternGeometry::reach).max().unwrap_or(0)
    }
}

/// Scale `raw` to integers summing exactly to `scale` (largest remainder,
/// ties to the lower index).
pub fn renormalize_weights(raw: &[u32], scale: u32) -> Result<Vec<u32>> {
    let total: u64 = raw.iter().map(|&w| w as u64).sum();
    if total == 0 {
        return Err(Error::Stage("weights sum to zero".into()));
    }
    let scale = scale as u64;
    let mut out: Vec<u32> = Vec::with_capacity(raw.len());
    let mut rems: Vec<(u64, usize)> = Vec::with_capacity(raw.len());
    for (i, &w) in raw.iter().enumerate() {
        let num = w as u64 * scale;
        out.push((num / total) as u32);
        rems.push((num % total, i));
    }
    let assigned: u64 = out.iter().map(|&w| w as u64).sum();
    let mut missing = scale - assigned;
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in &rems {
        if missing == 0 {
            break;
        }
        out[i] += 1;
        missing -= 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PresetName {
    /// Ultrafast: one pattern per stage.
    U,
    /// Very fast: patterns 1-3.
    V,
    /// Fast: patterns 1-7.
    F,
    Custom,
}

impl PresetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::U => "U",
            PresetName::V => "V",
            PresetName::F => "F",
            PresetName::Custom => "custom",
        }
    }

    /// Number of built-in patterns per stage.
    fn pattern_count(&self) -> Option<u8> {
        match self {
            PresetName::U => Some(1),
            PresetName::V => Some(3),
            PresetName::F => Some(7),
            PresetName::Custom => None,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(PresetName::U),
            "V" | "v" => Ok(PresetName::V),
            "F" | "f" => Ok(PresetName::F),
            "custom" => Ok(PresetName::Custom),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Number of cascaded stages in every pipeline.
pub const STAGE_COUNT: usize = 2;

/// Two cascaded stages of patterns; stage 2 re-indexes stage-1 output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelinePreset {
    name: PresetName,
    stages: [StageSpec; STAGE_COUNT],
}

impl PipelinePreset {
    pub fn new(name: PresetName, stages: [StageSpec; STAGE_COUNT]) -> Self {
        Self { name, stages }
    }

    #[inline]
    pub fn name(&self) -> PresetName {
        self.name
    }

    #[inline]
    pub fn stages(&self) -> &[StageSpec; STAGE_COUNT] {
        &self.stages
    }

    /// Stage by 1-based index.
    pub fn stage(&self, index: u8) -> Option<&StageSpec> {
        match index {
            1 | 2 => Some(&self.stages[index as usize - 1]),
            _ => None,
        }
    }

    pub fn lut_count(&self) -> usize {
        self.stages.iter().map(|s| s.patterns().len()).sum()
    }

    /// Side of the square window that can influence one output pixel after
    /// both stages (rotation ensemble included).
    pub fn effective_range(&self) -> usize {
        let reach: usize = self.stages.iter().map(|s| s.reach() as usize).sum();
        2 * reach + 1
    }

    /// `(stage, pattern)` pairs in canonical order.
    pub fn lut_keys(&self) -> Vec<(u8, u8)> {
        self.stages
            .iter()
            .enumerate()
            .flat_map(|(si, s)| s.patterns().iter().map(move |p| (si as u8 + 1, p.id())))
            .collect()
    }
}

/// Built-in preset with default geometries and uniform weights.
pub fn preset(name: PresetName) -> Result<PipelinePreset> {
    let count = name
        .pattern_count()
        .ok_or_else(|| Error::UnknownPreset(name.as_str().to_string()))?;
    let patterns = (1..=count)
        .map(PatternGeometry::builtin)
        .collect::<Result<Vec<_>>>()?;
    let stage = StageSpec::uniform(patterns)?;
    Ok(PipelinePreset::new(name, [stage.clone(), stage]))
}

/// Value-payload bytes of every LUT the preset needs.
pub fn storage_bytes(preset: &PipelinePreset) -> usize {
    preset.lut_count() * LatticeGrid::STANDARD.table_len()
}

/// One LUT per (stage, pattern) of a preset, all trained for the same QP.
#[derive(Clone, Debug)]
pub struct LutSet {
    preset: PipelinePreset,
    qp: i32,
    luts: BTreeMap<(u8, u8), ClippedLut>,
}

impl LutSet {
    pub fn new(preset: PipelinePreset, qp: i32, luts: Vec<ClippedLut>) -> Result<Self> {
        let keys = preset.lut_keys();
        if luts.len() != keys.len() {
            return Err(Error::PresetMismatch(format!(
                "preset needs {} LUTs, got {}",
                keys.len(),
                luts.len()
            )));
        }
        let grid = luts[0].grid();
        let mut map = BTreeMap::new();
        for lut in luts {
            if lut.grid() != grid {
                return Err(Error::PresetMismatch("LUTs use different lattice grids".into()));
            }
            let key = (lut.stage(), lut.pattern_id());
            if !keys.contains(&key) {
                return Err(Error::PresetMismatch(format!(
                    "LUT for stage {}, pattern {} is not part of the preset",
                    key.0, key.1
                )));
            }
            if map.insert(key, lut).is_some() {
                return Err(Error::PresetMismatch(format!(
                    "duplicate LUT for stage {}, pattern {}",
                    key.0, key.1
                )));
            }
        }
        Ok(Self {
            preset,
            qp,
            luts: map,
        })
    }

    /// Builds every table of `preset` with `f(stage, pattern)`.
    pub fn build<F>(preset: PipelinePreset, qp: i32, mut f: F) -> Result<Self>
    where
        F: FnMut(u8, &PatternGeometry) -> Result<ClippedLut>,
    {
        let mut luts = Vec::with_capacity(preset.lut_count());
        for (si, stage) in preset.stages().iter().enumerate() {
            for p in stage.patterns() {
                luts.push(f(si as u8 + 1, p)?);
            }
        }
        Self::new(preset, qp, luts)
    }

    #[inline]
    pub fn preset(&self) -> &PipelinePreset {
        &self.preset
    }

    #[inline]
    pub fn qp(&self) -> i32 {
        self.qp
    }

    pub fn grid(&self) -> LatticeGrid {
        self.luts.values().next().map(|l| l.grid()).unwrap_or_default()
    }

    pub fn get(&self, stage: u8, pattern: u8) -> Option<&ClippedLut> {
        self.luts.get(&(stage, pattern))
    }

    /// LUTs in canonical (stage, pattern-order-in-stage) order.
    pub fn luts(&self) -> impl Iterator<Item = &ClippedLut> {
        self.preset
            .lut_keys()
            .into_iter()
            .filter_map(move |k| self.luts.get(&k))
    }

    pub fn len(&self) -> usize {
        self.luts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.luts.is_empty()
    }

    pub fn storage_bytes(&self) -> usize {
        self.luts.values().map(ClippedLut::storage_bytes).sum()
    }
}
