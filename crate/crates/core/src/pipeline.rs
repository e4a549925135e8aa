//! Whole-plane LUT filtering.
//!
//! Per pixel and pattern, the four rotated copies of the pattern are
//! retrieved and averaged (`(ΣV + 2) / 4`). Patterns of a stage are then
//! combined with fixed-point weights (`(Σ w·e + 128) / 256`). Stage 2 indexes
//! its LUTs with the 8-bit output plane of stage 1.
//!
//! Borders use replicate padding. Together with the single rounding point of
//! the rotation ensemble this makes the filter commute with 90° rotations of
//! the input plane.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::interp_4d;
use crate::lut::{ClippedLut, LutSet, Offset, PatternGeometry, PipelinePreset, StageSpec, LUT_DIMS};
use crate::plane::PlaneU8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    #[inline]
    pub fn apply(self, o: Offset) -> Offset {
        let quarter = |o: Offset| Offset::new(o.dx, -o.dy);
        match self {
            Rotation::R0 => o,
            Rotation::R90 => quarter(o),
            Rotation::R180 => quarter(quarter(o)),
            Rotation::R270 => quarter(quarter(quarter(o))),
        }
    }

    pub fn apply_all(self, offsets: &[Offset; LUT_DIMS]) -> [Offset; LUT_DIMS] {
        offsets.map(|o| self.apply(o))
    }
}

#[inline]
fn gather_offsets(plane: &PlaneU8, x: usize, y: usize, offsets: &[Offset; LUT_DIMS]) -> [u8; LUT_DIMS] {
    offsets.map(|o| plane.get_clamped(x as isize + o.dx as isize, y as isize + o.dy as isize))
}

/// The four samples addressed by `pattern` rotated by `rotation` around `(x, y)`.
pub fn gather(plane: &PlaneU8, x: usize, y: usize, pattern: &PatternGeometry, rotation: Rotation) -> [u8; LUT_DIMS] {
    gather_offsets(plane, x, y, &rotation.apply_all(pattern.offsets()))
}

/// Rounded mean of four retrievals, one per rotation.
#[inline]
pub fn ensemble_mean(v: [u8; 4]) -> u8 {
    ((v.iter().map(|&x| x as u32).sum::<u32>() + 2) / 4) as u8
}

/// A stage resolved against its LUTs with pre-rotated offsets.
struct StageKernel<'a> {
    taps: Vec<([[Offset; LUT_DIMS]; 4], &'a ClippedLut, u32)>,
    scale: u32,
}

impl<'a> StageKernel<'a> {
    fn new(stage: &StageSpec, stage_index: u8, luts: &'a LutSet) -> Result<Self> {
        let taps = stage
            .patterns()
            .iter()
            .zip(stage.weights())
            .map(|(p, &w)| {
                let lut = luts.get(stage_index, p.id()).ok_or(Error::MissingLut {
                    stage: stage_index,
                    pattern: p.id(),
                })?;
                Ok((Rotation::ALL.map(|r| r.apply_all(p.offsets())), lut, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            taps,
            scale: stage.weight_scale(),
        })
    }

    #[inline]
    fn pixel(&self, plane: &PlaneU8, x: usize, y: usize) -> u8 {
        let mut acc = 0u32;
        for (rotated, lut, w) in &self.taps {
            let mut sum = 0u32;
            for offsets in rotated {
                sum += interp_4d(lut, gather_offsets(plane, x, y, offsets)) as u32;
            }
            acc += w * ((sum + 2) / 4);
        }
        ((acc + self.scale / 2) / self.scale).min(255) as u8
    }

    fn plane(&self, plane: &PlaneU8) -> PlaneU8 {
        let w = plane.width();
        let mut out = vec![0u8; w * plane.height()];
        out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, v) in row.iter_mut().enumerate() {
                *v = self.pixel(plane, x, y);
            }
        });
        PlaneU8::new(w, plane.height(), out).expect("same shape as input")
    }
}

/// Output of one stage at a single pixel.
pub fn filter_pixel_stage(
    plane: &PlaneU8,
    x: usize,
    y: usize,
    stage: &StageSpec,
    stage_index: u8,
    luts: &LutSet,
) -> Result<u8> {
    Ok(StageKernel::new(stage, stage_index, luts)?.pixel(plane, x, y))
}

/// Applies one stage to every pixel of `plane`.
pub fn filter_stage(plane: &PlaneU8, stage: &StageSpec, stage_index: u8, luts: &LutSet) -> Result<PlaneU8> {
    Ok(StageKernel::new(stage, stage_index, luts)?.plane(plane))
}

fn check_matches(preset: &PipelinePreset, luts: &LutSet) -> Result<()> {
    if preset.lut_keys() != luts.preset().lut_keys() {
        return Err(Error::PresetMismatch(format!(
            "preset {} expects LUTs {:?}, set holds {:?}",
            preset.name(),
            preset.lut_keys(),
            luts.preset().lut_keys()
        )));
    }
    Ok(())
}

/// Runs both cascaded stages; the output has the input's dimensions.
pub fn filter_plane(plane: &PlaneU8, preset: &PipelinePreset, luts: &LutSet) -> Result<PlaneU8> {
    check_matches(preset, luts)?;
    let [s1, s2] = preset.stages();
    let k1 = StageKernel::new(s1, 1, luts)?;
    let k2 = StageKernel::new(s2, 2, luts)?;
    let intermediate = k1.plane(plane);
    Ok(k2.plane(&intermediate))
}

/// [`filter_plane`] with the preset stored in the set.
pub fn filter_with(plane: &PlaneU8, luts: &LutSet) -> Result<PlaneU8> {
    filter_plane(plane, luts.preset(), luts)
}
