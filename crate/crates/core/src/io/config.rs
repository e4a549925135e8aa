//! Plain `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! preset = V
//! qp = 32
//! ctu_size = 64
//! lambda = 12.5
//! flag_bits_on = 1
//! flag_bits_off = 1
//! input = recon.pgm
//! output = filtered.pgm
//! original = orig.pgm
//! luts = v_qp32.lut
//! pattern.3 = 0,0 1,1 1,2 2,1     # four dy,dx pairs, first must be 0,0
//! weights.1 = 120,80,56           # raw per-pattern weights of stage 1
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lut::{Offset, PatternGeometry, PipelinePreset, PresetName, StageSpec, LUT_DIMS};
use crate::rdo::RdoConfig;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub preset: Option<PresetName>,
    pub qp: Option<i32>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub original: Option<PathBuf>,
    pub luts: Option<PathBuf>,
    pub ctu_size: Option<usize>,
    pub lambda: Option<f64>,
    pub flag_bits_on: Option<f64>,
    pub flag_bits_off: Option<f64>,
    pub patterns: BTreeMap<u8, PatternGeometry>,
    pub weights: BTreeMap<u8, Vec<u32>>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: invalid value {value:?} for `{key}`")))
}

fn parse_path(key: &str, value: &str, line: usize) -> Result<PathBuf> {
    if value.is_empty() {
        return Err(Error::Config(format!("line {line}: empty path for `{key}`")));
    }
    Ok(PathBuf::from(value))
}

fn parse_offsets(value: &str, line: usize) -> Result<[Offset; LUT_DIMS]> {
    let pairs: Vec<&str> = value
        .split(|c: char| c.is_whitespace() || c == ';')
        .filter(|s| !s.is_empty())
        .collect();
    if pairs.len() != LUT_DIMS {
        return Err(Error::Config(format!(
            "line {line}: expected {LUT_DIMS} dy,dx pairs, got {}",
            pairs.len()
        )));
    }
    let mut out = [Offset::ORIGIN; LUT_DIMS];
    for (o, pair) in out.iter_mut().zip(pairs) {
        let (dy, dx) = pair
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("line {line}: bad pair {pair:?}")))?;
        *o = Offset::new(
            parse_value("dy", dy.trim(), line)?,
            parse_value("dx", dx.trim(), line)?,
        );
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "preset" => cfg.preset = Some(value.parse()?),
                "qp" => cfg.qp = Some(parse_value(key, value, line)?),
                "input" => cfg.input = Some(parse_path(key, value, line)?),
                "output" => cfg.output = Some(parse_path(key, value, line)?),
                "original" => cfg.original = Some(parse_path(key, value, line)?),
                "luts" => cfg.luts = Some(parse_path(key, value, line)?),
                "ctu_size" => cfg.ctu_size = Some(parse_value(key, value, line)?),
                "lambda" => cfg.lambda = Some(parse_value(key, value, line)?),
                "flag_bits_on" => cfg.flag_bits_on = Some(parse_value(key, value, line)?),
                "flag_bits_off" => cfg.flag_bits_off = Some(parse_value(key, value, line)?),
                _ => {
                    if let Some(id) = key.strip_prefix("pattern.") {
                        let id: u8 = parse_value(key, id, line)?;
                        let geometry = PatternGeometry::new(id, parse_offsets(value, line)?)?;
                        cfg.patterns.insert(id, geometry);
                    } else if let Some(stage) = key.strip_prefix("weights.") {
                        let stage: u8 = parse_value(key, stage, line)?;
                        if !(1..=2).contains(&stage) {
                            return Err(Error::Config(format!("line {line}: stage {stage} not in 1..=2")));
                        }
                        let w = value
                            .split(',')
                            .map(|s| parse_value(key, s.trim(), line))
                            .collect::<Result<Vec<u32>>>()?;
                        cfg.weights.insert(stage, w);
                    } else {
                        return Err(Error::Config(format!("line {line}: unknown key `{key}`")));
                    }
                }
            }
        }
        if let Some(0) = cfg.ctu_size {
            return Err(Error::Config("ctu_size must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Applies geometry and weight overrides. Geometry overrides turn the
    /// preset into a custom one.
    pub fn apply_to_preset(&self, base: &PipelinePreset) -> Result<PipelinePreset> {
        let mut geometry_changed = false;
        let mut stages = Vec::with_capacity(2);
        for (si, stage) in base.stages().iter().enumerate() {
            let stage_index = si as u8 + 1;
            let patterns: Vec<PatternGeometry> = stage
                .patterns()
                .iter()
                .map(|p| match self.patterns.get(&p.id()) {
                    Some(o) if o != p => {
                        geometry_changed = true;
                        *o
                    }
                    _ => *p,
                })
                .collect();
            let weights = match self.weights.get(&stage_index) {
                Some(w) => w.clone(),
                None => stage.weights().to_vec(),
            };
            stages.push(StageSpec::with_weights(patterns, &weights)?);
        }
        for id in self.patterns.keys() {
            if !base.stages().iter().any(|s| s.patterns().iter().any(|p| p.id() == *id)) {
                return Err(Error::Config(format!("pattern {id} is not used by preset {}", base.name())));
            }
        }
        let name = if geometry_changed { PresetName::Custom } else { base.name() };
        let [s1, s2]: [StageSpec; 2] = stages.try_into().expect("two stages");
        Ok(PipelinePreset::new(name, [s1, s2]))
    }

    /// RDO settings; λ defaults to the QP schedule when a QP is known.
    pub fn rdo(&self, fallback_qp: Option<i32>) -> RdoConfig {
        let base = match self.qp.or(fallback_qp) {
            Some(qp) => RdoConfig::for_qp(qp),
            None => RdoConfig::default(),
        };
        RdoConfig {
            ctu_size: self.ctu_size.unwrap_or(base.ctu_size),
            lambda: self.lambda.unwrap_or(base.lambda),
            flag_bits_on: self.flag_bits_on.unwrap_or(base.flag_bits_on),
            flag_bits_off: self.flag_bits_off.unwrap_or(base.flag_bits_off),
        }
    }
}
