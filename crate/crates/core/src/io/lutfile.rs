//! Binary LUT-set container.
//!
//! All integers are little-endian.
//!
//! ```text
//! header   magic "LILF" | version u16 (=1) | preset u8 | reserved u8 | qp i32 | lut_count u32
//! record   stage u8 | pattern_id u8 | 4 × (dy i8, dx i8) | weight u16 | 83521 value bytes
//! trailer  CRC-32 (IEEE) of every record's value bytes, in record order
//! ```
//!
//! Records are grouped by stage; within a stage their order is the pattern
//! order of the preset. Values follow the table's row-major bin order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lut::{
    ClippedLut, LatticeGrid, LutSet, Offset, PatternGeometry, PipelinePreset, PresetName, StageSpec, LUT_DIMS,
};

pub const MAGIC: &[u8; 4] = b"LILF";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_OVERHEAD: usize = 12;
pub const CHECKSUM_LEN: usize = 4;

fn preset_code(name: PresetName) -> u8 {
    match name {
        PresetName::U => 0,
        PresetName::V => 1,
        PresetName::F => 2,
        PresetName::Custom => 3,
    }
}

fn preset_from_code(code: u8) -> Result<PresetName> {
    match code {
        0 => Ok(PresetName::U),
        1 => Ok(PresetName::V),
        2 => Ok(PresetName::F),
        3 => Ok(PresetName::Custom),
        other => Err(Error::Format(format!("unknown preset code {other}"))),
    }
}

/// File size of a set holding `lut_count` standard tables.
pub fn encoded_len(lut_count: usize) -> usize {
    HEADER_LEN + lut_count * (RECORD_OVERHEAD + LatticeGrid::STANDARD.table_len()) + CHECKSUM_LEN
}

pub fn encode_lutset(set: &LutSet) -> Result<Vec<u8>> {
    if set.grid() != LatticeGrid::STANDARD {
        return Err(Error::Format("only the 17-bin standard grid can be stored".into()));
    }
    let preset = set.preset();
    let mut out = Vec::with_capacity(encoded_len(set.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(preset_code(preset.name()));
    out.push(0);
    out.extend_from_slice(&set.qp().to_le_bytes());
    out.extend_from_slice(&(set.len() as u32).to_le_bytes());

    let mut crc = crc32fast::Hasher::new();
    for (si, stage) in preset.stages().iter().enumerate() {
        let stage_index = si as u8 + 1;
        for (pattern, &weight) in stage.patterns().iter().zip(stage.weights()) {
            let lut = set.get(stage_index, pattern.id()).ok_or(Error::MissingLut {
                stage: stage_index,
                pattern: pattern.id(),
            })?;
            out.push(stage_index);
            out.push(pattern.id());
            for o in pattern.offsets() {
                out.push(o.dy as u8);
                out.push(o.dx as u8);
            }
            out.extend_from_slice(&(weight as u16).to_le_bytes());
            out.extend_from_slice(lut.values());
            crc.update(lut.values());
        }
    }
    out.extend_from_slice(&crc.finalize().to_le_bytes());
    Ok(out)
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Truncated(format!(
                "{what}: need {n} bytes at offset {}, {} left",
                self.pos,
                self.data.len() - self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Header fields without the table payloads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LutFileHeader {
    pub version: u16,
    pub preset: PresetName,
    pub qp: i32,
    pub lut_count: u32,
    pub records: Vec<RecordInfo>,
    pub checksum: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordInfo {
    pub stage: u8,
    pub pattern: PatternGeometry,
    pub weight: u16,
}

struct Decoded<'a> {
    header: LutFileHeader,
    payloads: Vec<&'a [u8]>,
}

fn decode(data: &[u8]) -> Result<Decoded<'_>> {
    let mut r = Reader { data, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format("bad magic (expected LILF)".into()));
    }
    let version = r.u16("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let preset = preset_from_code(r.u8("preset")?)?;
    r.u8("reserved")?;
    let qp = r.u32("qp")? as i32;
    let lut_count = r.u32("lut count")?;
    if lut_count == 0 {
        return Err(Error::Format("file declares zero LUTs".into()));
    }

    let table_len = LatticeGrid::STANDARD.table_len();
    let mut records = Vec::new();
    let mut payloads = Vec::new();
    let mut crc = crc32fast::Hasher::new();
    for _ in 0..lut_count {
        let stage = r.u8("stage")?;
        let id = r.u8("pattern id")?;
        let raw = r.take(2 * LUT_DIMS, "offsets")?;
        let mut offsets = [Offset::ORIGIN; LUT_DIMS];
        for (k, o) in offsets.iter_mut().enumerate() {
            *o = Offset::new(raw[2 * k] as i8, raw[2 * k + 1] as i8);
        }
        let pattern = PatternGeometry::new(id, offsets)?;
        let weight = r.u16("weight")?;
        let values = r.take(table_len, "values")?;
        crc.update(values);
        records.push(RecordInfo { stage, pattern, weight });
        payloads.push(values);
    }
    let stored = r.u32("checksum")?;
    let computed = crc.finalize();
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    if r.pos != data.len() {
        return Err(Error::Format(format!("{} trailing bytes", data.len() - r.pos)));
    }
    Ok(Decoded {
        header: LutFileHeader {
            version,
            preset,
            qp,
            lut_count,
            records,
            checksum: stored,
        },
        payloads,
    })
}

pub fn decode_header(data: &[u8]) -> Result<LutFileHeader> {
    Ok(decode(data)?.header)
}

pub fn decode_lutset(data: &[u8]) -> Result<LutSet> {
    let Decoded { header, payloads } = decode(data)?;
    let mut stages: [Vec<(PatternGeometry, u32)>; 2] = [Vec::new(), Vec::new()];
    let mut last_stage = 1;
    for rec in &header.records {
        if !(1..=2).contains(&rec.stage) {
            return Err(Error::Format(format!("record stage {} not in 1..=2", rec.stage)));
        }
        if rec.stage < last_stage {
            return Err(Error::Format("records not grouped by stage".into()));
        }
        last_stage = rec.stage;
        stages[rec.stage as usize - 1].push((rec.pattern, rec.weight as u32));
    }
    let build_stage = |entries: &[(PatternGeometry, u32)]| {
        let patterns = entries.iter().map(|e| e.0).collect();
        let weights: Vec<u32> = entries.iter().map(|e| e.1).collect();
        StageSpec::with_weights(patterns, &weights).map_err(|e| Error::Format(e.to_string()))
    };
    let preset = PipelinePreset::new(header.preset, [build_stage(&stages[0])?, build_stage(&stages[1])?]);
    let luts = header
        .records
        .iter()
        .zip(payloads)
        .map(|(rec, values)| {
            ClippedLut::new(
                LatticeGrid::STANDARD,
                values.to_vec(),
                rec.pattern.id(),
                rec.stage,
                header.qp,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    LutSet::new(preset, header.qp, luts)
}

pub fn save_lutset(path: impl AsRef<Path>, set: &LutSet) -> Result<()> {
    fs::write(path, encode_lutset(set)?)?;
    Ok(())
}

pub fn load_lutset(path: impl AsRef<Path>) -> Result<LutSet> {
    decode_lutset(&fs::read(path)?)
}

pub fn read_header(path: impl AsRef<Path>) -> Result<LutFileHeader> {
    decode_header(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::preset;

    fn patterned_set(name: PresetName) -> LutSet {
        LutSet::build(preset(name).unwrap(), 32, |stage, p| {
            ClippedLut::from_bins_fn(LatticeGrid::STANDARD, p.id(), stage, 32, |b| {
                (b[0] * 7 + b[1] * 3 + b[2] + b[3] * 11 + p.id() as usize + stage as usize) as u8
            })
        })
        .unwrap()
    }

    #[test]
    fn v_file_layout() {
        let set = patterned_set(PresetName::V);
        let bytes = encode_lutset(&set).unwrap();
        assert_eq!(bytes.len(), encoded_len(6));
        assert_eq!(bytes.len(), 16 + 6 * (12 + 83521) + 4);
        assert_eq!(&bytes[..4], b"LILF");
        let h = decode_header(&bytes).unwrap();
        assert_eq!(h.preset, PresetName::V);
        assert_eq!(h.qp, 32);
        assert_eq!(h.lut_count, 6);
        assert_eq!(h.records.iter().map(|r| r.weight as u32).sum::<u32>(), 512);
    }

    #[test]
    fn round_trip_is_byte_exact() {
        for name in [PresetName::U, PresetName::V, PresetName::F] {
            let set = patterned_set(name);
            let bytes = encode_lutset(&set).unwrap();
            let back = decode_lutset(&bytes).unwrap();
            assert_eq!(back.preset(), set.preset());
            assert_eq!(encode_lutset(&back).unwrap(), bytes);
        }
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = encode_lutset(&patterned_set(PresetName::U)).unwrap();

        let mut flipped = bytes.clone();
        flipped[HEADER_LEN + RECORD_OVERHEAD + 100] ^= 0x40;
        assert!(matches!(decode_lutset(&flipped), Err(Error::Checksum { .. })));

        let mut bad_crc = bytes.clone();
        let n = bad_crc.len();
        bad_crc[n - 1] ^= 1;
        assert!(matches!(decode_lutset(&bad_crc), Err(Error::Checksum { .. })));

        assert!(matches!(decode_lutset(&bytes[..bytes.len() - 10]), Err(Error::Truncated(_))));
        assert!(matches!(decode_lutset(&bytes[..5]), Err(Error::Truncated(_))));

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode_lutset(&magic), Err(Error::Format(_))));

        let mut version = bytes.clone();
        version[4] = 2;
        assert!(matches!(decode_lutset(&version), Err(Error::Format(_))));

        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_lutset(&extra).is_err());
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        let mut bytes = encode_lutset(&patterned_set(PresetName::U)).unwrap();
        // first offset of the first record must be the origin
        bytes[HEADER_LEN + 2] = 1;
        assert!(matches!(decode_lutset(&bytes), Err(Error::Pattern(_))));
    }
}
