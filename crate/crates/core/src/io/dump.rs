//! Raw per-table value dumps, as exported by the trainer.
//!
//! ```text
//! magic "LILD" | version u16 LE (=1) | stage u8 | pattern_id u8 | 83521 value bytes
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lut::{ClippedLut, LatticeGrid, LutSet, PipelinePreset};

pub const DUMP_MAGIC: &[u8; 4] = b"LILD";
pub const DUMP_VERSION: u16 = 1;
pub const DUMP_HEADER_LEN: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueDump {
    pub stage: u8,
    pub pattern_id: u8,
    pub values: Vec<u8>,
}

pub fn encode_dump(dump: &ValueDump) -> Vec<u8> {
    let mut out = Vec::with_capacity(DUMP_HEADER_LEN + dump.values.len());
    out.extend_from_slice(DUMP_MAGIC);
    out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    out.push(dump.stage);
    out.push(dump.pattern_id);
    out.extend_from_slice(&dump.values);
    out
}

pub fn decode_dump(data: &[u8]) -> Result<ValueDump> {
    if data.len() < DUMP_HEADER_LEN {
        return Err(Error::Truncated("dump header".into()));
    }
    if &data[..4] != DUMP_MAGIC {
        return Err(Error::Format("bad dump magic (expected LILD)".into()));
    }
    let version = u16::from_le_bytes([data[4], data[5]]);
    if version != DUMP_VERSION {
        return Err(Error::Format(format!("unsupported dump version {version}")));
    }
    let values = &data[DUMP_HEADER_LEN..];
    let expected = LatticeGrid::STANDARD.table_len();
    if values.len() != expected {
        return Err(Error::Format(format!("dump holds {} values, expected {expected}", values.len())));
    }
    Ok(ValueDump {
        stage: data[6],
        pattern_id: data[7],
        values: values.to_vec(),
    })
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<ValueDump> {
    decode_dump(&fs::read(path)?)
}

pub fn write_dump(path: impl AsRef<Path>, dump: &ValueDump) -> Result<()> {
    fs::write(path, encode_dump(dump))?;
    Ok(())
}

/// Assembles a LUT set from one dump per (stage, pattern) of `preset`.
pub fn lutset_from_dumps(preset: PipelinePreset, qp: i32, dumps: Vec<ValueDump>) -> Result<LutSet> {
    let luts = dumps
        .into_iter()
        .map(|d| ClippedLut::new(LatticeGrid::STANDARD, d.values, d.pattern_id, d.stage, qp))
        .collect::<Result<Vec<_>>>()?;
    LutSet::new(preset, qp, luts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::{preset, PresetName};

    fn dump(stage: u8, pattern_id: u8) -> ValueDump {
        ValueDump {
            stage,
            pattern_id,
            values: (0..83521).map(|i| (i % 251) as u8).collect(),
        }
    }

    #[test]
    fn round_trip() {
        let d = dump(2, 3);
        let bytes = encode_dump(&d);
        assert_eq!(bytes.len(), 8 + 83521);
        assert_eq!(decode_dump(&bytes).unwrap(), d);
    }

    #[test]
    fn rejects_bad_dumps() {
        let bytes = encode_dump(&dump(1, 1));
        assert!(decode_dump(&bytes[..100]).is_err());
        assert!(decode_dump(&bytes[..4]).is_err());
        let mut m = bytes.clone();
        m[3] = b'F';
        assert!(decode_dump(&m).is_err());
    }

    #[test]
    fn assembles_sets() {
        let p = preset(PresetName::U).unwrap();
        let set = lutset_from_dumps(p.clone(), 27, vec![dump(1, 1), dump(2, 1)]).unwrap();
        assert_eq!(set.get(2, 1).unwrap().values()[300], (300 % 251) as u8);
        assert!(lutset_from_dumps(p, 27, vec![dump(1, 1)]).is_err());
    }
}
