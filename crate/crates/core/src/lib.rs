//! Look-up-table in-loop filtering.
//!
//! A small filter over four pixels (the target and three references) is
//! cached into a clipped 4D table sampled at 17 points per axis and retrieved
//! with 4-simplex interpolation. Several reference patterns per stage, a
//! rotation ensemble and two cascaded stages widen the reference range while
//! storage grows only linearly with the number of tables.
//!
//! - [`lut`]: tables, pattern geometry, presets and storage arithmetic
//! - [`interp`]: MSB/LSB split and simplex interpolation
//! - [`transfer`]: caching a filter oracle into tables
//! - [`pipeline`]: whole-plane two-stage filtering
//! - [`rdo`]: CTU-level on/off decision and usage statistics
//! - [`cost`]: operation counts, kMACs and energy
//! - [`io`]: file formats

pub mod cost;
pub mod error;
pub mod interp;
pub mod io;
pub mod lut;
pub mod pipeline;
pub mod plane;
pub mod rdo;
pub mod transfer;

pub use error::{Error, Result};
pub use lut::{ClippedLut, LatticeGrid, LutSet, PatternGeometry, PipelinePreset, PresetName, StageSpec};
pub use plane::PlaneU8;
