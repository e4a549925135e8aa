//! File formats: PGM planes, LUT-set containers, trainer dumps and run configs.

pub mod config;
pub mod dump;
pub mod lutfile;
pub mod pgm;

pub use config::RunConfig;
pub use dump::{lutset_from_dumps, read_dump, write_dump, ValueDump};
pub use lutfile::{load_lutset, read_header, save_lutset, LutFileHeader};
pub use pgm::{read_pgm, write_pgm};
