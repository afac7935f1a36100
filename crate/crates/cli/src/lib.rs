//! File formats, parallel runners and the command line around
//! [`sphdeconv_core`].
//!
//! - [`pointset`]: text point sets (`x y z w` per line),
//! - [`opfile`]: binary block-operator container,
//! - [`config`]: TOML fixture files,
//! - [`export`]: JSON estimates,
//! - [`tables`]: CSV results, summaries and fields,
//! - [`runner`]: rayon drivers for studies, calibrations and single estimates,
//! - [`selftest`]: quick invariant checks.

pub mod config;
pub mod export;
pub mod opfile;
pub mod pointset;
pub mod runner;
pub mod selftest;
pub mod tables;
