//! Pipeline driver behind the `trop` binary: run configuration, stage
//! artifacts and SVG figures.

pub mod artifacts;
pub mod config;
pub mod pipeline;
pub mod render;
pub mod verify;
