//! Command-line front end for the urban coverage simulator: single runs,
//! experiment grids, world generation and SVG rendering.

pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod render;
pub mod summary;

pub use error::{CliError, Result};
