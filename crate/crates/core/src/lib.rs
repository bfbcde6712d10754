pub mod analysis;
pub mod cli;
pub mod design;
pub mod dsp;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod render;
pub mod room;

pub use error::{Error, Result};
