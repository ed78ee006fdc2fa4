pub mod audio;
pub mod autoencoder;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod pipeline;
pub mod schema;
pub mod seed;
pub mod selection;
pub mod svm;
pub mod synth;
pub mod temporal;

pub use error::{Error, ErrorKind, Result};
