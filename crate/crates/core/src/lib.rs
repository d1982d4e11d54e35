//! Time-frequency localization operators on weighted modulation spaces.

pub mod error;
pub mod gabor;
pub mod grid;
pub mod harness;
pub mod io;
pub mod locop;
pub mod norms;
pub mod signals;
pub mod symbol_stft;
pub mod transforms;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{Grid, PhaseSpaceFunction, SampledSignal};
pub use num_complex::Complex64;
pub use weights::{OmegaKind, PhaseWeight, WeightComponent, WeightFunction, WeightSpec};
pub use norms::{Exponent, M01Profile, MixedNormParams};
pub use locop::{LocOpMatrix, SymbolKind, SymbolSpec};
pub use gabor::{GaborCoefficients, GaborSystem};
