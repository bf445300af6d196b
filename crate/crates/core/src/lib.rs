pub mod calculus;
pub mod cech;
pub mod cohomology;
pub mod cord;
pub mod error;
pub mod holonomy;
pub mod jet;
pub mod rational;
pub mod sample;
pub mod series;

pub use error::{Error, Result};
pub use rational::Rational;
