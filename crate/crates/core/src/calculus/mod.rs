//! Exterior calculus on coordinate charts with trig-polynomial coefficients.

pub mod chart;
pub mod form;
pub mod integrate;
pub mod maps;
pub mod positivity;
pub mod rational_field;
pub mod scalar;

pub use chart::{Chart, CoordKind, Unwrapped};
pub use form::{Form, VectorField};
pub use integrate::{integrate_path, integrate_torus, Loop, LoopComponent, PathIntegral, TwoPiMultiple};
pub use maps::{ChartMap, CoordImage};
pub use positivity::{check_positive, Positivity, SampleDomain};
pub use rational_field::RationalField;
pub use scalar::{Harmonic, ScalarField, TermKey};
