//! Quantum cords: jet-valued forms, curvature, and the gauge action.

pub mod concord;
pub mod gauge;
pub mod gv;
pub mod jetform;
pub mod solve;

pub use gauge::{compose_sections, gauge, invert_section, transport_form, GaugeSection};
pub use jetform::{bracket, curvature, is_impotent, JetForm, QuantumCord};
pub use gv::{curvature_by_recursion, gv_cord, mc_cord, RecursionFactor};
pub use solve::{fiber_solve, local_trivialization, stabilizer_solve};
pub use concord::{concord_from_gauge, smoothstep, Concord};
