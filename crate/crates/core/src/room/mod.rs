//! Shoebox room simulation for desk-scale verification of compensation
//! designs.

mod directivity;
mod image_source;
mod spec;

pub use directivity::{directivity_gain, emission_angle_deg};
pub use image_source::{simulate_components, simulate_rir, RirComponents, SYNTHESIS_BANDS_HZ};
pub use spec::{distance, Directivity, ReceiverSpec, RoomSpec, SourceSpec, SurfaceAbsorption, ABSORPTION_BANDS_HZ};
