//! Composite responses of the compensated systems.

mod precedence;
mod system;

pub use precedence::{verify_precedence_margin, BandMargin, PrecedenceReport};
pub use system::{
    compute_supporting_delay_samples, render_proposed, render_supporting_contribution, render_traditional, SystemLayout,
};
