//! Target construction and filter design for the supporting-source method
//! and the regularized inverse baseline.

mod filter;
mod target;

pub use filter::{
    average_power_response, design_supporting_filter, design_traditional_inverse, CompensationFilter, DesignConfig,
    DesignMetadata, FilterKind,
};
pub use target::{
    apply_target_constraints, build_target, optimize_target_gain, reference_level_db, DeficitProfile,
    PrecedenceThreshold, TargetMode, TargetSpec, GAIN_SEARCH_RANGE_DB,
};
