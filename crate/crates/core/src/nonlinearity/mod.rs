//! Diffusion nonlinearities, their regularizations, and reaction terms.

mod phi;
mod reaction;
mod regularized;
mod table;

pub use phi::{PhiKind, PhiSpec, StructureReport};
pub use reaction::{CustomReaction, Partials, ReactionKind, ReactionSpec};
pub use regularized::{regularize, RegularizedPhi};
pub use table::PhiTable;

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
pub(crate) fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub(crate) fn smoothstep_slope(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}
