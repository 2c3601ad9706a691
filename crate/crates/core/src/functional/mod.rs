//! B-spline smoothing of curves with a block-structured Gaussian graphical
//! model on the spline coefficients.
//!
//! Each curve `y_t` (on a shared grid) is modelled as `Ω β_t + ε_t` with
//! `ε_t ~ N(0, τ² I)`, `β_t ~ N(μ, K⁻¹)`, `μ ~ N(0, σ² I)`,
//! `τ² ~ InvGamma(a, b)` and `(K, G)` from the block graph prior. All
//! conditionals except the one for `(K, G)` are conjugate:
//!
//! ```text
//! β_t | ·  ~ N(Q⁻¹(Ωᵀy_t/τ² + Kμ), Q⁻¹),        Q = ΩᵀΩ/τ² + K
//! μ   | ·  ~ N(Q⁻¹(T K β̄), Q⁻¹),                Q = T K + I/σ²
//! τ²  | ·  ~ InvGamma(a + rT/2, b + ½ Σ_t ‖y_t − Ωβ_t‖²)
//! ```
//!
//! and `(K, G)` takes one block double reversible jump step with
//! `U = Σ_t (β_t − μ)(β_t − μ)ᵀ` and `n = T`.

mod bspline;
mod gibbs;

pub use bspline::{bspline_design, clamped_knots, ORDER};
pub use gibbs::{
    beta_conditional, beta_conditional_mean, functional_gibbs_step, smooth, FunctionalDataset,
    FunctionalModel, FunctionalState, SmootherConfig, SmoothingResult,
};
