//! Numerical tolerances shared by every check in the crate.
//!
//! Each invariant cites one of these constants instead of a literal.

/// Tolerance record. [`TOL`] holds the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Margin on eigenvalue bracketing of the ellipticity bounds.
    pub eigen_margin: f64,
    /// Allowed symmetry defect `|a_lj - a_jl|`.
    pub symmetry: f64,
    /// Relative error of algebraic identities (square roots, symbol rewrites).
    pub identity_rel: f64,
    /// Relative error of factorizations and closed forms vs brute force.
    pub closed_form_rel: f64,
    /// Slack on the lower bound for `A`.
    pub a_lower_bound: f64,
    /// Relative size of `|p|` on a constructed null point.
    pub null_residual: f64,
    /// Relative imaginary residue allowed in the pseudoconvexity form.
    pub q_imag_rel: f64,
    /// Largest `2 tau osc(w)` accepted before weights lose all precision.
    pub log_budget: f64,
}

pub const TOL: Tolerances = Tolerances {
    eigen_margin: 1e-10,
    symmetry: 1e-12,
    identity_rel: 1e-12,
    closed_form_rel: 1e-10,
    a_lower_bound: 1e-10,
    null_residual: 1e-10,
    q_imag_rel: 1e-12,
    log_budget: 700.0,
};
