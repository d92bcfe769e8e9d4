//! Principal symbols of the two sides, their factorization along the normal
//! direction, and the roots of the conjugated symbols.

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::{CoefficientPair, ComplexSymmetricMatrix, DerivedConstants};
use crate::error::{Error, Result};
use crate::tolerance::TOL;
use crate::Side;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `p(zeta) = sum a_lj zeta_l zeta_j` (bilinear, no conjugation).
pub fn principal_symbol(matrix: &ComplexSymmetricMatrix, zeta: &[Complex64]) -> Result<Complex64> {
    let n = matrix.dim();
    if zeta.len() != n {
        return Err(Error::Dimension(format!("zeta has length {}, matrix has dimension {n}", zeta.len())));
    }
    Ok(bilinear(matrix.entries(), zeta))
}

pub(crate) fn bilinear(entries: &[Complex64], zeta: &[Complex64]) -> Complex64 {
    let n = zeta.len();
    let mut acc = Complex64::default();
    for l in 0..n {
        let row = &entries[l * n..(l + 1) * n];
        let s: Complex64 = row.iter().zip(zeta).map(|(a, z)| a * z).sum();
        acc += s * zeta[l];
    }
    acc
}

/// `d p / d xi_j (zeta) = 2 sum_l a_jl zeta_l`.
pub fn symbol_gradient(matrix: &ComplexSymmetricMatrix, zeta: &[Complex64]) -> Vec<Complex64> {
    let n = matrix.dim();
    (0..n)
        .map(|j| 2.0 * (0..n).map(|l| matrix.entry(j, l) * zeta[l]).sum::<Complex64>())
        .collect()
}

/// Splits `b = (A - iB)^2` with `A = Re sqrt(b) >= 0`.
///
/// For `b` a nonpositive real, `A = 0` and `B = sqrt(-b) >= 0`.
pub fn principal_sqrt(b: Complex64) -> (f64, f64) {
    if b.im == 0.0 && b.re <= 0.0 {
        return (0.0, (-b.re).sqrt());
    }
    // Reading B off the principal root equals -Im(b) / (2A) but stays
    // accurate when b sits close to the negative real axis.
    let r = b.sqrt();
    (r.re, -r.im)
}

/// Normal factorization of one side's symbol at a tangential frequency.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolFactorization {
    pub side: Side,
    pub xi_prime: Vec<f64>,
    pub a_nn: Complex64,
    /// `Re sum_{j<n} a_nj xi_j / a_nn`.
    pub e: f64,
    /// `Im sum_{j<n} a_nj xi_j / a_nn`.
    pub f: f64,
    /// `A >= 0` with `b = (A - iB)^2`.
    pub root_a: f64,
    /// `B` with `b = (A - iB)^2`.
    pub root_b: f64,
    /// The reduced symbol `b(xi')`.
    pub b: Complex64,
}

impl SymbolFactorization {
    /// `A - F`, the quantity entering the weight-ratio condition.
    pub fn a_minus_f(&self) -> f64 {
        self.root_a - self.f
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi_prime.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn factor_at(pair: &CoefficientPair, side: Side, xi_prime: &[f64]) -> Result<SymbolFactorization> {
    factor_matrix(pair.side(side), side, xi_prime)
}

/// Computes `a_nn`, `E + iF`, `b` and its square root for one matrix.
pub fn factor_matrix(matrix: &ComplexSymmetricMatrix, side: Side, xi_prime: &[f64]) -> Result<SymbolFactorization> {
    let n = matrix.dim();
    if xi_prime.len() != n - 1 {
        return Err(Error::Dimension(format!(
            "xi' has length {}, expected {}",
            xi_prime.len(),
            n - 1
        )));
    }
    if xi_prime.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidFrequency);
    }
    if xi_prime.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("xi' must be finite".into()));
    }
    let nn = n - 1;
    let a_nn = matrix.entry(nn, nn);
    if a_nn.norm() == 0.0 {
        return Err(Error::InternalInconsistency("a_nn vanishes; matrix is not elliptic".into()));
    }
    let ef: Complex64 = (0..nn).map(|j| matrix.entry(nn, j) * xi_prime[j]).sum::<Complex64>() / a_nn;
    let mut acc = Complex64::default();
    for l in 0..nn {
        for j in 0..nn {
            acc += (matrix.entry(l, j) * a_nn - matrix.entry(nn, l) * matrix.entry(nn, j)) * (xi_prime[l] * xi_prime[j]);
        }
    }
    let b = acc / (a_nn * a_nn);
    let (root_a, root_b) = principal_sqrt(b);
    Ok(SymbolFactorization {
        side,
        xi_prime: xi_prime.to_vec(),
        a_nn,
        e: ef.re,
        f: ef.im,
        root_a,
        root_b,
        b,
    })
}

/// The alternative form `b = a_nn^{-1} sum_{l,j<n} a_lj xi_l xi_j - (E + iF)^2`.
pub fn reduced_symbol_alt(matrix: &ComplexSymmetricMatrix, xi_prime: &[f64]) -> Complex64 {
    let nn = matrix.dim() - 1;
    let a_nn = matrix.entry(nn, nn);
    let mut quad = Complex64::default();
    for l in 0..nn {
        for j in 0..nn {
            quad += matrix.entry(l, j) * (xi_prime[l] * xi_prime[j]);
        }
    }
    let ef: Complex64 = (0..nn).map(|j| matrix.entry(nn, j) * xi_prime[j]).sum::<Complex64>() / a_nn;
    quad / a_nn - ef * ef
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConjugatedRoots {
    pub sigma1: Complex64,
    pub sigma2: Complex64,
}

/// Roots in `lambda` of the conjugated symbol for weight slope `alpha`.
///
/// Plus side (`k = 2`): `sigma1 = -E-B - i(tau alpha + F + A)`,
/// `sigma2 = -E+B - i(tau alpha + F - A)`. Minus side (`k = 1`):
/// `sigma1 = E+B + i(tau alpha + F + A)`, `sigma2 = E-B + i(tau alpha + F - A)`.
pub fn conjugated_roots(fact: &SymbolFactorization, alpha: f64, tau: f64) -> ConjugatedRoots {
    let (e, f, a, b) = (fact.e, fact.f, fact.root_a, fact.root_b);
    let ta = tau * alpha;
    match fact.side {
        Side::Plus => ConjugatedRoots {
            sigma1: Complex64::new(-e - b, -(ta + f + a)),
            sigma2: Complex64::new(-e + b, -(ta + f - a)),
        },
        Side::Minus => ConjugatedRoots {
            sigma1: Complex64::new(e + b, ta + f + a),
            sigma2: Complex64::new(e - b, ta + f - a),
        },
    }
}

/// The conjugated symbol evaluated straight from the matrix:
/// `p(xi', (-1)^k lambda + i tau alpha)` with `k = 1` on the minus side.
pub fn conjugated_symbol(
    matrix: &ComplexSymmetricMatrix,
    side: Side,
    xi_prime: &[f64],
    alpha: f64,
    tau: f64,
    lambda: Complex64,
) -> Complex64 {
    let sign = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    let mut zeta: Vec<Complex64> = xi_prime.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    zeta.push(sign * lambda + I * (tau * alpha));
    bilinear(matrix.entries(), &zeta)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `A >= sqrt(lambda_tilde1 |xi'|^2 + F^2)`.
pub fn a_lower_bound(fact: &SymbolFactorization, derived: &DerivedConstants) -> BoundCheck {
    let xi2 = fact.xi_norm().powi(2);
    let rhs = (derived.lambda_tilde1 * xi2 + fact.f * fact.f).sqrt();
    BoundCheck { lhs: fact.root_a, rhs, pass: fact.root_a >= rhs - TOL.a_lower_bound }
}

/// `A^2 + B^2 <= n (Lambda0 / lambda0)^2 |xi'|^2`.
pub fn magnitude_cap(fact: &SymbolFactorization, derived: &DerivedConstants) -> BoundCheck {
    let lhs = fact.root_a.powi(2) + fact.root_b.powi(2);
    let ratio = derived.big_lambda0 / derived.lambda0;
    let rhs = derived.n as f64 * ratio * ratio * fact.xi_norm().powi(2);
    BoundCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + TOL.identity_rel) }
}
