//! Carleman weights `psi_eps` and `phi_delta` with their derivatives.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Side;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParameters {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl WeightParameters {
    pub fn new(alpha_plus: f64, alpha_minus: f64, beta: f64, epsilon: f64, delta: f64) -> Result<Self> {
        let p = Self { alpha_plus, alpha_minus, beta, epsilon, delta };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_plus", self.alpha_plus),
            ("alpha_minus", self.alpha_minus),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        Ok(())
    }

    pub fn alpha(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.alpha_plus,
            Side::Minus => self.alpha_minus,
        }
    }

    /// `alpha_plus / alpha_minus`.
    pub fn ratio(&self) -> f64 {
        self.alpha_plus / self.alpha_minus
    }

    /// Radius bound `alpha / (2 beta)` for localizing around the origin.
    pub fn localization_bound(&self, side: Side) -> f64 {
        self.alpha(side) / (2.0 * self.beta)
    }
}

fn tangential_norm_sqr(x: &[f64]) -> f64 {
    x[..x.len() - 1].iter().map(|v| v * v).sum()
}

fn psi_with(alpha: f64, beta: f64, eps: f64, x: &[f64]) -> f64 {
    let xn = x[x.len() - 1];
    alpha * xn + 0.5 * beta * xn * xn - 0.5 * eps * tangential_norm_sqr(x)
}

/// `psi_eps(x) = alpha_side x_n + beta x_n^2 / 2 - eps |x'|^2 / 2`.
///
/// The side's polynomial is evaluated as written, so it is also the smooth
/// extension of that side across `x_n = 0`. The caller picks the side.
pub fn psi(params: &WeightParameters, x: &[f64], side: Side) -> f64 {
    psi_with(params.alpha(side), params.beta, params.epsilon, x)
}

/// `phi_delta(x) = psi_delta(x / delta)`: `psi` with `eps` replaced by `delta`,
/// evaluated at the rescaled point. The side follows the sign of `x_n`.
pub fn phi_delta(params: &WeightParameters, x: &[f64]) -> Result<f64> {
    phi_delta_side(params, x, Side::of(x[x.len() - 1]))
}

/// [`phi_delta`] on an explicitly chosen side (smooth extension).
pub fn phi_delta_side(params: &WeightParameters, x: &[f64], side: Side) -> Result<f64> {
    let d = params.delta;
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {d}")));
    }
    let y: Vec<f64> = x.iter().map(|v| v / d).collect();
    Ok(psi_with(params.alpha(side), params.beta, d, &y))
}

/// `(-eps x', alpha_side + beta x_n)`.
pub fn grad_psi(params: &WeightParameters, x: &[f64], side: Side) -> Vec<f64> {
    let n = x.len();
    let mut g: Vec<f64> = x[..n - 1].iter().map(|v| -params.epsilon * v).collect();
    g.push(params.alpha(side) + params.beta * x[n - 1]);
    g
}

/// `diag(-eps I_{n-1}, beta)`, independent of `x`.
pub fn hess_psi(params: &WeightParameters, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| match (i == j, i == n - 1) {
        (true, true) => params.beta,
        (true, false) => -params.epsilon,
        _ => 0.0,
    })
}

/// Gradient of `phi_delta` on the given side: `delta^{-1} grad psi_delta(x / delta)`.
pub fn grad_phi_delta(params: &WeightParameters, x: &[f64], side: Side) -> Result<Vec<f64>> {
    let d = params.delta;
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {d}")));
    }
    let n = x.len();
    let mut g: Vec<f64> = x[..n - 1].iter().map(|v| -v / d).collect();
    g.push((params.alpha(side) + params.beta * x[n - 1] / d) / d);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(ap: f64, am: f64, beta: f64, eps: f64, delta: f64) -> WeightParameters {
        WeightParameters::new(ap, am, beta, eps, delta).unwrap()
    }

    #[test]
    fn psi_examples() {
        let p = params(2.0, 1.0, 1.0, 0.1, 1.0);
        assert_relative_eq!(psi(&p, &[1.0, 0.5], Side::Plus), 1.075, epsilon = 1e-15);
        assert_eq!(psi(&p, &[0.0, 0.0], Side::Plus), 0.0);
        assert_eq!(psi(&p, &[0.0, 0.0, 0.0], Side::Minus), 0.0);
        assert_relative_eq!(psi(&p, &[0.0, -1.0], Side::Minus), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn phi_delta_examples() {
        let p = params(2.0, 1.0, 1.0, 0.1, 0.5);
        assert_relative_eq!(phi_delta(&p, &[0.25, 0.25]).unwrap(), 1.0625, epsilon = 1e-15);
        assert_eq!(phi_delta(&p, &[0.0, 0.0]).unwrap(), 0.0);

        let one = params(2.0, 1.0, 1.0, 1.0, 1.0);
        for i in -10..=10 {
            for j in -10..=10 {
                let x = [0.1 * i as f64, 0.1 * j as f64];
                let side = Side::of(x[1]);
                assert_eq!(phi_delta(&one, &x).unwrap(), psi(&one, &x, side));
            }
        }
        let mut zero = p;
        zero.delta = 0.0;
        assert!(matches!(phi_delta(&zero, &[0.1, 0.1]), Err(Error::InvalidParameter(_))));
        assert!(WeightParameters::new(1.0, 1.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn gradient_and_hessian_shape() {
        let p = params(2.0, 1.0, 1.0, 0.1, 1.0);
        assert_eq!(grad_psi(&p, &[0.0, 0.0, 0.0], Side::Plus), vec![0.0, 0.0, 2.0]);
        let h = hess_psi(&p, 3);
        let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert_eq!(eig, vec![-0.1, -0.1, 1.0]);
    }

    #[test]
    fn interface_continuity_and_gradient_jump() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = params(2.7, 1.3, 0.8, 0.2, 1.0);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0];
            assert_eq!(psi(&p, &x, Side::Plus), psi(&p, &x, Side::Minus));
            let gp = grad_psi(&p, &x, Side::Plus);
            let gm = grad_psi(&p, &x, Side::Minus);
            assert_eq!(gp[0] - gm[0], 0.0);
            assert_eq!(gp[1] - gm[1], 0.0);
            assert_eq!(gp[2] - gm[2], 2.7 - 1.3);
        }
    }

    fn fd_check(p: &WeightParameters, x: &[f64], side: Side, h: f64) -> (f64, f64) {
        let n = x.len();
        let f = |y: &[f64]| psi(p, y, side);
        let g = grad_psi(p, x, side);
        let hs = hess_psi(p, n);
        let (mut gerr, mut herr) = (0.0f64, 0.0f64);
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            gerr = gerr.max((fd - g[i]).abs() / g[i].abs().max(1.0));
            for j in 0..n {
                let shift = |a: f64, b: f64| {
                    let mut y = x.to_vec();
                    y[i] += a;
                    y[j] += b;
                    f(&y)
                };
                let fd2 = (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) / (4.0 * h * h);
                herr = herr.max((fd2 - hs[(i, j)]).abs() / hs[(i, j)].abs().max(1.0));
            }
        }
        (gerr, herr)
    }

    #[test]
    fn finite_difference_oracle_matches_derivatives() {
        let p = params(2.0, 1.0, 1.0, 0.1, 1.0);
        let (g, _) = fd_check(&p, &[0.3, -0.2], Side::Minus, 1e-5);
        assert!(g < 1e-9, "gradient error {g}");
        // psi is quadratic, so the second difference is exact up to rounding
        let (_, h) = fd_check(&p, &[0.3, -0.2], Side::Minus, 1e-3);
        assert!(h < 1e-6, "hessian error {h}");

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(2..=4);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let side = Side::of(x[n - 1]);
            let (g, _) = fd_check(&p, &x, side, 1e-5);
            let (_, h) = fd_check(&p, &x, side, 1e-3);
            assert!(g <= 1e-6 && h <= 1e-6, "g {g} h {h}");
        }
    }

    #[test]
    fn phi_delta_gradient_matches_finite_differences() {
        let p = params(2.0, 1.0, 1.0, 0.1, 0.4);
        let x = [0.07, -0.03, 0.05];
        let g = grad_phi_delta(&p, &x, Side::Plus).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (phi_delta_side(&p, &xp, Side::Plus).unwrap() - phi_delta_side(&p, &xm, Side::Plus).unwrap())
                / (2.0 * h);
            assert_relative_eq!(fd, g[i], epsilon = 1e-7);
        }
    }
}
