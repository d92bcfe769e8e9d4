//! Transmission-condition analysis: case classification, the weight-slope
//! ratio, the 4x4 interface system and grid certification.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{gamma_threshold, CoefficientPair};
use crate::error::{Error, Result};
use crate::sphere::sphere_points;
use crate::symbol::{conjugated_roots, factor_at, SymbolFactorization};
use crate::tolerance::TOL;
use crate::weights::WeightParameters;
use crate::Side;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
}

/// Fixed probe polynomials used to exhibit the transmission identities.
/// Coefficients are listed from the constant term upwards.
pub const PROBE_Q1: [Complex64; 3] = [Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(1.0, 0.0)];
pub const PROBE_Q2: [Complex64; 3] = [Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(3.0, 0.0)];

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `K_2 = 1`; `q_1` is divided by `K_1` and the remainder is matched by
    /// the two interface symbols on the minus side.
    Division { k1_degree: usize, c1: Complex64, c2: Complex64, residual: f64 },
    /// One root on each side in the lower half plane; the 4x4 system is solved.
    System { solution: TransmissionSolution },
    /// Both `K_1` of degree 2 and `K_2` of degree 1: the condition fails.
    Violated { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseClassification {
    pub case_id: CaseId,
    /// `[Im sigma_1, Im sigma_2]` on the minus side (`k = 1`).
    pub im_sigma_minus: [f64; 2],
    /// `[Im sigma_1, Im sigma_2]` on the plus side (`k = 2`).
    pub im_sigma_plus: [f64; 2],
    pub det_t: Option<Complex64>,
    pub certificate: Certificate,
}

fn case_of(minus: &SymbolFactorization, plus: &SymbolFactorization, alpha_minus: f64, alpha_plus: f64, tau: f64) -> CaseId {
    let s2 = -tau * alpha_plus - plus.f + plus.root_a;
    let s1 = tau * alpha_minus + minus.f - minus.root_a;
    if s2 < 0.0 {
        CaseId::Case1
    } else if s1 >= 0.0 {
        CaseId::Case2
    } else {
        CaseId::Case3
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::default(), |acc, c| acc * z + c)
}

/// Divides `q` by the monic polynomial with the given roots; returns the
/// quotient and remainder (both ascending coefficients).
fn divide_by_roots(q: &[Complex64], roots: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut divisor = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::default(); divisor.len() + 1];
        for (i, d) in divisor.iter().enumerate() {
            next[i + 1] += d;
            next[i] -= d * r;
        }
        divisor = next;
    }
    let dd = divisor.len() - 1;
    if q.len() <= dd {
        return (vec![], q.to_vec());
    }
    let mut rem = q.to_vec();
    let mut quot = vec![Complex64::default(); q.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        for (i, d) in divisor.iter().enumerate() {
            rem[k + i] -= c * d;
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

/// Classifies the root configuration at `(xi', tau)` and builds the
/// corresponding certificate with the probe polynomials.
pub fn classify(
    minus: &SymbolFactorization,
    plus: &SymbolFactorization,
    alpha_minus: f64,
    alpha_plus: f64,
    tau: f64,
) -> Result<CaseClassification> {
    let rm = conjugated_roots(minus, alpha_minus, tau);
    let rp = conjugated_roots(plus, alpha_plus, tau);
    let case_id = case_of(minus, plus, alpha_minus, alpha_plus, tau);
    let (certificate, det_t) = match case_id {
        CaseId::Case1 => {
            let k1: Vec<Complex64> = [rm.sigma1, rm.sigma2].into_iter().filter(|s| s.im >= 0.0).collect();
            let (quot, rem) = divide_by_roots(&PROBE_Q1, &k1);
            let r0 = rem.first().copied().unwrap_or_default();
            let r1 = rem.get(1).copied().unwrap_or_default();
            let zeta = I * (tau * alpha_minus) + Complex64::new(minus.e, minus.f);
            let c2 = r1 / minus.a_nn;
            let c1 = -r0 - r1 * zeta;
            // q1 = c1 t1 + c2 t2 + U1 K1 with t1 = -1, t2 = a_nn (lambda - zeta)
            let mut residual: f64 = 0.0;
            for lam in probe_lambdas() {
                let k = k1.iter().fold(Complex64::new(1.0, 0.0), |acc, s| acc * (lam - s));
                let terms = [-c1, c2 * minus.a_nn * (lam - zeta), horner(&quot, lam) * k, -horner(&PROBE_Q1, lam)];
                let size: f64 = terms.iter().map(|z| z.norm()).sum();
                residual = residual.max(terms.iter().sum::<Complex64>().norm() / size.max(f64::MIN_POSITIVE));
            }
            (Certificate::Division { k1_degree: k1.len(), c1, c2, residual }, None)
        }
        CaseId::Case2 => (
            Certificate::Violated {
                reason: format!(
                    "K_1 has degree 2 and K_2 degree 1: Im sigma_2 = {:.6e} (plus), {:.6e} (minus)",
                    rp.sigma2.im, rm.sigma2.im
                ),
            },
            None,
        ),
        CaseId::Case3 => {
            let q1 = horner(&PROBE_Q1, rm.sigma1);
            let q2 = horner(&PROBE_Q2, rp.sigma2);
            let solution = solve_transmission_system(minus, plus, q1, q2, alpha_minus, alpha_plus, tau)?;
            (Certificate::System { solution }, Some(det_t(minus, plus)))
        }
    };
    Ok(CaseClassification {
        case_id,
        im_sigma_minus: [rm.sigma1.im, rm.sigma2.im],
        im_sigma_plus: [rp.sigma1.im, rp.sigma2.im],
        det_t,
        certificate,
    })
}

fn probe_lambdas() -> [Complex64; 4] {
    [
        Complex64::new(0.3, -0.7),
        Complex64::new(-1.1, 0.4),
        Complex64::new(2.0, 1.5),
        Complex64::new(0.0, 0.0),
    ]
}

/// `a_nn^(2) (B^(2) + i A^(2)) + a_nn^(1) (B^(1) + i A^(1))`.
pub fn det_t(minus: &SymbolFactorization, plus: &SymbolFactorization) -> Complex64 {
    plus.a_nn * Complex64::new(plus.root_b, plus.root_a) + minus.a_nn * Complex64::new(minus.root_b, minus.root_a)
}

/// The 4x4 matrix of the interface system in the unknowns `(mu1, mu2, c1, c2)`.
pub fn transmission_matrix(
    minus: &SymbolFactorization,
    plus: &SymbolFactorization,
    alpha_minus: f64,
    alpha_plus: f64,
    tau: f64,
) -> Matrix4<Complex64> {
    let s1 = conjugated_roots(minus, alpha_minus, tau).sigma1;
    let s2 = conjugated_roots(plus, alpha_plus, tau).sigma2;
    let z1 = minus.a_nn * (I * (tau * alpha_minus) + Complex64::new(minus.e, minus.f));
    let z2 = plus.a_nn * (I * (tau * alpha_plus) + Complex64::new(plus.e, plus.f));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    Matrix4::new(
        one, zero, zero, minus.a_nn, //
        zero, one, zero, plus.a_nn, //
        s1, zero, one, z1, //
        zero, -s2, one, z2,
    )
}

/// Determinant of [`transmission_matrix`] by LU factorization.
pub fn det_t_brute(
    minus: &SymbolFactorization,
    plus: &SymbolFactorization,
    alpha_minus: f64,
    alpha_plus: f64,
    tau: f64,
) -> Complex64 {
    transmission_matrix(minus, plus, alpha_minus, alpha_plus, tau).determinant()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransmissionSolution {
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    /// Largest mismatch of the polynomial identities at probe `lambda`,
    /// relative to `1 + |q1| + |q2|`.
    pub residual: f64,
}

impl TransmissionSolution {
    pub fn as_array(&self) -> [Complex64; 4] {
        [self.mu1, self.mu2, self.c1, self.c2]
    }
}

/// Solves the interface system for constant remainders `q1`, `q2` and checks
/// the two polynomial identities in `lambda` at several probe points.
pub fn solve_transmission_system(
    minus: &SymbolFactorization,
    plus: &SymbolFactorization,
    q1: Complex64,
    q2: Complex64,
    alpha_minus: f64,
    alpha_plus: f64,
    tau: f64,
) -> Result<TransmissionSolution> {
    let t = transmission_matrix(minus, plus, alpha_minus, alpha_plus, tau);
    let closed = det_t(minus, plus);
    let scale = minus.a_nn.norm() * minus.xi_norm() + plus.a_nn.norm() * plus.xi_norm();
    if closed.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularSystem { abs_det: closed.norm() });
    }
    let rhs = Vector4::new(Complex64::default(), Complex64::default(), -q1, q2);
    let x = t.lu().solve(&rhs).ok_or(Error::SingularSystem { abs_det: closed.norm() })?;
    let (mu1, mu2, c1, c2) = (x[0], x[1], x[2], x[3]);

    let s1 = conjugated_roots(minus, alpha_minus, tau).sigma1;
    let s2 = conjugated_roots(plus, alpha_plus, tau).sigma2;
    let w1 = I * (tau * alpha_minus) + Complex64::new(minus.e, minus.f);
    let w2 = I * (tau * alpha_plus) + Complex64::new(plus.e, plus.f);
    // backward-relative: each identity is scaled by the size of its terms,
    // which grow like tau alpha through sigma and w
    let mut residual: f64 = 0.0;
    for lam in probe_lambdas() {
        let t1 = [mu1 * (lam - s1), -c1, c2 * minus.a_nn * (lam - w1), -q1];
        let t2 = [mu2 * (lam - s2), c1, c2 * plus.a_nn * (lam + w2), -q2];
        for t in [t1, t2] {
            let size: f64 = t.iter().map(|z| z.norm()).sum();
            let r: Complex64 = t.iter().sum();
            residual = residual.max(r.norm() / size.max(f64::MIN_POSITIVE));
        }
    }
    Ok(TransmissionSolution { mu1, mu2, c1, c2, residual })
}

/// `max_{|xi'| = 1} (A2 - F2) / (A1 - F1) + 1` over deterministic sphere
/// samples, refined by golden-section search on the circle when `n = 3`.
pub fn alpha_ratio(pair: &CoefficientPair, samples: usize) -> Result<f64> {
    let n = pair.dim();
    let quotient = |xi: &[f64]| -> Result<f64> {
        let p = factor_at(pair, Side::Plus, xi)?;
        let m = factor_at(pair, Side::Minus, xi)?;
        let den = m.a_minus_f();
        if den <= 0.0 {
            return Err(Error::InternalInconsistency(format!(
                "A - F = {den:e} <= 0 on the minus side at xi' = {xi:?}; ellipticity hypotheses violated"
            )));
        }
        if p.a_minus_f() <= 0.0 {
            return Err(Error::InternalInconsistency(format!(
                "A - F = {:e} <= 0 on the plus side at xi' = {xi:?}",
                p.a_minus_f()
            )));
        }
        Ok(p.a_minus_f() / den)
    };
    let points = sphere_points(n - 1, samples.max(1));
    let values: Vec<f64> = points.par_iter().map(|xi| quotient(xi)).collect::<Result<_>>()?;
    let (best_idx, mut best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if n == 3 {
        let t0 = points[best_idx][1].atan2(points[best_idx][0]);
        let width = 4.0 * std::f64::consts::PI / samples.max(1) as f64;
        let f = |t: f64| quotient(&[t.cos(), t.sin()]);
        let (mut a, mut b) = (t0 - width, t0 + width);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        for _ in 0..80 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d)?;
            }
        }
        best = best.max(fc).max(fd);
    }
    Ok(best + 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: String,
    pub xi_prime: Vec<f64>,
    pub tau: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransmissionReport {
    pub certified: bool,
    pub min_abs_det_t: f64,
    /// Required `alpha_plus / alpha_minus` from the sphere maximization.
    pub alpha_ratio: f64,
    /// The ratio actually used by the weights.
    pub weights_ratio: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub gamma_below_threshold: bool,
    pub xi_samples: usize,
    pub tau_points: usize,
    pub evaluations: usize,
    pub case_counts: [usize; 3],
    /// Largest relative gap between the closed-form and LU determinants.
    pub max_det_rel_gap: f64,
    pub max_system_residual: f64,
    /// Whether `tau a2 + F2 - A2 <= 0` implied `tau a1 + F1 - A1 < 0` everywhere.
    pub implication_holds: bool,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
}

/// `points` logarithmically spaced values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect()
}

const MAX_LISTED_VIOLATIONS: usize = 32;

#[derive(Default)]
struct Partial {
    min_det: f64,
    det_gap: f64,
    residual: f64,
    counts: [usize; 3],
    evaluations: usize,
    implication: bool,
    violations: Vec<Violation>,
    violation_count: usize,
}

impl Partial {
    fn empty() -> Self {
        Partial { min_det: f64::INFINITY, implication: true, ..Default::default() }
    }

    fn merge(mut self, o: Partial) -> Partial {
        self.min_det = self.min_det.min(o.min_det);
        self.det_gap = self.det_gap.max(o.det_gap);
        self.residual = self.residual.max(o.residual);
        for k in 0..3 {
            self.counts[k] += o.counts[k];
        }
        self.evaluations += o.evaluations;
        self.implication &= o.implication;
        self.violation_count += o.violation_count;
        self.violations.extend(o.violations);
        self.violations.truncate(MAX_LISTED_VIOLATIONS);
        self
    }
}

/// Certifies the transmission condition over sampled unit `xi'` and the
/// given `tau` grid, adding for every `xi'` the `tau` values where either
/// side's case boundary is crossed.
pub fn certify_transmission(
    pair: &CoefficientPair,
    weights: &WeightParameters,
    xi_samples: usize,
    tau_grid: &[f64],
) -> Result<TransmissionReport> {
    let n = pair.dim();
    let (a1, a2) = (weights.alpha_minus, weights.alpha_plus);
    let required = alpha_ratio(pair, xi_samples)?;
    let gamma0 = gamma_threshold(pair.lambda0, pair.big_lambda0, n)?;
    let points = sphere_points(n - 1, xi_samples.max(1));

    let partial = points
        .par_iter()
        .map(|xi| -> Result<Partial> {
            let mut acc = Partial::empty();
            let m = factor_at(pair, Side::Minus, xi)?;
            let p = factor_at(pair, Side::Plus, xi)?;
            let closed = det_t(&m, &p);
            acc.min_det = closed.norm();
            let mut taus = tau_grid.to_vec();
            for t in [p.a_minus_f() / a2, m.a_minus_f() / a1] {
                if t > 0.0 {
                    taus.push(t);
                }
            }
            for &tau in &taus {
                acc.evaluations += 1;
                let brute = det_t_brute(&m, &p, a1, a2, tau);
                acc.det_gap = acc.det_gap.max((brute - closed).norm() / closed.norm().max(f64::MIN_POSITIVE));
                let c = match classify(&m, &p, a1, a2, tau) {
                    Ok(c) => c,
                    Err(Error::SingularSystem { abs_det }) => {
                        acc.violation_count += 1;
                        acc.violations.push(Violation {
                            kind: "singular".into(),
                            xi_prime: xi.clone(),
                            tau,
                            detail: format!("|det T| = {abs_det:e}"),
                        });
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let idx = match c.case_id {
                    CaseId::Case1 => 0,
                    CaseId::Case2 => 1,
                    CaseId::Case3 => 2,
                };
                acc.counts[idx] += 1;
                if tau * a2 + p.f - p.root_a <= 0.0 && tau * a1 + m.f - m.root_a >= 0.0 {
                    acc.implication = false;
                }
                match &c.certificate {
                    Certificate::Violated { reason } => {
                        acc.violation_count += 1;
                        if acc.violations.len() < MAX_LISTED_VIOLATIONS {
                            acc.violations.push(Violation {
                                kind: "case2".into(),
                                xi_prime: xi.clone(),
                                tau,
                                detail: reason.clone(),
                            });
                        }
                    }
                    Certificate::System { solution } => acc.residual = acc.residual.max(solution.residual),
                    Certificate::Division { residual, .. } => acc.residual = acc.residual.max(*residual),
                }
            }
            Ok(acc)
        })
        .try_reduce(Partial::empty, |a, b| Ok(a.merge(b)))?;

    let mut violations = partial.violations;
    let mut violation_count = partial.violation_count;
    let below = pair.gamma() < gamma0;
    if !below {
        violation_count += 1;
        violations.push(Violation {
            kind: "gamma_threshold".into(),
            xi_prime: vec![],
            tau: 0.0,
            detail: format!("gamma = {} is not below gamma0 = {gamma0:.7}", pair.gamma()),
        });
    }
    if partial.residual > TOL.closed_form_rel || partial.det_gap > TOL.closed_form_rel {
        violation_count += 1;
        violations.push(Violation {
            kind: "numerical".into(),
            xi_prime: vec![],
            tau: 0.0,
            detail: format!(
                "system residual {:e} or determinant gap {:e} above tolerance",
                partial.residual, partial.det_gap
            ),
        });
    }
    Ok(TransmissionReport {
        certified: violation_count == 0,
        min_abs_det_t: partial.min_det,
        alpha_ratio: required,
        weights_ratio: weights.ratio(),
        gamma: pair.gamma(),
        gamma0,
        gamma_below_threshold: below,
        xi_samples: points.len(),
        tau_points: tau_grid.len(),
        evaluations: partial.evaluations,
        case_counts: partial.counts,
        max_det_rel_gap: partial.det_gap,
        max_system_residual: partial.residual,
        implication_holds: partial.implication,
        violations,
        violation_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{random_pair, ComplexSymmetricMatrix};
    use crate::symbol::factor_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iso(c: f64, gamma: f64) -> ComplexSymmetricMatrix {
        ComplexSymmetricMatrix::scaled_identity(2, c, gamma).unwrap()
    }

    fn iso_facts() -> (SymbolFactorization, SymbolFactorization) {
        let a = iso(1.0, 0.0);
        (factor_matrix(&a, Side::Minus, &[1.0]).unwrap(), factor_matrix(&a, Side::Plus, &[1.0]).unwrap())
    }

    #[test]
    fn classification_examples() {
        let (m, p) = iso_facts();
        assert_eq!(classify(&m, &p, 1.0, 1.0, 2.0).unwrap().case_id, CaseId::Case1);
        let c3 = classify(&m, &p, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(c3.case_id, CaseId::Case3);
        assert!(c3.det_t.is_some());
        let c2 = classify(&m, &p, 10.0, 0.1, 1.0).unwrap();
        assert_eq!(c2.case_id, CaseId::Case2);
        assert!(c2.im_sigma_plus[1] >= 0.0 && c2.im_sigma_minus[1] >= 0.0);
        assert!(matches!(c2.certificate, Certificate::Violated { .. }));
    }

    #[test]
    fn division_certificate_reproduces_probe() {
        let (m, p) = iso_facts();
        for tau in [2.0, 5.0] {
            match classify(&m, &p, 1.0, 1.0, tau).unwrap().certificate {
                Certificate::Division { residual, k1_degree, .. } => {
                    assert!(residual < 1e-12);
                    assert!(k1_degree >= 1);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn polynomial_division() {
        // (l^2 + 3l + 2) / (l + 1) = l + 2
        let q = [Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(1.0, 0.0)];
        let (quot, rem) = divide_by_roots(&q, &[Complex64::new(-1.0, 0.0)]);
        assert_eq!(quot, vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(rem, vec![Complex64::default()]);
        let (quot, rem) = divide_by_roots(&q, &[]);
        assert_eq!(quot, q.to_vec());
        assert!(rem.is_empty());
    }

    #[test]
    fn det_t_isotropic_and_real_case() {
        let (m, p) = iso_facts();
        let d = det_t(&m, &p);
        assert_eq!(d, Complex64::new(0.0, 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let pair = random_pair(&mut rng, 3, 0.5, 2.0, 0.0).unwrap();
            let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let m = factor_at(&pair, Side::Minus, &xi).unwrap();
            let p = factor_at(&pair, Side::Plus, &xi).unwrap();
            let d = det_t(&m, &p);
            assert!(d.im > 0.0);
            assert!((d.im - (p.a_nn.re * p.root_a + m.a_nn.re * m.root_a)).abs() < 1e-12 * d.im);
        }
    }

    #[test]
    fn det_t_closed_form_matches_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let n = rng.gen_range(2..=4);
            let g = rng.gen_range(0.0..0.5);
            let pair = random_pair(&mut rng, n, 0.5, 2.0, g).unwrap();
            let xi: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = factor_at(&pair, Side::Minus, &xi).unwrap();
            let p = factor_at(&pair, Side::Plus, &xi).unwrap();
            let tau = rng.gen_range(0.1..100.0);
            let closed = det_t(&m, &p);
            let brute = det_t_brute(&m, &p, 1.0, 2.0, tau);
            assert!((closed - brute).norm() <= TOL.closed_form_rel * closed.norm(), "{closed} {brute}");
        }
    }

    #[test]
    fn system_examples_and_linearity() {
        let (m, p) = iso_facts();
        let zero = Complex64::default();
        let s = solve_transmission_system(&m, &p, zero, zero, 1.0, 1.0, 0.5).unwrap();
        assert!(s.as_array().iter().all(|z| z.norm() == 0.0));
        let one = Complex64::new(1.0, 0.0);
        let s1 = solve_transmission_system(&m, &p, one, zero, 1.0, 1.0, 0.5).unwrap();
        assert!(s1.residual <= 1e-10);
        let q1 = Complex64::new(0.3, -1.2);
        let q2 = Complex64::new(-2.0, 0.7);
        let a = solve_transmission_system(&m, &p, q1, q2, 1.0, 1.0, 0.5).unwrap();
        let b = solve_transmission_system(&m, &p, q1 * 2.0, q2 * 2.0, 1.0, 1.0, 0.5).unwrap();
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            assert!((x * 2.0 - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn alpha_ratio_examples() {
        let pair = CoefficientPair::new(iso(1.0, 0.0), iso(1.0, 0.0), None, 0.0).unwrap();
        assert!((alpha_ratio(&pair, 16).unwrap() - 2.0).abs() < 1e-14);
        let pair = CoefficientPair::new(iso(4.0, 0.0), iso(1.0, 0.0), None, 0.0).unwrap();
        assert!((alpha_ratio(&pair, 16).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn alpha_ratio_refinement_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pair = random_pair(&mut rng, 3, 0.5, 2.0, 0.1).unwrap();
        let a = alpha_ratio(&pair, 1024).unwrap();
        let b = alpha_ratio(&pair, 2048).unwrap();
        assert!(a > 1.0);
        assert!((a - b).abs() < 1e-3, "{a} {b}");
    }

    #[test]
    fn certification_isotropic_and_misweighted() {
        let pair = CoefficientPair::new(iso(1.0, 0.1), iso(1.0, 0.1), None, 0.0).unwrap();
        let grid = log_grid(1.0, 1e3, 50);
        let w = WeightParameters::new(2.0, 1.0, 1.0, 0.1, 0.1).unwrap();
        let r = certify_transmission(&pair, &w, 2, &grid).unwrap();
        assert!(r.certified, "{:?}", r.violations);
        assert!(r.implication_holds);
        assert!(r.min_abs_det_t > 0.0);

        let w = WeightParameters::new(0.01, 1.0, 1.0, 0.1, 0.1).unwrap();
        let r = certify_transmission(&pair, &w, 2, &grid).unwrap();
        assert!(!r.certified);
        assert!(r.violations.iter().any(|v| v.kind == "case2"));
        assert!(!r.implication_holds);
    }

    #[test]
    fn classification_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let pair = random_pair(&mut rng, 3, 0.5, 2.0, 0.05).unwrap();
            let scaled = pair.scaled(3.7);
            let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let tau = rng.gen_range(0.01..10.0);
            let c = |pr: &CoefficientPair| {
                let m = factor_at(pr, Side::Minus, &xi).unwrap();
                let p = factor_at(pr, Side::Plus, &xi).unwrap();
                case_of(&m, &p, 1.0, 1.5, tau)
            };
            assert_eq!(c(&pair), c(&scaled));
        }
    }
}
