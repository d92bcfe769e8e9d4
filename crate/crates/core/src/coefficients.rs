//! Complex symmetric coefficient matrices `A = M + i*gamma*N` on both sides of
//! the interface, their ellipticity checks and the constants derived from them.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance::TOL;
use crate::Side;

/// `a_lj = M_lj + i*gamma*N_lj`, stored as the real pair `(M, N)` and `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSymmetricMatrix {
    m: DMatrix<f64>,
    n: DMatrix<f64>,
    gamma: f64,
    entries: Vec<Complex64>,
}

impl ComplexSymmetricMatrix {
    pub fn new(m: DMatrix<f64>, n: DMatrix<f64>, gamma: f64) -> Result<Self> {
        if !m.is_square() || !n.is_square() {
            return Err(Error::Dimension(format!(
                "M is {}x{}, N is {}x{}; both must be square",
                m.nrows(),
                m.ncols(),
                n.nrows(),
                n.ncols()
            )));
        }
        if m.nrows() != n.nrows() {
            return Err(Error::Dimension(format!(
                "M has dimension {} but N has dimension {}",
                m.nrows(),
                n.nrows()
            )));
        }
        if m.nrows() < 2 {
            return Err(Error::Dimension(format!("dimension must be at least 2, got {}", m.nrows())));
        }
        if m.iter().chain(n.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidInput(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for l in 0..dim {
            for j in 0..dim {
                entries.push(Complex64::new(m[(l, j)], gamma * n[(l, j)]));
            }
        }
        Ok(Self { m, n, gamma, entries })
    }

    /// Builds from row-major nested vectors, as read from a config file.
    pub fn from_rows(m: &[Vec<f64>], n: &[Vec<f64>], gamma: f64) -> Result<Self> {
        Self::new(to_dmatrix(m, "M")?, to_dmatrix(n, "N")?, gamma)
    }

    /// `c * (I + i*gamma*I)`.
    pub fn scaled_identity(dim: usize, c: f64, gamma: f64) -> Result<Self> {
        let id = DMatrix::<f64>::identity(dim, dim) * c;
        Self::new(id.clone(), id, gamma)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn real_part(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn imag_shape(&self) -> &DMatrix<f64> {
        &self.n
    }

    #[inline]
    pub fn entry(&self, l: usize, j: usize) -> Complex64 {
        self.entries[l * self.dim() + j]
    }

    /// Row-major complex entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Same matrix multiplied by a positive real.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(&self.m * c, &self.n * c, self.gamma).expect("scaling preserves validity")
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.m.clone(), self.n.clone(), gamma)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for l in 0..dim {
            for j in (l + 1)..dim {
                worst = worst.max((self.entry(l, j) - self.entry(j, l)).norm());
            }
        }
        worst
    }
}

fn to_dmatrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Dimension(format!("{name} is empty")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!("{name} has ragged rows")));
    }
    if nrows != ncols {
        return Err(Error::Dimension(format!("{name} is {nrows}x{ncols}, not square")));
    }
    if rows.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput(format!("{name} contains NaN")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Extreme eigenvalues of the symmetric part of a real matrix.
pub fn eigen_range(a: &DMatrix<f64>) -> (f64, f64) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Spatially varying coefficients `x -> A_side(x)`.
///
/// Implementations write the row-major `n x n` complex entries into `out`.
/// The value at the origin must agree with the frozen matrices of the pair.
pub trait CoefficientField: Send + Sync + fmt::Debug {
    fn write_entries(&self, side: Side, x: &[f64], out: &mut [Complex64]);
}

/// `A_side(x) = A_side(0) * (1 + amplitude * sin(k . x))`.
///
/// Symmetry is preserved and the eigenvalues move by at most the factor
/// `1 +- amplitude`; the Lipschitz constant is `amplitude * |k| * |A(0)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarModulation {
    pub plus: ComplexSymmetricMatrix,
    pub minus: ComplexSymmetricMatrix,
    pub amplitude: f64,
    pub wavevector: Vec<f64>,
}

impl ScalarModulation {
    fn factor(&self, x: &[f64]) -> f64 {
        let phase: f64 = self.wavevector.iter().zip(x).map(|(k, xi)| k * xi).sum();
        1.0 + self.amplitude * phase.sin()
    }

    pub fn lipschitz_constant(&self) -> f64 {
        let k = self.wavevector.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm = |a: &ComplexSymmetricMatrix| a.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        self.amplitude * k * norm(&self.plus).max(norm(&self.minus))
    }
}

impl CoefficientField for ScalarModulation {
    fn write_entries(&self, side: Side, x: &[f64], out: &mut [Complex64]) {
        let base = match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        };
        let f = self.factor(x);
        for (o, a) in out.iter_mut().zip(base.entries()) {
            *o = a * f;
        }
    }
}

/// The two sides' coefficients with their shared ellipticity constants.
#[derive(Clone)]
pub struct CoefficientPair {
    pub plus: ComplexSymmetricMatrix,
    pub minus: ComplexSymmetricMatrix,
    pub lambda0: f64,
    pub big_lambda0: f64,
    pub m0: f64,
    /// True when `lambda0`/`big_lambda0` were inferred from the matrices.
    pub bounds_inferred: bool,
    pub spatial: Option<Arc<dyn CoefficientField>>,
}

impl fmt::Debug for CoefficientPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientPair")
            .field("plus", &self.plus)
            .field("minus", &self.minus)
            .field("lambda0", &self.lambda0)
            .field("big_lambda0", &self.big_lambda0)
            .field("m0", &self.m0)
            .field("bounds_inferred", &self.bounds_inferred)
            .field("spatial", &self.spatial.is_some())
            .finish()
    }
}

impl CoefficientPair {
    /// `bounds = None` infers the tightest shared `(lambda0, Lambda0)`.
    pub fn new(
        plus: ComplexSymmetricMatrix,
        minus: ComplexSymmetricMatrix,
        bounds: Option<(f64, f64)>,
        m0: f64,
    ) -> Result<Self> {
        if plus.dim() != minus.dim() {
            return Err(Error::Dimension(format!(
                "plus side has dimension {}, minus side {}",
                plus.dim(),
                minus.dim()
            )));
        }
        if plus.gamma() != minus.gamma() {
            return Err(Error::InvalidInput(format!(
                "a single gamma is shared by both sides (plus {}, minus {})",
                plus.gamma(),
                minus.gamma()
            )));
        }
        if !(m0.is_finite() && m0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("M0 must be finite and >= 0, got {m0}")));
        }
        let (lambda0, big_lambda0, inferred) = match bounds {
            Some((lo, hi)) => (lo, hi, false),
            None => {
                let (lo, hi) = [&plus, &minus]
                    .iter()
                    .flat_map(|a| [eigen_range(a.real_part()), eigen_range(a.imag_shape())])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
                (lo, hi, true)
            }
        };
        if !(lambda0 > 0.0 && lambda0 <= big_lambda0 && big_lambda0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ellipticity bounds must satisfy 0 < lambda0 <= Lambda0, got ({lambda0}, {big_lambda0})"
            )));
        }
        Ok(Self { plus, minus, lambda0, big_lambda0, m0, bounds_inferred: inferred, spatial: None })
    }

    pub fn with_spatial(mut self, field: Arc<dyn CoefficientField>, m0: f64) -> Self {
        self.spatial = Some(field);
        self.m0 = m0;
        self
    }

    pub fn dim(&self) -> usize {
        self.plus.dim()
    }

    pub fn gamma(&self) -> f64 {
        self.plus.gamma()
    }

    pub fn side(&self, side: Side) -> &ComplexSymmetricMatrix {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    /// Writes `A_side(x)`; falls back to the frozen matrix without a spatial field.
    pub fn write_entries_at(&self, side: Side, x: &[f64], out: &mut [Complex64]) {
        match &self.spatial {
            Some(field) => field.write_entries(side, x, out),
            None => out.copy_from_slice(self.side(side).entries()),
        }
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        DerivedConstants::new(self.lambda0, self.big_lambda0, self.dim())
    }

    /// Same pair with both sides multiplied by `c > 0` and bounds rescaled.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            plus: self.plus.scaled(c),
            minus: self.minus.scaled(c),
            lambda0: self.lambda0 * c,
            big_lambda0: self.big_lambda0 * c,
            m0: self.m0 * c,
            bounds_inferred: self.bounds_inferred,
            spatial: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SideValidation {
    pub symmetry_defect: f64,
    pub m_min_eig: f64,
    pub m_max_eig: f64,
    pub n_min_eig: f64,
    pub n_max_eig: f64,
    /// Smallest eigenvalue over `M` and `N`.
    pub min_eigenvalue: f64,
    /// `min_eig - lambda0` (negative when the lower bound fails).
    pub lower_margin: f64,
    /// `Lambda0 - max_eig` (negative when the upper bound fails).
    pub upper_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub gamma: f64,
    pub lambda0: f64,
    #[serde(rename = "Lambda0")]
    pub big_lambda0: f64,
    pub bounds_inferred: bool,
    pub plus: SideValidation,
    pub minus: SideValidation,
    pub pass: bool,
}

fn validate_side(a: &ComplexSymmetricMatrix, lambda0: f64, big_lambda0: f64) -> Result<SideValidation> {
    if a.entries().iter().any(|z| z.re.is_nan() || z.im.is_nan()) {
        return Err(Error::InvalidInput("NaN coefficient".into()));
    }
    let symmetry_defect = a.symmetry_defect();
    let (m_min, m_max) = eigen_range(a.real_part());
    let (n_min, n_max) = eigen_range(a.imag_shape());
    let min_eig = m_min.min(n_min);
    let max_eig = m_max.max(n_max);
    let lower_margin = min_eig - lambda0;
    let upper_margin = big_lambda0 - max_eig;
    let pass = symmetry_defect <= TOL.symmetry
        && lower_margin >= -TOL.eigen_margin
        && upper_margin >= -TOL.eigen_margin;
    Ok(SideValidation {
        symmetry_defect,
        m_min_eig: m_min,
        m_max_eig: m_max,
        n_min_eig: n_min,
        n_max_eig: n_max,
        min_eigenvalue: min_eig,
        lower_margin,
        upper_margin,
        pass,
    })
}

/// Checks symmetry and eigenvalue bracketing of `M` and `N` on both sides.
pub fn validate(pair: &CoefficientPair) -> Result<ValidationReport> {
    if pair.plus.dim() != pair.minus.dim() {
        return Err(Error::Dimension("sides have different dimensions".into()));
    }
    let plus = validate_side(&pair.plus, pair.lambda0, pair.big_lambda0)?;
    let minus = validate_side(&pair.minus, pair.lambda0, pair.big_lambda0)?;
    let pass = plus.pass && minus.pass;
    Ok(ValidationReport {
        n: pair.dim(),
        gamma: pair.gamma(),
        lambda0: pair.lambda0,
        big_lambda0: pair.big_lambda0,
        bounds_inferred: pair.bounds_inferred,
        plus,
        minus,
        pass,
    })
}

/// Smallness threshold on `gamma` guaranteeing a nonsingular transmission
/// system: `sqrt(2) l^5 / (L^3 sqrt(n l^4 + n^2 L^4))`.
pub fn gamma_threshold(lambda0: f64, big_lambda0: f64, n: usize) -> Result<f64> {
    if !(lambda0 > 0.0 && big_lambda0 > 0.0 && lambda0.is_finite() && big_lambda0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lambda0 and Lambda0 must be positive, got ({lambda0}, {big_lambda0})"
        )));
    }
    if lambda0 > big_lambda0 {
        return Err(Error::InvalidInput(format!("lambda0 = {lambda0} exceeds Lambda0 = {big_lambda0}")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be >= 2, got {n}")));
    }
    let nf = n as f64;
    let l4 = lambda0.powi(4);
    let big4 = big_lambda0.powi(4);
    Ok(2f64.sqrt() * lambda0.powi(5) / (big_lambda0.powi(3) * (nf * l4 + nf * nf * big4).sqrt()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivedConstants {
    pub n: usize,
    pub lambda0: f64,
    #[serde(rename = "Lambda0")]
    pub big_lambda0: f64,
    /// `lambda0^2 / Lambda0^2`.
    pub lambda_tilde1: f64,
    /// `sqrt(n) Lambda0^2 / lambda0^2`.
    pub lambda_tilde2: f64,
    pub gamma0: f64,
}

impl DerivedConstants {
    pub fn new(lambda0: f64, big_lambda0: f64, n: usize) -> Result<Self> {
        let gamma0 = gamma_threshold(lambda0, big_lambda0, n)?;
        let ratio = lambda0 * lambda0 / (big_lambda0 * big_lambda0);
        Ok(Self {
            n,
            lambda0,
            big_lambda0,
            lambda_tilde1: ratio,
            lambda_tilde2: (n as f64).sqrt() / ratio,
            gamma0,
        })
    }
}

/// Random real symmetric matrix `Q^T D Q` with spectrum drawn from `[lo, hi]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    let d = DMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(lo..=hi)));
    let a = q.transpose() * d * q;
    // exact symmetry of the stored reals
    (&a + a.transpose()) * 0.5
}

/// Random pair with all spectra in `[lambda0, Lambda0]` and the given bounds attached.
pub fn random_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    lambda0: f64,
    big_lambda0: f64,
    gamma: f64,
) -> Result<CoefficientPair> {
    // keep the drawn spectra a hair inside the bounds so rounding in Q^T D Q
    // never pushes an eigenvalue across them
    let pad = 1e-9 * big_lambda0;
    let (lo, hi) = (lambda0 + pad, big_lambda0 - pad);
    let mut side = || {
        ComplexSymmetricMatrix::new(random_spd(rng, n, lo, hi), random_spd(rng, n, lo, hi), gamma)
    };
    let plus = side()?;
    let minus = side()?;
    CoefficientPair::new(plus, minus, Some((lambda0, big_lambda0)), 0.0)
}
