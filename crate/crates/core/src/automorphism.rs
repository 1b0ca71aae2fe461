//! Membership, factorization, composition and sampling for the
//! automorphism group of the Lorentz cone.
//!
//! A square `S` is a cone automorphism iff `SᵀJS = μJ = SJSᵀ` for some
//! `μ > 0` and `S` maps `e` forward (`(Se)₀ > 0`). After scaling to
//! `μ = 1` and writing `S = [[a, bᵀ], [c, D]]`, the congruences unpack into
//!
//! ```text
//! A1: a = √(1 + ‖c‖²)    B1: a = √(1 + ‖b‖²)
//! A2: a b = Dᵀc          B2: a c = D b
//! A3: DᵀD = I + bbᵀ      B3: DDᵀ = I + ccᵀ
//! ```
//!
//! B3 makes `P = √(DDᵀ) = √(I + ccᵀ)` available in closed form, so the
//! polar factor `U = P⁻¹D` costs one rank-one update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernels::{
    boost_matrix, haar_orthogonal_with, householder_to_direction, orthogonality_residual,
    RankOneSqrt,
};
use crate::matrix::{axpy, norm, DenseMatrix};
use crate::spin::SpinVector;
use crate::DEFAULT_TOL;

/// `S = [[a, bᵀ], [c, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockView {
    pub a: f64,
    /// First row tail.
    pub b: Vec<f64>,
    /// First column tail.
    pub c: Vec<f64>,
    pub d: DenseMatrix,
}

impl BlockView {
    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    pub fn reassemble(&self) -> DenseMatrix {
        let n = self.dim();
        let mut s = DenseMatrix::zeros(n, n);
        s[(0, 0)] = self.a;
        s.row_mut(0)[1..].copy_from_slice(&self.b);
        for i in 1..n {
            let row = s.row_mut(i);
            row[0] = self.c[i - 1];
            row[1..].copy_from_slice(self.d.row(i - 1));
        }
        s
    }
}

pub fn split_blocks(s: &DenseMatrix) -> Result<BlockView> {
    let n = require_dim(s)?;
    let b = s.row(0)[1..].to_vec();
    let c = (1..n).map(|i| s[(i, 0)]).collect();
    let mut d = Vec::with_capacity((n - 1) * (n - 1));
    for i in 1..n {
        d.extend_from_slice(&s.row(i)[1..]);
    }
    Ok(BlockView { a: s[(0, 0)], b, c, d: DenseMatrix::new(n - 1, n - 1, d)? })
}

/// Outcome of [`check_automorphism`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutCheckResult {
    pub is_automorphism: bool,
    /// `(SᵀJS)₀₀`; the congruence scale when accepted.
    pub mu: f64,
    /// `max(‖SᵀJS − μJ‖_F, ‖SJSᵀ − μJ‖_F) / max(1, ‖S‖_F²)`.
    pub residual_congruence: f64,
    /// `(Se)₀ > 0`.
    pub cone_forward: bool,
}

impl AutCheckResult {
    /// Human-readable cause of a rejection, `None` when accepted.
    pub fn rejection_reason(&self, tol: f64) -> Option<String> {
        if self.is_automorphism {
            None
        } else if !self.cone_forward {
            Some("maps the cone into its negative: (Se)_0 <= 0".into())
        } else if !(self.mu > tol) {
            Some(format!("congruence scale mu = {:e} is not positive", self.mu))
        } else {
            Some(format!(
                "congruence residual {:.3e} exceeds tolerance {:.3e}",
                self.residual_congruence, tol
            ))
        }
    }
}

/// Tests the scaled congruences `SᵀJS = μJ = SJSᵀ` and cone direction.
pub fn check_automorphism(s: &DenseMatrix, tol: f64) -> Result<AutCheckResult> {
    let n = require_dim(s)?;
    // J S: negate rows 1..; S J: negate columns 1..
    let mut js = s.clone();
    let mut sj = s.clone();
    for i in 1..n {
        js.row_mut(i).iter_mut().for_each(|v| *v = -*v);
        sj.row_mut(i)[1..].iter_mut().for_each(|v| *v = -*v);
    }
    sj.row_mut(0)[1..].iter_mut().for_each(|v| *v = -*v);
    let left = s.transpose_matmul(&js)?;
    let right = sj.matmul_transpose(s)?;

    let mu = left[(0, 0)];
    let mu_j = scaled_signature(n, mu);
    let scale = s.frobenius_norm().powi(2).max(1.0);
    let residual_congruence = left.distance(&mu_j)?.max(right.distance(&mu_j)?) / scale;
    let cone_forward = s[(0, 0)] > 0.0;
    let is_automorphism =
        mu > tol && residual_congruence <= tol && cone_forward && residual_congruence.is_finite();
    Ok(AutCheckResult { is_automorphism, mu, residual_congruence, cone_forward })
}

/// Scales an accepted `S` to `μ = 1`: returns `(ν, S/ν)` with `ν = √μ`.
pub fn normalize(s: &DenseMatrix, check: &AutCheckResult) -> Result<(f64, DenseMatrix)> {
    if !check.is_automorphism {
        return Err(Error::NotAutomorphism {
            reason: "cannot normalize a rejected matrix".into(),
        });
    }
    let nu = check.mu.sqrt();
    Ok((nu, s.scaled(1.0 / nu)))
}

/// `S = ν [[a, cᵀ], [c, P]] diag(1, U)` with `a = √(1+‖c‖²)`, `P = √(I+ccᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactFactorization {
    pub nu: f64,
    pub c: Vec<f64>,
    pub u: DenseMatrix,
}

impl CompactFactorization {
    pub fn dim(&self) -> usize {
        self.c.len() + 1
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        validate_nu(self.nu)?;
        if self.c.is_empty() {
            return Err(Error::DimensionTooSmall { min: 2, actual: 1 });
        }
        if let Some(i) = self.c.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        validate_orthogonal(&self.u, self.c.len(), tol)
    }
}

/// `S = ν diag(1, V) T_α diag(1, Vᵀ) diag(1, U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFactorization {
    pub nu: f64,
    pub alpha: f64,
    pub v: DenseMatrix,
    pub u: DenseMatrix,
}

impl CanonicalFactorization {
    pub fn dim(&self) -> usize {
        self.u.nrows() + 1
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        validate_nu(self.nu)?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be finite and non-negative, got {}", self.alpha),
            });
        }
        let m = self.u.nrows();
        validate_orthogonal(&self.v, m, tol)?;
        validate_orthogonal(&self.u, m, tol)
    }

    /// The compact form of the same matrix: `c = α V e₁`.
    pub fn to_compact(&self) -> CompactFactorization {
        let c = self.v.column(0).iter().map(|v| self.alpha * v).collect();
        CompactFactorization { nu: self.nu, c, u: self.u.clone() }
    }
}

fn validate_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "nu", reason: format!("must be positive, got {nu}") })
    }
}

fn validate_orthogonal(q: &DenseMatrix, m: usize, tol: f64) -> Result<()> {
    let side = q.require_square()?;
    if side != m {
        return Err(Error::DimensionMismatch { expected: m, actual: side });
    }
    let residual = orthogonality_residual(q)?;
    let bound = tol * (m as f64).max(1.0);
    if residual <= bound {
        Ok(())
    } else {
        Err(Error::NotOrthogonal { residual, bound })
    }
}

/// Factors an automorphism as `ν [[a, cᵀ], [c, P]] diag(1, U)`.
///
/// `U = P⁻¹D` must come out orthogonal to `tol · (n − 1)`; otherwise the
/// congruence test only passed within noise and the input is rejected.
pub fn factor_compact(s: &DenseMatrix, tol: f64) -> Result<CompactFactorization> {
    let check = check_automorphism(s, tol)?;
    if let Some(reason) = check.rejection_reason(tol) {
        return Err(Error::NotAutomorphism { reason });
    }
    let (nu, s_hat) = normalize(s, &check)?;
    let blocks = split_blocks(&s_hat)?;
    let u = RankOneSqrt::new(&blocks.c).inverse_mul_left(&blocks.d)?;
    validate_orthogonal(&u, blocks.c.len(), tol)?;
    Ok(CompactFactorization { nu, c: blocks.c, u })
}

/// Factors an automorphism as `ν diag(1, V) T_α diag(1, Vᵀ) diag(1, U)`
/// with `α = ‖c‖` and `V` the reflector sending `e₁` to `c/‖c‖`.
pub fn factor_canonical(s: &DenseMatrix, tol: f64) -> Result<CanonicalFactorization> {
    let compact = factor_compact(s, tol)?;
    let alpha = norm(&compact.c);
    let v = householder_to_direction(&compact.c);
    Ok(CanonicalFactorization { nu: compact.nu, alpha, v, u: compact.u })
}

pub fn compose_compact(f: &CompactFactorization) -> Result<DenseMatrix> {
    compose_compact_with_tol(f, DEFAULT_TOL)
}

/// [`compose_compact`] validating `U` against a caller tolerance.
pub fn compose_compact_with_tol(f: &CompactFactorization, tol: f64) -> Result<DenseMatrix> {
    f.validate(tol)?;
    let root = RankOneSqrt::new(&f.c);
    let pu = root.mul_left(&f.u)?;
    let ct_u = f.u.transpose_mul_vec(&f.c)?;
    let n = f.dim();
    let mut s = DenseMatrix::zeros(n, n);
    s[(0, 0)] = root.a();
    s.row_mut(0)[1..].copy_from_slice(&ct_u);
    for i in 1..n {
        let row = s.row_mut(i);
        row[0] = f.c[i - 1];
        row[1..].copy_from_slice(pu.row(i - 1));
    }
    Ok(s.scaled(f.nu))
}

pub fn compose_canonical(f: &CanonicalFactorization) -> Result<DenseMatrix> {
    compose_canonical_with_tol(f, DEFAULT_TOL)
}

/// [`compose_canonical`] validating `U`, `V` against a caller tolerance.
///
/// Multiplies the four factors explicitly; it shares no arithmetic with
/// [`compose_compact`].
pub fn compose_canonical_with_tol(f: &CanonicalFactorization, tol: f64) -> Result<DenseMatrix> {
    f.validate(tol)?;
    let outer = DenseMatrix::bordered_identity(&f.v);
    let boost = boost_matrix(f.alpha, f.dim())?;
    let right = DenseMatrix::bordered_identity(&f.u);
    let conj = outer.matmul(&boost)?.matmul_transpose(&outer)?;
    Ok(conj.matmul(&right)?.scaled(f.nu))
}

/// Draws `ν ~ U[nu_min, nu_max]`, `α ~ U[0, alpha_max]` and Haar `V`, `U`.
///
/// Uses one ChaCha8 stream seeded with `seed`, consumed in that order.
pub fn sample_canonical_factorization(
    n: usize,
    alpha_max: f64,
    nu_range: (f64, f64),
    seed: u64,
) -> Result<CanonicalFactorization> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: n });
    }
    if !(alpha_max >= 0.0 && alpha_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha_max",
            reason: format!("must be finite and non-negative, got {alpha_max}"),
        });
    }
    let (nu_min, nu_max) = nu_range;
    if !(nu_min > 0.0 && nu_min <= nu_max && nu_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nu_range",
            reason: format!("need 0 < nu_min <= nu_max, got ({nu_min}, {nu_max})"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = rng.random_range(nu_min..=nu_max);
    let alpha = rng.random_range(0.0..=alpha_max);
    let v = haar_orthogonal_with(n - 1, &mut rng)?;
    let u = haar_orthogonal_with(n - 1, &mut rng)?;
    Ok(CanonicalFactorization { nu, alpha, v, u })
}

/// A random automorphism: [`compose_canonical`] of a sampled factorization.
pub fn sample_automorphism(
    n: usize,
    alpha_max: f64,
    nu_range: (f64, f64),
    seed: u64,
) -> Result<DenseMatrix> {
    compose_canonical(&sample_canonical_factorization(n, alpha_max, nu_range, seed)?)
}

/// `(1/μ) J Sᵀ J`, the inverse of an accepted automorphism.
pub fn congruence_inverse(s: &DenseMatrix, check: &AutCheckResult) -> Result<DenseMatrix> {
    if !check.is_automorphism {
        return Err(Error::NotAutomorphism { reason: "inverse of a rejected matrix".into() });
    }
    let n = require_dim(s)?;
    let mut inv = s.transpose().scaled(1.0 / check.mu);
    for i in 0..n {
        for j in 0..n {
            if (i == 0) != (j == 0) {
                inv[(i, j)] = -inv[(i, j)];
            }
        }
    }
    Ok(inv)
}

/// Residuals of the six block identities plus sampled cone behaviour.
///
/// Identity residuals are `‖lhs − rhs‖ / max(1, ‖Ŝ‖_F)` on the normalized
/// matrix `Ŝ`. Cone statistics are relative: the gap `‖ȳ‖ − y₀` of an
/// image `y = Ŝx` is divided by `max(1, ‖y‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyReport {
    /// Scale used for normalization, `μ = tr(JSᵀJS)/n`.
    pub mu: f64,
    pub residual_a1: f64,
    pub residual_a2: f64,
    pub residual_a3: f64,
    pub residual_b1: f64,
    pub residual_b2: f64,
    pub residual_b3: f64,
    /// Worst `max(0, ‖ȳ‖ − y₀)` over interior and boundary samples.
    pub cone_violation_max: f64,
    /// Worst `|‖ȳ‖ − y₀|` over boundary samples.
    pub boundary_drift_max: f64,
}

impl PropertyReport {
    pub fn identity_residuals(&self) -> [(&'static str, f64); 6] {
        [
            ("residual_A1", self.residual_a1),
            ("residual_A2", self.residual_a2),
            ("residual_A3", self.residual_a3),
            ("residual_B1", self.residual_b1),
            ("residual_B2", self.residual_b2),
            ("residual_B3", self.residual_b3),
        ]
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residuals().iter().fold(0.0, |m, (_, r)| m.max(*r))
    }

    /// Every residual and cone statistic is at most `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.max_identity_residual() <= tol
            && self.cone_violation_max <= tol
            && self.boundary_drift_max <= tol
    }
}

/// Evaluates identities A1–B3 and samples cone preservation.
///
/// Normalization uses the least-squares scale `μ = tr(JSᵀJS)/n`, which
/// equals the congruence scale for true automorphisms. Unlike `(SᵀJS)₀₀`
/// it does not make A1 hold by construction, so a perturbed matrix still
/// shows up in every identity it breaks. Fails only when `μ ≤ tol`.
pub fn property_report(
    s: &DenseMatrix,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    let n = require_dim(s)?;
    let mu = fitted_mu(s);
    if !(mu > tol) {
        return Err(Error::NotAutomorphism {
            reason: format!("fitted congruence scale {mu:e} is not positive"),
        });
    }
    let s_hat = s.scaled(1.0 / mu.sqrt());
    let scale = s_hat.frobenius_norm().max(1.0);
    let BlockView { a, b, c, d } = split_blocks(&s_hat)?;
    let m = n - 1;

    let residual_a1 = (a - 1f64.hypot(norm(&c))).abs() / scale;
    let residual_b1 = (a - 1f64.hypot(norm(&b))).abs() / scale;

    let mut a2 = d.transpose_mul_vec(&c)?;
    axpy(-a, &b, &mut a2);
    let residual_a2 = norm(&a2) / scale;

    let mut b2 = d.mul_vec(&b)?;
    axpy(-a, &c, &mut b2);
    let residual_b2 = norm(&b2) / scale;

    let mut a3 = d.transpose_matmul(&d)?;
    a3.rank_one_update(-1.0, &b, &b)?;
    let residual_a3 = a3.distance(&DenseMatrix::identity(m))? / scale;

    let mut b3 = d.matmul_transpose(&d)?;
    b3.rank_one_update(-1.0, &c, &c)?;
    let residual_b3 = b3.distance(&DenseMatrix::identity(m))? / scale;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cone_violation_max: f64 = 0.0;
    let mut boundary_drift_max: f64 = 0.0;
    for _ in 0..n_samples {
        let (radius, dir) = sample_radius_direction(m, &mut rng);
        let lift = 1.0 - rng.random::<f64>();
        let boundary: Vec<f64> = std::iter::once(radius)
            .chain(dir.iter().map(|v| radius * v))
            .collect();
        let mut interior = boundary.clone();
        interior[0] = radius * (1.0 + lift);

        let gap_b = cone_gap(&s_hat, &boundary)?;
        let gap_i = cone_gap(&s_hat, &interior)?;
        cone_violation_max = cone_violation_max.max(gap_b).max(gap_i);
        boundary_drift_max = boundary_drift_max.max(gap_b.abs());
    }

    Ok(PropertyReport {
        mu,
        residual_a1,
        residual_a2,
        residual_a3,
        residual_b1,
        residual_b2,
        residual_b3,
        cone_violation_max,
        boundary_drift_max,
    })
}

/// `tr(JSᵀJS)/n = Σᵢⱼ JᵢJⱼ Sᵢⱼ² / n`.
fn fitted_mu(s: &DenseMatrix) -> f64 {
    let n = s.nrows();
    let total: f64 = s
        .rows()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(j, v)| {
                let sign = if (i == 0) == (j == 0) { 1.0 } else { -1.0 };
                sign * v * v
            })
        })
        .sum();
    total / n as f64
}

/// Radius uniform in `(0, 10]`, direction uniform on the unit sphere.
fn sample_radius_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (f64, Vec<f64>) {
    let radius = 10.0 * (1.0 - rng.random::<f64>());
    loop {
        let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&g);
        if len > 0.0 {
            return (radius, g.into_iter().map(|v| v / len).collect());
        }
    }
}

/// `(‖ȳ‖ − y₀) / max(1, ‖y‖)` for `y = S x`.
fn cone_gap(s: &DenseMatrix, x: &[f64]) -> Result<f64> {
    let y = s.mul_vec(x)?;
    let tail = norm(&y[1..]);
    Ok((tail - y[0]) / y[0].hypot(tail).max(1.0))
}

pub fn apply(s: &DenseMatrix, x: &SpinVector) -> Result<SpinVector> {
    if s.ncols() != x.dim() {
        return Err(Error::DimensionMismatch { expected: s.ncols(), actual: x.dim() });
    }
    SpinVector::from_flat(&s.mul_vec(&x.to_flat())?)
}

/// `diag(1, D)` for orthogonal `D`: an automorphism of the Jordan algebra.
pub fn algebra_automorphism(d: &DenseMatrix) -> Result<DenseMatrix> {
    let m = d.require_square()?;
    validate_orthogonal(d, m, DEFAULT_TOL)?;
    Ok(DenseMatrix::bordered_identity(d))
}

fn require_dim(s: &DenseMatrix) -> Result<usize> {
    let n = s.require_square()?;
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: n });
    }
    Ok(n)
}

fn scaled_signature(n: usize, mu: f64) -> DenseMatrix {
    let mut diag = vec![-mu; n];
    diag[0] = mu;
    DenseMatrix::from_diag(&diag)
}
