//! Dense kernels used by the factorization: closed-form square roots of
//! `I + ccᵀ`, the Householder reflector aligning `e₁` with a direction,
//! orthogonality residuals, Haar sampling of orthogonal matrices and the
//! hyperbolic boost `T_α`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm, DenseMatrix};

/// Below this `‖c‖²` the square root is returned as the identity.
pub const RANK_ONE_UNDERFLOW: f64 = 1e-300;

/// Reflector direction norms at or below this are treated as `c ∥ +e₁`.
pub const PARALLEL_THRESHOLD: f64 = 1e-14;

/// Closed-form data for `√(I + ccᵀ) = I + β ccᵀ`.
///
/// `a = √(1 + ‖c‖²)` and `β = 1/(a + 1)`, which equals `(a − 1)/‖c‖²`
/// without the cancellation for small `‖c‖`. The inverse is
/// `I + γ ccᵀ` with `γ = −1/(a(a + 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSqrt {
    c: Vec<f64>,
    a: f64,
    beta: f64,
}

impl RankOneSqrt {
    pub fn new(c: &[f64]) -> Self {
        let norm_c = norm(c);
        let a = 1f64.hypot(norm_c);
        let beta = if norm_c * norm_c < RANK_ONE_UNDERFLOW { 0.0 } else { 1.0 / (a + 1.0) };
        Self { c: c.to_vec(), a, beta }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `√(1 + ‖c‖²)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Coefficient of `ccᵀ` in the inverse square root.
    pub fn gamma(&self) -> f64 {
        if self.beta == 0.0 {
            0.0
        } else {
            -1.0 / (self.a * (self.a + 1.0))
        }
    }

    pub fn matrix(&self) -> DenseMatrix {
        identity_plus_rank_one(self.beta, &self.c)
    }

    pub fn inverse_matrix(&self) -> DenseMatrix {
        identity_plus_rank_one(self.gamma(), &self.c)
    }

    /// `P M` for `P = √(I + ccᵀ)`, as `M + β c (cᵀM)` in `O(m·cols)`.
    pub fn mul_left(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        apply_rank_one_left(self.beta, &self.c, m)
    }

    /// `P⁻¹ M`, as `M + γ c (cᵀM)`.
    pub fn inverse_mul_left(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        apply_rank_one_left(self.gamma(), &self.c, m)
    }
}

/// `I + coef·ccᵀ`, filled from the upper triangle so it is exactly symmetric.
fn identity_plus_rank_one(coef: f64, c: &[f64]) -> DenseMatrix {
    let mut m = DenseMatrix::identity(c.len());
    if coef == 0.0 {
        return m;
    }
    for i in 0..c.len() {
        for j in i..c.len() {
            let v = coef * (c[i] * c[j]);
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
    }
    m
}

fn apply_rank_one_left(coef: f64, c: &[f64], m: &DenseMatrix) -> Result<DenseMatrix> {
    let ct_m = m.transpose_mul_vec(c)?;
    let mut out = m.clone();
    if coef != 0.0 {
        out.rank_one_update(coef, c, &ct_m)?;
    }
    Ok(out)
}

/// `√(I + ccᵀ)` in closed form. `c` must be non-empty and finite.
pub fn sqrt_rank_one(c: &[f64]) -> DenseMatrix {
    RankOneSqrt::new(c).matrix()
}

/// `√(I + ccᵀ)⁻¹` in closed form.
pub fn inv_sqrt_rank_one(c: &[f64]) -> DenseMatrix {
    RankOneSqrt::new(c).inverse_matrix()
}

/// Householder reflector `V = I − 2wwᵀ/(wᵀw)` with `w = c/‖c‖ − e₁`, so that
/// `V e₁ = c/‖c‖`. Returns `I` for `c = 0` or `c` parallel to `+e₁`.
///
/// No sign flip is applied: the reflector must send `e₁` to `+c/‖c‖`.
pub fn householder_to_direction(c: &[f64]) -> DenseMatrix {
    let m = c.len();
    let norm_c = norm(c);
    if norm_c == 0.0 {
        return DenseMatrix::identity(m);
    }
    let mut w: Vec<f64> = c.iter().map(|v| v / norm_c).collect();
    let tail_sq: f64 = w[1..].iter().map(|v| v * v).sum();
    // u₁ − 1 = −‖u_tail‖²/(1 + u₁) avoids cancellation when u ≈ e₁.
    w[0] = if w[0] > 0.0 { -tail_sq / (1.0 + w[0]) } else { w[0] - 1.0 };
    let ww = w[0] * w[0] + tail_sq;
    if ww.sqrt() <= PARALLEL_THRESHOLD {
        return DenseMatrix::identity(m);
    }
    let mut v = DenseMatrix::identity(m);
    v.rank_one_update(-2.0 / ww, &w, &w).expect("square by construction");
    v
}

/// `‖MᵀM − I‖_F`.
pub fn orthogonality_residual(m: &DenseMatrix) -> Result<f64> {
    let side = m.require_square()?;
    let gram = m.transpose_matmul(m)?;
    gram.distance(&DenseMatrix::identity(side))
}

/// Haar-distributed `m x m` orthogonal matrix, reproducible from `seed`.
///
/// The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`;
/// entries are drawn row by row from the standard normal (ziggurat) and
/// the orthogonal factor of their Householder QR is returned with column
/// signs chosen so that `R` has a positive diagonal.
pub fn sample_haar_orthogonal(m: usize, seed: u64) -> Result<DenseMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_orthogonal_with(m, &mut rng)
}

/// [`sample_haar_orthogonal`] drawing from a caller-supplied generator.
pub fn haar_orthogonal_with<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DenseMatrix> {
    if m < 1 {
        return Err(Error::DimensionTooSmall { min: 1, actual: m });
    }
    let data: Vec<f64> = (0..m * m).map(|_| rng.sample(StandardNormal)).collect();
    let gaussian = DenseMatrix::new(m, m, data)?;
    Ok(sign_corrected_q(&gaussian))
}

/// Orthogonal factor `Q·diag(sign(R_kk))` of a square matrix.
///
/// Works on `Aᵀ` so every reflector touches contiguous rows.
fn sign_corrected_q(a: &DenseMatrix) -> DenseMatrix {
    let m = a.nrows();
    let mut at = a.transpose();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m);
    let mut r_diag = vec![0.0; m];

    for k in 0..m {
        let x = &at.row(k)[k..];
        let alpha = x[0];
        let tail_sq: f64 = x[1..].iter().map(|v| v * v).sum();
        if tail_sq == 0.0 {
            r_diag[k] = alpha;
            reflectors.push((Vec::new(), 0.0));
            continue;
        }
        let norm_x = alpha.hypot(tail_sq.sqrt());
        let beta = if alpha >= 0.0 { -norm_x } else { norm_x };
        let mut v = x.to_vec();
        v[0] = alpha - beta;
        let tau = 2.0 / dot(&v, &v);
        r_diag[k] = beta;
        for j in k..m {
            let row = &mut at.row_mut(j)[k..];
            let s = tau * dot(&v, row);
            axpy(-s, &v, row);
        }
        reflectors.push((v, tau));
    }

    // Qᵀ accumulated as rows: (H_k Q)ᵀ = Qᵀ H_k, applied last to first.
    let mut qt = DenseMatrix::identity(m);
    for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
        if *tau == 0.0 {
            continue;
        }
        for i in 0..m {
            let row = &mut qt.row_mut(i)[k..];
            let s = tau * dot(v, row);
            axpy(-s, v, row);
        }
    }
    // Rows of qt are columns of Q; flip those whose R_kk is negative.
    for (k, &r) in r_diag.iter().enumerate() {
        if r < 0.0 {
            qt.row_mut(k).iter_mut().for_each(|v| *v = -*v);
        }
    }
    qt.transpose()
}

/// `T_α`: `[[√(1+α²), α], [α, √(1+α²)]]` bordered by `I_{n−2}`.
pub fn boost_matrix(alpha: f64, n: usize) -> Result<DenseMatrix> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("must be finite and non-negative, got {alpha}"),
        });
    }
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: n });
    }
    let cosh = 1f64.hypot(alpha);
    let mut t = DenseMatrix::identity(n);
    t[(0, 0)] = cosh;
    t[(1, 1)] = cosh;
    t[(0, 1)] = alpha;
    t[(1, 0)] = alpha;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::signature_matrix;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
        a.distance(b).unwrap() <= tol
    }

    #[test]
    fn sqrt_of_zero_is_identity() {
        assert_eq!(sqrt_rank_one(&[0.0, 0.0, 0.0]), DenseMatrix::identity(3));
        assert_eq!(inv_sqrt_rank_one(&[0.0, 0.0]), DenseMatrix::identity(2));
    }

    #[test]
    fn sqrt_along_first_axis() {
        let p = sqrt_rank_one(&[1.0, 0.0, 0.0]);
        assert!(close(&p, &DenseMatrix::from_diag(&[2f64.sqrt(), 1.0, 1.0]), 1e-15));
        let pinv = inv_sqrt_rank_one(&[1.0, 0.0, 0.0]);
        assert!(close(&pinv, &DenseMatrix::from_diag(&[1.0 / 2f64.sqrt(), 1.0, 1.0]), 1e-15));
    }

    #[test]
    fn sqrt_three_four_squares_back() {
        let c = [3.0, 4.0];
        let p = sqrt_rank_one(&c);
        let target = DenseMatrix::from_rows(&[vec![10.0, 12.0], vec![12.0, 17.0]]).unwrap();
        let p2 = p.matmul(&p).unwrap();
        for (x, y) in p2.as_slice().iter().zip(target.as_slice()) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
        // eigen-route: I + ccᵀ has eigenvalues 26 (along c/5) and 1.
        let u = [0.6, 0.8];
        let mut oracle = DenseMatrix::identity(2);
        oracle.rank_one_update(26f64.sqrt() - 1.0, &u, &u).unwrap();
        assert!(close(&p, &oracle, 1e-13));
    }

    #[test]
    fn tiny_c_keeps_half_coefficient() {
        let r = RankOneSqrt::new(&[1e-9, 0.0]);
        assert!((r.beta() - 0.5).abs() < 1e-15);
        assert_eq!(RankOneSqrt::new(&[1e-200]).beta(), 0.0);
    }

    #[test]
    fn inverse_of_random_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c: Vec<f64> = (0..7).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect();
        let prod = sqrt_rank_one(&c).matmul(&inv_sqrt_rank_one(&c)).unwrap();
        assert!(close(&prod, &DenseMatrix::identity(7), 1e-12));
    }

    #[test]
    fn rank_one_apply_matches_dense_product() {
        let r = RankOneSqrt::new(&[0.5, -2.0, 1.0]);
        let m = sample_haar_orthogonal(3, 4).unwrap();
        assert!(close(&r.mul_left(&m).unwrap(), &r.matrix().matmul(&m).unwrap(), 1e-13));
        assert!(close(
            &r.inverse_mul_left(&m).unwrap(),
            &r.inverse_matrix().matmul(&m).unwrap(),
            1e-13
        ));
    }

    #[test]
    fn householder_examples() {
        assert_eq!(householder_to_direction(&[2.0, 0.0, 0.0]), DenseMatrix::identity(3));
        assert_eq!(householder_to_direction(&[0.0, 0.0]), DenseMatrix::identity(2));
        let swap = householder_to_direction(&[0.0, 1.0]);
        assert!(close(&swap, &DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap(), 1e-15));
        // anti-parallel: e₁ must go to −e₁, not stay fixed
        let flip = householder_to_direction(&[-3.0, 0.0]);
        assert!((flip[(0, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn householder_random_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
        let v = householder_to_direction(&c);
        let nc = norm(&c);
        let err: f64 = v.column(0).iter().zip(&c).map(|(x, y)| (x - y / nc).powi(2)).sum();
        assert!(err.sqrt() <= 1e-12);
        assert!(orthogonality_residual(&v).unwrap() <= 1e-12);
    }

    #[test]
    fn orthogonality_residual_examples() {
        assert_eq!(orthogonality_residual(&DenseMatrix::identity(4)).unwrap(), 0.0);
        assert_eq!(orthogonality_residual(&DenseMatrix::from_diag(&[1.0, 2.0])).unwrap(), 3.0);
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(orthogonality_residual(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn haar_basic_contracts() {
        assert!(sample_haar_orthogonal(0, 1).is_err());
        let mut plus = 0;
        for seed in 0..200 {
            let q = sample_haar_orthogonal(1, seed).unwrap();
            assert_eq!(q[(0, 0)].abs(), 1.0);
            plus += usize::from(q[(0, 0)] > 0.0);
        }
        assert!((60..140).contains(&plus), "{plus} positive of 200");
        for seed in 0..20 {
            let q = sample_haar_orthogonal(5, seed).unwrap();
            assert!(orthogonality_residual(&q).unwrap() <= 1e-12);
        }
        assert_eq!(sample_haar_orthogonal(6, 42).unwrap(), sample_haar_orthogonal(6, 42).unwrap());
        assert_ne!(sample_haar_orthogonal(6, 42).unwrap(), sample_haar_orthogonal(6, 43).unwrap());
    }

    #[test]
    fn haar_first_column_is_uniform() {
        let m = 4;
        let seeds = 4000;
        let mut mean = vec![0.0; m];
        let mut second = vec![0.0; m];
        for seed in 0..seeds {
            let col = sample_haar_orthogonal(m, seed).unwrap().column(0);
            assert!((norm(&col) - 1.0).abs() <= 1e-12);
            for i in 0..m {
                mean[i] += col[i] / seeds as f64;
                second[i] += col[i] * col[i] / seeds as f64;
            }
        }
        // uniform on S³: mean 0, E[x_i²] = 1/4, sd of the sample mean ≈ 0.008
        for i in 0..m {
            assert!(mean[i].abs() < 0.04, "mean[{i}] = {}", mean[i]);
            assert!((second[i] - 0.25).abs() < 0.03, "second[{i}] = {}", second[i]);
        }
    }

    #[test]
    fn haar_without_sign_fix_would_bias_diagonal() {
        // With the sign correction, diagonal entries are symmetric about 0.
        let total: f64 = (0..2000).map(|s| sample_haar_orthogonal(3, s).unwrap()[(0, 0)]).sum();
        assert!((total / 2000.0).abs() < 0.05);
    }

    #[test]
    fn boost_examples() {
        assert_eq!(boost_matrix(0.0, 4).unwrap(), DenseMatrix::identity(4));
        let s2 = 2f64.sqrt();
        let expected =
            DenseMatrix::from_rows(&[[s2, 1.0, 0.0], [1.0, s2, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(close(&boost_matrix(1.0, 3).unwrap(), &expected, 1e-15));
        assert!(boost_matrix(-0.1, 3).is_err());
        assert!(boost_matrix(1.0, 1).is_err());
        assert_eq!(boost_matrix(2.0, 2).unwrap().nrows(), 2);
    }

    #[test]
    fn boost_lower_block_is_rank_one_sqrt() {
        for alpha in [0.0, 0.3, 5.0] {
            let t = boost_matrix(alpha, 5).unwrap();
            let mut e1 = vec![0.0; 4];
            e1[0] = alpha;
            let p = sqrt_rank_one(&e1);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((t[(i + 1, j + 1)] - p[(i, j)]).abs() <= 1e-14);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sqrt_squares_to_target(
            dir in prop::collection::vec(-1.0f64..1.0, 1..8),
            scale in prop::sample::select(vec![0.0, 1e-12, 1e-3, 1.0, 37.0, 1e6]),
        ) {
            let c: Vec<f64> = dir.iter().map(|v| v * scale).collect();
            let p = sqrt_rank_one(&c);
            let mut target = DenseMatrix::identity(c.len());
            target.rank_one_update(1.0, &c, &c).unwrap();
            let diff = p.matmul(&p).unwrap().distance(&target).unwrap();
            prop_assert!(diff <= 1e-12 * target.frobenius_norm().max(1.0));
            prop_assert_eq!(p.transpose(), p.clone());
            // P c = a c
            let pc = p.mul_vec(&c).unwrap();
            let a = 1f64.hypot(norm(&c));
            let err: f64 = pc.iter().zip(&c).map(|(x, y)| (x - a * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12 * (a * norm(&c)).max(1.0));
        }

        #[test]
        fn householder_symmetric_involution(c in prop::collection::vec(-5.0f64..5.0, 1..9)) {
            let v = householder_to_direction(&c);
            prop_assert!(v.distance(&v.transpose()).unwrap() <= 1e-13);
            let v2 = v.matmul(&v).unwrap();
            prop_assert!(v2.distance(&DenseMatrix::identity(c.len())).unwrap() <= 1e-13);
            prop_assert!(orthogonality_residual(&v).unwrap() <= 1e-13);
        }

        #[test]
        fn boost_preserves_signature(alpha in 0.0f64..100.0, n in 2usize..9) {
            let t = boost_matrix(alpha, n).unwrap();
            let j = signature_matrix(n).unwrap();
            let tjt = t.transpose_matmul(&j.matmul(&t).unwrap()).unwrap();
            prop_assert!(tjt.distance(&j).unwrap() <= 1e-12 * (1.0 + alpha * alpha));
            // determinant of the 2x2 block; the rest is the identity
            let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(1, 0)];
            prop_assert!((det - 1.0).abs() <= 1e-12 * (1.0 + alpha * alpha));
        }
    }
}
