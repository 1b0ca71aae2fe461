//! The spin algebra: `Rⁿ` with the Jordan product
//! `x ∘ y = (⟨x, y⟩, x₀ȳ + y₀x̄)`, its unit and its cone of squares
//! (the Lorentz cone `{x : ‖x̄‖ ≤ x₀}`).

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm, DenseMatrix};

/// An element `(x₀, x̄)` of the spin algebra of dimension `n = 1 + len(x̄) ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinVector {
    x0: f64,
    xbar: Vec<f64>,
}

impl SpinVector {
    pub fn new(x0: f64, xbar: Vec<f64>) -> Result<Self> {
        if xbar.is_empty() {
            return Err(Error::DimensionTooSmall { min: 2, actual: 1 });
        }
        if !x0.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        if let Some(i) = xbar.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(Self { x0, xbar })
    }

    /// Splits a flat `n`-vector into its scalar head and vector tail.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        match flat.split_first() {
            Some((&x0, tail)) => Self::new(x0, tail.to_vec()),
            None => Err(Error::DimensionTooSmall { min: 2, actual: 0 }),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.x0);
        v.extend_from_slice(&self.xbar);
        v
    }

    pub fn dim(&self) -> usize {
        1 + self.xbar.len()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn xbar(&self) -> &[f64] {
        &self.xbar
    }

    /// Euclidean norm of the full `n`-vector.
    pub fn norm(&self) -> f64 {
        self.x0.hypot(norm(&self.xbar))
    }
}

/// Standard inner product of the full vectors.
pub fn inner(x: &SpinVector, y: &SpinVector) -> Result<f64> {
    same_dim(x, y)?;
    Ok(x.x0 * y.x0 + dot(&x.xbar, &y.xbar))
}

pub fn jordan_product(x: &SpinVector, y: &SpinVector) -> Result<SpinVector> {
    let head = inner(x, y)?;
    let mut tail: Vec<f64> = y.xbar.iter().map(|v| x.x0 * v).collect();
    axpy(y.x0, &x.xbar, &mut tail);
    Ok(SpinVector { x0: head, xbar: tail })
}

/// The unit element `e = (1, 0, …, 0)`.
pub fn unit(n: usize) -> Result<SpinVector> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: n });
    }
    Ok(SpinVector { x0: 1.0, xbar: vec![0.0; n - 1] })
}

/// Position of a point relative to the Lorentz cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeRegion {
    Interior,
    Boundary,
    Outside,
}

/// Classifies `x` by the gap `x₀ − ‖x̄‖` against `tol · max(1, ‖x‖)`.
pub fn cone_classify(x: &SpinVector, tol: f64) -> ConeRegion {
    let gap = x.x0 - norm(&x.xbar);
    let band = tol * x.norm().max(1.0);
    if gap > band {
        ConeRegion::Interior
    } else if gap.abs() <= band {
        ConeRegion::Boundary
    } else {
        ConeRegion::Outside
    }
}

/// `J = diag(1, −1, …, −1)`.
pub fn signature_matrix(n: usize) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: n });
    }
    let mut diag = vec![-1.0; n];
    diag[0] = 1.0;
    Ok(DenseMatrix::from_diag(&diag))
}

fn same_dim(x: &SpinVector, y: &SpinVector) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), actual: y.dim() });
    }
    Ok(())
}
