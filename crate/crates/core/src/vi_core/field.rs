use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Result};

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// An operator `F: R^d -> R^d`.
///
/// Cloning is cheap; the evaluation closure is shared.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    name: String,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl VectorField {
    pub fn new<F>(name: impl Into<String>, dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim > 0, "vector field dimension must be positive");
        Self { dim, name: name.into(), eval: Arc::new(eval) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates `F(z)`, rejecting points of the wrong dimension.
    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.name, z.len(), self.dim)?;
        let out = (self.eval)(z);
        check_len(&format!("{} output", self.name), out.len(), self.dim)?;
        Ok(out)
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, move |_| vec![0.0; dim])
    }

    /// `F(z) = z`, the gradient of `||z||^2 / 2`.
    pub fn identity(dim: usize) -> Self {
        Self::new("identity", dim, |z| z.to_vec())
    }

    pub fn negated_identity(dim: usize) -> Self {
        Self::new("negated-identity", dim, |z| z.iter().map(|x| -x).collect())
    }

    /// `F(x, y) = (y, -x)`: the field of `min_x max_y x*y`.
    pub fn rotation() -> Self {
        Self::new("rotation", 2, |z| vec![z[1], -z[0]])
    }

    /// `F(z) = M z + b`.
    pub fn affine(m: DMatrix<f64>, b: DVector<f64>) -> Self {
        assert!(m.is_square(), "affine field needs a square matrix");
        assert_eq!(m.nrows(), b.len(), "affine offset length");
        let dim = b.len();
        Self::new("affine", dim, move |z| {
            let z = DVector::from_column_slice(z);
            (&m * z + &b).iter().copied().collect()
        })
    }
}
