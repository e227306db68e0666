use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VectorField;
use crate::error::{check_len, Error, Result};

pub const DEFAULT_PROBE_PAIRS: usize = 1000;

/// Eigenvalues are only computed up to this dimension.
pub const EIGEN_MAX_DIM: usize = 8;

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    /// `min <z - z', F(z) - F(z')>` over all sampled pairs.
    pub min_inner_product: f64,
    /// First sampled pair with a negative inner product.
    pub violating_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub pairs: usize,
}

impl MonotonicityReport {
    /// No violation was found. Evidence of monotonicity, not proof.
    pub fn looks_monotone(&self) -> bool {
        self.violating_pair.is_none()
    }
}

/// Uniform points on `[-1, 1]^dim`.
pub fn uniform_sampler(dim: usize, seed: u64) -> impl FnMut() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Samples `pairs` pairs `(z, z')` and reports the smallest monotonicity inner product.
pub fn monotonicity_probe(
    f: &VectorField,
    sampler: &mut dyn FnMut() -> Vec<f64>,
    pairs: usize,
) -> Result<MonotonicityReport> {
    if pairs == 0 {
        return Err(Error::invalid("monotonicity probe needs at least one pair"));
    }
    let mut min_inner = f64::INFINITY;
    let mut violating = None;
    for _ in 0..pairs {
        let z = sampler();
        let zp = sampler();
        let fz = f.eval(&z)?;
        let fzp = f.eval(&zp)?;
        let inner: f64 = z.iter().zip(&zp).zip(fz.iter().zip(&fzp)).map(|((a, b), (fa, fb))| (a - b) * (fa - fb)).sum();
        if inner < 0.0 && violating.is_none() {
            violating = Some((z.clone(), zp.clone()));
        }
        min_inner = min_inner.min(inner);
    }
    Ok(MonotonicityReport { min_inner_product: min_inner, violating_pair: violating, pairs })
}

#[derive(Clone, Debug)]
pub struct JacobianReport {
    pub jacobian: DMatrix<f64>,
    /// Frobenius norm of `(J + J') / 2`.
    pub symmetric_norm: f64,
    /// Frobenius norm of `(J - J') / 2`.
    pub antisymmetric_norm: f64,
    /// Only for fields of dimension at most [`EIGEN_MAX_DIM`].
    pub eigenvalues: Option<Vec<Complex<f64>>>,
}

impl JacobianReport {
    /// Any eigenvalue with a non-negligible imaginary part.
    pub fn has_rotation(&self) -> Option<bool> {
        let scale = self.jacobian.norm().max(1.0);
        self.eigenvalues.as_ref().map(|eig| eig.iter().any(|l| l.im.abs() > 1e-8 * scale))
    }
}

/// Central finite-difference Jacobian at `z` with its symmetric/antisymmetric split.
pub fn jacobian_probe(f: &VectorField, z: &[f64], h: f64) -> Result<JacobianReport> {
    check_len("jacobian probe point", z.len(), f.dim())?;
    if h <= 0.0 {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {h}")));
    }
    let d = f.dim();
    let mut jac = DMatrix::zeros(d, d);
    let mut probe = z.to_vec();
    for j in 0..d {
        probe[j] = z[j] + h;
        let hi = f.eval(&probe)?;
        probe[j] = z[j] - h;
        let lo = f.eval(&probe)?;
        probe[j] = z[j];
        for i in 0..d {
            jac[(i, j)] = (hi[i] - lo[i]) / (2.0 * h);
        }
    }
    let jt = jac.transpose();
    let symmetric_norm = ((&jac + &jt) * 0.5).norm();
    let antisymmetric_norm = ((&jac - &jt) * 0.5).norm();
    let eigenvalues = (d <= EIGEN_MAX_DIM).then(|| jac.complex_eigenvalues().iter().copied().collect());
    Ok(JacobianReport { jacobian: jac, symmetric_norm, antisymmetric_norm, eigenvalues })
}
