use nalgebra::{DMatrix, DVector};

use super::VectorField;
use crate::error::{check_len, Error, Result};

/// `min_{z1} max_{z2} z1' A z2`, with equilibrium at the origin.
#[derive(Clone, Debug)]
pub struct BilinearGame {
    pub coupling: DMatrix<f64>,
}

impl BilinearGame {
    pub fn new(coupling: DMatrix<f64>) -> Self {
        Self { coupling }
    }

    /// Scalar coupling `a`: `min_x max_y a*x*y`.
    pub fn scalar(a: f64) -> Self {
        Self::new(DMatrix::from_element(1, 1, a))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.coupling.shape()
    }

    /// `F(z1, z2) = (A z2, -A' z1)`.
    pub fn field(&self) -> VectorField {
        let a = self.coupling.clone();
        let (d1, d2) = a.shape();
        VectorField::new("bilinear", d1 + d2, move |z| {
            let z1 = DVector::from_column_slice(&z[..d1]);
            let z2 = DVector::from_column_slice(&z[d1..]);
            let g1 = &a * z2;
            let g2 = -(a.transpose() * z1);
            g1.iter().chain(g2.iter()).copied().collect()
        })
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `(diag(p) - p p') v`, the softmax Jacobian (symmetric) applied to `v`.
pub fn softmax_jacobian_apply(p: &[f64], v: &[f64]) -> Vec<f64> {
    let pv: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
    p.iter().zip(v).map(|(pi, vi)| pi * (vi - pv)).collect()
}

/// Two-player zero-sum matrix game played with softmax policies.
///
/// Player 1 receives `pi1' A pi2`, player 2 its negation.
#[derive(Clone, Debug)]
pub struct SoftmaxMatrixGame {
    pub payoff: DMatrix<f64>,
}

impl SoftmaxMatrixGame {
    pub fn new(payoff: DMatrix<f64>) -> Self {
        Self { payoff }
    }

    pub fn rock_paper_scissors() -> Self {
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(3, 3, &[
             0.0, -1.0,  1.0,
             1.0,  0.0, -1.0,
            -1.0,  1.0,  0.0,
        ]);
        Self::new(a)
    }

    pub fn matching_pennies() -> Self {
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]))
    }

    pub fn actions(&self) -> usize {
        self.payoff.nrows()
    }

    /// Splits a joint logit vector into both players' policies.
    pub fn policies(&self, logits: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.actions();
        check_len("joint logits", logits.len(), 2 * m)?;
        Ok((softmax(&logits[..m]), softmax(&logits[m..])))
    }

    /// `pi1' A pi2` at the given joint logits.
    pub fn expected_payoff(&self, logits: &[f64]) -> Result<f64> {
        let (p1, p2) = self.policies(logits)?;
        let p1 = DVector::from_vec(p1);
        let p2 = DVector::from_vec(p2);
        Ok(p1.dot(&(&self.payoff * p2)))
    }
}

/// Simultaneous-ascent field of the softmax matrix game, negated so that
/// solvers minimize: `F(theta) = (-grad_1 pi1'A pi2, +grad_2 pi1'A pi2)`.
pub fn matrix_game_field(game: &SoftmaxMatrixGame) -> Result<VectorField> {
    if !game.payoff.is_square() {
        let (r, c) = game.payoff.shape();
        return Err(Error::invalid(format!("payoff must be square, got {r}x{c}")));
    }
    let a = game.payoff.clone();
    let m = a.nrows();
    Ok(VectorField::new("softmax-matrix-game", 2 * m, move |z| {
        let p1 = softmax(&z[..m]);
        let p2 = softmax(&z[m..]);
        let a_p2 = &a * DVector::from_column_slice(&p2);
        let at_p1 = a.transpose() * DVector::from_column_slice(&p1);
        let g1 = softmax_jacobian_apply(&p1, a_p2.as_slice());
        let g2 = softmax_jacobian_apply(&p2, at_p1.as_slice());
        g1.iter().map(|g| -g).chain(g2).collect()
    }))
}
