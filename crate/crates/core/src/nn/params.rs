use std::ops::{Deref, DerefMut};

use crate::error::{check_len, Result};
use crate::Scalar;

/// Flat parameter (or gradient) storage for one network.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamVector<T>(pub Vec<T>);

impl<T: Scalar> ParamVector<T> {
    pub fn zeros(len: usize) -> Self {
        Self(vec![T::zero(); len])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.f64() * x.f64()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                let d = a.f64() - b.f64();
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }
}

impl<T> Deref for ParamVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for ParamVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for ParamVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// `tau * online + (1 - tau) * target`.
///
/// `tau = 1` returns `online` bit for bit; `tau = 0` returns `target`.
pub fn soft_update<T: Scalar>(target: &ParamVector<T>, online: &ParamVector<T>, tau: T) -> Result<ParamVector<T>> {
    check_len("soft update", online.len(), target.len())?;
    if tau == T::one() {
        return Ok(online.clone());
    }
    if tau == T::zero() {
        return Ok(target.clone());
    }
    let keep = T::one() - tau;
    Ok(target.iter().zip(online.iter()).map(|(&t, &o)| tau * o + keep * t).collect::<Vec<_>>().into())
}

/// `snapshot + alpha * (current - snapshot)`.
///
/// `alpha = 1` returns `current` bit for bit; `alpha = 0` returns `snapshot`.
pub fn la_average<T: Scalar>(current: &ParamVector<T>, snapshot: &ParamVector<T>, alpha: T) -> Result<ParamVector<T>> {
    check_len("lookahead average", current.len(), snapshot.len())?;
    if alpha == T::one() {
        return Ok(current.clone());
    }
    if alpha == T::zero() {
        return Ok(snapshot.clone());
    }
    Ok(snapshot.iter().zip(current.iter()).map(|(&s, &c)| s + alpha * (c - s)).collect::<Vec<_>>().into())
}

/// Lookahead copies `theta^(1..=l)` of one network, oldest level last.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotStack<T> {
    copies: Vec<ParamVector<T>>,
}

impl<T: Scalar> SnapshotStack<T> {
    /// `levels` copies of `live`.
    pub fn new(live: &ParamVector<T>, levels: usize) -> Self {
        Self { copies: vec![live.clone(); levels] }
    }

    pub fn levels(&self) -> usize {
        self.copies.len()
    }

    /// Zero-based level.
    pub fn level(&self, j: usize) -> &ParamVector<T> {
        &self.copies[j]
    }

    /// Overwrites levels `0..=j` with `live`.
    pub fn refresh_up_to(&mut self, j: usize, live: &ParamVector<T>) -> Result<()> {
        for copy in &mut self.copies[..=j] {
            check_len("snapshot refresh", live.len(), copy.len())?;
            copy.0.copy_from_slice(live);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &ParamVector<T>> {
        self.copies.iter()
    }
}
