use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Trajectory, VectorField};
use crate::error::{check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gd,
    Eg,
    Ogd,
    La,
}

/// Inner optimizer wrapped by lookahead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseMethod {
    Gd,
    Eg,
    Ogd,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gd" => Ok(Method::Gd),
            "eg" => Ok(Method::Eg),
            "ogd" => Ok(Method::Ogd),
            "la" => Ok(Method::La),
            other => Err(Error::config(format!("unknown solver method `{other}`"))),
        }
    }
}

impl From<BaseMethod> for Method {
    fn from(b: BaseMethod) -> Self {
        match b {
            BaseMethod::Gd => Method::Gd,
            BaseMethod::Eg => Method::Eg,
            BaseMethod::Ogd => Method::Ogd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub step_size: f64,
    /// Lookahead periods `k^(1), ..., k^(l)`; the level count is the length.
    #[serde(default)]
    pub la_periods: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub la_alpha: f64,
    #[serde(default = "default_base")]
    pub base_method: BaseMethod,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_base() -> BaseMethod {
    BaseMethod::Gd
}

impl SolverConfig {
    pub fn new(method: Method, step_size: f64) -> Self {
        Self { method, step_size, la_periods: Vec::new(), la_alpha: default_alpha(), base_method: default_base() }
    }

    pub fn lookahead(base: BaseMethod, step_size: f64, periods: &[usize], alpha: f64) -> Self {
        Self { method: Method::La, step_size, la_periods: periods.to_vec(), la_alpha: alpha, base_method: base }
    }

    pub fn levels(&self) -> usize {
        self.la_periods.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size < 1.0) {
            return Err(Error::config(format!("step size must lie in (0, 1), got {}", self.step_size)));
        }
        if self.method == Method::La {
            validate_periods(&self.la_periods)?;
            if !(0.0..=1.0).contains(&self.la_alpha) {
                return Err(Error::config(format!("lookahead alpha must lie in [0, 1], got {}", self.la_alpha)));
            }
        }
        Ok(())
    }
}

/// Each period is positive and an integer multiple of the previous one.
pub(crate) fn validate_periods(periods: &[usize]) -> Result<()> {
    if periods.is_empty() {
        return Err(Error::config("lookahead needs at least one level"));
    }
    if periods.contains(&0) {
        return Err(Error::config("lookahead periods must be positive"));
    }
    for w in periods.windows(2) {
        if w[1] % w[0] != 0 {
            return Err(Error::config(format!("lookahead period {} is not a multiple of {}", w[1], w[0])));
        }
    }
    Ok(())
}

fn check_step(f: &VectorField, z: &[f64], eta: f64) -> Result<()> {
    check_len("iterate", z.len(), f.dim())?;
    if eta > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("step size must be positive, got {eta}")))
    }
}

fn descend(z: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    z.iter().zip(g).map(|(zi, gi)| zi - eta * gi).collect()
}

/// `z - eta F(z)`.
pub fn gd_step(f: &VectorField, z: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_step(f, z, eta)?;
    Ok(descend(z, &f.eval(z)?, eta))
}

/// `z - eta F(z - eta F(z))`.
pub fn eg_step(f: &VectorField, z: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_step(f, z, eta)?;
    let half = descend(z, &f.eval(z)?, eta);
    Ok(descend(z, &f.eval(&half)?, eta))
}

/// `z - 2 eta F(z) + eta F(z_prev)`; returns the new point and `F(z)` for the next call.
pub fn ogd_step(f: &VectorField, z: &[f64], prev_grad: &[f64], eta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_step(f, z, eta)?;
    check_len("previous gradient", prev_grad.len(), f.dim())?;
    let g = f.eval(z)?;
    let next = z.iter().zip(&g).zip(prev_grad).map(|((zi, gi), pi)| zi - 2.0 * eta * gi + eta * pi).collect();
    Ok((next, g))
}

/// One base-method step with the optimistic memory threaded through.
struct Stepper<'a> {
    field: &'a VectorField,
    method: Method,
    eta: f64,
    prev_grad: Option<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    fn new(field: &'a VectorField, method: Method, eta: f64) -> Self {
        Self { field, method, eta, prev_grad: None }
    }

    fn step(&mut self, z: &[f64]) -> Result<Vec<f64>> {
        match self.method {
            Method::Gd => gd_step(self.field, z, self.eta),
            Method::Eg => eg_step(self.field, z, self.eta),
            Method::Ogd => {
                // Bootstrap with F(z0), which makes the first step a GD step.
                let prev = match self.prev_grad.take() {
                    Some(p) => p,
                    None => self.field.eval(z)?,
                };
                let (next, g) = ogd_step(self.field, z, &prev, self.eta)?;
                self.prev_grad = Some(g);
                Ok(next)
            }
            Method::La => Err(Error::config("lookahead cannot be its own base method")),
        }
    }
}

/// `snapshot + alpha (current - snapshot)`, exact at `alpha` of 0 and 1.
pub(crate) fn average_toward(current: &[f64], snapshot: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 1.0 {
        current.to_vec()
    } else if alpha == 0.0 {
        snapshot.to_vec()
    } else {
        snapshot.iter().zip(current).map(|(s, c)| s + alpha * (c - s)).collect()
    }
}

/// Nested lookahead over the configured base method.
///
/// After base step `t`, every level `j` (ascending) with `t % k^(j) == 0`
/// pulls the iterate toward snapshot `j` and then overwrites snapshots
/// `1..=j` with the result.
pub fn la_solve(f: &VectorField, z0: &[f64], cfg: &SolverConfig, steps: usize) -> Result<Trajectory> {
    if cfg.method != Method::La {
        return Err(Error::config("la_solve requires the lookahead method"));
    }
    cfg.validate()?;
    check_len("initial point", z0.len(), f.dim())?;
    if steps == 0 {
        return Err(Error::invalid("la_solve needs at least one step"));
    }
    let mut stepper = Stepper::new(f, cfg.base_method.into(), cfg.step_size);
    let mut snapshots = vec![z0.to_vec(); cfg.levels()];
    let mut z = z0.to_vec();
    let mut iterates = Vec::with_capacity(steps + 1);
    iterates.push(z.clone());
    for t in 1..=steps {
        z = stepper.step(&z)?;
        for (j, &k) in cfg.la_periods.iter().enumerate() {
            if t % k == 0 {
                z = average_toward(&z, &snapshots[j], cfg.la_alpha);
                for snap in &mut snapshots[..=j] {
                    snap.clone_from(&z);
                }
            }
        }
        iterates.push(z.clone());
    }
    Ok(Trajectory::new(iterates, None))
}

/// Runs `steps` iterations of the configured method, recording every iterate.
pub fn solve(f: &VectorField, z0: &[f64], cfg: &SolverConfig, steps: usize) -> Result<Trajectory> {
    cfg.validate()?;
    check_len("initial point", z0.len(), f.dim())?;
    if cfg.method == Method::La {
        return la_solve(f, z0, cfg, steps);
    }
    let mut stepper = Stepper::new(f, cfg.method, cfg.step_size);
    let mut z = z0.to_vec();
    let mut iterates = Vec::with_capacity(steps + 1);
    iterates.push(z.clone());
    for _ in 0..steps {
        z = stepper.step(&z)?;
        iterates.push(z.clone());
    }
    Ok(Trajectory::new(iterates, None))
}
