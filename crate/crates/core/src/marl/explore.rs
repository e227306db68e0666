use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::envs::{Action, ActionSpec};
use crate::error::Result;
use crate::nn::Mlp;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Uniform-random actions (warm-up phase).
    Random,
    /// Policy output plus exploration noise.
    Explore,
    /// Greedy: argmax or noiseless mean.
    Exploit,
}

/// Hard Gumbel-max sample from `probs`, equivalent to drawing from the
/// categorical the softmax defines.
pub fn gumbel_max<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &p) in probs.iter().enumerate() {
        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let score = p.ln() - (-u.ln()).ln();
        if score > best.1 {
            best = (k, score);
        }
    }
    best.0
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// The environment action and its critic encoding (one-hot for discrete).
pub fn select_action<T: Scalar, R: Rng + ?Sized>(
    actor: &Mlp<T>,
    spec: ActionSpec,
    obs: &[f64],
    mode: Mode,
    explore_std: f64,
    rng: &mut R,
) -> Result<(Action, Vec<T>)> {
    let one_hot = |k: usize, m: usize| {
        let mut v = vec![T::zero(); m];
        v[k] = T::one();
        v
    };
    if mode == Mode::Random {
        return Ok(match spec {
            ActionSpec::Discrete(m) => {
                let k = rng.random_range(0..m);
                (Action::Discrete(k), one_hot(k, m))
            }
            ActionSpec::Continuous(d) => {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let enc = v.iter().map(|&x| T::of(x)).collect();
                (Action::Continuous(v), enc)
            }
        });
    }
    let input = Array2::from_shape_vec((1, obs.len()), obs.iter().map(|&x| T::of(x)).collect()).expect("row vector");
    let out: Vec<f64> = actor.forward(&input)?.iter().map(|x| x.f64()).collect();
    Ok(match spec {
        ActionSpec::Discrete(m) => {
            let k = match mode {
                Mode::Exploit => argmax(&out),
                _ => gumbel_max(&out, rng),
            };
            (Action::Discrete(k), one_hot(k, m))
        }
        ActionSpec::Continuous(_) => {
            let v: Vec<f64> = match mode {
                Mode::Exploit => out,
                _ => out
                    .iter()
                    .map(|&x| {
                        let n: f64 = StandardNormal.sample(rng);
                        (x + explore_std * n).clamp(-1.0, 1.0)
                    })
                    .collect(),
            };
            let enc = v.iter().map(|&x| T::of(x)).collect();
            (Action::Continuous(v), enc)
        }
    })
}
