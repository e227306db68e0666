use crate::envs::{Env, EnvId, MatrixGame};
use crate::error::{check_len, Error, Result};
use crate::marl::policy_output;
use crate::nn::Mlp;
use crate::Scalar;

pub const RUNNING_WINDOW: usize = 100;

/// Known mixed equilibrium per agent, for matrix games only.
pub fn equilibrium(env: EnvId) -> Option<Vec<Vec<f64>>> {
    match env.make() {
        Env::Matrix(g) => Some(vec![g.variant().equilibrium(); 2]),
        Env::Particle(_) => None,
    }
}

/// `sum_i ||pi_i - pi_i*||^2`.
pub fn distance_to_mne(policies: &[Vec<f64>], equilibrium: &[Vec<f64>]) -> Result<f64> {
    check_len("policies", policies.len(), equilibrium.len())?;
    let mut total = 0.0;
    for (p, q) in policies.iter().zip(equilibrium) {
        if p.len() != q.len() {
            return Err(Error::invalid(format!(
                "policy over {} actions compared to equilibrium over {}",
                p.len(),
                q.len()
            )));
        }
        total += p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    Ok(total)
}

/// Each agent's actor output averaged over every possible matrix-game
/// observation (each previous opponent move, and "none").
pub fn probe_policies<'a, T: Scalar>(actors: impl IntoIterator<Item = &'a Mlp<T>>) -> Result<Vec<Vec<f64>>> {
    actors
        .into_iter()
        .map(|actor| {
            let m = actor.output_dim();
            let probes = MatrixGame::probe_observations(m);
            let mut avg = vec![0.0; m];
            for o in &probes {
                for (s, p) in avg.iter_mut().zip(policy_output(actor, o)?) {
                    *s += p / probes.len() as f64;
                }
            }
            Ok(avg)
        })
        .collect()
}

/// Trailing mean over at most `window` values ending at each index.
pub fn running_mean(series: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (t, &x) in series.iter().enumerate() {
        sum += x;
        if t >= window {
            sum -= series[t - window];
        }
        out.push(sum / (t + 1).min(window) as f64);
    }
    out
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform(m: usize) -> Vec<f64> {
        vec![1.0 / m as f64; m]
    }

    #[test]
    fn distance_examples() {
        let eq = vec![uniform(3), uniform(3)];
        assert_eq!(distance_to_mne(&eq, &eq).unwrap(), 0.0);
        let one = vec![vec![1.0, 0.0, 0.0], uniform(3)];
        assert!((distance_to_mne(&one, &eq).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let both = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((distance_to_mne(&both, &eq).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(distance_to_mne(&[uniform(2), uniform(3)], &eq).is_err());
    }

    #[test]
    fn running_mean_window() {
        let xs: Vec<f64> = (1..=5).map(f64::from).collect();
        assert_eq!(running_mean(&xs, 2), vec![1.0, 1.5, 2.5, 3.5, 4.5]);
        assert_eq!(running_mean(&xs, 100)[4], 3.0);
    }

    #[test]
    fn mean_std_is_population() {
        assert_eq!(mean_std(&[0.0, 1.0]), (0.5, 0.5));
        assert_eq!(mean_std(&[1.0]), (1.0, 0.0));
    }

    fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, m).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-9).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn distance_bounded_and_zero_only_at_equilibrium(p in simplex(3), q in simplex(3)) {
            let eq = vec![uniform(3), uniform(3)];
            let d = distance_to_mne(&[p.clone(), q.clone()], &eq).unwrap();
            prop_assert!((0.0..=4.0).contains(&d));
            let at_eq = p.iter().chain(&q).all(|x| *x == 1.0 / 3.0);
            prop_assert_eq!(d == 0.0, at_eq);
        }
    }
}
