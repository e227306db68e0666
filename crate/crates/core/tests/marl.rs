use ndarray::{array, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vimarl::envs::{ActionSpec, EnvId, GameSpec, MarkovGame};
use vimarl::marl::{
    select_action, Algorithm, Batch, BufferPolicy, JointNets, Layout, Mode, ReplayBuffer, TrainConfig, Trainer,
    Transition,
};
use vimarl::nn::{Head, Mlp};

fn t(k: usize) -> Transition<f64> {
    Transition { obs: vec![k as f64], actions: vec![1.0], rewards: vec![0.5], next_obs: vec![k as f64 + 1.0] }
}

fn items(b: &ReplayBuffer<f64>) -> Vec<usize> {
    (0..b.len()).map(|k| b.get(k).unwrap().obs[0] as usize).collect()
}

#[test]
fn sampling_examples() {
    let mut b = ReplayBuffer::<f64>::new(BufferPolicy::Full, 10, 1, 1, 1).unwrap();
    b.store(&t(7)).unwrap();
    let one = b.sample(1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(one.obs, array![[7.0]]);
    for k in 0..9 {
        b.store(&t(k)).unwrap();
    }
    let draw = |s| b.sample(5, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
    assert_eq!(draw(3), draw(3));
    assert!(b.sample(11, &mut ChaCha8Rng::seed_from_u64(0)).is_none());
}

#[test]
fn sampling_frequencies_are_uniform() {
    let mut b = ReplayBuffer::<f64>::new(BufferPolicy::Full, 10, 1, 1, 1).unwrap();
    for k in 0..10 {
        b.store(&t(k)).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts = [0usize; 10];
    for _ in 0..10_000 {
        for v in b.sample(10, &mut rng).unwrap().obs.iter() {
            counts[*v as usize] += 1;
        }
    }
    let (n, p) = (100_000.0_f64, 0.1);
    let sigma = (n * p * (1.0 - p)).sqrt();
    assert!(counts.iter().all(|&c| (c as f64 - n * p).abs() < 5.0 * sigma), "{counts:?}");
}

proptest! {
    #[test]
    fn bounded_policies_respect_capacity(cap in 1usize..16, n in 0usize..80, clearing in any::<bool>()) {
        let policy = if clearing { BufferPolicy::Clearing } else { BufferPolicy::Shifting };
        let mut b = ReplayBuffer::<f64>::new(policy, cap, 1, 1, 1).unwrap();
        for k in 0..n {
            b.store(&t(k)).unwrap();
            prop_assert!(b.len() <= cap);
        }
        let expect: Vec<usize> = if clearing {
            // Cleared each time it fills, so the tail after the last full block remains.
            let kept = if n == 0 { 0 } else { (n - 1) % cap + 1 };
            (n - kept..n).collect()
        } else {
            (n.saturating_sub(cap)..n).collect()
        };
        prop_assert_eq!(items(&b), expect);
    }
}

#[test]
fn select_action_modes() {
    let spec = ActionSpec::Discrete(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Softmax of logits (5, 0, 0): zero weights, bias carries the logits.
    let actor = Mlp::<f64>::from_params(
        &[2, 3],
        Head::Softmax,
        &vec![0.0; 6].into_iter().chain([5.0, 0.0, 0.0]).collect::<Vec<_>>().into(),
    )
    .unwrap();
    let (a, enc) = select_action(&actor, spec, &[0.3, 0.1], Mode::Exploit, 0.1, &mut rng).unwrap();
    assert_eq!(a, vimarl::envs::Action::Discrete(0));
    assert_eq!(enc, vec![1.0, 0.0, 0.0]);

    let uniform = Mlp::<f64>::zeros(&[2, 3], Head::Softmax).unwrap();
    let n = 100_000;
    for (mode, net) in [(Mode::Explore, &uniform), (Mode::Random, &actor)] {
        let mut counts = [0usize; 3];
        for _ in 0..n {
            match select_action(net, spec, &[0.0, 0.0], mode, 0.1, &mut rng).unwrap().0 {
                vimarl::envs::Action::Discrete(k) => counts[k] += 1,
                other => panic!("{other:?}"),
            }
        }
        let sigma = (n as f64 * (2.0 / 9.0)).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - n as f64 / 3.0).abs() < 5.0 * sigma), "{mode:?} {counts:?}");
    }
}

fn toy_spec() -> GameSpec {
    GameSpec {
        n_agents: 1,
        obs_dims: vec![1],
        actions: vec![ActionSpec::Continuous(1)],
        episode_length: 1,
        gamma: 0.95,
    }
}

/// Critic Q(x, a) = 6a matches the slope of -(a - 3)^2 at a = 0.
#[test]
fn actor_gradient_points_toward_higher_q() {
    let layout = Layout::new(&toy_spec());
    let mut nets =
        JointNets::<f64>::new(layout, Algorithm::Maddpg, &[], 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    nets.agents[0].actor.set_params(&[0.0, 0.0]).unwrap();
    nets.agents[0].critics[0].set_params(&[0.0, 6.0, 0.0]).unwrap();
    let batch = Batch {
        obs: Array2::from_elem((4, 1), 0.5),
        actions: Array2::zeros((4, 1)),
        rewards: Array2::zeros((4, 1)),
        next_obs: Array2::zeros((4, 1)),
        target_noise: None,
    };
    let (q, g) = nets.actor_gradient(0, &batch).unwrap();
    assert_eq!(q, 0.0);
    // Descending the gradient of -Q raises the bias and so the action.
    assert!(g[1] < 0.0, "{g:?}");
    assert!((g[1] + 6.0).abs() < 1e-12);
}

#[test]
fn twin_target_uses_the_lower_critic() {
    let layout = Layout::new(&toy_spec());
    let mut nets =
        JointNets::<f64>::new(layout, Algorithm::Matd3, &[], 0.5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    nets.agents[0].target_critics[0].set_params(&[0.0, 0.0, 2.0]).unwrap();
    nets.agents[0].target_critics[1].set_params(&[0.0, 0.0, -4.0]).unwrap();
    let batch = Batch {
        obs: Array2::zeros((3, 1)),
        actions: Array2::zeros((3, 1)),
        rewards: Array2::ones((3, 1)),
        next_obs: Array2::zeros((3, 1)),
        target_noise: None,
    };
    let y = nets.targets(0, &batch).unwrap();
    assert!(y.iter().all(|v| (*v - (1.0 - 0.5 * 4.0)).abs() < 1e-12));
    // The actor objective reads critic 1 only.
    nets.agents[0].critics[0].set_params(&[0.0, 1.0, 0.0]).unwrap();
    nets.agents[0].critics[1].set_params(&[0.0, -9.0, 0.0]).unwrap();
    let (_, g) = nets.actor_gradient(0, &batch).unwrap();
    assert!(g[1] < 0.0);
}

#[test]
fn delayed_actor_updates_half_the_learn_steps() {
    let spec = EnvId::MatchingPennies.make().spec().clone();
    let cfg = TrainConfig { batch_size: 16, t_rand: 16, t_learn: 5, hidden: vec![4], ..TrainConfig::default() };
    let mut tr = Trainer::<f64>::new(&spec, Algorithm::Matd3, cfg, 1).unwrap();
    let mut env = EnvId::MatchingPennies.make();
    let (mut steps, mut actor_updates) = (0, 0);
    while steps < 10 {
        tr.run_episode(&mut env, &mut |t| {
            if steps < 10 {
                let before = t.nets.agents[1].actor.params();
                if t.learn_step()? {
                    steps += 1;
                    actor_updates += usize::from(t.nets.agents[1].actor.params() != before);
                }
            }
            Ok(())
        })
        .unwrap();
    }
    assert_eq!(actor_updates, 5);
}

#[test]
fn trainer_runs_all_environments_reproducibly() {
    for id in EnvId::ALL {
        let run = || {
            let mut env = id.make();
            let cfg =
                TrainConfig { batch_size: 32, t_rand: 50, t_learn: 25, hidden: vec![8], ..TrainConfig::default() };
            let mut tr = Trainer::<f32>::new(env.spec(), Algorithm::Matd3, cfg, 9).unwrap();
            let mut rewards = Vec::new();
            for _ in 0..6 {
                rewards.push(tr.run_episode(&mut env, &mut |t| t.learn_step().map(|_| ())).unwrap());
            }
            (rewards, tr.nets.clone(), tr.learn_steps())
        };
        let a = run();
        assert!(a.2 > 0, "{id}");
        assert_eq!(a, run(), "{id}");
    }
}
