use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vimarl::envs::{EnvId, MarkovGame};
use vimarl::marl::{Algorithm, Batch, JointNets, Layout, TrainConfig, Trainer};
use vimarl::vi_core::{jacobian_probe, VectorField};
use vimarl::vi_marl::{
    eg_learn_step, joint_point, nested_lookahead_hook, operator_view, BaseOptimizer, BlockOptimizer, FieldProblem,
    JointSnapshot, LookaheadConfig, ViTrainer,
};

fn small_cfg() -> TrainConfig {
    TrainConfig { batch_size: 32, t_rand: 40, t_learn: 25, hidden: vec![8], ..TrainConfig::default() }
}

fn rps_nets(hidden: &[usize], seed: u64) -> JointNets<f64> {
    let layout = Layout::new(EnvId::Rps.make().spec());
    JointNets::new(layout, Algorithm::Maddpg, hidden, 0.95, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn rps_batch(rows: usize, rng: &mut ChaCha8Rng) -> Batch<f64> {
    let one_hots = |rng: &mut ChaCha8Rng, width: usize, groups: usize| {
        let mut m = Array2::zeros((rows, width * groups));
        for r in 0..rows {
            for g in 0..groups {
                m[[r, g * width + rng.random_range(0..width)]] = 1.0;
            }
        }
        m
    };
    Batch {
        obs: one_hots(rng, 4, 2),
        actions: one_hots(rng, 3, 2),
        rewards: Array2::from_shape_simple_fn((rows, 2), || rng.random_range(-1.0..1.0)),
        next_obs: one_hots(rng, 4, 2),
        target_noise: None,
    }
}

#[test]
fn two_level_hook_at_the_outer_period() {
    let mut nets = rps_nets(&[4], 0);
    let mut snap = JointSnapshot::new(&nets, 2);
    let cfg = LookaheadConfig::new(&[10, 1000], 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Perturb live weights away from the snapshot.
    for a in &mut nets.agents {
        let p: Vec<f64> = a.actor.params().iter().map(|v| v + rng.random_range(-0.1..0.1)).collect();
        a.actor.set_params(&p).unwrap();
    }
    assert!(nested_lookahead_hook(999, &mut snap, &mut nets, &cfg).unwrap().is_empty());
    let events = nested_lookahead_hook(1000, &mut snap, &mut nets, &cfg).unwrap();
    assert_eq!(events.iter().map(|e| e.level).collect::<Vec<_>>(), vec![1, 2]);
    for (a, s) in nets.agents.iter().zip(&snap.agents) {
        let live = a.actor.params();
        assert_eq!(s.actor.level(0), &live);
        assert_eq!(s.actor.level(1), &live);
    }
}

#[test]
fn eg_learn_step_on_a_field_is_eg_step() {
    let f = VectorField::rotation();
    let mut p = FieldProblem { field: &f, z: vec![1.0, 1.0] };
    let mut z = vec![1.0, 1.0];
    for _ in 0..50 {
        z = vimarl::vi_core::eg_step(&f, &z, 0.2).unwrap();
        eg_learn_step(&mut p, &mut BlockOptimizer::Sgd { lr: 0.2 }, &mut BlockOptimizer::Sgd { lr: 0.2 }, 1).unwrap();
    }
    assert_eq!(z, p.z);
}

#[test]
fn more_extrapolation_steps_change_the_result() {
    let f = VectorField::identity(1);
    let run = |t| {
        let mut p = FieldProblem { field: &f, z: vec![1.0] };
        eg_learn_step(&mut p, &mut BlockOptimizer::Sgd { lr: 0.5 }, &mut BlockOptimizer::Sgd { lr: 0.5 }, t).unwrap();
        p.z[0]
    };
    // One extrapolation lands at 0.5, two at 0.25; the update steps from 1.
    assert_eq!(run(1), 0.75);
    assert_eq!(run(2), 0.875);
}

#[test]
fn unit_lookahead_over_eg_is_plain_eg() {
    let run = |la: Option<LookaheadConfig>| {
        let mut env = EnvId::Rps.make();
        let tr = Trainer::<f32>::new(env.spec(), Algorithm::Maddpg, small_cfg(), 4).unwrap();
        let mut vt = ViTrainer::new(tr, BaseOptimizer::Eg { extrapolation_steps: 1 }, la).unwrap();
        let stats: Vec<_> = (0..12).map(|_| vt.run_episode(&mut env).unwrap()).collect();
        (stats, vt.trainer.nets.clone())
    };
    let plain = run(None);
    assert!(plain.0.last().unwrap().learn_steps > 0);
    assert_eq!(plain, run(Some(LookaheadConfig::new(&[1], 1.0))));
}

#[test]
fn plain_base_without_lookahead_is_the_unwrapped_trainer() {
    let mut env = EnvId::PredatorPrey.make();
    let mut a = Trainer::<f32>::new(env.spec(), Algorithm::Matd3, small_cfg(), 2).unwrap();
    let b = Trainer::<f32>::new(env.spec(), Algorithm::Matd3, small_cfg(), 2).unwrap();
    let mut vt = ViTrainer::new(b, BaseOptimizer::Gd, None).unwrap();
    for _ in 0..4 {
        let x = a.run_episode(&mut env, &mut |t| t.learn_step().map(|_| ())).unwrap();
        assert_eq!(x, vt.run_episode(&mut env).unwrap());
    }
    assert_eq!(a.nets, vt.trainer.nets);
}

#[test]
fn operator_view_dimension_determinism_and_rotation() {
    let nets = rps_nets(&[3], 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let batches = vec![rps_batch(16, &mut rng), rps_batch(16, &mut rng)];
    let f = operator_view(&nets, &batches).unwrap();
    let z = joint_point(&nets);
    let total: usize = nets
        .agents
        .iter()
        .map(|a| a.actor.param_count() + a.critics.iter().map(|c| c.param_count()).sum::<usize>())
        .sum();
    assert_eq!(f.dim(), total);
    assert_eq!(z.len(), total);
    assert_eq!(f.eval(&z).unwrap(), f.eval(&z).unwrap());
    let r = jacobian_probe(&f, &z, 1e-6).unwrap();
    assert!(r.antisymmetric_norm > 1e-6, "{}", r.antisymmetric_norm);
}

#[test]
fn lookahead_config_validation() {
    assert!(LookaheadConfig::new(&[10, 100], 0.5).validate().is_ok());
    assert!(LookaheadConfig::new(&[10, 15], 0.5).validate().is_err());
    assert!(LookaheadConfig::new(&[], 0.5).validate().is_err());
    assert!(LookaheadConfig::new(&[10], 1.5).validate().is_err());
}
