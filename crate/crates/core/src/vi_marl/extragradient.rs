use ndarray::Array2;

use crate::error::{check_len, Result};
use crate::marl::{Batch, JointNets};
use crate::nn::{adam_step, AdamConfig, AdamState, ParamVector};
use crate::vi_core::VectorField;
use crate::Scalar;

/// A joint parameter point split into blocks, with a simultaneous gradient oracle.
pub trait JointProblem<T> {
    fn params(&self) -> Vec<ParamVector<T>>;

    fn set_params(&mut self, blocks: &[ParamVector<T>]) -> Result<()>;

    /// Every block's gradient at the current point, all evaluated before any
    /// block moves. `None` leaves a block untouched.
    fn gradients(&self) -> Result<Vec<Option<ParamVector<T>>>>;
}

/// Per-block update rule.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockOptimizer<T> {
    /// `p - lr * g`.
    Sgd {
        lr: T,
    },
    Adam(Vec<AdamState<T>>),
}

impl<T: Scalar> BlockOptimizer<T> {
    pub fn adam(block_lens: &[usize], cfg: &AdamConfig) -> Self {
        BlockOptimizer::Adam(block_lens.iter().map(|&n| AdamState::new(n, cfg)).collect())
    }

    pub fn apply(&mut self, blocks: &mut [ParamVector<T>], grads: &[Option<ParamVector<T>>]) -> Result<()> {
        check_len("gradient blocks", grads.len(), blocks.len())?;
        match self {
            BlockOptimizer::Sgd { lr } => {
                for (p, g) in blocks.iter_mut().zip(grads) {
                    if let Some(g) = g {
                        check_len("gradient block", g.len(), p.len())?;
                        for (pi, gi) in p.iter_mut().zip(g.iter()) {
                            *pi -= *lr * *gi;
                        }
                    }
                }
            }
            BlockOptimizer::Adam(states) => {
                check_len("optimizer blocks", states.len(), blocks.len())?;
                for ((p, g), s) in blocks.iter_mut().zip(grads).zip(states) {
                    if let Some(g) = g {
                        adam_step(p, g, s)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn set_lr(&mut self, lr: f64) {
        match self {
            BlockOptimizer::Sgd { lr: l } => *l = T::of(lr),
            BlockOptimizer::Adam(states) => states.iter_mut().for_each(|s| s.lr = T::of(lr)),
        }
    }

    pub fn reset(&mut self) {
        if let BlockOptimizer::Adam(states) = self {
            states.iter_mut().for_each(AdamState::reset);
        }
    }
}

/// Extrapolate `steps` times from the live point, then apply the gradient at
/// the extrapolated point to a saved copy of the starting point.
///
/// Returns the gradients used for the final update.
pub fn eg_learn_step<T: Scalar, P: JointProblem<T> + ?Sized>(
    problem: &mut P,
    extrapolation: &mut BlockOptimizer<T>,
    update: &mut BlockOptimizer<T>,
    steps: usize,
) -> Result<Vec<Option<ParamVector<T>>>> {
    let saved = problem.params();
    for _ in 0..steps {
        let g = problem.gradients()?;
        let mut p = problem.params();
        extrapolation.apply(&mut p, &g)?;
        problem.set_params(&p)?;
    }
    let g = problem.gradients()?;
    let mut p = saved;
    update.apply(&mut p, &g)?;
    problem.set_params(&p)?;
    Ok(g)
}

/// An analytic field as a single-block problem.
pub struct FieldProblem<'a> {
    pub field: &'a VectorField,
    pub z: Vec<f64>,
}

impl JointProblem<f64> for FieldProblem<'_> {
    fn params(&self) -> Vec<ParamVector<f64>> {
        vec![ParamVector(self.z.clone())]
    }

    fn set_params(&mut self, blocks: &[ParamVector<f64>]) -> Result<()> {
        check_len("field blocks", blocks.len(), 1)?;
        check_len("field point", blocks[0].len(), self.field.dim())?;
        self.z.clone_from(&blocks[0].0);
        Ok(())
    }

    fn gradients(&self) -> Result<Vec<Option<ParamVector<f64>>>> {
        Ok(vec![Some(ParamVector(self.field.eval(&self.z)?))])
    }
}

/// Actor-critic losses of all agents on pinned batches.
///
/// Blocks are ordered per agent: critics, then actor. Bellman targets depend
/// only on target networks, so they are computed once.
pub struct MarlProblem<'a, T> {
    pub nets: &'a mut JointNets<T>,
    batches: &'a [Batch<T>],
    targets: Vec<Array2<T>>,
    /// Whether actor blocks get gradients (false on delayed MATD3 steps).
    pub update_actors: bool,
}

impl<'a, T: Scalar> MarlProblem<'a, T> {
    pub fn new(nets: &'a mut JointNets<T>, batches: &'a [Batch<T>], update_actors: bool) -> Result<Self> {
        check_len("batches", batches.len(), nets.n_agents())?;
        let targets = (0..nets.n_agents()).map(|i| nets.targets(i, &batches[i])).collect::<Result<Vec<_>>>()?;
        Ok(Self { nets, batches, targets, update_actors })
    }
}

pub(crate) fn joint_blocks<T: Scalar>(nets: &JointNets<T>) -> Vec<ParamVector<T>> {
    let mut out = Vec::new();
    for a in &nets.agents {
        out.extend(a.critics.iter().map(|c| c.params()));
        out.push(a.actor.params());
    }
    out
}

pub(crate) fn set_joint_blocks<T: Scalar>(nets: &mut JointNets<T>, blocks: &[ParamVector<T>]) -> Result<()> {
    let expected: usize = nets.agents.iter().map(|a| a.critics.len() + 1).sum();
    check_len("joint blocks", blocks.len(), expected)?;
    let mut it = blocks.iter();
    for a in &mut nets.agents {
        for c in &mut a.critics {
            c.set_params(it.next().expect("counted"))?;
        }
        a.actor.set_params(it.next().expect("counted"))?;
    }
    Ok(())
}

pub(crate) fn joint_gradients<T: Scalar>(
    nets: &JointNets<T>,
    batches: &[Batch<T>],
    targets: &[Array2<T>],
    update_actors: bool,
) -> Result<Vec<Option<ParamVector<T>>>> {
    let mut out = Vec::new();
    for (i, a) in nets.agents.iter().enumerate() {
        for k in 0..a.critics.len() {
            out.push(Some(nets.critic_gradient(i, k, &batches[i], &targets[i])?.1));
        }
        out.push(if update_actors { Some(nets.actor_gradient(i, &batches[i])?.1) } else { None });
    }
    Ok(out)
}

impl<T: Scalar> JointProblem<T> for MarlProblem<'_, T> {
    fn params(&self) -> Vec<ParamVector<T>> {
        joint_blocks(self.nets)
    }

    fn set_params(&mut self, blocks: &[ParamVector<T>]) -> Result<()> {
        set_joint_blocks(self.nets, blocks)
    }

    fn gradients(&self) -> Result<Vec<Option<ParamVector<T>>>> {
        joint_gradients(self.nets, self.batches, &self.targets, self.update_actors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vi_core::{eg_step, gd_step};

    struct Quadratic {
        z: Vec<f64>,
        zero: bool,
    }

    impl JointProblem<f64> for Quadratic {
        fn params(&self) -> Vec<ParamVector<f64>> {
            vec![ParamVector(self.z.clone())]
        }
        fn set_params(&mut self, b: &[ParamVector<f64>]) -> Result<()> {
            self.z.clone_from(&b[0].0);
            Ok(())
        }
        fn gradients(&self) -> Result<Vec<Option<ParamVector<f64>>>> {
            let g = self.z.iter().map(|x| if self.zero { 0.0 } else { 2.0 * x }).collect();
            Ok(vec![Some(ParamVector(g))])
        }
    }

    fn sgd(lr: f64) -> BlockOptimizer<f64> {
        BlockOptimizer::Sgd { lr }
    }

    #[test]
    fn reproduces_analytic_eg_step() {
        let field = VectorField::rotation();
        let mut z = vec![1.0, 1.0];
        let mut p = FieldProblem { field: &field, z: z.clone() };
        for _ in 0..50 {
            eg_learn_step(&mut p, &mut sgd(0.1), &mut sgd(0.1), 1).unwrap();
            z = eg_step(&field, &z, 0.1).unwrap();
            assert_eq!(p.z, z);
        }
        // Zero extrapolation steps is plain gradient descent.
        let mut q = FieldProblem { field: &field, z: vec![1.0, 1.0] };
        eg_learn_step(&mut q, &mut sgd(0.1), &mut sgd(0.1), 0).unwrap();
        assert_eq!(q.z, gd_step(&field, &[1.0, 1.0], 0.1).unwrap());
    }

    #[test]
    fn zero_gradients_restore_saved_copy() {
        let mut q = Quadratic { z: vec![0.5, -2.0], zero: true };
        let mut adam = BlockOptimizer::adam(&[2], &AdamConfig::default());
        let mut adam2 = adam.clone();
        eg_learn_step(&mut q, &mut adam, &mut adam2, 3).unwrap();
        assert_eq!(q.z, vec![0.5, -2.0]);
    }

    #[test]
    fn extrapolation_count_is_honored() {
        // f = z^2, eta = 0.25: one extrapolation lands at z/2, two at z/4.
        let run = |steps| {
            let mut q = Quadratic { z: vec![1.0], zero: false };
            eg_learn_step(&mut q, &mut sgd(0.25), &mut sgd(0.25), steps).unwrap();
            q.z[0]
        };
        assert_eq!(run(1), 1.0 - 0.25 * 2.0 * 0.5);
        assert_eq!(run(2), 1.0 - 0.25 * 2.0 * 0.25);
    }

    #[test]
    fn skipped_blocks_are_untouched() {
        let mut blocks = vec![ParamVector(vec![1.0]), ParamVector(vec![2.0])];
        let grads = vec![Some(ParamVector(vec![1.0])), None];
        let mut opt = BlockOptimizer::adam(&[1, 1], &AdamConfig::default());
        opt.apply(&mut blocks, &grads).unwrap();
        assert!(blocks[0][0] < 1.0);
        assert_eq!(blocks[1][0], 2.0);
        let BlockOptimizer::Adam(states) = &opt else { unreachable!() };
        assert_eq!(states[1].t, 0);
    }
}
