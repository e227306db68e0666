use crate::error::Result;
use crate::marl::{Batch, JointNets};
use crate::nn::ParamVector;
use crate::vi_core::VectorField;
use crate::Scalar;

use super::extragradient::{joint_blocks, joint_gradients, set_joint_blocks};

pub(crate) fn cast_batch<T: Scalar, U: Scalar>(b: &Batch<T>) -> Batch<U> {
    let c = |a: &ndarray::Array2<T>| a.mapv(|v| U::of(v.f64()));
    Batch {
        obs: c(&b.obs),
        actions: c(&b.actions),
        rewards: c(&b.rewards),
        next_obs: c(&b.next_obs),
        target_noise: b.target_noise.as_ref().map(|n| n.iter().map(c).collect()),
    }
}

/// Flattened joint parameters in operator order: per agent, critics then actor.
pub fn joint_point<T: Scalar>(nets: &JointNets<T>) -> Vec<f64> {
    joint_blocks(nets).iter().flat_map(|b| b.iter().map(|v| v.f64()).collect::<Vec<_>>()).collect()
}

/// The stacked per-agent (critic, actor) loss gradients on pinned batches as
/// a 64-bit vector field over the joint parameter space.
///
/// Target networks stay frozen at their current values and target smoothing
/// noise is disabled, so the field is deterministic.
pub fn operator_view<T: Scalar>(nets: &JointNets<T>, batches: &[Batch<T>]) -> Result<VectorField> {
    let nets: JointNets<f64> = nets.cast();
    let batches: Vec<Batch<f64>> = batches.iter().map(|b| Batch { target_noise: None, ..cast_batch(b) }).collect();
    let targets = (0..nets.n_agents()).map(|i| nets.targets(i, &batches[i])).collect::<Result<Vec<_>>>()?;
    let lens: Vec<usize> = joint_blocks(&nets).iter().map(|b| b.len()).collect();
    let dim = lens.iter().sum();
    let name = format!("{}-operator", nets.algorithm);
    Ok(VectorField::new(name, dim, move |z| {
        let mut local = nets.clone();
        let mut rest = z;
        let blocks: Vec<ParamVector<f64>> = lens
            .iter()
            .map(|&n| {
                let (head, tail) = rest.split_at(n);
                rest = tail;
                ParamVector(head.to_vec())
            })
            .collect();
        set_joint_blocks(&mut local, &blocks).expect("blocks sized from the same nets");
        joint_gradients(&local, &batches, &targets, true)
            .expect("shapes fixed at construction")
            .into_iter()
            .flat_map(|g| g.expect("actors included").0)
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvId, MarkovGame};
    use crate::marl::{Algorithm, TrainConfig, Trainer};

    #[test]
    fn dimension_and_determinism() {
        let env = EnvId::Rps.make();
        let cfg = TrainConfig { batch_size: 8, hidden: vec![4], ..Default::default() };
        let mut t: Trainer<f32> = Trainer::new(env.spec(), Algorithm::Matd3, cfg, 0).unwrap();
        let mut e = EnvId::Rps.make();
        t.run_episode(&mut e, &mut |_| Ok(())).unwrap();
        let batches = t.sample_batches().unwrap();
        let f = operator_view(&t.nets, &batches).unwrap();
        let total: usize = t
            .nets
            .agents
            .iter()
            .map(|a| a.actor.param_count() + a.critics.iter().map(|c| c.param_count()).sum::<usize>())
            .sum();
        assert_eq!(f.dim(), total);
        let z = joint_point(&t.nets);
        assert_eq!(f.eval(&z).unwrap(), f.eval(&z).unwrap());
    }
}
