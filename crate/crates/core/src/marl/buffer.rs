use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::Scalar;

/// What happens when a bounded buffer reaches its capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferPolicy {
    /// Never evicts; the capacity is ignored.
    Full,
    /// Empties completely at capacity, then refills.
    Clearing,
    /// Evicts oldest first.
    Shifting,
}

/// One experience record, every field flattened across agents.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<T> {
    pub obs: Vec<T>,
    pub actions: Vec<T>,
    pub rewards: Vec<T>,
    pub next_obs: Vec<T>,
}

/// A sampled minibatch; rows are transitions.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<T> {
    pub obs: Array2<T>,
    pub actions: Array2<T>,
    pub rewards: Array2<T>,
    pub next_obs: Array2<T>,
    /// Per-agent smoothing noise for target actions, drawn with the batch.
    pub target_noise: Option<Vec<Array2<T>>>,
}

impl<T: Scalar> Batch<T> {
    pub fn len(&self) -> usize {
        self.obs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
struct Columns<T> {
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> Columns<T> {
    fn new(width: usize) -> Self {
        Self { width, data: Vec::new() }
    }

    fn row(&self, k: usize) -> &[T] {
        &self.data[k * self.width..(k + 1) * self.width]
    }

    fn put(&mut self, slot: usize, row: &[T]) {
        let start = slot * self.width;
        if start == self.data.len() {
            self.data.extend_from_slice(row);
        } else {
            self.data[start..start + self.width].copy_from_slice(row);
        }
    }

    fn gather(&self, idx: &[usize]) -> Array2<T> {
        let mut out = Vec::with_capacity(idx.len() * self.width);
        for &k in idx {
            out.extend_from_slice(self.row(k));
        }
        Array2::from_shape_vec((idx.len(), self.width), out).expect("row-major gather")
    }
}

/// Replay storage, columnar for cheap batch gathering.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    policy: BufferPolicy,
    capacity: usize,
    obs: Columns<T>,
    actions: Columns<T>,
    rewards: Columns<T>,
    next_obs: Columns<T>,
    len: usize,
    /// Next slot to overwrite once a shifting buffer is full.
    head: usize,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(
        policy: BufferPolicy,
        capacity: usize,
        obs_width: usize,
        action_width: usize,
        n_agents: usize,
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("buffer capacity must be positive"));
        }
        Ok(Self {
            policy,
            capacity,
            obs: Columns::new(obs_width),
            actions: Columns::new(action_width),
            rewards: Columns::new(n_agents),
            next_obs: Columns::new(obs_width),
            len: 0,
            head: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> BufferPolicy {
        self.policy
    }

    pub fn clear(&mut self) {
        for c in [&mut self.obs, &mut self.actions, &mut self.rewards, &mut self.next_obs] {
            c.data.clear();
        }
        self.len = 0;
        self.head = 0;
    }

    pub fn store(&mut self, t: &Transition<T>) -> Result<()> {
        check_len("transition obs", t.obs.len(), self.obs.width)?;
        check_len("transition actions", t.actions.len(), self.actions.width)?;
        check_len("transition rewards", t.rewards.len(), self.rewards.width)?;
        check_len("transition next obs", t.next_obs.len(), self.next_obs.width)?;
        let slot = match self.policy {
            BufferPolicy::Full => self.len,
            BufferPolicy::Clearing => {
                if self.len == self.capacity {
                    self.clear();
                }
                self.len
            }
            BufferPolicy::Shifting => {
                if self.len == self.capacity {
                    let s = self.head;
                    self.head = (self.head + 1) % self.capacity;
                    s
                } else {
                    self.len
                }
            }
        };
        self.obs.put(slot, &t.obs);
        self.actions.put(slot, &t.actions);
        self.rewards.put(slot, &t.rewards);
        self.next_obs.put(slot, &t.next_obs);
        if slot == self.len {
            self.len += 1;
        }
        Ok(())
    }

    /// The `k`-th stored transition, oldest first.
    pub fn get(&self, k: usize) -> Option<Transition<T>> {
        if k >= self.len {
            return None;
        }
        let slot = (self.head + k) % self.len;
        Some(Transition {
            obs: self.obs.row(slot).to_vec(),
            actions: self.actions.row(slot).to_vec(),
            rewards: self.rewards.row(slot).to_vec(),
            next_obs: self.next_obs.row(slot).to_vec(),
        })
    }

    /// Uniform with replacement; `None` when fewer than `size` transitions are stored.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Option<Batch<T>> {
        if size == 0 || self.len < size {
            return None;
        }
        let idx: Vec<usize> = (0..size).map(|_| rng.random_range(0..self.len)).collect();
        Some(self.gather(&idx))
    }

    /// Batch of the given storage rows (oldest-first indices).
    pub fn gather(&self, idx: &[usize]) -> Batch<T> {
        let slots: Vec<usize> = idx.iter().map(|k| (self.head + k) % self.len.max(1)).collect();
        Batch {
            obs: self.obs.gather(&slots),
            actions: self.actions.gather(&slots),
            rewards: self.rewards.gather(&slots),
            next_obs: self.next_obs.gather(&slots),
            target_noise: None,
        }
    }
}
