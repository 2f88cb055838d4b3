use rand::Rng;

use crate::error::{Error, Result};

use super::{ActionVec, StateVec};

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: StateVec,
    /// Raw actor-space action, each component in [−1, 1].
    pub action: ActionVec,
    pub reward: f64,
    pub next_state: StateVec,
    pub terminal: bool,
}

/// Fixed-capacity FIFO ring of transitions.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    storage: Vec<Transition>,
    capacity: usize,
    /// Slot the next insertion overwrites once the ring is full.
    head: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay capacity must be positive"));
        }
        Ok(Self {
            storage: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            head: 0,
            inserted: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Total insertions since creation, including evicted ones.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn store(&mut self, t: Transition) -> Result<()> {
        if t.action.iter().any(|a| !(-1.0..=1.0).contains(a)) {
            return Err(Error::invalid("transition action outside [-1, 1]"));
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
        self.inserted += 1;
        Ok(())
    }

    /// `i`-th oldest transition still held.
    pub fn get(&self, i: usize) -> Option<&Transition> {
        if i >= self.storage.len() {
            return None;
        }
        let idx = if self.storage.len() < self.capacity {
            i
        } else {
            (self.head + i) % self.capacity
        };
        self.storage.get(idx)
    }

    /// Transition at a raw storage slot, as returned by [`ReplayBuffer::sample_indices`].
    pub(crate) fn get_slot(&self, slot: usize) -> &Transition {
        &self.storage[slot]
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> + '_ {
        (0..self.len()).map(move |i| self.get(i).unwrap())
    }

    /// `n` uniform draws with replacement, as storage slots.
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<usize>> {
        if self.storage.len() < n || n == 0 {
            return Err(Error::NotReady {
                have: self.storage.len(),
                need: n.max(1),
            });
        }
        let len = self.storage.len();
        Ok((0..n).map(|_| rng.random_range(0..len)).collect())
    }

    pub fn sample_batch<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<&Transition>> {
        Ok(self
            .sample_indices(rng, n)?
            .into_iter()
            .map(|i| &self.storage[i])
            .collect())
    }
}
