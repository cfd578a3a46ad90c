//! Fixed-capacity ring buffer of transitions.

use ndarray::Array2;
use rand::Rng;

/// Transitions stored column-wise in flat vectors. Storage grows on demand up
/// to `capacity`, then the oldest entries are overwritten.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    terminals: Vec<bool>,
    len: usize,
    cursor: usize,
    inserted: u64,
}

/// A sampled minibatch, rows are transitions.
#[derive(Clone, Debug)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Vec<f64>,
    pub next_states: Array2<f64>,
    pub terminals: Vec<bool>,
    pub indices: Vec<usize>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            state_dim,
            action_dim,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            terminals: Vec::new(),
            len: 0,
            cursor: 0,
            inserted: 0,
        }
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

    /// Slot the next insertion writes to.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Total insertions so far, including overwritten ones.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(
        &mut self,
        state: &[f64],
        action: &[f64],
        reward: f64,
        next_state: &[f64],
        terminal: bool,
    ) {
        assert_eq!(state.len(), self.state_dim);
        assert_eq!(next_state.len(), self.state_dim);
        assert_eq!(action.len(), self.action_dim);
        if self.len < self.capacity {
            self.states.extend_from_slice(state);
            self.actions.extend_from_slice(action);
            self.rewards.push(reward);
            self.next_states.extend_from_slice(next_state);
            self.terminals.push(terminal);
            self.len += 1;
        } else {
            let (s, a) = (self.cursor * self.state_dim, self.cursor * self.action_dim);
            self.states[s..s + self.state_dim].copy_from_slice(state);
            self.actions[a..a + self.action_dim].copy_from_slice(action);
            self.rewards[self.cursor] = reward;
            self.next_states[s..s + self.state_dim].copy_from_slice(next_state);
            self.terminals[self.cursor] = terminal;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        self.inserted += 1;
    }

    /// Reward stored in slot `i`.
    pub fn reward(&self, i: usize) -> f64 {
        self.rewards[i]
    }

    /// Uniform sample of `n` distinct stored transitions; `None` if fewer
    /// than `n` are stored.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Option<Batch> {
        if n > self.len {
            return None;
        }
        let indices = rand::seq::index::sample(rng, self.len, n).into_vec();
        let rows = |src: &[f64], dim: usize| {
            let mut out = Vec::with_capacity(n * dim);
            for &i in &indices {
                out.extend_from_slice(&src[i * dim..(i + 1) * dim]);
            }
            Array2::from_shape_vec((n, dim), out).expect("row-major batch")
        };
        Some(Batch {
            states: rows(&self.states, self.state_dim),
            actions: rows(&self.actions, self.action_dim),
            rewards: indices.iter().map(|&i| self.rewards[i]).collect(),
            next_states: rows(&self.next_states, self.state_dim),
            terminals: indices.iter().map(|&i| self.terminals[i]).collect(),
            indices,
        })
    }
}
