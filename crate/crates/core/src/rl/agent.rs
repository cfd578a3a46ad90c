//! Actor and critic networks.
//!
//! Networks see alphas shifted to `[-1, 1]` and actions in an encoded form,
//! also in `[-1, 1]`: `delta / 0.4` for the continuous part and `2 v - 1` for
//! the Powell-budget fraction `v`.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;

use super::env::{Action, MAX_DELTA, MAX_POWELL_ITERS};
use super::nn::{Grads, Mlp};

pub fn encode_state(alphas: &[f64]) -> Vec<f64> {
    alphas.iter().map(|a| a - 1.0).collect()
}

/// Encoded vector (length `D + 1`) of an executed action.
pub fn encode_action(action: &Action) -> Vec<f64> {
    let mut e: Vec<f64> = action.delta.iter().map(|d| d / MAX_DELTA).collect();
    e.push(2.0 * action.powell_iters as f64 / MAX_POWELL_ITERS as f64 - 1.0);
    e
}

/// Action from an encoded vector; the budget is `round(12 v)`.
pub fn decode_action(encoded: &[f64]) -> Action {
    let (cont, disc) = encoded.split_at(encoded.len() - 1);
    let v = ((disc[0] + 1.0) / 2.0).clamp(0.0, 1.0);
    let iters = (MAX_POWELL_ITERS as f64 * v).round() as usize;
    Action::clipped(cont.iter().map(|e| e * MAX_DELTA).collect(), iters)
}

/// Deterministic policy `state -> encoded action`. The continuous head is
/// `tanh(z)` (so `delta = 0.4 tanh z`), the discrete head `tanh(z / 2)`, which
/// is `2 sigmoid(z) - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Actor {
    pub net: Mlp,
}

/// State-action value.
#[derive(Clone, Debug, PartialEq)]
pub struct Critic {
    pub net: Mlp,
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut v = vec![input];
    v.extend_from_slice(hidden);
    v.push(output);
    v
}

fn head_scale(j: usize, dim: usize) -> f64 {
    if j == dim {
        0.5
    } else {
        1.0
    }
}

impl Actor {
    pub fn new<R: Rng>(dim: usize, hidden: &[usize], rng: &mut R) -> Actor {
        Actor {
            net: Mlp::init(&sizes(dim, hidden, dim + 1), rng),
        }
    }

    pub fn zeros(dim: usize, hidden: &[usize]) -> Actor {
        Actor {
            net: Mlp::zeros(&sizes(dim, hidden, dim + 1)),
        }
    }

    pub fn dim(&self) -> usize {
        self.net.input_dim()
    }

    fn squash(&self, z: &mut Array2<f64>) {
        let dim = self.dim();
        for mut row in z.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v * head_scale(j, dim)).tanh();
            }
        }
    }

    /// Encoded actions for a batch of encoded states.
    pub fn forward(&self, states: ArrayView2<f64>) -> Array2<f64> {
        let mut z = self.net.forward(states);
        self.squash(&mut z);
        z
    }

    pub fn act(&self, alphas: &[f64]) -> Action {
        decode_action(&self.encoded(alphas))
    }

    pub fn encoded(&self, alphas: &[f64]) -> Vec<f64> {
        let s = encode_state(alphas);
        let x = ArrayView2::from_shape((1, s.len()), &s).expect("one row");
        self.forward(x).into_raw_vec_and_offset().0
    }

    /// Gradient of `mean_i Q(s_i, mu(s_i))` with respect to the actor weights,
    /// and that mean.
    pub fn policy_gradient(&self, critic: &Critic, states: ArrayView2<f64>) -> (f64, Grads) {
        let n = states.nrows();
        let dim = self.dim();
        let trace = self.net.trace(states);
        let mut actions = trace.output.clone();
        self.squash(&mut actions);
        let input = critic_input(states, actions.view());
        let ctrace = critic.net.trace(input.view());
        let q_mean = ctrace.output.sum() / n as f64;
        let d_q = Array2::from_elem((n, 1), 1.0 / n as f64);
        let (_, d_input) = critic.net.backward(&ctrace, d_q.view());
        let mut d_z = d_input.slice(s![.., dim..]).to_owned();
        for (mut row, arow) in d_z.rows_mut().into_iter().zip(actions.rows()) {
            for (j, (g, a)) in row.iter_mut().zip(arow).enumerate() {
                *g *= head_scale(j, dim) * (1.0 - a * a);
            }
        }
        let (grads, _) = self.net.backward(&trace, d_z.view());
        (q_mean, grads)
    }
}

/// Concatenates encoded states and encoded actions row-wise.
pub fn critic_input(states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Array2<f64> {
    ndarray::concatenate(Axis(1), &[states, actions]).expect("same number of rows")
}

impl Critic {
    pub fn new<R: Rng>(dim: usize, hidden: &[usize], rng: &mut R) -> Critic {
        Critic {
            net: Mlp::init(&sizes(2 * dim + 1, hidden, 1), rng),
        }
    }

    pub fn zeros(dim: usize, hidden: &[usize]) -> Critic {
        Critic {
            net: Mlp::zeros(&sizes(2 * dim + 1, hidden, 1)),
        }
    }

    pub fn forward(&self, states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Vec<f64> {
        self.net
            .forward(critic_input(states, actions).view())
            .into_raw_vec_and_offset()
            .0
    }

    pub fn value(&self, alphas: &[f64], action: &Action) -> f64 {
        let s = encode_state(alphas);
        let a = encode_action(action);
        let sv = ArrayView2::from_shape((1, s.len()), &s).expect("one row");
        let av = ArrayView2::from_shape((1, a.len()), &a).expect("one row");
        self.forward(sv, av)[0]
    }

    /// Mean squared error against `targets` and its gradient.
    pub fn regression(
        &self,
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
        targets: &[f64],
    ) -> (f64, Grads) {
        let n = states.nrows();
        let trace = self.net.trace(critic_input(states, actions).view());
        let mut loss = 0.0;
        let mut d = Array2::zeros((n, 1));
        for i in 0..n {
            let e = trace.output[(i, 0)] - targets[i];
            loss += e * e;
            d[(i, 0)] = 2.0 * e / n as f64;
        }
        let (grads, _) = self.net.backward(&trace, d.view());
        (loss / n as f64, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_networks() {
        let actor = Actor::zeros(35, &[64, 64, 64]);
        let critic = Critic::zeros(35, &[64, 64, 64]);
        let alphas = vec![0.3; 35];
        let a = actor.act(&alphas);
        assert!(a.delta.iter().all(|&d| d == 0.0));
        assert_eq!(a.powell_iters, 6);
        assert_eq!(critic.value(&alphas, &a), 0.0);
    }

    #[test]
    fn encoding_round_trip() {
        let a = Action::clipped(vec![0.4, -0.1, 0.0], 7);
        assert_eq!(decode_action(&encode_action(&a)), a);
    }

    #[test]
    fn random_actors_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let mut actor = Actor::new(35, &[16, 16], &mut rng);
            // large weights push the heads into saturation
            let p: Vec<f64> = actor.net.params().iter().map(|w| w * 500.0).collect();
            actor.net.set_params(&p);
            let alphas: Vec<f64> = (0..35).map(|_| rng.random_range(0.0..2.0)).collect();
            assert!(actor.act(&alphas).in_bounds());
        }
    }
}
