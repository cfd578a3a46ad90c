//! Small fully connected networks with hand-written backprop and Adam.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

/// Affine layer `y = x W + b`, rows are samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Dense {
        Dense {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    /// Uniform in `[-scale, scale]`.
    pub fn uniform<R: Rng>(fan_in: usize, fan_out: usize, scale: f64, rng: &mut R) -> Dense {
        let mut draw = || rng.random_range(-scale..=scale);
        let w = Array2::from_shape_simple_fn((fan_in, fan_out), &mut draw);
        let b = Array1::from_shape_simple_fn(fan_out, &mut draw);
        Dense { w, b }
    }

    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

/// Multilayer perceptron: tanh on hidden layers, linear output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    /// Input of every layer; `inputs[0]` is the network input.
    inputs: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

/// Gradients with the same shapes as an [`Mlp`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grads {
    pub layers: Vec<Dense>,
}

/// Final-layer init half-width, small so initial outputs sit near the center.
pub const FINAL_LAYER_SCALE: f64 = 3e-3;

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Mlp {
        Mlp {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    /// Hidden layers uniform in `+-1/sqrt(fan_in)`, final layer in
    /// `+-FINAL_LAYER_SCALE`.
    pub fn init<R: Rng>(sizes: &[usize], rng: &mut R) -> Mlp {
        let n = sizes.len() - 1;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let scale = if i + 1 == n {
                    FINAL_LAYER_SCALE
                } else {
                    1.0 / (w[0] as f64).sqrt()
                };
                Dense::uniform(w[0], w[1], scale, rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Dense::fan_out)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.trace(x).output
    }

    pub fn trace(&self, x: ArrayView2<f64>) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(h.view());
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            inputs.push(h);
            h = z;
        }
        Trace { inputs, output: h }
    }

    /// Backpropagates `d_out = dL/d output`; returns parameter gradients and
    /// `dL/d input`.
    pub fn backward(&self, trace: &Trace, d_out: ArrayView2<f64>) -> (Grads, Array2<f64>) {
        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        let mut delta = d_out.to_owned();
        for i in (0..self.layers.len()).rev() {
            let x = &trace.inputs[i];
            let layer = &self.layers[i];
            grads.push(Dense {
                w: x.t().dot(&delta),
                b: delta.sum_axis(Axis(0)),
            });
            let mut dx = delta.dot(&layer.w.t());
            if i > 0 {
                // x is tanh of the previous pre-activation
                dx.zip_mut_with(x, |d, &h| *d *= 1.0 - h * h);
            }
            delta = dx;
        }
        grads.reverse();
        (Grads { layers: grads }, delta)
    }

    /// `self = tau * other + (1 - tau) * self`.
    pub fn blend_from(&mut self, other: &Mlp, tau: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w.zip_mut_with(&b.w, |x, &y| *x += tau * (y - *x));
            a.b.zip_mut_with(&b.b, |x, &y| *x += tau * (y - *x));
        }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            v.extend(l.w.iter());
            v.extend(l.b.iter());
        }
        v
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params());
        let mut it = p.iter();
        for l in &mut self.layers {
            l.w.iter_mut()
                .chain(l.b.iter_mut())
                .for_each(|x| *x = *it.next().unwrap());
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(l.b.iter()).all(|x| x.is_finite()))
    }
}

impl Grads {
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for l in &self.layers {
            v.extend(l.w.iter());
            v.extend(l.b.iter());
        }
        v
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.w *= s;
            l.b *= s;
        }
    }
}

/// Adam with bias correction; the learning rate is passed per step so a
/// schedule can drive it.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

impl Adam {
    pub fn new(net: &Mlp) -> Adam {
        let zeros: Vec<Dense> = net
            .layers
            .iter()
            .map(|l| Dense::zeros(l.fan_in(), l.fan_out()))
            .collect();
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// Descends along `grads` (gradients of a loss to minimize).
    pub fn step(&mut self, net: &mut Mlp, grads: &Grads, lr: f64) {
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((layer, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::Zip::from(&mut layer.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .and(&g.w)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut layer.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .and(&g.b)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}
