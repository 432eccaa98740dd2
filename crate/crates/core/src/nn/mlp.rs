use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Relu => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(T::zero()),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_at_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Tanh => T::one() - y * y,
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Identity => T::one(),
        }
    }
}

/// Dense feed-forward network.
///
/// Parameters live in one flat buffer laid out as `W0, b0, W1, b1, ...` with
/// each weight matrix row-major (`out x in`). Gradients use the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    widths: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<T>,
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache<T> {
    /// `layers[0]` is the input, `layers[l + 1]` the output of layer `l`.
    layers: Vec<Vec<T>>,
}

impl<T: Real> Cache<T> {
    pub fn output(&self) -> &[T] {
        self.layers.last().expect("cache holds the input at least")
    }
}

/// Row-major `rows x cols` matrix with orthonormal rows or columns,
/// whichever are fewer, from Gram-Schmidt on a Gaussian draw.
fn orthogonal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    let (k, n) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut m = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            m[r * cols + c] = if rows <= cols { basis[r][c] } else { basis[c][r] };
        }
    }
    m
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Real> Mlp<T> {
    /// Hidden layers use `hidden`, the output layer is linear. Weights are
    /// uniform on `±1/sqrt(fan_in)`, biases zero.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], hidden: Activation, rng: &mut R) -> Result<Self> {
        Self::check_widths(widths)?;
        let n_layers = widths.len() - 1;
        let activations = (0..n_layers)
            .map(|l| if l + 1 == n_layers { Activation::Identity } else { hidden })
            .collect();
        let mut params = Vec::with_capacity(param_count(widths));
        for w in widths.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| T::lit(rng.random_range(-bound..bound))));
            params.extend(std::iter::repeat_n(T::zero(), w[1]));
        }
        Ok(Self { widths: widths.to_vec(), activations, params })
    }

    /// Orthogonal weights scaled by `gains[l]` per layer, biases zero.
    pub fn orthogonal<R: Rng + ?Sized>(widths: &[usize], hidden: Activation, gains: &[f64], rng: &mut R) -> Result<Self> {
        let mut net = Self::new(widths, hidden, rng)?;
        if gains.len() + 1 != widths.len() {
            return Err(Error::Shape(format!("{} gains for {} layers", gains.len(), widths.len() - 1)));
        }
        for (l, gain) in gains.iter().enumerate() {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let w = orthogonal_matrix(n_out, n_in, rng);
            let (off, _) = net.offsets(l);
            for (p, x) in net.params[off..off + n_in * n_out].iter_mut().zip(w) {
                *p = T::lit(gain * x);
            }
        }
        Ok(net)
    }

    pub fn from_parts(widths: Vec<usize>, activations: Vec<Activation>, params: Vec<T>) -> Result<Self> {
        Self::check_widths(&widths)?;
        if activations.len() + 1 != widths.len() {
            return Err(Error::Shape(format!(
                "{} activations for {} layers",
                activations.len(),
                widths.len() - 1
            )));
        }
        if params.len() != param_count(&widths) {
            return Err(Error::Shape(format!(
                "{} parameters for layout {widths:?}, expected {}",
                params.len(),
                param_count(&widths)
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameter".into()));
        }
        Ok(Self { widths, activations, params })
    }

    fn check_widths(widths: &[usize]) -> Result<()> {
        if widths.len() < 2 {
            return Err(Error::Config("a network needs at least an input and an output width".into()));
        }
        if widths.contains(&0) {
            return Err(Error::Config(format!("zero-width layer in {widths:?}")));
        }
        Ok(())
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn zero_grads(&self) -> Vec<T> {
        vec![T::zero(); self.params.len()]
    }

    /// Offset of layer `l`'s weight block and bias block.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let start = param_count(&self.widths[..=l]);
        (start, start + self.widths[l] * self.widths[l + 1])
    }

    /// Multiply layer `l`'s weights by `factor`.
    pub fn scale_layer(&mut self, l: usize, factor: T) {
        let (w, b) = self.offsets(l);
        for p in &mut self.params[w..b] {
            *p *= factor;
        }
    }

    pub fn forward(&self, input: &[T]) -> Result<(Vec<T>, Cache<T>)> {
        if input.len() != self.input_width() {
            return Err(Error::Shape(format!("input of width {}, expected {}", input.len(), self.input_width())));
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("network input".into()));
        }
        let mut layers = Vec::with_capacity(self.widths.len());
        layers.push(input.to_vec());
        for (l, act) in self.activations.iter().enumerate() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let (w_off, b_off) = self.offsets(l);
            let x = &layers[l];
            let y: Vec<T> = (0..n_out)
                .map(|o| {
                    let row = &self.params[w_off + o * n_in..w_off + (o + 1) * n_in];
                    let z = row.iter().zip(x).fold(self.params[b_off + o], |acc, (w, xi)| acc + *w * *xi);
                    act.apply(z)
                })
                .collect();
            layers.push(y);
        }
        let out = layers.last().unwrap().clone();
        Ok((out, Cache { layers }))
    }

    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        self.forward(input).map(|(y, _)| y)
    }

    /// Accumulate parameter gradients of `grad_out · output` into `grads`.
    pub fn backward(&self, cache: &Cache<T>, grad_out: &[T], grads: &mut [T]) -> Result<()> {
        if cache.layers.len() != self.widths.len() || cache.layers[0].len() != self.input_width() {
            return Err(Error::Shape("cache does not belong to this network".into()));
        }
        if grad_out.len() != self.output_width() {
            return Err(Error::Shape(format!(
                "output gradient of width {}, expected {}",
                grad_out.len(),
                self.output_width()
            )));
        }
        if grads.len() != self.params.len() {
            return Err(Error::Shape("gradient buffer does not match parameters".into()));
        }
        let mut delta = grad_out.to_vec();
        for l in (0..self.activations.len()).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let (w_off, b_off) = self.offsets(l);
            let y = &cache.layers[l + 1];
            let x = &cache.layers[l];
            for o in 0..n_out {
                delta[o] *= self.activations[l].derivative_at_output(y[o]);
            }
            let mut prev = vec![T::zero(); n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == T::zero() {
                    continue;
                }
                grads[b_off + o] += d;
                let row = w_off + o * n_in;
                for i in 0..n_in {
                    grads[row + i] += d * x[i];
                    prev[i] += d * self.params[row + i];
                }
            }
            delta = prev;
        }
        Ok(())
    }
}
