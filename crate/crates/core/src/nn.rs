//! Fixed-topology multilayer perceptron: tanh hidden layers, identity output,
//! exact reverse-mode gradients and plain gradient descent.
//!
//! Parameters live in one flat vector. Layer `l` (mapping `n_in -> n_out`)
//! stores its `n_out x n_in` weight matrix row-major followed by its `n_out`
//! biases; layers follow each other in order.
//!
//! Binary layout written by [`Network::write_to`] (all integers little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `GSNN` |
//! | 2 | format version (1) |
//! | 4 | number of layer sizes `k` |
//! | 4·k | layer sizes |
//! | 8·P | parameters as IEEE-754 `f64`, in the flat order above |

use std::io::{Read, Write};

use thiserror::Error;

use crate::stochastic::make_rng;

pub const NETWORK_MAGIC: &[u8; 4] = b"GSNN";
pub const NETWORK_FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("network needs at least two layer sizes, all positive")]
    Topology,
    #[error("bad network header: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Gradient with the same flat layout as the [`Network`] it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    sizes: Vec<usize>,
    values: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
pub fn init_network(sizes: &[usize], seed: u64) -> Result<Network, NnError> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(NnError::Topology);
    }
    let mut rng = make_rng(seed);
    let mut params = Vec::with_capacity(param_count(sizes));
    for w in sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        params.extend((0..fan_in * fan_out).map(|_| (2.0 * rng.uniform() - 1.0) * limit));
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    Ok(Network {
        sizes: sizes.to_vec(),
        params,
    })
}

impl Network {
    pub fn from_params(sizes: Vec<usize>, params: Vec<f64>) -> Result<Self, NnError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NnError::Topology);
        }
        if params.len() != param_count(&sizes) {
            return Err(NnError::Format(format!(
                "expected {} parameters, got {}",
                param_count(&sizes),
                params.len()
            )));
        }
        Ok(Self { sizes, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `(weights, biases)` of layer `l`.
    fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let offset = param_count(&self.sizes[..=l]);
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.params[offset..offset + n_in * n_out];
        let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        (w, b)
    }

    /// Activations of every layer, input first, output last.
    pub fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(input.len(), self.input_len(), "input length mismatch");
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let prev = &acts[l];
            let n_in = self.sizes[l];
            let last = l + 1 == self.n_layers();
            let out: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(j, &bias)| {
                    let row = &w[j * n_in..(j + 1) * n_in];
                    let z = row.iter().zip(prev).map(|(w, x)| w * x).sum::<f64>() + bias;
                    if last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_trace(input).pop().expect("output layer")
    }

    /// Gradient of `output · upstream` with respect to every parameter.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Gradients {
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(input, upstream, &mut grads);
        grads
    }

    /// Accumulate the gradient of `output · upstream` into `grads`.
    pub fn backward_into(&self, input: &[f64], upstream: &[f64], grads: &mut Gradients) {
        assert_eq!(upstream.len(), self.output_len(), "upstream gradient length mismatch");
        assert_eq!(grads.sizes, self.sizes, "gradient shape mismatch");
        let acts = self.forward_trace(input);
        let mut delta = upstream.to_vec();
        for l in (0..self.n_layers()).rev() {
            let offset = param_count(&self.sizes[..=l]);
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &acts[l];
            let gw = &mut grads.values[offset..offset + n_in * n_out + n_out];
            for j in 0..n_out {
                let d = delta[j];
                if d != 0.0 {
                    for (g, x) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(prev) {
                        *g += d * x;
                    }
                }
                gw[n_in * n_out + j] += d;
            }
            if l == 0 {
                break;
            }
            let (w, _) = self.layer(l);
            delta = (0..n_in)
                .map(|i| {
                    let back: f64 = (0..n_out).map(|j| w[j * n_in + i] * delta[j]).sum();
                    back * (1.0 - prev[i] * prev[i])
                })
                .collect();
        }
    }

    /// `theta <- theta - learning_rate * grad`.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        assert_eq!(grads.sizes, self.sizes, "gradient shape mismatch");
        for (p, g) in self.params.iter_mut().zip(&grads.values) {
            *p -= learning_rate * g;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(NETWORK_MAGIC)?;
        w.write_all(&NETWORK_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.sizes.len() as u32).to_le_bytes())?;
        for &s in &self.sizes {
            w.write_all(&(s as u32).to_le_bytes())?;
        }
        for p in &self.params {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, NnError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != NETWORK_MAGIC {
            return Err(NnError::Format("magic mismatch".into()));
        }
        let mut v = [0u8; 2];
        r.read_exact(&mut v)?;
        let version = u16::from_le_bytes(v);
        if version != NETWORK_FORMAT_VERSION {
            return Err(NnError::Format(format!("unsupported version {version}")));
        }
        let n = read_u32(&mut r)? as usize;
        if !(2..=64).contains(&n) {
            return Err(NnError::Format(format!("implausible layer count {n}")));
        }
        let mut sizes = Vec::with_capacity(n);
        for _ in 0..n {
            let s = read_u32(&mut r)? as usize;
            if s == 0 || s > 1 << 20 {
                return Err(NnError::Format(format!("implausible layer size {s}")));
            }
            sizes.push(s);
        }
        let count = param_count(&sizes);
        let mut params = Vec::with_capacity(count);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            params.push(f64::from_le_bytes(buf));
        }
        Self::from_params(sizes, params)
    }
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            sizes: net.sizes.clone(),
            values: vec![0.0; net.params.len()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|g| *g *= factor);
    }

    pub fn add(&mut self, other: &Gradients) {
        assert_eq!(self.sizes, other.sizes, "gradient shape mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&g| g == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::make_rng;

    fn random_input(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = make_rng(seed);
        (0..n).map(|_| rng.normal(1.0)).collect()
    }

    /// Max elementwise relative error between analytic and central-difference
    /// gradients of `output · upstream`.
    fn gradient_check(net: &Network, input: &[f64], upstream: &[f64]) -> f64 {
        let h = 1e-5;
        let analytic = net.backward(input, upstream);
        let objective = |n: &Network| n.forward(input).iter().zip(upstream).map(|(o, u)| o * u).sum::<f64>();
        let mut worst: f64 = 0.0;
        for i in 0..net.params().len() {
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let numeric = (objective(&plus) - objective(&minus)) / (2.0 * h);
            let a = analytic.values()[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn init_is_deterministic_with_zero_biases_and_bounded_weights() {
        let sizes = [5, 7, 3];
        let a = init_network(&sizes, 4).unwrap();
        assert_eq!(a, init_network(&sizes, 4).unwrap());
        assert_ne!(a, init_network(&sizes, 5).unwrap());
        for l in 0..a.n_layers() {
            let (w, b) = a.layer(l);
            assert!(b.iter().all(|&x| x == 0.0));
            let limit = (6.0 / (sizes[l] + sizes[l + 1]) as f64).sqrt();
            assert!(w.iter().all(|x| x.abs() <= limit));
        }
        assert!(init_network(&[3], 0).is_err());
        assert!(init_network(&[3, 0, 2], 0).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = init_network(&[3, 4, 2], 1).unwrap();
        net.params_mut().iter_mut().for_each(|p| *p = 0.0);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn single_affine_layer() {
        let net = Network::from_params(vec![1, 1], vec![2.5, -1.0]).unwrap();
        assert_eq!(net.forward(&[3.0]), vec![6.5]);
        let g = net.backward(&[3.0], &[1.0]);
        assert_eq!(g.values(), &[3.0, 1.0]);
    }

    #[test]
    fn saturated_inputs_stay_finite() {
        let net = init_network(&[4, 16, 16, 3], 2).unwrap();
        let out = net.forward(&[1e3, -1e3, 5e2, -7e2]);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = init_network(&[4, 8, 3], 3).unwrap();
        assert!(net.backward(&random_input(4, 1), &[0.0; 3]).is_zero());
    }

    #[test]
    fn gradients_match_finite_differences() {
        for (shape, seed) in [(vec![4, 8, 3], 10u64), (vec![2, 5, 5, 1], 11), (vec![6, 3, 4], 12)] {
            for draw in 0..10 {
                let mut net = init_network(&shape, seed * 100 + draw).unwrap();
                let mut rng = make_rng(seed + draw);
                net.params_mut().iter_mut().for_each(|p| *p += rng.normal(0.1));
                let input = random_input(shape[0], draw);
                let upstream = random_input(*shape.last().unwrap(), draw + 50);
                let err = gradient_check(&net, &input, &upstream);
                assert!(err < 1e-4, "shape {shape:?} draw {draw}: rel err {err}");
            }
        }
    }

    #[test]
    fn apply_gradient_cases() {
        let net = init_network(&[2, 3, 1], 0).unwrap();
        let grads = net.backward(&[1.0, 2.0], &[1.0]);
        let mut same = net.clone();
        same.apply_gradients(&grads, 0.0);
        assert_eq!(same, net);
        let mut same = net.clone();
        same.apply_gradients(&Gradients::zeros_like(&net), 0.5);
        assert_eq!(same, net);

        // f(theta) = theta^2 with theta stored as a bias; grad = 2 theta.
        let mut single = Network::from_params(vec![1, 1], vec![0.0, 1.0]).unwrap();
        let theta = single.params()[1];
        let g = Gradients {
            sizes: vec![1, 1],
            values: vec![0.0, 2.0 * theta],
        };
        single.apply_gradients(&g, 0.1);
        assert!((single.params()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn descent_on_convex_quadratic_is_monotone() {
        let mut net = init_network(&[3, 4, 2], 7).unwrap();
        let loss = |n: &Network| n.params().iter().map(|p| p * p).sum::<f64>();
        let mut prev = loss(&net);
        for _ in 0..200 {
            let g = Gradients {
                sizes: net.sizes.clone(),
                values: net.params().iter().map(|p| 2.0 * p).collect(),
            };
            net.apply_gradients(&g, 0.01);
            let now = loss(&net);
            assert!(now < prev);
            prev = now;
        }
    }

    #[test]
    fn forward_is_bit_deterministic() {
        let net = init_network(&[5, 9, 4], 21).unwrap();
        let x = random_input(5, 3);
        let a: Vec<u64> = net.forward(&x).iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = net.clone().forward(&x).iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let net = init_network(&[3, 5, 2], 9).unwrap();
        let mut bytes = Vec::new();
        net.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 2 + 4 + 3 * 4 + 8 * net.params().len());
        let back = Network::read_from(bytes.as_slice()).unwrap();
        assert_eq!(
            back.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
            net.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>()
        );
        assert!(Network::read_from(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Network::read_from(bad.as_slice()).is_err());
        let mut bad = bytes;
        bad[4] = 9;
        assert!(Network::read_from(bad.as_slice()).is_err());
    }
}
