//! Minimal differentiable core: a dense layer with manual backprop, the Adam
//! optimizer, sigmoid/softmax helpers, and a small binary checkpoint format.
//!
//! Just enough machinery to train the prediction heads end-to-end on toy
//! tasks and to verify every gradient against finite differences.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("expected vector of length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("backward called before forward")]
    BackwardBeforeForward,
    #[error("checkpoint magic mismatch")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    /// `y = M x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `x = Mᵀ y`.
    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(r)) {
                *o += w * yr;
            }
        }
        out
    }
}

/// Four-lane dot product; fixed association order keeps runs bit-identical.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut chunks_a = a.chunks_exact(4);
    let mut chunks_b = b.chunks_exact(4);
    for (ca, cb) in (&mut chunks_a).zip(&mut chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (&x, &y) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn sigmoid_vec(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| sigmoid(x)).collect()
}

/// Softmax with max-logit subtraction so large logits cannot overflow.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&u| (u - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `ln Σ exp u`, stabilized the same way as [`softmax`].
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&u| (u - max).exp()).sum::<f64>().ln()
}

/// Affine map `y = W x + β` with gradient accumulators and Adam moments.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    grad_weights: Matrix,
    grad_bias: Vec<f64>,
    m_weights: Matrix,
    v_weights: Matrix,
    m_bias: Vec<f64>,
    v_bias: Vec<f64>,
    last_input: Option<Vec<f64>>,
}

impl DenseLayer {
    pub fn zeros(output_len: usize, input_len: usize) -> Self {
        Self {
            weights: Matrix::zeros(output_len, input_len),
            bias: vec![0.0; output_len],
            grad_weights: Matrix::zeros(output_len, input_len),
            grad_bias: vec![0.0; output_len],
            m_weights: Matrix::zeros(output_len, input_len),
            v_weights: Matrix::zeros(output_len, input_len),
            m_bias: vec![0.0; output_len],
            v_bias: vec![0.0; output_len],
            last_input: None,
        }
    }

    /// Uniform initialization in `[-scale, scale]` from the given generator.
    pub fn init_uniform(
        output_len: usize,
        input_len: usize,
        scale: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mut layer = Self::zeros(output_len, input_len);
        for v in layer.weights.data.iter_mut() {
            *v = rng.gen_range(-scale..=scale);
        }
        for v in layer.bias.iter_mut() {
            *v = rng.gen_range(-scale..=scale);
        }
        layer
    }

    pub fn from_parts(weights: Matrix, bias: Vec<f64>) -> Self {
        assert_eq!(weights.rows(), bias.len());
        let mut layer = Self::zeros(weights.rows(), weights.cols());
        layer.weights = weights;
        layer.bias = bias;
        layer
    }

    pub fn output_len(&self) -> usize {
        self.weights.rows()
    }

    pub fn input_len(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// `W x + β` without touching the backward cache; usable from `&self`
    /// for concurrent inference.
    pub fn affine(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        if input.len() != self.input_len() {
            return Err(NnError::ShapeMismatch {
                expected: self.input_len(),
                got: input.len(),
            });
        }
        let mut out = self.weights.matvec(input);
        for (o, &b) in out.iter_mut().zip(&self.bias) {
            *o += b;
        }
        Ok(out)
    }

    /// Forward pass that remembers its input for the next [`DenseLayer::backward`].
    pub fn forward(&mut self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        let out = self.affine(input)?;
        self.last_input = Some(input.to_vec());
        Ok(out)
    }

    /// Accumulates `∂L/∂W += upstream ⊗ input` and `∂L/∂β += upstream`,
    /// returning `∂L/∂input = Wᵀ upstream`.
    pub fn backward(&mut self, upstream: &[f64]) -> Result<Vec<f64>, NnError> {
        if upstream.len() != self.output_len() {
            return Err(NnError::ShapeMismatch {
                expected: self.output_len(),
                got: upstream.len(),
            });
        }
        let input = self
            .last_input
            .as_ref()
            .ok_or(NnError::BackwardBeforeForward)?;
        for (r, &u) in upstream.iter().enumerate() {
            if u != 0.0 {
                let row =
                    &mut self.grad_weights.data[r * self.weights.cols..(r + 1) * self.weights.cols];
                for (g, &x) in row.iter_mut().zip(input) {
                    *g += u * x;
                }
            }
            self.grad_bias[r] += u;
        }
        Ok(self.weights.transpose_matvec(upstream))
    }

    pub fn zero_grads(&mut self) {
        self.grad_weights.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    /// Scales accumulated gradients, e.g. by `1/batch` for a mean reduction.
    pub fn scale_grads(&mut self, factor: f64) {
        for g in self.grad_weights.data.iter_mut() {
            *g *= factor;
        }
        for g in self.grad_bias.iter_mut() {
            *g *= factor;
        }
    }

    /// `W` entries followed by `β` entries.
    pub fn num_params(&self) -> usize {
        self.weights.data.len() + self.bias.len()
    }

    pub fn param(&self, index: usize) -> f64 {
        let nw = self.weights.data.len();
        if index < nw {
            self.weights.data[index]
        } else {
            self.bias[index - nw]
        }
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let nw = self.weights.data.len();
        if index < nw {
            self.weights.data[index] = value;
        } else {
            self.bias[index - nw] = value;
        }
    }

    pub fn grad(&self, index: usize) -> f64 {
        let nw = self.grad_weights.data.len();
        if index < nw {
            self.grad_weights.data[index]
        } else {
            self.grad_bias[index - nw]
        }
    }

    fn adam_update(&mut self, cfg: &AdamConfig, step: u64) {
        let bias1 = 1.0 - cfg.beta1.powi(step as i32);
        let bias2 = 1.0 - cfg.beta2.powi(step as i32);
        let apply = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *p -= cfg.alpha * m_hat / (v_hat.sqrt() + cfg.epsilon);
        };
        for i in 0..self.weights.data.len() {
            apply(
                &mut self.weights.data[i],
                self.grad_weights.data[i],
                &mut self.m_weights.data[i],
                &mut self.v_weights.data[i],
            );
        }
        for i in 0..self.bias.len() {
            apply(
                &mut self.bias[i],
                self.grad_bias[i],
                &mut self.m_bias[i],
                &mut self.v_bias[i],
            );
        }
    }
}

/// Adam hyper-parameters; the defaults are the standard fixed values.
#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. One [`AdamOptimizer::step`] advances the shared
/// step counter once and updates every layer passed in.
#[derive(Debug, Clone)]
pub struct AdamOptimizer {
    config: AdamConfig,
    step_count: u64,
}

impl AdamOptimizer {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn step<'a>(&mut self, layers: impl IntoIterator<Item = &'a mut DenseLayer>) {
        self.step_count += 1;
        for layer in layers {
            layer.adam_update(&self.config, self.step_count);
        }
    }
}

const CHECKPOINT_MAGIC: [u8; 4] = *b"BVCK";
const CHECKPOINT_VERSION: u32 = 1;

/// Writes layers as a versioned binary checkpoint: magic, version, layer
/// shapes, then per layer the weights (row-major) and bias as little-endian
/// f64. Optimizer state is not persisted.
pub fn save_checkpoint(path: &Path, layers: &[&DenseLayer]) -> Result<(), NnError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&CHECKPOINT_MAGIC)?;
    file.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    file.write_all(&(layers.len() as u32).to_le_bytes())?;
    for layer in layers {
        file.write_all(&(layer.output_len() as u32).to_le_bytes())?;
        file.write_all(&(layer.input_len() as u32).to_le_bytes())?;
    }
    for layer in layers {
        for &v in layer.weights.data() {
            file.write_all(&v.to_le_bytes())?;
        }
        for &v in layer.bias() {
            file.write_all(&v.to_le_bytes())?;
        }
    }
    file.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<DenseLayer>, NnError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(NnError::BadMagic);
    }
    let version = read_u32(&mut file)?;
    if version != CHECKPOINT_VERSION {
        return Err(NnError::UnsupportedVersion(version));
    }
    let n_layers = read_u32(&mut file)? as usize;
    if n_layers > 1024 {
        return Err(NnError::CorruptCheckpoint(format!("{n_layers} layers")));
    }
    let mut shapes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let rows = read_u32(&mut file)? as usize;
        let cols = read_u32(&mut file)? as usize;
        if rows == 0 || cols == 0 {
            return Err(NnError::CorruptCheckpoint(format!(
                "degenerate shape {rows}x{cols}"
            )));
        }
        shapes.push((rows, cols));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for (rows, cols) in shapes {
        let mut layer = DenseLayer::zeros(rows, cols);
        for i in 0..rows * cols {
            layer.weights.data[i] = read_f64(&mut file)?;
        }
        for i in 0..rows {
            layer.bias[i] = read_f64(&mut file)?;
        }
        layers.push(layer);
    }
    let mut trailing = [0u8; 1];
    match file.read(&mut trailing)? {
        0 => Ok(layers),
        _ => Err(NnError::CorruptCheckpoint("trailing bytes".into())),
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32, NnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64, NnError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_constant_affine_maps() {
        let eye = Matrix::from_fn(3, 3, |r, c| f64::from(r == c));
        let layer = DenseLayer::from_parts(eye, vec![0.0; 3]);
        assert_eq!(
            layer.affine(&[1.5, -2.0, 0.25]).unwrap(),
            vec![1.5, -2.0, 0.25]
        );

        let constant = DenseLayer::from_parts(Matrix::zeros(2, 3), vec![4.0, -1.0]);
        assert_eq!(constant.affine(&[9.0, 9.0, 9.0]).unwrap(), vec![4.0, -1.0]);
    }

    #[test]
    fn affine_matches_per_element_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layer = DenseLayer::init_uniform(8, 5, 1.0, &mut rng);
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let got = layer.affine(&x).unwrap();
        for (r, &got_r) in got.iter().enumerate() {
            let mut expect = layer.bias()[r];
            for (c, &x_c) in x.iter().enumerate() {
                expect += layer.weights().get(r, c) * x_c;
            }
            assert!((got_r - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_rejects_shape_mismatch() {
        let layer = DenseLayer::zeros(2, 3);
        assert!(matches!(
            layer.affine(&[1.0]),
            Err(NnError::ShapeMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn backward_before_forward_is_an_error() {
        let mut layer = DenseLayer::zeros(2, 2);
        assert!(matches!(
            layer.backward(&[1.0, 1.0]),
            Err(NnError::BackwardBeforeForward)
        ));
    }

    #[test]
    fn backward_accumulates_outer_product_and_returns_input_grad() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut layer = DenseLayer::init_uniform(3, 4, 0.5, &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upstream = vec![0.3, -1.2, 0.7];
        layer.forward(&x).unwrap();
        let dx = layer.backward(&upstream).unwrap();
        for (r, &u) in upstream.iter().enumerate() {
            assert!((layer.grad(r * 4) - u * x[0]).abs() < 1e-12);
            assert!((layer.grad(12 + r) - u).abs() < 1e-12);
        }
        for (c, &dx_c) in dx.iter().enumerate() {
            let expect: f64 = upstream
                .iter()
                .enumerate()
                .map(|(r, &u)| layer.weights().get(r, c) * u)
                .sum();
            assert!((dx_c - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn layer_gradients_match_central_differences() {
        // scalar loss: L = Σ (sigmoid(Wx+β) - y)².
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut layer = DenseLayer::init_uniform(4, 3, 0.4, &mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();

        let loss = |layer: &DenseLayer| -> f64 {
            let q = sigmoid_vec(&layer.affine(&x).unwrap());
            q.iter()
                .zip(&target)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum()
        };

        let pre = layer.affine(&x).unwrap();
        let q = sigmoid_vec(&pre);
        let upstream: Vec<f64> = q
            .iter()
            .zip(&target)
            .map(|(&qi, &ti)| 2.0 * (qi - ti) * qi * (1.0 - qi))
            .collect();
        layer.forward(&x).unwrap();
        layer.backward(&upstream).unwrap();

        let h = 1e-4;
        for i in 0..layer.num_params() {
            let orig = layer.param(i);
            layer.set_param(i, orig + h);
            let plus = loss(&layer);
            layer.set_param(i, orig - h);
            let minus = loss(&layer);
            layer.set_param(i, orig);
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = layer.grad(i);
            let denom = analytic.abs().max(numeric.abs()).max(1e-3);
            assert!(
                ((analytic - numeric) / denom).abs() < 1e-4,
                "param {i}: analytic {analytic} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn softmax_is_stable_and_normalized() {
        let probs = softmax(&[1000.0, 1001.0, 999.0]);
        assert!(probs.iter().all(|p| p.is_finite() && *p > 0.0));
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(probs[1] > probs[0] && probs[0] > probs[2]);

        let lse = log_sum_exp(&[0.0, (2.0f64).ln()]);
        assert!((lse - (3.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn adam_leaves_parameters_alone_on_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut layer = DenseLayer::init_uniform(3, 3, 0.2, &mut rng);
        let before: Vec<f64> = (0..layer.num_params()).map(|i| layer.param(i)).collect();
        let mut adam = AdamOptimizer::new(AdamConfig::default());
        adam.step([&mut layer]);
        let after: Vec<f64> = (0..layer.num_params()).map(|i| layer.param(i)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn first_adam_step_moves_by_alpha_regardless_of_gradient_scale() {
        for g in [0.5, 3.7, 100.0] {
            let mut layer = DenseLayer::zeros(1, 1);
            layer.forward(&[1.0]).unwrap();
            layer.backward(&[g]).unwrap();
            let mut adam = AdamOptimizer::new(AdamConfig::default());
            adam.step([&mut layer]);
            // both the weight (input 1.0) and the bias saw gradient g
            assert!((layer.param(0).abs() - 0.001).abs() < 1e-6, "g = {g}");
            assert!(layer.param(0) < 0.0);
        }
    }

    #[test]
    fn adam_minimizes_a_quadratic_bowl() {
        // L(y) = Σ (y - c)² with y = W·[1] + β.
        let targets = [0.7, -0.4, 0.25, 0.05];
        let mut layer = DenseLayer::zeros(4, 1);
        let mut adam = AdamOptimizer::new(AdamConfig::default());
        let mut losses = Vec::new();
        for _ in 0..2000 {
            let y = layer.forward(&[1.0]).unwrap();
            let loss: f64 = y
                .iter()
                .zip(&targets)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            losses.push(loss);
            let upstream: Vec<f64> = y
                .iter()
                .zip(&targets)
                .map(|(&a, &b)| 2.0 * (a - b))
                .collect();
            layer.zero_grads();
            layer.backward(&upstream).unwrap();
            adam.step([&mut layer]);
        }
        assert!(
            *losses.last().unwrap() < 1e-3,
            "final loss {}",
            losses.last().unwrap()
        );

        // moving 10-step averages never increase on this convex problem
        let averages: Vec<f64> = losses
            .chunks(10)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        for pair in averages.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
    }

    #[test]
    fn training_is_bit_deterministic_for_a_fixed_seed() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let mut layer = DenseLayer::init_uniform(5, 4, 0.1, &mut rng);
            let mut adam = AdamOptimizer::new(AdamConfig::default());
            for step in 0..50 {
                let x: Vec<f64> = (0..4).map(|i| ((step + i) as f64 * 0.37).sin()).collect();
                let y = layer.forward(&x).unwrap();
                let upstream: Vec<f64> = y.iter().map(|&v| 2.0 * (v - 0.5)).collect();
                layer.zero_grads();
                layer.backward(&upstream).unwrap();
                adam.step([&mut layer]);
            }
            (0..layer.num_params())
                .map(|i| layer.param(i).to_bits())
                .collect::<Vec<u64>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn checkpoint_roundtrip_preserves_parameters_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let hidden = DenseLayer::init_uniform(6, 3, 0.3, &mut rng);
        let head = DenseLayer::init_uniform(4, 6, 0.3, &mut rng);
        save_checkpoint(&path, &[&hidden, &head]).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        for (orig, got) in [&hidden, &head].iter().zip(&loaded) {
            assert_eq!(orig.weights(), got.weights());
            assert_eq!(orig.bias(), got.bias());
        }
    }

    #[test]
    fn checkpoint_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(NnError::BadMagic) | Err(NnError::Io(_))
        ));

        let good = dir.path().join("good.ckpt");
        let layer = DenseLayer::zeros(2, 2);
        save_checkpoint(&good, &[&layer]).unwrap();
        let mut bytes = std::fs::read(&good).unwrap();
        bytes.push(0);
        std::fs::write(&good, bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&good),
            Err(NnError::CorruptCheckpoint(_))
        ));
    }
}
