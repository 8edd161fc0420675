//! Monte-Carlo forward propagation through multilayer perceptrons: per-layer
//! pre-activation tracking against the Gaussian reference, class-correlation
//! matrices, and the small two-layer dependence experiments.

use crate::distributions::{mean_std, standardize, SymmetricWeibull};
use crate::eoc::Activation;
use crate::kstest::{ks_test, KsResult};
use crate::rng::{derive_seed, stream_rng};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Parameter law for one network.
#[derive(Debug, Clone, Copy, serde::Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Init {
    /// W ~ N(0, sigma_w^2), B ~ N(0, sigma_b^2).
    Gaussian { sigma_w: f64, sigma_b: f64 },
    /// W symmetric Weibull, zero bias.
    Weibull { theta: f64 },
    /// W uniform on {-1, +1}, zero bias.
    Rademacher,
}

/// One multilayer perceptron: widths n_0..n_L plus the parameter law.
pub struct NetworkConfig<'a> {
    pub widths: Vec<usize>,
    pub activation: &'a dyn Activation,
    pub init: Init,
}

impl NetworkConfig<'_> {
    fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::InvalidParameter(
                "network needs at least one layer (two widths)".into(),
            ));
        }
        if self.widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidParameter("all widths must be >= 1".into()));
        }
        if let Init::Gaussian { sigma_w, sigma_b } = self.init {
            if !(sigma_w > 0.0) || !(sigma_b >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "need sigma_w > 0 and sigma_b >= 0, got ({sigma_w}, {sigma_b})"
                )));
            }
        }
        if let Init::Weibull { theta } = self.init {
            SymmetricWeibull::new(theta)?;
        }
        Ok(())
    }
}

/// Streams parameter draws for one network realization.
struct ParamSampler {
    init: Init,
    weibull: Option<SymmetricWeibull>,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl ParamSampler {
    fn new(init: Init, rng: ChaCha8Rng) -> Result<Self> {
        let weibull = match init {
            Init::Weibull { theta } => Some(SymmetricWeibull::new(theta)?),
            _ => None,
        };
        Ok(Self { init, weibull, rng, spare_normal: None })
    }

    fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        let (a, b) = crate::distributions::normal_pair(&mut self.rng);
        self.spare_normal = Some(b);
        a
    }

    fn weight(&mut self) -> f64 {
        match self.init {
            Init::Gaussian { sigma_w, .. } => sigma_w * self.normal(),
            Init::Weibull { .. } => self.weibull.as_ref().unwrap().sample_one(&mut self.rng),
            Init::Rademacher => {
                if self.rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn bias(&mut self) -> f64 {
        match self.init {
            Init::Gaussian { sigma_b, .. } if sigma_b > 0.0 => sigma_b * self.normal(),
            _ => 0.0,
        }
    }
}

/// One forward pass per Z^{l+1} = (1/sqrt(n_l)) W^l X^l + B^l with freshly
/// streamed parameters; returns the pre-activations Z^1..Z^L.
fn forward_impl(
    config: &NetworkConfig,
    x: &[f64],
    sampler: &mut ParamSampler,
) -> Vec<Vec<f64>> {
    let mut layers = Vec::with_capacity(config.widths.len() - 1);
    let mut current: Vec<f64> = x.to_vec();
    for l in 1..config.widths.len() {
        let n_in = config.widths[l - 1];
        let n_out = config.widths[l];
        let scale = 1.0 / (n_in as f64).sqrt();
        let mut z = Vec::with_capacity(n_out);
        for _ in 0..n_out {
            let mut acc = 0.0;
            for &xv in &current {
                acc += sampler.weight() * xv;
            }
            z.push(scale * acc + sampler.bias());
        }
        current = z.iter().map(|&v| config.activation.eval(v)).collect();
        layers.push(z);
    }
    layers
}

/// One realization of all pre-activation vectors for a given input and seed.
pub fn forward(config: &NetworkConfig, x: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    if x.len() != config.widths[0] {
        return Err(Error::DimensionMismatch { expected: config.widths[0], got: x.len() });
    }
    let mut sampler = ParamSampler::new(config.init, stream_rng(seed, 0))?;
    Ok(forward_impl(config, x, &mut sampler))
}

/// Forward pass with every weight and bias pinned to fixed values (test hook
/// for the scaling arithmetic).
pub fn forward_fixed_params(
    config: &NetworkConfig,
    x: &[f64],
    weight: f64,
    bias: f64,
) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    if x.len() != config.widths[0] {
        return Err(Error::DimensionMismatch { expected: config.widths[0], got: x.len() });
    }
    let mut layers = Vec::with_capacity(config.widths.len() - 1);
    let mut current: Vec<f64> = x.to_vec();
    for l in 1..config.widths.len() {
        let n_in = config.widths[l - 1];
        let scale = 1.0 / (n_in as f64).sqrt();
        let sum: f64 = current.iter().sum::<f64>() * weight;
        let z = vec![scale * sum + bias; config.widths[l]];
        current = z.iter().map(|&v| config.activation.eval(v)).collect();
        layers.push(z);
    }
    Ok(layers)
}

/// Per-layer summary of the tracked coordinate Z^l_1.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LayerStats {
    pub layer: usize,
    pub mean: f64,
    pub std: f64,
    pub ks_raw: f64,
    pub ks_standardized: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PropagationReport {
    pub sample_count: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub layers: Vec<LayerStats>,
}

fn ks_pair(samples: &[f64], alpha: f64) -> Result<(f64, f64)> {
    let raw = ks_test(samples, crate::distributions::std_normal_cdf, alpha)?;
    let (_, sd) = mean_std(samples)?;
    let std_ks = if sd > 0.0 {
        let standardized = standardize(samples)?;
        ks_test(&standardized, crate::distributions::std_normal_cdf, alpha)?.statistic
    } else {
        raw.statistic
    };
    Ok((raw.statistic, std_ks))
}

/// Distribution of Z^l_1 across `s` independent parameter draws for a fixed
/// input, reported layer by layer.
pub fn layer_distribution_experiment(
    config: &NetworkConfig,
    input: &[f64],
    s: usize,
    master_seed: u64,
) -> Result<PropagationReport> {
    config.validate()?;
    if input.len() != config.widths[0] {
        return Err(Error::DimensionMismatch { expected: config.widths[0], got: input.len() });
    }
    if s < 100 {
        return Err(Error::InvalidParameter(format!("need s >= 100 draws, got {s}")));
    }
    let depth = config.widths.len() - 1;
    // draws are independent under derived seeds, so the split over draws is
    // order-independent
    let per_draw: Vec<Result<Vec<f64>>> = (0..s)
        .into_par_iter()
        .map(|draw| {
            let rng = stream_rng(master_seed, derive_seed(master_seed, draw as u64));
            let mut sampler = ParamSampler::new(config.init, rng)?;
            let layers = forward_impl(config, input, &mut sampler);
            let mut firsts = Vec::with_capacity(depth);
            for (l, z) in layers.iter().enumerate() {
                let v = z[0];
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("pre-activation at layer {}", l + 1)));
                }
                firsts.push(v);
            }
            Ok(firsts)
        })
        .collect();
    let mut tracked = vec![Vec::with_capacity(s); depth];
    for row in per_draw {
        for (l, v) in row?.into_iter().enumerate() {
            tracked[l].push(v);
        }
    }
    let alpha = 0.05;
    let threshold = crate::kstest::ks_threshold(s, alpha)?;
    let mut stats = Vec::with_capacity(depth);
    for (l, samples) in tracked.iter().enumerate() {
        let (mean, std) = mean_std(samples)?;
        let (ks_raw, ks_standardized) = ks_pair(samples, alpha)?;
        stats.push(LayerStats { layer: l + 1, mean, std, ks_raw, ks_standardized });
    }
    Ok(PropagationReport { sample_count: s, alpha, threshold, layers: stats })
}

/// Per-channel affine normalization over the whole dataset (dataset-wide
/// mean and population deviation per channel).
pub fn normalize_whole_dataset(
    dataset: &[Vec<f64>],
    channel_lengths: &[usize],
) -> Result<Vec<Vec<f64>>> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let dim: usize = channel_lengths.iter().sum();
    if dim == 0 || dataset.iter().any(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: dataset.iter().map(|x| x.len()).find(|&l| l != dim).unwrap_or(0),
        });
    }
    let mut out = dataset.to_vec();
    let mut offset = 0;
    for &len in channel_lengths {
        let values: Vec<f64> = dataset
            .iter()
            .flat_map(|x| x[offset..offset + len].iter().copied())
            .collect();
        let n = values.len() as f64;
        let mu = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        if var <= 0.0 {
            return Err(Error::Degenerate(format!(
                "channel at offset {offset} has zero variance"
            )));
        }
        let sd = var.sqrt();
        for x in out.iter_mut() {
            for v in x[offset..offset + len].iter_mut() {
                *v = (*v - mu) / sd;
            }
        }
        offset += len;
    }
    Ok(out)
}

/// Individual input normalization: empirical mean 0, corrected variance 1.
pub fn normalize_individual(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 coordinates".into()));
    }
    let (_, sd) = mean_std(x)?;
    if sd <= 0.0 {
        return Err(Error::Degenerate("constant input vector".into()));
    }
    standardize(x)
}

/// Per-layer class-averaged correlation matrices C_pq.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CorrelationReport {
    pub class_count: usize,
    /// Per layer: class_count x class_count matrix.
    pub matrices: Vec<Vec<Vec<f64>>>,
    /// Raw second moments are averaged across draws and coordinates before
    /// normalizing into correlations.
    pub moment_averaging: &'static str,
}

/// Correlation propagation: for every input pair, E[Z_{j;a} Z_{j;b}]
/// accumulated over draws and coordinates, normalized, then averaged over
/// class blocks with the a=b pairs excluded on the diagonal.
pub fn correlation_experiment(
    inputs: &[(usize, Vec<f64>)],
    config: &NetworkConfig,
    n_init: usize,
    master_seed: u64,
) -> Result<CorrelationReport> {
    config.validate()?;
    if n_init == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let class_count = inputs.iter().map(|(c, _)| c + 1).max().unwrap_or(0);
    if class_count < 2 {
        return Err(Error::InvalidParameter("need at least 2 classes".into()));
    }
    for p in 0..class_count {
        if inputs.iter().filter(|(c, _)| *c == p).count() < 2 {
            return Err(Error::InvalidParameter(format!(
                "class {p} needs at least 2 samples"
            )));
        }
    }
    let n = inputs.len();
    let depth = config.widths.len() - 1;
    for (_, x) in inputs {
        if x.len() != config.widths[0] {
            return Err(Error::DimensionMismatch { expected: config.widths[0], got: x.len() });
        }
    }
    // m2[l][a][b] accumulates sum over draws and coordinates of Z_{j;a} Z_{j;b}
    let mut m2 = vec![vec![vec![0.0f64; n]; n]; depth];
    for draw in 0..n_init {
        // one parameter realization shared by every input
        let mut per_input: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
        for (_, x) in inputs {
            let rng = stream_rng(master_seed, derive_seed(master_seed, draw as u64));
            let mut sampler = ParamSampler::new(config.init, rng)?;
            per_input.push(forward_impl(config, x, &mut sampler));
        }
        for l in 0..depth {
            for a in 0..n {
                for b in a..n {
                    let dot: f64 = per_input[a][l]
                        .iter()
                        .zip(&per_input[b][l])
                        .map(|(u, v)| u * v)
                        .sum();
                    m2[l][a][b] += dot;
                    if a != b {
                        m2[l][b][a] += dot;
                    }
                }
            }
        }
    }
    let mut matrices = Vec::with_capacity(depth);
    for m in &m2 {
        let mut mat = vec![vec![0.0f64; class_count]; class_count];
        let mut counts = vec![vec![0usize; class_count]; class_count];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let denom = (m[a][a] * m[b][b]).sqrt();
                if !(denom > 0.0) {
                    return Err(Error::Degenerate(
                        "zero second moment in correlation experiment".into(),
                    ));
                }
                let c = m[a][b] / denom;
                let (p, q) = (inputs[a].0, inputs[b].0);
                mat[p][q] += c;
                counts[p][q] += 1;
            }
        }
        for p in 0..class_count {
            for q in 0..class_count {
                if counts[p][q] > 0 {
                    mat[p][q] /= counts[p][q] as f64;
                }
            }
        }
        matrices.push(mat);
    }
    Ok(CorrelationReport {
        class_count,
        matrices,
        moment_averaging: "raw second moments averaged over draws and coordinates, then normalized",
    })
}

struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    fn next(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let (a, b) = crate::distributions::normal_pair(&mut self.rng);
        self.spare = Some(b);
        a
    }
}

/// Synthetic class data: Gaussian blobs around random unit-norm centers,
/// individually normalized.
pub fn make_class_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Vec<(usize, Vec<f64>)>> {
    if classes < 2 || per_class < 2 || dim < 2 {
        return Err(Error::InvalidParameter(
            "need >= 2 classes, >= 2 per class, dim >= 2".into(),
        ));
    }
    let rng = stream_rng(seed, 0x626c6f62);
    let mut gen = NormalStream { rng, spare: None };
    let mut out = Vec::with_capacity(classes * per_class);
    for p in 0..classes {
        let mut center: Vec<f64> = (0..dim).map(|_| gen.next()).collect();
        let norm = center.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in center.iter_mut() {
            *v /= norm;
        }
        for _ in 0..per_class {
            let sample: Vec<f64> = center.iter().map(|&c| c + spread * gen.next()).collect();
            out.push((p, normalize_individual(&sample)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IndependenceReport {
    pub ks_standardized: KsResult,
    /// Empirical P(|Z| < 1e-12).
    pub zero_fraction: f64,
}

/// Two-layer scalar experiment Z = (1/sqrt(n1)) W^2 phi((1/sqrt(n0)) W^1 X)
/// with X standard normal; measures the Gaussianity of the output despite
/// the dependence between hidden pre-activations.
pub fn independence_experiment(
    n0: usize,
    n1: usize,
    activation: &dyn Activation,
    init: Init,
    s: usize,
    master_seed: u64,
) -> Result<IndependenceReport> {
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidParameter("widths must be >= 1".into()));
    }
    if s < 10_000 {
        return Err(Error::InvalidParameter(format!("need s >= 10^4, got {s}")));
    }
    let mut samples = Vec::with_capacity(s);
    for draw in 0..s {
        let rng = stream_rng(master_seed, derive_seed(master_seed, draw as u64));
        let mut sampler = ParamSampler::new(init, rng)?;
        let x: Vec<f64> = (0..n0).map(|_| sampler.normal()).collect();
        let s0 = 1.0 / (n0 as f64).sqrt();
        let s1 = 1.0 / (n1 as f64).sqrt();
        let mut z = 0.0;
        for _ in 0..n1 {
            let mut acc = 0.0;
            for &xv in &x {
                acc += sampler.weight() * xv;
            }
            z += sampler.weight() * activation.eval(s0 * acc);
        }
        samples.push(s1 * z);
    }
    let zero_fraction =
        samples.iter().filter(|v| v.abs() < 1e-12).count() as f64 / s as f64;
    let (_, sd) = mean_std(&samples)?;
    let standardized = if sd > 0.0 { standardize(&samples)? } else { samples.clone() };
    let ks_standardized = ks_test(&standardized, crate::distributions::std_normal_cdf, 0.05)?;
    Ok(IndependenceReport { ks_standardized, zero_fraction })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProductReport {
    pub mean: f64,
    pub std: f64,
    pub ks_raw: KsResult,
    pub ks_standardized: KsResult,
}

/// One-neuron product test Z' = (1/sqrt(n)) sum_j W_j phi(X_j) with X_j
/// standard normal.
pub fn product_test(
    n: usize,
    activation: &dyn Activation,
    init: Init,
    s: usize,
    master_seed: u64,
) -> Result<ProductReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    if s < 2 {
        return Err(Error::InvalidParameter("need s >= 2".into()));
    }
    let mut samples = Vec::with_capacity(s);
    let scale = 1.0 / (n as f64).sqrt();
    for draw in 0..s {
        let rng = stream_rng(master_seed, derive_seed(master_seed, draw as u64));
        let mut sampler = ParamSampler::new(init, rng)?;
        let mut acc = 0.0;
        for _ in 0..n {
            let x = sampler.normal();
            acc += sampler.weight() * activation.eval(x);
        }
        samples.push(scale * acc);
    }
    let (mean, std) = mean_std(&samples)?;
    let ks_raw = ks_test(&samples, crate::distributions::std_normal_cdf, 0.05)?;
    let standardized = if std > 0.0 { standardize(&samples)? } else { samples.clone() };
    let ks_standardized = ks_test(&standardized, crate::distributions::std_normal_cdf, 0.05)?;
    Ok(ProductReport { mean, std, ks_raw, ks_standardized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eoc::{Identity, Relu, Tanh};

    #[test]
    fn fixed_weight_scaling() {
        let cfg = NetworkConfig {
            widths: vec![9, 3],
            activation: &Identity,
            init: Init::Rademacher,
        };
        let x = vec![1.0; 9];
        let layers = forward_fixed_params(&cfg, &x, 1.0, 0.0).unwrap();
        // Z^1 = (1/sqrt(9)) * 9 = 3 in every coordinate
        for &v in &layers[0] {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_input_odd_activation_stays_zero() {
        let cfg = NetworkConfig {
            widths: vec![4, 4, 4],
            activation: &Tanh,
            init: Init::Weibull { theta: 3.0 },
        };
        let layers = forward(&cfg, &[0.0; 4], 7).unwrap();
        for layer in layers {
            for v in layer {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let cfg = NetworkConfig {
            widths: vec![5, 8, 3],
            activation: &Relu,
            init: Init::Gaussian { sigma_w: 2f64.sqrt(), sigma_b: 0.1 },
        };
        let x = vec![0.3, -1.2, 0.8, 0.0, 2.0];
        let a = forward(&cfg, &x, 42).unwrap();
        let b = forward(&cfg, &x, 42).unwrap();
        assert_eq!(a, b);
        let c = forward(&cfg, &x, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forward_rejects_width_mismatch() {
        let cfg = NetworkConfig {
            widths: vec![5, 3],
            activation: &Identity,
            init: Init::Rademacher,
        };
        assert!(forward(&cfg, &[1.0; 4], 0).is_err());
    }

    #[test]
    fn normalize_individual_matches_hand_case() {
        let out = normalize_individual(&[1.0, 2.0, 3.0]).unwrap();
        assert!((out[0] + 1.0).abs() < 1e-12);
        assert!(out[1].abs() < 1e-12);
        assert!((out[2] - 1.0).abs() < 1e-12);
        let again = normalize_individual(&out).unwrap();
        for (a, b) in out.iter().zip(&again) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(normalize_individual(&[2.0, 2.0]).is_err());
    }

    #[test]
    fn whole_dataset_normalization() {
        // single channel, {0-vector, 2-vector} -> {-1, +1}
        let data = vec![vec![0.0; 3], vec![2.0; 3]];
        let out = normalize_whole_dataset(&data, &[3]).unwrap();
        for v in &out[0] {
            assert!((v + 1.0).abs() < 1e-12);
        }
        for v in &out[1] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // idempotence
        let again = normalize_whole_dataset(&out, &[3]).unwrap();
        for (a, b) in out.iter().flatten().zip(again.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
        // constant channel errors
        assert!(normalize_whole_dataset(&[vec![1.0], vec![1.0]], &[1]).is_err());
    }

    #[test]
    fn mean_near_zero_for_odd_activation() {
        let cfg = NetworkConfig {
            widths: vec![20, 20, 20, 20],
            activation: &Tanh,
            init: Init::Weibull { theta: 3.0 },
        };
        let input = normalize_individual(
            &(0..20).map(|i| (i as f64 * 0.7).sin()).collect::<Vec<_>>(),
        )
        .unwrap();
        let report = layer_distribution_experiment(&cfg, &input, 2000, 5).unwrap();
        for layer in &report.layers {
            let se = layer.std / (report.sample_count as f64).sqrt();
            assert!(
                layer.mean.abs() < 3.0 * se + 1e-9,
                "layer {} mean {} std-err {}",
                layer.layer,
                layer.mean,
                se
            );
        }
    }

    #[test]
    fn variance_bookkeeping_is_width_free_for_identity() {
        let input_small = vec![1.0; 25];
        let input_large = vec![1.0; 100];
        let mk = |widths: Vec<usize>| NetworkConfig {
            widths,
            activation: &Identity,
            init: Init::Gaussian { sigma_w: 1.0, sigma_b: 0.0 },
        };
        let a = layer_distribution_experiment(&mk(vec![25, 25]), &input_small, 4000, 9).unwrap();
        let b = layer_distribution_experiment(&mk(vec![100, 100]), &input_large, 4000, 9).unwrap();
        // per-coordinate variance sigma_w^2 * |x|^2 / n = 1 in both cases
        assert!((a.layers[0].std - 1.0).abs() < 0.05, "{}", a.layers[0].std);
        assert!((b.layers[0].std - 1.0).abs() < 0.05, "{}", b.layers[0].std);
    }

    #[test]
    fn correlation_identical_inputs_is_one() {
        let x = normalize_individual(&[0.4, -1.0, 2.0, 0.1, -0.6, 1.3]).unwrap();
        let inputs = vec![(0, x.clone()), (0, x.clone()), (1, x.clone()), (1, x)];
        let cfg = NetworkConfig {
            widths: vec![6, 30],
            activation: &Tanh,
            init: Init::Gaussian { sigma_w: 1.2, sigma_b: 0.0 },
        };
        let report = correlation_experiment(&inputs, &cfg, 50, 3).unwrap();
        let m = &report.matrices[0];
        for p in 0..2 {
            for q in 0..2 {
                assert!((m[p][q] - 1.0).abs() < 1e-9, "C[{p}][{q}] = {}", m[p][q]);
            }
        }
    }

    #[test]
    fn correlation_orthogonal_inputs_near_zero() {
        let dim = 8;
        let e = |i: usize| {
            let mut v = vec![0.0; dim];
            v[2 * i] = 1.0;
            v[2 * i + 1] = -1.0;
            // unit-ish, mean zero, mutually orthogonal
            v
        };
        let inputs = vec![(0, e(0)), (0, e(1)), (1, e(2)), (1, e(3))];
        let cfg = NetworkConfig {
            widths: vec![dim, 200],
            activation: &Identity,
            init: Init::Gaussian { sigma_w: 1.0, sigma_b: 0.0 },
        };
        let report = correlation_experiment(&inputs, &cfg, 300, 11).unwrap();
        let m = &report.matrices[0];
        assert!(m[0][1].abs() < 0.05, "C01 = {}", m[0][1]);
        assert!(m[1][0].abs() < 0.05);
    }

    #[test]
    fn correlation_matrices_are_symmetric_and_bounded() {
        let inputs = make_class_blobs(3, 3, 10, 0.3, 17).unwrap();
        let cfg = NetworkConfig {
            widths: vec![10, 20, 20],
            activation: &Tanh,
            init: Init::Gaussian { sigma_w: 1.2083, sigma_b: 0.0114f64.sqrt() },
        };
        let report = correlation_experiment(&inputs, &cfg, 40, 23).unwrap();
        for m in &report.matrices {
            for p in 0..3 {
                for q in 0..3 {
                    assert!((m[p][q] - m[q][p]).abs() < 1e-12);
                    assert!(m[p][q] >= -1.0 - 1e-9 && m[p][q] <= 1.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn rademacher_identity_two_layer_halves_at_zero() {
        let report = independence_experiment(
            1,
            2,
            &Identity,
            Init::Rademacher,
            100_000,
            31,
        )
        .unwrap();
        assert!(
            (report.zero_fraction - 0.5).abs() <= 0.01,
            "zero fraction {}",
            report.zero_fraction
        );
        // and the distribution is very far from Gaussian
        assert!(report.ks_standardized.reject);
    }

    #[test]
    fn product_std_matches_tanh_relu_references() {
        let init = Init::Gaussian { sigma_w: 1.0, sigma_b: 0.0 };
        let tanh = product_test(1, &Tanh, init, 200_000, 1).unwrap();
        assert!((tanh.std - 0.628).abs() < 0.005, "tanh std {}", tanh.std);
        let relu = product_test(1, &Relu, init, 200_000, 1).unwrap();
        assert!((relu.std - 0.707).abs() < 0.005, "relu std {}", relu.std);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = NetworkConfig {
            widths: vec![10, 10, 10],
            activation: &Relu,
            init: Init::Gaussian { sigma_w: 2f64.sqrt(), sigma_b: 0.0 },
        };
        let input = vec![0.5; 10];
        let a = layer_distribution_experiment(&cfg, &input, 500, 77).unwrap();
        let b = layer_distribution_experiment(&cfg, &input, 500, 77).unwrap();
        for (u, v) in a.layers.iter().zip(&b.layers) {
            assert_eq!(u.ks_raw.to_bits(), v.ks_raw.to_bits());
            assert_eq!(u.mean.to_bits(), v.mean.to_bits());
        }
    }
}
