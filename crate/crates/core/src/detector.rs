//! A small MLP that separates clean from Trojaned models by their feature
//! vectors, plus the end-to-end pipeline around it.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::complex::build_filtration;
use crate::error::{Error, Result};
use crate::features::{corr_baseline_features, topo_features, CorrBaselineVector, FeatureVector};
use crate::netlab::{perturb_pixelwise, NetworkSpec, PerturbConfig};
use crate::persistence::{one_dim_diagram, zero_dim_diagram};
use crate::rng::{seeded, task_seed};
use crate::trace::{correlation_matrix, dissimilarity, record_activations, Kernel};

pub const DETECTOR_MAGIC: &[u8; 4] = b"TDET";
pub const DETECTOR_FORMAT_VERSION: u32 = 1;

/// Filtration cutoff used by the pipeline; 2 admits every edge.
pub const PIPELINE_CUTOFF: f64 = 2.0;

/// Width of the window over which the loss must not increase.
pub const LOSS_WINDOW: usize = 50;

const MIN_STD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    pub hidden_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            hidden_size: 32,
            epochs: 500,
            learning_rate: 0.01,
            l2: 1e-4,
            seed: 0,
            train_fraction: 0.8,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig("hidden size and epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.l2 > 0.0) {
            return Err(Error::InvalidConfig("learning rate and l2 must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorModel {
    input_dim: usize,
    /// Input features that survived standardization.
    kept: Vec<usize>,
    mean: Vec<f64>,
    std: Vec<f64>,
    hidden: usize,
    /// Row-major `hidden × kept.len()`.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    loss_log: Vec<f64>,
}

impl DetectorModel {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn kept_features(&self) -> &[usize] {
        &self.kept
    }

    /// Features with zero training variance, removed before training.
    pub fn dropped_features(&self) -> Vec<usize> {
        (0..self.input_dim).filter(|i| !self.kept.contains(i)).collect()
    }

    pub fn loss_log(&self) -> &[f64] {
        &self.loss_log
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&k, (m, s))| (x[k] - m) / s)
            .collect()
    }

    /// Inverse of [`standardize`](Self::standardize) on the kept features.
    pub fn destandardize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    fn forward(&self, z: &[f64], h: &mut [f64]) -> f64 {
        let k = self.kept.len();
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * k..(j + 1) * k];
            *hj = (row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + self.b1[j]).tanh();
        }
        let logit = h.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2;
        sigmoid(logit)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_labels(labels: &[u8]) -> Result<(usize, usize)> {
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidData("labels must be 0 or 1".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    Ok((labels.len() - pos, pos))
}

/// Trains on rows of `x` with binary `labels` by full-batch gradient descent
/// on L2-regularized cross-entropy. Whenever the loss at the end of a
/// [`LOSS_WINDOW`]-epoch window exceeds the loss at its start, the learning
/// rate is halved.
pub fn train_on_matrix(x: &[Vec<f64>], labels: &[u8], cfg: &DetectorConfig) -> Result<DetectorModel> {
    cfg.validate()?;
    if x.len() != labels.len() {
        return Err(Error::InvalidData(format!("{} rows but {} labels", x.len(), labels.len())));
    }
    let (neg, pos) = check_labels(labels)?;
    if neg < 2 || pos < 2 {
        return Err(Error::SingleClass(format!(
            "need at least 2 examples per class, got {neg} negative and {pos} positive"
        )));
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().position(|r| r.len() != d) {
        return Err(Error::InvalidData(format!("row {bad} has {} features, expected {d}", x[bad].len())));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("features must be finite".into()));
    }

    let n = x.len() as f64;
    let mut kept = Vec::new();
    let mut mean = Vec::new();
    let mut std = Vec::new();
    for k in 0..d {
        let mu = x.iter().map(|r| r[k]).sum::<f64>() / n;
        let sd = (x.iter().map(|r| (r[k] - mu).powi(2)).sum::<f64>() / n).sqrt();
        if sd > MIN_STD {
            kept.push(k);
            mean.push(mu);
            std.push(sd);
        }
    }
    let k = kept.len();
    let h = cfg.hidden_size;
    let mut rng = seeded(cfg.seed);
    let a1 = (6.0 / (k + h) as f64).sqrt();
    let a2 = (6.0 / (h + 1) as f64).sqrt();
    let mut model = DetectorModel {
        input_dim: d,
        kept,
        mean,
        std,
        hidden: h,
        w1: (0..h * k).map(|_| rng.random_range(-a1..=a1)).collect(),
        b1: vec![0.0; h],
        w2: (0..h).map(|_| rng.random_range(-a2..=a2)).collect(),
        b2: 0.0,
        loss_log: Vec::with_capacity(cfg.epochs),
    };
    let z: Vec<Vec<f64>> = x.iter().map(|r| model.standardize(r)).collect();

    let mut lr = cfg.learning_rate;
    let mut act = vec![0.0; h];
    let mut window_start = f64::INFINITY;
    for epoch in 0..cfg.epochs {
        let mut g1 = vec![0.0; h * k];
        let mut gb1 = vec![0.0; h];
        let mut g2 = vec![0.0; h];
        let mut gb2 = 0.0;
        let mut loss = 0.0;
        for (zi, &yi) in z.iter().zip(labels) {
            let p = model.forward(zi, &mut act);
            let y = yi as f64;
            loss -= y * p.max(1e-300).ln() + (1.0 - y) * (1.0 - p).max(1e-300).ln();
            let dlogit = p - y;
            gb2 += dlogit;
            for j in 0..h {
                g2[j] += dlogit * act[j];
                let dpre = dlogit * model.w2[j] * (1.0 - act[j] * act[j]);
                gb1[j] += dpre;
                for (g, v) in g1[j * k..(j + 1) * k].iter_mut().zip(zi) {
                    *g += dpre * v;
                }
            }
        }
        let reg: f64 = model.w1.iter().chain(&model.w2).map(|w| w * w).sum();
        loss = loss / n + 0.5 * cfg.l2 * reg;
        model.loss_log.push(loss);
        if epoch % LOSS_WINDOW == 0 {
            if loss > window_start {
                lr /= 2.0;
            }
            window_start = loss;
        }
        for (w, g) in model.w1.iter_mut().zip(&g1) {
            *w -= lr * (g / n + cfg.l2 * *w);
        }
        for (w, g) in model.w2.iter_mut().zip(&g2) {
            *w -= lr * (g / n + cfg.l2 * *w);
        }
        for (b, g) in model.b1.iter_mut().zip(&gb1) {
            *b -= lr * g / n;
        }
        model.b2 -= lr * gb2 / n;
    }
    Ok(model)
}

/// Trains on labeled topological feature vectors.
pub fn train_detector(feats: &[FeatureVector], cfg: &DetectorConfig) -> Result<DetectorModel> {
    let labels = feats
        .iter()
        .map(|f| f.label.ok_or_else(|| Error::InvalidData("unlabeled feature vector".into())))
        .collect::<Result<Vec<u8>>>()?;
    let x: Vec<Vec<f64>> = feats.iter().map(|f| f.values.to_vec()).collect();
    train_on_matrix(&x, &labels, cfg)
}

/// Probability that `x` comes from a Trojaned model.
pub fn predict(model: &DetectorModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.input_dim {
        return Err(Error::DimensionMismatch {
            layer: 0,
            expected: model.input_dim,
            found: x.len(),
        });
    }
    let mut act = vec![0.0; model.hidden];
    Ok(model.forward(&model.standardize(x), &mut act))
}

/// Area under the ROC curve: the fraction of positive/negative pairs ranked
/// correctly, ties counting one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidData(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    let (neg, pos) = check_labels(labels)?;
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += mid * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub acc: f64,
    pub auc: f64,
    pub n_test: usize,
    pub threshold: f64,
}

pub fn evaluate(model: &DetectorModel, x: &[Vec<f64>], labels: &[u8]) -> Result<EvalReport> {
    let scores = x.iter().map(|r| predict(model, r)).collect::<Result<Vec<f64>>>()?;
    let threshold = 0.5;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, &l)| (**s >= threshold) == (l == 1))
        .count();
    Ok(EvalReport {
        acc: correct as f64 / labels.len().max(1) as f64,
        auc: auc(&scores, labels)?,
        n_test: labels.len(),
        threshold,
    })
}

/// Per-class shuffled split keeping between 1 and `n_c − 1` examples of each
/// class in training. Returns `(train, test)` indices, each ascending.
pub fn stratified_split(labels: &[u8], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seeded(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        idx.shuffle(&mut rng);
        let take = ((idx.len() as f64 * train_fraction).round() as usize).clamp(1, idx.len().max(2) - 1);
        train.extend_from_slice(&idx[..take.min(idx.len())]);
        test.extend_from_slice(&idx[take.min(idx.len())..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Features of one model: both feature sets from the same correlation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelFeatures {
    pub topo: FeatureVector,
    pub baseline: CorrBaselineVector,
}

/// Runs perturbed inputs through `net` and summarizes its correlation
/// structure.
pub fn model_features(net: &NetworkSpec, perturbed: &[Vec<f64>]) -> Result<ModelFeatures> {
    let trace = record_activations(net, perturbed)?;
    let corr = correlation_matrix(&trace, Kernel::Pearson)?;
    let f = build_filtration(&dissimilarity(&corr), PIPELINE_CUTOFF)?;
    Ok(ModelFeatures {
        topo: topo_features(&zero_dim_diagram(&f), &one_dim_diagram(&f)),
        baseline: corr_baseline_features(&corr)?,
    })
}

/// Features for every model, computed on `jobs` threads. Every model sees the
/// same perturbed inputs, so results do not depend on `jobs`.
pub fn population_features(
    models: &[(NetworkSpec, u8)],
    clean_samples: &[Vec<f64>],
    pcfg: &PerturbConfig,
    jobs: usize,
) -> Result<Vec<ModelFeatures>> {
    let perturbed = perturb_pixelwise(clean_samples, pcfg)?;
    let work = |i: usize| -> Result<ModelFeatures> {
        let (net, label) = &models[i];
        let mut mf = model_features(net, &perturbed).map_err(|e| Error::Model {
            index: i,
            source: Box::new(e),
        })?;
        mf.topo.label = Some(*label);
        Ok(mf)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| (0..models.len()).into_par_iter().map(work).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub topo: EvalReport,
    pub baseline: EvalReport,
    pub features: Vec<ModelFeatures>,
}

/// Splits, trains and evaluates one detector per feature set.
pub fn evaluate_population(features: &[ModelFeatures], dcfg: &DetectorConfig) -> Result<(EvalReport, EvalReport)> {
    dcfg.validate()?;
    let labels: Vec<u8> = features
        .iter()
        .map(|f| f.topo.label.ok_or_else(|| Error::InvalidData("unlabeled model".into())))
        .collect::<Result<_>>()?;
    let (train, test) = stratified_split(&labels, dcfg.train_fraction, task_seed(dcfg.seed, 0));
    let run = |rows: Vec<Vec<f64>>| -> Result<EvalReport> {
        let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
            (idx.iter().map(|&i| rows[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
        };
        let (xtr, ytr) = pick(&train);
        let (xte, yte) = pick(&test);
        let model = train_on_matrix(&xtr, &ytr, dcfg)?;
        evaluate(&model, &xte, &yte)
    };
    let topo = run(features.iter().map(|f| f.topo.values.to_vec()).collect())?;
    let baseline = run(features.iter().map(|f| f.baseline.values().to_vec()).collect())?;
    Ok((topo, baseline))
}

/// The whole detection pipeline on a labeled model population.
pub fn run_pipeline(
    models: &[(NetworkSpec, u8)],
    clean_samples: &[Vec<f64>],
    pcfg: &PerturbConfig,
    dcfg: &DetectorConfig,
    jobs: usize,
) -> Result<PipelineReport> {
    for class in [0u8, 1] {
        let n = models.iter().filter(|(_, l)| *l == class).count();
        if n < 4 {
            return Err(Error::TooSmall {
                what: "models per class",
                needed: 4,
                got: n,
            });
        }
    }
    let features = population_features(models, clean_samples, pcfg, jobs)?;
    let (topo, baseline) = evaluate_population(&features, dcfg)?;
    Ok(PipelineReport {
        topo,
        baseline,
        features,
    })
}

fn write_f64s<W: Write>(out: &mut W, v: &[f64]) -> Result<()> {
    for x in v {
        out.write_f64::<LittleEndian>(*x)?;
    }
    Ok(())
}

fn read_f64s<R: Read>(input: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut v = vec![0.0; n];
    input.read_f64_into::<LittleEndian>(&mut v)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Format("non-finite value in detector file".into()));
    }
    Ok(v)
}

/// Layout: magic, version, input dim, kept count, kept indices (u32),
/// means, stds, hidden size, w1, b1, w2, b2 (f64), all little-endian.
pub fn write_detector<W: Write>(model: &DetectorModel, mut out: W) -> Result<()> {
    out.write_all(DETECTOR_MAGIC)?;
    out.write_u32::<LittleEndian>(DETECTOR_FORMAT_VERSION)?;
    out.write_u32::<LittleEndian>(model.input_dim as u32)?;
    out.write_u32::<LittleEndian>(model.kept.len() as u32)?;
    for &k in &model.kept {
        out.write_u32::<LittleEndian>(k as u32)?;
    }
    write_f64s(&mut out, &model.mean)?;
    write_f64s(&mut out, &model.std)?;
    out.write_u32::<LittleEndian>(model.hidden as u32)?;
    write_f64s(&mut out, &model.w1)?;
    write_f64s(&mut out, &model.b1)?;
    write_f64s(&mut out, &model.w2)?;
    out.write_f64::<LittleEndian>(model.b2)?;
    out.flush()?;
    Ok(())
}

pub fn read_detector<R: Read>(mut input: R) -> Result<DetectorModel> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != DETECTOR_MAGIC {
        return Err(Error::Format("not a detector file".into()));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != DETECTOR_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported detector version {version}")));
    }
    let input_dim = input.read_u32::<LittleEndian>()? as usize;
    let k = input.read_u32::<LittleEndian>()? as usize;
    let mut kept = Vec::with_capacity(k);
    for _ in 0..k {
        let idx = input.read_u32::<LittleEndian>()? as usize;
        if idx >= input_dim || kept.last().is_some_and(|&p| p >= idx) {
            return Err(Error::Format("kept feature indices must be increasing and in range".into()));
        }
        kept.push(idx);
    }
    let mean = read_f64s(&mut input, k)?;
    let std = read_f64s(&mut input, k)?;
    if std.iter().any(|s| *s <= 0.0) {
        return Err(Error::Format("standard deviations must be positive".into()));
    }
    let hidden = input.read_u32::<LittleEndian>()? as usize;
    let w1 = read_f64s(&mut input, hidden * k)?;
    let b1 = read_f64s(&mut input, hidden)?;
    let w2 = read_f64s(&mut input, hidden)?;
    let b2 = read_f64s(&mut input, 1)?[0];
    Ok(DetectorModel {
        input_dim,
        kept,
        mean,
        std,
        hidden,
        w1,
        b1,
        w2,
        b2,
        loss_log: Vec::new(),
    })
}
