//! Small-MLP training for building model populations.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use super::{Activation, Layer, NetworkSpec, OutputRule, Sample};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Widths of the ReLU hidden layers.
    pub hidden: Vec<usize>,
    pub classes: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![8, 8],
            classes: 2,
            epochs: 60,
            batch_size: 32,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 0,
        }
    }
}

struct DenseParams {
    rows: usize,
    cols: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

/// Trains a ReLU MLP with an argmax readout by minibatch SGD with momentum on
/// softmax cross-entropy. He-normal initialization; fully determined by
/// `cfg.seed`.
pub fn train_classifier(data: &[Sample], cfg: &TrainConfig) -> Result<NetworkSpec> {
    let Some((first, _)) = data.first() else {
        return Err(Error::TooSmall {
            what: "training samples",
            needed: 1,
            got: 0,
        });
    };
    if cfg.classes < 2 || cfg.batch_size == 0 || cfg.hidden.contains(&0) {
        return Err(Error::InvalidConfig("degenerate training configuration".into()));
    }
    if let Some((_, y)) = data.iter().find(|(_, y)| *y >= cfg.classes) {
        return Err(Error::InvalidData(format!("label {y} out of range")));
    }
    let dim = first.len();
    let mut rng = rng::seeded(cfg.seed);

    let mut widths = vec![dim];
    widths.extend(&cfg.hidden);
    widths.push(cfg.classes);
    let mut params: Vec<DenseParams> = widths
        .windows(2)
        .map(|w| {
            let (cols, rows) = (w[0], w[1]);
            let std = (2.0 / cols as f64).sqrt();
            let w = (0..rows * cols)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    std * z
                })
                .collect();
            DenseParams {
                rows,
                cols,
                w,
                b: vec![0.0; rows],
            }
        })
        .collect();
    let mut vel: Vec<(Vec<f64>, Vec<f64>)> = params
        .iter()
        .map(|p| (vec![0.0; p.w.len()], vec![0.0; p.b.len()]))
        .collect();

    let n_layers = params.len();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut acts: Vec<Vec<f64>> = vec![Vec::new(); n_layers + 1];
    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = params
        .iter()
        .map(|p| (vec![0.0; p.w.len()], vec![0.0; p.b.len()]))
        .collect();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            for (gw, gb) in grads.iter_mut() {
                gw.fill(0.0);
                gb.fill(0.0);
            }
            for &idx in batch {
                let (x, y) = &data[idx];
                if x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        layer: 0,
                        expected: dim,
                        found: x.len(),
                    });
                }
                acts[0].clone_from(x);
                for (k, p) in params.iter().enumerate() {
                    let (head, tail) = acts.split_at_mut(k + 1);
                    let input = &head[k];
                    let out = &mut tail[0];
                    out.clear();
                    for r in 0..p.rows {
                        let row = &p.w[r * p.cols..(r + 1) * p.cols];
                        let z = row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + p.b[r];
                        out.push(if k + 1 < n_layers { z.max(0.0) } else { z });
                    }
                }
                // softmax cross-entropy gradient at the logits
                let logits = &acts[n_layers];
                let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
                let total: f64 = exps.iter().sum();
                let mut delta: Vec<f64> = exps.iter().map(|e| e / total).collect();
                delta[*y] -= 1.0;

                for k in (0..n_layers).rev() {
                    let p = &params[k];
                    let input = &acts[k];
                    let (gw, gb) = &mut grads[k];
                    for r in 0..p.rows {
                        gb[r] += delta[r];
                        let grow = &mut gw[r * p.cols..(r + 1) * p.cols];
                        for (g, a) in grow.iter_mut().zip(input) {
                            *g += delta[r] * a;
                        }
                    }
                    if k > 0 {
                        let mut prev = vec![0.0; p.cols];
                        for r in 0..p.rows {
                            let row = &p.w[r * p.cols..(r + 1) * p.cols];
                            for (pv, w) in prev.iter_mut().zip(row) {
                                *pv += delta[r] * w;
                            }
                        }
                        for (pv, a) in prev.iter_mut().zip(input) {
                            if *a <= 0.0 {
                                *pv = 0.0;
                            }
                        }
                        delta = prev;
                    }
                }
            }
            let scale = cfg.learning_rate / batch.len() as f64;
            for ((p, (vw, vb)), (gw, gb)) in params.iter_mut().zip(&mut vel).zip(&grads) {
                for ((w, v), g) in p.w.iter_mut().zip(vw.iter_mut()).zip(gw) {
                    *v = cfg.momentum * *v - scale * g;
                    *w += *v;
                }
                for ((b, v), g) in p.b.iter_mut().zip(vb.iter_mut()).zip(gb) {
                    *v = cfg.momentum * *v - scale * g;
                    *b += *v;
                }
            }
        }
    }

    if params.iter().any(|p| p.w.iter().chain(&p.b).any(|v| !v.is_finite())) {
        return Err(Error::Numeric("training diverged".into()));
    }
    let layers = params
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let act = if k + 1 < n_layers {
                Activation::Relu
            } else {
                Activation::Identity
            };
            Layer::new(p.rows, p.cols, p.w, p.b, act)
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkSpec::new(layers, OutputRule::Argmax)
}
