//! Reproduction runs: the theorem networks, sample-size convergence, the
//! two-phase benchmark and the synthetic model population.

use std::time::Duration;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::complex::build_filtration;
use crate::error::{Error, Result};
use crate::netlab::{
    build_theorem_networks, empirical_risk, sample_gaussian_pair, train_classifier, GaussianPairConfig,
    MixtureKind, NetworkSpec, PerturbConfig, TrainConfig,
};
use crate::persistence::{bottleneck_distance, one_dim_diagram, two_phase_stats, PersistenceDiagram};
use crate::rng::{seeded, task_seed};
use crate::trace::{
    analytic_theorem_matrices, correlation_matrix, dissimilarity, record_activations, ActivationTrace,
    CorrelationMatrix, DissimilarityMatrix, Kernel,
};

/// Full-complex cutoff for dissimilarities in `[0, 2]`.
pub const FULL_CUTOFF: f64 = 2.0;

/// Bound claimed for the analytic bottleneck distance.
pub const CLAIMED_THEOREM_BOUND: f64 = 0.9;

/// Allowed range of the log-log slope of bottleneck error against sample size.
pub const SLOPE_RANGE: (f64, f64) = (-0.75, -0.25);

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremConfig {
    pub sigma: f64,
    pub eta: f64,
    pub input_dim: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            eta: 0.05,
            input_dim: 2,
            samples: 50_000,
            seed: 0,
        }
    }
}

impl TheoremConfig {
    fn mixture(&self, which: MixtureKind, samples: usize, seed: u64) -> GaussianPairConfig {
        GaussianPairConfig {
            sigma: self.sigma,
            eta: self.eta,
            input_dim: self.input_dim,
            which,
            sample_count: samples,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelDistances {
    pub kernel: Kernel,
    pub analytic: f64,
    pub sampled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub distances: Vec<KernelDistances>,
    pub risk_f1_d1: f64,
    pub risk_f2_d3: f64,
    pub risk_f2_d2: f64,
    pub samples: usize,
    pub eta: f64,
}

impl TheoremReport {
    /// Whether any kernel reaches the claimed analytic bound.
    pub fn meets_claimed_bound(&self) -> bool {
        self.distances.iter().any(|d| d.analytic >= CLAIMED_THEOREM_BOUND)
    }
}

fn diagram_of_corr(corr: &CorrelationMatrix) -> Result<PersistenceDiagram> {
    Ok(one_dim_diagram(&build_filtration(&dissimilarity(corr), FULL_CUTOFF)?))
}

/// Bottleneck distance between the 1-dimensional diagrams of two correlation
/// matrices.
pub fn corr_bottleneck(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<f64> {
    Ok(bottleneck_distance(&diagram_of_corr(a)?, &diagram_of_corr(b)?, 1))
}

/// Analytic 1-dimensional bottleneck distance between `f1` and `f2`.
pub fn analytic_theorem_distance(kernel: Kernel) -> Result<f64> {
    let (m1, m2) = analytic_theorem_matrices(kernel);
    corr_bottleneck(&m1, &m2)
}

fn inputs(samples: &[(Vec<f64>, usize)]) -> Vec<Vec<f64>> {
    samples.iter().map(|(x, _)| x.clone()).collect()
}

/// Traces both theorem networks on mixture `D2` and compares their diagrams
/// under each kernel; also reports the three empirical risks.
pub fn theorem1(cfg: &TheoremConfig) -> Result<TheoremReport> {
    let (f1, f2) = build_theorem_networks(cfg.input_dim);
    let d1 = sample_gaussian_pair(&cfg.mixture(MixtureKind::D1, cfg.samples, task_seed(cfg.seed, 1)))?;
    let d2 = sample_gaussian_pair(&cfg.mixture(MixtureKind::D2, cfg.samples, task_seed(cfg.seed, 2)))?;
    let d3 = sample_gaussian_pair(&cfg.mixture(MixtureKind::D3, cfg.samples, task_seed(cfg.seed, 3)))?;

    let x2 = inputs(&d2);
    let t1 = record_activations(&f1, &x2)?;
    let t2 = record_activations(&f2, &x2)?;
    let mut distances = Vec::new();
    for kernel in [Kernel::Cosine, Kernel::Pearson] {
        let sampled = corr_bottleneck(&correlation_matrix(&t1, kernel)?, &correlation_matrix(&t2, kernel)?)?;
        distances.push(KernelDistances {
            kernel,
            analytic: analytic_theorem_distance(kernel)?,
            sampled,
        });
    }
    Ok(TheoremReport {
        distances,
        risk_f1_d1: empirical_risk(&f1, &d1)?,
        risk_f2_d3: empirical_risk(&f2, &d3)?,
        risk_f2_d2: empirical_risk(&f2, &d2)?,
        samples: cfg.samples,
        eta: cfg.eta,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// One distance per seed.
    pub distances: Vec<f64>,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub kernel: Kernel,
    pub rows: Vec<ConvergenceRow>,
    pub slope: f64,
}

impl ConvergenceReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].median < w[0].median)
    }

    pub fn slope_in_range(&self) -> bool {
        self.slope >= SLOPE_RANGE.0 && self.slope <= SLOPE_RANGE.1
    }

    pub fn last_not_above_first(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.median <= a.median,
            _ => true,
        }
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        (s[k / 2 - 1] + s[k / 2]) / 2.0
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Bottleneck distance between the diagram of `f2` traced on `n` sampled
/// points of `D2` and the analytic diagram, for each `n` and seed.
pub fn convergence(
    cfg: &TheoremConfig,
    n_grid: &[usize],
    seeds: usize,
    kernel: Kernel,
) -> Result<ConvergenceReport> {
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("sample-size grid must be strictly increasing with at least two entries".into()));
    }
    if seeds == 0 {
        return Err(Error::InvalidConfig("need at least one seed".into()));
    }
    let (_, f2) = build_theorem_networks(cfg.input_dim);
    let (_, exact) = analytic_theorem_matrices(kernel);
    let reference = diagram_of_corr(&exact)?;
    let tasks: Vec<(usize, usize)> = (0..n_grid.len())
        .flat_map(|g| (0..seeds).map(move |s| (g, s)))
        .collect();
    let values = tasks
        .par_iter()
        .map(|&(g, s)| -> Result<f64> {
            let seed = task_seed(cfg.seed, g * seeds + s);
            let data = sample_gaussian_pair(&cfg.mixture(MixtureKind::D2, n_grid[g], seed))?;
            let trace = record_activations(&f2, &inputs(&data))?;
            let dg = diagram_of_corr(&correlation_matrix(&trace, kernel)?)?;
            Ok(bottleneck_distance(&dg, &reference, 1))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows: Vec<ConvergenceRow> = n_grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let distances = values[g * seeds..(g + 1) * seeds].to_vec();
            ConvergenceRow {
                n,
                median: median(&distances),
                distances,
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median.max(f64::MIN_POSITIVE)).collect();
    Ok(ConvergenceReport {
        kernel,
        slope: log_log_slope(&xs, &ys),
        rows,
    })
}

/// Samples needed for the diagram of every one of `networks` models to be
/// within `eps` of its limit with probability `1 − delta`, given activation
/// bound `r_max`, smallest second moment `r_min` and at most `m_star`
/// neurons per model.
pub fn required_samples(r_max: f64, r_min: f64, eps: f64, delta: f64, networks: usize, m_star: usize) -> f64 {
    let logs = (networks as f64).ln() + 2.0 * (m_star as f64).ln() + (1.0 / delta).ln();
    16.0 * r_max.powi(6) * logs / (r_min.powi(4) * eps * eps)
}

/// A random correlation matrix from a `factors`-factor linear model observed
/// `samples` times.
pub fn random_factor_correlation(m: usize, factors: usize, samples: usize, seed: u64) -> Result<CorrelationMatrix> {
    let mut rng = seeded(seed);
    let loadings: Vec<f64> = (0..m * factors).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut values = Vec::with_capacity(samples * m);
    let mut z = vec![0.0; factors];
    for _ in 0..samples {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for i in 0..m {
            let signal: f64 = loadings[i * factors..(i + 1) * factors].iter().zip(&z).map(|(a, b)| a * b).sum();
            let noise: f64 = StandardNormal.sample(&mut rng);
            values.push(signal + 0.5 * noise);
        }
    }
    let trace = ActivationTrace::new(samples, m, values, vec![0; m], (0..m).collect())?;
    correlation_matrix(&trace, Kernel::Pearson)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub cutoff: f64,
    pub num_simplices: usize,
    pub coboundary_time: Duration,
    pub boundary_time: Duration,
    pub pruned_nonzeros: usize,
    pub full_nonzeros: usize,
}

impl BenchRow {
    /// Whether the pruned boundary reduction took at most twice as long as
    /// the coboundary reduction.
    pub fn within_factor_two(&self) -> bool {
        self.boundary_time <= 2 * self.coboundary_time
    }
}

/// Finds `ε*` on the full complex, rebuilds the filtration at that cutoff and
/// times both phases there.
pub fn bench_matrix(w: &DissimilarityMatrix) -> Result<BenchRow> {
    let full = build_filtration(w, FULL_CUTOFF)?;
    let cutoff = match two_phase_stats(&full)?.max_death {
        Some(d) => d + crate::persistence::PRUNE_SLACK,
        None => FULL_CUTOFF,
    };
    let f = build_filtration(w, cutoff)?;
    let stats = two_phase_stats(&f)?;
    Ok(BenchRow {
        cutoff,
        num_simplices: stats.num_simplices,
        coboundary_time: stats.coboundary_time,
        boundary_time: stats.boundary_time,
        pruned_nonzeros: stats.pruned_nonzeros,
        full_nonzeros: stats.full_nonzeros,
    })
}

/// Settings of the synthetic clean/Trojaned model population.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationConfig {
    pub models_per_class: usize,
    pub train_samples: usize,
    pub sigma: f64,
    pub eta: f64,
    pub input_dim: usize,
    pub clean_samples: usize,
    pub trials_per_sample: usize,
    pub perturb_range: (f64, f64),
    pub patch_size: usize,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            models_per_class: 40,
            train_samples: 400,
            sigma: 1.0,
            eta: 0.05,
            input_dim: 2,
            clean_samples: 4,
            trials_per_sample: 200,
            perturb_range: (-6.0, 6.0),
            patch_size: 1,
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

/// A labeled model population with the clean inputs and perturbation
/// settings used to probe it.
pub struct Population {
    pub models: Vec<(NetworkSpec, u8)>,
    pub clean_samples: Vec<Vec<f64>>,
    pub perturb: PerturbConfig,
}

/// Trains clean models on `D1` (label 0) and Trojaned models on `D3`
/// (label 1), each with its own data and initialization seed.
pub fn build_population(cfg: &PopulationConfig) -> Result<Population> {
    let mixture = |which, samples, seed| GaussianPairConfig {
        sigma: cfg.sigma,
        eta: cfg.eta,
        input_dim: cfg.input_dim,
        which,
        sample_count: samples,
        seed,
    };
    let k = cfg.models_per_class;
    let models = (0..2 * k)
        .into_par_iter()
        .map(|i| -> Result<(NetworkSpec, u8)> {
            let label = u8::from(i >= k);
            let which = if label == 0 { MixtureKind::D1 } else { MixtureKind::D3 };
            let seed = task_seed(cfg.seed, i);
            let data = sample_gaussian_pair(&mixture(which, cfg.train_samples, seed))?;
            let tc = TrainConfig {
                seed: task_seed(seed, 1),
                ..cfg.train.clone()
            };
            Ok((train_classifier(&data, &tc)?, label))
        })
        .collect::<Result<Vec<_>>>()?;
    let clean = sample_gaussian_pair(&mixture(MixtureKind::D1, cfg.clean_samples, task_seed(cfg.seed, 2 * k)))?;
    let clean_samples = inputs(&clean);
    let perturb = PerturbConfig::uniform_range(
        clean_samples.len(),
        cfg.input_dim,
        cfg.perturb_range.0,
        cfg.perturb_range.1,
        cfg.trials_per_sample,
        cfg.patch_size,
        task_seed(cfg.seed, 2 * k + 1),
    );
    Ok(Population {
        models,
        clean_samples,
        perturb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_inverse_square_root() {
        let x = [100.0, 400.0, 1600.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 / v.sqrt()).collect();
        assert!((log_log_slope(&x, &y) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn sample_budget_formula() {
        let n = required_samples(1.0, 0.25, 0.1, 0.05, 1, 8);
        let expect = 16.0 * (2.0 * 8f64.ln() + 20f64.ln()) / (0.25f64.powi(4) * 0.01);
        assert!((n - expect).abs() < 1e-6 * expect);
        assert!(n > 2.9e6 && n < 3.0e6);
    }

    #[test]
    fn analytic_distance_is_deterministic() {
        let a = analytic_theorem_distance(Kernel::Cosine).unwrap();
        assert_eq!(a, analytic_theorem_distance(Kernel::Cosine).unwrap());
        assert!(a > 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn factor_matrix_is_a_correlation() {
        let c = random_factor_correlation(10, 3, 200, 1).unwrap();
        assert_eq!(c.size(), 10);
        assert!((c.get(3, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bench_on_small_input() {
        let c = random_factor_correlation(10, 3, 200, 1).unwrap();
        let row = bench_matrix(&dissimilarity(&c)).unwrap();
        assert!(row.pruned_nonzeros <= row.full_nonzeros);
        assert!(row.num_simplices >= 10);
    }
}
