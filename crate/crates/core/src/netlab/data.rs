//! Synthetic data: the Gaussian mixture triple, trigger overlay and
//! pixel-wise perturbation.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::theorem::gaussian_pair_means;
use super::Sample;
use crate::error::{Error, Result};
use crate::rng;

/// Which member of the mixture triple to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixtureKind {
    /// Clean data: two clusters `μ1, μ2`, label `i mod 2`.
    D1,
    /// Triggered inputs with clean labels: four clusters, label `j mod 2`.
    D2,
    /// Triggered inputs with flipped labels: four clusters, label `1{j ∈ {2,3}}`.
    D3,
}

impl fmt::Display for MixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixtureKind::D1 => "D1",
            MixtureKind::D2 => "D2",
            MixtureKind::D3 => "D3",
        })
    }
}

impl FromStr for MixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D1" | "d1" => Ok(MixtureKind::D1),
            "D2" | "d2" => Ok(MixtureKind::D2),
            "D3" | "d3" => Ok(MixtureKind::D3),
            other => Err(Error::InvalidConfig(format!("unknown mixture `{other}`"))),
        }
    }
}

impl MixtureKind {
    /// Label of a point drawn from cluster `index` (1-based, as in `μ1..μ4`).
    pub fn label(self, index: usize) -> usize {
        match self {
            MixtureKind::D1 | MixtureKind::D2 => index % 2,
            MixtureKind::D3 => usize::from(index == 2 || index == 3),
        }
    }

    fn cluster_count(self) -> usize {
        match self {
            MixtureKind::D1 => 2,
            MixtureKind::D2 | MixtureKind::D3 => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPairConfig {
    pub sigma: f64,
    pub eta: f64,
    pub input_dim: usize,
    pub which: MixtureKind,
    pub sample_count: usize,
    pub seed: u64,
}

impl GaussianPairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig("sigma must be positive".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidConfig("eta must lie in (0, 1)".into()));
        }
        if self.input_dim < 2 {
            return Err(Error::InvalidConfig("input_dim must be at least 2".into()));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidConfig("sample_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draws `sample_count` labelled points from the configured mixture.
pub fn sample_gaussian_pair(cfg: &GaussianPairConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let means = gaussian_pair_means(cfg.sigma, cfg.eta, cfg.input_dim);
    let clusters = cfg.which.cluster_count();
    let mut rng = rng::seeded(cfg.seed);
    let mut out = Vec::with_capacity(cfg.sample_count);
    for _ in 0..cfg.sample_count {
        let index = rng.random_range(1..=clusters);
        let mean = &means[index - 1];
        let x = mean
            .iter()
            .map(|mu| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + cfg.sigma * z
            })
            .collect();
        out.push((x, cfg.which.label(index)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriggerSpec {
    pub mask: Vec<f64>,
    pub pattern: Vec<f64>,
    pub target_label: usize,
}

/// Stamps the trigger onto `x`: `(1 - m) ⊙ x + m ⊙ δ`.
pub fn overlay_trigger(x: &[f64], trig: &TriggerSpec) -> Result<Vec<f64>> {
    if trig.mask.len() != x.len() || trig.pattern.len() != x.len() {
        return Err(Error::DimensionMismatch {
            layer: 0,
            expected: x.len(),
            found: trig.mask.len().max(trig.pattern.len()),
        });
    }
    Ok(x.iter()
        .zip(&trig.mask)
        .zip(&trig.pattern)
        .map(|((xk, mk), dk)| (1.0 - mk) * xk + mk * dk)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbConfig {
    pub trials_per_image: usize,
    /// One `(lower, upper)` pair per image.
    pub ranges: Vec<(Vec<f64>, Vec<f64>)>,
    pub patch_size: usize,
    pub seed: u64,
}

impl PerturbConfig {
    /// Same scalar range `[lo, hi]` on every coordinate of every image.
    pub fn uniform_range(
        images: usize,
        dim: usize,
        lo: f64,
        hi: f64,
        trials_per_image: usize,
        patch_size: usize,
        seed: u64,
    ) -> Self {
        Self {
            trials_per_image,
            ranges: vec![(vec![lo; dim], vec![hi; dim]); images],
            patch_size,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Produces `trials_per_image` copies of every image, each with one random
/// contiguous run of `patch_size` coordinates resampled uniformly from that
/// image's range.
pub fn perturb_pixelwise(images: &[Vec<f64>], cfg: &PerturbConfig) -> Result<Vec<Vec<f64>>> {
    if images.is_empty() {
        return Ok(Vec::new());
    }
    if cfg.trials_per_image == 0 {
        return Err(Error::InvalidConfig("trials_per_image must be at least 1".into()));
    }
    if cfg.ranges.len() != images.len() {
        return Err(Error::InvalidConfig(format!(
            "{} ranges for {} images",
            cfg.ranges.len(),
            images.len()
        )));
    }
    let mut rng = rng::seeded(cfg.seed);
    let mut out = Vec::with_capacity(images.len() * cfg.trials_per_image);
    for (x, (lo, hi)) in images.iter().zip(&cfg.ranges) {
        let d = x.len();
        if cfg.patch_size == 0 || cfg.patch_size > d {
            return Err(Error::InvalidConfig(format!(
                "patch size {} not in 1..={d}",
                cfg.patch_size
            )));
        }
        if lo.len() != d || hi.len() != d {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: d,
                found: lo.len().min(hi.len()),
            });
        }
        if lo.iter().zip(hi).any(|(l, u)| l > u) {
            return Err(Error::InvalidConfig("range lower bound exceeds upper bound".into()));
        }
        for _ in 0..cfg.trials_per_image {
            let start = rng.random_range(0..=d - cfg.patch_size);
            let mut copy = x.clone();
            for k in start..start + cfg.patch_size {
                copy[k] = rng::uniform(&mut rng, lo[k], hi[k]);
            }
            out.push(copy);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(which: MixtureKind, n: usize, seed: u64) -> GaussianPairConfig {
        GaussianPairConfig {
            sigma: 1.0,
            eta: (-1.0f64).exp(),
            input_dim: 2,
            which,
            sample_count: n,
            seed,
        }
    }

    #[test]
    fn d3_labels_flip_mixed_quadrants() {
        assert_eq!(MixtureKind::D3.label(2), 1);
        assert_eq!(MixtureKind::D3.label(3), 1);
        assert_eq!(MixtureKind::D3.label(1), 0);
        assert_eq!(MixtureKind::D3.label(4), 0);
        assert_eq!(MixtureKind::D1.label(1), 1);
        assert_eq!(MixtureKind::D2.label(4), 0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_gaussian_pair(&cfg(MixtureKind::D2, 100, 11)).unwrap();
        let b = sample_gaussian_pair(&cfg(MixtureKind::D2, 100, 11)).unwrap();
        assert_eq!(a, b);
        let c = sample_gaussian_pair(&cfg(MixtureKind::D2, 100, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn d1_cluster_means_converge() {
        let data = sample_gaussian_pair(&cfg(MixtureKind::D1, 40_000, 3)).unwrap();
        // label 1 comes from μ1 = 2(-e2-e1), label 0 from μ2 = 2(-e2+e1)
        for (label, expected) in [(1usize, [-2.0, -2.0]), (0, [2.0, -2.0])] {
            let pts: Vec<_> = data.iter().filter(|(_, y)| *y == label).collect();
            for axis in 0..2 {
                let mean = pts.iter().map(|(x, _)| x[axis]).sum::<f64>() / pts.len() as f64;
                assert!((mean - expected[axis]).abs() < 0.05, "axis {axis}: {mean}");
            }
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = cfg(MixtureKind::D1, 10, 0);
        c.eta = 1.0;
        assert!(sample_gaussian_pair(&c).is_err());
        c.eta = 0.5;
        c.input_dim = 1;
        assert!(sample_gaussian_pair(&c).is_err());
    }

    fn trig(mask: Vec<f64>, pattern: Vec<f64>) -> TriggerSpec {
        TriggerSpec {
            mask,
            pattern,
            target_label: 0,
        }
    }

    #[test]
    fn overlay_examples() {
        let x = [1.0, 2.0];
        assert_eq!(overlay_trigger(&x, &trig(vec![0.0, 0.0], vec![4.0, 9.0])).unwrap(), x);
        assert_eq!(
            overlay_trigger(&x, &trig(vec![1.0, 1.0], vec![4.0, 9.0])).unwrap(),
            vec![4.0, 9.0]
        );
        assert_eq!(
            overlay_trigger(&x, &trig(vec![0.5, 0.0], vec![4.0, 9.0])).unwrap(),
            vec![2.5, 2.0]
        );
        assert!(overlay_trigger(&x, &trig(vec![1.0], vec![4.0])).is_err());
    }

    #[test]
    fn perturbation_changes_one_coordinate_per_copy() {
        let image = vec![vec![0.5, 0.5, 0.5, 0.5]];
        let cfg = PerturbConfig::uniform_range(1, 4, 2.0, 3.0, 3, 1, 9);
        let out = perturb_pixelwise(&image, &cfg).unwrap();
        assert_eq!(out.len(), 3);
        for copy in &out {
            let changed = copy.iter().zip(&image[0]).filter(|(a, b)| a != b).count();
            assert_eq!(changed, 1);
        }
    }

    #[test]
    fn degenerate_range_sets_constant() {
        let images = vec![vec![0.0; 6]; 2];
        let cfg = PerturbConfig::uniform_range(2, 6, 0.25, 0.25, 10, 2, 1);
        let out = perturb_pixelwise(&images, &cfg).unwrap();
        for copy in &out {
            let set: Vec<_> = copy.iter().filter(|v| **v != 0.0).collect();
            assert_eq!(set.len(), 2);
            assert!(set.iter().all(|v| **v == 0.25));
        }
    }

    #[test]
    fn perturbation_counts_and_empty_input() {
        let images = vec![vec![0.0; 3]; 5];
        let cfg = PerturbConfig::uniform_range(5, 3, 0.0, 1.0, 10, 1, 4);
        assert_eq!(perturb_pixelwise(&images, &cfg).unwrap().len(), 50);
        assert!(perturb_pixelwise(&[], &cfg).unwrap().is_empty());
    }

    #[test]
    fn perturbation_rejects_bad_patch() {
        let images = vec![vec![0.0; 3]];
        let cfg = PerturbConfig::uniform_range(1, 3, 0.0, 1.0, 1, 4, 0);
        assert!(perturb_pixelwise(&images, &cfg).is_err());
    }
}
