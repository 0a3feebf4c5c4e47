//! Fixed-length summaries of persistence diagrams and of raw correlation
//! matrices.

use std::io::{Read, Write};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;
use crate::rng::seeded;
use crate::trace::CorrelationMatrix;

/// Version of the feature list and the feature table layout.
pub const FEATURE_FORMAT_VERSION: u32 = 1;

pub const FEATURE_COUNT: usize = 12;

/// Per dimension: max persistence, mean persistence, mean birth, mean death,
/// mean midlife, persistence standard deviation.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "f01", "f02", "f03", "f04", "f05", "f06", "f11", "f12", "f13", "f14", "f15", "f16",
];

pub const BASELINE_NAMES: [&str; 8] = ["s1", "s2", "s3", "s4", "s5", "fr25", "fr50", "fr75"];

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
    pub label: Option<u8>,
}

impl FeatureVector {
    pub fn index_of(name: &str) -> Option<usize> {
        FEATURE_NAMES.iter().position(|n| *n == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrBaselineVector {
    pub singular: [f64; 5],
    pub frob: [f64; 3],
}

impl CorrBaselineVector {
    pub fn values(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..5].copy_from_slice(&self.singular);
        out[5..].copy_from_slice(&self.frob);
        out
    }
}

fn dim_stats(dg: &PersistenceDiagram, dim: usize) -> [f64; 6] {
    let dots: Vec<(f64, f64)> = dg
        .finite(dim)
        .into_iter()
        .filter(|(b, d)| d > b)
        .collect();
    if dots.is_empty() {
        return [0.0; 6];
    }
    let n = dots.len() as f64;
    let pers: Vec<f64> = dots.iter().map(|(b, d)| d - b).collect();
    let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / n;
    let max_pers = pers.iter().copied().fold(0.0, f64::max);
    let mean_pers = mean(&mut pers.iter().copied());
    let mean_birth = mean(&mut dots.iter().map(|p| p.0));
    let mean_death = mean(&mut dots.iter().map(|p| p.1));
    let mean_mid = mean(&mut dots.iter().map(|p| (p.0 + p.1) / 2.0));
    let var = mean(&mut pers.iter().map(|p| (p - mean_pers).powi(2)));
    [max_pers, mean_pers, mean_birth, mean_death, mean_mid, var.sqrt()]
}

/// The twelve topological features: six statistics of the 0-dimensional
/// diagram followed by the same six of the 1-dimensional one.
pub fn topo_features(dg0: &PersistenceDiagram, dg1: &PersistenceDiagram) -> FeatureVector {
    let mut values = [0.0; FEATURE_COUNT];
    values[..6].copy_from_slice(&dim_stats(dg0, 0));
    values[6..].copy_from_slice(&dim_stats(dg1, 1));
    FeatureVector {
        values,
        label: None,
    }
}

fn mat_vec(a: &[f64], m: usize, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i * m..(i + 1) * m].iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Largest `k` singular values of the `m × m` matrix `a`, descending, by power
/// iteration on `aᵀa` with deflation against the vectors already found.
pub fn top_singular_values(a: &[f64], m: usize, k: usize) -> Vec<f64> {
    let mut ata = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            ata[i * m + j] = (0..m).map(|r| a[r * m + i] * a[r * m + j]).sum();
        }
    }
    let mut rng = seeded(0x5eed);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::with_capacity(k);
    let mut y = vec![0.0; m];
    for _ in 0..k.min(m) {
        let mut x: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
        let deflate = |x: &mut [f64], found: &[Vec<f64>]| {
            for v in found {
                let dot: f64 = v.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
            }
        };
        deflate(&mut x, &found);
        normalize(&mut x);
        let mut lambda = 0.0;
        for _ in 0..POWER_MAX_ITER {
            mat_vec(&ata, m, &x, &mut y);
            deflate(&mut y, &found);
            let next: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
            let norm = normalize(&mut y);
            std::mem::swap(&mut x, &mut y);
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            let done = (next - lambda).abs() <= POWER_TOL * next.abs().max(1.0);
            lambda = next;
            if done {
                break;
            }
        }
        values.push(lambda.max(0.0).sqrt());
        found.push(x);
    }
    values.resize(k, 0.0);
    values
}

/// Percentile `p` in `[0, 100]` with linear interpolation between order
/// statistics.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Top five singular values and three thresholded Frobenius norms.
pub fn corr_baseline_features(corr: &CorrelationMatrix) -> Result<CorrBaselineVector> {
    let m = corr.size();
    if m < 5 {
        return Err(Error::TooSmall {
            what: "neurons for baseline features",
            needed: 5,
            got: m,
        });
    }
    let a = corr.values();
    let sv = top_singular_values(a, m, 5);
    let mut off: Vec<f64> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .map(|(i, j)| a[i * m + j].abs())
        .collect();
    off.sort_by(f64::total_cmp);
    let mut frob = [0.0; 3];
    for (slot, p) in frob.iter_mut().zip([25.0, 50.0, 75.0]) {
        let t = percentile(&off, p);
        *slot = a
            .iter()
            .filter(|v| v.abs() >= t)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
    }
    let mut singular = [0.0; 5];
    singular.copy_from_slice(&sv);
    Ok(CorrBaselineVector { singular, frob })
}

/// One row of a feature table.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub model: String,
    pub features: FeatureVector,
    pub baseline: Option<CorrBaselineVector>,
}

/// Writes `model,label,f01..f16` plus `s1..fr75` when every row has baseline
/// features.
pub fn write_feature_table<W: Write>(rows: &[FeatureRow], out: W) -> Result<()> {
    let with_baseline = !rows.is_empty() && rows.iter().all(|r| r.baseline.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["model", "label"];
    header.extend(FEATURE_NAMES);
    if with_baseline {
        header.extend(BASELINE_NAMES);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.model.clone(),
            r.features.label.map_or(String::new(), |l| l.to_string()),
        ];
        rec.extend(r.features.values.iter().map(f64::to_string));
        if with_baseline {
            rec.extend(r.baseline.unwrap().values().iter().map(f64::to_string));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_table<R: Read>(input: R) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let topo_ok = header.len() >= 14
        && header[0] == "model"
        && header[1] == "label"
        && header[2..14].iter().zip(FEATURE_NAMES).all(|(a, b)| a == b);
    let with_baseline = match header.len() {
        14 => false,
        22 => header[14..].iter().zip(BASELINE_NAMES).all(|(a, b)| a == b),
        _ => false,
    };
    if !topo_ok || (header.len() != 14 && !with_baseline) {
        return Err(Error::Format("feature table header does not match model,label,f01..f16[,s1..fr75]".into()));
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, format!("bad number {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, "features must be finite"))
            }
        };
        let label = match rec[1].trim() {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            other => return Err(Error::parse(line, format!("label must be 0 or 1, got {other:?}"))),
        };
        let mut values = [0.0; FEATURE_COUNT];
        for (slot, field) in values.iter_mut().zip(rec.iter().skip(2)) {
            *slot = num(field)?;
        }
        let baseline = if with_baseline {
            let mut v = [0.0; 8];
            for (slot, field) in v.iter_mut().zip(rec.iter().skip(14)) {
                *slot = num(field)?;
            }
            let mut singular = [0.0; 5];
            singular.copy_from_slice(&v[..5]);
            let mut frob = [0.0; 3];
            frob.copy_from_slice(&v[5..]);
            Some(CorrBaselineVector { singular, frob })
        } else {
            None
        };
        rows.push(FeatureRow {
            model: rec[0].to_string(),
            features: FeatureVector { values, label },
            baseline,
        });
    }
    Ok(rows)
}
