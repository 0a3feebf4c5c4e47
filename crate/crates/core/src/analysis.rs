//! Population statistics: Welch's t-test and shortcut-edge lengths.

use crate::complex::Filtration;
use crate::error::{Error, Result};
use crate::persistence::{CycleRepresentative, PersistencePair};

/// Number of layers an edge crosses.
pub fn edge_length(i: usize, j: usize, layer_of: &[usize]) -> usize {
    layer_of[i].abs_diff(layer_of[j])
}

/// Lengths of the edges that kill 0-dimensional classes, latest death first,
/// keeping at most `top_k`. Zero-persistence and essential pairs are skipped.
pub fn death_edge_lengths(f: &Filtration, pairs0: &[PersistencePair], top_k: usize) -> Vec<usize> {
    let mut deaths: Vec<&PersistencePair> = pairs0
        .iter()
        .filter(|p| p.dim == 0 && p.death_simplex.is_some() && p.death > p.birth)
        .collect();
    deaths.sort_by_key(|p| std::cmp::Reverse(p.death_simplex));
    deaths
        .iter()
        .take(top_k)
        .map(|p| {
            let v = f.simplices()[p.death_simplex.unwrap()].vertices();
            edge_length(v[0] as usize, v[1] as usize, f.layer_of())
        })
        .collect()
}

/// Longest edge (in layers crossed) of each of the first `top_k` cycles.
pub fn longest_cycle_edge_lengths(cycles: &[CycleRepresentative], top_k: usize) -> Vec<usize> {
    cycles
        .iter()
        .take(top_k)
        .map(|c| {
            c.edges
                .iter()
                .map(|e| e.layer_i.abs_diff(e.layer_j))
                .max()
                .unwrap_or(0)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortcutStats {
    pub mean_death_edge_length: f64,
    pub mean_longest_cycle_edge_length: f64,
    pub death_edge_lengths: Vec<usize>,
    pub cycle_edge_lengths: Vec<usize>,
}

fn mean_len(v: &[usize]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<usize>() as f64 / v.len() as f64
    }
}

impl ShortcutStats {
    pub fn new(death_edge_lengths: Vec<usize>, cycle_edge_lengths: Vec<usize>) -> Self {
        Self {
            mean_death_edge_length: mean_len(&death_edge_lengths),
            mean_longest_cycle_edge_length: mean_len(&cycle_edge_lengths),
            death_edge_lengths,
            cycle_edge_lengths,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTestResult {
    pub t_stat: f64,
    pub dof: f64,
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided Welch t-test with Welch–Satterthwaite degrees of freedom.
///
/// When both samples have zero variance the statistic is 0 with p = 1 for
/// equal means and ±∞ with p = 0 otherwise; the degrees of freedom are then
/// `|a| + |b| − 2`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    for (x, name) in [(a, "first"), (b, "second")] {
        if x.len() < 2 {
            return Err(Error::TooSmall {
                what: "observations per sample",
                needed: 2,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("{name} sample has non-finite values")));
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let (sa, sb) = (var_a / na, var_b / nb);
    let se2 = sa + sb;
    let diff = mean_a - mean_b;
    if se2 == 0.0 {
        let (t_stat, p_value) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTestResult {
            t_stat,
            dof: na + nb - 2.0,
            p_value,
            mean_a,
            mean_b,
        });
    }
    let t_stat = diff / se2.sqrt();
    let dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(TTestResult {
        t_stat,
        dof,
        p_value: student_t_two_sided(t_stat, dof),
        mean_a,
        mean_b,
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    regularized_incomplete_beta(dof / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (k, c) in C.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    // the fraction converges fast only below the mean of the distribution
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let guard = |v: f64| if v.abs() < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - (a + b) * x / (a + 1.0));
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 / guard(1.0 + even * d);
        c = guard(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 / guard(1.0 + odd * d);
        c = guard(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
