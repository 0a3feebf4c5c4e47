//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when a
//! criterion fails that is not listed as an expected desk-scale failure.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;
use topo_trojan::analysis::welch_t_test;
use topo_trojan::complex::{build_filtration, Filtration};
use topo_trojan::detector::{population_features, evaluate_population, DetectorConfig, ModelFeatures};
use topo_trojan::experiments::{
    bench_matrix, build_population, convergence, random_factor_correlation, theorem1, PopulationConfig,
    TheoremConfig, CLAIMED_THEOREM_BOUND,
};
use topo_trojan::features::FeatureVector;
use topo_trojan::persistence::{
    bottleneck_distance, diagram, diagram_stability_check, extract_cycles, naive_pairs, naive_reduce,
    one_dim_diagram, one_dim_pairs, zero_dim_pairs, CycleRepresentative, CycleSelection, Dot,
    PersistenceDiagram,
};
use topo_trojan::rng::{seeded, Rng as ChaCha};
use topo_trojan::trace::{dissimilarity, DissimilarityMatrix, Kernel};

/// Frozen analytic bottleneck distance between the theorem networks' 1D
/// diagrams under the cosine kernel: `f2` has the single dot
/// `(1 - 1/sqrt 2, 1)` and `f1` has none.
fn frozen_analytic_cosine() -> f64 {
    1.0 / (2.0 * 2f64.sqrt())
}

/// Same under the Pearson kernel: the dot is `(1 - 1/sqrt 3, 4/3)`.
fn frozen_analytic_pearson() -> f64 {
    (1.0 / 3.0 + 1.0 / 3f64.sqrt()) / 2.0
}

/// Criteria that fail at desk scale, with the observed reason.
const EXPECTED_FAILURES: &[(&str, &str)] = &[
    (
        "6",
        "the correlation-spectrum baseline separates the synthetic populations better than the diagram statistics",
    ),
    (
        "7",
        "the 0D mean-death difference is not significant at 5% for this population",
    ),
];

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    /// All checks hold but a claimed value is not reproduced.
    Discrepancy,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        status: if pass { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn random_matrix(rng: &mut ChaCha, m: usize) -> DissimilarityMatrix {
    // a coarse grid in some cases forces ties in the filtration order
    let coarse = rng.random_bool(0.3);
    let upper: Vec<f64> = (0..m * (m - 1) / 2)
        .map(|_| {
            let v: f64 = rng.random_range(0.0..2.0);
            if coarse {
                (v * 5.0).round() / 5.0
            } else {
                v
            }
        })
        .collect();
    DissimilarityMatrix::from_upper(m, &upper).unwrap()
}

fn pair_key(dim: usize, b: usize, d: Option<usize>) -> (usize, usize, Option<usize>) {
    (dim, b, d)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(101);
    let cases = 600;
    let mut failures = 0;
    for _ in 0..cases {
        let m = rng.random_range(2..=12);
        let w = random_matrix(&mut rng, m);
        let cutoff = rng.random_range(0.05..=2.0);
        let f = build_filtration(&w, cutoff).unwrap();
        let fast = diagram(&f, false);
        let slow = naive_reduce(&f);
        let mut fast_pairs: Vec<_> = zero_dim_pairs(&f)
            .into_iter()
            .chain(one_dim_pairs(&f))
            .map(|p| pair_key(p.dim, p.birth_simplex, p.death_simplex))
            .collect();
        let mut slow_pairs: Vec<_> = naive_pairs(&f)
            .into_iter()
            .map(|p| pair_key(p.dim, p.birth_simplex, p.death_simplex))
            .collect();
        fast_pairs.sort_unstable();
        slow_pairs.sort_unstable();
        if !fast.same_multiset(&slow) || fast_pairs != slow_pairs {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(30),
        format!("{cases} filtrations, {failures} mismatches, {:.2}s", elapsed.as_secs_f64()),
    )
}

/// Gaussian elimination over Z/2 on bit vectors.
struct Span {
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Span {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                v.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
            }
        }
        v
    }

    fn insert(&mut self, v: Vec<u64>) {
        let v = self.reduce(v);
        if let Some(p) = (0..v.len() * 64).find(|&k| v[k / 64] >> (k % 64) & 1 == 1) {
            // keep rows fully reduced on the new pivot
            for row in self.rows.iter_mut() {
                if row[p / 64] >> (p % 64) & 1 == 1 {
                    row.iter_mut().zip(&v).for_each(|(a, b)| *a ^= b);
                }
            }
            self.rows.push(v);
            self.pivots.push(p);
        }
    }

    fn contains(&self, v: Vec<u64>) -> bool {
        self.reduce(v).iter().all(|&w| w == 0)
    }
}

fn bounding_below(f: &Filtration, edge_slot: &HashMap<(u32, u32), usize>, z: &[u64], keep: impl Fn(f64) -> bool) -> bool {
    let words = z.len();
    let mut span = Span::new();
    for s in f.simplices() {
        if s.dim() == 2 && keep(s.filter) {
            let v = s.vertices();
            let mut b = vec![0u64; words];
            for (a, c) in [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])] {
                let k = edge_slot[&(a, c)];
                b[k / 64] ^= 1 << (k % 64);
            }
            span.insert(b);
        }
    }
    span.contains(z.to_vec())
}

fn check_cycle(f: &Filtration, c: &CycleRepresentative, edge_slot: &HashMap<(u32, u32), usize>) -> Result<(), String> {
    if !c.is_closed() {
        return Err("odd vertex degree".into());
    }
    if (c.max_weight() - c.birth).abs() > 1e-12 {
        return Err(format!("max edge weight {} but birth {}", c.max_weight(), c.birth));
    }
    let words = edge_slot.len().div_ceil(64).max(1);
    let mut z = vec![0u64; words];
    for e in &c.edges {
        let k = edge_slot[&(e.i as u32, e.j as u32)];
        z[k / 64] ^= 1 << (k % 64);
    }
    const SLACK: f64 = 1e-9;
    if bounding_below(f, edge_slot, &z, |v| v <= c.death - SLACK) {
        return Err("bounds before its death".into());
    }
    if !bounding_below(f, edge_slot, &z, |v| v <= c.death + SLACK) {
        return Err("does not bound after its death".into());
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let mut rng = seeded(202);
    let mut instances = 0;
    let mut cycles_checked = 0;
    let mut errors = Vec::new();
    while instances < 150 {
        let m = rng.random_range(4..=8);
        let w = random_matrix(&mut rng, m);
        let f = build_filtration(&w, rng.random_range(0.5..=2.0)).unwrap();
        let cycles = extract_cycles(&f, CycleSelection::TopK(usize::MAX)).unwrap();
        let dg: Vec<(f64, f64)> = one_dim_diagram(&f).finite(1);
        let mut from_cycles: Vec<(f64, f64)> = cycles.iter().map(|c| (c.birth, c.death)).collect();
        from_cycles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if from_cycles != dg {
            errors.push("cycle dots differ from the diagram".to_string());
        }
        let edge_slot: HashMap<(u32, u32), usize> = f
            .simplices()
            .iter()
            .filter(|s| s.dim() == 1)
            .enumerate()
            .map(|(k, s)| ((s.vertices()[0], s.vertices()[1]), k))
            .collect();
        for c in &cycles {
            if let Err(e) = check_cycle(&f, c, &edge_slot) {
                errors.push(e);
            }
            cycles_checked += 1;
        }
        instances += 1;
    }
    outcome(
        errors.is_empty() && cycles_checked > 0,
        format!(
            "{instances} instances, {cycles_checked} cycles, {} failures{}",
            errors.len(),
            errors.first().map_or(String::new(), |e| format!(" (first: {e})"))
        ),
    )
}

fn exhaustive_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(q, _)| (q.1 - q.0) / 2.0)
                .fold(acc, f64::max);
            *best = best.min(rest);
            return;
        }
        let p = a[i];
        go(i + 1, a, b, used, acc.max((p.1 - p.0) / 2.0), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let d = (p.0 - b[j].0).abs().max((p.1 - b[j].1).abs());
                go(i + 1, a, b, used, acc.max(d), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

fn random_dots(rng: &mut ChaCha) -> Vec<(f64, f64)> {
    let k = rng.random_range(0..=6);
    (0..k)
        .map(|_| {
            let b: f64 = rng.random_range(0.0..1.5);
            (b, b + rng.random_range(0.0..1.0))
        })
        .collect()
}

fn as_diagram(dots: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::new(dots.iter().map(|&(birth, death)| Dot { dim: 1, birth, death }).collect())
}

fn criterion_3() -> Outcome {
    let mut rng = seeded(303);
    let mut worst: f64 = 0.0;
    for _ in 0..1200 {
        let (a, b) = (random_dots(&mut rng), random_dots(&mut rng));
        let fast = bottleneck_distance(&as_diagram(&a), &as_diagram(&b), 1);
        worst = worst.max((fast - exhaustive_bottleneck(&a, &b)).abs());
    }
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.random_range(4..=12);
        let w = random_matrix(&mut rng, m);
        let mag = rng.random_range(0.001..0.2);
        let mut v = w.values().to_vec();
        for i in 0..m {
            for j in i + 1..m {
                let x = (v[i * m + j] + rng.random_range(-mag..=mag)).clamp(0.0, 2.0);
                v[i * m + j] = x;
                v[j * m + i] = x;
            }
        }
        let w2 = DissimilarityMatrix::new(m, v, vec![0; m]).unwrap();
        let (db, winf) = diagram_stability_check(&w, &w2, 2.0).unwrap();
        if db > winf + 1e-9 {
            violations += 1;
        }
        if winf > 0.0 {
            max_ratio = max_ratio.max(db / winf);
        }
    }
    outcome(
        worst <= 1e-12 && violations == 0,
        format!(
            "1200 pairs, max |fast - exhaustive| = {worst:.1e}; 100 stability trials, {violations} violations, max d_b/|dW| = {max_ratio:.3}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let cfg = TheoremConfig {
        seed: 4,
        ..Default::default()
    };
    let r = theorem1(&cfg).unwrap();
    let eta = cfg.eta;
    let risks_ok = r.risk_f1_d1 <= eta + 0.02
        && r.risk_f2_d3 <= eta + 0.02
        && (0.48..=0.52).contains(&r.risk_f2_d2);
    let frozen = |k: Kernel| match k {
        Kernel::Cosine => frozen_analytic_cosine(),
        Kernel::Pearson => frozen_analytic_pearson(),
    };
    let frozen_ok = r
        .distances
        .iter()
        .all(|d| (d.analytic - frozen(d.kernel)).abs() <= 1e-12);
    let dists: Vec<String> = r
        .distances
        .iter()
        .map(|d| format!("{}: analytic {:.6} sampled {:.6}", d.kernel, d.analytic, d.sampled))
        .collect();
    let claim = if r.meets_claimed_bound() {
        format!("meets claimed bound >= {CLAIMED_THEOREM_BOUND}")
    } else {
        format!("REPRODUCTION DISCREPANCY: analytic d_b below claimed {CLAIMED_THEOREM_BOUND} under both kernels")
    };
    let elapsed = start.elapsed();
    let mut o = outcome(
        risks_ok && frozen_ok && elapsed < Duration::from_secs(60),
        format!(
            "{}; risks f1/D1 {:.4}, f2/D3 {:.4}, f2/D2 {:.4} (n = {}); {claim}; frozen constants {}; {:.2}s",
            dists.join(", "),
            r.risk_f1_d1,
            r.risk_f2_d3,
            r.risk_f2_d2,
            r.samples,
            if frozen_ok { "match" } else { "DIFFER" },
            elapsed.as_secs_f64()
        ),
    );
    if o.status == Status::Pass && !r.meets_claimed_bound() {
        o.status = Status::Discrepancy;
    }
    o
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cfg = TheoremConfig {
        seed: 5,
        ..Default::default()
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for kernel in [Kernel::Cosine, Kernel::Pearson] {
        let r = convergence(&cfg, &[400, 1600, 6400, 25600], 5, kernel).unwrap();
        pass &= r.strictly_decreasing() && r.slope_in_range();
        let medians: Vec<String> = r.rows.iter().map(|row| format!("{:.4}", row.median)).collect();
        detail.push(format!("{kernel} medians {} slope {:.3}", medians.join("/"), r.slope));
    }
    let elapsed = start.elapsed();
    outcome(
        pass && elapsed < Duration::from_secs(120),
        format!("{}; {:.2}s", detail.join("; "), elapsed.as_secs_f64()),
    )
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

fn column(feats: &[ModelFeatures], label: u8, name: &str) -> Vec<f64> {
    let k = FeatureVector::index_of(name).unwrap();
    feats
        .iter()
        .filter(|f| f.topo.label == Some(label))
        .map(|f| f.topo.values[k])
        .collect()
}

fn criteria_6_and_7() -> (Outcome, Outcome) {
    let start = Instant::now();
    let pcfg = PopulationConfig {
        seed: 6,
        ..Default::default()
    };
    let pop = build_population(&pcfg).unwrap();
    let feats = population_features(&pop.models, &pop.clean_samples, &pop.perturb, 1).unwrap();
    let mut topo = Vec::new();
    let mut base = Vec::new();
    for seed in 0..5 {
        let dcfg = DetectorConfig {
            seed,
            ..Default::default()
        };
        let (t, b) = evaluate_population(&feats, &dcfg).unwrap();
        topo.push(t.auc);
        base.push(b.auc);
    }
    let elapsed = start.elapsed();
    let (mt, mb) = (median(&topo), median(&base));
    let c6 = outcome(
        mt >= 0.8 && mt >= mb && elapsed < Duration::from_secs(600),
        format!(
            "median test AUC topo {mt:.3} {topo:.3?}, corr baseline {mb:.3} {base:.3?}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    );

    let mut notes = Vec::new();
    let mut ok = true;
    for (name, what) in [("f04", "0D mean death"), ("f11", "1D max persistence")] {
        let (clean, trojan) = (column(&feats, 0, name), column(&feats, 1, name));
        let t = welch_t_test(&trojan, &clean).unwrap();
        ok &= t.p_value < 0.05;
        let sign = if t.t_stat > 0.0 { "Trojaned > clean" } else { "Trojaned < clean" };
        notes.push(format!(
            "{what} ({name}): t {:.3}, p {:.2e}, {sign} ({:.4} vs {:.4})",
            t.t_stat, t.p_value, t.mean_a, t.mean_b
        ));
    }
    (c6, outcome(ok, notes.join("; ")))
}

fn criterion_8() -> Outcome {
    let trials = 20;
    let mut within = 0;
    let mut slowest = Duration::ZERO;
    let mut rows = Vec::new();
    for t in 0..trials {
        let corr = random_factor_correlation(300, 5, 400, 800 + t).unwrap();
        let w = dissimilarity(&corr);
        let start = Instant::now();
        let row = bench_matrix(&w).unwrap();
        let total = start.elapsed();
        slowest = slowest.max(total);
        if row.within_factor_two() {
            within += 1;
        } else {
            eprintln!(
                "warning: trial {t}: pruned boundary reduction {:.4}s exceeds twice the coboundary reduction {:.4}s",
                row.boundary_time.as_secs_f64(),
                row.coboundary_time.as_secs_f64()
            );
        }
        rows.push(row);
    }
    let r = &rows[0];
    outcome(
        slowest < Duration::from_secs(60) && within * 10 >= trials * 8,
        format!(
            "{within}/{trials} trials with bd <= 2x cobd; slowest full run {:.2}s; trial 0: cutoff {:.4}, {} simplices, cobd {:.4}s, bd {:.4}s, pruned nonzeros {} of {}",
            slowest.as_secs_f64(),
            r.cutoff,
            r.num_simplices,
            r.coboundary_time.as_secs_f64(),
            r.boundary_time.as_secs_f64(),
            r.pruned_nonzeros,
            r.full_nonzeros
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 oracle equivalence", criterion_1()),
        ("2 cycle validity", criterion_2()),
        ("3 bottleneck exactness and stability", criterion_3()),
        ("4 theorem networks", criterion_4()),
        ("5 sample-size convergence", criterion_5()),
    ];
    let (c6, c7) = criteria_6_and_7();
    results.push(("6 end-to-end detection", c6));
    results.push(("7 statistical separation", c7));
    results.push(("8 performance envelope", criterion_8()));

    let mut unexpected = 0;
    for (name, o) in &results {
        let id = name.split(' ').next().unwrap();
        let expected = EXPECTED_FAILURES.iter().find(|(k, _)| *k == id);
        let word = match o.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Discrepancy => "DISCREPANCY",
        };
        println!("criterion {name}: {word} | {}", o.detail);
        match (o.status, expected) {
            (Status::Fail, Some((_, why))) => println!("    expected failure at desk scale: {why}"),
            (Status::Fail, None) => unexpected += 1,
            (Status::Pass, Some(_)) => println!("    listed as an expected failure but passed"),
            _ => {}
        }
    }
    let count = |s: Status| results.iter().filter(|(_, o)| o.status == s).count();
    println!(
        "acceptance: {} passed, {} failed ({} expected), {} discrepancy",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Fail) - unexpected,
        count(Status::Discrepancy)
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
