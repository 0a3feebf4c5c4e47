use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use topo_trojan::analysis::{death_edge_lengths, longest_cycle_edge_lengths, welch_t_test, ShortcutStats};
use topo_trojan::complex::build_filtration;
use topo_trojan::detector::{
    evaluate, population_features, read_detector, train_detector, write_detector, DetectorConfig,
};
use topo_trojan::experiments::{
    bench_matrix, build_population, convergence, required_samples, theorem1, PopulationConfig, TheoremConfig,
    CLAIMED_THEOREM_BOUND,
};
use topo_trojan::features::{
    corr_baseline_features, read_feature_table, topo_features, write_feature_table, FeatureRow, FeatureVector,
};
use topo_trojan::netlab::{
    perturb_pixelwise, read_dataset, read_network, sample_gaussian_pair, write_dataset, write_network,
    GaussianPairConfig, NetworkSpec, PerturbConfig,
};
use topo_trojan::persistence::{
    bottleneck_distance, diagram, extract_cycles, read_cycles, read_diagram_csv, write_cycles,
    write_diagram_csv, zero_dim_pairs, CycleSelection,
};
use topo_trojan::trace::{
    correlation_matrix, dissimilarity, read_correlation_csv, read_trace, read_trace_csv, record_activations,
    write_correlation_csv, write_trace, write_trace_csv, CorrelationMatrix,
};
use topo_trojan::Error;

use crate::{Command, CorrArgs, ZooArgs};

/// A failed command: process exit code and message.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    /// A closed stdout is not an error.
    fn broken_pipe() -> Self {
        Self {
            code: 0,
            message: String::new(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let closed = match &e {
            Error::Io(io) => io.kind() == io::ErrorKind::BrokenPipe,
            Error::Csv(c) => csv_broken_pipe(c),
            _ => false,
        };
        if closed {
            return Self::broken_pipe();
        }
        Self {
            code: if e.is_numeric() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Self::broken_pipe();
        }
        Self::data(e.to_string())
    }
}

fn csv_broken_pipe(e: &csv::Error) -> bool {
    matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe)
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        if csv_broken_pipe(&e) {
            return Self::broken_pipe();
        }
        Self::data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

/// File when given, stdout otherwise.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_corr(path: &Path) -> Result<CorrelationMatrix, Failure> {
    Ok(read_correlation_csv(open(path)?)?)
}

fn load_filtration(args: &CorrArgs) -> Result<topo_trojan::complex::Filtration, Failure> {
    let corr = load_corr(&args.corr)?;
    Ok(build_filtration(&dissimilarity(&corr), args.cutoff)?)
}

fn inputs_of(path: &Path) -> Result<Vec<Vec<f64>>, Failure> {
    Ok(read_dataset(open(path)?)?.into_iter().map(|(x, _)| x).collect())
}

/// Reads a `net_path,label` manifest; paths are relative to the manifest.
fn load_zoo(path: &Path) -> Result<Vec<(NetworkSpec, u8)>, Failure> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_reader(open(path)?);
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header != ["net_path", "label"] {
        return Err(Failure::data(format!("{}: header must be net_path,label", path.display())));
    }
    let mut models = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let label = match rec[1].trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Failure::data(format!(
                    "{} line {}: label must be 0 or 1, got {other:?}",
                    path.display(),
                    k + 2
                )))
            }
        };
        let net_path = base.join(rec[0].trim());
        let net = read_network(open(&net_path)?).map_err(|e| Failure::data(format!("{}: {e}", net_path.display())))?;
        models.push((net, label));
    }
    if models.is_empty() {
        return Err(Failure::data(format!("{}: empty manifest", path.display())));
    }
    Ok(models)
}

fn zoo_features(args: &ZooArgs) -> Result<Vec<FeatureVector>, Failure> {
    let models = load_zoo(&args.zoo)?;
    let clean = inputs_of(&args.samples)?;
    let dim = clean.first().map_or(0, Vec::len);
    let pcfg = PerturbConfig::uniform_range(clean.len(), dim, args.lo, args.hi, args.trials, args.patch, args.seed);
    let feats = population_features(&models, &clean, &pcfg, args.jobs)?;
    Ok(feats.into_iter().map(|f| f.topo).collect())
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::GenGaussian {
            which,
            n,
            sigma,
            eta,
            dim,
            seed,
            out,
        } => {
            let data = sample_gaussian_pair(&GaussianPairConfig {
                sigma,
                eta,
                input_dim: dim,
                which,
                sample_count: n,
                seed,
            })?;
            write_dataset(&data, sink(out.as_deref())?)?;
        }
        Command::GenZoo {
            models_per_class,
            train_samples,
            clean_samples,
            dim,
            seed,
            dir,
        } => gen_zoo(
            &PopulationConfig {
                models_per_class,
                train_samples,
                clean_samples,
                input_dim: dim,
                seed,
                ..PopulationConfig::default()
            },
            &dir,
        )?,
        Command::Perturb {
            input,
            trials,
            patch,
            lo,
            hi,
            seed,
            out,
        } => {
            let data = read_dataset(open(&input)?)?;
            let images: Vec<Vec<f64>> = data.iter().map(|(x, _)| x.clone()).collect();
            let dim = images.first().map_or(0, Vec::len);
            let cfg = PerturbConfig::uniform_range(images.len(), dim, lo, hi, trials, patch, seed);
            let perturbed = perturb_pixelwise(&images, &cfg)?;
            // copies of one input are contiguous and keep its label
            let labelled: Vec<(Vec<f64>, usize)> = perturbed
                .into_iter()
                .enumerate()
                .map(|(k, x)| (x, data[k / trials].1))
                .collect();
            write_dataset(&labelled, sink(out.as_deref())?)?;
        }
        Command::Trace { net, input, out, csv } => {
            let net = read_network(open(&net)?)?;
            let trace = record_activations(&net, &inputs_of(&input)?)?;
            let mut w = create(&out)?;
            if csv {
                write_trace_csv(&trace, &mut w)?;
            } else {
                write_trace(&trace, &mut w)?;
            }
            w.flush()?;
        }
        Command::Corr { trace, kernel, out } => {
            let t = if trace.extension().is_some_and(|e| e == "csv") {
                read_trace_csv(open(&trace)?)?
            } else {
                read_trace(open(&trace)?)?
            };
            let corr = correlation_matrix(&t, kernel)?;
            write_correlation_csv(&corr, sink(out.as_deref())?)?;
        }
        Command::Complex { corr, out } => {
            load_filtration(&corr)?.write_csv(sink(out.as_deref())?)?;
        }
        Command::Persist { corr, keep_zero, out } => {
            let dg = diagram(&load_filtration(&corr)?, keep_zero);
            write_diagram_csv(&dg, sink(out.as_deref())?)?;
        }
        Command::Cycles {
            corr,
            top_k,
            death_cutoff,
            out,
        } => {
            let sel = match (top_k, death_cutoff) {
                (Some(k), _) => CycleSelection::TopK(k),
                (None, Some(d)) => CycleSelection::DeathCutoff(d),
                (None, None) => unreachable!("clap requires one selection"),
            };
            let cycles = extract_cycles(&load_filtration(&corr)?, sel)?;
            eprintln!("{} cycle(s)", cycles.len());
            write_cycles(&cycles, sink(out.as_deref())?)?;
        }
        Command::Bottleneck { a, b, dim } => {
            if dim > 1 {
                return Err(Failure::data("dimension must be 0 or 1"));
            }
            let da = read_diagram_csv(open(&a)?)?;
            let db = read_diagram_csv(open(&b)?)?;
            println!("dim,bottleneck");
            println!("{dim},{}", bottleneck_distance(&da, &db, dim));
        }
        Command::Bench { corr } => bench(&corr)?,
        Command::Features {
            dg,
            corr,
            baseline,
            model,
            label,
            out,
        } => {
            let d = read_diagram_csv(open(&dg)?)?;
            let mut features = topo_features(&d, &d);
            features.label = label;
            let baseline = match (baseline, corr) {
                (true, Some(c)) => Some(corr_baseline_features(&load_corr(&c)?)?),
                _ => None,
            };
            let model = model.unwrap_or_else(|| {
                dg.file_stem()
                    .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned())
            });
            let row = FeatureRow {
                model,
                features,
                baseline,
            };
            write_feature_table(&[row], sink(out.as_deref())?)?;
        }
        Command::Compare {
            features_a,
            features_b,
            feature,
            test: _,
        } => {
            let idx = FeatureVector::index_of(&feature)
                .ok_or_else(|| Failure::data(format!("unknown feature `{feature}`")))?;
            let column = |p: &Path| -> Result<Vec<f64>, Failure> {
                Ok(read_feature_table(open(p)?)?
                    .iter()
                    .map(|r| r.features.values[idx])
                    .collect())
            };
            let r = welch_t_test(&column(&features_a)?, &column(&features_b)?)?;
            println!("feature,t_stat,dof,p_value,mean_a,mean_b");
            println!("{feature},{},{},{},{},{}", r.t_stat, r.dof, r.p_value, r.mean_a, r.mean_b);
        }
        Command::Shortcut {
            cycles,
            top_k,
            corr,
            cutoff,
        } => {
            let cyc = read_cycles(open(&cycles)?)?;
            let cycle_lengths = longest_cycle_edge_lengths(&cyc, top_k);
            let death_lengths = match corr {
                Some(c) => {
                    let f = build_filtration(&dissimilarity(&load_corr(&c)?), cutoff)?;
                    death_edge_lengths(&f, &zero_dim_pairs(&f), top_k)
                }
                None => Vec::new(),
            };
            let stats = ShortcutStats::new(death_lengths, cycle_lengths);
            let mut w = sink(None)?;
            writeln!(w, "kind,rank,length")?;
            for (k, l) in stats.death_edge_lengths.iter().enumerate() {
                writeln!(w, "death_edge,{},{l}", k + 1)?;
            }
            for (k, l) in stats.cycle_edge_lengths.iter().enumerate() {
                writeln!(w, "cycle_edge,{},{l}", k + 1)?;
            }
            w.flush()?;
            eprintln!(
                "mean death-edge length {:.4}; mean longest cycle-edge length {:.4}",
                stats.mean_death_edge_length, stats.mean_longest_cycle_edge_length
            );
        }
        Command::DetectTrain {
            zoo,
            hidden,
            epochs,
            lr,
            l2,
            out,
        } => {
            let cfg = DetectorConfig {
                hidden_size: hidden,
                epochs,
                learning_rate: lr,
                l2,
                seed: zoo.seed,
                ..DetectorConfig::default()
            };
            let feats = zoo_features(&zoo)?;
            let model = train_detector(&feats, &cfg)?;
            if let Some(loss) = model.loss_log().last() {
                eprintln!("trained on {} models; final loss {loss:.6}", feats.len());
            }
            if !model.dropped_features().is_empty() {
                eprintln!("dropped constant features {:?}", model.dropped_features());
            }
            let mut w = create(&out)?;
            write_detector(&model, &mut w)?;
            w.flush()?;
        }
        Command::DetectEval { detector, zoo } => {
            let model = read_detector(open(&detector)?)?;
            let feats = zoo_features(&zoo)?;
            let x: Vec<Vec<f64>> = feats.iter().map(|f| f.values.to_vec()).collect();
            let labels: Vec<u8> = feats.iter().map(|f| f.label.unwrap_or(0)).collect();
            let r = evaluate(&model, &x, &labels)?;
            println!("acc,auc,n_test,threshold");
            println!("{},{},{},{}", r.acc, r.auc, r.n_test, r.threshold);
        }
        Command::Theorem1 {
            samples,
            sigma,
            eta,
            dim,
            seed,
        } => {
            let report = theorem1(&TheoremConfig {
                sigma,
                eta,
                input_dim: dim,
                samples,
                seed,
            })?;
            println!("metric,value");
            for d in &report.distances {
                println!("bottleneck_analytic_{},{}", d.kernel, d.analytic);
                println!("bottleneck_sampled_{},{}", d.kernel, d.sampled);
            }
            println!("risk_f1_d1,{}", report.risk_f1_d1);
            println!("risk_f2_d3,{}", report.risk_f2_d3);
            println!("risk_f2_d2,{}", report.risk_f2_d2);
            let verdict = if report.meets_claimed_bound() { "met" } else { "not met" };
            eprintln!("claimed analytic bound {CLAIMED_THEOREM_BOUND}: {verdict}");
        }
        Command::Convergence {
            grid,
            seeds,
            kernel,
            sigma,
            eta,
            dim,
            epsilon,
            delta,
            seed,
            jobs,
        } => {
            let cfg = TheoremConfig {
                sigma,
                eta,
                input_dim: dim,
                samples: 0,
                seed,
            };
            let pool = rayon_pool(jobs)?;
            let report = pool.install(|| convergence(&cfg, &grid, seeds, kernel))?;
            let mut w = sink(None)?;
            let cols: Vec<String> = (1..=seeds).map(|s| format!("d{s}")).collect();
            writeln!(w, "n,median,{}", cols.join(","))?;
            for row in &report.rows {
                let ds: Vec<String> = row.distances.iter().map(f64::to_string).collect();
                writeln!(w, "{},{},{}", row.n, row.median, ds.join(","))?;
            }
            w.flush()?;
            eprintln!("log-log slope {:.4}", report.slope);
            // f2 has 8 hidden neurons, unit activation bound and smallest second moment 1/4
            let budget = required_samples(1.0, 0.25, epsilon, delta, 1, 8);
            eprintln!("sample budget for eps={epsilon}, delta={delta}: {}", budget.ceil());
            if !report.last_not_above_first() {
                return Err(Failure::numeric("final median exceeds the first"));
            }
            if report.rows.len() >= 4 && !report.slope_in_range() {
                return Err(Failure::numeric(format!("slope {:.4} outside the expected range", report.slope)));
            }
        }
    }
    Ok(())
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::data(format!("thread pool: {e}")))
}

fn gen_zoo(cfg: &PopulationConfig, dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir)?;
    let pop = build_population(cfg)?;
    let mut manifest = create(&dir.join("zoo.csv"))?;
    writeln!(manifest, "net_path,label")?;
    for (i, (net, label)) in pop.models.iter().enumerate() {
        let name = format!("net_{i:03}.txt");
        let mut w = create(&dir.join(&name))?;
        write_network(net, &mut w)?;
        w.flush()?;
        writeln!(manifest, "{name},{label}")?;
    }
    manifest.flush()?;
    let clean: Vec<(Vec<f64>, usize)> = pop.clean_samples.into_iter().map(|x| (x, 0)).collect();
    write_dataset(&clean, create(&dir.join("clean.csv"))?)?;
    eprintln!("{} models written to {}", pop.models.len(), dir.display());
    Ok(())
}

fn bench(files: &[PathBuf]) -> Outcome {
    let mut w = sink(None)?;
    writeln!(w, "cutoff,num_simplices,cobd_red_s,bd_red_s,nonzero")?;
    for path in files {
        let row = bench_matrix(&dissimilarity(&load_corr(path)?))?;
        writeln!(
            w,
            "{},{},{},{},{}",
            row.cutoff,
            row.num_simplices,
            row.coboundary_time.as_secs_f64(),
            row.boundary_time.as_secs_f64(),
            row.pruned_nonzeros
        )?;
        if !row.within_factor_two() {
            eprintln!("warning: {}: pruned boundary reduction exceeded twice the coboundary time", path.display());
        }
    }
    w.flush()?;
    Ok(())
}
