use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use subkernel::datasets::food_features;
use subkernel::io;
use subkernel::kernels::feature_maps;
use subkernel::{
    build_graph, dummy_predictions, evaluate, f1_score, generate_dataset, gram_baseline, gram_submodular_timed,
    mean_feature_map, split, BaselineKind, CensorKind, Error, ExtensionMode, GramMatrix, InformationGraph, KernelKind,
    Label, OrderedPartition,
};

use crate::args::{
    BenchArgs, ClassifyArgs, Cli, Command, ExtensionOpts, FeatmapArgs, FormatArg, GramArgs, GraphCmdArgs, GraphOpts,
    KernelArg, ModeArg, SynthArgs,
};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(e) if e.is_input_error() => 3,
            Failure::Data(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Graph(a) => graph(&a),
        Command::Featmap(a) => featmap(&a),
        Command::Gram(a) => gram(&a),
        Command::Classify(a) => classify(&a),
        Command::Bench(a) => bench(&a),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn prepare_out(dir: &Path) -> Outcome<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    Ok(dir.to_path_buf())
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes `config.json`: the full argument set plus values resolved at run time.
fn write_config(dir: &Path, command: &str, args: &impl Serialize, resolved: Value) -> Outcome {
    let config = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "resolved": resolved,
    });
    let text = serde_json::to_string_pretty(&config).expect("config serializes");
    write_text(&dir.join("config.json"), &(text + "\n"))
}

fn threads(t: Option<u64>) -> Option<usize> {
    t.map(|t| t as usize)
}

fn censor_kind(s: &str) -> CensorKind {
    s.parse().expect("validated by the argument parser")
}

fn dataset_size(m: u64) -> usize {
    if m % 2 == 1 {
        eprintln!("warning: m = {m} is odd; using {} rankings ({} per class)", m - 1, m / 2);
    }
    m as usize
}

fn extension_mode(opts: &ExtensionOpts, seed: u64) -> ExtensionMode {
    match opts.mode {
        ModeArg::Exact => ExtensionMode::Exact { budget: opts.budget },
        ModeArg::Sampled => ExtensionMode::Sampled { samples: opts.samples as usize, seed },
    }
}

fn load_feature_rows(opts: &GraphOpts, food_default: bool) -> Outcome<Vec<Vec<f64>>> {
    match (&opts.features, food_default) {
        (Some(path), _) => Ok(io::load_features(path)?),
        (None, true) => Ok(food_features()),
        (None, false) => Err(Failure::Usage("--features is required".into())),
    }
}

fn information_graph(opts: &GraphOpts, n: Option<usize>, food_default: bool) -> Outcome<InformationGraph> {
    let features = load_feature_rows(opts, food_default)?;
    if let Some(n) = n {
        if features.len() != n {
            return Err(Error::UniverseMismatch { expected: n, found: features.len() }.into());
        }
    }
    Ok(build_graph(&features, opts.lengthscale, opts.keep_fraction)?)
}

fn graph_summary(g: &InformationGraph) -> Value {
    json!({ "lengthscale": g.lengthscale(), "edges": g.edges().len() })
}

fn baseline(kernel: KernelArg, lambda: f64) -> Option<BaselineKind> {
    match kernel {
        KernelArg::Submodular => None,
        KernelArg::Kendall => Some(BaselineKind::Kendall),
        KernelArg::Mallows => Some(BaselineKind::Mallows { lambda }),
    }
}

fn kernel_name(kernel: KernelArg) -> &'static str {
    match kernel {
        KernelArg::Submodular => "submodular",
        KernelArg::Kendall => "kendall",
        KernelArg::Mallows => "mallows",
    }
}

/// Gram matrix plus phase timings; baselines report a single phase.
struct TimedGram {
    gram: GramMatrix,
    phases: Vec<(&'static str, Duration)>,
}

fn compute_gram(
    kernel: KernelArg,
    lambda: f64,
    graph: Option<&InformationGraph>,
    rankings: &[OrderedPartition],
    mode: ExtensionMode,
    threads: Option<usize>,
) -> Outcome<TimedGram> {
    let start = Instant::now();
    match baseline(kernel, lambda) {
        None => {
            let g = graph.expect("submodular kernel needs a graph");
            let (gram, t) = gram_submodular_timed(g, rankings, mode, threads)?;
            let total = start.elapsed();
            Ok(TimedGram {
                gram,
                phases: vec![("feature_maps", t.feature_maps), ("products", t.products), ("total", total)],
            })
        }
        Some(kind) => {
            let gram = gram_baseline(kind, rankings, mode, threads)?;
            Ok(TimedGram { gram, phases: vec![("total", start.elapsed())] })
        }
    }
}

fn synth(a: &SynthArgs) -> Outcome {
    let kind = censor_kind(&a.kind);
    let data = generate_dataset(dataset_size(a.m), a.sigma, kind, a.seed)?;
    let out = prepare_out(&a.out)?;
    let features = food_features();
    io::save_rankings(&out.join("rankings.txt"), features.len(), &data.rankings)?;
    io::save_labels(&out.join("labels.csv"), &data.labels)?;
    io::save_features(&out.join("features.csv"), &features)?;
    write_config(&out, "synth", a, json!({ "rankings": data.len() }))?;
    eprintln!("synth: {} rankings written to {}", data.len(), out.display());
    Ok(())
}

fn graph(a: &GraphCmdArgs) -> Outcome {
    let g = information_graph(&a.graph, None, false)?;
    let out = prepare_out(&a.out)?;
    io::save_edge_list(&out.join("graph.txt"), &g)?;
    write_config(&out, "graph", a, graph_summary(&g))
}

fn featmap(a: &FeatmapArgs) -> Outcome {
    let (n, rankings) = io::load_rankings(&a.rankings)?;
    let g = information_graph(&a.graph, Some(n), false)?;
    let mode = extension_mode(&a.extension, a.seed);
    let out = prepare_out(&a.out)?;
    match a.index {
        Some(i) => {
            let r = rankings.get(i).ok_or_else(|| {
                Failure::Data(Error::InvalidArgument(format!("index {i} out of range for {} rankings", rankings.len())))
            })?;
            // same per-ranking stream as the batch export
            let row_mode = match mode {
                ExtensionMode::Sampled { samples, seed } => {
                    ExtensionMode::Sampled { samples, seed: subkernel::rng::derive_seed(seed, &[i as u64]) }
                }
                exact => exact,
            };
            let phi = mean_feature_map(&g, r, row_mode)?;
            write_text(&out.join(format!("feature_map_{i}.csv")), &io::format_feature_map(&phi))?;
        }
        None => {
            let maps = feature_maps(&g, &rankings, mode)?;
            write_text(&out.join("feature_maps.csv"), &io::format_feature_matrix(&maps))?;
        }
    }
    write_config(&out, "featmap", a, graph_summary(&g))
}

fn write_gram(dir: &Path, gram: &GramMatrix, format: FormatArg) -> Outcome<PathBuf> {
    let path = match format {
        FormatArg::Csv => dir.join("gram.csv"),
        FormatArg::Bin => dir.join("gram.bin"),
    };
    match format {
        FormatArg::Csv => io::save_gram_csv(&path, gram)?,
        FormatArg::Bin => io::save_gram_binary(&path, gram)?,
    }
    Ok(path)
}

fn gram(a: &GramArgs) -> Outcome {
    let (n, rankings) = io::load_rankings(&a.rankings)?;
    let graph = match a.kernel {
        KernelArg::Submodular => Some(information_graph(&a.graph, Some(n), false)?),
        _ => None,
    };
    let mode = extension_mode(&a.extension, a.seed);
    let timed = compute_gram(a.kernel, a.lambda, graph.as_ref(), &rankings, mode, threads(a.threads))?;
    let out = prepare_out(&a.out)?;
    let path = write_gram(&out, &timed.gram, a.format)?;
    let mut timing = String::from("phase,seconds\n");
    for (phase, d) in &timed.phases {
        eprintln!("gram: {phase} {:.6} s", d.as_secs_f64());
        timing.push_str(&format!("{phase},{}\n", d.as_secs_f64()));
    }
    write_text(&out.join("timing.csv"), &timing)?;
    let resolved = json!({
        "rankings": rankings.len(),
        "objects": n,
        "kernel": timed.gram.kind().to_string(),
        "graph": graph.as_ref().map(graph_summary),
    });
    write_config(&out, "gram", a, resolved)?;
    eprintln!("gram: {} x {} matrix written to {}", rankings.len(), rankings.len(), path.display());
    Ok(())
}

struct MetricRow {
    seed: u64,
    kernel: &'static str,
    ranking_kind: String,
    noise: String,
    f1: f64,
}

fn dummy_f1(labels: &[Label], test_fraction: f64, seed: u64) -> Outcome<f64> {
    let (_, test) = split(labels, test_fraction, seed)?;
    let actual: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
    Ok(f1_score(&dummy_predictions(test.len(), seed), &actual, 1))
}

/// Scores every requested kernel on one labelled dataset for one seed.
#[allow(clippy::too_many_arguments)]
fn score_dataset(
    a: &ClassifyArgs,
    graph: Option<&InformationGraph>,
    rankings: &[OrderedPartition],
    labels: &[Label],
    seed: u64,
    ranking_kind: &str,
    noise: &str,
    rows: &mut Vec<MetricRow>,
) -> Outcome {
    let mode = extension_mode(&a.extension, seed);
    for &kernel in &a.kernels {
        let timed = compute_gram(kernel, a.lambda, graph, rankings, mode, threads(a.threads))?;
        let eval = evaluate(&timed.gram, labels, a.test_fraction, seed, a.reg)?;
        rows.push(MetricRow {
            seed,
            kernel: kernel_name(kernel),
            ranking_kind: ranking_kind.to_string(),
            noise: noise.to_string(),
            f1: eval.f1,
        });
    }
    if a.dummy {
        rows.push(MetricRow {
            seed,
            kernel: "dummy",
            ranking_kind: ranking_kind.to_string(),
            noise: noise.to_string(),
            f1: dummy_f1(labels, a.test_fraction, seed)?,
        });
    }
    Ok(())
}

fn classify(a: &ClassifyArgs) -> Outcome {
    if a.seeds.is_empty() {
        return Err(Failure::Usage("--seeds must not be empty".into()));
    }
    let needs_graph = a.kernels.contains(&KernelArg::Submodular);
    let mut rows = Vec::new();
    let mut resolved = json!({});
    if let Some(gram_path) = &a.gram {
        let labels = io::load_labels(a.labels.as_ref().expect("required by the parser"))?;
        let gram = if gram_path.extension().is_some_and(|e| e == "bin") {
            io::load_gram_binary(gram_path, KernelKind::Submodular)?
        } else {
            io::load_gram_csv(gram_path, KernelKind::Submodular)?
        };
        for &seed in &a.seeds {
            let eval = evaluate(&gram, &labels, a.test_fraction, seed, a.reg)?;
            rows.push(MetricRow {
                seed,
                kernel: "precomputed",
                ranking_kind: "NA".into(),
                noise: "NA".into(),
                f1: eval.f1,
            });
            if a.dummy {
                let f1 = dummy_f1(&labels, a.test_fraction, seed)?;
                rows.push(MetricRow { seed, kernel: "dummy", ranking_kind: "NA".into(), noise: "NA".into(), f1 });
            }
        }
    } else if let Some(path) = &a.rankings {
        let (n, rankings) = io::load_rankings(path)?;
        let labels = io::load_labels(a.labels.as_ref().expect("required by the parser"))?;
        if labels.len() != rankings.len() {
            return Err(Error::DimensionMismatch { left: rankings.len(), right: labels.len() }.into());
        }
        let graph = if needs_graph { Some(information_graph(&a.graph, Some(n), n == 8)?) } else { None };
        resolved = json!({ "graph": graph.as_ref().map(graph_summary) });
        let kind = if rankings.iter().all(OrderedPartition::is_full) { "full" } else { "partial" };
        for &seed in &a.seeds {
            score_dataset(a, graph.as_ref(), &rankings, &labels, seed, kind, "NA", &mut rows)?;
        }
    } else {
        let kind = censor_kind(&a.kind);
        let m = dataset_size(a.m);
        let graph = if needs_graph { Some(information_graph(&a.graph, Some(8), true)?) } else { None };
        resolved = json!({ "graph": graph.as_ref().map(graph_summary) });
        for &sigma in &a.sigmas {
            for &seed in &a.seeds {
                let data = generate_dataset(m, sigma, kind, seed)?;
                score_dataset(
                    a,
                    graph.as_ref(),
                    &data.rankings,
                    &data.labels,
                    seed,
                    &a.kind,
                    &sigma.to_string(),
                    &mut rows,
                )?;
            }
        }
    }
    let out = prepare_out(&a.out)?;
    let mut csv = String::from("seed,kernel,ranking_kind,noise,f1\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},{}\n", r.seed, r.kernel, r.ranking_kind, r.noise, r.f1));
    }
    write_text(&out.join("metrics.csv"), &csv)?;
    write_config(&out, "classify", a, resolved)?;
    eprintln!("classify: {} rows written to {}", rows.len(), out.display());
    Ok(())
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn bench(a: &BenchArgs) -> Outcome {
    if a.grid.iter().any(|&m| m < 2) {
        return Err(Failure::Usage("--grid sizes must be at least 2".into()));
    }
    let kind = censor_kind(&a.kind);
    let needs_graph = a.kernels.contains(&KernelArg::Submodular);
    let graph = if needs_graph { Some(information_graph(&a.graph, Some(8), true)?) } else { None };
    let mode = extension_mode(&a.extension, a.seed);
    let timeout = a.timeout.map(Duration::from_secs_f64);
    let mut csv = String::from("m,kernel,phase,seconds\n");
    for &kernel in &a.kernels {
        let mut timed_out = false;
        for &m in &a.grid {
            let name = kernel_name(kernel);
            if timed_out {
                csv.push_str(&format!("{m},{name},total,NA\n"));
                continue;
            }
            let data = generate_dataset(dataset_size(m), a.sigma, kind, a.seed)?;
            let run = || compute_gram(kernel, a.lambda, graph.as_ref(), &data.rankings, mode, threads(a.threads));
            let warm = run()?;
            let warm_total = warm.phases.last().expect("total phase").1;
            if timeout.is_some_and(|t| warm_total > t) {
                eprintln!("bench: {name} m = {m} exceeded the timeout");
                timed_out = true;
                csv.push_str(&format!("{m},{name},total,NA\n"));
                continue;
            }
            let runs: Vec<TimedGram> = (0..a.repeats).map(|_| run()).collect::<Outcome<_>>()?;
            for (p, &(phase, _)) in warm.phases.iter().enumerate() {
                let t = median(runs.iter().map(|r| r.phases[p].1).collect());
                eprintln!("bench: {name} m = {m} {phase} {:.6} s", t.as_secs_f64());
                csv.push_str(&format!("{m},{name},{phase},{}\n", t.as_secs_f64()));
            }
        }
    }
    let out = prepare_out(&a.out)?;
    write_text(&out.join("timing.csv"), &csv)?;
    write_config(&out, "bench", a, json!({ "graph": graph.as_ref().map(graph_summary) }))
}
