use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use chrono::Utc;
use serde::Deserialize;
use serde_json::json;
use synthweaver::evalkit::{
    benchmark, r_squared, roc_auc, sample_molecules, svg_lines, svg_scatter, write_cv_csv, write_roc_csv,
    write_scatter_csv, write_timing_csv, LineStyle, ScatterPoint,
};
use synthweaver::molgraph::{parse_smiles, Molecule};
use synthweaver::optimizer::{
    random_walk_baseline, relabel_top, run_search, screen_library, write_best_curve, write_topk, write_trajectories,
    SearchReport,
};
use synthweaver::oracle::{LabelCache, Oracle};
use synthweaver::scoring::{PropertyModel, Scorer, SynthBackend};
use synthweaver::spaces::SearchSpace;
use synthweaver::surrogate::{read_dataset, train, write_dataset, SurrogateModel, Task};

use crate::config::{Backend, FileConfig, PolicyKind};
use crate::manifest::{Outputs, RunManifest};
use crate::{
    BenchmarkArgs, Cli, Command, GenDatasetArgs, LabelArgs, ReportArgs, ScorerArgs, ScreenArgs, SearchArgs, TrainArgs,
};

/// Environment variable naming the planner label cache.
pub const CACHE_ENV: &str = "SYNTHWEAVER_CACHE";
const DEFAULT_CACHE: &str = ".synthweaver/labels.csv";

struct Ctx {
    file: FileConfig,
    seed: u64,
    workers: usize,
    started: chrono::DateTime<Utc>,
}

impl Ctx {
    fn manifest(&self, subcommand: &str, config: serde_json::Value) -> RunManifest {
        RunManifest::new(subcommand, config, self.seed, self.workers, self.started)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let started = Utc::now();
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let workers = cli.workers.or(file.workers).unwrap_or(0);
    if workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().context("starting worker pool")?;
    }
    let ctx = Ctx { file, seed, workers: rayon::current_num_threads(), started };
    match cli.command {
        Command::GenDataset(a) => gen_dataset(&ctx, a),
        Command::Label(a) => label(&ctx, a),
        Command::Train(a) => train_cmd(&ctx, a),
        Command::Search(a) => search(&ctx, a),
        Command::Screen(a) => screen(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Benchmark(a) => bench(&ctx, a),
    }
}

fn cache_path() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
}

fn open_cache() -> anyhow::Result<LabelCache> {
    let path = cache_path();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
    }
    Ok(LabelCache::open(&path)?)
}

fn sidecar_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn space(id: &str) -> anyhow::Result<SearchSpace> {
    SearchSpace::from_id(id).with_context(|| format!("unknown search space {id:?}"))
}

fn gen_dataset(ctx: &Ctx, a: GenDatasetArgs) -> anyhow::Result<()> {
    let space_id = a.space.unwrap_or_else(|| ctx.file.dataset.space.clone());
    let n = a.n.unwrap_or(ctx.file.dataset.n);
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let sp = space(&space_id)?;
    ensure_parent(&a.out)?;
    let mut outputs = Outputs::default();
    let mols = sample_molecules(&sp, n, ctx.seed);
    let rows = Oracle::builtin().label_batch(&mols, &mut open_cache()?)?;
    let rows: Vec<(String, f64)> = rows.into_iter().map(|(s, c)| (s, c.value())).collect();
    write_dataset(outputs.register(a.out.clone()), &rows)?;
    let manifest = ctx.manifest("gen-dataset", json!({ "space": space_id, "n": n }));
    manifest.write(&sidecar_manifest(&a.out), outputs.paths())?;
    outputs.commit();
    Ok(())
}

/// First whitespace-separated token of every non-blank, non-comment line.
fn read_smiles_file(path: &Path) -> anyhow::Result<Vec<(usize, String)>> {
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(tok) = line.split_whitespace().next().filter(|t| !t.starts_with('#')) {
            out.push((i + 1, tok.to_string()));
        }
    }
    Ok(out)
}

fn label(ctx: &Ctx, a: LabelArgs) -> anyhow::Result<()> {
    let mut mols = Vec::new();
    for (line, s) in read_smiles_file(&a.input)? {
        mols.push(parse_smiles(&s).with_context(|| format!("{} line {line}: {s}", a.input.display()))?);
    }
    ensure_parent(&a.out)?;
    let mut outputs = Outputs::default();
    let rows = Oracle::builtin().label_batch(&mols, &mut open_cache()?)?;
    let rows: Vec<(String, f64)> = rows.into_iter().map(|(s, c)| (s, c.value())).collect();
    write_dataset(outputs.register(a.out.clone()), &rows)?;
    let mut manifest = ctx.manifest("label", json!({ "input": a.input }));
    manifest.add_input(&a.input)?;
    manifest.write(&sidecar_manifest(&a.out), outputs.paths())?;
    outputs.commit();
    Ok(())
}

fn load_dataset(path: &Path) -> anyhow::Result<Vec<(Molecule, f64)>> {
    read_dataset(path)?
        .into_iter()
        .enumerate()
        .map(|(i, (s, v))| {
            let m = parse_smiles(&s).with_context(|| format!("{} line {}: {s}", path.display(), i + 2))?;
            Ok((m, v))
        })
        .collect()
}

fn train_cmd(ctx: &Ctx, a: TrainArgs) -> anyhow::Result<()> {
    let mut cfg = ctx.file.train.clone();
    cfg.seed = ctx.seed;
    cfg.k = a.k.unwrap_or(cfg.k);
    cfg.epochs = a.epochs.unwrap_or(cfg.epochs);
    cfg.hidden = a.hidden.unwrap_or(cfg.hidden);
    cfg.depth = a.depth.unwrap_or(cfg.depth);
    cfg.learning_rate = a.learning_rate.unwrap_or(cfg.learning_rate);
    cfg.batch_size = a.batch_size.unwrap_or(cfg.batch_size);
    cfg.dropout = a.dropout.unwrap_or(cfg.dropout);
    cfg.validate()?;
    let data = load_dataset(&a.dataset)?;
    fs::create_dir_all(&a.out)?;
    let mut outputs = Outputs::default();
    let (model, cv) = train(&cfg, a.task, &data)?;
    for w in &cv.warnings {
        eprintln!("warning: {w}");
    }
    model.save(outputs.register(a.out.join("model.json")))?;
    write_cv_csv(&[&cv], outputs.register(a.out.join("fidelity.csv")))?;
    let oracle: Vec<f64> = data.iter().map(|(_, s)| *s).collect();
    match a.task {
        Task::Regression => {
            let points: Vec<ScatterPoint> = data
                .iter()
                .zip(&cv.predictions)
                .map(|((m, s), &p)| ScatterPoint {
                    smiles: m.canonical_smiles().to_string(),
                    oracle: *s,
                    predicted: p,
                    route_probability: f64::NAN,
                })
                .collect();
            write_scatter_csv(&points, outputs.register(a.out.join("scatter.csv")))?;
            let title = match r_squared(&oracle, &cv.predictions) {
                Ok(r2) => format!("Out-of-fold predictions (pooled R2 = {r2:.3})"),
                Err(_) => "Out-of-fold predictions".to_string(),
            };
            let xy: Vec<(f64, f64)> = oracle.iter().copied().zip(cv.predictions.iter().copied()).collect();
            fs::write(
                outputs.register(a.out.join("scatter.svg")),
                svg_scatter(&xy, &title, "planner cost", "surrogate prediction", true),
            )?;
        }
        Task::Classification => {
            let labels: Vec<bool> = oracle.iter().map(|&s| Task::Classification.target(s) == 1.0).collect();
            if let Ok(roc) = roc_auc(&cv.predictions, &labels) {
                write_roc_csv(&roc, outputs.register(a.out.join("roc.csv")))?;
                fs::write(
                    outputs.register(a.out.join("roc.svg")),
                    svg_lines(
                        &[("out-of-fold", roc.points.clone()), ("chance", vec![(0.0, 0.0), (1.0, 1.0)])],
                        &format!("Route existence ROC (AUC = {:.3})", roc.auc),
                        "false positive rate",
                        "true positive rate",
                        LineStyle::Line,
                    ),
                )?;
            }
        }
    }
    let mut manifest = ctx.manifest("train", json!({ "task": a.task, "train": cfg }));
    manifest.add_input(&a.dataset)?;
    manifest.write(&a.out.join("manifest.json"), outputs.paths())?;
    outputs.commit();
    Ok(())
}

fn build_scorer(ctx: &Ctx, s: &ScorerArgs, manifest: &mut RunManifest) -> anyhow::Result<(Scorer, Backend)> {
    let backend = s.synth_backend.unwrap_or(ctx.file.score.synth_backend);
    let synth = match backend {
        Backend::Sa => SynthBackend::Sa,
        Backend::Retrognn => {
            let Some(path) = &s.checkpoint else { bail!("synth_backend = retrognn needs --checkpoint") };
            let model = SurrogateModel::load(path, Some(Task::Regression))?;
            manifest.add_input(path)?;
            SynthBackend::surrogate(Arc::new(model))?
        }
    };
    let scorer = Scorer::new(ctx.file.score.caps, PropertyModel::seeded(ctx.file.score.property_seed), synth)?;
    Ok((scorer, backend))
}

fn write_curve_svg(report: &SearchReport, path: PathBuf, title: &str) -> anyhow::Result<()> {
    let pts: Vec<(f64, f64)> = report.best_curve.iter().map(|&(n, b)| (n as f64, b)).collect();
    fs::write(path, svg_lines(&[(title, pts)], title, "molecules visited", "best combined score", LineStyle::Step))?;
    Ok(())
}

fn search(ctx: &Ctx, a: SearchArgs) -> anyhow::Result<()> {
    let mut cfg = ctx.file.search.clone();
    cfg.seed = ctx.seed;
    cfg.space = a.space.unwrap_or(cfg.space);
    cfg.temperature = a.temperature.unwrap_or(cfg.temperature);
    cfg.steps = a.steps.unwrap_or(cfg.steps);
    cfg.n_init = a.n_init.unwrap_or(cfg.n_init);
    cfg.n_trajectories = a.trajectories.unwrap_or(cfg.n_trajectories);
    cfg.max_actions = a.max_actions.unwrap_or(cfg.max_actions);
    cfg.top_k = a.scorer.top_k.unwrap_or(cfg.top_k);
    cfg.validate()?;
    let sp = space(&cfg.space)?;
    let mut manifest = ctx.manifest("search", serde_json::Value::Null);
    let (scorer, backend) = build_scorer(ctx, &a.scorer, &mut manifest)?;
    manifest.config = json!({
        "policy": a.policy,
        "search": cfg,
        "synth_backend": backend,
        "property_seed": ctx.file.score.property_seed,
        "caps": ctx.file.score.caps,
        "relabel": a.scorer.relabel,
    });
    fs::create_dir_all(&a.out)?;
    let mut outputs = Outputs::default();
    let mut report = match a.policy {
        PolicyKind::Softmax => run_search(&sp, &scorer, &cfg)?,
        PolicyKind::Random => random_walk_baseline(&sp, &scorer, &cfg)?,
    };
    for e in &report.errors {
        eprintln!("warning: {e}");
    }
    if a.scorer.relabel {
        relabel_top(&mut report, &Oracle::builtin(), &mut open_cache()?)?;
    }
    write_trajectories(&report, outputs.register(a.out.join("trajectories.csv")))?;
    write_topk(&report, outputs.register(a.out.join("topk.csv")))?;
    write_best_curve(&report, outputs.register(a.out.join("best_curve.csv")))?;
    write_curve_svg(&report, outputs.register(a.out.join("best_curve.svg")), &run_label(&manifest.config, "search"))?;
    manifest.write(&a.out.join("manifest.json"), outputs.paths())?;
    outputs.commit();
    Ok(())
}

fn screen(ctx: &Ctx, a: ScreenArgs) -> anyhow::Result<()> {
    let top_k = a.scorer.top_k.unwrap_or(ctx.file.search.top_k);
    let mut manifest = ctx.manifest("screen", serde_json::Value::Null);
    let (scorer, backend) = build_scorer(ctx, &a.scorer, &mut manifest)?;
    manifest.add_input(&a.library)?;
    manifest.config = json!({
        "library": a.library,
        "top_k": top_k,
        "synth_backend": backend,
        "property_seed": ctx.file.score.property_seed,
        "caps": ctx.file.score.caps,
        "relabel": a.scorer.relabel,
    });
    fs::create_dir_all(&a.out)?;
    let mut outputs = Outputs::default();
    let mut report = screen_library(&a.library, &scorer, top_k)?;
    if report.parse_errors > 0 {
        eprintln!("warning: {} library lines could not be parsed or scored", report.parse_errors);
    }
    if a.scorer.relabel {
        relabel_top(&mut report, &Oracle::builtin(), &mut open_cache()?)?;
    }
    write_topk(&report, outputs.register(a.out.join("topk.csv")))?;
    write_best_curve(&report, outputs.register(a.out.join("best_curve.csv")))?;
    write_curve_svg(&report, outputs.register(a.out.join("best_curve.svg")), &run_label(&manifest.config, "screen"))?;
    manifest.write(&a.out.join("manifest.json"), outputs.paths())?;
    outputs.commit();
    Ok(())
}

/// Short run name such as `softmax/retrognn` or `screen/sa`.
fn run_label(config: &serde_json::Value, subcommand: &str) -> String {
    let backend = config["synth_backend"].as_str().unwrap_or("?");
    match subcommand {
        "search" => format!("{}/{backend}", config["policy"].as_str().unwrap_or("softmax")),
        other => format!("{other}/{backend}"),
    }
}

#[derive(Debug, Deserialize)]
struct TopRecord {
    rank: usize,
    smiles: String,
    combined: f64,
    antibiotic: f64,
    p: f64,
    qed_raw: f64,
    synth_raw: f64,
    sa_raw: f64,
    oracle_cost: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct CurveRecord {
    visited_count: usize,
    best_combined: f64,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rdr.deserialize().collect::<Result<Vec<T>, _>>().with_context(|| format!("reading {}", path.display()))
}

fn report(ctx: &Ctx, a: ReportArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&a.out)?;
    let mut outputs = Outputs::default();
    let mut manifest = ctx.manifest("report", json!({ "runs": a.runs }));
    let mut table = csv::Writer::from_path(outputs.register(a.out.join("comparison.csv")))?;
    table.write_record([
        "run",
        "row",
        "rank",
        "smiles",
        "combined",
        "antibiotic",
        "p",
        "qed_raw",
        "synth_raw",
        "sa_raw",
        "oracle_cost",
        "oracle_unsolved_fraction",
    ])?;
    let mut curves = Vec::new();
    let mut used = std::collections::HashSet::new();
    for dir in &a.runs {
        let mpath = dir.join("manifest.json");
        let m: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(&mpath).with_context(|| format!("reading {}", mpath.display()))?,
        )?;
        manifest.add_input(&mpath)?;
        let mut name = run_label(&m["config"], m["subcommand"].as_str().unwrap_or("?"));
        if !used.insert(name.clone()) {
            name = format!("{name} ({})", dir.display());
        }
        let top: Vec<TopRecord> = read_csv(&dir.join("topk.csv"))?;
        let labeled: Vec<f64> = top.iter().filter_map(|r| r.oracle_cost).collect();
        let unsolved = (!labeled.is_empty())
            .then(|| labeled.iter().filter(|&&c| c >= synthweaver::oracle::UNSOLVED).count() as f64 / labeled.len() as f64);
        let picks = [("top-1", top.first()), ("top-last", top.last().filter(|_| top.len() > 1))];
        for (row, r) in picks {
            let Some(r) = r else { continue };
            table.write_record([
                name.clone(),
                row.to_string(),
                r.rank.to_string(),
                r.smiles.clone(),
                r.combined.to_string(),
                r.antibiotic.to_string(),
                r.p.to_string(),
                r.qed_raw.to_string(),
                r.synth_raw.to_string(),
                r.sa_raw.to_string(),
                r.oracle_cost.map(|c| c.to_string()).unwrap_or_default(),
                unsolved.map(|u| u.to_string()).unwrap_or_default(),
            ])?;
        }
        let curve: Vec<CurveRecord> = read_csv(&dir.join("best_curve.csv"))?;
        curves.push((name, curve.iter().map(|c| (c.visited_count as f64, c.best_combined)).collect::<Vec<_>>()));
    }
    table.flush()?;
    drop(table);
    let series: Vec<(&str, Vec<(f64, f64)>)> = curves.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
    fs::write(
        outputs.register(a.out.join("best_curves.svg")),
        svg_lines(&series, "Best combined score so far", "molecules visited", "best combined score", LineStyle::Step),
    )?;
    manifest.write(&a.out.join("manifest.json"), outputs.paths())?;
    outputs.commit();
    Ok(())
}

fn bench(ctx: &Ctx, a: BenchmarkArgs) -> anyhow::Result<()> {
    let space_id = a.space.unwrap_or_else(|| ctx.file.dataset.space.clone());
    let sp = space(&space_id)?;
    let model = SurrogateModel::load(&a.checkpoint, Some(Task::Regression))?;
    let mols = large_molecules(&sp, a.n, a.min_atoms, ctx.seed)?;
    let oracle = Oracle::builtin();
    let planner = benchmark(|m| { std::hint::black_box(oracle.score(m)); }, &mols)?;
    let surrogate = benchmark(|m| { let _ = std::hint::black_box(model.predict(m)); }, &mols)?.against(&planner);
    fs::create_dir_all(&a.out)?;
    let mut outputs = Outputs::default();
    write_timing_csv(&[("planner", planner), ("surrogate", surrogate)], outputs.register(a.out.join("timing.csv")))?;
    let mut manifest = ctx.manifest("benchmark", json!({ "space": space_id, "n": a.n, "min_atoms": a.min_atoms }));
    manifest.add_input(&a.checkpoint)?;
    manifest.write(&a.out.join("manifest.json"), outputs.paths())?;
    outputs.commit();
    println!(
        "planner mean {:.3e} s, surrogate mean {:.3e} s, speedup {:.0}x",
        planner.mean,
        surrogate.mean,
        surrogate.speedup.unwrap_or(f64::NAN)
    );
    Ok(())
}

/// `n` sampled molecules with at least `min_atoms` heavy atoms.
pub fn large_molecules(sp: &SearchSpace, n: usize, min_atoms: usize, seed: u64) -> anyhow::Result<Vec<Molecule>> {
    let mut out = Vec::with_capacity(n);
    for round in 0..50u64 {
        let batch = sample_molecules(sp, 4 * n.max(8), seed.wrapping_add(round));
        out.extend(batch.into_iter().filter(|m| m.heavy_atoms() >= min_atoms));
        if out.len() >= n {
            out.truncate(n);
            return Ok(out);
        }
    }
    bail!("could not sample {n} molecules with at least {min_atoms} heavy atoms")
}
