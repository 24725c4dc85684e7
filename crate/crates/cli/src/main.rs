use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chigad::config::RunConfig;
use chigad::hin::{load_csv_dir, load_hetero_graph, save_hetero_graph, HeteroGraph};
use chigad::model::{analyze_type, checkpoint, ChiGadModel, TypeAnalysis};
use chigad::spectral::{fit_polynomial, ChiSquare};
use chigad::train::{
    benchmark_spec, generate_synthetic_hin, metrics, pr_curve, predict, roc_curve, train, MetricsRecord,
    SyntheticSpec, TrainConfig, TrainData,
};
use chigad::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "chigad", version, about = "Chi-Square filters and heterogeneous graph anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file or CSV directory; overrides `graph` in the config.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Chi-Square filter report for the candidate indices.
    Filters {
        #[command(flatten)]
        common: Common,
    },
    /// Meta-paths per node type with S_high, divisions and representatives.
    Metapaths {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Spectral profiles of the representative meta-path graphs.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Generates a synthetic graph; the built-in benchmark when no spec is given.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Synthetic spec (TOML).
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Trains a detector and writes checkpoint, history and test metrics.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Reloads a checkpoint and recomputes the test metrics.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Filters { common } => {
            let config = load_config(&common)?;
            cmd_filters(&config, &common.out)
        }
        Command::Metapaths { common, graph } => {
            let config = load_config(&common)?;
            let g = load_graph(graph.graph.as_deref(), &config)?;
            cmd_metapaths(&g, &config, &common.out)
        }
        Command::Analyze { common, graph } => {
            let config = load_config(&common)?;
            let g = load_graph(graph.graph.as_deref(), &config)?;
            cmd_analyze(&g, &config, &common.out)
        }
        Command::Synth { common, spec } => {
            let mut spec = match &spec {
                Some(p) => {
                    require(p)?;
                    SyntheticSpec::load(p)?
                }
                None => benchmark_spec(0),
            };
            if let Some(seed) = common.seed {
                spec.seed = seed;
            }
            cmd_synth(&spec, &common.out)
        }
        Command::Train { common, graph } => {
            let config = load_config(&common)?;
            let g = load_graph(graph.graph.as_deref(), &config)?;
            cmd_train(&g, &config, &common.out)
        }
        Command::Eval {
            common,
            graph,
            checkpoint: ckpt,
        } => {
            require(&ckpt)?;
            let path = match (&graph.graph, &common.config) {
                (Some(p), _) => p.clone(),
                (None, Some(_)) => graph_path(&load_config(&common)?)?,
                (None, None) => {
                    let bytes = fs::read(&ckpt)?;
                    graph_path(&checkpoint::decode(&bytes)?.0.config)?
                }
            };
            let g = read_graph(&path)?;
            cmd_eval(&g, &ckpt, &common.out)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            require(path)?;
            let mut c = RunConfig::load(path)?;
            // Relative graph paths are taken from the config file's directory.
            if let (Some(g), Some(dir)) = (&c.graph, path.parent()) {
                if g.is_relative() {
                    c.graph = Some(dir.join(g));
                }
            }
            c
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn graph_path(config: &RunConfig) -> Result<PathBuf> {
    config
        .graph
        .clone()
        .ok_or_else(|| Error::Config("no graph given: set `graph` in the config or pass --graph".into()))
}

fn require(path: &Path) -> Result<()> {
    if !path.exists() {
        return Err(Error::InvalidArgument(format!("`{}` does not exist", path.display())));
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<HeteroGraph> {
    require(path)?;
    if path.is_dir() {
        load_csv_dir(path)
    } else {
        load_hetero_graph(path)
    }
}

fn load_graph(flag: Option<&Path>, config: &RunConfig) -> Result<HeteroGraph> {
    match flag {
        Some(p) => read_graph(p),
        None => read_graph(&graph_path(config)?),
    }
}

fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), contents)?;
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn join<T: ToString>(values: &[T], sep: &str) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

fn cmd_filters(config: &RunConfig, out: &Path) -> Result<()> {
    let mut csv =
        String::from("i,s_i,mode,expectation,variance,admissibility,fit_degree,fit_error_linf,basis,coefficients\n");
    let mut rows = Vec::new();
    for &i in &config.candidates {
        let density = ChiSquare::new(i)?;
        let (mean, var) = density.moments();
        let admissibility = match density.admissibility_integral() {
            Ok(v) => Some(v),
            Err(Error::NotAdmissible(_)) => None,
            Err(e) => return Err(e),
        };
        let fit = fit_polynomial(i, config.poly_degree, config.fit_grid)?;
        let adm_text = admissibility.map_or("divergent".to_string(), |v| v.to_string());
        let basis = format!("{:?}", fit.poly.basis).to_lowercase();
        writeln!(
            csv,
            "{i},{},{},{mean},{var},{adm_text},{},{},{basis},{}",
            density.s_i,
            density.mode(),
            fit.poly.degree(),
            fit.fit_error_linf,
            join(&fit.poly.coeffs, " ")
        )
        .unwrap();
        rows.push(json!({
            "i": i,
            "s_i": density.s_i,
            "mode": density.mode(),
            "expectation": mean,
            "variance": var,
            "admissibility": admissibility.map_or(json!("divergent"), |v| json!(v)),
            "fit_degree": fit.poly.degree(),
            "fit_error_linf": fit.fit_error_linf,
            "basis": basis,
            "coefficients": fit.poly.coeffs,
        }));
    }
    write(out, "filters.csv", csv)?;
    write(out, "filters.json", pretty(&json!(rows)))?;
    println!("wrote {} filters to {}", rows.len(), out.display());
    Ok(())
}

fn analyses(graph: &HeteroGraph, config: &RunConfig) -> Result<Vec<TypeAnalysis>> {
    let found: Vec<TypeAnalysis> = (0..graph.node_types.len())
        .map(|t| analyze_type(graph, t, config))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if found.is_empty() {
        return Err(Error::InvalidArgument("no valid meta-path graph in the schema".into()));
    }
    Ok(found)
}

fn cmd_metapaths(graph: &HeteroGraph, config: &RunConfig, out: &Path) -> Result<()> {
    let mut csv = String::from("anchor,path,status,edges,s_high,division,representative,band_max,filter\n");
    let mut listing = Vec::new();
    for a in analyses(graph, config)? {
        let anchor = &graph.node_types[a.node_type].name;
        let mut paths = Vec::new();
        for (k, p) in a.paths.iter().enumerate() {
            let rep = a.representatives.iter().find(|r| r.path == k);
            let (band_max, filter) = match rep {
                Some(r) => (r.profile.band_max.to_string(), r.filter_index.to_string()),
                None => (String::new(), String::new()),
            };
            let name = p.path.display(graph).to_string();
            writeln!(
                csv,
                "{anchor},{name},valid,{},{},{},{},{band_max},{filter}",
                p.edges,
                p.s_high,
                p.division,
                rep.is_some()
            )
            .unwrap();
            paths.push(json!({
                "path": name,
                "edges": p.edges,
                "s_high": p.s_high,
                "division": p.division.to_string(),
                "representative": rep.is_some(),
                "band_max": rep.map(|r| r.profile.band_max),
                "filter": rep.map(|r| r.filter_index),
            }));
        }
        let excluded: Vec<String> = a.excluded.iter().map(|p| p.display(graph).to_string()).collect();
        for name in &excluded {
            writeln!(csv, "{anchor},{name},excluded: empty,0,,,false,,").unwrap();
        }
        listing.push(json!({ "anchor": anchor, "paths": paths, "excluded": excluded }));
    }
    write(out, "metapaths.csv", &csv)?;
    write(out, "metapaths.json", pretty(&json!(listing)))?;
    print!("{csv}");
    Ok(())
}

fn cmd_analyze(graph: &HeteroGraph, config: &RunConfig, out: &Path) -> Result<()> {
    let mut report = Vec::new();
    let mut csv = String::from("anchor,path,division,band,eig_start,eig_end,energy\n");
    for a in analyses(graph, config)? {
        let anchor = &graph.node_types[a.node_type].name;
        for r in &a.representatives {
            let p = &r.profile;
            let name = a.paths[r.path].path.display(graph).to_string();
            for (b, (&(lo, hi), e)) in p.bands.iter().zip(&p.band_energies).enumerate() {
                writeln!(csv, "{anchor},{name},{},{b},{},{},{e}", r.division, p.eigenvalues[lo], p.eigenvalues[hi - 1])
                    .unwrap();
            }
            report.push(json!({
                "anchor": anchor,
                "path": name,
                "division": r.division.to_string(),
                "profiled_nodes": r.profiled_nodes,
                "eigenvalues": p.eigenvalues,
                "energies": p.energies,
                "band_energies": p.band_energies,
                "argmax_band": p.argmax_band,
                "band_max": p.band_max,
                "s_high": p.s_high,
                "filter": r.filter_index,
            }));
        }
    }
    write(out, "profiles.csv", csv)?;
    write(out, "profiles.json", pretty(&json!(report)))?;
    println!("wrote {} profiles to {}", report.len(), out.display());
    Ok(())
}

fn cmd_synth(spec: &SyntheticSpec, out: &Path) -> Result<()> {
    let graph = generate_synthetic_hin(spec)?;
    fs::create_dir_all(out)?;
    let path = out.join("graph.json");
    save_hetero_graph(&graph, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn curve_csv(header: &str, points: &[(f64, f64, f64)]) -> String {
    let mut s = format!("{header}\n");
    for (a, b, c) in points {
        writeln!(s, "{a},{b},{c}").unwrap();
    }
    s
}

/// Writes `metrics.json`, `roc.csv` and `pr.csv` for the validation and test
/// splits; returns the test record.
fn write_evaluation(model: &ChiGadModel, graph: &HeteroGraph, out: &Path) -> Result<MetricsRecord> {
    let data = TrainData::from_graph(graph)?;
    let probs = predict(model, graph)?;
    let split = |ids: &[usize]| -> (Vec<f64>, Vec<bool>) { (ids.iter().map(|&i| probs[i]).collect(), data.anomalous(ids)) };
    let threshold = model.config.threshold;
    let (val_scores, val_labels) = split(&data.splits.val);
    let (scores, labels) = split(&data.splits.test);
    let test = metrics(&scores, &labels, threshold)?;
    let val = metrics(&val_scores, &val_labels, threshold).ok();
    write(out, "metrics.json", pretty(&json!({ "threshold": threshold, "val": val, "test": test })))?;
    write(out, "roc.csv", curve_csv("threshold,fpr,tpr", &roc_curve(&scores, &labels)?))?;
    write(out, "pr.csv", curve_csv("threshold,recall,precision", &pr_curve(&scores, &labels)?))?;
    Ok(test)
}

fn report(test: &MetricsRecord) {
    println!(
        "test auroc {:.4} auprc {:.4} f1_macro {:.4} recall {:.4}",
        test.auroc, test.auprc, test.f1_macro, test.recall
    );
}

fn cmd_train(graph: &HeteroGraph, config: &RunConfig, out: &Path) -> Result<()> {
    let mut model = ChiGadModel::build(graph, config)?;
    let data = TrainData::from_graph(graph)?;
    let outcome = train(&mut model, graph, &data, &TrainConfig::from_run(config)?)?;
    fs::create_dir_all(out)?;
    checkpoint::save(&model, out.join("checkpoint.bin"))?;
    write(out, "history.csv", outcome.history_csv())?;
    write(
        out,
        "train.json",
        pretty(&json!({
            "best_epoch": outcome.best_epoch,
            "best_val_f1_macro": outcome.best_val_f1,
            "epochs": config.epochs,
        })),
    )?;
    let test = write_evaluation(&model, graph, out)?;
    println!("best epoch {} (val f1_macro {:.4})", outcome.best_epoch, outcome.best_val_f1);
    report(&test);
    Ok(())
}

fn cmd_eval(graph: &HeteroGraph, ckpt: &Path, out: &Path) -> Result<()> {
    let model = checkpoint::load(ckpt, graph)?;
    let test = write_evaluation(&model, graph, out)?;
    report(&test);
    Ok(())
}
