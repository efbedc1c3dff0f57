use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use a11yrev_core::baselines::{evaluate_keyword_baseline, random_baseline_metrics, KeywordList};
use a11yrev_core::corpus::{load_corpus, load_reviews, save_corpus, CorpusFormat};
use a11yrev_core::eval::{
    cross_validate, improvement_ratios, learning_curve, report_influential_features, CvConfig, CvReport, MetricsReport,
    ReportDocument,
};
use a11yrev_core::learners::{fit, load_model, save_model};
use a11yrev_core::textprep::StopList;
use a11yrev_core::{synthetic, Algorithm, Exec, FeaturePipeline, LabeledCorpus, TrainedModel};
use serde_json::json;

use crate::config::{ExperimentConfig, FileConfig, Overrides};
use crate::server::{self, Classification};
use crate::{BaselineKind, Cli, CliError, Command, ExperimentArgs};

struct Context {
    config_file: Option<PathBuf>,
    exec: Exec,
}

impl Context {
    fn resolve(
        &self,
        exp: &ExperimentArgs,
        keywords: Option<PathBuf>,
        step: Option<usize>,
    ) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config_file {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let flags = Overrides {
            corpus: exp.corpus.clone(),
            format: exp.format.clone(),
            stopwords: exp.stopwords.clone(),
            keywords,
            bits: exp.bits,
            signed: exp.signed,
            max_n: exp.max_n,
            mi_k: exp.mi_k,
            algorithm: exp.algorithm.clone(),
            seed: exp.seed,
            folds: exp.folds,
            step,
            output: exp.output.clone(),
            hyperparameters: exp.hyperparameters.clone(),
        };
        ExperimentConfig::resolve(file, flags)
    }

    fn cv_config(&self, cfg: &ExperimentConfig) -> Result<CvConfig, CliError> {
        Ok(CvConfig {
            k: cfg.folds,
            seed: cfg.seed,
            featurizer: cfg.featurizer.clone(),
            stops: load_stops(cfg)?,
            exec: self.exec,
        })
    }
}

fn load_stops(cfg: &ExperimentConfig) -> Result<StopList, CliError> {
    match &cfg.stopwords {
        Some(p) => StopList::from_file(p).map_err(|e| CliError::usage(e.to_string())),
        None => Ok(StopList::default_english()),
    }
}

fn load_labeled(cfg: &ExperimentConfig) -> Result<LabeledCorpus, CliError> {
    let path = cfg.corpus_path()?;
    if !path.exists() {
        return Err(CliError::usage(format!("corpus not found: {}", path.display())));
    }
    load_corpus(path, cfg.corpus_format()?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_trained(path: &Path) -> Result<TrainedModel, CliError> {
    load_model(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn report_path(cfg: &ExperimentConfig, default: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn write_report(doc: &ReportDocument, path: &Path) -> Result<(), CliError> {
    doc.save(path).map_err(|e| CliError::failure(e.to_string()))?;
    eprintln!("report written to {}", path.display());
    Ok(())
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context {
        config_file: cli.config.clone(),
        exec: if cli.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
    };
    match cli.command {
        Command::Crossval { exp, all } => crossval(&ctx, &exp, all),
        Command::Curve { exp, step, csv } => curve(&ctx, &exp, step, csv),
        Command::Baseline {
            exp,
            which,
            keywords,
            n_pos,
            n_total,
            compare,
            compare_algorithm,
        } => baseline(
            &ctx,
            &exp,
            which,
            keywords,
            n_pos.zip(n_total),
            compare,
            compare_algorithm,
        ),
        Command::Train { exp, model } => train(&ctx, &exp, &model),
        Command::Predict { model, input, output } => predict(&ctx, &model, &input, output.as_deref()),
        Command::Serve { model, bind, max_body } => serve(&model, &bind, max_body),
        Command::Features { exp, model, top } => features(&ctx, &exp, &model, top),
        Command::Synth {
            n_per_class,
            seed,
            out,
            keywords_out,
        } => synth(n_per_class, seed, &out, keywords_out.as_deref()),
    }
}

fn metrics_row(name: &str, m: &MetricsReport) -> String {
    format!(
        "{name:<16} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
        m.precision, m.recall, m.accuracy, m.f1
    )
}

fn crossval(ctx: &Context, exp: &ExperimentArgs, all: bool) -> Result<(), CliError> {
    let cfg = ctx.resolve(exp, None, None)?;
    let cv = ctx.cv_config(&cfg)?;
    let corpus = load_labeled(&cfg)?;
    let algorithms: Vec<Algorithm> = if all {
        Algorithm::ALL.to_vec()
    } else {
        vec![cfg.algorithm]
    };
    let specs = algorithms
        .iter()
        .map(|&a| cfg.learner_spec(a))
        .collect::<Result<Vec<_>, _>>()?;
    let started = Instant::now();
    let mut reports: Vec<CvReport> = Vec::new();
    let mut timings = Vec::new();
    for spec in &specs {
        let t = Instant::now();
        reports.push(cross_validate(&corpus, spec, &cv)?);
        timings.push((spec.algorithm.name(), t.elapsed().as_secs_f64()));
    }
    let mut ranking: Vec<&CvReport> = reports.iter().collect();
    ranking.sort_by(|a, b| b.mean.f1.total_cmp(&a.mean.f1));
    println!(
        "{:<16} {:>9} {:>9} {:>9} {:>9}",
        "algorithm", "precision", "recall", "accuracy", "f1"
    );
    for r in &ranking {
        println!("{}", metrics_row(r.algorithm.name(), &r.mean));
    }
    let ranking: Vec<&str> = ranking.iter().map(|r| r.algorithm.name()).collect();
    let mut doc = ReportDocument::new(
        "crossval",
        &cfg,
        json!({ "corpus_size": corpus.len(), "algorithms": reports, "ranking": ranking }),
    )?;
    for (name, secs) in timings {
        doc = doc.with_timing(name, secs);
    }
    doc = doc.with_timing("total", started.elapsed().as_secs_f64());
    write_report(&doc, &report_path(&cfg, "crossval_report.json"))
}

fn curve(ctx: &Context, exp: &ExperimentArgs, step: Option<usize>, csv: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = ctx.resolve(exp, None, step)?;
    let cv = ctx.cv_config(&cfg)?;
    let corpus = load_labeled(&cfg)?;
    let spec = cfg.learner_spec(cfg.algorithm)?;
    let started = Instant::now();
    let points = learning_curve(&corpus, &spec, &cv, cfg.step)?;
    let mut table = String::from("size,f1\n");
    for p in &points {
        table.push_str(&format!("{},{}\n", p.size, p.f1));
        println!("{:>6}  F1 {:.3}", p.size, p.f1);
    }
    let out = report_path(&cfg, "curve_report.json");
    let csv = csv.unwrap_or_else(|| out.with_extension("csv"));
    fs::write(&csv, table).map_err(|e| CliError::failure(format!("{}: {e}", csv.display())))?;
    eprintln!("curve written to {}", csv.display());
    let doc = ReportDocument::new(
        "curve",
        &cfg,
        json!({ "algorithm": spec.algorithm, "spec": spec, "step": cfg.step, "points": points }),
    )?
    .with_timing("total", started.elapsed().as_secs_f64());
    write_report(&doc, &out)
}

/// Pick a learner's mean metrics out of a crossval report.
fn compared_metrics(path: &Path, algorithm: Option<&str>) -> Result<(String, MetricsReport), CliError> {
    let doc = ReportDocument::load(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let reports: Vec<CvReport> = doc
        .results
        .get("algorithms")
        .cloned()
        .and_then(|v| serde_json::from_value(v).ok())
        .ok_or_else(|| CliError::usage(format!("{} is not a crossval report", path.display())))?;
    let wanted = algorithm.unwrap_or("boosted_trees");
    let r = reports
        .iter()
        .find(|r| r.algorithm.name() == wanted)
        .ok_or_else(|| CliError::usage(format!("{} has no `{wanted}` results", path.display())))?;
    Ok((wanted.to_string(), r.mean.clone()))
}

fn baseline(
    ctx: &Context,
    exp: &ExperimentArgs,
    which: BaselineKind,
    keywords: Option<PathBuf>,
    counts: Option<(u64, u64)>,
    compare: Option<PathBuf>,
    compare_algorithm: Option<String>,
) -> Result<(), CliError> {
    let cfg = ctx.resolve(exp, keywords, None)?;
    let (name, metrics, detail) = match which {
        BaselineKind::Keyword => {
            let list = match &cfg.keywords {
                Some(p) => KeywordList::from_file(p).map_err(|e| CliError::usage(e.to_string()))?,
                None => KeywordList::default_list(),
            };
            let corpus = load_labeled(&cfg)?;
            let m = evaluate_keyword_baseline(&corpus, &list)?;
            (
                "keyword",
                m,
                json!({ "keywords": list.source, "n_keywords": list.len(), "corpus_size": corpus.len() }),
            )
        }
        BaselineKind::Random => {
            let (n_pos, n_total) = match counts {
                Some(c) => c,
                None => {
                    let corpus = load_labeled(&cfg)?;
                    (corpus.n_positive() as u64, corpus.len() as u64)
                }
            };
            let m = random_baseline_metrics(n_pos, n_total)?;
            ("random", m, json!({ "n_pos": n_pos, "n_total": n_total }))
        }
    };
    println!("{:<16} {:>9} {:>9} {:>9}", "approach", "precision", "recall", "f1");
    let row =
        |label: &str, m: &MetricsReport| println!("{label:<16} {:>9.3} {:>9.3} {:>9.3}", m.precision, m.recall, m.f1);
    row(name, &metrics);
    let mut comparison = serde_json::Value::Null;
    if let Some(path) = compare {
        let (algo, ours) = compared_metrics(&path, compare_algorithm.as_deref())?;
        let ratios = improvement_ratios(&ours, &metrics);
        row(&algo, &ours);
        let show = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{v:.3}x"));
        println!(
            "{:<16} {:>9} {:>9} {:>9}",
            "improvement",
            show(ratios.precision),
            show(ratios.recall),
            show(ratios.f1)
        );
        comparison = json!({ "algorithm": algo, "metrics": ours, "improvement": ratios });
    }
    let doc = ReportDocument::new(
        "baseline",
        &cfg,
        json!({ "baseline": name, "detail": detail, "metrics": metrics, "comparison": comparison }),
    )?;
    write_report(&doc, &report_path(&cfg, "baseline_report.json"))
}

fn train(ctx: &Context, exp: &ExperimentArgs, model_path: &Path) -> Result<(), CliError> {
    let cfg = ctx.resolve(exp, None, None)?;
    let stops = load_stops(&cfg)?;
    let corpus = load_labeled(&cfg)?;
    let spec = cfg.learner_spec(cfg.algorithm)?;
    let (pipeline, matrix) = FeaturePipeline::fit(&corpus, &stops, &cfg.featurizer, ctx.exec)?;
    let model = fit(&spec, &matrix)?.with_pipeline(pipeline);
    save_model(&model, model_path).map_err(|e| CliError::failure(e.to_string()))?;
    eprintln!(
        "trained {} on {} reviews; model written to {}",
        spec.algorithm,
        corpus.len(),
        model_path.display()
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct Prediction<'a> {
    id: &'a str,
    label: String,
    score: f64,
}

fn predict(ctx: &Context, model_path: &Path, input: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let model = load_trained(model_path)?;
    if model.pipeline.is_none() {
        return Err(CliError::usage(format!(
            "{} carries no feature pipeline",
            model_path.display()
        )));
    }
    if !input.exists() {
        return Err(CliError::usage(format!("input not found: {}", input.display())));
    }
    let reviews = load_reviews(input, CorpusFormat::from_path(input))
        .map_err(|e| CliError::usage(format!("{}: {e}", input.display())))?;
    let scored: Vec<Result<Classification, a11yrev_core::Error>> =
        ctx.exec.map(&reviews, |r| server::classify(&model, &r.text));
    let mut out = String::new();
    for (r, c) in reviews.iter().zip(scored) {
        let c = c?;
        let line = serde_json::to_string(&Prediction {
            id: &r.id,
            label: c.label,
            score: c.score,
        })
        .map_err(|e| CliError::failure(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    match output {
        Some(p) => fs::write(p, out).map_err(|e| CliError::failure(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(out.as_bytes())
            .map_err(|e| CliError::failure(e.to_string())),
    }
}

fn serve(model_path: &Path, bind: &str, max_body: usize) -> Result<(), CliError> {
    let model = Arc::new(load_trained(model_path)?);
    if model.pipeline.is_none() {
        return Err(CliError::usage(format!(
            "{} carries no feature pipeline",
            model_path.display()
        )));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::failure(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| CliError::usage(format!("cannot bind {bind}: {e}")))?;
        eprintln!("serving {} on http://{bind}", model.algorithm);
        axum::serve(listener, server::router(model, max_body))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::failure(e.to_string()))
    })
}

fn features(ctx: &Context, exp: &ExperimentArgs, model_path: &Path, top: usize) -> Result<(), CliError> {
    let cfg = ctx.resolve(exp, None, None)?;
    let model = load_trained(model_path)?;
    let corpus = load_labeled(&cfg)?;
    let report = report_influential_features(&corpus, &model, top)?;
    if report.fallback {
        eprintln!("model has no split importances; ranking by mutual information");
    }
    for (rank, f) in report.features.iter().enumerate() {
        let grams = if f.grams.is_empty() {
            "-".to_string()
        } else {
            f.grams.join(" | ")
        };
        println!("{:>3}. {:<10.6} {}", rank + 1, f.score, grams);
    }
    let doc = ReportDocument::new("features", &cfg, &report)?;
    write_report(&doc, &report_path(&cfg, "features_report.json"))
}

fn synth(n_per_class: usize, seed: u64, out: &Path, keywords_out: Option<&Path>) -> Result<(), CliError> {
    if n_per_class == 0 {
        return Err(CliError::usage("n-per-class must be positive"));
    }
    let corpus = synthetic::generate(n_per_class, seed);
    save_corpus(&corpus, out, CorpusFormat::from_path(out)).map_err(|e| CliError::failure(e.to_string()))?;
    if let Some(p) = keywords_out {
        let mut text = String::from("# planted accessibility phrases of the synthetic corpus\n");
        for k in synthetic::PLANTED_KEYWORDS {
            text.push_str(k);
            text.push('\n');
        }
        fs::write(p, text).map_err(|e| CliError::failure(format!("{}: {e}", p.display())))?;
    }
    eprintln!("wrote {} reviews to {}", corpus.len(), out.display());
    Ok(())
}
