use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use chrono::Utc;
use serde::Serialize;
use snqam_core::corpus::{bucket_by_period, filter_corpus_with_report, parse_corpus, ParseMode, Post};
use snqam_core::features::{row_names, write_feature_csv, FeatureRow, FEATURE_NAMES};
use snqam_core::forest::{self, cross_validate, default_feature_sets, CvReport, Dataset, ForestConfig, Label};
use snqam_core::snqam::{self, load_model, save_model, CalibrationOptions, Catalog, QualityModel, SuggestOptions};
use snqam_core::stats::{
    common_top_features, detect_drift, engagement_cross_correlation, per_user_correlations,
    CorrelationReport, DriftReport, Sample,
};
use snqam_core::wire::{respond, ScoreRequest};
use snqam_core::{featurize_posts, load_lexicons, LexiconSet};

use crate::config::FileConfig;
use crate::server::{self, AppState};
use crate::{
    AnalyzeCommand, CalibrateArgs, ClassifyArgs, Cli, Command, CorrArgs, DriftArgs, ExtractArgs,
    Failure, FilterArgs, ForestArgs, InputArgs, ScoreArgs, ServeArgs,
};

const DEFAULT_PORT: u16 = 8080;
const DEFAULT_BIND: &str = "127.0.0.1";

struct Settings {
    lexicons: Option<PathBuf>,
    file: FileConfig,
}

impl Settings {
    fn lexicons(&self) -> Result<LexiconSet, Failure> {
        let dir = self
            .lexicons
            .clone()
            .or_else(|| self.file.lexicons.clone())
            .ok_or_else(|| {
                Failure::Usage(
                    "no lexicon directory: pass --lexicons, set SNQAM_LEXICONS or set `lexicons` in the config file"
                        .into(),
                )
            })?;
        load_lexicons(&dir)
            .with_context(|| format!("loading lexicons from {}", dir.display()))
            .map_err(Failure::Data)
    }

    fn model(&self, flag: &Option<PathBuf>) -> Result<QualityModel, Failure> {
        let path = flag.clone().or_else(|| self.file.model.clone()).ok_or_else(|| {
            Failure::Usage("no model: pass --model, set SNQAM_MODEL or set `model` in the config file".into())
        })?;
        load_model(&path)
            .with_context(|| format!("loading model {}", path.display()))
            .map_err(Failure::Data)
    }

    fn catalog(&self, flag: &Option<PathBuf>) -> Result<Catalog, Failure> {
        match flag.clone().or_else(|| self.file.catalog.clone()) {
            Some(path) => Catalog::load(&path)
                .with_context(|| format!("loading catalog {}", path.display()))
                .map_err(Failure::Data),
            None => Ok(Catalog::default()),
        }
    }

    fn threshold(&self, flag: Option<f64>) -> f64 {
        flag.or(self.file.threshold).unwrap_or(snqam::DEFAULT_THRESHOLD)
    }
}

pub(crate) fn execute(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(usage)?.resolve(path),
        None => FileConfig::default(),
    };
    let ctx = Settings {
        lexicons: cli.lexicons,
        file,
    };
    match cli.command {
        Command::Extract(a) => extract(&ctx, a),
        Command::Calibrate(a) => calibrate(&ctx, a),
        Command::Score(a) => score(&ctx, a),
        Command::Analyze(AnalyzeCommand::Corr(a)) => corr(&ctx, a),
        Command::Analyze(AnalyzeCommand::Drift(a)) => drift(&ctx, a),
        Command::Analyze(AnalyzeCommand::Classify(a)) => classify(&ctx, a),
        Command::Serve(a) => serve(&ctx, a),
    }
}

fn usage(e: anyhow::Error) -> Failure {
    Failure::Usage(format!("{e:#}"))
}

fn read_posts(input: &InputArgs) -> anyhow::Result<Vec<Post>> {
    let mode = if input.lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let parsed = parse_corpus(&input.input, mode)
        .with_context(|| format!("reading corpus {}", input.input.display()))?;
    if !parsed.skipped_lines.is_empty() {
        eprintln!(
            "skipped {} malformed line(s): {:?}",
            parsed.skipped_lines.len(),
            parsed.skipped_lines
        );
    }
    Ok(parsed.posts)
}

fn filtered_posts(input: &InputArgs, filter: &FilterArgs, lex: &LexiconSet) -> anyhow::Result<Vec<Post>> {
    let posts = read_posts(input)?;
    let now = filter.now.unwrap_or_else(Utc::now);
    let outcome = filter_corpus_with_report(&posts, &filter.filter_config(), lex, now)?;
    if !outcome.dropped.is_empty() {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for (_, reason) in &outcome.dropped {
            *counts.entry(format!("{reason:?}")).or_default() += 1;
        }
        let mut parts: Vec<_> = counts.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        parts.sort();
        eprintln!("filtered out {} post(s): {}", outcome.dropped.len(), parts.join(" "));
    }
    if outcome.kept.is_empty() {
        return Err(anyhow!("no posts left after filtering"));
    }
    Ok(outcome.kept)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn forest_config(f: &ForestArgs) -> ForestConfig {
    ForestConfig {
        n_trees: f.trees,
        seed: f.seed,
        ..ForestConfig::default()
    }
}

fn labels_for(posts: &[Post], very_good: &[String]) -> Vec<Label> {
    let set: HashSet<&str> = very_good.iter().map(String::as_str).collect();
    for acc in &set {
        if !posts.iter().any(|p| p.account_id == *acc) {
            eprintln!("warning: very-good account {acc:?} has no posts");
        }
    }
    posts
        .iter()
        .map(|p| {
            if set.contains(p.account_id.as_str()) {
                Label::VeryGood
            } else {
                Label::Typical
            }
        })
        .collect()
}

fn extract(ctx: &Settings, a: ExtractArgs) -> Result<(), Failure> {
    let lex = ctx.lexicons()?;
    let posts = read_posts(&a.input)?;
    let rows: Vec<(String, FeatureRow)> = posts
        .iter()
        .map(|p| p.id.clone())
        .zip(featurize_posts(&posts, &lex))
        .collect();
    let result = match &a.output {
        Some(path) => write_feature_csv(create(path)?, &rows, a.with_facets),
        None => write_feature_csv(io::stdout().lock(), &rows, a.with_facets),
    };
    result.context("writing feature CSV")?;
    Ok(())
}

fn calibrate(ctx: &Settings, a: CalibrateArgs) -> Result<(), Failure> {
    let lex = ctx.lexicons()?;
    let posts = filtered_posts(&a.input, &a.filter, &lex)?;
    let rows = featurize_posts(&posts, &lex);
    let features: Vec<_> = rows.iter().map(|r| r.features).collect();
    let labels = labels_for(&posts, &a.very_good);
    let quality: Vec<f64> = posts.iter().map(|p| p.quality() as f64).collect();
    let opts = CalibrationOptions {
        forest: forest_config(&a.forest),
        created_at: a.created_at.unwrap_or_else(Utc::now),
    };
    let cal = snqam::calibrate(&features, &labels, &quality, &opts).context("calibration failed")?;
    save_model(&cal.model, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    println!(
        "wrote {} ({} posts, {} warning(s), model {})",
        a.output.display(),
        posts.len(),
        cal.warnings.len(),
        cal.model.model_version()
    );
    Ok(())
}

fn score_requests(a: &ScoreArgs) -> anyhow::Result<Vec<ScoreRequest>> {
    if let Some(text) = &a.text {
        return Ok(vec![ScoreRequest {
            text: text.clone(),
            has_image: a.has_image,
            has_video: a.has_video,
        }]);
    }
    let path = a.requests.as_ref().expect("clap enforces text or requests");
    let body = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    body.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).with_context(|| format!("{}: line {}", path.display(), i + 1))
        })
        .collect()
}

fn score(ctx: &Settings, a: ScoreArgs) -> Result<(), Failure> {
    let model = ctx.model(&a.model)?;
    let lex = ctx.lexicons()?;
    let catalog = ctx.catalog(&a.catalog)?;
    let opts = SuggestOptions {
        threshold: ctx.threshold(a.threshold),
        catalog: &catalog,
    };
    let requests = score_requests(&a)?;
    let mut out = io::stdout().lock();
    for req in &requests {
        if let Some(chars) = req.oversized() {
            return Err(anyhow!("draft has {chars} characters, limit is {}", snqam_core::wire::MAX_TEXT_CHARS).into());
        }
        let resp = respond(req, &model, &lex, &opts).context("scoring failed")?;
        writeln!(out, "{}", serde_json::to_string(&resp).expect("response serializes"))
            .context("writing stdout")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CorrOutput<'a> {
    report: &'a CorrelationReport,
    top_k: usize,
    common_top_features: Vec<String>,
    /// likes, comments, reposts.
    engagement_correlation: Option<[[f64; 3]; 3]>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn corr_table(out: &CorrOutput<'_>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<22} {:>8} {:>8} {:>8} {:>6}", "feature", "mean", "std", "pooled", "users");
    for f in &out.report.features {
        let _ = writeln!(
            s,
            "{:<22} {:>8.4} {:>8.4} {:>8} {:>6}",
            f.name,
            f.mean,
            f.std,
            fmt_opt(f.pooled),
            f.per_user.len()
        );
    }
    for (user, why) in &out.report.excluded_users {
        let _ = writeln!(s, "excluded user {user}: {why}");
    }
    if !out.report.excluded_features.is_empty() {
        let _ = writeln!(s, "excluded features: {}", out.report.excluded_features.join(", "));
    }
    let _ = writeln!(
        s,
        "common top-{} features: {}",
        out.top_k,
        out.common_top_features.join(", ")
    );
    if let Some(m) = out.engagement_correlation {
        let _ = writeln!(s, "engagement SRC (likes, comments, reposts):");
        for row in m {
            let _ = writeln!(s, "  {:>7.4} {:>7.4} {:>7.4}", row[0], row[1], row[2]);
        }
    }
    s
}

fn corr(ctx: &Settings, a: CorrArgs) -> Result<(), Failure> {
    let lex = ctx.lexicons()?;
    let posts = filtered_posts(&a.input, &a.filter, &lex)?;
    let rows = featurize_posts(&posts, &lex);
    let samples: Vec<Sample> = posts
        .iter()
        .zip(&rows)
        .map(|(p, r)| Sample {
            account_id: p.account_id.clone(),
            quality: p.quality() as f64,
            values: r.values(),
        })
        .collect();
    let report = per_user_correlations(&samples, &row_names());
    let out = CorrOutput {
        common_top_features: common_top_features(&report, a.top_k),
        report: &report,
        top_k: a.top_k,
        engagement_correlation: engagement_cross_correlation(&posts).ok(),
    };
    if let Some(path) = &a.report.json {
        write_json(path, &out)?;
    }
    print!("{}", corr_table(&out));
    Ok(())
}

fn drift_table(r: &DriftReport) -> String {
    let mut s = String::new();
    let q = &r.quality;
    let _ = writeln!(s, "periods: {}", r.periods);
    let _ = writeln!(
        s,
        "quality change point: period {} ({:.4} -> {:.4}, shift {:.4}){}",
        q.change_point,
        q.pre_mean,
        q.post_mean,
        q.shift_score,
        if q.no_drift { ", no drift" } else { "" }
    );
    let _ = writeln!(s, "{:<22} {:>10} {:>6} {:>10}", "most similar to quality", "similarity", "change", "shift");
    for t in r.similar_to_quality.iter().take(10) {
        let col = r.columns.iter().find(|c| c.name == t.name).expect("column present");
        let _ = writeln!(
            s,
            "{:<22} {:>10.4} {:>6} {:>10.4}",
            t.name, t.similarity, col.change_point, col.shift_score
        );
    }
    s
}

fn drift(ctx: &Settings, a: DriftArgs) -> Result<(), Failure> {
    let lex = ctx.lexicons()?;
    let mut posts = filtered_posts(&a.input, &a.filter, &lex)?;
    if let Some(acc) = &a.account {
        posts.retain(|p| &p.account_id == acc);
        if posts.is_empty() {
            return Err(anyhow!("account {acc:?} has no posts after filtering").into());
        }
    }
    let rows = featurize_posts(&posts, &lex);
    let map: HashMap<String, FeatureRow> = posts.iter().map(|p| p.id.clone()).zip(rows).collect();
    let series = bucket_by_period(&posts, &map, a.period_days).context("bucketing periods")?;
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        series.write_csv(&mut w).context("writing period CSV")?;
        w.flush().context("writing period CSV")?;
    }
    let report = detect_drift(&series).context("drift detection")?;
    if let Some(path) = &a.report.json {
        write_json(path, &report)?;
    }
    print!("{}", drift_table(&report));
    Ok(())
}

#[derive(Serialize)]
struct ClassifyOutput {
    cv: CvReport,
    /// Importances of a forest trained on every row, descending.
    importances: Vec<(String, f64)>,
}

fn classify(ctx: &Settings, a: ClassifyArgs) -> Result<(), Failure> {
    let lex = ctx.lexicons()?;
    let posts = filtered_posts(&a.input, &a.filter, &lex)?;
    let rows: Vec<Vec<f64>> = featurize_posts(&posts, &lex)
        .iter()
        .map(|r| r.features.to_vec())
        .collect();
    let labels = labels_for(&posts, &a.very_good);
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let data = Dataset::new(rows, labels, names).context("building dataset")?;
    let cfg = forest_config(&a.forest);
    let cv = cross_validate(&data, &cfg, a.folds, &default_feature_sets()).context("cross-validation")?;
    let model = forest::train(&data, &cfg).context("training")?;
    let out = ClassifyOutput {
        cv,
        importances: forest::importances(&model),
    };
    if let Some(path) = &a.report.json {
        write_json(path, &out)?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "{}-fold CV over {} posts", out.cv.folds, out.cv.rows);
    let _ = writeln!(s, "{:<16} {:>8}  folds", "feature set", "mean");
    for r in &out.cv.results {
        let folds: Vec<String> = r.fold_accuracies.iter().map(|x| format!("{x:.3}")).collect();
        let _ = writeln!(s, "{:<16} {:>8.4}  {}", r.name, r.mean_accuracy, folds.join(" "));
    }
    let _ = writeln!(s, "top importances:");
    for (name, w) in out.importances.iter().take(10) {
        let _ = writeln!(s, "  {name:<22} {w:.4}");
    }
    print!("{s}");
    Ok(())
}

fn serve(ctx: &Settings, a: ServeArgs) -> Result<(), Failure> {
    let model = ctx.model(&a.model)?;
    let lexicons = ctx.lexicons()?;
    let catalog = ctx.catalog(&a.catalog)?;
    let port = a.port.or(ctx.file.port).unwrap_or(DEFAULT_PORT);
    let bind = a
        .bind
        .clone()
        .or_else(|| ctx.file.bind.clone())
        .unwrap_or_else(|| DEFAULT_BIND.into());
    let origins = if a.cors_origins.is_empty() {
        ctx.file.cors_origins.clone()
    } else {
        a.cors_origins.clone()
    };
    let cors = server::cors_layer(&origins).map_err(usage)?;
    let state = Arc::new(AppState {
        model,
        lexicons,
        catalog,
        threshold: ctx.threshold(a.threshold),
    });
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((bind.as_str(), port))
            .await
            .with_context(|| format!("binding {bind}:{port}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        server::serve(listener, server::router(state, cors)).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}
