//! `hireaudit`: stage-by-stage pipeline driving the audit crate.
//!
//! Stages communicate through files in a workspace directory (design/,
//! rendered/, scores/, fits/, reports/); each stage writes a manifest with
//! content hashes so artifacts are traceable and re-runs are diffable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hireaudit_core::config::ConfigBundle;
use hireaudit_core::design::{
    derive_features, enumerate_briefs, enumerate_pairs, enumerate_profiles,
};
use hireaudit_core::harness::{
    run_scoring_campaign, stability_summary, BackendConfig, CampaignOptions, HttpChatBackend,
    RecordStore, Rounding, ScoreBackend, ScoreJob, SyntheticEvaluator, SyntheticEvaluatorSpec,
};
use hireaudit_core::ids::content_hash;
use hireaudit_core::ranking::{
    build_rank_jobs, fit_rank_regression, run_ranking_campaign, RankBackend,
};
use hireaudit_core::render::{
    build_ranking_prompt, build_scoring_prompt, render_brief, render_profile,
};
use hireaudit_core::report::{coefficient_csv, emit_report, aggregates_csv};
use hireaudit_core::stats::{fit, FitResult, ModelSpec, Moderator};

#[derive(Parser)]
#[command(name = "hireaudit", version, about = "Factorial hiring audit pipeline")]
struct Cli {
    /// Workspace directory holding stage artifacts.
    #[arg(long, global = true, default_value = ".")]
    workspace: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Synthetic,
    HttpChat,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a config and enumerate the factorial design.
    Design {
        /// Shipped config name or path to a config JSON.
        #[arg(long)]
        config: String,
    },
    /// Render every profile and brief document.
    Render,
    /// Run a scoring campaign over all profile-brief pairs.
    Score {
        #[arg(long, value_enum, default_value = "synthetic")]
        backend: BackendKind,
        /// Scoring repetitions per pair.
        #[arg(long, default_value_t = 3)]
        runs: u32,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Seed for the synthetic evaluator's noise stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Continue a campaign whose store already has records.
        #[arg(long)]
        resume: bool,
        /// Stop after this many new calls (campaign remains resumable).
        #[arg(long)]
        limit: Option<usize>,
        /// Synthetic evaluator spec JSON; a demo spec is used when omitted.
        #[arg(long)]
        synthetic_spec: Option<PathBuf>,
        /// Backend config JSON; required for http-chat.
        #[arg(long)]
        backend_config: Option<PathBuf>,
    },
    /// Run a ranking campaign over sampled profile triples for one brief.
    Rank {
        #[arg(long, value_enum, default_value = "synthetic")]
        backend: BackendKind,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Seed for triple sampling and presentation order.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Index of the brief the triples are ranked against.
        #[arg(long, default_value_t = 0)]
        brief_index: usize,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        synthetic_spec: Option<PathBuf>,
        #[arg(long)]
        backend_config: Option<PathBuf>,
    },
    /// Fit a regression on the campaign's aggregates.
    Fit {
        /// main | group:<dim=level> | brief:<domain=level> | rank
        #[arg(long, default_value = "main")]
        model: String,
        /// Clustering key: brief (scoring fits) or triple (rank fit).
        #[arg(long)]
        cluster: Option<String>,
    },
    /// Emit the report bundle from fitted models.
    Report {
        /// Also emit a static SVG forest plot.
        #[arg(long)]
        svg: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let ws = Workspace { root: cli.workspace };
    match cli.command {
        Command::Design { config } => cmd_design(&ws, &config),
        Command::Render => cmd_render(&ws),
        Command::Score {
            backend,
            runs,
            concurrency,
            seed,
            resume,
            limit,
            synthetic_spec,
            backend_config,
        } => cmd_score(
            &ws,
            backend,
            runs,
            concurrency,
            seed,
            resume,
            limit,
            synthetic_spec.as_deref(),
            backend_config.as_deref(),
        ),
        Command::Rank {
            backend,
            concurrency,
            seed,
            brief_index,
            resume,
            synthetic_spec,
            backend_config,
        } => cmd_rank(
            &ws,
            backend,
            concurrency,
            seed,
            brief_index,
            resume,
            synthetic_spec.as_deref(),
            backend_config.as_deref(),
        ),
        Command::Fit { model, cluster } => cmd_fit(&ws, &model, cluster.as_deref()),
        Command::Report { svg } => cmd_report(&ws, svg),
    }
}

struct Workspace {
    root: PathBuf,
}

impl Workspace {
    fn dir(&self, stage: &str) -> PathBuf {
        self.root.join(stage)
    }

    /// Missing upstream artifacts are stage errors naming the file and the
    /// command that produces it.
    fn require(&self, relative: &str, produced_by: &str) -> Result<PathBuf> {
        let path = self.root.join(relative);
        if !path.exists() {
            bail!(
                "missing upstream artifact `{}`; run `hireaudit {produced_by}` first",
                path.display()
            );
        }
        Ok(path)
    }

    fn load_bundle(&self) -> Result<ConfigBundle> {
        let path = self.require("design/config.json", "design")?;
        let text = fs::read_to_string(&path)?;
        let bundle = ConfigBundle::from_json(&text)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(bundle)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<String> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(content_hash(contents.as_bytes()))
}

fn write_manifest(dir: &Path, mut extra: serde_json::Value, files: &[(String, String)]) -> Result<()> {
    let map: BTreeMap<&str, &str> =
        files.iter().map(|(n, h)| (n.as_str(), h.as_str())).collect();
    extra["files"] = serde_json::to_value(map)?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&extra)?)?;
    Ok(())
}

fn cmd_design(ws: &Workspace, config: &str) -> Result<()> {
    let bundle = ConfigBundle::load(config)?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let dir = ws.dir("design");
    fs::create_dir_all(&dir)?;
    let config_json = serde_json::to_string_pretty(&bundle)?;
    let hash = write_file(&dir.join("config.json"), &config_json)?;
    let brief_ids: Vec<&str> = briefs.iter().map(|b| b.brief_id.as_str()).collect();
    write_manifest(
        &dir,
        json!({
            "config_name": bundle.design.name,
            "config_hash": bundle.hash(),
            "profile_count": profiles.len(),
            "brief_count": briefs.len(),
            "pair_count": profiles.len() * briefs.len(),
            "brief_ids": brief_ids,
        }),
        &[("config.json".into(), hash)],
    )?;
    println!(
        "design `{}`: {} profiles x {} briefs = {} pairs",
        bundle.design.name,
        profiles.len(),
        briefs.len(),
        profiles.len() * briefs.len()
    );
    Ok(())
}

fn cmd_render(ws: &Workspace) -> Result<()> {
    let bundle = ws.load_bundle()?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let dir = ws.dir("rendered");
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for (name, docs) in [
        (
            "profiles.jsonl",
            profiles
                .iter()
                .map(|p| render_profile(p, &bundle.design, &bundle.templates))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        (
            "briefs.jsonl",
            briefs
                .iter()
                .map(|b| render_brief(b, &bundle.design, &bundle.templates))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    ] {
        let lines: Vec<String> =
            docs.iter().map(serde_json::to_string).collect::<Result<_, _>>()?;
        let contents = lines.join("\n") + "\n";
        files.push((name.to_string(), write_file(&dir.join(name), &contents)?));
    }
    write_manifest(&dir, json!({"config_hash": bundle.hash()}), &files)?;
    println!("rendered {} profiles and {} briefs", profiles.len(), briefs.len());
    Ok(())
}

fn demo_synthetic_spec(seed: u64) -> SyntheticEvaluatorSpec {
    // Mild demo evaluator for offline runs: a plausible penalty pattern with
    // half-point rounding and per-call noise.
    SyntheticEvaluatorSpec {
        intercept: 6.5,
        weights: [
            ("skill:close", -0.2),
            ("skill:far", -0.7),
            ("exp:below", -2.0),
            ("exp:above", 0.2),
            ("rate:100", -0.5),
            ("rate:-100", -0.5),
            ("remote_mismatch", -0.5),
            ("rep:none", -1.2),
            ("edu:bachelor", -0.1),
        ]
        .into_iter()
        .map(|(n, w)| (n.to_string(), w))
        .collect(),
        interaction_weights: Vec::new(),
        noise_sd: 0.3,
        rounding: Rounding::NearestHalf,
        seed,
    }
}

fn load_synthetic(spec_path: Option<&Path>, seed: u64) -> Result<SyntheticEvaluator> {
    let spec = match spec_path {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("reading {}", path.display()))?,
        None => demo_synthetic_spec(seed),
    };
    Ok(SyntheticEvaluator::new(spec)?)
}

fn load_http(config_path: Option<&Path>) -> Result<HttpChatBackend> {
    let Some(path) = config_path else {
        bail!("--backend http-chat needs --backend-config <path>");
    };
    let config: BackendConfig = serde_json::from_str(&fs::read_to_string(path)?)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(HttpChatBackend::new(config)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_score(
    ws: &Workspace,
    backend: BackendKind,
    runs: u32,
    concurrency: usize,
    seed: u64,
    resume: bool,
    limit: Option<usize>,
    synthetic_spec: Option<&Path>,
    backend_config: Option<&Path>,
) -> Result<()> {
    let bundle = ws.load_bundle()?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let wants_prompt = matches!(backend, BackendKind::HttpChat);
    let mut jobs = Vec::with_capacity(profiles.len() * briefs.len());
    for (p, b) in enumerate_pairs(&profiles, &briefs) {
        let prompt = if wants_prompt {
            let profile_doc = render_profile(p, &bundle.design, &bundle.templates)?;
            let brief_doc = render_brief(b, &bundle.design, &bundle.templates)?;
            Some(build_scoring_prompt(&profile_doc, &brief_doc, &bundle.templates)?.text)
        } else {
            None
        };
        jobs.push(ScoreJob {
            features: derive_features(&bundle.design.features, p, b)?,
            prompt,
        });
    }

    let dir = ws.dir("scores");
    fs::create_dir_all(&dir)?;
    let store_path = dir.join("records.jsonl");
    if store_path.exists() && fs::metadata(&store_path)?.len() > 0 && !resume {
        bail!(
            "score store `{}` already has records; pass --resume to continue it",
            store_path.display()
        );
    }
    let mut store = RecordStore::open(&store_path)?;

    let synthetic;
    let http;
    let backend: &dyn ScoreBackend = match backend {
        BackendKind::Synthetic => {
            synthetic = load_synthetic(synthetic_spec, seed)?;
            &synthetic
        }
        BackendKind::HttpChat => {
            http = load_http(backend_config)?;
            &http
        }
    };

    let template_hash = bundle.hash();
    let options = CampaignOptions { runs, concurrency, limit };
    let outcome = run_scoring_campaign(&jobs, backend, &template_hash, &mut store, &options)?;
    let campaign_id =
        content_hash(format!("{template_hash}|{}|{runs}", backend.model_name()).as_bytes());

    let csv = aggregates_csv(&outcome.aggregates);
    let csv_hash = write_file(&dir.join("aggregates.csv"), &csv)?;
    write_manifest(
        &dir,
        json!({
            "campaign_id": campaign_id,
            "config_hash": bundle.hash(),
            "template_hash": template_hash,
            "model": backend.model_name(),
            "runs": runs,
            "completed": outcome.completed,
            "cached": outcome.cached,
            "deferred": outcome.deferred,
            "failed": outcome.failed.len(),
        }),
        &[("aggregates.csv".into(), csv_hash)],
    )?;

    let stability = stability_summary(&outcome.aggregates);
    println!(
        "scored {} new calls ({} cached, {} deferred, {} failed); {} pairs aggregated; {:.1}% of pairs vary across runs (max spread {})",
        outcome.completed,
        outcome.cached,
        outcome.deferred,
        outcome.failed.len(),
        stability.pairs,
        stability.varying_fraction * 100.0,
        stability.max_spread
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_rank(
    ws: &Workspace,
    backend: BackendKind,
    concurrency: usize,
    seed: u64,
    brief_index: usize,
    resume: bool,
    synthetic_spec: Option<&Path>,
    backend_config: Option<&Path>,
) -> Result<()> {
    let bundle = ws.load_bundle()?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let Some(brief) = briefs.get(brief_index) else {
        bail!("--brief-index {brief_index} out of range ({} briefs)", briefs.len());
    };
    let wants_prompt = matches!(backend, BackendKind::HttpChat);
    let mut jobs = build_rank_jobs(&bundle.design, &profiles, brief, seed)?;
    if wants_prompt {
        let brief_doc = render_brief(brief, &bundle.design, &bundle.templates)?;
        let by_id: BTreeMap<&str, _> = profiles.iter().map(|p| (p.profile_id.as_str(), p)).collect();
        for job in &mut jobs {
            let docs = job
                .profile_ids()
                .iter()
                .map(|id| render_profile(by_id[id.as_str()], &bundle.design, &bundle.templates))
                .collect::<Result<Vec<_>, _>>()?;
            job.prompt = Some(build_ranking_prompt(&docs, &brief_doc, &bundle.templates)?.text);
        }
    }

    let dir = ws.dir("scores");
    fs::create_dir_all(&dir)?;
    let store_path = dir.join("records.jsonl");
    let mut store = RecordStore::open(&store_path)?;
    if store.rank_count() > 0 && !resume {
        bail!(
            "store `{}` already has rankings; pass --resume to continue",
            store_path.display()
        );
    }

    let synthetic;
    let http;
    let backend: &dyn RankBackend = match backend {
        BackendKind::Synthetic => {
            synthetic = load_synthetic(synthetic_spec, seed)?;
            &synthetic
        }
        BackendKind::HttpChat => {
            http = load_http(backend_config)?;
            &http
        }
    };

    let template_hash = bundle.hash();
    let outcome = run_ranking_campaign(&jobs, backend, &template_hash, &mut store, concurrency)?;
    let manifest = json!({
        "campaign_id": content_hash(
            format!("{template_hash}|{}|rank|{seed}", backend.model_name()).as_bytes()
        ),
        "config_hash": bundle.hash(),
        "template_hash": template_hash,
        "model": backend.model_name(),
        "seed": seed,
        "brief_id": brief.brief_id,
        "brief_index": brief_index,
        "groups": jobs.len(),
        "completed": outcome.completed,
        "cached": outcome.cached,
        "failed": outcome.failed.len(),
    });
    fs::write(dir.join("rank_manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    println!(
        "ranked {} triples ({} cached, {} failed) against brief {}",
        outcome.completed,
        outcome.cached,
        outcome.failed.len(),
        brief.brief_id
    );
    Ok(())
}

fn fit_file_stem(model: &str) -> String {
    model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

fn scoring_fit(ws: &Workspace, spec: &ModelSpec) -> Result<(FitResult, String)> {
    let manifest_path = ws.require("scores/manifest.json", "score")?;
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let template_hash = manifest["template_hash"].as_str().context("manifest template_hash")?;
    let model_name = manifest["model"].as_str().context("manifest model")?;
    let runs = manifest["runs"].as_u64().context("manifest runs")? as u32;
    let campaign_id = manifest["campaign_id"].as_str().context("manifest campaign_id")?;

    let bundle = ws.load_bundle()?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let store = RecordStore::open(&ws.require("scores/records.jsonl", "score")?)?;

    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut clusters = Vec::new();
    for (p, b) in enumerate_pairs(&profiles, &briefs) {
        let features = derive_features(&bundle.design.features, p, b)?;
        let pair_id = features.pair_id.to_string();
        let scores: Vec<f64> = (0..runs)
            .map_while(|r| {
                store
                    .score(&hireaudit_core::harness::score_cache_key(
                        &pair_id,
                        template_hash,
                        model_name,
                        r,
                    ))
                    .map(|rec| rec.score)
            })
            .collect();
        if scores.len() != runs as usize {
            continue;
        }
        y.push(scores.iter().sum::<f64>() / f64::from(runs));
        clusters.push(features.pair_id.brief_id.clone());
        data.push(features);
    }
    if data.is_empty() {
        bail!("no fully-scored pairs in the store; run `hireaudit score` to completion");
    }
    Ok((fit(spec, &data, &y, &clusters)?, campaign_id.to_string()))
}

fn rank_fit(ws: &Workspace) -> Result<(FitResult, String)> {
    let manifest_path = ws.require("scores/rank_manifest.json", "rank")?;
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let template_hash = manifest["template_hash"].as_str().context("manifest template_hash")?;
    let model_name = manifest["model"].as_str().context("manifest model")?;
    let seed = manifest["seed"].as_u64().context("manifest seed")?;
    let brief_id = manifest["brief_id"].as_str().context("manifest brief_id")?;
    let campaign_id = manifest["campaign_id"].as_str().context("manifest campaign_id")?;

    let bundle = ws.load_bundle()?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let brief = briefs
        .iter()
        .find(|b| b.brief_id == brief_id)
        .context("ranked brief not in current design")?;
    let jobs = build_rank_jobs(&bundle.design, &profiles, brief, seed)?;
    let store = RecordStore::open(&ws.require("scores/records.jsonl", "rank")?)?;
    let fit = fit_rank_regression(&jobs, template_hash, model_name, &store)?;
    Ok((fit, campaign_id.to_string()))
}

fn cmd_fit(ws: &Workspace, model: &str, cluster: Option<&str>) -> Result<()> {
    let (result, campaign_id) = match model {
        "rank" => {
            if matches!(cluster, Some(c) if c != "triple") {
                bail!("the rank model clusters by triple; got --cluster {}", cluster.unwrap());
            }
            rank_fit(ws)?
        }
        _ => {
            if matches!(cluster, Some(c) if c != "brief") {
                bail!("scoring models cluster by brief; got --cluster {}", cluster.unwrap());
            }
            let spec = match model {
                "main" => ModelSpec::main_effects("mean_score"),
                _ if model.starts_with("group:") => {
                    let moderator: Moderator = model["group:".len()..].parse()?;
                    if !matches!(moderator, Moderator::Profile { .. }) {
                        bail!("group moderators are profile-side, e.g. group:name=female_eu");
                    }
                    ModelSpec::with_moderator("mean_score", moderator)
                }
                _ if model.starts_with("brief:") => {
                    let arg = &model["brief:".len()..];
                    let (domain, level) = arg
                        .split_once('=')
                        .context("brief moderator must be brief:<domain>=<level>")?;
                    ModelSpec::with_brief_moderator("mean_score", domain, level)
                }
                other => bail!(
                    "unknown model `{other}`; expected main, group:<dim=level>, brief:<domain=level>, or rank"
                ),
            };
            scoring_fit(ws, &spec)?
        }
    };

    let dir = ws.dir("fits");
    fs::create_dir_all(&dir)?;
    let stem = fit_file_stem(model);
    let json_hash =
        write_file(&dir.join(format!("{stem}.json")), &serde_json::to_string_pretty(&result)?)?;
    let csv_hash =
        write_file(&dir.join(format!("{stem}.csv")), &coefficient_csv(&result, &campaign_id))?;
    write_manifest(
        &dir,
        json!({"campaign_id": campaign_id, "model": model, "spec_hash": result.spec_hash}),
        &[(format!("{stem}.json"), json_hash), (format!("{stem}.csv"), csv_hash)],
    )?;
    println!(
        "fitted `{model}`: n={} k={} clusters={} R^2={:.6}",
        result.n, result.k, result.n_clusters, result.r_squared
    );
    Ok(())
}

fn cmd_report(ws: &Workspace, svg: bool) -> Result<()> {
    let main_path = ws.require("fits/main.json", "fit --model main")?;
    let main_fit: FitResult = serde_json::from_str(&fs::read_to_string(&main_path)?)?;
    let fits_manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.require("fits/manifest.json", "fit")?)?)?;
    let campaign_id =
        fits_manifest["campaign_id"].as_str().context("fits manifest campaign_id")?;

    let rank_path = ws.dir("fits").join("rank.json");
    let rank_fit: Option<FitResult> = rank_path
        .exists()
        .then(|| -> Result<FitResult> { Ok(serde_json::from_str(&fs::read_to_string(&rank_path)?)?) })
        .transpose()?;

    let mut interaction_fits = Vec::new();
    for entry in fs::read_dir(ws.dir("fits"))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if (name.starts_with("group-") || name.starts_with("brief-")) && name.ends_with(".json") {
            interaction_fits.push(serde_json::from_str(&fs::read_to_string(&path)?)?);
        }
    }

    // Aggregates are re-derived from the persisted store so the report stays
    // a pure function of artifacts.
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(
        ws.require("scores/manifest.json", "score")?,
    )?)?;
    let template_hash = manifest["template_hash"].as_str().context("template_hash")?;
    let model_name = manifest["model"].as_str().context("model")?;
    let runs = manifest["runs"].as_u64().context("runs")? as u32;
    let bundle = ws.load_bundle()?;
    let profiles = enumerate_profiles(&bundle.design)?;
    let briefs = enumerate_briefs(&bundle.design)?;
    let jobs: Vec<ScoreJob> = enumerate_pairs(&profiles, &briefs)
        .map(|(p, b)| {
            Ok(ScoreJob {
                features: derive_features(&bundle.design.features, p, b)?,
                prompt: None,
            })
        })
        .collect::<Result<_>>()?;
    let store = RecordStore::open(&ws.require("scores/records.jsonl", "score")?)?;
    let aggregates = hireaudit_core::harness::collect_aggregates(
        &jobs,
        template_hash,
        model_name,
        runs,
        &store,
    );

    let bundle_out = emit_report(
        &main_fit,
        rank_fit.as_ref(),
        &interaction_fits,
        &aggregates,
        campaign_id,
        svg,
    )?;
    let dir = ws.dir("reports");
    fs::create_dir_all(&dir)?;
    let mut files = vec![
        ("coefficients.csv".to_string(),
            write_file(&dir.join("coefficients.csv"), &bundle_out.coefficient_table)?),
        ("max_effects.csv".to_string(),
            write_file(&dir.join("max_effects.csv"), &bundle_out.max_effects)?),
        ("normalized_weights.csv".to_string(),
            write_file(&dir.join("normalized_weights.csv"), &bundle_out.normalized_weights)?),
        ("score_distribution.csv".to_string(),
            write_file(&dir.join("score_distribution.csv"), &bundle_out.score_distribution)?),
        ("summary.md".to_string(), write_file(&dir.join("summary.md"), &bundle_out.summary_md)?),
    ];
    for (moderator, csv) in &bundle_out.interaction_panels {
        let name = format!("interaction_{}.csv", fit_file_stem(moderator));
        let hash = write_file(&dir.join(&name), csv)?;
        files.push((name, hash));
    }
    if let Some(svg_markup) = &bundle_out.svg {
        files.push(("forest.svg".to_string(), write_file(&dir.join("forest.svg"), svg_markup)?));
    }
    write_manifest(&dir, json!({"campaign_id": campaign_id}), &files)?;
    println!("report written to {} ({} files)", dir.display(), files.len());
    Ok(())
}
