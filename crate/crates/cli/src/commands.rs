use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use monoembed_core::clustering::{cluster, ClusterConfig, Decomposition};
use monoembed_core::code_model::terms::TermFilter;
use monoembed_core::code_model::{
    parse_class_units, read_corpus, write_corpus, LabeledCorpus, ParseOptions, CORPUS_FILE,
};
use monoembed_core::corpus_builder::{
    default_queries, discover_repos, mine_repos, read_triplets, sample_triplets, write_triplets,
    FixtureSearchClient, GithubClient, RepoSource, SamplerConfig, SearchClient,
};
use monoembed_core::embedding::mock::{serve_forever, MockConfig};
use monoembed_core::embedding::remote::RemoteConfig;
use monoembed_core::embedding::{
    pca_2d, train_projection, train_projection_cached, write_history, BaseFeatures,
    ConfiguredEmbedder, Embedder, EmbeddingMatrix, ProviderConfig, ProviderKind, TrainConfig,
};
use monoembed_core::evaluation::{
    aggregate_score, embedding_quality_score, metrics_report, pairwise_fbeta, MetricsReport,
    UseCaseTraces,
};
use monoembed_core::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{
    AnalyzeArgs, CmdResult, DecomposeArgs, EmbedArgs, EvalDecompositionArgs, EvalEmbeddingsArgs,
    Failure, MineArgs, MockServerArgs, ProjectArgs, ProviderArgs, ScoreArgs, TrainArgs,
    TripletArgs,
};

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Every corpus directory directly below `dir`, in name order.
pub fn read_corpora(dir: &Path) -> Result<Vec<LabeledCorpus>> {
    let mut subdirs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.join(CORPUS_FILE).is_file() {
            subdirs.push(path);
        }
    }
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::Invalid(format!("{}: no corpora found", dir.display())));
    }
    subdirs.iter().map(|p| read_corpus(p)).collect()
}

fn parse_options(ignore: &[String], raw_fallback: &[String], drop_accessor_words: bool) -> ParseOptions {
    ParseOptions {
        ignore_globs: ignore.to_vec(),
        raw_fallback_globs: raw_fallback.to_vec(),
        term_filter: TermFilter { drop_accessor_words },
    }
}

pub fn analyze(args: &AnalyzeArgs) -> CmdResult {
    let opts = parse_options(&args.ignore, &args.raw_fallback, args.drop_accessor_words);
    let parsed = parse_class_units(&args.src, &opts)?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    if parsed.classes.is_empty() {
        return Err(Error::Invalid(format!("{}: no Java classes found", args.src.display())).into());
    }
    let app = match &args.app {
        Some(a) => a.clone(),
        None => args
            .src
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "app".into()),
    };
    let mut corpus = LabeledCorpus::from_classes(app, parsed.classes);
    if let Some(path) = &args.labels {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let labels: BTreeMap<String, String> = serde_json::from_str(&text).map_err(Error::from)?;
        corpus = corpus.with_labels_by_fqn(&labels)?;
    }
    corpus.validate()?;
    write_corpus(&args.out, &corpus)?;

    let mut m = RunManifest::new("analyze", args)?;
    m.input(&args.src)?;
    if let Some(p) = &args.labels {
        m.input(p)?;
    }
    m.output(&args.out);
    m.write_beside(&args.out)?;
    println!("{}: {} classes -> {}", corpus.app_name, corpus.len(), args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct MineReport {
    accepted: Vec<String>,
    rejected: Vec<RejectedRepo>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct RejectedRepo {
    repo: String,
    code: String,
    reason: String,
}

pub fn mine(args: &MineArgs) -> CmdResult {
    let sources: Vec<RepoSource> = if let Some(list) = &args.list {
        let base = list.parent().unwrap_or(Path::new("."));
        read_lines(list)?.iter().map(|l| RepoSource::parse(l, base)).collect()
    } else if args.discover {
        let client: Box<dyn SearchClient> = if args.search_fixtures.is_empty() {
            let mut c = GithubClient::new(&args.api_base)?;
            c.cache_dir = args.cache.clone();
            c.offline = args.offline;
            Box::new(c)
        } else {
            Box::new(FixtureSearchClient::new(args.search_fixtures.clone()))
        };
        let queries = if args.queries.is_empty() {
            default_queries(args.min_stars)
        } else {
            args.queries.clone()
        };
        let found = discover_repos(client.as_ref(), &queries, args.min_stars, args.max_pages)?;
        if args.discover_only {
            fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
            let path = args.out.join("candidates.json");
            write_json(&path, &found)?;
            let mut m = RunManifest::new("mine", args)?;
            for p in &args.search_fixtures {
                m.input(p)?;
            }
            m.output(&path);
            m.write_beside(&args.out)?;
            println!("{} candidate repositories -> {}", found.len(), path.display());
            return Ok(());
        }
        found.into_iter().map(|c| RepoSource::Remote(c.url)).collect()
    } else {
        return Err(Failure::Usage("mine needs --list FILE or --discover".into()));
    };

    let clones = args.clones.clone().unwrap_or_else(|| args.out.join(".clones"));
    let outcome = mine_repos(&sources, &clones, args.offline, &ParseOptions::default())?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut m = RunManifest::new("mine", args)?;
    if let Some(list) = &args.list {
        m.input(list)?;
    }
    for p in &args.search_fixtures {
        m.input(p)?;
    }
    for corpus in &outcome.accepted {
        let dir = args.out.join(&corpus.app_name);
        write_corpus(&dir, corpus)?;
        m.output(&dir);
    }
    let report = MineReport {
        accepted: outcome.accepted.iter().map(|c| c.app_name.clone()).collect(),
        rejected: outcome
            .rejected
            .iter()
            .map(|(repo, why)| RejectedRepo {
                repo: repo.clone(),
                code: why.code().to_string(),
                reason: why.to_string(),
            })
            .collect(),
        warnings: outcome.warnings.clone(),
    };
    let report_path = args.out.join("mine_report.json");
    write_json(&report_path, &report)?;
    m.output(&report_path);
    m.write_beside(&args.out)?;
    println!(
        "{} accepted, {} rejected -> {}",
        report.accepted.len(),
        report.rejected.len(),
        args.out.display()
    );
    Ok(())
}

pub fn triplets(args: &TripletArgs) -> CmdResult {
    let corpora = read_corpora(&args.corpora)?;
    let exclusions: BTreeSet<String> = match &args.exclusions {
        Some(p) => read_lines(p)?.into_iter().collect(),
        None => BTreeSet::new(),
    };
    let cfg = SamplerConfig {
        max_samples: args.samples,
        seed: args.seed,
        exclusions,
    };
    let triplets = sample_triplets(&corpora, &cfg)?;
    write_triplets(&args.out, &triplets, args.seed)?;

    let mut m = RunManifest::new("triplets", args)?;
    m.seed("sampler", args.seed).input(&args.corpora)?;
    if let Some(p) = &args.exclusions {
        m.input(p)?;
    }
    m.output(&args.out).write_beside(&args.out)?;
    println!("{} triplets -> {}", triplets.len(), args.out.display());
    Ok(())
}

fn provider_config(p: &ProviderArgs) -> std::result::Result<ProviderConfig, Failure> {
    let mut cfg = match p.provider {
        ProviderKind::Remote => {
            let (Some(endpoint), Some(model)) = (&p.endpoint, &p.model_name) else {
                return Err(Failure::Usage("the remote provider needs --endpoint and --model-name".into()));
            };
            let mut rc = RemoteConfig::new(endpoint.clone(), model.clone());
            rc.instruction = p.instruction.clone();
            rc.batch_size = p.batch_size;
            rc.max_chars = p.max_chars;
            rc.concurrency = p.concurrency;
            rc.retries = p.retries;
            rc.backoff_ms = p.backoff_ms;
            ProviderConfig::remote(rc, p.instruct)
        }
        ProviderKind::Projection => {
            let Some(model) = &p.model else {
                return Err(Failure::Usage("the projection provider needs --model FILE".into()));
            };
            ProviderConfig {
                model_path: Some(model.clone()),
                ..ProviderConfig::new(ProviderKind::Projection)
            }
        }
        kind => ProviderConfig::new(kind),
    };
    cfg.symmetric = p.symmetric;
    Ok(cfg)
}

pub fn embed(args: &EmbedArgs) -> CmdResult {
    let cfg = provider_config(&args.provider)?;
    let corpus = read_corpus(&args.corpus)?;
    let embedder = ConfiguredEmbedder::new(cfg.clone())?;
    let matrix = embedder.embed(&corpus)?;
    matrix.write_csv(&args.out)?;

    let mut m = RunManifest::new("embed", &json!({"args": args, "provider": cfg}))?;
    m.input(&args.corpus)?;
    if let Some(p) = &args.provider.model {
        m.input(p)?;
    }
    m.output(&args.out).write_beside(&args.out)?;
    println!("{} x {} {} embedding -> {}", matrix.n(), matrix.m(), matrix.provider, args.out.display());
    Ok(())
}

pub fn train(args: &TrainArgs) -> CmdResult {
    let (triplets, sampler_seed) = read_triplets(&args.triplets)?;
    let corpora = read_corpora(&args.corpora)?;
    let cfg = TrainConfig {
        alpha: args.alpha,
        dim_out: args.dim_out,
        epochs: args.epochs,
        lr: args.lr,
        batch: args.batch,
        seed: args.seed,
        base_features: args.base_features,
    };
    let outcome = if args.base_features == BaseFeatures::RemoteCached {
        let Some(dir) = &args.cached else {
            return Err(Failure::Usage("--base-features remote-cached needs --cached DIR".into()));
        };
        let mut cached = BTreeMap::new();
        for corpus in &corpora {
            let path = dir.join(format!("{}.csv", corpus.app_name));
            if path.is_file() {
                cached.insert(corpus.app_name.clone(), EmbeddingMatrix::read_csv(&path)?);
            }
        }
        train_projection_cached(&triplets, &corpora, &cached, &cfg)?
    } else {
        train_projection(&triplets, &corpora, &cfg)?
    };
    outcome.model.write(&args.out)?;
    let history = args
        .history
        .clone()
        .unwrap_or_else(|| args.out.with_extension("history.csv"));
    write_history(&history, &outcome.history)?;

    let mut m = RunManifest::new("train", &json!({"args": args, "train": cfg}))?;
    m.seed("train", args.seed).seed("sampler", sampler_seed);
    m.input(&args.triplets)?.input(&args.corpora)?;
    if let Some(dir) = &args.cached {
        m.input(dir)?;
    }
    m.output(&args.out).output(&history);
    m.write_beside(&args.out)?;
    println!(
        "loss {:.4} -> {:.4} over {} epochs -> {}",
        outcome.history.first().copied().unwrap_or(f64::NAN),
        outcome.history.last().copied().unwrap_or(f64::NAN),
        args.epochs,
        args.out.display()
    );
    Ok(())
}

pub fn decompose(args: &DecomposeArgs) -> CmdResult {
    let raw = EmbeddingMatrix::read_csv(&args.embedding)?;
    let x = if args.no_standardize { raw } else { raw.standardize()? };
    let cfg = ClusterConfig {
        algorithm: args.algorithm,
        k: args.k,
        damping: args.damping,
        preference: args.preference,
        eps: args.eps,
        min_pts: args.min_pts,
        noise: args.noise,
        seed: args.seed,
        max_iter: args.max_iter,
    };
    if let Some(k) = cfg.k {
        if k > x.n() {
            return Err(Error::Invalid(format!("k = {k} exceeds the {} classes", x.n())).into());
        }
    }
    let d = cluster(&x, &cfg)?;
    d.write(&args.out)?;

    let mut m = RunManifest::new("decompose", &json!({"args": args, "cluster": cfg}))?;
    m.seed("cluster", args.seed).input(&args.embedding)?;
    m.output(&args.out).write_beside(&args.out)?;
    println!("{}: {} services over {} classes -> {}", d.app_name, d.k(), d.n, args.out.display());
    if !d.converged {
        return Err(Failure::NotConverged(format!(
            "{} did not converge within {} iterations; output written anyway",
            cfg.algorithm.name(),
            cfg.max_iter
        )));
    }
    Ok(())
}

pub fn eval_embeddings(args: &EvalEmbeddingsArgs) -> CmdResult {
    let cfg = provider_config(&args.provider)?;
    let corpora = read_corpora(&args.corpora)?;
    let embedder = ConfiguredEmbedder::new(cfg.clone())?;
    let report = embedding_quality_score(&embedder, &corpora)?;
    write_json(&args.out, &report)?;

    let mut m = RunManifest::new("eval-embeddings", &json!({"args": args, "provider": cfg}))?;
    m.input(&args.corpora)?;
    if let Some(p) = &args.provider.model {
        m.input(p)?;
    }
    m.output(&args.out).write_beside(&args.out)?;
    for (app, s) in &report.per_app {
        println!("{:<24} {s:.4}", app);
    }
    println!("{:<24} {:.4}", format!("mean ({})", report.provider), report.mean);
    Ok(())
}

/// Ground truth from corpus labels: one service per distinct label.
fn truth_from_labels(corpus: &LabeledCorpus) -> Option<Decomposition> {
    let labels = corpus.labels.as_ref()?;
    let names = corpus.services();
    let ids: Vec<usize> = labels
        .iter()
        .map(|l| names.binary_search(l).expect("label listed in services()"))
        .collect();
    Some(Decomposition::from_labels(&corpus.app_name, &ids).with_meta("labels", true, 0))
}

pub fn eval_decomposition(args: &EvalDecompositionArgs) -> CmdResult {
    let corpus = read_corpus(&args.corpus)?;
    let d = Decomposition::read(&args.decomposition, Some(corpus.len()))?;
    let traces = args.traces.as_deref().map(UseCaseTraces::read).transpose()?;
    let approach = args.approach.clone().unwrap_or_else(|| d.algorithm.clone());
    let mut report: MetricsReport = metrics_report(&d, &corpus, traces.as_ref(), &approach)?;
    let truth = match &args.truth {
        Some(p) => Some(Decomposition::read(p, Some(corpus.len()))?),
        None => truth_from_labels(&corpus),
    };
    if let Some(t) = &truth {
        report.fbeta = Some(pairwise_fbeta(&d, t, args.beta)?);
    }
    write_json(&args.out, &report)?;

    let mut m = RunManifest::new("eval-decomposition", args)?;
    m.input(&args.decomposition)?.input(&args.corpus)?;
    for p in [&args.truth, &args.traces].into_iter().flatten() {
        m.input(p)?;
    }
    m.output(&args.out).write_beside(&args.out)?;
    println!(
        "{} [{}]: chm {:.4} chd {:.4} icp {:.4} ned {:.4} cov {:.4}{}",
        report.app,
        report.approach,
        report.chm,
        report.chd,
        report.icp,
        report.ned,
        report.cov,
        report.fbeta.map(|f| format!(" fbeta {f:.4}")).unwrap_or_default()
    );
    Ok(())
}

/// Report files below `dir` (manifests excluded), in name order.
fn report_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(dir, e.into()))?;
        let name = entry.file_name().to_string_lossy();
        if entry.file_type().is_file() && name.ends_with(".json") && !name.ends_with("manifest.json") {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

pub fn score(args: &ScoreArgs) -> CmdResult {
    let mut reports: BTreeMap<String, BTreeMap<String, MetricsReport>> = BTreeMap::new();
    let files = report_files(&args.reports)?;
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let r: MetricsReport = serde_json::from_str(&text)
            .map_err(|e| Error::Invalid(format!("{}: not a metrics report: {e}", path.display())))?;
        let apps = reports.entry(r.approach.clone()).or_default();
        if apps.contains_key(&r.app) {
            return Err(Error::Invalid(format!("two reports for {} / {}", r.approach, r.app)).into());
        }
        apps.insert(r.app.clone(), r);
    }
    if reports.is_empty() {
        return Err(Error::Invalid(format!("{}: no metric reports", args.reports.display())).into());
    }
    let scores = aggregate_score(&reports)?;
    write_json(&args.out, &scores)?;

    let mut m = RunManifest::new("score", args)?;
    m.input(&args.reports)?;
    m.output(&args.out).write_beside(&args.out)?;
    let mut table = format!("{:<28} {:>5} {:>9}\n", "approach", "apps", "score");
    for (approach, s) in &scores {
        let _ = writeln!(table, "{:<28} {:>5} {:>9.4}", approach, reports[approach].len(), s);
    }
    print!("{table}");
    Ok(())
}

pub fn project(args: &ProjectArgs) -> CmdResult {
    let x = EmbeddingMatrix::read_csv(&args.embedding)?;
    let labels = match &args.corpus {
        Some(dir) => {
            let corpus = read_corpus(dir)?;
            if corpus.len() != x.n() {
                return Err(Error::Invalid(format!(
                    "corpus has {} classes but the embedding has {} rows",
                    corpus.len(),
                    x.n()
                ))
                .into());
            }
            corpus.labels
        }
        None => None,
    };
    let coords = pca_2d(&x);
    let mut out = String::from("class_id,x,y,service\n");
    for (row, &id) in x.class_ids().iter().enumerate() {
        let service = labels.as_ref().and_then(|l| l.get(id)).map_or("", String::as_str);
        let [px, py] = coords[row];
        let _ = writeln!(out, "{id},{px:?},{py:?},{service}");
    }
    write_text(&args.out, &out)?;

    let mut m = RunManifest::new("project", args)?;
    m.input(&args.embedding)?;
    if let Some(dir) = &args.corpus {
        m.input(dir)?;
    }
    m.output(&args.out).write_beside(&args.out)?;
    Ok(())
}

pub fn mock_server(args: &MockServerArgs) -> CmdResult {
    let cfg = MockConfig {
        mode: args.mode,
        dim: args.dim,
        max_delay_ms: args.max_delay_ms,
        fail_first: args.fail_first,
        seed: args.seed,
    };
    eprintln!("mock embedding server on http://{}/v1/embeddings", args.addr);
    serve_forever(args.addr, cfg)?;
    Ok(())
}
