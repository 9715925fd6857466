use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use screenseek_core::eval::{evaluate, parse_placement, parse_queries, EvalQuery};
use screenseek_core::synonyms::corpus_vocabulary;
use screenseek_core::synth::{
    generate_corpus, generate_doodles, plant_targets, write_corpus, CorpusSpec, DoodleNoise,
};
use screenseek_core::{
    load_corpus, train_reference_classifier, ClassMap, Classifier, DoodleClass, EmbeddingModel,
    IndexBundle, KnnClassifier, SearchEngine, Sketch, SynonymSources, SynonymTable, TextPipeline,
    Thesaurus, TileGrid, DEFAULT_LIMIT,
};
use screenseek_service::AppState;

use crate::config::Config;
use crate::{
    BuildIndexArgs, BuildSynonymsArgs, Cli, Command, EvalArgs, GenBenchmarkArgs, GenCorpusArgs,
    GenDoodlesArgs, SearchArgs, ServeArgs, TrainRecognizerArgs,
};

const DEFAULT_BIND: &str = "127.0.0.1:8080";
/// Doodles per class for the fallback recognizer trained at `serve` startup.
const FALLBACK_TRAINING_PER_CLASS: usize = 20;

pub fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::BuildIndex(a) => build_index(a),
        Command::BuildSynonyms(a) => build_synonyms(a),
        Command::Eval(a) => eval(a, &cfg),
        Command::Search(a) => search(a, &cfg),
        Command::GenCorpus(a) => gen_corpus(a, &cfg),
        Command::GenDoodles(a) => gen_doodles(a, &cfg),
        Command::GenBenchmark(a) => gen_benchmark(a, &cfg),
        Command::TrainRecognizer(a) => train_recognizer(a),
        Command::Serve(a) => serve(a, &cfg),
    }
}

fn positive(n: i64, what: &str) -> Result<usize> {
    ensure!(n > 0, "{what} must be positive, got {n}");
    Ok(n as usize)
}

fn resolve_limit(flag: Option<usize>, cfg: &Config) -> Result<usize> {
    let limit = flag.or(cfg.limit).unwrap_or(DEFAULT_LIMIT);
    ensure!(limit > 0, "limit must be at least 1");
    Ok(limit)
}

fn seed(flag: Option<u64>, cfg: &Config) -> u64 {
    flag.or(cfg.seed).unwrap_or(0)
}

fn pipeline(lexicons: Option<&Path>) -> Result<TextPipeline> {
    match lexicons {
        Some(dir) => TextPipeline::from_dir(dir)
            .with_context(|| format!("loading lexicons from {}", dir.display())),
        None => Ok(TextPipeline::default()),
    }
}

fn load_engine(index: &Path, cfg: &Config) -> Result<SearchEngine> {
    let bundle = IndexBundle::load(index)?;
    Ok(SearchEngine::new(bundle, cfg.ranking)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn build_index(a: BuildIndexArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let synonyms = match &a.synonyms {
        Some(p) => SynonymTable::load(p)?,
        None => SynonymTable::default(),
    };
    let class_map = match &a.class_map {
        Some(p) => ClassMap::load(p)?,
        None => ClassMap::default(),
    };
    let bundle = IndexBundle::build(
        &corpus,
        pipeline(a.lexicons.as_deref())?,
        &synonyms,
        &class_map,
        TileGrid::default(),
    )?;
    bundle.save(&a.out)?;
    let stats = bundle.sketch().stats();
    tracing::info!(
        screens = corpus.len(),
        terms = bundle.text().vocabulary().len(),
        icons = stats.indexed,
        unmapped_icons = stats.unmapped,
        out = %a.out.display(),
        "index built"
    );
    Ok(())
}

fn build_synonyms(a: BuildSynonymsArgs) -> Result<()> {
    let pipeline = pipeline(a.lexicons.as_deref())?;
    let models = a
        .models
        .iter()
        .map(|p| Ok(EmbeddingModel::load(p)?))
        .collect::<Result<Vec<_>>>()?;
    let thesaurus = |p: &Option<PathBuf>, name: &str| -> Result<Thesaurus> {
        match p {
            Some(p) => Ok(Thesaurus::load(p)?),
            None => Ok(Thesaurus::parse(name, "")?),
        }
    };
    let primary = thesaurus(&a.thesaurus, "primary")?;
    let secondary = thesaurus(&a.secondary_thesaurus, "secondary")?;
    let corpus = load_corpus(&a.corpus)?;
    let vocabulary = corpus_vocabulary(&corpus, &pipeline);
    let sources = SynonymSources {
        models: &models,
        primary: &primary,
        secondary: &secondary,
        pipeline: &pipeline,
    };
    let table = sources.build_table(vocabulary.iter().map(String::as_str));
    write_file(&a.out, table.to_text().as_bytes())?;
    tracing::info!(words = table.len(), out = %a.out.display(), "synonym table written");
    Ok(())
}

fn eval(a: EvalArgs, cfg: &Config) -> Result<()> {
    let limit = resolve_limit(a.limit, cfg)?;
    let text = fs::read_to_string(&a.queries)
        .with_context(|| format!("reading {}", a.queries.display()))?;
    let queries = parse_queries(&text)?;
    let engine = load_engine(&a.index, cfg)?;
    let report = evaluate(&engine, &queries, limit)?;
    if let Some(path) = &a.report {
        write_file(path, report.to_json_lines().as_bytes())?;
    }
    let out = if a.json {
        report.to_json_lines()
    } else {
        report.to_table()
    };
    print!("{out}");
    Ok(())
}

fn search(a: SearchArgs, cfg: &Config) -> Result<()> {
    let limit = resolve_limit(a.limit, cfg)?;
    let icons = a
        .icons
        .iter()
        .map(|s| parse_placement(s).with_context(|| format!("--icon {s}")))
        .collect::<Result<Vec<_>>>()?;
    let engine = load_engine(&a.index, cfg)?;
    let query = engine.query(&icons, &a.texts)?;
    let ranked = engine.rank(&query, limit)?;

    if a.json {
        let mut lines = String::new();
        for e in &ranked.entries {
            let mut v = serde_json::to_value(e)?;
            if a.explain {
                v["contributions"] =
                    serde_json::to_value(engine.explain(&query, &e.screen_id)?.contributions)?;
            }
            writeln!(lines, "{v}")?;
        }
        print!("{lines}");
        return Ok(());
    }
    let mut out = String::new();
    writeln!(out, "{:>4}  {:>10}  screen", "rank", "score")?;
    for e in &ranked.entries {
        writeln!(out, "{:>4}  {:>10.6}  {}", e.rank, e.score, e.screen_id)?;
        if a.explain {
            for c in engine.explain(&query, &e.screen_id)?.contributions {
                writeln!(out, "{:>18}  {:.6}  {}", "", c.value, c.component)?;
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn gen_corpus(a: GenCorpusArgs, cfg: &Config) -> Result<()> {
    let spec = CorpusSpec::new(positive(a.screens, "--screens")?, seed(a.seed, cfg));
    let screens = generate_corpus(&spec, &ClassMap::default())?;
    write_corpus(&a.out, &screens)?;
    tracing::info!(screens = screens.len(), out = %a.out.display(), "corpus written");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct DoodleRecord {
    class: DoodleClass,
    strokes: Sketch,
}

fn gen_doodles(a: GenDoodlesArgs, cfg: &Config) -> Result<()> {
    let per_class = positive(a.per_class, "--per-class")?;
    let classes = if a.classes.is_empty() {
        DoodleClass::ALL.to_vec()
    } else {
        a.classes
            .iter()
            .map(|c| c.parse())
            .collect::<Result<Vec<DoodleClass>, _>>()?
    };
    let doodles = generate_doodles(
        &classes,
        per_class,
        seed(a.seed, cfg),
        &DoodleNoise::default(),
    )?;
    let mut out = String::new();
    for (strokes, class) in doodles {
        writeln!(
            out,
            "{}",
            serde_json::to_string(&DoodleRecord { class, strokes })?
        )?;
    }
    write_file(&a.out, out.as_bytes())?;
    tracing::info!(classes = classes.len(), per_class, out = %a.out.display(), "doodles written");
    Ok(())
}

fn gen_benchmark(a: GenBenchmarkArgs, cfg: &Config) -> Result<()> {
    let spec = CorpusSpec::new(positive(a.distractors, "--distractors")?, seed(a.seed, cfg));
    let targets = positive(a.targets, "--targets")?;
    ensure!(
        a.drift.is_finite() && a.drift >= 0.0,
        "--drift must be a non-negative number"
    );
    let (screens, planted) = plant_targets(&spec, &ClassMap::default(), targets, a.drift)?;
    write_corpus(&a.out.join("corpus"), &screens)?;
    let mut lines = String::from("# target\ticons\ttext\n");
    for (i, t) in planted.into_iter().enumerate() {
        let q = EvalQuery {
            line: i + 2,
            target: t.screen_id,
            icons: t.icons,
            texts: t.texts,
        };
        writeln!(lines, "{}", q.to_line())?;
    }
    write_file(&a.out.join("queries.tsv"), lines.as_bytes())?;
    tracing::info!(screens = screens.len(), targets, out = %a.out.display(), "benchmark written");
    Ok(())
}

fn read_doodles(path: &Path) -> Result<Vec<(Sketch, DoodleClass)>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DoodleRecord =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), n + 1))?;
        out.push((rec.strokes, rec.class));
    }
    Ok(out)
}

fn train_recognizer(a: TrainRecognizerArgs) -> Result<()> {
    let labeled = read_doodles(&a.doodles)?;
    if labeled.is_empty() {
        bail!("{} holds no doodles", a.doodles.display());
    }
    let mut classes: Vec<DoodleClass> = labeled.iter().map(|(_, c)| *c).collect();
    classes.sort();
    classes.dedup();
    let model = KnnClassifier::train(&labeled, &classes, Default::default(), a.k)?;
    model.save(&a.out)?;
    tracing::info!(examples = model.len(), classes = classes.len(), out = %a.out.display(), "recognizer trained");
    Ok(())
}

fn serve(a: ServeArgs, cfg: &Config) -> Result<()> {
    let s = &cfg.serve;
    let index = a
        .index
        .or_else(|| s.index.clone())
        .context("no index given (--index, SCREENSEEK_INDEX or [serve] index)")?;
    let corpus_dir = a
        .corpus
        .or_else(|| s.corpus.clone())
        .context("no corpus given (--corpus, SCREENSEEK_CORPUS or [serve] corpus)")?;
    let bind = a
        .bind
        .or_else(|| s.bind.clone())
        .unwrap_or_else(|| DEFAULT_BIND.into());
    let cors =
        screenseek_service::cors_layer(a.cors_origin.or_else(|| s.cors_origin.clone()).as_deref())?;
    let limit = resolve_limit(a.limit, cfg)?;

    let engine = load_engine(&index, cfg)?;
    let corpus = load_corpus(&corpus_dir)?;
    let classifier: Arc<dyn Classifier> = match a.model.or_else(|| s.model.clone()) {
        Some(p) => Arc::new(KnnClassifier::load(&p)?),
        None => {
            tracing::warn!("no recognizer model given; training one on synthetic doodles");
            let doodles = generate_doodles(
                &DoodleClass::ALL,
                FALLBACK_TRAINING_PER_CLASS,
                seed(a.seed, cfg),
                &DoodleNoise::default(),
            )?;
            Arc::new(train_reference_classifier(&doodles, &DoodleClass::ALL)?)
        }
    };
    let state = AppState::new(engine, corpus)
        .context("corpus does not match the index")?
        .with_classifier(classifier)
        .with_default_limit(limit)?;
    let app = screenseek_service::router(Arc::new(state), cors);

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        screenseek_service::serve(listener, app).await?;
        Ok(())
    })
}
