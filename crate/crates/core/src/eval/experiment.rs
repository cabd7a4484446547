use std::collections::BTreeSet;
use std::path::PathBuf;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{aggregate_folds, Cell, EvalError, FoldMetrics, FoldPlan, MetricsReport};
use crate::crf::{
    train, CrfError, CrfModel, EmbeddingProvider, Example, ModelSpec, SourceKind, TokenVectors, TrainingConfig,
    TrainingHistory,
};
use crate::embeddings::EmbeddingTable;
use crate::treebank::TaggedSentence;

#[derive(Debug, Clone)]
pub enum EmbeddingSource {
    Static(EmbeddingTable),
    /// Vectors aligned with the corpus sentence by sentence.
    PerToken(TokenVectors),
    /// Vectors learned with the tagger over the training vocabulary.
    Lookup { dim: usize, init: Option<EmbeddingTable> },
}

impl EmbeddingSource {
    fn dim(&self) -> usize {
        match self {
            EmbeddingSource::Static(t) => t.dim(),
            EmbeddingSource::PerToken(v) => v.dim(),
            EmbeddingSource::Lookup { dim, .. } => *dim,
        }
    }

    fn kind(&self) -> SourceKind {
        match self {
            EmbeddingSource::Static(_) => SourceKind::StaticTable,
            EmbeddingSource::PerToken(_) => SourceKind::PerTokenFile,
            EmbeddingSource::Lookup { .. } => SourceKind::TrainableLookup,
        }
    }

    fn provider(&self) -> EmbeddingProvider<'_> {
        match self {
            EmbeddingSource::Static(t) => EmbeddingProvider::Static(t),
            EmbeddingSource::PerToken(v) => EmbeddingProvider::PerToken(v),
            EmbeddingSource::Lookup { .. } => EmbeddingProvider::Lookup,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub source: EmbeddingSource,
    pub hidden: Option<usize>,
    pub training: TrainingConfig,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOptions {
    /// Run only the first `n` folds.
    pub max_folds: Option<usize>,
    /// Per-job model and log files go to `<dir>/<config>/fold<k>/`.
    pub out_dir: Option<PathBuf>,
    pub inventory_checksum: String,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold: usize,
    pub val: FoldMetrics,
    pub test: FoldMetrics,
    pub history: TrainingHistory,
}

#[derive(Debug, Clone)]
pub struct ConfigResult {
    pub name: String,
    pub folds: Vec<FoldOutcome>,
    pub val: MetricsReport,
    pub test: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub configs: Vec<ConfigResult>,
}

fn job_error(config: &str, fold: usize) -> impl FnOnce(CrfError) -> EvalError + '_ {
    move |source| EvalError::Training {
        config: config.to_string(),
        fold,
        source,
    }
}

fn indexed_examples(
    model: &CrfModel,
    corpus: &[TaggedSentence],
    ids: &[usize],
    provider: &EmbeddingProvider,
) -> Result<Vec<Example>, CrfError> {
    ids.iter()
        .map(|&i| {
            Ok(Example {
                input: model.input_for(&corpus[i].words, provider, i)?,
                gold: model.gold_ids(&corpus[i].tags, i)?,
            })
        })
        .collect()
}

/// Initializes a tagger for `cfg` and trains it on the `train` sentences
/// of `corpus`, keeping the epoch that tags `val` best. A lookup source
/// gets the sorted training vocabulary. Per-token vectors are indexed by
/// corpus position.
pub fn train_tagger(
    corpus: &[TaggedSentence],
    tags: &[String],
    train_ids: &[usize],
    val_ids: &[usize],
    cfg: &ExperimentConfig,
    inventory_checksum: &str,
) -> Result<(CrfModel, TrainingHistory), CrfError> {
    let vocab: Vec<String> = match cfg.source {
        EmbeddingSource::Lookup { .. } => train_ids
            .iter()
            .flat_map(|&i| corpus[i].words.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        _ => Vec::new(),
    };
    let spec = ModelSpec {
        tags: tags.to_vec(),
        input_dim: cfg.source.dim(),
        hidden: cfg.hidden,
        source: cfg.source.kind(),
        descriptor: cfg.name.clone(),
        vocab,
        inventory_checksum: inventory_checksum.to_string(),
    };
    let mut model = CrfModel::init(spec, cfg.training.seed)?;
    if let EmbeddingSource::Lookup { init: Some(table), .. } = &cfg.source {
        model.init_lookup_from(table)?;
    }
    let provider = cfg.source.provider();
    let train_set = indexed_examples(&model, corpus, train_ids, &provider)?;
    let val_set = indexed_examples(&model, corpus, val_ids, &provider)?;
    train(&model, &train_set, &val_set, &cfg.training)
}

/// Sorted set of every tag in the corpus.
pub fn corpus_tags(corpus: &[TaggedSentence]) -> Vec<String> {
    corpus
        .iter()
        .flat_map(|s| s.tags.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Tags `ids` with `model` and tallies the result against the gold tags.
pub fn score_sentences(
    model: &CrfModel,
    corpus: &[TaggedSentence],
    ids: &[usize],
    provider: &EmbeddingProvider,
) -> Result<FoldMetrics, EvalError> {
    let tags = model.tags();
    let mut m = FoldMetrics::default();
    for &i in ids {
        let input = model.input_for(&corpus[i].words, provider, i)?;
        let pred: Vec<&str> = model.predict(&input).into_iter().map(|t| tags[t].as_str()).collect();
        let gold: Vec<&str> = corpus[i].tags.iter().map(String::as_str).collect();
        m.add_sequence(&gold, &pred)?;
    }
    Ok(m)
}

fn run_fold(
    corpus: &[TaggedSentence],
    tags: &[String],
    plan: &FoldPlan,
    cfg: &ExperimentConfig,
    fold: usize,
    opts: &ExperimentOptions,
) -> Result<FoldOutcome, EvalError> {
    let err = || job_error(&cfg.name, fold);
    let f = &plan.folds[fold];
    let cfg = ExperimentConfig {
        training: TrainingConfig {
            seed: cfg.training.seed.wrapping_add(fold as u64),
            ..cfg.training.clone()
        },
        ..cfg.clone()
    };
    let (trained, history) =
        train_tagger(corpus, tags, &f.train, &f.val, &cfg, &opts.inventory_checksum).map_err(err())?;
    let provider = cfg.source.provider();
    let score = |ids: &[usize]| {
        score_sentences(&trained, corpus, ids, &provider).map_err(|e| match e {
            EvalError::Model(source) => err()(source),
            e => e,
        })
    };
    let val = score(&f.val)?;
    let test = score(&f.test)?;
    if let Some(dir) = &opts.out_dir {
        let dir = dir.join(file_name(&cfg.name)).join(format!("fold{fold}"));
        std::fs::create_dir_all(&dir)?;
        trained.save(dir.join("model.bin")).map_err(err())?;
        std::fs::write(dir.join("history.tsv"), history.render())?;
    }
    Ok(FoldOutcome {
        fold,
        val,
        test,
        history,
    })
}

fn file_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Trains and scores every configuration on every fold. Jobs run on the
/// current rayon pool and are independent of one another.
pub fn run_experiment(
    corpus: &[TaggedSentence],
    plan: &FoldPlan,
    configs: &[ExperimentConfig],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport, EvalError> {
    if configs.is_empty() {
        return Err(EvalError::NoConfigs);
    }
    if plan.bucket_of.len() != corpus.len() {
        return Err(EvalError::LengthMismatch {
            expected: corpus.len(),
            found: plan.bucket_of.len(),
        });
    }
    let tags = corpus_tags(corpus);
    let nfolds = opts.max_folds.unwrap_or(plan.folds.len()).min(plan.folds.len());
    let jobs: Vec<(usize, usize)> = (0..configs.len()).flat_map(|c| (0..nfolds).map(move |f| (c, f))).collect();
    let outcomes: Vec<Result<FoldOutcome, EvalError>> = jobs
        .par_iter()
        .map(|&(c, f)| run_fold(corpus, &tags, plan, &configs[c], f, opts))
        .collect();
    let mut outcomes = outcomes.into_iter();
    let mut results = Vec::new();
    for cfg in configs {
        let folds = outcomes.by_ref().take(nfolds).collect::<Result<Vec<_>, _>>()?;
        let val = aggregate_folds(&folds.iter().map(|f| f.val.clone()).collect::<Vec<_>>());
        let test = aggregate_folds(&folds.iter().map(|f| f.test.clone()).collect::<Vec<_>>());
        results.push(ConfigResult {
            name: cfg.name.clone(),
            folds,
            val,
            test,
        });
    }
    Ok(ExperimentReport { configs: results })
}

fn cell(c: &Option<Cell>) -> String {
    c.as_ref().map(|c| c.to_string()).unwrap_or_else(|| "-".into())
}

impl ExperimentReport {
    pub fn config(&self, name: &str) -> Option<&ConfigResult> {
        self.configs.iter().find(|c| c.name == name)
    }

    /// Accuracy per configuration on validation and test.
    pub fn render_matrix(&self) -> String {
        let width = self.configs.iter().map(|c| c.name.len()).max().unwrap_or(0).max(13);
        let mut s = format!("{:<width$}  {:<14}  {:<14}\n", "configuration", "validation", "test");
        for c in &self.configs {
            s.push_str(&format!(
                "{:<width$}  {:<14}  {:<14}\n",
                c.name,
                cell(&c.val.accuracy),
                cell(&c.test.accuracy)
            ));
        }
        s.push_str("# token accuracy, mean (standard deviation) over folds, n-1 denominator\n");
        s
    }

    pub fn matrix_tsv(&self) -> String {
        let mut s = String::from("configuration\tvalidation\ttest\n");
        for c in &self.configs {
            s.push_str(&format!("{}\t{}\t{}\n", c.name, cell(&c.val.accuracy), cell(&c.test.accuracy)));
        }
        s
    }

    pub fn fold_tsv(&self) -> String {
        let mut s = String::from("configuration\tfold\tbest_epoch\tval_accuracy\ttest_accuracy\n");
        for c in &self.configs {
            for f in &c.folds {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{:.4}\t{:.4}\n",
                    c.name,
                    f.fold,
                    f.history.best_epoch,
                    f.val.accuracy().unwrap_or(f64::NAN),
                    f.test.accuracy().unwrap_or(f64::NAN)
                ));
            }
        }
        s
    }

    /// Configuration names, seeds and a checksum of the corpus and plan.
    pub fn manifest(&self, corpus: &[TaggedSentence], plan: &FoldPlan, configs: &[ExperimentConfig]) -> String {
        let mut h = Sha256::new();
        for sent in corpus {
            for (w, t) in sent.words.iter().zip(&sent.tags) {
                h.update(w.as_bytes());
                h.update(b"\t");
                h.update(t.as_bytes());
                h.update(b"\n");
            }
            h.update(b"\n");
        }
        let mut s = format!(
            "corpus_sentences={}\ncorpus_sha256={}\nfold_seed={}\nplan_sha256={}\n",
            corpus.len(),
            hex::encode(h.finalize()),
            plan.seed,
            hex::encode(Sha256::digest(plan.to_tsv().as_bytes()))
        );
        for c in configs {
            s.push_str(&format!(
                "config={} source={} dim={} hidden={} lr={} batch={} epochs={} warmup={} optimizer={:?} seed={}\n",
                c.name,
                c.source.kind().as_str(),
                c.source.dim(),
                c.hidden.map(|h| h.to_string()).unwrap_or_else(|| "none".into()),
                c.training.learning_rate,
                c.training.batch_size,
                c.training.max_epochs,
                c.training.warmup_fraction,
                c.training.optimizer,
                c.training.seed
            ));
        }
        s
    }
}
