//! Experiment manifests for `evaluate`.
//!
//! ```text
//! corpus = prepared.tsv
//! folds = folds.tsv
//! max_folds = 10
//! config.glove.source = static:glove.txt
//! config.glove.standardize = true
//! config.lookup.source = lookup:50
//! config.lookup.hidden = 32
//! config.lookup.optimizer = adamw
//! config.lookup.learning_rate = 0.01
//! ```
//!
//! Sources are `static:<table>`, `lookup:<dim>`, `lookup:<dim>:<init table>`
//! and `per-token:<vectors>`. Static and lookup configurations start from
//! the SGD preset, per-token ones from the AdamW preset.

use std::path::{Path, PathBuf};

use anyhow::Context;
use yidtag::crf::{Optimizer, TokenVectors, TrainingConfig};
use yidtag::embeddings::EmbeddingTable;
use yidtag::eval::{EmbeddingSource, ExperimentConfig};

use crate::config::{usage, Failure};

#[derive(Debug)]
pub struct Manifest {
    pub corpus: PathBuf,
    pub folds: Option<PathBuf>,
    pub fold_seed: Option<u64>,
    pub max_folds: Option<usize>,
    pub configs: Vec<ExperimentConfig>,
}

#[derive(Default)]
struct Pending {
    name: String,
    source: Option<String>,
    standardize: bool,
    hidden: Option<usize>,
    training: TrainingFlags,
}

/// Overrides for a training preset; unset fields keep the preset value.
#[derive(Debug, Clone, Default)]
pub struct TrainingFlags {
    pub optimizer: Option<String>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub warmup: Option<f64>,
    pub weight_decay: Option<f64>,
    pub seed: Option<u64>,
}

impl TrainingFlags {
    pub fn apply(self, mut training: TrainingConfig, default_seed: u64) -> Result<TrainingConfig, String> {
        if let Some(o) = self.optimizer {
            training.optimizer = parse_optimizer(&o).ok_or_else(|| format!("unknown optimizer {o:?}"))?;
        }
        if let (Some(wd), Optimizer::AdamW { weight_decay, .. }) = (self.weight_decay, &mut training.optimizer) {
            *weight_decay = wd;
        }
        training.learning_rate = self.learning_rate.unwrap_or(training.learning_rate);
        training.batch_size = self.batch_size.unwrap_or(training.batch_size);
        training.max_epochs = self.epochs.unwrap_or(training.max_epochs);
        training.warmup_fraction = self.warmup.unwrap_or(training.warmup_fraction);
        training.seed = self.seed.unwrap_or(default_seed);
        Ok(training)
    }
}

fn num<T: std::str::FromStr>(v: &str, at: &str) -> Result<T, Failure> {
    v.parse().map_err(|_| usage(format!("{at}: bad value {v:?}")))
}

pub fn load(path: &Path, default_seed: u64) -> Result<Manifest, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let (mut corpus, mut folds, mut fold_seed, mut max_folds) = (None, None, None, None);
    let mut pending: Vec<Pending> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("{}:{}", path.display(), n + 1);
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{at}: expected key = value")))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "corpus" => corpus = Some(base.join(v)),
            "folds" => folds = Some(base.join(v)),
            "fold_seed" => fold_seed = Some(num(v, &at)?),
            "max_folds" => max_folds = Some(num(v, &at)?),
            _ => {
                let rest = k
                    .strip_prefix("config.")
                    .ok_or_else(|| usage(format!("{at}: unknown key {k:?}")))?;
                let (name, field) = rest
                    .rsplit_once('.')
                    .ok_or_else(|| usage(format!("{at}: expected config.<name>.<field>")))?;
                let idx = match pending.iter().position(|p| p.name == name) {
                    Some(i) => i,
                    None => {
                        pending.push(Pending {
                            name: name.to_string(),
                            ..Default::default()
                        });
                        pending.len() - 1
                    }
                };
                let p = &mut pending[idx];
                match field {
                    "source" => p.source = Some(v.to_string()),
                    "standardize" => p.standardize = num(v, &at)?,
                    "hidden" => p.hidden = Some(num(v, &at)?),
                    "optimizer" => p.training.optimizer = Some(v.to_string()),
                    "learning_rate" => p.training.learning_rate = Some(num(v, &at)?),
                    "batch_size" => p.training.batch_size = Some(num(v, &at)?),
                    "epochs" => p.training.epochs = Some(num(v, &at)?),
                    "warmup" => p.training.warmup = Some(num(v, &at)?),
                    "weight_decay" => p.training.weight_decay = Some(num(v, &at)?),
                    "seed" => p.training.seed = Some(num(v, &at)?),
                    _ => return Err(usage(format!("{at}: unknown field {field:?}"))),
                }
            }
        }
    }
    let corpus = corpus.ok_or_else(|| usage(format!("{}: no corpus given", path.display())))?;
    if pending.is_empty() {
        return Err(usage(format!("{}: no configurations", path.display())));
    }
    let configs = pending
        .into_iter()
        .map(|p| build(p, base, default_seed))
        .collect::<Result<_, _>>()?;
    Ok(Manifest {
        corpus,
        folds,
        fold_seed,
        max_folds,
        configs,
    })
}

fn read_table(path: &Path) -> Result<EmbeddingTable, Failure> {
    Ok(EmbeddingTable::load(path).with_context(|| format!("reading {}", path.display()))?)
}

fn build(p: Pending, base: &Path, default_seed: u64) -> Result<ExperimentConfig, Failure> {
    let at = format!("config {:?}", p.name);
    let spec = p.source.ok_or_else(|| usage(format!("{at}: no source")))?;
    let (kind, arg) = spec.split_once(':').unwrap_or((spec.as_str(), ""));
    let (source, preset) = match kind {
        "static" => {
            let table = read_table(&base.join(arg))?;
            let table = if p.standardize { table.standardized() } else { table };
            (EmbeddingSource::Static(table), TrainingConfig::static_vectors())
        }
        "per-token" => {
            let path = base.join(arg);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let vectors = TokenVectors::parse(&text).with_context(|| format!("reading {}", path.display()))?;
            (EmbeddingSource::PerToken(vectors), TrainingConfig::contextual())
        }
        "lookup" => {
            let (dim, init) = match arg.split_once(':') {
                Some((d, file)) => (d, Some(read_table(&base.join(file))?)),
                None => (arg, None),
            };
            let dim = num(dim, &at)?;
            (EmbeddingSource::Lookup { dim, init }, TrainingConfig::static_vectors())
        }
        _ => return Err(usage(format!("{at}: unknown source kind {kind:?}"))),
    };
    let training = p.training.apply(preset, default_seed).map_err(|e| usage(format!("{at}: {e}")))?;
    Ok(ExperimentConfig {
        name: p.name,
        source,
        hidden: p.hidden,
        training,
    })
}

pub fn parse_optimizer(s: &str) -> Option<Optimizer> {
    match s {
        "sgd" => Some(Optimizer::Sgd),
        "adamw" => Some(Optimizer::adamw()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_keep_their_order() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.txt");
        std::fs::write(
            &m,
            "corpus = c.tsv\nconfig.b.source = lookup:4\nconfig.a.source = lookup:6\nconfig.b.epochs = 3\nconfig.a.optimizer = adamw\n",
        )
        .unwrap();
        let got = load(&m, 9).unwrap_or_else(|_| panic!("manifest should load"));
        let names: Vec<&str> = got.configs.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["b", "a"]);
        assert_eq!(got.configs[0].training.max_epochs, 3);
        assert_eq!(got.configs[0].training.seed, 9);
        assert!(matches!(got.configs[1].training.optimizer, Optimizer::AdamW { .. }));
        assert_eq!(got.corpus, dir.path().join("c.tsv"));
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.txt");
        for body in ["corpus = c\nlayers = 2\n", "corpus = c\nconfig.a.depth = 2\n", "corpus = c\n"] {
            std::fs::write(&m, body).unwrap();
            assert!(matches!(load(&m, 1), Err(Failure::Usage(_))), "{body}");
        }
    }
}
