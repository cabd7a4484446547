use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use yidtag::crf::{CrfModel, EmbeddingProvider, TokenVectors, TrainingConfig};
use yidtag::embeddings::{self, ConfusionTable, EmbeddingTable, GloveConfig};
use yidtag::eval::{self, EmbeddingSource, ExperimentConfig, ExperimentOptions, FoldPlan};
use yidtag::romanizer::{
    verify_against_source, AlignConfig, Hardcoded, Lexicon, Overrides, PhoneticRuleSet, RespellTable, Romanizer,
};
use yidtag::script::normalize_unicode;
use yidtag::textpipe::{self, Document, FrequencyTable, IngestMode, QaConfig, Tokenizer};
use yidtag::treebank::{self, Strictness, TagSetRegistry, TaggedSentence};
use yidtag::Inventory;

use crate::config::{usage, Config, Failure};
use crate::manifest::{self, TrainingFlags};
use crate::{Cli, Command, LineIo, TrainArgs};

/// Resolved settings shared by every command.
pub struct Env {
    pub config: Config,
    pub seed: u64,
    pub inventory: Inventory,
    data_dir: Option<PathBuf>,
    tagset: Option<PathBuf>,
    punctuation: Option<PathBuf>,
    confusion: Option<PathBuf>,
}

impl Env {
    pub fn new(cli: &Cli, config: Config) -> Result<Self, Failure> {
        let seed = config.pick(cli.seed, "seed", 1)?;
        let inventory = match config.path(cli.inventory.clone(), "inventory") {
            Some(p) => Inventory::load(&p).with_context(|| format!("reading inventory {}", p.display()))?,
            None => Inventory::builtin().clone(),
        };
        let env = Env {
            data_dir: config.path(cli.data_dir.clone(), "data_dir"),
            tagset: config.path(cli.tagset.clone(), "tagset"),
            punctuation: config.path(cli.punctuation.clone(), "punctuation"),
            confusion: config.path(cli.confusion.clone(), "confusion"),
            config,
            seed,
            inventory,
        };
        for p in [&env.data_dir, &env.tagset, &env.punctuation, &env.confusion].into_iter().flatten() {
            if !p.exists() {
                return Err(usage(format!("{} does not exist", p.display())));
            }
        }
        Ok(env)
    }

    fn romanizer(&self) -> Result<Romanizer, Failure> {
        let inv = &self.inventory;
        Ok(match &self.data_dir {
            Some(dir) => Romanizer::from_dir(inv.clone(), dir)?,
            None => Romanizer::new(
                inv.clone(),
                PhoneticRuleSet::builtin(inv),
                Lexicon::builtin(inv),
                Overrides::builtin(inv),
                RespellTable::builtin(),
                Hardcoded::builtin(inv),
            ),
        })
    }

    fn tokenizer(&self) -> Result<Tokenizer, Failure> {
        Ok(match &self.punctuation {
            Some(p) => Tokenizer::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => Tokenizer::builtin().clone(),
        })
    }

    fn registry(&self) -> Result<TagSetRegistry, Failure> {
        Ok(match &self.tagset {
            Some(p) => TagSetRegistry::parse(&read_file(p)?).with_context(|| format!("reading {}", p.display()))?,
            None => TagSetRegistry::builtin().clone(),
        })
    }

    fn confusion(&self) -> Result<ConfusionTable, Failure> {
        Ok(match &self.confusion {
            Some(p) => ConfusionTable::parse(&read_file(p)?, &self.inventory)
                .map_err(|e| anyhow!("{}: {e}", p.display()))?,
            None => ConfusionTable::builtin(&self.inventory),
        })
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    Ok(std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn is_stdio(path: &Option<PathBuf>) -> bool {
    path.as_deref().map_or(true, |p| p == Path::new("-"))
}

fn input_name(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) if !is_stdio(path) => p.display().to_string(),
        _ => "<stdin>".into(),
    }
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, Failure> {
    Ok(match path {
        Some(p) if !is_stdio(path) => {
            Box::new(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))
        }
        _ => Box::new(BufReader::new(io::stdin())),
    })
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    let mut s = String::new();
    open_input(path)?
        .read_to_string(&mut s)
        .with_context(|| format!("reading {}", input_name(path)))?;
    Ok(s)
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) if !is_stdio(path) => {
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        _ => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let mut out = open_output(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Streams lines through `f`, keeping each line's terminator as it was.
fn map_lines<F>(io: &LineIo, mut f: F) -> Result<(), Failure>
where
    F: FnMut(&str) -> Result<String, String>,
{
    let name = input_name(&io.input);
    let mut input = open_input(&io.input)?;
    let mut out = open_output(&io.output)?;
    let mut buf = String::new();
    let mut n = 0;
    loop {
        buf.clear();
        if input.read_line(&mut buf).with_context(|| format!("reading {name}"))? == 0 {
            break;
        }
        n += 1;
        let (body, end) = match buf.strip_suffix("\r\n") {
            Some(b) => (b, "\r\n"),
            None => match buf.strip_suffix('\n') {
                Some(b) => (b, "\n"),
                None => (buf.as_str(), ""),
            },
        };
        let converted = f(body).map_err(|e| anyhow!("{name}:{n}: {e}"))?;
        out.write_all(converted.as_bytes())?;
        out.write_all(end.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Files named directly, then the files of named directories in name order.
fn expand(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            out.extend(files);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(usage(format!("{} does not exist", p.display())));
        }
    }
    Ok(out)
}

fn read_documents(env: &Env, inputs: &[PathBuf], lossy: bool) -> Result<Vec<Document>, Failure> {
    let mode = if lossy { IngestMode::Lossy } else { IngestMode::Strict };
    let mut docs = Vec::new();
    for p in inputs {
        let (found, dropped) = if p.is_dir() {
            textpipe::read_corpus_dir(p, &env.inventory, mode)?
        } else {
            let (d, dropped) = textpipe::read_corpus_file(p, &env.inventory, mode)?;
            (vec![d], dropped)
        };
        if !dropped.is_empty() {
            log::warn!("{}: dropped {} lines", p.display(), dropped.len());
        }
        docs.extend(found);
    }
    Ok(docs)
}

fn read_tagged(path: &Path) -> Result<Vec<TaggedSentence>, Failure> {
    Ok(treebank::parse_tagged_file(&read_file(path)?).with_context(|| path.display().to_string())?)
}

fn read_token_vectors(path: &Path) -> Result<TokenVectors, Failure> {
    Ok(TokenVectors::parse(&read_file(path)?).with_context(|| path.display().to_string())?)
}

fn read_table(path: &Path) -> Result<EmbeddingTable, Failure> {
    Ok(EmbeddingTable::load(path).with_context(|| format!("reading {}", path.display()))?)
}

fn read_freq(path: &Path) -> Result<FrequencyTable, Failure> {
    Ok(FrequencyTable::from_tsv(&read_file(path)?).with_context(|| path.display().to_string())?)
}

fn training_flags(cfg: &Config, t: TrainArgs) -> Result<TrainingFlags, Failure> {
    Ok(TrainingFlags {
        optimizer: cfg.pick_opt(t.optimizer, "tagger.optimizer")?,
        learning_rate: cfg.pick_opt(t.learning_rate, "tagger.learning_rate")?,
        batch_size: cfg.pick_opt(t.batch_size, "tagger.batch_size")?,
        epochs: cfg.pick_opt(t.epochs, "tagger.epochs")?,
        warmup: cfg.pick_opt(t.warmup, "tagger.warmup")?,
        weight_decay: cfg.pick_opt(t.weight_decay, "tagger.weight_decay")?,
        seed: None,
    })
}

pub fn dispatch(env: &Env, command: Command) -> Result<(), Failure> {
    let inv = &env.inventory;
    let cfg = &env.config;
    match command {
        Command::Normalize(io) => map_lines(&io, |l| Ok(normalize_unicode(l))),
        Command::ToAscii(io) => map_lines(&io, |l| inv.unicode_to_ascii(l).map_err(|e| e.to_string())),
        Command::ToUnicode(io) => map_lines(&io, |l| inv.ascii_to_unicode(l).map_err(|e| e.to_string())),
        Command::Tokenize(io) => {
            let tok = env.tokenizer()?;
            map_lines(&io, |l| Ok(tok.tokenize(l).join(" ")))
        }
        Command::Segment { inputs, lossy, output } => {
            let docs = read_documents(env, &inputs, lossy)?;
            let tok = env.tokenizer()?;
            let sentences: Vec<_> = docs
                .iter()
                .flat_map(|d| textpipe::segment_sentences(&d.lines, &tok))
                .collect();
            let mut out = open_output(&output)?;
            textpipe::write_sentences(&mut out, &sentences)?;
            out.flush()?;
            Ok(())
        }
        Command::Freq { inputs, output } => {
            let texts = if inputs.is_empty() {
                vec![read_input(&None)?]
            } else {
                expand(&inputs)?.iter().map(|p| read_file(p)).collect::<Result<_, _>>()?
            };
            let lists: Vec<Vec<String>> = texts.iter().flat_map(|t| textpipe::parse_sentence_file(t)).collect();
            write_output(&output, &FrequencyTable::from_token_lists(lists.iter().map(Vec::as_slice)).to_tsv())
        }
        Command::Qa { inputs, lossy, output } => {
            let docs = read_documents(env, &inputs, lossy)?;
            let d = QaConfig::default();
            let qa = QaConfig {
                apostrophe_min_count: cfg.pick(None, "qa.apostrophe_min_count", d.apostrophe_min_count)?,
                low_freq_max: cfg.pick(None, "qa.low_freq_max", d.low_freq_max)?,
                neighbor_min_count: cfg.pick(None, "qa.neighbor_min_count", d.neighbor_min_count)?,
                pointed_rate: cfg.pick(None, "qa.pointed_rate", d.pointed_rate)?,
                pointed_min_letters: cfg.pick(None, "qa.pointed_min_letters", d.pointed_min_letters)?,
            };
            let report = textpipe::qa_report(&docs, inv, &env.tokenizer()?, &qa);
            write_output(&output, &report.render())
        }
        Command::Convert { io, pos, routes } => {
            let rom = env.romanizer()?;
            map_lines(&io, |line| {
                let mut parts = Vec::new();
                for word in line.split_whitespace() {
                    let w = match &pos {
                        Some(p) => rom.respell(word, p),
                        None => word,
                    };
                    let r = rom.detransliterate(w, pos.as_deref()).map_err(|e| format!("{word:?}: {e}"))?;
                    for warning in &r.warnings {
                        log::warn!("{warning}");
                    }
                    parts.push(if routes {
                        format!("{word}\t{}\t{}\n", r.script.as_str(), r.route)
                    } else {
                        r.script.into_string()
                    });
                }
                Ok(if routes { parts.concat() } else { parts.join(" ") })
            })
        }
        Command::PrepTreebank {
            inputs,
            lenient,
            stats,
            output,
        } => {
            let mut trees = Vec::new();
            for p in expand(&inputs)? {
                let parsed = treebank::parse_trees(&read_file(&p)?).with_context(|| p.display().to_string())?;
                trees.extend(parsed);
            }
            let strictness = if lenient { Strictness::Lenient } else { Strictness::Strict };
            let (sentences, counts) = treebank::prepare_corpus(&trees, &env.romanizer()?, &env.registry()?, strictness)?;
            let mut out = open_output(&output)?;
            treebank::write_prepared(&mut out, &sentences)?;
            out.flush()?;
            log::info!("{} trees, {} tokens", counts.trees, counts.tokens);
            if let Some(p) = stats {
                std::fs::write(&p, counts.render()).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(())
        }
        Command::TrainEmbed {
            input,
            output,
            dim,
            window,
            min_count,
            iterations,
            x_max,
            alpha,
            learning_rate,
            loss,
        } => {
            let sentences = textpipe::parse_sentence_file(&read_file(&input)?);
            let d = GloveConfig::default();
            let glove = GloveConfig {
                dim: cfg.pick(dim, "embed.dim", d.dim)?,
                iterations: cfg.pick(iterations, "embed.iterations", d.iterations)?,
                x_max: cfg.pick(x_max, "embed.x_max", d.x_max)?,
                alpha: cfg.pick(alpha, "embed.alpha", d.alpha)?,
                learning_rate: cfg.pick(learning_rate, "embed.learning_rate", d.learning_rate)?,
                seed: env.seed,
            };
            let counts = embeddings::count_cooccurrences(
                &sentences,
                cfg.pick(window, "embed.window", 10)?,
                cfg.pick(min_count, "embed.min_count", 1)?,
            );
            let trained = embeddings::train_embeddings(&counts, &glove)?;
            trained
                .table
                .save(&output)
                .with_context(|| format!("writing {}", output.display()))?;
            if let Some(p) = loss {
                let text: String = trained
                    .loss_history
                    .iter()
                    .enumerate()
                    .map(|(i, l)| format!("{}\t{l:e}\n", i + 1))
                    .collect();
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(())
        }
        Command::Neighbors {
            embeddings: table,
            freq,
            k,
            queries,
        } => {
            let table = read_table(&table)?;
            let freq = match freq {
                Some(p) => read_freq(&p)?,
                None => FrequencyTable::new(),
            };
            let k = cfg.pick(k, "neighbors.k", 10)?;
            let queries = if queries.is_empty() {
                read_input(&None)?.split_whitespace().map(String::from).collect()
            } else {
                queries
            };
            let mut out = open_output(&None)?;
            for q in queries {
                let report = embeddings::nearest_neighbors(&table, &q, k, &freq)?;
                writeln!(out, "{}", report.render())?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Variants {
            embeddings: table,
            freq,
            min_cosine,
            max_edit,
            output,
        } => {
            let table = read_table(&table)?;
            let freq = read_freq(&freq)?;
            let found = embeddings::variant_candidates(
                &table,
                &freq,
                inv,
                &env.confusion()?,
                cfg.pick(min_cosine, "variants.min_cosine", 0.5)?,
                cfg.pick(max_edit, "variants.max_edit", 2)?,
            );
            let mut s = String::from("a\tb\tcosine\tedit_distance\tclass\tconfusable\tcount_a\tcount_b\n");
            for v in found {
                s.push_str(&format!(
                    "{}\t{}\t{:.3}\t{}\t{}\t{}\t{}\t{}\n",
                    v.a, v.b, v.cosine, v.edit_distance, v.class, v.confusable, v.count_a, v.count_b
                ));
            }
            write_output(&output, &s)
        }
        Command::TrainTagger {
            train,
            val,
            embeddings: table,
            token_vectors,
            val_token_vectors,
            lookup_dim,
            init,
            standardize,
            hidden,
            training,
            output,
            history,
        } => {
            let train_set = read_tagged(&train)?;
            let val_set = match &val {
                Some(p) => read_tagged(p)?,
                None => Vec::new(),
            };
            let (source, preset) = match (table, token_vectors, lookup_dim) {
                (Some(p), None, None) => {
                    let t = read_table(&p)?;
                    let t = if standardize { t.standardized() } else { t };
                    (EmbeddingSource::Static(t), TrainingConfig::static_vectors())
                }
                (None, Some(p), None) => {
                    let mut blocks = read_token_vectors(&p)?;
                    if let Some(vp) = &val_token_vectors {
                        let v = read_token_vectors(vp)?;
                        let all = (0..blocks.len())
                            .filter_map(|i| blocks.sentence(i).cloned())
                            .chain((0..v.len()).filter_map(|i| v.sentence(i).cloned()))
                            .collect();
                        blocks = TokenVectors::new(blocks.dim(), all);
                    } else if !val_set.is_empty() {
                        return Err(usage("--val with --token-vectors needs --val-token-vectors"));
                    }
                    (EmbeddingSource::PerToken(blocks), TrainingConfig::contextual())
                }
                (None, None, dim) => {
                    let dim = cfg.pick(dim, "embed.dim", 100)?;
                    let init = init.as_deref().map(read_table).transpose()?;
                    (EmbeddingSource::Lookup { dim, init }, TrainingConfig::static_vectors())
                }
                _ => return Err(usage("give at most one of --embeddings, --token-vectors, --lookup-dim")),
            };
            let training = training_flags(cfg, training)?
                .apply(preset, env.seed)
                .map_err(usage)?;
            let config = ExperimentConfig {
                name: output.display().to_string(),
                source,
                hidden: cfg.pick_opt(hidden, "tagger.hidden")?,
                training,
            };
            let n = train_set.len();
            let corpus: Vec<TaggedSentence> = train_set.into_iter().chain(val_set).collect();
            let train_ids: Vec<usize> = (0..n).collect();
            let val_ids: Vec<usize> = (n..corpus.len()).collect();
            let tags = eval::corpus_tags(&corpus);
            let (model, log) = eval::train_tagger(&corpus, &tags, &train_ids, &val_ids, &config, inv.checksum())?;
            model
                .save(&output)
                .with_context(|| format!("writing {}", output.display()))?;
            match history {
                Some(p) => std::fs::write(&p, log.render()).with_context(|| format!("writing {}", p.display()))?,
                None => log::info!("best epoch {}", log.best_epoch),
            }
            Ok(())
        }
        Command::Tag {
            model,
            io,
            embeddings: table,
            token_vectors,
        } => {
            let model = CrfModel::load(&model).with_context(|| format!("reading {}", model.display()))?;
            let sentences = textpipe::parse_sentence_file(&read_input(&io.input)?);
            let table = table.as_deref().map(read_table).transpose()?;
            let vectors = token_vectors.as_deref().map(read_token_vectors).transpose()?;
            let provider = match (&table, &vectors) {
                (Some(t), None) => EmbeddingProvider::Static(t),
                (None, Some(v)) => EmbeddingProvider::PerToken(v),
                (None, None) => EmbeddingProvider::Lookup,
                _ => return Err(usage("give at most one of --embeddings, --token-vectors")),
            };
            let tagged = model.tag(&sentences, &provider, inv)?;
            let mut out = open_output(&io.output)?;
            for sent in tagged {
                for t in sent {
                    writeln!(out, "{}\t{}", t.word, t.tag)?;
                }
                writeln!(out)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::MakeFolds { input, output } => {
            let corpus = read_tagged(&input)?;
            let plan = FoldPlan::for_sentences(&corpus, cfg.pick(None, "folds.seed", env.seed)?)?;
            write_output(&output, &plan.to_tsv())
        }
        Command::Evaluate { manifest: path, output } => {
            let m = manifest::load(&path, env.seed)?;
            let corpus = read_tagged(&m.corpus)?;
            let plan = match &m.folds {
                Some(p) => FoldPlan::from_tsv(&read_file(p)?).with_context(|| p.display().to_string())?,
                None => FoldPlan::for_sentences(&corpus, m.fold_seed.unwrap_or(env.seed))?,
            };
            std::fs::create_dir_all(&output).with_context(|| format!("creating {}", output.display()))?;
            let opts = ExperimentOptions {
                max_folds: m.max_folds,
                out_dir: Some(output.join("models")),
                inventory_checksum: inv.checksum().to_string(),
            };
            let report = eval::run_experiment(&corpus, &plan, &m.configs, &opts)?;
            let write = |name: &str, text: &str| -> Result<(), Failure> {
                let p = output.join(name);
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                Ok(())
            };
            write("accuracy.txt", &report.render_matrix())?;
            write("accuracy.tsv", &report.matrix_tsv())?;
            write("folds.tsv", &report.fold_tsv())?;
            write("plan.tsv", &plan.to_tsv())?;
            write("manifest.txt", &report.manifest(&corpus, &plan, &m.configs))?;
            for (i, c) in report.configs.iter().enumerate() {
                write(&format!("tags.{i}.test.txt"), &format!("# {}\n{}", c.name, c.test.render()))?;
                write(&format!("tags.{i}.test.tsv"), &c.test.to_tsv())?;
                write(&format!("tags.{i}.val.tsv"), &c.val.to_tsv())?;
            }
            write_output(&None, &report.render_matrix())
        }
        Command::Align {
            converted,
            source,
            output,
        } => {
            let tokens = |p: &Path| -> Result<Vec<String>, Failure> {
                Ok(read_file(p)?.split_whitespace().map(String::from).collect())
            };
            let (a, b) = (tokens(&converted)?, tokens(&source)?);
            let d = AlignConfig::default();
            let config = AlignConfig {
                match_score: cfg.pick(None, "align.match", d.match_score)?,
                mismatch_score: cfg.pick(None, "align.mismatch", d.mismatch_score)?,
                gap_score: cfg.pick(None, "align.gap", d.gap_score)?,
                soft_threshold: cfg.pick(None, "align.soft_threshold", d.soft_threshold)?,
            };
            let report = verify_against_source(inv, &a, &b, &config);
            write_output(&output, &report.render(&a, &b))
        }
    }
}
