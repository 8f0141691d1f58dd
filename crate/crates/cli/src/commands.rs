use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use compdist::cooccurrence::{
    count_cooccurrences, frequency_ranking, project_space, select_basis, weight_lmi, weight_ppmi, BasisSpec,
};
use compdist::corpus::read_word_list;
use compdist::embeddings::{read_text, read_word2vec_binary, read_word2vec_binary_filtered, write_text, write_word2vec_binary};
use compdist::eval::datasets::{check_scale, read_dialogue_csv, read_disambiguation, read_id_list, read_paraphrase, read_sentence_pairs};
use compdist::eval::dialogue::{group_utterances, split_by_dialogue};
use compdist::eval::significance::{compare_reports, ALPHA};
use compdist::eval::{
    eval_dialogue_acts, eval_disambiguation, eval_paraphrase, eval_sentence_similarity, DialogueOptions, EvaluationReport,
    Task, Utterance,
};
use compdist::sgns::{train, SgnsConfig};
use compdist::{Error, LemmaMap, LookupPolicy, Pos, Provenance, SemanticSpace, TokenStream, TripleStore};

use crate::error::{at, CliError, CliResult};
use crate::{
    BuildSpaceArgs, Cli, Command, CompareArgs, CorpusArgs, CorpusFormat, EvalArgs, ImportArgs, SpaceFormat,
    TrainSgnsArgs, Weighting,
};

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::BuildSpace(a) => build_space(a),
        Command::TrainSgns(a) => train_sgns(a, cli.seed, cli.workers),
        Command::ImportEmbeddings(a) => import(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a, cli.seed),
    }
}

/// Opens an input file. A path that does not exist is a usage error.
fn open(path: &Path, what: &str) -> CliResult<BufReader<File>> {
    if !path.exists() {
        return Err(CliError::Usage(format!("{what} '{}' does not exist", path.display())));
    }
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

fn read_corpus(args: &CorpusArgs) -> CliResult<TokenStream> {
    let reader = open(&args.corpus, "corpus")?;
    let stream = match args.corpus_format {
        CorpusFormat::Tagged => TokenStream::read(reader).map_err(at(&args.corpus))?,
        CorpusFormat::Plain => {
            let text = std::io::read_to_string(reader)?;
            TokenStream::from_plain_text(&text)
        }
    };
    if stream.is_empty() {
        return Err(at(&args.corpus)(Error::EmptyStream));
    }
    Ok(stream)
}

fn write_space(space: &SemanticSpace, path: &Path, format: SpaceFormat) -> CliResult<()> {
    let mut w = create(path)?;
    match format {
        SpaceFormat::Text => write_text(space, &mut w),
        SpaceFormat::Binary => write_word2vec_binary(space, &mut w),
    }
    .map_err(at(path))?;
    w.flush()?;
    Ok(())
}

fn space_format(path: &Path, explicit: Option<SpaceFormat>) -> SpaceFormat {
    explicit.unwrap_or_else(|| {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin")) {
            SpaceFormat::Binary
        } else {
            SpaceFormat::Text
        }
    })
}

/// Loads a space, keeping only `keep` words when given (binary inputs can be
/// far larger than memory as `f64`).
fn load_space(
    path: &Path,
    format: Option<SpaceFormat>,
    keep: Option<&HashSet<String>>,
    provenance: Provenance,
) -> CliResult<SemanticSpace> {
    let reader = open(path, "space")?;
    let space = match space_format(path, format) {
        SpaceFormat::Binary => match keep {
            Some(words) => read_word2vec_binary_filtered(reader, |w| words.contains(w)),
            None => read_word2vec_binary(reader),
        },
        SpaceFormat::Text => read_text(reader, provenance),
    }
    .map_err(at(path))?;
    let space = match (keep, space_format(path, format)) {
        (Some(words), SpaceFormat::Text) => {
            let rows: Vec<usize> = (0..space.len()).filter(|&i| words.contains(&space.words()[i])).collect();
            SemanticSpace::new(
                rows.iter().map(|&i| space.words()[i].clone()).collect(),
                space.dim(),
                rows.iter().flat_map(|&i| space.row_at(i).iter().copied()).collect(),
                space.provenance(),
            )?
        }
        _ => space,
    };
    Ok(space)
}

fn vocabulary(stream: &TokenStream, args: &CorpusArgs) -> Vec<String> {
    let field = args.field.into();
    frequency_ranking(stream.sentences().flatten().map(|t| t.form(field)))
        .into_iter()
        .filter(|(_, n)| *n >= args.min_count)
        .map(|(w, _)| w)
        .collect()
}

fn build_space(a: &BuildSpaceArgs) -> CliResult<()> {
    let stream = read_corpus(&a.corpus)?;
    let field = a.corpus.field.into();
    let mut spec = BasisSpec::new(a.basis_size);
    spec.field = field;
    spec.skip_top = a.skip_top;
    if a.content_only {
        spec.pos_filter = Some(Pos::content());
    }
    if let Some(p) = &a.stop_words {
        spec.stop_words = read_word_list(open(p, "stop-word list")?).map_err(at(p))?;
    }
    let basis = select_basis(&stream, &spec)?;
    let targets = match &a.targets {
        Some(p) => {
            let mut t: Vec<String> = read_word_list(open(p, "target list")?).map_err(at(p))?.into_iter().collect();
            t.sort();
            t
        }
        None => vocabulary(&stream, &a.corpus),
    };
    let counts = count_cooccurrences(&stream, &targets, &basis, a.window, field)?;
    let mut space = match a.weighting {
        Weighting::Ppmi => weight_ppmi(&counts)?,
        Weighting::Lmi => weight_lmi(&counts)?,
    };
    if let Some(k) = a.svd_dim {
        space = project_space(&space, k, a.normalize)?;
    } else if a.normalize {
        space = space.normalized();
    }
    write_space(&space, &a.output, a.format)?;
    println!("vocab {}", space.len());
    println!("dim {}", space.dim());
    println!(
        "recipe {} window={} basis={} skip_top={} content_only={} svd={} normalize={}",
        match a.weighting {
            Weighting::Ppmi => "ppmi",
            Weighting::Lmi => "lmi",
        },
        a.window,
        basis.len(),
        a.skip_top,
        a.content_only,
        a.svd_dim.map_or("none".to_string(), |k| k.to_string()),
        a.normalize
    );
    Ok(())
}

fn train_sgns(a: &TrainSgnsArgs, seed: u64, workers: usize) -> CliResult<()> {
    let stream = read_corpus(&a.corpus)?;
    let config = SgnsConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        seed,
        min_count: a.corpus.min_count,
        subsample: a.subsample,
        parallel: a.hogwild,
        workers: if workers == 0 { rayon::current_num_threads() } else { workers },
        field: a.corpus.field.into(),
        ..SgnsConfig::default()
    };
    let run = train(&stream, &config)?;
    let space = run.space();
    write_space(&space, &a.output, a.format)?;
    println!("vocab {}", space.len());
    println!("dim {}", space.dim());
    for (i, loss) in run.epoch_losses.iter().enumerate() {
        println!("epoch {} loss {loss:.6}", i + 1);
    }
    Ok(())
}

fn import(a: &ImportArgs) -> CliResult<()> {
    let keep = match &a.vocab {
        Some(p) => Some(read_word_list(open(p, "vocabulary list")?).map_err(at(p))?),
        None => None,
    };
    let space = load_space(&a.input, a.input_format, keep.as_ref(), Provenance::Neural)?;
    write_space(&space, &a.output, a.format)?;
    println!("vocab {}", space.len());
    println!("dim {}", space.dim());
    Ok(())
}

fn require<'p>(path: &'p Option<std::path::PathBuf>, flag: &str, task: Task) -> CliResult<&'p Path> {
    path.as_deref()
        .ok_or_else(|| CliError::Usage(format!("task {task} needs --{flag}")))
}

fn parse_scale(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("--scale expects LO,HI, got '{s}'"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Every form a lookup may try for `words`.
fn lookup_forms<'a, I: IntoIterator<Item = &'a str>>(words: I, lemmas: Option<&LemmaMap>) -> HashSet<String> {
    let mut out = HashSet::new();
    for w in words {
        out.insert(w.to_string());
        out.insert(w.to_lowercase());
        if let Some(l) = lemmas.and_then(|m| m.get(w)) {
            out.insert(l.to_string());
        }
    }
    out
}

enum Loaded {
    Disambiguation(Vec<compdist::eval::DisambigItem>),
    Sentences(Vec<compdist::eval::SentencePairItem>),
    Paraphrase(Vec<compdist::eval::ParaphrasePair>, Vec<compdist::eval::ParaphrasePair>),
    Dialogue(Vec<Utterance>, Vec<Utterance>),
}

fn eval(a: &EvalArgs) -> CliResult<()> {
    let task = a.task;
    let mut options = DialogueOptions {
        k: a.k,
        svd_dim: (!a.no_svd).then_some(a.svd_dim),
        ..DialogueOptions::default()
    };
    if let Some(m) = &a.markers {
        options.markers = m.split(',').map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty()).collect();
    }

    let data = match task {
        Task::Disambiguation => {
            let p = require(&a.dataset, "dataset", task)?;
            Loaded::Disambiguation(read_disambiguation(open(p, "dataset")?).map_err(at(p))?)
        }
        Task::SentenceSimilarity => {
            let p = require(&a.dataset, "dataset", task)?;
            Loaded::Sentences(read_sentence_pairs(open(p, "dataset")?).map_err(at(p))?)
        }
        Task::Paraphrase => {
            let (tr, te) = (require(&a.train, "train", task)?, require(&a.test, "test", task)?);
            Loaded::Paraphrase(
                read_paraphrase(open(tr, "training set")?).map_err(at(tr))?,
                read_paraphrase(open(te, "test set")?).map_err(at(te))?,
            )
        }
        Task::DialogueActs => {
            let p = require(&a.dialogues, "dialogues", task)?;
            let tr = require(&a.train_ids, "train-ids", task)?;
            let te = require(&a.test_ids, "test-ids", task)?;
            let records = read_dialogue_csv(open(p, "dialogue file")?).map_err(at(p))?;
            let train_ids = read_id_list(open(tr, "id list")?).map_err(at(tr))?;
            let test_ids = read_id_list(open(te, "id list")?).map_err(at(te))?;
            let (train, test) = split_by_dialogue(group_utterances(&records, &options), &train_ids, &test_ids);
            Loaded::Dialogue(train, test)
        }
    };
    if let Some(s) = &a.scale {
        let (lo, hi) = parse_scale(s)?;
        match &data {
            Loaded::Disambiguation(items) => check_scale(items.iter().map(|i| &i.judgement), lo, hi)?,
            Loaded::Sentences(items) => check_scale(items.iter().map(|i| &i.judgement), lo, hi)?,
            _ => return Err(CliError::Usage(format!("--scale does not apply to task {task}"))),
        }
    }

    let lemma_map = match &a.lemma_map {
        Some(p) => Some(LemmaMap::read(open(p, "lemma map")?).map_err(at(p))?),
        None => None,
    };
    let triples = match &a.triples {
        Some(p) => Some(TripleStore::read(open(p, "triple file")?).map_err(at(p))?),
        None => None,
    };

    let mut needed: Vec<&str> = match &data {
        Loaded::Disambiguation(items) => items
            .iter()
            .flat_map(|i| [&i.verb, &i.subject, &i.object, &i.landmark])
            .map(String::as_str)
            .collect(),
        Loaded::Sentences(items) => items
            .iter()
            .flat_map(|i| [&i.first, &i.second])
            .flat_map(|s| [&s.subject, &s.verb, &s.object])
            .map(String::as_str)
            .collect(),
        Loaded::Paraphrase(tr, te) => tr
            .iter()
            .chain(te)
            .flat_map(|p| p.sentence1.iter().chain(&p.sentence2))
            .map(String::as_str)
            .collect(),
        Loaded::Dialogue(tr, te) => tr.iter().chain(te).flat_map(|u| &u.tokens).map(String::as_str).collect(),
    };
    if let Some(t) = &triples {
        needed.extend(t.verbs().flat_map(|v| t.triples(v)).flat_map(|(s, o, _)| [s.as_str(), o.as_str()]));
    }
    let keep = lookup_forms(needed, lemma_map.as_ref());
    let space = load_space(&a.space, a.space_format, Some(&keep), Provenance::Neural)?;

    let lookup = LookupPolicy {
        lemma_map,
        lemmatize: a.lemmatize,
        case_fold: a.case_fold,
    };
    let method = a.method;
    let report = match &data {
        Loaded::Disambiguation(items) => eval_disambiguation(items, &space, method, triples.as_ref(), &lookup)?,
        Loaded::Sentences(items) => eval_sentence_similarity(items, &space, method, triples.as_ref(), &lookup)?,
        Loaded::Paraphrase(tr, te) => eval_paraphrase(tr, te, &space, method, &lookup)?,
        Loaded::Dialogue(tr, te) => eval_dialogue_acts(tr, te, &space, method, &lookup, &options)?,
    };
    let space_id = a.space_id.clone().unwrap_or_else(|| {
        a.space
            .file_name()
            .map_or_else(|| "unnamed".into(), |n| n.to_string_lossy().into_owned())
    });
    let report = report.with_space_id(space_id);

    match &a.output {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(report.to_key_value().as_bytes())?;
            w.flush()?;
            print!("{}", report.to_table());
        }
        None => {
            print!("{}", report.to_key_value());
            eprint!("{}", report.to_table());
        }
    }
    Ok(())
}

fn read_report(path: &Path) -> CliResult<EvaluationReport> {
    let text = std::io::read_to_string(open(path, "report")?)?;
    EvaluationReport::parse(&text).map_err(at(path))
}

fn compare(a: &CompareArgs, seed: u64) -> CliResult<()> {
    let (ra, rb) = (read_report(&a.report_a)?, read_report(&a.report_b)?);
    if ra.task != rb.task {
        return Err(CliError::Usage(format!(
            "cannot compare a {} report with a {} report",
            ra.task, rb.task
        )));
    }
    let c = compare_reports(&ra, &rb, a.iterations, seed)?;
    println!("task {}", ra.task);
    println!("test {}", c.test);
    println!("statistic {:?}", c.statistic);
    println!("p_value {:?}", c.p_value);
    println!("items {}", c.items);
    println!("alpha {ALPHA:?}");
    println!(
        "verdict {}",
        if c.significant(ALPHA) {
            "significant"
        } else {
            "not significant"
        }
    );
    Ok(())
}
