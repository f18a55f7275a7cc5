use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use ner_core::corpus::{
    corpus_stats, lint_final_period, parse_conll, repair_bio, serialize_conll, split_holdout, split_kfold, validate_bio, Corpus,
    Label, Sentence,
};
use ner_core::crf::{train_crf_with_summary, CrfError, Termination, TrainConfig};
use ner_core::eval::{
    cohen_kappa, comparison_ndjson, cross_validate, evaluate, ndjson, paired_ttest, report_header, CvReport, EvalMode, TagReport,
    TTest,
};
use ner_core::features::{token_features, FeatureValue};
use ner_core::model_file::{peek_kind, ModelKind};
use ner_core::preprocess::{preprocess, PreprocessConfig, EXTENDED_ARABIC_INDIC_DIGITS};
use ner_core::svm::{train_svm, SvmConfig, SvmError};
use ner_core::{CrfModel, LinearModel};
use serde_json::json;

use crate::{CliError, Command, Decode, Digits, Format, Hyper, Mode, ModelType, RunConfig, Scoring};

pub(crate) fn dispatch(command: Command, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Preprocess { input, output, sentences, digits, keep_latin } => {
            cmd_preprocess(&input, output.as_deref(), sentences, digits, keep_latin, out)
        }
        Command::Stats { corpus } => {
            let d = corpus_stats(&load_corpus(&corpus)?);
            emit(out, &pick(config.format, d.to_table(), d.to_ndjson()))
        }
        Command::Validate { corpus, repair, output, lint } => cmd_validate(&corpus, repair, output.as_deref(), lint, config, out),
        Command::Split { corpus, split, k, seed, out_dir } => cmd_split(&corpus, split, k, seed.unwrap_or(config.seed), &out_dir, config, out),
        Command::Train { model, train, model_file, hyper } => cmd_train(model, &train, &model_file, &hyper, config, out),
        Command::Predict { model_file, test, output, decode } => {
            let model = Trained::load(&model_file)?;
            let corpus = load_corpus(&test)?;
            let text = serialize_conll(&corpus.with_tags(&model.tag(&corpus, &decode, config)));
            write_or_emit(output.as_deref(), &text, out)
        }
        Command::Evaluate { test, pred, model_file, decode, scoring } => {
            let gold = load_corpus(&test)?;
            let tags = match (pred, model_file) {
                (Some(pred), _) => load_corpus(&pred)?.tag_sequences(),
                (None, Some(model)) => Trained::load(&model)?.tag(&gold, &decode, config),
                (None, None) => return Err(CliError::Usage("evaluate needs --pred or --model-file".into())),
            };
            let report = score(&gold, &tags, &scoring, config)?;
            emit(out, &render_tags(&report, config.format))
        }
        Command::Holdout { model, train, split, seed, hyper, decode, scoring } => {
            let corpus = load_corpus(&train)?;
            let (train, test) =
                split_holdout(&corpus, split.unwrap_or(config.split), seed.unwrap_or(config.seed)).map_err(data)?;
            let trained = Trained::fit(model, &train, &hyper, config)?.0;
            let report = score(&test, &trained.tag(&test, &decode, config), &scoring, config)?;
            emit(out, &render_tags(&report, config.format))
        }
        Command::Crossval { model, train, k, seed, hyper, decode, scoring } => {
            let corpus = load_corpus(&train)?;
            let report = crossval(model, &corpus, k.unwrap_or(config.k), seed.unwrap_or(config.seed), &hyper, &decode, &scoring, config)?;
            emit(out, &pick(config.format, report.to_table(), report.to_ndjson()))
        }
        Command::Compare { train, k, seed, hyper, decode, scoring } => {
            let corpus = load_corpus(&train)?;
            let (k, seed) = (k.unwrap_or(config.k), seed.unwrap_or(config.seed));
            let crf = crossval(ModelType::Crf, &corpus, k, seed, &hyper, &decode, &scoring, config)?;
            let svm = crossval(ModelType::Svm, &corpus, k, seed, &hyper, &decode, &scoring, config)?;
            let test = paired_ttest(&crf.fold_f1(), &svm.fold_f1()).map_err(data)?;
            let text = match config.format {
                Format::Table => comparison_table(&crf, &svm, &test),
                Format::Structured => comparison_ndjson(("crf", "svm"), &crf, &svm, &test),
            };
            emit(out, &text)
        }
        Command::Iaa { first, second } => cmd_iaa(&first, &second, config, out),
        Command::Features { text, position, window } => {
            cmd_features(&text, position, window.unwrap_or(config.crf.features.window), config, out)
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn pick(format: Format, table: String, structured: String) -> String {
    match format {
        Format::Table => table,
        Format::Structured => structured,
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("writing output: {e}")))
}

fn write_or_emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => emit(out, text),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    let text = read(path)?;
    let corpus = parse_conll(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(corpus.with_provenance(path))
}

/// 1-based file line of every token, per sentence.
fn token_lines(text: &str) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !out.last().expect("never empty").is_empty() {
                out.push(Vec::new());
            }
        } else {
            out.last_mut().expect("never empty").push(i + 1);
        }
    }
    if out.last().is_some_and(Vec::is_empty) {
        out.pop();
    }
    out
}

fn crf_config(hyper: &Hyper, config: &RunConfig) -> TrainConfig {
    let mut c = config.crf;
    c.l1 = hyper.l1.unwrap_or(c.l1);
    c.l2 = hyper.l2.unwrap_or(c.l2);
    c.max_iterations = hyper.max_iter.unwrap_or(c.max_iterations);
    c.features.window = hyper.window.unwrap_or(c.features.window);
    c
}

fn svm_config(hyper: &Hyper, config: &RunConfig) -> SvmConfig {
    let mut c = config.svm;
    c.c = hyper.c.unwrap_or(c.c);
    c.features.window = hyper.window.unwrap_or(c.features.window);
    c
}

enum Trained {
    Crf(CrfModel),
    Svm(LinearModel),
}

/// What training reports besides the model.
struct TrainInfo {
    iterations: Option<usize>,
    termination: Option<Termination>,
    objective: Option<f64>,
}

impl Trained {
    fn fit(kind: ModelType, corpus: &Corpus, hyper: &Hyper, config: &RunConfig) -> Result<(Trained, TrainInfo), CliError> {
        match kind {
            ModelType::Crf => {
                let cfg = crf_config(hyper, config);
                if !(cfg.l1 >= 0.0 && cfg.l2 >= 0.0) {
                    return Err(CliError::Usage(format!("penalties must be non-negative (l1 = {}, l2 = {})", cfg.l1, cfg.l2)));
                }
                let (model, summary) = train_crf_with_summary(corpus, &cfg).map_err(|e| match e {
                    CrfError::Optimizer(e) => CliError::Numerical(e.to_string()),
                    e => data(e),
                })?;
                let info = TrainInfo {
                    iterations: Some(summary.iterations),
                    termination: Some(summary.termination),
                    objective: summary.trace.last().copied(),
                };
                Ok((Trained::Crf(model), info))
            }
            ModelType::Svm => {
                let model = train_svm(corpus, &svm_config(hyper, config)).map_err(|e| match e {
                    SvmError::InvalidC(_) => CliError::Usage(e.to_string()),
                    e => data(e),
                })?;
                Ok((Trained::Svm(model), TrainInfo { iterations: None, termination: None, objective: None }))
            }
        }
    }

    fn load(path: &Path) -> Result<Trained, CliError> {
        let context = |e: ner_core::model_file::ModelFileError| CliError::Data(format!("{}: {e}", path.display()));
        Ok(match peek_kind(path).map_err(context)? {
            ModelKind::Crf => Trained::Crf(CrfModel::load(path).map_err(context)?),
            ModelKind::Svm => Trained::Svm(LinearModel::load(path).map_err(context)?),
        })
    }

    fn save(&self, path: &Path) -> Result<(), CliError> {
        match self {
            Trained::Crf(m) => m.save(path),
            Trained::Svm(m) => m.save(path),
        }
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    fn tag(&self, corpus: &Corpus, decode: &Decode, config: &RunConfig) -> Vec<Vec<Label>> {
        match self {
            Trained::Crf(m) => m.tag_corpus(corpus, decode.constrain_bio || config.constrain_bio),
            Trained::Svm(m) => m.tag_corpus(corpus, decode.repair_bio || config.repair_bio),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Trained::Crf(_) => "crf",
            Trained::Svm(_) => "svm",
        }
    }

    fn num_features(&self) -> usize {
        match self {
            Trained::Crf(m) => m.index().len(),
            Trained::Svm(m) => m.index().len(),
        }
    }
}

fn score(gold: &Corpus, pred: &[Vec<Label>], scoring: &Scoring, config: &RunConfig) -> Result<TagReport, CliError> {
    let mode = match scoring.mode {
        Mode::Token => EvalMode::Token,
        Mode::Span => EvalMode::Span,
    };
    evaluate(gold, pred, mode, scoring.include_o || config.include_o).map_err(data)
}

fn render_tags(report: &TagReport, format: Format) -> String {
    pick(format, report.to_table(), report.to_ndjson())
}

#[allow(clippy::too_many_arguments)]
fn crossval(
    kind: ModelType,
    corpus: &Corpus,
    k: usize,
    seed: u64,
    hyper: &Hyper,
    decode: &Decode,
    scoring: &Scoring,
    config: &RunConfig,
) -> Result<CvReport, CliError> {
    if scoring.mode == Mode::Span {
        return Err(CliError::Usage("cross-validation reports token-level scores only".into()));
    }
    // keep the category of the first fold failure; cross_validate only sees its message
    let failure: Mutex<Option<CliError>> = Mutex::new(None);
    let result = cross_validate(corpus, k, seed, scoring.include_o || config.include_o, |train, test| {
        match Trained::fit(kind, train, hyper, config) {
            Ok((model, _)) => Ok(model.tag(test, decode, config)),
            Err(e) => {
                let message = e.to_string();
                failure.lock().expect("not poisoned").get_or_insert(e);
                Err(message)
            }
        }
    });
    result.map_err(|e| failure.into_inner().expect("not poisoned").unwrap_or_else(|| data(e)))
}

fn comparison_table(crf: &CvReport, svm: &CvReport, test: &TTest) -> String {
    let mut out = format!("{:<6}  {:>9}  {:>9}\n", "Fold", "CRF F1", "SVM F1");
    for (i, (a, b)) in crf.fold_f1().iter().zip(svm.fold_f1()).enumerate() {
        out.push_str(&format!("{:<6}  {a:>9.4}  {b:>9.4}\n", i + 1));
    }
    out.push_str(&format!("{:<6}  {:>9.4}  {:>9.4}\n", "Mean", crf.mean.f1, svm.mean.f1));
    out.push_str(&format!("{:<6}  {:>9.4}  {:>9.4}\n", "Std", crf.std.f1, svm.std.f1));
    out.push_str(&format!("Paired t-test: t = {:.4}, df = {}, p = {:.3e}\n", test.t, test.df, test.p));
    out
}

fn cmd_preprocess(
    input: &Path,
    output: Option<&Path>,
    sentences: bool,
    digits: Digits,
    keep_latin: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let raw = read(input)?;
    let mut config = PreprocessConfig { strip_latin: !keep_latin, ..PreprocessConfig::default() };
    if digits == Digits::Extended {
        config = config.with_digit_map(EXTENDED_ARABIC_INDIC_DIGITS).expect("digit glyphs are distinct");
    }
    let tokenized = preprocess(&raw, &config);
    let text = if sentences {
        tokenized.iter().map(|words| format!("{}\n", words.join(" "))).collect()
    } else {
        let sentences = tokenized.iter().map(|w| Sentence::untagged(w)).collect::<Result<Vec<_>, _>>().map_err(data)?;
        serialize_conll(&Corpus::new(sentences))
    };
    write_or_emit(output, &text, out)
}

fn cmd_validate(
    path: &Path,
    repair: bool,
    output: Option<&Path>,
    lint: bool,
    config: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let text = read(path)?;
    let corpus = parse_conll(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let lines = token_lines(&text);
    let violations = validate_bio(&corpus);
    let lints = if lint { lint_final_period(&corpus) } else { Vec::new() };

    if repair {
        let fixed = serialize_conll(&repair_bio(&corpus));
        return write_or_emit(output, &fixed, out);
    }

    let file = path.display();
    let report = match config.format {
        Format::Table => {
            let mut s = String::new();
            for v in &violations {
                s.push_str(&format!("{file}:{}: {}\n", lines[v.sentence][v.token], v.description));
            }
            for &i in &lints {
                let last = *lines[i].last().expect("sentences are non-empty");
                s.push_str(&format!("{file}:{last}: warning: sentence does not end with \". O\"\n"));
            }
            s.push_str(&format!("{} violation(s), {} warning(s)\n", violations.len(), lints.len()));
            s
        }
        Format::Structured => {
            let head = report_header("validate", json!({ "violations": violations.len(), "warnings": lints.len() }));
            let vs = violations.iter().map(|v| {
                json!({
                    "record": "violation",
                    "line": lines[v.sentence][v.token],
                    "sentence": v.sentence + 1,
                    "token": v.token + 1,
                    "description": v.description,
                })
            });
            let ws = lints.iter().map(|&i| {
                json!({ "record": "warning", "line": lines[i].last(), "sentence": i + 1, "description": "sentence does not end with \". O\"" })
            });
            ndjson(std::iter::once(head).chain(vs).chain(ws))
        }
    };
    emit(out, &report)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{file}: {} IOB2 violation(s)", violations.len())))
    }
}

fn cmd_split(
    path: &Path,
    split: Option<f64>,
    k: Option<usize>,
    seed: u64,
    out_dir: &Path,
    config: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let corpus = load_corpus(path)?;
    let parts: Vec<(PathBuf, Corpus)> = match k {
        Some(k) => split_kfold(&corpus, k, seed)
            .map_err(data)?
            .into_iter()
            .enumerate()
            .flat_map(|(i, (train, test))| {
                [
                    (out_dir.join(format!("fold-{:02}-train.conll", i + 1)), train),
                    (out_dir.join(format!("fold-{:02}-test.conll", i + 1)), test),
                ]
            })
            .collect(),
        None => {
            let (train, test) = split_holdout(&corpus, split.unwrap_or(config.split), seed).map_err(data)?;
            vec![(out_dir.join("train.conll"), train), (out_dir.join("test.conll"), test)]
        }
    };
    fs::create_dir_all(out_dir).map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    for (p, c) in &parts {
        write_or_emit(Some(p), &serialize_conll(c), out)?;
    }
    let names = |p: &PathBuf| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let text = match config.format {
        Format::Table => parts.iter().map(|(p, c)| format!("{}  {} sentences\n", p.display(), c.len())).collect(),
        Format::Structured => ndjson(
            std::iter::once(report_header("split", json!({ "seed": seed, "files": parts.len() })))
                .chain(parts.iter().map(|(p, c)| json!({ "record": "file", "name": names(p), "sentences": c.len(), "tokens": c.token_count() }))),
        ),
    };
    emit(out, &text)
}

fn cmd_train(
    kind: ModelType,
    train: &Path,
    model_file: &Path,
    hyper: &Hyper,
    config: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let corpus = load_corpus(train)?;
    let (model, info) = Trained::fit(kind, &corpus, hyper, config)?;
    model.save(model_file)?;
    let termination = info.termination.map(|t| format!("{t:?}").to_lowercase());
    let text = match config.format {
        Format::Table => {
            let mut s = format!(
                "Trained {} on {} sentences ({} tokens, {} features)\n",
                model.name(),
                corpus.len(),
                corpus.token_count(),
                model.num_features()
            );
            if let (Some(it), Some(t), Some(f)) = (info.iterations, &termination, info.objective) {
                s.push_str(&format!("{it} iterations, {t}, objective {f:.6}\n"));
            }
            s
        }
        Format::Structured => ndjson([
            report_header("train", json!({ "model": model.name() })),
            json!({
                "record": "summary",
                "sentences": corpus.len(),
                "tokens": corpus.token_count(),
                "features": model.num_features(),
                "iterations": info.iterations,
                "termination": termination,
                "objective": info.objective,
            }),
        ]),
    };
    emit(out, &text)
}

fn cmd_iaa(first: &Path, second: &Path, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (a, b) = (load_corpus(first)?, load_corpus(second)?);
    if a.len() != b.len() {
        return Err(CliError::Data(format!(
            "{} has {} sentences but {} has {}",
            first.display(),
            a.len(),
            second.display(),
            b.len()
        )));
    }
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    for (i, (sa, sb)) in a.sentences().iter().zip(b.sentences()).enumerate() {
        if sa.surfaces() != sb.surfaces() {
            return Err(CliError::Data(format!("sentence {} differs in its tokens between the two files", i + 1)));
        }
        ta.extend(sa.tags());
        tb.extend(sb.tags());
    }
    let k = cohen_kappa(&ta, &tb).map_err(data)?;
    emit(out, &pick(config.format, k.to_table(), k.to_ndjson()))
}

fn cmd_features(text: &str, position: Option<usize>, window: usize, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(CliError::Usage("--text has no tokens".into()));
    }
    let positions: Vec<usize> = match position {
        Some(p) => vec![p],
        None => (0..tokens.len()).collect(),
    };
    let mut sets = Vec::new();
    for &i in &positions {
        sets.push((i, token_features(&tokens, i, window).map_err(|e| CliError::Usage(e.to_string()))?));
    }
    let text = match config.format {
        Format::Table => {
            let mut s = String::new();
            for (i, fs) in &sets {
                s.push_str(&format!("[{i}] {}\n", tokens[*i]));
                for (name, value) in fs.iter() {
                    match value {
                        FeatureValue::Str(v) => s.push_str(&format!("    {name} = {v}\n")),
                        FeatureValue::Num(v) => s.push_str(&format!("    {name} = {v}\n")),
                    }
                }
            }
            s
        }
        Format::Structured => ndjson(std::iter::once(report_header("features", json!({ "window": window }))).chain(sets.iter().map(
            |(i, fs)| {
                let map: serde_json::Map<String, serde_json::Value> = fs
                    .iter()
                    .map(|(n, v)| {
                        let v = match v {
                            FeatureValue::Str(s) => json!(s),
                            FeatureValue::Num(x) => json!(x),
                        };
                        (n.to_string(), v)
                    })
                    .collect();
                json!({ "record": "token", "position": i, "token": tokens[*i], "features": map })
            },
        ))),
    };
    emit(out, &text)
}
