use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use isomed::evaluation::{
    auprc, clap_style_score, emotion_match, fleiss_kappa, hamming_score, parse_counts,
    parse_probabilities, parse_rater_labels, parse_vectors, MetricError, MultilabelPair,
    RatingMatrix,
};
use isomed::MoodMapping;

use crate::args::{Aggregate, EvalCommand, LabelArgs, ValidateMappingArgs};
use crate::error::{exit, CliError};
use crate::session::stdout_error;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))
}

fn load_mapping(path: Option<&Path>) -> Result<MoodMapping, CliError> {
    match path {
        Some(p) => MoodMapping::load(p).map_err(|e| CliError::input(p, e)),
        None => Ok(MoodMapping::builtin()),
    }
}

fn metric(e: MetricError) -> CliError {
    CliError::Invalid(e.to_string())
}

pub fn eval(command: &EvalCommand, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = match command {
        EvalCommand::Hamming(args) => hamming(args)?,
        EvalCommand::Auprc(args) => average_precision(args)?,
        EvalCommand::Clap { audio, text } => clap(audio, text)?,
        EvalCommand::Kappa { counts, labels } => kappa(counts.as_deref(), labels.as_deref())?,
        EvalCommand::Match {
            probs,
            emotion,
            mapping,
            top_m,
            tolerance,
        } => {
            let mapping = load_mapping(mapping.as_deref())?;
            let clips =
                parse_probabilities(&read(probs)?).map_err(|e| CliError::input(probs, e))?;
            let mut s = String::new();
            let mut matched = 0;
            for (i, p) in clips.iter().enumerate() {
                match emotion_match(p, *emotion, &mapping, *top_m, *tolerance) {
                    Ok(v) => {
                        matched += usize::from(v.matched);
                        let _ = writeln!(
                            s,
                            "{i}\t{}\t{:.3}\t{} ({})",
                            if v.matched { "match" } else { "miss" },
                            v.error_deg,
                            v.closest_tag,
                            v.closest_emotion
                        );
                    }
                    Err(MetricError::NoMappableTags) => {
                        let _ = writeln!(s, "{i}\tmiss\t-\tno mapped tag in the top {top_m}");
                    }
                    Err(e) => return Err(metric(e)),
                }
            }
            let _ = writeln!(s, "matched {matched}/{}", clips.len());
            s
        }
    };
    out.write_all(text.as_bytes()).map_err(stdout_error)?;
    Ok(exit::OK)
}

fn label_rows(args: &LabelArgs) -> Result<Vec<MultilabelPair>, CliError> {
    let truth = parse_vectors(&read(&args.truth)?).map_err(|e| CliError::input(&args.truth, e))?;
    let scores =
        parse_vectors(&read(&args.scores)?).map_err(|e| CliError::input(&args.scores, e))?;
    if truth.len() != scores.len() {
        return Err(CliError::Invalid(format!(
            "{} truth rows but {} score rows",
            truth.len(),
            scores.len()
        )));
    }
    truth
        .into_iter()
        .zip(scores)
        .enumerate()
        .map(|(i, (t, s))| {
            let t = t
                .iter()
                .map(|&v| match v {
                    0.0 => Ok(false),
                    1.0 => Ok(true),
                    _ => Err(CliError::input(
                        &args.truth,
                        format!("row {}: label {v} is not 0 or 1", i + 1),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            MultilabelPair::new(t, s)
                .map(|p| p.with_threshold(args.threshold))
                .map_err(|e| CliError::Invalid(format!("row {}: {e}", i + 1)))
        })
        .collect()
}

fn pooled(rows: &[MultilabelPair], threshold: f64) -> Result<MultilabelPair, CliError> {
    let truth = rows
        .iter()
        .flat_map(|p| p.truth().iter().copied())
        .collect();
    let scores = rows
        .iter()
        .flat_map(|p| p.scores().iter().copied())
        .collect();
    MultilabelPair::new(truth, scores)
        .map(|p| p.with_threshold(threshold))
        .map_err(metric)
}

fn hamming(args: &LabelArgs) -> Result<String, CliError> {
    let rows = label_rows(args)?;
    let score = match args.aggregate {
        Aggregate::Mean => rows.iter().map(hamming_score).sum::<f64>() / rows.len() as f64,
        Aggregate::Pooled => hamming_score(&pooled(&rows, args.threshold)?),
    };
    Ok(format!("hamming {score:.6}\n"))
}

fn average_precision(args: &LabelArgs) -> Result<String, CliError> {
    let rows = label_rows(args)?;
    let score = match args.aggregate {
        Aggregate::Mean => {
            let mut values = Vec::new();
            for (i, p) in rows.iter().enumerate() {
                match auprc(p.scores(), p.truth()) {
                    Ok(v) => values.push(v),
                    Err(MetricError::NoPositives) => {
                        log::warn!("row {} has no positives, skipped", i + 1)
                    }
                    Err(e) => return Err(metric(e)),
                }
            }
            if values.is_empty() {
                return Err(metric(MetricError::NoPositives));
            }
            values.iter().sum::<f64>() / values.len() as f64
        }
        Aggregate::Pooled => {
            let p = pooled(&rows, args.threshold)?;
            auprc(p.scores(), p.truth()).map_err(metric)?
        }
    };
    Ok(format!("auprc {score:.6}\n"))
}

fn clap(audio: &Path, text: &Path) -> Result<String, CliError> {
    let a = parse_vectors(&read(audio)?).map_err(|e| CliError::input(audio, e))?;
    let t = parse_vectors(&read(text)?).map_err(|e| CliError::input(text, e))?;
    if a.len() != t.len() {
        return Err(CliError::Invalid(format!(
            "{} audio embeddings but {} text embeddings",
            a.len(),
            t.len()
        )));
    }
    let mut s = String::new();
    let mut sum = 0.0;
    for (i, (x, y)) in a.iter().zip(&t).enumerate() {
        let v =
            clap_style_score(x, y).map_err(|e| CliError::Invalid(format!("row {}: {e}", i + 1)))?;
        sum += v;
        let _ = writeln!(s, "{i}\t{v:.4}");
    }
    let _ = writeln!(s, "mean {:.4}", sum / a.len() as f64);
    Ok(s)
}

fn kappa(counts: Option<&Path>, labels: Option<&Path>) -> Result<String, CliError> {
    let matrix = match (counts, labels) {
        (Some(path), _) => {
            let rows = parse_counts(&read(path)?).map_err(|e| CliError::input(path, e))?;
            RatingMatrix::new(rows).map_err(|e| CliError::input(path, e))?
        }
        (None, Some(path)) => {
            let rows = parse_rater_labels(&read(path)?).map_err(|e| CliError::input(path, e))?;
            let labels: Vec<Vec<String>> = rows.into_iter().map(|(_, l)| l).collect();
            RatingMatrix::from_labels(&labels)
                .map_err(|e| CliError::input(path, e))?
                .0
        }
        (None, None) => return Err(CliError::Usage("give --counts or --labels".into())),
    };
    let k = fleiss_kappa(&matrix).map_err(metric)?;
    Ok(format!(
        "kappa {k:.6} ({} subjects, {} raters, {} categories)\n",
        matrix.subjects(),
        matrix.raters(),
        matrix.categories()
    ))
}

pub fn validate_mapping(args: &ValidateMappingArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mapping = load_mapping(args.mapping.as_deref())?;
    let rows =
        parse_rater_labels(&read(&args.labels)?).map_err(|e| CliError::input(&args.labels, e))?;
    let labels: Vec<Vec<String>> = rows.iter().map(|(_, l)| l.clone()).collect();
    let (matrix, categories) =
        RatingMatrix::from_labels(&labels).map_err(|e| CliError::input(&args.labels, e))?;
    let k = fleiss_kappa(&matrix).map_err(metric)?;

    let mut s = format!(
        "kappa {k:.6} ({} tags, {} raters, {} emotions used)\n",
        matrix.subjects(),
        matrix.raters(),
        categories.len()
    );
    let (mut agree, mut ratings, mut majority, mut mapped) = (0usize, 0usize, 0usize, 0usize);
    for (tag, votes) in &rows {
        let Some(emotion) = mapping.get(tag) else {
            let _ = writeln!(s, "{tag}\tunmapped");
            continue;
        };
        mapped += 1;
        let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
        for v in votes {
            *tally.entry(v.as_str()).or_default() += 1;
        }
        let hits = tally.get(emotion.as_str()).copied().unwrap_or(0);
        agree += hits;
        ratings += votes.len();
        let top = tally.values().copied().max().unwrap_or(0);
        // a tie at the top counts as no majority
        let winners = tally.values().filter(|&&n| n == top).count();
        if hits == top && winners == 1 {
            majority += 1;
        } else {
            let _ = writeln!(
                s,
                "{tag}\tmapped to {emotion}, raters: {}",
                summarize(&tally)
            );
        }
    }
    if mapped > 0 {
        let _ = writeln!(
            s,
            "mapping agrees with the rater majority on {majority}/{mapped} tags and with {agree}/{ratings} ratings"
        );
    }
    out.write_all(s.as_bytes()).map_err(stdout_error)?;
    Ok(exit::OK)
}

fn summarize(tally: &BTreeMap<&str, usize>) -> String {
    let mut parts: Vec<(&str, usize)> = tally.iter().map(|(k, v)| (*k, *v)).collect();
    parts.sort_by_key(|p| std::cmp::Reverse(p.1));
    parts
        .iter()
        .map(|(k, v)| format!("{k}×{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}
