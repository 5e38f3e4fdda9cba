use std::fs::File;
use std::io::{BufReader, Write};

use isomed::dsp::wav::{read_wav_file, write_wav_file, BitDepth};
use isomed::dsp::{master, prepare_clip, Crossfader};
use isomed::{compute_tag_stats, parse_jamendo_tsv};

use crate::args::{PostArgs, StatsArgs};
use crate::error::{exit, CliError};
use crate::session::stdout_error;

pub fn stats(args: &StatsArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let file = File::open(&args.tsv).map_err(|e| CliError::input(&args.tsv, e))?;
    let report =
        parse_jamendo_tsv(BufReader::new(file)).map_err(|e| CliError::input(&args.tsv, e))?;
    for e in report.errors.iter().take(10) {
        log::warn!("{}: {e}", args.tsv.display());
    }
    if args.strict {
        if let Some(first) = report.errors.first() {
            return Err(CliError::input(
                &args.tsv,
                format!("{} malformed rows, first: {first}", report.errors.len()),
            ));
        }
    }
    let stats = compute_tag_stats(&report.records);
    eprintln!(
        "{} tracks, {} moods, {} skipped rows, {} tags of unknown category",
        report.records.len(),
        stats.per_mood.len(),
        report.errors.len(),
        report.unknown_category_tags
    );
    match &args.out {
        Some(path) => stats.save(path).map_err(|e| CliError::input(path, e))?,
        None => out
            .write_all(stats.to_toml().as_bytes())
            .map_err(stdout_error)?,
    }
    Ok(exit::OK)
}

pub fn post(args: &PostArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut config = isomed::DspConfig::default();
    args.dsp.apply(&mut config);
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut fader = Crossfader::new(config.crossfade_fraction);
    for path in &args.inputs {
        let clip = read_wav_file(path).map_err(|e| CliError::input(path, e))?;
        let (prepared, report) =
            prepare_clip(&clip, &config).map_err(|e| CliError::input(path, e))?;
        log::info!(
            "{}: trimmed {} + {} samples, gain {:.3}",
            path.display(),
            report.trimmed_head,
            report.trimmed_tail,
            report.gain
        );
        fader
            .push(&prepared)
            .map_err(|e| CliError::input(path, e))?;
    }
    let assembled = fader
        .finish()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mastered = master(&assembled, &config).map_err(|e| CliError::Invalid(e.to_string()))?;
    let depth = if args.pcm16 {
        BitDepth::Pcm16
    } else {
        BitDepth::Float32
    };
    write_wav_file(&args.out, &mastered, depth).map_err(|e| CliError::input(&args.out, e))?;
    writeln!(
        out,
        "wrote {} ({} samples, {:.2} s)",
        args.out.display(),
        mastered.len(),
        mastered.duration_s()
    )
    .map_err(stdout_error)?;
    Ok(exit::OK)
}
