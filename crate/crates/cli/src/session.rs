use std::io::Write;

use isomed::generator::{Backend, BackendKind, RemoteBackend, StubBackend};
use isomed::session::{plan_session, run_session, SessionConfig, SessionInputs, SessionManifest};
use isomed::SAMPLE_RATE;

use crate::args::{GenerateArgs, PlanArgs};
use crate::error::{exit, CliError};

pub fn plan(args: &PlanArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = args.session.resolve()?;
    if args.show_config {
        write!(out, "{}", config.to_toml()).map_err(stdout_error)?;
        return Ok(exit::OK);
    }
    let inputs = SessionInputs::load(&config)?;
    let plan = plan_session(&config, &inputs.stats, &inputs.mapping)?;
    let clip = (config.clip_duration_s * f64::from(SAMPLE_RATE)).round() as usize;
    let lengths = vec![clip; plan.len()];
    let total = isomed::dsp::crossfade_len(&lengths, config.dsp.crossfade_fraction);

    let states: Vec<&str> = plan.path.states.iter().map(|e| e.as_str()).collect();
    let mut text = format!("path: {}\n", states.join(" -> "));
    let alloc: Vec<String> = plan.allocation.iter().map(ToString::to_string).collect();
    text += &format!("allocation: {}\n", alloc.join(" "));
    text += &format!(
        "segments: {}, untrimmed length {} samples ({:.1} s)\n",
        plan.len(),
        total,
        total as f64 / f64::from(SAMPLE_RATE)
    );
    for s in &plan.segments {
        let mut flags = Vec::new();
        if s.instrument_redrawn {
            flags.push("instrument");
        }
        if s.genre_redrawn {
            flags.push("genre");
        }
        let note = if flags.is_empty() {
            String::new()
        } else {
            format!("  [redrawn {}]", flags.join(", "))
        };
        text += &format!(
            "{:>3}  {:<10} {}{}\n",
            s.index,
            s.emotion.as_str(),
            s.rendered,
            note
        );
    }
    out.write_all(text.as_bytes()).map_err(stdout_error)?;
    Ok(exit::OK)
}

pub fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let previous = match &args.manifest {
        Some(path) => Some(SessionManifest::load(path).map_err(|e| CliError::input(path, e))?),
        None => None,
    };
    let config = match &previous {
        Some(m) => {
            let mut c = m.config.clone();
            // the service may have moved since the manifest was written
            if let Some(endpoint) = &args.session.endpoint {
                c.backend.remote.endpoint = endpoint.clone();
            }
            c
        }
        None => args.session.resolve()?,
    };
    let backend = build_backend(&config)?;
    let outcome = run_session(&config, backend.as_ref(), None, &args.out)?;
    let m = &outcome.manifest;

    let digest = m.output_digest.clone().unwrap_or_default();
    let retries: u32 = m.segments.iter().map(|s| s.retries).sum();
    let text = format!(
        "wrote {} ({} segments, {:.2} s)\nmanifest {}\noutput digest {}\nretries {}\n",
        outcome.wav_path.display(),
        m.segments.len(),
        m.total_duration_s.unwrap_or_default(),
        outcome.manifest_path.display(),
        digest,
        retries,
    );
    out.write_all(text.as_bytes()).map_err(stdout_error)?;

    if let Some(expected) = previous.and_then(|p| p.output_digest) {
        if expected != digest {
            return Err(CliError::DigestMismatch {
                expected,
                found: digest,
            });
        }
    }
    if m.validation_exhausted() {
        log::warn!("some segments never matched their intended emotion");
        return Ok(exit::EXHAUSTED);
    }
    Ok(exit::OK)
}

fn build_backend(config: &SessionConfig) -> Result<Box<dyn Backend>, CliError> {
    Ok(match config.backend.kind {
        BackendKind::Stub => Box::new(StubBackend),
        BackendKind::Remote => Box::new(
            RemoteBackend::new(config.backend.remote.clone())
                .map_err(|e| CliError::Backend(e.to_string()))?,
        ),
    })
}

pub fn stdout_error(e: std::io::Error) -> CliError {
    CliError::Invalid(format!("writing output: {e}"))
}
