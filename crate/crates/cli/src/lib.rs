//! Configuration, orchestration and artifact emission for the `parobs` tool.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, Mode, Overrides, RunConfig};
pub use output::{emit_pgm, write_atomic};
pub use run::{run, RunError, RunOutcome, RunReport};

/// Caps the global worker pool at `PAROBS_THREADS` when it is set.
pub fn configure_threads() -> Result<Option<usize>, ConfigError> {
    let Ok(raw) = std::env::var("PAROBS_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::new("PAROBS_THREADS", format!("expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::new("PAROBS_THREADS", e.to_string()))?;
    Ok(Some(n))
}
