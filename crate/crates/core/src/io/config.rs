use std::path::Path;

use super::{read_text, IoError};
use crate::eval::ExperimentConfig;

/// Flat TOML experiment document; unknown keys are rejected.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig, IoError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| {
            let upto = &text.as_bytes()[..s.start.min(text.len())];
            upto.iter().filter(|&&b| b == b'\n').count() as u64 + 1
        });
        IoError::parse(line, e.message().to_owned())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads a config file. Relative `contour`, `truth` and `output_dir` paths
/// are taken relative to the file's directory.
pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig, IoError> {
    let mut cfg = parse_experiment_config(&read_text(path)?)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut cfg.contour, &mut cfg.truth, &mut cfg.output_dir]
        .into_iter()
        .flatten()
    {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}
