use std::path::Path;

use hqc_core::{PulseKind, PulseTrain};

use crate::CliError;

/// Parses `--control`: an existing TOML file, or `kind[:key=value,...]` with
/// keys `J`, `dt`, `p` and `seed`.
pub fn parse_control(arg: &str) -> Result<PulseTrain, CliError> {
    let path = Path::new(arg);
    let train = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{arg}: {e}")))?;
        toml::from_str(&text).map_err(|e| CliError::Invalid(format!("{arg}: {e}")))?
    } else {
        parse_inline(arg)?
    };
    train.validate().map_err(|e| CliError::Invalid(format!("control: {e}")))?;
    Ok(train)
}

fn parse_inline(arg: &str) -> Result<PulseTrain, CliError> {
    let (kind, rest) = arg.split_once(':').unwrap_or((arg, ""));
    let kind: PulseKind = serde_json::from_value(serde_json::Value::String(kind.trim().to_string()))
        .map_err(|_| CliError::Invalid(format!("unknown control kind `{kind}`")))?;
    let mut train = PulseTrain { kind, ..PulseTrain::none() };
    for pair in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) =
            pair.split_once('=').ok_or_else(|| CliError::Invalid(format!("expected key=value, got `{pair}`")))?;
        let bad = |_| CliError::Invalid(format!("bad value for {key}: `{value}`"));
        match key.trim() {
            "J" => train.amplitude = value.trim().parse().map_err(bad)?,
            "dt" => train.dt = value.trim().parse().map_err(bad)?,
            "p" => train.p = value.trim().parse().map_err(bad)?,
            "seed" => {
                train.seed = value.trim().parse().map_err(|_| CliError::Invalid(format!("bad seed `{value}`")))?
            }
            other => return Err(CliError::Invalid(format!("unknown control key `{other}`"))),
        }
    }
    Ok(train)
}
