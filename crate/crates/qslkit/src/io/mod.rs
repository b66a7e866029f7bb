//! Text model files, JSON reports, and CSV output.
//!
//! A model file is line-oriented `key = value` text. `#` starts a comment.
//!
//! ```text
//! dim = 2
//! name = dephasing-qubit
//! hamiltonian = 0             # optional, repeatable operator expression
//! channel = sx                # repeatable; sqrt-rate units
//! state = [1, 0]              # amplitude list of scalar expressions
//! lambda = 0.1                # optional default radius
//! meta.source = demo          # free-form labels
//! ```
//!
//! Operators are expression strings (see [`expr`]) or explicit entry arrays
//! `[[re, im], [re, im], ...]` with `dim^2` row-major pairs. State
//! amplitudes accept scalar expressions such as `1/2` or `sqrt(3)/2`; the
//! vector is normalized on load when its norm is within `1e-6` of one and
//! rejected otherwise.

pub mod expr;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::matrix::ComplexMatrix;
use crate::states::PureState;
use crate::system::SystemModel;
use crate::{Error, Result};

/// Loader gate: a state vector must be this close to unit norm.
pub const STATE_NORM_GATE: f64 = 1e-6;

/// Raw key-value content of a model file, before evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub dimension: usize,
    /// Operator expressions (or matrix literals), one per Hamiltonian term.
    pub hamiltonians: Vec<String>,
    /// Operator expressions (or matrix literals), one per channel.
    pub channels: Vec<String>,
    /// Scalar expressions for the initial-state amplitudes.
    pub state: Vec<String>,
    pub lambda: Option<f64>,
    pub name: Option<String>,
    pub metadata: BTreeMap<String, String>,
}

/// Fully evaluated model file.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: SystemModel,
    pub psi0: PureState,
    pub lambda: Option<f64>,
    pub name: Option<String>,
    pub metadata: BTreeMap<String, String>,
}

fn file_err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelFile {
        line,
        message: message.into(),
    }
}

/// Splits a bracketed list `[a, b, c]` at top-level commas.
fn split_list(value: &str, line: usize) -> Result<Vec<String>> {
    let trimmed = value.trim();
    if !trimmed.starts_with('[') || !trimmed.ends_with(']') {
        return Err(file_err(line, "expected a bracketed list `[...]`"));
    }
    let inner = &trimmed[1..trimmed.len() - 1];
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (idx, ch) in inner.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| file_err(line, "unbalanced brackets in list"))?;
            }
            ',' if depth == 0 => {
                parts.push(inner[start..idx].trim().to_string());
                start = idx + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(file_err(line, "unbalanced brackets in list"));
    }
    let last = inner[start..].trim();
    if !last.is_empty() {
        parts.push(last.to_string());
    }
    if parts.is_empty() {
        return Err(file_err(line, "empty list"));
    }
    Ok(parts)
}

impl ModelSpec {
    /// Parses model-file text; errors carry the offending line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dimension: Option<usize> = None;
        let mut hamiltonians = Vec::new();
        let mut channels = Vec::new();
        let mut state: Option<Vec<String>> = None;
        let mut lambda: Option<f64> = None;
        let mut name: Option<String> = None;
        let mut metadata = BTreeMap::new();
        let mut state_line = 0usize;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| file_err(line_no, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(file_err(line_no, format!("empty value for `{key}`")));
            }
            match key {
                "dim" => {
                    if dimension.is_some() {
                        return Err(file_err(line_no, "duplicate `dim`"));
                    }
                    let d: usize = value
                        .parse()
                        .map_err(|_| file_err(line_no, format!("invalid dimension `{value}`")))?;
                    if d == 0 {
                        return Err(file_err(line_no, "dimension must be positive"));
                    }
                    dimension = Some(d);
                }
                "hamiltonian" => hamiltonians.push(value.to_string()),
                "channel" => channels.push(value.to_string()),
                "state" => {
                    if state.is_some() {
                        return Err(file_err(line_no, "duplicate `state`"));
                    }
                    state = Some(split_list(value, line_no)?);
                    state_line = line_no;
                }
                "lambda" => {
                    if lambda.is_some() {
                        return Err(file_err(line_no, "duplicate `lambda`"));
                    }
                    let l: f64 = value
                        .parse()
                        .map_err(|_| file_err(line_no, format!("invalid lambda `{value}`")))?;
                    lambda = Some(l);
                }
                "name" => {
                    if name.is_some() {
                        return Err(file_err(line_no, "duplicate `name`"));
                    }
                    name = Some(value.to_string());
                }
                _ => {
                    if let Some(label) = key.strip_prefix("meta.") {
                        metadata.insert(label.to_string(), value.to_string());
                    } else {
                        return Err(file_err(line_no, format!("unknown key `{key}`")));
                    }
                }
            }
        }

        let dimension = dimension.ok_or_else(|| file_err(0, "missing `dim`"))?;
        let state = state.ok_or_else(|| file_err(0, "missing `state`"))?;
        if state.len() != dimension {
            return Err(file_err(
                state_line,
                format!("state has {} amplitudes, expected {dimension}", state.len()),
            ));
        }
        Ok(Self {
            dimension,
            hamiltonians,
            channels,
            state,
            lambda,
            name,
            metadata,
        })
    }

    /// Evaluates the expressions into a [`LoadedModel`].
    pub fn build(&self) -> Result<LoadedModel> {
        let d = self.dimension;
        let parse_op = |text: &str| -> Result<ComplexMatrix> {
            if text.trim_start().starts_with('[') {
                parse_matrix_literal(text, d)
            } else {
                Ok(expr::parse_operator(text, d)?)
            }
        };
        let hamiltonians: Vec<ComplexMatrix> = self
            .hamiltonians
            .iter()
            .map(|t| parse_op(t))
            .collect::<Result<_>>()?;
        let channels: Vec<ComplexMatrix> = self
            .channels
            .iter()
            .map(|t| parse_op(t))
            .collect::<Result<_>>()?;

        let amplitudes: Vec<Complex64> = self
            .state
            .iter()
            .map(|t| Ok(expr::parse_scalar(t)?))
            .collect::<Result<_>>()?;
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_NORM_GATE {
            return Err(Error::InvalidState(format!(
                "state norm {norm} is not within {STATE_NORM_GATE} of 1"
            )));
        }
        let psi0 = PureState::normalized(amplitudes)?;
        let model = SystemModel::try_new(d, hamiltonians, channels)?;
        Ok(LoadedModel {
            model,
            psi0,
            lambda: self.lambda,
            name: self.name.clone(),
            metadata: self.metadata.clone(),
        })
    }
}

/// Matrix literal: `dim^2` row-major `[re, im]` pairs.
fn parse_matrix_literal(text: &str, dim: usize) -> Result<ComplexMatrix> {
    let pairs = split_list(text, 0)?;
    if pairs.len() != dim * dim {
        return Err(Error::InvalidArgument(format!(
            "matrix literal has {} entries, expected {}",
            pairs.len(),
            dim * dim
        )));
    }
    let mut data = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let parts = split_list(pair, 0)?;
        if parts.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "matrix entry `{pair}` must be a `[re, im]` pair"
            )));
        }
        let re: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("invalid number `{}`", parts[0])))?;
        let im: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("invalid number `{}`", parts[1])))?;
        data.push(Complex64::new(re, im));
    }
    ComplexMatrix::new(dim, dim, data)
}

/// Loads, parses, and evaluates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text)
}

pub fn load_model_str(text: &str) -> Result<LoadedModel> {
    ModelSpec::parse(text)?.build()
}

/// Parses a bracketed amplitude list `[e0, e1, ...]` of scalar expressions
/// into a complex vector.
pub fn parse_amplitude_list(text: &str) -> Result<Vec<Complex64>> {
    split_list(text, 0)?
        .iter()
        .map(|entry| Ok(expr::parse_scalar(entry)?))
        .collect()
}

/// Loads a states file: one state per line, `label = [amps]` or a bare
/// `[amps]` (then labeled by its index). Norms gated like model states.
pub fn load_states(path: impl AsRef<Path>) -> Result<Vec<(String, PureState)>> {
    let text = std::fs::read_to_string(path)?;
    let mut states = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, list) = match line.split_once('=') {
            Some((l, r)) => (l.trim().to_string(), r.trim()),
            None => (states.len().to_string(), line),
        };
        let amplitudes = parse_amplitude_list(list)
            .map_err(|e| file_err(line_no, format!("state `{label}`: {e}")))?;
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_NORM_GATE {
            return Err(file_err(
                line_no,
                format!("state `{label}` norm {norm} is not within {STATE_NORM_GATE} of 1"),
            ));
        }
        states.push((label, PureState::normalized(amplitudes)?));
    }
    if states.is_empty() {
        return Err(Error::InvalidArgument("states file holds no states".into()));
    }
    Ok(states)
}

/// Writes any serializable report as pretty JSON. Numbers keep full
/// precision, so reloading reproduces them exactly.
pub fn write_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, report)?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Formats with 7 significant digits: plain decimal for moderate exponents,
/// scientific otherwise. Used for all human-readable and CSV numbers so
/// identical runs produce byte-identical output.
pub fn format_g7(x: f64) -> String {
    if x == 0.0 {
        return "0.000000".to_string();
    }
    let sci = format!("{:.6e}", x);
    let (_, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if (-4..=6).contains(&exp) {
        format!("{:.*}", (6 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

/// Writes a CSV file: `.` decimal separator, `,` field separator, one
/// header row, values preformatted by the caller (numbers via
/// [`format_g7`], infinities as `inf`).
pub fn write_csv(
    path: impl AsRef<Path>,
    headers: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::sigma_z;

    const DEPHASING: &str = "\
# two-level dephasing
dim = 2
name = dephasing
hamiltonian = 0
channel = sx
state = [1, 0]
lambda = 0.1
meta.figure = 3b
";

    #[test]
    fn minimal_model_loads_sz_hamiltonian() {
        let loaded = load_model_str("dim = 2\nhamiltonian = sz\nstate = [1, 0]\n").unwrap();
        assert_eq!(loaded.model.hamiltonians().len(), 1);
        assert!((loaded.model.hamiltonians()[0].entries()[0].re - 1.0).abs() < 1e-15);
        assert!((&loaded.model.hamiltonians()[0] - &sigma_z()).max_abs() < 1e-15);
        assert!(loaded.model.channels().is_empty());
    }

    #[test]
    fn dephasing_file_round_trips_through_spec() {
        let spec = ModelSpec::parse(DEPHASING).unwrap();
        assert_eq!(spec.dimension, 2);
        assert_eq!(spec.lambda, Some(0.1));
        assert_eq!(spec.name.as_deref(), Some("dephasing"));
        assert_eq!(spec.metadata.get("figure").map(String::as_str), Some("3b"));
        let loaded = spec.build().unwrap();
        assert_eq!(loaded.model.dim(), 2);
        assert_eq!(loaded.model.channels().len(), 1);
        // hamiltonian = 0 promotes to the zero operator.
        assert_eq!(loaded.model.hamiltonians()[0].max_abs(), 0.0);
        assert_eq!(loaded.psi0.amplitudes()[0].re, 1.0);
    }

    #[test]
    fn engineering_state_with_exact_amplitudes() {
        let loaded =
            load_model_str("dim = 2\nchannel = sm\nstate = [1/2, sqrt(3)/2]\n").unwrap();
        assert!((loaded.psi0.amplitudes()[0].re - 0.5).abs() < 1e-15);
        assert!((loaded.psi0.amplitudes()[1].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_literal_channel() {
        let loaded = load_model_str(
            "dim = 2\nchannel = [[0, 0], [0, 0], [1, 0], [0, 0]]\nstate = [1, 0]\n",
        )
        .unwrap();
        let m = &loaded.model.channels()[0];
        assert_eq!(m[(1, 0)].re, 1.0);
        assert_eq!(m[(0, 1)].re, 0.0);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = load_model_str("dim = 2\nstate = [1, 0]\nbogus line\n").unwrap_err();
        match err {
            Error::ModelFile { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
        let err = load_model_str("dim = 2\nstate = [1, 0, 0]\n").unwrap_err();
        match err {
            Error::ModelFile { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("3 amplitudes"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn state_norm_gate() {
        // Slightly off-norm states are normalized...
        let loaded = load_model_str("dim = 2\nstate = [1.0000001, 0]\n").unwrap();
        let norm: f64 = loaded
            .psi0
            .amplitudes()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        // ...but badly off-norm states are rejected.
        assert!(load_model_str("dim = 2\nstate = [2, 0]\n").is_err());
    }

    #[test]
    fn report_round_trip_preserves_values() {
        use crate::bounds::{qsl_report, QslReport};
        use crate::operators::sigma_x;
        let model = SystemModel::decoherence_only(2, vec![sigma_x()]).unwrap();
        let report = qsl_report(&model, &PureState::basis(2, 0), 0.1).unwrap();
        let dir = std::env::temp_dir().join(format!("qslkit-io-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        write_report(&report, &path).unwrap();
        let back: QslReport = read_report(&path).unwrap();
        assert_eq!(back.t_star.finite(), report.t_star.finite());
        assert_eq!(back.amplitude, report.amplitude);
        assert_eq!(back.ratio, report.ratio);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn g7_formatting() {
        assert_eq!(format_g7(0.0088392216030227), "0.008839222");
        assert_eq!(format_g7(2.0), "2.000000");
        assert_eq!(format_g7(0.1), "0.1000000");
        assert_eq!(format_g7(0.0), "0.000000");
        assert_eq!(format_g7(-0.5), "-0.5000000");
        assert_eq!(format_g7(1.25e9), "1.250000e9");
        assert_eq!(format_g7(3.2e-7), "3.200000e-7");
    }

    #[test]
    fn csv_layout() {
        let dir = std::env::temp_dir().join(format!("qslkit-csv-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_csv(
            &path,
            &["time", "overlap"],
            vec![
                vec![format_g7(0.0), format_g7(1.0)],
                vec![format_g7(0.5), format_g7(0.9)],
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "time,overlap\n0.000000,1.000000\n0.5000000,0.9000000\n"
        );
        std::fs::remove_dir_all(&dir).ok();
    }
}
