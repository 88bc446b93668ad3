//! Command implementations behind the `posinorm` binary.
//!
//! Every command produces a [`ReportDocument`] plus a plain-text rendering.
//! Failures are [`AppError`]s, each tied to one process exit code.

pub mod canonical;
pub mod cli;
mod text;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::chains::{chain_profile, normalized_powers};
use crate::classes::{classify, is_hyponormal, is_posinormal, is_quasiposinormal};
use crate::gallery::{
    self, blowup_curve, blowup_report, example1_report, Example1Config, GalleryError,
};
use crate::harness::{run_suites, Suite, SuiteResult};
use crate::numeric::{Complex64, ComplexMatrix, NumericError, ToleranceContext};
use crate::shifts::{shift_posinormal, ShiftError, WeightKind, WeightSequence};

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_HORIZON: usize = 10_000;
pub const MAX_HORIZON: usize = 10_000_000;
/// Dimension range accepted by `check --dim`.
pub const CHECK_DIM_RANGE: std::ops::RangeInclusive<usize> = 2..=32;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("zero weight: {0}")]
    ZeroWeight(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("{0}")]
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Runtime(_) => 1,
            Self::Parse(_) => 2,
            Self::Dimension(_) => 3,
            Self::ZeroWeight(_) => 4,
            Self::Resource(_) => 5,
        }
    }
}

/// Exit code for a check run with at least one failing property.
pub const EXIT_SUITE_FAILURE: i32 = 6;

impl From<NumericError> for AppError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::ShapeMismatch { .. }
            | NumericError::DimensionMismatch(_)
            | NumericError::NotSquare { .. } => Self::Dimension(e.to_string()),
            NumericError::NonFinite { .. } | NumericError::InvalidTolerance { .. } => {
                Self::Parse(e.to_string())
            }
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<GalleryError> for AppError {
    fn from(e: GalleryError) -> Self {
        match e {
            GalleryError::InvalidConfig(m) => Self::Parse(m),
            GalleryError::ResourceLimit { .. } => Self::Resource(e.to_string()),
            GalleryError::Numeric(n) => n.into(),
        }
    }
}

impl From<ShiftError> for AppError {
    fn from(e: ShiftError) -> Self {
        match e {
            ShiftError::ZeroWeight { .. } => Self::ZeroWeight(e.to_string()),
            ShiftError::InvalidParameter(m) => Self::Parse(m),
        }
    }
}

pub type AppResult<T> = std::result::Result<T, AppError>;

// ------------------------------------------------------------ matrix files

/// On-disk matrix: `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn parse(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Parse(format!("invalid matrix file: {e}")))
    }

    pub fn read(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_matrix(&self) -> AppResult<ComplexMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(AppError::Dimension(format!(
                "empty matrix ({}x{})",
                self.rows, self.cols
            )));
        }
        if self.data.len() != self.rows {
            return Err(AppError::Dimension(format!(
                "rows = {} but data has {} rows",
                self.rows,
                self.data.len()
            )));
        }
        if let Some((i, row)) = self
            .data
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.cols)
        {
            return Err(AppError::Dimension(format!(
                "cols = {} but row {i} has {} entries",
                self.cols,
                row.len()
            )));
        }
        let entries: Vec<Complex64> = self
            .data
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Ok(ComplexMatrix::from_row_major(
            self.rows, self.cols, entries,
        )?)
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| [m.get(i, j).re, m.get(i, j).im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_canonical(&self) -> String {
        canonical::to_canonical(self).expect("matrix files always serialize")
    }
}

fn load_square(path: &Path) -> AppResult<ComplexMatrix> {
    let m = MatrixFile::read(path)?.to_matrix()?;
    if !m.is_square() {
        return Err(AppError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() > gallery::MAX_DIM {
        return Err(AppError::Resource(format!(
            "matrix dimension {} exceeds the limit {}",
            m.rows(),
            gallery::MAX_DIM
        )));
    }
    Ok(m)
}

// ------------------------------------------------------------ argument parsing

/// A single number sets all three tolerances; otherwise a comma list of
/// `rank=`, `psd=`, `residual=` assignments overrides the defaults.
pub fn parse_tolerance(spec: &str) -> AppResult<ToleranceContext> {
    let spec = spec.trim();
    let bad = |msg: String| AppError::Parse(format!("tolerance '{spec}': {msg}"));
    if let Ok(x) = spec.parse::<f64>() {
        return ToleranceContext::uniform(x).map_err(|e| bad(e.to_string()));
    }
    let mut ctx = ToleranceContext::default();
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{value}' is not a number")))?;
        match key.trim() {
            "rank" | "rank_rel_tol" => ctx.rank_rel_tol = value,
            "psd" | "psd_tol" => ctx.psd_tol = value,
            "residual" | "residual_tol" => ctx.residual_tol = value,
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    ctx.validate().map_err(|e| bad(e.to_string()))?;
    Ok(ctx)
}

/// Weight grammar: `const:c`, `pow:p`, `recip`, `bilrecip`, `geom:r`,
/// `list:a,b,...` (repeated cyclically).
pub fn parse_weights(spec: &str) -> AppResult<WeightSequence> {
    let spec = spec.trim();
    let bad = |msg: &str| AppError::Parse(format!("weight spec '{spec}': {msg}"));
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("'{s}' is not a number")))
    };
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let kind = match (head, arg) {
        ("recip", None) => WeightKind::Reciprocal,
        ("bilrecip", None) => WeightKind::BilateralReciprocal,
        ("const", Some(a)) => WeightKind::Constant(number(a)?),
        ("pow", Some(a)) => WeightKind::PowerLaw(number(a)?),
        ("geom", Some(a)) => WeightKind::Geometric(number(a)?),
        ("list", Some(a)) => {
            WeightKind::Explicit(a.split(',').map(number).collect::<AppResult<_>>()?)
        }
        ("recip" | "bilrecip", Some(_)) => return Err(bad("takes no parameter")),
        ("const" | "pow" | "geom" | "list", None) => return Err(bad("missing parameter")),
        _ => {
            return Err(bad(
                "unknown kind (expected const, pow, recip, bilrecip, geom or list)",
            ))
        }
    };
    Ok(WeightSequence::new(kind)?)
}

// ------------------------------------------------------------ reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: CommandEcho,
    pub tolerance: ToleranceContext,
    pub payload: Value,
}

impl ReportDocument {
    fn new(name: &str, args: Value, tolerance: &ToleranceContext, payload: Value) -> Self {
        let args = match args {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: CommandEcho {
                name: name.to_string(),
                args,
            },
            tolerance: *tolerance,
            payload,
        }
    }

    pub fn to_canonical(&self) -> String {
        canonical::to_canonical(self).expect("reports always serialize")
    }

    pub fn parse(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Parse(format!("invalid report: {e}")))
    }
}

/// Result of one command: the document, its text rendering, the exit code
/// and timing lines meant for stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: ReportDocument,
    pub text: String,
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    fn ok(document: ReportDocument, text: String) -> Self {
        Self {
            document,
            text,
            exit_code: 0,
            diagnostics: Vec::new(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads always serialize")
}

// ------------------------------------------------------------ commands

pub fn cmd_classify(path: &Path, tol: &ToleranceContext) -> AppResult<Outcome> {
    let t = load_square(path)?;
    let report = classify(&t, tol)?;
    let text = text::classification(&report);
    let doc = ReportDocument::new(
        "classify",
        json!({ "file": path.display().to_string() }),
        tol,
        to_value(&report),
    );
    Ok(Outcome::ok(doc, text))
}

/// Class memberships of one power `T^n`.
#[derive(Debug, Clone, Serialize)]
pub struct PowerFragment {
    pub n: usize,
    pub posinormal: bool,
    pub coposinormal: bool,
    pub alpha_min: Option<f64>,
    pub quasiposinormal: bool,
    pub hyponormal: bool,
}

/// A posinormal operator has ascent at most one.
#[derive(Debug, Clone, Serialize)]
pub struct AscentFlag {
    pub posinormal: bool,
    pub ascent: usize,
    pub ascent_at_most_one: bool,
    pub consistent: bool,
}

pub fn cmd_powers(path: &Path, max_n: usize, tol: &ToleranceContext) -> AppResult<Outcome> {
    if max_n == 0 {
        return Err(AppError::Parse("--max-n must be at least 1".into()));
    }
    let t = load_square(path)?;
    let powers = normalized_powers(&t, max_n, tol)?;
    let mut fragments = Vec::with_capacity(max_n);
    for (n, p) in powers.iter().enumerate().skip(1) {
        let pos = is_posinormal(p, tol)?;
        let copos = is_posinormal(&p.adjoint(), tol)?;
        fragments.push(PowerFragment {
            n,
            posinormal: pos.holds,
            coposinormal: copos.holds,
            alpha_min: pos.alpha_min,
            quasiposinormal: is_quasiposinormal(p, tol)?.holds,
            hyponormal: is_hyponormal(p, tol)?.holds,
        });
    }
    let chain = chain_profile(&t, tol, max_n)?;
    let posinormal = fragments[0].posinormal;
    let flag = AscentFlag {
        posinormal,
        ascent: chain.ascent,
        ascent_at_most_one: chain.ascent <= 1,
        consistent: !posinormal || chain.ascent <= 1,
    };
    let text = text::powers(&fragments, &chain, &flag);
    let payload = json!({ "powers": fragments, "chain": chain, "posinormal_ascent": flag });
    let args = json!({ "file": path.display().to_string(), "max_n": max_n });
    Ok(Outcome::ok(
        ReportDocument::new("powers", args, tol, payload),
        text,
    ))
}

pub fn cmd_shift(
    weights: &str,
    ns: &[usize],
    horizon: usize,
    tol: &ToleranceContext,
) -> AppResult<Outcome> {
    let w = parse_weights(weights)?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(AppError::Parse("--n values must be at least 1".into()));
    }
    if horizon == 0 {
        return Err(AppError::Parse("--horizon must be at least 1".into()));
    }
    if horizon > MAX_HORIZON {
        return Err(AppError::Resource(format!(
            "horizon {horizon} exceeds the limit {MAX_HORIZON}"
        )));
    }
    let results = ns
        .iter()
        .map(|&n| shift_posinormal(&w, n, horizon))
        .collect::<Result<Vec<_>, _>>()?;
    let text = text::shift(&w, &results);
    let payload = json!({ "weights": w.to_string(), "note": w.note(), "results": results });
    let args = json!({ "weights": weights, "n": ns, "horizon": horizon });
    Ok(Outcome::ok(
        ReportDocument::new("shift", args, tol, payload),
        text,
    ))
}

/// Measured per-block constant next to its predicted value `1/k`.
#[derive(Debug, Clone, Serialize)]
pub struct BetaRow {
    pub k: usize,
    pub predicted: f64,
    pub beta: f64,
}

pub fn cmd_example1(k_max: usize, depth: usize, tol: &ToleranceContext) -> AppResult<Outcome> {
    let cfg = Example1Config::new(k_max, depth)?;
    let blowup = blowup_report(k_max, tol)?;
    let betas: Vec<BetaRow> = blowup
        .per_block_beta
        .iter()
        .enumerate()
        .map(|(i, &beta)| BetaRow {
            k: i + 1,
            predicted: 1.0 / (i + 1) as f64,
            beta,
        })
        .collect();
    let curve = blowup_curve(k_max, tol)?;
    let structure = example1_report(&cfg, tol)?;
    let text = text::example1(&betas, &curve, &structure);
    let payload = json!({
        "beta_table": betas,
        "curve": curve,
        "witness_k": blowup.witness_k,
        "structure": structure,
    });
    let args = json!({ "k_max": k_max, "depth": depth });
    Ok(Outcome::ok(
        ReportDocument::new("example1", args, tol, payload),
        text,
    ))
}

pub fn cmd_check(
    suite: &str,
    trials: usize,
    dim: usize,
    seed: u64,
    tol: &ToleranceContext,
) -> AppResult<Outcome> {
    let suites: Vec<Suite> =
        crate::harness::parse_suite_selection(suite).map_err(AppError::Parse)?;
    if !CHECK_DIM_RANGE.contains(&dim) {
        return Err(AppError::Dimension(format!(
            "--dim must lie in {}..={}, got {dim}",
            CHECK_DIM_RANGE.start(),
            CHECK_DIM_RANGE.end()
        )));
    }
    let results: Vec<SuiteResult> = run_suites(&suites, trials, dim, seed, tol)?;
    let passed = results.iter().all(|r| r.passed);
    let total: Duration = results.iter().map(|r| r.elapsed).sum();
    let mut diagnostics: Vec<String> = results
        .iter()
        .map(|r| format!("{}: elapsed {:.3} s", r.suite, r.elapsed.as_secs_f64()))
        .collect();
    diagnostics.push(format!("total elapsed {:.3} s", total.as_secs_f64()));
    let text = text::check(&results);
    let payload = json!({ "passed": passed, "suites": results });
    let args = json!({ "suite": suite, "trials": trials, "dim": dim, "seed": seed });
    Ok(Outcome {
        document: ReportDocument::new("check", args, tol, payload),
        text,
        exit_code: if passed { 0 } else { EXIT_SUITE_FAILURE },
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_forms() {
        let t = parse_tolerance("1e-9").unwrap();
        assert_eq!(
            (t.rank_rel_tol, t.psd_tol, t.residual_tol),
            (1e-9, 1e-9, 1e-9)
        );
        let t = parse_tolerance("rank=1e-12, residual=1e-6").unwrap();
        assert_eq!(
            (t.rank_rel_tol, t.psd_tol, t.residual_tol),
            (1e-12, 1e-10, 1e-6)
        );
        assert!(matches!(
            parse_tolerance("speed=3"),
            Err(AppError::Parse(_))
        ));
        assert!(matches!(parse_tolerance("-1"), Err(AppError::Parse(_))));
    }

    #[test]
    fn weight_grammar() {
        assert_eq!(parse_weights("recip").unwrap().to_string(), "recip");
        assert_eq!(
            parse_weights("list:1,2.5").unwrap().to_string(),
            "list:1,2.5"
        );
        assert_eq!(parse_weights("geom:0.5").unwrap().to_string(), "geom:0.5");
        assert!(matches!(
            parse_weights("list:1,0,1"),
            Err(AppError::ZeroWeight(_))
        ));
        assert!(matches!(
            parse_weights("const:0"),
            Err(AppError::ZeroWeight(_))
        ));
        for bad in ["", "recip:2", "pow", "wave:1", "list:1,x"] {
            assert!(
                matches!(parse_weights(bad), Err(AppError::Parse(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn matrix_file_round_trip() {
        let text = r#"{"rows":1,"cols":2,"data":[[[1,0],[0.5,-2]]]}"#;
        let m = MatrixFile::parse(text).unwrap().to_matrix().unwrap();
        let canon = MatrixFile::from_matrix(&m).to_canonical();
        assert_eq!(
            canon,
            "{\"cols\":2,\"data\":[[[1.0000000000000000e0,0.0000000000000000e0],\
             [5.0000000000000000e-1,-2.0000000000000000e0]]],\"rows\":1}"
        );
        let again = MatrixFile::parse(&canon).unwrap();
        assert_eq!(again.to_canonical(), canon);
    }

    #[test]
    fn matrix_file_errors() {
        assert!(matches!(MatrixFile::parse("{"), Err(AppError::Parse(_))));
        assert!(matches!(
            MatrixFile::parse(r#"{"rows":1,"cols":1,"data":[[[1]]]}"#),
            Err(AppError::Parse(_))
        ));
        assert!(matches!(
            MatrixFile::parse(r#"{"rows":1,"cols":1,"data":[[[NaN,0]]]}"#),
            Err(AppError::Parse(_))
        ));
        assert!(matches!(
            MatrixFile::parse(r#"{"rows":1,"cols":1,"data":[[[1e999,0]]]}"#),
            Err(AppError::Parse(_))
        ));
        let short = MatrixFile::parse(r#"{"rows":2,"cols":1,"data":[[[1,0]]]}"#).unwrap();
        assert!(matches!(short.to_matrix(), Err(AppError::Dimension(_))));
    }

    #[test]
    fn report_round_trips() {
        let doc = cmd_shift("recip", &[1, 2], 100, &ToleranceContext::default())
            .unwrap()
            .document;
        let text = doc.to_canonical();
        assert_eq!(ReportDocument::parse(&text).unwrap().to_canonical(), text);
    }

    #[test]
    fn shift_recip_two() {
        let out = cmd_shift("recip", &[2], DEFAULT_HORIZON, &ToleranceContext::default()).unwrap();
        let r = &out.document.payload["results"][0];
        assert_eq!(r["verdict"]["sup_value"], 6.0);
        assert_eq!(r["verdict"]["bound_n_squared"], 16.0);
        assert_eq!(r["posinormal"], true);
    }

    #[test]
    fn check_rejects_bad_inputs() {
        let tol = ToleranceContext::default();
        assert_eq!(cmd_check("t9", 1, 4, 0, &tol).unwrap_err().exit_code(), 2);
        assert_eq!(cmd_check("t5", 1, 64, 0, &tol).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn example1_guard() {
        let err = cmd_example1(1000, 5, &ToleranceContext::default()).unwrap_err();
        assert_eq!(err.exit_code(), 5);
    }
}
