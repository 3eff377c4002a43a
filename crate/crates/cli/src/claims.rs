//! Checkable statements about a sweep, loaded from TOML:
//!
//! ```toml
//! [[claim]]
//! name = "constrained never below regret"
//! kind = "dominates"
//! better = "constrained"
//! worse = "regret"
//! ```

use std::path::Path;

use gsrp_core::gsrp::SchemeTag;
use gsrp_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::sweep::{Sweep, SweepRow, LAMBDA_MATCH};

/// A lambda interval; either end may be excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRange {
    pub from: f64,
    pub to: f64,
    #[serde(default)]
    pub exclusive: bool,
}

impl Default for LambdaRange {
    fn default() -> Self {
        Self {
            from: 0.0,
            to: 1.0,
            exclusive: false,
        }
    }
}

impl LambdaRange {
    pub fn contains(&self, lambda: f64) -> bool {
        if self.exclusive {
            lambda > self.from + LAMBDA_MATCH && lambda < self.to - LAMBDA_MATCH
        } else {
            lambda >= self.from - LAMBDA_MATCH && lambda <= self.to + LAMBDA_MATCH
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimKind {
    /// `snr(better) >= snr(worse) - tolerance_db` at every lambda in range.
    Dominates {
        better: SchemeTag,
        worse: SchemeTag,
        #[serde(default)]
        range: LambdaRange,
        #[serde(default)]
        tolerance_db: f64,
    },
    /// `snr(better) > snr(worse)` at every lambda in range.
    StrictlyAbove {
        better: SchemeTag,
        worse: SchemeTag,
        #[serde(default)]
        range: LambdaRange,
    },
    /// `snr(scheme) - snr(over)` at `lambda` within `tolerance_db` of `expected_db`.
    ImprovementAt {
        lambda: f64,
        scheme: SchemeTag,
        over: SchemeTag,
        expected_db: f64,
        tolerance_db: f64,
    },
    /// The lambda maximizing the constrained SNR lies in `[lo, hi]`.
    ArgmaxIn { lo: f64, hi: f64 },
    /// `snr(reference) - max snr(constrained) <= max_db`.
    GapAtOptimum { reference: SchemeTag, max_db: f64 },
    /// Every row's regret lies within its bounds.
    BoundsHold {},
    /// Constrained SNR matches regret at 0 and subspace at 1 within `tolerance_db`.
    EndpointCoherence { tolerance_db: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    #[serde(flatten)]
    pub kind: ClaimKind,
}

// `flatten` would let `ClaimKind` accept unknown keys, so the name is split
// off by hand and the rest deserialized strictly.
impl<'de> Deserialize<'de> for Claim {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut table = toml::Table::deserialize(d)?;
        let name = match table.remove("name") {
            Some(toml::Value::String(s)) => s,
            Some(other) => {
                return Err(D::Error::custom(format!(
                    "claim name must be a string, got {other}"
                )))
            }
            None => return Err(D::Error::missing_field("name")),
        };
        let kind = ClaimKind::deserialize(toml::Value::Table(table)).map_err(D::Error::custom)?;
        Ok(Self { name, kind })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSet {
    #[serde(rename = "claim")]
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub name: String,
    pub passed: bool,
    /// The quantity compared against the threshold.
    pub measured: f64,
    /// What the claim requires of `measured`.
    pub requirement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub results: Vec<ClaimResult>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

fn snr(row: &SweepRow, tag: SchemeTag) -> Result<f64> {
    row.snr(tag)
        .ok_or_else(|| Error::InvalidArgument(format!("sweeps do not record the {tag} scheme")))
}

fn rows_in<'a>(sweep: &'a Sweep, range: &LambdaRange) -> Result<Vec<&'a SweepRow>> {
    let rows: Vec<_> = sweep.rows.iter().filter(|r| range.contains(r.lambda)).collect();
    if rows.is_empty() {
        return Err(Error::MissingLambda(range.from));
    }
    Ok(rows)
}

/// Smallest `snr(better) - snr(worse)` over the range.
fn min_margin(sweep: &Sweep, better: SchemeTag, worse: SchemeTag, range: &LambdaRange) -> Result<f64> {
    rows_in(sweep, range)?
        .into_iter()
        .map(|r| Ok(snr(r, better)? - snr(r, worse)?))
        .try_fold(f64::INFINITY, |m, d: Result<f64>| Ok(m.min(d?)))
}

fn interval(range: &LambdaRange) -> String {
    if range.exclusive {
        format!("({}, {})", range.from, range.to)
    } else {
        format!("[{}, {}]", range.from, range.to)
    }
}

fn check(claim: &Claim, sweep: &Sweep) -> Result<ClaimResult> {
    let (passed, measured, requirement) = match &claim.kind {
        ClaimKind::Dominates {
            better,
            worse,
            range,
            tolerance_db,
        } => {
            let m = min_margin(sweep, *better, *worse, range)?;
            (
                m >= -tolerance_db,
                m,
                format!(
                    "min snr({better}) - snr({worse}) over {} >= -{tolerance_db} dB",
                    interval(range)
                ),
            )
        }
        ClaimKind::StrictlyAbove { better, worse, range } => {
            let m = min_margin(sweep, *better, *worse, range)?;
            (
                m > 0.0,
                m,
                format!("min snr({better}) - snr({worse}) over {} > 0 dB", interval(range)),
            )
        }
        ClaimKind::ImprovementAt {
            lambda,
            scheme,
            over,
            expected_db,
            tolerance_db,
        } => {
            let r = sweep.row_at(*lambda)?;
            let d = snr(r, *scheme)? - snr(r, *over)?;
            (
                (d - expected_db).abs() <= *tolerance_db,
                d,
                format!("snr({scheme}) - snr({over}) at {lambda} = {expected_db} +- {tolerance_db} dB"),
            )
        }
        ClaimKind::ArgmaxIn { lo, hi } => {
            let best = sweep.best_constrained().ok_or(Error::MissingLambda(*lo))?;
            (
                best.lambda >= lo - LAMBDA_MATCH && best.lambda <= hi + LAMBDA_MATCH,
                best.lambda,
                format!("argmax snr(constrained) in [{lo}, {hi}]"),
            )
        }
        ClaimKind::GapAtOptimum { reference, max_db } => {
            let best = sweep.best_constrained().ok_or(Error::MissingLambda(0.0))?;
            let gap = snr(best, *reference)? - best.snr_constrained_db;
            (
                gap <= *max_db,
                gap,
                format!("snr({reference}) - max snr(constrained) <= {max_db} dB"),
            )
        }
        ClaimKind::BoundsHold {} => {
            let bad = sweep.bound_violations().len();
            (
                bad == 0,
                bad as f64,
                "rows outside their regret bounds = 0".to_string(),
            )
        }
        ClaimKind::EndpointCoherence { tolerance_db } => {
            let defects = sweep.endpoint_defects();
            if defects.len() < 2 {
                let missing = if sweep.row_at(0.0).is_err() { 0.0 } else { 1.0 };
                return Err(Error::MissingLambda(missing));
            }
            let worst = defects.iter().map(|(_, d)| *d).fold(0.0, f64::max);
            (
                worst <= *tolerance_db,
                worst,
                format!("endpoint SNR mismatch <= {tolerance_db} dB"),
            )
        }
    };
    Ok(ClaimResult {
        name: claim.name.clone(),
        passed,
        measured,
        requirement,
    })
}

/// Checks every claim. A claim naming a lambda absent from the sweep is an
/// error rather than a failure.
pub fn verify_claims(sweep: &Sweep, claims: &ClaimSet) -> Result<ClaimReport> {
    let results = claims
        .claims
        .iter()
        .map(|c| check(c, sweep))
        .collect::<Result<_>>()?;
    Ok(ClaimReport { results })
}

pub fn parse_claims(text: &str) -> Result<ClaimSet> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| {
            let before = &text[..s.start.min(text.len())];
            (
                before.matches('\n').count() + 1,
                before
                    .rfind('\n')
                    .map_or(before.len(), |nl| before.len() - nl - 1)
                    + 1,
            )
        });
        Error::ConfigParse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Built-in claim sets, by name.
pub const CLAIM_PRESETS: &[(&str, &str)] = &[
    (
        "gaussian_fig3",
        include_str!("../presets/gaussian_fig3_claims.toml"),
    ),
    (
        "synthetic_wideband",
        include_str!("../presets/synthetic_wideband_claims.toml"),
    ),
];

/// Loads claims from a file, or from a built-in set when `source` names one
/// and no such file exists.
pub fn load_claims(source: &str) -> Result<ClaimSet> {
    let path = Path::new(source);
    if path.is_file() {
        return parse_claims(&std::fs::read_to_string(path)?);
    }
    match CLAIM_PRESETS.iter().find(|(n, _)| *n == source) {
        Some((_, text)) => parse_claims(text),
        None => Err(Error::ConfigSemantic {
            field: "claims".into(),
            message: format!("{source} is neither a file nor a built-in claim set"),
        }),
    }
}
