//! Palindromic splitting schemes.
//!
//! A scheme is the coefficient sequence of one integrator time-step built from
//! the exact drift flow `q <- q + t M^{-1} p` and the exact kick flow
//! `p <- p - t grad V(q)`. The sequence has `2r + 1` entries that alternate
//! between drift and kick coefficients, starting with `leading_kind`, and reads
//! the same forwards and backwards. Velocity and position Verlet are the
//! `r = 1` members.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the consistency sums `sum(a) = sum(b) = 1`.
pub const CONSISTENCY_TOL: f64 = 1e-14;

/// Which flow the coefficient sequence starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LeadingKind {
    /// Starts with a drift: `(a1, b1, a2, ..., b1, a1)`.
    DriftFirst,
    /// Starts with a kick: `(b1, a1, b2, ..., a1, b1)`.
    KickFirst,
}

impl LeadingKind {
    pub fn swapped(self) -> Self {
        match self {
            LeadingKind::DriftFirst => LeadingKind::KickFirst,
            LeadingKind::KickFirst => LeadingKind::DriftFirst,
        }
    }
}

/// Kind of a single substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Drift,
    Kick,
}

/// A validated palindromic splitting integrator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingScheme {
    label: String,
    leading_kind: LeadingKind,
    stage_count: usize,
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
struct RawScheme {
    label: String,
    leading_kind: LeadingKind,
    stage_count: Option<usize>,
    coefficients: Vec<f64>,
}

impl<'de> Deserialize<'de> for SplittingScheme {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawScheme::deserialize(deserializer)?;
        let scheme = SplittingScheme::new(raw.label, raw.leading_kind, raw.coefficients)
            .map_err(serde::de::Error::custom)?;
        if let Some(r) = raw.stage_count {
            if r != scheme.stage_count {
                return Err(serde::de::Error::custom(format!(
                    "stage_count {r} does not match {} coefficients",
                    scheme.coefficients.len()
                )));
            }
        }
        Ok(scheme)
    }
}

impl SplittingScheme {
    /// Builds a scheme, checking length, palindrome and consistency.
    pub fn new(
        label: impl Into<String>,
        leading_kind: LeadingKind,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        let label = label.into();
        let n = coefficients.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidScheme(format!(
                "`{label}`: need 2r+1 >= 3 coefficients, got {n}"
            )));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidScheme(format!(
                "`{label}`: non-finite coefficient {c}"
            )));
        }
        for i in 0..n / 2 {
            let (x, y) = (coefficients[i], coefficients[n - 1 - i]);
            if (x - y).abs() > CONSISTENCY_TOL * x.abs().max(y.abs()).max(1.0) {
                return Err(Error::InvalidScheme(format!(
                    "`{label}`: not a palindrome at position {} ({x} vs {y})",
                    i + 1
                )));
            }
        }
        let scheme = SplittingScheme {
            label,
            leading_kind,
            stage_count: (n - 1) / 2,
            coefficients,
        };
        let (drift, kick) = scheme.consistency_sums();
        if (drift - 1.0).abs() > CONSISTENCY_TOL || (kick - 1.0).abs() > CONSISTENCY_TOL {
            return Err(Error::InvalidScheme(format!(
                "`{}`: inconsistent, drift sum {drift}, kick sum {kick}",
                scheme.label
            )));
        }
        Ok(scheme)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn leading_kind(&self) -> LeadingKind {
        self.leading_kind
    }

    /// Number of gradient evaluations per fused time-step.
    pub fn stage_count(&self) -> usize {
        self.stage_count
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Flow kind of the `i`-th substep (0-based).
    pub fn flow(&self, i: usize) -> Flow {
        let leading = match self.leading_kind {
            LeadingKind::DriftFirst => Flow::Drift,
            LeadingKind::KickFirst => Flow::Kick,
        };
        match (leading, i % 2) {
            (f, 0) => f,
            (Flow::Drift, _) => Flow::Kick,
            (Flow::Kick, _) => Flow::Drift,
        }
    }

    /// Substeps in application order.
    pub fn substeps(&self) -> impl Iterator<Item = (Flow, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.flow(i), c))
    }

    /// Sums of the drift and kick coefficients.
    pub fn consistency_sums(&self) -> (f64, f64) {
        self.substeps()
            .fold((0.0, 0.0), |(d, k), (flow, c)| match flow {
                Flow::Drift => (d + c, k),
                Flow::Kick => (d, k + c),
            })
    }

    /// The mirrored scheme: same numbers with drift and kick exchanged.
    pub fn swapped(&self) -> SplittingScheme {
        SplittingScheme {
            label: format!("{}~swap", self.label),
            leading_kind: self.leading_kind.swapped(),
            stage_count: self.stage_count,
            coefficients: self.coefficients.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidScheme(e.to_string()))
    }
}

impl fmt::Display for SplittingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.leading_kind {
            LeadingKind::DriftFirst => "drift-first",
            LeadingKind::KickFirst => "kick-first",
        };
        write!(f, "{} [{}, r={}] (", self.label, kind, self.stage_count)?;
        for (i, c) in self.coefficients.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Two-stage family `(a1, 1/2, 1 - 2 a1, 1/2, a1)`.
pub fn make_two_stage(a1: f64) -> SplittingScheme {
    SplittingScheme::new(
        format!("2stage(a1={a1})"),
        LeadingKind::DriftFirst,
        vec![a1, 0.5, 1.0 - 2.0 * a1, 0.5, a1],
    )
    .expect("two-stage family is consistent for finite a1")
}

/// Three-stage family `(a1, b1, 1/2 - a1, 1 - 2 b1, 1/2 - a1, b1, a1)`.
pub fn make_three_stage(a1: f64, b1: f64) -> SplittingScheme {
    let a2 = 0.5 - a1;
    let b2 = 1.0 - 2.0 * b1;
    SplittingScheme::new(
        format!("3stage(a1={a1},b1={b1})"),
        LeadingKind::DriftFirst,
        vec![a1, b1, a2, b2, a2, b1, a1],
    )
    .expect("three-stage family is consistent for finite inputs")
}

/// Sign choice in the double-root family of three-stage schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `+ sqrt(9 - h^2) / h^2` in both coefficient formulas.
    Plus,
    /// `- sqrt(9 - h^2) / h^2` in both coefficient formulas.
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Coefficients `(a1, b1)` of the three-stage scheme whose harmonic update
/// equals `-I` at `h_hat`, so that `A_h = -1` has a double root there.
pub fn three_stage_hhat_coefficients(h_hat: f64, branch: Branch) -> Result<(f64, f64)> {
    if !(h_hat > 0.0 && h_hat <= 3.0) {
        return Err(Error::Domain {
            what: "h_hat",
            value: h_hat,
            domain: "(0, 3]",
        });
    }
    let h2 = h_hat * h_hat;
    let root = (9.0 - h2).max(0.0).sqrt();
    let s = branch.sign() * root / h2;
    Ok((0.5 - 3.0 / h2 + s, 3.0 / h2 + s))
}

pub fn make_three_stage_from_hhat(h_hat: f64, branch: Branch) -> Result<SplittingScheme> {
    let (a1, b1) = three_stage_hhat_coefficients(h_hat, branch)?;
    Ok(make_three_stage(a1, b1).with_label(format!("3stage(h_hat={h_hat},{branch:?})")))
}

/// Four-stage family `(a1, b1, a2, b2, a3, b2, a2, b1, a1)` with
/// `b2 = 1/2 - b1` and `a3 = 1 - 2 a1 - 2 a2`.
pub fn make_four_stage(a1: f64, a2: f64, b1: f64) -> SplittingScheme {
    let b2 = 0.5 - b1;
    let a3 = 1.0 - 2.0 * a1 - 2.0 * a2;
    SplittingScheme::new(
        format!("4stage(a1={a1},a2={a2},b1={b1})"),
        LeadingKind::DriftFirst,
        vec![a1, b1, a2, b2, a3, b2, a2, b1, a1],
    )
    .expect("four-stage family is consistent for finite inputs")
}

/// `times` substeps of length `h / times`, with touching boundary substeps merged.
pub fn concatenate(scheme: &SplittingScheme, times: usize) -> Result<SplittingScheme> {
    if times == 0 {
        return Err(Error::Domain {
            what: "times",
            value: 0.0,
            domain: "positive integers",
        });
    }
    if times == 1 {
        return Ok(scheme.clone());
    }
    let m = times as f64;
    let c = scheme.coefficients();
    let n = c.len();
    let mut out = Vec::with_capacity(times * (n - 1) + 1);
    for k in 0..times {
        for (i, &x) in c.iter().enumerate() {
            let x = x / m;
            if k > 0 && i == 0 {
                *out.last_mut().expect("nonempty") += x;
            } else {
                out.push(x);
            }
        }
    }
    SplittingScheme::new(
        format!("{}x{times}", scheme.label()),
        scheme.leading_kind(),
        out,
    )
}

pub const MINRHO3_A1: f64 = 0.11888010966548;
pub const MINRHO3_B1: f64 = 0.29619504261126;
pub const MINRHO4_A1: f64 = 0.071353913450279725904;
pub const MINRHO4_A2: f64 = 0.268548791161230105820;
pub const MINRHO4_B1: f64 = 0.191667800000000000000;
/// Root of `48 a^3 - 72 a^2 + 38 a - 5 = 0`, the minimizer of `k31^2 + k32^2`
/// over the two-stage family.
pub const MCLACHLAN2_A1: f64 = 0.193_183_327_503_783_57;

/// `(3 - sqrt(3)) / 6`.
pub fn minrho2_a1() -> f64 {
    (3.0 - 3f64.sqrt()) / 6.0
}

/// Fourth-order three-stage coefficient `a1 = 1 / (2 (2 - 2^{1/3}))`.
pub fn yoshida4_a1() -> f64 {
    0.5 / (2.0 - 2f64.cbrt())
}

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: &[&str] = &[
    "VV",
    "PV",
    "MCLACHLAN2",
    "MCLACHLAN2_ESTAR",
    "MINRHO2",
    "MINRHO3",
    "MINRHO4",
    "YOSHIDA4",
];

/// Named methods.
///
/// `MCLACHLAN2_ESTAR` is not stored: it is recomputed by minimizing
/// `k31^2 + (k31 + k32)^2` over the two-stage family.
pub fn catalog(name: &str) -> Result<SplittingScheme> {
    let verlet = vec![0.5, 1.0, 0.5];
    let scheme = match name.to_ascii_uppercase().as_str() {
        "VV" => SplittingScheme::new("VV", LeadingKind::KickFirst, verlet)?,
        "PV" => SplittingScheme::new("PV", LeadingKind::DriftFirst, verlet)?,
        "MCLACHLAN2" => make_two_stage(MCLACHLAN2_A1),
        "MCLACHLAN2_ESTAR" => make_two_stage(crate::optimize::minimize_error_metric_two_stage(
            crate::optimize::ErrorMetric::Estar,
        )),
        "MINRHO2" => make_two_stage(minrho2_a1()),
        "MINRHO3" => make_three_stage(MINRHO3_A1, MINRHO3_B1),
        "MINRHO4" => make_four_stage(MINRHO4_A1, MINRHO4_A2, MINRHO4_B1),
        "YOSHIDA4" => {
            let a1 = yoshida4_a1();
            make_three_stage(a1, 2.0 * a1)
        }
        _ => {
            return Err(Error::UnknownScheme {
                name: name.to_string(),
                available: CATALOG_NAMES.join(", "),
            })
        }
    };
    Ok(scheme.with_label(name.to_ascii_uppercase()))
}
