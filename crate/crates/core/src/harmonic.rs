//! Exact analysis of splitting schemes on the standard harmonic oscillator
//! `H = (p^2 + q^2) / 2`.
//!
//! One time-step of any palindromic scheme acts on `(q, p)` as a 2x2 matrix
//! `[[A, B], [C, D]]` with `A = D` and unit determinant. When `|A| < 1` it can
//! be written as `[[cos θ, χ sin θ], [-sin θ / χ, cos θ]]`, and
//! `ρ(h) = (χ - 1/χ)^2 / 2` bounds the expected energy error of a Gaussian
//! HMC proposal for every trajectory length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{golden_section_max, richardson};
use crate::schemes::{Flow, SplittingScheme};

/// `|A_h|` may exceed one by this much and still count as stable. Double roots
/// of `A_h = -1` touch `-1` only up to rounding.
pub const STABILITY_TOL: f64 = 1e-12;

/// Below this size of `|B_h| + |C_h|` the quotient defining `χ` and `ρ` is
/// treated as a removable singularity and filled by continuation.
const SINGULAR_TOL: f64 = 1e-6;

/// Offsets used for the continuation of `χ` and `ρ` across removable singularities.
const CONTINUATION_EPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

/// Default number of grid points used by [`rho_norm`].
pub const RHO_NORM_GRID: usize = 4096;

/// One-step update matrix `[[a, b], [c, d]]` at step size `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicUpdate {
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HarmonicUpdate {
    pub fn identity(h: f64) -> Self {
        HarmonicUpdate {
            h,
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &HarmonicUpdate) -> HarmonicUpdate {
        HarmonicUpdate {
            h: self.h,
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn pow(&self, n: u64) -> HarmonicUpdate {
        let mut result = HarmonicUpdate::identity(self.h);
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            n >>= 1;
        }
        result
    }

    pub fn apply(&self, q: f64, p: f64) -> (f64, f64) {
        (self.a * q + self.b * p, self.c * q + self.d * p)
    }

    /// Update of the mirrored (drift/kick exchanged) integrator: `[[A, -C], [-B, D]]`.
    pub fn swapped(&self) -> HarmonicUpdate {
        HarmonicUpdate {
            h: self.h,
            a: self.a,
            b: -self.c,
            c: -self.b,
            d: self.d,
        }
    }
}

/// Product of the drift `[[1, t], [0, 1]]` and kick `[[1, 0], [-t, 1]]` shears.
pub fn harmonic_update(scheme: &SplittingScheme, h: f64) -> HarmonicUpdate {
    let (mut a, mut b, mut c, mut d) = (1.0, 0.0, 0.0, 1.0);
    for (flow, coef) in scheme.substeps() {
        let t = coef * h;
        match flow {
            Flow::Drift => {
                a += t * c;
                b += t * d;
            }
            Flow::Kick => {
                c -= t * a;
                d -= t * b;
            }
        }
    }
    HarmonicUpdate { h, a, b, c, d }
}

/// Stability and energy-error data at one step size.
///
/// `theta`, `chi` and `rho` are NaN when the step is unstable. `theta` takes the
/// sign of `b` so that `chi > 0`. `rho` is infinite on weakly unstable steps
/// (`|a| = 1` with `b` or `c` nonzero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDiagnostics {
    pub h: f64,
    pub stable: bool,
    pub theta: f64,
    pub chi: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy)]
enum Point {
    Unstable,
    Removable,
    Regular { theta: f64, chi: f64, rho: f64 },
}

fn classify(u: &HarmonicUpdate) -> Point {
    if !(u.a.abs() <= 1.0 + STABILITY_TOL) {
        return Point::Unstable;
    }
    let size = u.b.abs() + u.c.abs();
    if size <= SINGULAR_TOL && u.h > 2.0 * CONTINUATION_EPS[0] {
        return Point::Removable;
    }
    let sin2 = -u.b * u.c;
    let sign = if u.b > 0.0 || (u.b == 0.0 && u.c < 0.0) {
        1.0
    } else {
        -1.0
    };
    if sin2 <= 0.0 {
        // |a| = 1 with one off-diagonal entry left: linear growth
        let theta = 0f64.atan2(u.a);
        let chi = if u.b.abs() > u.c.abs() { f64::INFINITY } else { 0.0 };
        return Point::Regular {
            theta,
            chi,
            rho: f64::INFINITY,
        };
    }
    let sin = sign * sin2.sqrt();
    let theta = sin.atan2(u.a);
    let chi = (-u.b / u.c).sqrt();
    let rho = -(u.b + u.c).powi(2) / (2.0 * u.b * u.c);
    Point::Regular { theta, chi, rho }
}

/// `(θ_h, χ_h, ρ(h))` at `h`, with the removable singularity at `sin θ_h = 0`
/// filled by symmetric continuation and Richardson extrapolation.
pub fn diagnostics(scheme: &SplittingScheme, h: f64) -> HarmonicDiagnostics {
    let u = harmonic_update(scheme, h);
    let nan = HarmonicDiagnostics {
        h,
        stable: false,
        theta: f64::NAN,
        chi: f64::NAN,
        rho: f64::NAN,
    };
    match classify(&u) {
        Point::Unstable => nan,
        Point::Regular { theta, chi, rho } => HarmonicDiagnostics {
            h,
            stable: true,
            theta,
            chi,
            rho,
        },
        Point::Removable => {
            let theta = 0f64.atan2(u.a);
            let (chi, rho) = continue_across(scheme, h);
            HarmonicDiagnostics {
                h,
                stable: true,
                theta,
                chi,
                rho,
            }
        }
    }
}

fn continue_across(scheme: &SplittingScheme, h: f64) -> (f64, f64) {
    let sample = |x: f64| match classify(&harmonic_update(scheme, x)) {
        Point::Regular { chi, rho, .. } => Some((chi, rho)),
        _ => None,
    };
    let mut sym = Vec::with_capacity(CONTINUATION_EPS.len());
    let mut right = Vec::with_capacity(CONTINUATION_EPS.len());
    let mut left = Vec::with_capacity(CONTINUATION_EPS.len());
    for eps in CONTINUATION_EPS {
        let (r, l) = (sample(h + eps), sample(h - eps));
        if let (Some(r), Some(l)) = (r, l) {
            sym.push(((r.0 + l.0) / 2.0, (r.1 + l.1) / 2.0));
        }
        if let Some(r) = r {
            right.push(r);
        }
        if let Some(l) = l {
            left.push(l);
        }
    }
    let n = CONTINUATION_EPS.len();
    let extrapolate = |vals: &[(f64, f64)], p: i32, levels: usize| {
        let chis: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let rhos: Vec<f64> = vals.iter().map(|v| v.1).collect();
        (
            richardson(&chis, 2.0, p, levels).0,
            richardson(&rhos, 2.0, p, levels).0.max(0.0),
        )
    };
    if sym.len() == n {
        extrapolate(&sym, 2, n - 1)
    } else if right.len() == n {
        extrapolate(&right, 1, n - 1)
    } else if left.len() == n {
        extrapolate(&left, 1, n - 1)
    } else {
        (f64::NAN, f64::INFINITY)
    }
}

/// `ρ(h)` for the two-stage family `(a1, 1/2, 1 - 2 a1, 1/2, a1)` in closed form.
pub fn rho_closed_form_two_stage(a1: f64, h: f64) -> Result<f64> {
    let h2 = h * h;
    let b = 0.5 - a1;
    let den = 8.0 * (2.0 - a1 * h2) * (2.0 - b * h2) * (1.0 - a1 * b * h2);
    if !(den > 0.0) {
        return Err(Error::Unstable {
            scheme: format!("2stage(a1={a1})"),
            h,
        });
    }
    let inner = 2.0 * a1 * a1 * b * h2 + 4.0 * a1 * a1 - 6.0 * a1 + 1.0;
    Ok(h2 * h2 * inner * inner / den)
}

/// `max_{0 < h < h_bar} ρ(h)` on the default grid.
pub fn rho_norm(scheme: &SplittingScheme, h_bar: f64) -> f64 {
    rho_norm_with_grid(scheme, h_bar, RHO_NORM_GRID)
}

/// `max_{0 < h < h_bar} ρ(h)`: a uniform grid of `points` steps plus a
/// golden-section refinement around the largest local maxima.
///
/// Returns `+inf` when any grid point is unstable.
pub fn rho_norm_with_grid(scheme: &SplittingScheme, h_bar: f64, points: usize) -> f64 {
    assert!(h_bar > 0.0 && points >= 2);
    let step = h_bar / points as f64;
    let hs: Vec<f64> = (1..=points).map(|k| k as f64 * step).collect();
    let mut rho = Vec::with_capacity(points);
    for &h in &hs {
        let d = diagnostics(scheme, h);
        if !d.stable || !d.rho.is_finite() {
            return f64::INFINITY;
        }
        rho.push(d.rho);
    }
    let mut peaks: Vec<usize> = (1..points)
        .filter(|&k| rho[k] >= rho[k - 1] && (k + 1 == points || rho[k] >= rho[k + 1]))
        .collect();
    peaks.sort_by(|&i, &j| rho[j].total_cmp(&rho[i]));
    peaks.truncate(8);

    let mut best = rho.iter().copied().fold(0.0, f64::max);
    for k in peaks {
        let lo = hs[k - 1];
        let hi = if k + 1 < points { hs[k + 1] } else { h_bar };
        let (_, v) = golden_section_max(
            |h| {
                let d = diagnostics(scheme, h);
                if d.rho.is_finite() {
                    d.rho
                } else {
                    f64::NEG_INFINITY
                }
            },
            lo,
            hi,
            1e-13,
            200,
        );
        best = best.max(v);
    }
    best
}

/// Right end of the largest stability interval `(0, h_max)`.
///
/// Scans `|A_h| <= 1` with step `1e-3 (2r + 1)` up to `2r + 1` and bisects the
/// first failure. Points where `A_h` touches `-1` without crossing it do not
/// end the interval.
pub fn stability_interval(scheme: &SplittingScheme) -> f64 {
    let upper = (2 * scheme.stage_count() + 1) as f64;
    let step = 1e-3 * upper;
    let stable = |h: f64| harmonic_update(scheme, h).a.abs() <= 1.0 + STABILITY_TOL;
    let n = (upper / step).round() as usize;
    let mut last_stable = 0.0;
    for k in 1..=n {
        let h = k as f64 * step;
        if stable(h) {
            last_stable = h;
            continue;
        }
        if k == 1 && !stable(0.5 * step) {
            return 0.0;
        }
        let (mut lo, mut hi) = (last_stable, h);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if stable(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    upper
}

/// Leading modified-Hamiltonian coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorConstants {
    pub k31: f64,
    pub k32: f64,
    /// `k31^2 + k32^2`.
    pub e_metric: f64,
    /// `k31^2 + (k31 + k32)^2`.
    pub estar_metric: f64,
}

impl ErrorConstants {
    pub fn new(k31: f64, k32: f64) -> Self {
        ErrorConstants {
            k31,
            k32,
            e_metric: k31 * k31 + k32 * k32,
            estar_metric: k31 * k31 + (k31 + k32).powi(2),
        }
    }
}

/// Extracts `k31`, `k32` from the small-step expansions
/// `θ_h / h = 1 + t2 h^2 + O(h^4)` and `χ_h = 1 + c2 h^2 + O(h^4)`.
///
/// For `A = p^2/2`, `B = q^2/2` the brackets are `{A,A,B} = p^2` and
/// `{B,A,B} = -q^2`, so the modified Hamiltonian is
/// `((1 + 2 k31 h^2) p^2 + (1 - 2 k32 h^2) q^2) / 2`. Matching it with
/// `θ/(2h) (χ p^2 + q^2/χ)` gives `k31 = (t2 + c2)/2`, `k32 = (c2 - t2)/2`.
pub fn error_constants(scheme: &SplittingScheme) -> Result<ErrorConstants> {
    const H0: f64 = 0.2;
    const HALVINGS: usize = 6;
    let mut t2 = Vec::with_capacity(HALVINGS + 1);
    let mut c2 = Vec::with_capacity(HALVINGS + 1);
    for k in 0..=HALVINGS {
        let h = H0 / 2f64.powi(k as i32);
        let u = harmonic_update(scheme, h);
        let sin2 = -u.b * u.c;
        if !(u.a.abs() < 1.0) || !(sin2 > 0.0) || !(u.b > 0.0) {
            return Err(Error::Extrapolation(format!(
                "`{}` is not stable with b > 0 at h = {h}",
                scheme.label()
            )));
        }
        let theta = sin2.sqrt().atan2(u.a);
        let chi = (-u.b / u.c).sqrt();
        t2.push((theta / h - 1.0) / (h * h));
        c2.push((chi - 1.0) / (h * h));
    }
    let (t, dt) = richardson(&t2, 2.0, 2, 2);
    let (c, dc) = richardson(&c2, 2.0, 2, 2);
    let tol = 1e-8;
    if !(dt <= tol * t.abs().max(1.0)) || !(dc <= tol * c.abs().max(1.0)) {
        return Err(Error::Extrapolation(format!(
            "`{}`: last corrections {dt:e}, {dc:e}",
            scheme.label()
        )));
    }
    Ok(ErrorConstants::new((t + c) / 2.0, (c - t) / 2.0))
}

/// `sum_j ρ(ω_j h)`, which bounds the expected energy error for a Gaussian
/// target with frequencies `ω_j`.
pub fn rho_bound_multivariate(scheme: &SplittingScheme, h: f64, omegas: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (index, &omega) in omegas.iter().enumerate() {
        let d = diagnostics(scheme, omega * h);
        if !d.stable || !d.rho.is_finite() {
            return Err(Error::UnstableFrequency {
                index,
                omega,
                scaled: omega * h,
            });
        }
        total += d.rho;
    }
    Ok(total)
}
