//! Minimax design of splitting coefficients.
//!
//! The objective is `‖ρ‖ = max_{0<h<h_bar} ρ(h)`. The 2-stage family has one
//! free coefficient. For 3 and 4 stages the search is restricted to schemes
//! where `A_h = -1` has a double root `ĥ`, which is what stretches the
//! stability interval past the point where `ρ` would otherwise blow up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{harmonic_update, rho_norm};
use crate::numeric::{golden_section_min, newton2, NelderMead};
use crate::schemes::{
    make_four_stage, make_three_stage, make_two_stage, three_stage_hhat_coefficients, Branch,
    SplittingScheme,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    TwoStage,
    ThreeStage,
    FourStage,
}

impl Family {
    pub fn stage_count(self) -> usize {
        match self {
            Family::TwoStage => 2,
            Family::ThreeStage => 3,
            Family::FourStage => 4,
        }
    }
}

/// Result of an optimizer run.
///
/// `argmin` holds the free coefficients: `[a1]`, `[a1, b1]` or `[a1, a2, b1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub family: Family,
    pub argmin: Vec<f64>,
    pub scheme: SplittingScheme,
    pub rho_norm_at_min: f64,
    pub h_bar: f64,
    pub double_root_location: Option<f64>,
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Local minima of a sampled objective, ignoring non-finite samples.
fn grid_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&k| {
            let v = values[k];
            v.is_finite()
                && (k == 0 || v < values[k - 1] || !values[k - 1].is_finite())
                && (k + 1 == n || v <= values[k + 1])
        })
        .collect()
}

/// Golden-section refinement of the best grid point of `objective`, which is
/// sampled at `xs`. Fails with the list of local minima if there is more than
/// one and `unimodal` is required.
fn refine_1d<F>(
    objective: &mut F,
    xs: &[f64],
    unimodal: bool,
    trace: &mut Vec<(Vec<f64>, f64)>,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let v = objective(x);
            trace.push((vec![x], v));
            v
        })
        .collect();
    let minima = grid_minima(&values);
    if minima.is_empty() || (unimodal && minima.len() > 1) {
        return Err(Error::Bracket {
            minima: minima.iter().map(|&k| xs[k]).collect(),
        });
    }
    let k = *minima
        .iter()
        .min_by(|&&i, &&j| values[i].total_cmp(&values[j]))
        .expect("nonempty");
    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(xs.len() - 1)];
    let (x, v) = golden_section_min(
        |x| {
            let v = objective(x);
            trace.push((vec![x], v));
            v
        },
        lo,
        hi,
        1e-12,
        200,
    );
    Ok(if v <= values[k] { (x, v) } else { (xs[k], values[k]) })
}

/// Minimizes `‖ρ‖_(h_bar)` over the 2-stage family, `0 < a1 < 1/2`.
pub fn optimize_two_stage(h_bar: f64) -> Result<OptimizationReport> {
    let ceiling = 2.0 * 2f64.sqrt();
    if !(h_bar > 0.0 && h_bar < ceiling) {
        return Err(Error::Domain {
            what: "h_bar",
            value: h_bar,
            domain: "(0, 2*sqrt(2))",
        });
    }
    let mut trace = Vec::new();
    let xs: Vec<f64> = (1..200).map(|k| k as f64 * 0.5 / 200.0).collect();
    let mut objective = |a1: f64| rho_norm(&make_two_stage(a1), h_bar);
    let (a1, value) = refine_1d(&mut objective, &xs, true, &mut trace)?;
    let scheme = make_two_stage(a1);
    Ok(OptimizationReport {
        family: Family::TwoStage,
        argmin: vec![a1],
        rho_norm_at_min: rho_norm(&scheme, h_bar),
        scheme,
        h_bar,
        double_root_location: None,
        trace: {
            debug_assert!(value.is_finite());
            trace
        },
    })
}

/// Both 3-stage coefficient pairs `(a1, b1)` for which `A_h = -1` has a double
/// root at `h_hat`. At `h_hat = 3` the two branches coincide and one pair is
/// returned.
pub fn solve_double_root_three_stage(h_hat: f64) -> Result<Vec<(f64, f64)>> {
    let plus = three_stage_hhat_coefficients(h_hat, Branch::Plus)?;
    let minus = three_stage_hhat_coefficients(h_hat, Branch::Minus)?;
    if (plus.0 - minus.0).abs() < 1e-14 && (plus.1 - minus.1).abs() < 1e-14 {
        Ok(vec![plus])
    } else {
        Ok(vec![plus, minus])
    }
}

/// Minimizes `‖ρ‖_(3)` over the one-parameter double-root family, both branches.
pub fn optimize_three_stage() -> Result<OptimizationReport> {
    let h_bar = 3.0;
    let mut trace = Vec::new();
    let xs: Vec<f64> = (1..=300).map(|k| k as f64 * 0.01).collect();
    let mut best: Option<(f64, f64, Branch)> = None;
    for branch in [Branch::Minus, Branch::Plus] {
        let mut objective = |h_hat: f64| match three_stage_hhat_coefficients(h_hat, branch) {
            Ok((a1, b1)) => rho_norm(&make_three_stage(a1, b1), h_bar),
            Err(_) => f64::INFINITY,
        };
        // The family is only explored, not assumed unimodal: keep the best basin.
        if let Ok((h_hat, v)) = refine_1d(&mut objective, &xs, false, &mut trace) {
            if best.is_none_or(|b| v < b.1) {
                best = Some((h_hat, v, branch));
            }
        }
    }
    let (h_hat, _, branch) =
        best.ok_or_else(|| Error::NoConvergence("no finite ‖ρ‖ on either branch".into()))?;
    let (a1, b1) = three_stage_hhat_coefficients(h_hat, branch)?;
    let scheme = make_three_stage(a1, b1);
    Ok(OptimizationReport {
        family: Family::ThreeStage,
        argmin: vec![a1, b1],
        rho_norm_at_min: rho_norm(&scheme, h_bar),
        scheme,
        h_bar,
        double_root_location: Some(h_hat),
        trace,
    })
}

/// Off-diagonal residuals of the 4-stage update at `h_hat`. On the branch
/// `A < 0` they vanish exactly when the update is `-I`, i.e. `A_h = -1` has a
/// double root. Imposing `A = -1` directly is degenerate since `A + 1` is
/// quadratic in the distance to the solution set.
fn four_stage_residual(a1: f64, a2: f64, b1: f64, h_hat: f64) -> ([f64; 2], f64) {
    let u = harmonic_update(&make_four_stage(a1, a2, b1), h_hat);
    ([u.b, u.c], u.a)
}

const FOUR_STAGE_HHAT_STARTS: [f64; 6] = [2.8, 2.9, 3.0, 3.1, 3.2, 3.3];
const FOUR_STAGE_A2_STARTS: [f64; 8] = [0.15, 0.2, 0.25, 0.27, 0.3, 0.35, 0.4, 0.45];

/// Solves the double-root system for `(a2, ĥ)` given `(a1, b1)`. Among the
/// converged starts with `A_ĥ < 0` and `ĥ` in the window `[2.5, 3.5]`, the one
/// closest to `ĥ = 3.04` is kept.
pub fn solve_double_root_four_stage(a1: f64, b1: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &h0 in &FOUR_STAGE_HHAT_STARTS {
        for &a20 in &FOUR_STAGE_A2_STARTS {
            let root = newton2(
                |x| four_stage_residual(a1, x[0], b1, x[1]).0,
                [a20, h0],
                1e-13,
                60,
            );
            let Some([a2, h_hat]) = root else { continue };
            if !(2.5..=3.5).contains(&h_hat) || four_stage_residual(a1, a2, b1, h_hat).1 > 0.0 {
                continue;
            }
            if best.is_none_or(|(_, h)| (h_hat - 3.04).abs() < (h - 3.04).abs()) {
                best = Some((a2, h_hat));
            }
        }
    }
    best
}

/// Minimizes `‖ρ‖_(4)` over the two-parameter double-root family.
///
/// `(a1, b1)` are searched by a simplex method with restarts from a fixed set of
/// starts; `(a2, ĥ)` follow from the double-root system.
pub fn optimize_four_stage() -> Result<OptimizationReport> {
    let h_bar = 4.0;
    let mut trace = Vec::new();
    let mut objective = |x: &[f64]| -> f64 {
        let v = match solve_double_root_four_stage(x[0], x[1]) {
            Some((a2, _)) => rho_norm(&make_four_stage(x[0], a2, x[1]), h_bar),
            None => f64::INFINITY,
        };
        trace.push((x.to_vec(), v));
        if v.is_finite() && v > 0.0 {
            v.ln()
        } else {
            50.0
        }
    };
    let nm = NelderMead {
        max_evals: 600,
        x_tol: 1e-9,
        f_tol: 1e-12,
    };
    let starts = [[0.08, 0.2], [0.06, 0.2], [0.1, 0.25]];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, v, _) = nm.minimize(&mut objective, &start, &[0.01, 0.01]);
        if v < 50.0 && best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((x, v));
        }
    }
    let (x, _) = best.ok_or_else(|| Error::NoConvergence("4-stage double-root system".into()))?;
    let (a1, b1) = (x[0], x[1]);
    let (a2, h_hat) = solve_double_root_four_stage(a1, b1)
        .ok_or_else(|| Error::NoConvergence("4-stage double-root system at optimum".into()))?;
    let scheme = make_four_stage(a1, a2, b1);
    Ok(OptimizationReport {
        family: Family::FourStage,
        argmin: vec![a1, a2, b1],
        rho_norm_at_min: rho_norm(&scheme, h_bar),
        scheme,
        h_bar,
        double_root_location: Some(h_hat),
        trace,
    })
}

/// Solves the double-root system for `(a1, a2)` with `b1` and `ĥ` given.
fn solve_double_root_four_stage_fixed_b1(b1: f64, h_hat: f64, start: [f64; 2]) -> Option<[f64; 2]> {
    let mut starts = vec![start];
    for a1 in [0.05, 0.07, 0.09] {
        for a2 in [0.22, 0.26, 0.3] {
            starts.push([a1, a2]);
        }
    }
    starts.into_iter().find_map(|s| {
        let root = newton2(|x| four_stage_residual(x[0], x[1], b1, h_hat).0, s, 1e-13, 60)?;
        (four_stage_residual(root[0], root[1], b1, h_hat).1 < 0.0).then_some(root)
    })
}

/// 4-stage minimax with `b1` held fixed: a 1-D search over the double-root
/// location `ĥ`, with `(a1, a2)` from the double-root system.
pub fn optimize_four_stage_with_b1(b1: f64) -> Result<OptimizationReport> {
    let h_bar = 4.0;
    let mut trace = Vec::new();
    let mut warm = [0.07, 0.27];
    let mut objective = |h_hat: f64| match solve_double_root_four_stage_fixed_b1(b1, h_hat, warm) {
        Some(root) => {
            warm = root;
            rho_norm(&make_four_stage(root[0], root[1], b1), h_bar)
        }
        None => f64::INFINITY,
    };
    let xs: Vec<f64> = (0..=100).map(|k| 2.9 + k as f64 * 0.002).collect();
    let (h_hat, _) = refine_1d(&mut objective, &xs, false, &mut trace)?;
    let [a1, a2] = solve_double_root_four_stage_fixed_b1(b1, h_hat, warm)
        .ok_or_else(|| Error::NoConvergence(format!("double root at ĥ = {h_hat}")))?;
    let scheme = make_four_stage(a1, a2, b1);
    Ok(OptimizationReport {
        family: Family::FourStage,
        argmin: vec![a1, a2, b1],
        rho_norm_at_min: rho_norm(&scheme, h_bar),
        scheme,
        h_bar,
        double_root_location: Some(h_hat),
        trace,
    })
}

/// Error metric on the leading modified-Hamiltonian coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorMetric {
    /// `k31^2 + k32^2`
    E,
    /// `k31^2 + (k31 + k32)^2`
    Estar,
}

/// Closed-form `(k31, k32)` of the 2-stage family.
pub fn two_stage_error_constants(a1: f64) -> (f64, f64) {
    (
        (12.0 * a1 * a1 - 12.0 * a1 + 2.0) / 24.0,
        (1.0 - 6.0 * a1) / 24.0,
    )
}

pub fn error_metric_two_stage(metric: ErrorMetric, a1: f64) -> f64 {
    let (k31, k32) = two_stage_error_constants(a1);
    match metric {
        ErrorMetric::E => k31 * k31 + k32 * k32,
        ErrorMetric::Estar => k31 * k31 + (k31 + k32).powi(2),
    }
}

/// `a1` minimizing the chosen error metric over `0 <= a1 <= 1/2`.
///
/// Both metrics are convex there, so the minimizer is found by bisection on
/// the exact derivative.
pub fn minimize_error_metric_two_stage(metric: ErrorMetric) -> f64 {
    let slope = |a: f64| {
        let (k31, k32) = two_stage_error_constants(a);
        let (d31, d32) = ((24.0 * a - 12.0) / 24.0, -0.25);
        match metric {
            ErrorMetric::E => k31 * d31 + k32 * d32,
            ErrorMetric::Estar => k31 * d31 + (k31 + k32) * (d31 + d32),
        }
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
