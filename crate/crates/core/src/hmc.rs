//! Hybrid Monte Carlo with splitting integrators.
//!
//! Each Markov step draws a fresh momentum, draws `u ~ U(-jitter, jitter)`,
//! integrates `I` time-steps of length `h = (1 + u) h0` and accepts with
//! probability `min(1, exp(-Δ))`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::diagnostics;
use crate::schemes::{Flow, SplittingScheme};
use crate::targets::Target;

/// Initial position of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Start {
    /// Exact draw from the target (quadratic targets only).
    ExactStationary,
    GivenPoint(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcConfig {
    /// Mean step size.
    pub h0: f64,
    /// Half-width of the relative step-size randomization.
    pub jitter: f64,
    /// Time-steps per proposal, `I`.
    pub steps_per_proposal: usize,
    /// Recorded Markov steps, `N`.
    pub chain_length: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Stream of the generator, so replicas sharing a seed stay independent.
    pub stream: u64,
    pub start: Start,
    /// Keep one [`StepRecord`] per recorded step.
    pub record: bool,
}

impl HmcConfig {
    /// Stationary start, jitter 0.2, no burn-in.
    pub fn new(h0: f64, steps_per_proposal: usize, chain_length: usize) -> Self {
        HmcConfig {
            h0,
            jitter: 0.2,
            steps_per_proposal,
            chain_length,
            burn_in: 0,
            seed: 0,
            stream: 0,
            start: Start::ExactStationary,
            record: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(Error::Config(format!("h0 must be positive, got {}", self.h0)));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Config(format!(
                "jitter must lie in [0, 1), got {}",
                self.jitter
            )));
        }
        if self.steps_per_proposal == 0 || self.chain_length == 0 {
            return Err(Error::Config(
                "steps per proposal and chain length must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub h_used: f64,
    /// `+inf` when the trajectory left the floating-point range.
    pub delta: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub proposals: usize,
    pub accepted: usize,
    pub accepted_fraction: f64,
    /// Time average of `Δ` over proposals with a finite energy error.
    pub mean_energy_error: f64,
    pub mean_squared_energy_error: f64,
    /// Standard error of `mean_energy_error`, ignoring autocorrelation.
    pub energy_error_std_err: f64,
    /// Proposals whose trajectory overflowed; they count as rejections.
    pub non_finite: usize,
    /// Includes burn-in and the initial evaluation of a kick-first scheme.
    pub gradient_evaluations: u64,
    pub per_step_records: Option<Vec<StepRecord>>,
}

/// Splitting integrator with a cached gradient at the current position.
///
/// Drifts invalidate the cache and kicks refill it, so adjacent kicks across
/// time-steps share one evaluation: each time-step costs exactly `r`
/// evaluations once the cache is warm.
pub struct Integrator<'a> {
    target: &'a Target,
    substeps: Vec<(Flow, f64)>,
    inv_mass: Vec<f64>,
    grad: Vec<f64>,
    grad_valid: bool,
    evaluations: u64,
}

impl<'a> Integrator<'a> {
    pub fn new(scheme: &SplittingScheme, target: &'a Target) -> Self {
        Integrator {
            target,
            substeps: scheme.substeps().collect(),
            inv_mass: target.mass_diag().iter().map(|m| 1.0 / m).collect(),
            grad: vec![0.0; target.dim()],
            grad_valid: false,
            evaluations: 0,
        }
    }

    /// Gradient evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Evaluates and caches `∇V(q)`.
    pub fn prime(&mut self, q: &[f64]) {
        self.target.gradient_into(q, &mut self.grad);
        self.evaluations += 1;
        self.grad_valid = true;
    }

    pub fn invalidate(&mut self) {
        self.grad_valid = false;
    }

    /// Applies `steps` time-steps of length `h` to `(q, p)` in place.
    pub fn run(&mut self, h: f64, steps: usize, q: &mut [f64], p: &mut [f64]) -> Result<()> {
        let d = self.target.dim();
        if q.len() != d {
            return Err(Error::Dimension { expected: d, got: q.len() });
        }
        if p.len() != d {
            return Err(Error::Dimension { expected: d, got: p.len() });
        }
        for step in 0..steps {
            for k in 0..self.substeps.len() {
                let (flow, coef) = self.substeps[k];
                let t = coef * h;
                match flow {
                    Flow::Drift => {
                        for ((x, v), w) in q.iter_mut().zip(p.iter()).zip(&self.inv_mass) {
                            *x += t * v * w;
                        }
                        self.grad_valid = false;
                    }
                    Flow::Kick => {
                        if !self.grad_valid {
                            self.target.gradient_into(q, &mut self.grad);
                            self.evaluations += 1;
                            self.grad_valid = true;
                        }
                        for (v, g) in p.iter_mut().zip(&self.grad) {
                            *v -= t * g;
                        }
                    }
                }
            }
            let finite = q.iter().chain(p.iter()).all(|x| x.is_finite());
            if !finite {
                self.grad_valid = false;
                return Err(Error::NonFinite { step: step + 1 });
            }
        }
        Ok(())
    }
}

/// `I` time-steps of `scheme` from `(q, p)`, starting with an empty gradient cache.
pub fn integrate(
    scheme: &SplittingScheme,
    target: &Target,
    h: f64,
    steps: usize,
    q: &[f64],
    p: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut q = q.to_vec();
    let mut p = p.to_vec();
    Integrator::new(scheme, target).run(h, steps, &mut q, &mut p)?;
    Ok((q, p))
}

/// Runs one Markov chain. Fully determined by `config.seed` and `config.stream`.
pub fn hmc_run(target: &Target, scheme: &SplittingScheme, config: &HmcConfig) -> Result<ChainSummary> {
    config.validate()?;
    let d = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);

    let mut q = match &config.start {
        Start::ExactStationary => {
            let mut q = vec![0.0; d];
            target.draw_position(&mut rng, &mut q)?;
            q
        }
        Start::GivenPoint(q) => {
            if q.len() != d {
                return Err(Error::Dimension { expected: d, got: q.len() });
            }
            q.clone()
        }
    };

    let mut integrator = Integrator::new(scheme, target);
    integrator.prime(&q);
    // the priming evaluation is only needed when the first substep is a kick
    let primed_for_free = scheme.flow(0) == Flow::Drift;
    let mut p = vec![0.0; d];
    let mut q_new = vec![0.0; d];
    let mut saved_grad = vec![0.0; d];

    let total = config.burn_in + config.chain_length;
    let mut accepted = 0usize;
    let mut non_finite = 0usize;
    let (mut sum, mut sum_sq, mut finite_count) = (0.0, 0.0, 0usize);
    let mut records = config.record.then(|| Vec::with_capacity(config.chain_length));

    for step in 0..total {
        target.draw_momentum(&mut rng, &mut p);
        let u = config.jitter * (2.0 * rng.random::<f64>() - 1.0);
        let h = (1.0 + u) * config.h0;
        let h_start = target.hamiltonian(&q, &p);

        q_new.copy_from_slice(&q);
        saved_grad.copy_from_slice(&integrator.grad);
        let delta = match integrator.run(h, config.steps_per_proposal, &mut q_new, &mut p) {
            Ok(()) => {
                let v = target.hamiltonian(&q_new, &p) - h_start;
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            }
            Err(Error::NonFinite { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let draw: f64 = rng.random();
        let accept = delta.is_finite() && (delta <= 0.0 || draw < (-delta).exp());
        if accept {
            q.copy_from_slice(&q_new);
        } else {
            integrator.grad.copy_from_slice(&saved_grad);
            integrator.grad_valid = true;
        }

        if step < config.burn_in {
            continue;
        }
        if accept {
            accepted += 1;
        }
        if delta.is_finite() {
            sum += delta;
            sum_sq += delta * delta;
            finite_count += 1;
        } else {
            non_finite += 1;
        }
        if let Some(r) = records.as_mut() {
            r.push(StepRecord {
                step: step - config.burn_in,
                h_used: h,
                delta,
                accepted: accept,
            });
        }
    }

    let n = config.chain_length;
    let (mean, mean_sq, std_err) = if finite_count > 0 {
        let m = sum / finite_count as f64;
        let m2 = sum_sq / finite_count as f64;
        let var = (m2 - m * m).max(0.0) * finite_count as f64 / (finite_count.max(2) - 1) as f64;
        (m, m2, (var / finite_count as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(ChainSummary {
        proposals: n,
        accepted,
        accepted_fraction: accepted as f64 / n as f64,
        mean_energy_error: mean,
        mean_squared_energy_error: mean_sq,
        energy_error_std_err: std_err,
        non_finite,
        gradient_evaluations: integrator.evaluations() - u64::from(primed_for_free),
        per_step_records: records,
    })
}

/// Independent replicas on streams `0..replicas`, in parallel. The output order
/// does not depend on scheduling.
pub fn run_replicas(
    target: &Target,
    scheme: &SplittingScheme,
    config: &HmcConfig,
    replicas: usize,
) -> Result<Vec<ChainSummary>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut c = config.clone();
            c.stream = r as u64;
            hmc_run(target, scheme, &c)
        })
        .collect()
}

/// `E(Δ) = sin²(I θ_h) ρ(h)` for the standard oscillator at stationarity.
pub fn expected_energy_error_harmonic(scheme: &SplittingScheme, h: f64, steps: usize) -> Result<f64> {
    let d = diagnostics(scheme, h);
    if !d.stable || !d.rho.is_finite() {
        return Err(Error::Unstable {
            scheme: scheme.label().to_string(),
            h,
        });
    }
    Ok((steps as f64 * d.theta).sin().powi(2) * d.rho)
}

/// Stationary `E(Δ)` for independent oscillators with frequencies `omegas`,
/// averaged over the step-size randomization `h = (1 + u) h0`,
/// `u ~ U(-jitter, jitter)`. Composite Simpson rule with `nodes` intervals.
pub fn expected_energy_error_jittered(
    scheme: &SplittingScheme,
    h0: f64,
    jitter: f64,
    steps: usize,
    omegas: &[f64],
    nodes: usize,
) -> Result<f64> {
    let per_h = |h: f64| -> Result<f64> {
        omegas
            .iter()
            .map(|w| expected_energy_error_harmonic(scheme, w * h, steps))
            .sum()
    };
    if jitter == 0.0 {
        return per_h(h0);
    }
    let n = nodes.max(2) + nodes % 2;
    let width = 2.0 * jitter / n as f64;
    let values: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|k| per_h((1.0 - jitter + k as f64 * width) * h0))
        .collect::<Result<_>>()?;
    let mut acc = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * width / 3.0 / (2.0 * jitter))
}

const CHECK_SEED: u64 = 0x5eed_cafe;

fn check_points(target: &Target, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    (0..count)
        .map(|_| match target.sample_exact(&mut rng) {
            Ok(pair) => pair,
            Err(_) => {
                let mut draw = || -> Vec<f64> {
                    (0..target.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
                };
                let q = draw();
                (q, draw())
            }
        })
        .collect()
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest relative distance between a random start and its image under
/// `S ∘ Ψ ∘ S ∘ Ψ`, where `S` flips the momentum.
pub fn reversibility_check(
    scheme: &SplittingScheme,
    target: &Target,
    h: f64,
    steps: usize,
    sample_count: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (q0, p0) in check_points(target, sample_count) {
        let Ok((q1, mut p1)) = integrate(scheme, target, h, steps, &q0, &p0) else {
            return f64::INFINITY;
        };
        p1.iter_mut().for_each(|x| *x = -*x);
        let Ok((q2, mut p2)) = integrate(scheme, target, h, steps, &q1, &p1) else {
            return f64::INFINITY;
        };
        p2.iter_mut().for_each(|x| *x = -*x);
        let scale = max_abs(q0.iter().chain(&p0).copied()).max(1.0);
        let dev = max_abs(q2.iter().zip(&q0).chain(p2.iter().zip(&p0)).map(|(a, b)| a - b));
        worst = worst.max(dev / scale);
    }
    worst
}

/// Largest `|Δ(q*, -p*) + Δ(q, p)|` over random starts.
pub fn energy_flip_check(
    scheme: &SplittingScheme,
    target: &Target,
    h: f64,
    steps: usize,
    sample_count: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (q0, p0) in check_points(target, sample_count) {
        let Ok((q1, p1)) = integrate(scheme, target, h, steps, &q0, &p0) else {
            return f64::INFINITY;
        };
        let forward = target.hamiltonian(&q1, &p1) - target.hamiltonian(&q0, &p0);
        let flipped: Vec<f64> = p1.iter().map(|x| -x).collect();
        let Ok((q2, p2)) = integrate(scheme, target, h, steps, &q1, &flipped) else {
            return f64::INFINITY;
        };
        let backward = target.hamiltonian(&q2, &p2) - target.hamiltonian(&q1, &flipped);
        worst = worst.max((forward + backward).abs());
    }
    worst
}

/// Largest `|det Ψ'(q, p) - 1|` over random points. Quadratic targets give a
/// linear map whose columns are computed exactly; otherwise the Jacobian comes
/// from central differences with step `1e-5`.
pub fn volume_check(
    scheme: &SplittingScheme,
    target: &Target,
    h: f64,
    steps: usize,
    sample_count: usize,
) -> f64 {
    let d = target.dim();
    let flow = |z: &[f64]| -> Option<Vec<f64>> {
        let (q, p) = integrate(scheme, target, h, steps, &z[..d], &z[d..]).ok()?;
        Some(q.into_iter().chain(p).collect())
    };
    let unit = |k: usize| -> Vec<f64> {
        let mut e = vec![0.0; 2 * d];
        e[k] = 1.0;
        e
    };
    let det_of = |columns: Vec<Vec<f64>>| -> f64 {
        let m = DMatrix::from_fn(2 * d, 2 * d, |i, j| columns[j][i]);
        m.determinant()
    };

    if target.is_quadratic() {
        let mut columns = Vec::with_capacity(2 * d);
        for k in 0..2 * d {
            match flow(&unit(k)) {
                Some(c) => columns.push(c),
                None => return f64::INFINITY,
            }
        }
        return (det_of(columns) - 1.0).abs();
    }

    const EPS: f64 = 1e-5;
    let mut worst: f64 = 0.0;
    for (q, p) in check_points(target, sample_count) {
        let z: Vec<f64> = q.into_iter().chain(p).collect();
        let mut columns = Vec::with_capacity(2 * d);
        for k in 0..2 * d {
            let (mut plus, mut minus) = (z.clone(), z.clone());
            plus[k] += EPS;
            minus[k] -= EPS;
            let (Some(fp), Some(fm)) = (flow(&plus), flow(&minus)) else {
                return f64::INFINITY;
            };
            columns.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * EPS)).collect());
        }
        worst = worst.max((det_of(columns) - 1.0).abs());
    }
    worst
}
