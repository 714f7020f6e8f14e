//! Potential-energy targets `π(q) ∝ exp(-V(q))` with a diagonal mass matrix.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Potential {
    /// `V = ½ Σ k_j q_j²`
    Quadratic { stiffness: Vec<f64> },
    /// `V = q⁴ - q²`
    DoubleWell,
}

/// A sampling target. Gradient evaluations are counted; the counter is the
/// only mutable state and may be bumped from several threads.
#[derive(Debug)]
pub struct Target {
    name: String,
    potential: Potential,
    mass_diag: Vec<f64>,
    frequencies: Option<Vec<f64>>,
    gradient_calls: AtomicU64,
}

impl Clone for Target {
    fn clone(&self) -> Self {
        Target {
            name: self.name.clone(),
            potential: self.potential.clone(),
            mass_diag: self.mass_diag.clone(),
            frequencies: self.frequencies.clone(),
            gradient_calls: AtomicU64::new(self.gradient_evaluations()),
        }
    }
}

/// Gaussian with stiffness `j²` on coordinate `j = 1..d`, so that `ω_j = j`.
pub fn gaussian_chain(d: usize) -> Target {
    assert!(d >= 1, "dimension must be positive");
    let omegas: Vec<f64> = (1..=d).map(|j| j as f64).collect();
    let mut t = quadratic(omegas);
    t.name = format!("chain:{d}");
    t
}

/// One-dimensional double well `V(q) = q⁴ - q²` with modes at `±1/√2`.
pub fn double_well() -> Target {
    Target {
        name: "dwell".into(),
        potential: Potential::DoubleWell,
        mass_diag: vec![1.0],
        frequencies: None,
        gradient_calls: AtomicU64::new(0),
    }
}

/// Independent Gaussian coordinates with frequencies `omegas`, unit masses.
pub fn diagonal_gaussian(omegas: &[f64]) -> Result<Target> {
    if omegas.is_empty() {
        return Err(Error::TargetSpec("empty frequency list".into()));
    }
    if let Some(&w) = omegas.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::Domain {
            what: "frequency",
            value: w,
            domain: "(0, inf)",
        });
    }
    let mut t = quadratic(omegas.to_vec());
    t.name = format!(
        "diag:{}",
        omegas.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
    );
    Ok(t)
}

/// Standard normal in `d` dimensions.
pub fn standard_gaussian(d: usize) -> Target {
    assert!(d >= 1, "dimension must be positive");
    let mut t = quadratic(vec![1.0; d]);
    t.name = format!("gauss:{d}");
    t
}

fn quadratic(omegas: Vec<f64>) -> Target {
    Target {
        name: String::new(),
        mass_diag: vec![1.0; omegas.len()],
        potential: Potential::Quadratic {
            stiffness: omegas.iter().map(|w| w * w).collect(),
        },
        frequencies: Some(omegas),
        gradient_calls: AtomicU64::new(0),
    }
}

impl Target {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.mass_diag.len()
    }

    pub fn mass_diag(&self) -> &[f64] {
        &self.mass_diag
    }

    /// Exact frequencies when the target is quadratic.
    pub fn frequencies(&self) -> Option<&[f64]> {
        self.frequencies.as_deref()
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.potential, Potential::Quadratic { .. })
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        match &self.potential {
            Potential::Quadratic { stiffness } => {
                0.5 * stiffness.iter().zip(q).map(|(k, x)| k * x * x).sum::<f64>()
            }
            Potential::DoubleWell => {
                let x2 = q[0] * q[0];
                x2 * x2 - x2
            }
        }
    }

    /// Writes `∇V(q)` into `out` and counts one evaluation.
    pub fn gradient_into(&self, q: &[f64], out: &mut [f64]) {
        self.gradient_calls.fetch_add(1, Ordering::Relaxed);
        match &self.potential {
            Potential::Quadratic { stiffness } => {
                for ((g, k), x) in out.iter_mut().zip(stiffness).zip(q) {
                    *g = k * x;
                }
            }
            Potential::DoubleWell => {
                let x = q[0];
                out[0] = 4.0 * x * x * x - 2.0 * x;
            }
        }
    }

    pub fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(q, &mut g);
        g
    }

    pub fn gradient_evaluations(&self) -> u64 {
        self.gradient_calls.load(Ordering::Relaxed)
    }

    pub fn reset_gradient_evaluations(&self) {
        self.gradient_calls.store(0, Ordering::Relaxed);
    }

    pub fn kinetic(&self, p: &[f64]) -> f64 {
        0.5 * p.iter().zip(&self.mass_diag).map(|(x, m)| x * x / m).sum::<f64>()
    }

    pub fn hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        self.potential(q) + self.kinetic(p)
    }

    pub fn has_exact_sampler(&self) -> bool {
        self.is_quadratic()
    }

    /// Draws `p ~ N(0, M)` into `p`.
    pub fn draw_momentum<R: Rng + ?Sized>(&self, rng: &mut R, p: &mut [f64]) {
        for (x, m) in p.iter_mut().zip(&self.mass_diag) {
            let z: f64 = rng.sample(StandardNormal);
            *x = m.sqrt() * z;
        }
    }

    /// Draws `q` from the target itself, when that is possible in closed form.
    pub fn draw_position<R: Rng + ?Sized>(&self, rng: &mut R, q: &mut [f64]) -> Result<()> {
        match &self.potential {
            Potential::Quadratic { stiffness } => {
                for (x, k) in q.iter_mut().zip(stiffness) {
                    let z: f64 = rng.sample(StandardNormal);
                    *x = z / k.sqrt();
                }
                Ok(())
            }
            Potential::DoubleWell => Err(Error::NoExactSampler(self.name.clone())),
        }
    }

    /// A stationary draw of `(q, p)`.
    pub fn sample_exact<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut q = vec![0.0; self.dim()];
        let mut p = vec![0.0; self.dim()];
        self.draw_position(rng, &mut q)?;
        self.draw_momentum(rng, &mut p);
        Ok((q, p))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Parses `chain:<d>`, `gauss:<d>`, `dwell` or `diag:<w1>,<w2>,...`.
impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TargetSpec(s.to_string());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (kind.to_ascii_lowercase().as_str(), arg) {
            ("dwell", None) => Ok(double_well()),
            ("chain", Some(a)) => match a.parse::<usize>() {
                Ok(d) if d >= 1 => Ok(gaussian_chain(d)),
                _ => Err(bad()),
            },
            ("gauss", Some(a)) => match a.parse::<usize>() {
                Ok(d) if d >= 1 => Ok(standard_gaussian(d)),
                _ => Err(bad()),
            },
            ("diag", Some(a)) => {
                let omegas = a
                    .split(',')
                    .map(|w| w.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                diagonal_gaussian(&omegas)
            }
            _ => Err(bad()),
        }
    }
}
