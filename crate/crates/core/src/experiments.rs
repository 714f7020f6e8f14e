//! Drivers for the sampling and ρ-curve experiments. Every driver returns a
//! [`Table`] (or a JSON-serializable report) and leaves file handling to the caller.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{diagnostics, stability_interval};
use crate::hmc::{expected_energy_error_jittered, hmc_run, run_replicas, HmcConfig, Start};
use crate::schemes::{catalog, minrho2_a1, make_two_stage, SplittingScheme, MCLACHLAN2_A1};
use crate::targets::{double_well, gaussian_chain};

pub const VERSION: &str = concat!("hmcsplit ", env!("CARGO_PKG_VERSION"));

/// Sizes of the sampling experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunScale {
    /// Largest dimension of the `d = 1, 2, 4, ...` sweeps.
    pub max_dim: usize,
    pub chain_length: usize,
    pub replicas: usize,
}

impl RunScale {
    /// Defaults that finish in seconds.
    pub fn ci() -> Self {
        RunScale {
            max_dim: 256,
            chain_length: 1000,
            replicas: 20,
        }
    }

    /// Large sweep sizes for the complete figures.
    pub fn full() -> Self {
        RunScale {
            max_dim: 1024,
            chain_length: 5000,
            replicas: 100,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::successors(Some(1usize), |d| d.checked_mul(2))
            .take_while(|&d| d <= self.max_dim)
            .collect()
    }
}

/// A CSV table with leading `#` comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(comments: Vec<String>, header: &[&str]) -> Self {
        Table {
            comments,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Values of one column, by header name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

fn describe(scheme: &SplittingScheme) -> String {
    let coefs: Vec<String> = scheme.coefficients().iter().map(|c| format!("{c}")).collect();
    format!("{}={:?}({})", scheme.label(), scheme.leading_kind(), coefs.join(" "))
}

fn provenance(seed: Option<u64>, schemes: &[&SplittingScheme]) -> Vec<String> {
    let mut lines = vec![match seed {
        Some(s) => format!("seed={s} version={VERSION}"),
        None => format!("version={VERSION}"),
    }];
    lines.extend(schemes.iter().map(|s| format!("scheme {}", describe(s))));
    lines
}

/// One scheme in a sweep: `h0 = h0_times_d / d`, `I = max(1, round(steps_per_d * d))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntry {
    pub scheme: SplittingScheme,
    pub h0_times_d: f64,
    pub steps_per_d: f64,
}

impl PlanEntry {
    pub fn h0(&self, d: usize) -> f64 {
        self.h0_times_d / d as f64
    }

    pub fn steps(&self, d: usize) -> usize {
        ((self.steps_per_d * d as f64).round() as usize).max(1)
    }

    /// Gradient evaluations per proposal.
    pub fn work(&self, d: usize) -> usize {
        self.scheme.stage_count() * self.steps(d)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub entries: Vec<PlanEntry>,
    pub dims: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
}

impl ExperimentPlan {
    /// Checks that all entries do the same work per proposal at every `d`, up to
    /// the rounding of `I` (at most one time-step of the largest scheme).
    pub fn audit_equal_work(&self) -> Result<()> {
        let slack = self.entries.iter().map(|e| e.scheme.stage_count()).max().unwrap_or(0);
        for &d in &self.dims {
            let work: Vec<usize> = self.entries.iter().map(|e| e.work(d)).collect();
            let (lo, hi) = (work.iter().min().unwrap(), work.iter().max().unwrap());
            if hi - lo > slack {
                return Err(Error::Config(format!(
                    "plan `{}` is not equal-work at d = {d}: {work:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// `∫_0^1 ρ(z) dz` by composite Simpson.
pub fn rho_integral(scheme: &SplittingScheme, upper: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let w = upper / n as f64;
    let f = |k: usize| {
        let z = k as f64 * w;
        if k == 0 {
            0.0
        } else {
            diagnostics(scheme, z).rho
        }
    };
    let mut acc = f(0) + f(n);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 * f(k) } else { 2.0 * f(k) };
    }
    acc * w / 3.0
}

/// Acceptance and mean energy error of position Verlet on `chain:d` for
/// `h0 = 1/d, I = 2d` and `h0 = 1/(2d), I = 4d`.
pub fn reproduce_fig2(seed: u64, scale: &RunScale) -> Result<Table> {
    let pv = catalog("PV")?;
    let rules = [("1/d", 1.0, 2.0), ("1/(2d)", 0.5, 4.0)];
    let slope = rho_integral(&pv, 1.0, 2000);
    let mut comments = provenance(Some(seed), &[&pv]);
    comments.push(format!("reference slope int_0^1 rho(z) dz = {slope:.9e}"));
    let mut table = Table::new(
        comments,
        &[
            "d",
            "rule",
            "h0",
            "steps",
            "acceptance",
            "mean_delta",
            "stderr_delta",
            "expected_delta",
            "reference_line",
            "gradient_evaluations",
        ],
    );
    let jobs: Vec<(usize, usize)> = scale
        .dims()
        .into_iter()
        .flat_map(|d| (0..rules.len()).map(move |r| (d, r)))
        .collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(d, r))| -> Result<Vec<String>> {
            let (name, h0d, ipd) = rules[r];
            let entry = PlanEntry {
                scheme: pv.clone(),
                h0_times_d: h0d,
                steps_per_d: ipd,
            };
            let target = gaussian_chain(d);
            let mut config = HmcConfig::new(entry.h0(d), entry.steps(d), scale.chain_length);
            config.seed = seed;
            config.stream = index as u64;
            let summary = hmc_run(&target, &pv, &config)?;
            let omegas: Vec<f64> = (1..=d).map(|j| j as f64).collect();
            let expected =
                expected_energy_error_jittered(&pv, entry.h0(d), 0.2, entry.steps(d), &omegas, 2000)?;
            Ok(vec![
                d.to_string(),
                name.to_string(),
                format!("{:e}", entry.h0(d)),
                entry.steps(d).to_string(),
                format!("{:.6}", summary.accepted_fraction),
                format!("{:.9e}", summary.mean_energy_error),
                format!("{:.3e}", summary.energy_error_std_err),
                format!("{expected:.9e}"),
                format!("{:.9e}", d as f64 * slope),
                summary.gradient_evaluations.to_string(),
            ])
        })
        .collect::<Result<_>>()?;
    table.rows = rows;
    Ok(table)
}

/// The three 2-stage members drawn in the ρ-curve figure.
pub fn fig3_schemes() -> Vec<SplittingScheme> {
    vec![
        make_two_stage(0.25).with_label("A1_QUARTER"),
        make_two_stage(MCLACHLAN2_A1).with_label("MCLACHLAN2"),
        make_two_stage(minrho2_a1()).with_label("MINRHO2"),
    ]
}

/// Locations of the vertical asymptotes of ρ, i.e. the stability limits.
pub fn fig3_asymptotes() -> Vec<(String, f64)> {
    fig3_schemes()
        .iter()
        .map(|s| (s.label().to_string(), stability_interval(s)))
        .collect()
}

/// ρ(h) for the 2-stage members `a1 = 1/4`, minimum-E and `(3 - √3)/6` on
/// `0 < h <= 4.2`. Unstable points are left empty.
pub fn reproduce_fig3() -> Table {
    let schemes = fig3_schemes();
    let refs: Vec<&SplittingScheme> = schemes.iter().collect();
    let mut comments = provenance(None, &refs);
    for (label, h) in fig3_asymptotes() {
        comments.push(format!("asymptote {label} h = {h:.9}"));
    }
    let mut header = vec!["h"];
    header.extend(schemes.iter().map(|s| s.label()));
    let mut table = Table::new(comments, &header);
    let n = 840;
    for k in 1..=n {
        let h = 4.2 * k as f64 / n as f64;
        let mut row = vec![format!("{h:.4}")];
        for s in &schemes {
            let rho = diagnostics(s, h).rho;
            row.push(if rho.is_finite() { format!("{rho:.9e}") } else { String::new() });
        }
        table.rows.push(row);
    }
    table
}

/// The equal-work comparison of Verlet with the 2-, 3- and 4-stage methods.
pub fn fig4_fig5_plan(seed: u64, scale: &RunScale) -> Result<ExperimentPlan> {
    let entry = |name: &str, h0_times_d: f64, steps_per_d: f64| -> Result<PlanEntry> {
        Ok(PlanEntry {
            scheme: catalog(name)?,
            h0_times_d,
            steps_per_d,
        })
    };
    Ok(ExperimentPlan {
        name: "fig4_fig5".into(),
        entries: vec![
            entry("PV", 1.0, 2.0)?,
            entry("MCLACHLAN2", 2.0, 1.0)?,
            entry("MINRHO2", 2.0, 1.0)?,
            entry("MINRHO3", 3.0, 2.0 / 3.0)?,
            entry("MINRHO4", 4.0, 0.5)?,
        ],
        dims: scale.dims(),
        replicas: 1,
        seed,
    })
}

/// Acceptance versus `d` for every entry of [`fig4_fig5_plan`].
pub fn reproduce_fig4_fig5(seed: u64, scale: &RunScale) -> Result<Table> {
    let plan = fig4_fig5_plan(seed, scale)?;
    plan.audit_equal_work()?;
    let schemes: Vec<&SplittingScheme> = plan.entries.iter().map(|e| &e.scheme).collect();
    let mut table = Table::new(
        provenance(Some(seed), &schemes),
        &[
            "d",
            "scheme",
            "h0",
            "steps",
            "acceptance",
            "mean_delta",
            "gradient_evaluations",
        ],
    );
    let jobs: Vec<(usize, usize)> = plan
        .dims
        .iter()
        .flat_map(|&d| (0..plan.entries.len()).map(move |e| (d, e)))
        .collect();
    let results: Vec<(usize, usize, crate::hmc::ChainSummary)> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(d, e))| {
            let entry = &plan.entries[e];
            let mut config = HmcConfig::new(entry.h0(d), entry.steps(d), scale.chain_length);
            config.seed = seed;
            config.stream = index as u64;
            hmc_run(&gaussian_chain(d), &entry.scheme, &config).map(|s| (d, e, s))
        })
        .collect::<Result<_>>()?;
    for &d in &plan.dims {
        let evals: Vec<u64> = results
            .iter()
            .filter(|r| r.0 == d)
            .map(|r| r.2.gradient_evaluations / scale.chain_length as u64)
            .collect();
        let slack = plan.entries.iter().map(|e| e.scheme.stage_count()).max().unwrap_or(0) as u64;
        if evals.iter().max().unwrap() - evals.iter().min().unwrap() > slack {
            return Err(Error::Config(format!("unequal work at d = {d}: {evals:?}")));
        }
    }
    for (d, e, s) in results {
        let entry = &plan.entries[e];
        table.rows.push(vec![
            d.to_string(),
            entry.scheme.label().to_string(),
            format!("{:e}", entry.h0(d)),
            entry.steps(d).to_string(),
            format!("{:.6}", s.accepted_fraction),
            format!("{:.9e}", s.mean_energy_error),
            s.gradient_evaluations.to_string(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scheme: String,
    pub h0: f64,
    pub steps: usize,
    pub mu: f64,
    pub sigma: f64,
    pub gradient_evaluations_per_chain: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub target: String,
    pub seed: u64,
    pub replicas: usize,
    pub chain_length: usize,
    pub burn_in: usize,
    pub rows: Vec<BenchRow>,
    /// Scheme labels by decreasing mean acceptance (equal-work rows only).
    pub ranking: Vec<String>,
}

/// Base Verlet step and steps per proposal for the double well.
pub const DWELL_VERLET_STEP: f64 = 0.25;
pub const DWELL_VERLET_STEPS: usize = 24;
pub const DWELL_BURN_IN: usize = 200;

/// Mean and standard deviation of acceptance over replicas on the double well,
/// with every scheme at the same number of gradient evaluations. A Verlet row
/// at twice the base step is added as a control.
pub fn bench_nongaussian(seed: u64, scale: &RunScale) -> Result<BenchReport> {
    let target = double_well();
    let mut cases: Vec<(SplittingScheme, f64, usize)> = Vec::new();
    for name in ["PV", "MINRHO2", "MINRHO3", "MINRHO4"] {
        let s = catalog(name)?;
        let r = s.stage_count();
        cases.push((s, DWELL_VERLET_STEP * r as f64, DWELL_VERLET_STEPS / r));
    }
    let pv2 = catalog("PV")?.with_label("PV_2H");
    cases.push((pv2, 2.0 * DWELL_VERLET_STEP, DWELL_VERLET_STEPS / 2));

    let mut rows = Vec::with_capacity(cases.len());
    for (index, (scheme, h0, steps)) in cases.iter().enumerate() {
        let mut config = HmcConfig::new(*h0, *steps, scale.chain_length);
        config.seed = seed.wrapping_add(index as u64);
        config.burn_in = DWELL_BURN_IN;
        config.start = Start::GivenPoint(vec![0.5f64.sqrt()]);
        let runs = run_replicas(&target, scheme, &config, scale.replicas)?;
        let acc: Vec<f64> = runs.iter().map(|r| r.accepted_fraction).collect();
        let n = acc.len() as f64;
        let mu = acc.iter().sum::<f64>() / n;
        let sigma = if acc.len() > 1 {
            (acc.iter().map(|a| (a - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        rows.push(BenchRow {
            scheme: scheme.label().to_string(),
            h0: *h0,
            steps: *steps,
            mu,
            sigma,
            gradient_evaluations_per_chain: runs[0].gradient_evaluations,
        });
    }
    let mut ranked: Vec<&BenchRow> = rows.iter().filter(|r| r.scheme != "PV_2H").collect();
    ranked.sort_by(|a, b| b.mu.total_cmp(&a.mu));
    Ok(BenchReport {
        target: target.name().to_string(),
        seed,
        replicas: scale.replicas,
        chain_length: scale.chain_length,
        burn_in: DWELL_BURN_IN,
        ranking: ranked.iter().map(|r| r.scheme.clone()).collect(),
        rows,
    })
}

/// A gnuplot script that plots the CSV written for `figure`.
pub fn gnuplot_script(figure: &str, csv_file: &str) -> Option<String> {
    let body = match figure {
        "fig2" => format!(
            "set datafile separator ','\n\
             set key top right\n\
             set multiplot layout 1,2\n\
             set logscale x 2\n\
             set xlabel 'd'\n\
             set ylabel 'acceptance'\n\
             plot '{f}' using 1:(stringcolumn(2) eq '1/d' ? $5 : 1/0) with linespoints pt 3 title 'h0 = 1/d', \\\n\
             \x20    '{f}' using 1:(stringcolumn(2) eq '1/(2d)' ? $5 : 1/0) with linespoints pt 4 title 'h0 = 1/(2d)'\n\
             set logscale y\n\
             set ylabel 'mean energy error'\n\
             plot '{f}' using 1:(stringcolumn(2) eq '1/d' ? $6 : 1/0) with points pt 3 title 'h0 = 1/d', \\\n\
             \x20    '{f}' using 1:(stringcolumn(2) eq '1/(2d)' ? $6 : 1/0) with points pt 4 title 'h0 = 1/(2d)', \\\n\
             \x20    '{f}' using 1:(stringcolumn(2) eq '1/d' ? $9 : 1/0) with lines title 'd int rho'\n\
             unset multiplot\n",
            f = csv_file
        ),
        "fig3" => format!(
            "set datafile separator ','\n\
             set xlabel 'h'\n\
             set ylabel 'rho(h)'\n\
             set logscale y\n\
             set xrange [0:4.2]\n\
             plot for [k=2:4] '{f}' using 1:k with lines title columnheader(k)\n",
            f = csv_file
        ),
        "fig4" | "fig5" => format!(
            "set datafile separator ','\n\
             set logscale x 2\n\
             set xlabel 'd'\n\
             set ylabel 'acceptance'\n\
             set key bottom left\n\
             schemes = 'PV MCLACHLAN2 MINRHO2 MINRHO3 MINRHO4'\n\
             plot for [s in schemes] '{f}' using 1:(stringcolumn(2) eq s ? $5 : 1/0) with linespoints title s\n",
            f = csv_file
        ),
        _ => return None,
    };
    Some(body)
}
