//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails.
//!
//! Sampling endpoints at d = 1024 run only with `HMCSPLIT_FULL=1`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hmcsplit::harmonic::{harmonic_update, HarmonicUpdate};
use hmcsplit::optimize::{error_metric_two_stage, two_stage_error_constants};
use hmcsplit::schemes::{MINRHO3_A1, MINRHO3_B1, MINRHO4_A1, MINRHO4_A2, MINRHO4_B1};
use hmcsplit::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const CLOSED_FORM_REL_TOL: f64 = 1e-10;
const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(1);
// criterion 2
const SPOT_TOL: f64 = 1e-12;
const NORM_REL_TOL: f64 = 0.25;
// criterion 3
const TWO_STAGE_A1: f64 = 0.21178;
const TWO_STAGE_TOL: f64 = 1e-3;
const THREE_STAGE_TOL: f64 = 1e-6;
const FOUR_STAGE_TOL: f64 = 1e-4;
const FOUR_STAGE_NORM_WINDOW: (f64, f64) = (3.5e-7, 1.4e-6);
const OPTIMIZER_BUDGET: Duration = Duration::from_secs(60);
// criterion 4
const VV_INTERVAL_TOL: f64 = 1e-6;
const PV3_INTERVAL_TOL: f64 = 1e-6;
const YOSHIDA_INTERVAL: (f64, f64) = (1.573, 2e-3);
const MINRHO3_INTERVAL: (f64, f64) = (4.67, 0.02);
const MINRHO4_INTERVAL: (f64, f64) = (5.35, 0.02);
const INTERVAL_BOUND_SLACK: f64 = 1e-9;
const RANDOM_SCHEMES: usize = 1000;
// criterion 5
const K_CLOSED_FORM_TOL: f64 = 1e-8;
const MINRHO2_K31_TOL: f64 = 1e-9;
const YOSHIDA_K_TOL: f64 = 1e-8;
const MIN_E_A1: (f64, f64) = (0.1932, 5e-4);
const MIN_E_WINDOW: (f64, f64) = (5e-5, 9e-5);
// criterion 6
const ELLIPSE_TOL: f64 = 1e-10;
const ELLIPSE_STEPS: usize = 10_000;
const PROP3_TOL: f64 = 1e-12;
const PROPOSITION_BUDGET: Duration = Duration::from_secs(5);
// criterion 7
const VV_ACCEPT_WINDOW: (f64, f64) = (0.13, 0.27);
const VV_HALF_STEP_ACCEPT_MIN: f64 = 0.70;
const MINRHO4_ACCEPT_MIN: f64 = 0.98;
const SAMPLING_LENGTH: usize = 5000;
const SAMPLING_SEED: u64 = 20_100_705;
// criterion 8
const LINEARITY_R2_MIN: f64 = 0.95;
const HALVING_RATIO: (f64, f64) = (16.0, 0.30);
const HALVING_DIM: usize = 16;
const HALVING_REPLICAS: usize = 64;
const HALVING_LENGTH: usize = 20_000;
// criterion 9
const REVERSIBILITY_TOL: f64 = 1e-10;
const VOLUME_TOL: f64 = 1e-5;
const FLIP_TOL: f64 = 1e-10;
// criterion 10
const EQUAL_WORK_DIM: usize = 64;
const EQUAL_WORK_REPLICAS: usize = 20;
const EQUAL_WORK_LENGTH: usize = 1000;
/// Two-sided 95% Student t quantile with 19 degrees of freedom.
const T_19: f64 = 2.093;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

/// Collects sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn finish(self) -> Outcome {
        let pass = self.failures.is_empty();
        let detail = if pass {
            self.notes.join("; ")
        } else {
            format!("FAILED: {} | ok: {}", self.failures.join("; "), self.notes.join("; "))
        };
        Outcome { pass, detail }
    }
}

fn full_scale() -> bool {
    std::env::var("HMCSPLIT_FULL").is_ok_and(|v| v == "1")
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn verlet_rho(h: f64) -> f64 {
    h.powi(4) / (32.0 * (1.0 - h * h / 4.0))
}

fn rho_closed_form() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::default();
    for name in ["VV", "PV"] {
        let s = catalog(name).unwrap();
        let worst = (1..=500)
            .map(|k| 2.0 * k as f64 / 501.0)
            .map(|h| rel(diagnostics(&s, h).rho, verlet_rho(h)))
            .fold(0.0, f64::max);
        c.check(worst <= CLOSED_FORM_REL_TOL, format!("{name} worst rel {worst:.1e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a1 = rng.random_range(0.001..0.499);
        let s = make_two_stage(a1);
        let h_max = stability_interval(&s);
        for k in 1..=10 {
            let h = 0.05 + (0.95 * h_max - 0.05) * k as f64 / 10.0;
            let closed = rho_closed_form_two_stage(a1, h).unwrap();
            worst = worst.max(rel(diagnostics(&s, h).rho, closed));
        }
    }
    c.check(worst <= CLOSED_FORM_REL_TOL, format!("2-stage worst rel {worst:.1e}"));
    let elapsed = start.elapsed();
    c.check(elapsed < CLOSED_FORM_BUDGET, format!("{elapsed:.2?}"));
    c.finish()
}

fn spot_values() -> Outcome {
    let mut c = Checks::default();
    let vv = catalog("VV").unwrap();
    let r1 = diagnostics(&vv, 1.0).rho;
    let r2 = diagnostics(&vv, 0.5).rho;
    c.check((r1 - 1.0 / 24.0).abs() <= SPOT_TOL, format!("rho(VV,1) = {r1:.15}"));
    c.check((r2 - 1.0 / 480.0).abs() <= SPOT_TOL, format!("rho(VV,1/2) = {r2:.15}"));
    for (label, scheme, quoted) in [
        ("MINRHO2", catalog("MINRHO2").unwrap(), 5e-4),
        ("a1=1/4", make_two_stage(0.25), 4e-2),
        ("MCLACHLAN2", catalog("MCLACHLAN2").unwrap(), 2e-2),
    ] {
        let norm = rho_norm(&scheme, 2.0);
        c.check(rel(norm, quoted) <= NORM_REL_TOL, format!("norm {label} = {norm:.4e}"));
    }
    c.finish()
}

fn coefficient_reproduction() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::default();
    let two = optimize_two_stage(2.0).unwrap();
    c.check(
        (two.argmin[0] - TWO_STAGE_A1).abs() <= TWO_STAGE_TOL,
        format!("2-stage a1 = {:.8}", two.argmin[0]),
    );
    let three = optimize_three_stage().unwrap();
    let (a1, b1) = (three.argmin[0], three.argmin[1]);
    c.check(
        (a1 - MINRHO3_A1).abs() <= THREE_STAGE_TOL && (b1 - MINRHO3_B1).abs() <= THREE_STAGE_TOL,
        format!("3-stage (a1, b1) = ({a1:.11}, {b1:.11})"),
    );
    let four = optimize_four_stage().unwrap();
    let catalog_point = [MINRHO4_A1, MINRHO4_A2, MINRHO4_B1];
    for (k, name) in ["a1", "a2", "b1"].iter().enumerate() {
        let got = four.argmin[k];
        c.check(
            (got - catalog_point[k]).abs() <= FOUR_STAGE_TOL,
            format!("4-stage {name} = {got:.7} (off by {:.1e})", (got - catalog_point[k]).abs()),
        );
    }
    let n = four.rho_norm_at_min;
    c.check(
        n >= FOUR_STAGE_NORM_WINDOW.0 && n <= FOUR_STAGE_NORM_WINDOW.1,
        format!("4-stage norm {n:.4e}"),
    );
    let frozen = optimize_four_stage_with_b1(MINRHO4_B1).unwrap();
    c.note(format!(
        "with b1 held at {MINRHO4_B1}: a1 = {:.8}, a2 = {:.8}, norm {:.4e}, catalog norm {:.4e}",
        frozen.argmin[0],
        frozen.argmin[1],
        frozen.rho_norm_at_min,
        rho_norm(&catalog("MINRHO4").unwrap(), 4.0)
    ));
    let elapsed = start.elapsed();
    c.check(elapsed < OPTIMIZER_BUDGET, format!("{elapsed:.2?}"));
    c.finish()
}

fn stability_intervals() -> Outcome {
    let mut c = Checks::default();
    let vv = stability_interval(&catalog("VV").unwrap());
    c.check((vv - 2.0).abs() <= VV_INTERVAL_TOL, format!("VV {vv:.9}"));
    let pv3 = stability_interval(&concatenate(&catalog("PV").unwrap(), 3).unwrap());
    c.check((pv3 - 6.0).abs() <= PV3_INTERVAL_TOL, format!("PV x3 {pv3:.9}"));
    for (name, (target, tol)) in [
        ("YOSHIDA4", YOSHIDA_INTERVAL),
        ("MINRHO3", MINRHO3_INTERVAL),
        ("MINRHO4", MINRHO4_INTERVAL),
    ] {
        let h = stability_interval(&catalog(name).unwrap());
        c.check((h - target).abs() <= tol, format!("{name} {h:.5}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..RANDOM_SCHEMES {
        let two = make_two_stage(rng.random_range(-0.5..1.0));
        let three = make_three_stage(rng.random_range(-0.5..1.0), rng.random_range(-0.5..1.0));
        for s in [two, three] {
            let excess = stability_interval(&s) - 2.0 * s.stage_count() as f64;
            worst_excess = worst_excess.max(excess);
        }
    }
    c.check(
        worst_excess <= INTERVAL_BOUND_SLACK,
        format!("max h_max - 2r over {} random schemes {worst_excess:.2e}", 2 * RANDOM_SCHEMES),
    );
    c.finish()
}

fn error_constant_checks() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let a1 = rng.random_range(0.0..0.5);
        let k = error_constants(&make_two_stage(a1)).unwrap();
        let (k31, k32) = two_stage_error_constants(a1);
        worst = worst.max((k.k31 - k31).abs()).max((k.k32 - k32).abs());
    }
    c.check(worst <= K_CLOSED_FORM_TOL, format!("closed forms worst {worst:.1e}"));
    let m2 = error_constants(&catalog("MINRHO2").unwrap()).unwrap();
    c.check(m2.k31.abs() <= MINRHO2_K31_TOL, format!("MINRHO2 k31 {:.1e}", m2.k31));
    let y = error_constants(&catalog("YOSHIDA4").unwrap()).unwrap();
    c.check(
        y.k31.abs() <= YOSHIDA_K_TOL && y.k32.abs() <= YOSHIDA_K_TOL,
        format!("YOSHIDA4 k31 {:.1e} k32 {:.1e}", y.k31, y.k32),
    );
    let a = minimize_error_metric_two_stage(ErrorMetric::E);
    let e = error_metric_two_stage(ErrorMetric::E, a);
    c.check((a - MIN_E_A1.0).abs() <= MIN_E_A1.1, format!("min-E a1 {a:.6}"));
    c.check(e >= MIN_E_WINDOW.0 && e <= MIN_E_WINDOW.1, format!("E {e:.3e}"));
    c.finish()
}

/// `E(Δ)` for standard normal `(q, p)` under the linear map `m`.
fn quadratic_form_expectation(m: &HarmonicUpdate) -> f64 {
    0.5 * (m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d - 2.0)
}

fn propositions() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::default();
    let cases = [("VV", 1.5), ("MINRHO2", 2.4), ("MINRHO3", 4.2), ("MINRHO4", 5.0)];

    let mut worst_ellipse: f64 = 0.0;
    for (name, h) in cases {
        let s = catalog(name).unwrap();
        let u = harmonic_update(&s, h);
        let chi = diagnostics(&s, h).chi;
        let invariant = |q: f64, p: f64| chi * p * p + q * q / chi;
        let (mut q, mut p) = (0.7, -1.3);
        let start_value = invariant(q, p);
        for _ in 0..ELLIPSE_STEPS {
            (q, p) = u.apply(q, p);
            worst_ellipse = worst_ellipse.max(rel(invariant(q, p), start_value));
        }
    }
    c.check(worst_ellipse <= ELLIPSE_TOL, format!("ellipse drift {worst_ellipse:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0usize;
    let mut trials = 0usize;
    for (name, _) in cases {
        let s = catalog(name).unwrap();
        let h_max = stability_interval(&s);
        for k in 1..=20 {
            let h = h_max * k as f64 / 21.0;
            let d = diagnostics(&s, h);
            let chi2 = d.chi * d.chi;
            for _ in 0..1000 {
                let steps = rng.random_range(1..50u64);
                let (q0, p0): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                let (q, p) = harmonic_update(&s, h).pow(steps).apply(q0, p0);
                let delta = 0.5 * (q * q + p * p - q0 * q0 - p0 * p0);
                let bound = if chi2 >= 1.0 {
                    0.5 * (chi2 - 1.0) * p0 * p0
                } else {
                    0.5 * (1.0 / chi2 - 1.0) * q0 * q0
                };
                trials += 1;
                if delta > bound + 1e-12 * (1.0 + q0 * q0 + p0 * p0) {
                    violations += 1;
                }
            }
        }
    }
    c.check(violations == 0, format!("bound violations {violations}/{trials}"));

    let mut worst_prop3: f64 = 0.0;
    for (name, h) in cases {
        let s = catalog(name).unwrap();
        for steps in [1u64, 2, 3, 7, 20, 101] {
            for frac in [0.3, 0.6, 1.0] {
                let h = h * frac;
                let exact = quadratic_form_expectation(&harmonic_update(&s, h).pow(steps));
                let formula = expected_energy_error_harmonic(&s, h, steps as usize).unwrap();
                worst_prop3 = worst_prop3.max((exact - formula).abs());
            }
        }
    }
    c.check(worst_prop3 <= PROP3_TOL, format!("E(Δ) identity worst {worst_prop3:.1e}"));
    let elapsed = start.elapsed();
    c.check(elapsed < PROPOSITION_BUDGET, format!("{elapsed:.2?}"));
    c.finish()
}

fn chain(name: &str, d: usize, h0_times_d: f64, steps: usize, stream: u64) -> ChainSummary {
    let mut config = HmcConfig::new(h0_times_d / d as f64, steps, SAMPLING_LENGTH);
    config.seed = SAMPLING_SEED;
    config.stream = stream;
    hmc_run(&gaussian_chain(d), &catalog(name).unwrap(), &config).unwrap()
}

fn sampling_statistics() -> Outcome {
    let mut c = Checks::default();
    let full = full_scale();
    let max_dim = if full { 1024 } else { 256 };
    let mut d = 2;
    while d <= max_dim {
        let s = chain("MINRHO4", d, 4.0, d / 2, d as u64);
        c.check(
            s.accepted_fraction > MINRHO4_ACCEPT_MIN,
            format!("MINRHO4 d={d} {:.4}", s.accepted_fraction),
        );
        d *= 2;
    }
    if full {
        let s = chain("VV", 1024, 1.0, 2048, 1);
        c.check(
            s.accepted_fraction >= VV_ACCEPT_WINDOW.0 && s.accepted_fraction <= VV_ACCEPT_WINDOW.1,
            format!("VV d=1024 h0=1/d {:.4}", s.accepted_fraction),
        );
        let s = chain("VV", 1024, 0.5, 4096, 2);
        c.check(
            s.accepted_fraction > VV_HALF_STEP_ACCEPT_MIN,
            format!("VV d=1024 h0=1/(2d) {:.4}", s.accepted_fraction),
        );
    } else {
        c.note("d=1024 endpoints skipped (set HMCSPLIT_FULL=1)");
    }
    c.finish()
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn scaling_laws() -> Outcome {
    let mut c = Checks::default();
    let dims = [16usize, 32, 64, 128, 256];
    let means: Vec<f64> = dims
        .iter()
        .map(|&d| chain("VV", d, 1.0, 2 * d, 100 + d as u64).mean_energy_error)
        .collect();
    let xs: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
    let r2 = r_squared(&xs, &means);
    c.check(r2 > LINEARITY_R2_MIN, format!("R^2 {r2:.4}"));

    let d = HALVING_DIM;
    let target = gaussian_chain(d);
    let vv = catalog("VV").unwrap();
    let pooled = |h0_times_d: f64, steps: usize, seed: u64| {
        let mut config = HmcConfig::new(h0_times_d / d as f64, steps, HALVING_LENGTH);
        config.seed = seed;
        let runs = run_replicas(&target, &vv, &config, HALVING_REPLICAS).unwrap();
        runs.iter().map(|r| r.mean_energy_error).sum::<f64>() / runs.len() as f64
    };
    let coarse = pooled(1.0, 2 * d, SAMPLING_SEED);
    let fine = pooled(0.5, 4 * d, SAMPLING_SEED + 1);
    let ratio = coarse / fine;
    let omegas: Vec<f64> = (1..=d).map(|j| j as f64).collect();
    let exact = expected_energy_error_jittered(&vv, 1.0 / d as f64, 0.2, 2 * d, &omegas, 4000).unwrap()
        / expected_energy_error_jittered(&vv, 0.5 / d as f64, 0.2, 4 * d, &omegas, 4000).unwrap();
    let (centre, spread) = HALVING_RATIO;
    c.check(
        (ratio / centre - 1.0).abs() <= spread,
        format!("halving ratio {ratio:.2} at d={d} (exact expectation {exact:.2})"),
    );
    c.finish()
}

fn structural_invariants() -> Outcome {
    let mut c = Checks::default();
    let targets = [gaussian_chain(4), double_well()];
    let (h, steps) = (0.1, 10);
    let (mut rev, mut vol, mut flip): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut count_errors = Vec::new();
    for name in CATALOG_NAMES {
        let s = catalog(name).unwrap();
        for t in &targets {
            rev = rev.max(reversibility_check(&s, t, h, steps, 100));
            vol = vol.max(volume_check(&s, t, h, steps, 10));
            flip = flip.max(energy_flip_check(&s, t, h, steps, 100));

            let mut integrator = Integrator::new(&s, t);
            let mut q = vec![0.3; t.dim()];
            let mut p = vec![-0.2; t.dim()];
            integrator.prime(&q);
            let before = integrator.evaluations();
            integrator.run(h, steps, &mut q, &mut p).unwrap();
            let used = integrator.evaluations() - before;
            if used != (s.stage_count() * steps) as u64 {
                count_errors.push(format!("{name}/{}: {used}", t.name()));
            }
        }
    }
    c.check(rev <= REVERSIBILITY_TOL, format!("reversibility {rev:.1e}"));
    c.check(vol <= VOLUME_TOL, format!("volume {vol:.1e}"));
    c.check(flip <= FLIP_TOL, format!("energy flip {flip:.1e}"));
    c.check(
        count_errors.is_empty(),
        format!("gradient count r*I exact for {} schemes {count_errors:?}", CATALOG_NAMES.len()),
    );
    c.finish()
}

fn mean_and_halfwidth(runs: &[ChainSummary]) -> (f64, f64) {
    let n = runs.len() as f64;
    let m = runs.iter().map(|r| r.accepted_fraction).sum::<f64>() / n;
    let var = runs.iter().map(|r| (r.accepted_fraction - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, T_19 * (var / n).sqrt())
}

fn equal_work() -> Outcome {
    let mut c = Checks::default();
    let d = EQUAL_WORK_DIM;
    let target = gaussian_chain(d);
    let run = |name: &str, h0_times_d: f64, steps: usize, seed: u64| {
        let mut config = HmcConfig::new(h0_times_d / d as f64, steps, EQUAL_WORK_LENGTH);
        config.seed = seed;
        run_replicas(&target, &catalog(name).unwrap(), &config, EQUAL_WORK_REPLICAS).unwrap()
    };
    let m2 = run("MINRHO2", 2.0, d, 31);
    let pv = run("PV", 1.0, 2 * d, 32);
    let mc = run("MCLACHLAN2", 2.0, d, 33);
    let work: Vec<u64> = [&m2, &pv, &mc].iter().map(|r| r[0].gradient_evaluations).collect();
    c.check(work.iter().all(|&w| w == work[0]), format!("gradient evaluations {work:?}"));
    let (a_m2, w_m2) = mean_and_halfwidth(&m2);
    let (a_pv, w_pv) = mean_and_halfwidth(&pv);
    let (a_mc, w_mc) = mean_and_halfwidth(&mc);
    c.check(
        a_m2 - w_m2 > a_pv + w_pv,
        format!("MINRHO2 {a_m2:.4}±{w_m2:.4} above PV {a_pv:.4}±{w_pv:.4}"),
    );
    c.check(a_m2 > a_mc, format!("MINRHO2 above MCLACHLAN2 {a_mc:.4}±{w_mc:.4}"));
    c.check(a_mc >= a_pv - w_pv, "MCLACHLAN2 not below the PV band");
    c.finish()
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "rho closed forms", rho_closed_form),
        (2, "spot values", spot_values),
        (3, "coefficient reproduction", coefficient_reproduction),
        (4, "stability intervals", stability_intervals),
        (5, "error constants", error_constant_checks),
        (6, "harmonic propositions", propositions),
        (7, "sampling statistics", sampling_statistics),
        (8, "scaling laws", scaling_laws),
        (9, "structural invariants", structural_invariants),
        (10, "equal-work comparison", equal_work),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} [{status}] {title} ({:.1?}): {}",
            start.elapsed(),
            outcome.detail
        );
        if !outcome.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
