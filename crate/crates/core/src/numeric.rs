//! Small deterministic numerical kernels shared by the analysis and optimizer.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Returns `(x, f(x))` for the best point seen. Stops when the bracket is
/// shorter than `tol` or after `max_iter` reductions.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Golden-section search for a maximum.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (x, v) = golden_section_min(|x| -f(x), lo, hi, tol, max_iter);
    (x, -v)
}

/// Richardson tableau for samples `values[k] = T(h0 / ratio^k)` of a quantity
/// with an error expansion in powers `h^p, h^{2p}, ...`.
///
/// `levels` is the number of error terms eliminated. Returns the most refined
/// estimate and the absolute change from the previous row at the same level,
/// which serves as a convergence indicator. With exactly `levels + 1` samples
/// the change is measured against the previous level instead.
pub fn richardson(values: &[f64], ratio: f64, p: i32, levels: usize) -> (f64, f64) {
    assert!(values.len() > levels, "need at least levels + 1 samples");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (k, &v) in values.iter().enumerate() {
        let mut row = vec![v];
        for j in 1..=levels.min(k) {
            let factor = ratio.powi(p * j as i32);
            let prev_row = &rows[k - 1];
            let refined = (factor * row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(refined);
        }
        rows.push(row);
    }
    let last = &rows[rows.len() - 1];
    let est = last[levels];
    let change = if values.len() == levels + 1 {
        if levels == 0 {
            0.0
        } else {
            (est - last[levels - 1]).abs()
        }
    } else {
        (est - rows[rows.len() - 2][levels]).abs()
    };
    (est, change)
}

/// Derivative-free simplex minimizer.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_evals: usize,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 2000,
            x_tol: 1e-10,
            f_tol: 1e-14,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `start` with initial simplex edge `step`.
    /// Returns the best vertex and its value.
    pub fn minimize<F>(&self, mut f: F, start: &[f64], step: &[f64]) -> (Vec<f64>, f64, usize)
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = start.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(start.to_vec());
        for i in 0..n {
            let mut v = start.to_vec();
            v[i] += step[i];
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut evals = n + 1;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = simplex
                .iter()
                .skip(1)
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let f_spread = (values[n] - values[0]).abs();
            if spread <= self.x_tol && (f_spread <= self.f_tol || !values[n].is_finite()) {
                break;
            }
            if spread <= self.x_tol * 1e-3 {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let fr = f(&xr);
            evals += 1;
            if fr < values[0] {
                let xe = along(2.0);
                let fe = f(&xe);
                evals += 1;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // shrink towards the best vertex
            for i in 1..=n {
                let v: Vec<f64> = simplex[i]
                    .iter()
                    .zip(&simplex[0])
                    .map(|(x, b)| b + 0.5 * (x - b))
                    .collect();
                values[i] = f(&v);
                simplex[i] = v;
                evals += 1;
            }
        }
        let best = (0..=n)
            .min_by(|&i, &j| values[i].total_cmp(&values[j]))
            .expect("simplex is nonempty");
        (simplex[best].clone(), values[best], evals)
    }
}

/// Damped Newton iteration for a square 2x2 system with a central-difference
/// Jacobian. Returns the root when the residual falls below `tol`.
pub fn newton2<F>(mut f: F, start: [f64; 2], tol: f64, max_iter: usize) -> Option<[f64; 2]>
where
    F: FnMut([f64; 2]) -> [f64; 2],
{
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut x = start;
    let mut r = f(x);
    if !norm(r).is_finite() {
        return None;
    }
    for _ in 0..max_iter {
        if norm(r) <= tol {
            return Some(x);
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let eps = 1e-7 * x[k].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[k] += eps;
            xm[k] -= eps;
            let (rp, rm) = (f(xp), f(xm));
            jac[0][k] = (rp[0] - rm[0]) / (2.0 * eps);
            jac[1][k] = (rp[1] - rm[1]) / (2.0 * eps);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut t = 1.0;
        let current = norm(r);
        loop {
            let trial = [x[0] - t * dx[0], x[1] - t * dx[1]];
            let rt = f(trial);
            if norm(rt).is_finite() && norm(rt) < current {
                x = trial;
                r = rt;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return if current <= tol { Some(x) } else { None };
            }
        }
    }
    (norm(r) <= tol).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, v) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
        let (x, _) = golden_section_max(|x| -(x - 0.7).abs(), 0.0, 1.0, 1e-12, 200);
        assert!((x - 0.7).abs() < 1e-10, "kinked objective");
    }

    #[test]
    fn richardson_removes_even_terms() {
        let h0 = 0.2;
        let samples: Vec<f64> = (0..6)
            .map(|k| {
                let h = h0 / 2f64.powi(k);
                2.0 + 3.0 * h * h - 5.0 * h.powi(4) + 7.0 * h.powi(6)
            })
            .collect();
        let (est, change) = richardson(&samples, 2.0, 2, 3);
        assert!((est - 2.0).abs() < 1e-13, "{est}");
        assert!(change < 1e-12);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let nm = NelderMead {
            max_evals: 5000,
            ..Default::default()
        };
        let (x, v, _) = nm.minimize(
            |p| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
        );
        assert!(v < 1e-12, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn newton_solves_circle_line() {
        let root = newton2(
            |x| [x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]],
            [1.0, 0.2],
            1e-14,
            50,
        )
        .unwrap();
        let s = 0.5f64.sqrt();
        assert!((root[0] - s).abs() < 1e-12 && (root[1] - s).abs() < 1e-12);
        assert!(newton2(|x| [x[0] * x[0] + 1.0, x[1]], [0.5, 0.0], 1e-12, 50).is_none());
    }
}
