//! Box-constrained Nelder–Mead. Trial points are projected onto the box,
//! which keeps every evaluation feasible without penalty terms.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Stop when `f_worst − f_best ≤ f_tol·|f_best| + f_abs`.
    pub f_tol: f64,
    pub f_abs: f64,
    /// Initial simplex edge, as a fraction of each box side.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iterations: 200, f_tol: 1e-6, f_abs: 1e-300, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn minimize_bounded<F>(f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim > 0 && lower.len() == dim && upper.len() == dim);
    let project = |x: &mut Vec<f64>| {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(lower[i], upper[i]);
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut start = x0.to_vec();
    project(&mut start);
    simplex.push((start.clone(), f(&start)));
    for i in 0..dim {
        let mut p = start.clone();
        let step = opts.initial_step * (upper[i] - lower[i]);
        p[i] = if p[i] + step <= upper[i] { p[i] + step } else { p[i] - step };
        project(&mut p);
        let fp = f(&p);
        simplex.push((p, fp));
    }

    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        let mut v: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
        project(&mut v);
        v
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        order(&mut simplex);
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if worst - best <= opts.f_tol * best.abs() + opts.f_abs {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (p, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let worst_point = simplex[dim].0.clone();
        let reflected = combine(&centroid, &worst_point, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst_point, -2.0);
            let fe = f(&expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst {
            let c = combine(&centroid, &reflected, 0.5);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = combine(&centroid, &worst_point, 0.5);
            let fc = f(&c);
            (c, fc)
        };
        if fc < worst.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let p = combine(&anchor, &entry.0, 0.5);
            let fp = f(&p);
            *entry = (p, fp);
        }
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    Minimum { x, f: fx, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_interior_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2) + 1.0;
        let opts = NelderMeadOptions { max_iterations: 2000, f_tol: 1e-14, ..Default::default() };
        let m = minimize_bounded(rosen, &[-1.0, 1.5], &[-2.0, -2.0], &[2.0, 2.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 2e-3, "{:?}", m.x);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2) + (x[1] + 3.0).powi(2) + 1.0;
        let m = minimize_bounded(f, &[0.5, 0.5], &[0.0, -1.0], &[1.0, 1.0], &NelderMeadOptions::default());
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] + 1.0).abs() < 1e-3);
        assert!(m.x[0] <= 1.0 && m.x[1] >= -1.0);
    }

    #[test]
    fn deterministic_and_capped() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>() + 2.0;
        let opts = NelderMeadOptions { max_iterations: 5, ..Default::default() };
        let a = minimize_bounded(f, &[0.9, 0.9, 0.9], &[0.0; 3], &[1.0; 3], &opts);
        let b = minimize_bounded(f, &[0.9, 0.9, 0.9], &[0.0; 3], &[1.0; 3], &opts);
        assert_eq!(a, b);
        assert!(a.iterations <= 5);
    }
}
