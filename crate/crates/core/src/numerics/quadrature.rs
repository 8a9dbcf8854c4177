use crate::error::{Error, Result};

/// Outcome of [`simpson_converged`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Richardson-corrected estimate, `S₂ₙ + (S₂ₙ − Sₙ)/15`.
    pub value: f64,
    /// The last two plain Simpson estimates (n and 2n intervals).
    pub coarse: f64,
    pub fine: f64,
    pub intervals: usize,
}

impl Quadrature {
    pub fn relative_change(&self) -> f64 {
        (self.fine - self.coarse).abs() / self.fine.abs().max(f64::MIN_POSITIVE)
    }
}

/// Composite Simpson rule on `[a, b]`, doubling the interval count until
/// two successive estimates agree within `rel_tol`. Gives up after
/// `max_levels` doublings.
pub fn simpson_converged<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_levels: u32) -> Result<Quadrature> {
    let mut n = 2usize;
    let h = (b - a) / n as f64;
    // running sums: endpoints, odd-index nodes, even-index interior nodes
    let ends = f(a) + f(b);
    let mut odd = f(a + h);
    let mut even = 0.0;
    let mut prev = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;
    for _ in 0..max_levels {
        n *= 2;
        let h = (b - a) / n as f64;
        even += odd;
        odd = (0..n / 2).map(|k| f(a + (2 * k + 1) as f64 * h)).sum();
        let cur = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;
        let q = Quadrature { value: cur + (cur - prev) / 15.0, coarse: prev, fine: cur, intervals: n };
        // require a few doublings so a lucky early agreement cannot end the loop
        if n >= 16 && q.relative_change() < rel_tol {
            return Ok(q);
        }
        prev = cur;
    }
    Err(Error::Convergence { levels: max_levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let q = simpson_converged(|x| 3.0 * x * x * x - x + 2.0, -1.0, 2.0, 1e-12, 20).unwrap();
        let exact = 0.75 * (16.0 - 1.0) - 0.5 * (4.0 - 1.0) + 2.0 * 3.0;
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn exponential_decay() {
        let q = simpson_converged(|x| (-x / 100.0).exp(), 0.0, 20_000.0, 1e-4, 20).unwrap();
        let exact = 100.0 * (1.0 - (-200.0f64).exp());
        assert!(q.relative_change() < 1e-4);
        assert!((q.value - exact).abs() / exact < 1e-7);
    }

    #[test]
    fn gives_up() {
        assert_eq!(
            simpson_converged(|x| (1.0 / x).sin(), 1e-9, 1.0, 1e-14, 3),
            Err(Error::Convergence { levels: 3 })
        );
    }
}
