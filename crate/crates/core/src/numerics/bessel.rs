/// Modified Bessel function of the first kind, order zero.
///
/// Power series below |z| = 20, Hankel asymptotic expansion above; both
/// hold relative error below 1e-10 on their ranges.
pub fn bessel_i0(z: f64) -> f64 {
    let x = z.abs();
    if x < 20.0 {
        // Σ (x²/4)^k / (k!)²
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        // e^x / √(2πx) · Σ ((2k−1)!!)² / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let odd = (2 * k - 1) as f64;
            let next = term * odd * odd / (k as f64 * 8.0 * x);
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        x.exp() / (std::f64::consts::TAU * x).sqrt() * sum
    }
}
