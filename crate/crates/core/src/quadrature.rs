//! Gauss-Legendre and trapezoidal rules, plus fixed-order pairwise summation.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Map Gauss-Legendre nodes to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

/// Trapezoidal nodes on a full period [0, t): exact for trigonometric
/// polynomials of degree < n.
pub fn periodic_trapezoid(n: usize, period: f64) -> (Vec<f64>, Vec<f64>) {
    let h = period / n as f64;
    ((0..n).map(|k| k as f64 * h).collect(), vec![h; n])
}

/// Deterministic pairwise summation in the given order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(5);
        // degree ≤ 9 exact: ∫_{-1}^{1} x^8 dx = 2/9
        let int: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(int, 2.0 / 9.0, epsilon = 1e-13);
        let int: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(9)).sum();
        assert_relative_eq!(int, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn mapped_rule_and_trapezoid() {
        let (xs, ws) = gauss_legendre_on(8, 0.0, 2.0);
        let int: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(int, 8.0 / 3.0, epsilon = 1e-12);
        let (ts, ws) = periodic_trapezoid(16, 2.0 * std::f64::consts::PI);
        let int: f64 = ts.iter().zip(&ws).map(|(t, w)| w * (3.0 + (4.0 * t).cos())).sum();
        assert_relative_eq!(int, 6.0 * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_matches_naive_on_benign_data() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert_relative_eq!(pairwise_sum(&v), naive, epsilon = 1e-9);
    }
}
