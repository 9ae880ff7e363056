//! Gauss-Legendre quadrature and the modified Bessel function `K1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Number of Gauss-Legendre nodes used for `K1`.
pub const K1_NODES: usize = 201;

/// Half-width cap of the integration range in the log variable.
const K1_HALF_WIDTH: f64 = 30.0;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn k1_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(K1_NODES))
}

/// Exponentially scaled Bessel function `exp(z) * K1(z)` for `z > 0`.
///
/// Uses `K1(z) = 1/2 ∫_0^∞ exp(-z (s + 1/s) / 2) ds` with `s = e^u`, which
/// turns the integrand into `exp(u - z cosh u)`. The range in `u` is cut
/// where the scaled integrand has dropped below `e^-75`, never wider than
/// `[-30, 30]`.
pub fn bessel_k1_scaled(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 0.0;
    }
    if z <= 0.0 || z.is_nan() {
        return f64::NAN;
    }
    let half = (1.0 + 75.0 / z).acosh().min(K1_HALF_WIDTH);
    let (nodes, weights) = k1_rule();
    let sum: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(&s, &w)| {
            let u = half * s;
            // cosh(u) - 1 = 2 sinh^2(u/2)
            let sh = (0.5 * u).sinh();
            w * (u - 2.0 * z * sh * sh).exp()
        })
        .sum();
    0.5 * half * sum
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(z: f64) -> f64 {
    bessel_k1_scaled(z) * (-z).exp()
}
