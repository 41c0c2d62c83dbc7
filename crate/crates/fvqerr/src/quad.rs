//! Gauss-Legendre nodes and adaptive composite quadrature.

use crate::error::{FvError, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root (descending).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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

/// Gauss-Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
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

/// Result of a composite integration, with a two-resolution error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

const PANEL_ORDER: usize = 15;
const MAX_PANELS: usize = 20_000;

/// Composite Gauss-Legendre integration of `f` over [a, b], with panels sized
/// to resolve oscillation at angular frequency `osc` (at most a quarter
/// period per panel) and variation on the scale `smooth`. The error estimate
/// compares against a half-resolution pass.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    osc: f64,
    smooth: f64,
) -> Result<QuadResult> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(FvError::InvalidParameter(format!(
            "bad integration range [{a}, {b}]"
        )));
    }
    let mut width = 0.5 * smooth;
    if osc > 0.0 {
        width = width.min(0.5 * std::f64::consts::PI / osc);
    }
    let n_panels = (((b - a) / width).ceil() as usize).clamp(2, MAX_PANELS);
    let value = composite(f, a, b, n_panels);
    let coarse = composite(f, a, b, n_panels.div_ceil(2));
    Ok(QuadResult {
        value,
        error_estimate: (value - coarse).abs(),
        panels: n_panels,
    })
}

fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n_panels: usize) -> f64 {
    let (x0, w0) = gauss_legendre(PANEL_ORDER);
    let h = (b - a) / n_panels as f64;
    let mut acc = 0.0;
    for k in 0..n_panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x0.iter().zip(w0.iter()) {
            acc += 0.5 * h * wi * f(mid + 0.5 * h * xi);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_match_reference_n4() {
        // Reference values for n = 4.
        let (x, w) = gauss_legendre(4);
        let xr = [
            -0.8611363115940526,
            -0.3399810435848563,
            0.3399810435848563,
            0.8611363115940526,
        ];
        let wr = [
            0.3478548451374538,
            0.6521451548625461,
            0.6521451548625461,
            0.3478548451374538,
        ];
        for k in 0..4 {
            assert!((x[k] - xr[k]).abs() < 1e-14);
            assert!((w[k] - wr[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn oscillatory_integral_machine_accurate() {
        // int_0^inf x e^-x sin(10 x) dx = Im (1 - 10i)^-2 = 20/10201
        let f = |x: f64| x * (-x).exp() * (10.0 * x).sin();
        let exact = 20.0 / 10201.0;
        let q = integrate_oscillatory(&f, 0.0, 60.0, 10.0, 1.0).unwrap();
        assert!((q.value - exact).abs() < 1e-13, "{} vs {exact}", q.value);
        assert!(q.error_estimate < 1e-12);
    }
}
