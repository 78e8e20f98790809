//! Quadrature rules shared by the boundary kernels and the verifiers.

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Nodes and weights of a composite rule over the given panel edges.
pub fn composite_gauss(edges: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * edges.len());
    let mut weights = Vec::with_capacity(order * edges.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// Uniform-step weights: trapezoid plus Gregory end corrections through third differences.
///
/// Exact for cubics; for samples that vanish smoothly at both ends it reduces
/// to the plain trapezoid rule, which keeps its spectral accuracy there.
pub fn gregory_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 8, "gregory weights need at least 8 samples");
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    // h/12 (Δf0) - h/24 Δ²f0 + 19h/720 Δ³f0, written per sample
    let c1 = 1.0 / 12.0;
    let c2 = -1.0 / 24.0;
    let c3 = 19.0 / 720.0;
    let delta = [
        [-1.0, 1.0, 0.0, 0.0],
        [1.0, -2.0, 1.0, 0.0],
        [-1.0, 3.0, -3.0, 1.0],
    ];
    for k in 0..4 {
        let c = c1 * delta[0][k] + c2 * delta[1][k] + c3 * delta[2][k];
        w[k] += h * c;
        w[n - 1 - k] += h * c;
    }
    w
}

/// Panel edges on [-zmax, zmax], symmetric, with width `width(|z|)` chosen locally.
pub fn graded_edges(zmax: f64, width: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut right = vec![0.0];
    let mut z = 0.0;
    while z < zmax {
        let w = width(z).max(1e-6);
        z = (z + w).min(zmax);
        if zmax - z < 0.25 * w {
            z = zmax;
        }
        right.push(z);
    }
    let mut edges: Vec<f64> = right.iter().rev().map(|v| -v).collect();
    edges.extend_from_slice(&right[1..]);
    edges
}

/// Split every panel in two.
pub fn refine_edges(edges: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * edges.len());
    for pair in edges.windows(2) {
        out.push(pair[0]);
        out.push(0.5 * (pair[0] + pair[1]));
    }
    out.push(*edges.last().unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        for p in 0..32 {
            let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "p = {p}: {num} vs {exact}");
        }
    }

    #[test]
    fn gregory_exact_for_cubics() {
        let n = 21;
        let h = 0.1;
        let w = gregory_weights(n, h);
        for p in 0..4 {
            let num: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(p)).sum();
            let exact = 2.0f64.powi(p + 1) / (p as f64 + 1.0);
            assert!((num - exact).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn gregory_fourth_order() {
        let f = |t: f64| (-t).exp() * (3.0 * t).cos();
        let exact = {
            // ∫0^2 e^{-t} cos 3t dt = Re[(1 - e^{-(1-3i)2})/(1-3i)]
            let a = num_complex::Complex64::new(1.0, -3.0);
            ((num_complex::Complex64::new(1.0, 0.0) - (-a * 2.0).exp()) / a).re
        };
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let w = gregory_weights(n, h);
            ((0..n).map(|i| w[i] * f(i as f64 * h)).sum::<f64>() - exact).abs()
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 14.0, "observed ratio {ratio}");
    }

    #[test]
    fn edges_are_symmetric_and_sorted() {
        let e = graded_edges(10.0, |z| 0.5 + 0.25 * z);
        assert_eq!(e.first(), Some(&-10.0));
        assert_eq!(e.last(), Some(&10.0));
        assert!(e.windows(2).all(|p| p[1] > p[0]));
        let r = refine_edges(&e);
        assert_eq!(r.len(), 2 * e.len() - 1);
    }
}
