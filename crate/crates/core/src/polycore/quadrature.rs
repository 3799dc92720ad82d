//! Floating-point Gauss rules on the unit interval and collapsed-coordinate
//! rules on the reference triangle and tetrahedron.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[0, 1]`, exact up to degree `2n - 1`.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule on the reference triangle `{s, t >= 0, s + t <= 1}` with `n` points per direction.
pub fn triangle_rule(n: usize) -> Vec<([f64; 2], f64)> {
    let (x, w) = gauss_legendre_01(n);
    let mut out = Vec::with_capacity(n * n);
    for (a, wa) in x.iter().zip(&w) {
        for (b, wb) in x.iter().zip(&w) {
            let s = a;
            let t = b * (1.0 - a);
            out.push(([*s, t], wa * wb * (1.0 - a)));
        }
    }
    out
}

/// Rule on the reference tetrahedron with `n` points per direction.
pub fn tet_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre_01(n);
    let mut out = Vec::with_capacity(n * n * n);
    for (a, wa) in x.iter().zip(&w) {
        for (b, wb) in x.iter().zip(&w) {
            for (c, wc) in x.iter().zip(&w) {
                let p0 = a;
                let p1 = b * (1.0 - a);
                let p2 = c * (1.0 - a) * (1.0 - b);
                let jac = (1.0 - a) * (1.0 - a) * (1.0 - b);
                out.push(([*p0, p1, p2], wa * wb * wc * jac));
            }
        }
    }
    out
}

/// Number of points per direction needed for total degree `deg`.
pub fn points_for_degree(deg: usize) -> usize {
    deg / 2 + 2
}
