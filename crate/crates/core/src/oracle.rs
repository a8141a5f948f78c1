//! Independent numerical oracles used by unit tests only.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite 16-point Gauss–Legendre quadrature over `panels` subintervals.
pub fn gauss_legendre_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
    }
    s * 0.5 * h
}

/// RK4 integration of `sn′ = cn dn, cn′ = −sn dn, dn′ = −k² sn cn` from 0 to `u`.
pub fn rk4_jacobi(k: f64, u: f64, steps: usize) -> (f64, f64, f64) {
    let f = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]];
    let h = u / steps as f64;
    let mut y = [0.0, 1.0, 1.0];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]]);
        let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]]);
        let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]]);
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[1], y[2])
}

/// RK4 for `φ″ = ωφ − φ³` from `ξ = 0` with data `(φ, φ′)`; returns the
/// first `ξ > 0` where `φ′` changes sign from positive to non-positive or
/// from negative to non-negative, counting `turns` such events.
pub fn shoot_turning_point(omega: f64, phi0: f64, dphi0: f64, turns: usize, h: f64) -> f64 {
    let f = |y: [f64; 2]| [y[1], omega * y[0] - y[0] * y[0] * y[0]];
    let step = |y: [f64; 2], h: f64| {
        let k1 = f(y);
        let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    let mut y = [phi0, dphi0];
    let mut x = 0.0;
    let mut seen = 0;
    loop {
        let yn = step(y, h);
        if y[1] != 0.0 && yn[1].signum() != y[1].signum() || yn[1] == 0.0 {
            seen += 1;
            if seen == turns {
                // refine the crossing inside the step by bisection on the sub-step
                let (mut a, mut b) = (0.0, h);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let ym = step(y, m);
                    if ym[1].signum() == y[1].signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return x + 0.5 * (a + b);
            }
        }
        y = yn;
        x += h;
        if x > 1e4 {
            return f64::NAN;
        }
    }
}
