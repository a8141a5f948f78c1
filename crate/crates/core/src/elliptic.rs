//! Complete and incomplete elliptic integrals and the Jacobi elliptic
//! functions, all in terms of the modulus `k` (not the parameter `m = k²`).
//!
//! Complete integrals use the arithmetic-geometric mean, incomplete ones the
//! Carlson symmetric forms, and `sn, cn, dn` the descending Landen (AGM)
//! scheme with a hyperbolic branch next to `k = 1`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::bisect;

/// Elliptic modulus stored together with its complement so that `k′` keeps
/// full relative accuracy when `k` is close to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Modulus {
    k: f64,
    kp: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidModulus(k));
        }
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Modulus { k, kp })
    }

    /// Builds the modulus from `k′ = sqrt(1 − k²)`.
    pub fn from_complement(kp: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kp) {
            return Err(Error::InvalidModulus(kp));
        }
        let k = ((1.0 - kp) * (1.0 + kp)).sqrt();
        Ok(Modulus { k, kp })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    /// `k²`.
    pub fn m(&self) -> f64 {
        self.k * self.k
    }

    /// The complementary modulus as a new value.
    pub fn complement(&self) -> Modulus {
        Modulus { k: self.kp, kp: self.k }
    }
}

fn agm_sequence(kp: f64) -> (f64, Vec<f64>) {
    // returns a_N and the c_n sequence starting at c_0 = k
    let mut a: f64 = 1.0;
    let mut b = kp;
    let mut cs = Vec::with_capacity(12);
    cs.push(((1.0 - kp) * (1.0 + kp)).sqrt());
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        cs.push(c);
    }
    (a, cs)
}

/// Complete integral of the first kind `K(k)`.
pub fn complete_k(m: &Modulus) -> f64 {
    if m.kp == 0.0 {
        return f64::INFINITY;
    }
    let (a, _) = agm_sequence(m.kp);
    PI / (2.0 * a)
}

/// Complete integral of the second kind `E(k)`.
pub fn complete_e(m: &Modulus) -> f64 {
    if m.kp == 0.0 {
        return 1.0;
    }
    let mut a: f64 = 1.0;
    let mut b = m.kp;
    let mut c = m.k;
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        // c_{n+1} = c_n²/(4a_{n+1}) avoids the cancellation in (a − b)/2
        c = c * c / (4.0 * an);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if c <= 1e-17 * a {
            break;
        }
    }
    (PI / (2.0 * a)) * (1.0 - sum)
}

/// Carlson's `R_F(x, y, z)`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dx = 1.0 - x / a;
        let dy = 1.0 - y / a;
        let dz = 1.0 - z / a;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-3 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let l = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + l);
        y = 0.25 * (y + l);
        z = 0.25 * (z + l);
    }
    f64::NAN
}

/// Carlson's `R_D(x, y, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..200 {
        let a = (x + y + 3.0 * z) / 5.0;
        let dx = (a - x) / a;
        let dy = (a - y) / a;
        let dz = (a - z) / a;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-3 {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let (c1, c2, c3, c4) = (3.0 / 14.0, 1.0 / 6.0, 9.0 / 22.0, 3.0 / 26.0);
            let (c5, c6) = (0.25 * c3, 1.5 * c4);
            let series = 1.0
                + ed * (-c1 + c5 * ed - c6 * dz * ee)
                + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea));
            return 3.0 * sum + fac * series / (a * a.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let l = sx * sy + sy * sz + sz * sx;
        sum += fac / (sz * (z + l));
        fac *= 0.25;
        x = 0.25 * (x + l);
        y = 0.25 * (y + l);
        z = 0.25 * (z + l);
    }
    f64::NAN
}

fn reduce_amplitude(phi: f64) -> (f64, f64) {
    // phi = n π + r with r in [−π/2, π/2]
    let n = (phi / PI).round();
    (n, phi - n * PI)
}

/// Incomplete integral of the first kind `F(φ, k)` for any real amplitude.
pub fn incomplete_f(phi: f64, m: &Modulus) -> f64 {
    let (n, r) = reduce_amplitude(phi);
    let (s, c) = r.sin_cos();
    let delta2 = c * c + m.kp * m.kp * s * s;
    let base = s * carlson_rf(c * c, delta2, 1.0);
    if n == 0.0 {
        base
    } else {
        base + 2.0 * n * complete_k(m)
    }
}

/// Incomplete integral of the second kind `E(φ, k)` for any real amplitude.
pub fn incomplete_e(phi: f64, m: &Modulus) -> f64 {
    let (n, r) = reduce_amplitude(phi);
    let (s, c) = r.sin_cos();
    let delta2 = c * c + m.kp * m.kp * s * s;
    let base = s * carlson_rf(c * c, delta2, 1.0) - m.m() / 3.0 * s * s * s * carlson_rd(c * c, delta2, 1.0);
    if n == 0.0 {
        base
    } else {
        base + 2.0 * n * complete_e(m)
    }
}

/// Values of the Jacobi functions and the amplitude at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub am: f64,
}

/// `sn, cn, dn` and `am` at `u`.
pub fn jacobi(u: f64, m: &Modulus) -> Jacobi {
    if m.k == 0.0 {
        let (s, c) = u.sin_cos();
        return Jacobi { sn: s, cn: c, dn: 1.0, am: u };
    }
    if 1.0 - m.k < 1e-12 {
        // first order in k′² about the hyperbolic limit
        let m1 = m.kp * m.kp;
        let (sh, ch) = (u.sinh(), u.cosh());
        let th = u.tanh();
        let sech = 1.0 / ch;
        let t = if u.abs() < 20.0 { sh * ch - u } else { f64::INFINITY };
        let corr = if t.is_finite() { 0.25 * m1 * t } else { 0.0 };
        let sn = th + corr * sech * sech;
        let cn = sech - corr * th * sech;
        let dn_corr = if u.abs() < 20.0 { 0.25 * m1 * (sh * ch + u) * th * sech } else { 0.0 };
        let dn = sech + dn_corr;
        let am = 2.0 * (u.exp()).atan() - FRAC_PI_2;
        return Jacobi { sn, cn, dn, am };
    }
    let mut a = [0.0f64; 40];
    let mut c = [0.0f64; 40];
    a[0] = 1.0;
    let mut b = m.kp;
    c[0] = m.k;
    let mut n = 0;
    while n < 38 {
        if c[n].abs() <= 1e-17 * a[n] && n > 0 {
            break;
        }
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = c[n] * c[n] / (4.0 * a[n + 1]);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (2f64).powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (m.kp * m.kp + m.k * m.k * cn * cn).sqrt();
    Jacobi { sn, cn, dn, am: phi }
}

pub fn sn(u: f64, m: &Modulus) -> f64 {
    jacobi(u, m).sn
}

pub fn cn(u: f64, m: &Modulus) -> f64 {
    jacobi(u, m).cn
}

pub fn dn(u: f64, m: &Modulus) -> f64 {
    jacobi(u, m).dn
}

/// Solves `dn(u; k) = y` for `u ∈ [0, K]` by bisection.
pub fn inverse_dn(y: f64, m: &Modulus) -> Result<f64> {
    if !(m.kp..=1.0).contains(&y) {
        return Err(Error::Domain(format!("dn⁻¹ needs y in [k′, 1]; got y={y}, k′={}", m.kp)));
    }
    if m.k == 0.0 {
        return Ok(0.0);
    }
    let kk = complete_k(m);
    if y == m.kp {
        return Ok(kk);
    }
    bisect(|u| dn(u, m) - y, 0.0, kk, 1e-14)
}

/// Solves `sn(u; k) = s` for `u ∈ [0, K]` in closed form, `u = F(arcsin s, k)`.
pub fn inverse_sn(s: f64, m: &Modulus) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("sn⁻¹ needs s in [0, 1]; got {s}")));
    }
    if s == 1.0 {
        return Ok(complete_k(m));
    }
    Ok(incomplete_f(s.asin(), m))
}

/// Jacobi's epsilon function `∫₀ᵘ dn² = E(am u, k)`.
pub fn epsilon(u: f64, m: &Modulus) -> f64 {
    incomplete_e(jacobi(u, m).am, m)
}

/// `E K′ + E′ K − K K′ − π/2`, which vanishes identically.
pub fn legendre_defect(m: &Modulus) -> f64 {
    let mc = m.complement();
    let (k, e) = (complete_k(m), complete_e(m));
    let (kc, ec) = (complete_k(&mc), complete_e(&mc));
    e * kc + ec * k - k * kc - FRAC_PI_2
}
