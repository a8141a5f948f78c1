use proptest::prelude::*;

use peakwave::delta_op::{interleaves, DeltaOperator};
use peakwave::elliptic::{complete_e, complete_k, dn, Modulus};
use peakwave::evolve::conserved;
use peakwave::linops::{self, assemble, symmetric_spectrum, Parity, Which};
use peakwave::stability::{norm_squared, norm_squared_quadrature, slope};
use peakwave::wave::build_profile;
use peakwave::{Complex64, Grid, State, WaveParams, WaveProfile};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

fn positive_point() -> impl Strategy<Value = WaveParams> {
    (20.0f64..80.0, 0.1f64..3.0).prop_map(|(w, z)| WaveParams::new(w, z, 0.5))
}

fn negative_point() -> impl Strategy<Value = WaveParams> {
    (50.0f64..120.0, -2.0f64..-0.1).prop_map(|(w, z)| WaveParams::new(w, z, 0.5))
}

fn any_point() -> impl Strategy<Value = WaveParams> {
    prop_oneof![positive_point(), negative_point()]
}

#[test]
fn k_plus_e_is_increasing() {
    let mut last = f64::NEG_INFINITY;
    for i in 0..1000 {
        let m = Modulus::new(i as f64 / 1000.0).unwrap();
        let v = complete_k(&m) + complete_e(&m);
        assert!(v > last, "k={}", m.k());
        last = v;
    }
}

#[test]
fn dn_periodic_over_ten_quarter_periods() {
    for k in [0.1, 0.5, 0.9, 0.99] {
        let m = Modulus::new(k).unwrap();
        let kk = complete_k(&m);
        for i in 0..=200 {
            let u = -10.0 * kk + 20.0 * kk * i as f64 / 200.0;
            assert!((dn(u + 2.0 * kk, &m) - dn(u, &m)).abs() < 1e-11, "k={k} u={u}");
        }
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn delta_spectra_interleave(g in prop_oneof![-10.0f64..-0.01, 0.01f64..10.0], l in 0.3f64..6.0) {
        let op = DeltaOperator::finite(g, l).unwrap();
        prop_assert!(interleaves(&op.spectrum(8).unwrap()));
    }

    #[test]
    fn discrete_eigenvectors_satisfy_jump(g in prop_oneof![-4.0f64..-0.1, 0.1f64..4.0]) {
        let (n, l) = (1024, 2.0);
        let grid = Grid::new(n, l).unwrap();
        let pairs = symmetric_spectrum(&DeltaOperator::finite(g, l).unwrap().discretize(n).unwrap(), &grid, 4);
        let (o, h) = (grid.origin(), grid.h());
        for p in pairs.iter().filter(|p| p.parity == Parity::Even) {
            let v = &p.vector;
            let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let jump = (v[o + 1] - v[o]) / h - (v[o] - v[o - 1]) / h;
            prop_assert!((jump - g * v[o]).abs() < 4.0 * h * (1.0 + p.value.abs()) * vmax);
        }
    }

    #[test]
    fn zero_is_not_an_eigenvalue(g in prop_oneof![-4.0f64..-0.2, 0.2f64..4.0]) {
        let l = 1.0;
        let mut mins = Vec::new();
        for n in [256, 512, 1024] {
            let a = DeltaOperator::finite(g, l).unwrap().discretize(n).unwrap();
            let pairs = symmetric_spectrum(&a, &Grid::new(n, l).unwrap(), 3);
            mins.push(pairs.iter().map(|p| p.value.abs()).fold(f64::INFINITY, f64::min));
        }
        let floor = mins[0] * 0.5;
        prop_assert!(mins.iter().all(|&m| m > floor && m > 1e-3), "{mins:?}");
    }

    #[test]
    fn lowest_discrete_value_approaches_bound_state(g in -6.0f64..-0.2) {
        let l = 1.0;
        let exact = DeltaOperator::finite(g, l).unwrap().negative_eigenvalue().unwrap().eigenvalue;
        let err = |n: usize| {
            let a = DeltaOperator::finite(g, l).unwrap().discretize(n).unwrap();
            (a.lowest_eigenpairs(1)[0].0 - exact).abs()
        };
        let (e1, e2) = (err(512), err(1024));
        prop_assert!(e2 < e1 && e2 < 2e-2 * (1.0 + exact.abs()), "{e1} {e2}");
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn derivative_is_antisymmetric_at_defect(p in any_point()) {
        let prof = build_profile(&p, 16).unwrap();
        let d = 1e-5 * prof.scale();
        let right = (prof.eval(d) - prof.eval(0.0)) / d;
        let left = (prof.eval(0.0) - prof.eval(-d)) / d;
        prop_assert!((right + left).abs() < 1e-9 * (1.0 + right.abs()));
    }

    #[test]
    fn quadrature_identity_everywhere(p in any_point()) {
        prop_assert!(build_profile(&p, 512).unwrap().diagnostics().quadrature_residual < 1e-8);
    }

    #[test]
    fn l1_is_negative_on_profile(p in any_point()) {
        let prof = build_profile(&p, 512).unwrap();
        let op = assemble(&prof, Which::L1).unwrap();
        let q: f64 = op.matrix.apply(&prof.values).iter().zip(&prof.values).map(|(a, b)| a * b).sum();
        prop_assert!(q < 0.0);
    }

    #[test]
    fn simple_eigenvectors_have_parity(p in any_point()) {
        let prof = build_profile(&p, 512).unwrap();
        let s = linops::spectrum(&assemble(&prof, Which::L1).unwrap(), 6);
        for (i, e) in s.pairs.iter().enumerate() {
            let gap = s.pairs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| (f.value - e.value).abs()).fold(f64::INFINITY, f64::min);
            if gap > 1e-6 * (1.0 + e.value.abs()) {
                prop_assert!(e.parity != Parity::Mixed, "{i} {:?}", s.values());
            }
        }
    }

    #[test]
    fn l1_spectrum_above_six_omega(p in any_point()) {
        let prof = build_profile(&p, 512).unwrap();
        let s = linops::spectrum(&assemble(&prof, Which::L1).unwrap(), 1);
        prop_assert!(s.pairs[0].value >= -6.0 * p.omega);
    }

    #[test]
    fn second_l1_eigenvector_is_odd_for_negative_defect(p in negative_point()) {
        let prof = build_profile(&p, 512).unwrap();
        let s = linops::count_negative(&assemble(&prof, Which::L1).unwrap());
        prop_assert_eq!(s.n_negative, 2);
        prop_assert_eq!(s.pairs[1].parity, Parity::Odd);
    }

    #[test]
    fn slope_sign_is_stable(p in any_point()) {
        let s = slope(&p, 1e-3 * p.omega).unwrap();
        let half = slope(&p, 5e-4 * p.omega).unwrap();
        prop_assert!(s.value.signum() == s.refined.signum() && s.value.signum() == half.value.signum());
        prop_assert!(s.halving_agreement < 1e-6);
    }

    #[test]
    fn norm_quadrature_is_second_order(p in any_point()) {
        let err = |n: usize| {
            let prof = build_profile(&p, n).unwrap();
            (norm_squared(&prof) - norm_squared_quadrature(&prof)).abs()
        };
        let r = err(256) / err(512);
        prop_assert!((3.0..5.0).contains(&r), "{r}");
    }
}

fn action(prof: &WaveProfile, u: Vec<Complex64>) -> f64 {
    let (q, e) = conserved(&State::new(prof.grid, u).unwrap(), prof.params.z);
    e + prof.params.omega * q
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn hessian_splits_for_even_directions(p in any_point(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let n = 256;
        let prof = build_profile(&p, n).unwrap();
        let g = prof.grid;
        let l = p.half_period;
        let zeta: Vec<f64> = (0..n).map(|i| (std::f64::consts::PI * g.x(i) / l).cos() + a).collect();
        let psi: Vec<f64> = (0..n).map(|i| (-(g.x(i) / l).powi(2) * 4.0).exp() + b).collect();
        let quad = |w: Which, v: &[f64]| {
            let m = assemble(&prof, w).unwrap().matrix;
            g.h() * m.apply(v).iter().zip(v).map(|(x, y)| x * y).sum::<f64>()
        };
        let expect = quad(Which::L1, &zeta) + quad(Which::L2, &psi);
        let eps = 1e-3;
        let along = |s: f64| {
            let u = (0..n).map(|i| Complex64::new(prof.values[i] + s * zeta[i], s * psi[i])).collect();
            action(&prof, u)
        };
        let second = (along(eps) - 2.0 * along(0.0) + along(-eps)) / (eps * eps);
        prop_assert!((second - expect).abs() < 1e-4 * (1.0 + expect.abs()), "{second} {expect}");
    }
}

#[test]
fn monotone_in_omega() {
    for (z, omegas) in [(1.0, (20..=30).map(|i| 2.0 * i as f64).collect::<Vec<_>>()), (-1.0, (46..=66).map(|i| 2.0 * i as f64).collect())] {
        let profs: Vec<WaveProfile> = omegas.iter().map(|&w| build_profile(&WaveParams::new(w, z, 0.5), 8).unwrap()).collect();
        for w in profs.windows(2) {
            assert!(w[1].eta2 < w[0].eta2, "η₂ at Z={z}, ω={}", w[1].params.omega);
            assert!(w[1].modulus.k() > w[0].modulus.k(), "k at Z={z}");
            assert!(w[1].shift < w[0].shift, "a at Z={z}");
        }
    }
}

#[test]
fn shift_vanishes_as_omega_grows() {
    for z in [1.0, -1.0] {
        let shifts: Vec<f64> = (0..8).map(|i| build_profile(&WaveParams::new(60.0 * 2f64.powi(i), z, 0.5), 8).unwrap().shift).collect();
        assert!(shifts.windows(2).all(|w| w[1] < w[0]), "{shifts:?}");
        assert!(*shifts.last().unwrap() < 0.1 * shifts[0]);
    }
}

#[test]
fn profiles_converge_as_defect_vanishes() {
    let n = 256;
    let base = build_profile(&WaveParams::new(60.0, 0.0, 0.5), n).unwrap();
    for sign in [1.0, -1.0] {
        let dist: Vec<f64> = [0.4, 0.1, 0.025]
            .iter()
            .map(|&z| {
                let p = build_profile(&WaveParams::new(60.0, sign * z, 0.5), n).unwrap();
                p.values.iter().zip(&base.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
    }
}
