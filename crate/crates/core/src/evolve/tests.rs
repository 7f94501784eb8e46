use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::AlgebraKind;
use crate::data::{constrained_data, to_gauge_state, HiggsData};
use crate::grid::GridSpec;
use crate::nullform::random_algebra_field;

fn setup(n: usize) -> (Arc<LieAlgebra>, Arc<Grid>) {
    (Arc::new(LieAlgebra::new(AlgebraKind::su(2))), Grid::new(GridSpec::cube(n)))
}

fn abelian(n: usize) -> (Arc<LieAlgebra>, Arc<Grid>) {
    (Arc::new(LieAlgebra::abelian(AlgebraKind::su(2))), Grid::new(GridSpec::cube(n)))
}

fn random_state(alg: &Arc<LieAlgebra>, g: &Arc<Grid>, seed: u64, amp: f64) -> GaugeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = (0..22).map(|_| random_algebra_field(alg, g, 2, amp, &mut rng)).collect();
    GaugeState::from_fields(fields).unwrap()
}

#[test]
fn half_wave_round_trip() {
    let (alg, g) = setup(8);
    let s = random_state(&alg, &g, 1, 1.0);
    let back = from_half_wave(&to_half_wave(&s));
    assert!(back.distance(&s).unwrap() < 1e-12 * s.l2_norm());
    for f in back.fields() {
        assert!(f.max_imag() < 1e-12);
    }
}

#[test]
fn static_field_splits_evenly() {
    let (alg, g) = setup(8);
    let mut s = random_state(&alg, &g, 2, 1.0);
    for x in s.dta.iter_mut().chain(s.dtf.iter_mut()).chain([&mut s.dtphi]) {
        *x = x.scale(0.0);
    }
    let h = to_half_wave(&s);
    for f in 0..NFIELDS {
        let p = h.field(Sign::Plus, f);
        let m = h.field(Sign::Minus, f);
        assert!(p.sub(&m).unwrap().l2_norm() < 1e-14 * p.l2_norm().max(1e-300));
    }
    let u = h.field(Sign::Plus, 1).scale(2.0).to_physical();
    assert!(u.sub(&s.a[1]).unwrap().l2_norm() < 1e-12 * u.l2_norm());
}

#[test]
fn zero_state_zero_rhs() {
    let (alg, g) = setup(8);
    let h = HalfWaveState::zeros(&alg, &g);
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    assert_eq!(ev.rhs(&h).l2_norm(), 0.0);
    assert_eq!(ev.step(&h, 0.1, Integrator::ExpRK4).l2_norm(), 0.0);
}

#[test]
fn free_single_mode_phase() {
    let (alg, g) = setup(8);
    let mut h = HalfWaveState::zeros(&alg, &g);
    let k = [1, 2, 0];
    let idx = g.index_of(k);
    h.plus[3][1][idx] = C64::new(0.7, 0.1);
    h.minus[3][1][idx] = C64::new(-0.2, 0.4);
    let w = g.japanese()[idx];
    assert!((w - 6f64.sqrt()).abs() < 1e-15);
    let ev = Evolver::new(3.0, Coupling::Free).unwrap();

    let r = ev.rhs(&h);
    assert!((r.plus[3][1][idx] - C64::new(0.0, w) * h.plus[3][1][idx]).norm() < 1e-15);
    assert!((r.minus[3][1][idx] + C64::new(0.0, w) * h.minus[3][1][idx]).norm() < 1e-15);

    let t = 0.37;
    for integ in [Integrator::ExpEuler, Integrator::ExpRK4] {
        let out = ev.step(&h, t, integ);
        let ep = C64::from_polar(1.0, w * t);
        assert!((out.plus[3][1][idx] - ep * h.plus[3][1][idx]).norm() < 1e-12);
        assert!((out.minus[3][1][idx] - ep.conj() * h.minus[3][1][idx]).norm() < 1e-12);
    }
}

#[test]
fn dt_zero_is_identity() {
    let (alg, g) = setup(8);
    let h = to_half_wave(&random_state(&alg, &g, 3, 0.3));
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    let out = ev.step(&h, 0.0, Integrator::ExpRK4);
    assert_eq!(out.distance(&h, 0.0), 0.0);
}

#[test]
fn free_flow_is_unitary() {
    let (alg, g) = setup(8);
    let h = to_half_wave(&random_state(&alg, &g, 4, 1.0));
    let ev = Evolver::new(3.0, Coupling::Free).unwrap();
    let n0 = h.l2_norm();
    let cfg = EvolveConfig { dt: 0.05, t_end: 0.5, integrator: Integrator::ExpRK4, picard_depth: 1 };
    ev.evolve_with(&h, &cfg, |_, x| {
        assert!((x.l2_norm() - n0).abs() < 1e-12 * n0);
        Ok(())
    })
    .unwrap();
}

fn plane_wave_error(integ: Integrator, dt: f64) -> f64 {
    let (alg, g) = abelian(8);
    let h0 = to_half_wave(&abelian_plane_wave(&alg, &g, 1.0, 0.0));
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    let t_end = 1.0;
    let cfg = EvolveConfig { dt, t_end, integrator: integ, picard_depth: 1 };
    let out = ev.evolve_with(&h0, &cfg, |_, _| Ok(())).unwrap();
    let exact = to_half_wave(&abelian_plane_wave(&alg, &g, 1.0, t_end));
    out.distance(&exact, 0.0) / exact.l2_norm()
}

#[test]
fn plane_wave_is_exact_solution() {
    // the three-slice residual of the manufactured solution itself is O(h²)
    let (alg, g) = abelian(8);
    let res = |h: f64| {
        let s = |t: f64| abelian_plane_wave(&alg, &g, 1.0, t);
        crate::system::wave_residual_f(&s(0.3 - h), &s(0.3), &s(0.3 + h), h, 3.0).unwrap()[0]
    };
    assert!((res(0.02) / res(0.01) - 4.0).abs() < 0.05);
}

#[test]
fn rk4_order_on_plane_wave() {
    let e: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&dt| plane_wave_error(Integrator::ExpRK4, dt)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() < 0.2, "{e:?}");
    }
}

#[test]
fn euler_order_on_plane_wave() {
    let e: Vec<f64> = [0.02, 0.01].iter().map(|&dt| plane_wave_error(Integrator::ExpEuler, dt)).collect();
    let order = (e[0] / e[1]).log2();
    assert!((order - 1.0).abs() < 0.1, "{e:?}");
}

#[test]
fn steps_land_on_end_time() {
    let cfg = EvolveConfig { dt: 0.3, t_end: 1.0, integrator: Integrator::ExpRK4, picard_depth: 1 };
    assert_eq!(cfg.steps(), 4);
    assert!((cfg.effective_dt() - 0.25).abs() < 1e-15);
    let cfg = EvolveConfig { dt: 0.1, t_end: 0.5, ..cfg };
    assert_eq!(cfg.steps(), 5);
    assert!(EvolveConfig { dt: 2.0, t_end: 1.0, ..cfg }.validate().is_err());
    assert!(EvolveConfig { dt: 0.0, ..cfg }.validate().is_err());
}

#[test]
fn nan_aborts_with_last_time() {
    let (alg, g) = setup(8);
    let mut h = to_half_wave(&random_state(&alg, &g, 5, 0.1));
    h.plus[10][0][3] = C64::new(f64::NAN, 0.0);
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    let cfg = EvolveConfig { dt: 0.1, t_end: 0.3, integrator: Integrator::ExpRK4, picard_depth: 1 };
    let err = ev.evolve_with(&h, &cfg, |_, _| Ok(())).unwrap_err();
    assert!(matches!(err, YmhError::NonFinite { last_valid_time } if last_valid_time == 0.0));
}

#[test]
fn picard_zero_and_depth_one() {
    let (alg, g) = setup(8);
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    let z = HalfWaveState::zeros(&alg, &g);
    let r = picard_iterate(&ev, &z, 4, 0.5, 4, 1.0).unwrap();
    assert!(r.distances.iter().all(|&d| d == 0.0));
    assert!(r.last.iter().all(|x| x.l2_norm() == 0.0));

    let h = to_half_wave(&random_state(&alg, &g, 6, 0.1));
    let r = picard_iterate(&ev, &h, 1, 0.5, 5, 1.0).unwrap();
    assert!(r.distances.is_empty());
    let mut free = h.clone();
    free.free_flow(0.5);
    assert!(r.last[5].distance(&free, 0.0) < 1e-14 * free.l2_norm());
    assert!(picard_iterate(&ev, &h, 0, 0.5, 5, 1.0).is_err());
}

#[test]
fn picard_contracts_and_matches_stepper() {
    let (alg, g) = setup(8);
    let d = constrained_data(&alg, &g, 3, 2, 0.002, 3.0, HiggsData::Velocity).unwrap();
    let h = to_half_wave(&to_gauge_state(&d).unwrap());
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    let r = picard_iterate(&ev, &h, 8, 0.5, 20, 0.95).unwrap();
    assert!(!r.diverged);
    for q in r.ratios() {
        assert!(q < 0.5, "{:?}", r.distances);
    }
    let cfg = EvolveConfig { dt: 0.025, t_end: 0.5, integrator: Integrator::ExpRK4, picard_depth: 1 };
    let stepped = ev.evolve_with(&h, &cfg, |_, _| Ok(())).unwrap();
    let gap = stepped.distance(&r.last[20], 0.95) / stepped.sobolev_norm(0.95);
    assert!(gap < 1e-5, "{gap}");
}

#[test]
fn picard_odd_step_count() {
    // 3/8 panels at odd nodes keep fourth order in the linear case
    let (alg, g) = abelian(8);
    let h0 = to_half_wave(&abelian_plane_wave(&alg, &g, 1.0, 0.0));
    let ev = Evolver::new(3.0, Coupling::Full).unwrap();
    let exact = to_half_wave(&abelian_plane_wave(&alg, &g, 1.0, 0.5));
    let err = |steps: usize| {
        let r = picard_iterate(&ev, &h0, 12, 0.5, steps, 0.0).unwrap();
        r.last[steps].distance(&exact, 0.0) / exact.l2_norm()
    };
    let (e1, e2) = (err(9), err(18));
    assert!(e1 < 1e-4 && (e1 / e2).log2() > 3.5, "{e1} {e2}");
}
