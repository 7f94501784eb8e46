use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{commutator, random_element, AlgebraKind, CMatrix};
use crate::data::make_lorenz_potential;
use crate::grid::GridSpec;
use crate::nullform::{eta, random_algebra_field, verify_lemma1};

fn setup(n: usize) -> (Arc<LieAlgebra>, Arc<Grid>) {
    (Arc::new(LieAlgebra::new(AlgebraKind::su(2))), Grid::new(GridSpec::cube(n)))
}

/// Lorenz potential, its curvature, random ∂_t F and random Higgs field.
fn lorenz_state(alg: &Arc<LieAlgebra>, g: &Arc<Grid>, seed: u64, band: usize, amp: f64) -> GaugeState {
    let pot = make_lorenz_potential(alg, g, seed, band, amp);
    let a: [AlgebraField; 4] = std::array::from_fn(|i| pot[i].u.clone());
    let dta: [AlgebraField; 4] = std::array::from_fn(|i| pot[i].dt.clone());
    let f = curvature_from_potential(&a, &dta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let dtf = std::array::from_fn(|_| random_algebra_field(alg, g, band, amp, &mut rng));
    let phi = random_algebra_field(alg, g, band, amp, &mut rng);
    let dtphi = random_algebra_field(alg, g, band, amp, &mut rng);
    GaugeState { a, dta, f, dtf, phi, dtphi }
}

fn max_norm(xs: &[AlgebraField]) -> f64 {
    xs.iter().map(|x| x.l2_norm()).fold(0.0, f64::max)
}

#[test]
fn pair_index_signs() {
    assert_eq!(pair_index(0, 1), Some((0, 1.0)));
    assert_eq!(pair_index(3, 2), Some((5, -1.0)));
    assert_eq!(pair_index(2, 2), None);
    for (s, &(a, b)) in PAIRS.iter().enumerate() {
        assert_eq!(pair_index(b, a), Some((s, -1.0)));
    }
}

#[test]
fn zero_state_gives_zero() {
    let (alg, g) = setup(8);
    let s = GaugeState::zeros(&alg, &g);
    let n = nonlinearities(&s, 3.0, Terms::ALL).unwrap();
    assert_eq!(max_norm(&n.lambda), 0.0);
    assert_eq!(max_norm(&n.gamma), 0.0);
    assert_eq!(n.phi.l2_norm(), 0.0);
    let sp = split(&s, 3.0).unwrap();
    assert_eq!(max_norm(&sp.first.gamma), 0.0);
}

#[test]
fn exponent_range() {
    let (alg, g) = setup(8);
    let s = GaugeState::zeros(&alg, &g);
    assert!(matches!(nonlinearities(&s, 5.0, Terms::ALL), Err(YmhError::Exponent(_))));
    assert!(matches!(nonlinearities(&s, 1.5, Terms::ALL), Err(YmhError::Exponent(_))));
    assert!(nonlinearities(&s, 4.9, Terms::ALL).is_ok());
}

#[test]
fn manifest_round_trip() {
    let (alg, g) = setup(8);
    let s = lorenz_state(&alg, &g, 3, 2, 0.5);
    let fields: Vec<AlgebraField> = s.fields().into_iter().cloned().collect();
    assert_eq!(fields.len(), MANIFEST.len());
    let back = GaugeState::from_fields(fields).unwrap();
    assert_eq!(back.distance(&s).unwrap(), 0.0);
    assert!(GaugeState::from_fields(vec![]).is_err());
}

#[test]
fn recombination_on_lorenz_data() {
    let (alg, g) = setup(16);
    for seed in 0..2 {
        let s = lorenz_state(&alg, &g, seed, 2, 0.5);
        let r = recombination_residuals(&s, 3.0).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
    }
}

#[test]
fn lorenz_violation_breaks_split_linearly() {
    let (alg, g) = setup(16);
    let base = lorenz_state(&alg, &g, 9, 2, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bump = random_algebra_field(&alg, &g, 2, 1.0, &mut rng);
    let res = |delta: f64| {
        let mut s = base.clone();
        s.dta[0].axpy(delta, &bump).unwrap();
        recombination_residuals(&s, 3.0).unwrap().max()
    };
    let (r1, r2) = (res(1e-2), res(2e-2));
    assert!(r1 > 1e-5);
    assert!((r2 / r1 - 2.0).abs() < 0.05, "{r1} {r2}");
}

#[test]
fn null_terms_are_quadratic() {
    let (alg, g) = setup(8);
    let s = lorenz_state(&alg, &g, 2, 2, 1.0);
    let n1 = nonlinearities(&s, 3.0, Terms::NULL).unwrap();
    let n3 = nonlinearities(&s.scale(3.0), 3.0, Terms::NULL).unwrap();
    for (x, y) in n1.gamma.iter().zip(&n3.gamma) {
        assert!(y.sub(&x.scale(9.0)).unwrap().l2_norm() <= 1e-12 * y.l2_norm().max(1.0));
    }
}

#[test]
fn rest_terms_split_into_cubic_and_quartic() {
    // R(ε) = ε³c₃ + ε⁴c₄ for φ = 0, so R(2ε) − 8R(ε) is homogeneous of degree 4
    let (alg, g) = setup(16);
    let mut s = lorenz_state(&alg, &g, 2, 1, 1.0);
    s.phi = AlgebraField::zeros(&alg, &g, Repr::Physical);
    s.dtphi = s.phi.clone();
    let rest = |e: f64| nonlinearities(&s.scale(e), 3.0, Terms::REST).unwrap().gamma[3].clone();
    let quartic = |e: f64| rest(2.0 * e).sub(&rest(e).scale(8.0)).unwrap().l2_norm();
    for e in [1e-1, 1e-2] {
        let fit = (quartic(e) / quartic(e / 10.0)).log10();
        assert!((fit - 4.0).abs() < 1e-3, "{fit}");
        let cubic = rest(e).l2_norm() / rest(e / 10.0).l2_norm();
        assert!((cubic.log10() - 3.0).abs() < 0.05, "{cubic}");
    }
}

#[test]
fn covariant_leibniz() {
    let (alg, g) = setup(16);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut draw = || random_algebra_field(&alg, &g, 1, 1.0, &mut rng);
    let a = draw();
    let x = SpacetimeField::new(draw(), draw());
    let y = SpacetimeField::new(draw(), draw());
    let xy = SpacetimeField::new(x.u.bracket(&y.u).unwrap(), draw());
    for al in 1..4 {
        let lhs = covariant_derivative(&a, &xy, al).unwrap();
        let rhs = covariant_derivative(&a, &x, al)
            .unwrap()
            .bracket(&y.u)
            .unwrap()
            .add(&x.u.bracket(&covariant_derivative(&a, &y, al).unwrap()).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().l2_norm() < 1e-12 * lhs.l2_norm());
    }
}

#[test]
fn higgs_potential_degree() {
    // abelian algebra: only the potential survives in Φ
    let alg = Arc::new(LieAlgebra::abelian(AlgebraKind::su(2)));
    let g = Grid::new(GridSpec::cube(8));
    let mut s = GaugeState::zeros(&alg, &g);
    s.phi = AlgebraField::from_fn(&alg, &g, |x| vec![1.0 + 0.5 * x[0].sin(), 0.3, 0.0]);
    for p in [2.5, 3.0, 4.0] {
        let a = phi_rhs(&s, p).unwrap();
        let b = phi_rhs(&s.scale(2.0), p).unwrap();
        let fit = (b.l2_norm() / a.l2_norm()).log2();
        assert!((fit - p).abs() < 1e-9, "p={p} fit={fit}");
    }
}

#[test]
fn abelian_sector_is_linear() {
    let alg = Arc::new(LieAlgebra::abelian(AlgebraKind::su(2)));
    let g = Grid::new(GridSpec::cube(8));
    let mut s = lorenz_state(&alg, &g, 4, 2, 1.0);
    s.phi = AlgebraField::zeros(&alg, &g, Repr::Physical);
    s.dtphi = s.phi.clone();
    let n = nonlinearities(&s, 3.0, Terms::ALL).unwrap();
    assert!(max_norm(&n.lambda) < 1e-13);
    assert!(max_norm(&n.gamma) < 1e-13);
}

#[test]
fn outputs_stay_in_algebra() {
    let alg = Arc::new(LieAlgebra::new(AlgebraKind::su(3)));
    let g = Grid::new(GridSpec::cube(8));
    let s = lorenz_state(&alg, &g, 6, 2, 0.5);
    let n = nonlinearities(&s, 3.0, Terms::ALL).unwrap();
    for f in n.lambda.iter().chain(&n.gamma) {
        assert_eq!(f.algebra().dim(), 8);
        assert!(f.max_imag() < 1e-14 * f.l2_norm());
        for idx in [0, 17, 300] {
            assert!(f.element_at(idx).closure_residual() < 1e-12);
        }
    }
}

#[test]
fn lemma1_identities_hold() {
    let (alg, g) = setup(16);
    let a = make_lorenz_potential(&alg, &g, 11, 3, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let psi = SpacetimeField::new(
        random_algebra_field(&alg, &g, 3, 1.0, &mut rng),
        random_algebra_field(&alg, &g, 3, 1.0, &mut rng),
    );
    let r = verify_lemma1(&a, &psi).unwrap();
    assert!(r.frak < 1e-12 && r.time < 1e-12, "{r:?}");
}

fn constant_u(kind: AlgebraKind, seed: u64) -> CMatrix {
    crate::algebra::expm(random_element(kind, seed, 1.0).entries())
}

#[test]
fn constant_gauge_covariance() {
    let (alg, g) = setup(8);
    let s = lorenz_state(&alg, &g, 5, 2, 0.7);
    let gm = GaugeMap::constant(&alg, &g, constant_u(alg.kind(), 8));
    let t = gauge_transform(&s, &gm).unwrap();

    let ft = curvature_from_potential(&t.a, &t.dta).unwrap();
    for (x, y) in ft.iter().zip(&t.f) {
        assert!(x.sub(y).unwrap().l2_norm() < 1e-12 * y.l2_norm());
    }
    let n = nonlinearities(&s, 3.0, Terms::ALL).unwrap();
    let nt = nonlinearities(&t, 3.0, Terms::ALL).unwrap();
    let conj = |x: &AlgebraField| gauge_transform_field(&gm, x);
    for (x, y) in n.gamma.iter().zip(&nt.gamma) {
        assert!(conj(x).sub(y).unwrap().l2_norm() < 1e-11 * x.l2_norm().max(1.0));
    }
    for (x, y) in n.lambda.iter().zip(&nt.lambda) {
        assert!(conj(x).sub(y).unwrap().l2_norm() < 1e-11 * x.l2_norm().max(1.0));
    }
    assert!(conj(&n.phi).sub(&nt.phi).unwrap().l2_norm() < 1e-11 * n.phi.l2_norm().max(1.0));
}

/// Ad(U) via a state transform of the zero potential.
fn gauge_transform_field(gm: &GaugeMap, x: &AlgebraField) -> AlgebraField {
    let mut s = GaugeState::zeros(x.algebra(), x.grid());
    s.phi = x.clone();
    gauge_transform(&s, gm).unwrap().phi
}

#[test]
fn identity_gauge_is_identity() {
    let (alg, g) = setup(8);
    let s = lorenz_state(&alg, &g, 5, 2, 0.7);
    let t = gauge_transform(&s, &GaugeMap::identity(&alg, &g)).unwrap();
    assert!(t.distance(&s).unwrap() < 1e-14 * s.l2_norm());
}

#[test]
fn pure_gauge_has_zero_curvature() {
    let (alg, g) = setup(16);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x = random_algebra_field(&alg, &g, 1, 0.03, &mut rng);
    let gm = GaugeMap::exp_of(&x, None);
    assert!(gm.group_residual() < 1e-12);
    let t = gauge_transform(&GaugeState::zeros(&alg, &g), &gm).unwrap();
    let f = curvature_from_potential(&t.a, &t.dta).unwrap();
    let rel = max_norm(&f) / max_norm(&t.a);
    assert!(rel < 1e-5, "{rel}");
    assert!(rel > 0.0);
}

#[test]
fn smooth_gauge_covariance_improves_with_resolution() {
    let err = |n: usize| {
        let (alg, g) = setup(n);
        let s = lorenz_state(&alg, &g, 5, 1, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = random_algebra_field(&alg, &g, 1, 0.03, &mut rng);
        let y = random_algebra_field(&alg, &g, 1, 0.03, &mut rng);
        let gm = GaugeMap::exp_of(&x, Some(&y));
        let t = gauge_transform(&s, &gm).unwrap();
        let ft = curvature_from_potential(&t.a, &t.dta).unwrap();
        let e = ft.iter().zip(&t.f).map(|(a, b)| a.sub(b).unwrap().l2_norm()).fold(0.0, f64::max);
        e / max_norm(&t.f)
    };
    let (e8, e16) = (err(8), err(16));
    assert!(e16 < 1e-3 * e8, "{e8} {e16}");
}

#[test]
fn curvature_matches_matrix_oracle() {
    let (alg, g) = setup(16);
    // band 2 keeps every product on the grid
    let pot = make_lorenz_potential(&alg, &g, 30, 2, 1.0);
    let a: [AlgebraField; 4] = std::array::from_fn(|i| pot[i].u.clone());
    let dta: [AlgebraField; 4] = std::array::from_fn(|i| pot[i].dt.clone());
    let f = curvature_from_potential(&a, &dta).unwrap();
    let d = |mu: usize, nu: usize| if mu == 0 { dta[nu].clone() } else { a[nu].partial(mu - 1).to_physical() };
    for idx in (0..10).map(|i| i * 409 % g.len()) {
        for (s, &(al, be)) in PAIRS.iter().enumerate() {
            let lin = d(al, be).element_at(idx).sub(&d(be, al).element_at(idx)).unwrap();
            let want = lin.add(&commutator(&a[al].element_at(idx), &a[be].element_at(idx)).unwrap()).unwrap();
            let got = f[s].element_at(idx);
            assert!(got.sub(&want).unwrap().norm() < 1e-11);
        }
    }
}

#[test]
fn covariant_derivative_cases() {
    let (alg, g) = setup(8);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let x = SpacetimeField::new(
        random_algebra_field(&alg, &g, 2, 1.0, &mut rng),
        random_algebra_field(&alg, &g, 2, 1.0, &mut rng),
    );
    let zero = AlgebraField::zeros(&alg, &g, Repr::Physical);
    for al in 0..4 {
        let d = covariant_derivative(&zero, &x, al).unwrap();
        assert!(d.sub(&x.d(al)).unwrap().l2_norm() < 1e-13);
    }
    // D_α X with A_α = X reduces to ∂_α X
    let d = covariant_derivative(&x.u, &x, 2).unwrap();
    assert!(d.sub(&x.d(2)).unwrap().l2_norm() < 1e-12);
    // constant X and constant A: pure bracket
    let c1 = AlgebraField::from_fn(&alg, &g, |_| vec![1.0, 0.0, 0.0]);
    let c2 = AlgebraField::from_fn(&alg, &g, |_| vec![0.0, 1.0, 0.0]);
    let d = covariant_derivative(&c1, &SpacetimeField::new(c2.clone(), zero.clone()), 1).unwrap();
    assert!(d.sub(&c1.bracket(&c2).unwrap()).unwrap().l2_norm() < 1e-13);
    assert!(d.l2_norm() > 0.1);
}

#[test]
fn wave_residual_second_order() {
    let alg = Arc::new(LieAlgebra::abelian(AlgebraKind::su(2)));
    let g = Grid::new(GridSpec::cube(8));
    let slice = |t: f64| {
        let mut s = GaugeState::zeros(&alg, &g);
        s.f[3] = AlgebraField::from_fn(&alg, &g, |x| vec![(x[0] + x[1] - 2f64.sqrt() * t).cos(), 0.0, 0.0]);
        s
    };
    let res = |h: f64| {
        let r = wave_residual_f(&slice(-h), &slice(0.0), &slice(h), h, 3.0).unwrap();
        r[3]
    };
    let (r1, r2) = (res(0.1), res(0.05));
    assert!((r1 / r2 - 4.0).abs() < 0.1, "{r1} {r2}");
}

#[test]
fn variant_difference_matches_pointwise_oracle() {
    let (alg, g) = setup(16);
    let s = lorenz_state(&alg, &g, 21, 1, 0.4);
    let p = nonlinearities_with(&s, 3.0, Terms::ALL, Variant::Printed).unwrap();
    let c = nonlinearities_with(&s, 3.0, Terms::ALL, Variant::Consistent).unwrap();
    for k in 0..6 {
        assert!(c.gamma[k].sub(&p.gamma[k]).unwrap().l2_norm() < 1e-13 * p.gamma[k].l2_norm());
    }
    assert!(c.phi.sub(&p.phi).unwrap().l2_norm() < 1e-13 * p.phi.l2_norm());
    let br = |x: &crate::algebra::AlgebraElement, y: &crate::algebra::AlgebraElement| commutator(x, y).unwrap();
    for be in 0..4 {
        let dphi = if be == 0 { s.dtphi.clone() } else { s.phi.partial(be - 1).to_physical() };
        let diff = c.lambda[be].sub(&p.lambda[be]).unwrap();
        let mut err: f64 = 0.0;
        for i in (0..g.len()).step_by(7) {
            let a: Vec<_> = (0..4).map(|al| s.a[al].element_at(i)).collect();
            let phi = s.phi.element_at(i);
            // Σ η^{αα} [A_α, [A_α, A_β]] + 2[φ, ∂_βφ] − 2[φ, [φ, A_β]]
            let mut want = br(&phi, &dphi.element_at(i)).scale(2.0);
            want = want.sub(&br(&phi, &br(&phi, &a[be])).scale(2.0)).unwrap();
            for al in 0..4 {
                want = want.add(&br(&a[al], &br(&a[al], &a[be])).scale(eta(al))).unwrap();
            }
            err = err.max(diff.element_at(i).sub(&want).unwrap().norm());
        }
        assert!(err < 1e-10, "{be} {err}");
    }
}

#[test]
fn recombination_holds_for_both_variants() {
    let (alg, g) = setup(16);
    let s = lorenz_state(&alg, &g, 22, 2, 0.5);
    for v in [Variant::Printed, Variant::Consistent] {
        assert!(recombination_residuals_with(&s, 3.0, v).unwrap().max() < 1e-10);
    }
    assert_eq!(Variant::parse(" Consistent").unwrap(), Variant::Consistent);
    assert!(Variant::parse("other").is_err());
}
