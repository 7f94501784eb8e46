//! Cauchy data: the induced curvature data, constraints, the data norm and
//! generators for constrained and Lorenz test inputs.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::LieAlgebra;
use crate::error::Result;
use crate::grid::{AlgebraField, Grid, Repr};
use crate::nullform::{random_algebra_field, SpacetimeField};
use crate::system::{check_exponent, curvature_from_potential, GaugeState, Variant, PAIRS};

/// (a, ȧ, φ₀, φ₁) at t = 0.
#[derive(Clone, Debug)]
pub struct CauchyData {
    pub a: [AlgebraField; 4],
    pub dota: [AlgebraField; 4],
    pub phi0: AlgebraField,
    pub phi1: AlgebraField,
    pub p: f64,
}

impl CauchyData {
    pub fn zeros(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>, p: f64) -> Self {
        let z = AlgebraField::zeros(algebra, grid, Repr::Physical);
        Self {
            a: std::array::from_fn(|_| z.clone()),
            dota: std::array::from_fn(|_| z.clone()),
            phi0: z.clone(),
            phi1: z,
            p,
        }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        self.phi0.algebra()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.phi0.grid()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            a: std::array::from_fn(|i| self.a[i].scale(c)),
            dota: std::array::from_fn(|i| self.dota[i].scale(c)),
            phi0: self.phi0.scale(c),
            phi1: self.phi1.scale(c),
            p: self.p,
        }
    }

    /// The 10 fields in manifest order a₀..a₃, ȧ₀..ȧ₃, φ₀, φ₁.
    pub fn fields(&self) -> Vec<&AlgebraField> {
        self.a.iter().chain(&self.dota).chain([&self.phi0, &self.phi1]).collect()
    }
}

pub const DATA_MANIFEST: [&str; 10] = ["a0", "a1", "a2", "a3", "dota0", "dota1", "dota2", "dota3", "phi0", "phi1"];

/// Sets ȧ₀ = ∂^i a_i.
pub fn finalize_lorenz(d: &CauchyData) -> CauchyData {
    let mut out = d.clone();
    out.dota[0] = divergence(&d.a);
    out
}

fn divergence(a: &[AlgebraField; 4]) -> AlgebraField {
    let mut div = a[1].partial(0).to_physical();
    div.axpy(1.0, &a[2].partial(1)).expect("same grid");
    div.axpy(1.0, &a[3].partial(2)).expect("same grid");
    div
}

/// ‖ȧ₀ − ∂^i a_i‖_{L²}.
pub fn lorenz_data_residual(d: &CauchyData) -> f64 {
    d.dota[0].sub(&divergence(&d.a)).map(|r| r.l2_norm()).unwrap_or(f64::NAN)
}

/// (f, ḟ) in [`PAIRS`] order, from the four printed formulas.
pub fn build_f_data(d: &CauchyData) -> Result<([AlgebraField; 6], [AlgebraField; 6])> {
    let a = &d.a;
    let ad = &d.dota;
    let mut f: Vec<AlgebraField> = Vec::with_capacity(6);
    for &(al, be) in &PAIRS {
        let v = if al == 0 {
            // f_0i = ȧ_i − ∂_i a_0 + [a_0, a_i]
            let i = be;
            let mut v = ad[i].sub(&a[0].partial(i - 1))?;
            v.axpy(1.0, &a[0].bracket(&a[i])?)?;
            v
        } else {
            // f_ij = ∂_i a_j − ∂_j a_i + [a_i, a_j]
            let (i, j) = (al, be);
            let mut v = a[j].partial(i - 1).sub(&a[i].partial(j - 1))?;
            v.axpy(1.0, &a[i].bracket(&a[j])?)?;
            v
        };
        f.push(v.to_physical());
    }
    let fc = |al: usize, be: usize| -> Option<AlgebraField> {
        crate::system::pair_index(al, be).map(|(s, sign)| f[s].scale(sign))
    };

    let mut fdot: Vec<AlgebraField> = Vec::with_capacity(6);
    for &(al, be) in &PAIRS {
        let v = if al == 0 {
            // ḟ_0i = ∂^j f_ji + [a^α, f_αi] + [∂_iφ₀, φ₀] + [[a_i, φ₀], φ₀]
            let i = be;
            let mut v = AlgebraField::zeros(d.algebra(), d.grid(), Repr::Physical);
            for j in 1..4 {
                if let Some(fji) = fc(j, i) {
                    v.axpy(1.0, &fji.partial(j - 1))?;
                    v.axpy(1.0, &a[j].bracket(&fji)?)?;
                }
            }
            let f0i = fc(0, i).expect("0 ≠ i");
            v.axpy(-1.0, &a[0].bracket(&f0i)?)?;
            v.axpy(1.0, &d.phi0.partial(i - 1).bracket(&d.phi0)?)?;
            v.axpy(1.0, &a[i].bracket(&d.phi0)?.bracket(&d.phi0)?)?;
            v
        } else {
            // ḟ_ij = ∂_i ȧ_j − ∂_j ȧ_i + [ȧ_i, a_j] + [a_i, ȧ_j]
            let (i, j) = (al, be);
            let mut v = ad[j].partial(i - 1).sub(&ad[i].partial(j - 1))?;
            v.axpy(1.0, &ad[i].bracket(&a[j])?)?;
            v.axpy(1.0, &a[i].bracket(&ad[j])?)?;
            v
        };
        fdot.push(v.to_physical());
    }
    Ok((f.try_into().expect("six"), fdot.try_into().expect("six")))
}

/// ‖∂^i f_{i0} + [a^i, f_{i0}] − [φ₁, φ₀] − [[a₀, φ₀], φ₀]‖_{L²}.
pub fn gauss_residual(d: &CauchyData, f: &[AlgebraField; 6]) -> Result<f64> {
    gauss_residual_with(d, f, Variant::Printed)
}

/// The Gauss residual with the Higgs current signed as in `variant`.
pub fn gauss_residual_with(d: &CauchyData, f: &[AlgebraField; 6], variant: Variant) -> Result<f64> {
    let h = variant.higgs_sign();
    let mut r = AlgebraField::zeros(d.algebra(), d.grid(), Repr::Physical);
    for i in 1..4 {
        let fi0 = f[i - 1].scale(-1.0);
        r.axpy(1.0, &fi0.partial(i - 1))?;
        r.axpy(1.0, &d.a[i].bracket(&fi0)?)?;
    }
    r.axpy(-h, &d.phi1.bracket(&d.phi0)?)?;
    r.axpy(-h, &d.a[0].bracket(&d.phi0)?.bracket(&d.phi0)?)?;
    Ok(r.l2_norm())
}

fn tuple_norm(fields: &[AlgebraField], s: f64) -> f64 {
    fields.iter().map(|f| f.sobolev_norm(s).powi(2)).sum::<f64>().sqrt()
}

/// 𝒟₀ = ‖a‖_{H¹} + ‖ȧ‖_{L²} + ‖φ₀‖_{H¹} + ‖φ₁‖_{L²}.
pub fn data_norm(d: &CauchyData) -> f64 {
    tuple_norm(&d.a, 1.0) + tuple_norm(&d.dota, 0.0) + d.phi0.sobolev_norm(1.0) + d.phi1.l2_norm()
}

/// Ratios of the curvature-data bounds with the constants dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FBoundRatios {
    /// ‖f‖ / ((1+‖a‖_{H¹})² ‖ȧ‖)
    pub f_printed: f64,
    /// ‖f‖ / ((1+‖a‖_{H¹})² (‖a‖_{H¹} + ‖ȧ‖))
    pub f_corrected: f64,
    /// ‖ḟ‖_{H⁻¹} / ((1+‖a‖_{H¹})³ (‖ȧ‖ + ‖φ₀‖²_{H¹}))
    pub fdot_printed: f64,
    /// ‖ḟ‖_{H⁻¹} / ((1+‖a‖_{H¹})³ (‖a‖_{H¹} + ‖ȧ‖ + ‖φ₀‖²_{H¹}))
    pub fdot_corrected: f64,
}

impl FBoundRatios {
    pub fn max(&self, other: &Self) -> Self {
        Self {
            f_printed: self.f_printed.max(other.f_printed),
            f_corrected: self.f_corrected.max(other.f_corrected),
            fdot_printed: self.fdot_printed.max(other.fdot_printed),
            fdot_corrected: self.fdot_corrected.max(other.fdot_corrected),
        }
    }
}

/// 0/0 is reported as 0; x/0 with x > 0 as +∞.
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn check_f_bounds(d: &CauchyData, f: &[AlgebraField; 6], fdot: &[AlgebraField; 6]) -> FBoundRatios {
    let a1 = tuple_norm(&d.a, 1.0);
    let ad = tuple_norm(&d.dota, 0.0);
    let p0 = d.phi0.sobolev_norm(1.0);
    let nf = tuple_norm(f, 0.0);
    let nfd = tuple_norm(fdot, -1.0);
    let w = 1.0 + a1;
    FBoundRatios {
        f_printed: ratio(nf, w * w * ad),
        f_corrected: ratio(nf, w * w * (a1 + ad)),
        fdot_printed: ratio(nfd, w.powi(3) * (ad + p0 * p0)),
        fdot_corrected: ratio(nfd, w.powi(3) * (a1 + ad + p0 * p0)),
    }
}

/// Random band-limited (A_α, ∂_t A_α) with ∂_t A₀ = ∂^i A_i exactly and
/// no zero mode.
pub fn make_lorenz_potential(
    algebra: &Arc<LieAlgebra>,
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
    amplitude: f64,
) -> [SpacetimeField<AlgebraField>; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: [AlgebraField; 4] = std::array::from_fn(|_| random_algebra_field(algebra, grid, band, amplitude, &mut rng));
    let mut dt: [AlgebraField; 4] =
        std::array::from_fn(|_| random_algebra_field(algebra, grid, band, amplitude, &mut rng));
    dt[0] = divergence(&a);
    std::array::from_fn(|i| SpacetimeField::new(a[i].clone(), dt[i].clone()))
}

/// Random data with all fields band-limited; Lorenz-finalized, Gauss
/// generally violated.
pub fn random_data(
    algebra: &Arc<LieAlgebra>,
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
    amplitude: f64,
    p: f64,
) -> Result<CauchyData> {
    check_exponent(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || random_algebra_field(algebra, grid, band, amplitude, &mut rng);
    let a = std::array::from_fn(|_| draw());
    let dota = std::array::from_fn(|_| draw());
    let phi0 = draw();
    let phi1 = draw();
    Ok(finalize_lorenz(&CauchyData { a, dota, phi0, phi1, p }))
}

/// Which Higgs data to put into [`constrained_data`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HiggsData {
    /// φ₀ = φ₁ = 0: the pure Yang–Mills sector
    None,
    /// φ₀ = 0 and random φ₁
    Velocity,
}

/// Data satisfying both constraints exactly: a₀ = 0, ȧ_i = 0, random
/// spatial a_i, φ₀ = 0, ȧ₀ = ∂^i a_i.
///
/// With f_{0i} = 0 and φ₀ = 0 both sides of the Gauss constraint vanish.
pub fn constrained_data(
    algebra: &Arc<LieAlgebra>,
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
    amplitude: f64,
    p: f64,
    higgs: HiggsData,
) -> Result<CauchyData> {
    check_exponent(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = CauchyData::zeros(algebra, grid, p);
    for i in 1..4 {
        d.a[i] = random_algebra_field(algebra, grid, band, amplitude, &mut rng);
    }
    if higgs == HiggsData::Velocity {
        d.phi1 = random_algebra_field(algebra, grid, band, amplitude, &mut rng);
    }
    Ok(finalize_lorenz(&d))
}

/// Lorenz potential with its exact curvature, plus random ∂_t F and Higgs
/// fields: a state on which the split identities hold exactly.
pub fn lorenz_state(
    algebra: &Arc<LieAlgebra>,
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
    amplitude: f64,
) -> Result<GaugeState> {
    let pot = make_lorenz_potential(algebra, grid, seed, band, amplitude);
    let a: [AlgebraField; 4] = std::array::from_fn(|i| pot[i].u.clone());
    let dta: [AlgebraField; 4] = std::array::from_fn(|i| pot[i].dt.clone());
    let f = curvature_from_potential(&a, &dta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let dtf = std::array::from_fn(|_| random_algebra_field(algebra, grid, band, amplitude, &mut rng));
    let phi = random_algebra_field(algebra, grid, band, amplitude, &mut rng);
    let dtphi = random_algebra_field(algebra, grid, band, amplitude, &mut rng);
    Ok(GaugeState { a, dta, f, dtf, phi, dtphi })
}

/// The full second-order state at t = 0.
pub fn to_gauge_state(d: &CauchyData) -> Result<GaugeState> {
    let (f, fdot) = build_f_data(d)?;
    Ok(GaugeState {
        a: d.a.clone().map(|x| x.to_physical()),
        dta: d.dota.clone().map(|x| x.to_physical()),
        f,
        dtf: fdot,
        phi: d.phi0.to_physical(),
        dtphi: d.phi1.to_physical(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraKind;
    use crate::grid::GridSpec;
    use crate::system::curvature_from_potential;
    use proptest::prelude::*;

    fn setup(n: usize) -> (Arc<LieAlgebra>, Arc<Grid>) {
        (Arc::new(LieAlgebra::new(AlgebraKind::su(2))), Grid::new(GridSpec::cube(n)))
    }

    #[test]
    fn zero_data() {
        let (alg, g) = setup(8);
        let d = CauchyData::zeros(&alg, &g, 3.0);
        let (f, fd) = build_f_data(&d).unwrap();
        assert!(f.iter().chain(&fd).all(|x| x.l2_norm() == 0.0));
        assert_eq!(gauss_residual(&d, &f).unwrap(), 0.0);
        assert_eq!(data_norm(&d), 0.0);
        assert_eq!(check_f_bounds(&d, &f, &fd), FBoundRatios::default());
        assert_eq!(lorenz_data_residual(&finalize_lorenz(&d)), 0.0);
    }

    #[test]
    fn f_matches_curvature() {
        let (alg, g) = setup(16);
        let d = random_data(&alg, &g, 4, 3, 0.5, 3.0).unwrap();
        let (f, _) = build_f_data(&d).unwrap();
        let c = curvature_from_potential(&d.a, &d.dota).unwrap();
        for (x, y) in f.iter().zip(&c) {
            assert!(x.sub(y).unwrap().l2_norm() < 1e-12);
        }
    }

    #[test]
    fn abelian_single_mode_curl() {
        let alg = Arc::new(LieAlgebra::abelian(AlgebraKind::su(2)));
        let g = Grid::new(GridSpec::cube(8));
        let mut d = CauchyData::zeros(&alg, &g, 3.0);
        d.a[2] = AlgebraField::from_fn(&alg, &g, |x| vec![x[0].sin(), 0.0, 0.0]);
        let (f, _) = build_f_data(&d).unwrap();
        // f_12 = ∂_1 a_2 = cos x₁ e_1
        let want = AlgebraField::from_fn(&alg, &g, |x| vec![x[0].cos(), 0.0, 0.0]);
        assert!(f[3].sub(&want).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn finalize_is_idempotent_and_local() {
        let (alg, g) = setup(8);
        let d = random_data(&alg, &g, 1, 2, 1.0, 3.0).unwrap();
        assert!(lorenz_data_residual(&d) < 1e-13);
        let again = finalize_lorenz(&d);
        assert!(again.dota[0].sub(&d.dota[0]).unwrap().l2_norm() < 1e-15);
        for i in 0..4 {
            assert_eq!(again.a[i].l2_norm(), d.a[i].l2_norm());
        }
    }

    #[test]
    fn constrained_data_satisfies_gauss() {
        let (alg, g) = setup(16);
        for higgs in [HiggsData::None, HiggsData::Velocity] {
            let d = constrained_data(&alg, &g, 7, 3, 0.4, 3.0, higgs).unwrap();
            let (f, _) = build_f_data(&d).unwrap();
            assert!(gauss_residual(&d, &f).unwrap() < 1e-10);
        }
        let d = random_data(&alg, &g, 7, 3, 0.4, 3.0).unwrap();
        let (f, _) = build_f_data(&d).unwrap();
        assert!(gauss_residual(&d, &f).unwrap() > 1e-3);
    }

    #[test]
    fn abelian_pure_gauge_satisfies_gauss() {
        let alg = Arc::new(LieAlgebra::abelian(AlgebraKind::su(2)));
        let g = Grid::new(GridSpec::cube(8));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let chi = random_algebra_field(&alg, &g, 2, 1.0, &mut rng);
        let chi_t = random_algebra_field(&alg, &g, 2, 1.0, &mut rng);
        let mut d = CauchyData::zeros(&alg, &g, 3.0);
        d.a[0] = chi_t.clone();
        for i in 1..4 {
            d.a[i] = chi.partial(i - 1);
            d.dota[i] = chi_t.partial(i - 1);
        }
        let (f, _) = build_f_data(&d).unwrap();
        assert!(gauss_residual(&d, &f).unwrap() < 1e-12);
        assert!(f.iter().all(|x| x.l2_norm() < 1e-12));
    }

    #[test]
    fn data_norm_single_mode() {
        let (alg, g) = setup(8);
        let mut d = CauchyData::zeros(&alg, &g, 3.0);
        d.a[1] = AlgebraField::from_fn(&alg, &g, |x| vec![0.0, (2.0 * x[2]).cos(), 0.0]);
        let l2 = d.a[1].l2_norm();
        assert!((data_norm(&d) - 5f64.sqrt() * l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn pure_velocity_bound() {
        let (alg, g) = setup(8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut d = CauchyData::zeros(&alg, &g, 3.0);
        for i in 1..4 {
            d.dota[i] = random_algebra_field(&alg, &g, 2, 1.0, &mut rng);
        }
        let (f, fd) = build_f_data(&d).unwrap();
        let r = check_f_bounds(&d, &f, &fd);
        assert!((r.f_printed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lorenz_potential_contract() {
        let (alg, g) = setup(8);
        let a = make_lorenz_potential(&alg, &g, 5, 2, 0.0);
        assert!(a.iter().all(|x| x.u.l2_norm() == 0.0 && x.dt.l2_norm() == 0.0));
        let a = make_lorenz_potential(&alg, &g, 5, 2, 1.0);
        let b = make_lorenz_potential(&alg, &g, 5, 2, 1.0);
        let mut div = a[1].u.partial(0);
        div.axpy(1.0, &a[2].u.partial(1)).unwrap();
        div.axpy(1.0, &a[3].u.partial(2)).unwrap();
        assert!(a[0].dt.sub(&div).unwrap().l2_norm() < 1e-13);
        assert_eq!(a[2].u.l2_norm(), b[2].u.l2_norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn data_norm_homogeneous(seed in any::<u64>(), c in 0.0f64..10.0) {
            let (alg, g) = setup(8);
            let d = random_data(&alg, &g, seed, 2, 1.0, 3.0).unwrap();
            let n1 = data_norm(&d);
            prop_assert!((data_norm(&d.scale(c)) - c * n1).abs() <= 1e-12 * n1.max(1.0) * c.max(1.0));
        }
    }
}
