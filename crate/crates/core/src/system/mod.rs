//! The Yang–Mills–Higgs system in Lorenz gauge: state, curvature,
//! covariant derivative, nonlinearities and gauge maps.

mod gauge;
mod nonlinear;

use std::sync::Arc;

pub use gauge::{gauge_transform, GaugeMap};
pub(crate) use nonlinear::evaluate_spectral;
pub use nonlinear::{
    check_exponent, gamma, lambda, nonlinearities, nonlinearities_with, phi_rhs, recombination_residuals,
    recombination_residuals_with, split, split_with, Nonlinearity, RecombinationReport, Split, Terms, Variant,
};

use crate::algebra::LieAlgebra;
use crate::error::{Result, YmhError};
use crate::grid::{AlgebraField, Grid, Repr};
use crate::nullform::SpacetimeField;

/// Ordered index pairs (α, β), α < β, in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Storage slot and sign of F_{αβ}; `None` on the diagonal.
pub fn pair_index(alpha: usize, beta: usize) -> Option<(usize, f64)> {
    if alpha == beta {
        return None;
    }
    let (lo, hi, sign) = if alpha < beta { (alpha, beta, 1.0) } else { (beta, alpha, -1.0) };
    PAIRS.iter().position(|&p| p == (lo, hi)).map(|i| (i, sign))
}

/// Component names in snapshot manifest order.
pub const MANIFEST: [&str; 22] = [
    "A0", "A1", "A2", "A3", "dtA0", "dtA1", "dtA2", "dtA3", "F01", "F02", "F03", "F12", "F13", "F23", "dtF01", "dtF02",
    "dtF03", "dtF12", "dtF13", "dtF23", "phi", "dtphi",
];

/// (A_α, F_{αβ}, φ) with time derivatives.
#[derive(Clone, Debug)]
pub struct GaugeState {
    pub a: [AlgebraField; 4],
    pub dta: [AlgebraField; 4],
    pub f: [AlgebraField; 6],
    pub dtf: [AlgebraField; 6],
    pub phi: AlgebraField,
    pub dtphi: AlgebraField,
}

impl GaugeState {
    pub fn zeros(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>) -> Self {
        let z = AlgebraField::zeros(algebra, grid, Repr::Physical);
        Self {
            a: std::array::from_fn(|_| z.clone()),
            dta: std::array::from_fn(|_| z.clone()),
            f: std::array::from_fn(|_| z.clone()),
            dtf: std::array::from_fn(|_| z.clone()),
            phi: z.clone(),
            dtphi: z,
        }
    }

    /// Builds a state from the 22 fields in manifest order.
    pub fn from_fields(fields: Vec<AlgebraField>) -> Result<Self> {
        if fields.len() != MANIFEST.len() {
            return Err(YmhError::Format(format!("expected {} fields, got {}", MANIFEST.len(), fields.len())));
        }
        let kind = fields[0].algebra().kind();
        let spec = fields[0].grid().spec();
        for f in &fields {
            if f.algebra().kind() != kind {
                return Err(YmhError::KindMismatch(kind, f.algebra().kind()));
            }
            if f.grid().spec() != spec {
                return Err(YmhError::GridMismatch);
            }
        }
        let mut it = fields.into_iter();
        let mut take = || it.next().expect("length checked");
        let a = std::array::from_fn(|_| take());
        let dta = std::array::from_fn(|_| take());
        let f = std::array::from_fn(|_| take());
        let dtf = std::array::from_fn(|_| take());
        let phi = take();
        let dtphi = take();
        Ok(Self { a, dta, f, dtf, phi, dtphi })
    }

    /// The 22 fields in manifest order.
    pub fn fields(&self) -> Vec<&AlgebraField> {
        self.a.iter().chain(&self.dta).chain(&self.f).chain(&self.dtf).chain([&self.phi, &self.dtphi]).collect()
    }

    fn map(&self, g: impl Fn(&AlgebraField) -> AlgebraField) -> Self {
        Self {
            a: std::array::from_fn(|i| g(&self.a[i])),
            dta: std::array::from_fn(|i| g(&self.dta[i])),
            f: std::array::from_fn(|i| g(&self.f[i])),
            dtf: std::array::from_fn(|i| g(&self.dtf[i])),
            phi: g(&self.phi),
            dtphi: g(&self.dtphi),
        }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        self.phi.algebra()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.phi.grid()
    }

    pub fn to_physical(&self) -> Self {
        self.map(|f| f.to_physical())
    }

    pub fn to_spectral(&self) -> Self {
        self.map(|f| f.to_spectral())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|f| f.scale(c))
    }

    /// F_{αβ} with the antisymmetry sign; `None` for α = β.
    pub fn f_comp(&self, alpha: usize, beta: usize) -> Option<(&AlgebraField, f64)> {
        pair_index(alpha, beta).map(|(i, s)| (&self.f[i], s))
    }

    /// Same as [`Self::f_comp`] for ∂_t F_{αβ}.
    pub fn dtf_comp(&self, alpha: usize, beta: usize) -> Option<(&AlgebraField, f64)> {
        pair_index(alpha, beta).map(|(i, s)| (&self.dtf[i], s))
    }

    pub fn potential(&self) -> [SpacetimeField<AlgebraField>; 4] {
        std::array::from_fn(|i| SpacetimeField::new(self.a[i].clone(), self.dta[i].clone()))
    }

    pub fn higgs(&self) -> SpacetimeField<AlgebraField> {
        SpacetimeField::new(self.phi.clone(), self.dtphi.clone())
    }

    pub fn curvature(&self, slot: usize) -> SpacetimeField<AlgebraField> {
        SpacetimeField::new(self.f[slot].clone(), self.dtf[slot].clone())
    }

    /// sqrt of the summed squared L² norms of all 22 fields.
    pub fn l2_norm(&self) -> f64 {
        self.fields().iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// L² distance over all 22 fields.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let mut s = 0.0;
        for (x, y) in self.fields().into_iter().zip(other.fields()) {
            s += x.sub(y)?.l2_norm().powi(2);
        }
        Ok(s.sqrt())
    }
}

/// F_{αβ} = ∂_αA_β − ∂_βA_α + [A_α, A_β], with ∂₀ from `dta`.
pub fn curvature_from_potential(a: &[AlgebraField; 4], dta: &[AlgebraField; 4]) -> Result<[AlgebraField; 6]> {
    let d = |mu: usize, nu: usize| if mu == 0 { dta[nu].clone() } else { a[nu].partial(mu - 1) };
    let mut out = Vec::with_capacity(6);
    for &(al, be) in &PAIRS {
        let mut f = d(al, be).sub(&d(be, al))?;
        f.axpy(1.0, &a[al].bracket(&a[be])?)?;
        out.push(f.to_physical());
    }
    Ok(out.try_into().expect("six pairs"))
}

/// ∂_α X + [A_α, X].
pub fn covariant_derivative(
    a_alpha: &AlgebraField,
    x: &SpacetimeField<AlgebraField>,
    alpha: usize,
) -> Result<AlgebraField> {
    let mut out = x.d(alpha).to_physical();
    out.axpy(1.0, &a_alpha.bracket(&x.u)?)?;
    Ok(out)
}

/// ‖□F_{βγ} − Γ_{βγ}‖ per component from three slices spaced by `h`,
/// with ∂_t² by the central second difference and Δ spectral.
pub fn wave_residual_f(prev: &GaugeState, mid: &GaugeState, next: &GaugeState, h: f64, p: f64) -> Result<[f64; 6]> {
    let g = gamma(mid, p)?;
    let mut out = [0.0; 6];
    for s in 0..6 {
        let mut dtt = next.f[s].sub(&mid.f[s].scale(2.0))?;
        dtt.axpy(1.0, &prev.f[s])?;
        let mut box_f = dtt.scale(-1.0 / (h * h));
        for j in 0..3 {
            box_f.axpy(1.0, &mid.f[s].partial(j).partial(j))?;
        }
        out[s] = box_f.sub(&g[s])?.l2_norm();
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
