//! Gauge maps U(t, x) and their action on states.

use std::sync::Arc;

use crate::algebra::{expm, unitarity_residual, CMatrix, LieAlgebra};
use crate::error::{Result, YmhError};
use crate::grid::{AlgebraField, Grid, Repr, ScalarField, C64};

use super::GaugeState;

/// U = exp(X) pointwise, with ∂_t U = U Y for a time-independent Y.
#[derive(Clone, Debug)]
pub struct GaugeMap {
    algebra: Arc<LieAlgebra>,
    grid: Arc<Grid>,
    u: Vec<CMatrix>,
    y: Option<AlgebraField>,
}

impl GaugeMap {
    pub fn identity(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>) -> Self {
        let n = algebra.kind().n;
        Self::constant(algebra, grid, CMatrix::identity(n, n))
    }

    pub fn constant(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>, u: CMatrix) -> Self {
        Self { algebra: algebra.clone(), grid: grid.clone(), u: vec![u; grid.len()], y: None }
    }

    /// U = exp(X(x)) and ∂_t U = U·Y(x).
    pub fn exp_of(x: &AlgebraField, y: Option<&AlgebraField>) -> Self {
        let alg = x.algebra().clone();
        let grid = x.grid().clone();
        let xr = x.real_components();
        let u = (0..grid.len())
            .map(|i| {
                let c: Vec<f64> = xr.iter().map(|comp| comp[i]).collect();
                expm(alg.element(&c).entries())
            })
            .collect();
        Self { algebra: alg, grid, u, y: y.map(|f| f.to_physical()) }
    }

    pub fn u_at(&self, idx: usize) -> &CMatrix {
        &self.u[idx]
    }

    /// max over points of ‖U U* − I‖ and |det U − 1|.
    pub fn group_residual(&self) -> f64 {
        self.u
            .iter()
            .map(|u| unitarity_residual(u).max((u.determinant() - C64::new(1.0, 0.0)).norm()))
            .fold(0.0, f64::max)
    }

    /// (∂_j U) U⁻¹ as an algebra field, with ∂_j spectral.
    fn maurer_cartan(&self, j: usize) -> AlgebraField {
        let n = self.algebra.kind().n;
        let len = self.grid.len();
        let mut du: Vec<Vec<C64>> = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let e = ScalarField::new(&self.grid, Repr::Physical, self.u.iter().map(|m| m[(r, c)]).collect());
                du.push(e.partial(j).into_data());
            }
        }
        let d = self.algebra.dim();
        let mut comps = vec![vec![0.0; len]; d];
        for i in 0..len {
            let dm = CMatrix::from_fn(n, n, |r, c| du[r * n + c][i]);
            let m = dm * self.u[i].adjoint();
            for (a, e) in self.algebra.basis().iter().enumerate() {
                comps[a][i] = m.iter().zip(e.iter()).map(|(x, y)| (x * y.conj()).re).sum();
            }
        }
        AlgebraField::from_real(&self.algebra, &self.grid, &comps)
    }

    /// Pointwise Ad(U) applied to real coefficient arrays.
    fn conjugate(&self, x: &AlgebraField) -> AlgebraField {
        let xr = x.real_components();
        let d = self.algebra.dim();
        let len = self.grid.len();
        let mut out = vec![vec![0.0; len]; d];
        let mut cache: Option<(usize, Vec<Vec<f64>>)> = None;
        for i in 0..len {
            let same = i > 0 && self.u[i] == self.u[i - 1];
            if !same || cache.is_none() {
                cache = Some((i, self.algebra.adjoint_action(&self.u[i])));
            }
            let ad = &cache.as_ref().expect("set above").1;
            for k in 0..d {
                out[k][i] = (0..d).map(|a| ad[k][a] * xr[a][i]).sum();
            }
        }
        AlgebraField::from_real(&self.algebra, &self.grid, &out)
    }

    /// X + [Y, X] pointwise (no dealias), or X when Y is absent.
    fn with_rotation(&self, dx: &AlgebraField, x: &AlgebraField) -> AlgebraField {
        let Some(y) = &self.y else {
            return dx.to_physical();
        };
        let yr = y.real_components();
        let xr = x.real_components();
        let mut out = dx.real_components();
        for i in 0..self.grid.len() {
            let yc: Vec<f64> = yr.iter().map(|c| c[i]).collect();
            let xc: Vec<f64> = xr.iter().map(|c| c[i]).collect();
            for (k, v) in self.algebra.bracket(&yc, &xc).into_iter().enumerate() {
                out[k][i] += v;
            }
        }
        AlgebraField::from_real(&self.algebra, &self.grid, &out)
    }
}

/// A′ = U A U⁻¹ − (∂U)U⁻¹, F′ = U F U⁻¹, φ′ = U φ U⁻¹, with time
/// derivatives from ∂_t U = U Y.
pub fn gauge_transform(state: &GaugeState, g: &GaugeMap) -> Result<GaugeState> {
    if state.algebra().kind() != g.algebra.kind() {
        return Err(YmhError::KindMismatch(state.algebra().kind(), g.algebra.kind()));
    }
    if !state.grid().same(&g.grid) {
        return Err(YmhError::GridMismatch);
    }
    let zero = AlgebraField::zeros(&g.algebra, &g.grid, Repr::Physical);
    let y = g.y.clone().unwrap_or_else(|| zero.clone());

    let mut a = Vec::with_capacity(4);
    let mut dta = Vec::with_capacity(4);
    for al in 0..4 {
        let mut ap = g.conjugate(&state.a[al]);
        let mut dap = g.conjugate(&g.with_rotation(&state.dta[al], &state.a[al]));
        if al == 0 {
            ap.axpy(-1.0, &g.conjugate(&y))?;
        } else if g.y.is_some() || !is_constant(g) {
            ap.axpy(-1.0, &g.maurer_cartan(al - 1))?;
            dap.axpy(-1.0, &g.conjugate(&y.partial(al - 1)))?;
        }
        a.push(ap);
        dta.push(dap);
    }
    let f: Vec<AlgebraField> = state.f.iter().map(|x| g.conjugate(x)).collect();
    let dtf: Vec<AlgebraField> =
        state.dtf.iter().zip(&state.f).map(|(dx, x)| g.conjugate(&g.with_rotation(dx, x))).collect();
    Ok(GaugeState {
        a: a.try_into().expect("four"),
        dta: dta.try_into().expect("four"),
        f: f.try_into().expect("six"),
        dtf: dtf.try_into().expect("six"),
        phi: g.conjugate(&state.phi),
        dtphi: g.conjugate(&g.with_rotation(&state.dtphi, &state.phi)),
    })
}

fn is_constant(g: &GaugeMap) -> bool {
    g.u.windows(2).all(|w| w[0] == w[1])
}
