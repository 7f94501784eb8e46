//! Energy, constraint residuals, gauge equivariance of the evolution and
//! convergence fits.

use crate::algebra::CMatrix;
use crate::data::{gauss_residual_with as data_gauss, CauchyData};
use crate::error::{Result, YmhError};
use crate::evolve::{from_half_wave, to_half_wave, EvolveConfig, Evolver, HalfWaveState};
use crate::grid::{AlgebraField, C64};
use crate::system::{check_exponent, curvature_from_potential, gauge_transform, GaugeMap, GaugeState, Variant};

/// ℰ = ∫ Σ_{α<β}|F_{αβ}|² + Σ_α |D_αφ|² + |φ|^{p+1}/(p+1), by the
/// rectangle rule on the grid. D_αφ = ∂_αφ + [A_α, φ] pointwise.
pub fn energy(state: &GaugeState, p: f64) -> Result<f64> {
    weighted_energy(state, p, 1.0)
}

/// ∫ Σ_{α<β}|F_{αβ}|² + Σ_α |D_αφ|² + 2|φ|^{p+1}/(p+1), twice the
/// Hamiltonian of [`Variant::Consistent`]. Equal to ℰ when φ = 0.
pub fn conserved_energy(state: &GaugeState, p: f64) -> Result<f64> {
    weighted_energy(state, p, 2.0)
}

fn weighted_energy(state: &GaugeState, p: f64, potential_weight: f64) -> Result<f64> {
    check_exponent(p)?;
    let alg = state.algebra();
    let grid = state.grid();
    let n = grid.len();
    let d = alg.dim();
    let mut density = vec![0.0; n];

    for f in &state.f {
        for c in f.real_components() {
            density.iter_mut().zip(&c).for_each(|(e, v)| *e += v * v);
        }
    }
    let phi = state.phi.real_components();
    for al in 0..4 {
        let dphi = if al == 0 { state.dtphi.to_physical() } else { state.phi.partial(al - 1).to_physical() };
        let dphi = dphi.real_components();
        let a = state.a[al].real_components();
        for i in 0..n {
            let ai: Vec<f64> = a.iter().map(|c| c[i]).collect();
            let pi: Vec<f64> = phi.iter().map(|c| c[i]).collect();
            let br = alg.bracket(&ai, &pi);
            density[i] += (0..d).map(|k| (dphi[k][i] + br[k]).powi(2)).sum::<f64>();
        }
    }
    for (i, e) in density.iter_mut().enumerate() {
        let r2: f64 = phi.iter().map(|c| c[i] * c[i]).sum();
        *e += potential_weight * r2.sqrt().powf(p + 1.0) / (p + 1.0);
    }
    Ok(density.iter().sum::<f64>() * grid.volume() / n as f64)
}

/// max_t |ℰ(t) − ℰ(0)| / ℰ(0); zero when every ℰ vanishes.
pub fn conservation_drift(energies: &[f64]) -> f64 {
    let Some(&e0) = energies.first() else {
        return 0.0;
    };
    let worst = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    if worst == 0.0 {
        0.0
    } else {
        worst / e0.abs()
    }
}

/// Drift report of a trajectory.
pub fn conservation_check(trajectory: &[GaugeState], p: f64) -> Result<f64> {
    let e = trajectory.iter().map(|s| energy(s, p)).collect::<Result<Vec<_>>>()?;
    Ok(conservation_drift(&e))
}

/// ‖−∂_tA₀ + ∂^iA_i‖_{L²}.
pub fn lorenz_residual(state: &GaugeState) -> Result<f64> {
    let mut r = state.dta[0].scale(-1.0).to_physical();
    for i in 1..4 {
        r.axpy(1.0, &state.a[i].partial(i - 1))?;
    }
    Ok(r.l2_norm())
}

/// (Σ_{α<β} ‖F_{αβ} − F^{(A)}_{αβ}‖²_{L²})^{1/2}.
pub fn compatibility_residual(state: &GaugeState) -> Result<f64> {
    let fa = curvature_from_potential(&state.a, &state.dta)?;
    let mut s = 0.0;
    for (x, y) in state.f.iter().zip(&fa) {
        s += x.sub(y)?.l2_norm().powi(2);
    }
    Ok(s.sqrt())
}

/// The Gauss constraint at time t, with (A, ∂_tA, φ, ∂_tφ) in place of the
/// data and the evolved F.
pub fn gauss_residual(state: &GaugeState, p: f64, variant: Variant) -> Result<f64> {
    let d = CauchyData {
        a: state.a.clone(),
        dota: state.dta.clone(),
        phi0: state.phi.clone(),
        phi1: state.dtphi.clone(),
        p,
    };
    data_gauss(&d, &state.f, variant)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticSeries {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub conserved: Vec<f64>,
    pub lorenz_residual: Vec<f64>,
    pub compat_residual: Vec<f64>,
    pub gauss_residual: Vec<f64>,
}

impl DiagnosticSeries {
    pub fn push(&mut self, t: f64, state: &GaugeState, p: f64, variant: Variant) -> Result<()> {
        if self.times.last().is_some_and(|&last| t <= last) {
            return Err(YmhError::Parameter(format!("time {t} does not increase")));
        }
        self.times.push(t);
        self.energy.push(energy(state, p)?);
        self.conserved.push(conserved_energy(state, p)?);
        self.lorenz_residual.push(lorenz_residual(state)?);
        self.compat_residual.push(compatibility_residual(state)?);
        self.gauss_residual.push(gauss_residual(state, p, variant)?);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn drift(&self) -> f64 {
        conservation_drift(&self.energy)
    }

    pub fn conserved_drift(&self) -> f64 {
        conservation_drift(&self.conserved)
    }

    pub fn max_lorenz(&self) -> f64 {
        self.lorenz_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_compat(&self) -> f64 {
        self.compat_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_gauss(&self) -> f64 {
        self.gauss_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolves and records diagnostics every `stride` steps (and at T).
pub fn run_with_diagnostics(
    ev: &Evolver,
    initial: &GaugeState,
    cfg: &EvolveConfig,
    stride: usize,
) -> Result<(HalfWaveState, DiagnosticSeries)> {
    let stride = stride.max(1);
    let last = cfg.steps();
    let mut series = DiagnosticSeries::default();
    let h0 = to_half_wave(initial);
    let end = ev.evolve_with(&h0, cfg, |k, h| {
        if k % stride == 0 || k == last {
            series.push(h.time, &from_half_wave(h), ev.p, ev.variant)?;
        }
        Ok(())
    })?;
    Ok((end, series))
}

/// Pointwise-constant Ad(U) applied to every spectrum of a half-wave state.
pub fn conjugate_half_wave(h: &HalfWaveState, u: &CMatrix) -> HalfWaveState {
    let ad = h.algebra().adjoint_action(u);
    let mut out = h.clone();
    for (dst, src) in out.plus.iter_mut().zip(&h.plus).chain(out.minus.iter_mut().zip(&h.minus)) {
        for (k, row) in ad.iter().enumerate() {
            let d = &mut dst[k];
            d.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (a, &m) in row.iter().enumerate() {
                if m != 0.0 {
                    d.iter_mut().zip(&src[a]).for_each(|(v, s)| *v += m * s);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CovarianceReport {
    /// max_t ‖U F(t) U⁻¹ − F′(t)‖ / ‖F′(t)‖ (the whole curvature tuple)
    pub curvature: f64,
    /// same for φ
    pub higgs: f64,
    /// same for the full half-wave state
    pub state: f64,
}

fn rel(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Evolves `initial` and its image under a constant gauge map side by side
/// and compares U(·)U⁻¹ of the first with the second.
pub fn gauge_covariance_test(
    ev: &Evolver,
    initial: &GaugeState,
    u: &CMatrix,
    cfg: &EvolveConfig,
) -> Result<CovarianceReport> {
    let gm = GaugeMap::constant(initial.algebra(), initial.grid(), u.clone());
    let transformed = gauge_transform(initial, &gm)?;
    let mut a = to_half_wave(initial);
    let mut b = to_half_wave(&transformed);
    cfg.validate()?;
    let dt = cfg.effective_dt();
    let mut rep = CovarianceReport::default();
    let mut compare = |a: &HalfWaveState, b: &HalfWaveState| {
        let ua = conjugate_half_wave(a, u);
        rep.state = rep.state.max(rel(ua.distance(b, 0.0), b.l2_norm()));
        let (mut fnum, mut fden) = (0.0, 0.0);
        for f in 4..10 {
            let (x, y) = (field_pair(&ua, f), field_pair(b, f));
            fnum += x.iter().zip(&y).map(|(p, q)| p.sub(q).expect("same grid").l2_norm().powi(2)).sum::<f64>();
            fden += y.iter().map(|q| q.l2_norm().powi(2)).sum::<f64>();
        }
        rep.curvature = rep.curvature.max(rel(fnum.sqrt(), fden.sqrt()));
        let (x, y) = (field_pair(&ua, 10), field_pair(b, 10));
        let hnum: f64 = x.iter().zip(&y).map(|(p, q)| p.sub(q).expect("same grid").l2_norm().powi(2)).sum();
        let hden: f64 = y.iter().map(|q| q.l2_norm().powi(2)).sum();
        rep.higgs = rep.higgs.max(rel(hnum.sqrt(), hden.sqrt()));
    };
    compare(&a, &b);
    for _ in 0..cfg.steps() {
        a = ev.step(&a, dt, cfg.integrator);
        b = ev.step(&b, dt, cfg.integrator);
        if !a.is_finite() || !b.is_finite() {
            return Err(YmhError::NonFinite { last_valid_time: a.time - dt });
        }
        compare(&a, &b);
    }
    Ok(rep)
}

fn field_pair(h: &HalfWaveState, f: usize) -> [AlgebraField; 2] {
    use crate::evolve::Sign;
    [h.field(Sign::Plus, f), h.field(Sign::Minus, f)]
}

/// Least-squares slope of log(err) against log(dt).
pub fn fit_order(dts: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        dts.iter().zip(errs).filter(|(_, &e)| e > 0.0).map(|(&d, &e)| (d.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// One row of a dt sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub drift: f64,
    pub conserved_drift: f64,
    pub lorenz: f64,
    pub compat: f64,
    pub gauss: f64,
}

/// Runs the same data at each dt and records end-of-run diagnostics
/// (maxima over the recorded times).
pub fn convergence_study(
    ev: &Evolver,
    initial: &GaugeState,
    base: &EvolveConfig,
    dts: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    dts.iter()
        .map(|&dt| {
            let cfg = EvolveConfig { dt, ..*base };
            let (_, s) = run_with_diagnostics(ev, initial, &cfg, 1)?;
            Ok(ConvergenceRow {
                dt,
                drift: s.drift(),
                conserved_drift: s.conserved_drift(),
                lorenz: s.max_lorenz(),
                compat: s.max_compat(),
                gauss: s.max_gauss(),
            })
        })
        .collect()
}
