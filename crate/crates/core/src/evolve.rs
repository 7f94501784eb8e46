//! First-order half-wave reduction, exact Klein–Gordon propagator,
//! exponential (Lawson) time stepping and Duhamel–Picard iteration.
//!
//! With ⟨∇⟩ = (1 − Δ)^{1/2} and u_± = ½(u ± (i⟨∇⟩)⁻¹∂_t u) the second-order
//! system □u = N(u), rewritten as (□ − 1)u = −u + N(u), becomes
//!
//!   ∂_t u_± = ±i⟨∇⟩u_± ± i(2⟨∇⟩)⁻¹(−u + N(u)).
//!
//! The first term is integrated exactly; the second is the forcing.

use std::sync::Arc;

use crate::algebra::LieAlgebra;
use crate::error::{Result, YmhError};
use crate::grid::{AlgebraField, Grid, Repr, ScalarField, C64, CZERO};
use crate::system::{check_exponent, evaluate_spectral, GaugeState, Terms, Variant};

/// Spectral coefficients indexed [field][algebra component][mode].
pub type Spectra = Vec<Vec<Vec<C64>>>;

/// Fields in evolution order: A₀..A₃, F in pair order, φ.
pub const NFIELDS: usize = 11;
pub const PHI: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub struct HalfWaveState {
    algebra: Arc<LieAlgebra>,
    grid: Arc<Grid>,
    pub plus: Spectra,
    pub minus: Spectra,
    pub time: f64,
}

fn zero_spectra(d: usize, len: usize) -> Spectra {
    vec![vec![vec![CZERO; len]; d]; NFIELDS]
}

fn spectra_of(fields: &[&AlgebraField]) -> Spectra {
    fields.iter().map(|f| f.comps().iter().map(|c| c.to_spectral().into_data()).collect()).collect()
}

impl HalfWaveState {
    pub fn zeros(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>) -> Self {
        let z = zero_spectra(algebra.dim(), grid.len());
        Self { algebra: algebra.clone(), grid: grid.clone(), plus: z.clone(), minus: z, time: 0.0 }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// u_± of field `f` as a spectral algebra field.
    pub fn field(&self, sign: Sign, f: usize) -> AlgebraField {
        let src = match sign {
            Sign::Plus => &self.plus[f],
            Sign::Minus => &self.minus[f],
        };
        let comps = src.iter().map(|c| ScalarField::new(&self.grid, Repr::Spectral, c.clone())).collect();
        AlgebraField::from_components(&self.algebra, comps).expect("dimension matches")
    }

    fn arrays(&self) -> impl Iterator<Item = &Vec<C64>> {
        self.plus.iter().chain(&self.minus).flatten()
    }

    fn arrays_mut(&mut self) -> impl Iterator<Item = &mut Vec<C64>> {
        self.plus.iter_mut().chain(self.minus.iter_mut()).flatten()
    }

    /// self += c·other (time unchanged).
    pub fn axpy(&mut self, c: C64, other: &Self) {
        for (x, y) in self.arrays_mut().zip(other.arrays()) {
            for (a, b) in x.iter_mut().zip(y) {
                *a += c * b;
            }
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for x in out.arrays_mut() {
            x.iter_mut().for_each(|v| *v *= c);
        }
        out
    }

    /// (Σ_± Σ_fields ‖u_±‖²_{H^s})^{1/2}.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let jap = self.grid.japanese();
        let sum: f64 =
            self.arrays().map(|x| x.iter().zip(jap).map(|(v, w)| v.norm_sqr() * w.powf(2.0 * s)).sum::<f64>()).sum();
        (self.grid.volume() * sum).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// ‖self − other‖_{H^s}.
    pub fn distance(&self, other: &Self, s: f64) -> f64 {
        let mut d = self.clone();
        d.axpy(C64::new(-1.0, 0.0), other);
        d.sobolev_norm(s)
    }

    pub fn is_finite(&self) -> bool {
        self.arrays().all(|x| x.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Applies the free flow e^{±i t⟨∇⟩} to both halves.
    pub fn free_flow(&mut self, t: f64) {
        if t == 0.0 {
            return;
        }
        let phase: Vec<C64> = self.grid.japanese().iter().map(|w| C64::from_polar(1.0, w * t)).collect();
        for x in self.plus.iter_mut().flatten() {
            x.iter_mut().zip(&phase).for_each(|(v, e)| *v *= e);
        }
        for x in self.minus.iter_mut().flatten() {
            x.iter_mut().zip(&phase).for_each(|(v, e)| *v *= e.conj());
        }
    }

    /// (u, ∂_t u) spectra reconstructed as u₊ + u₋ and i⟨∇⟩(u₊ − u₋).
    fn reconstruct(&self) -> (Spectra, Spectra) {
        let jap = self.grid.japanese();
        let mut u = self.plus.clone();
        let mut dtu = self.plus.clone();
        for f in 0..NFIELDS {
            for a in 0..self.algebra.dim() {
                let (p, m) = (&self.plus[f][a], &self.minus[f][a]);
                for i in 0..p.len() {
                    u[f][a][i] = p[i] + m[i];
                    dtu[f][a][i] = C64::new(0.0, jap[i]) * (p[i] - m[i]);
                }
            }
        }
        (u, dtu)
    }
}

/// Builds u_± = ½(u ± (i⟨∇⟩)⁻¹∂_t u) for every field at time 0.
pub fn to_half_wave(g: &GaugeState) -> HalfWaveState {
    let grid = g.grid().clone();
    let u = spectra_of(&g.a.iter().chain(&g.f).chain([&g.phi]).collect::<Vec<_>>());
    let dtu = spectra_of(&g.dta.iter().chain(&g.dtf).chain([&g.dtphi]).collect::<Vec<_>>());
    let jap = grid.japanese();
    let mut plus = u.clone();
    let mut minus = u.clone();
    for f in 0..NFIELDS {
        for a in 0..u[f].len() {
            for i in 0..grid.len() {
                // (i⟨ξ⟩)⁻¹ = −i/⟨ξ⟩
                let w = C64::new(0.0, -1.0 / jap[i]) * dtu[f][a][i];
                plus[f][a][i] = 0.5 * (u[f][a][i] + w);
                minus[f][a][i] = 0.5 * (u[f][a][i] - w);
            }
        }
    }
    HalfWaveState { algebra: g.algebra().clone(), grid, plus, minus, time: 0.0 }
}

/// Inverse of [`to_half_wave`]; fields come back in physical space.
pub fn from_half_wave(h: &HalfWaveState) -> GaugeState {
    let (u, dtu) = h.reconstruct();
    let build = |s: &Spectra| -> Vec<AlgebraField> {
        s.iter()
            .map(|comps| {
                let c = comps
                    .iter()
                    .map(|x| ScalarField::new(&h.grid, Repr::Spectral, x.clone()).into_physical())
                    .collect();
                AlgebraField::from_components(&h.algebra, c).expect("dimension matches")
            })
            .collect()
    };
    let (mut u, mut dtu) = (build(&u).into_iter(), build(&dtu).into_iter());
    let take4 = |it: &mut std::vec::IntoIter<AlgebraField>| -> [AlgebraField; 4] {
        std::array::from_fn(|_| it.next().expect("eleven fields"))
    };
    let a = take4(&mut u);
    let dta = take4(&mut dtu);
    let f: [AlgebraField; 6] = std::array::from_fn(|_| u.next().expect("eleven fields"));
    let dtf: [AlgebraField; 6] = std::array::from_fn(|_| dtu.next().expect("eleven fields"));
    GaugeState { a, dta, f, dtf, phi: u.next().expect("φ"), dtphi: dtu.next().expect("∂_tφ") }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    ExpEuler,
    ExpRK4,
}

impl Integrator {
    pub fn order(&self) -> f64 {
        match self {
            Integrator::ExpEuler => 1.0,
            Integrator::ExpRK4 => 4.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "expeuler" | "exp-euler" | "euler" => Some(Self::ExpEuler),
            "exprk4" | "exp-rk4" | "rk4" => Some(Self::ExpRK4),
            _ => None,
        }
    }
}

/// What drives the half-wave system besides the free flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// −u + N(u): the full system
    Full,
    /// nothing: free Klein–Gordon flow
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub picard_depth: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 0.5, integrator: Integrator::ExpRK4, picard_depth: 8 }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(YmhError::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(YmhError::Parameter(format!("T must be positive, got {}", self.t_end)));
        }
        if self.dt > self.t_end {
            return Err(YmhError::Parameter(format!("dt = {} exceeds T = {}", self.dt, self.t_end)));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk so that they land on T.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }
}

/// Right-hand-side evaluator for one (algebra, grid, p, coupling).
#[derive(Clone, Debug)]
pub struct Evolver {
    pub p: f64,
    pub coupling: Coupling,
    pub variant: Variant,
}

impl Evolver {
    pub fn new(p: f64, coupling: Coupling) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self { p, coupling, variant: Variant::Printed })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// The forcing ±i(2⟨∇⟩)⁻¹(−u + N(u)) in both halves.
    pub fn forcing(&self, h: &HalfWaveState) -> HalfWaveState {
        let mut out = HalfWaveState::zeros(&h.algebra, &h.grid);
        out.time = h.time;
        if self.coupling == Coupling::Free {
            return out;
        }
        let (u, dtu) = h.reconstruct();
        let n = evaluate_spectral(&h.grid, &h.algebra, self.p, &u, &dtu, Terms::ALL, self.variant);
        let jap = h.grid.japanese();
        for f in 0..NFIELDS {
            for a in 0..h.algebra.dim() {
                for i in 0..h.grid.len() {
                    let g = C64::new(0.0, 0.5 / jap[i]) * (n[f][a][i] - u[f][a][i]);
                    out.plus[f][a][i] = g;
                    out.minus[f][a][i] = -g;
                }
            }
        }
        out
    }

    /// Full time derivative: ±i⟨∇⟩u_± plus the forcing.
    pub fn rhs(&self, h: &HalfWaveState) -> HalfWaveState {
        let mut out = self.forcing(h);
        let jap = h.grid.japanese();
        for f in 0..NFIELDS {
            for a in 0..h.algebra.dim() {
                for i in 0..h.grid.len() {
                    let w = C64::new(0.0, jap[i]);
                    out.plus[f][a][i] += w * h.plus[f][a][i];
                    out.minus[f][a][i] -= w * h.minus[f][a][i];
                }
            }
        }
        out
    }

    /// One Lawson step of size `dt`; `dt = 0` returns the input.
    pub fn step(&self, h: &HalfWaveState, dt: f64, integrator: Integrator) -> HalfWaveState {
        if dt == 0.0 {
            return h.clone();
        }
        let c = |x: f64| C64::new(x, 0.0);
        let mut next = match integrator {
            Integrator::ExpEuler => {
                let mut y = h.clone();
                y.axpy(c(dt), &self.forcing(h));
                y.free_flow(dt);
                y
            }
            Integrator::ExpRK4 => {
                let half = 0.5 * dt;
                let k1 = self.forcing(h);

                let mut y = h.clone();
                y.axpy(c(half), &k1);
                y.free_flow(half);
                y.time = h.time + half;
                let k2 = self.forcing(&y);

                let mut eh = h.clone();
                eh.free_flow(half);
                let mut y = eh.clone();
                y.axpy(c(half), &k2);
                y.time = h.time + half;
                let k3 = self.forcing(&y);

                let mut y = eh.clone();
                y.axpy(c(dt), &k3);
                y.free_flow(half);
                y.time = h.time + dt;
                let k4 = self.forcing(&y);

                // E_h u + h/6 (E_h k1 + 2 E_{h/2}(k2 + k3) + k4)
                let mut acc = k1;
                acc.free_flow(half);
                acc.axpy(c(2.0), &k2);
                acc.axpy(c(2.0), &k3);
                acc.free_flow(half);
                acc.axpy(c(1.0), &k4);
                let mut y = h.clone();
                y.free_flow(dt);
                y.axpy(c(dt / 6.0), &acc);
                y
            }
        };
        next.time = h.time + dt;
        next
    }

    /// Steps from `h0` to T, calling `observe` on the initial state and
    /// after every step. Aborts with the last finite time on NaN/∞.
    pub fn evolve_with(
        &self,
        h0: &HalfWaveState,
        cfg: &EvolveConfig,
        mut observe: impl FnMut(usize, &HalfWaveState) -> Result<()>,
    ) -> Result<HalfWaveState> {
        cfg.validate()?;
        let n = cfg.steps();
        let dt = cfg.effective_dt();
        let mut h = h0.clone();
        observe(0, &h)?;
        for k in 1..=n {
            let next = self.step(&h, dt, cfg.integrator);
            if !next.is_finite() {
                return Err(YmhError::NonFinite { last_valid_time: h.time });
            }
            h = next;
            h.time = h0.time + k as f64 * dt;
            observe(k, &h)?;
        }
        Ok(h)
    }

    /// Snapshots every `stride` steps (always including both ends).
    pub fn evolve(&self, h0: &HalfWaveState, cfg: &EvolveConfig, stride: usize) -> Result<Vec<HalfWaveState>> {
        let stride = stride.max(1);
        let last = cfg.steps();
        let mut out = Vec::new();
        self.evolve_with(h0, cfg, |k, h| {
            if k % stride == 0 || k == last {
                out.push(h.clone());
            }
            Ok(())
        })?;
        Ok(out)
    }
}

/// Outcome of a Picard run.
#[derive(Clone, Debug)]
pub struct PicardReport {
    /// C⁰_t H^s distance between iterates k and k+1, k = 1..depth−1
    pub distances: Vec<f64>,
    /// the last iterate on the time grid
    pub last: Vec<HalfWaveState>,
    /// distance grew on three consecutive iterates
    pub diverged: bool,
}

impl PicardReport {
    /// Successive ratios d_{k+1}/d_k.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] }).collect()
    }
}

/// Picard iteration u⁽¹⁾ = free flow, u⁽ᵏ⁺¹⁾ = free flow + Duhamel of the
/// forcing at u⁽ᵏ⁾, on `steps + 1` equispaced times in [0, T].
///
/// The Duhamel integral ∫₀ᵗ E(t−s)G(s)ds = E(t)∫₀ᵗ E(−s)G(s)ds is taken by
/// cumulative composite Simpson (3/8 rule for the last panel at odd nodes).
/// Only one trajectory is kept: iterate k is overwritten by iterate k+1
/// node by node.
pub fn picard_iterate(
    ev: &Evolver,
    h0: &HalfWaveState,
    depth: usize,
    t_end: f64,
    steps: usize,
    s: f64,
) -> Result<PicardReport> {
    if depth == 0 {
        return Err(YmhError::Parameter("Picard depth must be at least 1".into()));
    }
    if !(t_end > 0.0) || steps == 0 {
        return Err(YmhError::Parameter("Picard needs T > 0 and at least one step".into()));
    }
    let h = t_end / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|n| h0.time + n as f64 * h).collect();
    let mut traj: Vec<HalfWaveState> = times
        .iter()
        .map(|&t| {
            let mut x = h0.clone();
            x.free_flow(t - h0.time);
            x.time = t;
            x
        })
        .collect();

    let mut distances = Vec::new();
    let mut diverged = false;
    for _ in 1..depth {
        let mut ws: Vec<Option<HalfWaveState>> = vec![None; steps + 1];
        let mut is: Vec<Option<HalfWaveState>> = vec![None; steps + 1];
        let mut dist: f64 = 0.0;
        let mut finish =
            |n: usize, is: &mut Vec<Option<HalfWaveState>>, traj: &mut Vec<HalfWaveState>, integral: HalfWaveState| {
                let mut next = h0.clone();
                next.axpy(C64::new(1.0, 0.0), &integral);
                next.free_flow(times[n] - h0.time);
                next.time = times[n];
                dist = dist.max(next.distance(&traj[n], s));
                traj[n] = next;
                is[n] = Some(integral);
            };
        is[0] = Some(HalfWaveState::zeros(&h0.algebra, &h0.grid));
        for m in 0..=steps {
            let mut w = ev.forcing(&traj[m]);
            w.free_flow(-(times[m] - h0.time));
            if !w.is_finite() {
                return Err(YmhError::NonFinite { last_valid_time: times[m] });
            }
            ws[m] = Some(w);
            let wv = |k: usize| ws[k].as_ref().expect("computed");
            let c = |x: f64| C64::new(x, 0.0);
            if m == 0 {
                continue;
            }
            if steps == 1 {
                // single panel: trapezoid
                let mut i1 = HalfWaveState::zeros(&h0.algebra, &h0.grid);
                i1.axpy(c(0.5 * h), wv(0));
                i1.axpy(c(0.5 * h), wv(1));
                finish(1, &mut is, &mut traj, i1);
                break;
            }
            if m == 2 {
                // first panel from the quadratic through w₀, w₁, w₂
                let mut i1 = HalfWaveState::zeros(&h0.algebra, &h0.grid);
                i1.axpy(c(5.0 * h / 12.0), wv(0));
                i1.axpy(c(8.0 * h / 12.0), wv(1));
                i1.axpy(c(-h / 12.0), wv(2));
                finish(1, &mut is, &mut traj, i1);
            }
            if m >= 2 {
                let n = m;
                let integral = if n % 2 == 0 {
                    let mut x = is[n - 2].clone().expect("even node done");
                    x.axpy(c(h / 3.0), wv(n - 2));
                    x.axpy(c(4.0 * h / 3.0), wv(n - 1));
                    x.axpy(c(h / 3.0), wv(n));
                    x
                } else {
                    let mut x = is[n - 3].clone().expect("even node done");
                    x.axpy(c(3.0 * h / 8.0), wv(n - 3));
                    x.axpy(c(9.0 * h / 8.0), wv(n - 2));
                    x.axpy(c(9.0 * h / 8.0), wv(n - 1));
                    x.axpy(c(3.0 * h / 8.0), wv(n));
                    x
                };
                finish(n, &mut is, &mut traj, integral);
                // the window never looks further back than n − 3
                if n >= 4 {
                    ws[n - 4] = None;
                    is[n - 4] = None;
                }
            }
        }
        distances.push(dist);
        let k = distances.len();
        if k >= 4 && (k - 3..k).all(|j| distances[j] > distances[j - 1]) {
            diverged = true;
            break;
        }
    }
    Ok(PicardReport { distances, last: traj, diverged })
}

/// Exact abelian plane-wave solution of □A = 0 with A₀ = 0, φ = 0:
/// A₁ = e₀ cos(k·x − |k|t) with k = (0, 1, 1) and A₂ = e₁ amp·sin(k′·x − |k′|t)
/// with k′ = (1, 0, 2). Both polarizations are transverse, so the Lorenz
/// condition holds.
pub fn abelian_plane_wave(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>, amp: f64, t: f64) -> GaugeState {
    let k1 = [0.0, 1.0, 1.0];
    let k2 = [1.0, 0.0, 2.0];
    let w1 = 2f64.sqrt();
    let w2 = 5f64.sqrt();
    let d = algebra.dim();
    let unit = |a: usize, v: f64| {
        let mut c = vec![0.0; d];
        c[a % d] = v;
        c
    };
    let dot = |k: [f64; 3], x: [f64; 3]| k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
    let mut s = GaugeState::zeros(algebra, grid);
    // time derivatives of order 0, 1, 2
    let a1 = |order: usize| {
        AlgebraField::from_fn(algebra, grid, move |x| {
            let th = dot(k1, x) - w1 * t;
            let v = match order {
                0 => th.cos(),
                1 => w1 * th.sin(),
                _ => -w1 * w1 * th.cos(),
            };
            unit(0, amp * v)
        })
    };
    let a2 = |order: usize| {
        AlgebraField::from_fn(algebra, grid, move |x| {
            let th = dot(k2, x) - w2 * t;
            let v = match order {
                0 => th.sin(),
                1 => -w2 * th.cos(),
                _ => -w2 * w2 * th.sin(),
            };
            unit(1, amp * v)
        })
    };
    s.a[1] = a1(0);
    s.dta[1] = a1(1);
    s.a[2] = a2(0);
    s.dta[2] = a2(1);
    let mut ddta = GaugeState::zeros(algebra, grid).a;
    ddta[1] = a1(2);
    ddta[2] = a2(2);
    // the commutator part vanishes for an abelian algebra
    s.f = crate::system::curvature_from_potential(&s.a, &s.dta).expect("shared grid");
    s.dtf = crate::system::curvature_from_potential(&s.dta, &ddta).expect("shared grid");
    debug_assert!(algebra.is_abelian());
    s
}

#[cfg(test)]
mod tests;
