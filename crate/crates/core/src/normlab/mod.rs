//! Discrete H^s, X^{s,b}_±, H^{s,b} norms on space-time samples, exact
//! lattice products, the angle-weighted bilinear form B_θ and empirical
//! boundedness probes.
//!
//! A sample holds u(t_m, x) on M × N³ points. Its spectrum is taken after
//! windowing and normalized as c(j,k) = (M N³)⁻¹ Σ w u e^{−i(τ_j t + k·x)},
//! so ‖u‖² = T L³ Σ weight² |c|². Products act on the trigonometric
//! interpolants of the windowed samples and are computed exactly on a
//! padded lattice.

mod catalog;
mod probe;

pub use catalog::{
    atlas_conditions, catalog, nullform_conditions, Admissibility, Estimate, Factor, Hypothesis, Kind, Multiplier,
};
pub use probe::{
    catalog_growth, linear_estimate_probe, nullform_estimate_probe, probe_estimate, product_estimate_probe,
    random_sample, write_probe_csv, ConeSign, GrowthRow, LinearReport, LinearRow, ProbeReport, ProbeSize,
};

use crate::error::{Result, YmhError};
use crate::fft::FftNd;
use crate::grid::{GridSpec, C64};
use crate::nullform::{japanese, theta};

const CZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    None,
    Hann,
}

/// Which modulation weight a norm carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modulation {
    /// ⟨−τ + ⟨ξ⟩⟩
    Plus,
    /// ⟨−τ − ⟨ξ⟩⟩
    Minus,
    /// ⟨|τ| − ⟨ξ⟩⟩
    Wave,
}

impl Modulation {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            "wave" => Ok(Self::Wave),
            other => Err(YmhError::Parameter(format!("unknown modulation '{other}'"))),
        }
    }

    pub fn weight(self, tau: f64, xi: [f64; 3]) -> f64 {
        let j = japanese(xi);
        let m = match self {
            Self::Plus => -tau + j,
            Self::Minus => -tau - j,
            Self::Wave => tau.abs() - j,
        };
        (1.0 + m * m).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub s: f64,
    pub b: f64,
    pub sign: Modulation,
}

impl NormSpec {
    /// s = 1 − ε, b = ½ + 2ε with ε = 0.05.
    pub const DEFAULT_EPS: f64 = 0.05;

    pub fn new(s: f64, b: f64, sign: Modulation) -> Self {
        Self { s, b, sign }
    }

    pub fn wave(s: f64, b: f64) -> Self {
        Self::new(s, b, Modulation::Wave)
    }

    pub fn weight(&self, tau: f64, xi: [f64; 3]) -> f64 {
        japanese(xi).powf(self.s) * self.sign.weight(tau, xi).powf(self.b)
    }
}

impl Default for NormSpec {
    fn default() -> Self {
        let e = Self::DEFAULT_EPS;
        Self::new(1.0 - e, 0.5 + 2.0 * e, Modulation::Plus)
    }
}

/// u(t, x) on t_m = t₀ + m T/M and the spatial grid of `grid`.
#[derive(Clone, Debug)]
pub struct SpacetimeSample {
    grid: GridSpec,
    m: usize,
    t_start: f64,
    t_window: f64,
    window: Window,
    /// time-major, then the spatial index of an N³ row-major cube
    values: Vec<C64>,
}

impl SpacetimeSample {
    pub fn new(
        grid: GridSpec,
        m: usize,
        t_start: f64,
        t_window: f64,
        window: Window,
        values: Vec<C64>,
    ) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(YmhError::Parameter(format!("M = {m} must be a power of two ≥ 2")));
        }
        if !(t_window > 0.0 && t_window.is_finite() && t_start.is_finite()) {
            return Err(YmhError::Parameter(format!("time window {t_window} must be positive")));
        }
        let n = grid.n;
        if values.len() != m * n * n * n {
            return Err(YmhError::Parameter(format!("expected {} samples, got {}", m * n * n * n, values.len())));
        }
        Ok(Self { grid, m, t_start, t_window, window, values })
    }

    pub fn zeros(grid: GridSpec, m: usize, t_window: f64, window: Window) -> Result<Self> {
        let n = grid.n;
        Self::new(grid, m, 0.0, t_window, window, vec![CZERO; m * n * n * n])
    }

    pub fn from_fn(
        grid: GridSpec,
        m: usize,
        t_start: f64,
        t_window: f64,
        window: Window,
        f: impl Fn(f64, [f64; 3]) -> C64,
    ) -> Result<Self> {
        let n = grid.n;
        let h = grid.l / n as f64;
        let mut values = Vec::with_capacity(m * n * n * n);
        for it in 0..m {
            let t = t_start + it as f64 * t_window / m as f64;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        values.push(f(t, [a as f64 * h, b as f64 * h, c as f64 * h]));
                    }
                }
            }
        }
        Self::new(grid, m, t_start, t_window, window, values)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t_window(&self) -> f64 {
        self.t_window
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn time(&self, it: usize) -> f64 {
        self.t_start + it as f64 * self.t_window / self.m as f64
    }

    /// Hann: sin²(π (t − t₀)/T).
    pub fn window_weight(&self, it: usize) -> f64 {
        match self.window {
            Window::None => 1.0,
            Window::Hann => (std::f64::consts::PI * it as f64 / self.m as f64).sin().powi(2),
        }
    }

    /// Rectangle-rule ‖w u‖_{L²_{t,x}} on the window.
    pub fn l2_norm(&self) -> f64 {
        let n3 = self.grid.n.pow(3);
        let mut s = 0.0;
        for it in 0..self.m {
            let w = self.window_weight(it);
            s += w * w * self.values[it * n3..(it + 1) * n3].iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        (s * self.t_window * self.grid.l.powi(3) / (self.m * n3) as f64).sqrt()
    }

    /// Windowed (τ, ξ) coefficients on the centred box j ∈ [−M/2, M/2),
    /// k_i ∈ [−N/2, N/2). The phase e^{−iτ t₀} is dropped; it is common to
    /// every factor and does not change moduli.
    pub fn spectrum(&self) -> Lattice {
        let (m, n) = (self.m, self.grid.n);
        let n3 = n * n * n;
        let mut data: Vec<C64> = Vec::with_capacity(m * n3);
        for it in 0..m {
            let w = self.window_weight(it);
            data.extend(self.values[it * n3..(it + 1) * n3].iter().map(|v| v * w));
        }
        FftNd::new(&[m, n, n, n]).forward(&mut data);
        let scale = 1.0 / (m * n3) as f64;
        let mut out = Lattice::zeros(
            Extent { t_lo: -(m as i64) / 2, nt: m, k_lo: -(n as i64) / 2, nk: n },
            2.0 * std::f64::consts::PI / self.t_window,
            2.0 * std::f64::consts::PI / self.grid.l,
            self.t_window * self.grid.l.powi(3),
        );
        for jt in 0..m {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let freq = [signed(jt, m), signed(a, n), signed(b, n), signed(c, n)];
                        let src = ((jt * n + a) * n + b) * n + c;
                        let dst = out.index(freq).expect("inside the box");
                        out.c[dst] = data[src] * scale;
                    }
                }
            }
        }
        out
    }
}

fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Index box of a lattice: j ∈ [t_lo, t_lo + nt), each k_i ∈ [k_lo, k_lo + nk).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Extent {
    pub t_lo: i64,
    pub nt: usize,
    pub k_lo: i64,
    pub nk: usize,
}

impl Extent {
    fn len(&self) -> usize {
        self.nt * self.nk.pow(3)
    }

    /// Box of an r-fold product.
    fn sum(extents: &[Extent]) -> Self {
        Self {
            t_lo: extents.iter().map(|e| e.t_lo).sum(),
            nt: extents.iter().map(|e| e.nt - 1).sum::<usize>() + 1,
            k_lo: extents.iter().map(|e| e.k_lo).sum(),
            nk: extents.iter().map(|e| e.nk - 1).sum::<usize>() + 1,
        }
    }
}

/// Space-time Fourier coefficients on a box of the (τ, ξ) lattice
/// τ_j = j·dτ, ξ = k·dξ.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    ext: Extent,
    dtau: f64,
    dxi: f64,
    /// T L³, the Parseval factor
    volume: f64,
    c: Vec<C64>,
}

impl Lattice {
    fn zeros(ext: Extent, dtau: f64, dxi: f64, volume: f64) -> Self {
        Self { ext, dtau, dxi, volume, c: vec![CZERO; ext.len()] }
    }

    pub fn extent(&self) -> Extent {
        self.ext
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    fn index(&self, f: [i64; 4]) -> Option<usize> {
        let e = &self.ext;
        let jt = f[0] - e.t_lo;
        if jt < 0 || jt >= e.nt as i64 {
            return None;
        }
        let mut idx = jt as usize;
        for &k in &f[1..] {
            let q = k - e.k_lo;
            if q < 0 || q >= e.nk as i64 {
                return None;
            }
            idx = idx * e.nk + q as usize;
        }
        Some(idx)
    }

    fn freq(&self, idx: usize) -> [i64; 4] {
        let e = &self.ext;
        let c = (idx % e.nk) as i64 + e.k_lo;
        let b = ((idx / e.nk) % e.nk) as i64 + e.k_lo;
        let a = ((idx / (e.nk * e.nk)) % e.nk) as i64 + e.k_lo;
        let jt = (idx / e.nk.pow(3)) as i64 + e.t_lo;
        [jt, a, b, c]
    }

    pub fn get(&self, f: [i64; 4]) -> C64 {
        self.index(f).map_or(CZERO, |i| self.c[i])
    }

    fn tau_xi(&self, f: [i64; 4]) -> (f64, [f64; 3]) {
        (f[0] as f64 * self.dtau, [f[1] as f64 * self.dxi, f[2] as f64 * self.dxi, f[3] as f64 * self.dxi])
    }

    /// (T L³ Σ weight² |c|²)^{1/2}.
    pub fn norm(&self, spec: NormSpec) -> f64 {
        let mut s = 0.0;
        for (i, v) in self.c.iter().enumerate() {
            if *v == CZERO {
                continue;
            }
            let (tau, xi) = self.tau_xi(self.freq(i));
            s += spec.weight(tau, xi).powi(2) * v.norm_sqr();
        }
        (self.volume * s).sqrt()
    }

    /// Multiplies every coefficient by m(ξ).
    pub fn map_spatial(&self, m: impl Fn([f64; 3]) -> f64) -> Self {
        let mut out = self.clone();
        for (i, v) in out.c.iter_mut().enumerate() {
            let (_, xi) = self.tau_xi(self.freq(i));
            *v *= m(xi);
        }
        out
    }

    /// Restricts the spatial box to |k_i| ≤ band.
    pub fn cropped(&self, band: usize) -> Self {
        let band = band as i64;
        let ext = Extent { k_lo: -band, nk: 2 * band as usize + 1, ..self.ext };
        let mut out = Self::zeros(ext, self.dtau, self.dxi, self.volume);
        for i in 0..out.c.len() {
            out.c[i] = self.get(out.freq(i));
        }
        out
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if close(self.dtau, other.dtau) && close(self.dxi, other.dxi) {
            Ok(())
        } else {
            Err(YmhError::Parameter("lattices have different spacings".into()))
        }
    }
}

fn nice_size(min: usize) -> usize {
    (min..)
        .find(|&n| {
            let mut r = n;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("unbounded search")
}

/// Exact product of r lattices: the linear convolution over the full
/// (τ, ξ) lattice, by FFT on a padded box so nothing wraps.
pub fn lattice_product(factors: &[&Lattice]) -> Result<Lattice> {
    let first = *factors.first().ok_or_else(|| YmhError::Parameter("empty product".into()))?;
    for f in &factors[1..] {
        first.compatible(f)?;
    }
    let ext = Extent::sum(&factors.iter().map(|f| f.ext).collect::<Vec<_>>());
    let (pt, pk) = (nice_size(ext.nt), nice_size(ext.nk));
    let plan = FftNd::new(&[pt, pk, pk, pk]);
    let pos = |f: [i64; 4]| -> usize {
        let t = f[0].rem_euclid(pt as i64) as usize;
        let [a, b, c] = [1, 2, 3].map(|i| f[i].rem_euclid(pk as i64) as usize);
        ((t * pk + a) * pk + b) * pk + c
    };
    let mut acc: Option<Vec<C64>> = None;
    for f in factors {
        let mut buf = vec![CZERO; plan.len()];
        for (i, v) in f.c.iter().enumerate() {
            if *v != CZERO {
                buf[pos(f.freq(i))] = *v;
            }
        }
        let wrap =
            |lo: i64, len: usize, p: usize| (lo..lo + len as i64).map(|j| j.rem_euclid(p as i64) as usize).collect();
        let ks: Vec<usize> = wrap(f.ext.k_lo, f.ext.nk, pk);
        plan.inverse_pruned(&mut buf, &[wrap(f.ext.t_lo, f.ext.nt, pt), ks.clone(), ks.clone(), ks]);
        acc = Some(match acc {
            None => buf,
            Some(mut a) => {
                a.iter_mut().zip(&buf).for_each(|(x, y)| *x *= y);
                a
            }
        });
    }
    let mut acc = acc.expect("at least one factor");
    plan.forward(&mut acc);
    let scale = 1.0 / plan.len() as f64;
    let mut out = Lattice::zeros(ext, first.dtau, first.dxi, first.volume);
    for i in 0..out.c.len() {
        out.c[i] = acc[pos(out.freq(i))] * scale;
    }
    Ok(out)
}

/// B_θ(u, v) with weight θ(±(ξ−η), ±′η): a direct double sum over spatial
/// modes; the τ-convolution of each pair is a pointwise product in t on a
/// padded time grid. θ is taken as 0 when either frequency vanishes.
pub fn b_theta(u: &Lattice, v: &Lattice, su: f64, sv: f64) -> Result<Lattice> {
    u.compatible(v)?;
    let ext = Extent::sum(&[u.ext, v.ext]);
    let pt = nice_size(ext.nt);
    let plan = FftNd::new(&[pt]);
    let columns = |x: &Lattice| -> Vec<(usize, [f64; 3], [i64; 3], Vec<C64>)> {
        let nk3 = x.ext.nk.pow(3);
        (0..nk3)
            .filter_map(|s| {
                let f = x.freq(s);
                let mut col = vec![CZERO; pt];
                let mut any = false;
                for jt in 0..x.ext.nt {
                    let v = x.c[jt * nk3 + s];
                    if v != CZERO {
                        any = true;
                        col[(jt as i64 + x.ext.t_lo).rem_euclid(pt as i64) as usize] = v;
                    }
                }
                if !any {
                    return None;
                }
                plan.inverse(&mut col);
                let k = [f[1], f[2], f[3]];
                Some((s, k.map(|q| q as f64 * x.dxi), k, col))
            })
            .collect()
    };
    let (cu, cv) = (columns(u), columns(v));
    let nk = ext.nk;
    let mut acc: Vec<Option<Vec<C64>>> = vec![None; nk.pow(3)];
    for (_, xu, ku, colu) in &cu {
        for (_, xv, kv, colv) in &cv {
            let w = theta(xu.map(|x| su * x), xv.map(|x| sv * x));
            if w == 0.0 {
                continue;
            }
            let q = [0, 1, 2].map(|i| (ku[i] + kv[i] - ext.k_lo) as usize);
            let slot = acc[(q[0] * nk + q[1]) * nk + q[2]].get_or_insert_with(|| vec![CZERO; pt]);
            for ((o, a), b) in slot.iter_mut().zip(colu).zip(colv) {
                *o += w * a * b;
            }
        }
    }
    let mut out = Lattice::zeros(ext, u.dtau, u.dxi, u.volume);
    let nk3 = nk.pow(3);
    let scale = 1.0 / pt as f64;
    for (s, col) in acc.into_iter().enumerate() {
        let Some(mut col) = col else { continue };
        plan.forward(&mut col);
        for jt in 0..ext.nt {
            let t = (jt as i64 + ext.t_lo).rem_euclid(pt as i64) as usize;
            out.c[jt * nk3 + s] = col[t] * scale;
        }
    }
    Ok(out)
}

/// Plain product through [`b_theta`]'s double sum with weight 1; used as a
/// second route to [`lattice_product`] in tests.
#[cfg(test)]
fn direct_product(u: &Lattice, v: &Lattice) -> Lattice {
    let mut out = Lattice::zeros(Extent::sum(&[u.ext, v.ext]), u.dtau, u.dxi, u.volume);
    for (i, a) in u.c.iter().enumerate() {
        if *a == CZERO {
            continue;
        }
        let fu = u.freq(i);
        for (j, b) in v.c.iter().enumerate() {
            let fv = v.freq(j);
            let f = [0, 1, 2, 3].map(|q| fu[q] + fv[q]);
            let idx = out.index(f).expect("sum box");
            out.c[idx] += a * b;
        }
    }
    out
}

/// ‖·‖_{X^{s,b}_±} of a sample.
pub fn xsb_norm(u: &SpacetimeSample, spec: NormSpec) -> f64 {
    u.spectrum().norm(spec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HxhReport {
    pub h_norm: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    /// largest weight-by-weight violation of the predicted ordering
    pub max_violation: f64,
}

/// ‖u‖_{H^{s,b}} ≤ ‖u‖_{X^{s,b}_±} for b ≥ 0 and the reverse for b ≤ 0,
/// checked on every lattice weight of the sample's box.
pub fn hxh_check(u: &SpacetimeSample, s: f64, b: f64) -> HxhReport {
    let lat = u.spectrum();
    let mut viol: f64 = 0.0;
    for i in 0..lat.c.len() {
        let (tau, xi) = lat.tau_xi(lat.freq(i));
        let h = Modulation::Wave.weight(tau, xi).powf(b);
        for m in [Modulation::Plus, Modulation::Minus] {
            let x = m.weight(tau, xi).powf(b);
            let d = if b >= 0.0 { h - x } else { x - h };
            viol = viol.max(d.max(0.0));
        }
    }
    HxhReport {
        h_norm: lat.norm(NormSpec::wave(s, b)),
        x_plus: lat.norm(NormSpec::new(s, b, Modulation::Plus)),
        x_minus: lat.norm(NormSpec::new(s, b, Modulation::Minus)),
        max_violation: viol,
    }
}
