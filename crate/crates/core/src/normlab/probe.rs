//! Randomized boundedness probes: max of lhs/rhs over seeded batches of
//! band-limited space-time samples.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::catalog::{Estimate, Factor, Hypothesis, Kind, Multiplier};
use super::{b_theta, lattice_product, Lattice, Modulation, NormSpec, SpacetimeSample, Window, CZERO};
use crate::error::{Result, YmhError};
use crate::fft::FftNd;
use crate::grid::{GridSpec, C64};
use crate::nullform::japanese;

/// Where a random sample concentrates in (τ, ξ).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeSign {
    /// near τ = ⟨ξ⟩
    Plus,
    /// near τ = −⟨ξ⟩
    Minus,
    /// each spatial mode picks a sheet at random
    Either,
}

impl ConeSign {
    fn from_sign(s: f64) -> Self {
        if s > 0.0 {
            Self::Plus
        } else {
            Self::Minus
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn sign_rng(rng: &mut ChaCha8Rng) -> f64 {
    if rand::Rng::random_bool(rng, 0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Random sample with spatial support 1 ≤ max|k_i| ≤ band and coefficients
/// ∝ g / (⟨ξ⟩ ⟨τ − σ⟨ξ⟩⟩), g complex Gaussian. Hann-windowed.
pub fn random_sample(
    grid: GridSpec,
    m: usize,
    t_window: f64,
    band: usize,
    cone: ConeSign,
    rng: &mut ChaCha8Rng,
) -> Result<SpacetimeSample> {
    let n = grid.n;
    if 2 * band >= n {
        return Err(YmhError::Parameter(format!("band {band} is not resolved by N = {n}")));
    }
    let dtau = 2.0 * PI / t_window;
    let dxi = 2.0 * PI / grid.l;
    let mut data = vec![CZERO; m * n * n * n];
    let band = band as i64;
    let wrap = |k: i64, len: usize| k.rem_euclid(len as i64) as usize;
    for a in -band..=band {
        for b in -band..=band {
            for c in -band..=band {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let xi = [a as f64 * dxi, b as f64 * dxi, c as f64 * dxi];
                let jx = japanese(xi);
                let sigma = match cone {
                    ConeSign::Plus => 1.0,
                    ConeSign::Minus => -1.0,
                    ConeSign::Either => sign_rng(rng),
                };
                for j in -(m as i64) / 2..(m as i64) / 2 {
                    let md = j as f64 * dtau - sigma * jx;
                    let amp = 1.0 / (jx * (1.0 + md * md).sqrt());
                    let idx = ((wrap(j, m) * n + wrap(a, n)) * n + wrap(b, n)) * n + wrap(c, n);
                    data[idx] = gauss(rng) * amp;
                }
            }
        }
    }
    FftNd::new(&[m, n, n, n]).inverse(&mut data);
    SpacetimeSample::new(grid, m, 0.0, t_window, Window::Hann, data)
}

/// Resolution of a probe: N³ spatial points, M time samples, spatial band
/// N/4, window T = 2π.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeSize {
    pub n: usize,
    pub m: usize,
}

impl ProbeSize {
    pub fn band(&self) -> usize {
        (self.n / 4).max(1)
    }

    fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, 2.0 * PI, crate::grid::Dealias::TwoThirds)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub id: String,
    pub tuple: Vec<f64>,
    pub admissible: bool,
    pub batch: usize,
    pub max_ratio: f64,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

const SIGN_PAIRS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Max over `batch` samples of ‖lhs‖ / Π‖rhs‖ (0 when the lhs vanishes).
///
/// For null-form estimates `signs` fixes (±, ±′); without it sample i
/// uses the i-th of the four sign pairs cyclically.
pub fn probe_estimate(
    est: &Estimate,
    size: ProbeSize,
    batch: usize,
    seed: u64,
    signs: Option<(f64, f64)>,
) -> Result<ProbeReport> {
    let grid = size.grid()?;
    let band = size.band();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..batch {
        let pair = signs.unwrap_or(SIGN_PAIRS[i % 4]);
        let mut inputs: Vec<Lattice> = Vec::with_capacity(est.factors.len());
        let mut rhs = 1.0;
        for (q, f) in est.factors.iter().enumerate() {
            let (cone, spec) = match est.kind {
                Kind::NullForm => {
                    let sg = if q == 0 { pair.0 } else { pair.1 };
                    let sign = if sg > 0.0 { Modulation::Plus } else { Modulation::Minus };
                    (ConeSign::from_sign(sg), NormSpec { sign, ..f.norm })
                }
                Kind::Product => (ConeSign::Either, f.norm),
            };
            let lat = random_sample(grid, size.m, 2.0 * PI, band, cone, &mut rng)?.spectrum().cropped(band);
            rhs *= apply(&lat, f.in_norm).norm(spec);
            inputs.push(apply(&lat, f.in_product));
        }
        let out = match est.kind {
            Kind::NullForm => b_theta(&inputs[0], &inputs[1], pair.0, pair.1)?,
            Kind::Product => lattice_product(&inputs.iter().collect::<Vec<_>>())?,
        };
        let lhs = out.norm(est.lhs);
        if lhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(ProbeReport {
        id: est.id.to_string(),
        tuple: est.exponent_tuple(),
        admissible: est.admissible(),
        batch,
        max_ratio: worst,
        n: size.n,
        m: size.m,
        seed,
    })
}

fn apply(lat: &Lattice, m: Multiplier) -> Lattice {
    match m {
        Multiplier::Identity => lat.clone(),
        _ => lat.map_spatial(|xi| m.symbol(xi)),
    }
}

/// ‖uv‖_{H^{−s₀,b₀}} ≲ ‖u‖_{H^{s₁,b₁}} ‖v‖_{H^{s₂,b₂}} for an arbitrary
/// tuple (admissibility is reported, not required).
pub fn product_estimate_probe(t: [f64; 6], size: ProbeSize, batch: usize, seed: u64) -> Result<ProbeReport> {
    let [s0, s1, s2, b0, b1, b2] = t;
    let plain =
        |s, b| Factor { in_product: Multiplier::Identity, in_norm: Multiplier::Identity, norm: NormSpec::wave(s, b) };
    let est = Estimate {
        id: "product",
        kind: Kind::Product,
        lhs: NormSpec::wave(-s0, b0),
        factors: vec![plain(s1, b1), plain(s2, b2)],
        hypotheses: vec![Hypothesis::Atlas(t)],
    };
    probe_estimate(&est, size, batch, seed, None)
}

/// ‖B_θ(u,v)‖_{H^{−σ₀,−β₀}} ≲ ‖u‖_{X^{σ₁,β₁}_±} ‖v‖_{X^{σ₂,β₂}_±′}.
pub fn nullform_estimate_probe(
    t: [f64; 6],
    signs: (f64, f64),
    size: ProbeSize,
    batch: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let [g0, g1, g2, be0, be1, be2] = t;
    let cone = |s, b| Factor {
        in_product: Multiplier::Identity,
        in_norm: Multiplier::Identity,
        norm: NormSpec::new(s, b, Modulation::Plus),
    };
    let est = Estimate {
        id: "nullform",
        kind: Kind::NullForm,
        lhs: NormSpec::wave(-g0, -be0),
        factors: vec![cone(g1, be1), cone(g2, be2)],
        hypotheses: vec![Hypothesis::Nullform(t)],
    };
    probe_estimate(&est, size, batch, seed, Some(signs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub id: String,
    pub admissible: bool,
    pub small: ProbeReport,
    pub large: ProbeReport,
}

impl GrowthRow {
    /// large / small − 1
    pub fn growth(&self) -> f64 {
        if self.small.max_ratio == 0.0 {
            return if self.large.max_ratio == 0.0 { 0.0 } else { f64::INFINITY };
        }
        self.large.max_ratio / self.small.max_ratio - 1.0
    }
}

/// Every registered estimate probed at two resolutions with the same seed.
pub fn catalog_growth(
    estimates: &[Estimate],
    small: ProbeSize,
    large: ProbeSize,
    batch: usize,
    seed: u64,
) -> Result<Vec<GrowthRow>> {
    estimates
        .iter()
        .map(|e| {
            Ok(GrowthRow {
                id: e.id.to_string(),
                admissible: e.admissible(),
                small: probe_estimate(e, small, batch, seed, None)?,
                large: probe_estimate(e, large, batch, seed, None)?,
            })
        })
        .collect()
}

/// CSV with a `# config_hash=` first line.
pub fn write_probe_csv(mut w: impl Write, config_hash: &str, reports: &[ProbeReport]) -> Result<()> {
    writeln!(w, "# config_hash={config_hash}")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["estimate", "tuple", "admissible", "batch", "max_ratio", "N", "M", "seed"])?;
    for r in reports {
        let tuple = r.tuple.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(";");
        csv.write_record([
            r.id.clone(),
            tuple,
            r.admissible.to_string(),
            r.batch.to_string(),
            format!("{:.12e}", r.max_ratio),
            r.n.to_string(),
            r.m.to_string(),
            r.seed.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearRow {
    pub t: f64,
    /// max ‖u‖_{X^{s,b}} / (‖u₀‖_{H^s} + T^ε ‖G‖_{X^{s,b−1+ε}})
    pub max_ratio: f64,
    /// same with the T^ε factor dropped
    pub max_ratio_without_teps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearReport {
    pub rows: Vec<LinearRow>,
    /// log-log slope of max_ratio against T
    pub fit_exponent: f64,
}

/// Data and forcing of one linear probe sample: û₀(k) and G as a sum of
/// g_{ω,k} e^{i(ω t + k·x)} over integer ω.
#[derive(Clone, Debug)]
struct LinearData {
    modes: Vec<([i64; 3], C64, Vec<(f64, C64)>)>,
}

fn linear_data(band: usize, g_scale: f64, u0_scale: f64, sigma: f64, dxi: f64, rng: &mut ChaCha8Rng) -> LinearData {
    let band = band as i64;
    let mut modes = Vec::new();
    for a in -band..=band {
        for b in -band..=band {
            for c in -band..=band {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let jx = japanese([a as f64 * dxi, b as f64 * dxi, c as f64 * dxi]);
                let u0 = gauss(rng) * (u0_scale / jx);
                let g: Vec<(f64, C64)> = (-(2 * band + 2)..=(2 * band + 2))
                    .map(|w| {
                        let md = w as f64 - sigma * jx;
                        (w as f64, gauss(rng) * (g_scale / (jx * (1.0 + md * md).sqrt())))
                    })
                    .collect();
                modes.push(([a, b, c], u0, g));
            }
        }
    }
    LinearData { modes }
}

/// (e^{iδt} − 1)/(iδ), continuous at δ = 0.
fn duhamel_kernel(delta: f64, t: f64) -> C64 {
    if (delta * t).abs() < 1e-8 {
        C64::new(t, 0.5 * delta * t * t)
    } else {
        (C64::from_polar(1.0, delta * t) - 1.0) / C64::new(0.0, delta)
    }
}

/// Samples of u and G on [−T, T) for (i∂_t + σ⟨∇⟩)u = G, u(0) = u₀,
/// from the exact single-mode Duhamel formula.
fn linear_samples(
    d: &LinearData,
    grid: GridSpec,
    m: usize,
    t: f64,
    sigma: f64,
) -> Result<(SpacetimeSample, SpacetimeSample)> {
    let n = grid.n;
    let dxi = 2.0 * PI / grid.l;
    let plan = FftNd::new(&[n, n, n]);
    let n3 = n * n * n;
    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
    let mut uvals = Vec::with_capacity(m * n3);
    let mut gvals = Vec::with_capacity(m * n3);
    for it in 0..m {
        let time = -t + 2.0 * t * it as f64 / m as f64;
        let mut us = vec![CZERO; n3];
        let mut gs = vec![CZERO; n3];
        for (k, u0, g) in &d.modes {
            let jx = japanese(k.map(|q| q as f64 * dxi));
            let free = C64::from_polar(1.0, sigma * time * jx);
            let mut uk = free * u0;
            let mut gk = CZERO;
            for &(w, gw) in g {
                gk += gw * C64::from_polar(1.0, w * time);
                uk += C64::new(0.0, -1.0) * free * gw * duhamel_kernel(w - sigma * jx, time);
            }
            let idx = (wrap(k[0]) * n + wrap(k[1])) * n + wrap(k[2]);
            us[idx] = uk;
            gs[idx] = gk;
        }
        plan.inverse(&mut us);
        plan.inverse(&mut gs);
        uvals.extend(us);
        gvals.extend(gs);
    }
    Ok((
        SpacetimeSample::new(grid, m, -t, 2.0 * t, Window::Hann, uvals)?,
        SpacetimeSample::new(grid, m, -t, 2.0 * t, Window::Hann, gvals)?,
    ))
}

/// Linear estimate on the slab (−T, T), with the windowed sample standing
/// in for the restriction norm (an upper bound). `forcing` and `data`
/// scale G and u₀; either may be 0.
#[allow(clippy::too_many_arguments)]
pub fn linear_estimate_probe(
    size: ProbeSize,
    spec: NormSpec,
    eps: f64,
    ts: &[f64],
    data: f64,
    forcing: f64,
    batch: usize,
    seed: u64,
) -> Result<LinearReport> {
    let grid = size.grid()?;
    let sigma = match spec.sign {
        Modulation::Plus => 1.0,
        Modulation::Minus => -1.0,
        Modulation::Wave => return Err(YmhError::Parameter("the linear estimate needs a ± sign".into())),
    };
    let dxi = 2.0 * PI / grid.l;
    let lspec = NormSpec { b: spec.b - 1.0 + eps, ..spec };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<LinearData> =
        (0..batch).map(|_| linear_data(size.band(), forcing, data, sigma, dxi, &mut rng)).collect();
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let (mut best, mut best_plain): (f64, f64) = (0.0, 0.0);
        for d in &samples {
            let (u, g) = linear_samples(d, grid, size.m, t, sigma)?;
            let lhs = u.spectrum().norm(spec);
            let u0 = (grid.l.powi(3)
                * d.modes
                    .iter()
                    .map(|(k, c, _)| japanese(k.map(|q| q as f64 * dxi)).powf(2.0 * spec.s) * c.norm_sqr())
                    .sum::<f64>())
            .sqrt();
            let gn = g.spectrum().norm(lspec);
            if lhs > 0.0 {
                best = best.max(lhs / (u0 + t.powf(eps) * gn));
                best_plain = best_plain.max(lhs / (u0 + gn));
            }
        }
        rows.push(LinearRow { t, max_ratio: best, max_ratio_without_teps: best_plain });
    }
    let ts_: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    Ok(LinearReport { fit_exponent: crate::diagnose::fit_order(&ts_, &rs), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duhamel_solves_the_mode_ode() {
        // (i∂_t + σ⟨k⟩) u = G for one mode, by a centred difference
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = linear_data(1, 1.0, 1.0, -1.0, 1.0, &mut rng);
        let (k, u0, g) = &d.modes[4];
        let jx = japanese(k.map(|q| q as f64));
        let u = |t: f64| {
            let free = C64::from_polar(1.0, -t * jx);
            let mut v = free * u0;
            for &(w, gw) in g {
                v += C64::new(0.0, -1.0) * free * gw * duhamel_kernel(w + jx, t);
            }
            v
        };
        let gt = |t: f64| g.iter().map(|&(w, gw)| gw * C64::from_polar(1.0, w * t)).sum::<C64>();
        assert!((u(0.0) - u0).norm() < 1e-15);
        let h = 1e-4;
        for t in [-0.7, 0.3, 1.1] {
            let dudt = (u(t + h) - u(t - h)) / (2.0 * h);
            let r = C64::new(0.0, 1.0) * dudt - jx * u(t) - gt(t);
            assert!(r.norm() < 1e-6 * gt(t).norm().max(1.0), "{r}");
        }
        assert!((duhamel_kernel(0.0, 0.5) - 0.5).norm() < 1e-15);
        assert!((duhamel_kernel(1e-10, 0.5) - duhamel_kernel(0.0, 0.5)).norm() < 1e-10);
    }
}
