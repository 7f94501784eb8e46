//! The five batch commands. Each writes CSV reports (first line
//! `# config_hash=…`) into the output directory and returns whether its
//! checks passed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Command, DataKind, RunConfig};
use crate::algebra::LieAlgebra;
use crate::data::{
    build_f_data, check_f_bounds, constrained_data, data_norm, finalize_lorenz, gauss_residual_with,
    lorenz_data_residual, lorenz_state, make_lorenz_potential, random_data, to_gauge_state,
};
use crate::diagnose::{compatibility_residual, convergence_study, fit_order, DiagnosticSeries};
use crate::error::Result;
use crate::evolve::{abelian_plane_wave, from_half_wave, to_half_wave, Coupling, Evolver};
use crate::grid::{Grid, GridSpec};
use crate::normlab::{
    catalog, catalog_growth, hxh_check, linear_estimate_probe, random_sample, write_probe_csv, ConeSign, NormSpec,
    ProbeSize,
};
use crate::nullform::{
    b_sigma, b_sigma_direct, nullform_trick_residual, random_algebra_field, random_real_scalar, verify_lemma1,
    BilinearSymbol, NamedSymbol, SpacetimeField,
};
use crate::snapshot::write_snapshot;
use crate::system::{recombination_residuals_with, GaugeState, MANIFEST};

/// Tolerances of the command checks.
pub const LEMMA1_TOL: f64 = 1e-9;
pub const TRICK_TOL: f64 = 1e-12;
pub const RECOMBINATION_TOL: f64 = 1e-8;
pub const B_SIGMA_TOL: f64 = 1e-11;
pub const GROWTH_TOL: f64 = 0.25;
pub const COMPAT_TOL: f64 = 1e-12;
pub const ORDER_TOL: f64 = 0.3;
pub const STABILITY_TOL: f64 = 0.2;

/// What a command produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub passed: bool,
    /// file names relative to the output directory
    pub artifacts: Vec<String>,
    /// one-line summaries for the manifest
    pub notes: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    hash: String,
    out: &'a Path,
    report: Report,
}

impl Ctx<'_> {
    /// A CSV writer whose first line is the config hash.
    fn csv(&mut self, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
        let mut f = BufWriter::new(File::create(self.out.join(name))?);
        writeln!(f, "# config_hash={}", self.hash)?;
        self.report.artifacts.push(name.to_string());
        Ok(csv::Writer::from_writer(f))
    }

    fn algebra(&self) -> Arc<LieAlgebra> {
        let kind = self.cfg.algebra;
        Arc::new(if self.cfg.abelian { LieAlgebra::abelian(kind) } else { LieAlgebra::new(kind) })
    }

    fn note(&mut self, s: String) {
        self.report.notes.push(s);
    }
}

fn e(x: f64) -> String {
    format!("{x:.12e}")
}

/// Initial state of the configured data family.
pub fn initial_state(cfg: &RunConfig, algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>) -> Result<GaugeState> {
    let d = &cfg.data;
    match d.kind {
        DataKind::Random => to_gauge_state(&random_data(algebra, grid, cfg.seed, d.band, d.amplitude, cfg.p)?),
        DataKind::Constrained => {
            to_gauge_state(&constrained_data(algebra, grid, cfg.seed, d.band, d.amplitude, cfg.p, d.higgs)?)
        }
        DataKind::PlaneWave => Ok(abelian_plane_wave(algebra, grid, d.amplitude, 0.0)),
        DataKind::Zero => Ok(GaugeState::zeros(algebra, grid)),
    }
}

fn evolver(cfg: &RunConfig) -> Result<Evolver> {
    Ok(Evolver::new(cfg.p, Coupling::Full)?.with_variant(cfg.variant))
}

pub fn run_command(command: Command, cfg: &RunConfig, hash: &str, out: &Path) -> Result<Report> {
    let mut ctx = Ctx { cfg, hash: hash.to_string(), out, report: Report { passed: true, ..Report::default() } };
    match command {
        Command::Simulate => simulate(&mut ctx)?,
        Command::VerifyIdentities => verify_identities(&mut ctx)?,
        Command::ProbeEstimates => probe_estimates(&mut ctx)?,
        Command::Converge => converge(&mut ctx)?,
        Command::DataCheck => data_check(&mut ctx)?,
    }
    Ok(ctx.report)
}

fn simulate(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let alg = ctx.algebra();
    let grid = Grid::new(cfg.grid);
    let s0 = initial_state(cfg, &alg, &grid)?;
    let ev = evolver(cfg)?;
    let last = cfg.evolve.steps();
    std::fs::create_dir_all(ctx.out.join("snapshots"))?;
    let mut series = DiagnosticSeries::default();
    let mut snaps = Vec::new();
    let snap_every = if cfg.snapshot_stride == 0 { last } else { cfg.snapshot_stride };
    let (hash, out) = (ctx.hash.clone(), ctx.out);
    ev.evolve_with(&to_half_wave(&s0), &cfg.evolve, |k, h| {
        let at_snap = k % snap_every == 0 || k == last;
        if k % cfg.stride != 0 && k != last && !at_snap {
            return Ok(());
        }
        let state = from_half_wave(h);
        if k % cfg.stride == 0 || k == last {
            series.push(h.time, &state, cfg.p, cfg.variant)?;
        }
        if at_snap {
            let name = format!("snapshots/state_{k:06}");
            write_snapshot(&out.join(&name), &MANIFEST, &state.fields(), h.time, &hash)?;
            snaps.push(name);
        }
        Ok(())
    })?;
    for s in snaps {
        ctx.report.artifacts.push(format!("{s}.ymh"));
        ctx.report.artifacts.push(format!("{s}.manifest"));
    }
    let mut w = ctx.csv("diagnostics.csv")?;
    w.write_record(["t", "energy", "conserved_energy", "lorenz", "compat", "gauss"])?;
    for i in 0..series.len() {
        w.write_record([
            e(series.times[i]),
            e(series.energy[i]),
            e(series.conserved[i]),
            e(series.lorenz_residual[i]),
            e(series.compat_residual[i]),
            e(series.gauss_residual[i]),
        ])?;
    }
    w.flush()?;
    ctx.note(format!(
        "steps={last} energy_drift={} conserved_drift={}",
        e(series.drift()),
        e(series.conserved_drift())
    ));
    Ok(())
}

fn verify_identities(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let alg = ctx.algebra();
    let grid = Grid::new(cfg.grid);
    let band = cfg.data.band;
    let amp = if cfg.data.amplitude > 0.0 { cfg.data.amplitude } else { 1.0 };
    let mut rows: Vec<(String, u64, f64, f64)> = Vec::new();
    for i in 0..cfg.verify_seeds as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let a = make_lorenz_potential(&alg, &grid, seed, band, amp);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0051);
        let psi = SpacetimeField::new(
            random_algebra_field(&alg, &grid, band, amp, &mut rng),
            random_algebra_field(&alg, &grid, band, amp, &mut rng),
        );
        let l1 = verify_lemma1(&a, &psi)?;
        rows.push(("lemma1_frak".into(), seed, l1.frak, LEMMA1_TOL));
        rows.push(("lemma1_time".into(), seed, l1.time, LEMMA1_TOL));
        rows.push(("nullform_trick".into(), seed, nullform_trick_residual(&psi)?, TRICK_TOL));
        let state = lorenz_state(&alg, &grid, seed, band, amp)?;
        let r = recombination_residuals_with(&state, cfg.p, cfg.variant)?;
        rows.push(("recombination".into(), seed, r.max(), RECOMBINATION_TOL));
    }
    // the direct double sum is O(N⁶), so B_σ is checked on N ≤ 8
    let small = Grid::new(GridSpec::new(cfg.grid.n.min(8), cfg.grid.l, cfg.grid.dealias)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xb5);
    let (u, v) = (random_real_scalar(&small, 1, 1.0, &mut rng), random_real_scalar(&small, 1, 1.0, &mut rng));
    for n in [NamedSymbol::One, NamedSymbol::Q0, NamedSymbol::Q0i(0), NamedSymbol::Qij(0, 1)] {
        let fast = b_sigma(&BilinearSymbol::named(n), &u, &v)?;
        let slow = b_sigma_direct(n, &u, &v)?;
        let rel = fast.sub(&slow)?.l2_norm() / slow.l2_norm().max(f64::MIN_POSITIVE);
        let label = match n {
            NamedSymbol::One => "one".to_string(),
            NamedSymbol::Q0 => "q0".to_string(),
            NamedSymbol::Q0i(i) => format!("q0{}", i + 1),
            NamedSymbol::Qij(i, j) => format!("q{}{}", i + 1, j + 1),
            NamedSymbol::Angle => "angle".to_string(),
        };
        rows.push((format!("b_sigma_{label}"), cfg.seed, rel, B_SIGMA_TOL));
    }
    let mut w = ctx.csv("identities.csv")?;
    w.write_record(["check", "seed", "residual", "tolerance", "pass"])?;
    let mut failed = 0;
    for (name, seed, val, tol) in &rows {
        let ok = *val < *tol;
        failed += usize::from(!ok);
        w.write_record([name.clone(), seed.to_string(), e(*val), e(*tol), ok.to_string()])?;
    }
    w.flush()?;
    ctx.report.passed = failed == 0;
    ctx.note(format!("checks={} failed={failed}", rows.len()));
    Ok(())
}

fn probe_estimates(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let all = catalog(cfg.eps);
    let chosen: Vec<_> = if cfg.probe.estimates.is_empty() {
        all
    } else {
        let mut v = Vec::new();
        for id in &cfg.probe.estimates {
            match all.iter().find(|e| e.id == id) {
                Some(e) => v.push(e.clone()),
                None => {
                    return Err(crate::YmhError::Config { line: 0, msg: format!("unknown estimate '{id}'") });
                }
            }
        }
        v
    };
    let small = ProbeSize { n: cfg.probe.small_n, m: cfg.probe.small_n };
    let large = ProbeSize { n: cfg.probe.large_n, m: cfg.probe.large_n };
    let rows = catalog_growth(&chosen, small, large, cfg.probe.batch, cfg.seed)?;

    let reports: Vec<_> = rows.iter().flat_map(|r| [r.small.clone(), r.large.clone()]).collect();
    let f = BufWriter::new(File::create(ctx.out.join("probes.csv"))?);
    write_probe_csv(f, &ctx.hash, &reports)?;
    ctx.report.artifacts.push("probes.csv".into());

    let mut worst: f64 = f64::NEG_INFINITY;
    let mut w = ctx.csv("growth.csv")?;
    w.write_record(["estimate", "admissible", "ratio_small", "ratio_large", "growth", "pass"])?;
    for r in &rows {
        let g = r.growth();
        worst = worst.max(g);
        w.write_record([
            r.id.clone(),
            r.admissible.to_string(),
            e(r.small.max_ratio),
            e(r.large.max_ratio),
            e(g),
            (g < GROWTH_TOL).to_string(),
        ])?;
    }
    w.flush()?;

    let s = 1.0 - cfg.eps;
    let b = 0.5 + 2.0 * cfg.eps;
    let grid = GridSpec::new(small.n, 2.0 * std::f64::consts::PI, crate::grid::Dealias::TwoThirds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4878);
    let mut hxh_worst: f64 = 0.0;
    let mut w = ctx.csv("hxh.csv")?;
    w.write_record(["sample", "b", "h_norm", "x_plus", "x_minus", "violation"])?;
    for i in 0..cfg.probe.batch.min(16) {
        let u = random_sample(grid, small.m, 2.0 * std::f64::consts::PI, small.band(), ConeSign::Either, &mut rng)?;
        for bb in [b, b - 1.0] {
            let r = hxh_check(&u, s, bb);
            hxh_worst = hxh_worst.max(r.max_violation);
            w.write_record([i.to_string(), e(bb), e(r.h_norm), e(r.x_plus), e(r.x_minus), e(r.max_violation)])?;
        }
    }
    w.flush()?;

    if cfg.probe.linear {
        let ts = [1.0, 0.5, 0.25];
        let rep = linear_estimate_probe(
            small,
            NormSpec::default(),
            cfg.eps,
            &ts,
            1.0,
            1.0,
            cfg.probe.batch.min(20),
            cfg.seed,
        )?;
        let mut w = ctx.csv("linear.csv")?;
        w.write_record(["T", "max_ratio", "max_ratio_without_teps"])?;
        for r in &rep.rows {
            w.write_record([e(r.t), e(r.max_ratio), e(r.max_ratio_without_teps)])?;
        }
        w.flush()?;
        ctx.note(format!("linear_fit_exponent={}", e(rep.fit_exponent)));
    }
    ctx.report.passed = worst < GROWTH_TOL && hxh_worst == 0.0;
    ctx.note(format!("estimates={} max_growth={} hxh_violation={}", rows.len(), e(worst), e(hxh_worst)));
    Ok(())
}

fn converge(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let alg = ctx.algebra();
    let grid = Grid::new(cfg.grid);
    let s0 = initial_state(cfg, &alg, &grid)?;
    let ev = evolver(cfg)?;
    let rows = convergence_study(&ev, &s0, &cfg.evolve, &cfg.dts)?;
    let mut w = ctx.csv("converge.csv")?;
    w.write_record(["dt", "energy_drift", "conserved_drift", "lorenz", "compat", "gauss"])?;
    for r in &rows {
        w.write_record([e(r.dt), e(r.drift), e(r.conserved_drift), e(r.lorenz), e(r.compat), e(r.gauss)])?;
    }
    w.flush()?;
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let nominal = cfg.evolve.integrator.order();
    let series: [(&str, Vec<f64>); 5] = [
        ("energy_drift", rows.iter().map(|r| r.drift).collect()),
        ("conserved_drift", rows.iter().map(|r| r.conserved_drift).collect()),
        ("lorenz", rows.iter().map(|r| r.lorenz).collect()),
        ("compat", rows.iter().map(|r| r.compat).collect()),
        ("gauss", rows.iter().map(|r| r.gauss).collect()),
    ];
    let mut w = ctx.csv("fits.csv")?;
    w.write_record(["quantity", "fitted_order", "nominal"])?;
    let mut ok = true;
    for (name, v) in &series {
        let o = fit_order(&dts, v);
        if matches!(*name, "lorenz" | "compat") && !((o - nominal).abs() <= ORDER_TOL) {
            ok = false;
        }
        w.write_record([name.to_string(), e(o), e(nominal)])?;
    }
    w.flush()?;
    if cfg.check_order {
        ctx.report.passed = ok;
    }
    ctx.note(format!("constraint_orders_within_tolerance={ok}"));
    Ok(())
}

fn data_check(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let alg = ctx.algebra();
    let fine = Grid::new(cfg.grid);
    let coarse_spec = GridSpec::new(cfg.grid.n / 2, cfg.grid.l, cfg.grid.dealias)?;
    let coarse = (2 * cfg.data.band <= coarse_spec.band_limit()).then(|| Grid::new(coarse_spec));
    let amp = if cfg.data.amplitude > 0.0 { cfg.data.amplitude } else { 1.0 };
    let mut w = ctx.csv("data_check.csv")?;
    w.write_record([
        "seed",
        "N",
        "compat",
        "lorenz",
        "finalize_change",
        "gauss",
        "f_printed",
        "f_corrected",
        "fdot_printed",
        "fdot_corrected",
    ])?;
    let mut ok = true;
    for i in 0..cfg.check_seeds as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let mut corrected = Vec::new();
        for grid in std::iter::once(&fine).chain(coarse.as_ref()) {
            let d = random_data(&alg, grid, seed, cfg.data.band, amp, cfg.p)?;
            let compat = compatibility_residual(&to_gauge_state(&d)?)?;
            let again = finalize_lorenz(&d);
            let change = d
                .fields()
                .iter()
                .zip(again.fields())
                .map(|(x, y)| x.sub(y).map(|z| z.l2_norm()))
                .try_fold(0.0f64, |m, r| r.map(|v| m.max(v)))?;
            let (f, fdot) = build_f_data(&d)?;
            let gauss = gauss_residual_with(&d, &f, cfg.variant)?;
            let r = check_f_bounds(&d, &f, &fdot);
            ok &= compat < COMPAT_TOL
                && change <= 1e-14 * data_norm(&d).max(1.0)
                && r.f_corrected.is_finite()
                && r.fdot_corrected.is_finite();
            corrected.push([r.f_corrected, r.fdot_corrected]);
            w.write_record([
                seed.to_string(),
                grid.n().to_string(),
                e(compat),
                e(lorenz_data_residual(&d)),
                e(change),
                e(gauss),
                e(r.f_printed),
                e(r.f_corrected),
                e(r.fdot_printed),
                e(r.fdot_corrected),
            ])?;
        }
        if let [a, b] = corrected[..] {
            for q in 0..2 {
                ok &= (a[q] - b[q]).abs() <= STABILITY_TOL * a[q].max(b[q]);
            }
        }
    }
    w.flush()?;
    ctx.report.passed = ok;
    ctx.note(format!("seeds={} resolutions={}", cfg.check_seeds, 1 + usize::from(coarse.is_some())));
    Ok(())
}
