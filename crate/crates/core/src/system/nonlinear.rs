//! Right-hand sides Λ_β, Γ_{βγ}, Φ and their null / non-null split.
//!
//! The evaluator works on real coefficient arrays in physical space. All
//! products at one nesting level are summed before a single dealias, which
//! is legitimate because truncation is linear. The double commutators
//! [A^α, [A_α, X]] are applied through the pointwise operator
//! M = Σ_α η^{αα} ad(A_α)², and [φ, [φ, X]] through ad(φ)².

use crate::algebra::LieAlgebra;
use crate::error::{Result, YmhError};
use crate::grid::{AlgebraField, Grid, Repr, ScalarField, Symbol, C64};
use crate::nullform::{eta, q0_bracket_grad, qab_bracket_grad, FrakOperator, SpacetimeField};

use super::{pair_index, GaugeState, PAIRS};

/// Which groups of printed terms to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terms {
    /// bilinear terms carrying null structure
    pub null: bool,
    /// everything else, including the Higgs potential
    pub rest: bool,
}

impl Terms {
    pub const ALL: Self = Self { null: true, rest: true };
    pub const NULL: Self = Self { null: true, rest: false };
    pub const REST: Self = Self { null: false, rest: true };
}

/// Which reading of the system to evaluate.
///
/// `Printed` is literal. `Consistent` drops the cubic −[A^α, [A_α, A_β]] from
/// Λ_β (already inside −[A^α, F_{αβ}]) and flips the Higgs current in Λ_β
/// so that Γ_{βγ} is its covariant curl. Only `Consistent` keeps F = F(A)
/// along the flow and conserves a positive energy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variant {
    #[default]
    Printed,
    Consistent,
}

impl Variant {
    /// Sign carried by the Higgs current in Λ and in the Gauss constraint.
    pub fn higgs_sign(self) -> f64 {
        match self {
            Self::Printed => 1.0,
            Self::Consistent => -1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "printed" => Ok(Self::Printed),
            "consistent" => Ok(Self::Consistent),
            other => Err(YmhError::Parameter(format!("unknown variant '{other}'"))),
        }
    }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if (2.0..5.0).contains(&p) {
        Ok(())
    } else {
        Err(YmhError::Exponent(p))
    }
}

#[derive(Clone, Debug)]
pub struct Nonlinearity {
    pub lambda: [AlgebraField; 4],
    pub gamma: [AlgebraField; 6],
    pub phi: AlgebraField,
}

impl Nonlinearity {
    fn fields(&self) -> impl Iterator<Item = &AlgebraField> {
        self.lambda.iter().chain(&self.gamma).chain(std::iter::once(&self.phi))
    }
}

/// Field order used by the raw evaluator: A₀..A₃, F in [`PAIRS`] order, φ.
pub(crate) const NFIELDS: usize = 11;

/// Evaluates the nonlinearities on spectral inputs.
///
/// `u[f][a]` and `dtu[f][a]` are spectral coefficient arrays of field `f`
/// and algebra component `a`. The outputs are truncated spectra in the
/// same layout.
pub(crate) fn evaluate_spectral(
    grid: &Grid,
    alg: &LieAlgebra,
    p: f64,
    u: &[Vec<Vec<C64>>],
    dtu: &[Vec<Vec<C64>>],
    terms: Terms,
    variant: Variant,
) -> Vec<Vec<Vec<C64>>> {
    let d = alg.dim();
    let h = variant.higgs_sign();
    let n = grid.len();

    // value and ∂_μ (μ = 0 is time) of every field
    let mut specs: Vec<Vec<C64>> = Vec::with_capacity(NFIELDS * d * 5);
    for f in 0..NFIELDS {
        for a in 0..d {
            specs.push(u[f][a].clone());
            specs.push(dtu[f][a].clone());
            for j in 0..3 {
                let mut s = u[f][a].clone();
                grid.apply_symbol(Symbol::Deriv(j), &mut s);
                specs.push(s);
            }
        }
    }
    let flat = to_real(grid, specs);
    // phys[f][slot][a]: slot 0 value, slot 1 + μ for ∂_μ
    let mut it = flat.into_iter();
    let mut phys: Vec<Vec<Vec<Vec<f64>>>> = vec![vec![Vec::with_capacity(d); 5]; NFIELDS];
    for field in phys.iter_mut() {
        for _ in 0..d {
            for slot in field.iter_mut() {
                slot.push(it.next().expect("sized above"));
            }
        }
    }
    let val = |f: usize| -> &[Vec<f64>] { &phys[f][0] };
    let der = |f: usize, mu: usize| -> &[Vec<f64>] { &phys[f][1 + mu] };
    let fidx = |al: usize, be: usize| pair_index(al, be).map(|(i, s)| (4 + i, s));
    const PHI: usize = 10;

    let zeros = || vec![vec![0.0; n]; d];
    let mut out: Vec<Vec<Vec<f64>>> = (0..NFIELDS).map(|_| zeros()).collect();

    if terms.null {
        for be in 0..4 {
            for al in 0..4 {
                acc_br(alg, &mut out[be], -eta(al), val(al), der(be, al));
            }
        }
        for al in 0..4 {
            acc_br(alg, &mut out[PHI], -2.0 * eta(al), val(al), der(PHI, al));
        }
        for (s, &(be, ga)) in PAIRS.iter().enumerate() {
            let o = &mut out[4 + s];
            for al in 0..4 {
                let e = eta(al);
                acc_br(alg, o, -2.0 * e, val(al), der(4 + s, al));
                acc_br(alg, o, 2.0 * e, der(al, ga), der(be, al));
                acc_br(alg, o, -2.0 * e, der(al, be), der(ga, al));
                acc_br(alg, o, 2.0 * e, der(be, al), der(ga, al));
                acc_br(alg, o, 2.0 * e, der(al, be), der(al, ga));
            }
            acc_br(alg, o, 2.0, der(PHI, be), der(PHI, ga));
        }
    }

    if terms.rest {
        // quadratic intermediates, dealiased
        let mut aa: Vec<Vec<Vec<f64>>> = PAIRS
            .iter()
            .map(|&(al, be)| {
                let mut o = zeros();
                acc_br(alg, &mut o, 1.0, val(al), val(be));
                o
            })
            .collect();
        let mut aphi: Vec<Vec<Vec<f64>>> = (0..4)
            .map(|be| {
                let mut o = zeros();
                acc_br(alg, &mut o, 1.0, val(be), val(PHI));
                o
            })
            .collect();
        let mut m = casimir(alg, n, (0..4).map(|al| (eta(al), val(al))));
        let mut mphi = casimir(alg, n, std::iter::once((1.0, val(PHI))));
        {
            let mut all: Vec<&mut Vec<f64>> = Vec::new();
            all.extend(aa.iter_mut().flatten());
            all.extend(aphi.iter_mut().flatten());
            all.extend(m.iter_mut());
            all.extend(mphi.iter_mut());
            dealias_refs(grid, all);
        }
        let aa_at = |al: usize, be: usize| -> Option<(&[Vec<f64>], f64)> {
            pair_index(al, be).map(|(i, s)| (aa[i].as_slice(), s))
        };

        for be in 0..4 {
            let o = &mut out[be];
            for al in 0..4 {
                if let Some((fi, s)) = fidx(al, be) {
                    acc_br(alg, o, -eta(al) * s, val(al), val(fi));
                }
            }
            acc_br(alg, o, -h, val(PHI), der(PHI, be));
            if variant == Variant::Printed {
                acc_sym(alg, o, -1.0, &m, val(be));
            }
            acc_sym(alg, o, h, &mphi, val(be));
        }

        {
            let o = &mut out[PHI];
            acc_sym(alg, o, -1.0, &m, val(PHI));
            let ph = val(PHI);
            for i in 0..n {
                let r2: f64 = (0..d).map(|a| ph[a][i] * ph[a][i]).sum();
                let w = if p == 3.0 { r2 } else { r2.sqrt().powf(p - 1.0) };
                for a in 0..d {
                    o[a][i] += w * ph[a][i];
                }
            }
        }

        for (s, &(be, ga)) in PAIRS.iter().enumerate() {
            let fs = 4 + s;
            let o = &mut out[fs];
            acc_sym(alg, o, -1.0, &m, val(fs));
            for al in 0..4 {
                let e = eta(al);
                if let (Some((fab, s1)), Some((aag, s2))) = (fidx(al, be), aa_at(al, ga)) {
                    acc_br(alg, o, 2.0 * e * s1 * s2, val(fab), aag);
                }
                if let (Some((fag, s1)), Some((aab, s2))) = (fidx(al, ga), aa_at(al, be)) {
                    acc_br(alg, o, -2.0 * e * s1 * s2, val(fag), aab);
                }
                if let (Some((x, s1)), Some((y, s2))) = (aa_at(al, be), aa_at(al, ga)) {
                    acc_br(alg, o, -2.0 * e * s1 * s2, x, y);
                }
            }
            acc_br(alg, o, 2.0, der(PHI, be), &aphi[ga]);
            acc_br(alg, o, -2.0, der(PHI, ga), &aphi[be]);
            acc_sym(alg, o, -1.0, &mphi, val(fs));
            acc_br(alg, o, 2.0, &aphi[be], &aphi[ga]);
        }
    }

    let flat: Vec<Vec<f64>> = out.into_iter().flatten().collect();
    let mut spec = to_spectral(grid, flat);
    for s in spec.iter_mut() {
        grid.truncate(s);
    }
    let mut it = spec.into_iter();
    (0..NFIELDS).map(|_| (0..d).map(|_| it.next().expect("sized")).collect()).collect()
}

/// out += c [x, y] pointwise.
fn acc_br(alg: &LieAlgebra, out: &mut [Vec<f64>], c: f64, x: &[Vec<f64>], y: &[Vec<f64>]) {
    for &(a, b, k, s) in alg.structure_constants() {
        let cs = c * s;
        let (xa, xb, ya, yb) = (&x[a], &x[b], &y[a], &y[b]);
        for (i, o) in out[k].iter_mut().enumerate() {
            *o += cs * (xa[i] * yb[i] - xb[i] * ya[i]);
        }
    }
}

fn sym_slot(d: usize, r: usize, c: usize) -> usize {
    let (r, c) = if r <= c { (r, c) } else { (c, r) };
    r * d - r * (r + 1) / 2 + c
}

/// Σ w_j ad(x_j)² as a symmetric d×d field (upper triangle).
fn casimir<'a>(alg: &LieAlgebra, n: usize, xs: impl Iterator<Item = (f64, &'a [Vec<f64>])>) -> Vec<Vec<f64>> {
    let d = alg.dim();
    let mut m = vec![vec![0.0; n]; d * (d + 1) / 2];
    for (w, x) in xs {
        // ad(x)[k][b] as arrays
        let mut ad = vec![vec![0.0; n]; d * d];
        for &(a, b, k, s) in alg.structure_constants() {
            for i in 0..n {
                ad[k * d + b][i] += s * x[a][i];
                ad[k * d + a][i] -= s * x[b][i];
            }
        }
        for r in 0..d {
            for c in r..d {
                let slot = &mut m[sym_slot(d, r, c)];
                for q in 0..d {
                    let (ar, aq) = (&ad[r * d + q], &ad[q * d + c]);
                    for i in 0..n {
                        slot[i] += w * ar[i] * aq[i];
                    }
                }
            }
        }
    }
    m
}

/// out += c M x pointwise for symmetric M.
fn acc_sym(alg: &LieAlgebra, out: &mut [Vec<f64>], c: f64, m: &[Vec<f64>], x: &[Vec<f64>]) {
    let d = alg.dim();
    if alg.is_abelian() {
        return;
    }
    for r in 0..d {
        for q in 0..d {
            let mm = &m[sym_slot(d, r, q)];
            let xq = &x[q];
            for (i, o) in out[r].iter_mut().enumerate() {
                *o += c * mm[i] * xq[i];
            }
        }
    }
}

fn to_real(grid: &Grid, specs: Vec<Vec<C64>>) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(specs.len());
    let mut it = specs.chunks(2);
    for pair in &mut it {
        if pair.len() == 2 {
            let (a, b) = grid.inverse_real_pair(&pair[0], &pair[1]);
            out.push(a);
            out.push(b);
        } else {
            let zero = vec![C64::new(0.0, 0.0); pair[0].len()];
            let (a, _) = grid.inverse_real_pair(&pair[0], &zero);
            out.push(a);
        }
    }
    out
}

fn to_spectral(grid: &Grid, reals: Vec<Vec<f64>>) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(reals.len());
    for pair in reals.chunks(2) {
        if pair.len() == 2 {
            let (a, b) = grid.forward_real_pair(&pair[0], &pair[1]);
            out.push(a);
            out.push(b);
        } else {
            let zero = vec![0.0; pair[0].len()];
            out.push(grid.forward_real_pair(&pair[0], &zero).0);
        }
    }
    out
}

fn dealias_refs(grid: &Grid, mut arrays: Vec<&mut Vec<f64>>) {
    let mut spare: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < arrays.len() {
        if i + 1 < arrays.len() {
            let (lo, hi) = arrays.split_at_mut(i + 1);
            grid.dealias_real_pair(lo[i], hi[0]);
        } else {
            spare.resize(arrays[i].len(), 0.0);
            grid.dealias_real_pair(arrays[i], &mut spare);
        }
        i += 2;
    }
}

fn spectral_inputs(state: &GaugeState) -> (Vec<Vec<Vec<C64>>>, Vec<Vec<Vec<C64>>>) {
    let take = |f: &AlgebraField| -> Vec<Vec<C64>> { f.comps().iter().map(|c| c.to_spectral().into_data()).collect() };
    let u = state.a.iter().chain(&state.f).chain(std::iter::once(&state.phi)).map(take).collect();
    let dtu = state.dta.iter().chain(&state.dtf).chain(std::iter::once(&state.dtphi)).map(take).collect();
    (u, dtu)
}

/// Evaluates the printed right-hand sides (or a subset of their terms).
pub fn nonlinearities(state: &GaugeState, p: f64, terms: Terms) -> Result<Nonlinearity> {
    nonlinearities_with(state, p, terms, Variant::Printed)
}

pub fn nonlinearities_with(state: &GaugeState, p: f64, terms: Terms, variant: Variant) -> Result<Nonlinearity> {
    check_exponent(p)?;
    let grid = state.grid().clone();
    let alg = state.algebra().clone();
    let (u, dtu) = spectral_inputs(state);
    let raw = evaluate_spectral(&grid, &alg, p, &u, &dtu, terms, variant);
    let mut fields = raw.into_iter().map(|comps| {
        let comps = comps.into_iter().map(|c| ScalarField::new(&grid, Repr::Spectral, c).into_physical()).collect();
        AlgebraField::from_components(&alg, comps).expect("dimension matches")
    });
    let lambda = std::array::from_fn(|_| fields.next().expect("11 fields"));
    let gamma = std::array::from_fn(|_| fields.next().expect("11 fields"));
    let phi = fields.next().expect("11 fields");
    Ok(Nonlinearity { lambda, gamma, phi })
}

pub fn lambda(state: &GaugeState, p: f64) -> Result<[AlgebraField; 4]> {
    Ok(nonlinearities(state, p, Terms::ALL)?.lambda)
}

pub fn gamma(state: &GaugeState, p: f64) -> Result<[AlgebraField; 6]> {
    Ok(nonlinearities(state, p, Terms::ALL)?.gamma)
}

pub fn phi_rhs(state: &GaugeState, p: f64) -> Result<AlgebraField> {
    Ok(nonlinearities(state, p, Terms::ALL)?.phi)
}

/// The null-form parts ⁽¹⁾ (built from 𝔔 and the Q's) and the remaining
/// parts ⁽²⁾.
#[derive(Clone, Debug)]
pub struct Split {
    pub first: Nonlinearity,
    pub second: Nonlinearity,
}

/// Builds the ⁽¹⁾ parts literally from the null operators. The ⁽²⁾ parts
/// are the remaining printed terms.
pub fn split(state: &GaugeState, p: f64) -> Result<Split> {
    split_with(state, p, Variant::Printed)
}

/// Γ⁽¹⁾ is the same for both variants; Λ has no Higgs null term.
pub fn split_with(state: &GaugeState, p: f64, variant: Variant) -> Result<Split> {
    check_exponent(p)?;
    let second = nonlinearities_with(state, p, Terms::REST, variant)?;

    let pot = state.potential();
    let inv: [SpacetimeField<AlgebraField>; 4] = std::array::from_fn(|al| pot[al].multiplier(Symbol::InvAbs));
    let frak = FrakOperator::new(&inv);
    // 𝔔[|∇|⁻¹∂_j A, ·] = 𝔔[R_j A, ·]
    let frak_d: Vec<FrakOperator> =
        (0..3).map(|j| FrakOperator::new(&std::array::from_fn(|al| pot[al].multiplier(Symbol::Riesz(j))))).collect();
    let grad_a: Vec<[AlgebraField; 4]> = pot.iter().map(|x| x.grad()).collect();
    let grad_phi = state.higgs().grad();
    let grad_f: Vec<[AlgebraField; 4]> = (0..6).map(|s| state.curvature(s).grad()).collect();

    let lambda: [AlgebraField; 4] = {
        let mut v = Vec::with_capacity(4);
        for g in &grad_a {
            v.push(frak.apply(g)?.scale(-1.0));
        }
        v.try_into().expect("four")
    };
    let phi = frak.apply(&grad_phi)?.scale(-2.0);

    // Q_{ab}[A^α, A_α] = Σ_α η^{αα} Q_{ab}[A_α, A_α]
    let contracted = |x: usize, y: usize| -> Result<AlgebraField> {
        let mut o = AlgebraField::zeros(state.algebra(), state.grid(), Repr::Physical);
        for (al, g) in grad_a.iter().enumerate() {
            o.axpy(eta(al), &qab_bracket_grad(g, g, x, y)?)?;
        }
        Ok(o)
    };

    let mut gamma = Vec::with_capacity(6);
    for (s, &(b, c)) in PAIRS.iter().enumerate() {
        let mut g = frak.apply(&grad_f[s])?.scale(-2.0);
        if b == 0 {
            let i = c;
            g.axpy(2.0, &frak_d[i - 1].apply(&grad_a[0])?)?;
            for j in 1..4 {
                g.axpy(-2.0, &qab_bracket_grad(&grad_a[j], &grad_a[i], 0, j)?)?;
            }
            g.axpy(2.0, &q0_bracket_grad(&grad_a[0], &grad_a[i])?)?;
        } else {
            let (i, j) = (b, c);
            g.axpy(2.0, &frak_d[j - 1].apply(&grad_a[i])?)?;
            g.axpy(-2.0, &frak_d[i - 1].apply(&grad_a[j])?)?;
            g.axpy(2.0, &q0_bracket_grad(&grad_a[i], &grad_a[j])?)?;
        }
        g.axpy(1.0, &contracted(b, c)?)?;
        g.axpy(1.0, &qab_bracket_grad(&grad_phi, &grad_phi, b, c)?)?;
        gamma.push(g);
    }

    let first = Nonlinearity { lambda, gamma: gamma.try_into().expect("six"), phi };
    Ok(Split { first, second })
}

/// Relative residuals of ⁽¹⁾ + ⁽²⁾ against the unsplit evaluation, maximized
/// over components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecombinationReport {
    pub lambda: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl RecombinationReport {
    pub fn max(&self) -> f64 {
        self.lambda.max(self.gamma).max(self.phi)
    }
}

pub fn recombination_residuals(state: &GaugeState, p: f64) -> Result<RecombinationReport> {
    recombination_residuals_with(state, p, Variant::Printed)
}

pub fn recombination_residuals_with(state: &GaugeState, p: f64, variant: Variant) -> Result<RecombinationReport> {
    let full = nonlinearities_with(state, p, Terms::ALL, variant)?;
    let parts = split_with(state, p, variant)?;
    let scale = full.fields().map(|f| f.l2_norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let res = |x: &AlgebraField, y1: &AlgebraField, y2: &AlgebraField| -> Result<f64> {
        let e = x.sub(y1)?.sub(y2)?.l2_norm();
        Ok(if e == 0.0 { 0.0 } else { e / scale })
    };
    let mut rep = RecombinationReport { lambda: 0.0, gamma: 0.0, phi: 0.0 };
    for i in 0..4 {
        rep.lambda = rep.lambda.max(res(&full.lambda[i], &parts.first.lambda[i], &parts.second.lambda[i])?);
    }
    for i in 0..6 {
        rep.gamma = rep.gamma.max(res(&full.gamma[i], &parts.first.gamma[i], &parts.second.gamma[i])?);
    }
    rep.phi = res(&full.phi, &parts.first.phi, &parts.second.phi)?;
    Ok(rep)
}
