//! Null forms, the Riesz-transform operator 𝔔, bilinear symbols and
//! numeric checks of the symbol and angle lemmas.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::LieAlgebra;
use crate::error::{Result, YmhError};
use crate::grid::{AlgebraField, Grid, Repr, ScalarField, Symbol, C64, CZERO};

/// Metric diag(−1, 1, 1, 1).
pub fn eta(alpha: usize) -> f64 {
    if alpha == 0 {
        -1.0
    } else {
        1.0
    }
}

/// ε_{ijk} with ε_{123} = 1 (indices 0-based here).
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    if i == j || j == k || i == k {
        return 0.0;
    }
    let inversions = (i > j) as u8 + (i > k) as u8 + (j > k) as u8;
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub trait Spatial: Clone {
    fn partial(&self, j: usize) -> Self;
    fn multiplier(&self, sym: Symbol) -> Self;
}

impl Spatial for ScalarField {
    fn partial(&self, j: usize) -> Self {
        ScalarField::partial(self, j)
    }
    fn multiplier(&self, sym: Symbol) -> Self {
        ScalarField::multiplier(self, sym)
    }
}

impl Spatial for AlgebraField {
    fn partial(&self, j: usize) -> Self {
        AlgebraField::partial(self, j)
    }
    fn multiplier(&self, sym: Symbol) -> Self {
        AlgebraField::multiplier(self, sym)
    }
}

/// A field together with its time derivative.
#[derive(Clone, Debug)]
pub struct SpacetimeField<T> {
    pub u: T,
    pub dt: T,
}

impl<T: Spatial> SpacetimeField<T> {
    pub fn new(u: T, dt: T) -> Self {
        Self { u, dt }
    }

    /// ∂_α, with ∂₀ read from the stored time derivative.
    pub fn d(&self, alpha: usize) -> T {
        if alpha == 0 {
            self.dt.clone()
        } else {
            self.u.partial(alpha - 1)
        }
    }

    /// All four derivatives ∂₀..∂₃.
    pub fn grad(&self) -> [T; 4] {
        std::array::from_fn(|a| self.d(a))
    }

    pub fn multiplier(&self, sym: Symbol) -> Self {
        Self { u: self.u.multiplier(sym), dt: self.dt.multiplier(sym) }
    }
}

fn distinct(alpha: usize, beta: usize) -> Result<()> {
    if alpha == beta {
        Err(YmhError::RepeatedIndex(alpha, beta))
    } else {
        Ok(())
    }
}

/// Q₀(u, v) = −∂ₜu ∂ₜv + Σ ∂ᵢu ∂ᵢv for scalar fields.
pub fn q0(u: &SpacetimeField<ScalarField>, v: &SpacetimeField<ScalarField>) -> Result<ScalarField> {
    let mut out = u.d(0).product(&v.d(0))?.scale(C64::new(-1.0, 0.0));
    for a in 1..4 {
        out.axpy(C64::new(1.0, 0.0), &u.d(a).product(&v.d(a))?)?;
    }
    Ok(out)
}

/// Q_{αβ}(u, v) = ∂_αu ∂_βv − ∂_βu ∂_αv for scalar fields.
pub fn qab(
    u: &SpacetimeField<ScalarField>,
    v: &SpacetimeField<ScalarField>,
    alpha: usize,
    beta: usize,
) -> Result<ScalarField> {
    distinct(alpha, beta)?;
    u.d(alpha).product(&v.d(beta))?.sub(&u.d(beta).product(&v.d(alpha))?)
}

/// Q₀[u, v] = [∂_αu, ∂^αv].
pub fn q0_bracket(u: &SpacetimeField<AlgebraField>, v: &SpacetimeField<AlgebraField>) -> Result<AlgebraField> {
    q0_bracket_grad(&u.grad(), &v.grad())
}

pub fn q0_bracket_grad(du: &[AlgebraField; 4], dv: &[AlgebraField; 4]) -> Result<AlgebraField> {
    contracted_bracket(du, dv)
}

/// Q_{αβ}[u, v] = [∂_αu, ∂_βv] − [∂_βu, ∂_αv].
pub fn qab_bracket(
    u: &SpacetimeField<AlgebraField>,
    v: &SpacetimeField<AlgebraField>,
    alpha: usize,
    beta: usize,
) -> Result<AlgebraField> {
    qab_bracket_grad(&u.grad(), &v.grad(), alpha, beta)
}

pub fn qab_bracket_grad(
    du: &[AlgebraField; 4],
    dv: &[AlgebraField; 4],
    alpha: usize,
    beta: usize,
) -> Result<AlgebraField> {
    distinct(alpha, beta)?;
    let (du, dv) = (physical(du.clone()), physical(dv.clone()));
    let mut out = AlgebraField::zeros(du[0].algebra(), du[0].grid(), Repr::Physical);
    out.accumulate_bracket(1.0, &du[alpha], &dv[beta])?;
    out.accumulate_bracket(-1.0, &du[beta], &dv[alpha])?;
    Ok(out.dealiased())
}

/// 𝔔[u, v] = −½ ε^{ijk}ε_{klm} Q_{ij}[R^l u^m, v] − Q_{0i}[R^i u₀, v].
///
/// `u` holds the four lower components u₀..u₃; spatial indices are raised
/// trivially.
pub fn frak_q(u: &[SpacetimeField<AlgebraField>; 4], v: &SpacetimeField<AlgebraField>) -> Result<AlgebraField> {
    let dv = v.grad();
    frak_q_grad(u, &dv)
}

pub fn frak_q_grad(u: &[SpacetimeField<AlgebraField>; 4], dv: &[AlgebraField; 4]) -> Result<AlgebraField> {
    FrakOperator::new(u).apply(dv)
}

/// 𝔔[u, ·] with the Riesz-transformed gradients of `u` cached, for
/// repeated application to different second arguments.
#[derive(Clone, Debug)]
pub struct FrakOperator {
    /// ∂(R_l u_m) at slot 3l + m, for l ≠ m
    spatial: Vec<Option<[AlgebraField; 4]>>,
    /// ∂(R_i u₀)
    temporal: Vec<[AlgebraField; 4]>,
}

impl FrakOperator {
    pub fn new(u: &[SpacetimeField<AlgebraField>; 4]) -> Self {
        let mut spatial = vec![None; 9];
        for l in 0..3 {
            for m in 0..3 {
                if l != m {
                    spatial[3 * l + m] = Some(physical(u[m + 1].multiplier(Symbol::Riesz(l)).grad()));
                }
            }
        }
        let temporal = (0..3).map(|i| physical(u[0].multiplier(Symbol::Riesz(i)).grad())).collect();
        Self { spatial, temporal }
    }

    pub fn apply(&self, dv: &[AlgebraField; 4]) -> Result<AlgebraField> {
        let dv = physical(dv.clone());
        let mut out = AlgebraField::zeros(dv[0].algebra(), dv[0].grid(), Repr::Physical);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let e1 = levi_civita(i, j, k);
                    if e1 == 0.0 {
                        continue;
                    }
                    for l in 0..3 {
                        for m in 0..3 {
                            let e2 = levi_civita(k, l, m);
                            if e2 == 0.0 {
                                continue;
                            }
                            let du = self.spatial[3 * l + m].as_ref().expect("l != m whenever ε ≠ 0");
                            let c = -0.5 * e1 * e2;
                            out.accumulate_bracket(c, &du[i + 1], &dv[j + 1])?;
                            out.accumulate_bracket(-c, &du[j + 1], &dv[i + 1])?;
                        }
                    }
                }
            }
        }
        for (i, du) in self.temporal.iter().enumerate() {
            out.accumulate_bracket(-1.0, &du[0], &dv[i + 1])?;
            out.accumulate_bracket(1.0, &du[i + 1], &dv[0])?;
        }
        Ok(out.dealiased())
    }
}

fn physical(g: [AlgebraField; 4]) -> [AlgebraField; 4] {
    g.map(|f| if f.repr() == Repr::Physical { f } else { f.to_physical() })
}

/// [A^α, ∂_α ψ] with A^0 = −A₀.
pub fn contracted_bracket(a: &[AlgebraField; 4], dpsi: &[AlgebraField; 4]) -> Result<AlgebraField> {
    let (a, dpsi) = (physical(a.clone()), physical(dpsi.clone()));
    let mut out = AlgebraField::zeros(a[0].algebra(), a[0].grid(), Repr::Physical);
    for al in 0..4 {
        out.accumulate_bracket(if al == 0 { -1.0 } else { 1.0 }, &a[al], &dpsi[al])?;
    }
    Ok(out.dealiased())
}

/// Pointwise n×n matrix field over gl(n, ℂ); entries row-major.
#[derive(Clone, Debug)]
pub struct MatrixField {
    n: usize,
    entries: Vec<ScalarField>,
}

impl MatrixField {
    pub fn from_algebra(x: &AlgebraField) -> Self {
        let alg = x.algebra();
        let n = alg.kind().n;
        let grid = x.grid();
        let phys = x.to_physical();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut e = ScalarField::zeros(grid, Repr::Physical);
                for (a, basis) in alg.basis().iter().enumerate() {
                    let c = basis[(i, j)];
                    if c != CZERO {
                        e.axpy(c, phys.comp(a)).expect("same grid");
                    }
                }
                entries.push(e);
            }
        }
        Self { n, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[i * self.n + j]
    }

    /// Pointwise matrix product, dealiased.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut e = ScalarField::zeros(self.entries[0].grid(), Repr::Physical);
                for k in 0..n {
                    e.axpy(C64::new(1.0, 0.0), &self.entry(i, k).product(other.entry(k, j))?)?;
                }
                entries.push(e);
            }
        }
        Ok(Self { n, entries })
    }

    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.axpy(C64::new(c, 0.0), b)?;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.sobolev_norm_sq(0.0)).sum::<f64>().sqrt()
    }
}

fn matrix_grad(u: &SpacetimeField<AlgebraField>) -> [MatrixField; 4] {
    std::array::from_fn(|a| MatrixField::from_algebra(&u.d(a)))
}

/// Ordinary Q₀(u, v) for algebra-valued fields, with the matrix product.
pub fn q0_matrix(u: &SpacetimeField<AlgebraField>, v: &SpacetimeField<AlgebraField>) -> Result<MatrixField> {
    let (du, dv) = (matrix_grad(u), matrix_grad(v));
    let mut out = du[0].matmul(&dv[0])?;
    for e in out.entries.iter_mut() {
        *e = e.scale(C64::new(-1.0, 0.0));
    }
    for a in 1..4 {
        out.axpy(1.0, &du[a].matmul(&dv[a])?)?;
    }
    Ok(out)
}

/// Ordinary Q_{αβ}(u, v) for algebra-valued fields, with the matrix product.
pub fn qab_matrix(
    u: &SpacetimeField<AlgebraField>,
    v: &SpacetimeField<AlgebraField>,
    alpha: usize,
    beta: usize,
) -> Result<MatrixField> {
    distinct(alpha, beta)?;
    let (du, dv) = (matrix_grad(u), matrix_grad(v));
    du[alpha].matmul(&dv[beta])?.sub(&du[beta].matmul(&dv[alpha])?)
}

fn relative(err: f64, scale: f64) -> f64 {
    if err == 0.0 {
        0.0
    } else {
        err / scale.max(f64::MIN_POSITIVE)
    }
}

/// Residual of [∂_αu, ∂_βu] = ½ Q_{αβ}[u, u], maximized over α < β.
pub fn nullform_trick_residual(u: &SpacetimeField<AlgebraField>) -> Result<f64> {
    let du = u.grad();
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let lhs = du[a].bracket(&du[b])?;
            let rhs = qab_bracket_grad(&du, &du, a, b)?.scale(0.5);
            worst = worst.max(relative(lhs.sub(&rhs)?.l2_norm(), lhs.l2_norm()));
        }
    }
    Ok(worst)
}

/// Relative residuals of the two Lemma-1 identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Report {
    /// [A^α, ∂_α ψ] against 𝔔[|∇|⁻¹A, ψ]
    pub frak: f64,
    /// [∂_t A^α, ∂_α ψ] against Q_{0i}[A^i, ψ]
    pub time: f64,
}

pub fn verify_lemma1(
    a: &[SpacetimeField<AlgebraField>; 4],
    psi: &SpacetimeField<AlgebraField>,
) -> Result<Lemma1Report> {
    let dpsi = psi.grad();

    let lhs1 = contracted_bracket(&std::array::from_fn(|al| a[al].u.clone()), &dpsi)?;
    let inv: [SpacetimeField<AlgebraField>; 4] = std::array::from_fn(|al| a[al].multiplier(Symbol::InvAbs));
    let rhs1 = frak_q_grad(&inv, &dpsi)?;

    let lhs2 = contracted_bracket(&std::array::from_fn(|al| a[al].dt.clone()), &dpsi)?;
    let mut rhs2 = AlgebraField::zeros(psi.u.algebra(), psi.u.grid(), Repr::Physical);
    for i in 1..4 {
        rhs2.axpy(1.0, &qab_bracket_grad(&a[i].grad(), &dpsi, 0, i)?)?;
    }

    Ok(Lemma1Report {
        frak: relative(lhs1.sub(&rhs1)?.l2_norm(), lhs1.l2_norm()),
        time: relative(lhs2.sub(&rhs2)?.l2_norm(), lhs2.l2_norm()),
    })
}

// ---------------------------------------------------------------------------
// Symbols

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// ⟨x⟩ = (1 + |x|²)^{1/2}.
pub fn japanese(a: [f64; 3]) -> f64 {
    (1.0 + dot(a, a)).sqrt()
}

/// Angle between ξ and η in [0, π].
pub fn theta(xi: [f64; 3], eta: [f64; 3]) -> f64 {
    norm(cross(xi, eta)).atan2(dot(xi, eta))
}

pub fn q0_symbol(xi: [f64; 3], eta: [f64; 3]) -> f64 {
    japanese(xi) * japanese(eta) - dot(xi, eta)
}

pub fn q0i_symbol(i: usize, xi: [f64; 3], eta: [f64; 3]) -> f64 {
    -japanese(xi) * eta[i] + xi[i] * japanese(eta)
}

pub fn qij_symbol(i: usize, j: usize, xi: [f64; 3], eta: [f64; 3]) -> f64 {
    -xi[i] * eta[j] + xi[j] * eta[i]
}

/// Closed forms of the registered bilinear symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedSymbol {
    One,
    Q0,
    Q0i(usize),
    Qij(usize, usize),
    /// θ(ξ, η); not of tensor-product form
    Angle,
}

impl NamedSymbol {
    pub fn eval(&self, xi: [f64; 3], eta: [f64; 3]) -> f64 {
        match *self {
            Self::One => 1.0,
            Self::Q0 => q0_symbol(xi, eta),
            Self::Q0i(i) => q0i_symbol(i, xi, eta),
            Self::Qij(i, j) => qij_symbol(i, j, xi, eta),
            Self::Angle => theta(xi, eta),
        }
    }
}

/// σ(ξ, η) = Σ_m c_m a_m(ξ) b_m(η).
#[derive(Clone, Debug)]
pub struct BilinearSymbol {
    pub name: NamedSymbol,
    pub terms: Vec<(f64, Symbol, Symbol)>,
}

impl BilinearSymbol {
    pub fn named(name: NamedSymbol) -> Self {
        let b = Symbol::Bessel(1.0);
        let terms = match name {
            NamedSymbol::One => vec![(1.0, Symbol::Identity, Symbol::Identity)],
            NamedSymbol::Q0 => {
                let mut t = vec![(1.0, b, b)];
                t.extend((0..3).map(|i| (-1.0, Symbol::Xi(i), Symbol::Xi(i))));
                t
            }
            NamedSymbol::Q0i(i) => vec![(-1.0, b, Symbol::Xi(i)), (1.0, Symbol::Xi(i), b)],
            NamedSymbol::Qij(i, j) => vec![(-1.0, Symbol::Xi(i), Symbol::Xi(j)), (1.0, Symbol::Xi(j), Symbol::Xi(i))],
            NamedSymbol::Angle => Vec::new(),
        };
        Self { name, terms }
    }

    pub fn eval_tensor(&self, xi: [f64; 3], eta: [f64; 3]) -> f64 {
        self.terms.iter().map(|(c, a, b)| c * (a.eval(xi) * b.eval(eta)).re).sum()
    }

    pub fn is_tensor(&self) -> bool {
        !self.terms.is_empty()
    }
}

/// B_σ(u, v) = Σ_m c_m (a_m(D)u)(b_m(D)v), dealiased.
pub fn b_sigma(sigma: &BilinearSymbol, u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    if !sigma.is_tensor() {
        return Err(YmhError::NotTensorProduct);
    }
    let mut out = ScalarField::zeros(u.grid(), Repr::Physical);
    for &(c, a, b) in &sigma.terms {
        let p = u.multiplier(a).product(&v.multiplier(b))?;
        out.axpy(C64::new(c, 0.0), &p)?;
    }
    Ok(out)
}

/// Direct double-sum B_σ over the spectral lattice, closed-form symbol.
pub fn b_sigma_direct(sigma: NamedSymbol, u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    let grid = u.grid();
    if !grid.same(v.grid()) {
        return Err(YmhError::GridMismatch);
    }
    let (us, vs) = (u.to_spectral(), v.to_spectral());
    let mut out = vec![CZERO; grid.len()];
    let nyq = grid.n() as i64 / 2;
    let on_nyquist = |k: [i64; 3]| k.iter().any(|&c| c == -nyq);
    for i in 0..grid.len() {
        let a = us.data()[i];
        if a == CZERO || on_nyquist(grid.k(i)) {
            continue;
        }
        for j in 0..grid.len() {
            let b = vs.data()[j];
            if b == CZERO || on_nyquist(grid.k(j)) {
                continue;
            }
            let (ki, kj) = (grid.k(i), grid.k(j));
            let s = sigma.eval(grid.xi(i), grid.xi(j));
            out[grid.index_of([ki[0] + kj[0], ki[1] + kj[1], ki[2] + kj[2]])] += s * a * b;
        }
    }
    grid.truncate(&mut out);
    Ok(ScalarField::new(grid, Repr::Spectral, out))
}

// ---------------------------------------------------------------------------
// Lemma checks

/// One row of a bound report.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub id: String,
    pub samples: usize,
    pub max_ratio: f64,
    pub argmax_xi: [f64; 3],
    pub argmax_eta: [f64; 3],
}

impl BoundRow {
    fn new(id: &str) -> Self {
        Self { id: id.to_string(), samples: 0, max_ratio: 0.0, argmax_xi: [0.0; 3], argmax_eta: [0.0; 3] }
    }

    fn record(&mut self, ratio: f64, xi: [f64; 3], eta: [f64; 3]) {
        self.samples += 1;
        if ratio > self.max_ratio || ratio.is_nan() {
            self.max_ratio = ratio;
            self.argmax_xi = xi;
            self.argmax_eta = eta;
        }
    }
}

fn log_uniform_vec(rng: &mut ChaCha8Rng) -> [f64; 3] {
    std::array::from_fn(|_| {
        let mag = 10f64.powf(rng.random_range(-3.0..3.0));
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    })
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Right-hand side of the printed q₀ bound.
pub fn q0_rhs(xi: [f64; 3], eta: [f64; 3]) -> f64 {
    let t = theta(xi, eta);
    norm(xi) * norm(eta) * t * t + 1.0 / japanese(xi).min(japanese(eta))
}

/// A bound on q₀ that holds with constant 1.
pub fn q0_rhs_corrected(xi: [f64; 3], eta: [f64; 3]) -> f64 {
    let t = theta(xi, eta);
    let (jx, je) = (japanese(xi), japanese(eta));
    0.5 * norm(xi) * norm(eta) * t * t + jx / je + je / jx
}

pub fn q0j_rhs(xi: [f64; 3], eta: [f64; 3]) -> f64 {
    norm(xi) * norm(eta) * theta(xi, eta) + norm(xi) / japanese(eta) + norm(eta) / japanese(xi)
}

pub fn qij_rhs(xi: [f64; 3], eta: [f64; 3]) -> f64 {
    norm(xi) * norm(eta) * theta(xi, eta)
}

/// Ratios of the three symbol bounds over random log-uniform (ξ, η).
///
/// Rows: `q0` (printed), `q0j`, `qij`, and `q0-corrected`.
pub fn check_symbol_bounds(samples: usize, seed: u64) -> Vec<BoundRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = [BoundRow::new("q0"), BoundRow::new("q0j"), BoundRow::new("qij"), BoundRow::new("q0-corrected")];
    for _ in 0..samples {
        let xi = log_uniform_vec(&mut rng);
        let eta = log_uniform_vec(&mut rng);
        let q0 = q0_symbol(xi, eta).abs();
        rows[0].record(ratio(q0, q0_rhs(xi, eta)), xi, eta);
        let q0j = (0..3).map(|j| q0i_symbol(j, xi, eta).abs()).fold(0.0, f64::max);
        rows[1].record(ratio(q0j, q0j_rhs(xi, eta)), xi, eta);
        let mut qij: f64 = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                qij = qij.max(qij_symbol(i, j, xi, eta).abs());
            }
        }
        rows[2].record(ratio(qij, qij_rhs(xi, eta)), xi, eta);
        rows[3].record(ratio(q0, q0_rhs_corrected(xi, eta)), xi, eta);
    }
    rows.into()
}

/// Right-hand side of the angle estimate for one sign pair.
#[allow(clippy::too_many_arguments)]
pub fn angle_rhs(tau: f64, lambda: f64, xi: [f64; 3], eta: [f64; 3], s1: f64, s2: f64, exps: [f64; 3]) -> f64 {
    let jb = |x: f64| (1.0 + x * x).sqrt();
    let m = japanese(xi).min(japanese(eta));
    let sum = [xi[0] + eta[0], xi[1] + eta[1], xi[2] + eta[2]];
    let w0 = jb((tau + lambda).abs() - norm(sum)) / m;
    let w1 = jb(-tau + s1 * norm(xi)) / m;
    let w2 = jb(-lambda + s2 * norm(eta)) / m;
    w0.powf(exps[0]) + w1.powf(exps[1]) + w2.powf(exps[2])
}

/// Max of θ(±ξ, ±′η)/rhs over random samples near the cones, all four
/// sign pairs and the given exponent triple.
pub fn check_angle_estimate(samples: usize, exps: [f64; 3], seed: u64) -> Result<BoundRow> {
    if exps.iter().any(|e| !(0.0..=0.5).contains(e)) {
        return Err(YmhError::Parameter(format!("angle exponents {exps:?} must lie in [0, 1/2]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = format!("angle({},{},{})", exps[0], exps[1], exps[2]);
    let mut row = BoundRow::new(&id);
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    for _ in 0..samples {
        let xi = log_uniform_vec(&mut rng);
        let eta = log_uniform_vec(&mut rng);
        let offset = |r: &mut ChaCha8Rng| {
            let mag = 10f64.powf(r.random_range(-3.0..3.0));
            if r.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        };
        let (c1, c2) = (if rng.random_bool(0.5) { 1.0 } else { -1.0 }, if rng.random_bool(0.5) { 1.0 } else { -1.0 });
        let tau = c1 * norm(xi) + offset(&mut rng);
        let lambda = c2 * norm(eta) + offset(&mut rng);
        for &(s1, s2) in &signs {
            let th = theta(xi.map(|x| s1 * x), eta.map(|x| s2 * x));
            let rhs = angle_rhs(tau, lambda, xi, eta, s1, s2, exps);
            row.record(ratio(th, rhs), xi, eta);
        }
    }
    Ok(row)
}

/// Convenience constructor for tests and probes: random real band-limited
/// algebra field with Fourier support in 1 ≤ max|k_i| ≤ band.
pub fn random_algebra_field(
    algebra: &Arc<LieAlgebra>,
    grid: &Arc<Grid>,
    band: usize,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> AlgebraField {
    let comps = (0..algebra.dim()).map(|_| random_real_scalar(grid, band, amplitude, rng)).collect();
    AlgebraField::from_components(algebra, comps).expect("matching dimension")
}

/// Random real scalar field with mean zero and |k_i| ≤ band.
///
/// Coefficients are drawn in a fixed wavevector order, so the same seed
/// gives the same continuum function on every grid that resolves the band.
pub fn random_real_scalar(grid: &Arc<Grid>, band: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let band = band.min(grid.n() / 2 - 1) as i64;
    let mut data = vec![CZERO; grid.len()];
    for k0 in -band..=band {
        for k1 in -band..=band {
            for k2 in -band..=band {
                let k = [k0, k1, k2];
                // one representative of each ±k pair
                if k <= [0, 0, 0] {
                    continue;
                }
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amplitude;
                data[grid.index_of(k)] = c;
                data[grid.index_of([-k0, -k1, -k2])] = c.conj();
            }
        }
    }
    ScalarField::new(grid, Repr::Spectral, data).into_physical()
}
