//! Matrix Lie algebras so(n) and su(n).
//!
//! Two layers live here. [`AlgebraElement`] is a single n×n matrix and is
//! used for pointwise oracles and gauge maps. [`LieAlgebra`] fixes an
//! orthonormal basis and the structure constants, so that fields can be
//! stored as real coefficient arrays and brackets become sparse sums.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, YmhError};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    SO,
    SU,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraKind {
    pub family: Family,
    pub n: usize,
}

impl AlgebraKind {
    pub fn su(n: usize) -> Self {
        Self { family: Family::SU, n }
    }

    pub fn so(n: usize) -> Self {
        Self { family: Family::SO, n }
    }

    /// Real dimension of the algebra.
    pub fn dim(&self) -> usize {
        match self.family {
            Family::SO => self.n * (self.n.saturating_sub(1)) / 2,
            Family::SU => (self.n * self.n).saturating_sub(1),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (fam, rest) = if let Some(r) = s.strip_prefix("su") {
            (Family::SU, r)
        } else if let Some(r) = s.strip_prefix("so") {
            (Family::SO, r)
        } else {
            return None;
        };
        let n: usize = rest.trim_matches(|c| c == '(' || c == ')').parse().ok()?;
        if n < 2 {
            return None;
        }
        Some(Self { family: fam, n })
    }
}

impl Default for AlgebraKind {
    fn default() -> Self {
        Self::su(2)
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::SO => write!(f, "so({})", self.n),
            Family::SU => write!(f, "su({})", self.n),
        }
    }
}

/// One element of so(n) or su(n), stored as a complex matrix.
///
/// For SO the imaginary parts are identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    kind: AlgebraKind,
    entries: CMatrix,
}

impl AlgebraElement {
    /// Projects `m` onto the algebra: antisymmetric real part for SO,
    /// traceless skew-hermitian part for SU.
    pub fn new(kind: AlgebraKind, m: CMatrix) -> Self {
        let n = kind.n;
        assert_eq!(m.shape(), (n, n), "matrix shape does not match {kind}");
        let mut out = CMatrix::from_element(n, n, ZERO);
        match kind.family {
            Family::SO => {
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] = Complex64::new(0.5 * (m[(i, j)].re - m[(j, i)].re), 0.0);
                    }
                }
            }
            Family::SU => {
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] = 0.5 * (m[(i, j)] - m[(j, i)].conj());
                    }
                }
                let tr = (0..n).map(|i| out[(i, i)]).sum::<Complex64>() / n as f64;
                for i in 0..n {
                    out[(i, i)] -= tr;
                    out[(i, i)].re = 0.0;
                }
            }
        }
        Self { kind, entries: out }
    }

    /// Wraps a matrix without projecting it. Used where closure is the
    /// property under test.
    pub fn from_raw(kind: AlgebraKind, entries: CMatrix) -> Self {
        Self { kind, entries }
    }

    pub fn zero(kind: AlgebraKind) -> Self {
        Self { kind, entries: CMatrix::from_element(kind.n, kind.n, ZERO) }
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Distance to the algebra relative to the entry norm.
    pub fn closure_residual(&self) -> f64 {
        let proj = Self::new(self.kind, self.entries.clone());
        let scale = self.norm().max(f64::MIN_POSITIVE);
        (&self.entries - &proj.entries).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale
    }

    /// Inner-product norm; equals the Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { kind: self.kind, entries: &self.entries * Complex64::new(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_kind(self, other)?;
        Ok(Self { kind: self.kind, entries: &self.entries + &other.entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_kind(self, other)?;
        Ok(Self { kind: self.kind, entries: &self.entries - &other.entries })
    }

    /// U X U^{-1} for a unitary (or orthogonal) U.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self { kind: self.kind, entries: u * &self.entries * u.adjoint() }
    }
}

fn same_kind(x: &AlgebraElement, y: &AlgebraElement) -> Result<()> {
    if x.kind != y.kind {
        return Err(YmhError::KindMismatch(x.kind, y.kind));
    }
    Ok(())
}

/// XY − YX. No projection is applied.
pub fn commutator(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    same_kind(x, y)?;
    let xy = &x.entries * &y.entries;
    let yx = &y.entries * &x.entries;
    Ok(AlgebraElement { kind: x.kind, entries: xy - yx })
}

/// Re Tr(X Y*) (which is Tr(X Yᵀ) for real matrices).
pub fn inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    same_kind(x, y)?;
    Ok(x.entries.iter().zip(y.entries.iter()).map(|(a, b)| (a * b.conj()).re).sum())
}

/// Gaussian coefficients of size `scale` in the orthonormal basis.
pub fn random_element(kind: AlgebraKind, seed: u64, scale: f64) -> AlgebraElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = orthonormal_basis(kind);
    let mut m = CMatrix::from_element(kind.n, kind.n, ZERO);
    for e in &basis {
        let c: f64 = StandardNormal.sample(&mut rng);
        m += e * Complex64::new(scale * c, 0.0);
    }
    AlgebraElement::new(kind, m)
}

/// Orthonormal basis with respect to Re Tr(X Y*).
///
/// Off-diagonal real generators first, then (for SU) the imaginary
/// symmetric ones and the Cartan generators.
pub fn orthonormal_basis(kind: AlgebraKind) -> Vec<CMatrix> {
    let n = kind.n;
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(kind.dim());
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::from_element(n, n, ZERO);
            m[(j, k)] = Complex64::new(r2, 0.0);
            m[(k, j)] = Complex64::new(-r2, 0.0);
            basis.push(m);
        }
    }
    if kind.family == Family::SU {
        for j in 0..n {
            for k in (j + 1)..n {
                let mut m = CMatrix::from_element(n, n, ZERO);
                m[(j, k)] = I * r2;
                m[(k, j)] = I * r2;
                basis.push(m);
            }
        }
        for l in 1..n {
            let c = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut m = CMatrix::from_element(n, n, ZERO);
            for i in 0..l {
                m[(i, i)] = I * c;
            }
            m[(l, l)] = I * (-(l as f64) * c);
            basis.push(m);
        }
    }
    basis
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm1 = (0..n).map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut s = 1.0;
    while norm1 / s > 0.25 {
        s *= 2.0;
        squarings += 1;
    }
    let a = m * Complex64::new(1.0 / s, 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &a * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).sum::<f64>() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Basis, structure constants and the bracket on coefficient vectors.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    kind: AlgebraKind,
    basis: Vec<CMatrix>,
    /// Entries (a, b, k, c) with a < b: [e_a, e_b] has component c along e_k.
    structure: Vec<(usize, usize, usize, f64)>,
    abelian: bool,
}

impl LieAlgebra {
    pub fn new(kind: AlgebraKind) -> Self {
        let basis = orthonormal_basis(kind);
        let d = basis.len();
        let mut structure = Vec::new();
        for a in 0..d {
            for b in (a + 1)..d {
                let br = &basis[a] * &basis[b] - &basis[b] * &basis[a];
                for (k, e) in basis.iter().enumerate() {
                    let c: f64 = br.iter().zip(e.iter()).map(|(x, y)| (x * y.conj()).re).sum();
                    if c.abs() > 1e-14 {
                        structure.push((a, b, k, c));
                    }
                }
            }
        }
        Self { kind, basis, structure, abelian: false }
    }

    /// Same basis, but every bracket is forced to zero.
    pub fn abelian(kind: AlgebraKind) -> Self {
        let mut alg = Self::new(kind);
        alg.abelian = true;
        alg.structure.clear();
        alg
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn structure_constants(&self) -> &[(usize, usize, usize, f64)] {
        &self.structure
    }

    pub fn coords(&self, x: &AlgebraElement) -> Vec<f64> {
        self.basis.iter().map(|e| x.entries.iter().zip(e.iter()).map(|(a, b)| (a * b.conj()).re).sum()).collect()
    }

    pub fn element(&self, c: &[f64]) -> AlgebraElement {
        let n = self.kind.n;
        let mut m = CMatrix::from_element(n, n, ZERO);
        for (e, &ci) in self.basis.iter().zip(c) {
            m += e * Complex64::new(ci, 0.0);
        }
        AlgebraElement::from_raw(self.kind, m)
    }

    /// Coefficients of [x, y].
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &(a, b, k, c) in &self.structure {
            out[k] += c * (x[a] * y[b] - x[b] * y[a]);
        }
        out
    }

    /// Matrix of ad(x) acting on coefficient vectors: (ad x)_{kb} y_b = [x,y]_k.
    pub fn ad_matrix(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for &(a, b, k, c) in &self.structure {
            m[k][b] += c * x[a];
            m[k][a] -= c * x[b];
        }
        m
    }

    /// Matrix of Ad(U): X ↦ U X U^{-1} in the orthonormal basis.
    pub fn adjoint_action(&self, u: &CMatrix) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for a in 0..d {
            let img = u * &self.basis[a] * u.adjoint();
            for k in 0..d {
                m[k][a] = img.iter().zip(self.basis[k].iter()).map(|(x, y)| (x * y.conj()).re).sum();
            }
        }
        m
    }

    /// exp of the element with coefficients `c`.
    pub fn exp(&self, c: &[f64]) -> CMatrix {
        expm(self.element(c).entries())
    }
}

/// Residual of U U* = I.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let d = u * u.adjoint() - CMatrix::identity(n, n);
    d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
