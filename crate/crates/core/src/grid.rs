//! Periodic grid on [0, L)³, spectral conventions and field types.
//!
//! Spectral coefficients are c_k = N⁻³ Σ_x u(x) e^{-iξ·x}, so that
//! u(x) = Σ_k c_k e^{iξ·x} and ‖u‖²_{L²} = L³ Σ |c_k|².

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, LieAlgebra};
use crate::error::{Result, YmhError};
use crate::fft::FftNd;

pub type C64 = Complex64;
pub const CZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dealias {
    None,
    TwoThirds,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
    pub dealias: Dealias,
}

impl GridSpec {
    pub fn new(n: usize, l: f64, dealias: Dealias) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(YmhError::Grid(format!("N = {n} must be a power of two ≥ 2")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(YmhError::Grid(format!("L = {l} must be positive")));
        }
        Ok(Self { n, l, dealias })
    }

    pub fn cube(n: usize) -> Self {
        Self::new(n, 2.0 * PI, Dealias::TwoThirds).expect("valid default grid")
    }

    /// Largest |k_i| kept after a product.
    pub fn band_limit(&self) -> usize {
        match self.dealias {
            Dealias::None => self.n / 2,
            Dealias::TwoThirds => self.n / 3,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::cube(32)
    }
}

/// Registered Fourier multipliers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol {
    Identity,
    /// ∂_j, symbol iξ_j
    Deriv(usize),
    /// ξ_j
    Xi(usize),
    /// |∇|
    Abs,
    /// |∇|⁻¹, zero mode sent to 0
    InvAbs,
    /// R_j = |∇|⁻¹∂_j, symbol iξ_j/|ξ|, zero mode sent to 0
    Riesz(usize),
    /// ⟨∇⟩^s
    Bessel(f64),
}

impl Symbol {
    /// Looks a symbol up by name: `id`, `d1`, `xi2`, `abs`, `inv_abs`,
    /// `riesz3`, `bessel:<s>`, `inv_bessel`.
    pub fn parse(name: &str) -> Result<Self> {
        let unknown = || YmhError::UnknownSymbol(name.to_string());
        let axis = |s: &str| -> Result<usize> {
            match s {
                "1" => Ok(0),
                "2" => Ok(1),
                "3" => Ok(2),
                _ => Err(unknown()),
            }
        };
        match name {
            "id" | "one" => Ok(Self::Identity),
            "abs" => Ok(Self::Abs),
            "inv_abs" => Ok(Self::InvAbs),
            "bracket" => Ok(Self::Bessel(1.0)),
            "inv_bracket" | "inv_bessel" => Ok(Self::Bessel(-1.0)),
            _ => {
                if let Some(r) = name.strip_prefix("riesz") {
                    axis(r).map(Self::Riesz)
                } else if let Some(r) = name.strip_prefix("xi") {
                    axis(r).map(Self::Xi)
                } else if let Some(r) = name.strip_prefix('d') {
                    axis(r).map(Self::Deriv)
                } else if let Some(r) = name.strip_prefix("bessel:") {
                    r.parse::<f64>().map(Self::Bessel).map_err(|_| unknown())
                } else {
                    Err(unknown())
                }
            }
        }
    }

    pub fn eval(&self, xi: [f64; 3]) -> C64 {
        let abs2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        match *self {
            Self::Identity => C64::new(1.0, 0.0),
            Self::Deriv(j) => C64::new(0.0, xi[j]),
            Self::Xi(j) => C64::new(xi[j], 0.0),
            Self::Abs => C64::new(abs2.sqrt(), 0.0),
            Self::InvAbs => {
                if abs2 == 0.0 {
                    CZERO
                } else {
                    C64::new(1.0 / abs2.sqrt(), 0.0)
                }
            }
            Self::Riesz(j) => {
                if abs2 == 0.0 {
                    CZERO
                } else {
                    C64::new(0.0, xi[j] / abs2.sqrt())
                }
            }
            Self::Bessel(s) => C64::new((1.0 + abs2).powf(0.5 * s), 0.0),
        }
    }

    /// Axis along which the symbol is odd; its Nyquist plane is zeroed.
    fn odd_axis(&self) -> Option<usize> {
        match *self {
            Self::Deriv(j) | Self::Xi(j) | Self::Riesz(j) => Some(j),
            _ => None,
        }
    }
}

/// Precomputed wavenumbers, FFT plans and masks for one [`GridSpec`].
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    fft: FftNd,
    kint: Vec<i64>,
    k1: Vec<f64>,
    keep: Vec<bool>,
    bracket: Vec<f64>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Arc<Self> {
        let n = spec.n;
        let kint: Vec<i64> = (0..n).map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 }).collect();
        let k1: Vec<f64> = kint.iter().map(|&k| 2.0 * PI / spec.l * k as f64).collect();
        let total = n * n * n;
        let cut = spec.band_limit() as i64;
        let mut keep = vec![true; total];
        let mut bracket = vec![0.0; total];
        for idx in 0..total {
            let [a, b, c] = split(n, idx);
            if spec.dealias == Dealias::TwoThirds {
                keep[idx] = kint[a].abs() <= cut && kint[b].abs() <= cut && kint[c].abs() <= cut;
            }
            bracket[idx] = (1.0 + k1[a] * k1[a] + k1[b] * k1[b] + k1[c] * k1[c]).sqrt();
        }
        Arc::new(Self { spec, fft: FftNd::new(&[n, n, n]), kint, k1, keep, bracket })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn len(&self) -> usize {
        self.spec.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn l(&self) -> f64 {
        self.spec.l
    }

    pub fn volume(&self) -> f64 {
        self.spec.l.powi(3)
    }

    /// Physical coordinates of a flat index.
    pub fn x(&self, idx: usize) -> [f64; 3] {
        let h = self.spec.l / self.spec.n as f64;
        split(self.spec.n, idx).map(|i| i as f64 * h)
    }

    /// Integer wavevector of a flat spectral index.
    pub fn k(&self, idx: usize) -> [i64; 3] {
        split(self.spec.n, idx).map(|i| self.kint[i])
    }

    /// Physical wavevector ξ = (2π/L)k.
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        split(self.spec.n, idx).map(|i| self.k1[i])
    }

    /// Flat spectral index of an integer wavevector.
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let n = self.spec.n as i64;
        let w = |v: i64| v.rem_euclid(n) as usize;
        (w(k[0]) * self.spec.n + w(k[1])) * self.spec.n + w(k[2])
    }

    /// ⟨ξ⟩ on the spectral lattice.
    pub fn japanese(&self) -> &[f64] {
        &self.bracket
    }

    pub fn keep_mask(&self) -> &[bool] {
        &self.keep
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.fft.forward(data);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.fft.inverse(data);
    }

    /// Zeroes the modes removed by the dealias rule.
    pub fn truncate(&self, spec: &mut [C64]) {
        if self.spec.dealias == Dealias::None {
            return;
        }
        for (v, &k) in spec.iter_mut().zip(&self.keep) {
            if !k {
                *v = CZERO;
            }
        }
    }

    /// Multiplies spectral data by a registered symbol.
    pub fn apply_symbol(&self, sym: Symbol, spec: &mut [C64]) {
        let nyq = self.spec.n / 2;
        let n = self.spec.n;
        let odd = sym.odd_axis();
        for (idx, v) in spec.iter_mut().enumerate() {
            let ijk = split(n, idx);
            if let Some(j) = odd {
                if ijk[j] == nyq {
                    *v = CZERO;
                    continue;
                }
            }
            *v *= sym.eval(ijk.map(|i| self.k1[i]));
        }
    }

    /// Spectra of two real arrays from one complex transform.
    pub fn forward_real_pair(&self, a: &[f64], b: &[f64]) -> (Vec<C64>, Vec<C64>) {
        let mut z: Vec<C64> = a.iter().zip(b).map(|(&x, &y)| C64::new(x, y)).collect();
        self.forward(&mut z);
        let n = self.len();
        let mut sa = vec![CZERO; n];
        let mut sb = vec![CZERO; n];
        for idx in 0..n {
            let zc = z[self.neg(idx)].conj();
            sa[idx] = 0.5 * (z[idx] + zc);
            sb[idx] = C64::new(0.0, -0.5) * (z[idx] - zc);
        }
        (sa, sb)
    }

    /// Real parts of the inverse transforms of two (Hermitian) spectra.
    pub fn inverse_real_pair(&self, sa: &[C64], sb: &[C64]) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<C64> = sa.iter().zip(sb).map(|(&x, &y)| x + C64::new(0.0, 1.0) * y).collect();
        self.inverse(&mut z);
        (z.iter().map(|v| v.re).collect(), z.iter().map(|v| v.im).collect())
    }

    /// Applies the dealias rule to two real physical arrays in place.
    pub fn dealias_real_pair(&self, a: &mut [f64], b: &mut [f64]) {
        if self.spec.dealias == Dealias::None {
            return;
        }
        let mut z: Vec<C64> = a.iter().zip(b.iter()).map(|(&x, &y)| C64::new(x, y)).collect();
        self.forward(&mut z);
        self.truncate(&mut z);
        self.inverse(&mut z);
        for ((x, y), v) in a.iter_mut().zip(b.iter_mut()).zip(&z) {
            *x = v.re;
            *y = v.im;
        }
    }

    /// Flat index of −k.
    pub fn neg(&self, idx: usize) -> usize {
        let n = self.spec.n;
        let [a, b, c] = split(n, idx);
        let m = |i: usize| (n - i) % n;
        (m(a) * n + m(b)) * n + m(c)
    }

    pub fn same(&self, other: &Grid) -> bool {
        self.spec == other.spec
    }
}

#[inline]
fn split(n: usize, idx: usize) -> [usize; 3] {
    [idx / (n * n), (idx / n) % n, idx % n]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Repr {
    Physical,
    Spectral,
}

/// Complex scalar function on the grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    repr: Repr,
    data: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>, repr: Repr) -> Self {
        Self { grid: grid.clone(), repr, data: vec![CZERO; grid.len()] }
    }

    pub fn new(grid: &Arc<Grid>, repr: Repr, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), grid.len(), "field length does not match grid");
        Self { grid: grid.clone(), repr, data }
    }

    pub fn from_real(grid: &Arc<Grid>, data: &[f64]) -> Self {
        Self::new(grid, Repr::Physical, data.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> C64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, Repr::Physical, data)
    }

    /// e^{ik·x} for an integer wavevector k.
    pub fn plane_wave(grid: &Arc<Grid>, k: [i64; 3], amp: C64) -> Self {
        let mut f = Self::zeros(grid, Repr::Spectral);
        f.data[grid.index_of(k)] = amp;
        f
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn into_spectral(mut self) -> Self {
        if self.repr == Repr::Physical {
            self.grid.forward(&mut self.data);
            self.repr = Repr::Spectral;
        }
        self
    }

    pub fn into_physical(mut self) -> Self {
        if self.repr == Repr::Spectral {
            self.grid.inverse(&mut self.data);
            self.repr = Repr::Physical;
        }
        self
    }

    pub fn to_spectral(&self) -> Self {
        self.clone().into_spectral()
    }

    pub fn to_physical(&self) -> Self {
        self.clone().into_physical()
    }

    fn in_repr(&self, repr: Repr) -> std::borrow::Cow<'_, Self> {
        if self.repr == repr {
            std::borrow::Cow::Borrowed(self)
        } else if repr == Repr::Spectral {
            std::borrow::Cow::Owned(self.to_spectral())
        } else {
            std::borrow::Cow::Owned(self.to_physical())
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.grid.same(&other.grid) {
            Ok(())
        } else {
            Err(YmhError::GridMismatch)
        }
    }

    /// Applies a Fourier multiplier; the result keeps the input representation.
    pub fn multiplier(&self, sym: Symbol) -> Self {
        let repr = self.repr;
        let mut s = self.to_spectral();
        self.grid.apply_symbol(sym, &mut s.data);
        if repr == Repr::Physical {
            s.into_physical()
        } else {
            s
        }
    }

    pub fn partial(&self, j: usize) -> Self {
        self.multiplier(Symbol::Deriv(j))
    }

    /// Pointwise product followed by the dealias rule. Returns physical data.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let a = self.in_repr(Repr::Physical);
        let b = other.in_repr(Repr::Physical);
        let data = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
        Ok(Self::new(&self.grid, Repr::Physical, data).dealiased())
    }

    pub fn dealiased(self) -> Self {
        if self.grid.spec.dealias == Dealias::None {
            return self;
        }
        let repr = self.repr;
        let mut s = self.into_spectral();
        s.grid.truncate(&mut s.data);
        if repr == Repr::Physical {
            s.into_physical()
        } else {
            s
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { grid: self.grid.clone(), repr: self.repr, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn axpy(&mut self, c: C64, other: &Self) -> Result<()> {
        self.check(other)?;
        let o = other.in_repr(self.repr);
        self.data.iter_mut().zip(&o.data).for_each(|(a, b)| *a += c * b);
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// Squared L² norm computed from spectral coefficients weighted by ⟨ξ⟩^{2s}.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let spec = self.in_repr(Repr::Spectral);
        let w = self.grid.japanese();
        let sum: f64 = if s == 0.0 {
            spec.data.iter().map(|c| c.norm_sqr()).sum()
        } else {
            spec.data.iter().zip(w).map(|(c, &j)| j.powf(2.0 * s) * c.norm_sqr()).sum()
        };
        self.grid.volume() * sum
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// L² norm by physical-space quadrature.
    pub fn l2_norm_physical(&self) -> f64 {
        let p = self.in_repr(Repr::Physical);
        let dv = self.grid.volume() / self.grid.len() as f64;
        (dv * p.data.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// Largest |Im u| in physical space.
    pub fn max_imag(&self) -> f64 {
        let p = self.in_repr(Repr::Physical);
        p.data.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Lie-algebra valued field stored as coefficients in the orthonormal basis.
#[derive(Clone, Debug)]
pub struct AlgebraField {
    algebra: Arc<LieAlgebra>,
    comps: Vec<ScalarField>,
}

impl AlgebraField {
    pub fn zeros(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>, repr: Repr) -> Self {
        let comps = (0..algebra.dim()).map(|_| ScalarField::zeros(grid, repr)).collect();
        Self { algebra: algebra.clone(), comps }
    }

    pub fn from_components(algebra: &Arc<LieAlgebra>, comps: Vec<ScalarField>) -> Result<Self> {
        if comps.len() != algebra.dim() {
            return Err(YmhError::Parameter(format!(
                "{} components given, algebra has dimension {}",
                comps.len(),
                algebra.dim()
            )));
        }
        if comps.windows(2).any(|w| !w[0].grid.same(&w[1].grid)) {
            return Err(YmhError::GridMismatch);
        }
        Ok(Self { algebra: algebra.clone(), comps })
    }

    /// Real-valued field from a coefficient function.
    pub fn from_fn(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> Vec<f64>) -> Self {
        let d = algebra.dim();
        let mut comps: Vec<Vec<C64>> = vec![Vec::with_capacity(grid.len()); d];
        for idx in 0..grid.len() {
            let v = f(grid.x(idx));
            for a in 0..d {
                comps[a].push(C64::new(v[a], 0.0));
            }
        }
        let comps = comps.into_iter().map(|c| ScalarField::new(grid, Repr::Physical, c)).collect();
        Self { algebra: algebra.clone(), comps }
    }

    /// Real field from per-component real arrays.
    pub fn from_real(algebra: &Arc<LieAlgebra>, grid: &Arc<Grid>, comps: &[Vec<f64>]) -> Self {
        let comps = comps.iter().map(|c| ScalarField::from_real(grid, c)).collect();
        Self { algebra: algebra.clone(), comps }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.comps[0].grid
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [ScalarField] {
        &mut self.comps
    }

    pub fn comp(&self, a: usize) -> &ScalarField {
        &self.comps[a]
    }

    pub fn repr(&self) -> Repr {
        self.comps[0].repr
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.algebra.kind() != other.algebra.kind() {
            return Err(YmhError::KindMismatch(self.algebra.kind(), other.algebra.kind()));
        }
        if !self.grid().same(other.grid()) {
            return Err(YmhError::GridMismatch);
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { algebra: self.algebra.clone(), comps: self.comps.iter().map(f).collect() }
    }

    pub fn to_spectral(&self) -> Self {
        self.map(|c| c.to_spectral())
    }

    pub fn to_physical(&self) -> Self {
        self.map(|c| c.to_physical())
    }

    pub fn multiplier(&self, sym: Symbol) -> Self {
        self.map(|c| c.multiplier(sym))
    }

    pub fn partial(&self, j: usize) -> Self {
        self.multiplier(Symbol::Deriv(j))
    }

    pub fn dealiased(self) -> Self {
        let algebra = self.algebra;
        Self { algebra, comps: self.comps.into_iter().map(|c| c.dealiased()).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(C64::new(c, 0.0)))
    }

    pub fn scale_complex(&self, c: C64) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        self.check(other)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(C64::new(c, 0.0), b)?;
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Pointwise commutator, dealiased. Returns physical data.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let x = self.to_physical();
        let y = other.to_physical();
        let n = self.grid().len();
        let mut out: Vec<Vec<C64>> = vec![vec![CZERO; n]; self.algebra.dim()];
        for &(a, b, k, c) in self.algebra.structure_constants() {
            let (xa, xb) = (&x.comps[a].data, &x.comps[b].data);
            let (ya, yb) = (&y.comps[a].data, &y.comps[b].data);
            for (i, o) in out[k].iter_mut().enumerate() {
                *o += c * (xa[i] * yb[i] - xb[i] * ya[i]);
            }
        }
        let comps = out.into_iter().map(|d| ScalarField::new(self.grid(), Repr::Physical, d).dealiased()).collect();
        Ok(Self { algebra: self.algebra.clone(), comps })
    }

    /// self += c [x, y] pointwise, without dealiasing. All three fields must
    /// be physical; callers dealias the finished sum once.
    pub fn accumulate_bracket(&mut self, c: f64, x: &Self, y: &Self) -> Result<()> {
        self.check(x)?;
        self.check(y)?;
        if [self.repr(), x.repr(), y.repr()].iter().any(|r| *r != Repr::Physical) {
            return Err(YmhError::Parameter("accumulate_bracket needs physical fields".into()));
        }
        for &(a, b, k, f) in self.algebra.structure_constants() {
            let w = c * f;
            let (xa, xb) = (&x.comps[a].data, &x.comps[b].data);
            let (ya, yb) = (&y.comps[a].data, &y.comps[b].data);
            for (i, o) in self.comps[k].data.iter_mut().enumerate() {
                *o += w * (xa[i] * yb[i] - xb[i] * ya[i]);
            }
        }
        Ok(())
    }

    /// Pointwise inner product Σ_a u_a v_a (bilinear), dealiased.
    pub fn inner_field(&self, other: &Self) -> Result<ScalarField> {
        self.check(other)?;
        let x = self.to_physical();
        let y = other.to_physical();
        let n = self.grid().len();
        let mut out = vec![CZERO; n];
        for (xa, ya) in x.comps.iter().zip(&y.comps) {
            for i in 0..n {
                out[i] += xa.data[i] * ya.data[i];
            }
        }
        Ok(ScalarField::new(self.grid(), Repr::Physical, out).dealiased())
    }

    /// Scalar times algebra field, dealiased.
    pub fn scalar_product(&self, s: &ScalarField) -> Result<Self> {
        if !self.grid().same(s.grid()) {
            return Err(YmhError::GridMismatch);
        }
        let comps = self.comps.iter().map(|c| c.product(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self { algebra: self.algebra.clone(), comps })
    }

    /// Matrix value at a grid point (real part of the coefficients).
    pub fn element_at(&self, idx: usize) -> AlgebraElement {
        let p = self.to_physical();
        let c: Vec<f64> = p.comps.iter().map(|s| s.data[idx].re).collect();
        self.algebra.element(&c)
    }

    /// Coefficients at every point, physical representation, real parts.
    pub fn real_components(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| c.to_physical().data.iter().map(|v| v.re).collect()).collect()
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.comps.iter().map(|c| c.sobolev_norm_sq(s)).sum::<f64>().sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    pub fn max_imag(&self) -> f64 {
        self.comps.iter().map(|c| c.max_imag()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutator, AlgebraKind};
    use proptest::prelude::*;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(GridSpec::cube(n))
    }

    fn random_band(grid: &Arc<Grid>, band: i64, seed: u64) -> ScalarField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = ScalarField::zeros(grid, Repr::Spectral);
        for idx in 0..grid.len() {
            let k = grid.k(idx);
            if k.iter().all(|v| v.abs() <= band) {
                let neg = grid.neg(idx);
                if neg < idx {
                    continue;
                }
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                f.data[idx] = c;
                f.data[neg] = if neg == idx { C64::new(c.re, 0.0) } else { c.conj() };
            }
        }
        f.into_physical()
    }

    #[test]
    fn derivative_of_single_mode() {
        let g = grid(16);
        let u = ScalarField::from_fn(&g, |x| C64::new(0.0, x[0]).exp());
        let du = u.partial(0);
        for (a, b) in du.data().iter().zip(u.data()) {
            assert!((a - C64::new(0.0, 1.0) * b).norm() < 1e-13);
        }
    }

    #[test]
    fn riesz_of_constant_vanishes() {
        let g = grid(8);
        let u = ScalarField::from_fn(&g, |_| C64::new(2.5, 0.0));
        for j in 0..3 {
            assert!(u.multiplier(Symbol::Riesz(j)).max_abs() < 1e-15);
        }
        assert!(u.multiplier(Symbol::InvAbs).max_abs() < 1e-15);
    }

    #[test]
    fn bessel_single_mode() {
        let g = grid(8);
        let u = ScalarField::from_fn(&g, |x| C64::new(0.0, x[0]).exp());
        let v = u.multiplier(Symbol::Bessel(1.0));
        let want = (1.0f64 + 1.0).sqrt();
        for (a, b) in v.data().iter().zip(u.data()) {
            assert!((a - want * b).norm() < 1e-13);
        }
    }

    #[test]
    fn unknown_symbol_is_error() {
        assert!(matches!(Symbol::parse("laplace"), Err(YmhError::UnknownSymbol(_))));
        assert!(matches!(Symbol::parse("d4"), Err(YmhError::UnknownSymbol(_))));
        assert_eq!(Symbol::parse("riesz2").unwrap(), Symbol::Riesz(1));
        assert_eq!(Symbol::parse("bessel:0.5").unwrap(), Symbol::Bessel(0.5));
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(12, 1.0, Dealias::None).is_err());
        assert!(GridSpec::new(16, 0.0, Dealias::None).is_err());
        assert_eq!(GridSpec::cube(32).band_limit(), 10);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = grid(8);
        let zero = ScalarField::zeros(&g, Repr::Physical);
        assert_eq!(zero.sobolev_norm(1.0), 0.0);
        let c = C64::new(0.3, -0.4);
        let u = ScalarField::from_fn(&g, |_| c);
        let want = c.norm() * g.volume().sqrt();
        for s in [-1.0, 0.0, 0.7, 2.0] {
            assert!((u.sobolev_norm(s) - want).abs() < 1e-13 * want);
        }
        // single mode, lattice-sum oracle
        let k = [1i64, -2, 3];
        let w = ScalarField::plane_wave(&g, k, C64::new(1.0, 0.0)).into_physical();
        let kk = (1 + 4 + 9) as f64;
        for s in [0.5, 1.0, -0.5] {
            let oracle = (g.volume() * (1.0 + kk).powf(s)).sqrt();
            assert!((w.sobolev_norm(s) - oracle).abs() < 1e-12 * oracle);
        }
    }

    #[test]
    fn dealiased_product_matches_convolution() {
        let g = grid(16);
        let band = (g.spec().band_limit() / 2) as i64;
        let u = random_band(&g, band, 1).to_spectral();
        let v = random_band(&g, band, 2).to_spectral();
        let p = u.product(&v).unwrap().to_spectral();
        let mut oracle = vec![CZERO; g.len()];
        for i in 0..g.len() {
            if u.data[i] == CZERO {
                continue;
            }
            for j in 0..g.len() {
                if v.data[j] == CZERO {
                    continue;
                }
                let (a, b) = (g.k(i), g.k(j));
                let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                oracle[g.index_of(s)] += u.data[i] * v.data[j];
            }
        }
        let err: f64 = p.data.iter().zip(&oracle).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = oracle.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-12 * scale);
    }

    #[test]
    fn single_mode_products() {
        let g = grid(16);
        let u = ScalarField::plane_wave(&g, [1, 2, 0], C64::new(1.0, 0.0));
        let v = ScalarField::plane_wave(&g, [0, -1, 3], C64::new(1.0, 0.0));
        let p = u.product(&v).unwrap().to_spectral();
        let idx = g.index_of([1, 1, 3]);
        assert!((p.data[idx] - C64::new(1.0, 0.0)).norm() < 1e-14);
        let zero = ScalarField::zeros(&g, Repr::Spectral);
        assert!(u.product(&zero).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn real_pair_transforms() {
        let g = grid(8);
        let a = random_band(&g, 3, 3);
        let b = random_band(&g, 3, 4);
        let ar: Vec<f64> = a.data.iter().map(|c| c.re).collect();
        let br: Vec<f64> = b.data.iter().map(|c| c.re).collect();
        let (sa, sb) = g.forward_real_pair(&ar, &br);
        let ea = a.to_spectral();
        let eb = b.to_spectral();
        for i in 0..g.len() {
            assert!((sa[i] - ea.data[i]).norm() < 1e-14);
            assert!((sb[i] - eb.data[i]).norm() < 1e-14);
        }
        let (ra, rb) = g.inverse_real_pair(&sa, &sb);
        for i in 0..g.len() {
            assert!((ra[i] - ar[i]).abs() < 1e-13);
            assert!((rb[i] - br[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn field_bracket_matches_pointwise_matrices() {
        let g = grid(8);
        let alg = Arc::new(LieAlgebra::new(AlgebraKind::su(2)));
        let mk = |s: u64| {
            let comps: Vec<ScalarField> = (0..3).map(|a| random_band(&g, 1, s * 7 + a)).collect();
            AlgebraField::from_components(&alg, comps).unwrap()
        };
        let (x, y) = (mk(1), mk(2));
        let br = x.bracket(&y).unwrap();
        // band 1 products stay inside the 2/3 band for N = 8, so pointwise values agree
        for idx in [0, 5, 77, 300] {
            let want = commutator(&x.element_at(idx), &y.element_at(idx)).unwrap();
            assert!(br.element_at(idx).sub(&want).unwrap().norm() < 1e-13);
        }
        assert!(x.bracket(&x).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_error() {
        let u = ScalarField::zeros(&grid(8), Repr::Physical);
        let v = ScalarField::zeros(&grid(16), Repr::Physical);
        assert!(matches!(u.product(&v), Err(YmhError::GridMismatch)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn round_trip(seed in any::<u64>()) {
            let g = grid(8);
            let u = random_band(&g, 4, seed);
            let back = u.to_spectral().to_physical();
            let err = back.sub(&u).unwrap().l2_norm_physical();
            prop_assert!(err <= 1e-12 * u.l2_norm_physical());
        }

        #[test]
        fn parseval(seed in any::<u64>()) {
            let g = grid(8);
            let u = random_band(&g, 4, seed);
            let a = u.l2_norm_physical();
            let b = u.l2_norm();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn riesz_times_abs_is_derivative(seed in any::<u64>(), j in 0usize..3) {
            let g = grid(8);
            let mut u = random_band(&g, 3, seed).to_spectral();
            u.data_mut()[0] = CZERO;
            let lhs = u.multiplier(Symbol::Abs).multiplier(Symbol::Riesz(j));
            let rhs = u.partial(j);
            prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-12 * rhs.l2_norm().max(1e-300));
        }

        #[test]
        fn multipliers_preserve_reality(seed in any::<u64>(), j in 0usize..3) {
            let g = grid(8);
            let u = random_band(&g, 4, seed);
            for sym in [Symbol::Deriv(j), Symbol::Riesz(j), Symbol::Abs, Symbol::InvAbs, Symbol::Bessel(-0.5)] {
                prop_assert!(u.multiplier(sym).max_imag() < 1e-13);
            }
        }
    }
}
