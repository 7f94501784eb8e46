//! Hypothesis lists of the two product theorems and the registered
//! estimate families as exponent tuples.

use super::{Modulation, NormSpec};
use crate::nullform::japanese;

const TOL: f64 = 1e-12;

fn gt(a: f64, b: f64) -> bool {
    a > b + TOL
}

fn ge(a: f64, b: f64) -> bool {
    a >= b - TOL
}

fn eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

/// Per-condition verdicts of a hypothesis list.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    pub conditions: Vec<(&'static str, bool)>,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.conditions.iter().all(|c| c.1)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.conditions.iter().filter(|c| !c.1).map(|c| c.0).collect()
    }
}

/// Product theorem ‖uv‖_{H^{−s₀,b₀}} ≲ ‖u‖_{H^{s₁,b₁}} ‖v‖_{H^{s₂,b₂}} for
/// (s₀, s₁, s₂, b₀, b₁, b₂).
pub fn atlas_conditions(t: [f64; 6]) -> Admissibility {
    let [s0, s1, s2, b0, b1, b2] = t;
    let ss = s0 + s1 + s2;
    let sb = b0 + b1 + b2;
    let min_bb = (b0 + b1).min(b0 + b2).min(b1 + b2);
    let min_mixed = (b0 + s1 + s2).min(s0 + b1 + s2).min(s0 + s1 + b2);
    let min_ss = (s0 + s1).min(s0 + s2).min(s1 + s2);
    Admissibility {
        conditions: vec![
            ("b_i >= 0", [b0, b1, b2].iter().all(|&b| ge(b, 0.0))),
            ("sum b > 1/2", gt(sb, 0.5)),
            ("sum s > 2 - sum b", gt(ss, 2.0 - sb)),
            ("sum s > 3/2 - min(b_i+b_j)", gt(ss, 1.5 - min_bb)),
            ("sum s > 3/2 - min(b0+s1+s2, s0+b1+s2, s0+s1+b2)", gt(ss, 1.5 - min_mixed)),
            ("sum s >= 1", ge(ss, 1.0)),
            ("min(s_i+s_j) >= 0", ge(min_ss, 0.0)),
            ("last two not both equalities", !(eq(ss, 1.0) && eq(min_ss, 0.0))),
        ],
    }
}

/// Null form theorem ‖B_θ(u,v)‖_{H^{−σ₀,−β₀}} ≲ ‖u‖_{X^{σ₁,β₁}_±} ‖v‖_{X^{σ₂,β₂}_±′}
/// for (σ₀, σ₁, σ₂, β₀, β₁, β₂).
pub fn nullform_conditions(t: [f64; 6]) -> Admissibility {
    let [g0, g1, g2, be0, be1, be2] = t;
    let ss = g0 + g1 + g2;
    let min_last = (g0 + g1).min(g0 + g2).min(be0 + g1 + g2);
    Admissibility {
        conditions: vec![
            (
                "0 <= beta0 < 1/2 < beta1, beta2 < 1",
                ge(be0, 0.0) && gt(0.5, be0) && [be1, be2].iter().all(|&b| gt(b, 0.5) && gt(1.0, b)),
            ),
            ("sum sigma + beta0 > 3/2 - (beta0+sigma1+sigma2)", gt(ss + be0, 1.5 - (be0 + g1 + g2))),
            ("sum sigma > 3/2 - (sigma0+beta1+sigma2)", gt(ss, 1.5 - (g0 + be1 + g2))),
            ("sum sigma > 3/2 - (sigma0+sigma1+beta2)", gt(ss, 1.5 - (g0 + g1 + be2))),
            ("sum sigma + beta0 >= 1", ge(ss + be0, 1.0)),
            ("min(sigma0+sigma1, sigma0+sigma2, beta0+sigma1+sigma2) >= 0", ge(min_last, 0.0)),
            ("last two not both equalities", !(eq(ss + be0, 1.0) && eq(min_last, 0.0))),
        ],
    }
}

/// One application of a theorem used to justify an estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Hypothesis {
    Atlas([f64; 6]),
    Nullform([f64; 6]),
}

impl Hypothesis {
    pub fn check(&self) -> Admissibility {
        match *self {
            Self::Atlas(t) => atlas_conditions(t),
            Self::Nullform(t) => nullform_conditions(t),
        }
    }

    pub fn tuple(&self) -> [f64; 6] {
        match *self {
            Self::Atlas(t) | Self::Nullform(t) => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    Identity,
    /// |∇|
    AbsGrad,
    /// ⟨∇⟩
    JapGrad,
}

impl Multiplier {
    pub fn symbol(self, xi: [f64; 3]) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::AbsGrad => xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Self::JapGrad => japanese(xi),
        }
    }
}

/// A factor enters the product as `in_product` u and the right-hand side as
/// ‖`in_norm` u‖ in `norm`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factor {
    pub in_product: Multiplier,
    pub in_norm: Multiplier,
    pub norm: NormSpec,
}

impl Factor {
    fn plain(s: f64, b: f64) -> Self {
        Self { in_product: Multiplier::Identity, in_norm: Multiplier::Identity, norm: NormSpec::wave(s, b) }
    }

    fn grad_in_norm(s: f64, b: f64) -> Self {
        Self { in_norm: Multiplier::AbsGrad, ..Self::plain(s, b) }
    }

    fn jap_in_product(s: f64, b: f64) -> Self {
        Self { in_product: Multiplier::JapGrad, ..Self::plain(s, b) }
    }

    /// X^{s,b}_±; the sign is chosen per probe.
    fn cone(s: f64, b: f64) -> Self {
        Self { norm: NormSpec::new(s, b, Modulation::Plus), ..Self::plain(s, b) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// pointwise product of all factors
    Product,
    /// B_θ of two factors
    NullForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub id: &'static str,
    pub kind: Kind,
    pub lhs: NormSpec,
    pub factors: Vec<Factor>,
    /// theorem applications the estimate is reduced to, in order
    pub hypotheses: Vec<Hypothesis>,
}

impl Estimate {
    pub fn admissibility(&self) -> Vec<Admissibility> {
        self.hypotheses.iter().map(|h| h.check()).collect()
    }

    pub fn admissible(&self) -> bool {
        self.admissibility().iter().all(|a| a.admissible())
    }

    /// (lhs s, lhs b, then s, b of each factor).
    pub fn exponent_tuple(&self) -> Vec<f64> {
        let mut v = vec![self.lhs.s, self.lhs.b];
        for f in &self.factors {
            v.push(f.norm.s);
            v.push(f.norm.b);
        }
        v
    }
}

/// All registered estimates with s = 1 − ε, b = ½ + 2ε.
///
/// Estimates with |∇|u on the right carry the tuple of their
/// high-frequency form (‖|∇|u‖_{H^{σ,b}} replaced by ‖u‖_{H^{σ+1,b}}).
/// A negative modulation exponent on the left enters the product theorem
/// as b₀ = 0, which only strengthens the claim.
pub fn catalog(eps: f64) -> Vec<Estimate> {
    use Hypothesis::{Atlas, Nullform};
    let s = 1.0 - eps;
    let b = 0.5 + 2.0 * eps;
    let null_lhs = b - 1.0 + eps;
    let non_lhs = b - 1.0 - eps;
    let nf = |id, l0: f64, l1: f64, u: (f64, f64), v: (f64, f64)| Estimate {
        id,
        kind: Kind::NullForm,
        lhs: NormSpec::wave(l0, l1),
        factors: vec![Factor::cone(u.0, u.1), Factor::cone(v.0, v.1)],
        hypotheses: vec![Nullform([-l0, u.0, v.0, -l1, u.1, v.1])],
    };
    let prod = |id, lhs: NormSpec, factors: Vec<Factor>, hypotheses: Vec<Hypothesis>| Estimate {
        id,
        kind: Kind::Product,
        lhs,
        factors,
        hypotheses,
    };
    let w = NormSpec::wave;
    let g = Factor::grad_in_norm;
    let p = Factor::plain;
    vec![
        nf("NullEst1:1", s - 1.0, null_lhs, (s, b), (s - 1.0, b)),
        nf("NullEst2:1", -1.0, null_lhs, (s, b), (-1.0, b)),
        nf("NullEst3:1", -1.0, null_lhs, (s - 1.0, b), (s - 1.0, b)),
        nf("NullEst4:1", -1.0, null_lhs, (0.0, b), (0.0, b)),
        nf("NullEst5:1", 0.0, null_lhs, (s, b), (0.0, b)),
        prod(
            "NullEst1:2",
            w(s - 1.0, 0.0),
            vec![g(s - 1.0, b), p(s + 1.0, b)],
            vec![Atlas([1.0 - s, s, s + 1.0, 0.0, b, b])],
        ),
        prod(
            "NullEst1:3",
            w(s - 1.0, 0.0),
            vec![g(s + 1.0, b), p(s - 1.0, b)],
            vec![Atlas([1.0 - s, s + 2.0, s - 1.0, 0.0, b, b])],
        ),
        prod("NullEst1:4", w(-1.0, 0.0), vec![g(s - 1.0, b), p(1.0, b)], vec![Atlas([1.0, s, 1.0, 0.0, b, b])]),
        prod("NullEst1:5", w(-1.0, 0.0), vec![g(s + 1.0, b), p(-1.0, b)], vec![Atlas([1.0, s + 2.0, -1.0, 0.0, b, b])]),
        prod(
            "NullEst1:6",
            w(-1.0, 0.0),
            vec![p(s - 1.0, b), p(s + 1.0, b)],
            vec![Atlas([1.0, s - 1.0, s + 1.0, 0.0, b, b])],
        ),
        prod("NullEst1:7", w(-1.0, 0.0), vec![p(0.0, b), p(2.0, b)], vec![Atlas([1.0, 0.0, 2.0, 0.0, b, b])]),
        prod("NullEst1:8", w(0.0, 0.0), vec![g(s - 1.0, b), p(2.0, b)], vec![Atlas([0.0, s, 2.0, 0.0, b, b])]),
        prod("NullEst1:9", w(0.0, 0.0), vec![g(s + 1.0, b), p(0.0, b)], vec![Atlas([0.0, s + 2.0, 0.0, 0.0, b, b])]),
        prod(
            "NonLinEst-A-13",
            w(s - 1.0, non_lhs),
            vec![p(s, b), p(0.0, b)],
            vec![Atlas([1.0 - s, s, 0.0, 0.0, b, b])],
        ),
        prod(
            "NonLinEst-A-14",
            w(s - 1.0, non_lhs),
            vec![p(1.0, b), Factor::jap_in_product(1.0, b)],
            vec![Atlas([1.0 - s, 1.0, 0.0, 0.0, b, b])],
        ),
        prod(
            "NonLinEst-A-15",
            w(s - 1.0, non_lhs),
            vec![p(s, b), p(s, b), p(s, b)],
            vec![Atlas([1.0 - s, 0.5, 1.0, 0.0, 0.0, b]), Atlas([-0.5, s, s, 0.0, b, b])],
        ),
        prod(
            "NonLinEst-F-13",
            w(-1.0, non_lhs),
            vec![p(s, b), p(s, b), p(0.0, b)],
            vec![Atlas([1.0, 0.5, 0.0, 0.0, 0.0, b]), Atlas([-0.5, s, s, 0.0, b, b])],
        ),
        prod(
            "NonLinEst-F-14",
            w(-1.0, non_lhs),
            vec![p(s, b), p(1.0, b), Factor::jap_in_product(1.0, b)],
            vec![Atlas([1.0, 0.5, 0.0, 0.0, 0.0, b]), Atlas([-0.5, s, s, 0.0, b, b])],
        ),
        prod(
            "NonLinEst-F-15",
            w(-1.0, non_lhs),
            vec![p(s, b), p(s, b), p(s, b), p(s, b)],
            vec![
                Atlas([1.0, 0.0, s, 0.0, 0.0, b]),
                Atlas([0.0, 0.5 + eps, s, 0.0, 0.0, b]),
                Atlas([-0.5 - eps, s, s, 0.0, b, b]),
            ],
        ),
        prod(
            "NonLinEst-P-13",
            w(0.0, non_lhs),
            vec![p(s, b), p(s, b), p(1.0, b)],
            vec![Atlas([0.0, 0.5, 1.0, 0.0, 0.0, b]), Atlas([-0.5, s, s, 0.0, b, b])],
        ),
    ]
}
