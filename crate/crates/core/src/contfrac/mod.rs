//! Continued fractions of the divergence parameter θ.
//!
//! Exact inputs (rationals and quadratic surds) are expanded in exact
//! arithmetic. Float inputs are expanded exactly on the dyadic value of the
//! double and truncated once further coefficients stop being meaningful.

mod parse;
mod surd;

pub use parse::{parse_theta, parse_theta_with_eps};
pub use surd::Quad;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

/// A quadratic surd `(a + b√d)/c`, normalized so that `d` is squarefree,
/// `b ≠ 0`, `c > 0` and `gcd(a, b, c) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    c: BigInt,
}

impl Surd {
    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn to_quad(&self) -> Quad {
        Quad {
            x: BigRational::new(self.a.clone(), self.c.clone()),
            y: BigRational::new(self.b.clone(), self.c.clone()),
            d: self.d.clone(),
        }
    }
}

/// The divergence parameter θ.
#[derive(Clone, Debug, PartialEq)]
pub enum RealParam {
    Rational(BigRational),
    QuadraticSurd(Surd),
    Float { x: f64, eps: f64 },
}

impl RealParam {
    /// The golden ratio (1+√5)/2.
    pub fn golden() -> Self {
        RealParam::surd(1, 1, 5, 2).expect("valid surd")
    }

    pub fn ratio(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParam("zero denominator".into()));
        }
        Ok(RealParam::Rational(BigRational::new(p.into(), q.into())))
    }

    pub fn float(x: f64, eps: f64) -> Result<Self> {
        if !x.is_finite() || !(eps > 0.0) {
            return Err(Error::InvalidParam(format!("float θ = {x}, eps = {eps}")));
        }
        Ok(RealParam::Float { x, eps })
    }

    /// `(a + b√d)/c`. Square factors of `d` are absorbed into `b`; the
    /// result collapses to a rational when no irrational part remains.
    pub fn surd(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        if c == 0 || d <= 0 {
            return Err(Error::InvalidParam(format!("surd ({a}+{b}√{d})/{c}")));
        }
        let root = Quad::sqrt_of(&BigRational::from_integer(d.into())).expect("d > 0");
        let q = Quad::rational(BigRational::from_integer(a.into()))
            .add(&root.scale(&b.into()))
            .expect("same field")
            .scale(&BigInt::one());
        let c = Quad::rational(BigRational::from_integer(c.into()));
        Ok(Self::from_quad(&q.div(&c).expect("c ≠ 0")))
    }

    pub fn from_quad(q: &Quad) -> Self {
        if q.is_rational() {
            return RealParam::Rational(q.x.clone());
        }
        let (a, b, c) = q.integer_form();
        RealParam::QuadraticSurd(Surd { a, b, d: q.d.clone(), c })
    }

    pub fn to_quad(&self) -> Option<Quad> {
        match self {
            RealParam::Rational(r) => Some(Quad::rational(r.clone())),
            RealParam::QuadraticSurd(s) => Some(s.to_quad()),
            RealParam::Float { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RealParam::Float { .. })
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealParam::Rational(_))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            RealParam::Rational(r) => r.is_integer(),
            RealParam::QuadraticSurd(_) => false,
            RealParam::Float { x, .. } => x.fract() == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealParam::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            RealParam::QuadraticSurd(s) => s.to_quad().to_f64(),
            RealParam::Float { x, .. } => *x,
        }
    }

    pub fn floor(&self) -> BigInt {
        match self {
            RealParam::Rational(r) => r.floor().to_integer(),
            RealParam::QuadraticSurd(s) => s.to_quad().floor(),
            RealParam::Float { x, .. } => BigInt::from(x.floor() as i64),
        }
    }

    /// `{θ}` as a double, computed without cancellation for exact inputs.
    pub fn fract_f64(&self) -> f64 {
        match self {
            RealParam::Rational(r) => r.fract().to_f64().unwrap_or(f64::NAN),
            RealParam::QuadraticSurd(s) => s.to_quad().fract().to_f64(),
            RealParam::Float { x, .. } => x - x.floor(),
        }
    }

    /// `θ + k` for an integer shift.
    pub fn shifted(&self, k: i64) -> Self {
        match self {
            RealParam::Rational(r) => RealParam::Rational(r + BigInt::from(k)),
            RealParam::QuadraticSurd(s) => {
                let q = s.to_quad().add(&Quad::from_int(k)).expect("same field");
                Self::from_quad(&q)
            }
            RealParam::Float { x, eps } => RealParam::Float { x: x + k as f64, eps: *eps },
        }
    }
}

impl fmt::Display for RealParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealParam::Rational(r) => write!(f, "{r}"),
            RealParam::QuadraticSurd(s) => write!(f, "({}{:+}*sqrt({}))/{}", s.a, s.b, s.d, s.c),
            RealParam::Float { x, .. } => write!(f, "{x:.17}"),
        }
    }
}

/// Repeating block of a surd expansion: coefficients `start..start+len`
/// repeat forever.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Period {
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub coefficients: Vec<BigInt>,
    /// False when the expansion was cut by the Float tolerance.
    pub exact: bool,
    /// True when the value is rational and every coefficient is present.
    pub terminated: bool,
    pub period: Option<Period>,
}

impl ContinuedFraction {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub index: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tail {
    pub index: usize,
    /// Exact value: a rational or a surd.
    pub value: RealParam,
}

/// Core expansion; returns coefficients, exact tails θ_0..θ_{len-1} and flags.
fn expand_raw(theta: &RealParam, max_terms: usize) -> (ContinuedFraction, Vec<RealParam>) {
    let mut coeffs = Vec::new();
    let mut tails = Vec::new();
    let mut terminated = false;
    let mut period = None;
    match theta {
        RealParam::Rational(r) => {
            let mut x = r.clone();
            while coeffs.len() < max_terms {
                tails.push(RealParam::Rational(x.clone()));
                let a = x.floor().to_integer();
                let rest = &x - BigRational::from_integer(a.clone());
                coeffs.push(a);
                if rest.is_zero() {
                    terminated = true;
                    break;
                }
                x = rest.recip();
            }
        }
        RealParam::QuadraticSurd(s) => {
            let (mut p, mut q, dd, sqrt_part) = surd_state(s);
            let mut seen = std::collections::HashMap::new();
            let isq = num_integer::Roots::sqrt(&dd);
            while coeffs.len() < max_terms {
                if period.is_none() {
                    if let Some(&start) = seen.get(&(p.clone(), q.clone())) {
                        period = Some(Period { start, len: coeffs.len() - start });
                    } else {
                        seen.insert((p.clone(), q.clone()), coeffs.len());
                    }
                }
                tails.push(RealParam::from_quad(&state_quad(&p, &q, &sqrt_part, &s.d)));
                let a = state_floor(&p, &q, &isq);
                let p_next = &a * &q - &p;
                let q_next = (&dd - &p_next * &p_next) / &q;
                coeffs.push(a);
                p = p_next;
                q = q_next;
            }
        }
        RealParam::Float { x, eps } => {
            let mut v = BigRational::from_float(*x).expect("finite");
            let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero());
            while coeffs.len() < max_terms {
                let a = v.floor().to_integer();
                let q_new = &q_prev + &a * &q_cur;
                let qf = q_new.to_f64().unwrap_or(f64::INFINITY);
                if !coeffs.is_empty() && qf * qf * eps > 1.0 {
                    break;
                }
                q_prev = std::mem::replace(&mut q_cur, q_new);
                tails.push(RealParam::Rational(v.clone()));
                let rest = &v - BigRational::from_integer(a.clone());
                coeffs.push(a);
                if rest.is_zero() {
                    terminated = true;
                    break;
                }
                if rest.to_f64().unwrap_or(0.0) < *eps {
                    break;
                }
                v = rest.recip();
            }
        }
    }
    let exact = theta.is_exact();
    (ContinuedFraction { coefficients: coeffs, exact, terminated, period }, tails)
}

/// Converts `(a + b√d)/c` into `(P + √D)/Q` with `Q | D − P²`.
fn surd_state(s: &Surd) -> (BigInt, BigInt, BigInt, BigInt) {
    let (mut a, b, mut c) = (s.a.clone(), s.b.clone(), s.c.clone());
    if b.is_negative() {
        a = -a;
        c = -c;
    }
    let b = b.abs();
    let cabs = c.abs();
    let p = &a * &cabs;
    let q = &c * &cabs;
    let sqrt_part = &b * &cabs;
    let dd = &sqrt_part * &sqrt_part * &s.d;
    (p, q, dd, sqrt_part)
}

fn state_quad(p: &BigInt, q: &BigInt, sqrt_part: &BigInt, d: &BigInt) -> Quad {
    Quad {
        x: BigRational::new(p.clone(), q.clone()),
        y: BigRational::new(sqrt_part.clone(), q.clone()),
        d: d.clone(),
    }
}

fn state_floor(p: &BigInt, q: &BigInt, isq: &BigInt) -> BigInt {
    let num = p + isq;
    if q.is_positive() {
        num.div_floor(q)
    } else {
        -(num.div_floor(&-q) + BigInt::one())
    }
}

/// Coefficients `a_i = ⌊θ_i⌋`, `θ_{i+1} = 1/{θ_i}`, at most `max_terms`.
pub fn expand(theta: &RealParam, max_terms: usize) -> ContinuedFraction {
    expand_raw(theta, max_terms.max(1)).0
}

/// Convergents from index −2 to `n_max` (clamped to the coefficients present).
pub fn convergents(cf: &ContinuedFraction, n_max: usize) -> Vec<Convergent> {
    let mut out = vec![
        Convergent { p: BigInt::zero(), q: BigInt::one(), index: -2 },
        Convergent { p: BigInt::one(), q: BigInt::zero(), index: -1 },
    ];
    for (i, a) in cf.coefficients.iter().enumerate().take(n_max + 1) {
        let k = out.len();
        let p = &out[k - 2].p + a * &out[k - 1].p;
        let q = &out[k - 2].q + a * &out[k - 1].q;
        out.push(Convergent { p, q, index: i as i64 });
    }
    out
}

/// `(p_{n−2} + k·p_{n−1}) / (q_{n−2} + k·q_{n−1})` for `k = 0..a_n−1`.
pub fn intermediate_convergents(cf: &ContinuedFraction, n: usize) -> Vec<Convergent> {
    if n >= cf.len() {
        return Vec::new();
    }
    let conv = convergents(cf, n);
    // conv[i] carries index i − 2
    let prev2 = &conv[n];
    let prev1 = &conv[n + 1];
    let a = cf.coefficients[n].to_i64().unwrap_or(i64::MAX).max(0);
    (0..a)
        .map(|k| {
            let k = BigInt::from(k);
            Convergent { p: &prev2.p + &k * &prev1.p, q: &prev2.q + &k * &prev1.q, index: n as i64 }
        })
        .collect()
}

/// The tail θ_n = [a_n; a_{n+1}, …] in exact arithmetic.
pub fn tail(theta: &RealParam, n: usize) -> Result<Tail> {
    let (_, tails) = expand_raw(theta, n + 1);
    tails
        .get(n)
        .cloned()
        .map(|value| Tail { index: n, value })
        .ok_or(Error::TailUndefined(n))
}

/// Residuals of the continued-fraction identities for `n ≤ n_max`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityReport {
    pub n_checked: usize,
    /// Determinant identity held exactly in integers for every n checked.
    pub determinant_exact: bool,
    /// Max double-precision residual per identity: reduite, lemma on θ_{n+1},
    /// the affine identity at x ∈ {0, a_n, θ_n}, and the telescoping lemma.
    pub residuals: [f64; 4],
    pub max_residual: f64,
    /// Exact evaluation of every identity gave zero (exact inputs only).
    pub exact_zero: Option<bool>,
}

/// Checks the convergent identities up to `n_max`.
///
/// The determinant identity is checked in integers. The others are evaluated
/// in double precision from exact tails; for exact θ they are also checked
/// in exact field arithmetic.
pub fn verify_identities(theta: &RealParam, n_max: usize) -> Result<IdentityReport> {
    let (cf, tails) = expand_raw(theta, n_max + 3);
    let conv = convergents(&cf, cf.len().saturating_sub(1));
    let pq = |k: i64| -> (&BigInt, &BigInt) {
        let c = &conv[(k + 2) as usize];
        (&c.p, &c.q)
    };
    let exact_theta = theta.to_quad();
    let theta_f = theta.to_f64();
    let tail_f: Vec<f64> = tails.iter().map(RealParam::to_f64).collect();
    let mut residuals = [0.0f64; 4];
    let mut exact_ok = exact_theta.is_some();
    let last = n_max.min(cf.len().saturating_sub(1));
    for n in 0..=last {
        let ni = n as i64;
        let (p1, q1) = pq(ni - 1);
        let (p0, q0) = pq(ni);
        let det = p1 * q0 - p0 * q1;
        let want = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        if det != want {
            return Err(Error::IdentityViolation { n: ni, what: "determinant".into(), residual: f64::NAN });
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let f = |b: &BigInt| b.to_f64().unwrap_or(f64::NAN);
        let (p2, q2) = pq(ni - 2);
        let th_n = tail_f[n];
        let d_n = f(q2) + th_n * f(q1);
        // θ = (p_{n−2} + θ_n p_{n−1}) / (q_{n−2} + θ_n q_{n−1})
        let r0 = (theta_f - (f(p2) + th_n * f(p1)) / d_n).abs();
        residuals[0] = residuals[0].max(r0);
        // affine identity at x ∈ {0, a_n, θ_n}
        let a_n = f(&cf.coefficients[n]);
        for x in [0.0, a_n, th_n] {
            let denom = f(q2) + x * f(q1);
            if denom == 0.0 {
                continue;
            }
            let lhs = theta_f - (f(p2) + x * f(p1)) / denom;
            let rhs = (th_n - x) * sign / (denom * d_n);
            residuals[2] = residuals[2].max((lhs - rhs).abs());
        }
        if n + 1 < tails.len() {
            let th_n1 = tail_f[n + 1];
            let lhs = th_n1 / (f(q1) + th_n1 * f(q0));
            residuals[1] = residuals[1].max((lhs - 1.0 / d_n).abs());
            if n + 2 < tails.len() {
                let (_, qn1) = pq(ni + 1);
                let th_n2 = tail_f[n + 2];
                let a_n1 = f(&cf.coefficients[n + 1]);
                let lhs = 1.0 / d_n - a_n1 / (f(q1) + th_n1 * f(q0));
                let rhs = 1.0 / (f(q0) + th_n2 * f(qn1));
                residuals[3] = residuals[3].max((lhs - rhs).abs());
            }
        }
        if let Some(th) = &exact_theta {
            exact_ok &= exact_identities(th, &tails, &cf, &conv, n);
        }
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(IdentityReport {
        n_checked: last + 1,
        determinant_exact: true,
        residuals,
        max_residual,
        exact_zero: exact_theta.map(|_| exact_ok),
    })
}

fn exact_identities(
    theta: &Quad,
    tails: &[RealParam],
    cf: &ContinuedFraction,
    conv: &[Convergent],
    n: usize,
) -> bool {
    let z = |b: &BigInt| Quad::rational(BigRational::from_integer(b.clone()));
    let c = |k: i64| &conv[(k + 2) as usize];
    let t = |k: usize| tails[k].to_quad().expect("exact tail");
    let ni = n as i64;
    let (p2, q2) = (z(&c(ni - 2).p), z(&c(ni - 2).q));
    let (p1, q1) = (z(&c(ni - 1).p), z(&c(ni - 1).q));
    let th_n = t(n);
    let d_n = q2.add(&th_n.mul(&q1).unwrap()).unwrap();
    let reduite = p2.add(&th_n.mul(&p1).unwrap()).unwrap().div(&d_n).unwrap();
    let mut ok = reduite == *theta;
    let sign = Quad::from_int(if n % 2 == 0 { 1 } else { -1 });
    for x in [Quad::from_int(0), z(&cf.coefficients[n]), th_n.clone()] {
        let denom = q2.add(&x.mul(&q1).unwrap()).unwrap();
        if denom.is_zero() {
            continue;
        }
        let lhs = theta.sub(&p2.add(&x.mul(&p1).unwrap()).unwrap().div(&denom).unwrap()).unwrap();
        let rhs = th_n.sub(&x).unwrap().mul(&sign).unwrap().div(&denom.mul(&d_n).unwrap()).unwrap();
        ok &= lhs == rhs;
    }
    if n + 1 < tails.len() {
        let q0 = z(&c(ni).q);
        let th_n1 = t(n + 1);
        let den1 = q1.add(&th_n1.mul(&q0).unwrap()).unwrap();
        ok &= th_n1.div(&den1).unwrap() == d_n.recip().unwrap();
        if n + 2 < tails.len() {
            let qn1 = z(&c(ni + 1).q);
            let th_n2 = t(n + 2);
            let lhs = d_n.recip().unwrap().sub(&z(&cf.coefficients[n + 1]).div(&den1).unwrap()).unwrap();
            let rhs = q0.add(&th_n2.mul(&qn1).unwrap()).unwrap().recip().unwrap();
            ok &= lhs == rhs;
        }
    }
    ok
}

/// Cached expansion data in double precision, used by the geometric modules.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub theta: RealParam,
    a: Vec<BigInt>,
    q: Vec<BigInt>,
    qf: Vec<f64>,
    tails: Vec<f64>,
    terminated: bool,
}

impl Expansion {
    /// Expands until some denominator exceeds `q_limit`, plus three more
    /// terms when available.
    pub fn new(theta: &RealParam, q_limit: f64) -> Self {
        let mut terms = 16usize;
        loop {
            let (cf, tails) = expand_raw(theta, terms);
            let conv = convergents(&cf, cf.len().saturating_sub(1));
            let qs: Vec<BigInt> = conv.iter().map(|c| c.q.clone()).collect();
            let qf: Vec<f64> = qs.iter().map(|q| q.to_f64().unwrap_or(f64::INFINITY)).collect();
            let reached = qf.iter().position(|&q| q > q_limit);
            let enough = match reached {
                Some(i) => qf.len() >= i + 4,
                None => false,
            };
            let finished = cf.len() < terms;
            if enough || finished || terms > 4096 {
                return Expansion {
                    theta: theta.clone(),
                    a: cf.coefficients,
                    q: qs,
                    qf,
                    tails: tails.iter().map(RealParam::to_f64).collect(),
                    terminated: cf.terminated,
                };
            }
            terms *= 2;
        }
    }

    /// Number of coefficients a_0..a_{len−1}.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn a(&self, k: usize) -> Option<i64> {
        self.a.get(k).and_then(|a| a.to_i64())
    }

    /// q_k for k ≥ −2.
    pub fn q(&self, k: i64) -> Option<f64> {
        self.qf.get((k + 2) as usize).copied()
    }

    pub fn q_big(&self, k: i64) -> Option<&BigInt> {
        self.q.get((k + 2) as usize)
    }

    /// θ_k; infinite right after a terminated rational expansion.
    pub fn tail(&self, k: usize) -> Option<f64> {
        if k < self.tails.len() {
            Some(self.tails[k])
        } else if self.terminated && k == self.tails.len() {
            Some(f64::INFINITY)
        } else {
            None
        }
    }

    /// δ_k = q_k θ − p_k = (−1)^k / (q_{k−1} + θ_{k+1} q_k).
    pub fn delta(&self, k: i64) -> Option<f64> {
        let th = self.tail((k + 1) as usize)?;
        let q_prev = self.q(k - 1)?;
        let q_k = self.q(k)?;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        if th.is_infinite() {
            return Some(0.0);
        }
        Some(sign / (q_prev + th * q_k))
    }

    /// Largest index k with q_k known.
    pub fn last_index(&self) -> i64 {
        self.qf.len() as i64 - 3
    }

    /// Indices k ≥ 0 whose denominators q_k, plus all intermediate
    /// denominators, up to `limit`.
    pub fn denominators_up_to(&self, limit: f64) -> Vec<u64> {
        let mut out = Vec::new();
        for n in 0..self.len() {
            let (q2, q1) = (self.q(n as i64 - 2).unwrap(), self.q(n as i64 - 1).unwrap());
            if q2 > limit {
                break;
            }
            let a = self.a(n).unwrap_or(i64::MAX);
            let mut k = 0i64;
            while k <= a {
                let v = q2 + k as f64 * q1;
                if v > limit || (q1 == 0.0 && k > 0) {
                    break;
                }
                if v >= 1.0 {
                    out.push(v as u64);
                }
                k += 1;
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
