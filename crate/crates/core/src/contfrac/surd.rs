//! Exact arithmetic in a real quadratic field Q(√d).

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// `x + y√d`. `d == 1` marks a plain rational (then `y == 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub x: BigRational,
    pub y: BigRational,
    pub d: BigInt,
}

/// Splits `m > 0` as `k²·s` with `s` squarefree. Trial division, so meant
/// for moderate radicands.
pub fn squarefree_split(m: &BigInt) -> (BigInt, BigInt) {
    assert!(m.is_positive());
    let mut rest = m.clone();
    let mut k = BigInt::one();
    let mut s = BigInt::one();
    let mut p = BigInt::from(2u8);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= &p;
        }
        if e % 2 == 1 {
            s *= &p;
        }
        p += if p == BigInt::from(2u8) { 1 } else { 2 };
    }
    (k, s * rest)
}

pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Quad {
    pub fn rational(x: BigRational) -> Self {
        Quad { x, y: BigRational::zero(), d: BigInt::one() }
    }

    pub fn from_int(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// `√m` for a nonnegative rational `m`.
    pub fn sqrt_of(m: &BigRational) -> Option<Self> {
        if m.is_negative() {
            return None;
        }
        if m.is_zero() {
            return Some(Self::from_int(0));
        }
        // √(p/q) = √(pq)/q
        let pq = m.numer() * m.denom();
        let (k, s) = squarefree_split(&pq);
        let coeff = BigRational::new(k, m.denom().clone());
        if s.is_one() {
            Some(Self::rational(coeff))
        } else {
            Some(Quad { x: BigRational::zero(), y: coeff, d: s })
        }
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.y.is_zero() {
            self.d = BigInt::one();
        }
        self
    }

    /// Common field of two elements, if any.
    fn field(&self, other: &Self) -> Option<BigInt> {
        match (self.is_rational(), other.is_rational()) {
            (true, true) => Some(BigInt::one()),
            (true, false) => Some(other.d.clone()),
            (false, true) => Some(self.d.clone()),
            (false, false) if self.d == other.d => Some(self.d.clone()),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Option<Self> {
        let d = self.field(o)?;
        Some(Quad { x: &self.x + &o.x, y: &self.y + &o.y, d }.normalized())
    }

    pub fn sub(&self, o: &Self) -> Option<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Quad { x: -&self.x, y: -&self.y, d: self.d.clone() }
    }

    pub fn mul(&self, o: &Self) -> Option<Self> {
        let d = self.field(o)?;
        let dr = BigRational::from_integer(d.clone());
        let x = &self.x * &o.x + &self.y * &o.y * &dr;
        let y = &self.x * &o.y + &self.y * &o.x;
        Some(Quad { x, y, d }.normalized())
    }

    pub fn recip(&self) -> Option<Self> {
        let dr = BigRational::from_integer(self.d.clone());
        let norm = &self.x * &self.x - &self.y * &self.y * &dr;
        if norm.is_zero() {
            return None;
        }
        Some(Quad { x: &self.x / &norm, y: -&self.y / &norm, d: self.d.clone() }.normalized())
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        self.mul(&o.recip()?)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let k = BigRational::from_integer(k.clone());
        Quad { x: &self.x * &k, y: &self.y * &k, d: self.d.clone() }.normalized()
    }

    /// Integer form `(a + b√d)/c` with `c > 0` and `gcd(a, b, c) = 1`.
    pub fn integer_form(&self) -> (BigInt, BigInt, BigInt) {
        let c = self.x.denom().lcm(self.y.denom());
        let a = self.x.numer() * (&c / self.x.denom());
        let b = self.y.numer() * (&c / self.y.denom());
        let g = a.gcd(&b).gcd(&c);
        (a / &g, b / &g, c / g)
    }

    pub fn signum(&self) -> Ordering {
        let (a, b, _) = self.integer_form();
        let sa = a.sign();
        let sb = b.sign();
        match (sa, sb) {
            (Sign::NoSign, s) | (s, Sign::NoSign) => sign_ord(s),
            (s1, s2) if s1 == s2 => sign_ord(s1),
            _ => {
                // compare a² with b²d
                let lhs = &a * &a;
                let rhs = &b * &b * &self.d;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sign_ord(sa),
                    Ordering::Less => sign_ord(sb),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn floor(&self) -> BigInt {
        let (a, b, c) = self.integer_form();
        if b.is_zero() {
            return floor_div(&a, &c);
        }
        let b2d = &b * &b * &self.d;
        let root = b2d.sqrt();
        let m = if b.is_positive() { root } else { -root - 1 };
        floor_div(&(a + m), &c)
    }

    pub fn fract(&self) -> Self {
        let f = BigRational::from_integer(self.floor());
        Quad { x: &self.x - f, y: self.y.clone(), d: self.d.clone() }
    }

    /// Nearest double, avoiding cancellation between the two parts.
    pub fn to_f64(&self) -> f64 {
        if self.y.is_zero() {
            return big_to_f64(&self.x);
        }
        let sd = self.d.to_f64().unwrap_or(f64::NAN).sqrt();
        if self.x.is_zero() || self.x.is_positive() == self.y.is_positive() {
            return big_to_f64(&self.x) + big_to_f64(&self.y) * sd;
        }
        let dr = BigRational::from_integer(self.d.clone());
        let norm = &self.x * &self.x - &self.y * &self.y * &dr;
        big_to_f64(&norm) / (big_to_f64(&self.x) - big_to_f64(&self.y) * sd)
    }
}

fn sign_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}
