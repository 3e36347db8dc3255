//! Walks the phyllotactic geodesic `γ_θ(t)` through the fundamental domain
//! `ℳ` and records where it crosses the sides of `ℳ` and the imaginary axis.
//!
//! The current branch is a fixed modular map `g`. The point `g·γ_θ(t)` is
//! computed from the matrix `g·[[1,0],[{θ},1]]` applied to `4iπt`, whose
//! entries `a + b{θ}` and `c + d{θ}` are rounded once from exact values when
//! θ is exact. Since the imaginary part is `s/(d² + C²s²)` with `s = 4πt`,
//! no cancellation occurs there.

use crate::contfrac::{Quad, RealParam};
use crate::error::{Error, Result};
use crate::hyperbolic::{hyperbolic_distance, reduce_to_fundamental_domain, HPoint, ModularMap};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// Crossing of the unit arc `|z| = 1`.
    TypeI,
    /// Crossing of a vertical side `Re z = ±1/2`.
    TypeII,
    /// Crossing of the imaginary axis inside `ℳ`: a rectangular lattice.
    Defect,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeodesicEvent {
    pub t: f64,
    pub radius: f64,
    pub kind: EventKind,
    /// `g·γ_θ(t)` on the branch in use just before the crossing.
    pub point: HPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicTrace {
    pub events: Vec<GeodesicEvent>,
    /// θ integral: `γ_θ` runs along the imaginary axis, every `t` is a
    /// defect parameter.
    pub degenerate: bool,
}

impl GeodesicTrace {
    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &GeodesicEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

/// `{θ}`, kept exactly when possible.
struct Frac {
    exact: Option<Quad>,
    f: f64,
}

impl Frac {
    fn new(theta: &RealParam) -> Self {
        let exact = theta.to_quad().map(|q| q.fract());
        Frac { exact, f: theta.fract_f64() }
    }

    /// `x + y·{θ}` rounded once.
    fn lin(&self, x: i64, y: i64) -> f64 {
        match &self.exact {
            Some(q) => q.scale(&BigInt::from(y)).add(&Quad::from_int(x)).map_or(f64::NAN, |v| v.to_f64()),
            None => (y as f64).mul_add(self.f, x as f64),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Branch {
    g: ModularMap,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Branch {
    fn new(g: ModularMap, fr: &Frac) -> Self {
        Branch { g, a: fr.lin(g.a, g.b), b: g.b as f64, c: fr.lin(g.c, g.d), d: g.d as f64 }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let s = 4.0 * PI * t;
        let den = self.d * self.d + self.c * self.c * s * s;
        let re = (self.b * self.d + self.a * self.c * s * s) / den;
        Complex64::new(re, s / den)
    }
}

/// Signed exits from `ℳ` (positive means outside), in the order
/// right side, left side, unit arc.
fn exits(z: Complex64) -> [f64; 3] {
    [z.re - 0.5, -0.5 - z.re, 1.0 - z.norm_sqr()]
}

/// Root of `f` in `[lo, hi]` with `f(lo) ≤ 0 < f(hi)`, bisected in `ln t`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

const STEP: f64 = 0.01;
const MAX_JUMP: f64 = 0.05;

/// All crossings of `g·γ_θ(t)` with the sides of `ℳ` and with the imaginary
/// axis inside `ℳ`, for `t ∈ [t_min, t_max]`, sorted by `t`.
///
/// A crossing of `Re = ±1/2` is a type II event and continues on the branch
/// `T^∓1 g`; a crossing of `|z| = 1` is a type I event and continues on
/// `S g`.
pub fn trace(theta: &RealParam, t_min: f64, t_max: f64) -> Result<GeodesicTrace> {
    if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() {
        return Err(Error::InvalidParam(format!("t range ({t_min}, {t_max})")));
    }
    if theta.is_integer() {
        return Ok(GeodesicTrace { events: Vec::new(), degenerate: true });
    }
    let fr = Frac::new(theta);
    let overflow = |t: f64| {
        let z = Branch::new(ModularMap::IDENTITY, &fr).eval(t);
        Error::ReductionOverflow { x: z.re, y: z.im }
    };
    let rebranch = |br: &Branch, t: f64| -> Result<Branch> {
        let (_, h) = reduce_to_fundamental_domain(HPoint::from_complex(br.eval(t)))?;
        Ok(Branch::new(h.compose(&br.g).ok_or_else(|| overflow(t))?, &fr))
    };
    let mut br = rebranch(&Branch::new(ModularMap::IDENTITY, &fr), t_min)?;
    let mut events = Vec::new();
    let mut t = t_min;
    let mut step = STEP;
    let mut stalled = 0;
    while t < t_max {
        let z0 = br.eval(t);
        let mut t1 = (t * step.exp()).min(t_max);
        let mut z1 = br.eval(t1);
        while hyperbolic_distance(HPoint::from_complex(z0), HPoint::from_complex(z1)) > MAX_JUMP && t1 > t * (1.0 + 1e-9) {
            t1 = (t * t1).sqrt();
            z1 = br.eval(t1);
        }
        let out = exits(z1);
        let mut first: Option<(f64, usize)> = None;
        for k in 0..3 {
            if out[k] > 0.0 {
                let te = bisect(t, t1, |s| exits(br.eval(s))[k]);
                if first.map_or(true, |(tf, _)| te < tf) {
                    first = Some((te, k));
                }
            }
        }
        let t_end = first.map_or(t1, |f| f.0);
        let z_end = br.eval(t_end);
        if z0.re * z_end.re < 0.0 {
            let td = bisect(t, t_end, |s| br.eval(s).re * z_end.re.signum());
            let p = br.eval(td);
            if p.norm_sqr() >= 1.0 {
                events.push(GeodesicEvent { t: td, radius: td.sqrt(), kind: EventKind::Defect, point: HPoint::from_complex(p) });
            }
        }
        match first {
            None => {
                t = t1;
                stalled = 0;
                step = (step * 1.5).min(STEP);
            }
            Some((te, k)) => {
                let kind = if k == 2 { EventKind::TypeI } else { EventKind::TypeII };
                events.push(GeodesicEvent { t: te, radius: te.sqrt(), kind, point: HPoint::from_complex(z_end) });
                let gen = match k {
                    0 => ModularMap::translation(-1),
                    1 => ModularMap::translation(1),
                    _ => ModularMap::S,
                };
                br = Branch::new(gen.compose(&br.g).ok_or_else(|| overflow(te))?, &fr);
                stalled = if te <= t { stalled + 1 } else { 0 };
                if stalled > 4 {
                    // corner of ℳ: restart from a fresh reduction
                    br = rebranch(&br, t1)?;
                    t = t1;
                    stalled = 0;
                } else {
                    t = te;
                }
            }
        }
    }
    Ok(GeodesicTrace { events, degenerate: false })
}
