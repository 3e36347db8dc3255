//! Phyllotactic point sets, plain and whorled, and their metric statistics.

use crate::contfrac::{Quad, RealParam};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use std::f64::consts::PI;

/// Accurate `{nθ}` for large `n`.
#[derive(Clone, Debug)]
pub struct Phase {
    kind: PhaseKind,
}

#[derive(Clone, Debug)]
enum PhaseKind {
    Rational { p: BigInt, q: BigInt },
    Surd { a: BigInt, b: BigInt, d: BigInt, c: BigInt },
    Float { x: f64 },
}

fn isqrt_i128(v: i128) -> i128 {
    let mut s = (v as f64).sqrt() as i128;
    while s * s > v {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= v {
        s += 1;
    }
    s
}

impl Phase {
    pub fn new(theta: &RealParam) -> Self {
        let kind = match theta {
            RealParam::Rational(r) => PhaseKind::Rational { p: r.numer().mod_floor(r.denom()), q: r.denom().clone() },
            RealParam::QuadraticSurd(s) => {
                PhaseKind::Surd { a: s.a().mod_floor(s.c()), b: s.b().clone(), d: s.d().clone(), c: s.c().clone() }
            }
            RealParam::Float { x, .. } => PhaseKind::Float { x: x - x.floor() },
        };
        Phase { kind }
    }

    /// `{nθ} ∈ [0, 1)`.
    pub fn frac(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match &self.kind {
            PhaseKind::Rational { p, q } => {
                if let (Some(p), Some(q)) = (p.to_i128(), q.to_i128()) {
                    if let Some(np) = p.checked_mul(n as i128) {
                        return (np.rem_euclid(q)) as f64 / q as f64;
                    }
                }
                let r = (p * BigInt::from(n)).mod_floor(q);
                BigRational::new(r, q.clone()).to_f64().unwrap_or(0.0)
            }
            PhaseKind::Surd { a, b, d, c } => {
                if let Some(f) = surd_frac_small(a, b, d, c, n) {
                    return f;
                }
                surd_frac_big(a, b, d, c, n)
            }
            PhaseKind::Float { x } => {
                let nf = n as f64;
                let p = nf * x;
                let e = nf.mul_add(*x, -p);
                let mut f = (p - p.floor()) + e;
                if f < 0.0 {
                    f += 1.0;
                }
                if f >= 1.0 {
                    f -= 1.0;
                }
                f
            }
        }
    }
}

/// `(A + B√d)/c` with `A = na`, `B = nb` in 128-bit arithmetic.
fn surd_frac_small(a: &BigInt, b: &BigInt, d: &BigInt, c: &BigInt, n: u64) -> Option<f64> {
    let (a, b, d, c) = (a.to_i128()?, b.to_i128()?, d.to_i128()?, c.to_i128()?);
    let n = n as i128;
    let big_a = a.checked_mul(n)?;
    let big_b = b.checked_mul(n)?;
    let b2d = big_b.checked_mul(big_b)?.checked_mul(d)?;
    if b2d > (1i128 << 120) {
        return None;
    }
    let s = isqrt_i128(b2d);
    let sd = (d as f64).sqrt();
    let excess = (b2d - s * s) as f64 / ((big_b.abs() as f64) * sd + s as f64);
    // B√d = m + r with 0 < r < 1
    let (m, r) = if big_b > 0 { (s, excess) } else { (-s - 1, 1.0 - excess) };
    let k = big_a.checked_add(m)?;
    let rem = k.rem_euclid(c);
    let mut f = (rem as f64 + r) / c as f64;
    if f >= 1.0 {
        f -= 1.0;
    }
    Some(f)
}

fn surd_frac_big(a: &BigInt, b: &BigInt, d: &BigInt, c: &BigInt, n: u64) -> f64 {
    let n = BigInt::from(n);
    let big_a = a * &n;
    let big_b = b * &n;
    let b2d = &big_b * &big_b * d;
    let s = b2d.sqrt();
    let sd = d.to_f64().unwrap_or(f64::NAN).sqrt();
    let excess = (&b2d - &s * &s).to_f64().unwrap_or(0.0) / (big_b.abs().to_f64().unwrap_or(f64::INFINITY) * sd + s.to_f64().unwrap_or(0.0));
    let (m, r) = if big_b.is_positive() { (s, excess) } else { (-s - 1, 1.0 - excess) };
    let rem = (big_a + m).mod_floor(c);
    let mut f = (rem.to_f64().unwrap_or(0.0) + r) / c.to_f64().unwrap_or(f64::NAN);
    if f >= 1.0 {
        f -= 1.0;
    }
    f
}

/// Exact `{nθ}` in field arithmetic; slow, used as an oracle.
pub fn frac_exact(theta: &RealParam, n: u64) -> Option<f64> {
    let q = theta.to_quad()?;
    let nq = q.scale(&BigInt::from(n));
    Some(nq.fract().to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhylloPoint {
    pub n: u64,
    /// Whorl branch `k ∈ 0..d`; always 0 for plain sets.
    pub k: u32,
    pub pos: Complex64,
}

#[derive(Clone, Debug)]
pub struct PhylloSet {
    pub theta: RealParam,
    pub whorl: u32,
    pub points: Vec<PhylloPoint>,
}

impl PhylloSet {
    pub fn positions(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.pos).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.pos.norm()).fold(0.0, f64::max)
    }

    /// Position of label `(n, k)` without materializing the set.
    pub fn position_of(&self, n: u64, k: u32) -> Complex64 {
        point_at(&Phase::new(&self.theta_over_whorl()), n, k, self.whorl)
    }

    fn theta_over_whorl(&self) -> RealParam {
        divide(&self.theta, self.whorl)
    }
}

fn divide(theta: &RealParam, d: u32) -> RealParam {
    if d == 1 {
        return theta.clone();
    }
    match theta {
        RealParam::Float { x, eps } => RealParam::Float { x: x / d as f64, eps: *eps },
        _ => {
            let q = theta.to_quad().expect("exact");
            let dq = Quad::rational(BigRational::from_integer(BigInt::from(d)));
            RealParam::from_quad(&q.div(&dq).expect("d > 0"))
        }
    }
}

/// `ω_k √(n/d) e^{2iπ nθ/d}` with `ω_k = e^{2iπk/d}`; `phase` is for θ/d.
fn point_at(phase: &Phase, n: u64, k: u32, d: u32) -> Complex64 {
    let mut f = phase.frac(n) + k as f64 / d as f64;
    if f >= 1.0 {
        f -= 1.0;
    }
    let r = (n as f64 / d as f64).sqrt();
    let (s, c) = (2.0 * PI * f).sin_cos();
    Complex64::new(r * c, r * s)
}

/// `φ_θ(n) = √n e^{2iπnθ}` for `n = 0..=n_max`.
pub fn generate(theta: &RealParam, n_max: u64) -> PhylloSet {
    generate_whorled(theta, 1, n_max)
}

/// The d-fold whorled set `{ω √(n/d) e^{2iπθn/d}}`, `ω^d = 1`, with
/// `d·(n_max+1)` points ordered by `(n, k)`.
pub fn generate_whorled(theta: &RealParam, d: u32, n_max: u64) -> PhylloSet {
    assert!(d >= 1, "whorl order must be positive");
    let phase = Phase::new(&divide(theta, d));
    let total = (n_max as usize + 1) * d as usize;
    let points = par::map_range(0..total, |i| {
        let n = (i / d as usize) as u64;
        let k = (i % d as usize) as u32;
        PhylloPoint { n, k, pos: point_at(&phase, n, k, d) }
    });
    PhylloSet { theta: theta.clone(), whorl: d, points }
}

/// Smallest `n_max` such that the set covers the disc of radius `r`.
pub fn n_max_for_radius(r: f64, d: u32) -> u64 {
    (r * r * d as f64).ceil() as u64 + 1
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MetricStats {
    pub min_gap: f64,
    /// Largest sampled distance to the set, plus the sampling slack
    /// `pitch/√2`: an upper bound for the covering radius.
    pub covering_radius: f64,
    pub covering_radius_sampled: f64,
    pub pitch: f64,
    /// Points with `0 < |z| ≤ R`; the seed at the origin is not counted.
    pub disc_count: usize,
}

/// Uniform discreteness, covering radius and disc count on the disc of radius `R`.
pub fn metric_stats(set: &PhylloSet, r: f64, margin: f64) -> Result<MetricStats> {
    let need = r + margin;
    let have = set.max_radius();
    if have < need {
        return Err(Error::InsufficientPoints { have, need });
    }
    let pos: Vec<Complex64> = set.positions();
    let tol = 1e-12 * r.max(1.0);
    let in_disc: Vec<usize> = (0..pos.len()).filter(|&i| pos[i].norm() <= r + tol).collect();
    let disc_count = in_disc.iter().filter(|&&i| pos[i].norm() > 0.0).count();

    let near: Vec<Complex64> = pos.iter().copied().filter(|p| p.norm() <= need + 1.0).collect();
    let grid = Grid::new(&near, 1.0);
    let disc_pts: Vec<Complex64> = in_disc.iter().map(|&i| pos[i]).collect();
    let gaps = par::map_slice(&disc_pts, |p| {
        grid.k_nearest(*p, 2, None).iter().map(|e| e.1).find(|&d| d > 0.0).unwrap_or(f64::INFINITY)
    });
    let min_gap = gaps.into_iter().fold(f64::INFINITY, f64::min);

    let pitch = (margin / 4.0).min(0.25);
    let inner = r - margin;
    let mut covering_radius_sampled = 0.0f64;
    if inner > 0.0 {
        let m = (inner / pitch).ceil() as i64;
        let rows = par::map_range(0..(2 * m + 1) as usize, |row| {
            let y = (row as i64 - m) as f64 * pitch;
            let mut worst = 0.0f64;
            for col in -m..=m {
                let x = col as f64 * pitch;
                let p = Complex64::new(x, y);
                if p.norm() > inner {
                    continue;
                }
                if let Some((_, d)) = grid.nearest(p, None) {
                    worst = worst.max(d);
                }
            }
            worst
        });
        covering_radius_sampled = rows.into_iter().fold(0.0, f64::max);
    }
    Ok(MetricStats {
        min_gap,
        covering_radius: covering_radius_sampled + pitch / 2f64.sqrt(),
        covering_radius_sampled,
        pitch,
        disc_count,
    })
}
