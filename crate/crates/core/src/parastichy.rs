//! Parastichy families, their transitions along the geodesic, and the
//! translational monodromy of the local lattice around the origin.

use crate::contfrac::RealParam;
use crate::error::{Error, Result};
use crate::linearize::{self, expansion_for};
use crate::phyllo::{Phase, PhylloSet};
use crate::trace::{self, EventKind};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Relative length gap below which the two families count as ambiguous.
pub const AMBIGUITY: f64 = 0.02;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ParastichyReport {
    pub radius: f64,
    pub primary_step: u64,
    pub secondary_step: u64,
    pub primary_count: u64,
    pub secondary_count: u64,
    /// `+1` when the family turns counterclockwise going outwards.
    pub primary_chirality: i8,
    pub secondary_chirality: i8,
    pub primary_length: f64,
    pub secondary_length: f64,
    /// The two lengths are within [`AMBIGUITY`]: close to a type-I event.
    pub ambiguous: bool,
}

fn seed(phase: &Phase, m: u64) -> Complex64 {
    Complex64::from_polar((m as f64).sqrt(), 2.0 * PI * phase.frac(m))
}

fn chirality(p: Complex64, v: Complex64) -> i8 {
    if p.re * v.im - p.im * v.re >= 0.0 {
        1
    } else {
        -1
    }
}

/// The two parastichy families through `φ_θ(n)`: the nearest index step,
/// and the nearest step that is not one of its multiples.
pub fn families_at(theta: &RealParam, n: u64) -> Result<ParastichyReport> {
    let exp = expansion_for(theta, n);
    let cand = linearize::nearest_steps(&exp, n, 8)?;
    let primary = cand[0];
    let secondary = *cand
        .iter()
        .find(|&&q| q % primary != 0)
        .ok_or_else(|| Error::MeasurementFailure(format!("no second family at n = {n}")))?;
    let phase = Phase::new(theta);
    let p = seed(&phase, n);
    let (v1, v2) = (seed(&phase, n + primary) - p, seed(&phase, n + secondary) - p);
    let (l1, l2) = (v1.norm(), v2.norm());
    Ok(ParastichyReport {
        radius: (n as f64).sqrt(),
        primary_step: primary,
        secondary_step: secondary,
        primary_count: primary,
        secondary_count: secondary,
        primary_chirality: chirality(p, v1),
        secondary_chirality: chirality(p, v2),
        primary_length: l1,
        secondary_length: l2,
        ambiguous: (l2 - l1) / l1 < AMBIGUITY,
    })
}

/// Families of the d-fold whorled set at label `(n, 0)`: steps are label
/// differences `(Δn, Δk)`, and a family of step `Δn` has `d·Δn` spirals.
pub fn families_whorled(set: &PhylloSet, n: u64) -> Result<ParastichyReport> {
    let d = set.whorl as u64;
    let count = set.points.len() as u64 / d;
    let at = |m: u64, k: u64| set.points[(m * d + k) as usize].pos;
    let p = at(n, 0);
    let top = (8.0 * (n as f64).sqrt()).ceil() as u64 + 8;
    if n + top >= count {
        return Err(Error::InsufficientPoints { have: set.max_radius(), need: ((n + top) as f64 / d as f64).sqrt() });
    }
    let mut all: Vec<(f64, u64, Complex64)> = Vec::new();
    for q in 1..=top {
        for k in 0..d {
            let v = at(n + q, k) - p;
            all.push((v.norm(), q, v));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let first = all[0];
    let second = *all
        .iter()
        .find(|e| e.1 % first.1 != 0)
        .ok_or_else(|| Error::MeasurementFailure(format!("no second family at n = {n}")))?;
    // steps beyond `top` are radially farther than the second family
    let reach = ((n + top) as f64 / d as f64).sqrt() - (n as f64 / d as f64).sqrt();
    if second.0 > reach {
        return Err(Error::MeasurementFailure(format!("second family at n = {n} longer than the search reach {reach:.3}")));
    }
    Ok(ParastichyReport {
        radius: p.norm(),
        primary_step: first.1,
        secondary_step: second.1,
        primary_count: d * first.1,
        secondary_count: d * second.1,
        primary_chirality: chirality(p, first.2),
        secondary_chirality: chirality(p, second.2),
        primary_length: first.0,
        secondary_length: second.0,
        ambiguous: (second.0 - first.0) / first.0 < AMBIGUITY,
    })
}

/// Whether `q` is a convergent or intermediate-convergent denominator.
pub fn is_family_step(theta: &RealParam, q: u64) -> bool {
    let exp = expansion_for(theta, q.saturating_mul(q));
    exp.denominators_up_to(q as f64 + 0.5).binary_search(&q).is_ok()
}

/// Families of the first-order lattice model at a real index `t`: the
/// Gauss-reduced basis with the index steps it carries.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct ModelFamilies {
    pub primary_step: u64,
    pub secondary_step: u64,
    pub primary_length: f64,
    pub secondary_length: f64,
}

pub fn families_model(theta: &RealParam, t: f64) -> Result<ModelFamilies> {
    let exp = expansion_for(theta, t.ceil() as u64);
    let j = linearize::select_j_real(&exp, t)?;
    let (basis, _) = linearize::model_at(&exp, j.max(1), t)?;
    let mut u = (basis.v1, basis.steps[0]);
    let mut v = (basis.v2, basis.steps[1]);
    if u.0.norm_sqr() > v.0.norm_sqr() {
        std::mem::swap(&mut u, &mut v);
    }
    for _ in 0..200 {
        let mu = ((v.0 * u.0.conj()).re / u.0.norm_sqr()).round();
        v = (v.0 - u.0 * mu, v.1 - u.1 * mu as i64);
        if v.0.norm_sqr() >= u.0.norm_sqr() {
            break;
        }
        std::mem::swap(&mut u, &mut v);
    }
    Ok(ModelFamilies {
        primary_step: u.1.unsigned_abs(),
        secondary_step: v.1.unsigned_abs(),
        primary_length: u.0.norm(),
        secondary_length: v.0.norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransitionKind {
    I,
    II,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransitionEvent {
    pub t: f64,
    pub radius: f64,
    pub kind: TransitionKind,
}

/// Type I and type II events of `t ∈ t_range`, located on the reduced
/// geodesic.
pub fn transitions(theta: &RealParam, t_range: (f64, f64)) -> Result<Vec<TransitionEvent>> {
    let tr = trace::trace(theta, t_range.0, t_range.1)?;
    Ok(tr
        .events
        .iter()
        .filter_map(|e| {
            let kind = match e.kind {
                EventKind::TypeI => TransitionKind::I,
                EventKind::TypeII => TransitionKind::II,
                EventKind::Defect => return None,
            };
            Some(TransitionEvent { t: e.t, radius: e.radius, kind })
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct CabCheck {
    /// Primary count, unchanged across the event.
    pub a: u64,
    /// Secondary count below the event.
    pub b: u64,
    /// Secondary count above the event.
    pub c: u64,
    pub holds: bool,
}

/// Measures the families of the lattice model just below and just above a
/// type-II event and checks `c = a + b`. The offsets stay within 40% of
/// the log-distance to the neighbouring events. Seed data give the same
/// counts away from the events but switch at slightly shifted radii.
pub fn verify_cab(theta: &RealParam, event: &TransitionEvent) -> Result<CabCheck> {
    if event.kind != TransitionKind::II {
        return Err(Error::InvalidParam("verify_cab needs a type II event".into()));
    }
    let near = transitions(theta, (event.t / 8.0, event.t * 8.0))?;
    let gap = near
        .iter()
        .map(|e| (e.t / event.t).ln().abs())
        .filter(|&g| g > 1e-9)
        .fold(1.0, f64::min);
    let fail = |why: String| Error::MeasurementFailure(format!("type II at t = {:.3}: {why}", event.t));
    let h = 0.4 * gap;
    let below = families_model(theta, event.t * (-h).exp()).map_err(|e| fail(e.to_string()))?;
    let above = families_model(theta, event.t * h.exp()).map_err(|e| fail(e.to_string()))?;
    if below.primary_step != above.primary_step {
        return Err(fail(format!("primary changes from {} to {}", below.primary_step, above.primary_step)));
    }
    let (a, b, c) = (below.primary_step, below.secondary_step, above.secondary_step);
    Ok(CabCheck { a, b, c, holds: c == a + b })
}

#[derive(Clone, Debug, Serialize)]
pub struct Monodromy {
    pub base_index: u64,
    pub base: Complex64,
    /// Steps `(q1, q2)` of the stitched basis.
    pub steps: (u64, u64),
    /// Net coordinates of the loop in that basis.
    pub coords: (i64, i64),
    pub vector: Complex64,
    /// `2iπ·base`.
    pub expected: Complex64,
    pub rel_error: f64,
    /// Families at the end of the walk equal those at its start.
    pub basis_returns: bool,
    pub loop_steps: usize,
}

/// Walks counterclockwise once around the origin through seeds near
/// radius `loop_radius`, each move an index step `±q1`, `±q2` or
/// `±(q1 ± q2)`, closes the loop at the start seed, and evaluates the net
/// step coordinates on the basis at the start.
pub fn monodromy_vector(set: &PhylloSet, loop_radius: f64) -> Result<Monodromy> {
    if set.whorl != 1 {
        return Err(Error::InvalidParam("monodromy walk needs a plain set".into()));
    }
    let r = loop_radius;
    let count = set.points.len() as u64;
    let at = |m: u64| set.points[m as usize].pos;
    let lo = ((r - 3.0).max(1.0).powi(2)) as u64;
    let hi = ((r + 3.0).powi(2)).ceil() as u64;
    if hi + 4 * hi.isqrt() >= count {
        return Err(Error::InsufficientPoints { have: set.max_radius(), need: r + 3.0 + 4.0 });
    }
    let target = Complex64::new(r, 0.0);
    let n0 = (lo..=hi).min_by(|&a, &b| (at(a) - target).norm().total_cmp(&(at(b) - target).norm())).expect("range");
    let fam = families_at(&set.theta, n0)?;
    let (q1, q2) = (fam.primary_step as i64, fam.secondary_step as i64);
    let moves: Vec<(i64, i64, i64)> = [(1, 0), (0, 1), (1, 1), (1, -1)]
        .iter()
        .flat_map(|&(a, b)| [(a, b), (-a, -b)])
        .map(|(a, b)| (a, b, a * q1 + b * q2))
        .collect();
    let broken = |why: String| Error::LoopBroken(why);
    let (mut n, mut m1, mut m2) = (n0, 0i64, 0i64);
    let mut turned = 0.0;
    let mut steps = 0usize;
    let max_steps = (40.0 * r) as usize + 100;
    while turned < 2.0 * PI - 1.0 / r {
        let p = at(n);
        let best = moves
            .iter()
            .filter_map(|&(a, b, s)| {
                let m = n as i64 + s;
                if m < 1 || m as u64 >= count {
                    return None;
                }
                let w = at(m as u64);
                let da = (w / p).arg();
                (da > 0.0 && da < 0.5).then(|| ((w.norm() - r).abs(), a, b, m as u64, da))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0));
        let Some((_, a, b, m, da)) = best else {
            return Err(broken(format!("no forward step at n = {n}")));
        };
        n = m;
        m1 += a;
        m2 += b;
        turned += da;
        steps += 1;
        if steps > max_steps {
            return Err(broken("walk does not close".into()));
        }
    }
    // close on the start seed
    let p = at(n);
    let (v1, v2) = (at(n + q1 as u64) - p, at(n + q2 as u64) - p);
    let gap = at(n0) - p;
    let det = v1.re * v2.im - v1.im * v2.re;
    let x = (gap.re * v2.im - gap.im * v2.re) / det;
    let y = (v1.re * gap.im - v1.im * gap.re) / det;
    let (a, b) = (x.round() as i64, y.round() as i64);
    if a * q1 + b * q2 != n0 as i64 - n as i64 {
        return Err(broken(format!("closing step from {n} to {n0} does not resolve")));
    }
    m1 += a;
    m2 += b;
    if m1 * q1 + m2 * q2 != 0 || (m1.abs() as u64, m2.abs() as u64) != (q2 as u64, q1 as u64) {
        return Err(broken(format!("net coordinates ({m1}, {m2}) for steps ({q1}, {q2})")));
    }
    let base = at(n0);
    let (b1, b2) = (at(n0 + q1 as u64) - base, at(n0 + q2 as u64) - base);
    let vector = b1 * m1 as f64 + b2 * m2 as f64;
    let expected = Complex64::new(0.0, 2.0 * PI) * base;
    let end = families_at(&set.theta, n)?;
    Ok(Monodromy {
        base_index: n0,
        base,
        steps: (q1 as u64, q2 as u64),
        coords: (m1, m2),
        vector,
        expected,
        rel_error: (vector - expected).norm() / expected.norm(),
        basis_returns: (end.primary_step, end.secondary_step) == (fam.primary_step, fam.secondary_step)
            || (end.primary_step, end.secondary_step) == (fam.secondary_step, fam.primary_step),
        loop_steps: steps,
    })
}
