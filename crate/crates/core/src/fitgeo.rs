//! Fitting the sunflower model to unlabelled seed centres, local lattice
//! invariants from parastichy neighbours, and least-squares geodesics in
//! the half-plane.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hyperbolic::{hyperbolic_distance, orbit_nearest, reduce_to_fundamental_domain, GeodesicArc, HPoint};
use crate::par;
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

pub const MIN_POINTS: usize = 30;
const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Observation {
    pub points: Vec<Complex64>,
    /// Units per pixel, if the points come from an image.
    pub scale: Option<f64>,
}

impl Observation {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < MIN_POINTS {
            return Err(Error::Underdetermined(points.len()));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::DegenerateData("non-finite point".into()));
        }
        let h = spacing_guess(&points);
        let grid = Grid::new(&points, h);
        for (i, &p) in points.iter().enumerate() {
            if let Some((j, d)) = grid.nearest(p, Some(i)) {
                if d < DUPLICATE_TOL {
                    return Err(Error::DegenerateData(format!("points {i} and {j} coincide")));
                }
            }
        }
        let c = centroid(&points);
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for p in &points {
            let d = p - c;
            sxx += d.re * d.re;
            syy += d.im * d.im;
            sxy += d.re * d.im;
        }
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        if det <= 1e-12 * tr * tr {
            return Err(Error::DegenerateData("points are collinear".into()));
        }
        Ok(Observation { points, scale: None })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    /// Points in model units.
    fn units(&self) -> Vec<Complex64> {
        let s = self.scale.unwrap_or(1.0);
        self.points.iter().map(|p| p * s).collect()
    }
}

fn centroid(points: &[Complex64]) -> Complex64 {
    points.iter().sum::<Complex64>() / points.len() as f64
}

fn radial_ranks(points: &[Complex64], a: Complex64) -> Vec<u64> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| (points[i] - a).norm().total_cmp(&(points[j] - a).norm()));
    let mut idx = vec![0u64; points.len()];
    for (rank, &i) in order.iter().enumerate() {
        idx[i] = rank as u64;
    }
    idx
}

/// Centre and radial ranks: `|z − A|² = s·rank + c` is linear in
/// `(Re A, Im A, s, c − |A|²)`, solved and re-ranked until the ranks settle.
fn centre_and_ranks(points: &[Complex64]) -> (Complex64, Vec<u64>) {
    let mut a = centroid(points);
    let mut idx = radial_ranks(points, a);
    for _ in 0..8 {
        let m = DMatrix::from_fn(points.len(), 4, |i, j| match j {
            0 => 2.0 * points[i].re,
            1 => 2.0 * points[i].im,
            2 => idx[i] as f64,
            _ => 1.0,
        });
        let rhs = DVector::from_iterator(points.len(), points.iter().map(|z| z.norm_sqr()));
        let Ok(sol) = m.svd(true, true).solve(&rhs, 1e-12) else { break };
        let next = Complex64::new(sol[0], sol[1]);
        if !next.is_finite() {
            break;
        }
        let ranks = radial_ranks(points, next);
        a = next;
        if ranks == idx {
            break;
        }
        idx = ranks;
    }
    (a, idx)
}

/// Typical neighbour distance, from the bounding box area.
fn spacing_guess(points: &[Complex64]) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.re);
        y0 = y0.min(p.im);
        x1 = x1.max(p.re);
        y1 = y1.max(p.im);
    }
    let root_n = (points.len() as f64).sqrt();
    let area = ((x1 - x0) * (y1 - y0)).max(1e-300);
    // at most 16·len buckets when the points are nearly collinear
    let floor = (x1 - x0).max(y1 - y0) / (4.0 * root_n);
    (area.sqrt() / root_n).max(floor).max(1e-12)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub a: Complex64,
    pub c: Complex64,
    /// Fractional part, in `[0, 1)`.
    pub theta: f64,
    pub gamma: f64,
    pub rms_residual: f64,
    /// `assignment[i]` is the index of observed point `i`.
    pub assignment: Vec<u64>,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn model(&self, n: f64) -> Complex64 {
        model(&[self.a.re, self.a.im, self.c.re, self.c.im, self.theta, self.gamma], n)
    }
}

/// `A + C√(n+γ)e^{2iπθn}` for `p = [Re A, Im A, Re C, Im C, θ, γ]`.
fn model(p: &[f64; 6], n: f64) -> Complex64 {
    let s = (n + p[5]).max(0.0).sqrt();
    Complex64::new(p[0], p[1]) + Complex64::new(p[2], p[3]) * Complex64::from_polar(s, 2.0 * PI * p[4] * n)
}

fn sum_sq(p: &[f64; 6], pts: &[Complex64], idx: &[u64]) -> f64 {
    pts.iter().zip(idx).map(|(z, &n)| (z - model(p, n as f64)).norm_sqr()).sum()
}

/// Levenberg–Marquardt on the six continuous parameters with the indices
/// fixed. Returns the parameters and the size of the last accepted step.
fn refine(mut p: [f64; 6], pts: &[Complex64], idx: &[u64], max_iters: usize) -> ([f64; 6], f64, bool) {
    let n_min = idx.iter().copied().min().unwrap_or(0) as f64;
    let mut cost = sum_sq(&p, pts, idx);
    let mut lambda = 1e-3;
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iters {
        let m = pts.len();
        let mut jac = DMatrix::<f64>::zeros(2 * m, 6);
        let mut res = DVector::<f64>::zeros(2 * m);
        let cc = Complex64::new(p[2], p[3]);
        for (k, (z, &n)) in pts.iter().zip(idx).enumerate() {
            let nf = n as f64;
            let s = (nf + p[5]).sqrt();
            let e = Complex64::from_polar(1.0, 2.0 * PI * p[4] * nf);
            let r = z - model(&p, nf);
            let cols = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                e * s,
                Complex64::i() * e * s,
                cc * e * s * Complex64::new(0.0, 2.0 * PI * nf),
                // capped at the origin seed, where √(n+γ) is not differentiable
                cc * e / (2.0 * s.max(0.5)),
            ];
            for (c, v) in cols.iter().enumerate() {
                jac[(2 * k, c)] = v.re;
                jac[(2 * k + 1, c)] = v.im;
            }
            res[2 * k] = r.re;
            res[2 * k + 1] = r.im;
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &res;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..6 {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&g) else {
                lambda *= 10.0;
                continue;
            };
            let mut q = p;
            for d in 0..6 {
                q[d] += step[d];
            }
            q[5] = q[5].max(-n_min);
            let c2 = sum_sq(&q, pts, idx);
            if c2 <= cost {
                let scale: f64 = p.iter().map(|v| v.abs()).fold(1.0, f64::max);
                last_step = step.amax() / scale;
                p = q;
                cost = c2;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || last_step < 1e-14 {
            return (p, if accepted { last_step } else { 0.0 }, true);
        }
    }
    (p, last_step, last_step < 1e-10)
}

/// Local maxima of `|Σ e^{i(α_m − 2πθm)}|` over `θ ∈ [0, 1)`, strongest
/// first, each refined by ternary search.
fn periodogram_peaks(angles: &[f64], count: usize) -> Vec<f64> {
    let power = |th: f64| -> f64 {
        let s: Complex64 = angles.iter().enumerate().map(|(m, a)| Complex64::from_polar(1.0, a - 2.0 * PI * th * m as f64)).sum();
        s.norm_sqr()
    };
    let k = 20 * angles.len().max(8);
    let grid: Vec<f64> = par::map_range(0..k, |i| power(i as f64 / k as f64));
    let mut maxima: Vec<usize> = (0..k).filter(|&i| grid[i] >= grid[(i + k - 1) % k] && grid[i] > grid[(i + 1) % k]).collect();
    maxima.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    maxima
        .into_iter()
        .take(count)
        .map(|best| {
            let (mut lo, mut hi) = ((best as f64 - 1.0) / k as f64, (best as f64 + 1.0) / k as f64);
            for _ in 0..60 {
                let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if power(m1) < power(m2) {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            ((lo + hi) / 2.0).rem_euclid(1.0)
        })
        .collect()
}

/// Starting frequencies: the strongest peaks, and the two halves of the
/// best one, since swapped radial ranks favour the alias `2θ`.
fn theta_candidates(angles: &[f64]) -> Vec<f64> {
    let peaks = periodogram_peaks(angles, 3);
    let mut out = peaks.clone();
    if let Some(&best) = peaks.first() {
        out.extend([best / 2.0, (best + 1.0) / 2.0]);
    }
    out
}

/// Initial parameters from indices by radial rank.
fn initial_guess(pts: &[Complex64], idx: &[u64], a: Complex64, theta: f64) -> [f64; 6] {
    // |z − A|² ≈ |C|²(n + γ)
    let m = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (z, &n) in pts.iter().zip(idx) {
        let (x, y) = (n as f64, (z - a).norm_sqr());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let icpt = (sy - slope * sx) / m;
    let n_min = idx.iter().copied().min().unwrap_or(0) as f64;
    let gamma = if slope > 0.0 { (icpt / slope).max(0.01 - n_min) } else { 0.5 };
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for (z, &n) in pts.iter().zip(idx) {
        let b = Complex64::from_polar((n as f64 + gamma).sqrt(), 2.0 * PI * theta * n as f64);
        num += b.conj() * (z - a);
        den += b.norm_sqr();
    }
    // rank errors shrink the projection, so take only its phase
    let c = Complex64::from_polar(slope.max(0.0).sqrt(), (num / den).arg());
    [a.re, a.im, c.re, c.im, theta, gamma]
}

/// Nearest model index for each point, or `None` if two points collide.
fn reassign(p: &[f64; 6], pts: &[Complex64], top: u64) -> Option<Vec<u64>> {
    let model_pts: Vec<Complex64> = (0..=top).map(|n| model(p, n as f64)).collect();
    let grid = Grid::new(&model_pts, spacing_guess(&model_pts));
    let idx: Vec<u64> = pts.iter().map(|&z| grid.nearest(z, None).map_or(0, |x| x.0 as u64)).collect();
    let mut seen = vec![false; model_pts.len()];
    for &n in &idx {
        if std::mem::replace(&mut seen[n as usize], true) {
            return None;
        }
    }
    Some(idx)
}

/// Least-squares fit of `A + C√(n+γ)e^{2iπθn}` to the observation, over the
/// continuous parameters and the index assignment. Indices start from the
/// radial rank about a fitted centre (or from `init`) and are re-assigned to
/// the nearest model point until stable. Without `init`, each candidate
/// frequency of the rank-ordered angles is tried and the smallest residual
/// wins.
pub fn fit_sunflower(obs: &Observation, init: Option<&FitResult>) -> Result<FitResult> {
    let pts = obs.units();
    if let Some(f) = init {
        if f.assignment.len() != pts.len() {
            return Err(Error::InvalidParam("initial assignment has the wrong length".into()));
        }
        return Ok(fit_from(&pts, [f.a.re, f.a.im, f.c.re, f.c.im, f.theta, f.gamma], f.assignment.clone()));
    }
    let (a, idx) = centre_and_ranks(&pts);
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by_key(|&i| idx[i]);
    let angles: Vec<f64> = order.iter().map(|&i| (pts[i] - a).arg()).collect();
    theta_candidates(&angles)
        .into_iter()
        .map(|theta| fit_from(&pts, initial_guess(&pts, &idx, a, theta), idx.clone()))
        .min_by(|x, y| x.rms_residual.total_cmp(&y.rms_residual))
        .ok_or(Error::DegenerateData("no frequency peak".into()))
}

fn fit_from(pts: &[Complex64], mut p: [f64; 6], mut idx: Vec<u64>) -> FitResult {
    const MAX_OUTER: usize = 40;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..MAX_OUTER {
        iterations = it + 1;
        let top = idx.iter().copied().max().unwrap_or(0) + 2 * pts.len() as u64 / 10 + 10;
        let changed = match reassign(&p, pts, top) {
            Some(new) if new != idx => {
                idx = new;
                true
            }
            _ => false,
        };
        let (q, step, ok) = refine(p, pts, &idx, 200);
        p = q;
        if !changed && ok && step < 1e-10 {
            converged = true;
            break;
        }
    }
    let rms = (sum_sq(&p, pts, &idx) / pts.len() as f64).sqrt();
    FitResult {
        a: Complex64::new(p[0], p[1]),
        c: Complex64::new(p[2], p[3]),
        theta: p[4].rem_euclid(1.0),
        gamma: p[5],
        rms_residual: rms,
        assignment: idx,
        converged,
        iterations,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalInvariants {
    /// Reduced invariants, one per resolved point.
    pub points: Vec<HPoint>,
    /// Index into the observation for each invariant.
    pub sites: Vec<usize>,
    /// Distance from the centroid for each invariant.
    pub radius: Vec<f64>,
    /// Interior points whose neighbour pairs could not be resolved.
    pub skipped: usize,
}

/// Opposition tolerance for a neighbour pair `a, A` about `P`, as a fraction
/// of `|a − P|`.
const PAIR_TOL: f64 = 0.35;
const NEIGHBOURS: usize = 10;

/// For the neighbour `a` of `p`, the neighbour `A` closest to `2p − a`.
fn partner(pts: &[Complex64], p: Complex64, a: usize, cand: &[(usize, f64)]) -> Option<usize> {
    let target = 2.0 * p - pts[a];
    let (b, d) = cand
        .iter()
        .filter(|c| c.0 != a)
        .map(|c| (c.0, (pts[c.0] - target).norm()))
        .min_by(|x, y| x.1.total_cmp(&y.1))?;
    (d < PAIR_TOL * (pts[a] - p).norm()).then_some(b)
}

/// The lattice invariant at `pts[i]`: the two shortest opposite neighbour
/// pairs `(a, A)`, `(b, B)` give `±(A − a)/(B − b)`, taken in the upper
/// half-plane and reduced into `ℳ`.
fn invariant_at(pts: &[Complex64], grid: &Grid, i: usize) -> Option<HPoint> {
    let p = pts[i];
    let cand = grid.k_nearest(p, NEIGHBOURS, Some(i));
    let (a, big_a) = cand.iter().find_map(|c| partner(pts, p, c.0, &cand).map(|b| (c.0, b)))?;
    let u = pts[big_a] - pts[a];
    let (b, big_b) = cand.iter().filter(|c| c.0 != a && c.0 != big_a).find_map(|c| {
        let v = pts[c.0] - p;
        let cross = (u.re * v.im - u.im * v.re).abs();
        if cross < 0.3 * u.norm() * v.norm() {
            return None;
        }
        partner(pts, p, c.0, &cand).map(|b| (c.0, b))
    })?;
    let mut z = u / (pts[big_b] - pts[b]);
    if z.im < 0.0 {
        z = -z;
    }
    reduce_to_fundamental_domain(HPoint::from_complex(z)).ok().map(|r| r.0)
}

/// Local invariants at the points away from the centre (radius below a
/// tenth of the extent) and from the rim (within three spacings).
pub fn local_invariants(obs: &Observation) -> Result<LocalInvariants> {
    let pts = obs.units();
    let c = centroid(&pts);
    let r_max = pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    let h = spacing_guess(&pts);
    let grid = Grid::new(&pts, h);
    let inner: Vec<usize> = (0..pts.len())
        .filter(|&i| {
            let r = (pts[i] - c).norm();
            r > 0.1 * r_max && r < r_max - 3.0 * h
        })
        .collect();
    let found = par::map_slice(&inner, |&i| invariant_at(&pts, &grid, i));
    let mut out = LocalInvariants { points: Vec::new(), sites: Vec::new(), radius: Vec::new(), skipped: 0 };
    for (&i, z) in inner.iter().zip(found) {
        match z {
            Some(z) => {
                out.points.push(z);
                out.sites.push(i);
                out.radius.push((pts[i] - c).norm());
            }
            None => out.skipped += 1,
        }
    }
    if out.points.is_empty() {
        return Err(Error::DegenerateData("no resolvable neighbour pairs".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LiftStrategy {
    /// Use the points as given.
    AsGiven,
    /// Lift each point to the orbit image nearest the previous lift,
    /// starting from the image nearest `anchor` (or the first point).
    /// A jump above `max_jump` is a break.
    Continuity { anchor: Option<HPoint>, max_jump: f64 },
}

impl Default for LiftStrategy {
    fn default() -> Self {
        LiftStrategy::Continuity { anchor: None, max_jump: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicFit {
    pub arc: GeodesicArc,
    pub mean_distance: f64,
    pub max_distance: f64,
    pub lifted: Vec<HPoint>,
}

/// Half-turn of `z` about `p`: `x_p − y_p²/(z − x_p)`.
fn half_turn(p: HPoint, z: HPoint) -> HPoint {
    let xp = Complex64::new(p.x, 0.0);
    HPoint::from_complex(xp - p.y * p.y / (z.to_complex() - xp))
}

pub fn lift(points: &[HPoint], strategy: LiftStrategy) -> Result<Vec<HPoint>> {
    let (anchor, max_jump) = match strategy {
        LiftStrategy::AsGiven => return Ok(points.to_vec()),
        LiftStrategy::Continuity { anchor, max_jump } => (anchor, max_jump),
    };
    let nearest = |reference: HPoint, z: HPoint| -> Result<HPoint> {
        let (w, _, _) = orbit_nearest(reference, z)?;
        // keep z itself when it is a nearest image up to rounding
        Ok(if hyperbolic_distance(reference, z) <= hyperbolic_distance(reference, w) + 1e-9 { z } else { w })
    };
    let mut out: Vec<HPoint> = Vec::with_capacity(points.len());
    out.push(match anchor {
        Some(a) => nearest(a, points[0])?,
        None => points[0],
    });
    let mut breaks = Vec::new();
    for (k, &z) in points.iter().enumerate().skip(1) {
        let prev = out[k - 1];
        // equally spaced samples continue by the half-turn about the last one
        let target = if k >= 2 { half_turn(prev, out[k - 2]) } else { prev };
        let w = nearest(target, z)?;
        if hyperbolic_distance(prev, w) > max_jump {
            breaks.push(k);
        }
        out.push(w);
    }
    if breaks.is_empty() {
        Ok(out)
    } else {
        Err(Error::LiftAmbiguous(breaks))
    }
}

fn sum_sq_arc(arc: &GeodesicArc, pts: &[HPoint]) -> f64 {
    pts.iter().map(|&z| arc.signed_distance(z).powi(2)).sum()
}

/// Gauss–Newton with damping on `(c, r)` for a circle centred on ℝ.
fn refine_circle(pts: &[HPoint], mut c: f64, mut r: f64) -> (f64, f64, f64) {
    let arc = |c: f64, r: f64| GeodesicArc::Circle { center: c, radius: r };
    let mut cost = sum_sq_arc(&arc(c, r), pts);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = Matrix2::<f64>::zeros();
        let mut g = Vector2::<f64>::zeros();
        for z in pts {
            let dx = z.x - c;
            let u = (dx * dx + z.y * z.y - r * r) / (2.0 * r * z.y);
            let s = (1.0 + u * u).sqrt();
            let d = u.asinh();
            let jc = -(dx / (r * z.y)) / s;
            let jr = (-1.0 / z.y - u / r) / s;
            let j = Vector2::new(jc, jr);
            jtj += j * j.transpose();
            g -= j * d;
        }
        let mut done = true;
        for _ in 0..40 {
            let mut a = jtj;
            a[(0, 0)] += lambda * jtj[(0, 0)].max(1e-300);
            a[(1, 1)] += lambda * jtj[(1, 1)].max(1e-300);
            let Some(step) = a.lu().solve(&g) else {
                lambda *= 10.0;
                continue;
            };
            let (c2, r2) = (c + step[0], r + step[1]);
            if !(r2 > 0.0) {
                lambda *= 10.0;
                continue;
            }
            let cost2 = sum_sq_arc(&arc(c2, r2), pts);
            if cost2 <= cost {
                let rel = step[0].abs().max(step[1].abs()) / r.max(c.abs()).max(1e-300);
                c = c2;
                r = r2;
                cost = cost2;
                lambda = (lambda / 3.0).max(1e-15);
                done = rel < 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if done {
            break;
        }
    }
    (c, r, cost)
}

/// Best vertical geodesic: minimizes `Σ asinh((x−x0)/y)²` in `x0`.
fn refine_vertical(pts: &[HPoint]) -> (f64, f64) {
    let w: f64 = pts.iter().map(|z| 1.0 / (z.y * z.y)).sum();
    let mut x0 = pts.iter().map(|z| z.x / (z.y * z.y)).sum::<f64>() / w;
    for _ in 0..100 {
        let (mut num, mut den) = (0.0, 0.0);
        for z in pts {
            let u = (z.x - x0) / z.y;
            let s = (1.0 + u * u).sqrt();
            let j = -1.0 / (z.y * s);
            num -= j * u.asinh();
            den += j * j;
        }
        let step = num / den;
        x0 += step;
        if step.abs() < 1e-16 * x0.abs().max(1.0) {
            break;
        }
    }
    (x0, sum_sq_arc(&GeodesicArc::Vertical { x0 }, pts))
}

/// Least-squares geodesic through lifted invariant points, in the
/// hyperbolic point-to-geodesic distance.
pub fn fit_geodesic(points: &[HPoint], strategy: LiftStrategy) -> Result<GeodesicFit> {
    if points.len() < 5 {
        return Err(Error::Underdetermined(points.len()));
    }
    let lifted = lift(points, strategy)?;
    let (x0, x1) = lifted.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| (a.min(z.x), b.max(z.x)));
    let y1 = lifted.iter().map(|z| z.y).fold(0.0, f64::max);
    let spread = (x1 - x0).max(y1).max(1e-12);

    // algebraic start: x² + y² − 2cx + k = 0 weighted by 1/y²
    let mut starts: Vec<(f64, f64)> = Vec::new();
    let (mut m, mut v) = (Matrix2::<f64>::zeros(), Vector2::<f64>::zeros());
    for z in &lifted {
        let w = 1.0 / (z.y * z.y);
        let row = Vector2::new(-2.0 * z.x, 1.0);
        m += row * row.transpose() * w;
        v -= row * (z.x * z.x + z.y * z.y) * w;
    }
    if let Some(sol) = m.lu().solve(&v) {
        let (c, k) = (sol[0], sol[1]);
        if c * c - k > 0.0 {
            starts.push((c, (c * c - k).sqrt()));
        }
    }
    for i in 0..=6 {
        for j in 0..=6 {
            let c = x0 - 10.0 * spread + (x1 - x0 + 20.0 * spread) * i as f64 / 6.0;
            let r = spread * 10f64.powf(-1.0 + 2.0 * j as f64 / 6.0);
            starts.push((c, r));
        }
    }
    let fits = par::map_slice(&starts, |&(c, r)| refine_circle(&lifted, c, r));
    let mut best: Option<(GeodesicArc, f64)> = None;
    for (c, r, cost) in fits {
        if !cost.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((GeodesicArc::Circle { radius, .. }, bc)) => cost < bc || (cost == bc && r < radius),
            Some((_, bc)) => cost < bc,
        };
        if better {
            best = Some((GeodesicArc::Circle { center: c, radius: r }, cost));
        }
    }
    let (xv, cv) = refine_vertical(&lifted);
    if best.map_or(true, |b| cv < b.1) {
        best = Some((GeodesicArc::Vertical { x0: xv }, cv));
    }
    let (arc, _) = best.ok_or_else(|| Error::DegenerateData("no geodesic candidate converged".into()))?;
    let d: Vec<f64> = lifted.iter().map(|&z| arc.distance(z)).collect();
    Ok(GeodesicFit {
        arc,
        mean_distance: d.iter().sum::<f64>() / d.len() as f64,
        max_distance: d.iter().copied().fold(0.0, f64::max),
        lifted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::RealParam;
    use crate::hyperbolic::{orbit_distance, phyllotactic_geodesic};
    use crate::phyllo::generate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synthetic(n0: u64, n1: u64, noise: f64, seed: u64) -> (Vec<Complex64>, Vec<u64>) {
        let set = generate(&RealParam::golden(), n1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Normal::new(0.0, noise.max(1e-300)).unwrap();
        let a = Complex64::new(3.0, -2.0);
        let c = Complex64::from_polar(1.7, 0.4);
        let mut pts = Vec::new();
        let mut idx = Vec::new();
        for p in &set.points[n0 as usize..] {
            let e = if noise > 0.0 { Complex64::new(g.sample(&mut rng), g.sample(&mut rng)) } else { Complex64::new(0.0, 0.0) };
            pts.push(a + c * p.pos + e);
            idx.push(p.n);
        }
        // shuffle
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by_key(|&i| (i * 7919) % pts.len());
        (order.iter().map(|&i| pts[i]).collect(), order.iter().map(|&i| idx[i]).collect())
    }

    fn golden_frac() -> f64 {
        RealParam::golden().fract_f64()
    }

    #[test]
    fn noiseless_round_trip() {
        let (pts, idx) = synthetic(50, 400, 0.0, 1);
        let fit = fit_sunflower(&Observation::new(pts).unwrap(), None).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!((fit.theta - golden_frac()).abs() < 1e-8, "{}", fit.theta);
        // ranks start at 0, so γ absorbs the first index
        assert!((fit.gamma - 50.0).abs() < 1e-4, "{}", fit.gamma);
        let shift = idx[0] as i64 - fit.assignment[0] as i64;
        assert!(idx.iter().zip(&fit.assignment).all(|(&n, &m)| n as i64 - m as i64 == shift));
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn noisy_round_trip() {
        let (pts, _) = synthetic(50, 400, 0.01, 2);
        let fit = fit_sunflower(&Observation::new(pts).unwrap(), None).unwrap();
        assert!((fit.theta - golden_frac()).abs() < 1e-4, "{}", fit.theta);
        assert!(fit.rms_residual < 0.02);
    }

    #[test]
    fn inner_seeds_do_not_alias_the_frequency() {
        let pts = generate(&RealParam::golden(), 400).positions();
        let fit = fit_sunflower(&Observation::new(pts).unwrap(), None).unwrap();
        assert!((fit.theta - golden_frac()).abs() < 1e-8, "{}", fit.theta);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn theta_is_reported_mod_one() {
        let p = [0.0, 0.0, 1.0, 0.0, 0.3 + 2.0, 0.0];
        let pts: Vec<Complex64> = (10..90).map(|n| model(&p, n as f64)).collect();
        let fit = fit_sunflower(&Observation::new(pts).unwrap(), None).unwrap();
        assert!((fit.theta - 0.3).abs() < 1e-8);
    }

    #[test]
    fn bad_observations() {
        let few: Vec<Complex64> = (0..10).map(|k| Complex64::new(k as f64, 1.0)).collect();
        assert_eq!(Observation::new(few).unwrap_err(), Error::Underdetermined(10));
        let line: Vec<Complex64> = (0..40).map(|k| Complex64::new(k as f64, 2.0 * k as f64)).collect();
        assert!(matches!(Observation::new(line), Err(Error::DegenerateData(_))));
        let mut dup: Vec<Complex64> = (0..40).map(|k| Complex64::from_polar(1.0 + k as f64, k as f64)).collect();
        dup.push(dup[3]);
        assert!(matches!(Observation::new(dup), Err(Error::DegenerateData(_))));
    }

    fn patch(w: [Complex64; 2]) -> Observation {
        let mut pts = Vec::new();
        for a in -12i32..=12 {
            for b in -12i32..=12 {
                let z = w[0] * a as f64 + w[1] * b as f64;
                if z.norm() < 10.0 {
                    pts.push(z);
                }
            }
        }
        Observation::new(pts).unwrap()
    }

    #[test]
    fn lattice_patch_invariants() {
        let sq = local_invariants(&patch([Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])).unwrap();
        assert!(sq.points.iter().all(|z| hyperbolic_distance(*z, HPoint::new(0.0, 1.0)) < 1e-9));
        let w = Complex64::from_polar(1.0, PI / 3.0);
        let hex = local_invariants(&patch([Complex64::new(1.0, 0.0), w])).unwrap();
        let rho = HPoint::new(0.5, 3f64.sqrt() / 2.0);
        assert!(hex.points.iter().all(|z| orbit_distance(*z, rho).unwrap() < 1e-9));
    }

    #[test]
    fn invariants_track_the_geodesic() {
        let set = generate(&RealParam::golden(), 3000);
        let obs = Observation::new(set.positions()).unwrap();
        let inv = local_invariants(&obs).unwrap();
        let mut worst_far: f64 = 0.0;
        let mut worst_near: f64 = 0.0;
        for (z, &i) in inv.points.iter().zip(&inv.sites) {
            let n = set.points[i].n;
            let d = orbit_distance(*z, phyllotactic_geodesic(&RealParam::golden(), n as f64)).unwrap();
            if n >= 1600 {
                worst_far = worst_far.max(d);
            } else if n >= 400 {
                worst_near = worst_near.max(d);
            }
        }
        assert!(worst_near < 0.1, "{worst_near}");
        assert!(worst_far < worst_near, "{worst_far} {worst_near}");
    }

    fn samples(t0: f64, t1: f64, k: usize) -> Vec<HPoint> {
        (0..k).map(|i| phyllotactic_geodesic(&RealParam::golden(), t0 * (t1 / t0).powf(i as f64 / (k - 1) as f64))).collect()
    }

    #[test]
    fn exact_geodesic_samples() {
        let pts = samples(50.0, 800.0, 60);
        let fit = fit_geodesic(&pts, LiftStrategy::default()).unwrap();
        assert!(fit.max_distance < 1e-10, "{:?} {}", fit.arc, fit.max_distance);
        let (e0, e1) = fit.arc.endpoints();
        assert!(e0.abs() < 1e-6 && (e1 - 1.0 / golden_frac()).abs() < 1e-6, "{e0} {e1}");
    }

    #[test]
    fn reduced_samples_lift_back() {
        let pts = samples(50.0, 800.0, 200);
        let reduced: Vec<HPoint> = pts.iter().map(|&z| reduce_to_fundamental_domain(z).unwrap().0).collect();
        let fit = fit_geodesic(&reduced, LiftStrategy::Continuity { anchor: Some(pts[0]), max_jump: 1.0 }).unwrap();
        let (e0, e1) = fit.arc.endpoints();
        assert!(fit.max_distance < 1e-6, "{:?} {}", fit.arc, fit.max_distance);
        assert!(e0.abs() < 1e-6 && (e1 - 1.0 / golden_frac()).abs() < 1e-6, "{e0} {e1}");
    }

    #[test]
    fn noisy_geodesic_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Normal::new(0.0, 0.05 / 2f64.sqrt()).unwrap();
        // on t ∈ [50, 800] the arc stays within 0.003 of the vertical through
        // 1/{θ}, so the samples cover the top of the arc instead
        let pts: Vec<HPoint> = samples(0.02, 2.0, 60)
            .into_iter()
            .map(|z| HPoint::new(z.x + z.y * g.sample(&mut rng), z.y * g.sample(&mut rng).exp()))
            .collect();
        let fit = fit_geodesic(&pts, LiftStrategy::AsGiven).unwrap();
        let (e0, e1) = fit.arc.endpoints();
        assert!(e0.abs() < 0.05 && (e1 - 1.0 / golden_frac()).abs() < 0.05, "{e0} {e1}");
    }

    #[test]
    fn vertical_distance_matches_sampling() {
        let arc = GeodesicArc::Vertical { x0: 0.3 };
        for z in [HPoint::new(1.1, 0.7), HPoint::new(-0.4, 2.0), HPoint::new(0.31, 0.01)] {
            let sampled = (0..200_001)
                .map(|k| hyperbolic_distance(z, HPoint::new(0.3, z.y * 10f64.powf(-4.0 + 8.0 * k as f64 / 200_000.0))))
                .fold(f64::INFINITY, f64::min);
            assert!((arc.distance(z) - sampled).abs() < 1e-6, "{z:?}");
        }
    }

    #[test]
    fn too_few_points() {
        assert_eq!(fit_geodesic(&[HPoint::new(0.0, 1.0)], LiftStrategy::AsGiven).unwrap_err(), Error::Underdetermined(1));
    }
}
