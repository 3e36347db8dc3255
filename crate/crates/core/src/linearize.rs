//! Local lattice model of `φ_θ(ℕ)` near a seed.
//!
//! Near `φ_θ(n)` the set looks like the lattice spanned by the images of
//! the index steps `q_{j−1}` and `q_j`, where `q_{j−1} ≤ √n < q_j`. In the
//! frame rotated by `e^{2iπnθ}` (real axis radial, imaginary axis
//! tangential) a step `q_k` moves by `q_k/(2√n) + 2iπ√n·δ_k` to first
//! order, with `δ_k = q_kθ − p_k`.

use crate::contfrac::{Expansion, RealParam};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hyperbolic::HPoint;
use crate::matching;
use crate::phyllo::Phase;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use std::f64::consts::PI;

fn sign(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Expansion deep enough for seeds up to index `n`.
pub fn expansion_for(theta: &RealParam, n: u64) -> Expansion {
    Expansion::new(theta, (n as f64).sqrt().max(1.0) * 8.0)
}

/// The unique `j` with `q_{j−1} ≤ √n < q_j`, i.e. the least `j` with
/// `q_j² > n`. Exact integer comparison.
pub fn select_j(exp: &Expansion, n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    let n = BigInt::from(n);
    for j in 0..=exp.last_index() {
        let q = exp.q_big(j).expect("index in range");
        if q * q > n {
            return Ok(j);
        }
    }
    Err(Error::IndexUnavailable(exp.last_index() + 1))
}

/// Same as [`select_j`] for a real index `t ≥ 1`.
pub fn select_j_real(exp: &Expansion, t: f64) -> Result<i64> {
    let r = t.sqrt();
    for j in 0..=exp.last_index() {
        if exp.q(j).expect("index in range") > r {
            return Ok(j);
        }
    }
    Err(Error::IndexUnavailable(exp.last_index() + 1))
}

/// Basis of the local lattice in the rotated frame.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LatticeBasis {
    pub v1: Complex64,
    pub v2: Complex64,
    /// Signed index steps realizing `v1` and `v2`.
    pub steps: [i64; 2],
    /// Sign of `det(v_{j−1}, v_j)` before normalization, `(−1)^j`.
    pub orientation: i8,
    pub j: i64,
}

impl LatticeBasis {
    pub fn det(&self) -> f64 {
        cross(self.v1, self.v2)
    }

    /// `a·v1 + b·v2`.
    pub fn point(&self, a: i64, b: i64) -> Complex64 {
        self.v1 * a as f64 + self.v2 * b as f64
    }

    pub fn shortest_vector(&self) -> Complex64 {
        gauss_reduce(self.v1, self.v2).0
    }
}

/// Lagrange–Gauss reduction: returns `(u1, u2)` spanning the same lattice
/// with `|u1| ≤ |u2|` and `|Re(u2·conj(u1))| ≤ |u1|²/2`.
pub fn gauss_reduce(mut u: Complex64, mut v: Complex64) -> (Complex64, Complex64) {
    if u.norm_sqr() > v.norm_sqr() {
        std::mem::swap(&mut u, &mut v);
    }
    for _ in 0..200 {
        let mu = ((v * u.conj()).re / u.norm_sqr()).round();
        v -= u * mu;
        if v.norm_sqr() >= u.norm_sqr() {
            break;
        }
        std::mem::swap(&mut u, &mut v);
    }
    (u, v)
}

/// Second-order terms of the displacement `φ(n+s) − φ(n)` in the rotated
/// frame, with `s = a·q_{j−1} + b·q_j` and `δ = a·δ_{j−1} + b·δ_j`:
/// `c_ss·s² + c_sd·s·δ + c_dd·δ²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearizationError {
    pub c_ss: Complex64,
    pub c_sd: Complex64,
    pub c_dd: Complex64,
    pub q: [f64; 2],
    pub delta: [f64; 2],
}

impl LinearizationError {
    pub fn eval(&self, a: i64, b: i64) -> Complex64 {
        let (a, b) = (a as f64, b as f64);
        let s = a * self.q[0] + b * self.q[1];
        let d = a * self.delta[0] + b * self.delta[1];
        self.c_ss * (s * s) + self.c_sd * (s * d) + self.c_dd * (d * d)
    }
}

/// First-order step `q_k/(2√t) + 2iπ√t·δ_k`.
fn step_vector(q: f64, delta: f64, t: f64) -> Complex64 {
    let r = t.sqrt();
    Complex64::new(q / (2.0 * r), 2.0 * PI * r * delta)
}

/// Lattice model at a given `j`; no check that `j` fits `n`.
pub fn model_at(exp: &Expansion, j: i64, t: f64) -> Result<(LatticeBasis, LinearizationError)> {
    let unavailable = || Error::IndexUnavailable(j);
    if j < 1 {
        return Err(unavailable());
    }
    let (q1, q2) = (exp.q(j - 1).ok_or_else(unavailable)?, exp.q(j).ok_or_else(unavailable)?);
    let (d1, d2) = (exp.delta(j - 1).ok_or_else(unavailable)?, exp.delta(j).ok_or_else(unavailable)?);
    let (w1, w2) = (step_vector(q1, d1, t), step_vector(q2, d2, t));
    let orientation = sign(j);
    let (v1, s1) = if orientation > 0.0 { (w1, q1 as i64) } else { (-w1, -(q1 as i64)) };
    let basis = LatticeBasis { v1, v2: w2, steps: [s1, q2 as i64], orientation: orientation as i8, j };
    let r = t.sqrt();
    let err = LinearizationError {
        c_ss: Complex64::new(-1.0 / (8.0 * r * t), 0.0),
        c_sd: Complex64::new(0.0, PI / r),
        c_dd: Complex64::new(-2.0 * PI * PI * r, 0.0),
        q: [q1, q2],
        delta: [d1, d2],
    };
    Ok((basis, err))
}

/// Local lattice basis and second-order error at seed `n`.
pub fn linear_model(exp: &Expansion, n: u64) -> Result<(LatticeBasis, LinearizationError)> {
    let j = select_j(exp, n)?;
    model_at(exp, j, n as f64)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TauPoint {
    pub j: i64,
    pub t: f64,
    pub value: HPoint,
    /// `value = cusp + offset` with `cusp = −(−1)^j·q_{j−1}/q_j` kept as
    /// an exact fraction; for large `j` the offset is tiny and `value`
    /// alone loses the digits needed to reduce it.
    pub cusp: (i64, i64),
    pub offset: Complex64,
}

impl TauPoint {
    /// Reduction to the fundamental domain, carried out exactly on the
    /// dyadic rationals `cusp + offset`.
    pub fn reduced(&self) -> Result<HPoint> {
        let (p, q) = self.cusp;
        let overflow = || Error::ReductionOverflow { x: self.value.x, y: self.value.y };
        let offset_re = BigRational::from_float(self.offset.re).ok_or_else(overflow)?;
        let mut x = BigRational::new(p.into(), q.into()) + offset_re;
        let mut y = BigRational::from_float(self.offset.im).ok_or_else(overflow)?;
        let half = BigRational::new(1.into(), 2.into());
        for _ in 0..10_000 {
            x -= (&x + &half).floor();
            let r2 = &x * &x + &y * &y;
            if r2 < BigRational::one() {
                x = -&x / &r2;
                y = &y / &r2;
            } else {
                let fx = x.to_f64().ok_or_else(overflow)?;
                return Ok(HPoint::new(fx, y.to_f64().ok_or_else(overflow)?));
            }
        }
        Err(overflow())
    }
}

/// `τ_j(t) = −(−1)^j·(q_{j−1} + 4iπt·δ_{j−1}) / (q_j + 4iπt·δ_j)`; the
/// lattice `ℤ + ℤτ_j(t)` is similar to the local lattice at index `t`.
/// Evaluated as `−(−1)^j·q_{j−1}/q_j + 4iπt / (q_j(q_j + 4iπt·δ_j))`, using
/// `q_jδ_{j−1} − q_{j−1}δ_j = −(−1)^j`.
pub fn tau(exp: &Expansion, j: i64, t: f64) -> Result<TauPoint> {
    let unavailable = || Error::IndexUnavailable(j);
    if j < 0 {
        return Err(unavailable());
    }
    let (q1, q2) = (exp.q(j - 1).ok_or_else(unavailable)?, exp.q(j).ok_or_else(unavailable)?);
    let d2 = exp.delta(j).ok_or_else(unavailable)?;
    let c = 4.0 * PI * t;
    let offset = Complex64::new(0.0, c) / (q2 * Complex64::new(q2, c * d2));
    let cusp = (-(sign(j) as i64) * q1 as i64, q2 as i64);
    let value = HPoint::new(cusp.0 as f64 / q2 + offset.re, offset.im);
    Ok(TauPoint { j, t, value, cusp, offset })
}

/// Convenience form of [`tau`] that expands θ as far as needed.
pub fn tau_of(theta: &RealParam, j: i64, t: f64) -> Result<TauPoint> {
    let exp = Expansion::new(theta, 2f64.powf(j as f64 / 2.0 + 4.0));
    tau(&exp, j, t)
}

/// Index steps `q ≥ 1` with the `k` smallest `|φ(n+q) − φ(n)|`, nearest
/// first. The search starts at `q ≤ 4·q_j` and grows until the radial gap
/// `√(n+q) − √n` alone exceeds the k-th length.
pub fn nearest_steps(exp: &Expansion, n: u64, k: usize) -> Result<Vec<u64>> {
    let q_top = match select_j(exp, n) {
        Ok(j) => exp.q(j).expect("selected"),
        Err(e) if exp.terminated() => exp.q(exp.last_index()).ok_or(e)?,
        Err(e) => return Err(e),
    };
    let ceiling = (4.0 * q_top) as u64;
    let phase = Phase::new(&exp.theta);
    let at = |m: u64| Complex64::from_polar((m as f64).sqrt(), 2.0 * PI * phase.frac(m));
    let p = at(n);
    let sn = (n as f64).sqrt();
    let mut all: Vec<(f64, u64)> = (1..=ceiling).map(|q| ((at(n + q) - p).norm(), q)).collect();
    loop {
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let reach = all.get(k.max(1) - 1).map_or(f64::INFINITY, |e| e.0);
        let top = all.len() as u64;
        let need = ((sn + reach).powi(2) - n as f64).ceil() as u64;
        if need <= top {
            break;
        }
        all.extend((top + 1..=need.min(2 * top)).map(|q| ((at(n + q) - p).norm(), q)));
    }
    Ok(all.into_iter().take(k).map(|e| e.1).collect())
}

/// Result of an ε-closeness certificate.
#[derive(Clone, Debug, Serialize)]
pub struct Closeness {
    /// ε for the lattice through `φ(n)` in the linear-model frame.
    pub epsilon: f64,
    /// Smallest ε over similarity refits of that lattice (minimax fit on
    /// matched pairs, then local search). Never larger than `epsilon`.
    pub refined_epsilon: f64,
    pub j: i64,
    /// Set when θ is rational and `√n` exceeds its last denominator; the
    /// model is then the last available lattice, whose second direction
    /// lies far outside the disc.
    pub degenerate: bool,
    pub seeds_in_disc: usize,
    pub lattice_in_disc: usize,
}

/// Options for [`closeness`].
#[derive(Clone, Copy, Debug)]
pub struct ClosenessOptions {
    /// Points within `R + slack` may serve as partners.
    pub slack: f64,
    /// Similarity refits after the anchored matching.
    pub refits: usize,
    /// Rounds of local pattern search on the similarity afterwards.
    pub search_rounds: usize,
}

impl Default for ClosenessOptions {
    fn default() -> Self {
        ClosenessOptions { slack: 1.0, refits: 4, search_rounds: 24 }
    }
}

/// Smallest ε such that `φ_θ(ℕ)` and an affine lattice similar to the
/// local model are ε-close in the disc of radius `r` about `φ_θ(n)`.
pub fn closeness(exp: &Expansion, n: u64, r: f64, opts: ClosenessOptions) -> Result<Closeness> {
    let (j, degenerate) = match select_j(exp, n) {
        Ok(j) => (j, false),
        Err(_) if exp.terminated() && exp.last_index() >= 1 => (exp.last_index(), true),
        Err(e) => return Err(e),
    };
    let (basis, _) = model_at(exp, j, n as f64)?;
    let phase = Phase::new(&exp.theta);
    let at = |m: u64| Complex64::from_polar((m as f64).sqrt(), 2.0 * PI * phase.frac(m));
    let p = at(n);
    let rot = p / (n as f64).sqrt();
    let rho = r + opts.slack;

    let sn = (n as f64).sqrt();
    let m_lo = if sn > rho { ((sn - rho).powi(2).floor() as u64).saturating_sub(1) } else { 0 };
    let m_hi = ((sn + rho).powi(2).ceil() as u64) + 1;
    let seeds: Vec<Complex64> = (m_lo..=m_hi).map(at).filter(|z| (z - p).norm() <= rho).collect();
    let seed_must: Vec<bool> = seeds.iter().map(|z| (z - p).norm() < r).collect();

    let (u1, u2) = gauss_reduce(basis.v1, basis.v2);
    let area = cross(u1, u2).abs();

    // lattice image under z ↦ center + scale·z
    let lattice = |center: Complex64, scale: Complex64| -> Vec<(Complex64, Complex64)> {
        let local = (p - center) / scale;
        let rad = rho / scale.norm();
        // Cramer coordinates of `local`
        let x0 = cross(local, u2) / cross(u1, u2);
        let y0 = cross(u1, local) / cross(u1, u2);
        let ba = (rad * u2.norm() / area).ceil() as i64 + 1;
        let bb = (rad * u1.norm() / area).ceil() as i64 + 1;
        let (xa, yb) = (x0.round() as i64, y0.round() as i64);
        let mut out = Vec::new();
        for a in xa - ba..=xa + ba {
            for b in yb - bb..=yb + bb {
                let l = u1 * a as f64 + u2 * b as f64;
                let z = center + scale * l;
                if (z - p).norm() <= rho {
                    out.push((z, l));
                }
            }
        }
        out
    };

    let seed_grid = Grid::new(&seeds, 0.5);
    let certify = |pts: &[(Complex64, Complex64)]| -> Option<(f64, Vec<(usize, usize)>)> {
        let lpos: Vec<Complex64> = pts.iter().map(|e| e.0).collect();
        let lmust: Vec<bool> = lpos.iter().map(|z| (z - p).norm() < r).collect();
        if lpos.is_empty() {
            return None;
        }
        let grid = Grid::new(&lpos, 0.5);
        // ε is at least the worst nearest-partner distance; grow the edge
        // cap from there so dense sets stay cheap
        let mut lower: f64 = 0.0;
        for (z, _) in seeds.iter().zip(&seed_must).filter(|e| *e.1) {
            lower = lower.max(grid.nearest(*z, None).map_or(f64::INFINITY, |e| e.1));
        }
        for (z, _) in lpos.iter().zip(&lmust).filter(|e| *e.1) {
            lower = lower.max(seed_grid.nearest(*z, None).map_or(f64::INFINITY, |e| e.1));
        }
        if lower > opts.slack {
            return None;
        }
        let mut cap = (2.0 * lower).max(1e-9);
        let eps = loop {
            cap = cap.min(opts.slack);
            let mut edges = Vec::new();
            for (i, s) in seeds.iter().enumerate() {
                for k in grid.within(*s, cap) {
                    edges.push((i, k, (lpos[k] - s).norm()));
                }
            }
            if let Some(e) = matching::bottleneck(&edges, seeds.len(), lpos.len(), &seed_must, &lmust) {
                break e;
            }
            if cap >= opts.slack {
                return None;
            }
            cap *= 2.0;
        };
        // mutual nearest partners near the disc drive the refit
        let pairs = seeds
            .iter()
            .enumerate()
            .filter(|(_, z)| (*z - p).norm() < r + eps)
            .filter_map(|(i, z)| {
                let (k, d) = grid.nearest(*z, None)?;
                let back = seed_grid.nearest(lpos[k], None)?.0;
                (back == i && d <= opts.slack).then_some((i, k))
            })
            .collect();
        Some((eps, pairs))
    };

    let mut center = p;
    let mut scale = rot;
    let mut pts = lattice(center, scale);
    let lattice_in_disc = pts.iter().filter(|e| (e.0 - p).norm() < r).count();
    let (anchored, mut pairs) = certify(&pts).ok_or(Error::MatchingInfeasible(opts.slack))?;
    let mut best = anchored;
    let mut best_map = (center, scale);
    for _ in 0..opts.refits {
        if pairs.len() < 2 {
            break;
        }
        let src: Vec<Complex64> = pairs.iter().map(|&(_, k)| pts[k].1).collect();
        let dst: Vec<Complex64> = pairs.iter().map(|&(i, _)| seeds[i]).collect();
        let Some((c, sc)) = minimax_similarity(&src, &dst) else { break };
        center = c;
        scale = sc;
        pts = lattice(center, scale);
        match certify(&pts) {
            Some((eps, pr)) => {
                if eps < best {
                    best = eps;
                    best_map = (center, scale);
                }
                pairs = pr;
            }
            None => break,
        }
    }
    // pattern search on (translation, log-scale, rotation)
    let eval = |m: (Complex64, Complex64)| certify(&lattice(m.0, m.1)).map_or(f64::INFINITY, |c| c.0);
    let mut step = [best * 0.25, best * 0.25, best * 0.25 / r, best * 0.25 / r];
    for _ in 0..opts.search_rounds {
        let mut improved = false;
        for (axis, h) in step.iter().enumerate() {
            for dir in [-1.0, 1.0] {
                let (c, sc) = best_map;
                let cand = match axis {
                    0 => (c + h * dir, sc),
                    1 => (c + Complex64::new(0.0, h * dir), sc),
                    2 => (c, sc * (h * dir).exp()),
                    _ => (c, sc * Complex64::from_polar(1.0, h * dir)),
                };
                let e = eval(cand);
                if e < best {
                    best = e;
                    best_map = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|h| *h *= 0.5);
        }
    }
    Ok(Closeness {
        epsilon: anchored,
        refined_epsilon: best,
        j,
        degenerate,
        seeds_in_disc: seed_must.iter().filter(|&&m| m).count(),
        lattice_in_disc,
    })
}

/// Weighted least squares fit `dst ≈ c + s·src`.
fn weighted_similarity(src: &[Complex64], dst: &[Complex64], w: &[f64]) -> Option<(Complex64, Complex64)> {
    let wt: f64 = w.iter().sum();
    let lm: Complex64 = src.iter().zip(w).map(|(z, w)| z * w).sum::<Complex64>() / wt;
    let sm: Complex64 = dst.iter().zip(w).map(|(z, w)| z * w).sum::<Complex64>() / wt;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for ((l, d), w) in src.iter().zip(dst).zip(w) {
        let dl = l - lm;
        num += (d - sm) * dl.conj() * w;
        den += dl.norm_sqr() * w;
    }
    if den <= 0.0 {
        return None;
    }
    let s = num / den;
    Some((sm - s * lm, s))
}

/// Similarity minimizing the largest residual, by Lawson's reweighting.
fn minimax_similarity(src: &[Complex64], dst: &[Complex64]) -> Option<(Complex64, Complex64)> {
    if src.len() < 2 {
        return None;
    }
    let mut w = vec![1.0 / src.len() as f64; src.len()];
    let mut best: Option<(f64, (Complex64, Complex64))> = None;
    for _ in 0..60 {
        let fit = weighted_similarity(src, dst, &w)?;
        let res: Vec<f64> = src.iter().zip(dst).map(|(l, d)| (d - fit.0 - fit.1 * l).norm()).collect();
        let worst = res.iter().cloned().fold(0.0, f64::max);
        if best.is_none_or(|b| worst < b.0) {
            best = Some((worst, fit));
        }
        let total: f64 = w.iter().zip(&res).map(|(w, r)| w * r).sum();
        if total <= 0.0 {
            break;
        }
        for (wi, r) in w.iter_mut().zip(&res) {
            *wi *= r / total;
        }
    }
    best.map(|b| b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{orbit_distance, phyllotactic_geodesic};
    use proptest::prelude::*;

    fn golden() -> Expansion {
        Expansion::new(&RealParam::golden(), 1e8)
    }

    fn theta_strategy() -> impl Strategy<Value = RealParam> {
        prop_oneof![
            (0.001f64..0.999).prop_map(|x| RealParam::float(x, 1e-15).unwrap()),
            (1i64..40, 1i64..4, prop::sample::select(vec![2i64, 3, 5, 7, 11, 13]), 2i64..60)
                .prop_filter_map("irrational", |(a, b, d, c)| RealParam::surd(a, b, d, c).ok().filter(|t| !t.is_rational())),
        ]
    }

    #[test]
    fn select_j_examples() {
        let g = golden();
        let j = select_j(&g, 400).unwrap();
        assert_eq!((g.q(j - 1).unwrap(), g.q(j).unwrap()), (13.0, 21.0));
        let j = select_j(&g, 1).unwrap();
        assert_eq!((g.q(j - 1).unwrap(), g.q(j).unwrap()), (1.0, 2.0));
        let e = Expansion::new(&RealParam::float((-1f64).exp(), 1e-15).unwrap(), 1e6);
        let j = select_j(&e, 150).unwrap();
        assert_eq!((e.q(j - 1).unwrap(), e.q(j).unwrap()), (11.0, 19.0));
        let third = Expansion::new(&RealParam::ratio(1, 3).unwrap(), 1e6);
        assert!(matches!(select_j(&third, 10_000), Err(Error::IndexUnavailable(_))));
        // boundary: √n equal to a denominator
        let j = select_j(&g, 169).unwrap();
        assert_eq!(g.q(j - 1).unwrap(), 13.0);
    }

    #[test]
    fn nearest_step_examples() {
        let g = golden();
        let mut s = nearest_steps(&g, 400, 2).unwrap();
        s.sort_unstable();
        assert_eq!(s, vec![34, 55]);
        let s = nearest_steps(&g, 40, 2).unwrap();
        assert_eq!(s, vec![13, 21]);
    }

    #[test]
    fn lattice_of_rational_theta() {
        // after the expansion of 2/7 ends, δ of the last index vanishes
        let e = Expansion::new(&RealParam::ratio(2, 7).unwrap(), 1e3);
        let (b, _) = model_at(&e, e.last_index(), 1e4).unwrap();
        assert!((b.det() - PI).abs() < 1e-10);
        assert!(b.v2.im.abs() < 1e-15);
    }

    #[test]
    fn closeness_golden() {
        let g = golden();
        let c = closeness(&g, 10_000, 5.0, ClosenessOptions::default()).unwrap();
        // the second-order distortion at the rim is about R²/(2√n) = 0.125
        assert!(c.epsilon < 0.14, "{c:?}");
        assert!(c.refined_epsilon < 0.11, "{c:?}");
        assert!(!c.degenerate);
        assert!(c.seeds_in_disc > 20 && c.lattice_in_disc > 20);
    }

    #[test]
    fn closeness_rational_is_flagged() {
        let e = Expansion::new(&RealParam::ratio(1, 3).unwrap(), 1e3);
        let c = closeness(&e, 40_000, 5.0, ClosenessOptions::default()).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.j, 1);
        // all seeds near φ(n) sit on one ray: the other lattice rows are far
        let (b, _) = model_at(&e, c.j, 40_000.0).unwrap();
        assert!(b.v1.norm() > 100.0 && b.v2.norm() < 0.01);
        // and the ray itself still linearizes, so ε keeps shrinking
        assert!(c.epsilon < 0.05, "{c:?}");
    }

    #[test]
    fn tau_recursion_golden() {
        let g = golden();
        for j in 0..8 {
            let a = g.a(j as usize + 1).unwrap() as f64;
            let t0 = tau(&g, j, 3.7).unwrap().value.to_complex();
            let t1 = tau(&g, j + 1, 3.7).unwrap().value.to_complex();
            let res = (t0 - sign(j) * a) * t1 + 1.0;
            assert!(res.norm() < 1e-12, "{j} {res}");
        }
    }

    #[test]
    fn closeness_decay() {
        let g = golden();
        let c: Vec<Closeness> = [1000u64, 4000, 16000, 64000].iter().map(|&n| closeness(&g, n, 5.0, ClosenessOptions::default()).unwrap()).collect();
        let e: Vec<f64> = c.iter().map(|c| c.epsilon).collect();
        for w in e.windows(2) {
            assert!(w[1] / w[0] > 0.35 && w[1] / w[0] < 0.65, "{e:?}");
        }
        assert!(c.iter().all(|c| c.refined_epsilon <= c.epsilon));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn area_and_short_vector(theta in theta_strategy(), n in 1u64..2_000_000) {
            let e = expansion_for(&theta, n);
            // a double close to a rational has a short expansion
            let Ok((b, _)) = linear_model(&e, n) else { return Ok(()) };
            prop_assert!((b.det() - PI).abs() < 1e-10, "{}", b.det());
            let s = b.shortest_vector().norm();
            prop_assert!(s <= (2.0 * PI / 3f64.sqrt()).sqrt() + 1e-12);
            prop_assert!(s < (0.25 + 4.0 * PI * PI).sqrt());
        }

        #[test]
        fn tau0_is_the_geodesic(theta in theta_strategy(), t in 0.01f64..1000.0) {
            let e = Expansion::new(&theta, 10.0);
            let z = tau(&e, 0, t).unwrap().value;
            let g = phyllotactic_geodesic(&theta, t);
            prop_assert!((z.x - g.x).abs() < 1e-12 * (1.0 + g.x.abs()) && (z.y - g.y).abs() < 1e-12 * (1.0 + g.y), "{z:?} {g:?}");
        }

        #[test]
        fn tau_recursion_and_orbit(theta in theta_strategy(), t in 0.1f64..1000.0) {
            let e = Expansion::new(&theta, 1e9);
            let z0 = tau(&e, 0, t).unwrap().value;
            for j in 0..=8i64 {
                let (Ok(tj), Ok(tk), Some(a)) = (tau(&e, j, t), tau(&e, j + 1, t), e.a(j as usize + 1)) else { break };
                prop_assert!(tj.value.y > 0.0);
                let res = (tj.value.to_complex() - sign(j) * a as f64) * tk.value.to_complex() + 1.0;
                prop_assert!(res.norm() < 1e-9, "j={} res={}", j, res);
                let direct = -sign(j + 1) * Complex64::new(e.q(j).unwrap(), 4.0 * PI * t * e.delta(j).unwrap())
                    / Complex64::new(e.q(j + 1).unwrap(), 4.0 * PI * t * e.delta(j + 1).unwrap());
                prop_assert!((direct - tk.value.to_complex()).norm() <= 1e-12 * direct.norm());
                prop_assert!(orbit_distance(z0, tk.reduced().unwrap()).unwrap() < 1e-9);
            }
        }

        #[test]
        fn second_order_error(theta in theta_strategy(), n in 10_000u64..1_000_000) {
            let e = expansion_for(&theta, n);
            let Ok((b, err)) = linear_model(&e, n) else { return Ok(()) };
            let phase = Phase::new(&theta);
            let rot = Complex64::from_polar(1.0, 2.0 * PI * phase.frac(n));
            let base = (n as f64).sqrt();
            for a in -2i64..=2 {
                for bb in -2i64..=2 {
                    let s = a * b.steps[0] + bb * b.steps[1];
                    let m = n as i64 + s;
                    if m < 0 {
                        continue;
                    }
                    let disp = Complex64::from_polar((m as f64).sqrt(), 2.0 * PI * phase.frac(m as u64)) / rot - base;
                    // E is expressed in (q_{j−1}, q_j)-coefficients; undo the orientation flip
                    let ea = a * b.orientation as i64;
                    let rem = disp - b.point(a, bb) - err.eval(ea, bb);
                    // third-order Taylor terms of √(n+s)·e^{2iπδ}
                    let (sf, nf) = (s as f64, n as f64);
                    let d = ea as f64 * err.delta[0] + bb as f64 * err.delta[1];
                    let t3 = sf.abs().powi(3) / (16.0 * nf.powf(2.5))
                        + PI * sf * sf * d.abs() / (4.0 * nf.powf(1.5))
                        + PI * PI * sf.abs() * d * d / nf.sqrt()
                        + 4.0 * PI.powi(3) * nf.sqrt() * d.abs().powi(3) / 3.0;
                    if t3 >= 0.05 {
                        continue;
                    }
                    prop_assert!(rem.norm() <= 2.0 * t3 + 1e-9, "rem {} t3 {}", rem.norm(), t3);
                }
            }
        }
    }
}
