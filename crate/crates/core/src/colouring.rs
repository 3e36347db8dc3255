//! Klein-four colourings of Voronoi cells.
//!
//! Sites carry labels `(n, k)` in `ℤ × ℤ/d`. Near radius `r` two label
//! steps `s1, s2` span the local lattice, so the label difference of two
//! adjacent cells is `a·s1 + b·s2` with small integers `(a, b)`, chosen by
//! the geometric residual. Propagating `(a, b)` from a reference cell away
//! from the seam gives lattice coordinates, and the colour of a cell is
//! its coordinate pair mod 2, an element of `V = ℤ/2 × ℤ/2`.

use crate::error::{Error, Result};
use crate::parastichy::families_whorled;
use crate::phyllo::PhylloSet;
use crate::voronoi::VoronoiDiagram;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::f64::consts::PI;

/// An element of `V`; addition is bitwise xor.
pub type Colour = [u8; 2];

pub const ZERO: Colour = [0, 0];

pub fn add(a: Colour, b: Colour) -> Colour {
    [a[0] ^ b[0], a[1] ^ b[1]]
}

fn mod2(a: i64, b: i64) -> Colour {
    [a.rem_euclid(2) as u8, b.rem_euclid(2) as u8]
}

/// Largest coefficient tried when decomposing a label difference.
const MAX_COEFF: i64 = 4;
/// Residual bound, as a fraction of the shorter basis vector.
const RESIDUAL_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Seam {
    /// The branch cut `{x < 0, y = 0}`.
    NegativeReal,
}

impl Seam {
    /// Whether the segment between two sites crosses the cut.
    pub fn crosses(&self, p: Complex64, q: Complex64) -> bool {
        match self {
            Seam::NegativeReal => {
                if (p.im >= 0.0) == (q.im >= 0.0) {
                    return false;
                }
                let x = p.re + (q.re - p.re) * (-p.im) / (q.im - p.im);
                x < 0.0
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColourMap {
    pub cell_colour: BTreeMap<usize, Colour>,
    /// Lattice coordinates `(a, b)` relative to the reference cell.
    pub coords: BTreeMap<usize, (i64, i64)>,
    pub reference: usize,
    /// Label steps `(Δn, Δk)`; empty for plain lattices.
    pub steps: Vec<(i64, i64)>,
    pub seam: Seam,
    /// Coordinate jump across the seam, from the upper to the lower side.
    pub monodromy_coords: (i64, i64),
    pub monodromy: Colour,
    pub seam_edges: Vec<(usize, usize)>,
    pub annulus: (f64, f64),
}

impl ColourMap {
    pub fn colour(&self, site: usize) -> Option<Colour> {
        self.cell_colour.get(&site).copied()
    }
}

/// Label arithmetic in `ℤ × ℤ/d` and the local basis at each site.
struct Labels<'a> {
    set: &'a PhylloSet,
    d: i64,
    theta: f64,
    steps: [(i64, i64); 2],
}

impl<'a> Labels<'a> {
    fn new(set: &'a PhylloSet, steps: [(i64, i64); 2]) -> Self {
        Labels { set, d: set.whorl as i64, theta: set.theta.to_f64(), steps }
    }
}

impl Labels<'_> {
    fn label(&self, i: usize) -> (i64, i64) {
        let p = &self.set.points[i];
        (p.n as i64, p.k as i64)
    }

    /// Rotation of the label step `s` about the origin, in `(−π, π]`.
    fn turn(&self, s: (i64, i64)) -> f64 {
        let f = (s.0 as f64 * self.theta + s.1 as f64) / self.d as f64;
        -2.0 * PI * (f.round() - f)
    }

    /// Step `s` centred at radius-label `x` and angle `arg`.
    fn step_at(&self, s: (i64, i64), x: f64, arg: f64) -> Complex64 {
        let d = self.d as f64;
        let (h, w) = (s.0 as f64 / 2.0, self.turn(s) / 2.0);
        Complex64::from_polar(((x + h) / d).sqrt(), arg + w) - Complex64::from_polar(((x - h) / d).max(0.0).sqrt(), arg - w)
    }

    /// `(a, b)` with `a·s1 + b·s2` equal to the label difference `j − i`,
    /// and the residual against the local lattice at the middle of the edge,
    /// relative to the shorter basis vector.
    fn decompose(&self, i: usize, j: usize, sites: &[Complex64]) -> Option<((i64, i64), f64)> {
        let (li, lj) = (self.label(i), self.label(j));
        let (dn, dk) = (lj.0 - li.0, lj.1 - li.1);
        let disp = sites[j] - sites[i];
        let [(n1, k1), (n2, k2)] = self.steps;
        let (t1, t2) = (self.turn(self.steps[0]), self.turn(self.steps[1]));
        let mut best: Option<((i64, i64), f64)> = None;
        for a in -MAX_COEFF..=MAX_COEFF {
            for b in -MAX_COEFF..=MAX_COEFF {
                let kk = a * k1 + b * k2;
                if a * n1 + b * n2 != dn || (kk - dk).rem_euclid(self.d) != 0 {
                    continue;
                }
                let x = li.0 as f64 + dn as f64 / 2.0;
                let arg = sites[i].arg() + (a as f64 * t1 + b as f64 * t2) / 2.0;
                let (v1, v2) = (self.step_at(self.steps[0], x, arg), self.step_at(self.steps[1], x, arg));
                let res = (disp - v1 * a as f64 - v2 * b as f64).norm() / v1.norm().min(v2.norm());
                if best.map_or(true, |x| res < x.1) {
                    best = Some(((a, b), res));
                }
            }
        }
        best
    }
}

/// Label steps of the two parastichy families at radius `r`.
fn local_steps(set: &PhylloSet, r: f64) -> Result<[(i64, i64); 2]> {
    let d = set.whorl as u64;
    let n = (r * r * d as f64).round() as u64;
    let rep = families_whorled(set, n)?;
    let p = set.position_of(n, 0);
    let pick = |q: u64| -> (i64, i64) {
        let k = (0..set.whorl)
            .min_by(|&a, &b| (set.position_of(n + q, a) - p).norm().total_cmp(&(set.position_of(n + q, b) - p).norm()))
            .unwrap_or(0);
        (q as i64, k as i64)
    };
    Ok([pick(rep.primary_step), pick(rep.secondary_step)])
}

fn region_sites(diag: &VoronoiDiagram, annulus: (f64, f64)) -> Vec<usize> {
    diag.interior_cells()
        .map(|c| c.site)
        .filter(|&s| {
            let r = diag.sites[s].norm();
            r > 1e-12 && r >= annulus.0 && r <= annulus.1
        })
        .collect()
}

/// Spreads edge coordinates from `reference` over the region, never across
/// the seam, then reads the jump across the seam.
fn propagate(
    diag: &VoronoiDiagram,
    region: &[usize],
    reference: usize,
    seam: Seam,
    edge: impl Fn(usize, usize) -> Result<(i64, i64)>,
) -> Result<(BTreeMap<usize, (i64, i64)>, Vec<(usize, usize)>, (i64, i64))> {
    let inside: HashSet<usize> = region.iter().copied().collect();
    let mut nbrs: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut seam_edges = Vec::new();
    for &(i, j) in &diag.adjacency {
        if !inside.contains(&i) || !inside.contains(&j) {
            continue;
        }
        let (p, q) = (diag.sites[i], diag.sites[j]);
        if seam.crosses(p, q) {
            seam_edges.push(if p.im >= 0.0 { (i, j) } else { (j, i) });
        } else {
            nbrs.entry(i).or_default().push(j);
            nbrs.entry(j).or_default().push(i);
        }
    }
    let mut coords: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    coords.insert(reference, (0, 0));
    let mut queue = VecDeque::from([reference]);
    while let Some(i) = queue.pop_front() {
        let ci = coords[&i];
        for &j in nbrs.get(&i).map(|v| v.as_slice()).unwrap_or(&[]) {
            let (a, b) = edge(i, j)?;
            let cj = (ci.0 + a, ci.1 + b);
            match coords.get(&j) {
                None => {
                    coords.insert(j, cj);
                    queue.push_back(j);
                }
                Some(&old) if old != cj => {
                    return Err(Error::LoopBroken(format!("coordinates of cell {j} disagree: {old:?} vs {cj:?}")));
                }
                _ => {}
            }
        }
    }
    let mut jump: Option<(i64, i64)> = None;
    for &(u, l) in &seam_edges {
        let (Some(&cu), Some(&cl)) = (coords.get(&u), coords.get(&l)) else { continue };
        let (a, b) = edge(u, l)?;
        let m = (cl.0 - cu.0 - a, cl.1 - cu.1 - b);
        match jump {
            None => jump = Some(m),
            Some(prev) if prev != m => {
                return Err(Error::LoopBroken(format!("seam jumps {prev:?} and {m:?} differ")));
            }
            _ => {}
        }
    }
    Ok((coords, seam_edges, jump.unwrap_or((0, 0))))
}

fn reference_site(diag: &VoronoiDiagram, region: &[usize], annulus: (f64, f64)) -> Result<usize> {
    let target = Complex64::new((annulus.0 + annulus.1) / 2.0, 0.0);
    region
        .iter()
        .copied()
        .min_by(|&a, &b| (diag.sites[a] - target).norm().total_cmp(&(diag.sites[b] - target).norm()))
        .ok_or(Error::EmptyAnnulus(annulus.0, annulus.1))
}

fn finish(
    coords: BTreeMap<usize, (i64, i64)>,
    reference: usize,
    steps: Vec<(i64, i64)>,
    seam_edges: Vec<(usize, usize)>,
    jump: (i64, i64),
    annulus: (f64, f64),
) -> ColourMap {
    let cell_colour = coords.iter().map(|(&s, &(a, b))| (s, mod2(a, b))).collect();
    ColourMap {
        cell_colour,
        coords,
        reference,
        steps,
        seam: Seam::NegativeReal,
        monodromy_coords: jump,
        monodromy: mod2(jump.0, jump.1),
        seam_edges,
        annulus,
    }
}

/// Colours the interior cells of `set` in the annulus by lattice
/// coordinates mod 2, using the label steps of the families at the middle
/// radius. Fails with `RoundingFailure` where an edge is not close to a
/// small lattice vector.
pub fn four_colour(set: &PhylloSet, diag: &VoronoiDiagram, annulus: (f64, f64)) -> Result<ColourMap> {
    let mid = (annulus.0 + annulus.1) / 2.0;
    let labels = Labels::new(set, local_steps(set, mid)?);
    let region = region_sites(diag, annulus);
    let reference = reference_site(diag, &region, annulus)?;
    let edge = |i: usize, j: usize| -> Result<(i64, i64)> {
        match labels.decompose(i, j, &diag.sites) {
            Some((ab, res)) if res < RESIDUAL_FRACTION => Ok(ab),
            _ => Err(Error::RoundingFailure { site: j }),
        }
    };
    let (coords, seam_edges, jump) = propagate(diag, &region, reference, Seam::NegativeReal, edge)?;
    Ok(finish(coords, reference, labels.steps.to_vec(), seam_edges, jump, annulus))
}

/// Colouring of a lattice patch `ℤw1 + ℤw2 + origin` by coordinates mod 2.
pub fn colour_lattice(diag: &VoronoiDiagram, w: [Complex64; 2], annulus: (f64, f64)) -> Result<ColourMap> {
    let det = w[0].re * w[1].im - w[0].im * w[1].re;
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateInput("lattice basis is degenerate".into()));
    }
    let region = region_sites(diag, annulus);
    let reference = reference_site(diag, &region, annulus)?;
    let edge = |i: usize, j: usize| -> Result<(i64, i64)> {
        let v = diag.sites[j] - diag.sites[i];
        let a = (v.re * w[1].im - v.im * w[1].re) / det;
        let b = (w[0].re * v.im - w[0].im * v.re) / det;
        let (ra, rb) = (a.round(), b.round());
        let res = (v - w[0] * ra - w[1] * rb).norm() / w[0].norm().min(w[1].norm());
        if res < RESIDUAL_FRACTION {
            Ok((ra as i64, rb as i64))
        } else {
            Err(Error::RoundingFailure { site: j })
        }
    };
    let (coords, seam_edges, jump) = propagate(diag, &region, reference, Seam::NegativeReal, edge)?;
    Ok(finish(coords, reference, Vec::new(), seam_edges, jump, annulus))
}

/// Whether every Voronoi vertex in the annulus whose cells are all coloured
/// and which touches no seam edge meets the three nonzero edge colours,
/// the colour of an edge between cells coloured `α` and `β` being `α + β`.
pub fn tait_check(diag: &VoronoiDiagram, colours: &ColourMap, annulus: (f64, f64)) -> Result<bool> {
    let seam: HashSet<(usize, usize)> = colours.seam_edges.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect();
    for v in &diag.vertices {
        let r = v.pos.norm();
        if r < annulus.0 || r > annulus.1 {
            continue;
        }
        if v.sites.iter().any(|&s| diag.sites[s].norm() < 1e-12) {
            return Err(Error::OriginCell);
        }
        let Some(cs) = v.sites.iter().map(|&s| colours.colour(s)).collect::<Option<Vec<Colour>>>() else {
            continue;
        };
        if v.sites.iter().any(|&a| v.sites.iter().any(|&b| seam.contains(&(a, b)))) {
            continue;
        }
        if cs.len() > 3 {
            return Err(Error::Degree4Vertex(v.pos.re, v.pos.im));
        }
        let mut edges = [add(cs[0], cs[1]), add(cs[1], cs[2]), add(cs[0], cs[2])];
        edges.sort_unstable();
        if edges != [[0, 1], [1, 0], [1, 1]] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every seam edge of `colours` joins cells whose colours differ by
/// the edge coordinates plus the monodromy element, so that crossing the
/// seam exchanges the colours in pairs `α ↔ α + m`.
pub fn seam_exchange(set: &PhylloSet, diag: &VoronoiDiagram, colours: &ColourMap) -> Result<bool> {
    let [s1, s2] = colours.steps[..] else {
        return Err(Error::InvalidParam("seam check needs label steps".into()));
    };
    let labels = Labels::new(set, [s1, s2]);
    for &(u, l) in &colours.seam_edges {
        let (Some(cu), Some(cl)) = (colours.colour(u), colours.colour(l)) else { continue };
        let ((a, b), _) = labels.decompose(u, l, &diag.sites).ok_or(Error::RoundingFailure { site: l })?;
        if add(cl, add(cu, mod2(a, b))) != colours.monodromy {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether adjacent coloured cells always differ, seam edges excluded.
pub fn is_proper(diag: &VoronoiDiagram, colours: &ColourMap) -> bool {
    let seam: HashSet<(usize, usize)> = colours.seam_edges.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect();
    diag.adjacency.iter().all(|&(i, j)| {
        seam.contains(&(i, j))
            || match (colours.colour(i), colours.colour(j)) {
                (Some(a), Some(b)) => a != b,
                _ => true,
            }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ColourMonodromy {
    pub loop_radius: f64,
    pub steps: Vec<(i64, i64)>,
    /// Sum of the edge coordinates along the loop.
    pub coords: (i64, i64),
    pub colour: Colour,
    pub loop_cells: usize,
}

/// Transports the colouring once around the origin through the cells met by
/// the circle of radius `loop_radius`, and returns the net translation of
/// `V`.
pub fn monodromy_colour(set: &PhylloSet, diag: &VoronoiDiagram, loop_radius: f64) -> Result<ColourMonodromy> {
    let labels = Labels::new(set, local_steps(set, loop_radius)?);
    let near: Vec<usize> = diag
        .interior_cells()
        .map(|c| c.site)
        .filter(|&s| (diag.sites[s].norm() - loop_radius).abs() < 3.0)
        .collect();
    if near.is_empty() {
        return Err(Error::LoopBroken(format!("no interior cells at radius {loop_radius}")));
    }
    let adj: HashSet<(usize, usize)> = diag.adjacency.iter().copied().collect();
    let samples = (2.0 * PI * loop_radius / 0.01).ceil() as usize;
    let mut cells: Vec<usize> = Vec::new();
    for s in 0..samples {
        let z = Complex64::from_polar(loop_radius, 2.0 * PI * s as f64 / samples as f64);
        let c = near
            .iter()
            .copied()
            .min_by(|&a, &b| (diag.sites[a] - z).norm().total_cmp(&(diag.sites[b] - z).norm()))
            .unwrap_or(near[0]);
        if cells.last() != Some(&c) {
            cells.push(c);
        }
    }
    while cells.len() > 1 && cells.first() == cells.last() {
        cells.pop();
    }
    let mut sum = (0i64, 0i64);
    for w in 0..cells.len() {
        let (i, j) = (cells[w], cells[(w + 1) % cells.len()]);
        if !adj.contains(&(i.min(j), i.max(j))) {
            return Err(Error::LoopBroken(format!("cells {i} and {j} on the loop are not adjacent")));
        }
        let ((a, b), res) = labels.decompose(i, j, &diag.sites).ok_or(Error::RoundingFailure { site: j })?;
        if res >= RESIDUAL_FRACTION {
            return Err(Error::RoundingFailure { site: j });
        }
        sum = (sum.0 + a, sum.1 + b);
    }
    Ok(ColourMonodromy {
        loop_radius,
        steps: labels.steps.to_vec(),
        coords: sum,
        colour: mod2(sum.0, sum.1),
        loop_cells: cells.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shade {
    Black,
    White,
}

/// White for odd `n`, black for even `n ≠ 0`, nothing for the origin seed.
pub fn black_white(set: &PhylloSet) -> Vec<Option<Shade>> {
    set.points
        .iter()
        .map(|p| match p.n {
            0 => None,
            n if n % 2 == 1 => Some(Shade::White),
            _ => Some(Shade::Black),
        })
        .collect()
}

/// Number of connected same-shade clusters among the interior cells in the
/// annulus.
pub fn stripe_count(set: &PhylloSet, diag: &VoronoiDiagram, annulus: (f64, f64)) -> usize {
    let shade = black_white(set);
    let region = region_sites(diag, annulus);
    let index: HashMap<usize, usize> = region.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mut parent: Vec<usize> = (0..region.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in &diag.adjacency {
        if let (Some(&a), Some(&b)) = (index.get(&i), index.get(&j)) {
            if shade[i].is_some() && shade[i] == shade[j] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    (0..region.len()).filter(|&k| find(&mut parent, k) == k).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::RealParam;
    use crate::phyllo::generate;
    use crate::voronoi::compute_set;

    fn lattice_patch(w: [Complex64; 2], m: i64) -> Vec<Complex64> {
        let shift = Complex64::new(0.123, 0.0456);
        let mut pts = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                pts.push(w[0] * a as f64 + w[1] * b as f64 + shift);
            }
        }
        pts
    }

    #[test]
    fn generic_lattice_is_tait() {
        let w = [Complex64::new(1.0, 0.0), Complex64::new(0.31, 1.07)];
        let pts = lattice_patch(w, 14);
        let diag = crate::voronoi::compute(&pts, 11.0).unwrap();
        let ann = (0.5, 6.0);
        let cm = colour_lattice(&diag, w, ann).unwrap();
        assert!(cm.cell_colour.len() > 50);
        assert!(is_proper(&diag, &cm));
        assert!(tait_check(&diag, &cm, ann).unwrap());
        assert_eq!(cm.monodromy, ZERO);
        for c in diag.interior_cells().filter(|c| cm.colour(c.site).is_some()) {
            let own = cm.colour(c.site).unwrap();
            let around: Vec<Colour> = c.neighbours.iter().flatten().filter_map(|&s| cm.colour(s)).collect();
            if around.len() < 6 {
                continue;
            }
            assert_eq!(c.edge_count(), 6);
            let others: HashSet<Colour> = around.iter().copied().collect();
            assert_eq!(others.len(), 3);
            assert!(!others.contains(&own));
            // opposite edges separate the cell from equally coloured cells
            for k in 0..3 {
                assert_eq!(around[k], around[k + 3]);
            }
        }
    }

    #[test]
    fn golden_annulus_is_tait() {
        let set = generate(&RealParam::golden(), 3600);
        let diag = compute_set(&set, 60.0).unwrap();
        for ann in [(12.0, 17.0), (20.0, 27.0), (31.0, 45.0)] {
            let cm = four_colour(&set, &diag, ann).unwrap();
            assert!(is_proper(&diag, &cm), "{ann:?}");
            assert!(tait_check(&diag, &cm, ann).unwrap(), "{ann:?}");
            assert_ne!(cm.monodromy, ZERO);
            assert!(!cm.seam_edges.is_empty());
            assert!(seam_exchange(&set, &diag, &cm).unwrap(), "{ann:?}");
        }
    }

    #[test]
    fn origin_cell_is_rejected() {
        let set = generate(&RealParam::golden(), 900);
        let diag = compute_set(&set, 28.0).unwrap();
        let cm = four_colour(&set, &diag, (8.0, 12.0)).unwrap();
        assert_eq!(tait_check(&diag, &cm, (0.0, 12.0)), Err(Error::OriginCell));
    }

    #[test]
    fn monodromy_is_the_parity_of_the_steps() {
        let set = generate(&RealParam::golden(), 3600);
        let diag = compute_set(&set, 60.0).unwrap();
        for r in [14.0, 15.0, 23.0, 24.0, 38.0] {
            let m = monodromy_colour(&set, &diag, r).unwrap();
            let (q1, q2) = (m.steps[0].0, m.steps[1].0);
            assert_eq!(m.coords.0.abs(), q2, "{m:?}");
            assert_eq!(m.coords.1.abs(), q1, "{m:?}");
            assert_eq!(m.colour, mod2(q2, q1));
        }
    }

    #[test]
    fn black_white_collapses_four_colours() {
        let set = generate(&RealParam::golden(), 3600);
        let diag = compute_set(&set, 60.0).unwrap();
        let bw = black_white(&set);
        assert_eq!(bw[0], None);
        assert_eq!(bw[1], Some(Shade::White));
        assert_eq!(bw[2], Some(Shade::Black));
        let cm = four_colour(&set, &diag, (20.0, 27.0)).unwrap();
        let m = cm.monodromy;
        let mut pairing: HashMap<Colour, Shade> = HashMap::new();
        for (&s, &c) in &cm.cell_colour {
            let orbit = c.min(add(c, m));
            let sh = bw[s].unwrap();
            assert_eq!(*pairing.entry(orbit).or_insert(sh), sh);
        }
        assert_eq!(pairing.len(), 2);
    }

    #[test]
    fn loop_and_seam_agree() {
        let set = generate(&RealParam::golden(), 3600);
        let diag = compute_set(&set, 60.0).unwrap();
        let (a, b) = (monodromy_colour(&set, &diag, 14.0).unwrap(), monodromy_colour(&set, &diag, 16.0).unwrap());
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.coords, b.coords);
        let cm = four_colour(&set, &diag, (12.0, 17.0)).unwrap();
        assert_eq!(cm.monodromy_coords, (-a.coords.0, -a.coords.1));
        assert_eq!(cm.monodromy, a.colour);
    }

    #[test]
    fn two_whorls_have_trivial_monodromy() {
        let set = crate::phyllo::generate_whorled(&RealParam::golden(), 2, 3000);
        let diag = compute_set(&set, 36.0).unwrap();
        let cm = four_colour(&set, &diag, (15.0, 22.0)).unwrap();
        assert!(is_proper(&diag, &cm));
        assert!(tait_check(&diag, &cm, (15.0, 22.0)).unwrap());
        assert_eq!(cm.monodromy, ZERO);
        assert_ne!(cm.monodromy_coords, (0, 0));
        assert_eq!(monodromy_colour(&set, &diag, 18.0).unwrap().colour, ZERO);
    }

    #[test]
    fn golden_stripes_are_even_fibonacci() {
        let set = generate(&RealParam::golden(), 6400);
        let diag = compute_set(&set, 80.0).unwrap();
        // every third defect circle is a checkerboard radius
        assert_eq!(stripe_count(&set, &diag, (2.66, 6.97)), 8);
        assert_eq!(stripe_count(&set, &diag, (6.97, 29.51)), 34);
        assert_eq!(stripe_count(&set, &diag, (29.51, 75.0)), 144);
    }
}
