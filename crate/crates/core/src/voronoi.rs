//! Voronoi diagrams of planar point sets clipped to a disc around the
//! origin, cell statistics, and the defect circles of phyllotactic sets.
//!
//! The triangulation comes from `spade` (exact orientation and incircle
//! predicates). Interior cells are the loops of circumcentres around each
//! site. Cells that touch the clip disc or the convex hull are rebuilt by
//! half-plane clipping against the bisectors of their Delaunay neighbours,
//! then intersected with the disc; their areas are exact.

use crate::contfrac::RealParam;
use crate::error::{Error, Result};
use crate::linearize;
use crate::par;
use crate::phyllo::PhylloSet;
use crate::trace::{self, EventKind};
use num_complex::Complex64;
use serde::Serialize;
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

/// Voronoi edges shorter than this are contracted.
pub const MERGE_TOL: f64 = 1e-9;
/// Edges below this length count as short.
pub const SHORT_EDGE_TOL: f64 = 0.05;
/// Cells with a vertex this close to the clip circle are boundary cells.
pub const BOUNDARY_BAND: f64 = 3.0;
/// Angular resolution of the polygonal arcs of clipped cells.
const ARC_SEGMENTS: usize = 2048;

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub site: usize,
    /// Counterclockwise vertex loop.
    pub polygon: Vec<Complex64>,
    /// `neighbours[k]` is the site across the edge `polygon[k] → polygon[k+1]`,
    /// `None` along the clip circle.
    pub neighbours: Vec<Option<usize>>,
    pub area: f64,
    pub boundary: bool,
}

impl Cell {
    pub fn edge_count(&self) -> usize {
        self.polygon.len()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        let m = self.polygon.len();
        (0..m).map(|k| (self.polygon[(k + 1) % m] - self.polygon[k]).norm()).collect()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.polygon {
            for b in &self.polygon {
                d = d.max((a - b).norm());
            }
        }
        d
    }
}

/// A Voronoi vertex after contraction of short edges; `sites` lists the
/// cells meeting there.
#[derive(Clone, Debug, Serialize)]
pub struct VoronoiVertex {
    pub pos: Complex64,
    pub sites: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VoronoiDiagram {
    pub sites: Vec<Complex64>,
    pub clip_radius: f64,
    /// Indexed by site; `None` when the cell misses the clip disc or the
    /// site duplicates an earlier one.
    pub cells: Vec<Option<Cell>>,
    /// Site pairs sharing an edge of positive length inside the disc.
    pub adjacency: Vec<(usize, usize)>,
    /// Vertices strictly inside the clip disc.
    pub vertices: Vec<VoronoiVertex>,
}

impl VoronoiDiagram {
    pub fn interior_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().flatten().filter(|c| !c.boundary)
    }
}

#[derive(Clone, Copy, Debug)]
struct Site {
    p: Point2<f64>,
    idx: usize,
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.p
    }
}

fn c(p: Point2<f64>) -> Complex64 {
    Complex64::new(p.x, p.y)
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn circumcenter(a: Complex64, b: Complex64, cc: Complex64) -> Complex64 {
    let (u, v) = (b - a, cc - a);
    let d = 2.0 * cross(u, v);
    let (nu, nv) = (u.norm_sqr(), v.norm_sqr());
    a + Complex64::new(v.im * nu - u.im * nv, u.re * nv - v.re * nu) / d
}

fn polygon_area(p: &[Complex64]) -> f64 {
    let m = p.len();
    (0..m).map(|k| cross(p[k], p[(k + 1) % m])).sum::<f64>() / 2.0
}

/// Signed area of the triangle `(0, a, b)` intersected with the disc `|z| ≤ r`.
fn wedge_disc_area(a: Complex64, b: Complex64, r: f64) -> f64 {
    let d = b - a;
    let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (a.re * d.re + a.im * d.im), a.norm_sqr() - r * r);
    let mut cuts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if qa > 0.0 && disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.push(1.0);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (a + d * w[0], a + d * w[1]);
        let mid = a + d * (0.5 * (w[0] + w[1]));
        if mid.norm() <= r {
            area += cross(p, q) / 2.0;
        } else {
            area += r * r * cross(p, q).atan2(p.re * q.re + p.im * q.im) / 2.0;
        }
    }
    area
}

/// Keeps the part of a labelled convex polygon where `f ≤ 0`, `f` affine;
/// new edges get `label`.
fn clip_half_plane(poly: &[(Complex64, Option<usize>)], f: impl Fn(Complex64) -> f64, label: Option<usize>) -> Vec<(Complex64, Option<usize>)> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for k in 0..m {
        let (p, lab) = poly[k];
        let q = poly[(k + 1) % m].0;
        let (fp, fq) = (f(p), f(q));
        if fp <= 0.0 {
            out.push((p, lab));
            if fq > 0.0 {
                out.push((p + (q - p) * (fp / (fp - fq)), label));
            }
        } else if fq <= 0.0 {
            out.push((p + (q - p) * (fp / (fp - fq)), lab));
        }
    }
    out
}

/// Drops contracted edges, keeping the label of the later edge.
fn contract(poly: Vec<(Complex64, Option<usize>)>) -> Vec<(Complex64, Option<usize>)> {
    let mut out: Vec<(Complex64, Option<usize>)> = Vec::with_capacity(poly.len());
    for v in poly {
        match out.last_mut() {
            Some(last) if (last.0 - v.0).norm() < MERGE_TOL => last.1 = v.1,
            _ => out.push(v),
        }
    }
    while out.len() > 1 && (out[0].0 - out[out.len() - 1].0).norm() < MERGE_TOL {
        out.pop();
    }
    out
}

/// Intersection of a convex labelled polygon with the disc `|z| ≤ r`:
/// the straight pieces keep their labels, arcs are sampled.
fn clip_to_disc(poly: &[(Complex64, Option<usize>)], r: f64) -> Vec<(Complex64, Option<usize>)> {
    let m = poly.len();
    // inside pieces in order: (start, end, label)
    let mut pieces: Vec<(Complex64, Complex64, Option<usize>)> = Vec::new();
    for k in 0..m {
        let (a, lab) = poly[k];
        let d = poly[(k + 1) % m].0 - a;
        let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (a.re * d.re + a.im * d.im), a.norm_sqr() - r * r);
        let disc = qb * qb - 4.0 * qa * qc;
        if qa == 0.0 || disc <= 0.0 {
            continue;
        }
        let s = disc.sqrt();
        let t0 = ((-qb - s) / (2.0 * qa)).max(0.0);
        let t1 = ((-qb + s) / (2.0 * qa)).min(1.0);
        if t1 > t0 {
            pieces.push((a + d * t0, a + d * t1, lab));
        }
    }
    if pieces.is_empty() {
        let inside = (0..m).all(|k| cross(poly[(k + 1) % m].0 - poly[k].0, -poly[k].0) >= 0.0);
        if !inside {
            return Vec::new();
        }
        return (0..ARC_SEGMENTS).map(|k| (Complex64::from_polar(r, 2.0 * PI * k as f64 / ARC_SEGMENTS as f64), None)).collect();
    }
    let mut out = Vec::new();
    let np = pieces.len();
    for k in 0..np {
        let (p, q, lab) = pieces[k];
        out.push((p, lab));
        let next = pieces[(k + 1) % np].0;
        if (q - next).norm() > MERGE_TOL {
            out.push((q, None));
            let (a0, mut a1) = (q.arg(), next.arg());
            while a1 <= a0 {
                a1 += 2.0 * PI;
            }
            let steps = ((a1 - a0) / (2.0 * PI) * ARC_SEGMENTS as f64).ceil() as usize;
            for s in 1..steps {
                out.push((Complex64::from_polar(r, a0 + (a1 - a0) * s as f64 / steps as f64), None));
            }
        }
    }
    contract(out)
}

fn clipped_area(poly: &[(Complex64, Option<usize>)], r: f64) -> f64 {
    let m = poly.len();
    (0..m).map(|k| wedge_disc_area(poly[k].0, poly[(k + 1) % m].0, r)).sum()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Voronoi diagram of `points` clipped to the disc of radius `clip_radius`.
pub fn compute(points: &[Complex64], clip_radius: f64) -> Result<VoronoiDiagram> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!("{} points", points.len())));
    }
    if !(clip_radius > 0.0) || points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::DegenerateInput("non-finite input or clip radius".into()));
    }
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    let mut unique = Vec::with_capacity(points.len());
    for (idx, p) in points.iter().enumerate() {
        if seen.insert((p.re.to_bits(), p.im.to_bits()), idx).is_none() {
            unique.push(Site { p: Point2::new(p.re, p.im), idx });
        }
    }
    let dt = DelaunayTriangulation::<Site>::bulk_load_stable(unique).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    if dt.num_inner_faces() == 0 {
        return Err(Error::DegenerateInput("all points collinear".into()));
    }

    // circumcentres of inner faces, and vertex groups joined across contracted edges
    let nf = dt.num_all_faces();
    let mut centre = vec![Complex64::new(f64::NAN, f64::NAN); nf];
    for f in dt.inner_faces() {
        let [a, b, cc] = f.positions();
        centre[f.fix().index()] = circumcenter(c(a), c(b), c(cc));
    }
    let mut parent: Vec<usize> = (0..nf).collect();
    for e in dt.undirected_edges() {
        let [d0, d1] = [e.as_directed(), e.as_directed().rev()];
        let (f0, f1) = (d0.face(), d1.face());
        if f0.is_outer() || f1.is_outer() {
            continue;
        }
        let (i, j) = (f0.fix().index(), f1.fix().index());
        if (centre[i] - centre[j]).norm() < MERGE_TOL {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri] = rj;
        }
    }
    let mut groups: BTreeMap<usize, (Complex64, Vec<usize>)> = BTreeMap::new();
    for f in dt.inner_faces() {
        let i = f.fix().index();
        let root = find(&mut parent, i);
        let entry = groups.entry(root).or_insert((centre[root], Vec::new()));
        for v in f.vertices() {
            entry.1.push(v.data().idx);
        }
    }
    let vertices: Vec<VoronoiVertex> = groups
        .into_values()
        .filter(|(p, _)| p.norm() < clip_radius)
        .map(|(pos, mut sites)| {
            sites.sort_unstable();
            sites.dedup();
            VoronoiVertex { pos, sites }
        })
        .collect();

    let box_half = 2.0 * clip_radius + points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let handles: Vec<_> = dt.fixed_vertices().collect();
    let built = par::map_slice(&handles, |&h| {
        let v = dt.vertex(h);
        let me = v.data().idx;
        let p = c(v.position());
        let mut ring: Vec<(Complex64, Option<usize>)> = Vec::new();
        let mut nbrs: Vec<(usize, Complex64)> = Vec::new();
        let mut bounded = true;
        let edges: Vec<_> = v.out_edges().collect();
        let m = edges.len();
        for k in 0..m {
            let e = edges[k];
            nbrs.push((e.to().data().idx, c(e.to().position())));
            let prev = edges[(k + m - 1) % m].face();
            if prev.is_outer() || e.face().is_outer() {
                bounded = false;
            }
        }
        if bounded {
            for k in 0..m {
                // edge dual to edges[k] runs from the face before it to the face after it
                let prev = edges[(k + m - 1) % m].face().fix().index();
                ring.push((centre[prev], Some(nbrs[k].0)));
            }
        }
        let inside = bounded && ring.iter().all(|(q, _)| q.norm() <= clip_radius);
        let (poly, area) = if inside {
            let poly = contract(ring);
            let pts: Vec<Complex64> = poly.iter().map(|x| x.0).collect();
            let a = polygon_area(&pts);
            (poly, a)
        } else {
            let b = box_half;
            let mut poly: Vec<(Complex64, Option<usize>)> =
                [(-b, -b), (b, -b), (b, b), (-b, b)].iter().map(|&(x, y)| (Complex64::new(x, y), None)).collect();
            for &(j, q) in &nbrs {
                let mid = (p + q) / 2.0;
                let dir = q - p;
                poly = clip_half_plane(&poly, |z| (z - mid).re * dir.re + (z - mid).im * dir.im, Some(j));
            }
            let poly = contract(poly);
            let area = clipped_area(&poly, clip_radius);
            (clip_to_disc(&poly, clip_radius), area)
        };
        if poly.len() < 3 {
            return (me, None);
        }
        let boundary = !inside || poly.iter().any(|(q, _)| q.norm() > clip_radius - BOUNDARY_BAND);
        let (polygon, neighbours) = poly.into_iter().unzip();
        (me, Some(Cell { site: me, polygon, neighbours, area, boundary }))
    });
    let mut cells: Vec<Option<Cell>> = vec![None; points.len()];
    for (me, cell) in built {
        cells[me] = cell;
    }
    let mut adjacency = Vec::new();
    for cell in cells.iter().flatten() {
        for &j in cell.neighbours.iter().flatten() {
            if cell.site < j {
                adjacency.push((cell.site, j));
            }
        }
    }
    adjacency.sort_unstable();
    adjacency.dedup();
    Ok(VoronoiDiagram { sites: points.to_vec(), clip_radius, cells, adjacency, vertices })
}

/// `compute` on the positions of a phyllotactic set; cell `i` belongs to
/// `set.points[i]`.
pub fn compute_set(set: &PhylloSet, clip_radius: f64) -> Result<VoronoiDiagram> {
    if set.max_radius() < clip_radius {
        return Err(Error::InsufficientPoints { have: set.max_radius(), need: clip_radius });
    }
    compute(&set.positions(), clip_radius)
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct AreaStats {
    pub mean: f64,
    pub max_dev: f64,
    pub count: usize,
}

/// Mean and largest deviation of the areas of interior cells whose sites
/// lie in `r_in ≤ |z| < r_out`.
pub fn cell_area_stats(diag: &VoronoiDiagram, annulus: (f64, f64)) -> Result<AreaStats> {
    let (r_in, r_out) = annulus;
    let areas: Vec<f64> = diag
        .interior_cells()
        .filter(|c| {
            let r = diag.sites[c.site].norm();
            r >= r_in && r < r_out
        })
        .map(|c| c.area)
        .collect();
    if areas.is_empty() {
        return Err(Error::EmptyAnnulus(r_in, r_out));
    }
    let mean = areas.iter().sum::<f64>() / areas.len() as f64;
    let max_dev = areas.iter().map(|a| (a - mean).abs()).fold(0.0, f64::max);
    Ok(AreaStats { mean, max_dev, count: areas.len() })
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct CellHistogram {
    /// Interior cells by number of edges.
    pub by_edges: BTreeMap<usize, usize>,
    pub short_edges: usize,
    pub cells_with_short_edges: usize,
}

impl CellHistogram {
    pub fn count(&self, edges: usize) -> usize {
        self.by_edges.get(&edges).copied().unwrap_or(0)
    }
}

/// Edge-count histogram of the interior cells accepted by `keep`.
pub fn classify_cells_where(diag: &VoronoiDiagram, keep: impl Fn(&Cell) -> bool) -> CellHistogram {
    let mut h = CellHistogram::default();
    for cell in diag.interior_cells().filter(|c| keep(c)) {
        *h.by_edges.entry(cell.edge_count()).or_insert(0) += 1;
        let short = cell.edge_lengths().iter().filter(|&&l| l < SHORT_EDGE_TOL).count();
        h.short_edges += short;
        h.cells_with_short_edges += (short > 0) as usize;
    }
    h
}

pub fn classify_cells(diag: &VoronoiDiagram) -> CellHistogram {
    classify_cells_where(diag, |_| true)
}

/// Hexagon whose two shortest edges are separated by exactly one edge
/// (a near-rectangular cell has them opposite).
pub fn is_defect_hexagon(cell: &Cell) -> bool {
    if cell.edge_count() != 6 {
        return false;
    }
    let len = cell.edge_lengths();
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| len[a].total_cmp(&len[b]));
    let gap = (order[0] + 6 - order[1]) % 6;
    gap == 2 || gap == 4
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainCounts {
    pub radius: f64,
    pub pentagons: usize,
    pub heptagons: usize,
    /// `min(pentagons, heptagons)`.
    pub dipoles: usize,
    pub defect_hexagons: usize,
    /// Mean site radius of the heptagons and of the pentagons.
    pub heptagon_radius: f64,
    pub pentagon_radius: f64,
    /// Family counts `a < b` at the circle.
    pub a: u64,
    pub b: u64,
}

/// Half-width of the ring of cells searched for the pentagons and
/// heptagons of a defect circle; defect hexagons sit on the circle and are
/// searched in half of it.
pub fn chain_band(radius: f64) -> f64 {
    (0.3 * radius).min(1.5)
}

/// Pentagons, heptagons and defect hexagons among the interior cells near
/// the circle (see [`chain_band`]), checked against `a` dipoles and
/// `b − a` defect hexagons (±1 each), where `a < b` are the two nearest
/// index steps at `n = radius²`.
pub fn defect_chain_counts(diag: &VoronoiDiagram, circle_radius: f64, theta: &RealParam) -> Result<ChainCounts> {
    let w = chain_band(circle_radius);
    if circle_radius + w > diag.clip_radius - BOUNDARY_BAND {
        return Err(Error::InvalidParam(format!("circle {circle_radius} not interior to the diagram")));
    }
    let n = (circle_radius * circle_radius).round() as u64;
    let exp = linearize::expansion_for(theta, n);
    let steps = linearize::nearest_steps(&exp, n.max(1), 2)?;
    let (a, b) = (steps[0].min(steps[1]), steps[0].max(steps[1]));
    // cells closer in radius to a neighbouring circle belong to that one
    let others = defect_circles(theta, ((circle_radius / 2.0).powi(2), (2.0 * circle_radius).powi(2)))?.radii;
    let lo = others.iter().copied().filter(|&r| r < circle_radius * (1.0 - 1e-9)).fold(0.0, f64::max);
    let hi = others.iter().copied().filter(|&r| r > circle_radius * (1.0 + 1e-9)).fold(f64::INFINITY, f64::min);
    let ring: Vec<&Cell> = diag
        .interior_cells()
        .filter(|c| {
            let r = diag.sites[c.site].norm();
            (r - circle_radius).abs() < w && r > (lo + circle_radius) / 2.0 && r < (hi + circle_radius) / 2.0
        })
        .collect();
    let mean_r = |e: usize| {
        let rs: Vec<f64> = ring.iter().filter(|c| c.edge_count() == e).map(|c| diag.sites[c.site].norm()).collect();
        if rs.is_empty() { f64::NAN } else { rs.iter().sum::<f64>() / rs.len() as f64 }
    };
    let pentagons = ring.iter().filter(|c| c.edge_count() == 5).count();
    let heptagons = ring.iter().filter(|c| c.edge_count() == 7).count();
    let defect_hexagons = ring.iter().filter(|c| (diag.sites[c.site].norm() - circle_radius).abs() < w / 2.0 && is_defect_hexagon(c)).count();
    let counts = ChainCounts {
        radius: circle_radius,
        pentagons,
        heptagons,
        dipoles: pentagons.min(heptagons),
        defect_hexagons,
        heptagon_radius: mean_r(7),
        pentagon_radius: mean_r(5),
        a,
        b,
    };
    let off = |x: usize, y: u64| (x as i64 - y as i64).abs() > 1;
    if off(counts.dipoles, a) || off(defect_hexagons, b - a) {
        return Err(Error::CountMismatch { radius: circle_radius, dipoles: counts.dipoles, hexagons: defect_hexagons, a, expected_hex: b - a });
    }
    Ok(counts)
}

/// Defect circles with `√t` inside the interior of `diag`, each with its
/// chain counts.
pub fn defect_report(diag: &VoronoiDiagram, theta: &RealParam, t_min: f64) -> Result<DefectReport> {
    let r_max = diag.clip_radius - BOUNDARY_BAND;
    let mut rep = defect_circles(theta, (t_min, r_max * r_max))?;
    rep.radii.retain(|&r| r + chain_band(r) < r_max);
    rep.chains = rep.radii.iter().map(|&r| defect_chain_counts(diag, r, theta)).collect::<Result<_>>()?;
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub radii: Vec<f64>,
    pub degenerate: bool,
    pub chains: Vec<ChainCounts>,
}

/// Radii `√t` at which the reduced geodesic meets the imaginary axis.
pub fn defect_circles(theta: &RealParam, t_range: (f64, f64)) -> Result<DefectReport> {
    let tr = trace::trace(theta, t_range.0, t_range.1)?;
    let radii = tr.of_kind(EventKind::Defect).map(|e| e.radius).collect();
    Ok(DefectReport { radii, degenerate: tr.degenerate, chains: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phyllo::generate;
    use rand::{Rng, SeedableRng};

    fn lattice(u: Complex64, v: Complex64, k: i64) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for a in -k..=k {
            for b in -k..=k {
                pts.push(u * a as f64 + v * b as f64);
            }
        }
        pts
    }

    #[test]
    fn square_lattice_gives_unit_squares() {
        let d = compute(&lattice(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 12), 10.0).unwrap();
        let h = classify_cells(&d);
        assert_eq!(h.by_edges.keys().copied().collect::<Vec<_>>(), vec![4]);
        for c in d.interior_cells() {
            assert!((c.area - 1.0).abs() < 1e-12);
        }
        assert!(d.vertices.iter().any(|v| v.sites.len() == 4));
    }

    #[test]
    fn hexagonal_lattice_gives_regular_hexagons() {
        let w = Complex64::from_polar(1.0, PI / 3.0);
        let d = compute(&lattice(Complex64::new(1.0, 0.0), w, 14), 10.0).unwrap();
        assert_eq!(classify_cells(&d).by_edges.keys().copied().collect::<Vec<_>>(), vec![6]);
        for c in d.interior_cells() {
            assert!((c.area - 3f64.sqrt() / 2.0).abs() < 1e-12);
            for l in c.edge_lengths() {
                assert!((l - 1.0 / 3f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rectangular_lattice_gives_quadrilaterals() {
        let d = compute(&lattice(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.7), 10), 8.0).unwrap();
        assert_eq!(classify_cells(&d).by_edges.keys().copied().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn generic_lattice_gives_hexagons() {
        let d = compute(&lattice(Complex64::new(1.0, 0.1), Complex64::new(0.3, 1.2), 14), 8.0).unwrap();
        assert_eq!(classify_cells(&d).by_edges.keys().copied().collect::<Vec<_>>(), vec![6]);
    }

    #[test]
    fn degenerate_inputs() {
        let two = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(compute(&two, 1.0), Err(Error::DegenerateInput(_))));
        let line: Vec<Complex64> = (0..5).map(|k| Complex64::new(k as f64, 2.0 * k as f64)).collect();
        assert!(matches!(compute(&line, 1.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn golden_cells_tile_the_disc() {
        let set = generate(&RealParam::golden(), 25 * 25);
        let d = compute_set(&set, 20.0).unwrap();
        let total: f64 = d.cells.iter().flatten().map(|c| c.area).sum();
        let disc = PI * 400.0;
        assert!((total - disc).abs() / disc < 1e-8, "{total} vs {disc}");
        let inside = set.points.iter().filter(|p| p.pos.norm() < 20.0).count();
        let with_cells = d.cells.iter().flatten().filter(|c| d.sites[c.site].norm() < 20.0).count();
        assert_eq!(inside, with_cells);
        assert!(d.cells.iter().flatten().all(|c| c.area > 0.0));
    }

    #[test]
    fn edges_are_bisectors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Complex64> = (0..400).map(|_| Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))).collect();
        let d = compute(&pts, 9.0).unwrap();
        let total: f64 = d.cells.iter().flatten().map(|c| c.area).sum();
        assert!((total - 81.0 * PI).abs() / (81.0 * PI) < 1e-8);
        for cell in d.cells.iter().flatten() {
            let m = cell.polygon.len();
            for k in 0..m {
                let Some(j) = cell.neighbours[k] else { continue };
                let (p, q) = (d.sites[cell.site], d.sites[j]);
                for z in [cell.polygon[k], cell.polygon[(k + 1) % m]] {
                    let scale = 1.0 + z.norm();
                    assert!(((z - p).norm() - (z - q).norm()).abs() < 1e-9 * scale);
                }
            }
            assert!(polygon_area(&cell.polygon) > 0.0);
        }
    }

    #[test]
    fn wedge_area_oracle() {
        // triangle fully inside, and a full disc as a polygon that contains it
        let (a, b) = (Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.4));
        assert!((wedge_disc_area(a, b, 1.0) - 0.06).abs() < 1e-15);
        let sq: Vec<Complex64> = [(-2.0, -2.0), (2.0, -2.0), (2.0, 2.0), (-2.0, 2.0)].iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let total: f64 = (0..4).map(|k| wedge_disc_area(sq[k], sq[(k + 1) % 4], 1.5)).sum();
        assert!((total - PI * 2.25).abs() < 1e-12);
        // half-plane x ≤ 0.5 against the unit disc: area π/3 + ... by the segment formula
        let h = 0.5f64;
        let seg = (h.acos() - h * (1.0 - h * h).sqrt()) as f64;
        let half: Vec<Complex64> = [(-2.0, -2.0), (0.5, -2.0), (0.5, 2.0), (-2.0, 2.0)].iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let got: f64 = (0..4).map(|k| wedge_disc_area(half[k], half[(k + 1) % 4], 1.0)).sum();
        assert!((got - (PI - seg)).abs() < 1e-12);
    }

    #[test]
    fn golden_defect_chains() {
        let g = RealParam::golden();
        let d = compute_set(&generate(&g, 101 * 101), 100.0).unwrap();
        let rep = defect_report(&d, &g, 30.0).unwrap();
        assert!(rep.radii.len() >= 4, "{:?}", rep.radii);
        for ch in &rep.chains {
            assert_eq!(ch.pentagons, ch.heptagons, "{ch:?}");
            assert!(ch.heptagon_radius < ch.radius && ch.radius < ch.pentagon_radius, "{ch:?}");
        }
        // the circle near radius 29.5 sits between the families 55 and 89
        let ch = rep.chains.iter().find(|c| (c.radius - 29.5).abs() < 1.0).unwrap();
        assert_eq!((ch.a, ch.b, ch.dipoles, ch.defect_hexagons), (55, 89, 55, 34));
        let first = &rep.chains[0];
        assert_eq!((first.a, first.b, first.dipoles, first.defect_hexagons), (13, 21, 13, 8));
        for w in rep.chains.windows(2) {
            assert_eq!(w[1].b - w[1].a, w[0].a);
        }
    }

    #[test]
    fn polygon_ring_areas_converge() {
        let set = generate(&RealParam::ratio(2, 7).unwrap(), 101 * 101);
        let d = compute_set(&set, 100.0).unwrap();
        let target = 7.0 * (PI / 7.0).tan();
        let s = cell_area_stats(&d, (50.0, 85.0)).unwrap();
        assert!((s.mean - target).abs() / target < 0.02);
    }

    #[test]
    fn golden_area_deviation_shrinks() {
        let set = generate(&RealParam::golden(), 161 * 161);
        let d = compute_set(&set, 160.0).unwrap();
        let devs: Vec<f64> = [(10.0, 20.0), (20.0, 40.0), (40.0, 80.0), (80.0, 150.0)]
            .iter()
            .map(|&a| cell_area_stats(&d, a).unwrap().max_dev)
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    }
}
