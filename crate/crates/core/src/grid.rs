//! Uniform bucket grid for nearest-neighbour queries on planar points.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Grid {
    x0: f64,
    y0: f64,
    h: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
    pts: Vec<Complex64>,
}

impl Grid {
    /// Buckets of side `h` over the bounding box of `pts`.
    pub fn new(pts: &[Complex64], h: f64) -> Self {
        assert!(h > 0.0);
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            x0 = x0.min(p.re);
            y0 = y0.min(p.im);
            x1 = x1.max(p.re);
            y1 = y1.max(p.im);
        }
        if pts.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let nx = (((x1 - x0) / h).floor() as usize + 1).max(1);
        let ny = (((y1 - y0) / h).floor() as usize + 1).max(1);
        let cell = |p: &Complex64| -> usize {
            let i = (((p.re - x0) / h) as usize).min(nx - 1);
            let j = (((p.im - y0) / h) as usize).min(ny - 1);
            j * nx + i
        };
        let mut counts = vec![0u32; nx * ny + 1];
        for p in pts {
            counts[cell(p) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; pts.len()];
        for (idx, p) in pts.iter().enumerate() {
            let c = cell(p);
            items[fill[c] as usize] = idx as u32;
            fill[c] += 1;
        }
        Grid { x0, y0, h, nx, ny, start: counts, items, pts: pts.to_vec() }
    }

    fn coords(&self, p: Complex64) -> (i64, i64) {
        (((p.re - self.x0) / self.h).floor() as i64, ((p.im - self.y0) / self.h).floor() as i64)
    }

    fn bucket(&self, i: i64, j: i64) -> &[u32] {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            return &[];
        }
        let c = j as usize * self.nx + i as usize;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }

    /// Visits buckets in square rings around `p`, clipped to the grid;
    /// `visit` returns the current search radius, and the walk stops once
    /// rings lie beyond it.
    fn rings(&self, p: Complex64, mut visit: impl FnMut(usize) -> f64) {
        let (ci, cj) = self.coords(p);
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let gap = |c: i64, n: i64| if c < 0 { -c } else if c >= n { c - n + 1 } else { 0 };
        let first = gap(ci, nx).max(gap(cj, ny));
        let last = (ci.max(nx - 1 - ci)).max(cj.max(ny - 1 - cj));
        let mut radius = f64::INFINITY;
        let mut scan = |i: i64, j: i64, radius: &mut f64| {
            for &k in self.bucket(i, j) {
                *radius = visit(k as usize);
            }
        };
        for r in first..=last.max(first) {
            if (r - 1) as f64 * self.h > radius {
                break;
            }
            let (i0, i1) = ((ci - r).max(0), (ci + r).min(nx - 1));
            let (j0, j1) = ((cj - r).max(0), (cj + r).min(ny - 1));
            for j in [cj - r, cj + r] {
                if (0..ny).contains(&j) {
                    for i in i0..=i1 {
                        scan(i, j, &mut radius);
                    }
                }
                if r == 0 {
                    break;
                }
            }
            for i in [ci - r, ci + r] {
                if r > 0 && (0..nx).contains(&i) {
                    for j in j0.max(cj - r + 1)..=j1.min(cj + r - 1) {
                        scan(i, j, &mut radius);
                    }
                }
            }
        }
    }

    /// Nearest point to `p`, optionally skipping one index.
    pub fn nearest(&self, p: Complex64, skip: Option<usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.rings(p, |k| {
            if Some(k) != skip {
                let d = (self.pts[k] - p).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((k, d));
                }
            }
            best.map_or(f64::INFINITY, |b| b.1)
        });
        best
    }

    /// The `k` nearest points to `p` (excluding `skip`), sorted by distance.
    pub fn k_nearest(&self, p: Complex64, k: usize, skip: Option<usize>) -> Vec<(usize, f64)> {
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        self.rings(p, |idx| {
            if Some(idx) != skip {
                let d = (self.pts[idx] - p).norm();
                if best.len() < k || d < best[best.len() - 1].1 {
                    let pos = best.partition_point(|e| e.1 <= d);
                    best.insert(pos, (idx, d));
                    best.truncate(k);
                }
            }
            if best.len() < k {
                f64::INFINITY
            } else {
                best[best.len() - 1].1
            }
        });
        best
    }

    /// Indices of all points within distance `r` of `p`.
    pub fn within(&self, p: Complex64, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let (i0, j0) = self.coords(p - Complex64::new(r, r));
        let (i1, j1) = self.coords(p + Complex64::new(r, r));
        for i in i0..=i1 {
            for j in j0..=j1 {
                for &k in self.bucket(i, j) {
                    if (self.pts[k as usize] - p).norm() <= r {
                        out.push(k as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Complex64> = (0..500).map(|_| Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(-5.0..5.0))).collect();
        let g = Grid::new(&pts, 0.7);
        for _ in 0..100 {
            let q = Complex64::new(rng.random_range(-12.0..12.0), rng.random_range(-7.0..7.0));
            let brute = pts.iter().enumerate().map(|(i, p)| (i, (p - q).norm())).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            assert_eq!(g.nearest(q, None).unwrap().0, brute.0);
            let mut all: Vec<(usize, f64)> = pts.iter().enumerate().map(|(i, p)| (i, (p - q).norm())).collect();
            all.sort_by(|a, b| a.1.total_cmp(&b.1));
            let kn: Vec<usize> = g.k_nearest(q, 6, None).iter().map(|e| e.0).collect();
            assert_eq!(kn, all.iter().take(6).map(|e| e.0).collect::<Vec<_>>());
            let mut w: Vec<usize> = all.iter().filter(|e| e.1 <= 1.5).map(|e| e.0).collect();
            w.sort_unstable();
            assert_eq!(g.within(q, 1.5), w);
        }
    }
}
