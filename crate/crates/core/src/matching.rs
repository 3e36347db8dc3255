//! Bottleneck bipartite matching with must-match vertex sets.

/// Weighted candidate edge `(left, right, length)`.
pub type Edge = (usize, usize, f64);

const FREE: usize = usize::MAX;

/// Whether the graph has a matching saturating every left vertex flagged
/// in `must`: Hopcroft–Karp on the subgraph of flagged left vertices.
fn saturates(adj: &[Vec<usize>], n_right: usize, must: &[bool]) -> bool {
    let left: Vec<usize> = (0..adj.len()).filter(|&u| must[u]).collect();
    if left.iter().any(|&u| adj[u].is_empty()) {
        return false;
    }
    let mut mate_l = vec![FREE; adj.len()];
    let mut mate_r = vec![FREE; n_right];
    let mut dist = vec![0usize; adj.len()];
    let mut size = 0;
    loop {
        // BFS layers from free left vertices
        let mut queue = std::collections::VecDeque::new();
        for &u in &left {
            if mate_l[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = FREE;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &r in &adj[u] {
                match mate_r[r] {
                    FREE => found = true,
                    w if dist[w] == FREE => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return size == left.len();
        }
        for &u in &left {
            if mate_l[u] == FREE && augment(u, adj, &mut mate_l, &mut mate_r, &mut dist) {
                size += 1;
            }
        }
    }
}

fn augment(u: usize, adj: &[Vec<usize>], mate_l: &mut [usize], mate_r: &mut [usize], dist: &mut [usize]) -> bool {
    for &r in &adj[u] {
        let w = mate_r[r];
        if w == FREE || (dist[w] == dist[u] + 1 && augment(w, adj, mate_l, mate_r, dist)) {
            mate_l[u] = r;
            mate_r[r] = u;
            return true;
        }
    }
    dist[u] = FREE;
    false
}

/// Feasibility at threshold `eps`: a matching using edges of length at most
/// `eps` saturates both must-sets. Separate saturating matchings for each
/// side combine into one (Mendelsohn–Dulmage), so two checks suffice.
pub fn feasible(edges: &[Edge], n_left: usize, n_right: usize, must_left: &[bool], must_right: &[bool], eps: f64) -> bool {
    let mut fwd = vec![Vec::new(); n_left];
    let mut bwd = vec![Vec::new(); n_right];
    for &(l, r, d) in edges {
        if d <= eps {
            fwd[l].push(r);
            bwd[r].push(l);
        }
    }
    saturates(&fwd, n_right, must_left) && saturates(&bwd, n_left, must_right)
}

/// Smallest edge length at which `feasible` holds, if any.
pub fn bottleneck(edges: &[Edge], n_left: usize, n_right: usize, must_left: &[bool], must_right: &[bool]) -> Option<f64> {
    let mut cand: Vec<f64> = edges.iter().map(|e| e.2).collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    if !must_left.iter().chain(must_right).any(|&m| m) {
        return Some(0.0);
    }
    let top = *cand.last()?;
    if !feasible(edges, n_left, n_right, must_left, must_right, top) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(edges, n_left, n_right, must_left, must_right, cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(cand[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Exhaustive oracle over all injections of the must-left side.
    fn brute(w: &[Vec<f64>], must_l: &[bool], must_r: &[bool]) -> Option<f64> {
        let nl = w.len();
        let nr = w[0].len();
        let mut best: Option<f64> = None;
        let mut assign = vec![usize::MAX; nl];
        fn rec(i: usize, w: &[Vec<f64>], must_l: &[bool], must_r: &[bool], used: &mut Vec<bool>, assign: &mut Vec<usize>, cur: f64, best: &mut Option<f64>) {
            if i == w.len() {
                if must_r.iter().enumerate().all(|(r, &m)| !m || used[r]) {
                    if best.map_or(true, |b| cur < b) {
                        *best = Some(cur);
                    }
                }
                return;
            }
            if !must_l[i] {
                rec(i + 1, w, must_l, must_r, used, assign, cur, best);
            }
            for r in 0..used.len() {
                if !used[r] && w[i][r].is_finite() {
                    used[r] = true;
                    assign[i] = r;
                    rec(i + 1, w, must_l, must_r, used, assign, cur.max(w[i][r]), best);
                    used[r] = false;
                }
            }
        }
        let mut used = vec![false; nr];
        rec(0, w, must_l, must_r, &mut used, &mut assign, 0.0, &mut best);
        best
    }

    #[test]
    fn agrees_with_exhaustive_search() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let nl = rng.random_range(1..6);
            let nr = rng.random_range(1..6);
            let mut w = vec![vec![f64::INFINITY; nr]; nl];
            let mut edges = Vec::new();
            for l in 0..nl {
                for r in 0..nr {
                    if rng.random_bool(0.6) {
                        let d: f64 = rng.random_range(0.0..1.0);
                        w[l][r] = d;
                        edges.push((l, r, d));
                    }
                }
            }
            let ml: Vec<bool> = (0..nl).map(|_| rng.random_bool(0.6)).collect();
            let mr: Vec<bool> = (0..nr).map(|_| rng.random_bool(0.6)).collect();
            let got = bottleneck(&edges, nl, nr, &ml, &mr);
            let want = brute(&w, &ml, &mr);
            if ml.iter().chain(&mr).any(|&m| m) {
                assert_eq!(got, want, "{w:?} {ml:?} {mr:?}");
            }
        }
    }
}
