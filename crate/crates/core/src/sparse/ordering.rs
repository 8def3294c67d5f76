//! Reverse Cuthill-McKee ordering for envelope factorizations.

use std::collections::VecDeque;

use crate::sparse::CsrMatrix;

/// Symmetric adjacency (diagonal excluded) of a square matrix's pattern.
fn adjacency(m: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in m.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, mark: &[bool]) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    let mut q = VecDeque::from([start]);
    level[start] = 0;
    let mut order = Vec::new();
    let mut depth = 0;
    while let Some(u) = q.pop_front() {
        order.push(u);
        depth = depth.max(level[u]);
        for &v in &adj[u] {
            if !mark[v] && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                q.push_back(v);
            }
        }
    }
    let last: Vec<usize> = order.into_iter().filter(|&u| level[u] == depth).collect();
    (last, depth)
}

/// Pseudo-peripheral node of the component containing `seed`
/// (George-Liu style: walk to a min-degree node of the deepest level until
/// the eccentricity stops growing).
fn peripheral(adj: &[Vec<usize>], seed: usize, mark: &[bool]) -> usize {
    let mut node = seed;
    let (mut last, mut depth) = bfs_levels(adj, node, mark);
    loop {
        let cand = *last.iter().min_by_key(|&&u| adj[u].len()).unwrap();
        let (l2, d2) = bfs_levels(adj, cand, mark);
        if d2 <= depth {
            return node;
        }
        node = cand;
        last = l2;
        depth = d2;
    }
}

/// Reverse Cuthill-McKee permutation; `perm[new] = old`.
pub fn reverse_cuthill_mckee(m: &CsrMatrix) -> Vec<usize> {
    let n = m.nrows();
    let adj = adjacency(m);
    let mut mark = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&u| (adj[u].len(), u));
    for &seed in &by_degree {
        if mark[seed] {
            continue;
        }
        let start = peripheral(&adj, seed, &mark);
        let first = perm.len();
        perm.push(start);
        mark[start] = true;
        let mut head = first;
        while head < perm.len() {
            let u = perm[head];
            head += 1;
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !mark[v]).collect();
            next.sort_by_key(|&v| (adj[v].len(), v));
            for v in next {
                mark[v] = true;
                perm.push(v);
            }
        }
    }
    perm.reverse();
    perm
}

/// Number of stored entries in the lower envelope under ordering `perm`
/// (`None` = natural order).
pub fn envelope_size(m: &CsrMatrix, perm: Option<&[usize]>) -> usize {
    let n = m.nrows();
    let mut inv: Vec<usize> = (0..n).collect();
    if let Some(p) = perm {
        for (new, &old) in p.iter().enumerate() {
            inv[old] = new;
        }
    }
    let mut first = (0..n).collect::<Vec<usize>>();
    for (i, j, _) in m.triplets() {
        let (a, b) = (inv[i], inv[j]);
        let (r, c) = if a >= b { (a, b) } else { (b, a) };
        first[r] = first[r].min(c);
    }
    first.iter().enumerate().map(|(i, &f)| i - f + 1).sum()
}
