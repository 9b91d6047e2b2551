//! Coarse/fine splitting and aggregation on a strength graph.
//!
//! Both algorithms break ties with a hash of the global row index, so the
//! result depends only on the matrix, never on how it is distributed.

use std::collections::{BTreeSet, VecDeque};

use crate::sparse::CsrMatrix;

/// Deterministic value in `[0, 1)` for row `i`.
pub fn hash_weight(i: usize) -> f64 {
    let mut z = (i as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CfLabel {
    Coarse,
    Fine,
}

/// Undirected neighbor lists of the strength graph.
fn symmetric_graph(s: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = s.n_rows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in s.row(i).0 {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// PMIS-style independent-set splitting.
///
/// Weight of a point is the number of points it strongly influences plus
/// its hash weight. Each round, every undecided point heavier than all its
/// undecided neighbors becomes coarse, then every undecided point that
/// strongly depends on a coarse point becomes fine. Points without any
/// strong coupling are fine from the start.
pub fn pmis(s: &CsrMatrix) -> Vec<CfLabel> {
    let n = s.n_rows();
    let adj = symmetric_graph(s);
    let mut weight: Vec<f64> = (0..n).map(hash_weight).collect();
    for &j in s.col_idx() {
        weight[j] += 1.0;
    }
    let heavier = |a: usize, b: usize| (weight[a], a) > (weight[b], b);

    let mut label: Vec<Option<CfLabel>> = (0..n)
        .map(|i| adj[i].is_empty().then_some(CfLabel::Fine))
        .collect();
    let mut undecided: Vec<usize> = (0..n).filter(|&i| label[i].is_none()).collect();

    while !undecided.is_empty() {
        let new_c: Vec<usize> = undecided
            .iter()
            .copied()
            .filter(|&i| {
                adj[i]
                    .iter()
                    .all(|&j| label[j].is_some() || heavier(i, j))
            })
            .collect();
        for &i in &new_c {
            label[i] = Some(CfLabel::Coarse);
        }
        for &i in &undecided {
            if label[i].is_none() && s.row(i).0.iter().any(|&j| label[j] == Some(CfLabel::Coarse)) {
                label[i] = Some(CfLabel::Fine);
            }
        }
        undecided.retain(|&i| label[i].is_none());
    }
    label.into_iter().map(|l| l.expect("all decided")).collect()
}

/// Classical first-pass coarsening, run sequentially over the whole graph.
///
/// A point's measure is the number of undecided or fine points it strongly
/// influences, with the hash weight as fractional tie-breaker. The heaviest
/// undecided point becomes coarse, the undecided points depending on it
/// become fine, and measures are updated: points that influence a new fine
/// point gain one, points the new coarse point depends on lose one. Points
/// without any strong coupling are fine from the start.
pub fn first_pass(s: &CsrMatrix) -> Vec<CfLabel> {
    let n = s.n_rows();
    let st = s.transpose();
    let adj = symmetric_graph(s);
    let mut measure: Vec<usize> = (0..n).map(|i| st.row_nnz(i)).collect();
    let key = |m: usize, i: usize| (m, hash_weight(i).to_bits(), i);

    let mut label: Vec<Option<CfLabel>> = (0..n)
        .map(|i| adj[i].is_empty().then_some(CfLabel::Fine))
        .collect();
    let mut queue: BTreeSet<(usize, u64, usize)> = (0..n)
        .filter(|&i| label[i].is_none())
        .map(|i| key(measure[i], i))
        .collect();

    let bump = |queue: &mut BTreeSet<_>, measure: &mut Vec<usize>, k: usize, up: bool| {
        queue.remove(&key(measure[k], k));
        if up {
            measure[k] += 1;
        } else {
            measure[k] = measure[k].saturating_sub(1);
        }
        queue.insert(key(measure[k], k));
    };

    while let Some((_, _, i)) = queue.pop_last() {
        label[i] = Some(CfLabel::Coarse);
        for &j in st.row(i).0 {
            if label[j].is_some() {
                continue;
            }
            queue.remove(&key(measure[j], j));
            label[j] = Some(CfLabel::Fine);
            for &k in s.row(j).0 {
                if label[k].is_none() {
                    bump(&mut queue, &mut measure, k, true);
                }
            }
        }
        for &k in s.row(i).0 {
            if label[k].is_none() {
                bump(&mut queue, &mut measure, k, false);
            }
        }
    }
    label.into_iter().map(|l| l.expect("all decided")).collect()
}

/// Result of aggregation: `aggregate[i]` is the aggregate of point `i`.
/// Aggregates are numbered by their root point in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregation {
    pub aggregate: Vec<usize>,
    /// Root point of every aggregate, ascending.
    pub roots: Vec<usize>,
}

impl Aggregation {
    pub fn num_aggregates(&self) -> usize {
        self.roots.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.roots.len()];
        for &a in &self.aggregate {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Aggregation from a distance-2 maximal independent set.
///
/// Roots are picked greedily in decreasing hash weight among points not yet
/// within distance two of a root. Every other point joins its nearest root,
/// preferring distance one, then the lowest root. Points without strong
/// couplings form singleton aggregates.
pub fn mis2_aggregate(s: &CsrMatrix) -> Aggregation {
    let n = s.n_rows();
    let adj = symmetric_graph(s);

    let mut order: Vec<usize> = (0..n).filter(|&i| !adj[i].is_empty()).collect();
    order.sort_by(|&a, &b| {
        hash_weight(b)
            .total_cmp(&hash_weight(a))
            .then(a.cmp(&b))
    });
    let mut is_root = vec![false; n];
    let mut covered = vec![false; n];
    for i in order {
        if covered[i] {
            continue;
        }
        is_root[i] = true;
        covered[i] = true;
        for &j in &adj[i] {
            covered[j] = true;
            for &k in &adj[j] {
                covered[k] = true;
            }
        }
    }
    for i in 0..n {
        if adj[i].is_empty() {
            is_root[i] = true;
        }
    }

    let roots: Vec<usize> = (0..n).filter(|&i| is_root[i]).collect();
    let mut id = vec![usize::MAX; n];
    for (a, &r) in roots.iter().enumerate() {
        id[r] = a;
    }

    // Breadth-first distance to the nearest root, processed root by root in
    // ascending order so ties go to the lowest root.
    let mut dist = vec![usize::MAX; n];
    let mut aggregate = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &r in &roots {
        dist[r] = 0;
        aggregate[r] = id[r];
        queue.push_back(r);
    }
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                aggregate[j] = aggregate[i];
                queue.push_back(j);
            } else if dist[j] == dist[i] + 1 && aggregate[i] < aggregate[j] {
                aggregate[j] = aggregate[i];
            }
        }
    }
    debug_assert!(dist.iter().all(|&d| d <= 2));
    Aggregation { aggregate, roots }
}
