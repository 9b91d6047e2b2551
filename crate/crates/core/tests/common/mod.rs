#![allow(dead_code)]

use nap_amg::comm::CommPattern;
use nap_amg::{CsrMatrix, RowPartition, Topology};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sparse(rng: &mut impl Rng, rows: usize, cols: usize, density: f64) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen_bool(density) {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(rows, cols, &t).unwrap()
}

/// Random square matrix with a nonzero diagonal and a few long-range
/// couplings, so partitions see both near and far neighbors.
pub fn random_square(rng: &mut impl Rng, n: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 4.0 + rng.gen_range(0.0..1.0)));
        for _ in 0..rng.gen_range(0..4) {
            let j = rng.gen_range(0..n);
            if j != i {
                t.push((i, j, rng.gen_range(-1.0..0.0)));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

/// Contiguous partition with random (possibly empty) blocks.
pub fn random_partition(rng: &mut impl Rng, n: usize, p: usize) -> RowPartition {
    let mut cuts: Vec<usize> = (0..p - 1).map(|_| rng.gen_range(0..=n)).collect();
    cuts.sort_unstable();
    let mut offsets = vec![0];
    offsets.extend(cuts);
    offsets.push(n);
    RowPartition::from_offsets(offsets).unwrap()
}

pub fn random_topology(rng: &mut impl Rng) -> Topology {
    let ppn = rng.gen_range(1..=4);
    let p = rng.gen_range(1..=12);
    Topology::new(p, ppn).unwrap()
}

/// Random pattern where rank `r` owns indices `r * 1000 ..`.
pub fn random_pattern(rng: &mut impl Rng, topo: &Topology, density: f64) -> CommPattern {
    let p = topo.num_procs();
    let mut recvs = vec![Vec::new(); p];
    for (dst, list) in recvs.iter_mut().enumerate() {
        for src in (0..p).filter(|&s| s != dst) {
            if rng.gen_bool(density) {
                let k = rng.gen_range(1..=5);
                let idx = (0..k).map(|_| src * 1000 + rng.gen_range(0..8)).collect();
                list.push((src, idx));
            }
        }
    }
    CommPattern::from_receives(topo, recvs)
}

pub fn pattern(topo: &Topology, triples: &[(usize, usize, usize)]) -> CommPattern {
    let mut recvs = vec![Vec::new(); topo.num_procs()];
    for &(src, dst, i) in triples {
        recvs[dst].push((src, vec![i]));
    }
    CommPattern::from_receives(topo, recvs)
}

pub fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn dense_transpose(a: &[Vec<f64>], cols: usize) -> Vec<Vec<f64>> {
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn dense_mv(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(a, x)| a * x).sum())
        .collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}

/// Node `n = 0` holds senders on local ranks `0..k`; all send index `i` (their
/// own row) to rank `q` on node 1.
pub fn converging_senders(ppn: usize, k: usize) -> (Topology, CommPattern) {
    let topo = Topology::new(2 * ppn, ppn).unwrap();
    let q = ppn;
    let triples: Vec<_> = (0..k).map(|r| (r, q, r)).collect();
    (topo, pattern(&topo, &triples))
}

/// Rank `sender` on node 0 sends the same index to every rank of node 1.
pub fn fanout(ppn: usize, sender: usize) -> (Topology, CommPattern) {
    let topo = Topology::new(2 * ppn, ppn).unwrap();
    let triples: Vec<_> = (ppn..2 * ppn).map(|d| (sender, d, sender)).collect();
    (topo, pattern(&topo, &triples))
}
