mod common;

use common::{dense_mv, dense_transpose, random_partition, random_sparse, random_square, random_topology, rng};
use nap_amg::amg::interp::tentative_prolongator;
use nap_amg::amg::split::Aggregation;
use nap_amg::dense::DenseLu;
use nap_amg::partition::distribute_rect;
use nap_amg::solve::{coarse_solve, interpolate, relax_jacobi, residual, restrict};
use nap_amg::{
    comm_pattern, distribute, generate_stencil, setup, solve, CsrMatrix, Error, Exchange,
    PartitionedVector, RowPartition, SetupConfig, SolveOptions, SolverKind, Stencil, Strategy,
    StrategyChoice, Topology,
};
use proptest::prelude::*;
use rand::Rng;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * y.abs().max(1.0))
}

#[test]
fn jacobi_on_identity_is_exact() {
    let topo = Topology::new(3, 2).unwrap();
    let part = RowPartition::balanced(7, 3);
    let a = distribute(&CsrMatrix::identity(7), &part).unwrap();
    let ex = Exchange::new(comm_pattern(&a, &topo).unwrap(), &topo);
    let b = PartitionedVector::from_global(&[1.0, -2.0, 3.0, 4.0, 0.5, 6.0, 7.0], &part).unwrap();
    let mut x = PartitionedVector::from_global(&[9.0; 7], &part).unwrap();
    relax_jacobi(&a, ex.schedule(Strategy::Standard), &mut x, &b, 1, 1.0).unwrap();
    assert_eq!(x, b);
}

#[test]
fn one_weighted_jacobi_sweep_from_zero() {
    let n = 6;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
            t.push((i - 1, i, -1.0));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
    let topo = Topology::new(3, 1).unwrap();
    let part = RowPartition::balanced(n, 3);
    let am = distribute(&a, &part).unwrap();
    let ex = Exchange::new(comm_pattern(&am, &topo).unwrap(), &topo);
    let b: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
    let bv = PartitionedVector::from_global(&b, &part).unwrap();
    let w = 2.0 / 3.0;
    for s in Strategy::ALL {
        let mut x = PartitionedVector::zeros(&part);
        relax_jacobi(&am, ex.schedule(s), &mut x, &bv, 1, w).unwrap();
        let want: Vec<f64> = b.iter().map(|b| w * b / 2.0).collect();
        assert_eq!(x.to_global(), want);
    }
}

#[test]
fn zero_diagonal_is_rejected() {
    let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 0.0]]);
    let topo = Topology::new(1, 1).unwrap();
    let part = RowPartition::balanced(2, 1);
    let am = distribute(&a, &part).unwrap();
    let ex = Exchange::new(comm_pattern(&am, &topo).unwrap(), &topo);
    let b = PartitionedVector::zeros(&part);
    let mut x = PartitionedVector::zeros(&part);
    let err = relax_jacobi(&am, ex.schedule(Strategy::Standard), &mut x, &b, 1, 1.0);
    assert!(matches!(err, Err(Error::ZeroDiagonal { row: 1 })));
}

#[test]
fn tentative_restrict_scales_sizes() {
    // Aggregates {0, 1, 2} and {3, 4}.
    let agg = Aggregation {
        aggregate: vec![0, 0, 0, 1, 1],
        roots: vec![0, 3],
    };
    let topo = Topology::new(2, 1).unwrap();
    let part = RowPartition::from_counts(&[3, 2]);
    let p = tentative_prolongator(&agg, &part).unwrap();
    let rev = Exchange::new(comm_pattern(&p, &topo).unwrap(), &topo).reversed(&topo);
    let ones = PartitionedVector::from_global(&[1.0; 5], &part).unwrap();
    let rc = restrict(&p, rev.schedule(Strategy::Standard), &ones).unwrap();
    assert!(close(&rc.to_global(), &[3.0 / 3f64.sqrt(), 2.0 / 2f64.sqrt()], 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_matches_dense(seed in any::<u64>(), n in 1usize..60) {
        let mut g = rng(seed);
        let topo = random_topology(&mut g);
        let a = random_square(&mut g, n);
        let part = random_partition(&mut g, n, topo.num_procs());
        let am = distribute(&a, &part).unwrap();
        let ex = Exchange::new(comm_pattern(&am, &topo).unwrap(), &topo);
        let x: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
        let xv = PartitionedVector::from_global(&x, &part).unwrap();
        let bv = PartitionedVector::from_global(&b, &part).unwrap();
        let ax = dense_mv(&a.to_dense(), &x);
        let want: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        for s in Strategy::ALL {
            let r = residual(&am, ex.schedule(s), &xv, &bv).unwrap();
            prop_assert!(close(&r.to_global(), &want, 1e-12));
            let zero = residual(&am, ex.schedule(s), &PartitionedVector::zeros(&part), &bv).unwrap();
            prop_assert_eq!(zero.to_global(), b.clone());
            let exact = PartitionedVector::from_global(&a.spmv(&x).unwrap(), &part).unwrap();
            let r0 = residual(&am, ex.schedule(s), &xv, &exact).unwrap();
            prop_assert!(r0.to_global().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn transfer_operators_match_dense(seed in any::<u64>(), n in 1usize..60, nc in 1usize..25) {
        let mut g = rng(seed);
        let topo = random_topology(&mut g);
        let p = random_sparse(&mut g, n, nc, 0.2);
        let rows = random_partition(&mut g, n, topo.num_procs());
        let cols = random_partition(&mut g, nc, topo.num_procs());
        let pm = distribute_rect(&p, &rows, &cols).unwrap();
        let fwd = Exchange::new(comm_pattern(&pm, &topo).unwrap(), &topo);
        let rev = fwd.reversed(&topo);
        let r: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
        let e: Vec<f64> = (0..nc).map(|_| g.gen_range(-1.0..1.0)).collect();
        let rv = PartitionedVector::from_global(&r, &rows).unwrap();
        let ev = PartitionedVector::from_global(&e, &cols).unwrap();
        let pd = p.to_dense();
        let want_r = dense_mv(&dense_transpose(&pd, nc), &r);
        let want_e = dense_mv(&pd, &e);
        for s in Strategy::ALL {
            prop_assert!(close(&restrict(&pm, rev.schedule(s), &rv).unwrap().to_global(), &want_r, 1e-12));
            prop_assert!(close(&interpolate(&pm, fwd.schedule(s), &ev).unwrap().to_global(), &want_e, 1e-12));
        }
    }
}

#[test]
fn identity_transfers() {
    let topo = Topology::new(4, 2).unwrap();
    let part = RowPartition::balanced(9, 4);
    let eye = distribute(&CsrMatrix::identity(9), &part).unwrap();
    let fwd = Exchange::new(comm_pattern(&eye, &topo).unwrap(), &topo);
    let v: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
    let vv = PartitionedVector::from_global(&v, &part).unwrap();
    assert_eq!(interpolate(&eye, fwd.schedule(Strategy::Nap3), &vv).unwrap(), vv);
    assert_eq!(restrict(&eye, fwd.reversed(&topo).schedule(Strategy::Nap2), &vv).unwrap(), vv);
}

#[test]
fn coarse_solve_examples() {
    let part = RowPartition::balanced(2, 2);
    let lu = DenseLu::factor(&CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]])).unwrap();
    let b = PartitionedVector::from_global(&[3.0, 3.0], &part).unwrap();
    assert!(close(&coarse_solve(&lu, &b).unwrap().to_global(), &[1.0, 1.0], 1e-15));

    let lu = DenseLu::factor(&CsrMatrix::identity(2)).unwrap();
    assert_eq!(coarse_solve(&lu, &b).unwrap(), b);
}

#[test]
fn singular_neumann_coarse_solve() {
    let n = 5;
    let mut t = Vec::new();
    for i in 0..n {
        let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
        t.push((i, i, deg));
        if i > 0 {
            t.push((i, i - 1, -1.0));
            t.push((i - 1, i, -1.0));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
    let lu = DenseLu::factor(&a).unwrap();
    assert_eq!(lu.rank(), n - 1);
    // Compatible right-hand side: sums to zero.
    let b = [1.0, -2.0, 0.5, 0.0, 0.5];
    let x = lu.solve(&b).unwrap();
    let r: Vec<f64> = a.spmv(&x).unwrap().iter().zip(&b).map(|(ax, b)| ax - b).collect();
    assert!(r.iter().all(|v| v.abs() <= 1e-10), "{r:?}");
}

fn laplace_hierarchy(nx: usize, procs: usize, ppn: usize, strategy: StrategyChoice) -> (nap_amg::Hierarchy, PartitionedVector) {
    let a = generate_stencil(Stencil::Laplace2d, &[nx, nx]).unwrap();
    let topo = Topology::new(procs, ppn).unwrap();
    let part = RowPartition::balanced(a.n_rows(), procs);
    let config = SetupConfig {
        strategy,
        ..SetupConfig::default()
    };
    let h = setup(distribute(&a, &part).unwrap(), &topo, &config).unwrap();
    let b: Vec<f64> = (0..a.n_rows()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    (h, PartitionedVector::from_global(&b, &part).unwrap())
}

#[test]
fn single_level_solves_in_one_cycle() {
    let (h, b) = laplace_hierarchy(6, 3, 1, StrategyChoice::Auto);
    assert_eq!(h.num_levels(), 1);
    let res = solve(&h, &b, &SolveOptions::default()).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 1);
    assert_eq!(res.history[0], 1.0);
}

#[test]
fn histories_identical_across_strategies() {
    let opts = SolveOptions::default();
    let (h, b) = laplace_hierarchy(24, 8, 4, StrategyChoice::Auto);
    let reference = solve(&h, &b, &opts).unwrap();
    assert!(reference.converged);
    assert!(reference.history.windows(2).skip(1).all(|w| w[1] < w[0]));
    for s in Strategy::ALL {
        let (h, b) = laplace_hierarchy(24, 8, 4, StrategyChoice::Fixed(s));
        let res = solve(&h, &b, &opts).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&res.history), bits(&reference.history), "{s}");
        assert_eq!(res.x, reference.x);
    }
}

#[test]
fn zero_rhs_returns_immediately() {
    let (h, b) = laplace_hierarchy(10, 2, 1, StrategyChoice::Auto);
    let zero = PartitionedVector::zeros(b.partition());
    let res = solve(&h, &zero, &SolveOptions::default()).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 0);
    assert!(res.x.to_global().iter().all(|&v| v == 0.0));
}

#[test]
fn overweighted_jacobi_diverges() {
    let (h, b) = laplace_hierarchy(16, 4, 2, StrategyChoice::Auto);
    let opts = SolveOptions {
        jacobi_weight: 3.0,
        pre_sweeps: 3,
        post_sweeps: 3,
        ..SolveOptions::default()
    };
    assert!(matches!(solve(&h, &b, &opts), Err(Error::Diverged { .. })));
}

#[test]
fn options_are_validated() {
    let (h, b) = laplace_hierarchy(6, 1, 1, StrategyChoice::Auto);
    for opts in [
        SolveOptions { rtol: 0.0, ..SolveOptions::default() },
        SolveOptions { jacobi_weight: -1.0, ..SolveOptions::default() },
    ] {
        assert!(matches!(solve(&h, &b, &opts), Err(Error::Config { .. })));
    }
    let sa = SetupConfig::new(SolverKind::SmoothedAggregation);
    assert_eq!(sa.prolongation_sweeps, 1);
}
