mod common;

use common::{dense_mul, dense_transpose, max_abs_diff, random_partition, random_sparse, random_square, random_topology, rng};
use nap_amg::dist;
use nap_amg::partition::distribute_rect;
use nap_amg::{comm_pattern, distribute, Exchange, PartitionedVector, Strategy};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spmv_equals_serial_bitwise(seed in any::<u64>(), n in 1usize..80) {
        let mut g = rng(seed);
        let topo = random_topology(&mut g);
        let a = random_square(&mut g, n);
        let part = random_partition(&mut g, n, topo.num_procs());
        let m = distribute(&a, &part).unwrap();
        let ex = Exchange::new(comm_pattern(&m, &topo).unwrap(), &topo);
        let x: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
        let xv = PartitionedVector::from_global(&x, &part).unwrap();
        let serial = a.spmv(&x).unwrap();
        for s in Strategy::ALL {
            let (y, _) = dist::spmv(&m, &xv, ex.schedule(s)).unwrap();
            prop_assert_eq!(y.to_global(), serial.clone(), "{}", s);
        }
    }

    #[test]
    fn transpose_spmv_matches_serial(seed in any::<u64>(), n in 1usize..60, nc in 1usize..30) {
        let mut g = rng(seed);
        let topo = random_topology(&mut g);
        let p = random_sparse(&mut g, n, nc, 0.15);
        let rows = random_partition(&mut g, n, topo.num_procs());
        let cols = random_partition(&mut g, nc, topo.num_procs());
        let m = distribute_rect(&p, &rows, &cols).unwrap();
        let ex = Exchange::new(comm_pattern(&m, &topo).unwrap(), &topo).reversed(&topo);
        let r: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
        let rv = PartitionedVector::from_global(&r, &rows).unwrap();
        let serial = p.transpose().spmv(&r).unwrap();

        let (reference, _) = dist::spmv_transpose(&m, &rv, ex.schedule(Strategy::Standard)).unwrap();
        for (a, b) in reference.to_global().iter().zip(&serial) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        for s in [Strategy::Nap2, Strategy::Nap3] {
            let (y, _) = dist::spmv_transpose(&m, &rv, ex.schedule(s)).unwrap();
            prop_assert_eq!(y.to_global(), reference.to_global());
        }
    }

    #[test]
    fn spgemm_equals_serial_bitwise(seed in any::<u64>(), n in 1usize..50, nc in 1usize..20) {
        let mut g = rng(seed);
        let topo = random_topology(&mut g);
        let a = random_square(&mut g, n);
        let b = random_sparse(&mut g, n, nc, 0.2);
        let part = random_partition(&mut g, n, topo.num_procs());
        let cols = random_partition(&mut g, nc, topo.num_procs());
        let am = distribute(&a, &part).unwrap();
        let bm = distribute_rect(&b, &part, &cols).unwrap();
        let ex = Exchange::new(comm_pattern(&am, &topo).unwrap(), &topo);
        let serial = a.spgemm(&b).unwrap();
        for s in Strategy::ALL {
            let (c, _) = dist::spgemm(&am, &bm, ex.schedule(s)).unwrap();
            prop_assert_eq!(c.gather(), serial.clone(), "{}", s);
            prop_assert_eq!(c.col_partition(), &cols);
        }
    }

    #[test]
    fn transpose_product_matches_dense(seed in any::<u64>(), n in 1usize..40, nc in 1usize..15) {
        let mut g = rng(seed);
        let topo = random_topology(&mut g);
        let p = random_sparse(&mut g, n, nc, 0.2);
        let b = random_sparse(&mut g, n, nc, 0.2);
        let rows = random_partition(&mut g, n, topo.num_procs());
        let cols = random_partition(&mut g, nc, topo.num_procs());
        let pm = distribute_rect(&p, &rows, &cols).unwrap();
        let bm = distribute_rect(&b, &rows, &cols).unwrap();
        let ex = Exchange::new(comm_pattern(&pm, &topo).unwrap(), &topo).reversed(&topo);

        let oracle = dense_mul(&dense_transpose(&p.to_dense(), nc), &b.to_dense());
        let (reference, _) = dist::transpose_spgemm(&pm, &bm, ex.schedule(Strategy::Standard)).unwrap();
        prop_assert!(max_abs_diff(&reference.gather().to_dense(), &oracle) <= 1e-12);
        for s in [Strategy::Nap2, Strategy::Nap3] {
            let (c, _) = dist::transpose_spgemm(&pm, &bm, ex.schedule(s)).unwrap();
            prop_assert_eq!(c.gather(), reference.gather());
        }
    }
}

#[test]
fn mismatched_partitions_are_rejected() {
    let mut g = rng(3);
    let topo = nap_amg::Topology::new(3, 1).unwrap();
    let a = random_square(&mut g, 12);
    let m = distribute(&a, &nap_amg::RowPartition::balanced(12, 3)).unwrap();
    let ex = Exchange::new(comm_pattern(&m, &topo).unwrap(), &topo);
    let other = nap_amg::RowPartition::from_counts(&[2, 2, 8]);
    let x = PartitionedVector::zeros(&other);
    assert!(dist::spmv(&m, &x, ex.schedule(Strategy::Standard)).is_err());
}
