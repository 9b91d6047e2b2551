mod common;

use common::{dense_mul, dense_mv, dense_transpose, max_abs_diff, random_sparse, rng};
use nap_amg::mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
use nap_amg::{generate_stencil, CsrMatrix, Stencil};
use proptest::prelude::*;

fn matrix(max_dim: usize) -> impl Strategy<Value = CsrMatrix> {
    (1..=max_dim, 1..=max_dim, any::<u64>(), 0.05f64..0.5).prop_map(|(r, c, seed, d)| {
        random_sparse(&mut rng(seed), r, c, d)
    })
}

fn square_triple(n: usize) -> impl Strategy<Value = (CsrMatrix, CsrMatrix, CsrMatrix)> {
    any::<u64>().prop_map(move |seed| {
        let mut g = rng(seed);
        (
            random_sparse(&mut g, n, n, 0.3),
            random_sparse(&mut g, n, n, 0.3),
            random_sparse(&mut g, n, n, 0.3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmv_matches_dense(a in matrix(100), seed in any::<u64>()) {
        let mut g = rng(seed);
        let x: Vec<f64> = (0..a.n_cols()).map(|_| rand::Rng::gen_range(&mut g, -1.0..1.0)).collect();
        let y = a.spmv(&x).unwrap();
        let oracle = dense_mv(&a.to_dense(), &x);
        for (p, q) in y.iter().zip(&oracle) {
            prop_assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }

    #[test]
    fn spgemm_matches_dense(a in matrix(30), seed in any::<u64>()) {
        let b = random_sparse(&mut rng(seed), a.n_cols(), 12, 0.3);
        let c = a.spgemm(&b).unwrap();
        prop_assert!(max_abs_diff(&c.to_dense(), &dense_mul(&a.to_dense(), &b.to_dense())) < 1e-12);
    }

    #[test]
    fn spgemm_is_associative((a, b, c) in square_triple(20)) {
        let left = a.spgemm(&b).unwrap().spgemm(&c).unwrap();
        let right = a.spgemm(&b.spgemm(&c).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&left.to_dense(), &right.to_dense()) <= 1e-10);
    }

    #[test]
    fn transpose_is_involution(a in matrix(40)) {
        let t = a.transpose();
        prop_assert_eq!(t.n_rows(), a.n_cols());
        prop_assert_eq!(t.to_dense(), dense_transpose(&a.to_dense(), a.n_cols()));
        prop_assert_eq!(t.transpose(), a);
    }

    #[test]
    fn identity_is_neutral(a in matrix(30)) {
        prop_assert_eq!(a.spgemm(&CsrMatrix::identity(a.n_cols())).unwrap(), a.clone());
        prop_assert_eq!(CsrMatrix::identity(a.n_rows()).spgemm(&a).unwrap(), a);
    }

    #[test]
    fn matrix_market_round_trip(a in matrix(25)) {
        let mut buf = Vec::new();
        format_matrix_market(&a, &mut buf).unwrap();
        let back = parse_matrix_market(buf.as_slice()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn laplacian_4x4_ones_matches_dense() {
    let a = generate_stencil(Stencil::Laplace2d, &[4, 4]).unwrap();
    let ones = vec![1.0; 16];
    assert_eq!(a.spmv(&ones).unwrap(), dense_mv(&a.to_dense(), &ones));
}

#[test]
fn random_10x10_product() {
    let mut g = rng(7);
    let a = random_sparse(&mut g, 10, 10, 0.3);
    let b = random_sparse(&mut g, 10, 10, 0.3);
    let c = a.spgemm(&b).unwrap();
    assert!(max_abs_diff(&c.to_dense(), &dense_mul(&a.to_dense(), &b.to_dense())) < 1e-14);
}

#[test]
fn stencils_are_exactly_symmetric() {
    let cases = [
        (Stencil::Laplace2d, vec![7, 5]),
        (Stencil::Laplace3d, vec![4, 3, 5]),
        (Stencil::rotated_default(), vec![9, 6]),
        (Stencil::RotatedAniso2d { eps: 0.3, theta: 1.1 }, vec![5, 5]),
    ];
    for (kind, dims) in cases {
        let a = generate_stencil(kind, &dims).unwrap();
        assert!(a.is_symmetric(), "{kind:?}");
        assert_eq!(a.transpose(), a);
    }
}

#[test]
fn matrix_market_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    let a = generate_stencil(Stencil::rotated_default(), &[6, 6]).unwrap();
    write_matrix_market(&a, &path).unwrap();
    assert_eq!(read_matrix_market(&path).unwrap(), a);
}

#[test]
fn matrix_market_missing_file() {
    assert!(read_matrix_market("/nonexistent/a.mtx").is_err());
}
