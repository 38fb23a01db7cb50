//! Sparse matrix operations against dense reference arithmetic.

use faer::Mat;
use igagauge::sparse::CsrMatrix;
use proptest::prelude::*;

fn triplets(r: usize, c: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..r, 0..c, -2.0f64..2.0), 0..40)
}

/// Dense sum of the triplets (duplicates added).
fn dense(r: usize, c: usize, t: &[(usize, usize, f64)]) -> Mat<f64> {
    let mut m = Mat::zeros(r, c);
    for &(i, j, v) in t {
        m[(i, j)] += v;
    }
    m
}

fn close(a: &Mat<f64>, b: &Mat<f64>) -> bool {
    a.nrows() == b.nrows() && a.ncols() == b.ncols() && (a - b).norm_max() < 1e-12
}

proptest! {
    #[test]
    fn triplets_sum_duplicates(t in triplets(5, 7)) {
        let a = CsrMatrix::from_triplets(5, 7, t.clone());
        prop_assert!(close(&a.to_dense(), &dense(5, 7, &t)));
        for r in 0..5 {
            let (cols, _) = a.row(r);
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn products_match_dense(ta in triplets(4, 6), tb in triplets(6, 3), x in prop::collection::vec(-1.0f64..1.0, 6)) {
        let a = CsrMatrix::from_triplets(4, 6, ta.clone());
        let b = CsrMatrix::from_triplets(6, 3, tb.clone());
        let (da, db) = (dense(4, 6, &ta), dense(6, 3, &tb));
        prop_assert!(close(&a.matmul(&b).to_dense(), &(&da * &db)));
        prop_assert!(close(&a.transpose().to_dense(), &da.transpose().to_owned()));
        prop_assert!(close(&a.mul_dense(&db), &(&da * &db)));
        let xv = Mat::from_fn(6, 1, |i, _| x[i]);
        let y = a.mul_vec(&x);
        let want = &da * &xv;
        prop_assert!((0..4).all(|i| (y[i] - want[(i, 0)]).abs() < 1e-12));
        let z = a.tr_mul_vec(&y);
        let want = da.transpose() * &Mat::from_fn(4, 1, |i, _| y[i]);
        prop_assert!((0..6).all(|i| (z[i] - want[(i, 0)]).abs() < 1e-12));
    }

    #[test]
    fn select_and_add_match_dense(ta in triplets(5, 5), tb in triplets(5, 5), s in -3.0f64..3.0,
                                  rows in prop::collection::vec(0usize..5, 1..5),
                                  cols in prop::collection::btree_set(0usize..5, 1..5)
                                      .prop_map(|s| s.into_iter().rev().collect::<Vec<_>>())) {
        let a = CsrMatrix::from_triplets(5, 5, ta.clone());
        let b = CsrMatrix::from_triplets(5, 5, tb.clone());
        let (da, db) = (dense(5, 5, &ta), dense(5, 5, &tb));
        prop_assert!(close(&a.add_scaled(&b, s).to_dense(), &(&da + &db * faer::Scale(s))));
        let sub = a.select(&rows, &cols).to_dense();
        let want = Mat::from_fn(rows.len(), cols.len(), |i, j| da[(rows[i], cols[j])]);
        prop_assert!(close(&sub, &want));
    }

    #[test]
    fn element_blocks_scatter_like_triplets(
        elements in prop::collection::vec(prop::collection::btree_set(0usize..9, 1..4), 1..6)
    ) {
        let elements: Vec<Vec<usize>> = elements.into_iter().map(|s| s.into_iter().collect()).collect();
        let value = |e: usize, a: usize, b: usize| (e + 1) as f64 + 0.1 * a as f64 - 0.01 * b as f64;
        let mut m = CsrMatrix::block_pattern(9, &elements);
        let mut t = Vec::new();
        for (e, dofs) in elements.iter().enumerate() {
            m.add_block(dofs, |a, b| value(e, a, b));
            for (a, &r) in dofs.iter().enumerate() {
                for (b, &c) in dofs.iter().enumerate() {
                    t.push((r, c, value(e, a, b)));
                }
            }
        }
        prop_assert!(close(&m.to_dense(), &dense(9, 9, &t)));
    }
}

#[test]
fn block_layout_places_blocks() {
    let a = CsrMatrix::identity(2);
    let b = CsrMatrix::from_triplets(2, 1, [(0, 0, 3.0), (1, 0, 4.0)]);
    let m = CsrMatrix::block(
        &[2, 1],
        &[2, 1],
        &[(0, 0, &a), (0, 1, &b), (1, 0, &b.transpose())],
    );
    let d = m.to_dense();
    assert_eq!(
        (d[(0, 0)], d[(0, 2)], d[(2, 1)], d[(2, 2)]),
        (1.0, 3.0, 4.0, 0.0)
    );
    assert_eq!(CsrMatrix::vstack(&[&a, &b.transpose()]).nrows(), 3);
}
