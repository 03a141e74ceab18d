#![allow(dead_code)]

use std::f64::consts::PI;

use conebary::group::{GroupRep, Word};
use conebary::{InvertibleMatrix, Mat, PosDefMatrix, SymMatrix};
use proptest::prelude::*;

/// `exp` of a symmetric matrix with entries in `[-s, s]`.
pub fn spd(n: usize, s: f64) -> impl Strategy<Value = PosDefMatrix> {
    prop::collection::vec(-s..s, n * n).prop_map(move |v| {
        let m = Mat::from_vec(n, n, v);
        SymMatrix::new((&m + m.transpose()) * 0.5).unwrap().exp()
    })
}

pub fn spd_vec(k: usize, n: usize, s: f64) -> impl Strategy<Value = Vec<PosDefMatrix>> {
    prop::collection::vec(spd(n, s), k)
}

/// `I + E` with entries of `E` in `[-w, w]`, rejected above condition `max_cond`.
pub fn conjugator(n: usize, w: f64, max_cond: f64) -> impl Strategy<Value = InvertibleMatrix> {
    prop::collection::vec(-w..w, n * n)
        .prop_map(move |v| Mat::identity(n, n) + Mat::from_vec(n, n, v))
        .prop_filter("conditioned", move |m| {
            let sv = m.singular_values();
            sv.min() > 0.0 && sv.max() / sv.min() <= max_cond
        })
        .prop_map(|m| InvertibleMatrix::new(m).unwrap())
}

pub fn rotation(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

/// The cyclic group of order `k` acting by a rotation conjugated by `s`.
pub fn cyclic_rep(k: usize, s: &InvertibleMatrix) -> GroupRep {
    let a = s.entries() * rotation(2.0 * PI / k as f64) * s.inverse();
    GroupRep::new(
        format!("C{k}"),
        vec![InvertibleMatrix::new(a).unwrap()],
        vec![Word::power(0, k as i64)],
    )
    .unwrap()
}

pub fn dist(x: &PosDefMatrix, y: &PosDefMatrix) -> f64 {
    conebary::thompson_dist(x, y).unwrap()
}
