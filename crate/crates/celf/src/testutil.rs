//! Shared helpers for unit tests: naive dense linear algebra (independent
//! of the LAPACK-backed production path) and deterministic random inputs.

#![allow(clippy::needless_range_loop)]

use rand::Rng;

use crate::geometry::{Link, Point2D};

/// Naive O(n^3) Gauss-Jordan inverse with partial pivoting.
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| {
                aug[r1][col]
                    .abs()
                    .partial_cmp(&aug[r2][col].abs())
                    .unwrap()
            })
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p != 0.0, "singular matrix in test oracle");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = aug[row][col];
                if f != 0.0 {
                    for j in 0..2 * n {
                        aug[row][j] -= f * aug[col][j];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if a.is_empty() {
        return Vec::new();
    }
    let rows = a.len();
    let cols = a[0].len();
    let mut out = vec![vec![0.0; rows]; cols];
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

pub fn matmat(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for p in 0..k {
            let aip = a[i][p];
            if aip != 0.0 {
                for j in 0..m {
                    out[i][j] += aip * b[p][j];
                }
            }
        }
    }
    out
}

pub fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Random links inside a square of side `extent`, all with distance > 0.1.
pub fn rand_links<R: Rng>(rng: &mut R, n: usize, extent: f64) -> Vec<Link> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let tx = Point2D::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent);
        let rx = Point2D::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent);
        if tx.distance(rx) > 0.1 {
            out.push(Link::new(format!("r{}", out.len()), tx, rx, -50.0).unwrap());
        }
    }
    out
}
