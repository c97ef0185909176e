//! Shared helpers for the acceptance suite: naive dense linear algebra
//! oracles (independent of the library's LAPACK path) and basic statistics.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use celf::geometry::{Link, PixelGrid, Point2D};
use rand::Rng;

/// Gauss-Jordan inverse with partial pivoting; the explicit-inverse oracle.
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
            .max_by(|&r1, &r2| aug[r1][col].abs().partial_cmp(&aug[r2][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p != 0.0, "singular matrix in oracle");
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
    let (rows, cols) = (a.len(), a[0].len());
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

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    num / (da.sqrt() * db.sqrt())
}

/// Random links with both endpoints inside the grid's box.
pub fn random_links_in_grid<R: Rng>(rng: &mut R, grid: &PixelGrid, n: usize) -> Vec<Link> {
    let width = grid.n_cols() as f64 * grid.pixel_width();
    let height = grid.n_rows() as f64 * grid.pixel_width();
    let o = grid.origin();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let tx = Point2D::new(o.x + rng.random::<f64>() * width, o.y + rng.random::<f64>() * height);
        let rx = Point2D::new(o.x + rng.random::<f64>() * width, o.y + rng.random::<f64>() * height);
        if tx.distance(rx) > 0.05 * grid.pixel_width() {
            out.push(Link::new(format!("g{}", out.len()), tx, rx, -50.0).unwrap());
        }
    }
    out
}

/// Dense weight matrix of a link set, built entry by entry from the
/// ellipse rule (the brute-force oracle).
pub fn dense_weights_oracle(links: &[Link], grid: &PixelGrid, lambda: f64) -> Vec<Vec<f64>> {
    links
        .iter()
        .map(|link| {
            let d = link.distance();
            let w = 1.0 / d.sqrt();
            (0..grid.len())
                .map(|m| {
                    let c = grid.center(m);
                    if c.distance(link.tx()) + c.distance(link.rx()) < d + lambda {
                        w
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}
