//! Planar site geometry: links, pixel grids, and the elliptical weight model.
//!
//! A measurement campaign is a set of [`Link`]s (transmitter/receiver pairs
//! with a received power). The site is discretized by a [`PixelGrid`] into M
//! square pixels, and each link is associated with a sparse row of weights
//! over those pixels: a pixel contributes to a link's shadowing loss when its
//! center lies inside the ellipse whose foci are the two link endpoints and
//! whose perimeter exceeds the link distance by the excess length. Every
//! contributing pixel of link `l` carries the same weight `1/sqrt(d_l)`.
//!
//! All coordinates are planar meters. Latitude/longitude inputs must be
//! projected before they reach this module.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// A point in the site plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// One transmitter/receiver pair with its measured received power in dBm.
///
/// Construction rejects coincident endpoints, so the link distance is
/// always positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    id: String,
    tx: Point2D,
    rx: Point2D,
    rss_dbm: f64,
}

impl Link {
    pub fn new(id: impl Into<String>, tx: Point2D, rx: Point2D, rss_dbm: f64) -> Result<Self> {
        let id = id.into();
        if !tx.is_finite() || !rx.is_finite() {
            return Err(Error::NonFinite {
                what: format!("link '{id}' endpoint coordinates"),
            });
        }
        if !rss_dbm.is_finite() {
            return Err(Error::NonFinite {
                what: format!("link '{id}' received power"),
            });
        }
        if tx == rx {
            return Err(Error::DegenerateLink { id });
        }
        Ok(Self {
            id,
            tx,
            rx,
            rss_dbm,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tx(&self) -> Point2D {
        self.tx
    }

    pub fn rx(&self) -> Point2D {
        self.rx
    }

    /// Measured received power in dBm.
    pub fn rss_dbm(&self) -> f64 {
        self.rss_dbm
    }

    /// Link distance in meters; positive by construction.
    pub fn distance(&self) -> f64 {
        self.tx.distance(self.rx)
    }
}

/// Row-major discretization of the site into square pixels.
///
/// Pixel `m` sits at `(row, col) = (m / n_cols, m % n_cols)` counting from
/// the lower-left corner; its center is
/// `origin + ((col + 0.5) * w, (row + 0.5) * w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelGrid {
    origin: Point2D,
    pixel_width: f64,
    n_cols: usize,
    n_rows: usize,
}

// Relative slack applied before the ceiling so spans that are exact
// multiples of the pixel width do not gain a spurious extra pixel.
const SPAN_SLACK: f64 = 1e-12;

impl PixelGrid {
    pub fn new(origin: Point2D, pixel_width: f64, n_cols: usize, n_rows: usize) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::NonFinite {
                what: "grid origin".into(),
            });
        }
        if !(pixel_width.is_finite() && pixel_width > 0.0) {
            return Err(Error::InvalidParameter {
                name: "pixel_width",
                value: pixel_width,
                requirement: "finite and > 0",
            });
        }
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::InvalidParameter {
                name: "grid size",
                value: (n_cols * n_rows) as f64,
                requirement: "n_cols and n_rows >= 1",
            });
        }
        Ok(Self {
            origin,
            pixel_width,
            n_cols,
            n_rows,
        })
    }

    /// Smallest grid anchored at `origin` covering a `width` x `height` box.
    pub fn covering(origin: Point2D, width: f64, height: f64, pixel_width: f64) -> Result<Self> {
        let n_cols = span_to_count(width, pixel_width)?;
        let n_rows = span_to_count(height, pixel_width)?;
        Self::new(origin, pixel_width, n_cols, n_rows)
    }

    /// Smallest grid covering the bounding box of all link endpoints,
    /// expanded by `margin` on every side.
    pub fn from_links(links: &[Link], pixel_width: f64, margin: f64) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::EmptyLinkSet);
        }
        if !(margin.is_finite() && margin >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "margin",
                value: margin,
                requirement: "finite and >= 0",
            });
        }
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for link in links {
            for p in [link.tx(), link.rx()] {
                min_x = min_x.min(p.x);
                min_y = min_y.min(p.y);
                max_x = max_x.max(p.x);
                max_y = max_y.max(p.y);
            }
        }
        let origin = Point2D::new(min_x - margin, min_y - margin);
        let n_cols = span_to_count(max_x + margin - origin.x, pixel_width)?;
        let n_rows = span_to_count(max_y + margin - origin.y, pixel_width)?;
        Self::new(origin, pixel_width, n_cols, n_rows)
    }

    pub fn origin(&self) -> Point2D {
        self.origin
    }

    pub fn pixel_width(&self) -> f64 {
        self.pixel_width
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Number of pixels M.
    pub fn len(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        false // n_cols, n_rows >= 1 by construction
    }

    /// Center of pixel `m` (row-major index).
    pub fn center(&self, m: usize) -> Point2D {
        debug_assert!(m < self.len());
        let col = m % self.n_cols;
        let row = m / self.n_cols;
        self.center_at(col, row)
    }

    fn center_at(&self, col: usize, row: usize) -> Point2D {
        Point2D::new(
            self.origin.x + (col as f64 + 0.5) * self.pixel_width,
            self.origin.y + (row as f64 + 0.5) * self.pixel_width,
        )
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.n_cols + col
    }
}

fn span_to_count(span: f64, pixel_width: f64) -> Result<usize> {
    if !(pixel_width.is_finite() && pixel_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "pixel_width",
            value: pixel_width,
            requirement: "finite and > 0",
        });
    }
    let ratio = (span / pixel_width) * (1.0 - SPAN_SLACK);
    if !ratio.is_finite() {
        return Err(Error::NonFinite {
            what: "grid extent".into(),
        });
    }
    Ok((ratio.ceil() as usize).max(1))
}

/// One sparse weight row: the shared per-link weight and the pixel indices
/// (sorted ascending) whose centers fall inside the link's ellipse.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    weight: f64,
    pixels: Vec<usize>,
}

impl WeightRow {
    #[cfg(test)]
    pub(crate) fn from_parts(weight: f64, pixels: Vec<usize>) -> Self {
        Self { weight, pixels }
    }

    /// The shared nonzero value `1/sqrt(d_l)` of this row.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Indices of pixels with nonzero weight, ascending.
    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    /// True when no pixel center fell inside the ellipse.
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Dot product with a dense field vector.
    pub fn dot(&self, field: &[f64]) -> f64 {
        let sum: f64 = self.pixels.iter().map(|&m| field[m]).sum();
        self.weight * sum
    }
}

/// Sparse L x M matrix of ellipse-model weights, one row per link.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    rows: Vec<WeightRow>,
    n_pixels: usize,
}

impl WeightMatrix {
    /// Weight row of a single link: pixel `m` gets `1/sqrt(d_l)` when
    /// `d1 + d2 < d_l + lambda` (strictly), where `d1`, `d2` are the
    /// distances from the pixel center to the two endpoints.
    pub fn link_weights(link: &Link, grid: &PixelGrid, lambda: f64) -> Result<WeightRow> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "excess_length",
                value: lambda,
                requirement: "finite and > 0",
            });
        }
        let tx = link.tx();
        let rx = link.rx();
        let d = link.distance();
        let threshold = d + lambda;
        let weight = 1.0 / d.sqrt();

        // Every qualifying center lies within the circumscribed disk of
        // radius (d + lambda) / 2 around the midpoint; scan only that box,
        // padded one pixel against rounding of the bound itself.
        let mid_x = 0.5 * (tx.x + rx.x);
        let mid_y = 0.5 * (tx.y + rx.y);
        let radius = 0.5 * threshold;
        let w = grid.pixel_width();
        let col_range = clamp_range(
            (mid_x - radius - grid.origin().x) / w,
            (mid_x + radius - grid.origin().x) / w,
            grid.n_cols(),
        );
        let row_range = clamp_range(
            (mid_y - radius - grid.origin().y) / w,
            (mid_y + radius - grid.origin().y) / w,
            grid.n_rows(),
        );

        let mut pixels = Vec::new();
        for row in row_range {
            for col in col_range.clone() {
                let m = grid.index(col, row);
                let c = grid.center(m);
                if c.distance(tx) + c.distance(rx) < threshold {
                    pixels.push(m);
                }
            }
        }
        pixels.sort_unstable();
        Ok(WeightRow { weight, pixels })
    }

    /// Build the full L x M weight matrix for `links` over `grid`.
    pub fn build(links: &[Link], grid: &PixelGrid, lambda: f64) -> Result<Self> {
        let rows = links
            .iter()
            .map(|link| Self::link_weights(link, grid, lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            n_pixels: grid.len(),
        })
    }

    pub(crate) fn from_rows(rows: Vec<WeightRow>, n_pixels: usize) -> Self {
        Self { rows, n_pixels }
    }

    pub fn n_links(&self) -> usize {
        self.rows.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn rows(&self) -> &[WeightRow] {
        &self.rows
    }

    pub fn row(&self, l: usize) -> &WeightRow {
        &self.rows[l]
    }

    /// Total number of stored nonzeros.
    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.pixels.len()).sum()
    }

    /// Number of links whose ellipse captured no pixel center.
    pub fn zero_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_empty()).count()
    }

    /// Fraction of nonzero entries, `nnz / (L * M)`.
    pub fn density(&self) -> f64 {
        if self.rows.is_empty() || self.n_pixels == 0 {
            return 0.0;
        }
        self.nonzeros() as f64 / (self.rows.len() as f64 * self.n_pixels as f64)
    }

    /// `W p` for a dense field vector.
    pub fn apply(&self, field: &[f64]) -> Vec<f64> {
        assert_eq!(field.len(), self.n_pixels);
        self.rows.iter().map(|r| r.dot(field)).collect()
    }

    /// `W^T z`.
    pub fn transpose_apply(&self, z: &[f64]) -> Array1<f64> {
        assert_eq!(z.len(), self.rows.len());
        let mut out = Array1::<f64>::zeros(self.n_pixels);
        for (row, &zl) in self.rows.iter().zip(z) {
            let s = row.weight * zl;
            for &m in &row.pixels {
                out[m] += s;
            }
        }
        out
    }

    /// Dense `W^T W` (M x M). Intended for the overdetermined solver path.
    pub fn normal_matrix(&self) -> Array2<f64> {
        let m = self.n_pixels;
        let mut a = Array2::<f64>::zeros((m, m));
        for row in &self.rows {
            let w2 = row.weight * row.weight;
            for &i in &row.pixels {
                let ai = a.row_mut(i);
                // Safety of plain indexing: all pixel indices < n_pixels.
                let ai = ai.into_slice().expect("row is contiguous");
                for &j in &row.pixels {
                    ai[j] += w2;
                }
            }
        }
        a
    }

    /// Dense `W C W^T` (L x L) for a symmetric dense `cov` (M x M).
    pub(crate) fn gram_with(&self, cov: &Array2<f64>) -> Array2<f64> {
        let l = self.rows.len();
        // V = W C, accumulated row by row from whole rows of C.
        let mut v = Array2::<f64>::zeros((l, self.n_pixels));
        for (i, row) in self.rows.iter().enumerate() {
            let mut vi = v.row_mut(i);
            for &m in &row.pixels {
                vi += &cov.row(m);
            }
            vi *= row.weight;
        }
        let mut g = Array2::<f64>::zeros((l, l));
        for i in 0..l {
            let vi = v.row(i);
            let vi = vi.as_slice().expect("row is contiguous");
            for j in i..l {
                let rj = &self.rows[j];
                let sum: f64 = rj.pixels.iter().map(|&m| vi[m]).sum();
                let val = rj.weight * sum;
                g[[i, j]] = val;
                g[[j, i]] = val;
            }
        }
        g
    }

    /// `C W^T y` (length M) for symmetric dense `cov`.
    pub(crate) fn cov_transpose_apply(&self, cov: &Array2<f64>, y: &[f64]) -> Array1<f64> {
        assert_eq!(y.len(), self.rows.len());
        let mut out = Array1::<f64>::zeros(self.n_pixels);
        for (row, &yl) in self.rows.iter().zip(y) {
            let s = row.weight * yl;
            if s == 0.0 {
                continue;
            }
            for &m in &row.pixels {
                out.scaled_add(s, &cov.row(m));
            }
        }
        out
    }
}

fn clamp_range(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let lo = (lo.floor() - 1.0).max(0.0) as usize;
    let hi = ((hi.ceil() + 1.0).max(0.0) as usize).min(n);
    lo.min(hi)..hi
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;

    fn link(tx: (f64, f64), rx: (f64, f64)) -> Link {
        Link::new(
            "t",
            Point2D::new(tx.0, tx.1),
            Point2D::new(rx.0, rx.1),
            -50.0,
        )
        .unwrap()
    }

    /// Brute-force evaluation of a full weight row over every pixel.
    fn dense_row(link: &Link, grid: &PixelGrid, lambda: f64) -> Vec<f64> {
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
    }

    #[test]
    fn link_distance_345() {
        assert_eq!(link((0.0, 0.0), (3.0, 4.0)).distance(), 5.0);
    }

    #[test]
    fn link_distance_axis_aligned() {
        assert_eq!(link((0.0, 0.0), (10.0, 0.0)).distance(), 10.0);
    }

    #[test]
    fn degenerate_link_rejected() {
        let p = Point2D::new(1.0, 1.0);
        assert!(matches!(
            Link::new("dup", p, p, -40.0),
            Err(Error::DegenerateLink { .. })
        ));
    }

    #[test]
    fn non_finite_link_rejected() {
        let a = Point2D::new(0.0, 0.0);
        let b = Point2D::new(f64::NAN, 1.0);
        assert!(Link::new("nan", a, b, -40.0).is_err());
        assert!(Link::new("inf-rss", a, Point2D::new(1.0, 0.0), f64::INFINITY).is_err());
    }

    #[test]
    fn grid_exact_tiling() {
        let links = vec![link((0.0, 0.0), (10.0, 10.0))];
        let g = PixelGrid::from_links(&links, 1.0, 0.0).unwrap();
        assert_eq!((g.n_cols(), g.n_rows()), (10, 10));
        assert_eq!(g.len(), 100);
    }

    #[test]
    fn grid_ceiling_rule() {
        let links = vec![link((0.0, 0.0), (10.0, 10.0))];
        let g = PixelGrid::from_links(&links, 3.0, 0.0).unwrap();
        assert_eq!((g.n_cols(), g.n_rows()), (4, 4));
    }

    #[test]
    fn grid_indoor_scale() {
        // span 17.5 x 15 at 0.35 m pixels: ceil(17.5/0.35)=50, ceil(15/0.35)=43
        let links = vec![link((0.0, 0.0), (17.5, 15.0))];
        let g = PixelGrid::from_links(&links, 0.35, 0.0).unwrap();
        assert_eq!((g.n_cols(), g.n_rows()), (50, 43));
    }

    #[test]
    fn grid_margin_expands_box() {
        let links = vec![link((0.0, 0.0), (10.0, 10.0))];
        let g = PixelGrid::from_links(&links, 1.0, 2.0).unwrap();
        assert_eq!(g.origin(), Point2D::new(-2.0, -2.0));
        assert_eq!((g.n_cols(), g.n_rows()), (14, 14));
    }

    #[test]
    fn grid_empty_links_error() {
        assert!(matches!(
            PixelGrid::from_links(&[], 1.0, 0.0),
            Err(Error::EmptyLinkSet)
        ));
    }

    #[test]
    fn grid_degenerate_span_gets_one_pixel() {
        // a purely vertical link has zero x-span
        let links = vec![link((2.0, 0.0), (2.0, 8.0))];
        let g = PixelGrid::from_links(&links, 1.0, 0.0).unwrap();
        assert_eq!(g.n_cols(), 1);
        assert_eq!(g.n_rows(), 8);
    }

    #[test]
    fn pixel_center_row_major() {
        let g = PixelGrid::new(Point2D::new(1.0, 2.0), 0.5, 3, 2).unwrap();
        assert_eq!(g.center(0), Point2D::new(1.25, 2.25));
        assert_eq!(g.center(2), Point2D::new(2.25, 2.25)); // col 2, row 0
        assert_eq!(g.center(3), Point2D::new(1.25, 2.75)); // col 0, row 1
    }

    #[test]
    fn midpoint_pixel_is_inside() {
        // pixel center exactly at the link midpoint: d1 + d2 = d < d + lambda
        let l = link((0.0, 0.0), (2.0, 0.0));
        let g = PixelGrid::new(Point2D::new(0.5, -0.5), 1.0, 1, 1).unwrap();
        assert_eq!(g.center(0), Point2D::new(1.0, 0.0));
        let row = WeightMatrix::link_weights(&l, &g, 0.5).unwrap();
        assert_eq!(row.pixels(), &[0]);
        assert_eq!(row.weight(), 1.0 / 2.0_f64.sqrt());
    }

    #[test]
    fn boundary_pixel_is_excluded() {
        // center at (0, 1): d1 + d2 = 1 + 1 = d + lambda exactly -> excluded
        let l = link((0.0, -0.8), (0.0, 0.8));
        let g = PixelGrid::new(Point2D::new(-0.5, 0.5), 1.0, 1, 1).unwrap();
        assert_eq!(g.center(0), Point2D::new(0.0, 1.0));
        let d = l.distance();
        let lambda = 2.0 - d; // makes the threshold exactly 2.0
        let c = g.center(0);
        assert_eq!(c.distance(l.tx()) + c.distance(l.rx()), d + lambda);
        let row = WeightMatrix::link_weights(&l, &g, lambda).unwrap();
        assert!(row.is_empty());
    }

    #[test]
    fn derived_ellipse_example() {
        // link (0,0)-(10,0), lambda 2, center (5,1): 2*sqrt(26) < 12
        let l = link((0.0, 0.0), (10.0, 0.0));
        let g = PixelGrid::new(Point2D::new(4.0, 0.0), 2.0, 1, 1).unwrap();
        assert_eq!(g.center(0), Point2D::new(5.0, 1.0));
        let row = WeightMatrix::link_weights(&l, &g, 2.0).unwrap();
        assert_eq!(row.pixels(), &[0]);
        assert_eq!(row.weight(), 0.31622776601683794); // 1/sqrt(10)
    }

    #[test]
    fn lambda_zero_rejected() {
        let l = link((0.0, 0.0), (10.0, 0.0));
        let g = PixelGrid::new(Point2D::new(0.0, 0.0), 1.0, 4, 4).unwrap();
        assert!(WeightMatrix::link_weights(&l, &g, 0.0).is_err());
    }

    #[test]
    fn sparse_matches_dense_oracle() {
        // deterministic pseudo-random instance, L=20 over an 8x8 grid
        let g = PixelGrid::new(Point2D::new(0.0, 0.0), 1.0, 8, 8).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let links: Vec<Link> = (0..20)
            .map(|i| {
                Link::new(
                    format!("l{i}"),
                    Point2D::new(next() * 8.0, next() * 8.0),
                    Point2D::new(next() * 8.0, next() * 8.0),
                    -50.0,
                )
                .unwrap()
            })
            .collect();
        let lambda = 1.3;
        let w = WeightMatrix::build(&links, &g, lambda).unwrap();
        for (l, row) in w.rows().iter().enumerate() {
            let dense = dense_row(&links[l], &g, lambda);
            for m in 0..g.len() {
                let sparse_val = if row.pixels().contains(&m) {
                    row.weight()
                } else {
                    0.0
                };
                assert_eq!(sparse_val, dense[m], "entry ({l},{m})");
            }
        }
    }

    #[test]
    fn all_zero_row_is_valid_and_counted() {
        // a short link far outside the grid
        let l = link((100.0, 100.0), (100.5, 100.0));
        let g = PixelGrid::new(Point2D::new(0.0, 0.0), 1.0, 4, 4).unwrap();
        let w = WeightMatrix::build(std::slice::from_ref(&l), &g, 0.1).unwrap();
        assert_eq!(w.zero_rows(), 1);
        assert_eq!(w.nonzeros(), 0);
    }

    #[test]
    fn nnz_accounting() {
        let g = PixelGrid::new(Point2D::new(0.0, 0.0), 1.0, 10, 10).unwrap();
        let links = vec![link((0.0, 5.0), (10.0, 5.0)), link((5.0, 0.0), (5.0, 10.0))];
        let w = WeightMatrix::build(&links, &g, 1.0).unwrap();
        let per_row: usize = w.rows().iter().map(|r| r.pixels().len()).sum();
        assert_eq!(w.nonzeros(), per_row);
        assert!(w.density() > 0.0);
    }

    #[test]
    fn matvec_kernels_agree_with_naive() {
        let g = PixelGrid::new(Point2D::new(0.0, 0.0), 1.0, 6, 5).unwrap();
        let links = vec![
            link((0.0, 0.0), (6.0, 5.0)),
            link((0.0, 5.0), (6.0, 0.0)),
            link((1.0, 1.0), (5.0, 4.0)),
        ];
        let w = WeightMatrix::build(&links, &g, 2.0).unwrap();
        let m = g.len();
        // dense copy
        let mut dense = vec![vec![0.0; m]; links.len()];
        for (l, row) in w.rows().iter().enumerate() {
            for &p in row.pixels() {
                dense[l][p] = row.weight();
            }
        }
        let field: Vec<f64> = (0..m).map(|i| (i as f64 * 0.37).sin()).collect();
        let z: Vec<f64> = vec![1.5, -2.0, 0.25];

        let wp = w.apply(&field);
        for l in 0..links.len() {
            let naive: f64 = (0..m).map(|i| dense[l][i] * field[i]).sum();
            assert!((wp[l] - naive).abs() < 1e-12);
        }

        let wtz = w.transpose_apply(&z);
        for i in 0..m {
            let naive: f64 = (0..links.len()).map(|l| dense[l][i] * z[l]).sum();
            assert!((wtz[i] - naive).abs() < 1e-12);
        }

        let wtw = w.normal_matrix();
        for i in 0..m {
            for j in 0..m {
                let naive: f64 = (0..links.len()).map(|l| dense[l][i] * dense[l][j]).sum();
                assert!((wtw[[i, j]] - naive).abs() < 1e-12);
            }
        }
    }
}
