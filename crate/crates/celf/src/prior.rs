//! Gaussian loss-field prior: exponential spatial covariance over pixel
//! centers, its Cholesky factorization, and seeded field sampling.
//!
//! The covariance between pixels `m` and `n` is
//! `(sigma_x_sq / delta) * exp(-d_mn / delta)` where `d_mn` is the distance
//! between their centers and `delta` is the space constant (the typical
//! obstruction size). Note the `sigma_x_sq / delta` prefactor: the per-pixel
//! variance scales inversely with the space constant. As `delta -> 0` the
//! off-diagonal decays to zero and the matrix approaches a scaled identity.

use ndarray::{Array1, Array2};
use ndarray_linalg::cholesky::{Cholesky, UPLO};
use ndarray_linalg::triangular::{Diag, SolveTriangular};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::PixelGrid;

/// Diagonal jitter applied (once) when the factorization of a
/// near-singular covariance fails, as a fraction of the diagonal value.
const JITTER_EPS: f64 = 1e-10;

/// Cap on dense covariance allocations (matrix plus factor).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl MemoryBudget {
    pub const fn from_mebibytes(mib: u64) -> Self {
        Self {
            bytes: mib * 1024 * 1024,
        }
    }
}

impl Default for MemoryBudget {
    /// 2 GiB: enough for grids up to roughly 11,000 pixels.
    fn default() -> Self {
        Self::from_mebibytes(2048)
    }
}

/// Loss-field prior parameters tied to a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPrior {
    sigma_x_sq: f64,
    delta: f64,
    grid: PixelGrid,
}

impl FieldPrior {
    pub fn new(sigma_x_sq: f64, delta: f64, grid: PixelGrid) -> Result<Self> {
        if !(sigma_x_sq.is_finite() && sigma_x_sq > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma_x_sq",
                value: sigma_x_sq,
                requirement: "finite and > 0",
            });
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "space_constant",
                value: delta,
                requirement: "finite and > 0",
            });
        }
        Ok(Self {
            sigma_x_sq,
            delta,
            grid,
        })
    }

    pub fn sigma_x_sq(&self) -> f64 {
        self.sigma_x_sq
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    /// Kernel value at center distance `d`.
    pub fn kernel(&self, d: f64) -> f64 {
        (self.sigma_x_sq / self.delta) * (-d / self.delta).exp()
    }
}

/// Dense M x M prior covariance with its lower Cholesky factor, computed
/// eagerly at construction. Immutable afterwards; reads are thread-safe.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    matrix: Array2<f64>,
    factor_lower: Array2<f64>,
    jitter_applied: bool,
}

impl CovarianceMatrix {
    /// Build the covariance of `prior` over its grid.
    ///
    /// Fails (reporting the requirement) if matrix plus factor would exceed
    /// `budget`; never truncates silently.
    pub fn build(prior: &FieldPrior, budget: MemoryBudget) -> Result<Self> {
        let m = prior.grid().len();
        let required = 2 * (m as u64) * (m as u64) * 8;
        if required > budget.bytes {
            return Err(Error::MemoryBudget {
                required_bytes: required,
                budget_bytes: budget.bytes,
            });
        }
        let centers: Vec<_> = (0..m).map(|i| prior.grid().center(i)).collect();
        let mut c = Array2::<f64>::zeros((m, m));
        for i in 0..m {
            for j in 0..=i {
                let v = prior.kernel(centers[i].distance(centers[j]));
                c[[i, j]] = v;
                c[[j, i]] = v;
            }
        }
        Self::from_dense_with_jitter(c, prior.kernel(0.0))
    }

    /// Wrap an existing symmetric positive definite matrix (validated by
    /// attempting the factorization).
    pub fn from_dense(matrix: Array2<f64>) -> Result<Self> {
        let diag_scale = matrix.diag().iter().cloned().fold(0.0, f64::max);
        Self::from_dense_with_jitter(matrix, diag_scale)
    }

    fn from_dense_with_jitter(matrix: Array2<f64>, diag_scale: f64) -> Result<Self> {
        match matrix.cholesky(UPLO::Lower) {
            Ok(factor_lower) => Ok(Self {
                matrix,
                factor_lower,
                jitter_applied: false,
            }),
            Err(first) => {
                // near-singular (tiny space constant); retry once with jitter
                let mut jittered = matrix;
                let bump = JITTER_EPS * diag_scale;
                for i in 0..jittered.nrows() {
                    jittered[[i, i]] += bump;
                }
                match jittered.cholesky(UPLO::Lower) {
                    Ok(factor_lower) => Ok(Self {
                        matrix: jittered,
                        factor_lower,
                        jitter_applied: true,
                    }),
                    Err(second) => Err(Error::Factorization {
                        context: "prior covariance",
                        detail: format!("{first}; after jitter retry: {second}"),
                    }),
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// True when the factorization needed the diagonal jitter retry.
    pub fn jitter_applied(&self) -> bool {
        self.jitter_applied
    }

    /// Solve `C x = v` with the cached factor (two triangular solves); the
    /// explicit inverse is never formed here.
    pub fn apply_inverse(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        let y = self
            .factor_lower
            .solve_triangular(UPLO::Lower, Diag::NonUnit, v)
            .map_err(|e| Error::Factorization {
                context: "covariance solve (forward)",
                detail: e.to_string(),
            })?;
        self.factor_lower
            .t()
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &y)
            .map_err(|e| Error::Factorization {
                context: "covariance solve (backward)",
                detail: e.to_string(),
            })
    }

    /// Dense `C^{-1}`, obtained by solving against the identity with the
    /// cached factor. Used to assemble the overdetermined solver's system.
    pub fn inverse(&self) -> Result<Array2<f64>> {
        let m = self.len();
        let eye = Array2::<f64>::eye(m);
        let y = self
            .factor_lower
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &eye)
            .map_err(|e| Error::Factorization {
                context: "covariance inverse (forward)",
                detail: e.to_string(),
            })?;
        self.factor_lower
            .t()
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &y)
            .map_err(|e| Error::Factorization {
                context: "covariance inverse (backward)",
                detail: e.to_string(),
            })
    }

    /// Draw one zero-mean field with this covariance: `p = L u` with `u`
    /// standard normal from a seeded generator. Deterministic per seed.
    pub fn sample_field(&self, seed: u64) -> Array1<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u = Array1::from_iter((0..self.len()).map(|_| StandardNormal.sample(&mut rng)));
        self.factor_lower.dot(&u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;

    fn grid(n_cols: usize, n_rows: usize, w: f64) -> PixelGrid {
        PixelGrid::new(Point2D::new(0.0, 0.0), w, n_cols, n_rows).unwrap()
    }

    /// Naive Gauss-Jordan inverse, independent of the LAPACK path.
    fn dense_inverse(a: &Array2<f64>) -> Array2<f64> {
        let n = a.nrows();
        let mut aug = Array2::<f64>::zeros((n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                aug[[i, j]] = a[[i, j]];
            }
            aug[[i, n + i]] = 1.0;
        }
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if aug[[r, col]].abs() > aug[[pivot, col]].abs() {
                    pivot = r;
                }
            }
            if pivot != col {
                for j in 0..2 * n {
                    let tmp = aug[[col, j]];
                    aug[[col, j]] = aug[[pivot, j]];
                    aug[[pivot, j]] = tmp;
                }
            }
            let p = aug[[col, col]];
            for j in 0..2 * n {
                aug[[col, j]] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[[r, col]];
                    for j in 0..2 * n {
                        aug[[r, j]] -= f * aug[[col, j]];
                    }
                }
            }
        }
        let mut inv = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                inv[[i, j]] = aug[[i, n + j]];
            }
        }
        inv
    }

    #[test]
    fn diagonal_is_scaled_variance() {
        let g = grid(3, 3, 1.0);
        let prior = FieldPrior::new(2.0, 4.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        for i in 0..g.len() {
            assert_eq!(cov.matrix()[[i, i]], 0.5); // sigma_x_sq / delta
        }
    }

    #[test]
    fn kernel_at_one_space_constant() {
        let g = grid(2, 1, 1.0);
        // two pixel centers exactly delta apart
        let prior = FieldPrior::new(2.0, 1.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let expected = 2.0 * (-1.0f64).exp();
        assert!((cov.matrix()[[0, 1]] - expected).abs() < 1e-15);
    }

    #[test]
    fn matches_elementwise_brute_force() {
        let g = grid(3, 3, 1.0);
        let prior = FieldPrior::new(2.0, 1.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let d = g.center(i).distance(g.center(j));
                let expected = 2.0 * (-d).exp();
                assert!((cov.matrix()[[i, j]] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_by_construction() {
        let g = grid(5, 4, 0.7);
        let prior = FieldPrior::new(1.3, 2.1, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert_eq!(cov.matrix()[[i, j]], cov.matrix()[[j, i]]);
            }
        }
    }

    #[test]
    fn memory_budget_enforced() {
        let g = grid(100, 100, 1.0); // 10^4 pixels -> 1.6 GB; budget 1 MiB
        let prior = FieldPrior::new(1.0, 1.0, g).unwrap();
        let err = CovarianceMatrix::build(&prior, MemoryBudget::from_mebibytes(1));
        assert!(matches!(err, Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn apply_inverse_round_trip() {
        let g = grid(4, 3, 1.0);
        let prior = FieldPrior::new(2.5, 1.5, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let mut e1 = Array1::<f64>::zeros(g.len());
        e1[0] = 1.0;
        let v = cov.matrix().dot(&e1);
        let back = cov.apply_inverse(&v).unwrap();
        for i in 0..g.len() {
            assert!((back[i] - e1[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_inverse_matches_dense_oracle() {
        let g = grid(10, 5, 0.8); // M = 50
        let prior = FieldPrior::new(3.0, 2.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let v = Array1::from_iter((0..50).map(|i| ((i * 37 % 17) as f64 - 8.0) / 3.0));
        let got = cov.apply_inverse(&v).unwrap();
        let oracle = dense_inverse(cov.matrix()).dot(&v);
        let num: f64 = (&got - &oracle).mapv(|x| x * x).sum();
        let den: f64 = oracle.mapv(|x| x * x).sum();
        assert!((num / den).sqrt() < 1e-10);
    }

    #[test]
    fn explicit_inverse_matches_dense_oracle() {
        let g = grid(5, 4, 1.0);
        let prior = FieldPrior::new(2.0, 1.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let inv = cov.inverse().unwrap();
        let oracle = dense_inverse(cov.matrix());
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert!((inv[[i, j]] - oracle[[i, j]]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tiny_space_constant_is_nearly_diagonal() {
        // delta far below the pixel pitch: off-diagonal decays to ~0
        let g = grid(3, 1, 1.0);
        let prior = FieldPrior::new(1.0, 0.05, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let diag = cov.matrix()[[0, 0]];
        assert!(cov.matrix()[[0, 1]] / diag < 1e-8);
    }

    #[test]
    fn sample_deterministic_per_seed() {
        let g = grid(3, 3, 1.0);
        let prior = FieldPrior::new(2.0, 1.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let a = cov.sample_field(7);
        let b = cov.sample_field(7);
        assert_eq!(a, b);
        let c = cov.sample_field(8);
        assert_ne!(a, c);
    }

    #[test]
    fn monte_carlo_covariance_and_mean() {
        let g = grid(3, 3, 1.0);
        let prior = FieldPrior::new(2.0, 1.0, g).unwrap();
        let cov = CovarianceMatrix::build(&prior, MemoryBudget::default()).unwrap();
        let m = g.len();
        let n = 10_000usize;
        let mut acc = Array2::<f64>::zeros((m, m));
        let mut mean = Array1::<f64>::zeros(m);
        for s in 0..n {
            let p = cov.sample_field(1_000 + s as u64);
            mean += &p;
            for i in 0..m {
                for j in 0..m {
                    acc[[i, j]] += p[i] * p[j];
                }
            }
        }
        acc /= n as f64;
        mean /= n as f64;
        let num: f64 = (&acc - cov.matrix()).mapv(|x| x * x).sum();
        let den: f64 = cov.matrix().mapv(|x| x * x).sum();
        assert!(
            (num / den).sqrt() < 0.05,
            "relative Frobenius error {}",
            (num / den).sqrt()
        );
        // per-pixel mean within 3 sigma / sqrt(N)
        let bound = 3.0 * (2.0f64).sqrt() / (n as f64).sqrt();
        for i in 0..m {
            assert!(mean[i].abs() < bound, "pixel {i} mean {}", mean[i]);
        }
    }

    #[test]
    fn eigenvalues_positive_on_varied_geometries() {
        // positive definiteness: the factorization itself must succeed
        for (cols, rows, w, delta, s2) in [
            (20, 20, 1.0, 0.5, 1.0),
            (10, 8, 0.35, 2.5, 4.0),
            (16, 5, 25.0, 35.0, 30.0),
            (7, 7, 0.1, 0.01, 0.2),
        ] {
            let g = grid(cols, rows, w);
            let prior = FieldPrior::new(s2, delta, g).unwrap();
            let cov = CovarianceMatrix::build(&prior, MemoryBudget::default());
            assert!(cov.is_ok(), "factorization failed for {cols}x{rows}");
        }
    }
}
