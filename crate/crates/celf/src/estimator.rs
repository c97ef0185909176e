//! Loss-field learning: regularized Bayesian linear regression with two
//! algebraically equivalent solver paths, plus shadowing prediction.
//!
//! Training solves for the per-pixel loss field `p` that explains the
//! observed fading losses `z` through the sparse weight matrix `W`:
//!
//! * overdetermined path (L >= M): factor `W^T W + alpha * C^{-1}` (M x M)
//!   and back-substitute — [`solve_map_cholesky`];
//! * underdetermined path (L < M): the minimum-norm form
//!   `C W^T (W C W^T + alpha I)^{-1} z`, which factors only an L x L
//!   system — [`solve_minimum_norm`].
//!
//! Both compute the same estimate (push-through identity); the split is
//! purely about which factorization is smaller. The regularizer `alpha`
//! must be positive: it keeps the system positive definite in the face of
//! rank-deficient weight matrices.

use std::time::Instant;

use ndarray::{Array1, Array2};
use ndarray_linalg::cholesky::{Cholesky, UPLO};
use ndarray_linalg::triangular::{Diag, SolveTriangular};

use crate::error::{Error, Result};
use crate::geometry::{Link, PixelGrid, WeightMatrix};
use crate::pathloss::LogDistanceModel;
use crate::prior::{CovarianceMatrix, FieldPrior, MemoryBudget};

/// Jitter fraction for the one retry after a failed system factorization.
const SYSTEM_JITTER_EPS: f64 = 1e-10;

/// The tunable knobs of the loss-field model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    /// Pixel width of the discretized field, meters.
    pub pixel_width: f64,
    /// Fraction of fading variance attributed to shadowing, in (0, 1].
    pub shadow_ratio: f64,
    /// Prior correlation length, meters.
    pub space_constant: f64,
    /// Ellipse excess length, meters.
    pub excess_length: f64,
    /// Regularization constant, > 0.
    pub alpha: f64,
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 5] = [
            (
                "pixel_width",
                self.pixel_width,
                self.pixel_width > 0.0 && self.pixel_width.is_finite(),
                "finite and > 0",
            ),
            (
                "shadow_ratio",
                self.shadow_ratio,
                self.shadow_ratio > 0.0 && self.shadow_ratio <= 1.0,
                "in (0, 1]",
            ),
            (
                "space_constant",
                self.space_constant,
                self.space_constant > 0.0 && self.space_constant.is_finite(),
                "finite and > 0",
            ),
            (
                "excess_length",
                self.excess_length,
                self.excess_length > 0.0 && self.excess_length.is_finite(),
                "finite and > 0",
            ),
            (
                "alpha",
                self.alpha,
                self.alpha > 0.0 && self.alpha.is_finite(),
                "finite and > 0",
            ),
        ];
        for (name, value, ok, requirement) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    requirement,
                });
            }
        }
        Ok(())
    }
}

/// Which solver produced the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    MapCholesky,
    MinimumNorm,
}

impl SolverPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverPath::MapCholesky => "map_cholesky",
            SolverPath::MinimumNorm => "minimum_norm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "map_cholesky" => Some(SolverPath::MapCholesky),
            "minimum_norm" => Some(SolverPath::MinimumNorm),
            _ => None,
        }
    }
}

/// Solver selection: `Auto` picks by shape (minimum-norm when L < M).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Auto,
    Map,
    Mne,
}

impl SolverChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(SolverChoice::Auto),
            "map" => Some(SolverChoice::Map),
            "mne" => Some(SolverChoice::Mne),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverChoice::Auto => "auto",
            SolverChoice::Map => "map",
            SolverChoice::Mne => "mne",
        }
    }
}

/// What the solver did and how well the linear system was satisfied.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub path: SolverPath,
    /// Residual of the factored system, `||A x - b||_2`.
    pub residual_norm: f64,
    /// `||b||_2`, for relative residual reporting.
    pub rhs_norm: f64,
    /// Jitter retry happened on the system matrix.
    pub jitter_applied: bool,
    /// Jitter retry happened on the prior covariance factorization.
    pub prior_jitter_applied: bool,
    pub factorization_seconds: f64,
    pub solve_seconds: f64,
    /// Wall-clock per training phase, in execution order.
    pub phases: Vec<(&'static str, f64)>,
}

impl SolveReport {
    pub fn relative_residual(&self) -> f64 {
        if self.rhs_norm == 0.0 {
            0.0
        } else {
            self.residual_norm / self.rhs_norm
        }
    }
}

/// Training bookkeeping carried by the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainDiagnostics {
    pub n_links: usize,
    pub n_pixels: usize,
    pub nonzeros: usize,
    pub zero_weight_links: usize,
    /// Uncentered mean square of the training fading losses, dB^2.
    pub sigma_z_sq: f64,
    /// Training mean squared error after field subtraction, dB^2.
    pub residual_variance: f64,
}

/// Knobs that are not hyperparameters: solver override, memory cap.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions {
    pub solver: SolverChoice,
    pub memory_budget: MemoryBudget,
}

/// A trained loss-field model: path-loss constants, hyperparameters, grid,
/// and the estimated field. Immutable; prediction is thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub struct CelfModel {
    pathloss: LogDistanceModel,
    hyper: Hyperparameters,
    grid: PixelGrid,
    field: Vec<f64>,
    /// Realized prior field variance scale (shadow_ratio * mean square z).
    sigma_x_sq: f64,
    solver_path: SolverPath,
    diagnostics: TrainDiagnostics,
}

impl CelfModel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        pathloss: LogDistanceModel,
        hyper: Hyperparameters,
        grid: PixelGrid,
        field: Vec<f64>,
        sigma_x_sq: f64,
        solver_path: SolverPath,
        diagnostics: TrainDiagnostics,
    ) -> Result<Self> {
        if field.len() != grid.len() {
            return Err(Error::InvalidParameter {
                name: "field length",
                value: field.len() as f64,
                requirement: "must equal grid pixel count",
            });
        }
        if field.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "loss field values".into(),
            });
        }
        Ok(Self {
            pathloss,
            hyper,
            grid,
            field,
            sigma_x_sq,
            solver_path,
            diagnostics,
        })
    }

    pub fn pathloss(&self) -> &LogDistanceModel {
        &self.pathloss
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    /// The estimated per-pixel loss field, dB, row-major over the grid.
    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn sigma_x_sq(&self) -> f64 {
        self.sigma_x_sq
    }

    /// Noise variance implied by the shadow-ratio split,
    /// `(1 - shadow_ratio) * sigma_z_sq`; this is the `sigma_n_sq` to feed
    /// [`posterior_covariance`] for this model's training data.
    pub fn noise_variance_estimate(&self) -> f64 {
        (1.0 - self.hyper.shadow_ratio) * self.diagnostics.sigma_z_sq
    }

    pub fn solver_path(&self) -> SolverPath {
        self.solver_path
    }

    pub fn diagnostics(&self) -> &TrainDiagnostics {
        &self.diagnostics
    }

    /// The field prior this model was trained with, when non-degenerate.
    pub fn prior(&self) -> Result<FieldPrior> {
        FieldPrior::new(self.sigma_x_sq, self.hyper.space_constant, self.grid)
    }
}

/// Per-link shadowing prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingPrediction {
    pub shadowing_db: f64,
    /// The link's ellipse contained no pixel center; the prediction fell
    /// back to the prior mean (zero).
    pub out_of_coverage: bool,
}

/// Per-link received-power prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPrediction {
    pub power_dbm: f64,
    pub shadowing_db: f64,
    pub out_of_coverage: bool,
}

/// Learn a loss field from training links.
///
/// Computes fading losses with `pathloss`, builds the weight matrix over
/// `grid`, derives the prior scale from the data
/// (`sigma_x_sq = shadow_ratio * mean(z^2)`), and solves for the field on
/// the path chosen by `options.solver` (automatic: minimum-norm when
/// L < M). Degenerate inputs (all-zero weights, or an exactly zero fading
/// vector) yield the prior mean — a zero field — rather than an error.
pub fn train(
    links: &[Link],
    hyper: &Hyperparameters,
    pathloss: &LogDistanceModel,
    grid: &PixelGrid,
    options: &TrainOptions,
) -> Result<(CelfModel, SolveReport)> {
    if links.is_empty() {
        return Err(Error::EmptyLinkSet);
    }
    hyper.validate()?;
    let rel = (grid.pixel_width() - hyper.pixel_width).abs()
        / grid.pixel_width().max(hyper.pixel_width);
    if rel > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "pixel_width",
            value: hyper.pixel_width,
            requirement: "must match the grid's pixel width",
        });
    }

    let mut phases: Vec<(&'static str, f64)> = Vec::new();
    let t = Instant::now();
    let weights = WeightMatrix::build(links, grid, hyper.excess_length)?;
    phases.push(("weight_build", t.elapsed().as_secs_f64()));

    let z = pathloss.fading_losses(links);
    let sigma_z_sq = mean_square(&z);
    let sigma_x_sq = hyper.shadow_ratio * sigma_z_sq;

    let l = links.len();
    let m = grid.len();
    let path = match options.solver {
        SolverChoice::Map => SolverPath::MapCholesky,
        SolverChoice::Mne => SolverPath::MinimumNorm,
        SolverChoice::Auto => {
            if l < m {
                SolverPath::MinimumNorm
            } else {
                SolverPath::MapCholesky
            }
        }
    };

    // Degenerate geometry or an all-zero fading vector: the regularized
    // estimate is exactly the prior mean; skip the factorization.
    if weights.nonzeros() == 0 || sigma_z_sq == 0.0 {
        let diagnostics = TrainDiagnostics {
            n_links: l,
            n_pixels: m,
            nonzeros: weights.nonzeros(),
            zero_weight_links: weights.zero_rows(),
            sigma_z_sq,
            residual_variance: sigma_z_sq,
        };
        let model = CelfModel::from_parts(
            *pathloss,
            *hyper,
            *grid,
            vec![0.0; m],
            sigma_x_sq,
            path,
            diagnostics,
        )?;
        let report = SolveReport {
            path,
            residual_norm: 0.0,
            rhs_norm: 0.0,
            jitter_applied: false,
            prior_jitter_applied: false,
            factorization_seconds: 0.0,
            solve_seconds: 0.0,
            phases,
        };
        return Ok((model, report));
    }

    let t = Instant::now();
    let prior = FieldPrior::new(sigma_x_sq, hyper.space_constant, *grid)?;
    let cov = CovarianceMatrix::build(&prior, options.memory_budget)?;
    phases.push(("covariance", t.elapsed().as_secs_f64()));

    let solution = match path {
        SolverPath::MapCholesky => solve_map_cholesky(&weights, &z, &cov, hyper.alpha)?,
        SolverPath::MinimumNorm => solve_minimum_norm(&weights, &z, &cov, hyper.alpha)?,
    };
    phases.push(("factorization", solution.factorization_seconds));
    phases.push(("solve", solution.solve_seconds));

    let field = solution.field.to_vec();
    let fitted = weights.apply(&field);
    let residual_variance =
        z.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / l as f64;

    let diagnostics = TrainDiagnostics {
        n_links: l,
        n_pixels: m,
        nonzeros: weights.nonzeros(),
        zero_weight_links: weights.zero_rows(),
        sigma_z_sq,
        residual_variance,
    };
    let model = CelfModel::from_parts(
        *pathloss,
        *hyper,
        *grid,
        field,
        sigma_x_sq,
        path,
        diagnostics,
    )?;
    if !solution.residual_norm.is_finite() {
        return Err(Error::Factorization {
            context: "solver residual",
            detail: format!("non-finite residual norm {}", solution.residual_norm),
        });
    }
    let report = SolveReport {
        path,
        residual_norm: solution.residual_norm,
        rhs_norm: solution.rhs_norm,
        jitter_applied: solution.jitter_applied,
        prior_jitter_applied: cov.jitter_applied(),
        factorization_seconds: solution.factorization_seconds,
        solve_seconds: solution.solve_seconds,
        phases,
    };
    Ok((model, report))
}

/// Raw output of one solver run: the field plus factorization bookkeeping.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: Array1<f64>,
    pub residual_norm: f64,
    pub rhs_norm: f64,
    pub jitter_applied: bool,
    pub factorization_seconds: f64,
    pub solve_seconds: f64,
}

/// Factor a symmetric positive definite system, retrying once with a small
/// diagonal jitter if the factorization reports non-positive-definiteness.
fn cholesky_with_retry(
    mut a: Array2<f64>,
    context: &'static str,
) -> Result<(Array2<f64>, bool)> {
    match a.cholesky(UPLO::Lower) {
        Ok(l) => Ok((l, false)),
        Err(first) => {
            let n = a.nrows();
            let mean_diag = a.diag().sum() / n as f64;
            let bump = SYSTEM_JITTER_EPS * mean_diag;
            for i in 0..n {
                a[[i, i]] += bump;
            }
            match a.cholesky(UPLO::Lower) {
                Ok(l) => Ok((l, true)),
                Err(second) => Err(Error::Factorization {
                    context,
                    detail: format!("{first}; after jitter retry: {second}"),
                }),
            }
        }
    }
}

fn chol_solve(lower: &Array2<f64>, b: &Array1<f64>, context: &'static str) -> Result<Array1<f64>> {
    let y = lower
        .solve_triangular(UPLO::Lower, Diag::NonUnit, b)
        .map_err(|e| Error::Factorization {
            context,
            detail: e.to_string(),
        })?;
    lower
        .t()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &y)
        .map_err(|e| Error::Factorization {
            context,
            detail: e.to_string(),
        })
}

fn l2(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mean_square(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

/// Overdetermined path: factor `A = W^T W + alpha C^{-1}` (M x M) and
/// back-substitute `A p = W^T z`. The inverse of `A` is never formed.
pub fn solve_map_cholesky(
    weights: &WeightMatrix,
    z: &[f64],
    cov: &CovarianceMatrix,
    alpha: f64,
) -> Result<Solution> {
    check_alpha(alpha)?;
    let mut a = weights.normal_matrix();
    a.scaled_add(alpha, &cov.inverse()?);
    let b = weights.transpose_apply(z);

    let t = Instant::now();
    let (lower, jitter_applied) = cholesky_with_retry(a.clone(), "map solver")?;
    let factorization_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let field = chol_solve(&lower, &b, "map solver")?;
    let solve_seconds = t.elapsed().as_secs_f64();

    let residual_norm = l2(&(a.dot(&field) - &b));
    Ok(Solution {
        field,
        residual_norm,
        rhs_norm: l2(&b),
        jitter_applied,
        factorization_seconds,
        solve_seconds,
    })
}

/// Underdetermined path: `p = C W^T (W C W^T + alpha I)^{-1} z`, factoring
/// only the L x L system.
pub fn solve_minimum_norm(
    weights: &WeightMatrix,
    z: &[f64],
    cov: &CovarianceMatrix,
    alpha: f64,
) -> Result<Solution> {
    check_alpha(alpha)?;
    let mut g = weights.gram_with(cov.matrix());
    for i in 0..g.nrows() {
        g[[i, i]] += alpha;
    }
    let zv = Array1::from(z.to_vec());

    let t = Instant::now();
    let (lower, jitter_applied) = cholesky_with_retry(g.clone(), "minimum-norm solver")?;
    let factorization_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let y = chol_solve(&lower, &zv, "minimum-norm solver")?;
    let field = weights.cov_transpose_apply(cov.matrix(), y.as_slice().expect("contiguous"));
    let solve_seconds = t.elapsed().as_secs_f64();

    let residual_norm = l2(&(g.dot(&y) - &zv));
    Ok(Solution {
        field,
        residual_norm,
        rhs_norm: l2(&zv),
        jitter_applied,
        factorization_seconds,
        solve_seconds,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "finite and > 0",
        });
    }
    Ok(())
}

/// Posterior covariance `(sigma_n^{-2} W^T W + C^{-1})^{-1}`, an optional
/// per-pixel uncertainty diagnostic. Its diagonal is the marginal posterior
/// variance of each pixel.
pub fn posterior_covariance(
    weights: &WeightMatrix,
    cov: &CovarianceMatrix,
    sigma_n_sq: f64,
    budget: MemoryBudget,
) -> Result<Array2<f64>> {
    if !(sigma_n_sq.is_finite() && sigma_n_sq > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_n_sq",
            value: sigma_n_sq,
            requirement: "finite and > 0",
        });
    }
    let m = cov.len() as u64;
    let required = 3 * m * m * 8;
    if required > budget.bytes {
        return Err(Error::MemoryBudget {
            required_bytes: required,
            budget_bytes: budget.bytes,
        });
    }
    let mut b = weights.normal_matrix();
    b *= 1.0 / sigma_n_sq;
    b += &cov.inverse()?;
    let (lower, _) = cholesky_with_retry(b, "posterior covariance")?;
    let eye = Array2::<f64>::eye(cov.len());
    let y = lower
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &eye)
        .map_err(|e| Error::Factorization {
            context: "posterior covariance",
            detail: e.to_string(),
        })?;
    lower
        .t()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &y)
        .map_err(|e| Error::Factorization {
            context: "posterior covariance",
            detail: e.to_string(),
        })
}

/// Predict per-link shadowing `W p` with the model's grid and excess
/// length. Links whose ellipse captures no pixel center predict 0 and are
/// flagged out-of-coverage.
pub fn predict_shadowing(model: &CelfModel, links: &[Link]) -> Result<Vec<ShadowingPrediction>> {
    links
        .iter()
        .map(|link| {
            let row =
                WeightMatrix::link_weights(link, model.grid(), model.hyper().excess_length)?;
            Ok(ShadowingPrediction {
                shadowing_db: row.dot(model.field()),
                out_of_coverage: row.is_empty(),
            })
        })
        .collect()
}

/// Predict received power: the log-distance mean minus predicted shadowing.
pub fn predict_power(model: &CelfModel, links: &[Link]) -> Result<Vec<PowerPrediction>> {
    let shadowing = predict_shadowing(model, links)?;
    Ok(links
        .iter()
        .zip(shadowing)
        .map(|(link, s)| PowerPrediction {
            power_dbm: model.pathloss().mean_power(link.distance()) - s.shadowing_db,
            shadowing_db: s.shadowing_db,
            out_of_coverage: s.out_of_coverage,
        })
        .collect())
}
