//! Metrics, train/test splitting, k-fold hyperparameter search, baseline
//! comparison, and the grouped-variance lower-bound analysis.
//!
//! The headline metric is variance reduction: the percentage drop of the
//! fading-loss variance once predicted shadowing is subtracted,
//! `100 * (sigma_z^2 - sigma_err^2) / sigma_z^2`. Both variances are
//! uncentered mean squares, so a null model (zero field) scores exactly 0%.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use std::fmt::Write as _;

use crate::config::KeyValueFile;
use crate::dataset::{GroupTag, MeasurementRecord};
use crate::error::{Error, Result};
use crate::estimator::{
    predict_shadowing, train, CelfModel, Hyperparameters, SolverChoice, TrainOptions,
};
use crate::geometry::{Link, PixelGrid, Point2D};
use crate::pathloss::{HataParams, LogDistanceModel};
use crate::prior::MemoryBudget;

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_square(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

/// Evaluation summary for one model on one dataset.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Dataset size.
    pub n_links: usize,
    /// Uncentered mean square of the fading losses, dB^2.
    pub fading_variance: f64,
    /// Mean squared prediction error, dB^2.
    pub error_variance: f64,
    /// `100 * (fading - error) / fading`; 0 when there is no variance.
    pub variance_reduction_pct: f64,
    /// Per-link fading losses.
    pub fading: Vec<f64>,
    /// Per-link predicted shadowing.
    pub predicted: Vec<f64>,
    /// Per-link residuals, `fading - predicted`.
    pub residuals: Vec<f64>,
    /// Per-link out-of-coverage flags.
    pub flags: Vec<bool>,
    /// Number of flagged links.
    pub out_of_coverage: usize,
}

impl EvalReport {
    /// Assemble a report; the variance-reduction identity holds by
    /// construction.
    fn from_parts(fading: Vec<f64>, predicted: Vec<f64>, flags: Vec<bool>) -> Self {
        let residuals: Vec<f64> = fading
            .iter()
            .zip(&predicted)
            .map(|(z, p)| z - p)
            .collect();
        let fading_variance = mean_square(&fading);
        let error_variance = mean_square(&residuals);
        let variance_reduction_pct = if fading_variance == 0.0 {
            0.0
        } else {
            (fading_variance - error_variance) / fading_variance * 100.0
        };
        let out_of_coverage = flags.iter().filter(|f| **f).count();
        Self {
            n_links: fading.len(),
            fading_variance,
            error_variance,
            variance_reduction_pct,
            fading,
            predicted,
            residuals,
            flags,
            out_of_coverage,
        }
    }
}

/// Evaluate a trained model on a test set: fading losses come from the
/// model's own path-loss constants (fit on training data), predictions from
/// its field.
pub fn evaluate(model: &CelfModel, test: &[Link]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyLinkSet);
    }
    let fading = model.pathloss().fading_losses(test);
    let predictions = predict_shadowing(model, test)?;
    let predicted: Vec<f64> = predictions.iter().map(|p| p.shadowing_db).collect();
    let flags: Vec<bool> = predictions.iter().map(|p| p.out_of_coverage).collect();
    Ok(EvalReport::from_parts(fading, predicted, flags))
}

/// Evaluate the closed-form baseline. It predicts path loss directly, with
/// no site fit, so its error variance is the variance of the debiased
/// residuals (measured power plus predicted loss, mean removed); the
/// fading-variance denominator is shared with the model under comparison
/// via `pathloss`. Links outside the formula's nominal 1-20 km range are
/// flagged (counted in `out_of_coverage`).
pub fn evaluate_baseline_hata(
    params: &HataParams,
    pathloss: &LogDistanceModel,
    test: &[Link],
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyLinkSet);
    }
    let fading = pathloss.fading_losses(test);
    let mut raw = Vec::with_capacity(test.len());
    let mut flags = Vec::with_capacity(test.len());
    for link in test {
        let prediction = params.path_loss(link.distance() / 1000.0)?;
        // measured - predicted power, with the unknown transmit power and
        // gains folded into the constant removed below
        raw.push(link.rss_dbm() + prediction.loss_db);
        flags.push(prediction.outside_nominal_range);
    }
    let bias = mean(&raw);
    // residual convention matches fading - predicted
    let residuals: Vec<f64> = raw.iter().map(|e| -(e - bias)).collect();
    let predicted: Vec<f64> = fading
        .iter()
        .zip(&residuals)
        .map(|(z, r)| z - r)
        .collect();
    Ok(EvalReport::from_parts(fading, predicted, flags))
}

/// Index-level split: one independent Bernoulli(`ratio`) draw per item,
/// seeded. Returned index lists are disjoint, exhaustive, and ascending.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::EmptyLinkSet);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter {
            name: "ratio",
            value: ratio,
            requirement: "in (0, 1)",
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for i in 0..n {
        if rng.random::<f64>() < ratio {
            train.push(i);
        } else {
            test.push(i);
        }
    }
    Ok((train, test))
}

/// Split links into train/test by independent Bernoulli(`ratio`) draws per
/// link, seeded. The partition is disjoint, exhaustive, and reproducible.
pub fn split_train_test(links: &[Link], ratio: f64, seed: u64) -> Result<(Vec<Link>, Vec<Link>)> {
    let (train_idx, test_idx) = split_indices(links.len(), ratio, seed)?;
    let pick = |idx: Vec<usize>| idx.into_iter().map(|i| links[i].clone()).collect();
    Ok((pick(train_idx), pick(test_idx)))
}

/// Candidate lists for the hyperparameter search plus fold control.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchSpec {
    pub pixel_widths: Vec<f64>,
    pub shadow_ratios: Vec<f64>,
    pub space_constants: Vec<f64>,
    pub excess_lengths: Vec<f64>,
    pub alphas: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub max_combinations: usize,
}

impl GridSearchSpec {
    pub const DEFAULT_MAX_COMBINATIONS: usize = 4096;

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidGridSearch {
                message: format!("folds {} < 2", self.folds),
            });
        }
        for (name, list) in [
            ("pixel_width", &self.pixel_widths),
            ("shadow_ratio", &self.shadow_ratios),
            ("space_constant", &self.space_constants),
            ("excess_length", &self.excess_lengths),
            ("alpha", &self.alphas),
        ] {
            if list.is_empty() {
                return Err(Error::InvalidGridSearch {
                    message: format!("empty candidate list for {name}"),
                });
            }
        }
        let combos = self.combination_count();
        if combos > self.max_combinations {
            return Err(Error::GridTooLarge {
                combinations: combos,
                budget: self.max_combinations,
            });
        }
        Ok(())
    }

    pub fn combination_count(&self) -> usize {
        self.pixel_widths.len()
            * self.shadow_ratios.len()
            * self.space_constants.len()
            * self.excess_lengths.len()
            * self.alphas.len()
    }

    /// Candidate combinations in canonical nested order.
    pub fn combinations(&self) -> Vec<Hyperparameters> {
        let mut out = Vec::with_capacity(self.combination_count());
        for &pw in &self.pixel_widths {
            for &sr in &self.shadow_ratios {
                for &sc in &self.space_constants {
                    for &el in &self.excess_lengths {
                        for &a in &self.alphas {
                            out.push(Hyperparameters {
                                pixel_width: pw,
                                shadow_ratio: sr,
                                space_constant: sc,
                                excess_length: el,
                                alpha: a,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Parse from a key=value file: one list per hyperparameter plus
    /// `folds`, `seed`, `max_combinations`.
    pub fn from_key_values(kv: &KeyValueFile) -> Result<Self> {
        kv.reject_unknown(&[
            "pixel_width",
            "shadow_ratio",
            "space_constant",
            "excess_length",
            "alpha",
            "folds",
            "seed",
            "max_combinations",
        ])?;
        let list = |key: &'static str| -> Result<Vec<f64>> {
            kv.get_f64_list(key)?.ok_or(Error::Config {
                message: format!("missing required key '{key}'"),
            })
        };
        let spec = Self {
            pixel_widths: list("pixel_width")?,
            shadow_ratios: list("shadow_ratio")?,
            space_constants: list("space_constant")?,
            excess_lengths: list("excess_length")?,
            alphas: list("alpha")?,
            folds: kv.get_usize("folds")?.unwrap_or(5),
            seed: kv.get_u64("seed")?.unwrap_or(0),
            max_combinations: kv
                .get_usize("max_combinations")?
                .unwrap_or(Self::DEFAULT_MAX_COMBINATIONS),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Ambient training context for cross-validation runs.
#[derive(Debug, Clone, Copy)]
pub struct CvSettings {
    pub margin: f64,
    pub ref_distance: f64,
    pub solver: SolverChoice,
    pub memory_budget: MemoryBudget,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            margin: 0.0,
            ref_distance: 1.0,
            solver: SolverChoice::Auto,
            memory_budget: MemoryBudget::default(),
        }
    }
}

/// One fold evaluation of one candidate combination.
#[derive(Debug, Clone)]
pub struct CvRecord {
    pub hyper: Hyperparameters,
    pub fold: usize,
    pub reduction_pct: f64,
    pub mse: f64,
    pub fading_variance: f64,
}

/// Full cross-validation table plus per-combination means.
#[derive(Debug, Clone)]
pub struct CvTable {
    pub records: Vec<CvRecord>,
    pub means: Vec<(Hyperparameters, f64)>,
}

impl CvTable {
    /// CSV with one row per combination per fold plus `mean` aggregate
    /// rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "pixel_width,shadow_ratio,space_constant,excess_length,alpha,fold,reduction_pct,mse_db2,fading_variance_db2\n",
        );
        for r in &self.records {
            let h = &r.hyper;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                h.pixel_width,
                h.shadow_ratio,
                h.space_constant,
                h.excess_length,
                h.alpha,
                r.fold,
                r.reduction_pct,
                r.mse,
                r.fading_variance
            )
            .expect("write to String");
        }
        for (h, m) in &self.means {
            writeln!(
                out,
                "{},{},{},{},{},mean,{},,",
                h.pixel_width, h.shadow_ratio, h.space_constant, h.excess_length, h.alpha, m
            )
            .expect("write to String");
        }
        out
    }
}

/// Outcome of a grid search: the winning combination and the full table.
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub best: Hyperparameters,
    pub best_mean_reduction_pct: f64,
    pub table: CvTable,
}

/// Seeded k-fold cross-validation over the candidate grid.
///
/// Every fold retrains from scratch on the remaining folds — path-loss
/// fit, grid construction, prior, and solve all see training folds only —
/// and is scored by variance reduction on the held-out fold. The winner
/// maximizes mean reduction; ties break toward larger `alpha`, then larger
/// `pixel_width` (most regularized, cheapest).
pub fn cross_validate(
    links: &[Link],
    spec: &GridSearchSpec,
    settings: &CvSettings,
) -> Result<CvOutcome> {
    spec.validate()?;
    if links.is_empty() {
        return Err(Error::EmptyLinkSet);
    }
    let per_fold = links.len() / spec.folds;
    if per_fold < 10 {
        return Err(Error::InsufficientData {
            per_fold,
            required: 10,
        });
    }

    // seeded fold assignment: shuffle indices, deal round-robin
    let mut indices: Vec<usize> = (0..links.len()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);
    let fold_of: Vec<usize> = {
        let mut fold_of = vec![0usize; links.len()];
        for (pos, &idx) in indices.iter().enumerate() {
            fold_of[idx] = pos % spec.folds;
        }
        fold_of
    };

    let options = TrainOptions {
        solver: settings.solver,
        memory_budget: settings.memory_budget,
    };
    let mut records = Vec::new();
    let mut means = Vec::new();
    let mut best: Option<(Hyperparameters, f64)> = None;

    for hyper in spec.combinations() {
        hyper.validate()?;
        let mut fold_reductions = Vec::with_capacity(spec.folds);
        for fold in 0..spec.folds {
            let train_links: Vec<Link> = links
                .iter()
                .zip(&fold_of)
                .filter(|(_, &f)| f != fold)
                .map(|(l, _)| l.clone())
                .collect();
            let held_out: Vec<Link> = links
                .iter()
                .zip(&fold_of)
                .filter(|(_, &f)| f == fold)
                .map(|(l, _)| l.clone())
                .collect();
            // bookkeeping: the partition must be disjoint and exhaustive
            assert_eq!(train_links.len() + held_out.len(), links.len());
            assert!(!held_out.is_empty() && !train_links.is_empty());

            let pathloss = LogDistanceModel::fit(&train_links, settings.ref_distance)?;
            let grid = PixelGrid::from_links(&train_links, hyper.pixel_width, settings.margin)?;
            let (model, _) = train(&train_links, &hyper, &pathloss, &grid, &options)?;
            let report = evaluate(&model, &held_out)?;
            fold_reductions.push(report.variance_reduction_pct);
            records.push(CvRecord {
                hyper,
                fold,
                reduction_pct: report.variance_reduction_pct,
                mse: report.error_variance,
                fading_variance: report.fading_variance,
            });
        }
        let mean_reduction = mean(&fold_reductions);
        means.push((hyper, mean_reduction));
        let better = match &best {
            None => true,
            Some((bh, bm)) => {
                mean_reduction > *bm
                    || (mean_reduction == *bm
                        && (hyper.alpha > bh.alpha
                            || (hyper.alpha == bh.alpha && hyper.pixel_width > bh.pixel_width)))
            }
        };
        if better {
            best = Some((hyper, mean_reduction));
        }
    }

    let (best, best_mean_reduction_pct) = best.expect("non-empty grid");
    Ok(CvOutcome {
        best,
        best_mean_reduction_pct,
        table: CvTable { records, means },
    })
}

/// Variance decomposition of tagged low-mobility data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBound {
    /// Centered variance of stationary-tagged residuals, dB^2.
    pub stationary_variance: f64,
    /// Centered variance of sub-wavelength-tagged residuals, dB^2.
    pub sub_wavelength_variance: f64,
    /// Sum of the two components.
    pub summed: f64,
    /// Mean-square fading loss of the whole dataset, dB^2.
    pub dataset_sigma_z_sq: f64,
    /// Best reduction any predictor could reach against this floor.
    pub implied_max_reduction_pct: f64,
}

/// Approximate the unpredictable-variance floor from mobility tags:
/// stationary rows bound the measurement noise, sub-wavelength rows the
/// small-scale fading. Variances are computed on residuals about the
/// log-distance prediction, centered within each group so fixed per-group
/// shadowing offsets drop out.
pub fn grouped_variance_bound(
    records: &[MeasurementRecord],
    pathloss: &LogDistanceModel,
) -> Result<VarianceBound> {
    if records.is_empty() {
        return Err(Error::EmptyLinkSet);
    }
    let residual = |r: &MeasurementRecord| -> f64 {
        let d = Point2D::new(r.tx_x, r.tx_y).distance(Point2D::new(r.rx_x, r.rx_y));
        pathloss.mean_power(d) - r.rss_dbm
    };
    let group = |tag: GroupTag| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.group_tag == Some(tag))
            .map(residual)
            .collect()
    };
    let stationary = group(GroupTag::Stationary);
    if stationary.is_empty() {
        return Err(Error::MissingGroup {
            group: "stationary",
        });
    }
    let sub = group(GroupTag::SubWavelength);
    if sub.is_empty() {
        return Err(Error::MissingGroup {
            group: "sub_wavelength",
        });
    }
    let centered_var = |v: &[f64]| -> f64 {
        let m = mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
    };
    let stationary_variance = centered_var(&stationary);
    let sub_wavelength_variance = centered_var(&sub);
    let summed = stationary_variance + sub_wavelength_variance;
    let all: Vec<f64> = records.iter().map(residual).collect();
    let dataset_sigma_z_sq = mean_square(&all);
    let implied_max_reduction_pct = if dataset_sigma_z_sq == 0.0 {
        100.0
    } else {
        (dataset_sigma_z_sq - summed) / dataset_sigma_z_sq * 100.0
    };
    Ok(VarianceBound {
        stationary_variance,
        sub_wavelength_variance,
        summed,
        dataset_sigma_z_sq,
        implied_max_reduction_pct,
    })
}

/// Render phase timings as machine-readable CSV.
pub fn timings_to_csv(phases: &[(&'static str, f64)]) -> String {
    let mut out = String::from("phase,seconds\n");
    for (name, secs) in phases {
        writeln!(out, "{name},{secs}").expect("write to String");
    }
    out
}
