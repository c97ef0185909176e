//! Subcommand implementations. Data artifacts (stdout, output files) are
//! byte-deterministic for fixed inputs and seeds; timings are stderr-only
//! or opt-in files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use celf::dataset::{
    self, generate_synthetic, links_to_records, scenario_preset, LoadedDataset, SyntheticScenario,
};
use celf::error::Error;
use celf::estimator::{self, CelfModel, TrainOptions};
use celf::evaluation::{
    self, cross_validate, evaluate_baseline_hata, split_indices, CvSettings, EvalReport,
    GridSearchSpec,
};
use celf::export;
use celf::geometry::{Link, PixelGrid};
use celf::model_file;
use celf::pathloss::LogDistanceModel;

use crate::app_config::{AppConfig, ConfigOverrides};
use crate::{Stage, StageError};

fn load_dataset(path: &Path) -> Result<LoadedDataset, StageError> {
    dataset::load_csv(path).stage("dataset")
}

fn reject_summary(ds: &LoadedDataset) -> String {
    if ds.rejects.is_empty() {
        return String::new();
    }
    let mut out = format!("rejected_rows={}\n", ds.rejects.len());
    for r in &ds.rejects {
        writeln!(out, "reject line {}: {}", r.line, r.reason).expect("write to String");
    }
    out
}

pub fn fit(
    data: &Path,
    out: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<(), StageError> {
    let cfg = AppConfig::resolve(overrides).stage("config")?;
    let ds = load_dataset(data)?;
    let links = ds.links().stage("dataset")?;
    let model = LogDistanceModel::fit(&links, cfg.ref_distance).stage("pathloss")?;
    let z = model.fading_losses(&links);
    let sigma_z_sq = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;

    let mut report = String::new();
    writeln!(report, "links={}", links.len()).expect("write to String");
    writeln!(report, "exponent={}", model.exponent).expect("write to String");
    writeln!(report, "intercept_dbm={}", model.intercept_dbm).expect("write to String");
    writeln!(report, "ref_distance_m={}", model.ref_distance_m).expect("write to String");
    writeln!(report, "fading_variance_db2={sigma_z_sq}").expect("write to String");
    report.push_str(&reject_summary(&ds));

    print!("{report}");
    if let Some(path) = out {
        fs::write(path, &report).stage("io")?;
    }
    Ok(())
}

pub fn train(
    data: &Path,
    model_out: &Path,
    split_out: Option<&Path>,
    timing_out: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<(), StageError> {
    let cfg = AppConfig::resolve(overrides).stage("config")?;
    let hyper = cfg.hyperparameters().stage("config")?;
    let ds = load_dataset(data)?;

    // split by record so optional columns survive into the split files
    let (train_records, test_records) = if cfg.split_ratio < 1.0 {
        let (tr, te) =
            split_indices(ds.records.len(), cfg.split_ratio, cfg.seed).stage("dataset")?;
        let pick = |idx: Vec<usize>| -> Vec<dataset::MeasurementRecord> {
            idx.into_iter().map(|i| ds.records[i].clone()).collect()
        };
        (pick(tr), pick(te))
    } else {
        (ds.records.clone(), Vec::new())
    };
    if let Some(prefix) = split_out {
        let base = prefix.to_string_lossy();
        dataset::write_measurements_to_path(&train_records, &with_suffix(&base, "_train.csv"))
            .stage("io")?;
        dataset::write_measurements_to_path(&test_records, &with_suffix(&base, "_test.csv"))
            .stage("io")?;
    }

    let train_links: Vec<Link> = train_records
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_link(i + 1))
        .collect::<celf::Result<_>>()
        .stage("dataset")?;
    let pathloss = LogDistanceModel::fit(&train_links, cfg.ref_distance).stage("pathloss")?;
    let grid =
        PixelGrid::from_links(&train_links, hyper.pixel_width, cfg.margin).stage("train")?;
    let options = TrainOptions {
        solver: cfg.solver,
        memory_budget: cfg.memory_budget,
    };
    let (model, report) =
        estimator::train(&train_links, &hyper, &pathloss, &grid, &options).stage("train")?;
    model_file::write_to_path(&model, model_out).stage("io")?;

    let train_eval = evaluation::evaluate(&model, &train_links).stage("evaluate")?;
    println!("train_links={}", train_links.len());
    println!("test_links={}", test_records.len());
    println!("pixels={}", grid.len());
    println!("solver_path={}", report.path.as_str());
    println!("relative_residual={}", report.relative_residual());
    println!("jitter_applied={}", report.jitter_applied);
    println!("prior_jitter_applied={}", report.prior_jitter_applied);
    println!("exponent={}", model.pathloss().exponent);
    println!("intercept_dbm={}", model.pathloss().intercept_dbm);
    println!(
        "training_variance_reduction_pct={}",
        train_eval.variance_reduction_pct
    );
    print!("{}", reject_summary(&ds));

    // wall-clock diagnostics: stderr and the opt-in CSV only
    for (phase, secs) in &report.phases {
        eprintln!("timing {phase}: {secs:.6} s");
    }
    if let Some(path) = timing_out {
        fs::write(path, evaluation::timings_to_csv(&report.phases)).stage("io")?;
    }
    Ok(())
}

fn with_suffix(base: &str, suffix: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(format!("{base}{suffix}"))
}

fn read_model(path: &Path) -> Result<CelfModel, StageError> {
    model_file::read_from_path(path).stage("model")
}

pub fn predict(
    model: &Path,
    links: &Path,
    out: &Path,
    _overrides: &ConfigOverrides,
) -> Result<(), StageError> {
    let model = read_model(model)?;
    let ds = load_dataset(links)?;
    let links = ds.links().stage("dataset")?;
    let t = std::time::Instant::now();
    let predictions = estimator::predict_power(&model, &links).stage("predict")?;
    eprintln!("timing predict: {:.6} s", t.elapsed().as_secs_f64());

    let mut csv = String::from(
        "link_id,tx_x,tx_y,rx_x,rx_y,distance_m,shadowing_db,power_dbm,out_of_coverage\n",
    );
    for (link, p) in links.iter().zip(&predictions) {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            link.id(),
            link.tx().x,
            link.tx().y,
            link.rx().x,
            link.rx().y,
            link.distance(),
            p.shadowing_db,
            p.power_dbm,
            p.out_of_coverage
        )
        .expect("write to String");
    }
    fs::write(out, csv).stage("io")?;
    println!("predicted_links={}", predictions.len());
    println!(
        "out_of_coverage={}",
        predictions.iter().filter(|p| p.out_of_coverage).count()
    );
    print!("{}", reject_summary(&ds));
    Ok(())
}

fn summary_row(method: &str, r: &EvalReport) -> String {
    format!(
        "{method},{},{},{},{},{}\n",
        r.n_links, r.fading_variance, r.error_variance, r.variance_reduction_pct, r.out_of_coverage
    )
}

pub fn evaluate(
    model: &Path,
    test: &Path,
    out_prefix: &Path,
    hata: bool,
    overrides: &ConfigOverrides,
) -> Result<(), StageError> {
    let cfg = AppConfig::resolve(overrides).stage("config")?;
    let model = read_model(model)?;
    let ds = load_dataset(test)?;
    let links = ds.links().stage("dataset")?;
    let report = evaluation::evaluate(&model, &links).stage("evaluate")?;

    let mut summary = String::from(
        "method,n_links,fading_variance_db2,error_variance_db2,variance_reduction_pct,out_of_coverage\n",
    );
    summary.push_str(&summary_row("celf", &report));
    let mut text = String::new();
    writeln!(text, "test links: {}", report.n_links).expect("write to String");
    writeln!(text, "fading variance: {} dB^2", report.fading_variance).expect("write to String");
    writeln!(text, "error variance: {} dB^2", report.error_variance).expect("write to String");
    writeln!(
        text,
        "variance reduction: {}%",
        report.variance_reduction_pct
    )
    .expect("write to String");
    writeln!(text, "out of coverage: {}", report.out_of_coverage).expect("write to String");

    if hata {
        let params = cfg.hata_params().stage("config")?;
        let baseline =
            evaluate_baseline_hata(&params, model.pathloss(), &links).stage("evaluate")?;
        summary.push_str(&summary_row("okumura_hata", &baseline));
        writeln!(
            text,
            "okumura-hata baseline reduction: {}% (error variance {} dB^2, {} links outside 1-20 km)",
            baseline.variance_reduction_pct, baseline.error_variance, baseline.out_of_coverage
        )
        .expect("write to String");
    }

    let mut residuals =
        String::from("link_id,distance_m,fading_db,predicted_db,residual_db,out_of_coverage\n");
    for (i, link) in links.iter().enumerate() {
        writeln!(
            residuals,
            "{},{},{},{},{},{}",
            link.id(),
            link.distance(),
            report.fading[i],
            report.predicted[i],
            report.residuals[i],
            report.flags[i]
        )
        .expect("write to String");
    }

    let base = out_prefix.to_string_lossy();
    fs::write(with_suffix(&base, ".txt"), &text).stage("io")?;
    fs::write(with_suffix(&base, "_summary.csv"), &summary).stage("io")?;
    fs::write(with_suffix(&base, "_residuals.csv"), &residuals).stage("io")?;
    print!("{text}");
    print!("{}", reject_summary(&ds));
    Ok(())
}

pub fn tune(
    data: &Path,
    grid: &Path,
    out: &Path,
    retrain: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<(), StageError> {
    let cfg = AppConfig::resolve(overrides).stage("config")?;
    let ds = load_dataset(data)?;
    let links = ds.links().stage("dataset")?;

    let grid_text = fs::read_to_string(grid).stage("io")?;
    let kv = celf::config::KeyValueFile::parse(&grid_text).stage("tune")?;
    let mut spec = GridSearchSpec::from_key_values(&kv).stage("tune")?;
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    let settings = CvSettings {
        margin: cfg.margin,
        ref_distance: cfg.ref_distance,
        solver: cfg.solver,
        memory_budget: cfg.memory_budget,
    };
    let outcome = cross_validate(&links, &spec, &settings).stage("tune")?;
    fs::write(out, outcome.table.to_csv()).stage("io")?;

    let b = &outcome.best;
    println!(
        "best pixel_width={} shadow_ratio={} space_constant={} excess_length={} alpha={}",
        b.pixel_width, b.shadow_ratio, b.space_constant, b.excess_length, b.alpha
    );
    println!(
        "best_mean_reduction_pct={}",
        outcome.best_mean_reduction_pct
    );
    print!("{}", reject_summary(&ds));

    if let Some(model_out) = retrain {
        let pathloss = LogDistanceModel::fit(&links, cfg.ref_distance).stage("pathloss")?;
        let grid =
            PixelGrid::from_links(&links, outcome.best.pixel_width, cfg.margin).stage("train")?;
        let options = TrainOptions {
            solver: cfg.solver,
            memory_budget: cfg.memory_budget,
        };
        let (model, _) =
            estimator::train(&links, &outcome.best, &pathloss, &grid, &options).stage("train")?;
        model_file::write_to_path(&model, model_out).stage("io")?;
        println!("retrained_model={}", model_out.display());
    }
    Ok(())
}

pub fn synth(
    preset: Option<&str>,
    scenario: Option<&Path>,
    out: &Path,
    truth_out: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<(), StageError> {
    let cfg = AppConfig::resolve(overrides).stage("config")?;
    let mut sc: SyntheticScenario = match (preset, scenario) {
        (Some(name), None) => scenario_preset(name).stage("synth")?.scenario,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).stage("io")?;
            let kv = celf::config::KeyValueFile::parse(&text).stage("synth")?;
            SyntheticScenario::from_key_values(&kv).stage("synth")?
        }
        _ => {
            return Err(StageError {
                stage: "synth",
                error: Error::Scenario {
                    message: "provide exactly one of --preset or --scenario".into(),
                },
            })
        }
    };
    if let Some(seed) = overrides.seed {
        sc.seed = seed;
    }
    let (links, truth) = generate_synthetic(&sc, cfg.memory_budget).stage("synth")?;
    dataset::write_measurements_to_path(&links_to_records(&links), out).stage("io")?;
    if let Some(path) = truth_out {
        fs::write(path, export::write_field_csv(&truth.grid, &truth.field)).stage("io")?;
    }
    println!("links={}", links.len());
    println!("pixels={}", truth.grid.len());
    println!("noise_variance_db2={}", truth.noise_variance);
    println!("realized_fading_variance_db2={}", truth.realized_sigma_z_sq);
    Ok(())
}

pub fn export_field(model: &Path, out_prefix: &Path) -> Result<(), StageError> {
    let model = read_model(model)?;
    let artifacts = export::export_field(model.grid(), model.field());
    let base = out_prefix.to_string_lossy();
    fs::write(with_suffix(&base, ".csv"), &artifacts.csv).stage("io")?;
    fs::write(with_suffix(&base, ".pgm"), &artifacts.pgm).stage("io")?;
    fs::write(with_suffix(&base, "_mapping.txt"), &artifacts.sidecar).stage("io")?;
    println!("pixels={}", model.field().len());
    println!("min_db={}", artifacts.min_db);
    println!("max_db={}", artifacts.max_db);
    Ok(())
}
