//! Measurement ingestion and synthetic-scenario generation.
//!
//! The on-disk measurement format is a plain CSV with header
//! `tx_x,tx_y,rx_x,rx_y,rss_dbm[,link_id][,group_tag]` — planar meters,
//! dBm, UTF-8, `.` decimal separator. Structural problems (bad header,
//! wrong field count, unparseable numbers) are errors; rows that parse but
//! violate domain invariants (coincident endpoints, non-finite values) are
//! rejected individually with their line numbers.
//!
//! The synthetic generator is the library's ground-truth oracle: it samples
//! a loss field from the prior, pushes it through the forward model
//! `z = W p + n`, and keeps the truth around so estimators can be checked
//! against it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::config::KeyValueFile;
use crate::error::{Error, Result};
use crate::estimator::Hyperparameters;
use crate::geometry::{Link, PixelGrid, Point2D, WeightMatrix, WeightRow};
use crate::pathloss::LogDistanceModel;
use crate::prior::{CovarianceMatrix, FieldPrior, MemoryBudget};

/// Mobility tag used by the grouped-variance analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupTag {
    Stationary,
    SubWavelength,
    Other,
}

impl GroupTag {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stationary" => Some(Self::Stationary),
            "sub_wavelength" => Some(Self::SubWavelength),
            "other" => Some(Self::Other),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Stationary => "stationary",
            Self::SubWavelength => "sub_wavelength",
            Self::Other => "other",
        }
    }
}

/// One validated measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub tx_x: f64,
    pub tx_y: f64,
    pub rx_x: f64,
    pub rx_y: f64,
    pub rss_dbm: f64,
    pub link_id: Option<String>,
    pub group_tag: Option<GroupTag>,
}

impl MeasurementRecord {
    /// Convert to a [`Link`]; `fallback` names untagged rows (typically the
    /// source line number).
    pub fn to_link(&self, fallback: usize) -> Result<Link> {
        let id = match &self.link_id {
            Some(id) => id.clone(),
            None => format!("row{fallback}"),
        };
        Link::new(
            id,
            Point2D::new(self.tx_x, self.tx_y),
            Point2D::new(self.rx_x, self.rx_y),
            self.rss_dbm,
        )
    }
}

/// A rejected row and why.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReject {
    pub line: usize,
    pub reason: String,
}

/// Parse results: accepted records plus per-row rejects.
#[derive(Debug, Clone, Default)]
pub struct LoadedDataset {
    pub records: Vec<MeasurementRecord>,
    pub rejects: Vec<RowReject>,
}

impl LoadedDataset {
    /// Accepted records as links, named after their source line when the
    /// file carries no explicit ids.
    pub fn links(&self) -> Result<Vec<Link>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_link(i + 2)) // +2: 1-based lines, one header
            .collect()
    }
}

const BASE_COLUMNS: [&str; 5] = ["tx_x", "tx_y", "rx_x", "rx_y", "rss_dbm"];

/// Parse the measurement CSV format from a string.
pub fn parse_measurements(text: &str) -> Result<LoadedDataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Csv {
        line: 1,
        message: "missing header".into(),
    })?;
    let columns: Vec<&str> = header.trim_end().split(',').map(|c| c.trim()).collect();
    let (has_id, has_tag) = validate_header(&columns)?;
    let n_cols = columns.len();

    let mut out = LoadedDataset::default();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim_end_matches('\r');
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(|f| f.trim()).collect();
        if fields.len() != n_cols {
            return Err(Error::Csv {
                line,
                message: format!("expected {n_cols} fields, found {}", fields.len()),
            });
        }
        let mut nums = [0.0f64; 5];
        for (i, slot) in nums.iter_mut().enumerate() {
            *slot = fields[i].parse().map_err(|_| Error::Csv {
                line,
                message: format!("non-numeric {} '{}'", BASE_COLUMNS[i], fields[i]),
            })?;
        }
        let mut cursor = 5;
        let link_id = if has_id {
            let v = fields[cursor];
            cursor += 1;
            if v.is_empty() {
                None
            } else {
                Some(v.to_string())
            }
        } else {
            None
        };
        let group_tag = if has_tag {
            let v = fields[cursor];
            if v.is_empty() {
                None
            } else {
                Some(GroupTag::parse(v).ok_or_else(|| Error::Csv {
                    line,
                    message: format!(
                        "unknown group_tag '{v}' (stationary | sub_wavelength | other)"
                    ),
                })?)
            }
        } else {
            None
        };

        // domain invariants: reject the row, keep going
        if nums.iter().any(|v| !v.is_finite()) {
            out.rejects.push(RowReject {
                line,
                reason: "non-finite value".into(),
            });
            continue;
        }
        if nums[0] == nums[2] && nums[1] == nums[3] {
            out.rejects.push(RowReject {
                line,
                reason: "tx == rx (zero link distance)".into(),
            });
            continue;
        }
        out.records.push(MeasurementRecord {
            tx_x: nums[0],
            tx_y: nums[1],
            rx_x: nums[2],
            rx_y: nums[3],
            rss_dbm: nums[4],
            link_id,
            group_tag,
        });
    }
    if out.records.is_empty() && out.rejects.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

fn validate_header(columns: &[&str]) -> Result<(bool, bool)> {
    let base_ok = columns.len() >= 5 && columns[..5] == BASE_COLUMNS;
    if !base_ok {
        let missing: Vec<&str> = BASE_COLUMNS
            .iter()
            .filter(|c| !columns.contains(c))
            .copied()
            .collect();
        return Err(Error::Csv {
            line: 1,
            message: if missing.is_empty() {
                format!("header must start with '{}'", BASE_COLUMNS.join(","))
            } else {
                format!("missing columns: {}", missing.join(", "))
            },
        });
    }
    match &columns[5..] {
        [] => Ok((false, false)),
        ["link_id"] => Ok((true, false)),
        ["group_tag"] => Ok((false, true)),
        ["link_id", "group_tag"] => Ok((true, true)),
        extra => Err(Error::Csv {
            line: 1,
            message: format!("unexpected columns after rss_dbm: {}", extra.join(", ")),
        }),
    }
}

/// Load the measurement CSV format from a file.
pub fn load_csv(path: &Path) -> Result<LoadedDataset> {
    let text = fs::read_to_string(path)?;
    parse_measurements(&text)
}

/// Serialize records back to the CSV schema. Optional columns appear when
/// any record uses them. Floats use shortest round-trip formatting, so
/// load -> write -> load is lossless.
pub fn write_measurements(records: &[MeasurementRecord]) -> Result<String> {
    let has_id = records.iter().any(|r| r.link_id.is_some());
    let has_tag = records.iter().any(|r| r.group_tag.is_some());
    let mut out = String::from("tx_x,tx_y,rx_x,rx_y,rss_dbm");
    if has_id {
        out.push_str(",link_id");
    }
    if has_tag {
        out.push_str(",group_tag");
    }
    out.push('\n');
    for r in records {
        if let Some(id) = &r.link_id {
            if id.contains(',') || id.contains('\n') || id.contains('\r') {
                return Err(Error::Csv {
                    line: 0,
                    message: format!("link_id '{id}' contains a delimiter"),
                });
            }
        }
        write!(
            out,
            "{},{},{},{},{}",
            r.tx_x, r.tx_y, r.rx_x, r.rx_y, r.rss_dbm
        )
        .expect("write to String");
        if has_id {
            out.push(',');
            if let Some(id) = &r.link_id {
                out.push_str(id);
            }
        }
        if has_tag {
            out.push(',');
            if let Some(tag) = r.group_tag {
                out.push_str(tag.as_str());
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_measurements_to_path(records: &[MeasurementRecord], path: &Path) -> Result<()> {
    fs::write(path, write_measurements(records)?)?;
    Ok(())
}

/// How synthetic nodes are placed in the site box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodePlacement {
    /// Independent uniform positions.
    Uniform,
    /// A regular, nearly square lattice (regularly furnished indoor sites).
    Grid,
}

/// Which node pairs become links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkPolicy {
    AllPairs,
    Sample(usize),
}

/// Optional variance calibration: rescale the sampled field so the realized
/// shadowing mean square is `shadow_ratio * total_variance` over the
/// generated links, and set the noise variance to the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingCalibration {
    pub total_variance: f64,
    pub shadow_ratio: f64,
}

/// A reproducible synthetic measurement campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub box_width: f64,
    pub box_height: f64,
    pub pixel_width: f64,
    pub space_constant: f64,
    /// Prior field variance scale used to sample the true field.
    pub sigma_x_sq: f64,
    /// Measurement noise variance (dB^2); overridden by `calibration`.
    pub noise_variance: f64,
    pub calibration: Option<FadingCalibration>,
    pub excess_length: f64,
    /// Ground-truth path loss used to synthesize received powers.
    pub pathloss: LogDistanceModel,
    pub node_count: usize,
    pub placement: NodePlacement,
    pub link_policy: LinkPolicy,
    pub seed: u64,
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 5] = [
            ("box_width", self.box_width),
            ("box_height", self.box_height),
            ("pixel_width", self.pixel_width),
            ("space_constant", self.space_constant),
            ("excess_length", self.excess_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    requirement: "finite and > 0",
                });
            }
        }
        if !(self.sigma_x_sq.is_finite() && self.sigma_x_sq > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma_x_sq",
                value: self.sigma_x_sq,
                requirement: "finite and > 0",
            });
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "noise_variance",
                value: self.noise_variance,
                requirement: "finite and >= 0",
            });
        }
        if let Some(c) = &self.calibration {
            if !(c.total_variance.is_finite() && c.total_variance > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "target_fading_variance",
                    value: c.total_variance,
                    requirement: "finite and > 0",
                });
            }
            if !(c.shadow_ratio > 0.0 && c.shadow_ratio <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "shadow_ratio",
                    value: c.shadow_ratio,
                    requirement: "in (0, 1]",
                });
            }
        }
        if self.node_count < 2 {
            return Err(Error::Scenario {
                message: format!("node_count {} < 2", self.node_count),
            });
        }
        if let LinkPolicy::Sample(n) = self.link_policy {
            if n == 0 {
                return Err(Error::Scenario {
                    message: "sample link count must be >= 1".into(),
                });
            }
        }
        Ok(())
    }

    /// Parse a scenario from a key=value file. See the README for the key
    /// list; unknown keys are rejected.
    pub fn from_key_values(kv: &KeyValueFile) -> Result<Self> {
        kv.reject_unknown(&[
            "box_width",
            "box_height",
            "pixel_width",
            "space_constant",
            "sigma_x_sq",
            "noise_variance",
            "target_fading_variance",
            "shadow_ratio",
            "excess_length",
            "pathloss_exponent",
            "pathloss_intercept",
            "ref_distance",
            "nodes",
            "placement",
            "links",
            "seed",
        ])?;
        let need = |key: &'static str| -> Result<f64> {
            kv.get_f64(key)?.ok_or(Error::Config {
                message: format!("missing required key '{key}'"),
            })
        };
        let calibration = match (
            kv.get_f64("target_fading_variance")?,
            kv.get_f64("shadow_ratio")?,
        ) {
            (Some(total_variance), Some(shadow_ratio)) => Some(FadingCalibration {
                total_variance,
                shadow_ratio,
            }),
            (None, None) => None,
            _ => {
                return Err(Error::Config {
                    message: "target_fading_variance and shadow_ratio must be given together"
                        .into(),
                })
            }
        };
        let sigma_x_sq = match kv.get_f64("sigma_x_sq")? {
            Some(v) => v,
            // nominal scale; calibration rescales the field anyway
            None if calibration.is_some() => 1.0,
            None => {
                return Err(Error::Config {
                    message: "missing required key 'sigma_x_sq' (or use calibration keys)".into(),
                })
            }
        };
        let noise_variance = match kv.get_f64("noise_variance")? {
            Some(v) => v,
            None if calibration.is_some() => 0.0,
            None => {
                return Err(Error::Config {
                    message: "missing required key 'noise_variance' (or use calibration keys)"
                        .into(),
                })
            }
        };
        let placement = match kv.get("placement").unwrap_or("uniform") {
            "uniform" => NodePlacement::Uniform,
            "grid" => NodePlacement::Grid,
            other => {
                return Err(Error::Config {
                    message: format!("placement '{other}' (expected uniform | grid)"),
                })
            }
        };
        let link_policy = match kv.get("links").unwrap_or("all_pairs") {
            "all_pairs" => LinkPolicy::AllPairs,
            other => match other.strip_prefix("sample:") {
                Some(n) => LinkPolicy::Sample(n.parse().map_err(|_| Error::Config {
                    message: format!("links '{other}' (expected all_pairs | sample:<count>)"),
                })?),
                None => {
                    return Err(Error::Config {
                        message: format!("links '{other}' (expected all_pairs | sample:<count>)"),
                    })
                }
            },
        };
        let pathloss = LogDistanceModel::new(
            need("pathloss_intercept")?,
            need("pathloss_exponent")?,
            kv.get_f64("ref_distance")?.unwrap_or(1.0),
        )?;
        let scenario = SyntheticScenario {
            box_width: need("box_width")?,
            box_height: need("box_height")?,
            pixel_width: need("pixel_width")?,
            space_constant: need("space_constant")?,
            sigma_x_sq,
            noise_variance,
            calibration,
            excess_length: need("excess_length")?,
            pathloss,
            node_count: kv.get_usize("nodes")?.ok_or(Error::Config {
                message: "missing required key 'nodes'".into(),
            })?,
            placement,
            link_policy,
            seed: kv.get_u64("seed")?.unwrap_or(0),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Ground truth retained alongside generated links.
#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    pub grid: PixelGrid,
    /// The true loss field the data was generated from.
    pub field: Vec<f64>,
    /// Per-link true shadowing, `W p`.
    pub shadowing: Vec<f64>,
    /// Per-link noise draws.
    pub noise: Vec<f64>,
    /// Noise variance actually used (after calibration).
    pub noise_variance: f64,
    /// Mean square of the generated fading losses.
    pub realized_sigma_z_sq: f64,
}

/// Generate a synthetic campaign: place nodes, enumerate links, sample the
/// field, push it through the forward model, and keep the truth.
///
/// Deterministic per `scenario.seed`: node placement, field sampling, and
/// noise use three separate seeded streams.
pub fn generate_synthetic(
    scenario: &SyntheticScenario,
    budget: MemoryBudget,
) -> Result<(Vec<Link>, SyntheticTruth)> {
    scenario.validate()?;
    let grid = PixelGrid::covering(
        Point2D::new(0.0, 0.0),
        scenario.box_width,
        scenario.box_height,
        scenario.pixel_width,
    )?;

    let nodes = place_nodes(scenario);
    let pairs = pick_pairs(scenario, nodes.len())?;

    // weight rows need only endpoint geometry
    let mut rows: Vec<WeightRow> = Vec::with_capacity(pairs.len());
    let mut endpoints: Vec<(Point2D, Point2D)> = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (tx, rx) = (nodes[i], nodes[j]);
        if tx == rx {
            return Err(Error::Scenario {
                message: format!("nodes {i} and {j} coincide; cannot form a link"),
            });
        }
        let probe = Link::new("probe", tx, rx, 0.0)?;
        rows.push(WeightMatrix::link_weights(
            &probe,
            &grid,
            scenario.excess_length,
        )?);
        endpoints.push((tx, rx));
    }
    let weights = WeightMatrix::from_rows(rows, grid.len());

    let prior = FieldPrior::new(scenario.sigma_x_sq, scenario.space_constant, grid)?;
    let cov = CovarianceMatrix::build(&prior, budget)?;
    let mut field: Vec<f64> = cov.sample_field(scenario.seed).to_vec();
    let mut shadowing = weights.apply(&field);

    let noise_variance = match &scenario.calibration {
        Some(cal) => {
            let target = cal.shadow_ratio * cal.total_variance;
            let raw_ms =
                shadowing.iter().map(|s| s * s).sum::<f64>() / shadowing.len().max(1) as f64;
            if raw_ms == 0.0 {
                return Err(Error::Scenario {
                    message: "calibration impossible: no link crosses any pixel".into(),
                });
            }
            let scale = (target / raw_ms).sqrt();
            for v in field.iter_mut() {
                *v *= scale;
            }
            for s in shadowing.iter_mut() {
                *s *= scale;
            }
            (1.0 - cal.shadow_ratio) * cal.total_variance
        }
        None => scenario.noise_variance,
    };

    let mut noise_rng = ChaCha12Rng::seed_from_u64(scenario.seed);
    noise_rng.set_stream(2);
    let noise: Vec<f64> = if noise_variance > 0.0 {
        let normal = Normal::new(0.0, noise_variance.sqrt()).expect("positive std dev");
        (0..pairs.len()).map(|_| normal.sample(&mut noise_rng)).collect()
    } else {
        vec![0.0; pairs.len()]
    };

    let mut links = Vec::with_capacity(pairs.len());
    let mut z_ms = 0.0;
    for (idx, ((tx, rx), (s, n))) in endpoints
        .iter()
        .zip(shadowing.iter().zip(&noise))
        .enumerate()
    {
        let d = tx.distance(*rx);
        let z = s + n;
        z_ms += z * z;
        let rss = scenario.pathloss.mean_power(d) - z;
        links.push(Link::new(format!("l{idx}"), *tx, *rx, rss)?);
    }
    z_ms /= pairs.len().max(1) as f64;

    Ok((
        links,
        SyntheticTruth {
            grid,
            field,
            shadowing,
            noise,
            noise_variance,
            realized_sigma_z_sq: z_ms,
        },
    ))
}

fn place_nodes(scenario: &SyntheticScenario) -> Vec<Point2D> {
    match scenario.placement {
        NodePlacement::Uniform => {
            let mut rng = ChaCha12Rng::seed_from_u64(scenario.seed);
            rng.set_stream(1);
            (0..scenario.node_count)
                .map(|_| {
                    Point2D::new(
                        rng.random::<f64>() * scenario.box_width,
                        rng.random::<f64>() * scenario.box_height,
                    )
                })
                .collect()
        }
        NodePlacement::Grid => {
            let n = scenario.node_count;
            let aspect = scenario.box_width / scenario.box_height;
            let nx = ((n as f64 * aspect).sqrt().ceil() as usize).max(1);
            let ny = n.div_ceil(nx);
            let dx = scenario.box_width / nx as f64;
            let dy = scenario.box_height / ny as f64;
            (0..n)
                .map(|k| {
                    let (col, row) = (k % nx, k / nx);
                    Point2D::new((col as f64 + 0.5) * dx, (row as f64 + 0.5) * dy)
                })
                .collect()
        }
    }
}

fn pick_pairs(scenario: &SyntheticScenario, n_nodes: usize) -> Result<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n_nodes)
        .flat_map(|i| (i + 1..n_nodes).map(move |j| (i, j)))
        .collect();
    match scenario.link_policy {
        LinkPolicy::AllPairs => Ok(all),
        LinkPolicy::Sample(count) => {
            if count > all.len() {
                return Err(Error::Scenario {
                    message: format!(
                        "cannot sample {count} links from {} distinct pairs",
                        all.len()
                    ),
                });
            }
            let mut rng = ChaCha12Rng::seed_from_u64(scenario.seed);
            rng.set_stream(3);
            let mut chosen: Vec<usize> = index_sample(&mut rng, all.len(), count).into_vec();
            chosen.sort_unstable();
            Ok(chosen.into_iter().map(|k| all[k]).collect())
        }
    }
}

/// The two built-in scenario presets with their recommended
/// hyperparameters: a desk-scale indoor office and a campus-scale outdoor
/// site.
#[derive(Debug, Clone)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub scenario: SyntheticScenario,
    pub hyper: Hyperparameters,
}

pub const PRESET_NAMES: [&str; 2] = ["indoor-like", "outdoor-like"];

/// Look up a named preset.
pub fn scenario_preset(name: &str) -> Result<ScenarioPreset> {
    match name {
        "indoor-like" => Ok(ScenarioPreset {
            name: "indoor-like",
            description: "17.5 x 15 m office, 44 nodes, all pairs, 0.35 m pixels",
            scenario: SyntheticScenario {
                box_width: 17.5,
                box_height: 15.0,
                pixel_width: 0.35,
                space_constant: 2.5,
                sigma_x_sq: 1.0,
                noise_variance: 0.0,
                calibration: Some(FadingCalibration {
                    total_variance: 19.8,
                    shadow_ratio: 0.30,
                }),
                excess_length: 0.18,
                pathloss: LogDistanceModel {
                    intercept_dbm: -37.04,
                    exponent: 2.26,
                    ref_distance_m: 1.0,
                },
                node_count: 44,
                placement: NodePlacement::Uniform,
                link_policy: LinkPolicy::AllPairs,
                seed: 7,
            },
            hyper: Hyperparameters {
                pixel_width: 0.35,
                shadow_ratio: 0.30,
                space_constant: 2.5,
                excess_length: 0.18,
                alpha: 41.0,
            },
        }),
        "outdoor-like" => Ok(ScenarioPreset {
            name: "outdoor-like",
            description: "2200 x 2100 m campus, 40 nodes, all pairs, 25 m pixels",
            scenario: SyntheticScenario {
                box_width: 2200.0,
                box_height: 2100.0,
                pixel_width: 25.0,
                space_constant: 35.0,
                sigma_x_sq: 1.0,
                noise_variance: 0.0,
                calibration: Some(FadingCalibration {
                    total_variance: 58.4,
                    shadow_ratio: 0.58,
                }),
                excess_length: 105.0,
                pathloss: LogDistanceModel {
                    intercept_dbm: -1.25,
                    exponent: 2.73,
                    ref_distance_m: 1.0,
                },
                node_count: 40,
                placement: NodePlacement::Uniform,
                link_policy: LinkPolicy::AllPairs,
                seed: 7,
            },
            hyper: Hyperparameters {
                pixel_width: 25.0,
                shadow_ratio: 0.58,
                space_constant: 35.0,
                excess_length: 105.0,
                alpha: 0.3,
            },
        }),
        other => Err(Error::UnknownPreset {
            name: other.to_string(),
            available: PRESET_NAMES.join(", "),
        }),
    }
}

/// Links as records (for re-serialization of generated data).
pub fn links_to_records(links: &[Link]) -> Vec<MeasurementRecord> {
    links
        .iter()
        .map(|l| MeasurementRecord {
            tx_x: l.tx().x,
            tx_y: l.tx().y,
            rx_x: l.rx().x,
            rx_y: l.rx().y,
            rss_dbm: l.rss_dbm(),
            link_id: Some(l.id().to_string()),
            group_tag: None,
        })
        .collect()
}
