//! Versioned, line-oriented text format for trained models.
//!
//! Layout: a magic/version line, a block of `key=value` header lines (any
//! order, every key required exactly once, unknown keys rejected), a
//! `field=<M>` marker, then M lines with one field value each. Floats are
//! written with Rust's shortest round-trip formatting, so write/parse is
//! lossless.
//!
//! ```text
//! celf-model v1
//! pathloss.intercept_dbm=-37.04
//! ...
//! field=2150
//! 0.125
//! -0.5
//! ...
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{CelfModel, Hyperparameters, SolverPath, TrainDiagnostics};
use crate::geometry::{PixelGrid, Point2D};
use crate::pathloss::LogDistanceModel;

const MAGIC: &str = "celf-model v1";

const HEADER_KEYS: &[&str] = &[
    "pathloss.intercept_dbm",
    "pathloss.exponent",
    "pathloss.ref_distance_m",
    "hyper.pixel_width_m",
    "hyper.shadow_ratio",
    "hyper.space_constant_m",
    "hyper.excess_length_m",
    "hyper.alpha",
    "prior.sigma_x_sq",
    "grid.origin_x",
    "grid.origin_y",
    "grid.pixel_width_m",
    "grid.n_cols",
    "grid.n_rows",
    "solver_path",
    "diag.n_links",
    "diag.nonzeros",
    "diag.zero_weight_links",
    "diag.sigma_z_sq",
    "diag.residual_variance",
];

/// Serialize a model to the v1 text format.
pub fn to_string(model: &CelfModel) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let p = model.pathloss();
    let h = model.hyper();
    let g = model.grid();
    let d = model.diagnostics();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    kv("pathloss.intercept_dbm", format!("{}", p.intercept_dbm));
    kv("pathloss.exponent", format!("{}", p.exponent));
    kv("pathloss.ref_distance_m", format!("{}", p.ref_distance_m));
    kv("hyper.pixel_width_m", format!("{}", h.pixel_width));
    kv("hyper.shadow_ratio", format!("{}", h.shadow_ratio));
    kv("hyper.space_constant_m", format!("{}", h.space_constant));
    kv("hyper.excess_length_m", format!("{}", h.excess_length));
    kv("hyper.alpha", format!("{}", h.alpha));
    kv("prior.sigma_x_sq", format!("{}", model.sigma_x_sq()));
    kv("grid.origin_x", format!("{}", g.origin().x));
    kv("grid.origin_y", format!("{}", g.origin().y));
    kv("grid.pixel_width_m", format!("{}", g.pixel_width()));
    kv("grid.n_cols", format!("{}", g.n_cols()));
    kv("grid.n_rows", format!("{}", g.n_rows()));
    kv("solver_path", model.solver_path().as_str().to_string());
    kv("diag.n_links", format!("{}", d.n_links));
    kv("diag.nonzeros", format!("{}", d.nonzeros));
    kv("diag.zero_weight_links", format!("{}", d.zero_weight_links));
    kv("diag.sigma_z_sq", format!("{}", d.sigma_z_sq));
    kv("diag.residual_variance", format!("{}", d.residual_variance));
    kv("field", format!("{}", model.field().len()));
    for v in model.field() {
        out.push_str(&format!("{v}\n"));
    }
    out
}

/// Parse the v1 text format. Tolerates any header-key order; rejects
/// unknown keys, duplicates, missing keys, malformed numbers, non-finite
/// values, and field-length mismatches, all with line numbers.
pub fn parse(text: &str) -> Result<CelfModel> {
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines.next().ok_or(Error::ModelFile {
        line: 1,
        message: "empty file".into(),
    })?;
    if magic.trim_end() != MAGIC {
        return Err(Error::ModelFile {
            line: 1,
            message: format!("expected '{MAGIC}', found '{magic}'"),
        });
    }

    let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut field_len: Option<usize> = None;
    let mut field_marker_line = 0usize;
    for (idx, line) in lines.by_ref() {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            return Err(Error::ModelFile {
                line: line_no,
                message: "blank line inside header".into(),
            });
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ModelFile {
            line: line_no,
            message: format!("expected key=value, found '{line}'"),
        })?;
        if key == "field" {
            field_len = Some(value.parse::<usize>().map_err(|_| Error::ModelFile {
                line: line_no,
                message: format!("invalid field length '{value}'"),
            })?);
            field_marker_line = line_no;
            break;
        }
        if !HEADER_KEYS.contains(&key) {
            return Err(Error::ModelFile {
                line: line_no,
                message: format!("unknown key '{key}'"),
            });
        }
        if header
            .insert(key.to_string(), (line_no, value.to_string()))
            .is_some()
        {
            return Err(Error::ModelFile {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    let field_len = field_len.ok_or(Error::ModelFile {
        line: text.lines().count(),
        message: "missing 'field=<len>' marker".into(),
    })?;
    for &key in HEADER_KEYS {
        if !header.contains_key(key) {
            return Err(Error::ModelFile {
                line: field_marker_line,
                message: format!("missing key '{key}'"),
            });
        }
    }

    let f = |key: &str| -> Result<f64> {
        let (line, raw) = &header[key];
        let v: f64 = raw.parse().map_err(|_| Error::ModelFile {
            line: *line,
            message: format!("invalid number '{raw}' for '{key}'"),
        })?;
        if !v.is_finite() {
            return Err(Error::ModelFile {
                line: *line,
                message: format!("non-finite value for '{key}'"),
            });
        }
        Ok(v)
    };
    let u = |key: &str| -> Result<usize> {
        let (line, raw) = &header[key];
        raw.parse().map_err(|_| Error::ModelFile {
            line: *line,
            message: format!("invalid count '{raw}' for '{key}'"),
        })
    };

    let pathloss = LogDistanceModel::new(
        f("pathloss.intercept_dbm")?,
        f("pathloss.exponent")?,
        f("pathloss.ref_distance_m")?,
    )
    .map_err(|e| header_err(&header, "pathloss.ref_distance_m", e))?;
    let hyper = Hyperparameters {
        pixel_width: f("hyper.pixel_width_m")?,
        shadow_ratio: f("hyper.shadow_ratio")?,
        space_constant: f("hyper.space_constant_m")?,
        excess_length: f("hyper.excess_length_m")?,
        alpha: f("hyper.alpha")?,
    };
    hyper
        .validate()
        .map_err(|e| header_err(&header, "hyper.alpha", e))?;
    let grid = PixelGrid::new(
        Point2D::new(f("grid.origin_x")?, f("grid.origin_y")?),
        f("grid.pixel_width_m")?,
        u("grid.n_cols")?,
        u("grid.n_rows")?,
    )
    .map_err(|e| header_err(&header, "grid.n_cols", e))?;
    let (sp_line, sp_raw) = &header["solver_path"];
    let solver_path = SolverPath::parse(sp_raw).ok_or_else(|| Error::ModelFile {
        line: *sp_line,
        message: format!("unknown solver path '{sp_raw}'"),
    })?;
    let sigma_x_sq = f("prior.sigma_x_sq")?;

    if field_len != grid.len() {
        return Err(Error::ModelFile {
            line: field_marker_line,
            message: format!(
                "field length {} does not match grid {}x{}",
                field_len,
                grid.n_cols(),
                grid.n_rows()
            ),
        });
    }

    let mut field = Vec::with_capacity(field_len);
    let mut consumed = field_marker_line;
    for (idx, line) in lines {
        let line_no = idx + 1;
        consumed = line_no;
        if field.len() == field_len {
            return Err(Error::ModelFile {
                line: line_no,
                message: "trailing content after field payload".into(),
            });
        }
        let v: f64 = line.trim_end().parse().map_err(|_| Error::ModelFile {
            line: line_no,
            message: format!("invalid field value '{line}'"),
        })?;
        if !v.is_finite() {
            return Err(Error::ModelFile {
                line: line_no,
                message: "non-finite field value".into(),
            });
        }
        field.push(v);
    }
    if field.len() != field_len {
        return Err(Error::ModelFile {
            line: consumed,
            message: format!("expected {} field values, found {}", field_len, field.len()),
        });
    }

    let diagnostics = TrainDiagnostics {
        n_links: u("diag.n_links")?,
        n_pixels: grid.len(),
        nonzeros: u("diag.nonzeros")?,
        zero_weight_links: u("diag.zero_weight_links")?,
        sigma_z_sq: f("diag.sigma_z_sq")?,
        residual_variance: f("diag.residual_variance")?,
    };

    CelfModel::from_parts(
        pathloss,
        hyper,
        grid,
        field,
        sigma_x_sq,
        solver_path,
        diagnostics,
    )
    .map_err(|e| Error::ModelFile {
        line: field_marker_line,
        message: e.to_string(),
    })
}

fn header_err(
    header: &BTreeMap<String, (usize, String)>,
    key: &str,
    e: Error,
) -> Error {
    Error::ModelFile {
        line: header.get(key).map(|(l, _)| *l).unwrap_or(1),
        message: e.to_string(),
    }
}

pub fn write_to_path(model: &CelfModel, path: &Path) -> Result<()> {
    fs::write(path, to_string(model))?;
    Ok(())
}

pub fn read_from_path(path: &Path) -> Result<CelfModel> {
    let text = fs::read_to_string(path)?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{train, TrainOptions};
    use crate::geometry::Link;
    use crate::pathloss::LogDistanceModel;
    use crate::testutil::rand_links;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn trained_model() -> CelfModel {
        let truth = LogDistanceModel::new(-30.0, 2.0, 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let links: Vec<Link> = rand_links(&mut rng, 25, 9.0)
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                Link::new(
                    format!("t{i}"),
                    l.tx(),
                    l.rx(),
                    truth.mean_power(l.distance()) - ((i as f64 * 1.3).sin() * 5.0),
                )
                .unwrap()
            })
            .collect();
        let grid = PixelGrid::from_links(&links, 1.0, 0.5).unwrap();
        let hyper = Hyperparameters {
            pixel_width: 1.0,
            shadow_ratio: 0.4,
            space_constant: 2.0,
            excess_length: 1.0,
            alpha: 0.5,
        };
        train(&links, &hyper, &truth, &grid, &TrainOptions::default())
            .unwrap()
            .0
    }

    #[test]
    fn round_trip_is_lossless() {
        let model = trained_model();
        let text = to_string(&model);
        let back = parse(&text).unwrap();
        assert_eq!(model, back);
        // and idempotent: serialize again, bytes match
        assert_eq!(text, to_string(&back));
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(
            parse("celf-model v2\n"),
            Err(Error::ModelFile { line: 1, .. })
        ));
        assert!(parse("").is_err());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let model = trained_model();
        let text = to_string(&model);
        let evil = text.replace(
            "pathloss.exponent=",
            "pathloss.bogus=1\npathloss.exponent=",
        );
        assert!(matches!(parse(&evil), Err(Error::ModelFile { .. })));
        let dup = text.replace(
            "pathloss.exponent=",
            "pathloss.intercept_dbm=0\npathloss.exponent=",
        );
        assert!(matches!(parse(&dup), Err(Error::ModelFile { .. })));
    }

    #[test]
    fn rejects_field_length_mismatch() {
        let model = trained_model();
        let mut extra = to_string(&model);
        extra.push_str("0.5\n");
        assert!(parse(&extra).is_err());

        let full = to_string(&model);
        let mut lines: Vec<&str> = full.lines().collect();
        lines.pop();
        let truncated = format!("{}\n", lines.join("\n"));
        assert!(parse(&truncated).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let model = trained_model();
        let text = to_string(&model);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        for l in lines.iter_mut() {
            if l.starts_with("prior.sigma_x_sq=") {
                *l = "prior.sigma_x_sq=inf".into();
            }
        }
        let evil = format!("{}\n", lines.join("\n"));
        assert!(parse(&evil).is_err());
    }

    #[test]
    fn missing_key_reported() {
        let model = trained_model();
        let text = to_string(&model);
        let without: String = text
            .lines()
            .filter(|l| !l.starts_with("hyper.alpha="))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = parse(&without).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("hyper.alpha"), "{msg}");
    }

    #[test]
    fn file_round_trip() {
        let model = trained_model();
        let dir = std::env::temp_dir().join(format!("celf-model-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.celf");
        write_to_path(&model, &path).unwrap();
        let back = read_from_path(&path).unwrap();
        assert_eq!(model, back);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
