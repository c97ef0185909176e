//! Loss-field export: CSV grid, 8-bit portable graymap, and the mapping
//! sidecar that makes the image values recoverable.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::PixelGrid;

/// Gray level used when the field is constant (the mapping is degenerate;
/// the sidecar still records the exact value).
const FLAT_GRAY: u8 = 128;

/// All three artifacts of a field export.
#[derive(Debug, Clone)]
pub struct FieldExport {
    pub csv: String,
    pub pgm: Vec<u8>,
    pub sidecar: String,
    pub min_db: f64,
    pub max_db: f64,
}

/// Pixel-center CSV: `x_center,y_center,loss_db`, row-major ascending, one
/// row per pixel. Floats use shortest round-trip formatting, so re-import
/// reproduces the field bit for bit.
pub fn write_field_csv(grid: &PixelGrid, field: &[f64]) -> String {
    assert_eq!(field.len(), grid.len());
    let mut out = String::from("x_center,y_center,loss_db\n");
    for (m, v) in field.iter().enumerate() {
        let c = grid.center(m);
        writeln!(out, "{},{},{}", c.x, c.y, v).expect("write to String");
    }
    out
}

/// A re-imported field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCsv {
    pub centers: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

/// Parse the field CSV format back.
pub fn read_field_csv(text: &str) -> Result<FieldCsv> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Csv {
        line: 1,
        message: "missing header".into(),
    })?;
    if header.trim_end() != "x_center,y_center,loss_db" {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected 'x_center,y_center,loss_db', found '{header}'"),
        });
    }
    let mut centers = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim_end_matches('\r');
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Csv {
                line,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let mut nums = [0.0f64; 3];
        for (i, slot) in nums.iter_mut().enumerate() {
            *slot = fields[i].trim().parse().map_err(|_| Error::Csv {
                line,
                message: format!("non-numeric field '{}'", fields[i]),
            })?;
            if !slot.is_finite() {
                return Err(Error::Csv {
                    line,
                    message: "non-finite value".into(),
                });
            }
        }
        centers.push((nums[0], nums[1]));
        values.push(nums[2]);
    }
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(FieldCsv { centers, values })
}

/// Binary 8-bit portable graymap (P5) of the field. Image rows run
/// top-to-bottom, so the top image row is the grid's highest-y row; values
/// map linearly from `[min, max]` to `[0, 255]`.
pub fn write_pgm(grid: &PixelGrid, field: &[f64]) -> Vec<u8> {
    assert_eq!(field.len(), grid.len());
    let (min, max) = min_max(field);
    let mut out = format!("P5\n{} {}\n255\n", grid.n_cols(), grid.n_rows()).into_bytes();
    for row in (0..grid.n_rows()).rev() {
        for col in 0..grid.n_cols() {
            let v = field[grid.index(col, row)];
            out.push(gray_level(v, min, max));
        }
    }
    out
}

fn gray_level(v: f64, min: f64, max: f64) -> u8 {
    if max == min {
        return FLAT_GRAY;
    }
    let t = (v - min) / (max - min);
    (t * 255.0).round().clamp(0.0, 255.0) as u8
}

fn min_max(field: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in field {
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Human-readable sidecar recording the value mapping and grid geometry,
/// enough to recover dB values from gray levels to 8-bit precision.
pub fn mapping_sidecar(grid: &PixelGrid, field: &[f64]) -> String {
    let (min, max) = min_max(field);
    let mut out = String::new();
    out.push_str("field-mapping v1\n");
    writeln!(out, "min_db={min}").expect("write to String");
    writeln!(out, "max_db={max}").expect("write to String");
    writeln!(out, "gray_to_db=min_db + gray/255 * (max_db - min_db)").expect("write to String");
    writeln!(out, "flat_gray={FLAT_GRAY}").expect("write to String");
    writeln!(out, "n_cols={}", grid.n_cols()).expect("write to String");
    writeln!(out, "n_rows={}", grid.n_rows()).expect("write to String");
    writeln!(out, "pixel_width_m={}", grid.pixel_width()).expect("write to String");
    writeln!(out, "origin_x={}", grid.origin().x).expect("write to String");
    writeln!(out, "origin_y={}", grid.origin().y).expect("write to String");
    out.push_str("orientation=top image row is the highest-y grid row\n");
    out
}

/// Produce all three artifacts at once.
pub fn export_field(grid: &PixelGrid, field: &[f64]) -> FieldExport {
    let (min_db, max_db) = min_max(field);
    FieldExport {
        csv: write_field_csv(grid, field),
        pgm: write_pgm(grid, field),
        sidecar: mapping_sidecar(grid, field),
        min_db,
        max_db,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;

    fn grid3x2() -> PixelGrid {
        PixelGrid::new(Point2D::new(0.0, 0.0), 1.0, 3, 2).unwrap()
    }

    #[test]
    fn csv_round_trip_bitwise() {
        let grid = grid3x2();
        let field = vec![0.1, -2.5, 3.25, f64::MIN_POSITIVE, 1e300, -0.0];
        let csv = write_field_csv(&grid, &field);
        let back = read_field_csv(&csv).unwrap();
        assert_eq!(back.values, field);
        for (m, &(x, y)) in back.centers.iter().enumerate() {
            assert_eq!((x, y), (grid.center(m).x, grid.center(m).y));
        }
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(read_field_csv("").is_err());
        assert!(read_field_csv("x,y,loss\n").is_err());
        assert!(read_field_csv("x_center,y_center,loss_db\n1,2\n").is_err());
        assert!(read_field_csv("x_center,y_center,loss_db\n1,2,zebra\n").is_err());
        assert!(read_field_csv("x_center,y_center,loss_db\n1,2,inf\n").is_err());
        assert!(matches!(
            read_field_csv("x_center,y_center,loss_db\n"),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn pgm_header_and_orientation() {
        let grid = grid3x2();
        // highest value in the top row (row 1), lowest in row 0
        let field = vec![0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        let pgm = write_pgm(&grid, &field);
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        let pixels = &pgm[header.len()..];
        assert_eq!(pixels.len(), 6);
        // first emitted row is grid row 1 (top), all max -> 255
        assert_eq!(&pixels[..3], &[255, 255, 255]);
        assert_eq!(&pixels[3..], &[0, 0, 0]);
    }

    #[test]
    fn constant_field_is_uniform_gray() {
        let grid = grid3x2();
        let field = vec![4.2; 6];
        let pgm = write_pgm(&grid, &field);
        let pixels = &pgm[b"P5\n3 2\n255\n".len()..];
        assert!(pixels.iter().all(|&b| b == FLAT_GRAY));
    }

    #[test]
    fn sidecar_records_extremes() {
        let grid = grid3x2();
        let field = vec![-1.5, 0.0, 2.25, 0.5, 1.0, -0.25];
        let sidecar = mapping_sidecar(&grid, &field);
        assert!(sidecar.contains("min_db=-1.5"));
        assert!(sidecar.contains("max_db=2.25"));
        assert!(sidecar.contains("n_cols=3"));
    }

    #[test]
    fn gray_levels_recoverable_to_8bit() {
        let grid = grid3x2();
        let field = vec![-3.0, -1.0, 0.0, 1.5, 2.0, 6.0];
        let pgm = write_pgm(&grid, &field);
        let pixels = &pgm[b"P5\n3 2\n255\n".len()..];
        let (min, max) = (-3.0, 6.0);
        let step = (max - min) / 255.0;
        for row in 0..2 {
            for col in 0..3 {
                let v = field[grid.index(col, row)];
                let byte = pixels[(1 - row) * 3 + col] as f64;
                let recovered = min + byte / 255.0 * (max - min);
                assert!((recovered - v).abs() <= 0.5 * step + 1e-12);
            }
        }
    }
}
