// SPDX-License-Identifier: Apache-2.0

//! Matrix ingestion: CSV of decimal values, or a raw little-endian f32 file
//! with a 16-byte header (`MADNF32\0`, rows: u32, cols: u32).

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{AmmError, Result};

pub const F32_MAGIC: [u8; 8] = *b"MADNF32\0";

/// Parse CSV rows of decimal values. Blank lines and lines starting with `#`
/// are skipped. Errors carry the 1-based line number.
pub fn parse_csv_matrix(text: &str) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| AmmError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(AmmError::Parse { line, message: format!("expected {c} fields, found {}", record.len()) })
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 =
                field.parse().map_err(|_| AmmError::Parse { line, message: format!("{field:?} is not a number") })?;
            if !v.is_finite() {
                return Err(AmmError::Parse { line, message: format!("non-finite value {field:?}") });
            }
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| AmmError::Empty("CSV contains no rows".into()))?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| AmmError::Format(e.to_string()))
}

pub fn read_csv_matrix(path: &Path) -> Result<Array2<f64>> {
    parse_csv_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_csv_matrix(path: &Path, x: &Array2<f64>) -> Result<()> {
    let mut out = String::new();
    for row in x.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn decode_f32_matrix(bytes: &[u8]) -> Result<Array2<f64>> {
    if bytes.len() < 16 || bytes[..8] != F32_MAGIC {
        return Err(AmmError::Format("missing MADNF32 header".into()));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != rows * cols * 4 {
        return Err(AmmError::Format(format!(
            "header declares {rows}x{cols} floats but body has {} bytes",
            body.len()
        )));
    }
    let data = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| AmmError::Format(e.to_string()))
}

pub fn encode_f32_matrix(x: &Array2<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + x.len() * 4);
    out.extend_from_slice(&F32_MAGIC);
    out.extend_from_slice(&(x.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(x.ncols() as u32).to_le_bytes());
    for v in x.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn read_f32_matrix(path: &Path) -> Result<Array2<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_f32_matrix(&bytes)
}

pub fn write_f32_matrix(path: &Path, x: &Array2<f64>) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_f32_matrix(x))?;
    Ok(())
}

/// Read by extension: `.csv` is text, anything else the binary format.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => read_csv_matrix(path),
        _ => read_f32_matrix(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_basic() {
        let m = parse_csv_matrix("1, 2,3\n# comment\n\n4,5,6.5\n").unwrap();
        assert_eq!(m.shape(), &[2, 3]);
        assert_eq!(m[[1, 2]], 6.5);
    }

    #[test]
    fn csv_errors_name_the_line() {
        match parse_csv_matrix("1,2\n3,4\n5,oops\n") {
            Err(AmmError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_csv_matrix("1,2\n3\n") {
            Err(AmmError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_csv_matrix("").is_err());
    }

    #[test]
    fn binary_header_checked() {
        assert!(decode_f32_matrix(b"short").is_err());
        let mut bytes = encode_f32_matrix(&Array2::zeros((2, 2)));
        bytes.pop();
        assert!(decode_f32_matrix(&bytes).is_err());
        bytes[0] = b'X';
        assert!(decode_f32_matrix(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn binary_roundtrip(rows in 0usize..6, cols in 1usize..6, seed in any::<u32>()) {
            let x = Array2::from_shape_fn((rows, cols), |(r, c)| {
                ((seed as f64) * 1e-3 + (r * cols + c) as f64 * 0.25) as f32 as f64
            });
            prop_assert_eq!(decode_f32_matrix(&encode_f32_matrix(&x)).unwrap(), x);
        }
    }
}
