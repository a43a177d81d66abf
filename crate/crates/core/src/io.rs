//! Dense matrices as header-less CSV, one matrix row per line.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::covmodel::{CholeskyFactor, ModifiedCholesky};
use crate::error::{CscsError, Result};

pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CscsError::Parse(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    CscsError::Parse(format!("line {}, column {}: '{field}' is not a number", line + 1, col + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CscsError::Parse(format!(
                    "line {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CscsError::Parse("no rows".into()));
    }
    let (n, p) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CscsError::Parse(format!("{}: {e}", path.display())))?;
    read_matrix(file)
}

pub fn write_matrix<W: Write>(mut writer: W, m: &DMatrix<f64>) -> Result<()> {
    for row in m.row_iter() {
        let line = row.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",");
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let mut file = File::create(path)?;
    write_matrix(&mut file, m)?;
    file.flush()?;
    Ok(())
}

pub fn write_factor_file(path: impl AsRef<Path>, l: &CholeskyFactor) -> Result<()> {
    write_matrix_file(path, &l.to_dense())
}

/// `D` written as a dense diagonal matrix.
pub fn write_modified_cholesky_files(t_path: impl AsRef<Path>, d_path: impl AsRef<Path>, td: &ModifiedCholesky) -> Result<()> {
    write_matrix_file(t_path, td.t())?;
    write_matrix_file(d_path, &DMatrix::from_diagonal(td.d()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_writes() {
        let m = read_matrix("1, 2.5\n-3e-2,4\n".as_bytes()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.5, -0.03, 4.0]));
        let mut out = Vec::new();
        write_matrix(&mut out, &m).unwrap();
        assert_eq!(read_matrix(out.as_slice()).unwrap(), m);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_matrix("1,2\n3\n".as_bytes()).is_err());
        assert!(read_matrix("1,x\n".as_bytes()).is_err());
        assert!(read_matrix("".as_bytes()).is_err());
    }
}
