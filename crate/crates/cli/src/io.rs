//! Comma-separated dataset input and result files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use kmeans_core::{Assignment, ClusterModel, Dataset};

use crate::error::{CliError, DataError};

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// First line holds column names.
    pub header: bool,
    /// First column is an identifier and is dropped.
    pub id_column: bool,
}

/// Reads a numeric CSV file into a [`Dataset`].
///
/// Rows and columns in errors are 1-based and refer to the file as written
/// (header line and id column included).
pub fn load_dataset(path: &Path, opts: CsvOptions) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(file, opts).map_err(|e| CliError::Data {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_dataset<R: std::io::Read>(input: R, opts: CsvOptions) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let skip = usize::from(opts.id_column);
    let mut coords = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let fields = record.len().saturating_sub(skip);
        match width {
            None if fields == 0 => return Err(DataError::NoColumns { row }),
            None => width = Some(fields),
            Some(w) if w != fields => {
                return Err(DataError::RaggedRows {
                    row,
                    expected: w,
                    found: fields,
                })
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate().skip(skip) {
            let value: f64 = field.parse().map_err(|_| DataError::Parse {
                row,
                column: col + 1,
                field: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonFinite {
                    row,
                    column: col + 1,
                    field: field.to_string(),
                });
            }
            coords.push(value);
        }
    }
    let m = width.ok_or(DataError::Empty)?;
    Ok(Dataset::new(coords, m)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One label per line.
pub fn write_labels(path: &Path, assignment: &Assignment) -> Result<(), CliError> {
    let mut w = create(path)?;
    for l in assignment.labels() {
        writeln!(w, "{l}").map_err(|e| CliError::io(path, e))?;
    }
    finish(path, w)
}

/// One center per line, coordinates comma-separated. Values are written in
/// shortest round-trip form, so reading them back is exact.
pub fn write_centers(path: &Path, model: &ClusterModel) -> Result<(), CliError> {
    let mut w = create(path)?;
    for i in 0..model.k() {
        let line: Vec<String> = model.center(i).iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| CliError::io(path, e))?;
    }
    finish(path, w)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a labels file written by [`write_labels`].
pub fn read_labels(path: &Path) -> Result<Vec<usize>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let label = line.trim().parse().map_err(|_| CliError::Data {
            path: path.to_path_buf(),
            source: DataError::Parse {
                row: i + 1,
                column: 1,
                field: line.clone(),
            },
        })?;
        out.push(label);
    }
    Ok(out)
}

/// Reads a centers file written by [`write_centers`].
pub fn read_centers(path: &Path) -> Result<Dataset, CliError> {
    load_dataset(path, CsvOptions::default())
}
