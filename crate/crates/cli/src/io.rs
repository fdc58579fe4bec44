//! CSV readers and atomic CSV writers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use thermorisk_core::infoflow::JointPmf;
use thermorisk_core::LossSample;

use crate::error::{CliError, Result};

/// Probabilities read from disk must sum to one within this before they are
/// renormalized.
pub const FILE_SUM_TOL: f64 = 1e-9;

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn headers(rdr: &mut csv::Reader<std::fs::File>, path: &Path) -> Result<Vec<String>> {
    let h = rdr.headers().map_err(|e| CliError::input(path, e.to_string()))?;
    Ok(h.iter().map(str::to_owned).collect())
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: u64, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| CliError::input(path, format!("line {line}: cannot parse {name} from {raw:?}")))
}

fn check_sum(path: &Path, total: f64) -> Result<()> {
    if (total - 1.0).abs() > FILE_SUM_TOL {
        return Err(CliError::input(path, format!("probabilities sum to {total}, not 1 within {FILE_SUM_TOL}")));
    }
    Ok(())
}

/// Reads a `loss,prob` file.
pub fn read_losses(path: &Path) -> Result<LossSample> {
    let mut rdr = reader(path)?;
    if headers(&mut rdr, path)? != ["loss", "prob"] {
        return Err(CliError::input(path, "expected header `loss,prob`"));
    }
    let (mut losses, mut probs) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let line = row as u64 + 2;
        let rec = rec.map_err(|e| CliError::input(path, e.to_string()))?;
        losses.push(parse_field::<f64>(path, line, "loss", &rec[0])?);
        probs.push(parse_field::<f64>(path, line, "prob", &rec[1])?);
    }
    if losses.is_empty() {
        return Err(CliError::input(path, "no sample points"));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(CliError::input(path, "probabilities must be finite and nonnegative"));
    }
    check_sum(path, probs.iter().sum())?;
    LossSample::from_weights(losses, probs).map_err(|e| CliError::input(path, e.to_string()))
}

/// Reads an `x,y1,...,yn,prob` file of zero-based alphabet indices. Alphabet
/// sizes are the largest index plus one; absent cells have probability 0.
pub fn read_joint(path: &Path) -> Result<JointPmf> {
    let mut rdr = reader(path)?;
    let header = headers(&mut rdr, path)?;
    let n = header.len().saturating_sub(2);
    let expected: Vec<String> =
        std::iter::once("x".to_owned()).chain((1..=n).map(|i| format!("y{i}"))).chain(std::iter::once("prob".into())).collect();
    if n == 0 || header != expected {
        return Err(CliError::input(path, "expected header `x,y1,...,yn,prob` with n >= 1"));
    }
    let mut cells: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut dims = vec![0usize; n + 1];
    for (row, rec) in rdr.records().enumerate() {
        let line = row as u64 + 2;
        let rec = rec.map_err(|e| CliError::input(path, e.to_string()))?;
        let index = (0..=n).map(|a| parse_field::<usize>(path, line, &header[a], &rec[a])).collect::<Result<Vec<_>>>()?;
        let p: f64 = parse_field(path, line, "prob", &rec[n + 1])?;
        if !(p.is_finite() && p >= 0.0) {
            return Err(CliError::input(path, format!("line {line}: probability must be finite and nonnegative")));
        }
        for (d, &i) in dims.iter_mut().zip(&index) {
            *d = (*d).max(i + 1);
        }
        if cells.insert(index, p).is_some() {
            return Err(CliError::input(path, format!("line {line}: duplicate cell")));
        }
    }
    let total: f64 = cells.values().sum();
    check_sum(path, total)?;
    let size = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).filter(|&s| s <= thermorisk_core::infoflow::MAX_CELLS);
    let size = size.ok_or_else(|| CliError::input(path, "joint alphabet too large"))?;
    let mut probs = vec![0.0; size];
    for (index, p) in cells {
        let flat = index.iter().zip(&dims).fold(0usize, |acc, (&i, &d)| acc * d + i);
        probs[flat] = p / total;
    }
    JointPmf::new(dims, probs).map_err(|e| CliError::input(path, e.to_string()))
}

/// A CSV table assembled in memory.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("writing to memory");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("flushing to memory")
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|source| CliError::Io { path: "<stdout>".into(), source });
    };
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).and_then(|_| tmp.flush()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
