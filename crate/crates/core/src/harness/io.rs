//! JSON-lines and CSV report files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

/// Appends records to a JSON-lines file, one object per line.
pub struct JsonlWriter {
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?) })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = JsonlWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Writes flat records as CSV with a header row in field order.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::PhaseSweepRow;

    #[test]
    fn csv_round_trips_exactly() {
        let rows = vec![
            PhaseSweepRow { gamma: 5.0, n_samples: 3, mean_rate: 1.0 / 3.0, mean_gain: 15.999999999999998, error_free_rate: 2e7 },
            PhaseSweepRow { gamma: 1e6, n_samples: 3, mean_rate: f64::MIN_POSITIVE, mean_gain: 0.1 + 0.2, error_free_rate: 1e-300 },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("gamma,n_samples,mean_rate,mean_gain,error_free_rate\n"));
        assert_eq!(read_csv::<PhaseSweepRow>(&path).unwrap(), rows);
    }

    #[test]
    fn jsonl_round_trips_exactly() {
        let rows: Vec<(u64, f64, Vec<f64>)> = vec![(1, 0.1 + 0.2, vec![1e-310, -0.0]), (2, std::f64::consts::PI, vec![])];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_jsonl(&path, &rows).unwrap();
        let back: Vec<(u64, f64, Vec<f64>)> = read_jsonl(&path).unwrap();
        assert_eq!(back, rows);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    }
}
