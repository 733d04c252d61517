//! Score files: one record per line, `id, score, label, attack_type`.

use std::fmt::Write as _;
use std::path::Path;

use super::{Prediction, PredictionSet};
use crate::data::Label;
use crate::error::{Error, Result};

pub fn write_score_file(path: &Path, preds: &PredictionSet) -> Result<()> {
    let mut out = String::from("# id, score, label, attack_type\n");
    for r in preds.records() {
        let _ = writeln!(
            out,
            "{}, {}, {}, {}",
            r.id,
            r.score,
            r.label,
            r.attack_type.as_deref().unwrap_or("")
        );
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_score_file(path: &Path) -> Result<PredictionSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file);
    let mut records = Vec::new();
    for row in reader.records() {
        let fail = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let row = row.map_err(|e| fail(e.position().map(|p| p.line() as usize).unwrap_or(0), e.to_string()))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() != 4 {
            return Err(fail(line, format!("expected 4 fields, found {}", row.len())));
        }
        let score: f64 = row[1]
            .parse()
            .map_err(|_| fail(line, format!("`{}` is not a score", &row[1])))?;
        let label: Label = row[2].parse().map_err(|m| fail(line, m))?;
        records.push(Prediction {
            id: row[0].to_string(),
            score,
            label,
            attack_type: (!row[3].is_empty()).then(|| row[3].to_string()),
        });
    }
    PredictionSet::new(records)
}
