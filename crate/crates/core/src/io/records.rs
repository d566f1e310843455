//! Participant-record CSV files.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::data::{ExampleSet, RawRecord, ResponseRecord};
use crate::world::LengthGrid;

pub const DATA_HEADER: [&str; 7] = [
    "participant_id",
    "contestant_order",
    "speaker_choice",
    "evidence_1",
    "response_1",
    "evidence_2",
    "response_2",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    /// 1-based line number in the file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub rows: usize,
    pub accepted: usize,
    pub rejected: Vec<RejectedRow>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} rows read, {} accepted, {} rejected", self.rows, self.accepted, self.rejected.len())?;
        for r in &self.rejected {
            writeln!(f, "  line {}: {}", r.line, r.reason)?;
        }
        Ok(())
    }
}

fn number(field: &str, name: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("{name}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Validation(format!("{name}: {field:?} is not finite")));
    }
    Ok(v)
}

fn optional(field: &str, name: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        number(field, name).map(Some)
    }
}

fn parse_row(row: &csv::StringRecord) -> Result<RawRecord> {
    if row.len() != DATA_HEADER.len() {
        return Err(Error::Validation(format!(
            "expected {} fields, found {}",
            DATA_HEADER.len(),
            row.len()
        )));
    }
    Ok(RawRecord {
        participant_id: row[0].trim().to_string(),
        contestant_order: row[1].parse()?,
        speaker_choice: number(&row[2], "speaker_choice")?,
        evidence_1: number(&row[3], "evidence_1")?,
        response_1: number(&row[4], "response_1")?,
        evidence_2: optional(&row[5], "evidence_2")?,
        response_2: optional(&row[6], "response_2")?,
    })
}

/// Read and validate records. A malformed header is an error; bad rows are
/// skipped and listed in the report.
pub fn ingest_reader<R: Read>(reader: R, grid: &LengthGrid, example: &ExampleSet) -> Result<(Vec<ResponseRecord>, ValidationReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let found: Vec<&str> = header.iter().collect();
    if found != DATA_HEADER {
        return Err(Error::Validation(format!(
            "malformed header: expected {:?}, found {:?}",
            DATA_HEADER.join(","),
            found.join(",")
        )));
    }
    let mut records = Vec::new();
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row?;
        report.rows += 1;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = parse_row(&row).and_then(|raw| ResponseRecord::validated(raw, grid, example));
        match parsed {
            Ok(r) if !seen.insert(r.participant_id.clone()) => report.rejected.push(RejectedRow {
                line,
                reason: format!("duplicate participant id {:?}", r.participant_id),
            }),
            Ok(r) => records.push(r),
            Err(e) => report.rejected.push(RejectedRow {
                line,
                reason: match e {
                    Error::Validation(m) => m,
                    other => other.to_string(),
                },
            }),
        }
    }
    report.accepted = records.len();
    Ok((records, report))
}

pub fn ingest(path: &Path, grid: &LengthGrid, example: &ExampleSet) -> Result<(Vec<ResponseRecord>, ValidationReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, grid, example)
}

/// Records as CSV text, optionally after a provenance header line.
pub fn write_records(records: &[ResponseRecord], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
    }
    out.push_str(&DATA_HEADER.join(","));
    out.push('\n');
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.participant_id,
            r.contestant_order,
            r.speaker_choice,
            r.evidence_1,
            r.response_1,
            opt(r.evidence_2),
            opt(r.response_2)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "participant_id,contestant_order,speaker_choice,evidence_1,response_1,evidence_2,response_2\n";

    fn read(text: &str) -> Result<(Vec<ResponseRecord>, ValidationReport)> {
        ingest_reader(text.as_bytes(), &LengthGrid::experiment(), &ExampleSet::default())
    }

    #[test]
    fn empty_data_section() {
        let (recs, report) = read(HEAD).unwrap();
        assert!(recs.is_empty());
        assert_eq!(report.rows, 0);
        assert!(report.rejected.is_empty());
    }

    #[test]
    fn bad_rows_are_reported() {
        let text = format!(
            "# comment line\n{HEAD}a,long_first,9,6,34.7,,\nb,long_first,9,6,150,,\nc,short_first,2,7,50,,\na,long_first,8,7,40,3,60\nd,long_first,9,x,1,,\n"
        );
        let (recs, report) = read(&text).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(report.rows, 5);
        assert_eq!(report.rejected.len(), 4);
        assert!(report.rejected[0].reason.contains("response out of range"));
        assert_eq!(report.rejected[0].line, 4);
        assert!(report.rejected[2].reason.contains("duplicate"));
    }

    #[test]
    fn malformed_header_is_an_error() {
        assert!(read("id,order\n1,2\n").is_err());
    }

    #[test]
    fn round_trip() {
        let text = format!("{HEAD}a,long_first,9,6,34.7,,\nb,short_first,4,2,61.25,8,40.5\n");
        let (recs, _) = read(&text).unwrap();
        let written = write_records(&recs, Some("# persuasion test\n"));
        let (again, _) = read(&written).unwrap();
        assert_eq!(recs, again);
        assert_eq!(written.lines().nth(1).unwrap(), HEAD.trim_end());
    }
}
