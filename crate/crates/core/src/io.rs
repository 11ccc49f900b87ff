//! On-disk formats. Class labels are 1-based in every file and 0-based in memory.
//!
//! | file            | format                                                       |
//! |-----------------|--------------------------------------------------------------|
//! | scores          | CSV `id,s_1,...,s_K`                                         |
//! | plausibilities  | CSV `id,p_1,...,p_K`                                         |
//! | labels          | CSV `id,label`                                               |
//! | augmented       | CSV `id,replicate,s_1,...,s_K`, replicate 1 is the original  |
//! | annotations     | JSON lines, `"type": "single"` or `"type": "ranking"`        |
//! | prediction sets | JSON lines `{"id", "classes", "p_values"?}`                  |

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::AugmentedBatch;
use crate::types::{check_unique, AnnotationRecord, Annotations, ClassIndex, Plausibilities, PredictionSet, ScoreTable};

/// Significant digits used for floats in CSV output.
pub const FLOAT_DIGITS: usize = 12;

/// Formats `v` rounded to [`FLOAT_DIGITS`] significant digits, in the
/// shortest decimal form that parses back to the rounded value.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{:.*e}", FLOAT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    rounded.to_string()
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => parse_error(path, line, format!("{other:?}")),
    }
}

struct CsvRows {
    header: Vec<String>,
    /// `(line, fields)` for each data record.
    records: Vec<(usize, Vec<String>)>,
}

fn read_csv(path: &Path) -> Result<CsvRows> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("id") {
        return Err(parse_error(path, 1, "header must start with `id`"));
    }
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        records.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(CsvRows { header, records })
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_error(path, line, format!("not a number: {field:?}")))
}

fn parse_label(path: &Path, line: usize, field: &str) -> Result<ClassIndex> {
    let label: i64 = field
        .parse()
        .map_err(|_| parse_error(path, line, format!("not an integer label: {field:?}")))?;
    if label < 1 {
        return Err(parse_error(path, line, format!("labels are 1-based, got {label}")));
    }
    Ok(label as ClassIndex - 1)
}

/// `(ids, rows)` of a CSV whose columns after `skip` are all numeric.
fn read_matrix(path: &Path, skip: usize) -> Result<(Vec<String>, Vec<Vec<f64>>, CsvRows)> {
    let csv = read_csv(path)?;
    if csv.header.len() <= skip {
        return Err(parse_error(path, 1, "no value columns"));
    }
    let mut ids = Vec::with_capacity(csv.records.len());
    let mut rows = Vec::with_capacity(csv.records.len());
    for (line, fields) in &csv.records {
        let values = fields[skip..]
            .iter()
            .map(|f| parse_f64(path, *line, f))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| v.is_nan()) {
            return Err(parse_error(path, *line, "NaN score"));
        }
        ids.push(fields[0].clone());
        rows.push(values);
    }
    Ok((ids, rows, csv))
}

fn write_matrix<'a>(
    path: &Path,
    prefix: &str,
    classes: usize,
    rows: impl Iterator<Item = (&'a str, &'a [f64])>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "id")?;
    for k in 1..=classes {
        write!(out, ",{prefix}_{k}")?;
    }
    writeln!(out)?;
    for (id, row) in rows {
        write!(out, "{id}")?;
        for &v in row {
            write!(out, ",{}", format_float(v))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable> {
    let (ids, rows, _) = read_matrix(path, 1)?;
    ScoreTable::new(ids, rows)
}

pub fn write_score_table(path: &Path, table: &ScoreTable) -> Result<()> {
    write_matrix(
        path,
        "s",
        table.num_classes(),
        table.ids().iter().map(String::as_str).zip(table.rows()),
    )
}

pub fn read_plausibilities(path: &Path) -> Result<(Vec<String>, Vec<Plausibilities>)> {
    let (ids, rows, csv) = read_matrix(path, 1)?;
    check_unique(&ids)?;
    let lambdas = rows
        .into_iter()
        .zip(&csv.records)
        .map(|(row, (line, _))| {
            Plausibilities::new(row).map_err(|e| parse_error(path, *line, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ids, lambdas))
}

pub fn write_plausibilities(path: &Path, ids: &[String], lambdas: &[Plausibilities]) -> Result<()> {
    let classes = lambdas.first().map_or(0, Plausibilities::num_classes);
    write_matrix(
        path,
        "p",
        classes,
        ids.iter().map(String::as_str).zip(lambdas.iter().map(Plausibilities::as_slice)),
    )
}

pub fn read_labels(path: &Path) -> Result<(Vec<String>, Vec<ClassIndex>)> {
    let csv = read_csv(path)?;
    if csv.header.len() != 2 {
        return Err(parse_error(path, 1, "expected columns `id,label`"));
    }
    let mut ids = Vec::with_capacity(csv.records.len());
    let mut labels = Vec::with_capacity(csv.records.len());
    for (line, fields) in &csv.records {
        ids.push(fields[0].clone());
        labels.push(parse_label(path, *line, &fields[1])?);
    }
    check_unique(&ids)?;
    Ok((ids, labels))
}

pub fn write_labels(path: &Path, ids: &[String], labels: &[ClassIndex]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "id,label")?;
    for (id, &y) in ids.iter().zip(labels) {
        writeln!(out, "{id},{}", y + 1)?;
    }
    out.flush()?;
    Ok(())
}

/// Groups rows by id in first-appearance order. Each id must list
/// replicates `1..=m` exactly once, in any order.
pub fn read_augmented(path: &Path) -> Result<Vec<AugmentedBatch>> {
    let csv = read_csv(path)?;
    if csv.header.get(1).map(String::as_str) != Some("replicate") || csv.header.len() < 3 {
        return Err(parse_error(path, 1, "expected columns `id,replicate,s_1,...`"));
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<(usize, usize, Vec<f64>)>> = HashMap::new();
    for (line, fields) in &csv.records {
        let replicate: usize = fields[1]
            .parse()
            .map_err(|_| parse_error(path, *line, format!("bad replicate index {:?}", fields[1])))?;
        let row = fields[2..]
            .iter()
            .map(|f| parse_f64(path, *line, f))
            .collect::<Result<Vec<_>>>()?;
        let id = fields[0].clone();
        if !groups.contains_key(&id) {
            order.push(id.clone());
        }
        groups.entry(id).or_default().push((replicate, *line, row));
    }
    order
        .into_iter()
        .map(|id| {
            let mut rows = groups.remove(&id).expect("grouped above");
            rows.sort_by_key(|r| r.0);
            for (expected, (replicate, line, _)) in (1..).zip(&rows) {
                if *replicate != expected {
                    return Err(parse_error(
                        path,
                        *line,
                        format!("id {id:?}: replicates must be 1..=m, found {replicate}"),
                    ));
                }
            }
            AugmentedBatch::new(id, rows.into_iter().map(|r| r.2).collect())
        })
        .collect()
}

pub fn write_augmented(path: &Path, batches: &[AugmentedBatch]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let classes = batches.first().map_or(0, AugmentedBatch::num_classes);
    write!(out, "id,replicate")?;
    for k in 1..=classes {
        write!(out, ",s_{k}")?;
    }
    writeln!(out)?;
    for batch in batches {
        for j in 0..batch.replicates() {
            write!(out, "{},{}", batch.id(), j + 1)?;
            for &v in batch.row(j) {
                write!(out, ",{}", format_float(v))?;
            }
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum AnnotationLine {
    Single { id: String, labels: Vec<i64> },
    Ranking { id: String, rankings: Vec<Vec<Vec<i64>>> },
}

fn to_zero_based(label: i64, classes: usize) -> Result<ClassIndex> {
    if label < 1 {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    Ok(label as ClassIndex - 1)
}

fn jsonl_lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let reader = BufReader::new(File::open(path)?);
    Ok(reader
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty())))
}

/// Reads annotation records and validates them against `classes`.
pub fn read_annotations(path: &Path, classes: usize) -> Result<Vec<AnnotationRecord>> {
    let mut records = Vec::new();
    for item in jsonl_lines(path)? {
        let (line, text) = item?;
        let parsed: AnnotationLine =
            serde_json::from_str(&text).map_err(|e| parse_error(path, line, e.to_string()))?;
        let record = match parsed {
            AnnotationLine::Single { id, labels } => AnnotationRecord::single(
                id,
                labels.into_iter().map(|k| to_zero_based(k, classes)).collect::<Result<_>>()?,
            ),
            AnnotationLine::Ranking { id, rankings } => AnnotationRecord::rankings(
                id,
                rankings
                    .into_iter()
                    .map(|ranking| {
                        ranking
                            .into_iter()
                            .map(|block| block.into_iter().map(|k| to_zero_based(k, classes)).collect())
                            .collect()
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        record.validate(classes)?;
        records.push(record);
    }
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    check_unique(&ids)?;
    Ok(records)
}

pub fn write_annotations(path: &Path, records: &[AnnotationRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let one = |k: &ClassIndex| *k as i64 + 1;
    for record in records {
        let line = match &record.payload {
            Annotations::SingleLabels(labels) => AnnotationLine::Single {
                id: record.id.clone(),
                labels: labels.iter().map(one).collect(),
            },
            Annotations::PartialRankings(rankings) => AnnotationLine::Ranking {
                id: record.id.clone(),
                rankings: rankings
                    .iter()
                    .map(|r| r.iter().map(|b| b.iter().map(one).collect()).collect())
                    .collect(),
            },
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetLine {
    id: String,
    classes: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_values: Option<Vec<f64>>,
}

pub fn write_prediction_sets(path: &Path, sets: &[PredictionSet]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for set in sets {
        let line = SetLine {
            id: set.id.clone(),
            classes: set.classes.iter().map(|&k| k as i64 + 1).collect(),
            p_values: set.p_values.clone(),
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_prediction_sets(path: &Path) -> Result<Vec<PredictionSet>> {
    let mut sets = Vec::new();
    for item in jsonl_lines(path)? {
        let (line, text) = item?;
        let parsed: SetLine =
            serde_json::from_str(&text).map_err(|e| parse_error(path, line, e.to_string()))?;
        let mut classes = parsed
            .classes
            .iter()
            .map(|&k| parse_label(path, line, &k.to_string()))
            .collect::<Result<Vec<_>>>()?;
        classes.sort_unstable();
        classes.dedup();
        sets.push(PredictionSet {
            id: parsed.id,
            classes,
            p_values: parsed.p_values,
        });
    }
    Ok(sets)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.to_string()))
}

/// Reorders `values` (keyed by `keys`) to follow `ids`. Every id must be
/// present exactly once on both sides.
pub fn align_by_id<T: Clone>(ids: &[String], keys: &[String], values: &[T]) -> Result<Vec<T>> {
    if keys.len() != values.len() {
        return Err(Error::IdMismatch(format!("{} ids for {} values", keys.len(), values.len())));
    }
    check_unique(keys)?;
    if ids.len() != keys.len() {
        return Err(Error::IdMismatch(format!("{} ids on one side, {} on the other", ids.len(), keys.len())));
    }
    let index: HashMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    ids.iter()
        .map(|id| {
            index
                .get(id.as_str())
                .map(|&i| values[i].clone())
                .ok_or_else(|| Error::IdMismatch(format!("id {id:?} missing")))
        })
        .collect()
}
