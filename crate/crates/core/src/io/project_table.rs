//! Project tables: CSV with a header row.
//!
//! | column                    | meaning                                   |
//! |---------------------------|-------------------------------------------|
//! | `project_id`              | unique id                                 |
//! | `size`                    | product size                              |
//! | `effort_<phase>`          | effort spent in a phase                   |
//! | `factor_<f>_expert_<e>`   | expert `e`'s rating of factor `f`         |
//! | `attr_<name>`             | any other attribute, numeric or label     |
//!
//! A blank cell means "not measured" and is kept as an absence. Ratings are
//! stored reverse-coded, so 0 is always the nominal level.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{read_file, write_atomic};
use crate::error::{Error, Result};
use crate::model::RatingVector;
use crate::project::{AttributeValue, ProjectRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Column {
    Id,
    Size,
    Effort(String),
    Rating { factor: String, expert: String },
    Attribute(String),
}

fn classify(name: &str) -> Option<Column> {
    let name = name.trim();
    if name == "project_id" {
        return Some(Column::Id);
    }
    if name == "size" {
        return Some(Column::Size);
    }
    if let Some(phase) = name.strip_prefix("effort_").filter(|s| !s.is_empty()) {
        return Some(Column::Effort(phase.to_string()));
    }
    if let Some(rest) = name.strip_prefix("factor_") {
        // factor ids may themselves contain "_expert_"; the last one splits
        let (factor, expert) = rest.rsplit_once("_expert_")?;
        if factor.is_empty() || expert.is_empty() {
            return None;
        }
        return Some(Column::Rating {
            factor: factor.to_string(),
            expert: expert.to_string(),
        });
    }
    name.strip_prefix("attr_")
        .filter(|s| !s.is_empty())
        .map(|a| Column::Attribute(a.to_string()))
}

fn parse_error(path: &Path, line: u64, column: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: line as usize,
        column,
        message,
    }
}

fn parse_decimal(cell: &str) -> Option<f64> {
    // Rust's float grammar also takes "inf" and "NaN"; a table must not.
    let ok = !cell.is_empty()
        && cell
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    ok.then(|| cell.parse::<f64>().ok()).flatten().filter(|v| v.is_finite())
}

/// Parses a project table. `path` only labels errors.
pub fn parse_projects(text: &str, path: &Path) -> Result<Vec<ProjectRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, 1, 1, e.to_string()))?
        .clone();

    let mut columns = Vec::with_capacity(headers.len());
    let mut seen = BTreeSet::new();
    for (i, name) in headers.iter().enumerate() {
        let column = classify(name).ok_or_else(|| {
            parse_error(path, 1, i + 1, format!("unknown column `{name}`"))
        })?;
        if !seen.insert(name.trim()) {
            return Err(parse_error(path, 1, i + 1, format!("duplicate column `{name}`")));
        }
        columns.push(column);
    }
    let id_col = columns
        .iter()
        .position(|c| *c == Column::Id)
        .ok_or_else(|| parse_error(path, 1, 1, "missing `project_id` column".into()))?;

    let mut projects = Vec::new();
    let mut ids = BTreeSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, 1, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let id = row.get(id_col).unwrap_or_default().trim().to_string();
        if id.is_empty() {
            return Err(parse_error(path, line, id_col + 1, "empty project_id".into()));
        }
        if !ids.insert(id.clone()) {
            return Err(parse_error(path, line, id_col + 1, format!("duplicate project_id `{id}`")));
        }
        let mut record = ProjectRecord {
            id,
            ..ProjectRecord::default()
        };
        let mut ratings: BTreeMap<String, RatingVector> = BTreeMap::new();
        for (i, (column, cell)) in columns.iter().zip(row.iter()).enumerate() {
            let cell = cell.trim();
            if cell.is_empty() || *column == Column::Id {
                continue;
            }
            let number = || {
                parse_decimal(cell).ok_or_else(|| {
                    parse_error(path, line, i + 1, format!("`{cell}` is not a decimal number"))
                })
            };
            match column {
                Column::Id => {}
                Column::Size => record.size = Some(number()?),
                Column::Effort(phase) => {
                    record.phase_efforts.insert(phase.clone(), number()?);
                }
                Column::Rating { factor, expert } => {
                    let rating: u32 = cell.parse().map_err(|_| {
                        parse_error(path, line, i + 1, format!("`{cell}` is not a rating level"))
                    })?;
                    ratings.entry(expert.clone()).or_default().insert(factor.clone(), rating);
                }
                Column::Attribute(name) => {
                    let value = match parse_decimal(cell) {
                        Some(v) => AttributeValue::Numeric(v),
                        None => AttributeValue::Categorical(cell.to_string()),
                    };
                    record.attributes.insert(name.clone(), value);
                }
            }
        }
        record.ratings = ratings;
        projects.push(record);
    }
    Ok(projects)
}

pub fn load_projects(path: &Path) -> Result<Vec<ProjectRecord>> {
    parse_projects(&read_file(path)?, path)
}

/// Canonical table: id, size, phases, ratings by (factor, expert), then
/// attributes, each group in name order.
pub fn projects_to_string(projects: &[ProjectRecord]) -> String {
    let phases: BTreeSet<&str> = projects.iter().flat_map(|p| p.phases()).collect();
    let cells: BTreeSet<(&str, &str)> = projects
        .iter()
        .flat_map(|p| {
            p.ratings
                .iter()
                .flat_map(|(expert, r)| r.iter().map(move |(f, _)| (f, expert.as_str())))
        })
        .collect();
    let attributes: BTreeSet<&str> = projects
        .iter()
        .flat_map(|p| p.attributes.keys().map(String::as_str))
        .collect();

    let mut header = vec!["project_id".to_string(), "size".to_string()];
    header.extend(phases.iter().map(|p| format!("effort_{p}")));
    header.extend(cells.iter().map(|(f, e)| format!("factor_{f}_expert_{e}")));
    header.extend(attributes.iter().map(|a| format!("attr_{a}")));

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&header).expect("in-memory write");
    for p in projects {
        let mut row = vec![p.id.clone(), p.size.map(|s| s.to_string()).unwrap_or_default()];
        row.extend(
            phases
                .iter()
                .map(|ph| p.phase_efforts.get(*ph).map(|e| e.to_string()).unwrap_or_default()),
        );
        row.extend(cells.iter().map(|(f, e)| {
            p.ratings
                .get(*e)
                .and_then(|r| r.get(f))
                .map(|r| r.to_string())
                .unwrap_or_default()
        }));
        row.extend(
            attributes
                .iter()
                .map(|a| p.attributes.get(*a).map(AttributeValue::label).unwrap_or_default()),
        );
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn save_projects(projects: &[ProjectRecord], path: &Path) -> Result<()> {
    write_atomic(path, projects_to_string(projects).as_bytes())
}
