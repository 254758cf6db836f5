//! File formats: model documents, project tables, CDF exports and report
//! bundles. Every write goes to a temporary file first and is renamed into
//! place, so readers never see a half-written file.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

mod export;
mod model_doc;
mod project_table;

pub use export::{
    cdf_to_string, emit_cdf, emit_report, emit_report_with_cdfs, format_significant,
    render_summary, report_to_json, ReportBundle, REPORT_FILE, SUMMARY_FILE,
};
pub use model_doc::{load_model, model_to_string, parse_model, save_model};
pub use project_table::{load_projects, parse_projects, projects_to_string, save_projects};

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
