//! CSV output: header row, comma separation, 17 significant digits, rows
//! in the fixed grid/config order.

use momdens::{Error, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Format a float with 17 significant digits (round-trip exact).
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut out = std::io::BufWriter::new(file);
    let mut emit = |line: &str| {
        writeln!(out, "{line}").map_err(|e| Error::Config(format!("write failed: {e}")))
    };
    emit(&header.join(","))?;
    for row in rows {
        emit(&row.join(","))?;
    }
    Ok(())
}

/// Resolve the output path: explicit value, else `<command>.csv` under
/// `$MOMDENS_OUT_DIR` (or the working directory).
pub fn out_path(explicit: Option<PathBuf>, command: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let dir = std::env::var_os("MOMDENS_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        dir.join(format!("{command}.csv"))
    })
}
