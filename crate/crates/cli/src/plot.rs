//! Columnar plot-data emission from report JSON.

use crate::error::LabError;
use crate::report::VerificationReport;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes one `<experiment>-<curve>.dat` file per curve in the report:
/// whitespace-separated columns `x y [ci_lo ci_hi] [extra...]`, one header
/// line. Reports without curves produce nothing; an empty curve produces a
/// header-only file.
pub fn emit_plot_data(report: &VerificationReport, out_dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, rows) in &report.curves {
        let path = out_dir.join(format!("{}-{}.dat", report.experiment, name));
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(w, "# {} : {}", report.experiment, name)?;
        for row in rows {
            let cols: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cols.join(" "))?;
        }
        written.push(path);
    }
    Ok(written)
}
