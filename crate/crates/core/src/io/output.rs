//! Sweep tables: CSV for analysis, whitespace tables for gnuplot.
//!
//! Frequencies and rates are written in Hz (angular values divided by 2π);
//! floats carry 12 significant digits.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{SweepRow, SweepVariable};

pub const CSV_COLUMNS: [&str; 13] = [
    "variable",
    "theta",
    "g_hz",
    "omega_m_hz",
    "omega_0_hz",
    "kappa1_eff_hz",
    "kappa2_eff_hz",
    "n1_analytic",
    "n1_numeric",
    "n2_analytic",
    "n2_numeric",
    "stable",
    "flags",
];

pub(crate) fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn check_rows(rows: &[SweepRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::param("sweep", "grid must not be empty"));
    }
    if let Some(i) = rows.iter().position(|r| r.analytic.len() != 2) {
        return Err(Error::Shape(format!(
            "row {i} has {} mechanical modes, the table holds two",
            rows[i].analytic.len()
        )));
    }
    Ok(())
}

fn numeric_fields(r: &SweepRow) -> [f64; 11] {
    [
        r.variable,
        r.theta,
        r.coupling / TAU,
        r.magnon_freq / TAU,
        r.drive_freq / TAU,
        r.effective_damping[0] / TAU,
        r.effective_damping[1] / TAU,
        r.analytic[0],
        r.numeric[0],
        r.analytic[1],
        r.numeric[1],
    ]
}

/// Renders sweep rows as CSV with a header row.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    check_rows(rows)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        let mut record: Vec<String> = numeric_fields(r).iter().map(|x| num(*x)).collect();
        record.push(r.stable.to_string());
        record.push(r.flags.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"));
        w.write_record(&record).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Renders sweep rows as a gnuplot table. Consecutive rows that share a
/// swept value form one block when a θ grid is crossed with it, so the
/// file can be fed to `splot` directly.
pub fn plot_data(rows: &[SweepRow], variable: SweepVariable, crossed: bool) -> Result<String> {
    check_rows(rows)?;
    let mut out = String::new();
    let _ = writeln!(out, "# sweep of {variable} [{}]", variable.unit());
    let _ = writeln!(
        out,
        "# columns: {variable}[{}] theta[rad] g[Hz] omega_m[Hz] omega_0[Hz] \
         kappa1_eff[Hz] kappa2_eff[Hz] n1_analytic[quanta] n1_numeric[quanta] \
         n2_analytic[quanta] n2_numeric[quanta] stable[0/1]",
        variable.unit()
    );
    let _ = writeln!(out, "# frequencies are cyclic (angular / 2π); NaN marks unstable points");
    let mut previous: Option<f64> = None;
    for r in rows {
        if crossed && previous.is_some_and(|p| p != r.variable) {
            out.push('\n');
        }
        previous = Some(r.variable);
        let fields: Vec<String> = numeric_fields(r).iter().map(|x| num(*x)).collect();
        let _ = writeln!(out, "{} {}", fields.join(" "), u8::from(r.stable));
    }
    Ok(out)
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::Flag;

    fn row(variable: f64, theta: f64) -> SweepRow {
        SweepRow {
            variable,
            theta,
            coupling: TAU * 1e7,
            magnon_freq: TAU * 1e10,
            drive_freq: TAU * 9.98e9,
            effective_damping: vec![TAU * 1e3, TAU * 2e3],
            analytic: vec![0.1, 0.2],
            numeric: vec![0.11, f64::NAN],
            stable: true,
            flags: vec![Flag::UnresolvedSideband { mode: 1 }, Flag::StrongCoupling { mode: 0 }],
        }
    }

    #[test]
    fn csv_header_and_formatting() {
        let text = sweep_csv(&[row(0.5, 0.5)]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 13);
        assert_eq!(fields[2], "1.00000000000e7");
        assert_eq!(fields[5], "1.00000000000e3");
        assert_eq!(fields[10], "NaN");
        assert_eq!(fields[11], "true");
        assert_eq!(fields[12], "unresolved_sideband_b2;strong_coupling_b1");
    }

    #[test]
    fn csv_parses_back() {
        let text = sweep_csv(&[row(0.1, 0.2), row(0.3, 0.4)]).unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let recs: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1][0].parse::<f64>().unwrap(), 0.3);
    }

    #[test]
    fn empty_rows_are_rejected() {
        assert!(sweep_csv(&[]).is_err());
        assert!(plot_data(&[], SweepVariable::Theta, false).is_err());
    }

    #[test]
    fn plot_blocks_split_on_outer_value() {
        let rows = [row(0.1, 0.2), row(0.1, 0.4), row(0.5, 0.2), row(0.5, 0.4)];
        let text = plot_data(&rows, SweepVariable::Temperature, true).unwrap();
        assert!(text.starts_with("# sweep of temperature [K]"));
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 5);
        assert!(body[2].is_empty());
        assert!(body[0].ends_with(" 1"));
        assert_eq!(body[0].split_whitespace().count(), 12);
    }

    #[test]
    fn write_file_creates_parents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/rows.csv");
        write_file(&path, "x\n").unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "x\n");
    }

    #[test]
    fn write_file_reports_unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "").unwrap();
        let err = write_file(&blocker.join("rows.csv"), "x").unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
