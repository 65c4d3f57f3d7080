//! CSV and manifest writers. Numbers are printed in the shortest form that
//! reads back to the same `f64`, so identical runs give identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::grid::{ComplexRadialField, Vec3};

pub fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Writes a header and rows of preformatted cells.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

/// Time series in the fixed column order; absent map quantities are empty.
pub fn write_timeseries(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    write_csv(
        path,
        &DiagnosticsRow::COLUMNS,
        rows.iter().map(|r| {
            r.cells()
                .iter()
                .map(|c| c.map(fmt).unwrap_or_default())
                .collect()
        }),
    )
}

/// One field snapshot: `r, re_q, im_q`, plus `u1, u2, u3` when a map is given.
pub fn write_snapshot(path: &Path, q: &ComplexRadialField, u: Option<&[Vec3]>) -> Result<()> {
    let nodes = q.grid().nodes();
    let header: &[&str] = if u.is_some() {
        &["r", "re_q", "im_q", "u1", "u2", "u3"]
    } else {
        &["r", "re_q", "im_q"]
    };
    write_csv(
        path,
        header,
        (0..nodes.len()).map(|i| {
            let z = q.values()[i];
            let mut row = vec![fmt(nodes[i]), fmt(z.re), fmt(z.im)];
            if let Some(u) = u {
                row.extend(u[i].iter().map(|&c| fmt(c)));
            }
            row
        }),
    )
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}
