//! Result files: the long-format sweep CSV, the wide plot-data CSV, matrix
//! dumps and the text summary. Floats are written in Rust's shortest
//! round-trip form, so parsing a file back yields the exact values. Every
//! file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use otasec_core::precoding::PrecoderMethod;
use otasec_core::sim::{Stat, SweepResult, SweepRow};
use otasec_core::DMatrix;

pub const CSV_HEADER: [&str; 12] = [
    "snr_db",
    "method",
    "trials",
    "d_closed_mean",
    "d_closed_se",
    "s_closed_mean",
    "s_closed_se",
    "d_emp_mean",
    "d_emp_se",
    "s_emp_mean",
    "s_emp_se",
    "rejected_fraction",
];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating directory {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.as_file()
        .sync_all()
        .with_context(|| format!("syncing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV: {e}"))
}

fn opt_stat(s: Option<Stat>) -> [String; 2] {
    match s {
        Some(s) => [s.mean.to_string(), s.se.to_string()],
        None => [String::new(), String::new()],
    }
}

fn row_record(r: &SweepRow) -> Vec<String> {
    let [dm, ds] = opt_stat(r.d_emp);
    let [sm, ss] = opt_stat(r.s_emp);
    vec![
        r.snr_db.to_string(),
        r.method.as_str().to_string(),
        r.trials.to_string(),
        r.d_closed.mean.to_string(),
        r.d_closed.se.to_string(),
        r.s_closed.mean.to_string(),
        r.s_closed.se.to_string(),
        dm,
        ds,
        sm,
        ss,
        r.rejected_fraction.to_string(),
    ]
}

/// Long format: one row per `(SNR, method)`.
pub fn sweep_csv(result: &SweepResult) -> anyhow::Result<Vec<u8>> {
    let header: Vec<String> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = result.rows.iter().map(row_record).collect();
    csv_bytes(&header, &rows)
}

/// Wide format: `snr_db, trials`, then mean and standard error of `D` and
/// `S` for every method, plus the empirical pairs when any were computed.
pub fn plot_csv(result: &SweepResult) -> anyhow::Result<Vec<u8>> {
    let with_emp = result.rows.iter().any(|r| r.d_emp.is_some());
    let mut header = vec!["snr_db".to_string(), "trials".to_string()];
    for m in &result.methods {
        for col in ["d_closed_mean", "d_closed_se", "s_closed_mean", "s_closed_se"] {
            header.push(format!("{m}.{col}"));
        }
        if with_emp {
            for col in ["d_emp_mean", "d_emp_se", "s_emp_mean", "s_emp_se"] {
                header.push(format!("{m}.{col}"));
            }
        }
    }
    let mut rows = Vec::new();
    for (i, snr) in result.snr_grid_db.iter().enumerate() {
        let trials = result
            .methods
            .first()
            .and_then(|m| result.row(i, *m))
            .map_or(0, |r| r.trials);
        let mut rec = vec![snr.to_string(), trials.to_string()];
        for m in &result.methods {
            let r = result.row(i, *m).context("sweep result is missing a row")?;
            rec.extend([r.d_closed.mean, r.d_closed.se, r.s_closed.mean, r.s_closed.se].map(|v| v.to_string()));
            if with_emp {
                rec.extend(opt_stat(r.d_emp));
                rec.extend(opt_stat(r.s_emp));
            }
        }
        rows.push(rec);
    }
    csv_bytes(&header, &rows)
}

fn parse_f64(field: &str, what: &str) -> anyhow::Result<f64> {
    field.parse().with_context(|| format!("bad {what} value {field:?}"))
}

fn parse_opt_stat(mean: &str, se: &str) -> anyhow::Result<Option<Stat>> {
    if mean.is_empty() && se.is_empty() {
        return Ok(None);
    }
    Ok(Some(Stat {
        mean: parse_f64(mean, "mean")?,
        se: parse_f64(se, "standard error")?,
    }))
}

/// Reads rows written by [`sweep_csv`].
pub fn parse_sweep_csv(bytes: &[u8]) -> anyhow::Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        bail!("unexpected CSV header {:?}", header);
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let method: PrecoderMethod = f(1).parse().map_err(|e| anyhow::anyhow!("{e}"))?;
        rows.push(SweepRow {
            snr_db: parse_f64(f(0), "snr_db")?,
            method,
            trials: f(2).parse().context("bad trials value")?,
            d_closed: Stat {
                mean: parse_f64(f(3), "d_closed_mean")?,
                se: parse_f64(f(4), "d_closed_se")?,
            },
            s_closed: Stat {
                mean: parse_f64(f(5), "s_closed_mean")?,
                se: parse_f64(f(6), "s_closed_se")?,
            },
            d_emp: parse_opt_stat(f(7), f(8))?,
            s_emp: parse_opt_stat(f(9), f(10))?,
            rejected_fraction: parse_f64(f(11), "rejected_fraction")?,
        });
    }
    Ok(rows)
}

/// Companion path for the plot data: `dir/name.csv` becomes
/// `dir/name.plot.csv`.
pub fn plot_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    csv_path.with_file_name(format!("{stem}.plot.csv"))
}

/// Fixed-width table of closed-form means (and empirical means when present).
pub fn summary_table(result: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8}  {:<16} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9}",
        "snr_db", "method", "D", "S", "S_se", "D_emp", "S_emp", "rejected"
    );
    for r in &result.rows {
        let emp = |s: Option<Stat>| s.map_or("-".to_string(), |s| format!("{:.4}", s.mean));
        let _ = writeln!(
            out,
            "{:>8.2}  {:<16} {:>10.4} {:>10.4} {:>10.4} {:>10} {:>10} {:>9.4}",
            r.snr_db,
            r.method.as_str(),
            r.d_closed.mean,
            r.s_closed.mean,
            r.s_closed.se,
            emp(r.d_emp),
            emp(r.s_emp),
            r.rejected_fraction
        );
    }
    out
}

/// Precoder matrix dump: `#` comment lines, then one row of `A` per line.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDump {
    pub method: Option<PrecoderMethod>,
    /// The legitimate channel the matrix was designed for.
    pub h: Option<Vec<f64>>,
    pub matrix: DMatrix<f64>,
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    // `+ 0.0` turns -0 into 0.
    values
        .into_iter()
        .map(|v| (v + 0.0).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl MatrixDump {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(m) = self.method {
            let _ = writeln!(out, "# method: {m}");
        }
        if let Some(h) = &self.h {
            let _ = writeln!(out, "# h: {}", join(h.iter().copied()));
        }
        for row in self.matrix.row_iter() {
            let _ = writeln!(out, "{}", join(row.iter().copied()));
        }
        out
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut method = None;
        let mut h = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    match key.trim() {
                        "method" => {
                            method = Some(
                                value
                                    .trim()
                                    .parse()
                                    .map_err(|e| anyhow::anyhow!("line {}: {e}", n + 1))?,
                            )
                        }
                        "h" => h = Some(parse_row(value).with_context(|| format!("line {}", n + 1))?),
                        _ => {}
                    }
                }
                continue;
            }
            rows.push(parse_row(line).with_context(|| format!("line {}", n + 1))?);
        }
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            bail!("matrix rows have different lengths");
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(MatrixDump {
            method,
            h,
            matrix: DMatrix::from_row_slice(rows.len(), cols, &flat),
        })
    }
}

fn parse_row(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split_whitespace().map(|t| parse_f64(t, "matrix entry")).collect()
}
