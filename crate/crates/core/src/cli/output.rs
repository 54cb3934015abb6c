//! Result directories: CSV tables, manifest and plot, each written atomically.

use super::plot::emit_plot;
use crate::error::{Error, Result};
use crate::verify::{EnsembleSummary, Table};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Number with 17 significant digits, independent of locale.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn table_csv(t: &Table) -> String {
    let mut s = t.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
    s.push('\n');
    for row in &t.rows {
        s.push_str(&row.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn summary_csv(sum: &EnsembleSummary) -> String {
    let mut s = String::from("statistic,value,stderr,ci_lo,ci_hi,threshold,verdict\n");
    for st in &sum.statistics {
        let (lo, hi) = st.interval.map_or((None, None), |(a, b)| (Some(a), Some(b)));
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&st.name),
            fmt_num(st.value),
            fmt_opt(st.stderr),
            fmt_opt(lo),
            fmt_opt(hi),
            fmt_opt(st.threshold),
            st.verdict.as_str()
        ));
    }
    s
}

/// Provenance recorded next to the results. Nothing here depends on the thread count.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub label: String,
    pub seed: u64,
    pub config_sha256: String,
    pub thresholds_sha256: String,
}

pub fn manifest(sum: &EnsembleSummary, prov: &Provenance) -> String {
    use toml::{Table as T, Value};
    let mut root = T::new();
    root.insert("experiment".into(), Value::String(sum.experiment.clone()));
    root.insert("subcommand".into(), Value::String(prov.command.clone()));
    root.insert("label".into(), Value::String(prov.label.clone()));
    root.insert("verdict".into(), Value::String(sum.verdict.as_str().into()));
    root.insert("code_version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    root.insert("config_sha256".into(), Value::String(prov.config_sha256.clone()));
    root.insert("thresholds_sha256".into(), Value::String(prov.thresholds_sha256.clone()));
    root.insert("seed".into(), Value::String(prov.seed.to_string()));
    root.insert("n_replicas".into(), Value::Integer(sum.n_replicas as i64));
    root.insert("notes".into(), Value::Array(sum.notes.iter().cloned().map(Value::String).collect()));
    if let Some(s) = &sum.sched {
        let t: T = s.manifest_entries().into_iter().map(|(k, v)| (k.to_string(), Value::String(fmt_num(v)))).collect();
        root.insert("schedule".into(), Value::Table(t));
    }
    let params: T = sum.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    root.insert("params".into(), Value::Table(params));
    let th: T = sum.thresholds.iter().map(|(k, v)| (k.clone(), Value::String(fmt_num(*v)))).collect();
    root.insert("thresholds".into(), Value::Table(th));
    toml::to_string(&root).expect("manifest serializes")
}

/// Write `<root>/<experiment>/<label>/{manifest.toml, data/*.csv, plot.svg, summary.csv}`.
///
/// `summary.csv` goes last, so its presence marks a complete directory.
pub fn write_results(root: &Path, sum: &EnsembleSummary, prov: &Provenance) -> Result<PathBuf> {
    let dir = root.join(&sum.experiment).join(&prov.label);
    let data = dir.join("data");
    std::fs::create_dir_all(&data)?;
    for t in &sum.tables {
        write_atomic(&data.join(format!("{}.csv", t.name)), table_csv(t).as_bytes())?;
    }
    if let Some(p) = &sum.plot {
        write_atomic(&dir.join("plot.svg"), emit_plot(p)?.as_bytes())?;
    }
    write_atomic(&dir.join("manifest.toml"), manifest(sum, prov).as_bytes())?;
    write_atomic(&dir.join("summary.csv"), summary_csv(sum).as_bytes())?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Statistic;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn summary_rows_match_statistics() {
        let mut s = EnsembleSummary::new("demo", None, 0);
        s.push(Statistic::report("x", 1.0).with_interval(0.5, 1.5).judged(2.0, true));
        s.push(Statistic::report("y, quoted", 2.0));
        let csv = summary_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",pass"));
        assert!(lines[2].starts_with("\"y, quoted\","));
    }

    #[test]
    fn results_directory_layout() {
        let root = tempfile::tempdir().unwrap();
        let mut s = EnsembleSummary::new("demo", None, 0);
        s.push(Statistic::report("x", 1.0));
        let mut t = Table::new("values", &["a", "b"]);
        t.push(vec![1.0, 2.0]);
        s.tables.push(t);
        let prov =
            Provenance { command: "demo".into(), label: "run".into(), seed: 3, config_sha256: "c".into(), thresholds_sha256: "t".into() };
        let dir = write_results(root.path(), &s, &prov).unwrap();
        assert_eq!(dir, root.path().join("demo").join("run"));
        for f in ["summary.csv", "manifest.toml", "data/values.csv"] {
            assert!(dir.join(f).is_file(), "{f}");
        }
        let man: toml::Table = std::fs::read_to_string(dir.join("manifest.toml")).unwrap().parse().unwrap();
        assert_eq!(man["seed"].as_str(), Some("3"));
        // No stray temporary files remain.
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 3);
    }
}
