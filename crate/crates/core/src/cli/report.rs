use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use nullcode::Error;

use super::{usage, CliResult, Global, ReportArgs};

#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub command: String,
    pub field: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize)]
struct Claim66Row {
    p: f64,
    sigma: u64,
    mode: String,
    mean: f64,
    abs_err: f64,
}

fn numeric(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::Bool(b) => Some(*b as u8 as f64),
        _ => None,
    }
}

/// Mean, sample σ, min and max of every numeric or boolean result field.
pub fn summarize(command: &str, results: &[Value]) -> Vec<SummaryRow> {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        if let Value::Object(map) = r {
            for (k, v) in map {
                if let Some(x) = numeric(v) {
                    columns.entry(k.clone()).or_default().push(x);
                }
            }
        }
    }
    columns
        .into_iter()
        .map(|(field, xs)| {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            SummaryRow {
                command: command.to_owned(),
                field,
                count: xs.len(),
                mean,
                std: var.sqrt(),
                min: xs.iter().copied().fold(f64::INFINITY, f64::min),
                max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> CliResult<()> {
    write_csv(path, rows)
}

struct Loaded {
    /// Result objects per command, in file then line order.
    results: BTreeMap<String, Vec<Value>>,
    files: usize,
}

fn parse_err(file: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { file: file.display().to_string(), line, msg: msg.into() }
}

fn load(pattern: &str) -> CliResult<Loaded> {
    let paths = glob::glob(pattern).map_err(|e| usage(format!("--glob: {e}")))?;
    let mut files: Vec<PathBuf> = paths.filter_map(|p| p.ok()).collect();
    files.sort();
    let mut results: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    let mut schemas: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for file in &files {
        let text = std::fs::read_to_string(file)?;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(line).map_err(|e| parse_err(file, lineno, e.to_string()))?;
            let command = v
                .get("command")
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err(file, lineno, "record has no command"))?
                .to_owned();
            let result = match v.get("result") {
                Some(r @ Value::Object(_)) => r.clone(),
                _ => return Err(parse_err(file, lineno, "record has no result object").into()),
            };
            let keys: BTreeSet<String> = result.as_object().into_iter().flat_map(|m| m.keys().cloned()).collect();
            match schemas.get(&command) {
                Some(s) if *s != keys => {
                    return Err(parse_err(file, lineno, format!("result fields differ from earlier {command} records")).into())
                }
                Some(_) => {}
                None => {
                    schemas.insert(command.clone(), keys);
                }
            }
            results.entry(command).or_default().push(result);
        }
    }
    Ok(Loaded { results, files: files.len() })
}

pub fn run(args: &ReportArgs, g: &Global) -> CliResult<bool> {
    let loaded = load(&args.glob)?;
    let mut rows = Vec::new();
    let mut claim66 = Vec::new();
    for (command, results) in &loaded.results {
        rows.extend(summarize(command, results));
        if command == "qsim claim66" {
            for r in results {
                claim66.push(Claim66Row {
                    p: r["p"].as_f64().unwrap_or(f64::NAN),
                    sigma: r["sigma"].as_u64().unwrap_or(0),
                    mode: r["mode"].as_str().unwrap_or_default().to_owned(),
                    mean: r["mean"].as_f64().unwrap_or(f64::NAN),
                    abs_err: r["abs_err"].as_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    match &g.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_csv(&dir.join("summary.csv"), &rows)?;
            for command in loaded.results.keys() {
                let per: Vec<&SummaryRow> = rows.iter().filter(|r| &r.command == command).collect();
                write_csv(&dir.join(format!("{}.csv", command.replace(' ', "-"))), &per)?;
            }
            if !claim66.is_empty() {
                write_csv(&dir.join("claim66-table.csv"), &claim66)?;
            }
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    if let Some(csv) = &g.csv {
        write_summary(csv, &rows)?;
    }
    log::info!("report: {} files, {} commands", loaded.files, loaded.results.len());
    Ok(true)
}
