//! Point-cloud CSV ingestion and report formatting.
//!
//! Cloud files list points as rows: `n` rows of `d` comma-separated values.
//! A single file may hold several clouds separated by blank lines, or a
//! directory may hold one cloud per `.csv` file (read in name order). The
//! library works in the transposed `d x n` convention internally.

use std::path::Path;

use orbitsep::{DMatrix, PointCloud};

use crate::CliError;

pub fn read_clouds(path: &Path, header: bool) -> Result<Vec<PointCloud>, CliError> {
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| CliError::data(format!("cannot read directory {}: {e}", path.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::data(format!(
                "no .csv files in {}",
                path.display()
            )));
        }
        let mut clouds = Vec::new();
        for file in files {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", file.display())))?;
            let mut parsed = parse_cloud_blocks(&text, header, &file.display().to_string())?;
            clouds.append(&mut parsed);
        }
        Ok(clouds)
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        parse_cloud_blocks(&text, header, &path.display().to_string())
    }
}

fn parse_cloud_blocks(
    text: &str,
    header: bool,
    origin: &str,
) -> Result<Vec<PointCloud>, CliError> {
    let mut blocks: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (lineno, raw) in text.lines().enumerate() {
        if lineno == 0 && header {
            continue;
        }
        let line = raw.trim();
        if line.is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
        } else {
            blocks.last_mut().unwrap().push((lineno + 1, line));
        }
    }
    blocks.retain(|b| !b.is_empty());
    if blocks.is_empty() {
        return Err(CliError::data(format!("{origin}: no data rows")));
    }
    blocks
        .into_iter()
        .map(|rows| parse_cloud(&rows, origin))
        .collect()
}

fn parse_cloud(rows: &[(usize, &str)], origin: &str) -> Result<PointCloud, CliError> {
    let n = rows.len();
    let mut parsed: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (lineno, line) in rows {
        let vals: Result<Vec<f64>, _> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect();
        let vals = vals.map_err(|e| {
            CliError::data(format!("{origin}:{lineno}: cannot parse row: {e}"))
        })?;
        if let Some(first) = parsed.first() {
            if vals.len() != first.len() {
                return Err(CliError::data(format!(
                    "{origin}:{lineno}: row has {} values, expected {}",
                    vals.len(),
                    first.len()
                )));
            }
        }
        parsed.push(vals);
    }
    let d = parsed[0].len();
    // rows are points, so transpose into the d x n matrix convention
    let mat = DMatrix::from_fn(d, n, |i, j| parsed[j][i]);
    PointCloud::new(mat).map_err(|e| CliError::data(format!("{origin}: {e}")))
}

/// One CSV row per cloud, shortest round-trip float formatting.
pub fn format_rows(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for values in rows {
        let fields: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Formats a cloud back in input orientation (points as rows).
pub fn format_cloud(x: &PointCloud) -> String {
    let mut rows = Vec::with_capacity(x.n());
    for j in 0..x.n() {
        rows.push(x.point(j));
    }
    format_rows(&rows)
}

pub fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
