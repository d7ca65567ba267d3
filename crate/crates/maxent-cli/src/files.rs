//! File formats shared by the subcommands: sign panels, coupling models and
//! deterministic number formatting.

use anyhow::{bail, Context, Result};
use maxent::core::{CouplingModel, SignPanel};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// Fixed 12-significant-digit float rendering: identical inputs produce
/// byte-identical report files.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".into();
    }
    format!("{x:.11e}")
}

/// Write `content` to `path`, creating parent directories.
pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating directory {}", parent.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Sign panels: CSV with a `time` column followed by one +-1 column per asset.
// ---------------------------------------------------------------------------

pub fn panel_to_csv(panel: &SignPanel) -> String {
    let mut out = String::from("time");
    for asset in panel.assets() {
        out.push(',');
        out.push_str(asset);
    }
    out.push('\n');
    for t in 0..panel.n_times() {
        out.push_str(&panel.times()[t]);
        for i in 0..panel.n_assets() {
            out.push(',');
            out.push_str(if panel.get(i, t) > 0 { "1" } else { "-1" });
        }
        out.push('\n');
    }
    out
}

pub fn panel_from_csv(content: &str) -> Result<SignPanel> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().context("panel file is empty")?;
    let mut fields = header.split(',');
    if fields.next() != Some("time") {
        bail!("panel header must start with `time`");
    }
    let assets: Vec<String> = fields.map(str::to_owned).collect();
    if assets.is_empty() {
        bail!("panel header lists no assets");
    }
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        times.push(cells.next().unwrap().to_owned());
        let row: Vec<i8> = cells
            .map(|c| match c.trim() {
                "1" | "+1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => bail!("line {}: sign must be 1 or -1, got `{other}`", k + 1),
            })
            .collect::<Result<_>>()?;
        if row.len() != assets.len() {
            bail!("line {}: {} signs for {} assets", k + 1, row.len(), assets.len());
        }
        rows.push(row);
    }
    // Library rows are per asset; the file stores one row per time.
    let per_asset: Vec<Vec<i8>> = (0..assets.len())
        .map(|i| rows.iter().map(|r| r[i]).collect())
        .collect();
    SignPanel::from_rows(assets, times, &per_asset).map_err(Into::into)
}

pub fn read_panel(path: &Path) -> Result<SignPanel> {
    let content =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    panel_from_csv(&content).with_context(|| format!("parsing panel {}", path.display()))
}

// ---------------------------------------------------------------------------
// Coupling models: JSON with explicit fields, independent of internal layout.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub n_units: usize,
    pub beta: f64,
    /// Row-major symmetric influence matrix with zero diagonal.
    pub influences: Vec<Vec<f64>>,
    pub fields: Vec<f64>,
    /// Lagged influence tensors K^tau, outermost index = lag - 1.
    #[serde(default)]
    pub lags: Vec<Vec<Vec<f64>>>,
}

impl ModelFile {
    pub fn from_model(model: &CouplingModel) -> Self {
        let n = model.n_units();
        let to_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect()
        };
        ModelFile {
            n_units: n,
            beta: model.beta(),
            influences: to_rows(model.influences()),
            fields: model.fields().iter().copied().collect(),
            lags: model.lags().iter().map(|k| to_rows(k)).collect(),
        }
    }

    pub fn to_model(&self) -> Result<CouplingModel> {
        let n = self.n_units;
        let from_rows = |rows: &Vec<Vec<f64>>| -> Result<DMatrix<f64>> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                bail!("matrix is not {n} x {n}");
            }
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        };
        let mut model = CouplingModel::new(
            from_rows(&self.influences)?,
            DVector::from_vec(self.fields.clone()),
        )?;
        if !self.lags.is_empty() {
            let lags = self
                .lags
                .iter()
                .map(from_rows)
                .collect::<Result<Vec<_>>>()?;
            model = model.with_lags(lags)?;
        }
        if self.beta != 1.0 {
            model = model.with_beta(self.beta)?;
        }
        Ok(model)
    }
}

pub fn read_model(path: &Path) -> Result<CouplingModel> {
    let content =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ModelFile = serde_json::from_str(&content)
        .with_context(|| format!("parsing model {}", path.display()))?;
    file.to_model()
}

pub fn write_model(path: &Path, model: &CouplingModel) -> Result<()> {
    let json = serde_json::to_string_pretty(&ModelFile::from_model(model))?;
    write_file(path, &(json + "\n"))
}

/// SHA-256 of a file's bytes, hex encoded — the checksum `ingest` reports.
pub fn sha256_hex(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_csv_round_trip() {
        let panel = SignPanel::from_rows(
            vec!["aaa".into(), "bbb".into()],
            vec!["t0".into(), "t1".into(), "t2".into()],
            &[vec![1, -1, 1], vec![-1, -1, 1]],
        )
        .unwrap();
        let csv = panel_to_csv(&panel);
        let back = panel_from_csv(&csv).unwrap();
        assert_eq!(back.assets(), panel.assets());
        assert_eq!(back.times(), panel.times());
        for t in 0..3 {
            for i in 0..2 {
                assert_eq!(back.get(i, t), panel.get(i, t));
            }
        }
    }

    #[test]
    fn panel_csv_rejects_bad_sign() {
        let err = panel_from_csv("time,a\n00,2\n").unwrap_err();
        assert!(err.to_string().contains("sign must be"));
    }

    #[test]
    fn model_json_round_trip() {
        let model = CouplingModel::square_lattice(2, 0.7);
        let file = ModelFile::from_model(&model);
        let back = file.to_model().unwrap();
        assert_eq!(back.influences(), model.influences());
        assert_eq!(back.fields(), model.fields());
    }

    #[test]
    fn fmt_is_stable() {
        assert_eq!(fmt(0.0), "0.00000000000e0");
        assert_eq!(fmt(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt(-12345.678), "-1.23456780000e4");
    }
}
