//! CSV data files with JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::experiments::ExperimentOutput;
use crate::io::manifest::{manifest_to_toml, RunManifest};
use crate::results::{Column, Table};
use crate::spin::{build_hamiltonian, eigenspectrum, ChargeSector, Operator, SystemConfig};

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `table` as CSV: one header row of `name_unit` labels, then data.
pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    if let Some(bad) = table.rows.iter().flatten().find(|v| !v.is_finite()) {
        return Err(Error::OutOfDomain(format!(
            "refusing to write non-finite value {bad} to {}",
            path.display()
        )));
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(table.columns.iter().map(Column::header))
        .map_err(ser)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| format_value(v)))
            .map_err(ser)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn sidecar(table: &Table, manifest: &RunManifest, csv_name: &str) -> Value {
    let metadata: Map<String, Value> = table
        .metadata
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    json!({
        "experiment": manifest.spec.id.as_str(),
        "data_file": csv_name,
        "columns": table.columns,
        "rows": table.rows.len(),
        "spec": manifest.spec,
        "manifest": manifest_to_toml(manifest),
        "defaults_applied": manifest.defaults_applied,
        "threads": manifest.threads,
        "seed": manifest.seed,
        "metadata": metadata,
        "code_version": env!("CARGO_PKG_VERSION"),
        "created": chrono::Utc::now().to_rfc3339(),
    })
}

/// Writes `<prefix>.csv` and `<prefix>.json` into `dir`, creating it if
/// needed. The sidecar holds the fully resolved manifest, so the run can be
/// repeated from it alone.
pub fn write_table(table: &Table, manifest: &RunManifest, dir: &Path) -> Result<WrittenFiles> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = dir.join(format!("{}.csv", manifest.output.prefix));
    let sidecar_path = dir.join(format!("{}.json", manifest.output.prefix));
    write_csv(table, &csv)?;
    let csv_name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = serde_json::to_string_pretty(&sidecar(table, manifest, &csv_name))
        .map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(&sidecar_path, text + "\n").map_err(io_err(&sidecar_path))?;
    Ok(WrittenFiles {
        csv,
        sidecar: sidecar_path,
    })
}

/// Writes an experiment result (trace or grid) via [`write_table`].
pub fn write_outputs(
    output: &ExperimentOutput,
    manifest: &RunManifest,
    dir: &Path,
) -> Result<WrittenFiles> {
    let table = match output {
        ExperimentOutput::Trace(t) => t.to_table(),
        ExperimentOutput::Grid(g) => g.to_table(),
    };
    write_table(&table, manifest, dir)
}

/// Eigenenergies of the (1,1) and (0,2) block of H as a function of Δ.
///
/// One row per detuning; columns are Δ followed by the energies in
/// ascending order. The (0,1) states are left out because they do not mix
/// with the two-electron block.
pub fn spectrum_table(config: &SystemConfig, deltas: &[f64]) -> Result<Table> {
    config.validate()?;
    let basis = config.basis()?;
    let keep: Vec<usize> = (0..basis.dim())
        .filter(|&i| basis.charge_sector(basis.electron_of(i)) != ChargeSector::ZeroOne)
        .collect();
    let m = keep.len();
    let mut columns = vec![Column::new("delta", "MHz")];
    columns.extend((0..m).map(|k| Column::new(format!("E{k}"), "MHz")));
    let mut rows = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let cfg = SystemConfig {
            delta: d,
            ..config.clone()
        };
        let h = build_hamiltonian(&cfg, &basis)?;
        let block = ndarray::Array2::from_shape_fn((m, m), |(r, c)| h.get(keep[r], keep[c]));
        let spec = eigenspectrum(&Operator::new(block)?)?;
        let mut row = Vec::with_capacity(m + 1);
        row.push(d);
        row.extend(spec.energies);
        rows.push(row);
    }
    let mut table = Table {
        columns,
        rows,
        ..Default::default()
    };
    table.metadata.insert(
        "config".into(),
        serde_json::to_value(config).unwrap_or(Value::Null),
    );
    table
        .metadata
        .insert("code_version".into(), json!(env!("CARGO_PKG_VERSION")));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(format_value(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn spectrum_without_hyperfine_has_five_levels() {
        let cfg = SystemConfig {
            a_left: vec![0.0],
            a_right: vec![0.0],
            gamma_n: 0.0,
            b0: 0.2,
            ..Default::default()
        };
        let deltas = [-500.0, 0.0, 500.0];
        let t = spectrum_table(&cfg, &deltas).unwrap();
        assert_eq!(t.columns.len(), 1 + 5 * 4);
        for (row, d) in t.rows.iter().zip(deltas) {
            let mut levels: Vec<f64> = Vec::new();
            for &e in &row[1..] {
                if !levels.iter().any(|l| (l - e).abs() < 1e-6) {
                    levels.push(e);
                }
            }
            assert_eq!(levels.len(), 5, "{row:?}");
            // hybridized singlet: lower branch at -J(Δ)
            let j = d / 2.0 + ((cfg.tc / 2.0).powi(2) + (d / 2.0).powi(2)).sqrt();
            assert!(levels.iter().any(|l| (l + j).abs() < 1e-6), "{levels:?}");
        }
    }
}
