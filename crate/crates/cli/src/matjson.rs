//! JSON file formats for matrices and density-matrix snapshot series.
//!
//! A complex matrix is stored row-major as nested arrays of `[re, im]`
//! pairs. Snapshot files carry a strictly increasing time grid and one
//! state per node.

use std::path::Path;

use qtraj_core::linalg::{Complex64, ComplexMatrix, HermitianMatrix};
use serde::Deserialize;

use crate::CliError;

/// Row-major nested `[re, im]` pairs, the on-disk matrix encoding.
pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile {
    pub times: Vec<f64>,
    pub states: Vec<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub matrix: RawMatrix,
}

pub fn matrix_from_raw(raw: &RawMatrix, what: &str) -> Result<ComplexMatrix, CliError> {
    let n = raw.len();
    if n == 0 {
        return Err(CliError::Validation(format!("{what}: matrix is empty")));
    }
    let mut m = ComplexMatrix::zeros(n);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Validation(format!(
                "{what}: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::Validation(format!(
                    "{what}: entry ({i},{j}) is not finite"
                )));
            }
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{what} {}: {e}", path.display())))
}

/// Loads a Hamiltonian matrix file and validates hermiticity.
pub fn load_hamiltonian(path: &Path) -> Result<HermitianMatrix, CliError> {
    let spec: HamiltonianSpec = read_json(path, "hamiltonian file")?;
    let m = matrix_from_raw(&spec.matrix, "hamiltonian")?;
    HermitianMatrix::new(m).map_err(CliError::from)
}

/// Inverse of [`matrix_from_raw`]: the on-disk element encoding of a matrix.
pub fn matrix_to_raw(m: &ComplexMatrix) -> RawMatrix {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Debug export of a spectral frame: eigenvalues, their rates, the
/// (phase-fixed) eigenvector columns, and the coupling matrix.
pub fn frame_to_json(frame: &qtraj_core::spectral::SpectralFrame) -> serde_json::Value {
    serde_json::json!({
        "t": frame.t,
        "populations": frame.populations,
        "rates": frame.rates,
        "vectors": matrix_to_raw(&frame.vectors),
        "coupling": matrix_to_raw(&frame.coupling),
        "groups": frame.groups,
    })
}

/// Debug export of the level-matching log of a tracked flow.
pub fn diagnostics_to_json(d: &qtraj_core::spectral::FlowDiagnostics) -> serde_json::Value {
    let event = |e: &qtraj_core::spectral::MatchEvent| {
        serde_json::json!({
            "t": e.t,
            "permutation": e.permutation,
            "min_overlap_sq": e.min_overlap_sq,
        })
    };
    serde_json::json!({
        "min_overlap_sq": d.min_overlap_sq,
        "reorderings": d.reorderings.iter().map(event).collect::<Vec<_>>(),
        "ambiguous": d.ambiguous.iter().map(event).collect::<Vec<_>>(),
    })
}

/// Debug export of a counterdiabatic generator: virtual levels and the
/// Hamiltonian pieces that retrace the trajectory.
pub fn cd_to_json(cd: &qtraj_core::tbsta::CdGenerator) -> serde_json::Value {
    serde_json::json!({
        "beta": cd.virtual_hamiltonian.beta,
        "gauge": cd.virtual_hamiltonian.gauge,
        "virtual_levels": cd.virtual_hamiltonian.levels,
        "virtual_hamiltonian": matrix_to_raw(cd.virtual_hamiltonian.matrix.matrix()),
        "geometric": matrix_to_raw(cd.geometric.matrix()),
        "total": matrix_to_raw(cd.total().matrix()),
    })
}

/// Loads a snapshot file. States come back as raw matrices; density-operator
/// validation happens during ingestion so failures carry the snapshot index.
pub fn load_snapshots(path: &Path) -> Result<(Vec<f64>, Vec<ComplexMatrix>), CliError> {
    let file: SnapshotFile = read_json(path, "snapshot file")?;
    if file.times.len() != file.states.len() {
        return Err(CliError::Validation(format!(
            "snapshot file {}: {} times but {} states",
            path.display(),
            file.times.len(),
            file.states.len()
        )));
    }
    let mut states = Vec::with_capacity(file.states.len());
    for (idx, raw) in file.states.iter().enumerate() {
        states.push(matrix_from_raw(raw, &format!("snapshot {idx}"))?);
    }
    Ok((file.times, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qtraj_core::linalg::{pauli_z, DensityMatrix, HermitianMatrix};
    use qtraj_core::spectral::spectral_frame;
    use qtraj_core::tbsta::cd_generator;

    #[test]
    fn matrix_encoding_round_trips() {
        let m = ComplexMatrix::from_fn(3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let back = matrix_from_raw(&matrix_to_raw(&m), "test").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_ragged_and_nonfinite_input() {
        let ragged: RawMatrix = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        assert!(matrix_from_raw(&ragged, "test").is_err());
        let nan: RawMatrix = vec![vec![[f64::NAN, 0.0]]];
        assert!(matrix_from_raw(&nan, "test").is_err());
        assert!(matrix_from_raw(&RawMatrix::new(), "test").is_err());
    }

    #[test]
    fn debug_exports_carry_the_expected_fields() {
        let state =
            DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.25, 0.75])).unwrap();
        let rhodot = HermitianMatrix::symmetrized(&pauli_z().into_matrix().scale_re(0.01));
        let frame = spectral_frame(0.0, &state, &rhodot, 1e-9).unwrap();

        let doc = frame_to_json(&frame);
        assert_eq!(doc["populations"].as_array().unwrap().len(), 2);
        assert_eq!(doc["vectors"].as_array().unwrap().len(), 2);

        let cd = cd_generator(&frame, 1.0).unwrap();
        let doc = cd_to_json(&cd);
        assert_eq!(doc["virtual_levels"].as_array().unwrap().len(), 2);
        let total = matrix_from_raw(
            &serde_json::from_value(doc["total"].clone()).unwrap(),
            "total",
        )
        .unwrap();
        assert_eq!(total, cd.total().into_matrix());
    }
}
