//! JSON wire formats and file loading with path-qualified parse errors.
//!
//! Complex numbers serialize as two-element arrays [re, im]; matrices as
//! row-major nested arrays of such pairs.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::QuantumChannel;
use crate::config::{ToleranceOverrides, Tolerances};
use crate::distributions::{DistributionKind, JointQuasiDistribution, TpsmScenario};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::states::{DensityOperator, ProjectiveMeasurement};

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let lifted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&lifted).map_err(serde::de::Error::custom)
    }
}

/// State file: {"matrix": ...}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub matrix: ComplexMatrix,
}

/// Channel file: {"dim_in": n, "dim_out": m, "kraus": [matrix, ...]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<ComplexMatrix>,
}

/// Measurement file: {"projectors": [...], "labels": [...]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvmFile {
    pub projectors: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Scenario file bundling all four protocol ingredients plus optional seed
/// and tolerance overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub rho: StateFile,
    pub pvm_a: PvmFile,
    pub channel: ChannelFile,
    pub pvm_b: PvmFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

/// Joint distribution wire form: {"kind", "rows", "cols", "values"}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionFile {
    pub kind: DistributionKind,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl From<&JointQuasiDistribution> for DistributionFile {
    fn from(d: &JointQuasiDistribution) -> Self {
        Self {
            kind: d.kind(),
            rows: d.row_labels().to_vec(),
            cols: d.col_labels().to_vec(),
            values: (0..d.num_rows())
                .map(|i| (0..d.num_cols()).map(|j| d.get(i, j)).collect())
                .collect(),
        }
    }
}

/// CSV rendering with label headers: empty corner cell, column labels, then
/// one row per outcome.
pub fn distribution_to_csv(d: &JointQuasiDistribution) -> String {
    let mut out = String::new();
    out.push_str(&format!(",{}\n", d.col_labels().join(",")));
    for i in 0..d.num_rows() {
        out.push_str(d.row_labels()[i].as_str());
        for j in 0..d.num_cols() {
            out.push_str(&format!(",{}", d.get(i, j)));
        }
        out.push('\n');
    }
    out
}

fn parse<T: DeserializeOwned>(json: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn state_from_json(json: &str) -> Result<DensityOperator> {
    state_from_json_with(json, &Tolerances::default())
}

pub fn state_from_json_with(json: &str, tol: &Tolerances) -> Result<DensityOperator> {
    let file: StateFile = parse(json)?;
    DensityOperator::from_matrix_with(file.matrix, tol)
}

pub fn channel_from_json(json: &str) -> Result<QuantumChannel> {
    channel_from_json_with(json, &Tolerances::default())
}

pub fn channel_from_json_with(json: &str, tol: &Tolerances) -> Result<QuantumChannel> {
    let file: ChannelFile = parse(json)?;
    build_channel(file, tol)
}

fn build_channel(file: ChannelFile, tol: &Tolerances) -> Result<QuantumChannel> {
    for (k, m) in file.kraus.iter().enumerate() {
        if m.rows() != file.dim_out || m.cols() != file.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "kraus[{k}] is {}x{}, expected dim_out x dim_in = {}x{}",
                m.rows(),
                m.cols(),
                file.dim_out,
                file.dim_in
            )));
        }
    }
    QuantumChannel::with_tolerances(file.kraus, tol)
}

pub fn pvm_from_json(json: &str) -> Result<ProjectiveMeasurement> {
    pvm_from_json_with(json, &Tolerances::default())
}

pub fn pvm_from_json_with(json: &str, tol: &Tolerances) -> Result<ProjectiveMeasurement> {
    let file: PvmFile = parse(json)?;
    build_pvm(file, tol)
}

fn build_pvm(file: PvmFile, tol: &Tolerances) -> Result<ProjectiveMeasurement> {
    let projectors = file
        .projectors
        .into_iter()
        .map(|m| HermitianOperator::with_tolerances(m, tol))
        .collect::<Result<Vec<_>>>()?;
    ProjectiveMeasurement::with_tolerances(projectors, file.labels, tol)
}

/// A parsed scenario together with its file-level seed.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: TpsmScenario,
    pub seed: Option<u64>,
}

/// Parse a scenario file. Tolerance overrides in the file are applied on top
/// of `base` for every constructor involved.
pub fn scenario_from_json(json: &str, base: &Tolerances) -> Result<LoadedScenario> {
    let file: ScenarioFile = parse(json)?;
    let tol = match &file.tolerances {
        Some(overrides) => overrides.apply(base),
        None => base.clone(),
    };
    let rho = DensityOperator::from_matrix_with(file.rho.matrix, &tol)?;
    let pvm_a = build_pvm(file.pvm_a, &tol)?;
    let channel = build_channel(file.channel, &tol)?;
    let pvm_b = build_pvm(file.pvm_b, &tol)?;
    let scenario = TpsmScenario::with_tolerances(rho, pvm_a, channel, pvm_b, tol)?;
    Ok(LoadedScenario {
        scenario,
        seed: file.seed,
    })
}

pub fn state_to_file(rho: &DensityOperator) -> StateFile {
    StateFile {
        matrix: rho.matrix().clone(),
    }
}

pub fn channel_to_file(e: &QuantumChannel) -> ChannelFile {
    ChannelFile {
        dim_in: e.dim_in(),
        dim_out: e.dim_out(),
        kraus: e.kraus().to_vec(),
    }
}

pub fn pvm_to_file(pvm: &ProjectiveMeasurement) -> PvmFile {
    PvmFile {
        projectors: pvm
            .projectors()
            .iter()
            .map(|p| p.matrix().clone())
            .collect(),
        labels: Some(pvm.labels().to_vec()),
    }
}

pub fn scenario_to_file(s: &TpsmScenario) -> ScenarioFile {
    ScenarioFile {
        rho: state_to_file(s.rho()),
        pvm_a: pvm_to_file(s.pvm_a()),
        channel: channel_to_file(s.channel()),
        pvm_b: pvm_to_file(s.pvm_b()),
        seed: None,
        tolerances: None,
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: String::new(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trips_through_json() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, -2.0), Complex64::new(0.0, 0.5)],
            vec![Complex64::new(0.25, 0.0), Complex64::new(-1.0, 1.0)],
        ])
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[[1.0,-2.0],[0.0,0.5]],[[0.25,0.0],[-1.0,1.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert!(back.approx_eq(&m, 0.0));
    }

    #[test]
    fn scenario_round_trip() {
        let e = QuantumChannel::erasure(0.5).unwrap();
        let s = TpsmScenario::new(
            DensityOperator::diagonal(&[0.25, 0.75]).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
            e,
            ProjectiveMeasurement::computational(3).unwrap(),
        )
        .unwrap();
        let json = to_json_pretty(&scenario_to_file(&s)).unwrap();
        let loaded = scenario_from_json(&json, &Tolerances::default()).unwrap();
        assert!(loaded
            .scenario
            .rho()
            .matrix()
            .approx_eq(s.rho().matrix(), 0.0));
        assert_eq!(loaded.scenario.pvm_b().num_outcomes(), 3);
    }

    #[test]
    fn parse_errors_carry_json_paths() {
        let bad = r#"{"matrix": [[[1.0, 0.0]], [["x", 0.0]]]}"#;
        match state_from_json(bad) {
            Err(Error::Parse { path, .. }) => assert!(path.contains("matrix"), "path: {path}"),
            other => panic!("expected parse error, got {other:?}"),
        }

        let unknown = r#"{"matrix": [[[1.0, 0.0]]], "extra": 1}"#;
        assert!(matches!(state_from_json(unknown), Err(Error::Parse { .. })));
    }

    #[test]
    fn tolerance_overrides_apply() {
        // trace off by 2e-9: rejected at defaults, accepted when relaxed
        let json_strict = r#"{"rho": {"matrix": [[[0.500000002,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]]},
            "pvm_a": {"projectors": [[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]],[[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]},
            "channel": {"dim_in": 2, "dim_out": 2, "kraus": [[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]},
            "pvm_b": {"projectors": [[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]],[[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]}}"#;
        assert!(scenario_from_json(json_strict, &Tolerances::default()).is_err());
        let json_relaxed = json_strict.replace(
            r#""pvm_b""#,
            r#""tolerances": {"unit_trace": 1e-6}, "pvm_b""#,
        );
        assert!(scenario_from_json(&json_relaxed, &Tolerances::default()).is_ok());
    }

    #[test]
    fn distribution_csv_shape() {
        let s = TpsmScenario::new(
            DensityOperator::maximally_mixed(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
            QuantumChannel::identity(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
        )
        .unwrap();
        let q = crate::distributions::mh_distribution(&s).unwrap();
        let csv = distribution_to_csv(&q);
        assert_eq!(csv, ",0,1\n0,0.5,0\n1,0,0.5\n");
    }
}
