//! Deterministic parameter-grid scans over the quantum and classical
//! Lyapunov estimators.
//!
//! Every cell derives its seed statelessly from the sweep base seed and the
//! cell index (see [`crate::rng`]), randomness never crosses cells, and
//! records are folded in index order, so results are independent of worker
//! count and execution order, and an interrupted sweep can resume from the
//! records already on disk.

use crate::error::{CoreError, Result};
use crate::fock::OperatorSet;
use crate::lyapunov::{largest_le, LyapunovConfig};
use crate::meanfield::{classical_lyapunov_spectrum, MeanFieldConfig};
use crate::model::ModelParams;
use crate::rng::derive;
use crate::trajectory::TrajectoryConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Model parameter addressed by a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamName {
    U,
    Mu1,
    N,
    Gamma,
    Mu0,
    J,
}

impl ParamName {
    pub fn apply(&self, p: &mut ModelParams, value: f64) {
        match self {
            ParamName::U => p.u = value,
            ParamName::Mu1 => p.mu1 = value,
            ParamName::N => p.n_bosons = value.round().max(1.0) as u32,
            ParamName::Gamma => p.gamma = value,
            ParamName::Mu0 => p.mu0 = value,
            ParamName::J => p.j = value,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ParamName::U => "U",
            ParamName::Mu1 => "mu1",
            ParamName::N => "N",
            ParamName::Gamma => "gamma",
            ParamName::Mu0 => "mu0",
            ParamName::J => "J",
        }
    }
}

impl std::str::FromStr for ParamName {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(ParamName::U),
            "mu1" => Ok(ParamName::Mu1),
            "N" | "n" => Ok(ParamName::N),
            "gamma" => Ok(ParamName::Gamma),
            "mu0" => Ok(ParamName::Mu0),
            "J" | "j" => Ok(ParamName::J),
            other => Err(CoreError::InvalidParam {
                key: "axis",
                reason: format!("unknown parameter `{other}`"),
            }),
        }
    }
}

/// One sweep axis: `count` evenly spaced values on [min, max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: ParamName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * step).collect()
    }
}

/// Which estimator runs in every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellKind {
    Quantum {
        tcfg: TrajectoryConfig,
        lcfg: LyapunovConfig,
    },
    Classical {
        cfg: MeanFieldConfig,
        t_transient: f64,
        t_accumulate: f64,
    },
}

/// Full description of a sweep; serialized as the provenance sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    /// One or two axes; the second axis is the fast (inner) index.
    pub axes: Vec<Axis>,
    pub cell: CellKind,
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(CoreError::InvalidParam {
                key: "axes",
                reason: format!("need 1 or 2 axes, got {}", self.axes.len()),
            });
        }
        for axis in &self.axes {
            if axis.count < 1 {
                return Err(CoreError::InvalidParam {
                    key: "axis count",
                    reason: "must be at least 1".into(),
                });
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Deterministic seed of cell `index`.
    pub fn cell_seed(&self, index: usize) -> u64 {
        derive(self.base_seed, index as u64)
    }

    /// Axis values `(p1, p2)` of cell `index`; `p2` is None for 1-axis grids.
    pub fn cell_values(&self, index: usize) -> (f64, Option<f64>) {
        if self.axes.len() == 1 {
            (self.axes[0].values()[index], None)
        } else {
            let inner = self.axes[1].count;
            let v1 = self.axes[0].values()[index / inner];
            let v2 = self.axes[1].values()[index % inner];
            (v1, Some(v2))
        }
    }

    /// Model parameters of cell `index`.
    pub fn cell_params(&self, index: usize) -> ModelParams {
        let (v1, v2) = self.cell_values(index);
        let mut p = self.base;
        self.axes[0].name.apply(&mut p, v1);
        if let Some(v2) = v2 {
            self.axes[1].name.apply(&mut p, v2);
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
    Skipped,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Failed => "failed",
            CellStatus::Skipped => "skipped",
        }
    }
}

impl std::str::FromStr for CellStatus {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(CellStatus::Ok),
            "failed" => Ok(CellStatus::Failed),
            "skipped" => Ok(CellStatus::Skipped),
            other => Err(CoreError::InvalidParam {
                key: "status",
                reason: format!("unknown status `{other}`"),
            }),
        }
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub index: usize,
    pub p1: f64,
    pub p2: Option<f64>,
    pub lambda_mean: f64,
    pub lambda_stderr: f64,
    /// Second exponent, present for classical cells.
    pub lambda_second: Option<f64>,
    pub n_events: f64,
    pub status: CellStatus,
    pub seed: u64,
    pub message: String,
}

/// All cell records of a sweep, ordered by cell index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub cells: Vec<CellRecord>,
}

/// Execute the sweep, skipping cells present in `existing` (resume) and
/// reporting each newly computed record through `on_cell` as it completes.
pub fn run_sweep(
    spec: &SweepSpec,
    existing: &[CellRecord],
    on_cell: &(dyn Fn(&CellRecord) + Sync),
) -> Result<SweepResult> {
    spec.validate()?;
    let mut have: BTreeMap<usize, CellRecord> = BTreeMap::new();
    for record in existing {
        if record.index < spec.n_cells() {
            have.insert(record.index, record.clone());
        }
    }

    let pending: Vec<usize> = (0..spec.n_cells()).filter(|i| !have.contains_key(i)).collect();
    let computed: Vec<CellRecord> = pending
        .par_iter()
        .map(|&index| {
            let record = run_cell(spec, index);
            on_cell(&record);
            record
        })
        .collect();

    for record in computed {
        have.insert(record.index, record);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        cells: have.into_values().collect(),
    })
}

/// Compute one cell; failures are recorded, never propagated, so a single
/// bad cell cannot void a long scan.
pub fn run_cell(spec: &SweepSpec, index: usize) -> CellRecord {
    let (p1, p2) = spec.cell_values(index);
    let seed = spec.cell_seed(index);
    let params = spec.cell_params(index);

    let mut record = CellRecord {
        index,
        p1,
        p2,
        lambda_mean: f64::NAN,
        lambda_stderr: f64::NAN,
        lambda_second: None,
        n_events: 0.0,
        status: CellStatus::Failed,
        seed,
        message: String::new(),
    };
    if let Err(e) = params.validate() {
        record.status = CellStatus::Skipped;
        record.message = e.to_string();
        return record;
    }

    let outcome: Result<()> = (|| {
        match &spec.cell {
            CellKind::Quantum { tcfg, lcfg } => {
                let ops = OperatorSet::build(&params)?;
                let tcfg = TrajectoryConfig { seed, ..*tcfg };
                let result = largest_le(&ops, &tcfg, lcfg)?;
                record.lambda_mean = result.lambda_mean;
                record.lambda_stderr = result.lambda_stderr;
                record.n_events = result.n_events_mean;
            }
            CellKind::Classical {
                cfg,
                t_transient,
                t_accumulate,
            } => {
                let (l1, l2) = classical_lyapunov_spectrum(&params, cfg, *t_transient, *t_accumulate)?;
                record.lambda_mean = l1;
                record.lambda_stderr = 0.0;
                record.lambda_second = Some(l2);
            }
        }
        Ok(())
    })();

    match outcome {
        Ok(()) => record.status = CellStatus::Ok,
        Err(e) => {
            record.status = CellStatus::Failed;
            record.message = e.to_string();
        }
    }
    record
}

/// Per-cell relation between the quantum and classical chaos classifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellClass {
    BothChaotic,
    BothRegular,
    QuantumOnlyChaotic,
    ClassicalOnlyChaotic,
    /// At least one side did not produce a usable exponent.
    Unclassified,
}

impl CellClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellClass::BothChaotic => "both-chaotic",
            CellClass::BothRegular => "both-regular",
            CellClass::QuantumOnlyChaotic => "quantum-only-chaotic",
            CellClass::ClassicalOnlyChaotic => "classical-only-chaotic",
            CellClass::Unclassified => "unclassified",
        }
    }
}

/// Agreement map between two sweeps on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementMap {
    pub threshold: f64,
    pub cells: Vec<(usize, f64, Option<f64>, CellClass)>,
    /// Fraction of classified cells where both sides agree.
    pub agreement_fraction: f64,
}

/// Classify every cell of two matching grids as chaotic/regular by
/// `lambda > threshold` and compute the agreement fraction.
pub fn diff_phase_diagrams(
    quantum: &SweepResult,
    classical: &SweepResult,
    threshold: f64,
) -> Result<AgreementMap> {
    if quantum.spec.axes != classical.spec.axes {
        return Err(CoreError::GridMismatch {
            reason: "axes differ between the two sweeps".into(),
        });
    }
    if quantum.cells.len() != classical.cells.len() {
        return Err(CoreError::GridMismatch {
            reason: format!(
                "cell counts differ: {} vs {}",
                quantum.cells.len(),
                classical.cells.len()
            ),
        });
    }

    let mut cells = Vec::with_capacity(quantum.cells.len());
    let mut agree = 0usize;
    let mut classified = 0usize;
    for (q, c) in quantum.cells.iter().zip(classical.cells.iter()) {
        if q.index != c.index {
            return Err(CoreError::GridMismatch {
                reason: format!("cell index mismatch: {} vs {}", q.index, c.index),
            });
        }
        let class = if q.status != CellStatus::Ok || c.status != CellStatus::Ok {
            CellClass::Unclassified
        } else {
            let qc = q.lambda_mean > threshold;
            let cc = c.lambda_mean > threshold;
            match (qc, cc) {
                (true, true) => CellClass::BothChaotic,
                (false, false) => CellClass::BothRegular,
                (true, false) => CellClass::QuantumOnlyChaotic,
                (false, true) => CellClass::ClassicalOnlyChaotic,
            }
        };
        if class != CellClass::Unclassified {
            classified += 1;
            if matches!(class, CellClass::BothChaotic | CellClass::BothRegular) {
                agree += 1;
            }
        }
        cells.push((q.index, q.p1, q.p2, class));
    }

    Ok(AgreementMap {
        threshold,
        cells,
        agreement_fraction: if classified == 0 {
            0.0
        } else {
            agree as f64 / classified as f64
        },
    })
}
