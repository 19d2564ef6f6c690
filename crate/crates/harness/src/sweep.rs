//! Cartesian sweeps over `phi`, `alpha`, `zeta` and `h`, run on a bounded worker pool.

use std::path::Path;

use log::info;
use rayon::prelude::*;

use crate::commands::{solve_into, Artifacts, Outcome};
use crate::config::{AlphaSpec, RunConfig};
use crate::error::{ConfigError, HarnessResult};
use crate::output::{config_hash, num, CsvTable, Metadata};

/// A base configuration with value lists for some of its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMatrix {
    pub base: RunConfig,
    pub phi: Vec<f64>,
    pub alpha: Vec<AlphaSpec>,
    pub zeta: Vec<f64>,
    pub h: Vec<f64>,
    pub cap: usize,
}

impl ExperimentMatrix {
    /// Takes the lists of the `sweep` section; absent lists hold the base value.
    pub fn from_config(base: &RunConfig) -> Self {
        let s = &base.sweep;
        Self {
            base: base.clone(),
            phi: s.phi.clone().unwrap_or_else(|| vec![base.flow.phi]),
            alpha: s.alpha.clone().unwrap_or_else(|| vec![base.flow.alpha.clone()]),
            zeta: s.zeta.clone().unwrap_or_else(|| vec![base.mesh.zeta]),
            h: s.h.clone().unwrap_or_else(|| vec![base.mesh.h]),
            cap: s.cap,
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len() * self.alpha.len() * self.zeta.len() * self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All configurations in the order `phi`, `alpha`, `zeta`, `h` (last varies fastest).
    pub fn expand(&self) -> Result<Vec<RunConfig>, ConfigError> {
        if self.len() > self.cap {
            return Err(ConfigError::Invalid { key: "sweep".into(), message: format!("{} runs exceed the cap of {}", self.len(), self.cap) });
        }
        let mut out = Vec::with_capacity(self.len());
        for &phi in &self.phi {
            for alpha in &self.alpha {
                for &zeta in &self.zeta {
                    for &h in &self.h {
                        let mut c = self.base.clone();
                        c.flow.phi = phi;
                        c.flow.alpha = alpha.clone();
                        c.mesh.zeta = zeta;
                        c.mesh.h = h;
                        c.sweep = Default::default();
                        c.validate()?;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Per-run line of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    pub config: RunConfig,
    pub pass: bool,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub flux_defect: Option<f64>,
    pub error: Option<String>,
}

/// Runs every configuration of `matrix` with at most `workers` concurrent solves; run `k`
/// writes into `out/run_kkk`.
pub fn run_sweep(matrix: &ExperimentMatrix, out: &Path, workers: usize, meta: &Metadata) -> HarnessResult<Outcome> {
    let runs = matrix.expand()?;
    info!("sweep of {} runs on {} workers", runs.len(), workers);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let records: Vec<RunRecord> = pool.install(|| {
        runs.par_iter()
            .enumerate()
            .map(|(index, config)| {
                let hash = config_hash(&serde_json::to_string(config).expect("configs serialize"));
                let mut art = Artifacts::new(&out.join(format!("run_{index:03}")), Metadata { config_hash: hash }, &config.output.formats);
                match solve_into(config, &mut art) {
                    Ok((s, checks)) => RunRecord {
                        index,
                        config: config.clone(),
                        pass: checks.pass,
                        iterations: Some(s.nonlinear_iterations),
                        residual: Some(s.residual_norm),
                        flux_defect: Some(checks.max_flux_defect),
                        error: None,
                    },
                    Err(e) => RunRecord {
                        index,
                        config: config.clone(),
                        pass: false,
                        iterations: None,
                        residual: None,
                        flux_defect: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let mut table = CsvTable::new(&["run", "phi", "alpha", "zeta", "h", "iterations", "residual", "flux_defect", "status"]);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in &records {
        let status = match &r.error {
            Some(e) => format!("ERROR: {e}"),
            None if r.pass => "PASS".into(),
            None => "FAIL".into(),
        };
        table.push([
            r.index.to_string(),
            num(r.config.flow.phi),
            r.config.friction().to_string(),
            num(r.config.mesh.zeta),
            num(r.config.mesh.h),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(r.residual),
            opt(r.flux_defect),
            status,
        ]);
    }
    let path = out.join("sweep.csv");
    table.write(&path, meta)?;
    let pass = records.iter().all(|r| r.pass);
    let report = format!("{}{}\n", table.render(), if pass { "PASS" } else { "FAIL" });
    Ok(Outcome { pass, report, artifacts: vec![path] })
}
