//! Scenario description shared by single runs and sweeps.

use std::sync::Arc;

use rayon::prelude::*;

use super::adversary::{FaultPlan, Strategy};
use super::report::CsvRow;
use super::run::{run, ProposalMode, RunMetrics, RunSpec};
use super::SimError;
use crate::value::{BuiltinValidity, ValidityRule};

/// A fully seeded run description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub n: usize,
    pub bit_len: usize,
    pub t: Option<usize>,
    /// Strategy and number of processes running it; placement is drawn
    /// from `seed`.
    pub faults: Vec<(Strategy, usize)>,
    pub proposals: ProposalMode,
    pub predicate: BuiltinValidity,
    pub seed: u64,
}

impl Scenario {
    pub fn plan(&self) -> Result<FaultPlan, SimError> {
        let count: usize = self.faults.iter().map(|(_, c)| c).sum();
        if count > self.n {
            return Err(SimError::Proposals(format!(
                "{count} faulty processes requested for n={}",
                self.n
            )));
        }
        Ok(FaultPlan::placed(self.n, &self.faults, self.seed))
    }

    pub fn spec(&self) -> Result<RunSpec, SimError> {
        let proposals = self
            .proposals
            .generate(self.n, self.predicate, self.bit_len, self.seed)?;
        let rule = ValidityRule::new(self.bit_len, Arc::new(self.predicate));
        let mut spec = RunSpec::new(self.n, rule, proposals, self.plan()?);
        spec.t = self.t;
        Ok(spec)
    }

    pub fn run(&self) -> Result<RunMetrics, SimError> {
        run(&self.spec()?)
    }

    pub fn row(&self, run_id: u64, m: &RunMetrics) -> Result<CsvRow, SimError> {
        Ok(CsvRow::new(run_id, self.plan()?.label(), self.seed, m))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub ls: Vec<usize>,
    pub trials: u32,
    /// Trial `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub t: Option<usize>,
    pub faults: Vec<(Strategy, usize)>,
    pub proposals: ProposalMode,
    pub predicate: BuiltinValidity,
}

impl SweepConfig {
    /// Scenarios in output order: `n`, then `L`, then trial.
    pub fn scenarios(&self) -> Result<Vec<Scenario>, SimError> {
        if self.ns.is_empty() {
            return Err(SimError::EmptySweep("no values of n"));
        }
        if self.ls.is_empty() {
            return Err(SimError::EmptySweep("no values of L"));
        }
        if self.trials == 0 {
            return Err(SimError::EmptySweep("zero trials"));
        }
        let mut out = Vec::new();
        for &n in &self.ns {
            for &bit_len in &self.ls {
                for trial in 0..self.trials {
                    out.push(Scenario {
                        n,
                        bit_len,
                        t: self.t,
                        faults: self.faults.clone(),
                        proposals: self.proposals.clone(),
                        predicate: self.predicate,
                        seed: self.base_seed + trial as u64,
                    });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub scenario: Scenario,
    pub row: CsvRow,
    pub metrics: RunMetrics,
}

/// Runs every scenario in parallel; records come back in scenario order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, SimError> {
    cfg.scenarios()?
        .into_par_iter()
        .enumerate()
        .map(|(i, scenario)| {
            let metrics = scenario.run()?;
            let row = scenario.row(i as u64, &metrics)?;
            Ok(SweepRecord {
                scenario,
                row,
                metrics,
            })
        })
        .collect()
}
