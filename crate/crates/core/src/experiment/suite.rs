//! The full verification suite over seeded random instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks;
use super::generate::{applicable_checks, random_instance, rng_for, RandomInstance};
use super::report::CheckOutcome;
use super::run::run_scenario;
use super::scenario::{Method, Mode, Scenario, Starts, SubspaceSpec};
use crate::error::{Error, Result};
use crate::subspace::Subspace;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub max_r: usize,
    pub max_n: usize,
    pub k_max: usize,
    /// Random unit starts per instance.
    pub starts: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            instances: 100,
            max_r: 5,
            max_n: 30,
            k_max: 10,
            starts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub index: usize,
    pub r: usize,
    pub ambient_dim: usize,
    pub dims: Vec<usize>,
    pub planted_shared: usize,
    pub q: Option<f64>,
    pub checks_run: usize,
    /// Only the outcomes that failed; passing ones are counted, not listed.
    pub failures: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub tolerances: Tolerances,
    pub total_checks: usize,
    pub failed_checks: usize,
    pub instances: Vec<InstanceSummary>,
    /// Only filled when timing was requested; keeps reports byte-stable.
    pub wall_time_seconds: Option<f64>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed_checks == 0
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    /// One row per instance.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "r", "ambient_dim", "planted_shared", "q", "checks_run", "failed"])?;
        for inst in &self.instances {
            w.write_record([
                inst.index.to_string(),
                inst.r.to_string(),
                inst.ambient_dim.to_string(),
                inst.planted_shared.to_string(),
                inst.q.map(|q| format!("{q:?}")).unwrap_or_default(),
                inst.checks_run.to_string(),
                inst.failures.len().to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Seed of the random starts of instance `index`; kept apart from the seed
/// stream that generated the instance itself.
fn starts_seed(seed: u64, index: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1)
}

/// Scenario that exercises every applicable check on one instance.
pub fn instance_scenario(cfg: &SuiteConfig, index: usize, inst: &RandomInstance) -> Scenario {
    let r = inst.subspaces.len();
    let n = inst.subspaces[0].ambient_dim();
    Scenario {
        name: format!("suite-{}-{index}", cfg.seed),
        ambient_dim: n,
        mode: Mode::Linear,
        subspaces: inst.subspaces.iter().map(spec).collect(),
        method: Method::Simultaneous,
        k_max: cfg.k_max,
        starts: Starts::Random {
            count: cfg.starts,
            seed: starts_seed(cfg.seed, index),
        },
        checks: applicable_checks(r),
    }
}

fn spec(s: &Subspace) -> SubspaceSpec {
    SubspaceSpec {
        vectors: s
            .basis()
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect(),
        anchor: None,
    }
}

/// Instance `index` of the suite, reproducible on its own.
pub fn suite_instance(cfg: &SuiteConfig, index: usize) -> RandomInstance {
    random_instance(&mut rng_for(cfg.seed, index as u64), cfg.max_r, cfg.max_n)
}

fn run_instance(cfg: &SuiteConfig, index: usize) -> Result<InstanceSummary> {
    let inst = suite_instance(cfg, index);
    let scenario = instance_scenario(cfg, index, &inst);
    let rep = run_scenario(&scenario)?;
    let mut outcomes = rep.check_outcomes;
    // The scenario stores bases as text-exact floats, so the subspaces it
    // rebuilds are the ones checked here.
    let list = scenario.linear_subspaces()?;
    outcomes.push(checks::route_agreement(&list));
    outcomes.push(checks::not_aligned(&list));
    let mut cyclic = scenario.clone();
    cyclic.method = Method::Cyclic;
    cyclic.checks = vec![super::scenario::Check::Bounds];
    outcomes.extend(run_scenario(&cyclic)?.check_outcomes);

    let checks_run = outcomes.len();
    Ok(InstanceSummary {
        index,
        r: list.len(),
        ambient_dim: scenario.ambient_dim,
        dims: list.iter().map(Subspace::dim).collect(),
        planted_shared: inst.planted_shared,
        q: rep.q,
        checks_run,
        failures: outcomes.into_iter().filter(|c| !c.passed).collect(),
    })
}

/// Run every check on `cfg.instances` random instances in parallel. The
/// result does not depend on the number of threads.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.instances == 0 || cfg.k_max == 0 || cfg.starts == 0 {
        return Err(Error::invalid("instances, k_max and starts must all be at least 1"));
    }
    if cfg.max_r < 2 || cfg.max_n < 2 {
        return Err(Error::invalid("max_r and max_n must be at least 2"));
    }
    let instances = (0..cfg.instances)
        .into_par_iter()
        .map(|i| run_instance(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let total_checks = instances.iter().map(|i| i.checks_run).sum();
    let failed_checks = instances.iter().map(|i| i.failures.len()).sum();
    Ok(SuiteReport {
        config: *cfg,
        tolerances: Tolerances::default(),
        total_checks,
        failed_checks,
        instances,
        wall_time_seconds: None,
    })
}
