//! Scenario execution: operators, Friedrichs routes, traces and checks.

use rayon::prelude::*;

use super::checks;
use super::generate::{applicable_checks, random_unit_vector, rng_for};
use super::report::{CheckOutcome, Metadata, Report, RouteOutcome, TraceSummary};
use super::scenario::{Check, Method, Mode, Scenario, Starts};
use crate::affine::{cyclic_affine, intersection_affine, simultaneous_affine, AffineSubspace};
use crate::angles::{cos_two, friedrichs_from_norm, friedrichs_gram, FriedrichsRoute};
use crate::error::{Error, Result};
use crate::numlin::Vector;
use crate::productspace::product_alternating_trace;
use crate::projmethods::{
    cyclic_operator, cyclic_rate, iterate, simultaneous_operator, simultaneous_rate, IterOperator,
    IterationTrace,
};
use crate::subspace::Subspace;
use crate::tolerances::Tolerances;

/// Everything derived once from a scenario before any trajectory runs.
struct Prepared<'a> {
    scenario: &'a Scenario,
    /// The subspaces themselves, or the direction spaces in affine mode.
    linear: Vec<Subspace>,
    affine: Option<Vec<AffineSubspace>>,
    /// `P_V(0)` in affine mode, 0 otherwise.
    anchor: Vector,
    /// Operator of the scenario's method on `linear`; the product method
    /// reports the simultaneous operator it is equivalent to.
    op: IterOperator,
}

impl<'a> Prepared<'a> {
    fn new(s: &'a Scenario) -> Result<Self> {
        s.validate()?;
        let linear = s.linear_subspaces()?;
        let (affine, anchor) = match s.mode {
            Mode::Linear => (None, Vector::zeros(s.ambient_dim)),
            Mode::Affine => {
                let list = s.affine_subspaces()?;
                let target = intersection_affine(&list)?;
                (Some(list), target.anchor().clone())
            }
        };
        let op = match s.method {
            Method::Cyclic => cyclic_operator(&linear)?,
            Method::Simultaneous | Method::ProductAlternating => simultaneous_operator(&linear)?,
        };
        Ok(Prepared {
            scenario: s,
            linear,
            affine,
            anchor,
            op,
        })
    }

    fn trace(&self, x0: &Vector) -> Result<IterationTrace> {
        let k_max = self.scenario.k_max;
        match (&self.affine, self.scenario.method) {
            (Some(list), Method::Cyclic) => cyclic_affine(list, x0, k_max),
            (Some(list), _) => simultaneous_affine(list, x0, k_max),
            (None, Method::ProductAlternating) => product_alternating_trace(&self.linear, x0, k_max),
            (None, _) => iterate(&self.op, x0, k_max),
        }
    }

    /// Starts with the anchor removed, i.e. in the linear picture.
    fn translated(&self, starts: &[Vector]) -> Vec<Vector> {
        starts.iter().map(|x| x - &self.anchor).collect()
    }
}

/// First stream used for random starts. Generators use the low streams of
/// the same seed, so starts never replay the draws that built the subspaces.
const START_STREAM_BASE: u64 = 1 << 62;

/// Explicit starts as given; random start `i` is a unit vector drawn from
/// its own stream of the scenario seed, so it does not depend on thread count.
pub fn resolve_starts(s: &Scenario) -> Vec<Vector> {
    match &s.starts {
        Starts::Explicit(list) => list.iter().map(|v| Vector::from_column_slice(v)).collect(),
        Starts::Random { count, seed } => (0..*count)
            .map(|i| {
                random_unit_vector(
                    s.ambient_dim,
                    &mut rng_for(*seed, START_STREAM_BASE + i as u64),
                )
            })
            .collect(),
    }
}

fn metadata(s: &Scenario) -> Metadata {
    Metadata {
        seed: s.seed(),
        mode: s.mode,
        method: s.method,
        ambient_dim: s.ambient_dim,
        r: s.r(),
        k_max: s.k_max,
        tolerances: Tolerances::default(),
        wall_time_seconds: None,
    }
}

fn failed_report(s: &Scenario, err: &Error) -> Report {
    Report {
        scenario_name: s.name.clone(),
        friedrichs: Vec::new(),
        q: None,
        cyclic_rate: None,
        error_norms: Vec::new(),
        chain_residuals: None,
        traces: Vec::new(),
        check_outcomes: Vec::new(),
        error: Some(err.to_string()),
        metadata: metadata(s),
    }
}

fn friedrichs_routes(list: &[Subspace]) -> Vec<RouteOutcome> {
    let mut out = vec![
        RouteOutcome::from_result(FriedrichsRoute::GramBlock, friedrichs_gram(list)),
        RouteOutcome::from_result(FriedrichsRoute::NormInversion, friedrichs_from_norm(list)),
    ];
    if let [a, b] = list {
        out.push(RouteOutcome::from_result(FriedrichsRoute::PrincipalAngle, cos_two(a, b)));
    }
    out
}

/// Which parts of a scenario to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Depth {
    /// Angles, norms and operator-level checks; no trajectories.
    Analyze,
    /// Everything the scenario asks for.
    Run,
}

fn execute(s: &Scenario, depth: Depth) -> Result<Report> {
    let prep = match Prepared::new(s) {
        Ok(p) => p,
        Err(e @ Error::Infeasible { .. }) => return Ok(failed_report(s, &e)),
        Err(e) => return Err(e),
    };
    let lin = &prep.linear;
    let k_max = s.k_max;

    let error_norms = (1..=k_max)
        .map(|k| prep.op.error_operator_norm(k))
        .collect::<Result<Vec<_>>>()?;

    let starts = resolve_starts(s);
    let traces: Vec<TraceSummary> = if depth == Depth::Run {
        starts
            .par_iter()
            .enumerate()
            .map(|(i, x)| prep.trace(x).map(|t| TraceSummary::new(i, t)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let mut outcomes: Vec<CheckOutcome> = Vec::new();
    let mut chain_residuals = None;
    for &check in &s.checks {
        match check {
            Check::NormChain => {
                let (outcome, worst) = checks::norm_chain(lin, k_max);
                chain_residuals = worst;
                outcomes.push(outcome);
            }
            Check::Kw => outcomes.push(checks::kw(lin, k_max)),
            Check::LemmaIdentity => outcomes.extend(checks::lemma_identity(lin, k_max)),
            Check::Compare => outcomes.extend(checks::compare(lin, k_max)),
            Check::PierraLift if depth == Depth::Run => {
                outcomes.push(checks::pierra_lift(lin, &prep.translated(&starts), k_max))
            }
            Check::Bounds if depth == Depth::Run => outcomes.extend(bounds_checks(&prep, &traces)),
            Check::PierraLift | Check::Bounds => {}
        }
    }

    Ok(Report {
        scenario_name: s.name.clone(),
        friedrichs: friedrichs_routes(lin),
        q: simultaneous_rate(lin).ok(),
        cyclic_rate: cyclic_rate(lin).ok(),
        error_norms,
        chain_residuals,
        traces,
        check_outcomes: outcomes,
        error: None,
        metadata: metadata(s),
    })
}

fn bounds_checks(prep: &Prepared, traces: &[TraceSummary]) -> Vec<CheckOutcome> {
    let s = prep.scenario;
    let mut out = vec![checks::bound_validity(traces)];
    if s.method != Method::Cyclic {
        out.push(checks::monotone(traces));
        // Only the simultaneous bound is optimal, so only it must be attained.
        let adversarial = prep
            .op
            .adversarial_start()
            .and_then(|x| prep.trace(&(&prep.anchor + x)));
        out.push(checks::tightness(adversarial));
    }
    if let Some(start) = traces.first() {
        if prep.affine.is_some() {
            let x0 = Vector::from_column_slice(&start.start);
            out.push(checks::translation(
                prep.trace(&x0),
                iterate(&prep.op, &(&x0 - &prep.anchor), s.k_max),
            ));
        }
    }
    out
}

/// Iterate every start and run every requested check.
///
/// An infeasible affine intersection is not an `Err`: it yields a report
/// whose `error` field carries the message.
pub fn run_scenario(s: &Scenario) -> Result<Report> {
    execute(s, Depth::Run)
}

/// Angles, rates, error norms and the operator-level checks only; the
/// trajectory checks (`bounds`, `pierra_lift`) are left to [`run_scenario`].
pub fn analyze_scenario(s: &Scenario) -> Result<Report> {
    execute(s, Depth::Analyze)
}

/// The scenario with every check that applies to it switched on.
pub fn with_all_checks(s: &Scenario) -> Scenario {
    let mut full = s.clone();
    full.checks = applicable_checks(s.r());
    full
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::scenario::parse_scenario;

    const SIXTY: &str = "projrate-scenario 1
name: sixty
ambient_dim: 2
mode: linear
method: simultaneous
k_max: 5
starts: random 3 seed 9
checks: norm_chain, bounds, lemma_identity
subspace:
  vectors:
    1 0
subspace:
  vectors:
    0.5 0.8660254037844386
";

    #[test]
    fn sixty_degree_run() {
        let rep = run_scenario(&parse_scenario(SIXTY).unwrap()).unwrap();
        assert!((rep.q.unwrap() - 0.75).abs() < 1e-10);
        assert!(rep.chain_residuals.unwrap().iter().all(|&r| r <= 1e-8));
        assert_eq!(rep.traces.len(), 3);
        assert!(rep.all_passed(), "{:?}", rep.check_outcomes);
        assert!((rep.error_norms[2] - 0.75f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn cyclic_kw_run() {
        let text = SIXTY
            .replace("method: simultaneous", "method: cyclic")
            .replace("checks: norm_chain, bounds, lemma_identity", "checks: kw");
        let rep = run_scenario(&parse_scenario(&text).unwrap()).unwrap();
        for (k, v) in rep.error_norms.iter().enumerate() {
            assert!((v - 0.5f64.powi(2 * k as i32 + 1)).abs() < 1e-9);
        }
        assert!(rep.all_passed());
    }

    #[test]
    fn product_alternating_matches_simultaneous() {
        let a = parse_scenario(SIXTY).unwrap();
        let mut b = a.clone();
        b.method = Method::ProductAlternating;
        let ra = run_scenario(&a).unwrap();
        let rb = run_scenario(&b).unwrap();
        assert!(rb.all_passed(), "{:?}", rb.check_outcomes);
        for (ta, tb) in ra.traces.iter().zip(&rb.traces) {
            for (x, y) in ta.errors.iter().zip(&tb.errors) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analyze_skips_traces() {
        let rep = analyze_scenario(&parse_scenario(SIXTY).unwrap()).unwrap();
        assert!(rep.traces.is_empty());
        assert!(rep.check_outcomes.iter().all(|c| c.check != "bounds"));
    }

    #[test]
    fn affine_perpendicular_lines() {
        let text = "projrate-scenario 1
name: perp
ambient_dim: 2
mode: affine
method: simultaneous
k_max: 4
starts:
  0 0
checks: bounds
subspace:
  anchor: 0 1
  vectors:
    1 0
subspace:
  anchor: 2 0
  vectors:
    0 1
";
        let rep = run_scenario(&parse_scenario(text).unwrap()).unwrap();
        let t = &rep.traces[0];
        assert!((t.errors[1] - 1.25f64.sqrt()).abs() < 1e-10);
        assert!((t.bounds[1] - t.errors[1]).abs() < 1e-8);
        assert!(rep.all_passed(), "{:?}", rep.check_outcomes);
    }

    #[test]
    fn infeasible_affine_is_reported() {
        let text = "projrate-scenario 1
name: parallel
ambient_dim: 2
mode: affine
method: cyclic
k_max: 2
starts: random 1 seed 1
checks: bounds
subspace:
  anchor: 0 0
  vectors:
    1 0
subspace:
  anchor: 0 1
  vectors:
    1 0
";
        let rep = run_scenario(&parse_scenario(text).unwrap()).unwrap();
        assert!(rep.error.is_some());
        assert!(!rep.all_passed());
    }

    #[test]
    fn random_starts_avoid_generator_streams() {
        let s = crate::experiment::generate_two_subspace(60.0, 5, 2, 3).unwrap();
        let m = crate::subspace::intersection(&s.linear_subspaces().unwrap()).unwrap();
        for x in resolve_starts(&s) {
            assert!((&x - m.project(&x).unwrap()).norm() > 1e-3);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let s = with_all_checks(&parse_scenario(SIXTY).unwrap());
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
    }
}
