//! Individual verification checks. Each returns the residual it actually
//! computed together with the tolerance it was judged against.

use super::report::{CheckOutcome, TraceSummary};
use crate::angles::{cos_two, friedrichs_from_norm, friedrichs_gram, FriedrichsResult};
use crate::error::{Error, Result};
use crate::numlin::{self, Vector};
use crate::productspace::{build_product, pierra_lift_residuals, NormChainEvaluator};
use crate::projmethods::{
    compare_methods, cyclic_operator, kw_bound, simultaneous_operator, verify_error_identity,
    IterOperator, IterationTrace,
};
use crate::subspace::Subspace;
use crate::tolerances;

fn within(check: &str, property: &str, residual: f64, tolerance: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        check: check.into(),
        property: property.into(),
        passed: residual <= tolerance,
        residual: Some(residual),
        tolerance,
        detail,
    }
}

fn errored(check: &str, property: &str, tolerance: f64, err: &Error) -> CheckOutcome {
    CheckOutcome {
        check: check.into(),
        property: property.into(),
        passed: false,
        residual: None,
        tolerance,
        detail: err.to_string(),
    }
}

fn capture(
    check: &str,
    property: &str,
    tolerance: f64,
    run: impl FnOnce() -> Result<CheckOutcome>,
) -> CheckOutcome {
    run().unwrap_or_else(|e| errored(check, property, tolerance, &e))
}

fn max_over(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// The six-member norm chain for `k = 1..=k_max`. Also returns the worst
/// residual per adjacent pair, or `None` when the instance is degenerate.
pub fn norm_chain(list: &[Subspace], k_max: usize) -> (CheckOutcome, Option<[f64; 5]>) {
    let tol = tolerances::NORM_CHAIN;
    let eval = match NormChainEvaluator::new(list) {
        Ok(e) => e,
        Err(Error::Degenerate(msg)) => {
            return (within("norm_chain", "chain", 0.0, tol, format!("degenerate: {msg}")), None)
        }
        Err(e) => return (errored("norm_chain", "chain", tol, &e), None),
    };
    let mut worst = [0.0f64; 5];
    for k in 1..=k_max {
        match eval.at(k) {
            Ok(chain) => {
                for (w, r) in worst.iter_mut().zip(chain.residuals()) {
                    *w = w.max(r);
                }
            }
            Err(e) => return (errored("norm_chain", "chain", tol, &e), None),
        }
    }
    let outcome = within(
        "norm_chain",
        "chain",
        max_over(worst),
        tol,
        format!("k = 1..={k_max}, worst adjacent residuals {worst:?}"),
    );
    (outcome, Some(worst))
}

/// `‖(P₂P₁)^k − P_M‖` against `cos^(2k−1)` for `k = 1..=k_max`.
pub fn kw(list: &[Subspace], k_max: usize) -> CheckOutcome {
    let tol = tolerances::KW;
    capture("kw", "exact_norm", tol, || {
        let [m1, m2] = pair(list)?;
        let op = cyclic_operator(list)?;
        let mut worst = 0.0f64;
        for k in 1..=k_max {
            worst = worst.max((op.error_operator_norm(k)? - kw_bound(m1, m2, k)?).abs());
        }
        Ok(within("kw", "exact_norm", worst, tol, format!("k = 1..={k_max}")))
    })
}

fn pair(list: &[Subspace]) -> Result<[&Subspace; 2]> {
    match list {
        [a, b] => Ok([a, b]),
        _ => Err(Error::invalid(format!(
            "check needs exactly two subspaces, got {}",
            list.len()
        ))),
    }
}

fn identity_outcome(property: &str, op: Result<IterOperator>, k_max: usize) -> CheckOutcome {
    let tol = tolerances::LEMMA_IDENTITY;
    capture("lemma_identity", property, tol, || {
        let op = op?;
        let mut worst = 0.0f64;
        for k in 1..=k_max {
            worst = worst.max(verify_error_identity(&op, k)?);
        }
        Ok(within("lemma_identity", property, worst, tol, format!("k = 1..={k_max}")))
    })
}

/// `T^k − P_M = (T − P_M)^k` for both the simultaneous and cyclic operators.
pub fn lemma_identity(list: &[Subspace], k_max: usize) -> Vec<CheckOutcome> {
    vec![
        identity_outcome("simultaneous", simultaneous_operator(list), k_max),
        identity_outcome("cyclic", cyclic_operator(list), k_max),
    ]
}

/// Alternating bound never above the simultaneous one, strictly below it
/// whenever the pair is not nearly aligned. Identical subspaces are exempt
/// from the strict gap: both error operators vanish.
pub fn compare(list: &[Subspace], k_max: usize) -> Vec<CheckOutcome> {
    let tol = tolerances::COMPARE;
    let computed = (|| -> Result<(f64, f64, FriedrichsResult)> {
        let [m1, m2] = pair(list)?;
        let mut excess = 0.0f64;
        let mut gap = f64::INFINITY;
        for k in 1..=k_max {
            let (alt, sim) = compare_methods(m1, m2, k)?;
            excess = excess.max(alt - sim);
            gap = gap.min(sim - alt);
        }
        Ok((excess, gap, cos_two(m1, m2)?))
    })();
    let (excess, gap, cos) = match computed {
        Ok(v) => v,
        Err(e) => return vec![errored("compare", "ordering", tol, &e)],
    };
    let mut out = vec![within(
        "compare",
        "ordering",
        excess,
        tol,
        format!("max over k of kw_bound − simultaneous bound, k = 1..={k_max}"),
    )];
    if !cos.degenerate && cos.raw <= 1.0 - 1e-6 {
        out.push(CheckOutcome {
            check: "compare".into(),
            property: "strict_gap".into(),
            passed: gap >= tol,
            residual: Some(gap),
            tolerance: tol,
            detail: format!("cos = {:?}; minimum gap must be at least the tolerance", cos.raw),
        });
    }
    out
}

/// Product-space lift against the base simultaneous iteration. Residuals are
/// relative to `max(1, ‖x‖)`; affine callers pass `x − P_V(0)`.
pub fn pierra_lift(list: &[Subspace], starts: &[Vector], k_max: usize) -> CheckOutcome {
    let tol = tolerances::PIERRA_LIFT;
    capture("pierra_lift", "lift", tol, || {
        let mut worst = 0.0f64;
        for x in starts {
            let scale = x.norm().max(1.0);
            worst = worst.max(max_over(pierra_lift_residuals(list, x, k_max)?) / scale);
        }
        Ok(within(
            "pierra_lift",
            "lift",
            worst,
            tol,
            format!("{} starts, k = 0..={k_max}", starts.len()),
        ))
    })
}

/// `errors[k] ≤ bounds[k]` along every trace, relative to `max(1, bounds[0])`
/// (`bounds[0]` is the start's norm, or its distance to `P_V(0)`).
pub fn bound_validity(traces: &[TraceSummary]) -> CheckOutcome {
    let worst = max_over(traces.iter().map(|t| {
        let scale = t.bounds.first().copied().unwrap_or(0.0).max(1.0);
        t.max_violation / scale
    }));
    within(
        "bounds",
        "validity",
        worst,
        tolerances::BOUND_VIOLATION,
        format!("{} traces", traces.len()),
    )
}

/// Simultaneous errors never increase; same relative scaling as validity.
pub fn monotone(traces: &[TraceSummary]) -> CheckOutcome {
    let worst = max_over(traces.iter().map(|t| {
        let scale = t.bounds.first().copied().unwrap_or(0.0).max(1.0);
        max_over(t.errors.windows(2).map(|w| w[1] - w[0])) / scale
    }));
    within(
        "bounds",
        "monotone",
        worst,
        tolerances::BOUND_VIOLATION,
        format!("{} traces", traces.len()),
    )
}

/// The adversarial trace must reach its bound at every `k ≥ 1`.
pub fn tightness(trace: Result<IterationTrace>) -> CheckOutcome {
    let tol = tolerances::TIGHTNESS;
    capture("bounds", "tightness", tol, || {
        let t = trace?;
        let shortfall = max_over(
            t.errors
                .iter()
                .zip(&t.bounds)
                .skip(1)
                .map(|(e, b)| b - e),
        );
        Ok(within(
            "bounds",
            "tightness",
            shortfall,
            tol,
            "top singular vector of T − P_M as start".into(),
        ))
    })
}

/// Two error sequences that must agree, e.g. affine and translated linear.
pub fn translation(affine: Result<IterationTrace>, linear: Result<IterationTrace>) -> CheckOutcome {
    let tol = tolerances::CONTAINMENT;
    capture("bounds", "translation", tol, || {
        let (a, l) = (affine?, linear?);
        let worst = max_over(a.errors.iter().zip(&l.errors).map(|(x, y)| (x - y).abs()));
        Ok(within(
            "bounds",
            "translation",
            worst,
            tol,
            "affine iteration against linear iteration on x − P_V(0)".into(),
        ))
    })
}

/// Gram-block, norm-inversion and (for pairs) principal-angle routes agree.
pub fn route_agreement(list: &[Subspace]) -> CheckOutcome {
    let tol = tolerances::ROUTE_AGREEMENT;
    capture("route_agreement", "friedrichs", tol, || {
        let gram = friedrichs_gram(list)?;
        if gram.degenerate {
            return Ok(within(
                "route_agreement",
                "friedrichs",
                0.0,
                tol,
                "degenerate instance".into(),
            ));
        }
        let mut worst = (friedrichs_from_norm(list)?.raw - gram.raw).abs();
        if let [a, b] = list {
            worst = worst.max((cos_two(a, b)?.raw - gram.raw).abs());
        }
        Ok(within(
            "route_agreement",
            "friedrichs",
            worst,
            tol,
            format!("gram route value {:?}", gram.raw),
        ))
    })
}

/// The four quantities that are each below 1 exactly when the subspaces are
/// not aligned: the Friedrichs number, `‖T − P_M‖`, `‖P_D P_C − P_{C∩D}‖`
/// and `cos(C, D)`.
pub fn alignment_quantities(list: &[Subspace]) -> Result<Option<[f64; 4]>> {
    let gram = friedrichs_gram(list)?;
    if gram.degenerate {
        return Ok(None);
    }
    let op = simultaneous_operator(list)?;
    let model = build_product(list)?;
    let product_limit = model.c_cap_d()?.projector().into_matrix();
    Ok(Some([
        gram.raw,
        op.error_operator_norm(1)?,
        numlin::spectral_norm(&(model.alternating_operator() - product_limit))?,
        model.cos_cd()?.raw,
    ]))
}

/// All alignment quantities strictly below 1 on a non-degenerate instance.
pub fn not_aligned(list: &[Subspace]) -> CheckOutcome {
    let tol = 1.0 - tolerances::STRICT_BELOW_ONE;
    capture("not_aligned", "below_one", tol, || {
        Ok(match alignment_quantities(list)? {
            None => within("not_aligned", "below_one", 0.0, tol, "degenerate instance".into()),
            Some(v) => within(
                "not_aligned",
                "below_one",
                max_over(v),
                tol,
                format!("friedrichs, ‖T − P_M‖, ‖P_D P_C − P_(C∩D)‖, cos(C,D) = {v:?}"),
            ),
        })
    })
}
