//! Report assembly: everything exact goes out as rational strings, floats
//! only in fields named `*_approx`. Mode indices are 1-based in all output.

use serde_json::{json, Map, Value};

use swstab_core::ladder::{FeedbackKind, Ladder, ModeMatrices};
use swstab_core::matrix::Matrix;
use swstab_core::normalform::{NormalForm, NormalFormReport};
use swstab_core::rational::Rational;
use swstab_core::simulate::{ExhaustiveReport, Trajectory};
use swstab_core::subspace::Subspace;
use swstab_core::synthesis::CertReport;
use swstab_core::system::SwitchedSystem;

use crate::format::format_rational;

pub fn rational_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn vector_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_json).collect())
}

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array((0..m.cols()).map(|c| rational_json(&m[(r, c)])).collect()))
            .collect(),
    )
}

pub fn kind_json(kind: FeedbackKind) -> Value {
    match kind {
        FeedbackKind::ModeDependent => json!("md"),
        FeedbackKind::ModeIndependent => json!("mi"),
    }
}

/// 1-based mode sequence.
pub fn sigma_json(sigma: &[usize]) -> Value {
    Value::Array(sigma.iter().map(|&j| json!(j + 1)).collect())
}

pub fn count_json(count: u128) -> Value {
    Value::String(count.to_string())
}

pub fn system_json(sys: &SwitchedSystem) -> Value {
    json!({
        "state_dim": sys.state_dim(),
        "input_dim": sys.input_dim(),
        "mode_count": sys.mode_count(),
    })
}

pub fn subspace_json(s: &Subspace) -> Value {
    json!({
        "dim": s.dim(),
        "basis_columns": (0..s.dim()).map(|i| vector_json(&s.basis().col(i))).collect::<Vec<_>>(),
    })
}

pub fn gains_json(gains: &ModeMatrices) -> Value {
    match gains {
        ModeMatrices::PerMode(ks) => json!({
            "mode_kind": "md",
            "K": ks.iter().map(matrix_json).collect::<Vec<_>>(),
        }),
        ModeMatrices::Shared(k) => json!({
            "mode_kind": "mi",
            "K": matrix_json(k),
        }),
    }
}

pub fn ladder_json(ladder: &Ladder) -> Value {
    json!({
        "level_dims": ladder.level_dims(),
        "fixed_point_index": ladder.fixed_point_index(),
        "fixed_point": subspace_json(ladder.fixed_point()),
    })
}

pub fn certification_json(report: &CertReport) -> Value {
    json!({
        "checks": report.checks,
        "passed": report.passed(),
        "violations": report.violations.iter().map(|v| json!({
            "level": v.level,
            "mode": v.mode + 1,
            "column": v.column + 1,
        })).collect::<Vec<_>>(),
    })
}

pub fn exhaustive_json(report: &ExhaustiveReport) -> Value {
    json!({
        "horizon": report.horizon,
        "all_reach_zero": report.all_reach_zero,
        "sequences_checked": count_json(report.sequences_checked),
        "counterexample": report.counterexample.as_ref().map(|ce| json!({
            "sigma": sigma_json(&ce.sigma),
            "x0": vector_json(&ce.x0),
            "final_state": vector_json(&ce.final_state),
        })),
    })
}

pub fn trajectory_json(traj: &Trajectory) -> Value {
    json!({
        "sigma": sigma_json(&traj.sigma),
        "states": traj.states.iter().map(|x| vector_json(x)).collect::<Vec<_>>(),
        "inputs": traj.inputs.iter().map(|u| vector_json(u)).collect::<Vec<_>>(),
        "norms_sq": traj.norms_sq().iter().map(rational_json).collect::<Vec<_>>(),
        "first_zero_step": traj.first_zero_step(),
    })
}

pub fn normal_form_json(nf: &NormalForm) -> Value {
    json!({
        "mode_kind": kind_json(nf.kind),
        "stable_dim": nf.stable_dim,
        "residual_dim": nf.residual_dim(),
        "horizon": nf.horizon,
        "transform": matrix_json(&nf.transform),
        "transform_inv": matrix_json(&nf.transform_inv),
        "base_gains": gains_json(&nf.base_gains),
        "blocks": nf.blocks.iter().enumerate().map(|(j, b)| json!({
            "mode": j + 1,
            "a_yy": matrix_json(&b.a_yy),
            "a_yxi": matrix_json(&b.a_yxi),
            "a_xixi": matrix_json(&b.a_xixi),
            "b_y": matrix_json(&b.b_y),
            "b_xi": matrix_json(&b.b_xi),
        })).collect::<Vec<_>>(),
    })
}

pub fn normal_form_report_json(report: &NormalFormReport) -> Value {
    json!({
        "passed": report.passed(),
        "coupling_violations": report.coupling_violations.iter().map(|&j| j + 1).collect::<Vec<_>>(),
        "block_mismatches": report.block_mismatches.iter().map(|&j| j + 1).collect::<Vec<_>>(),
        "products_checked": count_json(report.products_checked),
        "nonzero_products": count_json(report.nonzero_products),
        "first_nonzero_product": report.first_nonzero_product.as_ref().map(|s| sigma_json(s)),
        "xi_fixed_point_dim": report.xi_fixed_point_dim,
    })
}

/// Assembles the top-level report document. `body` must be a JSON object;
/// its entries follow the command echo and system digest.
pub fn document(command: &str, sys: &SwitchedSystem, body: Value) -> Value {
    let mut root = Map::new();
    root.insert("command".into(), json!(command));
    root.insert("system".into(), system_json(sys));
    match body {
        Value::Object(entries) => root.extend(entries),
        other => panic!("report body must be an object, got {other}"),
    }
    Value::Object(root)
}

pub fn print(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}
