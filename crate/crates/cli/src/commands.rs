//! One function per subcommand. Each returns the process exit code:
//! 0 for success / affirmative verdicts, 2 for negative verdicts; errors
//! bubble up as `anyhow::Error` and exit 1 in `main`.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{bail, Context, Result};
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use swstab_core::ladder::{FeedbackKind, ModeMatrices};
use swstab_core::normalform::{decompose, verify_normal_form};
use swstab_core::rate;
use swstab_core::rational::{approx, Rational};
use swstab_core::simulate::{
    adversarial_decay, exhaustive_fts_check, exhaustive_fts_check_prefixed, simulate,
    BudgetExceeded, ExhaustiveReport, InitialStates,
};
use swstab_core::synthesis::{certify_gains, decide_fts, reduce_inputs, FtsVerdict};
use swstab_core::system::SwitchedSystem;

use crate::format::{
    format_rational, parse_gains, parse_rational, parse_system, parse_vector_arg, parse_vectors,
    write_trajectory_csv,
};
use crate::plot::log_norm_svg;
use crate::report;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Md,
    Mi,
    Both,
}

impl ModeArg {
    pub fn kinds(self) -> Vec<FeedbackKind> {
        match self {
            ModeArg::Md => vec![FeedbackKind::ModeDependent],
            ModeArg::Mi => vec![FeedbackKind::ModeIndependent],
            ModeArg::Both => vec![FeedbackKind::ModeDependent, FeedbackKind::ModeIndependent],
        }
    }

    /// The single kind this run works with, for commands that cannot act on
    /// both at once.
    pub fn single(self, what: &str) -> Result<FeedbackKind> {
        match self {
            ModeArg::Md => Ok(FeedbackKind::ModeDependent),
            ModeArg::Mi => Ok(FeedbackKind::ModeIndependent),
            ModeArg::Both => bail!("{what} needs a single feedback kind; pass --mode md or --mode mi"),
        }
    }
}

/// Everything shared by all subcommands: the parsed system plus a note on
/// whether redundant input directions were dropped.
pub struct LoadedSystem {
    pub sys: SwitchedSystem,
    pub original_input_dim: usize,
    pub input_selection: Option<swstab_core::matrix::Matrix>,
}

impl LoadedSystem {
    pub fn load(path: &Path, reduce: bool) -> Result<Self> {
        let sys = parse_system(path)?;
        let original_input_dim = sys.input_dim();
        if reduce {
            let (reduced, selection) = reduce_inputs(&sys);
            Ok(Self { sys: reduced, original_input_dim, input_selection: Some(selection) })
        } else {
            Ok(Self { sys, original_input_dim, input_selection: None })
        }
    }

    fn meta(&self) -> Value {
        match &self.input_selection {
            Some(sel) => json!({
                "inputs_reduced": true,
                "original_input_dim": self.original_input_dim,
                "input_selection": report::matrix_json(sel),
            }),
            None => json!({ "inputs_reduced": false }),
        }
    }
}

fn merge_body(meta: Value, mut extra: Value) -> Value {
    let Value::Object(base) = meta else { unreachable!("meta is an object") };
    let Value::Object(entries) = extra.take() else { panic!("body must be an object") };
    let mut out = base;
    out.extend(entries);
    Value::Object(out)
}

fn verdict_json(sys: &SwitchedSystem, verdict: &FtsVerdict) -> Value {
    let mut entry = json!({
        "mode_kind": report::kind_json(verdict.ladder().kind),
        "fts": verdict.is_fts(),
        "horizon": verdict.horizon(),
        "ladder": report::ladder_json(verdict.ladder()),
    });
    let obj = entry.as_object_mut().expect("entry is an object");
    match verdict {
        FtsVerdict::Stabilizable { gains, .. } => {
            let cert = certify_gains(sys, &gains.gains, &gains.ladder);
            obj.insert("gains".into(), report::gains_json(&gains.gains));
            obj.insert("certification".into(), report::certification_json(&cert));
        }
        FtsVerdict::NotStabilizable { .. } => {
            let blocking = verdict.blocking_subspace().expect("non-FTS verdicts expose the obstruction");
            obj.insert("gains".into(), Value::Null);
            obj.insert("blocking_subspace".into(), report::subspace_json(blocking));
        }
    }
    entry
}

pub fn cmd_analyze(loaded: &LoadedSystem, mode: ModeArg) -> Result<i32> {
    let sys = &loaded.sys;
    let verdicts: Vec<FtsVerdict> =
        mode.kinds().into_iter().map(|kind| decide_fts(sys, kind)).collect();
    let body = json!({
        "verdicts": verdicts.iter().map(|v| verdict_json(sys, v)).collect::<Vec<_>>(),
    });
    report::print(&report::document("analyze", sys, merge_body(loaded.meta(), body)));
    Ok(if verdicts.iter().all(FtsVerdict::is_fts) { 0 } else { 2 })
}

pub fn cmd_decompose(
    loaded: &LoadedSystem,
    mode: ModeArg,
    matrices_out: Option<&Path>,
) -> Result<i32> {
    let sys = &loaded.sys;
    let mut entries = Vec::new();
    let mut files = Vec::new();
    for kind in mode.kinds() {
        let nf = decompose(sys, kind);
        let verification = verify_normal_form(&nf);
        let nf_json = report::normal_form_json(&nf);
        entries.push(json!({
            "mode_kind": report::kind_json(kind),
            "normal_form": nf_json.clone(),
            "verification": report::normal_form_report_json(&verification),
        }));
        files.push(nf_json);
    }
    if let Some(path) = matrices_out {
        let doc = json!({ "decompositions": files });
        fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let body = json!({
        "decompositions": entries,
        "matrices_file": matrices_out.map(|p| p.display().to_string()),
    });
    report::print(&report::document("decompose", sys, merge_body(loaded.meta(), body)));
    Ok(0)
}

/// Gains for closed-loop commands: either synthesized on the spot for one
/// feedback kind, or read from a file whose `mode_kind` field governs.
fn resolve_gains(sys: &SwitchedSystem, spec: &str, mode: ModeArg) -> Result<(ModeMatrices, String)> {
    if spec == "from-analysis" {
        let kind = mode.single("synthesizing gains")?;
        match decide_fts(sys, kind) {
            FtsVerdict::Stabilizable { gains, .. } => Ok((gains.gains, "from-analysis".into())),
            FtsVerdict::NotStabilizable { .. } => bail!(
                "system is not fixed-time stabilizable with {} feedback; \
                 supply gains with --gains FILE",
                match kind {
                    FeedbackKind::ModeDependent => "mode-dependent",
                    FeedbackKind::ModeIndependent => "mode-independent",
                }
            ),
        }
    } else {
        let path = PathBuf::from(spec);
        let gains = parse_gains(&path)?;
        check_gain_shapes(sys, &gains)?;
        Ok((gains, spec.to_string()))
    }
}

fn check_gain_shapes(sys: &SwitchedSystem, gains: &ModeMatrices) -> Result<()> {
    if let ModeMatrices::PerMode(ks) = gains {
        if ks.len() != sys.mode_count() {
            bail!("gains file has {} matrices, system has {} modes", ks.len(), sys.mode_count());
        }
    }
    for j in 0..sys.mode_count() {
        let k = gains.for_mode(j);
        if k.rows() != sys.input_dim() || k.cols() != sys.state_dim() {
            bail!(
                "gain matrix for mode {} is {}x{}, expected {}x{}",
                j + 1,
                k.rows(),
                k.cols(),
                sys.input_dim(),
                sys.state_dim()
            );
        }
    }
    Ok(())
}

enum SigmaSpec {
    Explicit(Vec<usize>),
    Adversarial,
    Random(u64),
}

fn parse_sigma_spec(text: &str) -> Result<SigmaSpec> {
    let trimmed = text.trim();
    if trimmed == "adversarial" {
        return Ok(SigmaSpec::Adversarial);
    }
    if let Some(seed) = trimmed.strip_prefix("random:") {
        let seed: u64 = seed.parse().with_context(|| format!("random seed `{seed}`"))?;
        return Ok(SigmaSpec::Random(seed));
    }
    if trimmed.is_empty() {
        return Ok(SigmaSpec::Explicit(Vec::new()));
    }
    let mut modes = Vec::new();
    for part in trimmed.split(',') {
        let j: usize = part
            .trim()
            .parse()
            .with_context(|| format!("mode `{}` in switching sequence", part.trim()))?;
        if j == 0 {
            bail!("modes are numbered from 1");
        }
        modes.push(j - 1);
    }
    Ok(SigmaSpec::Explicit(modes))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    loaded: &LoadedSystem,
    mode: ModeArg,
    gains_spec: &str,
    sigma_spec: &str,
    x0_arg: &str,
    steps: Option<usize>,
    csv_out: Option<&Path>,
    plot_out: Option<&Path>,
) -> Result<i32> {
    let sys = &loaded.sys;
    let (gains, gains_source) = resolve_gains(sys, gains_spec, mode)?;
    let x0 = parse_vector_arg(x0_arg).context("parsing --x0")?;
    if x0.len() != sys.state_dim() {
        bail!("--x0 has {} entries, state dimension is {}", x0.len(), sys.state_dim());
    }

    let spec = parse_sigma_spec(sigma_spec).context("parsing --sigma")?;
    let mut adversarial_extras = None;
    let trajectory = match spec {
        SigmaSpec::Explicit(modes) => {
            if let Some(&bad) = modes.iter().find(|&&j| j >= sys.mode_count()) {
                bail!("mode {} out of range; system has {} modes", bad + 1, sys.mode_count());
            }
            let steps = steps.unwrap_or(modes.len());
            if steps > modes.len() {
                bail!(
                    "--steps {} exceeds the {} modes given in --sigma",
                    steps,
                    modes.len()
                );
            }
            simulate(sys, &gains, &x0, &modes[..steps])
        }
        SigmaSpec::Random(seed) => {
            let steps = steps.unwrap_or(10);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sigma: Vec<usize> =
                (0..steps).map(|_| rng.random_range(0..sys.mode_count())).collect();
            simulate(sys, &gains, &x0, &sigma)
        }
        SigmaSpec::Adversarial => {
            let steps = steps.unwrap_or(10);
            let run = adversarial_decay(sys, &gains, &x0, steps);
            adversarial_extras = Some(json!({
                "ratios_sq": run.ratios_sq.iter().map(report::rational_json).collect::<Vec<_>>(),
                "geo_mean_rate_approx": run.geo_mean_rate,
            }));
            run.trajectory
        }
    };

    if let Some(path) = csv_out {
        write_trajectory_csv(path, &trajectory)?;
    }
    if let Some(path) = plot_out {
        let norms: Vec<f64> = trajectory.norms_sq().iter().map(approx).collect();
        let svg = log_norm_svg(&norms, "closed-loop state norm");
        fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }

    let body = json!({
        "gains_source": gains_source,
        "gains": report::gains_json(&gains),
        "trajectory": report::trajectory_json(&trajectory),
        "adversarial": adversarial_extras,
        "csv_file": csv_out.map(|p| p.display().to_string()),
        "plot_file": plot_out.map(|p| p.display().to_string()),
    });
    report::print(&report::document("simulate", sys, merge_body(loaded.meta(), body)));
    Ok(0)
}

pub fn cmd_verify(
    loaded: &LoadedSystem,
    gains_path: &Path,
    horizon: usize,
    initial_path: Option<&Path>,
    threads: usize,
    budget: u128,
) -> Result<i32> {
    let sys = &loaded.sys;
    let gains = parse_gains(gains_path)?;
    check_gain_shapes(sys, &gains)?;
    let initial = match initial_path {
        Some(path) => {
            let vectors = parse_vectors(path)?;
            for (i, v) in vectors.iter().enumerate() {
                if v.len() != sys.state_dim() {
                    bail!(
                        "initial vector {} has {} entries, state dimension is {}",
                        i + 1,
                        v.len(),
                        sys.state_dim()
                    );
                }
            }
            InitialStates::Explicit(vectors)
        }
        None => InitialStates::StandardBasis,
    };

    let result = if threads > 1 && horizon > 0 {
        run_verify_parallel(sys, &gains, horizon, &initial, threads, budget)?
    } else {
        exhaustive_fts_check(sys, &gains, horizon, &initial, budget)?
    };

    let body = json!({
        "gains_file": gains_path.display().to_string(),
        "gains": report::gains_json(&gains),
        "initial_states": match &initial {
            InitialStates::StandardBasis => json!("standard-basis"),
            InitialStates::Explicit(v) => json!({ "explicit_count": v.len() }),
        },
        "threads": threads,
        "result": report::exhaustive_json(&result),
    });
    report::print(&report::document("verify", sys, merge_body(loaded.meta(), body)));
    Ok(if result.all_reach_zero { 0 } else { 2 })
}

/// Splits the enumeration by first mode, runs slices on worker threads, and
/// merges the per-prefix reports in prefix order. The merged report is
/// identical to the single-threaded one: counts add up and the surviving
/// counterexample is the lexicographically first.
fn run_verify_parallel(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    horizon: usize,
    initial: &InitialStates,
    threads: usize,
    budget: u128,
) -> Result<ExhaustiveReport, BudgetExceeded> {
    let initial_count = match initial {
        InitialStates::StandardBasis => sys.state_dim(),
        InitialStates::Explicit(v) => v.len(),
    } as u128;
    let required = u32::try_from(horizon)
        .ok()
        .and_then(|h| (sys.mode_count() as u128).checked_pow(h))
        .and_then(|s| s.checked_mul(initial_count))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(BudgetExceeded { required, budget });
    }

    let prefixes: Vec<usize> = (0..sys.mode_count()).collect();
    let workers = threads.min(prefixes.len()).max(1);
    let mut slots: Vec<Option<ExhaustiveReport>> = vec![None; prefixes.len()];
    thread::scope(|scope| {
        let mut handles = Vec::new();
        for worker in 0..workers {
            let prefixes = &prefixes;
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                for (i, &first) in prefixes.iter().enumerate().skip(worker).step_by(workers) {
                    // Budget already checked for the whole run.
                    let slice = exhaustive_fts_check_prefixed(
                        sys,
                        gains,
                        horizon,
                        initial,
                        &[first],
                        u128::MAX,
                    )
                    .expect("per-prefix budget is unlimited");
                    out.push((i, slice));
                }
                out
            }));
        }
        for handle in handles {
            for (i, slice) in handle.join().expect("verification worker panicked") {
                slots[i] = Some(slice);
            }
        }
    });

    let mut sequences_checked = 0u128;
    let mut counterexample = None;
    for slot in slots {
        let slice = slot.expect("every prefix produced a report");
        sequences_checked += slice.sequences_checked;
        if counterexample.is_none() {
            counterexample = slice.counterexample;
        }
    }
    Ok(ExhaustiveReport {
        horizon,
        all_reach_zero: counterexample.is_none(),
        counterexample,
        sequences_checked,
    })
}

pub struct RateFlags<'a> {
    pub scalar: bool,
    pub lower_bound: Option<(usize, u64)>,
    pub certificate: Option<&'a str>,
}

pub fn cmd_rate(
    loaded: &LoadedSystem,
    mode: ModeArg,
    flags: RateFlags<'_>,
    budget: u128,
) -> Result<i32> {
    let sys = &loaded.sys;
    if flags.scalar {
        return rate_scalar(loaded, mode);
    }
    if let Some((samples, seed)) = flags.lower_bound {
        return rate_lower_bound(loaded, mode, samples, seed);
    }
    if let Some(rho) = flags.certificate {
        return rate_certificate(loaded, mode, rho, budget);
    }

    let verdicts: Vec<_> = mode.kinds().into_iter().map(|kind| rate::arbitrarily_fast(sys, kind)).collect();
    let body = json!({
        "verdicts": verdicts.iter().map(|v| json!({
            "mode_kind": report::kind_json(v.kind),
            "arbitrarily_fast": v.arbitrarily_fast,
            "fts_horizon": v.fts_horizon,
        })).collect::<Vec<_>>(),
    });
    report::print(&report::document("rate", sys, merge_body(loaded.meta(), body)));
    Ok(if verdicts.iter().all(|v| v.arbitrarily_fast) { 0 } else { 2 })
}

fn rate_scalar(loaded: &LoadedSystem, mode: ModeArg) -> Result<i32> {
    let sys = &loaded.sys;
    if sys.state_dim() != 1 {
        bail!(
            "--scalar needs a one-dimensional state (got n = {}); \
             decompose first and extract the residual subsystem",
            sys.state_dim()
        );
    }
    if sys.input_dim() > 1 {
        bail!("--scalar supports at most one input (got m = {})", sys.input_dim());
    }
    let a: Vec<Rational> = (0..sys.mode_count()).map(|j| sys.a(j)[(0, 0)].clone()).collect();
    let b: Vec<Rational> = (0..sys.mode_count())
        .map(|j| {
            if sys.input_dim() == 0 {
                Rational::zero()
            } else {
                sys.b(j)[(0, 0)].clone()
            }
        })
        .collect();

    let mut entries = Vec::new();
    for kind in mode.kinds() {
        match kind {
            FeedbackKind::ModeIndependent => {
                let (rate, argmin) = rate::scalar_min_rate_mi(&a, &b);
                entries.push(json!({
                    "mode_kind": "mi",
                    "rate": report::rational_json(&rate),
                    "rate_approx": approx(&rate),
                    "argmin": report::rational_json(&argmin),
                    "argmin_approx": approx(&argmin),
                }));
            }
            FeedbackKind::ModeDependent => {
                let rate = rate::scalar_min_rate_md(&a, &b);
                entries.push(json!({
                    "mode_kind": "md",
                    "rate": report::rational_json(&rate),
                    "rate_approx": approx(&rate),
                }));
            }
        }
    }
    let body = json!({
        "a": a.iter().map(report::rational_json).collect::<Vec<_>>(),
        "b": b.iter().map(report::rational_json).collect::<Vec<_>>(),
        "scalar_rates": entries,
    });
    report::print(&report::document("rate", sys, merge_body(loaded.meta(), body)));
    Ok(0)
}

fn rate_lower_bound(loaded: &LoadedSystem, mode: ModeArg, samples: usize, seed: u64) -> Result<i32> {
    let sys = &loaded.sys;
    if mode != ModeArg::Mi {
        bail!("the sampling estimator bounds the shared-feedback rate; pass --mode mi");
    }
    if sys.state_dim() == 0 {
        bail!("state space is zero-dimensional; nothing to estimate");
    }
    let stacked = sys.stacked_b();
    if stacked.rank() < sys.input_dim() {
        bail!(
            "input directions are linearly dependent across modes; \
             rerun with --reduce-inputs so the estimate is meaningful"
        );
    }
    let estimate = rate::lower_bound_rate_mi(sys, samples, seed);
    let body = json!({
        "lower_bound": {
            "estimate_approx": estimate.estimate,
            "samples": estimate.samples,
            "seed": estimate.seed,
            "certified": estimate.certified,
        },
    });
    report::print(&report::document("rate", sys, merge_body(loaded.meta(), body)));
    Ok(0)
}

fn rate_certificate(loaded: &LoadedSystem, mode: ModeArg, rho_text: &str, budget: u128) -> Result<i32> {
    let sys = &loaded.sys;
    let rho = parse_rational(rho_text).context("parsing --certificate RHO")?;
    if !rho.is_positive() {
        bail!("decay rate must be positive, got {}", format_rational(&rho));
    }
    let kind = mode.single("building a decay certificate")?;
    let gains = match decide_fts(sys, kind) {
        FtsVerdict::Stabilizable { gains, .. } => gains.gains,
        FtsVerdict::NotStabilizable { .. } => {
            bail!("{}", rate::NotFts)
        }
    };
    let cert = rate::decay_certificate(sys, &gains, &rho)?;
    // Check the claimed bound exhaustively over the annihilation window;
    // past it the state is exactly zero, so the window carries the content.
    let verification = match rate::verify_decay_bound(sys, &cert, cert.horizon, budget) {
        Ok(report) => json!({
            "holds": report.holds(),
            "horizon": report.horizon,
            "pairs_checked": report::count_json(report.pairs_checked),
            "first_violation": report.first_violation.as_ref().map(|v| json!({
                "sigma": report::sigma_json(&v.sigma),
                "x0": report::vector_json(&v.x0),
                "step": v.step,
            })),
        }),
        Err(exceeded) => json!({ "skipped": exceeded.to_string() }),
    };
    let body = json!({
        "certificate": {
            "mode_kind": report::kind_json(kind),
            "rho": report::rational_json(&cert.rho),
            "rho_approx": approx(&cert.rho),
            "mu": report::rational_json(&cert.mu),
            "c": report::rational_json(&cert.c),
            "c_approx": approx(&cert.c),
            "horizon": cert.horizon,
            "gains": report::gains_json(&cert.gains),
        },
        "verification": verification,
    });
    report::print(&report::document("rate", sys, merge_body(loaded.meta(), body)));
    Ok(0)
}
