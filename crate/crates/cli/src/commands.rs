use std::f64::consts::PI;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::Serialize;
use serde_json::json;

use hjlab::format;
use hjlab::hopf_lax::{self, make_trace_with, ResidualStep, ResidualSummary, TraceDocument};
use hjlab::inequalities::{
    estimate_constant, phi_trace, psi_trace, smoothed_random_field, verify_chain, CandidateResult, Inequality,
    InequalityReport, Witness, WitnessFamily, WitnessSuites, REPRODUCE_TOL,
};
use hjlab::space::MetricReport;
use hjlab::transport::{brute_force_w2, w2, w2_oracle_1d, PlanDocument, BRUTE_FORCE_MAX_N};
use hjlab::{Error, MeasuredSpace, SpaceSpec};

use crate::output::{csv, field_csv, num, OutDir};
use crate::plot;
use crate::spec::{FieldSpec, MeasureSpec, TimeGrid, RANDOM_SMOOTHING};
use crate::{
    ChainArgs, Command, ConstantsArgs, DoublingArgs, FamilyArgs, GenArgs, Kind, SemigroupArgs, TransportArgs,
};

/// Largest duality gap accepted from the transport solver.
pub const GAP_TOL: f64 = 1e-9;
/// Largest disagreement accepted between the solver and an oracle.
pub const ORACLE_TOL: f64 = 1e-8;

/// Result of a command that ran to completion.
pub struct Outcome {
    pub pass: bool,
    pub message: String,
    pub summary: serde_json::Value,
}

pub fn run(command: &Command, out: &mut OutDir) -> Result<Outcome> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Semigroup(a) => semigroup(a, out),
        Command::Constants(a) => constants(a, out),
        Command::Chain(a) => chain(a, out),
        Command::Transport(a) => transport(a, out),
        Command::Doubling(a) => doubling(a, out),
        Command::Plot(a) => plot::emit(a, out),
    }
}

fn load_space(text: &str) -> Result<(SpaceSpec, MeasuredSpace)> {
    let spec: SpaceSpec = text.parse().with_context(|| format!("bad space `{text}`"))?;
    let space = spec.generate().with_context(|| format!("cannot build space `{text}`"))?;
    Ok((spec, space))
}

fn space_header(spec: &SpaceSpec, space: &MeasuredSpace) -> serde_json::Value {
    json!({
        "spec": spec.to_string(),
        "id": space.id().to_string(),
        "n": space.n(),
        "mesh_h": space.mesh_h(),
        "diameter": space.diameter(),
        "midpoint_defect": space.midpoint_defect(),
        "truncation_mass": spec.truncation_mass(),
    })
}

fn gen(a: &GenArgs, out: &mut OutDir) -> Result<Outcome> {
    let spec = match a.kind {
        Kind::Circle => SpaceSpec::Circle {
            n: a.n,
            circumference: a.length.unwrap_or(2.0 * PI),
        },
        Kind::Gauss => SpaceSpec::GaussianInterval {
            n: a.n,
            sigma: a.sigma,
            half_width: a.half_width,
        },
        Kind::Torus => {
            let width = a.length.unwrap_or(2.0 * PI);
            SpaceSpec::Torus {
                n: a.n,
                m: a.m.unwrap_or(a.n),
                width,
                height: a.height.unwrap_or(width),
            }
        }
        Kind::Path => SpaceSpec::Path { n: a.n },
        Kind::Complete => SpaceSpec::Complete { n: a.n },
    };
    let space = spec.generate()?;
    let path = out.write(&a.out, format::to_json(&space).as_bytes())?;
    Ok(Outcome {
        pass: true,
        message: format!("wrote {} ({} points, spec {spec})", path.display(), space.n()),
        summary: space_header(&spec, &space),
    })
}

#[derive(Serialize)]
struct ResidualSweep {
    t: f64,
    rows: Vec<ResidualSummary>,
}

#[derive(Serialize)]
struct MeshRow {
    spec: String,
    n: usize,
    mesh_h: f64,
    t: f64,
    s: f64,
    defect: f64,
}

#[derive(Serialize)]
struct TraceReport {
    space: serde_json::Value,
    field: String,
    step: ResidualStep,
    trace: TraceDocument,
    residual_sweep: Option<ResidualSweep>,
    mesh_sweep: Option<Vec<MeshRow>>,
}

fn semigroup(a: &SemigroupArgs, out: &mut OutDir) -> Result<Outcome> {
    let (spec, space) = load_space(&a.space)?;
    let field_spec: FieldSpec = a.field.parse()?;
    let grid: TimeGrid = a.times.parse()?;
    let f = field_spec.resolve(&space)?;
    let step = match a.step {
        Some(s) => ResidualStep::Fixed(s),
        None => ResidualStep::Relative(a.step_fraction),
    };
    ensure!(a.at > 0.0 && a.at.is_finite(), "--at must be a positive time");
    let trace = make_trace_with(&space, &f, &grid.times, step)?;

    let residual_sweep = if a.residual_steps.is_empty() {
        None
    } else {
        let rows = a
            .residual_steps
            .iter()
            .map(|&s| {
                let r = hopf_lax::hj_forward_residual(&space, &f, a.at, s)?;
                Ok(hopf_lax::summarize_residual(&space, &r, a.at, s))
            })
            .collect::<Result<Vec<_>>>()?;
        Some(ResidualSweep { t: a.at, rows })
    };

    let mesh_sweep = if a.refine == 0 {
        None
    } else {
        ensure!(field_spec.is_analytic(), "--refine needs an analytic field, not `{field_spec}`");
        let mut rows = Vec::new();
        let mut level = spec.clone();
        for i in 0..=a.refine {
            if i > 0 {
                level = level.refine()?;
            }
            let s = level.generate()?;
            let g = field_spec.resolve(&s)?;
            rows.push(MeshRow {
                spec: level.to_string(),
                n: s.n(),
                mesh_h: s.mesh_h(),
                t: a.at,
                s: a.at,
                defect: hopf_lax::semigroup_defect(&s, &g, a.at, a.at)?,
            });
        }
        Some(rows)
    };

    let checks = trace.checks.clone();
    out.write("source.csv", field_csv(f.values()).as_bytes())?;
    let report = TraceReport {
        space: space_header(&spec, &space),
        field: field_spec.to_string(),
        step,
        trace: trace.to_document(),
        residual_sweep,
        mesh_sweep,
    };
    out.write_json("trace.json", &report)?;

    let pass = checks.all_pass();
    Ok(Outcome {
        pass,
        message: format!(
            "{} times; range {}, monotonicity {}, lipschitz {} violations; small-time gap {} (bound {}): {}",
            grid.times.len(),
            checks.range_violations,
            checks.monotonicity_violations,
            checks.lipschitz_violations,
            checks.small_time_gap,
            checks.small_time_bound,
            if pass { "pass" } else { "FAIL" }
        ),
        summary: serde_json::to_value(&checks)?,
    })
}

fn family(a: &FamilyArgs) -> Result<WitnessFamily> {
    ensure!(a.near_constant >= 0.0, "--near-constant must be nonnegative");
    Ok(WitnessFamily {
        tilts: a.tilts.clone(),
        eigenfields: a.eigen,
        near_constant: (a.near_constant > 0.0).then_some(a.near_constant),
        random: a.random,
        smoothing: RANDOM_SMOOTHING,
    })
}

#[derive(Serialize)]
struct EstimateDetail {
    inequality: Inequality,
    k_upper: f64,
    witness: String,
    candidates: Vec<CandidateResult>,
    excluded: Vec<(String, String)>,
}

fn constants(a: &ConstantsArgs, out: &mut OutDir) -> Result<Outcome> {
    let (spec, space) = load_space(&a.space)?;
    let which = a
        .which
        .iter()
        .map(|w| w.parse::<Inequality>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    ensure!(!which.is_empty(), "nothing to estimate");
    let fam = family(&a.family)?;

    let mut report = InequalityReport::new(&space);
    let mut details = Vec::new();
    for &w in &which {
        let est = estimate_constant(&space, w, &fam, a.budget, a.seed)?;
        out.write(&InequalityReport::field_ref(w), field_csv(est.witness.field.values()).as_bytes())?;
        details.push(EstimateDetail {
            inequality: w,
            k_upper: est.k_upper,
            witness: est.witness.label.clone(),
            candidates: est.candidates.clone(),
            excluded: est.excluded.clone(),
        });
        report.estimates.push(est);
    }
    let reproduction = report.reproduction_error(&space)?;
    out.write_json("report.json", &report.to_document())?;
    out.write_json("estimates.json", &json!({ "space": space_header(&spec, &space), "estimates": details }))?;

    let pass = reproduction <= REPRODUCE_TOL;
    let listed: Vec<String> = report
        .estimates
        .iter()
        .map(|e| format!("{} <= {} ({})", e.inequality, e.k_upper, e.witness.label))
        .collect();
    Ok(Outcome {
        pass,
        message: format!("K estimates: {}; reproduction error {reproduction:e}", listed.join(", ")),
        summary: json!({
            "k_upper": report.estimates.iter().map(|e| (e.inequality.name(), e.k_upper)).collect::<std::collections::BTreeMap<_, _>>(),
            "reproduction_error": reproduction,
        }),
    })
}

fn chain(a: &ChainArgs, out: &mut OutDir) -> Result<Outcome> {
    let (spec, space) = load_space(&a.space)?;
    let fam = family(&a.family)?;
    let suites = WitnessSuites::from_family(&space, &fam, a.seed)?;
    let chain = verify_chain(&space, a.k, &suites, a.tau)?;

    let psi_times: TimeGrid = a.psi_times.parse()?;
    let phi_times: TimeGrid = a.phi_times.parse()?;
    let t0 = RANDOM_SMOOTHING * space.mesh_h().powi(2);
    let mut fields = (0..a.traces as u64)
        .map(|i| {
            Ok(Witness {
                label: format!("random{i}"),
                field: smoothed_random_field(&space, a.seed, i, t0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for text in &a.trace_field {
        let f: FieldSpec = text.parse()?;
        fields.push(Witness {
            label: f.to_string(),
            field: f.resolve(&space)?,
        });
    }
    let mut report = InequalityReport::new(&space);
    for w in &fields {
        report.psi.push(psi_trace(&space, &w.field, a.k, &psi_times.times)?);
        report.phi.push(phi_trace(&space, &w.field, a.k, &phi_times.times)?);
    }
    let psi_excess = report.psi.iter().map(|p| p.max_excess).fold(f64::NEG_INFINITY, f64::max);
    let phi_step = report.phi.iter().map(|p| p.max_upward_step).fold(f64::NEG_INFINITY, f64::max);
    let verdict = chain.verdict.clone();
    report.chain = Some(chain.clone());

    out.write_json("report.json", &report.to_document())?;
    out.write_json(
        "chain.json",
        &json!({
            "space": space_header(&spec, &space),
            "trace_fields": fields.iter().map(|w| w.label.clone()).collect::<Vec<_>>(),
            "chain": chain,
        }),
    )?;

    let skipped = chain.skipped.len();
    Ok(Outcome {
        pass: verdict.is_consistent(),
        message: format!(
            "K = {}, tau = {}: {verdict}; {} witnesses checked, {skipped} skipped; max psi excess {}, max phi step {}",
            a.k,
            a.tau,
            chain.entries.len(),
            finite_or_null(psi_excess),
            finite_or_null(phi_step),
        ),
        summary: json!({
            "verdict": verdict,
            "checked": chain.entries.len(),
            "skipped": skipped,
            "psi_max_excess": finite_or_null(psi_excess),
            "phi_max_upward_step": finite_or_null(phi_step),
        }),
    })
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

#[derive(Serialize)]
struct OracleCheck {
    kind: &'static str,
    w2: f64,
    difference: f64,
}

#[derive(Serialize)]
struct TransportReport {
    space: serde_json::Value,
    mu0: String,
    mu1: String,
    w2: f64,
    pivots: usize,
    plan: PlanDocument,
    oracle: Option<OracleCheck>,
}

fn transport(a: &TransportArgs, out: &mut OutDir) -> Result<Outcome> {
    let (spec, space) = load_space(&a.space)?;
    let m0: MeasureSpec = a.mu0.parse()?;
    let m1: MeasureSpec = a.mu1.parse()?;
    let (mu0, mu1) = (m0.resolve(&space)?, m1.resolve(&space)?);
    let (d, plan) = w2(&space, &mu0, &mu1)?;

    let oracle = match w2_oracle_1d(&space, &mu0, &mu1) {
        Ok(v) => Some(("monotone", v)),
        Err(Error::Unsupported(_)) if space.n() <= BRUTE_FORCE_MAX_N => {
            Some(("enumeration", brute_force_w2(&space, &mu0, &mu1)?))
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    }
    .map(|(kind, v)| OracleCheck {
        kind,
        w2: v,
        difference: (v - d).abs(),
    });

    out.write(
        "marginals.csv",
        csv(
            &["index", "mu0", "mu1"],
            mu0.iter().zip(&mu1).enumerate().map(|(i, (p, q))| vec![i.to_string(), num(*p), num(*q)]),
        )
        .as_bytes(),
    )?;
    let gap = plan.duality_gap;
    let oracle_ok = oracle.as_ref().map_or(true, |o| o.difference <= ORACLE_TOL);
    let pass = gap.abs() <= GAP_TOL && oracle_ok;
    let oracle_note = match &oracle {
        Some(o) => format!("{} oracle differs by {:e}", o.kind, o.difference),
        None => "no oracle for this space".to_string(),
    };
    out.write_json(
        "plan.json",
        &TransportReport {
            space: space_header(&spec, &space),
            mu0: m0.to_string(),
            mu1: m1.to_string(),
            w2: d,
            pivots: plan.pivots,
            plan: plan.to_document(),
            oracle,
        },
    )?;
    Ok(Outcome {
        pass,
        message: format!("W_2 = {d}; duality gap {gap:e}; {oracle_note}"),
        summary: json!({ "w2": d, "duality_gap": gap, "oracle_ok": oracle_ok }),
    })
}

#[derive(Serialize)]
struct DoublingReport {
    space: serde_json::Value,
    metric: MetricReport,
    r_min: f64,
    r_max: f64,
    r_steps: usize,
    doubling_constant: f64,
    local_poincare: Option<serde_json::Value>,
}

fn doubling(a: &DoublingArgs, out: &mut OutDir) -> Result<Outcome> {
    let (spec, space) = load_space(&a.space)?;
    if space.n() < 2 {
        bail!("doubling needs at least two points");
    }
    let metric = space.validate();
    let r_min = a.r_min.unwrap_or_else(|| space.mesh_h());
    let r_max = a.r_max.unwrap_or_else(|| (space.diameter() / 2.0).max(r_min));
    let constant = space.doubling_constant(r_min, r_max, a.r_steps)?;
    let local_poincare = match &a.field {
        Some(text) => {
            let f: FieldSpec = text.parse()?;
            let field = f.resolve(&space)?;
            let radius = a.radius.ok_or_else(|| anyhow!("--field needs --radius"))?;
            let c = space.local_poincare_constant(&field, radius, a.dilation)?;
            Some(json!({ "field": f.to_string(), "radius": radius, "dilation": a.dilation, "constant": c }))
        }
        None => None,
    };
    out.write_json(
        "doubling.json",
        &DoublingReport {
            space: space_header(&spec, &space),
            metric,
            r_min,
            r_max,
            r_steps: a.r_steps,
            doubling_constant: constant,
            local_poincare: local_poincare.clone(),
        },
    )?;
    Ok(Outcome {
        pass: metric.pass,
        message: format!(
            "metric {}; doubling constant {constant} over r in [{r_min}, {r_max}]{}",
            if metric.pass { "valid" } else { "INVALID" },
            local_poincare
                .map(|v| format!("; local Poincaré constant {}", v["constant"]))
                .unwrap_or_default()
        ),
        summary: json!({ "metric_valid": metric.pass, "doubling_constant": constant }),
    })
}
