//! Subcommand implementations. Every output is a deterministic function of
//! the resolved configuration: timings go to stderr, never into files.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use horolab::expansiveness::{build_counterexample, divergence_scan, verify_counterexample};
use horolab::flows::{horocycle_flow, SpeedField, TimeChange};
use horolab::fuchsian::{
    enumerate_ball, estimate_eps_star, BallParams, FuchsianBall, FuchsianGroup, QuotientPoint,
};
use horolab::psl2::GroupElement;
use horolab::separation_estimate;
use horolab::Verdict;

use crate::config::{parse_float_list, pick, pick_opt, FileConfig};
use crate::{
    svg, BallArgs, CacheBallArgs, ConstantsArgs, CounterexampleArgs, Failure, PlotArgs, ScanArgs,
    SweepArgs,
};

fn write_output(path: Option<&Path>, bytes: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{bytes}");
            Ok(())
        }
    }
}

fn bolza() -> Result<Arc<FuchsianGroup>, Failure> {
    Ok(Arc::new(FuchsianGroup::bolza()?))
}

struct ResolvedBall {
    ball: FuchsianBall,
    word_length: usize,
    displacement: Option<f64>,
}

fn resolve_ball(
    args: &BallArgs,
    file: &FileConfig,
    group: &Arc<FuchsianGroup>,
    default_word_length: usize,
    default_displacement: Option<f64>,
) -> Result<ResolvedBall, Failure> {
    if let Some(path) = pick_opt(&args.ball, &file.ball) {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::usage(format!("cannot read ball {}: {e}", path.display())))?;
        let ball = FuchsianBall::from_cache_str(&text)?;
        let word_length = ball.word_length_limit();
        let displacement = Some(ball.displacement_limit()).filter(|d| d.is_finite());
        return Ok(ResolvedBall {
            ball,
            word_length,
            displacement,
        });
    }
    let word_length = pick(&args.word_length, &file.word_length, default_word_length);
    let displacement = pick_opt(&args.displacement, &file.displacement).or(default_displacement);
    let max_elements = pick(&args.max_elements, &file.max_elements, 1_000_000);
    let started = Instant::now();
    let ball = enumerate_ball(
        group,
        &BallParams {
            max_word_len: word_length,
            max_displacement: displacement,
            max_elements,
        },
    )?;
    eprintln!(
        "horolab: enumerated {} elements (word length {word_length}, complete to {}) in {:.1?}",
        ball.len(),
        ball.complete_to(),
        started.elapsed()
    );
    Ok(ResolvedBall {
        ball,
        word_length,
        displacement,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::usage(format!("serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct BallSummary {
    word_length: usize,
    displacement_limit: Option<f64>,
    element_count: usize,
    complete_to: f64,
}

impl BallSummary {
    fn new(resolved: &ResolvedBall) -> BallSummary {
        BallSummary {
            word_length: resolved.word_length,
            displacement_limit: resolved.displacement,
            element_count: resolved.ball.len(),
            complete_to: resolved.ball.complete_to(),
        }
    }
}

#[derive(Serialize)]
struct ConstantsOutput {
    schema_version: u32,
    seed: u64,
    ball: BallSummary,
    eps_star_lb: f64,
    sigma0_lb: f64,
    caveat: String,
}

pub fn constants(args: &ConstantsArgs, file: &FileConfig, seed: u64) -> Result<(), Failure> {
    let group = bolza()?;
    let started = Instant::now();
    let resolved = resolve_ball(&args.ball, file, &group, 4, None)?;
    let estimates = estimate_eps_star(&resolved.ball)?;
    let output = ConstantsOutput {
        schema_version: 1,
        seed,
        ball: BallSummary::new(&resolved),
        eps_star_lb: estimates.eps_star_lb,
        sigma0_lb: estimates.sigma0_lb,
        caveat: format!(
            "bounds are exact minima over the enumerated ball (word length {}); \
             group elements beyond it are not inspected",
            estimates.word_length_used
        ),
    };
    eprintln!("horolab: constants done in {:.1?}", started.elapsed());
    write_output(
        pick_opt(&args.out, &file.out).as_deref(),
        &to_json(&output)?,
    )
}

#[derive(Serialize)]
struct CounterexampleOutput {
    schema_version: u32,
    seed: u64,
    t_max: f64,
    samples: usize,
    ball: BallSummary,
    estimates: horolab::ConstantEstimates,
    report: horolab::CounterexampleReport,
    verification: Option<horolab::VerificationRecord>,
}

pub fn counterexample(
    args: &CounterexampleArgs,
    file: &FileConfig,
    seed: u64,
) -> Result<(), Failure> {
    let a = pick(&args.a, &file.a, 1.05);
    let t_max = pick(&args.t_max, &file.t_max, 1e6);
    let samples = pick(&args.samples, &file.samples, 10_000);
    let group = bolza()?;
    let started = Instant::now();
    let resolved = resolve_ball(&args.ball, file, &group, 3, None)?;
    let estimates = estimate_eps_star(&resolved.ball)?;
    let report = build_counterexample(a, &estimates)?;

    let verification = if report.verdict == Verdict::ObstructionProved {
        Some(verify_counterexample(
            &report,
            t_max,
            samples,
            &resolved.ball,
            &group,
        )?)
    } else {
        None
    };
    let output = CounterexampleOutput {
        schema_version: 1,
        seed,
        t_max,
        samples,
        ball: BallSummary::new(&resolved),
        estimates,
        report,
        verification,
    };
    eprintln!("horolab: counterexample done in {:.1?}", started.elapsed());
    write_output(
        pick_opt(&args.out, &file.out).as_deref(),
        &to_json(&output)?,
    )?;

    match &output.verification {
        None => Err(Failure::inconclusive(format!(
            "trace obstruction inconclusive: a + 1/a = {:.6} >= 2 + eps_star_lb = {:.6}",
            output.report.trace_value,
            2.0 + output.report.eps_star_lb
        ))),
        Some(v) if !v.passed => Err(Failure::usage(format!(
            "verification failed (worst residual {:.3e} at t = {:.6e})",
            v.max_conjugation_residual, v.worst_residual_t
        ))),
        Some(_) => Ok(()),
    }
}

/// Resolve a pair spec into quotient points: `diag:<a>` pits `Gamma e`
/// against `Gamma diag(a)`; `cohorbital:<tau>` against `Gamma b_tau`.
fn resolve_pair(
    spec: &str,
    group: &Arc<FuchsianGroup>,
) -> Result<(QuotientPoint, QuotientPoint), Failure> {
    let x = QuotientPoint::new(GroupElement::IDENTITY, group.clone());
    let (kind, value) = spec
        .split_once(':')
        .ok_or_else(|| Failure::usage(format!("pair spec {spec:?} needs '<kind>:<value>'")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("bad number in pair spec {spec:?}")))?;
    let y = match kind.trim() {
        "diag" => QuotientPoint::new(GroupElement::diagonal(value)?, group.clone()),
        "cohorbital" => horocycle_flow(&x, value),
        other => {
            return Err(Failure::usage(format!(
                "unknown pair kind {other:?} (expected 'diag' or 'cohorbital')"
            )))
        }
    };
    Ok((x, y))
}

fn fmt17(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn scan(args: &ScanArgs, file: &FileConfig, seed: u64) -> Result<(), Failure> {
    let pair_spec = pick(&args.pair, &file.pair, "diag:1.05".to_string());
    let delta = pick(&args.delta, &file.delta, 0.1);
    let t_max = pick(&args.t_max, &file.t_max, 10.0);
    let samples = pick(&args.samples, &file.samples, 1000);
    let group = bolza()?;
    let resolved = resolve_ball(&args.ball, file, &group, 16, Some(4.0))?;
    let (x, y) = resolve_pair(&pair_spec, &group)?;
    let started = Instant::now();
    let scan = divergence_scan(&x, &y, delta, t_max, samples, &resolved.ball, &pair_spec)?;

    let mut out = String::new();
    out.push_str("# horolab scan\n# schema_version: 1\n");
    let _ = writeln!(out, "# seed: {seed}");
    let _ = writeln!(out, "# pair: {pair_spec}");
    let _ = writeln!(out, "# delta: {}", fmt17(delta));
    let _ = writeln!(out, "# t_max: {}", fmt17(t_max));
    let _ = writeln!(out, "# samples: {samples}");
    let _ = writeln!(
        out,
        "# ball: word_length={} complete_to={}",
        resolved.word_length,
        fmt17(resolved.ball.complete_to())
    );
    let _ = writeln!(out, "# sup_lo: {}", fmt17(scan.sup_lo));
    match scan.first_exceed {
        Some(t) => {
            let _ = writeln!(out, "# first_exceed: {}", fmt17(t));
        }
        None => {
            let _ = writeln!(out, "# first_exceed: none");
        }
    }
    out.push_str("t,lo,hi,lo_certified\n");
    for row in &scan.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt17(row.t),
            fmt17(row.lo),
            fmt17(row.hi),
            u8::from(row.lo_certified)
        );
    }
    eprintln!("horolab: scan done in {:.1?}", started.elapsed());
    write_output(pick_opt(&args.out, &file.out).as_deref(), &out)
}

pub fn sweep(args: &SweepArgs, file: &FileConfig, seed: u64) -> Result<(), Failure> {
    let trials = pick(&args.trials, &file.trials, 10);
    let deltas_spec = pick(&args.deltas, &file.deltas, "0.05,0.1,0.2".to_string());
    let deltas = parse_float_list(&deltas_spec)?;
    let t_max = pick(&args.t_max, &file.t_max, 100.0);
    let scan_samples = pick(&args.scan_samples, &file.scan_samples, 96);
    let speed_spec = pick(&args.speed, &file.speed, "constant:1".to_string());
    let step = pick(&args.integrator_step, &file.integrator_step, 1e-2);
    let speed = SpeedField::parse(&speed_spec)?;
    let tc = TimeChange::new(speed, step)?;
    let group = bolza()?;
    let resolved = resolve_ball(&args.ball, file, &group, 16, Some(4.0))?;
    let started = Instant::now();
    let report = separation_estimate(
        &tc,
        trials,
        &deltas,
        t_max,
        scan_samples,
        &resolved.ball,
        &group,
        seed,
    )?;

    let mut out = String::new();
    out.push_str("# horolab sweep\n# schema_version: 1\n");
    let _ = writeln!(out, "# seed: {seed}");
    let _ = writeln!(out, "# speed: {}", report.speed);
    let _ = writeln!(out, "# integrator_step: {}", fmt17(step));
    let _ = writeln!(out, "# trials: {trials}");
    let _ = writeln!(out, "# t_max: {}", fmt17(t_max));
    let _ = writeln!(out, "# scan_samples: {scan_samples}");
    let _ = writeln!(out, "# evidence_grade: {}", report.evidence_grade);
    let _ = writeln!(out, "# note: {}", report.note);
    out.push_str("delta,separated,fraction_separated\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt17(row.delta),
            row.separated,
            fmt17(row.fraction_separated)
        );
    }
    eprintln!("horolab: sweep done in {:.1?}", started.elapsed());
    write_output(pick_opt(&args.out, &file.out).as_deref(), &out)
}

pub fn plot(args: &PlotArgs, file: &FileConfig) -> Result<(), Failure> {
    let t_max = pick(&args.t_max, &file.t_max, 6.0);
    let samples = pick(&args.samples, &file.samples, 600);
    let orbits = pick(&args.orbits, &file.orbits, 9);
    let group = bolza()?;
    let resolved = resolve_ball(&args.ball, file, &group, 1, None)?;

    let orbit_reps: Vec<GroupElement> = resolved
        .ball
        .elements()
        .iter()
        .take(orbits)
        .map(|el| el.element)
        .collect();

    // Regular octagon of the Bolza surface: vertices at Euclidean radius
    // 2^(-1/4), rotated pi/8 off the side-pairing axes.
    let radius = 2f64.powf(-0.25);
    let vertices: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let ang = (2 * k + 1) as f64 * std::f64::consts::FRAC_PI_8;
            (radius * ang.cos(), radius * ang.sin())
        })
        .collect();

    let rendered = svg::render(&svg::PlotSpec {
        orbit_reps: &orbit_reps,
        t_max,
        samples_per_orbit: samples,
        octagon_vertices: &vertices,
    });
    write_output(pick_opt(&args.out, &file.out).as_deref(), &rendered)
}

pub fn cache_ball(args: &CacheBallArgs, file: &FileConfig) -> Result<(), Failure> {
    let group = bolza()?;
    let resolved = resolve_ball(&args.ball, file, &group, 3, None)?;
    write_output(
        pick_opt(&args.out, &file.out).as_deref(),
        &resolved.ball.to_cache_string(),
    )
}
