use std::fs::File;
use std::io::{BufReader, Write};

use serde::Serialize;

use qwiener::acceptance::{self, CriterionOutcome};
use qwiener::capacity::{
    ball_density, profile_ball, profile_power_decay, radial_capacity, radial_capacity_oracle, CapacityProfile,
    Condenser, ProfileGeometry,
};
use qwiener::exponents::{alpha_bar_bounds, duality_record, rel_diff, solve_p1, wiener_exponent};
use qwiener::onedim::{verify_power, write_verify_csv, VerifyRow};
use qwiener::sharpness::{iterated_sharpness_check, run_sharpness, summarize, IteratedCheck, SharpnessConfig};
use qwiener::wiener::{classify_regularity, ClassifierConfig, Verdict};

use crate::args::{
    CapacityArgs, Cli, Command, ExponentsArgs, ProfileArgs, ProfileKind, SharpnessArgs, VerifyPowerArgs, WienerArgs,
};
use crate::output::{opt, simple_csv, CliError, CliResult, Emission};

const EXPONENTS_SCHEMA: &str = "qwiener/exponents/v1";
const WIENER_SCHEMA: &str = "qwiener/wiener/v1";
const CONDENSER_SCHEMA: &str = "qwiener/capacity/v1";
const PROFILE_SCHEMA: &str = "qwiener/capacity-profile/v1";
const VERIFY_SCHEMA: &str = "qwiener/verify-power/v1";
const SHARPNESS_SCHEMA: &str = "qwiener/sharpness/v1";
const SELFTEST_SCHEMA: &str = "qwiener/selftest/v1";

const DEFAULT_ORACLE_TOL: f64 = 5e-3;
const DEFAULT_VERIFY_TOL: f64 = 1e-3;
const DEFAULT_SLOPE_TOL: f64 = 0.02;

fn warn_if_exceeds(value: f64, tol: f64, what: &str) {
    if value.is_nan() || value > tol {
        eprintln!("warning: {what} = {value:e} exceeds the tolerance {tol:e}");
    }
}

/// Runs the command and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    let out = cli.output.as_deref();
    let format = cli.format;
    match &cli.command {
        Command::Exponents(a) => {
            let json = exponents(a)?;
            let row = exponents_row(&json);
            Emission {
                json: &json,
                csv: Box::new(move |w| simple_csv(w, &EXPONENTS_HEADER, std::slice::from_ref(&row))),
                paired: false,
            }
            .write(out, format)?
        }
        Command::Wiener(a) => {
            let (json, report) = wiener(a)?;
            Emission {
                json: &json,
                csv: Box::new(move |w| Ok(report.write_partial_sums_csv(w)?)),
                paired: true,
            }
            .write(out, format)?
        }
        Command::Capacity(a) => capacity(a, cli.tolerance, out, format)?,
        Command::VerifyPower(a) => {
            let json = verify(a)?;
            for r in &json.rows {
                warn_if_exceeds(r.abs_err, cli.tolerance.unwrap_or(DEFAULT_VERIFY_TOL), "abs_err");
            }
            let rows = json.rows.clone();
            Emission {
                json: &json,
                csv: Box::new(move |w| Ok(write_verify_csv(&rows, w)?)),
                paired: false,
            }
            .write(out, format)?
        }
        Command::Sharpness(a) => {
            let (json, run) = sharpness(a)?;
            warn_if_exceeds(json.rel_err, cli.tolerance.unwrap_or(DEFAULT_SLOPE_TOL), "rel_err");
            Emission {
                json: &json,
                csv: Box::new(move |w| Ok(run.write_csv(w)?)),
                paired: true,
            }
            .write(out, format)?
        }
        Command::Selftest => return selftest(out, format),
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
}

#[derive(Debug, Serialize)]
struct ExponentsOut {
    schema: &'static str,
    p: f64,
    #[serde(rename = "Q")]
    q: f64,
    p_dual: f64,
    alpha_lower: f64,
    alpha_bar: f64,
    beta_lower: f64,
    beta_bar: f64,
    /// `p_1(p/(p-1), Q^{1/p})`; absent at `Q = 1`.
    p1: Option<f64>,
    eps: f64,
    wiener_exponent: f64,
    bounds: Bounds,
}

fn exponents(a: &ExponentsArgs) -> CliResult<ExponentsOut> {
    let rec = duality_record(a.q, a.p)?;
    let p1 = if a.q > 1.0 {
        Some(solve_p1(rec.p_dual, a.q.powf(1.0 / a.p))?)
    } else {
        None
    };
    let (lower, upper) = alpha_bar_bounds(a.q, a.p)?;
    Ok(ExponentsOut {
        schema: EXPONENTS_SCHEMA,
        p: a.p,
        q: a.q,
        p_dual: rec.p_dual,
        alpha_lower: rec.alpha_lower,
        alpha_bar: rec.alpha_bar,
        beta_lower: rec.beta_lower,
        beta_bar: rec.beta_bar,
        p1,
        eps: a.eps,
        wiener_exponent: wiener_exponent(a.q, a.p, a.eps)?,
        bounds: Bounds { lower, upper },
    })
}

const EXPONENTS_HEADER: [&str; 12] = [
    "p",
    "Q",
    "p_dual",
    "alpha_lower",
    "alpha_bar",
    "beta_lower",
    "beta_bar",
    "p1",
    "eps",
    "wiener_exponent",
    "bounds_lower",
    "bounds_upper",
];

fn exponents_row(o: &ExponentsOut) -> Vec<String> {
    let mut row: Vec<String> = [o.p, o.q, o.p_dual, o.alpha_lower, o.alpha_bar, o.beta_lower, o.beta_bar]
        .iter()
        .map(f64::to_string)
        .collect();
    row.push(opt(o.p1));
    row.extend(
        [o.eps, o.wiener_exponent, o.bounds.lower, o.bounds.upper]
            .iter()
            .map(f64::to_string),
    );
    row
}

#[derive(Debug, Serialize)]
struct ProfileInfo {
    kind: &'static str,
    ratio: f64,
    r0: f64,
    terms: usize,
}

fn build_profile(args: &ProfileArgs, p: f64, count: Option<usize>) -> CliResult<(CapacityProfile, &'static str)> {
    let kind = args
        .profile
        .ok_or_else(|| CliError::Validation("--profile is required (ball, power-decay or csv)".into()))?;
    let need_count = || count.ok_or_else(|| CliError::Validation("--K is required for generated profiles".into()));
    match kind {
        ProfileKind::Ball => {
            let g = ProfileGeometry::new(args.n, p, args.lambda, args.r0)?;
            Ok((profile_ball(&g, need_count()?), "ball"))
        }
        ProfileKind::PowerDecay => {
            let g = ProfileGeometry::new(args.n, p, args.lambda, args.r0)?;
            let scale = args.scale.unwrap_or_else(|| ball_density(&g).min(1.0));
            Ok((profile_power_decay(&g, args.a, scale, need_count()?)?, "power-decay"))
        }
        ProfileKind::Csv => {
            let path = args
                .profile_file
                .as_ref()
                .ok_or_else(|| CliError::Validation("--profile csv needs --profile-file".into()))?;
            let file = File::open(path)
                .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            let full = CapacityProfile::read_csv(BufReader::new(file))?;
            let profile = match count {
                Some(k) if k > full.len() => {
                    return Err(CliError::Validation(format!(
                        "K = {k} exceeds the {} terms in {}",
                        full.len(),
                        path.display()
                    )))
                }
                Some(k) => CapacityProfile::new(full.r0, full.ratio, full.kappa[..k].to_vec())?,
                None => full,
            };
            Ok((profile, "csv"))
        }
    }
}

#[derive(Debug, Serialize)]
struct WienerOut {
    schema: &'static str,
    #[serde(rename = "Q")]
    q: f64,
    p: f64,
    eps: f64,
    profile: ProfileInfo,
    exponent: f64,
    total: f64,
    tail_slope: Option<f64>,
    verdict: Verdict,
    notes: Vec<String>,
}

fn wiener(a: &WienerArgs) -> CliResult<(WienerOut, qwiener::wiener::WienerReport)> {
    let (profile, kind) = build_profile(&a.profile, a.p, a.k)?;
    let report = classify_regularity(&profile, a.q, a.p, a.eps, &ClassifierConfig::default())?;
    let out = WienerOut {
        schema: WIENER_SCHEMA,
        q: a.q,
        p: a.p,
        eps: a.eps,
        profile: ProfileInfo {
            kind,
            ratio: profile.ratio,
            r0: profile.r0,
            terms: profile.len(),
        },
        exponent: report.exponent,
        total: report.total(),
        tail_slope: report.tail_slope,
        verdict: report.verdict,
        notes: report.notes.clone(),
    };
    Ok((out, report))
}

#[derive(Debug, Serialize)]
struct CondenserOut {
    schema: &'static str,
    n: u32,
    p: f64,
    rho: f64,
    r: f64,
    capacity: f64,
    oracle: Option<f64>,
    grid: Option<usize>,
    rel_err: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ProfileRow {
    j: usize,
    r_j: f64,
    kappa_j: f64,
}

#[derive(Debug, Serialize)]
struct ProfileOut {
    schema: &'static str,
    kind: &'static str,
    p: f64,
    ratio: f64,
    r0: f64,
    rows: Vec<ProfileRow>,
}

fn capacity(
    a: &CapacityArgs,
    tolerance: Option<f64>,
    out: Option<&std::path::Path>,
    format: crate::args::Format,
) -> CliResult<()> {
    if a.profile.profile.is_some() {
        let (profile, kind) = build_profile(&a.profile, a.p, Some(a.count))?;
        let json = ProfileOut {
            schema: PROFILE_SCHEMA,
            kind,
            p: a.p,
            ratio: profile.ratio,
            r0: profile.r0,
            rows: (0..profile.len())
                .map(|j| ProfileRow {
                    j,
                    r_j: profile.radius(j),
                    kappa_j: profile.kappa[j],
                })
                .collect(),
        };
        return Emission {
            json: &json,
            csv: Box::new(move |w: &mut dyn Write| Ok(profile.write_csv(w)?)),
            paired: false,
        }
        .write(out, format);
    }
    let (rho, r) = match (a.rho, a.r) {
        (Some(rho), Some(r)) => (rho, r),
        _ => {
            return Err(CliError::Validation(
                "--rho and --r are required without --profile".into(),
            ))
        }
    };
    let c = Condenser::new(a.profile.n, a.p, rho, r)?;
    let cap = radial_capacity(&c);
    let oracle = a.grid.map(|g| radial_capacity_oracle(&c, g)).transpose()?;
    let rel_err = oracle.map(|o| rel_diff(o, cap));
    if let Some(e) = rel_err {
        warn_if_exceeds(e, tolerance.unwrap_or(DEFAULT_ORACLE_TOL), "rel_err");
    }
    let json = CondenserOut {
        schema: CONDENSER_SCHEMA,
        n: c.n,
        p: c.p,
        rho,
        r,
        capacity: cap,
        oracle,
        grid: a.grid,
        rel_err,
    };
    let row = vec![
        c.n.to_string(),
        c.p.to_string(),
        rho.to_string(),
        r.to_string(),
        cap.to_string(),
        opt(oracle),
        a.grid.map(|g| g.to_string()).unwrap_or_default(),
        opt(rel_err),
    ];
    Emission {
        json: &json,
        csv: Box::new(move |w| {
            simple_csv(
                w,
                &["n", "p", "rho", "r", "capacity", "oracle", "grid", "rel_err"],
                std::slice::from_ref(&row),
            )
        }),
        paired: false,
    }
    .write(out, format)
}

#[derive(Debug, Serialize)]
struct VerifyOut {
    schema: &'static str,
    grid: usize,
    rows: Vec<VerifyRow>,
}

fn verify(a: &VerifyPowerArgs) -> CliResult<VerifyOut> {
    let rows = a
        .alpha
        .iter()
        .map(|&alpha| verify_power(alpha, a.p, a.grid))
        .collect::<qwiener::Result<Vec<_>>>()?;
    Ok(VerifyOut {
        schema: VERIFY_SCHEMA,
        grid: a.grid,
        rows,
    })
}

#[derive(Debug, Serialize)]
struct SharpnessOut {
    schema: &'static str,
    #[serde(rename = "Q")]
    q: f64,
    p: f64,
    n: u32,
    gamma: f64,
    alpha_bar: f64,
    fitted_slope: f64,
    target_slope: f64,
    rel_err: f64,
    points: usize,
    eps_min: f64,
    eps_max: f64,
    outer_radius: f64,
    iterated: Option<IteratedCheck>,
}

fn sharpness(a: &SharpnessArgs) -> CliResult<(SharpnessOut, qwiener::sharpness::SharpnessRun)> {
    let mut cfg = SharpnessConfig::new(a.q, a.p, a.n);
    cfg.points = a.points;
    cfg.outer_radius = a.outer_radius;
    cfg.eps_range = match (a.eps_min, a.eps_max) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => return Err(CliError::Validation("--eps-min and --eps-max go together".into())),
    };
    let run = run_sharpness(&cfg)?;
    let summary = summarize(&run)?;
    let iterated = a
        .delta
        .map(|d| iterated_sharpness_check(&run, d, a.c, a.k))
        .transpose()?;
    let out = SharpnessOut {
        schema: SHARPNESS_SCHEMA,
        q: summary.q,
        p: summary.p,
        n: summary.n,
        gamma: summary.gamma,
        alpha_bar: summary.alpha_bar,
        fitted_slope: summary.fitted_slope,
        target_slope: summary.target_slope,
        rel_err: summary.rel_err,
        points: run.records.len(),
        eps_min: run.records.last().map_or(f64::NAN, |r| r.eps),
        eps_max: run.records.first().map_or(f64::NAN, |r| r.eps),
        outer_radius: cfg.outer_radius,
        iterated,
    };
    Ok((out, run))
}

#[derive(Debug, Serialize)]
struct SelftestOut {
    schema: &'static str,
    passed: bool,
    criteria: Vec<CriterionOutcome>,
}

fn selftest(out: Option<&std::path::Path>, format: crate::args::Format) -> CliResult<i32> {
    let criteria = acceptance::run_all();
    let passed = criteria.iter().all(|c| c.passed);
    if out.is_some() {
        for c in &criteria {
            println!("{}", c.line());
        }
    }
    let failed = criteria.iter().filter(|c| !c.passed).count();
    let rows: Vec<Vec<String>> = criteria
        .iter()
        .map(|c| {
            vec![
                c.id.to_string(),
                if c.passed { "PASS" } else { "FAIL" }.to_string(),
                c.seconds.to_string(),
                format!("\"{}\"", c.detail.replace('"', "\"\"")),
            ]
        })
        .collect();
    let lines: Vec<String> = criteria.iter().map(CriterionOutcome::line).collect();
    let json = SelftestOut {
        schema: SELFTEST_SCHEMA,
        passed,
        criteria,
    };
    match out {
        Some(_) => Emission {
            json: &json,
            csv: Box::new(move |w| simple_csv(w, &["id", "status", "seconds", "detail"], &rows)),
            paired: false,
        }
        .write(out, format)?,
        None => {
            for l in lines {
                println!("{l}");
            }
        }
    }
    eprintln!(
        "{} of {} criteria passed",
        json.criteria.len() - failed,
        json.criteria.len()
    );
    Ok(if passed { 0 } else { 1 })
}
