use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use clap::Args;
use ideal_clock::chronometry::{frenet_exact, frenet_sampled, linear_fit, omega, phase_series, spin_alignment};
use ideal_clock::dynamics::{cm_gauge_multipliers, eom, exact_trajectory, integrate, poisson, Constraint, FreeClock};
use ideal_clock::export::{self, Format, Metadata, RankRow};
use ideal_clock::legendre::{classify, MomentumScalars, Regime, RANK_EPSILON};
use ideal_clock::minkowski::dot;
use ideal_clock::state::{constraints, sample_on_shell};
use ideal_clock::{MultiplierPolicy, PhaseSample, PhaseSpacePoint, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{render_metadata, IntegratorChoice, RunConfig};

type CmdResult = Result<i32, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run_trajectory(cfg: &RunConfig, seed: &PhaseSpacePoint) -> Result<Trajectory, String> {
    match cfg.integrator {
        IntegratorChoice::Exact => exact_trajectory(seed, &cfg.params, cfg.dt, cfg.steps).map_err(err),
        IntegratorChoice::Rk4 => {
            integrate(seed, &cfg.params, MultiplierPolicy::CmGauge, cfg.dt, cfg.steps, cfg.projection).map_err(err)
        }
    }
}

/// Writes rows to `path`. JSON embeds the metadata; CSV keeps the header
/// row clean and puts the metadata in `<path>.meta.txt`.
fn write_output<T: Serialize>(path: &Path, rows: &[T], format: Format, meta: &Metadata) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    export::write_rows(BufWriter::new(file), rows, format, meta).map_err(err)?;
    if format == Format::Csv {
        let side = sidecar_path(path);
        std::fs::write(&side, render_metadata(meta)).map_err(|e| format!("cannot write {}: {e}", side.display()))?;
    }
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.txt");
    s.into()
}

/// Omega averaged over every sample, with the worst deviation from 2/ell.
fn omega_summary(traj: &Trajectory) -> Result<(f64, f64), String> {
    let u = cm_gauge_multipliers(&traj.params);
    let target = traj.params.frequency();
    let mut sum = 0.0;
    let mut worst = 0.0f64;
    for s in &traj.samples {
        let o = omega(&s.point, &eom(&s.point, &u, &traj.params)).map_err(err)?;
        sum += o;
        worst = worst.max((o - target).abs());
    }
    Ok((sum / traj.len() as f64, worst))
}

pub fn cmd_simulate(cfg: &RunConfig) -> CmdResult {
    let seed = cfg.seed_state()?;
    let traj = run_trajectory(cfg, &seed)?;
    let out = cfg.out_path("trajectory");
    let mut meta = cfg.metadata("simulate");
    meta.extend(export::trajectory_metadata(&traj).into_iter().map(|(k, v)| (format!("meta.{k}"), v)));
    write_output(&out, &export::trajectory_rows(&traj), cfg.format, &meta)?;

    let p = &cfg.params;
    let (omega_mean, omega_dev) = omega_summary(&traj)?;
    let u = cm_gauge_multipliers(p);
    // radius vector off the CM axis at the seed is pi/m
    let align = spin_alignment(&seed, seed.pi / p.mass, eom(&seed, &u, p).xdot).map_err(err)?;
    println!("wrote {} samples to {}", traj.len(), out.display());
    println!("cycles            {:.4}", cfg.cycles());
    println!("Omega             {omega_mean:.12} (2/ell = {}, max deviation {omega_dev:.2e})", p.frequency());
    println!("max constraint    {:.3e}", traj.max_violation());
    println!(
        "spin alignment    {:+} (coefficient {:.6}, defect {:.1e})",
        align.sign.value(),
        align.coefficient,
        align.defect
    );
    Ok(0)
}

/// phi at `tau` by linear interpolation between the bracketing samples.
fn phi_at(series: &[PhaseSample], tau: f64) -> Option<f64> {
    let i = series.partition_point(|s| s.tau < tau);
    if i == 0 {
        return (series.first()?.tau == tau).then(|| series[0].phi);
    }
    if i >= series.len() {
        let last = series.last()?;
        return ((last.tau - tau).abs() <= 1e-9 * tau.abs().max(1.0)).then_some(last.phi);
    }
    let (a, b) = (&series[i - 1], &series[i]);
    Some(a.phi + (b.phi - a.phi) * (tau - a.tau) / (b.tau - a.tau))
}

pub fn cmd_phase(cfg: &RunConfig) -> CmdResult {
    let seed = cfg.seed_state()?;
    let traj = run_trajectory(cfg, &seed)?;
    let series = phase_series(&traj).map_err(err)?;
    let out = cfg.out_path("phase");
    write_output(&out, &export::phase_rows(&series), cfg.format, &cfg.metadata("phase"))?;

    let period = cfg.params.cycle_period();
    let t_end = series.last().map_or(0.0, |s| s.tau);
    let full = (t_end / period + 1e-9).floor() as usize;
    println!("wrote {} phase samples to {}", series.len(), out.display());
    println!("cycle  phi(cycle)");
    for c in 0..full {
        let a = phi_at(&series, c as f64 * period).unwrap_or(f64::NAN);
        let b = phi_at(&series, (c + 1) as f64 * period).unwrap_or(f64::NAN);
        println!("{:>5}  {:+.12}", c + 1, b - a);
    }
    let phi_end = series.last().map_or(0.0, |s| s.phi);
    println!("phi(end)          {phi_end:+.12} over {:.4} cycles", t_end / period);
    if series.len() >= 3 {
        let taus: Vec<f64> = series.iter().map(|s| s.tau).collect();
        let phis: Vec<f64> = series.iter().map(|s| s.phi).collect();
        let fit = linear_fit(&taus, &phis).map_err(err)?;
        println!("slope             {:+.12} (per cycle {:+.12})", fit.slope, fit.slope * period);
        println!("fit residual      {:.3e}", fit.max_residual);
    }
    Ok(0)
}

#[derive(Serialize)]
struct DriftRow {
    #[serde(rename = "τ")]
    tau: f64,
    drift: f64,
    envelope: f64,
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    note: String,
}

impl Check {
    fn new(name: &'static str, value: f64, threshold: f64) -> Self {
        Check { name, value, threshold, note: String::new() }
    }

    fn failed(name: &'static str, why: String) -> Self {
        Check { name, value: f64::NAN, threshold: 0.0, note: why }
    }

    fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

fn relative_drift(traj: &Trajectory) -> (f64, f64) {
    let p0 = &traj.samples[0].point;
    let pp0 = dot(p0.p, p0.p);
    let w0 = p0.spin();
    let ww0 = dot(w0, w0);
    traj.samples.iter().fold((0.0f64, 0.0f64), |(a, b), s| {
        let w = s.point.spin();
        (a.max(((dot(s.point.p, s.point.p) - pp0) / pp0).abs()), b.max(((dot(w, w) - ww0) / ww0).abs()))
    })
}

fn rank_spot_checks(cfg: &RunConfig) -> f64 {
    let cases = [
        ((2.0, 1.0), Some(Regime::I)),
        ((1.0, 1.0), Some(Regime::II)),
        ((1.0, -1.0), Some(Regime::III)),
        ((1.0, 0.0), Some(Regime::IIPrime)),
        ((0.0, 0.0), None),
    ];
    let mismatches = cases
        .iter()
        .filter(|((u1, u2), want)| {
            let ms = MomentumScalars { u1: *u1, u2: *u2, u3: 0.3, kp: cfg.params.mass, p_pi: 0.0 };
            let got = classify(&ms, &cfg.params, RANK_EPSILON).ok();
            got.as_ref().map(|c| c.regime) != *want || got.is_some_and(|c| c.rank != c.regime.rank())
        })
        .count();
    mismatches as f64
}

fn phase_failed(checks: &mut Vec<Check>, why: String) {
    checks.push(Check::failed("phase per cycle", why.clone()));
    checks.push(Check::failed("phase linearity", why));
}

fn verify_checks(cfg: &RunConfig, seed: &PhaseSpacePoint, traj: &Trajectory) -> Vec<Check> {
    let p = &cfg.params;
    let mut checks = Vec::new();

    checks.push(Check::new("seed on shell", constraints(seed, p).max_relative_violation, 1e-9));

    let cs = Constraint::all(*p);
    let mut rng = cfg.rng();
    let mut states = vec![*seed];
    states.extend((0..20).map(|_| sample_on_shell(&mut rng, p)));
    let mut closure = 0.0f64;
    for s in &states {
        for a in &cs {
            for b in &cs {
                closure = closure.max(poisson(a, b, s).abs());
            }
        }
    }
    checks.push(Check::new("first-class closure", closure, 1e-8));

    checks.push(Check::new("constraint drift", traj.max_violation(), 1e-9));
    let (dpp, dww) = relative_drift(traj);
    checks.push(Check::new("Casimir <p,p> drift", dpp, 1e-9));
    checks.push(Check::new("Casimir <w,w> drift", dww, 1e-9));

    let u = cm_gauge_multipliers(p);
    let null = traj
        .samples
        .iter()
        .map(|s| {
            let xd = eom(&s.point, &u, p).xdot;
            dot(xd, xd).abs() / xd.max_abs().powi(2)
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("null worldline", null, 1e-11));

    match omega_summary(traj) {
        Ok((_, dev)) => checks.push(Check::new("Omega = 2/ell", dev, 1e-9)),
        Err(e) => checks.push(Check::failed("Omega = 2/ell", e)),
    }

    let target = 4.0 / (p.length * p.length);
    match FreeClock::new(seed, p) {
        Ok(clock) => {
            let (mut dk, mut tor) = (0.0f64, 0.0f64);
            for i in 0..=64 {
                match frenet_exact(&clock, i as f64 * p.cycle_period() / 16.0) {
                    Ok(f) => {
                        dk = dk.max((f.curvature / target - 1.0).abs());
                        tor = tor.max(f.torsion_proxy);
                    }
                    Err(_) => dk = f64::INFINITY,
                }
            }
            checks.push(Check::new("curvature (exact)", dk, 1e-6));
            checks.push(Check::new("torsion (exact)", tor, 1e-8));
        }
        Err(e) => {
            checks.push(Check::failed("curvature (exact)", e.to_string()));
            checks.push(Check::failed("torsion (exact)", e.to_string()));
        }
    }
    if traj.len() >= 5 {
        let centers = (2..traj.len() - 2).step_by((traj.len() / 16).max(1));
        let dk = centers
            .map(|c| frenet_sampled(traj, c).map_or(f64::INFINITY, |f| (f.curvature / target - 1.0).abs()))
            .fold(0.0, f64::max);
        checks.push(Check::new("curvature (sampled)", dk, 1e-6));
    }

    match phase_series(traj) {
        Ok(series) if series.len() >= 3 => {
            let taus: Vec<f64> = series.iter().map(|s| s.tau).collect();
            let phis: Vec<f64> = series.iter().map(|s| s.phi).collect();
            match linear_fit(&taus, &phis) {
                Ok(fit) => {
                    let per_cycle = fit.slope * p.cycle_period();
                    let expected = -p.sigma.value() * 2.0 * PI;
                    checks.push(Check::new("phase per cycle", (per_cycle - expected).abs(), 1e-6));
                    checks.push(Check::new("phase linearity", fit.max_residual, 1e-7));
                }
                Err(e) => phase_failed(&mut checks, e.to_string()),
            }
        }
        Ok(_) => phase_failed(&mut checks, "fewer than 3 samples".into()),
        Err(e) => phase_failed(&mut checks, e.to_string()),
    }

    let align = spin_alignment(seed, seed.pi / p.mass, eom(seed, &u, p).xdot);
    match align {
        Ok(a) => {
            let mut c =
                Check::new("spin alignment = sigma", if a.sign == p.sigma { a.defect } else { f64::INFINITY }, 1e-9);
            c.note = format!("sign {:+}", a.sign.value());
            checks.push(c);
        }
        Err(e) => checks.push(Check::failed("spin alignment = sigma", e.to_string())),
    }

    checks.push(Check::new("rank table spot checks", rank_spot_checks(cfg), 0.0));
    checks
}

pub fn cmd_verify(cfg: &RunConfig) -> CmdResult {
    let seed = cfg.seed_state()?;
    let traj = match run_trajectory(cfg, &seed) {
        Ok(t) => t,
        Err(e) => {
            println!("FAIL  integration: {e}");
            return Ok(1);
        }
    };

    if cfg.out.is_some() || !cfg.projection.is_on() {
        let env = traj.drift_envelope();
        let rows: Vec<DriftRow> = traj
            .samples
            .iter()
            .zip(traj.drift_curve())
            .zip(env)
            .map(|((s, drift), envelope)| DriftRow { tau: s.tau, drift, envelope })
            .collect();
        let out = cfg.out_path("drift");
        write_output(&out, &rows, cfg.format, &cfg.metadata("verify"))?;
        println!("drift curve written to {}", out.display());
    }

    let checks = verify_checks(cfg, &seed, &traj);
    println!("{:<6} {:<24} {:>12} {:>10}", "", "check", "value", "threshold");
    let mut failures = 0;
    for c in &checks {
        let ok = c.passed();
        failures += usize::from(!ok);
        println!(
            "{:<6} {:<24} {:>12.3e} {:>10.1e}  {}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            c.note
        );
    }
    println!("{} of {} checks passed", checks.len() - failures, checks.len());
    Ok(if failures == 0 { 0 } else { 1 })
}

#[derive(Args, Debug, Clone)]
pub struct RankArgs {
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub u_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub u_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub u_step: f64,
    /// classify a single point "u1,u2" instead of a grid
    #[arg(long, allow_hyphen_values = true, value_name = "U1,U2")]
    pub point: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u3: f64,
    /// <k,p>; defaults to the mass
    #[arg(long, allow_hyphen_values = true)]
    pub kp: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_pi: f64,
}

/// Grid values as integer multiples of the step so that the diagonals and
/// the axis are hit exactly.
fn grid_axis(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && step.is_finite()) || hi < lo {
        return Err(format!("bad grid: [{lo}, {hi}] at step {step}"));
    }
    let a = (lo / step).round() as i64;
    let b = (hi / step).round() as i64;
    // dividing by an integral reciprocal keeps values like -1.9 exact
    let inv = (1.0 / step).round();
    if inv >= 1.0 && (inv * step - 1.0).abs() < 1e-12 {
        Ok((a..=b).map(|n| n as f64 / inv).collect())
    } else {
        Ok((a..=b).map(|n| n as f64 * step).collect())
    }
}

pub fn cmd_rankmap(cfg: &RunConfig, args: &RankArgs) -> CmdResult {
    let points: Vec<(f64, f64)> = match &args.point {
        Some(s) => {
            let (a, b) = s.split_once(',').ok_or_else(|| format!("--point expects u1,u2, got {s:?}"))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("--point: not a number: {v:?}"));
            vec![(parse(a)?, parse(b)?)]
        }
        None => {
            let axis = grid_axis(args.u_min, args.u_max, args.u_step)?;
            axis.iter().flat_map(|&u1| axis.iter().map(move |&u2| (u1, u2))).collect()
        }
    };
    let kp = args.kp.unwrap_or(cfg.params.mass);
    let params = cfg.params;
    let rows: Vec<RankRow> = points
        .par_iter()
        .map(|&(u1, u2)| {
            let ms = MomentumScalars { u1, u2, u3: args.u3, kp, p_pi: args.p_pi };
            match classify(&ms, &params, RANK_EPSILON) {
                Ok(c) => RankRow::classified(u1, u2, &c),
                Err(_) => RankRow::error(u1, u2),
            }
        })
        .collect();

    let out = cfg.out_path("rankmap");
    let mut meta = cfg.metadata("rankmap");
    meta.insert("meta.u_min".into(), args.u_min.to_string());
    meta.insert("meta.u_max".into(), args.u_max.to_string());
    meta.insert("meta.u_step".into(), args.u_step.to_string());
    meta.insert("meta.u3".into(), args.u3.to_string());
    meta.insert("meta.kp".into(), kp.to_string());
    meta.insert("meta.p_pi".into(), args.p_pi.to_string());
    write_output(&out, &rows, cfg.format, &meta)?;

    println!("wrote {} cells to {}", rows.len(), out.display());
    for label in ["i", "ii", "iii", "ii'", "error"] {
        let n = rows.iter().filter(|r| r.regime == label).count();
        if n > 0 {
            println!("{label:>6}  {n}");
        }
    }
    if let [row] = rows.as_slice() {
        println!("({}, {}) -> regime {} rank {:?}", row.u1, row.u2, row.regime, row.rank);
    }
    Ok(0)
}
