//! `phyllo`: command-line front end of the phyllotaxis crate.
//!
//! Every subcommand prints a JSON report with a top-level `schema` field.
//! Exit status is 0 on success, 1 for invalid input and 2 when a
//! computation fails.

mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use phyllotaxis::colouring::{self, black_white, four_colour, is_proper, monodromy_colour, stripe_count, tait_check};
use phyllotaxis::contfrac::{convergents, expand, parse_theta, verify_identities, RealParam};
use phyllotaxis::fitgeo::{fit_geodesic, fit_sunflower, LiftStrategy, Observation};
use phyllotaxis::hyperbolic::{phyllotactic_arc, phyllotactic_geodesic, reduce_to_fundamental_domain, HPoint};
use phyllotaxis::io::{read_points_csv, write_points_csv};
use phyllotaxis::linearize::{closeness, expansion_for, gauss_reduce, linear_model, nearest_steps, tau_of, ClosenessOptions};
use phyllotaxis::parastichy::{families_at, families_whorled, transitions, verify_cab, TransitionKind};
use phyllotaxis::phyllo::{generate_whorled, PhylloPoint, PhylloSet};
use phyllotaxis::trace::trace;
use phyllotaxis::voronoi::{cell_area_stats, classify_cells, compute_set, defect_report};
use phyllotaxis::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "phyllo", version, about = "Phyllotactic point sets and their geometry")]
struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Theta {
    /// θ expression: golden, p/q, (a+b*sqrt(d))/c, exp(-1), ...
    #[arg(long, default_value = "golden")]
    theta: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point set as CSV `n,x,y` (`n,k,x,y` for whorls).
    Gen {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        whorl: u32,
        /// Standard deviation of Gaussian noise added to each coordinate.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Samples of γ_θ with their reductions, and the events of the trace.
    Geodesic {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Local lattice model at index n.
    Lattice {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
    },
    /// ε-closeness of the set and the local lattice in a disc.
    Closeness {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        slack: f64,
    },
    /// Voronoi cell statistics and defect circles.
    Voronoi {
        #[command(flatten)]
        theta: Theta,
        /// Radius of the point set and of the clip disc.
        #[arg(long, default_value_t = 40.0)]
        radius: f64,
        #[arg(long, num_args = 2, value_names = ["R_IN", "R_OUT"])]
        annulus: Option<Vec<f64>>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Parastichy families at n, and the transitions of a range with c = a + b.
    Parastichy {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        whorl: u32,
        #[arg(long, num_args = 2, value_names = ["T_MIN", "T_MAX"])]
        transitions: Option<Vec<f64>>,
    },
    /// Four-colouring or black/white shading of an annulus.
    Colour {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 1)]
        whorl: u32,
        #[arg(long, num_args = 2, value_names = ["R_IN", "R_OUT"], default_values_t = [12.0, 17.0])]
        annulus: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Four)]
        mode: Mode,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Sunflower fit of `x,y` points, or geodesic fit of half-plane points.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FitKind::Sunflower)]
        kind: FitKind,
        /// Lift geodesic points out of the fundamental domain.
        #[arg(long)]
        lift: bool,
    },
    /// Convergents and the continued-fraction identities.
    Identities {
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Mode {
    Four,
    Bw,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum FitKind {
    Sunflower,
    Geodesic,
}

/// Failure of a subcommand with its exit status.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidParam(_) | Error::Io(_) | Error::DegenerateData(_) | Error::Underdetermined(_) | Error::DegenerateInput(_) => {
                Failure::Invalid(e.to_string())
            }
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(format!("io: {e}"))
    }
}

type Outcome = Result<Value, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn theta_of(t: &Theta) -> Result<RealParam, Failure> {
    Ok(parse_theta(&t.theta)?)
}

fn pair(v: &[f64], what: &str) -> Result<(f64, f64), Failure> {
    match v {
        [a, b] if a.is_finite() && b.is_finite() && 0.0 <= *a && a < b => Ok((*a, *b)),
        _ => Err(invalid(format!("{what} needs 0 ≤ lower < upper"))),
    }
}

fn positive(x: f64, what: &str) -> Result<f64, Failure> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!("{what} must be positive")))
    }
}

fn whorl_set(theta: &RealParam, d: u32, radius: f64) -> Result<PhylloSet, Failure> {
    if d == 0 {
        return Err(invalid("whorl must be at least 1"));
    }
    let n_max = (radius * radius * d as f64).ceil() as u64 + 1;
    Ok(generate_whorled(theta, d, n_max))
}

fn hpoint(z: HPoint) -> Value {
    json!([z.x, z.y])
}

fn gen(theta: &RealParam, n: u64, whorl: u32, noise: f64, seed: u64, out: Option<&Path>) -> Outcome {
    if whorl == 0 {
        return Err(invalid("whorl must be at least 1"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(invalid("noise must be a finite non-negative number"));
    }
    let mut set = generate_whorled(theta, whorl, n);
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Normal::new(0.0, noise).map_err(|e| invalid(e.to_string()))?;
        set.points = set
            .points
            .iter()
            .map(|p| PhylloPoint { pos: p.pos + Complex64::new(g.sample(&mut rng), g.sample(&mut rng)), ..*p })
            .collect();
    }
    match out {
        Some(path) => write_points_csv(&set, File::create(path)?)?,
        None => write_points_csv(&set, io::stdout().lock())?,
    }
    Ok(json!({ "points": set.len(), "whorl": whorl, "theta": theta.to_string(), "out": out.map(|p| p.display().to_string()) }))
}

fn geodesic(theta: &RealParam, t_min: f64, t_max: f64, samples: usize) -> Outcome {
    let (lo, hi) = pair(&[t_min, t_max], "t range")?;
    let lo = positive(lo, "t-min")?;
    if samples < 2 {
        return Err(invalid("samples must be at least 2"));
    }
    let mut rows = Vec::new();
    for i in 0..samples {
        let t = lo * (hi / lo).powf(i as f64 / (samples - 1) as f64);
        let z = phyllotactic_geodesic(theta, t);
        let (r, g) = reduce_to_fundamental_domain(z)?;
        rows.push(json!({ "t": t, "point": hpoint(z), "reduced": hpoint(r), "map": [g.a, g.b, g.c, g.d] }));
    }
    let tr = trace(theta, lo, hi)?;
    Ok(json!({ "arc": phyllotactic_arc(theta), "samples": rows, "events": tr.events, "degenerate": tr.degenerate }))
}

fn lattice(theta: &RealParam, n: u64) -> Outcome {
    let exp = expansion_for(theta, n);
    let (basis, err) = linear_model(&exp, n)?;
    let short = gauss_reduce(basis.v1, basis.v2);
    let shape = tau_of(theta, basis.j, n as f64)?.reduced()?;
    Ok(json!({
        "n": n,
        "j": basis.j,
        "basis": basis,
        "det": basis.det(),
        "reduced_basis": [short.0, short.1],
        "shortest": short.0.norm(),
        "second_order": err,
        "shape": hpoint(shape),
        "nearest_steps": nearest_steps(&exp, n.max(1), 4)?,
    }))
}

fn closeness_cmd(theta: &RealParam, n: u64, radius: f64, slack: f64) -> Outcome {
    let radius = positive(radius, "radius")?;
    let slack = positive(slack, "slack")?;
    let exp = expansion_for(theta, n + ((n as f64).sqrt() * 2.0 * (radius + slack)) as u64 + 1);
    let opts = ClosenessOptions { slack, ..ClosenessOptions::default() };
    Ok(json!({ "n": n, "radius": radius, "closeness": closeness(&exp, n, radius, opts)? }))
}

fn voronoi(theta: &RealParam, radius: f64, annulus: Option<&[f64]>, svg_out: Option<&Path>) -> Outcome {
    let radius = positive(radius, "radius")?;
    let ann = match annulus {
        Some(a) => pair(a, "annulus")?,
        None => (radius * 0.5, radius * 0.9),
    };
    let set = whorl_set(theta, 1, radius + 1.0)?;
    let diag = compute_set(&set, radius)?;
    let stats = cell_area_stats(&diag, ann)?;
    let hist = classify_cells(&diag);
    let defects = defect_report(&diag, theta, 30.0);
    if let Some(path) = svg_out {
        std::fs::write(path, svg::voronoi(&diag))?;
    }
    Ok(json!({
        "sites": diag.sites.len(),
        "clip_radius": diag.clip_radius,
        "annulus": [ann.0, ann.1],
        "area": stats,
        "histogram": hist,
        "defects": match defects { Ok(r) => json!(r), Err(e) => json!({ "error": e.to_string() }) },
        "svg": svg_out.map(|p| p.display().to_string()),
    }))
}

fn parastichy(theta: &RealParam, n: u64, whorl: u32, range: Option<&[f64]>) -> Outcome {
    let families = if whorl == 1 {
        families_at(theta, n)?
    } else {
        let set = whorl_set(theta, whorl, ((n as f64 + 12.0 * (n as f64).sqrt() + 20.0) / whorl as f64).sqrt())?;
        families_whorled(&set, n)?
    };
    let mut report = json!({ "n": n, "whorl": whorl, "families": families });
    if let Some(r) = range {
        let (lo, hi) = pair(r, "transitions")?;
        let mut events = Vec::new();
        for e in transitions(theta, (positive(lo, "t-min")?, hi))? {
            let cab = match e.kind {
                TransitionKind::II => Some(verify_cab(theta, &e).map_or_else(|err| json!({ "error": err.to_string() }), |c| json!(c))),
                TransitionKind::I => None,
            };
            events.push(json!({ "t": e.t, "radius": e.radius, "kind": e.kind, "cab": cab }));
        }
        report["transitions"] = Value::Array(events);
    }
    Ok(report)
}

fn colour(theta: &RealParam, whorl: u32, annulus: &[f64], mode: Mode, svg_out: Option<&Path>) -> Outcome {
    let ann = pair(annulus, "annulus")?;
    let clip = ann.1 + 8.0;
    let set = whorl_set(theta, whorl, clip + 1.0)?;
    let diag = compute_set(&set, clip)?;
    let report = match mode {
        Mode::Four => {
            let cm = four_colour(&set, &diag, ann)?;
            let proper = is_proper(&diag, &cm);
            let tait = tait_check(&diag, &cm, ann)?;
            let mid = (ann.0 + ann.1) / 2.0;
            let loop_m = monodromy_colour(&set, &diag, mid).map_or_else(|e| json!({ "error": e.to_string() }), |m| json!(m));
            if let Some(path) = svg_out {
                std::fs::write(path, svg::four_colour(&diag, &cm))?;
            }
            json!({
                "cells": cm.cell_colour.len(),
                "steps": cm.steps,
                "proper": proper,
                "tait": tait,
                "monodromy": cm.monodromy,
                "monodromy_coords": cm.monodromy_coords,
                "monodromy_trivial": cm.monodromy == colouring::ZERO,
                "seam_edges": cm.seam_edges.len(),
                "loop": loop_m,
            })
        }
        Mode::Bw => {
            let shades = black_white(&set);
            if let Some(path) = svg_out {
                std::fs::write(path, svg::black_white(&diag, &shades, ann))?;
            }
            json!({ "stripes": stripe_count(&set, &diag, ann) })
        }
    };
    Ok(json!({ "annulus": [ann.0, ann.1], "whorl": whorl, "mode": format!("{mode:?}").to_lowercase(), "report": report, "svg": svg_out.map(|p| p.display().to_string()) }))
}

fn fit(input: &Path, kind: FitKind, lift: bool) -> Outcome {
    let pts = read_points_csv(File::open(input)?)?;
    match kind {
        FitKind::Sunflower => {
            let fit = fit_sunflower(&Observation::new(pts)?, None)?;
            Ok(json!({ "kind": "sunflower", "fit": fit }))
        }
        FitKind::Geodesic => {
            if let Some(bad) = pts.iter().find(|z| !(z.im > 0.0)) {
                return Err(invalid(format!("point ({}, {}) is not in the upper half-plane", bad.re, bad.im)));
            }
            let hp: Vec<HPoint> = pts.iter().map(|&z| HPoint::from_complex(z)).collect();
            let strategy = if lift { LiftStrategy::default() } else { LiftStrategy::AsGiven };
            let fit = fit_geodesic(&hp, strategy)?;
            let (e0, e1) = fit.arc.endpoints();
            Ok(json!({ "kind": "geodesic", "arc": fit.arc, "endpoints": [e0, e1], "mean_distance": fit.mean_distance, "max_distance": fit.max_distance }))
        }
    }
}

fn identities(theta: &RealParam, n: usize) -> Outcome {
    let report = verify_identities(theta, n)?;
    let cf = expand(theta, n + 1);
    let table: Vec<Value> = convergents(&cf, n.min(cf.len().saturating_sub(1)))
        .iter()
        .filter(|c| c.index >= 0)
        .map(|c| json!({ "n": c.index, "p": c.p.to_string(), "q": c.q.to_string() }))
        .collect();
    let tol = if theta.is_exact() { 1e-9 } else { 1e-6 };
    let pass = report.determinant_exact && report.max_residual < tol && report.exact_zero != Some(false);
    Ok(json!({
        "theta": theta.to_string(),
        "coefficients": cf.coefficients.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "convergents": table,
        "report": report,
        "tolerance": tol,
        "pass": pass,
    }))
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Gen { theta, n, whorl, noise, out } => gen(&theta_of(theta)?, *n, *whorl, *noise, cli.seed, out.as_deref()),
        Command::Geodesic { theta, t_min, t_max, samples } => geodesic(&theta_of(theta)?, *t_min, *t_max, *samples),
        Command::Lattice { theta, n } => lattice(&theta_of(theta)?, *n),
        Command::Closeness { theta, n, radius, slack } => closeness_cmd(&theta_of(theta)?, *n, *radius, *slack),
        Command::Voronoi { theta, radius, annulus, svg } => voronoi(&theta_of(theta)?, *radius, annulus.as_deref(), svg.as_deref()),
        Command::Parastichy { theta, n, whorl, transitions } => parastichy(&theta_of(theta)?, *n, *whorl, transitions.as_deref()),
        Command::Colour { theta, whorl, annulus, mode, svg } => colour(&theta_of(theta)?, *whorl, annulus, *mode, svg.as_deref()),
        Command::Fit { input, kind, lift } => fit(input, *kind, *lift),
        Command::Identities { theta, n } => identities(&theta_of(theta)?, *n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("phyllo: {e}");
            return ExitCode::from(1);
        }
    }
    // gen writes the CSV itself when no output file is given
    let to_stdout = matches!(&cli.command, Command::Gen { out: None, .. });
    match dispatch(&cli) {
        Ok(mut report) => {
            if to_stdout {
                return ExitCode::SUCCESS;
            }
            report["schema"] = json!(SCHEMA);
            report["command"] = json!(command_name(&cli.command));
            let mut out = io::stdout().lock();
            let _ = serde_json::to_writer_pretty(&mut out, &report);
            let _ = writeln!(out);
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("phyllo: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("phyllo: {msg}");
            ExitCode::from(2)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen { .. } => "gen",
        Command::Geodesic { .. } => "geodesic",
        Command::Lattice { .. } => "lattice",
        Command::Closeness { .. } => "closeness",
        Command::Voronoi { .. } => "voronoi",
        Command::Parastichy { .. } => "parastichy",
        Command::Colour { .. } => "colour",
        Command::Fit { .. } => "fit",
        Command::Identities { .. } => "identities",
    }
}
