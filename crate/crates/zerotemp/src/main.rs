//! Command-line front end: `analyze`, `limit`, `table`, `check`.
//!
//! Exit codes: 0 ok, 2 parse error, 3 no circuit, 4 irreducibility failure,
//! 5 property failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use zerotemp::finite_beta;
use zerotemp::graph::Symbol;
use zerotemp::potentials::{self, rat_to_f64};
use zerotemp::renorm;
use zerotemp::sysspec::{self, AnalysisReport, LimitReport, SystemSpec};
use zerotemp::Error;

#[derive(Parser)]
#[command(
    name = "zerotemp",
    about = "Equilibrium states on subshifts of finite type and their zero-temperature limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON system description
    spec_file: PathBuf,
    /// Override the heavy-classification tolerance eps_rho
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Report phi-bar, E_phi, phi_g, the maximizing subshift and pressures
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Machine-readable output
        #[arg(long)]
        json: bool,
    },
    /// Compute the zero-temperature limit and its weights
    Limit {
        #[command(flatten)]
        common: CommonArgs,
        /// Machine-readable output
        #[arg(long)]
        json: bool,
    },
    /// Tabulate cylinder masses across beta values against the limit
    Table {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma list of betas, or "log2:k1..k2" for multiples of log 2
        #[arg(long, default_value = "log2:1..6")]
        betas: String,
        /// Comma list of cylinder words (default: single symbols)
        #[arg(long)]
        cylinders: Option<String>,
        /// Write CSV to this path instead of a human table
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the empirical verification suite
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Regression window lo:hi for decay slopes
        #[arg(long, default_value = "5:30")]
        beta_window: String,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::NoCircuit => 3,
        Error::NotIrreducible | Error::RenormalizedNotIrreducible(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { common, json } => cmd_analyze(&common, json),
        Command::Limit { common, json } => cmd_limit(&common, json),
        Command::Table { common, betas, cylinders, csv } => {
            cmd_table(&common, &betas, cylinders.as_deref(), csv.as_deref())
        }
        Command::Check { common, beta_window } => cmd_check(&common, &beta_window),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}

fn load(common: &CommonArgs) -> zerotemp::Result<(SystemSpec, zerotemp::graph::Digraph, potentials::PotentialPhi, potentials::PotentialPsi)> {
    let text = std::fs::read_to_string(&common.spec_file)
        .map_err(|e| Error::Parse(format!("{}: {e}", common.spec_file.display())))?;
    sysspec::load_system(&text)
}

fn cmd_analyze(common: &CommonArgs, json: bool) -> zerotemp::Result<ExitCode> {
    let (_, g, phi, psi) = load(common)?;
    let raw = potentials::maximize(&g, &phi)?;
    let sys = potentials::normalize(&g, &phi, &psi)?;
    let heavy = renorm::heavy_components(&sys)?;
    let report = AnalysisReport::new(&sys, &heavy, &raw.phi_bar);
    if json {
        println!("{}", report.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    println!("phi_bar  = {}", report.phi_bar);
    println!("E_phi    = {{{}}}", report.e_phi.join(", "));
    match &report.phi_g {
        Some(v) => println!("phi_g    = {v}"),
        None => println!("phi_g    = (undefined: single circuit mean)"),
    }
    println!("maximizing arrows ({}):", report.maximizing_arrows.len());
    for (a, b) in &report.maximizing_arrows {
        println!("  {a} -> {b}");
    }
    println!("transitive components of the maximizing subshift:");
    for c in &report.components {
        let tag = if c.heavy { "heavy" } else { "light" };
        println!(
            "  {{{}}}  pressure = {:+.9}  [{tag}]",
            c.vertices.join(","),
            c.pressure
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_limit(common: &CommonArgs, json: bool) -> zerotemp::Result<ExitCode> {
    let (_, g, phi, psi) = load(common)?;
    let limit = renorm::zero_temperature_limit(&g, &phi, &psi)?;
    let report = LimitReport::new(&limit);
    if json {
        println!("{}", report.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    println!("zero-temperature limit = sum over heavy components of alpha_J nu_J");
    for comp in &report.components {
        let frac = sysspec::as_simple_fraction(comp.alpha, 64)
            .map(|(n, d)| format!(" = {n}/{d}"))
            .unwrap_or_default();
        println!("  {{{}}}  alpha = {:.6}{frac}", comp.vertices.join(","), comp.alpha);
    }
    println!("symbol masses:");
    for (name, mass) in &report.symbol_masses {
        let frac = sysspec::as_simple_fraction(*mass, 64)
            .map(|(n, d)| format!(" = {n}/{d}"))
            .unwrap_or_default();
        println!("  [{name}] = {mass:.6}{frac}");
    }
    println!("renormalization ladder ({} levels):", report.ladder.len());
    for (i, level) in report.ladder.iter().enumerate() {
        println!(
            "  level {i}: alphabet {{{}}}, heavy {:?}",
            level.alphabet.join(","),
            level.heavy_components
        );
        for arrow in &level.renormalized_arrows {
            println!(
                "    {} -> {}: phi' = {}, psi' = {:.9}",
                arrow.from, arrow.to, arrow.phi, arrow.psi
            );
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_betas(spec: &str) -> zerotemp::Result<Vec<f64>> {
    if let Some(range) = spec.strip_prefix("log2:") {
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| Error::Parse(format!("bad beta range `{spec}`")))?;
        let lo: i64 = lo.trim().parse().map_err(|_| Error::Parse(format!("bad beta range `{spec}`")))?;
        let hi: i64 = hi.trim().parse().map_err(|_| Error::Parse(format!("bad beta range `{spec}`")))?;
        if hi < lo {
            return Err(Error::Parse(format!("empty beta range `{spec}`")));
        }
        return Ok((lo..=hi).map(|k| k as f64 * 2f64.ln()).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad beta `{s}`")))
        })
        .collect()
}

fn cmd_table(
    common: &CommonArgs,
    betas: &str,
    cylinders: Option<&str>,
    csv: Option<&std::path::Path>,
) -> zerotemp::Result<ExitCode> {
    let (spec, g, phi, psi) = load(common)?;
    let betas = parse_betas(betas)?;
    let cylinders: Vec<Vec<Symbol>> = match cylinders {
        Some(list) => list
            .split(',')
            .map(|w| spec.tokenize(w.trim()))
            .collect::<zerotemp::Result<_>>()?,
        None => (0..g.n()).map(|s| vec![s]).collect(),
    };
    let limit = renorm::zero_temperature_limit(&g, &phi, &psi)?;
    let sweep = finite_beta::beta_sweep(&g, &phi, &psi, &betas, &cylinders, &limit)?;
    if let Some(path) = csv {
        std::fs::write(path, sweep.to_csv())
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return Ok(ExitCode::SUCCESS);
    }
    print!("{:>10}", "beta");
    for label in &sweep.cylinder_labels {
        print!("  {label:>10}");
    }
    println!();
    for (beta, row) in sweep.betas.iter().zip(&sweep.values) {
        print!("{beta:>10.6}");
        for v in row {
            print!("  {v:>10.6}");
        }
        println!();
    }
    print!("{:>10}", "limit");
    for v in &sweep.limit_row {
        print!("  {v:>10.6}");
    }
    println!();
    Ok(ExitCode::SUCCESS)
}

fn parse_window(spec: &str) -> zerotemp::Result<(f64, f64)> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("bad window `{spec}` (want lo:hi)")))?;
    let lo: f64 = lo.trim().parse().map_err(|_| Error::Parse(format!("bad window `{spec}`")))?;
    let hi: f64 = hi.trim().parse().map_err(|_| Error::Parse(format!("bad window `{spec}`")))?;
    Ok((lo, hi))
}

fn cmd_check(common: &CommonArgs, beta_window: &str) -> zerotemp::Result<ExitCode> {
    let (_, g, phi, psi) = load(common)?;
    let window = parse_window(beta_window)?;
    let limit = renorm::zero_temperature_limit(&g, &phi, &psi)?;
    let sys = potentials::normalize(&g, &phi, &psi)?;
    let heavy = renorm::heavy_components(&sys)?;
    let mut failures = 0usize;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // decay: slopes of log-error strictly negative wherever error is visible
    match finite_beta::decay_report(&g, &phi, &psi, &limit, window) {
        Ok(decay) => {
            for (label, fit) in &decay.per_cylinder {
                match fit {
                    Some((slope, _)) => report(
                        "decay",
                        *slope < 0.0,
                        format!("[{label}] slope {slope:+.4}"),
                    ),
                    None => report("decay", true, format!("[{label}] error at floor")),
                }
            }
        }
        Err(e) => report("decay", false, e.to_string()),
    }

    // concentration: outside-heavy mass dominated by e^{beta phi_g / 4}
    let betas: Vec<f64> = (window.0 as i64..=window.1 as i64).map(|k| k as f64).collect();
    let outside = finite_beta::concentration_check(&sys, &heavy, &betas)?;
    if heavy.heavy_vertices.len() == g.n() {
        report("concentration", true, "all symbols heavy; outside mass 0".into());
    } else {
        let phi_g = sys
            .report
            .phi_g
            .as_ref()
            .map(rat_to_f64)
            .unwrap_or(f64::NEG_INFINITY);
        let c = outside[0] / (betas[0] * phi_g / 4.0).exp();
        let ok = outside
            .iter()
            .zip(&betas)
            .all(|(m, b)| *m <= c * (b * phi_g / 4.0).exp() * (1.0 + 1e-9));
        report(
            "concentration",
            ok,
            format!("outside mass {:.3e} -> {:.3e}", outside[0], outside.last().unwrap()),
        );
    }

    // spectral sandwich for beta >= 20
    let betas_hi: Vec<f64> = vec![20.0, 25.0, 30.0];
    let log_rhos = finite_beta::spectral_radius_check(&sys, &betas_hi)?;
    match sys.report.phi_g.as_ref() {
        Some(phi_g) if heavy.heavy_vertices.len() < g.n() || g.arrow_count() > heavy.heavy_arrows.len() => {
            let phi_g = rat_to_f64(phi_g);
            let ok = log_rhos.iter().zip(&betas_hi).all(|(lr, b)| {
                *lr > 0.0 && *lr <= (b * phi_g / 2.0).exp().ln_1p()
            });
            report(
                "spectral-sandwich",
                ok,
                format!("log rho at beta=30: {:.3e}", log_rhos.last().unwrap()),
            );
        }
        _ => report("spectral-sandwich", true, "no subdominant circuit mean".into()),
    }

    // excursion series at two betas
    if heavy.heavy_vertices.len() < g.n() {
        let d1 = finite_beta::excursion_series_check(&sys, &heavy, window.1 / 2.0)?;
        let d2 = finite_beta::excursion_series_check(&sys, &heavy, window.1)?;
        let ok = d2
            .iter()
            .all(|(v, (_, _, diff))| *diff <= d1[v].2 + 1e-12);
        report("excursion-series", ok, format!("{} outside vertices", d2.len()));
    } else {
        report("excursion-series", true, "no outside vertices".into());
    }

    if failures > 0 {
        eprintln!("{failures} check(s) failed");
        return Ok(ExitCode::from(5));
    }
    Ok(ExitCode::SUCCESS)
}
