use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use cca_core::dynamics::{evolve_amplitude, recommended_dt, weighted_spread, TimeGrid};
use cca_core::ensemble::{
    localization_stats, localization_to_csv, realizations_to_csv, run_realization, summary_to_csv,
    sweep_detailed, SweepConfig, CONFIG_KEYS,
};
use cca_core::lattice::{build_single_excitation_hamiltonian, sample_detunings, DetuningVector};
use cca_core::pheno::{curve_to_csv, n_from_nv, nv_analytic, nv_curve_to_csv, predict_curve};
use cca_core::report::{fmt_f64, CsvWriter};
use cca_core::spectral::LocalSpectrum;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "cca-nm",
    version,
    about = "Disorder-induced non-Markovianity in coupled-cavity arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV destination (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override a config or subcommand key, e.g. --set sigma_grid=0.5,1
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Master seed for sweeps, realization seed for `single`
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for ensemble runs
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One disorder realization: trajectory CSV and its non-Markovianity
    Single,
    /// Ensemble sweep over the σ grid
    Sweep {
        /// Also write the per-realization table here
        #[arg(long)]
        detail: Option<PathBuf>,
    },
    /// Single-mode model prediction over the σ grid
    PhenoCurve,
    /// Ordered array against the Markovian exponential decay
    OrderedBaseline,
    /// Localization statistics of the selected local mode
    LocalizationStats,
    /// Analytic N_V and N of the single-mode model
    NvAnalytic,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Turn library errors from user input into usage failures.
fn cfg_result<T>(r: cca_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        cca_core::Error::Config(_) | cca_core::Error::InvalidArgument(_) => usage(e.to_string()),
        other => Failure::Runtime(other.into()),
    })
}

/// Config keys plus the subcommand's own keys, after overrides.
struct Settings {
    cfg: SweepConfig,
    extra: Vec<(String, String)>,
}

impl Settings {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.extra.iter().rev().find(|(k, _)| k == key) {
            None => Ok(None),
            Some((_, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("{key}={v}: not a valid value"))),
        }
    }

    fn meta(&self) -> String {
        let mut meta = self.cfg.to_meta();
        for (k, v) in &self.extra {
            meta.push_str(&format!(" {k}={v}"));
        }
        meta
    }
}

fn load_settings(cli: &Cli, extra_keys: &[&str]) -> Result<Settings, Failure> {
    load_settings_from(cli, SweepConfig::default(), extra_keys)
}

fn load_settings_from(
    cli: &Cli,
    mut cfg: SweepConfig,
    extra_keys: &[&str],
) -> Result<Settings, Failure> {
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                usage(format!("config file not found: {}", path.display()))
            }
            _ => usage(format!("cannot read config {}: {e}", path.display())),
        })?;
        cfg_result(cfg.apply_text(&text))?;
    }
    let mut extra = Vec::new();
    for item in &cli.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects key=value, got '{item}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if CONFIG_KEYS.contains(&k) {
            cfg_result(cfg.set(k, v))?;
        } else if extra_keys.contains(&k) {
            extra.push((k.to_string(), v.to_string()));
        } else {
            return Err(usage(format!("unknown key '{k}' for this subcommand")));
        }
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(usage("--threads must be >= 1"));
    }
    cfg.threads = cli.threads;
    Ok(Settings { cfg, extra })
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

/// The one-line summary goes to stdout unless stdout carries the CSV.
fn report(cli: &Cli, line: &str) {
    if cli.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn run_single(cli: &Cli) -> Result<(), Failure> {
    let s = load_settings(cli, &["sigma"])?;
    let sigma = s.get::<f64>("sigma")?.unwrap_or(1.0);
    let seed = cli.seed.unwrap_or(0);
    let mut cfg = s.cfg.clone();
    cfg.sigma_grid = vec![sigma];
    cfg_result(cfg.validate())?;
    let result = cfg_result(run_realization(&cfg, sigma, seed))?;

    // the trajectory itself, recomputed from the same detunings
    let d = cfg_result(sample_detunings(
        &cfg.spec(sigma).map_err(anyhow::Error::from)?,
        cfg.n_half,
        seed,
    ))?;
    let h =
        build_single_excitation_hamiltonian(&d, cfg.hopping, cfg.g).map_err(anyhow::Error::from)?;
    let spectrum = LocalSpectrum::new(&h).map_err(anyhow::Error::from)?;
    let grid = TimeGrid::new(cfg.horizon().map_err(anyhow::Error::from)?, result.dt)
        .map_err(anyhow::Error::from)?;
    let traj = evolve_amplitude(&spectrum, &grid).map_err(anyhow::Error::from)?;
    write_output(
        cli.out.as_deref(),
        &traj.to_csv(&format!("{} seed={seed}", s.meta())),
    )?;
    report(
        cli,
        &format!(
            "single: sigma={sigma} seed={seed} N={:.6} N_V={:.6} lambda_q2={:.4} g_ell={:.6} gamma={:.6e} samples={}",
            result.nm.n_rescaled, result.nm.nv, result.local.lambda_q2, result.local.g_ell_q2, result.local.gamma,
            result.samples
        ),
    );
    Ok(())
}

fn run_sweep(cli: &Cli, detail: Option<&Path>) -> Result<(), Failure> {
    let s = load_settings(cli, &[])?;
    let out = cfg_result(sweep_detailed(&s.cfg))?;
    let meta = s.meta();
    write_output(cli.out.as_deref(), &summary_to_csv(&out.summaries, &meta))?;
    if let Some(path) = detail {
        write_output(Some(path), &realizations_to_csv(&s.cfg, &out, &meta))?;
    }
    let means: Vec<String> = out
        .summaries
        .iter()
        .map(|x| format!("{}:{:.4}±{:.4}", x.sigma, x.mean_n, x.mad_n))
        .collect();
    report(
        cli,
        &format!(
            "sweep: {} realizations per sigma, mean N {}",
            s.cfg.realizations,
            means.join(" ")
        ),
    );
    Ok(())
}

fn run_pheno_curve(cli: &Cli) -> Result<(), Failure> {
    let s = load_settings(cli, &[])?;
    let kind = s.cfg.lambda_kind;
    let curve = cfg_result(predict_curve(&s.cfg, kind))?;
    write_output(cli.out.as_deref(), &curve_to_csv(&curve, &s.meta()))?;
    let pts: Vec<String> = curve
        .iter()
        .map(|p| format!("{}:{:.4}", p.sigma, p.n_predicted))
        .collect();
    report(
        cli,
        &format!(
            "pheno-curve: lambda_kind={} C={} N {}",
            kind.as_str(),
            s.cfg.c_constant(kind),
            pts.join(" ")
        ),
    );
    Ok(())
}

fn run_ordered_baseline(cli: &Cli) -> Result<(), Failure> {
    let base = SweepConfig {
        n_half: 500,
        ..SweepConfig::default()
    };
    let s = load_settings_from(cli, base, &["t_end"])?;
    let t_end = s.get::<f64>("t_end")?.unwrap_or(200.0);
    let (g, hopping) = (s.cfg.g, s.cfg.hopping);
    let h = cfg_result(build_single_excitation_hamiltonian(
        &DetuningVector::uniform(s.cfg.n_half),
        hopping,
        g,
    ))?;
    let spectrum = LocalSpectrum::new(&h).map_err(anyhow::Error::from)?;
    let dt = match s.cfg.dt_override {
        Some(dt) => dt,
        None => recommended_dt(
            weighted_spread(&spectrum).map_err(anyhow::Error::from)?,
            hopping,
        ),
    };
    let grid = cfg_result(TimeGrid::new(t_end, dt))?;
    let traj = evolve_amplitude(&spectrum, &grid).map_err(anyhow::Error::from)?;
    let rate = g * g / hopping;
    let mut w = CsvWriter::new(
        "ordered-baseline",
        &s.meta(),
        &["t", "population", "markov", "deviation"],
    );
    let mut worst = 0.0f64;
    for (t, p) in traj.times().zip(traj.population()) {
        let markov = (-rate * t).exp();
        worst = worst.max((p - markov).abs());
        w.row(&[fmt_f64(t), fmt_f64(p), fmt_f64(markov), fmt_f64(p - markov)]);
    }
    write_output(cli.out.as_deref(), &w.finish())?;
    report(
        cli,
        &format!(
            "ordered-baseline: n_half={} g={g} t_end={t_end} max_deviation={worst:.6e}",
            s.cfg.n_half
        ),
    );
    Ok(())
}

fn run_localization_stats(cli: &Cli) -> Result<(), Failure> {
    let s = load_settings(cli, &[])?;
    let rows = cfg_result(localization_stats(&s.cfg))?;
    write_output(cli.out.as_deref(), &localization_to_csv(&rows, &s.meta()))?;
    let pts: Vec<String> = rows
        .iter()
        .map(|r| format!("{}:{:.3}", r.sigma, r.mean_lambda_q2))
        .collect();
    report(
        cli,
        &format!("localization-stats: mean lambda_q2 {}", pts.join(" ")),
    );
    Ok(())
}

fn run_nv_analytic(cli: &Cli) -> Result<(), Failure> {
    let s = load_settings(cli, &["r", "r_min", "r_max", "r_steps"])?;
    let rs = match s.get::<f64>("r")? {
        Some(r) => vec![r],
        None => {
            let lo = s.get::<f64>("r_min")?.unwrap_or(0.01);
            let hi = s.get::<f64>("r_max")?.unwrap_or(10.0);
            let steps = s.get::<usize>("r_steps")?.unwrap_or(200);
            if !(hi > lo && lo >= 0.0) || steps < 2 {
                return Err(usage("need 0 <= r_min < r_max and r_steps >= 2"));
            }
            (0..steps)
                .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
                .collect()
        }
    };
    let meta: Vec<String> = s.extra.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let csv = cfg_result(nv_curve_to_csv(&rs, &meta.join(" ")))?;
    if rs.len() == 1 {
        let nv = cfg_result(nv_analytic(rs[0]))?;
        println!(
            "nv-analytic: r={} N_V={} N={}",
            rs[0],
            fmt_f64(nv),
            fmt_f64(n_from_nv(nv))
        );
        if cli.out.is_some() {
            write_output(cli.out.as_deref(), &csv)?;
        }
    } else {
        write_output(cli.out.as_deref(), &csv)?;
        report(
            cli,
            &format!(
                "nv-analytic: {} points on r in [{}, {}]",
                rs.len(),
                rs[0],
                rs[rs.len() - 1]
            ),
        );
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Single => run_single(cli),
        Command::Sweep { detail } => run_sweep(cli, detail.as_deref()),
        Command::PhenoCurve => run_pheno_curve(cli),
        Command::OrderedBaseline => run_ordered_baseline(cli),
        Command::LocalizationStats => run_localization_stats(cli),
        Command::NvAnalytic => run_nv_analytic(cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
