mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smoothcut::harness::{
    read_csv, read_sweep_csv, run_trial, run_verify, sweep, CsvRow, ExperimentConfig, SweepConfig, SweepCsvRow,
    VerifyOptions,
};
use smoothcut::Error;

use plot::{Chart, Series};

#[derive(Parser, Debug)]
#[command(name = "smoothcut", version, about = "Smoothed online learning simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory (default: config `output.dir`, else ./smoothcut-out).
    #[arg(long, env = "SMOOTHCUT_OUT", global = true)]
    out: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment: trace CSV, summary JSON and learner snapshot per trial.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a sweep file: per-point means and fitted slopes.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        /// Solver log-det gap to test (default 1e-6).
        #[arg(long)]
        solver_gap: Option<f64>,
        /// Solver feasibility tolerance to test (default 1e-8).
        #[arg(long)]
        solver_tol: Option<f64>,
        /// Smaller batches.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Emit SVG figures from a trace CSV and/or a sweep CSV.
    Plot {
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Config(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_runtime() {
            Failure::Runtime(e)
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_fail(path, e))
}

fn out_dir(common: &Common, from_config: Option<&Path>) -> Result<PathBuf, Failure> {
    let dir = common
        .out
        .clone()
        .or_else(|| from_config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("smoothcut-out"));
    fs::create_dir_all(&dir).map_err(|e| io_fail(&dir, e))?;
    Ok(dir)
}

fn need_config(config: Option<PathBuf>) -> Result<PathBuf, Failure> {
    config.ok_or_else(|| Failure::Config("--config PATH is required".into()))
}

fn cmd_run(config: Option<PathBuf>, trials: Option<u64>, common: &Common) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_path(&need_config(config)?)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = trials {
        cfg.trials = n;
    }
    cfg.validate()?;
    let root = out_dir(common, cfg.output.dir.as_deref())?;
    let mut table = String::from("trial,mistakes,bounds_held,decay_passed\n");
    for trial in 0..cfg.trials {
        let out = run_trial(&cfg, trial)?;
        let dir = if cfg.trials == 1 {
            root.clone()
        } else {
            let d = root.join(format!("trial_{trial:03}"));
            fs::create_dir_all(&d).map_err(|e| io_fail(&d, e))?;
            d
        };
        let mut csv = Vec::new();
        out.trace.write_csv(&mut csv)?;
        write(&dir.join("trace.csv"), csv)?;
        let summary = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
        write(&dir.join("summary.json"), summary.as_bytes())?;
        let snap = serde_json::to_string(&out.snapshot).expect("snapshot serializes");
        write(&dir.join("learner.json"), snap.as_bytes())?;
        let s = &out.summary;
        let held = s.bounds.iter().all(|b| b.satisfied);
        table += &format!(
            "{trial},{},{},{}\n",
            s.total_mistakes,
            held as u8,
            s.decay.passed() as u8
        );
        println!(
            "trial {trial}: {} mistakes over {} rounds; bounds {}; decay {}",
            s.total_mistakes,
            s.rounds,
            if held { "held" } else { "VIOLATED" },
            if !s.decay.applicable {
                "n/a"
            } else if s.decay.passed() {
                "ok"
            } else {
                "VIOLATED"
            }
        );
        if common.verbose > 0 {
            for b in &s.bounds {
                println!(
                    "  {:<24} {:?} value {:.2} observed {:.2} {}",
                    b.name,
                    b.kind,
                    b.value,
                    b.observed,
                    if b.satisfied { "ok" } else { "FAIL" }
                );
            }
        }
    }
    if cfg.trials > 1 {
        write(&root.join("trials.csv"), table.as_bytes())?;
    }
    println!("wrote {}", root.display());
    Ok(())
}

fn cmd_sweep(config: Option<PathBuf>, trials: Option<u64>, common: &Common) -> Result<(), Failure> {
    let mut cfg = SweepConfig::from_path(&need_config(config)?)?;
    if let Some(s) = common.seed {
        cfg.base.seed = s;
    }
    if trials.is_some() {
        cfg.trials = trials;
    }
    let root = out_dir(common, cfg.base.output.dir.as_deref())?;
    let r = sweep(&cfg)?;
    let mut csv = Vec::new();
    r.write_csv(&mut csv)?;
    write(&root.join("sweep.csv"), csv)?;
    write(
        &root.join("sweep.json"),
        serde_json::to_string_pretty(&r).expect("sweep serializes").as_bytes(),
    )?;
    for p in &r.points {
        let v = p.value.as_ref().map_or(String::from("-"), |v| v.to_string());
        println!(
            "value {v:<8} T {:>7}: mean mistakes {:.2} ± {:.2} (bounds held {}/{})",
            p.horizon,
            p.mean_mistakes,
            p.std_err,
            p.bounds_held,
            p.mistakes.len()
        );
    }
    let fmt = |s: &Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    for (i, s) in r.slope_vs_log_t.iter().enumerate() {
        println!(
            "value #{i}: slope vs ln T {}, log-log slope {}",
            fmt(s),
            fmt(&r.loglog_slope_vs_t[i])
        );
    }
    for (t, s) in &r.slope_vs_log_inv_sigma {
        println!("T {t}: slope vs ln(1/σ) {}", fmt(s));
    }
    println!("wrote {}", root.display());
    Ok(())
}

fn cmd_verify(gap: Option<f64>, tol: Option<f64>, quick: bool, common: &Common) -> Result<bool, Failure> {
    let mut opts = VerifyOptions::default();
    if let Some(s) = common.seed {
        opts.seed = s;
    }
    if let Some(g) = gap {
        opts.solver.gap = g;
    }
    if let Some(t) = tol {
        opts.solver.tol = t;
    }
    if quick {
        opts.tarasov_cases = 100;
        opts.sandwich_polytopes = 10;
        opts.sandwich_samples = 1000;
        opts.erm_instances = 60;
    }
    if !(opts.solver.gap > 0.0 && opts.solver.tol > 0.0) {
        return Err(Failure::Config("solver gap and tolerance must be positive".into()));
    }
    let r = run_verify(&opts)?;
    print!("{}", r.table());
    if common.verbose > 0 {
        for c in &r.checks {
            println!("{}: {}", c.name, c.detail);
        }
    }
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
        let json = serde_json::to_string_pretty(&r).expect("report serializes");
        write(&dir.join("verify.json"), json.as_bytes())?;
    }
    Ok(r.passed())
}

fn read_file(path: &Path) -> Result<fs::File, Failure> {
    fs::File::open(path).map_err(|e| io_fail(path, e))
}

fn trace_figures(rows: &[CsvRow]) -> (Chart, Chart) {
    let cum = Chart {
        title: "Cumulative mistakes".into(),
        x_label: "round t".into(),
        y_label: "mistakes".into(),
        log_x: true,
        series: vec![Series {
            name: "cumulative mistakes".into(),
            points: rows.iter().map(|r| (r.t as f64, r.cum_mistakes as f64)).collect(),
            dashed: false,
        }],
    };
    let vol: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mistake == 1 && r.log_volume.is_finite())
        .map(|r| (r.cum_mistakes as f64, r.log_volume))
        .collect();
    let reference: Vec<(f64, f64)> = match vol.first() {
        Some(&(m0, v0)) => vol
            .iter()
            .map(|&(m, _)| (m, v0 + (m - m0) * (8.0f64 / 9.0).ln()))
            .collect(),
        None => Vec::new(),
    };
    let vol_chart = Chart {
        title: "John log-volume per mistake".into(),
        x_label: "mistake index m".into(),
        y_label: "log volume".into(),
        log_x: false,
        series: vec![
            Series {
                name: "log volume".into(),
                points: vol,
                dashed: false,
            },
            Series {
                name: "(8/9)^m reference".into(),
                points: reference,
                dashed: true,
            },
        ],
    };
    (cum, vol_chart)
}

fn sigma_figure(rows: &[SweepCsvRow]) -> Chart {
    let mut horizons: Vec<u64> = rows.iter().map(|r| r.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();
    let series = horizons
        .iter()
        .map(|&t| {
            let mut pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.horizon == t && r.sigma.is_finite() && r.sigma > 0.0)
                .map(|r| ((1.0 / r.sigma).ln(), r.mean_mistakes))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                name: format!("T = {t}"),
                points: pts,
                dashed: false,
            }
        })
        .collect();
    Chart {
        title: "Mistakes vs smoothness".into(),
        x_label: "ln(1/σ)".into(),
        y_label: "mean mistakes".into(),
        log_x: false,
        series,
    }
}

fn cmd_plot(trace: Option<PathBuf>, sweep_csv: Option<PathBuf>, common: &Common) -> Result<(), Failure> {
    if trace.is_none() && sweep_csv.is_none() {
        return Err(Failure::Config("plot needs --trace and/or --sweep".into()));
    }
    // Parse everything before writing anything.
    let trace_rows = trace
        .as_deref()
        .map(|p| read_csv(read_file(p)?).map_err(Failure::from))
        .transpose()?;
    let sweep_rows = sweep_csv
        .as_deref()
        .map(|p| read_sweep_csv(read_file(p)?).map_err(Failure::from))
        .transpose()?;
    let root = out_dir(common, None)?;
    if let Some(rows) = trace_rows {
        let (cum, vol) = trace_figures(&rows);
        write(&root.join("cumulative_mistakes.svg"), cum.to_svg())?;
        write(&root.join("log_volume.svg"), vol.to_svg())?;
    }
    if let Some(rows) = sweep_rows {
        write(&root.join("mistakes_vs_sigma.svg"), sigma_figure(&rows).to_svg())?;
    }
    println!("wrote {}", root.display());
    Ok(())
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
    let res = match cli.cmd {
        Command::Run { config, trials, common } => cmd_run(config, trials, &common).map(|_| true),
        Command::Sweep { config, trials, common } => cmd_sweep(config, trials, &common).map(|_| true),
        Command::Verify {
            solver_gap,
            solver_tol,
            quick,
            common,
        } => cmd_verify(solver_gap, solver_tol, quick, &common),
        Command::Plot { trace, sweep, common } => cmd_plot(trace, sweep, &common).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            match e.round() {
                Some(t) => eprintln!("runtime error {} at round {t}: {e}", e.kind()),
                None => eprintln!("runtime error {}: {e}", e.kind()),
            }
            ExitCode::from(2)
        }
    }
}
