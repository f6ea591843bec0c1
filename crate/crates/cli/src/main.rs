use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use pabo::engine::SimTime;
use pabo::scenario::{
    preset, run, sweep, write_run, write_sweep, Grid, Headline, Mode, ReportOptions,
    ScenarioConfig, PRESETS,
};
use pabo::topology::{build_fattree, build_tree};

#[derive(Parser)]
#[command(name = "pabo", version, about = "Packet-bounce data center network simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its metric files.
    Run {
        /// Scenario file, or the name of a built-in preset.
        config: String,
        #[arg(long, env = "PABO_OUT_DIR")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Mode>,
        /// Also write the per-frame event trace.
        #[arg(long)]
        trace: bool,
        /// Bin width of util_timeseries.csv in seconds.
        #[arg(long, default_value_t = 1e-4)]
        util_bin: f64,
    },
    /// Run a grid of theta, lambda and server-count values.
    Sweep {
        config: String,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        /// Many-to-one server counts (3, 6, 9, 12).
        #[arg(long, value_delimiter = ',')]
        servers: Vec<usize>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long, env = "PABO_OUT_DIR")]
        out: PathBuf,
        /// Worker threads; defaults to one per core.
        #[arg(long, env = "PABO_JOBS")]
        jobs: Option<usize>,
        /// Only write the aggregate, not every point's files.
        #[arg(long)]
        summary_only: bool,
    },
    /// Built-in scenarios.
    Presets {
        #[command(subcommand)]
        cmd: PresetCmd,
    },
    /// Check a scenario file and print its canonical hash.
    Validate { config: String },
    /// Write the node and edge lists of a topology.
    Topology {
        #[arg(value_parser = ["tree", "fattree"])]
        kind: String,
        #[arg(long, env = "PABO_OUT_DIR")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PresetCmd {
    List,
    /// Print a preset as a scenario file.
    Show { name: String },
}

fn load(config: &str) -> Result<ScenarioConfig> {
    let path = Path::new(config);
    if !path.exists() {
        if let Some(cfg) = preset(config) {
            return Ok(cfg);
        }
        bail!("{config}: no such file or preset (see `pabo presets list`)");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {config}"))?;
    ScenarioConfig::parse(&text).with_context(|| format!("{config}: invalid scenario"))
}

fn print_headline(h: &Headline) {
    println!("entropy          {:.6}", h.entropy);
    println!("util variance    {:.6e}", h.util_variance);
    println!("time ratio       {:.6}", h.time_ratio);
    println!(
        "drop rate        {:.4}% ({}/{})",
        100.0 * h.drop_rate.value,
        h.drop_rate.num,
        h.drop_rate.den
    );
    println!(
        "bounced          {:.4}% ({}/{})",
        100.0 * h.bounce_fraction.value,
        h.bounce_fraction.num,
        h.bounce_fraction.den
    );
    println!("mean total hop   {:.4}", h.mean_total_hop);
    if let Some(d) = h.mean_delay {
        println!("mean delay       {d:.6e} s");
    }
    if let Some(f) = h.mean_fct {
        println!("mean fct         {f:.6} s");
    }
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run {
            config,
            out,
            seed,
            mode,
            trace,
            util_bin,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(m) = mode {
                cfg.mode = m;
            }
            cfg.trace |= trace;
            if !(util_bin > 0.0) {
                bail!("--util-bin must be positive");
            }
            let result = run(&cfg).with_context(|| format!("{}: run failed", cfg.name))?;
            let opts = ReportOptions {
                util_bin: SimTime::from_secs_f64(util_bin),
            };
            let manifest = write_run(&result, &out, opts)?;
            println!("{} ({}, seed {})", manifest.name, manifest.mode, manifest.seed);
            println!("config hash      {}", manifest.config_hash);
            print_headline(&manifest.headline);
            println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
        }
        Cmd::Sweep {
            config,
            theta,
            lambda,
            servers,
            mode,
            out,
            jobs,
            summary_only,
        } => {
            let mut cfg = load(&config)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            let grid = Grid {
                theta,
                lambda,
                servers,
            };
            let point_dir = (!summary_only).then_some(out.as_path());
            let go = || sweep(&cfg, &grid, point_dir, ReportOptions::default());
            let outcome = match worker_pool(jobs)? {
                Some(pool) => pool.install(go),
                None => go(),
            };
            write_sweep(&outcome, &out)?;
            println!(
                "{} points, {} failed; aggregate in {}",
                outcome.rows.len() + outcome.failures.len(),
                outcome.failures.len(),
                out.join("sweep.csv").display()
            );
            for f in &outcome.failures {
                eprintln!("point {}: {}", f.point.label(), f.error);
            }
        }
        Cmd::Presets { cmd } => match cmd {
            PresetCmd::List => {
                for (name, desc) in PRESETS {
                    println!("{name:<14} {desc}");
                }
            }
            PresetCmd::Show { name } => {
                let cfg = preset(&name).with_context(|| format!("unknown preset {name}"))?;
                print!("{}", cfg.render()?);
            }
        },
        Cmd::Validate { config } => {
            let cfg = load(&config)?;
            println!("ok {} {}", cfg.name, cfg.hash()?);
        }
        Cmd::Topology { kind, out } => {
            let net = if kind == "tree" {
                build_tree()
            } else {
                build_fattree()
            };
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for (file, body) in [("nodes.csv", net.nodes_csv()), ("edges.csv", net.edges_csv())] {
                let path = out.join(file);
                std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {} nodes to {}", net.nodes.len(), out.display());
        }
    }
    Ok(())
}

fn worker_pool(jobs: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    let Some(n) = jobs else {
        return Ok(None);
    };
    if n == 0 {
        bail!("--jobs must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .context("starting worker threads")?;
    Ok(Some(pool))
}
