use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use thickwalk::campaign::{self, CampaignConfig, CONFIG_FILE};
use thickwalk::Error;

#[derive(Parser)]
#[command(name = "thickwalk", version, about = "Thick random walks by reflection moves")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "THICKWALK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Grid {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated edge counts.
    #[arg(long)]
    lengths: Option<String>,
    /// Comma-separated tube radii.
    #[arg(long)]
    radii: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample walks for every (length, radius) cell.
    Generate {
        #[command(flatten)]
        grid: Grid,
        /// Samples per cell.
        #[arg(long)]
        samples: Option<usize>,
        /// Closures per walk recorded for later knot analysis.
        #[arg(long)]
        closures: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observables per cell and scaling exponents per radius.
    Analyze {
        /// Directory written by `generate`.
        dir: PathBuf,
        /// Output directory (default: the sample directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Knot type per walk and knot probability per cell.
    Knots {
        dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        closures: Option<usize>,
        /// Only these lengths (comma-separated).
        #[arg(long)]
        lengths: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert binary samples to text walks.
    Export {
        /// Sample directory or a single `.bin` file.
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Acceptance rates over a grid (the default grid unless overridden).
    Table1 {
        #[command(flatten)]
        grid: Grid,
        /// Proposals per cell after burn-in.
        #[arg(long)]
        proposals: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure before any work starts (exit 1) or while running (exit 2).
enum Failure {
    Usage(Error),
    Runtime(Error),
}

fn usage<T>(r: thickwalk::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn runtime<T>(r: thickwalk::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

fn load_config(path: Option<&Path>) -> thickwalk::Result<CampaignConfig> {
    match path {
        Some(p) => CampaignConfig::from_file(p),
        None => Ok(CampaignConfig::default_grid()),
    }
}

fn apply_grid(c: &mut CampaignConfig, g: &Grid) -> thickwalk::Result<()> {
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(l) = &g.lengths {
        c.set("lengths", l)?;
    }
    if let Some(r) = &g.radii {
        c.set("radii", r)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = cli.threads;
    match cli.command {
        Command::Generate {
            grid,
            samples,
            closures,
            out,
        } => {
            let mut c = usage(load_config(grid.config.as_deref()))?;
            usage(apply_grid(&mut c, &grid))?;
            if let Some(s) = samples {
                c.samples_per_cell = s;
            }
            if let Some(k) = closures {
                c.knot_closures = k;
            }
            if let Some(o) = out {
                c.output_dir = o;
            }
            usage(c.validate())?;
            let s = runtime(campaign::generate(&c, threads))?;
            println!(
                "generated {} chains into {} in {:.1} s",
                s.chains.len(),
                c.output_dir.display(),
                s.wall_clock_seconds
            );
        }
        Command::Analyze { dir, out } => {
            let out = out.unwrap_or_else(|| dir.clone());
            let s = runtime(campaign::analyze(&dir, &out, threads))?;
            if s.corrupt_frames > 0 {
                eprintln!("warning: skipped {} corrupt frames", s.corrupt_frames);
            }
            println!("r,nu,nu_stderr,alpha,alpha_stderr");
            for e in &s.exponents {
                println!(
                    "{},{:.4},{:.4},{:.4},{:.4}",
                    e.r, e.nu, e.nu_stderr, e.alpha, e.alpha_stderr
                );
            }
        }
        Command::Knots {
            dir,
            config,
            seed,
            closures,
            lengths,
            out,
        } => {
            // Settings default to the campaign's own configuration when present.
            let stored = dir.join(CONFIG_FILE);
            let path = config.or_else(|| stored.exists().then_some(stored));
            let mut c = usage(load_config(path.as_deref()))?;
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(k) = closures {
                c.knot_closures = k;
            }
            if let Some(l) = &lengths {
                usage(c.set("knot_lengths", l))?;
            }
            usage(c.validate())?;
            let only = (!c.knot_lengths.is_empty()).then(|| c.knot_lengths.clone());
            let out = out.unwrap_or_else(|| dir.clone());
            let s = runtime(campaign::knots(
                &dir,
                &out,
                c.knot_closures,
                c.seed,
                only.as_deref(),
                threads,
            ))?;
            if s.corrupt_frames > 0 {
                eprintln!("warning: skipped {} corrupt frames", s.corrupt_frames);
            }
            println!("n,r,walks,knotted,p_knot,ci_low,ci_high");
            for k in &s.cells {
                println!(
                    "{},{},{},{},{:.4},{:.4},{:.4}",
                    k.n,
                    k.r,
                    k.walks,
                    k.knotted,
                    k.p_knot(),
                    k.ci_low,
                    k.ci_high
                );
            }
        }
        Command::Export { input, out } => {
            let (walks, corrupt) = runtime(campaign::export_text(&input, &out))?;
            if corrupt > 0 {
                eprintln!("warning: skipped {corrupt} corrupt frames");
            }
            println!("exported {walks} walks to {}", out.display());
        }
        Command::Table1 { grid, proposals, out } => {
            let mut c = usage(load_config(grid.config.as_deref()))?;
            usage(apply_grid(&mut c, &grid))?;
            if let Some(p) = proposals {
                c.acceptance_proposals = p;
            }
            if let Some(o) = out {
                c.output_dir = o;
            }
            usage(c.validate())?;
            let s = runtime(campaign::table1(&c, &c.output_dir, threads))?;
            println!("n,r,acceptance_percent");
            for cell in &s.cells {
                println!("{},{},{:.2}", cell.n, cell.r, cell.percent());
            }
            for (r, f) in &s.alpha {
                println!("alpha r={r}: {:.4} +/- {:.4}", f.exponent, f.exponent_stderr);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
