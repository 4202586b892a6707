use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use welrci::censoring::Preset;
use welrci::simlab::{parse_config, parse_methods, run_study, StudyConfig};
use welrci::{fit_interval, fit_npmle, parse_sample, CensoredSample, EmOptions, FitOptions, FitOutput, Scheme};

#[derive(Parser)]
#[command(
    name = "welrci",
    version,
    about = "Likelihood ratio confidence intervals for quantiles of censored data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct DataArgs {
    /// Censoring scheme: right, doubly, interval1, interval2, partly1, partlyGeneral, none.
    #[arg(long)]
    scheme: Scheme,
    /// CSV data file, or `-` for standard input.
    #[arg(long)]
    input: PathBuf,
    /// EM stopping tolerance on the sup change of the distribution function.
    #[arg(long, default_value_t = 1e-3)]
    em_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    em_max_iter: usize,
}

impl DataArgs {
    fn load(&self) -> Result<CensoredSample> {
        let mut text = String::new();
        if self.input.as_os_str() == "-" {
            io::stdin().read_to_string(&mut text)?;
        } else {
            File::open(&self.input)
                .and_then(|mut f| f.read_to_string(&mut text))
                .with_context(|| format!("reading {}", self.input.display()))?;
        }
        parse_sample(text.as_bytes(), self.scheme).with_context(|| format!("parsing {}", self.input.display()))
    }

    fn em(&self) -> EmOptions {
        EmOptions {
            tol: self.em_tol,
            max_iter: self.em_max_iter,
        }
    }
}

/// Expansion order; `None` means chosen from the scheme.
#[derive(Clone, Copy)]
struct Order(Option<usize>);

fn parse_order(s: &str) -> Result<Order, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Order(None));
    }
    match s.parse::<usize>() {
        Ok(k) if k <= 4 => Ok(Order(Some(k))),
        _ => Err(format!("expected `auto` or 0..4, got `{s}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Confidence interval for one quantile of a data set.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0.10)]
        alpha: f64,
        /// Expansion order, or `auto` to choose it from the scheme.
        #[arg(long, default_value = "auto", value_parser = parse_order)]
        k: Order,
        /// Use the step-function estimate instead of the smoothed one.
        #[arg(long)]
        no_smooth: bool,
        #[arg(long, default_value_t = 400)]
        boot_reps: usize,
        /// Step of the adaptive bootstrap size grid (interval-censored schemes).
        #[arg(long)]
        grid_step: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Monte Carlo coverage study from a preset name or a config file.
    Simulate {
        /// `table1`..`table5`, or a path to a `key = value` config file.
        #[arg(long)]
        preset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        boot_reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated, e.g. `2-WELRCI,WELRCI0,QBPCI`.
        #[arg(long)]
        methods: Option<String>,
        /// Comma-separated quantile levels.
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        grid_step: Option<usize>,
        /// Write the full report here: CSV rows for `.csv`, JSON otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the nonparametric MLE as `w,p` CSV.
    Npmle {
        #[command(flatten)]
        data: DataArgs,
    },
}

fn fit_csv(out: &FitOutput) -> String {
    let n_b = out.n_b.map(|b| b.to_string()).unwrap_or_default();
    format!(
        "q,alpha,k,c_n,rho_hat,theta_hat,x_l,x_u,n_b,feasible_lo,feasible_hi\n{},{},{},{},{},{},{},{},{},{},{}\n",
        out.q,
        out.alpha,
        out.k,
        out.c_n,
        out.rho_hat,
        out.theta_hat,
        out.x_l,
        out.x_u,
        n_b,
        out.feasible_range.0,
        out.feasible_range.1
    )
}

fn study_config(preset: &str) -> Result<StudyConfig> {
    if let Ok(p) = preset.parse::<Preset>() {
        return Ok(StudyConfig::from_preset(p));
    }
    let path = Path::new(preset);
    if !path.exists() {
        bail!("`{preset}` is neither a preset (table1..table5) nor an existing config file");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    match cli.command {
        Command::Fit {
            data,
            q,
            alpha,
            k,
            no_smooth,
            boot_reps,
            grid_step,
            seed,
            format,
        } => {
            let sample = data.load()?;
            let opts = FitOptions {
                k: k.0,
                smoothed: !no_smooth,
                boot_reps,
                grid_step,
                seed,
                em: data.em(),
                ..FitOptions::new(q, alpha)
            };
            let out = fit_interval(&sample, &opts)?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut stdout, &out)?;
                    writeln!(stdout)?;
                }
                Format::Csv => write!(stdout, "{}", fit_csv(&out))?,
            }
        }
        Command::Simulate {
            preset,
            n,
            reps,
            boot_reps,
            seed,
            methods,
            q,
            alpha,
            grid_step,
            out,
        } => {
            let mut config = study_config(&preset)?;
            if let Some(n) = n {
                config.n = n;
            }
            if let Some(reps) = reps {
                config.reps = reps;
            }
            if let Some(b) = boot_reps {
                config.boot_reps = b;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(list) = methods {
                config.methods = parse_methods(&list)?;
            }
            if let Some(list) = q {
                config.q = list
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .with_context(|| format!("bad quantile list `{list}`"))?;
            }
            if let Some(alpha) = alpha {
                config.alpha = alpha;
            }
            if grid_step.is_some() {
                config.grid_step = grid_step;
            }
            config.validate()?;
            let report = run_study(&config)?;
            write!(stdout, "{}", report.to_table())?;
            if let Some(path) = out {
                let file = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                    report.write_csv(file)?;
                } else {
                    report.write_json(file)?;
                }
            }
        }
        Command::Npmle { data } => {
            let sample = data.load()?;
            let (dist, _) = fit_npmle(&sample, data.em())?;
            dist.write_csv(&mut stdout)?;
        }
    }
    stdout.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
