//! Command-line front end.
//!
//! Every command resolves its arguments (defaults included) into a
//! [`RunConfig`], runs the matching library routine and emits a [`Report`]
//! whose first record echoes that configuration. Output goes to `--output`,
//! else to `$LARGESIEVE_OUT_DIR/<command>.<format>` when that variable is set,
//! else to standard output.
//!
//! Exit codes: 0 success, 2 unparseable arguments, 3 parameters rejected by
//! the numerical routines, 4 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{
    default_grid, er_sweep, fourth_moment_ensemble, lemma_check, theorem_monte_carlo, LemmaParams,
    QRule, TrialConfig,
};
use crate::coeffs::{EnsembleKind, EnsembleSpec};
use crate::error::Error;
use crate::expsum::{eval_farey_all, spectrum};
use crate::farey::farey_fractions;
use crate::report::{Format, Record, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LARGESIEVE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "largesieve",
    version,
    about = "Exponential sums at Farey fractions and large-sieve lower-bound experiments",
    after_help = "Defaults: --grid is max(4096, next power of two >= 8N); --a is 4; --seed is 0.\n\
                  Output goes to --output, else $LARGESIEVE_OUT_DIR/<command>.<format>, else stdout."
)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for trial loops; 0 picks automatically.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Master seed for random coefficient vectors.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Rademacher,
    Steinhaus,
}

impl EnsembleArg {
    fn kind(self) -> EnsembleKind {
        match self {
            EnsembleArg::Rademacher => EnsembleKind::Rademacher,
            EnsembleArg::Steinhaus => EnsembleKind::Steinhaus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QRuleArg {
    /// Q = ceil(c·sqrt(N))
    Sqrt,
    /// Q = ceil(c·sqrt(N)·ln N)
    SqrtLog,
    /// Q given by --q
    Fixed,
}

#[derive(Debug, Args)]
struct EnsembleOpt {
    /// Coefficient law.
    #[arg(long, value_enum, default_value_t = EnsembleArg::Rademacher)]
    ensemble: EnsembleArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fourth moment of random sums against 2N² − N.
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        ens: EnsembleOpt,
    },
    /// List the Farey fractions of order Q.
    Farey {
        #[arg(long)]
        q: u64,
    },
    /// Both sides of the lower-bound inequality for one random vector.
    Lemma {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 4.0)]
        a: f64,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        ens: EnsembleOpt,
    },
    /// Frequency of Σ|S(a/q)|² ≥ εQ²Σ|aₙ|² over random vectors.
    Theorem {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        ens: EnsembleOpt,
    },
    /// Ratio Σ|S(a/q)|² / (N·Σ|aₙ|²) across N with Q tied to N.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = QRuleArg::SqrtLog)]
        q_rule: QRuleArg,
        /// Multiplier c for the sqrt and sqrt-log rules.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Q for the fixed rule.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        ens: EnsembleOpt,
    },
    /// Samples of |S(j/L)|² for one random vector.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        ens: EnsembleOpt,
    },
    /// Classical bound Σ|S(a/q)|² ≤ (N + Q²)Σ|aₙ|² over random vectors.
    Upper {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        ens: EnsembleOpt,
    },
}

/// A command with every parameter resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    Moments { n: usize, trials: usize, ensemble: EnsembleArg },
    Farey { q: u64 },
    Lemma { n: usize, q: u64, a: f64, grid: usize, ensemble: EnsembleArg },
    Theorem { n: usize, q: u64, eps: f64, trials: usize, ensemble: EnsembleArg },
    Sweep { n_list: Vec<usize>, q_rule: QRuleArg, c: f64, q: Option<u64>, trials: usize, ensemble: EnsembleArg },
    Spectrum { n: usize, grid: usize, ensemble: EnsembleArg },
    Upper { n: usize, q: u64, trials: usize, ensemble: EnsembleArg },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Moments { .. } => "moments",
            CommandConfig::Farey { .. } => "farey",
            CommandConfig::Lemma { .. } => "lemma",
            CommandConfig::Theorem { .. } => "theorem",
            CommandConfig::Sweep { .. } => "sweep",
            CommandConfig::Spectrum { .. } => "spectrum",
            CommandConfig::Upper { .. } => "upper",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub seed: u64,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Self {
        let command = match cli.command {
            Command::Moments { n, trials, ens } => CommandConfig::Moments { n, trials, ensemble: ens.ensemble },
            Command::Farey { q } => CommandConfig::Farey { q },
            Command::Lemma { n, q, a, grid, ens } => {
                CommandConfig::Lemma { n, q, a, grid: grid.unwrap_or_else(|| default_grid(n)), ensemble: ens.ensemble }
            }
            Command::Theorem { n, q, eps, trials, ens } => {
                CommandConfig::Theorem { n, q, eps, trials, ensemble: ens.ensemble }
            }
            Command::Sweep { n_list, q_rule, c, q, trials, ens } => {
                CommandConfig::Sweep { n_list, q_rule, c, q, trials, ensemble: ens.ensemble }
            }
            Command::Spectrum { n, grid, ens } => {
                CommandConfig::Spectrum { n, grid: grid.unwrap_or_else(|| default_grid(n)), ensemble: ens.ensemble }
            }
            Command::Upper { n, q, trials, ens } => CommandConfig::Upper { n, q, trials, ensemble: ens.ensemble },
        };
        let format = match cli.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
        Self { command, format, output: cli.output, threads: cli.threads, seed: cli.seed }
    }

    /// The configuration header: everything needed to reproduce the run.
    pub fn record(&self) -> Record {
        let ens = |e: &EnsembleArg| e.kind().name();
        let base = Record::new().with("command", self.command.name());
        let r = match &self.command {
            CommandConfig::Moments { n, trials, ensemble } => {
                base.with("n", *n).with("trials", *trials).with("ensemble", ens(ensemble))
            }
            CommandConfig::Farey { q } => base.with("q", *q),
            CommandConfig::Lemma { n, q, a, grid, ensemble } => base
                .with("n", *n)
                .with("q", *q)
                .with("a", *a)
                .with("grid", *grid)
                .with("ensemble", ens(ensemble)),
            CommandConfig::Theorem { n, q, eps, trials, ensemble } => base
                .with("n", *n)
                .with("q", *q)
                .with("eps", *eps)
                .with("trials", *trials)
                .with("ensemble", ens(ensemble)),
            CommandConfig::Sweep { n_list, q_rule, c, q, trials, ensemble } => base
                .with("n_list", n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "))
                .with("q_rule", q_rule.to_possible_value().expect("no skipped variants").get_name())
                .with("c", *c)
                .with("q", q.map(|q| q.to_string()).unwrap_or_default())
                .with("trials", *trials)
                .with("ensemble", ens(ensemble)),
            CommandConfig::Spectrum { n, grid, ensemble } => {
                base.with("n", *n).with("grid", *grid).with("ensemble", ens(ensemble))
            }
            CommandConfig::Upper { n, q, trials, ensemble } => {
                base.with("n", *n).with("q", *q).with("trials", *trials).with("ensemble", ens(ensemble))
            }
        };
        r.with("seed", self.seed).with("threads", self.threads).with("format", self.format.name())
    }
}

/// Runs the library routine for `cfg` and assembles its report.
pub fn execute(cfg: &RunConfig) -> Result<Report, Error> {
    let seed = cfg.seed;
    let (rows, summary) = match &cfg.command {
        CommandConfig::Moments { n, trials, ensemble } => {
            let r = fourth_moment_ensemble(*n, *trials, seed, &ensemble.kind())?;
            let rows = r
                .values
                .iter()
                .enumerate()
                .map(|(t, m)| Record::new().with("trial", t).with("fourth_moment", *m))
                .collect();
            let summary = Record::new()
                .with("mean", r.mean)
                .with("std_error", r.std_error)
                .with("expected", r.expected)
                .with("z_score", (r.mean - r.expected) / r.std_error);
            (rows, Some(summary))
        }
        CommandConfig::Farey { q } => {
            let fracs = farey_fractions(*q)?;
            let rows = fracs
                .iter()
                .map(|f| {
                    Record::new()
                        .with("a", f.numerator())
                        .with("q", f.denominator())
                        .with("value", f.value())
                })
                .collect();
            (rows, Some(Record::new().with("count", fracs.len())))
        }
        CommandConfig::Lemma { n, q, a, grid, ensemble } => {
            let v = EnsembleSpec::new(ensemble.kind(), *n, seed).draw(0)?;
            let params = LemmaParams { n: *n, q_max: *q, a_param: *a, grid_size: *grid };
            let r = lemma_check(&v, &params)?;
            let row = Record::new()
                .with("n", *n)
                .with("q", *q)
                .with("a", *a)
                .with("delta", r.delta)
                .with("delta_small", r.delta_small)
                .with("lhs", r.lhs)
                .with("m_lower", r.m_lower)
                .with("m_upper", r.m_upper)
                .with("rhs_conservative", r.rhs_conservative)
                .with("slack", r.slack)
                .with("holds", r.holds);
            (vec![row], None)
        }
        CommandConfig::Theorem { n, q, eps, trials, ensemble } => {
            let tc = TrialConfig {
                n: *n,
                q_max: *q,
                epsilon: *eps,
                trials: *trials,
                seed,
                ensemble: ensemble.kind(),
            };
            let r = theorem_monte_carlo(&tc)?;
            let rows = r
                .records
                .iter()
                .map(|t| {
                    Record::new()
                        .with("trial", t.trial)
                        .with("lhs", t.lhs)
                        .with("threshold", t.threshold)
                        .with("success", t.success)
                })
                .collect();
            let summary = Record::new().with("successes", r.successes).with("success_fraction", r.success_fraction);
            (rows, Some(summary))
        }
        CommandConfig::Sweep { n_list, q_rule, c, q, trials, ensemble } => {
            let rule = match q_rule {
                QRuleArg::Sqrt => QRule::Sqrt(*c),
                QRuleArg::SqrtLog => QRule::SqrtLog(*c),
                QRuleArg::Fixed => QRule::Fixed(q.ok_or_else(|| Error::param("--q-rule fixed needs --q"))?),
            };
            if !(*c > 0.0) {
                return Err(Error::param("--c must be positive"));
            }
            if n_list.is_empty() {
                return Err(Error::param("--n-list is empty"));
            }
            let r = er_sweep(n_list, rule, *trials, seed, &ensemble.kind())?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    Record::new()
                        .with("n", row.n)
                        .with("q", row.q_max)
                        .with("trials", row.trials)
                        .with("mean_ratio", row.mean_ratio)
                        .with("min_ratio", row.min_ratio)
                        .with("max_ratio", row.max_ratio)
                })
                .collect();
            (rows, None)
        }
        CommandConfig::Spectrum { n, grid, ensemble } => {
            let v = EnsembleSpec::new(ensemble.kind(), *n, seed).draw(0)?;
            let sg = spectrum(&v, *grid)?;
            let len = sg.grid_size() as f64;
            let rows = sg
                .values()
                .iter()
                .enumerate()
                .map(|(j, x)| Record::new().with("j", j).with("u", j as f64 / len).with("value", *x))
                .collect();
            let summary = Record::new().with("mean", sg.mean()).with("norm_sq", v.norm_sq());
            (rows, Some(summary))
        }
        CommandConfig::Upper { n, q, trials, ensemble } => {
            if *trials == 0 {
                return Err(Error::param("at least one trial is required"));
            }
            let spec = EnsembleSpec::new(ensemble.kind(), *n, seed);
            let mut rows = Vec::with_capacity(*trials);
            let mut all_hold = true;
            for t in 0..*trials {
                let v = spec.draw(t as u64)?;
                let lhs = eval_farey_all(&v, *q)?.sieve_lhs();
                let bound = (*n as f64 + (*q * *q) as f64) * v.norm_sq();
                let holds = lhs <= bound * (1.0 + 1e-9);
                all_hold &= holds;
                rows.push(
                    Record::new()
                        .with("trial", t)
                        .with("lhs", lhs)
                        .with("bound", bound)
                        .with("ratio", lhs / bound)
                        .with("holds", holds),
                );
            }
            (rows, Some(Record::new().with("all_hold", all_hold)))
        }
    };
    Ok(Report { config: cfg.record(), rows, summary })
}

fn first_line(s: &str) -> &str {
    s.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim()
}

/// Parses `args` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = stdout.write_all(text.as_bytes());
                return EXIT_OK;
            }
            let _ = writeln!(stderr, "largesieve: {}", first_line(&text));
            return EXIT_USAGE;
        }
    };
    let cfg = RunConfig::from_cli(cli);

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "largesieve: error: cannot start worker threads: {e}");
            return EXIT_NUMERIC;
        }
    };
    let report = match pool.install(|| execute(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "largesieve: error: {e}");
            return EXIT_NUMERIC;
        }
    };

    let mut buf = Vec::new();
    report.write(cfg.format, &mut buf).expect("writing to memory");
    let target = cfg.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", cfg.command.name(), cfg.format.name())))
    });
    let written = match &target {
        Some(path) => fs::write(path, &buf).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(&buf).and_then(|_| stdout.flush()).map_err(|e| format!("cannot write output: {e}")),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(msg) => {
            let _ = writeln!(stderr, "largesieve: error: {msg}");
            EXIT_IO
        }
    }
}
