//! Command-line front end. `run` is the whole program minus process exit, so
//! tests can drive it with in-memory streams.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage error,
//! 3 an enumeration cap was exceeded.

use std::io::Write;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::coeff::{self, CoeffTable, CoeffView};
use crate::error::Error;
use crate::graph;
use crate::orbit::{self, Caps, DEFAULT_MAX_STATES, DEFAULT_MAX_VISITED};
use crate::system::{DucciSystem, ResidueTuple};
use crate::theorems::{self, CheckFamily, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ducci", version, about = "Ducci dynamics on Z_m^n")]
struct Cli {
    /// Write output to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct SystemArgs {
    /// Modulus m (use with --n).
    #[arg(long)]
    m: Option<u64>,
    /// Tuple length n (use with --m).
    #[arg(long)]
    n: Option<usize>,
    /// Shorthand: n = 2^k (use with --l).
    #[arg(long)]
    k: Option<u32>,
    /// Shorthand: m = 2^l (use with --k).
    #[arg(long)]
    l: Option<u32>,
}

impl SystemArgs {
    fn resolve(&self) -> Result<DucciSystem, CliError> {
        match (self.m, self.n, self.k, self.l) {
            (Some(m), Some(n), None, None) => Ok(DucciSystem::new(m, n)?),
            (None, None, Some(k), Some(l)) => Ok(DucciSystem::pow2(k, l)?),
            _ => Err(CliError::Usage(
                "give exactly one of --m/--n or --k/--l".into(),
            )),
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct CapArgs {
    /// Largest m^n enumerated by kernel, graph and structure checks.
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: u64,
    /// Most states visited while following one orbit.
    #[arg(long, default_value_t = DEFAULT_MAX_VISITED)]
    max_visited: u64,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps {
            max_visited: self.max_visited,
            max_states: self.max_states,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Jsonl,
    Csv,
    Dot,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum StepOp {
    /// D^r(u) by repeated stepping
    Ducci,
    /// D^r(u) through the coefficient expansion
    Expand,
    /// H^r(u), the cyclic left shift
    Shift,
    /// u + v
    Add,
    /// lambda * u
    Scale,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply D, H, or the group operations to a tuple.
    Step {
        #[command(flatten)]
        system: SystemArgs,
        /// Tuple such as "(3,1,3)"; entries are reduced mod m.
        #[arg(long)]
        tuple: String,
        #[arg(long, value_enum, default_value_t = StepOp::Ducci)]
        op: StepOp,
        /// Number of applications for ducci/expand/shift.
        #[arg(long, default_value_t = 1)]
        times: u64,
        /// Second operand for --op add.
        #[arg(long)]
        other: Option<String>,
        /// Scalar for --op scale.
        #[arg(long)]
        scalar: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Len, Per, tail and cycle of one Ducci sequence.
    Orbit {
        #[command(flatten)]
        system: SystemArgs,
        /// Tuple such as "(3,1,3)"; entries are reduced mod m.
        #[arg(long)]
        tuple: String,
        /// Constant-memory cycle finding; reports only len and per.
        #[arg(long)]
        brent: bool,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// L_m(n) and P_m(n), the length and period of (0,...,0,1).
    Basic {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// All predecessors of a tuple.
    Preds {
        #[command(flatten)]
        system: SystemArgs,
        /// Tuple such as "(3,1,3)"; entries are reduced mod m.
        #[arg(long)]
        tuple: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// The cycle subgroup K(Z_m^n).
    Kernel {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// The coefficient table a_{r,s} mod m, one cell, or an f/g/h view.
    Coeff {
        #[command(flatten)]
        system: SystemArgs,
        /// Highest row to print.
        #[arg(long, default_value_t = 0)]
        rows: usize,
        /// Single cell "r,s" (s is normalized cyclically).
        #[arg(long, value_name = "R,S")]
        at: Option<String>,
        /// View cell, e.g. "f:1,1", "g:2,2,1" or "h:3,1" (needs n = 2^k).
        #[arg(long)]
        view: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// C(N, K) mod 2^l.
    Binom {
        #[arg(value_name = "N")]
        big_n: u64,
        #[arg(value_name = "K")]
        big_k: u64,
        /// Exponent l of the modulus 2^l.
        #[arg(long = "exp", value_name = "L")]
        exp: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// The transition graph u -> D(u), or the component of one tuple.
    Graph {
        #[command(flatten)]
        system: SystemArgs,
        /// Restrict to the weak component containing this tuple.
        #[arg(long)]
        tuple: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Run theorem checks and print one JSON report per parameter point.
    Verify {
        /// Check family, or "all".
        #[arg(default_value = "all")]
        check: String,
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        #[arg(long, default_value_t = 6)]
        l_max: u32,
        #[arg(long, default_value_t = 16)]
        j_max: u32,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include elapsed_ms in each report (output is then not byte-stable).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `argv` (including the program name), runs the command, and returns
/// the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let rendered = e.to_string();
            // Keep the message block; the usage synopsis is printed below.
            for line in rendered.lines().take_while(|l| !l.is_empty()) {
                let _ = writeln!(err, "{line}");
            }
            let _ = writeln!(err, "{}", Cli::command().render_usage());
            return EXIT_USAGE;
        }
    };

    let mut buffer: Vec<u8> = Vec::new();
    let result = execute(&cli.command, &mut buffer, err);
    let code = match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => usage_error(err, &msg),
        Err(CliError::Domain(e @ Error::CapExceeded { .. })) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CAP
        }
        Err(CliError::Domain(e)) => usage_error(err, &e.to_string()),
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &buffer),
        None => out.write_all(&buffer),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    code
}

fn usage_error(err: &mut dyn Write, msg: &str) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    let _ = writeln!(err, "{}", Cli::command().render_usage());
    EXIT_USAGE
}

fn require_format(format: Format, allowed: &[Format], command: &str) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        let names: Vec<String> = allowed
            .iter()
            .map(|f| format!("{f:?}").to_lowercase())
            .collect();
        Err(CliError::Usage(format!(
            "`{command}` supports --format {}",
            names.join("|")
        )))
    }
}

fn parse_tuple(sys: &DucciSystem, text: &str, err: &mut dyn Write) -> Result<ResidueTuple, CliError> {
    let (u, reduced) = sys.parse_tuple(text)?;
    if reduced {
        let _ = writeln!(err, "warning: {text} reduced mod {} to {u}", sys.modulus());
    }
    Ok(u)
}

fn tuple_list_text(tuples: &[ResidueTuple]) -> String {
    tuples
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_ints(text: &str, expected: usize, what: &str) -> Result<Vec<i64>, CliError> {
    let values = text
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("{what} {text:?}: {e}")))?;
    if values.len() != expected {
        return Err(CliError::Usage(format!(
            "{what} {text:?}: expected {expected} comma-separated integers"
        )));
    }
    Ok(values)
}

fn parse_view(text: &str) -> Result<CoeffView, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("view {text:?}: expected kind:params")))?;
    match kind.trim() {
        "f" => {
            let p = parse_ints(rest, 2, "view")?;
            Ok(CoeffView::F { gamma: p[0], delta: p[1] })
        }
        "g" => {
            let p = parse_ints(rest, 3, "view")?;
            Ok(CoeffView::G {
                gamma: p[0],
                epsilon: p[1],
                delta: p[2],
            })
        }
        "h" => {
            let p = parse_ints(rest, 2, "view")?;
            Ok(CoeffView::H { gamma: p[0], delta: p[1] })
        }
        other => Err(CliError::Usage(format!("unknown view kind {other:?}"))),
    }
}

fn execute(command: &Command, out: &mut Vec<u8>, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Step {
            system,
            tuple,
            op,
            times,
            other,
            scalar,
            format,
        } => {
            require_format(*format, &[Format::Text, Format::Json], "step")?;
            let sys = system.resolve()?;
            let u = parse_tuple(&sys, tuple, err)?;
            let result = match op {
                StepOp::Ducci => sys.iterate(&u, *times)?,
                StepOp::Expand => {
                    let r = usize::try_from(*times)
                        .map_err(|_| CliError::Usage("--times too large".into()))?;
                    coeff::apply_coeff_expansion(&sys, &u, r)?
                }
                StepOp::Shift => {
                    let mut v = u.clone();
                    for _ in 0..(*times % sys.len() as u64) {
                        v = sys.shift(&v)?;
                    }
                    v
                }
                StepOp::Add => {
                    let other = other
                        .as_deref()
                        .ok_or_else(|| CliError::Usage("--op add needs --other".into()))?;
                    let v = parse_tuple(&sys, other, err)?;
                    sys.add(&u, &v)?
                }
                StepOp::Scale => {
                    let lambda =
                        scalar.ok_or_else(|| CliError::Usage("--op scale needs --scalar".into()))?;
                    sys.scale(lambda, &u)?
                }
            };
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&result).unwrap())?,
                _ => writeln!(out, "{result}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Orbit {
            system,
            tuple,
            brent,
            caps,
            format,
        } => {
            require_format(*format, &[Format::Json, Format::Text], "orbit")?;
            let sys = system.resolve()?;
            let u = parse_tuple(&sys, tuple, err)?;
            if *brent {
                let (len, per) = orbit::len_per_brent(&sys, &u, caps.max_visited)?;
                match format {
                    Format::Json => writeln!(out, "{}", json!({ "len": len, "per": per }))?,
                    _ => writeln!(out, "len={len} per={per}")?,
                }
                return Ok(EXIT_OK);
            }
            let summary = orbit::orbit_summary_capped(&sys, &u, caps.max_visited)?;
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&summary).unwrap())?,
                _ => {
                    writeln!(out, "len={} per={}", summary.len, summary.per)?;
                    writeln!(out, "tail: {}", tuple_list_text(&summary.tail))?;
                    writeln!(out, "cycle: {}", tuple_list_text(&summary.cycle))?;
                    writeln!(out, "vanishes: {}", summary.vanishes())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Basic {
            system,
            caps,
            format,
        } => {
            require_format(*format, &[Format::Json, Format::Text], "basic")?;
            let sys = system.resolve()?;
            let summary = orbit::orbit_summary_capped(&sys, &sys.basic_tuple(), caps.max_visited)?;
            match format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({ "m": sys.modulus(), "n": sys.len(), "len": summary.len, "per": summary.per })
                )?,
                _ => writeln!(
                    out,
                    "L_{m}({n})={} P_{m}({n})={}",
                    summary.len,
                    summary.per,
                    m = sys.modulus(),
                    n = sys.len()
                )?,
            }
            Ok(EXIT_OK)
        }
        Command::Preds {
            system,
            tuple,
            format,
        } => {
            require_format(*format, &[Format::Json, Format::Text], "preds")?;
            let sys = system.resolve()?;
            let u = parse_tuple(&sys, tuple, err)?;
            let preds = orbit::predecessors(&sys, &u)?;
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&preds).unwrap())?,
                _ => {
                    for p in &preds {
                        writeln!(out, "{p}")?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Kernel {
            system,
            caps,
            format,
        } => {
            require_format(*format, &[Format::Json, Format::Text], "kernel")?;
            let sys = system.resolve()?;
            let kernel = orbit::kernel_set_capped(&sys, caps.max_states)?;
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&kernel).unwrap())?,
                _ => {
                    writeln!(out, "order={}", kernel.order())?;
                    for u in kernel.members() {
                        writeln!(out, "{u}")?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Coeff {
            system,
            rows,
            at,
            view,
            format,
        } => {
            let sys = system.resolve()?;
            let mut table = CoeffTable::new(sys);
            let single = match (at, view) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("give at most one of --at and --view".into()))
                }
                (Some(at), None) => {
                    let p = parse_ints(at, 2, "--at")?;
                    let r = usize::try_from(p[0])
                        .map_err(|_| CliError::Usage("row must be non-negative".into()))?;
                    Some((r, p[1], table.get(r, p[1])?))
                }
                (None, Some(view)) => {
                    let view = parse_view(view)?;
                    let (r, s) = view.cell(&sys)?;
                    Some((r, s, table.get(r, s)?))
                }
                (None, None) => None,
            };
            if let Some((r, s, value)) = single {
                require_format(*format, &[Format::Csv, Format::Json, Format::Text], "coeff")?;
                let s = coeff::normalize_column(sys.len(), s);
                match format {
                    Format::Json => writeln!(out, "{}", json!({ "r": r, "s": s, "value": value }))?,
                    Format::Csv => write!(out, "r,s,value\n{r},{s},{value}\n")?,
                    _ => writeln!(out, "{value}")?,
                }
                return Ok(EXIT_OK);
            }
            require_format(*format, &[Format::Csv, Format::Json, Format::Text], "coeff")?;
            table.extend_to(*rows)?;
            match format {
                Format::Csv => write!(out, "{}", table.to_csv())?,
                Format::Json => writeln!(out, "{}", serde_json::to_string(table.rows()).unwrap())?,
                _ => {
                    for (r, row) in table.rows().iter().enumerate() {
                        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                        writeln!(out, "{r}: {}", cells.join(" "))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Binom {
            big_n,
            big_k,
            exp,
            format,
        } => {
            require_format(*format, &[Format::Text, Format::Json], "binom")?;
            let value = coeff::binom_mod_pow2(*big_n, *big_k, *exp)?;
            match format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({ "n": big_n, "k": big_k, "l": exp, "value": value })
                )?,
                _ => writeln!(out, "{value}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Graph {
            system,
            tuple,
            caps,
            format,
        } => {
            require_format(*format, &[Format::Dot, Format::Csv, Format::Json], "graph")?;
            let sys = system.resolve()?;
            let full = graph::build_graph_capped(&sys, caps.max_states)?;
            let g = match tuple {
                Some(t) => full.component_of(&parse_tuple(&sys, t, err)?)?,
                None => full,
            };
            match format {
                Format::Dot => write!(out, "{}", g.to_dot())?,
                Format::Csv => write!(out, "{}", g.to_edge_csv())?,
                _ => {
                    let edges: Vec<_> = g.edges().collect();
                    let value = json!({
                        "nodes": g.nodes(),
                        "edges": edges,
                        "indegree": g.indegrees(),
                        "components": g.component_count(),
                    });
                    writeln!(out, "{value}")?
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            check,
            k_max,
            l_max,
            j_max,
            n_max,
            samples,
            seed,
            timing,
            caps,
            format,
        } => {
            require_format(*format, &[Format::Jsonl, Format::Json, Format::Text], "verify")?;
            let families: Vec<CheckFamily> = if check == "all" {
                CheckFamily::ALL.to_vec()
            } else {
                let f = CheckFamily::from_name(check).ok_or_else(|| {
                    let names: Vec<&str> = CheckFamily::ALL.iter().map(|f| f.name()).collect();
                    CliError::Usage(format!(
                        "unknown check {check:?}; expected all|{}",
                        names.join("|")
                    ))
                })?;
                vec![f]
            };
            let cfg = SuiteConfig {
                k_max: *k_max,
                l_max: *l_max,
                j_max: *j_max,
                n_max: *n_max,
                samples: *samples,
                seed: *seed,
                caps: caps.caps(),
                ..SuiteConfig::default()
            };
            let reports = theorems::run_suite(&cfg, &families);
            let summary = theorems::summary_table(&reports, *timing);
            match format {
                Format::Text => write!(out, "{summary}")?,
                _ => {
                    for r in &reports {
                        writeln!(out, "{}", r.to_json_line(*timing))?;
                    }
                    let _ = write!(err, "{}", theorems::summary_table(&reports, true));
                }
            }
            Ok(theorems::exit_code(&reports))
        }
    }
}
