use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gm_surrogate::cli::{
    cmd_bound, cmd_match, cmd_oracle, cmd_polytope, cmd_verify, exit_code_for, read_graph, MatchOptions, VerifyProblem,
    EXIT_OK,
};
use gm_surrogate::rational::parse_rational;
use gm_surrogate::{Error, Rational, Result, SeparableQuadratic, SolverOptions, SubdivisionRule};

/// Exact graph matching through a non-degenerate convex surrogate.
#[derive(Debug, Parser)]
#[command(name = "gm-surrogate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find a relabeling of G1 minimizing the edge disagreement with G2.
    Match {
        g1: PathBuf,
        g2: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long, value_name = "N")]
        max_iterations: Option<usize>,
        /// Perturbation to use instead of the certified one.
        #[arg(long, value_name = "P/Q", value_parser = rational_arg)]
        t: Option<Rational>,
        #[arg(long, value_enum, default_value_t = Rule::Omega)]
        subdivision: Rule,
    },
    /// Print the certified perturbation for a pair without solving.
    Bound {
        g1: PathBuf,
        g2: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive search over all relabelings (JSON).
    Oracle { g1: PathBuf, g2: PathBuf },
    /// Check whether the surrogate at a given perturbation agrees with the
    /// exhaustive optimum.
    Verify {
        /// Graph files; omit when using --objective.
        #[arg(required_unless_present = "objective", num_args = 2, value_names = ["G1", "G2"])]
        graphs: Vec<PathBuf>,
        #[arg(long, value_name = "P/Q", value_parser = rational_arg)]
        t: Option<Rational>,
        /// Built-in separable objective in place of a graph pair.
        #[arg(long, value_enum, conflicts_with = "graphs")]
        objective: Option<Preset>,
        #[arg(long)]
        json: bool,
        #[arg(long, value_name = "N")]
        max_iterations: Option<usize>,
    },
    /// Describe the (perturbed) Birkhoff constraint system.
    Polytope {
        n: usize,
        #[arg(long, value_name = "P/Q", value_parser = rational_arg)]
        t: Option<Rational>,
        /// List every vertex.
        #[arg(long)]
        enumerate: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rule {
    Omega,
    LongestEdge,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// 2x2 problem whose optimal basis changes under a large perturbation.
    NearTie,
    /// 3x3 problem with a slight preference for the diagonal.
    DiagonalPreference,
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn solver_options(max_iterations: Option<usize>, rule: Rule) -> Result<SolverOptions> {
    let mut opts = match max_iterations {
        Some(limit) => SolverOptions::with_max_iterations(limit)?,
        None => SolverOptions::default(),
    };
    opts.subdivision_rule = match rule {
        Rule::Omega => SubdivisionRule::Omega,
        Rule::LongestEdge => SubdivisionRule::LongestEdge,
    };
    Ok(opts)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Match {
            g1,
            g2,
            json,
            max_iterations,
            t,
            subdivision,
        } => {
            let opts = MatchOptions {
                solver: solver_options(max_iterations, subdivision)?,
                t,
            };
            let report = cmd_match(&read_graph(&g1)?, &read_graph(&g2)?, &opts)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_table());
            }
            Ok(report.exit_code())
        }
        Command::Bound { g1, g2, json: as_json } => {
            let report = cmd_bound(&read_graph(&g1)?, &read_graph(&g2)?)?;
            if as_json {
                println!("{}", json(&report));
            } else {
                print!("{}", report.to_table());
            }
            Ok(EXIT_OK)
        }
        Command::Oracle { g1, g2 } => {
            let result = cmd_oracle(&read_graph(&g1)?, &read_graph(&g2)?)?;
            println!("{}", json(&result));
            Ok(EXIT_OK)
        }
        Command::Verify {
            graphs,
            t,
            objective,
            json,
            max_iterations,
        } => {
            let problem = match objective {
                Some(Preset::NearTie) => VerifyProblem::Objective(SeparableQuadratic::near_tie_2x2()),
                Some(Preset::DiagonalPreference) => {
                    VerifyProblem::Objective(SeparableQuadratic::diagonal_preference_3x3())
                }
                None => match graphs.as_slice() {
                    [g1, g2] => VerifyProblem::Graphs(read_graph(g1)?, read_graph(g2)?),
                    _ => return Err(Error::InvalidArgument("verify needs two graph files".into())),
                },
            };
            let report = cmd_verify(&problem, t.as_ref(), &solver_options(max_iterations, Rule::Omega)?)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_table());
            }
            Ok(report.exit_code())
        }
        Command::Polytope { n, t, enumerate, json } => {
            let report = cmd_polytope(n, t.as_ref(), enumerate)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GM_SURROGATE_LOG")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    };
    ExitCode::from(code as u8)
}
