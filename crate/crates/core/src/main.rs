use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use fborel::admissible::{exists_admissible_sym, Variant};
use fborel::broom::{gen_optimal, to_tree, BroomExpr};
use fborel::omega::{canonical, expand, is_wf, iter_derive, iter_rank, DerivKind, OmegaTree};
use fborel::sexp::{parse, read, FromSexp};
use fborel::suslin::{rt_eval, rt_eval_brute, SuslinScheme};
use fborel::verify::{run_suite, Suite};
use fborel::{Error, FiniteTree, Ordinal, Seq};

#[derive(Parser)]
#[command(name = "fborel", version, about = "Tree ranks, broom sets, admissible maps and Suslin-scheme operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a canonical tree or an optimal broom tree.
    #[command(group(ArgGroup::new("what").required(true).args(["canonical", "optimal_broom"])))]
    Gen {
        #[arg(long, value_name = "A")]
        canonical: Option<u64>,
        #[arg(long, value_name = "A")]
        optimal_broom: Option<u64>,
        /// Print the finite expansion with this many copies per bundle instead (0: symbolic).
        #[arg(long, value_name = "W", default_value_t = 0)]
        width_hint: u64,
    },
    /// Print the rank of a tree under a derivative.
    Rank {
        #[arg(long)]
        op: DerivKind,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Apply a derivative a number of times.
    Derive {
        #[arg(long)]
        op: DerivKind,
        #[arg(long)]
        steps: usize,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long = "out", value_name = "FILE")]
        output: PathBuf,
    },
    /// Decide whether a canonical tree maps admissibly into a target.
    Embed {
        #[arg(long)]
        alpha: Ordinal,
        #[arg(long, value_name = "I")]
        comma: Option<u64>,
        #[arg(long, value_name = "FILE")]
        target: PathBuf,
    },
    /// Evaluate R^h_T(C).
    Rt {
        #[arg(long, value_name = "FILE")]
        tree: PathBuf,
        #[arg(long, value_name = "FILE")]
        scheme: PathBuf,
        #[arg(long)]
        brute: bool,
        #[arg(long, value_name = "SEQ")]
        handle: Option<String>,
    },
    /// Expand a symbolic tree into a finite one.
    Expand {
        #[arg(long, value_name = "W")]
        width: u64,
        #[arg(long, value_name = "L")]
        chain: usize,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Run verification suites.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Errors reported with exit status 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, result: fborel::Result<T>) -> Result<T, Failure> {
    result.map_err(|e| Failure(format!("{}:{e}", path.display())))
}

/// Reads an omega tree, a finite tree or a broom expression.
fn read_tree(path: &Path) -> Result<OmegaTree, Failure> {
    let text = read_file(path)?;
    let sexp = in_file(path, read(&text))?;
    let tree = match sexp.head() {
        Some("tree") => FiniteTree::from_sexp(&sexp).map(|t| OmegaTree::from_finite(&t)),
        Some("broom0" | "handle" | "fork") => BroomExpr::from_sexp(&sexp).map(|b| OmegaTree::from(to_tree(&b))),
        _ => OmegaTree::from_sexp(&sexp),
    };
    in_file(path, tree)
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Gen { canonical: Some(a), width_hint, .. } => {
            let tree = OmegaTree::from(canonical(a));
            print_tree(&tree, width_hint);
        }
        Command::Gen { optimal_broom: Some(a), width_hint, .. } => {
            let tree = OmegaTree::from(to_tree(&gen_optimal(a)?));
            print_tree(&tree, width_hint);
        }
        Command::Gen { .. } => unreachable!("clap requires one generator"),
        Command::Rank { op, input } => println!("{}", iter_rank(&read_tree(&input)?, op)),
        Command::Derive { op, steps, input, output } => {
            let tree = iter_derive(&read_tree(&input)?, op, steps);
            fs::write(&output, format!("{tree}\n")).map_err(|e| Failure(format!("{}: {e}", output.display())))?;
        }
        Command::Embed { alpha, comma, target } => {
            let variant = comma.map_or(Variant::Plain, Variant::Comma);
            println!("{}", exists_admissible_sym(&alpha, variant, &read_tree(&target)?)?);
        }
        Command::Rt { tree, scheme, brute, handle } => {
            let omega = read_tree(&tree)?;
            if !is_wf(&omega) {
                return Err(Failure(format!("{}: R_T needs a well-founded tree", tree.display())));
            }
            let finite = omega
                .root()
                .and_then(|r| r.to_finite())
                .ok_or_else(|| Failure(format!("{}: R_T needs a nonempty finite tree", tree.display())))?;
            let c: SuslinScheme = in_file(&scheme, parse(&read_file(&scheme)?))?;
            let h = match handle {
                Some(text) => parse::<Seq>(&text).map_err(|e| Failure(format!("--handle:{e}")))?,
                None => Seq::empty(),
            };
            let set = if brute { rt_eval_brute(&finite, &c, &h)? } else { rt_eval(&finite, &c, &h)? };
            println!("{}", c.universe().show(set));
        }
        Command::Expand { width, chain, input } => println!("{}", expand(&read_tree(&input)?, width, chain)),
        Command::Verify { suite, seed } => {
            println!("suite {suite} seed {seed}");
            let reports = run_suite(suite, seed);
            for r in &reports {
                println!("{r}");
            }
            if reports.iter().any(|r| !r.pass) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_tree(tree: &OmegaTree, width: u64) {
    if width == 0 {
        println!("{tree}");
    } else {
        println!("{}", expand(tree, width, width as usize));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
