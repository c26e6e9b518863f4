use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chorex::equiv::{Verdict, DEFAULT_DEPTH};
use chorex::model::Name;
use chorex::pipeline::{check, extract, parse_topology, ExtractOptions, PipelineError};
use chorex::semantics::enabled_network_transitions;
use chorex::seg::{choices, export_dot, pick, BuildOptions, FailureKind, Policy, UnknownPolicy, DEFAULT_NODE_BUDGET};
use chorex::syntax::{parse_choreography_named, parse_network_named, print_choreography, print_network};

const EXIT_PARSE: u8 = 1;
const EXIT_DEADLOCK: u8 = 2;
const EXIT_LEAK: u8 = 3;
const EXIT_NO_LOOP: u8 = 4;
const EXIT_COUNTEREXAMPLE: u8 = 5;
const EXIT_USAGE: u8 = 64;

const BUDGET_ENV: &str = "CHOREX_NODE_BUDGET";

#[derive(Parser)]
#[command(name = "chorex", version, about = "Extract choreographies from networks of processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a choreography from a network
    Extract {
        input: PathBuf,
        /// Write the choreography here instead of standard output
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the execution graph in DOT format
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Initial connections, one `p -- q` per line (default: every pair)
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Check the result against the network afterwards
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Scheduling policy: lex-min, lex-max or interactions-first
        #[arg(long, default_value = "lex-min")]
        seed_policy: String,
        #[arg(long)]
        node_budget: Option<usize>,
    },
    /// Check a network against a choreography up to a depth
    Check {
        network: PathBuf,
        choreography: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long)]
        topology: Option<PathBuf>,
    },
    /// Run a network and print the labels it produces
    Simulate {
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value = "lex-min")]
        policy: String,
        /// Alternate between `then` and `else` instead of always taking `then`
        #[arg(long)]
        alternate: bool,
    },
}

struct Fail(u8, String);

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail(EXIT_USAGE, msg.into())
    }
}

// A closed pipe downstream is not an error worth a panic.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| Fail::usage(format!("cannot write {}: {e}", path.display())))
}

fn policy(name: &str) -> Result<Policy, Fail> {
    name.parse().map_err(|e: UnknownPolicy| Fail::usage(e.to_string()))
}

fn node_budget(flag: Option<usize>) -> Result<usize, Fail> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Fail::usage(format!("{BUDGET_ENV} must be a number, found `{v}`"))),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn topology(path: Option<&Path>) -> Result<Option<Vec<(Name, Name)>>, Fail> {
    let Some(path) = path else { return Ok(None) };
    let t = parse_topology(&read(path)?).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok(Some(t))
}

fn failure_exit(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Parse(_) => EXIT_PARSE,
        PipelineError::Extraction(f) => match f.kind {
            FailureKind::Deadlock => EXIT_DEADLOCK,
            FailureKind::ResourceLeak => EXIT_LEAK,
            FailureKind::NoValidLoop | FailureKind::BudgetExhausted | FailureKind::Semantic => EXIT_NO_LOOP,
        },
        PipelineError::Synth(_) => EXIT_NO_LOOP,
    }
}

fn describe(e: &PipelineError) -> String {
    let mut out = e.to_string();
    if let PipelineError::Extraction(f) = e {
        if let Some(w) = &f.witness {
            out += &format!("\nwitness mapping: {w}");
        }
        if !f.cycle.is_empty() {
            let ids: Vec<String> = f.cycle.iter().map(|i| format!("#{i}")).collect();
            out += &format!("\nnodes: {}", ids.join(" "));
        }
    }
    out
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.command {
        Command::Extract { input, output, dot, topology: topo, check: run_check, depth, seed_policy, node_budget: nb } => {
            let opts = ExtractOptions {
                build: BuildOptions { policy: policy(&seed_policy)?, node_budget: node_budget(nb)?, ..Default::default() },
                topology: topology(topo.as_deref())?,
            };
            let src = read(&input)?;
            let file = input.display().to_string();
            let network = parse_network_named(&src, &file).map_err(|e| Fail(EXIT_PARSE, e.to_string()))?;
            let result = extract(&network, &opts).map_err(|e| Fail(failure_exit(&e), format!("{file}: {}", describe(&e))))?;
            if let Some(path) = dot {
                write(&path, &export_dot(&result.seg))?;
            }
            let text = print_choreography(&result.choreography);
            match output {
                Some(path) => write(&path, &text)?,
                None => emit(&text),
            }
            if run_check {
                let verdict = check(&network, &result.choreography, opts.topology.as_deref(), depth);
                if let Verdict::CounterexampleFound { .. } = verdict {
                    return Err(Fail(EXIT_COUNTEREXAMPLE, verdict.to_string()));
                }
                eprintln!("{verdict}");
            }
            Ok(())
        }
        Command::Check { network, choreography, depth, topology: topo } => {
            let topo = topology(topo.as_deref())?;
            let (nsrc, csrc) = (read(&network)?, read(&choreography)?);
            let n = parse_network_named(&nsrc, &network.display().to_string()).map_err(|e| Fail(EXIT_PARSE, e.to_string()))?;
            let c = parse_choreography_named(&csrc, &choreography.display().to_string())
                .map_err(|e| Fail(EXIT_PARSE, e.to_string()))?;
            let verdict = check(&n, &c, topo.as_deref(), depth);
            emit(&verdict.to_string());
            if verdict.is_bisimilar() {
                emit("\n");
                Ok(())
            } else {
                Err(Fail(EXIT_COUNTEREXAMPLE, String::new()))
            }
        }
        Command::Simulate { input, steps, policy: pname, alternate } => {
            let policy = policy(&pname)?;
            let src = read(&input)?;
            let n = parse_network_named(&src, &input.display().to_string()).map_err(|e| Fail(EXIT_PARSE, e.to_string()))?;
            let mut state = chorex::semantics::NetworkState::initial(n);
            let mut take_else = false;
            for _ in 0..steps {
                if state.network.is_terminated() {
                    break;
                }
                let transitions = enabled_network_transitions(&state).map_err(|e| Fail(EXIT_NO_LOOP, e.to_string()))?;
                let options = choices(transitions);
                if options.is_empty() {
                    emit(&print_network(&state.network));
                    return Err(Fail(EXIT_DEADLOCK, "deadlock: no process can move".into()));
                }
                let mut chosen = options[pick(policy, &options, &state.network)].clone();
                let k = if chosen.len() == 2 && take_else { 1 } else { 0 };
                if chosen.len() == 2 && alternate {
                    take_else = !take_else;
                }
                let (label, next) = chosen.swap_remove(k);
                emit(&format!("{label}\n"));
                state = next;
            }
            emit(&print_network(&state.network));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(code)
        }
    }
}
