use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use supint::encoding::{self, IndexOrStar};
use supint::formula::{dag_size, parse, print, tree_size, Formula};
use supint::harness::{self, Campaign, Subject, VerificationReport};
use supint::ipc::{self, ProverVerdict};
use supint::kripke::{force, parse_model, refuters, to_dot, write_model, KripkeModel};
use supint::minsky::{classes, parse_machine, reach_graph, Configuration, MinskyMachine};
use supint::paper_model::{build, TruncationParams};

#[derive(Parser)]
#[command(
    name = "supint",
    version,
    about = "Encode Minsky machines into three-variable formulas and decide them in Int"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a formula in Int. Exit 0 proved, 1 refuted, 3 unknown.
    Prove {
        /// A formula, or a file containing one.
        formula: String,
        #[arg(long)]
        budget: Option<u64>,
        /// Write the countermodel of a refuted formula here.
        #[arg(long)]
        emit_countermodel: Option<PathBuf>,
    },
    #[command(subcommand)]
    Minsky(MinskyCommand),
    #[command(subcommand)]
    Encode(EncodeCommand),
    #[command(subcommand)]
    Model(ModelCommand),
    #[command(subcommand)]
    Export(ExportCommand),
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum MinskyCommand {
    /// Print the run from a configuration.
    Run {
        file: PathBuf,
        s: u32,
        m: u32,
        n: u32,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Print the mutual-reachability classes of the explored graph.
    Classes {
        file: PathBuf,
        s: u32,
        m: u32,
        n: u32,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        counters: u32,
    },
}

#[derive(Subcommand)]
enum EncodeCommand {
    /// The code of a configuration.
    Config {
        s: u32,
        m: u32,
        n: u32,
        #[arg(long)]
        stats: bool,
    },
    /// The axiom of a machine.
    Axiom {
        file: PathBuf,
        #[arg(long)]
        stats: bool,
    },
    /// A member of a formula family, e.g. `A 3 1`, `F 2 1`, `Ehat 0 1 *`.
    Family {
        #[arg(ignore_case = true)]
        family: Family,
        /// Indices; `*` is accepted by Ehat.
        #[arg(allow_negative_numbers = true)]
        indices: Vec<String>,
        #[arg(long)]
        stats: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    A,
    B,
    E,
    F,
    G,
    P,
    Q,
    Ehat,
}

#[derive(Args, Clone)]
struct Bounds {
    #[arg(long, default_value_t = 20, allow_hyphen_values = true)]
    imax: i64,
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[arg(long, default_value_t = 8)]
    counters: u32,
    #[arg(long, default_value_t = 2)]
    margin: i64,
}

impl Bounds {
    fn params(&self) -> TruncationParams {
        TruncationParams {
            imax: self.imax,
            step_bound: self.steps,
            counter_bound: self.counters,
            margin: self.margin,
        }
    }
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Build the refuting model for a machine and initial configuration.
    Build {
        machine: PathBuf,
        s: u32,
        m: u32,
        n: u32,
        #[command(flatten)]
        truncation: Bounds,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Whether a point forces a formula.
    Eval {
        model: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long)]
        formula: String,
    },
    /// The points refuting a formula.
    Refuters {
        model: PathBuf,
        #[arg(long)]
        formula: String,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    /// The covering relation as a DOT digraph.
    Dot {
        model: PathBuf,
        /// Double-circle the points refuting this formula.
        #[arg(long)]
        formula: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Overrides the default budget (also settable through SUPINT_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
    /// Run only the instance with this key.
    #[arg(long)]
    only: Option<String>,
    /// Write the report lines here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Target {
    /// One of: cycle, transfer, chain.
    #[arg(long, conflicts_with = "machine")]
    fixture: Option<String>,
    #[arg(long, requires = "init")]
    machine: Option<PathBuf>,
    /// Initial configuration `s,m,n`.
    #[arg(long)]
    init: Option<String>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    Semantic {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        truncation: Bounds,
        #[command(flatten)]
        common: Common,
    },
    Keyformulas {
        #[arg(long, default_value_t = 3)]
        k_max: u32,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        hi: i64,
        #[command(flatten)]
        common: Common,
    },
    Equivalence {
        #[arg(long, default_value_t = 1)]
        s_max: u32,
        #[arg(long, default_value_t = 2)]
        m_max: u32,
        #[arg(long, default_value_t = 2)]
        n_max: u32,
        #[command(flatten)]
        common: Common,
    },
    Axiom {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        truncation: Bounds,
        #[command(flatten)]
        common: Common,
    },
    Semantic3 {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        truncation: Bounds,
        #[command(flatten)]
        common: Common,
    },
    Reduction {
        #[command(flatten)]
        target: Target,
        /// Target configuration `s,m,n`.
        #[arg(long = "target")]
        goal: String,
        #[command(flatten)]
        truncation: Bounds,
        #[command(flatten)]
        common: Common,
    },
    Truncation {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        truncation: Bounds,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn formula_arg(text: &str) -> Result<Formula> {
    let path = Path::new(text);
    let source = if path.is_file() {
        read(path)?
    } else {
        text.to_owned()
    };
    parse(&source).map_err(|e| anyhow!("{e}"))
}

fn machine_file(path: &Path) -> Result<MinskyMachine> {
    parse_machine(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn config_arg(text: &str) -> Result<Configuration> {
    let parts: Vec<u32> = text
        .split(',')
        .map(|x| x.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad configuration `{text}`, expected s,m,n"))?;
    match parts[..] {
        [s, m, n] => Ok(Configuration::new(s, m, n)),
        _ => bail!("bad configuration `{text}`, expected s,m,n"),
    }
}

fn load_model(path: &Path) -> Result<KripkeModel> {
    parse_model(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn emit(f: &Formula, stats: bool) {
    println!("{}", print(f));
    if stats {
        println!("dag size: {}", dag_size(f));
        println!("tree size: {}", tree_size(f));
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Prove {
            formula,
            budget,
            emit_countermodel,
        } => {
            let f = formula_arg(&formula)?;
            let verdict = ipc::prove(&f, budget.unwrap_or_else(harness::prover_budget));
            match verdict {
                ProverVerdict::Proved(proof) => {
                    println!("proved ({} steps)", proof.len());
                    Ok(0)
                }
                ProverVerdict::Refuted { model, witness } => {
                    println!(
                        "refuted at {} in a {}-point model",
                        model.frame().label(witness),
                        model.len()
                    );
                    if let Some(path) = emit_countermodel {
                        fs::write(&path, write_model(&model))
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    Ok(1)
                }
                ProverVerdict::Unknown { spent } => {
                    println!("unknown (budget exhausted after {spent})");
                    Ok(3)
                }
            }
        }
        Command::Minsky(cmd) => minsky(cmd),
        Command::Encode(cmd) => encode(cmd),
        Command::Model(cmd) => model(cmd),
        Command::Export(ExportCommand::Dot {
            model,
            formula,
            output,
        }) => {
            let m = load_model(&model)?;
            let highlight = formula
                .map(|f| formula_arg(&f).map(|f| refuters(&m, &f)))
                .transpose()?;
            write_or_print(output.as_deref(), &to_dot(m.frame(), highlight.as_ref()))?;
            Ok(0)
        }
        Command::Verify(cmd) => verify(cmd),
    }
}

fn minsky(cmd: MinskyCommand) -> Result<u8> {
    match cmd {
        MinskyCommand::Run {
            file,
            s,
            m,
            n,
            steps,
        } => {
            let machine = machine_file(&file)?;
            let trace = machine.run(Configuration::new(s, m, n), steps);
            for c in &trace {
                println!("{c}");
            }
            if machine
                .step(*trace.last().expect("run starts at the input"))
                .is_none()
            {
                println!("halted");
            }
            Ok(0)
        }
        MinskyCommand::Classes {
            file,
            s,
            m,
            n,
            steps,
            counters,
        } => {
            let machine = machine_file(&file)?;
            let g = reach_graph(&machine, Configuration::new(s, m, n), steps, counters);
            let q = classes(&g);
            for (k, members) in q.classes.iter().enumerate() {
                let list: Vec<String> = members.iter().map(|c| c.to_string()).collect();
                let succ: Vec<String> = q.reach[k]
                    .ones()
                    .filter(|&b| b != k)
                    .map(|b| q.representative(b).to_string())
                    .collect();
                println!(
                    "[{}] {{{}}} -> {}",
                    q.representative(k),
                    list.join(" "),
                    succ.join(" ")
                );
            }
            if g.step_bound_hit {
                println!("step bound hit");
            }
            if g.counter_bound_hit {
                println!("counter bound hit");
            }
            Ok(0)
        }
    }
}

fn int(text: &str) -> Result<i64> {
    text.parse().with_context(|| format!("bad index `{text}`"))
}

fn nat(text: &str) -> Result<u32> {
    text.parse().with_context(|| format!("bad index `{text}`"))
}

fn encode(cmd: EncodeCommand) -> Result<u8> {
    match cmd {
        EncodeCommand::Config { s, m, n, stats } => emit(&encoding::e_code(s, m, n), stats),
        EncodeCommand::Axiom { file, stats } => {
            emit(&encoding::ax_machine(&machine_file(&file)?), stats)
        }
        EncodeCommand::Family {
            family,
            indices,
            stats,
        } => {
            let ix: Vec<&str> = indices.iter().map(String::as_str).collect();
            let f = match (family, ix.as_slice()) {
                (Family::A, [i, j]) => encoding::a_formula(int(i)?, nat(j)? as u8)?,
                (Family::B, [i, j]) => encoding::b_formula(int(i)?, nat(j)? as u8)?,
                (Family::E, [s, m, n]) => encoding::e_code(nat(s)?, nat(m)?, nat(n)?),
                (Family::F, [k]) => encoding::f_formula(nat(k)?),
                (Family::G, [k]) => encoding::g_formula(nat(k)?),
                (Family::F, [k, m]) => encoding::f_m(nat(k)?, nat(m)? as u8)?,
                (Family::G, [k, m]) => encoding::g_m(nat(k)?, nat(m)? as u8)?,
                (Family::P, [i, j]) => encoding::p_formula(int(i)?, int(j)?)?,
                (Family::Q, [i, j]) => encoding::q_formula(int(i)?, int(j)?)?,
                (Family::Ehat, [s, i, j]) => {
                    let star = |x: &str| -> Result<IndexOrStar> {
                        Ok(if x == "*" {
                            IndexOrStar::Star
                        } else {
                            IndexOrStar::Index(nat(x)?)
                        })
                    };
                    encoding::e_hat_general(nat(s)?, star(i)?, star(j)?)?
                }
                _ => bail!("wrong number of indices for this family"),
            };
            emit(&f, stats);
        }
    }
    Ok(0)
}

fn model(cmd: ModelCommand) -> Result<u8> {
    match cmd {
        ModelCommand::Build {
            machine,
            s,
            m,
            n,
            truncation,
            output,
        } => {
            let machine = machine_file(&machine)?;
            let pm = build(&machine, Configuration::new(s, m, n), truncation.params())?;
            write_or_print(output.as_deref(), &write_model(&pm.model))?;
            Ok(0)
        }
        ModelCommand::Eval {
            model,
            point,
            formula,
        } => {
            let m = load_model(&model)?;
            let w = m
                .frame()
                .index_of(&point)
                .ok_or_else(|| anyhow!("no point `{point}` in the model"))?;
            let forced = force(&m, w, &formula_arg(&formula)?);
            println!("{}", if forced { "forced" } else { "refuted" });
            Ok(if forced { 0 } else { 1 })
        }
        ModelCommand::Refuters { model, formula } => {
            let m = load_model(&model)?;
            for w in refuters(&m, &formula_arg(&formula)?).ones() {
                println!("{}", m.frame().label(w));
            }
            Ok(0)
        }
    }
}

fn subject(target: &Target) -> Result<Subject> {
    match (&target.fixture, &target.machine) {
        (Some(name), _) => {
            Subject::fixture(name).ok_or_else(|| anyhow!("unknown fixture `{name}`"))
        }
        (None, Some(path)) => {
            let init = target.init.as_deref().expect("clap requires --init");
            Ok(Subject {
                machine: machine_file(path)?,
                init: config_arg(init)?,
                args: format!("--machine {} --init {init}", path.display()),
            })
        }
        (None, None) => bail!("give --fixture or --machine with --init"),
    }
}

fn finish(report: VerificationReport, common: &Common) -> Result<u8> {
    let lines = report.lines();
    print!("{lines}");
    println!("{}", report.summary());
    if let Some(path) = &common.report {
        fs::write(path, &lines).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.exit_code() as u8)
}

fn campaign(common: &Common) -> Campaign {
    Campaign {
        budget: common.budget,
        only: common.only.clone(),
    }
}

fn verify(cmd: VerifyCommand) -> Result<u8> {
    match cmd {
        VerifyCommand::Semantic {
            target,
            truncation,
            common,
        } => finish(
            campaign(&common).semantic(&subject(&target)?, truncation.params()),
            &common,
        ),
        VerifyCommand::Keyformulas {
            k_max,
            lo,
            hi,
            common,
        } => {
            if k_max == 0 {
                bail!("--k-max must be at least 1");
            }
            finish(campaign(&common).keyformulas(k_max, (lo, hi)), &common)
        }
        VerifyCommand::Equivalence {
            s_max,
            m_max,
            n_max,
            common,
        } => finish(campaign(&common).equivalence(s_max, m_max, n_max), &common),
        VerifyCommand::Axiom {
            target,
            truncation,
            common,
        } => finish(
            campaign(&common).axiom(&subject(&target)?, truncation.params()),
            &common,
        ),
        VerifyCommand::Semantic3 {
            target,
            truncation,
            common,
        } => finish(
            campaign(&common).semantic3(&subject(&target)?, truncation.params()),
            &common,
        ),
        VerifyCommand::Reduction {
            target,
            goal,
            truncation,
            common,
        } => finish(
            campaign(&common).reduction(
                &subject(&target)?,
                config_arg(&goal)?,
                truncation.params(),
            ),
            &common,
        ),
        VerifyCommand::Truncation {
            target,
            truncation,
            common,
        } => finish(
            campaign(&common).truncation(&subject(&target)?, truncation.params()),
            &common,
        ),
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
