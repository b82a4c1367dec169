use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lineq::analysis::{census, dataset_stats, sample_table};
use lineq::generator::{build_dataset, read_jsonl, write_jsonl, write_src_tgt, GenConfig, Split};
use lineq::search::{
    exhaustive_oracle, system_beam_search, ExhaustiveProposer, ExternalProposer, Proposer,
    RandomProposer, SearchOutcome, DEFAULT_MAX_DEPTH, DEFAULT_NODE_CAP,
};
use lineq::{axiom_table, verify, Expr, Proof};

#[derive(Parser)]
#[command(
    name = "lineq",
    version,
    about = "Rewrite proofs for linear algebra expressions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset as JSON lines.
    Gen {
        /// JSON generator configuration.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// AxiomStep10, AxiomStep5, WholeProof10 or WholeProof5.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        count: usize,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Search for a proof that P1 rewrites to P2.
    Prove {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        /// exhaustive, random, or external:COMMAND.
        #[arg(long, default_value = "exhaustive")]
        proposer: String,
        #[arg(long, default_value_t = 10)]
        beam: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        /// Seed for the random proposer.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay a proof and print its trace.
    Verify {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        /// Steps separated by ';', or Not_equal.
        #[arg(long, allow_hyphen_values = true)]
        proof: String,
    },
    /// Breadth-first search for a shortest proof.
    Oracle {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
    },
    /// Print the proof-space census as CSV.
    Census,
    /// Print dataset statistics as CSV.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Sequence lengths for the reachability table; 0 skips it.
        #[arg(long, default_value_t = 2)]
        reach: usize,
        #[arg(long, default_value_t = 200_000)]
        node_cap: usize,
    },
    /// Dump the axiom table as CSV.
    Axioms,
    /// Convert a dataset to parallel source/target files.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::SrcTgt)]
        format: ExportFormat,
        #[arg(long)]
        out: String,
        /// One line per step instead of one per sample.
        #[arg(long)]
        expand: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    SrcTgt,
}

/// Exit status for a usage or input error.
const USAGE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}

fn expr(text: &str) -> Result<Expr, String> {
    Expr::parse(text).map_err(|e| format!("cannot parse `{text}`: {e}"))
}

fn proposer(spec: &str, seed: u64) -> Result<Box<dyn Proposer>, String> {
    match spec {
        "exhaustive" => Ok(Box::new(ExhaustiveProposer)),
        "random" => Ok(Box::new(RandomProposer::new(seed))),
        _ => match spec.strip_prefix("external:") {
            Some(cmd) if !cmd.trim().is_empty() => ExternalProposer::spawn(cmd)
                .map(|p| Box::new(p) as Box<dyn Proposer>)
                .map_err(|e| e.to_string()),
            _ => Err(format!("unknown proposer `{spec}`")),
        },
    }
}

fn print_proof(p1: &Expr, p2: &Expr, proof: &Proof) {
    println!("{proof}");
    print!("{}", verify(p1, p2, proof));
}

/// Ok(false) means the command ran but the outcome was negative.
fn run(cmd: Command) -> Result<bool, String> {
    match cmd {
        Command::Gen {
            config,
            preset,
            count,
            seed,
            out,
            jobs,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => GenConfig::from_json_file(&path).map_err(|e| e.to_string())?,
                (None, Some(name)) => {
                    GenConfig::preset(&name).ok_or_else(|| format!("unknown preset `{name}`"))?
                }
                (None, None) => GenConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let ds =
                build_dataset(&cfg, Split::train_only(count), jobs).map_err(|e| e.to_string())?;
            let file = File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            let mut w = BufWriter::new(file);
            write_jsonl(&ds.samples, &mut w).map_err(|e| e.to_string())?;
            w.flush().map_err(|e| e.to_string())?;
            eprintln!("wrote {} samples to {}", ds.samples.len(), out.display());
            Ok(true)
        }
        Command::Prove {
            p1,
            p2,
            proposer: spec,
            beam,
            max_depth,
            seed,
        } => {
            let (a, b) = (expr(&p1)?, expr(&p2)?);
            let mut prop = proposer(&spec, seed)?;
            let r = system_beam_search(&a, &b, prop.as_mut(), beam, max_depth);
            match r.outcome {
                SearchOutcome::Proven(proof) => {
                    print_proof(&a, &b, &proof);
                    Ok(true)
                }
                SearchOutcome::NotProven(reason) => {
                    println!("NOT PROVEN ({reason:?}, {} expansions)", r.expansions);
                    Ok(false)
                }
            }
        }
        Command::Verify { p1, p2, proof } => {
            let (a, b) = (expr(&p1)?, expr(&p2)?);
            let proof = Proof::parse(&proof).map_err(|e| e.to_string())?;
            let r = verify(&a, &b, &proof);
            print!("{r}");
            Ok(r.is_proven())
        }
        Command::Oracle {
            p1,
            p2,
            max_depth,
            node_cap,
        } => {
            let (a, b) = (expr(&p1)?, expr(&p2)?);
            match exhaustive_oracle(&a, &b, max_depth, node_cap) {
                Ok(Some(proof)) => {
                    print_proof(&a, &b, &proof);
                    Ok(true)
                }
                Ok(None) => {
                    println!("NOT PROVEN (no proof within {max_depth} steps)");
                    Ok(false)
                }
                Err(e) => {
                    println!("NOT PROVEN ({e})");
                    Ok(false)
                }
            }
        }
        Command::Census => {
            print!("{}", census().to_csv());
            Ok(true)
        }
        Command::Stats {
            input,
            reach,
            node_cap,
        } => {
            let samples = read_samples(&input)?;
            print!("{}", dataset_stats(&samples).to_csv());
            if reach > 0 {
                let p1s: Vec<Expr> = samples
                    .iter()
                    .filter(|s| s.proof.steps().is_some())
                    .map(|s| s.p1.clone())
                    .collect();
                let t = sample_table(&p1s, reach, node_cap);
                println!();
                print!("{}", t.to_csv());
                if t.skipped > 0 {
                    eprintln!("{} samples skipped at the node cap", t.skipped);
                }
            }
            Ok(true)
        }
        Command::Axioms => {
            println!("id,category,lhs,rhs");
            for a in axiom_table() {
                println!("{},{},{},{}", a.id, a.category, a.lhs, a.rhs);
            }
            Ok(true)
        }
        Command::Export {
            input,
            format: ExportFormat::SrcTgt,
            out,
            expand,
        } => {
            let samples = read_samples(&input)?;
            write_src_tgt(&samples, expand, &out).map_err(|e| e.to_string())?;
            Ok(true)
        }
    }
}

fn read_samples(path: &PathBuf) -> Result<Vec<lineq::generator::Sample>, String> {
    let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_jsonl(BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))
}
