//! Reference external proposer: answers line-delimited JSON requests on
//! stdin using the exhaustive edit-distance heuristic.

use std::io;

use lineq::search::{serve_proposer, ExhaustiveProposer};

fn main() -> io::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve_proposer(&mut ExhaustiveProposer, stdin.lock(), stdout.lock())
}
