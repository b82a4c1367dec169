//! Proof search.
//!
//! A [`Proposer`] suggests rewrite moves for a (current, target) pair. The
//! beam search keeps up to `beam_width` intermediate programs, asks the
//! proposer for three moves on each, and stops as soon as a candidate is
//! lexically equal to the target. Every proof it returns is re-verified.
//! [`exhaustive_oracle`] is a plain breadth-first search over all legal moves
//! and yields shortest proofs.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axiom::{apply_category, legal_moves, AxiomCategory, Move};
use crate::expr::{Dir, Expr, Path};
use crate::proof::{verify, Proof, ProofStep};
use crate::ted::tree_edit_distance;

/// Proposals requested per frontier member.
pub const PROPOSALS_PER_MEMBER: usize = 3;
pub const DEFAULT_MAX_DEPTH: usize = 12;
/// Default cap on programs held by the breadth-first searches.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("external proposer protocol error: {0}")]
    ExternalProtocolError(String),
    #[error("no legal moves")]
    NoLegalMoves,
    #[error("search exceeded its budget of {0} programs")]
    MemoryBudgetExceeded(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub mv: Move,
    /// Higher is preferred.
    pub score: f64,
}

pub trait Proposer {
    /// At most `k` legal proposals, distinct by (path, category).
    fn propose(
        &mut self,
        current: &Expr,
        target: &Expr,
        k: usize,
    ) -> Result<Vec<Proposal>, SearchError>;
}

/// Scores every legal move by the negated tree edit distance between its
/// result and the target. Ties keep preorder-then-category order.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExhaustiveProposer;

impl Proposer for ExhaustiveProposer {
    fn propose(
        &mut self,
        current: &Expr,
        target: &Expr,
        k: usize,
    ) -> Result<Vec<Proposal>, SearchError> {
        let moves = legal_moves(current);
        if moves.is_empty() {
            return Err(SearchError::NoLegalMoves);
        }
        let mut scored: Vec<Proposal> = moves
            .into_iter()
            .map(|mv| {
                let next = mv.apply(current).expect("legal move applies");
                let score = -(tree_edit_distance(&next, target) as f64);
                Proposal { mv, score }
            })
            .collect();
        // stable sort keeps the enumeration order among ties
        scored.sort_by(|a, b| b.score.total_cmp(&a.score));
        scored.truncate(k);
        Ok(scored)
    }
}

/// Uniformly random distinct legal moves, all scored zero.
#[derive(Clone, Debug)]
pub struct RandomProposer {
    rng: ChaCha8Rng,
}

impl RandomProposer {
    pub fn new(seed: u64) -> Self {
        RandomProposer {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Proposer for RandomProposer {
    fn propose(
        &mut self,
        current: &Expr,
        _target: &Expr,
        k: usize,
    ) -> Result<Vec<Proposal>, SearchError> {
        let moves = legal_moves(current);
        if moves.is_empty() {
            return Err(SearchError::NoLegalMoves);
        }
        Ok(moves
            .choose_multiple(&mut self.rng, k)
            .cloned()
            .map(|mv| Proposal { mv, score: 0.0 })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// External proposer protocol: one JSON request per line on the child's stdin,
// one JSON response per line on its stdout.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalRequest {
    pub p1: String,
    pub p2: String,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireProposal {
    pub path: Vec<String>,
    pub category: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalResponse {
    pub proposals: Vec<WireProposal>,
}

impl WireProposal {
    pub fn from_move(mv: &Move, score: f64) -> Self {
        WireProposal {
            path: mv
                .path
                .steps()
                .iter()
                .map(|d| d.token().to_string())
                .collect(),
            category: mv.category.name().to_string(),
            score,
        }
    }

    fn decode(&self) -> Result<(Path, AxiomCategory), String> {
        let steps = self
            .path
            .iter()
            .map(|t| match t.as_str() {
                "left" => Ok(Dir::Left),
                "right" => Ok(Dir::Right),
                other => Err(format!("bad path token `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let category = self
            .category
            .parse::<AxiomCategory>()
            .map_err(|e| e.to_string())?;
        Ok((steps.into(), category))
    }
}

/// Turns wire proposals into legal, deduplicated proposals. Illegal or
/// malformed entries are dropped and logged.
pub fn filter_wire_proposals(current: &Expr, wire: &[WireProposal], k: usize) -> Vec<Proposal> {
    let mut out: Vec<Proposal> = Vec::new();
    for w in wire {
        if out.len() == k {
            break;
        }
        let (path, category) = match w.decode() {
            Ok(x) => x,
            Err(e) => {
                log::warn!("dropping malformed proposal {w:?}: {e}");
                continue;
            }
        };
        if out
            .iter()
            .any(|p| p.mv.path == path && p.mv.category == category)
        {
            continue;
        }
        match apply_category(current, &path, category) {
            Ok((_, resolved_id)) => out.push(Proposal {
                mv: Move {
                    path,
                    category,
                    resolved_id,
                },
                score: w.score,
            }),
            Err(e) => log::warn!("dropping illegal proposal {w:?}: {e}"),
        }
    }
    out
}

/// A child process speaking the line-delimited JSON protocol.
pub struct ExternalProposer {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalProposer {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self, SearchError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout was piped"));
        Ok(ExternalProposer {
            child,
            stdin,
            stdout,
        })
    }
}

impl Drop for ExternalProposer {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Proposer for ExternalProposer {
    fn propose(
        &mut self,
        current: &Expr,
        target: &Expr,
        k: usize,
    ) -> Result<Vec<Proposal>, SearchError> {
        let req = ProposalRequest {
            p1: current.render(),
            p2: target.render(),
            k,
        };
        let line = serde_json::to_string(&req).expect("request serializes");
        writeln!(self.stdin, "{line}")?;
        self.stdin.flush()?;
        let mut resp = String::new();
        if self.stdout.read_line(&mut resp)? == 0 {
            return Err(SearchError::ExternalProtocolError(
                "proposer closed its output".into(),
            ));
        }
        let resp: ProposalResponse = serde_json::from_str(resp.trim())
            .map_err(|e| SearchError::ExternalProtocolError(e.to_string()))?;
        Ok(filter_wire_proposals(current, &resp.proposals, k))
    }
}

/// Answers protocol requests from `input` with `proposer` until end of
/// input. Malformed requests get an empty proposal list.
pub fn serve_proposer<P: Proposer, R: BufRead, W: Write>(
    proposer: &mut P,
    input: R,
    mut output: W,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let proposals = match parse_request(&line) {
            Ok((cur, target, k)) => match proposer.propose(&cur, &target, k) {
                Ok(ps) => ps
                    .iter()
                    .map(|p| WireProposal::from_move(&p.mv, p.score))
                    .collect(),
                Err(_) => Vec::new(),
            },
            Err(e) => {
                log::warn!("bad request: {e}");
                Vec::new()
            }
        };
        let resp = ProposalResponse { proposals };
        writeln!(
            output,
            "{}",
            serde_json::to_string(&resp).expect("response serializes")
        )?;
        output.flush()?;
    }
    Ok(())
}

fn parse_request(line: &str) -> Result<(Expr, Expr, usize), String> {
    let req: ProposalRequest = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let cur = Expr::parse(&req.p1).map_err(|e| e.to_string())?;
    let target = Expr::parse(&req.p2).map_err(|e| e.to_string())?;
    Ok((cur, target, req.k.max(1)))
}

// ---------------------------------------------------------------------------
// Beam search

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NotProvenReason {
    /// The step limit was reached.
    DepthExhausted,
    /// No unvisited candidate was left to explore.
    BeamExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Proven(Proof),
    NotProven(NotProvenReason),
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    /// Frontier members sent to the proposer.
    pub expansions: usize,
    /// Programs expanded, in order.
    pub expanded: Vec<Expr>,
}

impl SearchResult {
    pub fn proof(&self) -> Option<&Proof> {
        match &self.outcome {
            SearchOutcome::Proven(p) => Some(p),
            SearchOutcome::NotProven(_) => None,
        }
    }

    pub fn is_proven(&self) -> bool {
        self.proof().is_some()
    }
}

#[derive(Clone)]
struct BeamEntry {
    program: Expr,
    steps: Vec<ProofStep>,
    score: f64,
    key: String,
}

impl BeamEntry {
    fn new(program: Expr, steps: Vec<ProofStep>, score: f64) -> Self {
        let key = Proof::Steps(steps.clone()).to_string();
        BeamEntry {
            program,
            steps,
            score,
            key,
        }
    }
}

/// Searches for a rewrite sequence from `p1` to `p2`.
///
/// Each round expands every frontier member with [`PROPOSALS_PER_MEMBER`]
/// proposals, drops results already seen during this search, and keeps the
/// `beam_width` best candidates by cumulative proposal score (ties: shorter
/// sequence, then step text). A candidate equal to `p2` ends the search.
/// Proposer errors on a member are logged and that member is skipped.
pub fn system_beam_search<P: Proposer + ?Sized>(
    p1: &Expr,
    p2: &Expr,
    proposer: &mut P,
    beam_width: usize,
    max_depth: usize,
) -> SearchResult {
    let beam_width = beam_width.max(1);
    let mut expanded = Vec::new();
    let finish = |steps: Vec<ProofStep>, expanded: Vec<Expr>| {
        let proof = Proof::Steps(steps);
        assert!(
            verify(p1, p2, &proof).is_proven(),
            "search produced an unverifiable proof"
        );
        SearchResult {
            outcome: SearchOutcome::Proven(proof),
            expansions: expanded.len(),
            expanded,
        }
    };
    if p1 == p2 {
        return finish(Vec::new(), expanded);
    }

    let mut visited: HashSet<Expr> = HashSet::from([p1.clone()]);
    let mut frontier = vec![BeamEntry::new(p1.clone(), Vec::new(), 0.0)];
    for _ in 0..max_depth {
        let mut candidates = Vec::new();
        for member in &frontier {
            expanded.push(member.program.clone());
            let proposals = match proposer.propose(&member.program, p2, PROPOSALS_PER_MEMBER) {
                Ok(ps) => ps,
                Err(SearchError::NoLegalMoves) => continue,
                Err(e) => {
                    log::warn!("proposer failed on {}: {e}", member.program);
                    continue;
                }
            };
            for prop in proposals {
                let Ok(next) = prop.mv.apply(&member.program) else {
                    log::warn!("skipping inapplicable proposal {:?}", prop.mv);
                    continue;
                };
                if !visited.insert(next.clone()) {
                    continue;
                }
                let mut steps = member.steps.clone();
                steps.push(ProofStep::new(prop.mv.path.clone(), prop.mv.category));
                if next == *p2 {
                    return finish(steps, expanded);
                }
                candidates.push(BeamEntry::new(next, steps, member.score + prop.score));
            }
        }
        if candidates.is_empty() {
            return SearchResult {
                outcome: SearchOutcome::NotProven(NotProvenReason::BeamExhausted),
                expansions: expanded.len(),
                expanded,
            };
        }
        candidates.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.steps.len().cmp(&b.steps.len()))
                .then_with(|| a.key.cmp(&b.key))
        });
        candidates.truncate(beam_width);
        frontier = candidates;
    }
    SearchResult {
        outcome: SearchOutcome::NotProven(NotProvenReason::DepthExhausted),
        expansions: expanded.len(),
        expanded,
    }
}

// ---------------------------------------------------------------------------
// Breadth-first oracle

/// Shortest proof of at most `max_depth` steps, found by expanding every
/// legal move of every distinct program level by level. Fails once more
/// than `node_cap` distinct programs are held.
pub fn exhaustive_oracle(
    p1: &Expr,
    p2: &Expr,
    max_depth: usize,
    node_cap: usize,
) -> Result<Option<Proof>, SearchError> {
    if p1 == p2 {
        return Ok(Some(Proof::Steps(Vec::new())));
    }
    // (program, parent index, step from parent)
    let mut nodes: Vec<(Expr, usize, Option<ProofStep>)> = vec![(p1.clone(), 0, None)];
    let mut index: HashMap<Expr, usize> = HashMap::from([(p1.clone(), 0)]);
    let mut level = 0..1;
    for _ in 0..max_depth {
        let start = nodes.len();
        for i in level.clone() {
            let cur = nodes[i].0.clone();
            for mv in legal_moves(&cur) {
                let next = mv.apply(&cur).expect("legal move applies");
                if index.contains_key(&next) {
                    continue;
                }
                let step = ProofStep::new(mv.path, mv.category);
                if next == *p2 {
                    let mut steps = vec![step];
                    let mut at = i;
                    while let Some(s) = &nodes[at].2 {
                        steps.push(s.clone());
                        at = nodes[at].1;
                    }
                    steps.reverse();
                    let proof = Proof::Steps(steps);
                    debug_assert!(verify(p1, p2, &proof).is_proven());
                    return Ok(Some(proof));
                }
                index.insert(next.clone(), nodes.len());
                nodes.push((next, i, Some(step)));
                if nodes.len() > node_cap {
                    return Err(SearchError::MemoryBudgetExceeded(node_cap));
                }
            }
        }
        level = start..nodes.len();
        if level.is_empty() {
            break;
        }
    }
    Ok(None)
}
