//! Random programs, rewrite sequences and datasets.
//!
//! A dataset is a list of `(P1, P2, S)` samples: a random program, a program
//! obtained from it by applying axioms, and the sequence of steps applied.
//! Two styles exist: `WholeProof` rewrites P1 in one depth-first pass, while
//! `AxiomStep` repeatedly picks any legal move on the current program.
//! Optionally, mutated non-equivalent pairs are emitted with the `Not_equal`
//! marker.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path as FsPath;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axiom::{apply_category, legal_categories, legal_moves};
use crate::expr::{Dir, Expr, Op, Path, ValueType};
use crate::numeric::{evaluate, NumericEnv, MAX_REDRAWS};
use crate::proof::{verify, Proof, ProofStep, NOT_EQUAL};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("cannot expand a sample without proof steps")]
    EmptyProof,
    #[error("produced {produced} of {wanted} samples within {attempts} attempts")]
    GenerationBudgetExceeded {
        wanted: usize,
        produced: usize,
        attempts: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenMode {
    AxiomStep,
    WholeProof,
}

/// Generation parameters. Every field has a default, so a JSON config file
/// only needs the keys it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// Probability that a child of the root is an operator.
    pub initial_child_prob: f64,
    /// Subtracted from the child probability at each level.
    pub prob_decrement_per_level: f64,
    /// Probability of applying an applicable axiom when considered.
    pub apply_prob: f64,
    /// AxiomStep style: probability of continuing after an applied step.
    pub continue_prob: f64,
    /// Probability of keeping a sample whose proof is shorter than
    /// `max_proof_len`.
    pub short_proof_keep_prob: f64,
    pub max_proof_len: usize,
    pub max_nodes: usize,
    pub max_depth: usize,
    pub max_pair_tokens: usize,
    pub mode: GenMode,
    pub allow_illegal: bool,
    /// Share of negative samples when `allow_illegal` is set.
    pub negative_fraction: f64,
    /// Dimension of the numeric check for negatives.
    pub numeric_dimension: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig::axiom_step10()
    }
}

impl GenConfig {
    pub fn axiom_step10() -> Self {
        GenConfig {
            initial_child_prob: 0.94,
            prob_decrement_per_level: 0.19,
            apply_prob: 0.5,
            continue_prob: 0.85,
            short_proof_keep_prob: 0.75,
            max_proof_len: 10,
            max_nodes: 50,
            max_depth: 7,
            max_pair_tokens: 100,
            mode: GenMode::AxiomStep,
            allow_illegal: false,
            negative_fraction: 0.5,
            numeric_dimension: 4,
            seed: 0,
        }
    }

    pub fn axiom_step5() -> Self {
        GenConfig {
            max_proof_len: 5,
            max_nodes: 25,
            max_depth: 6,
            ..Self::axiom_step10()
        }
    }

    pub fn whole_proof10() -> Self {
        GenConfig {
            mode: GenMode::WholeProof,
            ..Self::axiom_step10()
        }
    }

    pub fn whole_proof5() -> Self {
        GenConfig {
            mode: GenMode::WholeProof,
            ..Self::axiom_step5()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "axiomstep10" => Some(Self::axiom_step10()),
            "axiomstep5" => Some(Self::axiom_step5()),
            "wholeproof10" => Some(Self::whole_proof10()),
            "wholeproof5" => Some(Self::whole_proof5()),
            _ => None,
        }
    }

    pub fn from_json_file(path: &FsPath) -> Result<Self, GenError> {
        let cfg: GenConfig = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let probs = [
            ("initial_child_prob", self.initial_child_prob),
            ("prob_decrement_per_level", self.prob_decrement_per_level),
            ("apply_prob", self.apply_prob),
            ("continue_prob", self.continue_prob),
            ("short_proof_keep_prob", self.short_proof_keep_prob),
            ("negative_fraction", self.negative_fraction),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        if self.max_proof_len == 0
            || self.max_nodes < 2
            || self.max_depth < 2
            || self.max_pair_tokens < 4
            || self.numeric_dimension < 2
        {
            return Err(GenError::InvalidConfig(
                "limits must be positive (nodes, depth >= 2; dimension >= 2)".into(),
            ));
        }
        Ok(())
    }
}

/// A `(P1, P2, S)` tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub p1: Expr,
    pub p2: Expr,
    pub proof: Proof,
    pub equivalent: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl Split {
    pub fn train_only(n: usize) -> Self {
        Split {
            train: n,
            valid: 0,
            test: 0,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    /// Train samples first, then validation, then test.
    pub samples: Vec<Sample>,
    pub config: GenConfig,
    pub split: Split,
}

impl Dataset {
    pub fn train(&self) -> &[Sample] {
        &self.samples[..self.split.train]
    }

    pub fn valid(&self) -> &[Sample] {
        &self.samples[self.split.train..self.split.train + self.split.valid]
    }

    pub fn test(&self) -> &[Sample] {
        &self.samples[self.split.train + self.split.valid..]
    }
}

// ---------------------------------------------------------------------------
// Programs

const BINARY_WEIGHT: u32 = 3;
const UNARY_WEIGHT: u32 = 1;

fn op_weight(op: Op) -> u32 {
    if op.arity() == 2 {
        BINARY_WEIGHT
    } else {
        UNARY_WEIGHT
    }
}

/// Operators able to produce `ty` (or any type at the root), with weights.
fn ops_for(ty: Option<ValueType>) -> Vec<(Op, u32)> {
    Op::ALL
        .into_iter()
        .filter(|op| ty.is_none_or(|t| op.signatures().iter().any(|(_, ret)| *ret == t)))
        .map(|op| (op, op_weight(op)))
        .collect()
}

fn pick_weighted<R: Rng + ?Sized>(items: &[(Op, u32)], rng: &mut R) -> Op {
    items
        .choose_weighted(rng, |(_, w)| *w)
        .expect("operator set is never empty")
        .0
}

fn random_terminal<R: Rng + ?Sized>(ty: ValueType, rng: &mut R) -> Expr {
    Expr::terminal(*ty.terminals().choose(rng).expect("each type has terminals"))
}

/// Random well-typed program with an operator at the root.
///
/// The root operator is drawn from all 16 operators (binary ones weighted 3,
/// unary 1). Each operand becomes an operator with probability `p`, starting
/// at `initial_child_prob` for the root's operands and dropping by
/// `prob_decrement_per_level` per level, and is otherwise a random terminal.
/// Trees with more than `max_nodes` nodes are redrawn.
pub fn gen_program<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Expr {
    loop {
        let e = gen_node(None, cfg.initial_child_prob, 1, cfg, rng);
        if e.node_count() <= cfg.max_nodes.max(2) {
            return e;
        }
    }
}

fn gen_node<R: Rng + ?Sized>(
    ty: Option<ValueType>,
    child_prob: f64,
    depth: usize,
    cfg: &GenConfig,
    rng: &mut R,
) -> Expr {
    let op = pick_weighted(&ops_for(ty), rng);
    let sigs: Vec<&[ValueType]> = op
        .signatures()
        .iter()
        .filter(|(_, ret)| ty.is_none_or(|t| *ret == t))
        .map(|(args, _)| *args)
        .collect();
    let args = *sigs.choose(rng).expect("op was chosen for this type");
    let children = args
        .iter()
        .map(|&arg| {
            if depth + 1 < cfg.max_depth && rng.gen::<f64>() < child_prob {
                gen_node(
                    Some(arg),
                    child_prob - cfg.prob_decrement_per_level,
                    depth + 1,
                    cfg,
                    rng,
                )
            } else {
                random_terminal(arg, rng)
            }
        })
        .collect();
    Expr::op(op, children).expect("generated operands follow the signature")
}

/// Random program of a given type with at most `max_depth` levels; used to
/// instantiate metavariables when fuzzing axioms.
pub fn gen_typed<R: Rng + ?Sized>(ty: ValueType, max_depth: usize, rng: &mut R) -> Expr {
    if max_depth <= 1 || rng.gen_bool(0.4) {
        return random_terminal(ty, rng);
    }
    let cfg = GenConfig {
        max_depth,
        initial_child_prob: 0.5,
        prob_decrement_per_level: 0.25,
        ..GenConfig::default()
    };
    gen_node(Some(ty), cfg.initial_child_prob, 1, &cfg, rng)
}

fn within_bounds(e: &Expr, cfg: &GenConfig) -> bool {
    e.node_count() <= cfg.max_nodes && e.depth() <= cfg.max_depth
}

// ---------------------------------------------------------------------------
// Rewrite sequences

/// One depth-first pass over `p1`. At each node the applicable categories
/// are considered in category order and each is applied with probability
/// `apply_prob`; at most one rewrite happens per visited node, after which
/// the operands of the rewritten node are visited. Paths are taken on the
/// current program, so later steps see earlier rewrites.
pub fn gen_whole_proof<R: Rng + ?Sized>(p1: &Expr, cfg: &GenConfig, rng: &mut R) -> (Expr, Proof) {
    let mut cur = p1.clone();
    let mut steps = Vec::new();
    let mut seen = HashSet::from([p1.clone()]);
    whole_proof_visit(&mut cur, Path::root(), cfg, rng, &mut steps, &mut seen);
    (cur, Proof::Steps(steps))
}

fn whole_proof_visit<R: Rng + ?Sized>(
    cur: &mut Expr,
    path: Path,
    cfg: &GenConfig,
    rng: &mut R,
    steps: &mut Vec<ProofStep>,
    seen: &mut HashSet<Expr>,
) {
    if steps.len() >= cfg.max_proof_len {
        return;
    }
    let node = cur.node_at(&path).expect("visited paths exist");
    for (category, _) in legal_categories(node) {
        if !rng.gen_bool(cfg.apply_prob) {
            continue;
        }
        let (next, _) = apply_category(cur, &path, category).expect("category is legal here");
        if !within_bounds(&next, cfg) || seen.contains(&next) {
            continue;
        }
        seen.insert(next.clone());
        *cur = next;
        steps.push(ProofStep::new(path.clone(), category));
        break;
    }
    let arity = cur
        .node_at(&path)
        .expect("rewrite keeps the path")
        .children()
        .len();
    for i in 0..arity {
        let dir = if i == 0 { Dir::Left } else { Dir::Right };
        whole_proof_visit(cur, path.child(dir), cfg, rng, steps, seen);
    }
}

/// Repeatedly draws a uniformly random legal move on the current program.
/// A drawn move is applied with probability `apply_prob`; after each applied
/// step the sequence continues with probability `continue_prob`, up to
/// `max_proof_len` steps. Moves that would exceed the size bounds or revisit
/// an earlier program are skipped. Stops early when no legal move exists.
pub fn gen_axiom_steps<R: Rng + ?Sized>(p1: &Expr, cfg: &GenConfig, rng: &mut R) -> (Expr, Proof) {
    let mut cur = p1.clone();
    let mut steps = Vec::new();
    let mut seen = HashSet::from([p1.clone()]);
    let max_draws = 8 * cfg.max_proof_len;
    for _ in 0..max_draws {
        if steps.len() >= cfg.max_proof_len {
            break;
        }
        let moves = legal_moves(&cur);
        let Some(mv) = moves.choose(rng) else {
            break;
        };
        if !rng.gen_bool(cfg.apply_prob) {
            continue;
        }
        let next = mv.apply(&cur).expect("legal move applies");
        if !within_bounds(&next, cfg) || seen.contains(&next) {
            continue;
        }
        seen.insert(next.clone());
        steps.push(ProofStep::new(mv.path.clone(), mv.category));
        cur = next;
        if !rng.gen_bool(cfg.continue_prob) {
            break;
        }
    }
    (cur, Proof::Steps(steps))
}

// ---------------------------------------------------------------------------
// Negatives

/// A semantics-changing edit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Operands of a subtraction swapped.
    CommuteSubtraction(Path),
    /// Operator replaced by another accepting the same operands.
    SwapOperator { path: Path, from: Op, to: Op },
}

/// A non-equivalent pair built by mutating P1 and then applying legal
/// rewrites (`rewrites`, relative to the mutated program).
#[derive(Clone, Debug)]
pub struct NegativePair {
    pub p2: Expr,
    pub proof: Proof,
    pub mutation: Mutation,
    pub rewrites: Vec<ProofStep>,
}

const SCALAR_BINARY: [Op; 4] = [Op::AddS, Op::SubS, Op::MulS, Op::DivS];
const MATRIX_BINARY: [Op; 3] = [Op::AddM, Op::SubM, Op::MulM];
const VECTOR_BINARY: [Op; 2] = [Op::AddV, Op::SubV];
const SCALAR_UNARY: [Op; 2] = [Op::InvS, Op::NegS];
const MATRIX_UNARY: [Op; 3] = [Op::InvM, Op::NegM, Op::TrnM];

fn swap_group(op: Op) -> &'static [Op] {
    [
        &SCALAR_BINARY[..],
        &MATRIX_BINARY[..],
        &VECTOR_BINARY[..],
        &SCALAR_UNARY[..],
        &MATRIX_UNARY[..],
    ]
    .into_iter()
    .find(|g| g.contains(&op))
    .unwrap_or(&[])
}

/// All single mutations available on `e`, with their results.
pub fn candidate_mutations(e: &Expr) -> Vec<(Mutation, Expr)> {
    let mut out = Vec::new();
    for path in e.paths() {
        let node = e.node_at(&path).expect("preorder paths are valid");
        let Some(op) = node.as_op() else { continue };
        let kids = node.children();
        if matches!(op, Op::SubS | Op::SubM | Op::SubV) && kids[0] != kids[1] {
            let swapped = Expr::op(op, vec![kids[1].clone(), kids[0].clone()])
                .expect("subtraction operands share a type");
            out.push((
                Mutation::CommuteSubtraction(path.clone()),
                e.replace_at(&path, swapped).expect("same type"),
            ));
        }
        for &to in swap_group(op) {
            if to == op {
                continue;
            }
            if let Ok(sub) = Expr::op(to, kids.to_vec()) {
                if let Ok(mutated) = e.replace_at(&path, sub) {
                    out.push((
                        Mutation::SwapOperator {
                            path: path.clone(),
                            from: op,
                            to,
                        },
                        mutated,
                    ));
                }
            }
        }
    }
    out
}

/// True if some environment among `trials` separates `a` and `b` by a
/// relative error above `tolerance`.
pub fn differs_numerically<R: Rng + ?Sized>(
    a: &Expr,
    b: &Expr,
    dimension: usize,
    trials: usize,
    tolerance: f64,
    rng: &mut R,
) -> bool {
    for _ in 0..trials {
        for _ in 0..MAX_REDRAWS {
            let env = NumericEnv::random(dimension, rng);
            if let (Ok(x), Ok(y)) = (evaluate(a, &env), evaluate(b, &env)) {
                if x.relative_error(&y) > tolerance {
                    return true;
                }
                break;
            }
        }
    }
    false
}

/// Trials and tolerance used to confirm a negative pair.
pub const NEGATIVE_CHECK_TRIALS: usize = 100;
pub const NEGATIVE_CHECK_TOLERANCE: f64 = 1e-3;

/// Up to `trials` environments under which `e` evaluates, paired with its
/// value. Gives up early when `e` fails in most of the first draws.
fn reference_values<R: Rng + ?Sized>(
    e: &Expr,
    dimension: usize,
    trials: usize,
    rng: &mut R,
) -> Vec<(NumericEnv, crate::numeric::Value)> {
    let mut out = Vec::with_capacity(trials);
    let mut failures = 0;
    while out.len() < trials && failures < MAX_REDRAWS * 2 {
        let env = NumericEnv::random(dimension, rng);
        match evaluate(e, &env) {
            Ok(v) => out.push((env, v)),
            Err(_) => failures += 1,
        }
    }
    out
}

/// Applies one random mutation plus optional legal rewrites, retrying until
/// the numeric check confirms the pair differs. `None` if no mutation of
/// `p1` could be confirmed.
pub fn gen_negative<R: Rng + ?Sized>(
    p1: &Expr,
    cfg: &GenConfig,
    rng: &mut R,
) -> Option<NegativePair> {
    let mut cands = candidate_mutations(p1);
    if cands.is_empty() {
        return None;
    }
    let reference = reference_values(p1, cfg.numeric_dimension, NEGATIVE_CHECK_TRIALS, rng);
    if reference.is_empty() {
        return None;
    }
    cands.shuffle(rng);
    for (mutation, mutated) in cands.into_iter().take(20) {
        let (p2, rewrites) = if rng.gen_bool(0.5) {
            let (p2, proof) = gen_axiom_steps(&mutated, cfg, rng);
            (p2, proof.steps().unwrap_or_default().to_vec())
        } else {
            (mutated, Vec::new())
        };
        if p2 == *p1 || !within_bounds(&p2, cfg) {
            continue;
        }
        let differs = reference.iter().any(|(env, v1)| {
            evaluate(&p2, env).is_ok_and(|v2| v1.relative_error(&v2) > NEGATIVE_CHECK_TOLERANCE)
        });
        if differs {
            return Some(NegativePair {
                p2,
                proof: Proof::NotEqual,
                mutation,
                rewrites,
            });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Samples and datasets

/// Splits an N-step sample into N single-step samples: the i-th pairs the
/// program after i-1 steps with P2 and carries the i-th step.
pub fn expand_axiom_steps(s: &Sample) -> Result<Vec<Sample>, GenError> {
    let steps = match &s.proof {
        Proof::Steps(st) if !st.is_empty() && s.equivalent => st,
        _ => return Err(GenError::EmptyProof),
    };
    let mut out = Vec::with_capacity(steps.len());
    let mut cur = s.p1.clone();
    for step in steps {
        out.push(Sample {
            p1: cur.clone(),
            p2: s.p2.clone(),
            proof: Proof::Steps(vec![step.clone()]),
            equivalent: true,
        });
        cur = crate::proof::apply_step(&cur, step)
            .map_err(|_| GenError::EmptyProof)?
            .0;
    }
    Ok(out)
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One generation attempt; `None` when pruned.
pub fn gen_candidate<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Option<Sample> {
    let p1 = gen_program(cfg, rng);
    if !within_bounds(&p1, cfg) {
        return None;
    }
    let sample = if cfg.allow_illegal && rng.gen_bool(cfg.negative_fraction) {
        let neg = gen_negative(&p1, cfg, rng)?;
        Sample {
            p1,
            p2: neg.p2,
            proof: Proof::NotEqual,
            equivalent: false,
        }
    } else {
        let (p2, proof) = match cfg.mode {
            GenMode::AxiomStep => gen_axiom_steps(&p1, cfg, rng),
            GenMode::WholeProof => gen_whole_proof(&p1, cfg, rng),
        };
        if proof.is_empty() || p2 == p1 {
            return None;
        }
        if proof.len() < cfg.max_proof_len && !rng.gen_bool(cfg.short_proof_keep_prob) {
            return None;
        }
        Sample {
            p1,
            p2,
            proof,
            equivalent: true,
        }
    };
    if !within_bounds(&sample.p2, cfg)
        || sample.p1.node_count() + sample.p2.node_count() > cfg.max_pair_tokens
    {
        return None;
    }
    Some(sample)
}

const BATCH: usize = 512;

/// Generates `split.total()` samples with unique P1.
///
/// Attempt `i` draws from its own ChaCha stream `i` of `cfg.seed`, and
/// attempts are accepted in index order, so the result does not depend on
/// `jobs`.
pub fn build_dataset(cfg: &GenConfig, split: Split, jobs: usize) -> Result<Dataset, GenError> {
    cfg.validate()?;
    let wanted = split.total();
    let budget = 1000 * wanted.max(1) + 100_000;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| GenError::InvalidConfig(e.to_string()))?;

    let mut samples = Vec::with_capacity(wanted);
    let mut seen_p1 = HashSet::new();
    let mut next = 0usize;
    while samples.len() < wanted {
        if next >= budget {
            return Err(GenError::GenerationBudgetExceeded {
                wanted,
                produced: samples.len(),
                attempts: next,
            });
        }
        let batch: Vec<Option<Sample>> = pool.install(|| {
            (next..next + BATCH)
                .into_par_iter()
                .map(|i| gen_candidate(cfg, &mut stream_rng(cfg.seed, i as u64)))
                .collect()
        });
        next += BATCH;
        for s in batch.into_iter().flatten() {
            if samples.len() == wanted {
                break;
            }
            if seen_p1.insert(s.p1.clone()) {
                samples.push(s);
            }
        }
    }
    Ok(Dataset {
        samples,
        config: cfg.clone(),
        split,
    })
}

/// A bound violated by a sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub what: String,
}

/// Checks every dataset invariant; returns all violations found.
pub fn audit(samples: &[Sample], cfg: &GenConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut flag = |index, what: String| out.push(Violation { index, what });
    for (i, s) in samples.iter().enumerate() {
        if !seen.insert(&s.p1) {
            flag(i, "duplicate P1".into());
        }
        for (name, e) in [("P1", &s.p1), ("P2", &s.p2)] {
            if e.node_count() > cfg.max_nodes {
                flag(i, format!("{name} has {} nodes", e.node_count()));
            }
            if e.depth() > cfg.max_depth {
                flag(i, format!("{name} has depth {}", e.depth()));
            }
        }
        let tokens = s.p1.node_count() + s.p2.node_count();
        if tokens > cfg.max_pair_tokens {
            flag(i, format!("pair has {tokens} tokens"));
        }
        if s.p1 == s.p2 {
            flag(i, "P1 and P2 are lexically equal".into());
        }
        match (&s.proof, s.equivalent) {
            (Proof::Steps(st), true) => {
                if st.is_empty() || st.len() > cfg.max_proof_len {
                    flag(i, format!("proof length {}", st.len()));
                }
                if !verify(&s.p1, &s.p2, &s.proof).is_proven() {
                    flag(i, "proof does not verify".into());
                }
            }
            (Proof::NotEqual, false) => {}
            _ => flag(i, "equivalence flag disagrees with proof".into()),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Files

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProofField {
    Steps(Vec<String>),
    Marker(String),
}

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    p1: String,
    p2: String,
    proof: ProofField,
    equivalent: bool,
}

impl From<&Sample> for SampleRecord {
    fn from(s: &Sample) -> Self {
        SampleRecord {
            p1: s.p1.render(),
            p2: s.p2.render(),
            proof: match &s.proof {
                Proof::NotEqual => ProofField::Marker(NOT_EQUAL.to_string()),
                Proof::Steps(st) => ProofField::Steps(st.iter().map(ProofStep::render).collect()),
            },
            equivalent: s.equivalent,
        }
    }
}

impl SampleRecord {
    fn into_sample(self) -> Result<Sample, String> {
        let p1 = Expr::parse(&self.p1).map_err(|e| e.to_string())?;
        let p2 = Expr::parse(&self.p2).map_err(|e| e.to_string())?;
        let proof = match self.proof {
            ProofField::Marker(m) if m == NOT_EQUAL => Proof::NotEqual,
            ProofField::Marker(m) => return Err(format!("unknown proof marker `{m}`")),
            ProofField::Steps(st) => Proof::Steps(
                st.iter()
                    .map(|s| ProofStep::parse(s))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?,
            ),
        };
        if self.equivalent == matches!(proof, Proof::NotEqual) {
            return Err("equivalent flag disagrees with proof".into());
        }
        Ok(Sample {
            p1,
            p2,
            proof,
            equivalent: self.equivalent,
        })
    }
}

/// Writes one JSON object per line:
/// `{"p1": .., "p2": .., "proof": [steps] | "Not_equal", "equivalent": bool}`.
pub fn write_jsonl<W: Write>(samples: &[Sample], out: W) -> Result<(), GenError> {
    let mut w = BufWriter::new(out);
    for s in samples {
        serde_json::to_writer(&mut w, &SampleRecord::from(s))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: io::Read>(input: R) -> Result<Vec<Sample>, GenError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line).map_err(|e| GenError::BadRecord {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec.into_sample().map_err(|message| GenError::BadRecord {
            line: i + 1,
            message,
        })?);
    }
    Ok(out)
}

/// Separator between the two programs on a source line.
pub const SRC_SEPARATOR: &str = " | ";
/// Separator between steps on a target line.
pub const TGT_STEP_SEPARATOR: &str = " ; ";

/// Source and target lines for sequence-model trainers. With `expand`, each
/// equivalent sample contributes one line pair per proof step.
pub fn src_tgt_lines(samples: &[Sample], expand: bool) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut push = |s: &Sample| {
        let tgt = match &s.proof {
            Proof::NotEqual => NOT_EQUAL.to_string(),
            Proof::Steps(st) => st
                .iter()
                .map(ProofStep::render)
                .collect::<Vec<_>>()
                .join(TGT_STEP_SEPARATOR),
        };
        out.push((format!("{}{SRC_SEPARATOR}{}", s.p1, s.p2), tgt));
    };
    for s in samples {
        match expand_axiom_steps(s) {
            Ok(parts) if expand => parts.iter().for_each(&mut push),
            _ => push(s),
        }
    }
    out
}

/// Writes `<prefix>.src` and `<prefix>.tgt`.
pub fn write_src_tgt(samples: &[Sample], expand: bool, prefix: &str) -> Result<(), GenError> {
    let mut src = BufWriter::new(File::create(format!("{prefix}.src"))?);
    let mut tgt = BufWriter::new(File::create(format!("{prefix}.tgt"))?);
    for (s, t) in src_tgt_lines(samples, expand) {
        writeln!(src, "{s}")?;
        writeln!(tgt, "{t}")?;
    }
    src.flush()?;
    tgt.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiom::AxiomCategory;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_child_prob_gives_depth_two() {
        let cfg = GenConfig {
            initial_child_prob: 0.0,
            ..GenConfig::default()
        };
        let mut r = rng(1);
        for _ in 0..200 {
            assert_eq!(gen_program(&cfg, &mut r).depth(), 2);
        }
    }

    #[test]
    fn default_depth_bound() {
        let cfg = GenConfig::default();
        let mut r = rng(2);
        for _ in 0..2000 {
            assert!(gen_program(&cfg, &mut r).depth() <= 7);
        }
    }

    #[test]
    fn whole_proof_edge_cases() {
        let mut r = rng(3);
        let none = GenConfig {
            apply_prob: 0.0,
            ..GenConfig::whole_proof10()
        };
        let e = p("( *s a ( +s b c ) )");
        assert_eq!(
            gen_whole_proof(&e, &none, &mut r),
            (e.clone(), Proof::Steps(vec![]))
        );

        let all = GenConfig {
            apply_prob: 1.0,
            ..GenConfig::whole_proof10()
        };
        let (p2, proof) = gen_whole_proof(&p("( +v v o )"), &all, &mut r);
        assert_eq!(p2, p("v"));
        assert_eq!(proof, Proof::parse("NeutralOp").unwrap());
    }

    #[test]
    fn axiom_steps_edge_cases() {
        let mut r = rng(4);
        let cfg = GenConfig::default();
        assert_eq!(
            gen_axiom_steps(&p("a"), &cfg, &mut r),
            (p("a"), Proof::Steps(vec![]))
        );
        let none = GenConfig {
            apply_prob: 0.0,
            ..cfg.clone()
        };
        let e = p("( +s a b )");
        assert_eq!(gen_axiom_steps(&e, &none, &mut r).1.len(), 0);
    }

    #[test]
    fn generated_proofs_verify() {
        let mut r = rng(5);
        for cfg in [GenConfig::axiom_step10(), GenConfig::whole_proof10()] {
            for _ in 0..300 {
                let p1 = gen_program(&cfg, &mut r);
                let (p2, proof) = match cfg.mode {
                    GenMode::AxiomStep => gen_axiom_steps(&p1, &cfg, &mut r),
                    GenMode::WholeProof => gen_whole_proof(&p1, &cfg, &mut r),
                };
                assert!(proof.len() <= cfg.max_proof_len);
                assert!(
                    verify(&p1, &p2, &proof).is_proven(),
                    "{p1} -> {p2} by {proof}"
                );
            }
        }
    }

    #[test]
    fn subtraction_commute_negative() {
        let muts = candidate_mutations(&p("( -s a b )"));
        assert!(muts.contains(&(Mutation::CommuteSubtraction(Path::root()), p("( -s b a )"))));
        // equal operands cannot be told apart by swapping
        assert!(!candidate_mutations(&p("( -s a a )"))
            .iter()
            .any(|(m, _)| matches!(m, Mutation::CommuteSubtraction(_))));
        let mut r = rng(6);
        assert!(differs_numerically(
            &p("( -s a b )"),
            &p("( -s b a )"),
            4,
            100,
            1e-3,
            &mut r
        ));
    }

    #[test]
    fn negatives_differ() {
        let cfg = GenConfig {
            allow_illegal: true,
            ..GenConfig::default()
        };
        let mut r = rng(7);
        let mut made = 0;
        for _ in 0..100 {
            let p1 = gen_program(&cfg, &mut r);
            if let Some(neg) = gen_negative(&p1, &cfg, &mut r) {
                made += 1;
                assert_eq!(neg.proof, Proof::NotEqual);
                assert_ne!(neg.p2, p1);
            }
        }
        assert!(made > 50);
    }

    #[test]
    fn expand_motivation() {
        let s = Sample {
            p1: p("( *s a ( +s ( *s 1 b ) ( *s 1 c ) ) )"),
            p2: p("( +s ( *s a c ) ( *s a b ) )"),
            proof: Proof::parse(
                "right left NeutralOp;right right NeutralOp;DistributeRight;Commute",
            )
            .unwrap(),
            equivalent: true,
        };
        let parts = expand_axiom_steps(&s).unwrap();
        assert_eq!(parts.len(), 4);
        assert_eq!(parts[1].p1, p("( *s a ( +s b ( *s 1 c ) ) )"));
        let mut cur = s.p1.clone();
        for part in &parts {
            assert_eq!(part.p1, cur);
            cur = crate::proof::apply_step(&cur, &part.proof.steps().unwrap()[0])
                .unwrap()
                .0;
        }
        assert_eq!(cur, s.p2);

        let single = Sample {
            p1: p("( +s a b )"),
            p2: p("( +s b a )"),
            proof: Proof::parse("Commute").unwrap(),
            equivalent: true,
        };
        assert_eq!(expand_axiom_steps(&single).unwrap(), vec![single.clone()]);
        let empty = Sample {
            proof: Proof::Steps(vec![]),
            ..single
        };
        assert!(matches!(
            expand_axiom_steps(&empty),
            Err(GenError::EmptyProof)
        ));
    }

    #[test]
    fn small_dataset_is_clean_and_deterministic() {
        let cfg = GenConfig {
            seed: 11,
            ..GenConfig::axiom_step5()
        };
        let a = build_dataset(&cfg, Split::train_only(200), 1).unwrap();
        let b = build_dataset(&cfg, Split::train_only(200), 4).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(audit(&a.samples, &cfg).is_empty());
        assert!(a.samples.iter().all(|s| (1..=5).contains(&s.proof.len())));
    }

    #[test]
    fn jsonl_round_trip() {
        let samples = vec![
            Sample {
                p1: p("( +s a b )"),
                p2: p("( +s b a )"),
                proof: Proof::parse("Commute").unwrap(),
                equivalent: true,
            },
            Sample {
                p1: p("( -s a b )"),
                p2: p("( -s b a )"),
                proof: Proof::NotEqual,
                equivalent: false,
            },
        ];
        let mut buf = Vec::new();
        write_jsonl(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"p1":"( +s a b )","p2":"( +s b a )","proof":["Commute"],"equivalent":true}"#
        );
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .contains(r#""proof":"Not_equal""#));
        assert_eq!(read_jsonl(&buf[..]).unwrap(), samples);
        assert!(read_jsonl(&b"{\"p1\":1}\n"[..]).is_err());
    }

    #[test]
    fn src_tgt_expansion() {
        let s = Sample {
            p1: p("( *s a ( +s ( *s 1 b ) c ) )"),
            p2: p("( +s ( *s a b ) ( *s a c ) )"),
            proof: Proof::parse("right left NeutralOp;DistributeRight").unwrap(),
            equivalent: true,
        };
        let whole = src_tgt_lines(std::slice::from_ref(&s), false);
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].1, "right left NeutralOp ; DistributeRight");
        assert_eq!(
            whole[0].0,
            "( *s a ( +s ( *s 1 b ) c ) ) | ( +s ( *s a b ) ( *s a c ) )"
        );
        let steps = src_tgt_lines(&[s], true);
        assert_eq!(steps.len(), 2);
        for (_, t) in steps {
            let cats = t
                .split_whitespace()
                .filter(|w| w.parse::<AxiomCategory>().is_ok())
                .count();
            assert_eq!(cats, 1);
        }
    }

    #[test]
    fn config_validation() {
        let bad = GenConfig {
            apply_prob: 1.5,
            ..GenConfig::default()
        };
        assert!(bad.validate().is_err());
        let cfg: GenConfig = serde_json::from_str(r#"{"max_proof_len": 5, "seed": 9}"#).unwrap();
        assert_eq!(cfg.max_proof_len, 5);
        assert_eq!(cfg.initial_child_prob, 0.94);
        assert!(serde_json::from_str::<GenConfig>(r#"{"bogus": 1}"#).is_err());
        assert_eq!(
            GenConfig::preset("WholeProof5"),
            Some(GenConfig::whole_proof5())
        );
    }
}
