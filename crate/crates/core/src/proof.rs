//! Proof steps, replay and verification.
//!
//! A step is written as zero or more `left`/`right` tokens followed by one
//! category name, e.g. `right left NeutralOp`. Each step's path is absolute
//! from the root of the program produced by the previous step.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::axiom::{apply_category, AxiomCategory, AxiomError};
use crate::expr::{Dir, Expr, Path};

/// Marker used in files for a non-equivalent pair.
pub const NOT_EQUAL: &str = "Not_equal";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepSyntaxError {
    #[error("malformed proof step `{0}`")]
    BadStepSyntax(String),
    #[error("unknown axiom category `{0}`")]
    UnknownCategory(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProofStep {
    pub path: Path,
    pub category: AxiomCategory,
}

impl ProofStep {
    pub fn new(path: Path, category: AxiomCategory) -> Self {
        ProofStep { path, category }
    }

    pub fn parse(text: &str) -> Result<ProofStep, StepSyntaxError> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let Some((last, dirs)) = toks.split_last() else {
            return Err(StepSyntaxError::BadStepSyntax(text.to_string()));
        };
        let mut path = Vec::with_capacity(dirs.len());
        for d in dirs {
            path.push(match *d {
                "left" => Dir::Left,
                "right" => Dir::Right,
                _ => return Err(StepSyntaxError::BadStepSyntax(text.to_string())),
            });
        }
        let category = match last.parse::<AxiomCategory>() {
            Ok(c) => c,
            Err(_) if matches!(*last, "left" | "right") => {
                return Err(StepSyntaxError::BadStepSyntax(text.to_string()))
            }
            Err(_) => return Err(StepSyntaxError::UnknownCategory(last.to_string())),
        };
        Ok(ProofStep {
            path: path.into(),
            category,
        })
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.path.is_root() {
            write!(f, "{} ", self.path)?;
        }
        f.write_str(self.category.name())
    }
}

impl FromStr for ProofStep {
    type Err = StepSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProofStep::parse(s)
    }
}

/// A rewrite sequence, or the marker for a pair claimed not equivalent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Proof {
    Steps(Vec<ProofStep>),
    NotEqual,
}

impl Proof {
    pub fn steps(&self) -> Option<&[ProofStep]> {
        match self {
            Proof::Steps(s) => Some(s),
            Proof::NotEqual => None,
        }
    }

    pub fn len(&self) -> usize {
        self.steps().map_or(0, <[_]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses `step;step;...` or `Not_equal`. Empty text is the empty proof.
    pub fn parse(text: &str) -> Result<Proof, StepSyntaxError> {
        let t = text.trim();
        if t == NOT_EQUAL {
            return Ok(Proof::NotEqual);
        }
        if t.is_empty() {
            return Ok(Proof::Steps(Vec::new()));
        }
        t.split(';')
            .map(ProofStep::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(Proof::Steps)
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proof::NotEqual => f.write_str(NOT_EQUAL),
            Proof::Steps(steps) => {
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

/// Applies one step, resolving its category to the lowest matching id.
pub fn apply_step(e: &Expr, step: &ProofStep) -> Result<(Expr, u16), AxiomError> {
    apply_category(e, &step.path, step.category)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Proven,
    /// 1-based index of the first step that could not be applied.
    IllegalStep {
        index: usize,
        reason: String,
    },
    FinalMismatch {
        final_program: Expr,
    },
    /// The proof is the `Not_equal` marker, which certifies nothing.
    NotEqualClaim,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub step: ProofStep,
    pub resolved_id: u16,
    pub program: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyResult {
    pub outcome: VerifyOutcome,
    pub trace: Vec<TraceLine>,
}

impl VerifyResult {
    pub fn is_proven(&self) -> bool {
        self.outcome == VerifyOutcome::Proven
    }
}

impl fmt::Display for VerifyResult {
    /// One line per applied step, then the verdict.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.trace {
            writeln!(f, "{} | {} | {}", line.step, line.resolved_id, line.program)?;
        }
        match &self.outcome {
            VerifyOutcome::Proven => writeln!(f, "PROVEN"),
            VerifyOutcome::IllegalStep { index, reason } => {
                writeln!(f, "ILLEGAL {index}: {reason}")
            }
            VerifyOutcome::FinalMismatch { final_program } => {
                writeln!(f, "MISMATCH {final_program}")
            }
            VerifyOutcome::NotEqualClaim => writeln!(f, "MISMATCH {NOT_EQUAL}"),
        }
    }
}

/// Replays `proof` on `p1` and checks that the result is lexically `p2`.
pub fn verify(p1: &Expr, p2: &Expr, proof: &Proof) -> VerifyResult {
    let Proof::Steps(steps) = proof else {
        return VerifyResult {
            outcome: VerifyOutcome::NotEqualClaim,
            trace: Vec::new(),
        };
    };
    let mut trace = Vec::with_capacity(steps.len());
    let mut cur = p1.clone();
    for (i, step) in steps.iter().enumerate() {
        match apply_step(&cur, step) {
            Ok((next, id)) => {
                trace.push(TraceLine {
                    step: step.clone(),
                    resolved_id: id,
                    program: next.clone(),
                });
                cur = next;
            }
            Err(e) => {
                return VerifyResult {
                    outcome: VerifyOutcome::IllegalStep {
                        index: i + 1,
                        reason: e.to_string(),
                    },
                    trace,
                }
            }
        }
    }
    let outcome = if cur.lexically_equal(p2) {
        VerifyOutcome::Proven
    } else {
        VerifyOutcome::FinalMismatch { final_program: cur }
    };
    VerifyResult { outcome, trace }
}
