//! Numeric interpreter used as a semantics oracle.
//!
//! Every variable is bound to a random value of the configured dimension;
//! the constants `0 1 o O I` have their fixed meanings. Two programs that
//! evaluate to the same value under many random environments are taken to be
//! semantically equal.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::expr::{Expr, Op, Terminal, Token};

/// Denominators smaller than this are rejected.
pub const MIN_DENOMINATOR: f64 = 1e-9;
/// Condition number above which a drawn matrix is redrawn.
pub const MAX_DRAW_CONDITION: f64 = 1e3;
/// Condition number above which inversion is reported as singular. Rounding
/// error of nested inversions grows with its square, so anything larger can
/// exceed the 1e-6 comparison tolerance on its own.
pub const MAX_INVERT_CONDITION: f64 = 1e4;
/// Redraws attempted before a trial is skipped.
pub const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("matrix is singular or too badly conditioned to invert")]
    SingularMatrix,
    #[error("division by a value too close to zero")]
    DivisionNearZero,
    #[error("terminal `{0}` is not bound")]
    Unbound(Terminal),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl Value {
    fn max_abs(&self) -> f64 {
        match self {
            Value::Scalar(x) => x.abs(),
            Value::Vector(v) => v.amax(),
            Value::Matrix(m) => m.amax(),
        }
    }

    /// Max-norm distance scaled by `max(1, |self|, |other|)`; infinite when
    /// the kinds differ.
    pub fn relative_error(&self, other: &Value) -> f64 {
        let diff = match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => (a - b).abs(),
            (Value::Vector(a), Value::Vector(b)) => (a - b).amax(),
            (Value::Matrix(a), Value::Matrix(b)) => (a - b).amax(),
            _ => return f64::INFINITY,
        };
        let scale = 1f64.max(self.max_abs()).max(other.max_abs());
        if diff.is_nan() {
            f64::INFINITY
        } else {
            diff / scale
        }
    }
}

/// Variable bindings for the interpreter.
#[derive(Debug, Clone)]
pub struct NumericEnv {
    dimension: usize,
    bindings: HashMap<Terminal, Value>,
}

impl NumericEnv {
    /// Random environment with entries drawn from `[-2, -0.5] ∪ [0.5, 2]`;
    /// matrices are redrawn until their condition number is below
    /// [`MAX_DRAW_CONDITION`].
    pub fn random<R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> NumericEnv {
        assert!(dimension >= 1, "dimension must be positive");
        let mut bindings = HashMap::new();
        for t in Terminal::all().filter(|t| !t.is_constant()) {
            let v = match t.value_type() {
                crate::ValueType::Scalar => Value::Scalar(draw_entry(rng)),
                crate::ValueType::Vector => {
                    Value::Vector(DVector::from_fn(dimension, |_, _| draw_entry(rng)))
                }
                crate::ValueType::Matrix => Value::Matrix(draw_matrix(dimension, rng)),
            };
            bindings.insert(t, v);
        }
        Self::with_bindings(dimension, bindings)
    }

    /// Environment from explicit variable bindings; constants are filled in.
    pub fn with_bindings(dimension: usize, mut bindings: HashMap<Terminal, Value>) -> NumericEnv {
        bindings.insert(Terminal::ZERO, Value::Scalar(0.0));
        bindings.insert(Terminal::ONE, Value::Scalar(1.0));
        bindings.insert(
            Terminal::ZERO_VECTOR,
            Value::Vector(DVector::zeros(dimension)),
        );
        bindings.insert(
            Terminal::ZERO_MATRIX,
            Value::Matrix(DMatrix::zeros(dimension, dimension)),
        );
        bindings.insert(
            Terminal::IDENTITY,
            Value::Matrix(DMatrix::identity(dimension, dimension)),
        );
        NumericEnv {
            dimension,
            bindings,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, t: Terminal) -> Option<&Value> {
        self.bindings.get(&t)
    }
}

fn draw_entry<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mag = rng.gen_range(0.5..=2.0);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn draw_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| draw_entry(rng));
        if condition_number(&m) < MAX_DRAW_CONDITION {
            return m;
        }
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn scalar_denominator(x: f64) -> Result<f64, EvalError> {
    if x.abs() < MIN_DENOMINATOR || !x.is_finite() {
        Err(EvalError::DivisionNearZero)
    } else {
        Ok(x)
    }
}

fn invert(m: DMatrix<f64>) -> Result<DMatrix<f64>, EvalError> {
    if condition_number(&m) > MAX_INVERT_CONDITION {
        return Err(EvalError::SingularMatrix);
    }
    m.try_inverse().ok_or(EvalError::SingularMatrix)
}

/// Evaluates `e` under `env`. The result kind always equals `e.value_type()`.
pub fn evaluate(e: &Expr, env: &NumericEnv) -> Result<Value, EvalError> {
    let op = match e.token() {
        Token::Terminal(t) => return env.get(t).cloned().ok_or(EvalError::Unbound(t)),
        Token::Op(op) => op,
    };
    let args = e
        .children()
        .iter()
        .map(|c| evaluate(c, env))
        .collect::<Result<Vec<_>, _>>()?;
    use Value::{Matrix as M, Scalar as S, Vector as V};
    let mut args = args.into_iter();
    let first = args.next().expect("operators have at least one operand");
    let second = args.next();
    let v = match (op, first, second) {
        (Op::AddS, S(a), Some(S(b))) => S(a + b),
        (Op::SubS, S(a), Some(S(b))) => S(a - b),
        (Op::MulS, S(a), Some(S(b))) => S(a * b),
        (Op::DivS, S(a), Some(S(b))) => S(a / scalar_denominator(b)?),
        (Op::InvS, S(a), None) => S(1.0 / scalar_denominator(a)?),
        (Op::NegS, S(a), None) => S(-a),
        (Op::AddM, M(a), Some(M(b))) => M(a + b),
        (Op::SubM, M(a), Some(M(b))) => M(a - b),
        (Op::MulM, M(a), Some(M(b))) => M(a * b),
        (Op::MulM, S(a), Some(M(b))) => M(b * a),
        (Op::MulM, M(a), Some(S(b))) => M(a * b),
        (Op::InvM, M(a), None) => M(invert(a)?),
        (Op::NegM, M(a), None) => M(-a),
        (Op::TrnM, M(a), None) => M(a.transpose()),
        (Op::AddV, V(a), Some(V(b))) => V(a + b),
        (Op::SubV, V(a), Some(V(b))) => V(a - b),
        (Op::MulV, V(a), Some(V(b))) => S(a.dot(&b)),
        (Op::MulV, S(a), Some(V(b))) => V(b * a),
        (Op::MulV, V(a), Some(S(b))) => V(a * b),
        (Op::MulV, M(a), Some(V(b))) => V(a * b),
        (Op::NegV, V(a), None) => V(-a),
        (op, _, _) => unreachable!("ill-typed `{op}` node survived construction"),
    };
    Ok(v)
}

/// Outcome of comparing two programs over many random environments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzComparison {
    /// Trials where both sides evaluated.
    pub trials: usize,
    /// Trials skipped after exhausting redraws.
    pub skipped: usize,
    pub max_relative_error: f64,
}

/// Evaluates `a` and `b` under `trials` random environments, redrawing an
/// environment up to [`MAX_REDRAWS`] times when either side fails.
pub fn fuzz_compare<R: Rng + ?Sized>(
    a: &Expr,
    b: &Expr,
    dimension: usize,
    trials: usize,
    rng: &mut R,
) -> FuzzComparison {
    let mut out = FuzzComparison {
        trials: 0,
        skipped: 0,
        max_relative_error: 0.0,
    };
    for _ in 0..trials {
        let mut done = false;
        for _ in 0..MAX_REDRAWS {
            let env = NumericEnv::random(dimension, rng);
            if let (Ok(x), Ok(y)) = (evaluate(a, &env), evaluate(b, &env)) {
                out.trials += 1;
                out.max_relative_error = out.max_relative_error.max(x.relative_error(&y));
                done = true;
                break;
            }
        }
        if !done {
            out.skipped += 1;
        }
    }
    out
}
