//! Typed expression trees over scalars, vectors and matrices.
//!
//! Programs are written in parenthesized prefix form, e.g.
//! `( *s a ( +s ( *s 1 b ) ( *s 1 c ) ) )`. The canonical rendering uses
//! single spaces and parenthesizes every operator application, so two trees
//! are lexically equal exactly when their canonical renderings are equal.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// The three value kinds of the language. Sizes are not tracked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueType {
    Scalar,
    Vector,
    Matrix,
}

impl ValueType {
    pub const ALL: [ValueType; 3] = [ValueType::Scalar, ValueType::Vector, ValueType::Matrix];

    /// Terminal symbols of this kind, variables first.
    pub fn terminals(self) -> &'static [Terminal] {
        match self {
            ValueType::Scalar => &Terminal::SCALARS,
            ValueType::Vector => &Terminal::VECTORS,
            ValueType::Matrix => &Terminal::MATRICES,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Scalar => "scalar",
            ValueType::Vector => "vector",
            ValueType::Matrix => "matrix",
        })
    }
}

/// The 16 operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    AddS,
    SubS,
    MulS,
    DivS,
    InvS,
    NegS,
    AddM,
    SubM,
    MulM,
    InvM,
    NegM,
    TrnM,
    AddV,
    SubV,
    MulV,
    NegV,
}

impl Op {
    pub const ALL: [Op; 16] = [
        Op::AddS,
        Op::SubS,
        Op::MulS,
        Op::DivS,
        Op::InvS,
        Op::NegS,
        Op::AddM,
        Op::SubM,
        Op::MulM,
        Op::InvM,
        Op::NegM,
        Op::TrnM,
        Op::AddV,
        Op::SubV,
        Op::MulV,
        Op::NegV,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Op::AddS => "+s",
            Op::SubS => "-s",
            Op::MulS => "*s",
            Op::DivS => "/s",
            Op::InvS => "is",
            Op::NegS => "ns",
            Op::AddM => "+m",
            Op::SubM => "-m",
            Op::MulM => "*m",
            Op::InvM => "im",
            Op::NegM => "nm",
            Op::TrnM => "tm",
            Op::AddV => "+v",
            Op::SubV => "-v",
            Op::MulV => "*v",
            Op::NegV => "nv",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Op::InvS | Op::NegS | Op::InvM | Op::NegM | Op::TrnM | Op::NegV => 1,
            _ => 2,
        }
    }

    /// Every accepted operand signature with its result type.
    ///
    /// `*m` also scales by a scalar on either side; `*v` is the dot product on
    /// two vectors, scaling by a scalar on either side, or matrix-vector.
    pub fn signatures(self) -> &'static [(&'static [ValueType], ValueType)] {
        use ValueType::{Matrix as M, Scalar as S, Vector as V};
        match self {
            Op::AddS | Op::SubS | Op::MulS | Op::DivS => &[(&[S, S], S)],
            Op::InvS | Op::NegS => &[(&[S], S)],
            Op::AddM | Op::SubM => &[(&[M, M], M)],
            Op::MulM => &[(&[M, M], M), (&[S, M], M), (&[M, S], M)],
            Op::InvM | Op::NegM | Op::TrnM => &[(&[M], M)],
            Op::AddV | Op::SubV => &[(&[V, V], V)],
            Op::MulV => &[(&[V, V], S), (&[S, V], V), (&[V, S], V), (&[M, V], V)],
            Op::NegV => &[(&[V], V)],
        }
    }

    /// Result type for the given operand types, if the typing table allows it.
    pub fn result_type(self, operands: &[ValueType]) -> Option<ValueType> {
        self.signatures()
            .iter()
            .find(|(args, _)| *args == operands)
            .map(|(_, ret)| *ret)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One of the 20 terminal symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Terminal(u8);

impl Terminal {
    pub const SCALARS: [Terminal; 7] = [
        Terminal(b'a'),
        Terminal(b'b'),
        Terminal(b'c'),
        Terminal(b'd'),
        Terminal(b'e'),
        Terminal(b'0'),
        Terminal(b'1'),
    ];
    pub const MATRICES: [Terminal; 7] = [
        Terminal(b'A'),
        Terminal(b'B'),
        Terminal(b'C'),
        Terminal(b'D'),
        Terminal(b'E'),
        Terminal(b'O'),
        Terminal(b'I'),
    ];
    pub const VECTORS: [Terminal; 6] = [
        Terminal(b'v'),
        Terminal(b'w'),
        Terminal(b'x'),
        Terminal(b'y'),
        Terminal(b'z'),
        Terminal(b'o'),
    ];

    pub const ZERO: Terminal = Terminal(b'0');
    pub const ONE: Terminal = Terminal(b'1');
    pub const ZERO_MATRIX: Terminal = Terminal(b'O');
    pub const IDENTITY: Terminal = Terminal(b'I');
    pub const ZERO_VECTOR: Terminal = Terminal(b'o');

    pub fn all() -> impl Iterator<Item = Terminal> {
        Self::SCALARS
            .into_iter()
            .chain(Self::MATRICES)
            .chain(Self::VECTORS)
    }

    pub fn from_symbol(s: &str) -> Option<Terminal> {
        match s.as_bytes() {
            [c] => Self::all().find(|t| t.0 == *c),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        self.0 as char
    }

    pub fn value_type(self) -> ValueType {
        match self.0 {
            b'a'..=b'e' | b'0' | b'1' => ValueType::Scalar,
            b'A'..=b'E' | b'O' | b'I' => ValueType::Matrix,
            _ => ValueType::Vector,
        }
    }

    /// True for the fixed constants `0 1 O I o`.
    pub fn is_constant(self) -> bool {
        matches!(self.0, b'0' | b'1' | b'O' | b'I' | b'o')
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Op(Op),
    Terminal(Terminal),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Op(op) => op.fmt(f),
            Token::Terminal(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("operator `{op}` expects {expected} operand(s), found {found}")]
    ArityMismatch {
        op: Op,
        expected: usize,
        found: usize,
    },
    #[error("operator `{op}` does not accept operands ({operands})")]
    TypeError { op: Op, operands: String },
    #[error("cannot replace a {expected} subtree with a {found} one")]
    ReplaceTypeMismatch {
        expected: ValueType,
        found: ValueType,
    },
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("empty program text")]
    Empty,
    #[error("unexpected trailing input `{0}`")]
    TrailingInput(String),
    #[error("path `{0}` does not address a node")]
    InvalidPath(Path),
}

/// Step from a node to one of its children. A unary operator's only child is
/// reached with `Left`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Left,
    Right,
}

impl Dir {
    pub fn index(self) -> usize {
        match self {
            Dir::Left => 0,
            Dir::Right => 1,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Dir::Left => "left",
            Dir::Right => "right",
        }
    }
}

/// Address of a node as a sequence of moves from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<Dir>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[Dir] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, dir: Dir) -> Path {
        let mut steps = self.0.clone();
        steps.push(dir);
        Path(steps)
    }

    /// True if `self` equals `other` or lies beneath it.
    pub fn starts_with(&self, other: &Path) -> bool {
        self.0.starts_with(&other.0)
    }
}

impl From<Vec<Dir>> for Path {
    fn from(steps: Vec<Dir>) -> Self {
        Path(steps)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(d.token())?;
        }
        Ok(())
    }
}

/// An immutable, well-typed expression tree.
///
/// Children are reference counted so rewrites share every subtree outside the
/// rewritten spine. Equality and hashing are structural (lexical).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    token: Token,
    ty: ValueType,
    children: Arc<[Expr]>,
}

impl Expr {
    pub fn terminal(t: Terminal) -> Expr {
        Expr {
            token: Token::Terminal(t),
            ty: t.value_type(),
            children: Arc::from(Vec::new()),
        }
    }

    /// Builds an operator node, checking arity and the typing table.
    pub fn op(op: Op, children: Vec<Expr>) -> Result<Expr, ExprError> {
        if children.len() != op.arity() {
            return Err(ExprError::ArityMismatch {
                op,
                expected: op.arity(),
                found: children.len(),
            });
        }
        let types: Vec<ValueType> = children.iter().map(|c| c.ty).collect();
        let ty = op.result_type(&types).ok_or_else(|| ExprError::TypeError {
            op,
            operands: types
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", "),
        })?;
        Ok(Expr {
            token: Token::Op(op),
            ty,
            children: Arc::from(children),
        })
    }

    pub fn unary(op: Op, child: Expr) -> Result<Expr, ExprError> {
        Expr::op(op, vec![child])
    }

    pub fn binary(op: Op, left: Expr, right: Expr) -> Result<Expr, ExprError> {
        Expr::op(op, vec![left, right])
    }

    pub fn token(&self) -> Token {
        self.token
    }

    pub fn as_op(&self) -> Option<Op> {
        match self.token {
            Token::Op(op) => Some(op),
            Token::Terminal(_) => None,
        }
    }

    pub fn as_terminal(&self) -> Option<Terminal> {
        match self.token {
            Token::Terminal(t) => Some(t),
            Token::Op(_) => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.children.is_empty()
    }

    pub fn value_type(&self) -> ValueType {
        self.ty
    }

    pub fn children(&self) -> &[Expr] {
        &self.children
    }

    pub fn child(&self, dir: Dir) -> Option<&Expr> {
        self.children.get(dir.index())
    }

    /// Subtree at `path`; the empty path is the root.
    pub fn node_at(&self, path: &Path) -> Result<&Expr, ExprError> {
        let mut node = self;
        for &d in path.steps() {
            node = node
                .child(d)
                .ok_or_else(|| ExprError::InvalidPath(path.clone()))?;
        }
        Ok(node)
    }

    /// A copy of `self` with the subtree at `path` replaced by `sub`.
    pub fn replace_at(&self, path: &Path, sub: Expr) -> Result<Expr, ExprError> {
        let old = self.node_at(path)?;
        if old.ty != sub.ty {
            return Err(ExprError::ReplaceTypeMismatch {
                expected: old.ty,
                found: sub.ty,
            });
        }
        Ok(self.replace_unchecked(path.steps(), sub))
    }

    fn replace_unchecked(&self, steps: &[Dir], sub: Expr) -> Expr {
        match steps.split_first() {
            None => sub,
            Some((d, rest)) => {
                let mut children = self.children.to_vec();
                let i = d.index();
                children[i] = children[i].replace_unchecked(rest, sub);
                Expr {
                    token: self.token,
                    ty: self.ty,
                    children: Arc::from(children),
                }
            }
        }
    }

    /// Number of levels; a bare terminal has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Expr::depth).max().unwrap_or(0)
    }

    /// Number of tokens (operators and terminals).
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Expr::node_count).sum::<usize>()
    }

    /// Structural and label identity.
    pub fn lexically_equal(&self, other: &Expr) -> bool {
        self == other
    }

    /// Paths of every node in depth-first preorder.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut cur = Vec::new();
        self.collect_paths(&mut cur, &mut out);
        out
    }

    fn collect_paths(&self, cur: &mut Vec<Dir>, out: &mut Vec<Path>) {
        out.push(Path(cur.clone()));
        for (i, c) in self.children.iter().enumerate() {
            cur.push(if i == 0 { Dir::Left } else { Dir::Right });
            c.collect_paths(cur, out);
            cur.pop();
        }
    }

    /// Preorder token sequence.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.node_count());
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens(&self, out: &mut Vec<Token>) {
        out.push(self.token);
        for c in self.children.iter() {
            c.collect_tokens(out);
        }
    }

    /// Canonical token text.
    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let mut toks = text.split_whitespace().flat_map(split_parens).peekable();
        if toks.peek().is_none() {
            return Err(ExprError::Empty);
        }
        let e = parse_node(&mut toks)?;
        match toks.next() {
            None => Ok(e),
            Some(")") => Err(ExprError::UnbalancedParens),
            Some(t) => Err(ExprError::TrailingInput(t.to_string())),
        }
    }
}

/// Tokens are whitespace separated, but tolerate parentheses glued to symbols.
fn split_parens(word: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in word.char_indices() {
        if c == '(' || c == ')' {
            if start < i {
                out.push(&word[start..i]);
            }
            out.push(&word[i..i + 1]);
            start = i + 1;
        }
    }
    if start < word.len() {
        out.push(&word[start..]);
    }
    out
}

fn parse_node<'a, I>(toks: &mut std::iter::Peekable<I>) -> Result<Expr, ExprError>
where
    I: Iterator<Item = &'a str>,
{
    let tok = toks.next().ok_or(ExprError::UnbalancedParens)?;
    match tok {
        "(" => {
            let head = toks.next().ok_or(ExprError::UnbalancedParens)?;
            let op = Op::from_symbol(head).ok_or_else(|| {
                if head == "(" || head == ")" {
                    ExprError::UnbalancedParens
                } else {
                    ExprError::UnknownToken(head.to_string())
                }
            })?;
            let mut children = Vec::new();
            loop {
                match toks.peek() {
                    None => return Err(ExprError::UnbalancedParens),
                    Some(&")") => {
                        toks.next();
                        break;
                    }
                    Some(_) => children.push(parse_node(toks)?),
                }
            }
            Expr::op(op, children)
        }
        ")" => Err(ExprError::UnbalancedParens),
        t => Terminal::from_symbol(t)
            .map(Expr::terminal)
            .ok_or_else(|| match Op::from_symbol(t) {
                // bare operator without parentheses
                Some(op) => ExprError::ArityMismatch {
                    op,
                    expected: op.arity(),
                    found: 0,
                },
                None => ExprError::UnknownToken(t.to_string()),
            }),
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.token {
            Token::Terminal(t) => t.fmt(f),
            Token::Op(op) => {
                write!(f, "( {op}")?;
                for c in self.children.iter() {
                    write!(f, " {c}")?;
                }
                f.write_str(" )")
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn vocabulary_sizes() {
        assert_eq!(Op::ALL.len(), 16);
        assert_eq!(Terminal::all().count(), 20);
        for op in Op::ALL {
            assert_eq!(Op::from_symbol(op.symbol()), Some(op));
        }
    }

    #[test]
    fn parse_simple() {
        let e = p("( +s a b )");
        assert_eq!(e.as_op(), Some(Op::AddS));
        assert_eq!(e.value_type(), ValueType::Scalar);
        assert_eq!(e.children()[0], p("a"));
        assert_eq!(e.children()[1], p("b"));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Expr::parse("( +s a A )"),
            Err(ExprError::TypeError { .. })
        ));
        assert!(matches!(
            Expr::parse("( +s a )"),
            Err(ExprError::ArityMismatch { .. })
        ));
        assert!(matches!(
            Expr::parse("( +s a b"),
            Err(ExprError::UnbalancedParens)
        ));
        assert!(matches!(
            Expr::parse("( +s a b ) )"),
            Err(ExprError::UnbalancedParens)
        ));
        assert!(matches!(
            Expr::parse("( +q a b )"),
            Err(ExprError::UnknownToken(_))
        ));
        assert!(matches!(Expr::parse("f"), Err(ExprError::UnknownToken(_))));
        assert!(matches!(Expr::parse("  "), Err(ExprError::Empty)));
        assert!(matches!(
            Expr::parse("a b"),
            Err(ExprError::TrailingInput(_))
        ));
    }

    #[test]
    fn typing_table() {
        assert_eq!(p("( *v v w )").value_type(), ValueType::Scalar);
        assert_eq!(p("( *v a w )").value_type(), ValueType::Vector);
        assert_eq!(p("( *v w a )").value_type(), ValueType::Vector);
        assert_eq!(p("( *v A w )").value_type(), ValueType::Vector);
        assert_eq!(p("( *m a A )").value_type(), ValueType::Matrix);
        assert_eq!(p("( tm ( *m A a ) )").value_type(), ValueType::Matrix);
        assert!(Expr::parse("( *v w A )").is_err());
        assert!(Expr::parse("( *m v A )").is_err());
        assert!(Expr::parse("( *m a b )").is_err());
        assert!(Expr::parse("( tm v )").is_err());
        assert!(Expr::parse("( nv a )").is_err());
    }

    #[test]
    fn render_canonical() {
        assert_eq!(p("a").render(), "a");
        assert_eq!(p("( +s a b )").render(), "( +s a b )");
        assert_eq!(p("(+s   a (ns b))").render(), "( +s a ( ns b ) )");
    }

    #[test]
    fn motivation_program_structure() {
        let p1 = p("( *s a ( +s ( *s 1 b ) ( *s 1 c ) ) )");
        assert_eq!(p1.node_at(&Path::root()).unwrap(), &p1);
        assert_eq!(
            p1.node_at(&vec![Dir::Right, Dir::Left].into()).unwrap(),
            &p("( *s 1 b )")
        );
        let e = p("( *s a ( +s b c ) )");
        assert_eq!(
            e.node_at(&vec![Dir::Right].into()).unwrap(),
            &p("( +s b c )")
        );
        assert!(matches!(
            e.node_at(&vec![Dir::Left, Dir::Left].into()),
            Err(ExprError::InvalidPath(_))
        ));
    }

    #[test]
    fn unary_child_is_left() {
        let e = p("( ns a )");
        assert_eq!(e.node_at(&vec![Dir::Left].into()).unwrap(), &p("a"));
        assert!(e.node_at(&vec![Dir::Right].into()).is_err());
    }

    #[test]
    fn replace() {
        let e = p("( +s a b )");
        assert_eq!(e.replace_at(&Path::root(), p("c")).unwrap(), p("c"));
        assert_eq!(
            e.replace_at(&vec![Dir::Left].into(), p("c")).unwrap(),
            p("( +s c b )")
        );
        assert_eq!(e, p("( +s a b )"));
        assert!(matches!(
            e.replace_at(&vec![Dir::Left].into(), p("A")),
            Err(ExprError::ReplaceTypeMismatch { .. })
        ));
        assert!(matches!(
            e.replace_at(&vec![Dir::Left, Dir::Left].into(), p("c")),
            Err(ExprError::InvalidPath(_))
        ));
    }

    #[test]
    fn sizes() {
        assert_eq!(p("a").depth(), 1);
        assert_eq!(p("a").node_count(), 1);
        assert_eq!(p("( +s a b )").depth(), 2);
        assert_eq!(p("( +s a b )").node_count(), 3);

        fn full(d: usize) -> Expr {
            if d == 1 {
                Expr::terminal(Terminal::SCALARS[0])
            } else {
                Expr::binary(Op::AddS, full(d - 1), full(d - 1)).unwrap()
            }
        }
        let t = full(7);
        assert_eq!(t.depth(), 7);
        assert_eq!(t.node_count(), 127);
        let ops = t
            .tokens()
            .iter()
            .filter(|t| matches!(t, Token::Op(_)))
            .count();
        assert_eq!(ops, 63);
    }

    #[test]
    fn lexical_equality() {
        assert!(p("( +s a b )").lexically_equal(&p("( +s a b )")));
        assert!(!p("( +s a b )").lexically_equal(&p("( +s b a )")));
    }

    #[test]
    fn preorder_paths() {
        let e = p("( *s a ( ns b ) )");
        let paths: Vec<String> = e.paths().iter().map(ToString::to_string).collect();
        assert_eq!(paths, vec!["", "left", "right", "right left"]);
    }
}
