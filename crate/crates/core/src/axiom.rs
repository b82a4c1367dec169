//! The axiom table, pattern matching and rewriting.
//!
//! Each axiom is a pair of templates written in the program syntax, with
//! metavariables prefixed by `?`. The metavariable letter fixes its type:
//! `?a`..`?e` are scalars, `?A`..`?E` matrices and `?v`..`?z` vectors. A
//! metavariable matches any subtree of its type; repeated occurrences must be
//! lexically equal. Bare constants (`0 1 O I o`) match only themselves.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Op, Path, Terminal, ValueType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomCategory {
    Cancel,
    NeutralOp,
    DoubleOp,
    AbsorbOp,
    Commute,
    DistributeLeft,
    DistributeRight,
    FactorLeft,
    FactorRight,
    AssociativeLeft,
    AssociativeRight,
    FlipLeft,
    FlipRight,
    Transpose,
}

impl AxiomCategory {
    pub const ALL: [AxiomCategory; 14] = [
        AxiomCategory::Cancel,
        AxiomCategory::NeutralOp,
        AxiomCategory::DoubleOp,
        AxiomCategory::AbsorbOp,
        AxiomCategory::Commute,
        AxiomCategory::DistributeLeft,
        AxiomCategory::DistributeRight,
        AxiomCategory::FactorLeft,
        AxiomCategory::FactorRight,
        AxiomCategory::AssociativeLeft,
        AxiomCategory::AssociativeRight,
        AxiomCategory::FlipLeft,
        AxiomCategory::FlipRight,
        AxiomCategory::Transpose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomCategory::Cancel => "Cancel",
            AxiomCategory::NeutralOp => "NeutralOp",
            AxiomCategory::DoubleOp => "DoubleOp",
            AxiomCategory::AbsorbOp => "AbsorbOp",
            AxiomCategory::Commute => "Commute",
            AxiomCategory::DistributeLeft => "DistributeLeft",
            AxiomCategory::DistributeRight => "DistributeRight",
            AxiomCategory::FactorLeft => "FactorLeft",
            AxiomCategory::FactorRight => "FactorRight",
            AxiomCategory::AssociativeLeft => "AssociativeLeft",
            AxiomCategory::AssociativeRight => "AssociativeRight",
            AxiomCategory::FlipLeft => "FlipLeft",
            AxiomCategory::FlipRight => "FlipRight",
            AxiomCategory::Transpose => "Transpose",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AxiomCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown axiom category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for AxiomCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("no {category} axiom matches at `{path}`")]
    NoMatchingAxiom { path: Path, category: AxiomCategory },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Typed metavariable. The letter is kept for rendering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MetaVar {
    pub name: char,
    pub ty: ValueType,
}

impl MetaVar {
    fn from_char(c: char) -> Option<MetaVar> {
        let ty = match c {
            'a'..='e' => ValueType::Scalar,
            'A'..='E' => ValueType::Matrix,
            'v'..='z' => ValueType::Vector,
            _ => return None,
        };
        Some(MetaVar { name: c, ty })
    }
}

/// Left-hand side pattern, also used as the right-hand side template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(MetaVar),
    Const(Terminal),
    Op(Op, Vec<Pattern>),
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, String> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let mut pos = 0;
        let p = Self::parse_at(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(format!("trailing tokens in `{text}`"));
        }
        Ok(p)
    }

    fn parse_at(toks: &[&str], pos: &mut usize) -> Result<Pattern, String> {
        let tok = *toks.get(*pos).ok_or("unexpected end of pattern")?;
        *pos += 1;
        if tok == "(" {
            let head = *toks.get(*pos).ok_or("missing operator")?;
            *pos += 1;
            let op = Op::from_symbol(head).ok_or_else(|| format!("bad operator `{head}`"))?;
            let mut kids = Vec::new();
            while toks.get(*pos) != Some(&")") {
                kids.push(Self::parse_at(toks, pos)?);
            }
            *pos += 1;
            if kids.len() != op.arity() {
                return Err(format!("arity mismatch for `{op}`"));
            }
            Ok(Pattern::Op(op, kids))
        } else if let Some(name) = tok.strip_prefix('?') {
            let mut cs = name.chars();
            match (cs.next().and_then(MetaVar::from_char), cs.next()) {
                (Some(v), None) => Ok(Pattern::Var(v)),
                _ => Err(format!("bad metavariable `{tok}`")),
            }
        } else {
            Terminal::from_symbol(tok)
                .filter(|t| t.is_constant())
                .map(Pattern::Const)
                .ok_or_else(|| format!("bad constant `{tok}`"))
        }
    }

    /// Static result type, if the pattern is well typed.
    pub fn value_type(&self) -> Option<ValueType> {
        match self {
            Pattern::Var(v) => Some(v.ty),
            Pattern::Const(t) => Some(t.value_type()),
            Pattern::Op(op, kids) => {
                let tys = kids
                    .iter()
                    .map(Pattern::value_type)
                    .collect::<Option<Vec<_>>>()?;
                op.result_type(&tys)
            }
        }
    }

    /// Number of operator levels the pattern requires, counting its root.
    pub fn op_depth(&self) -> usize {
        match self {
            Pattern::Op(_, kids) => 1 + kids.iter().map(Pattern::op_depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn vars(&self, out: &mut Vec<MetaVar>) {
        match self {
            Pattern::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Pattern::Const(_) => {}
            Pattern::Op(_, kids) => kids.iter().for_each(|k| k.vars(out)),
        }
    }

    fn root_op(&self) -> Option<Op> {
        match self {
            Pattern::Op(op, _) => Some(*op),
            _ => None,
        }
    }

    fn matches<'e>(&self, e: &'e Expr, binds: &mut Vec<(MetaVar, &'e Expr)>) -> bool {
        match self {
            Pattern::Var(v) => {
                if e.value_type() != v.ty {
                    return false;
                }
                match binds.iter().find(|(b, _)| b == v) {
                    Some((_, bound)) => bound.lexically_equal(e),
                    None => {
                        binds.push((*v, e));
                        true
                    }
                }
            }
            Pattern::Const(t) => e.as_terminal() == Some(*t),
            Pattern::Op(op, kids) => {
                e.as_op() == Some(*op)
                    && kids
                        .iter()
                        .zip(e.children())
                        .all(|(k, c)| k.matches(c, binds))
            }
        }
    }

    fn build(&self, binds: &[(MetaVar, &Expr)]) -> Result<Expr, ExprError> {
        match self {
            Pattern::Var(v) => Ok(binds
                .iter()
                .find(|(b, _)| b == v)
                .map(|(_, e)| (*e).clone())
                .expect("template variables are bound by the pattern")),
            Pattern::Const(t) => Ok(Expr::terminal(*t)),
            Pattern::Op(op, kids) => Expr::op(
                *op,
                kids.iter()
                    .map(|k| k.build(binds))
                    .collect::<Result<_, _>>()?,
            ),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "?{}", v.name),
            Pattern::Const(t) => write!(f, "{t}"),
            Pattern::Op(op, kids) => {
                write!(f, "( {op}")?;
                for k in kids {
                    write!(f, " {k}")?;
                }
                f.write_str(" )")
            }
        }
    }
}

/// One row of the axiom table.
#[derive(Clone, Debug)]
pub struct ConcreteAxiom {
    pub id: u16,
    pub category: AxiomCategory,
    pub lhs: Pattern,
    pub rhs: Pattern,
}

impl ConcreteAxiom {
    /// Rewrites `e` at its root if the left-hand side matches.
    pub fn rewrite(&self, e: &Expr) -> Option<Expr> {
        let mut binds = Vec::with_capacity(4);
        if !self.lhs.matches(e, &mut binds) {
            return None;
        }
        let out = self
            .rhs
            .build(&binds)
            .expect("axiom templates are well typed");
        Some(out)
    }

    pub fn matches_root(&self, e: &Expr) -> bool {
        self.lhs.matches(e, &mut Vec::with_capacity(4))
    }

    /// Both sides with each metavariable replaced by its binding. Every
    /// metavariable of the left-hand side must be bound.
    pub fn instantiate(&self, binds: &[(MetaVar, Expr)]) -> Result<(Expr, Expr), ExprError> {
        let refs: Vec<(MetaVar, &Expr)> = binds.iter().map(|(v, e)| (*v, e)).collect();
        Ok((self.lhs.build(&refs)?, self.rhs.build(&refs)?))
    }

    /// Metavariables in order of first appearance in the left-hand side.
    pub fn metavars(&self) -> Vec<MetaVar> {
        let mut out = Vec::new();
        self.lhs.vars(&mut out);
        out
    }
}

use AxiomCategory::*;

/// `(id, category, lhs, rhs)` for every table row.
#[rustfmt::skip]
const TABLE: &[(u16, AxiomCategory, &str, &str)] = &[
    (1, Cancel, "( -s ?a ?a )", "0"),
    (2, Cancel, "( /s ?b ?b )", "1"),
    (3, Cancel, "( -m ?A ?A )", "O"),
    (4, Cancel, "( *m ?A ( im ?A ) )", "I"),
    (5, Cancel, "( *m ( im ?A ) ?A )", "I"),
    (6, Cancel, "( -v ?v ?v )", "o"),
    (7, NeutralOp, "( +s ?a 0 )", "?a"),
    (8, NeutralOp, "( +s 0 ?a )", "?a"),
    (9, NeutralOp, "( -s ?a 0 )", "?a"),
    (10, NeutralOp, "( *s ?a 1 )", "?a"),
    (11, NeutralOp, "( *s 1 ?a )", "?a"),
    (13, NeutralOp, "( /s ?a 1 )", "?a"),
    (14, NeutralOp, "( +m ?A O )", "?A"),
    (15, NeutralOp, "( +m O ?A )", "?A"),
    (16, NeutralOp, "( -m ?A O )", "?A"),
    (17, NeutralOp, "( *m ?A I )", "?A"),
    (18, NeutralOp, "( *m I ?A )", "?A"),
    (19, NeutralOp, "( +v ?v o )", "?v"),
    (20, NeutralOp, "( +v o ?v )", "?v"),
    (21, NeutralOp, "( -v ?v o )", "?v"),
    (22, DoubleOp, "( ns ( ns ?a ) )", "?a"),
    (23, DoubleOp, "( is ( is ?a ) )", "?a"),
    (24, DoubleOp, "( nm ( nm ?A ) )", "?A"),
    (25, DoubleOp, "( im ( im ?A ) )", "?A"),
    (26, DoubleOp, "( tm ( tm ?A ) )", "?A"),
    (27, DoubleOp, "( nv ( nv ?v ) )", "?v"),
    (28, AbsorbOp, "( *s ?a 0 )", "0"),
    (29, AbsorbOp, "( *s 0 ?a )", "0"),
    (30, AbsorbOp, "( *m ?A 0 )", "O"),
    (31, AbsorbOp, "( *m 0 ?A )", "O"),
    (32, AbsorbOp, "( *m ?A O )", "O"),
    (33, AbsorbOp, "( *m O ?A )", "O"),
    (34, AbsorbOp, "( *v ?A o )", "o"),
    (35, AbsorbOp, "( *v ?a o )", "o"),
    (36, AbsorbOp, "( *v o ?a )", "o"),
    (37, AbsorbOp, "( *v 0 ?v )", "o"),
    (38, AbsorbOp, "( *v ?v 0 )", "o"),
    (39, AbsorbOp, "( *v O ?v )", "o"),
    (40, Commute, "( +s ?a ?b )", "( +s ?b ?a )"),
    (41, Commute, "( *s ?a ?b )", "( *s ?b ?a )"),
    (42, Commute, "( +m ?A ?B )", "( +m ?B ?A )"),
    (43, Commute, "( *m ?A ?a )", "( *m ?a ?A )"),
    (44, Commute, "( *m ?a ?A )", "( *m ?A ?a )"),
    (45, Commute, "( *m ?A O )", "( *m O ?A )"),
    (46, Commute, "( *m O ?A )", "( *m ?A O )"),
    (47, Commute, "( *m ?A I )", "( *m I ?A )"),
    (48, Commute, "( *m I ?A )", "( *m ?A I )"),
    (49, Commute, "( +v ?v ?w )", "( +v ?w ?v )"),
    (50, Commute, "( *v ?v ?a )", "( *v ?a ?v )"),
    (51, Commute, "( *v ?a ?v )", "( *v ?v ?a )"),
    (52, DistributeLeft, "( *s ( +s ?a ?b ) ?c )", "( +s ( *s ?a ?c ) ( *s ?b ?c ) )"),
    (53, DistributeLeft, "( *s ( -s ?a ?b ) ?c )", "( -s ( *s ?a ?c ) ( *s ?b ?c ) )"),
    (54, DistributeLeft, "( /s ( +s ?a ?b ) ?c )", "( +s ( /s ?a ?c ) ( /s ?b ?c ) )"),
    (55, DistributeLeft, "( /s ( -s ?a ?b ) ?c )", "( -s ( /s ?a ?c ) ( /s ?b ?c ) )"),
    (56, DistributeLeft, "( *v ( +v ?v ?w ) ?a )", "( +v ( *v ?v ?a ) ( *v ?w ?a ) )"),
    (57, DistributeLeft, "( *v ( -v ?v ?w ) ?a )", "( -v ( *v ?v ?a ) ( *v ?w ?a ) )"),
    (58, DistributeLeft, "( *m ( +m ?A ?B ) ?C )", "( +m ( *m ?A ?C ) ( *m ?B ?C ) )"),
    (59, DistributeLeft, "( *m ( -m ?A ?B ) ?C )", "( -m ( *m ?A ?C ) ( *m ?B ?C ) )"),
    (60, DistributeLeft, "( *v ( +m ?A ?B ) ?v )", "( +v ( *v ?A ?v ) ( *v ?B ?v ) )"),
    (61, DistributeLeft, "( *v ( -m ?A ?B ) ?v )", "( -v ( *v ?A ?v ) ( *v ?B ?v ) )"),
    (62, DistributeLeft, "( *m ( +m ?A ?B ) ?a )", "( +m ( *m ?A ?a ) ( *m ?B ?a ) )"),
    (63, DistributeLeft, "( *m ( -m ?A ?B ) ?a )", "( -m ( *m ?A ?a ) ( *m ?B ?a ) )"),
    (64, DistributeRight, "( *s ?a ( +s ?b ?c ) )", "( +s ( *s ?a ?b ) ( *s ?a ?c ) )"),
    (65, DistributeRight, "( *s ?a ( -s ?b ?c ) )", "( -s ( *s ?a ?b ) ( *s ?a ?c ) )"),
    (66, DistributeRight, "( *v ?a ( +v ?v ?w ) )", "( +v ( *v ?a ?v ) ( *v ?a ?w ) )"),
    (67, DistributeRight, "( *v ?a ( -v ?v ?w ) )", "( -v ( *v ?a ?v ) ( *v ?a ?w ) )"),
    (68, DistributeRight, "( *m ?A ( +m ?B ?C ) )", "( +m ( *m ?A ?B ) ( *m ?A ?C ) )"),
    (69, DistributeRight, "( *m ?A ( -m ?B ?C ) )", "( -m ( *m ?A ?B ) ( *m ?A ?C ) )"),
    (70, DistributeRight, "( *m ?a ( +m ?B ?C ) )", "( +m ( *m ?a ?B ) ( *m ?a ?C ) )"),
    (71, DistributeRight, "( *m ?a ( -m ?B ?C ) )", "( -m ( *m ?a ?B ) ( *m ?a ?C ) )"),
    (72, FactorLeft, "( +s ( *s ?a ?b ) ( *s ?a ?c ) )", "( *s ?a ( +s ?b ?c ) )"),
    (73, FactorLeft, "( -s ( *s ?a ?b ) ( *s ?a ?c ) )", "( *s ?a ( -s ?b ?c ) )"),
    (74, FactorLeft, "( +m ( *m ?A ?B ) ( *m ?A ?C ) )", "( *m ?A ( +m ?B ?C ) )"),
    (75, FactorLeft, "( -m ( *m ?A ?B ) ( *m ?A ?C ) )", "( *m ?A ( -m ?B ?C ) )"),
    (76, FactorLeft, "( +v ( *v ?A ?v ) ( *v ?A ?w ) )", "( *v ?A ( +v ?v ?w ) )"),
    (77, FactorLeft, "( -v ( *v ?A ?v ) ( *v ?A ?w ) )", "( *v ?A ( -v ?v ?w ) )"),
    (78, FactorLeft, "( +m ( *m ?A ?a ) ( *m ?A ?b ) )", "( *m ?A ( +s ?a ?b ) )"),
    (79, FactorLeft, "( -m ( *m ?A ?a ) ( *m ?A ?b ) )", "( *m ?A ( -s ?a ?b ) )"),
    (80, FactorLeft, "( +v ( *v ?v ?a ) ( *v ?v ?b ) )", "( *v ?v ( +s ?a ?b ) )"),
    (81, FactorLeft, "( -v ( *v ?v ?a ) ( *v ?v ?b ) )", "( *v ?v ( -s ?a ?b ) )"),
    (82, FactorRight, "( +s ( *s ?a ?c ) ( *s ?b ?c ) )", "( *s ( +s ?a ?b ) ?c )"),
    (83, FactorRight, "( -s ( *s ?a ?c ) ( *s ?b ?c ) )", "( *s ( -s ?a ?b ) ?c )"),
    (84, FactorRight, "( +s ( /s ?a ?c ) ( /s ?b ?c ) )", "( /s ( +s ?a ?b ) ?c )"),
    (85, FactorRight, "( -s ( /s ?a ?c ) ( /s ?b ?c ) )", "( /s ( -s ?a ?b ) ?c )"),
    (86, FactorRight, "( +m ( *m ?A ?C ) ( *m ?B ?C ) )", "( *m ( +m ?A ?B ) ?C )"),
    (87, FactorRight, "( -m ( *m ?A ?C ) ( *m ?B ?C ) )", "( *m ( -m ?A ?B ) ?C )"),
    (88, FactorRight, "( +v ( *v ?A ?v ) ( *v ?B ?v ) )", "( *v ( +m ?A ?B ) ?v )"),
    (89, FactorRight, "( -v ( *v ?A ?v ) ( *v ?B ?v ) )", "( *v ( -m ?A ?B ) ?v )"),
    (90, FactorRight, "( +m ( *m ?A ?a ) ( *m ?B ?a ) )", "( *m ( +m ?A ?B ) ?a )"),
    (91, FactorRight, "( -m ( *m ?A ?a ) ( *m ?B ?a ) )", "( *m ( -m ?A ?B ) ?a )"),
    (92, FactorRight, "( +v ( *v ?v ?a ) ( *v ?w ?a ) )", "( *v ( +v ?v ?w ) ?a )"),
    (93, FactorRight, "( -v ( *v ?v ?a ) ( *v ?w ?a ) )", "( *v ( -v ?v ?w ) ?a )"),
    (94, AssociativeLeft, "( +s ?a ( +s ?b ?c ) )", "( +s ( +s ?a ?b ) ?c )"),
    (95, AssociativeLeft, "( +s ?a ( -s ?b ?c ) )", "( -s ( +s ?a ?b ) ?c )"),
    (96, AssociativeLeft, "( *s ?a ( *s ?b ?c ) )", "( *s ( *s ?a ?b ) ?c )"),
    (97, AssociativeLeft, "( *s ?a ( /s ?b ?c ) )", "( /s ( *s ?a ?b ) ?c )"),
    (98, AssociativeLeft, "( +m ?A ( +m ?B ?C ) )", "( +m ( +m ?A ?B ) ?C )"),
    (99, AssociativeLeft, "( +m ?A ( -m ?B ?C ) )", "( -m ( +m ?A ?B ) ?C )"),
    (100, AssociativeLeft, "( *m ?A ( *m ?B ?C ) )", "( *m ( *m ?A ?B ) ?C )"),
    (101, AssociativeLeft, "( *m ?A ( *m ?B ?a ) )", "( *m ( *m ?A ?B ) ?a )"),
    (102, AssociativeLeft, "( *m ?A ( *m ?a ?B ) )", "( *m ( *m ?A ?a ) ?B )"),
    (103, AssociativeLeft, "( *m ?a ( *m ?A ?B ) )", "( *m ( *m ?a ?A ) ?B )"),
    (104, AssociativeLeft, "( *v ?A ( *v ?B ?v ) )", "( *v ( *m ?A ?B ) ?v )"),
    (105, AssociativeLeft, "( *v ?A ( *v ?v ?a ) )", "( *v ( *v ?A ?v ) ?a )"),
    (106, AssociativeLeft, "( *v ?A ( *v ?a ?v ) )", "( *v ( *m ?A ?a ) ?v )"),
    (107, AssociativeLeft, "( *v ?a ( *v ?A ?v ) )", "( *v ( *m ?a ?A ) ?v )"),
    (108, AssociativeLeft, "( +v ?v ( +v ?w ?x ) )", "( +v ( +v ?v ?w ) ?x )"),
    (109, AssociativeLeft, "( +v ?v ( -v ?w ?x ) )", "( -v ( +v ?v ?w ) ?x )"),
    (110, AssociativeLeft, "( *v ?v ( *s ?a ?b ) )", "( *v ( *v ?v ?a ) ?b )"),
    (111, AssociativeLeft, "( *v ?a ( *v ?v ?b ) )", "( *v ( *v ?a ?v ) ?b )"),
    (112, AssociativeLeft, "( *v ?a ( *v ?b ?v ) )", "( *v ( *s ?a ?b ) ?v )"),
    (113, AssociativeRight, "( +s ( +s ?a ?b ) ?c )", "( +s ?a ( +s ?b ?c ) )"),
    (114, AssociativeRight, "( -s ( +s ?a ?b ) ?c )", "( +s ?a ( -s ?b ?c ) )"),
    (115, AssociativeRight, "( *s ( *s ?a ?b ) ?c )", "( *s ?a ( *s ?b ?c ) )"),
    (116, AssociativeRight, "( +m ( +m ?A ?B ) ?C )", "( +m ?A ( +m ?B ?C ) )"),
    (117, AssociativeRight, "( -m ( +m ?A ?B ) ?C )", "( +m ?A ( -m ?B ?C ) )"),
    (118, AssociativeRight, "( *m ( *m ?A ?B ) ?C )", "( *m ?A ( *m ?B ?C ) )"),
    (119, AssociativeRight, "( *m ( *m ?A ?B ) ?a )", "( *m ?A ( *m ?B ?a ) )"),
    (120, AssociativeRight, "( *m ( *m ?A ?a ) ?B )", "( *m ?A ( *m ?a ?B ) )"),
    (121, AssociativeRight, "( *m ( *m ?a ?A ) ?B )", "( *m ?a ( *m ?A ?B ) )"),
    (122, AssociativeRight, "( *v ( *v ?A ?v ) ?a )", "( *v ?A ( *v ?v ?a ) )"),
    (123, AssociativeRight, "( *v ( *m ?A ?a ) ?v )", "( *v ?A ( *v ?a ?v ) )"),
    (124, AssociativeRight, "( *v ( *m ?a ?A ) ?v )", "( *v ?a ( *v ?A ?v ) )"),
    (125, AssociativeRight, "( *v ( *v ?v ?a ) ?b )", "( *v ?v ( *s ?a ?b ) )"),
    (126, AssociativeRight, "( *v ( *v ?a ?v ) ?b )", "( *v ?a ( *v ?v ?b ) )"),
    (127, AssociativeRight, "( *v ( *s ?a ?b ) ?v )", "( *v ?a ( *v ?b ?v ) )"),
    (128, AssociativeRight, "( +v ( +v ?v ?w ) ?x )", "( +v ?v ( +v ?w ?x ) )"),
    (129, AssociativeRight, "( -v ( +v ?v ?w ) ?x )", "( +v ?v ( -v ?w ?x ) )"),
    (130, FlipLeft, "( ns ( -s ?a ?b ) )", "( -s ?b ?a )"),
    (131, FlipLeft, "( is ( /s ?a ?b ) )", "( /s ?b ?a )"),
    (132, FlipLeft, "( nm ( -m ?A ?B ) )", "( -m ?B ?A )"),
    (133, FlipLeft, "( nv ( -v ?v ?w ) )", "( -v ?w ?v )"),
    (134, FlipRight, "( /s ?a ( /s ?b ?c ) )", "( *s ?a ( /s ?c ?b ) )"),
    (135, FlipRight, "( /s ?a ( is ?b ) )", "( *s ?a ?b )"),
    (136, FlipRight, "( -s ?a ( -s ?b ?c ) )", "( +s ?a ( -s ?c ?b ) )"),
    (137, FlipRight, "( -s ?a ( ns ?b ) )", "( +s ?a ?b )"),
    (138, FlipRight, "( -m ?A ( -m ?B ?C ) )", "( +m ?A ( -m ?C ?B ) )"),
    (139, FlipRight, "( -m ?A ( nm ?B ) )", "( +m ?A ?B )"),
    (140, FlipRight, "( -v ?v ( -v ?w ?x ) )", "( +v ?v ( -v ?x ?w ) )"),
    (141, FlipRight, "( -v ?v ( nv ?w ) )", "( +v ?v ?w )"),
    (142, Transpose, "( *m ?A ?B )", "( tm ( *m ( tm ?B ) ( tm ?A ) ) )"),
    (143, Transpose, "( +m ?A ?B )", "( tm ( +m ( tm ?A ) ( tm ?B ) ) )"),
    (144, Transpose, "( -m ?A ?B )", "( tm ( -m ( tm ?A ) ( tm ?B ) ) )"),
    (145, Transpose, "( tm ( *m ?A ?B ) )", "( *m ( tm ?B ) ( tm ?A ) )"),
    (146, Transpose, "( tm ( +m ?A ?B ) )", "( +m ( tm ?A ) ( tm ?B ) )"),
    (147, Transpose, "( tm ( -m ?A ?B ) )", "( -m ( tm ?A ) ( tm ?B ) )"),
];

struct AxiomTable {
    axioms: Vec<ConcreteAxiom>,
    /// Axiom indices keyed by the operator at the root of their pattern, in id order.
    by_root: HashMap<Op, Vec<usize>>,
}

fn table() -> &'static AxiomTable {
    static TABLE_CELL: OnceLock<AxiomTable> = OnceLock::new();
    TABLE_CELL.get_or_init(|| {
        let axioms: Vec<ConcreteAxiom> = TABLE
            .iter()
            .map(|&(id, category, lhs, rhs)| {
                let lhs = Pattern::parse(lhs).unwrap_or_else(|e| panic!("axiom {id}: {e}"));
                let rhs = Pattern::parse(rhs).unwrap_or_else(|e| panic!("axiom {id}: {e}"));
                ConcreteAxiom {
                    id,
                    category,
                    lhs,
                    rhs,
                }
            })
            .collect();
        let mut by_root: HashMap<Op, Vec<usize>> = HashMap::new();
        for (i, ax) in axioms.iter().enumerate() {
            let op = ax
                .lhs
                .root_op()
                .expect("patterns are rooted at an operator");
            by_root.entry(op).or_default().push(i);
        }
        AxiomTable { axioms, by_root }
    })
}

/// The full axiom table ordered by id.
pub fn axiom_table() -> &'static [ConcreteAxiom] {
    &table().axioms
}

pub fn axiom_by_id(id: u16) -> Option<&'static ConcreteAxiom> {
    axiom_table().iter().find(|a| a.id == id)
}

/// Axioms whose pattern could match a node rooted at `op`, in id order.
fn candidates(op: Op) -> impl Iterator<Item = &'static ConcreteAxiom> {
    let t = table();
    t.by_root
        .get(&op)
        .into_iter()
        .flatten()
        .map(move |&i| &t.axioms[i])
}

/// True iff `axiom`'s left-hand side matches the subtree at `path`.
pub fn match_at(axiom: &ConcreteAxiom, e: &Expr, path: &Path) -> Result<bool, ExprError> {
    Ok(axiom.matches_root(e.node_at(path)?))
}

/// Lowest-id axiom of `category` matching at the root of `node`.
pub fn resolve(node: &Expr, category: AxiomCategory) -> Option<&'static ConcreteAxiom> {
    let op = node.as_op()?;
    candidates(op).find(|a| a.category == category && a.matches_root(node))
}

/// Applies the lowest-id matching axiom of `category` at `path`, returning
/// the rewritten program and the id used.
pub fn apply_category(
    e: &Expr,
    path: &Path,
    category: AxiomCategory,
) -> Result<(Expr, u16), AxiomError> {
    let node = e.node_at(path)?;
    let axiom = resolve(node, category).ok_or_else(|| AxiomError::NoMatchingAxiom {
        path: path.clone(),
        category,
    })?;
    let sub = axiom.rewrite(node).expect("resolved axiom matches");
    Ok((e.replace_at(path, sub)?, axiom.id))
}

/// Applies one specific axiom at `path`.
pub fn apply_axiom(e: &Expr, path: &Path, axiom: &ConcreteAxiom) -> Result<Expr, AxiomError> {
    let node = e.node_at(path)?;
    let sub = axiom
        .rewrite(node)
        .ok_or_else(|| AxiomError::NoMatchingAxiom {
            path: path.clone(),
            category: axiom.category,
        })?;
    Ok(e.replace_at(path, sub)?)
}

/// A legal rewrite: a category at a node, resolved to a concrete axiom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub path: Path,
    pub category: AxiomCategory,
    pub resolved_id: u16,
}

impl Move {
    pub fn apply(&self, e: &Expr) -> Result<Expr, AxiomError> {
        apply_category(e, &self.path, self.category).map(|(out, _)| out)
    }
}

/// Categories applicable at the root of `node`, each with its resolved id,
/// in category order.
pub fn legal_categories(node: &Expr) -> Vec<(AxiomCategory, u16)> {
    let Some(op) = node.as_op() else {
        return Vec::new();
    };
    let mut found: Vec<(AxiomCategory, u16)> = Vec::new();
    for a in candidates(op) {
        if found.iter().any(|(c, _)| *c == a.category) {
            continue;
        }
        if a.matches_root(node) {
            found.push((a.category, a.id));
        }
    }
    found.sort_by_key(|(c, _)| *c);
    found
}

/// Every legal (path, category) pair, in preorder then category order.
pub fn legal_moves(e: &Expr) -> Vec<Move> {
    let mut out = Vec::new();
    for path in e.paths() {
        let node = e.node_at(&path).expect("preorder paths are valid");
        for (category, resolved_id) in legal_categories(node) {
            out.push(Move {
                path: path.clone(),
                category,
                resolved_id,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Dir;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn table_shape() {
        let t = axiom_table();
        assert_eq!(t.len(), 146);
        let ids: Vec<u16> = t.iter().map(|a| a.id).collect();
        let expected: Vec<u16> = (1..=147).filter(|&i| i != 12).collect();
        assert_eq!(ids, expected);
        let count = |c| t.iter().filter(|a| a.category == c).count();
        assert_eq!(count(Commute), 12);
        assert_eq!(count(Transpose), 6);
        assert!(t
            .iter()
            .filter(|a| a.category == Commute)
            .all(|a| (40..=51).contains(&a.id)));
    }

    #[test]
    fn templates_are_well_typed() {
        for a in axiom_table() {
            let l = a.lhs.value_type();
            assert!(l.is_some(), "axiom {} lhs ill-typed", a.id);
            assert_eq!(l, a.rhs.value_type(), "axiom {} changes type", a.id);
            let mut rv = Vec::new();
            a.rhs.vars(&mut rv);
            let lv = a.metavars();
            assert!(
                rv.iter().all(|v| lv.contains(v)),
                "axiom {} unbound var",
                a.id
            );
        }
    }

    #[test]
    fn category_round_trip() {
        for c in AxiomCategory::ALL {
            assert_eq!(c.name().parse::<AxiomCategory>().unwrap(), c);
        }
        assert!("Foo".parse::<AxiomCategory>().is_err());
    }

    #[test]
    fn match_examples() {
        let root = Path::root();
        let a40 = axiom_by_id(40).unwrap();
        assert!(match_at(a40, &p("( +s a b )"), &root).unwrap());
        let a1 = axiom_by_id(1).unwrap();
        assert!(!match_at(a1, &p("( -s a b )"), &root).unwrap());
        assert!(match_at(a1, &p("( -s ( ns a ) ( ns a ) )"), &root).unwrap());
        let a145 = axiom_by_id(145).unwrap();
        assert!(match_at(a145, &p("( tm ( *m A B ) )"), &root).unwrap());
        assert!(!match_at(a145, &p("( tm ( *m a B ) )"), &root).unwrap());
        assert!(matches!(
            match_at(a40, &p("a"), &vec![Dir::Left].into()),
            Err(ExprError::InvalidPath(_))
        ));
    }

    #[test]
    fn apply_examples() {
        let root = Path::root();
        assert_eq!(
            apply_category(&p("( *s 1 b )"), &root, NeutralOp).unwrap(),
            (p("b"), 11)
        );
        assert_eq!(
            apply_category(&p("( *s a ( +s b c ) )"), &root, DistributeRight).unwrap(),
            (p("( +s ( *s a b ) ( *s a c ) )"), 64)
        );
        assert!(matches!(
            apply_category(&p("( +s a b )"), &root, Cancel),
            Err(AxiomError::NoMatchingAxiom { .. })
        ));
        // lowest id wins among simultaneous matches
        assert_eq!(
            apply_category(&p("( *s 1 1 )"), &root, NeutralOp)
                .unwrap()
                .1,
            10
        );
        // corrected row 44 is the partner of 43
        assert_eq!(
            apply_category(&p("( *m a A )"), &root, Commute).unwrap(),
            (p("( *m A a )"), 44)
        );
    }

    #[test]
    fn legal_moves_of_sum() {
        let moves = legal_moves(&p("( +s a b )"));
        assert_eq!(
            moves,
            vec![Move {
                path: Path::root(),
                category: Commute,
                resolved_id: 40
            }]
        );
        assert!(legal_moves(&p("a")).is_empty());
    }

    #[test]
    fn legal_moves_brute_force() {
        // every (path, category) that applies, and nothing else
        for s in [
            "( *s a ( +s ( *s 1 b ) ( *s 1 c ) ) )",
            "( -m ( +m ( *m A B ) ( *m A C ) ) ( tm ( tm A ) ) )",
            "( *v ( *m A B ) ( -v v o ) )",
        ] {
            let e = p(s);
            let mut brute = Vec::new();
            for path in e.paths() {
                for c in AxiomCategory::ALL {
                    if let Ok((_, id)) = apply_category(&e, &path, c) {
                        brute.push(Move {
                            path: path.clone(),
                            category: c,
                            resolved_id: id,
                        });
                    }
                }
            }
            assert_eq!(legal_moves(&e), brute, "{s}");
        }
    }

    #[test]
    fn inverse_pairs() {
        let root = Path::root();
        let e = p("( *s ( +s a b ) c )");
        let d = apply_axiom(&e, &root, axiom_by_id(52).unwrap()).unwrap();
        assert_eq!(apply_axiom(&d, &root, axiom_by_id(82).unwrap()).unwrap(), e);

        let e = p("( *s a ( *s b c ) )");
        let d = apply_axiom(&e, &root, axiom_by_id(96).unwrap()).unwrap();
        assert_eq!(
            apply_axiom(&d, &root, axiom_by_id(115).unwrap()).unwrap(),
            e
        );

        let e = p("( +m A ( tm B ) )");
        let once = apply_category(&e, &root, Commute).unwrap().0;
        assert_eq!(apply_category(&once, &root, Commute).unwrap().0, e);
    }

    #[test]
    fn pattern_render_round_trip() {
        for a in axiom_table() {
            assert_eq!(Pattern::parse(&a.lhs.to_string()).unwrap(), a.lhs);
            assert_eq!(Pattern::parse(&a.rhs.to_string()).unwrap(), a.rhs);
        }
    }
}
