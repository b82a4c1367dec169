//! Proof-space census and dataset statistics.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::axiom::{axiom_table, legal_moves, AxiomCategory};
use crate::expr::Expr;
use crate::generator::Sample;
use crate::proof::Proof;

/// Tree depth (levels) used by the census bound.
pub const CENSUS_TREE_DEPTH: u32 = 7;
/// Longest sequence length the census reports.
pub const CENSUS_MAX_LEN: usize = 7;
/// The reference first-step count the census is compared against.
pub const REFERENCE_FIRST_STEP_COUNT: u64 = 5933;
pub const REFERENCE_SHALLOW_COUNT: usize = 43;
pub const REFERENCE_DEEP_COUNT: usize = 104;
/// Axiom counts quoted elsewhere: the prose figure and the table caption.
pub const PROSE_AXIOM_COUNT: usize = 143;
pub const CAPTION_AXIOM_COUNT: usize = 147;

/// Reference rows of the complexity table, lengths 1 through 7.
pub const REFERENCE_ALL_POSSIBLE: [&str; 7] = [
    "5933", "3.5E+07", "2.1E+11", "1.2E+15", "7.4E+18", "4.4E+22", "2.6E+26",
];
pub const REFERENCE_ANY_AXIOM: [&str; 7] = [
    "226", "46900", "1.5E+07", "8.8E+09", "5.0E+12", "3.3E+15", "2.7E+18",
];
pub const REFERENCE_LEGAL: [&str; 7] = [
    "11.2", "77.8", "931", "15812", "3.4E+05", "8.2E+06", "1.8E+08",
];
pub const REFERENCE_UNIQUE: [&str; 7] = ["9.2", "47.4", "264", "1574", "10052", "65176", "4.6E+05"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("more than {0} distinct programs at one length")]
    MemoryBudgetExceeded(usize),
}

/// Nodes of a full binary tree with `depth` levels that have descendants
/// at least `below` levels further down.
pub fn nodes_with_descendants(depth: u32, below: u32) -> u64 {
    if below >= depth {
        0
    } else {
        (1u64 << (depth - below)) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomClass {
    pub id: u16,
    pub category: AxiomCategory,
    /// The left-hand side requires a child to be a specific operator.
    pub deep: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusReport {
    pub table_rows: usize,
    pub max_id: u16,
    pub classification: Vec<AxiomClass>,
    pub shallow_axiom_count: usize,
    pub deep_axiom_count: usize,
    /// Nodes with a child in a full depth-7 tree (63).
    pub operator_nodes: u64,
    /// Nodes with a grandchild in a full depth-7 tree (31).
    pub grandparent_nodes: u64,
    pub depth7_first_step_count: u64,
    pub first_step_delta: i64,
    /// First-step count raised to lengths 1..=7.
    pub per_length_all_possible: Vec<BigUint>,
}

pub fn census() -> CensusReport {
    let classification: Vec<AxiomClass> = axiom_table()
        .iter()
        .map(|a| AxiomClass {
            id: a.id,
            category: a.category,
            deep: a.lhs.op_depth() >= 2,
        })
        .collect();
    let deep = classification.iter().filter(|c| c.deep).count();
    let shallow = classification.len() - deep;
    let operator_nodes = nodes_with_descendants(CENSUS_TREE_DEPTH, 1);
    let grandparent_nodes = nodes_with_descendants(CENSUS_TREE_DEPTH, 2);
    let first = shallow as u64 * operator_nodes + deep as u64 * grandparent_nodes;
    let base = BigUint::from(first);
    let per_length = (1..=CENSUS_MAX_LEN as u32).map(|n| base.pow(n)).collect();
    CensusReport {
        table_rows: classification.len(),
        max_id: classification.iter().map(|c| c.id).max().unwrap_or(0),
        shallow_axiom_count: shallow,
        deep_axiom_count: deep,
        classification,
        operator_nodes,
        grandparent_nodes,
        depth7_first_step_count: first,
        first_step_delta: first as i64 - REFERENCE_FIRST_STEP_COUNT as i64,
        per_length_all_possible: per_length,
    }
}

impl CensusReport {
    /// Summary, the length table and the per-axiom classification as CSV
    /// sections separated by blank lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("quantity,computed,reference\n");
        let rows: [(&str, String, String); 9] = [
            (
                "table rows",
                self.table_rows.to_string(),
                self.table_rows.to_string(),
            ),
            (
                "highest id",
                self.max_id.to_string(),
                CAPTION_AXIOM_COUNT.to_string(),
            ),
            (
                "axioms in caption",
                self.table_rows.to_string(),
                CAPTION_AXIOM_COUNT.to_string(),
            ),
            (
                "axioms in prose",
                self.table_rows.to_string(),
                PROSE_AXIOM_COUNT.to_string(),
            ),
            (
                "shallow axioms",
                self.shallow_axiom_count.to_string(),
                REFERENCE_SHALLOW_COUNT.to_string(),
            ),
            (
                "deep axioms",
                self.deep_axiom_count.to_string(),
                REFERENCE_DEEP_COUNT.to_string(),
            ),
            (
                "operator nodes",
                self.operator_nodes.to_string(),
                "63".into(),
            ),
            (
                "grandparent nodes",
                self.grandparent_nodes.to_string(),
                "31".into(),
            ),
            (
                "first step count",
                format!(
                    "{}*{}+{}*{}={}",
                    self.operator_nodes,
                    self.shallow_axiom_count,
                    self.grandparent_nodes,
                    self.deep_axiom_count,
                    self.depth7_first_step_count
                ),
                "63*43+31*104=5933".into(),
            ),
        ];
        for (name, ours, theirs) in rows {
            let _ = writeln!(s, "{name},{ours},{theirs}");
        }
        let _ = writeln!(s, "first step delta,{},0", self.first_step_delta);
        s.push('\n');
        s.push_str("length,All Possible nodes and axioms,reference\n");
        for (i, v) in self.per_length_all_possible.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, v, REFERENCE_ALL_POSSIBLE[i]);
        }
        s.push('\n');
        s.push_str("id,category,class\n");
        for c in &self.classification {
            let class = if c.deep { "deep" } else { "shallow" };
            let _ = writeln!(s, "{},{},{}", c.id, c.category, class);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthCount {
    pub legal_sequences: BigUint,
    pub unique_programs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachabilityReport {
    /// Entry `n - 1` covers sequences of exactly `n` steps.
    pub per_length: Vec<LengthCount>,
}

/// Counts legal step sequences of each length from `p` and the distinct
/// programs they end on. Fails if a length holds more than `node_cap`
/// distinct programs.
pub fn reachability(
    p: &Expr,
    max_len: usize,
    node_cap: usize,
) -> Result<ReachabilityReport, AnalysisError> {
    let mut level: HashMap<Expr, BigUint> = HashMap::from([(p.clone(), BigUint::from(1u8))]);
    let mut per_length = Vec::with_capacity(max_len);
    for _ in 0..max_len {
        let mut next: HashMap<Expr, BigUint> = HashMap::new();
        for (e, mult) in &level {
            for mv in legal_moves(e) {
                let r = mv.apply(e).expect("legal move applies");
                *next.entry(r).or_default() += mult;
            }
            if next.len() > node_cap {
                return Err(AnalysisError::MemoryBudgetExceeded(node_cap));
            }
        }
        per_length.push(LengthCount {
            legal_sequences: next.values().sum(),
            unique_programs: next.len(),
        });
        level = next;
    }
    Ok(ReachabilityReport { per_length })
}

/// Dataset-averaged rows of the complexity table.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTable {
    pub samples: usize,
    /// Samples dropped because reachability hit the node cap.
    pub skipped: usize,
    /// Per length: mean of (nodes x 14)^n.
    pub any_axiom: Vec<f64>,
    pub legal_sequences: Vec<f64>,
    pub unique_programs: Vec<f64>,
}

pub fn sample_table(p1s: &[Expr], max_len: usize, node_cap: usize) -> SampleTable {
    let mut any = vec![0.0; max_len];
    let mut legal = vec![0.0; max_len];
    let mut unique = vec![0.0; max_len];
    let mut used = 0usize;
    let mut skipped = 0usize;
    for p in p1s {
        let Ok(r) = reachability(p, max_len, node_cap) else {
            skipped += 1;
            continue;
        };
        used += 1;
        let choices = (p.node_count() * AxiomCategory::ALL.len()) as f64;
        for (i, c) in r.per_length.iter().enumerate() {
            any[i] += choices.powi(i as i32 + 1);
            legal[i] += c.legal_sequences.to_f64().unwrap_or(f64::INFINITY);
            unique[i] += c.unique_programs as f64;
        }
    }
    let n = used.max(1) as f64;
    for v in [&mut any, &mut legal, &mut unique] {
        v.iter_mut().for_each(|x| *x /= n);
    }
    SampleTable {
        samples: used,
        skipped,
        any_axiom: any,
        legal_sequences: legal,
        unique_programs: unique,
    }
}

impl SampleTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row");
        for n in 1..=self.any_axiom.len() {
            let _ = write!(s, ",{n},reference {n}");
        }
        s.push('\n');
        let rows: [(&str, &Vec<f64>, &[&str; 7]); 3] = [
            (
                "Sample Node + Any Axiom",
                &self.any_axiom,
                &REFERENCE_ANY_AXIOM,
            ),
            (
                "Sample Node + Legal Axiom",
                &self.legal_sequences,
                &REFERENCE_LEGAL,
            ),
            (
                "Unique Programs from Sample",
                &self.unique_programs,
                &REFERENCE_UNIQUE,
            ),
        ];
        for (name, vals, refs) in rows {
            s.push_str(name);
            for (i, v) in vals.iter().enumerate() {
                let r = refs.get(i).copied().unwrap_or("");
                let _ = write!(s, ",{},{r}", format_count(*v));
            }
            s.push('\n');
        }
        s
    }
}

fn format_count(v: f64) -> String {
    if v.abs() >= 1e6 {
        format!("{v:.1E}")
    } else {
        format!("{v:.1}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StatsReport {
    pub samples: usize,
    /// Samples carrying a step list.
    pub proven_samples: usize,
    pub not_equal_samples: usize,
    /// Percentage of proven samples with at least one step of each category.
    pub category_pct: Vec<(AxiomCategory, f64)>,
    pub length_histogram: BTreeMap<usize, usize>,
    /// (legal moves on P1, proof length) -> samples.
    pub legal_vs_length: BTreeMap<(usize, usize), usize>,
    pub mean_first_step_legal: f64,
}

pub fn dataset_stats(samples: &[Sample]) -> StatsReport {
    let mut with_cat = [0usize; 14];
    let mut report = StatsReport {
        samples: samples.len(),
        ..StatsReport::default()
    };
    let mut legal_total = 0usize;
    for s in samples {
        let Proof::Steps(steps) = &s.proof else {
            report.not_equal_samples += 1;
            continue;
        };
        report.proven_samples += 1;
        for c in AxiomCategory::ALL {
            if steps.iter().any(|st| st.category == c) {
                with_cat[c.index()] += 1;
            }
        }
        *report.length_histogram.entry(steps.len()).or_default() += 1;
        let legal = legal_moves(&s.p1).len();
        legal_total += legal;
        *report
            .legal_vs_length
            .entry((legal, steps.len()))
            .or_default() += 1;
    }
    let n = report.proven_samples.max(1) as f64;
    report.category_pct = AxiomCategory::ALL
        .iter()
        .map(|c| (*c, 100.0 * with_cat[c.index()] as f64 / n))
        .collect();
    report.mean_first_step_legal = legal_total as f64 / n;
    report
}

impl StatsReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "quantity,value");
        let _ = writeln!(s, "samples,{}", self.samples);
        let _ = writeln!(s, "proven samples,{}", self.proven_samples);
        let _ = writeln!(s, "not equal samples,{}", self.not_equal_samples);
        let _ = writeln!(
            s,
            "mean legal moves on P1,{:.2}",
            self.mean_first_step_legal
        );
        s.push('\n');
        s.push_str("category,Samples with (%)\n");
        for (c, pct) in &self.category_pct {
            let _ = writeln!(s, "{c},{pct:.1}");
        }
        s.push('\n');
        s.push_str("proof length,samples\n");
        for (len, n) in &self.length_histogram {
            let _ = writeln!(s, "{len},{n}");
        }
        s.push('\n');
        s.push_str("legal moves,proof length,samples\n");
        for ((legal, len), n) in &self.legal_vs_length {
            let _ = writeln!(s, "{legal},{len},{n}");
        }
        s
    }
}

/// Mean number of legal moves over `programs` (length-1 legal sequences).
pub fn mean_legal_moves(programs: &[Expr]) -> f64 {
    if programs.is_empty() {
        return 0.0;
    }
    let total: usize = programs.iter().map(|p| legal_moves(p).len()).sum();
    total as f64 / programs.len() as f64
}
