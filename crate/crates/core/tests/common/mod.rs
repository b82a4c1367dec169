#![allow(dead_code)]

use lineq::generator::{build_dataset, GenConfig, Sample, Split};
use lineq::Expr;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn p(s: &str) -> Expr {
    Expr::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dataset(cfg: GenConfig, n: usize) -> Vec<Sample> {
    build_dataset(&cfg, Split::train_only(n), 4)
        .expect("dataset builds")
        .samples
}

/// AxiomStep10 samples whose proofs have at most `max_len` steps.
pub fn short_pairs(seed: u64, n: usize, max_len: usize) -> Vec<Sample> {
    let cfg = GenConfig {
        seed,
        max_proof_len: max_len,
        short_proof_keep_prob: 1.0,
        ..GenConfig::axiom_step10()
    };
    dataset(cfg, n)
}

/// The manual-verification pairs that must be provable.
pub const PROVABLE: [(&str, &str); 5] = [
    ("( *s a b )", "( *s b a )"),
    ("( *m ( tm ( tm A ) ) ( -m ( +m B C ) C ) )", "( *m A B )"),
    (
        "( -v ( *v ( *m A B ) v ) ( *v ( *m A B ) w ) )",
        "( *v ( *m A B ) ( -v v w ) )",
    ),
    (
        "( -m ( +m ( +m ( *m A B ) ( *m A C ) ) ( *m a D ) ) ( *m a D ) )",
        "( *m A ( +m B C ) )",
    ),
    // c(1A + B) = cB + cA, with the identity matrix standing in for 1
    (
        "( *m c ( +m ( *m I A ) B ) )",
        "( +m ( *m c B ) ( *m c A ) )",
    ),
];

/// The manual-verification pairs that must not be provable.
pub const UNPROVABLE: [(&str, &str); 3] = [
    ("( *m A B )", "( *m B A )"),
    (
        "( -v ( *v ( *m A B ) v ) ( *v ( *m B A ) w ) )",
        "( *v ( *m A B ) ( -v v w ) )",
    ),
    (
        "( *m ( *m ( tm A ) ( im ( *m A ( tm A ) ) ) ) A )",
        "( *m ( *m ( tm A ) ( tm ( *m A ( im A ) ) ) ) A )",
    ),
];
