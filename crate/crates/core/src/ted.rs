//! Ordered tree edit distance with unit insert, delete and relabel costs
//! (Zhang and Shasha).

use crate::expr::{Expr, Token};

struct Postorder {
    labels: Vec<Token>,
    /// Postorder index of each node's leftmost leaf.
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

impl Postorder {
    fn new(e: &Expr) -> Self {
        let mut labels = Vec::new();
        let mut leftmost = Vec::new();
        fn walk(e: &Expr, labels: &mut Vec<Token>, leftmost: &mut Vec<usize>) -> usize {
            let mut first_leaf = None;
            for c in e.children() {
                let l = walk(c, labels, leftmost);
                first_leaf.get_or_insert(l);
            }
            let idx = labels.len();
            labels.push(e.token());
            let l = first_leaf.unwrap_or(idx);
            leftmost.push(l);
            l
        }
        walk(e, &mut labels, &mut leftmost);
        let n = labels.len();
        // a keyroot is the highest node having a given leftmost leaf
        let mut keyroots: Vec<usize> = (0..n)
            .filter(|&i| !(i + 1..n).any(|j| leftmost[j] == leftmost[i]))
            .collect();
        keyroots.sort_unstable();
        Postorder {
            labels,
            leftmost,
            keyroots,
        }
    }
}

/// Minimum number of node insertions, deletions and relabelings turning `a`
/// into `b`.
pub fn tree_edit_distance(a: &Expr, b: &Expr) -> usize {
    let ta = Postorder::new(a);
    let tb = Postorder::new(b);
    let (n, m) = (ta.labels.len(), tb.labels.len());
    let mut td = vec![vec![0usize; m]; n];
    let mut fd = vec![vec![0usize; m + 1]; n + 1];

    for &i in &ta.keyroots {
        for &j in &tb.keyroots {
            let li = ta.leftmost[i];
            let lj = tb.leftmost[j];
            // forest distance over the ranges li..=i and lj..=j, offset by one
            fd[0][0] = 0;
            for x in li..=i {
                fd[x - li + 1][0] = fd[x - li][0] + 1;
            }
            for y in lj..=j {
                fd[0][y - lj + 1] = fd[0][y - lj] + 1;
            }
            for x in li..=i {
                for y in lj..=j {
                    let (fx, fy) = (x - li + 1, y - lj + 1);
                    let del = fd[fx - 1][fy] + 1;
                    let ins = fd[fx][fy - 1] + 1;
                    if ta.leftmost[x] == li && tb.leftmost[y] == lj {
                        let relabel = usize::from(ta.labels[x] != tb.labels[y]);
                        let sub = fd[fx - 1][fy - 1] + relabel;
                        fd[fx][fy] = del.min(ins).min(sub);
                        td[x][y] = fd[fx][fy];
                    } else {
                        let px = ta.leftmost[x] - li;
                        let py = tb.leftmost[y] - lj;
                        let sub = fd[px][py] + td[x][y];
                        fd[fx][fy] = del.min(ins).min(sub);
                    }
                }
            }
        }
    }
    td[n - 1][m - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn d(a: &str, b: &str) -> usize {
        tree_edit_distance(&Expr::parse(a).unwrap(), &Expr::parse(b).unwrap())
    }

    #[test]
    fn identical_is_zero() {
        assert_eq!(d("( +s a ( ns b ) )", "( +s a ( ns b ) )"), 0);
        assert_eq!(d("a", "a"), 0);
    }

    /// Direct recursive forest distance, memoized; exponential but fine
    /// for tiny trees.
    fn oracle(a: &Expr, b: &Expr) -> usize {
        fn fd(
            f: Vec<Expr>,
            g: Vec<Expr>,
            memo: &mut HashMap<(Vec<Expr>, Vec<Expr>), usize>,
        ) -> usize {
            if f.is_empty() {
                return g.iter().map(Expr::node_count).sum();
            }
            if g.is_empty() {
                return f.iter().map(Expr::node_count).sum();
            }
            if let Some(&v) = memo.get(&(f.clone(), g.clone())) {
                return v;
            }
            let v = f.last().unwrap().clone();
            let w = g.last().unwrap().clone();
            let mut f_minus_v = f[..f.len() - 1].to_vec();
            f_minus_v.extend(v.children().iter().cloned());
            let mut g_minus_w = g[..g.len() - 1].to_vec();
            g_minus_w.extend(w.children().iter().cloned());
            let del = fd(f_minus_v, g.clone(), memo) + 1;
            let ins = fd(f.clone(), g_minus_w, memo) + 1;
            let relabel = usize::from(v.token() != w.token());
            let sub = fd(v.children().to_vec(), w.children().to_vec(), memo)
                + fd(f[..f.len() - 1].to_vec(), g[..g.len() - 1].to_vec(), memo)
                + relabel;
            let out = del.min(ins).min(sub);
            memo.insert((f, g), out);
            out
        }
        fd(vec![a.clone()], vec![b.clone()], &mut HashMap::new())
    }

    #[test]
    fn small_cases() {
        assert_eq!(d("a", "b"), 1);
        assert_eq!(d("( +s a b )", "( +s b a )"), 2);
        assert_eq!(d("( +s a b )", "( -s a b )"), 1);
        assert_eq!(d("( ns a )", "a"), 1);
        assert_eq!(d("( +s a b )", "( +s a ( ns b ) )"), 1);
    }

    #[test]
    fn agrees_with_recursive_oracle() {
        let cases = [
            ("( *s a ( +s b c ) )", "( +s ( *s a b ) ( *s a c ) )"),
            ("( *s 1 b )", "b"),
            ("( *m A ( +m B C ) )", "( tm ( *m ( tm B ) A ) )"),
            ("( -v ( *v A v ) ( *v A w ) )", "( *v A ( -v v w ) )"),
            (
                "( /s ( +s a b ) ( -s c d ) )",
                "( -s ( /s b a ) ( ns ( +s d c ) ) )",
            ),
            ("( *m ( tm ( tm A ) ) ( -m ( +m B C ) C ) )", "( *m A B )"),
        ];
        for (a, b) in cases {
            let (ea, eb) = (Expr::parse(a).unwrap(), Expr::parse(b).unwrap());
            assert_eq!(tree_edit_distance(&ea, &eb), oracle(&ea, &eb), "{a} vs {b}");
        }
    }

    #[test]
    fn symmetric_and_bounded() {
        let pairs = [
            ("( *m A ( +m B C ) )", "( tm ( *m ( tm B ) A ) )"),
            (
                "( *v ( *m A B ) ( -v v w ) )",
                "( -v ( *v ( *m A B ) v ) ( *v ( *m A B ) w ) )",
            ),
            ("a", "( /s ( +s a b ) ( -s c d ) )"),
        ];
        for (a, b) in pairs {
            let (ea, eb) = (Expr::parse(a).unwrap(), Expr::parse(b).unwrap());
            let x = tree_edit_distance(&ea, &eb);
            assert_eq!(x, tree_edit_distance(&eb, &ea));
            assert!(x <= ea.node_count() + eb.node_count());
            assert!(x >= ea.node_count().abs_diff(eb.node_count()));
        }
    }
}
