//! Exhaustive enumeration of small ordered switching structures.
//!
//! A structure is a pair `(pred, phi)`: `pred[i]` is the bitmask of
//! determinations in the causal past of determination `i`, and `phi[i]` its
//! signed switch label. Only ascending dockets occur, so `pred[i]` uses bits
//! below `i` only.

use std::collections::BTreeSet;

/// Which relations are allowed on a pair of determinations.
#[derive(Clone, Copy, Debug)]
pub struct Links {
    pub ordered: bool,
    pub spacelike: bool,
}

impl Links {
    pub const ANY: Links = Links {
        ordered: true,
        spacelike: true,
    };

    fn allows(&self, related: bool) -> bool {
        if related {
            self.ordered
        } else {
            self.spacelike
        }
    }
}

/// Brute-force A5 test over all index quadruples.
pub fn has_alternating_subsequence(signs: &[i32]) -> bool {
    let n = signs.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let s = signs[a];
                    if signs[b] == -s && signs[c] == s && signs[d] == -s {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Packs a structure with at most 9 determinations and 8 switches into a
/// single integer key.
pub fn encode(pred: &[u64], phi: &[i32]) -> u128 {
    assert!(pred.len() <= 9 && pred.len() == phi.len());
    let mut key: u128 = pred.len() as u128;
    for (i, (&p, &l)) in pred.iter().zip(phi).enumerate() {
        let label = ((l.unsigned_abs() - 1) as u128) | if l < 0 { 8 } else { 0 };
        let chunk = (p as u128) | (label << 9);
        key |= chunk << (4 + 13 * i);
    }
    key
}

/// Inverse of [`encode`].
pub fn decode(key: u128) -> (Vec<u64>, Vec<i32>) {
    let m = (key & 0xf) as usize;
    let mut pred = Vec::with_capacity(m);
    let mut phi = Vec::with_capacity(m);
    for i in 0..m {
        let chunk = (key >> (4 + 13 * i)) & 0x1fff;
        pred.push((chunk & 0x1ff) as u64);
        let label = (chunk >> 9) as i32;
        let n = (label & 7) + 1;
        phi.push(if label & 8 != 0 { -n } else { n });
    }
    (pred, phi)
}

/// Whether a relation matrix, given as an upper-triangular past relation,
/// is transitive.
pub fn is_transitive(pred: &[u64]) -> bool {
    pred.iter().all(|&mask| {
        (0..pred.len())
            .filter(|&j| mask & (1 << j) != 0)
            .all(|j| pred[j] & !mask == 0)
    })
}

/// Visits every ascending transitive docket on `n` determinations. Each
/// element's past is drawn from all subsets of the earlier elements and the
/// partial matrix is filtered for transitivity as it grows.
pub fn for_each_ascending_docket(n: usize, visit: &mut impl FnMut(&[u64])) {
    fn rec(pred: &mut Vec<u64>, n: usize, visit: &mut impl FnMut(&[u64])) {
        let i = pred.len();
        if i == n {
            visit(pred);
            return;
        }
        for mask in 0..(1u64 << i) {
            pred.push(mask);
            if is_transitive(pred) {
                rec(pred, n, visit);
            }
            pred.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, visit);
}

/// Restriction of a docket to the listed determinations.
pub fn restrict(pred: &[u64], keep: &[usize]) -> Vec<u64> {
    keep.iter()
        .map(|&i| {
            keep.iter()
                .enumerate()
                .filter(|&(_, &j)| pred[i] & (1 << j) != 0)
                .fold(0u64, |acc, (b, _)| acc | (1 << b))
        })
        .collect()
}

/// All label sequences of length `m` over `+-1..+-n`.
pub fn all_labelings(m: usize, n: usize) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for p in &out {
            for l in 1..=n as i32 {
                for s in [1, -1] {
                    let mut q = p.clone();
                    q.push(s * l);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// B1 children by deletion: every structure on `m_child` determinations
/// with labels in `+-1..+-n` is generated, and each distinct structure
/// obtained by deleting one determination is credited with one child.
/// `visit(parent_key, child_pred, child_phi)` is called once per distinct
/// (parent, child) pair.
pub fn b1_by_deletion(m_child: usize, n: usize, visit: &mut impl FnMut(u128, &[u64], &[i32])) {
    let labelings = all_labelings(m_child, n);
    for_each_ascending_docket(m_child, &mut |pred| {
        let deleted: Vec<(Vec<usize>, Vec<u64>)> = (0..m_child)
            .map(|e| {
                let keep: Vec<usize> = (0..m_child).filter(|&k| k != e).collect();
                let r = restrict(pred, &keep);
                (keep, r)
            })
            .collect();
        for phi in &labelings {
            let mut parents = BTreeSet::new();
            for (keep, r) in &deleted {
                let sub: Vec<i32> = keep.iter().map(|&k| phi[k]).collect();
                parents.insert(encode(r, &sub));
            }
            for key in parents {
                visit(key, pred, phi);
            }
        }
    });
}

/// B2 children of every parent on `m_parent` determinations by deletion:
/// every docket on `m_parent + 4` determinations and every choice of four
/// positions for the new switch is generated; the links touching the new
/// positions are filtered by `cross` and `fresh`. `visit(parent_pred,
/// child_pred, positions)` is called for each child docket (the two status
/// patterns are left to the caller).
pub fn b2_by_deletion(
    m_parent: usize,
    cross: Links,
    fresh: Links,
    visit: &mut impl FnMut(&[u64], &[u64], [usize; 4]),
) {
    let total = m_parent + 4;
    let mut subsets = Vec::new();
    for a in 0..total {
        for b in a + 1..total {
            for c in b + 1..total {
                for d in c + 1..total {
                    subsets.push([a, b, c, d]);
                }
            }
        }
    }
    for_each_ascending_docket(total, &mut |pred| {
        for s in &subsets {
            let is_new = |i: usize| s.contains(&i);
            let mut ok = true;
            'pairs: for i in 0..total {
                for j in i + 1..total {
                    let related = pred[j] & (1 << i) != 0;
                    let links = match (is_new(i), is_new(j)) {
                        (false, false) => continue,
                        (true, true) => fresh,
                        _ => cross,
                    };
                    if !links.allows(related) {
                        ok = false;
                        break 'pairs;
                    }
                }
            }
            if !ok {
                continue;
            }
            let keep: Vec<usize> = (0..total).filter(|i| !is_new(*i)).collect();
            visit(&restrict(pred, &keep), pred, *s);
        }
    });
}

/// B2 children of one parent by positional generate-and-filter: for every
/// position set, every assignment of allowed relations to the pairs touching
/// a new position is tried and the full matrix filtered for transitivity.
/// Feasible when few links are free.
pub fn b2_positional(parent: &[u64], cross: Links, fresh: Links) -> Vec<(Vec<u64>, [usize; 4])> {
    let m = parent.len();
    let total = m + 4;
    let mut out = Vec::new();
    for a in 0..total {
        for b in a + 1..total {
            for c in b + 1..total {
                for d in c + 1..total {
                    let s = [a, b, c, d];
                    let old: Vec<usize> = (0..total).filter(|i| !s.contains(i)).collect();
                    // Pairs (i, j), i < j, touching a new position, with the
                    // options allowed for each.
                    let mut pairs = Vec::new();
                    for i in 0..total {
                        for j in i + 1..total {
                            let links = match (s.contains(&i), s.contains(&j)) {
                                (false, false) => continue,
                                (true, true) => fresh,
                                _ => cross,
                            };
                            let mut opts = Vec::new();
                            if links.spacelike {
                                opts.push(false);
                            }
                            if links.ordered {
                                opts.push(true);
                            }
                            pairs.push((i, j, opts));
                        }
                    }
                    let mut base = vec![0u64; total];
                    for (bi, &i) in old.iter().enumerate() {
                        for (bj, &j) in old.iter().enumerate() {
                            if parent[bj] & (1 << bi) != 0 {
                                base[j] |= 1 << i;
                            }
                        }
                    }
                    let mut choice = vec![0usize; pairs.len()];
                    loop {
                        let mut pred = base.clone();
                        for (k, (i, j, opts)) in pairs.iter().enumerate() {
                            if opts.is_empty() {
                                continue;
                            }
                            if opts[choice[k]] {
                                pred[*j] |= 1 << i;
                            }
                        }
                        if pairs.iter().all(|(_, _, o)| !o.is_empty()) && is_transitive(&pred) {
                            out.push((pred, s));
                        }
                        // Odometer increment.
                        let mut k = 0;
                        loop {
                            if k == pairs.len() {
                                break;
                            }
                            choice[k] += 1;
                            if choice[k] < pairs[k].2.len().max(1) {
                                break;
                            }
                            choice[k] = 0;
                            k += 1;
                        }
                        if k == pairs.len() {
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every relabeling of `(pred, phi)` that keeps the docket ascending and
/// each switch's determinations in order, returned as encoded keys. Orders
/// are produced as shuffles of the per-switch sequences; switch labels are
/// permuted in every way.
pub fn orbit(pred: &[u64], phi: &[i32], n: usize) -> BTreeSet<u128> {
    let m = pred.len();
    let mut per_switch: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, l) in phi.iter().enumerate() {
        per_switch[l.unsigned_abs() as usize - 1].push(i);
    }
    let mut orders = Vec::new();
    let mut cursor = vec![0usize; n];
    let mut cur = Vec::with_capacity(m);
    fn shuffles(
        per: &[Vec<usize>],
        cursor: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        m: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for s in 0..per.len() {
            if cursor[s] < per[s].len() {
                cur.push(per[s][cursor[s]]);
                cursor[s] += 1;
                shuffles(per, cursor, cur, m, out);
                cursor[s] -= 1;
                cur.pop();
            }
        }
    }
    shuffles(&per_switch, &mut cursor, &mut cur, m, &mut orders);
    let label_perms = permutations(n);
    let mut out = BTreeSet::new();
    for pi in &orders {
        // New position i holds old determination pi[i].
        let mut pos = vec![0usize; m];
        for (i, &p) in pi.iter().enumerate() {
            pos[p] = i;
        }
        let mut new_pred = vec![0u64; m];
        let mut ascending = true;
        for i in 0..m {
            for j in 0..m {
                if pred[pi[i]] & (1 << pi[j]) != 0 {
                    if j > i {
                        ascending = false;
                    }
                    new_pred[i] |= 1 << j;
                }
            }
        }
        if !ascending {
            continue;
        }
        for lp in &label_perms {
            let new_phi: Vec<i32> = pi
                .iter()
                .map(|&p| {
                    let l = phi[p];
                    l.signum() * (lp[l.unsigned_abs() as usize - 1] as i32 + 1)
                })
                .collect();
            out.insert(encode(&new_pred, &new_phi));
        }
    }
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascending_docket_counts() {
        // Naturally labeled posets: 1, 2, 7, 40, 357, 4824.
        for (n, expected) in [(1, 1), (2, 2), (3, 7), (4, 40), (5, 357), (6, 4824)] {
            let mut count = 0;
            for_each_ascending_docket(n, &mut |_| count += 1);
            assert_eq!(count, expected, "n = {n}");
        }
    }

    #[test]
    fn alternation() {
        assert!(has_alternating_subsequence(&[1, -1, 1, -1]));
        assert!(has_alternating_subsequence(&[-1, 1, 1, -1, 1]));
        assert!(!has_alternating_subsequence(&[1, 1, -1, -1, 1]));
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
    }
}
