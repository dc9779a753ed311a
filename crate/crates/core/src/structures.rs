//! Abstract switching structures: validation, relabeling quotient and
//! immediate-successor enumeration.
//!
//! A structure records `M` determinations of the statuses of `N` two-status
//! switches. Determination `m` (0-based here) has label `phi[m]`, a nonzero
//! integer whose absolute value is the switch (1-based) and whose sign is the
//! status. The causal arrangement of the determinations is a [`Docket`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causal::{check_permutation, CausalRelation, Docket};
use crate::error::{Error, Result};

/// Largest structure handled by the bitmask enumerators.
pub const MAX_DETERMINATIONS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwitchingStructure {
    m: usize,
    n: usize,
    docket: Docket,
    phi: Vec<i32>,
}

/// Per-switch determination indices `j_n(k)`, 0-based and increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminationIndex(pub Vec<Vec<usize>>);

impl DeterminationIndex {
    pub fn switch(&self, n: usize) -> &[usize] {
        &self.0[n - 1]
    }

    pub fn count(&self, n: usize) -> usize {
        self.0[n - 1].len()
    }
}

impl SwitchingStructure {
    /// Builds a structure after checking sizes and label ranges. The
    /// hypothesis-level conditions (ascending docket, onto labels,
    /// alternation) are left to [`validate`].
    pub fn new(n: usize, docket: Docket, phi: Vec<i32>) -> Result<Self> {
        let m = docket.m();
        if phi.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: phi.len(),
            });
        }
        if m > MAX_DETERMINATIONS {
            return Err(Error::InvalidStructure(format!(
                "at most {MAX_DETERMINATIONS} determinations are supported"
            )));
        }
        for (i, &p) in phi.iter().enumerate() {
            if p == 0 || p.unsigned_abs() as usize > n {
                return Err(Error::InvalidStructure(format!(
                    "label {p} of determination {} outside +-1..+-{n}",
                    i + 1
                )));
            }
        }
        Ok(SwitchingStructure { m, n, docket, phi })
    }

    /// Builds and validates in one step.
    pub fn new_valid(n: usize, docket: Docket, phi: Vec<i32>) -> Result<Self> {
        let s = SwitchingStructure::new(n, docket, phi)?;
        let report = validate(&s);
        if report.is_valid() {
            Ok(s)
        } else {
            Err(Error::InvalidStructure(report.to_string()))
        }
    }

    /// The smallest valid structure: one switch determined four times with
    /// alternating status along a causal chain.
    pub fn minimal() -> Self {
        SwitchingStructure::new(1, Docket::chain(4), vec![1, -1, 1, -1]).expect("minimal structure")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn docket(&self) -> &Docket {
        &self.docket
    }

    pub fn phi(&self) -> &[i32] {
        &self.phi
    }

    pub fn switch_of(&self, m: usize) -> usize {
        self.phi[m].unsigned_abs() as usize
    }

    pub fn determination_index(&self) -> DeterminationIndex {
        let mut idx = vec![Vec::new(); self.n];
        for (m, &p) in self.phi.iter().enumerate() {
            idx[p.unsigned_abs() as usize - 1].push(m);
        }
        DeterminationIndex(idx)
    }

    /// Status sequence of switch `n` (1-based), in determination order.
    pub fn statuses(&self, n: usize) -> Vec<i32> {
        self.phi
            .iter()
            .filter(|p| p.unsigned_abs() as usize == n)
            .map(|p| p.signum())
            .collect()
    }

    /// Removes determination `i`, keeping the order of the rest. The result
    /// keeps `n` and may fail validation.
    pub fn delete(&self, i: usize) -> SwitchingStructure {
        let keep: Vec<usize> = (0..self.m).filter(|&k| k != i).collect();
        SwitchingStructure {
            m: self.m - 1,
            n: self.n,
            docket: self.docket.restrict(&keep),
            phi: keep.iter().map(|&k| self.phi[k]).collect(),
        }
    }

    /// Applies a relabeling: `d' = d^pi`, `phi' = pi' . phi . pi`. Both
    /// permutations are 0-based; `pi_switch[n - 1] + 1` is the new label of
    /// switch `n`. Admissibility is not checked here.
    pub fn relabel(&self, pi: &[usize], pi_switch: &[usize]) -> Result<SwitchingStructure> {
        check_permutation(pi, self.m)?;
        check_permutation(pi_switch, self.n)?;
        let docket = self.docket.permute(pi)?;
        let phi = (0..self.m)
            .map(|i| {
                let p = self.phi[pi[i]];
                p.signum() * (pi_switch[p.unsigned_abs() as usize - 1] as i32 + 1)
            })
            .collect();
        SwitchingStructure::new(self.n, docket, phi)
    }

    /// Whether `(pi, pi_switch)` is an admissible relabeling: the image
    /// docket stays ascending and each switch's determinations keep their
    /// order.
    pub fn is_admissible(&self, pi: &[usize], pi_switch: &[usize]) -> bool {
        let Ok(image) = self.relabel(pi, pi_switch) else {
            return false;
        };
        if !image.docket.is_ascending() {
            return false;
        }
        let old = self.determination_index();
        let new = image.determination_index();
        (1..=self.n).all(|n| {
            let target = new.switch(pi_switch[n - 1] + 1);
            let source = old.switch(n);
            target.len() == source.len() && target.iter().zip(source).all(|(&a, &b)| pi[a] == b)
        })
    }

    pub(crate) fn past_masks(&self) -> Vec<u64> {
        self.docket.past_masks()
    }

    pub(crate) fn from_masks(n: usize, masks: &[u64], phi: Vec<i32>) -> SwitchingStructure {
        let docket = Docket::from_past_masks(masks).expect("masks form a docket");
        SwitchingStructure {
            m: masks.len(),
            n,
            docket,
            phi,
        }
    }
}

impl fmt::Display for SwitchingStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.phi.iter().map(|p| format!("{p:+}")).collect();
        write!(
            f,
            "S(M={}, N={}, phi=[{}], d={})",
            self.m,
            self.n,
            labels.join(","),
            self.docket.to_grid().join("|")
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureRepr {
    m: usize,
    n: usize,
    relations: Vec<String>,
    phi: Vec<i32>,
}

impl Serialize for SwitchingStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureRepr {
            m: self.m,
            n: self.n,
            relations: self.docket.to_grid(),
            phi: self.phi.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SwitchingStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = StructureRepr::deserialize(d)?;
        if r.relations.len() != r.m {
            return Err(D::Error::custom(format!(
                "structure declares m = {} but has {} relation rows",
                r.m,
                r.relations.len()
            )));
        }
        let docket = Docket::from_grid(&r.relations).map_err(D::Error::custom)?;
        SwitchingStructure::new(r.n, docket, r.phi).map_err(D::Error::custom)
    }
}

/// One failed hypothesis clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    /// `M` or `N` is zero.
    Empty,
    /// The docket is not ascending.
    NotAscending,
    /// The past relation is not transitive, so no regions realize it.
    Intransitive { triple: (usize, usize, usize) },
    /// Some switch label is never used.
    NotOnto { switch: usize },
    /// A switch is determined fewer than four times.
    TooFewDeterminations { switch: usize, count: usize },
    /// A switch never opens and closes twice.
    NoAlternation { switch: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "A1: M and N must be positive"),
            Violation::NotAscending => write!(f, "A2: docket is not ascending"),
            Violation::Intransitive { triple: (i, j, k) } => {
                write!(f, "A2: past relation not transitive at ({}, {}, {})", i + 1, j + 1, k + 1)
            }
            Violation::NotOnto { switch } => write!(f, "A3: switch {switch} is never determined"),
            Violation::TooFewDeterminations { switch, count } => {
                write!(f, "A5: switch {switch} has {count} determinations, needs 4")
            }
            Violation::NoAlternation { switch } => {
                write!(f, "A5: switch {switch} has no alternating subsequence of length 4")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Number of maximal runs of equal sign. An alternating subsequence of
/// length four exists iff there are at least four runs.
fn sign_runs(statuses: &[i32]) -> usize {
    if statuses.is_empty() {
        return 0;
    }
    1 + statuses.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn has_alternation(statuses: &[i32]) -> bool {
    sign_runs(statuses) >= 4
}

pub fn validate(s: &SwitchingStructure) -> ValidationReport {
    let mut violations = Vec::new();
    if s.m == 0 || s.n == 0 {
        violations.push(Violation::Empty);
    }
    if !s.docket.is_ascending() {
        violations.push(Violation::NotAscending);
    }
    if let Some(triple) = s.docket.transitivity_violation() {
        violations.push(Violation::Intransitive { triple });
    }
    for n in 1..=s.n {
        let st = s.statuses(n);
        if st.is_empty() {
            violations.push(Violation::NotOnto { switch: n });
            continue;
        }
        if st.len() < 4 {
            violations.push(Violation::TooFewDeterminations {
                switch: n,
                count: st.len(),
            });
        } else if !has_alternation(&st) {
            violations.push(Violation::NoAlternation { switch: n });
        }
    }
    ValidationReport { violations }
}

/// Which relations a new determination may have with another one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSet {
    /// Past or future, with the direction fixed by the ascending order.
    pub ordered: bool,
    pub spacelike: bool,
}

impl LinkSet {
    pub const ANY: LinkSet = LinkSet {
        ordered: true,
        spacelike: true,
    };
    pub const ORDERED: LinkSet = LinkSet {
        ordered: true,
        spacelike: false,
    };
    pub const SPACELIKE: LinkSet = LinkSet {
        ordered: false,
        spacelike: true,
    };
}

/// The finite menu of relation rows considered for new determinations.
/// `cross` governs links between a new determination and existing ones,
/// `fresh` the links among the four determinations of a new switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocketAlphabet {
    pub cross: LinkSet,
    pub fresh: LinkSet,
}

impl Default for DocketAlphabet {
    fn default() -> Self {
        DocketAlphabet {
            cross: LinkSet::ANY,
            fresh: LinkSet::ANY,
        }
    }
}

impl DocketAlphabet {
    /// New switches are determined along a causal chain.
    pub fn chained_new_switch() -> Self {
        DocketAlphabet {
            cross: LinkSet::ANY,
            fresh: LinkSet::ORDERED,
        }
    }
}

/// Past masks (`pred`) of a poset with their transpose (`succ`).
#[derive(Clone)]
struct Poset {
    pred: Vec<u64>,
    succ: Vec<u64>,
}

fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Opens a gap at bit `p`.
fn insert_bit(mask: u64, p: usize) -> u64 {
    let lo = mask & low_bits(p);
    let hi = mask & !low_bits(p);
    lo | (hi << 1)
}

impl Poset {
    fn from_pred(pred: Vec<u64>) -> Self {
        let m = pred.len();
        let mut succ = vec![0u64; m];
        for (j, &p) in pred.iter().enumerate() {
            for (i, s) in succ.iter_mut().enumerate() {
                if p & (1 << i) != 0 {
                    *s |= 1 << j;
                }
            }
        }
        Poset { pred, succ }
    }

    fn len(&self) -> usize {
        self.pred.len()
    }

    /// Inserts a new element at index `p` whose past is `down` and whose
    /// future is `up` (both in pre-insertion indices).
    fn insert(&self, p: usize, down: u64, up: u64) -> Poset {
        let m = self.len();
        let mut pred = Vec::with_capacity(m + 1);
        for i in 0..m {
            if i == p {
                pred.push(down);
            }
            let mut mask = insert_bit(self.pred[i], p);
            if up & (1 << i) != 0 {
                mask |= 1 << p;
            }
            pred.push(mask);
        }
        if p == m {
            pred.push(down);
        }
        Poset::from_pred(pred)
    }

    /// Down-closed subsets of `range` (a mask of indices below the insertion
    /// point).
    fn down_sets(&self, range: u64) -> Vec<u64> {
        let mut out = vec![0u64];
        for i in 0..self.len() {
            if range & (1 << i) == 0 {
                continue;
            }
            let need = self.pred[i];
            let extra: Vec<u64> = out.iter().filter(|&&d| d & need == need).map(|&d| d | (1 << i)).collect();
            out.extend(extra);
        }
        out
    }

    /// Up-closed subsets of `range` (a mask of indices at or above the
    /// insertion point that is itself closed upwards).
    fn up_sets(&self, range: u64) -> Vec<u64> {
        let mut out = vec![0u64];
        for i in (0..self.len()).rev() {
            if range & (1 << i) == 0 {
                continue;
            }
            let need = self.succ[i];
            let extra: Vec<u64> = out.iter().filter(|&&u| u & need == need).map(|&u| u | (1 << i)).collect();
            out.extend(extra);
        }
        out
    }

    /// Every admissible `(down, up)` row for an element inserted at index
    /// `p`, with `kinds[i]` giving the link set allowed towards element `i`.
    fn insertion_rows(&self, p: usize, kinds: &[LinkSet]) -> Vec<(u64, u64)> {
        let m = self.len();
        let before = low_bits(p);
        let after = low_bits(m) & !before;
        let mut forced = 0u64;
        let mut free = 0u64;
        for (i, k) in kinds.iter().enumerate() {
            match (k.ordered, k.spacelike) {
                (true, true) => free |= 1 << i,
                (true, false) => forced |= 1 << i,
                (false, _) => {}
            }
        }
        let allowed = free | forced;
        let mut rows = Vec::new();
        for down in self.down_sets(before & allowed) {
            if (before & forced) & !down != 0 {
                continue;
            }
            // Everything in the future of the new element must be in the
            // future of its whole past.
            let mut cap = after & allowed;
            for i in 0..m {
                if down & (1 << i) != 0 {
                    cap &= self.succ[i];
                }
            }
            for up in self.up_sets(cap) {
                if (after & forced) & !up != 0 {
                    continue;
                }
                rows.push((down, up));
            }
        }
        rows
    }
}

/// B1: a single new determination on an existing switch.
pub fn ordered_successors_b1(s: &SwitchingStructure, alphabet: &DocketAlphabet) -> BTreeSet<SwitchingStructure> {
    let poset = Poset::from_pred(s.past_masks());
    let m = s.m;
    if m + 1 > MAX_DETERMINATIONS {
        return BTreeSet::new();
    }
    let kinds = vec![alphabet.cross; m];
    (0..=m)
        .into_par_iter()
        .map(|p| {
            let mut out = BTreeSet::new();
            for (down, up) in poset.insertion_rows(p, &kinds) {
                let next = poset.insert(p, down, up);
                for label in 1..=s.n as i32 {
                    for sign in [1, -1] {
                        let mut phi = s.phi.clone();
                        phi.insert(p, sign * label);
                        out.insert(SwitchingStructure::from_masks(s.n, &next.pred, phi));
                    }
                }
            }
            out
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

/// Every position 4-subset `q1 < q2 < q3 < q4` of `0..total`.
fn four_subsets(total: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..total {
        for b in a + 1..total {
            for c in b + 1..total {
                for d in c + 1..total {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// B2: a new switch `N + 1` with four alternating determinations.
pub fn ordered_successors_b2(s: &SwitchingStructure, alphabet: &DocketAlphabet) -> BTreeSet<SwitchingStructure> {
    let m = s.m;
    if m + 4 > MAX_DETERMINATIONS {
        return BTreeSet::new();
    }
    let base = Poset::from_pred(s.past_masks());
    let label = s.n as i32 + 1;
    four_subsets(m + 4)
        .into_par_iter()
        .map(|qs| {
            let mut posets = vec![(base.clone(), vec![false; m])];
            for &q in &qs {
                let mut next = Vec::new();
                for (poset, is_new) in &posets {
                    let kinds: Vec<LinkSet> = is_new
                        .iter()
                        .map(|&fresh| if fresh { alphabet.fresh } else { alphabet.cross })
                        .collect();
                    for (down, up) in poset.insertion_rows(q, &kinds) {
                        let mut flags = is_new.clone();
                        flags.insert(q, true);
                        next.push((poset.insert(q, down, up), flags));
                    }
                }
                posets = next;
            }
            let mut out = BTreeSet::new();
            for (poset, _) in posets {
                for first in [1, -1] {
                    let mut phi = s.phi.clone();
                    for (k, &q) in qs.iter().enumerate() {
                        let sign = if k % 2 == 0 { first } else { -first };
                        phi.insert(q, sign * label);
                    }
                    out.insert(SwitchingStructure::from_masks(s.n + 1, &poset.pred, phi));
                }
            }
            out
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

/// Representative of a relabeling class: the admissible relabeling whose
/// token sequence is lexicographically smallest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct CanonicalForm(pub SwitchingStructure);

impl CanonicalForm {
    pub fn structure(&self) -> &SwitchingStructure {
        &self.0
    }

    pub fn into_structure(self) -> SwitchingStructure {
        self.0
    }
}

/// Per-position token: (switch label, status, mask of earlier positions in
/// the past of this one). Compared lexicographically.
type Token = (u32, i32, u64);

#[derive(Clone)]
struct Partial {
    order: Vec<usize>,
    placed: u64,
    labels: Vec<u32>,
    next_label: u32,
    /// Position mask of placed predecessors, per original element.
    pos_pred: Vec<u64>,
    /// Next undetermined index into each switch's determination list.
    cursor: Vec<usize>,
}

/// Lexicographically minimal admissible relabeling. Admissible orders are
/// the linear extensions of the past relation that keep each switch's
/// determinations in order; switch labels are assigned by first appearance,
/// which is optimal because labels compare first.
pub fn canonicalize(s: &SwitchingStructure) -> CanonicalForm {
    let m = s.m;
    let pred = s.past_masks();
    let succ = Poset::from_pred(pred.clone()).succ;
    let index = s.determination_index();
    let start = Partial {
        order: Vec::with_capacity(m),
        placed: 0,
        labels: vec![0; s.n + 1],
        next_label: 1,
        pos_pred: vec![0; m],
        cursor: vec![0; s.n + 1],
    };
    let mut frontier = vec![start];
    for pos in 0..m {
        let mut best: Option<Token> = None;
        let mut next: Vec<Partial> = Vec::new();
        let mut seen: HashSet<(u64, Vec<u32>, Vec<u64>)> = HashSet::new();
        for st in &frontier {
            for sw in 1..=s.n {
                let Some(&e) = index.switch(sw).get(st.cursor[sw]) else {
                    continue;
                };
                if pred[e] & !st.placed != 0 {
                    continue;
                }
                let label = if st.labels[sw] == 0 { st.next_label } else { st.labels[sw] };
                let token: Token = (label, -s.phi[e].signum(), st.pos_pred[e]);
                match best {
                    Some(b) if token > b => continue,
                    Some(b) if token < b => {
                        next.clear();
                        seen.clear();
                        best = Some(token);
                    }
                    None => best = Some(token),
                    _ => {}
                }
                let mut child = st.clone();
                child.order.push(e);
                child.placed |= 1 << e;
                if child.labels[sw] == 0 {
                    child.labels[sw] = label;
                    child.next_label += 1;
                }
                child.cursor[sw] += 1;
                for j in 0..m {
                    if succ[e] & (1 << j) != 0 {
                        child.pos_pred[j] |= 1 << pos;
                    }
                }
                // Two partial orders with the same placed set, labels and
                // predecessor position masks have identical futures.
                let unplaced: Vec<u64> = (0..m)
                    .filter(|&j| child.placed & (1 << j) == 0)
                    .map(|j| child.pos_pred[j])
                    .collect();
                if seen.insert((child.placed, child.labels.clone(), unplaced)) {
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    let winner = &frontier[0];
    let pi_switch: Vec<usize> = (1..=s.n).map(|sw| winner.labels[sw] as usize - 1).collect();
    let relabeled = s
        .relabel(&winner.order, &pi_switch)
        .expect("canonical relabeling is a bijection");
    CanonicalForm(relabeled)
}

/// The successor set: canonical forms of all B1 and B2 successors.
pub fn immediate_successors(s: &SwitchingStructure, alphabet: &DocketAlphabet) -> BTreeSet<CanonicalForm> {
    let mut ordered: Vec<SwitchingStructure> = ordered_successors_b1(s, alphabet).into_iter().collect();
    ordered.extend(ordered_successors_b2(s, alphabet));
    ordered.par_iter().map(canonicalize).collect::<Vec<_>>().into_iter().collect()
}

/// Successor counts for one structure, as reported by `structures enum`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuccessorCounts {
    pub b1: usize,
    pub b2: usize,
    pub immediate: usize,
    /// Immediate successors grouped by `(M', N')`.
    pub by_size: BTreeMap<String, usize>,
}

pub fn successor_counts(s: &SwitchingStructure, alphabet: &DocketAlphabet) -> SuccessorCounts {
    let b1 = ordered_successors_b1(s, alphabet).len();
    let b2 = ordered_successors_b2(s, alphabet).len();
    let xi = immediate_successors(s, alphabet);
    let mut by_size = BTreeMap::new();
    for c in &xi {
        *by_size.entry(format!("M={},N={}", c.0.m, c.0.n)).or_insert(0) += 1;
    }
    SuccessorCounts {
        b1,
        b2,
        immediate: xi.len(),
        by_size,
    }
}

/// Relation of determination `i` to `j` in a structure's docket.
pub fn relation(s: &SwitchingStructure, i: usize, j: usize) -> CausalRelation {
    s.docket.relation(i, j)
}
