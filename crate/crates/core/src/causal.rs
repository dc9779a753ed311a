//! Minkowski events, box/ball regions, region-level causal relations and
//! dockets.
//!
//! Coordinates put time first and use units with `c = 1`; the metric has
//! signature `(-, +, ..., +)`. A region `a` is in the past of `b` when every
//! point of `a` lies in the strict causal past of every point of `b`, and the
//! two are spacelike when every pair of points is spacelike separated. Any
//! other arrangement is [`CausalRelation::Mixed`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spacetime dimension used when none is configured.
pub const DEFAULT_DIMENSION: usize = 4;

/// A spacetime point, time coordinate first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Event(pub Vec<f64>);

impl Event {
    pub fn new(coords: Vec<f64>) -> Self {
        Event(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Minkowski product `-a0 b0 + a1 b1 + ...`.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| if i == 0 { -x * y } else { x * y })
        .sum()
}

/// A bounded spacetime set: an axis-aligned box or a Euclidean ball in
/// coordinate space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", try_from = "RegionRepr")]
pub enum Region {
    Box { lo: Event, hi: Event },
    Ball { center: Event, radius: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
enum RegionRepr {
    Box { lo: Event, hi: Event },
    Ball { center: Event, radius: f64 },
}

impl TryFrom<RegionRepr> for Region {
    type Error = Error;

    fn try_from(r: RegionRepr) -> Result<Self> {
        match r {
            RegionRepr::Box { lo, hi } => Region::new_box(lo.0, hi.0),
            RegionRepr::Ball { center, radius } => Region::new_ball(center.0, radius),
        }
    }
}

impl Region {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidRegion("box has no coordinates".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        for (k, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidRegion(format!("non-finite corner at axis {k}")));
            }
            if l > h {
                return Err(Error::InvalidRegion(format!(
                    "box corners not ordered at axis {k}: {l} > {h}"
                )));
            }
        }
        Ok(Region::Box {
            lo: Event(lo),
            hi: Event(hi),
        })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidRegion("ball has no coordinates".into()));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRegion("non-finite ball center".into()));
        }
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidRegion(format!("invalid ball radius {radius}")));
        }
        Ok(Region::Ball {
            center: Event(center),
            radius,
        })
    }

    /// A degenerate region holding a single event.
    pub fn point(coords: Vec<f64>) -> Result<Self> {
        Region::new_ball(coords, 0.0)
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.dim(),
            Region::Ball { center, .. } => center.dim(),
        }
    }

    /// Centre of the region in coordinate space.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Region::Box { lo, hi } => lo.0.iter().zip(&hi.0).map(|(l, h)| 0.5 * (l + h)).collect(),
            Region::Ball { center, .. } => center.0.clone(),
        }
    }

    /// Axis-aligned bounds `(lo, hi)` of the core box together with the
    /// ball radius that is Minkowski-added to it.
    fn core(&self) -> (&[f64], &[f64], f64) {
        match self {
            Region::Box { lo, hi } => (&lo.0, &hi.0, 0.0),
            Region::Ball { center, radius } => (&center.0, &center.0, *radius),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Region {
        let add = |e: &Event| Event(e.0.iter().zip(shift).map(|(a, b)| a + b).collect());
        match self {
            Region::Box { lo, hi } => Region::Box {
                lo: add(lo),
                hi: add(hi),
            },
            Region::Ball { center, radius } => Region::Ball {
                center: add(center),
                radius: *radius,
            },
        }
    }

    /// Whether the two regions share a point (Euclidean overlap in
    /// coordinate space, boundaries included).
    pub fn intersects(&self, other: &Region) -> bool {
        let (alo, ahi, ar) = self.core();
        let (blo, bhi, br) = other.core();
        // Distance between the two core boxes, compared with the summed radii.
        let gap2: f64 = alo
            .iter()
            .zip(ahi)
            .zip(blo.iter().zip(bhi))
            .map(|((al, ah), (bl, bh))| {
                let d = (bl - ah).max(al - bh).max(0.0);
                d * d
            })
            .sum();
        let r = ar + br;
        gap2 <= r * r + 1e-12
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => p
                .iter()
                .zip(lo.0.iter().zip(&hi.0))
                .all(|(x, (l, h))| *x >= l - 1e-12 && *x <= h + 1e-12),
            Region::Ball { center, radius } => {
                let d2: f64 = p.iter().zip(&center.0).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius + 1e-12
            }
        }
    }
}

/// Causal arrangement of one region relative to another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CausalRelation {
    Past,
    Future,
    Spacelike,
    Mixed,
}

impl CausalRelation {
    /// Relation seen from the other side.
    pub fn reverse(self) -> Self {
        match self {
            CausalRelation::Past => CausalRelation::Future,
            CausalRelation::Future => CausalRelation::Past,
            r => r,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            CausalRelation::Past => '<',
            CausalRelation::Future => '>',
            CausalRelation::Spacelike => '~',
            CausalRelation::Mixed => 'x',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '<' => Some(CausalRelation::Past),
            '>' => Some(CausalRelation::Future),
            '~' => Some(CausalRelation::Spacelike),
            'x' => Some(CausalRelation::Mixed),
            _ => None,
        }
    }
}

impl fmt::Display for CausalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CausalRelation::Past => "past",
            CausalRelation::Future => "future",
            CausalRelation::Spacelike => "spacelike",
            CausalRelation::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

/// The set `{y - x : x in a, y in b}` described as a box plus a ball radius.
struct Difference {
    lo: Vec<f64>,
    hi: Vec<f64>,
    radius: f64,
}

impl Difference {
    fn between(a: &Region, b: &Region) -> Self {
        let (alo, ahi, ar) = a.core();
        let (blo, bhi, br) = b.core();
        Difference {
            lo: blo.iter().zip(ahi).map(|(y, x)| y - x).collect(),
            hi: bhi.iter().zip(alo).map(|(y, x)| y - x).collect(),
            radius: ar + br,
        }
    }

    /// Largest spatial norm over the core box.
    fn max_spatial(&self) -> f64 {
        self.lo[1..]
            .iter()
            .zip(&self.hi[1..])
            .map(|(l, h)| {
                let m = l.abs().max(h.abs());
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest spatial norm over the core box.
    fn min_spatial(&self) -> f64 {
        self.lo[1..]
            .iter()
            .zip(&self.hi[1..])
            .map(|(l, h)| {
                let m = if *l > 0.0 {
                    *l
                } else if *h < 0.0 {
                    -h
                } else {
                    0.0
                };
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Every displacement is future-directed causal and nonzero.
    fn all_future_causal(&self) -> bool {
        let min_t = self.lo[0];
        // t - |x| is concave, so over box + ball its minimum is the box
        // minimum shifted by sqrt(2) times the radius.
        let margin = min_t - self.max_spatial() - std::f64::consts::SQRT_2 * self.radius;
        margin >= 0.0 && min_t - self.radius > 0.0
    }

    fn negated(&self) -> Difference {
        Difference {
            lo: self.hi.iter().map(|v| -v).collect(),
            hi: self.lo.iter().map(|v| -v).collect(),
            radius: self.radius,
        }
    }

    fn all_spacelike(&self) -> bool {
        let max_t = self.lo[0].abs().max(self.hi[0].abs());
        self.min_spatial() - max_t - std::f64::consts::SQRT_2 * self.radius > 0.0
    }
}

/// Region-level causal relation of `a` with respect to `b`.
pub fn causal_relation(a: &Region, b: &Region) -> Result<CausalRelation> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = Difference::between(a, b);
    if diff.all_future_causal() {
        Ok(CausalRelation::Past)
    } else if diff.negated().all_future_causal() {
        Ok(CausalRelation::Future)
    } else if diff.all_spacelike() {
        Ok(CausalRelation::Spacelike)
    } else {
        Ok(CausalRelation::Mixed)
    }
}

/// Causal arrangement of an ordered sequence of `m` regions, stored as an
/// `m x m` relation matrix. `relation(i, j)` is the relation of region `i`
/// to region `j`; the diagonal is ignored and stored as spacelike.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Docket {
    m: usize,
    rel: Vec<CausalRelation>,
    ascending: bool,
}

impl Docket {
    /// Builds a docket from a row-major relation matrix, checking the
    /// past/future antisymmetry and rejecting mixed entries.
    pub fn from_relations(m: usize, rel: Vec<CausalRelation>) -> Result<Self> {
        if rel.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: rel.len(),
            });
        }
        let mut rel = rel;
        for i in 0..m {
            rel[i * m + i] = CausalRelation::Spacelike;
            for j in 0..m {
                if i == j {
                    continue;
                }
                let r = rel[i * m + j];
                if r == CausalRelation::Mixed {
                    return Err(Error::MixedRelation(i, j));
                }
                if rel[j * m + i] != r.reverse() {
                    return Err(Error::InvalidDocket(format!(
                        "relations ({i},{j}) = {r} and ({j},{i}) = {} are not mirror images",
                        rel[j * m + i]
                    )));
                }
            }
        }
        let ascending = (0..m).all(|i| (i + 1..m).all(|j| rel[i * m + j] != CausalRelation::Future));
        Ok(Docket { m, rel, ascending })
    }

    /// Builds a docket whose only causal links are the `past` pairs `(i, j)`
    /// meaning region `i` precedes region `j`; all other pairs are spacelike.
    pub fn from_past_pairs(m: usize, past: &[(usize, usize)]) -> Result<Self> {
        let mut rel = vec![CausalRelation::Spacelike; m * m];
        for &(i, j) in past {
            if i >= m || j >= m || i == j {
                return Err(Error::InvalidDocket(format!("bad pair ({i},{j})")));
            }
            rel[i * m + j] = CausalRelation::Past;
            rel[j * m + i] = CausalRelation::Future;
        }
        Docket::from_relations(m, rel)
    }

    /// A totally ordered chain `0 < 1 < ... < m-1`.
    pub fn chain(m: usize) -> Self {
        let pairs: Vec<_> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        Docket::from_past_pairs(m, &pairs).expect("chain docket is well formed")
    }

    /// `m` mutually spacelike regions.
    pub fn antichain(m: usize) -> Self {
        Docket::from_past_pairs(m, &[]).expect("antichain docket is well formed")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_ascending(&self) -> bool {
        self.ascending
    }

    pub fn relation(&self, i: usize, j: usize) -> CausalRelation {
        self.rel[i * self.m + j]
    }

    pub fn relations(&self) -> &[CausalRelation] {
        &self.rel
    }

    /// Whether the past relation is transitive, which every docket obtained
    /// from actual regions satisfies. Returns the first offending triple.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                if self.relation(i, j) != CausalRelation::Past {
                    continue;
                }
                for k in 0..m {
                    if self.relation(j, k) == CausalRelation::Past && self.relation(i, k) != CausalRelation::Past {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// For each region, the bitmask of regions in its past. Requires `m <= 64`.
    pub fn past_masks(&self) -> Vec<u64> {
        assert!(self.m <= 64, "bitmask form supports at most 64 regions");
        (0..self.m)
            .map(|j| {
                (0..self.m)
                    .filter(|&i| self.relation(i, j) == CausalRelation::Past)
                    .fold(0u64, |acc, i| acc | (1 << i))
            })
            .collect()
    }

    /// Inverse of [`Docket::past_masks`].
    pub fn from_past_masks(masks: &[u64]) -> Result<Self> {
        let m = masks.len();
        let mut pairs = Vec::new();
        for (j, &mask) in masks.iter().enumerate() {
            for i in 0..m {
                if mask & (1 << i) != 0 {
                    pairs.push((i, j));
                }
            }
        }
        Docket::from_past_pairs(m, &pairs)
    }

    /// The docket `d^pi` with `rel'[i][j] = rel[pi(i)][pi(j)]` (0-based).
    pub fn permute(&self, pi: &[usize]) -> Result<Docket> {
        check_permutation(pi, self.m)?;
        let m = self.m;
        let mut rel = vec![CausalRelation::Spacelike; m * m];
        for i in 0..m {
            for j in 0..m {
                rel[i * m + j] = self.rel[pi[i] * m + pi[j]];
            }
        }
        Docket::from_relations(m, rel)
    }

    /// Restriction to the regions listed in `keep`, in that order.
    pub fn restrict(&self, keep: &[usize]) -> Docket {
        let k = keep.len();
        let mut rel = vec![CausalRelation::Spacelike; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                rel[a * k + b] = self.rel[i * self.m + j];
            }
        }
        Docket::from_relations(k, rel).expect("restriction of a docket is a docket")
    }

    /// Relation grid, one string per row (`<` past, `>` future, `~`
    /// spacelike, `.` diagonal).
    pub fn to_grid(&self) -> Vec<String> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| if i == j { '.' } else { self.relation(i, j).symbol() })
                    .collect()
            })
            .collect()
    }

    pub fn from_grid(rows: &[String]) -> Result<Self> {
        let m = rows.len();
        let mut rel = Vec::with_capacity(m * m);
        for (i, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != m {
                return Err(Error::InvalidDocket(format!(
                    "row {i} has {} entries, expected {m}",
                    chars.len()
                )));
            }
            for (j, c) in chars.into_iter().enumerate() {
                if i == j {
                    if c != '.' && c != '~' {
                        return Err(Error::InvalidDocket(format!("diagonal entry {i} is `{c}`")));
                    }
                    rel.push(CausalRelation::Spacelike);
                } else {
                    let r = CausalRelation::from_symbol(c)
                        .ok_or_else(|| Error::InvalidDocket(format!("unknown relation symbol `{c}`")))?;
                    rel.push(r);
                }
            }
        }
        Docket::from_relations(m, rel)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocketRepr {
    m: usize,
    relations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ascending: Option<bool>,
}

impl Serialize for Docket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DocketRepr {
            m: self.m,
            relations: self.to_grid(),
            ascending: Some(self.ascending),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Docket {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DocketRepr::deserialize(d)?;
        if repr.relations.len() != repr.m {
            return Err(serde::de::Error::custom(format!(
                "docket declares m = {} but has {} rows",
                repr.m,
                repr.relations.len()
            )));
        }
        let docket = Docket::from_grid(&repr.relations).map_err(serde::de::Error::custom)?;
        if let Some(flag) = repr.ascending {
            if flag != docket.ascending {
                return Err(serde::de::Error::custom("ascending flag disagrees with relations"));
            }
        }
        Ok(docket)
    }
}

pub(crate) fn check_permutation(pi: &[usize], m: usize) -> Result<()> {
    if pi.len() != m {
        return Err(Error::InvalidPermutation(format!(
            "permutation has {} entries for {m} elements",
            pi.len()
        )));
    }
    let mut seen = vec![false; m];
    for &p in pi {
        if p >= m || seen[p] {
            return Err(Error::InvalidPermutation(format!("{pi:?} is not a bijection")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Inverse of a 0-based permutation.
pub fn invert_permutation(pi: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; pi.len()];
    for (i, &p) in pi.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Docket of an ordered sequence of regions.
pub fn docket_of(regions: &[Region]) -> Result<Docket> {
    let m = regions.len();
    if let Some(first) = regions.first() {
        if let Some(bad) = regions.iter().find(|r| r.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
    }
    let mut rel = vec![CausalRelation::Spacelike; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let r = causal_relation(&regions[i], &regions[j])?;
            if r == CausalRelation::Mixed {
                return Err(Error::MixedRelation(i, j));
            }
            rel[i * m + j] = r;
            rel[j * m + i] = r.reverse();
        }
    }
    Docket::from_relations(m, rel)
}

/// Permutes a docket; `pi` is 0-based.
pub fn docket_permute(d: &Docket, pi: &[usize]) -> Result<Docket> {
    d.permute(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(t: f64, x: f64) -> Region {
        Region::new_box(vec![t, x, 0.0, 0.0], vec![t + 1.0, x + 1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn time_gap_larger_than_spatial_gap_is_past() {
        let a = unit_box(0.0, 0.0);
        let b = unit_box(10.0, 1.0);
        assert_eq!(causal_relation(&a, &b).unwrap(), CausalRelation::Past);
        assert_eq!(causal_relation(&b, &a).unwrap(), CausalRelation::Future);
    }

    #[test]
    fn identical_regions_are_mixed() {
        let a = unit_box(0.0, 0.0);
        assert_eq!(causal_relation(&a, &a).unwrap(), CausalRelation::Mixed);
        let p = Region::point(vec![0.0; 4]).unwrap();
        assert_eq!(causal_relation(&p, &p).unwrap(), CausalRelation::Mixed);
    }

    #[test]
    fn far_apart_boxes_are_spacelike() {
        let a = unit_box(0.0, 0.0);
        let b = unit_box(0.0, 10.0);
        assert_eq!(causal_relation(&a, &b).unwrap(), CausalRelation::Spacelike);
    }

    #[test]
    fn null_separated_points_are_causal() {
        let a = Region::point(vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        let b = Region::point(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(causal_relation(&a, &b).unwrap(), CausalRelation::Past);
    }

    #[test]
    fn ball_offsets_follow_the_light_cone() {
        // Ball of radius r around the origin against a point at time t on
        // the axis: past iff t - sqrt(2) r >= 0.
        let r = 1.0;
        let ball = Region::new_ball(vec![0.0, 0.0, 0.0, 0.0], r).unwrap();
        let just_after = Region::point(vec![std::f64::consts::SQRT_2 * r + 1e-9, 0.0, 0.0, 0.0]).unwrap();
        let just_before = Region::point(vec![std::f64::consts::SQRT_2 * r - 1e-6, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(causal_relation(&ball, &just_after).unwrap(), CausalRelation::Past);
        assert_eq!(causal_relation(&ball, &just_before).unwrap(), CausalRelation::Mixed);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Region::point(vec![0.0, 0.0]).unwrap();
        let b = Region::point(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(causal_relation(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invalid_regions_are_rejected() {
        assert!(Region::new_box(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(Region::new_ball(vec![0.0, 0.0], -1.0).is_err());
        assert!(Region::new_ball(vec![f64::NAN, 0.0], 1.0).is_err());
    }

    #[test]
    fn single_region_docket_is_ascending() {
        let d = docket_of(&[unit_box(0.0, 0.0)]).unwrap();
        assert_eq!(d.m(), 1);
        assert!(d.is_ascending());
    }

    #[test]
    fn spacelike_pair_docket() {
        let d = docket_of(&[unit_box(0.0, 0.0), unit_box(0.0, 10.0)]).unwrap();
        assert_eq!(d.relation(0, 1), CausalRelation::Spacelike);
        assert_eq!(d.relation(1, 0), CausalRelation::Spacelike);
        assert!(d.is_ascending());
    }

    #[test]
    fn out_of_order_chain_is_not_ascending() {
        // Region 2 (index 2) is placed before region 1 in time.
        let regions = vec![unit_box(0.0, 0.0), unit_box(20.0, 0.0), unit_box(10.0, 0.0), unit_box(30.0, 0.0)];
        let d = docket_of(&regions).unwrap();
        assert_eq!(d.relation(1, 2), CausalRelation::Future);
        assert!(!d.is_ascending());
    }

    #[test]
    fn mixed_pair_is_rejected_by_docket_of() {
        let err = docket_of(&[unit_box(0.0, 0.0), unit_box(0.5, 0.0)]).unwrap_err();
        assert_eq!(err, Error::MixedRelation(0, 1));
    }

    #[test]
    fn permutation_swaps_past_into_future() {
        let d = Docket::chain(2);
        assert_eq!(d.permute(&[0, 1]).unwrap(), d);
        let swapped = d.permute(&[1, 0]).unwrap();
        assert_eq!(swapped.relation(0, 1), CausalRelation::Future);
        assert!(!swapped.is_ascending());
    }

    #[test]
    fn permutation_size_mismatch() {
        let d = Docket::chain(3);
        assert!(d.permute(&[0, 1]).is_err());
        assert!(d.permute(&[0, 0, 1]).is_err());
    }

    #[test]
    fn grid_round_trip_and_json() {
        let d = Docket::from_past_pairs(3, &[(0, 2)]).unwrap();
        let grid = d.to_grid();
        assert_eq!(grid, vec![".~<", "~.~", ">~."]);
        let json = serde_json::to_string(&d).unwrap();
        let back: Docket = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"m":2,"relations":[".<","<."]}"#;
        assert!(serde_json::from_str::<Docket>(bad).is_err());
    }

    #[test]
    fn region_json_schema() {
        let r: Region = serde_json::from_str(r#"{"shape":"box","lo":[0,0],"hi":[1,2]}"#).unwrap();
        assert_eq!(r, Region::new_box(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap());
        let b: Region = serde_json::from_str(r#"{"shape":"ball","center":[0,1],"radius":0.5}"#).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(serde_json::from_str::<Region>(r#"{"shape":"ball","center":[0,1],"radius":-1}"#).is_err());
        assert!(serde_json::from_str::<Region>(r#"{"shape":"box","lo":[2],"hi":[1]}"#).is_err());
    }

    #[test]
    fn transitivity_detection() {
        let bad = Docket::from_past_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(bad.transitivity_violation(), Some((0, 1, 2)));
        assert_eq!(Docket::chain(4).transitivity_violation(), None);
    }
}
