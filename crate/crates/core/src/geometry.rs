//! Geometric manifestations: switch paths in Minkowski space, the regions
//! they sweep out, and the clause-by-clause constraint checker.
//!
//! Paths are piecewise: on each segment the velocity `u` is fixed in the
//! switch frame and the Lorentz part evolves as `L(t) = L_k exp((t - s_k) G)`
//! for a constant generator `G` (zero when absent). The position then
//! follows `dx/dt = L(t) u`.
//!
//! All indices in the JSON form (`theta`, `collapse_first`) are 1-based like
//! the hypothesis they encode; Rust-side accessors are 0-based unless
//! documented otherwise.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::causal::{causal_relation, docket_of, minkowski_dot, CausalRelation, Docket, Region};
use crate::error::{Error, Result};
use crate::quantum::Operator;
use crate::structures::SwitchingStructure;

/// Tolerance for Lorentz-group membership and unit velocities.
pub const LORENTZ_TOL: f64 = 1e-9;
/// Contact number bound.
pub const CONTACT_NUMBER: usize = 13;
/// Default sampling density along paths, per unit proper time.
pub const DEFAULT_SAMPLES_PER_UNIT: usize = 64;

fn metric(d: usize) -> DMatrix<f64> {
    let mut eta = DMatrix::identity(d, d);
    eta[(0, 0)] = -1.0;
    eta
}

fn matrix_from_rows(rows: &[Vec<f64>], d: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidPath(format!("{what} must be {d}x{d}")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidPath(format!("{what} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Residual of `L^T eta L = eta`, plus orientation flags.
pub fn lorentz_defect(l: &DMatrix<f64>) -> f64 {
    let eta = metric(l.nrows());
    let mut defect = (l.transpose() * &eta * l - &eta).amax();
    if l[(0, 0)] < 1.0 - LORENTZ_TOL {
        defect = defect.max(1.0 - l[(0, 0)]);
    }
    if l.determinant() <= 0.0 {
        defect = f64::INFINITY;
    }
    defect
}

/// Residual of `G^T eta + eta G = 0`.
pub fn generator_defect(g: &DMatrix<f64>) -> f64 {
    let eta = metric(g.nrows());
    (g.transpose() * &eta + &eta * g).amax()
}

/// Boost along spatial axis `axis` (1-based) with rapidity `eta`.
pub fn boost(d: usize, axis: usize, rapidity: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    m[(0, 0)] = rapidity.cosh();
    m[(axis, axis)] = rapidity.cosh();
    m[(0, axis)] = rapidity.sinh();
    m[(axis, 0)] = rapidity.sinh();
    m
}

/// Generator of boosts along spatial axis `axis` (1-based).
pub fn boost_generator(d: usize, axis: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m[(0, axis)] = 1.0;
    m[(axis, 0)] = 1.0;
    m
}

/// Generator of rotations from spatial axis `a` towards `b` (1-based).
pub fn rotation_generator(d: usize, a: usize, b: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m[(a, b)] = -1.0;
    m[(b, a)] = 1.0;
    m
}

/// Four-velocity of unit speed `v` along spatial axis `axis` (1-based).
pub fn velocity(d: usize, axis: usize, v: f64) -> Vec<f64> {
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let mut u = vec![0.0; d];
    u[0] = gamma;
    if axis > 0 {
        u[axis] = gamma * v;
    }
    u
}

/// One piece of a switch path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    /// Proper time at which the segment starts.
    pub start: f64,
    /// Velocity in the switch frame; the world velocity is `L(t) u`.
    pub velocity: Vec<f64>,
    /// Lorentz part at the segment start. Defaults to the identity on the
    /// first segment and to the continuation of the previous one otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorentz: Option<Vec<Vec<f64>>>,
    /// Constant Lie-algebra generator on the segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug)]
struct Segment {
    start: f64,
    u: DVector<f64>,
    l: DMatrix<f64>,
    g: DMatrix<f64>,
    /// Position at the segment start.
    x: DVector<f64>,
    /// Lorentz part declared in the input, if any, kept for the continuity
    /// check.
    declared: Option<DMatrix<f64>>,
}

/// A piecewise switch path starting at the base point with `L(0) = 1`.
#[derive(Clone, Debug)]
pub struct SwitchPath {
    dim: usize,
    total: f64,
    segments: Vec<Segment>,
    specs: Vec<SegmentSpec>,
}

/// `(exp(tau G), int_0^tau exp(s G) ds u)`, via the augmented exponential.
fn flow(g: &DMatrix<f64>, u: &DVector<f64>, tau: f64) -> (DMatrix<f64>, DVector<f64>) {
    let d = g.nrows();
    let mut aug = DMatrix::zeros(d + 1, d + 1);
    aug.view_mut((0, 0), (d, d)).copy_from(&(g * tau));
    aug.view_mut((0, d), (d, 1)).copy_from(&(u * tau));
    let e = aug.exp();
    (e.view((0, 0), (d, d)).into_owned(), e.view((0, d), (d, 1)).column(0).into_owned())
}

impl SwitchPath {
    /// Builds a path from its segments, starting at `origin`. Checks shapes
    /// and ordering only; physical clauses are reported by
    /// [`check_manifestation`].
    pub fn new(origin: &[f64], total: f64, specs: Vec<SegmentSpec>) -> Result<Self> {
        let d = origin.len();
        if d < 2 {
            return Err(Error::InvalidPath("spacetime dimension must be at least 2".into()));
        }
        if !total.is_finite() || total < 0.0 {
            return Err(Error::InvalidPath(format!("invalid total proper time {total}")));
        }
        if specs.is_empty() {
            return Err(Error::InvalidPath("path has no segments".into()));
        }
        if specs[0].start != 0.0 {
            return Err(Error::InvalidPath("first segment must start at proper time 0".into()));
        }
        let mut segments: Vec<Segment> = Vec::with_capacity(specs.len());
        for (k, spec) in specs.iter().enumerate() {
            if !spec.start.is_finite() || spec.start > total {
                return Err(Error::InvalidPath(format!("segment {k} starts outside [0, {total}]")));
            }
            if k > 0 && spec.start <= specs[k - 1].start {
                return Err(Error::InvalidPath(format!("segment {k} does not start after segment {}", k - 1)));
            }
            if spec.velocity.len() != d || spec.velocity.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPath(format!("segment {k} velocity must have {d} finite entries")));
            }
            let declared = spec
                .lorentz
                .as_ref()
                .map(|rows| matrix_from_rows(rows, d, "lorentz"))
                .transpose()?;
            let g = match &spec.generator {
                Some(rows) => matrix_from_rows(rows, d, "generator")?,
                None => DMatrix::zeros(d, d),
            };
            let (x, l) = match segments.last() {
                None => (DVector::from_column_slice(origin), DMatrix::identity(d, d)),
                Some(prev) => {
                    let (e, shift) = flow(&prev.g, &prev.u, spec.start - prev.start);
                    (&prev.x + &prev.l * shift, &prev.l * e)
                }
            };
            // A declared Lorentz part wins; continuity is checked later.
            let l = declared.clone().unwrap_or(l);
            segments.push(Segment {
                start: spec.start,
                u: DVector::from_column_slice(&spec.velocity),
                l,
                g,
                x,
                declared,
            });
        }
        Ok(SwitchPath {
            dim: d,
            total,
            segments,
            specs,
        })
    }

    /// A path at rest: `u = (1, 0, ..., 0)` and `L = 1` throughout.
    pub fn at_rest(origin: &[f64], total: f64) -> Self {
        let mut u = vec![0.0; origin.len()];
        u[0] = 1.0;
        SwitchPath::new(
            origin,
            total,
            vec![SegmentSpec {
                start: 0.0,
                velocity: u,
                lorentz: None,
                generator: None,
            }],
        )
        .expect("rest path is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn specs(&self) -> &[SegmentSpec] {
        &self.specs
    }

    pub fn segment_starts(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.start).collect()
    }

    fn segment_index(&self, t: f64) -> usize {
        self.segments.iter().rposition(|s| s.start <= t).unwrap_or(0)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.total).contains(&t) || t.is_nan() {
            return Err(Error::TimeOutOfRange { t, total: self.total });
        }
        Ok(())
    }

    /// The Poincare data `(x(t), L(t))` at proper time `t`.
    pub fn poincare_at(&self, t: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_time(t)?;
        let seg = &self.segments[self.segment_index(t)];
        let (e, shift) = flow(&seg.g, &seg.u, t - seg.start);
        Ok((&seg.x + &seg.l * shift, &seg.l * e))
    }

    pub fn position(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.poincare_at(t)?.0.iter().copied().collect())
    }

    /// World velocity `L(t) u` on the segment containing `t`.
    pub fn velocity_at(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let seg = &self.segments[self.segment_index(t)];
        let (e, _) = flow(&seg.g, &seg.u, t - seg.start);
        Ok((&seg.l * e * &seg.u).iter().copied().collect())
    }

    /// Largest `|u.u + 1|` of the central-difference velocity at `per_segment`
    /// interior samples of every segment.
    pub fn proper_time_residual(&self, per_segment: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, seg) in self.segments.iter().enumerate() {
            let end = self.segments.get(k + 1).map_or(self.total, |s| s.start);
            let len = end - seg.start;
            if len <= 0.0 {
                continue;
            }
            let h = (len * 1e-4).min(1e-4);
            for i in 0..per_segment {
                let t = seg.start + len * (i as f64 + 0.5) / per_segment as f64;
                let lo = (t - h).max(seg.start);
                let hi = (t + h).min(end);
                let a = self.position(lo).expect("sample in range");
                let b = self.position(hi).expect("sample in range");
                let u: Vec<f64> = a.iter().zip(&b).map(|(p, q)| (q - p) / (hi - lo)).collect();
                worst = worst.max((minkowski_dot(&u, &u) + 1.0).abs());
            }
        }
        worst
    }
}

/// Transformed region `x(t) + L(t)(y - x)` for `y` in `base`. Exact when
/// `L(t)` is the identity; otherwise a bounding region: the box spanned by
/// the images of a box's corners, or a ball whose radius is scaled by the
/// spectral norm of `L(t)`.
pub fn transform_region(base: &Region, base_point: &[f64], x: &DVector<f64>, l: &DMatrix<f64>) -> Region {
    let d = base_point.len();
    let map = |y: &[f64]| -> Vec<f64> {
        let rel = DVector::from_iterator(d, y.iter().zip(base_point).map(|(a, b)| a - b));
        (x + l * rel).iter().copied().collect()
    };
    let identity = (l - DMatrix::<f64>::identity(d, d)).amax() < 1e-14;
    match base {
        Region::Ball { center, radius } => {
            let scale = if identity { 1.0 } else { l.clone().svd(false, false).singular_values.max() };
            Region::new_ball(map(&center.0), radius * scale).expect("image of a valid ball")
        }
        Region::Box { lo, hi } => {
            if identity {
                return Region::new_box(map(&lo.0), map(&hi.0)).expect("translated box");
            }
            let mut blo = vec![f64::INFINITY; d];
            let mut bhi = vec![f64::NEG_INFINITY; d];
            for corner in 0..(1usize << d) {
                let y: Vec<f64> = (0..d)
                    .map(|k| if corner & (1 << k) != 0 { hi.0[k] } else { lo.0[k] })
                    .collect();
                for (k, v) in map(&y).into_iter().enumerate() {
                    blo[k] = blo[k].min(v);
                    bhi[k] = bhi[k].max(v);
                }
            }
            Region::new_box(blo, bhi).expect("bounding box of corners")
        }
    }
}

/// Per-switch manifestation data as stored in JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchSpec {
    pub total_time: f64,
    pub determination_times: Vec<f64>,
    pub collapse_times: Vec<f64>,
    /// Index (1-based) of the first collapse this switch records.
    pub collapse_first: usize,
    pub path: Vec<SegmentSpec>,
    /// Indices of `P_n` and `Q_n` in the projection registry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestationSpec {
    pub base_point: Vec<f64>,
    pub base_region: Region,
    /// Per switch `[n', k', k'']`, 1-based.
    pub theta: Vec<[usize; 3]>,
    pub switches: Vec<SwitchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<Vec<Operator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_unit: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SwitchData {
    pub spec: SwitchSpec,
    pub path: SwitchPath,
}

/// A parsed manifestation with its paths resolved.
#[derive(Clone, Debug)]
pub struct Manifestation {
    pub base_point: Vec<f64>,
    pub base_region: Region,
    pub theta: Vec<[usize; 3]>,
    pub switches: Vec<SwitchData>,
    pub registry: Option<Vec<Operator>>,
    pub samples_per_unit: usize,
}

impl Manifestation {
    pub fn from_spec(spec: ManifestationSpec) -> Result<Self> {
        let d = spec.base_point.len();
        if spec.base_region.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: spec.base_region.dim(),
            });
        }
        if spec.switches.is_empty() {
            return Err(Error::InvalidManifestation("no switches".into()));
        }
        if spec.theta.len() != spec.switches.len() {
            return Err(Error::InvalidManifestation(format!(
                "theta has {} entries for {} switches",
                spec.theta.len(),
                spec.switches.len()
            )));
        }
        let samples = spec.samples_per_unit.unwrap_or(DEFAULT_SAMPLES_PER_UNIT);
        if samples == 0 || samples > 100_000 {
            return Err(Error::InvalidManifestation("samples_per_unit must be in 1..=100000".into()));
        }
        let mut switches = Vec::with_capacity(spec.switches.len());
        for (n, sw) in spec.switches.iter().enumerate() {
            if sw.determination_times.iter().chain(&sw.collapse_times).any(|t| !t.is_finite()) {
                return Err(Error::InvalidManifestation(format!("switch {} has non-finite times", n + 1)));
            }
            if sw.total_time.is_finite() && sw.total_time * samples as f64 > 1e7 {
                return Err(Error::InvalidManifestation(format!("switch {} path is too long to sample", n + 1)));
            }
            let path = SwitchPath::new(&spec.base_point, sw.total_time, sw.path.clone())?;
            switches.push(SwitchData { spec: sw.clone(), path });
        }
        Ok(Manifestation {
            base_point: spec.base_point,
            base_region: spec.base_region,
            theta: spec.theta,
            switches,
            registry: spec.registry,
            samples_per_unit: samples,
        })
    }

    pub fn to_spec(&self) -> ManifestationSpec {
        ManifestationSpec {
            base_point: self.base_point.clone(),
            base_region: self.base_region.clone(),
            theta: self.theta.clone(),
            switches: self.switches.iter().map(|s| s.spec.clone()).collect(),
            registry: self.registry.clone(),
            samples_per_unit: Some(self.samples_per_unit),
        }
    }

    pub fn n(&self) -> usize {
        self.switches.len()
    }

    /// Activation time `S_n` (first determination), `n` 0-based.
    pub fn activation(&self, n: usize) -> f64 {
        self.switches[n].spec.determination_times.first().copied().unwrap_or(0.0)
    }

    /// Region occupied by switch `n` (0-based) at proper time `t`.
    pub fn region_at(&self, n: usize, t: f64) -> Result<Region> {
        let (x, l) = self.switches[n].path.poincare_at(t)?;
        Ok(transform_region(&self.base_region, &self.base_point, &x, &l))
    }

    /// Uniform sample times over `[S_n, T_n]`, endpoints and determination
    /// times included.
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        let sw = &self.switches[n];
        let s = self.activation(n).max(0.0);
        let t = sw.spec.total_time;
        let count = (((t - s) * self.samples_per_unit as f64).ceil() as usize).max(1);
        let mut out: Vec<f64> = (0..=count).map(|i| s + (t - s) * i as f64 / count as f64).collect();
        out.extend(sw.spec.determination_times.iter().filter(|&&x| x >= s && x <= t));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Outcome of one clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub status: ClauseStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestationReport {
    pub clauses: Vec<ClauseResult>,
    pub samples_per_unit: usize,
    /// Largest number of other switches touching one switch at a sampled
    /// time.
    pub max_contacts: usize,
    pub contact_bound: usize,
    pub pass: bool,
}

impl ManifestationReport {
    pub fn clause(&self, name: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.clause == name)
    }

    pub fn passes(&self, name: &str) -> bool {
        self.clause(name).is_some_and(|c| c.status != ClauseStatus::Fail)
    }
}

struct Checker<'a> {
    m: &'a Manifestation,
    s: &'a SwitchingStructure,
    clauses: Vec<ClauseResult>,
}

impl Checker<'_> {
    fn record(&mut self, clause: &str, failures: Vec<String>) {
        let (status, detail) = if failures.is_empty() {
            (ClauseStatus::Pass, "ok".to_string())
        } else {
            (ClauseStatus::Fail, failures.join("; "))
        };
        self.clauses.push(ClauseResult {
            clause: clause.into(),
            status,
            detail,
        });
    }

    fn skip(&mut self, clause: &str, why: &str) {
        self.clauses.push(ClauseResult {
            clause: clause.into(),
            status: ClauseStatus::Skipped,
            detail: why.into(),
        });
    }
}

/// Regions `A_m` at the determination times, in determination order.
/// Requires per-switch determination counts to match the structure.
pub fn determination_regions(m: &Manifestation, s: &SwitchingStructure) -> Result<Vec<Region>> {
    let index = s.determination_index();
    if m.n() != s.n() {
        return Err(Error::InvalidManifestation(format!(
            "manifestation has {} switches, structure has {}",
            m.n(),
            s.n()
        )));
    }
    let mut regions: Vec<Option<Region>> = vec![None; s.m()];
    for n in 1..=s.n() {
        let times = &m.switches[n - 1].spec.determination_times;
        let js = index.switch(n);
        if times.len() != js.len() {
            return Err(Error::InvalidManifestation(format!(
                "switch {n} has {} determination times, structure expects {}",
                times.len(),
                js.len()
            )));
        }
        for (&j, &t) in js.iter().zip(times) {
            regions[j] = Some(m.region_at(n - 1, t)?);
        }
    }
    Ok(regions.into_iter().map(|r| r.expect("every determination assigned")).collect())
}

/// Docket of the determination regions.
pub fn docket_from_manifestation(m: &Manifestation, s: &SwitchingStructure) -> Result<Docket> {
    docket_of(&determination_regions(m, s)?)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Whether `y` lies in the closure of the causal future of `x`.
fn causally_after(x: &[f64], y: &[f64]) -> bool {
    let dt = y[0] - x[0];
    let dx = x[1..].iter().zip(&y[1..]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    dt >= dx - 1e-9
}

pub fn check_manifestation(m: &Manifestation, s: &SwitchingStructure) -> ManifestationReport {
    let mut c = Checker {
        m,
        s,
        clauses: Vec::new(),
    };
    let index = s.determination_index();
    let counts_match = m.n() == s.n()
        && (1..=s.n()).all(|n| m.switches[n - 1].spec.determination_times.len() == index.count(n));

    // C2: determination times ordered inside [0, T_n].
    let mut f = Vec::new();
    if m.n() != s.n() {
        f.push(format!("{} switches for a structure with {}", m.n(), s.n()));
    }
    for (n, sw) in m.switches.iter().enumerate() {
        let ts = &sw.spec.determination_times;
        if n < s.n() && ts.len() != index.count(n + 1) {
            f.push(format!("switch {}: {} times, expected {}", n + 1, ts.len(), index.count(n + 1)));
        }
        if ts.first().is_some_and(|&t| t < 0.0) || ts.last().is_some_and(|&t| t > sw.spec.total_time) {
            f.push(format!("switch {}: times outside [0, T]", n + 1));
        }
        if ts.windows(2).any(|w| w[0] >= w[1]) {
            f.push(format!("switch {}: times not strictly increasing", n + 1));
        }
    }
    c.record("C2", f);

    // C3: collapse times start at S_n and are ordered.
    let mut f = Vec::new();
    for (n, sw) in m.switches.iter().enumerate() {
        let ct = &sw.spec.collapse_times;
        if sw.spec.collapse_first < 1 {
            f.push(format!("switch {}: collapse indices start below 1", n + 1));
        }
        if ct.is_empty() {
            f.push(format!("switch {}: no collapse times", n + 1));
            continue;
        }
        if (ct[0] - m.activation(n)).abs() > 1e-12 {
            f.push(format!("switch {}: first collapse {} differs from S_n = {}", n + 1, ct[0], m.activation(n)));
        }
        if ct.windows(2).any(|w| w[0] > w[1]) || ct.last().is_some_and(|&t| t > sw.spec.total_time) {
            f.push(format!("switch {}: collapse times not ordered within [S_n, T_n]", n + 1));
        }
    }
    c.record("C3", f);

    // C4/C5: continuity of the Lorentz part and group membership.
    let mut f5 = Vec::new();
    for (n, sw) in m.switches.iter().enumerate() {
        let segs = &sw.path.segments;
        for (k, seg) in segs.iter().enumerate() {
            let def = lorentz_defect(&seg.l);
            if def > LORENTZ_TOL {
                f5.push(format!("switch {} segment {k}: L not in the restricted Lorentz group ({def:.2e})", n + 1));
            }
            let gdef = generator_defect(&seg.g);
            if gdef > LORENTZ_TOL {
                f5.push(format!("switch {} segment {k}: generator outside the Lie algebra ({gdef:.2e})", n + 1));
            }
            if let Some(declared) = &seg.declared {
                let expected = if k == 0 {
                    DMatrix::identity(sw.path.dim, sw.path.dim)
                } else {
                    let prev = &segs[k - 1];
                    &prev.l * flow(&prev.g, &prev.u, seg.start - prev.start).0
                };
                let jump = (declared - &expected).amax();
                if jump > LORENTZ_TOL * expected.amax().max(1.0) {
                    f5.push(format!("switch {} segment {k}: L jumps by {jump:.2e}", n + 1));
                }
            }
        }
    }
    c.record("C5", f5);

    // C6: the frame velocity changes only at collapse times once active.
    let mut f = Vec::new();
    for (n, sw) in m.switches.iter().enumerate() {
        let segs = &sw.path.segments;
        let s_n = m.activation(n);
        for k in 1..segs.len() {
            if segs[k].start <= s_n + 1e-12 || (&segs[k].u - &segs[k - 1].u).amax() < 1e-12 {
                continue;
            }
            if !sw.spec.collapse_times.iter().any(|&t| (t - segs[k].start).abs() < 1e-9) {
                f.push(format!("switch {}: velocity changes at {} between collapses", n + 1, segs[k].start));
            }
        }
    }
    c.record("C6", f);

    // C7: unit, future-directed, timelike velocities.
    let mut f = Vec::new();
    for (n, sw) in m.switches.iter().enumerate() {
        for (k, seg) in sw.path.segments.iter().enumerate() {
            let u: Vec<f64> = seg.u.iter().copied().collect();
            let norm = minkowski_dot(&u, &u);
            if (norm + 1.0).abs() > LORENTZ_TOL || u[0] <= 0.0 {
                f.push(format!("switch {} segment {k}: u.u = {norm}, u0 = {}", n + 1, u[0]));
            }
        }
    }
    c.record("C7", f);

    // C8: collapse m follows at least m determinations.
    if counts_match {
        let mut points = Vec::new();
        let mut f = Vec::new();
        for (n, sw) in m.switches.iter().enumerate() {
            for &t in &sw.spec.determination_times {
                match sw.path.position(t) {
                    Ok(p) => points.push(p),
                    Err(e) => f.push(format!("switch {}: {e}", n + 1)),
                }
            }
        }
        for (n, sw) in m.switches.iter().enumerate() {
            for (r, &t) in sw.spec.collapse_times.iter().enumerate() {
                let idx = sw.spec.collapse_first + r;
                let Ok(x) = sw.path.position(t) else {
                    f.push(format!("switch {}: collapse time {t} outside path", n + 1));
                    continue;
                };
                let count = points.iter().filter(|p| causally_after(p, &x)).count();
                if count < idx {
                    f.push(format!("switch {}: collapse {idx} follows only {count} determinations", n + 1));
                }
            }
        }
        c.record("C8", f);
    } else {
        c.skip("C8", "determination counts do not match the structure");
    }

    // C9: the determination regions have the structure's docket.
    let regions = if counts_match { determination_regions(m, s).ok() } else { None };
    match &regions {
        None => c.skip("C9", "determination regions unavailable"),
        Some(regions) => match docket_of(regions) {
            Ok(d) if &d == s.docket() => c.record("C9", vec![]),
            Ok(d) => c.record(
                "C9",
                vec![format!("docket {} differs from {}", d.to_grid().join("|"), s.docket().to_grid().join("|"))],
            ),
            Err(e) => c.record("C9", vec![e.to_string()]),
        },
    }

    // Sampled tubes, shared by C10-C12.
    let mut tubes: Vec<Vec<(f64, Region)>> = Vec::with_capacity(m.n());
    let mut tube_errors = Vec::new();
    for n in 0..m.n() {
        let mut tube = Vec::new();
        for t in m.sample_times(n) {
            match m.region_at(n, t) {
                Ok(r) => tube.push((t, r)),
                Err(e) => tube_errors.push(format!("switch {}: {e}", n + 1)),
            }
        }
        tubes.push(tube);
    }

    // C10: determination regions with spacelike-separated points are
    // connected through overlapping tube samples.
    match &regions {
        None => c.skip("C10", "determination regions unavailable"),
        Some(regions) => {
            let mut nodes: Vec<&Region> = regions.iter().collect();
            for tube in &tubes {
                nodes.extend(tube.iter().map(|(_, r)| r));
            }
            let mut parent: Vec<usize> = (0..nodes.len()).collect();
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    if nodes[i].intersects(nodes[j]) {
                        union(&mut parent, i, j);
                    }
                }
            }
            let mut f = tube_errors.clone();
            for a in 0..regions.len() {
                for b in a + 1..regions.len() {
                    let rel = causal_relation(&regions[a], &regions[b]).unwrap_or(CausalRelation::Mixed);
                    let has_spacelike = matches!(rel, CausalRelation::Spacelike | CausalRelation::Mixed);
                    if has_spacelike && find(&mut parent, a) != find(&mut parent, b) {
                        f.push(format!("A{} and A{} are not connected", a + 1, b + 1));
                    }
                }
            }
            c.record("C10", f);
        }
    }

    // C11: contact number.
    let mut max_contacts = 0;
    let mut f = Vec::new();
    for n in 0..m.n() {
        for (t, r) in &tubes[n] {
            let contacts = (0..m.n())
                .filter(|&o| o != n && tubes[o].iter().any(|(_, q)| r.intersects(q)))
                .count();
            if contacts > max_contacts {
                max_contacts = contacts;
            }
            if contacts > CONTACT_NUMBER && f.len() < 8 {
                f.push(format!("switch {} touches {contacts} switches at t = {t}", n + 1));
            }
        }
    }
    c.record("C11", f);

    // C12: theta is well formed and the partner tube is not strictly
    // ordered with respect to the first determination.
    let mut f = Vec::new();
    for (n, th) in m.theta.iter().enumerate() {
        let [np, k1, k2] = *th;
        if np < 1 || np > s.n() || n >= s.n() {
            f.push(format!("theta({}) names switch {np}", n + 1));
            continue;
        }
        if s.n() > 1 && np == n + 1 {
            f.push(format!("theta({}) points at itself", n + 1));
        }
        let js = index.switch(np);
        if !(1 <= k1 && k1 < k2 && k2 <= js.len()) {
            f.push(format!("theta({}) = ({np}, {k1}, {k2}) has bad indices", n + 1));
            continue;
        }
        if s.phi()[js[k1 - 1]] != -s.phi()[js[k2 - 1]] {
            f.push(format!("theta({}) statuses are not opposite", n + 1));
        }
        let Some(regions) = &regions else { continue };
        let first = &regions[index.switch(n + 1)[0]];
        let ok = tubes[np - 1].iter().any(|(_, r)| {
            matches!(
                causal_relation(first, r),
                Ok(CausalRelation::Spacelike) | Ok(CausalRelation::Mixed)
            )
        });
        if !ok {
            f.push(format!("theta({}): first determination strictly ordered against every sample", n + 1));
        }
    }
    c.record("C12", f);

    // C13: same-status redetermination waits half a cycle.
    let mut f = Vec::new();
    for n in 1..=s.n().min(m.n()) {
        let ts = &m.switches[n - 1].spec.determination_times;
        let st = s.statuses(n);
        if ts.len() != st.len() {
            continue;
        }
        f.extend(c13_failures(&st, ts).into_iter().map(|(a, b)| {
            format!("switch {n}: determinations {a} and {b} too close", a = a + 1, b = b + 1)
        }));
    }
    c.record("C13", f);

    // C14: P_n and Q_n are orthogonal projections in the registry.
    match &m.registry {
        None => c.skip("C14", "no projection registry supplied"),
        Some(reg) => {
            let mut f = Vec::new();
            for (n, sw) in m.switches.iter().enumerate() {
                let Some([p, q]) = sw.spec.projections else {
                    f.push(format!("switch {}: no projection pair", n + 1));
                    continue;
                };
                match (reg.get(p), reg.get(q)) {
                    (Some(pp), Some(qq)) => {
                        if let Err(e) = crate::quantum::ProjectionPair::new(pp.clone(), qq.clone()) {
                            f.push(format!("switch {}: {e}", n + 1));
                        }
                    }
                    _ => f.push(format!("switch {}: projection index out of range", n + 1)),
                }
            }
            c.record("C14", f);
        }
    }

    let pass = c.clauses.iter().all(|r| r.status != ClauseStatus::Fail);
    let _ = c.m;
    let _ = c.s;
    ManifestationReport {
        clauses: c.clauses,
        samples_per_unit: m.samples_per_unit,
        max_contacts,
        contact_bound: CONTACT_NUMBER,
        pass,
    }
}

/// Same-status pairs `(k4, k5)` (0-based) without an alternating triple of
/// at most twice their gap.
pub fn c13_failures(statuses: &[i32], times: &[f64]) -> Vec<(usize, usize)> {
    let k = statuses.len();
    // Shortest alternating span t[k3] - t[k1]; for fixed k1 the best k3 is
    // the first index after some opposite status with the same sign.
    let mut best = f64::INFINITY;
    for k1 in 0..k {
        let mut seen_opposite = false;
        for k3 in k1 + 1..k {
            if statuses[k3] == -statuses[k1] {
                seen_opposite = true;
            } else if seen_opposite {
                best = best.min(times[k3] - times[k1]);
                break;
            }
        }
    }
    let mut out = Vec::new();
    for k4 in 0..k {
        for k5 in k4 + 1..k {
            if statuses[k4] == statuses[k5] && times[k5] - times[k4] < 0.5 * best - 1e-12 {
                out.push((k4, k5));
            }
        }
    }
    out
}

/// A static manifestation of a structure: every switch sits at its own
/// spatial offset, moved there before activation at constant velocity, and
/// determination `k` of switch `n` happens at the listed time. Used by
/// examples and tests.
pub fn static_manifestation(
    base_region: Region,
    offsets: &[Vec<f64>],
    determination_times: &[Vec<f64>],
    travel_time: f64,
) -> Result<Manifestation> {
    let d = base_region.dim();
    let base_point = base_region.center();
    let mut switches = Vec::new();
    let mut collapse_first = 1;
    for (n, (off, times)) in offsets.iter().zip(determination_times).enumerate() {
        if off.len() != d - 1 {
            return Err(Error::DimensionMismatch {
                expected: d - 1,
                found: off.len(),
            });
        }
        let dist = off.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut rest = vec![0.0; d];
        rest[0] = 1.0;
        let mut path = Vec::new();
        if dist > 0.0 {
            // Reach the offset after proper time `travel_time`.
            let gamma_v = dist / travel_time;
            let gamma = (1.0 + gamma_v * gamma_v).sqrt();
            let mut u = vec![gamma];
            u.extend(off.iter().map(|v| v / travel_time));
            path.push(SegmentSpec {
                start: 0.0,
                velocity: u,
                lorentz: None,
                generator: None,
            });
            path.push(SegmentSpec {
                start: travel_time,
                velocity: rest.clone(),
                lorentz: None,
                generator: None,
            });
        } else {
            path.push(SegmentSpec {
                start: 0.0,
                velocity: rest.clone(),
                lorentz: None,
                generator: None,
            });
        }
        let total = times.last().copied().unwrap_or(travel_time).max(travel_time) + 1.0;
        let s_n = times.first().copied().unwrap_or(0.0);
        switches.push(SwitchSpec {
            total_time: total,
            determination_times: times.clone(),
            collapse_times: vec![s_n],
            collapse_first,
            path,
            projections: None,
        });
        collapse_first += 1;
        let _ = n;
    }
    let n = offsets.len();
    let theta = (0..n).map(|i| [if n > 1 { (i + 1) % n + 1 } else { 1 }, 1, 2]).collect();
    Manifestation::from_spec(ManifestationSpec {
        base_point,
        base_region,
        theta,
        switches,
        registry: None,
        samples_per_unit: None,
    })
}

impl Serialize for Manifestation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Manifestation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = ManifestationSpec::deserialize(d)?;
        Manifestation::from_spec(spec).map_err(serde::de::Error::custom)
    }
}

/// Rows of a matrix, for serializing Lorentz parts.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    rows_of(m)
}
