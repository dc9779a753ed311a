//! Point-sampling classification of region pairs.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Past,
    Future,
    Spacelike,
    Mixed,
}

/// A region given by samples and the radius within which the samples cover
/// it.
pub struct Sampled {
    pub points: Vec<Vec<f64>>,
    pub cover: f64,
}

fn grid(lo: &[f64], hi: &[f64], k: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let mut out = vec![Vec::new()];
    for axis in 0..d {
        let mut next = Vec::with_capacity(out.len() * k);
        for p in &out {
            for s in 0..k {
                let f = if k == 1 { 0.5 } else { s as f64 / (k - 1) as f64 };
                let mut q = p.clone();
                q.push(lo[axis] + f * (hi[axis] - lo[axis]));
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn half_diagonal(lo: &[f64], hi: &[f64], k: usize) -> f64 {
    let steps = (k.max(2) - 1) as f64;
    lo.iter()
        .zip(hi)
        .map(|(l, h)| {
            let c = (h - l) / steps / 2.0;
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

/// Grid of `k` points per axis on a box, corners included.
pub fn sample_box(lo: &[f64], hi: &[f64], k: usize) -> Sampled {
    Sampled {
        points: grid(lo, hi, k),
        cover: half_diagonal(lo, hi, k),
    }
}

/// Grid over the bounding cube, each point pulled onto the ball by nearest
/// point projection. Projection onto a convex set is non-expansive, so the
/// grid cover radius carries over.
pub fn sample_ball(center: &[f64], radius: f64, k: usize) -> Sampled {
    let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
    let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
    let points = grid(&lo, &hi, k)
        .into_iter()
        .map(|p| {
            let d: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d <= radius || d == 0.0 {
                p
            } else {
                p.iter().zip(center).map(|(a, c)| c + (a - c) * radius / d).collect()
            }
        })
        .collect();
    Sampled {
        points,
        cover: half_diagonal(&lo, &hi, k),
    }
}

/// Classifies `a` against `b` from samples. Returns `None` when the samples
/// cannot decide: a universal relation is only asserted when every sampled
/// pair clears it by more than the worst-case change over a cover cell, and
/// `Mixed` only when sampled pairs exhibit counterexamples to all three
/// universal relations.
pub fn classify(a: &Sampled, b: &Sampled) -> Option<Rel> {
    // Each of dt and |dx| moves by at most the Euclidean displacement, so
    // dt - |dx| moves by at most 2 per unit of displacement of each point.
    let slack = 2.0 * (a.cover + b.cover) + 1e-12;
    let mut min_future = f64::INFINITY; // min over pairs of dt - |dx|
    let mut min_past = f64::INFINITY; // min over pairs of -dt - |dx|
    let mut min_space = f64::INFINITY; // min over pairs of |dx| - |dt|
    let mut not_past = false;
    let mut not_future = false;
    let mut not_space = false;
    for x in &a.points {
        for y in &b.points {
            let dt = y[0] - x[0];
            let dx = x[1..].iter().zip(&y[1..]).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt();
            let f = dt - dx;
            let p = -dt - dx;
            let s = dx - dt.abs();
            min_future = min_future.min(f);
            min_past = min_past.min(p);
            min_space = min_space.min(s);
            if f < -1e-12 || dt <= 0.0 {
                not_past = true;
            }
            if p < -1e-12 || dt >= 0.0 {
                not_future = true;
            }
            if s <= 1e-12 {
                not_space = true;
            }
        }
    }
    if min_future > slack {
        return Some(Rel::Past);
    }
    if min_past > slack {
        return Some(Rel::Future);
    }
    if min_space > slack {
        return Some(Rel::Spacelike);
    }
    if not_past && not_future && not_space {
        return Some(Rel::Mixed);
    }
    None
}

/// Relation of two single events by direct light-cone arithmetic.
pub fn event_relation(x: &[f64], y: &[f64]) -> Rel {
    let dt = y[0] - x[0];
    let dx = x[1..].iter().zip(&y[1..]).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt();
    if dt > 0.0 && dt >= dx {
        Rel::Past
    } else if dt < 0.0 && -dt >= dx {
        Rel::Future
    } else if dx > dt.abs() {
        Rel::Spacelike
    } else {
        Rel::Mixed
    }
}
