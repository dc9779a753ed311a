//! A glance at a two-outcome event: relevant determinations as commuting
//! projections, path probabilities with explicit weight records, and the
//! outcome probabilities they sum to.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{Check, ScenarioReport, Tolerances};
use crate::error::{Error, Result};
use crate::process::{caricature_closed_form, CaricatureSpec, Variant};
use crate::quantum::operator::{c, kron_all, max_abs, PROJECTION_TOL};
use crate::quantum::{app, generate_algebra, AlgebraState, Mat, Operator};

const COMMUTE_TOL: f64 = 1e-9;
const APP_TOL: f64 = 1e-10;
const OUTCOME_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
/// Largest number of relevant determinations in the standard model.
pub const MAX_STEPS: usize = 6;

/// A class of equivalent paths to an outcome. Along the path, step `s`
/// has probability `rho(R_s) w_app[s] / (rho(R_{s-1}) w_xi[s])`; the
/// records stand for the outcome-independent factors of the successor's
/// a priori probability and of the normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathClass {
    pub multiplicity: u64,
    pub w_app: Vec<f64>,
    pub w_xi: Vec<f64>,
}

impl PathClass {
    /// `prod_s w_app[s] / w_xi[s]`.
    pub fn weight(&self) -> f64 {
        self.w_app.iter().zip(&self.w_xi).map(|(a, x)| a / x).product()
    }
}

#[derive(Clone, Debug)]
pub struct GlanceModel {
    dims: Vec<usize>,
    rho: Mat,
    p_a: Mat,
    /// Relevant projections leading to `a` and to `b`.
    relevant: [Vec<Mat>; 2],
    classes: [Vec<PathClass>; 2],
    /// Pairs `(a class, b class)` asserted to correspond.
    bijection: Option<Vec<(usize, usize)>>,
}

fn commutator_defect(ps: &[Mat]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in ps.iter().enumerate() {
        for b in &ps[i + 1..] {
            worst = worst.max(max_abs(&(a * b - b * a)));
        }
    }
    worst
}

fn projection_defect(p: &Mat) -> f64 {
    max_abs(&(p * p - p)).max(max_abs(&(p - p.adjoint())))
}

impl GlanceModel {
    pub fn new(
        dims: Vec<usize>,
        rho: Mat,
        p_a: Mat,
        relevant: [Vec<Mat>; 2],
        classes: [Vec<PathClass>; 2],
        bijection: Option<Vec<(usize, usize)>>,
    ) -> Result<Self> {
        // Validates the density matrix.
        AlgebraState::on_full(Operator::new(dims.clone(), rho.clone())?)?;
        let n = rho.nrows();
        if projection_defect(&p_a) > PROJECTION_TOL || p_a.nrows() != n {
            return Err(Error::NotProjection("outcome projection".into()));
        }
        for (o, (ps, cls)) in relevant.iter().zip(&classes).enumerate() {
            if ps.is_empty() {
                return Err(Error::Config(format!("outcome {o} has no relevant projections")));
            }
            for p in ps {
                if p.nrows() != n || projection_defect(p) > PROJECTION_TOL {
                    return Err(Error::NotProjection(format!("relevant projection for outcome {o}")));
                }
            }
            let d = commutator_defect(ps);
            if d > COMMUTE_TOL {
                return Err(Error::NonCommuting(d));
            }
            if cls.is_empty() {
                return Err(Error::Config(format!("outcome {o} has no path classes")));
            }
            for cl in cls {
                if cl.w_app.len() != ps.len() || cl.w_xi.len() != ps.len() {
                    return Err(Error::Config(format!(
                        "path class has {} / {} weights for {} steps",
                        cl.w_app.len(),
                        cl.w_xi.len(),
                        ps.len()
                    )));
                }
                if cl.w_app.iter().chain(&cl.w_xi).any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::Config("path weights must be positive".into()));
                }
            }
        }
        if let Some(pairs) = &bijection {
            let (na, nb) = (classes[0].len(), classes[1].len());
            let mut seen_a = vec![false; na];
            let mut seen_b = vec![false; nb];
            for &(i, j) in pairs {
                if i >= na || j >= nb || seen_a[i] || seen_b[j] {
                    return Err(Error::Config(format!("pair ({i}, {j}) breaks the bijection")));
                }
                seen_a[i] = true;
                seen_b[j] = true;
            }
            if seen_a.iter().chain(&seen_b).any(|s| !s) {
                return Err(Error::Config("bijection does not cover every class".into()));
            }
        }
        Ok(GlanceModel {
            dims,
            rho,
            p_a,
            relevant,
            classes,
            bijection,
        })
    }

    pub fn rho_p_a(&self) -> f64 {
        (&self.rho * &self.p_a).trace().re
    }

    fn outcome_projection(&self, o: usize) -> Mat {
        if o == 0 {
            self.p_a.clone()
        } else {
            Mat::identity(self.p_a.nrows(), self.p_a.nrows()) - &self.p_a
        }
    }
}

/// Parameters of the standard model: an external qubit with
/// `rho(P_a) = rho_a` read by the first determination, followed by
/// `steps - 1` processing determinations on brain qubits biased towards
/// firing with probabilities `brain_bias`. Both outcomes share the
/// processing, so only the path classes can break the symmetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlanceSpec {
    pub rho_a: f64,
    pub brain_bias: Vec<f64>,
    pub classes_a: Vec<PathClass>,
    pub classes_b: Vec<PathClass>,
    #[serde(default)]
    pub bijection: Option<Vec<(usize, usize)>>,
}

impl GlanceSpec {
    /// One path class per outcome with the given multiplicities and
    /// identical weight records; the bijection is supplied when the
    /// multiplicities agree.
    pub fn symmetric(rho_a: f64, steps: usize, multiplicity_a: u64, multiplicity_b: u64) -> GlanceSpec {
        let steps = steps.max(1);
        let brain_bias: Vec<f64> = (1..steps).map(|j| 0.9 - 0.1 * j as f64).collect();
        let class = |m| PathClass {
            multiplicity: m,
            w_app: (0..steps).map(|s| 1.0 + 0.25 * s as f64).collect(),
            w_xi: (0..steps).map(|s| 1.5 - 0.1 * s as f64).collect(),
        };
        GlanceSpec {
            rho_a,
            brain_bias,
            classes_a: vec![class(multiplicity_a)],
            classes_b: vec![class(multiplicity_b)],
            bijection: (multiplicity_a == multiplicity_b).then(|| vec![(0, 0)]),
        }
    }

    pub fn build(&self) -> Result<GlanceModel> {
        if !(0.0..=1.0).contains(&self.rho_a) {
            return Err(Error::InvalidProbability(format!("rho_a = {}", self.rho_a)));
        }
        let steps = self.brain_bias.len() + 1;
        if steps > MAX_STEPS {
            return Err(Error::DimensionOverflow(format!("{steps} steps, at most {MAX_STEPS}")));
        }
        if self.brain_bias.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::InvalidProbability("brain bias outside [0, 1]".into()));
        }
        let d2 = |a: f64, b: f64| Mat::from_fn(2, 2, |i, j| c(if i != j { 0.0 } else if i == 0 { a } else { b }, 0.0));
        let id = Mat::identity(2, 2);
        let mut locals = vec![d2(self.rho_a, 1.0 - self.rho_a)];
        locals.extend(self.brain_bias.iter().map(|&g| d2(1.0 - g, g)));
        let rho = kron_all(&locals);
        let on = |f: usize, m: &Mat| {
            let fs: Vec<Mat> = (0..steps).map(|i| if i == f { m.clone() } else { id.clone() }).collect();
            kron_all(&fs)
        };
        let p_a = on(0, &d2(1.0, 0.0));
        let p_b = on(0, &d2(0.0, 1.0));
        let processing: Vec<Mat> = (1..steps).map(|j| on(j, &d2(0.0, 1.0))).collect();
        let mut rel_a = vec![p_a.clone()];
        rel_a.extend(processing.iter().cloned());
        let mut rel_b = vec![p_b];
        rel_b.extend(processing);
        GlanceModel::new(
            vec![2; steps],
            rho,
            p_a,
            [rel_a, rel_b],
            [self.classes_a.clone(), self.classes_b.clone()],
            self.bijection.clone(),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeSummary {
    /// `rho(P_o)`.
    pub conventional: f64,
    /// `rho(R_S)`.
    pub composite: f64,
    /// Processing factor `rho(R_S) / rho(P_o)`.
    pub w_processing: f64,
    /// `sum multiplicity * w_path * w_processing`.
    pub w_total: f64,
    /// Unnormalized total path probability.
    pub path_sum: f64,
    pub probability: f64,
}

/// Walks every relevant step for both outcomes, checks the per-step and
/// composite identities, and sums path probabilities into outcome
/// probabilities.
pub fn glance_suite(model: &GlanceModel, tol: &Tolerances) -> Result<ScenarioReport> {
    let app_tol = tol.get("app", APP_TOL);
    let out_tol = tol.get("outcome", OUTCOME_TOL);
    let exact = tol.get("exact", EXACT_TOL);
    let mut report = ScenarioReport::new(
        "glance",
        json!({
            "dims": model.dims,
            "rho_p_a": model.rho_p_a(),
            "classes": model.classes,
            "bijection": model.bijection,
        }),
    );
    let n = model.rho.nrows();
    let mut summaries = Vec::new();
    let mut class_weights = [0.0; 2];
    for o in 0..2 {
        let name = ["a", "b"][o];
        let ps = &model.relevant[o];
        let p_o = model.outcome_projection(o);
        let conventional = (&model.rho * &p_o).trace().re;

        let mut r = Mat::identity(n, n);
        let mut sigma = model.rho.clone();
        let mut product_q = 1.0;
        let mut product_app = 1.0;
        let mut composites = vec![1.0];
        for (s, p) in ps.iter().enumerate() {
            let label = format!("{name} step {}", s + 1);
            r = &r * p;
            report.push("composite_projection", Check::at_most(label.clone(), projection_defect(&r), 0.0, PROJECTION_TOL));
            let q = (&sigma * p).trace().re;
            report.push("step_symmetry", Check::at_most(label.clone(), max_abs(&(&sigma * p - p * &sigma)), 0.0, exact));
            let composite = (&model.rho * &r).trace().re;
            composites.push(composite);
            if q <= 0.0 {
                break;
            }
            let next = p * &sigma * p / c(q, 0.0);
            let a = app(
                &AlgebraState::on_full(Operator::new(model.dims.clone(), next.clone())?)?,
                &AlgebraState::on_full(Operator::new(model.dims.clone(), sigma.clone())?)?,
            )?;
            report.push("step_app", Check::equal(label.clone(), a, q, app_tol));
            product_q *= q;
            product_app *= a;
            report.push("composite_expectation", Check::equal(label.clone(), composite, product_q, exact));
            report.push("app_product", Check::equal(label, product_app, composite, app_tol));
            sigma = next;
        }
        let composite = *composites.last().expect("at least one step");

        // R_S must sit under the outcome projection on the model's algebra.
        let mut gens: Vec<Operator> = ps.iter().map(|p| Operator::new(model.dims.clone(), p.clone())).collect::<Result<_>>()?;
        gens.push(Operator::new(model.dims.clone(), p_o.clone())?);
        let algebra = generate_algebra(&gens)?;
        let rr = &model.rho * &r;
        let lhs = &model.rho * &p_o * &r;
        let residual = algebra
            .basis()
            .iter()
            .map(|b| ((&lhs * b).trace() - (&rr * b).trace()).norm())
            .fold(0.0, f64::max);
        if residual > app_tol {
            return Err(Error::Subprojection(residual));
        }
        report.push("subprojection", Check::at_most(name, residual, 0.0, app_tol));

        let w_processing = if conventional > 0.0 { composite / conventional } else { 0.0 };
        let mut path_sum = 0.0;
        let mut w_total = 0.0;
        for (k, cl) in model.classes[o].iter().enumerate() {
            let label = format!("{name} class {k}");
            let mut prob = 1.0;
            for s in 0..ps.len() {
                if composites[s] <= 0.0 {
                    prob = 0.0;
                    break;
                }
                prob *= composites[s + 1] * cl.w_app[s] / (composites[s] * cl.w_xi[s]);
            }
            let w = cl.weight();
            report.push("path_probability", Check::equal(label.clone(), prob, composite * w, exact * w.max(1.0)));
            report.push(
                "path_factorization",
                Check::equal(label, prob, conventional * w * w_processing, exact * w.max(1.0)),
            );
            path_sum += cl.multiplicity as f64 * prob;
            w_total += cl.multiplicity as f64 * w * w_processing;
            class_weights[o] += cl.multiplicity as f64 * w;
        }
        summaries.push(OutcomeSummary {
            conventional,
            composite,
            w_processing,
            w_total,
            path_sum,
            probability: 0.0,
        });
    }

    let total = summaries[0].path_sum + summaries[1].path_sum;
    if total <= 0.0 {
        return Err(Error::InvalidProbability("no path reaches either outcome".into()));
    }
    for s in &mut summaries {
        s.probability = s.path_sum / total;
    }
    let (a, b) = (&summaries[0], &summaries[1]);
    report.push("normalization", Check::equal("Pr(a) + Pr(b)", a.probability + b.probability, 1.0, exact));
    report.push(
        "processing_independence",
        Check::equal("w(a) / w(b)", a.w_processing, b.w_processing, exact),
    );
    if b.probability > 0.0 && b.conventional > 0.0 {
        let expected = class_weights[0] * a.conventional / (class_weights[1] * b.conventional);
        report.push(
            "path_count_ratio",
            Check::equal("Pr(a) / Pr(b)", a.probability / b.probability, expected, out_tol * expected.max(1.0)),
        );
    }
    if a.conventional + b.conventional > 0.0 {
        let mut spec = CaricatureSpec::new(Variant::C, a.conventional, b.conventional, 1.0);
        spec.weights_a = vec![class_weights[0]];
        spec.weights_b = vec![class_weights[1]];
        let f = caricature_closed_form(&spec)?;
        report.push("caricature_agreement", Check::equal("Pr(a)", a.probability, f.f_a, out_tol));
    }
    if let Some(pairs) = &model.bijection {
        let mut worst: f64 = 0.0;
        for &(i, j) in pairs {
            let (ca, cb) = (&model.classes[0][i], &model.classes[1][j]);
            let wa = ca.multiplicity as f64 * ca.weight() * a.w_processing;
            let wb = cb.multiplicity as f64 * cb.weight() * b.w_processing;
            worst = worst.max((wa - wb).abs());
        }
        report.push("indifference", Check::at_most("paired class weights", worst, 0.0, exact));
        report.push("indifference", Check::equal("w6(a) = w6(b)", a.w_total, b.w_total, exact));
        report.push("outcome_probability", Check::equal("Pr(a)", a.probability, a.conventional, out_tol));
        report.push("outcome_probability", Check::equal("Pr(b)", b.probability, b.conventional, out_tol));
    }
    report.data = json!({ "a": summaries[0], "b": summaries[1] });
    Ok(report)
}
