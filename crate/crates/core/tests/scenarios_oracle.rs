use manyminds::process::{caricature_closed_form, CaricatureSpec, Variant};
use manyminds::quantum::partial_trace;
use manyminds::scenarios::consistency::rotated_qubit_family;
use manyminds::scenarios::everett::uniform_leaf_apps;
use manyminds::scenarios::frequency::p_grid;
use manyminds::scenarios::{
    consistency_check, cosmology_demo, everett_restriction_suite, frequency_suite, glance_suite, multistep_suite,
    run_all, BranchNode, EverettModel, FrequencyModel, GlanceSpec, MultistepModel, Tolerances,
};
use manyminds_oracles::{dd, stats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_weights(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..r).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let resid = 1.0 - w.iter().sum::<f64>();
    w[0] += resid;
    w
}

#[test]
fn every_scenario_passes_with_defaults() {
    for (name, report) in run_all(&Tolerances::default()) {
        let report = report.unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(report.pass, "{name}: {:?}", report.failures());
        assert_eq!(report.schema_version, 1);
    }
}

#[test]
fn branch_apps_for_up_to_eight_outcomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for r in 1..=8 {
        let p = random_weights(&mut rng, r);
        let model = EverettModel::random(p.clone(), 100 + r as u64).unwrap();
        let report = everett_restriction_suite(&model, &Tolerances::default()).unwrap();
        assert!(report.pass, "R={r}: {:?}", report.failures());
        for (check, want) in report.group("branch_app_observer").iter().zip(&p) {
            assert!((check.computed - want).abs() < 1e-10);
        }
        let total: f64 = report.group("branch_app_observer").iter().map(|c| c.computed).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn observer_spectrum_matches_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for trial in 0..5 {
        let p = random_weights(&mut rng, 4);
        let model = EverettModel::random(p.clone(), trial).unwrap();
        let (reduced, _) = partial_trace(&model.joint(), &model.dims(), &[0]).unwrap();
        // Real symmetric embedding [[Re, -Im], [Im, Re]] doubles each eigenvalue.
        let n = reduced.nrows();
        let big: Vec<Vec<dd::DD>> = (0..2 * n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| {
                        let z = reduced[(i % n, j % n)];
                        let v = match (i < n, j < n) {
                            (true, true) | (false, false) => z.re,
                            (true, false) => -z.im,
                            (false, true) => z.im,
                        };
                        dd::DD::new(v)
                    })
                    .collect()
            })
            .collect();
        let (vals, _) = dd::jacobi(&big);
        let mut vals: Vec<f64> = vals.into_iter().map(|v| v.to_f64()).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        let mut want: Vec<f64> = p.iter().flat_map(|&x| [x, x]).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (v, w) in vals.iter().zip(&want) {
            assert!((v - w).abs() < 1e-10, "{v} vs {w}");
        }
    }
}

#[test]
fn string_classes_match_brute_force() {
    for p in p_grid() {
        for n in 1..=14usize {
            let classes = FrequencyModel::qubit(p, n).unwrap().string_class_probabilities();
            for (m, got) in classes.iter().enumerate() {
                let want = stats::string_sum(n as u32, m as u32, p, 1.0 - p);
                assert!((got - want).abs() < 1e-12, "p={p} N={n} M={m}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn frequency_moments_over_the_grid() {
    let report = frequency_suite(&p_grid(), 10, 0.5, 0.75, &Tolerances::default()).unwrap();
    assert!(report.pass, "{:?}", report.failures());
    assert!(report.max_deviation("mean") < 1e-10);
    assert!(report.max_deviation("variance") < 1e-10);
    assert!(report.group("chebyshev").iter().all(|c| c.pass));
}

#[test]
fn random_trees_telescope() {
    for seed in 0..6 {
        let tree = BranchNode::random(3, 2 + (seed as usize % 2), seed % 3 != 0, seed);
        let model = MultistepModel::new(tree, Some(seed + 50)).unwrap();
        let report = multistep_suite(&model, 1e-3, &Tolerances::default()).unwrap();
        assert!(report.pass, "seed {seed}: {:?}", report.failures());
        assert!(report.max_deviation("telescoping") < 1e-10);
        assert!(report.max_deviation("extinction") < 1e-10);
        assert!(report.max_deviation("jump_total") < 1e-12);
    }
}

#[test]
fn uniform_binary_tree_leaves() {
    let apps = uniform_leaf_apps(2, &[0.0, 0.5, 0.5]).unwrap();
    assert!(apps.iter().all(|(_, a)| (a - 0.25).abs() < 1e-12));
}

#[test]
fn rotated_measurement_is_inconsistent() {
    let plus = manyminds::quantum::Mat::from_element(2, 2, manyminds::quantum::operator::c(0.5, 0.0));
    let r = consistency_check(&[rotated_qubit_family(0.0), rotated_qubit_family(1.2)], &plus, 1e-10).unwrap();
    assert!(!r.consistent);
    let tree = MultistepModel::new(BranchNode::random(3, 2, true, 9), Some(4)).unwrap();
    let omega = tree.state(&[]).unwrap();
    let r = consistency_check(&tree.step_families(), omega.rho().matrix(), 1e-10).unwrap();
    assert!(r.consistent);
    let total: f64 = r.probabilities.iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn doubled_paths_match_the_two_sink_caricature() {
    for rho_a in [0.1, 0.3, 0.5, 0.8] {
        let sym = glance_suite(&GlanceSpec::symmetric(rho_a, 3, 1, 1).build().unwrap(), &Tolerances::default()).unwrap();
        assert!(sym.pass);
        let pa = sym.find("outcome_probability", "Pr(a)").unwrap().computed;
        assert!((pa - rho_a).abs() < 1e-9);

        let doubled =
            glance_suite(&GlanceSpec::symmetric(rho_a, 3, 2, 1).build().unwrap(), &Tolerances::default()).unwrap();
        assert!(doubled.pass);
        let ratio = doubled.find("path_count_ratio", "Pr(a) / Pr(b)").unwrap().computed;
        assert!((ratio - 2.0 * rho_a / (1.0 - rho_a)).abs() < 1e-9);
        let b = caricature_closed_form(&CaricatureSpec::new(Variant::B, rho_a, 1.0 - rho_a, 1.0)).unwrap();
        let pa: f64 = doubled.data["a"]["probability"].as_f64().unwrap();
        assert!((pa - b.f_a).abs() < 1e-9);
    }
}

#[test]
fn cosmology_fixed_and_free() {
    let fixed = cosmology_demo(0.2, 5, false).unwrap();
    assert!((fixed.distribution[0] - 0.2).abs() < 1e-12 && (fixed.distribution[1] - 0.8).abs() < 1e-12);
    let free = cosmology_demo(0.2, 5, true).unwrap();
    assert_eq!(free.distribution, [0.5, 0.5]);
    assert_eq!(cosmology_demo(0.0, 3, false).unwrap().distribution, [0.0, 1.0]);
}
