use std::sync::Arc;

use manyminds::quantum::operator::{c, max_abs, trace_product};
use manyminds::quantum::random;
use manyminds::quantum::{
    app, app_on, check_f, generate_algebra, max_projection_gap, purity_property_check, rel_entropy, restrict, Algebra,
    AlgebraState, Mat, Operator, ProjectionPair,
};
use manyminds_oracles::{dd, linalg};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pairs(m: &Mat) -> Vec<(f64, f64)> {
    let n = m.nrows();
    (0..n * n).map(|i| (m[(i / n, i % n)].re, m[(i / n, i % n)].im)).collect()
}

fn full(rho: Operator) -> AlgebraState {
    AlgebraState::on_full(rho).unwrap()
}

#[test]
fn relative_entropy_matches_extended_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let n = 2 + trial % 2;
        let s = random::density(&mut rng, &[n]);
        let r = random::density(&mut rng, &[n]);
        let ours = rel_entropy(&full(s.clone()), &full(r.clone())).unwrap();
        let oracle = dd::relative_entropy(&pairs(s.matrix()), &pairs(r.matrix()), n, 1e-12);
        assert!((ours - oracle).abs() < 1e-9, "trial {trial}: {ours} vs {oracle}");
    }
}

#[test]
fn rank_deficient_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let u = random::unitary(&mut rng, 3);
        let d = |w: [f64; 3]| {
            let m = Mat::from_fn(3, 3, |i, j| c(if i == j { w[i] } else { 0.0 }, 0.0));
            Operator::single(&u * m * u.adjoint()).unwrap()
        };
        let sigma = d([0.6, 0.4, 0.0]);
        let rho = d([0.2, 0.3, 0.5]);
        let ours = rel_entropy(&full(sigma.clone()), &full(rho.clone())).unwrap();
        let oracle = dd::relative_entropy(&pairs(sigma.matrix()), &pairs(rho.matrix()), 3, 1e-12);
        assert!((ours - oracle).abs() < 1e-9);
        // sigma has weight where the swapped rho has none.
        let narrow = d([0.0, 0.0, 1.0]);
        assert_eq!(rel_entropy(&full(sigma), &full(narrow)).unwrap(), f64::NEG_INFINITY);
    }
}

#[test]
fn app_is_monotone_under_restriction() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let dims = [2, 3];
    let big = Arc::new(Algebra::full(&dims).unwrap());
    let factor = Arc::new(Algebra::on_factors(&dims, &[0]).unwrap());
    let mut violations = 0;
    for trial in 0..1000 {
        let s = AlgebraState::new(random::density(&mut rng, &dims), big.clone()).unwrap();
        let r = AlgebraState::new(random::density(&mut rng, &dims), big.clone()).unwrap();
        let whole = app(&s, &r).unwrap();
        // Alternate between a tensor factor and a commutative algebra
        // generated by a random projection.
        let sub = if trial % 2 == 0 {
            factor.clone()
        } else {
            let p = Operator::new(dims.to_vec(), random::projection(&mut rng, 6, 1 + trial % 5)).unwrap();
            Arc::new(generate_algebra(&[p]).unwrap())
        };
        let part = app_on(&s, &r, &sub).unwrap();
        if part < whole - 1e-10 {
            violations += 1;
        }
        assert!((0.0..=1.0).contains(&part) && (0.0..=1.0).contains(&whole));
    }
    assert_eq!(violations, 0);
}

#[test]
fn partial_trace_and_conditional_expectation_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let dims = [2, 2, 2];
    let direct = Algebra::on_factors(&dims, &[0, 2]).unwrap();
    // Same algebra, reached through generators and block decomposition.
    let mut gens = Vec::new();
    for f in [0, 2] {
        for (a, b) in [(0, 0), (0, 1)] {
            let mut e = Mat::zeros(2, 2);
            e[(a, b)] = c(1.0, 0.0);
            gens.push(Operator::embed(&dims, f, &e).unwrap());
        }
    }
    let generated = generate_algebra(&gens).unwrap();
    assert_eq!(generated.shape(), vec![(4, 2)]);
    for _ in 0..20 {
        let rho = random::density(&mut rng, &dims);
        let a = direct.conditional_expectation(rho.matrix());
        let b = generated.conditional_expectation(rho.matrix());
        assert!(max_abs(&(a - b)) < 1e-10);
    }
}

#[test]
fn generated_dimension_matches_span_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for trial in 0..40 {
        let n = 2 + trial % 4;
        let count = 1 + trial % 3;
        let mut gens = Vec::new();
        for g in 0..count {
            // Mix commuting and generic generators.
            let m = if g > 0 && trial % 2 == 0 {
                let p: &Operator = &gens[0];
                p.matrix().clone() * c(0.5, 0.0) + Mat::identity(n, n) * c(0.25, 0.0)
            } else {
                random::projection(&mut rng, n, 1 + (trial + g) % (n - 1))
            };
            gens.push(Operator::single(m).unwrap());
        }
        let ours = generate_algebra(&gens).unwrap();
        let oracle = linalg::generated_dimension(&gens.iter().map(|g| pairs(g.matrix())).collect::<Vec<_>>(), n);
        assert_eq!(ours.dim(), oracle, "trial {trial}");
        for g in &gens {
            assert!(ours.membership_residual(g.matrix()) < 1e-10);
        }
    }
}

#[test]
fn generated_algebra_is_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let p = Operator::single(random::projection(&mut rng, 4, 2)).unwrap();
    let mut q = Mat::zeros(4, 4);
    q[(0, 0)] = c(1.0, 0.0);
    let q = Operator::single(q).unwrap();
    let alg = generate_algebra(&[p, q]).unwrap();
    let basis = alg.basis();
    assert_eq!(basis.len(), alg.dim());
    for a in &basis {
        assert!(alg.membership_residual(&a.adjoint()) < 1e-10);
        for b in &basis {
            assert!(alg.membership_residual(&(a * b)) < 1e-10);
        }
    }
}

#[test]
fn conditional_expectation_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..30 {
        let gens: Vec<Operator> = (0..1 + trial % 2)
            .map(|_| Operator::single(random::projection(&mut rng, 4, 1 + trial % 3)).unwrap())
            .collect();
        let alg = generate_algebra(&gens).unwrap();
        let x = random::gaussian_matrix(&mut rng, 4, 4);
        let e = alg.conditional_expectation(&x);
        assert!(max_abs(&(alg.conditional_expectation(&e) - &e)) < 1e-10);
        assert!((e.trace() - x.trace()).norm() < 1e-10);
        let one = Mat::identity(4, 4);
        assert!(max_abs(&(alg.conditional_expectation(&one) - &one)) < 1e-10);
        // Bimodule property with random algebra elements.
        let basis = alg.basis();
        let mut a = Mat::zeros(4, 4);
        let mut b = Mat::zeros(4, 4);
        for u in &basis {
            a += u * c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            b += u * c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let lhs = alg.conditional_expectation(&(&a * &x * &b));
        let rhs = &a * alg.conditional_expectation(&x) * &b;
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }
}

#[test]
fn restriction_realizes_the_extension_supremum() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let dims = [2, 2];
    let big = Arc::new(Algebra::full(&dims).unwrap());
    let sub = Arc::new(Algebra::on_factors(&dims, &[0]).unwrap());
    for _ in 0..20 {
        let s = AlgebraState::new(random::density(&mut rng, &dims), big.clone()).unwrap();
        let r = AlgebraState::new(random::density(&mut rng, &dims), big.clone()).unwrap();
        let (sb, rb) = (restrict(&s, &sub).unwrap(), restrict(&r, &sub).unwrap());
        let target = rel_entropy(&sb, &rb).unwrap();
        // The conditional-expectation extensions attain it.
        let se = AlgebraState::new(sb.rho().clone(), big.clone()).unwrap();
        let re = AlgebraState::new(rb.rho().clone(), big.clone()).unwrap();
        assert!((rel_entropy(&se, &re).unwrap() - target).abs() < 1e-10);
        // Product extensions over a grid of complement states never exceed it.
        let s0 = sb.rho().partial_trace(&[0]).unwrap();
        let r0 = rb.rho().partial_trace(&[0]).unwrap();
        let bloch = |t: f64, p: f64, r: f64| {
            let (x, y, z) = (r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos());
            Operator::single(Mat::from_row_slice(
                2,
                2,
                &[c(0.5 + z / 2.0, 0.0), c(x / 2.0, -y / 2.0), c(x / 2.0, y / 2.0), c(0.5 - z / 2.0, 0.0)],
            ))
            .unwrap()
        };
        for i in 0..6 {
            for j in 0..6 {
                let tau = bloch(i as f64 * 0.5, j as f64, 0.9);
                let tau2 = bloch(j as f64 * 0.5, i as f64, 0.5);
                let a = AlgebraState::new(s0.tensor(&tau), big.clone()).unwrap();
                let b = AlgebraState::new(r0.tensor(&tau2), big.clone()).unwrap();
                assert!(rel_entropy(&a, &b).unwrap() <= target + 1e-6);
            }
        }
        // And neither do correlated extensions of sigma with rho' = the
        // conditional-expectation extension.
        for _ in 0..10 {
            let y = random::gaussian_matrix(&mut rng, 2, 2);
            let y = (&y + y.adjoint()) * c(0.5, 0.0);
            let y = &y - Mat::identity(2, 2) * (y.trace() / c(2.0, 0.0));
            let x = random::gaussian_matrix(&mut rng, 2, 2);
            let x = (&x + x.adjoint()) * c(0.02, 0.0);
            let pert = x.kronecker(&y);
            let m = se.rho().matrix() + pert;
            if let Ok(ext) = AlgebraState::new(se.rho().with_matrix(m), big.clone()) {
                assert!(rel_entropy(&ext, &re).unwrap() <= target + 1e-6);
            }
        }
    }
}

#[test]
fn decoherent_mixtures_have_app_equal_to_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for trial in 0..200 {
        let n = 2 + trial % 7;
        let k = 1 + trial % (n - 1);
        let u = random::unitary(&mut rng, n);
        let p: f64 = rng.random_range(0.01..0.99);
        // sigma lives on the first k rotated basis vectors, sigma_d on the rest.
        let s_local = random::density_of_rank(&mut rng, k, k);
        let d_local = random::density_of_rank(&mut rng, n - k, n - k);
        let mut sigma = Mat::zeros(n, n);
        let mut sd = Mat::zeros(n, n);
        sigma.view_mut((0, 0), (k, k)).copy_from(&s_local);
        sd.view_mut((k, k), (n - k, n - k)).copy_from(&d_local);
        let sigma = &u * sigma * u.adjoint();
        let sd = &u * sd * u.adjoint();
        let rho = &sigma * c(p, 0.0) + sd * c(1.0 - p, 0.0);
        let mut q = Mat::zeros(n, n);
        for i in 0..k {
            q[(i, i)] = c(1.0, 0.0);
        }
        let q = &u * q * u.adjoint();
        let a = app(
            &full(Operator::single(sigma).unwrap()),
            &full(Operator::single(rho.clone()).unwrap()),
        )
        .unwrap();
        let rq = trace_product(&rho, &q).re;
        assert!((a - rq).abs() < 1e-9, "trial {trial}: {a} vs {rq}");
        assert!((rq - p).abs() < 1e-9);
    }
}

#[test]
fn purity_property_never_fails_on_constructed_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for trial in 0..100 {
        let n = 2 + trial % 3;
        let u = random::unitary(&mut rng, n);
        // rho supported off the range of P by construction.
        let mut p = Mat::zeros(n, n);
        p[(0, 0)] = c(1.0, 0.0);
        let p = &u * p * u.adjoint();
        let mut r = Mat::zeros(n, n);
        r.view_mut((1, 1), (n - 1, n - 1)).copy_from(&random::density_of_rank(&mut rng, n - 1, n - 1));
        let rho = full(Operator::single(&u * r * u.adjoint()).unwrap());
        let sigma = if trial % 2 == 0 {
            full(random::density(&mut rng, &[n]))
        } else {
            rho.clone()
        };
        let rep = purity_property_check(&rho, &sigma, &Operator::single(p).unwrap(), 1e-9).unwrap();
        assert!(rep.holds, "{rep:?}");
    }
    // A pure rho admits only itself.
    let v = random::pure_vector(&mut rng, 3);
    let rho = full(Operator::pure(vec![3], &v).unwrap());
    let sigma = full(random::density(&mut rng, &[3]));
    assert_eq!(app(&sigma, &rho).unwrap(), 0.0);
}

#[test]
fn projection_gap_matches_qubit_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let a = random::density(&mut rng, &[2]);
        let b = random::density(&mut rng, &[2]);
        let gap = max_projection_gap(&full(a.clone()), &full(b.clone())).unwrap();
        let d = a.matrix() - b.matrix();
        let grid = linalg::qubit_projection_grid_max(
            &[
                (d[(0, 0)].re, d[(0, 0)].im),
                (d[(0, 1)].re, d[(0, 1)].im),
                (d[(1, 0)].re, d[(1, 0)].im),
                (d[(1, 1)].re, d[(1, 1)].im),
            ],
            200,
        );
        assert!(grid <= gap + 1e-12);
        assert!(gap - grid < 1e-3, "{gap} vs {grid}");
    }
}

#[test]
fn switch_states_with_spread_fail() {
    let p = Operator::single(Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
    let q = Operator::single(Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
    let pair = ProjectionPair::new(p, q).unwrap();
    let mk = |w: f64| full(Operator::single(Mat::from_row_slice(2, 2, &[c(w, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 - w, 0.0)])).unwrap());
    let states = [mk(0.95), mk(0.05), mk(0.9), mk(0.1)];
    let r = check_f(&states, &[1, -1, 1, -1], &pair, None).unwrap();
    assert!(r.pass(), "{r:?}");
    let states = [mk(0.95), mk(0.6), mk(0.9), mk(0.1)];
    let r = check_f(&states, &[1, -1, 1, -1], &pair, None).unwrap();
    assert!(!r.clause("F2").unwrap().pass && !r.clause("F3").unwrap().pass);
}
