use exactq::boolfn::permutations;
use exactq::extract::{extract_algorithm, state_gram, success_profile, QueryAlgorithm};
use exactq::linalg::{max_abs, min_eigenvalue, psd_sqrt, transition_unitary, CMatrix, Matrix, TRANSITION_ERROR_CONSTANT};
use exactq::sdp::{build_instance, fixture, solve_min_error, SdpSolution, SolverConfig, FIXTURE_IDS};
use exactq::simulate::{final_state, min_success, run, OracleSpec};
use exactq::BooleanFunction;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_psd(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> Matrix {
    let b = Matrix::from_fn(dim, rank, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose()
}

fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    m.qr().q()
}

fn solved(n: usize, id: u64, t: usize) -> SdpSolution {
    let f = BooleanFunction::from_id_u64(n, id).unwrap();
    solve_min_error(&build_instance(&f, t).unwrap(), &SolverConfig::default()).unwrap()
}

/// Largest deviation between the Gram matrix of the states before each query
/// and the corresponding `Σ_i M_i^(j)`.
fn gram_chain_error(sol: &SdpSolution, alg: &QueryAlgorithm) -> f64 {
    let size = 1usize << sol.n;
    let states: Vec<Vec<_>> = (0..size)
        .map(|x| exactq::simulate::trajectory(alg, &OracleSpec::from_index(x, sol.n)).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for j in 0..sol.t {
        let level: Vec<_> = states.iter().map(|s| s[j].clone()).collect();
        let gram = state_gram(&level);
        let sum = sol.m.iter().fold(Matrix::zeros(size, size), |acc, row| acc + &row[j]);
        for x in 0..size {
            for y in 0..size {
                worst = worst.max((gram[(x, y)] - Complex64::new(sum[(x, y)], 0.0)).norm());
            }
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn square_roots_are_psd(seed in any::<u64>(), dim in 1usize..=64, rank_seed in any::<usize>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_psd(&mut rng, dim, 1 + rank_seed % dim);
        let r = psd_sqrt(&m, 1e-9).unwrap();
        prop_assert!(max_abs(&(&r - r.transpose())) <= 1e-12);
        prop_assert!(min_eigenvalue(&r) >= -1e-10);
        prop_assert!(max_abs(&(&r * &r - &m)) <= 1e-9 * max_abs(&m).max(1.0));
    }

    #[test]
    fn transition_unitaries_are_orthogonal(seed in any::<u64>(), dim in 1usize..=24, cols in 1usize..=24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = Matrix::from_fn(dim, cols, |_, _| rng.gen_range(-1.0..1.0));
        let q = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let noise = Matrix::from_fn(dim, cols, |_, _| rng.gen_range(-1e-9..1e-9));
        let psi = &q * &phi + noise;
        let u = transition_unitary(&psi, &phi, 1e-7).unwrap();
        prop_assert!(max_abs(&(u.transpose() * &u - Matrix::identity(dim, dim))) <= 1e-10);
        prop_assert!(max_abs(&(&u * &phi - &psi)) <= TRANSITION_ERROR_CONSTANT * 1e-7f64.sqrt());
    }

    #[test]
    fn transition_fixes_equal_square_roots(seed in any::<u64>(), dim in 1usize..=32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_psd(&mut rng, dim, dim);
        let r = psd_sqrt(&m, 1e-9).unwrap();
        let u = transition_unitary(&r, &r, 1e-9).unwrap();
        prop_assert!(max_abs(&(&u * &r - &r)) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn success_is_isomorphism_invariant(id in 0u64..256, perm in 0usize..6, mask in 0usize..8, out in any::<bool>()) {
        let f = BooleanFunction::from_id_u64(3, id).unwrap();
        let g = f.transform(&permutations(3)[perm], mask, out);
        let cfg = SolverConfig::default();
        let a = solve_min_error(&build_instance(&f, 1).unwrap(), &cfg).unwrap().success_probability();
        let b = solve_min_error(&build_instance(&g, 1).unwrap(), &cfg).unwrap().success_probability();
        prop_assert!((a - b).abs() <= 2.0 * cfg.opt_tol, "{a} vs {b}");
    }

    #[test]
    fn extracted_algorithms_follow_the_gram_chain(id in 0u64..256, t in 1usize..=2) {
        let sol = solved(3, id, t);
        let alg = extract_algorithm(&sol, false).unwrap();
        prop_assert!(gram_chain_error(&sol, &alg) <= 1e-6);
        let f = sol.function().unwrap();
        let full = success_profile(&alg, &f).unwrap();
        let reduced = success_profile(&extract_algorithm(&sol, true).unwrap(), &f).unwrap();
        for (a, b) in full.iter().zip(&reduced) {
            prop_assert!(b >= &(a - 1e-8), "{a} vs {b}");
        }
    }
}

#[test]
fn fixtures_follow_the_gram_chain_exactly() {
    for id in FIXTURE_IDS {
        let sol = fixture(id).unwrap();
        let alg = extract_algorithm(&sol, false).unwrap();
        assert!(gram_chain_error(&sol, &alg) <= 1e-8, "fixture {id}");
        let f = sol.function().unwrap();
        for (x, p) in success_profile(&alg, &f).unwrap().into_iter().enumerate() {
            let gamma = sol.gamma(f.eval(x));
            assert!((p - gamma[(x, x)]).abs() <= 1e-6, "fixture {id}, input {x}");
        }
    }
}

#[test]
fn success_is_monotone_in_queries() {
    for id in [1u64, 6, 7, 22, 23, 30, 53, 67, 105, 126] {
        let one = solved(3, id, 1).success_probability();
        let two = solved(3, id, 2).success_probability();
        assert!(two >= one - 1e-6, "{id}: {one} then {two}");
    }
}

#[test]
fn oracle_is_an_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dim = 3 * 2 * 2;
    for _ in 0..20 {
        let (u0, u1) = (random_unitary(&mut rng, dim), random_unitary(&mut rng, dim));
        let doubled = QueryAlgorithm::new(3, 2, vec![u0.clone(), CMatrix::identity(dim, dim), u1.clone()]).unwrap();
        let removed = QueryAlgorithm::new(3, 2, vec![&u1 * &u0]).unwrap();
        for x in 0..4 {
            let oracle = OracleSpec::from_index(x, 2);
            let a = final_state(&doubled, &oracle).unwrap();
            let b = final_state(&removed, &oracle).unwrap();
            assert!((a - b).norm() <= 1e-12);
        }
    }
}

#[test]
fn global_phases_do_not_change_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dim = 4 * 2 * 2;
    for _ in 0..20 {
        let unitaries: Vec<CMatrix> = (0..3).map(|_| random_unitary(&mut rng, dim)).collect();
        let alg = QueryAlgorithm::new(4, 2, unitaries.clone()).unwrap();
        let mut phased = unitaries;
        let j = rng.gen_range(0..phased.len());
        phased[j] *= Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let phased = QueryAlgorithm::new(4, 2, phased).unwrap();
        for x in 0..8 {
            let oracle = OracleSpec::from_index(x, 3);
            let (a, b) = (run(&alg, &oracle).unwrap(), run(&phased, &oracle).unwrap());
            assert!((a.p0 - b.p0).abs() <= 1e-12 && (a.p1 - b.p1).abs() <= 1e-12);
        }
    }
}

#[test]
fn random_one_query_algorithms_stay_below_the_optimum_for_and() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let and = BooleanFunction::and(2);
    for work in 1..=3 {
        let dim = 3 * work * 2;
        for _ in 0..200 {
            let alg = QueryAlgorithm::new(3, work, vec![random_unitary(&mut rng, dim), random_unitary(&mut rng, dim)]).unwrap();
            assert!(min_success(&alg, &and).unwrap() <= 0.9 + 1e-3);
        }
    }
}

