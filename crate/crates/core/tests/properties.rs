#![allow(clippy::needless_range_loop)]

use birkhoff_spectrum::builtin::{closed_form_oracles, example_5_1, example_5_3};
use birkhoff_spectrum::gibbs::gibbs_state;
use birkhoff_spectrum::pressure::pressure;
use birkhoff_spectrum::spectrum::{lyapunov_spectrum, outer_solve_t, SolverSettings, SpectrumSolver};
use birkhoff_spectrum::system::{check_finite_irreducibility, translate_family, PotentialFamily, SystemSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full_shift() -> impl Strategy<Value = (SystemSpec, PotentialFamily)> {
    (2usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.02f64..0.6, n),
            prop::collection::vec(-2.0f64..3.0, n),
        )
            .prop_map(|(r, f)| (SystemSpec::full_shift(r), PotentialFamily::new(f)))
    })
}

fn markov() -> impl Strategy<Value = (SystemSpec, PotentialFamily)> {
    (2usize..5).prop_flat_map(|n| {
        (
            prop::collection::vec(0.02f64..0.6, n),
            prop::collection::vec(-2.0f64..3.0, n),
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), n),
        )
            .prop_map(|(r, f, mut m)| {
                // a full cycle 0 -> 1 -> ... -> 0 keeps the matrix irreducible
                let n = r.len();
                for (a, row) in m.iter_mut().enumerate() {
                    row[(a + 1) % n] = true;
                }
                (SystemSpec::markov(r, m), PotentialFamily::new(f))
            })
    })
}

fn value(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> f64 {
    pressure(spec, fam, t, q).unwrap().value.to_f64()
}

fn fd_gradient(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> (f64, f64) {
    let h = 1e-5;
    (
        (value(spec, fam, t + h, q) - value(spec, fam, t - h, q)) / (2.0 * h),
        (value(spec, fam, t, q + h) - value(spec, fam, t, q - h)) / (2.0 * h),
    )
}

/// Entrywise positivity of `A + A^2 + ... + A^n`.
fn strongly_connected(m: &[Vec<bool>]) -> bool {
    let n = m.len();
    let mut reach: Vec<Vec<bool>> = m.to_vec();
    let mut power: Vec<Vec<bool>> = m.to_vec();
    for _ in 1..n {
        let next: Vec<Vec<bool>> = (0..n)
            .map(|a| (0..n).map(|b| (0..n).any(|k| power[a][k] && m[k][b])).collect())
            .collect();
        for a in 0..n {
            for b in 0..n {
                reach[a][b] |= next[a][b];
            }
        }
        power = next;
    }
    reach.iter().all(|row| row.iter().all(|&x| x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences((s, f) in full_shift(), t in -2.0f64..2.0, q in -2.0f64..2.0) {
        let (gt, gq) = pressure(&s, &f, t, q).unwrap().grad.unwrap();
        let (dt, dq) = fd_gradient(&s, &f, t, q);
        prop_assert!((gt - dt).abs() < 1e-6 && (gq - dq).abs() < 1e-6);
    }

    #[test]
    fn markov_gradient_matches_finite_differences((s, f) in markov(), t in -1.0f64..2.0, q in -1.0f64..1.0) {
        let (gt, gq) = pressure(&s, &f, t, q).unwrap().grad.unwrap();
        let (dt, dq) = fd_gradient(&s, &f, t, q);
        prop_assert!((gt - dt).abs() < 1e-6 && (gq - dq).abs() < 1e-6, "{gt} {dt} {gq} {dq}");
    }

    #[test]
    fn translation_shifts_pressure_by_q_a((s, f) in full_shift(), t in -2.0f64..2.0, q in -2.0f64..2.0, a in -3.0f64..3.0) {
        let g = translate_family(&f, a);
        let diff = value(&s, &g, t, q) - value(&s, &f, t, q) - q * a;
        prop_assert!(diff.abs() < 1e-12);
    }

    #[test]
    fn translate_has_an_inverse((_, f) in full_shift(), a in -3.0f64..3.0) {
        let back = translate_family(&translate_family(&f, a), -a);
        for (x, y) in back.values.iter().zip(&f.values) {
            prop_assert!((x - y).abs() < 1e-14);
        }
        prop_assert!((back.lower_bound - f.lower_bound).abs() < 1e-14);
    }

    #[test]
    fn lyapunov_family_depends_on_t_minus_q((s, _) in markov(), t in -1.0f64..2.0, q in -1.0f64..1.0) {
        let l = PotentialFamily::lyapunov(&s);
        let zero = PotentialFamily::zero(&s);
        let diff = value(&s, &l, t, q) - value(&s, &zero, t - q, 0.0);
        prop_assert!(diff.abs() < 1e-11);
    }

    #[test]
    fn irreducibility_agrees_with_matrix_powers(n in 2usize..6, bits in prop::collection::vec(any::<bool>(), 36)) {
        let m: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| bits[a * 6 + b]).collect()).collect();
        let s = SystemSpec::markov(vec![0.3; n], m.clone());
        let report = check_finite_irreducibility(&s, None);
        prop_assert_eq!(report.irreducible, strongly_connected(&m));
        if report.irreducible {
            // every pair is joined by one of the witnesses
            for a in 0..n {
                for b in 0..n {
                    let joined = report.witnesses.iter().any(|w| {
                        let word: Vec<usize> = std::iter::once(a + 1).chain(w.iter().copied()).chain(std::iter::once(b + 1)).collect();
                        word.windows(2).all(|p| m[p[0] - 1][p[1] - 1])
                    });
                    prop_assert!(joined);
                }
            }
        }
    }

    #[test]
    fn markov_state_is_stationary((s, f) in markov(), t in -1.0f64..2.0, q in -1.0f64..1.0) {
        let g = gibbs_state(&s, &f, t, q).unwrap();
        let rows = g.transition.unwrap();
        let n = rows.len();
        for row in &rows {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for b in 0..n {
            let flow: f64 = (0..n).map(|a| g.stationary[a] * rows[a][b]).sum();
            prop_assert!((flow - g.stationary[b]).abs() < 1e-10);
        }
    }
}

#[test]
fn full_incidence_matrix_matches_full_shift() {
    let r = vec![0.3, 0.2, 0.1];
    let f = PotentialFamily::new(vec![0.5, -1.0, 2.0]);
    let full = SystemSpec::full_shift(r.clone());
    let matrix = SystemSpec::markov(r, vec![vec![true; 3]; 3]);
    for &(t, q) in &[(0.0, 0.0), (1.3, -0.4), (-0.5, 1.2)] {
        assert!((value(&full, &f, t, q) - value(&matrix, &f, t, q)).abs() < 1e-12);
    }
}

#[test]
fn luroth_pressure_within_tail_error() {
    let (s, f) = example_5_3(200);
    let oracle = closed_form_oracles("example_5_3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let t = rng.gen_range(-1.0..3.0);
        let q = t - rng.gen_range(0.05..3.0);
        let p = pressure(&s, &f, t, q).unwrap();
        let err = (p.value.to_f64() - (oracle.pressure)(t, q)).abs();
        assert!(err <= 1e-10_f64.max(p.tail_error), "{t} {q}: {err}");
        let dq = (p.grad.unwrap().1 - (oracle.dp_dq)(t, q)).abs();
        assert!(dq <= 1e-10 * (oracle.dp_dq)(t, q));
    }
    // characteristic Lyapunov exponent of the dimension measure
    let g = gibbs_state(&s, &f, 1.0, 0.0).unwrap();
    assert!((g.lyapunov - 2.0 * std::f64::consts::LN_2).abs() < 1e-13);
}

#[test]
fn outer_solve_is_independent_of_the_start() {
    let (s, f) = example_5_1();
    let solver = SpectrumSolver::new(&s, &f, SolverSettings::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for &xi in &[1.05, 1.3, 1.7, 1.95] {
        let reference = solver.outer_solve_t(xi, None).unwrap();
        for _ in 0..20 {
            let start = rng.gen_range(0.0..solver.h());
            let sol = solver.outer_solve_t(xi, Some(start)).unwrap();
            assert!((sol.t - reference.t).abs() < 1e-9 && (sol.q - reference.q).abs() < 1e-9);
        }
    }
}

#[test]
fn legendre_path_agrees_with_generic_solver() {
    let systems = vec![
        SystemSpec::full_shift(vec![0.5, 1.0 / 6.0, 1.0 / 12.0]),
        SystemSpec::full_shift(vec![0.4, 0.25, 0.2, 0.05]),
        SystemSpec::markov(
            vec![0.5, 0.3, 0.1],
            vec![
                vec![true, true, false],
                vec![false, true, true],
                vec![true, false, true],
            ],
        ),
        example_5_3(200).0,
    ];
    for s in systems {
        let fam = PotentialFamily::lyapunov(&s);
        let solver = SpectrumSolver::new(&s, &fam, SolverSettings::default()).unwrap();
        let r = solver.range().clone();
        let top = r.xi_max.finite().unwrap_or(8.0);
        for k in 1..10 {
            let xi = r.xi_min + (top - r.xi_min) * k as f64 / 10.0;
            let (t, q) = lyapunov_spectrum(&s, xi).unwrap();
            let (tg, qg) = outer_solve_t(&s, &fam, xi).unwrap();
            assert!(
                (t - tg).abs() < 1e-9 && (q - qg).abs() < 1e-9,
                "{xi}: ({t}, {q}) vs ({tg}, {qg})"
            );
        }
    }
}

#[test]
fn separated_minimum_pushes_t_to_zero() {
    // one symbol carries the unique minimal value
    let s = SystemSpec::full_shift(vec![0.3, 0.25, 0.2]);
    let f = PotentialFamily::new(vec![0.0, 1.0, 1.5]);
    let (t, _) = outer_solve_t(&s, &f, 1e-4).unwrap();
    assert!(t < 0.05, "{t}");
}
