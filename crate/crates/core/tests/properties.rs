use std::sync::Arc;

use feynpath::measurement::{build_network, summed_over_finals};
use feynpath::meter::weak_value;
use feynpath::pathsum::decompose;
use feynpath::statespace::{expectation, inner, Basis, DiagonalObservable, KetState};
use feynpath::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

fn close_c(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= TOL * (1.0 + a.norm().max(b.norm()))
}

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
        .prop_filter("nonzero", |v: &Vec<Complex64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

#[derive(Debug, Clone)]
struct Case {
    basis: Arc<Basis>,
    initial: KetState,
    final_state: KetState,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..=8)
        .prop_flat_map(|n| {
            (
                amplitudes(n),
                amplitudes(n),
                prop::collection::vec(prop::bool::ANY, n),
                prop::collection::vec(prop::bool::ANY, n),
            )
        })
        .prop_map(|(i, f, a, b)| {
            let basis = Basis::numbered(i.len()).unwrap();
            let as_f64 = |bits: Vec<bool>| bits.into_iter().map(|x| if x { 1.0 } else { 0.0 }).collect();
            Case {
                initial: KetState::new(Arc::clone(&basis), i).unwrap(),
                final_state: KetState::new(Arc::clone(&basis), f).unwrap(),
                basis,
                a: as_f64(a),
                b: as_f64(b),
            }
        })
        .prop_filter("post-selection possible", |c| inner(&c.final_state, &c.initial).unwrap().norm() >= 1e-3)
}

fn observable(c: &Case, values: &[f64]) -> DiagonalObservable {
    DiagonalObservable::new(Arc::clone(&c.basis), values.to_vec()).unwrap()
}

/// Gram–Schmidt on seeded vectors; independent of anything in the library.
fn orthonormal_basis(basis: &Arc<Basis>, seeds: &[Vec<Complex64>]) -> Option<Vec<KetState>> {
    let mut done: Vec<Vec<Complex64>> = Vec::new();
    for v in seeds {
        let mut w = v.clone();
        for u in &done {
            let proj: Complex64 = u.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            for (wk, uk) in w.iter_mut().zip(u) {
                *wk -= proj * uk;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return None;
        }
        done.push(w.into_iter().map(|z| z / norm).collect());
    }
    Some(done.into_iter().map(|v| KetState::from_raw(Arc::clone(basis), v).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn classes_partition_the_paths(c in case()) {
        let obs = observable(&c, &c.a);
        let net = build_network(&c.initial, &c.final_state, &obs).unwrap();
        let mut seen: Vec<usize> = net.classes().iter().flat_map(|k| k.members.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..c.basis.dim()).collect::<Vec<_>>());
        let total: Complex64 = net.classes().iter().map(|k| k.class_amplitude).sum();
        prop_assert!(close_c(total, net.decomposition().transition_amplitude()));
        for k in net.classes() {
            prop_assert!(k.members.iter().all(|&m| obs.eigenvalue(m) == k.eigenvalue));
        }
    }

    #[test]
    fn summed_outcomes_match_the_operator_average(
        c in case(),
        seeds in prop::collection::vec(amplitudes(8), 8),
    ) {
        let n = c.basis.dim();
        let projector = observable(&c, &c.a);
        let direct: f64 = c.initial.amplitudes().iter().zip(&c.a).map(|(z, a)| z.norm_sqr() * a).sum();
        let computational: Vec<KetState> =
            (0..n).map(|k| KetState::basis_state(Arc::clone(&c.basis), k).unwrap()).collect();
        let truncated: Vec<Vec<Complex64>> = seeds.iter().take(n).map(|s| s[..n].to_vec()).collect();
        prop_assume!(orthonormal_basis(&c.basis, &truncated).is_some());
        let rotated = orthonormal_basis(&c.basis, &truncated).unwrap();
        for finals in [&computational, &rotated] {
            let summed = summed_over_finals(&c.initial, &projector, finals).unwrap();
            prop_assert!(close(summed, direct), "{} vs {}", summed, direct);
        }
        prop_assert!(close(expectation(&c.initial, &projector).unwrap(), direct));
    }

    #[test]
    fn weak_values_are_linear(c in case(), x in -3.0..3.0f64, y in -3.0..3.0f64) {
        let dec = decompose(&c.initial, &c.final_state).unwrap();
        let combo: Vec<f64> = c.a.iter().zip(&c.b).map(|(a, b)| x * a + y * b).collect();
        let w = |v: &[f64]| weak_value(&dec, &observable(&c, v)).unwrap().complex_value;
        prop_assert!(close_c(w(&combo), w(&c.a) * x + w(&c.b) * y));
    }

    #[test]
    fn identity_has_weak_value_one(c in case()) {
        let dec = decompose(&c.initial, &c.final_state).unwrap();
        let w = weak_value(&dec, &DiagonalObservable::identity(Arc::clone(&c.basis))).unwrap();
        prop_assert!(close_c(w.complex_value, Complex64::new(1.0, 0.0)));
        prop_assert_eq!(w.reported, w.complex_value.re);
    }

    #[test]
    fn single_path_weak_value_is_its_eigenvalue(c in case(), pick in 0usize..8, values in prop::collection::vec(-5.0..5.0f64, 8)) {
        let n = c.basis.dim();
        let k = pick % n;
        prop_assume!(c.initial.amplitude(k).norm() > 1e-3);
        let f = KetState::basis_state(Arc::clone(&c.basis), k).unwrap();
        let dec = decompose(&c.initial, &f).unwrap();
        let w = weak_value(&dec, &observable(&c, &values[..n])).unwrap();
        prop_assert!(close_c(w.complex_value, Complex64::new(values[k], 0.0)));
    }

    #[test]
    fn rescaling_states_changes_nothing(c in case(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let s = Complex64::new(re, im);
        prop_assume!(s.norm() > 0.1);
        let obs = observable(&c, &c.a);
        let plain = decompose(&c.initial, &c.final_state).unwrap();
        let scaled = decompose(&c.initial.scaled(s), &c.final_state.scaled(s.conj() * 0.5)).unwrap();
        let (w0, w1) = (weak_value(&plain, &obs).unwrap(), weak_value(&scaled, &obs).unwrap());
        prop_assert!(close_c(w0.complex_value, w1.complex_value));

        let d0 = build_network(&c.initial, &c.final_state, &obs).unwrap().conditional_reading_distribution();
        let d1 = build_network(&c.initial.scaled(s), &c.final_state.scaled(s), &obs)
            .unwrap()
            .conditional_reading_distribution();
        match (d0, d1) {
            (Ok(d0), Ok(d1)) => {
                prop_assert_eq!(d0.entries.len(), d1.entries.len());
                for ((e0, p0), (e1, p1)) in d0.entries.iter().zip(&d1.entries) {
                    prop_assert_eq!(e0, e1);
                    prop_assert!(close(*p0, *p1));
                }
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn conditional_distribution_is_a_distribution(c in case()) {
        let obs = observable(&c, &c.a);
        let net = build_network(&c.initial, &c.final_state, &obs).unwrap();
        if let Ok(d) = net.conditional_reading_distribution() {
            let total: f64 = d.entries.iter().map(|(_, p)| p).sum();
            prop_assert!(close(total, 1.0));
            prop_assert!(d.entries.iter().all(|(_, p)| *p >= 0.0));
        }
    }

    #[test]
    fn probabilities_match_explicit_projection(c in case()) {
        let obs = observable(&c, &c.a);
        let net = build_network(&c.initial, &c.final_state, &obs).unwrap();
        for k in net.classes() {
            let projected: Complex64 = k
                .members
                .iter()
                .map(|&m| c.final_state.amplitude(m).conj() * c.initial.amplitude(m))
                .sum();
            prop_assert!(close(k.probability, projected.norm_sqr()));
        }
    }
}
