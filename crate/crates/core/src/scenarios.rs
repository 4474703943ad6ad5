//! Built-in scenarios: the three-box system, Hardy's overlapping
//! interferometers, and the ε-deformed Hardy post-selection.

use std::sync::Arc;

use indexmap::IndexMap;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::require_complete;
use crate::meter::{weak_value, WeakValueResult};
use crate::pathsum::{decompose, PathDecomposition};
use crate::statespace::{tensor, Basis, DiagonalObservable, KetState};

/// Names that refer to built-in scenarios in `.scn` files.
pub const RESERVED_NAMES: [&str; 3] = ["three-box", "hardy", "hardy-epsilon"];

/// A pre-selected state together with named post-selections and observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub basis: Arc<Basis>,
    pub initial: KetState,
    pub finals: IndexMap<String, KetState>,
    pub observables: IndexMap<String, DiagonalObservable>,
    pub notes: Vec<String>,
}

impl Scenario {
    pub fn final_state(&self, name: &str) -> Result<&KetState> {
        self.finals
            .get(name)
            .ok_or_else(|| Error::unknown("final state", name, self.finals.keys()))
    }

    pub fn observable(&self, name: &str) -> Result<&DiagonalObservable> {
        self.observables
            .get(name)
            .ok_or_else(|| Error::unknown("observable", name, self.observables.keys()))
    }

    pub fn decomposition(&self, final_name: &str) -> Result<PathDecomposition> {
        decompose(&self.initial, self.final_state(final_name)?)
    }

    /// The finals, in declaration order, if they form an orthonormal basis.
    pub fn complete_final_set(&self) -> Option<Vec<KetState>> {
        let finals: Vec<KetState> = self.finals.values().cloned().collect();
        require_complete(&finals).ok().map(|()| finals)
    }

    /// A complete final set to sum over: the declared finals when they are
    /// complete, otherwise the computational basis.
    pub fn summation_basis(&self) -> Vec<KetState> {
        self.complete_final_set().unwrap_or_else(|| {
            (0..self.basis.dim())
                .map(|n| KetState::basis_state(Arc::clone(&self.basis), n).expect("index in range"))
                .collect()
        })
    }
}

fn reals(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Three-state system whose paths carry amplitudes `(β, −β, −β)`.
///
/// The initial state is `(1, −1, −1)/√3`. The post-selection is
/// `3β·(1, 1, 1)/√3`, deliberately not unit-norm: no pair of unit vectors in
/// three dimensions has these path amplitudes once `β > 1/3`.
pub fn three_box(beta: f64) -> Result<Scenario> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("beta must lie in (0, 1), got {beta}")));
    }
    let basis = Basis::numbered(3)?;
    let initial = KetState::from_reals(Arc::clone(&basis), &[1.0, -1.0, -1.0])?;
    let weight = 3.0f64.sqrt() * beta;
    let final_state = KetState::from_raw(Arc::clone(&basis), reals(&[weight; 3]))?;

    let mut observables = IndexMap::new();
    for k in 0..3 {
        observables.insert(
            format!("P{}", k + 1),
            DiagonalObservable::projector(Arc::clone(&basis), &[k])?,
        );
    }
    Ok(Scenario {
        name: "three-box".into(),
        basis,
        initial,
        finals: IndexMap::from([("f".to_string(), final_state)]),
        observables,
        notes: vec![
            format!("path amplitudes are (β, −β, −β) with β = {beta}"),
            "initial state (1, −1, −1)/√3; final state 3β·(1, 1, 1)/√3 is not unit-norm".into(),
        ],
    })
}

/// Basis order of the Hardy pair space: paths {1}..{4}, then the photon.
pub const HARDY_BASIS: [&str; 5] = ["1-,1+", "1-,2+", "2-,1+", "2-,2+", "gamma"];

fn hardy_basis() -> Arc<Basis> {
    Basis::new(HARDY_BASIS).expect("labels are unique")
}

fn hardy_observables(basis: &Arc<Basis>) -> IndexMap<String, DiagonalObservable> {
    let table: [(&str, &[usize]); 8] = [
        ("N(1-|1+)", &[0]),
        ("N(1-|2+)", &[1]),
        ("N(2-|1+)", &[2]),
        ("N(2-|2+)", &[3]),
        ("N(1-)", &[0, 1]),
        ("N(2-)", &[2, 3]),
        ("N(1+)", &[0, 2]),
        ("N(2+)", &[1, 3]),
    ];
    table
        .into_iter()
        .map(|(name, support)| {
            let op = DiagonalObservable::projector(Arc::clone(basis), support).expect("in range");
            (name.to_string(), op)
        })
        .collect()
}

/// Detector state for one particle: `|1⟩ + sign·|2⟩`, unnormalized.
fn arm_state(arms: &Arc<Basis>, sign: f64) -> KetState {
    KetState::from_raw(Arc::clone(arms), reals(&[1.0, sign])).expect("two arms")
}

/// Hardy's electron–positron interferometers with overlapping arms 2− and 2+.
pub fn hardy() -> Scenario {
    let basis = hardy_basis();
    let initial = KetState::from_reals(Arc::clone(&basis), &[1.0, 1.0, 1.0, 0.0, 1.0])
        .expect("nonzero state");

    let electron = Basis::new(["1-", "2-"]).expect("unique");
    let positron = Basis::new(["1+", "2+"]).expect("unique");
    let mut finals = IndexMap::new();
    // (D−,D+), (C−,D+), (D−,C+), (C−,C+)
    for (name, e_sign, p_sign) in [("f", -1.0, -1.0), ("g", 1.0, -1.0), ("h", -1.0, 1.0), ("j", 1.0, 1.0)] {
        let pair = tensor(&arm_state(&electron, e_sign), &arm_state(&positron, p_sign))
            .and_then(|s| s.embed(&basis))
            .and_then(|s| s.normalize())
            .expect("product of nonzero states");
        finals.insert(name.to_string(), pair);
    }
    finals.insert(
        "gamma".to_string(),
        KetState::basis_state(Arc::clone(&basis), 4).expect("in range"),
    );

    Scenario {
        name: "hardy".into(),
        observables: hardy_observables(&basis),
        basis,
        initial,
        finals,
        notes: vec![
            "basis order: 1-,1+ | 1-,2+ | 2-,1+ | 2-,2+ | gamma".into(),
            "occupation operators assign eigenvalue 0 to the annihilation state gamma".into(),
        ],
    }
}

/// Hardy setup with the `f` post-selection deformed to
/// `(|1−1+⟩ − |1−2+⟩ − ε|2−1+⟩ + ε|2−2+⟩)`, renormalized. `ε = 1` gives the
/// original `f`.
pub fn hardy_epsilon(eps: f64) -> Result<Scenario> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("eps must be positive, got {eps}")));
    }
    let mut s = hardy();
    let deformed = KetState::from_reals(Arc::clone(&s.basis), &[1.0, -1.0, -eps, eps, 0.0])?;
    s.finals.insert("f".to_string(), deformed);
    s.name = "hardy-epsilon".into();
    s.notes.push(format!(
        "final f deformed with ε = {eps}; the third term is read as ε|2-⟩|1+⟩ and the state is renormalized by √(2+2ε²)"
    ));
    if eps != 1.0 {
        s.notes.push("finals g, h, j are no longer orthogonal to f".into());
    }
    Ok(s)
}

/// Looks up a built-in by its reserved name. `param` is β for three-box and
/// ε for hardy-epsilon; hardy takes none.
pub fn builtin(name: &str, param: Option<f64>) -> Result<Scenario> {
    match (name, param) {
        ("three-box", p) => three_box(p.unwrap_or(0.5)),
        ("hardy", None) => Ok(hardy()),
        ("hardy", Some(_)) => Err(Error::ParameterOutOfRange("hardy takes no parameter".into())),
        ("hardy-epsilon", p) => hardy_epsilon(p.unwrap_or(1.0)),
        _ => {
            let names: Vec<String> = RESERVED_NAMES.iter().map(|s| s.to_string()).collect();
            Err(Error::unknown("scenario", name, names.iter()))
        }
    }
}

/// `steps` log-spaced values from `from` to `to`, both included.
pub fn epsilon_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0 && from.is_finite() && to.is_finite()) {
        return Err(Error::ParameterOutOfRange("epsilon range must be positive".into()));
    }
    match steps {
        0 => Err(Error::ParameterOutOfRange("steps must be at least 1".into())),
        1 => Ok(vec![from]),
        _ => {
            let (lo, hi) = (from.log10(), to.log10());
            let last = (steps - 1) as f64;
            Ok((0..steps)
                .map(|k| match k {
                    0 => from,
                    k if k == steps - 1 => to,
                    k => 10f64.powf(lo + (hi - lo) * k as f64 / last),
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonScanPoint {
    pub eps: f64,
    pub weak: WeakValueResult,
}

/// Weak value of `observable` for the deformed `f` post-selection at each ε.
pub fn scan_epsilon(observable: &str, eps_values: &[f64]) -> Result<Vec<EpsilonScanPoint>> {
    eps_values
        .iter()
        .map(|&eps| {
            let s = hardy_epsilon(eps)?;
            let weak = weak_value(&s.decomposition("f")?, s.observable(observable)?)?;
            Ok(EpsilonScanPoint { eps, weak })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::build_network;
    use crate::pathsum::{amplitude_table, transition_probability};
    use crate::statespace::inner;

    #[test]
    fn hardy_finals_are_orthonormal_and_complete() {
        let s = hardy();
        assert!(s.complete_final_set().is_some());
        let total: f64 = s
            .finals
            .values()
            .map(|f| transition_probability(&s.initial, f).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        let probs: Vec<f64> = s
            .finals
            .values()
            .map(|f| transition_probability(&s.initial, f).unwrap())
            .collect();
        for (p, want) in probs.iter().zip([1.0, 1.0, 1.0, 9.0, 4.0]) {
            assert!((p - want / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hardy_table_is_exact() {
        let s = hardy();
        let t = amplitude_table(&s.initial, s.finals.iter().map(|(k, v)| (k.as_str(), v))).unwrap();
        let q = 0.25;
        let want = [
            [q, q, q, q, 0.0],
            [-q, -q, q, q, 0.0],
            [-q, q, -q, q, 0.0],
            [0.0; 5],
            [0.0, 0.0, 0.0, 0.0, 0.5],
        ];
        for (row, want_row) in t.entries.iter().zip(want) {
            for (got, w) in row.iter().zip(want_row) {
                assert_eq!(*got, Complex64::new(w, 0.0));
            }
        }
    }

    #[test]
    fn operator_identities() {
        let s = hardy();
        let o = |n: &str| s.observables[n].clone();
        assert_eq!(o("N(1-|1+)").checked_add(&o("N(1-|2+)")).unwrap(), o("N(1-)"));
        assert_eq!(o("N(1-|1+)").checked_add(&o("N(2-|1+)")).unwrap(), o("N(1+)"));
        assert_eq!(o("N(2-)").checked_mul(&o("N(2+)")).unwrap(), o("N(2-|2+)"));
        for n in s.observables.values() {
            assert_eq!(n.eigenvalue(4), 0.0);
        }
    }

    #[test]
    fn epsilon_one_matches_hardy() {
        let a = hardy();
        let b = hardy_epsilon(1.0).unwrap();
        assert_eq!(a.finals, b.finals);
        assert_eq!(a.observables, b.observables);
    }

    #[test]
    fn epsilon_final_is_unit_norm() {
        for eps in [1e-6, 0.5, 3.0] {
            let s = hardy_epsilon(eps).unwrap();
            let f = &s.finals["f"];
            assert!((inner(f, f).unwrap().re - 1.0).abs() < 1e-12);
        }
        assert!(hardy_epsilon(0.0).is_err());
        assert!(hardy_epsilon(-1.0).is_err());
    }

    #[test]
    fn epsilon_half_single_pathway() {
        let s = hardy_epsilon(0.5).unwrap();
        let net = build_network(&s.initial, &s.finals["f"], &s.observables["N(2-|1+)"]).unwrap();
        assert!(net.probability_of(0.0) < 1e-30);
        assert!(net.probability_of(1.0) > 0.0);
        assert_eq!(net.class(1.0).unwrap().members, vec![2]);
        let wv = weak_value(&s.decomposition("f").unwrap(), &s.observables["N(2-|1+)"]).unwrap();
        assert!((wv.reported - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_box_amplitudes() {
        for beta in [0.1, 0.5, 0.9] {
            let s = three_box(beta).unwrap();
            let d = s.decomposition("f").unwrap();
            for (got, want) in d.amplitudes().iter().zip([beta, -beta, -beta]) {
                assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
            let wv = |n: &str| weak_value(&d, &s.observables[n]).unwrap().reported;
            assert!((wv("P1") + 1.0).abs() < 1e-12);
            assert!((wv("P2") - 1.0).abs() < 1e-12);
            assert!((wv("P3") - 1.0).abs() < 1e-12);
        }
        assert!(three_box(1.0).is_err());
        assert!(three_box(0.0).is_err());
    }

    #[test]
    fn lookups_name_alternatives() {
        let s = hardy();
        let err = s.observable("N(3-)").unwrap_err();
        assert!(err.to_string().contains("N(1-|1+)"));
        assert!(s.final_state("k").is_err());
        assert!(builtin("four-box", None).is_err());
        assert_eq!(builtin("hardy", None).unwrap(), s);
    }

    #[test]
    fn log_grid() {
        let g = epsilon_grid(1e-6, 1.0, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[6], 1.0);
        for (k, v) in g.iter().enumerate() {
            let want = 10f64.powi(k as i32 - 6);
            assert!((v / want - 1.0).abs() < 1e-12);
        }
        assert!(epsilon_grid(0.0, 1.0, 3).is_err());
        assert_eq!(epsilon_grid(0.5, 2.0, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn epsilon_scan_tracks_closed_form() {
        let g = epsilon_grid(1e-6, 1.0, 7).unwrap();
        for p in scan_epsilon("N(1+)", &g).unwrap() {
            let want = 1.0 - 1.0 / p.eps;
            assert!((p.weak.reported - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }
}
