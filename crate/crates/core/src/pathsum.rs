//! Virtual-path decomposition of a transition amplitude.
//!
//! With a zero Hamiltonian only the N constant paths exist, and the path
//! through basis state `n` carries `Φ{n} = ⟨f|n⟩⟨n|i⟩`. Zero-amplitude paths
//! are kept: they still belong to a pathway class once something is measured.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statespace::{inner, KetState};

#[derive(Debug, Clone, PartialEq)]
pub struct PathDecomposition {
    initial: KetState,
    final_state: KetState,
    amplitudes: Vec<Complex64>,
}

impl PathDecomposition {
    pub fn initial(&self) -> &KetState {
        &self.initial
    }

    pub fn final_state(&self) -> &KetState {
        &self.final_state
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, path: usize) -> Complex64 {
        self.amplitudes[path]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `Σₙ Φ{n}`, which equals `⟨f|i⟩`.
    pub fn transition_amplitude(&self) -> Complex64 {
        self.amplitudes.iter().sum()
    }

    pub fn transition_probability(&self) -> f64 {
        self.transition_amplitude().norm_sqr()
    }
}

pub fn decompose(initial: &KetState, final_state: &KetState) -> Result<PathDecomposition> {
    // Same checks as the inner product.
    inner(final_state, initial)?;
    let amplitudes = final_state
        .amplitudes()
        .iter()
        .zip(initial.amplitudes())
        .map(|(f, i)| f.conj() * i)
        .collect();
    Ok(PathDecomposition {
        initial: initial.clone(),
        final_state: final_state.clone(),
        amplitudes,
    })
}

/// Unperturbed `|⟨f|i⟩|²`, assembled from the paths.
pub fn transition_probability(initial: &KetState, final_state: &KetState) -> Result<f64> {
    Ok(decompose(initial, final_state)?.transition_probability())
}

/// Path amplitudes for one initial state against a set of mutually
/// orthogonal final states. `entries[path][final]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTable {
    pub path_names: Vec<String>,
    pub final_names: Vec<String>,
    pub entries: Vec<Vec<Complex64>>,
}

impl AmplitudeTable {
    pub fn column(&self, final_index: usize) -> Vec<Complex64> {
        self.entries.iter().map(|row| row[final_index]).collect()
    }

    /// `|Σₙ Φ{n}|²` for each final.
    pub fn transition_probabilities(&self) -> Vec<f64> {
        (0..self.final_names.len())
            .map(|k| self.column(k).iter().sum::<Complex64>().norm_sqr())
            .collect()
    }
}

/// Two states count as orthogonal when `|⟨a|b⟩| ≤ 1e-12·‖a‖‖b‖`.
pub(crate) fn orthogonal(a: &KetState, b: &KetState) -> Result<bool> {
    Ok(inner(a, b)?.norm() <= crate::ALGEBRAIC_TOL * a.norm() * b.norm())
}

pub fn amplitude_table<'a>(
    initial: &KetState,
    finals: impl IntoIterator<Item = (&'a str, &'a KetState)>,
) -> Result<AmplitudeTable> {
    let finals: Vec<(&str, &KetState)> = finals.into_iter().collect();
    for (k, (name_a, a)) in finals.iter().enumerate() {
        for (name_b, b) in &finals[k + 1..] {
            if !orthogonal(a, b)? {
                return Err(Error::NonOrthogonalFinals(name_a.to_string(), name_b.to_string()));
            }
        }
    }
    let columns: Vec<PathDecomposition> = finals
        .iter()
        .map(|(_, f)| decompose(initial, f))
        .collect::<Result<_>>()?;
    let n = initial.dim();
    Ok(AmplitudeTable {
        path_names: initial.basis().names().to_vec(),
        final_names: finals.iter().map(|(name, _)| name.to_string()).collect(),
        entries: (0..n)
            .map(|path| columns.iter().map(|d| d.amplitude(path)).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::statespace::Basis;

    fn assert_amps(got: &[Complex64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - Complex64::new(*w, 0.0)).norm() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn hardy_paths() {
        let s = scenarios::hardy();
        let d = decompose(&s.initial, &s.finals["f"]).unwrap();
        assert_amps(d.amplitudes(), &[0.25, -0.25, -0.25, 0.0, 0.0]);
        let d = decompose(&s.initial, &s.finals["j"]).unwrap();
        assert_amps(d.amplitudes(), &[0.25, 0.25, 0.25, 0.0, 0.0]);
    }

    #[test]
    fn single_path() {
        let b = Basis::numbered(4).unwrap();
        let e0 = KetState::basis_state(b, 0).unwrap();
        let d = decompose(&e0, &e0).unwrap();
        assert_amps(d.amplitudes(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hardy_transition_probabilities() {
        let s = scenarios::hardy();
        let p = |name: &str| transition_probability(&s.initial, &s.finals[name]).unwrap();
        assert!((p("f") - 1.0 / 16.0).abs() < 1e-12);
        assert!((p("gamma") - 0.25).abs() < 1e-12);
        assert!((p("j") - 9.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn hardy_table_columns() {
        let s = scenarios::hardy();
        let t = amplitude_table(&s.initial, s.finals.iter().map(|(k, v)| (k.as_str(), v))).unwrap();
        assert_eq!(t.final_names, ["f", "g", "h", "j", "gamma"]);
        assert_amps(&t.column(0), &[0.25, -0.25, -0.25, 0.0, 0.0]);
        assert_amps(&t.column(1), &[0.25, -0.25, 0.25, 0.0, 0.0]);
        assert_amps(&t.column(4), &[0.0, 0.0, 0.0, 0.0, 0.5]);
        let total: f64 = t.transition_probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_rejects_overlapping_finals() {
        let s = scenarios::hardy();
        let f = &s.finals["f"];
        let err = amplitude_table(&s.initial, [("f", f), ("f2", f)]).unwrap_err();
        assert_eq!(err, Error::NonOrthogonalFinals("f".into(), "f2".into()));
    }

    #[test]
    fn decompose_is_sesquilinear() {
        let s = scenarios::hardy();
        let c = Complex64::new(0.3, -1.7);
        let base = decompose(&s.initial, &s.finals["g"]).unwrap();
        let left = decompose(&s.initial.scaled(c), &s.finals["g"]).unwrap();
        let right = decompose(&s.initial, &s.finals["g"].scaled(c)).unwrap();
        for n in 0..base.dim() {
            assert!((left.amplitude(n) - c * base.amplitude(n)).norm() < 1e-12);
            assert!((right.amplitude(n) - c.conj() * base.amplitude(n)).norm() < 1e-12);
        }
    }
}
