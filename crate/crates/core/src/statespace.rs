//! Finite-dimensional state vectors and diagonal observables over a labeled
//! orthonormal basis.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One element of a basis: its display name and its position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub name: String,
    pub index: usize,
}

/// An ordered orthonormal basis with unique labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    names: Vec<String>,
}

impl Basis {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Arc<Self>> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidBasis("basis must have at least one state".into()));
        }
        for (k, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidBasis(format!("label {k} is empty")));
            }
            if names[..k].contains(name) {
                return Err(Error::InvalidBasis(format!("duplicate label `{name}`")));
            }
        }
        Ok(Arc::new(Basis { names }))
    }

    /// Basis labeled `1..=n`.
    pub fn numbered(n: usize) -> Result<Arc<Self>> {
        Basis::new((1..=n).map(|k| k.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(index, name)| BasisLabel { name: name.clone(), index })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Product basis with `a` as the major index; labels are joined by a comma.
    pub fn product(a: &Basis, b: &Basis) -> Result<Arc<Self>> {
        let mut names = Vec::with_capacity(a.dim() * b.dim());
        for x in &a.names {
            for y in &b.names {
                names.push(format!("{x},{y}"));
            }
        }
        Basis::new(names)
    }
}

fn same_basis(a: &Arc<Basis>, b: &Arc<Basis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        return Ok(());
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Err(Error::BasisMismatch)
}

fn check_finite_complex(amps: &[Complex64]) -> Result<()> {
    for (index, a) in amps.iter().enumerate() {
        if !a.re.is_finite() {
            return Err(Error::NonFinite { index, value: a.re });
        }
        if !a.im.is_finite() {
            return Err(Error::NonFinite { index, value: a.im });
        }
    }
    Ok(())
}

/// A vector of complex amplitudes over a [`Basis`].
///
/// [`KetState::new`] normalizes. [`KetState::from_raw`] keeps the amplitudes
/// as given; it exists for weighted post-selections and scale-invariance
/// checks, and every consumer treats such states linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct KetState {
    basis: Arc<Basis>,
    amplitudes: Vec<Complex64>,
}

impl KetState {
    pub fn new(basis: Arc<Basis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        KetState::from_raw(basis, amplitudes)?.normalize()
    }

    /// Real amplitudes, normalized.
    pub fn from_reals(basis: Arc<Basis>, amplitudes: &[f64]) -> Result<Self> {
        KetState::new(basis, amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_raw(basis: Arc<Basis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        check_finite_complex(&amplitudes)?;
        Ok(KetState { basis, amplitudes })
    }

    pub fn basis_state(basis: Arc<Basis>, index: usize) -> Result<Self> {
        let n = basis.dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index + 1 });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(KetState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= crate::ALGEBRAIC_TOL
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(KetState {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
        })
    }

    /// `c·ψ`, without renormalizing.
    pub fn scaled(&self, c: Complex64) -> Self {
        KetState {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.iter().map(|a| a * c).collect(),
        }
    }

    /// Re-expresses the state in `target`, matching components by label.
    /// Labels of `target` missing from this state's basis get amplitude 0.
    pub fn embed(&self, target: &Arc<Basis>) -> Result<Self> {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); target.dim()];
        for (k, name) in self.basis.names().iter().enumerate() {
            let index = target.index_of(name).ok_or_else(|| {
                Error::InvalidBasis(format!("label `{name}` is not part of the target basis"))
            })?;
            amplitudes[index] = self.amplitudes[k];
        }
        Ok(KetState { basis: Arc::clone(target), amplitudes })
    }
}

impl fmt::Display for KetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, name) in self.amplitudes.iter().zip(self.basis.names()) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)|{}⟩", a.re, a.im, name)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `⟨bra|ket⟩ = Σₙ conj(braₙ)·ketₙ`.
pub fn inner(bra: &KetState, ket: &KetState) -> Result<Complex64> {
    same_basis(&bra.basis, &ket.basis)?;
    Ok(bra
        .amplitudes
        .iter()
        .zip(&ket.amplitudes)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

/// Product state `|a⟩|b⟩` over [`Basis::product`], `a` major.
pub fn tensor(a: &KetState, b: &KetState) -> Result<KetState> {
    let basis = Basis::product(&a.basis, &b.basis)?;
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    Ok(KetState { basis, amplitudes })
}

pub fn normalize(psi: &KetState) -> Result<KetState> {
    psi.normalize()
}

/// `⟨ψ|A|ψ⟩ = Σₙ F(n)|ψₙ|²`.
pub fn expectation(psi: &KetState, observable: &DiagonalObservable) -> Result<f64> {
    same_basis(&psi.basis, &observable.basis)?;
    Ok(psi
        .amplitudes
        .iter()
        .zip(&observable.eigenvalues)
        .map(|(a, f)| f * a.norm_sqr())
        .sum())
}

/// An observable diagonal in the basis, `Σₙ |n⟩F(n)⟨n|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable {
    basis: Arc<Basis>,
    eigenvalues: Vec<f64>,
}

impl DiagonalObservable {
    pub fn new(basis: Arc<Basis>, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: eigenvalues.len(),
            });
        }
        if let Some((index, &value)) = eigenvalues.iter().enumerate().find(|(_, v)| !v.is_finite())
        {
            return Err(Error::NonFinite { index, value });
        }
        Ok(DiagonalObservable { basis, eigenvalues })
    }

    pub fn identity(basis: Arc<Basis>) -> Self {
        let n = basis.dim();
        DiagonalObservable { basis, eigenvalues: vec![1.0; n] }
    }

    pub fn zero(basis: Arc<Basis>) -> Self {
        let n = basis.dim();
        DiagonalObservable { basis, eigenvalues: vec![0.0; n] }
    }

    /// Projector onto the span of the listed basis indices.
    pub fn projector(basis: Arc<Basis>, indices: &[usize]) -> Result<Self> {
        let n = basis.dim();
        let mut eigenvalues = vec![0.0; n];
        for &k in indices {
            if k >= n {
                return Err(Error::DimensionMismatch { expected: n, found: k + 1 });
            }
            eigenvalues[k] = 1.0;
        }
        Ok(DiagonalObservable { basis, eigenvalues })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, index: usize) -> f64 {
        self.eigenvalues[index]
    }

    /// Distinct eigenvalues in ascending order. Grouping is exact: values are
    /// declared, not computed.
    pub fn distinct_eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = Vec::new();
        for &v in &self.eigenvalues {
            if !values.contains(&v) {
                values.push(v);
            }
        }
        values.sort_by(f64::total_cmp);
        values
    }

    /// Largest minus smallest eigenvalue.
    pub fn spread(&self) -> f64 {
        let max = self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn is_projector(&self) -> bool {
        self.eigenvalues.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub(crate) fn require_projector(&self) -> Result<()> {
        match self.eigenvalues.iter().find(|&&v| v != 0.0 && v != 1.0) {
            Some(&v) => Err(Error::NotProjector(v)),
            None => Ok(()),
        }
    }

    pub fn checked_add(&self, other: &DiagonalObservable) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise product, i.e. the operator product of two diagonals.
    pub fn checked_mul(&self, other: &DiagonalObservable) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &DiagonalObservable, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_basis(&self.basis, &other.basis)?;
        DiagonalObservable::new(
            Arc::clone(&self.basis),
            self.eigenvalues.iter().zip(&other.eigenvalues).map(|(&a, &b)| op(a, b)).collect(),
        )
    }
}
