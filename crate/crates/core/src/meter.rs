//! Finite-accuracy von Neumann meter with a Gaussian pointer.
//!
//! The pointer starts in `G(f) = (2πΔ²)^(-1/4)·exp(−f²/(4Δ²))`, which has unit
//! L² norm. After the impulsive coupling the reading amplitude is
//! `Ψ(f) = Σₙ G(f − F(n))·Φ{n}`.
//!
//! Products of two shifted pointers integrate in closed form:
//!
//! ```text
//! G(f−a)G(f−b) = K(a,b) · N(f; (a+b)/2, Δ²),   K(a,b) = exp(−(a−b)²/(8Δ²))
//! ```
//!
//! with `N` a normalized normal density, so `∫|Ψ|²` and `∫f|Ψ|²` reduce to
//! double sums over eigenvalue classes. As `Δ → 0` the kernel becomes a
//! Kronecker delta (accurate measurement); as `Δ → ∞` it tends to 1 and the
//! mean reading tends to the real part of the weak value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::PathwayNetwork;
use crate::pathsum::PathDecomposition;
use crate::statespace::DiagonalObservable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterModel {
    width: f64,
}

impl MeterModel {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidWidth(width));
        }
        Ok(MeterModel { width })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Initial pointer wavefunction `G(f)`.
    pub fn pointer(&self, f: f64) -> f64 {
        let var = self.width * self.width;
        (2.0 * std::f64::consts::PI * var).powf(-0.25) * (-f * f / (4.0 * var)).exp()
    }

    /// Overlap `∫ G(f−a)G(f−b) df`.
    pub fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        (-d * d / (8.0 * self.width * self.width)).exp()
    }
}

/// `Ψ(f) = Σₙ G(f − F(n))·Φ{n}`.
pub fn reading_amplitude(
    dec: &PathDecomposition,
    observable: &DiagonalObservable,
    meter: &MeterModel,
    f: f64,
) -> Result<Complex64> {
    if observable.dim() != dec.dim() {
        return Err(Error::DimensionMismatch { expected: dec.dim(), found: observable.dim() });
    }
    Ok(dec
        .amplitudes()
        .iter()
        .zip(observable.eigenvalues())
        .map(|(phi, &ev)| phi * meter.pointer(f - ev))
        .sum())
}

/// Exact mean pointer reading `∫f|Ψ|² / ∫|Ψ|²` at the meter's width.
pub fn mean_reading(
    dec: &PathDecomposition,
    observable: &DiagonalObservable,
    meter: &MeterModel,
) -> Result<f64> {
    let net = PathwayNetwork::from_decomposition(dec.clone(), observable)?;
    let classes = net.classes();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for a in classes {
        for b in classes {
            let overlap = (a.class_amplitude * b.class_amplitude.conj()).re
                * meter.kernel(a.eigenvalue, b.eigenvalue);
            numerator += 0.5 * (a.eigenvalue + b.eigenvalue) * overlap;
            denominator += overlap;
        }
    }
    let scale: f64 = dec.amplitudes().iter().map(|a| a.norm()).sum();
    if !(denominator > 1e-24 * scale * scale) {
        return Err(Error::MeterStatisticsUndefined);
    }
    Ok(numerator / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValueResult {
    /// `Σ F(n)Φ{n} / Σ Φ{n}`.
    pub complex_value: Complex64,
    /// Real part, which is what a weak meter's mean reading approaches.
    pub reported: f64,
}

pub fn weak_value(dec: &PathDecomposition, observable: &DiagonalObservable) -> Result<WeakValueResult> {
    if observable.dim() != dec.dim() {
        return Err(Error::DimensionMismatch { expected: dec.dim(), found: observable.dim() });
    }
    let total = dec.transition_amplitude();
    let scale: f64 = dec.amplitudes().iter().map(|a| a.norm()).sum();
    if !(total.norm() > 1e-14 * scale) {
        return Err(Error::WeakValueUndefined);
    }
    let weighted: Complex64 = dec
        .amplitudes()
        .iter()
        .zip(observable.eigenvalues())
        .map(|(phi, &ev)| phi * ev)
        .sum();
    let complex_value = weighted / total;
    Ok(WeakValueResult { complex_value, reported: complex_value.re })
}

/// Meter widths `ratio·δf` for each ratio, where δf is the observable's
/// eigenvalue spread (taken as 1 for a single eigenvalue).
pub fn width_ladder(observable: &DiagonalObservable, ratios: &[f64]) -> Vec<f64> {
    let spread = observable.spread();
    let unit = if spread > 0.0 { spread } else { 1.0 };
    ratios.iter().map(|r| r * unit).collect()
}

/// Widths at which a meter counts as weak: `Δ ≥ 10·δf`.
pub fn is_weak_regime(observable: &DiagonalObservable, width: f64) -> bool {
    width >= 10.0 * observable.spread()
}

/// `|mean_reading(Δ_k) − weak value|` for each width.
pub fn weak_limit_convergence(
    dec: &PathDecomposition,
    observable: &DiagonalObservable,
    widths: &[f64],
) -> Result<Vec<f64>> {
    if widths.is_empty() || widths[0] <= 0.0 || widths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidWidthSequence);
    }
    let target = weak_value(dec, observable)?.reported;
    widths
        .iter()
        .map(|&w| Ok((mean_reading(dec, observable, &MeterModel::new(w)?)? - target).abs()))
        .collect()
}
