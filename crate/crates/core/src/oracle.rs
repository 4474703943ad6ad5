//! Brute-force cross-checks that share no code path with the pathway and
//! closed-form meter machinery: probabilities from explicit spectral
//! projectors, and mean readings from trapezoid quadrature of `|Ψ(f)|²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::{build_network, max_deviation, summed_over_finals};
use crate::meter::{mean_reading, reading_amplitude, weak_limit_convergence, width_ladder, MeterModel};
use crate::pathsum::PathDecomposition;
use crate::scenarios::{self, Scenario};
use crate::statespace::{expectation, inner, DiagonalObservable, KetState};

/// `|⟨f|Π_j|i⟩|²` for every distinct eigenvalue `F_j`, ascending.
pub fn projective_joint(
    initial: &KetState,
    final_state: &KetState,
    observable: &DiagonalObservable,
) -> Result<Vec<(f64, f64)>> {
    let mut eigenvalues: Vec<f64> = observable.eigenvalues().to_vec();
    eigenvalues.sort_by(f64::total_cmp);
    eigenvalues.dedup();
    eigenvalues
        .into_iter()
        .map(|ev| {
            let projected: Vec<Complex64> = initial
                .amplitudes()
                .iter()
                .zip(observable.eigenvalues())
                .map(|(&a, &f)| if f == ev { a } else { Complex64::new(0.0, 0.0) })
                .collect();
            let projected = KetState::from_raw(initial.basis().clone(), projected)?;
            Ok((ev, inner(final_state, &projected)?.norm_sqr()))
        })
        .collect()
}

/// Number of samples in the default reading grid.
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

/// Minimum number of samples a reading grid may have.
pub const MIN_GRID_POINTS: usize = 4096;

/// Grid bounds must reach this many widths past the extreme eigenvalues.
pub const GRID_REACH: f64 = 8.0;

/// Bounds and resolution of a reading grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    /// `[min F − 8Δ, max F + 8Δ]` with 2¹⁴ points.
    pub fn covering(observable: &DiagonalObservable, meter: &MeterModel) -> Self {
        let (min, max) = eigen_range(observable);
        let reach = GRID_REACH * meter.width();
        GridSpec { lo: min - reach, hi: max + reach, points: DEFAULT_GRID_POINTS }
    }

    pub fn with_points(self, points: usize) -> Self {
        GridSpec { points, ..self }
    }

    fn validate(&self, observable: &DiagonalObservable, meter: &MeterModel) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(Error::InvalidGrid(format!("lo {} must be below hi {}", self.lo, self.hi)));
        }
        if self.points < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{} points, need at least {MIN_GRID_POINTS}",
                self.points
            )));
        }
        let need = GridSpec::covering(observable, meter);
        let slack = 1e-12 * (need.hi - need.lo);
        if self.lo > need.lo + slack || self.hi < need.hi - slack {
            return Err(Error::InvalidGrid(format!(
                "[{}, {}] does not cover [{}, {}]",
                self.lo, self.hi, need.lo, need.hi
            )));
        }
        Ok(())
    }
}

fn eigen_range(observable: &DiagonalObservable) -> (f64, f64) {
    let ev = observable.eigenvalues();
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// `|Ψ(f)|²` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub values: Vec<f64>,
}

impl ReadingGrid {
    pub fn sample(
        dec: &PathDecomposition,
        observable: &DiagonalObservable,
        meter: &MeterModel,
        spec: GridSpec,
    ) -> Result<Self> {
        spec.validate(observable, meter)?;
        let grid = ReadingGrid { lo: spec.lo, hi: spec.hi, points: spec.points, values: Vec::new() };
        let values = (0..spec.points)
            .map(|k| Ok(reading_amplitude(dec, observable, meter, grid.position(k))?.norm_sqr()))
            .collect::<Result<_>>()?;
        Ok(ReadingGrid { values, ..grid })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn position(&self, k: usize) -> f64 {
        self.lo + self.step() * k as f64
    }

    fn trapezoid(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let last = self.points - 1;
        let interior: f64 = (1..last).map(|k| weight(self.position(k)) * self.values[k]).sum();
        let ends = 0.5 * (weight(self.lo) * self.values[0] + weight(self.hi) * self.values[last]);
        (interior + ends) * self.step()
    }

    /// `∫|Ψ|² df`.
    pub fn total_probability(&self) -> f64 {
        self.trapezoid(|_| 1.0)
    }

    /// `∫f|Ψ|² df / ∫|Ψ|² df`.
    pub fn mean(&self) -> Result<f64> {
        let total = self.total_probability();
        if !(total >= 1e-300) {
            return Err(Error::MeterStatisticsUndefined);
        }
        Ok(self.trapezoid(|f| f) / total)
    }
}

pub fn grid_mean_reading(
    dec: &PathDecomposition,
    observable: &DiagonalObservable,
    meter: &MeterModel,
    spec: GridSpec,
) -> Result<f64> {
    ReadingGrid::sample(dec, observable, meter, spec)?.mean()
}

/// Meter widths, in units of the eigenvalue spread, used by the suite.
pub const WIDTH_RATIOS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl CheckOutcome {
    fn from_deviations(name: &str, tolerance: f64, deviations: &[f64]) -> Self {
        let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
        CheckOutcome {
            name: name.into(),
            passed: !deviations.is_empty()
                && deviations.iter().all(|d| d.is_finite() && *d <= tolerance),
            max_deviation,
            tolerance,
            cases: deviations.len(),
        }
    }
}

/// The built-in scenarios the suite sweeps over.
pub fn builtin_library() -> Vec<Scenario> {
    let mut out = vec![scenarios::hardy()];
    for beta in [0.1, 0.5, 0.9] {
        out.push(scenarios::three_box(beta).expect("beta in range"));
    }
    for eps in [1e-3, 0.5] {
        out.push(scenarios::hardy_epsilon(eps).expect("eps positive"));
    }
    out
}

fn pairs(s: &Scenario) -> impl Iterator<Item = (&str, &KetState, &str, &DiagonalObservable)> {
    s.finals.iter().flat_map(move |(fname, f)| {
        s.observables
            .iter()
            .map(move |(oname, o)| (fname.as_str(), f, oname.as_str(), o))
    })
}

fn collect_deviations(
    library: &[Scenario],
    mut check: impl FnMut(&Scenario, &KetState, &DiagonalObservable) -> Result<Option<f64>>,
) -> Vec<f64> {
    let mut out = Vec::new();
    for s in library {
        for (_, f, _, o) in pairs(s) {
            match check(s, f, o) {
                Ok(Some(d)) => out.push(d),
                Ok(None) => {}
                Err(_) => out.push(f64::INFINITY),
            }
        }
    }
    out
}

/// Runs every cross-check over the built-in library.
pub fn verify_suite() -> Vec<CheckOutcome> {
    let library = builtin_library();
    let mut outcomes = Vec::new();

    let devs = collect_deviations(&library, |s, f, o| {
        let net = build_network(&s.initial, f, o)?;
        let joint = projective_joint(&s.initial, f, o)?;
        Ok(Some(max_deviation(
            net.classes().iter().map(|c| c.probability),
            joint.iter().map(|(_, p)| *p),
        )))
    });
    outcomes.push(CheckOutcome::from_deviations("pathway classes vs spectral projectors", 1e-12, &devs));

    let devs = collect_deviations(&library, |s, _, o| {
        if !o.is_projector() {
            return Ok(None);
        }
        let mut worst: f64 = 0.0;
        let avg = expectation(&s.initial, o)?;
        for finals in [s.summation_basis(), computational_basis(s)] {
            worst = worst.max((summed_over_finals(&s.initial, o, &finals)? - avg).abs());
        }
        Ok(Some(worst))
    });
    outcomes.push(CheckOutcome::from_deviations("sum over final states vs operator average", 1e-12, &devs));

    let devs = collect_deviations(&library, |s, f, o| {
        let net = build_network(&s.initial, f, o)?;
        let Ok(dist) = net.conditional_reading_distribution() else {
            return Ok(None);
        };
        let width = width_ladder(o, &[0.01])[0];
        let dec = net.decomposition();
        Ok(Some((mean_reading(dec, o, &MeterModel::new(width)?)? - dist.mean()).abs()))
    });
    outcomes.push(CheckOutcome::from_deviations("narrow meter vs strong-measurement average", 1e-9, &devs));

    let grid_library = vec![
        scenarios::hardy(),
        scenarios::three_box(0.5).expect("beta in range"),
        scenarios::hardy_epsilon(0.5).expect("eps positive"),
    ];
    let devs = collect_deviations(&grid_library, |s, f, o| {
        let dec = crate::pathsum::decompose(&s.initial, f)?;
        let mut worst: f64 = 0.0;
        for width in width_ladder(o, &WIDTH_RATIOS) {
            let m = MeterModel::new(width)?;
            let Ok(exact) = mean_reading(&dec, o, &m) else {
                return Ok(None);
            };
            let grid = grid_mean_reading(&dec, o, &m, GridSpec::covering(o, &m))?;
            worst = worst.max((grid - exact).abs());
        }
        Ok(Some(worst))
    });
    outcomes.push(CheckOutcome::from_deviations("grid quadrature vs closed-form mean reading", 1e-6, &devs));

    let hardy = scenarios::hardy();
    let dec = hardy.decomposition("f").expect("hardy has f");
    let obs = &hardy.observables["N(1-|1+)"];
    let devs: Vec<f64> = width_ladder(obs, &WIDTH_RATIOS)
        .into_iter()
        .map(|w| {
            let m = MeterModel::new(w).expect("positive width");
            let coarse = grid_mean_reading(&dec, obs, &m, GridSpec::covering(obs, &m));
            let fine = grid_mean_reading(&dec, obs, &m, GridSpec::covering(obs, &m).with_points(2 * DEFAULT_GRID_POINTS));
            match (coarse, fine) {
                (Ok(a), Ok(b)) => (a - b).abs(),
                _ => f64::INFINITY,
            }
        })
        .collect();
    outcomes.push(CheckOutcome::from_deviations("grid refinement (doubling points)", 1e-8, &devs));

    let widths = width_ladder(obs, &[1.0, 10.0, 100.0]);
    let convergence = weak_limit_convergence(&dec, obs, &widths);
    let outcome = match convergence {
        Ok(errs) => CheckOutcome {
            name: "weak-limit convergence to the weak value".into(),
            passed: errs.windows(2).all(|w| w[1] < w[0]) && errs[2] < 1e-3,
            max_deviation: errs[2],
            tolerance: 1e-3,
            cases: errs.len(),
        },
        Err(_) => CheckOutcome::from_deviations("weak-limit convergence to the weak value", 1e-3, &[f64::INFINITY]),
    };
    outcomes.push(outcome);

    outcomes
}

fn computational_basis(s: &Scenario) -> Vec<KetState> {
    (0..s.basis.dim())
        .map(|n| KetState::basis_state(s.basis.clone(), n).expect("index in range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projector_probabilities_hardy() {
        let s = scenarios::hardy();
        let joint = projective_joint(&s.initial, &s.finals["f"], &s.observables["N(1-|1+)"]).unwrap();
        assert_eq!(joint.len(), 2);
        assert_eq!(joint[0].0, 0.0);
        assert!((joint[0].1 - 0.25).abs() < 1e-12);
        assert!((joint[1].1 - 1.0 / 16.0).abs() < 1e-12);

        let id = DiagonalObservable::identity(s.basis.clone());
        let joint = projective_joint(&s.initial, &s.finals["f"], &id).unwrap();
        assert_eq!(joint.len(), 1);
        assert!((joint[0].1 - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn projector_probabilities_three_box() {
        let beta = 0.5;
        let s = scenarios::three_box(beta).unwrap();
        let joint = projective_joint(&s.initial, &s.finals["f"], &s.observables["P3"]).unwrap();
        assert!(joint[0].1.abs() < 1e-12);
        assert!((joint[1].1 - beta * beta).abs() < 1e-12);
    }

    #[test]
    fn grid_hardy_limits() {
        let s = scenarios::hardy();
        let dec = s.decomposition("f").unwrap();
        let a = &s.observables["N(1-|1+)"];
        let wide = MeterModel::new(100.0).unwrap();
        let got = grid_mean_reading(&dec, a, &wide, GridSpec::covering(a, &wide)).unwrap();
        assert!((got + 1.0).abs() < 1e-3);
        let narrow = MeterModel::new(0.01).unwrap();
        let got = grid_mean_reading(&dec, a, &narrow, GridSpec::covering(a, &narrow)).unwrap();
        assert!((got - 0.2).abs() < 1e-3);
    }

    #[test]
    fn grid_single_eigenvalue() {
        let s = scenarios::hardy();
        let dec = s.decomposition("g").unwrap();
        let c = DiagonalObservable::new(s.basis.clone(), vec![-1.5; 5]).unwrap();
        let m = MeterModel::new(0.3).unwrap();
        let got = grid_mean_reading(&dec, &c, &m, GridSpec::covering(&c, &m)).unwrap();
        assert!((got + 1.5).abs() < 1e-9);
    }

    #[test]
    fn grid_spec_validation() {
        let s = scenarios::hardy();
        let dec = s.decomposition("f").unwrap();
        let a = &s.observables["N(1-|1+)"];
        let m = MeterModel::new(1.0).unwrap();
        let spec = GridSpec::covering(a, &m);
        assert!(grid_mean_reading(&dec, a, &m, spec.with_points(100)).is_err());
        assert!(grid_mean_reading(&dec, a, &m, GridSpec { lo: -1.0, ..spec }).is_err());
        assert!(grid_mean_reading(&dec, a, &m, GridSpec { lo: 3.0, hi: 2.0, ..spec }).is_err());
        let wider = GridSpec { lo: spec.lo - 5.0, hi: spec.hi + 5.0, ..spec };
        assert!(grid_mean_reading(&dec, a, &m, wider).is_ok());
    }

    #[test]
    fn grid_undefined_when_no_probability() {
        let s = scenarios::three_box(0.5).unwrap();
        let b = s.basis.clone();
        let i = KetState::basis_state(b.clone(), 0).unwrap();
        let f = KetState::basis_state(b.clone(), 1).unwrap();
        let dec = crate::pathsum::decompose(&i, &f).unwrap();
        let a = &s.observables["P1"];
        let m = MeterModel::new(1.0).unwrap();
        assert_eq!(
            grid_mean_reading(&dec, a, &m, GridSpec::covering(a, &m)),
            Err(Error::MeterStatisticsUndefined)
        );
    }

    #[test]
    fn suite_passes() {
        for outcome in verify_suite() {
            assert!(outcome.passed, "{outcome:?}");
        }
    }
}
