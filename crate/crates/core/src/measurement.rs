//! Accurate intermediate measurements.
//!
//! Measuring a diagonal observable splits the virtual paths into exclusive
//! classes, one per distinct eigenvalue. Paths inside a class still interfere
//! (their amplitudes add), different classes do not (their probabilities add).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pathsum::{decompose, orthogonal, PathDecomposition};
use crate::statespace::{expectation, DiagonalObservable, KetState};
use crate::CERTAINTY_TOL;

/// One real pathway: all paths sharing an eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct PathwayClass {
    pub eigenvalue: f64,
    pub members: Vec<usize>,
    pub class_amplitude: Complex64,
    pub probability: f64,
}

impl PathwayClass {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathwayNetwork {
    decomposition: PathDecomposition,
    observable: DiagonalObservable,
    classes: Vec<PathwayClass>,
}

impl PathwayNetwork {
    pub fn from_decomposition(
        decomposition: PathDecomposition,
        observable: &DiagonalObservable,
    ) -> Result<Self> {
        if observable.basis() != decomposition.initial().basis() {
            return Err(Error::DimensionMismatch {
                expected: decomposition.dim(),
                found: observable.dim(),
            });
        }
        let classes = observable
            .distinct_eigenvalues()
            .into_iter()
            .map(|eigenvalue| {
                let members: Vec<usize> = (0..observable.dim())
                    .filter(|&n| observable.eigenvalue(n) == eigenvalue)
                    .collect();
                let class_amplitude: Complex64 =
                    members.iter().map(|&n| decomposition.amplitude(n)).sum();
                PathwayClass {
                    eigenvalue,
                    members,
                    class_amplitude,
                    probability: class_amplitude.norm_sqr(),
                }
            })
            .collect();
        Ok(PathwayNetwork {
            decomposition,
            observable: observable.clone(),
            classes,
        })
    }

    pub fn decomposition(&self) -> &PathDecomposition {
        &self.decomposition
    }

    pub fn observable(&self) -> &DiagonalObservable {
        &self.observable
    }

    /// Classes in ascending eigenvalue order.
    pub fn classes(&self) -> &[PathwayClass] {
        &self.classes
    }

    pub fn class(&self, eigenvalue: f64) -> Option<&PathwayClass> {
        self.classes.iter().find(|c| c.eigenvalue == eigenvalue)
    }

    /// Joint probability of reading `eigenvalue` and then passing the
    /// post-selection; zero if the observable has no such eigenvalue.
    pub fn probability_of(&self, eigenvalue: f64) -> f64 {
        self.class(eigenvalue).map_or(0.0, |c| c.probability)
    }

    pub fn perturbed_transition_probability(&self) -> f64 {
        self.classes.iter().map(|c| c.probability).sum()
    }

    pub fn conditional_reading_distribution(&self) -> Result<ReadingDistribution> {
        let total = self.perturbed_transition_probability();
        let scale: f64 = self.decomposition.amplitudes().iter().map(|a| a.norm()).sum();
        if !(total > 1e-24 * scale * scale) {
            return Err(Error::PostSelectionImpossible);
        }
        Ok(ReadingDistribution {
            entries: self
                .classes
                .iter()
                .map(|c| (c.eigenvalue, c.probability / total))
                .collect(),
        })
    }
}

pub fn build_network(
    initial: &KetState,
    final_state: &KetState,
    observable: &DiagonalObservable,
) -> Result<PathwayNetwork> {
    PathwayNetwork::from_decomposition(decompose(initial, final_state)?, observable)
}

pub fn perturbed_transition_probability(net: &PathwayNetwork) -> f64 {
    net.perturbed_transition_probability()
}

pub fn conditional_reading_distribution(net: &PathwayNetwork) -> Result<ReadingDistribution> {
    net.conditional_reading_distribution()
}

/// Post-selected reading statistics: eigenvalue → conditional probability,
/// ascending in eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingDistribution {
    pub entries: Vec<(f64, f64)>,
}

impl ReadingDistribution {
    pub fn probability_of(&self, eigenvalue: f64) -> f64 {
        self.entries
            .iter()
            .find(|(e, _)| *e == eigenvalue)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Average eigenvalue, i.e. the strong-measurement mean reading.
    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|(e, p)| e * p).sum()
    }

    pub fn is_certain(&self, eigenvalue: f64) -> bool {
        self.probability_of(eigenvalue) >= 1.0 - CERTAINTY_TOL
    }
}

/// Checks that `finals` is an orthonormal basis of the whole space.
pub fn require_complete(finals: &[KetState]) -> Result<()> {
    let Some(first) = finals.first() else {
        return Err(Error::IncompleteFinals("no final states".into()));
    };
    let n = first.dim();
    if finals.len() != n {
        return Err(Error::IncompleteFinals(format!(
            "{} states for a {n}-dimensional space",
            finals.len()
        )));
    }
    for (k, a) in finals.iter().enumerate() {
        if !a.is_normalized() {
            return Err(Error::IncompleteFinals(format!("state {k} is not normalized")));
        }
        for (m, b) in finals[k + 1..].iter().enumerate() {
            if !orthogonal(a, b)? {
                return Err(Error::NonOrthogonalFinals(k.to_string(), (k + 1 + m).to_string()));
            }
        }
    }
    Ok(())
}

/// `Σ_z P^{z←i}` of the eigenvalue-1 pathway over a complete final set.
pub fn summed_over_finals(
    initial: &KetState,
    projector: &DiagonalObservable,
    finals: &[KetState],
) -> Result<f64> {
    projector.require_projector()?;
    require_complete(finals)?;
    finals.iter().try_fold(0.0, |acc, z| {
        Ok(acc + build_network(initial, z, projector)?.probability_of(1.0))
    })
}

/// Probability that a projector measurement reads 1 regardless of the final
/// detection, `⟨i|A|i⟩`. The path-sum route over `finals` is evaluated as
/// well and the two must agree.
pub fn all_outcomes_probability(
    initial: &KetState,
    projector: &DiagonalObservable,
    finals: &[KetState],
) -> Result<f64> {
    let average = expectation(initial, projector)?;
    let summed = summed_over_finals(initial, projector, finals)?;
    let deviation = (average - summed).abs();
    if deviation > CERTAINTY_TOL * initial.norm_sqr().max(1.0) {
        return Err(Error::IdentityViolated {
            what: "operator average vs sum over final states".into(),
            deviation,
        });
    }
    Ok(average)
}

/// Probabilities of reading 1 for `A + B`, `A` and `B`, and whether the
/// first equals the sum of the other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleTriple {
    pub combined: f64,
    pub first: f64,
    pub second: f64,
    pub holds: bool,
}

impl RuleTriple {
    fn new(combined: f64, first: f64, second: f64) -> Self {
        RuleTriple {
            combined,
            first,
            second,
            holds: (combined - (first + second)).abs() <= CERTAINTY_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRuleReport {
    pub post_selected: RuleTriple,
    pub all_outcomes: RuleTriple,
}

pub fn sum_rule_report(
    initial: &KetState,
    final_state: &KetState,
    a: &DiagonalObservable,
    b: &DiagonalObservable,
    complete_finals: &[KetState],
) -> Result<SumRuleReport> {
    let sum = a.checked_add(b)?;
    for op in [a, b, &sum] {
        op.require_projector()?;
    }
    let selected = |op: &DiagonalObservable| -> Result<f64> {
        Ok(build_network(initial, final_state, op)?.probability_of(1.0))
    };
    let unselected =
        |op: &DiagonalObservable| all_outcomes_probability(initial, op, complete_finals);
    Ok(SumRuleReport {
        post_selected: RuleTriple::new(selected(&sum)?, selected(a)?, selected(b)?),
        all_outcomes: RuleTriple::new(unselected(&sum)?, unselected(a)?, unselected(b)?),
    })
}

/// What the reading statistics are conditioned on.
#[derive(Debug, Clone, Copy)]
pub enum Selection<'a> {
    /// Post-selected on one detected final state.
    Final(&'a KetState),
    /// Summed over every final outcome (or detectors switched off).
    AllOutcomes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductRuleReport {
    pub prob_a: f64,
    pub prob_b: f64,
    pub prob_ab: f64,
    pub cert_a: bool,
    pub cert_b: bool,
    pub cert_ab: bool,
    /// `cert(A) ∧ cert(B) ⇒ cert(AB)`.
    pub holds: bool,
}

/// Product rule for two commuting projectors: if both read 1 with certainty,
/// so must their product.
pub fn product_rule_report(
    initial: &KetState,
    selection: Selection<'_>,
    a: &DiagonalObservable,
    b: &DiagonalObservable,
) -> Result<ProductRuleReport> {
    let ab = a.checked_mul(b)?;
    for op in [a, b, &ab] {
        op.require_projector()?;
    }
    let reads_one = |op: &DiagonalObservable| -> Result<f64> {
        match selection {
            Selection::Final(f) => Ok(build_network(initial, f, op)?
                .conditional_reading_distribution()?
                .probability_of(1.0)),
            Selection::AllOutcomes => Ok(expectation(initial, op)? / initial.norm_sqr()),
        }
    };
    let (prob_a, prob_b, prob_ab) = (reads_one(a)?, reads_one(b)?, reads_one(&ab)?);
    let certain = |p: f64| p >= 1.0 - CERTAINTY_TOL;
    let (cert_a, cert_b, cert_ab) = (certain(prob_a), certain(prob_b), certain(prob_ab));
    Ok(ProductRuleReport {
        prob_a,
        prob_b,
        prob_ab,
        cert_a,
        cert_b,
        cert_ab,
        holds: !(cert_a && cert_b) || cert_ab,
    })
}

/// `max |a − b|` over matching entries, for cross-checks.
pub(crate) fn max_deviation(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
