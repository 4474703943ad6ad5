//! Payload builders. Each number comes straight from one library call.

use feynpath::measurement::{build_network, product_rule_report, sum_rule_report, PathwayClass, Selection};
use feynpath::meter::{is_weak_regime, mean_reading, weak_limit_convergence, weak_value, width_ladder, MeterModel};
use feynpath::oracle::{grid_mean_reading, verify_suite, CheckOutcome, GridSpec};
use feynpath::pathsum::{amplitude_table, transition_probability};
use feynpath::scenario_io::Query;
use feynpath::scenarios::{self, epsilon_grid, scan_epsilon, Scenario};
use feynpath::Result;

use crate::emit::{Cell, Payload};

/// `{2}` or `{1+3+4+5}`: members as 1-based path numbers.
pub fn path_tag(members: &[usize]) -> String {
    let parts: Vec<String> = members.iter().map(|m| (m + 1).to_string()).collect();
    format!("{{{}}}", parts.join("+"))
}

fn class_summary(classes: &[PathwayClass]) -> String {
    let parts: Vec<String> = classes
        .iter()
        .map(|c| {
            format!(
                "{}={} (F={})",
                path_tag(&c.members),
                crate::emit::fmt_real(c.probability),
                crate::emit::fmt_real(c.eigenvalue)
            )
        })
        .collect();
    parts.join("; ")
}

pub fn amplitudes(s: &Scenario) -> Result<Payload> {
    let table = amplitude_table(&s.initial, s.finals.iter().map(|(k, v)| (k.as_str(), v)))?;
    let mut columns = vec!["path", "state"];
    columns.extend(table.final_names.iter().map(String::as_str));
    let mut p = Payload::new(format!("{}: virtual path amplitudes", s.name), &columns);
    for (k, (name, row)) in table.path_names.iter().zip(&table.entries).enumerate() {
        let mut cells: Vec<Cell> = vec![path_tag(&[k]).into(), name.as_str().into()];
        cells.extend(row.iter().map(|&z| Cell::from(z)));
        p.push(cells);
    }
    Ok(p)
}

pub fn probabilities(s: &Scenario) -> Result<Payload> {
    let mut p = Payload::new(format!("{}: transition probabilities", s.name), &["final", "probability"]);
    for (name, f) in &s.finals {
        p.push(vec![name.as_str().into(), transition_probability(&s.initial, f)?.into()]);
    }
    Ok(p)
}

/// Perturbed transition probabilities for every observable and final, with
/// the pathway split of the first final.
pub fn probability_grid(s: &Scenario) -> Result<Payload> {
    let finals: Vec<&str> = s.finals.keys().map(String::as_str).collect();
    let lead = finals[0];
    let annotation = format!("{lead}_pathways");
    let mut columns = vec!["measured"];
    columns.extend(&finals);
    columns.push(&annotation);
    let mut p = Payload::new(format!("{}: transition probabilities under measurement", s.name), &columns);

    let mut plain: Vec<Cell> = vec!["none".into()];
    for f in &finals {
        plain.push(transition_probability(&s.initial, s.final_state(f)?)?.into());
    }
    plain.push("interfering".into());
    p.push(plain);

    for (obs_name, obs) in &s.observables {
        let mut row: Vec<Cell> = vec![obs_name.as_str().into()];
        let mut lead_classes = Vec::new();
        for f in &finals {
            let net = build_network(&s.initial, s.final_state(f)?, obs)?;
            row.push(net.perturbed_transition_probability().into());
            if *f == lead {
                lead_classes = net.classes().to_vec();
            }
        }
        row.push(class_summary(&lead_classes).into());
        p.push(row);
    }
    Ok(p)
}

pub fn network(s: &Scenario, final_name: &str, observable: &str) -> Result<Payload> {
    let net = build_network(&s.initial, s.final_state(final_name)?, s.observable(observable)?)?;
    let conditional = net.conditional_reading_distribution()?;
    let mut p = Payload::new(
        format!("{}: pathways for final {final_name} under {observable}", s.name),
        &["eigenvalue", "paths", "class_amplitude", "probability", "conditional"],
    );
    for c in net.classes() {
        p.push(vec![
            c.eigenvalue.into(),
            path_tag(&c.members).into(),
            c.class_amplitude.into(),
            c.probability.into(),
            conditional.probability_of(c.eigenvalue).into(),
        ]);
    }
    Ok(p)
}

pub fn weak(s: &Scenario, final_name: &str, observable: &str) -> Result<Payload> {
    let w = weak_value(&s.decomposition(final_name)?, s.observable(observable)?)?;
    let mut p = Payload::new(
        format!("{}: weak value", s.name),
        &["scenario", "final", "observable", "complex_value", "reported"],
    );
    p.push(vec![
        s.name.as_str().into(),
        final_name.into(),
        observable.into(),
        w.complex_value.into(),
        w.reported.into(),
    ]);
    Ok(p)
}

pub fn mean_readings(s: &Scenario, final_name: &str, observable: &str, widths: &[f64]) -> Result<Payload> {
    let dec = s.decomposition(final_name)?;
    let obs = s.observable(observable)?;
    let mut p = Payload::new(
        format!("{}: mean meter reading for final {final_name}, {observable}", s.name),
        &["width", "mean_reading", "weak_regime"],
    );
    for &w in widths {
        let m = mean_reading(&dec, obs, &MeterModel::new(w)?)?;
        p.push(vec![w.into(), m.into(), is_weak_regime(obs, w).into()]);
    }
    Ok(p)
}

/// Mean readings for widths `ratio·δf`, with the grid oracle alongside and
/// the distance to the weak value.
pub fn sweep_width(s: &Scenario, final_name: &str, observable: &str, ratios: &[f64]) -> Result<Payload> {
    let dec = s.decomposition(final_name)?;
    let obs = s.observable(observable)?;
    let widths = width_ladder(obs, ratios);
    let deviations = weak_limit_convergence(&dec, obs, &widths)?;
    let mut p = Payload::new(
        format!("{}: width sweep for final {final_name}, {observable}", s.name),
        &["ratio", "width", "mean_reading", "grid_mean", "weak_deviation", "weak_regime"],
    );
    for ((&ratio, &w), &dev) in ratios.iter().zip(&widths).zip(&deviations) {
        let meter = MeterModel::new(w)?;
        let grid = GridSpec::covering(obs, &meter);
        p.push(vec![
            ratio.into(),
            w.into(),
            mean_reading(&dec, obs, &meter)?.into(),
            grid_mean_reading(&dec, obs, &meter, grid)?.into(),
            dev.into(),
            is_weak_regime(obs, w).into(),
        ]);
    }
    Ok(p)
}

pub fn sum_rule(s: &Scenario, final_name: &str, a: &str, b: &str) -> Result<Payload> {
    let r = sum_rule_report(
        &s.initial,
        s.final_state(final_name)?,
        s.observable(a)?,
        s.observable(b)?,
        &s.summation_basis(),
    )?;
    let mut p = Payload::new(
        format!("{}: sum rule P({a}+{b}) = P({a}) + P({b})", s.name),
        &["selection", "combined", "first", "second", "holds"],
    );
    for (label, t) in [(format!("final {final_name}"), r.post_selected), ("all outcomes".into(), r.all_outcomes)] {
        p.push(vec![label.into(), t.combined.into(), t.first.into(), t.second.into(), t.holds.into()]);
    }
    Ok(p)
}

pub fn product_rule(s: &Scenario, final_name: Option<&str>, a: &str, b: &str) -> Result<Payload> {
    let selection = match final_name {
        Some(f) => Selection::Final(s.final_state(f)?),
        None => Selection::AllOutcomes,
    };
    let r = product_rule_report(&s.initial, selection, s.observable(a)?, s.observable(b)?)?;
    let mut p = Payload::new(
        format!("{}: product rule for {a} and {b}", s.name),
        &["selection", "prob_a", "prob_b", "prob_ab", "cert_a", "cert_b", "cert_ab", "holds"],
    );
    let label = final_name.map_or("all outcomes".to_string(), |f| format!("final {f}"));
    p.push(vec![
        label.into(),
        r.prob_a.into(),
        r.prob_b.into(),
        r.prob_ab.into(),
        r.cert_a.into(),
        r.cert_b.into(),
        r.cert_ab.into(),
        r.holds.into(),
    ]);
    Ok(p)
}

pub fn scan(observable: &str, from: f64, to: f64, steps: usize) -> Result<Payload> {
    let points = scan_epsilon(observable, &epsilon_grid(from, to, steps)?)?;
    let mut p = Payload::new(format!("hardy-epsilon: weak value of {observable}"), &["eps", "complex_value", "reported"]);
    for pt in points {
        p.push(vec![pt.eps.into(), pt.weak.complex_value.into(), pt.weak.reported.into()]);
    }
    Ok(p)
}

pub fn verify() -> (Payload, Vec<CheckOutcome>) {
    let outcomes = verify_suite();
    let mut p = Payload::new("oracle verification", &["check", "passed", "max_deviation", "tolerance", "cases"]);
    for o in &outcomes {
        p.push(vec![
            o.name.as_str().into(),
            o.passed.into(),
            o.max_deviation.into(),
            o.tolerance.into(),
            o.cases.into(),
        ]);
    }
    (p, outcomes)
}

pub fn query(s: &Scenario, q: &Query) -> Result<Payload> {
    match q {
        Query::Amplitudes => amplitudes(s),
        Query::Probabilities => probabilities(s),
        Query::Network { final_name, observable } => network(s, final_name, observable),
        Query::Weak { final_name, observable } => weak(s, final_name, observable),
        Query::MeanReading { final_name, observable, widths } => mean_readings(s, final_name, observable, widths),
        Query::SumRule { final_name, a, b } => sum_rule(s, final_name, a, b),
        Query::ProductRule { final_name, a, b } => product_rule(s, final_name.as_deref(), a, b),
        Query::Scan { observable, from, to, steps } => scan(observable, *from, *to, *steps),
    }
}

pub fn hardy_table1() -> Result<Payload> {
    amplitudes(&scenarios::hardy())
}

/// The detector finals and γ, measured by each of the eight occupation
/// observables.
pub fn hardy_table2() -> Result<Payload> {
    probability_grid(&scenarios::hardy())
}
