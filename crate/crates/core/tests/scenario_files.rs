use std::path::PathBuf;

use feynpath::measurement::build_network;
use feynpath::pathsum::amplitude_table;
use feynpath::scenario_io::{load, parse, serialize, validate, Query, QueryDirective, QueryKind, ScenarioDocument};
use feynpath::scenarios::{self, HARDY_BASIS};
use feynpath::{Complex64, Error};
use indexmap::IndexMap;
use proptest::prelude::*;

fn shipped(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn bits(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

#[test]
fn hardy_file_matches_builtin_bit_for_bit() {
    let (file, _) = load(&shipped("hardy.scn")).unwrap();
    let builtin = scenarios::hardy();
    assert_eq!(file.basis.names(), HARDY_BASIS);
    assert_eq!(file.finals.keys().collect::<Vec<_>>(), builtin.finals.keys().collect::<Vec<_>>());
    assert_eq!(file.observables, builtin.observables);

    let table = |s: &scenarios::Scenario| amplitude_table(&s.initial, s.finals.iter().map(|(k, v)| (k.as_str(), v))).unwrap();
    let (a, b) = (table(&file), table(&builtin));
    for (ra, rb) in a.entries.iter().zip(&b.entries) {
        assert_eq!(ra.iter().map(|z| bits(*z)).collect::<Vec<_>>(), rb.iter().map(|z| bits(*z)).collect::<Vec<_>>());
    }
    for obs in ["N(1-|1+)", "N(1-|2+)", "N(2-|1+)"] {
        let probs = |s: &scenarios::Scenario| -> Vec<(u64, u64)> {
            build_network(&s.initial, &s.finals["f"], &s.observables[obs])
                .unwrap()
                .classes()
                .iter()
                .map(|c| (c.eigenvalue.to_bits(), c.probability.to_bits()))
                .collect()
        };
        assert_eq!(probs(&file), probs(&builtin), "{obs}");
    }
}

#[test]
fn three_box_file_matches_builtin_at_one_third() {
    // β = 1/3 makes the built-in final (1,1,1)/√3 as written in the file.
    let (file, queries) = load(&shipped("three-box.scn")).unwrap();
    let builtin = scenarios::three_box(1.0 / 3.0).unwrap();
    for (name, f) in &file.finals {
        let d_file = file.decomposition(name).unwrap();
        let d_builtin = builtin.decomposition(name).unwrap();
        for (x, y) in d_file.amplitudes().iter().zip(d_builtin.amplitudes()) {
            assert!((x - y).norm() < 1e-15, "{f}");
        }
    }
    assert_eq!(queries.len(), 6);
}

#[test]
fn every_shipped_file_loads() {
    for name in ["hardy.scn", "three-box.scn", "epsilon.scn", "minimal.scn"] {
        let text = shipped(name);
        let (_, queries) = load(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!queries.is_empty(), "{name}");
        let doc = parse(&text).unwrap();
        assert_eq!(parse(&serialize(&doc)).unwrap(), doc, "{name}");
    }
}

#[test]
fn epsilon_file_selects_scans() {
    let (s, q) = load(&shipped("epsilon.scn")).unwrap();
    assert_eq!(s.name, "hardy-epsilon");
    assert!(q.contains(&Query::Scan { observable: "N(1+)".into(), from: 1e-6, to: 1.0, steps: 7 }));
}

#[test]
fn validate_errors_carry_lines() {
    let text = shipped("hardy.scn").replace("query weak final=f obs=N(2-)", "query weak final=f obs=N(3-)");
    let line = text.lines().position(|l| l.contains("N(3-)")).unwrap() + 1;
    match validate(&parse(&text).unwrap()) {
        Err(Error::Parse(e)) => {
            assert_eq!(e.line, line);
            assert!(e.message.contains("N(3-)"), "{}", e.message);
        }
        other => panic!("{other:?}"),
    }
}

fn arb_name() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9_()|,+-]{0,6}"
}

fn arb_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(-0.0),
        -10.0..10.0f64,
        (-1e300..1e300f64),
        (1e-300..1e-200f64),
        Just(0.5),
        Just(-1.0 / 3.0),
    ]
}

fn arb_document() -> impl Strategy<Value = ScenarioDocument> {
    (1usize..=6)
        .prop_flat_map(|n| {
            let amps = move || {
                prop::collection::vec((arb_finite(), arb_finite()), n)
                    .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>())
                    .prop_filter("nonzero", |v| v.iter().any(|z| z.norm_sqr() != 0.0))
            };
            (
                Just(n),
                prop::option::of(arb_name().prop_filter("not reserved", |s| !scenarios::RESERVED_NAMES.contains(&s.as_str()))),
                prop::collection::hash_set(arb_name().prop_filter("not a keyword", |s| {
                    !["scenario", "dimension", "basis", "state", "observable", "query"].contains(&s.as_str())
                }), n),
                amps(),
                prop::collection::vec((arb_name(), amps()), 0..3),
                prop::collection::vec((arb_name(), prop::collection::vec(arb_finite(), n)), 0..3),
            )
        })
        .prop_map(|(n, name, labels, initial, finals, observables)| {
            let mut doc = ScenarioDocument {
                name,
                dimension: n,
                basis_names: labels.into_iter().collect(),
                initial,
                ..ScenarioDocument::default()
            };
            doc.finals = finals.into_iter().filter(|(k, _)| k != "initial").collect::<IndexMap<_, _>>();
            doc.observables = observables.into_iter().collect();
            doc.queries.push(QueryDirective { kind: QueryKind::Probabilities, args: IndexMap::new(), line: 0 });
            doc
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialize_then_parse_is_identity(doc in arb_document()) {
        let text = serialize(&doc);
        let again = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(again, doc);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        if let Err(e) = parse(&text) {
            prop_assert!(e.line >= 1 && e.column >= 1);
        }
    }

    #[test]
    fn line_noise_never_panics(lines in prop::collection::vec(
        prop_oneof![
            Just("dimension 3".to_string()),
            Just("basis a b c".to_string()),
            Just("state initial".to_string()),
            Just("state f".to_string()),
            Just("observable A".to_string()),
            Just("query weak final=f obs=A".to_string()),
            Just("scenario hardy-epsilon eps=0.5".to_string()),
            "[abc] = [-+0-9./ie()sqrt,]{0,12}",
            "[a-z =.0-9#]{0,20}",
        ],
        0..20,
    )) {
        let text = lines.join("\n");
        if let Ok(doc) = parse(&text) {
            let _ = validate(&doc);
        }
    }

    #[test]
    fn truncated_shipped_files_never_panic(cut in 0usize..2000) {
        let text = shipped("hardy.scn");
        let cut = text.char_indices().map(|(k, _)| k).nth(cut).unwrap_or(text.len());
        if let Ok(doc) = parse(&text[..cut]) {
            let _ = validate(&doc);
        }
    }
}
