use proptest::prelude::*;

use randprod::engine::StopCriteria;
use randprod::Exponent;
use randprod_cli::config::{Coord, FalsifyOptions, NamedSchedule, Params, ScheduleSpec, X0Spec};
use randprod_cli::{parse_config, CliError, Mode, RunConfig};

fn err(text: &str) -> String {
    match parse_config(text) {
        Err(CliError::Config(m)) => m,
        Err(e) => e.to_string(),
        Ok(c) => panic!("accepted {text}: {c:?}"),
    }
}

#[test]
fn schema_examples() {
    let c = parse_config(
        r#"{"scenario":"example1","schedule":{"scripted":[1]},"x0":[0,1],"mode":"run"}"#,
    )
    .unwrap();
    assert_eq!(c.mode, Mode::Run);
    assert_eq!(
        c.schedule,
        ScheduleSpec::Scripted {
            scripted: vec![1],
            fallback: None
        }
    );
    assert_eq!(c.stop, StopCriteria::default());
    assert_eq!(c.stop.max_iters, 100_000);
    assert_eq!(c.stop.snapshot_stride, 100);
    let c = parse_config(r#"{"scenario":"example1","mode":"certificate"}"#).unwrap();
    assert_eq!(c.mode, Mode::Certificate);
    assert!(err(r#"{"scenario":"nope","mode":"run"}"#).contains("unknown scenario"));
}

#[test]
fn unknown_keys_are_all_listed() {
    let m = err(r#"{"scenario":"example1","colour":1,"stop":{"maxiter":3},"params":{"q":1}}"#);
    for k in ["colour", "stop.maxiter", "params.q"] {
        assert!(m.contains(k), "{m}");
    }
}

#[test]
fn seeds_are_required_where_randomness_is_used() {
    for text in [
        r#"{"scenario":"example1","schedule":"seeded_uniform"}"#,
        r#"{"scenario":"example1","schedule":{"markov":[[0.5,0.5],[0.5,0.5]]}}"#,
        r#"{"scenario":"example1","schedule":{"scripted":[1],"fallback":"seeded_uniform"}}"#,
        r#"{"scenario":"von_neumann_2proj"}"#,
        r#"{"scenario":"example1","x0":"random"}"#,
        r#"{"scenario":"example1","mode":"falsify"}"#,
    ] {
        assert!(err(text).contains("seed is required"), "{text}");
    }
    parse_config(r#"{"scenario":"example1","x0":"random(4)"}"#).unwrap();
    parse_config(r#"{"scenario":"example1","schedule":"seeded_uniform","seed":2}"#).unwrap();
}

#[test]
fn invalid_values() {
    assert!(
        err(r#"{"scenario":"diagonal_contractions","seed":1,"params":{"p":0.5}}"#)
            .contains("exponent")
    );
    assert!(err(r#"{"scenario":"example1","x0":[1,2,3]}"#).contains("dimension"));
    assert!(err(r#"{"scenario":"example1","schedule":{"scripted":[3]}}"#).contains("3"));
    assert!(err(r#"{"scenario":"example1","schedule":{"scripted":[0]}}"#).contains("1-based"));
    assert!(!err(r#"{"scenario":"example1","schedule":{"markov":[[1.0]]},"seed":1}"#).is_empty());
    assert!(!err(r#"{"scenario":"example1","stop":{"max_iters":0}}"#).is_empty());
    assert!(err(r#"{"scenario":"example1","x0":"rand"}"#).contains("random"));
    assert!(err(r#"{"mode":"run"}"#).contains("needs a scenario"));
    assert!(err(r#"{"scenario":"rotation_counterexample","exact":true}"#).contains("exact"));
    assert!(!err(r#"{"scenario":"example1","params":{"dim":3}}"#).is_empty());
    assert!(!err("[1, 2]").is_empty());
    parse_config(r#"{"mode":"catalog"}"#).unwrap();
}

#[test]
fn scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"name":"s","p":1,"operators":[[["1","0"],["0","1/2"]]]}"#,
    )
    .unwrap();
    let text = format!(
        r#"{{"scenario":{:?},"x0":["1","1/3"],"exact":true}}"#,
        path.display().to_string()
    );
    let c = parse_config(&text).unwrap();
    let r = c.resolve().unwrap();
    assert_eq!(r.scenario.name, "s");
    assert_eq!(r.exact_x0.unwrap().coords()[1].to_string(), "1/3");
    let text = format!(
        r#"{{"scenario":{:?},"x0":[1]}}"#,
        path.display().to_string()
    );
    assert!(err(&text).contains("dimension"));
}

fn schedule() -> impl Strategy<Value = ScheduleSpec> {
    let leaf = prop_oneof![
        Just(ScheduleSpec::Named(NamedSchedule::RoundRobin)),
        Just(ScheduleSpec::Named(NamedSchedule::SeededUniform)),
        Just(ScheduleSpec::Markov {
            markov: vec![vec![0.25, 0.75], vec![1.0, 0.0]]
        }),
        prop::collection::vec(1usize..=2, 1..6).prop_map(|s| ScheduleSpec::Scripted {
            scripted: s,
            fallback: None
        }),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| {
        (prop::collection::vec(1usize..=2, 1..6), inner).prop_map(|(s, f)| ScheduleSpec::Scripted {
            scripted: s,
            fallback: Some(Box::new(f)),
        })
    })
}

fn x0() -> impl Strategy<Value = Option<X0Spec>> {
    let coord = prop_oneof![
        (-1e6f64..1e6).prop_map(Coord::Number),
        (-50i32..50, 1u32..20).prop_map(|(a, b)| Coord::Text(format!("{a}/{b}"))),
    ];
    prop_oneof![
        Just(None),
        prop::collection::vec(coord, 2).prop_map(|v| Some(X0Spec::Literal(v))),
        Just(Some(X0Spec::Text("random".into()))),
        (0u64..1000).prop_map(|s| Some(X0Spec::Text(format!("random({s})")))),
    ]
}

fn stop() -> impl Strategy<Value = StopCriteria> {
    (
        1usize..200_000,
        1e-14f64..1e-2,
        1usize..500,
        1e-15f64..1e-6,
        1usize..1000,
    )
        .prop_map(
            |(max_iters, cauchy_tol, cauchy_window, stagnation_tol, snapshot_stride)| {
                StopCriteria {
                    max_iters,
                    cauchy_tol,
                    cauchy_window,
                    stagnation_tol,
                    snapshot_stride,
                }
            },
        )
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        prop_oneof![
            Just(Mode::Run),
            Just(Mode::Check),
            Just(Mode::Falsify),
            Just(Mode::Certificate)
        ],
        schedule(),
        x0(),
        stop(),
        prop::option::of("[a-z]{1,8}"),
        (any::<bool>(), 1usize..6, 1usize..500, 1e-12f64..1e-4),
    )
        .prop_map(
            |(mode, schedule, x0, stop, out, (exact, len, budget, tol))| RunConfig {
                mode,
                scenario: Some("example1".into()),
                params: Params::default(),
                schedule,
                exact: exact && !matches!(x0, Some(X0Spec::Text(_))),
                x0,
                stop,
                output: out.map(Into::into),
                seed: Some(42),
                falsify: FalsifyOptions {
                    max_word_len: len,
                    budget,
                },
                tol,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn round_trip(c in config()) {
        let text = c.to_json();
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, c);
    }

    #[test]
    fn round_trip_with_params(dim in 3usize..12, p in prop_oneof![Just(Exponent::Infinity), (1.0f64..9.0).prop_map(Exponent::Finite)]) {
        let c = parse_config(&format!(
            r#"{{"scenario":"diagonal_contractions","seed":5,"params":{{"dim":{dim},"p":{}}}}}"#,
            serde_json::to_string(&p).unwrap()
        )).unwrap();
        prop_assert_eq!(parse_config(&c.to_json()).unwrap(), c);
    }
}
