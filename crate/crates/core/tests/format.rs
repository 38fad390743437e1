mod common;

use common::*;
use recsynth::bench::{parse_benchmark, print_benchmark, BenchError};

#[test]
fn every_shipped_benchmark_round_trips() {
    let names = bench_names();
    assert!(names.len() >= 12, "{names:?}");
    for name in names {
        let b = load(&name);
        let printed = print_benchmark(&b);
        let again = parse_benchmark(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(print_benchmark(&again), printed, "{name}");
        assert_eq!(again.instance.functions, b.instance.functions, "{name}");
        assert_eq!(again.instance.properties, b.instance.properties, "{name}");
        assert_eq!(again.instance.tests, b.instance.tests, "{name}");
        assert_eq!(again.instance.grammar, b.instance.grammar, "{name}");
        assert_eq!(again.instance.size_bound, b.instance.size_bound, "{name}");
        assert_eq!(again.meta, b.meta, "{name}");
    }
}

#[test]
fn insert_benchmark_shape() {
    let b = load("insert");
    let inst = &b.instance;
    assert_eq!(inst.name, "insert");
    assert_eq!(inst.functions.len(), 1);
    assert_eq!(inst.functions[0].sketch.bodies.len(), 1);
    let holes: Vec<String> = inst.all_holes().iter().map(|(_, n)| n.to_string()).collect();
    assert_eq!(holes, ["h1", "h2", "h3", "h4", "h5"]);
    assert_eq!(inst.grammar.nts.len(), 3);
    assert_eq!(inst.grammar.rules.len(), 7);
    assert_eq!(inst.properties.len(), 2);
    assert!(inst.tests.is_empty());
    assert_eq!(inst.size_bound, 3);
    assert!(b.meta.expect_solvable);
}

#[test]
fn malformed_files_are_rejected_with_a_position() {
    assert!(matches!(parse_benchmark(""), Err(BenchError::Syntax { .. })));
    assert!(matches!(parse_benchmark("(grammar"), Err(BenchError::Read(_))));

    let missing_witness = r#"
        (grammar (L :int-list xs (tail L)))
        (synth-fun f ((xs :int-list)) :int-list :sketch (?h) :holes ((?h L)))
        (property (forall ((xs :int-list)) (exists ((w :int-list)) (= w (f xs)))))"#;
    let e = parse_benchmark(missing_witness).unwrap_err();
    assert!(e.to_string().contains("sketch"), "{e}");

    let undeclared = r#"
        (grammar (L :int-list xs))
        (synth-fun f ((xs :int-list)) :int-list :sketch (?g) :holes ((?h L)))"#;
    let e = parse_benchmark(undeclared).unwrap_err();
    assert!(e.to_string().contains("?g"), "{e}");

    let ill_typed = r#"
        (grammar (L :int-list xs))
        (synth-fun f ((xs :int-list)) :int-list :sketch (?h) :holes ((?h L)))
        (property (forall ((xs :int-list)) (+ 1 (f xs))))"#;
    assert!(matches!(parse_benchmark(ill_typed), Err(BenchError::Invalid(_))));
}
