mod common;

use copekit::io::*;
use copekit::theories::{boxworld, discrete_qubit, generic_directions, reference_models, spekkens};
use copekit::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn without_timing(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_round_trip(seed in any::<u64>()) {
        let c = common::random_cope(&mut ChaCha8Rng::seed_from_u64(seed), 6, 6, &[1, 2, 3, 4, 7]);
        let text = emit_cope(&c);
        prop_assert_eq!(parse_cope(text.as_bytes()).unwrap(), c.clone());
        let float = c.with_backend(Backend::Float { eps: 1e-7 });
        prop_assert_eq!(parse_cope(emit_cope(&float).as_bytes()).unwrap(), float);
    }

    #[test]
    fn gpt_model_round_trip(seed in any::<u64>()) {
        let c = common::random_cope(&mut ChaCha8Rng::seed_from_u64(seed), 6, 6, &[1, 2, 4]);
        let g = gpt(&c);
        prop_assert_eq!(parse_model(emit_model(&g).as_bytes()).unwrap(), g);
    }
}

#[test]
fn reference_models_round_trip() {
    for theory in ["spekkens", "boxworld", "extended_boxworld"] {
        for r in reference_models(theory).unwrap() {
            let back = parse_model(emit_model(&r.model).as_bytes()).unwrap();
            assert_eq!(back, r.model, "{theory}: {}", r.label);
        }
    }
}

#[test]
fn certificates_round_trip() {
    let opts = NmfOptions::default();
    let fragment = spekkens().restrict(&[0, 1, 2], &[0]).unwrap();
    let inputs = [
        spekkens(),
        boxworld(),
        discrete_qubit(&generic_directions(5), true).unwrap(),
        fragment,
        boxworld().with_backend(Backend::float()),
    ];
    let mut kinds = Vec::new();
    for c in inputs {
        let cert = certify(&c, &opts);
        let text = emit_certificate(&cert);
        let back = parse_certificate(text.as_bytes()).unwrap();
        assert_eq!(back, cert);
        kinds.push(cert.evidence.kind());
    }
    assert_eq!(kinds, vec!["EnmfModel", "VertexForcing", "SpernerSeparation", "EnmfModel", "None"]);
}

#[test]
fn exhaustive_absence_round_trip() {
    // certify stops at vertex forcing for boxworld, so build the exhaustive evidence directly.
    let c = boxworld();
    let EnmfDecision::NotExists(log) = certifier::global_enmf_decision(&c).unwrap() else { panic!() };
    let cert = Certificate {
        verdict: Verdict::Contextual,
        evidence: Evidence::ExhaustiveAbsence(log),
        rank: 3,
        searched_k_range: None,
        matrix: c,
        notes: vec![],
        wall_time_ms: 0,
    };
    let back = parse_certificate(emit_certificate(&cert).as_bytes()).unwrap();
    assert_eq!(back, cert);
}

#[test]
fn boxworld_certificate_document() {
    let text = emit_certificate(&certify(&boxworld(), &NmfOptions::default()));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["verdict"], "Contextual");
    assert_eq!(v["evidence_kind"], "VertexForcing");
    assert_eq!(v["evidence"]["forced_rank"], 4);
    assert_eq!(v["matrix"]["blocks"][0][0][0], "1");
}

#[test]
fn output_is_deterministic() {
    let opts = NmfOptions { seed: 3, ..NmfOptions::default() };
    for c in [spekkens(), boxworld()] {
        let a = emit_certificate(&certify(&c, &opts));
        let b = emit_certificate(&certify(&c, &NmfOptions { threads: Some(1), ..opts.clone() }));
        assert_eq!(without_timing(&a), without_timing(&b));
    }
    assert_eq!(emit_cope(&spekkens()), emit_cope(&spekkens()));
}

#[test]
fn rational_strings_parse_exactly() {
    let text = r#"{"document":"cope","format_version":"1","backend":"rational",
        "preparations":["a"],"measurements":[{"name":"M","outcomes":["x","y","z"]}],
        "blocks":[[["1/3"],["1/3"],["1/3"]]]}"#;
    let c = parse_cope(text.as_bytes()).unwrap();
    assert_eq!(c.to_rational().unwrap()[(0, 0)], scalar::rat(1, 3));
}

#[test]
fn parse_errors_name_the_field() {
    let cases = [
        (r#"{"document":"cope","format_version":"1","backend":"rational","preparations":["a"],"measurements":[{"name":"M","outcomes":["x","y"]}],"blocks":[[["1"],["zero"]]]}"#, "blocks[0][1][0]"),
        (r#"{"document":"cope","format_version":"1","backend":"rational","preparations":["a","b"],"measurements":[{"name":"M","outcomes":["x","y"]}],"blocks":[[["1","0"],["0"]]]}"#, "blocks[0][1]"),
        (r#"{"document":"cope","format_version":"1","backend":"rational","preparations":["a"],"measurements":[{"name":"M","outcomes":["x","y"]}]}"#, "blocks"),
        (r#"{"document":"model","format_version":"1"}"#, "document"),
        (r#"{"document":"cope","format_version":"9"}"#, "format_version"),
    ];
    for (text, field) in cases {
        let err = parse_cope(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains(&format!("`{field}`")), "{err}");
    }
    assert!(matches!(parse_cope(b"{not json"), Err(CopeError::Json(_))));
}

#[test]
fn certificates_that_do_not_verify_are_rejected() {
    let cert = certify(&boxworld(), &NmfOptions::default());
    let mut v: Value = serde_json::from_str(&emit_certificate(&cert)).unwrap();
    v["evidence"]["forced_rank"] = 2.into();
    assert!(parse_certificate(v.to_string().as_bytes()).is_err());

    let cert = certify(&spekkens(), &NmfOptions::default());
    let mut v: Value = serde_json::from_str(&emit_certificate(&cert)).unwrap();
    v["evidence"]["model"]["states"][0][0] = "1".into();
    assert!(parse_certificate(v.to_string().as_bytes()).is_err());
}
