use copekit::certifier::{global_enmf_decision, AbsenceReason, EnmfDecision};
use copekit::cope::Violation;
use copekit::factorizer::{fiducial_tomography_test, quasi_from_gpt, quasi_from_gpt_with_transform};
use copekit::scalar::parse_rational;
use copekit::theories::{
    boxworld, boxworld_quasi_transform, cardinal_directions, discrete_qubit, extended_boxworld,
    extended_boxworld_quotient, generic_directions, reference_models, spekkens,
};
use copekit::*;

fn q(rows: &[&[&str]]) -> RatMatrix {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|s| parse_rational(s).unwrap()).collect()).collect())
}

fn fragment_a1() -> RatMatrix {
    q(&[
        &["1", "0", "1/2", "1/2"],
        &["0", "1", "1/2", "1/2"],
        &["1/2", "1/2", "1", "0"],
        &["1/2", "1/2", "0", "1"],
    ])
}

#[test]
fn ranks_of_built_in_theories() {
    assert_eq!(spekkens().rank(), 4);
    assert_eq!(boxworld().rank(), 3);
    assert_eq!(extended_boxworld().rank(), 4);
}

#[test]
fn built_ins_are_valid_and_labelled() {
    for c in [spekkens(), boxworld(), extended_boxworld()] {
        assert!(c.validate().is_empty());
        assert!(c.preparations().iter().all(|p| p.starts_with('P')));
    }
    assert_eq!(extended_boxworld().block_sizes(), vec![3, 3]);
}

#[test]
fn column_sum_violation_is_located() {
    let bad = CopeMatrix::from_parts(
        ScalarMatrix::from_rational(&q(&[&["1", "1"], &["1", "0"]])),
        vec![Measurement::new("M", 2)],
        vec!["a".into(), "b".into()],
        Backend::Exact,
    )
    .unwrap();
    assert!(bad.validate().iter().any(|v| matches!(v, Violation::ColumnSum { block: 0, col: 0, .. })));
}

#[test]
fn reference_models_classify_as_published() {
    for theory in ["spekkens", "boxworld", "extended-boxworld"] {
        let c = theories::by_name(theory).unwrap();
        for r in reference_models(theory).unwrap() {
            let rep = classify_model(&c, &r.model).unwrap();
            assert!(rep.is(r.model.kind), "{theory}: {} is not {}", r.label, r.model.kind);
        }
    }
}

#[test]
fn spekkens_noncontextual_model_reconstructs_exactly() {
    let c = spekkens();
    let m = reference_models("spekkens")
        .unwrap()
        .into_iter()
        .find(|r| r.model.kind == ModelKind::NoncontextualOntological)
        .unwrap()
        .model;
    assert!(m.backend.is_exact());
    assert_eq!(&m.reconstruct(), c.data());
    let rep = classify_model(&c, &m).unwrap();
    assert_eq!((rep.rank_effects, rep.rank_states), (4, 4));
}

#[test]
fn boxworld_reference_models_are_not_noncontextual() {
    let c = boxworld();
    for r in reference_models("boxworld").unwrap() {
        assert!(!classify_model(&c, &r.model).unwrap().is(ModelKind::NoncontextualOntological), "{}", r.label);
    }
}

#[test]
fn extended_boxworld_quasi_has_unit_ones() {
    let c = extended_boxworld();
    let quasi = reference_models("extended_boxworld")
        .unwrap()
        .into_iter()
        .find(|r| r.model.kind == ModelKind::Quasiprobabilistic)
        .unwrap()
        .model;
    let rep = classify_model(&c, &quasi).unwrap();
    assert!(rep.unit_is_ones && rep.is(ModelKind::Quasiprobabilistic));
    assert_eq!(quasi.inner_dim(), 4);
}

#[test]
fn extended_boxworld_contextual_model_is_not_equirank() {
    let c = extended_boxworld();
    let models = reference_models("extended_boxworld").unwrap();
    let w = models.iter().find(|r| r.label.starts_with("contextual")).unwrap();
    let rep = classify_model(&c, &w.model).unwrap();
    assert!(rep.is(ModelKind::Ontological));
    assert!(!rep.equirank_ok);
    assert_eq!(rep.rank_states, 5);
}

#[test]
fn boxworld_quasi_model_from_the_gpt() {
    let c = boxworld();
    let g = reference_models("boxworld").unwrap().into_iter().find(|r| r.model.kind == ModelKind::Gpt).unwrap().model;
    let t = ScalarMatrix::from_rational(&boxworld_quasi_transform());
    let quasi = quasi_from_gpt_with_transform(&g, &t).unwrap();
    let rep = classify_model(&c, &quasi).unwrap();
    assert!(rep.is(ModelKind::Quasiprobabilistic));
    let published =
        reference_models("boxworld").unwrap().into_iter().find(|r| r.model.kind == ModelKind::Quasiprobabilistic).unwrap();
    assert_eq!(quasi.effects, published.model.effects);
    assert_eq!(quasi.states, published.model.states);
}

#[test]
fn spekkens_quasi_from_tomographic_columns() {
    let c = spekkens();
    let g = gpt(&c);
    let quasi = quasi_from_gpt(&g, &[0, 2, 4, 5]).unwrap();
    let rep = classify_model(&c, &quasi).unwrap();
    assert!(rep.is(ModelKind::Quasiprobabilistic));
    let published = reference_models("spekkens")
        .unwrap()
        .into_iter()
        .find(|r| r.model.kind == ModelKind::Quasiprobabilistic)
        .unwrap()
        .model;
    assert_eq!(quasi.effects, published.effects);
    assert_eq!(quasi.states, published.states);
}

#[test]
fn fiducial_tomography_flags() {
    // Boxworld and Spekkens have more preparations and outcomes than their rank.
    assert_eq!(fiducial_tomography_test(&spekkens()), (true, true));
    assert_eq!(fiducial_tomography_test(&boxworld()), (true, true));
    assert_eq!(fiducial_tomography_test(&CopeMatrix::identity(3)), (false, false));
}

#[test]
fn extended_boxworld_quotient_matches_published() {
    let rep = extended_boxworld().quotient_extremal();
    assert_eq!(rep.quotiented.to_rational().unwrap(), extended_boxworld_quotient());
    assert_eq!(rep.kept_columns, vec![0, 1, 2, 3, 4]);
    assert!(rep.dropped_columns.is_empty());
    assert_eq!(rep.column_classes[4], vec![4, 5]);
    // Repeated outcomes in distinct measurements stay.
    assert_eq!(rep.quotiented.num_rows(), 6);
}

#[test]
fn spekkens_fragment_restriction() {
    let a1 = restrict_fragment(&FragmentRestriction {
        parent: spekkens(),
        kept_preparations: vec![0, 1, 2, 3],
        kept_measurements: vec![0, 1],
    })
    .unwrap();
    assert_eq!(a1.to_rational().unwrap(), fragment_a1());
    assert_eq!(a1.rank(), 3);
    assert!(exhaustive_enmf_decision(&a1, 3).unwrap().not_exists());
}

#[test]
fn fragment_admits_a_larger_equirank_model() {
    // At inner dimension 4 the square's corners give an equirank model.
    let a1 = spekkens().restrict(&[0, 1, 2, 3], &[0, 1]).unwrap();
    match exhaustive_enmf_decision(&a1, 4).unwrap() {
        EnmfDecision::Exists(m) => {
            let rep = classify_model(&a1, &m).unwrap();
            assert!(rep.is(ModelKind::NoncontextualOntological));
            assert_eq!(m.inner_dim(), 4);
        }
        other => panic!("expected a model, got {other:?}"),
    }
}

#[test]
fn qubit_restricted_to_cardinal_axes_is_spekkens() {
    let mut dirs = cardinal_directions();
    dirs.extend(generic_directions(2));
    let qubit = discrete_qubit(&dirs, true).unwrap().restrict(&[0, 1, 2, 3, 4, 5], &[0, 1, 2]).unwrap();
    let reference = spekkens().data().to_f64();
    let got = qubit.data().to_f64();
    assert_eq!(got.shape(), reference.shape());
    assert!(got.max_abs_diff(&reference) <= 1e-9);
}

#[test]
fn boxworld_and_fragment_decisions() {
    let bw = boxworld();
    for k in 1..=5 {
        assert!(exhaustive_enmf_decision(&bw, k).unwrap().not_exists(), "k = {k}");
    }
    match global_enmf_decision(&bw).unwrap() {
        EnmfDecision::NotExists(log) => assert_eq!(log.reason, Some(AbsenceReason::NoEquirankModel)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn polytope_vertices_of_built_ins() {
    let bw = span_simplex_polytope(&boxworld()).unwrap();
    assert_eq!(bw.num_vertices(), 4);
    let merged = boxworld().merge_measurements().to_rational().unwrap();
    for v in &bw.vertices {
        assert!((0..merged.cols()).any(|j| &merged.col(j) == v));
    }
    assert_eq!(span_simplex_polytope(&extended_boxworld()).unwrap().num_vertices(), 5);
    // Spekkens: the columns are face centres of a cube, none of them a vertex.
    let sp = span_simplex_polytope(&spekkens()).unwrap();
    assert_eq!(sp.num_vertices(), 8);
    let merged = spekkens().merge_measurements().to_rational().unwrap();
    for j in 0..merged.cols() {
        assert!(!sp.vertices.contains(&merged.col(j)));
        assert!(sp.hull_contains(&merged.col(j)));
    }
}

#[test]
fn vertex_forcing_examples() {
    assert_eq!(vertex_forcing_certificate(&boxworld()).map(|(_, f)| f), Some(4));
    assert_eq!(vertex_forcing_certificate(&extended_boxworld()).map(|(_, f)| f), Some(5));
    assert!(vertex_forcing_certificate(&spekkens()).is_none());
}

#[test]
fn qubit_witness_sits_on_antipodal_pairs() {
    let c = discrete_qubit(&generic_directions(5), true).unwrap();
    assert_eq!(c.rank(), 4);
    let w = sperner_submatrix(&c).unwrap();
    assert_eq!(w.m, 10);
    assert!(w.is_valid_for(&c));
    for (&i, &j) in w.row_indices.iter().zip(&w.col_indices) {
        assert!(c.entry(i, j).to_f64().abs() <= 1e-9);
    }
}

#[test]
fn certify_examples() {
    let opts = NmfOptions::default();
    let sp = certify(&spekkens(), &opts);
    assert_eq!(sp.verdict, Verdict::Noncontextual);
    match &sp.evidence {
        Evidence::EnmfModel(m) => assert_eq!(m.inner_dim(), 4),
        other => panic!("{other:?}"),
    }
    let bw = certify(&boxworld(), &opts);
    assert_eq!((bw.verdict, bw.evidence.kind()), (Verdict::Contextual, "VertexForcing"));
    let q = certify(&discrete_qubit(&generic_directions(5), true).unwrap(), &opts);
    assert_eq!((q.verdict, q.evidence.kind()), (Verdict::Contextual, "SpernerSeparation"));
    for cert in [sp, bw, q] {
        cert.check().unwrap();
    }
}

#[test]
fn identity_and_its_restrictions_are_noncontextual() {
    let id = CopeMatrix::identity(3);
    let opts = NmfOptions::default();
    for preps in [vec![0], vec![0, 1], vec![1, 2], vec![0, 1, 2]] {
        let c = id.restrict(&preps, &[0]).unwrap();
        // Dropping preparations breaks column sums only if a row loses all its weight; it never does here.
        let cert = certify(&c, &opts);
        assert_eq!(cert.verdict, Verdict::Noncontextual, "{preps:?}");
    }
}

#[test]
fn single_preparation_single_measurement_is_noncontextual() {
    let c = spekkens().restrict(&[2], &[1]).unwrap();
    assert_eq!(certify(&c, &NmfOptions::default()).verdict, Verdict::Noncontextual);
}
