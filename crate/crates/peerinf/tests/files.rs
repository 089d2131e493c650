mod common;

use std::fs;

use peerinf::error::AppError;
use peerinf::io::{
    format_csv, load_csv, load_schema, parse_csv, save_schema, write_csv, SchemaFile,
};
use peerinf::store::{load_model, parse_model, save_model, ModelFile};
use peerinf_core::model::Node;
use peerinf_core::{
    generate_synthetic, train_logistic, Dataset, Error, FeatureSchema, GeneratorConfig,
    LogisticConfig, Model, Predictor,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{synthetic_bundle, LABEL};

#[test]
fn synthetic_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = generate_synthetic(&GeneratorConfig::new(500, 3)).unwrap();
    let schema = SchemaFile::new(LABEL, d.schema().to_vec());
    let (csv_path, schema_path) = (dir.path().join("d.csv"), dir.path().join("s.json"));
    write_csv(&csv_path, &d, LABEL).unwrap();
    save_schema(&schema_path, &schema).unwrap();
    let schema2 = load_schema(&schema_path).unwrap();
    assert_eq!(schema2, schema);
    let back = load_csv(&csv_path, &schema2.features, &schema2.label).unwrap();
    assert_eq!(back, d);
    assert_eq!(
        format_csv(&back, LABEL),
        fs::read_to_string(&csv_path).unwrap()
    );
}

fn random_dataset(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = vec![
        FeatureSchema::numerical("a"),
        FeatureSchema::categorical("b", ["x", "y", "z"]),
        FeatureSchema::numerical("c"),
    ];
    let rows = (0..n)
        .map(|_| {
            vec![
                rng.random_range(-1e6..1e6) * 10f64.powi(rng.random_range(-12..4)),
                rng.random_range(0..3) as f64,
                f64::from_bits(rng.random::<u64>() >> 2) * if rng.random() { 1.0 } else { -1.0 },
            ]
        })
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..2)).collect();
    Dataset::new(schema, rows, labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn csv_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..40) {
        let d = random_dataset(seed, n);
        let text = format_csv(&d, "y");
        let back = parse_csv(text.as_bytes(), d.schema(), "y").unwrap();
        for (r1, r2) in d.rows().zip(back.rows()) {
            for (a, b) in r1.iter().zip(r2) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        prop_assert_eq!(back.labels(), d.labels());
    }
}

#[test]
fn missing_file_names_path() {
    let e = load_csv(
        std::path::Path::new("/nonexistent/data.csv"),
        &[FeatureSchema::numerical("a"), FeatureSchema::numerical("b")],
        "y",
    )
    .unwrap_err();
    assert!(e.to_string().contains("/nonexistent/data.csv"));
    assert_eq!(e.exit_code(), peerinf::EXIT_INPUT);
}

#[test]
fn gbdt_model_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (_, d, file) = synthetic_bundle(400, 5);
    let path = dir.path().join("m.json");
    save_model(&path, &file).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, file);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let x: Vec<f64> = (0..d.n_features())
            .map(|j| {
                let col = d.column(j);
                col[rng.random_range(0..col.len())] + rng.random_range(-1.0..1.0)
            })
            .collect();
        assert_eq!(
            file.model.score(&x).to_bits(),
            back.model.score(&x).to_bits()
        );
    }
}

#[test]
fn logistic_model_round_trip_is_bit_exact() {
    let (_, d, _) = synthetic_bundle(300, 6);
    let m = train_logistic(&d, &LogisticConfig::default()).unwrap();
    let file = ModelFile::new(m.into(), d.feature_names(), None);
    let back = parse_model("m.json".as_ref(), &file.to_json()).unwrap();
    for row in d.rows() {
        assert_eq!(
            file.model.score(row).to_bits(),
            back.model.score(row).to_bits()
        );
    }
    assert_eq!(back.to_json(), file.to_json());
}

#[test]
fn truncated_and_foreign_files_are_malformed() {
    let (_, _, file) = synthetic_bundle(200, 7);
    let text = file.to_json();
    let cut = &text[..text.len() / 2];
    assert!(matches!(
        parse_model("m.json".as_ref(), cut),
        Err(AppError::Malformed { .. })
    ));
    assert!(matches!(
        parse_model("m.json".as_ref(), r#"{"format": "other", "version": 1}"#),
        Err(AppError::Malformed { .. })
    ));
    let mut broken = file.clone();
    let Model::Gbdt(g) = &mut broken.model else {
        unreachable!()
    };
    let node = g
        .trees
        .iter_mut()
        .flat_map(|t| t.nodes.iter_mut())
        .find(|n| matches!(n, Node::Split { .. }))
        .unwrap();
    if let Node::Split { feature, .. } = node {
        *feature = 99;
    }
    assert!(matches!(
        parse_model("m.json".as_ref(), &broken.to_json()),
        Err(AppError::Malformed { .. })
    ));
}

#[test]
fn future_version_names_both_versions() {
    let (_, _, file) = synthetic_bundle(200, 8);
    let text = file
        .to_json()
        .replacen("\"version\": 1", "\"version\": 7", 1);
    let e = parse_model("m.json".as_ref(), &text).unwrap_err();
    assert!(matches!(
        e,
        AppError::Version {
            found: 7,
            expected: 1,
            ..
        }
    ));
    let msg = e.to_string();
    assert!(msg.contains('7') && msg.contains('1'), "{}", msg);
}

#[test]
fn model_feature_names_must_match_arity() {
    let (_, _, mut file) = synthetic_bundle(200, 9);
    file.feature_names.pop();
    assert!(matches!(
        parse_model("m.json".as_ref(), &file.to_json()),
        Err(AppError::Malformed { .. })
    ));
}

#[test]
fn schema_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(
        &path,
        r#"{"label": "y", "features": [{"name": "a", "kind": "numerical"}]}"#,
    )
    .unwrap();
    assert!(matches!(
        load_schema(&path),
        Err(AppError::InFile {
            source: Error::Schema(_),
            ..
        })
    ));
    fs::write(
        &path,
        r#"{"label": "y", "features": [{"name": "a", "kind": "text"}]}"#,
    )
    .unwrap();
    assert!(matches!(
        load_schema(&path),
        Err(AppError::Malformed { .. })
    ));
}
