#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use peerinf::io::SchemaFile;
use peerinf::store::{ModelFile, SplitSpec};
use peerinf_core::{generate_synthetic, split, train_gbdt, Dataset, GbdtConfig, GeneratorConfig};

pub const LABEL: &str = "survived";

/// Synthetic data with a small GBDT fit on its 70% training split.
pub fn synthetic_bundle(n: usize, seed: u64) -> (SchemaFile, Dataset, ModelFile) {
    let d = generate_synthetic(&GeneratorConfig::new(n, seed)).unwrap();
    let spec = SplitSpec {
        train_fraction: 0.7,
        seed,
    };
    let (train, _) = split(&d, spec.train_fraction, spec.seed).unwrap();
    let cfg = GbdtConfig {
        rounds: 20,
        ..GbdtConfig::default()
    };
    let (model, _) = train_gbdt(&train, &cfg).unwrap();
    let file = ModelFile::new(model.into(), d.feature_names(), Some(spec));
    (SchemaFile::new(LABEL, d.schema().to_vec()), d, file)
}

pub fn peerinf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peerinf"))
        .args(args)
        .env("PEERINF_LOG", "error")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Runs `synth` and `train` into `dir`; returns (data, schema, model) paths.
pub fn prepare(dir: &Path, n: usize, seed: u64, extra_train: &[&str]) -> [String; 3] {
    let data_dir = dir.join("data");
    let seed = seed.to_string();
    let o = peerinf(&[
        "synth",
        "--n",
        &n.to_string(),
        "--seed",
        &seed,
        "--out",
        p(&data_dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = data_dir.join("data.csv");
    let schema = data_dir.join("schema.json");
    let model = dir.join("model.json");
    let mut args = vec![
        "train",
        "--data",
        p(&data),
        "--schema",
        p(&schema),
        "--seed",
        &seed,
        "--out",
        p(&model),
    ];
    args.extend_from_slice(extra_train);
    let o = peerinf(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    [
        p(&data).to_string(),
        p(&schema).to_string(),
        p(&model).to_string(),
    ]
}
