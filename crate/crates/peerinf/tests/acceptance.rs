//! Acceptance gate. Runs every release criterion and prints one PASS/FAIL
//! line each; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use peerinf::document::ResultDocument;
use peerinf_core::explain::shapley_exact;
use peerinf_core::model::{accuracy, Node, RegressionTree};
use peerinf_core::{
    alt, calt, conflict_matrix, explain, fixtures, generate_synthetic, nullify_instance,
    pi_explanation, pi_graph, reduce_dataset, shapley_sampled, split, train_gbdt, Backend, Dataset,
    ExplainerConfig, FeatureSchema, GbdtConfig, GbdtModel, GeneratorConfig, Instance,
    LogisticModel, PiExplanation, Predictor, ZeroPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{p, peerinf, stderr};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: impl Into<String>, bad: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(bad.into())
    }
}

fn within_time(start: Instant, limit: Duration, r: Outcome) -> Outcome {
    let took = start.elapsed();
    let r = r?;
    if took < limit {
        Ok(format!("{} in {:.2?}", r, took))
    } else {
        Err(format!("{} but took {:.2?} (limit {:?})", r, took, limit))
    }
}

fn names(e: &PiExplanation, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| e.feature_names[i].clone()).collect()
}

fn sums_close(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol)
}

fn fixture_alt(e: PiExplanation, want: &[f64]) -> Outcome {
    let start = Instant::now();
    let r = alt(&e, None).map_err(|e| e.to_string())?;
    let sel = names(&e, &r.selected);
    within_time(
        start,
        Duration::from_secs(1),
        check(
            sums_close(&r.row_sums, want, 0.005) && sel == ["M Best"],
            format!("row sums within 0.005, selected {:?}", sel),
            format!("row sums {:?}, selected {:?}", r.row_sums, sel),
        ),
    )
}

fn alt_case1() -> Outcome {
    fixture_alt(fixtures::case1(), &[2.76, 5.20, 1.57, 4.29, -0.41])
}

fn alt_case2() -> Outcome {
    fixture_alt(
        fixtures::case2(),
        &[2.97, -0.48, 0.14, 0.28, 0.63, 1.35, -1.11],
    )
}

fn calt_fixtures() -> Outcome {
    let start = Instant::now();
    let cases = [
        (
            fixtures::case2(),
            ZeroPolicy::Strict,
            vec![-1, -3, -3, -3, -1, 1, -3],
            vec!["Weight", "Height", "Dose Administration", "M Best"],
        ),
        (
            fixtures::case1(),
            ZeroPolicy::Inclusive,
            vec![1, 3, 1, 3, 1],
            vec!["Age", "Height", "M Best"],
        ),
    ];
    for (e, policy, sums, want) in cases {
        let c = conflict_matrix(&e, policy);
        let r = calt(&c, None).map_err(|e| e.to_string())?;
        let mut sel = names(&e, &r.selected);
        let mut want: Vec<String> = want.into_iter().map(String::from).collect();
        sel.sort();
        want.sort();
        if c.row_sums() != sums || sel != want {
            return Err(format!(
                "{:?}: row sums {:?}, selected {:?}",
                policy,
                c.row_sums(),
                sel
            ));
        }
    }
    within_time(
        start,
        Duration::from_secs(1),
        Ok("case 2 strict and case 1 inclusive match".into()),
    )
}

fn partition_fixture() -> Outcome {
    // attributions for the five-feature fixture
    let table = [
        ("M Best", 3.24),
        ("N Best", -0.01),
        ("Weight", -0.65),
        ("Age", 1.71),
        ("Height", 1.88),
    ];
    let names_: Vec<String> = table.iter().map(|(n, _)| n.to_string()).collect();
    let phi: Vec<f64> = table.iter().map(|(_, v)| *v).collect();
    let e = PiExplanation::from_influence_matrix(names_, phi, vec![vec![0.0; 5]; 5])
        .map_err(|e| e.to_string())?;
    let g = pi_graph(&e);
    let (pro, opp) = (names(&e, &g.proponents), names(&e, &g.opponents));
    check(
        pro == ["M Best", "Age", "Height"] && opp == ["N Best", "Weight"],
        format!("proponents {:?}, opponents {:?}", pro, opp),
        format!("proponents {:?}, opponents {:?}", pro, opp),
    )
}

fn trained_gbdt(seed: u64) -> (Dataset, Dataset, GbdtModel) {
    let d = generate_synthetic(&GeneratorConfig::new(2493, seed)).unwrap();
    let (train, test) = split(&d, 0.7, seed).unwrap();
    let (model, _) = train_gbdt(&train, &GbdtConfig::default()).unwrap();
    (train, test, model)
}

fn efficiency() -> Outcome {
    let (train, test, model) = trained_gbdt(7);
    let cfg = ExplainerConfig::default();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let x = test.instance(i).unwrap();
        let a = explain(&model, &train, &x, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(a.efficiency_gap());
    }
    within_time(
        start,
        Duration::from_secs(30),
        check(
            worst <= 1e-9,
            format!("50 instances, max gap {:.2e}", worst),
            format!("max gap {:.2e}", worst),
        ),
    )
}

fn numeric_dataset(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let schema = (0..m)
        .map(|j| FeatureSchema::numerical(format!("f{}", j)))
        .collect();
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    Dataset::new(schema, rows, labels).unwrap()
}

fn random_gbdt(m: usize, allowed: &[usize], rng: &mut ChaCha8Rng) -> GbdtModel {
    fn grow(nodes: &mut Vec<Node>, depth: usize, allowed: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        if depth == 0 || rng.random_bool(0.1) {
            nodes[id] = Node::Leaf {
                value: rng.random_range(-1.0..1.0),
            };
            return id;
        }
        let feature = allowed[rng.random_range(0..allowed.len())];
        let threshold = rng.random_range(-1.5..1.5);
        let left = grow(nodes, depth - 1, allowed, rng);
        let right = grow(nodes, depth - 1, allowed, rng);
        nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
    let trees = (0..25)
        .map(|_| {
            let mut nodes = Vec::new();
            grow(&mut nodes, 3, allowed, rng);
            RegressionTree { nodes }
        })
        .collect();
    GbdtModel::from_parts(m, rng.random_range(-0.5..0.5), 0.3, 3, trees).unwrap()
}

/// Shapley values by averaging marginal contributions over all m!
/// orderings, with every coalition value recomputed from scratch.
fn brute_force(f: &dyn Predictor, bg: &Dataset, x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let value = |members: &[bool]| -> f64 {
        let mut total = 0.0;
        for z in bg.rows() {
            let mixed: Vec<f64> = (0..m)
                .map(|k| if members[k] { x[k] } else { z[k] })
                .collect();
            total += f.score(&mixed);
        }
        total / bg.n_rows() as f64
    };
    fn orderings(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in orderings(m - 1) {
            for pos in 0..=rest.len() {
                let mut o = rest.clone();
                o.insert(pos, m - 1);
                out.push(o);
            }
        }
        out
    }
    let all = orderings(m);
    let mut phi = vec![0.0; m];
    for order in &all {
        let mut members = vec![false; m];
        let mut before = value(&members);
        for &k in order {
            members[k] = true;
            let after = value(&members);
            phi[k] += after - before;
            before = after;
        }
    }
    phi.iter().map(|p| p / all.len() as f64).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for m in 2..=5 {
        for _ in 0..4 {
            let bg = numeric_dataset(25, m, &mut rng);
            let all: Vec<usize> = (0..m).collect();
            let f = random_gbdt(m, &all, &mut rng);
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let exact =
                shapley_exact(&f, &bg, &Instance::new(x.clone()), 15).map_err(|e| e.to_string())?;
            let oracle = brute_force(&f, &bg, &x);
            for (a, b) in exact.phi.iter().zip(&oracle) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("m = 2..5, 16 models, max diff {:.2e}", worst),
        format!("max diff {:.2e}", worst),
    )
}

fn linear_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for m in [2, 4, 7] {
        let bg = numeric_dataset(60, m, &mut rng);
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f = LogisticModel::new(w.clone(), rng.random_range(-1.0..1.0)).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a =
                shapley_exact(&f, &bg, &Instance::new(x.clone()), 15).map_err(|e| e.to_string())?;
            for i in 0..m {
                let col = bg.column(i);
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                worst = worst.max((a.phi[i] - w[i] * (x[i] - mean)).abs());
            }
        }
    }
    let mut off: f64 = 0.0;
    for _ in 0..5 {
        let bg = numeric_dataset(40, 2, &mut rng);
        let f = LogisticModel::new(
            vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
            0.1,
        )
        .unwrap();
        let x = Instance::new(vec![
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ]);
        let e =
            pi_explanation(&f, &ExplainerConfig::default(), &bg, &x).map_err(|e| e.to_string())?;
        off = off.max(e.matrix[0][1].abs()).max(e.matrix[1][0].abs());
    }
    check(
        worst <= 1e-9 && off <= 1e-9,
        format!("max phi error {:.2e}, m=2 off-diagonal {:.2e}", worst, off),
        format!("max phi error {:.2e}, m=2 off-diagonal {:.2e}", worst, off),
    )
}

fn dummy_propagation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut phi_k, mut row_col): (f64, f64) = (0.0, 0.0);
    for k in 0..5 {
        let bg = numeric_dataset(40, 5, &mut rng);
        let allowed: Vec<usize> = (0..5).filter(|&j| j != k).collect();
        let f = random_gbdt(5, &allowed, &mut rng);
        if f.trees.iter().any(|t| t.split_features().any(|s| s == k)) {
            return Err(format!("model splits on feature {}", k));
        }
        for _ in 0..3 {
            let x = Instance::new((0..5).map(|_| rng.random_range(-2.0..2.0)).collect());
            let e = pi_explanation(&f, &ExplainerConfig::default(), &bg, &x)
                .map_err(|e| e.to_string())?;
            phi_k = phi_k.max(e.baseline.phi[k].abs());
            for j in 0..5 {
                row_col = row_col.max(e.matrix[k][j].abs()).max(e.matrix[j][k].abs());
            }
        }
    }
    check(
        phi_k <= 1e-12 && row_col <= 1e-9,
        format!("|phi_k| {:.2e}, row/column k {:.2e}", phi_k, row_col),
        format!("|phi_k| {:.2e}, row/column k {:.2e}", phi_k, row_col),
    )
}

fn nullified_self_attribution() -> Outcome {
    let (train, test, model) = trained_gbdt(11);
    let bg = train.subsample(100, 0);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let x = test.instance(i).unwrap();
        for j in 0..bg.n_features() {
            let rd = reduce_dataset(&bg, j).map_err(|e| e.to_string())?;
            let xj = nullify_instance(&x, j, rd.replacement_value).map_err(|e| e.to_string())?;
            let a = shapley_exact(&model, &rd.materialize(), &xj, 15).map_err(|e| e.to_string())?;
            worst = worst.max(a.phi[j].abs());
        }
    }
    check(
        worst <= 1e-12,
        format!("10 instances x 7 features, max |phi_j| {:.2e}", worst),
        format!("max |phi_j| {:.2e}", worst),
    )
}

fn zero_policy_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for t in 0..100 {
        let m = rng.random_range(2..10);
        let matrix: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            return 0.0;
                        }
                        let v: f64 = rng.random_range(0.001..4.0);
                        if rng.random_bool(0.5) {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let names_ = (0..m).map(|i| format!("f{}", i)).collect();
        let e = PiExplanation::from_influence_matrix(names_, vec![0.0; m], matrix)
            .map_err(|e| e.to_string())?;
        let s = calt(&conflict_matrix(&e, ZeroPolicy::Strict), None).map_err(|e| e.to_string())?;
        let i =
            calt(&conflict_matrix(&e, ZeroPolicy::Inclusive), None).map_err(|e| e.to_string())?;
        if s.selected != i.selected {
            return Err(format!(
                "matrix {}: {:?} vs {:?}",
                t, s.selected, i.selected
            ));
        }
    }
    Ok("100 matrices, identical selected sets".into())
}

fn sampled_convergence() -> Outcome {
    let (train, test, model) = trained_gbdt(3);
    let bg = train.subsample(100, 0);
    let m = bg.n_features();
    let trials = 40;
    let mut within = vec![0usize; m];
    let mut all_within = 0;
    for t in 0..trials {
        let x = test.instance(t).unwrap();
        let exact = shapley_exact(&model, &bg, &x, 15).map_err(|e| e.to_string())?;
        let s =
            shapley_sampled(&model, &bg, &x, 2000, 1000 + t as u64).map_err(|e| e.to_string())?;
        let se = s.standard_errors.clone().ok_or("no standard errors")?;
        let mut ok_all = true;
        for j in 0..m {
            let ok = (s.phi[j] - exact.phi[j]).abs() <= 3.0 * se[j];
            within[j] += usize::from(ok);
            ok_all &= ok;
        }
        all_within += usize::from(ok_all);
    }
    let need = (0.95 * trials as f64).ceil() as usize;
    let worst = *within.iter().min().unwrap();
    check(
        worst >= need,
        format!(
            "each feature within 3 SE in >= {}/{} trials (all seven at once: {}/{})",
            worst, trials, all_within, trials
        ),
        format!("per-feature hits {:?}, need {}", within, need),
    )
}

fn pi_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let [data, schema, model] = common::prepare(dir.path(), 600, 21, &["--rounds", "40"]);
    for backend in ["exact", "sampled"] {
        let mut docs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{}-{}", backend, run));
            let o = peerinf(&[
                "pi",
                "--data",
                &data,
                "--schema",
                &schema,
                "--model",
                &model,
                "--row",
                "7",
                "--backend",
                backend,
                "--permutations",
                "300",
                "--seed",
                "42",
                "--out-dir",
                p(&out),
            ]);
            if !o.status.success() {
                return Err(stderr(&o));
            }
            docs.push(std::fs::read(out.join("pi.json")).map_err(|e| e.to_string())?);
        }
        if docs[0] != docs[1] {
            return Err(format!("{} backend: documents differ", backend));
        }
    }
    Ok("exact and sampled backends, two runs each, identical bytes".into())
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data_dir = dir.path().join("data");
    let model = dir.path().join("model.json");
    let o = peerinf(&["synth", "--n", "2493", "--seed", "7", "--out", p(&data_dir)]);
    if !o.status.success() {
        return Err(stderr(&o));
    }
    let (data, schema) = (data_dir.join("data.csv"), data_dir.join("schema.json"));
    let o = peerinf(&[
        "train",
        "--data",
        p(&data),
        "--schema",
        p(&schema),
        "--model",
        "gbdt",
        "--seed",
        "7",
        "--out",
        p(&model),
    ]);
    if !o.status.success() {
        return Err(stderr(&o));
    }
    let acc: f64 = String::from_utf8_lossy(&o.stdout)
        .lines()
        .find_map(|l| l.strip_prefix("test accuracy: ").map(str::to_string))
        .ok_or("no test accuracy reported")?
        .parse()
        .map_err(|e| format!("{}", e))?;

    // cross-check the reported figure against the saved model
    let bundle =
        peerinf::pipeline::Bundle::load(&data, &schema, &model).map_err(|e| e.to_string())?;
    let (_, test) = split(&bundle.data, 0.7, 7).map_err(|e| e.to_string())?;
    let recomputed = accuracy(&bundle.model.model, &test);
    if (recomputed - acc).abs() > 5e-5 {
        return Err(format!("reported {} but model scores {}", acc, recomputed));
    }

    let start = Instant::now();
    let out = dir.path().join("pi");
    let o = peerinf(&[
        "pi",
        "--data",
        p(&data),
        "--schema",
        p(&schema),
        "--model",
        p(&model),
        "--row",
        "0",
        "--backend",
        "exact",
        "--out-dir",
        p(&out),
    ]);
    let took = start.elapsed();
    if !o.status.success() {
        return Err(stderr(&o));
    }
    let doc = ResultDocument::parse(&std::fs::read_to_string(out.join("pi.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let exact = doc.baseline.backend == Backend::Exact && doc.feature_names.len() == 7;
    check(
        acc >= 0.85 && took < Duration::from_secs(60) && exact,
        format!("test accuracy {:.4}, PI pipeline {:.2?}", acc, took),
        format!(
            "test accuracy {:.4}, PI pipeline {:.2?}, exact {}",
            acc, took, exact
        ),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("ALT fixture, case 1", alt_case1),
        ("ALT fixture, case 2", alt_case2),
        (
            "CALT fixtures (case 2 strict, case 1 inclusive)",
            calt_fixtures,
        ),
        ("proponent/opponent partition fixture", partition_fixture),
        ("Shapley efficiency, exact backend", efficiency),
        ("oracle equivalence, m = 2..5", oracle_equivalence),
        ("linear analytic oracle", linear_oracle),
        ("dummy propagation", dummy_propagation),
        ("nullified self-attribution", nullified_self_attribution),
        ("zero-policy equivalence", zero_policy_equivalence),
        ("sampled-backend convergence", sampled_convergence),
        ("pi command determinism", pi_determinism),
        ("end-to-end smoke", end_to_end),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {}: {}", name, detail),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}: {}", name, detail);
            }
        }
    }
    println!(
        "\n{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
