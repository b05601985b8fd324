use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use memclass::bounds::{
    c_term, count_selector_hypotheses, generalization_bound_rhs, intermediate_bound_rhs, ln_biguint,
    selector_rademacher_bound, BoundParams,
};
use memclass::features::{leaf_features, ColorParams, LabelSimilarity, LeafParams, MatrixSimilarity};
use memclass::harness::{
    evaluate, evaluation_cells, featurize_training, learn_stage, map_labels, train_baseline, train_stage, Cell,
    ColorSource, EvalRow, EvalSetup, ImageSource, InputConfig, MemoryPredictor, ModelPredictor, Predictor,
    SimilarityConfig, TrainingSet,
};
use memclass::learners::{loss_and_gradient, LogisticParams, ModelKind, Samples, TreeParams};
use memclass::memsel::{
    clustering_objective, exhaustive_memories, generate_initial_memories, learn_memories, SearchParams,
};
use memclass::synth::{
    corrupt, generate_synthetic_leaf, ColorDatasetSpec, CorruptionKind, CorruptionSpec, SeverityTable, Split,
};
use memclass::{select_memory, MemorySet, Selection, Similarity};
use rand::seq::index::sample;
use rand::Rng;
use serde::Deserialize;

const CLEAN_PIPELINE_LIMIT: Duration = Duration::from_secs(60);
const NOISE_ACCURACY_FLOOR: f64 = 0.90;
const SEARCH_MIN_MATCHES: usize = 95;
const SEARCH_LIMIT: Duration = Duration::from_secs(10);
const OBJECTIVE_TOL: f64 = 1e-9;
const BOUND_REL_TOL: f64 = 1e-12;
const BOUND_LIMIT: Duration = Duration::from_secs(5);
const SELECTOR_DRAWS: usize = 10_000;
const TRACE_RUNS: u64 = 100;
const LEAF_COUNT: usize = 200;
const LEAF_FEATURE_TOL: f64 = 0.03;
const LEAF_NOISE_TOL: f64 = 0.1;
const LEAF_NOISE_SHARE: f64 = 0.90;
const GRADIENT_CASES: usize = 50;
const GRADIENT_REL_TOL: f64 = 1e-5;
const GRADIENT_STEP: f64 = 1e-6;

type Outcome = Result<(bool, String), String>;

struct ColorFixture {
    train: TrainingSet,
    test: ColorSource,
    labels: Vec<usize>,
    memclass: MemoryPredictor,
    table: SeverityTable,
}

fn color_spec() -> ColorDatasetSpec {
    ColorDatasetSpec::default()
}

fn setup<'a>(train: &'a TrainingSet, table: &'a SeverityTable) -> EvalSetup<'a> {
    EvalSetup {
        featurizer: &train.featurizer,
        severity_table: table,
        seed: 0,
        unknown: train.classes.len(),
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn criterion_1() -> Result<(Outcome, Option<ColorFixture>), String> {
    let start = Instant::now();
    let train_src = ColorSource { spec: color_spec(), split: Split::Train };
    let test = ColorSource { spec: color_spec(), split: Split::Test };
    let table = SeverityTable::default();
    let train = featurize_training(&train_src, &SimilarityConfig::Color(ColorParams::default()), InputConfig::default())
        .map_err(err)?;
    let (memories, _) = learn_stage(&train, &SearchParams::default()).map_err(err)?;
    let q = memories.q();
    let trained = train_stage(&train, memories, &ModelKind::Majority).map_err(err)?;
    let memclass = MemoryPredictor::from_training(trained.classifier, &train.points).map_err(err)?;
    let labels = map_labels(&test.labels(), test.classes(), &train.classes);
    let rows = evaluate(&[&memclass], &test, &labels, &[Cell::Clean], &setup(&train, &table)).map_err(err)?;
    let elapsed = start.elapsed();
    let acc = rows[0].accuracy;
    let pass = q == 3 && acc == 1.0 && rows[0].n == 300 && elapsed < CLEAN_PIPELINE_LIMIT;
    let detail = format!(
        "q={q}, clean accuracy {acc:.4} on {} test images, pipeline {:.1}s (limit {}s)",
        rows[0].n,
        elapsed.as_secs_f64(),
        CLEAN_PIPELINE_LIMIT.as_secs()
    );
    Ok((Ok((pass, detail)), Some(ColorFixture { train, test, labels, memclass, table })))
}

fn criterion_2(fx: &ColorFixture) -> Outcome {
    let base = |name: &str, kind: ModelKind| -> Result<ModelPredictor, String> {
        Ok(ModelPredictor { name: name.into(), model: train_baseline(&fx.train, &kind).map_err(err)? })
    };
    let majority = base("majority", ModelKind::Majority)?;
    let tree = base("tree", ModelKind::Tree(TreeParams::default()))?;
    let logistic = base("logistic", ModelKind::Logistic(LogisticParams::default()))?;
    let predictors: [&dyn Predictor; 4] = [&fx.memclass, &majority, &tree, &logistic];
    let kinds = [CorruptionKind::GaussianNoise, CorruptionKind::ShotNoise, CorruptionKind::ImpulseNoise];
    let cells: Vec<Cell> = evaluation_cells(&kinds, &[1, 2, 3]).into_iter().filter(|c| *c != Cell::Clean).collect();
    let rows = evaluate(&predictors, &fx.test, &fx.labels, &cells, &setup(&fx.train, &fx.table)).map_err(err)?;
    let acc = |cell: &Cell, model: &str| -> f64 {
        rows.iter()
            .find(|r: &&EvalRow| r.corruption == cell.corruption() && r.severity == cell.severity() && r.model == model)
            .map_or(f64::NAN, |r| r.accuracy)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for cell in &cells {
        let m = acc(cell, "memclass");
        let best = ["majority", "tree", "logistic"].iter().map(|b| acc(cell, b)).fold(f64::MIN, f64::max);
        pass &= m >= NOISE_ACCURACY_FLOOR && m > best;
        parts.push(format!(
            "{}/{}: memclass {m:.4} majority {:.4} tree {:.4} logistic {:.4}",
            cell.corruption(),
            cell.severity(),
            acc(cell, "majority"),
            acc(cell, "tree"),
            acc(cell, "logistic")
        ));
    }
    Ok((pass, format!("memclass >= {NOISE_ACCURACY_FLOOR} and above every raw-pixel baseline; {}", parts.join("; "))))
}

fn random_similarity(n: usize, seed: u64) -> MatrixSimilarity<f64> {
    let mut r = memclass::rng::stream(seed, &[3]);
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        s[i * n + i] = 1.0;
        for j in i + 1..n {
            let v: f64 = r.gen();
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    MatrixSimilarity::new(n, s).expect("valid matrix")
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (mut matches, mut exceeded) = (0, 0);
    for seed in 0..100u64 {
        let sim = random_similarity(8, seed);
        let points = sim.points();
        let q = 1 + (seed % 3) as usize;
        let params = SearchParams { zg: 20, zl: 200, b_t: 0.5, seed, memory_count: Some(q) };
        let (found, _) = learn_memories::<f64, _>(&points, &sim, &params).map_err(err)?;
        let best = exhaustive_memories::<f64, _>(&points, &sim, q).map_err(err)?;
        let a: f64 = clustering_objective(found.indices(), &points, &sim).map_err(err)?;
        let b: f64 = clustering_objective(&best, &points, &sim).map_err(err)?;
        if a > b + OBJECTIVE_TOL {
            exceeded += 1;
        }
        if (a - b).abs() <= OBJECTIVE_TOL {
            matches += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = matches >= SEARCH_MIN_MATCHES && exceeded == 0 && elapsed < SEARCH_LIMIT;
    Ok((
        pass,
        format!(
            "{matches}/100 reach the exhaustive optimum (need {SEARCH_MIN_MATCHES}), {exceeded} exceed it, {:.2}s",
            elapsed.as_secs_f64()
        ),
    ))
}

#[derive(Deserialize)]
struct OraclePoint {
    n: usize,
    q: usize,
    delta: f64,
    rho: f64,
    kappa: f64,
    rademacher: Vec<f64>,
    risk: f64,
    n_k_plus: Vec<usize>,
    c_term: String,
    selector_bound: String,
    count: String,
    rhs: String,
    intermediate_rhs: String,
}

#[derive(Deserialize)]
struct Oracle {
    points: Vec<OraclePoint>,
}

fn oracle_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/bound_oracle.json")
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let text = std::fs::read_to_string(oracle_path()).map_err(err)?;
    let oracle: Oracle = serde_json::from_str(&text).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut count_mismatch = 0;
    let rel = |got: f64, want: &str| -> f64 {
        let want: f64 = want.parse().unwrap_or(f64::NAN);
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    };
    for p in &oracle.points {
        let params = BoundParams {
            n: p.n,
            q: p.q,
            delta: p.delta,
            rho: p.rho,
            kappa: p.kappa,
            rademacher_h: p.rademacher.clone(),
            empirical_risk: p.risk,
            n_k_plus: Some(p.n_k_plus.clone()),
        };
        let errs = [
            rel(c_term(p.n, p.q, p.delta, p.rho).map_err(err)?, &p.c_term),
            rel(selector_rademacher_bound::<f64>(p.n, p.q), &p.selector_bound),
            rel(generalization_bound_rhs(&params).map_err(err)?.raw, &p.rhs),
            rel(intermediate_bound_rhs(&params).map_err(err)?.raw, &p.intermediate_rhs),
        ];
        worst = errs.iter().fold(worst, |w, &e| if e.is_nan() { f64::INFINITY } else { w.max(e) });
        if count_selector_hypotheses(p.n, p.q).map_err(err)?.to_string() != p.count {
            count_mismatch += 1;
        }
    }
    let mut violations = 0;
    for n in 1..=200usize {
        for q in 1..=n {
            let ln = ln_biguint(&count_selector_hypotheses(n, q).map_err(err)?);
            if ln > q as f64 * (1.0 + (n as f64).ln()) + 1e-9 {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = !oracle.points.is_empty()
        && worst <= BOUND_REL_TOL
        && count_mismatch == 0
        && violations == 0
        && elapsed < BOUND_LIMIT;
    Ok((
        pass,
        format!(
            "{} oracle points, worst relative error {worst:.2e} (limit {BOUND_REL_TOL:e}), {count_mismatch} count \
             mismatches, {violations} counting-bound violations for n <= 200, {:.2}s",
            oracle.points.len(),
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_5() -> Outcome {
    let mut r = memclass::rng::stream(5, &[]);
    let mut failures = 0;
    for _ in 0..SELECTOR_DRAWS {
        let n = r.gen_range(2..12);
        // coarse levels force ties
        let mut s = vec![0.0; n * n];
        for v in s.iter_mut() {
            *v = r.gen_range(0..5) as f64 * 0.25;
        }
        let sim = MatrixSimilarity::new(n, s).map_err(err)?;
        let points = sim.points();
        let q = r.gen_range(1..=n.min(6));
        let indices = sample(&mut r, n, q).into_vec();
        let thresholds: Vec<f64> = (0..q).map(|_| r.gen_range(0..5) as f64 * 0.25).collect();
        let mem = MemorySet::new(indices.clone(), thresholds.clone()).map_err(err)?;
        let x = r.gen_range(0..n);
        let got = select_memory(&x, &mem, &points, &sim).map_err(err)?;

        let scores: Vec<f64> = indices.iter().map(|&m| sim.score(&m, &x)).collect();
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        let first = scores.iter().position(|&v| v == max).unwrap_or(0);
        let want = if max >= thresholds[first] { Selection::Memory(first) } else { Selection::OutOfBoundary };
        let one_hot = got.one_hot(q);
        let ok = got.selection == want
            && got.score == max
            && one_hot.len() == q + 1
            && one_hot.iter().sum::<f64>() == 1.0
            && one_hot.iter().all(|&v| v == 0.0 || v == 1.0)
            && got.slot(q) <= q;
        if !ok {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!("{failures} of {SELECTOR_DRAWS} random draws disagree with the first-argmax rule or one-hot shape"),
    ))
}

fn criterion_6() -> Outcome {
    let (mut non_monotone, mut uncovered, mut wrong_count) = (0, 0, 0);
    for seed in 0..TRACE_RUNS {
        let mut r = memclass::rng::stream(seed, &[6]);
        let n = r.gen_range(5..30);
        let sim = random_similarity(n, seed + 1000);
        let points = sim.points();
        let b_t = r.gen_range(0.05..1.0);
        let params = SearchParams { zg: 4, zl: 60, b_t, seed, memory_count: None };
        let (_, trace) = learn_memories::<f64, _>(&points, &sim, &params).map_err(err)?;
        for restart in &trace.restarts {
            let mut prev = restart.initial_objective;
            for &v in &restart.accepted_objectives {
                if v <= prev {
                    non_monotone += 1;
                }
                prev = v;
            }
            if restart.final_objective != prev {
                non_monotone += 1;
            }
        }
        let init = generate_initial_memories(&points, &sim, b_t, &mut r).map_err(err)?;
        uncovered += points
            .iter()
            .filter(|x| !init.iter().any(|m| sim.score(&points[*m], x) >= b_t))
            .count();

        let classes = r.gen_range(1..6);
        let labels: Vec<usize> = (0..n.max(classes)).map(|i| if i < classes { i } else { r.gen_range(0..classes) }).collect();
        let init = generate_initial_memories(&labels, &LabelSimilarity, 0.5, &mut r).map_err(err)?;
        let mut seen: Vec<usize> = init.iter().map(|&m| labels[m]).collect();
        seen.sort_unstable();
        let learned = learn_memories::<f64, _>(
            &labels,
            &LabelSimilarity,
            &SearchParams { zg: 2, zl: 30, b_t: 0.5, seed, memory_count: None },
        )
        .map_err(err)?
        .0;
        let mut learned_classes: Vec<usize> = learned.indices().iter().map(|&m| labels[m]).collect();
        learned_classes.sort_unstable();
        let expect: Vec<usize> = (0..classes).collect();
        if seen != expect || learned_classes != expect {
            wrong_count += 1;
        }
    }
    let pass = non_monotone == 0 && uncovered == 0 && wrong_count == 0;
    Ok((
        pass,
        format!(
            "{TRACE_RUNS} runs: {non_monotone} non-increasing accepted steps, {uncovered} uncovered points after \
             initialization, {wrong_count} runs without exactly one memory per class"
        ),
    ))
}

fn criterion_7() -> Outcome {
    let params = LeafParams::default();
    let side = 128;
    let axes = (0.4 * side as f64, 0.28 * side as f64);
    let mut worst: f64 = 0.0;
    let mut stable = [0usize; 3];
    for i in 0..LEAF_COUNT {
        let fb = (i % 11) as f64 * 0.05;
        let fd = ((i / 11) % 11) as f64 * 0.05;
        let seed = i as u64;
        let leaf = generate_synthetic_leaf(side, axes, fb, fd, seed).map_err(err)?;
        let got = leaf_features(&leaf.image, &params).map_err(err)?;
        worst = worst
            .max((got.brown - leaf.truth.brown).abs())
            .max((got.discolored - leaf.truth.discolored).abs());
        for severity in 1..=3u8 {
            let spec = CorruptionSpec { kind: CorruptionKind::GaussianNoise, severity, seed };
            let noisy = leaf_features(&corrupt(&leaf.image, &spec).map_err(err)?, &params).map_err(err)?;
            if (noisy.brown - got.brown).abs() <= LEAF_NOISE_TOL {
                stable[severity as usize - 1] += 1;
            }
        }
    }
    let need = (LEAF_NOISE_SHARE * LEAF_COUNT as f64).ceil() as usize;
    let pass = worst <= LEAF_FEATURE_TOL && stable.iter().all(|&s| s >= need);
    Ok((
        pass,
        format!(
            "{LEAF_COUNT} leaves, worst feature error {worst:.4} (limit {LEAF_FEATURE_TOL}); brown shift <= \
             {LEAF_NOISE_TOL} under gaussian noise on {}/{}/{} of {LEAF_COUNT} at severities 1/2/3 (need {need})",
            stable[0], stable[1], stable[2]
        ),
    ))
}

fn criterion_8() -> Outcome {
    let mut r = memclass::rng::stream(8, &[]);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..GRADIENT_CASES {
        let (n, d, c) = (r.gen_range(2..10), r.gen_range(1..5), r.gen_range(2..5));
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..c)).collect();
        let names: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        let samples = Samples::new(&names, rows.iter().map(|v| v.as_slice()).collect(), labels).map_err(err)?;
        let sw: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
        let w: Vec<f64> = (0..c * (d + 1)).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (_, grad) = loss_and_gradient(&w, c, &samples, &sw);
        for k in 0..w.len() {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[k] += GRADIENT_STEP;
            minus[k] -= GRADIENT_STEP;
            let fd = (loss_and_gradient(&plus, c, &samples, &sw).0 - loss_and_gradient(&minus, c, &samples, &sw).0)
                / (2.0 * GRADIENT_STEP);
            let abs = (grad[k] - fd).abs();
            if abs <= 1e-10 {
                continue;
            }
            let rel = abs / grad[k].abs().max(fd.abs());
            worst = worst.max(rel);
            if rel > GRADIENT_REL_TOL {
                bad += 1;
            }
        }
    }
    Ok((
        bad == 0,
        format!("{GRADIENT_CASES} instances, worst relative error {worst:.2e} (limit {GRADIENT_REL_TOL:e}), {bad} failing weights"),
    ))
}

fn cli_run(cfg: &Path, out: &Path, threads: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_memclass"))
        .args(["--threads", threads, "run", "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env_remove("MEMCLASS_THREADS")
        .output()
        .map_err(err)?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    Ok((
        std::fs::read(out.join("report.csv")).map_err(err)?,
        std::fs::read(out.join("model.json")).map_err(err)?,
    ))
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().map_err(err)?;
    let cfg = serde_json::json!({
        "dataset": {"kind": "color", "side": 100, "patch": 10, "n_train": 30, "n_test": 10, "seed": 1},
        "search": {"zg": 3, "zl": 50, "b_t": 0.5, "seed": 2},
        "model": {"kind": "logistic"},
        "corruptions": ["gaussian_noise", "contrast", "pixelate"],
        "severities": [1, 3],
        "seed": 5
    });
    let path = tmp.path().join("cfg.json");
    std::fs::write(&path, cfg.to_string()).map_err(err)?;
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "1", "8", "8"].iter().enumerate() {
        outputs.push(cli_run(&path, &tmp.path().join(format!("run{i}")), threads)?);
    }
    let same = outputs.iter().all(|o| *o == outputs[0]);
    Ok((
        same,
        format!(
            "4 runs (threads 1, 1, 8, 8): report.csv and model.json {}",
            if same { "byte-identical" } else { "differ" }
        ),
    ))
}

fn criterion_10(fx: &ColorFixture) -> Outcome {
    let kind = ModelKind::Logistic(LogisticParams::default());
    let global = train_baseline(&fx.train, &kind).map_err(err)?;
    let memories = MemorySet::with_threshold(vec![0], 0.0).map_err(err)?;
    let trained = train_stage(&fx.train, memories, &kind).map_err(err)?;
    let single = MemoryPredictor::from_training(trained.classifier, &fx.train.points).map_err(err)?;
    let mut differ = 0;
    for i in 0..fx.test.len() {
        let img = fx.test.image(i).map_err(err)?;
        let (point, input) = fx.train.featurizer.featurize(&img).map_err(err)?;
        if single.predict(&point, &input).map_err(err)? != global.predict(&input).map_err(err)? {
            differ += 1;
        }
    }
    Ok((
        differ == 0,
        format!("single memory with threshold 0 vs global logistic: {differ} of {} test predictions differ", fx.test.len()),
    ))
}

fn main() -> ExitCode {
    let strict = std::env::var("MEMCLASS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut results: Vec<(usize, bool)> = Vec::new();
    let mut record = |n: usize, outcome: Outcome| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        println!("criterion {n}: {} : {detail}", if pass { "PASS" } else { "FAIL" });
        results.push((n, pass));
    };

    let fixture = match criterion_1() {
        Ok((outcome, fx)) => {
            record(1, outcome);
            fx
        }
        Err(e) => {
            record(1, Err(e));
            None
        }
    };
    let missing = || Err("color pipeline unavailable".to_string());
    record(2, fixture.as_ref().map_or_else(missing, criterion_2));
    record(3, criterion_3());
    record(4, criterion_4());
    record(5, criterion_5());
    record(6, criterion_6());
    record(7, criterion_7());
    record(8, criterion_8());
    record(9, criterion_9());
    record(10, fixture.as_ref().map_or_else(missing, criterion_10));

    let red: Vec<String> = results.iter().filter(|(_, p)| !p).map(|(n, _)| n.to_string()).collect();
    println!(
        "acceptance: {}/{} criteria pass{}",
        results.len() - red.len(),
        results.len(),
        if red.is_empty() { String::new() } else { format!(" (failing: {})", red.join(", ")) }
    );
    if strict && !red.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
