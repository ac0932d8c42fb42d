mod common;

use axum::{extract::State, routing::post, Json, Router};
use common::data::small_dataset;
use spatial_bench::bench::{build_instance, Modality, PuzzleInstance};
use spatial_bench::eval::report::{paired_deltas, quantile};
use spatial_bench::eval::*;
use spatial_bench::tasks::{Answer, TaskKind, TaskRegistry, Tier};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

fn context(instances: &[PuzzleInstance]) -> GatewayContext {
    GatewayContext {
        registry: Arc::new(TaskRegistry::default()),
        instances: Arc::new(instances.iter().map(|i| (i.id.clone(), i.clone())).collect()),
        seed: 1,
        http: None,
        asset_root: std::env::temp_dir(),
    }
}

fn fast() -> EvalOptions {
    EvalOptions {
        backoff_ms: 0,
        ..EvalOptions::default()
    }
}

async fn run(gateway: &str, instances: &[PuzzleInstance]) -> Vec<EvalRecord> {
    let gw = GatewayRegistry::default().build(gateway, &context(instances)).unwrap();
    run_eval_modalities(
        gw,
        &TaskRegistry::default(),
        &ParserChain::deterministic(),
        instances,
        &Modality::ALL,
        &fast(),
    )
    .await
    .unwrap()
}

#[tokio::test]
async fn oracle_scores_full_marks_everywhere() {
    let ds = small_dataset();
    let records = run("mock:oracle", &ds.instances).await;
    // Mental rotation offers only the image modality.
    assert_eq!(records.len(), 4 * 6 * 3 + 6);
    assert!(records.iter().all(|r| r.correct && r.parse_status == ParseStatus::ParsedDeterministic));
    let report = aggregate(&records);
    assert_eq!(report.cells.len(), 4 * 3 * 3 + 3);
    assert!(report.cells.iter().all(|c| c.accuracy == 1.0 && c.unparseable == 0));
}

#[tokio::test]
async fn garbage_is_unparseable_and_wrong() {
    let records = run("mock:garbage", &small_dataset().instances).await;
    assert!(records.iter().all(|r| !r.correct && r.parse_status == ParseStatus::Unparseable && r.answer.is_none()));
    assert!(aggregate(&records).cells.iter().all(|c| c.accuracy == 0.0 && c.unparseable == c.n));
}

#[tokio::test]
async fn random_colors_score_near_chance() {
    let reg = TaskRegistry::default();
    let env = reg.env(TaskKind::CubeRolling);
    let instances: Vec<PuzzleInstance> = (0..400).map(|s| build_instance(env, s, Tier::Easy).unwrap().0).collect();
    let records = run("mock:random", &instances).await;
    assert_eq!(records.len(), 1200);
    let acc = records.iter().filter(|r| r.correct).count() as f64 / records.len() as f64;
    assert!((acc - 1.0 / 6.0).abs() < 0.04, "{acc}");
    assert!((baseline_random(&instances).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    assert!(records.iter().all(|r| r.parse_status == ParseStatus::ParsedDeterministic));
    // The same seed draws the same answers.
    assert_eq!(run("mock:random", &instances).await, records);
}

fn record(id: &str, modality: Modality, correct: bool, tokens: u64) -> EvalRecord {
    EvalRecord {
        instance_id: id.into(),
        task: TaskKind::RubiksCube,
        tier: Tier::Medium,
        modality,
        parse_status: ParseStatus::ParsedDeterministic,
        answer: None,
        correct,
        prompt_tokens: 0,
        completion_tokens: tokens,
        latency_ms: 0,
        attempts: 1,
        error: None,
    }
}

#[test]
fn delta_token_pairs_correct_answers() {
    let records = vec![
        record("a", Modality::Tqa, true, 10_000),
        record("a", Modality::Vqa, true, 7_000),
        // Wrong in one modality: left out of the pairing.
        record("b", Modality::Tqa, true, 5_000),
        record("b", Modality::Vqa, false, 1),
        record("c", Modality::Vtqa, true, 99),
    ];
    let d = paired_deltas(&records);
    assert_eq!(d[&(TaskKind::RubiksCube, Tier::Medium)], vec![3000.0]);
    let report = aggregate(&records);
    assert_eq!(report.delta_token.len(), 2);
    assert!(report.delta_token.iter().all(|r| r.delta.mean == 3000.0 && r.delta.n == 1));
    assert_eq!(report.delta_token[1].tier, None);
}

#[test]
fn aggregation_ignores_record_order() {
    let mut records: Vec<EvalRecord> = (0..20)
        .map(|i| {
            let m = if i % 2 == 0 { Modality::Tqa } else { Modality::Vqa };
            record(&format!("i{}", i / 2), m, i % 3 != 0, 100 + i * 37)
        })
        .collect();
    let a = aggregate(&records);
    records.reverse();
    records.swap(3, 11);
    assert_eq!(aggregate(&records), a);
}

#[test]
fn quantiles_and_summary() {
    let v = [1.0, 2.0, 3.0, 4.0, 5.0];
    assert_eq!(quantile(&v, 0.25), 2.0);
    assert_eq!(quantile(&v, 0.5), 3.0);
    let s = Summary::of(&[10.0]).unwrap();
    assert_eq!((s.q1, s.median, s.q3), (10.0, 10.0, 10.0));
}

#[tokio::test]
async fn report_files_are_written() {
    let records = run("mock:oracle", &small_dataset().instances).await;
    let dir = tempfile::tempdir().unwrap();
    write_report(dir.path(), &records, &aggregate(&records)).unwrap();
    let jsonl = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), records.len());
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 39);
    assert!(dir.path().join("delta_token.csv").exists());
    let back: Report = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(back, aggregate(&records));
}

#[test]
fn parser_grammar_examples() {
    let reg = TaskRegistry::default();
    let cube = reg.env(TaskKind::CubeRolling);
    assert_eq!(parse_answer(cube, "Thinking...\n```\nred\n```"), Some(Answer::Color(spatial_bench::geometry::Color::Red)));
    assert_eq!(parse_answer(cube, "**Answer:** Blue"), Some(Answer::Color(spatial_bench::geometry::Color::Blue)));
    assert_eq!(parse_answer(cube, "Answer: red or blue"), None);
    assert_eq!(parse_answer(cube, "no idea"), None);
    let sokoban = reg.env(TaskKind::MovingBox);
    let Some(Answer::Moves(m)) = parse_answer(sokoban, "```\nR R D\n```") else { panic!() };
    assert_eq!(m.len(), 3);
    let Some(Answer::Moves(m)) = parse_answer(sokoban, "Answer: RRDL") else { panic!() };
    assert_eq!(m.len(), 4);
    let klotski = reg.env(TaskKind::WoodSlide);
    let Some(Answer::Slides(s)) = parse_answer(klotski, "```\nA down, B left\n```") else { panic!() };
    assert_eq!(s.len(), 2);
    assert_eq!(parse_answer(klotski, "```\nA down then jump\n```"), None);
    assert_eq!(extract_segment("text ```json\n{}\n``` more ```\nX\n```").unwrap().trim(), "X");
}

#[test]
fn unknown_names_and_bad_options_are_config_errors() {
    let ctx = context(&[]);
    assert!(matches!(GatewayRegistry::default().build("nope", &ctx), Err(spatial_bench::Error::Config(_))));
    assert!(matches!(ParserRegistry::default().build("nope", None), Err(spatial_bench::Error::Config(_))));
    assert!(matches!(ParserRegistry::default().build("llm", None), Err(spatial_bench::Error::Config(_))));
    let bad = EvalOptions {
        parallelism: 0,
        ..EvalOptions::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn missing_credentials_are_config_errors() {
    let cfg = HttpGatewayConfig {
        endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
        model: "m".into(),
        api_key_env: "SPATIAL_BENCH_TEST_UNSET_KEY".into(),
        timeout_secs: 5,
    };
    assert!(matches!(
        HttpGateway::new(cfg.clone(), ".".into()),
        Err(spatial_bench::Error::Config(_))
    ));
    let mut ctx = context(&[]);
    assert!(GatewayRegistry::default().build("http", &ctx).is_err());
    ctx.http = Some(cfg);
    assert!(matches!(GatewayRegistry::default().build("http", &ctx), Err(spatial_bench::Error::Config(_))));
}

#[derive(Clone)]
struct Fake {
    hits: Arc<AtomicUsize>,
    fail_first: usize,
    bodies: Arc<Mutex<Vec<serde_json::Value>>>,
    reply: String,
}

async fn chat(State(f): State<Fake>, Json(body): Json<serde_json::Value>) -> (axum::http::StatusCode, Json<serde_json::Value>) {
    let n = f.hits.fetch_add(1, Ordering::SeqCst);
    f.bodies.lock().unwrap().push(body);
    if n < f.fail_first {
        return (axum::http::StatusCode::SERVICE_UNAVAILABLE, Json(serde_json::json!({})));
    }
    (
        axum::http::StatusCode::OK,
        Json(serde_json::json!({
            "choices": [{ "message": { "content": f.reply } }],
            "usage": { "prompt_tokens": 11, "completion_tokens": 22 }
        })),
    )
}

async fn serve(fake: Fake) -> String {
    let app = Router::new().route("/v1/chat/completions", post(chat)).with_state(fake);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}/v1/chat/completions")
}

#[tokio::test]
async fn http_gateway_sends_images_and_retries() {
    let reg = TaskRegistry::default();
    let ds = small_dataset();
    let dir = tempfile::tempdir().unwrap();
    spatial_bench::bench::emit_dataset(&reg, ds, dir.path()).unwrap();
    let inst = ds.instances.iter().find(|i| i.task == TaskKind::CubeRolling).unwrap().clone();
    let fake = Fake {
        hits: Arc::new(AtomicUsize::new(0)),
        fail_first: 2,
        bodies: Arc::new(Mutex::new(Vec::new())),
        reply: format!("Answer: {}", reg.env(inst.task).reference_answer(&inst)),
    };
    let endpoint = serve(fake.clone()).await;
    std::env::set_var("SPATIAL_BENCH_TEST_KEY", "secret");
    let mut ctx = context(std::slice::from_ref(&inst));
    ctx.asset_root = dir.path().to_path_buf();
    ctx.http = Some(HttpGatewayConfig {
        endpoint,
        model: "test-model".into(),
        api_key_env: "SPATIAL_BENCH_TEST_KEY".into(),
        timeout_secs: 30,
    });
    let gw = GatewayRegistry::default().build("http", &ctx).unwrap();
    let recs = run_eval(gw, &reg, &ParserChain::deterministic(), std::slice::from_ref(&inst), Modality::Vqa, &fast())
        .await
        .unwrap();
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert!(r.correct, "{r:?}");
    assert_eq!((r.attempts, r.prompt_tokens, r.completion_tokens), (3, 11, 22));
    let bodies = fake.bodies.lock().unwrap();
    let content = bodies[2]["messages"][0]["content"].as_array().unwrap();
    assert_eq!(bodies[2]["model"], "test-model");
    assert!(content[0]["image_url"]["url"].as_str().unwrap().starts_with("data:image/svg+xml;base64,"));
    assert_eq!(content.last().unwrap()["type"], "text");
}

#[tokio::test]
async fn exhausted_retries_give_an_error_record() {
    let fake = Fake {
        hits: Arc::new(AtomicUsize::new(0)),
        fail_first: usize::MAX,
        bodies: Arc::new(Mutex::new(Vec::new())),
        reply: String::new(),
    };
    let endpoint = serve(fake.clone()).await;
    std::env::set_var("SPATIAL_BENCH_TEST_KEY2", "secret");
    let inst = small_dataset().instances.iter().find(|i| i.task == TaskKind::MovingBox).unwrap().clone();
    let gw: Arc<dyn AgentGateway> = Arc::new(
        HttpGateway::new(
            HttpGatewayConfig {
                endpoint,
                model: "m".into(),
                api_key_env: "SPATIAL_BENCH_TEST_KEY2".into(),
                timeout_secs: 30,
            },
            ".".into(),
        )
        .unwrap(),
    );
    let recs = run_eval(gw, &TaskRegistry::default(), &ParserChain::deterministic(), &[inst], Modality::Tqa, &fast())
        .await
        .unwrap();
    assert_eq!(recs[0].attempts, 3);
    assert!(!recs[0].correct);
    assert!(recs[0].error.as_deref().unwrap().contains("503"));
    assert_eq!(fake.hits.load(Ordering::SeqCst), 3);
}

#[tokio::test]
async fn llm_parser_rescues_free_text() {
    let reg = TaskRegistry::default();
    let inst = small_dataset().instances.iter().find(|i| i.task == TaskKind::RubiksCube).unwrap().clone();
    let answer = reg.env(inst.task).reference_answer(&inst).to_string();
    let fake = Fake {
        hits: Arc::new(AtomicUsize::new(0)),
        fail_first: 0,
        bodies: Arc::new(Mutex::new(Vec::new())),
        reply: format!("```\n{answer}\n```"),
    };
    let endpoint = serve(fake.clone()).await;
    std::env::set_var("SPATIAL_BENCH_TEST_KEY3", "secret");
    let parser_gw: Arc<dyn AgentGateway> = Arc::new(
        HttpGateway::new(
            HttpGatewayConfig {
                endpoint,
                model: "m".into(),
                api_key_env: "SPATIAL_BENCH_TEST_KEY3".into(),
                timeout_secs: 30,
            },
            ".".into(),
        )
        .unwrap(),
    );
    let chain = ParserRegistry::default()
        .chain(&["deterministic".into(), "llm".into()], Some(parser_gw))
        .unwrap();
    assert_eq!(chain.names(), ["deterministic", "llm"]);
    let env = reg.env(inst.task);
    let (status, parsed) = chain.parse(env, &inst.id, &format!("I think the sticker is {answer} or maybe not")).await;
    assert_eq!(status, ParseStatus::ParsedLlm);
    assert!(env.grade(&inst, &parsed.unwrap()));
    let (status, _) = chain.parse(env, &inst.id, &format!("```\n{answer}\n```")).await;
    assert_eq!(status, ParseStatus::ParsedDeterministic);
}
