//! HTTP API behind the human-play web page: serves puzzles without their
//! answers, validates submitted solutions and logs sessions.

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use spatial_bench::bench::PuzzleInstance;
use spatial_bench::rng::derive_seed;
use spatial_bench::tasks::{Answer, TaskKind, TaskPayload, TaskRegistry, Tier};
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};
use tower_http::services::ServeDir;

pub struct AppState {
    registry: TaskRegistry,
    instances: Vec<PuzzleInstance>,
    by_id: HashMap<String, usize>,
    time_limit_ms: u64,
    log: Mutex<Option<std::fs::File>>,
    sessions: Mutex<Vec<SessionRecord>>,
}

impl AppState {
    /// `session_log`, when given, is opened for appending.
    pub fn new(
        instances: Vec<PuzzleInstance>,
        session_log: Option<&Path>,
        time_limit_ms: u64,
    ) -> std::io::Result<Self> {
        let log = match session_log {
            Some(p) => Some(std::fs::OpenOptions::new().create(true).append(true).open(p)?),
            None => None,
        };
        Ok(Self {
            registry: TaskRegistry::default(),
            by_id: instances.iter().enumerate().map(|(k, i)| (i.id.clone(), k)).collect(),
            instances,
            time_limit_ms,
            log: Mutex::new(log),
            sessions: Mutex::new(Vec::new()),
        })
    }
}

/// Routes under `/api`, dataset images under `/assets` and, when given, the
/// built web page at `/`.
pub fn router(state: Arc<AppState>, dataset_dir: &Path, static_dir: Option<&Path>) -> Router {
    let mut app = Router::new()
        .route("/api/puzzle", get(puzzle))
        .route("/api/sessions", post(submit))
        .route("/api/baseline", get(baseline))
        .nest_service("/assets", ServeDir::new(dataset_dir.join("assets")))
        .with_state(state);
    if let Some(dir) = static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app
}

pub async fn run(
    addr: &str,
    dataset_dir: PathBuf,
    static_dir: Option<PathBuf>,
    session_log: PathBuf,
    time_limit_ms: u64,
) -> Result<(), crate::CliError> {
    let dataset = spatial_bench::bench::load_dataset(&dataset_dir)?;
    let state = Arc::new(AppState::new(dataset.instances, Some(&session_log), time_limit_ms)?);
    let app = router(state, &dataset_dir, static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": msg.into() }))).into_response()
}

#[derive(Debug, Deserialize)]
pub struct PuzzleQuery {
    pub task: String,
    pub tier: Option<String>,
    /// Sessions see a stable puzzle; different sessions spread over the pool.
    pub session: Option<String>,
}

/// What the page needs to pose a puzzle. Ground truth is never included.
#[derive(Debug, Serialize, Deserialize)]
pub struct PuzzleView {
    pub id: String,
    pub task: TaskKind,
    pub tier: Tier,
    pub prompt: String,
    pub terse: String,
    pub images: Vec<String>,
    pub format: String,
    pub optimal_len: Option<usize>,
    pub time_limit_ms: u64,
    /// Board state for interactive play; only plan tasks, whose state
    /// does not reveal the answer.
    pub payload: Option<TaskPayload>,
}

async fn puzzle(State(state): State<Arc<AppState>>, Query(q): Query<PuzzleQuery>) -> Response {
    let Ok(task) = q.task.parse::<TaskKind>() else {
        return error(StatusCode::BAD_REQUEST, format!("unknown task `{}`", q.task));
    };
    let tier = match q.tier.as_deref().map(str::parse::<Tier>) {
        None => None,
        Some(Ok(t)) => Some(t),
        Some(Err(_)) => return error(StatusCode::BAD_REQUEST, "unknown tier"),
    };
    let pool: Vec<&PuzzleInstance> = state
        .instances
        .iter()
        .filter(|i| i.task == task && tier.is_none_or(|t| i.tier == t))
        .collect();
    if pool.is_empty() {
        return error(StatusCode::NOT_FOUND, "no puzzle matches");
    }
    let session = q.session.as_deref().unwrap_or("");
    let pick = derive_seed(0, &[session, task.name()]) as usize % pool.len();
    let inst = pool[pick];
    let format = match state.registry.env(task).prompt_parts(&inst.payload) {
        Ok(p) => p.format,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    Json(PuzzleView {
        id: inst.id.clone(),
        task,
        tier: inst.tier,
        prompt: inst.renditions.detailed.clone(),
        terse: inst.renditions.terse.clone(),
        images: inst.renditions.images.iter().map(|p| format!("/{p}")).collect(),
        format,
        optimal_len: inst.optimal_len,
        time_limit_ms: state.time_limit_ms,
        payload: task.is_plan_task().then(|| inst.payload.clone()),
    })
    .into_response()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Submission {
    pub instance_id: String,
    pub session: Option<String>,
    /// Move sequence for plan tasks, e.g. `R R D` or `AD BL`.
    pub moves: Option<String>,
    /// Final answer for the other tasks.
    pub answer: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// The submission parsed and, for plan tasks, every move was legal.
    pub valid: bool,
    pub correct: bool,
    pub moves_used: Option<usize>,
    pub optimal_len: Option<usize>,
    pub over_time: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionRecord {
    pub timestamp_ms: u64,
    pub session: Option<String>,
    pub instance_id: String,
    pub task: TaskKind,
    pub tier: Tier,
    pub submission: String,
    pub elapsed_ms: u64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Replays plan answers move by move so an illegal move is reported as
/// invalid rather than merely wrong.
fn judge(registry: &TaskRegistry, inst: &PuzzleInstance, text: &str) -> (bool, bool, Option<usize>) {
    let env = registry.env(inst.task);
    let Some(answer) = env.parse_segment(text) else {
        return (false, false, None);
    };
    match (&inst.payload, &answer) {
        (TaskPayload::MovingBox(p), Answer::Moves(ms)) => match p.level.apply_moves(ms) {
            Ok(end) => (true, end.is_solved(), Some(ms.len())),
            Err(_) => (false, false, Some(ms.len())),
        },
        (TaskPayload::WoodSlide(p), Answer::Slides(ms)) => match p.board.apply_letter_moves(ms) {
            Ok(end) => (true, end.is_solved(), Some(ms.len())),
            Err(_) => (false, false, Some(ms.len())),
        },
        _ => (true, env.grade(inst, &answer), None),
    }
}

async fn submit(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let sub: Submission = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed submission: {e}")),
    };
    let Some(&k) = state.by_id.get(&sub.instance_id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown instance `{}`", sub.instance_id));
    };
    let inst = &state.instances[k];
    let text = if inst.task.is_plan_task() {
        sub.moves.clone().or(sub.answer.clone())
    } else {
        sub.answer.clone().or(sub.moves.clone())
    };
    let Some(text) = text else {
        return error(StatusCode::BAD_REQUEST, "submission needs `moves` or `answer`");
    };
    let (valid, correct, moves_used) = judge(&state.registry, inst, &text);
    let verdict = Verdict {
        valid,
        correct,
        moves_used,
        optimal_len: inst.optimal_len,
        over_time: sub.elapsed_ms > state.time_limit_ms,
    };
    let record = SessionRecord {
        timestamp_ms: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64),
        session: sub.session,
        instance_id: inst.id.clone(),
        task: inst.task,
        tier: inst.tier,
        submission: text,
        elapsed_ms: sub.elapsed_ms,
        verdict: verdict.clone(),
    };
    if let Some(f) = state.log.lock().expect("log lock").as_mut() {
        let line = serde_json::to_string(&record).expect("session records serialize") + "\n";
        if let Err(e) = f.write_all(line.as_bytes()).and_then(|_| f.flush()) {
            return error(StatusCode::INTERNAL_SERVER_ERROR, format!("session log: {e}"));
        }
    }
    state.sessions.lock().expect("session lock").push(record);
    Json(verdict).into_response()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub task: TaskKind,
    pub sessions: usize,
    /// Sessions within the time limit; only these count towards accuracy.
    pub counted: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
}

async fn baseline(State(state): State<Arc<AppState>>) -> Json<Vec<BaselineRow>> {
    let mut rows: BTreeMap<TaskKind, BaselineRow> = BTreeMap::new();
    for r in state.sessions.lock().expect("session lock").iter() {
        let row = rows.entry(r.task).or_insert(BaselineRow {
            task: r.task,
            sessions: 0,
            counted: 0,
            correct: 0,
            accuracy: None,
        });
        row.sessions += 1;
        if !r.verdict.over_time {
            row.counted += 1;
            row.correct += usize::from(r.verdict.correct);
        }
    }
    Json(
        rows.into_values()
            .map(|mut r| {
                r.accuracy = (r.counted > 0).then(|| r.correct as f64 / r.counted as f64);
                r
            })
            .collect(),
    )
}
