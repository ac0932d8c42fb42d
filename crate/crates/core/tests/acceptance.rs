//! Release acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use common::{oracle_view, permutation_order, Die};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatial_bench::bench::{build_instance, emit_dataset, generate_dataset, DatasetProfile, Modality, PuzzleInstance};
use spatial_bench::eval::report::paired_deltas;
use spatial_bench::eval::*;
use spatial_bench::geometry::{roll, CardinalDirection, Color, Dir3, Orientation};
use spatial_bench::rng::derive_seed;
use spatial_bench::synth::trajectory::stored_solution;
use spatial_bench::synth::*;
use spatial_bench::tasks::cube_roll::{tortuosity, FaceColoring};
use spatial_bench::tasks::klotski::{self, Block, KlotskiBoard, Shape};
use spatial_bench::tasks::mental_rotation::{check_assembly, Uniqueness};
use spatial_bench::tasks::rubiks::{compose_permutations, move_permutation, parse_sequence, CubeState, Face, FaceMove, StickerPermutation, Turn};
use spatial_bench::tasks::sokoban::{self, SokobanConfig};
use spatial_bench::tasks::{GroundTruth, IntBand, TaskKind, TaskPayload, TaskRegistry, Tier};
use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

type Check = Result<(), String>;
/// Name, body and time budget of one criterion.
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rotation_group() -> Check {
    let all = Orientation::all();
    ensure(all.len() == 24, || format!("orbit size {}", all.len()))?;
    let mut from_rolls = vec![Orientation::IDENTITY];
    let mut k = 0;
    while k < from_rolls.len() {
        let o = from_rolls[k];
        k += 1;
        for d in CardinalDirection::ALL {
            let n = roll(&o, d);
            if !from_rolls.contains(&n) {
                from_rolls.push(n);
            }
        }
    }
    ensure(from_rolls.len() == 24, || format!("rolls reach {} orientations", from_rolls.len()))?;
    for o in &all {
        for d in CardinalDirection::ALL {
            ensure(roll(&roll(o, d), d.opposite()) == *o, || format!("roll {d:?} not undone"))?;
            let four = (0..4).fold(*o, |x, _| roll(&x, d));
            ensure(four == *o, || format!("roll {d:?} has order other than 4"))?;
            ensure(roll(o, d) != *o, || "roll fixes an orientation".into())?;
        }
    }
    let mut r = rng(1);
    let coloring = FaceColoring::standard();
    for _ in 0..1000 {
        let len = r.gen_range(0..40);
        let mut o = Orientation::IDENTITY;
        let mut die = Die::standard();
        for _ in 0..len {
            let d = CardinalDirection::ALL[r.gen_range(0..4)];
            o = roll(&o, d);
            die = die.roll(d);
        }
        for w in Dir3::ALL {
            ensure(coloring.get(o.body_at(w)) == die.facing(w), || "die oracle disagrees".into())?;
        }
    }
    Ok(())
}

fn perm_of(seq: &[FaceMove]) -> StickerPermutation {
    let mut p: StickerPermutation = std::array::from_fn(|i| i as u8);
    for &m in seq {
        p = compose_permutations(&p, move_permutation(m));
    }
    p
}

fn rubiks_suite() -> Check {
    let all: Vec<FaceMove> = FaceMove::all().collect();
    let solved = CubeState::solved();
    let mut r = rng(2);
    for _ in 0..10_000 {
        let len = r.gen_range(0..30);
        let seq: Vec<FaceMove> = (0..len).map(|_| all[r.gen_range(0..all.len())]).collect();
        let s = solved.apply_sequence(&seq);
        let counts = s.color_counts();
        for c in Color::CUBE {
            let i = Color::ALL.iter().position(|x| *x == c).unwrap();
            ensure(counts[i] == 9, || format!("{} stickers of {c:?}", counts[i]))?;
        }
        for f in Face::ALL {
            ensure(s.center(f) == solved.center(f), || "center moved".into())?;
        }
        // Sticker permutation replay agrees with the state.
        let p = perm_of(&seq);
        for (dest, &src) in p.iter().enumerate() {
            ensure(s.stickers()[dest] == solved.stickers()[src as usize], || "permutation replay differs".into())?;
        }
    }
    for f in Face::ALL {
        let x = FaceMove::new(f, Turn::Clockwise);
        ensure(solved.apply_sequence(&[x; 4]).is_solved(), || format!("{x}^4 is not identity"))?;
        ensure(solved.apply_sequence(&[x, x.inverse()]).is_solved(), || format!("{x} {x}' is not identity"))?;
    }
    let ru = permutation_order(&perm_of(&parse_sequence("R U").unwrap()));
    ensure(ru == 105, || format!("(R U) order {ru}"))?;
    let comm = permutation_order(&perm_of(&parse_sequence("R U R' U'").unwrap()));
    ensure(comm == 6, || format!("(R U R' U') order {comm}"))
}

/// A random board with the 2×2 block and up to five more blocks.
fn sparse_board(r: &mut ChaCha8Rng) -> KlotskiBoard {
    loop {
        let mut blocks = vec![Block {
            letter: 'A',
            shape: Shape::Big,
            row: r.gen_range(0..4),
            col: r.gen_range(0..3),
        }];
        let extra = r.gen_range(1..=5);
        let mut tries = 0;
        while blocks.len() < 1 + extra && tries < 200 {
            tries += 1;
            let shape = [Shape::Single, Shape::Wide, Shape::Tall][r.gen_range(0..3)];
            let (h, w) = shape.size();
            let b = Block {
                letter: (b'A' + blocks.len() as u8) as char,
                shape,
                row: r.gen_range(0..=5 - h),
                col: r.gen_range(0..=4 - w),
            };
            let mut trial = blocks.clone();
            trial.push(b);
            if KlotskiBoard::new(trial.clone()).is_ok() {
                blocks = trial;
            }
        }
        if let Ok(b) = KlotskiBoard::new(blocks) {
            if !b.is_solved() {
                return b;
            }
        }
    }
}

fn solver_oracles() -> Check {
    let cfg = SokobanConfig::default();
    for k in 0..200u64 {
        let tier = if k % 2 == 0 { Tier::Easy } else { Tier::Medium };
        let g = sokoban::generate_level(derive_seed(3, &["sokoban", &k.to_string()]), tier, &cfg).map_err(|e| e.to_string())?;
        ensure(g.level.boxes().len() <= 2, || "more than two boxes".into())?;
        let bfs = sokoban::brute_force_optimal_len(&g.level, 5_000_000);
        ensure(bfs == Some(g.solution.len()), || format!("sokoban {k}: solver {} vs bfs {bfs:?}", g.solution.len()))?;
    }
    let mut r = rng(4);
    for k in 0..100 {
        let b = sparse_board(&mut r);
        ensure(b.blocks().len() <= 6, || "more than six blocks".into())?;
        let fast = klotski::solve(&b, 10_000_000);
        let fast_len = match &fast {
            klotski::SolveOutcome::Solved(p) => {
                ensure(b.apply_letter_moves(p).is_ok_and(|e| e.is_solved()), || "plan does not replay".into())?;
                Some(p.len())
            }
            klotski::SolveOutcome::Unsolvable => None,
            other => return Err(format!("klotski {k}: {other:?}")),
        };
        let bfs = klotski::brute_force_optimal_len(&b);
        ensure(fast_len == bfs, || format!("klotski {k}: solver {fast_len:?} vs bfs {bfs:?}\n{b}"))?;
    }
    Ok(())
}

/// Re-derives the ground truth of a generated instance independently.
fn check_generated(task: TaskKind, g: &spatial_bench::tasks::Generated) -> Check {
    match (&g.payload, &g.ground_truth) {
        (TaskPayload::CubeRolling(p), GroundTruth::Color { color }) => {
            let die = p.path.moves.iter().fold(Die::from_fn(|d| p.coloring.get(d)), |d, &m| d.roll(m));
            ensure(die.facing(p.query) == *color, || "cube rolling answer does not replay".into())
        }
        (TaskPayload::RubiksCube(p), GroundTruth::Color { color }) => {
            let perm = perm_of(&p.scramble);
            let idx = p.query.face.index() * 9 + (p.query.row - 1) * 3 + (p.query.col - 1);
            let want = CubeState::solved().stickers()[perm[idx] as usize];
            ensure(want == *color, || "rubik's answer does not replay".into())
        }
        (TaskPayload::MentalRotation(p), GroundTruth::Grid { grid }) => {
            ensure(grid.rows == oracle_view(&p.assembly, p.query), || "grid is not the query view".into())?;
            ensure(check_assembly(&p.assembly, p.query, 200_000) == Uniqueness::Unique, || "not unique".into())
        }
        (TaskPayload::MovingBox(p), GroundTruth::Plan { solution }) => {
            let moves = sokoban::parse_moves(&solution.join(" ")).map_err(|e| e.to_string())?;
            ensure(sokoban::replay(&p.level, &moves).unwrap_or(false), || "sokoban plan does not solve".into())?;
            ensure(g.optimal_len == Some(moves.len()), || "optimal length mismatch".into())
        }
        (TaskPayload::WoodSlide(p), GroundTruth::Plan { solution }) => {
            let moves = klotski::parse_moves(&solution.join(" ")).map_err(|e| e.to_string())?;
            ensure(p.board.apply_letter_moves(&moves).is_ok_and(|b| b.is_solved()), || "klotski plan does not solve".into())?;
            ensure(g.optimal_len == Some(moves.len()), || "optimal length mismatch".into())
        }
        _ => Err(format!("{task}: payload and ground truth do not match")),
    }
}

fn generation_soundness() -> Check {
    let reg = TaskRegistry::default();
    for (task, n) in [
        (TaskKind::MovingBox, 500),
        (TaskKind::WoodSlide, 300),
        (TaskKind::CubeRolling, 1000),
        (TaskKind::RubiksCube, 1000),
        (TaskKind::MentalRotation, 1000),
    ] {
        let env = reg.env(task);
        for k in 0..n {
            let tier = Tier::ALL[k % 3];
            let seed = derive_seed(5, &[task.name(), &k.to_string()]);
            let g = env.generate(seed, tier).map_err(|e| format!("{task} #{k}: {e}"))?;
            check_generated(task, &g).map_err(|e| format!("{task} #{k}: {e}"))?;
        }
    }
    Ok(())
}

fn instances(task: TaskKind, n: usize, seed: u64) -> Vec<PuzzleInstance> {
    let reg = TaskRegistry::default();
    (0..n)
        .map(|k| {
            let s = derive_seed(seed, &[task.name(), &k.to_string()]);
            build_instance(reg.env(task), s, Tier::ALL[k % 3]).unwrap().0
        })
        .collect()
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap()
}

fn context(instances: &[PuzzleInstance]) -> GatewayContext {
    GatewayContext {
        registry: Arc::new(TaskRegistry::default()),
        instances: Arc::new(instances.iter().map(|i| (i.id.clone(), i.clone())).collect()),
        seed: 6,
        http: None,
        asset_root: ".".into(),
    }
}

fn evaluate(gateway: &str, instances: &[PuzzleInstance], modalities: &[Modality]) -> Vec<EvalRecord> {
    let gw = GatewayRegistry::default().build(gateway, &context(instances)).unwrap();
    let opts = EvalOptions {
        parallelism: 64,
        ..EvalOptions::default()
    };
    runtime()
        .block_on(run_eval_modalities(
            gw,
            &TaskRegistry::default(),
            &ParserChain::deterministic(),
            instances,
            modalities,
            &opts,
        ))
        .unwrap()
}

fn baselines() -> Check {
    for task in [TaskKind::CubeRolling, TaskKind::RubiksCube] {
        let set = instances(task, 10_000, 7);
        let recs = evaluate("mock:random", &set, &[Modality::Tqa]);
        ensure(recs.len() == 10_000, || format!("{} records", recs.len()))?;
        let acc = recs.iter().filter(|r| r.correct).count() as f64 / recs.len() as f64;
        ensure((acc - 1.0 / 6.0).abs() <= 0.015, || format!("{task} random accuracy {:.4}", acc))?;
        println!("    {task}: random {:.2}%", acc * 100.0);
    }
    for task in [TaskKind::CubeRolling, TaskKind::RubiksCube, TaskKind::MentalRotation] {
        let set = instances(task, 600, 8);
        let mut subsets: Vec<Vec<PuzzleInstance>> = Tier::ALL
            .iter()
            .map(|t| set.iter().filter(|i| i.tier == *t).cloned().collect())
            .collect();
        subsets.push(set);
        for s in &subsets {
            let f = baseline_frequency(s).map_err(|e| e.to_string())?;
            let r = baseline_random(s).map_err(|e| e.to_string())?;
            ensure(f >= r, || format!("{task}: frequency {f} below random {r}"))?;
        }
    }
    Ok(())
}

fn monotonicity() -> Check {
    let reg = TaskRegistry::default();
    for task in TaskKind::ALL {
        let env = reg.env(task);
        let mut means = Vec::new();
        for tier in Tier::ALL {
            let mut sum = 0.0;
            for k in 0..200 {
                let g = env
                    .generate(derive_seed(9, &[task.name(), tier.name(), &k.to_string()]), tier)
                    .map_err(|e| e.to_string())?;
                sum += match &g.payload {
                    TaskPayload::CubeRolling(p) => tortuosity(&p.path.moves).map_err(|e| e.to_string())?,
                    TaskPayload::RubiksCube(p) => p.scramble.len() as f64,
                    TaskPayload::MentalRotation(p) => p.assembly.len() as f64,
                    _ => g.optimal_len.unwrap() as f64,
                };
            }
            means.push(sum / 200.0);
        }
        println!("    {task}: {:.3} / {:.3} / {:.3}", means[0], means[1], means[2]);
        ensure(means[0] < means[1] && means[1] < means[2], || format!("{task} means {means:?}"))?;
    }
    Ok(())
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Check {
    let reg = TaskRegistry::default();
    let profile = DatasetProfile::standard(50, 7);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let ds = generate_dataset(&reg, &profile).map_err(|e| e.to_string())?;
        emit_dataset(&reg, &ds, d.path()).map_err(|e| e.to_string())?;
    }
    let (a, b) = (tree(dirs[0].path()), tree(dirs[1].path()));
    ensure(a.contains_key("manifest.jsonl") && a.len() > 750, || format!("{} files", a.len()))?;
    ensure(a == b, || "emitted bytes differ".into())
}

fn idf_suite() -> Check {
    let reg = TaskRegistry::default();
    for env in reg.iter() {
        let samples = random_walk_samples(env, IntBand::new(1, 8), 1000, 10).map_err(|e| e.to_string())?;
        for s in &samples {
            env.verify_imagery(s).map_err(|e| format!("{}: {e}", env.name()))?;
        }
    }
    let stage1 = ImageryProfile::standard(11);
    let all = stage1.generate(&reg).map_err(|e| e.to_string())?;
    ensure(stage1.total() == 20_000 && all.len() == 20_000, || format!("stage 1 has {}", all.len()))?;
    let stage2 = TrajectoryProfile::standard(12);
    ensure(stage2.count == 5000 && stage2.plan().len() == 5000, || "stage 2 plan is not 5000".into())?;
    let small = TrajectoryProfile { count: 40, ..stage2 };
    let trajs = small.generate(&reg).map_err(|e| e.to_string())?;
    ensure(trajs.len() == 40, || format!("{} trajectories", trajs.len()))?;

    let bench = generate_dataset(&reg, &DatasetProfile::standard(4, 13)).map_err(|e| e.to_string())?.instances;
    let fps = benchmark_fingerprints(&reg, &bench);
    let mut imagery = all[..2000].to_vec();
    let fresh = filter_overlap(imagery.clone(), &fps).len();
    for i in &bench {
        let env = reg.env(i.task);
        imagery.push(ImagerySample {
            task: i.task,
            seed: i.seed,
            initial_state: serde_json::Value::Null,
            initial: env.canonical_state(&i.payload),
            actions: env.canonical_actions(i),
            target: String::new(),
            question: String::new(),
            rationale: None,
        });
    }
    let kept = filter_overlap(imagery, &fps);
    ensure(kept.len() == fresh, || format!("{} planted imagery clones survived", kept.len() - fresh))?;
    ensure(kept.iter().all(|s| !fps.contains(&s.fingerprint())), || "overlap after filtering".into())?;
    let mut planted = trajs.clone();
    for i in bench.iter().filter(|i| i.task.is_plan_task()) {
        planted.push(pseudo_reasoning(&reg, i, stored_solution(i).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?);
    }
    let kept = filter_trajectories(planted, &fps);
    ensure(kept == filter_trajectories(trajs, &fps), || "planted trajectory clones survived".into())
}

fn record(id: &str, m: Modality, tokens: u64) -> EvalRecord {
    EvalRecord {
        instance_id: id.into(),
        task: TaskKind::CubeRolling,
        tier: Tier::Easy,
        modality: m,
        parse_status: ParseStatus::ParsedDeterministic,
        answer: None,
        correct: true,
        prompt_tokens: 0,
        completion_tokens: tokens,
        latency_ms: 0,
        attempts: 1,
        error: None,
    }
}

fn end_to_end() -> Check {
    let reg = TaskRegistry::default();
    let ds = generate_dataset(&reg, &DatasetProfile::standard(4, 14)).map_err(|e| e.to_string())?;
    let recs = evaluate("mock:oracle", &ds.instances, &Modality::ALL);
    let report = aggregate(&recs);
    ensure(report.cells.len() == 39, || format!("{} cells", report.cells.len()))?;
    ensure(report.cells.iter().all(|c| c.accuracy == 1.0), || "oracle below 100%".into())?;
    // Deltas 3000, -1000, 0, 6000, 2000: quartiles 0, 2000, 3000.
    let pairs = [(10_000, 7_000), (4_000, 5_000), (800, 800), (9_000, 3_000), (2_500, 500)];
    let mut synthetic = Vec::new();
    for (k, (t, v)) in pairs.iter().enumerate() {
        synthetic.push(record(&format!("p{k}"), Modality::Tqa, *t));
        synthetic.push(record(&format!("p{k}"), Modality::Vqa, *v));
    }
    let unpaired = record("lonely", Modality::Tqa, 50_000);
    synthetic.push(unpaired);
    let deltas = paired_deltas(&synthetic);
    ensure(deltas[&(TaskKind::CubeRolling, Tier::Easy)].len() == 5, || "pairing".into())?;
    let d = aggregate(&synthetic).delta_token[0].delta;
    let want = (5, 2000.0, -1000.0, 0.0, 2000.0, 3000.0, 6000.0);
    let got = (d.n, d.mean, d.min, d.q1, d.median, d.q3, d.max);
    ensure(got == want, || format!("delta summary {got:?}"))
}

fn main() -> ExitCode {
    let checks: Vec<Criterion> = vec![
        ("rotation group", rotation_group, Some(Duration::from_secs(1))),
        ("rubik's cube group", rubiks_suite, Some(Duration::from_secs(5))),
        ("solver-oracle equivalence", solver_oracles, Some(Duration::from_secs(120))),
        ("generation soundness", generation_soundness, Some(Duration::from_secs(300))),
        ("baseline reproduction", baselines, None),
        ("difficulty monotonicity", monotonicity, Some(Duration::from_secs(120))),
        ("determinism", determinism, None),
        ("imagery and trajectory synthesis", idf_suite, Some(Duration::from_secs(120))),
        ("end-to-end mock evaluation", end_to_end, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in checks {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|()| match limit {
            Some(l) if took > l => Err(format!("took {:.2}s, limit {}s", took.as_secs_f64(), l.as_secs())),
            _ => Ok(()),
        });
        match result {
            Ok(()) => println!("PASS {name} ({:.2}s)", took.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("FAIL {name} ({:.2}s): {e}", took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
