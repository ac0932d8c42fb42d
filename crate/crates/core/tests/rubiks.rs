mod common;

use common::permutation_order;
use proptest::prelude::*;
use spatial_bench::geometry::Color;
use spatial_bench::tasks::rubiks::*;
use spatial_bench::tasks::{GroundTruth, TaskEnv, TaskPayload, Tier};

fn seq_perm(s: &str) -> StickerPermutation {
    let mut p: StickerPermutation = std::array::from_fn(|i| i as u8);
    for m in parse_sequence(s).unwrap() {
        p = compose_permutations(&p, move_permutation(m));
    }
    p
}

fn order_by_state(s: &str) -> usize {
    let seq = parse_sequence(s).unwrap();
    let mut c = CubeState::solved().apply_sequence(&seq);
    let mut k = 1;
    while !c.is_solved() {
        c = c.apply_sequence(&seq);
        k += 1;
    }
    k
}

#[test]
fn known_group_orders() {
    assert_eq!(permutation_order(&seq_perm("R U")), 105);
    assert_eq!(order_by_state("R U"), 105);
    assert_eq!(permutation_order(&seq_perm("R U R' U'")), 6);
    assert_eq!(order_by_state("R U R' U'"), 6);
    assert_eq!(order_by_state("R"), 4);
    assert_eq!(order_by_state("R2"), 2);
    assert_eq!(order_by_state("R L"), 4);
    assert_eq!(order_by_state("R U2 D' B D'"), 1260);
}

#[test]
fn face_turn_identities() {
    for face in Face::ALL {
        let q = FaceMove::new(face, Turn::Clockwise);
        let s = CubeState::solved();
        assert!(s.apply_sequence(&[q; 4]).is_solved());
        assert!(s.apply_sequence(&[q, q.inverse()]).is_solved());
        assert_eq!(s.apply_sequence(&[q, q]), s.apply_move(FaceMove::new(face, Turn::Half)));
        assert!(!s.apply_move(q).is_solved());
    }
}

#[test]
fn single_turns_cycle_stickers() {
    // R on a solved cube: front right column becomes the down color.
    let s = CubeState::solved().apply_sequence(&parse_sequence("R").unwrap());
    for row in 0..3 {
        assert_eq!(s.sticker(Face::F, row, 2), CubeState::solved().center(Face::D));
        assert_eq!(s.sticker(Face::U, row, 2), CubeState::solved().center(Face::F));
        assert_eq!(s.sticker(Face::F, row, 0), CubeState::solved().center(Face::F));
    }
}

fn moves() -> impl Strategy<Value = Vec<FaceMove>> {
    let all: Vec<FaceMove> = FaceMove::all().collect();
    prop::collection::vec(prop::sample::select(all), 0..40)
}

proptest! {
    #[test]
    fn scrambles_preserve_invariants(seq in moves()) {
        let solved = CubeState::solved();
        let s = solved.apply_sequence(&seq);
        for c in Color::CUBE {
            prop_assert_eq!(s.color_counts()[Color::ALL.iter().position(|x| *x == c).unwrap()], 9);
        }
        for f in Face::ALL {
            prop_assert_eq!(s.center(f), solved.center(f));
        }
        let (corner, edge) = s.cubie_parities();
        prop_assert_eq!(corner, edge);
        prop_assert!(s.apply_sequence(&inverse_sequence(&seq)).is_solved());
        prop_assert_eq!(CubeState::from_code_string(&s.code_string()).unwrap(), s);
        prop_assert_eq!(parse_sequence(&format_sequence(&seq)).unwrap(), seq);
    }

    #[test]
    fn ground_truth_matches_replay(seed in any::<u64>(), tier in 0usize..3) {
        let g = RubiksEnv::default().generate(seed, Tier::ALL[tier]).unwrap();
        let TaskPayload::RubiksCube(p) = &g.payload else { panic!() };
        let end = CubeState::solved().apply_sequence(&p.scramble);
        prop_assert_eq!(end.code_string(), p.final_state.clone());
        let GroundTruth::Color { color } = g.ground_truth else { panic!() };
        prop_assert_eq!(end.sticker(p.query.face, p.query.row - 1, p.query.col - 1), color);
    }
}

#[test]
fn notation_accepts_variants_and_rejects_junk() {
    assert_eq!(format_sequence(&parse_sequence("R U' F2").unwrap()), "R U' F2");
    assert!(parse_sequence("").unwrap().is_empty());
    assert!(parse_sequence("Q").is_err());
}
