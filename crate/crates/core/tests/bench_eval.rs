use std::sync::Arc;
use std::time::{Duration, Instant};

use hdflow::bench::{
    build_report, check_answer, check_game24, evaluate, gen_game24, parse_dataset, solve_game24, BenchmarkItem, Checker,
};
use hdflow::fixtures::game24::{backend, marker, wrong, Plan};
use hdflow::fixtures::{chain, judgment};
use hdflow::gateway::ScriptEntry;
use hdflow::trajectory::SolveMode;
use hdflow::{Gateway, HybridController, ModeUsed, ScriptedBackend, TableExecutor};

#[path = "support/game24_oracle.rs"]
mod game24_oracle;

use game24_oracle::{multisets, oracle};

#[test]
fn game24_matches_brute_force_oracle() {
    let started = Instant::now();
    let sets = multisets();
    assert_eq!(sets.len(), 126);
    let mut agree = 0;
    let mut solvable = 0;
    for v in &sets {
        let truth = oracle(*v);
        let ours = solve_game24(*v);
        if let Some(e) = &truth {
            solvable += 1;
            assert!(check_game24(*v, e), "{v:?}: checker rejects oracle expression {e}");
        }
        if let Some(e) = &ours {
            assert!(check_game24(*v, e), "{v:?}: checker rejects solver expression {e}");
        }
        if truth.is_some() == ours.is_some() {
            agree += 1;
        }
    }
    assert_eq!(agree, 126);
    assert!(solvable > 0 && solvable < 126);
    assert!(started.elapsed() < Duration::from_secs(30));
}

#[test]
fn checker_rejects_wrong_numbers_and_values() {
    assert!(check_game24([4, 6, 1, 1], "4*6*1*1"));
    assert!(check_game24([4, 6, 1, 1], "(4 × 6) ÷ (1 × 1) = 24"));
    assert!(!check_game24([4, 6, 1, 1], "4*6"));
    assert!(!check_game24([4, 6, 1, 1], "4*6*1+1"));
    assert!(!check_game24([4, 6, 1, 1], "4*6*2/2"));
    assert!(!check_game24([1, 1, 1, 1], "1/0+1+1"));
    assert!(check_game24([1, 5, 5, 5], "5*(5-1/5)"));
}

#[test]
fn numeric_and_exact_checkers() {
    assert!(check_answer(Checker::Numeric, "0.5", "1/2"));
    assert!(check_answer(Checker::Numeric, "42", "42.0000001"));
    assert!(!check_answer(Checker::Numeric, "42", "43"));
    assert!(check_answer(Checker::Exact, "Tea, coffee, and sugar", "  tea, coffee, and SUGAR. "));
}

fn plans() -> [Plan; 4] {
    [
        Plan { fast_correct: true, fast_verified: true, slow_correct: true },
        Plan { fast_correct: false, fast_verified: false, slow_correct: true },
        Plan { fast_correct: false, fast_verified: false, slow_correct: false },
        Plan { fast_correct: true, fast_verified: true, slow_correct: true },
    ]
}

#[test]
fn hybrid_eval_over_scripted_items() {
    let items = gen_game24(7, 4);
    let gateway = Gateway::new(Arc::new(backend(&items, &plans())));
    let controller = HybridController::from_gateway(gateway.clone(), Arc::new(TableExecutor::default()));

    let mut records = Vec::new();
    for mode in [SolveMode::Fast, SolveMode::Slow, SolveMode::Hybrid] {
        let lines = evaluate(&items, mode, &controller, 2).unwrap();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.trajectory.is_some()));
        records.extend(lines.into_iter().map(|l| l.eval));
    }
    let correct = |m: SolveMode| records.iter().filter(|r| r.mode == m && r.correct).count();
    assert_eq!((correct(SolveMode::Fast), correct(SolveMode::Slow), correct(SolveMode::Hybrid)), (2, 3, 3));

    let hybrid: Vec<_> = records.iter().filter(|r| r.mode == SolveMode::Hybrid).collect();
    let used: Vec<ModeUsed> = hybrid.iter().map(|r| r.mode_used).collect();
    let ids: Vec<&str> = hybrid.iter().map(|r| r.item_id.as_str()).collect();
    assert_eq!(ids, items.iter().map(|i| i.id.as_str()).collect::<Vec<_>>());
    assert_eq!(used, [ModeUsed::Fast, ModeUsed::Slow, ModeUsed::Slow, ModeUsed::Fast]);

    let report = build_report(&records);
    assert_eq!(report.rows.len(), 3);
    let hybrid_row = report.rows.iter().find(|r| r.mode == SolveMode::Hybrid).unwrap();
    assert_eq!((hybrid_row.total, hybrid_row.correct), (4, 3));
    assert_eq!(hybrid_row.accuracy, 0.75);
    assert_eq!((hybrid_row.fast_count, hybrid_row.slow_count), (2, 2));
    let summed: u64 = records.iter().map(|r| r.usage.total).sum();
    assert_eq!(summed, gateway.stats().usage.total);
    assert!(report.render_table().contains("hybrid"));
}

#[test]
fn exhausted_slow_solve_is_recorded_not_raised() {
    let item = gen_game24(11, 1).remove(0);
    let m = marker(&item);
    let mut script = vec![ScriptEntry::new(judgment(&m), "Does not reach 24.\nFINAL EVALUATION: NO")];
    script.extend(chain::slow_entries(&m, &wrong(&item)));
    let gateway = Gateway::new(Arc::new(ScriptedBackend::new(script).unwrap()));
    let controller = HybridController::from_gateway(gateway, Arc::new(TableExecutor::default()));

    let lines = evaluate(std::slice::from_ref(&item), SolveMode::Slow, &controller, 1).unwrap();
    let rec = &lines[0].eval;
    assert!(!rec.correct);
    assert!(rec.answer.is_none());
    assert!(rec.note.as_deref().unwrap().contains("all 3 workflow attempts failed"));
    let t = lines[0].trajectory.as_ref().unwrap();
    assert!(!t.verified);
    assert_eq!(t.attempt, 3);
    assert_eq!(rec.usage, t.usage());
}

#[test]
fn datasets_parse_with_checkers() {
    let text = r#"{"id": 1, "problem": "What is 6 * 7?", "reference": 42, "checker": "numeric"}
{"id": "b", "problem": "Make 24 from 4 6 1 1.", "reference": [4, 6, 1, 1], "checker": "game24"}
"#;
    let items: Vec<BenchmarkItem> = parse_dataset(text, "mixed").unwrap();
    assert_eq!(items.len(), 2);
    assert_eq!(items[0].id, "1");
    assert!(items[0].is_correct("42"));
    assert!(!items[1].is_correct("4+6+1+1"));
    assert!(items[1].is_correct("4*6*1*1"));
    assert!(items.iter().all(|i| i.dataset == "mixed"));
    assert!(parse_dataset("{\"problem\": \"x\", \"reference\": \"y\", \"checker\": \"fuzzy\"}", "d").is_err());
}
