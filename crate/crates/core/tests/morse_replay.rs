use std::sync::Arc;
use std::time::{Duration, Instant};

use hdflow::bench::normalize_answer;
use hdflow::executor::fingerprint;
use hdflow::fixtures::morse;
use hdflow::prompt_kit::{
    extract_block, extract_code, parse_expert_cards, parse_final_evaluation, parse_validity, ExpertType, VerdictValue,
};
use hdflow::trajectory::Stage;
use hdflow::workflow::{parse_design, parse_reflection, MY_FINAL_OUTPUT, PROBLEM_REFLECTION};
use hdflow::{Gateway, WorkflowEngine};

const CHAIN: [(&str, ExpertType); 5] = [
    ("Morse Code Dictionary Creation Expert", ExpertType::Llm),
    ("Morse Code Parsing Expert", ExpertType::Llm),
    ("Python Expert of Translation", ExpertType::Tool),
    ("Message Reconstruction Expert", ExpertType::Llm),
    ("Final Review and Presentation Expert", ExpertType::Llm),
];

#[test]
fn reflection_has_five_subtasks() {
    let block = extract_block(morse::REFLECTION, PROBLEM_REFLECTION).unwrap();
    assert!(block.payload.contains("Morse"));
    let (_, subtasks) = parse_reflection(morse::REFLECTION).unwrap();
    assert_eq!(subtasks.len(), 5);
    assert_eq!(subtasks.iter().map(|t| t.index).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    assert!(subtasks.iter().any(|t| t.tool_suited));
}

#[test]
fn design_has_five_cards_in_order() {
    let cards = parse_expert_cards(morse::DESIGN).unwrap();
    let got: Vec<(&str, ExpertType)> = cards.iter().map(|c| (c.name.as_str(), c.expert_type)).collect();
    assert_eq!(got, CHAIN.to_vec());

    let specs = parse_design(morse::DESIGN).unwrap();
    assert_eq!(specs.len(), 5);
    assert!(specs.iter().all(|s| !s.description.trim().is_empty()));
}

#[test]
fn tool_reply_code_extraction() {
    let code = extract_code(morse::TOOL_REPLY).unwrap();
    assert_eq!(code.trim(), morse::TOOL_CODE.trim());
    assert_eq!(fingerprint(&code), fingerprint(morse::TOOL_CODE));
}

#[test]
fn expert_outputs_are_blocks() {
    for (name, reply) in morse::EXPERTS.iter().filter(|(n, _)| *n != "Python Expert of Translation") {
        let block = extract_block(reply, MY_FINAL_OUTPUT).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!block.payload.trim().is_empty(), "{name}");
    }
}

#[test]
fn misspelled_final_evaluation() {
    assert!(morse::JUDGMENT.contains("FINAL EVALAUTION"));
    let v = parse_final_evaluation(morse::JUDGMENT);
    assert_eq!(v.value, VerdictValue::Yes);

    for (text, want) in [
        ("FINAL EVALUATION: NO", VerdictValue::No),
        ("**Final Evaluation:** yes", VerdictValue::Yes),
        ("FINAL EVALAUTION: no", VerdictValue::No),
        ("Looks fine to me.", VerdictValue::Unparseable),
    ] {
        assert_eq!(parse_final_evaluation(text).value, want, "{text:?}");
    }
}

#[test]
fn validity_tags() {
    assert!(parse_validity("Reasoning...\n## valid ##").verdict.is_yes());
    assert!(!parse_validity("Reasoning...\n##invalid##").verdict.is_yes());
    assert!(!parse_validity("No tag at all").verdict.is_yes());
}

#[test]
fn slow_solve_replays_transcript() {
    let backend = Arc::new(morse::backend());
    let executor = Arc::new(morse::executor());
    let engine = WorkflowEngine::new(Gateway::new(backend.clone()), executor.clone());

    let started = Instant::now();
    let solution = engine.solve_slow(morse::PROBLEM).unwrap();
    assert!(started.elapsed() < Duration::from_secs(1));

    assert_eq!(normalize_answer(&solution.final_answer), "tea, coffee, and sugar");
    assert!(solution.judgment.is_yes());
    assert_eq!(solution.attempt, 1);
    assert_eq!(solution.results.len(), 5);
    let names: Vec<&str> = solution.results.iter().map(|r| r.expert_name.as_str()).collect();
    assert_eq!(names, CHAIN.iter().map(|c| c.0).collect::<Vec<_>>());

    let tool = &solution.results[2];
    assert_eq!(tool.code_attempts.len(), 1);
    assert_eq!(tool.output.trim_end(), morse::TOOL_STDOUT.trim_end());
    assert_eq!(tool.raw.trim(), morse::TOOL_TRANSCRIPT.trim());

    assert_eq!(backend.call_count(), 8);
    assert_eq!(executor.call_count(), 1);

    let stages: Vec<Stage> = solution.history[0].exchanges.iter().map(|e| e.stage).collect();
    assert_eq!(stages.first(), Some(&Stage::Reflection));
    assert_eq!(stages.last(), Some(&Stage::Judgment));
    assert_eq!(stages.len(), 8);
}

#[test]
fn later_experts_see_the_tool_transcript() {
    let backend = Arc::new(morse::backend());
    let engine = WorkflowEngine::new(Gateway::new(backend.clone()), Arc::new(morse::executor()));
    engine.solve_slow(morse::PROBLEM).unwrap();
    let reconstruction =
        backend.prompts().into_iter().find(|p| p.contains("Please act as Message Reconstruction Expert")).unwrap();
    assert!(reconstruction.contains(morse::TOOL_TRANSCRIPT.trim()));
}
