use std::path::Path;

use hdflow::prompt_kit::{names, PromptCatalog, PromptError};

#[path = "support/typeset.rs"]
mod typeset;

use typeset::{squash, untypeset};

const TYPESET: &[&str] = &[
    names::PROBLEM_REFLECTION,
    names::EXPERTS_DESIGN,
    names::LLM_EXPERT_EXECUTION,
    names::TOOL_EXPERT_EXECUTION,
    names::FINAL_VERIFICATION,
    names::TASK_GENERATION,
    names::PUZZLE_BRAINSTORM,
    names::PROBLEM_VALIDATION,
];

#[test]
fn builtin_templates_match_typeset_originals() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/typeset_prompts");
    let catalog = PromptCatalog::builtin();
    for name in TYPESET {
        let tex = std::fs::read_to_string(dir.join(format!("{name}.tex"))).unwrap();
        let expected = squash(&untypeset(&tex));
        let actual = squash(&catalog.get(name).unwrap().body);
        assert_eq!(actual, expected, "template {name} differs from its typeset source");
    }
}

#[test]
fn every_template_renders_with_sentinels() {
    let catalog = PromptCatalog::builtin();
    assert_eq!(catalog.names().count(), 12);
    let leftover = regex::Regex::new(r"\{[a-z_][a-z0-9_]*\}").unwrap();
    for template in catalog.iter() {
        let slots = template.placeholders();
        assert_eq!(slots.is_empty(), template.name == names::PUZZLE_BRAINSTORM, "{}", template.name);
        let sentinels: Vec<String> = slots.iter().map(|s| format!("<<{s}:{}>>", template.name)).collect();
        let bindings: Vec<(&str, &str)> =
            slots.iter().map(String::as_str).zip(sentinels.iter().map(String::as_str)).collect();
        let out = catalog.render(&template.name, &bindings).unwrap();
        for s in &sentinels {
            assert!(out.contains(s.as_str()), "{} lost sentinel {s}", template.name);
        }
        assert!(!leftover.is_match(&out), "{} has an unresolved slot", template.name);

        if let Some((first, rest)) = bindings.split_first() {
            let err = catalog.render(&template.name, rest).unwrap_err();
            assert_eq!(err, PromptError::MissingBinding(first.0.to_string()));
        }
    }
}

#[test]
fn bound_values_are_not_reexpanded() {
    let catalog = PromptCatalog::builtin();
    let out = catalog.render(names::COT_SOLVE, &[("task_problem", "{task_problem} and {x}")]).unwrap();
    assert!(out.contains("{task_problem} and {x}"));
}

#[test]
fn tool_prompt_slots() {
    let t = PromptCatalog::builtin().get(names::TOOL_EXPERT_EXECUTION).unwrap().clone();
    for slot in
        ["original_problem", "problem_reflection", "name", "role", "experts_design", "input_data", "how_to_read_input"]
    {
        assert!(t.placeholders().iter().any(|p| p == slot), "missing {slot}");
    }
    assert!(matches!(PromptCatalog::builtin().get("nope"), Err(PromptError::UnknownTemplate(_))));
}
