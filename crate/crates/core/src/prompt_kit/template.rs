use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::PromptError;

/// Template names in the built-in catalog.
pub mod names {
    pub const PROBLEM_REFLECTION: &str = "problem_reflection";
    pub const EXPERTS_DESIGN: &str = "experts_design";
    pub const LLM_EXPERT_EXECUTION: &str = "llm_expert_execution";
    pub const TOOL_EXPERT_EXECUTION: &str = "tool_expert_execution";
    pub const FINAL_VERIFICATION: &str = "final_verification";
    pub const TASK_GENERATION: &str = "task_generation";
    pub const PUZZLE_BRAINSTORM: &str = "puzzle_brainstorm";
    pub const PROBLEM_VALIDATION: &str = "problem_validation";
    pub const COT_SOLVE: &str = "cot_solve";
    pub const COT_VERIFICATION: &str = "cot_verification";
    pub const PROBLEM_SYNTHESIS: &str = "problem_synthesis";
    pub const CODE_REPAIR: &str = "code_repair";
}

const BUILTIN: &[(&str, &str)] = &[
    (names::PROBLEM_REFLECTION, include_str!("../../prompts/problem_reflection.txt")),
    (names::EXPERTS_DESIGN, include_str!("../../prompts/experts_design.txt")),
    (names::LLM_EXPERT_EXECUTION, include_str!("../../prompts/llm_expert_execution.txt")),
    (names::TOOL_EXPERT_EXECUTION, include_str!("../../prompts/tool_expert_execution.txt")),
    (names::FINAL_VERIFICATION, include_str!("../../prompts/final_verification.txt")),
    (names::TASK_GENERATION, include_str!("../../prompts/task_generation.txt")),
    (names::PUZZLE_BRAINSTORM, include_str!("../../prompts/puzzle_brainstorm.txt")),
    (names::PROBLEM_VALIDATION, include_str!("../../prompts/problem_validation.txt")),
    (names::COT_SOLVE, include_str!("../../prompts/cot_solve.txt")),
    (names::COT_VERIFICATION, include_str!("../../prompts/cot_verification.txt")),
    (names::PROBLEM_SYNTHESIS, include_str!("../../prompts/problem_synthesis.txt")),
    (names::CODE_REPAIR, include_str!("../../prompts/code_repair.txt")),
];

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_][a-z0-9_]*)\}").unwrap())
}

/// A prompt body with `{placeholder}` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        Self { name: name.into(), body: body.into() }
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        placeholder_re()
            .captures_iter(&self.body)
            .map(|c| c[1].to_string())
            .filter(|n| seen.insert(n.clone()))
            .collect()
    }

    /// Substitutes every placeholder in a single pass. Bound values are
    /// inserted literally, so braces inside them are never re-expanded.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
        let map: BTreeMap<&str, &str> = bindings.iter().copied().collect();
        if let Some(missing) = self.placeholders().into_iter().find(|p| !map.contains_key(p.as_str())) {
            return Err(PromptError::MissingBinding(missing));
        }
        Ok(placeholder_re().replace_all(&self.body, |c: &regex::Captures<'_>| map[&c[1]].to_string()).into_owned())
    }
}

/// Free-function form of [`PromptTemplate::render`].
pub fn render(template: &PromptTemplate, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
    template.render(bindings)
}

/// Named collection of prompt templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptCatalog {
    templates: BTreeMap<String, PromptTemplate>,
}

impl Default for PromptCatalog {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptCatalog {
    pub fn builtin() -> Self {
        let templates =
            BUILTIN.iter().map(|(name, body)| (name.to_string(), PromptTemplate::new(*name, *body))).collect();
        Self { templates }
    }

    /// Loads every `*.txt` file in `dir`, keyed by file stem, on top of the built-ins.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let mut catalog = Self::builtin();
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|e| PromptError::Io(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| PromptError::Io(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(name) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let body =
                std::fs::read_to_string(&path).map_err(|e| PromptError::Io(format!("{}: {e}", path.display())))?;
            catalog.insert(PromptTemplate::new(name, body));
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, template: PromptTemplate) {
        self.templates.insert(template.name.clone(), template);
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate, PromptError> {
        self.templates.get(name).ok_or_else(|| PromptError::UnknownTemplate(name.to_string()))
    }

    pub fn render(&self, name: &str, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
        self.get(name)?.render(bindings)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}
