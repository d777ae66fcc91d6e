//! Reasoning-problem synthesis: task generation, near-duplicate removal,
//! problem writing and validity gating.
//!
//! ```text
//! seeds (10) -> generate_tasks ┐
//!           brainstorm_puzzles ┴-> dedup_tasks -> synthesize_problems (<=3 each) -> validate_problem
//! ```

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gateway::{Gateway, GatewayError, GenerationParams, DEFAULT_SYNTH_TEMPERATURE};
use crate::jsonl::{self, JsonlError};
use crate::prompt_kit::{extract_block, names, parse_validity, PromptCatalog, PromptError, VerdictValue};

/// Seeds rendered into one task-generation prompt.
pub const SEEDS_PER_PROMPT: usize = 10;
/// Problems requested per task.
pub const PROBLEMS_PER_TASK: usize = 3;
pub const SHINGLE_WORDS: usize = 8;
pub const DUPLICATE_JACCARD: f64 = 0.7;

const BUNDLED_SEEDS: &str = include_str!("../data/seed_tasks.jsonl");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskSource {
    /// Hand-written example task used to prompt generation.
    #[default]
    Seed,
    SeedInspired,
    PuzzleBrainstorm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDescription {
    /// Derived from the text when absent on disk.
    #[serde(default)]
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub source: TaskSource,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn short_hash(s: &str) -> String {
    hex::encode(&Sha256::digest(s.as_bytes())[..6])
}

impl TaskDescription {
    /// Single-line task; the id is a hash of the text.
    pub fn new(text: &str, source: TaskSource) -> Self {
        let text = collapse_ws(text);
        Self { id: format!("task-{}", short_hash(&text)), text, source }
    }

    fn filled(self) -> Self {
        let mut t = Self::new(&self.text, self.source);
        if !self.id.is_empty() {
            t.id = self.id;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemStatus {
    Unvalidated,
    Valid,
    Invalid,
    Rewritten,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesizedProblem {
    pub id: String,
    pub task_id: String,
    /// Current text; for `Rewritten` this is the replacement.
    pub text: String,
    pub status: ProblemStatus,
    /// Text before a rewrite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_text: Option<String>,
}

impl SynthesizedProblem {
    pub fn is_exportable(&self) -> bool {
        matches!(self.status, ProblemStatus::Valid | ProblemStatus::Rewritten)
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("task generation needs exactly {SEEDS_PER_PROMPT} seeds, got {0}")]
    WrongSeedCount(usize),
    #[error("the reply contained nothing usable")]
    EmptyGeneration,
    #[error("problem {0} was already validated")]
    AlreadyValidated(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

/// The ten bundled example tasks.
pub fn bundled_seeds() -> Vec<TaskDescription> {
    jsonl::read_from::<TaskDescription>(BUNDLED_SEEDS.as_bytes())
        .expect("bundled seeds parse")
        .into_iter()
        .map(TaskDescription::filled)
        .collect()
}

/// Tasks from a JSON-lines file; records may carry only `text`.
pub fn load_tasks(path: impl AsRef<Path>) -> Result<Vec<TaskDescription>, SynthError> {
    Ok(jsonl::read::<TaskDescription>(path)?.into_iter().map(TaskDescription::filled).collect())
}

/// `SEEDS_PER_PROMPT` seeds drawn without replacement, deterministic per `seed`.
/// Returns the whole pool when it is smaller.
pub fn sample_seeds(pool: &[TaskDescription], seed: u64) -> Vec<TaskDescription> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.choose_multiple(&mut rng, SEEDS_PER_PROMPT).cloned().collect()
}

fn list_prefix_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^(?:[-*•]+\s*|(?:task|puzzle)?\s*#?\d{1,3}\s*[.):\]-]\s*|(?:task|puzzle)\s+\d{1,3}\s*)+")
            .unwrap()
    })
}

/// One task per line; list markers and numbering are stripped, empty lines dropped.
pub fn parse_task_lines(reply: &str) -> Vec<String> {
    reply
        .lines()
        .map(|l| {
            let l = l.trim();
            let l = list_prefix_re().replace(l, "");
            collapse_ws(l.trim().trim_matches('*').trim())
        })
        .filter(|l| !l.is_empty() && l.chars().any(char::is_alphabetic))
        .collect()
}

/// Synthesis calls: catalog plus sampling parameters.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    gateway: Gateway,
    catalog: Arc<PromptCatalog>,
    params: GenerationParams,
}

impl Synthesizer {
    /// Samples at the synthesis temperature.
    pub fn new(gateway: Gateway) -> Self {
        Self {
            gateway,
            catalog: Arc::new(PromptCatalog::builtin()),
            params: GenerationParams::default().with_temperature(DEFAULT_SYNTH_TEMPERATURE),
        }
    }

    pub fn with_catalog(mut self, catalog: Arc<PromptCatalog>) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    fn ask(&self, prompt: String) -> Result<String, SynthError> {
        Ok(self.gateway.complete(&self.params.user_request(prompt))?.text)
    }

    pub fn generate_tasks(&self, seeds: &[TaskDescription]) -> Result<Vec<TaskDescription>, SynthError> {
        if seeds.len() != SEEDS_PER_PROMPT {
            return Err(SynthError::WrongSeedCount(seeds.len()));
        }
        let examples = seeds.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join("\n");
        let reply = self.ask(self.catalog.render(names::TASK_GENERATION, &[("example_tasks", &examples)])?)?;
        tasks_from(&reply, TaskSource::SeedInspired)
    }

    pub fn brainstorm_puzzles(&self) -> Result<Vec<TaskDescription>, SynthError> {
        let reply = self.ask(self.catalog.render(names::PUZZLE_BRAINSTORM, &[])?)?;
        tasks_from(&reply, TaskSource::PuzzleBrainstorm)
    }

    pub fn synthesize_problems(&self, task: &TaskDescription) -> Result<Vec<SynthesizedProblem>, SynthError> {
        let reply = self.ask(self.catalog.render(names::PROBLEM_SYNTHESIS, &[("task_description", &task.text)])?)?;
        let problems: Vec<SynthesizedProblem> = parse_problem_blocks(&reply)
            .into_iter()
            .take(PROBLEMS_PER_TASK)
            .enumerate()
            .map(|(i, text)| SynthesizedProblem {
                id: format!("{}-p{}", task.id, i + 1),
                task_id: task.id.clone(),
                text,
                status: ProblemStatus::Unvalidated,
                original_text: None,
            })
            .collect();
        if problems.is_empty() {
            return Err(SynthError::EmptyGeneration);
        }
        Ok(problems)
    }

    pub fn validate_problem(&self, problem: &SynthesizedProblem) -> Result<SynthesizedProblem, SynthError> {
        if problem.status != ProblemStatus::Unvalidated {
            return Err(SynthError::AlreadyValidated(problem.id.clone()));
        }
        let reply = self.ask(self.catalog.render(names::PROBLEM_VALIDATION, &[("problem", &problem.text)])?)?;
        Ok(apply_validity(problem, &reply))
    }

    /// Problems for every task, tasks handled in parallel. Tasks whose reply
    /// yields nothing are skipped; other errors abort.
    pub fn synthesize_all(&self, tasks: &[TaskDescription]) -> Result<Vec<SynthesizedProblem>, SynthError> {
        let per_task: Vec<Result<Vec<SynthesizedProblem>, SynthError>> =
            tasks.par_iter().map(|t| self.synthesize_problems(t)).collect();
        let mut out = Vec::new();
        for (task, r) in tasks.iter().zip(per_task) {
            match r {
                Ok(ps) => out.extend(ps),
                Err(SynthError::EmptyGeneration) => tracing::warn!(task = %task.id, "no problems parsed"),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    pub fn validate_all(&self, problems: &[SynthesizedProblem]) -> Result<Vec<SynthesizedProblem>, SynthError> {
        problems.par_iter().map(|p| self.validate_problem(p)).collect()
    }

    /// Generation, dedup, synthesis and validation end to end.
    pub fn run_funnel(&self, seeds: &[TaskDescription], include_puzzles: bool) -> Result<Funnel, SynthError> {
        let mut generated = self.generate_tasks(seeds)?;
        if include_puzzles {
            generated.extend(self.brainstorm_puzzles()?);
        }
        let tasks = dedup_tasks(&generated);
        let synthesized = self.synthesize_all(&tasks)?;
        let problems = self.validate_all(&synthesized)?;
        Ok(Funnel { generated: generated.len(), tasks, problems })
    }
}

fn tasks_from(reply: &str, source: TaskSource) -> Result<Vec<TaskDescription>, SynthError> {
    let tasks: Vec<TaskDescription> = parse_task_lines(reply).iter().map(|t| TaskDescription::new(t, source)).collect();
    if tasks.is_empty() {
        return Err(SynthError::EmptyGeneration);
    }
    Ok(tasks)
}

/// Payloads of `Problem 1`, `Problem 2`, ... blocks, stopping at the first gap.
pub fn parse_problem_blocks(reply: &str) -> Vec<String> {
    (1..)
        .map_while(|n| extract_block(reply, &format!("Problem {n}")).ok())
        .map(|b| b.payload.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn is_placeholder(rewrite: &str) -> bool {
    let t = rewrite.trim();
    t.is_empty() || t.eq_ignore_ascii_case("[new problem]")
}

/// Status from a validation reply: VALID, INVALID with a rewrite, or INVALID.
/// Replies with neither token count as INVALID.
pub fn apply_validity(problem: &SynthesizedProblem, reply: &str) -> SynthesizedProblem {
    let v = parse_validity(reply);
    let mut out = problem.clone();
    match (v.verdict.value, v.rewrite) {
        (VerdictValue::Yes, _) => out.status = ProblemStatus::Valid,
        (VerdictValue::No, Some(rewrite)) if !is_placeholder(&rewrite) => {
            out.original_text = Some(std::mem::replace(&mut out.text, rewrite.trim().to_string()));
            out.status = ProblemStatus::Rewritten;
        }
        _ => out.status = ProblemStatus::Invalid,
    }
    out
}

/// Word 8-shingles of lowercased, whitespace-split text. Texts shorter than
/// eight words give a single shingle of all their words.
pub fn shingles(text: &str) -> HashSet<String> {
    let words: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
    if words.is_empty() {
        return HashSet::new();
    }
    if words.len() < SHINGLE_WORDS {
        return HashSet::from([words.join(" ")]);
    }
    words.windows(SHINGLE_WORDS).map(|w| w.join(" ")).collect()
}

pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Removes every task whose shingle Jaccard similarity with any earlier task
/// is at least 0.7. Candidate pairs come from an inverted shingle index.
pub fn dedup_tasks(tasks: &[TaskDescription]) -> Vec<TaskDescription> {
    let sets: Vec<HashSet<String>> = tasks.iter().map(|t| shingles(&t.text)).collect();
    let mut index: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut keep = Vec::new();
    for (j, set) in sets.iter().enumerate() {
        let mut shared: HashMap<usize, usize> = HashMap::new();
        for s in set {
            for &i in index.get(s.as_str()).into_iter().flatten() {
                *shared.entry(i).or_default() += 1;
            }
        }
        let duplicate = shared.iter().any(|(&i, &inter)| {
            let union = sets[i].len() + set.len() - inter;
            inter as f64 / union as f64 >= DUPLICATE_JACCARD
        });
        if duplicate {
            tracing::debug!(task = %tasks[j].id, "near duplicate removed");
        } else {
            keep.push(tasks[j].clone());
        }
        for s in set {
            index.entry(s.as_str()).or_default().push(j);
        }
    }
    keep
}

/// Counts through the synthesis funnel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub generated: usize,
    pub tasks: Vec<TaskDescription>,
    pub problems: Vec<SynthesizedProblem>,
}

impl Funnel {
    pub fn exportable(&self) -> impl Iterator<Item = &SynthesizedProblem> {
        self.problems.iter().filter(|p| p.is_exportable())
    }
}

pub fn generate_tasks(seeds: &[TaskDescription], gateway: &Gateway) -> Result<Vec<TaskDescription>, SynthError> {
    Synthesizer::new(gateway.clone()).generate_tasks(seeds)
}

pub fn brainstorm_puzzles(gateway: &Gateway) -> Result<Vec<TaskDescription>, SynthError> {
    Synthesizer::new(gateway.clone()).brainstorm_puzzles()
}

pub fn synthesize_problems(task: &TaskDescription, gateway: &Gateway) -> Result<Vec<SynthesizedProblem>, SynthError> {
    Synthesizer::new(gateway.clone()).synthesize_problems(task)
}

pub fn validate_problem(problem: &SynthesizedProblem, gateway: &Gateway) -> Result<SynthesizedProblem, SynthError> {
    Synthesizer::new(gateway.clone()).validate_problem(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{make_scripted_backend, Matcher, ScriptedBackend};
    use proptest::prelude::*;

    fn gw(reply: &str) -> (Arc<ScriptedBackend>, Gateway) {
        let b = Arc::new(make_scripted_backend([(Matcher::Any, reply.to_string())]).unwrap());
        (b.clone(), Gateway::new(b))
    }

    fn task(text: &str) -> TaskDescription {
        TaskDescription::new(text, TaskSource::SeedInspired)
    }

    fn unvalidated(text: &str) -> SynthesizedProblem {
        SynthesizedProblem {
            id: "p".into(),
            task_id: "t".into(),
            text: text.into(),
            status: ProblemStatus::Unvalidated,
            original_text: None,
        }
    }

    #[test]
    fn bundled_seeds_fill_one_prompt() {
        let seeds = bundled_seeds();
        assert_eq!(seeds.len(), SEEDS_PER_PROMPT);
        assert!(seeds.iter().all(|s| s.id.starts_with("task-") && s.source == TaskSource::Seed));
        assert_eq!(sample_seeds(&seeds, 3), sample_seeds(&seeds, 3));
    }

    #[test]
    fn task_lines() {
        let reply = "1. Decode a cipher.\n\n2) Rank the runners.\n- Count the cubes\n3.\nTask 4: Route the trains";
        assert_eq!(
            parse_task_lines(reply),
            vec!["Decode a cipher.", "Rank the runners.", "Count the cubes", "Route the trains"]
        );
    }

    #[test]
    fn generation() {
        let ten: String = (1..=10).map(|i| format!("{i}. Task number {i} about topic {i}\n")).collect();
        let (backend, g) = gw(&ten);
        let tasks = generate_tasks(&bundled_seeds(), &g).unwrap();
        assert_eq!(tasks.len(), 10);
        assert_eq!(tasks[0].text, "Task number 1 about topic 1");
        assert_eq!(backend.call_count(), 1);
        let req = &backend.requests()[0];
        assert_eq!(req.temperature, DEFAULT_SYNTH_TEMPERATURE);
        assert!(req.last_user_message().unwrap().contains(&bundled_seeds()[9].text));

        assert!(matches!(generate_tasks(&bundled_seeds()[..3], &g), Err(SynthError::WrongSeedCount(3))));
        let (_, empty) = gw("  \n\n");
        assert!(matches!(generate_tasks(&bundled_seeds(), &empty), Err(SynthError::EmptyGeneration)));
    }

    #[test]
    fn puzzles_are_tagged() {
        let (_, g) = gw("a\nb\nc\nd\ne\nf\ng");
        let puzzles = brainstorm_puzzles(&g).unwrap();
        assert_eq!(puzzles.len(), 7);
        assert!(puzzles.iter().all(|p| p.source == TaskSource::PuzzleBrainstorm));
    }

    #[test]
    fn problem_blocks() {
        let reply = "### Problem 1 Start ###\nA?\n### Problem 1 End ###\n### Problem 2 Start ###\nB?\n### Problem 2 End ###\n\
                     ### Problem 3 Start ###\nC?\n### Problem 3 End ###\n### Problem 4 Start ###\nD?\n### Problem 4 End ###";
        let (_, g) = gw(reply);
        let t = task("Interpret a Morse code message");
        let ps = synthesize_problems(&t, &g).unwrap();
        assert_eq!(ps.iter().map(|p| p.text.as_str()).collect::<Vec<_>>(), vec!["A?", "B?", "C?"]);
        assert!(ps.iter().all(|p| p.status == ProblemStatus::Unvalidated && p.task_id == t.id));
        let (_, one) = gw("### Problem 1 Start ###\nOnly\n### Problem 1 End ###");
        assert_eq!(synthesize_problems(&t, &one).unwrap().len(), 1);
        let (_, none) = gw("I cannot.");
        assert!(matches!(synthesize_problems(&t, &none), Err(SynthError::EmptyGeneration)));
    }

    #[test]
    fn validity_statuses() {
        let p = unvalidated("Old?");
        assert_eq!(apply_validity(&p, "Fine.\n## VALID ##").status, ProblemStatus::Valid);
        let r = apply_validity(
            &p,
            "Ambiguous.\n## INVALID ##\n### New Valid Problem Start ###\nNew?\n### New Valid Problem End ###",
        );
        assert_eq!(
            (r.status, r.text.as_str(), r.original_text.as_deref()),
            (ProblemStatus::Rewritten, "New?", Some("Old?"))
        );
        assert_eq!(apply_validity(&p, "## INVALID ##").status, ProblemStatus::Invalid);
        assert_eq!(apply_validity(&p, "no idea").status, ProblemStatus::Invalid);
        let (_, g) = gw("## VALID ##");
        let v = validate_problem(&p, &g).unwrap();
        assert!(matches!(validate_problem(&v, &g), Err(SynthError::AlreadyValidated(_))));
    }

    #[test]
    fn dedup_examples() {
        let a = task("Find the shortest route that visits every city on the given map exactly once");
        let b = task("Find  the shortest route that visits\tevery city on the given map exactly once");
        let c = task("Determine which weights balance the scale when two pans hold unequal loads of sand");
        let out = dedup_tasks(&[a.clone(), b, c.clone()]);
        assert_eq!(out, vec![a, c]);
    }

    proptest! {
        #[test]
        fn dedup_is_idempotent_subsequence(
            texts in proptest::collection::vec(proptest::collection::vec(0u8..6, 6..14), 0..24)
        ) {
            let tasks: Vec<TaskDescription> = texts
                .iter()
                .map(|ws| task(&ws.iter().map(|w| format!("w{w}")).collect::<Vec<_>>().join(" ")))
                .collect();
            let once = dedup_tasks(&tasks);
            prop_assert_eq!(dedup_tasks(&once), once.clone());
            let mut it = tasks.iter();
            for kept in &once {
                prop_assert!(it.any(|t| t == kept));
            }
        }

        #[test]
        fn validation_is_total(reply in ".{0,200}") {
            let s = apply_validity(&unvalidated("Q?"), &reply).status;
            prop_assert!(matches!(s, ProblemStatus::Valid | ProblemStatus::Invalid | ProblemStatus::Rewritten));
        }
    }
}
