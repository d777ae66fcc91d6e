use serde::{Deserialize, Serialize};

use super::design::{design_payload, ensure_final_reviewer, ensure_unique, parse_design, ExpertDesign, ExpertSpec};
use super::reflection::{parse_reflection, ProblemReflection};
use super::{WorkflowEngine, WorkflowError, WorkflowGraph};
use crate::executor::{ExecutionOutcome, ExecutionRequest};
use crate::gateway::{ChatMessage, TokenUsage};
use crate::prompt_kit::{
    extract_block_or_whole, extract_code, names, parse_final_evaluation, wrap_block, ExpertType, PromptError, Verdict,
    PYTHON_CODE,
};
use crate::trajectory::{converse, Exchange, Stage};

pub const MY_FINAL_OUTPUT: &str = "My Final Output";
pub const PYTHON_EXECUTION_RESULT: &str = "Python Execution Result";

const HOW_TO_READ_INPUT: &str = "The input data is contained in the experts' results above. Write any values the \
code needs directly into the code as Python literals; the code cannot read the other experts' outputs from files.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeAttempt {
    pub code: String,
    pub outcome: ExecutionOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertResult {
    pub expert_name: String,
    pub expert_type: ExpertType,
    /// Extracted output handed to later experts.
    pub output: String,
    /// Transcript shown to later experts: the reply for LLM experts, the code
    /// and its execution result for Tool experts.
    pub raw: String,
    /// False when an LLM expert's reply had no complete output block.
    pub output_complete: bool,
    pub usage: TokenUsage,
    pub code_attempts: Vec<CodeAttempt>,
    pub exchanges: Vec<Exchange>,
}

impl ExpertResult {
    fn section(&self, compact: bool) -> String {
        let body = if compact { wrap_block(MY_FINAL_OUTPUT, &self.output) } else { self.raw.clone() };
        format!("===== {} =====\n{}", self.expert_name, body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentReport {
    pub verdict: Verdict,
    pub raw: String,
    pub usage: TokenUsage,
    pub exchange: Exchange,
}

/// Prompt inputs shared by every expert of one attempt.
pub(crate) struct Context<'a> {
    pub problem: &'a str,
    pub reflection: &'a str,
    pub design: &'a str,
}

/// Results of `prior` as one text, the first `compact` of them reduced to
/// their extracted outputs.
fn results_text(prior: &[ExpertResult], compact: usize) -> String {
    if prior.is_empty() {
        return "None".into();
    }
    prior.iter().enumerate().map(|(i, r)| r.section(i < compact)).collect::<Vec<_>>().join("\n\n")
}

fn tool_transcript(code: &str, stdout: &str) -> String {
    format!("{}\n\n{}", wrap_block(PYTHON_CODE, &format!("\n{code}\n")), wrap_block(PYTHON_EXECUTION_RESULT, stdout))
}

fn trim_line_ends(s: &str) -> &str {
    s.trim_end_matches(['\n', '\r'])
}

impl WorkflowEngine {
    /// Renders `template` with `results` bound under `results_key`, compacting
    /// the oldest results until the prompt fits the context budget.
    fn render_with_results(
        &self,
        template: &str,
        bindings: &[(&str, &str)],
        results_key: &str,
        prior: &[ExpertResult],
    ) -> Result<String, PromptError> {
        let budget = self.settings.context_budget_chars;
        let mut compact = 0;
        loop {
            let results = results_text(prior, compact);
            let mut all = bindings.to_vec();
            all.push((results_key, &results));
            let prompt = self.catalog.render(template, &all)?;
            if prompt.chars().count() <= budget || compact >= prior.len() {
                if compact > 0 {
                    tracing::debug!(compact, "compacted earlier expert transcripts to fit the context budget");
                }
                return Ok(prompt);
            }
            compact += 1;
        }
    }

    fn call(
        &self,
        messages: Vec<ChatMessage>,
        stage: Stage,
        expert: Option<&str>,
        log: &mut Vec<Exchange>,
    ) -> Result<Exchange, WorkflowError> {
        let exchange = converse(&self.gateway, &self.params, messages, stage, expert)?;
        log.push(exchange.clone());
        Ok(exchange)
    }

    pub(crate) fn reflect_with(
        &self,
        problem: &str,
        nudge: Option<&str>,
        log: &mut Vec<Exchange>,
    ) -> Result<ProblemReflection, WorkflowError> {
        if problem.trim().is_empty() {
            return Err(WorkflowError::EmptyProblem);
        }
        let mut prompt = self.catalog.render(names::PROBLEM_REFLECTION, &[("task_problem", problem)])?;
        if let Some(nudge) = nudge {
            prompt.push_str("\n\n");
            prompt.push_str(nudge);
        }
        let exchange = self.call(vec![ChatMessage::user(prompt)], Stage::Reflection, None, log)?;
        let (restatement, subtasks) = parse_reflection(&exchange.answer).ok_or(WorkflowError::NoSubtasksParsed)?;
        Ok(ProblemReflection {
            restatement,
            subtasks,
            raw: exchange.answer.clone(),
            usage: exchange.usage,
            exchange: Some(exchange),
        })
    }

    pub(crate) fn design_with(
        &self,
        problem: &str,
        reflection: &ProblemReflection,
        log: &mut Vec<Exchange>,
    ) -> Result<ExpertDesign, WorkflowError> {
        let prompt = self
            .catalog
            .render(names::EXPERTS_DESIGN, &[("task_problem", problem), ("problem_reflection", &reflection.text())])?;
        let exchange = self.call(vec![ChatMessage::user(prompt)], Stage::ExpertDesign, None, log)?;
        let mut text = design_payload(&exchange.answer);
        let mut experts = parse_design(&text).map_err(WorkflowError::Design)?;
        ensure_unique(&experts)?;
        let appended = ensure_final_reviewer(&mut experts);
        if let Some(reviewer) = &appended {
            text.push_str("\n\n");
            text.push_str(&reviewer.render());
        }
        let designed = experts.len() - usize::from(appended.is_some());
        if designed != reflection.subtasks.len() {
            tracing::warn!(
                experts = designed,
                subtasks = reflection.subtasks.len(),
                "expert count differs from sub-task count"
            );
        }
        Ok(ExpertDesign {
            experts,
            text,
            raw: exchange.answer.clone(),
            appended_reviewer: appended.is_some(),
            usage: exchange.usage,
            exchange: Some(exchange),
        })
    }

    pub(crate) fn execute_with(
        &self,
        graph: &WorkflowGraph,
        problem: &str,
        reflection: &ProblemReflection,
        design_text: &str,
        log: &mut Vec<Exchange>,
    ) -> Result<Vec<ExpertResult>, WorkflowError> {
        graph.validate()?;
        let reflection_text = reflection.text();
        let ctx = Context { problem, reflection: &reflection_text, design: design_text };
        let mut results: Vec<ExpertResult> = Vec::with_capacity(graph.len());
        for idx in graph.order() {
            let spec = &graph.experts[idx];
            let result = match spec.card.expert_type {
                ExpertType::Llm => self.llm_expert_with(spec, &ctx, &results, log),
                ExpertType::Tool => self.tool_expert_with(spec, &ctx, &results, log),
            };
            let result = result.map_err(|e| match e {
                e @ WorkflowError::ExpertFailed { .. } => e,
                e if e.is_rerunnable() => {
                    WorkflowError::ExpertFailed { name: spec.card.name.clone(), cause: Box::new(e) }
                }
                e => e,
            })?;
            tracing::debug!(expert = %result.expert_name, output = %result.output, "expert finished");
            results.push(result);
        }
        Ok(results)
    }

    fn llm_expert_with(
        &self,
        spec: &ExpertSpec,
        ctx: &Context<'_>,
        prior: &[ExpertResult],
        log: &mut Vec<Exchange>,
    ) -> Result<ExpertResult, WorkflowError> {
        let output_type = spec.card.output_type.trim();
        let data_type_instruction = if output_type.is_empty() || output_type.eq_ignore_ascii_case("none") {
            String::new()
        } else {
            format!(" Your final output should be of type {output_type}.")
        };
        let prompt = self.render_with_results(
            names::LLM_EXPERT_EXECUTION,
            &[
                ("original_problem", ctx.problem),
                ("problem_reflection", ctx.reflection),
                ("name", &spec.card.name),
                ("role", &spec.description),
                ("experts_design", ctx.design),
                ("data_type_instruction", &data_type_instruction),
            ],
            "input_data",
            prior,
        )?;
        let exchange = self.call(vec![ChatMessage::user(prompt)], Stage::LlmExpert, Some(&spec.card.name), log)?;
        let block = extract_block_or_whole(&exchange.answer, MY_FINAL_OUTPUT);
        Ok(ExpertResult {
            expert_name: spec.card.name.clone(),
            expert_type: ExpertType::Llm,
            output: block.payload.trim().to_string(),
            raw: exchange.answer.trim().to_string(),
            output_complete: block.complete,
            usage: exchange.usage,
            code_attempts: Vec::new(),
            exchanges: vec![exchange],
        })
    }

    pub(crate) fn tool_expert_with(
        &self,
        spec: &ExpertSpec,
        ctx: &Context<'_>,
        prior: &[ExpertResult],
        log: &mut Vec<Exchange>,
    ) -> Result<ExpertResult, WorkflowError> {
        let name = spec.card.name.as_str();
        let failed =
            |cause: WorkflowError| WorkflowError::ExpertFailed { name: name.to_string(), cause: Box::new(cause) };
        if spec.card.expert_type != ExpertType::Tool {
            return Err(failed(WorkflowError::InvalidGraph(format!("{name} is not a Tool expert"))));
        }
        let prompt = self.render_with_results(
            names::TOOL_EXPERT_EXECUTION,
            &[
                ("original_problem", ctx.problem),
                ("problem_reflection", ctx.reflection),
                ("name", name),
                ("role", &spec.description),
                ("experts_design", ctx.design),
                ("input_type", &spec.card.input_type),
                ("output_type", &spec.card.output_type),
                ("how_to_read_input", HOW_TO_READ_INPUT),
            ],
            "input_data",
            prior,
        )?;

        let max = self.settings.max_code_attempts.max(1);
        let mut attempts: Vec<CodeAttempt> = Vec::new();
        let mut exchanges = Vec::new();
        let mut messages = vec![ChatMessage::user(prompt.clone())];
        for n in 1..=max {
            let stage = if n == 1 { Stage::ToolExpert } else { Stage::CodeRepair };
            let exchange = self.call(messages.clone(), stage, Some(name), log)?;
            let reply = exchange.answer.clone();
            exchanges.push(exchange);

            let attempt = match extract_code(&reply) {
                Ok(code) => {
                    let request = ExecutionRequest::new(code.clone()).with_timeout(self.settings.code_timeout_s);
                    let outcome = self.executor.execute(&request)?;
                    CodeAttempt { code, outcome }
                }
                Err(e) => CodeAttempt { code: String::new(), outcome: ExecutionOutcome::failed(e.to_string(), 1) },
            };
            let ok = attempt.outcome.succeeded();
            let error_message = attempt.outcome.error_message();
            attempts.push(attempt);
            if ok {
                let last = attempts.last().expect("just pushed");
                let output = trim_line_ends(&last.outcome.stdout).to_string();
                let raw = tool_transcript(&last.code, &output);
                return Ok(ExpertResult {
                    expert_name: name.to_string(),
                    expert_type: ExpertType::Tool,
                    output,
                    raw,
                    output_complete: true,
                    usage: exchanges.iter().map(|e| e.usage).sum(),
                    code_attempts: attempts,
                    exchanges,
                });
            }
            tracing::debug!(expert = name, attempt = n, "code failed: {error_message}");
            let repair = self.catalog.render(names::CODE_REPAIR, &[("error_message", &error_message)])?;
            messages =
                vec![ChatMessage::user(prompt.clone()), ChatMessage::assistant(reply), ChatMessage::user(repair)];
        }
        Err(failed(WorkflowError::RepairExhausted(max)))
    }

    pub(crate) fn judge_with(
        &self,
        ctx: &Context<'_>,
        results: &[ExpertResult],
        log: &mut Vec<Exchange>,
    ) -> Result<JudgmentReport, WorkflowError> {
        let final_expert = results.last().map(|r| r.expert_name.as_str()).unwrap_or("final expert");
        let prompt = self.render_with_results(
            names::FINAL_VERIFICATION,
            &[
                ("task_problem", ctx.problem),
                ("problem_reflection", ctx.reflection),
                ("experts_design", ctx.design),
                ("final_expert", final_expert),
            ],
            "experts_results",
            results,
        )?;
        let exchange = self.call(vec![ChatMessage::user(prompt)], Stage::Judgment, None, log)?;
        Ok(JudgmentReport {
            verdict: parse_final_evaluation(&exchange.answer),
            raw: exchange.answer.clone(),
            usage: exchange.usage,
            exchange,
        })
    }
}
