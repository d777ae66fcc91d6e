//! Benchmarks: datasets, answer checkers, evaluation runs and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::TokenUsage;
use crate::hybrid::{slow_pairs, slow_trajectory, HybridController, HybridError, ModeStats, ModeUsed};
use crate::trajectory::{Phase, SolveMode, TrajectoryPair, TrajectoryRecord};
use crate::workflow::WorkflowError;

pub const GAME24_TARGET: i64 = 24;
pub const NUMERIC_REL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checker {
    Exact,
    Numeric,
    #[serde(rename = "game24")]
    GameOf24,
}

impl std::str::FromStr for Checker {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
            "exact" => Ok(Checker::Exact),
            "numeric" => Ok(Checker::Numeric),
            "game24" | "gameof24" => Ok(Checker::GameOf24),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub id: String,
    pub dataset: String,
    pub problem: String,
    /// Expected answer; for Game of 24, the four numbers.
    pub reference: String,
    pub checker: Checker,
}

impl BenchmarkItem {
    pub fn is_correct(&self, answer: &str) -> bool {
        check_answer(self.checker, &self.reference, answer)
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: unknown checker {name:?}")]
    UnknownChecker { line: usize, name: String },
    #[error("bad dataset spec {0:?}")]
    BadSpec(String),
    #[error("no items to evaluate")]
    EmptyDataset,
}

#[derive(Deserialize)]
struct RawItem {
    id: serde_json::Value,
    problem: String,
    reference: serde_json::Value,
    checker: String,
    #[serde(default)]
    dataset: Option<String>,
}

fn value_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(xs) => xs.iter().map(value_text).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// Items of a JSON-lines dataset in file order. The dataset name defaults to the file stem.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<BenchmarkItem>, BenchError> {
    let path = path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
    parse_dataset(&std::fs::read_to_string(path)?, &stem)
}

pub fn parse_dataset(text: &str, default_name: &str) -> Result<Vec<BenchmarkItem>, BenchError> {
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawItem =
            serde_json::from_str(line).map_err(|e| BenchError::ParseError { line: line_no, message: e.to_string() })?;
        let checker: Checker =
            raw.checker.parse().map_err(|name| BenchError::UnknownChecker { line: line_no, name })?;
        let reference = value_text(&raw.reference);
        if checker == Checker::GameOf24 && game24_numbers(&reference).is_none() {
            return Err(BenchError::ParseError {
                line: line_no,
                message: format!("game24 reference needs four positive integers, got {reference:?}"),
            });
        }
        items.push(BenchmarkItem {
            id: value_text(&raw.id),
            dataset: raw.dataset.unwrap_or_else(|| default_name.to_string()),
            problem: raw.problem,
            reference,
            checker,
        });
    }
    Ok(items)
}

/// A file path, or `game24:<seed>,<n>` for generated puzzles.
pub fn load_spec(spec: &str) -> Result<Vec<BenchmarkItem>, BenchError> {
    match spec.strip_prefix("game24:") {
        Some(args) => {
            let (seed, n) = args.split_once(',').ok_or_else(|| BenchError::BadSpec(spec.into()))?;
            let seed = seed.trim().parse().map_err(|_| BenchError::BadSpec(spec.into()))?;
            let n: usize = n.trim().parse().map_err(|_| BenchError::BadSpec(spec.into()))?;
            if n == 0 {
                return Err(BenchError::BadSpec(spec.into()));
            }
            Ok(gen_game24(seed, n))
        }
        None => load_dataset(spec),
    }
}

// ---------------------------------------------------------------- Game of 24

/// Four positive integers from a reference such as `"4 7 8 8"` or `"[4, 7, 8, 8]"`.
pub fn game24_numbers(reference: &str) -> Option<[i64; 4]> {
    let nums: Vec<i64> = reference
        .split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect::<Option<_>>()?;
    let arr: [i64; 4] = nums.try_into().ok()?;
    arr.iter().all(|&n| n > 0).then_some(arr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(i64),
    Op(char),
    Open,
    Close,
}

fn tokenize(s: &str) -> Option<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '0'..='9' => {
                let mut n = c.to_digit(10)? as i64;
                while let Some(d) = chars.peek().and_then(|d| d.to_digit(10)) {
                    n = n.checked_mul(10)?.checked_add(d as i64)?;
                    chars.next();
                }
                out.push(Tok::Num(n));
            }
            '+' | '-' | '*' | '/' => out.push(Tok::Op(c)),
            '×' | 'x' | 'X' => out.push(Tok::Op('*')),
            '÷' => out.push(Tok::Op('/')),
            '−' => out.push(Tok::Op('-')),
            '(' | '[' => out.push(Tok::Open),
            ')' | ']' => out.push(Tok::Close),
            _ => return None,
        }
    }
    Some(out)
}

/// Recursive descent over binary `+ - * /` with parentheses; no unary operators.
struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    literals: Vec<i64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn expr(&mut self) -> Option<Rational64> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.checked_add(&rhs)? } else { acc.checked_sub(&rhs)? };
        }
        Some(acc)
    }

    fn term(&mut self) -> Option<Rational64> {
        let mut acc = self.factor()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if op == '*' {
                acc.checked_mul(&rhs)?
            } else {
                if rhs.is_zero() {
                    return None;
                }
                acc.checked_div(&rhs)?
            };
        }
        Some(acc)
    }

    fn factor(&mut self) -> Option<Rational64> {
        match self.peek()? {
            Tok::Num(n) => {
                self.pos += 1;
                self.literals.push(n);
                Some(Rational64::from_integer(n))
            }
            Tok::Open => {
                self.pos += 1;
                let v = self.expr()?;
                (self.peek()? == Tok::Close).then_some(())?;
                self.pos += 1;
                Some(v)
            }
            _ => None,
        }
    }
}

/// Exact value of an arithmetic expression and the integer literals it uses.
/// `None` for malformed input, overflow or division by zero.
pub fn eval_expression(expr: &str) -> Option<(Rational64, Vec<i64>)> {
    let toks = tokenize(expr)?;
    let mut p = Parser { toks: &toks, pos: 0, literals: Vec::new() };
    let v = p.expr()?;
    (p.pos == toks.len()).then_some((v, p.literals))
}

fn strip_answer_decoration(answer: &str) -> &str {
    let mut s = answer.trim().trim_matches(|c| c == '`' || c == '$').trim();
    // `expr = 24` is accepted; any other equation is not.
    if let Some((lhs, rhs)) = s.rsplit_once('=') {
        if rhs.trim().trim_end_matches('.') == GAME24_TARGET.to_string() {
            s = lhs.trim();
        }
    }
    s.trim_end_matches('.').trim()
}

/// True iff `expression` uses exactly the multiset `numbers` and evaluates to 24.
pub fn check_game24(numbers: [i64; 4], expression: &str) -> bool {
    let Some((value, mut literals)) = eval_expression(strip_answer_decoration(expression)) else {
        return false;
    };
    let mut want = numbers.to_vec();
    literals.sort_unstable();
    want.sort_unstable();
    literals == want && value == Rational64::from_integer(GAME24_TARGET)
}

/// Some expression reaching 24 from `numbers`, by exhaustive search.
pub fn solve_game24(numbers: [i64; 4]) -> Option<String> {
    let start: Vec<(Rational64, String)> =
        numbers.iter().map(|&n| (Rational64::from_integer(n), n.to_string())).collect();
    search(&start)
}

fn search(items: &[(Rational64, String)]) -> Option<String> {
    if items.len() == 1 {
        let (v, e) = &items[0];
        return (*v == Rational64::from_integer(GAME24_TARGET)).then(|| e[1..e.len() - 1].to_string());
    }
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let (a, ea) = &items[i];
            let (b, eb) = &items[j];
            let rest: Vec<(Rational64, String)> =
                items.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, x)| x.clone()).collect();
            let mut candidates = vec![
                (a.checked_add(b), format!("({ea}+{eb})")),
                (a.checked_mul(b), format!("({ea}*{eb})")),
                (a.checked_sub(b), format!("({ea}-{eb})")),
                (b.checked_sub(a), format!("({eb}-{ea})")),
            ];
            if !b.is_zero() {
                candidates.push((a.checked_div(b), format!("({ea}/{eb})")));
            }
            if !a.is_zero() {
                candidates.push((b.checked_div(a), format!("({eb}/{ea})")));
            }
            for (v, e) in candidates {
                let Some(v) = v else { continue };
                let mut next = rest.clone();
                next.push((v, e));
                if let Some(found) = search(&next) {
                    return Some(found);
                }
            }
        }
    }
    None
}

pub fn game24_problem(numbers: [i64; 4]) -> String {
    let [a, b, c, d] = numbers;
    format!(
        "Use the numbers {a}, {b}, {c} and {d} to make 24. Each number must be used exactly once, and only \
         addition, subtraction, multiplication, division and parentheses are allowed. Give your final answer as a \
         bare arithmetic expression that uses exactly these four numbers, for example (1+3)*(2+4), with no \"= 24\" \
         and no other text."
    )
}

/// `n` solvable puzzles with values drawn uniformly from 1..=13, deterministic per `seed`.
pub fn gen_game24(seed: u64, n: usize) -> Vec<BenchmarkItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let nums: [i64; 4] = std::array::from_fn(|_| rng.random_range(1..=13));
        if solve_game24(nums).is_none() {
            continue;
        }
        out.push(BenchmarkItem {
            id: format!("game24-{seed}-{}", out.len()),
            dataset: "game24".into(),
            problem: game24_problem(nums),
            reference: nums.map(|x| x.to_string()).join(" "),
            checker: Checker::GameOf24,
        });
    }
    out
}

// ---------------------------------------------------------------- answers

/// Trimmed, whitespace-collapsed, lowercased, without surrounding quotes or one trailing period.
pub fn normalize_answer(raw: &str) -> String {
    let mut s = raw.trim();
    for q in ['"', '\'', '`'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            s = s[1..s.len() - 1].trim();
        }
    }
    let s = s.strip_suffix('.').unwrap_or(s);
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.replace([',', '$'], "");
    let s = s.trim().trim_end_matches('%');
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (f64, f64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (d != 0.0).then(|| n / d);
    }
    s.parse().ok()
}

pub fn numbers_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= NUMERIC_REL_TOLERANCE * a.abs().max(b.abs())
}

pub fn check_answer(checker: Checker, reference: &str, answer: &str) -> bool {
    match checker {
        Checker::Exact => normalize_answer(reference) == normalize_answer(answer),
        Checker::Numeric => {
            let (r, a) = (normalize_answer(reference), normalize_answer(answer));
            match (parse_number(&r), parse_number(&a)) {
                (Some(x), Some(y)) => numbers_close(x, y),
                _ => r == a,
            }
        }
        Checker::GameOf24 => game24_numbers(reference).is_some_and(|nums| check_game24(nums, answer)),
    }
}

// ---------------------------------------------------------------- evaluation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub item_id: String,
    pub dataset: String,
    pub mode: SolveMode,
    pub correct: bool,
    pub mode_used: ModeUsed,
    pub usage: TokenUsage,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One line of a trajectories file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub eval: EvalRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryRecord>,
}

/// Result of solving one problem in one mode. `answer` is `None` on failure,
/// with the reason in `note`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRun {
    pub answer: Option<String>,
    pub mode_used: ModeUsed,
    pub usage: TokenUsage,
    pub trajectory: Option<TrajectoryRecord>,
    pub note: Option<String>,
}

fn failed_slow(item_id: &str, err: &WorkflowError, mode: SolveMode, mut pairs: Vec<TrajectoryPair>) -> SolveRun {
    let mut usage: TokenUsage = pairs.iter().map(|p| p.exchange.usage).sum();
    let mut trajectory = None;
    if let WorkflowError::AllAttemptsFailed { history, last, .. } = err {
        let slow = slow_pairs(history);
        usage += slow.iter().map(|p| p.exchange.usage).sum();
        pairs.extend(slow);
        trajectory = Some(TrajectoryRecord {
            problem_id: item_id.to_string(),
            mode,
            pairs,
            final_answer: last.as_ref().map(|s| s.final_answer.clone()).unwrap_or_default(),
            verified: false,
            phase: Phase::Slow,
            attempt: history.len() as u32,
        });
    }
    SolveRun { answer: None, mode_used: ModeUsed::Slow, usage, trajectory, note: Some(err.to_string()) }
}

/// Solves `problem` in `mode`. Fast mode is the single chain-of-thought call.
pub fn run_problem(problem_id: &str, problem: &str, mode: SolveMode, controller: &HybridController) -> SolveRun {
    match mode {
        SolveMode::Fast => match controller.fast_thinker().solve(problem) {
            Ok(s) => SolveRun {
                answer: Some(s.answer.clone()),
                mode_used: ModeUsed::Fast,
                usage: s.usage,
                trajectory: Some(TrajectoryRecord {
                    problem_id: problem_id.to_string(),
                    mode,
                    pairs: vec![TrajectoryPair { phase: Phase::Fast, attempt: 1, exchange: s.exchange.clone() }],
                    final_answer: s.answer,
                    verified: false,
                    phase: Phase::Fast,
                    attempt: 1,
                }),
                note: None,
            },
            Err(e) => SolveRun {
                answer: None,
                mode_used: ModeUsed::Fast,
                usage: TokenUsage::ZERO,
                trajectory: None,
                note: Some(e.to_string()),
            },
        },
        SolveMode::Slow => match controller.engine().solve_slow(problem) {
            Ok(s) => SolveRun {
                answer: Some(s.final_answer.clone()),
                mode_used: ModeUsed::Slow,
                usage: s.total_usage(),
                trajectory: Some(slow_trajectory(problem_id, &s)),
                note: None,
            },
            Err(e) => failed_slow(problem_id, &e, mode, Vec::new()),
        },
        SolveMode::Hybrid => match controller.solve(problem) {
            Ok(o) => SolveRun {
                answer: Some(o.answer.clone()),
                mode_used: o.mode_used,
                usage: o.usage,
                trajectory: Some(o.to_trajectory(problem_id)),
                note: None,
            },
            Err(HybridError::Slow { fast, source }) => failed_slow(problem_id, &source, mode, fast.pairs()),
            Err(e @ HybridError::Fast(_)) => SolveRun {
                answer: None,
                mode_used: ModeUsed::Fast,
                usage: TokenUsage::ZERO,
                trajectory: None,
                note: Some(e.to_string()),
            },
        },
    }
}

/// Runs every item in `mode` on up to `jobs` threads. Item failures are
/// recorded as incorrect with a note; the run always completes.
pub fn evaluate(
    items: &[BenchmarkItem],
    mode: SolveMode,
    controller: &HybridController,
    jobs: usize,
) -> Result<Vec<TraceLine>, BenchError> {
    if items.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Io(std::io::Error::other(e)))?;
    let lines = pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let started = Instant::now();
                let solved = run_problem(&item.id, &item.problem, mode, controller);
                let correct = solved.answer.as_deref().is_some_and(|a| item.is_correct(a));
                tracing::info!(item = %item.id, correct, mode_used = %solved.mode_used, "item done");
                TraceLine {
                    eval: EvalRecord {
                        item_id: item.id.clone(),
                        dataset: item.dataset.clone(),
                        mode,
                        correct,
                        mode_used: solved.mode_used,
                        usage: solved.usage,
                        wall_ms: started.elapsed().as_millis() as u64,
                        answer: solved.answer,
                        note: solved.note,
                    },
                    trajectory: solved.trajectory,
                }
            })
            .collect()
    });
    Ok(lines)
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub mode: SolveMode,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub avg_tokens: f64,
    pub usage: TokenUsage,
    pub fast_count: usize,
    pub slow_count: usize,
    pub fast_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// One row per (dataset, mode), sorted by dataset then mode.
    pub rows: Vec<ReportRow>,
}

fn mode_rank(m: SolveMode) -> u8 {
    match m {
        SolveMode::Fast => 0,
        SolveMode::Slow => 1,
        SolveMode::Hybrid => 2,
    }
}

pub fn build_report(records: &[EvalRecord]) -> EvalReport {
    let mut groups: BTreeMap<(String, u8), Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.dataset.clone(), mode_rank(r.mode))).or_default().push(r);
    }
    let rows = groups
        .into_values()
        .map(|rs| {
            let total = rs.len();
            let correct = rs.iter().filter(|r| r.correct).count();
            let usage: TokenUsage = rs.iter().map(|r| r.usage).sum();
            let modes = ModeStats::from_modes(rs.iter().map(|r| r.mode_used));
            ReportRow {
                dataset: rs[0].dataset.clone(),
                mode: rs[0].mode,
                total,
                correct,
                accuracy: correct as f64 / total as f64,
                avg_tokens: usage.total as f64 / total as f64,
                usage,
                fast_count: modes.fast_count,
                slow_count: modes.slow_count,
                fast_ratio: modes.fast_ratio,
            }
        })
        .collect();
    EvalReport { rows }
}

impl EvalReport {
    /// Aligned text table: accuracy in percent, average tokens, fast/slow split.
    pub fn render_table(&self) -> String {
        let header = ["dataset", "mode", "n", "acc(%)", "avg tokens", "fast/slow"];
        let body: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.dataset.clone(),
                    r.mode.to_string(),
                    r.total.to_string(),
                    format!("{:.1}", 100.0 * r.accuracy),
                    format!("{:.1}", r.avg_tokens),
                    r.fast_ratio.map(|f| format!("{:.2}/{:.2}", f, 1.0 - f)).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
        for row in &body {
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(dataset: &str, mode: SolveMode, used: ModeUsed, correct: bool, tokens: u64) -> EvalRecord {
        EvalRecord {
            item_id: "x".into(),
            dataset: dataset.into(),
            mode,
            correct,
            mode_used: used,
            usage: TokenUsage::new(tokens, 0),
            wall_ms: 1,
            answer: None,
            note: None,
        }
    }

    #[test]
    fn dataset_loading() {
        let ok = "{\"id\":1,\"problem\":\"p\",\"reference\":\"a\",\"checker\":\"exact\"}\n\
                  {\"id\":\"b\",\"problem\":\"p\",\"reference\":42,\"checker\":\"numeric\"}\n\
                  {\"id\":\"c\",\"problem\":\"p\",\"reference\":[4,7,8,8],\"checker\":\"game24\"}\n";
        let items = parse_dataset(ok, "bbh").unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(
            (items[0].id.as_str(), items[1].reference.as_str(), items[2].reference.as_str()),
            ("1", "42", "4 7 8 8")
        );
        assert!(items.iter().all(|i| i.dataset == "bbh"));

        let missing = "{\"id\":1,\"problem\":\"p\",\"reference\":\"a\",\"checker\":\"exact\"}\n{\"id\":2,\"problem\":\"p\",\"checker\":\"exact\"}";
        assert!(matches!(parse_dataset(missing, "d"), Err(BenchError::ParseError { line: 2, .. })));
        let fuzzy = "{\"id\":1,\"problem\":\"p\",\"reference\":\"a\",\"checker\":\"fuzzy\"}";
        assert!(matches!(parse_dataset(fuzzy, "d"), Err(BenchError::UnknownChecker { line: 1, .. })));
    }

    #[test]
    fn game24_checks() {
        assert!(check_game24([4, 7, 8, 8], "(7-8/8)*4"));
        assert!(check_game24([6, 6, 6, 6], "6+6+6+6"));
        assert!(!check_game24([4, 7, 8, 8], "4*7-8+8"));
        assert!(check_game24([4, 7, 8, 8], "`(7 - 8 ÷ 8) × 4 = 24`"));
        assert!(!check_game24([4, 7, 8, 8], "(7-8/8)*4*1"));
        assert!(!check_game24([1, 2, 3, 4], "1*2*3*4/(4-4)"));
        assert!(!check_game24([1, 2, 3, 4], "(1+2+3)*4)"));
        assert!(!check_game24([1, 2, 3, 4], "-1+2+3*4"));
        assert_eq!(solve_game24([1, 1, 1, 1]), None);
        assert!(check_game24([3, 3, 8, 8], &solve_game24([3, 3, 8, 8]).unwrap()));
    }

    #[test]
    fn generation_is_seeded() {
        let a = gen_game24(7, 5);
        assert_eq!(a, gen_game24(7, 5));
        assert_ne!(a, gen_game24(8, 5));
        for item in &a {
            let nums = game24_numbers(&item.reference).unwrap();
            assert!(nums.iter().all(|n| (1..=13).contains(n)));
            assert!(item.is_correct(&solve_game24(nums).unwrap()));
        }
        assert!(matches!(load_spec("game24:7"), Err(BenchError::BadSpec(_))));
        assert_eq!(load_spec("game24:7,5").unwrap(), a);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_answer("  TEA COFFEE SUGAR. "), "tea coffee sugar");
        assert_eq!(normalize_answer("\"Yes\""), "yes");
        assert_eq!(normalize_answer(""), "");
        assert!(check_answer(Checker::Numeric, "42", "42.0000001"));
        assert!(!check_answer(Checker::Numeric, "42", "42.01"));
        assert!(check_answer(Checker::Numeric, "0.75", "3/4"));
        assert!(check_answer(Checker::Exact, "Tea, coffee, and sugar", "tea,  coffee, and sugar."));
    }

    #[test]
    fn reports() {
        use ModeUsed::*;
        let recs = vec![
            rec("d", SolveMode::Hybrid, Fast, true, 100),
            rec("d", SolveMode::Hybrid, Fast, false, 200),
            rec("d", SolveMode::Hybrid, Slow, true, 300),
            rec("d", SolveMode::Hybrid, Fast, false, 400),
            rec("e", SolveMode::Fast, Fast, true, 10),
        ];
        let report = build_report(&recs);
        assert_eq!(report.rows.len(), 2);
        let d = &report.rows[0];
        assert_eq!((d.accuracy, d.avg_tokens, d.fast_ratio), (0.5, 250.0, Some(0.75)));
        let three = build_report(&recs[..3]);
        assert_eq!(three.rows[0].avg_tokens, 200.0);
        let table = report.render_table();
        assert!(table.lines().nth(2).unwrap().contains("50.0"));
        assert_eq!(table.lines().count(), 4);
    }

    proptest! {
        #[test]
        fn solver_output_is_accepted(nums in proptest::array::uniform4(1i64..=13)) {
            if let Some(expr) = solve_game24(nums) {
                prop_assert!(check_game24(nums, &expr));
            }
        }

        #[test]
        fn checker_is_total(nums in proptest::array::uniform4(1i64..=13), expr in "[0-9+*/() -]{0,24}") {
            let _ = check_game24(nums, &expr);
        }

        #[test]
        fn report_totals_fold(entries in proptest::collection::vec((any::<bool>(), any::<bool>(), 0u64..10_000), 1..40)) {
            let recs: Vec<EvalRecord> = entries
                .iter()
                .map(|(c, f, t)| rec("d", SolveMode::Hybrid, if *f { ModeUsed::Fast } else { ModeUsed::Slow }, *c, *t))
                .collect();
            let row = &build_report(&recs).rows[0];
            prop_assert_eq!(row.correct, entries.iter().filter(|e| e.0).count());
            prop_assert_eq!(row.usage.total, entries.iter().map(|e| e.2).sum::<u64>());
            prop_assert_eq!(row.fast_count, entries.iter().filter(|e| e.1).count());
        }
    }
}
