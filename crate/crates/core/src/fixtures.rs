//! Scripted transcripts for offline runs: the Morse code decoding solve, and
//! a small arithmetic suite for exercising the hybrid router.
//!
//! Matchers key on phrases that only occur in one prompt template, so a
//! single script can answer every stage of a solve in any order.

use std::collections::HashMap;

use crate::executor::{fingerprint, ExecutionOutcome, TableExecutor};
use crate::gateway::{Matcher, ScriptEntry, ScriptedBackend};
use crate::prompt_kit::{wrap_block, ExpertCard, ExpertType};

/// Phrases that identify each prompt template in a request.
pub mod cues {
    pub const REFLECTION: &str = "conduct the \"Problem Reflection\"";
    pub const DESIGN: &str = "do \"Specialized Experts Design\"";
    pub const JUDGMENT: &str = "evaluate whether the final output of the";
    pub const FAST_SOLVE: &str = "Solve the above problem. Reason step by step";
    pub const FAST_VERIFY: &str = "Review the proposed solution above one step at a time";
    pub const CODE_REPAIR: &str = "Running your code failed.";

    /// Phrase identifying the execution prompt of the named expert.
    pub fn expert(name: &str) -> String {
        format!("Please act as {name}. Your role:")
    }
}

pub fn reflection(problem_marker: &str) -> Matcher {
    Matcher::all_of([cues::REFLECTION, problem_marker])
}

pub fn design(problem_marker: &str) -> Matcher {
    Matcher::all_of([cues::DESIGN, problem_marker])
}

pub fn expert(problem_marker: &str, name: &str) -> Matcher {
    Matcher::all_of([cues::expert(name), problem_marker.to_string()])
}

pub fn judgment(problem_marker: &str) -> Matcher {
    Matcher::all_of([cues::JUDGMENT, problem_marker])
}

pub fn fast_solve(problem_marker: &str) -> Matcher {
    Matcher::all_of([cues::FAST_SOLVE, problem_marker])
}

pub fn fast_verify(problem_marker: &str) -> Matcher {
    Matcher::all_of([cues::FAST_VERIFY, problem_marker])
}

/// The Morse code transcript: five experts, one of them a Python tool.
pub mod morse {
    use super::*;

    pub const PROBLEM: &str = include_str!("../fixtures/morse_trace/problem.txt");
    pub const REFLECTION: &str = include_str!("../fixtures/morse_trace/reflection.txt");
    pub const DESIGN: &str = include_str!("../fixtures/morse_trace/design.txt");
    pub const TOOL_REPLY: &str = include_str!("../fixtures/morse_trace/expert3_reply.txt");
    pub const TOOL_CODE: &str = include_str!("../fixtures/morse_trace/expert3_code.py");
    pub const TOOL_TRANSCRIPT: &str = include_str!("../fixtures/morse_trace/expert3_transcript.txt");
    pub const JUDGMENT: &str = include_str!("../fixtures/morse_trace/judgment.txt");
    pub const TOOL_STDOUT: &str = "['TEA', 'COFFEE', 'SUGAR']\n";
    pub const FINAL_ANSWER: &str = "Tea, coffee, and sugar";
    /// Substring of the problem used to scope matchers to this solve.
    pub const MARKER: &str = "An encrypted Morse code message";

    /// Expert names with their replies, in chain order.
    pub const EXPERTS: [(&str, &str); 5] = [
        ("Morse Code Dictionary Creation Expert", include_str!("../fixtures/morse_trace/expert1_dictionary.txt")),
        ("Morse Code Parsing Expert", include_str!("../fixtures/morse_trace/expert2_parsing.txt")),
        ("Python Expert of Translation", TOOL_REPLY),
        ("Message Reconstruction Expert", include_str!("../fixtures/morse_trace/expert4_reconstruction.txt")),
        ("Final Review and Presentation Expert", include_str!("../fixtures/morse_trace/expert5_review.txt")),
    ];

    /// Reusable script entries answering every stage of the slow solve.
    pub fn script() -> Vec<ScriptEntry> {
        let mut entries =
            vec![ScriptEntry::new(reflection(MARKER), REFLECTION), ScriptEntry::new(design(MARKER), DESIGN)];
        entries.extend(EXPERTS.iter().map(|(name, reply)| ScriptEntry::new(expert(MARKER, name), *reply)));
        entries.push(ScriptEntry::new(judgment(MARKER), JUDGMENT));
        entries
    }

    /// A chain-of-thought answer with a misspelled item, rejected by its verification.
    pub fn fast_script() -> Vec<ScriptEntry> {
        vec![
            ScriptEntry::new(
                fast_solve(MARKER),
                "Step 1: Split the code into words: `- . .-`, `-.-. --- ..-. ..-. . .`, `... ..- --. .- .-.`.\n\
                 Step 2: Decode each letter: TEA, COFFEE, SUGER.\n\n### Final Answer Start ###\nTEA COFFEE SUGER\n### Final Answer End ###",
            ),
            ScriptEntry::new(
                fast_verify(MARKER),
                "Step 1 is correct.\nStep 2: the fourth letter of the last word is `.-`, which is A, not E; the final \
                 word should be SUGAR.\n\nFINAL EVALUATION: NO",
            ),
        ]
    }

    pub fn backend() -> ScriptedBackend {
        ScriptedBackend::new(script()).expect("script is non-empty").with_id("scripted:morse")
    }

    /// Table executor that knows the translation code.
    pub fn executor() -> TableExecutor {
        TableExecutor::new(HashMap::from([(fingerprint(TOOL_CODE), ExecutionOutcome::ok(TOOL_STDOUT))]))
    }
}

/// Two LLM experts, `Solution Expert` then `Answer Review Expert`.
pub mod chain {
    use super::*;

    pub const SOLVER: &str = "Solution Expert";
    pub const REVIEWER: &str = "Answer Review Expert";

    pub fn output(body: &str, answer: &str) -> String {
        format!("{body}\n\n{}", wrap_block("My Final Output", answer))
    }

    pub fn reflection_reply() -> String {
        wrap_block(
            "Problem Reflection",
            "**Task Description**: solve the stated problem.\n\n**Sub-tasks Identification**:\n\
             1. **Solve**: work out the answer.\n2. **Review**: check the answer against the problem.",
        )
    }

    pub fn design_reply() -> String {
        let card = |name: &str| ExpertCard { output_type: "str".into(), ..ExpertCard::new(name, ExpertType::Llm) };
        wrap_block(
            "Specialized Experts Design",
            &format!(
                "\n**{SOLVER}**: Works out the answer to the problem. Expert card (in JSON format): {}\n\n\
                 **{REVIEWER}**: Checks the answer against the problem and states it. Expert card (in JSON format): {}\n",
                card(SOLVER).to_json(),
                card(REVIEWER).to_json()
            ),
        )
    }

    /// Fast solve and verification replies for the problem containing `marker`.
    pub fn fast_entries(marker: &str, fast_reply: &str, verified: bool) -> Vec<ScriptEntry> {
        let verdict = if verified {
            "Step 1 follows from the statement and the arithmetic is right.\nFINAL EVALUATION: YES"
        } else {
            "Step 1: the result does not follow from the statement.\nFINAL EVALUATION: NO"
        };
        vec![ScriptEntry::new(fast_solve(marker), fast_reply), ScriptEntry::new(fast_verify(marker), verdict)]
    }

    /// One slow attempt ending in `slow_answer`, judged YES.
    pub fn slow_entries(marker: &str, slow_answer: &str) -> Vec<ScriptEntry> {
        vec![
            ScriptEntry::new(reflection(marker), reflection_reply()),
            ScriptEntry::new(design(marker), design_reply()),
            ScriptEntry::new(expert(marker, SOLVER), output("Working through the problem.", slow_answer)),
            ScriptEntry::new(expert(marker, REVIEWER), output("The answer is consistent.", slow_answer)),
            ScriptEntry::new(judgment(marker), "The workflow is sound.\nFINAL EVALUATION: YES"),
        ]
    }

    /// Backend calls for one slow attempt.
    pub const SLOW_CALLS: usize = 2 + 2 + 1;
}

/// Ten addition problems. The first `passing` verify on the fast path; the
/// rest fail verification and are solved by a two-expert workflow.
pub mod arithmetic {
    use super::*;

    pub const SIZE: usize = 10;

    pub fn operands(i: usize) -> (u32, u32) {
        (17 * i as u32 + 3, 29 * i as u32 + 11)
    }

    pub fn marker(i: usize) -> String {
        format!("Suite problem {i}:")
    }

    pub fn problem(i: usize) -> String {
        let (a, b) = operands(i);
        format!("{} A warehouse holds {a} crates and receives {b} more. How many crates does it hold now?", marker(i))
    }

    pub fn answer(i: usize) -> String {
        let (a, b) = operands(i);
        (a + b).to_string()
    }

    pub fn problems() -> Vec<String> {
        (0..SIZE).map(problem).collect()
    }

    /// Script for problem `i`; `fast_ok` decides the fast verification verdict.
    pub fn script_for(i: usize, fast_ok: bool) -> Vec<ScriptEntry> {
        let m = marker(i);
        let ans = answer(i);
        let (a, b) = operands(i);
        let fast = format!("Step 1: {a} + {b} = {ans}.\n\n{}", wrap_block("Final Answer", &ans));
        let mut script = chain::fast_entries(&m, &fast, fast_ok);
        script.extend(chain::slow_entries(&m, &ans));
        script
    }

    /// Script for the whole suite with problems `0..passing` passing fast verification.
    pub fn backend(passing: usize) -> ScriptedBackend {
        let script = (0..SIZE).flat_map(|i| script_for(i, i < passing)).collect();
        ScriptedBackend::new(script).expect("script is non-empty").with_id("scripted:arithmetic")
    }

    /// Closed-form backend call count for the suite.
    pub fn expected_calls(passing: usize) -> usize {
        passing * 2 + (SIZE - passing) * (2 + chain::SLOW_CALLS)
    }
}

/// Game of 24 items with scripted fast and slow answers.
pub mod game24 {
    use super::*;
    use crate::bench::{game24_numbers, solve_game24, BenchmarkItem};

    /// How a scripted item plays out.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Plan {
        pub fast_correct: bool,
        pub fast_verified: bool,
        pub slow_correct: bool,
    }

    pub fn marker(item: &BenchmarkItem) -> String {
        let [a, b, c, d] = game24_numbers(&item.reference).expect("game24 reference");
        format!("Use the numbers {a}, {b}, {c} and {d} to make 24.")
    }

    pub fn right(item: &BenchmarkItem) -> String {
        solve_game24(game24_numbers(&item.reference).expect("game24 reference")).expect("solvable item")
    }

    pub fn wrong(item: &BenchmarkItem) -> String {
        let [a, b, c, d] = game24_numbers(&item.reference).expect("game24 reference");
        format!("{a}+{b}+{c}-{d}")
    }

    pub fn script_for(item: &BenchmarkItem, plan: Plan) -> Vec<ScriptEntry> {
        let m = marker(item);
        let fast_answer = if plan.fast_correct { right(item) } else { wrong(item) };
        let fast = format!("Step 1: try combinations of the four numbers.\n\nFinal Answer: {fast_answer}");
        let mut script = chain::fast_entries(&m, &fast, plan.fast_verified);
        script.extend(chain::slow_entries(&m, &if plan.slow_correct { right(item) } else { wrong(item) }));
        script
    }

    pub fn backend(items: &[BenchmarkItem], plans: &[Plan]) -> ScriptedBackend {
        let script = items.iter().zip(plans).flat_map(|(item, plan)| script_for(item, *plan)).collect();
        ScriptedBackend::new(script).expect("script is non-empty").with_id("scripted:game24")
    }
}

/// A Tool expert whose first programs fail with a `NameError`.
pub mod repair {
    use super::*;
    use crate::gateway::TokenUsage;
    use crate::workflow::{ExpertSpec, ProblemReflection, SubTask};

    pub const PROBLEM: &str = "Repair problem: compute the sum of the squares of the integers 1 through 10.";
    pub const MARKER: &str = "Repair problem:";
    pub const EXPERT: &str = "Python Expert of Summation";
    pub const BUGGY: &str = "total = sum(i ** 2 for i in rang(1, 11))\nprint(total)";
    pub const FIXED: &str = "total = sum(i ** 2 for i in range(1, 11))\nprint(total)";
    pub const ERROR: &str = "Traceback (most recent call last):\n  File \"<string>\", line 1, in <module>\nNameError: name 'rang' is not defined";
    pub const ANSWER: &str = "385";

    fn reply(code: &str) -> String {
        format!("The squares are summed with a generator.\n\n```python\n{code}\n```")
    }

    pub fn spec() -> ExpertSpec {
        let card = ExpertCard {
            input_type: "None".into(),
            output_type: "int".into(),
            ..ExpertCard::new(EXPERT, ExpertType::Tool)
        };
        ExpertSpec::new(card, "Writes Python that sums the squares and prints the total.")
    }

    pub fn reflection() -> ProblemReflection {
        ProblemReflection {
            restatement: "Sum the squares of 1..10.".into(),
            subtasks: vec![SubTask::new(1, "Compute the sum with Python.")],
            raw: wrap_block("Problem Reflection", "1. Compute the sum with Python."),
            usage: TokenUsage::ZERO,
            exchange: None,
        }
    }

    /// The first `failures` programs are buggy, the rest are fixed.
    pub fn backend(failures: usize) -> ScriptedBackend {
        let first = if failures >= 1 { BUGGY } else { FIXED };
        let mut script = vec![ScriptEntry::new(expert(MARKER, EXPERT), reply(first))];
        for _ in 1..failures {
            script.push(ScriptEntry::once(Matcher::contains(cues::CODE_REPAIR), reply(BUGGY)));
        }
        script.push(ScriptEntry::new(Matcher::contains(cues::CODE_REPAIR), reply(FIXED)));
        ScriptedBackend::new(script).expect("script is non-empty").with_id("scripted:repair")
    }

    pub fn executor() -> TableExecutor {
        TableExecutor::default()
            .with_code(BUGGY, ExecutionOutcome::failed(ERROR, 1))
            .with_code(FIXED, ExecutionOutcome::ok("385\n"))
    }
}

/// Replies for a small synthesis run: generation with near duplicates,
/// problems for every task, and a mix of validity verdicts.
pub mod synthesis {
    use super::*;

    pub const GENERATION_CUE: &str = "develop 10 new and diverse reasoning tasks";
    pub const PUZZLE_CUE: &str = "develop 10 new and diverse puzzle tasks";
    pub const PROBLEMS_CUE: &str = "Write 3 distinct, concrete problems";
    pub const VALIDATION_CUE: &str = "verify whether the above problem is a valid reasoning problem";

    pub const GENERATED: &str = "\
1. Interpret a Morse code message and recover the plain English words it spells out.
2. Determine the order in which runners finished a race from statements about who passed whom and when.
3. Compute how many handshakes occur at a party when each guest greets only guests they have not met before.
4. Decide which of three doors hides a prize when each door carries a sign and only one sign tells the truth.
5. Find the number of rectangles of all sizes that can be traced along the lines of a square grid drawing.
6. Track which passenger holds which ticket after a sequence of seat swaps described in the order they happened.
7. Work out the year a person was born from clues about their age at several well known historical events.
8. Determine the order in which runners finished a race from statements about who passed whom and when exactly.
9. Convert a time given in one city's local clock into the matching local time in a second named city.
10. Identify the counterfeit coin among twelve using a balance scale and report the fewest weighings that guarantee success.";

    pub const PUZZLES: &str = "\
Arrange the digits one to nine in a three by three square so that every row column and diagonal has the same sum.
Decide which of three doors hides a prize when each door carries a sign and only one sign tells the truth.
Move a stack of disks between three pegs and report the fewest moves when a larger disk may never rest on a smaller one.";

    fn problems_reply(topic: &str) -> String {
        (1..=3)
            .map(|n| {
                let body = match n {
                    2 => format!("A question about {topic} where several answers could be argued (ambiguous)."),
                    3 if topic.contains("Morse") => {
                        "Decode the Morse code message `.... .. / - .... . .-. .` into English words.".to_string()
                    }
                    3 => format!("A question about {topic} that leaves out a required number (broken)."),
                    _ => format!("A fully specified question about {topic} with a single answer."),
                };
                format!("### Problem {n} Start ###\n{body}\n### Problem {n} End ###")
            })
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    pub fn script() -> Vec<ScriptEntry> {
        vec![
            ScriptEntry::new(Matcher::contains(GENERATION_CUE), GENERATED),
            ScriptEntry::new(Matcher::contains(PUZZLE_CUE), PUZZLES),
            ScriptEntry::new(Matcher::all_of([PROBLEMS_CUE, "Morse"]), problems_reply("Morse code messages")),
            ScriptEntry::new(Matcher::contains(PROBLEMS_CUE), problems_reply("the task")),
            ScriptEntry::new(
                Matcher::all_of([VALIDATION_CUE, "(ambiguous)"]),
                "More than one reading is possible.\n## INVALID ##\n\n### New Valid Problem Start ###\n\
                 A fully specified question with a single answer, rewritten from an ambiguous draft.\n\
                 ### New Valid Problem End ###",
            ),
            ScriptEntry::new(
                Matcher::all_of([VALIDATION_CUE, "(broken)"]),
                "A required quantity is missing and it cannot be repaired without guessing.\n## INVALID ##",
            ),
            ScriptEntry::new(Matcher::contains(VALIDATION_CUE), "Clear, complete and solvable.\n## VALID ##"),
        ]
    }

    pub fn backend() -> ScriptedBackend {
        ScriptedBackend::new(script()).expect("script is non-empty").with_id("scripted:synthesis")
    }
}
