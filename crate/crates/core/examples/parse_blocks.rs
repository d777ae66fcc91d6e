//! Parsers for model replies: marker blocks, expert cards, verdicts, code.
//!
//! ```bash
//! cargo run -p hdflow --example parse_blocks
//! ```

use hdflow::fixtures::morse;
use hdflow::prompt_kit::{extract_block, extract_code, parse_expert_cards, parse_final_evaluation, parse_validity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let design = extract_block(morse::DESIGN, "Specialized Experts Design")?;
    println!("design block complete: {}", design.complete);
    for card in parse_expert_cards(&design.payload)? {
        println!("  {:<40} {:?}  {} -> {}", card.name, card.expert_type, card.input_type, card.output_type);
    }

    println!("code:\n{}", extract_code(morse::TOOL_REPLY)?);

    let verdict = parse_final_evaluation(morse::JUDGMENT);
    println!("judgment: {} (from {:?})", verdict.value, verdict.raw);

    let v = parse_validity("Two readings are possible.\n## INVALID ##\n### New Valid Problem Start ###\nHow many?\n### New Valid Problem End ###");
    println!("validity: {} rewrite={:?}", v.verdict.value, v.rewrite);
    Ok(())
}
