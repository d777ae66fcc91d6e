//! Lists the prompt catalog and renders one template.
//!
//! ```bash
//! cargo run -p hdflow --example render_prompts -- cot_verification
//! ```

use hdflow::PromptCatalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = PromptCatalog::builtin();
    for t in catalog.iter() {
        println!("{:<22} {:?}", t.name, t.placeholders());
    }
    let name = std::env::args().nth(1).unwrap_or_else(|| "cot_verification".into());
    let template = catalog.get(&name)?;
    let bindings: Vec<(String, String)> =
        template.placeholders().into_iter().map(|p| (p.clone(), format!("<{p}>"))).collect();
    let refs: Vec<(&str, &str)> = bindings.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    println!("\n{}", catalog.render(&name, &refs)?);
    Ok(())
}
