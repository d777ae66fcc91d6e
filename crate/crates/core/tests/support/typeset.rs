//! Reads the typeset prompt boxes back as plain text.

/// Plain text of a typeset prompt box.
pub fn untypeset(tex: &str) -> String {
    let body: Vec<&str> = tex
        .lines()
        .filter(|l| {
            let t = l.trim();
            t != "\\small" && !t.starts_with("\\begin{") && !t.starts_with("\\end{")
        })
        .collect();
    let mut text = body.join("\n").replace("\\\\", "\n");
    for (from, to) in [("\\#", "#"), ("\\{", "{"), ("\\}", "}"), ("\\_", "_")] {
        text = text.replace(from, to);
    }
    let math = regex::Regex::new(r"\$([a-z_]+)\$").unwrap();
    math.replace_all(&text, "{$1}").into_owned()
}

pub fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
