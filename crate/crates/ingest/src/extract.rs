//! Pulls program text out of a chat response.

/// Contents of each fenced ```` ``` ```` block, in order. A response with no
/// complete fence is returned whole.
pub fn extract_code_blocks(response: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(lines), true) => {
                blocks.push(lines.join("\n") + "\n");
                current = None;
            }
            (Some(lines), false) => lines.push(line),
            (None, false) => {}
        }
    }
    if blocks.is_empty() {
        blocks.push(response.to_owned());
    }
    blocks
}
