//! Heading adapters: raw article markup to a flat list of headed blocks.

use serde::{Deserialize, Serialize};

/// One heading and the body text up to the next heading. `level` is `None`
/// for text before the first heading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadedBlock {
    pub level: Option<usize>,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadingFormat {
    /// `== Title ==` style; the number of `=` is the level.
    Wiki,
    /// `# Title` style; the number of `#` is the level.
    Markdown,
}

impl std::str::FromStr for HeadingFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wiki" => Ok(Self::Wiki),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(format!("unknown heading format {other:?} (wiki, markdown)")),
        }
    }
}

fn wiki_heading(line: &str) -> Option<(usize, String)> {
    let t = line.trim();
    let lead = t.chars().take_while(|&c| c == '=').count();
    let trail = t.chars().rev().take_while(|&c| c == '=').count();
    if lead == 0 || lead != trail || t.len() <= 2 * lead {
        return None;
    }
    let title = t[lead..t.len() - trail].trim();
    (!title.is_empty()).then(|| (lead, title.to_string()))
}

fn markdown_heading(line: &str) -> Option<(usize, String)> {
    let lead = line.chars().take_while(|&c| c == '#').count();
    if lead == 0 || lead > 6 {
        return None;
    }
    let rest = &line[lead..];
    if !rest.starts_with(' ') && !rest.is_empty() {
        return None;
    }
    let title = rest.trim().trim_end_matches('#').trim();
    (!title.is_empty()).then(|| (lead, title.to_string()))
}

pub fn parse_headings(raw: &str, format: HeadingFormat) -> Vec<HeadedBlock> {
    let detect = match format {
        HeadingFormat::Wiki => wiki_heading,
        HeadingFormat::Markdown => markdown_heading,
    };
    let mut blocks = vec![HeadedBlock {
        level: None,
        title: String::new(),
        body: String::new(),
    }];
    for line in raw.lines() {
        match detect(line) {
            Some((level, title)) => blocks.push(HeadedBlock {
                level: Some(level),
                title,
                body: String::new(),
            }),
            None => {
                let body = &mut blocks.last_mut().unwrap().body;
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    if blocks[0].body.trim().is_empty() {
        blocks.remove(0);
    }
    blocks
}
