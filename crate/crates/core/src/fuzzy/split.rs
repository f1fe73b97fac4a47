use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Result};

/// A maximal run of ASCII letters inside a compound name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementalWord(String);

impl ElementalWord {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() || !text.bytes().all(|b| b.is_ascii_alphabetic()) {
            return Err(invalid("elemental word must be a non-empty run of ASCII letters"));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for ElementalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Word(ElementalWord),
    Separator(String),
}

impl Segment {
    pub fn text(&self) -> &str {
        match self {
            Segment::Word(w) => w.as_str(),
            Segment::Separator(s) => s,
        }
    }
}

/// A name cut into alternating word and separator runs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitName {
    pub segments: Vec<Segment>,
}

impl SplitName {
    pub fn words(&self) -> impl Iterator<Item = &ElementalWord> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Word(w) => Some(w),
            Segment::Separator(_) => None,
        })
    }

    pub fn join(&self) -> String {
        self.segments.iter().map(Segment::text).collect()
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.segments {
            f.write_str(s.text())?;
        }
        Ok(())
    }
}

/// Splits on every non-letter character. Concatenating the segments gives
/// back `name` exactly.
pub fn split_name(name: &str) -> SplitName {
    let mut segments = Vec::new();
    let mut start = 0;
    let mut in_word = None;
    for (i, c) in name.char_indices() {
        let is_word = c.is_ascii_alphabetic();
        match in_word {
            Some(w) if w != is_word => {
                segments.push(make_segment(&name[start..i], w));
                start = i;
            }
            _ => {}
        }
        in_word = Some(is_word);
    }
    if let Some(w) = in_word {
        segments.push(make_segment(&name[start..], w));
    }
    SplitName { segments }
}

fn make_segment(text: &str, word: bool) -> Segment {
    if word {
        Segment::Word(ElementalWord(text.to_string()))
    } else {
        Segment::Separator(text.to_string())
    }
}
