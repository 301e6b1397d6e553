//! Importer for TeX question files.
//!
//! ```text
//! \question{What is $\int_0^1 x\,dx$?}
//! \truechoice{$\frac{1}{2}$}
//! \falsechoice{$1$}
//! \explanation{Area of a triangle.}
//! ```
//!
//! Brace content is opaque: nesting is tracked, `\{` and `\}` are literals,
//! and every byte between the outer braces is kept verbatim.

use super::{Choice, Question};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: malformed block: {reason}")]
    MalformedBlock { line: usize, reason: String },
    #[error("line {line}: {reason}")]
    ChoiceCountError { line: usize, reason: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::MalformedBlock { line, .. } | ParseError::ChoiceCountError { line, .. } => *line,
        }
    }
}

const QUESTION: &str = "\\question{";
const TRUE_CHOICE: &str = "\\truechoice{";
const FALSE_CHOICE: &str = "\\falsechoice{";
const EXPLANATION: &str = "\\explanation{";

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: bool,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            pos: 0,
            line: 1,
            line_start: true,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn bump(&mut self, n: usize) {
        for b in &self.src.as_bytes()[self.pos..self.pos + n] {
            if *b == b'\n' {
                self.line += 1;
                self.line_start = true;
            } else if !b.is_ascii_whitespace() {
                self.line_start = false;
            }
        }
        self.pos += n;
    }

    fn skip_ws(&mut self, allow_comments: bool) {
        while let Some(&b) = self.src.as_bytes().get(self.pos) {
            if b.is_ascii_whitespace() {
                self.bump(1);
            } else if allow_comments && b == b'%' && self.line_start {
                let len = self.rest().find('\n').unwrap_or(self.rest().len());
                self.pos += len;
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.bump(token.len());
            true
        } else {
            false
        }
    }

    /// Reads up to the brace closing an already consumed `{`.
    fn balanced(&mut self, opened_at: usize) -> Result<&'a str, ParseError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut depth = 1usize;
        let mut i = self.pos;
        while i < bytes.len() {
            match bytes[i] {
                b'\\' => i += 2,
                b'{' => {
                    depth += 1;
                    i += 1;
                }
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        let body = &self.src[start..i];
                        self.bump(i + 1 - self.pos);
                        return Ok(body);
                    }
                    i += 1;
                }
                _ => i += 1,
            }
        }
        Err(ParseError::MalformedBlock {
            line: opened_at,
            reason: "unbalanced braces".into(),
        })
    }

    fn describe_next(&self) -> String {
        let snippet: String = self.rest().chars().take(20).collect();
        format!("unexpected `{}`", snippet.trim_end())
    }
}

/// Parses every `\question` block in `source`, in file order.
pub fn parse_tex_questions(source: &str) -> Result<Vec<Question>, ParseError> {
    let mut sc = Scanner::new(source);
    let mut out = Vec::new();
    loop {
        sc.skip_ws(true);
        if sc.at_end() {
            return Ok(out);
        }
        let block_line = sc.line;
        if !sc.eat(QUESTION) {
            return Err(ParseError::MalformedBlock {
                line: sc.line,
                reason: format!("expected \\question, {}", sc.describe_next()),
            });
        }
        let stem = sc.balanced(block_line)?;

        let mut choices = Vec::new();
        loop {
            sc.skip_ws(false);
            let line = sc.line;
            let correct = if sc.eat(TRUE_CHOICE) {
                true
            } else if sc.eat(FALSE_CHOICE) {
                false
            } else {
                break;
            };
            let text = sc.balanced(line)?;
            if text.trim().is_empty() {
                return Err(ParseError::MalformedBlock {
                    line,
                    reason: "empty choice".into(),
                });
            }
            choices.push(Choice {
                text: text.to_owned(),
                correct,
            });
        }

        let expl_line = sc.line;
        if !sc.eat(EXPLANATION) {
            let reason = if sc.at_end() || sc.rest().starts_with(QUESTION) {
                "missing \\explanation".to_owned()
            } else {
                format!("expected a choice or \\explanation, {}", sc.describe_next())
            };
            return Err(ParseError::MalformedBlock {
                line: expl_line,
                reason,
            });
        }
        let explanation = sc.balanced(expl_line)?;

        let n_true = choices.iter().filter(|c| c.correct).count();
        let n_false = choices.len() - n_true;
        if n_true != 1 {
            return Err(ParseError::ChoiceCountError {
                line: block_line,
                reason: format!("expected exactly one \\truechoice, found {n_true}"),
            });
        }
        if n_false == 0 {
            return Err(ParseError::ChoiceCountError {
                line: block_line,
                reason: "expected at least one \\falsechoice".into(),
            });
        }
        let q = Question::new(stem, choices, explanation).map_err(|e| ParseError::MalformedBlock {
            line: block_line,
            reason: e.to_string(),
        })?;
        out.push(q);
    }
}

/// Writes questions back in the importer's grammar.
pub fn serialize_tex_questions(questions: &[Question]) -> String {
    let mut s = String::new();
    for q in questions {
        let _ = writeln!(s, "\\question{{{}}}", q.stem);
        for c in &q.choices {
            let cmd = if c.correct { "truechoice" } else { "falsechoice" };
            let _ = writeln!(s, "\\{cmd}{{{}}}", c.text);
        }
        let _ = writeln!(s, "\\explanation{{{}}}", q.explanation);
        s.push('\n');
    }
    s
}
