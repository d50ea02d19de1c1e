use std::fmt;

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

/// 1-based line and column of a byte offset (columns count characters).
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
    /// What the parser was looking for, when that is useful.
    pub expected: Option<String>,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { span, message: message.into(), expected: None }
    }

    pub fn expected(span: Span, message: impl Into<String>, expected: impl Into<String>) -> Self {
        Diagnostic { span, message: message.into(), expected: Some(expected.into()) }
    }

    /// `file:line:col: message (expected ...)`, with the offending line and
    /// a caret underneath.
    pub fn render(&self, file: &str, source: &str) -> String {
        let (line, col) = line_col(source, self.span.start);
        let mut out = format!("{file}:{line}:{col}: error: {}", self.message);
        if let Some(e) = &self.expected {
            out.push_str(&format!(" (expected {e})"));
        }
        if let Some(text) = source.lines().nth(line - 1) {
            let width = source[self.span.start.min(source.len())..self.span.end.min(source.len())]
                .chars()
                .take_while(|&c| c != '\n')
                .count()
                .max(1);
            out.push_str(&format!("\n  | {text}\n  | {}{}", " ".repeat(col - 1), "^".repeat(width)));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if let Some(e) = &self.expected {
            write!(f, " (expected {e})")?;
        }
        Ok(())
    }
}
