use crate::model::SourceLocation;

/// Maps byte offsets of one file to 1-based line/column positions.
/// Columns count characters, not bytes.
#[derive(Debug, Clone)]
pub struct LineIndex<'a> {
    text: &'a str,
    path: String,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a str, path: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex {
            text,
            path: path.to_string(),
            line_starts,
        }
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn line_col(&self, offset: usize) -> (u32, u32) {
        let offset = offset.min(self.text.len());
        let line = self.line_starts.partition_point(|&s| s <= offset) - 1;
        let start = self.line_starts[line];
        let mut end = offset;
        while !self.text.is_char_boundary(end) {
            end -= 1;
        }
        let col = self.text[start..end].chars().count();
        (line as u32 + 1, col as u32 + 1)
    }

    pub fn location(&self, offset: usize) -> SourceLocation {
        let (line, column) = self.line_col(offset);
        SourceLocation::new(self.path.clone(), line, column)
    }
}
