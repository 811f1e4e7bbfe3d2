//! Comment- and string-aware Java tokenizer.
//!
//! Produces just enough structure for pattern matching: identifiers, string
//! literals (unescaped), numbers and single-character punctuation. Comments
//! and whitespace are dropped, so nothing inside them can ever match.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Str,
    Char,
    Number,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Identifier text, unescaped literal content, or the punctuation char.
    pub text: String,
    /// Byte offset of the token start in the original file.
    pub offset: usize,
}

impl Token {
    pub fn is_ident(&self, s: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == s
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct && self.text.len() == c.len_utf8() && self.text.starts_with(c)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    /// Offsets of comments or literals that run to end of input or line.
    pub unterminated: Vec<usize>,
}

/// Tokenizes `src`; offsets are shifted by `base` so that a fragment of a
/// larger file (a scriptlet body) reports positions in that file.
pub fn lex(src: &str, base: usize) -> Lexed {
    let bytes = src.as_bytes();
    let mut out = Lexed::default();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            match src[i + 2..].find("*/") {
                Some(end) => i = i + 2 + end + 2,
                None => {
                    out.unterminated.push(base + i);
                    i = bytes.len();
                }
            }
            continue;
        }
        if src[i..].starts_with("\"\"\"") {
            let start = i;
            match src[i + 3..].find("\"\"\"") {
                Some(end) => {
                    out.tokens.push(Token {
                        kind: TokenKind::Str,
                        text: src[i + 3..i + 3 + end].to_string(),
                        offset: base + start,
                    });
                    i = i + 3 + end + 3;
                }
                None => {
                    out.unterminated.push(base + start);
                    i = bytes.len();
                }
            }
            continue;
        }
        if c == b'"' || c == b'\'' {
            let start = i;
            let (text, next, closed) = read_quoted(src, i, c);
            if !closed {
                out.unterminated.push(base + start);
            }
            out.tokens.push(Token {
                kind: if c == b'"' { TokenKind::Str } else { TokenKind::Char },
                text,
                offset: base + start,
            });
            i = next;
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        if ch.is_alphabetic() || ch == '_' || ch == '$' {
            let start = i;
            let end = src[i..]
                .char_indices()
                .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '$'))
                .map_or(src.len(), |(j, _)| i + j);
            out.tokens.push(Token {
                kind: TokenKind::Ident,
                text: src[start..end].to_string(),
                offset: base + start,
            });
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                i += 1;
            }
            out.tokens.push(Token {
                kind: TokenKind::Number,
                text: src[start..i].to_string(),
                offset: base + start,
            });
            continue;
        }
        out.tokens.push(Token {
            kind: TokenKind::Punct,
            text: ch.to_string(),
            offset: base + i,
        });
        i += ch.len_utf8();
    }
    out
}

/// Reads a quoted literal starting at `start`. Returns the unescaped content,
/// the index after the literal, and whether a closing quote was found.
/// Literals never span lines.
fn read_quoted(src: &str, start: usize, quote: u8) -> (String, usize, bool) {
    let mut text = String::new();
    let mut chars = src[start + 1..].char_indices();
    while let Some((j, c)) = chars.next() {
        let abs = start + 1 + j;
        match c {
            '\\' => match chars.next() {
                Some((_, e)) => match e {
                    'n' => text.push('\n'),
                    't' => text.push('\t'),
                    'r' => text.push('\r'),
                    'b' => text.push('\u{8}'),
                    'f' => text.push('\u{c}'),
                    's' => text.push(' '),
                    'u' => {
                        let rest = &src[abs + 2..];
                        let hex: String = rest.trim_start_matches('u').chars().take(4).collect();
                        match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                            Some(ch) if hex.len() == 4 => {
                                text.push(ch);
                                let skip = rest.len() - rest.trim_start_matches('u').len() + 4;
                                for _ in 0..skip {
                                    chars.next();
                                }
                            }
                            _ => text.push('u'),
                        }
                    }
                    other => text.push(other),
                },
                None => return (text, src.len(), false),
            },
            '\n' => return (text, abs, false),
            c if c as u32 == quote as u32 => return (text, abs + 1, true),
            c => text.push(c),
        }
    }
    (text, src.len(), false)
}

/// Index of the token closing the bracket opened at `open`, if balanced.
pub fn matching_close(tokens: &[Token], open: usize) -> Option<usize> {
    let (o, c) = match tokens.get(open)?.text.as_str() {
        "(" => ('(', ')'),
        "{" => ('{', '}'),
        "[" => ('[', ']'),
        _ => return None,
    };
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        if t.is_punct(o) {
            depth += 1;
        } else if t.is_punct(c) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}
