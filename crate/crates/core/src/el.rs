//! Expression Language scanning: locating `${...}` / `#{...}` in text and
//! extracting the bean reference chains inside them.

use serde::{Deserialize, Serialize};

use crate::model::{Diagnostic, DiagnosticCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElDelimiter {
    Dollar,
    Hash,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElArgument {
    Literal { value: String, raw: String },
    Dynamic { raw: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElSegment {
    Property(String),
    MethodCall(String, Vec<ElArgument>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElReferencePath {
    pub base: String,
    pub segments: Vec<ElSegment>,
    /// Base is an implicit object (`param`, `sessionScope`, ...), not a bean.
    pub implicit: bool,
}

impl ElReferencePath {
    /// First property or method name, if any.
    pub fn member(&self) -> Option<&str> {
        self.segments.first().map(|s| match s {
            ElSegment::Property(n) | ElSegment::MethodCall(n, _) => n.as_str(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElExpression {
    pub raw: String,
    pub delimiter: ElDelimiter,
    pub references: Vec<ElReferencePath>,
}

pub const RESERVED: [&str; 16] = [
    "and",
    "or",
    "not",
    "empty",
    "null",
    "true",
    "false",
    "eq",
    "ne",
    "lt",
    "gt",
    "le",
    "ge",
    "div",
    "mod",
    "instanceof",
];

pub const IMPLICIT_OBJECTS: [&str; 11] = [
    "param",
    "paramValues",
    "header",
    "headerValues",
    "sessionScope",
    "requestScope",
    "pageScope",
    "applicationScope",
    "cookie",
    "initParam",
    "pageContext",
];

/// Byte span of one EL occurrence inside a larger text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElSpan {
    pub start: usize,
    pub end: usize,
    pub closed: bool,
}

/// Finds every `${` / `#{` occurrence. Braces inside EL string literals do
/// not count; `\${` is an escaped literal and is skipped.
pub fn find_expressions(text: &str) -> Vec<ElSpan> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i + 1 < bytes.len() {
        let c = bytes[i];
        if c == b'\\' && matches!(bytes.get(i + 1), Some(b'$' | b'#')) {
            i += 2;
            continue;
        }
        if !((c == b'$' || c == b'#') && bytes[i + 1] == b'{') {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i + 2;
        let mut depth = 1usize;
        let mut quote: Option<u8> = None;
        while j < bytes.len() {
            let b = bytes[j];
            match quote {
                Some(q) => {
                    if b == b'\\' {
                        j += 1;
                    } else if b == q {
                        quote = None;
                    }
                }
                None => match b {
                    b'\'' | b'"' => quote = Some(b),
                    b'{' => depth += 1,
                    b'}' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                },
            }
            j += 1;
        }
        if j < bytes.len() {
            spans.push(ElSpan {
                start,
                end: j + 1,
                closed: true,
            });
            i = j + 1;
        } else {
            spans.push(ElSpan {
                start,
                end: bytes.len(),
                closed: false,
            });
            break;
        }
    }
    spans
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num,
    Punct(char),
}

#[derive(Debug, Clone)]
struct Lexeme {
    tok: Tok,
    start: usize,
    end: usize,
}

fn tokenize(body: &str) -> Option<Vec<Lexeme>> {
    let mut out = Vec::new();
    let mut it = body.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if c.is_whitespace() {
            continue;
        }
        if c == '\'' || c == '"' {
            let mut value = String::new();
            let mut closed = false;
            while let Some((j, d)) = it.next() {
                if d == '\\' {
                    if let Some((_, e)) = it.next() {
                        value.push(e);
                    }
                } else if d == c {
                    out.push(Lexeme {
                        tok: Tok::Str(value.clone()),
                        start: i,
                        end: j + 1,
                    });
                    closed = true;
                    break;
                } else {
                    value.push(d);
                }
            }
            if !closed {
                return None;
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = it.peek() {
                if d.is_alphanumeric() || d == '_' || d == '$' {
                    end = j + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            out.push(Lexeme {
                tok: Tok::Ident(body[i..end].to_string()),
                start: i,
                end,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i + 1;
            while let Some(&(j, d)) = it.peek() {
                if d.is_ascii_alphanumeric() || d == '.' {
                    end = j + 1;
                    it.next();
                } else {
                    break;
                }
            }
            out.push(Lexeme {
                tok: Tok::Num,
                start: i,
                end,
            });
            continue;
        }
        out.push(Lexeme {
            tok: Tok::Punct(c),
            start: i,
            end: i + c.len_utf8(),
        });
    }
    Some(out)
}

fn balanced(toks: &[Lexeme]) -> bool {
    let mut stack = Vec::new();
    for t in toks {
        match t.tok {
            Tok::Punct(c @ ('(' | '[' | '{')) => stack.push(c),
            Tok::Punct(c @ (')' | ']' | '}')) => {
                let open = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if stack.pop() != Some(open) {
                    return false;
                }
            }
            _ => {}
        }
    }
    stack.is_empty()
}

fn is_punct(toks: &[Lexeme], i: usize, c: char) -> bool {
    matches!(toks.get(i), Some(Lexeme { tok: Tok::Punct(p), .. }) if *p == c)
}

fn closing(toks: &[Lexeme], open: usize) -> usize {
    let (o, c) = match toks[open].tok {
        Tok::Punct('(') => ('(', ')'),
        _ => ('[', ']'),
    };
    let mut depth = 0usize;
    for (i, _) in toks.iter().enumerate().skip(open) {
        if is_punct(toks, i, o) {
            depth += 1;
        } else if is_punct(toks, i, c) {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
    }
    toks.len()
}

fn arguments(body: &str, toks: &[Lexeme], open: usize, close: usize) -> Vec<ElArgument> {
    let mut args = Vec::new();
    if close == open + 1 {
        return args;
    }
    let mut depth = 0i32;
    let mut from = open + 1;
    for i in open + 1..=close {
        let at_end = i == close;
        if !at_end {
            match toks[i].tok {
                Tok::Punct('(' | '[' | '{') => depth += 1,
                Tok::Punct(')' | ']' | '}') => depth -= 1,
                _ => {}
            }
        }
        if at_end || (depth == 0 && is_punct(toks, i, ',')) {
            let part = &toks[from..i];
            let raw = match (part.first(), part.last()) {
                (Some(a), Some(b)) => body[a.start..b.end].to_string(),
                _ => String::new(),
            };
            args.push(match part {
                [Lexeme { tok: Tok::Str(v), .. }] => ElArgument::Literal { value: v.clone(), raw },
                [Lexeme { tok: Tok::Num, .. }] => ElArgument::Literal {
                    value: raw.clone(),
                    raw,
                },
                _ => ElArgument::Dynamic { raw },
            });
            from = i + 1;
        }
    }
    args
}

fn chain(body: &str, toks: &[Lexeme], base: usize) -> Vec<ElSegment> {
    let mut segs = Vec::new();
    let mut i = base + 1;
    loop {
        if is_punct(toks, i, '.') {
            let Some(Tok::Ident(name)) = toks.get(i + 1).map(|t| &t.tok) else {
                break;
            };
            if is_punct(toks, i + 2, '(') {
                let close = closing(toks, i + 2);
                segs.push(ElSegment::MethodCall(name.clone(), arguments(body, toks, i + 2, close)));
                i = close + 1;
            } else {
                segs.push(ElSegment::Property(name.clone()));
                i += 2;
            }
        } else if is_punct(toks, i, '[') {
            match (toks.get(i + 1).map(|t| &t.tok), is_punct(toks, i + 2, ']')) {
                (Some(Tok::Str(name)), true) => {
                    segs.push(ElSegment::Property(name.clone()));
                    i += 3;
                }
                _ => break,
            }
        } else {
            break;
        }
    }
    segs
}

/// Parses one EL expression including its delimiters.
pub fn parse_el(raw: &str) -> (ElExpression, Vec<Diagnostic>) {
    let delimiter = if raw.starts_with('#') {
        ElDelimiter::Hash
    } else {
        ElDelimiter::Dollar
    };
    let mut expr = ElExpression {
        raw: raw.to_string(),
        delimiter,
        references: Vec::new(),
    };
    let malformed = |expr: ElExpression, why: &str| {
        (
            expr,
            vec![Diagnostic::warning(
                DiagnosticCode::MalformedEl,
                format!("malformed EL expression: {why}"),
            )],
        )
    };
    let shaped = (raw.starts_with("${") || raw.starts_with("#{")) && raw.ends_with('}') && raw.len() >= 3;
    if !shaped {
        return malformed(expr, "missing delimiters");
    }
    let body = &raw[2..raw.len() - 1];
    let Some(toks) = tokenize(body) else {
        return malformed(expr, "unterminated string literal");
    };
    if !balanced(&toks) {
        return malformed(expr, "unbalanced brackets");
    }
    for (i, t) in toks.iter().enumerate() {
        let Tok::Ident(name) = &t.tok else {
            continue;
        };
        if RESERVED.contains(&name.as_str()) || (i > 0 && is_punct(&toks, i - 1, '.')) {
            continue;
        }
        // `fn:name(` function prefix and name
        let fn_prefix = is_punct(&toks, i + 1, ':')
            && matches!(toks.get(i + 2).map(|t| &t.tok), Some(Tok::Ident(_)))
            && is_punct(&toks, i + 3, '(');
        let fn_name = i >= 2
            && is_punct(&toks, i - 1, ':')
            && matches!(toks[i - 2].tok, Tok::Ident(_))
            && is_punct(&toks, i + 1, '(');
        if fn_prefix || fn_name {
            continue;
        }
        expr.references.push(ElReferencePath {
            base: name.clone(),
            segments: chain(body, &toks, i),
            implicit: IMPLICIT_OBJECTS.contains(&name.as_str()),
        });
    }
    (expr, Vec::new())
}
