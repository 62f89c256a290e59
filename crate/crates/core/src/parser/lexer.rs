//! Token stream for the Java subset the extractor understands.
//!
//! Comments are not discarded: their words feed the per-class token bags
//! used by the textual-similarity machinery.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Number,
    Str,
    CharLit,
    Punct(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub line: usize,
}

impl Token {
    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.kind, TokKind::Punct(q) if *q == p)
    }
}

/// Comment text with the line it starts on.
#[derive(Debug, Clone)]
pub struct CommentChunk {
    pub line: usize,
    pub text: String,
}

const PUNCTS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "<<", ">>", "&&", "||", "++", "--", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "::", "+", "-", "*", "/", "%",
    "=", "<", ">", "!", "&", "|", "^", "~", "?", ":", ";", ",", ".", "(", ")", "{", "}", "[",
    "]", "@",
];

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<CommentChunk>,
    pub line_count: usize,
}

pub fn lex(src: &str) -> Lexed {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let mut i = 0;
    let mut line = 1;

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                let start = i + 2;
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                comments.push(CommentChunk {
                    line,
                    text: src[start..i].to_string(),
                });
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start_line = line;
                let start = i + 2;
                i += 2;
                while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
                let end = i.min(bytes.len());
                comments.push(CommentChunk {
                    line: start_line,
                    text: src[start..end].to_string(),
                });
                i = (i + 2).min(bytes.len());
            }
            b'"' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    } else if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
                i += 1;
                tokens.push(Token {
                    kind: TokKind::Str,
                    line,
                });
            }
            b'\'' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'\'' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i += 1;
                tokens.push(Token {
                    kind: TokKind::CharLit,
                    line,
                });
            }
            b'0'..=b'9' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.' || bytes[i] == b'_')
                {
                    // `1.x()` never occurs; dots after digits belong to floats
                    if bytes[i] == b'.' && !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                        break;
                    }
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Number,
                    line,
                });
            }
            _ if c.is_ascii_alphabetic() || c == b'_' || c == b'$' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Ident(src[start..i].to_string()),
                    line,
                });
            }
            _ if !c.is_ascii() => {
                // skip a whole multi-byte character
                i += match c {
                    0xF0..=0xF7 => 4,
                    0xE0..=0xEF => 3,
                    0xC0..=0xDF => 2,
                    _ => 1,
                };
            }
            _ => {
                let rest = &src[i..];
                let p = PUNCTS.iter().find(|p| rest.starts_with(**p));
                match p {
                    Some(p) => {
                        tokens.push(Token {
                            kind: TokKind::Punct(p),
                            line,
                        });
                        i += p.len();
                    }
                    None => i += 1,
                }
            }
        }
    }

    Lexed {
        tokens,
        comments,
        line_count: line,
    }
}

/// Splits an identifier or comment word on camelCase, digits and
/// punctuation, lowercasing each piece. Pieces shorter than two
/// characters are dropped.
pub fn split_terms(word: &str, out: &mut Vec<String>) {
    let mut cur = String::new();
    let mut prev_lower = false;
    for ch in word.chars() {
        if ch.is_ascii_alphabetic() {
            if ch.is_ascii_uppercase() && prev_lower {
                flush_term(&mut cur, out);
            }
            prev_lower = ch.is_ascii_lowercase();
            cur.push(ch.to_ascii_lowercase());
        } else {
            flush_term(&mut cur, out);
            prev_lower = false;
        }
    }
    flush_term(&mut cur, out);
}

fn flush_term(cur: &mut String, out: &mut Vec<String>) {
    if cur.len() >= 2 {
        out.push(std::mem::take(cur));
    } else {
        cur.clear();
    }
}
