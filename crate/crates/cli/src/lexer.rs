//! Tokenizer for `.thy` sources. Comments run from `#` to the end of the
//! line; spans are 1-based (line, column, length).

use crate::diag::{Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Int,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Caret,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,   // ->
    Assign,  // :=
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
    pub span: Span,
}

pub fn lex(source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let span1 = Span {
            line,
            column: col,
            length: 1,
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => {
                col += 1;
                i += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | ';' | '^' | '+' | '*' | '/' => {
                let kind = match c {
                    '{' => TokKind::LBrace,
                    '}' => TokKind::RBrace,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    '[' => TokKind::LBracket,
                    ']' => TokKind::RBracket,
                    ',' => TokKind::Comma,
                    ';' => TokKind::Semi,
                    '^' => TokKind::Caret,
                    '+' => TokKind::Plus,
                    '*' => TokKind::Star,
                    _ => TokKind::Slash,
                };
                tokens.push(Token {
                    kind,
                    text: c.to_string(),
                    span: span1,
                });
                col += 1;
                i += 1;
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    tokens.push(Token {
                        kind: TokKind::Arrow,
                        text: "->".into(),
                        span: Span {
                            line,
                            column: col,
                            length: 2,
                        },
                    });
                    col += 2;
                    i += 2;
                } else {
                    tokens.push(Token {
                        kind: TokKind::Minus,
                        text: "-".into(),
                        span: span1,
                    });
                    col += 1;
                    i += 1;
                }
            }
            ':' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    tokens.push(Token {
                        kind: TokKind::Assign,
                        text: ":=".into(),
                        span: Span {
                            line,
                            column: col,
                            length: 2,
                        },
                    });
                    col += 2;
                    i += 2;
                } else {
                    tokens.push(Token {
                        kind: TokKind::Colon,
                        text: ":".into(),
                        span: span1,
                    });
                    col += 1;
                    i += 1;
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let start_col = col;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Int,
                    text: chars[start..i].iter().collect(),
                    span: Span {
                        line,
                        column: start_col,
                        length: i - start,
                    },
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let start_col = col;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                    col += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Ident,
                    text: chars[start..i].iter().collect(),
                    span: Span {
                        line,
                        column: start_col,
                        length: i - start,
                    },
                });
            }
            other => {
                diags.push(Diagnostic::error(
                    span1,
                    format!("unexpected character `{other}`"),
                ));
                col += 1;
                i += 1;
            }
        }
    }
    tokens.push(Token {
        kind: TokKind::Eof,
        text: String::new(),
        span: Span {
            line,
            column: col,
            length: 0,
        },
    });
    (tokens, diags)
}
