use std::fmt;

use super::SurfaceError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Names, keywords, and numerals; `[A-Za-z0-9_][A-Za-z0-9_']*`.
    Ident(String),
    Str(String),
    Semi,
    Colon,
    Comma,
    Dot,
    At,
    Eq,
    Arrow,
    FatArrow,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Semi => f.write_str(";"),
            Tok::Colon => f.write_str(":"),
            Tok::Comma => f.write_str(","),
            Tok::Dot => f.write_str("."),
            Tok::At => f.write_str("@"),
            Tok::Eq => f.write_str("="),
            Tok::Arrow => f.write_str("->"),
            Tok::FatArrow => f.write_str("=>"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SurfaceError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = match c {
            '/' => {
                bump(&mut chars);
                if chars.peek() != Some(&'/') {
                    return Err(SurfaceError::lex(start_line, start_col, "/", "stray `/`"));
                }
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match bump(&mut chars) {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(SurfaceError::lex(
                                start_line,
                                start_col,
                                &format!("\"{s}"),
                                "unterminated string",
                            ))
                        }
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    return Err(SurfaceError::lex(start_line, start_col, "-", "expected `->`"));
                }
            }
            '=' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::FatArrow
                } else {
                    Tok::Eq
                }
            }
            c if is_name_char(c) && c != '\'' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_name_char(c) {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                Tok::Ident(s)
            }
            _ => {
                bump(&mut chars);
                match c {
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '@' => Tok::At,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    other => {
                        return Err(SurfaceError::lex(
                            start_line,
                            start_col,
                            &other.to_string(),
                            "unexpected character",
                        ))
                    }
                }
            }
        };
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}
