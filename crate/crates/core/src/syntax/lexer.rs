use std::sync::Arc;

use super::error::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Quoted(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Bang,
    Question,
    Plus,
    Amp,
    Bar,
    Dot,
    Arrow,
    Intro,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Plus => "+",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::Intro => "<->",
            Tok::Ident(_) | Tok::Quoted(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '/'
}

pub fn tokenize(src: &str, file: &Arc<str>) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, expected: &str, found: String| ParseError {
        span: SourceSpan { file: file.clone(), line, col },
        expected: expected.to_string(),
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let simple = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            '!' => Some(Tok::Bang),
            '?' => Some(Tok::Question),
            '+' => Some(Tok::Plus),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, line: start_line, col: start_col });
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' {
            if chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line, col });
                i += 2;
                col += 2;
                continue;
            }
            return Err(err(line, col, "`->`", "`-`".into()));
        }
        if c == '<' {
            if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                out.push(Token { tok: Tok::Intro, line, col });
                i += 3;
                col += 3;
                continue;
            }
            return Err(err(line, col, "`<->`", "`<`".into()));
        }
        if c == '"' {
            let mut text = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(start_line, start_col, "closing `\"`", "end of input".into())),
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(e @ ('"' | '\\')) => text.push(*e),
                            Some('n') => text.push('\n'),
                            Some(other) => return Err(err(line, col, "escape `\\\"`, `\\\\` or `\\n`", format!("`\\{other}`"))),
                            None => return Err(err(line, col, "escape sequence", "end of input".into())),
                        }
                        i += 2;
                        col += 2;
                    }
                    Some('\n') => {
                        text.push('\n');
                        i += 1;
                        line += 1;
                        col = 1;
                    }
                    Some(other) => {
                        text.push(*other);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Quoted(text), line: start_line, col: start_col });
            continue;
        }
        if is_ident_char(c) {
            let mut text = String::new();
            while i < chars.len() && is_ident_char(chars[i]) {
                // A `//` inside a word still starts a comment.
                if chars[i] == '/' && chars.get(i + 1) == Some(&'/') {
                    break;
                }
                text.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Ident(text), line: start_line, col: start_col });
            continue;
        }
        return Err(err(line, col, "a token", format!("`{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
