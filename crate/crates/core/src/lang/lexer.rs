use num_rational::Rational64;

use super::LangError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Rat(Rational64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Bar,
    Gt,
    GtGt,
    Lt,
    Semi,
    Def,
    Dot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> LangError {
        let _ = self.src;
        LangError::Syntax { line, col, msg: msg.into() }
    }
}

fn read_digits(cur: &mut Cursor<'_>) -> String {
    let mut s = String::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_digit() {
            s.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    s
}

pub fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let mut cur = Cursor { chars: src.char_indices().peekable(), src, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' && cur.peek2() == Some('-') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            let neg = c == '-';
            if neg {
                cur.bump();
            }
            let digits = read_digits(&mut cur);
            let mut n: i64 =
                digits.parse().map_err(|_| cur.err(line, col, format!("integer literal out of range: {digits}")))?;
            if neg {
                n = -n;
            }
            if cur.peek() == Some('/') && cur.peek2().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                let den = read_digits(&mut cur);
                let d: i64 = den.parse().map_err(|_| cur.err(line, col, "denominator out of range"))?;
                if d == 0 {
                    return Err(cur.err(line, col, "zero denominator"));
                }
                let r = Rational64::new(n, d);
                if r.is_integer() {
                    push(&mut out, Tok::Int(*r.numer()));
                } else {
                    push(&mut out, Tok::Rat(r));
                }
            } else {
                push(&mut out, Tok::Int(n));
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            push(&mut out, Tok::Ident(s));
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None => return Err(cur.err(line, col, "unterminated string literal")),
                    Some('"') => break,
                    Some('\\') => match cur.bump() {
                        Some('n') => s.push('\n'),
                        Some('r') => s.push('\r'),
                        Some('t') => s.push('\t'),
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some(o) => return Err(cur.err(cur.line, cur.col, format!("unknown escape `\\{o}`"))),
                        None => return Err(cur.err(line, col, "unterminated string literal")),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            push(&mut out, Tok::Str(s));
            continue;
        }
        cur.bump();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '|' => Tok::Bar,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '<' => Tok::Lt,
            '>' => {
                if cur.peek() == Some('>') {
                    cur.bump();
                    Tok::GtGt
                } else {
                    Tok::Gt
                }
            }
            ':' if cur.peek() == Some('=') => {
                cur.bump();
                Tok::Def
            }
            '=' => {
                let mut word = String::new();
                for _ in 0..3 {
                    match cur.peek() {
                        Some(ch) if ch.is_ascii_alphabetic() => {
                            word.push(ch);
                            cur.bump();
                        }
                        _ => break,
                    }
                }
                if word == "def" {
                    Tok::Def
                } else {
                    return Err(cur.err(line, col, "expected `=def`"));
                }
            }
            other => return Err(cur.err(line, col, format!("unexpected character `{other}`"))),
        };
        push(&mut out, tok);
    }
    Ok(out)
}
