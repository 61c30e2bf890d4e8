use super::{Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Digits, optionally followed by `.digits` or `/digits`.
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Less,
    Tilde,
    Arrow,
    FatArrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Less => "`<`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, out: &mut String, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek().filter(|c| f(*c)) {
            out.push(c);
            self.bump();
        }
    }
}

fn syntax(pos: Pos, code: &'static str, message: impl Into<String>) -> Diagnostic {
    Diagnostic::syntax(pos, code, message)
}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor { chars: text.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let tok = match c {
            '/' => {
                cur.bump();
                if cur.peek() != Some('/') {
                    return Err(syntax(pos, "UnexpectedChar", "unexpected `/`"));
                }
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                cur.eat_while(&mut s, |c| c.is_ascii_alphanumeric() || c == '_');
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                cur.eat_while(&mut s, |c| c.is_ascii_digit());
                if let Some(sep @ ('.' | '/')) = cur.peek() {
                    s.push(sep);
                    cur.bump();
                    let before = s.len();
                    cur.eat_while(&mut s, |c| c.is_ascii_digit());
                    if s.len() == before {
                        return Err(syntax(cur.pos, "MalformedNumber", format!("digits expected after `{sep}`")));
                    }
                }
                Tok::Number(s)
            }
            '"' => {
                cur.bump();
                Tok::Str(string_body(&mut cur, pos)?)
            }
            '-' | '=' => {
                cur.bump();
                if cur.peek() != Some('>') {
                    return Err(syntax(pos, "UnexpectedChar", format!("unexpected `{c}`")));
                }
                cur.bump();
                if c == '-' {
                    Tok::Arrow
                } else {
                    Tok::FatArrow
                }
            }
            _ => {
                cur.bump();
                match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '<' => Tok::Less,
                    '~' => Tok::Tilde,
                    _ => return Err(syntax(pos, "UnexpectedChar", format!("unexpected character {c:?}"))),
                }
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: cur.pos });
    Ok(out)
}

/// Reads a string body after the opening quote. Escapes follow the ones the
/// printer emits: `\\ \" \' \n \r \t \0 \u{hex}`.
fn string_body(cur: &mut Cursor<'_>, start: Pos) -> Result<String, Diagnostic> {
    let mut s = String::new();
    loop {
        let pos = cur.pos;
        match cur.bump() {
            None => return Err(syntax(start, "UnterminatedString", "string literal is not closed")),
            Some('"') => return Ok(s),
            Some('\\') => {
                let c = match cur.bump() {
                    Some('\\') => '\\',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('t') => '\t',
                    Some('0') => '\0',
                    Some('u') => unicode_escape(cur, pos)?,
                    _ => return Err(syntax(pos, "BadEscape", "unknown escape sequence")),
                };
                s.push(c);
            }
            Some(c) => s.push(c),
        }
    }
}

fn unicode_escape(cur: &mut Cursor<'_>, pos: Pos) -> Result<char, Diagnostic> {
    let bad = || syntax(pos, "BadEscape", "malformed `\\u{...}` escape");
    if cur.bump() != Some('{') {
        return Err(bad());
    }
    let mut hex = String::new();
    cur.eat_while(&mut hex, |c| c.is_ascii_hexdigit());
    if cur.bump() != Some('}') || hex.is_empty() || hex.len() > 6 {
        return Err(bad());
    }
    u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32).ok_or_else(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("rule r1 rank 2 : t(X) => u(X); // done"),
            vec![
                Tok::Ident("rule".into()),
                Tok::Ident("r1".into()),
                Tok::Ident("rank".into()),
                Tok::Number("2".into()),
                Tok::Colon,
                Tok::Ident("t".into()),
                Tok::LParen,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::FatArrow,
                Tok::Ident("u".into()),
                Tok::LParen,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::Semi,
                Tok::Eof,
            ]
        );
        assert_eq!(toks("0.25 1/4"), vec![Tok::Number("0.25".into()), Tok::Number("1/4".into()), Tok::Eof]);
    }

    #[test]
    fn strings_round_trip_debug_escapes() {
        for s in ["plain", "q\"uote", "tab\tnl\n", "bell\u{7}", "é ü"] {
            let text = format!("{s:?}");
            assert_eq!(toks(&text), vec![Tok::Str(s.into()), Tok::Eof]);
        }
    }

    #[test]
    fn positions_and_errors() {
        let t = lex("a\n  b").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
        let e = lex("a\n  \"open").unwrap_err();
        assert_eq!((e.code, e.pos), ("UnterminatedString", Pos { line: 2, col: 3 }));
        assert_eq!(lex("a # b").unwrap_err().code, "UnexpectedChar");
        assert_eq!(lex("1.").unwrap_err().code, "MalformedNumber");
    }
}
