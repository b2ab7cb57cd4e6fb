//! Positioned s-expression reader for SMT-LIB style text.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    /// Symbol, keyword, numeral or bitvector literal.
    Atom(String, Pos),
    /// String literal with `""` escapes already resolved.
    Str(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::Str(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l, _) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a, _) => f.write_str(a),
            SExpr::Str(s, _) => crate::term::write_string_literal(f, s),
            SExpr::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadError {
    pub pos: Pos,
    pub message: String,
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
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

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn err<T>(&self, pos: Pos, message: impl Into<String>) -> Result<T, ReadError> {
        Err(ReadError {
            pos,
            message: message.into(),
        })
    }

    fn read(&mut self) -> Result<Option<SExpr>, ReadError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return self.err(start, "unbalanced parenthesis"),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List(items, start)));
                        }
                        Some(_) => {
                            let item = self.read()?.expect("peeked a character");
                            items.push(item);
                        }
                    }
                }
            }
            ')' => self.err(start, "unexpected `)`"),
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return self.err(start, "unterminated string literal"),
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(SExpr::Str(unescape_unicode(&s), start)))
            }
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return self.err(start, "unterminated quoted symbol"),
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(SExpr::Atom(s, start)))
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';' | '|') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(SExpr::Atom(s, start)))
            }
        }
    }
}

/// Resolves SMT-LIB 2.6 `\u{..}` escapes; other backslashes are literal.
fn unescape_unicode(s: &str) -> String {
    let mut out = String::new();
    let mut rest = s;
    while let Some(i) = rest.find("\\u{") {
        out.push_str(&rest[..i]);
        let after = &rest[i + 3..];
        match after.find('}') {
            Some(j) if j > 0 && j <= 5 => {
                match u32::from_str_radix(&after[..j], 16).ok().and_then(char::from_u32) {
                    Some(c) => {
                        out.push(c);
                        rest = &after[j + 1..];
                    }
                    None => {
                        out.push_str("\\u{");
                        rest = after;
                    }
                }
            }
            _ => {
                out.push_str("\\u{");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Reads every top-level s-expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, ReadError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    while let Some(e) = r.read()? {
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let es = read_all("(a (b \"c\"\"d\"))\n  ; comment\n(e)").unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es[1].pos(), Pos { line: 3, col: 1 });
        let inner = es[0].as_list().unwrap()[1].as_list().unwrap();
        assert_eq!(inner[1], SExpr::Str("c\"d".into(), Pos { line: 1, col: 7 }));
    }

    #[test]
    fn unbalanced_is_positioned() {
        let e = read_all("\n  (a (b)").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 3 });
        assert!(read_all(")").is_err());
    }

    #[test]
    fn unicode_escape() {
        let es = read_all("\"a\\u{48}b\"").unwrap();
        assert_eq!(es[0], SExpr::Str("aHb".into(), Pos { line: 1, col: 1 }));
    }
}
