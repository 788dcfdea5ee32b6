//! Minimal S-expression reader for solver output.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v) => Some(v),
            Sexp::Atom(_) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list()?.first()?.atom()
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => write!(f, "{a}"),
            Sexp::List(v) => {
                write!(f, "(")?;
                for (i, s) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed solver output at byte {0}")]
pub struct SexpError(pub usize);

/// Parses every top-level S-expression in `text`. Quoted symbols keep their
/// bars stripped; string literals keep their quotes.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'(' => {
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                let done = stack.pop().ok_or(SexpError(i))?;
                stack.last_mut().ok_or(SexpError(i))?.push(Sexp::List(done));
                i += 1;
            }
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'|' => {
                let end = text[i + 1..].find('|').ok_or(SexpError(i))? + i + 1;
                stack.last_mut().unwrap().push(Sexp::Atom(text[i + 1..end].to_string()));
                i = end + 1;
            }
            b'"' => {
                let mut j = i + 1;
                loop {
                    match bytes.get(j) {
                        None => return Err(SexpError(i)),
                        // "" is an escaped quote
                        Some(b'"') if bytes.get(j + 1) == Some(&b'"') => j += 2,
                        Some(b'"') => break,
                        Some(_) => j += 1,
                    }
                }
                stack.last_mut().unwrap().push(Sexp::Atom(text[i..=j].to_string()));
                i = j + 1;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !b"()|;\"".contains(&bytes[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(text[start..i].to_string()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SexpError(text.len()));
    }
    Ok(stack.pop().unwrap())
}
