//! Concrete syntax.
//!
//! ```text
//! file    := { "assume" NAME ":" type ";" } proc
//! proc    := par
//! par     := seq { "|" seq }                      (left-assoc)
//! seq     := "0" | "(" proc ")" | "[" NAME "]" seq
//!          | "new" NAME [ ":" (SYM | "~") ] [ "{" type "}" ] "." seq
//!          | "!" NAME "?" NAME "." seq            (replicated input)
//!          | NAME "!" NAME "." seq                (output)
//!          | NAME "?" NAME "." seq                (input)
//!          | NAME "<" NAME ">" "." seq            (delegate authorization)
//!          | NAME "(" NAME ")" "." seq            (receive authorization)
//! type    := "0" | "~" "(" type ")"
//!          | "{" [ (NAME|SYM) {"," (NAME|SYM)} ] "}" "(" type ")"
//! ```
//!
//! `[a]P` is the authorization scope; `NAME` matches `[a-z][A-Za-z0-9_]*`
//! and `SYM` matches `#[a-z][A-Za-z0-9_]*`. Whitespace and `//` line
//! comments are ignored. `print` is a full inverse: `parse(print(p))`
//! returns `p` structurally.

use std::fmt;

use crate::ast::{Name, Process, Symbol, SymbolTag};
use crate::typecheck::{AuthType, OmegaElem, OmegaSet};

/// A parsed file: `assume` declarations plus the process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub assumptions: Vec<(Name, AuthType)>,
    pub process: Process,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Sym(String),
    Zero,
    Bang,
    Query,
    Dot,
    Pipe,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Colon,
    Semi,
    Comma,
    Tilde,
    KwAssume,
    KwNew,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Name(n) => return write!(f, "name `{n}`"),
            Tok::Sym(s) => return write!(f, "symbol `#{s}`"),
            Tok::Zero => "`0`",
            Tok::Bang => "`!`",
            Tok::Query => "`?`",
            Tok::Dot => "`.`",
            Tok::Pipe => "`|`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Tilde => "`~`",
            Tok::KwAssume => "`assume`",
            Tok::KwNew => "`new`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump(c);
                } else if c == '/' && self.src[self.pos..].starts_with("//") {
                    while let Some(c) = self.peek() {
                        self.bump(c);
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                '0' => {
                    self.bump(c);
                    Tok::Zero
                }
                '!' => {
                    self.bump(c);
                    Tok::Bang
                }
                '?' => {
                    self.bump(c);
                    Tok::Query
                }
                '.' => {
                    self.bump(c);
                    Tok::Dot
                }
                '|' => {
                    self.bump(c);
                    Tok::Pipe
                }
                '(' => {
                    self.bump(c);
                    Tok::LParen
                }
                ')' => {
                    self.bump(c);
                    Tok::RParen
                }
                '[' => {
                    self.bump(c);
                    Tok::LBracket
                }
                ']' => {
                    self.bump(c);
                    Tok::RBracket
                }
                '{' => {
                    self.bump(c);
                    Tok::LBrace
                }
                '}' => {
                    self.bump(c);
                    Tok::RBrace
                }
                '<' => {
                    self.bump(c);
                    Tok::Lt
                }
                '>' => {
                    self.bump(c);
                    Tok::Gt
                }
                ':' => {
                    self.bump(c);
                    Tok::Colon
                }
                ';' => {
                    self.bump(c);
                    Tok::Semi
                }
                ',' => {
                    self.bump(c);
                    Tok::Comma
                }
                '~' => {
                    self.bump(c);
                    Tok::Tilde
                }
                '#' => {
                    self.bump(c);
                    let id = self.ident()?;
                    Tok::Sym(id)
                }
                'a'..='z' => {
                    let id = self.ident()?;
                    match id.as_str() {
                        "assume" => Tok::KwAssume,
                        "new" => Tok::KwNew,
                        _ => Tok::Name(id),
                    }
                }
                other => return Err(self.err(format!("unexpected character {other:?}"))),
            };
            out.push((tok, line, col));
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let Some(first) = self.peek() else {
            return Err(self.err("expected an identifier"));
        };
        if !first.is_ascii_lowercase() {
            return Err(self.err(format!(
                "identifiers start with a lowercase letter, found {first:?}"
            )));
        }
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump(c);
            } else {
                break;
            }
        }
        Ok(s)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.idx + 1).min(self.toks.len() - 1)].0
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let (_, line, col) = self.toks[self.idx];
        let (ref tok, ..) = self.toks[self.idx];
        ParseError {
            line,
            col,
            message: format!("{}, found {tok}", message.into()),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == &want {
            self.advance();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {want}")))
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.advance();
                Ok(Name::new(n))
            }
            _ => Err(self.err_here("expected a name")),
        }
    }

    fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut assumptions: Vec<(Name, AuthType)> = Vec::new();
        while self.peek() == &Tok::KwAssume {
            let (_, line, col) = self.toks[self.idx];
            self.advance();
            let n = self.name()?;
            self.expect(Tok::Colon)?;
            let t = self.ty()?;
            self.expect(Tok::Semi)?;
            if assumptions.iter().any(|(m, _)| m == &n) {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("duplicate assumption for {n}"),
                });
            }
            assumptions.push((n, t));
        }
        let process = self.proc()?;
        self.expect(Tok::Eof)?;
        Ok(SourceFile {
            assumptions,
            process,
        })
    }

    fn proc(&mut self) -> Result<Process, ParseError> {
        let mut acc = self.seq()?;
        while self.peek() == &Tok::Pipe {
            self.advance();
            let rhs = self.seq()?;
            acc = Process::par(acc, rhs);
        }
        Ok(acc)
    }

    fn seq(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::Zero => {
                self.advance();
                Ok(Process::Nil)
            }
            Tok::LParen => {
                self.advance();
                let p = self.proc()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::LBracket => {
                self.advance();
                let n = self.name()?;
                self.expect(Tok::RBracket)?;
                let body = self.seq()?;
                Ok(Process::auth(n, body))
            }
            Tok::KwNew => {
                self.advance();
                let binder = self.name()?;
                let tag = if self.peek() == &Tok::Colon {
                    self.advance();
                    match self.advance() {
                        Tok::Sym(s) => Some(SymbolTag::Sym(Symbol::new(s))),
                        Tok::Tilde => Some(SymbolTag::Nu),
                        _ => {
                            self.idx -= 1;
                            return Err(self.err_here("expected a symbol or `~` after `:`"));
                        }
                    }
                } else {
                    None
                };
                let ann = if self.peek() == &Tok::LBrace {
                    self.advance();
                    let t = self.ty()?;
                    self.expect(Tok::RBrace)?;
                    Some(t)
                } else {
                    None
                };
                self.expect(Tok::Dot)?;
                let body = self.seq()?;
                Ok(Process::res(binder, tag, ann, body))
            }
            Tok::Bang => {
                self.advance();
                let subject = self.name()?;
                self.expect(Tok::Query)?;
                let binder = self.name()?;
                self.expect(Tok::Dot)?;
                let cont = self.seq()?;
                Ok(Process::rep_in(subject, binder, cont))
            }
            Tok::Name(_) => {
                let subject = self.name()?;
                match self.peek().clone() {
                    Tok::Bang => {
                        self.advance();
                        let object = self.name()?;
                        self.expect(Tok::Dot)?;
                        Ok(Process::out(subject, object, self.seq()?))
                    }
                    Tok::Query => {
                        self.advance();
                        let binder = self.name()?;
                        self.expect(Tok::Dot)?;
                        Ok(Process::input(subject, binder, self.seq()?))
                    }
                    Tok::Lt => {
                        self.advance();
                        let object = self.name()?;
                        self.expect(Tok::Gt)?;
                        self.expect(Tok::Dot)?;
                        Ok(Process::deleg_out(subject, object, self.seq()?))
                    }
                    Tok::LParen => {
                        self.advance();
                        let object = self.name()?;
                        self.expect(Tok::RParen)?;
                        self.expect(Tok::Dot)?;
                        Ok(Process::deleg_in(subject, object, self.seq()?))
                    }
                    _ => Err(self.err_here("expected `!`, `?`, `<` or `(` after a subject name")),
                }
            }
            _ => Err(self.err_here("expected a process")),
        }
    }

    fn ty(&mut self) -> Result<AuthType, ParseError> {
        match self.peek().clone() {
            Tok::Zero => {
                self.advance();
                Ok(AuthType::Ground)
            }
            Tok::Tilde => {
                self.advance();
                self.expect(Tok::LParen)?;
                let carried = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(AuthType::chan(OmegaSet::Nu, carried))
            }
            Tok::LBrace => {
                self.advance();
                let mut elems = std::collections::BTreeSet::new();
                if self.peek() != &Tok::RBrace {
                    loop {
                        match self.advance() {
                            Tok::Name(n) => {
                                elems.insert(OmegaElem::Name(Name::new(n)));
                            }
                            Tok::Sym(s) => {
                                elems.insert(OmegaElem::Sym(Symbol::new(s)));
                            }
                            _ => {
                                self.idx -= 1;
                                return Err(self.err_here("expected a name or symbol in a set"));
                            }
                        }
                        if self.peek() == &Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace)?;
                self.expect(Tok::LParen)?;
                let carried = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(AuthType::chan(OmegaSet::Set(elems), carried))
            }
            _ => Err(self.err_here("expected a type")),
        }
    }
}

/// Parse a file with optional `assume` declarations.
pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    Parser { toks, idx: 0 }.file()
}

/// Parse a bare process (no declarations).
pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    let file = parse(text)?;
    if let Some((n, _)) = file.assumptions.first() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: format!("unexpected assumption for {n} in a bare process"),
        });
    }
    Ok(file.process)
}

fn write_seq(p: &Process, out: &mut String) {
    match p {
        Process::Par(..) => {
            out.push('(');
            write_proc(p, out);
            out.push(')');
        }
        _ => write_proc(p, out),
    }
}

fn write_proc(p: &Process, out: &mut String) {
    match p {
        Process::Nil => out.push('0'),
        Process::Par(l, r) => {
            // left-associated chains print flat; right nesting keeps parens
            write_proc(l, out);
            out.push_str(" | ");
            write_seq(r, out);
        }
        Process::Auth(a, body) => {
            out.push('[');
            out.push_str(a.as_str());
            out.push_str("] ");
            write_seq(body, out);
        }
        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            out.push_str("new ");
            out.push_str(binder.as_str());
            match tag {
                None => {}
                Some(SymbolTag::Sym(s)) => {
                    out.push_str(":#");
                    out.push_str(s.as_str());
                }
                Some(SymbolTag::Nu) => out.push_str(":~"),
            }
            if let Some(t) = ann {
                out.push_str(" {");
                write_type(t, out);
                out.push('}');
            }
            out.push_str(". ");
            write_seq(body, out);
        }
        Process::Out {
            subject,
            object,
            cont,
        } => {
            out.push_str(subject.as_str());
            out.push('!');
            out.push_str(object.as_str());
            out.push('.');
            write_seq(cont, out);
        }
        Process::In {
            subject,
            binder,
            cont,
        } => {
            out.push_str(subject.as_str());
            out.push('?');
            out.push_str(binder.as_str());
            out.push('.');
            write_seq(cont, out);
        }
        Process::DelegOut {
            subject,
            object,
            cont,
        } => {
            out.push_str(subject.as_str());
            out.push('<');
            out.push_str(object.as_str());
            out.push_str(">.");
            write_seq(cont, out);
        }
        Process::DelegIn {
            subject,
            object,
            cont,
        } => {
            out.push_str(subject.as_str());
            out.push('(');
            out.push_str(object.as_str());
            out.push_str(").");
            write_seq(cont, out);
        }
        Process::RepIn {
            subject,
            binder,
            cont,
        } => {
            out.push('!');
            out.push_str(subject.as_str());
            out.push('?');
            out.push_str(binder.as_str());
            out.push('.');
            write_seq(cont, out);
        }
    }
}

fn write_type(t: &AuthType, out: &mut String) {
    match t {
        AuthType::Ground => out.push('0'),
        AuthType::Chan(omega, carried) => {
            match omega {
                OmegaSet::Nu => out.push('~'),
                OmegaSet::Set(elems) => {
                    out.push('{');
                    for (i, e) in elems.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        match e {
                            OmegaElem::Name(n) => out.push_str(n.as_str()),
                            OmegaElem::Sym(s) => {
                                out.push('#');
                                out.push_str(s.as_str());
                            }
                        }
                    }
                    out.push('}');
                }
            }
            out.push('(');
            write_type(carried, out);
            out.push(')');
        }
    }
}

/// Render a process; `parse_process(print_process(p))` equals `p`.
pub fn print_process(p: &Process) -> String {
    let mut out = String::new();
    write_proc(p, &mut out);
    out
}

pub fn print_type(t: &AuthType) -> String {
    let mut out = String::new();
    write_type(t, &mut out);
    out
}

pub fn print_file(f: &SourceFile) -> String {
    let mut out = String::new();
    for (n, t) in &f.assumptions {
        out.push_str("assume ");
        out.push_str(n.as_str());
        out.push_str(" : ");
        write_type(t, &mut out);
        out.push_str(";\n");
    }
    write_proc(&f.process, &mut out);
    out.push('\n');
    out
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_process(self))
    }
}

impl fmt::Display for AuthType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_file(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Process as P;

    #[test]
    fn parses_auth_and_prefixes() {
        let p = parse_process("[a] a!b.0 | [a] a?x.0").unwrap();
        assert_eq!(
            p,
            P::par(
                P::auth("a", P::out("a", "b", P::Nil)),
                P::auth("a", P::input("a", "x", P::Nil)),
            )
        );
    }

    #[test]
    fn parses_delegation_example() {
        let p = parse_process("[license][auth] auth<license>.0 | [auth] auth(license).0").unwrap();
        assert_eq!(
            p,
            P::par(
                P::auth(
                    "license",
                    P::auth("auth", P::deleg_out("auth", "license", P::Nil))
                ),
                P::auth("auth", P::deleg_in("auth", "license", P::Nil)),
            )
        );
    }

    #[test]
    fn parses_annotated_restriction() {
        let p = parse_process("new a:#r {{b}(0)}. 0").unwrap();
        assert_eq!(
            p,
            P::res(
                "a",
                Some(SymbolTag::Sym(Symbol::new("r"))),
                Some(AuthType::chan(OmegaSet::names(["b"]), AuthType::Ground)),
                P::Nil
            )
        );
    }

    #[test]
    fn print_golden_forms() {
        assert_eq!(print_process(&P::Nil), "0");
        assert_eq!(
            print_process(&P::auth("a", P::auth("b", P::Nil))),
            "[a] [b] 0"
        );
        assert_eq!(
            print_process(&P::out("a", "b", P::input("a", "x", P::Nil))),
            "a!b.a?x.0"
        );
    }

    #[test]
    fn par_nesting_round_trips() {
        let left = P::par(P::par(P::Nil, P::auth("a", P::Nil)), P::Nil);
        let right = P::par(P::Nil, P::par(P::auth("a", P::Nil), P::Nil));
        for p in [left, right] {
            let s = print_process(&p);
            assert_eq!(parse_process(&s).unwrap(), p, "through {s}");
        }
    }

    #[test]
    fn rejects_missing_continuation() {
        let err = parse_process("a!b").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("expected `.`"));
    }

    #[test]
    fn rejects_duplicate_assumption() {
        let err = parse("assume a : 0;\nassume a : 0;\n0").unwrap_err();
        assert!(err.message.contains("duplicate assumption"));
        assert_eq!(err.line, 2);
    }

    #[test]
    fn file_with_assumptions() {
        let f = parse("assume alice : {alice}({exam,minitest}(0));\n[alice] 0").unwrap();
        assert_eq!(f.assumptions.len(), 1);
        assert_eq!(f.assumptions[0].0, Name::new("alice"));
        let again = parse(&print_file(&f)).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn comments_ignored() {
        let p = parse_process("// hello\n0 // trailing\n").unwrap();
        assert_eq!(p, P::Nil);
    }
}
