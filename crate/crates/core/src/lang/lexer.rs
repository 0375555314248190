//! Tokenizer for MiniLang. `//` comments run to end of line and are
//! discarded; `#[req(ID,...)]` annotations are lexed as a single token
//! because requirement ids allow `-`, which the operator table would
//! otherwise split.

use super::ast::Span;
use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Annotation(Vec<String>),
    KwFn,
    KwLet,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    OrOr,
    AndAnd,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Annotation(_) => "annotation".to_string(),
            Tok::KwFn => "`fn`".to_string(),
            Tok::KwLet => "`let`".to_string(),
            Tok::KwIf => "`if`".to_string(),
            Tok::KwElse => "`else`".to_string(),
            Tok::KwWhile => "`while`".to_string(),
            Tok::KwReturn => "`return`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Assign => "`=`".to_string(),
            Tok::OrOr => "`||`".to_string(),
            Tok::AndAnd => "`&&`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Ge => "`>=`".to_string(),
            Tok::EqEq => "`==`".to_string(),
            Tok::Ne => "`!=`".to_string(),
            Tok::Bang => "`!`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Slash => "`/`".to_string(),
            Tok::Percent => "`%`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(source: &str, path: &str) -> Result<Vec<SpannedTok>, ParseError> {
    Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        path,
        out: Vec::new(),
    }
    .run()
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    path: &'a str,
    out: Vec<SpannedTok>,
}

impl<'a> Lexer<'a> {
    fn run(mut self) -> Result<Vec<SpannedTok>, ParseError> {
        loop {
            self.skip_trivia();
            let span = Span::new(self.line, self.col);
            let Some(c) = self.peek() else {
                self.push(Tok::Eof, span);
                return Ok(self.out);
            };
            match c {
                '#' => {
                    let ann = self.annotation(span)?;
                    self.push(ann, span);
                }
                '0'..='9' => {
                    let tok = self.number(span)?;
                    self.push(tok, span);
                }
                c if ident_start(c) => {
                    let word = self.word();
                    let tok = match word.as_str() {
                        "fn" => Tok::KwFn,
                        "let" => Tok::KwLet,
                        "if" => Tok::KwIf,
                        "else" => Tok::KwElse,
                        "while" => Tok::KwWhile,
                        "return" => Tok::KwReturn,
                        _ => Tok::Ident(word),
                    };
                    self.push(tok, span);
                }
                _ => {
                    let tok = self.operator(span)?;
                    self.push(tok, span);
                }
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn push(&mut self, tok: Tok, span: Span) {
        self.out.push(SpannedTok { tok, span });
    }

    fn err(&self, span: Span, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            path: self.path.to_string(),
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if ident_continue(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self, span: Span) -> Result<Tok, ParseError> {
        let mut digits = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        digits
            .parse::<i64>()
            .map(Tok::Int)
            .map_err(|_| self.err(span, format!("integer literal `{digits}` out of range")))
    }

    /// Lexes `#[req(` REQID ("," REQID)* `)]`. The opener and closer admit
    /// no interior whitespace; ids and commas may be separated by spaces.
    fn annotation(&mut self, span: Span) -> Result<Tok, ParseError> {
        for expected in "#[req(".chars() {
            match self.bump() {
                Some(c) if c == expected => {}
                _ => return Err(self.err(span, "malformed annotation, expected `#[req(`")),
            }
        }
        let mut ids = Vec::new();
        loop {
            self.skip_trivia();
            let id_span = Span::new(self.line, self.col);
            let id = self.req_id().ok_or_else(|| {
                self.err(id_span, "expected requirement id in annotation")
            })?;
            ids.push(id);
            self.skip_trivia();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(')') => {
                    self.bump();
                    if self.peek() == Some(']') {
                        self.bump();
                        return Ok(Tok::Annotation(ids));
                    }
                    let here = Span::new(self.line, self.col);
                    return Err(self.err(here, "expected `]` to close annotation"));
                }
                _ => {
                    let here = Span::new(self.line, self.col);
                    return Err(self.err(here, "expected `,` or `)]` in annotation"));
                }
            }
        }
    }

    /// REQID matches `[A-Za-z][A-Za-z0-9_-]*`.
    fn req_id(&mut self) -> Option<String> {
        let first = self.peek()?;
        if !first.is_ascii_alphabetic() {
            return None;
        }
        let mut s = String::new();
        s.push(first);
        self.bump();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Some(s)
    }

    fn operator(&mut self, span: Span) -> Result<Tok, ParseError> {
        let c = self.bump().expect("caller checked peek");
        let two = |lexer: &mut Self, next: char, long: Tok, short: Tok| {
            if lexer.peek() == Some(next) {
                lexer.bump();
                long
            } else {
                short
            }
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '=' => two(self, '=', Tok::EqEq, Tok::Assign),
            '<' => two(self, '=', Tok::Le, Tok::Lt),
            '>' => two(self, '=', Tok::Ge, Tok::Gt),
            '!' => two(self, '=', Tok::Ne, Tok::Bang),
            '&' => {
                if self.peek() == Some('&') {
                    self.bump();
                    Tok::AndAnd
                } else {
                    return Err(self.err(span, "unexpected character `&`, expected `&&`"));
                }
            }
            '|' => {
                if self.peek() == Some('|') {
                    self.bump();
                    Tok::OrOr
                } else {
                    return Err(self.err(span, "unexpected character `|`, expected `||`"));
                }
            }
            other => return Err(self.err(span, format!("unexpected character `{other}`"))),
        };
        Ok(tok)
    }
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}
