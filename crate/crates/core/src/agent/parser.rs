//! Parser for the plan-rule language.
//!
//! ```text
//! // comment
//! belief.                                   initial belief
//! !goal.                                    initial goal
//! +!goal : ctx & not other <- a; b; c.      plan (context optional)
//! +belief(1,_)[source(human)] : true <- ...
//! ```
//!
//! Body actions: `+b`, `-b` (wildcards allowed), `!g`, `add_time(n)`,
//! `.print("text")`, `.send(agent, tell, b)`, `.emit(label, atoms...)`.

use super::{Action, Agent, Atom, Belief, BeliefPattern, Goal, Literal, PatternArg, Plan, PlanId, Trigger};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Internal(String),
    Plus,
    Minus,
    Bang,
    Colon,
    Arrow,
    Semi,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Amp,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Float(x) => format!("number {x}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Internal(s) => format!("`.{s}`"),
            Tok::End => "end of statement `.`".into(),
            other => format!("`{}`", match other {
                Tok::Plus => "+",
                Tok::Minus => "-",
                Tok::Bang => "!",
                Tok::Colon => ":",
                Tok::Arrow => "<-",
                Tok::Semi => ";",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBracket => "[",
                Tok::RBracket => "]",
                Tok::Comma => ",",
                Tok::Amp => "&",
                _ => unreachable!(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError { line, column, message };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let peek = chars.get(i + 1).copied();
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i, &mut col);
                continue;
            }
            '/' if peek == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '"' => {
                let mut s = String::new();
                advance(1, &mut i, &mut col);
                loop {
                    match chars.get(i) {
                        None | Some('\n') => return Err(err(tl, tc, "unterminated string".into())),
                        Some('"') => {
                            advance(1, &mut i, &mut col);
                            break;
                        }
                        Some('\\') if chars.get(i + 1).is_some() => {
                            s.push(chars[i + 1]);
                            advance(2, &mut i, &mut col);
                        }
                        Some(&ch) => {
                            s.push(ch);
                            advance(1, &mut i, &mut col);
                        }
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), line: tl, column: tc });
                continue;
            }
            '.' => {
                if peek.is_some_and(|p| p.is_ascii_alphabetic()) {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    let name: String = chars[start..j].iter().collect();
                    advance(j - i, &mut i, &mut col);
                    out.push(Spanned { tok: Tok::Internal(name), line: tl, column: tc });
                } else {
                    advance(1, &mut i, &mut col);
                    out.push(Spanned { tok: Tok::End, line: tl, column: tc });
                }
                continue;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut is_float = false;
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    is_float = true;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                let tok = if is_float {
                    Tok::Float(text.parse().map_err(|_| err(tl, tc, format!("bad number `{text}`")))?)
                } else {
                    Tok::Int(text.parse().map_err(|_| err(tl, tc, format!("bad integer `{text}`")))?)
                };
                advance(j - i, &mut i, &mut col);
                out.push(Spanned { tok, line: tl, column: tc });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                advance(j - i, &mut i, &mut col);
                out.push(Spanned { tok: Tok::Ident(text), line: tl, column: tc });
                continue;
            }
            _ => {}
        }
        let (tok, n) = match (c, peek) {
            ('<', Some('-')) => (Tok::Arrow, 2),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('!', _) => (Tok::Bang, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            ('&', _) => (Tok::Amp, 1),
            _ => return Err(err(tl, tc, format!("unexpected character `{c}`"))),
        };
        advance(n, &mut i, &mut col);
        out.push(Spanned { tok, line: tl, column: tc });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.eof, |s| (s.line, s.column))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError { line, column, message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s != "_" => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s != "_" => {
                self.pos += 1;
                Ok(Atom::Sym(s))
            }
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(Atom::Int(i))
            }
            Some(Tok::Minus) if matches!(self.peek_at(1), Some(Tok::Int(_))) => {
                self.pos += 1;
                let Some(Tok::Int(i)) = self.next() else { unreachable!() };
                Ok(Atom::Int(-i))
            }
            _ => self.unexpected("atom"),
        }
    }

    fn pattern(&mut self) -> Result<BeliefPattern, ParseError> {
        let functor = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                if matches!(self.peek(), Some(Tok::Ident(s)) if s == "_") {
                    self.pos += 1;
                    args.push(PatternArg::Wildcard);
                } else {
                    args.push(PatternArg::Atom(self.atom()?));
                }
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RParen)?;
                break;
            }
        }
        let mut source = None;
        if self.eat(&Tok::LBracket) {
            let key = self.ident()?;
            if key != "source" {
                return self.error(format!("unsupported annotation `{key}`"));
            }
            self.expect(Tok::LParen)?;
            source = Some(self.ident()?);
            self.expect(Tok::RParen)?;
            self.expect(Tok::RBracket)?;
        }
        Ok(BeliefPattern { functor, args, source })
    }

    fn ground(&mut self) -> Result<Belief, ParseError> {
        let p = self.pattern()?;
        match p.to_belief() {
            Some(b) => Ok(match p.source {
                Some(s) => b.with_source(s),
                None => b,
            }),
            None => self.error(format!("`{p}` must be ground here")),
        }
    }

    fn context(&mut self) -> Result<Vec<Literal>, ParseError> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "true") {
            self.pos += 1;
            return Ok(Vec::new());
        }
        let mut lits = Vec::new();
        loop {
            let negated = matches!(self.peek(), Some(Tok::Ident(s)) if s == "not");
            if negated {
                self.pos += 1;
            }
            lits.push(Literal { negated, pattern: self.pattern()? });
            if !self.eat(&Tok::Amp) {
                return Ok(lits);
            }
        }
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Plus) => {
                self.pos += 1;
                Ok(Action::AddBelief(self.ground()?))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Action::RemoveBelief(self.pattern()?))
            }
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Action::CreateGoal(Goal::new(self.ident()?)))
            }
            Some(Tok::Ident(name)) if name == "add_time" => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let t = match self.next() {
                    Some(Tok::Int(i)) => i as f64,
                    Some(Tok::Float(x)) => x,
                    _ => {
                        self.pos -= 1;
                        return self.unexpected("duration");
                    }
                };
                if t <= 0.0 {
                    self.pos -= 1;
                    return self.error("add_time duration must be positive");
                }
                self.expect(Tok::RParen)?;
                Ok(Action::AdvanceTime(t))
            }
            Some(Tok::Internal(name)) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let action = match name.as_str() {
                    "print" => match self.next() {
                        Some(Tok::Str(s)) => Action::Print(s),
                        _ => {
                            self.pos -= 1;
                            return self.unexpected("string");
                        }
                    },
                    "send" => {
                        let target = self.ident()?;
                        self.expect(Tok::Comma)?;
                        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "tell")
                            && self.peek_at(1) == Some(&Tok::Comma)
                        {
                            self.pos += 2;
                        }
                        Action::SendBelief { target, belief: self.ground()? }
                    }
                    "emit" => {
                        let label = self.ident()?;
                        let mut args = Vec::new();
                        while self.eat(&Tok::Comma) {
                            args.push(self.atom()?);
                        }
                        Action::Emit { label, args }
                    }
                    other => {
                        self.pos -= 2;
                        return self.error(format!("unknown internal action `.{other}`"));
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(action)
            }
            _ => self.unexpected("action"),
        }
    }
}

/// Parses one agent's source text. Plans keep source order; their ids are
/// `name#1`, `name#2`, ...
pub fn parse_agent(name: &str, src: &str) -> Result<Agent, ParseError> {
    let toks = lex(src)?;
    let eof = toks.last().map_or((1, 1), |s| (s.line, s.column + 1));
    let mut p = Parser { toks, pos: 0, eof };
    let mut beliefs = Vec::new();
    let mut goals = Vec::new();
    let mut plans: Vec<Plan> = Vec::new();

    while p.peek().is_some() {
        match p.peek() {
            Some(Tok::Bang) => {
                p.pos += 1;
                goals.push(Goal::new(p.ident()?));
                p.expect(Tok::End)?;
            }
            Some(Tok::Plus) | Some(Tok::Minus) => {
                let add = p.next() == Some(Tok::Plus);
                let trigger = if p.eat(&Tok::Bang) {
                    if !add {
                        return p.error("goal deletion triggers are not supported");
                    }
                    Trigger::AddGoal(p.ident()?)
                } else {
                    let pat = p.pattern()?;
                    if add {
                        Trigger::AddBelief(pat)
                    } else {
                        Trigger::DeleteBelief(pat)
                    }
                };
                let context = if p.eat(&Tok::Colon) { p.context()? } else { Vec::new() };
                p.expect(Tok::Arrow)?;
                let mut body = vec![p.action()?];
                while p.eat(&Tok::Semi) {
                    if p.peek() == Some(&Tok::End) {
                        break;
                    }
                    body.push(p.action()?);
                }
                p.expect(Tok::End)?;
                plans.push(Plan {
                    id: PlanId { agent: name.to_string(), ordinal: plans.len() + 1 },
                    trigger,
                    context,
                    body,
                });
            }
            Some(Tok::Ident(_)) => {
                beliefs.push(p.ground()?);
                p.expect(Tok::End)?;
            }
            _ => return p.unexpected("belief, goal or plan"),
        }
    }
    Ok(Agent::new(name, beliefs, goals, plans))
}
