//! The line-oriented `.pta` text format.
//!
//! ```text
//! clocks x y;
//! bound 2;
//! loc l0 inv "x<=0" init;
//! loc l1 inv "x<=2";
//! loc goal goal;
//! loc fail fail;
//! trans l1 guard "x>=1" act alpha { 1/2 -> reset{x} l0; 1/2 -> goal; };
//! ```
//!
//! `#` starts a comment. `inv` and `guard` default to `true`. Goal and fail
//! get a single trivially guarded self-loop on load.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{
    Atom, Branch, ClockConstraint, Location, Pta, Rel, Transition, ValidationError, Witness,
};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("invalid model: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Semi,
    LBrace,
    RBrace,
    Arrow,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let tok = match c {
                ';' => {
                    i += 1;
                    Tok::Semi
                }
                '{' => {
                    i += 1;
                    Tok::LBrace
                }
                '}' => {
                    i += 1;
                    Tok::RBrace
                }
                ',' => {
                    i += 1;
                    Tok::Comma
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    i += 2;
                    Tok::Arrow
                }
                '"' => {
                    let start = i + 1;
                    let Some(end) = chars[start..].iter().position(|&d| d == '"') else {
                        return Err(syntax(line, col, "unterminated string"));
                    };
                    i = start + end + 1;
                    Tok::Str(chars[start..start + end].iter().collect())
                }
                d if d.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/' || chars[i] == '.') {
                        i += 1;
                    }
                    Tok::Number(chars[start..i].iter().collect())
                }
                a if a.is_alphabetic() || a == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                        i += 1;
                    }
                    Tok::Ident(chars[start..i].iter().collect())
                }
                other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
            };
            out.push(Token { tok, line, col });
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.eof)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Token, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(self.next().unwrap()),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<Token, ParseError> {
        match self.peek() {
            Some(Tok::Str(_)) => Ok(self.next().unwrap()),
            _ => Err(self.err(format!("expected quoted {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

fn ident_of(t: &Token) -> &str {
    match &t.tok {
        Tok::Ident(s) | Tok::Str(s) | Tok::Number(s) => s,
        _ => "",
    }
}

/// Parses a constraint such as `x<=2 & x-y>1`, `true` or `false`.
pub fn parse_constraint(text: &str, clocks: &[String]) -> Result<ClockConstraint, String> {
    let n = clocks.len();
    let trimmed = text.trim();
    if trimmed == "true" || trimmed.is_empty() {
        return Ok(ClockConstraint::always(n));
    }
    let mut atoms = Vec::new();
    let mut is_false = false;
    for part in trimmed.split('&').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "false" {
            is_false = true;
            continue;
        }
        if part == "true" {
            continue;
        }
        atoms.push(parse_atom(part, clocks)?);
    }
    if is_false {
        return Ok(ClockConstraint::never(n));
    }
    Ok(ClockConstraint::from_atoms(n, atoms))
}

fn parse_atom(part: &str, clocks: &[String]) -> Result<Atom, String> {
    let ops = [("<=", Rel::Le), (">=", Rel::Ge), ("==", Rel::Eq), ("<", Rel::Lt), (">", Rel::Gt), ("=", Rel::Eq)];
    let (idx, op, rel) = ops
        .iter()
        .filter_map(|(op, rel)| part.find(op).map(|i| (i, *op, *rel)))
        .min_by_key(|(i, op, _)| (*i, std::cmp::Reverse(op.len())))
        .ok_or_else(|| format!("no comparison in `{part}`"))?;
    let lhs = part[..idx].trim();
    let rhs = part[idx + op.len()..].trim();
    let constant: i64 = rhs.parse().map_err(|_| format!("bad constant `{rhs}`"))?;
    let clock = |name: &str| -> Result<usize, String> {
        clocks
            .iter()
            .position(|c| c == name)
            .map(|p| p + 1)
            .ok_or_else(|| format!("unknown clock `{name}`"))
    };
    let (left, right) = match lhs.split_once('-') {
        Some((a, b)) => (clock(a.trim())?, clock(b.trim())?),
        None => (clock(lhs)?, 0),
    };
    if left == right {
        return Err(format!("clock repeated in `{part}`"));
    }
    Ok(Atom::new(left, right, rel, constant))
}

/// A parsed model with the positions of its location declarations.
#[derive(Debug, Clone)]
pub struct PtaSource {
    pub text: String,
    pub pta: Pta,
    pub spans: BTreeMap<String, (usize, usize)>,
}

pub fn parse(text: &str) -> Result<Pta, ParseError> {
    parse_source(text).map(|s| s.pta)
}

pub fn parse_source(text: &str) -> Result<PtaSource, ParseError> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), 1);
    let mut cur = Cursor { toks, pos: 0, eof };

    let mut clocks: Vec<String> = Vec::new();
    let mut bound = None;
    let mut locations: Vec<Location> = Vec::new();
    let mut spans = BTreeMap::new();
    let mut flags: [Option<usize>; 3] = [None, None, None];
    // (location token, guard token, action, branches)
    type RawBranch = (Rational, Vec<Token>, Token);
    let mut raw_trans: Vec<(Token, Option<Token>, String, Vec<RawBranch>)> = Vec::new();
    let mut inv_tokens: Vec<Option<Token>> = Vec::new();

    while let Some(tok) = cur.peek().cloned() {
        let Tok::Ident(kw) = tok else { return Err(cur.err("expected a declaration")) };
        cur.pos += 1;
        match kw.as_str() {
            "clocks" => {
                while let Some(Tok::Ident(_)) = cur.peek() {
                    clocks.push(ident_of(&cur.next().unwrap()).to_string());
                    if cur.peek() == Some(&Tok::Comma) {
                        cur.pos += 1;
                    }
                }
                cur.expect(Tok::Semi, "`;`")?;
            }
            "bound" => {
                let t = cur.next().ok_or_else(|| cur.err("expected bound"))?;
                let Tok::Number(s) = &t.tok else { return Err(syntax(t.line, t.col, "expected integer bound")) };
                bound = Some(s.parse::<i64>().map_err(|_| syntax(t.line, t.col, "expected integer bound"))?);
                cur.expect(Tok::Semi, "`;`")?;
            }
            "loc" => {
                let name = cur.ident("location name")?;
                let mut inv = None;
                let idx = locations.len();
                loop {
                    if cur.keyword("inv") {
                        inv = Some(cur.string("invariant")?);
                    } else if cur.keyword("init") {
                        set_flag(&mut flags[0], idx, "init")?;
                    } else if cur.keyword("goal") {
                        set_flag(&mut flags[1], idx, "goal")?;
                    } else if cur.keyword("fail") {
                        set_flag(&mut flags[2], idx, "fail")?;
                    } else {
                        break;
                    }
                }
                cur.expect(Tok::Semi, "`;`")?;
                spans.insert(ident_of(&name).to_string(), (name.line, name.col));
                locations.push(Location {
                    name: ident_of(&name).to_string(),
                    invariant: ClockConstraint::always(0),
                    transitions: Vec::new(),
                });
                inv_tokens.push(inv);
            }
            "trans" => {
                let from = cur.ident("source location")?;
                let guard = if cur.keyword("guard") { Some(cur.string("guard")?) } else { None };
                if !cur.keyword("act") {
                    return Err(cur.err("expected `act`"));
                }
                let action = ident_of(&cur.ident("action name")?).to_string();
                cur.expect(Tok::LBrace, "`{`")?;
                let mut branches = Vec::new();
                while cur.peek() != Some(&Tok::RBrace) {
                    let pt = cur.next().ok_or_else(|| cur.err("expected probability"))?;
                    let Tok::Number(ps) = &pt.tok else {
                        return Err(syntax(pt.line, pt.col, "expected probability"));
                    };
                    let prob: Rational =
                        ps.parse().map_err(|_| syntax(pt.line, pt.col, format!("bad probability `{ps}`")))?;
                    cur.expect(Tok::Arrow, "`->`")?;
                    let mut resets = Vec::new();
                    if cur.keyword("reset") {
                        cur.expect(Tok::LBrace, "`{`")?;
                        while let Some(Tok::Ident(_)) = cur.peek() {
                            resets.push(cur.next().unwrap());
                            if cur.peek() == Some(&Tok::Comma) {
                                cur.pos += 1;
                            }
                        }
                        cur.expect(Tok::RBrace, "`}`")?;
                    }
                    let target = cur.ident("target location")?;
                    cur.expect(Tok::Semi, "`;`")?;
                    branches.push((prob, resets, target));
                }
                cur.pos += 1;
                if cur.peek() == Some(&Tok::Semi) {
                    cur.pos += 1;
                }
                raw_trans.push((from, guard, action, branches));
            }
            other => return Err(syntax(tok_line(&cur), 1, format!("unknown declaration `{other}`"))),
        }
    }

    let n = clocks.len();
    let constraint = |t: &Option<Token>| -> Result<ClockConstraint, ParseError> {
        match t {
            None => Ok(ClockConstraint::always(n)),
            Some(t) => parse_constraint(ident_of(t), &clocks).map_err(|m| {
                if m.starts_with("unknown clock") {
                    let name = m.split('`').nth(1).unwrap_or("").to_string();
                    ParseError::Validation(ValidationError::UnknownClock(name))
                } else {
                    syntax(t.line, t.col, m)
                }
            }),
        }
    };
    for (l, inv) in locations.iter_mut().zip(&inv_tokens) {
        l.invariant = constraint(inv)?;
    }
    let loc_index = |t: &Token, locs: &[Location]| -> Result<usize, ParseError> {
        let name = ident_of(t);
        locs.iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ParseError::Validation(ValidationError::UnknownLocation(name.to_string())))
    };
    for (from, guard, action, branches) in &raw_trans {
        let li = loc_index(from, &locations)?;
        let guard = constraint(guard)?;
        let mut bs = Vec::new();
        for (prob, resets, target) in branches {
            let mut rs = Vec::new();
            for r in resets {
                let name = ident_of(r);
                let c = clocks
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| ParseError::Validation(ValidationError::UnknownClock(name.to_string())))?;
                rs.push(c + 1);
            }
            rs.sort_unstable();
            rs.dedup();
            bs.push(Branch { prob: prob.clone(), resets: rs, target: loc_index(target, &locations)? });
        }
        locations[li].transitions.push(Transition { guard, action: action.clone(), branches: bs });
    }

    let initial = flags[0].ok_or(ValidationError::MissingInit)?;
    let goal = flags[1].ok_or(ValidationError::MissingGoal)?;
    let fail = flags[2].ok_or(ValidationError::MissingFail)?;
    let mut pta = Pta { clocks, bound, locations, initial, goal, fail };
    for l in [goal, fail] {
        if pta.locations[l].transitions.iter().flat_map(|t| &t.branches).any(|b| b.target != l) {
            return Err(ValidationError::NotAbsorbing(pta.locations[l].name.clone()).into());
        }
    }
    if goal != fail {
        pta.normalize_absorbing();
    }
    pta.validate()?;
    Ok(PtaSource { text: text.to_string(), pta, spans })
}

fn tok_line(cur: &Cursor) -> usize {
    cur.toks.get(cur.pos.saturating_sub(1)).map(|t| t.line).unwrap_or(cur.eof.0)
}

fn set_flag(slot: &mut Option<usize>, idx: usize, name: &'static str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ValidationError::DuplicateFlag(name).into());
    }
    *slot = Some(idx);
    Ok(())
}

/// Deterministic text form; `parse(serialize(t)) == t` for valid `t`.
pub fn serialize(t: &Pta) -> String {
    let mut out = String::new();
    out.push_str("clocks");
    for c in &t.clocks {
        out.push(' ');
        out.push_str(c);
    }
    out.push_str(";\n");
    if let Some(k) = t.bound {
        out.push_str(&format!("bound {k};\n"));
    }
    for (i, l) in t.locations.iter().enumerate() {
        out.push_str("loc ");
        out.push_str(&l.name);
        if l.invariant.atoms().is_none_or(|a| !a.is_empty()) {
            out.push_str(&format!(" inv \"{}\"", l.invariant.render(&t.clocks)));
        }
        if i == t.initial {
            out.push_str(" init");
        }
        if i == t.goal {
            out.push_str(" goal");
        }
        if i == t.fail {
            out.push_str(" fail");
        }
        out.push_str(";\n");
    }
    for (i, l) in t.locations.iter().enumerate() {
        if t.is_absorbing(i) {
            continue;
        }
        for tr in &l.transitions {
            out.push_str(&format!("trans {}", l.name));
            if tr.guard.atoms().is_none_or(|a| !a.is_empty()) {
                out.push_str(&format!(" guard \"{}\"", tr.guard.render(&t.clocks)));
            }
            out.push_str(&format!(" act {} {{", tr.action));
            for b in &tr.branches {
                out.push_str(&format!(" {} ->", b.prob));
                if !b.resets.is_empty() {
                    let names: Vec<&str> = b.resets.iter().map(|&c| t.clocks[c - 1].as_str()).collect();
                    out.push_str(&format!(" reset{{{}}}", names.join(",")));
                }
                out.push_str(&format!(" {};", t.locations[b.target].name));
            }
            out.push_str(" };\n");
        }
    }
    out
}

/// Witness file: a comment block with provenance followed by the subsystem.
pub fn serialize_witness(w: &Witness) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# witness for Pr_{} >= {} ({} subsystem)\n",
        w.direction, w.verified_threshold, w.strength
    ));
    let ids: Vec<String> = w.support.iter().map(|s| s.to_string()).collect();
    out.push_str(&format!("# support regions: {}\n", ids.join(" ")));
    out.push_str(&serialize(&w.subsystem));
    out
}
