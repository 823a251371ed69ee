//! Model-file grammar and canonical term text.
//!
//! Line-oriented; `#` starts a comment. Directives:
//!
//! ```text
//! %name   lotka-volterra
//! %term   a*2 b (c d | e f)@l
//! %rule   l : a b $X => c $X @ 0.5
//! %rule   TOP : (w $W | $C)@cell $X => (w $W | $C)@cell $X @ 1e-3
//! %observe a b
//! %tstop  100
//! %delta  0.5
//! ```
//!
//! Compartments are written `( wrap | content )@label`. `a*3` is three
//! copies of `a`. Every content pattern on a left-hand side carries exactly
//! one rest variable (`$Name`); a compartment pattern carries one for its
//! wrap and one for its content and cannot contain another compartment.
//! `%tstop` defaults to 100 and `%delta` to 1.

use std::collections::HashMap;

use thiserror::Error;

use crate::rule::{
    CompartmentPattern, CompartmentTemplate, ContentPattern, Model, Pattern, Rule, Template, Var, VarInfo, VarKind,
};
use crate::term::{Compartment, CompartmentIds, Label, Multiset, Symbols, Term};

pub const DEFAULT_T_STOP: f64 = 100.0;
pub const DEFAULT_DELTA: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown directive %{name}")]
    UnknownDirective { line: usize, name: String },
    #[error("line {line}: %{name} given more than once")]
    DuplicateDirective { line: usize, name: String },
    #[error("line {line}: variable ${name} on the right-hand side is not bound on the left")]
    UnboundVariable { line: usize, name: String },
    #[error("line {line}: rest variable ${name} is declared more than once")]
    DuplicateRestVariable { line: usize, name: String },
    #[error("line {line}: {place} needs a rest variable")]
    MissingRestVariable { line: usize, place: &'static str },
    #[error("line {line}: compartment patterns cannot be nested on a left-hand side")]
    NestedCompartmentPattern { line: usize },
    #[error("line {line}: a left-hand side may hold at most one compartment pattern")]
    MultipleCompartmentPatterns { line: usize },
    #[error("line {line}: {what} must be positive, got {value}")]
    NonPositive {
        line: usize,
        what: &'static str,
        value: f64,
    },
    #[error("sample period {delta} exceeds stop time {t_stop}")]
    DeltaExceedsStop { delta: f64, t_stop: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    LParen,
    RParen,
    Pipe,
    At,
    Colon,
    Arrow,
    Star,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(s) => format!("`${s}`"),
            Tok::Number(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::At => "`@`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Star => "`*`".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenizes `text`; `offset` is the 0-based column of `text[0]` in its line.
fn lex(text: &str, line: usize, offset: usize) -> Result<Vec<(Tok, usize)>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '|' => Some(Tok::Pipe),
            '@' => Some(Tok::At),
            ':' => Some(Tok::Colon),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, col));
            i += 1;
            continue;
        }
        if c == '=' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, col));
            i += 2;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        if c == '$' {
            let start = i + 1;
            i = start;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            if i == start {
                return Err(syntax(line, col, "expected a variable name after `$`"));
            }
            out.push((Tok::Var(chars[start..i].iter().collect()), col));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((Tok::Number(chars[start..i].iter().collect()), col));
            continue;
        }
        return Err(syntax(line, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    symbols: &'s mut Symbols,
}

/// Variables declared on a left-hand side, by name.
#[derive(Default)]
struct VarTable {
    vars: Vec<VarInfo>,
    index: HashMap<String, Var>,
}

impl<'s> Parser<'s> {
    fn new(text: &str, line: usize, offset: usize, symbols: &'s mut Symbols) -> Result<Self, ModelError> {
        Ok(Parser {
            toks: lex(text, line, offset)?,
            pos: 0,
            line,
            end_col: offset + text.chars().count() + 1,
            symbols,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |&(_, c)| c)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ModelError {
        syntax(self.line, self.col(), message)
    }

    fn unexpected(&self, wanted: &str) -> ModelError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of line")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ModelError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_end(&self) -> Result<(), ModelError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }

    fn number(&mut self, what: &'static str) -> Result<f64, ModelError> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Number(s)) => s
                .parse::<f64>()
                .map_err(|_| syntax(self.line, col, format!("malformed number `{s}`"))),
            _ => {
                self.pos -= 1;
                Err(self.unexpected(what))
            }
        }
    }

    fn positive(&mut self, what: &'static str) -> Result<f64, ModelError> {
        let v = self.number(what)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonPositive {
                line: self.line,
                what,
                value: v,
            })
        }
    }

    /// Optional `*count` suffix after an atom.
    fn multiplicity(&mut self) -> Result<u64, ModelError> {
        if self.peek() != Some(&Tok::Star) {
            return Ok(1);
        }
        self.pos += 1;
        let col = self.col();
        match self.bump() {
            Some(Tok::Number(s)) => match s.parse::<u64>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(syntax(
                    self.line,
                    col,
                    format!("multiplicity must be a positive integer, found `{s}`"),
                )),
            },
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a multiplicity"))
            }
        }
    }

    fn atom_into(&mut self, name: String, into: &mut Multiset) -> Result<(), ModelError> {
        let n = self.multiplicity()?;
        let atom = self.symbols.atom(&name);
        into.add(atom, n);
        Ok(())
    }

    /// `@label` closing a compartment; TOP is reserved.
    fn compartment_label(&mut self) -> Result<Label, ModelError> {
        self.expect(Tok::At, "`@` and a compartment label")?;
        let col = self.col();
        match self.bump() {
            Some(Tok::Ident(name)) if name == Symbols::TOP_NAME => Err(syntax(
                self.line,
                col,
                "TOP is reserved for the top level and cannot label a compartment",
            )),
            Some(Tok::Ident(name)) => Ok(self.symbols.label(&name)),
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a compartment label"))
            }
        }
    }

    fn wrap_atoms(&mut self) -> Result<Multiset, ModelError> {
        let mut wrap = Multiset::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            let Some(Tok::Ident(name)) = self.bump() else {
                unreachable!()
            };
            self.atom_into(name, &mut wrap)?;
        }
        Ok(wrap)
    }

    /// Ground term up to (not including) `)` or end of input.
    fn term(&mut self, ids: &mut CompartmentIds) -> Result<Term, ModelError> {
        let mut term = Term::new();
        loop {
            match self.peek() {
                None | Some(Tok::RParen) => return Ok(term),
                Some(Tok::Ident(_)) => {
                    let Some(Tok::Ident(name)) = self.bump() else {
                        unreachable!()
                    };
                    self.atom_into(name, &mut term.atoms)?;
                }
                Some(Tok::LParen) => {
                    self.pos += 1;
                    let id = ids.fresh();
                    let wrap = self.wrap_atoms()?;
                    self.expect(Tok::Pipe, "`|` between wrap and content")?;
                    let content = self.term(ids)?;
                    self.expect(Tok::RParen, "`)`")?;
                    let label = self.compartment_label()?;
                    term.compartments.push(Compartment {
                        id,
                        label,
                        wrap,
                        content,
                    });
                }
                Some(Tok::Var(_)) => return Err(self.error("variables are not allowed in a term")),
                Some(_) => return Err(self.unexpected("an atom or a compartment")),
            }
        }
    }

    fn declare(&mut self, vars: &mut VarTable, name: String, kind: VarKind) -> Result<Var, ModelError> {
        if vars.index.contains_key(&name) {
            return Err(ModelError::DuplicateRestVariable { line: self.line, name });
        }
        let var = Var(vars.vars.len() as u16);
        vars.index.insert(name.clone(), var);
        vars.vars.push(VarInfo { name, kind });
        Ok(var)
    }

    /// Atoms plus exactly one rest variable, up to `stop`.
    fn flat_pattern(
        &mut self,
        vars: &mut VarTable,
        kind: VarKind,
        place: &'static str,
    ) -> Result<(Multiset, Var), ModelError> {
        let mut atoms = Multiset::new();
        let mut rest = None;
        loop {
            match self.peek() {
                Some(Tok::Ident(_)) => {
                    let Some(Tok::Ident(name)) = self.bump() else {
                        unreachable!()
                    };
                    self.atom_into(name, &mut atoms)?;
                }
                Some(Tok::Var(_)) => {
                    let Some(Tok::Var(name)) = self.bump() else {
                        unreachable!()
                    };
                    if rest.is_some() {
                        return Err(ModelError::DuplicateRestVariable { line: self.line, name });
                    }
                    rest = Some(self.declare(vars, name, kind)?);
                }
                Some(Tok::LParen) => return Err(ModelError::NestedCompartmentPattern { line: self.line }),
                _ => break,
            }
        }
        let rest = rest.ok_or(ModelError::MissingRestVariable { line: self.line, place })?;
        Ok((atoms, rest))
    }

    fn lhs(&mut self, vars: &mut VarTable) -> Result<Pattern, ModelError> {
        let mut atoms = Multiset::new();
        let mut compartment = None;
        let mut rest = None;
        loop {
            match self.peek() {
                Some(Tok::Arrow) => break,
                Some(Tok::Ident(_)) => {
                    let Some(Tok::Ident(name)) = self.bump() else {
                        unreachable!()
                    };
                    self.atom_into(name, &mut atoms)?;
                }
                Some(Tok::Var(_)) => {
                    let Some(Tok::Var(name)) = self.bump() else {
                        unreachable!()
                    };
                    if rest.is_some() {
                        return Err(ModelError::DuplicateRestVariable { line: self.line, name });
                    }
                    rest = Some(self.declare(vars, name, VarKind::Content)?);
                }
                Some(Tok::LParen) => {
                    if compartment.is_some() {
                        return Err(ModelError::MultipleCompartmentPatterns { line: self.line });
                    }
                    self.pos += 1;
                    let (wrap_atoms, wrap_rest) =
                        self.flat_pattern(vars, VarKind::Wrap, "a compartment wrap pattern")?;
                    self.expect(Tok::Pipe, "`|` between wrap and content")?;
                    let (content_atoms, content_rest) =
                        self.flat_pattern(vars, VarKind::Content, "a compartment content pattern")?;
                    self.expect(Tok::RParen, "`)`")?;
                    let label = self.compartment_label()?;
                    compartment = Some(CompartmentPattern {
                        label,
                        wrap_atoms,
                        wrap_rest,
                        content: ContentPattern {
                            atoms: content_atoms,
                            rest: content_rest,
                        },
                    });
                }
                _ => return Err(self.unexpected("`=>`")),
            }
        }
        let rest = rest.ok_or(ModelError::MissingRestVariable {
            line: self.line,
            place: "the left-hand side",
        })?;
        Ok(Pattern {
            atoms,
            compartment,
            rest,
        })
    }

    fn reference(&mut self, vars: &VarTable, name: String) -> Result<Var, ModelError> {
        vars.index
            .get(&name)
            .copied()
            .ok_or(ModelError::UnboundVariable { line: self.line, name })
    }

    /// Output template up to `)` or the top-level `@` introducing the rate.
    fn template(&mut self, vars: &VarTable) -> Result<Template, ModelError> {
        let mut t = Template::default();
        loop {
            match self.peek() {
                None | Some(Tok::At) | Some(Tok::RParen) => return Ok(t),
                Some(Tok::Ident(_)) => {
                    let Some(Tok::Ident(name)) = self.bump() else {
                        unreachable!()
                    };
                    self.atom_into(name, &mut t.atoms)?;
                }
                Some(Tok::Var(_)) => {
                    let Some(Tok::Var(name)) = self.bump() else {
                        unreachable!()
                    };
                    let var = self.reference(vars, name)?;
                    t.vars.push(var);
                }
                Some(Tok::LParen) => {
                    self.pos += 1;
                    let mut wrap_atoms = Multiset::new();
                    let mut wrap_vars = Vec::new();
                    loop {
                        match self.peek() {
                            Some(Tok::Ident(_)) => {
                                let Some(Tok::Ident(name)) = self.bump() else {
                                    unreachable!()
                                };
                                self.atom_into(name, &mut wrap_atoms)?;
                            }
                            Some(Tok::Var(_)) => {
                                let col = self.col();
                                let Some(Tok::Var(name)) = self.bump() else {
                                    unreachable!()
                                };
                                let var = self.reference(vars, name.clone())?;
                                if vars.vars[var.0 as usize].kind != VarKind::Wrap {
                                    return Err(syntax(
                                        self.line,
                                        col,
                                        format!("${name} captures a content and cannot be placed in a wrap"),
                                    ));
                                }
                                wrap_vars.push(var);
                            }
                            _ => break,
                        }
                    }
                    self.expect(Tok::Pipe, "`|` between wrap and content")?;
                    let content = self.template(vars)?;
                    self.expect(Tok::RParen, "`)`")?;
                    let label = self.compartment_label()?;
                    t.compartments.push(CompartmentTemplate {
                        label,
                        wrap_atoms,
                        wrap_vars,
                        content,
                    });
                }
                Some(_) => return Err(self.unexpected("an atom, a variable or a compartment")),
            }
        }
    }

    fn rule(&mut self, id: usize) -> Result<Rule, ModelError> {
        let col = self.col();
        let label = match self.bump() {
            Some(Tok::Ident(name)) => self.symbols.label(&name),
            _ => {
                self.pos -= 1;
                let _ = col;
                return Err(self.unexpected("a rule label"));
            }
        };
        self.expect(Tok::Colon, "`:` after the rule label")?;
        let mut vars = VarTable::default();
        let lhs = self.lhs(&mut vars)?;
        self.expect(Tok::Arrow, "`=>`")?;
        let rhs = self.template(&vars)?;
        if self.peek() == Some(&Tok::RParen) {
            return Err(self.error("unbalanced `)`"));
        }
        self.expect(Tok::At, "`@` and a kinetic constant")?;
        let k = self.positive("kinetic constant")?;
        self.expect_end()?;
        Ok(Rule {
            id,
            label,
            lhs,
            rhs,
            k,
            vars: vars.vars,
        })
    }
}

/// Parses a bare term such as `a*2 b (c | d)@l`, interning into `symbols`.
pub fn parse_term(symbols: &mut Symbols, text: &str) -> Result<Term, ModelError> {
    let mut ids = CompartmentIds::default();
    let mut p = Parser::new(text, 1, 0, symbols)?;
    let t = p.term(&mut ids)?;
    if p.peek() == Some(&Tok::RParen) {
        return Err(p.error("unbalanced `)`"));
    }
    p.expect_end()?;
    Ok(t)
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let mut symbols = Symbols::new();
    let mut name = None;
    let mut initial = None;
    let mut rules = Vec::new();
    let mut observables = Vec::new();
    let mut t_stop = None;
    let mut delta = None;
    let mut ids = CompartmentIds::default();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let code = raw.split('#').next().unwrap_or("");
        let trimmed = code.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = code.len() - trimmed.len();
        let Some(rest) = trimmed.strip_prefix('%') else {
            return Err(syntax(line, indent + 1, "expected a directive starting with `%`"));
        };
        let word_len = rest.find(|c: char| c.is_whitespace()).unwrap_or(rest.len());
        let directive = &rest[..word_len];
        let body = &rest[word_len..];
        let body_offset = indent + 1 + word_len;
        let duplicate = || ModelError::DuplicateDirective {
            line,
            name: directive.to_string(),
        };
        match directive {
            "name" => {
                if name.is_some() {
                    return Err(duplicate());
                }
                name = Some(body.trim().to_string());
            }
            "term" => {
                if initial.is_some() {
                    return Err(duplicate());
                }
                let mut p = Parser::new(body, line, body_offset, &mut symbols)?;
                let t = p.term(&mut ids)?;
                if p.peek() == Some(&Tok::RParen) {
                    return Err(p.error("unbalanced `)`"));
                }
                p.expect_end()?;
                initial = Some(t);
            }
            "rule" => {
                let mut p = Parser::new(body, line, body_offset, &mut symbols)?;
                rules.push(p.rule(rules.len())?);
            }
            "observe" => {
                let mut p = Parser::new(body, line, body_offset, &mut symbols)?;
                while let Some(tok) = p.bump() {
                    match tok {
                        Tok::Ident(n) => {
                            let atom = p.symbols.atom(&n);
                            if observables.contains(&atom) {
                                return Err(syntax(line, p.toks[p.pos - 1].1, format!("`{n}` is already observed")));
                            }
                            observables.push(atom);
                        }
                        _ => {
                            p.pos -= 1;
                            return Err(p.unexpected("an atom name"));
                        }
                    }
                }
            }
            "tstop" | "delta" => {
                let slot = if directive == "tstop" { &mut t_stop } else { &mut delta };
                if slot.is_some() {
                    return Err(duplicate());
                }
                let mut p = Parser::new(body, line, body_offset, &mut symbols)?;
                let what = if directive == "tstop" {
                    "stop time"
                } else {
                    "sample period"
                };
                *slot = Some(p.positive(what)?);
                p.expect_end()?;
            }
            _ => {
                return Err(ModelError::UnknownDirective {
                    line,
                    name: directive.to_string(),
                })
            }
        }
    }

    let initial = initial.unwrap_or_default();
    let t_stop = t_stop.unwrap_or(DEFAULT_T_STOP);
    let delta = delta.unwrap_or(DEFAULT_DELTA);
    if delta > t_stop {
        return Err(ModelError::DeltaExceedsStop { delta, t_stop });
    }
    if observables.is_empty() {
        observables = initial.species();
        observables.sort_by(|&a, &b| symbols.atom_name(a).cmp(symbols.atom_name(b)));
    }
    Ok(Model {
        name: name.unwrap_or_else(|| "model".to_string()),
        symbols,
        initial,
        rules,
        observables,
        t_stop,
        delta,
    })
}

fn push_atoms(symbols: &Symbols, atoms: &Multiset, out: &mut Vec<String>) {
    let mut named: Vec<(&str, u64)> = atoms.iter().map(|(a, n)| (symbols.atom_name(a), n)).collect();
    named.sort_unstable();
    out.extend(named.into_iter().map(|(name, n)| {
        if n == 1 {
            name.to_string()
        } else {
            format!("{name}*{n}")
        }
    }));
}

fn compartment_text(inside_wrap: String, inside_content: String, label: &str) -> String {
    let mut parts = Vec::with_capacity(3);
    if !inside_wrap.is_empty() {
        parts.push(inside_wrap);
    }
    parts.push("|".to_string());
    if !inside_content.is_empty() {
        parts.push(inside_content);
    }
    format!("({})@{}", parts.join(" "), label)
}

/// Canonical text of a multiset: names sorted, repeats as `name*count`.
pub fn format_multiset(symbols: &Symbols, atoms: &Multiset) -> String {
    let mut out = Vec::new();
    push_atoms(symbols, atoms, &mut out);
    out.join(" ")
}

/// Canonical text of `term`. Deterministic and independent of compartment
/// ids and of the order of the compartment sequence.
pub fn format_term(symbols: &Symbols, term: &Term) -> String {
    let mut out = Vec::new();
    push_atoms(symbols, &term.atoms, &mut out);
    let mut comps: Vec<(&str, String)> = term
        .compartments
        .iter()
        .map(|c| {
            let label = symbols.label_name(c.label);
            let text = compartment_text(
                format_multiset(symbols, &c.wrap),
                format_term(symbols, &c.content),
                label,
            );
            (label, text)
        })
        .collect();
    comps.sort();
    out.extend(comps.into_iter().map(|(_, t)| t));
    out.join(" ")
}

fn format_template(symbols: &Symbols, rule: &Rule, t: &Template) -> String {
    let mut out = Vec::new();
    push_atoms(symbols, &t.atoms, &mut out);
    for c in &t.compartments {
        let mut wrap = vec![format_multiset(symbols, &c.wrap_atoms)];
        wrap.extend(c.wrap_vars.iter().map(|&v| format!("${}", rule.var_name(v))));
        let wrap: Vec<String> = wrap.into_iter().filter(|s| !s.is_empty()).collect();
        out.push(compartment_text(
            wrap.join(" "),
            format_template(symbols, rule, &c.content),
            symbols.label_name(c.label),
        ));
    }
    out.extend(t.vars.iter().map(|&v| format!("${}", rule.var_name(v))));
    out.join(" ")
}

/// Text of `rule` in model-file syntax (without the `%rule` directive).
pub fn format_rule(symbols: &Symbols, rule: &Rule) -> String {
    let mut lhs = Vec::new();
    push_atoms(symbols, &rule.lhs.atoms, &mut lhs);
    if let Some(cp) = &rule.lhs.compartment {
        let wrap = [
            format_multiset(symbols, &cp.wrap_atoms),
            format!("${}", rule.var_name(cp.wrap_rest)),
        ];
        let content = [
            format_multiset(symbols, &cp.content.atoms),
            format!("${}", rule.var_name(cp.content.rest)),
        ];
        let join = |parts: &[String]| {
            parts
                .iter()
                .filter(|s| !s.is_empty())
                .cloned()
                .collect::<Vec<_>>()
                .join(" ")
        };
        lhs.push(compartment_text(
            join(&wrap),
            join(&content),
            symbols.label_name(cp.label),
        ));
    }
    lhs.push(format!("${}", rule.var_name(rule.lhs.rest)));
    let rhs = format_template(symbols, rule, &rule.rhs);
    format!(
        "{} : {} => {} @ {}",
        symbols.label_name(rule.label),
        lhs.join(" "),
        rhs,
        rule.k
    )
}
