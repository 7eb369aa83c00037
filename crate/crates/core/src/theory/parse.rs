use std::sync::Arc;

use super::term::common_depth;
use super::{combo_name, depth_of, GradedSignature, Inequation, OpKind, Term, TheoryError};
use crate::poset::{validate_poset, FinPoset};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Leq,
    Eq,
}

/// Reads a context such as `x<=y, z` or `x <= y <= z`.
pub fn parse_context(text: &str) -> Result<FinPoset, TheoryError> {
    let text = text.trim().trim_start_matches('{').trim_end_matches('}');
    let mut names = Vec::new();
    let mut pairs = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let chain: Vec<&str> = part.split("<=").map(str::trim).collect();
        for name in &chain {
            if name.is_empty() || !name.chars().all(is_ident_char) {
                return Err(TheoryError::Parse(format!("bad context entry `{part}`")));
            }
            names.push(name.to_string());
        }
        for w in chain.windows(2) {
            pairs.push((w[0].to_string(), w[1].to_string()));
        }
    }
    Ok(validate_poset(names, &pairs)?)
}

/// Parses infix syntax (`a(x) + b(y)`, `1/2 x + 1/2 y`, `0`, `f(u, v)`) or
/// s-expressions (`(a+b x y)`).
pub fn parse_term(sig: &GradedSignature, text: &str) -> Result<Term, TheoryError> {
    let mut p = Parser { s: text.chars().collect(), pos: 0, sig };
    let t = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

/// Parses `lhs <= rhs`, `lhs >= rhs` or `lhs = rhs`, optionally followed by
/// `: k`. Without a depth annotation the least common depth is used.
pub fn parse_goal(
    sig: &GradedSignature,
    context: Arc<FinPoset>,
    text: &str,
) -> Result<(Inequation, Relation), TheoryError> {
    let (body, depth) = match top_level_find(text, ":") {
        Some(i) => {
            let k = text[i + 1..]
                .trim()
                .parse::<usize>()
                .map_err(|_| TheoryError::Parse(format!("bad depth in `{text}`")))?;
            (&text[..i], Some(k))
        }
        None => (text, None),
    };
    let (lhs, rhs, rel) = if let Some(i) = top_level_find(body, "<=") {
        (&body[..i], &body[i + 2..], Relation::Leq)
    } else if let Some(i) = top_level_find(body, ">=") {
        (&body[i + 2..], &body[..i], Relation::Leq)
    } else if let Some(i) = top_level_find(body, "=") {
        (&body[..i], &body[i + 1..], Relation::Eq)
    } else {
        return Err(TheoryError::Parse(format!("no relation in `{text}`")));
    };
    let lhs = parse_term(sig, lhs)?;
    let rhs = parse_term(sig, rhs)?;
    let depth = match depth {
        Some(k) => k,
        None => {
            let ds = [depth_of(sig, &lhs)?, depth_of(sig, &rhs)?];
            common_depth(&ds).ok_or_else(|| TheoryError::MalformedGoal("sides have different depths".into()))?
        }
    };
    Ok((Inequation::new(sig, context, depth, lhs, rhs)?, rel))
}

fn top_level_find(text: &str, pat: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0i32;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            _ if depth == 0 && text[i..].starts_with(pat) => {
                // a lone `=` must not be part of `<=` or `>=`
                if pat == "=" && i > 0 && matches!(bytes[i - 1], b'<' | b'>') {
                    continue;
                }
                return Some(i);
            }
            _ => {}
        }
    }
    None
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '•' | '.')
}

struct Parser<'a> {
    s: Vec<char>,
    pos: usize,
    sig: &'a GradedSignature,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> TheoryError {
        let rest: String = self.s[self.pos.min(self.s.len())..].iter().collect();
        TheoryError::Parse(format!("{msg} at `{rest}`"))
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Term, TheoryError> {
        let mut summands = vec![self.summand()?];
        while self.eat('+') {
            summands.push(self.summand()?);
        }
        self.assemble(summands)
    }

    fn summand(&mut self) -> Result<(Option<Rational>, Term), TheoryError> {
        self.ws();
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let start = self.pos;
            let num = self.number()?;
            self.ws();
            if self.peek().is_some_and(|c| c == '(' || c == '*' || is_ident_char(c)) {
                self.eat('*');
                return Ok((Some(num), self.atom()?));
            }
            if num.is_zero() && self.sig.get("0").is_some() {
                return Ok((None, Term::constant("0")));
            }
            self.pos = start;
            return Err(self.err("coefficient without a term"));
        }
        Ok((None, self.atom()?))
    }

    fn number(&mut self) -> Result<Rational, TheoryError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '/') {
            self.pos += 1;
        }
        let lit: String = self.s[start..self.pos].iter().collect();
        lit.parse::<Rational>().map_err(|e| TheoryError::Parse(e.to_string()))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        self.s[start..self.pos].iter().collect()
    }

    fn atom(&mut self) -> Result<Term, TheoryError> {
        self.ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                if let Some(t) = self.try_sexpr()? {
                    return Ok(t);
                }
                let t = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                if n.is_zero() && self.sig.get("0").is_some() {
                    Ok(Term::constant("0"))
                } else {
                    Err(self.err("unexpected number"))
                }
            }
            Some(c) if is_ident_char(c) => {
                let name = self.ident();
                self.ws();
                if self.peek() == Some('(') {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return Err(self.err("expected `)`"));
                    }
                    self.check_arity(&name, args.len())?;
                    return Ok(Term::App(name, args));
                }
                match self.sig.get(&name) {
                    Some(op) if op.is_constant() => Ok(Term::constant(name)),
                    Some(_) => Err(self.err(&format!("operation `{name}` needs arguments"))),
                    None => Ok(Term::Var(name)),
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }

    // `(op arg ...)` when the first token names an operation and is followed
    // by a space or `)`; otherwise leaves the position untouched.
    fn try_sexpr(&mut self) -> Result<Option<Term>, TheoryError> {
        let save = self.pos;
        self.ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace() && c != '(' && c != ')') {
            self.pos += 1;
        }
        let raw: String = self.s[start..self.pos].iter().collect();
        let next = self.peek();
        if raw.is_empty() || self.sig.get(&raw).is_none() || !next.is_some_and(|c| c.is_whitespace() || c == ')') {
            self.pos = save;
            return Ok(None);
        }
        let mut args = Vec::new();
        while !self.eat(')') {
            if self.peek().is_none() {
                return Err(self.err("unclosed s-expression"));
            }
            args.push(self.atom()?);
        }
        self.check_arity(&raw, args.len())?;
        Ok(Some(Term::App(raw, args)))
    }

    fn check_arity(&self, name: &str, got: usize) -> Result<(), TheoryError> {
        let op = self.sig.lookup(name)?;
        if op.arity_len() != got {
            return Err(TheoryError::ArityMismatch { op: name.to_string(), expected: op.arity_len(), got });
        }
        Ok(())
    }

    fn assemble(&self, summands: Vec<(Option<Rational>, Term)>) -> Result<Term, TheoryError> {
        if summands.len() == 1 && summands[0].0.is_none() {
            return Ok(summands.into_iter().next().expect("one summand").1);
        }
        if summands.iter().all(|s| s.0.is_some()) {
            let coefs: Vec<Rational> = summands.iter().map(|s| s.0.clone().expect("checked")).collect();
            let name = combo_name(&coefs);
            self.sig.lookup(&name)?;
            return Ok(Term::App(name, summands.into_iter().map(|s| s.1).collect()));
        }
        if summands.iter().any(|s| s.0.is_some()) {
            return Err(TheoryError::Parse("cannot mix weighted and unweighted summands".into()));
        }
        let mut parts = Vec::new();
        for (_, t) in summands {
            match &t {
                Term::App(name, args) => match self.sig.get(name).map(|o| &o.kind) {
                    Some(OpKind::Choice(ls)) if ls.len() == 1 => parts.push((ls[0].clone(), args[0].clone())),
                    Some(OpKind::Choice(ls)) => {
                        parts.extend(ls.iter().cloned().zip(args.iter().cloned()));
                    }
                    Some(OpKind::Zero) => {}
                    _ => return Err(TheoryError::Parse(format!("`{t}` is not a choice summand"))),
                },
                Term::Var(_) => return Err(TheoryError::Parse(format!("`{t}` is not a choice summand"))),
            }
        }
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        if parts.is_empty() {
            return Ok(Term::constant("0"));
        }
        let name: Vec<&str> = parts.iter().map(|p| p.0.as_str()).collect();
        let name = name.join("+");
        self.sig.lookup(&name)?;
        Ok(Term::App(name, parts.into_iter().map(|p| p.1).collect()))
    }
}
