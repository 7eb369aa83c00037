use super::{Formula, LogicError, LogicSpec, Modality, PropOp};

/// Parses `tt`, `ff`, `&`, `|`, `!`, `<a>`, `[a]`, `dia(a,{..})` and
/// `dia(halt)`. Mixing `&` and `|` needs parentheses. Negation is pushed to
/// normal form while parsing.
pub fn parse_formula(text: &str, logic: &LogicSpec) -> Result<Formula, LogicError> {
    let mut p = Parser { s: text.chars().collect(), pos: 0, logic };
    let f = p.formula()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    if f.depths().is_none() {
        return Err(LogicError::NonUniformDepth(text.trim().to_string()));
    }
    Ok(f)
}

struct Parser<'a> {
    s: Vec<char>,
    pos: usize,
    logic: &'a LogicSpec,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> LogicError {
        LogicError::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn ws(&mut self) {
        while self.s.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), LogicError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, LogicError> {
        self.ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(|c| c.is_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        Ok(self.s[start..self.pos].iter().collect())
    }

    fn label(&mut self) -> Result<String, LogicError> {
        let a = self.ident()?;
        if self.logic.labels().contains(&a) {
            Ok(a)
        } else {
            Err(LogicError::UnknownSymbol(a))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let first = self.unary()?;
        let op = match self.peek() {
            Some('&') => PropOp::And,
            Some('|') => PropOp::Or,
            _ => return Ok(first),
        };
        let allowed = match op {
            PropOp::And => self.logic.has_and(),
            _ => self.logic.has_or(),
        };
        let sym = if op == PropOp::And { '&' } else { '|' };
        if !allowed {
            return Err(LogicError::UnknownSymbol(sym.to_string()));
        }
        let mut args = vec![first];
        while self.eat(sym) {
            args.push(self.unary()?);
        }
        if matches!(self.peek(), Some('&' | '|')) {
            return Err(self.err("mixing `&` and `|` needs parentheses"));
        }
        Ok(Formula::Prop(op, args))
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                if !self.logic.has_negation() {
                    return Err(LogicError::UnknownSymbol("!".into()));
                }
                let f = self.unary()?;
                f.negate().ok_or_else(|| self.err("cannot negate"))
            }
            Some('<') => {
                self.pos += 1;
                let a = self.label()?;
                self.expect('>')?;
                Ok(Formula::Modal(Modality::Dia(a), Box::new(self.unary()?)))
            }
            Some('[') => {
                self.pos += 1;
                let a = self.label()?;
                self.expect(']')?;
                if !self.logic.has_box() {
                    return Err(LogicError::UnknownSymbol(format!("[{a}]")));
                }
                Ok(Formula::Modal(Modality::Box(a), Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(')')?;
                Ok(f)
            }
            Some(_) => {
                let word = self.ident()?;
                match word.as_str() {
                    "tt" => Ok(if self.logic.flexible_top() { Formula::tt() } else { Formula::Top }),
                    "ff" if self.logic.has_ff() => Ok(Formula::ff()),
                    "dia" if self.logic.kind == super::LogicKind::PosHml => self.ready(),
                    _ => Err(LogicError::UnknownSymbol(word)),
                }
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn ready(&mut self) -> Result<Formula, LogicError> {
        self.expect('(')?;
        let m = if self.ident_ahead("halt") {
            self.ident()?;
            Modality::Halt
        } else {
            let label = self.label()?;
            self.expect(',')?;
            self.expect('{')?;
            let mut ready = Vec::new();
            if !self.eat('}') {
                loop {
                    ready.push(self.label()?);
                    if self.eat('}') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            ready.sort();
            ready.dedup();
            if !ready.contains(&label) {
                return Err(self.err("ready set must contain the action"));
            }
            Modality::Ready { label, ready }
        };
        self.expect(')')?;
        Ok(Formula::Modal(m, Box::new(self.unary()?)))
    }

    fn ident_ahead(&mut self, w: &str) -> bool {
        self.ws();
        let end = self.pos + w.len();
        end <= self.s.len()
            && self.s[self.pos..end].iter().copied().eq(w.chars())
            && !self.s.get(end).is_some_and(|c| c.is_alphanumeric() || *c == '_')
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{builtin_logic, Depths, LogicKind};

    fn logic(kind: LogicKind) -> LogicSpec {
        builtin_logic(kind, &["a", "b", "c"]).unwrap()
    }

    #[test]
    fn basic_formulas() {
        let hml = logic(LogicKind::Hml);
        let f = parse_formula("<a> tt", &hml).unwrap();
        assert_eq!(f, Formula::dia("a", Formula::tt()));
        assert_eq!(f.depth(), Some(1));
        let g = parse_formula("(<a> tt) & ([a] ff)", &hml).unwrap();
        assert!(matches!(g, Formula::Prop(PropOp::And, _)));
        assert_eq!(g.depth(), Some(1));
    }

    #[test]
    fn top_is_flexible_only_where_it_is_an_operator() {
        let hml = logic(LogicKind::Hml);
        assert_eq!(parse_formula("tt & <a> tt", &hml).unwrap().depths(), Some(Depths::AtLeast(1)));
        let sync = logic(LogicKind::Sync);
        assert!(matches!(parse_formula("tt & <a> tt", &sync), Err(LogicError::NonUniformDepth(_))));
        assert!(matches!(parse_formula("<a> tt & <a><b> tt", &sync), Err(LogicError::NonUniformDepth(_))));
        assert!(parse_formula("<a> tt & <a><b> tt", &hml).is_ok());
        assert_eq!(parse_formula("<a> tt | [b] ff", &sync).unwrap().depth(), Some(1));
    }

    #[test]
    fn restricted_symbols() {
        let pos = logic(LogicKind::PosHml);
        assert!(matches!(parse_formula("[a] tt", &pos), Err(LogicError::UnknownSymbol(_))));
        assert!(matches!(parse_formula("<a> tt | <b> tt", &pos), Err(LogicError::UnknownSymbol(_))));
        assert!(matches!(parse_formula("<d> tt", &pos), Err(LogicError::UnknownSymbol(_))));
        assert!(matches!(parse_formula("!<a> tt", &pos), Err(LogicError::UnknownSymbol(_))));
        let prob = logic(LogicKind::Prob);
        assert!(parse_formula("<a><b> tt", &prob).is_ok());
        assert!(matches!(parse_formula("<a> tt & <b> tt", &prob), Err(LogicError::UnknownSymbol(_))));
    }

    #[test]
    fn negation_and_errors() {
        let hml = logic(LogicKind::Hml);
        assert_eq!(parse_formula("!<a> tt", &hml).unwrap().to_string(), "[a] ff");
        assert_eq!(parse_formula("!(<a> tt & [b] ff)", &hml).unwrap().to_string(), "[a] ff | <b> tt");
        assert!(matches!(parse_formula("<a> tt & <b> tt | <c> tt", &hml), Err(LogicError::Parse(_))));
        assert!(matches!(parse_formula("<a> tt)", &hml), Err(LogicError::Parse(_))));
        assert!(matches!(parse_formula("", &hml), Err(LogicError::Parse(_))));
    }

    #[test]
    fn ready_diamonds() {
        let pos = logic(LogicKind::PosHml);
        let f = parse_formula("dia(a,{b, a}) tt & dia(halt) tt", &pos).unwrap();
        assert_eq!(f.to_string(), "dia(a,{a,b}) tt & dia(halt) tt");
        assert!(parse_formula("dia(a,{b}) tt", &pos).is_err());
        assert_eq!(parse_formula("dia(halt) tt", &pos).unwrap().to_string(), "dia(halt) tt");
    }
}
