use super::{LogicError, Signature, SortId, KEYWORDS};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(usize),
}

/// Geometric formulas with finitary disjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(usize, Vec<Term>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists { var: String, sort: SortId, body: Box<Formula> },
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(var: impl Into<String>, sort: SortId, body: Formula) -> Formula {
        Formula::Exists { var: var.into(), sort, body: Box::new(body) }
    }

    /// Left-nested conjunction; `T` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `F` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Quantifier rank.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::And(a, b) | Formula::Or(a, b) => a.depth().max(b.depth()),
            Formula::Exists { body, .. } => 1 + body.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 1,
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
            Formula::Exists { body, .. } => 1 + body.size(),
        }
    }

    /// Free variable names in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            let mut visit = |t: &Term| {
                if let Term::Var(v) = t {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            };
            match f {
                Formula::True | Formula::False => {}
                Formula::Eq(a, b) => {
                    visit(a);
                    visit(b);
                }
                Formula::Rel(_, args) => args.iter().for_each(visit),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Exists { var, body, .. } => {
                    bound.push(var.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        Printer { f: self, sig }
    }
}

/// A formula together with its typed variable context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeometricFormula {
    context: Vec<(String, SortId)>,
    body: Formula,
}

impl GeometricFormula {
    /// Checks that `body` is well sorted in `context`. Free variables missing
    /// from `context` are appended in order of first occurrence.
    pub fn new(sig: &Signature, body: Formula, context: &[(String, SortId)]) -> Result<Self, LogicError> {
        let text = body.display(sig).to_string();
        let parsed = parse_formula_in(&text, sig, context)?;
        if parsed.body != body {
            return Err(LogicError::Sort { pos: 0, message: format!("{text} does not denote the given formula") });
        }
        Ok(parsed)
    }

    pub fn context(&self) -> &[(String, SortId)] {
        &self.context
    }

    pub fn body(&self) -> &Formula {
        &self.body
    }

    pub fn depth(&self) -> usize {
        self.body.depth()
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        self.body.display(sig)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Place {
    Top,
    OrLeft,
    OrRight,
    AndLeft,
    AndRight,
}

struct Printer<'a> {
    f: &'a Formula,
    sig: &'a Signature,
}

impl Printer<'_> {
    fn term(&self, t: &Term, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            Term::Var(v) => out.write_str(v),
            Term::Const(c) => out.write_str(&self.sig.constants()[*c].0),
        }
    }

    fn go(&self, f: &Formula, place: Place, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (open, infix, left, right) = match f {
            Formula::True => return out.write_str("T"),
            Formula::False => return out.write_str("F"),
            Formula::Eq(a, b) => {
                self.term(a, out)?;
                out.write_str(" = ")?;
                return self.term(b, out);
            }
            Formula::Rel(r, args) => {
                write!(out, "{}(", self.sig.relations()[*r].0)?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        out.write_str(", ")?;
                    }
                    self.term(t, out)?;
                }
                return out.write_str(")");
            }
            Formula::Exists { var, sort, body } => {
                let paren = place != Place::Top;
                if paren {
                    out.write_str("(")?;
                }
                write!(out, "exists {var}:{}. ", self.sig.sorts()[*sort])?;
                self.go(body, Place::Top, out)?;
                return if paren { out.write_str(")") } else { Ok(()) };
            }
            Formula::Or(a, b) => (
                matches!(place, Place::OrRight | Place::AndLeft | Place::AndRight),
                " \\/ ",
                (a, Place::OrLeft),
                (b, Place::OrRight),
            ),
            Formula::And(a, b) => (place == Place::AndRight, " /\\ ", (a, Place::AndLeft), (b, Place::AndRight)),
        };
        if open {
            out.write_str("(")?;
        }
        self.go(left.0, left.1, out)?;
        out.write_str(infix)?;
        self.go(right.0, right.1, out)?;
        if open {
            out.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.go(self.f, Place::Top, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    And,
    Or,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Equals,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, LogicError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let single = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'.' => Some(Tok::Dot),
            b':' => Some(Tok::Colon),
            b'=' => Some(Tok::Equals),
            _ => None,
        };
        if c.is_ascii_whitespace() {
            i += 1;
        } else if let Some(t) = single {
            toks.push((t, i));
            i += 1;
        } else if text[i..].starts_with("/\\") {
            toks.push((Tok::And, i));
            i += 2;
        } else if text[i..].starts_with("\\/") {
            toks.push((Tok::Or, i));
            i += 2;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            toks.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(LogicError::Parse { pos: i, message: format!("unexpected character {ch:?}") });
        }
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

#[derive(Debug)]
struct RawTerm {
    name: String,
    pos: usize,
}

#[derive(Debug)]
enum Raw {
    True,
    False,
    Eq(RawTerm, RawTerm),
    Rel { name: String, pos: usize, args: Vec<RawTerm> },
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Exists { var: String, pos: usize, sort: Option<(String, usize)>, body: Box<Raw> },
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) {
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
    }

    fn fail<T>(&self, what: &str) -> Result<T, LogicError> {
        let found = match self.peek() {
            Tok::Ident(s) => format!("{s:?}"),
            Tok::End => "end of input".into(),
            Tok::And => "'/\\'".into(),
            Tok::Or => "'\\/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Colon => "':'".into(),
            Tok::Equals => "'='".into(),
        };
        Err(LogicError::Parse { pos: self.pos(), message: format!("expected {what}, found {found}") })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), LogicError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn ident(&mut self, what: &str) -> Result<RawTerm, LogicError> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let pos = self.pos();
                self.bump();
                Ok(RawTerm { name, pos })
            }
            _ => self.fail(what),
        }
    }

    fn disj(&mut self) -> Result<Raw, LogicError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Raw::Or(Box::new(f), Box::new(self.conj()?));
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Raw, LogicError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Raw::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Raw, LogicError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.disj()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "T" => {
                self.bump();
                Ok(Raw::True)
            }
            Tok::Ident(s) if s == "F" => {
                self.bump();
                Ok(Raw::False)
            }
            Tok::Ident(s) if s == "exists" => {
                self.bump();
                let v = self.ident("a variable")?;
                let sort = if *self.peek() == Tok::Colon {
                    self.bump();
                    let s = self.ident("a sort")?;
                    Some((s.name, s.pos))
                } else {
                    None
                };
                self.expect(Tok::Dot, "'.'")?;
                let body = self.disj()?;
                Ok(Raw::Exists { var: v.name, pos: v.pos, sort, body: Box::new(body) })
            }
            Tok::Ident(_) => {
                let head = self.ident("a term")?;
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.ident("a term")?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.ident("a term")?);
                        }
                    }
                    self.expect(Tok::RParen, "',' or ')'")?;
                    Ok(Raw::Rel { name: head.name, pos: head.pos, args })
                } else {
                    self.expect(Tok::Equals, "'=' or '('")?;
                    let rhs = self.ident("a term")?;
                    Ok(Raw::Eq(head, rhs))
                }
            }
            _ => self.fail("a formula"),
        }
    }
}

enum Slot {
    Var(usize),
    Const(usize),
}

/// Sort inference by union-find over variable bindings. Free variables and
/// binders each get one slot.
struct Checker<'s> {
    sig: &'s Signature,
    parent: Vec<usize>,
    sort: Vec<Option<SortId>>,
    first_pos: Vec<usize>,
    scopes: Vec<(String, usize)>,
    free: Vec<(String, usize)>,
    binders: Vec<usize>,
}

impl<'s> Checker<'s> {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn fresh(&mut self, pos: usize) -> usize {
        self.parent.push(self.parent.len());
        self.sort.push(None);
        self.first_pos.push(pos);
        self.parent.len() - 1
    }

    fn assign(&mut self, slot: usize, s: SortId, pos: usize, name: &str) -> Result<(), LogicError> {
        let r = self.find(slot);
        match self.sort[r] {
            Some(t) if t != s => Err(LogicError::Sort {
                pos,
                message: format!("{name} used at sort {} but has sort {}", self.sig.sorts()[s], self.sig.sorts()[t]),
            }),
            _ => {
                self.sort[r] = Some(s);
                Ok(())
            }
        }
    }

    fn union(&mut self, a: usize, b: usize, pos: usize, name: &str) -> Result<(), LogicError> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            if let Some(s) = self.sort[rb] {
                self.assign(ra, s, pos, name)?;
            }
            self.parent[rb] = ra;
        }
        Ok(())
    }

    fn resolve(&mut self, t: &RawTerm) -> Slot {
        if let Some((_, slot)) = self.scopes.iter().rev().find(|(v, _)| *v == t.name) {
            return Slot::Var(*slot);
        }
        if let Some(c) = self.sig.constant(&t.name) {
            return Slot::Const(c);
        }
        if let Some((_, slot)) = self.free.iter().find(|(v, _)| *v == t.name) {
            return Slot::Var(*slot);
        }
        let slot = self.fresh(t.pos);
        self.free.push((t.name.clone(), slot));
        Slot::Var(slot)
    }

    fn term(&self, t: &RawTerm) -> Term {
        match self.sig.constant(&t.name) {
            Some(c) if !self.scopes.iter().any(|(v, _)| *v == t.name) => Term::Const(c),
            _ => Term::Var(t.name.clone()),
        }
    }

    fn check(&mut self, f: &Raw) -> Result<Formula, LogicError> {
        Ok(match f {
            Raw::True => Formula::True,
            Raw::False => Formula::False,
            Raw::Eq(a, b) => {
                match (self.resolve(a), self.resolve(b)) {
                    (Slot::Const(c), Slot::Const(d)) => {
                        if self.sig.constants()[c].1 != self.sig.constants()[d].1 {
                            return Err(LogicError::Sort {
                                pos: b.pos,
                                message: format!("{} and {} have different sorts", a.name, b.name),
                            });
                        }
                    }
                    (Slot::Var(s), Slot::Const(c)) => self.assign(s, self.sig.constants()[c].1, a.pos, &a.name)?,
                    (Slot::Const(c), Slot::Var(s)) => self.assign(s, self.sig.constants()[c].1, b.pos, &b.name)?,
                    (Slot::Var(s), Slot::Var(t)) => self.union(s, t, b.pos, &b.name)?,
                }
                Formula::Eq(self.term(a), self.term(b))
            }
            Raw::Rel { name, pos, args } => {
                let r = self.sig.relation(name).ok_or_else(|| LogicError::Sort {
                    pos: *pos,
                    message: format!("undeclared relation {name}"),
                })?;
                let arity = self.sig.relations()[r].1.clone();
                if arity.len() != args.len() {
                    return Err(LogicError::Sort {
                        pos: *pos,
                        message: format!("{name} takes {} arguments, given {}", arity.len(), args.len()),
                    });
                }
                for (t, s) in args.iter().zip(arity) {
                    match self.resolve(t) {
                        Slot::Var(slot) => self.assign(slot, s, t.pos, &t.name)?,
                        Slot::Const(c) if self.sig.constants()[c].1 != s => {
                            return Err(LogicError::Sort {
                                pos: t.pos,
                                message: format!("constant {} has the wrong sort for {name}", t.name),
                            })
                        }
                        Slot::Const(_) => {}
                    }
                }
                Formula::Rel(r, args.iter().map(|t| self.term(t)).collect())
            }
            Raw::And(a, b) => Formula::and(self.check(a)?, self.check(b)?),
            Raw::Or(a, b) => Formula::or(self.check(a)?, self.check(b)?),
            Raw::Exists { var, pos, sort, body } => {
                let slot = self.fresh(*pos);
                if let Some((s, spos)) = sort {
                    let sid = self.sig.sort(s).ok_or_else(|| LogicError::Sort {
                        pos: *spos,
                        message: format!("undeclared sort {s}"),
                    })?;
                    self.assign(slot, sid, *spos, var)?;
                }
                self.binders.push(slot);
                self.scopes.push((var.clone(), slot));
                let body = self.check(body);
                self.scopes.pop();
                // sort filled in by `settle`
                Formula::exists(var.clone(), usize::MAX, body?)
            }
        })
    }

    fn sort_of(&mut self, slot: usize, name: &str) -> Result<SortId, LogicError> {
        let r = self.find(slot);
        match self.sort[r] {
            Some(s) => Ok(s),
            None if self.sig.sorts().len() == 1 => Ok(0),
            None => Err(LogicError::Sort { pos: self.first_pos[slot], message: format!("cannot infer the sort of {name}") }),
        }
    }

    fn settle(&mut self, f: &mut Formula, next: &mut usize) -> Result<(), LogicError> {
        match f {
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.settle(a, next)?;
                self.settle(b, next)
            }
            Formula::Exists { var, sort, body } => {
                let slot = self.binders[*next];
                *next += 1;
                *sort = self.sort_of(slot, var)?;
                self.settle(body, next)
            }
            _ => Ok(()),
        }
    }
}

/// Parses the concrete syntax `T`, `F`, `/\`, `\/`, `exists x:S.`, `=` and
/// `R(t, ...)`, inferring sorts. `/\` binds tighter than `\/`, both associate
/// to the left, and a quantifier extends as far right as possible. The
/// context is the free variables in order of first occurrence.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<GeometricFormula, LogicError> {
    parse_formula_in(text, sig, &[])
}

/// As [`parse_formula`], with the leading context given. Further free
/// variables follow in order of first occurrence.
pub fn parse_formula_in(
    text: &str,
    sig: &Signature,
    context: &[(String, SortId)],
) -> Result<GeometricFormula, LogicError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let raw = p.disj()?;
    if *p.peek() != Tok::End {
        return p.fail("'/\\', '\\/' or end of input");
    }
    let mut c = Checker {
        sig,
        parent: vec![],
        sort: vec![],
        first_pos: vec![],
        scopes: vec![],
        free: vec![],
        binders: vec![],
    };
    for (i, (v, s)) in context.iter().enumerate() {
        if context[..i].iter().any(|(w, _)| w == v) || sig.constant(v).is_some() || *s >= sig.sorts().len() {
            return Err(LogicError::Sort { pos: 0, message: format!("bad context variable {v}") });
        }
        let slot = c.fresh(0);
        c.sort[slot] = Some(*s);
        c.free.push((v.clone(), slot));
    }
    let mut body = c.check(&raw)?;
    c.settle(&mut body, &mut 0)?;
    let free = c.free.clone();
    let context = free
        .into_iter()
        .map(|(v, slot)| c.sort_of(slot, &v).map(|s| (v, s)))
        .collect::<Result<_, _>>()?;
    Ok(GeometricFormula { context, body })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> Signature {
        Signature::single_sorted(&[("E", 2)])
    }

    #[test]
    fn exists_atom_has_context_x() {
        let f = parse_formula("exists y. E(x,y)", &graph()).unwrap();
        assert_eq!(f.context(), &[("x".to_string(), 0)]);
        assert_eq!(
            *f.body(),
            Formula::exists("y", 0, Formula::Rel(0, vec![Term::Var("x".into()), Term::Var("y".into())]))
        );
        assert_eq!(f.depth(), 1);
    }

    #[test]
    fn equality_and_truth() {
        let f = parse_formula("x = y /\\ T", &graph()).unwrap();
        assert_eq!(
            *f.body(),
            Formula::and(Formula::Eq(Term::Var("x".into()), Term::Var("y".into())), Formula::True)
        );
    }

    #[test]
    fn undeclared_relation_is_a_sort_error() {
        let e = parse_formula("R(x)", &graph()).unwrap_err();
        assert!(matches!(e, LogicError::Sort { pos: 0, .. }), "{e}");
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_formula("E(x, y) /\\ ", &graph()).unwrap_err(),
            LogicError::Parse { pos: 11, message: "expected a formula, found end of input".into() }
        );
        assert!(matches!(parse_formula("E(x,y) & T", &graph()), Err(LogicError::Parse { pos: 7, .. })));
        assert!(matches!(parse_formula("E(x)", &graph()), Err(LogicError::Sort { pos: 0, .. })));
    }

    #[test]
    fn sorts_are_inferred_and_checked() {
        let sig = Signature::new(
            vec!["P".into(), "L".into()],
            vec![("On".into(), vec![0, 1])],
            vec![("o".into(), 0)],
        )
        .unwrap();
        let f = parse_formula("exists l. On(p, l) /\\ p = o", &sig).unwrap();
        assert_eq!(f.context(), &[("p".to_string(), 0)]);
        assert!(matches!(parse_formula("On(p, l) /\\ p = l", &sig), Err(LogicError::Sort { pos: 16, .. })));
        assert!(matches!(parse_formula("x = y", &sig), Err(LogicError::Sort { .. })));
        assert!(matches!(parse_formula("exists x:L. x = o", &sig), Err(LogicError::Sort { .. })));
        let g = parse_formula_in("x = y", &sig, &[("x".into(), 1)]).unwrap();
        assert_eq!(g.context(), &[("x".to_string(), 1), ("y".to_string(), 1)]);
    }

    #[test]
    fn printer_brackets_only_where_needed() {
        let sig = graph();
        for (text, printed) in [
            ("E(x,y) \\/ E(y,x) /\\ T", "E(x, y) \\/ E(y, x) /\\ T"),
            ("(E(x,y) \\/ E(y,x)) /\\ T", "(E(x, y) \\/ E(y, x)) /\\ T"),
            ("a = b /\\ (b = c /\\ c = d)", "a = b /\\ (b = c /\\ c = d)"),
            ("(exists z. E(x,z)) /\\ x = x", "(exists z:S. E(x, z)) /\\ x = x"),
            ("exists z. E(x,z) /\\ x = x", "exists z:S. E(x, z) /\\ x = x"),
            ("F \\/ (T \\/ F)", "F \\/ (T \\/ F)"),
        ] {
            let f = parse_formula(text, &sig).unwrap();
            let out = f.display(&sig).to_string();
            assert_eq!(out, printed);
            assert_eq!(parse_formula(&out, &sig).unwrap(), f);
        }
    }

    #[test]
    fn shadowing_and_constants() {
        let sig = Signature::new(vec!["S".into()], vec![("E".into(), vec![0, 0])], vec![("c".into(), 0)]).unwrap();
        let f = parse_formula("exists x. E(x, c) /\\ exists x. E(c, x)", &sig).unwrap();
        assert!(f.context().is_empty());
        let g = GeometricFormula::new(&sig, f.body().clone(), &[]).unwrap();
        assert_eq!(g, f);
    }
}
