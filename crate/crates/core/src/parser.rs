//! S-expression ontology format (`.shoi`).
//!
//! Grammar:
//!
//! ```text
//! statement := (implies C C) | (equivalent C C) | (disjoint NAME+)
//!            | (transitive ROLE) | (subrole ROLE ROLE)
//!            | (instance IND C) | (related IND IND ROLE)
//! C         := NAME | top | bottom | (not C) | (and C C+) | (or C C+)
//!            | (some ROLE C) | (all ROLE C) | (oneof IND+)
//! ROLE      := NAME | (inv NAME)
//! ```
//!
//! Comments run from `;` to end of line. Identifiers match
//! `[A-Za-z_][A-Za-z0-9_-]*`. Names appearing in `oneof`, `instance`, or
//! `related` positions are individuals (nominals); individual and concept
//! namespaces must not overlap.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::concept::{Concept, Role};
use crate::tbox::{Assertion, Axioms, Name};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Symbol(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Symbol(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }
}

fn err(pos: (usize, usize), message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.0,
        col: pos.1,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Sexp>, ParseError> {
    struct Frame {
        items: Vec<Sexp>,
        line: usize,
        col: usize,
    }
    let mut stack: Vec<Frame> = Vec::new();
    let mut top: Vec<Sexp> = Vec::new();
    let mut line = 1usize;
    let mut col = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        col += 1;
        match ch {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            '(' => stack.push(Frame {
                items: Vec::new(),
                line,
                col,
            }),
            ')' => {
                let frame = stack
                    .pop()
                    .ok_or_else(|| err((line, col), "unbalanced ')'"))?;
                let sexp = Sexp::List(frame.items, frame.line, frame.col);
                match stack.last_mut() {
                    Some(parent) => parent.items.push(sexp),
                    None => top.push(sexp),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut sym = String::new();
                sym.push(c);
                let start_col = col;
                while let Some(&nc) = chars.peek() {
                    if nc.is_ascii_alphanumeric() || nc == '_' || nc == '-' {
                        sym.push(nc);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let sexp = Sexp::Symbol(sym, line, start_col);
                match stack.last_mut() {
                    Some(parent) => parent.items.push(sexp),
                    None => top.push(sexp),
                }
            }
            other => {
                return Err(err(
                    (line, col),
                    format!("unexpected character {:?}", other),
                ))
            }
        }
    }
    if let Some(frame) = stack.last() {
        return Err(err((frame.line, frame.col), "unclosed '('"));
    }
    Ok(top)
}

/// A parsed statement along with its source position.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Implies(Concept, Concept),
    Equivalent(Concept, Concept),
    Disjoint(Vec<Name>),
    Transitive(String),
    Subrole(Role, Role),
    Instance(String, Concept),
    Related(String, String, Role),
}

/// The parsed document: ordered statements plus their positions.
#[derive(Debug, Clone, Default)]
pub struct OntologyDocument {
    pub statements: Vec<(Statement, (usize, usize))>,
    pub individuals: BTreeSet<String>,
    pub concept_names: BTreeSet<String>,
    pub roles: BTreeSet<String>,
}

impl OntologyDocument {
    /// Converts the statement list into the axiom collection.
    pub fn axioms(&self) -> Axioms {
        let mut axioms = Axioms {
            roles: self.roles.clone(),
            ..Default::default()
        };
        for (statement, _) in &self.statements {
            match statement.clone() {
                Statement::Implies(a, b) => axioms.gcis.push((a, b)),
                Statement::Equivalent(a, b) => axioms.equivalences.push((a, b)),
                Statement::Disjoint(names) => axioms.disjoint_groups.push(names),
                Statement::Transitive(r) => {
                    axioms.transitive.insert(r);
                }
                Statement::Subrole(r, s) => axioms.subroles.push((r, s)),
                Statement::Instance(a, c) => {
                    axioms.assertions.push(Assertion::Instance(a, c))
                }
                Statement::Related(a, b, r) => {
                    axioms.assertions.push(Assertion::Related(a, b, r))
                }
            }
        }
        axioms
    }
}

struct DocBuilder {
    individuals: BTreeSet<String>,
    concept_names: BTreeSet<String>,
    roles: BTreeSet<String>,
}

/// Parses an ontology document, reporting the first syntax error with its
/// line and column.
pub fn parse_ontology(text: &str) -> Result<OntologyDocument, ParseError> {
    let forms = tokenize(text)?;

    // First pass: collect individual names so NAME occurrences resolve into
    // the right namespace regardless of statement order.
    let mut individuals = BTreeSet::new();
    for form in &forms {
        collect_individuals(form, &mut individuals)?;
    }

    let mut builder = DocBuilder {
        individuals,
        concept_names: BTreeSet::new(),
        roles: BTreeSet::new(),
    };
    let mut statements = Vec::new();
    for form in &forms {
        let pos = form.pos();
        statements.push((builder.statement(form)?, pos));
    }
    Ok(OntologyDocument {
        statements,
        individuals: builder.individuals,
        concept_names: builder.concept_names,
        roles: builder.roles,
    })
}

fn collect_individuals(form: &Sexp, out: &mut BTreeSet<String>) -> Result<(), ParseError> {
    let Sexp::List(items, line, col) = form else {
        let (l, c) = form.pos();
        return Err(err((l, c), "expected a parenthesized statement"));
    };
    let Some(Sexp::Symbol(head, ..)) = items.first() else {
        return Err(err((*line, *col), "expected a statement head symbol"));
    };
    match head.as_str() {
        "instance" => {
            if let Some(Sexp::Symbol(a, ..)) = items.get(1) {
                out.insert(a.clone());
            }
        }
        "related" => {
            for item in items.iter().skip(1).take(2) {
                if let Sexp::Symbol(a, ..) = item {
                    out.insert(a.clone());
                }
            }
        }
        _ => {}
    }
    // oneof can occur nested anywhere inside concepts.
    let mut stack: Vec<&Sexp> = items.iter().collect();
    while let Some(s) = stack.pop() {
        if let Sexp::List(inner, ..) = s {
            if let Some(Sexp::Symbol(h, ..)) = inner.first() {
                if h == "oneof" {
                    for item in inner.iter().skip(1) {
                        if let Sexp::Symbol(a, ..) = item {
                            out.insert(a.clone());
                        }
                    }
                }
            }
            stack.extend(inner.iter());
        }
    }
    Ok(())
}

impl DocBuilder {
    fn statement(&mut self, form: &Sexp) -> Result<Statement, ParseError> {
        let Sexp::List(items, line, col) = form else {
            let pos = form.pos();
            return Err(err(pos, "expected a parenthesized statement"));
        };
        let pos = (*line, *col);
        let Some(Sexp::Symbol(head, ..)) = items.first() else {
            return Err(err(pos, "expected a statement head symbol"));
        };
        let args = &items[1..];
        match head.as_str() {
            "implies" => {
                let [a, b] = two(args, pos, "implies")?;
                Ok(Statement::Implies(self.concept(a)?, self.concept(b)?))
            }
            "equivalent" => {
                let [a, b] = two(args, pos, "equivalent")?;
                Ok(Statement::Equivalent(self.concept(a)?, self.concept(b)?))
            }
            "disjoint" => {
                if args.is_empty() {
                    return Err(err(pos, "disjoint needs at least one name"));
                }
                let mut names = Vec::new();
                for a in args {
                    names.push(self.name(a)?);
                }
                Ok(Statement::Disjoint(names))
            }
            "transitive" => {
                let [r] = one(args, pos, "transitive")?;
                let role = self.role(r)?;
                if role.inverted {
                    return Err(err(r.pos(), "transitivity is declared on base role names"));
                }
                Ok(Statement::Transitive(role.name))
            }
            "subrole" => {
                let [r, s] = two(args, pos, "subrole")?;
                Ok(Statement::Subrole(self.role(r)?, self.role(s)?))
            }
            "instance" => {
                let [a, c] = two(args, pos, "instance")?;
                let ind = self.individual(a)?;
                Ok(Statement::Instance(ind, self.concept(c)?))
            }
            "related" => {
                let [a, b, r] = three(args, pos, "related")?;
                Ok(Statement::Related(
                    self.individual(a)?,
                    self.individual(b)?,
                    self.role(r)?,
                ))
            }
            other => Err(err(pos, format!("unknown statement head '{}'", other))),
        }
    }

    fn concept(&mut self, form: &Sexp) -> Result<Concept, ParseError> {
        match form {
            Sexp::Symbol(s, line, col) => match s.as_str() {
                "top" => Ok(Concept::Top),
                "bottom" => Ok(Concept::Bottom),
                name => {
                    if self.individuals.contains(name) {
                        return Err(err(
                            (*line, *col),
                            format!("'{}' is an individual; write (oneof {})", name, name),
                        ));
                    }
                    self.concept_names.insert(name.to_string());
                    Ok(Concept::atom(name))
                }
            },
            Sexp::List(items, line, col) => {
                let pos = (*line, *col);
                let Some(Sexp::Symbol(head, ..)) = items.first() else {
                    return Err(err(pos, "expected a concept constructor"));
                };
                let args = &items[1..];
                match head.as_str() {
                    "not" => {
                        let [c] = one(args, pos, "not")?;
                        Ok(Concept::Not(Box::new(self.concept(c)?)))
                    }
                    "and" | "or" => {
                        if args.len() < 2 {
                            return Err(err(
                                pos,
                                format!("{} needs at least two concepts", head),
                            ));
                        }
                        let mut cs = Vec::new();
                        for a in args {
                            cs.push(self.concept(a)?);
                        }
                        Ok(if head == "and" {
                            Concept::and(cs)
                        } else {
                            Concept::or(cs)
                        })
                    }
                    "some" | "all" => {
                        let [r, c] = two(args, pos, head)?;
                        let role = self.role(r)?;
                        let filler = self.concept(c)?;
                        Ok(if head == "some" {
                            Concept::exists(role, filler)
                        } else {
                            Concept::forall(role, filler)
                        })
                    }
                    "oneof" => {
                        if args.is_empty() {
                            return Err(err(pos, "oneof needs at least one individual"));
                        }
                        let mut names = Vec::new();
                        for a in args {
                            names.push(Concept::nominal(self.individual(a)?));
                        }
                        Ok(Concept::or(names))
                    }
                    other => Err(err(pos, format!("unknown concept head '{}'", other))),
                }
            }
        }
    }

    fn role(&mut self, form: &Sexp) -> Result<Role, ParseError> {
        match form {
            Sexp::Symbol(name, ..) => {
                self.roles.insert(name.clone());
                Ok(Role::named(name.clone()))
            }
            Sexp::List(items, line, col) => {
                let pos = (*line, *col);
                match items.as_slice() {
                    [Sexp::Symbol(h, ..), Sexp::Symbol(name, ..)] if h == "inv" => {
                        self.roles.insert(name.clone());
                        Ok(Role::inverse_of(name.clone()))
                    }
                    _ => Err(err(pos, "expected ROLE = NAME | (inv NAME)")),
                }
            }
        }
    }

    fn individual(&mut self, form: &Sexp) -> Result<String, ParseError> {
        match form {
            Sexp::Symbol(name, line, col) => {
                if self.concept_names.contains(name) {
                    return Err(err(
                        (*line, *col),
                        format!("'{}' is already a concept name", name),
                    ));
                }
                self.individuals.insert(name.clone());
                Ok(name.clone())
            }
            Sexp::List(_, line, col) => Err(err((*line, *col), "expected an individual name")),
        }
    }

    fn name(&mut self, form: &Sexp) -> Result<Name, ParseError> {
        match form {
            Sexp::Symbol(s, ..) => {
                if self.individuals.contains(s) {
                    Ok(Name::Nominal(s.clone()))
                } else {
                    self.concept_names.insert(s.clone());
                    Ok(Name::Atom(s.clone()))
                }
            }
            Sexp::List(_, line, col) => Err(err((*line, *col), "expected a plain name")),
        }
    }
}

fn one<'a>(args: &'a [Sexp], pos: (usize, usize), head: &str) -> Result<[&'a Sexp; 1], ParseError> {
    match args {
        [a] => Ok([a]),
        _ => Err(err(pos, format!("{} takes exactly 1 argument", head))),
    }
}

fn two<'a>(args: &'a [Sexp], pos: (usize, usize), head: &str) -> Result<[&'a Sexp; 2], ParseError> {
    match args {
        [a, b] => Ok([a, b]),
        _ => Err(err(pos, format!("{} takes exactly 2 arguments", head))),
    }
}

fn three<'a>(
    args: &'a [Sexp],
    pos: (usize, usize),
    head: &str,
) -> Result<[&'a Sexp; 3], ParseError> {
    match args {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(err(pos, format!("{} takes exactly 3 arguments", head))),
    }
}

fn render_role(role: &Role) -> String {
    if role.inverted {
        format!("(inv {})", role.name)
    } else {
        role.name.clone()
    }
}

/// Renders a concept so that `parse(render(c))` is structurally equal to `c`.
pub fn render_concept(c: &Concept) -> String {
    let mut out = String::new();
    render_into(c, &mut out);
    out
}

fn render_into(c: &Concept, out: &mut String) {
    match c {
        Concept::Top => out.push_str("top"),
        Concept::Bottom => out.push_str("bottom"),
        Concept::Atom(a) => out.push_str(a),
        Concept::Nominal(o) => {
            let _ = write!(out, "(oneof {})", o);
        }
        Concept::Not(inner) => {
            out.push_str("(not ");
            render_into(inner, out);
            out.push(')');
        }
        Concept::And(cs) | Concept::Or(cs) => {
            // Nominal sets render compactly as one oneof form.
            if let (Concept::Or(_), Some(names)) = (c, c.as_nominal_set()) {
                let _ = write!(out, "(oneof {})", names.join(" "));
                return;
            }
            out.push_str(if matches!(c, Concept::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for child in cs {
                out.push(' ');
                render_into(child, out);
            }
            out.push(')');
        }
        Concept::Exists(r, f) => {
            let _ = write!(out, "(some {} ", render_role(r));
            render_into(f, out);
            out.push(')');
        }
        Concept::Forall(r, f) => {
            let _ = write!(out, "(all {} ", render_role(r));
            render_into(f, out);
            out.push(')');
        }
    }
}

/// Renders a statement in the document grammar.
pub fn render_statement(statement: &Statement) -> String {
    match statement {
        Statement::Implies(a, b) => {
            format!("(implies {} {})", render_concept(a), render_concept(b))
        }
        Statement::Equivalent(a, b) => {
            format!("(equivalent {} {})", render_concept(a), render_concept(b))
        }
        Statement::Disjoint(names) => {
            let names: Vec<String> = names.iter().map(|n| n.to_string()).collect();
            format!("(disjoint {})", names.join(" "))
        }
        Statement::Transitive(r) => format!("(transitive {})", r),
        Statement::Subrole(r, s) => format!("(subrole {} {})", render_role(r), render_role(s)),
        Statement::Instance(a, c) => format!("(instance {} {})", a, render_concept(c)),
        Statement::Related(a, b, r) => format!("(related {} {} {})", a, b, render_role(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_implies_with_some() {
        let doc = parse_ontology("(implies A (some R B))").unwrap();
        assert_eq!(doc.statements.len(), 1);
        let (s, _) = &doc.statements[0];
        assert_eq!(
            *s,
            Statement::Implies(
                Concept::atom("A"),
                Concept::exists(Role::named("R"), Concept::atom("B"))
            )
        );
    }

    #[test]
    fn disjoint_resolves_namespaces() {
        let doc = parse_ontology("(instance o1 top)\n(disjoint B o1)").unwrap();
        let (s, _) = &doc.statements[1];
        assert_eq!(
            *s,
            Statement::Disjoint(vec![Name::Atom("B".into()), Name::Nominal("o1".into())])
        );
    }

    #[test]
    fn instance_with_oneof_filler() {
        let doc = parse_ontology("(instance a (some R (oneof b)))").unwrap();
        let (s, _) = &doc.statements[0];
        assert_eq!(
            *s,
            Statement::Instance(
                "a".into(),
                Concept::exists(Role::named("R"), Concept::nominal("b"))
            )
        );
    }

    #[test]
    fn rejects_unbalanced_parens() {
        let e = parse_ontology("(implies A (some R B)").unwrap_err();
        assert!(e.message.contains("unclosed"));
    }

    #[test]
    fn rejects_unknown_heads() {
        let e = parse_ontology("(define A B)").unwrap_err();
        assert!(e.message.contains("unknown statement head"));
    }

    #[test]
    fn rejects_nullary_and() {
        let e = parse_ontology("(implies (and) B)").unwrap_err();
        assert!(e.message.contains("at least two"));
    }

    #[test]
    fn duplicate_transitivity_is_idempotent() {
        let doc = parse_ontology("(transitive R)\n(transitive R)").unwrap();
        let axioms = doc.axioms();
        assert_eq!(axioms.transitive.len(), 1);
    }

    #[test]
    fn inverse_role_round_trip() {
        let c = Concept::forall(
            Role::inverse_of("R"),
            Concept::or(vec![Concept::nominal("o1"), Concept::nominal("o2")]),
        );
        assert_eq!(render_concept(&c), "(all (inv R) (oneof o1 o2))");
        let doc = parse_ontology(&format!("(implies A {})", render_concept(&c))).unwrap();
        let (s, _) = &doc.statements[0];
        assert_eq!(*s, Statement::Implies(Concept::atom("A"), c));
    }

    #[test]
    fn namespace_collision_is_an_error() {
        let e = parse_ontology("(implies a B)\n(instance a B)").unwrap_err();
        assert!(e.message.contains("individual") || e.message.contains("concept name"));
    }
}
