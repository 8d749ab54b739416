//! Recursive-descent parser for the fragment.
//!
//! ```text
//! program   ::= statement*
//! statement ::= ('@' ident)? (rule | choice | constraint | minimize)
//! rule      ::= atom (':-' body)? '.'
//! choice    ::= '{' atom (':' atom)? '}' '.'
//! constraint::= ':-' body '.'
//! minimize  ::= '#minimize' '{' number (',' term)* ':' atom '}' '.'
//! body      ::= literal (',' literal)*
//! literal   ::= 'not'? atom
//! atom      ::= ident ('(' term (',' term)* ')')?
//! term      ::= variable | ident ('(' term (',' term)* ')')?
//! ```

use std::collections::{BTreeSet, HashMap};

use super::ast::{Atom, Literal, Program, Rule, RuleKind, SourceLoc, Term, ANONYMOUS};
use super::lexer::{tokenize, Token, TokenKind};
use super::Error;

pub fn parse_program(text: &str) -> Result<Program, Error> {
    parse_program_from(text, None)
}

/// Parses with `file` recorded in the program's source map.
pub fn parse_program_from(text: &str, file: Option<&str>) -> Result<Program, Error> {
    let tokens = tokenize(text)?;
    let mut parser = Parser::new(&tokens);
    let mut program = Program::new();
    let mut labels: HashMap<String, usize> = HashMap::new();

    while !parser.at_end() {
        let line = parser.line();
        let rule = parser.statement()?;
        let index = program.len();
        if let Some(var) = unsafe_variable(&rule) {
            return Err(Error::Safety {
                rule: index,
                line,
                var,
            });
        }
        if let Some(label) = &rule.label {
            if let Some(first) = labels.insert(label.clone(), line) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                    line,
                    first,
                });
            }
        }
        if rule.is_minimize() && program.minimize().is_some() {
            return Err(Error::MultipleMinimize { line });
        }
        program.push(
            rule,
            SourceLoc {
                file: file.map(str::to_owned),
                line,
            },
        );
    }
    Ok(program)
}

/// Parses a single atom such as `diagnosis(chickenpox)`.
pub fn parse_atom(text: &str) -> Result<Atom, Error> {
    let tokens = tokenize(text)?;
    let mut parser = Parser::new(&tokens);
    let atom = parser.atom()?;
    if !parser.at_end() {
        return Err(parser.unexpected(&["end of input"]));
    }
    Ok(atom)
}

/// Returns the first variable that violates the safety condition, if any.
///
/// Head variables and variables of negated literals must occur in a positive
/// body literal. The anonymous variable is allowed only inside negated
/// literals of constraints, and freely in positive literals.
pub fn unsafe_variable(rule: &Rule) -> Option<String> {
    fn first_missing(needed: BTreeSet<&str>, bound: &BTreeSet<&str>) -> Option<String> {
        needed
            .into_iter()
            .find(|v| !bound.contains(v))
            .map(str::to_owned)
    }
    fn positive_vars(body: &[Literal]) -> BTreeSet<&str> {
        body.iter()
            .filter(|l| !l.negated)
            .flat_map(|l| l.atom.vars())
            .collect()
    }

    match &rule.kind {
        RuleKind::Fact(atom) => {
            if atom.has_anonymous() {
                return Some(ANONYMOUS.to_owned());
            }
            first_missing(atom.vars(), &BTreeSet::new())
        }
        RuleKind::Normal { head, body } => {
            let bound = positive_vars(body);
            if head.has_anonymous() || body.iter().any(|l| l.negated && l.atom.has_anonymous()) {
                return Some(ANONYMOUS.to_owned());
            }
            let mut needed = head.vars();
            for lit in body.iter().filter(|l| l.negated) {
                needed.extend(lit.atom.vars());
            }
            first_missing(needed, &bound)
        }
        RuleKind::Constraint { body } => {
            let bound = positive_vars(body);
            let needed = body
                .iter()
                .filter(|l| l.negated)
                .flat_map(|l| l.atom.vars())
                .collect();
            first_missing(needed, &bound)
        }
        RuleKind::Choice { element, guard } => {
            if element.has_anonymous() {
                return Some(ANONYMOUS.to_owned());
            }
            let bound = guard.as_ref().map(Atom::vars).unwrap_or_default();
            first_missing(element.vars(), &bound)
        }
        RuleKind::Minimize {
            terms, condition, ..
        } => {
            if terms.iter().any(Term::has_anonymous) {
                return Some(ANONYMOUS.to_owned());
            }
            let mut needed = BTreeSet::new();
            terms.iter().for_each(|t| t.collect_vars(&mut needed));
            first_missing(needed, &condition.vars())
        }
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token]) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map_or(1, |t| t.line)
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        let (line, col, found) = match self.tokens.get(self.pos) {
            Some(tok) => (tok.line, tok.col, tok.kind.to_string()),
            None => {
                let (line, col) = self.tokens.last().map_or((1, 1), |t| (t.line, t.col));
                (line, col, "end of input".to_owned())
            }
        };
        Error::Parse {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), Error> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.unexpected(&[&kind.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<String, Error> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn statement(&mut self) -> Result<Rule, Error> {
        let label = if self.eat(&TokenKind::At) {
            Some(self.ident()?)
        } else {
            None
        };
        let kind = match self.peek() {
            Some(TokenKind::LBrace) => self.choice()?,
            Some(TokenKind::If) => {
                self.pos += 1;
                let body = self.body()?;
                RuleKind::Constraint { body }
            }
            Some(TokenKind::Minimize) => self.minimize()?,
            Some(TokenKind::Ident(_)) => {
                let head = self.atom()?;
                if self.eat(&TokenKind::If) {
                    let body = self.body()?;
                    RuleKind::Normal { head, body }
                } else {
                    RuleKind::Fact(head)
                }
            }
            _ => {
                let mut expected = vec!["identifier", "`{`", "`:-`", "`#minimize`"];
                if label.is_none() {
                    expected.push("`@`");
                }
                return Err(self.unexpected(&expected));
            }
        };
        if !self.eat(&TokenKind::Dot) {
            let expected: &[&str] = match kind {
                RuleKind::Fact(_) => &["`.`", "`:-`"],
                RuleKind::Normal { .. } | RuleKind::Constraint { .. } => &["`.`", "`,`"],
                _ => &["`.`"],
            };
            return Err(self.unexpected(expected));
        }
        Ok(Rule { label, kind })
    }

    fn choice(&mut self) -> Result<RuleKind, Error> {
        self.expect(TokenKind::LBrace)?;
        let element = self.atom()?;
        let guard = if self.eat(&TokenKind::Colon) {
            Some(self.atom()?)
        } else {
            None
        };
        if !self.eat(&TokenKind::RBrace) {
            return Err(self.unexpected(if guard.is_some() {
                &["`}`"]
            } else {
                &["`:`", "`}`"]
            }));
        }
        Ok(RuleKind::Choice { element, guard })
    }

    fn minimize(&mut self) -> Result<RuleKind, Error> {
        self.expect(TokenKind::Minimize)?;
        self.expect(TokenKind::LBrace)?;
        let weight = match self.peek() {
            Some(TokenKind::Number(n)) => {
                let n = *n;
                self.pos += 1;
                n
            }
            _ => return Err(self.unexpected(&["weight"])),
        };
        let mut terms = Vec::new();
        while self.eat(&TokenKind::Comma) {
            terms.push(self.term()?);
        }
        if !self.eat(&TokenKind::Colon) {
            return Err(self.unexpected(&["`,`", "`:`"]));
        }
        let condition = self.atom()?;
        self.expect(TokenKind::RBrace)?;
        Ok(RuleKind::Minimize {
            weight,
            terms,
            condition,
        })
    }

    fn body(&mut self) -> Result<Vec<Literal>, Error> {
        let mut body = vec![self.literal()?];
        while self.eat(&TokenKind::Comma) {
            body.push(self.literal()?);
        }
        Ok(body)
    }

    fn literal(&mut self) -> Result<Literal, Error> {
        let negated = self.eat(&TokenKind::Not);
        let atom = self.atom()?;
        Ok(Literal { atom, negated })
    }

    fn atom(&mut self) -> Result<Atom, Error> {
        let predicate = self.ident()?;
        let args = if self.eat(&TokenKind::LParen) {
            self.args()?
        } else {
            Vec::new()
        };
        Ok(Atom { predicate, args })
    }

    fn args(&mut self) -> Result<Vec<Term>, Error> {
        let mut args = vec![self.term()?];
        loop {
            if self.eat(&TokenKind::Comma) {
                args.push(self.term()?);
            } else if self.eat(&TokenKind::RParen) {
                return Ok(args);
            } else {
                return Err(self.unexpected(&["`,`", "`)`"]));
            }
        }
    }

    fn term(&mut self) -> Result<Term, Error> {
        match self.peek() {
            Some(TokenKind::Variable(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(Term::Variable(name))
            }
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                if self.eat(&TokenKind::LParen) {
                    Ok(Term::Compound {
                        functor: name,
                        args: self.args()?,
                    })
                } else {
                    Ok(Term::Constant(name))
                }
            }
            _ => Err(self.unexpected(&["term"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::render_program;

    fn c(s: &str) -> Term {
        Term::constant(s)
    }
    fn v(s: &str) -> Term {
        Term::variable(s)
    }

    #[test]
    fn linked_symptom_fact() {
        let p = parse_program("linked_symptom(grunting, chest_retractions).").unwrap();
        assert_eq!(
            p.rules,
            vec![Rule::fact(Atom::new(
                "linked_symptom",
                vec![c("grunting"), c("chest_retractions")]
            ))]
        );
    }

    #[test]
    fn propagation_rule() {
        let p = parse_program("has(symptom(S2)) :- has(symptom(S1)), linked_symptom(S1, S2).")
            .unwrap();
        let RuleKind::Normal { head, body } = &p.rules[0].kind else {
            panic!("expected a normal rule");
        };
        assert_eq!(
            *head,
            Atom::new("has", vec![Term::compound("symptom", vec![v("S2")])])
        );
        assert_eq!(body.len(), 2);
        assert!(body.iter().all(|l| !l.negated));
        assert_eq!(body[1].atom, Atom::new("linked_symptom", vec![v("S1"), v("S2")]));
    }

    #[test]
    fn negation_only_binding_is_unsafe() {
        let err = parse_program("diagnosis(X) :- not p(X).").unwrap_err();
        assert_eq!(
            err,
            Error::Safety {
                rule: 0,
                line: 1,
                var: "X".into()
            }
        );
    }

    #[test]
    fn anonymous_variable_in_constraint_is_safe() {
        let p = parse_program(":- not diagnosis(_).").unwrap();
        assert_eq!(
            p.rules[0].kind,
            RuleKind::Constraint {
                body: vec![Literal::neg(Atom::new("diagnosis", vec![v("_")]))]
            }
        );
        // ...but not in a normal rule's negated body or head
        assert!(matches!(
            parse_program("a :- not b(_).").unwrap_err(),
            Error::Safety { .. }
        ));
        assert!(matches!(
            parse_program("a(_) :- b(x).").unwrap_err(),
            Error::Safety { .. }
        ));
    }

    #[test]
    fn choice_and_minimize_safety() {
        assert!(parse_program("{ add(symptom(S)) : symptom(S) }.").is_ok());
        assert!(matches!(
            parse_program("{ add(symptom(S)) : symptom(T) }.").unwrap_err(),
            Error::Safety { var, .. } if var == "S"
        ));
        assert!(matches!(
            parse_program("#minimize { 1, S : add(symptom(T)) }.").unwrap_err(),
            Error::Safety { var, .. } if var == "S"
        ));
        assert!(matches!(
            parse_program("p(X).").unwrap_err(),
            Error::Safety { var, .. } if var == "X"
        ));
    }

    #[test]
    fn labels() {
        let p = parse_program("@l punish :- drive, drunk.\n@d drive.").unwrap();
        assert_eq!(p.rules[0].label.as_deref(), Some("l"));
        assert_eq!(p.rules[1].label.as_deref(), Some("d"));
        assert_eq!(
            parse_program("@d a.\n@d b.").unwrap_err(),
            Error::DuplicateLabel {
                label: "d".into(),
                line: 2,
                first: 1
            }
        );
    }

    #[test]
    fn single_minimize() {
        let err = parse_program("#minimize { 1 : a }.\n#minimize { 2 : b }.").unwrap_err();
        assert_eq!(err, Error::MultipleMinimize { line: 2 });
    }

    #[test]
    fn source_order_and_lines() {
        let p = parse_program_from("a.\n\n% c\nb :- a.\n", Some("kb.lp")).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.loc(1).line, 4);
        assert_eq!(p.loc(1).to_string(), "kb.lp:4");
    }

    #[test]
    fn parse_errors_report_expectations() {
        let err = parse_program("symptom(cough)\nsymptom(fever).").unwrap_err();
        let Error::Parse {
            line, expected, ..
        } = err
        else {
            panic!("expected a parse error");
        };
        assert_eq!(line, 2);
        assert!(expected.contains(&"`.`".to_string()));

        assert!(matches!(
            parse_program("a :- .").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            parse_program("p(1).").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            parse_program("a :- b").unwrap_err(),
            Error::Parse { found, .. } if found == "end of input"
        ));
    }

    #[test]
    fn renders_canonically() {
        let cases = [
            ("symptom(cough).", "symptom(cough).\n"),
            (
                "{add(symptom(S)):symptom(S)}.",
                "{ add(symptom(S)) : symptom(S) }.\n",
            ),
            ("@l punish:-drive,drunk.", "@l punish :- drive, drunk.\n"),
            (
                "#minimize{1,S:add(symptom(S))}.",
                "#minimize { 1, S : add(symptom(S)) }.\n",
            ),
            (":-not diagnosis(_).", ":- not diagnosis(_).\n"),
            ("{a}.", "{ a }.\n"),
        ];
        for (input, expected) in cases {
            let p = parse_program(input).unwrap();
            assert_eq!(render_program(&p), expected);
            assert_eq!(parse_program(expected).unwrap(), p);
        }
    }

    #[test]
    fn atom_parsing() {
        assert_eq!(
            parse_atom("diagnosis(chickenpox)").unwrap(),
            Atom::new("diagnosis", vec![c("chickenpox")])
        );
        assert!(parse_atom("diagnosis(x).").is_err());
    }
}
