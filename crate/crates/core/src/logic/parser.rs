//! Line-oriented rule syntax.
//!
//! ```text
//! rule  := quant ("."? quant)* "." expr
//! quant := ("forall" | "exists" | "exists[" INT "]") IDENT ":" DOMAIN
//! expr  := impl ("<=>" impl)*
//! impl  := disj ("=>" impl)?
//! disj  := conj ("or" conj)*
//! conj  := unary ("and" unary)*
//! unary := "not" unary | atom | "(" expr ")"
//! atom  := PRED "(" IDENT ("," IDENT)? ")"
//! ```
//!
//! Predicate names may contain `:` so ontology ids such as `GO:0008150` or
//! `BIN:GO:0008150` can be used verbatim. Everything after `#` is a comment.

use super::formula::{Expr, Formula, FormulaError, Quantifier, QuantifierKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error(transparent)]
    Binding(#[from] FormulaError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Colon,
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    DoubleArrow,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            ':' => {
                toks.push((Tok::Colon, col));
                i += 1;
            }
            '.' => {
                toks.push((Tok::Dot, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '[' => {
                toks.push((Tok::LBracket, col));
                i += 1;
            }
            ']' => {
                toks.push((Tok::RBracket, col));
                i += 1;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                toks.push((Tok::Arrow, col));
                i += 2;
            }
            '<' if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') => {
                toks.push((Tok::DoubleArrow, col));
                i += 3;
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => {
                return Err(ParseError::Syntax {
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    toks.push((Tok::End, chars.len() + 1));
    Ok(Lexer { toks })
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn at_quantifier(&self) -> bool {
        self.at_keyword("forall") || self.at_keyword("exists")
    }

    fn quantifier(&mut self) -> Result<Quantifier, ParseError> {
        let kind = if self.at_keyword("forall") {
            self.bump();
            QuantifierKind::ForAll
        } else if self.at_keyword("exists") {
            self.bump();
            if *self.peek() == Tok::LBracket {
                self.bump();
                let col = self.column();
                let n = match self.bump() {
                    Tok::Ident(s) => s.parse::<usize>().ok(),
                    _ => None,
                };
                let Some(n) = n.filter(|&n| n >= 1) else {
                    return Err(ParseError::Syntax {
                        column: col,
                        message: "expected positive integer count".into(),
                    });
                };
                self.expect(Tok::RBracket, "`]`")?;
                QuantifierKind::ExistsN(n)
            } else {
                QuantifierKind::Exists
            }
        } else {
            return self.error("expected quantifier");
        };
        let variable = self.ident("variable name")?;
        self.expect(Tok::Colon, "`:` after variable")?;
        let domain = self.ident("domain name")?;
        Ok(Quantifier {
            kind,
            variable,
            domain,
        })
    }

    fn rule(&mut self) -> Result<Formula, ParseError> {
        let mut quantifiers = vec![self.quantifier()?];
        loop {
            if self.at_quantifier() {
                quantifiers.push(self.quantifier()?);
                continue;
            }
            self.expect(Tok::Dot, "`.` after quantifier")?;
            if self.at_quantifier() {
                quantifiers.push(self.quantifier()?);
            } else {
                break;
            }
        }
        let body = self.iff()?;
        if *self.peek() != Tok::End {
            return self.error("unexpected trailing input");
        }
        Ok(Formula::new(quantifiers, body)?)
    }

    fn iff(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let rhs = self.implication()?;
            lhs = Expr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.at_keyword("or") {
            self.bump();
            lhs = Expr::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.at_keyword("and") {
            self.bump();
            lhs = Expr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at_keyword("not") {
            self.bump();
            return Ok(Expr::negation(self.unary()?));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let e = self.iff()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let mut predicate = self.ident("predicate name")?;
        while *self.peek() == Tok::Colon {
            self.bump();
            predicate.push(':');
            predicate.push_str(&self.ident("predicate name segment")?);
        }
        self.expect(Tok::LParen, "`(` after predicate name")?;
        let mut args = vec![self.ident("argument variable")?];
        if *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.ident("argument variable")?);
        }
        self.expect(Tok::RParen, "`)` closing argument list")?;
        Ok(Expr::Atom { predicate, args })
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "forall" | "exists" | "not" | "and" | "or")
}

/// Parses one rule.
pub fn parse_rule(text: &str) -> Result<Formula, ParseError> {
    let lexer = lex(text)?;
    Parser {
        toks: lexer.toks,
        pos: 0,
    }
    .rule()
}

/// Parses a rule file: one rule per line, blank lines and `#` comments skipped.
/// Errors carry the 1-based line number.
pub fn parse_rules(text: &str) -> Result<Vec<Formula>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        out.push(parse_rule(content).map_err(|e| (i + 1, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_implication() {
        let f = parse_rule("forall x:Prot. Q(x) => P(x)").unwrap();
        assert_eq!(f.quantifiers.len(), 1);
        assert_eq!(f.quantifiers[0].kind, QuantifierKind::ForAll);
        assert_eq!(
            f.body,
            Expr::implies(Expr::atom("Q", &["x"]), Expr::atom("P", &["x"]))
        );
    }

    #[test]
    fn disjunction_of_children() {
        let f = parse_rule("forall x:Prot. U(x) => (C1(x) or C2(x))").unwrap();
        assert_eq!(
            f.body,
            Expr::implies(
                Expr::atom("U", &["x"]),
                Expr::or(Expr::atom("C1", &["x"]), Expr::atom("C2", &["x"]))
            )
        );
    }

    #[test]
    fn interaction_rule() {
        let f = parse_rule("forall x:Prot. forall y:Prot. BOUND(x,y) => (P(x) <=> P(y))").unwrap();
        assert_eq!(f.quantifiers.len(), 2);
        assert_eq!(
            f.body,
            Expr::implies(
                Expr::atom("BOUND", &["x", "y"]),
                Expr::iff(Expr::atom("P", &["x"]), Expr::atom("P", &["y"]))
            )
        );
        assert_eq!(f.predicates(), vec![("BOUND".into(), 2), ("P".into(), 1)]);
    }

    #[test]
    fn quantifiers_without_separating_dot() {
        let f = parse_rule("forall x:A forall y:B. R(x,y)").unwrap();
        assert_eq!(f.quantifiers[1].domain, "B");
    }

    #[test]
    fn exists_n_and_go_ids() {
        let f = parse_rule("exists[3] x:Prot. GO:0008150(x) and not BIN:GO:0003674(x)").unwrap();
        assert_eq!(f.quantifiers[0].kind, QuantifierKind::ExistsN(3));
        assert_eq!(
            f.predicates(),
            vec![("GO:0008150".into(), 1), ("BIN:GO:0003674".into(), 1)]
        );
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse_rule("forall x:D. A(x) => B(x) => C(x)").unwrap();
        assert_eq!(
            f.body,
            Expr::implies(
                Expr::atom("A", &["x"]),
                Expr::implies(Expr::atom("B", &["x"]), Expr::atom("C", &["x"]))
            )
        );
    }

    #[test]
    fn precedence_and_over_or() {
        let f = parse_rule("forall x:D. A(x) or B(x) and C(x)").unwrap();
        assert_eq!(
            f.body,
            Expr::or(
                Expr::atom("A", &["x"]),
                Expr::and(Expr::atom("B", &["x"]), Expr::atom("C", &["x"]))
            )
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_rule("forall x:D. P(y)"),
            Err(ParseError::Binding(FormulaError::UnboundVariable(v))) if v == "y"
        ));
        assert!(matches!(
            parse_rule("forall x:D. forall x:E. P(x)"),
            Err(ParseError::Binding(FormulaError::DuplicateVariable(_)))
        ));
        assert!(matches!(
            parse_rule("forall x:D. P(x,x,x)"),
            Err(ParseError::Syntax { .. })
        ));
        match parse_rule("forall x:D. P(x) =>") {
            Err(ParseError::Syntax { column, .. }) => assert_eq!(column, 20),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_rule("P(x)").is_err());
        assert!(parse_rule("exists[0] x:D. P(x)").is_err());
        assert!(parse_rule("forall x:D. P(x) Q(x)").is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "forall x:Prot. Q(x) => P(x)",
            "forall x:Prot. U(x) => (C1(x) or C2(x) or BIN:U(x))",
            "forall x:Prot. forall y:Prot. BOUND(x,y) => (P(x) <=> P(y))",
            "exists[2] x:D. not (A(x) and B(x)) => (A(x) => B(x)) => C(x)",
            "forall x:D. (A(x) <=> B(x)) <=> C(x)",
        ] {
            let f = parse_rule(text).unwrap();
            let again = parse_rule(&f.to_string()).unwrap();
            assert_eq!(f, again, "{text} printed as {f}");
        }
    }

    #[test]
    fn rule_file_reports_line() {
        let text = "# header\nforall x:D. A(x) => B(x)\n\nforall x:D. A(\n";
        let err = parse_rules(text).unwrap_err();
        assert_eq!(err.0, 4);
        let ok = parse_rules("forall x:D. A(x)  # trailing\n").unwrap();
        assert_eq!(ok.len(), 1);
    }
}
