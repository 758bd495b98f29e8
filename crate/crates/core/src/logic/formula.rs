use std::collections::HashSet;
use std::fmt;

/// Quantifier kinds of the prenex prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantifierKind {
    ForAll,
    Exists,
    /// At least `n` groundings: penalty is the sum of the `n` smallest violations.
    ExistsN(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quantifier {
    pub kind: QuantifierKind,
    pub variable: String,
    pub domain: String,
}

/// Propositional body of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom {
        predicate: String,
        args: Vec<String>,
    },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn atom(predicate: impl Into<String>, args: &[&str]) -> Self {
        Expr::Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn negation(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Expr, b: Expr) -> Self {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    /// Left-folded disjunction. Panics on an empty iterator.
    pub fn disjunction(items: impl IntoIterator<Item = Expr>) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("disjunction of zero operands");
        it.fold(first, Expr::or)
    }

    /// Calls `f` on every atom in left-to-right order.
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [String])) {
        match self {
            Expr::Atom { predicate, args } => f(predicate, args),
            Expr::Not(e) => e.visit_atoms(f),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Iff(..) => 1,
            Expr::Implies(..) => 2,
            Expr::Or(..) => 3,
            Expr::And(..) => 4,
            Expr::Not(_) => 5,
            Expr::Atom { .. } => 6,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Operands print bare only when they bind strictly tighter than the parent;
        // this keeps the output unambiguous for every associativity.
        fn operand(f: &mut fmt::Formatter<'_>, parent: u8, e: &Expr) -> fmt::Result {
            if e.precedence() > parent {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        }
        match self {
            Expr::Atom { predicate, args } => write!(f, "{}({})", predicate, args.join(",")),
            Expr::Not(e) => {
                write!(f, "not ")?;
                operand(f, 4, e)
            }
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                let op = match self {
                    Expr::And(..) => "and",
                    Expr::Or(..) => "or",
                    Expr::Implies(..) => "=>",
                    _ => "<=>",
                };
                let p = self.precedence();
                operand(f, p, a)?;
                write!(f, " {op} ")?;
                operand(f, p, b)
            }
        }
    }
}

/// A rule in prenex form: quantifier prefix followed by a propositional body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    pub quantifiers: Vec<Quantifier>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("variable `{0}` is quantified more than once")]
    DuplicateVariable(String),
    #[error("variable `{0}` is not bound by any quantifier")]
    UnboundVariable(String),
    #[error("atom `{predicate}` has arity {arity}; only 1 or 2 are supported")]
    BadArity { predicate: String, arity: usize },
    #[error("formula has no quantifiers")]
    NoQuantifier,
}

impl Formula {
    /// Builds a formula and checks variable binding and atom arity.
    pub fn new(quantifiers: Vec<Quantifier>, body: Expr) -> Result<Self, FormulaError> {
        let f = Formula { quantifiers, body };
        f.validate()?;
        Ok(f)
    }

    /// `forall x:<domain>. <body>` over a single variable named `x`.
    pub fn forall_x(domain: &str, body: Expr) -> Self {
        Formula {
            quantifiers: vec![Quantifier {
                kind: QuantifierKind::ForAll,
                variable: "x".into(),
                domain: domain.into(),
            }],
            body,
        }
    }

    pub fn validate(&self) -> Result<(), FormulaError> {
        if self.quantifiers.is_empty() {
            return Err(FormulaError::NoQuantifier);
        }
        let mut bound = HashSet::new();
        for q in &self.quantifiers {
            if !bound.insert(q.variable.as_str()) {
                return Err(FormulaError::DuplicateVariable(q.variable.clone()));
            }
        }
        let mut err = None;
        self.body.visit_atoms(&mut |pred, args| {
            if err.is_some() {
                return;
            }
            if !(1..=2).contains(&args.len()) {
                err = Some(FormulaError::BadArity {
                    predicate: pred.to_string(),
                    arity: args.len(),
                });
                return;
            }
            if let Some(v) = args.iter().find(|a| !bound.contains(a.as_str())) {
                err = Some(FormulaError::UnboundVariable(v.clone()));
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Distinct predicate names with their arity, in first-occurrence order.
    pub fn predicates(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.body.visit_atoms(&mut |pred, args| {
            if !out.iter().any(|(p, _)| p == pred) {
                out.push((pred.to_string(), args.len()));
            }
        });
        out
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            QuantifierKind::ForAll => write!(f, "forall")?,
            QuantifierKind::Exists => write!(f, "exists")?,
            QuantifierKind::ExistsN(n) => write!(f, "exists[{n}]")?,
        }
        write!(f, " {}:{}", self.variable, self.domain)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.quantifiers {
            write!(f, "{q}. ")?;
        }
        write!(f, "{}", self.body)
    }
}
