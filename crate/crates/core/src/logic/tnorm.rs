use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Below this antecedent value the product residuum is treated as satisfied.
pub const PRODUCT_RESIDUUM_GUARD: f64 = 1e-12;

/// Triangular norm used to interpret conjunction. Negation is always `1 - x`;
/// disjunction is the dual co-norm and implication the norm's residuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    Minimum,
    Product,
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Minimum, TNorm::Product, TNorm::Lukasiewicz];

    pub fn negate(x: f64) -> f64 {
        1.0 - x
    }

    pub fn and(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Minimum => a.min(b),
            TNorm::Product => a * b,
            TNorm::Lukasiewicz => (a + b - 1.0).max(0.0),
        }
    }

    /// Partial derivatives of `and` at `(a, b)`. At the minimum's tie the
    /// derivative goes to the first operand; at the Łukasiewicz kink it is 0.
    pub fn and_grad(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            TNorm::Minimum => {
                if a <= b {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
            TNorm::Product => (b, a),
            TNorm::Lukasiewicz => {
                if a + b - 1.0 > 0.0 {
                    (1.0, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// Dual t-conorm `1 - T(1-a, 1-b)`, written in closed form so `max` stays exact.
    pub fn or(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Minimum => a.max(b),
            TNorm::Product => a + b - a * b,
            TNorm::Lukasiewicz => (a + b).min(1.0),
        }
    }

    pub fn or_grad(self, a: f64, b: f64) -> (f64, f64) {
        // d/da [1 - T(1-a, 1-b)] = T_1(1-a, 1-b)
        self.and_grad(Self::negate(a), Self::negate(b))
    }

    /// Residuum: 1 when `a <= b`, otherwise the norm-specific ratio or difference.
    pub fn residuum(self, a: f64, b: f64) -> f64 {
        if a <= b {
            return 1.0;
        }
        match self {
            TNorm::Minimum => b,
            TNorm::Product => {
                if a < PRODUCT_RESIDUUM_GUARD {
                    1.0
                } else {
                    b / a
                }
            }
            TNorm::Lukasiewicz => 1.0 - a + b,
        }
    }

    /// Partial derivatives of the residuum; zero on the satisfied branch including `a == b`.
    pub fn residuum_grad(self, a: f64, b: f64) -> (f64, f64) {
        if a <= b {
            return (0.0, 0.0);
        }
        match self {
            TNorm::Minimum => (0.0, 1.0),
            TNorm::Product => {
                if a < PRODUCT_RESIDUUM_GUARD {
                    (0.0, 0.0)
                } else {
                    (-b / (a * a), 1.0 / a)
                }
            }
            TNorm::Lukasiewicz => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TNorm::Minimum => "minimum",
            TNorm::Product => "product",
            TNorm::Lukasiewicz => "lukasiewicz",
        })
    }
}

impl FromStr for TNorm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "minimum" | "min" | "godel" => Ok(TNorm::Minimum),
            "product" | "prod" => Ok(TNorm::Product),
            "lukasiewicz" | "luk" => Ok(TNorm::Lukasiewicz),
            other => Err(format!("unknown t-norm `{other}`")),
        }
    }
}

/// How `=>` is mapped to a real value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImplicationMode {
    #[default]
    Residuum,
    /// `not a or b` through the co-norm, e.g. `1 - a + a*b` for the product norm.
    Material,
}

impl FromStr for ImplicationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "residuum" => Ok(ImplicationMode::Residuum),
            "material" => Ok(ImplicationMode::Material),
            other => Err(format!("unknown implication mode `{other}`")),
        }
    }
}

impl fmt::Display for ImplicationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImplicationMode::Residuum => "residuum",
            ImplicationMode::Material => "material",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connective {
    Not,
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    pub const ALL: [Connective; 5] = [
        Connective::Not,
        Connective::And,
        Connective::Or,
        Connective::Implies,
        Connective::Iff,
    ];

    pub fn arity(self) -> usize {
        match self {
            Connective::Not => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConnectiveError {
    #[error("operand {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("connective expects {expected} operands, got {got}")]
    Arity { expected: usize, got: usize },
}

pub(crate) fn implies(tnorm: TNorm, mode: ImplicationMode, a: f64, b: f64) -> f64 {
    match mode {
        ImplicationMode::Residuum => tnorm.residuum(a, b),
        ImplicationMode::Material => tnorm.or(TNorm::negate(a), b),
    }
}

pub(crate) fn implies_grad(tnorm: TNorm, mode: ImplicationMode, a: f64, b: f64) -> (f64, f64) {
    match mode {
        ImplicationMode::Residuum => tnorm.residuum_grad(a, b),
        ImplicationMode::Material => {
            let (da, db) = tnorm.or_grad(TNorm::negate(a), b);
            (-da, db)
        }
    }
}

pub(crate) fn iff(tnorm: TNorm, mode: ImplicationMode, a: f64, b: f64) -> f64 {
    tnorm.and(implies(tnorm, mode, a, b), implies(tnorm, mode, b, a))
}

pub(crate) fn iff_grad(tnorm: TNorm, mode: ImplicationMode, a: f64, b: f64) -> (f64, f64) {
    let ab = implies(tnorm, mode, a, b);
    let ba = implies(tnorm, mode, b, a);
    let (d_ab, d_ba) = tnorm.and_grad(ab, ba);
    let (ab_a, ab_b) = implies_grad(tnorm, mode, a, b);
    let (ba_b, ba_a) = implies_grad(tnorm, mode, b, a);
    (d_ab * ab_a + d_ba * ba_a, d_ab * ab_b + d_ba * ba_b)
}

/// Evaluates one connective on operands in `[0, 1]` with the residuum implication.
pub fn eval_connective(
    tnorm: TNorm,
    connective: Connective,
    operands: &[f64],
) -> Result<f64, ConnectiveError> {
    eval_connective_with(tnorm, ImplicationMode::Residuum, connective, operands)
}

pub fn eval_connective_with(
    tnorm: TNorm,
    mode: ImplicationMode,
    connective: Connective,
    operands: &[f64],
) -> Result<f64, ConnectiveError> {
    if operands.len() != connective.arity() {
        return Err(ConnectiveError::Arity {
            expected: connective.arity(),
            got: operands.len(),
        });
    }
    if let Some(&x) = operands.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(ConnectiveError::OutOfRange(x));
    }
    let a = operands[0];
    let b = operands.get(1).copied().unwrap_or(0.0);
    Ok(match connective {
        Connective::Not => TNorm::negate(a),
        Connective::And => tnorm.and(a, b),
        Connective::Or => tnorm.or(a, b),
        Connective::Implies => implies(tnorm, mode, a, b),
        Connective::Iff => iff(tnorm, mode, a, b),
    })
}
