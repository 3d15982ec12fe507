//! Scalar coefficient fields sampled at quadrature points.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// `coeff * x^px * y^py`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub px: u32,
    pub py: u32,
}

impl Monomial {
    pub const fn new(coeff: f64, px: u32, py: u32) -> Self {
        Self { coeff, px, py }
    }
}

#[derive(Clone)]
enum Kind {
    Polynomial(Vec<Monomial>),
    Function(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

/// A named real-valued function of position.
#[derive(Clone)]
pub struct CoefficientField {
    name: String,
    kind: Kind,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("CoefficientField");
        d.field("name", &self.name);
        if let Kind::Polynomial(terms) = &self.kind {
            d.field("terms", terms);
        }
        d.finish()
    }
}

/// Names accepted by [`CoefficientField::preset`].
pub const PRESETS: [&str; 7] = ["one", "delta_lin", "delta_rad", "n16", "n24", "n_lin", "n_quad"];

impl CoefficientField {
    pub fn constant(c: f64) -> Self {
        Self { name: format!("{c}"), kind: Kind::Polynomial(vec![Monomial::new(c, 0, 0)]) }
    }

    pub fn polynomial(name: impl Into<String>, terms: Vec<Monomial>) -> Self {
        Self { name: name.into(), kind: Kind::Polynomial(terms) }
    }

    pub fn function(name: impl Into<String>, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), kind: Kind::Function(Arc::new(f)) }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let poly = |terms: &[Monomial]| Self::polynomial(name, terms.to_vec());
        let field = match name {
            "one" => poly(&[Monomial::new(1.0, 0, 0)]),
            "delta_lin" | "n_lin" => {
                poly(&[Monomial::new(8.0, 0, 0), Monomial::new(1.0, 1, 0), Monomial::new(-1.0, 0, 1)])
            }
            "delta_rad" => Self::function(name, |p| (p[0] * p[0] + p[1] * p[1]).sqrt() + 1.0),
            "n16" => poly(&[Monomial::new(16.0, 0, 0)]),
            "n24" => poly(&[Monomial::new(24.0, 0, 0)]),
            "n_quad" => poly(&[Monomial::new(18.0, 0, 0), Monomial::new(1.0, 2, 0), Monomial::new(1.0, 0, 2)]),
            other => {
                return Err(Error::InvalidCoefficient(format!(
                    "unknown preset '{other}' (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(field)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, Kind::Polynomial(_))
    }

    /// The constant value, when the field is a constant polynomial.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.kind {
            Kind::Polynomial(t) if t.iter().all(|m| m.px == 0 && m.py == 0) => Some(t.iter().map(|m| m.coeff).sum()),
            _ => None,
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match &self.kind {
            Kind::Polynomial(terms) => {
                terms.iter().map(|m| m.coeff * p[0].powi(m.px as i32) * p[1].powi(m.py as i32)).sum()
            }
            Kind::Function(f) => f(p),
        }
    }

    /// Pointwise `g(self(x))` under a new name.
    pub fn map(&self, name: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let inner = self.clone();
        Self::function(name, move |p| g(inner.eval(p)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        match &self.kind {
            Kind::Polynomial(terms) => Self::polynomial(
                format!("{s}*{}", self.name),
                terms.iter().map(|m| Monomial::new(s * m.coeff, m.px, m.py)).collect(),
            ),
            Kind::Function(_) => self.map(format!("{s}*{}", self.name), move |v| s * v),
        }
    }
}
