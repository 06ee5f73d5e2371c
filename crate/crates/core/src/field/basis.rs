use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

/// `s1^px * s2^py`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub px: u8,
    pub py: u8,
}

impl Monomial {
    pub const CONSTANT: Monomial = Monomial { px: 0, py: 0 };

    pub const fn new(px: u8, py: u8) -> Self {
        Self { px, py }
    }

    pub fn degree(&self) -> u8 {
        self.px + self.py
    }

    pub fn eval(&self, p: Point2) -> f64 {
        p.x.powi(self.px as i32) * p.y.powi(self.py as i32)
    }

    /// Parses names like `1`, `s1`, `s2^2`, `s1*s2`.
    pub fn parse(name: &str) -> Option<Self> {
        let name = name.trim();
        if name == "1" {
            return Some(Self::CONSTANT);
        }
        let mut m = Self::new(0, 0);
        for factor in name.split('*') {
            let (var, pow) = match factor.trim().split_once('^') {
                Some((v, p)) => (v.trim(), p.trim().parse::<u8>().ok()?),
                None => (factor.trim(), 1),
            };
            match var {
                "s1" | "x" => m.px = m.px.checked_add(pow)?,
                "s2" | "y" => m.py = m.py.checked_add(pow)?,
                _ => return None,
            }
        }
        Some(m)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |v: &str, p: u8| match p {
            0 => String::new(),
            1 => v.to_string(),
            _ => format!("{v}^{p}"),
        };
        match (self.px, self.py) {
            (0, 0) => write!(f, "1"),
            (_, 0) => write!(f, "{}", part("s1", self.px)),
            (0, _) => write!(f, "{}", part("s2", self.py)),
            _ => write!(f, "{}*{}", part("s1", self.px), part("s2", self.py)),
        }
    }
}

/// Polynomial trend terms. The constant term is always first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Monomial>", into = "Vec<Monomial>")]
pub struct TrendBasis {
    terms: Vec<Monomial>,
}

impl TryFrom<Vec<Monomial>> for TrendBasis {
    type Error = String;

    fn try_from(terms: Vec<Monomial>) -> Result<Self, String> {
        if terms.first() != Some(&Monomial::CONSTANT) {
            return Err("trend basis must start with the constant term".into());
        }
        let mut seen = terms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != terms.len() {
            return Err("trend basis repeats a term".into());
        }
        Ok(Self { terms })
    }
}

impl From<TrendBasis> for Vec<Monomial> {
    fn from(b: TrendBasis) -> Self {
        b.terms
    }
}

impl TrendBasis {
    pub fn constant() -> Self {
        Self {
            terms: vec![Monomial::CONSTANT],
        }
    }

    /// All monomials up to total `degree`, ordered by degree then by `s1` power descending.
    pub fn polynomial(degree: u8) -> Self {
        let mut terms = Vec::new();
        for d in 0..=degree {
            for py in 0..=d {
                terms.push(Monomial::new(d - py, py));
            }
        }
        Self { terms }
    }

    pub fn linear() -> Self {
        Self::polynomial(1)
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, m: Monomial) -> bool {
        self.terms.contains(&m)
    }

    /// Appends `m` unless already present.
    pub fn with(&self, m: Monomial) -> Self {
        let mut terms = self.terms.clone();
        if !terms.contains(&m) {
            terms.push(m);
        }
        Self { terms }
    }

    pub fn eval(&self, p: Point2) -> Vec<f64> {
        self.terms.iter().map(|m| m.eval(p)).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(|m| m.to_string()).collect()
    }
}

/// Degree-2 candidates for blind selection: `s1, s2, s1^2, s1*s2, s2^2`.
pub fn quadratic_candidates() -> Vec<Monomial> {
    TrendBasis::polynomial(2).terms()[1..].to_vec()
}
