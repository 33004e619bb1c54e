//! Scalars and the basis vocabulary shared by every other module.

mod basis;
mod dyadic;

pub use basis::SubspaceSpec;
pub use dyadic::Dyadic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for comparisons in float mode.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-12;

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// A coefficient: exact dyadic or binary64. Mixed-mode arithmetic is an error.
#[derive(Clone, PartialEq)]
pub enum Scalar {
    Exact(Dyadic),
    Float(f64),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(Dyadic::zero()),
            Mode::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(Dyadic::one()),
            Mode::Float => Scalar::Float(1.0),
        }
    }

    /// `2^e` in the given mode.
    pub fn pow2(mode: Mode, e: i64) -> Result<Self> {
        Scalar::Exact(Dyadic::pow2(e)).into_mode(mode)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(d) => d.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn as_exact(&self) -> Option<&Dyadic> {
        match self {
            Scalar::Exact(d) => Some(d),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Scalar::Exact(d) => d.to_f64(),
            Scalar::Float(x) => Ok(*x),
        }
    }

    /// Converts into `mode`; exact → float may overflow, float → exact is exact.
    pub fn into_mode(self, mode: Mode) -> Result<Self> {
        match (self, mode) {
            (s @ Scalar::Exact(_), Mode::Exact) | (s @ Scalar::Float(_), Mode::Float) => Ok(s),
            (Scalar::Exact(d), Mode::Float) => Ok(Scalar::Float(d.to_f64()?)),
            (Scalar::Float(x), Mode::Exact) => Ok(Scalar::Exact(Dyadic::from_f64(x)?)),
        }
    }

    fn check(&self, other: &Scalar) -> Result<()> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "mode mismatch: {} vs {}",
                self.mode(),
                other.mode()
            )))
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a + b),
            _ => unreachable!(),
        })
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a * b),
            _ => unreachable!(),
        })
    }

    /// Multiplies by an exact dyadic factor without changing mode.
    pub fn scale_dyadic(&self, factor: &Dyadic) -> Result<Scalar> {
        Ok(match self {
            Scalar::Exact(a) => Scalar::Exact(a * factor),
            Scalar::Float(a) => Scalar::Float(a * factor.to_f64()?),
        })
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(a) => Scalar::Float(-a),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.abs()),
            Scalar::Float(a) => Scalar::Float(a.abs()),
        }
    }

    /// Equality in exact mode, `|a-b| <= tol` in float mode.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> Result<bool> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => (a - b).abs() <= tol,
            _ => unreachable!(),
        })
    }

    /// Parses a coefficient text in the given mode.
    pub fn parse(text: &str, mode: Mode) -> Result<Scalar> {
        match mode {
            Mode::Exact => Ok(Scalar::Exact(text.parse()?)),
            Mode::Float => match text.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Scalar::Float(x)),
                _ => Ok(Scalar::Float(text.parse::<Dyadic>()?.to_f64()?)),
            },
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(d) => fmt::Display::fmt(d, f),
            Scalar::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Dyadic> for Scalar {
    fn from(d: Dyadic) -> Self {
        Scalar::Exact(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixing_modes_is_rejected() {
        let a = Scalar::one(Mode::Exact);
        let b = Scalar::one(Mode::Float);
        assert!(matches!(a.add(&b), Err(Error::Config(_))));
        assert!(matches!(a.mul(&b), Err(Error::Config(_))));
        assert!(a.approx_eq(&b, 1.0).is_err());
    }

    #[test]
    fn float_comparison_uses_tolerance() {
        let a = Scalar::Float(1.0);
        let b = Scalar::Float(1.0 + 1e-13);
        assert!(a.approx_eq(&b, DEFAULT_FLOAT_TOLERANCE).unwrap());
        assert!(!a.approx_eq(&Scalar::Float(1.0 + 1e-11), DEFAULT_FLOAT_TOLERANCE).unwrap());
    }

    #[test]
    fn parse_by_mode() {
        assert_eq!(
            Scalar::parse("1/2", Mode::Exact).unwrap(),
            Scalar::Exact(Dyadic::pow2(-1))
        );
        assert_eq!(Scalar::parse("1/2", Mode::Float).unwrap(), Scalar::Float(0.5));
        assert_eq!(Scalar::parse("0.1", Mode::Float).unwrap(), Scalar::Float(0.1));
        assert!(Scalar::parse("0.1", Mode::Exact).is_err());
    }
}
