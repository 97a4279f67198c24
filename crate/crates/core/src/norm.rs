//! `ℓ_p` norm indices, including the `p = ∞` case.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An `ℓ_p` norm index with `1 ≤ p ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// Finite exponent `p ≥ 1`.
    P(f64),
    Inf,
}

impl Norm {
    pub const L1: Norm = Norm::P(1.0);
    pub const L2: Norm = Norm::P(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Norm::Inf)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Norm::P(p))
        } else {
            Err(Error::InvalidArgument(format!("norm index must be in [1, inf], got {p}")))
        }
    }

    pub fn is_l1(self) -> bool {
        self == Norm::L1
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn dual(self) -> Norm {
        match self {
            Norm::Inf => Norm::L1,
            Norm::P(p) if p == 1.0 => Norm::Inf,
            Norm::P(p) => Norm::P(p / (p - 1.0)),
        }
    }

    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::P(p) if p == 1.0 => v.iter().map(|x| x.abs()).sum(),
            Norm::P(p) if p == 2.0 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::P(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// `‖x - y‖_p`.
    pub fn dist(self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.of(&d)
    }

    /// `n^{1/p}`, the `ℓ_p` diameter of a unit cube; exactly `1` for `p = ∞`.
    pub fn dim_factor(self, n: usize) -> f64 {
        match self {
            Norm::Inf => 1.0,
            Norm::P(p) if p == 1.0 => n as f64,
            Norm::P(p) => (n as f64).powf(1.0 / p),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Norm::Inf => 0.0,
            Norm::P(p) => 1.0 / p,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Inf => write!(f, "inf"),
            Norm::P(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Norm::Inf),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse norm index `{s}`")))?;
                Norm::new(p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duals() {
        assert_eq!(Norm::L1.dual(), Norm::Inf);
        assert_eq!(Norm::Inf.dual(), Norm::L1);
        assert_eq!(Norm::L2.dual(), Norm::L2);
        assert_eq!(Norm::P(3.0).dual(), Norm::P(1.5));
    }

    #[test]
    fn norms_of_vector() {
        let v = [3.0, -4.0];
        assert_eq!(Norm::L1.of(&v), 7.0);
        assert_eq!(Norm::L2.of(&v), 5.0);
        assert_eq!(Norm::Inf.of(&v), 4.0);
    }

    #[test]
    fn dim_factor_inf_is_one() {
        assert_eq!(Norm::Inf.dim_factor(7), 1.0);
        assert_eq!(Norm::L1.dim_factor(7), 7.0);
        assert!((Norm::L2.dim_factor(4) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1", "2", "inf"] {
            let n: Norm = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert!("0.5".parse::<Norm>().is_err());
        assert!("abc".parse::<Norm>().is_err());
    }
}
