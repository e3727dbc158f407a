//! Coordinate observables `x_i` and products `x_i x_j`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteSet};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    Constant(f64),
    /// `x_i`
    Coordinate(usize),
    /// `x_i * x_j` (`i == j` allowed)
    Product(usize, usize),
}

impl Observable {
    pub fn value<T: Real>(&self, x: &[T]) -> T {
        match *self {
            Observable::Constant(c) => T::lit(c),
            Observable::Coordinate(i) => x[i],
            Observable::Product(i, j) => x[i] * x[j],
        }
    }

    /// Writes the gradient into `out` (length `|Lambda|`).
    pub fn gradient_into<T: Real>(&self, x: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        match *self {
            Observable::Constant(_) => {}
            Observable::Coordinate(i) => out[i] = T::one(),
            Observable::Product(i, j) => {
                out[i] += x[j];
                out[j] += x[i];
            }
        }
    }

    /// Lattice support; empty for constants.
    pub fn support(&self) -> SiteSet {
        match *self {
            Observable::Constant(_) => SiteSet::default(),
            Observable::Coordinate(i) => SiteSet::singleton(i),
            Observable::Product(i, j) => [i, j].into_iter().collect(),
        }
    }

    pub fn max_site(&self) -> Option<usize> {
        match *self {
            Observable::Constant(_) => None,
            Observable::Coordinate(i) => Some(i),
            Observable::Product(i, j) => Some(i.max(j)),
        }
    }

    pub fn check(&self, lattice: &Lattice) -> Result<()> {
        match self.max_site() {
            Some(s) if s >= lattice.len() => Err(Error::SiteOutOfRange {
                site: s,
                len: lattice.len(),
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Constant(c) => write!(f, "{c}"),
            Observable::Coordinate(i) => write!(f, "x_{i}"),
            Observable::Product(i, j) => write!(f, "x_{i}*x_{j}"),
        }
    }
}

fn parse_coordinate(s: &str) -> Option<usize> {
    s.trim().strip_prefix("x_")?.parse().ok()
}

impl FromStr for Observable {
    type Err = Error;

    /// Accepts `x_i` and `x_i*x_j`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("observable `{s}` is not `x_i` or `x_i*x_j`"));
        match s.split_once('*') {
            None => parse_coordinate(s).map(Observable::Coordinate).ok_or_else(bad),
            Some((a, b)) => match (parse_coordinate(a), parse_coordinate(b)) {
                (Some(i), Some(j)) => Ok(Observable::Product(i, j)),
                _ => Err(bad()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("x_3".parse::<Observable>().unwrap(), Observable::Coordinate(3));
        assert_eq!("x_0*x_12".parse::<Observable>().unwrap(), Observable::Product(0, 12));
        assert!("y_1".parse::<Observable>().is_err());
        assert!("x_1*".parse::<Observable>().is_err());
        assert_eq!(Observable::Product(1, 2).to_string(), "x_1*x_2");
    }

    #[test]
    fn gradients() {
        let mut g = [0.0_f64; 3];
        Observable::Product(0, 0).gradient_into(&[1.5, 2.0, 0.0], &mut g);
        assert_eq!(g, [3.0, 0.0, 0.0]);
        Observable::Product(0, 2).gradient_into(&[1.5, 2.0, -1.0], &mut g);
        assert_eq!(g, [-1.0, 0.0, 1.5]);
        assert!(Observable::Constant(2.0).support().is_empty());
    }
}
