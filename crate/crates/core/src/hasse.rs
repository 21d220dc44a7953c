//! Univariate polynomials over GF(q) with Hasse derivatives.
//!
//! The `i`-th Hasse derivative maps `sum a_k X^k` to
//! `sum C(k, i) a_k X^(k-i)`. Unlike the `i`-th formal derivative it does
//! not carry the factor `i!`, so it still detects root multiplicities in
//! positive characteristic: `beta` is a root of multiplicity at least `m`
//! exactly when the derivatives of order `0..m` all vanish at `beta`.

use std::fmt;

use thiserror::Error;

use crate::gf::{Elem, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HasseError {
    #[error("evaluation point ({0}, {1}) is neither (beta, 1) nor (1, 0)")]
    BadPoint(Elem, Elem),
    #[error("monomial exponent {t} out of range for n = {n}")]
    BadExponent { t: usize, n: usize },
}

/// Root multiplicity, with `Infinite` for the zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Multiplicity {
    Finite(usize),
    Infinite,
}

/// A polynomial with coefficients in little-endian order, kept normalized:
/// no trailing zero coefficients, and the empty list for zero.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    field: Field,
    coeffs: Vec<Elem>,
}

impl Polynomial {
    pub fn zero(field: &Field) -> Self {
        Polynomial {
            field: field.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn constant(field: &Field, c: Elem) -> Self {
        Self::new(field, vec![c])
    }

    /// `c * X^k`.
    pub fn monomial(field: &Field, c: Elem, k: usize) -> Self {
        let mut coeffs = vec![Elem::ZERO; k + 1];
        coeffs[k] = c;
        Self::new(field, coeffs)
    }

    pub fn new(field: &Field, mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial {
            field: field.clone(),
            coeffs,
        }
    }

    /// `X - gamma`.
    pub fn linear(field: &Field, gamma: Elem) -> Self {
        Self::new(field, vec![field.neg(gamma), Elem::ONE])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Elem {
        self.coeffs.get(k).copied().unwrap_or(Elem::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let f = &self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| f.add(self.coeff(k), other.coeff(k)))
            .collect();
        Self::new(f, coeffs)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(self.field.neg(Elem::ONE)))
    }

    pub fn scale(&self, c: Elem) -> Polynomial {
        let coeffs = self.coeffs.iter().map(|&a| self.field.mul(c, a)).collect();
        Self::new(&self.field, coeffs)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let f = &self.field;
        let mut coeffs = vec![Elem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(a, b));
            }
        }
        Self::new(f, coeffs)
    }

    pub fn pow(&self, e: usize) -> Polynomial {
        (0..e).fold(Self::constant(&self.field, Elem::ONE), |acc, _| {
            acc.mul(self)
        })
    }

    /// The `i`-th Hasse derivative.
    pub fn hasse_derivative(&self, i: usize) -> Polynomial {
        if i == 0 {
            return self.clone();
        }
        let f = &self.field;
        let coeffs = (i..self.coeffs.len())
            .map(|k| f.mul(f.binom(k as i64, i as i64), self.coeffs[k]))
            .collect();
        Self::new(f, coeffs)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, beta: Elem) -> Elem {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| f.add(f.mul(acc, beta), c))
    }

    /// Smallest `i` with a nonvanishing `i`-th Hasse derivative at `beta`.
    pub fn root_multiplicity(&self, beta: Elem) -> Multiplicity {
        match (0..self.coeffs.len()).find(|&i| !self.hasse_derivative(i).evaluate(beta).is_zero()) {
            Some(i) => Multiplicity::Finite(i),
            None => Multiplicity::Infinite,
        }
    }

    /// `prod (X - gamma_r)^(m_r)`.
    pub fn from_linear_factors(field: &Field, factors: &[(Elem, usize)]) -> Polynomial {
        factors
            .iter()
            .fold(Self::constant(field, Elem::ONE), |acc, &(gamma, m)| {
                acc.mul(&Self::linear(field, gamma).pow(m))
            })
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*X"),
                _ => format!("{c}*X^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Evaluates a Hasse derivative of the homogeneous monomial
/// `L^t * Lh^(n-1-t)`.
///
/// At `(beta, 1)` the derivative is taken in `L`; at `(1, 0)`, the point at
/// infinity, it is taken in `Lh`.
pub fn hasse_monomial_bivariate(
    field: &Field,
    t: usize,
    n: usize,
    i: usize,
    point: (Elem, Elem),
) -> Result<Elem, HasseError> {
    if t >= n {
        return Err(HasseError::BadExponent { t, n });
    }
    let (a, b) = point;
    let (first, second) = (t, n - 1 - t);
    let (coeff, first, second) = if b == Elem::ONE {
        if i > first {
            return Ok(Elem::ZERO);
        }
        (field.binom(first as i64, i as i64), first - i, second)
    } else if (a, b) == (Elem::ONE, Elem::ZERO) {
        if i > second {
            return Ok(Elem::ZERO);
        }
        (field.binom(second as i64, i as i64), first, second - i)
    } else {
        return Err(HasseError::BadPoint(a, b));
    };
    let value = field.mul(field.pow(a, first as u64), field.pow(b, second as u64));
    Ok(field.mul(coeff, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u64) -> Field {
        Field::from_order(q).unwrap()
    }

    fn poly(f: &Field, c: &[u32]) -> Polynomial {
        Polynomial::new(f, c.iter().map(|&v| Elem(v)).collect())
    }

    /// Multiplicity by repeated synthetic division by `X - beta`.
    fn multiplicity_by_division(p: &Polynomial, beta: Elem) -> Multiplicity {
        if p.is_zero() {
            return Multiplicity::Infinite;
        }
        let f = p.field().clone();
        let mut cur = p.coeffs().to_vec();
        let mut m = 0;
        loop {
            // Synthetic division: quotient and remainder.
            let mut quotient = vec![Elem::ZERO; cur.len().saturating_sub(1)];
            let mut carry = Elem::ZERO;
            for k in (0..cur.len()).rev() {
                let v = f.add(cur[k], f.mul(carry, beta));
                if k == 0 {
                    carry = v;
                } else {
                    quotient[k - 1] = v;
                    carry = v;
                }
            }
            if !carry.is_zero() {
                return Multiplicity::Finite(m);
            }
            m += 1;
            cur = quotient;
        }
    }

    #[test]
    fn hasse_derivative_examples() {
        let f = gf(3);
        let x3 = Polynomial::monomial(&f, Elem::ONE, 3);
        assert!(x3.hasse_derivative(1).is_zero());
        let x = Polynomial::monomial(&f, Elem::ONE, 1);
        assert!(x.hasse_derivative(2).is_zero());
        assert_eq!(x3.hasse_derivative(0), x3);
        for q in [2u64, 3, 4, 5, 9] {
            let f = gf(q);
            for t in 0..12 {
                let xt = Polynomial::monomial(&f, Elem::ONE, t);
                for i in 0..14 {
                    let expected = if i > t {
                        Polynomial::zero(&f)
                    } else {
                        Polynomial::monomial(&f, f.binom(t as i64, i as i64), t - i)
                    };
                    assert_eq!(xt.hasse_derivative(i), expected);
                }
            }
        }
    }

    #[test]
    fn degree_sentinel() {
        let f = gf(5);
        assert_eq!(Polynomial::zero(&f).degree(), None);
        assert_eq!(poly(&f, &[1, 0, 0]).degree(), Some(0));
        assert_eq!(poly(&f, &[0, 0, 3]).degree(), Some(2));
    }

    #[test]
    fn evaluate_examples() {
        let f = gf(2);
        assert_eq!(poly(&f, &[1, 0, 1]).evaluate(Elem::ONE), Elem::ZERO);
        let f3 = gf(3);
        let one = poly(&f3, &[1, 0, 0]);
        for b in f3.elements() {
            assert_eq!(one.evaluate(b), Elem::ONE);
            assert_eq!(Polynomial::zero(&f3).evaluate(b), Elem::ZERO);
        }
    }

    #[test]
    fn root_multiplicity_examples() {
        let f = gf(3);
        let sq = Polynomial::from_linear_factors(&f, &[(Elem(1), 2)]);
        // (X - 1)^2 = X^2 - 2X + 1 = X^2 + X + 1 over GF(3).
        assert_eq!(sq, poly(&f, &[1, 1, 1]));
        assert_eq!(sq.root_multiplicity(Elem(1)), Multiplicity::Finite(2));
        assert_eq!(sq.root_multiplicity(Elem(0)), Multiplicity::Finite(0));
        assert_eq!(
            Polynomial::zero(&f).root_multiplicity(Elem(2)),
            Multiplicity::Infinite
        );
    }

    #[test]
    fn from_linear_factors_examples() {
        let f2 = gf(2);
        assert_eq!(
            Polynomial::from_linear_factors(&f2, &[(Elem(0), 1)]),
            poly(&f2, &[0, 1])
        );
        let f3 = gf(3);
        // (X-1)^2 (X-2) = (X^2 + X + 1)(X + 1) = X^3 + 2X^2 + 2X + 1.
        assert_eq!(
            Polynomial::from_linear_factors(&f3, &[(Elem(1), 2), (Elem(2), 1)]),
            poly(&f3, &[1, 2, 2, 1])
        );
        assert_eq!(
            Polynomial::from_linear_factors(&f3, &[(Elem(1), 0), (Elem(2), 0)]),
            poly(&f3, &[1])
        );
    }

    #[test]
    fn bivariate_monomial() {
        let f = gf(5);
        let n = 4;
        for t in 0..n {
            for i in 0..=n {
                let at_inf =
                    hasse_monomial_bivariate(&f, t, n, i, (Elem::ONE, Elem::ZERO)).unwrap();
                assert_eq!(
                    at_inf,
                    if i == n - 1 - t {
                        Elem::ONE
                    } else {
                        Elem::ZERO
                    }
                );
                for beta in f.elements() {
                    let v = hasse_monomial_bivariate(&f, t, n, i, (beta, Elem::ONE)).unwrap();
                    let expected = if i > t {
                        Elem::ZERO
                    } else {
                        f.mul(f.binom(t as i64, i as i64), f.pow(beta, (t - i) as u64))
                    };
                    assert_eq!(v, expected);
                }
            }
        }
        assert_eq!(
            hasse_monomial_bivariate(&f, 0, 3, 1, (Elem(3), Elem::ONE)),
            Ok(Elem::ZERO)
        );
        assert_eq!(
            hasse_monomial_bivariate(&f, 0, 3, 1, (Elem(2), Elem(2))),
            Err(HasseError::BadPoint(Elem(2), Elem(2)))
        );
        assert_eq!(
            hasse_monomial_bivariate(&f, 0, 3, 1, (Elem(0), Elem(0))),
            Err(HasseError::BadPoint(Elem(0), Elem(0)))
        );
        assert!(hasse_monomial_bivariate(&f, 3, 3, 0, (Elem(1), Elem(0))).is_err());
    }

    #[test]
    fn multiplicity_agrees_with_division_on_factored_polynomials() {
        for q in [2u64, 3, 4, 5] {
            let f = gf(q);
            let elems: Vec<Elem> = f.elements().collect();
            // Every multiplicity vector over the field's elements with total <= 6.
            let mut ms = vec![0usize; q as usize];
            loop {
                let factors: Vec<(Elem, usize)> =
                    elems.iter().copied().zip(ms.iter().copied()).collect();
                let p = Polynomial::from_linear_factors(&f, &factors);
                for (r, &gamma) in elems.iter().enumerate() {
                    assert_eq!(p.root_multiplicity(gamma), Multiplicity::Finite(ms[r]));
                    assert_eq!(
                        multiplicity_by_division(&p, gamma),
                        Multiplicity::Finite(ms[r])
                    );
                }
                // Next vector with bounded sum.
                let mut k = 0;
                loop {
                    if k == ms.len() {
                        break;
                    }
                    ms[k] += 1;
                    if ms.iter().sum::<usize>() <= 6 {
                        break;
                    }
                    ms[k] = 0;
                    k += 1;
                }
                if k == ms.len() {
                    break;
                }
            }
        }
    }

    fn poly_strategy(q: u64, max_len: usize) -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(0..q as u32, 0..=max_len).prop_map(move |c| poly(&gf(q), &c))
    }

    proptest! {
        #[test]
        fn evaluate_is_zeroth_derivative(p in poly_strategy(7, 8), b in 0u32..7) {
            prop_assert_eq!(p.evaluate(Elem(b)), p.hasse_derivative(0).evaluate(Elem(b)));
        }

        #[test]
        fn multiplicity_equals_division_oracle(p in poly_strategy(3, 9), b in 0u32..3) {
            prop_assert_eq!(p.root_multiplicity(Elem(b)), multiplicity_by_division(&p, Elem(b)));
        }
    }
}
