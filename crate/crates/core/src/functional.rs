//! Variable table for the linear functional `L` and sparse linear
//! expressions in its real decision variables.
//!
//! A Hermitian functional is determined by its values on canonical
//! representatives: `L(conj m) = conj L(m)`, so each conjugate pair `{m,
//! conj m}` owns one complex value, split here into real decision variables
//! (one for a self-conjugate monomial, two otherwise). Monomials killed by
//! the sign-symmetry conditions are pinned to zero and never allocated.

use std::collections::HashMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::monomial::{DegreeBound, Monomial, VarMode};
use crate::scalar::Scalar;

/// Which monomials are pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinRule {
    /// Complex sign symmetry: `L(m) = 0` unless `|α| = |α′|` and `|β| = |β′|`.
    Balance,
    /// Real parity: `L(x^α y^β) = 0` when `|α|` or `|β|` is odd.
    Parity,
    /// No pinning (completely positive rank programs).
    None,
}

impl PinRule {
    pub fn pins(&self, m: &Monomial) -> bool {
        match self {
            PinRule::Balance => !m.is_balanced(),
            PinRule::Parity => {
                let (a, b) = m.parity();
                a != 0 || b != 0
            }
            PinRule::None => false,
        }
    }
}

/// Where the value `L(m)` lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentRef {
    /// Pinned to zero by the sign-symmetry rule.
    Zero,
    /// Real value, one variable (self-conjugate monomial, or real mode).
    Real(usize),
    /// Complex value `re + i*im`; `conjugated` means the canonical
    /// representative is the conjugate, so `L(m) = re - i*im`.
    Complex { re: usize, im: usize, conjugated: bool },
}

/// Bijection between canonical moment monomials and decision variables.
#[derive(Debug, Clone)]
pub struct FunctionalTable {
    pub mode: VarMode,
    pub d1: usize,
    pub d2: usize,
    pub bound: DegreeBound,
    pub pin: PinRule,
    /// All moments constrained to be real: valid for states with real
    /// entries, where conjugating the functional is a feasibility-preserving
    /// symmetry one can average over. Halves the variable count and keeps
    /// every symbolic block real (no embedding on realification).
    pub real_values: bool,
    map: HashMap<Monomial, MomentRef>,
    num_vars: usize,
    unit_var: usize,
}

impl FunctionalTable {
    /// Allocate variables for every admissible monomial within `bound`.
    /// `monomials` must be sorted canonically for reproducible variable ids.
    pub fn from_monomials<'a, I>(
        d1: usize,
        d2: usize,
        mode: VarMode,
        bound: DegreeBound,
        pin: PinRule,
        monomials: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Monomial>,
    {
        Self::from_monomials_with(d1, d2, mode, bound, pin, false, monomials)
    }

    pub fn from_monomials_with<'a, I>(
        d1: usize,
        d2: usize,
        mode: VarMode,
        bound: DegreeBound,
        pin: PinRule,
        real_values: bool,
        monomials: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Monomial>,
    {
        let mut map: HashMap<Monomial, MomentRef> = HashMap::new();
        let mut num_vars = 0usize;
        for m in monomials {
            if pin.pins(m) {
                map.insert(m.clone(), MomentRef::Zero);
                continue;
            }
            if map.contains_key(m) {
                continue;
            }
            let c = m.conjugate_in(mode);
            if c == *m {
                map.insert(m.clone(), MomentRef::Real(num_vars));
                num_vars += 1;
            } else if real_values {
                // conjugate pair shares one real value
                map.insert(m.clone(), MomentRef::Real(num_vars));
                map.insert(c, MomentRef::Real(num_vars));
                num_vars += 1;
            } else {
                let (rep, other) = if *m < c { (m.clone(), c) } else { (c.clone(), m.clone()) };
                let re = num_vars;
                let im = num_vars + 1;
                num_vars += 2;
                map.insert(rep, MomentRef::Complex { re, im, conjugated: false });
                map.insert(other, MomentRef::Complex { re, im, conjugated: true });
            }
        }
        let one = Monomial::one(d1, d2);
        let unit_var = match map.get(&one) {
            Some(MomentRef::Real(v)) => *v,
            _ => {
                return Err(Error::InvalidRequest(
                    "functional table must contain the constant monomial".into(),
                ))
            }
        };
        Ok(FunctionalTable { mode, d1, d2, bound, pin, real_values, map, num_vars, unit_var })
    }

    /// Standard table over all monomials within the degree bound.
    pub fn build(
        d1: usize,
        d2: usize,
        mode: VarMode,
        bound: DegreeBound,
        pin: PinRule,
    ) -> Result<Self> {
        Self::build_with(d1, d2, mode, bound, pin, false)
    }

    pub fn build_with(
        d1: usize,
        d2: usize,
        mode: VarMode,
        bound: DegreeBound,
        pin: PinRule,
        real_values: bool,
    ) -> Result<Self> {
        let split = match bound {
            DegreeBound::Total(_) => None,
            DegreeBound::Split { x, y } => Some((x, y)),
        };
        let t = match bound {
            DegreeBound::Total(t) => t,
            DegreeBound::Split { .. } => 0,
        };
        let basis = crate::monomial::build_basis(d1, d2, t, mode, split)?;
        Self::from_monomials_with(d1, d2, mode, bound, pin, real_values, basis.items())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Variable id of `Re L(1)`, the objective of the rank programs.
    pub fn unit_var(&self) -> usize {
        self.unit_var
    }

    /// Resolve `L(m)`. Errors if `m` exceeds the table truncation.
    pub fn locate(&self, m: &Monomial) -> Result<MomentRef> {
        if self.pin.pins(m) {
            return Ok(MomentRef::Zero);
        }
        self.map.get(m).copied().ok_or_else(|| {
            Error::DegreeBound(format!("monomial {} outside table truncation", m))
        })
    }

    /// Iterate `(monomial, reference)` pairs in no particular order.
    pub fn entries(&self) -> impl Iterator<Item = (&Monomial, &MomentRef)> {
        self.map.iter()
    }
}

/// Sparse real-linear expression `constant + Σ coef · var`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr<T> {
    pub terms: Vec<(usize, T)>,
    pub constant: T,
}

impl<T: Scalar> Default for LinExpr<T> {
    fn default() -> Self {
        LinExpr { terms: Vec::new(), constant: T::zero() }
    }
}

impl<T: Scalar> LinExpr<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: T) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn add_term(&mut self, var: usize, coef: T) {
        if coef != T::zero() {
            self.terms.push((var, coef));
        }
    }

    pub fn add_assign(&mut self, other: &LinExpr<T>) {
        self.constant += other.constant;
        self.terms.extend_from_slice(&other.terms);
    }

    pub fn is_zero(&self) -> bool {
        self.constant == T::zero() && self.terms.iter().all(|(_, c)| *c == T::zero())
    }

    /// Merge duplicate variables and drop explicit zeros; sorts by id.
    pub fn normalize(&mut self) {
        self.terms.sort_by_key(|(v, _)| *v);
        let mut out: Vec<(usize, T)> = Vec::with_capacity(self.terms.len());
        for &(v, c) in &self.terms {
            match out.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|(_, c)| *c != T::zero());
        self.terms = out;
    }

    pub fn eval(&self, x: &[T]) -> T {
        let mut acc = self.constant;
        for &(v, c) in &self.terms {
            acc += c * x[v];
        }
        acc
    }
}

/// Complex-valued linear expression over the real decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExprC<T> {
    pub re: LinExpr<T>,
    pub im: LinExpr<T>,
}

impl<T: Scalar> Default for LinExprC<T> {
    fn default() -> Self {
        LinExprC { re: LinExpr::zero(), im: LinExpr::zero() }
    }
}

impl<T: Scalar> LinExprC<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_assign(&mut self, other: &LinExprC<T>) {
        self.re.add_assign(&other.re);
        self.im.add_assign(&other.im);
    }

    pub fn conj(&self) -> Self {
        let mut im = self.im.clone();
        for (_, c) in &mut im.terms {
            *c = -*c;
        }
        im.constant = -im.constant;
        LinExprC { re: self.re.clone(), im }
    }

    pub fn normalize(&mut self) {
        self.re.normalize();
        self.im.normalize();
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn eval(&self, x: &[T]) -> Complex<T> {
        Complex::new(self.re.eval(x), self.im.eval(x))
    }
}

impl FunctionalTable {
    /// The expression for `coef * L(m)`.
    pub fn moment_term<T: Scalar>(&self, coef: Complex<T>, m: &Monomial) -> Result<LinExprC<T>> {
        let mut out = LinExprC::zero();
        self.accumulate(&mut out, coef, m)?;
        Ok(out)
    }

    /// Accumulate `coef * L(m)` into `acc`.
    ///
    /// With `L(m) = re + i*s*im` (`s = -1` for a conjugated reference):
    /// real part `Re(coef)*re - s*Im(coef)*im`, imaginary part
    /// `Im(coef)*re + s*Re(coef)*im`.
    pub fn accumulate<T: Scalar>(
        &self,
        acc: &mut LinExprC<T>,
        coef: Complex<T>,
        m: &Monomial,
    ) -> Result<()> {
        match self.locate(m)? {
            MomentRef::Zero => {}
            MomentRef::Real(v) => {
                acc.re.add_term(v, coef.re);
                acc.im.add_term(v, coef.im);
            }
            MomentRef::Complex { re, im, conjugated } => {
                let s = if conjugated { -T::one() } else { T::one() };
                acc.re.add_term(re, coef.re);
                acc.re.add_term(im, -s * coef.im);
                acc.im.add_term(re, coef.im);
                acc.im.add_term(im, s * coef.re);
            }
        }
        Ok(())
    }

    /// Evaluate canonical moment values from a decision-variable vector.
    pub fn moment_value<T: Scalar>(&self, x: &[T], m: &Monomial) -> Result<Complex<T>> {
        Ok(self.moment_term(Complex::new(T::one(), T::zero()), m)?.eval(x))
    }

    /// Assign each variable the value it takes for the evaluation functional
    /// at `(a, b)` (used by the feasibility oracles): `var(re_m) = Re m(a,b)`,
    /// `var(im_m) = Im m(a,b)` on representatives.
    pub fn evaluation_point<T: Scalar>(
        &self,
        a: &[Complex<T>],
        b: &[Complex<T>],
    ) -> Vec<T> {
        let mut x = vec![T::zero(); self.num_vars];
        for (m, r) in self.map.iter() {
            match *r {
                MomentRef::Real(v) => x[v] = m.eval(a, b).re,
                MomentRef::Complex { re, im, conjugated: false } => {
                    let val = m.eval(a, b);
                    x[re] = val.re;
                    x[im] = val.im;
                }
                _ => {}
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn complex_table_pins_unbalanced() {
        let t = FunctionalTable::build(2, 2, VarMode::Complex, DegreeBound::Total(2), PinRule::Balance)
            .unwrap();
        let x1 = Monomial::x(2, 2, 0);
        assert_eq!(t.locate(&x1).unwrap(), MomentRef::Zero);
        let m = Monomial::x_abs2(2, 2, 0, VarMode::Complex);
        assert!(matches!(t.locate(&m).unwrap(), MomentRef::Real(_)));
        // x1 x~2 and x2 x~1 share one re/im pair
        let a = Monomial::x(2, 2, 0).multiply(&Monomial::x_conj(2, 2, 1));
        let b = a.conjugate();
        match (t.locate(&a).unwrap(), t.locate(&b).unwrap()) {
            (
                MomentRef::Complex { re: r1, im: i1, conjugated: c1 },
                MomentRef::Complex { re: r2, im: i2, conjugated: c2 },
            ) => {
                assert_eq!((r1, i1), (r2, i2));
                assert_ne!(c1, c2);
            }
            other => panic!("unexpected refs {:?}", other),
        }
    }

    #[test]
    fn real_table_pins_odd_parities() {
        let t =
            FunctionalTable::build(2, 2, VarMode::Real, DegreeBound::Total(2), PinRule::Parity)
                .unwrap();
        assert_eq!(t.locate(&Monomial::x(2, 2, 0)).unwrap(), MomentRef::Zero);
        let xy = Monomial::x(2, 2, 0).multiply(&Monomial::y(2, 2, 1));
        assert_eq!(t.locate(&xy).unwrap(), MomentRef::Zero);
        let x2 = Monomial::x_abs2(2, 2, 0, VarMode::Real);
        assert!(matches!(t.locate(&x2).unwrap(), MomentRef::Real(_)));
        // every allocated variable is real in real mode
        assert!(t.entries().all(|(_, r)| !matches!(r, MomentRef::Complex { .. })));
    }

    #[test]
    fn hermitian_convention_roundtrip() {
        let t = FunctionalTable::build(2, 2, VarMode::Complex, DegreeBound::Total(2), PinRule::Balance)
            .unwrap();
        let m = Monomial::x(2, 2, 0).multiply(&Monomial::x_conj(2, 2, 1));
        let e = t.moment_term(Complex64::new(1.0, 0.0), &m).unwrap();
        let ec = t.moment_term(Complex64::new(1.0, 0.0), &m.conjugate()).unwrap();
        // L(conj m) = conj L(m) as expressions
        assert_eq!(e.conj(), ec);
        // scaling by i rotates parts
        let ei = t.moment_term(Complex64::new(0.0, 1.0), &m).unwrap();
        assert_eq!(ei.re, e.conj().im);
    }

    #[test]
    fn evaluation_point_consistency() {
        let t = FunctionalTable::build(2, 2, VarMode::Complex, DegreeBound::Total(4), PinRule::Balance)
            .unwrap();
        let a = [Complex64::new(0.3, -0.4), Complex64::new(0.1, 0.9)];
        let b = [Complex64::new(-0.2, 0.5), Complex64::new(0.8, 0.0)];
        let x = t.evaluation_point(&a, &b);
        let m = Monomial::state_entry(2, 2, 0, 1, 1, 0, VarMode::Complex);
        let got = t.moment_value(&x, &m).unwrap();
        let want = m.eval(&a, &b);
        assert!((got - want).norm() < 1e-12);
    }
}
