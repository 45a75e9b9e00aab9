//! Canonical monomial indexing for the bipartite variables `x, x̄, y, ȳ`,
//! truncated bases, and the sign-symmetry block partitions.
//!
//! A monomial is stored as four exponent vectors `(α, α′, β, β′)` in
//! commutative normal form. In real mode the conjugate vectors `α′, β′` are
//! identically zero. The canonical ordering everywhere is graded
//! lexicographic: total degree first, then lexicographic on the concatenated
//! exponent vectors, which pins down reproducible matrix layouts.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Variable regime: complex variables with conjugates, or plain real ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMode {
    Complex,
    Real,
}

/// Exponent type. Degrees in this artifact never exceed ~8.
pub type Exp = u8;

/// Commutative monomial `x^α x̄^{α′} y^β ȳ^{β′}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub alpha: Vec<Exp>,
    pub alpha_c: Vec<Exp>,
    pub beta: Vec<Exp>,
    pub beta_c: Vec<Exp>,
}

impl Monomial {
    /// The constant monomial 1.
    pub fn one(d1: usize, d2: usize) -> Self {
        Monomial {
            alpha: vec![0; d1],
            alpha_c: vec![0; d1],
            beta: vec![0; d2],
            beta_c: vec![0; d2],
        }
    }

    pub fn x(d1: usize, d2: usize, i: usize) -> Self {
        let mut m = Self::one(d1, d2);
        m.alpha[i] = 1;
        m
    }

    pub fn x_conj(d1: usize, d2: usize, i: usize) -> Self {
        let mut m = Self::one(d1, d2);
        m.alpha_c[i] = 1;
        m
    }

    pub fn y(d1: usize, d2: usize, j: usize) -> Self {
        let mut m = Self::one(d1, d2);
        m.beta[j] = 1;
        m
    }

    pub fn y_conj(d1: usize, d2: usize, j: usize) -> Self {
        let mut m = Self::one(d1, d2);
        m.beta_c[j] = 1;
        m
    }

    /// `x_i x̄_i` (complex) or `x_i²` (real mode uses `alpha` only).
    pub fn x_abs2(d1: usize, d2: usize, i: usize, mode: VarMode) -> Self {
        let mut m = Self::one(d1, d2);
        match mode {
            VarMode::Complex => {
                m.alpha[i] = 1;
                m.alpha_c[i] = 1;
            }
            VarMode::Real => m.alpha[i] = 2,
        }
        m
    }

    pub fn y_abs2(d1: usize, d2: usize, j: usize, mode: VarMode) -> Self {
        let mut m = Self::one(d1, d2);
        match mode {
            VarMode::Complex => {
                m.beta[j] = 1;
                m.beta_c[j] = 1;
            }
            VarMode::Real => m.beta[j] = 2,
        }
        m
    }

    /// `x_i x̄_{i′} y_j ȳ_{j′}` (complex) or `x_i x_{i′} y_j y_{j′}` (real):
    /// the monomial whose moment is the state entry `ρ_{ij,i′j′}`.
    pub fn state_entry(
        d1: usize,
        d2: usize,
        i: usize,
        ip: usize,
        j: usize,
        jp: usize,
        mode: VarMode,
    ) -> Self {
        let mut m = Self::one(d1, d2);
        match mode {
            VarMode::Complex => {
                m.alpha[i] += 1;
                m.alpha_c[ip] += 1;
                m.beta[j] += 1;
                m.beta_c[jp] += 1;
            }
            VarMode::Real => {
                m.alpha[i] += 1;
                m.alpha[ip] += 1;
                m.beta[j] += 1;
                m.beta[jp] += 1;
            }
        }
        m
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.alpha.len(), self.beta.len())
    }

    pub fn degree(&self) -> usize {
        self.x_degree() + self.y_degree()
    }

    /// Total degree in the `x, x̄` variables, `|α| + |α′|`.
    pub fn x_degree(&self) -> usize {
        vec_sum(&self.alpha) + vec_sum(&self.alpha_c)
    }

    pub fn y_degree(&self) -> usize {
        vec_sum(&self.beta) + vec_sum(&self.beta_c)
    }

    /// Sign-symmetry label `(r, s) = (|α| − |α′|, |β| − |β′|)`.
    pub fn balance(&self) -> (i32, i32) {
        (
            vec_sum(&self.alpha) as i32 - vec_sum(&self.alpha_c) as i32,
            vec_sum(&self.beta) as i32 - vec_sum(&self.beta_c) as i32,
        )
    }

    /// Parity label `(|α| mod 2, |β| mod 2)` for the real variant.
    pub fn parity(&self) -> (u8, u8) {
        ((vec_sum(&self.alpha) % 2) as u8, (vec_sum(&self.beta) % 2) as u8)
    }

    /// Whether `|α| = |α′|` and `|β| = |β′|`.
    pub fn is_balanced(&self) -> bool {
        self.balance() == (0, 0)
    }

    /// Exponentwise product.
    pub fn multiply(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.dims(), other.dims());
        Monomial {
            alpha: vec_add(&self.alpha, &other.alpha),
            alpha_c: vec_add(&self.alpha_c, &other.alpha_c),
            beta: vec_add(&self.beta, &other.beta),
            beta_c: vec_add(&self.beta_c, &other.beta_c),
        }
    }

    /// Complex conjugation swaps `α ↔ α′` and `β ↔ β′`.
    pub fn conjugate(&self) -> Monomial {
        Monomial {
            alpha: self.alpha_c.clone(),
            alpha_c: self.alpha.clone(),
            beta: self.beta_c.clone(),
            beta_c: self.beta.clone(),
        }
    }

    /// Mode-aware conjugation: the complex involution, or a no-op on real
    /// monomials (conjugation does nothing over `R[x, y]`).
    pub fn conjugate_in(&self, mode: VarMode) -> Monomial {
        match mode {
            VarMode::Complex => self.conjugate(),
            VarMode::Real => self.clone(),
        }
    }

    pub fn is_self_conjugate(&self) -> bool {
        self.alpha == self.alpha_c && self.beta == self.beta_c
    }

    /// Evaluate at a point `(a, b)`, with conjugate variables bound to the
    /// conjugated coordinates. Used by the evaluation-consistency oracles.
    pub fn eval<T: crate::Scalar>(
        &self,
        a: &[num_complex::Complex<T>],
        b: &[num_complex::Complex<T>],
    ) -> num_complex::Complex<T> {
        let mut v = num_complex::Complex::new(T::one(), T::zero());
        for (i, &e) in self.alpha.iter().enumerate() {
            for _ in 0..e {
                v *= a[i];
            }
        }
        for (i, &e) in self.alpha_c.iter().enumerate() {
            for _ in 0..e {
                v *= a[i].conj();
            }
        }
        for (j, &e) in self.beta.iter().enumerate() {
            for _ in 0..e {
                v *= b[j];
            }
        }
        for (j, &e) in self.beta_c.iter().enumerate() {
            for _ in 0..e {
                v *= b[j].conj();
            }
        }
        v
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.alpha.cmp(&other.alpha))
            .then_with(|| self.alpha_c.cmp(&other.alpha_c))
            .then_with(|| self.beta.cmp(&other.beta))
            .then_with(|| self.beta_c.cmp(&other.beta_c))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut push = |sym: &str, idx: usize, e: Exp| {
            if e == 1 {
                parts.push(format!("{}{}", sym, idx + 1));
            } else if e > 1 {
                parts.push(format!("{}{}^{}", sym, idx + 1, e));
            }
        };
        for (i, &e) in self.alpha.iter().enumerate() {
            push("x", i, e);
        }
        for (i, &e) in self.alpha_c.iter().enumerate() {
            push("x~", i, e);
        }
        for (j, &e) in self.beta.iter().enumerate() {
            push("y", j, e);
        }
        for (j, &e) in self.beta_c.iter().enumerate() {
            push("y~", j, e);
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

fn vec_sum(v: &[Exp]) -> usize {
    v.iter().map(|&e| e as usize).sum()
}

fn vec_add(a: &[Exp], b: &[Exp]) -> Vec<Exp> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

/// Degree truncation: a single total-degree bound, or separate bounds on the
/// `x`- and `y`-degrees (the split regime of the DPS sets `R_{k,t}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeBound {
    Total(usize),
    Split { x: usize, y: usize },
}

impl DegreeBound {
    pub fn admits(&self, m: &Monomial) -> bool {
        match *self {
            DegreeBound::Total(t) => m.degree() <= t,
            DegreeBound::Split { x, y } => m.x_degree() <= x && m.y_degree() <= y,
        }
    }
}

/// Ordered set of all monomials within a degree bound, with index lookup.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    pub d1: usize,
    pub d2: usize,
    pub mode: VarMode,
    pub bound: DegreeBound,
    items: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl TruncatedBasis {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.items[i]
    }

    pub fn items(&self) -> &[Monomial] {
        &self.items
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// Build the truncated monomial basis in graded-lex order.
///
/// For `mode = Complex` the variables are `x, x̄, y, ȳ` (so `n = 2(d1+d2)`
/// symbols); for `Real` only `x, y`. `split_degrees = Some((k, t))` truncates
/// the `x`-degree at `k` and the `y`-degree at `t` instead of the total.
pub fn build_basis(
    d1: usize,
    d2: usize,
    t: usize,
    mode: VarMode,
    split_degrees: Option<(usize, usize)>,
) -> Result<TruncatedBasis> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::DimensionMismatch("local dimensions must be >= 1".into()));
    }
    let bound = match split_degrees {
        Some((k, ty)) => DegreeBound::Split { x: k, y: ty },
        None => DegreeBound::Total(t),
    };
    let (max_x, max_y) = match bound {
        DegreeBound::Total(t) => (t, t),
        DegreeBound::Split { x, y } => (x, y),
    };
    let mut items = Vec::new();
    for (dx, dxc) in degree_splits(max_x, mode) {
        let rem_y = match bound {
            DegreeBound::Total(t) => {
                if dx + dxc > t {
                    continue;
                }
                (t - dx - dxc).min(max_y)
            }
            DegreeBound::Split { y, .. } => y,
        };
        let alphas = exponent_vectors(d1, dx);
        let alpha_cs = exponent_vectors(d1, dxc);
        for (dy, dyc) in degree_splits(rem_y, mode) {
            let betas = exponent_vectors(d2, dy);
            let beta_cs = exponent_vectors(d2, dyc);
            for alpha in &alphas {
                for alpha_c in &alpha_cs {
                    for beta in &betas {
                        for beta_c in &beta_cs {
                            items.push(Monomial {
                                alpha: alpha.clone(),
                                alpha_c: alpha_c.clone(),
                                beta: beta.clone(),
                                beta_c: beta_c.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    items.sort();
    items.dedup();
    let index = items
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    Ok(TruncatedBasis { d1, d2, mode, bound, items, index })
}

/// All `(deg, deg_conj)` splits of degrees up to `max` for the given mode.
fn degree_splits(max: usize, mode: VarMode) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in 0..=max {
        match mode {
            VarMode::Complex => {
                for d in 0..=total {
                    out.push((d, total - d));
                }
            }
            VarMode::Real => out.push((total, 0)),
        }
    }
    out
}

/// All nonnegative integer vectors of length `d` summing to exactly `deg`.
pub(crate) fn exponent_vectors(d: usize, deg: usize) -> Vec<Vec<Exp>> {
    let mut out = Vec::new();
    let mut cur = vec![0 as Exp; d];
    fn rec(out: &mut Vec<Vec<Exp>>, cur: &mut Vec<Exp>, pos: usize, rem: usize) {
        if pos + 1 == cur.len() {
            cur[pos] = rem as Exp;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        for k in 0..=rem {
            cur[pos] = k as Exp;
            rec(out, cur, pos + 1, rem - k);
        }
        cur[pos] = 0;
    }
    if d == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut out, &mut cur, 0, deg);
    out
}

/// Label of a sign-symmetry block: balance pair `(r, s)` in complex mode,
/// parity pair in real mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockLabel {
    Balance(i32, i32),
    Parity(u8, u8),
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockLabel::Balance(r, s) => write!(f, "({},{})", r, s),
            BlockLabel::Parity(a, b) => write!(f, "parity({},{})", a, b),
        }
    }
}

impl BlockLabel {
    /// Label of the conjugate block. The moment matrix restricted to
    /// `(-r,-s)` is the entrywise conjugate of the `(r,s)` block, so a solver
    /// needs only one of the pair.
    pub fn conjugate(&self) -> BlockLabel {
        match *self {
            BlockLabel::Balance(r, s) => BlockLabel::Balance(-r, -s),
            p @ BlockLabel::Parity(_, _) => p,
        }
    }

    /// Canonical representative among `{self, self.conjugate()}`.
    pub fn is_conjugate_representative(&self) -> bool {
        self <= &self.conjugate()
    }
}

/// Partition of a basis into sign-symmetry blocks; empty blocks are omitted.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub blocks: Vec<(BlockLabel, Vec<usize>)>,
}

impl BlockPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn total_indices(&self) -> usize {
        self.blocks.iter().map(|(_, ix)| ix.len()).sum()
    }
}

/// Partition a basis by balance `(r,s)` (complex) or parity (real).
pub fn partition_blocks(basis: &TruncatedBasis) -> BlockPartition {
    let mut map: HashMap<BlockLabel, Vec<usize>> = HashMap::new();
    for (i, m) in basis.items().iter().enumerate() {
        let label = match basis.mode {
            VarMode::Complex => {
                let (r, s) = m.balance();
                BlockLabel::Balance(r, s)
            }
            VarMode::Real => {
                let (a, b) = m.parity();
                BlockLabel::Parity(a, b)
            }
        };
        map.entry(label).or_default().push(i);
    }
    let mut blocks: Vec<_> = map.into_iter().collect();
    blocks.sort_by_key(|(l, _)| *l);
    BlockPartition { blocks }
}

/// The exact-degree index set `I^{=k,=t}_{r,s}`: monomials with
/// `|α+α′| = k`, `|β+β′| = t`, `|α|−|α′| = r`, `|β|−|β′| = s`, in canonical
/// order. Empty when the parity conditions `r ≡ k`, `s ≡ t (mod 2)` fail.
pub fn homogeneous_monomials(
    k: usize,
    t: usize,
    r: i32,
    s: i32,
    d1: usize,
    d2: usize,
) -> Vec<Monomial> {
    let ki = k as i32;
    let ti = t as i32;
    if r.abs() > ki || s.abs() > ti || (r - ki).rem_euclid(2) != 0 || (s - ti).rem_euclid(2) != 0 {
        return Vec::new();
    }
    let da = ((ki + r) / 2) as usize;
    let dac = ((ki - r) / 2) as usize;
    let db = ((ti + s) / 2) as usize;
    let dbc = ((ti - s) / 2) as usize;
    let mut out = Vec::new();
    for alpha in exponent_vectors(d1, da) {
        for alpha_c in exponent_vectors(d1, dac) {
            for beta in exponent_vectors(d2, db) {
                for beta_c in exponent_vectors(d2, dbc) {
                    out.push(Monomial {
                        alpha: alpha.clone(),
                        alpha_c: alpha_c.clone(),
                        beta: beta.clone(),
                        beta_c,
                    });
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_sizes_match_table() {
        assert_eq!(build_basis(3, 3, 3, VarMode::Complex, None).unwrap().len(), 455);
        assert_eq!(build_basis(3, 3, 2, VarMode::Complex, None).unwrap().len(), 91);
        assert_eq!(build_basis(2, 2, 1, VarMode::Real, None).unwrap().len(), 5);
    }

    #[test]
    fn basis_sizes_match_binomial_count() {
        fn binom(n: usize, k: usize) -> usize {
            let mut r = 1usize;
            for i in 0..k {
                r = r * (n - i) / (i + 1);
            }
            r
        }
        for d in 1..=4 {
            for t in 0..=4 {
                let n_c = 2 * (d + d);
                let b = build_basis(d, d, t, VarMode::Complex, None).unwrap();
                assert_eq!(b.len(), binom(n_c + t, t), "complex d={} t={}", d, t);
                let n_r = d + d;
                let b = build_basis(d, d, t, VarMode::Real, None).unwrap();
                assert_eq!(b.len(), binom(n_r + t, t), "real d={} t={}", d, t);
            }
        }
    }

    #[test]
    fn multiply_and_conjugate_examples() {
        let x1 = Monomial::x(2, 2, 0);
        let x1c = Monomial::x_conj(2, 2, 0);
        let m = x1.multiply(&x1c);
        assert_eq!(m, Monomial::x_abs2(2, 2, 0, VarMode::Complex));
        let one = Monomial::one(2, 2);
        assert_eq!(m.multiply(&one), m);
        assert_eq!(x1.conjugate(), x1c);
        assert_eq!(one.conjugate(), one);
        // x1 x~2 y1 -> x2 x~1 y~1
        let m = Monomial {
            alpha: vec![1, 0],
            alpha_c: vec![0, 1],
            beta: vec![1, 0],
            beta_c: vec![0, 0],
        };
        let c = m.conjugate();
        assert_eq!(c.alpha, vec![0, 1]);
        assert_eq!(c.alpha_c, vec![1, 0]);
        assert_eq!(c.beta, vec![0, 0]);
        assert_eq!(c.beta_c, vec![1, 0]);
    }

    #[test]
    fn partition_counts_match_table() {
        let b3 = build_basis(3, 3, 3, VarMode::Complex, None).unwrap();
        assert_eq!(partition_blocks(&b3).len(), 25);
        let b2 = build_basis(3, 3, 2, VarMode::Complex, None).unwrap();
        assert_eq!(partition_blocks(&b2).len(), 13);
        let b1 = build_basis(3, 3, 1, VarMode::Complex, None).unwrap();
        assert_eq!(partition_blocks(&b1).len(), 5);
        let br = build_basis(2, 3, 2, VarMode::Real, None).unwrap();
        assert_eq!(partition_blocks(&br).len(), 4);
    }

    #[test]
    fn partition_covers_basis() {
        for (d1, d2, t) in [(2, 2, 2), (2, 3, 2), (3, 3, 3)] {
            let b = build_basis(d1, d2, t, VarMode::Complex, None).unwrap();
            let p = partition_blocks(&b);
            assert_eq!(p.total_indices(), b.len());
            let mut seen = vec![false; b.len()];
            for (_, ix) in &p.blocks {
                for &i in ix {
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
        }
    }

    #[test]
    fn homogeneous_index_examples() {
        assert_eq!(homogeneous_monomials(1, 1, 1, 1, 2, 2).len(), 4);
        assert_eq!(homogeneous_monomials(1, 1, 0, 0, 2, 2).len(), 0);
        assert_eq!(homogeneous_monomials(1, 2, 1, 0, 2, 2).len(), 8);
    }

    #[test]
    fn split_basis_is_product_truncated() {
        let b = build_basis(2, 2, 0, VarMode::Complex, Some((2, 4))).unwrap();
        for m in b.items() {
            assert!(m.x_degree() <= 2 && m.y_degree() <= 4);
        }
        // split truncation admits monomials the total bound would reject
        assert!(b.items().iter().any(|m| m.degree() == 6));
    }

    fn arb_monomial(d1: usize, d2: usize, max: Exp) -> impl Strategy<Value = Monomial> {
        let e = 0..=max;
        (
            proptest::collection::vec(e.clone(), d1),
            proptest::collection::vec(e.clone(), d1),
            proptest::collection::vec(e.clone(), d2),
            proptest::collection::vec(e, d2),
        )
            .prop_map(|(alpha, alpha_c, beta, beta_c)| Monomial { alpha, alpha_c, beta, beta_c })
    }

    proptest! {
        #[test]
        fn multiply_commutative_associative(
            a in arb_monomial(2, 3, 2),
            b in arb_monomial(2, 3, 2),
            c in arb_monomial(2, 3, 2),
        ) {
            prop_assert_eq!(a.multiply(&b), b.multiply(&a));
            prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
        }

        #[test]
        fn conjugate_is_homomorphic_involution(
            a in arb_monomial(2, 3, 2),
            b in arb_monomial(2, 3, 2),
        ) {
            prop_assert_eq!(a.conjugate().conjugate(), a.clone());
            prop_assert_eq!(
                a.multiply(&b).conjugate(),
                a.conjugate().multiply(&b.conjugate())
            );
        }

        #[test]
        fn product_balance_subtracts(
            a in arb_monomial(2, 2, 2),
            b in arb_monomial(2, 2, 2),
        ) {
            // m * conj(m') has balance (r - r', s - s')
            let (ra, sa) = a.balance();
            let (rb, sb) = b.balance();
            let p = a.multiply(&b.conjugate());
            prop_assert_eq!(p.balance(), (ra - rb, sa - sb));
        }
    }
}
