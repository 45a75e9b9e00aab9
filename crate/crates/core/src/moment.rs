//! Symbolic assembly of moment matrices, scalar localizing matrices, the
//! polynomial-matrix localizing blocks, and the cp-rank constraint families.
//!
//! Every builder produces a [`SymbolicMatrix`]: a Hermitian matrix whose
//! entries are sparse linear expressions in the functional variables. Blocks
//! are selected by passing the index subset of a sign-symmetry class.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::functional::{FunctionalTable, LinExprC};
use crate::hermitian::HermitianState;
use crate::monomial::{Monomial, TruncatedBasis, VarMode};
use crate::scalar::Scalar;

/// Hermitian symbolic matrix; only the upper triangle is stored, the lower
/// one is the entrywise conjugate.
#[derive(Debug, Clone)]
pub struct SymbolicMatrix<T> {
    dim: usize,
    /// Upper triangle, row-major: entry `(i, j)` with `i <= j` at
    /// `i*dim - i(i-1)/2 + (j-i)`.
    entries: Vec<LinExprC<T>>,
}

impl<T: Scalar> SymbolicMatrix<T> {
    pub fn new(dim: usize) -> Self {
        let n = dim * (dim + 1) / 2;
        SymbolicMatrix { dim, entries: vec![LinExprC::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn tri_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.dim);
        i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut LinExprC<T> {
        let k = self.tri_index(i, j);
        &mut self.entries[k]
    }

    /// Entry `(i, j)`; for `i > j` the conjugate of the stored `(j, i)`.
    pub fn entry(&self, i: usize, j: usize) -> LinExprC<T> {
        if i <= j {
            self.entries[self.tri_index(i, j)].clone()
        } else {
            self.entries[self.tri_index(j, i)].conj()
        }
    }

    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, &LinExprC<T>)> {
        (0..self.dim).flat_map(move |i| {
            (i..self.dim).map(move |j| (i, j, &self.entries[self.tri_index(i, j)]))
        })
    }

    pub fn normalize(&mut self) {
        for e in &mut self.entries {
            e.normalize();
        }
    }

    /// True when no entry carries imaginary content, i.e. the matrix is a
    /// real symmetric symbolic object (real-mode programs).
    pub fn is_symbolically_real(&self) -> bool {
        self.entries.iter().all(|e| e.is_real())
    }

    /// Evaluate at a decision-variable vector into a dense complex matrix.
    pub fn eval(&self, x: &[T]) -> crate::hermitian::ComplexMatrix<T> {
        let mut out = crate::hermitian::ComplexMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.entries[self.tri_index(i, j)].eval(x);
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }
}

/// Hermitian localizing polynomial: sparse monomial/coefficient pairs.
#[derive(Debug, Clone)]
pub struct LocalizingPoly<T> {
    pub label: String,
    pub terms: Vec<(Complex<T>, Monomial)>,
}

impl<T: Scalar> LocalizingPoly<T> {
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, m)| m.degree()).max().unwrap_or(0)
    }

    pub fn negated(&self, label: &str) -> Self {
        LocalizingPoly {
            label: label.to_string(),
            terms: self.terms.iter().map(|(c, m)| (-*c, m.clone())).collect(),
        }
    }
}

/// Scaling regime for the feasible set of the separable-rank programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// `‖x‖∞², ‖y‖∞² ≤ √ρ_max`: polynomials `√ρ_max − x_i x̄_i`, `√ρ_max − y_j ȳ_j`.
    S1,
    /// `‖x‖² = ‖y‖² ≤ √Tr ρ`: `±(‖x‖² − ‖y‖²)` and `√Tr ρ − ‖y‖²`.
    S2,
    /// `‖x‖² ≤ Tr ρ, ‖y‖² = 1`: `Tr ρ − ‖x‖²` and `±(1 − ‖y‖²)`.
    S3,
}

impl std::str::FromStr for Scaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Scaling::S1),
            "s2" => Ok(Scaling::S2),
            "s3" => Ok(Scaling::S3),
            other => Err(Error::Parse(format!("unknown scaling {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scaling::S1 => write!(f, "s1"),
            Scaling::S2 => write!(f, "s2"),
            Scaling::S3 => write!(f, "s3"),
        }
    }
}

/// The localizing polynomials of a scaling regime. `one_sided` entries get a
/// single localizer; `equalities` are the `±` pairs, encoded per caller
/// choice as two one-sided localizers or as linear rows on moments.
#[derive(Debug, Clone)]
pub struct ScalingSet<T> {
    pub tag: Scaling,
    pub one_sided: Vec<LocalizingPoly<T>>,
    pub equalities: Vec<LocalizingPoly<T>>,
}

impl<T: Scalar> ScalingSet<T> {
    /// Build the scaling set for a state. Constants `√ρ_max`, `√Tr ρ` are
    /// computed once here so every block sees identical values.
    pub fn for_state(tag: Scaling, state: &HermitianState<T>, mode: VarMode) -> Self {
        let (d1, d2) = (state.d1, state.d2);
        let one = Monomial::one(d1, d2);
        let cplx = |x: T| Complex::new(x, T::zero());
        let neg_one = -Complex::new(T::one(), T::zero());
        let norm_x = |_: ()| -> Vec<(Complex<T>, Monomial)> {
            (0..d1).map(|i| (neg_one, Monomial::x_abs2(d1, d2, i, mode))).collect()
        };
        let norm_y = |_: ()| -> Vec<(Complex<T>, Monomial)> {
            (0..d2).map(|j| (neg_one, Monomial::y_abs2(d1, d2, j, mode))).collect()
        };
        match tag {
            Scaling::S1 => {
                let c = state.rho_max().sqrt();
                let mut polys = Vec::new();
                for i in 0..d1 {
                    polys.push(LocalizingPoly {
                        label: format!("sqrt_rho_max - |x{}|^2", i + 1),
                        terms: vec![
                            (cplx(c), one.clone()),
                            (neg_one, Monomial::x_abs2(d1, d2, i, mode)),
                        ],
                    });
                }
                for j in 0..d2 {
                    polys.push(LocalizingPoly {
                        label: format!("sqrt_rho_max - |y{}|^2", j + 1),
                        terms: vec![
                            (cplx(c), one.clone()),
                            (neg_one, Monomial::y_abs2(d1, d2, j, mode)),
                        ],
                    });
                }
                ScalingSet { tag, one_sided: polys, equalities: Vec::new() }
            }
            Scaling::S2 => {
                let c = state.trace().sqrt();
                let mut eq_terms: Vec<(Complex<T>, Monomial)> = Vec::new();
                for (coef, m) in norm_x(()) {
                    eq_terms.push((-coef, m));
                }
                eq_terms.extend(norm_y(()));
                let eq = LocalizingPoly { label: "|x|^2 - |y|^2".into(), terms: eq_terms };
                let mut bound_terms = vec![(cplx(c), one.clone())];
                bound_terms.extend(norm_y(()));
                let bound =
                    LocalizingPoly { label: "sqrt_trace - |y|^2".into(), terms: bound_terms };
                ScalingSet { tag, one_sided: vec![bound], equalities: vec![eq] }
            }
            Scaling::S3 => {
                let tr = state.trace();
                let mut xb = vec![(cplx(tr), one.clone())];
                xb.extend(norm_x(()));
                let xbound = LocalizingPoly { label: "trace - |x|^2".into(), terms: xb };
                let mut yb = vec![(cplx(T::one()), one.clone())];
                yb.extend(norm_y(()));
                let ybound = LocalizingPoly { label: "1 - |y|^2".into(), terms: yb };
                ScalingSet { tag, one_sided: vec![xbound], equalities: vec![ybound] }
            }
        }
    }
}

fn block_indices<'a>(basis: &'a TruncatedBasis, block: Option<&'a [usize]>) -> Vec<usize> {
    match block {
        Some(ix) => ix.to_vec(),
        None => (0..basis.len()).collect(),
    }
}

/// Moment matrix `M(L)` over `basis`, optionally restricted to a block:
/// entry `(m, m') = L(m · conj m')`.
pub fn moment_matrix<T: Scalar>(
    table: &FunctionalTable,
    basis: &TruncatedBasis,
    block: Option<&[usize]>,
) -> Result<SymbolicMatrix<T>> {
    let ix = block_indices(basis, block);
    let unit = Complex::new(T::one(), T::zero());
    let mut out = SymbolicMatrix::new(ix.len());
    for (p, &bi) in ix.iter().enumerate() {
        for (q, &bj) in ix.iter().enumerate().skip(p) {
            let m = basis.get(bi).multiply(&basis.get(bj).conjugate_in(basis.mode));
            let e = table.moment_term(unit, &m)?;
            *out.entry_mut(p, q) = e;
        }
    }
    out.normalize();
    Ok(out)
}

/// Localizing matrix `M(gL)`: entry `(m, m') = Σ_w g_w L(w · m · conj m')`.
pub fn localizing_matrix<T: Scalar>(
    table: &FunctionalTable,
    basis: &TruncatedBasis,
    poly: &LocalizingPoly<T>,
    block: Option<&[usize]>,
) -> Result<SymbolicMatrix<T>> {
    let ix = block_indices(basis, block);
    let mut out = SymbolicMatrix::new(ix.len());
    for (p, &bi) in ix.iter().enumerate() {
        for (q, &bj) in ix.iter().enumerate().skip(p) {
            let prod = basis.get(bi).multiply(&basis.get(bj).conjugate_in(basis.mode));
            let mut acc = LinExprC::zero();
            for (coef, w) in &poly.terms {
                table.accumulate(&mut acc, *coef, &w.multiply(&prod))?;
            }
            acc.normalize();
            *out.entry_mut(p, q) = acc;
        }
    }
    Ok(out)
}

/// Polynomial-matrix localizing block `M(G_ρ ⊗ L)` with
/// `G_ρ = ρ − xx* ⊗ yy*`, indexed by `(register pair, monomial)`:
/// entry `((ij, m), (i'j', m')) = ρ_{ij,i'j'} L(m conj m') − L(x_i x̄_{i'}
/// y_j ȳ_{j'} · m · conj m')`. In real mode conjugates become transposes.
pub fn matrix_localizer<T: Scalar>(
    table: &FunctionalTable,
    basis: &TruncatedBasis,
    state: &HermitianState<T>,
    block: Option<&[usize]>,
) -> Result<SymbolicMatrix<T>> {
    let (d1, d2) = (state.d1, state.d2);
    let regs = d1 * d2;
    let ix = block_indices(basis, block);
    let n = regs * ix.len();
    let mut out = SymbolicMatrix::new(n);
    let mode = table.mode;
    let neg_one = -Complex::new(T::one(), T::zero());
    for (row, &bi) in ix.iter().enumerate() {
        for (col, &bj) in ix.iter().enumerate() {
            // monomial part shared by all register pairs
            let prod = basis.get(bi).multiply(&basis.get(bj).conjugate_in(basis.mode));
            for ri in 0..regs {
                let r = ri * ix.len() + row;
                let (i, j) = (ri / d2, ri % d2);
                for rj in 0..regs {
                    let c = rj * ix.len() + col;
                    if r > c {
                        continue;
                    }
                    let (ip, jp) = (rj / d2, rj % d2);
                    let mut acc = LinExprC::zero();
                    table.accumulate(&mut acc, state.entry(i, j, ip, jp), &prod)?;
                    let quartic = Monomial::state_entry(d1, d2, i, ip, j, jp, mode);
                    table.accumulate(&mut acc, neg_one, &quartic.multiply(&prod))?;
                    acc.normalize();
                    *out.entry_mut(r, c) = acc;
                }
            }
        }
    }
    Ok(out)
}

/// The cp-rank constraint families over `R[x]` (single register, no
/// conjugates; the `y` slot of [`Monomial`] has dimension 1 and stays zero).
pub struct CpBlocks<T> {
    /// (a) localizers for `√(A_ii) x_i − x_i²` at order `t−1`.
    pub scaled_diag: Vec<(String, SymbolicMatrix<T>)>,
    /// (b) localizers for `A_ij − x_i x_j`, `i < j`, at order `t−1`.
    pub offdiag: Vec<(String, SymbolicMatrix<T>)>,
    /// (c) tensor constraints `A^{⊗ℓ} − L((xx^T)^{⊗ℓ}) ⪰ 0`, `ℓ ∈ [t]`.
    pub tensors: Vec<(String, SymbolicMatrix<T>)>,
    /// (d) strengthened block `M_{t−1}((A − xx^T) ⊗ L)`.
    pub strengthened: (String, SymbolicMatrix<T>),
}

/// Monomial `x_i` in the cp encoding (`d2 = 1` dummy register).
pub fn cp_x(d: usize, i: usize) -> Monomial {
    Monomial::x(d, 1, i)
}

/// Build the cp localizer families for a symmetric entrywise-nonnegative `A`.
pub fn cp_localizers<T: Scalar>(
    table: &FunctionalTable,
    a: &nalgebra::DMatrix<T>,
    t: usize,
    basis_tm1: &TruncatedBasis,
) -> Result<CpBlocks<T>> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::InvalidMatrix("cp matrix must be square".into()));
    }
    for i in 0..d {
        for j in 0..d {
            if (a[(i, j)] - a[(j, i)]).abs() > T::from64(1e-12) * (T::one() + a[(i, j)].abs()) {
                return Err(Error::InvalidMatrix("cp matrix must be symmetric".into()));
            }
            if a[(i, j)] < T::zero() {
                return Err(Error::InvalidMatrix(
                    "cp matrix must be entrywise nonnegative".into(),
                ));
            }
        }
    }
    if t < 2 {
        return Err(Error::InvalidRequest("cp bound needs level t >= 2".into()));
    }
    let unit = Complex::new(T::one(), T::zero());
    let one = Monomial::one(d, 1);

    let mut scaled_diag = Vec::new();
    for i in 0..d {
        let gi = LocalizingPoly {
            label: format!("sqrt(A{}{}) x{} - x{}^2", i + 1, i + 1, i + 1, i + 1),
            terms: vec![
                (Complex::new(a[(i, i)].sqrt(), T::zero()), cp_x(d, i)),
                (-unit, cp_x(d, i).multiply(&cp_x(d, i))),
            ],
        };
        scaled_diag.push((gi.label.clone(), localizing_matrix(table, basis_tm1, &gi, None)?));
    }

    let mut offdiag = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let gij = LocalizingPoly {
                label: format!("A{}{} - x{} x{}", i + 1, j + 1, i + 1, j + 1),
                terms: vec![
                    (Complex::new(a[(i, j)], T::zero()), one.clone()),
                    (-unit, cp_x(d, i).multiply(&cp_x(d, j))),
                ],
            };
            offdiag.push((gij.label.clone(), localizing_matrix(table, basis_tm1, &gij, None)?));
        }
    }

    // (c) tensor constraints: constant A^{⊗ℓ} minus the matrix of moments
    let mut tensors = Vec::new();
    for ell in 1..=t {
        let dim = d.pow(ell as u32);
        let mut m = SymbolicMatrix::new(dim);
        for r in 0..dim {
            for c in r..dim {
                let mut mono = one.clone();
                let mut aprod = T::one();
                let (mut rr, mut cc) = (r, c);
                for _ in 0..ell {
                    let (ri, ci) = (rr % d, cc % d);
                    rr /= d;
                    cc /= d;
                    aprod *= a[(ri, ci)];
                    mono = mono.multiply(&cp_x(d, ri)).multiply(&cp_x(d, ci));
                }
                let mut e = table.moment_term(-unit, &mono)?;
                e.re.constant += aprod;
                e.normalize();
                *m.entry_mut(r, c) = e;
            }
        }
        tensors.push((format!("A^(x{ell}) - L((xx^T)^(x{ell}))"), m));
    }

    // (d) M_{t-1}((A - xx^T) (x) L), indexed by (i, m)
    let n = d * basis_tm1.len();
    let mut strong = SymbolicMatrix::new(n);
    for i in 0..d {
        for (p, mi) in basis_tm1.items().iter().enumerate() {
            for ip in 0..d {
                for (q, mj) in basis_tm1.items().iter().enumerate() {
                    let r = i * basis_tm1.len() + p;
                    let c = ip * basis_tm1.len() + q;
                    if r > c {
                        continue;
                    }
                    let prod = mi.multiply(mj);
                    let mut acc = LinExprC::zero();
                    table.accumulate(&mut acc, Complex::new(a[(i, ip)], T::zero()), &prod)?;
                    table.accumulate(
                        &mut acc,
                        -unit,
                        &cp_x(d, i).multiply(&cp_x(d, ip)).multiply(&prod),
                    )?;
                    acc.normalize();
                    *strong.entry_mut(r, c) = acc;
                }
            }
        }
    }
    Ok(CpBlocks {
        scaled_diag,
        offdiag,
        tensors,
        strengthened: ("M_{t-1}((A - xx^T) (x) L)".into(), strong),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::PinRule;
    use crate::hermitian::builtin_state;
    use crate::monomial::{build_basis, partition_blocks, BlockLabel, DegreeBound};
    use num_complex::Complex64;

    fn table(d1: usize, d2: usize, t: usize) -> FunctionalTable {
        FunctionalTable::build(d1, d2, VarMode::Complex, DegreeBound::Total(2 * t), PinRule::Balance)
            .unwrap()
    }

    #[test]
    fn moment_matrix_sizes() {
        let tab = FunctionalTable::build(
            3,
            3,
            VarMode::Complex,
            DegreeBound::Total(6),
            PinRule::Balance,
        )
        .unwrap();
        let b3 = build_basis(3, 3, 3, VarMode::Complex, None).unwrap();
        let m = moment_matrix::<f64>(&tab, &b3, None).unwrap();
        assert_eq!(m.dim(), 455);

        let b0 = build_basis(3, 3, 0, VarMode::Complex, None).unwrap();
        let m0 = moment_matrix::<f64>(&tab, &b0, None).unwrap();
        assert_eq!(m0.dim(), 1);
        let e = m0.entry(0, 0);
        assert_eq!(e.re.terms.len(), 1);
        assert_eq!(e.re.terms[0].0, tab.unit_var());
    }

    #[test]
    fn block_zero_zero_of_t1_is_constant_only() {
        // d1=d2=2, t=1: the (0,0) block holds just the constant monomial
        let tab = table(2, 2, 1);
        let b1 = build_basis(2, 2, 1, VarMode::Complex, None).unwrap();
        let part = partition_blocks(&b1);
        let blk = part
            .blocks
            .iter()
            .find(|(l, _)| *l == BlockLabel::Balance(0, 0))
            .unwrap();
        assert_eq!(blk.1.len(), 1);
        let m = moment_matrix::<f64>(&tab, &b1, Some(&blk.1)).unwrap();
        assert_eq!(m.dim(), 1);
    }

    #[test]
    fn localizing_with_unit_poly_is_moment_matrix() {
        let tab = table(2, 2, 2);
        let b1 = build_basis(2, 2, 1, VarMode::Complex, None).unwrap();
        let g = LocalizingPoly {
            label: "1".into(),
            terms: vec![(Complex64::new(1.0, 0.0), Monomial::one(2, 2))],
        };
        let lm = localizing_matrix::<f64>(&tab, &b1, &g, None).unwrap();
        let mm = moment_matrix::<f64>(&tab, &b1, None).unwrap();
        for i in 0..lm.dim() {
            for j in i..lm.dim() {
                assert_eq!(lm.entry(i, j), mm.entry(i, j));
            }
        }
    }

    #[test]
    fn localizing_scalar_expansion() {
        // g = sqrt(rho_max) - x1 x~1 over basis {1} gives the 1x1 matrix
        // [sqrt(rho_max) L(1) - L(x1 x~1)]
        let st = builtin_state::<f64>("Sep1").unwrap().normalized().unwrap();
        let tab = table(2, 2, 2);
        let b0 = build_basis(2, 2, 0, VarMode::Complex, None).unwrap();
        let set = ScalingSet::for_state(Scaling::S1, &st, VarMode::Complex);
        let g = &set.one_sided[0];
        let lm = localizing_matrix::<f64>(&tab, &b0, g, None).unwrap();
        assert_eq!(lm.dim(), 1);
        let e = lm.entry(0, 0);
        assert_eq!(e.re.terms.len(), 2);
        let c = st.rho_max().sqrt();
        let got: Vec<f64> = e.re.terms.iter().map(|&(_, c)| c).collect();
        assert!((got[0] - c).abs() < 1e-15 || (got[1] - c).abs() < 1e-15);
        assert!(got.contains(&-1.0));
    }

    #[test]
    fn table1_localizer_shape() {
        // d1=d2=3, t=3: six localizers of size 91x91 under S1
        let st = builtin_state::<f64>("Ent1").unwrap().normalized().unwrap();
        let tab = FunctionalTable::build(
            3,
            3,
            VarMode::Complex,
            DegreeBound::Total(6),
            PinRule::Balance,
        )
        .unwrap();
        let b2 = build_basis(3, 3, 2, VarMode::Complex, None).unwrap();
        let set = ScalingSet::for_state(Scaling::S1, &st, VarMode::Complex);
        assert_eq!(set.one_sided.len(), 6);
        assert!(set.equalities.is_empty());
        let lm = localizing_matrix::<f64>(&tab, &b2, &set.one_sided[0], None).unwrap();
        assert_eq!(lm.dim(), 91);
    }

    #[test]
    fn matrix_localizer_constant_basis() {
        // t=2: basis {1} gives the d^2 x d^2 block rho*L(1) - (L(quartic))
        let st = builtin_state::<f64>("Sep1").unwrap().normalized().unwrap();
        let tab = table(2, 2, 2);
        let b0 = build_basis(2, 2, 0, VarMode::Complex, None).unwrap();
        let ml = matrix_localizer::<f64>(&tab, &b0, &st, None).unwrap();
        assert_eq!(ml.dim(), 4);
        // diagonal entry (0,0): rho_00 L(1) - L(x1 x~1 y1 y~1)
        let e = ml.entry(0, 0);
        assert_eq!(e.re.terms.len(), 2);
        let quartic = Monomial::state_entry(2, 2, 0, 0, 0, 0, VarMode::Complex);
        let qref = match tab.locate(&quartic).unwrap() {
            crate::functional::MomentRef::Real(v) => v,
            other => panic!("unexpected {:?}", other),
        };
        assert!(e
            .re
            .terms
            .iter()
            .any(|&(v, c)| v == qref && (c + 1.0).abs() < 1e-15));
        assert!(e
            .re
            .terms
            .iter()
            .any(|&(v, c)| v == tab.unit_var() && (c - 0.5).abs() < 1e-15));
    }

    #[test]
    fn matrix_localizer_complex_dim_117() {
        let st = builtin_state::<f64>("Ent1").unwrap().normalized().unwrap();
        let tab = FunctionalTable::build(
            3,
            3,
            VarMode::Complex,
            DegreeBound::Total(6),
            PinRule::Balance,
        )
        .unwrap();
        let b1 = build_basis(3, 3, 1, VarMode::Complex, None).unwrap();
        let ml = matrix_localizer::<f64>(&tab, &b1, &st, None).unwrap();
        assert_eq!(ml.dim(), 117); // 9 register pairs x 13 monomials
    }

    #[test]
    fn evaluation_consistency_moment_and_localizer() {
        // substituting the evaluation point at (a,b) turns every block into
        // the numeric matrix it represents; the moment matrix becomes a
        // blockwise rank-1 PSD matrix and the matrix localizer becomes
        // G_rho(a,b) tensor that rank-1 matrix
        let st = builtin_state::<f64>("Sep2").unwrap().normalized().unwrap();
        let t = 2;
        let tab = table(2, 2, t);
        let a = [Complex64::new(0.31, -0.12), Complex64::new(-0.05, 0.44)];
        let b = [Complex64::new(0.21, 0.33), Complex64::new(0.4, -0.1)];
        let x = tab.evaluation_point(&a, &b);

        let bt = build_basis(2, 2, t, VarMode::Complex, None).unwrap();
        let part = partition_blocks(&bt);
        for (_, ix) in &part.blocks {
            let m = moment_matrix::<f64>(&tab, &bt, Some(ix)).unwrap();
            let num = m.eval(&x);
            // check num == v v* with v the monomial evaluations
            let v: Vec<Complex64> = ix.iter().map(|&k| bt.get(k).eval(&a, &b)).collect();
            for i in 0..num.rows() {
                for j in 0..num.cols() {
                    assert!((num[(i, j)] - v[i] * v[j].conj()).norm() < 1e-12);
                }
            }
        }

        let btm2 = build_basis(2, 2, t - 2, VarMode::Complex, None).unwrap();
        let ml = matrix_localizer::<f64>(&tab, &btm2, &st, None).unwrap();
        let num = ml.eval(&x);
        // expected: G_rho(a,b) (x) [1]
        for i in 0..4 {
            for j in 0..4 {
                let (i1, j1) = (i / 2, i % 2);
                let (i2, j2) = (j / 2, j % 2);
                let g = st.entry(i1, j1, i2, j2)
                    - a[i1] * a[i2].conj() * b[j1] * b[j2].conj();
                assert!((num[(i, j)] - g).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cp_localizer_families() {
        let d = 2;
        let tab = FunctionalTable::build(
            d,
            1,
            VarMode::Real,
            DegreeBound::Total(4),
            PinRule::None,
        )
        .unwrap();
        let btm1 = build_basis(d, 1, 1, VarMode::Real, None).unwrap();
        let a = nalgebra::DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let blocks = cp_localizers(&tab, &a, 2, &btm1).unwrap();
        assert_eq!(blocks.scaled_diag.len(), 2);
        assert_eq!(blocks.offdiag.len(), 1);
        assert_eq!(blocks.tensors.len(), 2);

        // tensor ell=1: A - L(xx^T)
        let t1 = &blocks.tensors[0].1;
        assert_eq!(t1.dim(), 2);
        let e = t1.entry(0, 1);
        assert!((e.re.constant - 1.0).abs() < 1e-15);
        assert_eq!(e.re.terms.len(), 1);
        assert!((e.re.terms[0].1 + 1.0).abs() < 1e-15);

        // tensor ell=2: constant part is the Kronecker square of A
        let t2 = &blocks.tensors[1].1;
        assert_eq!(t2.dim(), 4);
        let akron = a.kronecker(&a);
        for i in 0..4 {
            for j in i..4 {
                assert!((t2.entry(i, j).re.constant - akron[(i, j)]).abs() < 1e-14);
            }
        }

        // strengthened block, top-left d x d sub-block: A L(1) - L(xx^T)
        let s = &blocks.strengthened.1;
        assert_eq!(s.dim(), 2 * btm1.len());
        let e = s.entry(0, btm1.len());
        // row (i=0, m=1), col (i'=1, m=1): A_12 L(1) - L(x1 x2)
        assert!(e
            .re
            .terms
            .iter()
            .any(|&(v, c)| v == tab.unit_var() && (c - 1.0).abs() < 1e-15));

        // degenerate inputs rejected
        let bad = nalgebra::DMatrix::<f64>::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        assert!(cp_localizers(&tab, &bad, 2, &btm1).is_err());
    }

    #[test]
    fn block_completeness() {
        // assembling all blocks and permuting recovers the full matrix
        let tab = table(2, 2, 2);
        let bt = build_basis(2, 2, 2, VarMode::Complex, None).unwrap();
        let part = partition_blocks(&bt);
        let full = moment_matrix::<f64>(&tab, &bt, None).unwrap();
        for (_, ix) in &part.blocks {
            let blk = moment_matrix::<f64>(&tab, &bt, Some(ix)).unwrap();
            for (p, &i) in ix.iter().enumerate() {
                for (q, &j) in ix.iter().enumerate() {
                    assert_eq!(blk.entry(p, q), full.entry(i, j));
                }
            }
        }
        // off-block entries reference nothing: they are pinned zeros
        for (bi, (_, ix)) in part.blocks.iter().enumerate() {
            for (bj, (_, jx)) in part.blocks.iter().enumerate() {
                if bi == bj {
                    continue;
                }
                for &i in ix {
                    for &j in jx {
                        let e = full.entry(i, j);
                        assert!(e.re.is_zero() && e.im.is_zero());
                    }
                }
            }
        }
    }
}
