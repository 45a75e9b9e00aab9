//! Complex linear algebra substrate: Hermitian bipartite states, partial
//! operations, and the constructive complex ↔ real embeddings.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance used when validating Hermitian inputs.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default singular-value cutoff factor for numerical ranks.
pub const RANK_CUTOFF: f64 = 1e-8;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} = {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    /// Build from real and imaginary parts given as `f64` rows.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != rows * cols || im.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries in re/im, got {}/{}",
                rows * cols,
                re.len(),
                im.len()
            )));
        }
        let entries = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex::new(T::from64(a), T::from64(b)))
            .collect();
        Ok(ComplexMatrix { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Largest entry modulus, used to scale relative tolerances.
    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .map(|e| crate::scalar::cabs(*e))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn max_hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = crate::scalar::cabs(self[(i, j)] - self[(j, i)].conj());
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = if self.max_abs() > T::one() { self.max_abs() } else { T::one() };
        self.max_hermitian_defect() <= rel_tol * scale
    }

    /// Replace by the Hermitian average `(M + M*)/2`.
    pub fn symmetrize(&mut self) {
        let half = T::from64(0.5);
        for i in 0..self.rows {
            for j in i..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * Complex::new(half, T::zero());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = *e * Complex::new(c, T::zero());
        }
        out
    }

    pub fn is_real(&self, tol: T) -> bool {
        let scale = if self.max_abs() > T::one() { self.max_abs() } else { T::one() };
        self.entries.iter().all(|e| e.im.abs() <= tol * scale)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex<T>> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.entries[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.entries[i * self.cols + j]
    }
}

/// Bipartite Hermitian state on registers of local dimensions `(d1, d2)`.
///
/// Validated and symmetrized on construction, so downstream assembly sees
/// exactly-Hermitian data. `rho_max` caches the largest diagonal entry.
#[derive(Debug, Clone)]
pub struct HermitianState<T> {
    pub d1: usize,
    pub d2: usize,
    mat: ComplexMatrix<T>,
    trace: T,
    rho_max: T,
}

impl<T: Scalar> HermitianState<T> {
    pub fn new(d1: usize, d2: usize, mut mat: ComplexMatrix<T>) -> Result<Self> {
        let n = d1 * d2;
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidState("local dimensions must be >= 1".into()));
        }
        if mat.rows() != n || mat.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "state matrix is {}x{}, expected {}x{} for d1*d2 = {}",
                mat.rows(),
                mat.cols(),
                n,
                n,
                n
            )));
        }
        let tol = T::from64(HERMITICITY_TOL);
        if !mat.is_hermitian(tol) {
            return Err(Error::NotHermitian(format!(
                "max defect {:e}",
                mat.max_hermitian_defect().as_f64()
            )));
        }
        let scale = if mat.max_abs() > T::one() { mat.max_abs() } else { T::one() };
        for i in 0..n {
            if mat[(i, i)].im.abs() > tol * scale {
                return Err(Error::NotHermitian(format!(
                    "diagonal entry {} has imaginary part {:e}",
                    i,
                    mat[(i, i)].im.as_f64()
                )));
            }
        }
        mat.symmetrize();
        let trace = mat.trace().re;
        let rho_max = (0..n).map(|i| mat[(i, i)].re).fold(T::zero(), |a, b| if b > a { b } else { a });
        Ok(HermitianState { d1, d2, mat, trace, rho_max })
    }

    pub fn mat(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn trace(&self) -> T {
        self.trace
    }

    pub fn rho_max(&self) -> T {
        self.rho_max
    }

    /// Entry `ρ_{ij,i'j'}` in the product basis.
    pub fn entry(&self, i: usize, j: usize, ip: usize, jp: usize) -> Complex<T> {
        self.mat[(i * self.d2 + j, ip * self.d2 + jp)]
    }

    /// Rescale to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        if self.trace <= T::zero() {
            return Err(Error::InvalidState("cannot trace-normalize: trace <= 0".into()));
        }
        Self::new(self.d1, self.d2, self.mat.scale(T::one() / self.trace))
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.d1, self.d2, self.mat.scale(c))
    }

    pub fn is_real(&self) -> bool {
        self.mat.is_real(T::from64(HERMITICITY_TOL))
    }
}

/// Real symmetric image `[[Re G, −Im G], [Im G, Re G]]` of a complex matrix.
/// PSD of the source is equivalent to PSD of the embedding, and the
/// eigenvalue multiset doubles.
#[derive(Debug, Clone)]
pub struct RealEmbedding<T> {
    pub source_dim: usize,
    pub mat: DMatrix<T>,
}

/// Embed a square complex matrix into a `2m x 2m` real matrix. With
/// `hermitian` set, the input is validated and the output is symmetric.
pub fn real_embed<T: Scalar>(mat: &ComplexMatrix<T>, hermitian: bool) -> Result<RealEmbedding<T>> {
    if !mat.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "real_embed needs a square matrix, got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    if hermitian && !mat.is_hermitian(T::from64(HERMITICITY_TOL)) {
        return Err(Error::NotHermitian("real_embed with hermitian flag".into()));
    }
    let m = mat.rows();
    let mut out = DMatrix::<T>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let e = mat[(i, j)];
            out[(i, j)] = e.re;
            out[(m + i, m + j)] = e.re;
            out[(i, m + j)] = -e.im;
            out[(m + i, j)] = e.im;
        }
    }
    Ok(RealEmbedding { source_dim: m, mat: out })
}

/// Partial transpose on the second register:
/// `(ρ^{T_B})_{ij,i'j'} = ρ_{ij',i'j}`.
pub fn partial_transpose_b<T: Scalar>(state: &HermitianState<T>) -> HermitianState<T> {
    let (d1, d2) = (state.d1, state.d2);
    let mut out = ComplexMatrix::zeros(state.dim(), state.dim());
    for i in 0..d1 {
        for j in 0..d2 {
            for ip in 0..d1 {
                for jp in 0..d2 {
                    out[(i * d2 + j, ip * d2 + jp)] = state.entry(i, jp, ip, j);
                }
            }
        }
    }
    HermitianState::new(d1, d2, out).expect("partial transpose preserves Hermiticity")
}

/// Register selector for the partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    A,
    B,
}

/// Trace out one register. Tracing out `B` leaves a `d1 x d1` matrix with
/// entries `Σ_j ρ_{ij,i'j}`; tracing out `A` leaves `d2 x d2`.
pub fn partial_trace<T: Scalar>(state: &HermitianState<T>, traced_out: Register) -> ComplexMatrix<T> {
    let (d1, d2) = (state.d1, state.d2);
    match traced_out {
        Register::B => {
            let mut out = ComplexMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for ip in 0..d1 {
                    for j in 0..d2 {
                        let e = state.entry(i, j, ip, j);
                        out[(i, ip)] += e;
                    }
                }
            }
            out
        }
        Register::A => {
            let mut out = ComplexMatrix::zeros(d2, d2);
            for j in 0..d2 {
                for jp in 0..d2 {
                    for i in 0..d1 {
                        let e = state.entry(i, j, i, jp);
                        out[(j, jp)] += e;
                    }
                }
            }
            out
        }
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Scalar>(mat: &ComplexMatrix<T>) -> Result<Vec<T>> {
    if !mat.is_hermitian(T::from64(1e-9)) {
        return Err(Error::NotHermitian("eigenvalues of a non-Hermitian matrix".into()));
    }
    let mut m = mat.clone();
    m.symmetrize();
    let eig = m.to_nalgebra().symmetric_eigen();
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Scalar>(mat: &ComplexMatrix<T>) -> Result<T> {
    Ok(hermitian_eigenvalues(mat)?[0])
}

/// Numerical rank with cutoff `tol * largest singular value`.
pub fn rank<T: Scalar>(mat: &ComplexMatrix<T>, tol: T) -> Result<usize> {
    let vals = hermitian_eigenvalues(mat)?;
    let top = vals.iter().map(|v| v.abs()).fold(T::zero(), |a, b| if b > a { b } else { a });
    if top == T::zero() {
        return Ok(0);
    }
    Ok(vals.iter().filter(|v| v.abs() > tol * top).count())
}

/// The birank `(rank ρ, rank ρ^{T_B})` together with the induced bounds on
/// the separable rank: `max` of the pair from below, `min²` from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Birank {
    pub rank: usize,
    pub rank_pt: usize,
}

impl Birank {
    pub fn lower_bound(&self) -> usize {
        self.rank.max(self.rank_pt)
    }

    /// Caratheodory-type upper bound `min(rank, rank_pt)²`.
    pub fn upper_bound(&self) -> usize {
        let m = self.rank.min(self.rank_pt);
        m * m
    }
}

pub fn birank<T: Scalar>(state: &HermitianState<T>, tol: T) -> Result<Birank> {
    let r = rank(state.mat(), tol)?;
    let pt = partial_transpose_b(state);
    let rpt = rank(pt.mat(), tol)?;
    Ok(Birank { rank: r, rank_pt: rpt })
}

/// JSON schema for state ingestion: dense row-major re/im arrays.
#[derive(Debug, Deserialize)]
pub struct StateJson {
    pub d1: usize,
    pub d2: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Parse a state from its JSON encoding. The result is NOT trace-normalized;
/// callers apply [`HermitianState::normalized`] per their configuration.
pub fn state_from_json<T: Scalar>(text: &str) -> Result<HermitianState<T>> {
    let raw: StateJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state JSON: {e}")))?;
    let n = raw.d1 * raw.d2;
    let mat = ComplexMatrix::from_parts(n, n, &raw.re, &raw.im)?;
    HermitianState::new(raw.d1, raw.d2, mat)
}

/// Names of the built-in benchmark states.
pub const BUILTIN_STATES: [&str; 4] = ["Sep1", "Sep2", "Sep3", "Ent1"];

/// Registry of named states. Entries are the raw (unnormalized) matrices.
pub fn builtin_state<T: Scalar>(name: &str) -> Option<HermitianState<T>> {
    let (d1, d2, rows): (usize, usize, Vec<Vec<f64>>) = match name {
        "Sep1" => (
            2,
            2,
            vec![
                vec![1., 0., 0., 0.],
                vec![0., 0., 0., 0.],
                vec![0., 0., 0., 0.],
                vec![0., 0., 0., 1.],
            ],
        ),
        "Sep2" => (
            2,
            2,
            vec![
                vec![2., 1., 1., 1.],
                vec![1., 1., 1., 1.],
                vec![1., 1., 1., 1.],
                vec![1., 1., 1., 2.],
            ],
        ),
        "Sep3" => (
            2,
            3,
            vec![
                vec![4., 0., 0., 0., 0., 0.],
                vec![0., 4., 2., 0., 0., 2.],
                vec![0., 2., 2., 1., -1., 0.],
                vec![0., 0., 1., 2., 1., -1.],
                vec![0., 0., -1., 1., 5., 1.],
                vec![0., 2., 0., -1., 1., 2.],
            ],
        ),
        "Ent1" => (
            3,
            3,
            vec![
                vec![1., 0., 0., 0., 1., 0., 0., 0., 1.],
                vec![0., 2., 0., 1., 0., 0., 0., 0., 0.],
                vec![0., 0., 0.5, 0., 0., 0., 1., 0., 0.],
                vec![0., 1., 0., 0.5, 0., 0., 0., 0., 0.],
                vec![1., 0., 0., 0., 1., 0., 0., 0., 1.],
                vec![0., 0., 0., 0., 0., 2., 0., 1., 0.],
                vec![0., 0., 1., 0., 0., 0., 2., 0., 0.],
                vec![0., 0., 0., 0., 0., 1., 0., 0.5, 0.],
                vec![1., 0., 0., 0., 1., 0., 0., 0., 1.],
            ],
        ),
        _ => return None,
    };
    let n = d1 * d2;
    let mut mat = ComplexMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            mat[(i, j)] = Complex::new(T::from64(v), T::zero());
        }
    }
    Some(HermitianState::new(d1, d2, mat).expect("builtin states are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, rng: &mut StdRng) -> ComplexMatrix<f64> {
        let mut m = ComplexMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut h = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * Complex64::new(0.5, 0.0);
            }
        }
        h
    }

    /// Brute-force partial transpose by the explicit 4-index permutation.
    fn pt_reference(state: &HermitianState<f64>) -> ComplexMatrix<f64> {
        let (d1, d2) = (state.d1, state.d2);
        let mut out = ComplexMatrix::zeros(d1 * d2, d1 * d2);
        for i in 0..d1 {
            for ip in 0..d1 {
                for j in 0..d2 {
                    for jp in 0..d2 {
                        out[(i * d2 + j, ip * d2 + jp)] =
                            state.mat()[(i * d2 + jp, ip * d2 + j)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn partial_transpose_examples() {
        // diagonal states are PT-invariant
        let sep1 = builtin_state::<f64>("Sep1").unwrap();
        let pt = partial_transpose_b(&sep1);
        assert_eq!(pt.mat(), sep1.mat());

        // Ent1 satisfies the PPT condition
        let ent1 = builtin_state::<f64>("Ent1").unwrap();
        let pt = partial_transpose_b(&ent1);
        assert!(min_eigenvalue(pt.mat()).unwrap() >= -1e-9);

        // PT is an involution and matches the index-permutation reference
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let h = random_hermitian(6, &mut rng);
            let st = HermitianState::new(2, 3, h).unwrap();
            let pt = partial_transpose_b(&st);
            let reference = pt_reference(&st);
            let mut evs_a = hermitian_eigenvalues(pt.mat()).unwrap();
            let evs_b = hermitian_eigenvalues(&reference).unwrap();
            for (a, b) in evs_a.drain(..).zip(evs_b) {
                assert!((a - b).abs() < 1e-10);
            }
            let back = partial_transpose_b(&pt);
            assert!(back.mat().entries.iter().zip(&st.mat().entries).all(|(x, y)| (x - y).norm() < 1e-14));
        }
    }

    #[test]
    fn partial_trace_examples() {
        let sep1 = builtin_state::<f64>("Sep1").unwrap();
        let tra = partial_trace(&sep1, Register::B);
        assert_eq!(tra.rows(), 2);
        assert!((tra[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((tra[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(tra[(0, 1)].norm() < 1e-12);

        // identity on 2x2 registers traces to 2*I_2 either way
        let id = HermitianState::new(2, 2, ComplexMatrix::<f64>::identity(4)).unwrap();
        for reg in [Register::A, Register::B] {
            let t = partial_trace(&id, reg);
            assert!((t[(0, 0)].re - 2.0).abs() < 1e-12 && (t[(1, 1)].re - 2.0).abs() < 1e-12);
        }

        // product state: Tr_B(A ⊗ B) = A when Tr(B) = 1
        let mut prod = ComplexMatrix::<f64>::zeros(4, 4);
        let a = [[0.7, 0.1], [0.1, 0.3]];
        let b = [[0.6, 0.2], [0.2, 0.4]];
        for i in 0..2 {
            for ip in 0..2 {
                for j in 0..2 {
                    for jp in 0..2 {
                        prod[(i * 2 + j, ip * 2 + jp)] = Complex64::new(a[i][ip] * b[j][jp], 0.0);
                    }
                }
            }
        }
        let st = HermitianState::new(2, 2, prod).unwrap();
        let t = partial_trace(&st, Register::B);
        for i in 0..2 {
            for ip in 0..2 {
                assert!((t[(i, ip)].re - a[i][ip]).abs() < 1e-12);
            }
        }

        // trace consistency
        let mut rng = StdRng::seed_from_u64(3);
        let st = HermitianState::new(2, 3, random_hermitian(6, &mut rng)).unwrap();
        let full = st.trace();
        for reg in [Register::A, Register::B] {
            let t = partial_trace(&st, reg).trace();
            assert!((t.re - full).abs() <= 1e-10 * full.abs().max(1.0));
            assert!(t.im.abs() < 1e-12);
        }
    }

    #[test]
    fn real_embed_examples() {
        // identity embeds to identity
        let emb = real_embed(&ComplexMatrix::<f64>::identity(2), true).unwrap();
        assert_eq!(emb.mat, DMatrix::<f64>::identity(4, 4));

        // [[0, -i],[i, 0]] has eigenvalues {-1, 1}; embedding doubles them
        let mut pauli_y = ComplexMatrix::<f64>::zeros(2, 2);
        pauli_y[(0, 1)] = Complex64::new(0.0, -1.0);
        pauli_y[(1, 0)] = Complex64::new(0.0, 1.0);
        let emb = real_embed(&pauli_y, true).unwrap();
        assert_eq!(emb.mat.transpose(), emb.mat);
        let mut evs: Vec<f64> = emb.mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in evs.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }

        // block structure invariants
        let mut rng = StdRng::seed_from_u64(11);
        let h = random_hermitian(3, &mut rng);
        let emb = real_embed(&h, true).unwrap();
        let m = 3;
        for i in 0..m {
            for j in 0..m {
                // block (1,1) equals block (2,2)
                assert_eq!(emb.mat[(i, j)], emb.mat[(m + i, m + j)]);
                // block (2,1) is the negation of block (1,2); for Hermitian
                // input that is also its transpose (the embedding is symmetric)
                assert_eq!(emb.mat[(m + i, j)], -emb.mat[(i, m + j)]);
                assert_eq!(emb.mat[(m + i, j)], emb.mat[(j, m + i)]);
            }
        }

        // eigenvalue multiset doubles
        let evs_src = hermitian_eigenvalues(&h).unwrap();
        let mut evs_emb: Vec<f64> = emb.mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        evs_emb.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, v) in evs_src.iter().enumerate() {
            assert!((evs_emb[2 * k] - v).abs() < 1e-9);
            assert!((evs_emb[2 * k + 1] - v).abs() < 1e-9);
        }

        // PSD preserved both ways: G*G^H is PSD
        let g = random_hermitian(3, &mut rng);
        let psd = g.matmul(&g.conj_transpose());
        let emb = real_embed(&psd, true).unwrap();
        let min_src = min_eigenvalue(&psd).unwrap();
        let min_emb = emb.mat.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min_src >= -1e-10 && min_emb >= -1e-10);

        assert!(real_embed(&ComplexMatrix::<f64>::zeros(2, 3), false).is_err());
    }

    #[test]
    fn birank_examples() {
        let tol = RANK_CUTOFF;
        let sep2 = builtin_state::<f64>("Sep2").unwrap();
        let b = birank(&sep2, tol).unwrap();
        assert_eq!((b.rank, b.rank_pt), (3, 3));
        assert_eq!(b.lower_bound(), 3);
        assert_eq!(b.upper_bound(), 9);

        let sep3 = builtin_state::<f64>("Sep3").unwrap();
        let b = birank(&sep3, tol).unwrap();
        assert_eq!((b.rank, b.rank_pt), (4, 6));

        let ent1 = builtin_state::<f64>("Ent1").unwrap();
        let b = birank(&ent1, tol).unwrap();
        assert_eq!((b.rank, b.rank_pt), (4, 4));
        assert_eq!(b.upper_bound(), 16);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue(&ComplexMatrix::<f64>::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        let mut d = ComplexMatrix::<f64>::zeros(2, 2);
        d[(0, 0)] = Complex64::new(2.0, 0.0);
        d[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!((min_eigenvalue(&d).unwrap() + 1.0).abs() < 1e-12);
        let mut nh = ComplexMatrix::<f64>::zeros(2, 2);
        nh[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(min_eigenvalue(&nh).is_err());
    }

    #[test]
    fn state_validation_and_normalization() {
        let mut skew = ComplexMatrix::<f64>::zeros(2, 2);
        skew[(0, 1)] = Complex64::new(1.0, 0.0);
        skew[(1, 0)] = Complex64::new(2.0, 0.0);
        assert!(HermitianState::new(1, 2, skew).is_err());

        let sep2 = builtin_state::<f64>("Sep2").unwrap();
        assert!((sep2.trace() - 6.0).abs() < 1e-12);
        assert!((sep2.rho_max() - 2.0).abs() < 1e-12);
        let n = sep2.normalized().unwrap();
        assert!((n.trace() - 1.0).abs() < 1e-12);
        assert!((n.rho_max() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"d1":1,"d2":2,"re":[1.0,0.5,0.5,1.0],"im":[0.0,0.25,-0.25,0.0]}"#;
        let st = state_from_json::<f64>(text).unwrap();
        assert_eq!(st.dim(), 2);
        assert!((st.entry(0, 0, 0, 1) - Complex64::new(0.5, 0.25)).norm() < 1e-12);
        assert!(state_from_json::<f64>("{\"d1\":1}").is_err());
    }

    #[test]
    fn pt_conjugate_relation() {
        // (rho^{T_B})^T equals the entrywise conjugate of rho^{T_B}
        let mut rng = StdRng::seed_from_u64(5);
        let st = HermitianState::new(2, 2, random_hermitian(4, &mut rng)).unwrap();
        let pt = partial_transpose_b(&st);
        for i in 0..4 {
            for j in 0..4 {
                let t = pt.mat()[(j, i)];
                let c = pt.mat()[(i, j)].conj();
                assert!((t - c).norm() < 1e-12);
            }
        }
    }
}
