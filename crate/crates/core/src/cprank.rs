//! Lower bounds on the completely positive rank: the tensor-constraint
//! parameter and its strengthening by the polynomial-matrix localizer
//! `M_{t−1}((A − xx^T) ⊗ L)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::functional::{FunctionalTable, PinRule};
use crate::moment::{cp_localizers, moment_matrix, SymbolicMatrix};
use crate::monomial::{build_basis, DegreeBound, Monomial, VarMode};
use crate::program::{
    realify, solve, ComplexProgram, EqRow, SolveStatus, SolverConfig,
};
use crate::scalar::Scalar;
use crate::seprank::{BlockInfo, SizesReport};

/// Which constraint family backs the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpVariant {
    /// Scaled localizers plus the tensor constraints `L((xx^T)^{⊗ℓ}) ⪯ A^{⊗ℓ}`.
    Legacy2019,
    /// Scaled localizers plus the matrix localizer, which implies every
    /// tensor constraint.
    Strengthened,
}

impl std::str::FromStr for CpVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legacy2019" => Ok(CpVariant::Legacy2019),
            "strengthened" => Ok(CpVariant::Strengthened),
            other => Err(Error::Parse(format!("unknown cp variant {other:?}"))),
        }
    }
}

/// Request for a cp-rank lower bound on a symmetric entrywise-nonnegative
/// matrix.
#[derive(Debug, Clone)]
pub struct CpBoundRequest<T> {
    pub matrix: DMatrix<T>,
    pub level: usize,
    pub variant: CpVariant,
}

/// Result of the cp-rank bound, mirroring the separable-rank report shape.
#[derive(Debug, Clone)]
pub struct CpBoundResult<T> {
    pub status: SolveStatus,
    pub bound: Option<T>,
    pub level: usize,
    pub variant: CpVariant,
    pub sizes: SizesReport,
    pub solve_seconds: f64,
    pub solver_iterations: u32,
    pub solver_diagnostic: String,
    /// Primal moment values of `L((xx^T)^{⊗ℓ})` are recoverable from `x`;
    /// kept for the implication diagnostics.
    pub x: Vec<T>,
    pub table: FunctionalTable,
}

impl<T: Scalar> CpBoundResult<T> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status.to_string(),
            "bound": self.bound.map(|b| b.as_f64()),
            "bound_ceil": self.bound.map(|b| b.as_f64().ceil()),
            "level": self.level,
            "variant": match self.variant {
                CpVariant::Legacy2019 => "legacy2019",
                CpVariant::Strengthened => "strengthened",
            },
            "sizes": self.sizes.to_json(),
            "timings": {
                "solve_seconds": self.solve_seconds,
                "solver_iterations": self.solver_iterations,
            },
        })
    }

    /// Evaluate `A^{⊗ℓ} − L((xx^T)^{⊗ℓ})` at the solved moments and return
    /// its minimum eigenvalue (the implied-constraint diagnostic).
    pub fn tensor_constraint_min_eig(&self, a: &DMatrix<T>, ell: usize) -> Result<T> {
        let d = a.nrows();
        let dim = d.pow(ell as u32);
        let mut m = DMatrix::<T>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut mono = Monomial::one(d, 1);
                let mut aprod = T::one();
                let (mut rr, mut cc) = (r, c);
                for _ in 0..ell {
                    let (ri, ci) = (rr % d, cc % d);
                    rr /= d;
                    cc /= d;
                    aprod *= a[(ri, ci)];
                    mono = mono
                        .multiply(&crate::moment::cp_x(d, ri))
                        .multiply(&crate::moment::cp_x(d, ci));
                }
                let lv = self.table.moment_value(&self.x, &mono)?;
                m[(r, c)] = aprod - lv.re;
            }
        }
        // symmetrize against accumulation roundoff
        let mt = m.transpose();
        let m = (m + mt) * T::from64(0.5);
        let ev = m.symmetric_eigen().eigenvalues;
        let mut min = ev[0];
        for v in ev.iter() {
            if *v < min {
                min = *v;
            }
        }
        Ok(min)
    }
}

/// Validate `A` and strip rows forced to zero by a vanishing diagonal
/// (`A_ii = 0` forces `x_i = 0`; such rows must be entirely zero).
fn validate_cp_matrix<T: Scalar>(a: &DMatrix<T>) -> Result<Vec<usize>> {
    let d = a.nrows();
    if a.ncols() != d || d == 0 {
        return Err(Error::InvalidMatrix("cp matrix must be square and nonempty".into()));
    }
    let tol = T::from64(1e-12);
    for i in 0..d {
        for j in 0..d {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * (T::one() + a[(i, j)].abs()) {
                return Err(Error::InvalidMatrix("cp matrix must be symmetric".into()));
            }
            if a[(i, j)] < T::zero() {
                return Err(Error::InvalidMatrix("cp matrix must be entrywise nonnegative".into()));
            }
        }
    }
    let mut live = Vec::new();
    for i in 0..d {
        if a[(i, i)] > T::zero() {
            live.push(i);
        } else {
            for j in 0..d {
                if a[(i, j)] > T::zero() {
                    return Err(Error::InvalidMatrix(format!(
                        "row {i} has a zero diagonal but nonzero entries; not completely positive"
                    )));
                }
            }
        }
    }
    Ok(live)
}

/// Compute the cp-rank lower bound.
pub fn cp_bound<T>(req: &CpBoundRequest<T>, config: &SolverConfig) -> Result<CpBoundResult<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    let t = req.level;
    if t < 2 {
        return Err(Error::InvalidRequest(format!("cp bound needs level t >= 2, got {t}")));
    }
    let live = validate_cp_matrix(&req.matrix)?;
    if live.is_empty() {
        // the zero matrix has an empty decomposition
        let table = FunctionalTable::build(1, 1, VarMode::Real, DegreeBound::Total(2 * t), PinRule::None)?;
        return Ok(CpBoundResult {
            status: SolveStatus::Optimal,
            bound: Some(T::zero()),
            level: t,
            variant: req.variant,
            sizes: SizesReport::default(),
            solve_seconds: 0.0,
            solver_iterations: 0,
            solver_diagnostic: "trivial".into(),
            x: vec![T::zero(); table.num_vars()],
            table,
        });
    }
    let a = DMatrix::<T>::from_fn(live.len(), live.len(), |i, j| req.matrix[(live[i], live[j])]);
    let d = a.nrows();

    // moments over R[x]_{2t}, no sign symmetry (odd moments are genuine)
    let table = FunctionalTable::build(d, 1, VarMode::Real, DegreeBound::Total(2 * t), PinRule::None)?;
    let basis_t = build_basis(d, 1, t, VarMode::Real, None)?;
    let basis_tm1 = build_basis(d, 1, t - 1, VarMode::Real, None)?;

    let mut rows = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mono = crate::moment::cp_x(d, i).multiply(&crate::moment::cp_x(d, j));
            let mut e = table.moment_term(num_complex::Complex::new(T::one(), T::zero()), &mono)?;
            e.normalize();
            rows.push(EqRow { terms: e.re.terms, rhs: a[(i, j)] });
        }
    }

    let mut sizes = SizesReport::default();
    let mut blocks: Vec<(String, SymbolicMatrix<T>)> = Vec::new();
    let mm = moment_matrix::<T>(&table, &basis_t, None)?;
    sizes.moment_blocks.push(BlockInfo {
        label: "M_t".into(),
        complex_dim: mm.dim(),
        real_dim: mm.dim(),
        solved: true,
    });
    blocks.push(("M_t".into(), mm));

    let fam = cp_localizers(&table, &a, t, &basis_tm1)?;
    for (label, m) in fam.scaled_diag.into_iter().chain(fam.offdiag) {
        sizes.localizing_blocks.push(BlockInfo {
            label: label.clone(),
            complex_dim: m.dim(),
            real_dim: m.dim(),
            solved: true,
        });
        blocks.push((label, m));
    }
    match req.variant {
        CpVariant::Legacy2019 => {
            for (label, m) in fam.tensors {
                sizes.matrix_localizer_blocks.push(BlockInfo {
                    label: label.clone(),
                    complex_dim: m.dim(),
                    real_dim: m.dim(),
                    solved: true,
                });
                blocks.push((label, m));
            }
        }
        CpVariant::Strengthened => {
            let (label, m) = fam.strengthened;
            sizes.matrix_localizer_blocks.push(BlockInfo {
                label: label.clone(),
                complex_dim: m.dim(),
                real_dim: m.dim(),
                solved: true,
            });
            blocks.push((label, m));
        }
    }

    sizes.variables = table.num_vars();
    sizes.equality_rows = rows.len();
    let cprog = ComplexProgram {
        num_vars: table.num_vars(),
        objective: vec![(table.unit_var(), T::one())],
        equalities: rows,
        blocks,
    };
    let program = realify(&cprog)?;
    let report = solve(&program, config)?;
    Ok(CpBoundResult {
        status: report.status,
        bound: report.objective,
        level: t,
        variant: req.variant,
        sizes,
        solve_seconds: report.wall_time,
        solver_iterations: report.iterations,
        solver_diagnostic: report.diagnostic,
        x: report.x,
        table,
    })
}

/// Parse a dense real symmetric matrix from JSON: either a nested array or
/// `{"d": n, "entries": [..]}` row-major.
pub fn cp_matrix_from_json<T: Scalar>(text: &str) -> Result<DMatrix<T>> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
    let rows: Vec<Vec<f64>> = if v.is_array() {
        serde_json::from_value(v).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?
    } else {
        let d = v
            .get("d")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Parse("matrix JSON needs \"d\"".into()))? as usize;
        let entries: Vec<f64> = serde_json::from_value(
            v.get("entries")
                .cloned()
                .ok_or_else(|| Error::Parse("matrix JSON needs \"entries\"".into()))?,
        )
        .map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
        if entries.len() != d * d {
            return Err(Error::Parse(format!("expected {} entries, got {}", d * d, entries.len())));
        }
        entries.chunks(d).map(|c| c.to_vec()).collect()
    };
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse("matrix rows must all have the same length".into()));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| T::from64(rows[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn rank_one_all_ones_gives_one() {
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        for variant in [CpVariant::Legacy2019, CpVariant::Strengthened] {
            let req = CpBoundRequest { matrix: a.clone(), level: 2, variant };
            let res = cp_bound(&req, &cfg()).unwrap();
            assert_eq!(res.status, SolveStatus::Optimal, "{}", res.solver_diagnostic);
            assert!((res.bound.unwrap() - 1.0).abs() < 1e-3, "{:?} {:?}", variant, res.bound);
        }
    }

    #[test]
    fn scalar_case_is_one() {
        let a = DMatrix::<f64>::from_row_slice(1, 1, &[1.0]);
        let req = CpBoundRequest { matrix: a, level: 2, variant: CpVariant::Strengthened };
        let res = cp_bound(&req, &cfg()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.bound.unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn strengthened_dominates_legacy() {
        // identity: cp rank 2; both bounds should return 2 at t=2, and the
        // strengthened variant must not be weaker
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        let legacy = cp_bound(
            &CpBoundRequest { matrix: a.clone(), level: 2, variant: CpVariant::Legacy2019 },
            &cfg(),
        )
        .unwrap();
        let strong = cp_bound(
            &CpBoundRequest { matrix: a, level: 2, variant: CpVariant::Strengthened },
            &cfg(),
        )
        .unwrap();
        assert_eq!(legacy.status, SolveStatus::Optimal);
        assert_eq!(strong.status, SolveStatus::Optimal);
        assert!(legacy.bound.unwrap() <= strong.bound.unwrap() + 1e-5);
    }

    #[test]
    fn implied_tensor_constraints_hold_on_strengthened_optimum() {
        let a = DMatrix::<f64>::from_row_slice(3, 3, &[2.0, 1.0, 0.5, 1.0, 2.0, 1.0, 0.5, 1.0, 2.0]);
        let req = CpBoundRequest { matrix: a.clone(), level: 2, variant: CpVariant::Strengthened };
        let res = cp_bound(&req, &cfg()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        for ell in 1..=2 {
            let me = res.tensor_constraint_min_eig(&a, ell).unwrap();
            assert!(me >= -1e-6, "ell={ell}: min eig {me}");
        }
    }

    #[test]
    fn zero_diagonal_row_handling() {
        // valid: a zero row is dropped
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let res = cp_bound(
            &CpBoundRequest { matrix: a, level: 2, variant: CpVariant::Strengthened },
            &cfg(),
        )
        .unwrap();
        assert!((res.bound.unwrap() - 1.0).abs() < 1e-3);
        // invalid: zero diagonal with off-diagonal mass
        let bad = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]);
        assert!(cp_bound(
            &CpBoundRequest { matrix: bad, level: 2, variant: CpVariant::Strengthened },
            &cfg()
        )
        .is_err());
    }

    #[test]
    fn json_matrix_parsing() {
        let a = cp_matrix_from_json::<f64>("[[1.0, 0.5],[0.5, 2.0]]").unwrap();
        assert_eq!(a.nrows(), 2);
        assert_eq!(a[(0, 1)], 0.5);
        let b = cp_matrix_from_json::<f64>("{\"d\":2,\"entries\":[1,0.5,0.5,2]}").unwrap();
        assert_eq!(a, b);
        assert!(cp_matrix_from_json::<f64>("[[1.0],[0.5,2.0]]").is_err());
    }
}
