//! Separable-rank lower bounds, the entanglement decision procedure, and
//! witness extraction from dual solutions.
//!
//! The level-`t` program minimizes `L(1)` over Hermitian functionals on
//! polynomials of degree `2t` subject to: the fourth-degree moments matching
//! the state, nonnegativity on the scaled quadratic module (moment matrix
//! plus one localizing matrix per scaling polynomial), and positivity of the
//! polynomial-matrix localizing block built from `ρ − xx* ⊗ yy*`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::functional::{FunctionalTable, LinExprC, PinRule};
use crate::hermitian::{birank, ComplexMatrix, HermitianState, RANK_CUTOFF};
use crate::moment::{
    localizing_matrix, matrix_localizer, moment_matrix, LocalizingPoly, Scaling, ScalingSet,
    SymbolicMatrix,
};
use crate::monomial::{build_basis, partition_blocks, BlockLabel, DegreeBound, VarMode};
use crate::program::{
    realified_dim, realify, solve, ComplexProgram, ConicProgram, EqRow, SolveReport, SolveStatus,
    SolverConfig,
};
use crate::scalar::Scalar;

/// Complex or real variant of the separable-rank bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepMode {
    Complex,
    Real,
}

impl SepMode {
    pub fn var_mode(self) -> VarMode {
        match self {
            SepMode::Complex => VarMode::Complex,
            SepMode::Real => VarMode::Real,
        }
    }
}

impl std::str::FromStr for SepMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complex" => Ok(SepMode::Complex),
            "real" => Ok(SepMode::Real),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Request for a separable-rank bound.
#[derive(Debug, Clone)]
pub struct SepBoundRequest<T> {
    pub state: HermitianState<T>,
    pub level: usize,
    pub scaling: Scaling,
    pub mode: SepMode,
    pub use_matrix_localizer: bool,
    pub block_diagonalize: bool,
    pub normalize_trace: bool,
    /// Collapse the `±` scaling pairs to linear equality rows on moments
    /// instead of two one-sided localizers.
    pub equality_pairs_as_rows: bool,
    /// For states with real entries, restrict to conjugation-invariant
    /// functionals (all moments real). Same optimum by symmetry averaging;
    /// skips the real embedding entirely. Ignored for complex-entried states.
    pub conjugation_reduction: bool,
}

impl<T: Scalar> SepBoundRequest<T> {
    pub fn new(state: HermitianState<T>, level: usize, scaling: Scaling, mode: SepMode) -> Self {
        SepBoundRequest {
            state,
            level,
            scaling,
            mode,
            use_matrix_localizer: true,
            block_diagonalize: true,
            normalize_trace: true,
            equality_pairs_as_rows: false,
            conjugation_reduction: true,
        }
    }
}

/// Dimensions of one PSD block, before and after the real reduction.
/// `solved` is false for blocks dropped from the solver program because
/// their conjugate partner carries the same constraint.
#[derive(Debug, Clone)]
pub struct BlockInfo {
    pub label: String,
    pub complex_dim: usize,
    pub real_dim: usize,
    pub solved: bool,
}

/// Structural report of an assembled program.
#[derive(Debug, Clone, Default)]
pub struct SizesReport {
    pub variables: usize,
    pub equality_rows: usize,
    pub moment_blocks: Vec<BlockInfo>,
    pub localizing_blocks: Vec<BlockInfo>,
    pub matrix_localizer_blocks: Vec<BlockInfo>,
}

impl SizesReport {
    pub fn to_json(&self) -> serde_json::Value {
        let blocks = |v: &Vec<BlockInfo>| {
            serde_json::Value::Array(
                v.iter()
                    .map(|b| {
                        serde_json::json!({
                            "label": b.label,
                            "complex_dim": b.complex_dim,
                            "real_dim": b.real_dim,
                            "solved": b.solved,
                        })
                    })
                    .collect(),
            )
        };
        serde_json::json!({
            "variables": self.variables,
            "equality_rows": self.equality_rows,
            "moment_blocks": blocks(&self.moment_blocks),
            "localizing_blocks": blocks(&self.localizing_blocks),
            "matrix_localizer_blocks": blocks(&self.matrix_localizer_blocks),
        })
    }
}

/// Origin of one equality row, used to reassemble dual matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqRowKind {
    /// `L(state monomial) = ρ_{kl}`, real or imaginary part.
    StateRe { k: usize, l: usize },
    StateIm { k: usize, l: usize },
    /// Homogeneous row (collapsed scaling pair or sphere ideal).
    Ideal,
}

/// Assembly byproducts needed for witness extraction and diagnostics.
pub struct SepMeta {
    pub table: FunctionalTable,
    pub eq_kinds: Vec<EqRowKind>,
    pub sizes: SizesReport,
}

fn keep_block(label: &BlockLabel, dedupe: bool) -> bool {
    !dedupe || label.is_conjugate_representative()
}

/// Push the equality rows `L(xx* ⊗ yy*) = ρ` (entrywise, upper triangle,
/// real/imaginary split in complex mode).
fn push_state_rows<T: Scalar>(
    table: &FunctionalTable,
    state: &HermitianState<T>,
    mode: SepMode,
    rows: &mut Vec<EqRow<T>>,
    kinds: &mut Vec<EqRowKind>,
) -> Result<()> {
    let (d1, d2) = (state.d1, state.d2);
    let dim = d1 * d2;
    let unit = Complex::new(T::one(), T::zero());
    for k in 0..dim {
        for l in k..dim {
            let (i, j) = (k / d2, k % d2);
            let (ip, jp) = (l / d2, l % d2);
            let mono = crate::monomial::Monomial::state_entry(d1, d2, i, ip, j, jp, mode.var_mode());
            let expr: LinExprC<T> = table.moment_term(unit, &mono)?;
            let rhs = state.entry(i, j, ip, jp);
            let mut re = expr.re;
            re.normalize();
            rows.push(EqRow { terms: re.terms, rhs: rhs.re });
            kinds.push(EqRowKind::StateRe { k, l });
            if mode == SepMode::Complex && k != l {
                let mut im = expr.im;
                im.normalize();
                // with real moments the imaginary rows are vacuous
                if !(im.is_zero() && rhs.im == T::zero()) {
                    rows.push(EqRow { terms: im.terms, rhs: rhs.im });
                    kinds.push(EqRowKind::StateIm { k, l });
                }
            }
        }
    }
    Ok(())
}

/// Push homogeneous rows `L(g · w) = 0` for all representative monomials `w`
/// of degree at most `2t − 2` (the collapsed encoding of a `±` scaling pair).
fn push_poly_rows<T: Scalar>(
    table: &FunctionalTable,
    g: &LocalizingPoly<T>,
    max_w_degree: usize,
    d1: usize,
    d2: usize,
    mode: VarMode,
    rows: &mut Vec<EqRow<T>>,
    kinds: &mut Vec<EqRowKind>,
) -> Result<()> {
    let ws = build_basis(d1, d2, max_w_degree, mode, None)?;
    for w in ws.items() {
        if mode == VarMode::Complex && *w > w.conjugate() {
            continue; // conjugate row carries the same information
        }
        let mut acc = LinExprC::zero();
        for (coef, u) in &g.terms {
            table.accumulate(&mut acc, *coef, &u.multiply(w))?;
        }
        acc.normalize();
        if !acc.re.is_zero() {
            rows.push(EqRow { terms: acc.re.terms, rhs: T::zero() });
            kinds.push(EqRowKind::Ideal);
        }
        if !acc.im.is_zero() {
            rows.push(EqRow { terms: acc.im.terms, rhs: T::zero() });
            kinds.push(EqRowKind::Ideal);
        }
    }
    Ok(())
}

fn block_info<T: Scalar>(label: String, m: &SymbolicMatrix<T>, solved: bool) -> BlockInfo {
    BlockInfo { label, complex_dim: m.dim(), real_dim: realified_dim(m), solved }
}

/// Assemble the level-`t` program for a request. The state inside the
/// request must already reflect the `normalize_trace` choice; use
/// [`effective_state`] for that.
pub fn assemble_sep_program<T: Scalar>(
    req: &SepBoundRequest<T>,
) -> Result<(ComplexProgram<T>, SepMeta)> {
    let t = req.level;
    if t < 2 {
        return Err(Error::InvalidRequest(format!("sep bound needs level t >= 2, got {t}")));
    }
    let state = &req.state;
    if req.mode == SepMode::Real && !state.is_real() {
        return Err(Error::InvalidRequest(
            "real mode requires a state with real entries".into(),
        ));
    }
    let (d1, d2) = (state.d1, state.d2);
    let vmode = req.mode.var_mode();
    let pin = match req.mode {
        SepMode::Complex => PinRule::Balance,
        SepMode::Real => PinRule::Parity,
    };
    let real_values =
        req.mode == SepMode::Complex && req.conjugation_reduction && state.is_real();
    let table =
        FunctionalTable::build_with(d1, d2, vmode, DegreeBound::Total(2 * t), pin, real_values)?;

    let mut rows = Vec::new();
    let mut kinds = Vec::new();
    push_state_rows(&table, state, req.mode, &mut rows, &mut kinds)?;

    let scaling = ScalingSet::for_state(req.scaling, state, vmode);
    let mut polys: Vec<LocalizingPoly<T>> = scaling.one_sided.clone();
    if req.equality_pairs_as_rows {
        for g in &scaling.equalities {
            push_poly_rows(&table, g, 2 * t - 2, d1, d2, vmode, &mut rows, &mut kinds)?;
        }
    } else {
        for g in &scaling.equalities {
            polys.push(g.clone());
            polys.push(g.negated(&format!("-({})", g.label)));
        }
    }

    let dedupe = req.block_diagonalize && req.mode == SepMode::Complex;
    let mut blocks: Vec<(String, SymbolicMatrix<T>)> = Vec::new();
    let mut sizes = SizesReport::default();

    // moment matrix M_t(L)
    let basis_t = build_basis(d1, d2, t, vmode, None)?;
    if req.block_diagonalize {
        for (label, ix) in &partition_blocks(&basis_t).blocks {
            let m = moment_matrix::<T>(&table, &basis_t, Some(ix))?;
            let solved = keep_block(label, dedupe);
            sizes.moment_blocks.push(block_info(format!("M_t {label}"), &m, solved));
            if solved {
                blocks.push((format!("M_t {label}"), m));
            }
        }
    } else {
        let m = moment_matrix::<T>(&table, &basis_t, None)?;
        sizes.moment_blocks.push(block_info("M_t".into(), &m, true));
        blocks.push(("M_t".into(), m));
    }

    // localizing matrices M_{t-1}(g L)
    let basis_tm1 = build_basis(d1, d2, t - 1, vmode, None)?;
    for g in &polys {
        if req.block_diagonalize {
            for (label, ix) in &partition_blocks(&basis_tm1).blocks {
                let m = localizing_matrix::<T>(&table, &basis_tm1, g, Some(ix))?;
                let solved = keep_block(label, dedupe);
                let name = format!("M_t-1[{}] {label}", g.label);
                sizes.localizing_blocks.push(block_info(name.clone(), &m, solved));
                if solved {
                    blocks.push((name, m));
                }
            }
        } else {
            let m = localizing_matrix::<T>(&table, &basis_tm1, g, None)?;
            let name = format!("M_t-1[{}]", g.label);
            sizes.localizing_blocks.push(block_info(name.clone(), &m, true));
            blocks.push((name, m));
        }
    }

    // polynomial-matrix localizing block M_{t-2}(G_rho ⊗ L)
    if req.use_matrix_localizer {
        let basis_tm2 = build_basis(d1, d2, t - 2, vmode, None)?;
        if req.block_diagonalize {
            for (label, ix) in &partition_blocks(&basis_tm2).blocks {
                let m = matrix_localizer::<T>(&table, &basis_tm2, state, Some(ix))?;
                let solved = keep_block(label, dedupe);
                let name = format!("M_t-2[G_rho] {label}");
                sizes.matrix_localizer_blocks.push(block_info(name.clone(), &m, solved));
                if solved {
                    blocks.push((name, m));
                }
            }
        } else {
            let m = matrix_localizer::<T>(&table, &basis_tm2, state, None)?;
            sizes
                .matrix_localizer_blocks
                .push(block_info("M_t-2[G_rho]".into(), &m, true));
            blocks.push(("M_t-2[G_rho]".into(), m));
        }
    }

    sizes.variables = table.num_vars();
    sizes.equality_rows = rows.len();
    let program = ComplexProgram {
        num_vars: table.num_vars(),
        objective: vec![(table.unit_var(), T::one())],
        equalities: rows,
        blocks,
    };
    Ok((program, SepMeta { table, eq_kinds: kinds, sizes }))
}

/// Entanglement witness reconstructed from the dual solution: a Hermitian
/// matrix `Λ` with `⟨ρ, Λ⟩` beyond any separable value of the same program.
#[derive(Debug, Clone)]
pub struct WitnessCertificate<T> {
    pub lambda: ComplexMatrix<T>,
    /// `⟨ρ, Λ⟩` (equals the bound at an optimum; the improvement rate along
    /// an infeasibility ray otherwise).
    pub value: T,
    pub threshold: T,
    pub from_ray: bool,
    pub stationarity_residual: T,
    pub min_dual_eigenvalue: T,
}

impl<T: Scalar> WitnessCertificate<T> {
    /// Whether this certificate proves entanglement: an infeasibility ray,
    /// or a dual value strictly above the separable-rank threshold.
    pub fn certifies_entanglement(&self, tol: T) -> bool {
        self.from_ray || self.value > self.threshold + tol
    }
}

/// Rebuild `Λ` from the equality-row multipliers and verify the dual
/// feasibility identity numerically (stationarity of `c + A᐀z` over the
/// assembled program and positive semidefiniteness of every dual block).
pub fn extract_witness<T: Scalar>(
    program: &ConicProgram<T>,
    meta: &SepMeta,
    report: &SolveReport<T>,
    state: &HermitianState<T>,
    threshold: T,
) -> Result<WitnessCertificate<T>> {
    if report.eq_duals.len() != meta.eq_kinds.len() {
        return Err(Error::Witness("dual multiplier count mismatch".into()));
    }
    let dim = state.dim();
    let mut lambda = ComplexMatrix::<T>::zeros(dim, dim);
    let half = T::from64(0.5);
    for (z, kind) in report.eq_duals.iter().zip(&meta.eq_kinds) {
        let lam = -*z;
        match *kind {
            EqRowKind::StateRe { k, l } => {
                if k == l {
                    lambda[(k, k)] = Complex::new(lam, T::zero());
                } else {
                    lambda[(k, l)] += Complex::new(lam * half, T::zero());
                    lambda[(l, k)] += Complex::new(lam * half, T::zero());
                }
            }
            EqRowKind::StateIm { k, l } => {
                lambda[(k, l)] += Complex::new(T::zero(), lam * half);
                lambda[(l, k)] += Complex::new(T::zero(), -lam * half);
            }
            EqRowKind::Ideal => {}
        }
    }
    // <rho, Lambda> over Hermitian matrices
    let mut value = T::zero();
    for k in 0..dim {
        for l in 0..dim {
            let r = state.mat()[(k, l)];
            let w = lambda[(l, k)];
            value += r.re * w.re - r.im * w.im;
        }
    }

    let stat = program.stationarity_residual(report);
    let scale = T::one() + value.abs();
    if stat > T::from64(1e-6) * scale {
        return Err(Error::Witness(format!(
            "stationarity residual {:e} exceeds tolerance",
            stat.as_f64()
        )));
    }
    let mut min_eig = T::zero();
    for zm in &report.block_duals {
        let ev = zm.clone().symmetric_eigen().eigenvalues;
        for v in ev.iter() {
            if *v < min_eig {
                min_eig = *v;
            }
        }
    }
    for z in &report.diag_duals {
        if *z < min_eig {
            min_eig = *z;
        }
    }
    if min_eig < -T::from64(1e-6) * scale {
        return Err(Error::Witness(format!(
            "dual block not PSD: min eigenvalue {:e}",
            min_eig.as_f64()
        )));
    }
    Ok(WitnessCertificate {
        lambda,
        value,
        threshold,
        from_ray: report.is_ray,
        stationarity_residual: stat,
        min_dual_eigenvalue: min_eig,
    })
}

/// Result of a separable-rank bound computation.
#[derive(Debug, Clone)]
pub struct SepBoundResult<T> {
    pub status: SolveStatus,
    /// Raw optimum of the relaxation (a lower bound on the separable rank).
    pub bound: Option<T>,
    pub certificate: Option<WitnessCertificate<T>>,
    pub level: usize,
    pub scaling: Scaling,
    pub mode: SepMode,
    pub threshold: T,
    pub sizes: SizesReport,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub solver_iterations: u32,
    pub solver_diagnostic: String,
}

impl<T: Scalar> SepBoundResult<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let witness = self.certificate.as_ref().map(|c| {
            let dim = c.lambda.rows();
            let re: Vec<Vec<f64>> = (0..dim)
                .map(|i| (0..dim).map(|j| c.lambda[(i, j)].re.as_f64()).collect())
                .collect();
            let im: Vec<Vec<f64>> = (0..dim)
                .map(|i| (0..dim).map(|j| c.lambda[(i, j)].im.as_f64()).collect())
                .collect();
            serde_json::json!({
                "lambda_re": re,
                "lambda_im": im,
                "value": c.value.as_f64(),
                "threshold": c.threshold.as_f64(),
                "from_ray": c.from_ray,
                "stationarity_residual": c.stationarity_residual.as_f64(),
                "min_dual_eigenvalue": c.min_dual_eigenvalue.as_f64(),
            })
        });
        serde_json::json!({
            "status": self.status.to_string(),
            "bound": self.bound.map(|b| b.as_f64()),
            "bound_ceil": self.bound.map(|b| b.as_f64().ceil()),
            "level": self.level,
            "scaling": self.scaling.to_string(),
            "mode": match self.mode { SepMode::Complex => "complex", SepMode::Real => "real" },
            "threshold": self.threshold.as_f64(),
            "witness": witness,
            "sizes": self.sizes.to_json(),
            "timings": {
                "assembly_seconds": self.assembly_seconds,
                "solve_seconds": self.solve_seconds,
                "solver_iterations": self.solver_iterations,
            },
        })
    }
}

/// The state actually used by a request: trace-normalized unless disabled.
pub fn effective_state<T: Scalar>(req: &SepBoundRequest<T>) -> Result<HermitianState<T>> {
    if req.normalize_trace {
        req.state.normalized()
    } else {
        Ok(req.state.clone())
    }
}

/// Artifacts of a full solve, for callers that need the dual data.
pub struct SepSolveArtifacts<T> {
    pub program: ConicProgram<T>,
    pub meta: SepMeta,
    pub report: SolveReport<T>,
    pub state: HermitianState<T>,
}

/// Compute the separable-rank lower bound and return the solve artifacts.
pub fn sep_bound_full<T>(
    req: &SepBoundRequest<T>,
    config: &SolverConfig,
) -> Result<(SepBoundResult<T>, SepSolveArtifacts<T>)>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    let state = effective_state(req)?;
    let mut solved_req = req.clone();
    solved_req.state = state.clone();
    solved_req.normalize_trace = false;

    let t0 = std::time::Instant::now();
    let (cprog, meta) = assemble_sep_program(&solved_req)?;
    let program = realify(&cprog)?;
    let assembly_seconds = t0.elapsed().as_secs_f64();

    let report = solve(&program, config)?;
    let threshold = T::from64(birank(&state, T::from64(RANK_CUTOFF))?.upper_bound() as f64);

    let mut result = SepBoundResult {
        status: report.status,
        bound: report.objective,
        certificate: None,
        level: req.level,
        scaling: req.scaling,
        mode: req.mode,
        threshold,
        sizes: meta.sizes.clone(),
        assembly_seconds,
        solve_seconds: report.wall_time,
        solver_iterations: report.iterations,
        solver_diagnostic: report.diagnostic.clone(),
    };
    let tol = T::from64(1e-7);
    let want_witness = match report.status {
        SolveStatus::Infeasible => true,
        SolveStatus::Optimal => {
            matches!(report.objective, Some(b) if b > threshold + tol)
        }
        _ => false,
    };
    if want_witness {
        if let Ok(cert) = extract_witness(&program, &meta, &report, &state, threshold) {
            if cert.certifies_entanglement(tol) {
                result.certificate = Some(cert);
            }
        }
    }
    Ok((result, SepSolveArtifacts { program, meta, report, state }))
}

/// Compute the separable-rank lower bound `ξ_t`.
pub fn sep_bound<T>(req: &SepBoundRequest<T>, config: &SolverConfig) -> Result<SepBoundResult<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    Ok(sep_bound_full(req, config)?.0)
}

/// Which upper bound on the separable rank gates the entanglement decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    /// `min(rank ρ, rank ρ^{T_B})²` — the tighter default.
    BirankBound,
    /// `rank(ρ)²`.
    RankSquared,
}

/// Verdict of the iterated entanglement test.
#[derive(Debug)]
pub enum EntanglementVerdict<T> {
    /// Every level solved with a bound below the threshold.
    SeparableConsistent { bounds: Vec<(usize, T)> },
    Entangled { level: usize, certificate: WitnessCertificate<T> },
    Undecided { reason: String },
}

/// Iterate levels `t = 2..=t_max`; a level that is infeasible or whose bound
/// exceeds the separable-rank threshold certifies entanglement.
pub fn entanglement_check<T>(
    state: &HermitianState<T>,
    t_max: usize,
    scaling: Scaling,
    mode: SepMode,
    rule: ThresholdRule,
    config: &SolverConfig,
) -> Result<EntanglementVerdict<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    if t_max < 2 {
        return Err(Error::InvalidRequest("entanglement check needs t_max >= 2".into()));
    }
    let normalized = state.normalized()?;
    let br = birank(&normalized, T::from64(RANK_CUTOFF))?;
    let threshold = match rule {
        ThresholdRule::BirankBound => br.upper_bound(),
        ThresholdRule::RankSquared => br.rank * br.rank,
    };
    let threshold_t = T::from64(threshold as f64);
    let tol = T::from64(1e-7);

    let mut bounds = Vec::new();
    let mut failure: Option<String> = None;
    for t in 2..=t_max {
        let req = SepBoundRequest::new(normalized.clone(), t, scaling, mode);
        let (result, artifacts) = sep_bound_full(&req, config)?;
        match result.status {
            SolveStatus::Infeasible => {
                let cert = extract_witness(
                    &artifacts.program,
                    &artifacts.meta,
                    &artifacts.report,
                    &artifacts.state,
                    threshold_t,
                )?;
                return Ok(EntanglementVerdict::Entangled { level: t, certificate: cert });
            }
            SolveStatus::Optimal => {
                let b = result.bound.expect("optimal solve has an objective");
                if b > threshold_t + tol {
                    let cert = extract_witness(
                        &artifacts.program,
                        &artifacts.meta,
                        &artifacts.report,
                        &artifacts.state,
                        threshold_t,
                    )?;
                    return Ok(EntanglementVerdict::Entangled { level: t, certificate: cert });
                }
                bounds.push((t, b));
            }
            other => {
                failure.get_or_insert(format!("level {t}: solver status {other}"));
            }
        }
    }
    if let Some(reason) = failure {
        return Ok(EntanglementVerdict::Undecided { reason });
    }
    Ok(EntanglementVerdict::SeparableConsistent { bounds })
}
