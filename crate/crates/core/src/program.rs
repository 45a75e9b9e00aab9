//! Canonical real conic program, the complex → real reduction, and the
//! interior-point solver adapter.
//!
//! Programs are built symbolically as complex Hermitian blocks over real
//! decision variables, then `realify`d: blocks with imaginary content become
//! their `2m x 2m` symmetric embeddings, symbolically-real blocks pass
//! through unchanged. The solver side hands the result to Clarabel with one
//! PSD triangle cone per block.

use std::time::Instant;

use clarabel::algebra as ca;
use clarabel::solver as cs;
use clarabel::solver::IPSolver;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::functional::{LinExpr, LinExprC};
use crate::moment::SymbolicMatrix;
use crate::scalar::Scalar;

/// Equality row `Σ coef · var = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqRow<T> {
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
}

/// Realified symmetric PSD block: sparse upper-triangle entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock<T> {
    pub dim: usize,
    /// `(i, j, expr)` with `i <= j`; absent entries are zero.
    pub entries: Vec<(usize, usize, LinExpr<T>)>,
}

/// Diagonal (linear inequality) block: each entry must be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagBlock<T> {
    pub entries: Vec<LinExpr<T>>,
}

impl<T> Default for DiagBlock<T> {
    fn default() -> Self {
        DiagBlock { entries: Vec::new() }
    }
}

/// Canonical real conic program:
/// minimize `objective · x` subject to equality rows, diagonal nonnegativity
/// entries, and symmetric PSD blocks, all affine in `x`.
#[derive(Debug, Clone)]
pub struct ConicProgram<T> {
    pub num_vars: usize,
    /// Sparse objective, minimized.
    pub objective: Vec<(usize, T)>,
    pub equalities: Vec<EqRow<T>>,
    pub diag: DiagBlock<T>,
    pub psd_blocks: Vec<PsdBlock<T>>,
    /// One label per PSD block, for reports.
    pub block_labels: Vec<String>,
}

/// Complex program prior to the real reduction: Hermitian symbolic blocks
/// over real variables plus already-real equality rows.
#[derive(Debug, Clone)]
pub struct ComplexProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<(usize, T)>,
    pub equalities: Vec<EqRow<T>>,
    pub blocks: Vec<(String, SymbolicMatrix<T>)>,
}

/// Realified size of a Hermitian symbolic block: unchanged when the block
/// carries no imaginary content, doubled otherwise.
pub fn realified_dim<T: Scalar>(block: &SymbolicMatrix<T>) -> usize {
    if block.is_symbolically_real() {
        block.dim()
    } else {
        2 * block.dim()
    }
}

fn embed_block<T: Scalar>(block: &SymbolicMatrix<T>) -> PsdBlock<T> {
    let m = block.dim();
    if block.is_symbolically_real() {
        let mut entries = Vec::new();
        for (i, j, e) in block.upper_triangle() {
            if !e.re.is_zero() {
                entries.push((i, j, e.re.clone()));
            }
        }
        return PsdBlock { dim: m, entries };
    }
    // [[Re, -Im], [Im, Re]] with only the upper triangle materialized
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let e: LinExprC<T> = block.entry(i, j);
            if j >= i && !e.re.is_zero() {
                entries.push((i, j, e.re.clone()));
                entries.push((m + i, m + j, e.re.clone()));
            }
            // upper-right corner: entry (i, m+j) = -Im_ij, always upper
            if !e.im.is_zero() {
                let mut neg = e.im.clone();
                for (_, c) in &mut neg.terms {
                    *c = -*c;
                }
                neg.constant = -neg.constant;
                entries.push((i, m + j, neg));
            }
        }
    }
    PsdBlock { dim: 2 * m, entries }
}

/// Complex → real reduction: each Hermitian block with imaginary content
/// becomes its symmetric embedding; real blocks pass through.
pub fn realify<T: Scalar>(program: &ComplexProgram<T>) -> Result<ConicProgram<T>> {
    let mut psd_blocks = Vec::with_capacity(program.blocks.len());
    let mut block_labels = Vec::with_capacity(program.blocks.len());
    for (label, block) in &program.blocks {
        for (i, j, e) in block.upper_triangle() {
            if i == j && !e.im.is_zero() {
                return Err(Error::Solver(format!(
                    "block {label} has a non-real diagonal entry ({i},{i})"
                )));
            }
        }
        psd_blocks.push(embed_block(block));
        block_labels.push(label.clone());
    }
    Ok(ConicProgram {
        num_vars: program.num_vars,
        objective: program.objective.clone(),
        equalities: program.equalities.clone(),
        diag: DiagBlock::default(),
        psd_blocks,
        block_labels,
    })
}

/// Solver, certificate, and report thresholds. Every field can be overridden
/// by `SEPRANK_SOLVER_*` environment variables or a key=value config file.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Duality-gap tolerance (absolute and relative).
    pub tol_gap: f64,
    /// Primal/dual feasibility tolerance.
    pub tol_feas: f64,
    /// Infeasibility certificate tolerance inside the solver.
    pub tol_infeas: f64,
    /// Static KKT regularization for the first solve attempt.
    pub static_reg: f64,
    /// The moment programs sit on degenerate faces; when the first attempt
    /// ends in a numerical error or an uncertified ray, one retry runs with
    /// this stronger regularization, which lets the solver certify
    /// infeasibility rays it otherwise loses in roundoff.
    pub retry_static_reg: f64,
    pub max_iter: u32,
    /// Wall-clock limit in seconds (0 = none).
    pub time_limit: f64,
    pub verbose: bool,
    /// A returned ray is accepted as an infeasibility certificate only when
    /// its residual is below this and its objective above `ray_objective`.
    pub ray_residual: f64,
    pub ray_objective: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            tol_infeas: 1e-8,
            static_reg: 1e-8,
            retry_static_reg: 1e-6,
            max_iter: 200,
            time_limit: 0.0,
            verbose: false,
            ray_residual: 1e-7,
            ray_objective: 1e-6,
        }
    }
}

impl SolverConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| Error::Parse(format!("bad config value {k}={v}"));
        match key {
            "tol_gap" => self.tol_gap = value.parse().map_err(|_| bad(key, value))?,
            "tol_feas" => self.tol_feas = value.parse().map_err(|_| bad(key, value))?,
            "tol_infeas" => self.tol_infeas = value.parse().map_err(|_| bad(key, value))?,
            "static_reg" => self.static_reg = value.parse().map_err(|_| bad(key, value))?,
            "retry_static_reg" => {
                self.retry_static_reg = value.parse().map_err(|_| bad(key, value))?
            }
            "max_iter" => self.max_iter = value.parse().map_err(|_| bad(key, value))?,
            "time_limit" => self.time_limit = value.parse().map_err(|_| bad(key, value))?,
            "verbose" => self.verbose = value.parse().map_err(|_| bad(key, value))?,
            "ray_residual" => self.ray_residual = value.parse().map_err(|_| bad(key, value))?,
            "ray_objective" => self.ray_objective = value.parse().map_err(|_| bad(key, value))?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse a plain `key = value` config file (`#` comments allowed).
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let mut cfg = SolverConfig::default();
        let text = std::fs::read_to_string(path)?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line without '=': {line:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.apply_env();
        Ok(cfg)
    }

    /// Apply `SEPRANK_SOLVER_<KEY>` environment overrides.
    pub fn apply_env(&mut self) {
        for key in [
            "tol_gap",
            "tol_feas",
            "tol_infeas",
            "static_reg",
            "retry_static_reg",
            "max_iter",
            "time_limit",
            "verbose",
            "ray_residual",
            "ray_objective",
        ] {
            let var = format!("SEPRANK_SOLVER_{}", key.to_ascii_uppercase());
            if let Ok(v) = std::env::var(&var) {
                // ignore malformed env overrides rather than aborting
                let _ = self.set(key, &v);
            }
        }
    }

    pub fn from_env() -> Self {
        let mut cfg = SolverConfig::default();
        cfg.apply_env();
        cfg
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Inaccurate,
    Failed,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Inaccurate => "inaccurate",
            SolveStatus::Failed => "failed",
        };
        write!(f, "{s}")
    }
}

/// Solve outcome with the data needed for witness extraction: primal point,
/// equality multipliers, dual PSD matrices, and (for infeasible programs)
/// the certified improving ray in the same layout.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub status: SolveStatus,
    pub objective: Option<T>,
    pub dual_objective: Option<T>,
    pub x: Vec<T>,
    pub eq_duals: Vec<T>,
    pub diag_duals: Vec<T>,
    pub block_duals: Vec<DMatrix<T>>,
    /// True when the dual vectors form an infeasibility ray rather than
    /// optimal multipliers.
    pub is_ray: bool,
    /// `‖A᐀z‖∞ / ‖z‖∞` of the returned ray (rays only).
    pub ray_residual: Option<T>,
    /// `−b᐀z / ‖z‖∞` of the returned ray (rays only).
    pub ray_objective: Option<T>,
    pub iterations: u32,
    pub wall_time: f64,
    pub diagnostic: String,
}

struct Coo<T> {
    rows: usize,
    cols: usize,
    items: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Coo<T> {
    fn to_csc(mut self) -> ca::CscMatrix<T> {
        self.items.sort_by_key(|&(r, c, _)| (c, r));
        let mut colptr = vec![0usize; self.cols + 1];
        let mut rowval = Vec::with_capacity(self.items.len());
        let mut nzval = Vec::with_capacity(self.items.len());
        for &(r, c, v) in &self.items {
            colptr[c + 1] += 1;
            rowval.push(r);
            nzval.push(v);
        }
        for c in 0..self.cols {
            colptr[c + 1] += colptr[c];
        }
        ca::CscMatrix::new(self.rows, self.cols, colptr, rowval, nzval)
    }
}

/// svec position of upper-triangle entry `(i, j)`, column-major.
fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

// `Scalar + FloatT` puts two copies of `max`/`abs`/`sqrt` in scope; these
// resolve the calls without trait disambiguation noise.
fn rabs<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

fn rmax<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Solve a realified program with Clarabel, retrying once with stronger
/// regularization when the first attempt fails without a usable certificate.
pub fn solve<T>(program: &ConicProgram<T>, config: &SolverConfig) -> Result<SolveReport<T>>
where
    T: Scalar + ca::FloatT,
{
    let first = solve_once(program, config, config.static_reg)?;
    let retry_helps =
        matches!(first.status, SolveStatus::Failed | SolveStatus::Inaccurate);
    if retry_helps && config.retry_static_reg > config.static_reg {
        let second = solve_once(program, config, config.retry_static_reg)?;
        // keep whichever attempt reached a conclusive status
        if matches!(
            second.status,
            SolveStatus::Optimal | SolveStatus::Infeasible | SolveStatus::Unbounded
        ) {
            return Ok(second);
        }
        if matches!(first.status, SolveStatus::Failed) {
            return Ok(second);
        }
    }
    Ok(first)
}

fn solve_once<T>(
    program: &ConicProgram<T>,
    config: &SolverConfig,
    static_reg: f64,
) -> Result<SolveReport<T>>
where
    T: Scalar + ca::FloatT,
{
    let start = Instant::now();
    let n = program.num_vars;
    let neq = program.equalities.len();
    let ndiag = program.diag.entries.len();
    let sqrt2 = nalgebra::ComplexField::sqrt(T::from64(2.0));

    let mut total_rows = neq + ndiag;
    for b in &program.psd_blocks {
        total_rows += tri_len(b.dim);
    }

    let mut a = Coo::<T> { rows: total_rows, cols: n, items: Vec::new() };
    let mut b_vec = vec![T::zero(); total_rows];
    let mut cones: Vec<cs::SupportedConeT<T>> = Vec::new();

    let mut row = 0usize;
    if neq > 0 {
        for eq in &program.equalities {
            for &(v, c) in &eq.terms {
                a.items.push((row, v, c));
            }
            b_vec[row] = eq.rhs;
            row += 1;
        }
        cones.push(cs::SupportedConeT::ZeroConeT(neq));
    }
    if ndiag > 0 {
        for e in &program.diag.entries {
            for &(v, c) in &e.terms {
                a.items.push((row, v, -c));
            }
            b_vec[row] = e.constant;
            row += 1;
        }
        cones.push(cs::SupportedConeT::NonnegativeConeT(ndiag));
    }
    for blk in &program.psd_blocks {
        for (i, j, e) in &blk.entries {
            let scale = if i == j { T::one() } else { sqrt2 };
            let r = row + svec_index(*i, *j);
            for &(v, c) in &e.terms {
                a.items.push((r, v, -c * scale));
            }
            b_vec[r] += e.constant * scale;
        }
        row += tri_len(blk.dim);
        cones.push(cs::SupportedConeT::PSDTriangleConeT(blk.dim));
    }
    debug_assert_eq!(row, total_rows);

    let mut c_vec = vec![T::zero(); n];
    for &(v, c) in &program.objective {
        c_vec[v] += c;
    }

    let a_items = a.items.clone();
    let a_csc = a.to_csc();
    let p = ca::CscMatrix::<T>::zeros((n, n));
    let settings = cs::DefaultSettingsBuilder::<T>::default()
        .verbose(config.verbose)
        .max_iter(config.max_iter)
        .time_limit(if config.time_limit > 0.0 { config.time_limit } else { f64::INFINITY })
        .tol_gap_abs(T::from64(config.tol_gap))
        .tol_gap_rel(T::from64(config.tol_gap))
        .tol_feas(T::from64(config.tol_feas))
        .tol_infeas_abs(T::from64(config.tol_infeas))
        .tol_infeas_rel(T::from64(config.tol_infeas))
        .static_regularization_constant(T::from64(static_reg))
        .build()
        .map_err(|e| Error::Solver(format!("bad solver settings: {e:?}")))?;

    let mut solver = cs::DefaultSolver::new(&p, &c_vec, &a_csc, &b_vec, &cones, settings)
        .map_err(|e| Error::Solver(format!("solver rejected problem: {e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    let wall_time = start.elapsed().as_secs_f64();

    // split duals by section
    let z = &sol.z;
    let eq_duals: Vec<T> = z[0..neq].to_vec();
    let diag_duals: Vec<T> = z[neq..neq + ndiag].to_vec();
    let mut block_duals = Vec::with_capacity(program.psd_blocks.len());
    let mut off = neq + ndiag;
    for blk in &program.psd_blocks {
        let m = blk.dim;
        let mut zm = DMatrix::<T>::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let v = z[off + svec_index(i, j)];
                let v = if i == j { v } else { v / sqrt2 };
                zm[(i, j)] = v;
                zm[(j, i)] = v;
            }
        }
        off += tri_len(m);
        block_duals.push(zm);
    }

    // ray diagnostics, used when the solver reports infeasibility
    let zinf = z.iter().fold(T::zero(), |acc, v| rmax(acc, rabs(*v)));
    let (ray_residual, ray_objective) = if zinf > T::zero() {
        let mut aty = vec![T::zero(); n];
        for &(r, c, v) in &a_items {
            aty[c] += v * z[r];
        }
        let res = aty.iter().fold(T::zero(), |acc, v| rmax(acc, rabs(*v))) / zinf;
        let mut bz = T::zero();
        for (bi, zi) in b_vec.iter().zip(z.iter()) {
            bz += *bi * *zi;
        }
        (Some(res), Some(-bz / zinf))
    } else {
        (None, None)
    };

    let gap_ok = {
        let p = sol.obj_val.as_f64();
        let d = sol.obj_val_dual.as_f64();
        (p - d).abs() <= config.tol_gap.max(1e-12) * (1.0 + p.abs().max(d.abs()))
    };

    use cs::SolverStatus as Ss;
    let (status, is_ray) = match sol.status {
        Ss::Solved => (if gap_ok { SolveStatus::Optimal } else { SolveStatus::Inaccurate }, false),
        Ss::AlmostSolved => (SolveStatus::Inaccurate, false),
        Ss::PrimalInfeasible | Ss::AlmostPrimalInfeasible => {
            let ok = matches!((ray_residual, ray_objective), (Some(r), Some(o))
                if r.as_f64() < config.ray_residual && o.as_f64() > config.ray_objective);
            if ok {
                (SolveStatus::Infeasible, true)
            } else {
                (SolveStatus::Inaccurate, true)
            }
        }
        Ss::DualInfeasible | Ss::AlmostDualInfeasible => (SolveStatus::Unbounded, false),
        Ss::MaxIterations | Ss::MaxTime | Ss::InsufficientProgress => {
            (SolveStatus::Inaccurate, false)
        }
        Ss::Unsolved | Ss::NumericalError | Ss::CallbackTerminated => (SolveStatus::Failed, false),
    };

    let objective = match status {
        SolveStatus::Optimal | SolveStatus::Inaccurate if !is_ray => Some(sol.obj_val),
        _ => None,
    };
    let dual_objective = match status {
        SolveStatus::Optimal | SolveStatus::Inaccurate if !is_ray => Some(sol.obj_val_dual),
        _ => None,
    };

    Ok(SolveReport {
        status,
        objective,
        dual_objective,
        x: sol.x.clone(),
        eq_duals,
        diag_duals,
        block_duals,
        is_ray,
        ray_residual,
        ray_objective,
        iterations: sol.iterations,
        wall_time,
        diagnostic: format!("{:?}", sol.status),
    })
}

impl<T: Scalar> ConicProgram<T> {
    /// Stationarity residual `‖c + A᐀z‖∞` of a dual vector in the report
    /// layout; for rays the objective contribution is dropped.
    pub fn stationarity_residual(&self, report: &SolveReport<T>) -> T {
        let mut r = vec![T::zero(); self.num_vars];
        if !report.is_ray {
            for &(v, c) in &self.objective {
                r[v] += c;
            }
        }
        for (eq, z) in self.equalities.iter().zip(&report.eq_duals) {
            for &(v, c) in &eq.terms {
                r[v] += c * *z;
            }
        }
        for (e, z) in self.diag.entries.iter().zip(&report.diag_duals) {
            for &(v, c) in &e.terms {
                r[v] -= c * *z;
            }
        }
        for (blk, zm) in self.psd_blocks.iter().zip(&report.block_duals) {
            for (i, j, e) in &blk.entries {
                let w = if i == j { T::one() } else { T::from64(2.0) };
                for &(v, c) in &e.terms {
                    r[v] -= c * zm[(*i, *j)] * w;
                }
            }
        }
        r.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}
