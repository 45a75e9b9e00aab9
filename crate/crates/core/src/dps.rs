//! Feasibility tests for the moment relaxations of the separable set: the
//! full degree-`2t` set, the split-degree sets, and the one-sided
//! matrix-valued formulation equivalent to the symmetric-extension
//! hierarchy.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::functional::{FunctionalTable, LinExprC, PinRule};
use crate::hermitian::{ComplexMatrix, HermitianState};
use crate::moment::SymbolicMatrix;
use crate::monomial::{
    build_basis, homogeneous_monomials, DegreeBound, Monomial, VarMode,
};
use crate::program::{
    realify, solve, ComplexProgram, EqRow, SolveReport, SolveStatus, SolverConfig,
};
use crate::scalar::Scalar;
use crate::seprank::{extract_witness, BlockInfo, EqRowKind, SepMeta, SizesReport, WitnessCertificate};

/// Which moment relaxation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpsVariant {
    /// All monomials of total degree `2t`, homogeneous moment blocks.
    Full(usize),
    /// Separate degree bounds: `2k` in `x, x̄` and `2t` in `y, ȳ`.
    Split(usize, usize),
    /// Matrix-valued functional on `C[y, ȳ]_{2t}`; equals `Split(1, t)`.
    OneSided(usize),
}

/// Membership request. The state is trace-normalized on entry (membership
/// in the separable cone is tested for the normalized state).
#[derive(Debug, Clone)]
pub struct DpsRequest<T> {
    pub state: HermitianState<T>,
    pub variant: DpsVariant,
    pub block_diagonalize: bool,
}

impl<T: Scalar> DpsRequest<T> {
    pub fn new(state: HermitianState<T>, variant: DpsVariant) -> Self {
        DpsRequest { state, variant, block_diagonalize: true }
    }
}

/// Verdict of a membership test.
pub enum DpsVerdict<T> {
    Feasible {
        /// For the one-sided variant: the reconstructed state extension
        /// `L(xx* ⊗ (yy*)^{⊗t})` acting on `d^{t+1}`-dimensional space.
        extension: Option<ComplexMatrix<T>>,
    },
    Infeasible(WitnessCertificate<T>),
    Undecided(String),
}

impl<T> std::fmt::Debug for DpsVerdict<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DpsVerdict::Feasible { .. } => write!(f, "Feasible"),
            DpsVerdict::Infeasible(_) => write!(f, "Infeasible"),
            DpsVerdict::Undecided(r) => write!(f, "Undecided({r})"),
        }
    }
}

/// Exact-degree index set `I^{=k,=t}_{r,s}` (empty on parity mismatch).
pub fn homogeneous_block_indices(
    k: usize,
    t: usize,
    r: i32,
    s: i32,
    d1: usize,
    d2: usize,
) -> Vec<Monomial> {
    homogeneous_monomials(k, t, r, s, d1, d2)
}

/// Result data for [`dps_membership`] beyond the verdict.
pub struct DpsOutcome<T> {
    pub verdict: DpsVerdict<T>,
    pub sizes: SizesReport,
    pub solve_seconds: f64,
    pub solver_diagnostic: String,
}

fn sphere_poly<T: Scalar>(
    d1: usize,
    d2: usize,
    mode: VarMode,
    on_x: bool,
) -> Vec<(Complex<T>, Monomial)> {
    let one = Monomial::one(d1, d2);
    let unit = Complex::new(T::one(), T::zero());
    let mut terms = vec![(unit, one)];
    if on_x {
        for i in 0..d1 {
            terms.push((-unit, Monomial::x_abs2(d1, d2, i, mode)));
        }
    } else {
        for j in 0..d2 {
            terms.push((-unit, Monomial::y_abs2(d1, d2, j, mode)));
        }
    }
    terms
}

/// Rows `L(g · w) = 0` over all representative monomials `w` within the
/// given bound, for `g` the sphere polynomial on one register.
fn push_ideal_rows<T: Scalar>(
    table: &FunctionalTable,
    g: &[(Complex<T>, Monomial)],
    w_bound: DegreeBound,
    d1: usize,
    d2: usize,
    rows: &mut Vec<EqRow<T>>,
    kinds: &mut Vec<EqRowKind>,
) -> Result<()> {
    let (bx, by) = match w_bound {
        DegreeBound::Total(t) => {
            let ws = build_basis(d1, d2, t, VarMode::Complex, None)?;
            push_ideal_rows_from(table, g, ws.items(), rows, kinds)?;
            return Ok(());
        }
        DegreeBound::Split { x, y } => (x, y),
    };
    let ws = build_basis(d1, d2, 0, VarMode::Complex, Some((bx, by)))?;
    push_ideal_rows_from(table, g, ws.items(), rows, kinds)
}

fn push_ideal_rows_from<T: Scalar>(
    table: &FunctionalTable,
    g: &[(Complex<T>, Monomial)],
    ws: &[Monomial],
    rows: &mut Vec<EqRow<T>>,
    kinds: &mut Vec<EqRowKind>,
) -> Result<()> {
    for w in ws {
        if *w > w.conjugate() {
            continue;
        }
        let mut acc = LinExprC::zero();
        for (coef, u) in g {
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

/// Moment matrix over an explicit monomial list.
fn moment_over<T: Scalar>(
    table: &FunctionalTable,
    monos: &[Monomial],
) -> Result<SymbolicMatrix<T>> {
    let unit = Complex::new(T::one(), T::zero());
    let mut out = SymbolicMatrix::new(monos.len());
    for (p, m) in monos.iter().enumerate() {
        for (q, mp) in monos.iter().enumerate().skip(p) {
            let mono = m.multiply(&mp.conjugate());
            let mut e = table.moment_term(unit, &mono)?;
            e.normalize();
            *out.entry_mut(p, q) = e;
        }
    }
    Ok(out)
}

/// Moment matrix rows indexed by `(register i, monomial w)` for the
/// matrix-valued functional: entry `((i, w), (j, w')) = L(x_i x̄_j w conj w')`.
fn matrix_valued_moment<T: Scalar>(
    table: &FunctionalTable,
    d: usize,
    monos: &[Monomial],
) -> Result<SymbolicMatrix<T>> {
    let unit = Complex::new(T::one(), T::zero());
    let n = d * monos.len();
    let mut out = SymbolicMatrix::new(n);
    let (d1, d2) = (table.d1, table.d2);
    for i in 0..d {
        for (p, w) in monos.iter().enumerate() {
            for j in 0..d {
                for (q, wp) in monos.iter().enumerate() {
                    let r = i * monos.len() + p;
                    let c = j * monos.len() + q;
                    if r > c {
                        continue;
                    }
                    let mono = Monomial::x(d1, d2, i)
                        .multiply(&Monomial::x_conj(d1, d2, j))
                        .multiply(&w.multiply(&wp.conjugate()));
                    let mut e = table.moment_term(unit, &mono)?;
                    e.normalize();
                    *out.entry_mut(r, c) = e;
                }
            }
        }
    }
    Ok(out)
}

/// Run a membership test.
pub fn dps_membership<T>(req: &DpsRequest<T>, config: &SolverConfig) -> Result<DpsOutcome<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    let state = req.state.normalized()?;
    let (d1, d2) = (state.d1, state.d2);
    match req.variant {
        DpsVariant::Full(t) => {
            if t < 2 {
                return Err(Error::InvalidRequest("full variant needs t >= 2".into()));
            }
            dps_solve(req, &state, DegreeBound::Total(2 * t), config, |table, sizes, blocks| {
                let mut labels: Vec<(i32, i32)> = Vec::new();
                for r in -(t as i32)..=(t as i32) {
                    for s in -(t as i32)..=(t as i32) {
                        labels.push((r, s));
                    }
                }
                for (r, s) in labels {
                    // homogeneous of total degree t, any x/y degree split
                    let monos = collect_total_homogeneous(t, r, s, d1, d2);
                    if monos.is_empty() {
                        continue;
                    }
                    push_dps_block(table, &monos, (r, s), req.block_diagonalize, sizes, blocks)?;
                }
                Ok(())
            })
        }
        DpsVariant::Split(k, t) => {
            if k < 1 || t < 1 {
                return Err(Error::InvalidRequest("split variant needs k, t >= 1".into()));
            }
            dps_solve(
                req,
                &state,
                DegreeBound::Split { x: 2 * k, y: 2 * t },
                config,
                |table, sizes, blocks| {
                    for r in (-(k as i32)..=(k as i32)).filter(|r| (r - k as i32) % 2 == 0) {
                        for s in (-(t as i32)..=(t as i32)).filter(|s| (s - t as i32) % 2 == 0) {
                            let monos = homogeneous_monomials(k, t, r, s, d1, d2);
                            if monos.is_empty() {
                                continue;
                            }
                            push_dps_block(table, &monos, (r, s), req.block_diagonalize, sizes, blocks)?;
                        }
                    }
                    Ok(())
                },
            )
        }
        DpsVariant::OneSided(t) => one_sided_membership(req, &state, t, config),
    }
}

/// Monomials with `|α+α′+β+β′| = t` and balances `(r, s)`.
fn collect_total_homogeneous(t: usize, r: i32, s: i32, d1: usize, d2: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for kx in 0..=t {
        let ky = t - kx;
        out.extend(homogeneous_monomials(kx, ky, r, s, d1, d2));
    }
    out.sort();
    out
}

fn push_dps_block<T: Scalar>(
    table: &FunctionalTable,
    monos: &[Monomial],
    label: (i32, i32),
    dedupe: bool,
    sizes: &mut SizesReport,
    blocks: &mut Vec<(String, SymbolicMatrix<T>)>,
) -> Result<()> {
    let keep = !dedupe || (label.0, label.1) <= (-label.0, -label.1);
    let m = moment_over::<T>(table, monos)?;
    sizes.moment_blocks.push(BlockInfo {
        label: format!("M ({},{})", label.0, label.1),
        complex_dim: m.dim(),
        real_dim: crate::program::realified_dim(&m),
        solved: keep,
    });
    if keep {
        blocks.push((format!("M ({},{})", label.0, label.1), m));
    }
    Ok(())
}

fn dps_solve<T, F>(
    req: &DpsRequest<T>,
    state: &HermitianState<T>,
    bound: DegreeBound,
    config: &SolverConfig,
    add_blocks: F,
) -> Result<DpsOutcome<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
    F: FnOnce(
        &FunctionalTable,
        &mut SizesReport,
        &mut Vec<(String, SymbolicMatrix<T>)>,
    ) -> Result<()>,
{
    let (d1, d2) = (state.d1, state.d2);
    let table = FunctionalTable::build(d1, d2, VarMode::Complex, bound, PinRule::Balance)?;

    let mut rows = Vec::new();
    let mut kinds = Vec::new();
    push_state_rows_complex(&table, state, &mut rows, &mut kinds)?;

    // sphere ideal on both registers: multiplier degrees shrink by 2 on the
    // corresponding register
    let gx = sphere_poly::<T>(d1, d2, VarMode::Complex, true);
    let gy = sphere_poly::<T>(d1, d2, VarMode::Complex, false);
    let (wx, wy) = match bound {
        DegreeBound::Total(t2) => (DegreeBound::Total(t2 - 2), DegreeBound::Total(t2 - 2)),
        DegreeBound::Split { x, y } => (
            DegreeBound::Split { x: x - 2, y },
            DegreeBound::Split { x, y: y - 2 },
        ),
    };
    push_ideal_rows(&table, &gx, wx, d1, d2, &mut rows, &mut kinds)?;
    push_ideal_rows(&table, &gy, wy, d1, d2, &mut rows, &mut kinds)?;

    let mut sizes = SizesReport::default();
    let mut blocks = Vec::new();
    add_blocks(&table, &mut sizes, &mut blocks)?;

    sizes.variables = table.num_vars();
    sizes.equality_rows = rows.len();
    // feasibility problem; L(1) is pinned to Tr(rho) by the ideal rows and
    // only stabilizes the solve
    let cprog = ComplexProgram {
        num_vars: table.num_vars(),
        objective: vec![(table.unit_var(), T::one())],
        equalities: rows,
        blocks,
    };
    let meta = SepMeta { table, eq_kinds: kinds, sizes: sizes.clone() };
    let program = realify(&cprog)?;
    let report = solve(&program, config)?;
    finish_dps(req, state, program, meta, report, None)
}

fn push_state_rows_complex<T: Scalar>(
    table: &FunctionalTable,
    state: &HermitianState<T>,
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
            let mono = Monomial::state_entry(d1, d2, i, ip, j, jp, VarMode::Complex);
            let mut expr = table.moment_term(unit, &mono)?;
            expr.normalize();
            let rhs = state.entry(i, j, ip, jp);
            rows.push(EqRow { terms: expr.re.terms, rhs: rhs.re });
            kinds.push(EqRowKind::StateRe { k, l });
            if k != l {
                rows.push(EqRow { terms: expr.im.terms, rhs: rhs.im });
                kinds.push(EqRowKind::StateIm { k, l });
            }
        }
    }
    Ok(())
}

fn one_sided_membership<T>(
    req: &DpsRequest<T>,
    state: &HermitianState<T>,
    t: usize,
    config: &SolverConfig,
) -> Result<DpsOutcome<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    if t < 1 {
        return Err(Error::InvalidRequest("one-sided variant needs t >= 1".into()));
    }
    let (d1, d2) = (state.d1, state.d2);
    if d1 != d2 {
        return Err(Error::InvalidRequest(
            "one-sided extension requires equal local dimensions".into(),
        ));
    }
    // variables: L(x_i x~_j w) for y-monomials w of degree <= 2t; realized as
    // the split table restricted to x-degree exactly (1,1)
    let all = build_basis(d1, d2, 0, VarMode::Complex, Some((2, 2 * t)))?;
    let monos: Vec<Monomial> = all
        .items()
        .iter()
        .filter(|m| {
            let xe: usize = m.alpha.iter().map(|&e| e as usize).sum();
            let xc: usize = m.alpha_c.iter().map(|&e| e as usize).sum();
            xe == 1 && xc == 1
        })
        .cloned()
        .collect();
    // the constant monomial is required by the table; the objective variable
    // Tr L(1) is represented through sum_i L(x_i x~_i)
    let mut with_one = vec![Monomial::one(d1, d2)];
    with_one.extend(monos);
    let table = FunctionalTable::from_monomials(
        d1,
        d2,
        VarMode::Complex,
        DegreeBound::Split { x: 2, y: 2 * t },
        PinRule::Balance,
        with_one.iter(),
    )?;

    let unit = Complex::new(T::one(), T::zero());
    let mut rows = Vec::new();
    let mut kinds = Vec::new();
    // pin the bookkeeping variable L(1) to Tr(rho) so the objective is fixed
    {
        let mut e = table.moment_term(unit, &Monomial::one(d1, d2))?;
        e.normalize();
        rows.push(EqRow { terms: e.re.terms, rhs: state.trace() });
        kinds.push(EqRowKind::Ideal);
    }
    // equality L(x_i x~_j y_a y~_b) = rho_{ia,jb}
    let dim = d1 * d2;
    for k in 0..dim {
        for l in k..dim {
            let (i, a) = (k / d2, k % d2);
            let (j, b) = (l / d2, l % d2);
            let mono = Monomial::state_entry(d1, d2, i, j, a, b, VarMode::Complex);
            let mut expr = table.moment_term(unit, &mono)?;
            expr.normalize();
            let rhs = state.entry(i, a, j, b);
            rows.push(EqRow { terms: expr.re.terms, rhs: rhs.re });
            kinds.push(EqRowKind::StateRe { k, l });
            if k != l {
                rows.push(EqRow { terms: expr.im.terms, rhs: rhs.im });
                kinds.push(EqRowKind::StateIm { k, l });
            }
        }
    }
    // sphere ideal on y against every L_ij: rows L(x_i x~_j (1-|y|^2) w) = 0
    let gy = sphere_poly::<T>(d1, d2, VarMode::Complex, false);
    let ys = build_basis(d1, d2, 0, VarMode::Complex, Some((0, 2 * t - 2)))?;
    for i in 0..d1 {
        for j in 0..d1 {
            for w in ys.items() {
                let base = Monomial::x(d1, d2, i)
                    .multiply(&Monomial::x_conj(d1, d2, j))
                    .multiply(w);
                // conjugate rows repeat information: keep representatives
                if base > base.conjugate() {
                    continue;
                }
                let mut acc = LinExprC::zero();
                for (coef, u) in &gy {
                    table.accumulate(&mut acc, *coef, &u.multiply(&base))?;
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
        }
    }

    // PSD block(s): M_t(calL) indexed by (i, w), blocked by the y-balance
    let ybasis = build_basis(d1, d2, 0, VarMode::Complex, Some((0, t)))?;
    let mut sizes = SizesReport::default();
    let mut blocks = Vec::new();
    if req.block_diagonalize {
        use std::collections::BTreeMap;
        let mut by_balance: BTreeMap<i32, Vec<Monomial>> = BTreeMap::new();
        for w in ybasis.items() {
            by_balance.entry(w.balance().1).or_default().push(w.clone());
        }
        for (s, monos) in by_balance {
            let m = matrix_valued_moment::<T>(&table, d1, &monos)?;
            let keep = s >= -s;
            sizes.moment_blocks.push(BlockInfo {
                label: format!("M_t(calL) s={s}"),
                complex_dim: m.dim(),
                real_dim: crate::program::realified_dim(&m),
                solved: keep,
            });
            if keep {
                blocks.push((format!("M_t(calL) s={s}"), m));
            }
        }
    } else {
        let m = matrix_valued_moment::<T>(&table, d1, ybasis.items())?;
        sizes.moment_blocks.push(BlockInfo {
            label: "M_t(calL)".into(),
            complex_dim: m.dim(),
            real_dim: crate::program::realified_dim(&m),
            solved: true,
        });
        blocks.push(("M_t(calL)".into(), m));
    }

    sizes.variables = table.num_vars();
    sizes.equality_rows = rows.len();
    let cprog = ComplexProgram {
        num_vars: table.num_vars(),
        objective: vec![(table.unit_var(), T::one())],
        equalities: rows,
        blocks,
    };
    let meta = SepMeta { table, eq_kinds: kinds, sizes: sizes.clone() };
    let program = realify(&cprog)?;
    let report = solve(&program, config)?;
    finish_dps(req, state, program, meta, report, Some(t))
}

fn finish_dps<T>(
    req: &DpsRequest<T>,
    state: &HermitianState<T>,
    program: crate::program::ConicProgram<T>,
    meta: SepMeta,
    report: SolveReport<T>,
    one_sided_t: Option<usize>,
) -> Result<DpsOutcome<T>>
where
    T: Scalar + clarabel::algebra::FloatT,
{
    let solve_seconds = report.wall_time;
    let diagnostic = report.diagnostic.clone();
    let verdict = match report.status {
        SolveStatus::Optimal => {
            let extension = match one_sided_t {
                Some(t) => Some(reconstruct_extension(&meta.table, &report.x, state.d1, t)?),
                None => None,
            };
            DpsVerdict::Feasible { extension }
        }
        SolveStatus::Infeasible => {
            let cert = extract_witness(&program, &meta, &report, state, T::zero())?;
            DpsVerdict::Infeasible(cert)
        }
        other => DpsVerdict::Undecided(format!("solver status {other} ({diagnostic})")),
    };
    let _ = req;
    Ok(DpsOutcome { verdict, sizes: meta.sizes, solve_seconds, solver_diagnostic: diagnostic })
}

/// Rebuild the one-sided state extension `L(xx* ⊗ (yy*)^{⊗t})` from the
/// solved moments: entries indexed by `(i, j_1..j_t)`.
fn reconstruct_extension<T: Scalar>(
    table: &FunctionalTable,
    x: &[T],
    d: usize,
    t: usize,
) -> Result<ComplexMatrix<T>> {
    let dim = d * d.pow(t as u32);
    let mut out = ComplexMatrix::<T>::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let (i, mut jr) = (r / d.pow(t as u32), r % d.pow(t as u32));
            let (ip, mut jc) = (c / d.pow(t as u32), c % d.pow(t as u32));
            let mut mono = Monomial::x(d, d, i).multiply(&Monomial::x_conj(d, d, ip));
            for _ in 0..t {
                mono = mono
                    .multiply(&Monomial::y(d, d, jr % d))
                    .multiply(&Monomial::y_conj(d, d, jc % d));
                jr /= d;
                jc /= d;
            }
            out[(r, c)] = table.moment_value(x, &mono)?;
        }
    }
    Ok(out)
}
