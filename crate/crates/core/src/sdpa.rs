//! Sparse SDPA (".dat-s") writer and reader.
//!
//! The file encodes `min c·x` s.t. `X = Σ_k x_k F_k − F_0 ⪰ 0` over a
//! block-diagonal matrix space. PSD blocks of a [`ConicProgram`] map onto
//! positive block sizes; equality rows become `±` pairs of entries in a
//! single trailing diagonal block (negative size), which also absorbs 1x1
//! PSD blocks and pre-existing diagonal entries. Entries are emitted as
//! `matno blkno i j value` quintuples with `i <= j`, sorted by
//! `(matno, blkno, i, j)`, values with 17 significant digits, so exporting
//! is deterministic and export ∘ import is the identity on files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::functional::LinExpr;
use crate::program::{ConicProgram, DiagBlock, PsdBlock};
use crate::scalar::Scalar;

fn fmt_value(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
    format!("{:.16e}", v)
}

/// Serialize a realified program to the sparse SDPA text format.
pub fn write_sdpa<T: Scalar, W: Write>(program: &ConicProgram<T>, out: &mut W) -> Result<()> {
    // quintuple map: (matno, blkno, i, j) -> value, 1-based indices
    let mut entries: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();

    let mut psd_sizes = Vec::new();
    let mut blkno = 0usize;
    for blk in &program.psd_blocks {
        if blk.dim == 1 {
            continue; // folded into the diagonal block below
        }
        blkno += 1;
        psd_sizes.push(blk.dim as i64);
        for (i, j, e) in &blk.entries {
            // F_0 = -constant part, F_v = coefficient of variable v
            if e.constant != T::zero() {
                *entries.entry((0, blkno, i + 1, j + 1)).or_default() +=
                    (-e.constant).as_f64();
            }
            for &(v, c) in &e.terms {
                *entries.entry((v + 1, blkno, i + 1, j + 1)).or_default() += c.as_f64();
            }
        }
    }

    // trailing diagonal block: equality pairs, then 1x1 PSD blocks, then
    // pre-existing diagonal entries
    let mut diag_exprs: Vec<LinExpr<T>> = Vec::new();
    for eq in &program.equalities {
        let pos = LinExpr { terms: eq.terms.clone(), constant: -eq.rhs };
        let mut neg = LinExpr { terms: eq.terms.clone(), constant: -eq.rhs };
        for (_, c) in &mut neg.terms {
            *c = -*c;
        }
        neg.constant = -neg.constant;
        diag_exprs.push(pos);
        diag_exprs.push(neg);
    }
    for blk in &program.psd_blocks {
        if blk.dim == 1 {
            let mut e = LinExpr::zero();
            for (_, _, expr) in &blk.entries {
                e.add_assign(expr);
            }
            e.normalize();
            diag_exprs.push(e);
        }
    }
    diag_exprs.extend(program.diag.entries.iter().cloned());

    let mut sizes = psd_sizes;
    if diag_exprs.is_empty() && sizes.is_empty() {
        // minimal valid file: one empty diagonal slot
        sizes.push(-1);
    } else if !diag_exprs.is_empty() {
        sizes.push(-(diag_exprs.len() as i64));
        let dblk = blkno + 1;
        for (q, e) in diag_exprs.iter().enumerate() {
            if e.constant != T::zero() {
                *entries.entry((0, dblk, q + 1, q + 1)).or_default() += (-e.constant).as_f64();
            }
            for &(v, c) in &e.terms {
                *entries.entry((v + 1, dblk, q + 1, q + 1)).or_default() += c.as_f64();
            }
        }
    }

    writeln!(out, "{}", program.num_vars)?;
    writeln!(out, "{}", sizes.len())?;
    let size_row: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    writeln!(out, "{}", size_row.join(" "))?;
    let mut c_dense = vec![0.0f64; program.num_vars];
    for &(v, c) in &program.objective {
        c_dense[v] += c.as_f64();
    }
    let c_row: Vec<String> = c_dense.iter().map(|&v| fmt_value(v)).collect();
    writeln!(out, "{}", c_row.join(" "))?;
    for ((matno, b, i, j), v) in &entries {
        if *v == 0.0 {
            continue;
        }
        writeln!(out, "{} {} {} {} {}", matno, b, i, j, fmt_value(*v))?;
    }
    Ok(())
}

/// Export to a file path.
pub fn export_sdpa<T: Scalar>(program: &ConicProgram<T>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_sdpa(program, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Export to an in-memory string (used by round-trip checks).
pub fn export_string<T: Scalar>(program: &ConicProgram<T>) -> Result<String> {
    let mut buf = Vec::new();
    write_sdpa(program, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::SdpaFormat(format!("non-utf8 output: {e}")))
}

/// Parse the sparse SDPA format back into a program. Equalities arrive as
/// the `±` diagonal pairs they were written as; the importer keeps them in
/// the diagonal block, which solves identically.
pub fn import_sdpa_str<T: Scalar>(text: &str) -> Result<ConicProgram<T>> {
    let mut lines = text.lines().filter(|l| {
        let t = l.trim_start();
        !t.starts_with('"') && !t.starts_with('*')
    });
    let mut next_line = || lines.next().ok_or_else(|| Error::SdpaFormat("truncated header".into()));

    let mdim: usize = next_line()?
        .trim()
        .parse()
        .map_err(|_| Error::SdpaFormat("bad variable count".into()))?;
    let nblocks: usize = next_line()?
        .trim()
        .parse()
        .map_err(|_| Error::SdpaFormat("bad block count".into()))?;
    let sizes: Vec<i64> = next_line()?
        .split_whitespace()
        .map(|t| t.trim_matches(|c| c == '{' || c == '}' || c == ',' || c == '(' || c == ')'))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::SdpaFormat(format!("bad block size {t:?}"))))
        .collect::<Result<_>>()?;
    if sizes.len() != nblocks {
        return Err(Error::SdpaFormat(format!(
            "expected {} block sizes, found {}",
            nblocks,
            sizes.len()
        )));
    }
    let c_line = next_line()?;
    let c_vals: Vec<f64> = c_line
        .split_whitespace()
        .map(|t| t.trim_matches(','))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::SdpaFormat(format!("bad objective value {t:?}"))))
        .collect::<Result<_>>()?;
    if c_vals.len() != mdim {
        return Err(Error::SdpaFormat(format!(
            "expected {} objective values, found {}",
            mdim,
            c_vals.len()
        )));
    }

    // per-block sparse accumulation: (blk, i, j) -> LinExpr
    let mut acc: BTreeMap<(usize, usize, usize), LinExpr<T>> = BTreeMap::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::SdpaFormat(format!("bad entry line {line:?}")));
        }
        let matno: usize =
            toks[0].parse().map_err(|_| Error::SdpaFormat(format!("bad matno {:?}", toks[0])))?;
        let blk: usize =
            toks[1].parse().map_err(|_| Error::SdpaFormat(format!("bad blkno {:?}", toks[1])))?;
        let i: usize =
            toks[2].parse().map_err(|_| Error::SdpaFormat(format!("bad row {:?}", toks[2])))?;
        let j: usize =
            toks[3].parse().map_err(|_| Error::SdpaFormat(format!("bad col {:?}", toks[3])))?;
        let v: f64 =
            toks[4].parse().map_err(|_| Error::SdpaFormat(format!("bad value {:?}", toks[4])))?;
        if matno > mdim || blk == 0 || blk > nblocks || i == 0 || j == 0 {
            return Err(Error::SdpaFormat(format!("entry out of range: {line:?}")));
        }
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let e = acc.entry((blk, i - 1, j - 1)).or_insert_with(LinExpr::zero);
        if matno == 0 {
            e.constant += T::from64(-v); // F_0 enters negated
        } else {
            e.add_term(matno - 1, T::from64(v));
        }
    }

    let mut psd_blocks = Vec::new();
    let mut block_labels = Vec::new();
    let mut diag = DiagBlock::default();
    for (b, &sz) in sizes.iter().enumerate() {
        let blk = b + 1;
        if sz >= 0 {
            let dim = sz as usize;
            let mut entries = Vec::new();
            for ((bb, i, j), e) in acc.range((blk, 0, 0)..(blk + 1, 0, 0)) {
                debug_assert_eq!(*bb, blk);
                if *i >= dim || *j >= dim {
                    return Err(Error::SdpaFormat(format!(
                        "entry ({},{}) outside block {} of size {}",
                        i + 1,
                        j + 1,
                        blk,
                        dim
                    )));
                }
                let mut e = e.clone();
                e.normalize();
                entries.push((*i, *j, e));
            }
            psd_blocks.push(PsdBlock { dim, entries });
            block_labels.push(format!("block_{blk}"));
        } else {
            let dim = (-sz) as usize;
            let mut exprs = vec![LinExpr::zero(); dim];
            for ((bb, i, j), e) in acc.range((blk, 0, 0)..(blk + 1, 0, 0)) {
                debug_assert_eq!(*bb, blk);
                if i != j || *i >= dim {
                    return Err(Error::SdpaFormat(format!(
                        "off-diagonal entry in diagonal block {blk}"
                    )));
                }
                let mut e = e.clone();
                e.normalize();
                exprs[*i] = e;
            }
            diag.entries.extend(exprs);
        }
    }

    let objective: Vec<(usize, T)> = c_vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (i, T::from64(v)))
        .collect();
    Ok(ConicProgram {
        num_vars: mdim,
        objective,
        equalities: Vec::new(),
        diag,
        psd_blocks,
        block_labels,
    })
}

pub fn import_sdpa<T: Scalar>(path: &Path) -> Result<ConicProgram<T>> {
    let text = std::fs::read_to_string(path)?;
    import_sdpa_str(&text)
}
