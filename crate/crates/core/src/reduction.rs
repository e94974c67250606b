//! Common invariant subspaces, block-triangular splitting, and shortcuts
//! that settle the JSR without building a polytope.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::{self, Matrix, Vector};

pub const TOL_INV: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    /// Independent spanning vectors in discovery order.
    pub basis: Vec<Vector>,
    /// Largest relative distance of an image of a basis vector from the span.
    pub residual: f64,
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Orthonormal frame used to test span membership.
struct Frame {
    q: Vec<Vector>,
}

impl Frame {
    fn residual(&self, v: &Vector) -> Vector {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.q {
                let c = q.dot(&r);
                r -= q * c;
            }
        }
        r
    }

    /// Adds `v` if it leaves the span by more than `tol` relative.
    fn try_add(&mut self, v: &Vector, tol: f64) -> bool {
        let n = v.norm();
        if n == 0.0 {
            return false;
        }
        let r = self.residual(v);
        let rn = r.norm();
        if rn > tol * n {
            self.q.push(r / rn);
            true
        } else {
            false
        }
    }
}

/// Closes `seeds` under the family, breadth first, for words up to `max_len`.
pub fn orbit_span(family: &MatrixFamily, seeds: &[Vector], max_len: usize) -> Result<InvariantSubspace> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("orbit needs at least one seed".into()));
    }
    let d = family.dim();
    if seeds.iter().any(|s| s.len() != d) {
        return Err(Error::DimensionMismatch("seed length differs from dimension".into()));
    }
    let mut frame = Frame { q: Vec::new() };
    let mut basis = Vec::new();
    let mut frontier = Vec::new();
    for s in seeds {
        if frame.try_add(s, TOL_INV) {
            basis.push(s.clone());
            frontier.push(s.clone());
        }
    }
    let mut depth = 0;
    while !frontier.is_empty() && depth < max_len && basis.len() < d {
        let mut next = Vec::new();
        for v in &frontier {
            for a in family.iter() {
                let w = a * v;
                if frame.try_add(&w, TOL_INV) {
                    basis.push(w.clone());
                    next.push(w);
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    let mut residual: f64 = 0.0;
    for b in &basis {
        for a in family.iter() {
            let w = a * b;
            let n = w.norm();
            if n > 0.0 {
                residual = residual.max(frame.residual(&w).norm() / n);
            }
        }
    }
    Ok(InvariantSubspace { basis, residual })
}

/// A family split along an invariant subspace `W`:
/// `S^-1 A_i S = [[Q_i, 0], [D_i, R_i]]` with `S = [complement | W]`.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    pub similarity: Matrix,
    /// Action on the quotient by `W` (leading block).
    pub quotient: MatrixFamily,
    /// Restriction to `W` (trailing block).
    pub restricted: MatrixFamily,
    /// Largest entry of the upper-right blocks, which should vanish.
    pub coupling_residual: f64,
}

/// Canonical vectors chosen greedily, lowest index first, to complete `w`.
pub fn greedy_complement(w: &[Vector], d: usize) -> Vec<usize> {
    let mut frame = Frame { q: Vec::new() };
    for v in w {
        frame.try_add(v, TOL_INV);
    }
    let mut picked = Vec::new();
    for i in 0..d {
        if frame.q.len() == d {
            break;
        }
        let e = Vector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
        if frame.try_add(&e, 1e-8) {
            picked.push(i);
        }
    }
    picked
}

pub fn block_triangularize(family: &MatrixFamily, w: &InvariantSubspace) -> Result<BlockSplit> {
    let d = family.dim();
    let k = w.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidInput(format!("subspace dimension {k} must lie in 1..{d}")));
    }
    if w.residual > TOL_INV {
        return Err(Error::InvalidInput(format!(
            "subspace residual {:.3e} exceeds tolerance",
            w.residual
        )));
    }
    let comp = greedy_complement(&w.basis, d);
    let mut s = Matrix::zeros(d, d);
    for (c, &i) in comp.iter().enumerate() {
        s[(i, c)] = 1.0;
    }
    for (c, v) in w.basis.iter().enumerate() {
        s.set_column(d - k + c, v);
    }
    split_with(family, &s, d - k)
}

/// Splits with an explicit similarity whose trailing `d - lead` columns
/// span an invariant subspace.
pub fn split_with(family: &MatrixFamily, s: &Matrix, lead: usize) -> Result<BlockSplit> {
    let d = family.dim();
    let inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("similarity is singular".into()))?;
    let mut quotient = Vec::new();
    let mut restricted = Vec::new();
    let mut coupling: f64 = 0.0;
    for a in family.iter() {
        let t = &inv * a * s;
        let scale = linalg::norm_inf(&t).max(1.0);
        for i in 0..lead {
            for j in lead..d {
                coupling = coupling.max(t[(i, j)].abs() / scale);
            }
        }
        quotient.push(t.view((0, 0), (lead, lead)).into_owned());
        restricted.push(t.view((lead, lead), (d - lead, d - lead)).into_owned());
    }
    if coupling > TOL_INV {
        return Err(Error::InvalidInput(format!(
            "subspace is not invariant: coupling block entry {coupling:.3e}"
        )));
    }
    Ok(BlockSplit {
        similarity: s.clone(),
        quotient: MatrixFamily::new(quotient)?,
        restricted: MatrixFamily::new(restricted)?,
        coupling_residual: coupling,
    })
}

/// Splits into diagonal blocks given a basis for each block; every block
/// span must be invariant.
pub fn block_diagonalize(family: &MatrixFamily, blocks: &[Vec<Vector>]) -> Result<Vec<MatrixFamily>> {
    let d = family.dim();
    let cols: Vec<&Vector> = blocks.iter().flatten().collect();
    if cols.len() != d {
        return Err(Error::DimensionMismatch(format!("{} basis vectors for dimension {d}", cols.len())));
    }
    let mut s = Matrix::zeros(d, d);
    for (j, c) in cols.iter().enumerate() {
        s.set_column(j, c);
    }
    let inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("block basis is singular".into()))?;
    let mut out: Vec<Vec<Matrix>> = vec![Vec::new(); blocks.len()];
    for a in family.iter() {
        let t = &inv * a * &s;
        let scale = linalg::norm_inf(&t).max(1.0);
        let mut start = 0;
        for (b, blk) in blocks.iter().enumerate() {
            let n = blk.len();
            for i in 0..d {
                for j in start..start + n {
                    if (i < start || i >= start + n) && t[(i, j)].abs() > TOL_INV * scale {
                        return Err(Error::InvalidInput(format!(
                            "block {} is not invariant (entry {:.3e})",
                            b + 1,
                            t[(i, j)]
                        )));
                    }
                }
            }
            out[b].push(t.view((start, start), (n, n)).into_owned());
            start += n;
        }
    }
    out.into_iter().map(MatrixFamily::new).collect()
}

/// The JSR of a block-triangular family is the largest block JSR.
pub fn jsr_from_blocks(block_jsrs: &[f64]) -> Result<f64> {
    if block_jsrs.is_empty() {
        return Err(Error::InvalidInput("no blocks".into()));
    }
    Ok(block_jsrs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Probabilistic test. A common invariant subspace is invariant for every
/// combination `sum c_i A_i`, so it contains eigenvectors (or real parts of
/// complex eigenpairs) of a random combination. Orbits of those are closed
/// for the family and for its transpose; the first proper one is returned.
pub fn irreducibility_check(family: &MatrixFamily, trials: usize, seed: u64) -> Result<Option<InvariantSubspace>> {
    let d = family.dim();
    let mut rng = StdRng::seed_from_u64(seed);
    let transposed = family.transposed();
    for _ in 0..trials {
        for f in [family, &transposed] {
            let mut m = Matrix::zeros(d, d);
            for a in f.iter() {
                m += a * rng.random_range(-1.0..1.0);
            }
            for seeds in eigen_seeds(&m)? {
                let w = orbit_span(f, &seeds, d)?;
                if w.dim() < d && w.residual <= TOL_INV {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

/// One seed group per eigenvalue: its eigenvector, or for a complex pair
/// a basis of the real two-dimensional invariant plane.
fn eigen_seeds(m: &Matrix) -> Result<Vec<Vec<Vector>>> {
    let d = m.nrows();
    let id = Matrix::identity(d, d);
    let mut out = Vec::new();
    for z in linalg::eigenvalues(m)? {
        if z.im.abs() <= 1e-12 * (1.0 + z.norm()) {
            out.push(vec![linalg::null_vector(&(m - &id * z.re))]);
        } else if z.im > 0.0 {
            let shifted = m - &id * z.re;
            let q = &shifted * &shifted + &id * (z.im * z.im);
            let svd = nalgebra::SVD::new(q, false, true);
            let vt = svd.v_t.expect("requested v_t");
            let mut idx: Vec<usize> = (0..d).collect();
            idx.sort_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap());
            out.push(idx[..2].iter().map(|&i| vt.row(i).transpose()).collect());
        }
    }
    Ok(out)
}

pub fn is_irreducible(family: &MatrixFamily, trials: usize, seed: u64) -> Result<bool> {
    Ok(irreducibility_check(family, trials, seed)?.is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

pub fn operator_norm(a: &Matrix, norm: Norm) -> f64 {
    match norm {
        Norm::L1 => linalg::norm_1(a),
        Norm::L2 => linalg::norm_2(a),
        Norm::LInf => linalg::norm_inf(a),
    }
}

/// Every matrix has norm at most one. Together with some generator of
/// spectral radius one this settles JSR = 1.
pub fn norm_extremality_check(family: &MatrixFamily, norm: Norm) -> bool {
    family.iter().all(|a| operator_norm(a, norm) <= 1.0 + 1e-12)
}

/// For families of symmetric matrices the JSR is the largest spectral radius.
pub fn symmetric_jsr(family: &MatrixFamily) -> Result<Option<f64>> {
    let symmetric = family
        .iter()
        .all(|a| (a - a.transpose()).iter().all(|x| x.abs() <= 1e-12 * linalg::norm_inf(a).max(1.0)));
    if !symmetric {
        return Ok(None);
    }
    let mut best: f64 = 0.0;
    for a in family.iter() {
        best = best.max(linalg::spectral_radius(a)?);
    }
    Ok(Some(best))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(d: usize, ms: &[&[f64]]) -> MatrixFamily {
        MatrixFamily::new(ms.iter().map(|m| Matrix::from_row_slice(d, d, m)).collect()).unwrap()
    }

    fn e(d: usize, i: usize) -> Vector {
        Vector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn canonical_seeds_span_everything() {
        let f = fam(2, &[&[1.0, 2.0, 3.0, 4.0]]);
        let w = orbit_span(&f, &[e(2, 0), e(2, 1)], 4).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(w.residual < 1e-15);
    }

    #[test]
    fn diagonal_orbit_stays_on_axis() {
        let f = fam(2, &[&[1.0, 0.0, 0.0, 2.0], &[3.0, 0.0, 0.0, 4.0]]);
        let w = orbit_span(&f, &[e(2, 0)], 5).unwrap();
        assert_eq!(w.dim(), 1);
        assert!(!is_irreducible(&f, 5, 1).unwrap());
    }

    #[test]
    fn triangular_family_splits_into_exact_blocks() {
        // span{e2} is invariant for lower-triangular matrices.
        let f = fam(2, &[&[2.0, 0.0, 1.0, 3.0], &[5.0, 0.0, -1.0, 7.0]]);
        let w = InvariantSubspace {
            basis: vec![e(2, 1)],
            residual: 0.0,
        };
        let s = block_triangularize(&f, &w).unwrap();
        assert_eq!(s.similarity, Matrix::identity(2, 2));
        assert_eq!(s.quotient.get(1).unwrap()[(0, 0)], 5.0);
        assert_eq!(s.restricted.get(0).unwrap()[(0, 0)], 3.0);
    }

    #[test]
    fn non_invariant_subspace_rejected() {
        let f = fam(2, &[&[0.0, 1.0, 1.0, 0.0]]);
        let w = InvariantSubspace {
            basis: vec![e(2, 0)],
            residual: 0.0,
        };
        assert!(block_triangularize(&f, &w).is_err());
    }

    #[test]
    fn block_maximum() {
        assert_eq!(jsr_from_blocks(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(jsr_from_blocks(&[0.25, 0.125, 0.25]).unwrap(), 0.25);
        assert_eq!(jsr_from_blocks(&[0.3]).unwrap(), 0.3);
        assert!(jsr_from_blocks(&[]).is_err());
    }

    #[test]
    fn extremality_examples() {
        let id = fam(2, &[&[1.0, 0.0, 0.0, 1.0]]);
        for n in [Norm::L1, Norm::L2, Norm::LInf] {
            assert!(norm_extremality_check(&id, n));
        }
        assert!(!norm_extremality_check(&id.scaled(2.0), Norm::L1));
    }

    #[test]
    fn example_one_pair_is_irreducible() {
        let f = fam(2, &[&[1.0, -0.125, 0.0, 0.5], &[0.5, 0.0, 1.0, 1.0]]);
        assert!(is_irreducible(&f, 10, 7).unwrap());
    }

    #[test]
    fn symmetric_shortcut() {
        let f = fam(2, &[&[2.0, 1.0, 1.0, 2.0], &[0.0, 1.0, 1.0, 0.0]]);
        assert!((symmetric_jsr(&f).unwrap().unwrap() - 3.0).abs() < 1e-12);
        let g = fam(2, &[&[0.0, 1.0, 0.0, 0.0]]);
        assert!(symmetric_jsr(&g).unwrap().is_none());
    }
}
