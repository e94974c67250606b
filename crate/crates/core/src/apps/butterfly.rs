//! Regularity of the Butterfly subdivision scheme at `omega = 1/16`.
//!
//! The 17-dimensional family `A1..A4` has a common invariant subspace of
//! dimension 6 (the orbit of the fixed point `v1` of `A1`). The quotient
//! family `B` is handled by the polytope algorithm; the restriction `C`
//! splits further into three 2x2 families.

use crate::error::{Error, Result};
use crate::exact::{parse_rat, RatMatrix};
use crate::family::MatrixFamily;
use crate::linalg;
use crate::pipeline::{compute, ComputeOptions, ComputeReport};
use crate::polytope::{self, JsrCertificate, PolytopeOptions};
use crate::candidates::{candidates_from_words, CandidateOptions};
use crate::reduction::{self, InvariantSubspace, Norm};
use crate::words::ProductWord;

const A_TEXT: &str = include_str!("../../data/butterfly_A.rat");
const B_TEXT: &str = include_str!("../../data/butterfly_B.rat");
const C_TEXT: &str = include_str!("../../data/butterfly_C.rat");
const V1_TEXT: &str = include_str!("../../data/butterfly_v1.rat");
const U_TEXT: &str = include_str!("../../data/butterfly_u.rat");
const W_TEXT: &str = include_str!("../../data/butterfly_w.rat");

/// Exact data shipped with the crate.
#[derive(Debug, Clone)]
pub struct ButterflyData {
    pub a: Vec<RatMatrix>,
    pub b: Vec<RatMatrix>,
    pub c: Vec<RatMatrix>,
    pub v1: RatMatrix,
    /// Leading eigenvectors of `B1`, `B2`, `B3`.
    pub u: Vec<RatMatrix>,
    /// Fixed points of `C1C2`, `C1C3`, `C2C3`.
    pub w: Vec<RatMatrix>,
}

fn expect_blocks(v: Vec<RatMatrix>, n: usize, rows: usize, cols: usize, what: &str) -> Result<Vec<RatMatrix>> {
    if v.len() != n || v.iter().any(|m| m.nrows() != rows || m.ncols() != cols) {
        return Err(Error::InvalidInput(format!("{what}: expected {n} blocks of {rows}x{cols}")));
    }
    Ok(v)
}

impl ButterflyData {
    pub fn load() -> Result<Self> {
        Ok(ButterflyData {
            a: expect_blocks(parse_rat(A_TEXT)?, 4, 17, 17, "A")?,
            b: expect_blocks(parse_rat(B_TEXT)?, 4, 11, 11, "B")?,
            c: expect_blocks(parse_rat(C_TEXT)?, 4, 6, 6, "C")?,
            v1: expect_blocks(parse_rat(V1_TEXT)?, 1, 17, 1, "v1")?.remove(0),
            u: expect_blocks(parse_rat(U_TEXT)?, 3, 11, 1, "u")?,
            w: expect_blocks(parse_rat(W_TEXT)?, 3, 6, 1, "w")?,
        })
    }

    pub fn family_a(&self) -> MatrixFamily {
        to_family(&self.a, "A")
    }

    pub fn family_b(&self) -> MatrixFamily {
        to_family(&self.b, "B")
    }

    pub fn family_c(&self) -> MatrixFamily {
        to_family(&self.c, "C")
    }
}

fn to_family(ms: &[RatMatrix], prefix: &str) -> MatrixFamily {
    MatrixFamily::with_labels(
        ms.iter().map(|m| m.to_f64()).collect(),
        (1..=ms.len()).map(|i| format!("{prefix}{i}")).collect(),
    )
    .expect("bundled matrices are square and finite")
}

/// Outcome of the exact block-triangular split of `A`.
#[derive(Debug, Clone)]
pub struct ExactSplit {
    pub fixed_point_exact: bool,
    pub coupling_zero: bool,
    pub quotient_matches: bool,
    pub restricted_matches: bool,
    pub quotient: Vec<RatMatrix>,
    pub restricted: Vec<RatMatrix>,
}

impl ExactSplit {
    pub fn ok(&self) -> bool {
        self.fixed_point_exact && self.coupling_zero && self.quotient_matches && self.restricted_matches
    }
}

/// Columns `e1..e10, e12` followed by `v1, A2v1, A3v1, A4v1, A1A2v1, A1A3v1`.
pub fn exact_similarity(data: &ButterflyData) -> Result<RatMatrix> {
    let d = 17;
    let mut cols = Vec::with_capacity(d);
    for i in (0..10).chain(std::iter::once(11)) {
        cols.push(RatMatrix::identity(d).column(i));
    }
    let v1 = &data.v1;
    let a = &data.a;
    let a2v = &a[1] * v1;
    let a3v = &a[2] * v1;
    cols.push(v1.clone());
    cols.push(a2v.clone());
    cols.push(a3v.clone());
    cols.push(&a[3] * v1);
    cols.push(&a[0] * &a2v);
    cols.push(&a[0] * &a3v);
    RatMatrix::from_columns(&cols)
}

pub fn exact_split(data: &ButterflyData) -> Result<ExactSplit> {
    let fixed_point_exact = (&data.a[0] * &data.v1).sub(&data.v1)?.is_zero();
    let s = exact_similarity(data)?;
    let inv = s
        .inverse()
        .ok_or_else(|| Error::InvalidInput("Butterfly similarity is singular".into()))?;
    let (lead, d) = (11, 17);
    let mut coupling_zero = true;
    let mut quotient = Vec::new();
    let mut restricted = Vec::new();
    for a in &data.a {
        let t = &(&inv * a) * &s;
        coupling_zero &= t.submatrix(0, lead, lead, d).is_zero();
        quotient.push(t.submatrix(0, lead, 0, lead));
        restricted.push(t.submatrix(lead, d, lead, d));
    }
    let same = |x: &[RatMatrix], y: &[RatMatrix]| x.iter().zip(y).all(|(p, q)| p == q);
    Ok(ExactSplit {
        fixed_point_exact,
        coupling_zero,
        quotient_matches: same(&quotient, &data.b),
        restricted_matches: same(&restricted, &data.c),
        quotient,
        restricted,
    })
}

/// Floating-point orbit of `v1` under the `A` family.
pub fn invariant_orbit(data: &ButterflyData) -> Result<InvariantSubspace> {
    reduction::orbit_span(&data.family_a(), &[data.v1.to_vector()], 17)
}

/// Polytope run on the quotient family with the default pipeline.
pub fn quotient_report(opts: &ComputeOptions) -> Result<ComputeReport> {
    let data = ButterflyData::load()?;
    compute(&data.family_b(), opts)
}

/// The three 2x2 diagonal blocks of the `C` family, in the bases
/// `(w1, C4w1)`, `(w2, C4w2)`, `(w3, C1w3)`. The split is exact, so the
/// blocks carry no rounding from the change of basis.
pub fn restricted_blocks(data: &ButterflyData) -> Result<Vec<MatrixFamily>> {
    let (c1, c4) = (&data.c[0], &data.c[3]);
    let w = &data.w;
    let cols = vec![
        w[0].clone(),
        c4 * &w[0],
        w[1].clone(),
        c4 * &w[1],
        w[2].clone(),
        c1 * &w[2],
    ];
    let s = RatMatrix::from_columns(&cols)?;
    let inv = s
        .inverse()
        .ok_or_else(|| Error::InvalidInput("restricted block basis is singular".into()))?;
    let mut blocks: Vec<Vec<RatMatrix>> = vec![Vec::new(); 3];
    for c in &data.c {
        let t = &(&inv * c) * &s;
        for (b, blk) in blocks.iter_mut().enumerate() {
            let (lo, hi) = (2 * b, 2 * b + 2);
            let outside_zero = t.submatrix(0, lo, lo, hi).is_zero() && t.submatrix(hi, 6, lo, hi).is_zero();
            if !outside_zero {
                return Err(Error::InvalidInput(format!("restricted block {} is not invariant", b + 1)));
            }
            blk.push(t.submatrix(lo, hi, lo, hi));
        }
    }
    Ok(blocks
        .iter()
        .enumerate()
        .map(|(b, ms)| to_family(ms, &format!("G{}_", b + 1)))
        .collect())
}

/// How the JSR of one restricted block was settled.
#[derive(Debug, Clone)]
pub enum BlockMethod {
    /// All generators are contractions in this norm and one has radius 1.
    NormBound(Norm),
    Polytope(Box<JsrCertificate>),
}

#[derive(Debug, Clone)]
pub struct BlockResult {
    pub jsr: f64,
    pub method: BlockMethod,
}

/// Settles a 2x2 block: a norm bound when one applies, otherwise the
/// polytope algorithm with the unit-radius generators as candidates.
pub fn block_jsr(block: &MatrixFamily, popts: &PolytopeOptions) -> Result<BlockResult> {
    let mut rho: f64 = 0.0;
    for a in block.iter() {
        rho = rho.max(linalg::spectral_radius(a)?);
    }
    for norm in [Norm::L1, Norm::LInf, Norm::L2] {
        let scaled = block.scaled(1.0 / rho);
        if reduction::norm_extremality_check(&scaled, norm) {
            return Ok(BlockResult {
                jsr: rho,
                method: BlockMethod::NormBound(norm),
            });
        }
    }
    let mut words = Vec::new();
    for (i, a) in block.iter().enumerate() {
        if linalg::spectral_radius(a)? >= rho * (1.0 - 1e-12) {
            words.push(ProductWord::new(vec![i]));
        }
    }
    let opts = CandidateOptions {
        tau_near: Some(0.0),
        ..CandidateOptions::default()
    };
    let cands = candidates_from_words(block, &words, &opts)?;
    let alpha = vec![1.0; cands.len()];
    let cert = polytope::run(block, &cands, &alpha, &[], popts)?;
    Ok(BlockResult {
        jsr: cert.jsr,
        method: BlockMethod::Polytope(Box::new(cert)),
    })
}

#[derive(Debug, Clone)]
pub struct ButterflyResult {
    pub split: ExactSplit,
    pub orbit_dim: usize,
    pub quotient: ComputeReport,
    pub blocks: Vec<BlockResult>,
    /// JSR of the full `A` family.
    pub jsr: f64,
    /// `-log2(JSR / 4)`.
    pub regularity: f64,
}

pub fn butterfly_analysis(opts: &ComputeOptions) -> Result<ButterflyResult> {
    let data = ButterflyData::load()?;
    let split = exact_split(&data)?;
    let orbit_dim = invariant_orbit(&data)?.dim();
    let quotient = compute(&data.family_b(), opts)?;
    let blocks = restricted_blocks(&data)?
        .iter()
        .map(|b| block_jsr(b, &opts.polytope))
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<f64> = blocks.iter().map(|b| b.jsr).collect();
    all.push(quotient.certificate.jsr);
    let jsr = reduction::jsr_from_blocks(&all)?;
    Ok(ButterflyResult {
        split,
        orbit_dim,
        quotient,
        blocks,
        jsr,
        regularity: -(jsr / 4.0).log2(),
    })
}
