//! Spectrum-maximizing product candidates and two-sided JSR bounds.

use log::warn;

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::{self, Vector};
use crate::words::{evaluate, simple_necklaces, ProductWord};

#[derive(Debug, Clone)]
pub struct CandidateOptions {
    /// Longest word examined.
    pub n_bar: usize,
    /// Relative tie tolerance against the best averaged spectral radius.
    pub tau_cand: f64,
    /// Optional wider band admitting nearly maximal products.
    pub tau_near: Option<f64>,
    /// Tolerance for eigenvalue multiplicity and realness.
    pub eig_tol: f64,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions {
            n_bar: 8,
            tau_cand: 1e-10,
            tau_near: None,
            eig_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub word: ProductWord,
    /// `rho(P)^(1/|w|)` on the original family.
    pub averaged_radius: f64,
    /// Leading eigenvalue of the normalized product; `+-1` for ties.
    pub lambda: f64,
    /// Leading eigenvector, max-norm 1.
    pub vector: Vector,
    /// Adjoint eigenvector with `<v*, v> = 1`.
    pub adjoint: Vector,
    pub simple_leader: bool,
    /// Admitted through the near band rather than as a tie.
    pub near: bool,
}

#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// Normalizing constant: the best averaged spectral radius.
    pub rho_c: f64,
    pub warnings: Vec<String>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn tied(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| !c.near)
    }

    pub fn words(&self) -> Vec<ProductWord> {
        self.candidates.iter().map(|c| c.word.clone()).collect()
    }
}

fn averaged_radius(family: &MatrixFamily, w: &ProductWord) -> Result<f64> {
    let rho = linalg::spectral_radius(&evaluate(family, w)?)?;
    Ok(rho.powf(1.0 / w.len() as f64))
}

/// Examines every simple necklace up to `n_bar` and keeps the maximizers.
pub fn search_candidates(family: &MatrixFamily, opts: &CandidateOptions) -> Result<CandidateSet> {
    let words = simple_necklaces(family.len(), opts.n_bar.max(1));
    let mut scored = Vec::with_capacity(words.len());
    for w in words {
        let r = averaged_radius(family, &w)?;
        scored.push((w, r));
    }
    let best = scored.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    if best <= 0.0 {
        return Err(Error::NoCandidate(
            "every product up to the search length has zero spectral radius".into(),
        ));
    }
    from_scored(family, scored, best, opts)
}

/// Builds a candidate set from explicitly supplied words.
pub fn candidates_from_words(
    family: &MatrixFamily,
    words: &[ProductWord],
    opts: &CandidateOptions,
) -> Result<CandidateSet> {
    let mut scored = Vec::with_capacity(words.len());
    for w in words {
        if w.is_empty() {
            return Err(Error::InvalidInput("empty candidate word".into()));
        }
        scored.push((w.clone(), averaged_radius(family, w)?));
    }
    let best = scored.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    if best <= 0.0 {
        return Err(Error::NoCandidate("supplied products have zero spectral radius".into()));
    }
    let relaxed = CandidateOptions {
        tau_cand: opts.tau_cand,
        tau_near: Some(opts.tau_near.unwrap_or(0.0).max(1.0)),
        ..opts.clone()
    };
    from_scored(family, scored, best, &relaxed)
}

fn from_scored(
    family: &MatrixFamily,
    scored: Vec<(ProductWord, f64)>,
    best: f64,
    opts: &CandidateOptions,
) -> Result<CandidateSet> {
    let mut warnings = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let tie = (1.0 - opts.tau_cand) * best;
    let near_cut = opts.tau_near.map(|t| (1.0 - t) * best);
    for (word, r) in scored {
        let near = if r >= tie {
            false
        } else if near_cut.is_some_and(|c| r >= c) {
            true
        } else {
            continue;
        };
        let scale = best.powi(word.len() as i32);
        let p = evaluate(family, &word)? / scale;
        let lead = match linalg::leading_eigen(&p, opts.eig_tol) {
            Ok(l) => l,
            Err(Error::ComplexLeading { .. }) => {
                let msg = format!("candidate {word} dropped: leading eigenvalue is not real");
                warn!("{msg}");
                warnings.push(msg);
                continue;
            }
            Err(e) => return Err(e),
        };
        if !(lead.simple && lead.unique_modulus) {
            let msg = format!("candidate {word} has a repeated leading eigenvalue");
            warn!("{msg}");
            warnings.push(msg);
        }
        if let Some(prev) = candidates.iter().find(|c| collinear(&c.vector, &lead.vector)) {
            let msg = format!(
                "candidate {word} dropped: its leading eigenvector coincides with that of {}",
                prev.word
            );
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        let adjoint = linalg::adjoint_vector(&p, lead.lambda, &lead.vector)?;
        candidates.push(Candidate {
            word,
            averaged_radius: r,
            lambda: lead.lambda,
            vector: lead.vector,
            adjoint,
            simple_leader: lead.simple && lead.unique_modulus,
            near,
        });
    }
    if candidates.iter().all(|c| c.near) {
        return Err(Error::NoCandidate("all maximal products have complex leading eigenvalues".into()));
    }
    Ok(CandidateSet {
        candidates,
        rho_c: best,
        warnings,
    })
}

fn collinear(a: &Vector, b: &Vector) -> bool {
    let c = a.dot(b).abs() / (a.norm() * b.norm());
    c >= 1.0 - 1e-12
}

#[derive(Debug, Clone)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_word: ProductWord,
    pub upper_length: usize,
}

/// Lower bound from averaged spectral radii of simple necklaces up to
/// length `k`; upper bound from averaged spectral norms of all words of
/// each length up to `l`, minimized over the length.
pub fn bracket(family: &MatrixFamily, k: usize, l: usize) -> Result<JsrBounds> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidInput("bracket lengths must be positive".into()));
    }
    let mut lower = 0.0;
    let mut lower_word = ProductWord::new(vec![0]);
    for w in simple_necklaces(family.len(), k) {
        let r = averaged_radius(family, &w)?;
        if r > lower {
            lower = r;
            lower_word = w;
        }
    }
    let mut worst = vec![0.0_f64; l + 1];
    let d = family.dim();
    let mut stack = vec![(linalg::Matrix::identity(d, d), 0usize)];
    while let Some((p, depth)) = stack.pop() {
        if depth == l {
            continue;
        }
        for a in family.iter() {
            let q = a * &p;
            let n = linalg::norm_2(&q);
            worst[depth + 1] = worst[depth + 1].max(n);
            stack.push((q, depth + 1));
        }
    }
    let (upper_length, upper) = (1..=l)
        .map(|len| (len, worst[len].powf(1.0 / len as f64)))
        .fold((1, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    Ok(JsrBounds {
        lower,
        upper,
        lower_word,
        upper_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn fam(ms: &[&[f64]]) -> MatrixFamily {
        MatrixFamily::new(ms.iter().map(|m| Matrix::from_row_slice(2, 2, m)).collect()).unwrap()
    }

    #[test]
    fn triangular_pair_has_two_unit_candidates() {
        let f = fam(&[&[1.0, -0.125, 0.0, 0.5], &[0.5, 0.0, 1.0, 1.0]]);
        let c = search_candidates(&f, &CandidateOptions::default()).unwrap();
        assert!((c.rho_c - 1.0).abs() < 1e-12);
        let words: Vec<Vec<usize>> = c.candidates.iter().map(|c| c.word.letters.clone()).collect();
        assert_eq!(words, vec![vec![0], vec![1]]);
        for cand in &c.candidates {
            assert!((cand.adjoint.dot(&cand.vector) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_only_family_is_rejected() {
        let f = fam(&[&[0.0, -1.0, 1.0, 0.0]]);
        assert!(matches!(
            search_candidates(&f, &CandidateOptions::default()),
            Err(Error::NoCandidate(_))
        ));
    }

    #[test]
    fn nilpotent_family_is_rejected() {
        let f = fam(&[&[0.0, 1.0, 0.0, 0.0]]);
        assert!(search_candidates(&f, &CandidateOptions::default()).is_err());
    }

    #[test]
    fn bracket_of_single_symmetric_matrix_is_tight() {
        let f = fam(&[&[2.0, 1.0, 1.0, 2.0]]);
        let b = bracket(&f, 3, 3).unwrap();
        assert!((b.lower - 3.0).abs() < 1e-12 && (b.upper - 3.0).abs() < 1e-12);
    }
}
