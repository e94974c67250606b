//! End-to-end computation: candidates, balancing, conditioning, polytope.

use log::{info, warn};

use crate::balancer::{self, Balancing, BalancingVector, ProjectionTable};
use crate::candidates::{candidates_from_words, search_candidates, CandidateOptions, CandidateSet};
use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::Vector;
use crate::polytope::{self, JsrCertificate, PolytopeOptions, RunStatus};
use crate::words::ProductWord;

#[derive(Debug, Clone)]
pub struct FlatnessOptions {
    pub epsilon: f64,
    /// Levels grown before measuring axis extents.
    pub probe_depth: usize,
    /// Depth of the reach computation that scales each extra vertex.
    pub reach_depth: usize,
}

impl Default for FlatnessOptions {
    fn default() -> Self {
        FlatnessOptions {
            epsilon: 0.01,
            probe_depth: 15,
            reach_depth: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComputeOptions {
    pub candidates: CandidateOptions,
    pub polytope: PolytopeOptions,
    pub k_balance: usize,
    pub k_balance_max: usize,
    pub k_balance_step: usize,
    pub snap: bool,
    /// Skip balancing and use these factors.
    pub alpha: Option<Vec<f64>>,
    /// Skip the candidate search and use these words.
    pub words: Option<Vec<ProductWord>>,
    pub extras: Vec<Vector>,
    /// Add extra vertices along flat axes automatically.
    pub flatness: Option<FlatnessOptions>,
    /// Work with the transposed family; the JSR is the same.
    pub adjoint: bool,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        ComputeOptions {
            candidates: CandidateOptions::default(),
            polytope: PolytopeOptions::default(),
            k_balance: 10,
            k_balance_max: 25,
            k_balance_step: 5,
            snap: true,
            alpha: None,
            words: None,
            extras: Vec::new(),
            flatness: None,
            adjoint: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComputeReport {
    pub certificate: JsrCertificate,
    pub candidates: CandidateSet,
    pub balancing: Option<BalancingVector>,
    pub table: Option<ProjectionTable>,
    pub extras: Vec<Vector>,
    pub warnings: Vec<String>,
    /// Polytope runs performed, including retries at larger depth.
    pub attempts: usize,
}

/// Balancing factors at the first depth from `k` on where the program is feasible.
pub fn balance_from(
    normalized: &MatrixFamily,
    cands: &CandidateSet,
    k: usize,
    opts: &ComputeOptions,
) -> Result<(ProjectionTable, BalancingVector)> {
    let mut k = k;
    loop {
        let table = balancer::projection_depth_k(normalized, cands, k, &opts.polytope)?;
        match balancer::solve_balancing(&table)? {
            Balancing::Admissible(b) => {
                let b = if opts.snap { balancer::snap(&b, &table) } else { b };
                return Ok((table, b));
            }
            Balancing::Infeasible(y0) => {
                warn!("balancing infeasible at depth {k} (margin {y0:.3e})");
                if k + opts.k_balance_step > opts.k_balance_max {
                    return Err(Error::Balancing(format!(
                        "no admissible factors up to depth {k}; the candidates may not be dominant"
                    )));
                }
                k += opts.k_balance_step;
            }
        }
    }
}

pub fn compute(family: &MatrixFamily, opts: &ComputeOptions) -> Result<ComputeReport> {
    let family = if opts.adjoint { family.transposed() } else { family.clone() };
    let cands = match &opts.words {
        Some(w) => candidates_from_words(&family, w, &opts.candidates)?,
        None => search_candidates(&family, &opts.candidates)?,
    };
    let mut warnings = cands.warnings.clone();
    if cands.candidates.iter().any(|c| c.lambda < 0.0) {
        warnings.push("a candidate has leading eigenvalue -1 after normalization".into());
    }
    info!(
        "rho_c = {:.15}, candidates: {}",
        cands.rho_c,
        cands.words().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
    );
    let normalized = family.scaled(1.0 / cands.rho_c);
    let r = cands.len();
    let mut k = opts.k_balance;
    let mut attempts = 0;
    loop {
        let (table, balancing) = match (&opts.alpha, r) {
            (Some(a), _) => {
                if a.len() != r {
                    return Err(Error::DimensionMismatch(format!(
                        "{} balancing factors for {r} candidates",
                        a.len()
                    )));
                }
                (None, None)
            }
            (None, 1) => (None, None),
            (None, _) => {
                let (t, b) = balance_from(&normalized, &cands, k, opts)?;
                k = t.k;
                (Some(t), Some(b))
            }
        };
        let alpha = match (&opts.alpha, &balancing) {
            (Some(a), _) => a.clone(),
            (None, Some(b)) => b.alpha.clone(),
            (None, None) => vec![1.0; r],
        };
        let mut extras = opts.extras.clone();
        if let Some(flat) = &opts.flatness {
            extras.extend(auto_extras(&normalized, &cands, &alpha, flat, &opts.polytope, &mut warnings)?);
        }
        attempts += 1;
        let cert = polytope::run(&family, &cands, &alpha, &extras, &opts.polytope)?;
        let retry = cert.status == RunStatus::MaxIterations
            && balancing.is_some()
            && k + opts.k_balance_step <= opts.k_balance_max;
        if !retry {
            if cert.status == RunStatus::MaxIterations {
                warnings.push(format!("no invariant polytope within {} levels", opts.polytope.k_max));
            }
            return Ok(ComputeReport {
                certificate: cert,
                candidates: cands,
                balancing,
                table,
                extras,
                warnings,
                attempts,
            });
        }
        k += opts.k_balance_step;
        warn!("polytope did not close; rebalancing at depth {k}");
    }
}

fn auto_extras(
    normalized: &MatrixFamily,
    cands: &CandidateSet,
    alpha: &[f64],
    flat: &FlatnessOptions,
    popts: &PolytopeOptions,
    warnings: &mut Vec<String>,
) -> Result<Vec<Vector>> {
    let seeds = polytope::root_seeds(normalized, cands, alpha)?;
    let probe = PolytopeOptions {
        k_max: flat.probe_depth,
        ..popts.clone()
    };
    let g = polytope::grow(normalized, seeds, &cands.words(), &probe)?;
    let flagged: Vec<usize> = polytope::flatness_report(&g.tree.points(), flat.epsilon)
        .into_iter()
        .map(|(i, _)| i)
        .collect();
    if flagged.is_empty() {
        return Ok(Vec::new());
    }
    info!("flat axes: {:?}", flagged.iter().map(|i| i + 1).collect::<Vec<_>>());
    if flat.epsilon >= 1.0 {
        warnings.push("flatness epsilon >= 1 gives extra vertices that can reach the roots".into());
    }
    polytope::propose_extras(normalized, cands, &flagged, flat.epsilon, flat.reach_depth, popts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn triangular_pair_certified_with_computed_balance() {
        let f = MatrixFamily::new(vec![
            Matrix::from_row_slice(2, 2, &[1.0, -0.125, 0.0, 0.5]),
            Matrix::from_row_slice(2, 2, &[0.5, 0.0, 1.0, 1.0]),
        ])
        .unwrap();
        let rep = compute(&f, &ComputeOptions::default()).unwrap();
        assert_eq!(rep.certificate.status, RunStatus::Terminated);
        assert!(rep.certificate.iterations <= 1);
        let b = rep.balancing.unwrap();
        assert!(balancer::is_admissible(&b.alpha, rep.table.as_ref().unwrap()));
    }
}
