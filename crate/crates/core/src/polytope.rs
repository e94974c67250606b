//! Invariant polytope construction from balanced roots.
//!
//! Starting from the scaled root cycles and any extra vertices, every
//! newly added vertex is mapped by each normalized generator. Images in
//! the interior of the current absolute convex hull are discarded; the
//! rest become vertices. The run terminates once a whole level adds
//! nothing, at which point the hull is invariant and the normalizing
//! constant is the joint spectral radius.

use std::collections::HashSet;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::{Matrix, Vector};
use crate::lp::absco_membership;
use crate::words::ProductWord;

#[derive(Debug, Clone)]
pub struct PolytopeOptions {
    pub k_max: usize,
    /// Gauge margin below 1 that counts as interior.
    pub delta_int: f64,
    /// Phase-one feasibility tolerance of the membership programs.
    pub delta_feas: f64,
    /// Relative distance under which an image coinciding with an existing
    /// vertex (up to sign) is discarded. Zero means bitwise equality.
    pub dup_rel: f64,
    /// Test a whole level against a snapshot in parallel, then merge.
    pub parallel: bool,
}

impl Default for PolytopeOptions {
    fn default() -> Self {
        PolytopeOptions {
            k_max: 50,
            delta_int: 1e-8,
            delta_feas: 1e-10,
            dup_rel: 0.0,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// Position `position` on the cycle of candidate `candidate`.
    Root { candidate: usize, position: usize },
    Extra { index: usize },
    Image,
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: usize,
    pub point: Vector,
    pub level: usize,
    pub parent: Option<usize>,
    pub letter: Option<usize>,
    pub origin: Origin,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub added: usize,
    pub total: usize,
    #[serde(with = "infinite_as_null")]
    pub max_t_star: f64,
}

/// JSON has no infinity; store it as `null`.
mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone)]
pub struct VertexTree {
    pub vertices: Vec<Vertex>,
    /// Ids added at the last completed level.
    pub alive: Vec<usize>,
    pub level: usize,
    pub levels: Vec<LevelStats>,
}

impl VertexTree {
    pub fn points(&self) -> Vec<Vector> {
        self.vertices.iter().map(|v| v.point.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Terminated,
    MaxIterations,
}

/// A starting point of a growth run.
#[derive(Debug, Clone)]
pub struct Seed {
    pub point: Vector,
    pub origin: Origin,
}

/// Result of a growth run.
#[derive(Debug, Clone)]
pub struct Growth {
    pub tree: VertexTree,
    pub status: RunStatus,
    /// Level at which nothing was added, or `k_max`.
    pub iterations: usize,
}

struct DupIndex {
    exact: HashSet<Vec<u64>>,
}

impl DupIndex {
    fn key(p: &Vector) -> Vec<u64> {
        // Canonical sign: first nonzero entry positive.
        let s = p.iter().find(|x| **x != 0.0).map(|x| x.signum()).unwrap_or(1.0);
        p.iter().map(|x| (x * s + 0.0).to_bits()).collect()
    }

    fn insert(&mut self, p: &Vector) {
        self.exact.insert(Self::key(p));
    }

    fn contains(&self, p: &Vector, points: &[Vector], rel: f64) -> bool {
        if rel <= 0.0 {
            return self.exact.contains(&Self::key(p));
        }
        let scale = crate::linalg::vec_norm_inf(p);
        points.iter().any(|u| {
            (p - u).iter().all(|x| x.abs() <= rel * scale) || (p + u).iter().all(|x| x.abs() <= rel * scale)
        })
    }
}

/// Grows a vertex set from `seeds` under `family` (already normalized).
///
/// `cycles[c]` is the word of candidate `c`; the image of a root point
/// under the next letter of its own cycle is the next root point and is
/// not tested.
pub fn grow(
    family: &MatrixFamily,
    seeds: Vec<Seed>,
    cycles: &[ProductWord],
    opts: &PolytopeOptions,
) -> Result<Growth> {
    let d = family.dim();
    if let Some(s) = seeds.iter().find(|s| s.point.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "seed of length {} for dimension {d}",
            s.point.len()
        )));
    }
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut points: Vec<Vector> = Vec::new();
    let mut dups = DupIndex {
        exact: HashSet::new(),
    };
    for s in seeds {
        dups.insert(&s.point);
        points.push(s.point.clone());
        vertices.push(Vertex {
            id: vertices.len(),
            point: s.point,
            level: 0,
            parent: None,
            letter: None,
            origin: s.origin,
        });
    }
    let mut alive: Vec<usize> = (0..vertices.len()).collect();
    let mut levels = vec![LevelStats {
        level: 0,
        added: vertices.len(),
        total: vertices.len(),
        max_t_star: 0.0,
    }];
    let skip_letter = |v: &Vertex| -> Option<usize> {
        match v.origin {
            Origin::Root {
                candidate,
                position,
            } => cycles.get(candidate).map(|w| w.letters[position]),
            _ => None,
        }
    };

    for k in 1..=opts.k_max {
        let mut jobs: Vec<(usize, usize, Vector)> = Vec::new();
        for &id in &alive {
            let skip = skip_letter(&vertices[id]);
            for (j, a) in family.iter().enumerate() {
                if skip == Some(j) {
                    continue;
                }
                jobs.push((id, j, a * &vertices[id].point));
            }
        }
        // Parallel screening against the frozen level-start hull; a point
        // interior there stays interior as the hull grows.
        let screened: Vec<Option<f64>> = if opts.parallel {
            let snapshot = points.clone();
            jobs.par_iter()
                .map(|(_, _, x)| {
                    absco_membership(&snapshot, x, opts.delta_int, opts.delta_feas)
                        .map(|m| if m.interior { Some(m.t_star) } else { None })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![None; jobs.len()]
        };
        let mut added = Vec::new();
        let mut max_t: f64 = 0.0;
        for ((parent, letter, x), pre) in jobs.into_iter().zip(screened) {
            if let Some(t) = pre {
                max_t = max_t.max(t);
                continue;
            }
            let m = absco_membership(&points, &x, opts.delta_int, opts.delta_feas)?;
            if m.t_star.is_finite() {
                max_t = max_t.max(m.t_star);
            } else {
                max_t = f64::INFINITY;
            }
            if m.interior {
                continue;
            }
            if dups.contains(&x, &points, opts.dup_rel) {
                continue;
            }
            debug!("level {k}: vertex {} from {parent} by letter {}", vertices.len(), letter + 1);
            dups.insert(&x);
            points.push(x.clone());
            let id = vertices.len();
            vertices.push(Vertex {
                id,
                point: x,
                level: k,
                parent: Some(parent),
                letter: Some(letter),
                origin: Origin::Image,
            });
            added.push(id);
        }
        info!(
            "level {k}: {} new, {} total, max t* {:.12}",
            added.len(),
            vertices.len(),
            max_t
        );
        levels.push(LevelStats {
            level: k,
            added: added.len(),
            total: vertices.len(),
            max_t_star: max_t,
        });
        alive = added;
        if alive.is_empty() {
            return Ok(Growth {
                tree: VertexTree {
                    vertices,
                    alive,
                    level: k,
                    levels,
                },
                status: RunStatus::Terminated,
                iterations: k,
            });
        }
    }
    Ok(Growth {
        tree: VertexTree {
            vertices,
            alive,
            level: opts.k_max,
            levels,
        },
        status: RunStatus::MaxIterations,
        iterations: opts.k_max,
    })
}

/// Root cycles of every candidate scaled by `alpha`: position `l` holds
/// the image of `alpha_c v_c` under the first `l` letters of the word.
pub fn root_seeds(normalized: &MatrixFamily, cands: &CandidateSet, alpha: &[f64]) -> Result<Vec<Seed>> {
    if alpha.len() != cands.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} balancing factors for {} candidates",
            alpha.len(),
            cands.len()
        )));
    }
    let mut seeds = Vec::new();
    for (c, &a) in alpha.iter().enumerate() {
        seeds.extend(single_root_seeds(normalized, cands, c, a));
    }
    Ok(seeds)
}

pub fn single_root_seeds(normalized: &MatrixFamily, cands: &CandidateSet, c: usize, scale: f64) -> Vec<Seed> {
    let cand = &cands.candidates[c];
    let mut p = &cand.vector * scale;
    let mut out = Vec::with_capacity(cand.word.len());
    for (position, &letter) in cand.word.letters.iter().enumerate() {
        out.push(Seed {
            point: p.clone(),
            origin: Origin::Root {
                candidate: c,
                position,
            },
        });
        p = &normalized.matrices()[letter] * p;
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsrCertificate {
    pub status: RunStatus,
    /// The normalizing constant; certified as the JSR when terminated,
    /// otherwise only a lower bound.
    pub jsr: f64,
    pub smp_words: Vec<ProductWord>,
    pub near_words: Vec<ProductWord>,
    /// Leading eigenvalue of each normalized candidate product.
    pub lambdas: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Vertices in the coordinates of the normalized family.
    pub vertices: Vec<Vec<f64>>,
    pub vertex_levels: Vec<usize>,
    pub iterations: usize,
    /// Infinite (stored as `null`) unless the run terminated.
    #[serde(with = "infinite_as_null")]
    pub max_invariance_residual: f64,
    pub extra_vertices: Vec<Vec<f64>>,
    pub levels: Vec<LevelStats>,
}

impl JsrCertificate {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_points(&self) -> Vec<Vector> {
        self.vertices.iter().map(|v| Vector::from_column_slice(v)).collect()
    }
}

/// Full construction from candidates, balancing factors and extras.
pub fn run(
    family: &MatrixFamily,
    cands: &CandidateSet,
    alpha: &[f64],
    extras: &[Vector],
    opts: &PolytopeOptions,
) -> Result<JsrCertificate> {
    let normalized = family.scaled(1.0 / cands.rho_c);
    let mut seeds = root_seeds(&normalized, cands, alpha)?;
    for (index, x) in extras.iter().enumerate() {
        seeds.push(Seed {
            point: x.clone(),
            origin: Origin::Extra { index },
        });
    }
    let growth = grow(&normalized, seeds, &cands.words(), opts)?;
    let points = growth.tree.points();
    let residual = if growth.status == RunStatus::Terminated {
        verify_invariance(&normalized, &points, opts.delta_feas)?
    } else {
        f64::INFINITY
    };
    Ok(JsrCertificate {
        status: growth.status,
        jsr: cands.rho_c,
        smp_words: cands.tied().map(|c| c.word.clone()).collect(),
        near_words: cands.candidates.iter().filter(|c| c.near).map(|c| c.word.clone()).collect(),
        lambdas: cands.candidates.iter().map(|c| c.lambda).collect(),
        alpha: alpha.to_vec(),
        vertices: points.iter().map(|p| p.iter().copied().collect()).collect(),
        vertex_levels: growth.tree.vertices.iter().map(|v| v.level).collect(),
        iterations: growth.iterations,
        max_invariance_residual: residual,
        extra_vertices: extras.iter().map(|p| p.iter().copied().collect()).collect(),
        levels: growth.tree.levels,
    })
}

/// Independent invariance check: for every vertex and generator a fresh
/// gauge program is solved and its weights are validated directly, so the
/// residual does not rely on the solver's reported objective.
///
/// Returns the largest `(sum |c| + ||V c - x||_inf / scale) - 1`, floored at 0.
pub fn verify_invariance(normalized: &MatrixFamily, points: &[Vector], feas_tol: f64) -> Result<f64> {
    if points.is_empty() {
        return Ok(f64::INFINITY);
    }
    let d = normalized.dim();
    let mut vmat = Matrix::zeros(d, points.len());
    for (j, p) in points.iter().enumerate() {
        vmat.set_column(j, p);
    }
    let min_scale = points
        .iter()
        .map(crate::linalg::vec_norm_inf)
        .fold(f64::INFINITY, f64::min)
        .max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for p in points {
        for a in normalized.iter() {
            let x = a * p;
            let m = absco_membership(points, &x, 0.0, feas_tol)?;
            if !m.t_star.is_finite() {
                return Ok(f64::INFINITY);
            }
            let c = Vector::from_column_slice(&m.coefficients);
            let weight: f64 = c.iter().map(|v| v.abs()).sum();
            let miss = crate::linalg::vec_norm_inf(&(&vmat * &c - &x)) / min_scale;
            worst = worst.max(weight + miss - 1.0);
        }
    }
    Ok(worst.max(0.0))
}

/// Largest coordinate magnitude per axis, over all stored vertices.
pub fn axis_extent(tree_points: &[Vector]) -> Vec<f64> {
    let d = tree_points.first().map(|p| p.len()).unwrap_or(0);
    (0..d)
        .map(|i| tree_points.iter().map(|p| p[i].abs()).fold(0.0, f64::max))
        .collect()
}

/// Axes (zero-based) whose projection length is below `eps`, with that length.
pub fn flatness_report(tree_points: &[Vector], eps: f64) -> Vec<(usize, f64)> {
    axis_extent(tree_points)
        .into_iter()
        .enumerate()
        .filter(|(_, q)| *q < eps)
        .collect()
}

/// Extra start points `eps / max_j q_j(e_i) * e_i` along the flagged
/// (zero-based) axes, using reach computed to depth `k`.
pub fn propose_extras(
    normalized: &MatrixFamily,
    cands: &CandidateSet,
    flagged: &[usize],
    eps: f64,
    k: usize,
    opts: &PolytopeOptions,
) -> Result<Vec<Vector>> {
    let d = normalized.dim();
    let mut out = Vec::with_capacity(flagged.len());
    for &i in flagged {
        if i >= d {
            return Err(Error::InvalidInput(format!("axis {} exceeds dimension {d}", i + 1)));
        }
        let e = Vector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 });
        let mut reach: f64 = 0.0;
        for j in 0..cands.len() {
            reach = reach.max(crate::balancer::q_of_point(normalized, cands, j, &e, k, opts)?);
        }
        if reach == 0.0 {
            return Err(Error::InvalidInput(format!(
                "axis {} is invisible to every adjoint direction; cannot scale an extra vertex",
                i + 1
            )));
        }
        out.push(e * (eps / reach));
    }
    Ok(out)
}
