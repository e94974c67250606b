//! Dense two-phase revised simplex and the absolute-convex-hull gauge.
//!
//! The basis is refactorized from scratch at every pivot, which keeps
//! the small problems met here (tens of rows) accurate without update
//! bookkeeping. Pricing is Dantzig with a switch to Bland's rule after a
//! run of pivots that do not improve the best objective. The ratio test is
//! Harris's two-pass rule. If roundoff still keeps a phase from improving
//! for long, it stops on the best basis seen.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub const MAX_PIVOTS: usize = 1_000_000;
/// Non-improving pivots before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;
/// Non-improving pivots after which a phase stops on its best basis.
const STALL_BASE: usize = 2_000;
const STALL_PER_ROW: usize = 50;
/// Negative basic values tolerated in a basis kept as the best so far.
const FEAS_DRIFT: f64 = 1e-9;
const OPT_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
/// Artificial mass treated as zero when ending phase one.
const ROUNDOFF_FEAS: f64 = 1e-13;
/// Primal infeasibility a ratio-test step may introduce, relative to `b`.
const HARRIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable `(lower, upper)`; infinite values mean unbounded.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// All variables default to `x >= 0`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
        self
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

enum Outcome {
    Optimal(Vector),
    Infeasible,
    Unbounded,
}

/// min c.z subject to A z = b, z >= 0.
fn simplex(a: &Matrix, b: &Vector, c: &Vector, feas_tol: f64) -> Result<Outcome> {
    let (m, n) = a.shape();
    if m == 0 {
        return Ok(if c.iter().any(|&v| v < -OPT_TOL) {
            Outcome::Unbounded
        } else {
            Outcome::Optimal(Vector::zeros(n))
        });
    }
    // Flip rows so that b >= 0, then artificials give a feasible start.
    let mut a = a.clone();
    let mut b = b.clone();
    for i in 0..m {
        if b[i] < 0.0 {
            b[i] = -b[i];
            a.row_mut(i).neg_mut();
        }
    }
    let mut s = Simplex {
        a: &a,
        b: &b,
        m,
        n,
        basis: (n..n + m).collect(),
        pivots: 0,
        b_scale: b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs())),
    };
    let mut phase1 = Vector::zeros(n + m);
    for j in n..n + m {
        phase1[j] = 1.0;
    }
    if let PhaseEnd::Unbounded = s.run(&phase1, true)? {
        return Err(Error::LpStatus("unbounded in phase one".into()));
    }
    let xb = s.basic_values()?;
    let infeas: f64 = s
        .basis
        .iter()
        .zip(xb.iter())
        .filter(|(&j, _)| j >= n)
        .map(|(_, &v)| v.max(0.0))
        .sum();
    let scale = b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if infeas > feas_tol * scale {
        return Ok(Outcome::Infeasible);
    }
    s.drive_out_artificials()?;

    let mut cost = Vector::zeros(n + m);
    cost.rows_mut(0, n).copy_from(c);
    if let PhaseEnd::Unbounded = s.run(&cost, false)? {
        return Ok(Outcome::Unbounded);
    }
    let xb = s.basic_values()?;
    // Basic values are returned signed: clamping roundoff negatives to zero
    // would break A z = b, which callers rely on more than on z >= 0.
    let mut z = Vector::zeros(n);
    for (k, &j) in s.basis.iter().enumerate() {
        if j < n {
            z[j] = xb[k];
        }
    }
    Ok(Outcome::Optimal(z))
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    a: &'a Matrix,
    b: &'a Vector,
    m: usize,
    n: usize,
    basis: Vec<usize>,
    pivots: usize,
    b_scale: f64,
}

impl Simplex<'_> {
    fn column(&self, j: usize) -> Vector {
        if j < self.n {
            self.a.column(j).into_owned()
        } else {
            let mut e = Vector::zeros(self.m);
            e[j - self.n] = 1.0;
            e
        }
    }

    fn basis_matrix(&self) -> Matrix {
        let mut bm = Matrix::zeros(self.m, self.m);
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                bm.set_column(k, &self.a.column(j));
            } else {
                bm[(j - self.n, k)] = 1.0;
            }
        }
        bm
    }

    /// Basic solution with one step of iterative refinement.
    fn basic_values(&self) -> Result<Vector> {
        let bm = self.basis_matrix();
        let lu = bm.clone().lu();
        let singular = || Error::LpStatus("singular basis".into());
        let mut xb = lu.solve(self.b).ok_or_else(singular)?;
        let r = self.b - &bm * &xb;
        xb += lu.solve(&r).ok_or_else(singular)?;
        Ok(xb)
    }

    fn run(&mut self, cost: &Vector, phase_one: bool) -> Result<PhaseEnd> {
        let (m, n) = (self.m, self.n);
        let mut in_basis = vec![false; n + m];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        // Pivots since the objective last improved on its best value.
        let mut stalled = 0usize;
        let mut best_objective = f64::INFINITY;
        let mut best_basis = self.basis.clone();
        let stall_limit = STALL_BASE + STALL_PER_ROW * m;
        // False while re-pricing the same basis after a rejected column.
        let mut fresh = true;
        // Phase one is bounded below, so a column without a pivot entry
        // priced as improving is roundoff; it sits out until the next pivot.
        let mut rejected = vec![false; n + m];
        loop {
            self.pivots += 1;
            if self.pivots > MAX_PIVOTS {
                return Err(Error::LpStall {
                    pivots: self.pivots - 1,
                });
            }
            let bm = self.basis_matrix();
            let lu = bm.clone().lu();
            let xb = lu
                .solve(self.b)
                .ok_or_else(|| Error::LpStatus("singular basis".into()))?;
            let cb = Vector::from_iterator(m, self.basis.iter().map(|&j| cost[j]));
            let y = bm
                .transpose()
                .lu()
                .solve(&cb)
                .ok_or_else(|| Error::LpStatus("singular basis".into()))?;
            let objective = cb.dot(&xb);
            if fresh {
                fresh = false;
                let feasible = xb.iter().all(|&v| v >= -FEAS_DRIFT * self.b_scale);
                let improved = !best_objective.is_finite()
                    || objective < best_objective - 1e-12 * (1.0 + best_objective.abs());
                if feasible && improved {
                    best_objective = objective;
                    best_basis.clone_from(&self.basis);
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= stall_limit {
                        // Roundoff cycling at a degenerate optimum: keep the
                        // best basis seen, feasible and optimal to roundoff.
                        self.basis = best_basis;
                        return Ok(PhaseEnd::Optimal);
                    }
                }
            }
            if phase_one {
                // Drifted negative basics can cancel real infeasibility in
                // the signed sum, so only the positive part counts here.
                let residual: f64 = cb.iter().zip(xb.iter()).map(|(c, v)| c * v.max(0.0)).sum();
                if residual <= ROUNDOFF_FEAS * self.b_scale {
                    return Ok(PhaseEnd::Optimal);
                }
            }
            let reduced = cost.rows(0, n) - self.a.tr_mul(&y);
            // Once triggered, Bland's rule stays on for the rest of the phase:
            // tiny positive steps would otherwise let Dantzig pricing cycle.
            let bland = stalled >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..n + m {
                if in_basis[j] || rejected[j] {
                    continue;
                }
                if j >= n && !phase_one {
                    continue;
                }
                let d = if j < n { reduced[j] } else { cost[j] - y[j - n] };
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let u = lu
                .solve(&self.column(q))
                .ok_or_else(|| Error::LpStatus("singular basis".into()))?;
            let umax = u.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
            let tol = PIVOT_TOL * umax;
            // Harris two-pass ratio test: bound the step with a small
            // feasibility allowance, then take the largest pivot under it.
            let ratio_of = |i: usize| -> Option<f64> {
                if !phase_one && self.basis[i] >= n && u[i].abs() > tol {
                    // A zero-valued artificial left in the basis must not move.
                    Some(0.0)
                } else if u[i] > tol {
                    Some(xb[i].max(0.0) / u[i])
                } else {
                    None
                }
            };
            let slack = HARRIS_TOL * self.b_scale;
            let mut bound = f64::INFINITY;
            for i in 0..m {
                if let Some(ratio) = ratio_of(i) {
                    let relaxed = if ratio == 0.0 { 0.0 } else { (xb[i].max(0.0) + slack) / u[i] };
                    bound = bound.min(relaxed);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let Some(ratio) = ratio_of(i) else { continue };
                if ratio > bound {
                    continue;
                }
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best_ratio)) => {
                        let better = if bland {
                            ratio < best_ratio
                                || ((ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs())
                                    && self.basis[i] < self.basis[r])
                        } else {
                            u[i].abs() > u[r].abs()
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((r, best_ratio))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                if phase_one {
                    rejected[q] = true;
                    self.pivots -= 1;
                    continue;
                }
                return Ok(PhaseEnd::Unbounded);
            };
            rejected.iter_mut().for_each(|x| *x = false);
            fresh = true;
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            self.basis[r] = q;
        }
    }

    fn drive_out_artificials(&mut self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        for r in 0..m {
            if self.basis[r] < n {
                continue;
            }
            let bt = self.basis_matrix().transpose();
            let mut e = Vector::zeros(m);
            e[r] = 1.0;
            let Some(row) = bt.lu().solve(&e) else {
                continue;
            };
            let alphas = self.a.tr_mul(&row);
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.basis.contains(&j) {
                    continue;
                }
                let v = alphas[j].abs();
                if v > PIVOT_TOL && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                self.basis[r] = j;
            }
        }
        Ok(())
    }
}

/// Solves a general LP with bounds and mixed relations.
pub fn solve(p: &LpProblem, feas_tol: f64) -> Result<LpSolution> {
    let nv = p.objective.len();
    if p.bounds.len() != nv {
        return Err(Error::DimensionMismatch("bounds length".into()));
    }
    for c in &p.constraints {
        if c.coeffs.len() != nv {
            return Err(Error::DimensionMismatch(format!(
                "constraint has {} coefficients for {} variables",
                c.coeffs.len(),
                nv
            )));
        }
    }
    if p.objective.iter().any(|v| !v.is_finite())
        || p.constraints.iter().any(|c| !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput("non-finite LP data".into()));
    }
    for &(lo, hi) in &p.bounds {
        if lo > hi {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: vec![],
                objective: f64::NAN,
            });
        }
    }

    // x_j = offset_j + sum_k sign_k z_k over its standard columns.
    let mut map: Vec<(f64, Vec<(usize, f64)>)> = Vec::with_capacity(nv);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &p.bounds {
        if lo.is_finite() {
            map.push((lo, vec![(ncols, 1.0)]));
            if hi.is_finite() {
                extra_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            map.push((hi, vec![(ncols, -1.0)]));
            ncols += 1;
        } else {
            map.push((0.0, vec![(ncols, 1.0), (ncols + 1, -1.0)]));
            ncols += 2;
        }
    }
    let n_slack = p
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count()
        + extra_rows.len();
    let rows = p.constraints.len() + extra_rows.len();
    let total = ncols + n_slack;
    let mut a = Matrix::zeros(rows, total);
    let mut b = Vector::zeros(rows);
    let mut slack = ncols;
    for (i, con) in p.constraints.iter().enumerate() {
        let mut rhs = con.rhs;
        for (j, &coef) in con.coeffs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            rhs -= coef * map[j].0;
            for &(k, sgn) in &map[j].1 {
                a[(i, k)] += coef * sgn;
            }
        }
        b[i] = rhs;
        match con.relation {
            Relation::Le => {
                a[(i, slack)] = 1.0;
                slack += 1;
            }
            Relation::Ge => {
                a[(i, slack)] = -1.0;
                slack += 1;
            }
            Relation::Eq => {}
        }
    }
    for (e, &(k, width)) in extra_rows.iter().enumerate() {
        let i = p.constraints.len() + e;
        a[(i, k)] = 1.0;
        a[(i, slack)] = 1.0;
        slack += 1;
        b[i] = width;
    }
    let flip = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut c = Vector::zeros(total);
    for (j, &obj) in p.objective.iter().enumerate() {
        for &(k, sgn) in &map[j].1 {
            c[k] += flip * obj * sgn;
        }
    }
    match simplex(&a, &b, &c, feas_tol)? {
        Outcome::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            values: vec![],
            objective: f64::NAN,
        }),
        Outcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: vec![],
            objective: if p.sense == Sense::Maximize {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
        }),
        Outcome::Optimal(z) => {
            let values: Vec<f64> = map
                .iter()
                .map(|(off, cols)| off + cols.iter().map(|&(k, s)| s * z[k]).sum::<f64>())
                .collect();
            let objective = values.iter().zip(&p.objective).map(|(x, c)| x * c).sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                values,
                objective,
            })
        }
    }
}

/// Outcome of a gauge query against the absolute convex hull of a point set.
#[derive(Debug, Clone)]
pub struct Membership {
    /// Minimal l1 weight representing the query; infinite if outside the span.
    pub t_star: f64,
    pub interior: bool,
    pub boundary: bool,
    /// Signed weights on the points, when representable.
    pub coefficients: Vec<f64>,
}

impl Membership {
    fn from_t(t_star: f64, coefficients: Vec<f64>, delta_int: f64) -> Self {
        Membership {
            t_star,
            interior: t_star <= 1.0 - delta_int,
            boundary: (t_star - 1.0).abs() <= delta_int,
            coefficients,
        }
    }
}

/// Gauge of `x` with respect to `absco(points)`:
/// min sum(c+ + c-) subject to V (c+ - c-) = x, c+, c- >= 0.
pub fn absco_membership(
    points: &[Vector],
    x: &Vector,
    delta_int: f64,
    feas_tol: f64,
) -> Result<Membership> {
    let d = x.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch("points and query differ in dimension".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(Membership::from_t(0.0, vec![0.0; points.len()], delta_int));
    }
    if points.is_empty() {
        return Ok(Membership::from_t(f64::INFINITY, vec![], delta_int));
    }
    // Columns are scaled to max-norm 1, with the weights carrying the
    // scale; vertex sets spanning several orders of magnitude otherwise
    // lose digits in the basis solves.
    let n = points.len();
    let scales: Vec<f64> = points
        .iter()
        .map(|p| {
            let s = p.amax();
            if s > 0.0 { s } else { 1.0 }
        })
        .collect();
    let mut a = Matrix::zeros(d, 2 * n);
    let mut c = Vector::zeros(2 * n);
    for (j, p) in points.iter().enumerate() {
        let col = p / scales[j];
        a.set_column(j, &col);
        a.set_column(n + j, &(-col));
        c[j] = 1.0 / scales[j];
        c[n + j] = 1.0 / scales[j];
    }
    match simplex(&a, x, &c, feas_tol)? {
        Outcome::Optimal(z) => {
            let coeffs: Vec<f64> = (0..n).map(|j| (z[j] - z[n + j]) / scales[j]).collect();
            let t = (0..n).map(|j| (z[j].abs() + z[n + j].abs()) / scales[j]).sum();
            Ok(Membership::from_t(t, coeffs, delta_int))
        }
        Outcome::Infeasible => Ok(Membership::from_t(f64::INFINITY, vec![], delta_int)),
        Outcome::Unbounded => Err(Error::LpStatus("gauge program unbounded".into())),
    }
}

/// The same gauge through the dual program:
/// max <y, x> subject to |<y, v_j>| <= 1.
pub fn absco_gauge_dual(points: &[Vector], x: &Vector, feas_tol: f64) -> Result<f64> {
    let d = x.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch("points and query differ in dimension".into()));
    }
    let mut lp = LpProblem::new(Sense::Maximize, x.iter().copied().collect());
    for i in 0..d {
        lp.bound(i, f64::NEG_INFINITY, f64::INFINITY);
    }
    for p in points {
        let row: Vec<f64> = p.iter().copied().collect();
        lp.constrain(row.clone(), Relation::Le, 1.0);
        lp.constrain(row, Relation::Ge, -1.0);
    }
    let sol = solve(&lp, feas_tol)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        LpStatus::Unbounded => Ok(f64::INFINITY),
        LpStatus::Infeasible => Err(Error::LpStatus("dual gauge program infeasible".into())),
    }
}
