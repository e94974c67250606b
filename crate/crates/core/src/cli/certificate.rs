//! Self-describing certificate documents and their independent check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::{self, Matrix};
use crate::pipeline::ComputeOptions;
use crate::polytope::{verify_invariance, JsrCertificate, RunStatus};
use crate::words::evaluate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub delta_int: f64,
    pub delta_feas: f64,
    pub eig_tol: f64,
    pub tau_cand: f64,
    pub epsilon_flat: Option<f64>,
    pub k_balance: usize,
    pub k_max: usize,
    pub n_bar: usize,
}

impl Tolerances {
    pub fn from_options(o: &ComputeOptions) -> Self {
        Tolerances {
            delta_int: o.polytope.delta_int,
            delta_feas: o.polytope.delta_feas,
            eig_tol: o.candidates.eig_tol,
            tau_cand: o.candidates.tau_cand,
            epsilon_flat: o.flatness.as_ref().map(|f| f.epsilon),
            k_balance: o.k_balance,
            k_max: o.polytope.k_max,
            n_bar: o.candidates.n_bar,
        }
    }
}

/// Matrices stored row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub labels: Vec<String>,
    pub matrices: Vec<Vec<Vec<f64>>>,
}

impl FamilyRecord {
    pub fn from_family(f: &MatrixFamily) -> Self {
        FamilyRecord {
            labels: f.labels().to_vec(),
            matrices: f
                .iter()
                .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
                .collect(),
        }
    }

    pub fn to_family(&self) -> Result<MatrixFamily> {
        let mats = self
            .matrices
            .iter()
            .map(|rows| {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch("stored matrix is not square".into()));
                }
                Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixFamily::with_labels(mats, self.labels.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub tool: String,
    pub version: String,
    pub tolerances: Tolerances,
    pub wall_time_s: f64,
    /// Content hash of the input family (before any transposition).
    pub input_hash: String,
    pub family: FamilyRecord,
    /// Vertices refer to the transposed family.
    pub adjoint: bool,
    pub warnings: Vec<String>,
    pub certificate: JsrCertificate,
}

impl CertificateFile {
    pub fn new(
        family: &MatrixFamily,
        opts: &ComputeOptions,
        certificate: JsrCertificate,
        warnings: Vec<String>,
        wall_time_s: f64,
    ) -> Self {
        CertificateFile {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            tolerances: Tolerances::from_options(opts),
            wall_time_s,
            input_hash: family.content_hash(),
            family: FamilyRecord::from_family(family),
            adjoint: opts.adjoint,
            warnings,
            certificate,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub terminated: bool,
    pub hash_ok: bool,
    pub residual: f64,
    pub residual_limit: f64,
    /// Largest relative gap between `rho(P)^(1/|P|)` of a recorded
    /// maximizing product and the recorded JSR.
    pub spectral_gap: f64,
    pub spectral_limit: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.terminated
            && self.hash_ok
            && self.residual <= self.residual_limit
            && self.spectral_gap <= self.spectral_limit
    }
}

/// Relative tolerance for the recorded spectral radii.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Rechecks a certificate from its own content. When `expected` is given,
/// the embedded family must hash to the same value, otherwise the check is
/// refused.
pub fn verify_certificate(file: &CertificateFile, expected: Option<&MatrixFamily>) -> Result<VerifyReport> {
    let family = file.family.to_family()?;
    let hash_ok = family.content_hash() == file.input_hash;
    if let Some(f) = expected {
        if f.content_hash() != file.input_hash {
            return Err(Error::InvalidInput(
                "family file does not match the certificate's input hash".into(),
            ));
        }
    }
    let cert = &file.certificate;
    let work = if file.adjoint { family.transposed() } else { family };
    if !(cert.jsr.is_finite() && cert.jsr > 0.0) {
        return Err(Error::InvalidInput("certificate has no positive JSR value".into()));
    }
    let normalized = work.scaled(1.0 / cert.jsr);
    let points = cert.vertex_points();
    if points.iter().any(|p| p.len() != work.dim()) {
        return Err(Error::DimensionMismatch("vertex dimension differs from the family".into()));
    }
    let residual = verify_invariance(&normalized, &points, file.tolerances.delta_feas)?;
    let mut spectral_gap: f64 = 0.0;
    for w in &cert.smp_words {
        let rho = linalg::spectral_radius(&evaluate(&work, w)?)?;
        let avg = rho.powf(1.0 / w.len() as f64);
        spectral_gap = spectral_gap.max((avg - cert.jsr).abs() / cert.jsr);
    }
    if cert.smp_words.is_empty() {
        spectral_gap = f64::INFINITY;
    }
    Ok(VerifyReport {
        terminated: cert.status == RunStatus::Terminated,
        hash_ok,
        residual,
        residual_limit: 10.0 * file.tolerances.delta_int,
        spectral_gap,
        spectral_limit: SPECTRAL_TOL,
    })
}
