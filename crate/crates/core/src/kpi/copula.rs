use nalgebra::{SMatrix, SVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Kpi, KPI_COUNT};
use crate::error::{Error, Result};

type Matrix = SMatrix<f64, KPI_COUNT, KPI_COUNT>;

const EIGEN_FLOOR: f64 = 1e-6;
/// Copula uniforms are kept this far away from 0 and 1 so inverse CDFs stay finite.
const UNIFORM_EPS: f64 = 1e-12;

/// One off-diagonal entry of the correlation matrix, as written in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub a: String,
    pub b: String,
    pub rho: f64,
}

impl CorrelationPair {
    fn new(a: Kpi, b: Kpi, rho: f64) -> Self {
        CorrelationPair {
            a: a.key().to_string(),
            b: b.key().to_string(),
            rho,
        }
    }

    pub fn defaults() -> Vec<CorrelationPair> {
        vec![
            CorrelationPair::new(Kpi::Delay, Kpi::Jitter, 0.7),
            CorrelationPair::new(Kpi::Delay, Kpi::Loss, 0.5),
            CorrelationPair::new(Kpi::Throughput, Kpi::Loss, -0.4),
            CorrelationPair::new(Kpi::Cpu, Kpi::Mem, 0.6),
            CorrelationPair::new(Kpi::Retrans, Kpi::Loss, 0.5),
        ]
    }
}

/// Gaussian-copula correlation structure over the ten KPIs.
///
/// Holds the repaired (positive definite, unit diagonal) matrix and its
/// Cholesky factor.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationModel {
    matrix: Matrix,
    factor: Matrix,
}

impl CorrelationModel {
    pub fn identity() -> Self {
        Self::from_matrix(Matrix::identity()).expect("identity is positive definite")
    }

    /// Builds the model from sparse pairs; unspecified entries are 0.
    pub fn from_pairs(pairs: &[CorrelationPair]) -> Result<Self> {
        let mut m = Matrix::identity();
        for (i, p) in pairs.iter().enumerate() {
            let field = format!("correlation.pairs[{i}]");
            let a = Kpi::from_key(&p.a)
                .ok_or_else(|| Error::config(&field, format!("unknown KPI `{}`", p.a)))?;
            let b = Kpi::from_key(&p.b)
                .ok_or_else(|| Error::config(&field, format!("unknown KPI `{}`", p.b)))?;
            if a == b {
                return Err(Error::config(field, "a pair must name two different KPIs"));
            }
            if !(p.rho.is_finite() && (-1.0..=1.0).contains(&p.rho)) {
                return Err(Error::config(field, format!("rho {} outside [-1, 1]", p.rho)));
            }
            m[(a.index(), b.index())] = p.rho;
            m[(b.index(), a.index())] = p.rho;
        }
        Self::from_matrix(m)
    }

    /// Validates a full matrix and repairs it to the nearest positive-definite
    /// correlation matrix by flooring eigenvalues.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        for i in 0..KPI_COUNT {
            if m[(i, i)] != 1.0 {
                return Err(Error::config("correlation", "diagonal entries must be exactly 1"));
            }
            for j in 0..KPI_COUNT {
                let v = m[(i, j)];
                if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::config("correlation", format!("entry ({i},{j}) = {v}")));
                }
                if v != m[(j, i)] {
                    return Err(Error::config("correlation", "matrix must be symmetric"));
                }
            }
        }
        let repaired = repair(m);
        let factor = repaired
            .cholesky()
            .ok_or_else(|| Error::config("correlation", "matrix is not positive definite after repair"))?
            .l();
        Ok(CorrelationModel {
            matrix: repaired,
            factor,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn entry(&self, a: Kpi, b: Kpi) -> f64 {
        self.matrix[(a.index(), b.index())]
    }
}

fn repair(m: Matrix) -> Matrix {
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().all(|&l| l >= EIGEN_FLOOR) {
        return m;
    }
    let floored = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let mut r = eig.eigenvectors * Matrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    // Back to unit diagonal, then force exact symmetry.
    let d = SVector::<f64, KPI_COUNT>::from_fn(|i, _| r[(i, i)].sqrt().recip());
    for i in 0..KPI_COUNT {
        for j in 0..KPI_COUNT {
            r[(i, j)] *= d[i] * d[j];
        }
    }
    let mut out = (r + r.transpose()) * 0.5;
    for i in 0..KPI_COUNT {
        out[(i, i)] = 1.0;
    }
    out
}

/// Draws ten marginally uniform values in (0, 1) whose dependence follows
/// a Gaussian copula with the model's correlation matrix.
pub fn gaussian_copula_sample<R: Rng + ?Sized>(model: &CorrelationModel, rng: &mut R) -> [f64; KPI_COUNT] {
    let z = SVector::<f64, KPI_COUNT>::from_fn(|_, _| rng.sample(StandardNormal));
    let y = model.factor * z;
    let std = Normal::standard();
    let mut out = [0.0; KPI_COUNT];
    for (o, v) in out.iter_mut().zip(y.iter()) {
        *o = std.cdf(*v).clamp(UNIFORM_EPS, 1.0 - UNIFORM_EPS);
    }
    out
}
