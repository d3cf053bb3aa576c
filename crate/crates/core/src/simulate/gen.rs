//! Synthetic data generation: the benchmark signals, Gaussian designs
//! (uncorrelated or banded-covariance), and the two noise models.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::stopping::Sparsity;

/// The six benchmark coefficient profiles: three block-sparse signals with
/// support sizes 15/60/90 and three polynomial-decay signals `j^-gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignalKind {
    S15,
    S60,
    S90,
    G3,
    G2,
    G1,
}

impl SignalKind {
    pub const ALL: [SignalKind; 6] = [
        SignalKind::G3,
        SignalKind::G2,
        SignalKind::G1,
        SignalKind::S15,
        SignalKind::S60,
        SignalKind::S90,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "s15" => Ok(SignalKind::S15),
            "s60" => Ok(SignalKind::S60),
            "s90" => Ok(SignalKind::S90),
            "g3" => Ok(SignalKind::G3),
            "g2" => Ok(SignalKind::G2),
            "g1" => Ok(SignalKind::G1),
            other => Err(Error::contract(format!(
                "unknown signal kind '{other}' (expected one of s15, s60, s90, g3, g2, g1)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SignalKind::S15 => "s15",
            SignalKind::S60 => "s60",
            SignalKind::S90 => "s90",
            SignalKind::G3 => "g3",
            SignalKind::G2 => "g2",
            SignalKind::G1 => "g1",
        }
    }

    /// Declared sparsity class, used to scale statistical check bands.
    pub fn sparsity(&self) -> Sparsity {
        match self {
            SignalKind::S15 => Sparsity::SSparse(15),
            SignalKind::S60 => Sparsity::SSparse(60),
            SignalKind::S90 => Sparsity::SSparse(90),
            SignalKind::G3 => Sparsity::GammaSparse(3.0),
            SignalKind::G2 => Sparsity::GammaSparse(2.0),
            SignalKind::G1 => Sparsity::GammaSparse(1.0),
        }
    }

    /// Rescaling applied on top of the normalized coefficients in the
    /// classification setting, keeping the linear predictor inside `[0, 1]`
    /// with high probability.
    pub fn default_classification_rescale(&self) -> f64 {
        match self {
            SignalKind::G3 | SignalKind::G2 => 0.03,
            _ => 0.1,
        }
    }
}

/// A signal specification: the profile, the l1 normalization target
/// (default 10), and an optional classification rescale factor applied after
/// normalization.
#[derive(Clone, Copy, Debug)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub l1_target: f64,
    pub rescale_factor: Option<f64>,
}

impl SignalSpec {
    pub fn new(kind: SignalKind) -> Self {
        SignalSpec {
            kind,
            l1_target: 10.0,
            rescale_factor: None,
        }
    }

    pub fn classification(kind: SignalKind) -> Self {
        SignalSpec {
            kind,
            l1_target: 10.0,
            rescale_factor: Some(kind.default_classification_rescale()),
        }
    }
}

/// Build the coefficient vector: blocks `1, 0.5, 0.25` over thirds of the
/// support for the block-sparse kinds, `j^-gamma` for the decay kinds, then
/// scaled to `||beta||_1 = l1_target` and, when present, multiplied by the
/// classification rescale factor.
pub fn build_signal(spec: &SignalSpec, p: usize) -> Result<Vec<f64>> {
    let mut beta = vec![0.0; p];
    match spec.kind {
        SignalKind::S15 | SignalKind::S60 | SignalKind::S90 => {
            if p < 90 {
                return Err(Error::contract(format!(
                    "block-sparse signals need p >= 90, got {p}"
                )));
            }
            let block = match spec.kind {
                SignalKind::S15 => 5,
                SignalKind::S60 => 20,
                _ => 30,
            };
            beta[..block].fill(1.0);
            beta[block..2 * block].fill(0.5);
            beta[2 * block..3 * block].fill(0.25);
        }
        SignalKind::G3 | SignalKind::G2 | SignalKind::G1 => {
            if p == 0 {
                return Err(Error::contract("decay signals need p >= 1"));
            }
            let gamma = match spec.kind {
                SignalKind::G3 => 3.0,
                SignalKind::G2 => 2.0,
                _ => 1.0,
            };
            for (j, b) in beta.iter_mut().enumerate() {
                *b = ((j + 1) as f64).powf(-gamma);
            }
        }
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let mut scale = spec.l1_target / l1;
    if let Some(f) = spec.rescale_factor {
        scale *= f;
    }
    for b in beta.iter_mut() {
        *b *= scale;
    }
    Ok(beta)
}

/// Design law: rows i.i.d. `N(0, Gamma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DesignKind {
    /// `Gamma = I`.
    Uncorrelated,
    /// `Gamma` with 1 on the diagonal, `a` on the first off-diagonals and
    /// `b` on the second; positive definite whenever `a + b <= 1/2`.
    Banded { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct DesignSpec {
    pub kind: DesignKind,
    pub n: usize,
    pub p: usize,
}

/// Lower Cholesky factor of the banded covariance, stored as three
/// diagonals. One factorization serves every sampled row.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    diag: Vec<f64>,
    sub1: Vec<f64>,
    sub2: Vec<f64>,
}

impl BandedCholesky {
    pub fn new(p: usize, a: f64, b: f64) -> Result<Self> {
        let mut diag = vec![0.0; p];
        let mut sub1 = vec![0.0; p];
        let mut sub2 = vec![0.0; p];
        for i in 0..p {
            if i >= 2 {
                sub2[i] = b / diag[i - 2];
            }
            if i >= 1 {
                let corr = if i >= 2 { sub2[i] * sub1[i - 1] } else { 0.0 };
                sub1[i] = (a - corr) / diag[i - 1];
            }
            let d = 1.0 - sub1[i] * sub1[i] - sub2[i] * sub2[i];
            if d <= 0.0 {
                return Err(Error::InvalidDesign(format!(
                    "banded covariance with a = {a}, b = {b} is not positive definite \
                     (pivot {d} at index {i})"
                )));
            }
            diag[i] = d.sqrt();
        }
        Ok(BandedCholesky { diag, sub1, sub2 })
    }

    /// `x = L z` for one row of standard normals.
    fn transform(&self, z: &[f64], out_row: impl FnMut(usize, f64)) {
        let mut out = out_row;
        for i in 0..z.len() {
            let mut v = self.diag[i] * z[i];
            if i >= 1 {
                v += self.sub1[i] * z[i - 1];
            }
            if i >= 2 {
                v += self.sub2[i] * z[i - 2];
            }
            out(i, v);
        }
    }
}

/// Sample the design matrix for a spec. Banded designs validate positive
/// definiteness through the Cholesky factorization.
pub fn sample_design<R: Rng>(spec: &DesignSpec, rng: &mut R) -> Result<Mat> {
    if spec.n == 0 || spec.p == 0 {
        return Err(Error::contract("design needs n >= 1 and p >= 1"));
    }
    let mut x = Mat::zeros(spec.n, spec.p);
    match spec.kind {
        DesignKind::Uncorrelated => {
            for j in 0..spec.p {
                for v in x.col_mut(j) {
                    *v = rng.sample(StandardNormal);
                }
            }
        }
        DesignKind::Banded { a, b } => {
            let chol = BandedCholesky::new(spec.p, a, b)?;
            let mut z = vec![0.0; spec.p];
            for i in 0..spec.n {
                for zv in z.iter_mut() {
                    *zv = rng.sample(StandardNormal);
                }
                chol.transform(&z, |j, v| x.col_mut(j)[i] = v);
            }
        }
    }
    Ok(x)
}

/// Noise model for the response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseSpec {
    Gaussian {
        sigma_sq: f64,
    },
    /// Bernoulli labels with success probability
    /// `clamp(0.5 + sum_j beta_j x_j, 0, 1)`; noise is `Y - P(Y = 1)`.
    Classification,
}

impl NoiseSpec {
    /// Subgaussian noise parameter used by the check suites: `sigma^2` for
    /// Gaussian noise, 1 for bounded classification noise.
    pub fn sigma_bar_sq(&self) -> f64 {
        match self {
            NoiseSpec::Gaussian { sigma_sq } => *sigma_sq,
            NoiseSpec::Classification => 1.0,
        }
    }
}

/// A sampled response with its ground truth decomposition `Y = f* + eps`.
#[derive(Clone, Debug)]
pub struct Response {
    pub y: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub f_star: Vec<f64>,
}

pub fn sample_response<R: Rng>(
    x: &Mat,
    beta_star: &[f64],
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Response> {
    let f_lin = x.mat_vec(beta_star)?;
    match noise {
        NoiseSpec::Gaussian { sigma_sq } => {
            if *sigma_sq < 0.0 {
                return Err(Error::contract("sigma_sq must be non-negative"));
            }
            let sd = sigma_sq.sqrt();
            let epsilon: Vec<f64> = (0..x.n_rows())
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let y: Vec<f64> = f_lin.iter().zip(&epsilon).map(|(f, e)| f + e).collect();
            Ok(Response {
                y,
                epsilon,
                f_star: f_lin,
            })
        }
        NoiseSpec::Classification => {
            let f_star: Vec<f64> = f_lin.iter().map(|v| (0.5 + v).clamp(0.0, 1.0)).collect();
            let y: Vec<f64> = f_star
                .iter()
                .map(|&prob| if rng.random::<f64>() < prob { 1.0 } else { 0.0 })
                .collect();
            let epsilon: Vec<f64> = y.iter().zip(&f_star).map(|(y, f)| y - f).collect();
            Ok(Response { y, epsilon, f_star })
        }
    }
}
