//! Full conditional posterior parameters for the normal-errors regression
//! model, computed from sufficient statistics alone.
//!
//! Three β priors are supported: flat (uniform), multivariate normal with
//! known mean μ and covariance C, and multivariate normal with unknown
//! (μ, C) under a normal hyperprior on μ and a Wishart hyperprior on C⁻¹.
//! σ² takes either an inverse-gamma prior or the Jeffreys prior 1/σ².
//!
//! Everything here is a pure function of its inputs. SPD solves go through
//! Cholesky; explicit inverses are formed only when the covariance matrix
//! itself is the returned value.

use crate::error::{Error, Result};
use crate::linalg::{dot, CholeskyFactor, Mat, SpdMatrix};
use crate::summaries::SummaryStatistics;

/// Multivariate normal prior for β with known mean and covariance.
///
/// Either the covariance `cov` (C) or the precision `prec` (C⁻¹) may be
/// supplied; the precision is preferred when both are present.
#[derive(Debug, Clone)]
pub struct MvnKnownPrior {
    pub mu: Vec<f64>,
    pub cov: Option<SpdMatrix>,
    pub prec: Option<SpdMatrix>,
}

impl MvnKnownPrior {
    /// Zero mean and identity covariance.
    pub fn defaults(p: usize) -> Self {
        MvnKnownPrior {
            mu: vec![0.0; p],
            cov: Some(SpdMatrix::identity(p)),
            prec: None,
        }
    }

    /// The prior precision C⁻¹, inverted from `cov` when not given directly.
    pub fn precision(&self) -> Result<SpdMatrix> {
        if let Some(prec) = &self.prec {
            return Ok(prec.clone());
        }
        match &self.cov {
            Some(cov) => cov.inverse(),
            None => Err(Error::InvalidConfig(
                "mvnorm-known prior needs a covariance or a precision matrix".into(),
            )),
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.mu.len() != p {
            return Err(Error::ShapeMismatch {
                context: "beta prior mean",
                expected: p,
                got: self.mu.len(),
            });
        }
        for (name, m) in [("cov", &self.cov), ("prec", &self.prec)] {
            if let Some(m) = m {
                if m.dim() != p {
                    return Err(Error::ShapeMismatch {
                        context: match name {
                            "cov" => "beta prior covariance",
                            _ => "beta prior precision",
                        },
                        expected: p,
                        got: m.dim(),
                    });
                }
            }
        }
        if self.cov.is_none() && self.prec.is_none() {
            return Err(Error::InvalidConfig(
                "mvnorm-known prior needs a covariance or a precision matrix".into(),
            ));
        }
        Ok(())
    }
}

/// Multivariate normal prior for β with unknown mean μ and covariance C:
/// μ ~ Normal(η, D) with known precision D⁻¹, and C⁻¹ ~ Wishart(λ, V) with
/// known inverse scale V⁻¹. Also carries the chain starting values for μ
/// and C⁻¹.
#[derive(Debug, Clone)]
pub struct MvnUnknownPrior {
    pub eta: Vec<f64>,
    pub dinv: SpdMatrix,
    pub lambda: f64,
    pub vinv: SpdMatrix,
    pub mu_init: Vec<f64>,
    pub cinv_init: SpdMatrix,
}

impl MvnUnknownPrior {
    /// η = 0, D⁻¹ = I, λ = p, V⁻¹ = I, μ-init all ones, C⁻¹-init = I.
    pub fn defaults(p: usize) -> Self {
        MvnUnknownPrior {
            eta: vec![0.0; p],
            dinv: SpdMatrix::identity(p),
            lambda: p as f64,
            vinv: SpdMatrix::identity(p),
            mu_init: vec![1.0; p],
            cinv_init: SpdMatrix::identity(p),
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        let dims = [
            ("eta", self.eta.len()),
            ("dinv", self.dinv.dim()),
            ("vinv", self.vinv.dim()),
            ("mu_init", self.mu_init.len()),
            ("cinv_init", self.cinv_init.dim()),
        ];
        for (name, got) in dims {
            if got != p {
                return Err(Error::ShapeMismatch {
                    context: match name {
                        "eta" => "hyperprior mean eta",
                        "dinv" => "hyperprior precision Dinv",
                        "vinv" => "wishart inverse scale Vinv",
                        "mu_init" => "mu starting value",
                        _ => "Cinv starting value",
                    },
                    expected: p,
                    got,
                });
            }
        }
        if self.lambda < p as f64 {
            return Err(Error::InvalidConfig(format!(
                "wishart degrees of freedom lambda = {} must be at least p = {p}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Prior for the regression coefficients.
#[derive(Debug, Clone)]
pub enum BetaPrior {
    /// Uniform over all of β-space.
    Flat,
    MvnKnown(MvnKnownPrior),
    MvnUnknown(MvnUnknownPrior),
}

impl BetaPrior {
    pub fn mvn_known_defaults(p: usize) -> Self {
        BetaPrior::MvnKnown(MvnKnownPrior::defaults(p))
    }

    pub fn mvn_unknown_defaults(p: usize) -> Self {
        BetaPrior::MvnUnknown(MvnUnknownPrior::defaults(p))
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            BetaPrior::Flat => Ok(()),
            BetaPrior::MvnKnown(prior) => prior.validate(p),
            BetaPrior::MvnUnknown(prior) => prior.validate(p),
        }
    }
}

/// Prior for the error variance σ².
///
/// For `InverseGamma`, `a` and `b` follow the conventional IG(a, b)
/// notation with scale b: the prior contributes rate `1/b` under the
/// shape–rate convention of [`crate::distributions`].
#[derive(Debug, Clone)]
pub enum SigmaSqPrior {
    InverseGamma { a: f64, b: f64, sigmasq_init: f64 },
    Jeffreys { sigmasq_init: f64 },
}

impl SigmaSqPrior {
    /// IG(1, 1) with starting value 1.
    pub fn inverse_gamma_defaults() -> Self {
        SigmaSqPrior::InverseGamma {
            a: 1.0,
            b: 1.0,
            sigmasq_init: 1.0,
        }
    }

    pub fn jeffreys_defaults() -> Self {
        SigmaSqPrior::Jeffreys { sigmasq_init: 1.0 }
    }

    pub fn sigmasq_init(&self) -> f64 {
        match self {
            SigmaSqPrior::InverseGamma { sigmasq_init, .. } => *sigmasq_init,
            SigmaSqPrior::Jeffreys { sigmasq_init } => *sigmasq_init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SigmaSqPrior::InverseGamma { a, b, sigmasq_init } => {
                *a > 0.0 && *b > 0.0 && *sigmasq_init > 0.0
            }
            SigmaSqPrior::Jeffreys { sigmasq_init } => *sigmasq_init > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "sigma-squared prior parameters and starting value must be strictly positive"
                    .into(),
            ))
        }
    }
}

/// Mean/covariance pair of a conditional multivariate normal.
#[derive(Debug, Clone)]
pub struct MvnParams {
    pub mean: Vec<f64>,
    pub cov: SpdMatrix,
}

/// Verified Cholesky factor of `XᵀX`, the flat-prior fast path.
///
/// The factor can be computed here or supplied precomputed; a supplied
/// factor is verified by multiplying it back against `xtx` (tolerance 1e-8
/// relative) so a stale or mismatched factor cannot silently corrupt draws.
#[derive(Debug, Clone)]
pub struct XtxFactor {
    chol: CholeskyFactor,
}

impl XtxFactor {
    pub fn compute(s: &SummaryStatistics) -> Result<Self> {
        match CholeskyFactor::new(s.xtx()) {
            Ok(chol) => Ok(XtxFactor { chol }),
            Err(Error::NotPositiveDefinite { pivot, .. }) => Err(Error::RankDeficient { pivot }),
            Err(e) => Err(e),
        }
    }

    pub fn from_precomputed(s: &SummaryStatistics, lower: Mat) -> Result<Self> {
        let p = s.p();
        if lower.rows() != p || lower.cols() != p {
            return Err(Error::ShapeMismatch {
                context: "precomputed XᵀX factor",
                expected: p,
                got: lower.rows().max(lower.cols()),
            });
        }
        let scale = s.xtx().max_abs().max(1.0);
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for m in 0..=i.min(j) {
                    acc += lower[(i, m)] * lower[(j, m)];
                }
                let want = s.xtx()[(i, j)];
                if (acc - want).abs() > 1e-8 * scale {
                    return Err(Error::FactorMismatch {
                        i,
                        j,
                        got: acc,
                        expected: want,
                    });
                }
            }
        }
        Ok(XtxFactor {
            chol: CholeskyFactor::from_lower_unchecked(lower),
        })
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.chol
    }
}

/// Parameters of β's full conditional posterior.
///
/// - Flat prior: mean `(XᵀX)⁻¹XᵀY`, covariance `σ²(XᵀX)⁻¹`.
/// - Normal priors: precision `C⁻¹ + σ⁻²XᵀX`, mean
///   `precision⁻¹(C⁻¹μ + σ⁻²XᵀY)`, covariance `precision⁻¹`; under the
///   unknown-(μ, C) prior the chain's current μ and C⁻¹ must be supplied.
pub fn beta_conditional(
    s: &SummaryStatistics,
    prior: &BetaPrior,
    sigmasq: f64,
    mu_cur: Option<&[f64]>,
    cinv_cur: Option<&SpdMatrix>,
) -> Result<MvnParams> {
    if !sigmasq.is_finite() || sigmasq <= 0.0 {
        return Err(Error::Domain(format!(
            "sigmasq must be positive, got {sigmasq}"
        )));
    }
    let p = s.p();
    prior.validate(p)?;
    match prior {
        BetaPrior::Flat => {
            let factor = XtxFactor::compute(s)?;
            let mean = factor.factor().solve(s.xty());
            let cov = SpdMatrix::new(factor.factor().inverse().scale(sigmasq))?;
            Ok(MvnParams { mean, cov })
        }
        BetaPrior::MvnKnown(known) => {
            let prec = known.precision()?;
            precision_weighted(s, &prec, &known.mu, sigmasq)
        }
        BetaPrior::MvnUnknown(_) => {
            let (mu, cinv) = match (mu_cur, cinv_cur) {
                (Some(mu), Some(cinv)) => (mu, cinv),
                _ => {
                    return Err(Error::InvalidConfig(
                        "beta conditional under mvnorm-unknown needs the current mu and Cinv"
                            .into(),
                    ))
                }
            };
            if mu.len() != p {
                return Err(Error::ShapeMismatch {
                    context: "current mu",
                    expected: p,
                    got: mu.len(),
                });
            }
            if cinv.dim() != p {
                return Err(Error::ShapeMismatch {
                    context: "current Cinv",
                    expected: p,
                    got: cinv.dim(),
                });
            }
            precision_weighted(s, cinv, mu, sigmasq)
        }
    }
}

/// A conditional Gaussian held in precision form: the Cholesky factor of
/// the precision matrix plus the mean. Sampling and covariance recovery
/// both come from the factor, so the Gibbs loop never has to build the
/// explicit inverse.
#[derive(Debug, Clone)]
pub struct GaussianParts {
    pub factor: CholeskyFactor,
    pub mean: Vec<f64>,
}

impl GaussianParts {
    pub fn into_mvn_params(self) -> Result<MvnParams> {
        let cov = SpdMatrix::new(self.factor.inverse())?;
        Ok(MvnParams {
            mean: self.mean,
            cov,
        })
    }
}

/// Factor/mean of β's conditional under a normal prior with precision C⁻¹:
/// precision = C⁻¹ + σ⁻²XᵀX, mean = precision⁻¹(C⁻¹μ + σ⁻²XᵀY).
pub fn beta_gaussian_parts(
    s: &SummaryStatistics,
    cinv: &SpdMatrix,
    mu: &[f64],
    sigmasq: f64,
) -> Result<GaussianParts> {
    let inv_sigmasq = 1.0 / sigmasq;
    let precision = cinv.entries().add(&s.xtx().scale(inv_sigmasq));
    let factor = CholeskyFactor::new(&precision)?;
    let mut rhs = cinv.entries().matvec(mu);
    for (r, &v) in rhs.iter_mut().zip(s.xty()) {
        *r += inv_sigmasq * v;
    }
    let mean = factor.solve(&rhs);
    Ok(GaussianParts { factor, mean })
}

/// Factor/mean of μ's conditional: precision = D⁻¹ + C⁻¹,
/// mean = precision⁻¹(C⁻¹β + D⁻¹η).
pub fn mu_gaussian_parts(
    prior: &MvnUnknownPrior,
    beta: &[f64],
    cinv_cur: &SpdMatrix,
) -> Result<GaussianParts> {
    let precision = prior.dinv.entries().add(cinv_cur.entries());
    let factor = CholeskyFactor::new(&precision)?;
    let mut rhs = cinv_cur.entries().matvec(beta);
    let d_eta = prior.dinv.entries().matvec(&prior.eta);
    for (r, v) in rhs.iter_mut().zip(d_eta) {
        *r += v;
    }
    let mean = factor.solve(&rhs);
    Ok(GaussianParts { factor, mean })
}

fn precision_weighted(
    s: &SummaryStatistics,
    cinv: &SpdMatrix,
    mu: &[f64],
    sigmasq: f64,
) -> Result<MvnParams> {
    beta_gaussian_parts(s, cinv, mu, sigmasq)?.into_mvn_params()
}

/// `(Y − Xβ)ᵀ(Y − Xβ)` from the statistics alone:
/// `YᵀY − 2·βᵀXᵀY + βᵀXᵀXβ`.
///
/// Exact in real arithmetic; tiny negative values from rounding (within
/// `1e-9·yty`) are clamped to zero, anything more negative means the
/// statistics are inconsistent.
pub fn residual_quadratic(s: &SummaryStatistics, beta: &[f64]) -> Result<f64> {
    if beta.len() != s.p() {
        return Err(Error::ShapeMismatch {
            context: "residual_quadratic beta",
            expected: s.p(),
            got: beta.len(),
        });
    }
    let value = s.yty() - 2.0 * dot(beta, s.xty()) + s.xtx().quadratic_form(beta);
    if value >= 0.0 {
        return Ok(value);
    }
    let tolerance = 1e-9 * s.yty();
    if -value <= tolerance {
        Ok(0.0)
    } else {
        Err(Error::InconsistentStatistics { value, tolerance })
    }
}

/// Shape and rate of σ²'s inverse-gamma full conditional.
///
/// Inverse-gamma prior IG(a, b): shape `n/2 + a`, rate `½·RSS + 1/b`.
/// Jeffreys prior: shape `n/2`, rate `½·RSS`. The rate follows the
/// convention of [`crate::distributions::sample_inverse_gamma`].
pub fn sigmasq_conditional(
    s: &SummaryStatistics,
    prior: &SigmaSqPrior,
    beta: &[f64],
) -> Result<(f64, f64)> {
    if s.n() == 0 {
        return Err(Error::Domain(
            "sigma-squared conditional needs at least one observation".into(),
        ));
    }
    prior.validate()?;
    let rss = residual_quadratic(s, beta)?;
    let half_n = s.n() as f64 / 2.0;
    let (shape, rate) = match prior {
        SigmaSqPrior::InverseGamma { a, b, .. } => (half_n + a, 0.5 * rss + 1.0 / b),
        SigmaSqPrior::Jeffreys { .. } => (half_n, 0.5 * rss),
    };
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::DegenerateData(rate));
    }
    Ok((shape, rate))
}

/// Parameters of μ's full conditional: precision `D⁻¹ + C⁻¹`, mean
/// `precision⁻¹(C⁻¹β + D⁻¹η)`. Independent of the data summaries.
pub fn mu_conditional(
    prior: &MvnUnknownPrior,
    beta: &[f64],
    cinv_cur: &SpdMatrix,
) -> Result<MvnParams> {
    let p = beta.len();
    prior.validate(p)?;
    if cinv_cur.dim() != p {
        return Err(Error::ShapeMismatch {
            context: "current Cinv",
            expected: p,
            got: cinv_cur.dim(),
        });
    }
    mu_gaussian_parts(prior, beta, cinv_cur)?.into_mvn_params()
}

/// Degrees of freedom and scale of C⁻¹'s Wishart full conditional:
/// df `1 + λ`, scale `(V⁻¹ + (β − μ)(β − μ)ᵀ)⁻¹` via factor-and-solve.
pub fn cinv_conditional(
    prior: &MvnUnknownPrior,
    beta: &[f64],
    mu: &[f64],
) -> Result<(f64, SpdMatrix)> {
    let p = beta.len();
    prior.validate(p)?;
    if mu.len() != p {
        return Err(Error::ShapeMismatch {
            context: "mu",
            expected: p,
            got: mu.len(),
        });
    }
    let diff: Vec<f64> = beta.iter().zip(mu).map(|(b, m)| b - m).collect();
    let mut inner = prior.vinv.entries().clone();
    inner.add_outer(&diff, 1.0);
    let factor = CholeskyFactor::new(&inner)?;
    let scale = SpdMatrix::new(factor.inverse())?;
    Ok((1.0 + prior.lambda, scale))
}
