//! Experiment configuration: JSON schema, flag overrides and validation.

use std::path::PathBuf;

use b3fem::assembly::coefficient_range;
use b3fem::coefficient::Monomial;
use b3fem::problems::{ProblemKind, Scheme, SpectralSettings};
use b3fem::{CoefficientField, Domain};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Finest mesh any configuration may request.
pub const MAX_SUBDIVISIONS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Source,
    BiharEvp,
    Tep,
    MorleySweep,
}

/// A coefficient given by preset name or as a list of `[coeff, px, py]`
/// monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Preset(String),
    Polynomial(PolynomialSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    #[serde(default = "default_poly_name")]
    pub name: String,
    pub terms: Vec<(f64, u32, u32)>,
}

fn default_poly_name() -> String {
    "polynomial".into()
}

impl CoefficientSpec {
    pub fn field(&self) -> Result<CoefficientField, CliError> {
        match self {
            CoefficientSpec::Preset(name) => Ok(CoefficientField::preset(name)?),
            CoefficientSpec::Polynomial(p) => {
                if p.terms.is_empty() || p.terms.iter().any(|t| !t.0.is_finite()) {
                    return Err(CliError::Validation("polynomial coefficient needs finite terms".into()));
                }
                let terms = p.terms.iter().map(|&(c, px, py)| Monomial::new(c, px, py)).collect();
                Ok(CoefficientField::polynomial(p.name.clone(), terms))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    /// Manufactured solution (1 to 3) of a source experiment; it fixes the
    /// domain, coefficient and load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_example: Option<usize>,
    /// Problem solved by a Morley sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemKind>,
    pub domain: Domain,
    /// Subdivisions per unit length of the coarsest mesh.
    pub base_n: usize,
    /// Number of meshes, each halving the previous mesh size.
    pub levels: usize,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<CoefficientSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_num_eigs")]
    pub num_eigs: usize,
    #[serde(default)]
    pub solver: SpectralSettings,
    pub out: PathBuf,
}

fn default_scheme() -> Scheme {
    Scheme::B3
}

fn default_num_eigs() -> usize {
    6
}

/// Command-line values that replace configuration fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub levels: Option<usize>,
    pub num_eigs: Option<usize>,
    pub shift: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(l) = o.levels {
            self.levels = l;
        }
        if let Some(k) = o.num_eigs {
            self.num_eigs = k;
        }
        if o.shift.is_some() {
            self.solver.shift = o.shift;
        }
        if let Some(t) = o.tol {
            self.solver.tol = t;
        }
        if let Some(m) = o.max_iter {
            self.solver.max_restarts = m;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(alphas) = &o.alphas {
            match (self.kind, alphas.as_slice()) {
                (ExperimentKind::MorleySweep, _) => self.alphas = alphas.clone(),
                (ExperimentKind::BiharEvp | ExperimentKind::Tep, [alpha]) => {
                    self.scheme = Scheme::Morley { alpha: *alpha }
                }
                _ => return Err(invalid("--alpha takes a list only for morley-sweep, one value for bihar-evp or tep")),
            }
        }
        Ok(())
    }

    /// Mesh subdivisions of every level.
    pub fn ladder(&self) -> Vec<usize> {
        (0..self.levels).map(|l| self.base_n << l).collect()
    }

    pub fn coefficient_field(&self) -> Result<CoefficientField, CliError> {
        match &self.coefficient {
            Some(spec) => spec.field(),
            None => Err(invalid(format!("{:?} experiments need a coefficient", self.kind))),
        }
    }

    /// Rejects every configuration that cannot run, before any assembly.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name must not be empty"));
        }
        if self.out.as_os_str().is_empty() {
            return Err(invalid("out must not be empty"));
        }
        if self.base_n == 0 || self.levels == 0 {
            return Err(invalid("base_n and levels must be at least 1"));
        }
        let finest = self.base_n.checked_mul(1 << (self.levels - 1).min(30));
        if self.levels > 30 || !finest.is_some_and(|n| n <= MAX_SUBDIVISIONS) {
            return Err(invalid(format!("finest mesh exceeds {MAX_SUBDIVISIONS} subdivisions")));
        }
        if self.domain == Domain::LShape && self.base_n % 2 == 1 {
            return Err(invalid("the L-shaped domain needs an even base_n"));
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(invalid(format!("tolerance {} must lie in (0, 1)", s.tol)));
        }
        if s.max_restarts == 0 {
            return Err(invalid("max-iter must be at least 1"));
        }
        if s.shift.is_some_and(|x| !x.is_finite()) {
            return Err(invalid("shift must be finite"));
        }
        if s.candidates.is_some_and(|c| c < self.num_eigs) {
            return Err(invalid("candidates must be at least num_eigs"));
        }
        if self.kind != ExperimentKind::Source && !(1..=200).contains(&self.num_eigs) {
            return Err(invalid("num_eigs must lie in 1..=200"));
        }
        if self.kind != ExperimentKind::MorleySweep && !self.alphas.is_empty() {
            return Err(invalid("alphas are only used by morley-sweep"));
        }
        if self.kind != ExperimentKind::MorleySweep && self.problem.is_some() {
            return Err(invalid("problem is only used by morley-sweep"));
        }
        match self.kind {
            ExperimentKind::Source => self.validate_source(),
            ExperimentKind::BiharEvp => {
                self.validate_alphas(ProblemKind::Bihar, &self.scheme.alpha().into_iter().collect::<Vec<_>>())
            }
            ExperimentKind::Tep => {
                self.validate_alphas(ProblemKind::Tep, &self.scheme.alpha().into_iter().collect::<Vec<_>>())
            }
            ExperimentKind::MorleySweep => {
                if self.scheme != Scheme::B3 {
                    return Err(invalid("morley-sweep takes its schemes from alphas, not scheme"));
                }
                if self.alphas.is_empty() {
                    return Err(invalid("morley-sweep needs a non-empty alphas list"));
                }
                let problem = self.problem.ok_or_else(|| invalid("morley-sweep needs problem: bihar or tep"))?;
                self.validate_alphas(problem, &self.alphas)
            }
        }
    }

    fn validate_source(&self) -> Result<(), CliError> {
        let k = self.source_example.ok_or_else(|| invalid("source experiments need source_example (1 to 3)"))?;
        let ex = b3fem::problems::SourceExample::numbered(k).map_err(|e| invalid(e.to_string()))?;
        if ex.domain != self.domain {
            return Err(invalid(format!("source_example {k} is posed on the {} domain", ex.domain.name())));
        }
        if self.coefficient.is_some() {
            return Err(invalid("source experiments take their coefficient from source_example"));
        }
        if self.scheme != Scheme::B3 {
            return Err(invalid("source experiments use the b3 scheme"));
        }
        Ok(())
    }

    /// Checks the coefficient on the coarsest mesh and every Morley parameter
    /// against its admissible interval.
    fn validate_alphas(&self, problem: ProblemKind, alphas: &[f64]) -> Result<(), CliError> {
        if self.source_example.is_some() {
            return Err(invalid("source_example is only used by source experiments"));
        }
        let field = self.coefficient_field()?;
        let mesh = self.domain.build(self.base_n)?;
        let (lo, hi) = coefficient_range(&mesh, &field)?;
        let bound = match problem {
            ProblemKind::Bihar if lo > 0.0 => lo,
            ProblemKind::Tep if lo > 1.0 => 1.0 / (hi - 1.0),
            ProblemKind::Bihar => return Err(invalid(format!("coefficient must be positive, reaches {lo}"))),
            ProblemKind::Tep => return Err(invalid(format!("refraction index must exceed 1, reaches {lo}"))),
        };
        if !hi.is_finite() {
            return Err(invalid("coefficient is not finite on the mesh"));
        }
        for &a in alphas {
            if !(a > 0.0 && a < bound) {
                return Err(invalid(format!("alpha = {a} outside (0, {bound})")));
            }
        }
        Ok(())
    }
}
