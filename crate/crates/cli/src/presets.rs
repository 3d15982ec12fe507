//! Built-in experiments.

use std::path::PathBuf;

use b3fem::problems::{ProblemKind, Scheme, SpectralSettings};
use b3fem::Domain;

use crate::config::{CoefficientSpec, ExperimentConfig, ExperimentKind};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        (self.build)()
    }
}

fn base(name: &str, kind: ExperimentKind, domain: Domain, base_n: usize, levels: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        kind,
        source_example: None,
        problem: None,
        domain,
        base_n,
        levels,
        scheme: Scheme::B3,
        coefficient: None,
        alphas: Vec::new(),
        num_eigs: 6,
        solver: SpectralSettings::default(),
        out: PathBuf::from("results").join(name),
    }
}

fn source(name: &str, k: usize, domain: Domain) -> ExperimentConfig {
    ExperimentConfig { source_example: Some(k), ..base(name, ExperimentKind::Source, domain, 2, 7) }
}

fn spectral(
    name: &str,
    kind: ExperimentKind,
    domain: Domain,
    coeff: &str,
    (base_n, levels): (usize, usize),
    num_eigs: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        coefficient: Some(CoefficientSpec::Preset(coeff.into())),
        num_eigs,
        ..base(name, kind, domain, base_n, levels)
    }
}

fn sweep(name: &str, problem: ProblemKind, coeff: &str, alphas: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        problem: Some(problem),
        alphas: alphas.to_vec(),
        ..spectral(name, ExperimentKind::MorleySweep, Domain::Square, coeff, (25, 3), 10)
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "example1",
        description: "Example 1: source problem, delta = 1 on the unit square, u = sin^2(pi x) sin^2(pi y); h0 = 1/2, 7 levels",
        build: || source("example1", 1, Domain::Square),
    },
    Preset {
        name: "example2",
        description: "Example 2: source problem, delta = 1 on the reference triangle, u = x^2 y^2 (1-x-y)^2; h0 = 1/2, 7 levels",
        build: || source("example2", 2, Domain::Triangle),
    },
    Preset {
        name: "example3",
        description: "Example 3: source problem, delta = 8+x-y on the reference triangle, u = x^2 y^2 (1-x-y)^2; h0 = 1/2, 7 levels",
        build: || source("example3", 3, Domain::Triangle),
    },
    Preset {
        name: "example4",
        description: "Example 4: biharmonic eigenvalues, delta = 1 on the unit square; lowest 6, h0 = 1/2, 7 levels",
        build: || spectral("example4", ExperimentKind::BiharEvp, Domain::Square, "one", (2, 7), 6),
    },
    Preset {
        name: "example5",
        description: "Example 5: biharmonic eigenvalues, delta = 1 on the L-shaped domain; lowest 6, h0 = 1/2, 7 levels",
        build: || spectral("example5", ExperimentKind::BiharEvp, Domain::LShape, "one", (2, 7), 6),
    },
    Preset {
        name: "example6",
        description: "Example 6: biharmonic eigenvalues, delta = 8+x-y on the unit square; lowest 10, h0 = 1/8, 5 levels",
        build: || spectral("example6", ExperimentKind::BiharEvp, Domain::Square, "delta_lin", (8, 5), 10),
    },
    Preset {
        name: "example7",
        description: "Example 7: biharmonic eigenvalues, delta = sqrt(x^2+y^2)+1 on the unit square; lowest 10, h0 = 1/8, 5 levels",
        build: || spectral("example7", ExperimentKind::BiharEvp, Domain::Square, "delta_rad", (8, 5), 10),
    },
    Preset {
        name: "example8",
        description: "Example 8: transmission eigenvalues sqrt(tau), n = 16 on the unit square; lowest 6, h0 = 1/4, 6 levels",
        build: || spectral("example8", ExperimentKind::Tep, Domain::Square, "n16", (4, 6), 6),
    },
    Preset {
        name: "example9",
        description: "Example 9: transmission eigenvalues sqrt(tau), n = 8+x-y on the unit square; lowest 6, h0 = 1/4, 6 levels",
        build: || spectral("example9", ExperimentKind::Tep, Domain::Square, "n_lin", (4, 6), 6),
    },
    Preset {
        name: "example10",
        description: "Example 10: transmission eigenvalues sqrt(tau), n = 24 on the L-shaped domain; lowest 6, h0 = 1/4, 6 levels",
        build: || spectral("example10", ExperimentKind::Tep, Domain::LShape, "n24", (4, 6), 6),
    },
    Preset {
        name: "morley-sweep-bihar-lin",
        description: "Morley biharmonic eigenvalues, delta = 8+x-y, alpha in {0.5,1,2,4,6}; lowest 10 on h = 1/25, 1/50, 1/100",
        build: || sweep("morley-sweep-bihar-lin", ProblemKind::Bihar, "delta_lin", &[0.5, 1.0, 2.0, 4.0, 6.0]),
    },
    Preset {
        name: "morley-sweep-bihar-rad",
        description: "Morley biharmonic eigenvalues, delta = sqrt(x^2+y^2)+1, alpha in {0.1,0.3,0.5,0.7,0.9}; lowest 10 on h = 1/25, 1/50, 1/100",
        build: || sweep("morley-sweep-bihar-rad", ProblemKind::Bihar, "delta_rad", &[0.1, 0.3, 0.5, 0.7, 0.9]),
    },
    Preset {
        name: "morley-sweep-tep-lin",
        description: "Morley transmission eigenvalues, n = 8+x-y, alpha in {0.02,0.05,0.08,0.11}; lowest 10 on h = 1/25, 1/50, 1/100",
        build: || sweep("morley-sweep-tep-lin", ProblemKind::Tep, "n_lin", &[0.02, 0.05, 0.08, 0.11]),
    },
    Preset {
        name: "morley-sweep-tep-quad",
        description: "Morley transmission eigenvalues, n = 18+x^2+y^2, alpha in {0.01,...,0.05}; lowest 10 on h = 1/25, 1/50, 1/100",
        build: || sweep("morley-sweep-tep-quad", ProblemKind::Tep, "n_quad", &[0.01, 0.02, 0.03, 0.04, 0.05]),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn listing() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS.iter().map(|p| format!("{:width$}  {}\n", p.name, p.description)).collect()
}
