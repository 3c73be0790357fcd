//! Scenario bodies. Each module exposes a `Params` struct (with defaults and
//! a config reader) and a `run(params, seed)` function.

pub mod bli;
pub mod carleson;
pub mod cone;
pub mod growth;
pub mod kernel_validation;
pub mod lemma;
pub mod pv;
pub mod separated;
pub mod weak;

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

use super::{Config, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    KernelValidation,
    ConeSeparation,
    LemmaL2,
    PvConvergence,
    WeakPairing,
    CantorGrowth,
    CarlesonEmbedding,
    SeparatedBoundedness,
    BliConvergence,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::KernelValidation,
        ScenarioKind::ConeSeparation,
        ScenarioKind::LemmaL2,
        ScenarioKind::PvConvergence,
        ScenarioKind::WeakPairing,
        ScenarioKind::CantorGrowth,
        ScenarioKind::CarlesonEmbedding,
        ScenarioKind::SeparatedBoundedness,
        ScenarioKind::BliConvergence,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ScenarioKind::KernelValidation => "kernel_validation",
            ScenarioKind::ConeSeparation => "cone_separation",
            ScenarioKind::LemmaL2 => "lemma_l2",
            ScenarioKind::PvConvergence => "pv_convergence",
            ScenarioKind::WeakPairing => "weak_pairing",
            ScenarioKind::CantorGrowth => "cantor_growth",
            ScenarioKind::CarlesonEmbedding => "carleson_embedding",
            ScenarioKind::SeparatedBoundedness => "separated_boundedness",
            ScenarioKind::BliConvergence => "bli_convergence",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| {
                let tags: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.tag()).collect();
                Error::Config(format!("unknown scenario {s:?} (expected one of {})", tags.join(", ")))
            })
    }
}

#[derive(Debug, Clone)]
pub enum ScenarioParams {
    KernelValidation(kernel_validation::Params),
    ConeSeparation(cone::Params),
    LemmaL2(lemma::Params),
    PvConvergence(pv::Params),
    WeakPairing(weak::Params),
    CantorGrowth(growth::Params),
    CarlesonEmbedding(carleson::Params),
    SeparatedBoundedness(separated::Params),
    BliConvergence(bli::Params),
}

impl ScenarioParams {
    pub fn from_config(kind: ScenarioKind, cfg: &Config) -> Result<Self> {
        Ok(match kind {
            ScenarioKind::KernelValidation => Self::KernelValidation(kernel_validation::Params::from_config(cfg)?),
            ScenarioKind::ConeSeparation => Self::ConeSeparation(cone::Params::from_config(cfg)?),
            ScenarioKind::LemmaL2 => Self::LemmaL2(lemma::Params::from_config(cfg)?),
            ScenarioKind::PvConvergence => Self::PvConvergence(pv::Params::from_config(cfg)?),
            ScenarioKind::WeakPairing => Self::WeakPairing(weak::Params::from_config(cfg)?),
            ScenarioKind::CantorGrowth => Self::CantorGrowth(growth::Params::from_config(cfg)?),
            ScenarioKind::CarlesonEmbedding => Self::CarlesonEmbedding(carleson::Params::from_config(cfg)?),
            ScenarioKind::SeparatedBoundedness => {
                Self::SeparatedBoundedness(separated::Params::from_config(cfg)?)
            }
            ScenarioKind::BliConvergence => Self::BliConvergence(bli::Params::from_config(cfg)?),
        })
    }

    pub fn kind(&self) -> ScenarioKind {
        match self {
            Self::KernelValidation(_) => ScenarioKind::KernelValidation,
            Self::ConeSeparation(_) => ScenarioKind::ConeSeparation,
            Self::LemmaL2(_) => ScenarioKind::LemmaL2,
            Self::PvConvergence(_) => ScenarioKind::PvConvergence,
            Self::WeakPairing(_) => ScenarioKind::WeakPairing,
            Self::CantorGrowth(_) => ScenarioKind::CantorGrowth,
            Self::CarlesonEmbedding(_) => ScenarioKind::CarlesonEmbedding,
            Self::SeparatedBoundedness(_) => ScenarioKind::SeparatedBoundedness,
            Self::BliConvergence(_) => ScenarioKind::BliConvergence,
        }
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        match self {
            Self::KernelValidation(p) => kernel_validation::run(p, seed),
            Self::ConeSeparation(p) => cone::run(p, seed),
            Self::LemmaL2(p) => lemma::run(p, seed),
            Self::PvConvergence(p) => pv::run(p, seed),
            Self::WeakPairing(p) => weak::run(p, seed),
            Self::CantorGrowth(p) => growth::run(p, seed),
            Self::CarlesonEmbedding(p) => carleson::run(p, seed),
            Self::SeparatedBoundedness(p) => separated::run(p, seed),
            Self::BliConvergence(p) => bli::run(p, seed),
        }
    }
}

/// Run `count` work items in fixed chunks, item `i` drawing from the
/// generator `stream(seed, key + i)`. Results come back in item order
/// whatever the thread count.
pub(crate) fn seeded_map<T, F>(count: usize, seed: u64, key: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SplitMix64) -> Result<T> + Sync,
{
    (0..count)
        .into_par_iter()
        .with_min_len(16)
        .map(|i| {
            let mut rng = SplitMix64::stream(seed, key.wrapping_add(i as u64));
            f(i, &mut rng)
        })
        .collect()
}

/// Stream keys for distinct random sub-tasks of one scenario.
pub(crate) fn stream_key(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x9e37_79b9_7f4a_7c15u64, |h, &p| {
            SplitMix64::stream(h, p).next_u64()
        })
        << 20
}

pub(crate) fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

pub(crate) fn nonempty<T>(name: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        Err(Error::Config(format!("{name} must not be empty")))
    } else {
        Ok(v)
    }
}

pub(crate) fn increasing(name: &str, v: &[usize]) -> Result<()> {
    if v.windows(2).any(|w| w[1] <= w[0]) {
        Err(Error::Config(format!("{name} must be strictly increasing")))
    } else {
        Ok(())
    }
}

