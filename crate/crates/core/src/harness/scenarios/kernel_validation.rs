use crate::error::Result;
use crate::harness::specs::kernel_from_config;
use crate::harness::{Config, Outcome, Verdict};
use crate::kernel::{
    default_shells, gradient_profile_error, validate_antisymmetry, validate_gradient,
    validate_size, Kernel, KernelFunction, ANTISYMMETRY_TOL, GRADIENT_TOL, SIZE_TOL,
};
use crate::table::Table;

use super::{positive, stream_key};

#[derive(Debug, Clone)]
pub struct Params {
    pub kernel: Kernel,
    pub samples_per_shell: usize,
    pub antisymmetry_samples: usize,
    pub fd_step: f64,
    /// Samples for comparing finite differences with a closed-form gradient.
    pub profile_samples: usize,
    pub profile_tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            kernel: Kernel::riesz(2, 0).expect("valid kernel"),
            samples_per_shell: 1000,
            antisymmetry_samples: 10_000,
            fd_step: 1e-6,
            profile_samples: 1000,
            profile_tol: 1e-5,
        }
    }
}

impl Params {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let dim = cfg.usize("scenario", "dim", 2)?;
        Ok(Self {
            kernel: kernel_from_config(cfg, "kernel", dim)?,
            samples_per_shell: cfg.usize("scenario", "samples_per_shell", d.samples_per_shell)?,
            antisymmetry_samples: cfg.usize("scenario", "antisymmetry_samples", d.antisymmetry_samples)?,
            fd_step: positive("fd_step", cfg.f64("scenario", "fd_step", d.fd_step)?)?,
            profile_samples: cfg.usize("scenario", "profile_samples", d.profile_samples)?,
            profile_tol: positive("profile_tol", cfg.f64("scenario", "profile_tol", d.profile_tol)?)?,
        })
    }
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let k = &p.kernel;
    let shells = default_shells();
    let anti = validate_antisymmetry(k, p.antisymmetry_samples, stream_key(&[seed, 1]))?;
    let size = validate_size(k, &shells, p.samples_per_shell, stream_key(&[seed, 2]))?;
    let grad = validate_gradient(k, &shells, p.samples_per_shell, p.fd_step, stream_key(&[seed, 3]))?;
    let profile = gradient_profile_error(k, p.profile_samples, p.fd_step, stream_key(&[seed, 4]))?;

    let mut t = Table::new("kernel_validation", &["check", "value", "declared", "tolerance", "passed"]);
    t.push(vec![
        "antisymmetry_max_residual".into(),
        anti.max_residual.into(),
        0.0.into(),
        ANTISYMMETRY_TOL.into(),
        anti.passed.into(),
    ]);
    t.push(vec!["size_sup".into(), size.sup.into(), k.c0().into(), SIZE_TOL.into(), size.passed.into()]);
    t.push(vec!["gradient_sup".into(), grad.sup.into(), k.c1().into(), GRADIENT_TOL.into(), grad.passed.into()]);
    let mut verdicts = vec![
        Verdict::check(
            "antisymmetry",
            anti.passed,
            format!("max |K(x)+K(-x)| = {:e}, relative {:e}", anti.max_residual, anti.max_relative),
        ),
        Verdict::check("size_bound", size.passed, format!("sup |K||x|^(n-1) = {} vs C0 = {}", size.sup, k.c0())),
        Verdict::check("gradient_bound", grad.passed, format!("sup |grad K||x|^n = {} vs C1 = {}", grad.sup, k.c1())),
    ];
    if let Some(err) = profile {
        let ok = err < p.profile_tol;
        t.push(vec![
            "gradient_profile_rel_error".into(),
            err.into(),
            0.0.into(),
            p.profile_tol.into(),
            ok.into(),
        ]);
        verdicts.push(Verdict::check(
            "gradient_profile",
            ok,
            format!("finite differences vs closed form: max relative error {err:e}"),
        ));
    }
    Ok(Outcome {
        tables: vec![t],
        verdicts,
    })
}
