use gsrp_core::bounds::{error_report_from, regret_bounds, AngleSet, BoundContext, BoundReport, SlackPolicy};
use gsrp_core::gsrp::{build_regret, build_subspace, combine_constrained, reconstruct, Frame, SchemeTag};
use gsrp_core::numerics::Signal;
use gsrp_core::signals::{
    shift_invariant_angle_cos, shift_invariant_frame, Complex64, GridSpec, SpectralAngle, SpectralGrid,
};
use gsrp_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SpaceSpec};

/// Environment variable fixing the number of sweep workers.
pub const THREADS_VAR: &str = "GSRP_THREADS";

/// Lambda values closer than this are the same point of a sweep.
pub const LAMBDA_MATCH: f64 = 1e-9;

/// One lambda of a sweep. `regret_constrained` is `||P_W x - T x||` of the
/// constrained scheme and `bound_lower`, `bound_upper` bracket it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub snr_subspace_db: f64,
    pub snr_regret_db: f64,
    pub snr_constrained_db: f64,
    pub snr_orthogonal_db: f64,
    pub regret_constrained: f64,
    pub bound_lower: f64,
    pub bound_upper: f64,
}

impl SweepRow {
    pub fn snr(&self, tag: SchemeTag) -> Option<f64> {
        match tag {
            SchemeTag::Subspace => Some(self.snr_subspace_db),
            SchemeTag::Regret => Some(self.snr_regret_db),
            SchemeTag::Constrained => Some(self.snr_constrained_db),
            SchemeTag::Orthogonal => Some(self.snr_orthogonal_db),
            SchemeTag::Consistent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// `||x||`, the scale of the bound tolerances.
    pub signal_norm: f64,
    pub slack: SlackPolicy,
}

impl Sweep {
    pub fn row_at(&self, lambda: f64) -> Result<&SweepRow> {
        self.rows
            .iter()
            .find(|r| (r.lambda - lambda).abs() <= LAMBDA_MATCH)
            .ok_or(Error::MissingLambda(lambda))
    }

    pub fn bound_report(&self, row: &SweepRow) -> BoundReport {
        BoundReport::new(
            row.bound_lower,
            row.bound_upper,
            row.regret_constrained,
            self.signal_norm,
            self.slack,
        )
    }

    /// Rows whose regret leaves its bracket by more than the slack.
    pub fn bound_violations(&self) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| !self.bound_report(r).holds())
            .collect()
    }

    /// `|SNR_con - SNR_reg|` at `lambda = 0` and `|SNR_con - SNR_sub|` at
    /// `lambda = 1`, for the endpoints present in the sweep.
    pub fn endpoint_defects(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if let Ok(r) = self.row_at(0.0) {
            out.push((0.0, (r.snr_constrained_db - r.snr_regret_db).abs()));
        }
        if let Ok(r) = self.row_at(1.0) {
            out.push((1.0, (r.snr_constrained_db - r.snr_subspace_db).abs()));
        }
        out
    }

    /// Row with the highest constrained SNR; the first on ties.
    pub fn best_constrained(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.snr_constrained_db >= r.snr_constrained_db => Some(b),
                _ => Some(r),
            })
    }
}

fn frame_for(space: &SpaceSpec, grid: &GridSpec) -> Result<Frame> {
    let kernel = space.generator.kernel(grid)?;
    shift_invariant_frame(&kernel, grid, space.shifts)
}

/// Frames, input and lambda-independent geometry of one experiment.
pub struct Experiment {
    config: ExperimentConfig,
    sampling: Frame,
    reconstruction: Frame,
    prior: Frame,
    input: Signal,
    context: BoundContext,
}

impl Experiment {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let grid = &config.grid;
        let sampling = frame_for(&config.sampling, grid)?;
        let reconstruction = frame_for(&config.reconstruction, grid)?;
        let prior = frame_for(&config.prior, grid)?;
        let input = config.input_signal()?;
        let context = BoundContext::new(&sampling, &reconstruction, &prior)?;
        Ok(Self {
            config: config.clone(),
            sampling,
            reconstruction,
            prior,
            input,
            context,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn sampling(&self) -> &Frame {
        &self.sampling
    }

    pub fn reconstruction(&self) -> &Frame {
        &self.reconstruction
    }

    pub fn prior(&self) -> &Frame {
        &self.prior
    }

    pub fn input(&self) -> &Signal {
        &self.input
    }

    pub fn context(&self) -> &BoundContext {
        &self.context
    }

    pub fn angles(&self, lambda: f64) -> Result<AngleSet> {
        self.context.angle_set(lambda)
    }

    /// `cos(A, S)` from the generator spectra, treating both spaces as
    /// infinite shift-invariant spaces.
    pub fn spectral_prior_angle(&self) -> Result<SpectralAngle> {
        let period = self.config.grid.period;
        let s = self.config.sampling.generator.spectrum(period);
        let a = self.config.prior.generator.spectrum(period);
        shift_invariant_angle_cos(
            move |w| Complex64::new(s(w), 0.0),
            move |w| Complex64::new(a(w), 0.0),
            SpectralGrid::default(),
        )
    }

    pub fn sweep(&self) -> Result<Sweep> {
        let sub = build_subspace(&self.sampling, &self.reconstruction, &self.prior)?;
        let reg = build_regret(&self.sampling, &self.reconstruction)?;
        let wb = self.reconstruction.basis();
        let x = &self.input;
        let snr_of = |tx: &Signal| error_report_from(wb, x, tx).map(|r| r.snr_db);
        let snr_subspace_db = snr_of(&reconstruct(&sub, x)?)?;
        let snr_regret_db = snr_of(&reconstruct(&reg, x)?)?;
        let snr_orthogonal_db = snr_of(&wb.project(x))?;
        let slack = self.context.slack();

        let row = |lambda: f64| -> Result<SweepRow> {
            let con = combine_constrained(&sub, &reg, lambda)?;
            let report = error_report_from(wb, x, &reconstruct(&con, x)?)?;
            let angles = self.context.angle_set(lambda)?;
            let norms = self.context.residuals(x, lambda)?;
            let bound = regret_bounds(
                SchemeTag::Constrained,
                &angles,
                &norms,
                report.regret_error,
                slack,
            )?;
            Ok(SweepRow {
                lambda,
                snr_subspace_db,
                snr_regret_db,
                snr_constrained_db: report.snr_db,
                snr_orthogonal_db,
                regret_constrained: report.regret_error,
                bound_lower: bound.lower,
                bound_upper: bound.upper,
            })
        };
        let rows = in_pool(|| {
            self.config
                .lambda_grid
                .par_iter()
                .map(|&l| row(l))
                .collect::<Result<Vec<_>>>()
        })??;
        Ok(Sweep {
            rows,
            signal_norm: wb.ip().norm(x),
            slack,
        })
    }
}

/// Worker count from [`THREADS_VAR`], if set.
pub fn configured_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::ConfigSemantic {
                field: THREADS_VAR.into(),
                message: format!("expected a positive integer, got `{v}`"),
            }),
        },
    }
}

fn in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match configured_threads()? {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}"))),
    }
}

/// One row per lambda of the config.
pub fn run_lambda_sweep(config: &ExperimentConfig) -> Result<Sweep> {
    Experiment::build(config)?.sweep()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    pub(crate) const SMALL: &str = r#"
lambda = [0.0, 0.3, 0.64, 1.0]

[grid]
t_min = -16.0
t_max = 16.0
samples_per_period = 16
period = 1.0

[sampling]
generator = { kind = "bspline", order = 0 }

[reconstruction]
generator = { kind = "bspline", order = 3 }

[prior]
generator = { kind = "lowpass", cutoff = 0.5, half_support = 256 }
shifts = "centers"

[input]
kind = "gaussian"
sigma = 0.09
"#;

    #[test]
    fn endpoints_are_coherent_and_bounds_hold() {
        let sweep = run_lambda_sweep(&validate_config(SMALL).unwrap()).unwrap();
        assert_eq!(sweep.rows.len(), 4);
        for (l, d) in sweep.endpoint_defects() {
            assert!(d <= 1e-9, "lambda {l}: {d}");
        }
        assert_eq!(sweep.endpoint_defects().len(), 2);
        assert!(sweep.bound_violations().is_empty());
        for r in &sweep.rows {
            assert!(r.snr_orthogonal_db >= r.snr_constrained_db - 1e-9);
        }
    }

    #[test]
    fn missing_lambda_is_reported() {
        let sweep = run_lambda_sweep(&validate_config(SMALL).unwrap()).unwrap();
        assert!(sweep.row_at(0.64).is_ok());
        assert!(matches!(sweep.row_at(0.5), Err(Error::MissingLambda(_))));
    }

    #[test]
    fn best_row_prefers_first_on_ties() {
        let row = |lambda, snr| SweepRow {
            lambda,
            snr_subspace_db: 0.0,
            snr_regret_db: 0.0,
            snr_constrained_db: snr,
            snr_orthogonal_db: 0.0,
            regret_constrained: 0.0,
            bound_lower: 0.0,
            bound_upper: 0.0,
        };
        let sweep = Sweep {
            rows: vec![row(0.0, 1.0), row(0.5, 2.0), row(1.0, 2.0)],
            signal_norm: 1.0,
            slack: SlackPolicy::STANDARD,
        };
        assert_eq!(sweep.best_constrained().unwrap().lambda, 0.5);
    }
}
