//! Monte-Carlo phase-error sweeps and station-distance sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{array_gain_with, sample_phase_error, ArrayConfig};
use crate::channel::{transmission_rate, LinkBudget};
use crate::env::{station_at, EnvConfig};
use crate::error::{Error, Result};
use crate::geometry::{array_origin, elevation_deg, steering_angles, Vec3};

use super::evaluate::{evaluate, Controller};
use crate::beamforming::UavPose;

/// One row of the phase-error sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweepRow {
    pub gamma: f64,
    pub n_samples: usize,
    /// Mean rate under phase errors, bit/s.
    pub mean_rate: f64,
    pub mean_gain: f64,
    /// Rate of the same array without phase errors, bit/s.
    pub error_free_rate: f64,
}

/// One row of the distance sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSweepRow {
    pub distance: f64,
    pub elevation_deg: f64,
    pub gain: f64,
    pub rate: f64,
    pub energy: f64,
}

fn link_rate(cfg: &EnvConfig, origin: Vec3, bs: Vec3, gain: f64) -> f64 {
    transmission_rate(&LinkBudget::between(origin, bs, gain), &cfg.channel)
}

/// Mean rate and gain of `layout` serving `bs` when every element carries an
/// independent Tikhonov(γ) phase error. Sample `s` of gamma `g` draws from
/// its own ChaCha stream `g · n_samples + s`, so results do not depend on
/// scheduling.
pub fn phase_error_sweep(
    cfg: &EnvConfig,
    layout: &ArrayConfig,
    bs: Vec3,
    gammas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<PhaseSweepRow>> {
    if n_samples == 0 {
        return Err(Error::Config("sweep.n_samples must be at least 1".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Config(format!("phase-error concentration must be positive, got {g}")));
    }
    let origin = array_origin(&layout.positions())?;
    let steer = steering_angles(origin, bs)?.dir;
    let clean = array_gain_with(layout, steer, cfg.efficiency, cfg.gain_method, None)?;
    let error_free_rate = link_rate(cfg, origin, bs, clean);
    let n = layout.len();
    gammas
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let samples = (0..n_samples)
                .into_par_iter()
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((gi * n_samples + s) as u64);
                    let errors: Vec<f64> = (0..n).map(|_| sample_phase_error(gamma, &mut rng)).collect();
                    let gain = array_gain_with(layout, steer, cfg.efficiency, cfg.gain_method, Some(&errors))?;
                    Ok((link_rate(cfg, origin, bs, gain), gain))
                })
                .collect::<Result<Vec<_>>>()?;
            let (rate_sum, gain_sum) = samples.iter().fold((0.0, 0.0), |(r, g), &(a, b)| (r + a, g + b));
            Ok(PhaseSweepRow {
                gamma,
                n_samples,
                mean_rate: rate_sum / n_samples as f64,
                mean_gain: gain_sum / n_samples as f64,
                error_free_rate,
            })
        })
        .collect()
}

/// Serves a station at each ground distance along `azimuth` from the same
/// initial poses.
pub fn distance_sweep(
    cfg: &EnvConfig,
    controller: Controller<'_>,
    initial: &[UavPose],
    azimuth: f64,
    distances: &[f64],
) -> Result<Vec<DistanceSweepRow>> {
    if let Some(d) = distances.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::Config(format!("sweep distances must be positive, got {d}")));
    }
    distances
        .par_iter()
        .map(|&distance| {
            let bs = station_at(&cfg.area, azimuth, distance);
            let report = evaluate(cfg, controller, initial, &[bs])?;
            let task = &report.tasks[0];
            let origin = array_origin(&task.poses.iter().map(|p| p.position).collect::<Vec<_>>())?;
            Ok(DistanceSweepRow {
                distance,
                elevation_deg: elevation_deg(origin, bs),
                gain: task.gain,
                rate: task.rate,
                energy: task.energy,
            })
        })
        .collect()
}
