//! Probabilistic line-of-sight air-to-ground channel and achievable rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beamforming::{db_to_linear, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::geometry::{elevation_deg, Vec3};

/// Converts a power spectral density in dBm/Hz over `bandwidth_hz` to watts.
pub fn noise_power_watts(psd_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    db_to_linear(psd_dbm_per_hz - 30.0) * bandwidth_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Environment constant `C` of the LoS sigmoid (degrees).
    pub c_env: f64,
    /// Environment constant `D` of the LoS sigmoid (1/degree).
    pub d_env: f64,
    /// Linear excess attenuation of the LoS link.
    pub mu_los: f64,
    /// Linear excess attenuation of the NLoS link.
    pub mu_nlos: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
    /// Receiver noise power, W.
    pub noise_power: f64,
    /// Total transmit power of the virtual array, W.
    pub p_total: f64,
}

impl ChannelParams {
    /// Urban-like defaults at 2.4 GHz: 3 dB / 23 dB excess attenuation,
    /// −157 dBm/Hz noise, 1 MHz bandwidth and 0.1 W per UAV.
    pub fn with_uavs(n_uavs: usize) -> Self {
        let bandwidth = 1e6;
        Self {
            c_env: 10.0,
            d_env: 0.6,
            mu_los: db_to_linear(3.0),
            mu_nlos: db_to_linear(23.0),
            alpha: 2.0,
            f_c: 2.4e9,
            bandwidth,
            noise_power: noise_power_watts(-157.0, bandwidth),
            p_total: 0.1 * n_uavs as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_env", self.c_env),
            ("d_env", self.d_env),
            ("mu_los", self.mu_los),
            ("mu_nlos", self.mu_nlos),
            ("f_c", self.f_c),
            ("bandwidth", self.bandwidth),
            ("noise_power", self.noise_power),
            ("p_total", self.p_total),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("channel.{name} must be positive, got {v}")));
            }
        }
        if self.mu_nlos < self.mu_los {
            return Err(Error::Config(format!(
                "channel.mu_nlos ({}) must not be below mu_los ({})",
                self.mu_nlos, self.mu_los
            )));
        }
        if !(self.alpha >= 2.0) {
            return Err(Error::Config(format!("channel.alpha must be >= 2, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    /// Free-space constant `K₀ = (4π f_c / c)²`.
    pub fn k0(&self) -> f64 {
        (4.0 * PI * self.f_c / SPEED_OF_LIGHT).powi(2)
    }
}

/// Geometry and gain of one array-to-station link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub distance: f64,
    pub elevation_deg: f64,
    pub gain: f64,
}

impl LinkBudget {
    /// Link from the array origin to a ground station.
    pub fn between(origin: Vec3, bs: Vec3, gain: f64) -> Self {
        Self {
            distance: origin.distance(bs),
            elevation_deg: elevation_deg(origin, bs),
            gain,
        }
    }
}

/// LoS probability for an elevation angle given in degrees.
pub fn los_probability(elevation_deg: f64, params: &ChannelParams) -> f64 {
    1.0 / (1.0 + params.c_env * (-params.d_env * (elevation_deg - params.c_env)).exp())
}

/// Average channel power gain `g_c` over the LoS/NLoS mixture.
pub fn channel_power_gain(budget: &LinkBudget, params: &ChannelParams) -> f64 {
    let p_los = los_probability(budget.elevation_deg, params);
    let attenuation = p_los * params.mu_los + (1.0 - p_los) * params.mu_nlos;
    1.0 / (params.k0() * budget.distance.powf(params.alpha) * attenuation)
}

/// Received SNR `g_c P_t G / σ²`.
pub fn snr(budget: &LinkBudget, params: &ChannelParams) -> f64 {
    channel_power_gain(budget, params) * params.p_total * budget.gain / params.noise_power
}

/// Shannon rate in bits per second.
pub fn transmission_rate(budget: &LinkBudget, params: &ChannelParams) -> f64 {
    params.bandwidth * (1.0 + snr(budget, params)).log2()
}
