//! Array factor, phase compensation, directivity and phase-error modelling for
//! a virtual antenna array formed by single-antenna UAVs.
//!
//! Every element radiates isotropically (0 dB element pattern), so the gain of
//! the array equals its directivity scaled by the array efficiency. Two routes
//! to the sphere integral in the directivity denominator are provided:
//!
//! * [`sphere_integral_quadrature`]: midpoint rule on a uniform `(θ, φ)` grid;
//! * [`sphere_integral_exact`]: the closed form
//!   `4π Σᵢⱼ Re(cᵢ c̄ⱼ) sinc(k |rᵢ − rⱼ|)` obtained by integrating each
//!   pairwise term of `|AF|²` analytically.
//!
//! The quadrature route is only accurate while the grid resolves the pattern
//! lobes, i.e. for arrays spanning a few tens of wavelengths at most.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SphericalDir, Vec3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// One element of the virtual array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavPose {
    pub position: Vec3,
    /// Excitation current weight in `[0, 1]`.
    pub excitation: f64,
}

impl UavPose {
    pub fn new(position: Vec3, excitation: f64) -> Self {
        Self {
            position,
            excitation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub poses: Vec<UavPose>,
    pub wavelength: f64,
}

impl ArrayConfig {
    pub fn new(poses: Vec<UavPose>, wavelength: f64) -> Result<Self> {
        let cfg = Self { poses, wavelength };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.poses.is_empty() {
            return Err(Error::EmptyPositions);
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::Config(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.poses.iter().map(|p| p.position).collect()
    }

    pub fn total_excitation(&self) -> f64 {
        self.poses.iter().map(|p| p.excitation).sum()
    }
}

/// Grid used for the sphere integral in the directivity denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_theta: 181,
            n_phi: 360,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 2 || self.n_phi < 2 {
            return Err(Error::Config(format!(
                "quadrature grid must be at least 2x2, got {}x{}",
                self.n_theta, self.n_phi
            )));
        }
        Ok(())
    }

    pub fn d_theta(&self) -> f64 {
        PI / self.n_theta as f64
    }

    pub fn d_phi(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    /// Midpoint of row `k`.
    pub fn theta(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.d_theta()
    }

    /// Midpoint of column `l`, in `(-π, π)`.
    pub fn phi(&self, l: usize) -> f64 {
        -PI + (l as f64 + 0.5) * self.d_phi()
    }
}

/// How the directivity denominator is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainMethod {
    Quadrature(QuadratureSpec),
    #[default]
    ClosedForm,
}

/// Far-field magnitude pattern of a single element. Omni-directional UAV
/// antennas make this identically 1.
#[inline]
pub fn element_pattern(_dir: SphericalDir) -> f64 {
    1.0
}

/// Phase that cancels the propagation delay of `pose` towards `steer`.
pub fn initial_phase(pose: &UavPose, steer: SphericalDir, wavelength: f64) -> f64 {
    -(TAU / wavelength) * pose.position.dot(steer.unit_vector())
}

/// Complex element weights `Iᵢ exp(j(Ψᵢ + εᵢ))` for a steered array.
fn element_weights(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    phase_errors: Option<&[f64]>,
) -> Result<Vec<Complex64>> {
    if let Some(eps) = phase_errors {
        if eps.len() != cfg.len() {
            return Err(Error::DimensionMismatch {
                expected: cfg.len(),
                got: eps.len(),
            });
        }
    }
    Ok(cfg
        .poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let eps = phase_errors.map_or(0.0, |e| e[i]);
            Complex64::from_polar(
                pose.excitation,
                initial_phase(pose, steer, cfg.wavelength) + eps,
            )
        })
        .collect())
}

fn af_with_weights(weights: &[Complex64], positions: &[Vec3], k: f64, u: Vec3) -> Complex64 {
    weights
        .iter()
        .zip(positions)
        .map(|(w, p)| w * Complex64::from_polar(1.0, k * p.dot(u)))
        .sum()
}

/// Array factor at `eval_dir` of the array phase-compensated towards `steer`,
/// optionally perturbed by per-element phase errors.
pub fn array_factor(
    cfg: &ArrayConfig,
    eval_dir: SphericalDir,
    steer: SphericalDir,
    phase_errors: Option<&[f64]>,
) -> Result<Complex64> {
    let weights = element_weights(cfg, steer, phase_errors)?;
    Ok(af_with_weights(
        &weights,
        &cfg.positions(),
        cfg.wavenumber(),
        eval_dir.unit_vector(),
    ))
}

/// Midpoint-rule estimate of `∬ |AF(θ,φ)|² w(θ,φ)² sinθ dθ dφ`.
///
/// Rows are evaluated in parallel and reduced in row order, so the result does
/// not depend on the thread count.
pub fn sphere_integral_quadrature(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    phase_errors: Option<&[f64]>,
    quad: QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    let weights = element_weights(cfg, steer, phase_errors)?;
    let k = cfg.wavenumber();
    let positions = cfg.positions();
    let phis: Vec<(f64, f64)> = (0..quad.n_phi).map(|l| quad.phi(l).sin_cos()).collect();

    let rows: Vec<f64> = (0..quad.n_theta)
        .into_par_iter()
        .map(|row| {
            let theta = quad.theta(row);
            let (st, ct) = theta.sin_cos();
            // Fold the row-constant z term into the weights.
            let row_weights: Vec<Complex64> = weights
                .iter()
                .zip(&positions)
                .map(|(w, p)| w * Complex64::from_polar(1.0, k * p.z * ct))
                .collect();
            let mut acc = 0.0;
            for (l, &(sp, cp)) in phis.iter().enumerate() {
                let af: Complex64 = row_weights
                    .iter()
                    .zip(&positions)
                    .map(|(w, p)| w * Complex64::from_polar(1.0, k * st * (p.x * cp + p.y * sp)))
                    .sum();
                let w = element_pattern(SphericalDir::new(theta, quad.phi(l)));
                acc += af.norm_sqr() * w * w;
            }
            acc * st
        })
        .collect();
    Ok(rows.iter().sum::<f64>() * quad.d_theta() * quad.d_phi())
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Exact value of `∬ |AF|² sinθ dθ dφ` for isotropic elements.
pub fn sphere_integral_exact(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    phase_errors: Option<&[f64]>,
) -> Result<f64> {
    let weights = element_weights(cfg, steer, phase_errors)?;
    let k = cfg.wavenumber();
    let n = weights.len();
    let mut total = 0.0;
    for i in 0..n {
        total += weights[i].norm_sqr();
        for j in (i + 1)..n {
            let d = cfg.poses[i].position.distance(cfg.poses[j].position);
            total += 2.0 * (weights[i] * weights[j].conj()).re * sinc(k * d);
        }
    }
    Ok(4.0 * PI * total)
}

fn gain_from_parts(af_steer: Complex64, steer: SphericalDir, denominator: f64, efficiency: f64) -> Result<f64> {
    if !(denominator > 0.0) {
        return Err(Error::DegenerateArray);
    }
    let w = element_pattern(steer);
    Ok(4.0 * PI * af_steer.norm_sqr() * w * w / denominator * efficiency)
}

fn check_efficiency(efficiency: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::Config(format!(
            "array efficiency must lie in [0, 1], got {efficiency}"
        )));
    }
    Ok(())
}

/// Array gain towards `steer`, with the denominator evaluated by quadrature.
pub fn array_gain(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    efficiency: f64,
    quad: QuadratureSpec,
) -> Result<f64> {
    array_gain_with(cfg, steer, efficiency, GainMethod::Quadrature(quad), None)
}

/// Array gain towards `steer` using the closed-form denominator.
pub fn array_gain_exact(cfg: &ArrayConfig, steer: SphericalDir, efficiency: f64) -> Result<f64> {
    array_gain_with(cfg, steer, efficiency, GainMethod::ClosedForm, None)
}

/// Array gain towards `steer` under optional phase errors.
pub fn array_gain_with(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    efficiency: f64,
    method: GainMethod,
    phase_errors: Option<&[f64]>,
) -> Result<f64> {
    check_efficiency(efficiency)?;
    let af = array_factor(cfg, steer, steer, phase_errors)?;
    let denominator = match method {
        GainMethod::Quadrature(quad) => sphere_integral_quadrature(cfg, steer, phase_errors, quad)?,
        GainMethod::ClosedForm => sphere_integral_exact(cfg, steer, phase_errors)?,
    };
    gain_from_parts(af, steer, denominator, efficiency)
}

/// Gain pattern `G(θ, φ)` sampled on the quadrature grid, row-major in θ.
pub fn gain_pattern(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    efficiency: f64,
    quad: QuadratureSpec,
) -> Result<Vec<f64>> {
    check_efficiency(efficiency)?;
    let denominator = sphere_integral_quadrature(cfg, steer, None, quad)?;
    if !(denominator > 0.0) {
        return Err(Error::DegenerateArray);
    }
    let weights = element_weights(cfg, steer, None)?;
    let positions = cfg.positions();
    let k = cfg.wavenumber();
    let pattern = (0..quad.n_theta)
        .into_par_iter()
        .flat_map_iter(|row| {
            let theta = quad.theta(row);
            let weights = &weights;
            let positions = &positions;
            (0..quad.n_phi).map(move |l| {
                let dir = SphericalDir::new(theta, quad.phi(l));
                let af = af_with_weights(weights, positions, k, dir.unit_vector());
                let w = element_pattern(dir);
                4.0 * PI * af.norm_sqr() * w * w / denominator * efficiency
            })
        })
        .collect();
    Ok(pattern)
}

/// `sinθ`-weighted average of the gain pattern over the sphere, `(1/4π) ∬ G dΩ`.
/// Equals the efficiency for a correctly normalised directivity.
pub fn sphere_mean_gain(
    cfg: &ArrayConfig,
    steer: SphericalDir,
    efficiency: f64,
    quad: QuadratureSpec,
) -> Result<f64> {
    let pattern = gain_pattern(cfg, steer, efficiency, quad)?;
    let mut total = 0.0;
    for row in 0..quad.n_theta {
        let st = quad.theta(row).sin();
        let row_sum: f64 = pattern[row * quad.n_phi..(row + 1) * quad.n_phi].iter().sum();
        total += row_sum * st;
    }
    Ok(total * quad.d_theta() * quad.d_phi() / (4.0 * PI))
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Exponentially scaled modified Bessel function `e^{-x} I₀(x)` for `x ≥ 0`,
/// summed from its power series until the relative term drops below 1e-12.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    // Terms (x²/4)^k / (k!)² peak near k = x/2; accumulate them in log space
    // relative to e^{x} so large arguments do not overflow.
    let log_half = (x / 2.0).ln();
    let mut log_term = -x;
    let mut sum = log_term.exp();
    let mut k = 0u64;
    loop {
        k += 1;
        log_term += 2.0 * (log_half - (k as f64).ln());
        let term = log_term.exp();
        sum += term;
        if (k as f64) > x / 2.0 && term <= 1e-12 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0_scaled(x) * x.abs().exp()
}

/// Tikhonov (von Mises, zero mean) density of a phase error on `(-π, π)`.
pub fn tikhonov_density(eps: f64, gamma: f64) -> f64 {
    if eps.abs() >= PI {
        return 0.0;
    }
    (gamma * (eps.cos() - 1.0)).exp() / (TAU * bessel_i0_scaled(gamma))
}

/// Draws one Tikhonov-distributed phase error with concentration `gamma`.
///
/// Rejection sampling against the uniform density on `(-π, π)` scaled by
/// `e^γ / (2π I₀(γ))`: a proposal `ε` is kept with probability
/// `exp(γ (cos ε − 1))`.
pub fn sample_phase_error<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    debug_assert!(gamma >= 0.0);
    loop {
        let eps = rng.random_range(-PI..PI);
        if gamma == 0.0 {
            return eps;
        }
        let u: f64 = rng.random();
        if u <= (gamma * (eps.cos() - 1.0)).exp() {
            return eps;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LAMBDA: f64 = SPEED_OF_LIGHT / 2.4e9;

    fn unit_array(points: &[Vec3]) -> ArrayConfig {
        ArrayConfig::new(points.iter().map(|&p| UavPose::new(p, 1.0)).collect(), LAMBDA).unwrap()
    }

    fn random_array(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> ArrayConfig {
        let poses = (0..n)
            .map(|_| {
                UavPose::new(
                    Vec3::new(
                        rng.random_range(-extent..extent),
                        rng.random_range(-extent..extent),
                        100.0 + rng.random_range(-extent..extent),
                    ),
                    rng.random_range(0.2..1.0),
                )
            })
            .collect();
        ArrayConfig::new(poses, LAMBDA).unwrap()
    }

    #[test]
    fn initial_phase_examples() {
        let steer = SphericalDir::new(PI / 2.0, 0.0);
        assert_eq!(initial_phase(&UavPose::new(Vec3::ZERO, 1.0), steer, LAMBDA), 0.0);
        let half = UavPose::new(Vec3::new(LAMBDA / 2.0, 0.0, 0.0), 1.0);
        assert_abs_diff_eq!(initial_phase(&half, steer, LAMBDA), -PI, epsilon = 1e-12);
        let zenith = SphericalDir::new(0.0, 0.3);
        let p = UavPose::new(Vec3::new(3.0, -1.0, 7.5), 1.0);
        assert_abs_diff_eq!(initial_phase(&p, zenith, LAMBDA), -TAU / LAMBDA * 7.5, epsilon = 1e-9);
    }

    #[test]
    fn compensated_array_sums_coherently() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = unit_array(
            &(0..8)
                .map(|_| Vec3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), 110.0))
                .collect::<Vec<_>>(),
        );
        let steer = SphericalDir::new(1.7, -2.2);
        let af = array_factor(&cfg, steer, steer, None).unwrap();
        assert_abs_diff_eq!(af.re, 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(af.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn single_element_is_unit_phasor() {
        let cfg = unit_array(&[Vec3::new(1.0, 2.0, 100.0)]);
        let af = array_factor(&cfg, SphericalDir::new(0.4, 1.1), SphericalDir::new(2.0, -0.5), None).unwrap();
        assert_abs_diff_eq!(af.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_wave_pair_nulls_on_axis() {
        let cfg = unit_array(&[Vec3::new(LAMBDA / 4.0, 0.0, 0.0), Vec3::new(-LAMBDA / 4.0, 0.0, 0.0)]);
        let af = array_factor(&cfg, SphericalDir::new(PI / 2.0, 0.0), SphericalDir::new(0.0, 0.0), None).unwrap();
        assert!(af.norm() < 1e-12);
    }

    #[test]
    fn zero_errors_reproduce_ideal_factor_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = random_array(&mut rng, 12, 3.0);
        let steer = SphericalDir::new(1.9, 0.7);
        let eval = SphericalDir::new(1.2, -2.0);
        let zeros = vec![0.0; 12];
        let a = array_factor(&cfg, eval, steer, None).unwrap();
        let b = array_factor(&cfg, eval, steer, Some(&zeros)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_error_length_is_checked() {
        let cfg = unit_array(&[Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)]);
        let d = SphericalDir::new(1.0, 0.0);
        assert!(matches!(
            array_factor(&cfg, d, d, Some(&[0.1])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn isotropic_element_has_unit_gain() {
        let cfg = unit_array(&[Vec3::new(0.0, 0.0, 100.0)]);
        let steer = SphericalDir::new(2.0, 0.5);
        let g = array_gain(&cfg, steer, 1.0, QuadratureSpec::default()).unwrap();
        // Midpoint rule for ∫ sinθ dθ has relative error ~ (π/181)²/24.
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(array_gain_exact(&cfg, steer, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn efficiency_scales_gain_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = random_array(&mut rng, 6, 1.0);
        let steer = SphericalDir::new(1.8, 0.2);
        let quad = QuadratureSpec { n_theta: 61, n_phi: 120 };
        let full = array_gain(&cfg, steer, 1.0, quad).unwrap();
        let half = array_gain(&cfg, steer, 0.5, quad).unwrap();
        assert_abs_diff_eq!(half, 0.5 * full, epsilon = 1e-12);
        assert!(array_gain(&cfg, steer, 1.5, quad).is_err());
    }

    #[test]
    fn zero_excitation_is_degenerate() {
        let cfg = ArrayConfig::new(vec![UavPose::new(Vec3::ZERO, 0.0); 3], LAMBDA).unwrap();
        let steer = SphericalDir::new(1.0, 0.0);
        assert!(matches!(
            array_gain(&cfg, steer, 1.0, QuadratureSpec { n_theta: 10, n_phi: 10 }),
            Err(Error::DegenerateArray)
        ));
        assert!(matches!(array_gain_exact(&cfg, steer, 1.0), Err(Error::DegenerateArray)));
    }

    #[test]
    fn sixteen_element_array_beats_isotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = random_array(&mut rng, 16, 2.0);
        let steer = SphericalDir::new(1.65, 0.9);
        let single = array_gain(&unit_array(&[Vec3::ZERO]), steer, 1.0, QuadratureSpec::default()).unwrap();
        let g = array_gain(&cfg, steer, 1.0, QuadratureSpec::default()).unwrap();
        assert!(g >= single, "gain {g} below isotropic {single}");
    }

    #[test]
    fn quadrature_matches_closed_form_for_compact_arrays() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let cfg = random_array(&mut rng, 16, 1.5 * LAMBDA);
            let steer = SphericalDir::new(rng.random_range(0.2..3.0), rng.random_range(-3.0..3.0));
            let q = sphere_integral_quadrature(&cfg, steer, None, QuadratureSpec::default()).unwrap();
            let e = sphere_integral_exact(&cfg, steer, None).unwrap();
            assert!((q - e).abs() / e < 1e-3, "quadrature {q} vs exact {e}");
        }
    }

    #[test]
    fn sphere_mean_gain_is_efficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = random_array(&mut rng, 5, 2.0 * LAMBDA);
        let steer = SphericalDir::new(1.2, 2.0);
        let quad = QuadratureSpec { n_theta: 91, n_phi: 180 };
        let mean = sphere_mean_gain(&cfg, steer, 0.8, quad).unwrap();
        assert_abs_diff_eq!(mean, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn bessel_i0_reference_values() {
        // Abramowitz & Stegun table 9.8.
        assert_abs_diff_eq!(bessel_i0(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bessel_i0(1.0), 1.266_065_877_752_008_4, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_i0(5.0), 27.239_871_823_604_44, epsilon = 1e-11);
        // Large-argument asymptote e^{-x} I₀(x) ~ (2πx)^{-1/2} (1 + 1/(8x) + 9/(128x²)).
        let x = 1e4;
        let asym = (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x)) / (TAU * x).sqrt();
        assert_abs_diff_eq!(bessel_i0_scaled(x) / asym, 1.0, epsilon = 1e-10);
    }

    fn integrate_density(gamma: f64, n: usize) -> f64 {
        let h = TAU / n as f64;
        (0..n).map(|i| tikhonov_density(-PI + (i as f64 + 0.5) * h, gamma)).sum::<f64>() * h
    }

    #[test]
    fn tikhonov_density_normalizes() {
        for gamma in [0.0, 0.5, 5.0, 50.0, 500.0] {
            assert_abs_diff_eq!(integrate_density(gamma, 200_000), 1.0, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(tikhonov_density(0.3, 0.0), 1.0 / TAU, epsilon = 1e-15);
    }

    #[test]
    fn uniform_phase_errors_when_unconcentrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut bins = [0usize; 8];
        let n = 80_000;
        for _ in 0..n {
            let e = sample_phase_error(0.0, &mut rng);
            assert!(e > -PI && e < PI);
            bins[((e + PI) / TAU * 8.0) as usize] += 1;
        }
        for b in bins {
            // 10000 expected per bin, σ ≈ 94.
            assert!((b as f64 - 10_000.0).abs() < 500.0, "bin count {b}");
        }
    }

    #[test]
    fn concentrated_phase_errors_are_narrow() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_phase_error(50.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(var.sqrt() < 0.15, "std {}", var.sqrt());
        assert!(mean.abs() < 0.005);
    }

    #[test]
    fn sampled_errors_follow_the_density() {
        // Compare the empirical mean of cos ε with I₁(γ)/I₀(γ) computed by quadrature.
        let gamma = 4.0;
        let n_q = 100_000;
        let h = TAU / n_q as f64;
        let expected_cos: f64 = (0..n_q)
            .map(|i| {
                let e = -PI + (i as f64 + 0.5) * h;
                e.cos() * tikhonov_density(e, gamma)
            })
            .sum::<f64>()
            * h;
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let n = 200_000;
        let mean_cos = (0..n).map(|_| sample_phase_error(gamma, &mut rng).cos()).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean_cos, expected_cos, epsilon = 3e-3);
    }

    #[test]
    fn lower_concentration_degrades_mainlobe() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let cfg = random_array(&mut rng, 16, 20.0);
        let steer = SphericalDir::new(1.6, 0.4);
        let mut means = Vec::new();
        for gamma in [1.0, 5.0, 20.0, 80.0] {
            let trials = 2000;
            let mut acc = 0.0;
            for _ in 0..trials {
                let eps: Vec<f64> = (0..16).map(|_| sample_phase_error(gamma, &mut rng)).collect();
                acc += array_factor(&cfg, steer, steer, Some(&eps)).unwrap().norm();
            }
            means.push(acc / trials as f64);
        }
        assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
    }

    proptest! {
        #[test]
        fn af_magnitude_bounded_by_total_excitation(
            seed in 0u64..1000,
            theta in 0.0..PI, phi in -PI..PI,
            st in 0.0..PI, sp in -PI..PI,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = random_array(&mut rng, 7, 30.0);
            let steer = SphericalDir::new(st, sp);
            let bound = cfg.total_excitation();
            let af = array_factor(&cfg, SphericalDir::new(theta, phi), steer, None).unwrap();
            prop_assert!(af.norm() <= bound + 1e-9);
            let at_steer = array_factor(&cfg, steer, steer, None).unwrap();
            prop_assert!((at_steer.norm() - bound).abs() < 1e-9);
        }

        #[test]
        fn af_magnitude_is_translation_invariant(
            seed in 0u64..1000,
            tx in -50.0..50.0f64, ty in -50.0..50.0f64, tz in -10.0..10.0f64,
            theta in 0.0..PI, phi in -PI..PI,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = random_array(&mut rng, 6, 2.0);
            let t = Vec3::new(tx, ty, tz);
            let moved = ArrayConfig::new(
                cfg.poses.iter().map(|p| UavPose::new(p.position + t, p.excitation)).collect(),
                cfg.wavelength,
            ).unwrap();
            let steer = SphericalDir::new(1.7, 0.3);
            let eval = SphericalDir::new(theta, phi);
            let a = array_factor(&cfg, eval, steer, None).unwrap().norm();
            let b = array_factor(&moved, eval, steer, None).unwrap().norm();
            prop_assert!((a - b).abs() < 1e-6);
        }

        #[test]
        fn db_round_trip(db in -200.0..200.0f64) {
            prop_assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
    }
}
