//! Rotary-wing propulsion power and the energy of horizontal-then-vertical moves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    /// Blade profile power in hover, W.
    pub p_blade: f64,
    /// Induced power in hover, W.
    pub p_induced: f64,
    /// Rotor blade tip speed, m/s.
    pub v_tip: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub v0: f64,
    /// Fuselage drag ratio.
    pub d0: f64,
    /// Air density, kg/m³.
    pub rho: f64,
    /// Rotor solidity.
    pub s: f64,
    /// Rotor disc area, m².
    pub disc_area: f64,
    /// UAV mass, kg.
    pub mass: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
    /// Climb speed, m/s.
    pub v_climb: f64,
    /// Descent speed, m/s.
    pub v_descend: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            p_blade: 79.76,
            p_induced: 88.66,
            v_tip: 120.0,
            v0: 4.03,
            d0: 0.6,
            rho: 1.225,
            s: 0.05,
            disc_area: 0.503,
            mass: 2.0,
            g: 9.8,
            v_climb: 4.0,
            v_descend: 4.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_blade", self.p_blade),
            ("p_induced", self.p_induced),
            ("v_tip", self.v_tip),
            ("v0", self.v0),
            ("d0", self.d0),
            ("rho", self.rho),
            ("s", self.s),
            ("disc_area", self.disc_area),
            ("mass", self.mass),
            ("g", self.g),
            ("v_climb", self.v_climb),
            ("v_descend", self.v_descend),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("energy.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Propulsion power at forward speed `v`: blade profile, induced and parasite terms.
pub fn propulsion_power(v: f64, p: &EnergyParams) -> f64 {
    let v2 = v * v;
    let blade = p.p_blade * (1.0 + 3.0 * v2 / (p.v_tip * p.v_tip));
    let v0_2 = p.v0 * p.v0;
    let induced = p.p_induced
        * ((1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)).sqrt() - v2 / (2.0 * v0_2))
            .max(0.0)
            .sqrt();
    let parasite = 0.5 * p.d0 * p.rho * p.s * p.disc_area * v2 * v;
    blade + induced + parasite
}

pub fn hover_power(p: &EnergyParams) -> f64 {
    propulsion_power(0.0, p)
}

/// Climb power: hover power plus the rate of potential-energy gain.
pub fn climb_power(v: f64, p: &EnergyParams) -> f64 {
    hover_power(p) + p.mass * p.g * v
}

/// Descent power, floored at zero.
pub fn descend_power(v: f64, p: &EnergyParams) -> f64 {
    (hover_power(p) - p.mass * p.g * v).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightMode {
    Horizontal,
    Climb,
    Descend,
}

/// Upper end of the bracket searched for the horizontal endurance speed.
pub const MAX_SEARCH_SPEED: f64 = 30.0;
const SPEED_TOLERANCE: f64 = 0.01;

/// Golden-section search for the minimiser of a unimodal `f` on `[lo, hi]`.
fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Maximum-endurance speed for the given flight mode.
///
/// Horizontal flight uses the speed that minimises propulsion power; vertical
/// legs fly at the configured climb/descent speeds.
pub fn endurance_speed(p: &EnergyParams, mode: FlightMode) -> f64 {
    match mode {
        FlightMode::Horizontal => golden_section_min(
            |v| propulsion_power(v, p),
            0.0,
            MAX_SEARCH_SPEED,
            SPEED_TOLERANCE / 2.0,
        ),
        FlightMode::Climb => p.v_climb,
        FlightMode::Descend => p.v_descend,
    }
}

/// Speeds and powers of the three flight legs, computed once per parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightProfile {
    pub v_h: f64,
    pub v_c: f64,
    pub v_d: f64,
    pub p_h: f64,
    pub p_c: f64,
    pub p_d: f64,
}

impl FlightProfile {
    pub fn new(p: &EnergyParams) -> Self {
        let v_h = endurance_speed(p, FlightMode::Horizontal);
        let v_c = endurance_speed(p, FlightMode::Climb);
        let v_d = endurance_speed(p, FlightMode::Descend);
        Self {
            v_h,
            v_c,
            v_d,
            p_h: propulsion_power(v_h, p),
            p_c: climb_power(v_c, p),
            p_d: descend_power(v_d, p),
        }
    }

    /// Fly horizontally to above `to`, then climb or descend to its altitude.
    pub fn move_cost(&self, from: Vec3, to: Vec3) -> MoveCost {
        let delta = to - from;
        let horizontal_m = delta.horizontal_norm();
        let (climb_m, descend_m) = if delta.z >= 0.0 {
            (delta.z, 0.0)
        } else {
            (0.0, -delta.z)
        };
        let t_h = horizontal_m / self.v_h;
        let t_c = climb_m / self.v_c;
        let t_d = descend_m / self.v_d;
        MoveCost {
            horizontal_m,
            climb_m,
            descend_m,
            energy_j: self.p_h * t_h + self.p_c * t_c + self.p_d * t_d,
            time_s: t_h + t_c + t_d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MoveCost {
    pub horizontal_m: f64,
    pub climb_m: f64,
    pub descend_m: f64,
    pub energy_j: f64,
    pub time_s: f64,
}

/// Energy and time of one move. Acceleration is neglected and the UAV starts
/// and ends in hover, so there is no kinetic-energy term.
pub fn move_energy(from: Vec3, to: Vec3, p: &EnergyParams) -> MoveCost {
    FlightProfile::new(p).move_cost(from, to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params() -> EnergyParams {
        EnergyParams::default()
    }

    #[test]
    fn hover_power_is_blade_plus_induced() {
        assert_abs_diff_eq!(propulsion_power(0.0, &params()), 168.42, epsilon = 1e-9);
    }

    #[test]
    fn power_at_ten_meters_per_second() {
        // Independent evaluation of the three terms at v = 10 m/s.
        let blade = 79.76 * (1.0 + 300.0 / 14_400.0);
        let induced = 88.66 * ((1.0 + 1e4 / (4.0 * 4.03f64.powi(4))).sqrt() - 100.0 / (2.0 * 4.03 * 4.03)).sqrt();
        let parasite = 0.5 * 0.6 * 1.225 * 0.05 * 0.503 * 1000.0;
        assert_abs_diff_eq!(propulsion_power(10.0, &params()), blade + induced + parasite, epsilon = 1e-9);
        assert_abs_diff_eq!(propulsion_power(10.0, &params()), 125.943_540_926, epsilon = 1e-6);
    }

    #[test]
    fn parasite_term_dominates_at_high_speed() {
        let p = params();
        let v = 500.0;
        let cubic = 0.5 * p.d0 * p.rho * p.s * p.disc_area * v * v * v;
        assert!((propulsion_power(v, &p) / cubic - 1.0).abs() < 0.1);
    }

    #[test]
    fn endurance_speed_matches_grid_scan() {
        let p = params();
        let v_h = endurance_speed(&p, FlightMode::Horizontal);
        let (mut best_v, mut best_p) = (0.0, f64::INFINITY);
        for i in 1..=30_000 {
            let v = i as f64 * 1e-3;
            let pw = propulsion_power(v, &p);
            if pw < best_p {
                best_p = pw;
                best_v = v;
            }
        }
        assert!((v_h - best_v).abs() <= 0.01, "golden {v_h} vs grid {best_v}");
        assert!(propulsion_power(v_h, &p) <= propulsion_power(0.0, &p));
        assert_eq!(endurance_speed(&p, FlightMode::Climb), 4.0);
        assert_eq!(endurance_speed(&p, FlightMode::Descend), 4.0);
    }

    #[test]
    fn power_curve_is_unimodal_on_bracket() {
        let p = params();
        let powers: Vec<f64> = (0..=3000).map(|i| propulsion_power(i as f64 * 0.01, &p)).collect();
        let argmin = powers
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        assert!(argmin > 0 && argmin < powers.len() - 1);
        assert!(powers[..=argmin].windows(2).all(|w| w[1] <= w[0]));
        assert!(powers[argmin..].windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stationary_move_is_free() {
        let p = Vec3::new(3.0, 4.0, 110.0);
        let c = move_energy(p, p, &params());
        assert_eq!(c.energy_j, 0.0);
        assert_eq!(c.time_s, 0.0);
    }

    #[test]
    fn horizontal_move_energy() {
        let pr = params();
        let v_h = endurance_speed(&pr, FlightMode::Horizontal);
        let c = move_energy(Vec3::new(0.0, 0.0, 100.0), Vec3::new(30.0, 40.0, 100.0), &pr);
        assert_abs_diff_eq!(c.horizontal_m, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.energy_j, propulsion_power(v_h, &pr) * 50.0 / v_h, epsilon = 1e-9);
    }

    #[test]
    fn horizontal_plus_climb_is_sum_of_legs() {
        let pr = params();
        let profile = FlightProfile::new(&pr);
        let c = move_energy(Vec3::new(0.0, 0.0, 100.0), Vec3::new(50.0, 0.0, 120.0), &pr);
        let horizontal_leg = propulsion_power(profile.v_h, &pr) * 50.0 / profile.v_h;
        // Climb leg at 4 m/s: (168.42 + 2·9.8·4) W for 5 s.
        let climb_leg = (168.42 + 78.4) * 5.0;
        assert_abs_diff_eq!(c.energy_j, horizontal_leg + climb_leg, epsilon = 1e-6);
        assert_abs_diff_eq!(c.time_s, 50.0 / profile.v_h + 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(climb_leg, 1234.1, epsilon = 1e-9);
    }

    #[test]
    fn descent_is_cheaper_than_climb() {
        let pr = params();
        let up = move_energy(Vec3::new(0.0, 0.0, 100.0), Vec3::new(0.0, 0.0, 120.0), &pr);
        let down = move_energy(Vec3::new(0.0, 0.0, 120.0), Vec3::new(0.0, 0.0, 100.0), &pr);
        assert_eq!(up.climb_m, 20.0);
        assert_eq!(down.descend_m, 20.0);
        assert!(down.energy_j < up.energy_j);
        assert_abs_diff_eq!(down.energy_j, (168.42 - 78.4) * 5.0, epsilon = 1e-9);
    }

    #[test]
    fn vertical_power_exceeds_horizontal() {
        let p = params();
        for v in 1..=10 {
            let v = v as f64;
            assert!(climb_power(v, &p) > propulsion_power(v, &p));
        }
    }

    #[test]
    fn descent_power_never_negative() {
        let p = params();
        assert_eq!(descend_power(100.0, &p), 0.0);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = EnergyParams { mass: 0.0, ..params() };
        assert!(p.validate().is_err());
        params().validate().unwrap();
    }

    proptest! {
        #[test]
        fn energy_monotone_in_each_leg(
            d in 0.0..100.0f64, dd in 0.0..50.0f64,
            h in 0.0..20.0f64, dh in 0.0..10.0f64,
            heading in -3.1..3.1f64,
        ) {
            let profile = FlightProfile::new(&params());
            let start = Vec3::new(0.0, 0.0, 110.0);
            let dir = Vec3::new(heading.cos(), heading.sin(), 0.0);
            let e = |dist: f64, dz: f64| profile.move_cost(start, start + dir * dist + Vec3::new(0.0, 0.0, dz)).energy_j;
            prop_assert!(e(d + dd, h) >= e(d, h));
            prop_assert!(e(d, h + dh) >= e(d, h));
            prop_assert!(e(d, -(h + dh)) >= e(d, -h));
        }

        #[test]
        fn energy_depends_only_on_horizontal_distance(d in 0.0..100.0f64, a in -3.1..3.1f64, b in -3.1..3.1f64) {
            let profile = FlightProfile::new(&params());
            let start = Vec3::new(1.0, -2.0, 105.0);
            let ea = profile.move_cost(start, start + Vec3::new(d * a.cos(), d * a.sin(), 3.0)).energy_j;
            let eb = profile.move_cost(start, start + Vec3::new(d * b.cos(), d * b.sin(), 3.0)).energy_j;
            prop_assert!((ea - eb).abs() < 1e-9 * ea.max(1.0));
        }

        #[test]
        fn energy_zero_iff_no_motion(dx in -1.0..1.0f64, dy in -1.0..1.0f64, dz in -1.0..1.0f64) {
            let profile = FlightProfile::new(&params());
            let from = Vec3::new(0.0, 0.0, 110.0);
            let to = from + Vec3::new(dx, dy, dz);
            let c = profile.move_cost(from, to);
            prop_assert_eq!(c.energy_j == 0.0, to == from);
            prop_assert!(c.energy_j >= 0.0 && c.time_s >= 0.0);
        }
    }
}
