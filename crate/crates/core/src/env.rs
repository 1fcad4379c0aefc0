//! Single-slot Markov game: each UAV observes the swarm and the target
//! station, picks a target pose and excitation, and is rewarded for the
//! resulting beamforming gain and the energy spent getting there.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{array_gain_with, ArrayConfig, GainMethod, UavPose};
use crate::channel::{transmission_rate, ChannelParams, LinkBudget};
use crate::energy::{hover_power, EnergyParams, FlightProfile, MoveCost};
use crate::error::{Error, Result};
use crate::geometry::{array_origin, reference_point, steering_angles, AreaBounds, SphericalDir, Vec3};

/// Number of unit-interval action components: target x, y, z and excitation.
pub const ACTION_DIM: usize = 4;

/// Weights of the five reward parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub transmission: f64,
    pub altitude: f64,
    pub energy: f64,
    pub to_reference: f64,
    pub to_uavs: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { transmission: 100.0, altitude: 4.0, energy: 30.0, to_reference: 12.0, to_uavs: 5.0 }
    }
}

impl RewardWeights {
    pub fn zero() -> Self {
        Self { transmission: 0.0, altitude: 0.0, energy: 0.0, to_reference: 0.0, to_uavs: 0.0 }
    }

    fn as_array(&self) -> [f64; 5] {
        [self.transmission, self.altitude, self.energy, self.to_reference, self.to_uavs]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub n_uavs: usize,
    pub area: AreaBounds,
    /// Minimum separation between UAVs, m.
    pub d_min: f64,
    pub channel: ChannelParams,
    pub energy: EnergyParams,
    pub weights: RewardWeights,
    /// Scale of the swarm-compactness reward.
    pub kappa: f64,
    /// Reward subtracted from each agent per pair it is part of that ends
    /// closer than `d_min`.
    pub collision_penalty: f64,
    /// Ground distance of the station from the area center, m.
    pub bs_distance_range: [f64; 2],
    pub efficiency: f64,
    pub gain_method: GainMethod,
    /// Upper bound on position draws per UAV during reset.
    pub placement_attempts: usize,
}

impl EnvConfig {
    /// Defaults for an `n`-UAV swarm over a 100 m × 100 m area at 100–120 m.
    pub fn with_uavs(n: usize) -> Self {
        let area = AreaBounds { half_length: 50.0, h_min: 100.0, h_max: 120.0 };
        Self {
            n_uavs: n,
            area,
            d_min: 0.5,
            channel: ChannelParams::with_uavs(n),
            energy: EnergyParams::default(),
            weights: RewardWeights::default(),
            kappa: n as f64 * area.length(),
            collision_penalty: 1.0,
            bs_distance_range: [2_000.0, 20_000.0],
            efficiency: 1.0,
            gain_method: GainMethod::ClosedForm,
            placement_attempts: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_uavs < 2 {
            return Err(Error::Config(format!("env.n_uavs must be at least 2, got {}", self.n_uavs)));
        }
        self.area.validate()?;
        self.channel.validate()?;
        self.energy.validate()?;
        if !(self.d_min > 0.0) {
            return Err(Error::Config(format!("env.d_min must be positive, got {}", self.d_min)));
        }
        if self.weights.as_array().iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("reward weights must be non-negative".into()));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Config(format!("env.kappa must be positive, got {}", self.kappa)));
        }
        if !(self.collision_penalty >= 0.0) {
            return Err(Error::Config("env.collision_penalty must be non-negative".into()));
        }
        let [lo, hi] = self.bs_distance_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("invalid env.bs_distance_range [{lo}, {hi}]")));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Config(format!("env.efficiency must lie in [0, 1], got {}", self.efficiency)));
        }
        if let GainMethod::Quadrature(q) = self.gain_method {
            q.validate()?;
        }
        if self.placement_attempts == 0 {
            return Err(Error::Config("env.placement_attempts must be positive".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.channel.wavelength()
    }

    pub fn obs_dim(&self) -> usize {
        observation_dim(self.n_uavs)
    }

    pub fn state_dim(&self) -> usize {
        global_state_dim(self.n_uavs)
    }
}

pub fn observation_dim(n: usize) -> usize {
    5 + 2 * (n - 1) + 3
}

pub fn global_state_dim(n: usize) -> usize {
    5 * n + 6
}

/// Target station, its reference point and the steering direction from the
/// array origin at the time the task was issued.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamTask {
    pub bs: Vec3,
    pub reference: Vec3,
    pub steer: SphericalDir,
}

impl BeamTask {
    pub fn new(bs: Vec3, area: &AreaBounds, origin: Vec3) -> Result<Self> {
        Ok(Self { bs, reference: reference_point(bs, area), steer: steering_angles(origin, bs)?.dir })
    }
}

/// One agent's local view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Elevation and azimuth of the station seen from the UAV, rad.
    pub theta: f64,
    pub phi: f64,
    /// Distance to the reference point, m.
    pub d_ref: f64,
    /// Distance to the array origin, m.
    pub d_origin: f64,
    pub excitation: f64,
    /// `(distance, excitation)` of every other UAV, in index order.
    pub others: Vec<(f64, f64)>,
    pub reference: Vec3,
}

impl Observation {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.theta, self.phi, self.d_ref, self.d_origin, self.excitation];
        for &(d, i) in &self.others {
            v.push(d);
            v.push(i);
        }
        v.extend(self.reference.to_array());
        v
    }

    /// Network input: angles over π, distances over the area diagonal,
    /// coordinates over the box extent.
    pub fn features(&self, area: &AreaBounds) -> Vec<f64> {
        let diag = area.diagonal();
        let mut v = vec![
            self.theta / PI,
            self.phi / PI,
            self.d_ref / diag,
            self.d_origin / diag,
            self.excitation,
        ];
        for &(d, i) in &self.others {
            v.push(d / diag);
            v.push(i);
        }
        v.extend(scaled_point(self.reference, area));
        v
    }
}

/// Critic input for one agent: swarm-wide information plus the agent's own
/// geometry relative to the station and to its peers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalState {
    pub positions: Vec<Vec3>,
    pub excitations: Vec<f64>,
    pub reference: Vec3,
    pub theta: f64,
    pub phi: f64,
    pub d_ref: f64,
    pub d_origin: f64,
    /// Distance to every other UAV, in index order.
    pub d_others: Vec<f64>,
}

impl GlobalState {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.positions.iter().flat_map(|p| p.to_array()).collect();
        v.extend(&self.excitations);
        v.extend(self.reference.to_array());
        v.extend([self.theta, self.phi, self.d_ref, self.d_origin]);
        v.extend(&self.d_others);
        v
    }

    pub fn features(&self, area: &AreaBounds) -> Vec<f64> {
        let diag = area.diagonal();
        let mut v: Vec<f64> = self.positions.iter().flat_map(|&p| scaled_point(p, area)).collect();
        v.extend(&self.excitations);
        v.extend(scaled_point(self.reference, area));
        v.extend([self.theta / PI, self.phi / PI, self.d_ref / diag, self.d_origin / diag]);
        v.extend(self.d_others.iter().map(|d| d / diag));
        v
    }
}

fn scaled_point(p: Vec3, area: &AreaBounds) -> [f64; 3] {
    [p.x / area.half_length, p.y / area.half_length, p.z / area.h_max]
}

/// Target pose chosen by one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub target: Vec3,
    pub excitation: f64,
}

impl Action {
    /// Maps a point of the unit cube `[x, y, z, I]` into the flight box.
    pub fn from_unit(u: &[f64], area: &AreaBounds) -> Result<Self> {
        if u.len() != ACTION_DIM {
            return Err(Error::DimensionMismatch { expected: ACTION_DIM, got: u.len() });
        }
        let c = |v: f64| v.clamp(0.0, 1.0);
        let h = area.half_length;
        Ok(Self {
            target: Vec3::new(
                -h + 2.0 * h * c(u[0]),
                -h + 2.0 * h * c(u[1]),
                area.h_min + area.height_span() * c(u[2]),
            ),
            excitation: c(u[3]),
        })
    }

    /// Inverse of [`Action::from_unit`].
    pub fn to_unit(&self, area: &AreaBounds) -> [f64; ACTION_DIM] {
        let h = area.half_length;
        [
            (self.target.x + h) / (2.0 * h),
            (self.target.y + h) / (2.0 * h),
            (self.target.z - area.h_min) / area.height_span(),
            self.excitation,
        ]
    }

    /// Hover in place, keeping the given excitation.
    pub fn stay(pose: &UavPose) -> Self {
        Self { target: pose.position, excitation: pose.excitation }
    }
}

/// Normalized reward parts of one agent, before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardParts {
    pub transmission: f64,
    pub altitude: f64,
    pub energy: f64,
    pub to_reference: f64,
    pub to_uavs: f64,
    /// Number of pairs this agent is part of that violate the separation.
    pub collisions: usize,
    pub total: f64,
}

/// Rewards and link quality of one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardReport {
    pub rewards: Vec<f64>,
    pub parts: Vec<RewardParts>,
    /// Linear array gain towards the station.
    pub gain: f64,
    /// `G · P_t`, W.
    pub gain_power: f64,
    pub rate: f64,
    pub origin: Vec3,
    pub steer: SphericalDir,
}

/// Array gain from the layout's origin towards `bs`; a layout with every
/// excitation at zero radiates nothing and gets gain 0.
pub fn layout_gain(cfg: &EnvConfig, layout: &[UavPose], bs: Vec3) -> Result<(f64, Vec3, SphericalDir)> {
    let origin = array_origin(&layout.iter().map(|p| p.position).collect::<Vec<_>>())?;
    let steer = steering_angles(origin, bs)?.dir;
    let array = ArrayConfig::new(layout.to_vec(), cfg.wavelength())?;
    let gain = match array_gain_with(&array, steer, cfg.efficiency, cfg.gain_method, None) {
        Ok(g) => g,
        Err(Error::DegenerateArray) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((gain, origin, steer))
}

/// Per-agent rewards for a layout reached at the given per-UAV energies.
pub fn compute_rewards(
    cfg: &EnvConfig,
    layout: &[UavPose],
    task: &BeamTask,
    energies: &[f64],
) -> Result<RewardReport> {
    let n = layout.len();
    if energies.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: energies.len() });
    }
    let (gain, origin, steer) = layout_gain(cfg, layout, task.bs)?;
    let rate = transmission_rate(&LinkBudget::between(origin, task.bs, gain), &cfg.channel);
    let gain_power = gain * cfg.channel.p_total;
    let transmission = gain_power / (n * n) as f64;
    let energy_scale = energy_scale(cfg);
    let diag = cfg.area.diagonal();
    let w = cfg.weights;
    let mut parts = Vec::with_capacity(n);
    for (i, pose) in layout.iter().enumerate() {
        let mut peer_sum = 0.0;
        let mut collisions = 0;
        for (j, other) in layout.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = pose.position.distance(other.position);
            peer_sum += d;
            if d < cfg.d_min {
                collisions += 1;
            }
        }
        let mut p = RewardParts {
            transmission,
            altitude: pose.position.z / cfg.area.h_max,
            energy: -energies[i] / energy_scale,
            to_reference: -pose.position.distance(task.reference) / diag,
            to_uavs: -(peer_sum + pose.position.distance(origin)) / cfg.kappa,
            collisions,
            total: 0.0,
        };
        p.total = w.transmission * p.transmission
            + w.altitude * p.altitude
            + w.energy * p.energy
            + w.to_reference * p.to_reference
            + w.to_uavs * p.to_uavs
            - cfg.collision_penalty * collisions as f64;
        parts.push(p);
    }
    Ok(RewardReport { rewards: parts.iter().map(|p| p.total).collect(), parts, gain, gain_power, rate, origin, steer })
}

/// Energy of crossing the area once at the endurance speed while hovering
/// power is drawn; the unit in which motion energy is rewarded.
pub fn energy_scale(cfg: &EnvConfig) -> f64 {
    let profile = FlightProfile::new(&cfg.energy);
    hover_power(&cfg.energy) * cfg.area.length() / profile.v_h
}

/// Observations, critic states and task after a reset.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvViews {
    pub observations: Vec<Observation>,
    pub states: Vec<GlobalState>,
    pub task: BeamTask,
}

/// Outcome of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    pub report: RewardReport,
    pub moves: Vec<MoveCost>,
    pub energy: f64,
}

/// One-episode log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub task: BeamTask,
    pub initial: Vec<UavPose>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub gain: f64,
    pub rate: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct UavEnv {
    config: EnvConfig,
    profile: FlightProfile,
    poses: Vec<UavPose>,
    task: Option<BeamTask>,
}

impl UavEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let profile = FlightProfile::new(&config.energy);
        Ok(Self { config, profile, poses: Vec::new(), task: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn profile(&self) -> &FlightProfile {
        &self.profile
    }

    pub fn poses(&self) -> &[UavPose] {
        &self.poses
    }

    pub fn task(&self) -> Option<&BeamTask> {
        self.task.as_ref()
    }

    /// Uniform positions with separation at least `d_min`, unit excitations,
    /// and a station at a uniform azimuth and distance.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<EnvViews> {
        let positions = self.sample_positions(rng)?;
        self.poses = positions.into_iter().map(|p| UavPose::new(p, 1.0)).collect();
        let bs = self.sample_station(rng);
        self.begin_task(bs)
    }

    pub fn sample_positions<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Vec3>> {
        let cfg = &self.config;
        let area = &cfg.area;
        let mut positions: Vec<Vec3> = Vec::with_capacity(cfg.n_uavs);
        for _ in 0..cfg.n_uavs {
            let mut placed = false;
            for _ in 0..cfg.placement_attempts {
                let h = area.half_length;
                let p = Vec3::new(
                    rng.random_range(-h..=h),
                    rng.random_range(-h..=h),
                    rng.random_range(area.h_min..=area.h_max),
                );
                if positions.iter().all(|q| q.distance(p) >= cfg.d_min) {
                    positions.push(p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::AreaTooDense { n: cfg.n_uavs, d_min: cfg.d_min, attempts: cfg.placement_attempts });
            }
        }
        Ok(positions)
    }

    pub fn sample_station<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let [lo, hi] = self.config.bs_distance_range;
        let azimuth = rng.random_range(-PI..PI);
        let distance = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let c = self.config.area.center();
        Vec3::new(c.x + distance * azimuth.cos(), c.y + distance * azimuth.sin(), 0.0)
    }

    /// Replaces the current poses (e.g. to start from a known layout).
    pub fn set_poses(&mut self, poses: Vec<UavPose>) -> Result<()> {
        if poses.len() != self.config.n_uavs {
            return Err(Error::DimensionMismatch { expected: self.config.n_uavs, got: poses.len() });
        }
        self.poses = poses;
        Ok(())
    }

    /// Issues a new station task from the current poses.
    pub fn begin_task(&mut self, bs: Vec3) -> Result<EnvViews> {
        if self.poses.len() != self.config.n_uavs {
            return Err(Error::Config("environment has no poses; call reset first".into()));
        }
        let origin = array_origin(&self.positions())?;
        let task = BeamTask::new(bs, &self.config.area, origin)?;
        self.task = Some(task);
        let observations = self.observations()?;
        let states = self.global_states()?;
        Ok(EnvViews { observations, states, task })
    }

    fn positions(&self) -> Vec<Vec3> {
        self.poses.iter().map(|p| p.position).collect()
    }

    fn current_task(&self) -> Result<BeamTask> {
        self.task.ok_or_else(|| Error::Config("no active task".into()))
    }

    pub fn observations(&self) -> Result<Vec<Observation>> {
        let task = self.current_task()?;
        let origin = array_origin(&self.positions())?;
        (0..self.poses.len())
            .map(|i| {
                let me = self.poses[i];
                let steer = steering_angles(me.position, task.bs)?.dir;
                let others = self
                    .poses
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| (o.position.distance(me.position), o.excitation))
                    .collect();
                Ok(Observation {
                    theta: steer.theta,
                    phi: steer.phi,
                    d_ref: me.position.distance(task.reference),
                    d_origin: me.position.distance(origin),
                    excitation: me.excitation,
                    others,
                    reference: task.reference,
                })
            })
            .collect()
    }

    pub fn global_states(&self) -> Result<Vec<GlobalState>> {
        let positions = self.positions();
        let excitations: Vec<f64> = self.poses.iter().map(|p| p.excitation).collect();
        Ok(self
            .observations()?
            .into_iter()
            .map(|o| GlobalState {
                positions: positions.clone(),
                excitations: excitations.clone(),
                reference: o.reference,
                theta: o.theta,
                phi: o.phi,
                d_ref: o.d_ref,
                d_origin: o.d_origin,
                d_others: o.others.iter().map(|&(d, _)| d).collect(),
            })
            .collect())
    }

    /// Moves every UAV to its target, applies the new excitations, and
    /// scores the resulting layout. The poses are updated in place so a
    /// following task starts from where this one ended.
    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutcome> {
        let task = self.current_task()?;
        if actions.len() != self.poses.len() {
            return Err(Error::DimensionMismatch { expected: self.poses.len(), got: actions.len() });
        }
        let area = &self.config.area;
        let mut moves = Vec::with_capacity(actions.len());
        let mut next = Vec::with_capacity(actions.len());
        for (pose, a) in self.poses.iter().zip(actions) {
            let target = area.clamp(a.target);
            moves.push(self.profile.move_cost(pose.position, target));
            next.push(UavPose::new(target, a.excitation.clamp(0.0, 1.0)));
        }
        let energies: Vec<f64> = moves.iter().map(|m| m.energy_j).collect();
        let report = compute_rewards(&self.config, &next, &task, &energies)?;
        self.poses = next;
        Ok(StepOutcome { rewards: report.rewards.clone(), energy: energies.iter().sum(), report, moves })
    }

    /// Convenience wrapper taking unit-cube actions.
    pub fn step_unit(&mut self, unit_actions: &[Vec<f64>]) -> Result<StepOutcome> {
        let area = self.config.area;
        let actions = unit_actions.iter().map(|u| Action::from_unit(u, &area)).collect::<Result<Vec<_>>>()?;
        self.step(&actions)
    }
}

/// Uniformly random unit-cube action.
pub fn random_unit_action<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    (0..ACTION_DIM).map(|_| rng.random::<f64>()).collect()
}

/// Ground station at `distance` along azimuth `azimuth` from the area center.
pub fn station_at(area: &AreaBounds, azimuth: f64, distance: f64) -> Vec3 {
    let c = area.center();
    let a = azimuth.rem_euclid(TAU);
    Vec3::new(c.x + distance * a.cos(), c.y + distance * a.sin(), 0.0)
}
