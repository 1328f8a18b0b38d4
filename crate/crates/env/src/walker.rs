//! Planar seven-link biped.
//!
//! Generalized coordinates are `[x, z, pitch, rh, rk, ra, lh, lk, la]`:
//! hip position, torso pitch (positive leaning forward) and the six joint
//! angles. Link orientations are absolute counter-clockwise angles:
//! torso `-pitch`, thigh `torso + hip`, shank `thigh - knee`,
//! foot `shank + ankle`, so positive hip angles swing the leg forward and
//! positive knee angles fold the shank backward.
//!
//! Each control step runs `substeps` semi-implicit Euler steps of the
//! reduced-coordinate equations `M(q) qdd = f(q, qd, tau)`. Ground contact is
//! a penalty spring-damper with regularized Coulomb friction at the heel and
//! toe of each foot. Joint stops clamp the angle and remove the outward
//! velocity with an impulse through `M^-1`.

use nalgebra::{SMatrix, SVector, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ActionMode, RobotConfig};
use crate::environment::{Environment, GaitSample, StepOutcome, Termination};
use crate::error::{EnvError, Result};

pub const OBS_DIM: usize = 22;
pub const ACTION_DIM: usize = 6;

const NQ: usize = 9;
const LINKS: usize = 7;
const STATE_VERSION: u32 = 1;

type Jac = SMatrix<f64, 2, NQ>;
type VecQ = SVector<f64, NQ>;
type MatQ = SMatrix<f64, NQ, NQ>;

/// Full simulator state. A plain value: cloning it and stepping both copies
/// with the same actions yields bit-identical trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub q: [f64; NQ],
    pub qd: [f64; NQ],
    pub step: usize,
    /// Hip height right after reset.
    pub z0: f64,
    /// Forward hip displacement since reset.
    pub displacement: f64,
    /// Right, left.
    pub contact: [bool; 2],
}

#[derive(Serialize, Deserialize)]
struct StateBlob {
    version: u32,
    state: SimState,
}

impl SimState {
    pub fn to_blob(&self) -> String {
        serde_json::to_string(&StateBlob {
            version: STATE_VERSION,
            state: self.clone(),
        })
        .expect("state serializes")
    }

    pub fn from_blob(blob: &str) -> Result<Self> {
        let parsed: StateBlob =
            serde_json::from_str(blob).map_err(|e| EnvError::BadSnapshot(e.to_string()))?;
        if parsed.version != STATE_VERSION {
            return Err(EnvError::BadSnapshot(format!(
                "version {} (expected {STATE_VERSION})",
                parsed.version
            )));
        }
        let s = parsed.state;
        let finite = s.q.iter().chain(&s.qd).all(|v| v.is_finite())
            && s.z0.is_finite()
            && s.displacement.is_finite();
        if !finite {
            return Err(EnvError::BadSnapshot("non-finite coordinate".into()));
        }
        Ok(s)
    }

    pub fn joint_angles(&self) -> [f64; 6] {
        std::array::from_fn(|j| self.q[3 + j])
    }
}

/// The 22-entry observation: height change, heading error (cos, sin),
/// linear velocity (x, y, z), roll, pitch, then (angle, rate) for right
/// hip, knee, ankle and left hip, knee, ankle, then right and left contact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefaultRewardBreakdown {
    pub alive: f64,
    pub progress: f64,
    pub effort: f64,
    pub limit: f64,
    pub collision: f64,
}

impl DefaultRewardBreakdown {
    pub fn total(&self) -> f64 {
        self.alive + self.progress + self.effort + self.limit + self.collision
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.alive, self.progress, self.effort, self.limit, self.collision]
    }
}

#[derive(Clone, Copy, Debug)]
struct Body {
    mass: f64,
    inertia: f64,
}

/// A point rigidly attached to a chain of links: `(link, offset in link frame)`.
type Chain = Vec<(usize, Vector2<f64>)>;

struct PointKin {
    pos: Vector2<f64>,
    vel: Vector2<f64>,
    jac: Jac,
    /// `Jdot * qd`.
    drift: Vector2<f64>,
}

#[derive(Clone)]
struct Model {
    /// Partial derivative of each link angle with respect to `q`.
    coeffs: [[f64; NQ]; LINKS],
    bodies: [Body; LINKS],
    coms: [Chain; LINKS],
    /// Right heel, right toe, left heel, left toe.
    soles: [Chain; 4],
}

fn rotate(angle: f64, v: Vector2<f64>) -> Vector2<f64> {
    let (s, c) = angle.sin_cos();
    Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

impl Model {
    fn new(cfg: &RobotConfig) -> Self {
        let mut coeffs = [[0.0; NQ]; LINKS];
        for row in coeffs.iter_mut() {
            row[2] = -1.0;
        }
        for side in 0..2 {
            let link = 1 + 3 * side;
            let q = 3 + 3 * side;
            coeffs[link][q] = 1.0;
            coeffs[link + 1][q] = 1.0;
            coeffs[link + 1][q + 1] = -1.0;
            coeffs[link + 2][q] = 1.0;
            coeffs[link + 2][q + 1] = -1.0;
            coeffs[link + 2][q + 2] = 1.0;
        }

        let rod = |m: f64, l: f64| Body {
            mass: m,
            inertia: m * l * l / 12.0,
        };
        let foot_len = cfg.heel_length + cfg.toe_length;
        let leg = [
            rod(cfg.thigh_mass, cfg.thigh_length),
            rod(cfg.shank_mass, cfg.shank_length),
            rod(cfg.foot_mass, foot_len),
        ];
        let bodies = [
            rod(cfg.torso_mass, cfg.torso_length),
            leg[0],
            leg[1],
            leg[2],
            leg[0],
            leg[1],
            leg[2],
        ];

        let down = |l: f64| Vector2::new(0.0, -l);
        let foot_com = Vector2::new((cfg.toe_length - cfg.heel_length) / 2.0, -cfg.ankle_height);
        let heel = Vector2::new(-cfg.heel_length, -cfg.ankle_height);
        let toe = Vector2::new(cfg.toe_length, -cfg.ankle_height);
        let leg_chain = |side: usize, tip: (usize, Vector2<f64>)| -> Chain {
            let t = 1 + 3 * side;
            let mut chain = Vec::new();
            if tip.0 > 0 {
                chain.push((t, down(cfg.thigh_length)));
            }
            if tip.0 > 1 {
                chain.push((t + 1, down(cfg.shank_length)));
            }
            chain.push((t + tip.0, tip.1));
            chain
        };
        let coms = [
            vec![(0, Vector2::new(0.0, cfg.torso_length / 2.0))],
            leg_chain(0, (0, down(cfg.thigh_length / 2.0))),
            leg_chain(0, (1, down(cfg.shank_length / 2.0))),
            leg_chain(0, (2, foot_com)),
            leg_chain(1, (0, down(cfg.thigh_length / 2.0))),
            leg_chain(1, (1, down(cfg.shank_length / 2.0))),
            leg_chain(1, (2, foot_com)),
        ];
        let soles = [
            leg_chain(0, (2, heel)),
            leg_chain(0, (2, toe)),
            leg_chain(1, (2, heel)),
            leg_chain(1, (2, toe)),
        ];
        Self {
            coeffs,
            bodies,
            coms,
            soles,
        }
    }

    fn link_angles(&self, q: &VecQ, qd: &VecQ) -> ([f64; LINKS], [f64; LINKS]) {
        let mut angle = [0.0; LINKS];
        let mut rate = [0.0; LINKS];
        for (k, c) in self.coeffs.iter().enumerate() {
            for i in 2..NQ {
                angle[k] += c[i] * q[i];
                rate[k] += c[i] * qd[i];
            }
        }
        (angle, rate)
    }

    fn point(&self, chain: &Chain, q: &VecQ, qd: &VecQ, angle: &[f64], rate: &[f64]) -> PointKin {
        let mut pos = Vector2::new(q[0], q[1]);
        let mut jac = Jac::zeros();
        jac[(0, 0)] = 1.0;
        jac[(1, 1)] = 1.0;
        let mut drift = Vector2::zeros();
        for &(link, local) in chain {
            let v = rotate(angle[link], local);
            pos += v;
            let perp = Vector2::new(-v.y, v.x);
            for (i, &c) in self.coeffs[link].iter().enumerate() {
                if c != 0.0 {
                    jac[(0, i)] += c * perp.x;
                    jac[(1, i)] += c * perp.y;
                }
            }
            drift -= rate[link] * rate[link] * v;
        }
        PointKin {
            pos,
            vel: jac * qd,
            jac,
            drift,
        }
    }

    fn sole_heights(&self, q: &VecQ) -> [f64; 4] {
        let zero = VecQ::zeros();
        let (angle, rate) = self.link_angles(q, &zero);
        std::array::from_fn(|k| self.point(&self.soles[k], q, &zero, &angle, &rate).pos.y)
    }
}

/// The walker task: physics, default reward and termination.
#[derive(Clone)]
pub struct Walker {
    config: RobotConfig,
    model: Model,
    nominal_height: f64,
    state: SimState,
}

impl std::fmt::Debug for Walker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Walker")
            .field("config", &self.config)
            .field("state", &self.state)
            .finish()
    }
}

impl Walker {
    pub fn new(config: RobotConfig) -> Result<Self> {
        config.validate()?;
        let model = Model::new(&config);
        let mut walker = Self {
            config,
            model,
            nominal_height: 0.0,
            state: SimState {
                q: [0.0; NQ],
                qd: [0.0; NQ],
                step: 0,
                z0: 0.0,
                displacement: 0.0,
                contact: [false; 2],
            },
        };
        walker.nominal_height = walker.pose_state([0.0; 6]).q[1];
        walker.state = walker.initial_state(0);
        Ok(walker)
    }

    pub fn config(&self) -> &RobotConfig {
        &self.config
    }

    /// Hip height of the unperturbed standing pose.
    pub fn nominal_height(&self) -> f64 {
        self.nominal_height
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn set_state(&mut self, state: SimState) {
        self.state = state;
    }

    /// Standing pose plus `offsets` on the joint angles, at rest, lowered so
    /// the lowest sole point touches the ground.
    fn pose_state(&self, offsets: [f64; 6]) -> SimState {
        let mut q = VecQ::zeros();
        let limits = self.config.joint_limits.per_joint();
        for j in 0..6 {
            let nominal = self.config.nominal_pose[j % 3];
            q[3 + j] = (nominal + offsets[j]).clamp(limits[j][0], limits[j][1]);
        }
        let lowest = self
            .model
            .sole_heights(&q)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        q[1] = -lowest;
        let mut state = SimState {
            q: q.into(),
            qd: [0.0; NQ],
            step: 0,
            z0: q[1],
            displacement: 0.0,
            contact: [false; 2],
        };
        state.contact = self.contacts(&q);
        state
    }

    /// Reset state for `seed`: standing pose with uniform joint noise.
    pub fn initial_state(&self, seed: u64) -> SimState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = self.config.reset_noise;
        let offsets = std::array::from_fn(|_| {
            if noise > 0.0 {
                rng.random_range(-noise..=noise)
            } else {
                0.0
            }
        });
        self.pose_state(offsets)
    }

    fn contacts(&self, q: &VecQ) -> [bool; 2] {
        let h = self.model.sole_heights(q);
        let tol = self.config.contact_tolerance;
        [h[0].min(h[1]) <= tol, h[2].min(h[3]) <= tol]
    }

    /// Heel and toe positions `[x, z]`: right heel, right toe, left heel, left toe.
    pub fn sole_points(&self, state: &SimState) -> [[f64; 2]; 4] {
        let q = VecQ::from(state.q);
        let qd = VecQ::from(state.qd);
        let (angle, rate) = self.model.link_angles(&q, &qd);
        std::array::from_fn(|k| {
            let p = self.model.point(&self.model.soles[k], &q, &qd, &angle, &rate).pos;
            [p.x, p.y]
        })
    }

    /// Kinetic plus gravitational potential energy (ground contact excluded).
    pub fn mechanical_energy(&self, state: &SimState) -> f64 {
        let (kinetic, potential) = self.energies(state);
        kinetic + potential
    }

    pub fn kinetic_energy(&self, state: &SimState) -> f64 {
        self.energies(state).0
    }

    fn energies(&self, state: &SimState) -> (f64, f64) {
        let q = VecQ::from(state.q);
        let qd = VecQ::from(state.qd);
        let (angle, rate) = self.model.link_angles(&q, &qd);
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        for (k, body) in self.model.bodies.iter().enumerate() {
            let p = self.model.point(&self.model.coms[k], &q, &qd, &angle, &rate);
            kinetic += 0.5 * body.mass * p.vel.norm_squared() + 0.5 * body.inertia * rate[k] * rate[k];
            potential += body.mass * self.config.gravity * p.pos.y;
        }
        (kinetic, potential)
    }

    /// Joint torques for `action` in `state`: clipped actions scale the
    /// torque limits, or, in position mode, select PD targets in the joint
    /// range. Always within the torque limits.
    pub fn joint_torques(&self, state: &SimState, action: &[f64; ACTION_DIM]) -> [f64; ACTION_DIM] {
        let cfg = &self.config;
        let limits = cfg.joint_limits.per_joint();
        std::array::from_fn(|j| {
            let a = action[j].clamp(-1.0, 1.0);
            let tmax = cfg.torque_limits[j % 3];
            match cfg.action_mode {
                ActionMode::Torque => a * tmax,
                ActionMode::Position => {
                    let [lo, hi] = limits[j];
                    let target = lo + 0.5 * (a + 1.0) * (hi - lo);
                    let tau = cfg.position_kp * (target - state.q[3 + j]) - cfg.position_kd * state.qd[3 + j];
                    tau.clamp(-tmax, tmax)
                }
            }
        })
    }

    /// Mass matrix and generalized forces at `(q, qd)`.
    fn dynamics(&self, q: &VecQ, qd: &VecQ, tau: &[f64; ACTION_DIM]) -> (MatQ, VecQ) {
        let cfg = &self.config;
        let (angle, rate) = self.model.link_angles(q, qd);
        let mut mass = MatQ::zeros();
        let mut force = VecQ::zeros();
        let gravity = Vector2::new(0.0, -cfg.gravity);
        for (k, body) in self.model.bodies.iter().enumerate() {
            let p = self.model.point(&self.model.coms[k], q, qd, &angle, &rate);
            mass += body.mass * p.jac.transpose() * p.jac;
            let c = VecQ::from(self.model.coeffs[k]);
            mass += body.inertia * c * c.transpose();
            force += body.mass * p.jac.transpose() * (gravity - p.drift);
        }
        for j in 0..ACTION_DIM {
            force[3 + j] += tau[j] - cfg.joint_damping * qd[3 + j];
        }
        for chain in &self.model.soles {
            let p = self.model.point(chain, q, qd, &angle, &rate);
            if p.pos.y >= 0.0 {
                continue;
            }
            let normal = (-cfg.contact_stiffness * p.pos.y - cfg.contact_damping * p.vel.y).max(0.0);
            let limit = cfg.friction * normal;
            let tangent = (-cfg.friction_damping * p.vel.x).clamp(-limit, limit);
            force += p.jac.transpose() * Vector2::new(tangent, normal);
        }
        (mass, force)
    }

    /// One integration substep; `false` if anything became non-finite.
    fn substep(&self, q: &mut VecQ, qd: &mut VecQ, tau: &[f64; ACTION_DIM], h: f64) -> bool {
        let (mass, force) = self.dynamics(q, qd, tau);
        let Some(chol) = mass.cholesky() else {
            return false;
        };
        let qdd = chol.solve(&force);
        *qd += h * qdd;
        *q += h * *qd;

        let limits = self.config.joint_limits.per_joint();
        for (j, [lo, hi]) in limits.into_iter().enumerate() {
            let i = 3 + j;
            let outward = if q[i] < lo {
                q[i] = lo;
                qd[i] < 0.0
            } else if q[i] > hi {
                q[i] = hi;
                qd[i] > 0.0
            } else {
                false
            };
            if outward {
                let col = chol.solve(&VecQ::from_fn(|r, _| if r == i { 1.0 } else { 0.0 }));
                let lambda = -qd[i] / col[i];
                *qd += lambda * col;
                qd[i] = 0.0;
            }
        }
        q.iter().chain(qd.iter()).all(|v| v.is_finite())
    }

    /// Advances `state` by one control step.
    pub fn step_state(
        &self,
        state: &SimState,
        action: &[f64],
    ) -> Result<(SimState, DefaultRewardBreakdown, Termination)> {
        if action.len() != ACTION_DIM {
            return Err(EnvError::ActionLength {
                expected: ACTION_DIM,
                got: action.len(),
            });
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(EnvError::NonFiniteAction);
        }
        let action: [f64; ACTION_DIM] = std::array::from_fn(|j| action[j]);
        let cfg = &self.config;
        let n = cfg.substeps;
        let h = cfg.dt / n as f64;

        let mut q = VecQ::from(state.q);
        let mut qd = VecQ::from(state.qd);
        let mut power = 0.0;
        let mut torque_sq = 0.0;
        let mut scratch = state.clone();
        for _ in 0..n {
            scratch.q = q.into();
            scratch.qd = qd.into();
            let tau = self.joint_torques(&scratch, &action);
            if !self.substep(&mut q, &mut qd, &tau, h) {
                let mut failed = state.clone();
                failed.step += 1;
                let breakdown = DefaultRewardBreakdown {
                    alive: cfg.reward.fall_penalty,
                    ..Default::default()
                };
                return Ok((failed, breakdown, Termination::NumericalError));
            }
            for j in 0..ACTION_DIM {
                power += (tau[j] * qd[3 + j]).abs();
                torque_sq += tau[j] * tau[j];
            }
        }
        power /= n as f64;
        torque_sq /= n as f64;

        let next = SimState {
            q: q.into(),
            qd: qd.into(),
            step: state.step + 1,
            z0: state.z0,
            displacement: state.displacement + (q[0] - state.q[0]),
            contact: self.contacts(&q),
        };

        let fallen = q[1] < cfg.fall_height_ratio * self.nominal_height || q[2].abs() > cfg.fall_pitch;
        let rc = &cfg.reward;
        let near_limit = cfg
            .joint_limits
            .per_joint()
            .iter()
            .enumerate()
            .filter(|(j, [lo, hi])| {
                let margin = rc.limit_margin * (hi - lo);
                q[3 + j] <= lo + margin || q[3 + j] >= hi - margin
            })
            .count();
        let breakdown = DefaultRewardBreakdown {
            alive: if fallen { rc.fall_penalty } else { rc.alive_bonus },
            progress: rc.progress_scale * (q[0] - state.q[0]) / cfg.dt,
            effort: -rc.power_cost * power - rc.torque_cost * torque_sq,
            limit: -rc.limit_penalty * near_limit as f64,
            collision: 0.0,
        };
        let termination = if fallen {
            Termination::Fallen
        } else if next.step >= cfg.episode_cap {
            Termination::TimeLimit
        } else {
            Termination::Running
        };
        Ok((next, breakdown, termination))
    }

    pub fn observe_state(&self, state: &SimState) -> Observation {
        let mut o = [0.0; OBS_DIM];
        o[0] = state.q[1] - state.z0;
        o[1] = 1.0;
        o[2] = 0.0;
        o[3] = state.qd[0];
        o[4] = 0.0;
        o[5] = state.qd[1];
        o[6] = 0.0;
        o[7] = state.q[2];
        for j in 0..6 {
            o[8 + 2 * j] = state.q[3 + j];
            o[9 + 2 * j] = state.qd[3 + j];
        }
        o[20] = if state.contact[0] { 1.0 } else { 0.0 };
        o[21] = if state.contact[1] { 1.0 } else { 0.0 };
        Observation(o)
    }

    /// Steps the internal state and also returns the reward breakdown.
    pub fn step_detailed(&mut self, action: &[f64]) -> Result<(StepOutcome, DefaultRewardBreakdown)> {
        let (next, breakdown, termination) = self.step_state(&self.state, action)?;
        self.state = next;
        let outcome = StepOutcome {
            observation: self.observe(),
            reward: breakdown.total(),
            termination,
        };
        Ok((outcome, breakdown))
    }
}

impl Environment for Walker {
    type Snapshot = SimState;

    fn obs_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_dim(&self) -> usize {
        ACTION_DIM
    }

    fn episode_cap(&self) -> usize {
        self.config.episode_cap
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.state = self.initial_state(seed);
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        Ok(self.step_detailed(action)?.0)
    }

    fn observe(&self) -> Vec<f64> {
        self.observe_state(&self.state).0.to_vec()
    }

    fn snapshot(&self) -> SimState {
        self.state.clone()
    }

    fn restore(&mut self, snapshot: &SimState) {
        self.state = snapshot.clone();
    }

    fn gait_sample(&self) -> Option<GaitSample> {
        Some(GaitSample {
            right_contact: self.state.contact[0],
            left_contact: self.state.contact[1],
            joint_angles: self.state.joint_angles(),
        })
    }

    fn forward_displacement(&self) -> f64 {
        self.state.displacement
    }
}
