use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EnvError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Actions scale the per-joint torque limits.
    Torque,
    /// Actions pick target angles inside the joint range; a PD loop tracks them.
    Position,
}

/// Lower and upper bound (rad) for each joint type, shared by both legs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub hip: [f64; 2],
    pub knee: [f64; 2],
    pub ankle: [f64; 2],
}

impl JointLimits {
    /// Limits in joint order: right hip, knee, ankle, left hip, knee, ankle.
    pub fn per_joint(&self) -> [[f64; 2]; 6] {
        [self.hip, self.knee, self.ankle, self.hip, self.knee, self.ankle]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardCoefficients {
    pub alive_bonus: f64,
    pub fall_penalty: f64,
    pub progress_scale: f64,
    /// Weight on `sum |tau * qdot|`.
    pub power_cost: f64,
    /// Weight on `sum tau^2`.
    pub torque_cost: f64,
    /// Charged per joint within `limit_margin` of a bound.
    pub limit_penalty: f64,
    /// Fraction of the joint range counted as "at the limit".
    pub limit_margin: f64,
}

impl Default for RewardCoefficients {
    fn default() -> Self {
        Self {
            alive_bonus: 1.0,
            fall_penalty: -1.0,
            progress_scale: 1.0,
            power_cost: 1e-3,
            torque_cost: 1e-4,
            limit_penalty: 0.1,
            limit_margin: 0.01,
        }
    }
}

/// Physical and task parameters of the planar walker. All quantities SI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    pub torso_mass: f64,
    pub thigh_mass: f64,
    pub shank_mass: f64,
    pub foot_mass: f64,
    pub torso_length: f64,
    pub thigh_length: f64,
    pub shank_length: f64,
    /// Vertical distance from ankle joint to sole.
    pub ankle_height: f64,
    /// Sole extent behind the ankle.
    pub heel_length: f64,
    /// Sole extent in front of the ankle.
    pub toe_length: f64,
    pub joint_limits: JointLimits,
    /// Hip, knee, ankle (N m).
    pub torque_limits: [f64; 3],
    pub gravity: f64,
    pub dt: f64,
    /// Integration substeps per control step.
    pub substeps: usize,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction: f64,
    /// Tangential damping used to regularize Coulomb friction.
    pub friction_damping: f64,
    /// Sole height at or below which a foot counts as touching the ground.
    pub contact_tolerance: f64,
    /// Viscous joint damping (N m s / rad).
    pub joint_damping: f64,
    pub action_mode: ActionMode,
    pub position_kp: f64,
    pub position_kd: f64,
    pub episode_cap: usize,
    /// Falling below this fraction of the standing hip height ends the episode.
    pub fall_height_ratio: f64,
    pub fall_pitch: f64,
    /// Half-width of the uniform joint-angle perturbation at reset.
    pub reset_noise: f64,
    /// Hip, knee, ankle angles of the standing pose.
    pub nominal_pose: [f64; 3],
    pub reward: RewardCoefficients,
}

impl Default for RobotConfig {
    fn default() -> Self {
        let deg = std::f64::consts::PI / 180.0;
        Self {
            torso_mass: 3.53,
            thigh_mass: 3.93,
            shank_mass: 2.71,
            foot_mass: 2.94,
            torso_length: 0.4,
            thigh_length: 0.45,
            shank_length: 0.5,
            ankle_height: 0.08,
            heel_length: 0.06,
            toe_length: 0.16,
            joint_limits: JointLimits {
                hip: [-25.0 * deg, 115.0 * deg],
                knee: [0.0, 150.0 * deg],
                ankle: [-45.0 * deg, 45.0 * deg],
            },
            torque_limits: [40.0, 40.0, 40.0],
            gravity: 9.81,
            dt: 0.0165,
            substeps: 40,
            contact_stiffness: 5e4,
            contact_damping: 1e3,
            friction: 0.9,
            friction_damping: 1e3,
            contact_tolerance: 2e-3,
            joint_damping: 0.1,
            action_mode: ActionMode::Torque,
            position_kp: 100.0,
            position_kd: 2.0,
            episode_cap: 1000,
            fall_height_ratio: 0.8,
            fall_pitch: 1.0,
            reset_noise: 0.005,
            nominal_pose: [0.05, 0.1, 0.05],
            reward: RewardCoefficients::default(),
        }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EnvError::InvalidConfig(msg));
        let positive = [
            ("torso_mass", self.torso_mass),
            ("thigh_mass", self.thigh_mass),
            ("shank_mass", self.shank_mass),
            ("foot_mass", self.foot_mass),
            ("torso_length", self.torso_length),
            ("thigh_length", self.thigh_length),
            ("shank_length", self.shank_length),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("ankle_height", self.ankle_height),
            ("heel_length", self.heel_length),
            ("toe_length", self.toe_length),
            ("gravity", self.gravity),
            ("contact_stiffness", self.contact_stiffness),
            ("contact_damping", self.contact_damping),
            ("friction", self.friction),
            ("friction_damping", self.friction_damping),
            ("contact_tolerance", self.contact_tolerance),
            ("joint_damping", self.joint_damping),
            ("position_kp", self.position_kp),
            ("position_kd", self.position_kd),
            ("reset_noise", self.reset_noise),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.heel_length + self.toe_length <= 0.0 {
            return bad("foot must have positive length".into());
        }
        for (name, [lo, hi]) in [
            ("hip", self.joint_limits.hip),
            ("knee", self.joint_limits.knee),
            ("ankle", self.joint_limits.ankle),
        ] {
            if !(lo < hi) {
                return bad(format!("{name} limits need lower < upper, got [{lo}, {hi}]"));
            }
        }
        for (limits, q) in self.joint_limits.per_joint()[..3].iter().zip(self.nominal_pose) {
            if q < limits[0] || q > limits[1] {
                return bad(format!("nominal angle {q} outside limits {limits:?}"));
            }
        }
        if self.torque_limits.iter().any(|t| !(*t > 0.0)) {
            return bad("torque limits must be positive".into());
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        if self.episode_cap == 0 {
            return bad("episode_cap must be at least 1".into());
        }
        if !(self.fall_height_ratio > 0.0 && self.fall_height_ratio < 1.0) {
            return bad(format!("fall_height_ratio must be in (0, 1), got {}", self.fall_height_ratio));
        }
        if !(self.fall_pitch > 0.0) {
            return bad("fall_pitch must be positive".into());
        }
        Ok(())
    }

    /// Reads a `.json` or `.toml` file; missing keys take their defaults.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => {
                toml::from_str(&text).map_err(|e| EnvError::InvalidConfig(e.to_string()))?
            }
            _ => serde_json::from_str(&text).map_err(|e| EnvError::InvalidConfig(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
