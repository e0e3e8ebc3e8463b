//! Press control: gap-velocity profile until the force limit, then PI force
//! control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PressSettings {
    /// (gap m, closing velocity m/s) pairs with strictly decreasing gaps.
    pub profile: Vec<(f64, f64)>,
    /// Force at switch-over and force-control set point (N).
    pub f_max: f64,
    pub pp: f64,
    pub pi: f64,
    /// Sampling period of the controller (s); the velocity is held between samples.
    pub period: f64,
}

impl PressSettings {
    /// Constant closing at 1 mm/s with a 4400 kN force limit.
    pub fn press_rheometer() -> Self {
        Self {
            profile: vec![(10.0e-3, -1.0e-3), (0.0, -1.0e-3)],
            f_max: 4.4e6,
            pp: 0.5,
            pi: 0.5,
            period: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.profile.is_empty() {
            return Err(Error::InvalidInput("press profile is empty".into()));
        }
        if self.profile.windows(2).any(|w| w[1].0 >= w[0].0) {
            return Err(Error::InvalidInput("press profile gaps must be strictly decreasing".into()));
        }
        if !(self.f_max > 0.0) {
            return Err(Error::InvalidInput(format!("F_max must be positive, got {}", self.f_max)));
        }
        if !(self.period > 0.0) {
            return Err(Error::InvalidInput("controller period must be positive".into()));
        }
        Ok(())
    }

    /// Profile velocity at `gap`, linear between points and held beyond the ends.
    pub fn profile_velocity(&self, gap: f64) -> f64 {
        let p = &self.profile;
        if gap >= p[0].0 {
            return p[0].1;
        }
        for w in p.windows(2) {
            let ((g0, v0), (g1, v1)) = (w[0], w[1]);
            if gap >= g1 {
                return v0 + (v1 - v0) * (gap - g0) / (g1 - g0);
            }
        }
        p[p.len() - 1].1
    }

    /// Velocity of the last profile point, the scale of the control error.
    pub fn terminal_velocity(&self) -> f64 {
        self.profile[self.profile.len() - 1].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressController {
    pub settings: PressSettings,
    /// Running sum of ε/2 Δt since switch-over (m/s · s).
    pub integral: f64,
    pub switched: bool,
    /// Velocity commanded at the last update (m/s).
    pub hdot: f64,
}

impl PressController {
    pub fn new(settings: PressSettings, gap: f64) -> Result<Self> {
        settings.validate()?;
        let hdot = settings.profile_velocity(gap);
        Ok(Self {
            settings,
            integral: 0.0,
            switched: false,
            hdot,
        })
    }

    /// Next closing velocity given the current gap and force, `dt` after the
    /// previous update. Switch-over to force control latches at the first
    /// update with F ≥ F_max.
    pub fn update(&mut self, gap: f64, force: f64, dt: f64) -> f64 {
        let s = &self.settings;
        if !self.switched && force < s.f_max {
            self.hdot = s.profile_velocity(gap);
            return self.hdot;
        }
        self.switched = true;
        let eps = (s.f_max - force) / s.f_max * s.terminal_velocity();
        self.integral += eps / 2.0 * dt;
        self.hdot += s.pp * eps + s.pi * self.integral;
        self.hdot
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn follows_profile_before_switch() {
        let mut c = PressController::new(PressSettings::press_rheometer(), 18e-3).unwrap();
        assert_eq!(c.update(12e-3, 0.5 * 4.4e6, 0.01), -1e-3);
        assert!(!c.switched);
    }

    #[test]
    fn on_set_point_velocity_unchanged() {
        let mut c = PressController::new(PressSettings::press_rheometer(), 5e-3).unwrap();
        c.switched = true;
        assert_eq!(c.update(5e-3, 4.4e6, 0.01), -1e-3);
    }

    #[test]
    fn overshoot_slows_closing() {
        let mut c = PressController::new(PressSettings::press_rheometer(), 5e-3).unwrap();
        let v = c.update(5e-3, 1.1 * 4.4e6, 0.01);
        assert!(c.switched);
        assert_abs_diff_eq!(v, -0.94975e-3, epsilon = 1e-15);
        // latched even when the force drops again
        c.update(5e-3, 0.0, 0.01);
        assert!(c.switched);
    }

    #[test]
    fn profile_interpolation() {
        let s = PressSettings {
            profile: vec![(10e-3, -2e-3), (5e-3, -1e-3), (0.0, -0.5e-3)],
            ..PressSettings::press_rheometer()
        };
        assert_eq!(s.profile_velocity(20e-3), -2e-3);
        assert_abs_diff_eq!(s.profile_velocity(7.5e-3), -1.5e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.profile_velocity(2.5e-3), -0.75e-3, epsilon = 1e-15);
        assert_eq!(s.profile_velocity(-1.0), -0.5e-3);
        let bad = PressSettings { profile: vec![(1.0, 0.0), (2.0, 0.0)], ..s };
        assert!(bad.validate().is_err());
    }
}
