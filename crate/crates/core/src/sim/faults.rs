use super::log::SensorChannel;
use crate::scenario::SensorTriple;
use crate::testgen::Interval;
use rand::Rng;
use thiserror::Error;

pub const DEFAULT_FAULTS: &str = include_str!("../../assets/faults.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("`{0}` must be a probability in [0, 1]")]
    Probability(&'static str),
    #[error("`{0}` must be a non-negative interval")]
    Interval(&'static str),
}

/// Environment and actuator faults injected into a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultConfig {
    /// Seconds from hand-open to the leg leaving the gripper.
    pub release_latency: Interval,
    /// Per-channel probability that a reading flips, indexed by
    /// [`SensorChannel::slot`].
    pub sensor_error: [f64; 3],
    /// Probability that the human hand is still close when the robot closes
    /// its hand after a release.
    pub hand_hazard: f64,
    /// Human hand distance after retracting, m.
    pub retract_distance: Interval,
    /// Joint speed during motions, rad/s.
    pub joint_speed: Interval,
}

impl Default for FaultConfig {
    fn default() -> Self {
        Self {
            release_latency: Interval::closed(0.5, 10.5),
            sensor_error: [0.0; 3],
            hand_hazard: 0.08,
            retract_distance: Interval::closed(0.2, 0.4),
            joint_speed: Interval::closed(0.05, 0.2),
        }
    }
}

impl FaultConfig {
    /// No latency tail, no hazard, no sensor errors.
    pub fn nominal() -> Self {
        Self { release_latency: Interval::closed(0.5, 2.0), hand_hazard: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), FaultConfigError> {
        let prob = |p: f64, name| if (0.0..=1.0).contains(&p) { Ok(()) } else { Err(FaultConfigError::Probability(name)) };
        prob(self.sensor_error[0], "gaze_error")?;
        prob(self.sensor_error[1], "pressure_error")?;
        prob(self.sensor_error[2], "location_error")?;
        prob(self.hand_hazard, "hand_hazard")?;
        for (iv, name) in [
            (self.release_latency, "release_latency"),
            (self.retract_distance, "retract_distance"),
            (self.joint_speed, "joint_speed"),
        ] {
            if iv.lo < 0.0 || iv.is_empty() {
                return Err(FaultConfigError::Interval(name));
            }
        }
        Ok(())
    }

    /// `key = value` lines; unknown keys are errors, missing keys keep their
    /// defaults.
    pub fn parse(text: &str) -> Result<Self, FaultConfigError> {
        let mut c = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| FaultConfigError::Parse { line: n + 1, message: m };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("`{line}` is not `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || value.parse::<f64>().map_err(|_| err(format!("bad number `{value}`")));
            let iv = || value.parse::<Interval>().map_err(err);
            match key {
                "release_latency" => c.release_latency = iv()?,
                "retract_distance" => c.retract_distance = iv()?,
                "joint_speed" => c.joint_speed = iv()?,
                "gaze_error" => c.sensor_error[0] = num()?,
                "pressure_error" => c.sensor_error[1] = num()?,
                "location_error" => c.sensor_error[2] = num()?,
                "hand_hazard" => c.hand_hazard = num()?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        format!(
            "release_latency = {}\ngaze_error = {}\npressure_error = {}\nlocation_error = {}\nhand_hazard = {}\nretract_distance = {}\njoint_speed = {}\n",
            self.release_latency,
            self.sensor_error[0],
            self.sensor_error[1],
            self.sensor_error[2],
            self.hand_hazard,
            self.retract_distance,
            self.joint_speed
        )
    }

    pub fn error_rate(&self, sensor: SensorChannel) -> f64 {
        self.sensor_error[sensor.slot()]
    }
}

/// Flips one reading with its channel's error rate.
pub fn flip_reading<R: Rng + ?Sized>(ready: bool, sensor: SensorChannel, faults: &FaultConfig, rng: &mut R) -> bool {
    let p = faults.error_rate(sensor);
    // gen_bool(1.0) and gen_bool(0.0) are exact
    ready ^ rng.gen_bool(p)
}

/// Each channel flips independently with its configured rate.
pub fn sensor_read<R: Rng + ?Sized>(truth: SensorTriple, faults: &FaultConfig, rng: &mut R) -> SensorTriple {
    SensorTriple {
        gaze: flip_reading(truth.gaze, SensorChannel::Gaze, faults, rng),
        pressure: flip_reading(truth.pressure, SensorChannel::Pressure, faults, rng),
        location: flip_reading(truth.location, SensorChannel::Location, faults, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bundled_file_is_default() {
        assert_eq!(FaultConfig::parse(DEFAULT_FAULTS).unwrap(), FaultConfig::default());
        let c = FaultConfig::default();
        assert_eq!(FaultConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(FaultConfig::parse("").unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert_eq!(FaultConfig::parse("gaze_error = 1.5"), Err(FaultConfigError::Probability("gaze_error")));
        assert!(matches!(FaultConfig::parse("speed = 1"), Err(FaultConfigError::Parse { line: 1, .. })));
        assert!(FaultConfig::parse("release_latency = [-1,2]").is_err());
        assert!(FaultConfig::parse("hand_hazard").is_err());
    }

    #[test]
    fn zero_and_one_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let zero = FaultConfig::default();
        let one = FaultConfig { sensor_error: [1.0; 3], ..FaultConfig::default() };
        for t in SensorTriple::all() {
            assert_eq!(sensor_read(t, &zero, &mut rng), t);
            assert_eq!(sensor_read(t, &one, &mut rng), SensorTriple::from_code(7 - t.code()));
        }
    }

    #[test]
    fn gaze_flip_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = FaultConfig { sensor_error: [0.1, 0.0, 0.0], ..FaultConfig::default() };
        let n = 10_000;
        let flips = (0..n).filter(|_| !sensor_read(SensorTriple::READY, &c, &mut rng).gaze).count();
        assert!((flips as f64 / n as f64 - 0.1).abs() <= 0.02, "{flips}");
    }
}
