use super::{AbstractAction, AbstractTest, ParamRangeTable, TestgenError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Voice,
    Gaze,
    Pressure,
    Location,
    Wait,
}

impl Channel {
    pub fn for_action(action: &AbstractAction) -> Option<Channel> {
        Some(match action {
            AbstractAction::Tell(_) => Channel::Voice,
            AbstractAction::ReceiveSignal => Channel::Wait,
            AbstractAction::SetParam { key, .. } => match key.as_str() {
                "gaze" => Channel::Gaze,
                "pressure" => Channel::Pressure,
                "location" | "walk_away" => Channel::Location,
                _ => return None,
            },
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Voice => "voice",
            Channel::Gaze => "gaze",
            Channel::Pressure => "pressure",
            Channel::Location => "location",
            Channel::Wait => "wait",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Channel::Voice, Channel::Gaze, Channel::Pressure, Channel::Location, Channel::Wait]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown channel `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedStimulus {
    pub channel: Channel,
    pub action: AbstractAction,
    pub params: Vec<Param>,
    /// Seconds.
    pub duration: f64,
}

impl TimedStimulus {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteTest {
    pub seed: u64,
    pub stimuli: Vec<TimedStimulus>,
}

impl ConcreteTest {
    /// `# seed: N` then one stimulus per line:
    /// `channel | action | name=value unit | ... | duration=value s`.
    pub fn to_text(&self) -> String {
        let mut s = format!("# seed: {}\n", self.seed);
        for st in &self.stimuli {
            s.push_str(&format!("{} | {}", st.channel, st.action));
            for p in &st.params {
                s.push_str(&format!(" | {}={} {}", p.name, p.value, p.unit));
            }
            s.push_str(&format!(" | duration={} s\n", st.duration));
        }
        s
    }
}

fn parse_assignment(field: &str) -> Result<Param, String> {
    let (name, rest) = field.split_once('=').ok_or_else(|| format!("`{field}` is not `name=value unit`"))?;
    let mut words = rest.split_whitespace();
    let (Some(value), Some(unit), None) = (words.next(), words.next(), words.next()) else {
        return Err(format!("`{field}` is not `name=value unit`"));
    };
    let value = value.parse::<f64>().map_err(|_| format!("bad value `{value}`"))?;
    Ok(Param { name: name.trim().to_string(), unit: unit.to_string(), value })
}

/// Inverse of [`ConcreteTest::to_text`].
pub fn parse_concrete(text: &str) -> Result<ConcreteTest, TestgenError> {
    let mut seed = 0;
    let mut stimuli = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let err = |m: String| TestgenError::parse(n + 1, m);
        let line = raw.trim();
        if let Some(c) = line.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("seed:") {
                seed = v.trim().parse().map_err(|_| err(format!("bad seed `{}`", v.trim())))?;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(err("expected `channel | action | ... | duration=value s`".into()));
        }
        let channel: Channel = fields[0].parse().map_err(err)?;
        let action: AbstractAction = fields[1].parse().map_err(|e: super::BadAction| err(e.to_string()))?;
        let mut params = fields[2..].iter().map(|f| parse_assignment(f)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let dur = params.pop().expect("at least one field");
        if dur.name != "duration" || dur.unit != "s" {
            return Err(err("last field must be `duration=value s`".into()));
        }
        if !(dur.value > 0.0) {
            return Err(err("duration must be positive".into()));
        }
        stimuli.push(TimedStimulus { channel, action, params, duration: dur.value });
    }
    Ok(ConcreteTest { seed, stimuli })
}

/// One stimulus per abstract action, parameters then duration drawn
/// uniformly from the table.
pub fn concretize(test: &AbstractTest, ranges: &ParamRangeTable, seed: u64) -> Result<ConcreteTest, TestgenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stimuli = Vec::with_capacity(test.actions.len());
    for action in &test.actions {
        let entry = ranges.get(action).ok_or_else(|| TestgenError::MissingRange(action.clone()))?;
        let channel = Channel::for_action(action).ok_or_else(|| TestgenError::MissingRange(action.clone()))?;
        let params = entry
            .params
            .iter()
            .map(|p| Param { name: p.name.clone(), unit: p.unit.clone(), value: p.interval.sample(&mut rng) })
            .collect();
        let duration = entry.duration.sample(&mut rng);
        stimuli.push(TimedStimulus { channel, action: action.clone(), params, duration });
    }
    Ok(ConcreteTest { seed, stimuli })
}

/// Seed of the `i`-th expansion; `sub_seed(s, 0) == s`.
pub fn sub_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn expand(test: &AbstractTest, ranges: &ParamRangeTable, n: usize, seed: u64) -> Result<Vec<ConcreteTest>, TestgenError> {
    if n == 0 {
        return Err(TestgenError::ZeroCount);
    }
    (0..n).map(|i| concretize(test, ranges, sub_seed(seed, i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skeleton() -> AbstractTest {
        AbstractTest::parse(
            "tell leg\nreceivesignal\ntell humanReady\nset_param gaze=1\nset_param pressure=0\nset_param location=1\nreceivesignal\n",
        )
        .unwrap()
    }

    fn in_ranges(t: &ConcreteTest, ranges: &ParamRangeTable) -> bool {
        t.stimuli.iter().all(|s| {
            let e = ranges.get(&s.action).unwrap();
            e.duration.contains(s.duration)
                && s.duration > 0.0
                && e.params.len() == s.params.len()
                && e.params.iter().zip(&s.params).all(|(r, p)| r.name == p.name && r.interval.contains(p.value))
        })
    }

    #[test]
    fn gaze_head_move_in_range() {
        let ranges = ParamRangeTable::defaults();
        let t = concretize(&skeleton(), &ranges, 17).unwrap();
        let gaze = &t.stimuli[3];
        assert_eq!(gaze.channel, Channel::Gaze);
        assert!((0.1..=0.2).contains(&gaze.param("offset").unwrap()));
        assert!((0.5..=0.6).contains(&gaze.param("distance").unwrap()));
        assert!((15.0..40.0).contains(&gaze.param("angle").unwrap()));
        assert_eq!(t.stimuli[0].duration, 5.0);
        assert_eq!(t.stimuli[2].duration, 2.0);
        assert!(in_ranges(&t, &ranges));
    }

    #[test]
    fn seeds_change_values_not_structure() {
        let ranges = ParamRangeTable::defaults();
        let a = concretize(&skeleton(), &ranges, 1).unwrap();
        let b = concretize(&skeleton(), &ranges, 2).unwrap();
        let shape = |t: &ConcreteTest| t.stimuli.iter().map(|s| (s.channel, s.action.clone())).collect::<Vec<_>>();
        assert_eq!(shape(&a), shape(&b));
        assert_ne!(a.stimuli, b.stimuli);
        assert_eq!(a, concretize(&skeleton(), &ranges, 1).unwrap());
    }

    #[test]
    fn missing_range_names_action() {
        let t = AbstractTest::parse("tell leg\nset_param wave=1\n").unwrap();
        let e = concretize(&t, &ParamRangeTable::defaults(), 0).unwrap_err();
        assert_eq!(e.to_string(), "no range entry for `set_param wave=1`");
    }

    #[test]
    fn expansion() {
        let ranges = ParamRangeTable::defaults();
        let five = expand(&skeleton(), &ranges, 5, 99).unwrap();
        assert_eq!(five.len(), 5);
        assert!(five.iter().all(|t| in_ranges(t, &ranges) && t.stimuli.len() == 7));
        assert_eq!(expand(&skeleton(), &ranges, 1, 99).unwrap(), vec![concretize(&skeleton(), &ranges, 99).unwrap()]);
        assert_eq!(expand(&skeleton(), &ranges, 0, 99), Err(TestgenError::ZeroCount));
    }

    #[test]
    fn text_round_trip() {
        let t = concretize(&skeleton(), &ParamRangeTable::defaults(), 4).unwrap();
        assert_eq!(parse_concrete(&t.to_text()).unwrap(), t);
        assert!(parse_concrete("gaze | set_param gaze=1 | duration=0 s").is_err());
        assert!(parse_concrete("smell | tell leg | duration=1 s").is_err());
        assert!(parse_concrete("voice | tell leg | force=1 N").is_err());
    }
}
