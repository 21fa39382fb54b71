use super::{AbstractAction, TestgenError};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_RANGES: &str = include_str!("../../assets/ranges.txt");

/// `[lo, hi]`, or `[lo, hi)` when `upper_open`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub upper_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, upper_open: false }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, upper_open: true }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi) || (self.upper_open && self.lo >= self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && if self.upper_open { x < self.hi } else { x <= self.hi }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else if self.upper_open {
            rng.gen_range(self.lo..self.hi)
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let upper_open = match s.chars().last() {
            Some(']') => false,
            Some(')') => true,
            _ => return Err(format!("interval `{s}` must end with `]` or `)`")),
        };
        let inner = s
            .strip_prefix('[')
            .ok_or_else(|| format!("interval `{s}` must start with `[`"))?;
        let inner = &inner[..inner.len() - 1];
        let (lo, hi) = inner.split_once(',').ok_or_else(|| format!("interval `{s}` needs two bounds"))?;
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad bound `{}`", x.trim()));
        let iv = Self { lo: num(lo)?, hi: num(hi)?, upper_open };
        if !iv.lo.is_finite() || !iv.hi.is_finite() {
            return Err(format!("interval `{s}` must be finite"));
        }
        if iv.is_empty() {
            return Err(format!("interval `{s}` is empty"));
        }
        Ok(iv)
    }
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}{}", self.lo, self.hi, if self.upper_open { ')' } else { ']' })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamRange {
    pub name: String,
    pub unit: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeEntry {
    /// Sampled in this order.
    pub params: Vec<ParamRange>,
    /// Seconds; strictly positive.
    pub duration: Interval,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamRangeTable {
    entries: BTreeMap<AbstractAction, RangeEntry>,
}

impl ParamRangeTable {
    /// The bundled table.
    pub fn defaults() -> Self {
        Self::parse(DEFAULT_RANGES).expect("bundled range table parses")
    }

    pub fn get(&self, action: &AbstractAction) -> Option<&RangeEntry> {
        self.entries.get(action)
    }

    pub fn insert(&mut self, action: AbstractAction, entry: RangeEntry) {
        self.entries.insert(action, entry);
    }

    pub fn actions(&self) -> impl Iterator<Item = &AbstractAction> {
        self.entries.keys()
    }

    /// Lines `action | name unit interval | ...`; one parameter must be
    /// `duration` in seconds.
    pub fn parse(text: &str) -> Result<Self, TestgenError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| TestgenError::parse(n + 1, m);
            let mut fields = line.split('|');
            let action: AbstractAction =
                fields.next().unwrap_or("").parse().map_err(|e: super::BadAction| err(e.to_string()))?;
            let mut params = Vec::new();
            let mut duration = None;
            for field in fields {
                let field = field.trim();
                let bracket = field.find(['[', '(']).ok_or_else(|| err(format!("`{field}` has no interval")))?;
                let head: Vec<&str> = field[..bracket].split_whitespace().collect();
                let [name, unit] = head[..] else {
                    return Err(err(format!("`{field}` must be `name unit interval`")));
                };
                let interval = Interval::parse(&field[bracket..]).map_err(err)?;
                if name == "duration" {
                    if unit != "s" {
                        return Err(err("duration must be in s".into()));
                    }
                    if interval.lo <= 0.0 {
                        return Err(err("durations must be positive".into()));
                    }
                    duration = Some(interval);
                } else {
                    params.push(ParamRange { name: name.into(), unit: unit.into(), interval });
                }
            }
            let duration = duration.ok_or_else(|| err(format!("`{action}` has no duration")))?;
            if entries.insert(action.clone(), RangeEntry { params, duration }).is_some() {
                return Err(err(format!("duplicate entry for `{action}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (action, e) in &self.entries {
            s.push_str(&action.to_string());
            for p in &e.params {
                s.push_str(&format!(" | {} {} {}", p.name, p.unit, p.interval));
            }
            s.push_str(&format!(" | duration s {}\n", e.duration));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults() {
        let t = ParamRangeTable::defaults();
        assert_eq!(t.actions().count(), 10);
        let gaze = t.get(&"set_param gaze=1".parse().unwrap()).unwrap();
        let names: Vec<&str> = gaze.params.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["offset", "distance", "angle"]);
        assert_eq!(gaze.params[0].interval, Interval::closed(0.1, 0.2));
        assert_eq!(gaze.params[1].interval, Interval::closed(0.5, 0.6));
        assert_eq!(gaze.params[2].interval, Interval::half_open(15.0, 40.0));
        assert_eq!(gaze.params[2].unit, "deg");
        let d = |a: &str| t.get(&a.parse().unwrap()).unwrap().duration;
        assert_eq!(d("tell leg"), Interval::closed(5.0, 5.0));
        assert_eq!(d("tell humanReady"), Interval::closed(2.0, 2.0));
        assert_eq!(d("receivesignal").hi, 60.0);
    }

    #[test]
    fn text_round_trip() {
        let t = ParamRangeTable::defaults();
        assert_eq!(ParamRangeTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_tables() {
        for (text, needle) in [
            ("tell leg | duration s [5,4]", "empty"),
            ("tell leg | duration s [1,1)", "empty"),
            ("tell leg | force N [1,2]", "no duration"),
            ("tell leg | duration ms [1,2]", "in s"),
            ("tell leg | duration s [0,2]", "positive"),
            ("tell leg | duration s (1,2]", "start with"),
            ("tell leg | duration [1,2]", "name unit"),
            ("tell leg | duration s [5,5]\ntell leg | duration s [5,5]", "duplicate"),
            ("wave | duration s [1,2]", "unrecognized"),
        ] {
            let e = ParamRangeTable::parse(text).unwrap_err().to_string();
            assert!(e.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn degenerate_and_half_open() {
        let mut rng = rand::thread_rng();
        assert_eq!(Interval::closed(5.0, 5.0).sample(&mut rng), 5.0);
        let iv = Interval::half_open(15.0, 40.0);
        assert!(iv.contains(15.0) && !iv.contains(40.0));
        assert!(Interval::closed(15.0, 40.0).contains(40.0));
    }
}
