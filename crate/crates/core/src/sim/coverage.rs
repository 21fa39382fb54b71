use std::fmt;

/// Labeled statements and branch arms of the controller, in source order.
pub const COVERAGE_POINTS: &[&str] = &[
    "reset.enter",
    "reset.done",
    "wait.enter",
    "wait.voice_leg",
    "wait.timeout",
    "wait.timeout_delivered",
    "wait.timeout_none",
    "grab.enter",
    "grab.motion_done",
    "grab.hand_close",
    "offer.enter",
    "offer.motion_done",
    "offer.signal_hold",
    "offer.voice_ready",
    "offer.timeout",
    "sensing.enter",
    "sensing.gaze_ready",
    "sensing.gaze_not_ready",
    "sensing.pressure_ready",
    "sensing.pressure_not_ready",
    "sensing.location_ready",
    "sensing.location_not_ready",
    "sensing.decide_release",
    "sensing.decide_discard",
    "sensing.timeout",
    "release.enter",
    "release.hand_open",
    "release.leg_released",
    "release.hand_close",
    "release.return_done",
    "release.all_delivered",
    "release.cycle_done",
    "discard.enter",
    "discard.motion_done",
    "discard.drop",
    "finished.enter",
    "timedout.enter",
    "motion.speed_sample",
    "input.unexpected",
    "input.reading_ignored",
];

/// Index of a coverage point; panics on an unknown label, which is a bug in
/// the controller.
pub fn point(label: &str) -> usize {
    COVERAGE_POINTS
        .iter()
        .position(|&p| p == label)
        .unwrap_or_else(|| panic!("unknown coverage point `{label}`"))
}

/// Hit counts per coverage point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeCoverageMap {
    hits: Vec<u32>,
}

impl Default for CodeCoverageMap {
    fn default() -> Self {
        Self { hits: vec![0; COVERAGE_POINTS.len()] }
    }
}

impl CodeCoverageMap {
    pub fn hit(&mut self, label: &str) {
        self.hits[point(label)] += 1;
    }

    pub fn hits(&self, label: &str) -> u32 {
        self.hits[point(label)]
    }

    pub fn counts(&self) -> &[u32] {
        &self.hits
    }

    pub fn covered(&self) -> usize {
        self.hits.iter().filter(|&&h| h > 0).count()
    }

    pub fn total(&self) -> usize {
        self.hits.len()
    }

    /// Percentage of points hit at least once.
    pub fn percent(&self) -> f64 {
        100.0 * self.covered() as f64 / self.total() as f64
    }

    /// Pointwise max.
    pub fn union(&self, other: &Self) -> Self {
        Self { hits: self.hits.iter().zip(&other.hits).map(|(a, b)| *a.max(b)).collect() }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.hits.iter().zip(&other.hits).all(|(a, b)| *a == 0 || *b > 0)
    }

    /// `label\thits` per point.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut m = Self::default();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let (label, h) = line.split_once('\t').ok_or_else(|| format!("line {}: expected `label\\thits`", n + 1))?;
            let i = COVERAGE_POINTS
                .iter()
                .position(|&p| p == label)
                .ok_or_else(|| format!("line {}: unknown point `{label}`", n + 1))?;
            m.hits[i] = h.parse().map_err(|_| format!("line {}: bad count `{h}`", n + 1))?;
        }
        Ok(m)
    }
}

impl fmt::Display for CodeCoverageMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, h) in COVERAGE_POINTS.iter().zip(&self.hits) {
            writeln!(f, "{label}\t{h}")?;
        }
        Ok(())
    }
}
