use super::ExplorerError;
use rand::Rng;

/// Square action-value table: row = last selected belief, column = next belief.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n: usize,
    values: Vec<f64>,
}

/// The state reached after a selection, used for the bootstrap term.
#[derive(Debug, Clone, Copy)]
pub struct NextState<'a> {
    pub row: usize,
    /// Beliefs legal from that state; the max ranges over these only.
    pub mask: &'a [bool],
}

impl QTable {
    pub fn zeros(n: usize) -> Self {
        Self { n, values: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.n + col] = v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n..(row + 1) * self.n]
    }

    pub fn max_in_row(&self, row: usize, mask: &[bool]) -> Option<f64> {
        self.row(row)
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&q, _)| q)
            .reduce(f64::max)
    }

    /// `Q(p,b) <- (1-α)Q(p,b) + α(r + γ max_b' Q(p',b'))`. A terminal
    /// selection (`next == None`) has no future term.
    pub fn update(&mut self, state: usize, action: usize, reward: f64, next: Option<NextState<'_>>, alpha: f64, gamma: f64) {
        let future = next.and_then(|n| self.max_in_row(n.row, n.mask)).unwrap_or(0.0);
        let old = self.get(state, action);
        self.set(state, action, (1.0 - alpha) * old + alpha * (reward + gamma * future));
    }

    pub fn max_abs_diff(&self, other: &QTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.n {
            let row: Vec<String> = self.row(r).iter().map(|v| format!("{v:.9}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Legal columns of `row` ordered by decreasing Q, ties by lowest index.
    pub fn ranked(&self, row: usize, mask: &[bool]) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..self.n).filter(|&c| mask[c]).collect();
        cols.sort_by(|&a, &b| self.get(row, b).total_cmp(&self.get(row, a)).then(a.cmp(&b)));
        cols
    }
}

/// Softmax probabilities `exp(Q/kT) / Σ exp(Q/kT)` over the legal entries of
/// `row`; illegal entries get 0.
pub fn boltzmann_probabilities(row: &[f64], mask: &[bool], temperature: f64) -> Result<Vec<f64>, ExplorerError> {
    let max = row
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&q, _)| q)
        .reduce(f64::max)
        .ok_or(ExplorerError::EmptyMask)?;
    let weights: Vec<f64> = row
        .iter()
        .zip(mask)
        .map(|(&q, &m)| if m { ((q - max) / temperature).exp() } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

pub fn boltzmann_select<R: Rng + ?Sized>(
    table: &QTable,
    row: usize,
    temperature: f64,
    rng: &mut R,
    mask: &[bool],
) -> Result<usize, ExplorerError> {
    let probs = boltzmann_probabilities(table.row(row), mask, temperature)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last = Some(i);
            if u < acc {
                return Ok(i);
            }
        }
    }
    // u landed in the rounding gap above the cumulative sum
    last.ok_or(ExplorerError::EmptyMask)
}
