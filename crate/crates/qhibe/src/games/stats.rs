//! Result accounting and chi-square statistics for the game runners.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Outcome of a repeated security experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameResult {
    pub wins: u64,
    pub trials: u64,
    /// `wins / trials - 1/2`.
    pub advantage_estimate: f64,
    /// Normal-approximation 3-sigma band around the estimate.
    pub confidence_interval: (f64, f64),
}

impl GameResult {
    pub fn from_wins(wins: u64, trials: u64) -> Self {
        assert!(wins <= trials && trials > 0);
        let p = wins as f64 / trials as f64;
        let advantage = p - 0.5;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        GameResult {
            wins,
            trials,
            advantage_estimate: advantage,
            confidence_interval: (advantage - 3.0 * sigma, advantage + 3.0 * sigma),
        }
    }

    pub fn success_rate(&self) -> f64 {
        self.wins as f64 / self.trials as f64
    }

    /// 3-sigma binomial band around zero advantage for the null (guessing)
    /// strategy at this trial count.
    pub fn null_band(trials: u64) -> f64 {
        3.0 * 0.5 / (trials as f64).sqrt()
    }
}

impl std::fmt::Display for GameResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "wins = {}/{} (rate {:.4}), advantage = {:+.4}, 3-sigma CI [{:+.4}, {:+.4}]",
            self.wins,
            self.trials,
            self.success_rate(),
            self.advantage_estimate,
            self.confidence_interval.0,
            self.confidence_interval.1
        )
    }
}

/// One experiment trial, exportable as a text line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub index: u64,
    pub hidden_bit: bool,
    pub guess: bool,
}

impl TrialOutcome {
    pub fn win(&self) -> bool {
        self.hidden_bit == self.guess
    }
}

impl std::fmt::Display for TrialOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "trial={} b={} guess={} win={}",
            self.index,
            self.hidden_bit as u8,
            self.guess as u8,
            self.win() as u8
        )
    }
}

/// A chi-square statistic with its degrees of freedom and upper-tail
/// p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn upper_tail(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

/// Goodness-of-fit test of observed counts against expected probabilities.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), expected_probs.len());
    let total: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut df = 0usize;
    for (&obs, &prob) in observed.iter().zip(expected_probs) {
        let expected = prob * total as f64;
        if expected > 0.0 {
            statistic += (obs as f64 - expected).powi(2) / expected;
            df += 1;
        }
    }
    let df = df.saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: upper_tail(statistic, df),
    }
}

/// Two-sample chi-square homogeneity test over shared bins. Bins with a
/// pooled count of zero carry no information and are dropped.
pub fn chi_square_two_sample(sample_a: &[u64], sample_b: &[u64]) -> ChiSquare {
    assert_eq!(sample_a.len(), sample_b.len());
    let total_a: u64 = sample_a.iter().sum();
    let total_b: u64 = sample_b.iter().sum();
    let grand = (total_a + total_b) as f64;
    let mut statistic = 0.0;
    let mut kept = 0usize;
    for (&a, &b) in sample_a.iter().zip(sample_b) {
        let pooled = (a + b) as f64;
        if pooled == 0.0 {
            continue;
        }
        kept += 1;
        let exp_a = total_a as f64 * pooled / grand;
        let exp_b = total_b as f64 * pooled / grand;
        statistic += (a as f64 - exp_a).powi(2) / exp_a;
        statistic += (b as f64 - exp_b).powi(2) / exp_b;
    }
    let df = kept.saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: upper_tail(statistic, df),
    }
}
