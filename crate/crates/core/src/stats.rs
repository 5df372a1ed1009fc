//! Small statistical helpers shared by experiments and tests.

use serde::{Deserialize, Serialize};

/// Wald 95% half-width for a proportion estimated from `trials` samples.
pub fn proportion_halfwidth(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Counts of successes over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub hits: u64,
    pub trials: u64,
}

impl Tally {
    pub fn record(&mut self, hit: bool) {
        self.hits += hit as u64;
        self.trials += 1;
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            hits: self.hits + other.hits,
            trials: self.trials + other.trials,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_rates() {
        let mut t = Tally::default();
        t.record(true);
        t.record(false);
        assert_eq!(t.rate(), 0.5);
        assert_eq!(t.merge(t).trials, 4);
        assert!((proportion_halfwidth(0.5, 100) - 0.098).abs() < 1e-12);
    }
}
