use serde::{Deserialize, Serialize};

/// Hypothesis-test outcome. The invariant `pass == (statistic < threshold)`
/// is baked into the constructor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
}

impl TestReport {
    pub fn new(test: &str, statistic: f64, threshold: f64, samples: usize, seed: u64) -> Self {
        TestReport {
            test: test.to_string(),
            statistic,
            threshold,
            pass: statistic < threshold,
            samples,
            seed,
        }
    }
}
