use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub repetitions: usize,
    pub examples: usize,
    /// Fastest full pass over the dataset.
    pub best_total: Duration,
    pub best_mean_per_example: Duration,
    pub runs: Vec<Duration>,
}

/// Times `repetitions` sequential passes of `predict` over `inputs` and
/// keeps the fastest. Runs on the calling thread only.
pub fn time_inference<T>(
    inputs: &[T],
    repetitions: usize,
    mut predict: impl FnMut(&T) -> [f64; 2],
) -> TimingStats {
    let repetitions = repetitions.max(1);
    let mut sink = 0.0;
    let runs: Vec<Duration> = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            for x in inputs {
                sink += std::hint::black_box(predict(x))[1];
            }
            start.elapsed().max(Duration::from_nanos(1))
        })
        .collect();
    std::hint::black_box(sink);
    let best_total = runs.iter().copied().min().unwrap_or(Duration::from_nanos(1));
    let n = inputs.len().max(1) as u32;
    TimingStats {
        repetitions,
        examples: inputs.len(),
        best_total,
        best_mean_per_example: (best_total / n).max(Duration::from_nanos(1)),
        runs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_of_n_is_minimum() {
        let inputs = vec![1.0f64; 1000];
        let stats = time_inference(&inputs, 5, |x| [x.sin(), x.cos()]);
        assert_eq!(stats.runs.len(), 5);
        assert!(stats.runs.iter().all(|r| *r >= stats.best_total));
        assert!(stats.best_total > Duration::ZERO);
        assert!(stats.best_mean_per_example > Duration::ZERO);
    }
}
