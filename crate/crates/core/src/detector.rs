//! Photon-counting detector model.
//!
//! Expected rates are converted into mean counts over an integration time
//! and then Poisson-sampled. Draws are keyed by (seed, grid index), never by
//! execution order, so sampling is reproducible across runs and thread
//! counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::numeric::{derive_seed, Real};
use crate::spectra::FringeRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel<R: Real> {
    /// Quantum efficiency, in [0, 1].
    pub efficiency: R,
    /// Dark count rate, counts per second.
    pub dark_rate: R,
    /// Integration time per grid point, seconds.
    pub integration_time: R,
    /// Seed for reproducible sampling.
    pub rng_seed: u64,
}

impl<R: Real> DetectorModel<R> {
    pub fn new(efficiency: R, dark_rate: R, integration_time: R, rng_seed: u64) -> Result<Self> {
        let det = Self {
            efficiency,
            dark_rate,
            integration_time,
            rng_seed,
        };
        det.validate()?;
        Ok(det)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency >= R::zero() && self.efficiency <= R::one()) {
            return Err(Error::Domain(format!(
                "efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        if !(self.dark_rate >= R::zero()) {
            return Err(Error::Domain("dark rate must be >= 0".into()));
        }
        if !(self.integration_time > R::zero()) {
            return Err(Error::Domain("integration time must be > 0".into()));
        }
        Ok(())
    }

    pub fn with_integration_time(mut self, t: R) -> Self {
        self.integration_time = t;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

/// Mean counts for one grid point:
/// (rate * rate_scale * efficiency + dark_rate) * integration_time.
/// `rate_scale` bridges the dimensionless rate to counts per second.
pub fn expected_counts<R: Real>(rate: R, det: &DetectorModel<R>, rate_scale: R) -> Result<R> {
    if !(rate >= R::zero()) {
        return Err(Error::Domain(format!("rate {rate} must be >= 0")));
    }
    det.validate()?;
    Ok((rate * rate_scale * det.efficiency + det.dark_rate) * det.integration_time)
}

/// One Poisson draw keyed by (seed, index).
pub fn sample_count_at(mean: f64, seed: u64, index: u64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index));
    let dist = Poisson::new(mean).expect("positive finite poisson mean");
    dist.sample(&mut rng) as u64
}

/// Independent Poisson draws for a list of means.
pub fn sample_counts<R: Real>(means: &[R], det: &DetectorModel<R>) -> Result<Vec<u64>> {
    means
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            if !(m >= R::zero()) {
                return Err(Error::Domain(format!("mean count {m} must be >= 0")));
            }
            Ok(sample_count_at(
                m.to_f64().unwrap_or(0.0),
                det.rng_seed,
                i as u64,
            ))
        })
        .collect()
}

/// Convert a fringe record's expected rates to mean counts and attach
/// Poisson-sampled counts.
pub fn sample_fringe<R: Real>(
    record: &mut FringeRecord<R>,
    det: &DetectorModel<R>,
    rate_scale: R,
) -> Result<()> {
    let means: Vec<R> = record
        .expected
        .iter()
        .map(|&r| expected_counts(r, det, rate_scale))
        .collect::<Result<_>>()?;
    record.sampled = Some(sample_counts(&means, det)?);
    // Report expected counts on the same scale as the samples.
    record.expected = means;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(seed: u64) -> DetectorModel<f64> {
        DetectorModel::new(1.0, 0.0, 1.0, seed).unwrap()
    }

    #[test]
    fn expected_counts_arithmetic() {
        let d = DetectorModel::new(1.0, 0.0, 1.0, 0).unwrap();
        assert_eq!(expected_counts(0.0, &d, 1000.0).unwrap(), 0.0);
        assert_eq!(expected_counts(1.0, &d, 1000.0).unwrap(), 1000.0);
        let d = DetectorModel::new(0.5, 10.0, 2.0, 0).unwrap();
        assert_eq!(expected_counts(1.0, &d, 1000.0).unwrap(), 1020.0);
        assert!(expected_counts(-1.0, &d, 1000.0).is_err());
    }

    #[test]
    fn invalid_detectors_are_rejected() {
        assert!(DetectorModel::new(1.5, 0.0, 1.0, 0).is_err());
        assert!(DetectorModel::new(0.5, -1.0, 1.0, 0).is_err());
        assert!(DetectorModel::new(0.5, 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn zero_mean_always_zero() {
        let counts = sample_counts(&[0.0; 32], &det(5)).unwrap();
        assert!(counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn same_seed_reproduces_sequences() {
        let means: Vec<f64> = (0..64).map(|i| 10.0 + i as f64).collect();
        let a = sample_counts(&means, &det(42)).unwrap();
        let b = sample_counts(&means, &det(42)).unwrap();
        assert_eq!(a, b);
        let c = sample_counts(&means, &det(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn draws_are_keyed_by_index_not_order() {
        let means: Vec<f64> = (0..16).map(|i| 1000.0 + i as f64).collect();
        let forward = sample_counts(&means, &det(7)).unwrap();
        // Sampling each index on its own must reproduce the batch result.
        for (i, &m) in means.iter().enumerate() {
            assert_eq!(sample_count_at(m, 7, i as u64), forward[i]);
        }
    }

    #[test]
    fn large_mean_within_three_sigma() {
        let mean = 1e6;
        let n = 1000usize;
        let means = vec![mean; n];
        let counts = sample_counts(&means, &det(11)).unwrap();
        let sample_mean = counts.iter().sum::<u64>() as f64 / n as f64;
        let sigma = (mean / n as f64).sqrt();
        assert!(
            (sample_mean - mean).abs() < 3.0 * sigma,
            "sample mean {sample_mean} vs {mean} (sigma {sigma})"
        );
    }

    #[test]
    fn variance_to_mean_ratio_near_unity() {
        let mean = 1e4;
        let n = 10_000usize;
        let counts = sample_counts(&vec![mean; n], &det(13)).unwrap();
        let m = counts.iter().sum::<u64>() as f64 / n as f64;
        let var = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - m;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64;
        let ratio = var / m;
        assert!((0.9..=1.1).contains(&ratio), "variance/mean = {ratio}");
    }

    #[test]
    fn sample_fringe_attaches_counts_on_count_scale() {
        use crate::spectra::{FringeKind, FringeRecord};
        let mut rec = FringeRecord::new(FringeKind::Fd, vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 1.5]);
        let d = DetectorModel::new(1.0, 0.0, 2.0, 3).unwrap();
        sample_fringe(&mut rec, &d, 1000.0).unwrap();
        assert_eq!(rec.expected, vec![1000.0, 2000.0, 3000.0]);
        let counts = rec.sampled.unwrap();
        assert_eq!(counts.len(), 3);
        for (c, e) in counts.iter().zip([1000.0, 2000.0, 3000.0]) {
            assert!((*c as f64 - e).abs() < 6.0 * e.sqrt());
        }
    }
}
