use super::{MetricError, MetricResult};
use crate::audio::Signal;
use crate::dsp::{power_spectrogram, LOG_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct LsdParams {
    pub frame_len: usize,
    pub hop: usize,
}

impl Default for LsdParams {
    fn default() -> Self {
        Self { frame_len: 512, hop: 128 }
    }
}

/// Log-spectral distance in dB: per frame, the RMS over bins of the
/// difference of `10 log10(P + eps)`, then averaged over frames. Both signals
/// are truncated to the shorter length.
pub fn lsd_score(reference: &Signal, degraded: &Signal, params: &LsdParams) -> Result<MetricResult, MetricError> {
    if reference.sample_rate() != degraded.sample_rate() {
        return Err(MetricError::RateMismatch {
            reference: reference.sample_rate(),
            degraded: degraded.sample_rate(),
        });
    }
    let n = reference.len().min(degraded.len());
    let cut = |s: &Signal| Signal::new(s.samples()[..n].to_vec(), s.sample_rate()).expect("finite samples");
    let pr = power_spectrogram(&cut(reference), params.frame_len, params.hop)?;
    let pd = power_spectrogram(&cut(degraded), params.frame_len, params.hop)?;
    let db = |p: f64| 10.0 * (p + LOG_EPS).log10();
    let total: f64 = pr
        .rows()
        .zip(pd.rows())
        .map(|(a, b)| {
            let ms = a.iter().zip(b).map(|(x, y)| (db(*x) - db(*y)).powi(2)).sum::<f64>() / a.len() as f64;
            ms.sqrt()
        })
        .sum();
    Ok(MetricResult {
        metric_name: "lsd".into(),
        score: total / pr.frames() as f64,
        per_patch: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::DspError;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(seed: u64, n: usize, amp: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| amp * rng.random_range(-1.0..1.0)).collect()
    }

    fn sig(x: Vec<f64>) -> Signal {
        Signal::new(x, 16000).unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let x = sig(noise(1, 8000, 0.3));
        assert_eq!(lsd_score(&x, &x, &LsdParams::default()).unwrap().score, 0.0);
    }

    #[test]
    fn doubling_gives_six_db() {
        let x = sig(noise(2, 8000, 0.3));
        let s = lsd_score(&x.scaled(2.0), &x, &LsdParams::default()).unwrap().score;
        assert!((s - 20.0 * 2f64.log10()).abs() < 1e-3, "{s}");
    }

    #[test]
    fn lower_snr_is_further() {
        let x = noise(3, 16000, 0.3);
        let n = noise(4, 16000, 1.0);
        let px = x.iter().map(|v| v * v).sum::<f64>();
        let pn = n.iter().map(|v| v * v).sum::<f64>();
        let at = |snr: f64| {
            let g = (px / pn / 10f64.powf(snr / 10.0)).sqrt();
            sig(x.iter().zip(&n).map(|(a, b)| a + g * b).collect())
        };
        let p = LsdParams::default();
        let s10 = lsd_score(&sig(x.clone()), &at(10.0), &p).unwrap().score;
        let s20 = lsd_score(&sig(x.clone()), &at(20.0), &p).unwrap().score;
        assert!(s10 > s20);
    }

    #[test]
    fn truncates_to_shorter_and_rejects_tiny_input() {
        let x = noise(5, 9000, 0.3);
        let a = sig(x.clone());
        let b = sig(x[..6000].to_vec());
        assert_eq!(lsd_score(&a, &b, &LsdParams::default()).unwrap().score, 0.0);
        let tiny = sig(vec![0.1; 100]);
        assert_eq!(
            lsd_score(&a, &tiny, &LsdParams::default()).unwrap_err(),
            MetricError::Dsp(DspError::SignalTooShort { len: 100, frame_len: 512 })
        );
    }
}
