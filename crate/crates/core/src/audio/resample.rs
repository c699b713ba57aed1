//! Rational-rate windowed-sinc resampler (Kaiser window).

use std::f64::consts::PI;

/// Kaiser window shape parameter.
pub const KAISER_BETA: f64 = 8.6;
/// Zero crossings of the sinc kernel on each side of the centre, at the lower of the two rates.
pub const HALF_TAPS: usize = 64;

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser(x: f64, beta: f64) -> f64 {
    if x.abs() > 1.0 {
        return 0.0;
    }
    bessel_i0(beta * (1.0 - x * x).sqrt()) / bessel_i0(beta)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Polyphase resampler from `from` Hz to `to` Hz.
///
/// The rate ratio is reduced to `up / down`. Output sample `n` sits at source
/// position `n * down / up`; each of the `up` fractional phases has its own
/// precomputed tap set, normalized to unit DC gain.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: u64,
    down: u64,
    half_width: usize,
    phases: Vec<Vec<f64>>,
}

impl Resampler {
    pub fn new(from: u32, to: u32) -> Self {
        assert!(from > 0 && to > 0, "sample rates must be positive");
        let g = gcd(from as u64, to as u64);
        let up = to as u64 / g;
        let down = from as u64 / g;
        let cutoff = (to as f64 / from as f64).min(1.0);
        let half_width = (HALF_TAPS as f64 / cutoff).ceil() as usize;

        let phases = (0..up)
            .map(|r| {
                let frac = r as f64 / up as f64;
                // Tap j multiplies source sample q + 1 - half_width + j.
                let mut taps: Vec<f64> = (0..2 * half_width)
                    .map(|j| {
                        let offset = frac + half_width as f64 - 1.0 - j as f64;
                        cutoff * sinc(cutoff * offset) * kaiser(offset / half_width as f64, KAISER_BETA)
                    })
                    .collect();
                let sum: f64 = taps.iter().sum();
                if sum.abs() > 0.0 {
                    taps.iter_mut().for_each(|t| *t /= sum);
                }
                taps
            })
            .collect();

        Self {
            up,
            down,
            half_width,
            phases,
        }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        ((input_len as u64 * self.up).div_ceil(self.down)) as usize
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        if self.up == self.down {
            return input.to_vec();
        }
        let n_out = self.output_len(input.len());
        let len = input.len() as i64;
        (0..n_out as u64)
            .map(|n| {
                let pos = n * self.down;
                let q = (pos / self.up) as i64;
                let r = (pos % self.up) as usize;
                let first = q + 1 - self.half_width as i64;
                self.phases[r]
                    .iter()
                    .enumerate()
                    .filter_map(|(j, &t)| {
                        let k = first + j as i64;
                        (0..len).contains(&k).then(|| t * input[k as usize])
                    })
                    .sum()
            })
            .collect()
    }
}

/// One-shot helper around [`Resampler`].
pub fn resample(input: &[f64], from: u32, to: u32) -> Vec<f64> {
    Resampler::new(from, to).process(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, rate: u32, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate as f64).sin())
            .collect()
    }

    /// Direct DFT magnitude peak, as an independent check.
    fn peak_hz(x: &[f64], rate: u32) -> f64 {
        let n = x.len();
        let best = (1..n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, &v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k * i) as f64 / n as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                (k, re * re + im * im)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        best as f64 * rate as f64 / n as f64
    }

    #[test]
    fn bessel_matches_reference_values() {
        // Reference values from scipy.special.i0.
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_2).abs() < 1e-14);
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(8.6) / 750.461_159_563_165_9 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn identity_rate_is_untouched() {
        let x = sine(440.0, 16000, 1000);
        assert_eq!(resample(&x, 16000, 16000), x);
    }

    #[test]
    fn down_48k_to_16k_keeps_length_and_pitch() {
        let x = sine(440.0, 48000, 48000);
        let y = resample(&x, 48000, 16000);
        assert_eq!(y.len(), 16000);
        let f = peak_hz(&y, 16000);
        assert!((f - 440.0).abs() <= 1.0, "peak at {f} Hz");
    }

    #[test]
    fn up_8k_to_16k_preserves_tone() {
        let x = sine(1000.0, 8000, 4000);
        let y = resample(&x, 8000, 16000);
        assert_eq!(y.len(), 8000);
        // Steady-state amplitude close to 1 away from the edges.
        let peak = y[1000..7000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() < 0.01, "peak {peak}");
        assert!((peak_hz(&y[..4000], 16000) - 1000.0).abs() <= 4.0);
    }

    #[test]
    fn dc_passes_with_unit_gain() {
        let x = vec![0.25; 4410];
        let y = resample(&x, 44100, 16000);
        for v in &y[200..y.len() - 200] {
            assert!((v - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn tone_above_target_nyquist_is_attenuated() {
        let x = sine(12000.0, 48000, 9600);
        let y = resample(&x, 48000, 16000);
        let rms = (y[500..2700].iter().map(|v| v * v).sum::<f64>() / 2200.0).sqrt();
        assert!(rms < 1e-3, "rms {rms}");
    }
}
