//! Seeded synthetic corpus: speech-like references, degraded variants at
//! fixed SNRs plus a time-shifted copy, and the dataset CSV describing them.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::audio::{write_wav_pcm16, AudioError, Signal};

/// Peak amplitude of every reference.
pub const REF_PEAK: f64 = 0.3;
/// Level of the pauses between syllables, relative to the active level.
pub const PAUSE_FLOOR_DB: f64 = -50.0;
/// White background noise level relative to the reference peak.
pub const BACKGROUND_DB: f64 = -60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub n_refs: usize,
    pub duration_secs: f64,
    pub rate: u32,
    pub snrs_db: Vec<f64>,
    pub shift_ms: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n_refs: 6,
            duration_secs: 2.0,
            rate: 16_000,
            snrs_db: vec![30.0, 20.0, 10.0, 0.0],
            shift_ms: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Degradation {
    Noise { snr_db: f64 },
    Shift { ms: f64 },
}

impl Degradation {
    pub fn codec(&self) -> String {
        match self {
            Degradation::Noise { snr_db } => format!("snr{snr_db}"),
            Degradation::Shift { .. } => "shift".into(),
        }
    }

    fn nominal_mos(&self) -> f64 {
        match *self {
            Degradation::Noise { snr_db } => (1.2 + 0.11 * snr_db).clamp(1.0, 5.0),
            Degradation::Shift { .. } => 4.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub ref_index: usize,
    pub degradation: Degradation,
    pub reference: Signal,
    pub degraded: Signal,
    pub mos: f64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Leading and trailing silence at the pause floor around a run of
/// syllables; between syllables the level dips to about -15 dB.
/// Transitions use 10 ms raised-cosine ramps.
fn envelope(n: usize, rate: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let floor = 10f64.powf(PAUSE_FLOOR_DB / 20.0);
    let dip = 10f64.powf(-15.0 / 20.0);
    let ms = |v: f64| (v * rate as f64 / 1000.0) as usize;
    let ramp = ms(10.0);
    let lead = ms(rng.random_range(100.0..200.0));
    let tail = n.saturating_sub(ms(rng.random_range(100.0..200.0)));
    let mut env = vec![floor; n];
    let mut pos = lead;
    while pos < tail {
        let end = (pos + ms(rng.random_range(150.0..300.0))).min(tail);
        let base = if pos == lead { floor } else { dip };
        let last = end == tail;
        for (k, e) in env[pos..end].iter_mut().enumerate() {
            let rise = k < ramp;
            let fall = end - pos - 1 - k < ramp;
            let shape = |edge: usize, lo: f64| lo + (1.0 - lo) * (0.5 - 0.5 * (PI * edge as f64 / ramp as f64).cos());
            *e = if rise {
                shape(k, base)
            } else if fall {
                shape(end - pos - 1 - k, if last { floor } else { dip })
            } else {
                1.0
            };
        }
        pos = end;
    }
    env
}

/// Slowly wandering value `base + depth * sin(2 pi rate t + phase)`.
struct Track {
    base: f64,
    depth: f64,
    rate: f64,
    phase: f64,
}

impl Track {
    fn new(rng: &mut ChaCha8Rng, base: std::ops::Range<f64>, depth: f64) -> Self {
        Self {
            base: rng.random_range(base),
            depth,
            rate: rng.random_range(2.0..5.0),
            phase: rng.random_range(0.0..2.0 * PI),
        }
    }

    fn at(&self, t: f64) -> f64 {
        self.base + self.depth * (2.0 * PI * self.rate * t + self.phase).sin()
    }
}

/// Harmonic source with three moving formants, harmonics up to Nyquist and
/// a breathy noise component 15 dB below the harmonic power.
fn voiced(n: usize, rate: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let f0 = Track::new(rng, 100.0..200.0, 25.0);
    let formants = [
        (Track::new(rng, 450.0..750.0, 200.0), 110.0),
        (Track::new(rng, 1200.0..1800.0, 500.0), 150.0),
        (Track::new(rng, 2400.0..3000.0, 300.0), 220.0),
    ];
    let nyquist = rate as f64 / 2.0;
    let mut phase = 0.0;
    let harmonic: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate as f64;
            let f = f0.at(t);
            let centers: Vec<(f64, f64)> = formants.iter().map(|(tr, bw)| (tr.at(t), *bw)).collect();
            let envelope = |fh: f64| {
                centers.iter().map(|(c, b)| 1.0 / (1.0 + ((fh - c) / b).powi(2))).sum::<f64>()
                    + 0.1 * 1000.0 / (fh + 1000.0)
            };
            phase += 2.0 * PI * f / rate as f64;
            (1..)
                .map(|h| (h, f * h as f64))
                .take_while(|(_, fh)| *fh < nyquist)
                .map(|(h, fh)| envelope(fh) * (h as f64 * phase).sin())
                .sum()
        })
        .collect();
    let breath = speech_shaped_noise(n, rate, rng);
    let g = (power(&harmonic) / power(&breath) / 30.0).sqrt();
    harmonic.iter().zip(&breath).map(|(h, b)| h + g * b).collect()
}

/// Noise through a one-pole filter whose coefficient wanders between
/// lowpass and highpass settings, giving vowel-like and fricative-like stretches.
fn speech_shaped_noise(n: usize, rate: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let g = Normal::new(0.0, 1.0).expect("valid normal");
    let coef = Track::new(rng, 0.1..0.2, 0.7);
    let mut y = 0.0;
    (0..n)
        .map(|i| {
            let a = coef.at(i as f64 / rate as f64);
            y = a * y + (1.0 - a * a).sqrt() * g.sample(rng);
            y
        })
        .collect()
}

/// Reference `index`: even indices are harmonic, odd indices speech-shaped noise.
pub fn reference(seed: u64, index: usize, cfg: &CorpusConfig) -> Signal {
    let n = (cfg.duration_secs * cfg.rate as f64).round() as usize;
    let mut rng = rng_for(seed, 2 * index as u64);
    let env = envelope(n, cfg.rate, &mut rng);
    let carrier = if index.is_multiple_of(2) {
        voiced(n, cfg.rate, &mut rng)
    } else {
        speech_shaped_noise(n, cfg.rate, &mut rng)
    };
    let mut x: Vec<f64> = carrier.iter().zip(&env).map(|(c, e)| c * e).collect();
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // A recording-like floor keeps every spectral bin well above quantization noise.
    let floor = Normal::new(0.0, peak * 10f64.powf(BACKGROUND_DB / 20.0)).expect("valid normal");
    for v in &mut x {
        *v += floor.sample(&mut rng);
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Signal::new(x.iter().map(|v| v * REF_PEAK / peak).collect(), cfg.rate).expect("finite synthesis")
}

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// `x + g * noise` with `g` chosen so the whole-signal SNR is `snr_db`.
pub fn mix_at_snr(x: &[f64], noise: &[f64], snr_db: f64) -> Vec<f64> {
    let g = (power(x) / power(noise) / 10f64.powf(snr_db / 10.0)).sqrt();
    x.iter().zip(noise).map(|(a, b)| a + g * b).collect()
}

/// Delays by `samples`, keeping the original length.
pub fn delayed(x: &[f64], samples: usize) -> Vec<f64> {
    let samples = samples.min(x.len());
    let mut out = vec![0.0; samples];
    out.extend_from_slice(&x[..x.len() - samples]);
    out
}

/// All items of the corpus, in memory. Every SNR variant of one reference
/// uses the same noise realization, only rescaled.
pub fn synthesize(seed: u64, cfg: &CorpusConfig) -> Vec<CorpusItem> {
    let mut items = Vec::new();
    let white = Normal::new(0.0, 1.0).expect("valid normal");
    for r in 0..cfg.n_refs {
        let reference = reference(seed, r, cfg);
        let mut rng = rng_for(seed, 2 * r as u64 + 1);
        let noise: Vec<f64> = (0..reference.len()).map(|_| white.sample(&mut rng)).collect();
        let mut variants: Vec<Degradation> = cfg.snrs_db.iter().map(|&snr_db| Degradation::Noise { snr_db }).collect();
        variants.push(Degradation::Shift { ms: cfg.shift_ms });
        for d in variants {
            let samples = match d {
                Degradation::Noise { snr_db } => mix_at_snr(reference.samples(), &noise, snr_db),
                Degradation::Shift { ms } => {
                    delayed(reference.samples(), (ms * cfg.rate as f64 / 1000.0).round() as usize)
                }
            };
            let jitter: f64 = rng.random_range(-0.15..0.15);
            let mos = ((d.nominal_mos() + jitter).clamp(1.0, 5.0) * 100.0).round() / 100.0;
            items.push(CorpusItem {
                ref_index: r,
                degradation: d,
                reference: reference.clone(),
                degraded: Signal::new(samples, cfg.rate).expect("finite mix"),
                mos,
            });
        }
    }
    items
}

pub fn ref_file_name(index: usize) -> String {
    format!("refs/ref_{index:02}.wav")
}

pub fn deg_file_name(index: usize, d: &Degradation) -> String {
    format!("deg/ref_{index:02}_{}.wav", d.codec())
}

/// Writes `refs/`, `deg/` and `dataset.csv` under `dir`; returns the CSV path.
pub fn write_corpus(dir: impl AsRef<Path>, seed: u64, cfg: &CorpusConfig) -> Result<PathBuf, AudioError> {
    let dir = dir.as_ref();
    let io = |p: &Path, e: std::io::Error| AudioError::Write {
        path: p.to_path_buf(),
        detail: e.to_string(),
    };
    for sub in ["refs", "deg"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| io(&p, e))?;
    }
    let items = synthesize(seed, cfg);
    let mut csv = String::from("ref,deg,codec,mos\n");
    let mut written = None;
    for item in &items {
        let rf = ref_file_name(item.ref_index);
        let df = deg_file_name(item.ref_index, &item.degradation);
        if written != Some(item.ref_index) {
            write_wav_pcm16(dir.join(&rf), &item.reference)?;
            written = Some(item.ref_index);
        }
        write_wav_pcm16(dir.join(&df), &item.degraded)?;
        csv.push_str(&format!("{rf},{df},{},{}\n", item.degradation.codec(), item.mos));
    }
    let path = dir.join("dataset.csv");
    std::fs::write(&path, csv).map_err(|e| io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = CorpusConfig {
            n_refs: 2,
            ..CorpusConfig::default()
        };
        assert_eq!(synthesize(7, &cfg), synthesize(7, &cfg));
        assert_ne!(synthesize(7, &cfg)[0].reference, synthesize(8, &cfg)[0].reference);
    }

    #[test]
    fn references_are_normalized_and_snrs_hold() {
        let cfg = CorpusConfig {
            n_refs: 2,
            ..CorpusConfig::default()
        };
        for item in synthesize(1, &cfg) {
            let peak = item.reference.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((peak - REF_PEAK).abs() < 1e-12);
            assert!((1.0..=5.0).contains(&item.mos));
            if let Degradation::Noise { snr_db } = item.degradation {
                let diff: Vec<f64> = item
                    .degraded
                    .samples()
                    .iter()
                    .zip(item.reference.samples())
                    .map(|(d, r)| d - r)
                    .collect();
                let snr = 10.0 * (power(item.reference.samples()) / power(&diff)).log10();
                assert!((snr - snr_db).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn delay_keeps_length() {
        assert_eq!(delayed(&[1.0, 2.0, 3.0, 4.0], 2), vec![0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn writes_csv_and_audio() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = CorpusConfig {
            n_refs: 1,
            duration_secs: 0.5,
            ..CorpusConfig::default()
        };
        let csv = write_corpus(dir.path(), 3, &cfg).unwrap();
        let text = std::fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 5);
        assert!(dir.path().join("refs/ref_00.wav").exists());
        assert!(dir.path().join("deg/ref_00_shift.wav").exists());
    }
}
