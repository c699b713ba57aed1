//! Short-time spectral analysis: framing, power spectra, mel filterbank,
//! MFCC, CMVN, log-mel spectrogram and an energy-based VAD.
//!
//! Frames are taken without padding or centering: a signal of `len` samples
//! yields `1 + (len - frame_len) / hop` frames.

pub mod nodes;

use std::f64::consts::PI;
use std::ops::Range;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::audio::Signal;

/// Floor added before taking logarithms of energies.
pub const LOG_EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("signal of {len} samples is shorter than one frame ({frame_len})")]
    SignalTooShort { len: usize, frame_len: usize },
    #[error("invalid framing: {0}")]
    InvalidFrame(String),
    #[error("invalid band: need 0 <= fmin < fmax <= Nyquist, got fmin={fmin}, fmax={fmax}")]
    BadBand { fmin: f64, fmax: f64 },
    #[error("need at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("mask has {mask} entries but the matrix has {frames} frames")]
    MaskMismatch { mask: usize, frames: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("feature matrix contains non-finite values")]
    NonFinite,
}

impl DspError {
    pub fn kind(&self) -> &'static str {
        match self {
            DspError::SignalTooShort { .. } => "SignalTooShort",
            DspError::InvalidFrame(_) => "InvalidFrame",
            DspError::BadBand { .. } => "BadBand",
            DspError::TooFewFrames(_) => "TooFewFrames",
            DspError::MaskMismatch { .. } => "MaskMismatch",
            DspError::InvalidParam(_) => "InvalidParam",
            DspError::NonFinite => "NonFinite",
        }
    }
}

/// Frames × coefficients matrix of finite values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    frames: usize,
    coeffs: usize,
    frame_len: usize,
    frame_hop: usize,
    sample_rate: u32,
}

impl FeatureMatrix {
    pub fn new(
        data: Vec<f64>,
        frames: usize,
        coeffs: usize,
        frame_len: usize,
        frame_hop: usize,
        sample_rate: u32,
    ) -> Result<Self, DspError> {
        if data.len() != frames * coeffs {
            return Err(DspError::InvalidParam(format!(
                "{} values cannot form a {frames}x{coeffs} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(DspError::NonFinite);
        }
        Ok(Self {
            data,
            frames,
            coeffs,
            frame_len,
            frame_hop,
            sample_rate,
        })
    }

    /// Matrix from explicit rows, with unit framing metadata. Handy for tests.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DspError> {
        let coeffs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != coeffs) {
            return Err(DspError::InvalidParam("ragged rows".into()));
        }
        Self::new(rows.concat(), rows.len(), coeffs, 1, 1, 1)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn coeffs(&self) -> usize {
        self.coeffs
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn frame_hop(&self) -> usize {
        self.frame_hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.coeffs..(i + 1) * self.coeffs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.coeffs.max(1)).take(self.frames)
    }

    pub fn get(&self, frame: usize, coeff: usize) -> f64 {
        self.data[frame * self.coeffs + coeff]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.frames).map(|i| self.get(i, j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    fn with_rows(&self, data: Vec<f64>, frames: usize) -> FeatureMatrix {
        FeatureMatrix {
            data,
            frames,
            coeffs: self.coeffs,
            frame_len: self.frame_len,
            frame_hop: self.frame_hop,
            sample_rate: self.sample_rate,
        }
    }

    /// Contiguous block of frames.
    pub fn slice(&self, range: Range<usize>) -> FeatureMatrix {
        let data = self.data[range.start * self.coeffs..range.end * self.coeffs].to_vec();
        self.with_rows(data, range.len())
    }

    /// Frames whose mask entry is true.
    pub fn select(&self, mask: &VadMask) -> Result<FeatureMatrix, DspError> {
        if mask.len() != self.frames {
            return Err(DspError::MaskMismatch {
                mask: mask.len(),
                frames: self.frames,
            });
        }
        let mut data = Vec::new();
        let mut kept = 0;
        for (i, _) in mask.keep().iter().enumerate().filter(|(_, k)| **k) {
            data.extend_from_slice(self.row(i));
            kept += 1;
        }
        Ok(self.with_rows(data, kept))
    }
}

/// Per-frame keep/drop decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VadMask {
    keep: Vec<bool>,
}

impl VadMask {
    pub fn new(keep: Vec<bool>) -> Self {
        Self { keep }
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn count_kept(&self) -> usize {
        self.keep.iter().filter(|k| **k).count()
    }
}

/// Analysis parameters shared by the MFCC and mel-spectrogram front ends.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_coeffs: usize,
    pub fmin: f64,
    /// Upper band edge; `None` means Nyquist.
    pub fmax: Option<f64>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame_len: 512,
            hop: 128,
            n_mels: 32,
            n_coeffs: 13,
            fmin: 0.0,
            fmax: None,
        }
    }
}

pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        0
    } else {
        1 + (len - frame_len) / hop
    }
}

fn check_framing(len: usize, frame_len: usize, hop: usize) -> Result<(), DspError> {
    if frame_len == 0 || hop == 0 || hop > frame_len {
        return Err(DspError::InvalidFrame(format!(
            "need 0 < hop <= frame_len, got frame_len={frame_len}, hop={hop}"
        )));
    }
    if len < frame_len {
        return Err(DspError::SignalTooShort { len, frame_len });
    }
    Ok(())
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed magnitude-squared DFT per frame; `frame_len / 2 + 1` bins.
pub fn power_spectrogram(sig: &Signal, frame_len: usize, hop: usize) -> Result<FeatureMatrix, DspError> {
    if !frame_len.is_power_of_two() {
        return Err(DspError::InvalidFrame(format!("frame_len {frame_len} is not a power of two")));
    }
    let x = sig.samples();
    check_framing(x.len(), frame_len, hop)?;
    let frames = frame_count(x.len(), frame_len, hop);
    let bins = frame_len / 2 + 1;
    let window = hann(frame_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(frame_len);
    let mut buf = vec![Complex::new(0.0, 0.0); frame_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut data = Vec::with_capacity(frames * bins);
    for f in 0..frames {
        let start = f * hop;
        for (b, (&s, &w)) in buf.iter_mut().zip(x[start..start + frame_len].iter().zip(&window)) {
            *b = Complex::new(s * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        data.extend(buf[..bins].iter().map(|c| c.norm_sqr()));
    }
    FeatureMatrix::new(data, frames, bins, frame_len, hop, sig.sample_rate())
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with centres equally spaced on the mel scale, each
/// scaled to a peak of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    n_mels: usize,
    n_bins: usize,
    weights: Vec<f64>,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, frame_len: usize, rate: u32, fmin: f64, fmax: f64) -> Result<Self, DspError> {
        let nyquist = rate as f64 / 2.0;
        if !(fmin >= 0.0 && fmin < fmax && fmax <= nyquist) {
            return Err(DspError::BadBand { fmin, fmax });
        }
        if n_mels < 2 {
            return Err(DspError::InvalidParam(format!("n_mels must be at least 2, got {n_mels}")));
        }
        if frame_len < 2 {
            return Err(DspError::InvalidFrame(format!("frame_len {frame_len} too small")));
        }
        let n_bins = frame_len / 2 + 1;
        let (mlo, mhi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let bin_hz = rate as f64 / frame_len as f64;

        let mut weights = vec![0.0; n_mels * n_bins];
        for m in 0..n_mels {
            let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let row = &mut weights[m * n_bins..(m + 1) * n_bins];
            for (k, w) in row.iter_mut().enumerate() {
                let f = k as f64 * bin_hz;
                *w = if f > lo && f <= c {
                    (f - lo) / (c - lo)
                } else if f > c && f < hi {
                    (hi - f) / (hi - c)
                } else {
                    0.0
                };
            }
            let peak = row.iter().cloned().fold(0.0, f64::max);
            if peak > 0.0 {
                row.iter_mut().for_each(|w| *w /= peak);
            } else {
                // Filter narrower than a bin: put all weight on the nearest bin.
                let k = ((c / bin_hz).round() as usize).min(n_bins - 1);
                row[k] = 1.0;
            }
        }
        Ok(Self {
            n_mels,
            n_bins,
            weights,
            centers_hz: edges[1..=n_mels].to_vec(),
        })
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn filter(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    /// Mel-band energies of one power-spectrum row.
    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        (0..self.n_mels)
            .map(|m| self.filter(m).iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}

/// Orthonormal DCT-II basis, `n_out` rows by `n_in` columns.
fn dct_matrix(n_in: usize, n_out: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_in * n_out);
    for k in 0..n_out {
        let scale = if k == 0 {
            (1.0 / n_in as f64).sqrt()
        } else {
            (2.0 / n_in as f64).sqrt()
        };
        for m in 0..n_in {
            out.push(scale * (PI * k as f64 * (2 * m + 1) as f64 / (2 * n_in) as f64).cos());
        }
    }
    out
}

/// Orthonormal DCT-II of `x`, keeping the first `n_out` coefficients.
pub fn dct_ortho(x: &[f64], n_out: usize) -> Vec<f64> {
    let basis = dct_matrix(x.len(), n_out);
    basis
        .chunks_exact(x.len())
        .map(|row| row.iter().zip(x).map(|(b, v)| b * v).sum())
        .collect()
}

fn fmax_or_nyquist(cfg: &FeatureConfig, rate: u32) -> f64 {
    cfg.fmax.unwrap_or(rate as f64 / 2.0)
}

/// `ln(mel energy + LOG_EPS)` per frame.
pub fn mel_spectrogram(sig: &Signal, cfg: &FeatureConfig) -> Result<FeatureMatrix, DspError> {
    let power = power_spectrogram(sig, cfg.frame_len, cfg.hop)?;
    let fb = MelFilterbank::new(
        cfg.n_mels,
        cfg.frame_len,
        sig.sample_rate(),
        cfg.fmin,
        fmax_or_nyquist(cfg, sig.sample_rate()),
    )?;
    let data: Vec<f64> = power
        .rows()
        .flat_map(|row| fb.apply(row).into_iter().map(|e| (e + LOG_EPS).ln()))
        .collect();
    FeatureMatrix::new(data, power.frames(), cfg.n_mels, cfg.frame_len, cfg.hop, sig.sample_rate())
}

/// Mel-frequency cepstral coefficients 0..n_coeffs.
pub fn mfcc(sig: &Signal, cfg: &FeatureConfig) -> Result<FeatureMatrix, DspError> {
    if cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_mels {
        return Err(DspError::InvalidParam(format!(
            "n_coeffs must be in 1..={}, got {}",
            cfg.n_mels, cfg.n_coeffs
        )));
    }
    let logmel = mel_spectrogram(sig, cfg)?;
    let basis = dct_matrix(cfg.n_mels, cfg.n_coeffs);
    let data: Vec<f64> = logmel
        .rows()
        .flat_map(|row| {
            basis
                .chunks_exact(cfg.n_mels)
                .map(move |b| b.iter().zip(row).map(|(w, v)| w * v).sum::<f64>())
        })
        .collect();
    FeatureMatrix::new(data, logmel.frames(), cfg.n_coeffs, cfg.frame_len, cfg.hop, sig.sample_rate())
}

/// Per-coefficient standardization across frames (population variance).
/// Columns with (numerically) zero spread become all zeros.
pub fn cmvn(feats: &FeatureMatrix) -> Result<FeatureMatrix, DspError> {
    let n = feats.frames();
    if n < 2 {
        return Err(DspError::TooFewFrames(n));
    }
    let d = feats.coeffs();
    let mut out = feats.values().to_vec();
    for j in 0..d {
        let col = feats.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        let flat = std <= 1e-10 * mean.abs().max(1.0);
        for (i, v) in col.iter().enumerate() {
            out[i * d + j] = if flat { 0.0 } else { (v - mean) / std };
        }
    }
    Ok(feats.with_rows(out, n))
}

/// Keeps frame `i` iff `10 log10(E_i / E_max) >= threshold_db`, where `E_i`
/// is the frame's sum of squares. All-silent input yields an all-false mask.
pub fn vad_mask(sig: &Signal, frame_len: usize, hop: usize, threshold_db: f64) -> Result<VadMask, DspError> {
    if threshold_db.is_nan() || threshold_db >= 0.0 {
        return Err(DspError::InvalidParam(format!("VAD threshold must be negative dB, got {threshold_db}")));
    }
    let x = sig.samples();
    check_framing(x.len(), frame_len, hop)?;
    let energies: Vec<f64> = (0..frame_count(x.len(), frame_len, hop))
        .map(|f| x[f * hop..f * hop + frame_len].iter().map(|s| s * s).sum())
        .collect();
    let max = energies.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Ok(VadMask::new(vec![false; energies.len()]));
    }
    Ok(VadMask::new(
        energies
            .iter()
            .map(|&e| e > 0.0 && 10.0 * (e / max).log10() >= threshold_db)
            .collect(),
    ))
}
