//! Audio and dataset loading.

mod dataset;
pub mod nodes;
pub mod resample;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use dataset::{load_dataset, ColumnMap, DatasetRow, DatasetTable, ScoreCell};
pub use resample::{resample, Resampler};

/// Working sample rate used when a node does not say otherwise.
pub const DEFAULT_RATE: u32 = 16_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("cannot decode {}: {detail}", .path.display())]
    Decode { path: PathBuf, detail: String },
    #[error("unsupported audio format in {}: {detail}", .path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },
    #[error("cannot write {}: {detail}", .path.display())]
    Write { path: PathBuf, detail: String },
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("dataset is missing column '{0}'")]
    MissingColumn(String),
    #[error("dataset row {row} has MOS '{value}' outside [1, 5]")]
    BadMos { row: usize, value: String },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("cannot read dataset {}: {detail}", .path.display())]
    Csv { path: PathBuf, detail: String },
    #[error("score column '{name}' has {got} values for {rows} rows")]
    ScoreLength { name: String, got: usize, rows: usize },
}

impl AudioError {
    pub fn kind(&self) -> &'static str {
        match self {
            AudioError::Decode { .. } => "DecodeError",
            AudioError::UnsupportedFormat { .. } => "UnsupportedFormat",
            AudioError::Write { .. } => "WriteError",
            AudioError::InvalidSignal(_) => "InvalidSignal",
            AudioError::MissingColumn(_) => "MissingColumn",
            AudioError::BadMos { .. } => "BadMos",
            AudioError::EmptyDataset => "EmptyDataset",
            AudioError::Csv { .. } => "CsvError",
            AudioError::ScoreLength { .. } => "ScoreLength",
        }
    }
}

/// Mono audio at a fixed sample rate. Samples are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidSignal("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AudioError::InvalidSignal(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn resampled(&self, target_rate: u32) -> Signal {
        Signal {
            samples: resample(&self.samples, self.sample_rate, target_rate),
            sample_rate: target_rate,
        }
    }
}

/// Decodes a PCM16 or float32 WAV file, averages channels to mono, resamples
/// to `target_rate` and clamps to [-1, 1].
pub fn load_audio(path: impl AsRef<Path>, target_rate: u32) -> Result<Signal, AudioError> {
    let path = path.as_ref();
    let decode = |e: hound::Error| AudioError::Decode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    };
    let reader = hound::WavReader::open(path).map_err(decode)?;
    let spec = reader.spec();
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(decode)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(decode)?,
        (format, bits) => {
            return Err(AudioError::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?} samples (expected PCM16 or float32)"),
            })
        }
    };
    let channels = usize::from(spec.channels.max(1));
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    if mono.iter().any(|s| !s.is_finite()) {
        return Err(AudioError::Decode {
            path: path.to_path_buf(),
            detail: "file contains non-finite samples".into(),
        });
    }
    let mut samples = resample(&mono, spec.sample_rate, target_rate);
    for s in &mut samples {
        *s = s.clamp(-1.0, 1.0);
    }
    Signal::new(samples, target_rate)
}

fn write_err(path: &Path) -> impl Fn(hound::Error) -> AudioError + '_ {
    move |e| AudioError::Write {
        path: path.to_path_buf(),
        detail: e.to_string(),
    }
}

/// Writes a mono 16-bit PCM WAV. Samples are clamped to the representable range.
pub fn write_wav_pcm16(path: impl AsRef<Path>, signal: &Signal) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(write_err(path))?;
    for &s in signal.samples() {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(write_err(path))?;
    }
    writer.finalize().map_err(write_err(path))
}

/// Writes a mono 32-bit float WAV.
pub fn write_wav_f32(path: impl AsRef<Path>, signal: &Signal) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(write_err(path))?;
    for &s in signal.samples() {
        writer.write_sample(s as f32).map_err(write_err(path))?;
    }
    writer.finalize().map_err(write_err(path))
}
