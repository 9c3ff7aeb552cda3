//! Audio I/O, resampling, STFT analysis/synthesis, and the log-power-spectrum
//! transforms of the enhancement pipeline.
//!
//! All operations here are pure functions of their inputs and safe to call
//! concurrently. Spectral processing runs in `f64`; the network consumes the
//! resulting LPS as `f32`.

mod lps;
mod resample;
mod stft;
mod wav;

pub use lps::{lps_from_magnitude, magnitude_from_lps, LPS_EPS_FLOOR};
pub use resample::resample_to_16k;
pub use stft::{istft, reconstruct, stft};
pub use wav::{read_wav, wav_duration_secs, write_wav};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("wav format error: {0}")]
    Format(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported sample rate {got} Hz (expected {expected} Hz)")]
    UnsupportedRate { got: u32, expected: u32 },
    #[error("signal too short: {samples} samples, need at least {frame_len}")]
    TooShort { samples: usize, frame_len: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("negative magnitude {value} at frame {frame}, bin {bin}")]
    NegativeMagnitude { frame: usize, bin: usize, value: f64 },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

/// Floor inside the log of the LPS transform; keeps silent bins bounded.
/// The padding value for short segments is `LPS_EPS_FLOOR.ln()`.
pub fn lps_floor_ln() -> f64 {
    LPS_EPS_FLOOR.ln()
}

/// Mono audio: real amplitudes (nominal range [-1, 1]) plus a sample rate.
#[derive(Clone, Debug)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample_rate must be positive");
        Waveform {
            samples,
            sample_rate,
        }
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
}

/// STFT framing parameters. Defaults: 512-sample frames (32 ms at 16 kHz)
/// with half-frame hop and a periodic Hann window, which satisfies COLA
/// exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop_len: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            frame_len: 512,
            hop_len: 256,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<(), DspError> {
        if !self.frame_len.is_power_of_two() {
            return Err(DspError::Shape(format!(
                "frame_len {} is not a power of two",
                self.frame_len
            )));
        }
        if self.hop_len * 2 != self.frame_len {
            return Err(DspError::Shape(format!(
                "hop_len {} must be frame_len/2 = {}",
                self.hop_len,
                self.frame_len / 2
            )));
        }
        Ok(())
    }

    /// Number of one-sided frequency bins (frame_len/2 + 1).
    pub fn bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Periodic Hann window of length `frame_len`.
    pub fn window(&self) -> Vec<f64> {
        let n = self.frame_len;
        (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect()
    }
}

/// Complex STFT: `frames x bins` with `bins = frame_len/2 + 1`.
#[derive(Clone, Debug)]
pub struct ComplexSpectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<rustfft::num_complex::Complex64>,
    pub config: StftConfig,
    pub sample_rate: u32,
}

impl ComplexSpectrogram {
    #[inline]
    pub fn at(&self, frame: usize, bin: usize) -> rustfft::num_complex::Complex64 {
        self.data[frame * self.bins + bin]
    }

    /// Per-cell magnitudes.
    pub fn magnitude(&self) -> MagnitudeSpectrogram {
        MagnitudeSpectrogram {
            frames: self.frames,
            bins: self.bins,
            data: self.data.iter().map(|c| c.norm()).collect(),
        }
    }
}

/// Real nonnegative `frames x bins` magnitude grid.
#[derive(Clone, Debug)]
pub struct MagnitudeSpectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<f64>,
}

impl MagnitudeSpectrogram {
    #[inline]
    pub fn at(&self, frame: usize, bin: usize) -> f64 {
        self.data[frame * self.bins + bin]
    }
}

/// Natural-log power grid: `ln(max(mag^2, LPS_EPS_FLOOR))` per cell.
#[derive(Clone, Debug)]
pub struct LpsSpectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<f64>,
}

impl LpsSpectrogram {
    #[inline]
    pub fn at(&self, frame: usize, bin: usize) -> f64 {
        self.data[frame * self.bins + bin]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * self.bins..(frame + 1) * self.bins]
    }
}
