//! STFT analysis, weighted overlap-add synthesis, and magnitude/phase
//! recombination.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{ComplexSpectrogram, DspError, MagnitudeSpectrogram, StftConfig, Waveform};

/// Analysis STFT. Frame `m` covers samples `[m*hop, m*hop + frame_len)`;
/// no padding, so the signal must hold at least one frame.
pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<ComplexSpectrogram, DspError> {
    cfg.validate()?;
    let n = cfg.frame_len;
    if w.samples.len() < n {
        return Err(DspError::TooShort {
            samples: w.samples.len(),
            frame_len: n,
        });
    }
    let frames = (w.samples.len() - n) / cfg.hop_len + 1;
    let bins = cfg.bins();
    let window = cfg.window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);

    let mut data = Vec::with_capacity(frames * bins);
    let mut buf = vec![Complex64::default(); n];
    for m in 0..frames {
        let start = m * cfg.hop_len;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(w.samples[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        data.extend_from_slice(&buf[..bins]);
    }
    Ok(ComplexSpectrogram {
        frames,
        bins,
        data,
        config: *cfg,
        sample_rate: w.sample_rate,
    })
}

/// Weighted overlap-add synthesis with the analysis window, normalized by
/// the window-square overlap sum. Interior samples of `istft(stft(x))`
/// reproduce `x` exactly up to rounding.
pub fn istft(s: &ComplexSpectrogram, cfg: &StftConfig) -> Result<Waveform, DspError> {
    cfg.validate()?;
    if *cfg != s.config {
        return Err(DspError::Shape(format!(
            "config mismatch: analysis {:?}, synthesis {:?}",
            s.config, cfg
        )));
    }
    if s.bins != cfg.bins() {
        return Err(DspError::Shape(format!(
            "expected {} bins, got {}",
            cfg.bins(),
            s.bins
        )));
    }
    let n = cfg.frame_len;
    let hop = cfg.hop_len;
    let window = cfg.window();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);

    let out_len = if s.frames == 0 {
        0
    } else {
        (s.frames - 1) * hop + n
    };
    let mut num = vec![0.0f64; out_len];
    let mut den = vec![0.0f64; out_len];
    let mut buf = vec![Complex64::default(); n];
    for m in 0..s.frames {
        // Rebuild the full conjugate-symmetric spectrum.
        for k in 0..s.bins {
            buf[k] = s.at(m, k);
        }
        for k in 1..n / 2 {
            buf[n - k] = s.at(m, k).conj();
        }
        ifft.process(&mut buf);
        let start = m * hop;
        for i in 0..n {
            let sample = buf[i].re / n as f64;
            num[start + i] += window[i] * sample;
            den[start + i] += window[i] * window[i];
        }
    }
    let samples = num
        .iter()
        .zip(&den)
        .map(|(&v, &d)| if d > 1e-12 { v / d } else { 0.0 })
        .collect();
    Ok(Waveform {
        samples,
        sample_rate: s.sample_rate,
    })
}

/// Combine an estimated magnitude with the phase of `noisy`, then synthesize.
pub fn reconstruct(
    est_mag: &MagnitudeSpectrogram,
    noisy: &ComplexSpectrogram,
    cfg: &StftConfig,
) -> Result<Waveform, DspError> {
    if est_mag.frames != noisy.frames || est_mag.bins != noisy.bins {
        return Err(DspError::Shape(format!(
            "magnitude {}x{} vs spectrogram {}x{}",
            est_mag.frames, est_mag.bins, noisy.frames, noisy.bins
        )));
    }
    let data = noisy
        .data
        .iter()
        .zip(&est_mag.data)
        .map(|(c, &m)| {
            let norm = c.norm();
            if norm > 0.0 {
                c / norm * m
            } else {
                Complex64::new(m, 0.0)
            }
        })
        .collect();
    let combined = ComplexSpectrogram {
        frames: noisy.frames,
        bins: noisy.bins,
        data,
        config: noisy.config,
        sample_rate: noisy.sample_rate,
    };
    istft(&combined, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> StftConfig {
        StftConfig::default()
    }

    fn wave(samples: Vec<f64>) -> Waveform {
        Waveform::new(samples, 16000)
    }

    #[test]
    fn constant_input_dc_bin_is_window_sum() {
        // Periodic Hann sums to N/2 = 256 over a frame.
        let w = wave(vec![1.0; 4096]);
        let s = stft(&w, &cfg()).unwrap();
        for m in 0..s.frames {
            assert!((s.at(m, 0).norm() - 256.0).abs() < 1e-9, "frame {m}");
        }
    }

    #[test]
    fn bin_aligned_cosine_peak_is_quarter_n() {
        // cos(2*pi*8*n/512): Hann-windowed, frame-aligned -> |X[m,8]| = N/4.
        let n = 4096;
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 8.0 * i as f64 / 512.0).cos())
            .collect();
        let s = stft(&wave(samples), &cfg()).unwrap();
        for m in 0..s.frames {
            assert!((s.at(m, 8).norm() - 128.0).abs() < 1e-9, "frame {m}");
        }
    }

    #[test]
    fn zero_input_zero_spectrogram() {
        let s = stft(&wave(vec![0.0; 1024]), &cfg()).unwrap();
        assert!(s.data.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn too_short_rejected() {
        let err = stft(&wave(vec![0.0; 100]), &cfg()).unwrap_err();
        assert!(matches!(err, DspError::TooShort { samples: 100, .. }));
    }

    fn rand_signal(n: usize, seed: u64) -> Vec<f64> {
        // Small deterministic LCG; keeps the DSP tests free of RNG deps.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn perfect_reconstruction_interior() {
        let x = rand_signal(8192, 7);
        let w = wave(x.clone());
        let s = stft(&w, &cfg()).unwrap();
        let y = istft(&s, &cfg()).unwrap();
        let n = cfg().frame_len;
        for i in n..x.len() - n {
            assert!(
                (x[i] - y.samples[i]).abs() < 1e-6,
                "sample {i}: {} vs {}",
                x[i],
                y.samples[i]
            );
        }
    }

    #[test]
    fn istft_linearity() {
        let x1 = rand_signal(4096, 1);
        let x2 = rand_signal(4096, 2);
        let s1 = stft(&wave(x1.clone()), &cfg()).unwrap();
        let s2 = stft(&wave(x2.clone()), &cfg()).unwrap();
        let sum = ComplexSpectrogram {
            frames: s1.frames,
            bins: s1.bins,
            data: s1.data.iter().zip(&s2.data).map(|(a, b)| a + b).collect(),
            config: s1.config,
            sample_rate: s1.sample_rate,
        };
        let y = istft(&sum, &cfg()).unwrap();
        let n = cfg().frame_len;
        for i in n..4096 - n {
            assert!((y.samples[i] - (x1[i] + x2[i])).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_spectrogram_zero_waveform() {
        let s = stft(&wave(vec![0.5; 2048]), &cfg()).unwrap();
        let zero = ComplexSpectrogram {
            data: vec![Complex64::default(); s.data.len()],
            ..s
        };
        let y = istft(&zero, &cfg()).unwrap();
        assert!(y.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parseval_per_frame() {
        // Sum over all fft_len bins of |X|^2 equals fft_len times the
        // windowed frame energy.
        let x = rand_signal(2048, 3);
        let c = cfg();
        let s = stft(&wave(x.clone()), &c).unwrap();
        let window = c.window();
        let n = c.frame_len;
        for m in 0..s.frames {
            let mut spec_energy = 0.0;
            for k in 0..s.bins {
                let e = s.at(m, k).norm_sqr();
                // One-sided: double everything except DC and Nyquist.
                if k == 0 || k == n / 2 {
                    spec_energy += e;
                } else {
                    spec_energy += 2.0 * e;
                }
            }
            let frame_energy: f64 = (0..n)
                .map(|i| {
                    let v = x[m * c.hop_len + i] * window[i];
                    v * v
                })
                .sum();
            let expected = frame_energy * n as f64;
            assert!(
                (spec_energy - expected).abs() <= 1e-4 * expected.abs().max(1e-12),
                "frame {m}: {spec_energy} vs {expected}"
            );
        }
    }

    #[test]
    fn reconstruct_identity_magnitude() {
        let x = rand_signal(4096, 9);
        let s = stft(&wave(x), &cfg()).unwrap();
        let direct = istft(&s, &cfg()).unwrap();
        let rec = reconstruct(&s.magnitude(), &s, &cfg()).unwrap();
        for (a, b) in direct.samples.iter().zip(&rec.samples) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn reconstruct_scales_linearly() {
        let x = rand_signal(4096, 11);
        let s = stft(&wave(x), &cfg()).unwrap();
        let mag = s.magnitude();
        let doubled = MagnitudeSpectrogram {
            frames: mag.frames,
            bins: mag.bins,
            data: mag.data.iter().map(|v| 2.0 * v).collect(),
        };
        let base = istft(&s, &cfg()).unwrap();
        let rec = reconstruct(&doubled, &s, &cfg()).unwrap();
        let n = cfg().frame_len;
        for i in n..4096 - n {
            assert!((rec.samples[i] - 2.0 * base.samples[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn reconstruct_zero_magnitude_is_silence() {
        let x = rand_signal(2048, 13);
        let s = stft(&wave(x), &cfg()).unwrap();
        let zeros = MagnitudeSpectrogram {
            frames: s.frames,
            bins: s.bins,
            data: vec![0.0; s.data.len()],
        };
        let rec = reconstruct(&zeros, &s, &cfg()).unwrap();
        assert!(rec.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let x = rand_signal(2048, 17);
        let s = stft(&wave(x), &cfg()).unwrap();
        let bad = MagnitudeSpectrogram {
            frames: s.frames + 1,
            bins: s.bins,
            data: vec![0.0; (s.frames + 1) * s.bins],
        };
        assert!(matches!(
            reconstruct(&bad, &s, &cfg()),
            Err(DspError::Shape(_))
        ));
    }
}
