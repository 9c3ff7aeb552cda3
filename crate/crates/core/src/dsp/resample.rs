//! 48 kHz -> 16 kHz decimator: linear-phase windowed-sinc FIR (Kaiser,
//! beta = 8.6, 241 taps, 7.2 kHz cutoff) followed by taking every 3rd
//! sample, with the group delay compensated.

use super::{DspError, Waveform};

pub(crate) const FIR_TAPS: usize = 241;
pub(crate) const KAISER_BETA: f64 = 8.6;
pub(crate) const CUTOFF_HZ: f64 = 7200.0;
const IN_RATE: u32 = 48000;
const OUT_RATE: u32 = 16000;
const DECIM: usize = 3;

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-16 {
            return sum;
        }
        k += 1.0;
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Low-pass prototype, normalized to exactly unit DC gain.
pub(crate) fn design_fir() -> Vec<f64> {
    let m = (FIR_TAPS - 1) as f64;
    let fc = CUTOFF_HZ / IN_RATE as f64; // cycles per input sample
    let denom = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..FIR_TAPS)
        .map(|n| {
            let t = n as f64 - m / 2.0;
            let r = 2.0 * n as f64 / m - 1.0;
            let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / denom;
            2.0 * fc * sinc(2.0 * fc * t) * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    for v in &mut h {
        *v /= sum;
    }
    h
}

/// Decimate a 48 kHz waveform to 16 kHz. Output length is `ceil(len / 3)`.
pub fn resample_to_16k(w: &Waveform) -> Result<Waveform, DspError> {
    if w.sample_rate != IN_RATE {
        return Err(DspError::UnsupportedRate {
            got: w.sample_rate,
            expected: IN_RATE,
        });
    }
    let h = design_fir();
    let half = (FIR_TAPS - 1) / 2;
    let n = w.samples.len();
    let out_len = n.div_ceil(DECIM);
    let x = &w.samples;
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let center = m * DECIM;
        let mut acc = 0.0;
        // y[m] = sum_k h[k] * x[center + half - k], zero outside the signal.
        let lo = center + half;
        for (k, &hk) in h.iter().enumerate() {
            if lo >= k {
                let idx = lo - k;
                if idx < n {
                    acc += hk * x[idx];
                }
            }
        }
        out.push(acc);
    }
    Ok(Waveform {
        samples: out,
        sample_rate: OUT_RATE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, rate: u32, secs: f64) -> Waveform {
        let n = (rate as f64 * secs) as usize;
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        Waveform::new(samples, rate)
    }

    fn interior_rms(samples: &[f64], trim: usize) -> f64 {
        let inner = &samples[trim..samples.len() - trim];
        (inner.iter().map(|v| v * v).sum::<f64>() / inner.len() as f64).sqrt()
    }

    #[test]
    fn rejects_other_rates() {
        let w = Waveform::new(vec![0.0; 100], 44100);
        assert!(matches!(
            resample_to_16k(&w),
            Err(DspError::UnsupportedRate { got: 44100, .. })
        ));
    }

    #[test]
    fn output_length_is_ceil_third() {
        for n in [9usize, 10, 11, 12] {
            let w = Waveform::new(vec![0.0; n], 48000);
            assert_eq!(resample_to_16k(&w).unwrap().len(), n.div_ceil(3));
        }
    }

    #[test]
    fn unity_dc_gain() {
        let w = Waveform::new(vec![1.0; 48000], 48000);
        let y = resample_to_16k(&w).unwrap();
        // Interior samples, away from the filter edges.
        for &v in &y.samples[100..y.len() - 100] {
            assert!((v - 1.0).abs() < 1e-3, "DC sample {v}");
        }
    }

    #[test]
    fn passband_sine_rms_preserved() {
        let w = sine(1000.0, 48000, 1.0);
        let y = resample_to_16k(&w).unwrap();
        assert_eq!(y.sample_rate, 16000);
        let rms = interior_rms(&y.samples, 200);
        let target = 1.0 / 2.0_f64.sqrt();
        assert!(
            (rms - target).abs() / target < 0.01,
            "rms {rms} vs {target}"
        );
    }

    #[test]
    fn stopband_sine_attenuated_60db() {
        let w = sine(23000.0, 48000, 1.0);
        let y = resample_to_16k(&w).unwrap();
        let rms = interior_rms(&y.samples, 200);
        let limit = 10f64.powf(-60.0 / 20.0) / 2.0_f64.sqrt();
        assert!(rms <= limit, "rms {rms} vs limit {limit}");
    }

    #[test]
    fn frequency_response_meets_spec() {
        // Direct DTFT of the designed filter: DC gain within 1e-3 of unity,
        // at least 60 dB attenuation for every frequency of 8 kHz and above.
        let h = design_fir();
        let response = |f_hz: f64| -> f64 {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &hn) in h.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * f_hz * n as f64 / 48000.0;
                re += hn * phase.cos();
                im += hn * phase.sin();
            }
            (re * re + im * im).sqrt()
        };
        assert!((response(0.0) - 1.0).abs() < 1e-3);
        for f in [8000.0, 9000.0, 12000.0, 16000.0, 20000.0, 23999.0] {
            let mag = response(f);
            assert!(
                mag <= 10f64.powf(-60.0 / 20.0),
                "|H({f})| = {mag} exceeds -60 dB"
            );
        }
    }
}
