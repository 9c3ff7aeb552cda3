//! Log-power-spectrum forward and inverse transforms.

use super::{DspError, LpsSpectrogram, MagnitudeSpectrogram};

/// Floor inside the log; bounds the LPS of silent bins at `ln(1e-10)`.
pub const LPS_EPS_FLOOR: f64 = 1e-10;

/// `ln(max(mag^2, LPS_EPS_FLOOR))` per cell.
pub fn lps_from_magnitude(mag: &MagnitudeSpectrogram) -> Result<LpsSpectrogram, DspError> {
    let mut data = Vec::with_capacity(mag.data.len());
    for (idx, &m) in mag.data.iter().enumerate() {
        if m < 0.0 {
            return Err(DspError::NegativeMagnitude {
                frame: idx / mag.bins,
                bin: idx % mag.bins,
                value: m,
            });
        }
        data.push((m * m).max(LPS_EPS_FLOOR).ln());
    }
    Ok(LpsSpectrogram {
        frames: mag.frames,
        bins: mag.bins,
        data,
    })
}

/// Inverse transform: `sqrt(exp(lps))` per cell.
pub fn magnitude_from_lps(lps: &LpsSpectrogram) -> MagnitudeSpectrogram {
    MagnitudeSpectrogram {
        frames: lps.frames,
        bins: lps.bins,
        data: lps.data.iter().map(|&v| (0.5 * v).exp()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mag(values: Vec<f64>) -> MagnitudeSpectrogram {
        MagnitudeSpectrogram {
            frames: 1,
            bins: values.len(),
            data: values,
        }
    }

    #[test]
    fn reference_values() {
        let lps = lps_from_magnitude(&mag(vec![1.0, 2.0, 0.0])).unwrap();
        assert!((lps.data[0] - 0.0).abs() < 1e-12);
        assert!((lps.data[1] - 4.0f64.ln()).abs() < 1e-7); // ln 4 = 1.3862944
        assert!((lps.data[2] - (-23.0258509)).abs() < 1e-6);
    }

    #[test]
    fn negative_magnitude_rejected() {
        let err = lps_from_magnitude(&mag(vec![0.5, -0.1])).unwrap_err();
        assert!(matches!(
            err,
            DspError::NegativeMagnitude { frame: 0, bin: 1, .. }
        ));
    }

    #[test]
    fn inverse_pair() {
        let m = magnitude_from_lps(&LpsSpectrogram {
            frames: 1,
            bins: 2,
            data: vec![0.0, 1.3862944],
        });
        assert!((m.data[0] - 1.0).abs() < 1e-9);
        assert!((m.data[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn mutual_inverse_above_floor() {
        let values: Vec<f64> = (0..50).map(|i| 1e-5 * 1.5f64.powi(i % 30) + 1e-5).collect();
        let lps = lps_from_magnitude(&mag(values.clone())).unwrap();
        let back = magnitude_from_lps(&lps);
        for (a, b) in values.iter().zip(&back.data) {
            assert!((a - b).abs() / a < 1e-6, "{a} vs {b}");
        }
    }
}
