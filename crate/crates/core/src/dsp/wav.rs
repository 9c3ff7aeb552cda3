//! RIFF/WAVE 16-bit PCM mono reader and writer.
//!
//! Samples are scaled by 1/32768 on read; on write they are clamped to
//! [-1, 1 - 1/32768] and rounded to the nearest integer, so write -> read
//! round-trips the stored integers exactly.

use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use super::{DspError, Waveform};

const SCALE: f64 = 32768.0;

fn io_err(path: &Path, source: std::io::Error) -> DspError {
    DspError::Io {
        path: path.display().to_string(),
        source,
    }
}

struct FmtChunk {
    sample_rate: u32,
}

fn parse_fmt(chunk: &[u8]) -> Result<FmtChunk, DspError> {
    if chunk.len() < 16 {
        return Err(DspError::Format(format!("fmt chunk too short: {} bytes", chunk.len())));
    }
    let audio_format = u16::from_le_bytes([chunk[0], chunk[1]]);
    if audio_format != 1 {
        return Err(DspError::Format(format!("audio_format={audio_format} (need PCM=1)")));
    }
    let channels = u16::from_le_bytes([chunk[2], chunk[3]]);
    if channels != 1 {
        return Err(DspError::Format(format!("channels={channels}")));
    }
    let sample_rate = u32::from_le_bytes([chunk[4], chunk[5], chunk[6], chunk[7]]);
    if sample_rate == 0 {
        return Err(DspError::Format("sample_rate=0".into()));
    }
    let bits = u16::from_le_bytes([chunk[14], chunk[15]]);
    if bits != 16 {
        return Err(DspError::Format(format!("bits_per_sample={bits}")));
    }
    Ok(FmtChunk { sample_rate })
}

/// Read a 16-bit PCM mono WAV file.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform, DspError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(DspError::Format("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut off = 12usize;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32::from_le_bytes([bytes[off + 4], bytes[off + 5], bytes[off + 6], bytes[off + 7]])
            as usize;
        let body_start = off + 8;
        if body_start + size > bytes.len() {
            return Err(DspError::Format(format!(
                "truncated chunk {:?}: declared {} bytes, {} available",
                String::from_utf8_lossy(id),
                size,
                bytes.len() - body_start
            )));
        }
        match id {
            b"fmt " => fmt = Some(parse_fmt(&bytes[body_start..body_start + size])?),
            b"data" => data = Some(&bytes[body_start..body_start + size]),
            _ => {}
        }
        // Chunks are word-aligned.
        off = body_start + size + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| DspError::Format("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| DspError::Format("missing data chunk".into()))?;
    if data.len() % 2 != 0 {
        return Err(DspError::Format(format!("odd data chunk length {}", data.len())));
    }
    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / SCALE)
        .collect();
    Ok(Waveform {
        samples,
        sample_rate: fmt.sample_rate,
    })
}

/// Write a 16-bit PCM mono WAV file.
pub fn write_wav(w: &Waveform, path: impl AsRef<Path>) -> Result<(), DspError> {
    let path = path.as_ref();
    if let Some(idx) = w.samples.iter().position(|v| !v.is_finite()) {
        return Err(DspError::NonFinite(idx));
    }
    let data_len = (w.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&w.sample_rate.to_le_bytes());
    out.extend_from_slice(&(w.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &v in &w.samples {
        let clamped = v.clamp(-1.0, (SCALE - 1.0) / SCALE);
        let q = (clamped * SCALE).round() as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    std::fs::write(path, &out).map_err(|e| io_err(path, e))
}

/// Duration in seconds from the WAV header alone (no sample decode).
pub fn wav_duration_secs(path: impl AsRef<Path>) -> Result<f64, DspError> {
    let path = path.as_ref();
    let mut f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut hdr = [0u8; 12];
    f.read_exact(&mut hdr).map_err(|e| io_err(path, e))?;
    if &hdr[0..4] != b"RIFF" || &hdr[8..12] != b"WAVE" {
        return Err(DspError::Format("missing RIFF/WAVE header".into()));
    }
    let mut sample_rate: Option<u32> = None;
    let mut data_bytes: Option<u64> = None;
    loop {
        let mut chdr = [0u8; 8];
        match f.read_exact(&mut chdr) {
            Ok(()) => {}
            Err(_) => break,
        }
        let size = u32::from_le_bytes([chdr[4], chdr[5], chdr[6], chdr[7]]) as u64;
        if &chdr[0..4] == b"fmt " {
            let mut body = vec![0u8; size as usize];
            f.read_exact(&mut body).map_err(|e| io_err(path, e))?;
            sample_rate = Some(parse_fmt(&body)?.sample_rate);
        } else {
            if &chdr[0..4] == b"data" {
                data_bytes = Some(size);
            }
            f.seek(SeekFrom::Current((size + (size & 1)) as i64))
                .map_err(|e| io_err(path, e))?;
        }
        if sample_rate.is_some() && data_bytes.is_some() {
            break;
        }
    }
    let rate = sample_rate.ok_or_else(|| DspError::Format("missing fmt chunk".into()))?;
    let data = data_bytes.ok_or_else(|| DspError::Format("missing data chunk".into()))?;
    Ok((data / 2) as f64 / rate as f64)
}
