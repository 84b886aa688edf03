//! VSIN v1: little-endian insole capture file.
//!
//! ```text
//! header (16 bytes)
//!   0  magic        b"VSIN"
//!   4  version      u16 = 1
//!   6  n_sensors    u8  = 5
//!   7  n_channels   u8  = 6
//!   8  sample_rate  f32 (Hz)
//!  12  n_frames     u32
//! frame (128 bytes) × n_frames
//!   0  t            u64 microseconds
//!   8  channels     30 × f32, sensor-major
//! ```

use super::FormatError;
use crate::{InsoleFrame, InsoleStream, N_AXES, N_CHANNELS, N_SENSORS};

pub const VSIN_MAGIC: [u8; 4] = *b"VSIN";
pub const VSIN_VERSION: u16 = 1;
pub const VSIN_HEADER_BYTES: usize = 16;
pub const VSIN_FRAME_BYTES: usize = 8 + 4 * N_CHANNELS;

fn le_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

fn le_f32(b: &[u8]) -> f32 {
    f32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

fn le_u64(b: &[u8]) -> u64 {
    let mut w = [0u8; 8];
    w.copy_from_slice(&b[..8]);
    u64::from_le_bytes(w)
}

pub fn read_insole(bytes: &[u8]) -> Result<InsoleStream, FormatError> {
    if bytes.len() < 4 || bytes[..4] != VSIN_MAGIC {
        return Err(FormatError::NotInsole);
    }
    if bytes.len() < VSIN_HEADER_BYTES {
        return Err(FormatError::TruncatedHeader);
    }
    let version = le_u16(&bytes[4..]);
    if version != VSIN_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let (sensors, channels) = (bytes[6], bytes[7]);
    if sensors as usize != N_SENSORS || channels as usize != N_AXES {
        return Err(FormatError::BadLayout { sensors, channels });
    }
    let rate = le_f32(&bytes[8..]);
    if !(rate.is_finite() && rate > 0.0) {
        return Err(FormatError::InvalidSampleRate(rate));
    }
    let n_frames = le_u32(&bytes[12..]);

    let payload = &bytes[VSIN_HEADER_BYTES..];
    let available = payload.len() / VSIN_FRAME_BYTES;
    if available < n_frames as usize {
        return Err(FormatError::Truncated {
            frame: available as u32,
        });
    }
    let used = n_frames as usize * VSIN_FRAME_BYTES;
    if payload.len() > used {
        return Err(FormatError::TrailingBytes {
            extra: payload.len() - used,
        });
    }

    let mut frames = Vec::with_capacity(n_frames as usize);
    let mut prev: Option<u64> = None;
    for (k, chunk) in payload.chunks_exact(VSIN_FRAME_BYTES).enumerate() {
        let t_us = le_u64(chunk);
        if prev.is_some_and(|p| t_us <= p) {
            return Err(FormatError::TimestampOrder { frame: k });
        }
        prev = Some(t_us);
        let mut channels = [0f32; N_CHANNELS];
        for (c, v) in channels.iter_mut().enumerate() {
            *v = le_f32(&chunk[8 + 4 * c..]);
        }
        frames.push(InsoleFrame { t_us, channels });
    }
    Ok(InsoleStream::new(rate, frames)?)
}

pub fn write_insole(stream: &InsoleStream) -> Result<Vec<u8>, FormatError> {
    let n = stream.len();
    let n_frames = u32::try_from(n).map_err(|_| FormatError::TooManyFrames(n))?;
    let mut out = Vec::with_capacity(VSIN_HEADER_BYTES + n * VSIN_FRAME_BYTES);
    out.extend_from_slice(&VSIN_MAGIC);
    out.extend_from_slice(&VSIN_VERSION.to_le_bytes());
    out.push(N_SENSORS as u8);
    out.push(N_AXES as u8);
    out.extend_from_slice(&stream.sample_rate().to_le_bytes());
    out.extend_from_slice(&n_frames.to_le_bytes());
    for frame in stream.frames() {
        out.extend_from_slice(&frame.t_us.to_le_bytes());
        for v in frame.channels {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(n: usize) -> InsoleStream {
        let frames = (0..n)
            .map(|k| {
                let mut channels = [0f32; N_CHANNELS];
                for (c, v) in channels.iter_mut().enumerate() {
                    *v = (k * 31 + c) as f32 * 0.25 - 7.0;
                }
                InsoleFrame {
                    t_us: 12_195 * k as u64,
                    channels,
                }
            })
            .collect();
        InsoleStream::new(82.0, frames).unwrap()
    }

    #[test]
    fn header_only_file_is_16_bytes() {
        let bytes = write_insole(&InsoleStream::new(82.0, vec![]).unwrap()).unwrap();
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[..4], b"VSIN");
        assert!(read_insole(&bytes).unwrap().is_empty());
    }

    #[test]
    fn single_zero_frame() {
        let frame = InsoleFrame {
            t_us: 0,
            channels: [0.0; N_CHANNELS],
        };
        let s = InsoleStream::new(82.0, vec![frame.clone()]).unwrap();
        let bytes = write_insole(&s).unwrap();
        assert_eq!(bytes.len(), 16 + 128);
        let back = read_insole(&bytes).unwrap();
        assert_eq!(back.sample_rate(), 82.0);
        assert_eq!(back.frames(), &[frame]);
    }

    #[test]
    fn truncation_names_missing_frame() {
        let mut bytes = write_insole(&stream(10)).unwrap();
        bytes.truncate(16 + 9 * 128);
        match read_insole(&bytes) {
            Err(e @ FormatError::Truncated { frame: 9 }) => {
                assert_eq!(e.to_string(), "truncated at frame 9")
            }
            other => panic!("{other:?}"),
        }
        // A partial trailing frame is still missing.
        let mut bytes = write_insole(&stream(10)).unwrap();
        bytes.truncate(16 + 9 * 128 + 100);
        assert!(matches!(
            read_insole(&bytes),
            Err(FormatError::Truncated { frame: 9 })
        ));
    }

    #[test]
    fn bad_magic_and_order() {
        assert_eq!(
            read_insole(b"RIFF0000000000000000").unwrap_err().to_string(),
            "not an insole file"
        );
        assert!(matches!(read_insole(b"VS"), Err(FormatError::NotInsole)));
        assert!(matches!(read_insole(b"VSIN\x01\x00"), Err(FormatError::TruncatedHeader)));

        let mut bytes = write_insole(&stream(4)).unwrap();
        // Make frame 2's timestamp equal to frame 1's.
        let t1 = bytes[16 + 128..16 + 136].to_vec();
        bytes[16 + 256..16 + 264].copy_from_slice(&t1);
        assert_eq!(
            read_insole(&bytes).unwrap_err().to_string(),
            "timestamp order violation at frame 2"
        );
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = write_insole(&stream(2)).unwrap();
        bytes.push(0);
        assert!(matches!(
            read_insole(&bytes),
            Err(FormatError::TrailingBytes { extra: 1 })
        ));
    }

    #[test]
    fn round_trip() {
        let s = stream(37);
        let bytes = write_insole(&s).unwrap();
        let back = read_insole(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(write_insole(&back).unwrap(), bytes);
    }
}
