//! RIFF/WAVE reading and writing for PCM16, PCM24 and IEEE float32.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::audio::AudioBuffer;

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;
const MAX_CHANNELS: u16 = 16;

/// Parse failures; every variant names the byte offset where it was detected.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WavError {
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },
    #[error("unsupported codec at byte {offset}: format tag {tag:#06x} with {bits} bits per sample")]
    UnsupportedCodec { offset: usize, tag: u16, bits: u16 },
    #[error("missing '{chunk}' chunk (scanned to byte {offset})")]
    MissingChunk { offset: usize, chunk: &'static str },
    #[error("truncated data at byte {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("unsupported channel count {channels} at byte {offset}")]
    ChannelCount { offset: usize, channels: u16 },
    #[error("cannot write: {0}")]
    Unwritable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavFormat {
    Pcm16,
    Pcm24,
    #[default]
    Float32,
}

impl WavFormat {
    fn bits(self) -> u16 {
        match self {
            WavFormat::Pcm16 => 16,
            WavFormat::Pcm24 => 24,
            WavFormat::Float32 => 32,
        }
    }

    fn tag(self) -> u16 {
        match self {
            WavFormat::Float32 => FORMAT_FLOAT,
            _ => FORMAT_PCM,
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
}

impl Reader<'_> {
    fn bytes(&self, offset: usize, len: usize) -> Result<&[u8], WavError> {
        self.data
            .get(offset..offset + len)
            .ok_or_else(|| WavError::Truncated {
                offset,
                needed: (offset + len).saturating_sub(self.data.len()),
            })
    }

    fn u16(&self, offset: usize) -> Result<u16, WavError> {
        let b = self.bytes(offset, 2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&self, offset: usize) -> Result<u32, WavError> {
        let b = self.bytes(offset, 4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn parse_fmt(r: &Reader, offset: usize, size: usize) -> Result<FmtChunk, WavError> {
    if size < 16 {
        return Err(WavError::MalformedHeader {
            offset,
            reason: format!("fmt chunk of {size} bytes, need at least 16"),
        });
    }
    let mut tag = r.u16(offset)?;
    let channels = r.u16(offset + 2)?;
    let sample_rate = r.u32(offset + 4)?;
    let bits = r.u16(offset + 14)?;
    if tag == FORMAT_EXTENSIBLE {
        if size < 40 {
            return Err(WavError::MalformedHeader {
                offset,
                reason: "extensible fmt chunk shorter than 40 bytes".into(),
            });
        }
        // first two bytes of the subformat GUID carry the actual format tag
        tag = r.u16(offset + 24)?;
    }
    if channels == 0 || channels > MAX_CHANNELS {
        return Err(WavError::ChannelCount {
            offset: offset + 2,
            channels,
        });
    }
    if sample_rate == 0 {
        return Err(WavError::MalformedHeader {
            offset: offset + 4,
            reason: "sample rate is zero".into(),
        });
    }
    let supported = matches!((tag, bits), (FORMAT_PCM, 16) | (FORMAT_PCM, 24) | (FORMAT_FLOAT, 32));
    if !supported {
        return Err(WavError::UnsupportedCodec { offset, tag, bits });
    }
    Ok(FmtChunk {
        tag,
        channels,
        sample_rate,
        bits,
    })
}

/// Decodes a complete WAV file held in memory.
pub fn decode_wav(data: &[u8]) -> Result<AudioBuffer, WavError> {
    let r = Reader { data };
    if r.bytes(0, 4)? != b"RIFF" {
        return Err(WavError::MalformedHeader {
            offset: 0,
            reason: "missing RIFF signature".into(),
        });
    }
    if r.bytes(8, 4)? != b"WAVE" {
        return Err(WavError::MalformedHeader {
            offset: 8,
            reason: "missing WAVE form type".into(),
        });
    }
    let mut offset = 12;
    let mut fmt = None;
    let mut samples = None;
    while offset + 8 <= data.len() {
        let id = r.bytes(offset, 4)?;
        let size = r.u32(offset + 4)? as usize;
        let body = offset + 8;
        match id {
            b"fmt " => fmt = Some(parse_fmt(&r, body, size)?),
            b"data" => {
                let f = fmt.ok_or(WavError::MissingChunk {
                    offset,
                    chunk: "fmt ",
                })?;
                r.bytes(body, size)?;
                samples = Some((f, body, size));
                break;
            }
            _ => {}
        }
        offset = body + size + (size & 1);
    }
    let (f, body, size) = samples.ok_or(WavError::MissingChunk {
        offset,
        chunk: "data",
    })?;
    let width = f.bits as usize / 8;
    let frame = width * f.channels as usize;
    if size % frame != 0 {
        return Err(WavError::Truncated {
            offset: body + size,
            needed: frame - size % frame,
        });
    }
    let frames = size / frame;
    let mut channels = vec![Vec::with_capacity(frames); f.channels as usize];
    for (i, chunk) in data[body..body + size].chunks_exact(width).enumerate() {
        let v = match (f.tag, f.bits) {
            (FORMAT_FLOAT, 32) => f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64,
            (_, 16) => i16::from_le_bytes([chunk[0], chunk[1]]) as f64 / 32768.0,
            _ => {
                let raw = i32::from_le_bytes([0, chunk[0], chunk[1], chunk[2]]) >> 8;
                raw as f64 / 8_388_608.0
            }
        };
        channels[i % f.channels as usize].push(v);
    }
    AudioBuffer::new(channels, f.sample_rate).map_err(|e| WavError::MalformedHeader {
        offset: body,
        reason: e.to_string(),
    })
}

/// Encodes `buf` as a canonical 44-byte-header WAV file.
pub fn encode_wav(buf: &AudioBuffer, format: WavFormat) -> Result<Vec<u8>, WavError> {
    let channels = buf.channel_count();
    if channels == 0 || channels > MAX_CHANNELS as usize {
        return Err(WavError::Unwritable(format!("{channels} channels")));
    }
    let width = format.bits() as usize / 8;
    let data_len = buf.len() * channels * width;
    if data_len + 36 > u32::MAX as usize {
        return Err(WavError::Unwritable("data exceeds 4 GiB".into()));
    }
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format.tag().to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&buf.sample_rate().to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate() * (channels * width) as u32).to_le_bytes());
    out.extend_from_slice(&((channels * width) as u16).to_le_bytes());
    out.extend_from_slice(&format.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for n in 0..buf.len() {
        for c in 0..channels {
            let v = buf.channel(c)[n];
            match format {
                WavFormat::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                WavFormat::Pcm16 => {
                    let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    out.extend_from_slice(&q.to_le_bytes());
                }
                WavFormat::Pcm24 => {
                    let q = (v * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                    out.extend_from_slice(&q.to_le_bytes()[..3]);
                }
            }
        }
    }
    Ok(out)
}

pub fn read_wav(path: impl AsRef<Path>) -> crate::Result<AudioBuffer> {
    let data = fs::read(path)?;
    Ok(decode_wav(&data)?)
}

pub fn write_wav(path: impl AsRef<Path>, buf: &AudioBuffer, format: WavFormat) -> crate::Result<()> {
    let bytes = encode_wav(buf, format)?;
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header_with(tag: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let width = bits / 8;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&tag.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * (channels * width) as u32).to_le_bytes());
        out.extend_from_slice(&(channels * width).to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn pcm16_full_scale() {
        let data = [0xFF, 0x7F, 0x00, 0x80];
        let buf = decode_wav(&header_with(1, 1, 48000, 16, &data)).unwrap();
        assert_eq!(buf.channel(0), &[32767.0 / 32768.0, -1.0]);
    }

    #[test]
    fn pcm24_scaling() {
        let data = [0xFF, 0xFF, 0x7F, 0x00, 0x00, 0x80, 0x01, 0x00, 0x00];
        let buf = decode_wav(&header_with(1, 1, 48000, 24, &data)).unwrap();
        assert_eq!(
            buf.channel(0),
            &[8_388_607.0 / 8_388_608.0, -1.0, 1.0 / 8_388_608.0]
        );
    }

    #[test]
    fn stereo_header_fields() {
        let buf = AudioBuffer::new(vec![vec![0.0; 10], vec![0.5; 10]], 44100).unwrap();
        let back = decode_wav(&encode_wav(&buf, WavFormat::Pcm16).unwrap()).unwrap();
        assert_eq!(back.channel_count(), 2);
        assert_eq!(back.sample_rate(), 44100);
        assert_eq!(back.channel(1), &[0.5; 10]);
    }

    #[test]
    fn skips_unknown_chunks_and_reads_extensible() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF\0\0\0\0WAVE");
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]);
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&40u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_EXTENSIBLE.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&48000u32.to_le_bytes());
        bytes.extend_from_slice(&192000u32.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&32u16.to_le_bytes());
        bytes.extend_from_slice(&22u16.to_le_bytes());
        bytes.extend_from_slice(&32u16.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_FLOAT.to_le_bytes());
        bytes.extend_from_slice(&[0; 14]);
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&0.25f32.to_le_bytes());
        assert_eq!(decode_wav(&bytes).unwrap().channel(0), &[0.25]);
    }

    #[test]
    fn distinct_errors_with_offsets() {
        assert_eq!(
            decode_wav(b"RIFX\0\0\0\0WAVE"),
            Err(WavError::MalformedHeader {
                offset: 0,
                reason: "missing RIFF signature".into()
            })
        );
        assert!(matches!(
            decode_wav(b"RIFF\0\0\0\0WAVX"),
            Err(WavError::MalformedHeader { offset: 8, .. })
        ));
        assert!(matches!(
            decode_wav(&header_with(2, 1, 48000, 16, &[0, 0])),
            Err(WavError::UnsupportedCodec { offset: 20, tag: 2, bits: 16 })
        ));
        assert!(matches!(
            decode_wav(&header_with(1, 1, 48000, 8, &[0, 0])),
            Err(WavError::UnsupportedCodec { bits: 8, .. })
        ));
        assert!(matches!(
            decode_wav(&header_with(1, 17, 48000, 16, &[0, 0])),
            Err(WavError::ChannelCount { offset: 22, channels: 17 })
        ));
        let mut truncated = header_with(1, 1, 48000, 16, &[0, 0, 0, 0]);
        truncated.truncate(truncated.len() - 1);
        assert!(matches!(
            decode_wav(&truncated),
            Err(WavError::Truncated { offset: 44, needed: 1 })
        ));
        let odd = header_with(1, 2, 48000, 16, &[0, 0, 0, 0, 0, 0]);
        assert!(matches!(decode_wav(&odd), Err(WavError::Truncated { offset: 50, needed: 2 })));
        let mut no_data = header_with(1, 1, 48000, 16, &[]);
        no_data.truncate(36);
        assert!(matches!(
            decode_wav(&no_data),
            Err(WavError::MissingChunk { chunk: "data", .. })
        ));
        assert!(matches!(decode_wav(b"RIF"), Err(WavError::Truncated { offset: 0, .. })));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let buf = AudioBuffer::new(vec![vec![0.125, -0.5], vec![1.0, 0.0]], 48000).unwrap();
        write_wav(&path, &buf, WavFormat::Float32).unwrap();
        assert_eq!(read_wav(&path).unwrap(), buf);
        assert!(read_wav(dir.path().join("missing.wav")).is_err());
    }

    proptest! {
        #[test]
        fn float32_roundtrip_is_bit_exact(
            samples in proptest::collection::vec(-1.0f32..1.0, 1..64),
            channels in 1usize..=16,
        ) {
            let data: Vec<Vec<f64>> = (0..channels)
                .map(|c| samples.iter().map(|&s| (s * (c as f32 + 1.0) / 16.0) as f64).collect())
                .collect();
            let buf = AudioBuffer::new(data, 48000).unwrap();
            let bytes = encode_wav(&buf, WavFormat::Float32).unwrap();
            let back = decode_wav(&bytes).unwrap();
            prop_assert_eq!(&back, &buf);
            prop_assert_eq!(encode_wav(&back, WavFormat::Float32).unwrap(), bytes);
        }
    }
}
