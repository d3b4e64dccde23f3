//! Parameter track container and its binary layout (little-endian):
//!
//! ```text
//! magic "EGTK" | version u16 = 1 | sample_rate u32 | k u32 | order u16 |
//! hop_ms f32 | n_samples u32 | n_envelope u32 | n_voiced u32 | n_unvoiced u32 |
//! f64 payload:
//!   envelope params  [kind, frame_len_ms, pre_emphasis]
//!   envelope records n_envelope x [a_0..a_order, gain]
//!   voiced records   n_voiced x [gci_time, f0, gain, c_1..c_k]
//!   unvoiced segs    n_unvoiced x [start, end, n_gains, gain_1..gain_n]
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::envelope::{EnvelopeConfig, EnvelopeKind, EnvelopeRecord, EnvelopeTrack};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EGTK";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 4 + 2 + 4 + 4 * 4;

/// One pitch-synchronous excitation record.
#[derive(Debug, Clone, PartialEq)]
pub struct VoicedRecord {
    /// Closure instant in seconds.
    pub gci_time: f64,
    pub f0: f64,
    pub gain: f64,
    pub coefficients: Vec<f64>,
}

/// Unvoiced span `[start, end)` in samples with one noise gain per hop.
#[derive(Debug, Clone, PartialEq)]
pub struct UnvoicedSegment {
    pub start: usize,
    pub end: usize,
    pub gains: Vec<f64>,
}

impl UnvoicedSegment {
    pub fn gain_count(start: usize, end: usize, hop: usize) -> usize {
        (end - start).div_ceil(hop)
    }
}

/// Everything the synthesizer needs: envelope, voiced excitation records and
/// unvoiced noise gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterTrack {
    pub sample_rate: u32,
    pub n_samples: usize,
    /// Coefficients per voiced record.
    pub k: usize,
    pub envelope_config: EnvelopeConfig,
    pub envelope: EnvelopeTrack,
    pub voiced: Vec<VoicedRecord>,
    pub unvoiced: Vec<UnvoicedSegment>,
}

impl ParameterTrack {
    /// Hop of the envelope records and of the unvoiced gains, in samples.
    pub fn hop(&self) -> usize {
        self.envelope.hop
    }

    pub fn duration_secs(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Format(format!("invalid track: {msg}")));
        if self.sample_rate == 0 {
            return bad("zero sample rate".into());
        }
        let hop = self.hop();
        if hop == 0 || hop != self.envelope_config.hop_len(self.sample_rate) {
            return bad(format!("envelope hop {hop} disagrees with its config"));
        }
        let needed = EnvelopeTrack::records_for(self.n_samples, hop);
        if self.envelope.records.len() < needed {
            return bad(format!(
                "{} envelope records for {needed} hops",
                self.envelope.records.len()
            ));
        }
        if self
            .envelope
            .records
            .iter()
            .any(|r| r.coefficients.len() != self.envelope.order + 1)
        {
            return bad("envelope record length differs from order".into());
        }
        for (i, rec) in self.voiced.iter().enumerate() {
            if rec.coefficients.len() != self.k {
                return bad(format!(
                    "voiced record {i} has {} coefficients, k={}",
                    rec.coefficients.len(),
                    self.k
                ));
            }
            let finite = rec.gci_time.is_finite() && rec.coefficients.iter().all(|c| c.is_finite());
            if !finite || !(rec.f0 > 0.0) || !(rec.gain >= 0.0) {
                return bad(format!("voiced record {i} out of range"));
            }
        }
        if self.voiced.windows(2).any(|w| w[1].gci_time <= w[0].gci_time) {
            return bad("gci times are not strictly increasing".into());
        }
        let mut last_end = 0;
        for seg in &self.unvoiced {
            if seg.start < last_end || seg.end <= seg.start || seg.end > self.n_samples {
                return bad(format!("unvoiced segment [{}, {}) misplaced", seg.start, seg.end));
            }
            if seg.gains.len() != UnvoicedSegment::gain_count(seg.start, seg.end, hop) {
                return bad(format!(
                    "unvoiced segment [{}, {}) has {} gains",
                    seg.start,
                    seg.end,
                    seg.gains.len()
                ));
            }
            if seg.gains.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
                return bad("negative or non-finite unvoiced gain".into());
            }
            last_end = seg.end;
        }
        Ok(())
    }

    /// Serializes to the track binary format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        out.extend_from_slice(&(self.envelope.order as u16).to_le_bytes());
        out.extend_from_slice(&(self.envelope_config.hop_ms as f32).to_le_bytes());
        for count in [
            self.n_samples,
            self.envelope.records.len(),
            self.voiced.len(),
            self.unvoiced.len(),
        ] {
            out.extend_from_slice(&(count as u32).to_le_bytes());
        }
        let mut put = |v: f64| out.extend_from_slice(&v.to_le_bytes());
        put(self.envelope_config.kind.code() as f64);
        put(self.envelope_config.frame_len_ms);
        put(self.envelope_config.pre_emphasis);
        for rec in &self.envelope.records {
            rec.coefficients.iter().for_each(|&c| put(c));
            put(rec.gain);
        }
        for rec in &self.voiced {
            put(rec.gci_time);
            put(rec.f0);
            put(rec.gain);
            rec.coefficients.iter().for_each(|&c| put(c));
        }
        for seg in &self.unvoiced {
            put(seg.start as f64);
            put(seg.end as f64);
            put(seg.gains.len() as f64);
            seg.gains.iter().for_each(|&g| put(g));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::Format("not a parameter track file".into()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("truncated parameter track header".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported parameter track version {version} (supported: {VERSION})"
            )));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let sample_rate = u32_at(6) as u32;
        let k = u32_at(10);
        let order = u16::from_le_bytes([bytes[14], bytes[15]]) as usize;
        let hop_ms = f32::from_le_bytes(bytes[16..20].try_into().unwrap()) as f64;
        let n_samples = u32_at(20);
        let n_env = u32_at(24);
        let n_voiced = u32_at(28);
        let n_unvoiced = u32_at(32);

        let payload = &bytes[HEADER_LEN..];
        if payload.len() % 8 != 0 {
            return Err(Error::Format("truncated parameter track payload".into()));
        }
        let mut values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = values.by_ref().take(n).collect();
            if v.len() != n {
                return Err(Error::Format("truncated parameter track payload".into()));
            }
            if v.iter().any(|x| x.is_nan()) {
                return Err(Error::Format("NaN in parameter track payload".into()));
            }
            Ok(v)
        };

        let params = take(3)?;
        let kind = EnvelopeKind::from_code(params[0] as u8)
            .filter(|_| params[0].fract() == 0.0)
            .ok_or_else(|| Error::Format(format!("unknown envelope kind {}", params[0])))?;
        let envelope_config = EnvelopeConfig {
            order,
            frame_len_ms: params[1],
            hop_ms,
            pre_emphasis: params[2],
            kind,
        };
        let records = (0..n_env)
            .map(|_| {
                let mut v = take(order + 2)?;
                let gain = v.pop().unwrap();
                Ok(EnvelopeRecord { coefficients: v, gain })
            })
            .collect::<Result<Vec<_>>>()?;
        let voiced = (0..n_voiced)
            .map(|_| {
                let v = take(3 + k)?;
                Ok(VoicedRecord {
                    gci_time: v[0],
                    f0: v[1],
                    gain: v[2],
                    coefficients: v[3..].to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let unvoiced = (0..n_unvoiced)
            .map(|_| {
                let head = take(3)?;
                let count = as_index(head[2])?;
                Ok(UnvoicedSegment {
                    start: as_index(head[0])?,
                    end: as_index(head[1])?,
                    gains: take(count)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if take(1).is_ok() {
            return Err(Error::Format("trailing bytes after parameter track payload".into()));
        }

        let track = ParameterTrack {
            sample_rate,
            n_samples,
            k,
            envelope: EnvelopeTrack {
                hop: envelope_config.hop_len(sample_rate),
                order,
                records,
            },
            envelope_config,
            voiced,
            unvoiced,
        };
        track.validate()?;
        Ok(track)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// One row per voiced record: `time,f0,gain,c1,...,ck`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let mut header = String::from("time,f0,gain");
        for i in 1..=self.k {
            header.push_str(&format!(",c{i}"));
        }
        writeln!(out, "{header}")?;
        for rec in &self.voiced {
            write!(out, "{:.6},{:.4},{:.9e}", rec.gci_time, rec.f0, rec.gain)?;
            for c in &rec.coefficients {
                write!(out, ",{c:.9e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn as_index(v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::Format(format!("bad index {v} in parameter track")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_track() -> ParameterTrack {
        let cfg = EnvelopeConfig {
            order: 2,
            ..Default::default()
        };
        let n = 1000;
        let mut envelope = EnvelopeTrack::constant(n, 80, vec![1.0, -0.5, 0.1]);
        envelope.records[3].gain = 0.25;
        ParameterTrack {
            sample_rate: 16000,
            n_samples: n,
            k: 2,
            envelope_config: cfg,
            envelope,
            voiced: vec![
                VoicedRecord {
                    gci_time: 0.01,
                    f0: 100.0,
                    gain: 0.5,
                    coefficients: vec![0.1, -0.2],
                },
                VoicedRecord {
                    gci_time: 0.02,
                    f0: 101.5,
                    gain: 0.4,
                    coefficients: vec![0.3, 1e-9],
                },
            ],
            unvoiced: vec![UnvoicedSegment {
                start: 500,
                end: 1000,
                gains: vec![0.01; 7],
            }],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let t = sample_track();
        t.validate().unwrap();
        let bytes = t.to_bytes();
        let back = ParameterTrack::from_bytes(&bytes).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn rejects_corruption() {
        let good = sample_track().to_bytes();
        let mut bytes = good.clone();
        bytes[1] = b'X';
        assert_eq!(
            ParameterTrack::from_bytes(&bytes).unwrap_err().to_string(),
            "not a parameter track file"
        );
        let mut bytes = good.clone();
        bytes[4] = 9;
        assert!(ParameterTrack::from_bytes(&bytes)
            .unwrap_err()
            .to_string()
            .contains("unsupported"));
        assert!(ParameterTrack::from_bytes(&good[..good.len() - 8]).is_err());
        let mut longer = good.clone();
        longer.extend_from_slice(&0f64.to_le_bytes());
        assert!(ParameterTrack::from_bytes(&longer).is_err());
    }

    #[test]
    fn validation_catches_bad_tracks() {
        let mut t = sample_track();
        t.voiced[1].gci_time = 0.01;
        assert!(t.validate().is_err());
        let mut t = sample_track();
        t.voiced[0].coefficients.push(0.0);
        assert!(t.validate().is_err());
        let mut t = sample_track();
        t.unvoiced[0].gains.pop();
        assert!(t.validate().is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        sample_track().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,f0,gain,c1,c2");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.010000,100.0000,"));
    }
}
