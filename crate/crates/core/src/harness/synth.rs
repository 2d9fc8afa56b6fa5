use crate::signal::RawEmgTrace;
use crate::{Error, Result};

/// Constant activation `level` on one channel over `[start, end)` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub channel: usize,
    pub level: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64, channel: usize, level: f64) -> Self {
        Self {
            start,
            end,
            channel,
            level,
        }
    }
}

// Sample index of time `t`, tolerant to round-off in `t * rate`.
fn sample_index(t: f64, rate: f64) -> usize {
    (t * rate - 1e-9).ceil().max(0.0) as usize
}

/// Piecewise-constant EMG trace. Sample `k` sits at `k / sample_rate`
/// and takes the level of the segment covering it, zero elsewhere.
///
/// The trace has at least two channels (the two electrodes) and more if a
/// segment addresses a higher channel.
pub fn synth_emg(profile: &[Segment], sample_rate: f64, duration: f64) -> Result<RawEmgTrace> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::InvalidProfile(format!("sample rate {sample_rate}")));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidProfile(format!("duration {duration}")));
    }
    for s in profile {
        if !(s.level >= 0.0 && s.level.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "level {} must be non-negative",
                s.level
            )));
        }
        if !(s.start >= 0.0 && s.start <= s.end && s.end <= duration) {
            return Err(Error::InvalidProfile(format!(
                "segment [{}, {}) outside [0, {duration}]",
                s.start, s.end
            )));
        }
    }
    for (i, a) in profile.iter().enumerate() {
        for b in &profile[i + 1..] {
            if a.channel == b.channel && a.start < b.end && b.start < a.end {
                return Err(Error::OverlapError { channel: a.channel });
            }
        }
    }

    let len = (duration * sample_rate).round() as usize;
    let channels = profile
        .iter()
        .map(|s| s.channel + 1)
        .max()
        .unwrap_or(0)
        .max(2);
    let mut data = vec![vec![0.0; len]; channels];
    for s in profile {
        let from = sample_index(s.start, sample_rate).min(len);
        let to = sample_index(s.end, sample_rate).min(len);
        data[s.channel][from..to].fill(s.level);
    }
    RawEmgTrace::new(sample_rate, data, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_profile_is_silent() {
        let t = synth_emg(&[], 200.0, 1.5).unwrap();
        assert_eq!(t.len(), 300);
        assert_eq!(t.channel_count(), 2);
        assert!(t.channels().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn one_second_segment() {
        let t = synth_emg(&[Segment::new(0.0, 1.0, 0, 0.5)], 200.0, 2.0).unwrap();
        let ch = &t.channels()[0];
        assert!(ch[..200].iter().all(|&v| v == 0.5));
        assert!(ch[200..].iter().all(|&v| v == 0.0));
        assert!(t.channels()[1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn abutting_segments_do_not_overlap() {
        let profile = [
            Segment::new(0.0, 0.5, 1, 0.3),
            Segment::new(0.5, 1.0, 1, 0.6),
        ];
        let t = synth_emg(&profile, 200.0, 1.0).unwrap();
        assert_eq!(t.channels()[1][99], 0.3);
        assert_eq!(t.channels()[1][100], 0.6);
    }

    #[test]
    fn rejects_bad_profiles() {
        let overlap = [
            Segment::new(0.0, 0.6, 0, 0.3),
            Segment::new(0.5, 1.0, 0, 0.6),
        ];
        assert!(matches!(
            synth_emg(&overlap, 200.0, 1.0),
            Err(Error::OverlapError { channel: 0 })
        ));
        assert!(synth_emg(&[Segment::new(0.0, 2.0, 0, 0.3)], 200.0, 1.0).is_err());
        assert!(synth_emg(&[Segment::new(0.0, 1.0, 0, -0.3)], 200.0, 1.0).is_err());
        assert!(synth_emg(&[], 0.0, 1.0).is_err());
    }

    #[test]
    fn extra_channels() {
        let t = synth_emg(&[Segment::new(0.0, 0.1, 3, 1.0)], 100.0, 0.2).unwrap();
        assert_eq!(t.channel_count(), 4);
    }
}
