//! EMG smoothing.
//!
//! Raw electrode samples are converted to a rolling mean absolute value
//! (MAV). The window is zero-padded during warm-up: for the first `W - 1`
//! samples the missing history counts as zero, so the output ramps up to the
//! steady value over exactly `W` samples.

use std::path::Path;

use crate::io::{parse_f64, read_table};
use crate::{Error, Result};

/// Sample rate of the armband used for the devices.
pub const DEFAULT_SAMPLE_RATE: f64 = 200.0;
/// Rolling window length used by all controllers.
pub const DEFAULT_WINDOW: usize = 20;

/// Relative tolerance on the timestamp spacing of trace files.
const SPACING_TOLERANCE: f64 = 0.01;

/// Fixed-rate multi-channel EMG samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEmgTrace {
    sample_rate: f64,
    channels: Vec<Vec<f64>>,
    roles: Vec<String>,
}

impl RawEmgTrace {
    /// Builds a trace, checking that all channels have equal length.
    ///
    /// `roles` may be empty, in which case channels are labelled `ch0`,
    /// `ch1`, ...
    pub fn new(sample_rate: f64, channels: Vec<Vec<f64>>, roles: Vec<String>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidTrace(format!(
                "sample rate {sample_rate} must be positive"
            )));
        }
        if channels.is_empty() {
            return Err(Error::InvalidTrace("at least one channel required".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidTrace("channels differ in length".into()));
        }
        let roles = if roles.is_empty() {
            (0..channels.len()).map(|i| format!("ch{i}")).collect()
        } else if roles.len() == channels.len() {
            roles
        } else {
            return Err(Error::InvalidTrace(format!(
                "{} roles for {} channels",
                roles.len(),
                channels.len()
            )));
        };
        Ok(Self {
            sample_rate,
            channels,
            roles,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> Result<&[f64]> {
        self.channels
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::ChannelOutOfRange {
                index,
                channels: self.channels.len(),
            })
    }

    pub fn roles(&self) -> &[String] {
        &self.roles
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the channel labelled `role`, if any.
    pub fn role_index(&self, role: &str) -> Option<usize> {
        self.roles.iter().position(|r| r == role)
    }
}

/// Smoothed, non-negative activation signals `s(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedTrace {
    sample_rate: f64,
    channels: Vec<Vec<f64>>,
    window: usize,
}

impl SmoothedTrace {
    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> Result<&[f64]> {
        self.channels
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::ChannelOutOfRange {
                index,
                channels: self.channels.len(),
            })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn windowed_mean(samples: &[f64], window: usize, map: impl Fn(f64) -> f64) -> Vec<f64> {
    let width = window as f64;
    (0..samples.len())
        .map(|k| {
            let start = (k + 1).saturating_sub(window);
            samples[start..=k].iter().map(|&e| map(e)).sum::<f64>() / width
        })
        .collect()
}

fn check_inputs(trace: &RawEmgTrace, window: usize) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::EmptyInput("EMG trace has no samples"));
    }
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    Ok(())
}

/// Rolling mean absolute value over `window` samples on every channel.
///
/// `s(k) = (1/W) * sum_{j=k-W+1..=k} |e(j)|` with `e(j) = 0` before the
/// first sample.
pub fn rolling_mav(trace: &RawEmgTrace, window: usize) -> Result<SmoothedTrace> {
    check_inputs(trace, window)?;
    let channels = trace
        .channels
        .iter()
        .map(|c| windowed_mean(c, window, f64::abs))
        .collect();
    Ok(SmoothedTrace {
        sample_rate: trace.sample_rate,
        channels,
        window,
    })
}

/// Rolling signed mean without rectification, i.e. the window sum applied to
/// the raw samples. Output may be negative, so it is returned as plain
/// per-channel sequences rather than a [`SmoothedTrace`].
pub fn rolling_signed_mean(trace: &RawEmgTrace, window: usize) -> Result<Vec<Vec<f64>>> {
    check_inputs(trace, window)?;
    Ok(trace
        .channels
        .iter()
        .map(|c| windowed_mean(c, window, |e| e))
        .collect())
}

/// Element-wise `s_a(k) - s_b(k)`.
pub fn differential(s: &SmoothedTrace, ch_a: usize, ch_b: usize) -> Result<Vec<f64>> {
    let a = s.channel(ch_a)?;
    let b = s.channel(ch_b)?;
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// Reads a trace from a `t,ch0,ch1,...` file.
///
/// The sample rate is taken from the mean timestamp spacing; every individual
/// spacing must be within 1 % of it. Column names after `t` become the
/// channel roles. A single-row file is assumed to be at
/// [`DEFAULT_SAMPLE_RATE`].
pub fn read_trace(path: &Path) -> Result<RawEmgTrace> {
    let table = read_table(path, true)?;
    if table.header.first().map(String::as_str) != Some("t") || table.header.len() < 2 {
        return Err(Error::parse(path, 1, "header must be `t,<channel>,...`"));
    }
    let roles: Vec<String> = table.header[1..].to_vec();
    let mut times = Vec::with_capacity(table.rows.len());
    let mut channels = vec![Vec::with_capacity(table.rows.len()); roles.len()];
    for row in &table.rows {
        times.push((row.line, parse_f64(path, row.line, &row.fields[0])?));
        for (channel, field) in channels.iter_mut().zip(&row.fields[1..]) {
            channel.push(parse_f64(path, row.line, field)?);
        }
    }
    if times.is_empty() {
        return Err(Error::EmptyInput("EMG file has no samples"));
    }

    let sample_rate = if times.len() == 1 {
        DEFAULT_SAMPLE_RATE
    } else {
        let span = times[times.len() - 1].1 - times[0].1;
        let spacing = span / (times.len() - 1) as f64;
        for pair in times.windows(2) {
            let step = pair[1].1 - pair[0].1;
            if step <= 0.0 {
                return Err(Error::parse(
                    path,
                    pair[1].0,
                    "timestamps must be strictly increasing",
                ));
            }
            if ((step - spacing) / spacing).abs() > SPACING_TOLERANCE {
                return Err(Error::parse(
                    path,
                    pair[1].0,
                    format!("sample spacing {step} deviates from {spacing} by more than 1 %"),
                ));
            }
        }
        1.0 / spacing
    };
    RawEmgTrace::new(sample_rate, channels, roles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(channels: Vec<Vec<f64>>) -> RawEmgTrace {
        RawEmgTrace::new(DEFAULT_SAMPLE_RATE, channels, vec![]).unwrap()
    }

    #[test]
    fn constant_channel_reaches_level() {
        let s = rolling_mav(&trace(vec![vec![0.4; 60]]), 20).unwrap();
        for &v in &s.channels()[0][19..] {
            assert!((v - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn alternating_signs_rectify_to_one() {
        let raw: Vec<f64> = (0..80)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let s = rolling_mav(&trace(vec![raw]), 20).unwrap();
        for &v in &s.channels()[0][19..] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ramp_matches_direct_sum() {
        let raw: Vec<f64> = (1..=20).map(f64::from).collect();
        let s = rolling_mav(&trace(vec![raw]), 20).unwrap();
        // (1 + ... + 20) / 20
        assert_eq!(s.channels()[0][19], 210.0 / 20.0);
    }

    #[test]
    fn warm_up_is_zero_padded() {
        let s = rolling_mav(&trace(vec![vec![1.0; 5]]), 4).unwrap();
        assert_eq!(s.channels()[0], vec![0.25, 0.5, 0.75, 1.0, 1.0]);
    }

    #[test]
    fn signed_variant_cancels() {
        let raw: Vec<f64> = (0..40)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let s = rolling_signed_mean(&trace(vec![raw]), 20).unwrap();
        assert!(s[0][20..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn errors() {
        let empty = trace(vec![vec![]]);
        assert!(matches!(rolling_mav(&empty, 20), Err(Error::EmptyInput(_))));
        let t = trace(vec![vec![1.0]]);
        assert!(matches!(rolling_mav(&t, 0), Err(Error::InvalidWindow)));
        let s = rolling_mav(&t, 1).unwrap();
        assert!(matches!(
            differential(&s, 0, 1),
            Err(Error::ChannelOutOfRange {
                index: 1,
                channels: 1
            })
        ));
        assert!(RawEmgTrace::new(200.0, vec![vec![1.0], vec![]], vec![]).is_err());
        assert!(RawEmgTrace::new(0.0, vec![vec![1.0]], vec![]).is_err());
        assert!(RawEmgTrace::new(200.0, vec![], vec![]).is_err());
    }

    #[test]
    fn differential_of_constants() {
        let t = trace(vec![vec![0.8; 30], vec![0.3; 30]]);
        let s = rolling_mav(&t, 20).unwrap();
        let d = differential(&s, 0, 1).unwrap();
        assert!(d[19..].iter().all(|v| (v - 0.5).abs() < 1e-12));
        assert!(differential(&s, 0, 0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reads_trace_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emg.csv");
        std::fs::write(
            &path,
            "t,anterior,posterior\n0.000,0.1,-0.2\n0.005,0.3,0.4\n0.010,0.0,0.1\n",
        )
        .unwrap();
        let t = read_trace(&path).unwrap();
        assert!((t.sample_rate() - 200.0).abs() < 1e-9);
        assert_eq!(t.roles(), ["anterior", "posterior"]);
        assert_eq!(t.channels()[1], vec![-0.2, 0.4, 0.1]);
        assert_eq!(t.role_index("posterior"), Some(1));
    }

    #[test]
    fn trace_file_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emg.csv");

        std::fs::write(&path, "t,a\n0.0,1\n0.005,NaN\n").unwrap();
        match read_trace(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }

        std::fs::write(&path, "t,a\n0.0,1\n0.005,1\n0.0200,1\n").unwrap();
        assert!(matches!(
            read_trace(&path),
            Err(Error::Parse { line: 3, .. })
        ));

        std::fs::write(&path, "t,a\n0.0,1\n0.0,1\n").unwrap();
        assert!(matches!(read_trace(&path), Err(Error::Parse { .. })));

        std::fs::write(&path, "time,a\n0.0,1\n").unwrap();
        assert!(matches!(
            read_trace(&path),
            Err(Error::Parse { line: 1, .. })
        ));

        assert!(matches!(
            read_trace(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }
}
