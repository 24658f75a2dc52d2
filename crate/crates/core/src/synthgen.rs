//! Deterministic generator of synthetic traces with known ground truth.
//!
//! Openness sits at `open_level` everywhere except piecewise-linear dips
//! (descend, hold at the dip minimum for at least one frame, ascend) at
//! sampled non-overlapping intervals. EAR co-dips with openness by a fixed
//! fraction. The matching annotations label a dip complete exactly when
//! its minimum falls below 0.25, mirroring the detector's classification
//! rule, so a noise-free run recovers the ground truth exactly.
//!
//! Everything is a pure function of the spec, including its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    AnnotatedBlink, AnnotationSet, Completeness, FrameSample, SignalTrace, EAR_RANGE,
    OPENNESS_RANGE,
};

/// Parameters of a synthetic trace. Loadable from JSON; fields with
/// defaults may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_frames: u64,
    pub blink_count: u64,
    /// `[low, high]` range the dip minimum of openness is sampled from;
    /// must stay below 0.75 so every blink is detectable.
    pub blink_depth_range: (f64, f64),
    /// `[min, max]` blink duration in frames.
    pub blink_duration_range: (u64, u64),
    /// Minimum open frames between consecutive blinks (at least 2, so
    /// fusion never merges two distinct blinks).
    pub min_gap_frames: u64,
    #[serde(default = "default_open_level")]
    pub open_level: f64,
    #[serde(default = "default_ear_open_level")]
    pub ear_open_level: f64,
    /// Fraction of the relative openness dip mirrored into the EAR channel.
    #[serde(default = "default_ear_dip_fraction")]
    pub ear_dip_fraction: f64,
    /// Standard deviation of Gaussian noise added per eye to openness.
    #[serde(default)]
    pub noise_sigma_openness: f64,
    /// Standard deviation of Gaussian noise added per eye to EAR.
    #[serde(default)]
    pub noise_sigma_ear: f64,
    pub seed: u64,
}

fn default_open_level() -> f64 {
    0.995
}

fn default_ear_open_level() -> f64 {
    0.33
}

fn default_ear_dip_fraction() -> f64 {
    0.6
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("synthetic spec is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(
        "{blink_count} blink(s) need {required} frames (durations, gaps, margins), trace has {available}"
    )]
    Capacity {
        blink_count: u64,
        required: u64,
        available: u64,
    },
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.n_frames == 0 {
            return err("n_frames must be positive".into());
        }
        let (depth_low, depth_high) = self.blink_depth_range;
        if !(depth_low.is_finite() && depth_high.is_finite())
            || !(0.0 <= depth_low && depth_low <= depth_high && depth_high < 0.75)
        {
            return err(format!(
                "blink_depth_range must satisfy 0 <= low <= high < 0.75 (got [{depth_low}, {depth_high}])"
            ));
        }
        let (dur_min, dur_max) = self.blink_duration_range;
        if dur_min == 0 || dur_min > dur_max {
            return err(format!(
                "blink_duration_range must satisfy 1 <= min <= max (got [{dur_min}, {dur_max}])"
            ));
        }
        if self.min_gap_frames < 2 {
            return err(format!(
                "min_gap_frames must be at least 2 (got {})",
                self.min_gap_frames
            ));
        }
        if !(self.open_level > 0.0 && self.open_level <= 1.0) {
            return err(format!(
                "open_level must lie in (0, 1] (got {})",
                self.open_level
            ));
        }
        if !(self.ear_open_level > 0.0 && self.ear_open_level <= EAR_RANGE.1) {
            return err(format!(
                "ear_open_level must lie in (0, {}] (got {})",
                EAR_RANGE.1, self.ear_open_level
            ));
        }
        if !(0.0..=1.0).contains(&self.ear_dip_fraction) {
            return err(format!(
                "ear_dip_fraction must lie in [0, 1] (got {})",
                self.ear_dip_fraction
            ));
        }
        for (name, sigma) in [
            ("noise_sigma_openness", self.noise_sigma_openness),
            ("noise_sigma_ear", self.noise_sigma_ear),
        ] {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return err(format!("{name} must be a finite value >= 0 (got {sigma})"));
            }
        }
        Ok(())
    }

    /// Parses a JSON document and validates it.
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let spec: SyntheticSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Generates a trace and its ground-truth annotations.
pub fn generate(spec: &SyntheticSpec) -> Result<(SignalTrace, AnnotationSet), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let count = spec.blink_count as usize;
    let (dur_min, dur_max) = spec.blink_duration_range;
    let (depth_low, depth_high) = spec.blink_depth_range;
    let mut durations = Vec::with_capacity(count);
    let mut depths = Vec::with_capacity(count);
    for _ in 0..count {
        durations.push(rng.random_range(dur_min..=dur_max));
        depths.push(rng.random_range(depth_low..=depth_high));
    }

    // Pack the blinks: one open frame at each edge, min_gap_frames between
    // consecutive blinks, leftover slack spread over the gaps.
    let total_duration: u64 = durations.iter().sum();
    let required = if count == 0 {
        0
    } else {
        total_duration + (count as u64 - 1) * spec.min_gap_frames + 2
    };
    if required > spec.n_frames {
        return Err(SynthError::Capacity {
            blink_count: spec.blink_count,
            required,
            available: spec.n_frames,
        });
    }
    let slack = spec.n_frames - required;
    let mut cuts: Vec<u64> = (0..count).map(|_| rng.random_range(0..=slack)).collect();
    cuts.sort_unstable();
    let mut extras = Vec::with_capacity(count + 1);
    let mut previous = 0u64;
    for cut in cuts {
        extras.push(cut - previous);
        previous = cut;
    }
    extras.push(slack - previous);

    let mut intervals = Vec::with_capacity(count);
    let mut position = if count == 0 { 0 } else { 1 + extras[0] };
    for i in 0..count {
        let start = position;
        let end = start + durations[i] - 1;
        intervals.push((start, end));
        if i + 1 < count {
            position = end + 1 + spec.min_gap_frames + extras[i + 1];
        }
    }

    // Noise-free per-frame profiles.
    let n = spec.n_frames as usize;
    let mut openness = vec![spec.open_level; n];
    for (&(start, _), (&duration, &depth)) in
        intervals.iter().zip(durations.iter().zip(depths.iter()))
    {
        for (offset, value) in dip_profile(duration, spec.open_level, depth)
            .into_iter()
            .enumerate()
        {
            openness[start as usize + offset] = value;
        }
    }
    let ear: Vec<f64> = openness
        .iter()
        .map(|&o| {
            spec.ear_open_level
                * (1.0 - spec.ear_dip_fraction * (spec.open_level - o) / spec.open_level)
        })
        .collect();

    let openness_noise = noise_distribution(spec.noise_sigma_openness);
    let ear_noise = noise_distribution(spec.noise_sigma_ear);
    let samples: Vec<FrameSample> = (0..n)
        .map(|f| FrameSample {
            frame_index: f as u64,
            right_openness: noisy(openness[f], &openness_noise, OPENNESS_RANGE, &mut rng),
            left_openness: noisy(openness[f], &openness_noise, OPENNESS_RANGE, &mut rng),
            right_ear: noisy(ear[f], &ear_noise, EAR_RANGE, &mut rng),
            left_ear: noisy(ear[f], &ear_noise, EAR_RANGE, &mut rng),
        })
        .collect();

    let video_id = format!("synthetic-{:016x}", spec.seed);
    let blinks: Vec<AnnotatedBlink> = intervals
        .iter()
        .zip(&depths)
        .map(|(&(start_frame, end_frame), &depth)| AnnotatedBlink {
            start_frame,
            end_frame,
            completeness: if depth < 0.25 {
                Completeness::Complete
            } else {
                Completeness::Partial
            },
        })
        .collect();
    let annotations = AnnotationSet {
        video_id: video_id.clone(),
        blinks,
    };
    let trace = SignalTrace {
        video_id,
        samples,
        fps: None,
    };
    Ok((trace, annotations))
}

fn noise_distribution(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("validated sigma"))
}

fn noisy(base: f64, noise: &Option<Normal<f64>>, range: (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    match noise {
        Some(distribution) => (base + distribution.sample(rng)).clamp(range.0, range.1),
        None => base,
    }
}

/// Dip values for the frames inside a blink: descend from the open level,
/// hold at `depth` for one or two frames, ascend back. Endpoints stay
/// strictly between `open_level` and `depth`; the hold frames are exactly
/// `depth`.
fn dip_profile(duration: u64, open_level: f64, depth: f64) -> Vec<f64> {
    let d = duration as usize;
    let hold = if d <= 4 { 1 } else { 2 };
    let ramp = d - hold;
    let descend = ramp / 2;
    let ascend = ramp - descend;
    let mut values = Vec::with_capacity(d);
    for i in 1..=descend {
        values.push(open_level + (depth - open_level) * i as f64 / (descend + 1) as f64);
    }
    for _ in 0..hold {
        values.push(depth);
    }
    for j in 1..=ascend {
        values.push(depth + (open_level - depth) * j as f64 / (ascend + 1) as f64);
    }
    values
}
