//! The individual verification checks: requirement matching for voice and
//! action challenges, coherence, face matching and test-frame selection.

use serde::{Deserialize, Serialize};

use crate::media::{FacialMedia, Frame, IdentityVector};

use super::engine::VerifyError;
use super::profile::{ActionKind, VendorProfile};

// ---------------------------------------------------------------------------
// Action signatures
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseAxis {
    Yaw,
    Pitch,
    Roll,
}

impl PoseAxis {
    fn of(self, frame: &Frame) -> f64 {
        match self {
            PoseAxis::Yaw => frame.head_pose.yaw,
            PoseAxis::Pitch => frame.head_pose.pitch,
            PoseAxis::Roll => frame.head_pose.roll,
        }
    }
}

/// Kinematic predicate a frame window must satisfy for one action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignaturePredicate {
    /// Some frame reaches `degrees` or below on the axis.
    PoseAtMost { axis: PoseAxis, degrees: f64 },
    /// Some frame reaches `degrees` or above on the axis.
    PoseAtLeast { axis: PoseAxis, degrees: f64 },
    /// The window touches both extremes of the axis.
    PoseSpan { axis: PoseAxis, low: f64, high: f64 },
    /// Some frame opens the mouth to at least `threshold`.
    OpennessAtLeast { threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSignature {
    pub action: ActionKind,
    pub predicate: SignaturePredicate,
}

impl ActionSignature {
    /// The fixed signature table. Blink is a dip on the roll channel (an
    /// eye proxy independent of the lip track, so voice and action checks
    /// never interact); normal footage keeps roll non-negative.
    pub fn for_action(action: ActionKind) -> ActionSignature {
        use SignaturePredicate::*;
        let predicate = match action {
            ActionKind::TurnLeft => PoseAtMost {
                axis: PoseAxis::Yaw,
                degrees: -20.0,
            },
            ActionKind::TurnRight => PoseAtLeast {
                axis: PoseAxis::Yaw,
                degrees: 20.0,
            },
            ActionKind::LookUp => PoseAtLeast {
                axis: PoseAxis::Pitch,
                degrees: 15.0,
            },
            ActionKind::ChinDown => PoseAtMost {
                axis: PoseAxis::Pitch,
                degrees: -15.0,
            },
            ActionKind::TurnRightAndLeft => PoseSpan {
                axis: PoseAxis::Yaw,
                low: -20.0,
                high: 20.0,
            },
            ActionKind::Blink => PoseAtMost {
                axis: PoseAxis::Roll,
                degrees: -0.5,
            },
            ActionKind::OpenMouth => OpennessAtLeast { threshold: 0.5 },
        };
        ActionSignature { action, predicate }
    }

    /// Streaming satisfaction: scanning frames from `start`, returns the
    /// index just past the earliest window that satisfies the predicate.
    fn earliest_end(&self, frames: &[Frame], start: usize) -> Option<usize> {
        use SignaturePredicate::*;
        match self.predicate {
            PoseAtMost { axis, degrees } => frames[start..]
                .iter()
                .position(|f| axis.of(f) <= degrees)
                .map(|i| start + i + 1),
            PoseAtLeast { axis, degrees } => frames[start..]
                .iter()
                .position(|f| axis.of(f) >= degrees)
                .map(|i| start + i + 1),
            OpennessAtLeast { threshold } => frames[start..]
                .iter()
                .position(|f| f.lip_openness >= threshold)
                .map(|i| start + i + 1),
            PoseSpan { axis, low, high } => {
                let mut seen_low = false;
                let mut seen_high = false;
                for (i, f) in frames[start..].iter().enumerate() {
                    let v = axis.of(f);
                    seen_low |= v <= low;
                    seen_high |= v >= high;
                    if seen_low && seen_high {
                        return Some(start + i + 1);
                    }
                }
                None
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Requirement checks
// ---------------------------------------------------------------------------

/// Passes iff there exist disjoint, order-preserving frame windows each
/// satisfying the corresponding action's signature. Greedy earliest-window
/// matching is exact here because satisfaction is monotone under window
/// extension.
pub fn check_action_requirement(
    _profile: &VendorProfile,
    media: &FacialMedia,
    actions: &[ActionKind],
) -> Result<bool, VerifyError> {
    if actions.is_empty() {
        return Err(VerifyError::EmptyChallenge);
    }
    if !media.is_video() {
        return Err(VerifyError::MediaKindMismatch);
    }
    let mut pos = 0usize;
    for &action in actions {
        let sig = ActionSignature::for_action(action);
        match sig.earliest_end(&media.frames, pos) {
            Some(end) => pos = end,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Sub-scores backing the voice requirement decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceCheck {
    pub pass: bool,
    /// Audio tokens equal the challenged digits (speech recognition).
    pub audio_match: bool,
    /// Population variance of lip_openness over the whole video.
    pub lip_variance: f64,
    /// Fraction of spans whose frame majority articulates the span token.
    pub lip_match_fraction: f64,
}

/// Voice requirement: the audio must speak the challenged digits, and the
/// profile's lip-language level must be satisfied on the video track.
pub fn check_voice_requirement(
    profile: &VendorProfile,
    media: &FacialMedia,
    digits: &[u8],
) -> Result<VoiceCheck, VerifyError> {
    use super::profile::LipLanguage::*;
    let audio = media.audio.as_ref().ok_or(VerifyError::AudioMissing)?;
    let audio_match = audio.tokens == digits;
    let lip_variance = lip_openness_variance(media);
    let lip_match_fraction = span_match_fraction(media);
    let lip_ok = match profile.lip_language {
        None => true,
        MovementOnly => lip_variance > profile.thresholds.lip_movement,
        FullMatch => lip_match_fraction >= 1.0,
    };
    Ok(VoiceCheck {
        pass: audio_match && lip_ok,
        audio_match,
        lip_variance,
        lip_match_fraction,
    })
}

fn lip_openness_variance(media: &FacialMedia) -> f64 {
    let n = media.frames.len() as f64;
    let mean = media.frames.iter().map(|f| f.lip_openness).sum::<f64>() / n;
    media
        .frames
        .iter()
        .map(|f| {
            let d = f.lip_openness - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

fn span_match_fraction(media: &FacialMedia) -> f64 {
    let Some(audio) = &media.audio else {
        return 0.0;
    };
    let mut matched = 0usize;
    for (span, &token) in audio.spans.iter().zip(&audio.tokens) {
        let total = span.len() as usize;
        let hits = span
            .frames()
            .filter(|&i| media.frames[i].lip_pattern == Some(token))
            .count();
        if 2 * hits > total {
            matched += 1;
        }
    }
    matched as f64 / audio.spans.len() as f64
}

// ---------------------------------------------------------------------------
// Liveness building blocks
// ---------------------------------------------------------------------------

/// Frame-to-frame continuity: every adjacent pair shares a source clip and
/// advances seq_index by exactly one. Single frames pass vacuously.
pub fn check_coherence(media: &FacialMedia) -> bool {
    media.frames.windows(2).all(|w| {
        w[0].source_clip_id == w[1].source_clip_id && w[1].seq_index == w[0].seq_index + 1
    })
}

/// Cosine face match of the test frame against the reference identity.
pub fn face_match(
    test_frame: &Frame,
    reference: &IdentityVector,
    theta: f64,
) -> Result<(bool, f64), VerifyError> {
    let score = test_frame
        .identity
        .cosine(reference)
        .map_err(|_| VerifyError::ReferenceDimensionMismatch)?;
    Ok((score >= theta, score))
}

/// Index of the median-quality frame, lowest index on ties.
pub fn test_frame_index(media: &FacialMedia) -> usize {
    let mut order: Vec<usize> = (0..media.frames.len()).collect();
    order.sort_by(|&a, &b| {
        media.frames[a]
            .quality
            .partial_cmp(&media.frames[b].quality)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let median_quality = media.frames[order[(order.len() - 1) / 2]].quality;
    (0..media.frames.len())
        .find(|&i| media.frames[i].quality == median_quality)
        .expect("median exists")
}

pub(super) fn mean_replay(media: &FacialMedia) -> f64 {
    media.frames.iter().map(|f| f.replay_score).sum::<f64>() / media.frames.len() as f64
}

pub(super) fn mean_quality(media: &FacialMedia) -> f64 {
    media.frames.iter().map(|f| f.quality).sum::<f64>() / media.frames.len() as f64
}

pub(super) fn mean_artifact(media: &FacialMedia) -> f64 {
    media.frames.iter().map(|f| f.artifact_score).sum::<f64>() / media.frames.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::fixtures::*;
    use crate::media::stitch_clips;
    use crate::vendor::profile::{LipLanguage, VendorProfile};

    #[test]
    fn coherence_on_clean_scrambled_and_stitched() {
        let v = video(6, "c", 1);
        assert!(check_coherence(&v));
        assert!(!check_coherence(&v.scramble_frames(3).unwrap()));
        let stitched = stitch_clips(&[video(3, "a", 1), video(3, "b", 1)]).unwrap();
        assert!(!check_coherence(&stitched));
        assert!(check_coherence(&video(1, "c", 1)));
    }

    #[test]
    fn face_match_examples() {
        let id = identity(1);
        let f = frame(&id, "c", 0);
        let (pass, score) = face_match(&f, &id, 1.0).unwrap();
        assert!(pass);
        assert!((score - 1.0).abs() < 1e-12);

        let ortho =
            IdentityVector::from_components(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let other = IdentityVector::from_components(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let mut f2 = f.clone();
        f2.identity = ortho.clone();
        let (pass, score) = face_match(&f2, &other, 0.8).unwrap();
        assert!(!pass);
        assert_eq!(score, 0.0);

        // blend 0.9·target + 0.1·other renormalized against the target:
        // cosine = 0.9/sqrt(0.82) for orthonormal target/other.
        let blend = IdentityVector::blend(&ortho, &other, 0.9).unwrap();
        let mut f3 = f.clone();
        f3.identity = blend;
        let (pass, score) = face_match(&f3, &ortho, 0.8).unwrap();
        let expected = 0.9 / 0.82f64.sqrt();
        assert!(pass);
        assert!((score - expected).abs() < 1e-12);

        assert!(matches!(
            face_match(&f, &ortho, 0.8),
            Err(VerifyError::ReferenceDimensionMismatch)
        ));
    }

    #[test]
    fn test_frame_is_median_quality_lowest_index_tie() {
        let id = identity(2);
        let mut frames: Vec<_> = (0..5).map(|i| frame(&id, "c", i)).collect();
        frames[0].quality = 0.9;
        frames[1].quality = 0.2;
        frames[2].quality = 0.5;
        frames[3].quality = 0.7;
        frames[4].quality = 0.4;
        let v = FacialMedia::video(frames).unwrap();
        assert_eq!(test_frame_index(&v), 2);

        // all-equal qualities tie-break to the lowest index
        let v2 = video(4, "c", 2);
        assert_eq!(test_frame_index(&v2), 0);
    }

    fn voice_fixture(digits: &[u8]) -> FacialMedia {
        video(12, "c", 3).import_audio(digits, 0.9).unwrap()
    }

    #[test]
    fn voice_requirement_levels() {
        let digits = [1u8, 2, 3];
        let still = voice_fixture(&digits);

        let mut none = VendorProfile::cw();
        none.lip_language = LipLanguage::None;
        let r = check_voice_requirement(&none, &still, &digits).unwrap();
        assert!(r.pass && r.audio_match);
        assert_eq!(r.lip_variance, 0.0);

        let mut movement = none.clone();
        movement.lip_language = LipLanguage::MovementOnly;
        assert!(!check_voice_requirement(&movement, &still, &digits).unwrap().pass);

        let matched = still.set_matched_lips(&digits).unwrap();
        let mut full = none.clone();
        full.lip_language = LipLanguage::FullMatch;
        let r = check_voice_requirement(&full, &matched, &digits).unwrap();
        assert!(r.pass);
        assert_eq!(r.lip_match_fraction, 1.0);
        assert!(check_voice_requirement(&movement, &matched, &digits).unwrap().pass);

        // audio imported alone fails full matching
        assert!(!check_voice_requirement(&full, &still, &digits).unwrap().pass);

        // wrong digits fail recognition everywhere
        assert!(!check_voice_requirement(&none, &still, &[9, 9, 9]).unwrap().pass);

        let no_audio = video(8, "c", 3);
        assert!(matches!(
            check_voice_requirement(&none, &no_audio, &digits),
            Err(VerifyError::AudioMissing)
        ));
    }

    fn action_clip(action: ActionKind, clip: &str) -> FacialMedia {
        let id = identity(4);
        let mut frames: Vec<_> = (0..8).map(|i| frame(&id, clip, i)).collect();
        match action {
            ActionKind::TurnLeft => frames[4].head_pose.yaw = -28.0,
            ActionKind::TurnRight => frames[4].head_pose.yaw = 28.0,
            ActionKind::LookUp => frames[4].head_pose.pitch = 22.0,
            ActionKind::ChinDown => frames[4].head_pose.pitch = -22.0,
            ActionKind::TurnRightAndLeft => {
                frames[2].head_pose.yaw = 26.0;
                frames[5].head_pose.yaw = -26.0;
            }
            ActionKind::Blink => frames[4].head_pose.roll = -2.0,
            ActionKind::OpenMouth => frames[4].lip_openness = 0.8,
        }
        FacialMedia::video(frames).unwrap()
    }

    #[test]
    fn action_requirement_order_and_signatures() {
        let profile = VendorProfile::bd();
        let stitched = stitch_clips(&[
            action_clip(ActionKind::TurnLeft, "left"),
            action_clip(ActionKind::Blink, "blink"),
        ])
        .unwrap();
        let ok = check_action_requirement(
            &profile,
            &stitched,
            &[ActionKind::TurnLeft, ActionKind::Blink],
        )
        .unwrap();
        assert!(ok);
        // order violated
        let bad = check_action_requirement(
            &profile,
            &stitched,
            &[ActionKind::Blink, ActionKind::TurnLeft],
        )
        .unwrap();
        assert!(!bad);
        // unmet signature
        let neutral = video(8, "n", 4);
        assert!(!check_action_requirement(&profile, &neutral, &[ActionKind::TurnLeft]).unwrap());
        assert!(matches!(
            check_action_requirement(&profile, &neutral, &[]),
            Err(VerifyError::EmptyChallenge)
        ));
    }

    #[test]
    fn every_action_has_a_satisfiable_signature() {
        let profile = VendorProfile::bd();
        for action in ActionKind::ALL {
            let clip = action_clip(action, "x");
            assert!(
                check_action_requirement(&profile, &clip, &[action]).unwrap(),
                "{action} clip does not satisfy its own signature"
            );
        }
    }
}
