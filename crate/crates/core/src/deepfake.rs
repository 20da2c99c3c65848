//! Parametric face-swap and face-reenactment synthesis.
//!
//! A method profile describes what one synthesis technique inherits from
//! the target image versus the driving video and how artifacts accumulate:
//! Swap output lives in the driving video's scene (env, replay evidence,
//! quality source), Reenactment re-renders the target image with the
//! driving motion. Artifact scores grow with inter-frame motion and shrink
//! under adversarial training.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{
    stitch_clips, FacialMedia, Frame, IdentityVector, MediaError, MediaKind, MethodCategory,
    Provenance,
};
use crate::vendor::ActionKind;

#[derive(Debug, Error, PartialEq)]
pub enum SynthesisError {
    #[error("target must be a single-frame image")]
    TargetNotImage,
    #[error("driving media must be a video")]
    DrivingNotVideo,
    #[error("no clip available for action {0}")]
    MissingActionClip(ActionKind),
    #[error("action challenge is empty")]
    EmptyChallenge,
    #[error("invalid method profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Media(#[from] MediaError),
}

/// Parametric description of one deepfake method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodProfile {
    pub name: String,
    pub category: MethodCategory,
    /// Weight of the target identity in the output blend, [0, 1].
    pub identity_fidelity: f64,
    /// Artifact floor of the renderer, [0, 1].
    pub base_artifact: f64,
    /// Extra artifact per unit of normalized inter-frame motion, >= 0.
    pub motion_artifact_gain: f64,
    /// Trained against a discriminator.
    pub adversarial: bool,
    /// Artifact reduction earned by adversarial training, [0, 1).
    pub adversarial_discount: f64,
}

pub const METHOD_PRESET_NAMES: [&str; 6] =
    ["FaceShifter", "FOMM", "FSGAN_S", "FSGAN_R", "X2Face", "ICface"];

impl MethodProfile {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        let ranges = [
            ("identity_fidelity", self.identity_fidelity, 1.0),
            ("base_artifact", self.base_artifact, 1.0),
        ];
        for (name, v, hi) in ranges {
            if !(0.0..=hi).contains(&v) {
                return Err(SynthesisError::InvalidProfile(format!(
                    "{name} = {v} outside [0,{hi}]"
                )));
            }
        }
        if self.motion_artifact_gain < 0.0 {
            return Err(SynthesisError::InvalidProfile(
                "motion_artifact_gain must be >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.adversarial_discount) {
            return Err(SynthesisError::InvalidProfile(
                "adversarial_discount must lie in [0,1)".into(),
            ));
        }
        Ok(())
    }

    /// Copy of the profile with the adversarial flag forced.
    pub fn with_adversarial(&self, adversarial: bool) -> MethodProfile {
        MethodProfile {
            adversarial,
            ..self.clone()
        }
    }

    pub fn preset(name: &str) -> Option<MethodProfile> {
        let p = match name {
            "FaceShifter" => MethodProfile {
                name: "FaceShifter".into(),
                category: MethodCategory::Swap,
                identity_fidelity: 0.90,
                base_artifact: 0.25,
                motion_artifact_gain: 0.3,
                adversarial: true,
                adversarial_discount: 0.20,
            },
            "FOMM" => MethodProfile {
                name: "FOMM".into(),
                category: MethodCategory::Reenactment,
                identity_fidelity: 0.92,
                base_artifact: 0.35,
                motion_artifact_gain: 0.5,
                adversarial: false,
                adversarial_discount: 0.15,
            },
            "FSGAN_S" => MethodProfile {
                name: "FSGAN_S".into(),
                category: MethodCategory::Swap,
                identity_fidelity: 0.85,
                base_artifact: 0.45,
                motion_artifact_gain: 0.4,
                adversarial: false,
                adversarial_discount: 0.15,
            },
            "FSGAN_R" => MethodProfile {
                name: "FSGAN_R".into(),
                category: MethodCategory::Reenactment,
                identity_fidelity: 0.80,
                base_artifact: 0.50,
                motion_artifact_gain: 0.5,
                adversarial: false,
                adversarial_discount: 0.15,
            },
            "X2Face" => MethodProfile {
                name: "X2Face".into(),
                category: MethodCategory::Reenactment,
                identity_fidelity: 0.70,
                base_artifact: 0.60,
                motion_artifact_gain: 0.6,
                adversarial: false,
                adversarial_discount: 0.15,
            },
            "ICface" => MethodProfile {
                name: "ICface".into(),
                category: MethodCategory::Reenactment,
                identity_fidelity: 0.55,
                base_artifact: 0.65,
                motion_artifact_gain: 0.6,
                adversarial: false,
                adversarial_discount: 0.15,
            },
            _ => return None,
        };
        Some(p)
    }

    pub fn all_presets() -> Vec<MethodProfile> {
        METHOD_PRESET_NAMES
            .iter()
            .map(|n| Self::preset(n).expect("preset exists"))
            .collect()
    }
}

/// Normalized inter-frame motion: pose delta in degrees over 90, clamped.
fn motion(prev: Option<&Frame>, cur: &Frame) -> f64 {
    match prev {
        None => 0.0,
        Some(p) => (p.head_pose.delta(&cur.head_pose) / 90.0).clamp(0.0, 1.0),
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Synthesizes a fake video from one target image and a driving video.
pub fn synthesize(
    target: &FacialMedia,
    driving: &FacialMedia,
    profile: &MethodProfile,
) -> Result<FacialMedia, SynthesisError> {
    profile.validate()?;
    if target.kind != MediaKind::Image || target.frames.len() != 1 {
        return Err(SynthesisError::TargetNotImage);
    }
    if !driving.is_video() || driving.is_empty() {
        return Err(SynthesisError::DrivingNotVideo);
    }
    let target_frame = &target.frames[0];
    let discount = if profile.adversarial {
        profile.adversarial_discount
    } else {
        0.0
    };

    let mut frames = Vec::with_capacity(driving.len());
    let mut prev: Option<&Frame> = None;
    for drive in &driving.frames {
        let identity = IdentityVector::blend(
            &target_frame.identity,
            &drive.identity,
            profile.identity_fidelity,
        )?;
        let m = motion(prev, drive);
        let artifact_score = clamp01(
            profile.base_artifact + profile.motion_artifact_gain * m - discount,
        );
        let (env, replay_score, quality_source) = match profile.category {
            MethodCategory::Swap => (drive.env, drive.replay_score, drive.quality),
            MethodCategory::Reenactment => (target_frame.env, 0.0, target_frame.quality),
        };
        frames.push(Frame {
            identity,
            env,
            source_clip_id: drive.source_clip_id.clone(),
            seq_index: drive.seq_index,
            head_pose: drive.head_pose,
            lip_openness: drive.lip_openness,
            lip_pattern: drive.lip_pattern,
            artifact_score,
            replay_score,
            quality: clamp01(quality_source - artifact_score / 2.0),
        });
        prev = Some(drive);
    }
    Ok(FacialMedia {
        kind: MediaKind::Video,
        frames,
        audio: None,
        provenance: Provenance::Synthesized {
            method: profile.name.clone(),
            category: profile.category,
        },
    })
}

const SYNTH_VOICE_QUALITY: f64 = 0.95;

/// Voice-attack synthesis: fake the video, then import an audio track
/// speaking `digits`; when `matched_lips` is set the lip track is rewritten
/// to articulate the digits (the interactively recorded driving-video case).
pub fn synthesize_for_voice(
    target: &FacialMedia,
    driving: &FacialMedia,
    profile: &MethodProfile,
    digits: &[u8],
    matched_lips: bool,
) -> Result<FacialMedia, SynthesisError> {
    let fake = synthesize(target, driving, profile)?;
    let voiced = fake.import_audio(digits, SYNTH_VOICE_QUALITY)?;
    if matched_lips {
        Ok(voiced.set_matched_lips(digits)?)
    } else {
        Ok(voiced)
    }
}

/// Action-attack synthesis: stitch the pre-recorded clips for the challenged
/// actions into a driving video, then synthesize. The stitched clip
/// boundaries survive synthesis, so the output is incoherent by design.
pub fn synthesize_for_action(
    target: &FacialMedia,
    action_clips: &BTreeMap<ActionKind, FacialMedia>,
    challenge: &[ActionKind],
    profile: &MethodProfile,
) -> Result<FacialMedia, SynthesisError> {
    if challenge.is_empty() {
        return Err(SynthesisError::EmptyChallenge);
    }
    let clips: Vec<FacialMedia> = challenge
        .iter()
        .map(|a| {
            action_clips
                .get(a)
                .cloned()
                .ok_or(SynthesisError::MissingActionClip(*a))
        })
        .collect::<Result<_, _>>()?;
    let driving = stitch_clips(&clips)?;
    synthesize(target, &driving, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::fixtures::*;
    use crate::media::HeadPose;
    use crate::vendor::{
        check_action_requirement, check_coherence, check_voice_requirement, FlvType,
        LipLanguage, VendorProfile,
    };

    fn target_image(seed: u64) -> FacialMedia {
        let id = identity(seed);
        let mut f = frame(&id, "target", 0);
        f.env.brightness = 0.7;
        f.quality = 0.88;
        FacialMedia::image(f).unwrap()
    }

    fn moving_video(frames: usize, clip: &str, seed: u64) -> FacialMedia {
        let mut v = video(frames, clip, seed);
        for (i, f) in v.frames.iter_mut().enumerate() {
            f.head_pose = HeadPose::new(3.0 * i as f64, 1.5 * i as f64, 0.5);
            f.env.brightness = 0.4;
        }
        v
    }

    #[test]
    fn full_fidelity_copies_target_identity_exactly() {
        let target = target_image(1);
        let driving = moving_video(5, "drv", 2);
        let mut profile = MethodProfile::preset("FOMM").unwrap();
        profile.identity_fidelity = 1.0;
        let out = synthesize(&target, &driving, &profile).unwrap();
        for f in &out.frames {
            assert_eq!(f.identity, target.frames[0].identity);
        }
    }

    #[test]
    fn swap_inherits_driving_env_reenactment_inherits_target_env() {
        let target = target_image(3);
        let driving = moving_video(6, "drv", 4);
        let swap = synthesize(&target, &driving, &MethodProfile::preset("FaceShifter").unwrap())
            .unwrap();
        for (out, drive) in swap.frames.iter().zip(&driving.frames) {
            assert_eq!(out.env, drive.env);
            assert_eq!(out.replay_score, drive.replay_score);
            assert_eq!(out.head_pose, drive.head_pose);
            assert_eq!(out.source_clip_id, drive.source_clip_id);
            assert_eq!(out.seq_index, drive.seq_index);
        }
        let reen =
            synthesize(&target, &driving, &MethodProfile::preset("FOMM").unwrap()).unwrap();
        for (out, drive) in reen.frames.iter().zip(&driving.frames) {
            assert_eq!(out.env, target.frames[0].env);
            assert_eq!(out.replay_score, 0.0);
            assert_eq!(out.head_pose, drive.head_pose);
        }
        assert_eq!(swap.len(), driving.len());
        assert!(matches!(
            swap.provenance,
            Provenance::Synthesized { ref method, category: MethodCategory::Swap } if method == "FaceShifter"
        ));
    }

    #[test]
    fn adversarial_discount_is_exact_before_clamping() {
        let target = target_image(5);
        let driving = moving_video(8, "drv", 6);
        let base = MethodProfile::preset("FOMM").unwrap();
        let adv = base.with_adversarial(true);
        let plain = synthesize(&target, &driving, &base).unwrap();
        let trained = synthesize(&target, &driving, &adv).unwrap();
        for (p, t) in plain.frames.iter().zip(&trained.frames) {
            // fixture keeps both scores strictly inside (0,1): no clamping
            assert!(p.artifact_score > 0.0 && p.artifact_score < 1.0);
            assert!(t.artifact_score > 0.0 && t.artifact_score < 1.0);
            let diff = p.artifact_score - t.artifact_score;
            assert!(
                (diff - base.adversarial_discount).abs() < 1e-12,
                "diff {diff}"
            );
            assert!(t.artifact_score <= p.artifact_score);
        }
    }

    #[test]
    fn motion_raises_artifacts_monotonically() {
        let target = target_image(7);
        let still = video(6, "drv", 8);
        let moving = moving_video(6, "drv", 8);
        let profile = MethodProfile::preset("X2Face").unwrap();
        let a = synthesize(&target, &still, &profile).unwrap();
        let b = synthesize(&target, &moving, &profile).unwrap();
        for (sa, sb) in a.frames.iter().zip(&b.frames) {
            assert!(sb.artifact_score >= sa.artifact_score);
        }
        // first frame has motion 0, so artifact is exactly the base
        assert!((a.frames[0].artifact_score - profile.base_artifact).abs() < 1e-12);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let target = target_image(9);
        let driving = moving_video(5, "drv", 10);
        let profile = MethodProfile::preset("FSGAN_R").unwrap();
        assert_eq!(
            synthesize(&target, &driving, &profile).unwrap(),
            synthesize(&target, &driving, &profile).unwrap()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let target = target_image(11);
        let driving = moving_video(5, "drv", 12);
        let profile = MethodProfile::preset("FOMM").unwrap();
        assert!(matches!(
            synthesize(&driving, &driving, &profile),
            Err(SynthesisError::TargetNotImage)
        ));
        assert!(matches!(
            synthesize(&target, &target, &profile),
            Err(SynthesisError::DrivingNotVideo)
        ));
    }

    #[test]
    fn voice_synthesis_against_lip_levels() {
        let target = target_image(13);
        let driving = moving_video(18, "drv", 14);
        let profile = MethodProfile::preset("FaceShifter").unwrap();
        let digits = [3u8, 1, 4];

        let unmatched =
            synthesize_for_voice(&target, &driving, &profile, &digits, false).unwrap();
        let matched = synthesize_for_voice(&target, &driving, &profile, &digits, true).unwrap();

        let mut none = VendorProfile::cw();
        none.lip_language = LipLanguage::None;
        assert!(check_voice_requirement(&none, &unmatched, &digits).unwrap().pass);

        let full = VendorProfile::cw();
        assert_eq!(full.lip_language, LipLanguage::FullMatch);
        assert!(!check_voice_requirement(&full, &unmatched, &digits).unwrap().pass);
        assert!(check_voice_requirement(&full, &matched, &digits).unwrap().pass);
    }

    #[test]
    fn action_synthesis_satisfies_challenge_but_not_coherence() {
        let target = target_image(15);
        let mk_clip = |action: ActionKind, clip: &str| {
            let mut v = video(8, clip, 16);
            match action {
                ActionKind::TurnLeft => v.frames[4].head_pose.yaw = -30.0,
                ActionKind::Blink => v.frames[4].head_pose.roll = -2.0,
                _ => unreachable!(),
            }
            v
        };
        let clips: BTreeMap<ActionKind, FacialMedia> = [
            (ActionKind::TurnLeft, mk_clip(ActionKind::TurnLeft, "left")),
            (ActionKind::Blink, mk_clip(ActionKind::Blink, "blink")),
        ]
        .into();
        let challenge = [ActionKind::TurnLeft, ActionKind::Blink];
        let profile = MethodProfile::preset("FaceShifter").unwrap();
        let out = synthesize_for_action(&target, &clips, &challenge, &profile).unwrap();
        let vendor = VendorProfile::bd();
        assert!(check_action_requirement(&vendor, &out, &challenge).unwrap());
        assert!(!check_coherence(&out));
        assert_eq!(out.len(), 16);

        assert!(matches!(
            synthesize_for_action(&target, &clips, &[], &profile),
            Err(SynthesisError::EmptyChallenge)
        ));
        assert!(matches!(
            synthesize_for_action(&target, &clips, &[ActionKind::LookUp], &profile),
            Err(SynthesisError::MissingActionClip(ActionKind::LookUp))
        ));
        // synthesized output can actually be verified end to end
        let engine = crate::vendor::VendorEngine::new(VendorProfile::hw(), 1).unwrap();
        let _ = FlvType::Action;
        assert!(engine.profile().supported_types.contains(&FlvType::Action));
    }

    #[test]
    fn preset_categories_match_the_method_table() {
        let cats: BTreeMap<&str, MethodCategory> = MethodProfile::all_presets()
            .iter()
            .map(|p| (Box::leak(p.name.clone().into_boxed_str()) as &str, p.category))
            .collect();
        assert_eq!(cats["FaceShifter"], MethodCategory::Swap);
        assert_eq!(cats["FSGAN_S"], MethodCategory::Swap);
        for name in ["X2Face", "ICface", "FSGAN_R", "FOMM"] {
            assert_eq!(cats[name], MethodCategory::Reenactment);
        }
        for p in MethodProfile::all_presets() {
            p.validate().unwrap();
        }
    }
}
