//! The verification pipeline and the stateful engine wrapping it.
//!
//! `verify` is a pure function of (profile, media, reference, session) and
//! evaluates every stage even when an earlier one failed, so per-stage rates
//! stay well-defined over any result set. `VendorEngine` adds the only
//! mutable piece: the challenge session store.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{FacialMedia, IdentityVector, MediaError, MediaKind};

use super::checks::{
    check_action_requirement, check_coherence, check_voice_requirement, face_match,
    mean_artifact, mean_quality, mean_replay, test_frame_index,
};
use super::profile::{DeclaredFeatures, DeepfakeDetector, FlvType, VendorProfile};
use super::session::{ChallengeGrant, ChallengeSession, SessionStore};

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("FLV type {0} is not supported by this vendor")]
    UnsupportedType(FlvType),
    #[error("FLV type {0} does not use challenges")]
    ChallengeNotApplicable(FlvType),
    #[error("malformed media: {0}")]
    MalformedMedia(#[from] MediaError),
    #[error("media kind does not match the FLV type")]
    MediaKindMismatch,
    #[error("a challenge session is required for this FLV type")]
    SessionRequired,
    #[error("unknown session")]
    UnknownSession,
    #[error("session expired")]
    ExpiredSession,
    #[error("session was issued for a different FLV type")]
    SessionTypeMismatch,
    #[error("audio track is missing")]
    AudioMissing,
    #[error("action challenge is empty")]
    EmptyChallenge,
    #[error("reference identity dimension does not match the media")]
    ReferenceDimensionMismatch,
    #[error("invalid vendor profile: {0}")]
    InvalidProfile(String),
}

impl VerifyError {
    /// Status code used by the HTTP service; the in-process client maps to
    /// the same codes so both transports are indistinguishable.
    pub fn http_status(&self) -> u16 {
        use VerifyError::*;
        match self {
            UnsupportedType(_) | ChallengeNotApplicable(_) => 422,
            UnknownSession | SessionTypeMismatch => 404,
            ExpiredSession => 410,
            MalformedMedia(_) | MediaKindMismatch | SessionRequired | AudioMissing
            | EmptyChallenge | ReferenceDimensionMismatch | InvalidProfile(_) => 400,
        }
    }
}

/// Per-stage pass/fail record of one verification call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    /// Voice/action challenge satisfied; vacuously true for image/silence.
    pub requirement_met: bool,
    /// Presentation-attack, quality and coherence checks combined.
    pub liveness_pass: bool,
    /// Absent when the vendor has no anti-deepfake detection.
    pub anti_deepfake_pass: Option<bool>,
    pub face_match_pass: Option<bool>,
    pub face_match_score: f64,
    pub test_frame_index: usize,
    /// Named scores behind each stage, computed unconditionally.
    pub stage_scores: BTreeMap<String, f64>,
}

impl VerificationOutcome {
    /// All applicable stages passed simultaneously.
    pub fn overall_pass(&self) -> bool {
        self.requirement_met
            && self.liveness_pass
            && self.anti_deepfake_pass.unwrap_or(true)
            && self.face_match_pass.unwrap_or(false)
    }
}

/// Evaluates the full pipeline: (a) requirement check, (b) liveness
/// (presentation/quality/coherence), (c) anti-deepfake when the vendor has
/// it, (d) face matching on the median-quality test frame.
pub fn verify(
    profile: &VendorProfile,
    flv_type: FlvType,
    media: &FacialMedia,
    reference: &IdentityVector,
    session: Option<&ChallengeSession>,
) -> Result<VerificationOutcome, VerifyError> {
    if !profile.supported_types.contains(&flv_type) {
        return Err(VerifyError::UnsupportedType(flv_type));
    }
    media.validate()?;
    let kind_ok = match flv_type {
        FlvType::Image => media.kind == MediaKind::Image,
        _ => media.kind == MediaKind::Video,
    };
    if !kind_ok {
        return Err(VerifyError::MediaKindMismatch);
    }

    let mut scores = BTreeMap::new();

    // (a) requirement
    let requirement_met = match flv_type {
        FlvType::Image | FlvType::Silence => true,
        FlvType::Voice => {
            let session = session.ok_or(VerifyError::SessionRequired)?;
            if session.flv_type != FlvType::Voice {
                return Err(VerifyError::SessionTypeMismatch);
            }
            let digits = session.challenge.digits().ok_or(VerifyError::SessionTypeMismatch)?;
            let check = check_voice_requirement(profile, media, digits)?;
            scores.insert("audio_match".into(), f64::from(check.audio_match));
            scores.insert("lip_variance".into(), check.lip_variance);
            scores.insert("lip_match_fraction".into(), check.lip_match_fraction);
            check.pass
        }
        FlvType::Action => {
            let session = session.ok_or(VerifyError::SessionRequired)?;
            if session.flv_type != FlvType::Action {
                return Err(VerifyError::SessionTypeMismatch);
            }
            let actions = session.challenge.actions().ok_or(VerifyError::SessionTypeMismatch)?;
            check_action_requirement(profile, media, actions)?
        }
    };
    scores.insert("requirement_ok".into(), f64::from(requirement_met));

    // (b) liveness: presentation attack + quality + coherence
    let replay_mean = mean_replay(media);
    let quality_mean = mean_quality(media);
    let coherent = check_coherence(media);
    scores.insert("replay_mean".into(), replay_mean);
    scores.insert("quality_mean".into(), quality_mean);
    scores.insert("coherence_ok".into(), f64::from(coherent));
    let replay_ok = !profile.replay_detection || replay_mean <= profile.thresholds.replay;
    let quality_ok = quality_mean >= profile.thresholds.quality;
    let coherence_ok = !profile.coherence_detection || coherent;
    let liveness_pass = replay_ok && quality_ok && coherence_ok;

    // (c) anti-deepfake
    let artifact_mean = mean_artifact(media);
    scores.insert("artifact_mean".into(), artifact_mean);
    let anti_deepfake_pass = profile.anti_deepfake.then(|| match profile.deepfake_detector {
        DeepfakeDetector::Threshold => artifact_mean <= profile.thresholds.deepfake,
        DeepfakeDetector::Band { low, high } => !(low..high).contains(&artifact_mean),
    });

    // (d) face matching on the test frame
    let test_idx = test_frame_index(media);
    let (face_pass, face_score) = face_match(
        &media.frames[test_idx],
        reference,
        profile.thresholds.face_match,
    )?;
    scores.insert("face_match_score".into(), face_score);

    Ok(VerificationOutcome {
        requirement_met,
        liveness_pass,
        anti_deepfake_pass,
        face_match_pass: Some(face_pass),
        face_match_score: face_score,
        test_frame_index: test_idx,
        stage_scores: scores,
    })
}

/// A running vendor instance: immutable profile plus the session store.
/// Challenge seeds derive deterministically from the engine's base seed.
#[derive(Debug)]
pub struct VendorEngine {
    profile: VendorProfile,
    store: SessionStore,
    base_seed: u64,
    issued: AtomicU64,
}

impl VendorEngine {
    pub fn new(profile: VendorProfile, base_seed: u64) -> Result<Self, VerifyError> {
        profile.validate()?;
        Ok(Self {
            profile,
            store: SessionStore::new(),
            base_seed,
            issued: AtomicU64::new(0),
        })
    }

    pub fn profile(&self) -> &VendorProfile {
        &self.profile
    }

    pub fn declared_features(&self) -> DeclaredFeatures {
        self.profile.declared_features()
    }

    /// Issues a challenge with an auto-derived seed.
    pub fn issue_challenge(&self, flv_type: FlvType) -> Result<ChallengeGrant, VerifyError> {
        let n = self.issued.fetch_add(1, Ordering::Relaxed);
        let seed = self
            .base_seed
            .wrapping_add(n.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        self.issue_challenge_seeded(flv_type, seed)
    }

    /// Issues a challenge whose content is a deterministic function of `seed`.
    pub fn issue_challenge_seeded(
        &self,
        flv_type: FlvType,
        seed: u64,
    ) -> Result<ChallengeGrant, VerifyError> {
        self.store.issue(&self.profile, flv_type, seed)
    }

    /// Looks up (and consumes) the session if one is required, then runs the
    /// pure verification pipeline. The session is only consumed once the
    /// request is well-formed enough to reach verification.
    pub fn verify(
        &self,
        flv_type: FlvType,
        media: &FacialMedia,
        reference: &IdentityVector,
        session_id: Option<&str>,
    ) -> Result<VerificationOutcome, VerifyError> {
        if !self.profile.supported_types.contains(&flv_type) {
            return Err(VerifyError::UnsupportedType(flv_type));
        }
        media.validate()?;
        if flv_type.needs_session() {
            let id = session_id.ok_or(VerifyError::SessionRequired)?;
            let session = self.store.take_valid(id, flv_type)?;
            verify(&self.profile, flv_type, media, reference, Some(&session))
        } else {
            verify(&self.profile, flv_type, media, reference, None)
        }
    }

    pub fn outstanding_sessions(&self) -> usize {
        self.store.len()
    }
}
