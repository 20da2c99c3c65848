//! Configurable simulated FLV vendor: the three-step verification pipeline
//! (requirement check, liveness checks, anti-deepfake, face matching) over
//! structured media, plus the six built-in vendor presets.

mod checks;
mod engine;
mod profile;
mod session;

pub use checks::{
    check_action_requirement, check_coherence, check_voice_requirement, face_match,
    test_frame_index, ActionSignature, PoseAxis, SignaturePredicate, VoiceCheck,
};
pub use engine::{verify, VendorEngine, VerificationOutcome, VerifyError};
pub use profile::{
    ActionKind, DeclaredFeatures, DeclaredOverride, DeepfakeDetector, FlvType, LengthRange,
    LipLanguage, Thresholds, VendorProfile, PRESET_NAMES,
};
pub use session::{generate_challenge, Challenge, ChallengeGrant, ChallengeSession, SessionStore};
