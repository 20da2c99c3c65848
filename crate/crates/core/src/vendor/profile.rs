//! Vendor profiles: the declared feature surface and the hidden defense
//! stack (thresholds and detection toggles) that ground-truths probing.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::engine::VerifyError;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FlvType {
    Image,
    Silence,
    Voice,
    Action,
}

impl FlvType {
    pub fn as_str(self) -> &'static str {
        match self {
            FlvType::Image => "image",
            FlvType::Silence => "silence",
            FlvType::Voice => "voice",
            FlvType::Action => "action",
        }
    }

    pub fn parse(s: &str) -> Option<FlvType> {
        match s {
            "image" => Some(FlvType::Image),
            "silence" => Some(FlvType::Silence),
            "voice" => Some(FlvType::Voice),
            "action" => Some(FlvType::Action),
            _ => None,
        }
    }

    /// Types whose verification is gated by a challenge session.
    pub fn needs_session(self) -> bool {
        matches!(self, FlvType::Voice | FlvType::Action)
    }
}

impl fmt::Display for FlvType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Blink,
    OpenMouth,
    TurnLeft,
    TurnRight,
    LookUp,
    ChinDown,
    TurnRightAndLeft,
}

impl ActionKind {
    pub const ALL: [ActionKind; 7] = [
        ActionKind::Blink,
        ActionKind::OpenMouth,
        ActionKind::TurnLeft,
        ActionKind::TurnRight,
        ActionKind::LookUp,
        ActionKind::ChinDown,
        ActionKind::TurnRightAndLeft,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Blink => "blink",
            ActionKind::OpenMouth => "open_mouth",
            ActionKind::TurnLeft => "turn_left",
            ActionKind::TurnRight => "turn_right",
            ActionKind::LookUp => "look_up",
            ActionKind::ChinDown => "chin_down",
            ActionKind::TurnRightAndLeft => "turn_right_and_left",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lip-language detection level of a voice-based API.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum LipLanguage {
    /// No lip condition at all.
    #[default]
    None,
    /// Requires visible lip movement, not a content match.
    MovementOnly,
    /// Requires the articulated digits to match the audio tokens.
    FullMatch,
}

impl fmt::Display for LipLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LipLanguage::None => "none",
            LipLanguage::MovementOnly => "movement_only",
            LipLanguage::FullMatch => "full_match",
        })
    }
}

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthRange {
    pub min: u8,
    pub max: u8,
}

impl LengthRange {
    pub fn new(min: u8, max: u8) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: u8) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub replay: f64,
    pub deepfake: f64,
    pub face_match: f64,
    pub quality: f64,
    pub lip_movement: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            replay: 0.5,
            deepfake: 0.5,
            face_match: 0.8,
            quality: 0.3,
            lip_movement: 0.01,
        }
    }
}

impl Thresholds {
    fn validate(&self) -> Result<(), VerifyError> {
        for (name, v) in [
            ("replay", self.replay),
            ("deepfake", self.deepfake),
            ("face_match", self.face_match),
            ("quality", self.quality),
            ("lip_movement", self.lip_movement),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(VerifyError::InvalidProfile(format!(
                    "threshold {name} = {v} outside [0,1]"
                )));
            }
        }
        Ok(())
    }
}

/// Anti-deepfake decision rule over the mean frame artifact score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeepfakeDetector {
    /// Flags media whose mean artifact score exceeds θ_deepfake.
    #[default]
    Threshold,
    /// Flags only mean artifact scores inside [low, high): catches cleanly
    /// rendered fakes while letting heavily artifacted ones through.
    Band { low: f64, high: f64 },
}

/// Publicly declared feature surface of a vendor. This is what a black-box
/// client can read from the API documentation; it may deliberately overstate
/// what the vendor actually implements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclaredFeatures {
    pub name: String,
    pub supported_types: BTreeSet<FlvType>,
    pub voice_code_length_range: LengthRange,
    pub default_code_length: u8,
    pub action_set: BTreeSet<ActionKind>,
    pub action_length_range: LengthRange,
    pub lip_language: LipLanguage,
    pub coherence_detection: bool,
    pub anti_deepfake: bool,
    pub replay_detection: bool,
}

/// Per-field overrides applied to the actual configuration to produce the
/// public declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DeclaredOverride {
    pub lip_language: Option<LipLanguage>,
    pub coherence_detection: Option<bool>,
    pub anti_deepfake: Option<bool>,
    pub replay_detection: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VendorProfile {
    pub name: String,
    pub supported_types: BTreeSet<FlvType>,
    pub voice_code_length_range: LengthRange,
    pub default_code_length: u8,
    pub action_set: BTreeSet<ActionKind>,
    pub action_length_range: LengthRange,
    pub lip_language: LipLanguage,
    pub coherence_detection: bool,
    pub anti_deepfake: bool,
    pub replay_detection: bool,
    pub thresholds: Thresholds,
    #[serde(default)]
    pub deepfake_detector: DeepfakeDetector,
    /// Challenge session lifetime; sessions are single-use.
    #[serde(default = "default_ttl")]
    pub session_ttl_seconds: u64,
    /// Public declaration overrides, when the vendor's docs diverge from
    /// the implementation.
    #[serde(default)]
    pub declared: Option<DeclaredOverride>,
}

fn default_ttl() -> u64 {
    60
}

pub const PRESET_NAMES: [&str; 6] = ["BD", "TC", "HW", "CW", "ST", "iFT"];

impl VendorProfile {
    pub fn validate(&self) -> Result<(), VerifyError> {
        self.thresholds.validate()?;
        if self.voice_code_length_range.min == 0
            || self.voice_code_length_range.min > self.voice_code_length_range.max
        {
            return Err(VerifyError::InvalidProfile(
                "voice code length range is empty".into(),
            ));
        }
        if !self
            .voice_code_length_range
            .contains(self.default_code_length)
        {
            return Err(VerifyError::InvalidProfile(
                "default code length outside range".into(),
            ));
        }
        if self.action_length_range.min == 0
            || self.action_length_range.min > self.action_length_range.max
        {
            return Err(VerifyError::InvalidProfile(
                "action length range is empty".into(),
            ));
        }
        let supports_action = self.supported_types.contains(&FlvType::Action);
        if supports_action != !self.action_set.is_empty() {
            return Err(VerifyError::InvalidProfile(
                "action set must be non-empty exactly when action FLV is supported".into(),
            ));
        }
        if let DeepfakeDetector::Band { low, high } = self.deepfake_detector {
            if !(0.0..=1.0).contains(&low) || !(low..=1.0).contains(&high) {
                return Err(VerifyError::InvalidProfile(
                    "band detector bounds must satisfy 0 <= low <= high <= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// The feature surface a black-box client sees.
    pub fn declared_features(&self) -> DeclaredFeatures {
        let ov = self.declared.clone().unwrap_or_default();
        DeclaredFeatures {
            name: self.name.clone(),
            supported_types: self.supported_types.clone(),
            voice_code_length_range: self.voice_code_length_range,
            default_code_length: self.default_code_length,
            action_set: self.action_set.clone(),
            action_length_range: self.action_length_range,
            lip_language: ov.lip_language.unwrap_or(self.lip_language),
            coherence_detection: ov.coherence_detection.unwrap_or(self.coherence_detection),
            anti_deepfake: ov.anti_deepfake.unwrap_or(self.anti_deepfake),
            replay_detection: ov.replay_detection.unwrap_or(self.replay_detection),
        }
    }

    pub fn preset(name: &str) -> Option<VendorProfile> {
        match name {
            "BD" => Some(Self::bd()),
            "TC" => Some(Self::tc()),
            "HW" => Some(Self::hw()),
            "CW" => Some(Self::cw()),
            "ST" => Some(Self::st()),
            "iFT" => Some(Self::ift()),
            _ => None,
        }
    }

    pub fn all_presets() -> Vec<VendorProfile> {
        PRESET_NAMES
            .iter()
            .map(|n| Self::preset(n).expect("preset exists"))
            .collect()
    }

    fn base(name: &str) -> VendorProfile {
        VendorProfile {
            name: name.to_string(),
            supported_types: BTreeSet::new(),
            voice_code_length_range: LengthRange::new(4, 4),
            default_code_length: 4,
            action_set: BTreeSet::new(),
            action_length_range: LengthRange::new(1, 1),
            lip_language: LipLanguage::None,
            coherence_detection: false,
            anti_deepfake: false,
            replay_detection: true,
            thresholds: Thresholds::default(),
            deepfake_detector: DeepfakeDetector::Threshold,
            session_ttl_seconds: default_ttl(),
            declared: None,
        }
    }

    /// Full-service vendor: image/silence/voice/action, anti-deepfake and
    /// replay detection, but its advertised lip-language support is not
    /// actually implemented.
    pub fn bd() -> VendorProfile {
        let mut p = Self::base("BD");
        p.supported_types =
            [FlvType::Image, FlvType::Silence, FlvType::Voice, FlvType::Action].into();
        p.voice_code_length_range = LengthRange::new(3, 6);
        p.default_code_length = 4;
        p.action_set = [
            ActionKind::Blink,
            ActionKind::TurnRight,
            ActionKind::TurnLeft,
            ActionKind::LookUp,
            ActionKind::ChinDown,
            ActionKind::TurnRightAndLeft,
        ]
        .into();
        p.action_length_range = LengthRange::new(1, 3);
        p.lip_language = LipLanguage::None;
        p.anti_deepfake = true;
        p.declared = Some(DeclaredOverride {
            lip_language: Some(LipLanguage::FullMatch),
            ..Default::default()
        });
        p
    }

    /// Vendor with movement-only lip checking and anti-deepfake detection.
    pub fn tc() -> VendorProfile {
        let mut p = Self::base("TC");
        p.supported_types =
            [FlvType::Image, FlvType::Silence, FlvType::Voice, FlvType::Action].into();
        p.voice_code_length_range = LengthRange::new(1, 6);
        p.default_code_length = 4;
        p.action_set = [ActionKind::Blink, ActionKind::OpenMouth].into();
        p.action_length_range = LengthRange::new(1, 2);
        p.lip_language = LipLanguage::MovementOnly;
        p.anti_deepfake = true;
        p
    }

    /// Image/action-only vendor without anti-deepfake detection.
    pub fn hw() -> VendorProfile {
        let mut p = Self::base("HW");
        p.supported_types = [FlvType::Image, FlvType::Action].into();
        p.action_set = [
            ActionKind::TurnLeft,
            ActionKind::TurnRight,
            ActionKind::Blink,
            ActionKind::OpenMouth,
        ]
        .into();
        p.action_length_range = LengthRange::new(1, 4);
        p
    }

    /// Vendor that actually implements full lip-language matching.
    pub fn cw() -> VendorProfile {
        let mut p = Self::base("CW");
        p.supported_types = [FlvType::Image, FlvType::Silence, FlvType::Voice].into();
        p.voice_code_length_range = LengthRange::new(4, 6);
        p.default_code_length = 4;
        p.lip_language = LipLanguage::FullMatch;
        p
    }

    /// Silence/voice vendor with a fixed code length.
    pub fn st() -> VendorProfile {
        let mut p = Self::base("ST");
        p.supported_types = [FlvType::Silence, FlvType::Voice].into();
        p.voice_code_length_range = LengthRange::new(4, 4);
        p.default_code_length = 4;
        p
    }

    /// Image/silence-only vendor.
    pub fn ift() -> VendorProfile {
        let mut p = Self::base("iFT");
        p.supported_types = [FlvType::Image, FlvType::Silence].into();
        p
    }
}
