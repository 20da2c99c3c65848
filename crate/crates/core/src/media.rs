//! Structured stand-in for facial images and videos.
//!
//! Media are plain records instead of pixels: every perceptual notion the
//! verification pipeline cares about (identity, pose, lip state, replay
//! evidence, synthesis artifacts, quality) is a scalar field, which makes
//! each detection rule deterministic and testable. All values are immutable
//! after construction; transformations return new media.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identity vector dimension used across the shipped corpora.
pub const DEFAULT_IDENTITY_DIM: usize = 16;

/// Version tag of the JSON media document.
pub const MEDIA_FORMAT_VERSION: u32 = 1;

const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MediaError {
    #[error("identity vector must be non-empty")]
    EmptyIdentity,
    #[error("identity vector norm {0} is not unit within 1e-9")]
    NotUnitNorm(f64),
    #[error("identity vector has zero norm")]
    ZeroNorm,
    #[error("identity dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("field {field} = {value} outside {range}")]
    FieldOutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("lip_pattern is set but lip_openness is zero")]
    LipPatternWithoutOpenness,
    #[error("digit label {0} outside 0-9")]
    InvalidDigit(u8),
    #[error("audio track is inconsistent: {0}")]
    BadAudio(&'static str),
    #[error("an image must have exactly one frame and no audio")]
    MalformedImage,
    #[error("media must contain at least one frame")]
    NoFrames,
    #[error("operation requires a video")]
    NotAVideo,
    #[error("operation requires at least {0} frames")]
    TooFewFrames(usize),
    #[error("clip list is empty")]
    EmptyClipList,
    #[error("replay strength {0} outside (0,1]")]
    InvalidReplayStrength(f64),
    #[error("digit list is empty")]
    EmptyDigits,
    #[error("{digits} digits cannot partition {frames} frames")]
    TooManyDigits { digits: usize, frames: usize },
    #[error("audio track is missing")]
    AudioMissing,
    #[error("audio tokens do not match the requested digits")]
    TokenMismatch,
    #[error("unsupported media document version {0}")]
    UnsupportedVersion(u32),
}

// ---------------------------------------------------------------------------
// Identity
// ---------------------------------------------------------------------------

/// Unit-norm real vector carrying the identity of a face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdentityVector(Vec<f64>);

impl IdentityVector {
    /// Wraps components that are already unit-norm (within 1e-9).
    pub fn from_components(components: Vec<f64>) -> Result<Self, MediaError> {
        if components.is_empty() {
            return Err(MediaError::EmptyIdentity);
        }
        let norm = norm(&components);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(MediaError::NotUnitNorm(norm));
        }
        Ok(Self(components))
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(raw: Vec<f64>) -> Result<Self, MediaError> {
        if raw.is_empty() {
            return Err(MediaError::EmptyIdentity);
        }
        let norm = norm(&raw);
        if norm == 0.0 || !norm.is_finite() {
            return Err(MediaError::ZeroNorm);
        }
        Ok(Self(raw.into_iter().map(|c| c / norm).collect()))
    }

    /// Deterministic random unit vector.
    pub fn random(dim: usize, rng: &mut impl rand::Rng) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        loop {
            let raw: Vec<f64> = (0..dim)
                .map(|_| StandardNormal.sample(rng))
                .collect();
            if let Ok(v) = Self::normalized(raw) {
                return v;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// Cosine similarity in [-1, 1].
    pub fn cosine(&self, other: &IdentityVector) -> Result<f64, MediaError> {
        if self.dim() != other.dim() {
            return Err(MediaError::DimensionMismatch(self.dim(), other.dim()));
        }
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        let denom = norm(&self.0) * norm(&other.0);
        Ok((dot / denom).clamp(-1.0, 1.0))
    }

    /// normalize(f·target + (1-f)·other). The endpoints return exact copies.
    pub fn blend(
        target: &IdentityVector,
        other: &IdentityVector,
        fidelity: f64,
    ) -> Result<IdentityVector, MediaError> {
        if target.dim() != other.dim() {
            return Err(MediaError::DimensionMismatch(target.dim(), other.dim()));
        }
        if fidelity >= 1.0 {
            return Ok(target.clone());
        }
        if fidelity <= 0.0 {
            return Ok(other.clone());
        }
        let raw: Vec<f64> = target
            .0
            .iter()
            .zip(&other.0)
            .map(|(t, o)| fidelity * t + (1.0 - fidelity) * o)
            .collect();
        IdentityVector::normalized(raw)
    }

    fn validate(&self) -> Result<(), MediaError> {
        Self::from_components(self.0.clone()).map(|_| ())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Small enumerated scene label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneTag {
    Indoor,
    Outdoor,
    Office,
    Dim,
    Backlit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentAttrs {
    /// Scene brightness in [0, 1].
    pub brightness: f64,
    /// Head posture bias in degrees, [-45, 45].
    pub posture_bias: f64,
    pub scene_tag: SceneTag,
}

impl EnvironmentAttrs {
    fn validate(&self) -> Result<(), MediaError> {
        check_range("brightness", self.brightness, 0.0, 1.0)?;
        if !(-45.0..=45.0).contains(&self.posture_bias) {
            return Err(MediaError::FieldOutOfRange {
                field: "posture_bias",
                value: self.posture_bias,
                range: "[-45,45]",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadPose {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl HeadPose {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    /// Euclidean pose delta in degrees.
    pub fn delta(&self, other: &HeadPose) -> f64 {
        let dy = self.yaw - other.yaw;
        let dp = self.pitch - other.pitch;
        let dr = self.roll - other.roll;
        (dy * dy + dp * dp + dr * dr).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub identity: IdentityVector,
    pub env: EnvironmentAttrs,
    /// Opaque identifier of the clip this frame was captured in.
    pub source_clip_id: String,
    /// Position of the frame within its source clip.
    pub seq_index: u32,
    pub head_pose: HeadPose,
    /// Mouth openness in [0, 1]; 0 means closed/no movement.
    pub lip_openness: f64,
    /// Digit label 0-9 the lips articulate, if any.
    pub lip_pattern: Option<u8>,
    /// Synthesis artifact evidence in [0, 1].
    pub artifact_score: f64,
    /// Replay (moiré/screen) evidence in [0, 1].
    pub replay_score: f64,
    /// Visual quality in [0, 1].
    pub quality: f64,
}

impl Frame {
    fn validate(&self) -> Result<(), MediaError> {
        self.identity.validate()?;
        self.env.validate()?;
        check_range("lip_openness", self.lip_openness, 0.0, 1.0)?;
        check_range("artifact_score", self.artifact_score, 0.0, 1.0)?;
        check_range("replay_score", self.replay_score, 0.0, 1.0)?;
        check_range("quality", self.quality, 0.0, 1.0)?;
        if let Some(d) = self.lip_pattern {
            if d > 9 {
                return Err(MediaError::InvalidDigit(d));
            }
            if self.lip_openness <= 0.0 {
                return Err(MediaError::LipPatternWithoutOpenness);
            }
        }
        Ok(())
    }
}

fn check_range(field: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), MediaError> {
    if !(lo..=hi).contains(&value) || !value.is_finite() {
        return Err(MediaError::FieldOutOfRange {
            field,
            value,
            range: "[0,1]",
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Audio
// ---------------------------------------------------------------------------

/// Half-open frame-index interval [start, end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn frames(&self) -> impl Iterator<Item = usize> {
        (self.start as usize)..(self.end as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AudioTrack {
    /// Spoken digit labels, in order.
    pub tokens: Vec<u8>,
    /// One half-open frame interval per token; disjoint and ordered.
    pub spans: Vec<Span>,
    /// Quality of the (synthesized) voice signal in [0, 1].
    pub voice_quality: f64,
}

impl AudioTrack {
    fn validate(&self, frame_count: usize) -> Result<(), MediaError> {
        if self.tokens.len() != self.spans.len() {
            return Err(MediaError::BadAudio("token/span count mismatch"));
        }
        if self.tokens.is_empty() {
            return Err(MediaError::BadAudio("no tokens"));
        }
        for &t in &self.tokens {
            if t > 9 {
                return Err(MediaError::InvalidDigit(t));
            }
        }
        check_range("voice_quality", self.voice_quality, 0.0, 1.0)?;
        let mut prev_end = 0u32;
        for (i, s) in self.spans.iter().enumerate() {
            if s.is_empty() {
                return Err(MediaError::BadAudio("empty span"));
            }
            if i > 0 && s.start < prev_end {
                return Err(MediaError::BadAudio("spans overlap or are unordered"));
            }
            if s.end as usize > frame_count {
                return Err(MediaError::BadAudio("span exceeds video length"));
            }
            prev_end = s.end;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Media
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Image,
    Video,
}

/// Synthesis method category; mirrors what the output inherits from the
/// driving media (Swap: scene, Reenactment: motion only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodCategory {
    Swap,
    Reenactment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Genuine,
    Replayed,
    Synthesized {
        method: String,
        category: MethodCategory,
    },
}

/// A synthetic facial image or video; the universal payload of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MediaDocument", into = "MediaDocument")]
pub struct FacialMedia {
    pub kind: MediaKind,
    pub frames: Vec<Frame>,
    pub audio: Option<AudioTrack>,
    pub provenance: Provenance,
}

/// Wire form of [`FacialMedia`]: a versioned JSON document. Unknown fields
/// are rejected and the content is fully validated on the way in.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaDocument {
    pub version: u32,
    pub kind: MediaKind,
    pub provenance: Provenance,
    pub frames: Vec<Frame>,
    pub audio: Option<AudioTrack>,
}

impl From<FacialMedia> for MediaDocument {
    fn from(m: FacialMedia) -> Self {
        MediaDocument {
            version: MEDIA_FORMAT_VERSION,
            kind: m.kind,
            provenance: m.provenance,
            frames: m.frames,
            audio: m.audio,
        }
    }
}

impl TryFrom<MediaDocument> for FacialMedia {
    type Error = MediaError;

    fn try_from(doc: MediaDocument) -> Result<Self, MediaError> {
        if doc.version != MEDIA_FORMAT_VERSION {
            return Err(MediaError::UnsupportedVersion(doc.version));
        }
        let media = FacialMedia {
            kind: doc.kind,
            frames: doc.frames,
            audio: doc.audio,
            provenance: doc.provenance,
        };
        media.validate()?;
        Ok(media)
    }
}

impl FacialMedia {
    pub fn image(frame: Frame) -> Result<Self, MediaError> {
        let media = FacialMedia {
            kind: MediaKind::Image,
            frames: vec![frame],
            audio: None,
            provenance: Provenance::Genuine,
        };
        media.validate()?;
        Ok(media)
    }

    pub fn video(frames: Vec<Frame>) -> Result<Self, MediaError> {
        let media = FacialMedia {
            kind: MediaKind::Video,
            frames,
            audio: None,
            provenance: Provenance::Genuine,
        };
        media.validate()?;
        Ok(media)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn is_video(&self) -> bool {
        self.kind == MediaKind::Video
    }

    pub fn identity_dim(&self) -> usize {
        self.frames.first().map_or(0, |f| f.identity.dim())
    }

    pub fn validate(&self) -> Result<(), MediaError> {
        if self.frames.is_empty() {
            return Err(MediaError::NoFrames);
        }
        if self.kind == MediaKind::Image && (self.frames.len() != 1 || self.audio.is_some()) {
            return Err(MediaError::MalformedImage);
        }
        let dim = self.frames[0].identity.dim();
        for f in &self.frames {
            f.validate()?;
            if f.identity.dim() != dim {
                return Err(MediaError::DimensionMismatch(dim, f.identity.dim()));
            }
        }
        if let Some(audio) = &self.audio {
            audio.validate(self.frames.len())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("media serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    // -----------------------------------------------------------------------
    // Transformations
    // -----------------------------------------------------------------------

    /// Reorders the frames of a video by a seed-determined non-identity
    /// permutation. Audio spans and provenance are untouched.
    pub fn scramble_frames(&self, seed: u64) -> Result<FacialMedia, MediaError> {
        if !self.is_video() {
            return Err(MediaError::NotAVideo);
        }
        if self.frames.len() < 2 {
            return Err(MediaError::TooFewFrames(2));
        }
        let mut perm: Vec<usize> = (0..self.frames.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        perm.shuffle(&mut rng);
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            perm.swap(0, 1);
        }
        let frames = perm.iter().map(|&p| self.frames[p].clone()).collect();
        Ok(FacialMedia {
            kind: MediaKind::Video,
            frames,
            audio: self.audio.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Stamps the media as replayed: provenance becomes `Replayed` and every
    /// frame's replay_score is raised to at least `replay_strength`.
    pub fn make_replay(&self, replay_strength: f64) -> Result<FacialMedia, MediaError> {
        if !(replay_strength > 0.0 && replay_strength <= 1.0) {
            return Err(MediaError::InvalidReplayStrength(replay_strength));
        }
        let frames = self
            .frames
            .iter()
            .map(|f| Frame {
                replay_score: f.replay_score.max(replay_strength),
                ..f.clone()
            })
            .collect();
        Ok(FacialMedia {
            kind: self.kind,
            frames,
            audio: self.audio.clone(),
            provenance: Provenance::Replayed,
        })
    }

    /// Attaches an audio track speaking `digits`, with spans partitioning
    /// the frame range into equal (±1 frame) consecutive intervals. Lip
    /// fields are left untouched: audio and video are deliberately decoupled.
    pub fn import_audio(
        &self,
        digits: &[u8],
        synth_voice_quality: f64,
    ) -> Result<FacialMedia, MediaError> {
        if !self.is_video() {
            return Err(MediaError::NotAVideo);
        }
        if digits.is_empty() {
            return Err(MediaError::EmptyDigits);
        }
        for &d in digits {
            if d > 9 {
                return Err(MediaError::InvalidDigit(d));
            }
        }
        let frames = self.frames.len();
        if digits.len() > frames {
            return Err(MediaError::TooManyDigits {
                digits: digits.len(),
                frames,
            });
        }
        check_range("voice_quality", synth_voice_quality, 0.0, 1.0)?;
        let base = frames / digits.len();
        let rem = frames % digits.len();
        let mut spans = Vec::with_capacity(digits.len());
        let mut start = 0u32;
        for i in 0..digits.len() {
            let len = base + usize::from(i < rem);
            let end = start + len as u32;
            spans.push(Span { start, end });
            start = end;
        }
        Ok(FacialMedia {
            kind: self.kind,
            frames: self.frames.clone(),
            audio: Some(AudioTrack {
                tokens: digits.to_vec(),
                spans,
                voice_quality: synth_voice_quality,
            }),
            provenance: self.provenance.clone(),
        })
    }

    /// Rewrites the lip tracks so every audio span articulates its token:
    /// openness oscillates (movement is visible) and lip_pattern carries the
    /// span's digit on every frame of the span.
    pub fn set_matched_lips(&self, digits: &[u8]) -> Result<FacialMedia, MediaError> {
        let audio = self.audio.as_ref().ok_or(MediaError::AudioMissing)?;
        if audio.tokens != digits {
            return Err(MediaError::TokenMismatch);
        }
        let mut frames = self.frames.clone();
        for (span, &token) in audio.spans.iter().zip(&audio.tokens) {
            for idx in span.frames() {
                let f = &mut frames[idx];
                f.lip_openness = if idx % 2 == 0 { 0.3 } else { 0.95 };
                f.lip_pattern = Some(token);
            }
        }
        Ok(FacialMedia {
            kind: self.kind,
            frames,
            audio: self.audio.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Forces the lip channel silent on every frame (openness 0, no pattern).
    pub fn clear_lips(&self) -> FacialMedia {
        let frames = self
            .frames
            .iter()
            .map(|f| Frame {
                lip_openness: 0.0,
                lip_pattern: None,
                ..f.clone()
            })
            .collect();
        FacialMedia {
            kind: self.kind,
            frames,
            audio: self.audio.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Concatenates video clips in argument order. Frames keep their original
/// source_clip_id and seq_index; audio is dropped; the result is Genuine
/// only if every input is.
pub fn stitch_clips(clips: &[FacialMedia]) -> Result<FacialMedia, MediaError> {
    if clips.is_empty() {
        return Err(MediaError::EmptyClipList);
    }
    let dim = clips[0].identity_dim();
    let mut frames = Vec::new();
    let mut provenance = Provenance::Genuine;
    for clip in clips {
        if !clip.is_video() {
            return Err(MediaError::NotAVideo);
        }
        if clip.identity_dim() != dim {
            return Err(MediaError::DimensionMismatch(dim, clip.identity_dim()));
        }
        if provenance == Provenance::Genuine && clip.provenance != Provenance::Genuine {
            provenance = clip.provenance.clone();
        }
        frames.extend(clip.frames.iter().cloned());
    }
    Ok(FacialMedia {
        kind: MediaKind::Video,
        frames,
        audio: None,
        provenance,
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn frame_multiset(media: &FacialMedia) -> Vec<(String, u32)> {
        let mut v: Vec<_> = media
            .frames
            .iter()
            .map(|f| (f.source_clip_id.clone(), f.seq_index))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn scramble_two_frames_always_swaps() {
        let v = video(2, "c", 1);
        for seed in 0..32 {
            let s = v.scramble_frames(seed).unwrap();
            assert_eq!(s.frames[0].seq_index, 1);
            assert_eq!(s.frames[1].seq_index, 0);
        }
    }

    #[test]
    fn scramble_preserves_multiset_and_is_not_identity() {
        let v = video(5, "c", 2);
        let s = v.scramble_frames(7).unwrap();
        assert_eq!(frame_multiset(&v), frame_multiset(&s));
        let order: Vec<u32> = s.frames.iter().map(|f| f.seq_index).collect();
        assert_ne!(order, vec![0, 1, 2, 3, 4]);
        // deterministic under the same seed
        assert_eq!(s, v.scramble_frames(7).unwrap());
        // scrambling twice still holds the multiset
        let ss = s.scramble_frames(7).unwrap();
        assert_eq!(frame_multiset(&v), frame_multiset(&ss));
    }

    #[test]
    fn scramble_rejects_images_and_single_frames() {
        let img = FacialMedia::image(frame(&identity(3), "c", 0)).unwrap();
        assert_eq!(img.scramble_frames(1), Err(MediaError::NotAVideo));
        let one = video(1, "c", 3);
        assert_eq!(one.scramble_frames(1), Err(MediaError::TooFewFrames(2)));
    }

    #[test]
    fn stitch_concatenates_and_counts_boundaries() {
        let a = video(3, "clipA", 4);
        let b = video(2, "clipB", 4);
        let out = stitch_clips(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(out.len(), 5);
        for f in &out.frames[..3] {
            assert_eq!(f.source_clip_id, "clipA");
        }
        for f in &out.frames[3..] {
            assert_eq!(f.source_clip_id, "clipB");
        }
        let boundaries = out
            .frames
            .windows(2)
            .filter(|w| w[0].source_clip_id != w[1].source_clip_id)
            .count();
        assert_eq!(boundaries, 1);
    }

    #[test]
    fn stitch_single_clip_is_clip_without_audio() {
        let a = video(4, "clipA", 5).import_audio(&[1, 2], 0.9).unwrap();
        let out = stitch_clips(&[a.clone()]).unwrap();
        assert_eq!(out.frames, a.frames);
        assert!(out.audio.is_none());
        assert_eq!(out.provenance, Provenance::Genuine);
    }

    #[test]
    fn stitch_rejects_empty_and_mixed_dims() {
        assert_eq!(stitch_clips(&[]), Err(MediaError::EmptyClipList));
        let a = video(2, "a", 6);
        let id8 = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            IdentityVector::random(8, &mut rng)
        };
        let b = FacialMedia::video(vec![
            Frame {
                identity: id8.clone(),
                ..frame(&identity(1), "b", 0)
            },
            Frame {
                identity: id8,
                ..frame(&identity(1), "b", 1)
            },
        ])
        .unwrap();
        assert!(matches!(
            stitch_clips(&[a, b]),
            Err(MediaError::DimensionMismatch(16, 8))
        ));
    }

    #[test]
    fn replay_sets_provenance_and_max_rule() {
        let v = video(3, "c", 7);
        let r = v.make_replay(0.9).unwrap();
        assert_eq!(r.provenance, Provenance::Replayed);
        assert!(r.frames.iter().all(|f| f.replay_score == 0.9));

        let mut high = v.clone();
        high.frames[1].replay_score = 0.95;
        let r2 = high.make_replay(0.9).unwrap();
        assert_eq!(r2.frames[1].replay_score, 0.95);
        assert_eq!(r2.frames[0].replay_score, 0.9);

        // everything else bit-identical
        for (orig, new) in v.frames.iter().zip(&r.frames) {
            assert_eq!(orig.identity, new.identity);
            assert_eq!(orig.head_pose, new.head_pose);
            assert_eq!(orig.lip_openness, new.lip_openness);
            assert_eq!(orig.quality, new.quality);
        }
        assert!(v.make_replay(0.0).is_err());
        assert!(v.make_replay(1.1).is_err());
    }

    #[test]
    fn import_audio_partitions_equally() {
        let v = video(12, "c", 8);
        let a = v.import_audio(&[1, 2, 3], 0.9).unwrap();
        let spans = &a.audio.as_ref().unwrap().spans;
        assert_eq!(
            spans,
            &vec![
                Span { start: 0, end: 4 },
                Span { start: 4, end: 8 },
                Span { start: 8, end: 12 }
            ]
        );
        let v10 = video(10, "c", 8);
        let one = v10.import_audio(&[7], 0.9).unwrap();
        assert_eq!(
            one.audio.unwrap().spans,
            vec![Span { start: 0, end: 10 }]
        );
        // lips untouched
        assert_eq!(a.frames, v.frames);
        assert_eq!(v.import_audio(&[], 0.9), Err(MediaError::EmptyDigits));
        assert!(matches!(
            video(2, "c", 8).import_audio(&[1, 2, 3], 0.9),
            Err(MediaError::TooManyDigits { .. })
        ));
    }

    #[test]
    fn matched_lips_stamp_every_span() {
        let v = video(10, "c", 9).import_audio(&[4, 2], 0.9).unwrap();
        let m = v.set_matched_lips(&[4, 2]).unwrap();
        for idx in 0..5 {
            assert_eq!(m.frames[idx].lip_pattern, Some(4));
            assert!(m.frames[idx].lip_openness > 0.0);
        }
        for idx in 5..10 {
            assert_eq!(m.frames[idx].lip_pattern, Some(2));
        }
        assert_eq!(
            v.set_matched_lips(&[2, 4]),
            Err(MediaError::TokenMismatch)
        );
        assert_eq!(
            video(4, "c", 9).set_matched_lips(&[1]),
            Err(MediaError::AudioMissing)
        );
    }

    #[test]
    fn json_document_roundtrip_and_rejections() {
        let v = video(3, "c", 10).import_audio(&[5], 0.8).unwrap();
        let json = v.to_json();
        assert!(json.contains("\"version\":1"));
        let back = FacialMedia::from_json(&json).unwrap();
        assert_eq!(v, back);

        // unknown top-level field
        let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        doc["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<FacialMedia>(doc.clone()).is_err());

        // wrong version
        doc.as_object_mut().unwrap().remove("extra");
        doc["version"] = serde_json::json!(2);
        assert!(serde_json::from_value::<FacialMedia>(doc.clone()).is_err());

        // invariant violation caught on parse: image with two frames
        doc["version"] = serde_json::json!(1);
        doc["kind"] = serde_json::json!("image");
        assert!(serde_json::from_value::<FacialMedia>(doc).is_err());
    }

    #[test]
    fn identity_blend_endpoints_are_exact() {
        let t = identity(11);
        let d = identity(12);
        assert_eq!(IdentityVector::blend(&t, &d, 1.0).unwrap(), t);
        assert_eq!(IdentityVector::blend(&t, &d, 0.0).unwrap(), d);
        let b = IdentityVector::blend(&t, &d, 0.9).unwrap();
        assert!((norm(b.components()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_validation() {
        assert!(IdentityVector::from_components(vec![]).is_err());
        assert!(IdentityVector::from_components(vec![0.5, 0.5]).is_err());
        assert!(IdentityVector::normalized(vec![0.0, 0.0]).is_err());
        let v = IdentityVector::normalized(vec![3.0, 4.0]).unwrap();
        assert!((v.components()[0] - 0.6).abs() < 1e-15);
        assert!(v
            .cosine(&IdentityVector::from_components(vec![1.0, 0.0]).unwrap())
            .unwrap()
            .abs()
            <= 1.0);
        let w = identity(13);
        assert!(v.cosine(&w).is_err());
    }
}
