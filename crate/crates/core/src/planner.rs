//! Turns an intelligence report into a concrete attack plan, and implements
//! the customized two-stage pipeline: swap the target onto a scene that is
//! known to pass image-based verification, then reenact the transformed
//! image with an adversarially trained method.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ApiError, FlvApi};
use crate::deepfake::{synthesize, MethodProfile, SynthesisError};
use crate::intelligence::{DeployVerdict, IntelligenceReport, LipVerdict};
use crate::media::{FacialMedia, IdentityVector, MediaKind, MethodCategory};
use crate::vendor::FlvType;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("method list is empty")]
    NoMethods,
    #[error("target does not support {0}")]
    UnsupportedType(FlvType),
    #[error("stage profile has the wrong category: expected {0:?}")]
    WrongCategory(MethodCategory),
    #[error("no base images supplied for the transform stage")]
    NoBases,
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error("API failure during staging: {0}")]
    Api(String),
}

/// How the driving media for the attack is to be produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivingRecipe {
    /// Any stock driving video works.
    Stock,
    /// Stitch pre-recorded per-action clips in challenge order.
    StitchedActions,
    /// Record a driving video with lips matching the challenged digits.
    MatchedLipsInteractive,
    /// Record one continuous video per challenge; no stitching.
    RecordedCoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StagePlan {
    SingleStage,
    TwoStage {
        swap_profile: MethodProfile,
        reenactment_profile: MethodProfile,
    },
}

/// One (intelligence fact, decision) pair in the plan's audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleEntry {
    pub fact: String,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub flv_type: FlvType,
    pub method: MethodProfile,
    pub driving_recipe: DrivingRecipe,
    pub stages: StagePlan,
    pub rationale: Vec<RationaleEntry>,
}

fn best_method<'a>(
    methods: impl Iterator<Item = &'a MethodProfile>,
    prefer_adversarial: bool,
) -> Option<&'a MethodProfile> {
    let pool: Vec<&MethodProfile> = methods.collect();
    if pool.is_empty() {
        return None;
    }
    let candidates: Vec<&MethodProfile> = if prefer_adversarial {
        let adv: Vec<&MethodProfile> = pool.iter().copied().filter(|m| m.adversarial).collect();
        if adv.is_empty() {
            pool
        } else {
            adv
        }
    } else {
        pool
    };
    candidates.into_iter().max_by(|a, b| {
        a.identity_fidelity
            .partial_cmp(&b.identity_fidelity)
            .unwrap_or(std::cmp::Ordering::Equal)
            // lexicographically smaller name wins ties
            .then_with(|| b.name.cmp(&a.name))
    })
}

/// Deterministic plan construction. Unknown (inconclusive) intelligence is
/// treated pessimistically: the plan assumes the feature is deployed.
pub fn plan_attack(
    report: &IntelligenceReport,
    flv_type: FlvType,
    methods: &[MethodProfile],
) -> Result<AttackPlan, PlanError> {
    if methods.is_empty() {
        return Err(PlanError::NoMethods);
    }
    if !report.declared.supported_types.contains(&flv_type) {
        return Err(PlanError::UnsupportedType(flv_type));
    }
    let mut rationale = Vec::new();
    let mut note = |fact: String, decision: String| {
        rationale.push(RationaleEntry { fact, decision });
    };

    let coherence = match report.inferred.coherence {
        DeployVerdict::Inconclusive => {
            note(
                "inferred.coherence=inconclusive".into(),
                "assume coherence detection is deployed".into(),
            );
            DeployVerdict::Deployed
        }
        v => v,
    };
    let lip = match report.inferred.lip_language {
        LipVerdict::Inconclusive => {
            note(
                "inferred.lip_language=inconclusive".into(),
                "assume full lip-language matching".into(),
            );
            LipVerdict::FullMatch
        }
        v => v,
    };
    let anti_deepfake = report.declared.anti_deepfake;

    let method = best_method(methods.iter(), anti_deepfake)
        .expect("non-empty method list")
        .clone();
    if anti_deepfake {
        note(
            "declared.anti_deepfake=true".into(),
            format!(
                "prefer adversarially trained methods; selected {} (fidelity {})",
                method.name, method.identity_fidelity
            ),
        );
    } else {
        note(
            "declared.anti_deepfake=false".into(),
            format!(
                "select highest-fidelity method {} (fidelity {})",
                method.name, method.identity_fidelity
            ),
        );
    }

    let driving_recipe = match flv_type {
        FlvType::Voice if lip == LipVerdict::FullMatch => {
            note(
                "inferred.lip_language=full_match".into(),
                "record driving video with matched lip movements interactively".into(),
            );
            DrivingRecipe::MatchedLipsInteractive
        }
        FlvType::Action if coherence == DeployVerdict::Deployed => {
            note(
                "inferred.coherence=deployed".into(),
                "record one coherent video per challenge; stitching would be detected".into(),
            );
            DrivingRecipe::RecordedCoherent
        }
        FlvType::Action => {
            note(
                "inferred.coherence=not_deployed".into(),
                "stitch pre-recorded action clips into the driving video".into(),
            );
            DrivingRecipe::StitchedActions
        }
        _ if coherence == DeployVerdict::Deployed => {
            note(
                "inferred.coherence=deployed".into(),
                "use recorded, unedited driving footage".into(),
            );
            DrivingRecipe::RecordedCoherent
        }
        _ => DrivingRecipe::Stock,
    };

    let swap = best_method(
        methods.iter().filter(|m| m.category == MethodCategory::Swap),
        anti_deepfake,
    );
    let reenactment = best_method(
        methods
            .iter()
            .filter(|m| m.category == MethodCategory::Reenactment),
        true,
    );
    let stages = match (anti_deepfake, swap, reenactment) {
        (true, Some(swap), Some(reen)) => {
            note(
                "declared.anti_deepfake=true".into(),
                format!(
                    "two-stage pipeline: transform targets with {} before reenacting with {}",
                    swap.name, reen.name
                ),
            );
            StagePlan::TwoStage {
                swap_profile: swap.clone(),
                reenactment_profile: reen.clone(),
            }
        }
        _ => StagePlan::SingleStage,
    };

    Ok(AttackPlan {
        flv_type,
        method,
        driving_recipe,
        stages,
        rationale,
    })
}

/// Record of one stage of the two-stage attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub method: String,
    pub selected_base_index: Option<usize>,
    pub candidates_tried: usize,
    /// Base picked by local quality instead of a vendor decision (the
    /// target offers no image-based FLV).
    pub used_local_heuristic: bool,
    pub passed_image_flv: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageOutcome {
    pub media: FacialMedia,
    pub transformed_target: FacialMedia,
    pub stage1: StageRecord,
    pub stage2: StageRecord,
}

fn image_as_driving(image: &FacialMedia) -> Result<FacialMedia, PlanError> {
    let mut frame = image.frames[0].clone();
    frame.seq_index = 0;
    FacialMedia::video(vec![frame]).map_err(|e| PlanError::Synthesis(e.into()))
}

fn video_frame_as_image(media: &FacialMedia) -> FacialMedia {
    FacialMedia {
        kind: MediaKind::Image,
        frames: vec![media.frames[0].clone()],
        audio: None,
        provenance: media.provenance.clone(),
    }
}

/// Stage 1: swap the target onto each base until one transformed image
/// passes the target's image-based FLV (first pass wins; best face score if
/// none). Stage 2: reenact the transformed image with the driving video.
#[allow(clippy::too_many_arguments)]
pub fn two_stage_attack(
    target: &FacialMedia,
    driving: &FacialMedia,
    swap_profile: &MethodProfile,
    reen_profile: &MethodProfile,
    passing_bases: &[FacialMedia],
    reference: &IdentityVector,
    api: &dyn FlvApi,
) -> Result<TwoStageOutcome, PlanError> {
    if swap_profile.category != MethodCategory::Swap {
        return Err(PlanError::WrongCategory(MethodCategory::Swap));
    }
    if reen_profile.category != MethodCategory::Reenactment {
        return Err(PlanError::WrongCategory(MethodCategory::Reenactment));
    }
    if passing_bases.is_empty() {
        return Err(PlanError::NoBases);
    }

    let mut best: Option<(usize, f64, FacialMedia)> = None;
    let mut tried = 0usize;
    let mut selected: Option<(usize, FacialMedia, bool)> = None;
    let mut local_heuristic = false;

    for (idx, base) in passing_bases.iter().enumerate() {
        let base_driving = image_as_driving(base)?;
        let transformed = video_frame_as_image(&synthesize(target, &base_driving, swap_profile)?);
        tried += 1;
        if local_heuristic {
            let q = transformed.frames[0].quality;
            if best.as_ref().map_or(true, |(_, bq, _)| q > *bq) {
                best = Some((idx, q, transformed));
            }
            continue;
        }
        match api.verify(FlvType::Image, &transformed, reference, None) {
            Ok(outcome) => {
                let score = outcome.face_match_score;
                if outcome.overall_pass() {
                    selected = Some((idx, transformed, true));
                    break;
                }
                if best.as_ref().map_or(true, |(_, bs, _)| score > *bs) {
                    best = Some((idx, score, transformed));
                }
            }
            Err(ApiError::Protocol { status: 422, .. }) => {
                // vendor has no image-based FLV: fall back to local quality
                local_heuristic = true;
                let q = transformed.frames[0].quality;
                best = Some((idx, q, transformed));
            }
            Err(e) => return Err(PlanError::Api(e.to_string())),
        }
    }

    let (base_index, transformed, passed) = match selected {
        Some((idx, media, passed)) => (idx, media, Some(passed)),
        None => {
            let (idx, _, media) = best.expect("at least one base was tried");
            (idx, media, if local_heuristic { None } else { Some(false) })
        }
    };

    let stage1 = StageRecord {
        method: swap_profile.name.clone(),
        selected_base_index: Some(base_index),
        candidates_tried: tried,
        used_local_heuristic: local_heuristic,
        passed_image_flv: passed,
    };
    let media = synthesize(&transformed, driving, reen_profile)?;
    let stage2 = StageRecord {
        method: reen_profile.name.clone(),
        selected_base_index: None,
        candidates_tried: 1,
        used_local_heuristic: false,
        passed_image_flv: None,
    };
    Ok(TwoStageOutcome {
        media,
        transformed_target: transformed,
        stage1,
        stage2,
    })
}
