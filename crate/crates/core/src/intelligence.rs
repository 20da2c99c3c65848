//! Black-box capability probing: builds baseline/perturbed probe datasets
//! from a media corpus, submits them through the [`FlvApi`] interface, and
//! infers which defenses the target actually deploys from bypass-rate
//! collapse between baseline and perturbed variants.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ApiError, FlvApi};
use crate::exec::Executor;
use crate::media::{FacialMedia, MediaError};
use crate::vendor::{Challenge, ChallengeGrant, DeclaredFeatures, FlvType, LipLanguage};

#[derive(Debug, Error, PartialEq)]
pub enum IntelError {
    #[error("corpus holds {have} usable videos, probe needs {need}")]
    InsufficientCorpus { have: usize, need: usize },
    #[error("probe size must be positive")]
    EmptyProbe,
    #[error("target is unreachable: {0}")]
    Transport(String),
    #[error("target offers no video-capable FLV type")]
    NoVideoType,
    #[error(transparent)]
    Media(#[from] MediaError),
}

// ---------------------------------------------------------------------------
// Probe sets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFeature {
    Coherence,
    LipLanguage,
    PresentationAttack,
}

pub const VARIANT_SCRAMBLED: &str = "scrambled";
pub const VARIANT_REPLAYED: &str = "replayed";
pub const VARIANT_MISMATCHED: &str = "mismatched";
pub const VARIANT_SILENT_LIPS: &str = "silent_lips";

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeVariant {
    pub label: String,
    pub items: Vec<FacialMedia>,
}

/// Baseline media plus positionally-derived perturbed variants.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    pub feature: ProbeFeature,
    pub baseline: Vec<FacialMedia>,
    pub perturbed: Vec<ProbeVariant>,
}

fn sample_videos(
    corpus: &[FacialMedia],
    n: usize,
    seed: u64,
) -> Result<Vec<FacialMedia>, IntelError> {
    if n == 0 {
        return Err(IntelError::EmptyProbe);
    }
    let usable: Vec<&FacialMedia> = corpus
        .iter()
        .filter(|m| m.is_video() && m.len() >= 2)
        .collect();
    if usable.len() < n {
        return Err(IntelError::InsufficientCorpus {
            have: usable.len(),
            need: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, usable.len(), n);
    Ok(picks.iter().map(|i| usable[i].clone()).collect())
}

/// Normal videos plus a frame-scrambled twin of each.
pub fn build_coherence_probe(
    corpus: &[FacialMedia],
    n: usize,
    seed: u64,
) -> Result<ProbeSet, IntelError> {
    let baseline = sample_videos(corpus, n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ COHERENCE_SALT);
    let scrambled = baseline
        .iter()
        .map(|v| v.scramble_frames(rng.random()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProbeSet {
        feature: ProbeFeature::Coherence,
        baseline,
        perturbed: vec![ProbeVariant {
            label: VARIANT_SCRAMBLED.into(),
            items: scrambled,
        }],
    })
}

/// Normal videos plus a replayed twin of each.
pub fn build_replay_probe(
    corpus: &[FacialMedia],
    n: usize,
    seed: u64,
    replay_strength: f64,
) -> Result<ProbeSet, IntelError> {
    let baseline = sample_videos(corpus, n, seed)?;
    let replayed = baseline
        .iter()
        .map(|v| v.make_replay(replay_strength))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProbeSet {
        feature: ProbeFeature::PresentationAttack,
        baseline,
        perturbed: vec![ProbeVariant {
            label: VARIANT_REPLAYED.into(),
            items: replayed,
        }],
    })
}

/// How a lip-probe item relates its audio to its lip track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LipFit {
    Matched,
    Mismatched,
    SilentLips,
}

impl LipFit {
    fn for_label(label: &str) -> LipFit {
        match label {
            VARIANT_MISMATCHED => LipFit::Mismatched,
            VARIANT_SILENT_LIPS => LipFit::SilentLips,
            _ => LipFit::Matched,
        }
    }
}

/// Stamps a video with an audio track for `digits` and the lip behavior of
/// the variant. Used both at probe build time (seeded digits) and at
/// submission time (challenge digits); the lip track is fully rewritten, so
/// refitting is idempotent.
fn fit_lip_variant(
    video: &FacialMedia,
    fit: LipFit,
    digits: &[u8],
) -> Result<FacialMedia, MediaError> {
    let voiced = video.import_audio(digits, 0.95)?;
    match fit {
        LipFit::Matched => voiced.set_matched_lips(digits),
        LipFit::Mismatched => {
            let other: Vec<u8> = digits.iter().map(|d| (d + 1) % 10).collect();
            let moved = voiced.set_matched_lips(digits)?;
            // keep the audio speaking `digits` but articulate other digits
            let mut frames = moved.frames;
            for f in &mut frames {
                if let Some(p) = f.lip_pattern {
                    let pos = digits.iter().position(|&d| d == p).unwrap_or(0);
                    f.lip_pattern = Some(other[pos.min(other.len() - 1)]);
                }
            }
            Ok(FacialMedia {
                kind: moved.kind,
                frames,
                audio: voiced.audio.clone(),
                provenance: voiced.provenance.clone(),
            })
        }
        LipFit::SilentLips => Ok(voiced.clear_lips()),
    }
}

/// Baseline = audio with matched lips; variants = matched audio with lips
/// articulating different digits, and matched audio with no lip movement.
pub fn build_lip_probe(
    corpus: &[FacialMedia],
    digits_per_item: usize,
    n: usize,
    seed: u64,
) -> Result<ProbeSet, IntelError> {
    if digits_per_item == 0 {
        return Err(IntelError::EmptyProbe);
    }
    let sampled = sample_videos(corpus, n, seed)?;
    for v in &sampled {
        if v.len() < digits_per_item {
            return Err(IntelError::InsufficientCorpus {
                have: v.len(),
                need: digits_per_item,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ LIP_BUILD_SALT);
    let mut baseline = Vec::with_capacity(n);
    let mut mismatched = Vec::with_capacity(n);
    let mut silent = Vec::with_capacity(n);
    for v in &sampled {
        let digits: Vec<u8> = (0..digits_per_item).map(|_| rng.random_range(0..=9)).collect();
        baseline.push(fit_lip_variant(v, LipFit::Matched, &digits)?);
        mismatched.push(fit_lip_variant(v, LipFit::Mismatched, &digits)?);
        silent.push(fit_lip_variant(v, LipFit::SilentLips, &digits)?);
    }
    Ok(ProbeSet {
        feature: ProbeFeature::LipLanguage,
        baseline,
        perturbed: vec![
            ProbeVariant {
                label: VARIANT_MISMATCHED.into(),
                items: mismatched,
            },
            ProbeVariant {
                label: VARIANT_SILENT_LIPS.into(),
                items: silent,
            },
        ],
    })
}

// salts keep the derived rng streams of the probe builders apart
const COHERENCE_SALT: u64 = 0x5eed_c0de;
const LIP_BUILD_SALT: u64 = 0x11f_5eed;
const REPLAY_SALT: u64 = 0x04e9_1a77;
const LIP_PROBE_SALT: u64 = 0x071e_22b3;

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeployVerdict {
    Deployed,
    NotDeployed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipVerdict {
    None,
    MovementOnly,
    FullMatch,
    Inconclusive,
}

impl LipVerdict {
    pub fn matches_level(self, level: LipLanguage) -> bool {
        matches!(
            (self, level),
            (LipVerdict::None, LipLanguage::None)
                | (LipVerdict::MovementOnly, LipLanguage::MovementOnly)
                | (LipVerdict::FullMatch, LipLanguage::FullMatch)
        )
    }
}

/// Decision thresholds formalizing "much lower than" for rate collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Variant rate at or below this fraction of baseline counts as collapsed.
    pub deployed_ratio: f64,
    /// Variant rate at or above this fraction of baseline counts as intact.
    pub not_deployed_ratio: f64,
    /// Minimum baseline rate for a Deployed call to be trustworthy.
    pub baseline_floor: f64,
    /// Items per probe dataset.
    pub probe_n: usize,
    /// Digits per lip-probe item at build time.
    pub digits_per_item: usize,
    pub replay_strength: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            deployed_ratio: 0.5,
            not_deployed_ratio: 0.8,
            baseline_floor: 0.3,
            probe_n: 20,
            digits_per_item: 4,
            replay_strength: 0.9,
        }
    }
}

impl ProbeConfig {
    fn collapsed(&self, baseline: f64, variant: f64) -> bool {
        variant <= self.deployed_ratio * baseline && baseline >= self.baseline_floor
    }

    fn intact(&self, baseline: f64, variant: f64) -> bool {
        variant >= self.not_deployed_ratio * baseline
    }

    fn deploy_verdict(&self, baseline: f64, variant: f64) -> (DeployVerdict, Option<String>) {
        if self.collapsed(baseline, variant) {
            (DeployVerdict::Deployed, None)
        } else if self.intact(baseline, variant) {
            (DeployVerdict::NotDeployed, None)
        } else {
            (
                DeployVerdict::Inconclusive,
                Some(format!(
                    "variant rate {variant:.3} in the dead band of baseline {baseline:.3}"
                )),
            )
        }
    }
}

/// Verdict of one probe plus the raw rates that back it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFinding {
    pub feature: ProbeFeature,
    pub deploy: Option<DeployVerdict>,
    pub lip: Option<LipVerdict>,
    pub reason: Option<String>,
    /// variant label -> bypass rate ("baseline" included).
    pub rates: BTreeMap<String, f64>,
    pub sample_size: usize,
}

// ---------------------------------------------------------------------------
// Submission
// ---------------------------------------------------------------------------

fn video_probe_type(declared: &DeclaredFeatures) -> Result<FlvType, IntelError> {
    for t in [FlvType::Silence, FlvType::Voice, FlvType::Action] {
        if declared.supported_types.contains(&t) {
            return Ok(t);
        }
    }
    Err(IntelError::NoVideoType)
}

/// Submits one variant list and returns its bypass rate.
///
/// Bypass means passing the liveness stage; the challenge requirement is
/// counted only for lip probes (where it carries the signal being measured).
/// Challenges are granted sequentially, then verification fans out through
/// the executor; results aggregate by count, so ordering cannot matter.
fn bypass_rate(
    api: &dyn FlvApi,
    items: &[FacialMedia],
    probe_type: FlvType,
    feature: ProbeFeature,
    variant_label: &str,
    exec: &Executor,
) -> Result<f64, IntelError> {
    let grants: Vec<Option<ChallengeGrant>> = if probe_type.needs_session() {
        let mut grants = Vec::with_capacity(items.len());
        for _ in items {
            match api.challenge(probe_type) {
                Ok(g) => grants.push(Some(g)),
                Err(ApiError::Transport(e)) => return Err(IntelError::Transport(e)),
                Err(e) => return Err(IntelError::Transport(e.to_string())),
            }
        }
        grants
    } else {
        vec![None; items.len()]
    };

    let pairs: Vec<(&FacialMedia, &Option<ChallengeGrant>)> =
        items.iter().zip(grants.iter()).collect();
    let results: Vec<Result<bool, IntelError>> = exec.map(&pairs, |(item, grant)| {
        submit_one(api, item, probe_type, feature, variant_label, grant.as_ref())
    });
    let mut passes = 0usize;
    for r in results {
        if r? {
            passes += 1;
        }
    }
    Ok(passes as f64 / items.len() as f64)
}

fn submit_one(
    api: &dyn FlvApi,
    item: &FacialMedia,
    probe_type: FlvType,
    feature: ProbeFeature,
    variant_label: &str,
    grant: Option<&ChallengeGrant>,
) -> Result<bool, IntelError> {
    let mut media = item.clone();
    let mut session_id = None;
    if let Some(grant) = grant {
        session_id = Some(grant.session_id.as_str());
        if let Challenge::Digits(digits) = &grant.challenge {
            // voice submissions must speak the challenged digits
            media = match feature {
                ProbeFeature::LipLanguage => {
                    fit_lip_variant(&media, LipFit::for_label(variant_label), digits)?
                }
                _ => media.import_audio(digits, 0.95)?,
            };
        }
    }
    let reference = media.frames[0].identity.clone();
    match api.verify(probe_type, &media, &reference, session_id) {
        Ok(outcome) => {
            let requirement_ok =
                feature != ProbeFeature::LipLanguage || outcome.requirement_met;
            Ok(requirement_ok && outcome.liveness_pass)
        }
        // a protocol rejection is a vendor "no", not a transport problem
        Err(ApiError::Protocol { .. }) => Ok(false),
        Err(ApiError::Transport(e)) => Err(IntelError::Transport(e)),
        Err(ApiError::InvalidResponse(e)) => Err(IntelError::Transport(e)),
    }
}

/// Runs one probe set against the target and decides the verdict from the
/// per-variant bypass rates. Transport failures yield an Inconclusive
/// finding with the reason attached, never a verdict.
pub fn infer_feature(
    api: &dyn FlvApi,
    probe: &ProbeSet,
    probe_type: FlvType,
    cfg: &ProbeConfig,
    exec: &Executor,
) -> FeatureFinding {
    let mut rates = BTreeMap::new();
    let sample_size = probe.baseline.len();
    let run = |items: &[FacialMedia], label: &str| {
        bypass_rate(api, items, probe_type, probe.feature, label, exec)
    };

    let baseline = match run(&probe.baseline, "baseline") {
        Ok(r) => r,
        Err(e) => return inconclusive_finding(probe.feature, e.to_string(), rates, sample_size),
    };
    rates.insert("baseline".to_string(), baseline);
    for variant in &probe.perturbed {
        match run(&variant.items, &variant.label) {
            Ok(r) => {
                rates.insert(variant.label.clone(), r);
            }
            Err(e) => {
                return inconclusive_finding(probe.feature, e.to_string(), rates, sample_size)
            }
        }
    }

    match probe.feature {
        ProbeFeature::Coherence | ProbeFeature::PresentationAttack => {
            let label = if probe.feature == ProbeFeature::Coherence {
                VARIANT_SCRAMBLED
            } else {
                VARIANT_REPLAYED
            };
            let (verdict, reason) = cfg.deploy_verdict(baseline, rates[label]);
            FeatureFinding {
                feature: probe.feature,
                deploy: Some(verdict),
                lip: None,
                reason,
                rates,
                sample_size,
            }
        }
        ProbeFeature::LipLanguage => {
            let mismatched = rates[VARIANT_MISMATCHED];
            let silent = rates[VARIANT_SILENT_LIPS];
            let (lip, reason) = if cfg.collapsed(baseline, mismatched)
                && cfg.collapsed(baseline, silent)
            {
                (LipVerdict::FullMatch, None)
            } else if cfg.collapsed(baseline, silent) && cfg.intact(baseline, mismatched) {
                (LipVerdict::MovementOnly, None)
            } else if cfg.intact(baseline, mismatched) && cfg.intact(baseline, silent) {
                (LipVerdict::None, None)
            } else {
                (
                    LipVerdict::Inconclusive,
                    Some(format!(
                        "rate pattern baseline={baseline:.3} mismatched={mismatched:.3} silent={silent:.3} fits no level"
                    )),
                )
            };
            FeatureFinding {
                feature: probe.feature,
                deploy: None,
                lip: Some(lip),
                reason,
                rates,
                sample_size,
            }
        }
    }
}

fn inconclusive_finding(
    feature: ProbeFeature,
    reason: String,
    rates: BTreeMap<String, f64>,
    sample_size: usize,
) -> FeatureFinding {
    let (deploy, lip) = match feature {
        ProbeFeature::LipLanguage => (None, Some(LipVerdict::Inconclusive)),
        _ => (Some(DeployVerdict::Inconclusive), None),
    };
    FeatureFinding {
        feature,
        deploy,
        lip,
        reason: Some(reason),
        rates,
        sample_size,
    }
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredCapabilities {
    pub coherence: DeployVerdict,
    pub lip_language: LipVerdict,
    pub presentation_attack: DeployVerdict,
}

/// A declared-vs-inferred disagreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contradiction {
    pub feature: String,
    pub declared: String,
    pub inferred: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntelligenceReport {
    pub declared: DeclaredFeatures,
    pub inferred: InferredCapabilities,
    /// "feature/variant" -> bypass rate.
    pub raw_rates: BTreeMap<String, f64>,
    pub sample_sizes: BTreeMap<String, usize>,
    pub inconclusive_reasons: BTreeMap<String, String>,
    pub contradictions: Vec<Contradiction>,
}

/// Fetches the declaration, runs all three probes and assembles the report
/// with contradictions marked. Lip probes need voice-based FLV; when the
/// target does not offer it, no lip detection can exist and the verdict is
/// None by construction.
pub fn collect_intelligence(
    api: &dyn FlvApi,
    corpus: &[FacialMedia],
    cfg: &ProbeConfig,
    seed: u64,
    exec: &Executor,
) -> Result<IntelligenceReport, IntelError> {
    let declared = match api.declared_features() {
        Ok(d) => d,
        Err(e) => return Err(IntelError::Transport(e.to_string())),
    };
    let probe_type = video_probe_type(&declared)?;

    let mut raw_rates = BTreeMap::new();
    let mut sample_sizes = BTreeMap::new();
    let mut reasons = BTreeMap::new();
    let mut merge = |finding: &FeatureFinding, name: &str| {
        for (label, rate) in &finding.rates {
            raw_rates.insert(format!("{name}/{label}"), *rate);
        }
        sample_sizes.insert(name.to_string(), finding.sample_size);
        if let Some(reason) = &finding.reason {
            reasons.insert(name.to_string(), reason.clone());
        }
    };

    let coherence_probe = build_coherence_probe(corpus, cfg.probe_n, seed)?;
    let coherence = infer_feature(api, &coherence_probe, probe_type, cfg, exec);
    merge(&coherence, "coherence");

    let replay_probe =
        build_replay_probe(corpus, cfg.probe_n, seed ^ REPLAY_SALT, cfg.replay_strength)?;
    let replay = infer_feature(api, &replay_probe, probe_type, cfg, exec);
    merge(&replay, "presentation_attack");

    let lip_language = if declared.supported_types.contains(&FlvType::Voice) {
        let lip_probe =
            build_lip_probe(corpus, cfg.digits_per_item, cfg.probe_n, seed ^ LIP_PROBE_SALT)?;
        let lip = infer_feature(api, &lip_probe, FlvType::Voice, cfg, exec);
        merge(&lip, "lip_language");
        lip.lip.unwrap_or(LipVerdict::Inconclusive)
    } else {
        // no voice FLV surface means no lip detection can be deployed
        LipVerdict::None
    };

    let inferred = InferredCapabilities {
        coherence: coherence.deploy.unwrap_or(DeployVerdict::Inconclusive),
        lip_language,
        presentation_attack: replay.deploy.unwrap_or(DeployVerdict::Inconclusive),
    };
    let contradictions = find_contradictions(&declared, &inferred);
    Ok(IntelligenceReport {
        declared,
        inferred,
        raw_rates,
        sample_sizes,
        inconclusive_reasons: reasons,
        contradictions,
    })
}

fn find_contradictions(
    declared: &DeclaredFeatures,
    inferred: &InferredCapabilities,
) -> Vec<Contradiction> {
    let mut out = Vec::new();
    let mut flag = |feature: &str, declared: String, inferred: String| {
        out.push(Contradiction {
            feature: feature.to_string(),
            declared,
            inferred,
        });
    };
    match (declared.coherence_detection, inferred.coherence) {
        (true, DeployVerdict::NotDeployed) => {
            flag("coherence_detection", "deployed".into(), "not_deployed".into())
        }
        (false, DeployVerdict::Deployed) => {
            flag("coherence_detection", "not_deployed".into(), "deployed".into())
        }
        _ => {}
    }
    match (declared.replay_detection, inferred.presentation_attack) {
        (true, DeployVerdict::NotDeployed) => {
            flag("replay_detection", "deployed".into(), "not_deployed".into())
        }
        (false, DeployVerdict::Deployed) => {
            flag("replay_detection", "not_deployed".into(), "deployed".into())
        }
        _ => {}
    }
    if inferred.lip_language != LipVerdict::Inconclusive
        && !inferred.lip_language.matches_level(declared.lip_language)
    {
        flag(
            "lip_language",
            declared.lip_language.to_string(),
            format!("{:?}", inferred.lip_language).to_lowercase(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::InProcessClient;
    use crate::media::fixtures::video;
    use crate::media::Provenance;
    use crate::vendor::{VendorEngine, VendorProfile};
    use std::sync::Arc;

    fn corpus(n: usize) -> Vec<FacialMedia> {
        (0..n).map(|i| video(18, &format!("clip{i}"), i as u64)).collect()
    }

    fn client_for(profile: VendorProfile) -> InProcessClient {
        InProcessClient::new(Arc::new(VendorEngine::new(profile, 99).unwrap()))
    }

    #[test]
    fn coherence_probe_pairs_baseline_and_scrambled() {
        let c = corpus(12);
        let p = build_coherence_probe(&c, 5, 3).unwrap();
        assert_eq!(p.baseline.len(), 5);
        assert_eq!(p.perturbed.len(), 1);
        assert_eq!(p.perturbed[0].items.len(), 5);
        for (b, s) in p.baseline.iter().zip(&p.perturbed[0].items) {
            let mut want: Vec<u32> = b.frames.iter().map(|f| f.seq_index).collect();
            let mut got: Vec<u32> = s.frames.iter().map(|f| f.seq_index).collect();
            want.sort();
            got.sort();
            assert_eq!(want, got);
        }
        // determinism and the n=0 precondition
        assert_eq!(p, build_coherence_probe(&c, 5, 3).unwrap());
        assert!(matches!(
            build_coherence_probe(&c, 0, 3),
            Err(IntelError::EmptyProbe)
        ));
        assert!(matches!(
            build_coherence_probe(&c, 13, 3),
            Err(IntelError::InsufficientCorpus { .. })
        ));
    }

    #[test]
    fn replay_probe_marks_only_the_variant() {
        let c = corpus(8);
        let p = build_replay_probe(&c, 4, 1, 0.9).unwrap();
        for item in &p.perturbed[0].items {
            assert_eq!(item.provenance, Provenance::Replayed);
        }
        for (b, r) in p.baseline.iter().zip(&p.perturbed[0].items) {
            assert_eq!(b.provenance, Provenance::Genuine);
            assert_eq!(b.len(), r.len());
        }
    }

    #[test]
    fn lip_probe_variants_behave_per_level() {
        use crate::vendor::check_voice_requirement;
        let c = corpus(8);
        let p = build_lip_probe(&c, 3, 4, 7).unwrap();
        let digits: Vec<Vec<u8>> = p
            .baseline
            .iter()
            .map(|m| m.audio.as_ref().unwrap().tokens.clone())
            .collect();

        let full = VendorProfile::cw();
        let mut movement = VendorProfile::cw();
        movement.lip_language = LipLanguage::MovementOnly;
        let mut none = VendorProfile::cw();
        none.lip_language = LipLanguage::None;

        for (i, d) in digits.iter().enumerate() {
            let matched = &p.baseline[i];
            let mismatched = &p.perturbed[0].items[i];
            let silent = &p.perturbed[1].items[i];
            assert!(check_voice_requirement(&full, matched, d).unwrap().pass);
            assert!(!check_voice_requirement(&full, mismatched, d).unwrap().pass);
            assert!(!check_voice_requirement(&full, silent, d).unwrap().pass);
            assert!(check_voice_requirement(&movement, mismatched, d).unwrap().pass);
            assert!(!check_voice_requirement(&movement, silent, d).unwrap().pass);
            for v in [matched, mismatched, silent] {
                assert!(check_voice_requirement(&none, v, d).unwrap().pass);
            }
        }
    }

    #[test]
    fn coherence_verdicts_match_ground_truth() {
        let c = corpus(24);
        let cfg = ProbeConfig::default();
        let exec = Executor::sequential();

        let mut on = VendorProfile::bd();
        on.coherence_detection = true;
        let api = client_for(on);
        let probe = build_coherence_probe(&c, cfg.probe_n, 5).unwrap();
        let finding = infer_feature(&api, &probe, FlvType::Silence, &cfg, &exec);
        assert_eq!(finding.deploy, Some(DeployVerdict::Deployed));
        assert_eq!(finding.rates["baseline"], 1.0);
        assert_eq!(finding.rates[VARIANT_SCRAMBLED], 0.0);

        let api = client_for(VendorProfile::bd());
        let finding = infer_feature(&api, &probe, FlvType::Silence, &cfg, &exec);
        assert_eq!(finding.deploy, Some(DeployVerdict::NotDeployed));
    }

    #[test]
    fn declared_full_match_implementing_none_is_contradicted() {
        let c = corpus(30);
        let cfg = ProbeConfig::default();
        let exec = Executor::sequential();
        let api = client_for(VendorProfile::bd());
        let report = collect_intelligence(&api, &c, &cfg, 11, &exec).unwrap();
        assert_eq!(report.declared.lip_language, LipLanguage::FullMatch);
        assert_eq!(report.inferred.lip_language, LipVerdict::None);
        assert!(report
            .contradictions
            .iter()
            .any(|c| c.feature == "lip_language"));
        // replay detection is real and inferred as such
        assert_eq!(report.inferred.presentation_attack, DeployVerdict::Deployed);
        assert_eq!(report.inferred.coherence, DeployVerdict::NotDeployed);
        // deterministic given seed
        let again = collect_intelligence(&api, &c, &cfg, 11, &exec).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn parallel_submission_matches_sequential() {
        let c = corpus(30);
        let cfg = ProbeConfig::default();
        let api = client_for(VendorProfile::tc());
        let seq = collect_intelligence(&api, &c, &cfg, 3, &Executor::sequential()).unwrap();
        let par = collect_intelligence(
            &api,
            &c,
            &cfg,
            3,
            &Executor::new(crate::exec::ExecMode::with_limit(4)),
        )
        .unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.inferred.lip_language, LipVerdict::MovementOnly);
    }

    #[test]
    fn all_presets_probe_to_their_hidden_configuration() {
        let c = corpus(30);
        let cfg = ProbeConfig::default();
        let exec = Executor::sequential();
        for profile in VendorProfile::all_presets() {
            let name = profile.name.clone();
            let truth_lip = profile.lip_language;
            let truth_replay = profile.replay_detection;
            let truth_coherence = profile.coherence_detection;
            let has_voice = profile.supported_types.contains(&FlvType::Voice);
            let api = client_for(profile);
            let report = collect_intelligence(&api, &c, &cfg, 17, &exec).unwrap();
            assert_eq!(
                report.inferred.coherence,
                if truth_coherence { DeployVerdict::Deployed } else { DeployVerdict::NotDeployed },
                "{name} coherence"
            );
            assert_eq!(
                report.inferred.presentation_attack,
                if truth_replay { DeployVerdict::Deployed } else { DeployVerdict::NotDeployed },
                "{name} replay"
            );
            if has_voice {
                assert!(report.inferred.lip_language.matches_level(truth_lip), "{name} lip");
            } else {
                assert_eq!(report.inferred.lip_language, LipVerdict::None, "{name} lip");
            }
        }
    }
}
