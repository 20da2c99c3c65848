//! Challenge generation and the single-use session store backing the
//! voice- and action-based verification flows.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::engine::VerifyError;
use super::profile::{ActionKind, FlvType, VendorProfile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Challenge {
    Digits(Vec<u8>),
    Actions(Vec<ActionKind>),
}

impl Challenge {
    pub fn len(&self) -> usize {
        match self {
            Challenge::Digits(d) => d.len(),
            Challenge::Actions(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn digits(&self) -> Option<&[u8]> {
        match self {
            Challenge::Digits(d) => Some(d),
            _ => None,
        }
    }

    pub fn actions(&self) -> Option<&[ActionKind]> {
        match self {
            Challenge::Actions(a) => Some(a),
            _ => None,
        }
    }
}

/// What the challenge endpoint hands back to a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChallengeGrant {
    pub session_id: String,
    pub challenge: Challenge,
    pub ttl_seconds: u64,
}

/// Server-side session state.
#[derive(Debug, Clone)]
pub struct ChallengeSession {
    pub session_id: String,
    pub flv_type: FlvType,
    pub challenge: Challenge,
    pub issued_at: Instant,
    pub ttl: Duration,
}

impl ChallengeSession {
    pub fn expired(&self, now: Instant) -> bool {
        now.duration_since(self.issued_at) > self.ttl
    }
}

/// Deterministic challenge content for a seed: lengths drawn uniformly from
/// the profile's ranges, digits uniform over 0-9, actions uniform over the
/// profile's action set.
pub fn generate_challenge(
    profile: &VendorProfile,
    flv_type: FlvType,
    seed: u64,
) -> Result<Challenge, VerifyError> {
    if !profile.supported_types.contains(&flv_type) {
        return Err(VerifyError::UnsupportedType(flv_type));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match flv_type {
        FlvType::Voice => {
            let range = profile.voice_code_length_range;
            let len = rng.random_range(range.min..=range.max) as usize;
            Ok(Challenge::Digits(
                (0..len).map(|_| rng.random_range(0..=9u8)).collect(),
            ))
        }
        FlvType::Action => {
            let range = profile.action_length_range;
            let len = rng.random_range(range.min..=range.max) as usize;
            let pool: Vec<ActionKind> = profile.action_set.iter().copied().collect();
            Ok(Challenge::Actions(
                (0..len)
                    .map(|_| pool[rng.random_range(0..pool.len())])
                    .collect(),
            ))
        }
        _ => Err(VerifyError::ChallengeNotApplicable(flv_type)),
    }
}

/// Concurrent store of outstanding sessions. Sessions expire after their
/// TTL and are consumed by the first verification that uses them.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, ChallengeSession>>,
    counter: AtomicU64,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn issue(
        &self,
        profile: &VendorProfile,
        flv_type: FlvType,
        seed: u64,
    ) -> Result<ChallengeGrant, VerifyError> {
        let challenge = generate_challenge(profile, flv_type, seed)?;
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let session_id = format!("sess-{n:016x}");
        let session = ChallengeSession {
            session_id: session_id.clone(),
            flv_type,
            challenge: challenge.clone(),
            issued_at: Instant::now(),
            ttl: Duration::from_secs(profile.session_ttl_seconds),
        };
        self.sessions
            .lock()
            .expect("session store lock")
            .insert(session_id.clone(), session);
        Ok(ChallengeGrant {
            session_id,
            challenge,
            ttl_seconds: profile.session_ttl_seconds,
        })
    }

    /// Removes and returns the session if it is live and matches the FLV
    /// type. Expired sessions are dropped; a type mismatch leaves the
    /// session in place.
    pub fn take_valid(
        &self,
        session_id: &str,
        flv_type: FlvType,
    ) -> Result<ChallengeSession, VerifyError> {
        let mut sessions = self.sessions.lock().expect("session store lock");
        let session = sessions
            .get(session_id)
            .ok_or(VerifyError::UnknownSession)?;
        if session.expired(Instant::now()) {
            sessions.remove(session_id);
            return Err(VerifyError::ExpiredSession);
        }
        if session.flv_type != flv_type {
            return Err(VerifyError::SessionTypeMismatch);
        }
        Ok(sessions.remove(session_id).expect("present"))
    }

    pub fn purge_expired(&self) {
        let now = Instant::now();
        self.sessions
            .lock()
            .expect("session store lock")
            .retain(|_, s| !s.expired(now));
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
