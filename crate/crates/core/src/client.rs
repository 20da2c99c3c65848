//! Black-box client interface to an FLV API.
//!
//! The probing and planning engines only ever talk through [`FlvApi`], so
//! they see exactly what a remote attacker would: declared features,
//! challenges, and verification outcomes. The in-process implementation
//! maps engine errors to the same status codes the HTTP service uses,
//! keeping the two transports indistinguishable to callers.

use std::sync::Arc;

use thiserror::Error;

use crate::media::{FacialMedia, IdentityVector};
use crate::vendor::{ChallengeGrant, DeclaredFeatures, FlvType, VendorEngine, VerificationOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApiError {
    /// The API could not be reached at all; never interpreted as a verdict.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The API answered with a non-success status.
    #[error("API rejected the request with status {status}: {message}")]
    Protocol { status: u16, message: String },
    /// The API answered, but the payload did not parse.
    #[error("unintelligible API response: {0}")]
    InvalidResponse(String),
}

pub trait FlvApi: Send + Sync {
    fn declared_features(&self) -> Result<DeclaredFeatures, ApiError>;

    fn challenge(&self, flv_type: FlvType) -> Result<ChallengeGrant, ApiError>;

    fn verify(
        &self,
        flv_type: FlvType,
        media: &FacialMedia,
        reference: &IdentityVector,
        session_id: Option<&str>,
    ) -> Result<VerificationOutcome, ApiError>;
}

/// Direct in-process binding to a [`VendorEngine`].
#[derive(Debug, Clone)]
pub struct InProcessClient {
    engine: Arc<VendorEngine>,
}

impl InProcessClient {
    pub fn new(engine: Arc<VendorEngine>) -> Self {
        Self { engine }
    }

    pub fn engine(&self) -> &Arc<VendorEngine> {
        &self.engine
    }
}

impl FlvApi for InProcessClient {
    fn declared_features(&self) -> Result<DeclaredFeatures, ApiError> {
        Ok(self.engine.declared_features())
    }

    fn challenge(&self, flv_type: FlvType) -> Result<ChallengeGrant, ApiError> {
        self.engine.issue_challenge(flv_type).map_err(|e| ApiError::Protocol {
            status: e.http_status(),
            message: e.to_string(),
        })
    }

    fn verify(
        &self,
        flv_type: FlvType,
        media: &FacialMedia,
        reference: &IdentityVector,
        session_id: Option<&str>,
    ) -> Result<VerificationOutcome, ApiError> {
        self.engine
            .verify(flv_type, media, reference, session_id)
            .map_err(|e| ApiError::Protocol {
                status: e.http_status(),
                message: e.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::fixtures::*;
    use crate::vendor::VendorProfile;

    #[test]
    fn in_process_client_reports_protocol_statuses() {
        let engine = Arc::new(VendorEngine::new(VendorProfile::ift(), 1).unwrap());
        let client = InProcessClient::new(engine);
        let err = client.challenge(FlvType::Voice).unwrap_err();
        assert_eq!(
            err,
            ApiError::Protocol {
                status: 422,
                message: "FLV type voice is not supported by this vendor".into()
            }
        );
        let v = video(4, "c", 1);
        let reference = v.frames[0].identity.clone();
        let out = client.verify(FlvType::Silence, &v, &reference, None).unwrap();
        assert!(out.liveness_pass);
        // declared features carry no thresholds or detector internals
        let declared = client.declared_features().unwrap();
        assert_eq!(declared.name, "iFT");
    }
}
