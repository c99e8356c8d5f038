// SPDX-License-Identifier: Apache-2.0

//! Four-phase (return-to-zero) handshake between adjacent blocks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum HandshakeState {
    #[default]
    Idle,
    ReqUp,
    AckUp,
    ReqDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HandshakeEvent {
    RaiseReq,
    RaiseAck,
    DropReq,
    DropAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("illegal handshake event {event:?} in phase {state:?}")]
pub struct HandshakeError {
    pub state: HandshakeState,
    pub event: HandshakeEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub next: HandshakeState,
    /// The datum crosses the link on this transition (entering `AckUp`).
    pub commit: bool,
    /// This transition closes a full cycle (back to `Idle`).
    pub cycle_complete: bool,
}

pub fn handshake_advance(state: HandshakeState, event: HandshakeEvent) -> Result<Transition, HandshakeError> {
    use HandshakeEvent::*;
    use HandshakeState::*;
    let next = match (state, event) {
        (Idle, RaiseReq) => ReqUp,
        (ReqUp, RaiseAck) => AckUp,
        (AckUp, DropReq) => ReqDown,
        (ReqDown, DropAck) => Idle,
        _ => return Err(HandshakeError { state, event }),
    };
    Ok(Transition { next, commit: next == AckUp, cycle_complete: next == Idle })
}

/// A link holding its phase and the number of data committed across it.
#[derive(Debug, Clone, Default)]
pub struct Link {
    pub state: HandshakeState,
    pub transfers: u64,
    pub phases: u64,
}

impl Link {
    pub fn advance(&mut self, event: HandshakeEvent) -> Result<Transition, HandshakeError> {
        let t = handshake_advance(self.state, event)?;
        self.state = t.next;
        self.phases += 1;
        if t.commit {
            self.transfers += 1;
        }
        Ok(t)
    }
}
