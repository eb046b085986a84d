//! Chain-derived custody: a left fold of every store, grant and revoke
//! envelope, in chain order, into per-content ownership and access state.
//!
//! Policy:
//! - The first `Store` (or, for content never stored, the first `Grant`)
//!   fixes the owner. Ownership never changes afterwards.
//! - Only the owner's grants and revokes take effect. Everything else is kept
//!   in history, flagged, without touching state.
//! - A revoked subject can be granted again.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chain::DataRecord;
use crate::codec::OpKind;
use crate::ids::{Address, ContentId, Txid};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CustodyError {
    #[error("event at {got:?} does not follow {last:?}")]
    OutOfOrderEvent { last: (u64, u32), got: (u64, u32) },
    #[error("unknown content {0}")]
    UnknownContent(ContentId),
    #[error("data record without inputs at {0:?}")]
    MissingActor((u64, u32)),
    #[error("content {0} is known only through grants; it has no store event")]
    NoStoreEvent(ContentId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustodyEvent {
    pub height: u64,
    pub tx_index: u32,
    pub txid: Txid,
    pub timestamp: u64,
    pub op: OpKind,
    pub content_id: ContentId,
    /// Owner of the transaction's first input.
    pub actor: Address,
    /// First value-output address other than the actor's.
    pub subject: Option<Address>,
}

impl CustodyEvent {
    pub fn position(&self) -> (u64, u32) {
        (self.height, self.tx_index)
    }

    pub fn from_record(record: &DataRecord) -> Result<Self, CustodyError> {
        let actor = *record
            .sender_addresses
            .first()
            .ok_or(CustodyError::MissingActor((record.height, record.tx_index)))?;
        let subject = record.output_addresses.iter().find(|a| **a != actor).copied();
        Ok(Self {
            height: record.height,
            tx_index: record.tx_index,
            txid: record.txid,
            timestamp: record.timestamp,
            op: record.envelope.op,
            content_id: record.envelope.content_id,
            actor,
            subject,
        })
    }
}

/// What an event did to custody state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventEffect {
    /// Established the owner.
    Claimed,
    /// A store of content that already has an owner.
    DuplicateClaim,
    Granted,
    Revoked,
    /// Issued by somebody other than the owner.
    Unauthorized,
    /// Authorized but changed nothing (already granted, never granted, or no subject).
    NoOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    #[serde(flatten)]
    pub event: CustodyEvent,
    pub effect: EventEffect,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentCustody {
    pub owner: Option<Address>,
    pub active_grants: BTreeSet<Address>,
    /// Every subject of an effective grant, past or present.
    pub ever_granted: BTreeSet<Address>,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessStatus {
    Owner,
    Granted,
    Revoked,
    NoRelation,
}

impl std::fmt::Display for AccessStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AccessStatus::Owner => "Owner",
            AccessStatus::Granted => "Granted",
            AccessStatus::Revoked => "Revoked",
            AccessStatus::NoRelation => "NoRelation",
        })
    }
}

/// Chain coordinates of the earliest store of a content id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistenceProof {
    pub height: u64,
    pub timestamp: u64,
    pub txid: Txid,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CustodyLedger {
    contents: BTreeMap<ContentId, ContentCustody>,
    last_position: Option<(u64, u32)>,
}

impl CustodyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Left fold of [`Self::apply_event`] over scan results.
    pub fn rebuild<'a>(records: impl IntoIterator<Item = &'a DataRecord>) -> Result<Self, CustodyError> {
        let mut ledger = Self::new();
        for record in records {
            ledger.apply_event(CustodyEvent::from_record(record)?)?;
        }
        Ok(ledger)
    }

    pub fn apply_event(&mut self, event: CustodyEvent) -> Result<EventEffect, CustodyError> {
        let position = event.position();
        if let Some(last) = self.last_position {
            if position <= last {
                return Err(CustodyError::OutOfOrderEvent { last, got: position });
            }
        }
        self.last_position = Some(position);

        let content = self.contents.entry(event.content_id).or_default();
        let effect = match (event.op, content.owner) {
            (OpKind::Store, None) => {
                content.owner = Some(event.actor);
                EventEffect::Claimed
            }
            (OpKind::Store, Some(_)) => EventEffect::DuplicateClaim,
            (OpKind::Grant, None) => {
                content.owner = Some(event.actor);
                match event.subject {
                    Some(subject) => {
                        content.active_grants.insert(subject);
                        content.ever_granted.insert(subject);
                        EventEffect::Granted
                    }
                    None => EventEffect::Claimed,
                }
            }
            (_, None) => EventEffect::Unauthorized,
            (_, Some(owner)) if owner != event.actor => EventEffect::Unauthorized,
            (OpKind::Grant, Some(_)) => match event.subject {
                Some(subject) if content.active_grants.insert(subject) => {
                    content.ever_granted.insert(subject);
                    EventEffect::Granted
                }
                _ => EventEffect::NoOp,
            },
            (OpKind::Revoke, Some(_)) => match event.subject {
                Some(subject) if content.active_grants.remove(&subject) => EventEffect::Revoked,
                _ => EventEffect::NoOp,
            },
        };
        content.history.push(HistoryEntry { event, effect });
        Ok(effect)
    }

    pub fn content(&self, content_id: &ContentId) -> Result<&ContentCustody, CustodyError> {
        self.contents
            .get(content_id)
            .ok_or(CustodyError::UnknownContent(*content_id))
    }

    pub fn contents(&self) -> impl Iterator<Item = (&ContentId, &ContentCustody)> {
        self.contents.iter()
    }

    pub fn owner(&self, content_id: &ContentId) -> Result<Option<Address>, CustodyError> {
        Ok(self.content(content_id)?.owner)
    }

    pub fn active_grants(&self, content_id: &ContentId) -> Result<&BTreeSet<Address>, CustodyError> {
        Ok(&self.content(content_id)?.active_grants)
    }

    pub fn history(&self, content_id: &ContentId) -> Result<&[HistoryEntry], CustodyError> {
        Ok(&self.content(content_id)?.history)
    }

    pub fn query_access(&self, content_id: &ContentId, address: &Address) -> Result<AccessStatus, CustodyError> {
        let content = self.content(content_id)?;
        Ok(if content.owner.as_ref() == Some(address) {
            AccessStatus::Owner
        } else if content.active_grants.contains(address) {
            AccessStatus::Granted
        } else if content.ever_granted.contains(address) {
            AccessStatus::Revoked
        } else {
            AccessStatus::NoRelation
        })
    }

    pub fn proof_of_existence(&self, content_id: &ContentId) -> Result<ExistenceProof, CustodyError> {
        self.content(content_id)?
            .history
            .iter()
            .find(|h| h.event.op == OpKind::Store)
            .map(|h| ExistenceProof {
                height: h.event.height,
                timestamp: h.event.timestamp,
                txid: h.event.txid,
            })
            .ok_or(CustodyError::NoStoreEvent(*content_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Address = Address([0xa; 20]);
    const B: Address = Address([0xb; 20]);
    const C: Address = Address([0xc; 20]);
    const H: ContentId = ContentId([1; 32]);

    fn ev(n: u64, op: OpKind, actor: Address, subject: Option<Address>) -> CustodyEvent {
        CustodyEvent {
            height: n,
            tx_index: 1,
            txid: Txid([n as u8; 32]),
            timestamp: 1000 + n,
            op,
            content_id: H,
            actor,
            subject,
        }
    }

    fn fold(events: Vec<CustodyEvent>) -> CustodyLedger {
        let mut l = CustodyLedger::new();
        for e in events {
            l.apply_event(e).unwrap();
        }
        l
    }

    #[test]
    fn store_sets_owner() {
        let l = fold(vec![ev(1, OpKind::Store, A, None)]);
        assert_eq!(l.owner(&H).unwrap(), Some(A));
        assert!(l.active_grants(&H).unwrap().is_empty());
        assert_eq!(l.query_access(&H, &A).unwrap(), AccessStatus::Owner);
    }

    #[test]
    fn grant_then_revoke() {
        let l = fold(vec![
            ev(1, OpKind::Store, A, None),
            ev(2, OpKind::Grant, A, Some(B)),
            ev(3, OpKind::Revoke, A, Some(B)),
        ]);
        assert!(l.active_grants(&H).unwrap().is_empty());
        assert_eq!(l.history(&H).unwrap().len(), 3);
        assert_eq!(l.query_access(&H, &B).unwrap(), AccessStatus::Revoked);
        assert_eq!(l.query_access(&H, &C).unwrap(), AccessStatus::NoRelation);
    }

    #[test]
    fn non_owner_grant_is_ineffective() {
        let mut l = fold(vec![ev(1, OpKind::Store, A, None)]);
        assert_eq!(l.apply_event(ev(2, OpKind::Grant, C, Some(B))).unwrap(), EventEffect::Unauthorized);
        assert!(l.active_grants(&H).unwrap().is_empty());
        assert_eq!(l.history(&H).unwrap().len(), 2);
    }

    #[test]
    fn revoke_of_never_granted_is_noop() {
        let mut l = fold(vec![ev(1, OpKind::Store, A, None)]);
        assert_eq!(l.apply_event(ev(2, OpKind::Revoke, A, Some(B))).unwrap(), EventEffect::NoOp);
        assert_eq!(l.query_access(&H, &B).unwrap(), AccessStatus::NoRelation);
    }

    #[test]
    fn regrant_after_revoke_keeps_history() {
        let l = fold(vec![
            ev(1, OpKind::Store, A, None),
            ev(2, OpKind::Grant, A, Some(B)),
            ev(3, OpKind::Revoke, A, Some(B)),
            ev(4, OpKind::Grant, A, Some(B)),
        ]);
        assert_eq!(l.query_access(&H, &B).unwrap(), AccessStatus::Granted);
        let effects: Vec<_> = l.history(&H).unwrap().iter().map(|h| h.effect).collect();
        assert_eq!(
            effects,
            [EventEffect::Claimed, EventEffect::Granted, EventEffect::Revoked, EventEffect::Granted]
        );
    }

    #[test]
    fn share_without_store_claims_ownership() {
        let l = fold(vec![ev(1, OpKind::Grant, A, Some(B))]);
        assert_eq!(l.query_access(&H, &A).unwrap(), AccessStatus::Owner);
        assert_eq!(l.query_access(&H, &B).unwrap(), AccessStatus::Granted);
        assert_eq!(l.proof_of_existence(&H), Err(CustodyError::NoStoreEvent(H)));
    }

    #[test]
    fn first_writer_wins() {
        let l = fold(vec![ev(3, OpKind::Store, A, None), ev(5, OpKind::Store, B, None)]);
        assert_eq!(l.owner(&H).unwrap(), Some(A));
        assert_eq!(
            l.proof_of_existence(&H).unwrap(),
            ExistenceProof {
                height: 3,
                timestamp: 1003,
                txid: Txid([3; 32])
            }
        );
        assert_eq!(l.history(&H).unwrap()[1].effect, EventEffect::DuplicateClaim);
    }

    #[test]
    fn out_of_order_rejected() {
        let mut l = fold(vec![ev(3, OpKind::Store, A, None)]);
        assert_eq!(
            l.apply_event(ev(3, OpKind::Grant, A, Some(B))),
            Err(CustodyError::OutOfOrderEvent { last: (3, 1), got: (3, 1) })
        );
        assert!(l.apply_event(ev(2, OpKind::Grant, A, Some(B))).is_err());
    }

    #[test]
    fn unknown_content() {
        let l = CustodyLedger::new();
        assert_eq!(l.query_access(&H, &A), Err(CustodyError::UnknownContent(H)));
        assert_eq!(CustodyLedger::rebuild(&[]).unwrap(), l);
    }

    #[test]
    fn revoke_on_unseen_content_is_unauthorized() {
        let l = fold(vec![ev(1, OpKind::Revoke, A, Some(B))]);
        assert_eq!(l.owner(&H).unwrap(), None);
        assert_eq!(l.history(&H).unwrap()[0].effect, EventEffect::Unauthorized);
        assert_eq!(l.query_access(&H, &A).unwrap(), AccessStatus::NoRelation);
    }

    #[test]
    fn subject_skips_change_outputs() {
        let rec = DataRecord {
            height: 1,
            tx_index: 1,
            txid: Txid([0; 32]),
            timestamp: 0,
            sender_addresses: vec![A],
            output_addresses: vec![A, B, C],
            envelope: crate::codec::PayloadEnvelope::new(OpKind::Grant, H),
        };
        let e = CustodyEvent::from_record(&rec).unwrap();
        assert_eq!((e.actor, e.subject), (A, Some(B)));
    }
}
