//! Benchmarks live in `benches/`; run with `cargo bench -p paidata-bench`.
//!
//! This library only holds fixture builders shared between benches.

use paidata_core::custody::CustodyEvent;
use paidata_core::{Address, ContentId, OpKind, Txid};

/// A deterministic custody event stream over `contents` content ids and
/// eight addresses, cycling Store, Grant and Revoke.
pub fn custody_events(count: usize, contents: u8) -> Vec<CustodyEvent> {
    (0..count)
        .map(|i| {
            let actor = Address([(i % 3) as u8 + 1; 20]);
            CustodyEvent {
                height: (i / 16) as u64 + 1,
                tx_index: (i % 16) as u32,
                txid: Txid([(i % 251) as u8; 32]),
                timestamp: 1_600_000_000 + i as u64,
                op: [OpKind::Store, OpKind::Grant, OpKind::Revoke][i % 3],
                content_id: ContentId([(i % contents as usize) as u8; 32]),
                actor,
                subject: Some(Address([(i % 8) as u8 + 10; 20])),
            }
        })
        .collect()
}
