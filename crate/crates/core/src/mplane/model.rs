//! O-RU datastore layout and its writable-leaf schema.

use super::datastore::{ConfigSchema, LeafKind, LeafRule};

pub const SYNC_STATE: &str = "sync/sync-state";
pub const CARRIERS: &str = "carriers";
pub const ALARM_LIST: &str = "alarms/active-alarm-list";
pub const SOFTWARE_SLOTS: &str = "software/slots";
pub const COUNTERS: &str = "counters";
pub const USERS: &str = "users";
pub const VENDOR_CARRIER_ACTIVATION: &str = "vendor/carrier-activation";

pub fn carrier_path(carrier: &str, leaf: &str) -> String {
    format!("{CARRIERS}/{carrier}/{leaf}")
}

pub const BANDWIDTHS_MHZ: &[&str] = &["10", "20", "40", "50", "60", "80", "100"];

pub fn oru_schema() -> ConfigSchema {
    use LeafKind::*;
    let rule = |pattern, kind| LeafRule { pattern, kind };
    ConfigSchema::new(vec![
        rule("carriers/*/active", Bool),
        rule("carriers/*/tx-power-dbm", IntRange { min: 0, max: 40 }),
        rule("carriers/*/gain-db", IntRange { min: -30, max: 30 }),
        rule(
            "carriers/*/center-frequency-khz",
            IntRange {
                min: 3_300_000,
                max: 4_200_000,
            },
        ),
        rule("carriers/*/bandwidth-mhz", OneOf(BANDWIDTHS_MHZ)),
        rule(
            "carriers/*/eaxc-id",
            IntRange {
                min: 0,
                max: 65_535,
            },
        ),
        rule("interfaces/*/description", Text),
        rule("interfaces/*/enabled", Bool),
        rule("sync/ptp/domain-number", IntRange { min: 24, max: 43 }),
        rule("users/*/enabled", Bool),
        rule("vendor/carrier-activation/*", Text),
        rule("vendor/carrier-activation/*/*", Text),
    ])
}

/// Wildcard segments name list entries; edits may not create them.
pub fn list_entry_prefixes(pattern: &str, path: &str) -> Vec<String> {
    let segs: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    pattern
        .split('/')
        .filter(|s| !s.is_empty())
        .enumerate()
        .filter(|(i, p)| {
            *p == "*" && *i + 1 < segs.len() && !pattern.starts_with(VENDOR_CARRIER_ACTIVATION)
        })
        .map(|(i, _)| segs[..=i].join("/"))
        .collect()
}
