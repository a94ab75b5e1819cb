//! Management-plane envelope documents.
//!
//! Every frame on an M-Plane transport is one JSON document. Requests carry
//! a `message_id` that the matching reply echoes.

use serde::{Deserialize, Serialize};

use super::alarm::Alarm;
use super::datastore::Node;
use super::error::MplaneError;
use crate::sim::Nanos;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigChange {
    pub path: String,
    pub value: String,
}

impl ConfigChange {
    pub fn new(path: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftwareImage {
    pub build_id: String,
    /// Lowercase hex SHA-256 of `bytes`, as claimed by the publisher.
    pub checksum: String,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

impl SoftwareImage {
    /// Builds an image whose checksum matches its content.
    pub fn new(build_id: impl Into<String>, bytes: Vec<u8>) -> Self {
        let checksum = sha256_hex(&bytes);
        Self {
            build_id: build_id.into(),
            checksum,
            bytes,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LogKind {
    Troubleshooting,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Operation {
    Get,
    GetWithFilter { filter: String },
    EditConfig { changes: Vec<ConfigChange> },
    Subscribe { stream: String },
    SupervisionKick { interval_s: u64, guard_s: u64 },
    SwDownload { image: SoftwareImage },
    SwInstall { slot: String },
    SwActivate { slot: String },
    Reset,
    LogStart { kind: LogKind },
    LogStop,
    LogCollect,
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Get => "GET",
            Operation::GetWithFilter { .. } => "GET_WITH_FILTER",
            Operation::EditConfig { .. } => "EDIT_CONFIG",
            Operation::Subscribe { .. } => "SUBSCRIBE",
            Operation::SupervisionKick { .. } => "SUPERVISION_KICK",
            Operation::SwDownload { .. } => "SW_DOWNLOAD",
            Operation::SwInstall { .. } => "SW_INSTALL",
            Operation::SwActivate { .. } => "SW_ACTIVATE",
            Operation::Reset => "RESET",
            Operation::LogStart { .. } => "LOG_START",
            Operation::LogStop => "LOG_STOP",
            Operation::LogCollect => "LOG_COLLECT",
        }
    }

    /// Operations that only read state.
    pub fn is_read_only(&self) -> bool {
        matches!(
            self,
            Operation::Get | Operation::GetWithFilter { .. } | Operation::LogCollect
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpcRequest {
    pub message_id: u64,
    pub operation: Operation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorTag {
    InvalidValue,
    UnknownElement,
    AccessDenied,
    OperationFailed,
    DataMissing,
    ResourceDenied,
    OperationNotSupported,
}

impl ErrorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorTag::InvalidValue => "invalid-value",
            ErrorTag::UnknownElement => "unknown-element",
            ErrorTag::AccessDenied => "access-denied",
            ErrorTag::OperationFailed => "operation-failed",
            ErrorTag::DataMissing => "data-missing",
            ErrorTag::ResourceDenied => "resource-denied",
            ErrorTag::OperationNotSupported => "operation-not-supported",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorSeverity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpcError {
    pub tag: ErrorTag,
    pub severity: ErrorSeverity,
    pub message: String,
    /// Offending datastore node, when the error concerns one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl RpcError {
    pub fn new(tag: ErrorTag, message: impl Into<String>) -> Self {
        Self {
            tag,
            severity: ErrorSeverity::Error,
            message: message.into(),
            path: None,
        }
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reply", content = "content", rename_all = "kebab-case")]
pub enum Reply {
    Ok,
    Data(serde_json::Value),
    RpcError(RpcError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpcReply {
    pub message_id: u64,
    #[serde(flatten)]
    pub reply: Reply,
}

impl RpcReply {
    pub fn ok(message_id: u64) -> Self {
        Self {
            message_id,
            reply: Reply::Ok,
        }
    }

    pub fn data(message_id: u64, data: serde_json::Value) -> Self {
        Self {
            message_id,
            reply: Reply::Data(data),
        }
    }

    pub fn error(message_id: u64, err: RpcError) -> Self {
        Self {
            message_id,
            reply: Reply::RpcError(err),
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self.reply, Reply::RpcError(_))
    }

    pub fn rpc_error(&self) -> Option<&RpcError> {
        match &self.reply {
            Reply::RpcError(e) => Some(e),
            _ => None,
        }
    }

    pub fn data_value(&self) -> Option<&serde_json::Value> {
        match &self.reply {
            Reply::Data(v) => Some(v),
            _ => None,
        }
    }

    /// Data payload decoded as a datastore fragment.
    pub fn fragment(&self) -> Option<Node> {
        self.data_value()
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Client,
    Server,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hello {
    pub role: Role,
    pub identity: String,
    /// Credential fingerprint presented for authentication.
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum NotificationEvent {
    Alarm(Alarm),
    ConfigChange { paths: Vec<String> },
    SyncState { state: String },
}

impl NotificationEvent {
    pub fn stream(&self) -> &'static str {
        match self {
            NotificationEvent::Alarm(_) => STREAM_ALARM,
            NotificationEvent::ConfigChange { .. } => STREAM_CONFIG,
            NotificationEvent::SyncState { .. } => STREAM_SYNC,
        }
    }
}

/// Stream that carries every event kind.
pub const STREAM_ALL: &str = "NETCONF";
pub const STREAM_ALARM: &str = "alarm-notif";
pub const STREAM_CONFIG: &str = "config-change";
pub const STREAM_SYNC: &str = "sync-state";

pub fn stream_matches(subscribed: &str, event_stream: &str) -> bool {
    subscribed == STREAM_ALL || subscribed == event_stream
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub subscription_id: u64,
    pub event_time_ns: Nanos,
    pub event: NotificationEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "body", rename_all = "kebab-case")]
pub enum Frame {
    Hello(Hello),
    Rpc(RpcRequest),
    RpcReply(RpcReply),
    Notification(Notification),
    Close { reason: String },
}

impl Frame {
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("envelope documents always serialize")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MplaneError> {
        serde_json::from_slice(bytes).map_err(|e| MplaneError::Malformed(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mplane::alarm::Severity;

    fn round_trip(frame: Frame) {
        let bytes = frame.to_bytes();
        assert_eq!(Frame::from_bytes(&bytes).unwrap(), frame);
    }

    #[test]
    fn request_document_shape() {
        let f = Frame::Rpc(RpcRequest {
            message_id: 7,
            operation: Operation::GetWithFilter {
                filter: "sync".into(),
            },
        });
        let v: serde_json::Value = serde_json::from_slice(&f.to_bytes()).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "type": "rpc",
                "body": {"message_id": 7, "operation": {"GET_WITH_FILTER": {"filter": "sync"}}}
            })
        );
        let get = Frame::Rpc(RpcRequest {
            message_id: 1,
            operation: Operation::Get,
        });
        let v: serde_json::Value = serde_json::from_slice(&get.to_bytes()).unwrap();
        assert_eq!(v["body"]["operation"], "GET");
    }

    #[test]
    fn reply_document_shape() {
        let r = RpcReply::error(3, RpcError::new(ErrorTag::InvalidValue, "bad").at("a/b"));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["message_id"], 3);
        assert_eq!(v["reply"], "rpc-error");
        assert_eq!(v["content"]["tag"], "invalid-value");
        assert_eq!(v["content"]["path"], "a/b");
        assert_eq!(
            serde_json::to_value(RpcReply::ok(4)).unwrap(),
            serde_json::json!({"message_id": 4, "reply": "ok"})
        );
    }

    #[test]
    fn every_frame_kind_round_trips() {
        round_trip(Frame::Hello(Hello {
            role: Role::Server,
            identity: "o-ru".into(),
            fingerprint: "ab".into(),
            session_id: Some(1),
        }));
        round_trip(Frame::Rpc(RpcRequest {
            message_id: 2,
            operation: Operation::SwDownload {
                image: SoftwareImage::new("R2", vec![1, 2, 3]),
            },
        }));
        round_trip(Frame::RpcReply(RpcReply::data(
            2,
            serde_json::json!({"x": "1"}),
        )));
        round_trip(Frame::RpcReply(RpcReply::ok(9)));
        round_trip(Frame::Notification(Notification {
            subscription_id: 1,
            event_time_ns: 5,
            event: NotificationEvent::Alarm(Alarm {
                fault_id: 9,
                fault_source: "pa-0".into(),
                severity: Severity::Major,
                is_cleared: false,
                event_time_ns: 5,
                text: "test".into(),
            }),
        }));
        round_trip(Frame::Close {
            reason: "done".into(),
        });
    }

    #[test]
    fn checksum_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn malformed_document() {
        assert!(matches!(
            Frame::from_bytes(b"{nope"),
            Err(MplaneError::Malformed(_))
        ));
    }
}
