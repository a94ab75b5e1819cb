use thiserror::Error;

use super::rpc::RpcError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MplaneError {
    #[error("transport closed")]
    Closed,
    #[error("endpoint {0} unreachable")]
    Unreachable(String),
    #[error("transport i/o: {0}")]
    Io(String),
    #[error("malformed envelope: {0}")]
    Malformed(String),
    #[error("session not established (state {0})")]
    NotEstablished(String),
    #[error("authentication failed: {0}")]
    AuthFailed(String),
    #[error("illegal session transition {from} -> {to}")]
    IllegalTransition { from: String, to: String },
    #[error("no reply to message {0}")]
    NoReply(u64),
    #[error("rpc-error {}: {}", .0.tag.as_str(), .0.message)]
    Rpc(RpcError),
    #[error("dhcp: {0}")]
    Dhcp(#[from] super::dhcp::DhcpError),
}

impl From<std::io::Error> for MplaneError {
    fn from(e: std::io::Error) -> Self {
        MplaneError::Io(e.to_string())
    }
}
