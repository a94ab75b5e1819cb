//! Hierarchical M-Plane: an intermediary forwards requests to the O-RU on
//! behalf of an outer session, gated by a single privilege flag.

use super::error::MplaneError;
use super::rpc::{ErrorTag, RpcError, RpcReply, RpcRequest};
use super::session::MplaneSession;

/// Anything that answers one request with one reply.
pub trait RpcTarget {
    fn call(&mut self, request: RpcRequest) -> Result<RpcReply, MplaneError>;
}

/// Forwards `inner` when `privileged`; otherwise answers access-denied
/// without touching the target.
pub fn hierarchical_forward(
    outer: &MplaneSession,
    privileged: bool,
    inner: RpcRequest,
    target: &mut dyn RpcTarget,
) -> Result<RpcReply, MplaneError> {
    outer.require_up()?;
    if !privileged {
        return Ok(RpcReply::error(
            inner.message_id,
            RpcError::new(
                ErrorTag::AccessDenied,
                "sudo privilege required for forwarding",
            ),
        ));
    }
    target.call(inner)
}
