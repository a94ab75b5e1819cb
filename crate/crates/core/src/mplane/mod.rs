//! Management plane: DHCPv6-lite, Call Home, sessions, datastore access,
//! notifications, supervision, software management, logs, and
//! hierarchical forwarding.

pub mod alarm;
pub mod client;
pub mod datastore;
pub mod dhcp;
pub mod error;
pub mod eventlog;
pub mod hierarchy;
pub mod model;
pub mod rpc;
pub mod server;
pub mod session;
pub mod software;
pub mod transport;

pub use alarm::{Alarm, AlarmManager, Severity};
pub use client::{ClientConfig, MplaneClient};
pub use datastore::{Datastore, Node};
pub use dhcp::{dhcpv6_assign, DhcpError, DhcpLease, DhcpServer};
pub use error::MplaneError;
pub use eventlog::{EventCategory, LogArtifact, LogEvent};
pub use hierarchy::{hierarchical_forward, RpcTarget};
pub use rpc::{
    ConfigChange, ErrorTag, Frame, LogKind, Notification, NotificationEvent, Operation, Reply,
    RpcError, RpcReply, RpcRequest, SoftwareImage,
};
pub use server::{Credentials, MplaneServer, ServerConfig, ServerFaults};
pub use session::{MplaneSession, SessionState, SupervisionTimer};
pub use software::{SlotState, SoftwareInventory, SoftwareSlot};
pub use transport::{HermeticNetwork, MemoryTransport, TcpTransport, Transport, CALL_HOME_PORT};
