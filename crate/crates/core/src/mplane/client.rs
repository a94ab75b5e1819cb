//! Client role: the management side of the test equipment. It listens
//! passively for the O-RU's Call Home.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddrV6;
use std::time::{Duration, Instant};

use super::error::MplaneError;
use super::rpc::{Frame, Hello, Notification, Operation, Role, RpcReply, RpcRequest};
use super::server::Credentials;
use super::session::{MplaneSession, SessionState};
use super::transport::Transport;
use crate::codec::{CaptureDirection, CaptureRecord};
use crate::sim::Nanos;

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub credentials: Credentials,
    pub trusted_server_fingerprint: String,
    pub listen: SocketAddrV6,
}

pub struct MplaneClient {
    pub config: ClientConfig,
    session: MplaneSession,
    transport: Option<Box<dyn Transport>>,
    next_message_id: u64,
    replies: BTreeMap<u64, RpcReply>,
    pending_kicks: BTreeSet<u64>,
    notifications: Vec<Notification>,
    server_hello: Option<Hello>,
    rejections: u32,
    close_reasons: Vec<String>,
    wire: Vec<CaptureRecord>,
    sent: u64,
}

impl MplaneClient {
    pub fn new(config: ClientConfig) -> Self {
        Self {
            config,
            session: MplaneSession::default(),
            transport: None,
            next_message_id: 1,
            replies: BTreeMap::new(),
            pending_kicks: BTreeSet::new(),
            notifications: Vec::new(),
            server_hello: None,
            rejections: 0,
            close_reasons: Vec::new(),
            wire: Vec::new(),
            sent: 0,
        }
    }

    pub fn session(&self) -> &MplaneSession {
        &self.session
    }

    pub fn state(&self) -> SessionState {
        self.session.state
    }

    pub fn is_connected(&self) -> bool {
        self.transport.is_some()
    }

    /// Server credentials this client refused.
    pub fn rejections(&self) -> u32 {
        self.rejections
    }

    pub fn close_reasons(&self) -> &[String] {
        &self.close_reasons
    }

    pub fn server_hello(&self) -> Option<&Hello> {
        self.server_hello.as_ref()
    }

    /// Every envelope sent or received, verbatim.
    /// Frames written to the device so far.
    pub fn frames_sent(&self) -> u64 {
        self.sent
    }

    pub fn wire_log(&self) -> &[CaptureRecord] {
        &self.wire
    }

    pub fn take_wire_log(&mut self) -> Vec<CaptureRecord> {
        std::mem::take(&mut self.wire)
    }

    /// Ready to accept a Call Home.
    pub fn listen(&mut self) {
        if matches!(
            self.session.state,
            SessionState::Idle | SessionState::Closed
        ) {
            self.transition(SessionState::AddressAssigned);
        }
    }

    fn transition(&mut self, to: SessionState) {
        self.session
            .transition(to)
            .expect("client drives only legal session transitions");
    }

    /// Accepts an incoming Call Home connection.
    pub fn attach(&mut self, transport: Box<dyn Transport>) -> Result<(), MplaneError> {
        self.listen();
        if self.session.state != SessionState::AddressAssigned {
            return Err(MplaneError::IllegalTransition {
                from: self.session.state.as_str().into(),
                to: SessionState::CallHomeSent.as_str().into(),
            });
        }
        self.transport = Some(transport);
        self.transition(SessionState::CallHomeSent);
        Ok(())
    }

    fn send_frame(&mut self, now: Nanos, frame: &Frame) -> Result<(), MplaneError> {
        let bytes = frame.to_bytes();
        let t = self.transport.as_mut().ok_or(MplaneError::Closed)?;
        t.send(&bytes)?;
        self.sent += 1;
        self.wire.push(CaptureRecord {
            time_ns: now,
            direction: CaptureDirection::ToDut,
            bytes,
        });
        Ok(())
    }

    fn drop_connection(&mut self) {
        self.transport = None;
        match self.session.state {
            SessionState::CallHomeSent | SessionState::Authenticating => {
                self.transition(SessionState::AddressAssigned)
            }
            SessionState::Established | SessionState::Supervised => {
                self.transition(SessionState::Closed)
            }
            _ => {}
        }
        self.pending_kicks.clear();
    }

    /// Drains the transport. Returns the number of frames handled.
    pub fn poll(&mut self, now: Nanos) -> Result<usize, MplaneError> {
        let mut handled = 0;
        loop {
            let Some(t) = self.transport.as_mut() else {
                return Ok(handled);
            };
            let bytes = match t.try_recv() {
                Ok(Some(b)) => b,
                Ok(None) => return Ok(handled),
                Err(MplaneError::Closed) => {
                    self.close_reasons.push("transport closed".into());
                    self.drop_connection();
                    return Ok(handled);
                }
                Err(e) => return Err(e),
            };
            self.wire.push(CaptureRecord {
                time_ns: now,
                direction: CaptureDirection::FromDut,
                bytes: bytes.clone(),
            });
            handled += 1;
            match Frame::from_bytes(&bytes)? {
                Frame::Hello(h) => self.handle_hello(now, h)?,
                Frame::RpcReply(r) => {
                    if self.pending_kicks.remove(&r.message_id)
                        && r.is_ok()
                        && self.session.state == SessionState::Established
                    {
                        self.transition(SessionState::Supervised);
                    }
                    self.replies.insert(r.message_id, r);
                }
                Frame::Notification(n) => self.notifications.push(n),
                Frame::Close { reason } => {
                    self.close_reasons.push(reason);
                    self.drop_connection();
                }
                Frame::Rpc(_) => {}
            }
        }
    }

    fn handle_hello(&mut self, now: Nanos, hello: Hello) -> Result<(), MplaneError> {
        if self.session.state != SessionState::CallHomeSent {
            return Ok(());
        }
        self.transition(SessionState::Authenticating);
        let trusted = hello.role == Role::Server
            && hello.fingerprint == self.config.trusted_server_fingerprint;
        self.server_hello = Some(hello.clone());
        if !trusted {
            self.rejections += 1;
            let _ = self.send_frame(
                now,
                &Frame::Close {
                    reason: "server authentication failed".into(),
                },
            );
            self.close_reasons
                .push("server authentication failed".into());
            self.drop_connection();
            return Ok(());
        }
        let own = Frame::Hello(Hello {
            role: Role::Client,
            identity: self.config.credentials.identity.clone(),
            fingerprint: self.config.credentials.fingerprint.clone(),
            session_id: None,
        });
        self.send_frame(now, &own)?;
        self.transition(SessionState::Established);
        self.session.peer_identity = hello.identity;
        Ok(())
    }

    pub fn send(&mut self, now: Nanos, operation: Operation) -> Result<u64, MplaneError> {
        self.session.require_up()?;
        let id = self.next_message_id;
        self.next_message_id += 1;
        if matches!(operation, Operation::SupervisionKick { .. }) {
            self.pending_kicks.insert(id);
        }
        self.send_frame(
            now,
            &Frame::Rpc(RpcRequest {
                message_id: id,
                operation,
            }),
        )?;
        Ok(id)
    }

    /// Sends a close and drops the connection.
    pub fn close(&mut self, now: Nanos, reason: &str) {
        let _ = self.send_frame(
            now,
            &Frame::Close {
                reason: reason.into(),
            },
        );
        self.drop_connection();
    }

    pub fn take_reply(&mut self, id: u64) -> Option<RpcReply> {
        self.replies.remove(&id)
    }

    pub fn notifications(&self) -> &[Notification] {
        &self.notifications
    }

    pub fn take_notifications(&mut self) -> Vec<Notification> {
        std::mem::take(&mut self.notifications)
    }

    /// Blocking request over a real transport, timed by the wall clock.
    pub fn call_wall(
        &mut self,
        operation: Operation,
        timeout: Duration,
    ) -> Result<RpcReply, MplaneError> {
        let id = self.send(0, operation)?;
        let deadline = Instant::now() + timeout;
        loop {
            self.poll(0)?;
            if let Some(r) = self.take_reply(id) {
                return Ok(r);
            }
            if !self.is_connected() {
                return Err(MplaneError::Closed);
            }
            if Instant::now() >= deadline {
                return Err(MplaneError::NoReply(id));
            }
            std::thread::sleep(Duration::from_millis(1));
        }
    }

    /// Blocks until the Call Home handshake settles.
    pub fn handshake_wall(&mut self, timeout: Duration) -> Result<(), MplaneError> {
        let deadline = Instant::now() + timeout;
        while self.session.state == SessionState::CallHomeSent {
            self.poll(0)?;
            if Instant::now() >= deadline {
                return Err(MplaneError::NoReply(0));
            }
            std::thread::sleep(Duration::from_millis(1));
        }
        self.session.require_up()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mplane::datastore::Datastore;
    use crate::mplane::server::{MplaneServer, ServerConfig};
    use crate::mplane::transport::MemoryTransport;

    fn pair(client_cert: &str) -> (MplaneClient, MplaneServer, MemoryTransport) {
        let ter = Credentials::from_certificate("ter", "ter-cert");
        let ru = Credentials::from_certificate("o-ru", "ru-cert");
        let client = MplaneClient::new(ClientConfig {
            credentials: Credentials::from_certificate("ter", client_cert),
            trusted_server_fingerprint: ru.fingerprint.clone(),
            listen: "[fd00::1]:4334".parse().unwrap(),
        });
        let server = MplaneServer::new(
            ServerConfig {
                credentials: ru,
                trusted_client_fingerprint: ter.fingerprint,
                software_build: "R1".into(),
            },
            Datastore::new(),
        );
        let (a, b) = MemoryTransport::pair();
        let mut client = client;
        client.listen();
        client.attach(Box::new(a)).unwrap();
        (client, server, b)
    }

    fn pump(client: &mut MplaneClient, server: &mut MplaneServer, link: &mut MemoryTransport) {
        for _ in 0..8 {
            client.poll(0).unwrap();
            while let Ok(Some(bytes)) = link.try_recv() {
                for f in server.handle_frame(0, Frame::from_bytes(&bytes).unwrap()) {
                    let _ = link.send(&f.to_bytes());
                }
            }
        }
    }

    #[test]
    fn handshake_then_rpc() {
        let (mut c, mut s, mut link) = pair("ter-cert");
        s.address_assigned(0, "fd00::10");
        let hello = s.call_home_connected(0, "ep");
        link.send(&hello.to_bytes()).unwrap();
        pump(&mut c, &mut s, &mut link);
        assert_eq!(c.state(), SessionState::Established);
        assert_eq!(s.state(), SessionState::Established);
        let id = c.send(0, Operation::Get).unwrap();
        pump(&mut c, &mut s, &mut link);
        assert!(c.take_reply(id).unwrap().is_ok());
        let k = c
            .send(
                0,
                Operation::SupervisionKick {
                    interval_s: 60,
                    guard_s: 10,
                },
            )
            .unwrap();
        pump(&mut c, &mut s, &mut link);
        assert!(c.take_reply(k).is_some());
        assert_eq!(c.state(), SessionState::Supervised);
        assert!(c.wire_log().len() >= 6);
    }

    #[test]
    fn forged_client_is_closed() {
        let (mut c, mut s, mut link) = pair("forged");
        s.address_assigned(0, "fd00::10");
        link.send(&s.call_home_connected(0, "ep").to_bytes())
            .unwrap();
        pump(&mut c, &mut s, &mut link);
        assert_eq!(s.state(), SessionState::AddressAssigned);
        assert_eq!(c.state(), SessionState::Closed);
        assert!(c.send(0, Operation::Get).is_err());
    }

    #[test]
    fn forged_server_is_refused() {
        let (mut c, mut s, mut link) = pair("ter-cert");
        s.faults.drop_callhome_auth = true;
        s.address_assigned(0, "fd00::10");
        link.send(&s.call_home_connected(0, "ep").to_bytes())
            .unwrap();
        pump(&mut c, &mut s, &mut link);
        assert_eq!(c.rejections(), 1);
        assert_eq!(c.state(), SessionState::AddressAssigned);
        assert_eq!(s.state(), SessionState::AddressAssigned);
    }
}
