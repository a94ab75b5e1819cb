//! M-Plane transports.
//!
//! The hermetic default is an in-memory duplex channel registered in a
//! [`HermeticNetwork`]. [`TcpTransport`] frames each envelope with a 4-byte
//! big-endian length prefix so an external device can be attached.

use std::collections::{BTreeMap, VecDeque};
use std::io::{self, Read, Write};
use std::net::{SocketAddr, SocketAddrV6, TcpStream};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::time::{Duration, Instant};

use super::error::MplaneError;

pub const CALL_HOME_PORT: u16 = 4334;
/// Upper bound on one TCP-framed envelope.
pub const MAX_FRAME_LEN: usize = 16 << 20;

pub trait Transport: Send {
    fn send(&mut self, frame: &[u8]) -> Result<(), MplaneError>;
    /// Non-blocking; `Ok(None)` when nothing is pending.
    fn try_recv(&mut self) -> Result<Option<Vec<u8>>, MplaneError>;
}

pub struct MemoryTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

impl MemoryTransport {
    pub fn pair() -> (Self, Self) {
        let (a_tx, b_rx) = mpsc::channel();
        let (b_tx, a_rx) = mpsc::channel();
        (Self { tx: a_tx, rx: a_rx }, Self { tx: b_tx, rx: b_rx })
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, frame: &[u8]) -> Result<(), MplaneError> {
        self.tx
            .send(frame.to_vec())
            .map_err(|_| MplaneError::Closed)
    }

    fn try_recv(&mut self) -> Result<Option<Vec<u8>>, MplaneError> {
        match self.rx.try_recv() {
            Ok(f) => Ok(Some(f)),
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(MplaneError::Closed),
        }
    }
}

/// Listener registry for in-memory connections.
#[derive(Default)]
pub struct HermeticNetwork {
    listeners: BTreeMap<SocketAddrV6, VecDeque<MemoryTransport>>,
}

impl HermeticNetwork {
    pub fn listen(&mut self, addr: SocketAddrV6) {
        self.listeners.entry(addr).or_default();
    }

    pub fn close(&mut self, addr: &SocketAddrV6) {
        self.listeners.remove(addr);
    }

    pub fn is_listening(&self, addr: &SocketAddrV6) -> bool {
        self.listeners.contains_key(addr)
    }

    pub fn connect(&mut self, addr: SocketAddrV6) -> Result<MemoryTransport, MplaneError> {
        let queue = self
            .listeners
            .get_mut(&addr)
            .ok_or_else(|| MplaneError::Unreachable(addr.to_string()))?;
        let (local, remote) = MemoryTransport::pair();
        queue.push_back(remote);
        Ok(local)
    }

    pub fn accept(&mut self, addr: &SocketAddrV6) -> Option<MemoryTransport> {
        self.listeners.get_mut(addr)?.pop_front()
    }
}

pub struct TcpTransport {
    stream: TcpStream,
    buf: Vec<u8>,
}

impl TcpTransport {
    pub fn new(stream: TcpStream) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        Ok(Self {
            stream,
            buf: Vec::new(),
        })
    }

    pub fn connect(addr: SocketAddr, timeout: Duration) -> Result<Self, MplaneError> {
        let stream = TcpStream::connect_timeout(&addr, timeout)
            .map_err(|e| MplaneError::Unreachable(format!("{addr}: {e}")))?;
        Ok(Self::new(stream)?)
    }

    fn take_frame(&mut self) -> Result<Option<Vec<u8>>, MplaneError> {
        if self.buf.len() < 4 {
            return Ok(None);
        }
        let len = u32::from_be_bytes(self.buf[..4].try_into().expect("4 bytes")) as usize;
        if len > MAX_FRAME_LEN {
            return Err(MplaneError::Malformed(format!("frame length {len}")));
        }
        if self.buf.len() < 4 + len {
            return Ok(None);
        }
        let frame = self.buf[4..4 + len].to_vec();
        self.buf.drain(..4 + len);
        Ok(Some(frame))
    }

    /// Blocks up to `timeout` for one frame.
    pub fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<Vec<u8>>, MplaneError> {
        let deadline = Instant::now() + timeout;
        loop {
            if let Some(f) = self.try_recv()? {
                return Ok(Some(f));
            }
            if Instant::now() >= deadline {
                return Ok(None);
            }
            std::thread::sleep(Duration::from_millis(1));
        }
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, frame: &[u8]) -> Result<(), MplaneError> {
        if frame.len() > MAX_FRAME_LEN {
            return Err(MplaneError::Malformed(format!(
                "frame length {}",
                frame.len()
            )));
        }
        self.stream.set_nonblocking(false)?;
        self.stream.write_all(&(frame.len() as u32).to_be_bytes())?;
        self.stream.write_all(frame)?;
        Ok(())
    }

    fn try_recv(&mut self) -> Result<Option<Vec<u8>>, MplaneError> {
        if let Some(f) = self.take_frame()? {
            return Ok(Some(f));
        }
        self.stream.set_nonblocking(true)?;
        let mut chunk = [0u8; 8192];
        loop {
            match self.stream.read(&mut chunk) {
                Ok(0) => {
                    return match self.take_frame()? {
                        Some(f) => Ok(Some(f)),
                        None => Err(MplaneError::Closed),
                    };
                }
                Ok(n) => self.buf.extend_from_slice(&chunk[..n]),
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => break,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            }
        }
        self.take_frame()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(port: u16) -> SocketAddrV6 {
        SocketAddrV6::new("fd00::1".parse().unwrap(), port, 0, 0)
    }

    #[test]
    fn memory_pair_is_ordered_duplex() {
        let (mut a, mut b) = MemoryTransport::pair();
        a.send(b"1").unwrap();
        a.send(b"2").unwrap();
        b.send(b"x").unwrap();
        assert_eq!(b.try_recv().unwrap().unwrap(), b"1");
        assert_eq!(b.try_recv().unwrap().unwrap(), b"2");
        assert_eq!(b.try_recv().unwrap(), None);
        assert_eq!(a.try_recv().unwrap().unwrap(), b"x");
        drop(a);
        assert_eq!(b.try_recv(), Err(MplaneError::Closed));
    }

    #[test]
    fn network_connect_requires_listener() {
        let mut net = HermeticNetwork::default();
        assert!(matches!(
            net.connect(addr(4334)),
            Err(MplaneError::Unreachable(_))
        ));
        net.listen(addr(4334));
        let mut c = net.connect(addr(4334)).unwrap();
        let mut s = net.accept(&addr(4334)).unwrap();
        c.send(b"hello").unwrap();
        assert_eq!(s.try_recv().unwrap().unwrap(), b"hello");
        assert!(net.accept(&addr(4334)).is_none());
        net.close(&addr(4334));
        assert!(net.connect(addr(4334)).is_err());
    }
}
