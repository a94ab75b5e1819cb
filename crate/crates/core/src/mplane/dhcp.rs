//! DHCPv6-lite: solicit, advertise, request, reply with DUID-keyed
//! allocation from a contiguous pool.

use std::collections::BTreeMap;
use std::net::{Ipv6Addr, SocketAddrV6};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DhcpError {
    #[error("address pool exhausted")]
    PoolExhausted,
    #[error("protocol order violated: {0}")]
    ProtocolOrder(&'static str),
    #[error("no DHCPv6 server reachable")]
    NoServer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DhcpMessage {
    Solicit {
        duid: Vec<u8>,
    },
    Advertise {
        duid: Vec<u8>,
        address: Ipv6Addr,
    },
    Request {
        duid: Vec<u8>,
        address: Ipv6Addr,
    },
    Reply {
        duid: Vec<u8>,
        address: Ipv6Addr,
        call_home_client: SocketAddrV6,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DhcpLease {
    pub address: Ipv6Addr,
    pub call_home_client: SocketAddrV6,
}

#[derive(Debug, Clone)]
pub struct DhcpServer {
    pool_base: Ipv6Addr,
    pool_size: u32,
    call_home_client: SocketAddrV6,
    /// Address per DUID, fixed at first advertise.
    offers: BTreeMap<Vec<u8>, Ipv6Addr>,
    bound: BTreeMap<Vec<u8>, Ipv6Addr>,
}

impl DhcpServer {
    pub fn new(pool_base: Ipv6Addr, pool_size: u32, call_home_client: SocketAddrV6) -> Self {
        Self {
            pool_base,
            pool_size,
            call_home_client,
            offers: BTreeMap::new(),
            bound: BTreeMap::new(),
        }
    }

    pub fn call_home_client(&self) -> SocketAddrV6 {
        self.call_home_client
    }

    pub fn handle(&mut self, msg: DhcpMessage) -> Result<DhcpMessage, DhcpError> {
        match msg {
            DhcpMessage::Solicit { duid } => {
                let address = match self.offers.get(&duid) {
                    Some(a) => *a,
                    None => {
                        let n = self.offers.len() as u32;
                        if n >= self.pool_size {
                            return Err(DhcpError::PoolExhausted);
                        }
                        let a = Ipv6Addr::from(u128::from(self.pool_base) + n as u128);
                        self.offers.insert(duid.clone(), a);
                        a
                    }
                };
                Ok(DhcpMessage::Advertise { duid, address })
            }
            DhcpMessage::Request { duid, address } => match self.offers.get(&duid) {
                Some(offered) if *offered == address => {
                    self.bound.insert(duid.clone(), address);
                    Ok(DhcpMessage::Reply {
                        duid,
                        address,
                        call_home_client: self.call_home_client,
                    })
                }
                Some(_) => Err(DhcpError::ProtocolOrder(
                    "request for an address not advertised",
                )),
                None => Err(DhcpError::ProtocolOrder("request before solicit")),
            },
            DhcpMessage::Advertise { .. } | DhcpMessage::Reply { .. } => Err(
                DhcpError::ProtocolOrder("server-originated message sent to server"),
            ),
        }
    }
}

/// Runs the four-message exchange for one client.
pub fn dhcpv6_assign(
    server: &mut DhcpServer,
    duid: &[u8],
) -> Result<(DhcpLease, Vec<DhcpMessage>), DhcpError> {
    let mut trace = Vec::with_capacity(4);
    let solicit = DhcpMessage::Solicit {
        duid: duid.to_vec(),
    };
    trace.push(solicit.clone());
    let advertise = server.handle(solicit)?;
    trace.push(advertise.clone());
    let DhcpMessage::Advertise { address, .. } = advertise else {
        return Err(DhcpError::ProtocolOrder("expected advertise"));
    };
    let request = DhcpMessage::Request {
        duid: duid.to_vec(),
        address,
    };
    trace.push(request.clone());
    let reply = server.handle(request)?;
    trace.push(reply.clone());
    let DhcpMessage::Reply {
        address,
        call_home_client,
        ..
    } = reply
    else {
        return Err(DhcpError::ProtocolOrder("expected reply"));
    };
    Ok((
        DhcpLease {
            address,
            call_home_client,
        },
        trace,
    ))
}
