//! Evidence capture files.
//!
//! A capture is a flat sequence of records with no file header:
//!
//! ```text
//! time_ns(8, BE) direction(1) length(4, BE) bytes(length)
//! ```

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::sim::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaptureDirection {
    /// Test equipment toward the device under test.
    ToDut,
    /// Device under test toward the test equipment.
    FromDut,
    /// Harness annotation (RF observations, injected signals).
    Harness,
}

impl CaptureDirection {
    pub fn wire_value(self) -> u8 {
        match self {
            CaptureDirection::ToDut => 0,
            CaptureDirection::FromDut => 1,
            CaptureDirection::Harness => 2,
        }
    }

    pub fn from_wire(v: u8) -> io::Result<Self> {
        match v {
            0 => Ok(CaptureDirection::ToDut),
            1 => Ok(CaptureDirection::FromDut),
            2 => Ok(CaptureDirection::Harness),
            other => Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unknown capture direction {other}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub time_ns: Nanos,
    pub direction: CaptureDirection,
    pub bytes: Vec<u8>,
}

pub struct CaptureWriter<W: Write> {
    inner: W,
}

impl<W: Write> CaptureWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner }
    }

    pub fn write_record(&mut self, record: &CaptureRecord) -> io::Result<()> {
        let len = u32::try_from(record.bytes.len())
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "record exceeds 4 GiB"))?;
        self.inner.write_all(&record.time_ns.to_be_bytes())?;
        self.inner.write_all(&[record.direction.wire_value()])?;
        self.inner.write_all(&len.to_be_bytes())?;
        self.inner.write_all(&record.bytes)
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

pub struct CaptureReader<R: Read> {
    inner: R,
}

impl<R: Read> CaptureReader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner }
    }

    /// Returns `Ok(None)` at a clean end of stream.
    pub fn read_record(&mut self) -> io::Result<Option<CaptureRecord>> {
        let mut time = [0u8; 8];
        match self.inner.read_exact(&mut time) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
            Err(e) => return Err(e),
        }
        let mut dir = [0u8; 1];
        self.inner.read_exact(&mut dir)?;
        let mut len = [0u8; 4];
        self.inner.read_exact(&mut len)?;
        let mut bytes = vec![0u8; u32::from_be_bytes(len) as usize];
        self.inner.read_exact(&mut bytes)?;
        Ok(Some(CaptureRecord {
            time_ns: u64::from_be_bytes(time),
            direction: CaptureDirection::from_wire(dir[0])?,
            bytes,
        }))
    }

    pub fn read_all(mut self) -> io::Result<Vec<CaptureRecord>> {
        let mut out = Vec::new();
        while let Some(r) = self.read_record()? {
            out.push(r);
        }
        Ok(out)
    }
}
