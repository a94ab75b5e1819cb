//! Software inventory with two slots.

use serde::{Deserialize, Serialize};

use super::datastore::Node;
use super::rpc::{sha256_hex, ErrorTag, RpcError, SoftwareImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SlotState {
    Empty,
    Valid,
    Invalid,
}

impl SlotState {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotState::Empty => "EMPTY",
            SlotState::Valid => "VALID",
            SlotState::Invalid => "INVALID",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftwareSlot {
    pub name: String,
    pub build_id: String,
    pub checksum: String,
    pub state: SlotState,
    pub active: bool,
    pub running: bool,
    pub installed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftwareInventory {
    slots: Vec<SoftwareSlot>,
}

impl SoftwareInventory {
    /// Factory state: `slot-a` holds and runs `build_id`, `slot-b` is empty.
    pub fn factory(build_id: &str) -> Self {
        let image = format!("factory image {build_id}");
        Self {
            slots: vec![
                SoftwareSlot {
                    name: "slot-a".into(),
                    build_id: build_id.into(),
                    checksum: sha256_hex(image.as_bytes()),
                    state: SlotState::Valid,
                    active: true,
                    running: true,
                    installed: true,
                },
                SoftwareSlot {
                    name: "slot-b".into(),
                    build_id: String::new(),
                    checksum: String::new(),
                    state: SlotState::Empty,
                    active: false,
                    running: false,
                    installed: false,
                },
            ],
        }
    }

    pub fn slots(&self) -> &[SoftwareSlot] {
        &self.slots
    }

    pub fn slot(&self, name: &str) -> Option<&SoftwareSlot> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn running(&self) -> &SoftwareSlot {
        self.slots
            .iter()
            .find(|s| s.running)
            .expect("exactly one running slot")
    }

    fn slot_mut(&mut self, name: &str) -> Result<&mut SoftwareSlot, RpcError> {
        self.slots
            .iter_mut()
            .find(|s| s.name == name)
            .ok_or_else(|| RpcError::new(ErrorTag::UnknownElement, format!("no slot {name}")))
    }

    /// Stores the image in a non-running slot and verifies its checksum.
    /// `corrupt` flips one stored byte, modeling damage in transfer.
    pub fn download(
        &mut self,
        image: &SoftwareImage,
        corrupt: bool,
    ) -> Result<(String, SlotState), RpcError> {
        let target = self
            .slots
            .iter_mut()
            .filter(|s| !s.running)
            .min_by_key(|s| (s.active, s.state != SlotState::Empty))
            .ok_or_else(|| RpcError::new(ErrorTag::ResourceDenied, "no free software slot"))?;
        let mut stored = image.bytes.clone();
        if corrupt {
            match stored.first_mut() {
                Some(b) => *b ^= 0xFF,
                None => stored.push(0xFF),
            }
        }
        target.build_id = image.build_id.clone();
        target.checksum = sha256_hex(&stored);
        target.state = if target.checksum == image.checksum {
            SlotState::Valid
        } else {
            SlotState::Invalid
        };
        target.active = false;
        target.installed = false;
        Ok((target.name.clone(), target.state))
    }

    pub fn install(&mut self, slot: &str) -> Result<(), RpcError> {
        let s = self.slot_mut(slot)?;
        match s.state {
            SlotState::Valid => {
                s.installed = true;
                Ok(())
            }
            state => Err(RpcError::new(
                ErrorTag::OperationFailed,
                format!("slot {slot} is {}", state.as_str()),
            )
            .at(format!("software/slots/{slot}"))),
        }
    }

    pub fn activate(&mut self, slot: &str) -> Result<(), RpcError> {
        let s = self.slot_mut(slot)?;
        if s.state != SlotState::Valid || !s.installed {
            return Err(RpcError::new(
                ErrorTag::OperationFailed,
                format!("slot {slot} is not an installed valid image"),
            )
            .at(format!("software/slots/{slot}")));
        }
        for s in &mut self.slots {
            s.active = s.name == slot;
        }
        Ok(())
    }

    /// Running moves to the active slot.
    pub fn reset(&mut self) {
        if let Some(active) = self.slots.iter().position(|s| s.active) {
            for (i, s) in self.slots.iter_mut().enumerate() {
                s.running = i == active;
            }
        }
    }

    pub fn render(&self) -> Node {
        let mut slots = std::collections::BTreeMap::new();
        for s in &self.slots {
            let mut m = std::collections::BTreeMap::new();
            m.insert("build-id".into(), Node::Leaf(s.build_id.clone()));
            m.insert("checksum".into(), Node::Leaf(s.checksum.clone()));
            m.insert("status".into(), Node::Leaf(s.state.as_str().into()));
            m.insert("active".into(), Node::Leaf(s.active.to_string()));
            m.insert("running".into(), Node::Leaf(s.running.to_string()));
            slots.insert(s.name.clone(), Node::Container(m));
        }
        Node::Container(slots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn running_count(inv: &SoftwareInventory) -> usize {
        inv.slots().iter().filter(|s| s.running).count()
    }

    #[test]
    fn good_image_full_cycle() {
        let mut inv = SoftwareInventory::factory("R1");
        let (slot, state) = inv
            .download(&SoftwareImage::new("R2", b"new".to_vec()), false)
            .unwrap();
        assert_eq!((slot.as_str(), state), ("slot-b", SlotState::Valid));
        inv.install(&slot).unwrap();
        inv.activate(&slot).unwrap();
        assert_eq!(inv.running().name, "slot-a");
        inv.reset();
        assert_eq!(inv.running().name, "slot-b");
        assert_eq!(inv.running().build_id, "R2");
    }

    #[test]
    fn corrupt_image_refused() {
        let mut inv = SoftwareInventory::factory("R1");
        let (slot, state) = inv
            .download(&SoftwareImage::new("R2", b"new".to_vec()), true)
            .unwrap();
        assert_eq!(state, SlotState::Invalid);
        assert_eq!(
            inv.install(&slot).unwrap_err().tag,
            ErrorTag::OperationFailed
        );
        assert!(inv.activate(&slot).is_err());
    }

    #[test]
    fn running_slot_never_overwritten() {
        let mut inv = SoftwareInventory::factory("R1");
        for i in 0..3 {
            let (slot, _) = inv
                .download(&SoftwareImage::new(format!("R{i}"), vec![i]), false)
                .unwrap();
            assert_eq!(slot, "slot-b");
        }
        assert_eq!(inv.slot("slot-a").unwrap().build_id, "R1");
    }

    #[derive(Debug, Clone)]
    enum Op {
        Download(bool),
        InstallB,
        ActivateA,
        ActivateB,
        Reset,
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            any::<bool>().prop_map(Op::Download),
            Just(Op::InstallB),
            Just(Op::ActivateA),
            Just(Op::ActivateB),
            Just(Op::Reset),
        ]
    }

    proptest! {
        #[test]
        fn exactly_one_running(ops in proptest::collection::vec(op(), 0..40)) {
            let mut inv = SoftwareInventory::factory("R1");
            for (i, o) in ops.iter().enumerate() {
                let _ = match o {
                    Op::Download(c) => inv.download(&SoftwareImage::new("X", vec![i as u8]), *c).map(|_| ()),
                    Op::InstallB => inv.install("slot-b"),
                    Op::ActivateA => inv.activate("slot-a"),
                    Op::ActivateB => inv.activate("slot-b"),
                    Op::Reset => { inv.reset(); Ok(()) }
                };
                prop_assert_eq!(running_count(&inv), 1);
                prop_assert!(inv.slots().iter().filter(|s| s.active).count() <= 1);
            }
        }
    }
}
