//! Management-plane cases.

use std::collections::BTreeSet;

use super::{leaf, lookup, Blocked, CaseRun, ESTABLISH_NS};
use crate::mplane::alarm::{FAULT_SUPERVISION, FAULT_SYNC};
use crate::mplane::dhcp::DhcpMessage;
use crate::mplane::model::{ALARM_LIST, SOFTWARE_SLOTS};
use crate::mplane::rpc::{sha256_hex, STREAM_ALARM, STREAM_ALL, STREAM_CONFIG};
use crate::mplane::{
    hierarchical_forward, ConfigChange, EventCategory, LogArtifact, LogKind, Node,
    NotificationEvent, Operation, RpcRequest, SessionState, SoftwareImage, CALL_HOME_PORT,
};
use crate::ru::{ActionKind, RuPhase};
use crate::runner::testbed::{Testbed, TransportMode, POLL_NS};
use crate::sim::{seeded_rng, Nanos, NS_PER_MS, NS_PER_S};
use crate::splane::{PtpProfileConfig, SyncState, Topology};

const BENCH: &str = "bench";
const DESCRIPTION: &str = "interfaces/eth0/description";
const TX_POWER: &str = "carriers/tx0/tx-power-dbm";
const RX_GAIN: &str = "carriers/rx0/gain-db";
const TX_ACTIVE: &str = "carriers/tx0/active";
/// Simulated time the handshake negative case waits for a session.
const REFUSAL_WINDOW_NS: Nanos = 20 * NS_PER_S;
const LOCK_BUDGET_NS: Nanos = 60 * NS_PER_S;
const ALARM_WAIT_NS: Nanos = 30 * NS_PER_S;
const SUPERVISED_RUN_NS: Nanos = 300 * NS_PER_S;
const UPDATE_BUILD: &str = "ORU-2.0.0";

fn tag(r: &crate::mplane::RpcReply) -> String {
    r.rpc_error()
        .map_or_else(|| "ok".into(), |e| e.tag.as_str().into())
}

fn dhcp_name(m: &DhcpMessage) -> &'static str {
    match m {
        DhcpMessage::Solicit { .. } => "SOLICIT",
        DhcpMessage::Advertise { .. } => "ADVERTISE",
        DhcpMessage::Request { .. } => "REQUEST",
        DhcpMessage::Reply { .. } => "REPLY",
    }
}

fn edit(changes: &[(&str, &str)]) -> Operation {
    Operation::EditConfig {
        changes: changes
            .iter()
            .map(|(p, v)| ConfigChange::new(*p, *v))
            .collect(),
    }
}

fn subscribe(run: &mut CaseRun, tb: &mut Testbed, stream: &str) -> Result<Option<u64>, Blocked> {
    let r = run.rpc(
        tb,
        BENCH,
        Operation::Subscribe {
            stream: stream.into(),
        },
    )?;
    Ok(r.data_value()
        .and_then(|v| v.get("subscription-id"))
        .and_then(serde_json::Value::as_u64))
}

fn lock(run: &mut CaseRun, tb: &mut Testbed, budget: Nanos) -> Result<bool, Blocked> {
    tb.acquire_lock(
        PtpProfileConfig::default(),
        Topology::C1.default_path(),
        budget,
    )
    .map_err(|e| run.blocked(tb, BENCH, format!("sync query: {e}")))
}

fn sync_state(run: &mut CaseRun, tb: &mut Testbed) -> Result<SyncState, Blocked> {
    tb.read_sync_state()
        .map_err(|e| run.blocked(tb, BENCH, format!("sync query: {e}")))
}

/// Raised, not yet cleared alarms as (fault id, source), from notifications.
fn notified_active(tb: &Testbed) -> BTreeSet<(u32, String)> {
    let mut active = BTreeSet::new();
    for n in tb.client.notifications() {
        if let NotificationEvent::Alarm(a) = &n.event {
            let key = (a.fault_id, a.fault_source.clone());
            if a.is_cleared {
                active.remove(&key);
            } else {
                active.insert(key);
            }
        }
    }
    active
}

fn listed_alarms(list: &Node) -> BTreeSet<(u32, String)> {
    lookup(list, ALARM_LIST)
        .map(|l| {
            l.children()
                .filter_map(|(_, e)| {
                    let id = e.child("fault-id")?.as_leaf()?.parse().ok()?;
                    let src = e.child("fault-source")?.as_leaf()?.to_string();
                    Some((id, src))
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Waits until the O-RU has notified a raised alarm with `fault_id`.
fn await_alarm(tb: &mut Testbed, fault_id: u32) -> bool {
    let seen = |tb: &Testbed| {
        tb.client
            .notifications()
            .iter()
            .any(|n| matches!(&n.event, NotificationEvent::Alarm(a) if a.fault_id == fault_id && !a.is_cleared))
    };
    tb.run_until(ALARM_WAIT_NS, POLL_NS, seen)
}

fn image(run: &CaseRun) -> SoftwareImage {
    use rand::RngCore;
    let mut bytes = vec![0u8; 4096];
    seeded_rng(run.profile.seed, "software-image").fill_bytes(&mut bytes);
    SoftwareImage::new(UPDATE_BUILD, bytes)
}

/// Downloads `img`; returns the target slot and its reported status.
fn download(
    run: &mut CaseRun,
    tb: &mut Testbed,
    img: SoftwareImage,
) -> Result<(String, String), Blocked> {
    let r = run.rpc(tb, BENCH, Operation::SwDownload { image: img })?;
    let field = |k: &str| {
        r.data_value()
            .and_then(|v| v.get(k))
            .and_then(serde_json::Value::as_str)
            .map(str::to_string)
    };
    match (field("slot"), field("status")) {
        (Some(slot), Some(status)) => Ok((slot, status)),
        _ => Err(run.blocked(tb, BENCH, format!("software download answered {}", tag(&r)))),
    }
}

fn running_slot(slots: &Node) -> Option<String> {
    lookup(slots, SOFTWARE_SLOTS)?
        .children()
        .find(|(_, s)| s.child("running").and_then(Node::as_leaf) == Some("true"))
        .map(|(name, _)| name.clone())
}

/// Valid download, install, and activation of the update image.
fn install_and_activate(run: &mut CaseRun, tb: &mut Testbed) -> Result<Option<String>, Blocked> {
    let (slot, status) = download(run, tb, image(run))?;
    if !run.check(
        "download verified",
        status == "VALID",
        format!("{slot} {status}"),
    ) {
        return Ok(None);
    }
    let r = run.rpc(tb, BENCH, Operation::SwInstall { slot: slot.clone() })?;
    if !run.check("install accepted", r.is_ok(), tag(&r)) {
        return Ok(None);
    }
    let r = run.rpc(tb, BENCH, Operation::SwActivate { slot: slot.clone() })?;
    if !run.check("activation accepted", r.is_ok(), tag(&r)) {
        return Ok(None);
    }
    Ok(Some(slot))
}

pub fn handshake_positive(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    let up = tb.establish(ESTABLISH_NS);
    run.check(
        "session established",
        up,
        format!(
            "TER {} / O-RU {}",
            tb.client.state().as_str(),
            tb.ru.session_state().as_str()
        ),
    );
    let trace: Vec<&str> = tb.dhcp_trace().iter().map(dhcp_name).collect();
    run.check(
        "DHCPv6 exchange",
        trace == ["SOLICIT", "ADVERTISE", "REQUEST", "REPLY"],
        trace.join(" "),
    );
    match tb.ru.lease().cloned() {
        Some(lease) => {
            // Over TCP the listener port is OS-assigned; keep it out of the
            // report so bodies stay comparable across runs.
            let shown = match tb.mode() {
                TransportMode::Hermetic => lease.call_home_client.to_string(),
                TransportMode::Tcp => format!("[{}]:<ephemeral>", lease.call_home_client.ip()),
            };
            run.check(
                "call home client from DHCP",
                lease.call_home_client == tb.call_home_address(),
                shown,
            );
            if tb.mode() == TransportMode::Hermetic {
                run.check(
                    "call home port",
                    lease.call_home_client.port() == CALL_HOME_PORT,
                    lease.call_home_client.port().to_string(),
                );
            }
            run.metric("address", lease.address.to_string());
        }
        None => {
            run.check("address lease", false, "no lease");
        }
    }
    run.check(
        "mutual authentication",
        tb.client.rejections() == 0 && tb.ru.server().auth_rejections() == 0,
        format!(
            "TER refusals {}, O-RU refusals {}",
            tb.client.rejections(),
            tb.ru.server().auth_rejections()
        ),
    );
    if let Some(&(t, _)) = tb
        .ru
        .phase_history()
        .iter()
        .find(|(_, p)| *p == RuPhase::MplaneUp)
    {
        run.metric("session_up_ns", t);
    }
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn handshake_negative(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut cfg = run.config(BENCH);
    cfg.ter_certificate =
        "-----BEGIN CERTIFICATE-----\nforged-ter\n-----END CERTIFICATE-----".into();
    let mut tb = run.bench_from(cfg)?;
    let up = tb.establish(REFUSAL_WINDOW_NS);
    run.check(
        "no session with mismatched credentials",
        !up,
        tb.client.state().as_str(),
    );
    let by_oru = tb.ru.server().auth_rejections();
    let by_ter = tb.client.rejections();
    let rejected_by = match (by_oru > 0, by_ter > 0) {
        (true, _) => "o-ru",
        (false, true) => "ter",
        (false, false) => "none",
    };
    run.check(
        "credential mismatch rejected",
        rejected_by != "none",
        format!("O-RU refusals {by_oru}, TER refusals {by_ter}"),
    );
    run.metric("rejected_by", rejected_by);
    let attempts = tb
        .ru
        .actions()
        .iter()
        .filter(
            |a| matches!(&a.kind, ActionKind::CallHome { outcome, .. } if outcome == "connected"),
        )
        .count();
    run.check(
        "call home retried",
        attempts >= 2,
        format!("{attempts} connections"),
    );
    run.metric("call_home_attempts", attempts);
    run.check(
        "O-RU back to address assigned",
        matches!(tb.ru.session_state(), SessionState::AddressAssigned),
        tb.ru.session_state().as_str(),
    );
    run.check(
        "no reboot",
        tb.ru.boot_count() == 1,
        tb.ru.boot_count().to_string(),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn subscription(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let sid = subscribe(run, &mut tb, STREAM_ALL)?;
    run.check("subscription accepted", sid.is_some(), format!("{sid:?}"));
    let r = run.rpc(&mut tb, BENCH, edit(&[(DESCRIPTION, "subscription probe")]))?;
    run.check("edit accepted", r.is_ok(), tag(&r));
    let got = tb.client.notifications().iter().any(|n| {
        Some(n.subscription_id) == sid
            && matches!(&n.event, NotificationEvent::ConfigChange { paths } if paths.iter().any(|p| p == DESCRIPTION))
    });
    run.check(
        "config change notified",
        got,
        format!("{} notifications", tb.client.notifications().len()),
    );
    let r = run.rpc(
        &mut tb,
        BENCH,
        Operation::Subscribe {
            stream: "no-such-stream".into(),
        },
    )?;
    run.check("unknown stream refused", r.rpc_error().is_some(), tag(&r));
    run.metric("notifications", tb.client.notifications().len());
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn supervision_positive(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let period = run.profile.supervision.interval_s * NS_PER_S;
    tb.set_auto_supervision(Some(period));
    tb.advance_by(SUPERVISED_RUN_NS);
    run.check(
        "session supervised throughout",
        tb.client.state() == SessionState::Supervised
            && tb.ru.session_state() == SessionState::Supervised,
        format!(
            "TER {} / O-RU {}",
            tb.client.state().as_str(),
            tb.ru.session_state().as_str()
        ),
    );
    run.check(
        "no restart",
        tb.ru.boot_count() == 1,
        tb.ru.boot_count().to_string(),
    );
    let alarms = run.get(&mut tb, BENCH, ALARM_LIST)?;
    let listed = listed_alarms(&alarms);
    run.check(
        "no supervision alarm",
        !listed.iter().any(|(id, _)| *id == FAULT_SUPERVISION),
        format!("{listed:?}"),
    );
    run.metric("supervised_s", SUPERVISED_RUN_NS / NS_PER_S);
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn supervision_negative(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    tb.bring_up(PtpProfileConfig::default(), Topology::C1.default_path())
        .map_err(|e| run.blocked(&tb, BENCH, e))?;
    let t0 = tb.now();
    let op = tb.kick();
    let first = run.rpc(&mut tb, BENCH, op)?;
    run.check("supervision started", first.is_ok(), tag(&first));
    tb.advance_by(30 * NS_PER_S);
    let op = tb.kick();
    let second = run.rpc(&mut tb, BENCH, op)?;
    run.metric("second_kick", tag(&second));
    let last_ack = if second.is_ok() { tb.now() } else { t0 };
    let deadline = last_ack + tb.supervision_span();
    tb.advance_to(deadline - NS_PER_MS);
    run.check(
        "session alive before deadline",
        tb.session_up(),
        tb.client.state().as_str(),
    );
    tb.advance_to(deadline);
    run.check(
        "session closed at deadline",
        !tb.client.state().is_up(),
        format!(
            "{} at +{} ms",
            tb.client.state().as_str(),
            (deadline - last_ack) / NS_PER_MS
        ),
    );
    run.metric("expiry_after_last_ack_s", (deadline - last_ack) / NS_PER_S);
    let closed_by = tb
        .client
        .close_reasons()
        .last()
        .cloned()
        .unwrap_or_default();
    run.check(
        "closed by supervision",
        closed_by.contains("supervision"),
        closed_by,
    );
    run.session(&mut tb, BENCH)?;
    let carriers = run.get(&mut tb, BENCH, TX_ACTIVE)?;
    let active = leaf(&carriers, TX_ACTIVE);
    run.check(
        "carriers deactivated",
        active.as_deref() == Some("false"),
        format!("{active:?}"),
    );
    let alarms = run.get(&mut tb, BENCH, ALARM_LIST)?;
    let listed = listed_alarms(&alarms);
    run.check(
        "supervision alarm listed",
        listed.iter().any(|(id, _)| *id == FAULT_SUPERVISION),
        format!("{listed:?}"),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

fn count_leaves(n: &Node) -> usize {
    match n.as_leaf() {
        Some(_) => 1,
        None => n.children().map(|(_, c)| count_leaves(c)).sum(),
    }
}

pub fn retrieval_unfiltered(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let r = run.rpc(&mut tb, BENCH, Operation::Get)?;
    let Some(tree) = r.fragment() else {
        return Err(run.blocked(&tb, BENCH, format!("get answered {}", tag(&r))));
    };
    for path in [
        "hardware/identity",
        "sync/sync-state",
        TX_POWER,
        RX_GAIN,
        "interfaces/eth0/enabled",
    ] {
        let v = leaf(&tree, path);
        run.check(&format!("{path} present"), v.is_some(), format!("{v:?}"));
    }
    for path in [SOFTWARE_SLOTS, "counters", "vendor/carrier-activation"] {
        run.check(
            &format!("{path} present"),
            lookup(&tree, path).is_some(),
            "",
        );
    }
    run.check(
        "matches device state",
        tree == tb.ru.datastore().fragment(None),
        "full datastore returned",
    );
    run.metric("leaves", count_leaves(&tree));
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn retrieval_filtered(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let hw = run.get(&mut tb, BENCH, "hardware")?;
    let tops: Vec<&String> = hw.children().map(|(k, _)| k).collect();
    run.check("subtree filter", tops == ["hardware"], format!("{tops:?}"));
    run.check(
        "subtree content",
        leaf(&hw, "hardware/identity").as_deref() == Some(tb.ru.config().identity.as_str()),
        format!("{:?}", leaf(&hw, "hardware/identity")),
    );
    let one = run.get(&mut tb, BENCH, TX_POWER)?;
    run.check(
        "leaf filter",
        count_leaves(&one) == 1 && leaf(&one, TX_POWER).is_some(),
        format!("{} leaves", count_leaves(&one)),
    );
    let none = run.get(&mut tb, BENCH, "no/such/node")?;
    run.check(
        "unmatched filter is empty",
        none.is_empty_container(),
        format!("{} leaves", count_leaves(&none)),
    );
    run.metric("subtree_leaves", count_leaves(&hw));
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn alarm_notification(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let sid = subscribe(run, &mut tb, STREAM_ALARM)?;
    run.check("alarm subscription", sid.is_some(), format!("{sid:?}"));
    if !lock(run, &mut tb, LOCK_BUDGET_NS)? {
        return Err(run.blocked(&tb, BENCH, "O-RU never reported LOCKED"));
    }
    tb.stop_grandmaster();
    let seen = await_alarm(&mut tb, FAULT_SYNC);
    run.check(
        "sync loss alarm notified",
        seen,
        format!("after {} ms", ALARM_WAIT_NS / NS_PER_MS),
    );
    let mut ids = BTreeSet::new();
    for n in tb.client.notifications() {
        if let NotificationEvent::Alarm(a) = &n.event {
            run.check(
                &format!("alarm {} well formed", a.fault_id),
                !a.fault_source.is_empty() && Some(n.subscription_id) == sid,
                format!("{} {}", a.fault_source, a.severity.as_str()),
            );
            if !a.is_cleared {
                ids.insert(a.fault_id);
            }
        }
    }
    run.metric("alarm_ids", ids);
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn alarm_list(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    subscribe(run, &mut tb, STREAM_ALARM)?;
    if !lock(run, &mut tb, LOCK_BUDGET_NS)? {
        return Err(run.blocked(&tb, BENCH, "O-RU never reported LOCKED"));
    }
    tb.stop_grandmaster();
    if !await_alarm(&mut tb, FAULT_SYNC) {
        return Err(run.blocked(&tb, BENCH, "no alarm raised to list"));
    }
    let list = run.get(&mut tb, BENCH, ALARM_LIST)?;
    let listed = listed_alarms(&list);
    let notified = notified_active(&tb);
    run.check(
        "list matches raised alarms",
        !listed.is_empty() && listed == notified,
        format!("listed {listed:?}, notified {notified:?}"),
    );
    run.metric("active_while_unlocked", listed.len());
    if !lock(run, &mut tb, LOCK_BUDGET_NS)? {
        return Err(run.blocked(&tb, BENCH, "O-RU did not relock"));
    }
    let list = run.get(&mut tb, BENCH, ALARM_LIST)?;
    let listed = listed_alarms(&list);
    run.check(
        "cleared alarm leaves the list",
        !listed.iter().any(|(id, _)| *id == FAULT_SYNC) && listed == notified_active(&tb),
        format!("{listed:?}"),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn software_update_positive(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let (slot, status) = download(run, &mut tb, image(run))?;
    run.check(
        "download verified",
        status == "VALID",
        format!("{slot} {status}"),
    );
    let r = run.rpc(&mut tb, BENCH, Operation::SwInstall { slot: slot.clone() })?;
    run.check("install accepted", r.is_ok(), tag(&r));
    let slots = run.get(&mut tb, BENCH, SOFTWARE_SLOTS)?;
    let reported = leaf(&slots, &format!("{SOFTWARE_SLOTS}/{slot}/status"));
    run.check(
        "slot reported valid",
        reported.as_deref() == Some("VALID"),
        format!("{reported:?}"),
    );
    let build = leaf(&slots, &format!("{SOFTWARE_SLOTS}/{slot}/build-id"));
    run.check(
        "slot holds the update",
        build.as_deref() == Some(UPDATE_BUILD),
        format!("{build:?}"),
    );
    run.metric("slot", slot);
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn software_update_negative(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    // Damage in transfer: the last byte changes, the claimed checksum does not.
    let mut img = image(run);
    if let Some(b) = img.bytes.last_mut() {
        *b ^= 0x5A;
    }
    let sent = sha256_hex(&img.bytes);
    let claimed = img.checksum.clone();
    let (slot, status) = download(run, &mut tb, img)?;
    run.check(
        "download flagged invalid",
        status == "INVALID",
        format!("{slot} {status}"),
    );
    let slots = run.get(&mut tb, BENCH, SOFTWARE_SLOTS)?;
    let stored = leaf(&slots, &format!("{SOFTWARE_SLOTS}/{slot}/checksum")).unwrap_or_default();
    run.check(
        "stored checksum differs from claim",
        stored != claimed,
        stored.clone(),
    );
    let source = if stored == sent { "transfer" } else { "device" };
    run.metric("corruption_source", source);
    let r = run.rpc(&mut tb, BENCH, Operation::SwInstall { slot: slot.clone() })?;
    run.check("install refused", r.rpc_error().is_some(), tag(&r));
    let r = run.rpc(&mut tb, BENCH, Operation::SwActivate { slot: slot.clone() })?;
    run.check("activation refused", r.rpc_error().is_some(), tag(&r));
    let slots = run.get(&mut tb, BENCH, SOFTWARE_SLOTS)?;
    let running = running_slot(&slots);
    run.check(
        "running slot unchanged",
        running.as_deref() == Some("slot-a"),
        format!("{running:?}"),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn activation_without_reset(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let Some(slot) = install_and_activate(run, &mut tb)? else {
        run.collect(&tb, BENCH);
        return Ok(());
    };
    let slots = run.get(&mut tb, BENCH, SOFTWARE_SLOTS)?;
    let active = leaf(&slots, &format!("{SOFTWARE_SLOTS}/{slot}/active"));
    run.check(
        "slot marked active",
        active.as_deref() == Some("true"),
        format!("{active:?}"),
    );
    let running = running_slot(&slots);
    run.check(
        "running slot unchanged",
        running.is_some() && running.as_deref() != Some(slot.as_str()),
        format!("{running:?}"),
    );
    run.check(
        "no reset",
        tb.ru.boot_count() == 1 && tb.session_up(),
        format!("boots {}", tb.ru.boot_count()),
    );
    run.metric("activated_slot", slot);
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn reset_after_activation(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let Some(slot) = install_and_activate(run, &mut tb)? else {
        run.collect(&tb, BENCH);
        return Ok(());
    };
    let first_session = tb.ru.server().session().session_id;
    let homes_before = call_homes(&tb);
    let r = run.rpc(&mut tb, BENCH, Operation::Reset)?;
    run.check("reset accepted", r.is_ok(), tag(&r));
    run.session(&mut tb, BENCH)?;
    run.check(
        "device rebooted",
        tb.ru.boot_count() == 2,
        tb.ru.boot_count().to_string(),
    );
    let homes = call_homes(&tb);
    run.check(
        "new call home",
        homes > homes_before,
        format!("{homes_before} -> {homes}"),
    );
    let second_session = tb.ru.server().session().session_id;
    run.check(
        "new session",
        second_session != first_session,
        format!("{first_session} -> {second_session}"),
    );
    let slots = run.get(&mut tb, BENCH, SOFTWARE_SLOTS)?;
    let running = running_slot(&slots);
    run.check(
        "running the activated slot",
        running.as_deref() == Some(slot.as_str()),
        format!("{running:?}"),
    );
    run.metric("running_slot", running);
    run.collect(&tb, BENCH);
    Ok(())
}

fn call_homes(tb: &Testbed) -> usize {
    tb.ru
        .actions()
        .iter()
        .filter(
            |a| matches!(&a.kind, ActionKind::CallHome { outcome, .. } if outcome == "connected"),
        )
        .count()
}

pub fn hierarchical_sudo(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let users = run.get(&mut tb, BENCH, "users/operator")?;
    let privilege = leaf(&users, "users/operator/privilege");
    let privileged = privilege.as_deref() == Some("sudo");
    run.check("operator holds sudo", privileged, format!("{privilege:?}"));
    let outer = tb.client.session().clone();
    let inner = |id, value: &str| RpcRequest {
        message_id: id,
        operation: edit(&[(DESCRIPTION, value)]),
    };
    let fwd = hierarchical_forward(&outer, privileged, inner(9_001, "set via sudo"), &mut tb)
        .map_err(|e| run.blocked(&tb, BENCH, format!("forwarding: {e}")))?;
    run.check(
        "privileged request forwarded",
        fwd.is_ok() && fwd.message_id == 9_001,
        tag(&fwd),
    );
    let d = run.get(&mut tb, BENCH, DESCRIPTION)?;
    run.check(
        "forwarded edit applied",
        leaf(&d, DESCRIPTION).as_deref() == Some("set via sudo"),
        format!("{:?}", leaf(&d, DESCRIPTION)),
    );
    let rpcs_before = rpc_events(&tb);
    let denied = hierarchical_forward(&outer, false, inner(9_002, "set without sudo"), &mut tb)
        .map_err(|e| run.blocked(&tb, BENCH, format!("forwarding: {e}")))?;
    run.check(
        "unprivileged request denied",
        tag(&denied) == "access-denied",
        tag(&denied),
    );
    run.check(
        "O-RU untouched",
        rpc_events(&tb) == rpcs_before,
        "no request reached the O-RU",
    );
    let d = run.get(&mut tb, BENCH, DESCRIPTION)?;
    run.check(
        "value unchanged",
        leaf(&d, DESCRIPTION).as_deref() == Some("set via sudo"),
        format!("{:?}", leaf(&d, DESCRIPTION)),
    );
    // The catalog names only the privileged path; the refusal is a harness inference.
    run.metric("unprivileged_outcome", "inferred");
    run.collect(&tb, BENCH);
    Ok(())
}

fn rpc_events(tb: &Testbed) -> usize {
    tb.ru
        .server()
        .log()
        .events()
        .iter()
        .filter(|e| e.category == EventCategory::Rpc)
        .count()
}

pub fn configurability_positive(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let sid = subscribe(run, &mut tb, STREAM_CONFIG)?;
    let changes = [
        (TX_POWER, "20"),
        (RX_GAIN, "-6"),
        (DESCRIPTION, "reconfigured"),
    ];
    let r = run.rpc(&mut tb, BENCH, edit(&changes))?;
    run.check("edit accepted", r.is_ok(), tag(&r));
    let tree = run.get(&mut tb, BENCH, "")?;
    for (path, value) in changes {
        let got = leaf(&tree, path);
        run.check(
            &format!("{path} read back"),
            got.as_deref() == Some(value),
            format!("{got:?}"),
        );
    }
    let notified: BTreeSet<String> = tb
        .client
        .notifications()
        .iter()
        .filter(|n| Some(n.subscription_id) == sid)
        .filter_map(|n| match &n.event {
            NotificationEvent::ConfigChange { paths } => Some(paths.clone()),
            _ => None,
        })
        .flatten()
        .collect();
    run.check(
        "changes notified",
        changes.iter().all(|(p, _)| notified.contains(*p)),
        format!("{notified:?}"),
    );
    run.metric("edited", changes.len());
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn configurability_negative(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let before = run.get(&mut tb, BENCH, "")?;
    let r = run.rpc(
        &mut tb,
        BENCH,
        edit(&[(DESCRIPTION, "must not stick"), (TX_POWER, "99")]),
    )?;
    run.check(
        "out-of-range edit rejected",
        r.rpc_error().is_some(),
        tag(&r),
    );
    run.metric("error_tag", tag(&r));
    let after = run.get(&mut tb, BENCH, "")?;
    for path in [DESCRIPTION, TX_POWER] {
        run.check(
            &format!("{path} unchanged"),
            leaf(&before, path) == leaf(&after, path),
            format!("{:?}", leaf(&after, path)),
        );
    }
    // Activation is attempted while the O-RU is not LOCKED.
    if lock(run, &mut tb, 20 * NS_PER_S)? {
        tb.stop_grandmaster();
        let end = tb.now() + ALARM_WAIT_NS;
        while sync_state(run, &mut tb)? == SyncState::Locked && tb.now() < end {
            tb.advance_by(POLL_NS);
        }
    }
    let state = sync_state(run, &mut tb)?;
    run.metric("sync_state_at_attempt", state.as_str());
    run.check(
        "not locked at attempt",
        state != SyncState::Locked,
        state.as_str(),
    );
    let r = tb
        .activate_carriers()
        .map_err(|e| run.blocked(&tb, BENCH, format!("activation: {e}")))?;
    run.check("activation refused", r.rpc_error().is_some(), tag(&r));
    let c = run.get(&mut tb, BENCH, TX_ACTIVE)?;
    let active = leaf(&c, TX_ACTIVE);
    run.check(
        "carrier stays inactive",
        active.as_deref() == Some("false"),
        format!("{active:?}"),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

fn log_window(run: &mut CaseRun, kind: LogKind) -> Result<(), Blocked> {
    let mut tb = run.bench(BENCH)?;
    run.session(&mut tb, BENCH)?;
    let r = run.rpc(&mut tb, BENCH, Operation::LogStart { kind })?;
    run.check("recording started", r.is_ok(), tag(&r));
    let r = run.rpc(&mut tb, BENCH, edit(&[(DESCRIPTION, "log probe")]))?;
    run.check("activity accepted", r.is_ok(), tag(&r));
    subscribe(run, &mut tb, STREAM_ALL)?;
    tb.advance_by(NS_PER_S);
    let r = run.rpc(&mut tb, BENCH, Operation::LogStop)?;
    run.check("recording stopped", r.is_ok(), tag(&r));
    let r = run.rpc(&mut tb, BENCH, Operation::LogCollect)?;
    let artifact: Option<LogArtifact> = r
        .data_value()
        .and_then(|v| serde_json::from_value(v.clone()).ok());
    let Some(a) = artifact else {
        run.check("log collected", false, tag(&r));
        run.collect(&tb, BENCH);
        return Ok(());
    };
    run.check("log kind", a.kind == kind, format!("{:?}", a.kind));
    run.check(
        "window closed",
        a.window_end_ns.is_some_and(|e| e >= a.window_start_ns),
        format!("{:?}", a.window_end_ns),
    );
    let has = |c: EventCategory| a.events.iter().any(|e| e.category == c);
    run.check(
        "configuration activity logged",
        has(EventCategory::Config),
        "",
    );
    let rpc = has(EventCategory::Rpc);
    match kind {
        LogKind::Troubleshooting => run.check("no per-request records", !rpc, ""),
        LogKind::Trace => run.check("per-request records", rpc, ""),
    };
    run.check(
        "events inside the window",
        a.events.iter().all(|e| {
            e.time_ns >= a.window_start_ns && a.window_end_ns.is_none_or(|end| e.time_ns <= end)
        }),
        format!("{} events", a.events.len()),
    );
    run.metric("events", a.events.len());
    run.attach(
        "log.json",
        serde_json::to_vec_pretty(&a).expect("log artifacts serialize"),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn troubleshooting_log(run: &mut CaseRun) -> Result<(), Blocked> {
    log_window(run, LogKind::Troubleshooting)
}

pub fn trace_log(run: &mut CaseRun) -> Result<(), Blocked> {
    log_window(run, LogKind::Trace)
}
