//! Synchronization cases, one fresh bench per LLS topology.

use super::{Blocked, CaseRun};
use crate::splane::{
    run_functional_test, run_performance_test, FunctionalConfig, PerformanceConfig,
    PtpProfileConfig, SyncVerdict, Topology,
};

fn label(t: Topology) -> String {
    t.name().to_ascii_lowercase()
}

pub fn functional(run: &mut CaseRun) -> Result<(), Blocked> {
    for topo in Topology::ALL {
        let l = label(topo);
        let mut tb = run.bench(&l)?;
        run.session(&mut tb, &l)?;
        let out = run_functional_test(
            &mut tb,
            topo,
            PtpProfileConfig::default(),
            topo.default_path(),
            &FunctionalConfig::default(),
        );
        if out.verdict == SyncVerdict::Blocked {
            return Err(run.blocked(
                &tb,
                &l,
                format!("{}: {}", topo.name(), out.violations.join("; ")),
            ));
        }
        run.check(
            &format!("{} lock and message rates", topo.name()),
            out.verdict == SyncVerdict::Pass,
            if out.violations.is_empty() {
                format!("locked after {:?} ns", out.lock_time_ns)
            } else {
                out.violations.join("; ")
            },
        );
        run.metric(&format!("{l}_lock_time_ns"), out.lock_time_ns);
        run.metric(&format!("{l}_sync_rate_hz"), out.sync_rate_hz);
        run.metric(&format!("{l}_announce_rate_hz"), out.announce_rate_hz);
        run.metric(&format!("{l}_delay_req_rate_hz"), out.delay_req_rate_hz);
        run.attach(
            format!("{l}-functional.json"),
            serde_json::to_vec_pretty(&out).expect("outcomes serialize"),
        );
        run.collect(&tb, &l);
    }
    Ok(())
}

pub fn performance(run: &mut CaseRun) -> Result<(), Blocked> {
    let cfg = PerformanceConfig {
        te_limit_ns: run.profile.te_limit_ns,
        ..PerformanceConfig::default()
    };
    for topo in Topology::ALL {
        let l = label(topo);
        let mut tb = run.bench(&l)?;
        run.session(&mut tb, &l)?;
        let out = run_performance_test(
            &mut tb,
            topo,
            run.profile.calibration_offset_ns,
            PtpProfileConfig::default(),
            topo.default_path(),
            &cfg,
        );
        if out.verdict == SyncVerdict::Blocked {
            return Err(run.blocked(&tb, &l, format!("{}: {}", topo.name(), out.note)));
        }
        run.check(
            &format!("{} max|TE| within limit", topo.name()),
            out.verdict == SyncVerdict::Pass,
            format!("{:.1} ns against {:.0} ns", out.max_te_ns, cfg.te_limit_ns),
        );
        run.metric(&format!("{l}_max_te_ns"), out.max_te_ns);
        run.metric(&format!("{l}_samples"), out.series.samples.len());
        run.attach(format!("{l}-te.txt"), out.series.to_text().into_bytes());
        run.collect(&tb, &l);
    }
    Ok(())
}
