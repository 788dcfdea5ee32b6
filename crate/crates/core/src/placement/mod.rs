//! Signal placement: per (CCR, guard) pair, decide whether to notify,
//! whether the notification is conditional, and whether to broadcast.

pub mod obligations;
mod place;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{CcrId, Formula, Monitor, Pred};
use crate::frontend::guards;

pub use place::{explain, place_signals, CheckRecord, PairReport, PlacementError, PlacementOptions, PlacementReport};

/// `?` evaluates the predicate before notifying; `✓` notifies unconditionally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cond {
    Conditional,
    Unconditional,
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Conditional => write!(f, "?"),
            Cond::Unconditional => write!(f, "✓"),
        }
    }
}

/// `(p, cond, bcast)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NotificationTriple {
    pub predicate: Pred,
    pub cond: Cond,
    pub bcast: bool,
}

impl fmt::Display for NotificationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.bcast { "broadcast" } else { "signal" };
        write!(f, "({}, {}, {kind})", self.predicate, self.cond)
    }
}

/// Σ: notifications emitted after each CCR body, indexed by CCR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalMap {
    pub entries: Vec<Vec<NotificationTriple>>,
}

impl SignalMap {
    pub fn empty(m: &Monitor) -> Self {
        SignalMap { entries: vec![Vec::new(); m.ccrs.len()] }
    }

    /// Every CCR broadcasts every guard, checking it first. The unchecked
    /// variant is not equivalent: it wakes threads whose guard is false.
    pub fn broadcast_everything(m: &Monitor) -> Self {
        SignalMap::broadcast_all(m, Cond::Conditional)
    }

    pub fn broadcast_all(m: &Monitor, cond: Cond) -> Self {
        let row: Vec<NotificationTriple> = guards(m)
            .into_iter()
            .map(|p| NotificationTriple { predicate: p, cond, bcast: true })
            .collect();
        SignalMap { entries: vec![row; m.ccrs.len()] }
    }

    pub fn get(&self, id: CcrId) -> &[NotificationTriple] {
        &self.entries[id.0]
    }

    /// Notifications waking one thread.
    pub fn signals(&self, id: CcrId) -> impl Iterator<Item = &NotificationTriple> {
        self.get(id).iter().filter(|n| !n.bcast)
    }

    /// Notifications waking every waiter.
    pub fn broadcasts(&self, id: CcrId) -> impl Iterator<Item = &NotificationTriple> {
        self.get(id).iter().filter(|n| n.bcast)
    }

    pub fn find(&self, id: CcrId, p: &Pred) -> Option<&NotificationTriple> {
        self.get(id).iter().find(|n| &n.predicate == p)
    }

    /// Lazy broadcast as a semantic transform: each broadcast becomes a
    /// signal, and every CCR guarded by a broadcast predicate relays a
    /// conditional signal on its own guard after its body.
    pub fn lazy_relay(&self, m: &Monitor) -> SignalMap {
        let mut out = self.clone();
        let mut relayed: Vec<Pred> = Vec::new();
        for row in &mut out.entries {
            for n in row.iter_mut().filter(|n| n.bcast) {
                n.bcast = false;
                if !relayed.contains(&n.predicate) {
                    relayed.push(n.predicate.clone());
                }
            }
        }
        for c in &m.ccrs {
            if relayed.contains(&c.guard) && out.find(c.id, &c.guard).is_none() {
                out.entries[c.id.0].push(NotificationTriple {
                    predicate: c.guard.clone(),
                    cond: Cond::Conditional,
                    bcast: false,
                });
            }
        }
        let order = guards(m);
        for row in &mut out.entries {
            row.sort_by_key(|n| order.iter().position(|g| *g == n.predicate));
        }
        out
    }

    pub fn display(&self, m: &Monitor) -> String {
        let mut out = String::new();
        for c in &m.ccrs {
            let items: Vec<String> = self.get(c.id).iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("{}: {{{}}}\n", c.label, items.join(", ")));
        }
        out
    }
}

/// A monitor together with its notification plan and the invariant the
/// plan was derived under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitMonitor {
    pub base: Monitor,
    pub sigma_map: SignalMap,
    pub invariant: Formula,
}

/// Attaches Σ to the monitor. Source order is preserved; the bodies are
/// conceptually `s; signal(S1); broadcast(S2)`.
pub fn instrument(m: &Monitor, sigma_map: SignalMap) -> ExplicitMonitor {
    ExplicitMonitor { base: m.clone(), sigma_map, invariant: Formula::TRUE }
}
