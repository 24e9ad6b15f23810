//! Orbit analytics: pre-period (`Len`), period (`Per`), vanishing,
//! predecessors, and the cycle subgroup `K(Z_m^n)`.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{DucciSystem, ResidueTuple};

/// Default cap on states visited while following a single orbit.
pub const DEFAULT_MAX_VISITED: u64 = 1 << 24;
/// Default cap on `m^n` for whole-space enumerations (kernel, graph, profiles).
pub const DEFAULT_MAX_STATES: u64 = 1 << 20;

/// Enumeration limits. Exceeding one is reported as [`Error::CapExceeded`],
/// never by truncating the result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_visited: u64,
    pub max_states: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_visited: DEFAULT_MAX_VISITED,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// The eventually periodic shape of one Ducci sequence.
///
/// `tail` holds `D^0(u), ..., D^{len-1}(u)` and `cycle` holds
/// `D^len(u), ..., D^{len+per-1}(u)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitSummary {
    pub len: usize,
    pub per: usize,
    pub tail: Vec<ResidueTuple>,
    pub cycle: Vec<ResidueTuple>,
}

impl OrbitSummary {
    pub fn vanishes(&self) -> bool {
        self.per == 1 && self.cycle[0].is_zero()
    }
}

pub fn orbit_summary(sys: &DucciSystem, u: &ResidueTuple) -> Result<OrbitSummary> {
    orbit_summary_capped(sys, u, DEFAULT_MAX_VISITED)
}

/// Exact `(Len, Per)` by recording the first-visit index of every state.
pub fn orbit_summary_capped(
    sys: &DucciSystem,
    u: &ResidueTuple,
    max_visited: u64,
) -> Result<OrbitSummary> {
    sys.validate(u)?;
    let mut first_seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut states: Vec<Vec<u64>> = Vec::new();
    let mut cur = u.entries().to_vec();
    let start = loop {
        match first_seen.entry(cur.clone()) {
            Entry::Occupied(e) => break *e.get(),
            Entry::Vacant(e) => {
                if states.len() as u64 >= max_visited {
                    return Err(Error::CapExceeded {
                        what: "orbit",
                        cap: max_visited,
                    });
                }
                e.insert(states.len());
            }
        }
        let mut next = vec![0; sys.len()];
        sys.step_into(&cur, &mut next);
        states.push(std::mem::replace(&mut cur, next));
    };
    let cycle: Vec<ResidueTuple> = states
        .split_off(start)
        .into_iter()
        .map(ResidueTuple::from_raw)
        .collect();
    let tail: Vec<ResidueTuple> = states.into_iter().map(ResidueTuple::from_raw).collect();
    Ok(OrbitSummary {
        len: tail.len(),
        per: cycle.len(),
        tail,
        cycle,
    })
}

/// `(Len, Per)` with Brent's cycle finder followed by a tail walk. Uses
/// constant memory; `max_steps` bounds the number of map evaluations.
pub fn len_per_brent(sys: &DucciSystem, u: &ResidueTuple, max_steps: u64) -> Result<(u64, u64)> {
    sys.validate(u)?;
    let n = sys.len();
    let mut steps = 0u64;
    let mut advance = |state: &mut Vec<u64>, scratch: &mut Vec<u64>| -> Result<()> {
        steps += 1;
        if steps > max_steps {
            return Err(Error::CapExceeded {
                what: "orbit",
                cap: max_steps,
            });
        }
        sys.step_into(state, scratch);
        std::mem::swap(state, scratch);
        Ok(())
    };
    let mut scratch = vec![0; n];

    let mut power = 1u64;
    let mut per = 1u64;
    let mut tortoise = u.entries().to_vec();
    let mut hare = tortoise.clone();
    advance(&mut hare, &mut scratch)?;
    while tortoise != hare {
        if power == per {
            tortoise.clone_from(&hare);
            power *= 2;
            per = 0;
        }
        advance(&mut hare, &mut scratch)?;
        per += 1;
    }

    let mut tortoise = u.entries().to_vec();
    let mut hare = tortoise.clone();
    for _ in 0..per {
        advance(&mut hare, &mut scratch)?;
    }
    let mut len = 0u64;
    while tortoise != hare {
        advance(&mut tortoise, &mut scratch)?;
        advance(&mut hare, &mut scratch)?;
        len += 1;
    }
    Ok((len, per))
}

/// `(L_m(n), P_m(n))`: the pre-period and period of the basic tuple
/// `(0, ..., 0, 1)`.
///
/// Note the notation `L_m(n)` puts the modulus in the subscript, so the
/// basic length of `Z_4^2` is `L_4(2) = 3`.
pub fn basic_len_per(sys: &DucciSystem) -> Result<(usize, usize)> {
    let summary = orbit_summary(sys, &sys.basic_tuple())?;
    Ok((summary.len, summary.per))
}

/// True iff the cycle of `u` is `{(0, ..., 0)}`.
pub fn vanishes(sys: &DucciSystem, u: &ResidueTuple) -> Result<bool> {
    Ok(orbit_summary(sys, u)?.vanishes())
}

/// All `v` with `D(v) = u`, ordered by first entry.
///
/// Each candidate first entry `y_1` determines the rest through
/// `y_{i+1} = x_i - y_i`; the candidate survives iff `y_n + y_1 = x_n`.
pub fn predecessors(sys: &DucciSystem, u: &ResidueTuple) -> Result<Vec<ResidueTuple>> {
    sys.validate(u)?;
    let m = sys.modulus();
    let n = sys.len();
    let x = u.entries();
    let sub = |a: u64, b: u64| if a >= b { a - b } else { m - (b - a) };
    let mut out = Vec::new();
    for y1 in 0..m {
        let mut y = Vec::with_capacity(n);
        y.push(y1);
        for i in 0..n - 1 {
            y.push(sub(x[i], y[i]));
        }
        if sys.add_mod(y[n - 1], y[0]) == x[n - 1] {
            out.push(ResidueTuple::from_raw(y));
        }
    }
    Ok(out)
}

/// `K(Z_m^n)`: every state that lies on some Ducci cycle, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct KernelSet {
    members: Vec<ResidueTuple>,
}

impl KernelSet {
    pub fn members(&self) -> &[ResidueTuple] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, u: &ResidueTuple) -> bool {
        self.members.binary_search(u).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1 && self.members[0].is_zero()
    }
}

pub fn kernel_set(sys: &DucciSystem) -> Result<KernelSet> {
    kernel_set_capped(sys, DEFAULT_MAX_STATES)
}

/// Cycle states found by in-degree peeling over the whole functional graph.
pub fn kernel_set_capped(sys: &DucciSystem, max_states: u64) -> Result<KernelSet> {
    let graph = FunctionalGraph::build(sys, max_states, "kernel")?;
    let (on_cycle, _) = graph.peel();
    let members = on_cycle
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| {
            let mut entries = vec![0; sys.len()];
            sys.decode_into(i as u64, &mut entries);
            ResidueTuple::from_raw(entries)
        })
        .collect();
    Ok(KernelSet { members })
}

/// `(Len, Per)` for every state of `Z_m^n` at once, indexed by
/// [`DucciSystem::encode`].
#[derive(Clone, Debug)]
pub struct OrbitProfile {
    pub len: Vec<u32>,
    pub per: Vec<u32>,
    pub on_cycle: Vec<bool>,
    pub indegree: Vec<u32>,
}

pub fn orbit_profile(sys: &DucciSystem, max_states: u64) -> Result<OrbitProfile> {
    let graph = FunctionalGraph::build(sys, max_states, "orbit profile")?;
    let (on_cycle, peel_order) = graph.peel();
    let count = graph.succ.len();
    let mut len = vec![0u32; count];
    let mut per = vec![0u32; count];
    for start in 0..count {
        if !on_cycle[start] || per[start] != 0 {
            continue;
        }
        let mut cycle = vec![start];
        let mut v = graph.succ[start];
        while v != start {
            cycle.push(v);
            v = graph.succ[v];
        }
        for &c in &cycle {
            per[c] = cycle.len() as u32;
        }
    }
    // Peeling removes a state only after everything feeding into it, so the
    // reverse order visits states nearer the cycles first.
    for &v in peel_order.iter().rev() {
        let next = graph.succ[v];
        len[v] = len[next] + 1;
        per[v] = per[next];
    }
    Ok(OrbitProfile {
        len,
        per,
        on_cycle,
        indegree: graph.indegree,
    })
}

/// `u -> D(u)` over all of `Z_m^n`, by state index.
pub(crate) struct FunctionalGraph {
    pub succ: Vec<usize>,
    pub indegree: Vec<u32>,
}

impl FunctionalGraph {
    pub fn build(sys: &DucciSystem, max_states: u64, what: &'static str) -> Result<Self> {
        let count = sys.state_count_capped(what, max_states)?;
        let count = usize::try_from(count).map_err(|_| Error::CapExceeded {
            what,
            cap: max_states,
        })?;
        let n = sys.len();
        let mut succ = Vec::with_capacity(count);
        let mut indegree = vec![0u32; count];
        let mut cur = vec![0u64; n];
        let mut next = vec![0u64; n];
        for i in 0..count {
            sys.decode_into(i as u64, &mut cur);
            sys.step_into(&cur, &mut next);
            let j = sys.encode_raw(&next) as usize;
            succ.push(j);
            indegree[j] += 1;
        }
        Ok(Self { succ, indegree })
    }

    /// Repeatedly deletes states of in-degree zero. Returns the survivor mask
    /// (exactly the cycle states) and the deletion order.
    pub fn peel(&self) -> (Vec<bool>, Vec<usize>) {
        let mut remaining = self.indegree.clone();
        let mut alive = vec![true; self.succ.len()];
        let mut queue: VecDeque<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| i)
            .collect();
        let mut order = Vec::new();
        while let Some(v) = queue.pop_front() {
            alive[v] = false;
            order.push(v);
            let next = self.succ[v];
            remaining[next] -= 1;
            if remaining[next] == 0 {
                queue.push_back(next);
            }
        }
        (alive, order)
    }
}
