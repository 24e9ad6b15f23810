//! Executable checks of the structure theorems for Ducci dynamics on `Z_m^n`.
//!
//! Every check evaluates one parameter point and produces a [`CheckReport`].
//! Sweeps return one report per point. Failing reports carry the
//! lexicographically smallest witness found; statements invoked outside their
//! hypotheses report [`Verdict::HypothesisSkip`] instead of passing vacuously.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coeff::{normalize_column, CoeffTable, CoeffView, Pow2Binomial};
use crate::error::{Error, Result};
use crate::orbit::{self, Caps};
use crate::system::{DucciSystem, ResidueTuple};

/// Exhaustive enumeration of tuples is used up to this many states;
/// seeded sampling above it.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesisSkip,
    CapExceeded,
}

impl Verdict {
    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::HypothesisSkip)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check_id: &'static str,
    pub parameters: BTreeMap<&'static str, i64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<Value>,
    pub counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One JSON line. Timing is included only when asked for, so that
    /// reports are otherwise byte-stable.
    pub fn to_json_line(&self, with_timing: bool) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if with_timing {
            value["elapsed_ms"] = json!(self.elapsed.as_secs_f64() * 1e3);
        }
        value.to_string()
    }
}

enum Outcome {
    Pass(Option<Value>),
    Fail {
        counterexample: Value,
        observed: Option<Value>,
    },
}

fn fail(counterexample: Value) -> Outcome {
    Outcome::Fail {
        counterexample,
        observed: None,
    }
}

fn run_check(
    check_id: &'static str,
    parameters: &[(&'static str, i64)],
    body: impl FnOnce() -> Result<Outcome>,
) -> CheckReport {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let mut report = CheckReport {
        check_id,
        parameters: parameters.iter().copied().collect(),
        verdict: Verdict::Pass,
        observed: None,
        counterexample: None,
        note: None,
        elapsed,
    };
    match result {
        Ok(Outcome::Pass(observed)) => report.observed = observed,
        Ok(Outcome::Fail {
            counterexample,
            observed,
        }) => {
            report.verdict = Verdict::Fail;
            report.counterexample = Some(counterexample);
            report.observed = observed;
        }
        Err(e @ Error::Hypothesis(_)) => {
            report.verdict = Verdict::HypothesisSkip;
            report.note = Some(e.to_string());
        }
        Err(e @ Error::CapExceeded { .. }) => {
            report.verdict = Verdict::CapExceeded;
            report.note = Some(e.to_string());
        }
        Err(e) => {
            report.verdict = Verdict::Fail;
            report.counterexample = Some(json!({ "error": e.to_string() }));
        }
    }
    report
}

fn pairs(k_range: &RangeInclusive<u32>, l_range: &RangeInclusive<u32>) -> Vec<(u32, u32)> {
    k_range
        .clone()
        .flat_map(|k| l_range.clone().map(move |l| (k, l)))
        .collect()
}

fn kl_params(k: u32, l: u32) -> [(&'static str, i64); 2] {
    [("k", k as i64), ("l", l as i64)]
}

fn mn_params(sys: &DucciSystem) -> [(&'static str, i64); 2] {
    [("m", sys.modulus() as i64), ("n", sys.len() as i64)]
}

fn expected_basic_len(k: u32, l: u32) -> u64 {
    (l as u64 + 1) << (k - 1)
}

fn require_kl(k: u32, l: u32) -> Result<DucciSystem> {
    if k < 1 || l < 1 {
        return Err(Error::Hypothesis(format!("needs k, l >= 1, got k={k}, l={l}")));
    }
    DucciSystem::pow2(k, l)
}

/// States of `sys` to quantify over: every state when there are at most
/// `limit`, otherwise `samples` seeded draws in sorted order. The flag says
/// whether the enumeration was exhaustive.
fn tuples_to_check(sys: &DucciSystem, limit: u64, samples: usize, seed: u64) -> (Vec<ResidueTuple>, bool) {
    if let Some(count) = sys.state_count().filter(|&c| c <= limit) {
        return ((0..count).map(|i| sys.decode(i).unwrap()).collect(), true);
    }
    let mut rng = rng_for(seed, sys);
    let mut draws: Vec<ResidueTuple> = (0..samples.max(1))
        .map(|_| {
            let entries = (0..sys.len()).map(|_| rng.gen_range(0..sys.modulus())).collect();
            sys.tuple_from_residues(entries).unwrap()
        })
        .collect();
    draws.sort();
    draws.dedup();
    (draws, false)
}

/// Each parameter point gets its own stream so results do not depend on the
/// order in which points run.
fn rng_for(seed: u64, sys: &DucciSystem) -> ChaCha8Rng {
    let mix = seed
        ^ sys.modulus().wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (sys.len() as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    ChaCha8Rng::seed_from_u64(mix)
}

/// `L_{2^l}(2^k) = (l + 1) 2^{k-1}` and `P_{2^l}(2^k) = 1` for each pair.
pub fn verify_main_theorem(
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
    caps: Caps,
) -> Vec<CheckReport> {
    pairs(&k_range, &l_range)
        .into_iter()
        .map(|(k, l)| {
            run_check("main_theorem", &kl_params(k, l), || {
                let sys = require_kl(k, l)?;
                let o = orbit::orbit_summary_capped(&sys, &sys.basic_tuple(), caps.max_visited)?;
                let expected = expected_basic_len(k, l);
                let observed = json!({ "len": o.len, "per": o.per });
                if o.len as u64 == expected && o.per == 1 {
                    Ok(Outcome::Pass(Some(observed)))
                } else {
                    Ok(Outcome::Fail {
                        counterexample: json!({ "expected_len": expected, "expected_per": 1 }),
                        observed: Some(observed),
                    })
                }
            })
        })
        .collect()
}

/// One step before the predicted length, the basic sequence is still nonzero.
pub fn verify_length_lower_bound(k: u32, l: u32) -> CheckReport {
    run_check("length_lower_bound", &kl_params(k, l), || {
        let sys = require_kl(k, l)?;
        let r = expected_basic_len(k, l) - 1;
        let state = sys.iterate(&sys.basic_tuple(), r)?;
        if state.is_zero() {
            Ok(fail(json!({ "iterations": r, "state": state })))
        } else {
            Ok(Outcome::Pass(Some(
                json!({ "iterations": r, "state": state.to_string() }),
            )))
        }
    })
}

/// `K(Z_m^n)` contains zero, is closed under addition, negation, scaling and
/// shifting, and `D` permutes it.
pub fn verify_subgroup(sys: &DucciSystem, caps: Caps) -> CheckReport {
    run_check("subgroup", &mn_params(sys), || {
        let kernel = orbit::kernel_set_capped(sys, caps.max_states)?;
        let members = kernel.members();
        if !kernel.contains(&sys.zero()) {
            return Ok(fail(json!({ "missing_zero": sys.zero() })));
        }
        let m = sys.modulus();
        for u in members {
            let neg = sys.scale(m - 1, u)?;
            if !kernel.contains(&neg) {
                return Ok(fail(json!({ "not_closed_under_negation": u })));
            }
            let shifted = sys.shift(u)?;
            if !kernel.contains(&shifted) {
                return Ok(fail(json!({ "not_closed_under_shift": u })));
            }
            for lambda in 2..m {
                if !kernel.contains(&sys.scale(lambda, u)?) {
                    return Ok(fail(json!({ "not_closed_under_scale": u, "lambda": lambda })));
                }
            }
        }
        for (i, u) in members.iter().enumerate() {
            for v in &members[i..] {
                if !kernel.contains(&sys.add(u, v)?) {
                    return Ok(fail(json!({ "not_closed_under_addition": [u, v] })));
                }
            }
        }
        let mut images = members
            .iter()
            .map(|u| sys.step(u))
            .collect::<Result<Vec<_>>>()?;
        images.sort();
        if images != members {
            let witness = members
                .iter()
                .find(|u| images.binary_search(u).is_err())
                .cloned();
            return Ok(fail(json!({ "d_not_a_permutation": witness })));
        }
        Ok(Outcome::Pass(Some(json!({ "order": kernel.order() }))))
    })
}

/// `K(Z_{2^l}^{2^k}) = {0}` for each pair.
pub fn verify_trivial_kernel(
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
    caps: Caps,
) -> Vec<CheckReport> {
    pairs(&k_range, &l_range)
        .into_iter()
        .map(|(k, l)| {
            run_check("trivial_kernel", &kl_params(k, l), || {
                let sys = require_kl(k, l)?;
                let kernel = orbit::kernel_set_capped(&sys, caps.max_states)?;
                if kernel.is_trivial() {
                    Ok(Outcome::Pass(Some(
                        json!({ "states": sys.state_count(), "order": 1 }),
                    )))
                } else {
                    let witness = kernel.members().iter().find(|u| !u.is_zero()).cloned();
                    Ok(fail(json!({ "nonzero_cycle_state": witness })))
                }
            })
        })
        .collect()
}

/// For even `n`: every state has 0 or exactly `m` predecessors, and
/// predecessors are closed under adding `z (1, -1, ..., 1, -1)`.
pub fn verify_predecessor_count(sys: &DucciSystem, caps: Caps) -> CheckReport {
    run_check("predecessor_count", &mn_params(sys), || {
        if !sys.len().is_multiple_of(2) {
            return Err(Error::Hypothesis(format!("n = {} is odd", sys.len())));
        }
        let count = sys.state_count_capped("predecessor count", caps.max_states)?;
        let m = sys.modulus();
        let mut with_preds = 0u64;
        for i in 0..count {
            let u = sys.decode(i)?;
            let preds = orbit::predecessors(sys, &u)?;
            if preds.is_empty() {
                continue;
            }
            with_preds += 1;
            if preds.len() as u64 != m {
                return Ok(fail(json!({ "tuple": u, "predecessors": preds.len() })));
            }
            let v = &preds[0];
            for z in 0..m {
                let alternating: Vec<i64> = (0..sys.len())
                    .map(|j| if j % 2 == 0 { z as i64 } else { -(z as i64) })
                    .collect();
                let translated = sys.add(v, &sys.tuple(&alternating)?)?;
                if sys.step(&translated)? != u {
                    return Ok(fail(
                        json!({ "tuple": u, "predecessor": v, "z": z, "translated": translated }),
                    ));
                }
            }
        }
        Ok(Outcome::Pass(Some(
            json!({ "states": count, "with_predecessors": with_preds }),
        )))
    })
}

/// Five congruence families for `C(2^j, t)` and `C(2^j - 1, t)`, one report
/// per `j`.
pub fn verify_binomial_lemmas(j_range: RangeInclusive<u32>) -> Vec<CheckReport> {
    let mod2 = Pow2Binomial::new(1).unwrap();
    let mod4 = Pow2Binomial::new(2).unwrap();
    let mod8 = Pow2Binomial::new(3).unwrap();
    j_range
        .map(|j| {
            run_check("binomial_lemmas", &[("j", j as i64)], || {
                if j < 2 {
                    return Err(Error::Hypothesis(format!("needs j >= 2, got {j}")));
                }
                if j > 40 {
                    return Err(Error::CapExceeded {
                        what: "binomial sweep",
                        cap: 1 << 40,
                    });
                }
                let full = 1u64 << j;
                let half = full / 2;
                let middle4 = mod4.binom(full, half)?;
                if middle4 != 2 {
                    return Ok(fail(json!({ "lemma": "middle_2_mod_4", "value_mod_4": middle4 })));
                }
                let middle8 = mod8.binom(full, half)?;
                if middle8 != 6 {
                    return Ok(fail(json!({ "lemma": "middle_6_mod_8", "value_mod_8": middle8 })));
                }
                for t in 0..=full {
                    if t == 0 || t == half || t == full {
                        continue;
                    }
                    let v = mod4.binom(full, t)?;
                    if v != 0 {
                        return Ok(fail(json!({ "lemma": "others_0_mod_4", "t": t, "value_mod_4": v })));
                    }
                }
                for t in 0..full {
                    if mod2.binom(full - 1, t)? != 1 {
                        return Ok(fail(json!({ "lemma": "row_all_odd", "t": t })));
                    }
                }
                let v = mod4.binom(full - 1, half)?;
                if v != 3 {
                    return Ok(fail(json!({ "lemma": "pre_middle_3_mod_4", "value_mod_4": v })));
                }
                Ok(Outcome::Pass(Some(json!({ "entries_checked": 2 * full + 3 }))))
            })
        })
        .collect()
}

/// Cross-checks the carry/odd-part binomial engine against Pascal's rule mod
/// `2^l` for every `N <= n_max`, `K <= N`, `l <= l_max`.
pub fn verify_binom_oracle(n_max: u64, l_max: u32) -> CheckReport {
    let params = [("n_max", n_max as i64), ("l_max", l_max as i64)];
    run_check("binom_pascal_oracle", &params, || {
        if !(1..=63).contains(&l_max) {
            return Err(Error::InvalidParameter(format!("l_max must be in 1..=63, got {l_max}")));
        }
        let modulus_mask = (1u64 << l_max) - 1;
        let engines = (1..=l_max)
            .map(Pow2Binomial::new)
            .collect::<Result<Vec<_>>>()?;
        let mut row = vec![1u64];
        let mut checked = 0u64;
        for n in 0..=n_max {
            if n > 0 {
                let mut next = vec![1u64; n as usize + 1];
                for k in 1..n as usize {
                    next[k] = (row[k - 1] + row[k]) & modulus_mask;
                }
                row = next;
            }
            for (k, &exact) in row.iter().enumerate() {
                for engine in &engines {
                    let l = engine.exponent();
                    let got = engine.binom(n, k as u64)?;
                    if got != exact & ((1u64 << l) - 1) {
                        return Ok(fail(json!({ "n": n, "k": k, "l": l, "engine": got, "pascal": exact & ((1u64 << l) - 1) })));
                    }
                    checked += 1;
                }
            }
        }
        Ok(Outcome::Pass(Some(json!({ "values_checked": checked }))))
    })
}

/// Tables for `n = 2^k` reduced mod `2^max(l)`, shared across an l-sweep.
fn pow2_table(k: u32, l_max: u32, r_max: usize) -> Result<CoeffTable> {
    let sys = DucciSystem::pow2(k, l_max.max(1))?;
    let mut table = CoeffTable::new(sys);
    table.extend_to(r_max)?;
    Ok(table)
}

fn sweep_by_k<F>(
    check_id: &'static str,
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
    rows_needed: impl Fn(u32, u32) -> usize,
    check: F,
) -> Vec<CheckReport>
where
    F: Fn(&CoeffTable, u32, u32) -> Result<Outcome>,
{
    let l_max = *l_range.end();
    let mut reports = Vec::new();
    for k in k_range {
        let r_max = l_range.clone().map(|l| rows_needed(k, l)).max().unwrap_or(0);
        let table = if k >= 1 && l_max >= 1 {
            Some(pow2_table(k, l_max, r_max))
        } else {
            None
        };
        for l in l_range.clone() {
            reports.push(run_check(check_id, &kl_params(k, l), || {
                require_kl(k, l)?;
                let table = table.as_ref().unwrap().as_ref().map_err(Clone::clone)?;
                check(table, k, l)
            }));
        }
    }
    reports
}

fn cell(table: &CoeffTable, r: usize, s: i64) -> u64 {
    table.cell(r, s).expect("row precomputed")
}

/// `a_{l 2^{k-1}, s} + a_{l 2^{k-1}, s - 2^{k-1}} = 0 mod 2^l` for all `s`.
pub fn verify_coeff_sum_lemma1(
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
) -> Vec<CheckReport> {
    sweep_by_k(
        "coeff_sum_lemma1",
        k_range,
        l_range,
        |k, l| (l as usize) << k.saturating_sub(1),
        |table, k, l| {
            let half = 1i64 << (k - 1);
            let r = (l as usize) << (k - 1);
            let mask = (1u64 << l) - 1;
            for s in 1..=(1i64 << k) {
                let sum = cell(table, r, s) + cell(table, r, s - half);
                if sum & mask != 0 {
                    return Ok(fail(json!({ "s": s, "sum_mod_2^l": sum & mask })));
                }
            }
            Ok(Outcome::Pass(Some(json!({ "row": r }))))
        },
    )
}

/// `a_{(l-1) 2^{k-1}, l 2^{k-2} + 1} + a_{(l-1) 2^{k-1}, l 2^{k-2} - 2^{k-1} + 1} = 0 mod 2^l`
/// for `l >= 3`, `k >= 2`.
pub fn verify_coeff_sum_lemma2(
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
) -> Vec<CheckReport> {
    sweep_by_k(
        "coeff_sum_lemma2",
        k_range,
        l_range,
        |k, l| (l.saturating_sub(1) as usize) << k.saturating_sub(1),
        |table, k, l| {
            if l < 3 || k < 2 {
                return Err(Error::Hypothesis(format!("needs l >= 3 and k >= 2, got k={k}, l={l}")));
            }
            let r = ((l - 1) as usize) << (k - 1);
            let quarter = 1i64 << (k - 2);
            let s1 = l as i64 * quarter + 1;
            let s2 = l as i64 * quarter - 2 * quarter + 1;
            let mask = (1u64 << l) - 1;
            let sum = cell(table, r, s1) + cell(table, r, s2);
            let cols = [
                normalize_column(1 << k, s1) as i64,
                normalize_column(1 << k, s2) as i64,
            ];
            if sum & mask != 0 {
                return Ok(fail(json!({ "row": r, "columns": cols, "sum_mod_2^l": sum & mask })));
            }
            Ok(Outcome::Pass(Some(json!({ "row": r, "columns": cols }))))
        },
    )
}

/// `g(l, l, 1) = a_{l 2^{k-1}, l 2^{k-2} + 1} = 2^{l-1} mod 2^l` for `l >= 2`, `k >= 2`.
pub fn verify_claim_g(
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
) -> Vec<CheckReport> {
    sweep_by_k(
        "claim_g",
        k_range,
        l_range,
        |k, l| (l as usize) << k.saturating_sub(1),
        |table, k, l| {
            if l < 2 || k < 2 {
                return Err(Error::Hypothesis(format!("needs l >= 2 and k >= 2, got k={k}, l={l}")));
            }
            let view = CoeffView::G {
                gamma: l as i64,
                epsilon: l as i64,
                delta: 1,
            };
            let (r, s) = view.cell(&DucciSystem::pow2(k, l)?)?;
            let value = cell(table, r, s) & ((1u64 << l) - 1);
            let observed = json!({ "row": r, "column": normalize_column(1 << k, s), "value_mod_2^l": value });
            if value == 1u64 << (l - 1) {
                Ok(Outcome::Pass(Some(observed)))
            } else {
                Ok(Outcome::Fail {
                    counterexample: json!({ "expected": 1u64 << (l - 1) }),
                    observed: Some(observed),
                })
            }
        },
    )
}

/// `L_2(n) = 2^{v_2(n)}`: 1 for odd `n`, `2^k` for `n = 2^k n_1`.
pub fn verify_known_l2(n_range: RangeInclusive<usize>, caps: Caps) -> Vec<CheckReport> {
    n_range
        .map(|n| {
            run_check("known_l2", &[("n", n as i64)], || {
                let sys = DucciSystem::new(2, n)?;
                let o = orbit::orbit_summary_capped(&sys, &sys.basic_tuple(), caps.max_visited)?;
                let expected = 1usize << n.trailing_zeros();
                let observed = json!({ "len": o.len, "per": o.per });
                if o.len == expected {
                    Ok(Outcome::Pass(Some(observed)))
                } else {
                    Ok(Outcome::Fail {
                        counterexample: json!({ "expected_len": expected }),
                        observed: Some(observed),
                    })
                }
            })
        })
        .collect()
}

/// `D^{l 2^k}(u) = 0` on `Z_{2^l}^{2^k}`, exhaustively for small spaces and
/// on `samples` seeded tuples otherwise.
pub fn verify_wong_bound(
    k_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
    samples: usize,
    seed: u64,
) -> Vec<CheckReport> {
    pairs(&k_range, &l_range)
        .into_iter()
        .map(|(k, l)| {
            run_check("wong_bound", &kl_params(k, l), || {
                let sys = require_kl(k, l)?;
                let bound = (l as u64) << k;
                if expected_basic_len(k, l) > bound {
                    return Ok(fail(json!({ "basic_len_exceeds_bound": bound })));
                }
                let (tuples, exhaustive) = tuples_to_check(&sys, EXHAUSTIVE_LIMIT, samples, seed);
                for u in &tuples {
                    let image = sys.iterate(u, bound)?;
                    if !image.is_zero() {
                        return Ok(fail(json!({ "tuple": u, "image": image })));
                    }
                }
                Ok(Outcome::Pass(Some(json!({
                    "iterations": bound,
                    "tuples": tuples.len(),
                    "exhaustive": exhaustive,
                }))))
            })
        })
        .collect()
}

/// `Len(u) <= L_m(n)` and `Per(u) | P_m(n)` for every state.
pub fn verify_orbit_maximality(sys: &DucciSystem, caps: Caps) -> CheckReport {
    run_check("orbit_maximality", &mn_params(sys), || {
        let profile = orbit::orbit_profile(sys, caps.max_states)?;
        let basic = sys.encode(&sys.basic_tuple())? as usize;
        let (big_len, big_per) = (profile.len[basic], profile.per[basic]);
        for i in 0..profile.len.len() {
            if profile.len[i] > big_len || big_per % profile.per[i] != 0 {
                return Ok(fail(json!({
                    "tuple": sys.decode(i as u64)?,
                    "len": profile.len[i],
                    "per": profile.per[i],
                    "basic_len": big_len,
                    "basic_per": big_per,
                })));
            }
        }
        Ok(Outcome::Pass(Some(json!({ "basic_len": big_len, "basic_per": big_per }))))
    })
}

/// `D` is additive, commutes with scalars and with `H`, equals `I + H`, and
/// fixes only zero.
pub fn verify_endomorphism(sys: &DucciSystem, samples: usize, seed: u64) -> CheckReport {
    run_check("endomorphism", &mn_params(sys), || {
        let (tuples, small) = tuples_to_check(sys, 1 << 8, samples, seed);
        for u in &tuples {
            let du = sys.step(u)?;
            if du == *u && !u.is_zero() {
                return Ok(fail(json!({ "nonzero_fixed_point": u })));
            }
            if sys.shift(&du)? != sys.step(&sys.shift(u)?)? {
                return Ok(fail(json!({ "shift_does_not_commute": u })));
            }
            if du != sys.add(u, &sys.shift(u)?)? {
                return Ok(fail(json!({ "not_identity_plus_shift": u })));
            }
            for lambda in 0..sys.modulus().min(16) {
                if sys.step(&sys.scale(lambda, u)?)? != sys.scale(lambda, &du)? {
                    return Ok(fail(json!({ "not_scalar_compatible": u, "lambda": lambda })));
                }
            }
            for v in &tuples {
                if sys.step(&sys.add(u, v)?)? != sys.add(&du, &sys.step(v)?)? {
                    return Ok(fail(json!({ "not_additive": [u, v] })));
                }
            }
        }
        Ok(Outcome::Pass(Some(json!({ "tuples": tuples.len(), "exhaustive": small }))))
    })
}

/// Identities of the coefficient table on one system, for rows up to
/// `max(2 L_m(n), n)`: iteration agreement of the expansion, the binomial
/// form below row `n`, row `n` itself, the convolution rule, the symmetry
/// `a_{r,s} = a_{r,r-s+2}`, and for `n = 2^k` the half-period column shift.
pub fn verify_coeff_identities(sys: &DucciSystem, samples: usize, seed: u64, caps: Caps) -> CheckReport {
    run_check("coeff_identities", &mn_params(sys), || {
        let (basic_len, _) = {
            let o = orbit::orbit_summary_capped(sys, &sys.basic_tuple(), caps.max_visited)?;
            (o.len, o.per)
        };
        let n = sys.len();
        let m = sys.modulus();
        let r_max = (2 * basic_len).max(n);
        let mut table = CoeffTable::new(*sys);
        table.extend_to(2 * r_max)?;

        // D^r(u) by expansion against repeated stepping.
        let (tuples, exhaustive) = tuples_to_check(sys, 1 << 12, samples, seed);
        for u in &tuples {
            let mut stepped = u.clone();
            for r in 0..=r_max {
                let expanded = table.apply(u, r)?;
                if expanded != stepped {
                    return Ok(fail(json!({ "identity": "expansion", "tuple": u, "r": r })));
                }
                stepped = sys.step(&stepped)?;
            }
        }

        // Pascal's rule mod m, exact up to row n.
        let mut pascal = vec![1 % m];
        for r in 0..=n {
            if r > 0 {
                let mut next = vec![1 % m; r + 1];
                for i in 1..r {
                    next[i] = sys.add_mod(pascal[i - 1], pascal[i]);
                }
                pascal = next;
            }
            let binom = |t: usize| pascal.get(t).copied().unwrap_or(0);
            for s in 1..=n as i64 {
                let want = if r == n && s == 1 {
                    2 % m
                } else {
                    binom(s as usize - 1)
                };
                if cell(&table, r, s) != want {
                    return Ok(fail(json!({ "identity": "binomial_form", "r": r, "s": s })));
                }
            }
        }

        for r in 0..=r_max {
            for s in 1..=n as i64 {
                let a = cell(&table, r, s);
                if a != cell(&table, r, r as i64 - s + 2) {
                    return Ok(fail(json!({ "identity": "symmetry", "r": r, "s": s })));
                }
                if let Some(k) = sys.pow2_n().filter(|&k| k >= 1) {
                    let half = 1i64 << (k - 1);
                    if cell(&table, r, s + half) != cell(&table, r, s - half) {
                        return Ok(fail(json!({ "identity": "half_period_shift", "r": r, "s": s })));
                    }
                }
            }
        }

        for t in 0..=r_max {
            for r in 0..=r_max {
                for s in 1..=n as i64 {
                    let conv = (1..=n as i64).fold(0, |acc, i| {
                        sys.add_mod(acc, sys.mul_mod(cell(&table, t, i), cell(&table, r, s - i + 1)))
                    });
                    if conv != cell(&table, r + t, s) {
                        return Ok(fail(json!({ "identity": "convolution", "r": r, "t": t, "s": s })));
                    }
                }
            }
        }

        Ok(Outcome::Pass(Some(json!({
            "rows": r_max,
            "tuples": tuples.len(),
            "exhaustive": exhaustive,
        }))))
    })
}

/// Sweep parameters for [`run_suite`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub k_max: u32,
    pub l_max: u32,
    pub j_max: u32,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub caps: Caps,
    /// Moduli and lengths for the whole-space structure checks; pairs with
    /// `m^n` above [`EXHAUSTIVE_LIMIT`] are left out.
    pub structure_moduli: Vec<u64>,
    pub structure_lengths: RangeInclusive<usize>,
    pub oracle_n_max: u64,
    pub oracle_l_max: u32,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            k_max: 5,
            l_max: 6,
            j_max: 16,
            n_max: 16,
            samples: 100,
            seed: 0,
            caps: Caps::default(),
            structure_moduli: vec![2, 3, 4, 5, 6],
            structure_lengths: 1..=8,
            oracle_n_max: 1 << 12,
            oracle_l_max: 8,
        }
    }
}

impl SuiteConfig {
    pub fn structure_systems(&self) -> Vec<DucciSystem> {
        let mut out = Vec::new();
        for &m in &self.structure_moduli {
            for n in self.structure_lengths.clone() {
                if let Ok(sys) = DucciSystem::new(m, n) {
                    if sys.state_count().is_some_and(|c| c <= EXHAUSTIVE_LIMIT) {
                        out.push(sys);
                    }
                }
            }
        }
        out
    }

    pub fn coefficient_systems(&self) -> Vec<DucciSystem> {
        [(4, 4), (2, 8), (3, 5), (6, 3), (8, 4), (5, 6)]
            .into_iter()
            .map(|(m, n)| DucciSystem::new(m, n).unwrap())
            .collect()
    }
}

/// Families of checks, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckFamily {
    Main,
    LowerBound,
    Wong,
    TrivialKernel,
    Subgroup,
    Predecessors,
    Maximality,
    Endomorphism,
    Binomial,
    BinomialOracle,
    Lemma1,
    Lemma2,
    Claim,
    KnownL2,
    Coefficients,
}

impl CheckFamily {
    pub const ALL: [CheckFamily; 15] = [
        CheckFamily::Main,
        CheckFamily::LowerBound,
        CheckFamily::Wong,
        CheckFamily::TrivialKernel,
        CheckFamily::Subgroup,
        CheckFamily::Predecessors,
        CheckFamily::Maximality,
        CheckFamily::Endomorphism,
        CheckFamily::Binomial,
        CheckFamily::BinomialOracle,
        CheckFamily::Lemma1,
        CheckFamily::Lemma2,
        CheckFamily::Claim,
        CheckFamily::KnownL2,
        CheckFamily::Coefficients,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckFamily::Main => "main",
            CheckFamily::LowerBound => "lower-bound",
            CheckFamily::Wong => "wong",
            CheckFamily::TrivialKernel => "trivial-kernel",
            CheckFamily::Subgroup => "subgroup",
            CheckFamily::Predecessors => "preds",
            CheckFamily::Maximality => "maximality",
            CheckFamily::Endomorphism => "endomorphism",
            CheckFamily::Binomial => "binomial",
            CheckFamily::BinomialOracle => "binom-oracle",
            CheckFamily::Lemma1 => "lemma1",
            CheckFamily::Lemma2 => "lemma2",
            CheckFamily::Claim => "claim",
            CheckFamily::KnownL2 => "known-l2",
            CheckFamily::Coefficients => "coeff",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn run(self, cfg: &SuiteConfig) -> Vec<CheckReport> {
        let ks = 1..=cfg.k_max;
        let ls = 1..=cfg.l_max;
        let caps = cfg.caps;
        match self {
            CheckFamily::Main => verify_main_theorem(ks, ls, caps),
            CheckFamily::LowerBound => pairs(&ks, &ls)
                .into_iter()
                .map(|(k, l)| verify_length_lower_bound(k, l))
                .collect(),
            CheckFamily::Wong => verify_wong_bound(ks, ls, cfg.samples, cfg.seed),
            CheckFamily::TrivialKernel => {
                // Only pairs whose state space is enumerable.
                let feasible = pairs(&ks, &ls)
                    .into_iter()
                    .filter(|&(k, l)| (l as u64) << k <= caps.max_states.ilog2() as u64);
                feasible
                    .flat_map(|(k, l)| verify_trivial_kernel(k..=k, l..=l, caps))
                    .collect()
            }
            CheckFamily::Subgroup => cfg
                .structure_systems()
                .par_iter()
                .map(|s| verify_subgroup(s, caps))
                .collect(),
            CheckFamily::Predecessors => cfg
                .structure_systems()
                .par_iter()
                .map(|s| verify_predecessor_count(s, caps))
                .collect(),
            CheckFamily::Maximality => cfg
                .structure_systems()
                .par_iter()
                .map(|s| verify_orbit_maximality(s, caps))
                .collect(),
            CheckFamily::Endomorphism => cfg
                .structure_systems()
                .par_iter()
                .map(|s| verify_endomorphism(s, cfg.samples, cfg.seed))
                .collect(),
            CheckFamily::Binomial => verify_binomial_lemmas(2..=cfg.j_max),
            CheckFamily::BinomialOracle => {
                vec![verify_binom_oracle(cfg.oracle_n_max, cfg.oracle_l_max)]
            }
            CheckFamily::Lemma1 => verify_coeff_sum_lemma1(ks, ls),
            CheckFamily::Lemma2 => verify_coeff_sum_lemma2(2..=cfg.k_max, 3..=cfg.l_max),
            CheckFamily::Claim => verify_claim_g(2..=cfg.k_max, 2..=cfg.l_max),
            CheckFamily::KnownL2 => verify_known_l2(1..=cfg.n_max, caps),
            CheckFamily::Coefficients => cfg
                .coefficient_systems()
                .par_iter()
                .map(|s| verify_coeff_identities(s, cfg.samples, cfg.seed, caps))
                .collect(),
        }
    }
}

/// Runs the given families concurrently; reports come back sorted by
/// `(check_id, parameters)`.
pub fn run_suite(cfg: &SuiteConfig, families: &[CheckFamily]) -> Vec<CheckReport> {
    let mut reports: Vec<CheckReport> = families
        .par_iter()
        .flat_map(|f| f.run(cfg))
        .collect();
    reports.sort_by(|a, b| {
        (a.check_id, &a.parameters).cmp(&(b.check_id, &b.parameters))
    });
    reports
}

/// 0 when every verdict is pass or hypothesis-skip, 1 on any failure,
/// otherwise 3 when some point exceeded a cap.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else if reports.iter().any(|r| r.verdict == Verdict::CapExceeded) {
        3
    } else {
        0
    }
}

/// Aligned per-check summary: counts by verdict and, when asked for, the
/// worst elapsed time.
pub fn summary_table(reports: &[CheckReport], with_timing: bool) -> String {
    #[derive(Default)]
    struct Row {
        pass: usize,
        fail: usize,
        skip: usize,
        cap: usize,
        worst: Duration,
    }
    let mut rows: BTreeMap<&str, Row> = BTreeMap::new();
    for r in reports {
        let row = rows.entry(r.check_id).or_default();
        match r.verdict {
            Verdict::Pass => row.pass += 1,
            Verdict::Fail => row.fail += 1,
            Verdict::HypothesisSkip => row.skip += 1,
            Verdict::CapExceeded => row.cap += 1,
        }
        row.worst = row.worst.max(r.elapsed);
    }
    let mut out = format!(
        "{:<22} {:>6} {:>6} {:>6} {:>6}",
        "check_id", "pass", "fail", "skip", "cap"
    );
    if with_timing {
        let _ = write!(out, " {:>12}", "worst_ms");
    }
    out.push('\n');
    for (id, row) in rows {
        let _ = write!(
            out,
            "{:<22} {:>6} {:>6} {:>6} {:>6}",
            id, row.pass, row.fail, row.skip, row.cap
        );
        if with_timing {
            let _ = write!(out, " {:>12.3}", row.worst.as_secs_f64() * 1e3);
        }
        out.push('\n');
    }
    out
}
