//! Deterministic replacement for the nondeterministic `choose` construct.
//!
//! Seeded mode picks `candidates[H(seed, step, call) mod n]` where `H` is
//! built from the splitmix64 finalizer:
//!
//! ```text
//! mix(z)  = splitmix64 finalizer of z + 0x9E3779B97F4A7C15
//! H(s,t,c) = mix(mix(mix(s) ^ t) ^ c)
//! ```
//!
//! `step` is the ASM step number and `call` counts `choose` invocations within
//! that step in agent evaluation order.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChooseMode {
    LowestId,
    Seeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChoosePolicy {
    pub mode: ChooseMode,
    pub seed: u64,
}

impl Default for ChoosePolicy {
    fn default() -> Self {
        ChoosePolicy::lowest_id()
    }
}

impl ChoosePolicy {
    pub fn lowest_id() -> Self {
        ChoosePolicy { mode: ChooseMode::LowestId, seed: 0 }
    }

    pub fn seeded(seed: u64) -> Self {
        ChoosePolicy { mode: ChooseMode::Seeded, seed }
    }

    /// Index into a candidate list of length `n`, or `None` when `n == 0`.
    pub fn pick_index(&self, n: usize, step: u64, call: u64) -> Option<usize> {
        if n == 0 {
            return None;
        }
        match self.mode {
            ChooseMode::LowestId => Some(0),
            ChooseMode::Seeded => Some((mix3(self.seed, step, call) % n as u64) as usize),
        }
    }

    /// Picks from candidates already sorted by identifier.
    pub fn choose<'a, T>(&self, candidates: &'a [T], step: u64, call: u64) -> Option<&'a T> {
        self.pick_index(candidates.len(), step, call)
            .map(|i| &candidates[i])
    }
}

pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix3(seed: u64, step: u64, call: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ step) ^ call)
}

impl fmt::Display for ChooseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChooseMode::LowestId => "lowest-id",
            ChooseMode::Seeded => "seeded",
        })
    }
}

impl FromStr for ChooseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowest-id" => Ok(ChooseMode::LowestId),
            "seeded" => Ok(ChooseMode::Seeded),
            other => Err(format!("unknown choose mode '{other}'")),
        }
    }
}

/// Per-step chooser handing out call indices.
#[derive(Debug)]
pub struct Chooser {
    policy: ChoosePolicy,
    step: u64,
    calls: u64,
}

impl Chooser {
    pub fn new(policy: ChoosePolicy, step: u64) -> Self {
        Chooser { policy, step, calls: 0 }
    }

    pub fn choose<'a, T>(&mut self, candidates: &'a [T]) -> Option<&'a T> {
        if candidates.is_empty() {
            return None;
        }
        let picked = self.policy.choose(candidates, self.step, self.calls);
        self.calls += 1;
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen from an independent Python evaluation of the same mixer.
    #[test]
    fn golden_mixer_values() {
        assert_eq!(mix3(42, 0, 0), 0x6310_bf04_d820_7f46);
        assert_eq!(mix3(42, 0, 1), 0xb682_ee25_ce24_109e);
        assert_eq!(mix3(42, 1, 0), 0x93be_8420_bb55_b94c);
        assert_eq!(mix3(7, 3, 2), 0x0947_3a69_3c47_3a79);
    }

    #[test]
    fn seeded_pick_golden() {
        let p = ChoosePolicy::seeded(42);
        assert_eq!(p.choose(&["a", "b", "c"], 0, 0), Some(&"c"));
        assert_eq!(p.choose(&["a", "b", "c"], 0, 1), Some(&"b"));
    }

    #[test]
    fn lowest_id_and_empty() {
        let p = ChoosePolicy::lowest_id();
        assert_eq!(p.choose(&["h1", "h2"], 5, 9), Some(&"h1"));
        let empty: [&str; 0] = [];
        assert_eq!(p.choose(&empty, 0, 0), None);
        assert_eq!(ChoosePolicy::seeded(1).choose(&empty, 0, 0), None);
    }

    #[test]
    fn chooser_counts_calls() {
        let mut c = Chooser::new(ChoosePolicy::seeded(42), 0);
        assert_eq!(c.choose(&["a", "b", "c"]), Some(&"c"));
        assert_eq!(c.choose(&["a", "b", "c"]), Some(&"b"));
    }
}
