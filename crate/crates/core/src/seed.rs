//! Splittable seed derivation.
//!
//! A child seed is a pure function of the master seed and a task path, so
//! adding or reordering unrelated tasks never perturbs another task's stream.
//! The mixing is SplitMix64 applied over the master seed and each path
//! component, where string components are first folded with 64-bit FNV-1a.

/// One component of a task path.
#[derive(Debug, Clone, Copy)]
pub enum PathPart<'a> {
    Str(&'a str),
    Int(u64),
}

impl<'a> From<&'a str> for PathPart<'a> {
    fn from(s: &'a str) -> Self {
        PathPart::Str(s)
    }
}

impl From<u64> for PathPart<'_> {
    fn from(v: u64) -> Self {
        PathPart::Int(v)
    }
}

impl From<usize> for PathPart<'_> {
    fn from(v: usize) -> Self {
        PathPart::Int(v as u64)
    }
}

/// The SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive the seed for the task identified by `path` under `master`.
pub fn derive_seed(master: u64, path: &[PathPart<'_>]) -> u64 {
    let mut state = splitmix64(master);
    for part in path {
        let (tag, word) = match *part {
            PathPart::Str(s) => (0x5354_5200u64, fnv1a(s.as_bytes())),
            PathPart::Int(v) => (0x494e_5400u64, v),
        };
        state = splitmix64(state ^ splitmix64(word ^ tag));
    }
    state
}
