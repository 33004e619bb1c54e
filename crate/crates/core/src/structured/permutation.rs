//! Bijections of the positive integers, evaluated lazily.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Indices beyond this are rejected instead of silently wrapping.
pub const INDEX_CAP: u64 = 1 << 32;

/// Translation by a fixed offset on each residue class modulo `period`, with a
/// finite table of exceptional images. The shift example reads
/// `j odd → j+2`, `j even → j-2`, exception `2 → 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueShift {
    period: u64,
    /// `shifts[r]` is the offset applied to `j` with `j % period == r`.
    shifts: Vec<i64>,
    exceptions: BTreeMap<u64, u64>,
    inverse_exceptions: BTreeMap<u64, u64>,
}

impl ResidueShift {
    pub fn new(period: u64, shifts: Vec<i64>, exceptions: BTreeMap<u64, u64>) -> Result<Self> {
        if period == 0 || shifts.len() as u64 != period {
            return Err(Error::Config(format!(
                "residue shift needs one offset per residue class (period {period}, got {})",
                shifts.len()
            )));
        }
        let mut inverse_exceptions = BTreeMap::new();
        for (&j, &t) in &exceptions {
            if j == 0 || t == 0 {
                return Err(Error::Config("exception indices start at 1".into()));
            }
            if inverse_exceptions.insert(t, j).is_some() {
                return Err(Error::Config(format!(
                    "two exceptions map onto index {t}"
                )));
            }
        }
        Ok(ResidueShift {
            period,
            shifts,
            exceptions,
            inverse_exceptions,
        })
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, u64> {
        &self.exceptions
    }

    fn forward(&self, j: u64) -> Result<u64> {
        if let Some(&t) = self.exceptions.get(&j) {
            return Ok(t);
        }
        let shift = self.shifts[(j % self.period) as usize];
        let t = j as i128 + shift as i128;
        if t < 1 {
            return Err(Error::Domain(format!(
                "residue rule sends {j} to {t}, outside the positive integers"
            )));
        }
        Ok(t as u64)
    }

    fn backward(&self, i: u64) -> Result<u64> {
        if let Some(&j) = self.inverse_exceptions.get(&i) {
            return Ok(j);
        }
        let mut found = None;
        for (r, &shift) in self.shifts.iter().enumerate() {
            let j = i as i128 - shift as i128;
            if j < 1 {
                continue;
            }
            let j = j as u64;
            if j % self.period != r as u64 || self.exceptions.contains_key(&j) {
                continue;
            }
            if found.replace(j).is_some() {
                return Err(Error::Domain(format!(
                    "residue rule is not injective: several preimages of {i}"
                )));
            }
        }
        found.ok_or_else(|| {
            Error::Domain(format!("residue rule is not surjective: {i} has no preimage"))
        })
    }
}

/// The permutations the laboratory knows how to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermutationKind {
    Identity,
    /// Successor map `z ↦ z+1` on the integers transported to the positive
    /// integers by the zigzag enumeration `0,1,-1,2,-2,... ↦ 1,2,3,4,5,...`.
    /// It has one bi-infinite orbit, so it is aperiodic.
    Zigzag,
    ResidueShift(ResidueShift),
}

/// Zigzag enumeration `φ: ℤ → ℕ`, `φ(z) = 2z` for `z > 0`, `1 - 2z` otherwise.
fn zigzag(z: i64) -> u64 {
    if z > 0 {
        2 * z as u64
    } else {
        (1 - 2 * z) as u64
    }
}

fn zigzag_inverse(j: u64) -> i64 {
    if j % 2 == 0 {
        (j / 2) as i64
    } else {
        -(((j - 1) / 2) as i64)
    }
}

impl PermutationKind {
    pub fn forward(&self, j: u64) -> Result<u64> {
        check_index(j)?;
        let t = match self {
            PermutationKind::Identity => j,
            PermutationKind::Zigzag => zigzag(zigzag_inverse(j) + 1),
            PermutationKind::ResidueShift(r) => r.forward(j)?,
        };
        check_index(t)?;
        Ok(t)
    }

    pub fn backward(&self, i: u64) -> Result<u64> {
        check_index(i)?;
        let t = match self {
            PermutationKind::Identity => i,
            PermutationKind::Zigzag => zigzag(zigzag_inverse(i) - 1),
            PermutationKind::ResidueShift(r) => r.backward(i)?,
        };
        check_index(t)?;
        Ok(t)
    }

    pub fn description(&self) -> String {
        match self {
            PermutationKind::Identity => "identity".to_string(),
            PermutationKind::Zigzag => "zigzag successor".to_string(),
            PermutationKind::ResidueShift(r) => {
                let mut s = format!("residue shift mod {} by {:?}", r.period, r.shifts);
                if !r.exceptions.is_empty() {
                    let ex: Vec<String> =
                        r.exceptions.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                    s.push_str(&format!(" except {}", ex.join(",")));
                }
                s
            }
        }
    }
}

fn check_index(j: u64) -> Result<()> {
    if j == 0 {
        return Err(Error::Domain("basis indices start at 1".into()));
    }
    if j > INDEX_CAP {
        return Err(Error::Overflow(format!("index {j} exceeds the cap 2^32")));
    }
    Ok(())
}

/// A permutation together with an orientation; `inverted` swaps the roles of
/// the forward and backward maps.
#[derive(Clone, PartialEq, Eq)]
pub struct PermutationRule {
    kind: std::sync::Arc<PermutationKind>,
    inverted: bool,
}

impl PermutationRule {
    pub fn new(kind: PermutationKind) -> Self {
        PermutationRule {
            kind: std::sync::Arc::new(kind),
            inverted: false,
        }
    }

    pub fn kind(&self) -> &PermutationKind {
        &self.kind
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn inverse(&self) -> Self {
        PermutationRule {
            kind: self.kind.clone(),
            inverted: !self.inverted,
        }
    }

    pub fn forward(&self, j: u64) -> Result<u64> {
        if self.inverted {
            self.kind.backward(j)
        } else {
            self.kind.forward(j)
        }
    }

    pub fn backward(&self, i: u64) -> Result<u64> {
        if self.inverted {
            self.kind.forward(i)
        } else {
            self.kind.backward(i)
        }
    }

    /// `σ^n(j)` for signed `n`.
    pub fn power(&self, n: i64, j: u64) -> Result<u64> {
        let mut idx = j;
        for _ in 0..n.unsigned_abs() {
            idx = if n > 0 {
                self.forward(idx)?
            } else {
                self.backward(idx)?
            };
        }
        Ok(idx)
    }

    pub fn description(&self) -> String {
        let base = self.kind.description();
        if self.inverted {
            format!("inverse of {base}")
        } else {
            base
        }
    }

    /// Checks `backward∘forward = id` and `forward∘backward = id` on `1..=horizon`
    /// and injectivity of `forward` on that range.
    pub fn verify(&self, horizon: u64) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(horizon as usize);
        for j in 1..=horizon {
            let t = self.forward(j)?;
            if self.backward(t)? != j {
                return Err(Error::Domain(format!(
                    "{}: backward(forward({j})) != {j}",
                    self.description()
                )));
            }
            if self.forward(self.backward(j)?)? != j {
                return Err(Error::Domain(format!(
                    "{}: forward(backward({j})) != {j}",
                    self.description()
                )));
            }
            if !seen.insert(t) {
                return Err(Error::Domain(format!(
                    "{}: forward is not injective at {j}",
                    self.description()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PermutationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description())
    }
}
