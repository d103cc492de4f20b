//! Fock bases and their decomposition into invariant subspaces.
//!
//! Each device Hamiltonian commutes with one (beam splitter, degenerate
//! amplifier) or two (nondegenerate amplifier) photon-number charges. The
//! eigenspaces of those charges are finite-dimensional and invariant under
//! the evolution, so the whole computation can be carried out one block at a
//! time.
//!
//! Mode ordering is fixed per device:
//!
//! | device            | modes        | pump |
//! |-------------------|--------------|------|
//! | `BeamSplitter`    | `a, b`       | `b`  |
//! | `DegenerateAmp`   | `a, c`       | `c`  |
//! | `NondegenerateAmp`| `a, b, c`    | `c`  |

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The three devices whose interaction Hamiltonians are simulated.
///
/// The coupling constant is fixed to one; time is always the rescaled
/// interaction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    /// `ab† + a†b`
    BeamSplitter,
    /// `a²c† + a†²c`
    DegenerateAmp,
    /// `abc† + a†b†c`
    NondegenerateAmp,
}

impl DeviceKind {
    pub const ALL: [DeviceKind; 3] = [
        DeviceKind::BeamSplitter,
        DeviceKind::DegenerateAmp,
        DeviceKind::NondegenerateAmp,
    ];

    pub fn mode_count(self) -> usize {
        match self {
            DeviceKind::BeamSplitter | DeviceKind::DegenerateAmp => 2,
            DeviceKind::NondegenerateAmp => 3,
        }
    }

    /// Index of the pump mode.
    pub fn pump_mode(self) -> usize {
        self.mode_count() - 1
    }

    /// Indices of the signal (and idler) modes, i.e. everything but the pump.
    pub fn signal_modes(self) -> &'static [usize] {
        match self {
            DeviceKind::BeamSplitter | DeviceKind::DegenerateAmp => &[0],
            DeviceKind::NondegenerateAmp => &[0, 1],
        }
    }

    /// Short name used by the command line and in CSV output.
    pub fn short_name(self) -> &'static str {
        match self {
            DeviceKind::BeamSplitter => "bs",
            DeviceKind::DegenerateAmp => "dpa",
            DeviceKind::NondegenerateAmp => "npa",
        }
    }

    /// Charge (in the same units as [`BlockDecomposition::max_charge`]) of a
    /// product of per-mode occupations bounded by `max_occupation`.
    pub fn charge_bound(self, max_occupation: &[u32]) -> u32 {
        match self {
            DeviceKind::BeamSplitter => max_occupation[0] + max_occupation[1],
            DeviceKind::DegenerateAmp => max_occupation[0] + 2 * max_occupation[1],
            DeviceKind::NondegenerateAmp => {
                max_occupation[0] + max_occupation[1] + 2 * max_occupation[2]
            }
        }
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for DeviceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bs" | "beamsplitter" | "beam-splitter" => Ok(DeviceKind::BeamSplitter),
            "dpa" | "dp" | "degenerate" => Ok(DeviceKind::DegenerateAmp),
            "npa" | "np" | "nondegenerate" => Ok(DeviceKind::NondegenerateAmp),
            other => Err(Error::Parse(format!("unknown device `{other}` (expected bs|dpa|npa)"))),
        }
    }
}

/// Photon numbers of every mode of a device, in the device's mode order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisVector {
    occ: [u32; 3],
    len: u8,
}

impl BasisVector {
    pub fn new(occupations: &[u32]) -> Self {
        assert!(
            (1..=3).contains(&occupations.len()),
            "basis vectors carry one to three modes"
        );
        let mut occ = [0; 3];
        occ[..occupations.len()].copy_from_slice(occupations);
        BasisVector { occ, len: occupations.len() as u8 }
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occ[..self.len as usize]
    }

    pub fn mode_count(&self) -> usize {
        self.len as usize
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.occupations()[mode]
    }
}

impl fmt::Debug for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.occupations().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Eigenvalues of the conserved charges that label a block.
///
/// For the nondegenerate amplifier the first charge is stored doubled,
/// `n_a + n_b + 2 n_c`, so that half-integer sectors stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockCharge {
    /// `n_a + n_b` (beam splitter) or `n_a + 2 n_c` (degenerate amplifier).
    Total(u32),
    /// `doubled = n_a + n_b + 2 n_c`, `k = n_a + n_c`.
    Pair { doubled: u32, k: u32 },
}

impl BlockCharge {
    /// The primary (possibly doubled) charge, the quantity bounded by the cutoff.
    pub fn primary(&self) -> u32 {
        match *self {
            BlockCharge::Total(n) => n,
            BlockCharge::Pair { doubled, .. } => doubled,
        }
    }
}

/// Conserved charges of a Fock vector.
pub fn charge_of(device: DeviceKind, v: &BasisVector) -> Result<BlockCharge> {
    if v.mode_count() != device.mode_count() {
        return Err(Error::Contract(format!(
            "{device} expects {} modes, got {v:?}",
            device.mode_count()
        )));
    }
    let o = v.occupations();
    Ok(match device {
        DeviceKind::BeamSplitter => BlockCharge::Total(o[0] + o[1]),
        DeviceKind::DegenerateAmp => BlockCharge::Total(o[0] + 2 * o[1]),
        DeviceKind::NondegenerateAmp => BlockCharge::Pair {
            doubled: o[0] + o[1] + 2 * o[2],
            k: o[0] + o[2],
        },
    })
}

/// One invariant subspace.
///
/// The basis is indexed by `m`, the number of pump photons for the
/// amplifiers and the number of `a` photons for the beam splitter:
///
/// * beam splitter, charge `N`: `|m, N−m⟩`, `m ∈ [0, N]`
/// * degenerate amplifier, charge `N`: `|N−2m, m⟩`, `m ∈ [0, ⌊N/2⌋]`
/// * nondegenerate amplifier, charges `(D, K)`: `|K−m, D−K−m, m⟩`,
///   `m ∈ [0, min(K, D−K)]`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvariantBlock {
    device: DeviceKind,
    charge: BlockCharge,
    dim: usize,
}

impl InvariantBlock {
    pub fn new(device: DeviceKind, charge: BlockCharge) -> Result<Self> {
        let dim = match (device, charge) {
            (DeviceKind::BeamSplitter, BlockCharge::Total(n)) => n as usize + 1,
            (DeviceKind::DegenerateAmp, BlockCharge::Total(n)) => n as usize / 2 + 1,
            (DeviceKind::NondegenerateAmp, BlockCharge::Pair { doubled, k }) if k <= doubled => {
                k.min(doubled - k) as usize + 1
            }
            _ => {
                return Err(Error::Contract(format!(
                    "charge {charge:?} does not label a {device} block"
                )))
            }
        };
        Ok(InvariantBlock { device, charge, dim })
    }

    pub fn device(&self) -> DeviceKind {
        self.device
    }

    pub fn charge(&self) -> BlockCharge {
        self.charge
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupations of the `m`-th basis vector, written into `out`.
    #[inline]
    pub fn occupations_into(&self, m: usize, out: &mut [u32]) {
        debug_assert!(m < self.dim);
        let m = m as u32;
        match self.charge {
            BlockCharge::Total(n) => match self.device {
                DeviceKind::BeamSplitter => {
                    out[0] = m;
                    out[1] = n - m;
                }
                _ => {
                    out[0] = n - 2 * m;
                    out[1] = m;
                }
            },
            BlockCharge::Pair { doubled, k } => {
                out[0] = k - m;
                out[1] = doubled - k - m;
                out[2] = m;
            }
        }
    }

    pub fn basis_vector(&self, m: usize) -> BasisVector {
        let mut occ = [0u32; 3];
        self.occupations_into(m, &mut occ);
        BasisVector::new(&occ[..self.device.mode_count()])
    }

    pub fn basis(&self) -> impl Iterator<Item = BasisVector> + '_ {
        (0..self.dim).map(|m| self.basis_vector(m))
    }

    /// Position of `v` inside this block, if it belongs here.
    pub fn index_of(&self, v: &BasisVector) -> Option<usize> {
        match charge_of(self.device, v) {
            Ok(c) if c == self.charge => {}
            _ => return None,
        }
        let m = match self.device {
            DeviceKind::BeamSplitter => v.get(0),
            DeviceKind::DegenerateAmp => v.get(1),
            DeviceKind::NondegenerateAmp => v.get(2),
        } as usize;
        (m < self.dim).then_some(m)
    }
}

/// All invariant blocks of a device up to a charge cutoff.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    device: DeviceKind,
    max_charge: u32,
    blocks: Vec<InvariantBlock>,
}

impl BlockDecomposition {
    pub fn device(&self) -> DeviceKind {
        self.device
    }

    pub fn max_charge(&self) -> u32 {
        self.max_charge
    }

    pub fn blocks(&self) -> &[InvariantBlock] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> &InvariantBlock {
        &self.blocks[index]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Total number of basis vectors over all blocks.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Block position for a charge; `None` beyond the cutoff.
    pub fn block_index(&self, charge: BlockCharge) -> Option<usize> {
        if charge.primary() > self.max_charge {
            return None;
        }
        match (self.device, charge) {
            (DeviceKind::NondegenerateAmp, BlockCharge::Pair { doubled, k }) if k <= doubled => {
                let d = doubled as usize;
                Some(d * (d + 1) / 2 + k as usize)
            }
            (DeviceKind::NondegenerateAmp, _) => None,
            (_, BlockCharge::Total(n)) => Some(n as usize),
            _ => None,
        }
    }

    /// `(block index, position)` of a Fock vector; `None` beyond the cutoff.
    pub fn locate(&self, v: &BasisVector) -> Option<(usize, usize)> {
        let charge = charge_of(self.device, v).ok()?;
        let b = self.block_index(charge)?;
        let pos = self.blocks[b].index_of(v)?;
        Some((b, pos))
    }
}

/// Builds every invariant block whose (primary) charge is at most `max_charge`.
///
/// Blocks come out in ascending charge order; for the nondegenerate amplifier
/// the order is ascending `D`, then ascending `K ∈ [0, D]`.
pub fn decompose(device: DeviceKind, max_charge: u32) -> BlockDecomposition {
    let mut blocks = Vec::new();
    for n in 0..=max_charge {
        match device {
            DeviceKind::BeamSplitter | DeviceKind::DegenerateAmp => {
                blocks.push(InvariantBlock::new(device, BlockCharge::Total(n)).expect("valid charge"));
            }
            DeviceKind::NondegenerateAmp => {
                for k in 0..=n {
                    let charge = BlockCharge::Pair { doubled: n, k };
                    blocks.push(InvariantBlock::new(device, charge).expect("valid charge"));
                }
            }
        }
    }
    BlockDecomposition { device, max_charge, blocks }
}
