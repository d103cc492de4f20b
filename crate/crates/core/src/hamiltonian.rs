//! Device Hamiltonians restricted to one invariant block.
//!
//! In the canonical block ordering every Hamiltonian only hops between
//! neighbouring basis vectors, so a block is a real symmetric tridiagonal
//! matrix with zero diagonal, stored as its sub-diagonal.

use crate::error::{Error, Result};
use crate::fock_space::{BlockCharge, DeviceKind, InvariantBlock};
use crate::tridiag::{eigh_tridiagonal, TridiagonalEigen};

/// The Hamiltonian of one block plus, once computed, its eigendecomposition.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    block: InvariantBlock,
    sub_diagonal: Vec<f64>,
    spectrum: Option<TridiagonalEigen>,
}

/// Coupling between basis vectors `m` and `m + 1` of `block`.
fn coupling(block: &InvariantBlock, m: usize) -> f64 {
    let m = m as f64;
    match (block.device(), block.charge()) {
        (DeviceKind::BeamSplitter, BlockCharge::Total(n)) => ((m + 1.0) * (n as f64 - m)).sqrt(),
        (DeviceKind::DegenerateAmp, BlockCharge::Total(n)) => {
            let na = n as f64 - 2.0 * m;
            (na * (na - 1.0) * (m + 1.0)).sqrt()
        }
        (DeviceKind::NondegenerateAmp, BlockCharge::Pair { doubled, k }) => {
            let na = k as f64 - m;
            let nb = (doubled - k) as f64 - m;
            (na * nb * (m + 1.0)).sqrt()
        }
        _ => unreachable!("blocks are validated on construction"),
    }
}

impl BlockOperator {
    /// Builds the tridiagonal Hamiltonian of `block` for `device`.
    pub fn assemble(device: DeviceKind, block: &InvariantBlock) -> Result<Self> {
        if block.device() != device {
            return Err(Error::Contract(format!(
                "block {:?} belongs to {}, not {device}",
                block.charge(),
                block.device()
            )));
        }
        let sub_diagonal = (0..block.dim().saturating_sub(1)).map(|m| coupling(block, m)).collect();
        Ok(BlockOperator { block: *block, sub_diagonal, spectrum: None })
    }

    pub fn block(&self) -> &InvariantBlock {
        &self.block
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    pub fn sub_diagonal(&self) -> &[f64] {
        &self.sub_diagonal
    }

    /// Dense copy of the block matrix, row-major `dim × dim`.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut h = nalgebra::DMatrix::zeros(n, n);
        for (m, &g) in self.sub_diagonal.iter().enumerate() {
            h[(m, m + 1)] = g;
            h[(m + 1, m)] = g;
        }
        h
    }

    /// Computes and stores the eigendecomposition; a no-op if already present.
    pub fn eigendecompose(mut self) -> Result<Self> {
        if self.spectrum.is_none() {
            let diag = vec![0.0; self.dim()];
            self.spectrum = Some(eigh_tridiagonal(&diag, &self.sub_diagonal)?);
        }
        Ok(self)
    }

    pub fn spectrum(&self) -> Option<&TridiagonalEigen> {
        self.spectrum.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_space::{decompose, BasisVector};
    use nalgebra::DMatrix;

    fn block(device: DeviceKind, charge: BlockCharge) -> InvariantBlock {
        InvariantBlock::new(device, charge).unwrap()
    }

    fn eigenvalues(device: DeviceKind, charge: BlockCharge) -> Vec<f64> {
        BlockOperator::assemble(device, &block(device, charge))
            .unwrap()
            .eigendecompose()
            .unwrap()
            .spectrum()
            .unwrap()
            .eigenvalues
            .clone()
    }

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn small_blocks() {
        let bs = BlockOperator::assemble(DeviceKind::BeamSplitter, &block(DeviceKind::BeamSplitter, BlockCharge::Total(1))).unwrap();
        assert_eq!(bs.sub_diagonal(), &[1.0]);
        close(&eigenvalues(DeviceKind::BeamSplitter, BlockCharge::Total(1)), &[-1.0, 1.0]);

        let dp = BlockOperator::assemble(DeviceKind::DegenerateAmp, &block(DeviceKind::DegenerateAmp, BlockCharge::Total(2))).unwrap();
        close(dp.sub_diagonal(), &[2f64.sqrt()]);
        close(&eigenvalues(DeviceKind::DegenerateAmp, BlockCharge::Total(2)), &[-(2f64.sqrt()), 2f64.sqrt()]);

        let np_charge = BlockCharge::Pair { doubled: 2, k: 1 };
        close(&eigenvalues(DeviceKind::NondegenerateAmp, np_charge), &[-1.0, 1.0]);
    }

    #[test]
    fn three_by_three_blocks() {
        close(&eigenvalues(DeviceKind::BeamSplitter, BlockCharge::Total(2)), &[-2.0, 0.0, 2.0]);
        let dp = BlockOperator::assemble(DeviceKind::DegenerateAmp, &block(DeviceKind::DegenerateAmp, BlockCharge::Total(4))).unwrap();
        close(dp.sub_diagonal(), &[12f64.sqrt(), 2.0]);
        close(&eigenvalues(DeviceKind::DegenerateAmp, BlockCharge::Total(4)), &[-4.0, 0.0, 4.0]);
    }

    #[test]
    fn dimension_one_is_zero() {
        let eig = eigenvalues(DeviceKind::DegenerateAmp, BlockCharge::Total(1));
        assert_eq!(eig, vec![0.0]);
    }

    #[test]
    fn wrong_device_is_a_contract_violation() {
        let b = block(DeviceKind::BeamSplitter, BlockCharge::Total(3));
        assert!(matches!(BlockOperator::assemble(DeviceKind::DegenerateAmp, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn reconstruction_and_symmetric_spectrum() {
        for device in DeviceKind::ALL {
            let max = if device == DeviceKind::NondegenerateAmp { 60 } else { 100 };
            for b in decompose(device, max).blocks().iter().filter(|b| b.dim() <= 50) {
                let op = BlockOperator::assemble(device, b).unwrap().eigendecompose().unwrap();
                let h = op.to_dense();
                assert_eq!(h, h.transpose());
                let eig = op.spectrum().unwrap();
                let scale = h.amax().max(1.0);
                assert!((eig.reconstruct() - &h).amax() <= 1e-12 * scale * 10.0);
                if device != DeviceKind::DegenerateAmp {
                    let lam = &eig.eigenvalues;
                    let n = lam.len();
                    for k in 0..n {
                        assert!((lam[k] + lam[n - 1 - k]).abs() < 1e-9 * scale, "{device} {:?}", b.charge());
                    }
                }
            }
        }
    }

    // ---- brute-force oracle: full Hamiltonian from ladder operators ----

    fn ladder_apply(device: DeviceKind, v: &[u32]) -> Vec<(Vec<u32>, f64)> {
        // Returns H|v> as a list of (target, amplitude), built term by term.
        let lower = |occ: &mut Vec<u32>, mode: usize| -> Option<f64> {
            if occ[mode] == 0 {
                None
            } else {
                let f = (occ[mode] as f64).sqrt();
                occ[mode] -= 1;
                Some(f)
            }
        };
        let raise = |occ: &mut Vec<u32>, mode: usize| -> f64 {
            occ[mode] += 1;
            (occ[mode] as f64).sqrt()
        };
        // Each term: sequence of (mode, is_raise), applied right to left.
        let terms: Vec<Vec<(usize, bool)>> = match device {
            DeviceKind::BeamSplitter => vec![vec![(1, true), (0, false)], vec![(0, true), (1, false)]],
            DeviceKind::DegenerateAmp => vec![
                vec![(1, true), (0, false), (0, false)],
                vec![(0, true), (0, true), (1, false)],
            ],
            DeviceKind::NondegenerateAmp => vec![
                vec![(2, true), (1, false), (0, false)],
                vec![(0, true), (1, true), (2, false)],
            ],
        };
        let mut out = Vec::new();
        for term in terms {
            let mut occ = v.to_vec();
            let mut amp = 1.0;
            let mut alive = true;
            for &(mode, up) in term.iter().rev() {
                if up {
                    amp *= raise(&mut occ, mode);
                } else if let Some(f) = lower(&mut occ, mode) {
                    amp *= f;
                } else {
                    alive = false;
                    break;
                }
            }
            if alive {
                out.push((occ, amp));
            }
        }
        out
    }

    #[test]
    fn brute_force_block_equivalence() {
        for device in DeviceKind::ALL {
            for max_charge in 0..=12u32 {
                let dec = decompose(device, max_charge);
                // Flatten in block order and build the full matrix from ladder action.
                let basis: Vec<BasisVector> = dec.blocks().iter().flat_map(|b| b.basis().collect::<Vec<_>>()).collect();
                let n = basis.len();
                let pos = |bv: &BasisVector| basis.iter().position(|x| x == bv);
                let mut full = DMatrix::<f64>::zeros(n, n);
                for (j, bv) in basis.iter().enumerate() {
                    for (target, amp) in ladder_apply(device, bv.occupations()) {
                        let t = BasisVector::new(&target);
                        // Charge conservation means the target is always in range.
                        let i = pos(&t).expect("H leaves the charge sector");
                        full[(i, j)] += amp;
                    }
                }
                let mut offset = 0;
                let mut blockwise = DMatrix::<f64>::zeros(n, n);
                for b in dec.blocks() {
                    let h = BlockOperator::assemble(device, b).unwrap().to_dense();
                    blockwise.view_mut((offset, offset), (b.dim(), b.dim())).copy_from(&h);
                    offset += b.dim();
                }
                assert!((full - blockwise).amax() < 1e-12, "{device} {max_charge}");
            }
        }
    }
}
