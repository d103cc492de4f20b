//! Exact evolution `exp(−iĤτ)` block by block through cached spectra.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock_space::DeviceKind;
use crate::hamiltonian::BlockOperator;
use crate::state_prep::{BlockAmplitudes, MultiModeState};

/// Eigendecomposed block Hamiltonians for the populated blocks of a state.
#[derive(Debug, Clone)]
pub struct EvolutionPlan {
    device: DeviceKind,
    /// `(block index, operator)`, sorted by block index.
    operators: Vec<(usize, Arc<BlockOperator>)>,
}

impl EvolutionPlan {
    /// Assembles and diagonalizes (in parallel) every block populated in `state`.
    pub fn for_state(state: &MultiModeState) -> Result<Self> {
        let device = state.device();
        let dec = state.decomposition();
        let operators = state
            .blocks()
            .par_iter()
            .map(|b| {
                let op = BlockOperator::assemble(device, dec.block(b.block))?.eigendecompose()?;
                Ok((b.block, Arc::new(op)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvolutionPlan { device, operators })
    }

    pub fn device(&self) -> DeviceKind {
        self.device
    }

    pub fn operators(&self) -> &[(usize, Arc<BlockOperator>)] {
        &self.operators
    }

    fn operator_for(&self, block: usize) -> Result<&Arc<BlockOperator>> {
        self.operators
            .binary_search_by_key(&block, |(b, _)| *b)
            .map(|i| &self.operators[i].1)
            .map_err(|_| Error::Contract(format!("plan has no operator for block {block}")))
    }

    /// Projects `state` onto the block eigenbases once, for repeated evaluation.
    pub fn prepare(&self, state: &MultiModeState) -> Result<PreparedEvolution> {
        if state.device() != self.device {
            return Err(Error::Contract(format!(
                "plan for {} applied to a {} state",
                self.device,
                state.device()
            )));
        }
        let blocks = state
            .blocks()
            .iter()
            .map(|b| {
                let op = self.operator_for(b.block)?;
                if op.dim() != b.amps.len() {
                    return Err(Error::Contract(format!(
                        "block {} has dimension {}, state carries {}",
                        b.block,
                        op.dim(),
                        b.amps.len()
                    )));
                }
                let spec = op.spectrum().expect("plans hold eigendecomposed operators");
                let weights = project(&spec.eigenvectors, &b.amps);
                Ok(SpectralBlock { block: b.block, op: op.clone(), weights })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedEvolution { initial: state.clone(), blocks })
    }
}

/// `Vᵀ a` for real orthogonal `V` (columns are eigenvectors).
fn project(v: &DMatrix<f64>, amps: &[Complex64]) -> Vec<Complex64> {
    let n = amps.len();
    (0..n)
        .map(|k| {
            let col = v.column(k);
            col.iter().zip(amps).map(|(&x, a)| a * x).sum()
        })
        .collect()
}

#[derive(Debug, Clone)]
struct SpectralBlock {
    block: usize,
    op: Arc<BlockOperator>,
    /// Initial amplitudes in the eigenbasis.
    weights: Vec<Complex64>,
}

impl SpectralBlock {
    fn at(&self, tau: f64) -> Vec<Complex64> {
        let n = self.weights.len();
        let spec = self.op.spectrum().expect("plans hold eigendecomposed operators");
        let phased: Vec<Complex64> = spec
            .eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(&lam, &w)| w * Complex64::from_polar(1.0, -lam * tau))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        // Column-major walk over V.
        for (k, p) in phased.iter().enumerate() {
            let col = spec.eigenvectors.column(k);
            for (o, &x) in out.iter_mut().zip(col.iter()) {
                *o += p * x;
            }
        }
        out
    }
}

/// A state expressed in the eigenbases of its blocks; evaluating it at any
/// `τ` costs one matrix-vector product per block.
#[derive(Debug, Clone)]
pub struct PreparedEvolution {
    initial: MultiModeState,
    blocks: Vec<SpectralBlock>,
}

impl PreparedEvolution {
    pub fn initial(&self) -> &MultiModeState {
        &self.initial
    }

    /// The exact state at rescaled time `tau`.
    pub fn at(&self, tau: f64) -> MultiModeState {
        let blocks = self
            .blocks
            .par_iter()
            .map(|b| BlockAmplitudes { block: b.block, amps: b.at(tau) })
            .collect();
        self.initial.with_blocks(blocks)
    }
}

/// `exp(−iĤτ)|state⟩`; the input is left untouched.
pub fn evolve(state: &MultiModeState, plan: &EvolutionPlan, tau: f64) -> Result<MultiModeState> {
    Ok(plan.prepare(state)?.at(tau))
}

/// Heisenberg-picture beam-splitter amplitudes: `(α cos τ − iβ sin τ, β cos τ − iα sin τ)`.
pub fn heisenberg_bs_oracle(alpha: Complex64, beta: Complex64, tau: f64) -> (Complex64, Complex64) {
    let (s, c) = tau.sin_cos();
    let i = Complex64::i();
    (alpha * c - i * beta * s, beta * c - i * alpha * s)
}
