//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use paramp::state_prep::default_max_charge;
use paramp::{decompose, product_state, BasisVector, BlockOperator, DeviceKind, MultiModeState, SingleModeSpec};


/// Truncated annihilation operator on `0..dim`.
pub fn lowering(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// Each Hamiltonian term as one single-mode operator per mode.
fn terms(device: DeviceKind, cut: usize) -> Vec<Vec<DMatrix<f64>>> {
    let a = lowering(cut);
    let ad = a.transpose();
    match device {
        DeviceKind::BeamSplitter => vec![vec![a.clone(), ad.clone()], vec![ad, a]],
        DeviceKind::DegenerateAmp => vec![vec![&a * &a, ad.clone()], vec![&ad * &ad, a]],
        DeviceKind::NondegenerateAmp => vec![vec![a.clone(), a.clone(), ad.clone()], vec![ad.clone(), ad, a]],
    }
}

/// Largest per-block deviation between the assembled block Hamiltonians and
/// matrix elements of the ladder-operator Hamiltonian, for every block up to
/// `max_charge`.
pub fn block_equivalence_error(device: DeviceKind, max_charge: u32) -> f64 {
    let cut = max_charge as usize + 2;
    let ops = terms(device, cut);
    let element = |bra: &BasisVector, ket: &BasisVector| -> f64 {
        ops.iter()
            .map(|term| {
                term.iter()
                    .enumerate()
                    .map(|(m, op)| op[(bra.get(m) as usize, ket.get(m) as usize)])
                    .product::<f64>()
            })
            .sum()
    };
    let dec = decompose(device, max_charge);
    let dense: Vec<DMatrix<f64>> =
        dec.blocks().iter().map(|b| BlockOperator::assemble(device, b).unwrap().to_dense()).collect();
    let basis: Vec<(usize, BasisVector)> = dec
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.basis().map(move |v| (i, v)).collect::<Vec<_>>())
        .collect();
    let mut worst = 0.0f64;
    for (bi, bra) in &basis {
        for (bj, ket) in &basis {
            let want = element(bra, ket);
            let got = if bi == bj {
                let block = dec.block(*bi);
                dense[*bi][(block.index_of(bra).unwrap(), block.index_of(ket).unwrap())]
            } else {
                0.0
            };
            worst = worst.max((want - got).abs());
        }
    }
    worst
}

pub fn initial(device: DeviceKind, signal: SingleModeSpec, beta: Complex64) -> MultiModeState {
    let signals = vec![signal; device.mode_count() - 1];
    let pump = SingleModeSpec::Coherent(beta);
    let dec = Arc::new(decompose(device, default_max_charge(device, &signals, &pump)));
    product_state(&signals, &pump, dec, 1e-10).unwrap()
}

/// Expectations of the conserved combinations of each device.
pub fn charges(state: &MultiModeState) -> Vec<f64> {
    let mut n = [0.0f64; 3];
    state.for_each_amplitude(|occ, z| {
        for (k, &o) in occ.iter().enumerate() {
            n[k] += o as f64 * z.norm_sqr();
        }
    });
    match state.device() {
        DeviceKind::BeamSplitter => vec![n[0] + n[1]],
        DeviceKind::DegenerateAmp => vec![n[0] + 2.0 * n[1]],
        DeviceKind::NondegenerateAmp => vec![n[0] - n[1], n[0] + n[2], n[1] + n[2]],
    }
}

pub fn distance(x: &MultiModeState, y: &MultiModeState) -> f64 {
    x.blocks()
        .iter()
        .zip(y.blocks())
        .flat_map(|(p, q)| p.amps.iter().zip(&q.amps).map(|(a, b)| (a - b).norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

