//! Adam over the four parameter blocks, with bias correction.
//!
//! Weight decay is coupled by default (added to the gradient before the
//! moment updates, the classic L2 form); the decoupled flag applies it as a
//! separate multiplicative shrink after the adaptive step instead.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::align::{AlignmentParams, ParamGrads, PARAM_BLOCKS};
use crate::types::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimError {
    NonFiniteGrad { block: &'static str },
    NonFiniteParam { block: &'static str },
}

impl fmt::Display for OptimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimError::NonFiniteGrad { block } => {
                write!(f, "non-finite gradient in block {block}")
            }
            OptimError::NonFiniteParam { block } => {
                write!(f, "non-finite parameter in block {block} after update")
            }
        }
    }
}

impl core::error::Error for OptimError {}

/// First and second moment estimates per parameter block, plus the step
/// counter driving bias correction. Blocks follow `PARAM_BLOCKS` order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub t: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(cfg: &RunConfig, params: &AlignmentParams) -> Self {
        let zeros: Vec<Vec<f64>> =
            params.blocks().iter().map(|b| vec![0.0; b.len()]).collect();
        AdamState {
            t: 0,
            m: zeros.clone(),
            v: zeros,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.eps,
        }
    }
}

/// One update. `decoupled` switches the weight-decay form; with decay 0 the
/// two are identical.
pub fn adam_step(
    params: &mut AlignmentParams,
    grads: &ParamGrads,
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
    decoupled: bool,
) -> Result<(), OptimError> {
    for (block, name) in grads.blocks().iter().zip(PARAM_BLOCKS) {
        if block.iter().any(|g| !g.is_finite()) {
            return Err(OptimError::NonFiniteGrad { block: name });
        }
    }

    state.t += 1;
    let bc1 = 1.0 - libm::pow(state.beta1, state.t as f64);
    let bc2 = 1.0 - libm::pow(state.beta2, state.t as f64);

    let mut blocks = params.blocks_mut();
    for (b, grad_block) in grads.blocks().iter().enumerate() {
        let theta = &mut blocks[b];
        let m = &mut state.m[b];
        let v = &mut state.v[b];
        for i in 0..grad_block.len() {
            let g = if decoupled || weight_decay == 0.0 {
                grad_block[i]
            } else {
                grad_block[i] + weight_decay * theta[i]
            };
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            theta[i] -= lr * m_hat / (libm::sqrt(v_hat) + state.eps);
            if decoupled && weight_decay != 0.0 {
                theta[i] -= lr * weight_decay * theta[i];
            }
        }
    }

    if let Some(block) = params.first_non_finite_block() {
        return Err(OptimError::NonFiniteParam { block });
    }
    Ok(())
}
