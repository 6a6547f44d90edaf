//! Learning-rate schedule: linear warmup into cosine annealing.
//!
//! Warmup covers the first ceil(warmup_fraction · total) steps, climbing
//! linearly so its last step reaches the base rate exactly. The cosine phase
//! then decays over the remaining steps and hits exactly zero on the final
//! step of the run. (With warmup_fraction = 1 there is no cosine phase and
//! the run ends at the base rate.)

/// Rate for `step` (0-based) out of `total` steps. Steps past the end, and
/// degenerate shapes (a cosine phase of a single step), yield zero.
pub fn lr_at(step: usize, total: usize, base_lr: f64, warmup_fraction: f64) -> f64 {
    if total == 0 || step >= total {
        return 0.0;
    }
    let warmup = libm::ceil(warmup_fraction * total as f64) as usize;
    if step < warmup {
        return base_lr * (step + 1) as f64 / warmup as f64;
    }
    let denom = total - 1 - warmup;
    let progress = if denom == 0 { 1.0 } else { (step - warmup) as f64 / denom as f64 };
    base_lr * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * progress))
}
