//! Compact swap test between two real feature vectors.
//!
//! Register layout for input length `d` (zero-padded to a power of two):
//! qubit 0 is the ancilla, qubit 1 holds `(|c||0> - |m||1>) / sqrt(Z)`,
//! and qubits `2..n` hold `([c/|c|; m/|m|]) / sqrt(2)` where the
//! leading wire selects the `c` or `m` half. After `H(0)`, `CSWAP(0; 1, 2)`,
//! `H(0)` the ancilla reads `0` with probability
//! `P0 = (3 - 2|c||m|<m|c>/Z) / 4` where `Z = |c|^2 + |m|^2`.

use crate::qsim::{QsimError, StateVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use thiserror::Error;

/// Default number of ancilla shots per estimate.
pub const DEFAULT_SHOTS: u64 = 1000;

/// Vectors with norm below this are rejected.
pub const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwapTestError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vector has (near-)zero norm")]
    ZeroNormVector,
    #[error("empty input vectors")]
    Empty,
    #[error(transparent)]
    Simulator(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, SwapTestError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapEstimate {
    /// Probability (analytic or empirical) of reading the ancilla as `0`.
    pub p0: f64,
    /// Normalized inner product, clipped to `[-1, 1]`.
    pub inner_product: f64,
    /// `arccos(inner_product)`, in `[0, π]`.
    pub angle: f64,
    /// Shot count; `0` marks the analytic path.
    pub shots: u64,
    /// `|c|^2 + |m|^2`.
    pub z_norm: f64,
}

fn norms(c: &[f64], m: &[f64]) -> Result<(f64, f64)> {
    if c.len() != m.len() {
        return Err(SwapTestError::LengthMismatch(c.len(), m.len()));
    }
    if c.is_empty() {
        return Err(SwapTestError::Empty);
    }
    let nc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(nc >= MIN_NORM && nm >= MIN_NORM) {
        return Err(SwapTestError::ZeroNormVector);
    }
    Ok((nc, nm))
}

/// Ancilla-0 probability for a given overlap.
pub fn p0_from_overlap(overlap: f64, norm_c: f64, norm_m: f64) -> f64 {
    let z = norm_c * norm_c + norm_m * norm_m;
    (3.0 - 2.0 * norm_c * norm_m * overlap / z) / 4.0
}

/// Inverts [`p0_from_overlap`]; the result is not clipped.
pub fn overlap_from_p0(p0: f64, norm_c: f64, norm_m: f64) -> f64 {
    let z = norm_c * norm_c + norm_m * norm_m;
    (3.0 - 4.0 * p0) * z / (2.0 * norm_c * norm_m)
}

fn finish(p0: f64, raw: f64, shots: u64, z_norm: f64) -> OverlapEstimate {
    let inner_product = raw.clamp(-1.0, 1.0);
    OverlapEstimate {
        p0,
        inner_product,
        angle: inner_product.acos().clamp(0.0, PI),
        shots,
        z_norm,
    }
}

/// Exact overlap `c·m / (|c||m|)` with the matching ancilla probability.
pub fn overlap_analytic(c: &[f64], m: &[f64]) -> Result<OverlapEstimate> {
    let (nc, nm) = norms(c, m)?;
    let dot: f64 = c.iter().zip(m).map(|(a, b)| a * b).sum();
    let s = (dot / (nc * nm)).clamp(-1.0, 1.0);
    let z = nc * nc + nm * nm;
    Ok(finish(p0_from_overlap(s, nc, nm), s, 0, z))
}

/// Builds the full circuit state right before the ancilla is measured.
pub fn prepare_circuit(c: &[f64], m: &[f64]) -> Result<StateVector> {
    let (nc, nm) = norms(c, m)?;
    let padded = c.len().next_power_of_two();

    // [c/|c| ; m/|m|] / sqrt(2), each half zero-padded
    let mut psi = vec![Complex64::new(0.0, 0.0); 2 * padded];
    for (i, v) in c.iter().enumerate() {
        psi[i] = Complex64::new(v / nc, 0.0);
    }
    for (i, v) in m.iter().enumerate() {
        psi[padded + i] = Complex64::new(v / nm, 0.0);
    }
    let psi = StateVector::new(psi)?;

    let state = StateVector::zero(2).tensor(&psi);
    let theta = 2.0 * (nm / nc).atan();
    let state = state
        .apply_hadamard(0)?
        .apply_u(1, theta, PI, 0.0)?
        .apply_cswap(0, 1, 2)?
        .apply_hadamard(0)?;
    Ok(state)
}

/// Shot-sampled estimate following the compact swap-test circuit.
pub fn estimate_angle_sampled<R: Rng + ?Sized>(
    c: &[f64],
    m: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    let (nc, nm) = norms(c, m)?;
    let state = prepare_circuit(c, m)?;
    let tally = state.measure_qubit(0, shots, rng)?;
    let p0 = tally.p0();
    let z = nc * nc + nm * nm;
    Ok(finish(p0, overlap_from_p0(p0, nc, nm), shots, z))
}

/// Analytic when `shots == 0`, sampled otherwise.
pub fn estimate<R: Rng + ?Sized>(
    c: &[f64],
    m: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    if shots == 0 {
        overlap_analytic(c, m)
    } else {
        estimate_angle_sampled(c, m, shots, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn analytic_examples() {
        let e = overlap_analytic(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!((e.inner_product, e.angle, e.p0, e.shots), (1.0, 0.0, 0.5, 0));

        let e = overlap_analytic(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(e.inner_product, 0.0);
        assert!((e.angle - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(e.p0, 0.75);

        let e = overlap_analytic(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((e.inner_product - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((e.angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((e.z_norm - 3.0).abs() < 1e-15);
        assert!((e.p0 - 0.58333).abs() < 1e-5);
        assert!((e.inner_product - e.angle.cos()).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert_eq!(
            overlap_analytic(&[1.0], &[1.0, 2.0]),
            Err(SwapTestError::LengthMismatch(1, 2))
        );
        assert_eq!(
            overlap_analytic(&[0.0, 0.0], &[1.0, 2.0]),
            Err(SwapTestError::ZeroNormVector)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            estimate_angle_sampled(&[1.0, 2.0], &[1e-13, 0.0], 10, &mut rng),
            Err(SwapTestError::ZeroNormVector)
        );
    }

    #[test]
    fn circuit_probability_matches_closed_form() {
        let cases: [(&[f64], &[f64]); 4] = [
            (&[1.0, 1.0], &[1.0, 0.0]),
            (&[0.3, -2.0, 1.1], &[-0.7, 0.2, 0.9]),
            (&[2.0], &[-3.0]),
            (&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, -4.0, 3.0, 2.0, 1.0]),
        ];
        for (c, m) in cases {
            let want = overlap_analytic(c, m).unwrap().p0;
            let got = prepare_circuit(c, m).unwrap().prob_zero(0).unwrap();
            assert!((got - want).abs() < 1e-12, "{c:?} {m:?}: {got} vs {want}");
        }
    }

    #[test]
    fn sampled_identical_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = estimate_angle_sampled(&[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], 100_000, &mut rng)
            .unwrap();
        assert!(e.angle < 0.05, "{}", e.angle);
        let e = estimate_angle_sampled(&[1.0, 0.0], &[0.0, 1.0], 100_000, &mut rng).unwrap();
        assert!((e.angle - FRAC_PI_2).abs() < 0.05);
        assert_eq!(e.shots, 100_000);
    }

    #[test]
    fn sampled_mean_angle_over_seeds() {
        let mean = (0..20u64)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                estimate_angle_sampled(&[1.0, 1.0], &[1.0, 0.0], 1000, &mut rng)
                    .unwrap()
                    .angle
            })
            .sum::<f64>()
            / 20.0;
        assert!((mean - std::f64::consts::FRAC_PI_4).abs() < 0.1, "{mean}");
    }

    #[test]
    fn padding_is_neutral() {
        let c = [0.4, -1.3, 2.2];
        let m = [1.0, 0.5, -0.25];
        let a = overlap_analytic(&c, &m).unwrap();
        let b = overlap_analytic(&[0.4, -1.3, 2.2, 0.0], &[1.0, 0.5, -0.25, 0.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn p0_is_affine_decreasing_in_overlap() {
        let (nc, nm) = (1.3, 0.7);
        let ps: Vec<f64> = (-10..=10)
            .map(|k| p0_from_overlap(k as f64 / 10.0, nc, nm))
            .collect();
        let steps: Vec<f64> = ps.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|s| *s < 0.0));
        assert!(steps.iter().all(|s| (s - steps[0]).abs() < 1e-12));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sampled_output_always_clipped(
                c in prop::collection::vec(-3.0f64..3.0, 3),
                m in prop::collection::vec(-3.0f64..3.0, 3),
                shots in 1u64..50,
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                if let Ok(e) = estimate_angle_sampled(&c, &m, shots, &mut rng) {
                    prop_assert!((-1.0..=1.0).contains(&e.inner_product));
                    prop_assert!((0.0..=PI).contains(&e.angle));
                    prop_assert!((e.inner_product - e.angle.cos()).abs() < 1e-9);
                }
            }

            #[test]
            fn closure_of_p0_formulas(
                c in prop::collection::vec(-3.0f64..3.0, 4),
                m in prop::collection::vec(-3.0f64..3.0, 4),
            ) {
                if let Ok(e) = overlap_analytic(&c, &m) {
                    let nc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let nm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let back = overlap_from_p0(e.p0, nc, nm);
                    prop_assert!((back - e.inner_product).abs() < 1e-12);
                }
            }
        }
    }
}
