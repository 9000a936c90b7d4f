//! Dense statevector and density-matrix simulation.
//!
//! Bit convention: qubit 0 is the most significant bit of a basis-state
//! index. For an `n`-qubit register, qubit `q` of basis index `i` is
//! `(i >> (n - 1 - q)) & 1`, so `|q0 q1 ... q(n-1)>` reads left to right.
//!
//! Gates are applied by contracting the 2x2 (or 3-qubit permutation)
//! action over the target wires of a copied amplitude buffer. No
//! `2^n x 2^n` operator is ever materialized.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

const NORM_EPS: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("amplitude vector length {0} is not a positive power of two")]
    NonPowerOfTwoLength(usize),
    #[error("amplitude vector has zero norm")]
    ZeroNorm,
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {0} used more than once in a multi-qubit gate")]
    DuplicateQubit(usize),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("matrix of dimension {rows}x{cols} is not a valid density operator shape")]
    BadShape { rows: usize, cols: usize },
}

pub type Result<T> = std::result::Result<T, QsimError>;

fn log2_exact(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(QsimError::NonPowerOfTwoLength(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, rescaling to exactly unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = log2_exact(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > NORM_EPS) {
            return Err(QsimError::ZeroNorm);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Convenience constructor for real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// `|0...0>` on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `self ⊗ other`; `self` occupies the leading (more significant) wires.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(QsimError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    /// Applies a single-qubit gate `[[m00, m01], [m10, m11]]` on wire `q`.
    pub fn apply_single(&self, q: usize, gate: [[Complex64; 2]; 2]) -> Result<StateVector> {
        self.check_qubit(q)?;
        let mask = self.mask(q);
        let mut out = self.amplitudes.clone();
        for i in 0..out.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[j];
            out[i] = gate[0][0] * a0 + gate[0][1] * a1;
            out[j] = gate[1][0] * a0 + gate[1][1] * a1;
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    pub fn apply_hadamard(&self, q: usize) -> Result<StateVector> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, [[h, h], [h, -h]])
    }

    /// Applies `u(theta, phi, lam)`:
    /// `[[cos(θ/2), -e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]`.
    pub fn apply_u(&self, q: usize, theta: f64, phi: f64, lam: f64) -> Result<StateVector> {
        self.apply_single(q, u_matrix(theta, phi, lam))
    }

    /// Controlled-SWAP: exchanges wires `t1` and `t2` on the `control = 1` branch.
    pub fn apply_cswap(&self, control: usize, t1: usize, t2: usize) -> Result<StateVector> {
        self.check_qubit(control)?;
        self.check_qubit(t1)?;
        self.check_qubit(t2)?;
        if control == t1 || control == t2 {
            return Err(QsimError::DuplicateQubit(control));
        }
        if t1 == t2 {
            return Err(QsimError::DuplicateQubit(t1));
        }
        let (cm, m1, m2) = (self.mask(control), self.mask(t1), self.mask(t2));
        let mut out = self.amplitudes.clone();
        for i in 0..out.len() {
            // visit each swapped pair once, from the side with t1 = 1, t2 = 0
            if i & cm != 0 && i & m1 != 0 && i & m2 == 0 {
                let j = (i & !m1) | m2;
                out.swap(i, j);
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// Probability of reading `0` on wire `q`.
    pub fn prob_zero(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let mask = self.mask(q);
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Non-destructive shot tally on wire `q`; the state is left untouched.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &self,
        q: usize,
        shots: u64,
        rng: &mut R,
    ) -> Result<MeasurementTally> {
        let p0 = self.prob_zero(q)?;
        if shots == 0 {
            return Err(QsimError::ZeroShots);
        }
        let count0 = Binomial::new(shots, p0)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        Ok(MeasurementTally {
            shots,
            count0,
            count1: shots - count0,
        })
    }

    /// Outer product `|s><s|`.
    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.amplitudes.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(self.amplitudes[r] * self.amplitudes[c].conj());
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            data,
        }
    }
}

pub fn u_matrix(theta: f64, phi: f64, lam: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [
            Complex64::new(c, 0.0),
            -Complex64::from_polar(1.0, lam) * s,
        ],
        [
            Complex64::from_polar(1.0, phi) * s,
            Complex64::from_polar(1.0, phi + lam) * c,
        ],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementTally {
    pub shots: u64,
    pub count0: u64,
    pub count1: u64,
}

impl MeasurementTally {
    pub fn p0(&self) -> f64 {
        self.count0 as f64 / self.shots as f64
    }
}

/// Mixed state stored as a dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Wraps a row-major square matrix. Shape is checked; physical
    /// validity is not (see [`DensityMatrix::validate`]).
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(QsimError::BadShape {
                rows: data.len(),
                cols: 1,
            });
        }
        let n_qubits = log2_exact(dim).map_err(|_| QsimError::BadShape {
            rows: dim,
            cols: dim,
        })?;
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest elementwise deviation `|ρ_ij - conj(ρ_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    ///
    /// Uses the real embedding `[[A, -B], [B, A]]` of `A + iB`, whose
    /// spectrum is that of the Hermitian matrix with every value doubled.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let dim = self.dim();
        let big = DMatrix::from_fn(2 * dim, 2 * dim, |r, c| {
            let (rr, cc) = (r % dim, c % dim);
            let z = (self.get(rr, cc) + self.get(cc, rr).conj()) * 0.5;
            match (r < dim, c < dim) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut vals: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals.into_iter().step_by(2).collect()
    }

    /// Checks trace, Hermiticity and positivity at tolerance `tol`.
    pub fn validate(&self, tol: f64) -> std::result::Result<(), String> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(format!("trace {tr} differs from 1"));
        }
        let herm = self.hermiticity_residual();
        if herm > tol {
            return Err(format!("hermiticity residual {herm:e}"));
        }
        let min_eig = self.eigenvalues()[0];
        if min_eig < -tol {
            return Err(format!("negative eigenvalue {min_eig:e}"));
        }
        Ok(())
    }

    /// Bloch vector `(<X>, <Y>, <Z>)` of a single-qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.n_qubits != 1 {
            return None;
        }
        let r01 = self.get(0, 1);
        let r10 = self.get(1, 0);
        Some([
            (r01 + r10).re,
            (Complex64::i() * (r01 - r10)).re,
            (self.get(0, 0) - self.get(1, 1)).re,
        ])
    }

    /// Single-qubit state with the given Bloch vector: `(I + xX + yY + zZ) / 2`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
        let half = 0.5;
        DensityMatrix {
            n_qubits: 1,
            data: vec![
                Complex64::new(half * (1.0 + z), 0.0),
                Complex64::new(half * x, -half * y),
                Complex64::new(half * x, half * y),
                Complex64::new(half * (1.0 - z), 0.0),
            ],
        }
    }
}
