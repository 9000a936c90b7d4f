//! Single-qubit noise channels in Kraus form, and the feature-corruption
//! transform that pushes tabular data through them.

use crate::qsim::DensityMatrix;
use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("channel expects a single-qubit density matrix, got {0} qubits")]
    DimensionMismatch(usize),
    #[error("bounds cover {bounds} features but the matrix has {features}")]
    BoundsLengthMismatch { bounds: usize, features: usize },
    #[error("unknown channel name `{0}`")]
    UnknownChannel(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 6] = [
        ChannelKind::BitFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::BitPhaseFlip,
        ChannelKind::Depolarizing,
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
    ];

    /// Snake-case name used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::PhaseFlip => "phase_flip",
            ChannelKind::BitPhaseFlip => "bit_phase_flip",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::AmplitudeDamping => "amplitude_damping",
            ChannelKind::PhaseDamping => "phase_damping",
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "BF",
            ChannelKind::PhaseFlip => "PF",
            ChannelKind::BitPhaseFlip => "BPF",
            ChannelKind::Depolarizing => "DP",
            ChannelKind::AmplitudeDamping => "AD",
            ChannelKind::PhaseDamping => "PD",
        }
    }

    /// Channels that are a convex mixture of Pauli conjugations.
    pub fn is_pauli_mixture(self) -> bool {
        matches!(
            self,
            ChannelKind::BitFlip
                | ChannelKind::PhaseFlip
                | ChannelKind::BitPhaseFlip
                | ChannelKind::Depolarizing
        )
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.name() == key || k.abbreviation().eq_ignore_ascii_case(&key))
            .ok_or_else(|| ChannelError::UnknownChannel(s.to_string()))
    }
}

/// A channel kind with its strength `p` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    kind: ChannelKind,
    p: f64,
}

impl NoiseChannel {
    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::InvalidProbability(p));
        }
        Ok(Self { kind, p })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Op2(pub [[Complex64; 2]; 2]);

impl Op2 {
    fn real(a: f64, b: f64, c: f64, d: f64) -> Op2 {
        let r = |v| Complex64::new(v, 0.0);
        Op2([[r(a), r(b)], [r(c), r(d)]])
    }

    pub fn identity() -> Op2 {
        Op2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn pauli_x() -> Op2 {
        Op2::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn pauli_y() -> Op2 {
        let z = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        Op2([[z, -i], [i, z]])
    }

    pub fn pauli_z() -> Op2 {
        Op2::real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn scale(self, s: f64) -> Op2 {
        let m = self.0;
        Op2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn dagger(self) -> Op2 {
        let m = self.0;
        Op2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn matmul(self, rhs: Op2) -> Op2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Op2(out)
    }

    pub fn add(self, rhs: Op2) -> Op2 {
        let (a, b) = (self.0, rhs.0);
        Op2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    fn from_density(rho: &DensityMatrix) -> Op2 {
        Op2([[rho.get(0, 0), rho.get(0, 1)], [rho.get(1, 0), rho.get(1, 1)]])
    }

    fn into_density(self) -> DensityMatrix {
        let m = self.0;
        DensityMatrix::from_row_major(vec![m[0][0], m[0][1], m[1][0], m[1][1]])
            .expect("2x2 shape is always valid")
    }

    fn max_abs_diff(self, rhs: Op2) -> f64 {
        let (a, b) = (self.0, rhs.0);
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((a[r][c] - b[r][c]).norm());
            }
        }
        worst
    }
}

/// Kraus operators `{E_i}` of a single-qubit channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<Op2>,
}

impl KrausSet {
    /// Largest elementwise entry of `Σ E_i† E_i - I`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(Op2::real(0.0, 0.0, 0.0, 0.0), |acc, e| {
                acc.add(e.dagger().matmul(*e))
            });
        sum.max_abs_diff(Op2::identity())
    }

    /// `ζ = Σ E_i ρ E_i†` on a 2x2 matrix.
    pub fn apply(&self, rho: Op2) -> Op2 {
        self.operators
            .iter()
            .fold(Op2::real(0.0, 0.0, 0.0, 0.0), |acc, e| {
                acc.add(e.matmul(rho).matmul(e.dagger()))
            })
    }
}

pub fn kraus_operators(channel: &NoiseChannel) -> KrausSet {
    let p = channel.p;
    let keep = (1.0 - p).sqrt();
    let operators = match channel.kind {
        ChannelKind::BitFlip => vec![Op2::identity().scale(keep), Op2::pauli_x().scale(p.sqrt())],
        ChannelKind::PhaseFlip => vec![Op2::identity().scale(keep), Op2::pauli_z().scale(p.sqrt())],
        ChannelKind::BitPhaseFlip => {
            vec![Op2::identity().scale(keep), Op2::pauli_y().scale(p.sqrt())]
        }
        ChannelKind::Depolarizing => {
            let w = (p / 3.0).sqrt();
            vec![
                Op2::identity().scale(keep),
                Op2::pauli_x().scale(w),
                Op2::pauli_y().scale(w),
                Op2::pauli_z().scale(w),
            ]
        }
        ChannelKind::AmplitudeDamping => vec![
            Op2::real(1.0, 0.0, 0.0, keep),
            Op2::real(0.0, p.sqrt(), 0.0, 0.0),
        ],
        ChannelKind::PhaseDamping => vec![
            Op2::real(1.0, 0.0, 0.0, keep),
            Op2::real(0.0, 0.0, 0.0, p.sqrt()),
        ],
    };
    KrausSet { operators }
}

pub fn apply_channel(rho: &DensityMatrix, channel: &NoiseChannel) -> Result<DensityMatrix> {
    if rho.n_qubits() != 1 {
        return Err(ChannelError::DimensionMismatch(rho.n_qubits()));
    }
    let out = kraus_operators(channel).apply(Op2::from_density(rho));
    Ok(out.into_density())
}

/// The mixture form `(1-p)ρ + p PρP` (or its three-Pauli analogue).
/// Returns `None` for the damping channels, which have no such form.
pub fn pauli_mixture(rho: &DensityMatrix, channel: &NoiseChannel) -> Option<DensityMatrix> {
    let r = Op2::from_density(rho);
    let p = channel.p;
    let conj = |pauli: Op2| pauli.matmul(r).matmul(pauli);
    let mixed = match channel.kind {
        ChannelKind::BitFlip => r.scale(1.0 - p).add(conj(Op2::pauli_x()).scale(p)),
        ChannelKind::PhaseFlip => r.scale(1.0 - p).add(conj(Op2::pauli_z()).scale(p)),
        ChannelKind::BitPhaseFlip => r.scale(1.0 - p).add(conj(Op2::pauli_y()).scale(p)),
        ChannelKind::Depolarizing => r.scale(1.0 - p).add(
            conj(Op2::pauli_x())
                .add(conj(Op2::pauli_y()))
                .add(conj(Op2::pauli_z()))
                .scale(p / 3.0),
        ),
        ChannelKind::AmplitudeDamping | ChannelKind::PhaseDamping => return None,
    };
    Some(mixed.into_density())
}

/// Per-feature `[min, max]` taken from training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureBounds {
    pub fn from_rows(x: ArrayView2<'_, f64>) -> FeatureBounds {
        let (min, max) = x
            .axis_iter(Axis(1))
            .map(|col| {
                col.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .unzip();
        FeatureBounds { min, max }
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    /// Arithmetic midpoint of feature `j`, computed the same way corruption decodes `x_s = 0.5`.
    pub fn midpoint(&self, j: usize) -> f64 {
        self.min[j] + 0.5 * (self.max[j] - self.min[j])
    }
}

/// Bloch-plane angle at or below which a decoded vector counts as fully mixed.
const MIXED_RADIUS: f64 = 1e-12;

/// Corrupts one scaled value `x_s ∈ [0, 1]`.
///
/// The value is encoded as the pure state with Bloch vector
/// `(sin θ, 0, cos θ)`, `θ = x_s π`, sent through the channel, and decoded
/// from `θ' = atan2(|<X>|, <Z>)`. A fully mixed output decodes to `θ' = π/2`.
pub fn corrupt_scaled(x_scaled: f64, channel: &NoiseChannel) -> f64 {
    let theta = x_scaled.clamp(0.0, 1.0) * PI;
    let rho = DensityMatrix::from_bloch(theta.sin(), 0.0, theta.cos());
    let out = apply_channel(&rho, channel).expect("single-qubit input");
    let [bx, _, bz] = out.bloch_vector().expect("single-qubit output");
    let theta_out = if bx.hypot(bz) <= MIXED_RADIUS {
        PI / 2.0
    } else {
        bx.abs().atan2(bz)
    };
    (theta_out / PI).clamp(0.0, 1.0)
}

/// Corrupts every cell of `x` through `channel`, scaling by `bounds`.
///
/// At `p = 0` the input is returned unchanged. Constant features
/// (`min >= max`) are never touched.
pub fn corrupt_features(
    x: ArrayView2<'_, f64>,
    channel: &NoiseChannel,
    bounds: &FeatureBounds,
) -> Result<Array2<f64>> {
    if bounds.len() != x.ncols() {
        return Err(ChannelError::BoundsLengthMismatch {
            bounds: bounds.len(),
            features: x.ncols(),
        });
    }
    let mut out = x.to_owned();
    if channel.p == 0.0 {
        return Ok(out);
    }
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let (lo, hi) = (bounds.min[j], bounds.max[j]);
        if !(lo < hi) {
            continue;
        }
        let span = hi - lo;
        for v in col.iter_mut() {
            let xs = ((*v - lo) / span).clamp(0.0, 1.0);
            let ys = corrupt_scaled(xs, channel);
            *v = (lo + ys * span).clamp(lo, hi);
        }
    }
    Ok(out)
}

/// Outcome of a CPTP sweep over one Kraus family.
#[derive(Debug, Clone, PartialEq)]
pub struct CptpReport {
    pub name: String,
    pub max_completeness_residual: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// `None` when the family has no Pauli-mixture form.
    pub max_mixture_residual: Option<f64>,
    pub passed: bool,
}

pub const COMPLETENESS_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Probe states used by the CPTP sweep: the six cardinal states plus a
/// few mixed and off-axis ones.
pub fn probe_states() -> Vec<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut probes: Vec<DensityMatrix> = [
        (0.0, 0.0, 1.0),
        (0.0, 0.0, -1.0),
        (1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0),
        (s, 0.0, s),
        (0.3, -0.4, 0.5),
        (0.0, 0.0, 0.0),
    ]
    .iter()
    .map(|&(x, y, z)| DensityMatrix::from_bloch(x, y, z))
    .collect();
    // a generic pure state with complex amplitudes
    let psi = crate::qsim::StateVector::new(vec![
        Complex64::new(0.6, 0.1),
        Complex64::new(-0.2, 0.77),
    ])
    .expect("nonzero");
    probes.push(psi.to_density());
    probes
}

/// Probability grid `{0, 1/(n-1), ..., 1}`.
pub fn probability_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

/// Checks one Kraus family, supplied as a function of `p`, over `grid`.
pub fn check_cptp<F>(name: &str, grid: &[f64], mut family: F, mixture: Option<ChannelKind>) -> CptpReport
where
    F: FnMut(f64) -> KrausSet,
{
    let probes = probe_states();
    let mut report = CptpReport {
        name: name.to_string(),
        max_completeness_residual: 0.0,
        max_trace_error: 0.0,
        max_hermiticity_residual: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_mixture_residual: mixture.map(|_| 0.0),
        passed: true,
    };
    for &p in grid {
        let set = family(p);
        report.max_completeness_residual = report
            .max_completeness_residual
            .max(set.completeness_residual());
        for rho in &probes {
            let out = set.apply(Op2::from_density(rho)).into_density();
            let tr = out.trace();
            report.max_trace_error = report
                .max_trace_error
                .max((tr - Complex64::new(1.0, 0.0)).norm());
            report.max_hermiticity_residual = report
                .max_hermiticity_residual
                .max(out.hermiticity_residual());
            report.min_eigenvalue = report.min_eigenvalue.min(out.eigenvalues()[0]);
            if let (Some(kind), Some(worst)) = (mixture, report.max_mixture_residual.as_mut()) {
                let ch = NoiseChannel { kind, p };
                if let Some(mix) = pauli_mixture(rho, &ch) {
                    *worst = worst.max(Op2::from_density(&mix).max_abs_diff(Op2::from_density(&out)));
                }
            }
        }
    }
    report.passed = report.max_completeness_residual < COMPLETENESS_TOL
        && report.max_trace_error < TRACE_TOL
        && report.max_hermiticity_residual < HERMITICITY_TOL
        && report.min_eigenvalue >= EIGENVALUE_FLOOR
        && report.max_mixture_residual.is_none_or(|r| r < COMPLETENESS_TOL);
    report
}

/// CPTP sweep over all six channels on a `points`-value grid.
pub fn validate_all(points: usize) -> Vec<CptpReport> {
    let grid = probability_grid(points);
    ChannelKind::ALL
        .iter()
        .map(|&kind| {
            check_cptp(
                kind.name(),
                &grid,
                |p| kraus_operators(&NoiseChannel { kind, p }),
                kind.is_pauli_mixture().then_some(kind),
            )
        })
        .collect()
}
