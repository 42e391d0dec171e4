//! Circuit ensembles and sampled realizations.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::haar::{haar_u4, haar_unitary};
use super::state::{Statevector, MAX_QUBITS};
use crate::chain::process::random_pair;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnsembleKind {
    /// `s` gates, each on a uniformly random pair.
    CompleteGraph { s: usize },
    /// `s` rounds of an even-pair layer followed by an odd-pair layer.
    Lattice1D { s: usize },
    /// `c` repetitions of row circuits then column circuits, then rows once
    /// more; every line circuit is a 1D lattice circuit of `s` rounds.
    Lattice2D { c: usize, s: usize },
    /// A single Haar unitary on the whole register.
    HaarFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(LabError::arg(format!("n must lie in 1..={MAX_QUBITS}, got {n}")));
        }
        match kind {
            EnsembleKind::CompleteGraph { .. } | EnsembleKind::Lattice1D { .. } if n < 2 => {
                Err(LabError::arg(format!("{} needs n >= 2", kind.name())))
            }
            EnsembleKind::Lattice2D { .. } if side(n).is_none() || n < 4 => {
                Err(LabError::arg(format!("lattice_2d needs a square n >= 4, got {n}")))
            }
            _ => Ok(EnsembleSpec { kind, n }),
        }
    }

    pub fn complete_graph(n: usize, s: usize) -> Result<Self> {
        Self::new(EnsembleKind::CompleteGraph { s }, n)
    }

    pub fn lattice_1d(n: usize, s: usize) -> Result<Self> {
        Self::new(EnsembleKind::Lattice1D { s }, n)
    }

    pub fn lattice_2d(n: usize, c: usize, s: usize) -> Result<Self> {
        Self::new(EnsembleKind::Lattice2D { c, s }, n)
    }

    pub fn haar_full(n: usize) -> Result<Self> {
        Self::new(EnsembleKind::HaarFull, n)
    }
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::CompleteGraph { .. } => "complete_graph",
            EnsembleKind::Lattice1D { .. } => "lattice_1d",
            EnsembleKind::Lattice2D { .. } => "lattice_2d",
            EnsembleKind::HaarFull => "haar_full",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ensemble names as accepted in configs; depth parameters are filled in
/// separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleName {
    CompleteGraph,
    Lattice1D,
    Lattice2D,
    HaarFull,
}

impl FromStr for EnsembleName {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cg" | "complete_graph" | "complete-graph" => Ok(EnsembleName::CompleteGraph),
            "1d" | "lattice_1d" | "lattice-1d" => Ok(EnsembleName::Lattice1D),
            "2d" | "lattice_2d" | "lattice-2d" => Ok(EnsembleName::Lattice2D),
            "haar" | "haar_full" | "haar-full" => Ok(EnsembleName::HaarFull),
            other => Err(LabError::arg(format!("unknown ensemble {other:?}"))),
        }
    }
}

impl EnsembleName {
    pub fn with_depth(self, s: usize, c: usize) -> EnsembleKind {
        match self {
            EnsembleName::CompleteGraph => EnsembleKind::CompleteGraph { s },
            EnsembleName::Lattice1D => EnsembleKind::Lattice1D { s },
            EnsembleName::Lattice2D => EnsembleKind::Lattice2D { c, s },
            EnsembleName::HaarFull => EnsembleKind::HaarFull,
        }
    }
}

fn side(n: usize) -> Option<usize> {
    let m = (n as f64).sqrt().round() as usize;
    (m * m == n).then_some(m)
}

// Pair gates dominate every circuit; keep them inline.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum GateEvent {
    Pair { i: usize, j: usize, u: Matrix4<Complex64> },
    Global { u: DMatrix<Complex64> },
}

impl GateEvent {
    pub fn qubits(&self) -> Option<(usize, usize)> {
        match self {
            GateEvent::Pair { i, j, .. } => Some((*i, *j)),
            GateEvent::Global { .. } => None,
        }
    }
}

/// Gates grouped in layers, applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitRealization {
    pub n: usize,
    pub layers: Vec<Vec<GateEvent>>,
}

impl CircuitRealization {
    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn layer_pairs(&self) -> Vec<Vec<(usize, usize)>> {
        self.layers.iter().map(|l| l.iter().filter_map(GateEvent::qubits).collect()).collect()
    }

    pub fn apply(&self, state: &mut Statevector) {
        for layer in &self.layers {
            for g in layer {
                match g {
                    GateEvent::Pair { i, j, u } => state.apply_two(*i, *j, u),
                    GateEvent::Global { u } => state.apply_full(u),
                }
            }
        }
    }

    /// `C |0^n>`.
    pub fn output_state(&self) -> Result<Statevector> {
        let mut s = Statevector::zero(self.n)?;
        self.apply(&mut s);
        Ok(s)
    }
}

/// Brickwork on the listed qubits: one round is the layer on positions
/// `(0,1),(2,3),..` followed by the layer `(1,2),(3,4),..`. With an odd
/// count the last qubit idles in the first layer.
fn line_layers(line: &[usize], rounds: usize) -> Vec<Vec<(usize, usize)>> {
    let mut layers = Vec::with_capacity(2 * rounds);
    for _ in 0..rounds {
        for offset in [0, 1] {
            layers.push((offset..line.len().saturating_sub(1)).step_by(2).map(|a| (line[a], line[a + 1])).collect());
        }
    }
    layers
}

/// Fixed pair layout of a lattice ensemble.
fn layout(spec: &EnsembleSpec) -> Option<Vec<Vec<(usize, usize)>>> {
    let n = spec.n;
    match spec.kind {
        EnsembleKind::Lattice1D { s } => Some(line_layers(&(0..n).collect::<Vec<_>>(), s)),
        EnsembleKind::Lattice2D { c, s } => {
            let m = side(n).expect("validated square");
            let rows: Vec<Vec<usize>> = (0..m).map(|x| (0..m).map(|y| x * m + y).collect()).collect();
            let cols: Vec<Vec<usize>> = (0..m).map(|y| (0..m).map(|x| x * m + y).collect()).collect();
            let sample_all = |lines: &[Vec<usize>]| -> Vec<Vec<(usize, usize)>> {
                let per_line: Vec<_> = lines.iter().map(|l| line_layers(l, s)).collect();
                (0..2 * s).map(|k| per_line.iter().flat_map(|ls| ls[k].iter().copied()).collect()).collect()
            };
            let mut layers = Vec::new();
            for _ in 0..c {
                layers.extend(sample_all(&rows));
                layers.extend(sample_all(&cols));
            }
            layers.extend(sample_all(&rows));
            Some(layers)
        }
        EnsembleKind::CompleteGraph { .. } | EnsembleKind::HaarFull => None,
    }
}

pub fn sample_circuit<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<CircuitRealization> {
    let spec = EnsembleSpec::new(spec.kind, spec.n)?;
    let layers = match (spec.kind, layout(&spec)) {
        // pair then gate, step by step, so a depth-s circuit is a prefix of
        // a deeper one drawn from the same stream
        (EnsembleKind::CompleteGraph { s }, _) => (0..s)
            .map(|_| {
                let (i, j) = random_pair(spec.n, rng);
                vec![GateEvent::Pair { i, j, u: haar_u4(rng) }]
            })
            .collect(),
        (_, Some(pairs)) => pairs
            .into_iter()
            .map(|layer| layer.into_iter().map(|(i, j)| GateEvent::Pair { i, j, u: haar_u4(rng) }).collect())
            .collect(),
        (_, None) => vec![vec![GateEvent::Global { u: haar_unitary(1 << spec.n, rng)? }]],
    };
    Ok(CircuitRealization { n: spec.n, layers })
}
