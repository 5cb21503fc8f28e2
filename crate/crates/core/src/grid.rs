//! Grid parameters, decentral control gains and the ten-node test scenarios.
//!
//! All quantities use per-unit conventions: inertia in s, damping and control
//! gains dimensionless, power and coupling in s⁻². Node indices are 0-based in
//! code and files; human-readable messages report them 1-based.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::Fnv64;

/// Per-node control gain is `CONTROL_GAIN_FACTOR * kappa_c * damping`.
pub const CONTROL_GAIN_FACTOR: f64 = 10.0;

/// Tolerance on the net injected power of a balanced grid.
pub const POWER_BALANCE_TOL: f64 = 1e-12;

/// Relative tolerance under which per-node damping ratios count as uniform.
pub const UNIFORM_RATIO_TOL: f64 = 1e-9;

/// Inertias of the ten-node test grid.
pub const TEST_INERTIA: [f64; 10] = [1.1, 1.7, 7.0, 8.7, 3.2, 9.8, 0.7, 5.8, 0.2, 0.9];

/// Set-point powers: nodes 1–5 consume, nodes 6–10 generate.
pub const TEST_POWER: [f64; 10] = [-1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0];

/// Damping realization of the heterogeneous scenario (Σκ/ΣM = 0.1 s⁻¹).
pub const HETEROGENEOUS_DAMPING: [f64; 10] =
    [0.306, 0.494, 0.158, 0.188, 0.573, 0.089, 0.592, 0.849, 0.425, 0.236];

/// Line coupling on every edge of the test grid.
pub const TEST_COUPLING: f64 = 4.0;

/// Damping-to-inertia ratio of the homogeneous scenarios.
pub const TEST_GAMMA: f64 = 0.1;

/// Default ten-node topology: a ring plus the chords (1,6) and (3,8), 0-based.
pub const TEST_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 0),
    (0, 5),
    (2, 7),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(alloc::string::String),
    #[error("control parameter must be non-negative, got {0}")]
    NegativeGain(OrderedF64),
    #[error("scenario `custom` has no built-in grid; supply one")]
    NoBuiltinGrid,
    #[error("edge ({0}, {1}) references a node outside 1..={2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("expected {expected} values for `{field}`, got {got}")]
    Length {
        field: &'static str,
        expected: usize,
        got: usize,
    },
}

/// f64 wrapper so error enums can derive `Eq`.
#[derive(Debug, Clone, Copy)]
pub struct OrderedF64(pub f64);

impl PartialEq for OrderedF64 {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for OrderedF64 {}

impl fmt::Display for OrderedF64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A broken [`GridSpec`] invariant. Node numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("field `{field}` has {got} entries, expected {expected}")]
    Length {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite parameter in `{field}` at node {node}")]
    NonFinite { field: &'static str, node: usize },
    #[error("asymmetric coupling: K[{i},{j}] = {kij} but K[{j},{i}] = {kji}")]
    AsymmetricCoupling { i: usize, j: usize, kij: f64, kji: f64 },
    #[error("nonzero self-coupling at node {node}")]
    SelfCoupling { node: usize },
    #[error("unbalanced power: sum of set-points is {sum}")]
    UnbalancedPower { sum: f64 },
    #[error("inertia at node {node} must be positive, got {value}")]
    NonPositiveInertia { node: usize, value: f64 },
    #[error("damping at node {node} must be non-negative, got {value}")]
    NegativeDamping { node: usize, value: f64 },
    #[error("control gain at node {node} must be non-negative, got {value}")]
    NegativeControlGain { node: usize, value: f64 },
    #[error("coupling graph is disconnected: node {node} unreachable from node 1")]
    Disconnected { node: usize },
}

/// Which nodes receive decentral control when a sweep value is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ControlRule {
    AllNodes,
    /// Only nodes with positive set-point power.
    GeneratorsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ScenarioId {
    /// κ_i^D = 0.1·M_i, control at every node.
    Homogeneous,
    /// Fixed heterogeneous damping vector with the same bulk ratio 0.1 s⁻¹.
    HeterogeneousDamping,
    /// Identical machines (M = 1, κ^D = 0.1), control on generators only.
    GeneratorOnly,
    /// User-supplied grid; control applied at all nodes.
    Custom,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] = [
        ScenarioId::Homogeneous,
        ScenarioId::HeterogeneousDamping,
        ScenarioId::GeneratorOnly,
        ScenarioId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Homogeneous => "homogeneous",
            ScenarioId::HeterogeneousDamping => "heterogeneous-damping",
            ScenarioId::GeneratorOnly => "generator-only",
            ScenarioId::Custom => "custom",
        }
    }

    pub fn control_rule(self) -> ControlRule {
        match self {
            ScenarioId::GeneratorOnly => ControlRule::GeneratorsOnly,
            _ => ControlRule::AllNodes,
        }
    }

    /// The uncontrolled grid of a built-in scenario.
    pub fn base_grid(self) -> Result<GridSpec, GridError> {
        let n = TEST_INERTIA.len();
        let (inertia, damping): (Vec<f64>, Vec<f64>) = match self {
            ScenarioId::Homogeneous => (
                TEST_INERTIA.to_vec(),
                TEST_INERTIA.iter().map(|m| TEST_GAMMA * m).collect(),
            ),
            ScenarioId::HeterogeneousDamping => {
                (TEST_INERTIA.to_vec(), HETEROGENEOUS_DAMPING.to_vec())
            }
            ScenarioId::GeneratorOnly => (vec![1.0; n], vec![TEST_GAMMA; n]),
            ScenarioId::Custom => return Err(GridError::NoBuiltinGrid),
        };
        let edges: Vec<(usize, usize, f64)> = TEST_EDGES
            .iter()
            .map(|&(i, j)| (i, j, TEST_COUPLING))
            .collect();
        GridSpec::from_edges(inertia, damping, vec![0.0; n], TEST_POWER.to_vec(), &edges)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| GridError::UnknownScenario(s.into()))
    }
}

/// Static grid parameters. `coupling` is a dense row-major `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
    pub control_gain: Vec<f64>,
    pub power: Vec<f64>,
    pub coupling: Vec<f64>,
}

/// Per-node and bulk damping-to-inertia ratios including control.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGamma {
    pub per_node: Vec<f64>,
    pub bulk: f64,
    pub uniform: bool,
}

impl GridSpec {
    /// Builds a grid from a symmetric edge list `(i, j, K_ij)` with 0-based indices.
    pub fn from_edges(
        inertia: Vec<f64>,
        damping: Vec<f64>,
        control_gain: Vec<f64>,
        power: Vec<f64>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, GridError> {
        let n = inertia.len();
        for (field, v) in [
            ("damping", &damping),
            ("control_gain", &control_gain),
            ("power", &power),
        ] {
            if v.len() != n {
                return Err(GridError::Length {
                    field,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let mut coupling = vec![0.0; n * n];
        for &(i, j, k) in edges {
            if i >= n || j >= n {
                return Err(GridError::EdgeOutOfRange(i + 1, j + 1, n));
            }
            coupling[i * n + j] = k;
            coupling[j * n + i] = k;
        }
        Ok(Self {
            n,
            inertia,
            damping,
            control_gain,
            power,
            coupling,
        })
    }

    #[inline]
    pub fn k(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n + j]
    }

    /// Upper-triangle edges `(i, j, K_ij)` with `i < j` and nonzero coupling.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let k = self.k(i, j);
                if k != 0.0 {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    pub fn total_inertia(&self) -> f64 {
        self.inertia.iter().sum()
    }

    /// Damping plus control gain per node.
    pub fn total_damping(&self) -> impl Iterator<Item = f64> + '_ {
        self.damping
            .iter()
            .zip(&self.control_gain)
            .map(|(d, c)| d + c)
    }

    /// Returns a copy with control gains `10·kappa_c·κ_i^D` on the nodes selected by `rule`.
    pub fn with_control(&self, kappa_c: f64, rule: ControlRule) -> Result<Self, GridError> {
        if !(kappa_c >= 0.0) {
            return Err(GridError::NegativeGain(OrderedF64(kappa_c)));
        }
        let mut out = self.clone();
        for i in 0..self.n {
            let controlled = match rule {
                ControlRule::AllNodes => true,
                ControlRule::GeneratorsOnly => self.power[i] > 0.0,
            };
            out.control_gain[i] = if controlled {
                CONTROL_GAIN_FACTOR * kappa_c * self.damping[i]
            } else {
                0.0
            };
        }
        Ok(out)
    }

    /// Every violated invariant; empty iff the grid is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.n;
        let mut out = Vec::new();
        let lengths = [
            ("inertia", self.inertia.len(), n),
            ("damping", self.damping.len(), n),
            ("control_gain", self.control_gain.len(), n),
            ("power", self.power.len(), n),
            ("coupling", self.coupling.len(), n * n),
        ];
        for (field, got, expected) in lengths {
            if got != expected {
                out.push(Violation::Length {
                    field,
                    expected,
                    got,
                });
            }
        }
        if !out.is_empty() {
            return out;
        }

        for (field, v) in [
            ("inertia", &self.inertia),
            ("damping", &self.damping),
            ("control_gain", &self.control_gain),
            ("power", &self.power),
        ] {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                out.push(Violation::NonFinite { field, node: i + 1 });
            }
        }
        if let Some(idx) = self.coupling.iter().position(|x| !x.is_finite()) {
            out.push(Violation::NonFinite {
                field: "coupling",
                node: idx / n + 1,
            });
        }

        for i in 0..n {
            if self.k(i, i) != 0.0 {
                out.push(Violation::SelfCoupling { node: i + 1 });
            }
            for j in (i + 1)..n {
                let (kij, kji) = (self.k(i, j), self.k(j, i));
                if kij != kji {
                    out.push(Violation::AsymmetricCoupling {
                        i: i + 1,
                        j: j + 1,
                        kij,
                        kji,
                    });
                }
            }
        }

        let sum: f64 = self.power.iter().sum();
        if sum.abs() > POWER_BALANCE_TOL {
            out.push(Violation::UnbalancedPower { sum });
        }

        for i in 0..n {
            if !(self.inertia[i] > 0.0) {
                out.push(Violation::NonPositiveInertia {
                    node: i + 1,
                    value: self.inertia[i],
                });
            }
            if self.damping[i] < 0.0 {
                out.push(Violation::NegativeDamping {
                    node: i + 1,
                    value: self.damping[i],
                });
            }
            if self.control_gain[i] < 0.0 {
                out.push(Violation::NegativeControlGain {
                    node: i + 1,
                    value: self.control_gain[i],
                });
            }
        }

        if let Some(node) = self.first_unreachable() {
            out.push(Violation::Disconnected { node: node + 1 });
        }
        out
    }

    fn first_unreachable(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..self.n {
                if !seen[j] && (self.k(i, j) != 0.0 || self.k(j, i) != 0.0) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn effective_gamma(&self) -> EffectiveGamma {
        let per_node: Vec<f64> = self
            .total_damping()
            .zip(&self.inertia)
            .map(|(d, m)| d / m)
            .collect();
        let bulk = self.total_damping().sum::<f64>() / self.total_inertia();
        let reference = per_node.first().copied().unwrap_or(0.0);
        let uniform = per_node
            .iter()
            .all(|r| (r - reference).abs() <= UNIFORM_RATIO_TOL * reference.abs());
        EffectiveGamma {
            per_node,
            bulk,
            uniform,
        }
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write_u64(self.n as u64);
        h.write_f64s(&self.inertia);
        h.write_f64s(&self.damping);
        h.write_f64s(&self.control_gain);
        h.write_f64s(&self.power);
        h.write_f64s(&self.coupling);
        h.finish()
    }
}

/// The ten-node test grid of `scenario` with sweep parameter `kappa_c`.
pub fn build_test_grid(scenario: ScenarioId, kappa_c: f64) -> Result<GridSpec, GridError> {
    if !(kappa_c >= 0.0) {
        return Err(GridError::NegativeGain(OrderedF64(kappa_c)));
    }
    scenario
        .base_grid()?
        .with_control(kappa_c, scenario.control_rule())
}
