//! Route chains and the three routing-strategy samplers.
//!
//! A route is a chain of `N` hops of fixed length `a`. The random strategy
//! (RRS) draws every hop direction uniformly; the directed strategy (DRS)
//! biases each hop toward the previous direction with a stiffness set by the
//! persistence radius; the optimal strategy (ORS) walks straight at the
//! destination. Samplers are pure functions of an explicit RNG stream.

mod kernel;
mod sampler;

pub use sampler::{
    ors_path, sample_drs_path, sample_ensemble, sample_ensemble_with_paths, sample_rrs_path,
    tangent_autocorrelation,
};

use thiserror::Error;

/// Relative tolerance for the fixed-step invariant |hop| = a.
pub const FIXED_STEP_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PathModelError {
    #[error("n_hops must be at least 1")]
    ZeroHops,
    #[error("step length must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("persistence radius must be nonnegative and finite, got {0}")]
    NegativePersistence(f64),
    #[error("source and destination coincide")]
    CoincidentEndpoints,
    #[error("hop {index} has length {found:e}, expected {expected:e}")]
    BrokenFixedStep {
        index: usize,
        found: f64,
        expected: f64,
    },
}

/// Spatial dimension of the deployment region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }
}

/// Routing strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Random routing: uniform next-hop direction.
    Rrs,
    /// Directed routing: stiffness-biased next-hop direction.
    Drs,
    /// Optimal routing: straight line to the destination.
    Ors,
}

/// Parameters identifying a routing-strategy ensemble.
///
/// The persistence radius is the arc-length scale over which a directed route
/// keeps its direction; it is meaningful for [`StrategyKind::Drs`] only and a
/// value of zero makes the directed strategy statistically identical to the
/// random one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    pub kind: StrategyKind,
    pub dimension: Dim,
    pub step_length: f64,
    pub persistence_radius: f64,
}

impl StrategyParams {
    pub fn new(kind: StrategyKind, dimension: Dim, step_length: f64) -> Self {
        Self {
            kind,
            dimension,
            step_length,
            persistence_radius: 0.0,
        }
    }

    pub fn with_persistence(mut self, xi: f64) -> Self {
        self.persistence_radius = xi;
        self
    }

    pub fn validate(&self) -> Result<(), PathModelError> {
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(PathModelError::NonPositiveStep(self.step_length));
        }
        if !(self.persistence_radius >= 0.0 && self.persistence_radius.is_finite()) {
            return Err(PathModelError::NegativePersistence(self.persistence_radius));
        }
        Ok(())
    }
}

/// An ordered chain of hop vectors of common length `a`.
#[derive(Debug, Clone)]
pub struct RoutePath {
    steps: Vec<[f64; 3]>,
    step_length: f64,
    dimension: Dim,
}

impl RoutePath {
    /// Builds a path, enforcing the fixed-step invariant on every hop.
    pub fn new(
        steps: Vec<[f64; 3]>,
        step_length: f64,
        dimension: Dim,
    ) -> Result<Self, PathModelError> {
        if steps.is_empty() {
            return Err(PathModelError::ZeroHops);
        }
        if !(step_length > 0.0 && step_length.is_finite()) {
            return Err(PathModelError::NonPositiveStep(step_length));
        }
        for (index, s) in steps.iter().enumerate() {
            let len = norm(*s);
            if (len - step_length).abs() > FIXED_STEP_REL_TOL * step_length {
                return Err(PathModelError::BrokenFixedStep {
                    index,
                    found: len,
                    expected: step_length,
                });
            }
        }
        Ok(Self {
            steps,
            step_length,
            dimension,
        })
    }

    pub(crate) fn from_unit_directions(
        dirs: Vec<[f64; 3]>,
        step_length: f64,
        dimension: Dim,
    ) -> Self {
        let steps = dirs.into_iter().map(|d| scale(d, step_length)).collect();
        Self {
            steps,
            step_length,
            dimension,
        }
    }

    pub fn steps(&self) -> &[[f64; 3]] {
        &self.steps
    }

    pub fn hop_count(&self) -> usize {
        self.steps.len()
    }

    pub fn step_length(&self) -> f64 {
        self.step_length
    }

    pub fn dimension(&self) -> Dim {
        self.dimension
    }

    /// Total path length L = N a.
    pub fn contour_length(&self) -> f64 {
        self.steps.len() as f64 * self.step_length
    }

    /// Vector sum of all hops.
    pub fn end_to_end_vector(&self) -> [f64; 3] {
        let mut r = [0.0; 3];
        for s in &self.steps {
            r[0] += s[0];
            r[1] += s[1];
            r[2] += s[2];
        }
        r
    }

    /// Euclidean distance between the chain's endpoints.
    pub fn end_to_end_distance(&self) -> f64 {
        norm(self.end_to_end_vector())
    }

    /// Unit tangent of hop `n`.
    pub fn unit_step(&self, n: usize) -> [f64; 3] {
        scale(self.steps[n], 1.0 / self.step_length)
    }
}

/// A seeded batch of sampled routes, reduced to end-to-end distances.
///
/// Identical `(params, n_hops, seed, len)` reproduce bit-identical distances
/// regardless of how many worker threads generated them.
#[derive(Debug, Clone)]
pub struct SampleEnsemble {
    pub params: StrategyParams,
    pub n_hops: usize,
    pub seed: u64,
    pub distances: Vec<f64>,
    pub paths: Option<Vec<RoutePath>>,
}

impl SampleEnsemble {
    /// Contour length L = N a shared by every sample.
    pub fn contour_length(&self) -> f64 {
        self.n_hops as f64 * self.params.step_length
    }
}

// Small fixed-size vector helpers shared by the samplers.

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(v: [f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

#[inline]
pub(crate) fn scale(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

#[inline]
pub(crate) fn normalize(v: [f64; 3]) -> [f64; 3] {
    scale(v, 1.0 / norm(v))
}
