//! Photon-counting detectors and conditioned ensembles.
//!
//! Detectors are number-diagonal: a lossy detector loses each incident photon
//! independently with probability `1 − eta` and adds at most one dark count
//! with probability `dark`. A detector absorbs its mode, so after conditioning
//! the mode is empty.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{same_registry, FockState, ModeRegistry};

/// Tolerance on normalization of branch states and on total weight.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Ideal,
    Lossy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub eta: f64,
    pub dark: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl DetectorModel {
    pub const fn ideal() -> Self {
        Self {
            kind: DetectorKind::Ideal,
            eta: 1.0,
            dark: 0.0,
        }
    }

    pub fn lossy(eta: f64, dark: f64) -> Result<Self> {
        let m = Self {
            kind: DetectorKind::Lossy,
            eta,
            dark,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidDetector(format!("eta {} outside [0, 1]", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.dark) {
            return Err(Error::InvalidDetector(format!(
                "dark {} outside [0, 1]",
                self.dark
            )));
        }
        if self.kind == DetectorKind::Ideal && (self.eta != 1.0 || self.dark != 0.0) {
            return Err(Error::InvalidDetector(
                "ideal detectors have eta = 1 and dark = 0".into(),
            ));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.kind == DetectorKind::Ideal
    }
}

fn binomial_pmf(k: u32, n: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut coeff = 1.0;
    for i in 0..k {
        coeff *= f64::from(n - i) / f64::from(i + 1);
    }
    coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Probability that the detector reports `reported` photons when `incident` arrive.
pub fn povm_probability(model: &DetectorModel, reported: u32, incident: u32) -> f64 {
    match model.kind {
        DetectorKind::Ideal => {
            if reported == incident {
                1.0
            } else {
                0.0
            }
        }
        DetectorKind::Lossy => {
            let clean = binomial_pmf(reported, incident, model.eta);
            let with_dark = if reported > 0 {
                binomial_pmf(reported - 1, incident, model.eta)
            } else {
                0.0
            };
            (1.0 - model.dark) * clean + model.dark * with_dark
        }
    }
}

/// Projects `mode` onto `count` photons and absorbs it. The result is unnormalized;
/// its squared norm is the outcome probability.
pub fn ideal_postselect(state: &FockState, mode: usize, count: u8) -> Result<FockState> {
    state.project_mode(mode, count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub state: FockState,
}

/// Weighted mixture of normalized pure branches. The total weight is the
/// probability of every conditioning applied so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    registry: Arc<ModeRegistry>,
    branches: Vec<Branch>,
}

impl Ensemble {
    pub fn empty(registry: &Arc<ModeRegistry>) -> Self {
        Self {
            registry: Arc::clone(registry),
            branches: Vec::new(),
        }
    }

    /// Single branch whose weight is the squared norm of `state`.
    pub fn pure(state: &FockState) -> Self {
        let mut ens = Self::empty(state.registry());
        ens.push_unnormalized(state.clone(), 1.0);
        ens
    }

    pub fn from_branches(registry: &Arc<ModeRegistry>, branches: Vec<Branch>) -> Result<Self> {
        let mut total = 0.0;
        for b in &branches {
            if !same_registry(registry, b.state.registry()) {
                return Err(Error::RegistryMismatch);
            }
            if b.weight.is_nan() || b.weight < 0.0 {
                return Err(Error::InvalidInput(format!("negative weight {}", b.weight)));
            }
            let n = b.state.norm_sqr();
            if (n - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(Error::Unnormalized(n));
            }
            total += b.weight;
        }
        if total > 1.0 + WEIGHT_TOLERANCE {
            return Err(Error::InvalidInput(format!("branch weights sum to {total}")));
        }
        Ok(Self {
            registry: Arc::clone(registry),
            branches,
        })
    }

    /// Appends `scale · |state|²` as a new normalized branch; zero states are dropped.
    fn push_unnormalized(&mut self, state: FockState, scale: f64) {
        let n = state.norm_sqr();
        let weight = scale * n;
        if weight <= 0.0 {
            return;
        }
        if let Some(normalized) = state.normalized() {
            self.branches.push(Branch {
                weight,
                state: normalized,
            });
        }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn acceptance_probability(&self) -> f64 {
        self.branches.iter().fold(0.0, |acc, b| acc + b.weight)
    }

    /// Applies a linear, trace-non-increasing map to every branch.
    pub fn map_states<F>(&self, mut op: F) -> Result<Self>
    where
        F: FnMut(&FockState) -> Result<FockState>,
    {
        let mut registry = None;
        let mut out = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let next = op(&b.state)?;
            registry.get_or_insert_with(|| Arc::clone(next.registry()));
            out.push((next, b.weight));
        }
        let mut ens = Self::empty(registry.as_ref().unwrap_or(&self.registry));
        for (state, w) in out {
            ens.push_unnormalized(state, w);
        }
        Ok(ens)
    }

    /// The single branch scaled back to an unnormalized pure state, if the
    /// ensemble has at most one branch.
    pub fn as_pure(&self) -> Option<FockState> {
        match self.branches.as_slice() {
            [] => Some(FockState::zero(&self.registry)),
            [b] => Some(b.state.scale(num_complex::Complex64::new(b.weight.sqrt(), 0.0))),
            _ => None,
        }
    }
}

/// Conditions every branch on the detector in `mode` reporting `reported`.
///
/// Each branch splits by the true photon count in the mode; the pieces are
/// weighted by the POVM and emitted in increasing count order.
pub fn lossy_postselect(
    ensemble: &Ensemble,
    mode: usize,
    reported: u32,
    model: &DetectorModel,
) -> Result<Ensemble> {
    model.validate()?;
    ensemble.registry().check_index(mode)?;
    let mut out = Ensemble::empty(ensemble.registry());
    for branch in ensemble.branches() {
        let counts = branch.state.mode_distribution(mode)?;
        for &n in counts.keys() {
            let p = povm_probability(model, reported, u32::from(n));
            if p == 0.0 {
                continue;
            }
            let piece = branch.state.project_mode(mode, n)?;
            out.push_unnormalized(piece, branch.weight * p);
        }
    }
    Ok(out)
}
