//! Circuit netlists and their execution on pure states and ensembles.

mod filter;
mod netlist;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::detection::{lossy_postselect, DetectorModel, Ensemble};
use crate::error::{Error, Result};
use crate::fock::{same_registry, FockState, ModeRegistry};
use crate::optics::{apply_beam_splitter, apply_phase, permute_modes, BeamSplitter, ModePermutation, PhaseShift};
use crate::polarization::{pair_occupation, PathModes, BASIS_LABELS};

pub use filter::{
    auto_compensation_phase, balanced_splitter_circuit, build_filter_circuit, mach_zehnder_core,
    AttenuatorPath, Compensation, FilterSpec, FILTER_MODES,
};
pub use netlist::{parse_circuit, serialize_circuit};

/// Mode routing given as explicit `(from, to)` pairs; unlisted modes stay put.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    pairs: Vec<(usize, usize)>,
    permutation: ModePermutation,
}

impl Routing {
    pub fn new(modes: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        let permutation = ModePermutation::from_pairs(modes, &pairs)?;
        Ok(Self { pairs, permutation })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn permutation(&self) -> &ModePermutation {
        &self.permutation
    }

    fn widened(&self, modes: usize) -> Result<Self> {
        Self::new(modes, self.pairs.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    BeamSplitter(BeamSplitter),
    Phase(PhaseShift),
    Permute(Routing),
    Inject { mode: usize, photons: u8 },
    Detect { mode: usize, expect: u8, model: DetectorModel },
}

impl Element {
    /// Modes this element reads or writes.
    fn touched(&self) -> Vec<usize> {
        match self {
            Element::BeamSplitter(bs) => vec![bs.mode_a, bs.mode_b],
            Element::Phase(p) => vec![p.mode],
            Element::Permute(r) => r
                .permutation()
                .moved()
                .flat_map(|(a, b)| [a, b])
                .collect(),
            Element::Inject { mode, .. } | Element::Detect { mode, .. } => vec![*mode],
        }
    }

    fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        match self {
            Element::BeamSplitter(bs) => bs.validate()?,
            Element::Phase(p) => {
                PhaseShift::new(p.mode, p.phi)?;
            }
            Element::Permute(r) => {
                if r.permutation().len() != registry.len() {
                    return Err(Error::NotPermutation(format!(
                        "routing covers {} modes, registry has {}",
                        r.permutation().len(),
                        registry.len()
                    )));
                }
            }
            Element::Inject { photons, .. } => {
                if *photons > registry.cap() {
                    return Err(Error::InvalidParameter(format!(
                        "injecting {photons} photons exceeds cap {}",
                        registry.cap()
                    )));
                }
            }
            Element::Detect { model, .. } => model.validate()?,
        }
        for m in self.touched() {
            registry.check_index(m)?;
        }
        Ok(())
    }
}

/// Ordered netlist over a fixed mode registry.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    elements: Vec<Element>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl Circuit {
    pub fn new(
        registry: Arc<ModeRegistry>,
        elements: Vec<Element>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let mut detected = BTreeSet::new();
        for (i, el) in elements.iter().enumerate() {
            el.validate(&registry).map_err(|e| Error::Element {
                element: i,
                message: e.to_string(),
            })?;
            for m in el.touched() {
                if detected.contains(&m) {
                    return Err(Error::UseAfterDetect {
                        element: i,
                        mode: registry.labels()[m].clone(),
                    });
                }
            }
            if let Element::Detect { mode, .. } = el {
                detected.insert(*mode);
            }
        }
        for &m in inputs.iter().chain(&outputs) {
            registry.check_index(m)?;
        }
        if let Some(&m) = outputs.iter().find(|m| detected.contains(m)) {
            return Err(Error::InvalidParameter(format!(
                "output mode `{}` is consumed by a detector",
                registry.labels()[m]
            )));
        }
        Ok(Self {
            registry,
            elements,
            inputs,
            outputs,
        })
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn has_only_ideal_detectors(&self) -> bool {
        self.first_lossy_detector().is_none()
    }

    fn first_lossy_detector(&self) -> Option<usize> {
        self.elements.iter().position(|el| {
            matches!(el, Element::Detect { model, .. } if !model.is_ideal())
        })
    }

    /// Same circuit with every detector replaced by `model`.
    pub fn with_detector_model(&self, model: DetectorModel) -> Result<Self> {
        model.validate()?;
        let elements = self
            .elements
            .iter()
            .map(|el| match el {
                Element::Detect { mode, expect, .. } => Element::Detect {
                    mode: *mode,
                    expect: *expect,
                    model,
                },
                other => other.clone(),
            })
            .collect();
        Self::new(
            Arc::clone(&self.registry),
            elements,
            self.inputs.clone(),
            self.outputs.clone(),
        )
    }

    /// Appends untouched modes, e.g. spectator photons of an entangled input.
    pub fn with_spectators<I, S>(&self, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let registry = Arc::new(self.registry.extended(labels)?);
        let elements = self
            .elements
            .iter()
            .map(|el| match el {
                Element::Permute(r) => r.widened(registry.len()).map(Element::Permute),
                other => Ok(other.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(registry, elements, self.inputs.clone(), self.outputs.clone())
    }

    fn check_input(&self, registry: &Arc<ModeRegistry>) -> Result<()> {
        if same_registry(&self.registry, registry) {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    fn apply_linear(el: &Element, state: &FockState) -> Result<FockState> {
        match el {
            Element::BeamSplitter(bs) => apply_beam_splitter(state, bs),
            Element::Phase(p) => apply_phase(state, p),
            Element::Permute(r) => permute_modes(state, r.permutation()),
            Element::Inject { mode, photons } => state.inject(*mode, *photons),
            Element::Detect { .. } => unreachable!("detectors are handled by the caller"),
        }
    }

    /// Conditional pure-state evolution; every detector must be ideal.
    pub fn run_pure(&self, input: &FockState) -> Result<FockState> {
        self.check_input(input.registry())?;
        if let Some(i) = self.first_lossy_detector() {
            return Err(Error::NonIdealDetector(i));
        }
        let mut state = input.clone();
        for (i, el) in self.elements.iter().enumerate() {
            state = match el {
                Element::Detect { mode, expect, .. } => state.project_mode(*mode, *expect),
                other => Self::apply_linear(other, &state),
            }
            .map_err(|e| at_element(i, e))?;
        }
        Ok(state)
    }

    /// Runs the circuit on a mixed input. Lossy detectors split branches by
    /// the true photon count they absorb.
    pub fn run(&self, input: &Ensemble) -> Result<Ensemble> {
        self.check_input(input.registry())?;
        let mut ens = input.clone();
        for (i, el) in self.elements.iter().enumerate() {
            ens = match el {
                Element::Detect {
                    mode,
                    expect,
                    model,
                } => lossy_postselect(&ens, *mode, u32::from(*expect), model),
                other => ens.map_states(|s| Self::apply_linear(other, s)),
            }
            .map_err(|e| at_element(i, e))?;
        }
        Ok(ens)
    }

    /// 4×4 conditional operator on the two-photon polarization subspace.
    ///
    /// The declared inputs and outputs must each list four modes, read as
    /// `(path1 H, path1 V, path2 H, path2 V)`.
    pub fn effective_polarization_operator(&self) -> Result<PolarizationOperator> {
        if let Some(i) = self.first_lossy_detector() {
            return Err(Error::NonIdealDetector(i));
        }
        let (in_a, in_b) = self.paths(&self.inputs, "inputs")?;
        let (out_a, out_b) = self.paths(&self.outputs, "outputs")?;
        let out_occ = (0..4)
            .map(|k| pair_occupation(&self.registry, out_a, out_b, k))
            .collect::<Result<Vec<_>>>()?;
        let columns = (0..4)
            .into_par_iter()
            .map(|k| {
                let occ = pair_occupation(&self.registry, in_a, in_b, k)?;
                let out = self.run_pure(&FockState::basis(&self.registry, occ)?)?;
                Ok(out_occ.iter().map(|o| out.amplitude(o)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut entries = [[Complex64::default(); 4]; 4];
        for (col, amps) in columns.iter().enumerate() {
            for (row, amp) in amps.iter().enumerate() {
                entries[row][col] = *amp;
            }
        }
        Ok(PolarizationOperator { entries })
    }

    fn paths(&self, modes: &[usize], what: &str) -> Result<(PathModes, PathModes)> {
        match modes {
            [ah, av, bh, bv] => Ok((PathModes::new(*ah, *av), PathModes::new(*bh, *bv))),
            _ => Err(Error::InvalidParameter(format!(
                "operator extraction needs four {what} (path1 H, path1 V, path2 H, path2 V), found {}",
                modes.len()
            ))),
        }
    }
}

fn at_element(element: usize, e: Error) -> Error {
    match e {
        Error::Element { .. } => e,
        other => Error::Element {
            element,
            message: other.to_string(),
        },
    }
}

/// Conditional operator on the basis (HH, HV, VH, VV); `entries[out][in]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationOperator {
    pub entries: [[Complex64; 4]; 4],
}

impl PolarizationOperator {
    pub fn identity() -> Self {
        let mut entries = [[Complex64::default(); 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        Self { entries }
    }

    pub fn get(&self, out: usize, input: usize) -> Complex64 {
        self.entries[out][input]
    }

    pub fn diagonal(&self) -> [Complex64; 4] {
        std::array::from_fn(|i| self.entries[i][i])
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.max_off_diagonal() <= tol
    }

    pub fn apply(&self, v: &[Complex64; 4]) -> [Complex64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| self.entries[i][j] * v[j]).sum())
    }

    /// Output probability for each basis input.
    pub fn column_acceptance(&self) -> [f64; 4] {
        std::array::from_fn(|j| (0..4).map(|i| self.entries[i][j].norm_sqr()).sum())
    }

    pub fn labels() -> [&'static str; 4] {
        BASIS_LABELS
    }
}
