//! Prebuilt circuits: the two-photon polarization filter, its Mach-Zehnder
//! core and a bare balanced beam splitter.

use std::f64::consts::TAU;
use std::sync::Arc;

use super::{Circuit, Element, Routing};
use crate::detection::DetectorModel;
use crate::error::{Error, Result};
use crate::fock::{ModeRegistry, PRUNE_TOLERANCE};
use crate::optics::{BeamSplitter, PhaseShift};

/// Mode order of the filter: the H and V rails of both paths, the two
/// single-photon ancillas and the attenuator's vacuum port.
pub const FILTER_MODES: [&str; 7] = ["p1H", "p1V", "p2H", "p2V", "anc1", "anc2", "attAnc"];

const P1H: usize = 0;
const P1V: usize = 1;
const P2H: usize = 2;
const P2V: usize = 3;
const ANC1: usize = 4;
const ANC2: usize = 5;
const ATT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Compensation {
    /// Pick the phase that makes the HH entry of the operator real positive.
    Auto,
    Fixed(f64),
}

/// Which vertical rail carries the R = 3/4 attenuator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttenuatorPath {
    Path1,
    Path2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub compensation: Compensation,
    pub detector: DetectorModel,
    pub attenuator_r: f64,
    pub attenuator_path: AttenuatorPath,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            compensation: Compensation::Auto,
            detector: DetectorModel::ideal(),
            attenuator_r: 0.75,
            attenuator_path: AttenuatorPath::Path1,
        }
    }
}

impl FilterSpec {
    pub fn with_detector(mut self, detector: DetectorModel) -> Self {
        self.detector = detector;
        self
    }

    pub fn with_attenuator(mut self, r: f64) -> Self {
        self.attenuator_r = r;
        self
    }

    fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        if !(0.0..=1.0).contains(&self.attenuator_r) {
            return Err(Error::InvalidReflectivity(self.attenuator_r));
        }
        if let Compensation::Fixed(phi) = self.compensation {
            if !phi.is_finite() {
                return Err(Error::InvalidPhase(phi));
            }
        }
        Ok(())
    }
}

fn identity_routing(modes: usize, rails: &[usize]) -> Result<Element> {
    // The rails are already split by polarization, so the polarizing beam
    // splitters only fix which rail each component travels on.
    Ok(Element::Permute(Routing::new(
        modes,
        rails.iter().map(|&m| (m, m)).collect(),
    )?))
}

fn assemble(
    phi: f64,
    detector: DetectorModel,
    attenuator_r: f64,
    path: AttenuatorPath,
) -> Result<Circuit> {
    let registry = Arc::new(ModeRegistry::new(FILTER_MODES)?);
    let n = registry.len();
    let rails = [P1H, P1V, P2H, P2V];
    let v_rail = match path {
        AttenuatorPath::Path1 => P1V,
        AttenuatorPath::Path2 => P2V,
    };
    let elements = vec![
        identity_routing(n, &rails)?,
        Element::BeamSplitter(BeamSplitter::balanced(P1H, P2H)?),
        Element::Inject { mode: ANC1, photons: 1 },
        Element::Inject { mode: ANC2, photons: 1 },
        Element::BeamSplitter(BeamSplitter::balanced(P1H, ANC1)?),
        Element::BeamSplitter(BeamSplitter::balanced(P2H, ANC2)?),
        Element::Detect { mode: ANC1, expect: 1, model: detector },
        Element::Detect { mode: ANC2, expect: 1, model: detector },
        Element::BeamSplitter(BeamSplitter::balanced(P1H, P2H)?),
        Element::Phase(PhaseShift::new(P1H, phi)?),
        Element::Inject { mode: ATT, photons: 0 },
        Element::BeamSplitter(BeamSplitter::new(v_rail, ATT, attenuator_r)?),
        Element::Detect { mode: ATT, expect: 0, model: detector },
        identity_routing(n, &rails)?,
    ];
    Circuit::new(registry, elements, rails.to_vec(), rails.to_vec())
}

/// Phase on the path-1 H rail that makes the HH → HH amplitude real positive.
pub fn auto_compensation_phase(spec: &FilterSpec) -> Result<f64> {
    spec.validate()?;
    let bare = assemble(0.0, DetectorModel::ideal(), spec.attenuator_r, spec.attenuator_path)?;
    let hh = bare.effective_polarization_operator()?.get(0, 0);
    if hh.norm() < PRUNE_TOLERANCE {
        return Ok(0.0);
    }
    let phi = (-hh.arg()).rem_euclid(TAU);
    if phi < 1e-12 || TAU - phi < 1e-12 {
        Ok(0.0)
    } else {
        Ok(phi)
    }
}

/// The complete two-photon polarization filter.
pub fn build_filter_circuit(spec: &FilterSpec) -> Result<Circuit> {
    spec.validate()?;
    let phi = match spec.compensation {
        Compensation::Auto => auto_compensation_phase(spec)?,
        Compensation::Fixed(phi) => phi,
    };
    assemble(phi, spec.detector, spec.attenuator_r, spec.attenuator_path)
}

/// Beam splitter, a one-photon-in/one-photon-out block on each arm, beam splitter.
pub fn mach_zehnder_core(detector: DetectorModel) -> Result<Circuit> {
    detector.validate()?;
    let registry = Arc::new(ModeRegistry::new(["h1", "h2", "anc1", "anc2"])?);
    let elements = vec![
        Element::BeamSplitter(BeamSplitter::balanced(0, 1)?),
        Element::Inject { mode: 2, photons: 1 },
        Element::Inject { mode: 3, photons: 1 },
        Element::BeamSplitter(BeamSplitter::balanced(0, 2)?),
        Element::BeamSplitter(BeamSplitter::balanced(1, 3)?),
        Element::Detect { mode: 2, expect: 1, model: detector },
        Element::Detect { mode: 3, expect: 1, model: detector },
        Element::BeamSplitter(BeamSplitter::balanced(0, 1)?),
    ];
    Circuit::new(registry, elements, vec![0, 1], vec![0, 1])
}

pub fn balanced_splitter_circuit() -> Result<Circuit> {
    let registry = Arc::new(ModeRegistry::new(["a", "b"])?);
    Circuit::new(
        registry,
        vec![Element::BeamSplitter(BeamSplitter::balanced(0, 1)?)],
        vec![0, 1],
        vec![0, 1],
    )
}
