//! Polarization qubits carried by pairs of (H, V) modes.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeRegistry, OccupationVector};

/// Two-photon polarization basis order used by operators and density matrices.
pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// The horizontal and vertical modes of one spatial path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathModes {
    pub h: usize,
    pub v: usize,
}

impl PathModes {
    pub fn new(h: usize, v: usize) -> Self {
        Self { h, v }
    }

    pub fn by_label(registry: &ModeRegistry, h: &str, v: &str) -> Result<Self> {
        Ok(Self {
            h: registry.require(h)?,
            v: registry.require(v)?,
        })
    }

    fn check(&self, registry: &ModeRegistry) -> Result<()> {
        registry.check_index(self.h)?;
        registry.check_index(self.v)?;
        if self.h == self.v {
            return Err(Error::SameMode(self.h));
        }
        Ok(())
    }

    pub fn mode(&self, pol: Polarization) -> usize {
        match pol {
            Polarization::H => self.h,
            Polarization::V => self.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn symbol(self) -> char {
        match self {
            Polarization::H => 'H',
            Polarization::V => 'V',
        }
    }
}

/// Occupation with one photon on each path in the given polarizations and
/// nothing anywhere else.
pub fn product_occupation(
    registry: &ModeRegistry,
    paths: &[PathModes],
    pols: &[Polarization],
) -> Result<OccupationVector> {
    let mut occ = OccupationVector::vacuum(registry.len());
    for (path, &pol) in paths.iter().zip(pols) {
        path.check(registry)?;
        let m = path.mode(pol);
        occ.set(m, occ.get(m) + 1);
    }
    Ok(occ)
}

/// Occupation for two-photon basis index `k` in [`BASIS_LABELS`] order.
pub fn pair_occupation(
    registry: &ModeRegistry,
    a: PathModes,
    b: PathModes,
    k: usize,
) -> Result<OccupationVector> {
    let pols = [
        Polarization::BOTH[k / 2],
        Polarization::BOTH[k % 2],
    ];
    product_occupation(registry, &[a, b], &pols)
}

/// Product of single-photon polarization qubits, one per path.
/// `qubits[i] = (c_H, c_V)` for `paths[i]`.
pub fn product_state(
    registry: &Arc<ModeRegistry>,
    paths: &[PathModes],
    qubits: &[(Complex64, Complex64)],
) -> Result<FockState> {
    if paths.len() != qubits.len() {
        return Err(Error::InvalidInput(format!(
            "{} paths but {} qubits",
            paths.len(),
            qubits.len()
        )));
    }
    let mut terms = Vec::new();
    let n = paths.len();
    for mask in 0..(1usize << n) {
        let pols: Vec<Polarization> = (0..n)
            .map(|i| Polarization::BOTH[(mask >> (n - 1 - i)) & 1])
            .collect();
        let amp = pols
            .iter()
            .zip(qubits)
            .map(|(p, (ch, cv))| if *p == Polarization::H { *ch } else { *cv })
            .product::<Complex64>();
        terms.push((product_occupation(registry, paths, &pols)?, amp));
    }
    FockState::from_terms(registry, terms)
}

/// Superposition over polarization strings: `terms[i] = ("HV…", amplitude)`,
/// one character per path.
pub fn polarization_state(
    registry: &Arc<ModeRegistry>,
    paths: &[PathModes],
    terms: &[(&str, Complex64)],
) -> Result<FockState> {
    let mut out = Vec::with_capacity(terms.len());
    for (pattern, amp) in terms {
        let pols = parse_pattern(pattern)?;
        if pols.len() != paths.len() {
            return Err(Error::InvalidInput(format!(
                "pattern `{pattern}` does not match {} paths",
                paths.len()
            )));
        }
        out.push((product_occupation(registry, paths, &pols)?, *amp));
    }
    FockState::from_terms(registry, out)
}

fn parse_pattern(pattern: &str) -> Result<Vec<Polarization>> {
    pattern
        .chars()
        .map(|c| match c {
            'H' | 'h' => Ok(Polarization::H),
            'V' | 'v' => Ok(Polarization::V),
            other => Err(Error::InvalidInput(format!(
                "polarization `{other}` is not H or V"
            ))),
        })
        .collect()
}

/// Polarization string of an occupation with exactly one photon per path and
/// no photons elsewhere.
pub fn polarization_label(occ: &OccupationVector, paths: &[PathModes]) -> Option<String> {
    let mut label = String::with_capacity(paths.len());
    let mut used = 0u32;
    for p in paths {
        match (occ.get(p.h), occ.get(p.v)) {
            (1, 0) => label.push('H'),
            (0, 1) => label.push('V'),
            _ => return None,
        }
        used += 1;
    }
    (occ.total() == used).then_some(label)
}
