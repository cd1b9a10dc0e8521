//! Sparse multimode bosonic states.
//!
//! A [`FockState`] maps occupation vectors (photon counts per mode) to complex
//! amplitudes. States produced by post-selection are generally unnormalized;
//! their squared norm is the probability of the conditioning outcome.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are dropped from a state.
pub const PRUNE_TOLERANCE: f64 = 1e-14;
/// Default maximum photon count per mode.
pub const DEFAULT_CAP: u8 = 8;
/// Largest configurable per-mode cap. Keeps factorials of two merged modes finite.
pub const MAX_CAP: u8 = 64;

/// Ordered list of unique mode labels plus the per-mode photon cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<String>,
    cap: u8,
}

impl ModeRegistry {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            labels,
            cap: DEFAULT_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u8) -> Result<Self> {
        if cap == 0 || cap > MAX_CAP {
            return Err(Error::InvalidCap(cap));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Result<&str> {
        self.labels
            .get(index)
            .map(String::as_str)
            .ok_or(Error::InvalidMode(index))
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.labels.len() {
            Ok(())
        } else {
            Err(Error::InvalidMode(index))
        }
    }

    /// Registry of `self` followed by `other`. The cap is the smaller of the two.
    pub fn concat(&self, other: &ModeRegistry) -> Result<Self> {
        let mut reg = Self::new(self.labels.iter().chain(other.labels.iter()).cloned())?;
        reg.cap = self.cap.min(other.cap);
        Ok(reg)
    }

    /// Registry with `extra` labels appended; existing indices are unchanged.
    pub fn extended<I, S>(&self, extra: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = self
            .labels
            .iter()
            .cloned()
            .chain(extra.into_iter().map(Into::into));
        let mut reg = Self::new(labels)?;
        reg.cap = self.cap;
        Ok(reg)
    }
}

/// Photon count in each mode of a registry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<u8>);

impl OccupationVector {
    pub fn new(counts: Vec<u8>) -> Self {
        Self(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&c| u32::from(c)).sum()
    }

    pub fn with(&self, mode: usize, count: u8) -> Self {
        let mut counts = self.0.clone();
        counts[mode] = count;
        Self(counts)
    }

    pub(crate) fn set(&mut self, mode: usize, count: u8) {
        self.0[mode] = count;
    }

    fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        if self.0.len() != registry.len() {
            return Err(Error::LengthMismatch {
                expected: registry.len(),
                found: self.0.len(),
            });
        }
        for (i, &c) in self.0.iter().enumerate() {
            if c > registry.cap() {
                return Err(Error::CapExceeded {
                    mode: registry.labels[i].clone(),
                    count: u32::from(c),
                    cap: registry.cap(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "⟩")
    }
}

/// Sparse superposition of occupation vectors over a shared registry.
#[derive(Debug, Clone)]
pub struct FockState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<OccupationVector, Complex64>,
}

impl PartialEq for FockState {
    fn eq(&self, other: &Self) -> bool {
        same_registry(&self.registry, &other.registry) && self.terms == other.terms
    }
}

pub(crate) fn same_registry(a: &Arc<ModeRegistry>, b: &Arc<ModeRegistry>) -> bool {
    Arc::ptr_eq(a, b) || a.labels == b.labels
}

fn prune(terms: &mut BTreeMap<OccupationVector, Complex64>) {
    terms.retain(|_, amp| amp.norm() >= PRUNE_TOLERANCE);
}

fn check_finite(amp: Complex64) -> Result<()> {
    if amp.re.is_finite() && amp.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite amplitude {amp}")))
    }
}

impl FockState {
    /// The state with no terms.
    pub fn zero(registry: &Arc<ModeRegistry>) -> Self {
        Self {
            registry: Arc::clone(registry),
            terms: BTreeMap::new(),
        }
    }

    /// Single basis term with amplitude 1.
    pub fn basis(registry: &Arc<ModeRegistry>, occ: OccupationVector) -> Result<Self> {
        occ.validate(registry)?;
        let mut terms = BTreeMap::new();
        terms.insert(occ, Complex64::new(1.0, 0.0));
        Ok(Self {
            registry: Arc::clone(registry),
            terms,
        })
    }

    pub fn vacuum(registry: &Arc<ModeRegistry>) -> Self {
        Self::basis(registry, OccupationVector::vacuum(registry.len()))
            .expect("vacuum is always valid")
    }

    /// Basis state with photons placed on the named modes.
    pub fn from_labels(registry: &Arc<ModeRegistry>, photons: &[(&str, u8)]) -> Result<Self> {
        let mut occ = OccupationVector::vacuum(registry.len());
        for &(label, n) in photons {
            let i = registry.require(label)?;
            occ.set(i, occ.get(i).saturating_add(n));
        }
        Self::basis(registry, occ)
    }

    /// Builds a state from explicit terms; repeated keys are summed.
    pub fn from_terms<I>(registry: &Arc<ModeRegistry>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut map: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            occ.validate(registry)?;
            check_finite(amp)?;
            *map.entry(occ).or_default() += amp;
        }
        prune(&mut map);
        Ok(Self {
            registry: Arc::clone(registry),
            terms: map,
        })
    }

    /// Used by element kernels that already produce valid occupation vectors.
    pub(crate) fn from_map(
        registry: &Arc<ModeRegistry>,
        mut terms: BTreeMap<OccupationVector, Complex64>,
    ) -> Self {
        prune(&mut terms);
        Self {
            registry: Arc::clone(registry),
            terms,
        }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn amplitude_of(&self, photons: &[(&str, u8)]) -> Result<Complex64> {
        let key = Self::from_labels(&self.registry, photons)?;
        let occ = key.terms.keys().next().expect("basis has one term");
        Ok(self.amplitude(occ))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if same_registry(&self.registry, &other.registry) {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, true)
        } else {
            (&other.terms, &self.terms, false)
        };
        let mut acc = Complex64::default();
        for (occ, a) in small {
            if let Some(b) = large.get(occ) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(Complex64::norm_sqr).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        Self::from_map(&self.registry, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut terms = self.terms.clone();
        for (occ, amp) in &other.terms {
            *terms.entry(occ.clone()).or_default() += amp;
        }
        Ok(Self::from_map(&self.registry, terms))
    }

    /// Product state on the concatenated registry (`self` modes first).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let registry = Arc::new(self.registry.concat(&other.registry)?);
        let mut terms = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut counts = a.0.clone();
                counts.extend_from_slice(&b.0);
                terms.insert(OccupationVector(counts), x * y);
            }
        }
        Ok(Self::from_map(&registry, terms))
    }

    /// Distinct total photon numbers carried by the stored terms.
    pub fn total_photon_numbers(&self) -> BTreeSet<u32> {
        self.terms.keys().map(OccupationVector::total).collect()
    }

    /// Unit-norm copy, or `None` for the zero state.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        if n < PRUNE_TOLERANCE {
            None
        } else {
            Some(self.scale(Complex64::new(1.0 / n, 0.0)))
        }
    }

    /// Keeps terms with exactly `count` photons in `mode`, then empties the mode.
    pub fn project_mode(&self, mode: usize, count: u8) -> Result<Self> {
        self.registry.check_index(mode)?;
        let terms = self
            .terms
            .iter()
            .filter(|(occ, _)| occ.get(mode) == count)
            .map(|(occ, amp)| (occ.with(mode, 0), *amp))
            .collect();
        Ok(Self::from_map(&self.registry, terms))
    }

    /// Photon counts present in `mode` with the squared norm of each slice.
    pub fn mode_distribution(&self, mode: usize) -> Result<BTreeMap<u8, f64>> {
        self.registry.check_index(mode)?;
        let mut dist = BTreeMap::new();
        for (occ, amp) in &self.terms {
            *dist.entry(occ.get(mode)).or_insert(0.0) += amp.norm_sqr();
        }
        Ok(dist)
    }

    pub fn is_vacuum_in(&self, mode: usize) -> bool {
        self.terms.keys().all(|occ| occ.get(mode) == 0)
    }

    /// Places `photons` into a mode that must be empty in every term.
    pub fn inject(&self, mode: usize, photons: u8) -> Result<Self> {
        self.registry.check_index(mode)?;
        if !self.is_vacuum_in(mode) {
            return Err(Error::NonVacuumMode(self.registry.labels[mode].clone()));
        }
        if photons > self.registry.cap() {
            return Err(Error::CapExceeded {
                mode: self.registry.labels[mode].clone(),
                count: u32::from(photons),
                cap: self.registry.cap(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(occ, amp)| (occ.with(mode, photons), *amp))
            .collect();
        Ok(Self::from_map(&self.registry, terms))
    }

    /// Re-expresses the state on `target`, matching modes by label.
    ///
    /// Modes missing from `target` must be empty in every term; modes only in
    /// `target` start empty.
    pub fn embed(&self, target: &Arc<ModeRegistry>) -> Result<Self> {
        let mut mapping = Vec::with_capacity(self.registry.len());
        for (i, label) in self.registry.labels.iter().enumerate() {
            match target.index_of(label) {
                Some(j) => mapping.push(Some(j)),
                None if self.is_vacuum_in(i) => mapping.push(None),
                None => return Err(Error::NonVacuumMode(label.clone())),
            }
        }
        let terms = self.terms.iter().map(|(occ, amp)| {
            let mut out = OccupationVector::vacuum(target.len());
            for (i, j) in mapping.iter().enumerate() {
                if let Some(j) = j {
                    out.set(*j, occ.get(i));
                }
            }
            (out, *amp)
        });
        Self::from_terms(target, terms)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (occ, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){occ}", amp.re, amp.im)?;
        }
        Ok(())
    }
}
