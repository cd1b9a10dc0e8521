//! Linear-optical elements acting on [`FockState`]s.
//!
//! Beam splitter convention: the creation operator of `mode_a` maps to
//! `√(1−R)·a† + i√R·b†` and that of `mode_b` to `i√R·a† + √(1−R)·b†`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeRegistry, OccupationVector, MAX_CAP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    pub mode_a: usize,
    pub mode_b: usize,
    pub reflectivity: f64,
}

impl BeamSplitter {
    pub fn new(mode_a: usize, mode_b: usize, reflectivity: f64) -> Result<Self> {
        let bs = Self {
            mode_a,
            mode_b,
            reflectivity,
        };
        bs.validate()?;
        Ok(bs)
    }

    pub fn balanced(mode_a: usize, mode_b: usize) -> Result<Self> {
        Self::new(mode_a, mode_b, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode_a == self.mode_b {
            return Err(Error::SameMode(self.mode_a));
        }
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(Error::InvalidReflectivity(self.reflectivity));
        }
        Ok(())
    }

    fn amplitudes(&self) -> (f64, f64) {
        ((1.0 - self.reflectivity).sqrt(), self.reflectivity.sqrt())
    }

    /// Columns give the images of a† and b†: `a† → m[0][0] a† + m[1][0] b†`.
    fn mode_matrix(&self, inverse: bool) -> [[Complex64; 2]; 2] {
        let (t, r) = self.amplitudes();
        let refl = if inverse {
            Complex64::new(0.0, -r)
        } else {
            Complex64::new(0.0, r)
        };
        let trans = Complex64::new(t, 0.0);
        [[trans, refl], [refl, trans]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    pub mode: usize,
    pub phi: f64,
}

impl PhaseShift {
    pub fn new(mode: usize, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidPhase(phi));
        }
        Ok(Self { mode, phi })
    }
}

/// Bijection on registry indices; `image[i]` is where mode `i`'s photons go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePermutation {
    image: Vec<usize>,
}

impl ModePermutation {
    pub fn identity(modes: usize) -> Self {
        Self {
            image: (0..modes).collect(),
        }
    }

    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut hit = vec![false; image.len()];
        for (i, &j) in image.iter().enumerate() {
            if j >= image.len() {
                return Err(Error::NotPermutation(format!(
                    "mode {i} maps to {j}, outside 0..{}",
                    image.len()
                )));
            }
            if std::mem::replace(&mut hit[j], true) {
                return Err(Error::NotPermutation(format!("mode {j} is hit twice")));
            }
        }
        Ok(Self { image })
    }

    /// Builds a permutation from explicit `(from, to)` pairs; unlisted modes stay fixed.
    pub fn from_pairs(modes: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut image: Vec<usize> = (0..modes).collect();
        let mut seen = vec![false; modes];
        for &(from, to) in pairs {
            if from >= modes || to >= modes {
                return Err(Error::InvalidMode(from.max(to)));
            }
            if std::mem::replace(&mut seen[from], true) {
                return Err(Error::NotPermutation(format!("mode {from} listed twice")));
            }
            image[from] = to;
        }
        Self::new(image)
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self, mode: usize) -> usize {
        self.image[mode]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Non-fixed `(from, to)` pairs.
    pub fn moved(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.image
            .iter()
            .enumerate()
            .filter(|(i, j)| i != *j)
            .map(|(i, &j)| (i, j))
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Self { image: inv }
    }
}

fn factorials() -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 2 * usize::from(MAX_CAP) + 1;
        let mut t = Vec::with_capacity(n);
        let mut acc = 1.0;
        t.push(acc);
        for k in 1..n {
            acc *= k as f64;
            t.push(acc);
        }
        t
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let f = factorials();
    f[n] / (f[k] * f[n - k])
}

fn cap_error(registry: &ModeRegistry, mode: usize, count: u32) -> Error {
    Error::CapExceeded {
        mode: registry.labels()[mode].clone(),
        count,
        cap: registry.cap(),
    }
}

/// General two-mode linear transformation of creation operators.
fn apply_two_mode(
    state: &FockState,
    a: usize,
    b: usize,
    m: [[Complex64; 2]; 2],
) -> Result<FockState> {
    let registry = state.registry();
    registry.check_index(a)?;
    registry.check_index(b)?;
    if a == b {
        return Err(Error::SameMode(a));
    }
    let f = factorials();
    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let na = usize::from(occ.get(a));
        let nb = usize::from(occ.get(b));
        let norm_in = (f[na] * f[nb]).sqrt();
        // (m00 a† + m10 b†)^na (m01 a† + m11 b†)^nb
        for j in 0..=na {
            let ca = m[0][0].powu(j as u32) * m[1][0].powu((na - j) as u32) * binomial(na, j);
            for l in 0..=nb {
                let cb =
                    m[0][1].powu(l as u32) * m[1][1].powu((nb - l) as u32) * binomial(nb, l);
                let out_a = j + l;
                let out_b = na + nb - out_a;
                let weight = (f[out_a] * f[out_b]).sqrt() / norm_in;
                let key = occ.with(a, out_a as u8).with(b, out_b as u8);
                *out.entry(key).or_default() += amp * ca * cb * weight;
            }
        }
    }
    let result = FockState::from_map(registry, out);
    let cap = u32::from(registry.cap());
    for (occ, _) in result.terms() {
        for mode in [a, b] {
            let count = u32::from(occ.get(mode));
            if count > cap {
                return Err(cap_error(registry, mode, count));
            }
        }
    }
    Ok(result)
}

pub fn apply_beam_splitter(state: &FockState, bs: &BeamSplitter) -> Result<FockState> {
    bs.validate()?;
    apply_two_mode(state, bs.mode_a, bs.mode_b, bs.mode_matrix(false))
}

/// Undoes [`apply_beam_splitter`] (reflection phase conjugated).
pub fn apply_beam_splitter_inverse(state: &FockState, bs: &BeamSplitter) -> Result<FockState> {
    bs.validate()?;
    apply_two_mode(state, bs.mode_a, bs.mode_b, bs.mode_matrix(true))
}

pub fn apply_phase(state: &FockState, phase: &PhaseShift) -> Result<FockState> {
    state.registry().check_index(phase.mode)?;
    if !phase.phi.is_finite() {
        return Err(Error::InvalidPhase(phase.phi));
    }
    let terms = state
        .terms()
        .map(|(occ, amp)| {
            let n = f64::from(occ.get(phase.mode));
            (occ.clone(), amp * Complex64::from_polar(1.0, phase.phi * n))
        })
        .collect();
    Ok(FockState::from_map(state.registry(), terms))
}

pub fn permute_modes(state: &FockState, perm: &ModePermutation) -> Result<FockState> {
    let registry = state.registry();
    if perm.len() != registry.len() {
        return Err(Error::NotPermutation(format!(
            "permutation covers {} modes, registry has {}",
            perm.len(),
            registry.len()
        )));
    }
    let terms = state
        .terms()
        .map(|(occ, amp)| {
            let mut out = OccupationVector::vacuum(registry.len());
            for i in 0..registry.len() {
                out.set(perm.image(i), occ.get(i));
            }
            (out, *amp)
        })
        .collect();
    Ok(FockState::from_map(registry, terms))
}

/// `(i/√2)^{n+1} (n−1)`: the one-photon-in/one-photon-out matrix element of a
/// balanced beam splitter for `n` signal photons, in the phase convention
/// that accompanies the closed form. Only magnitudes and the zero at `n = 1`
/// are convention independent.
pub fn s11_closed_form(n: i64) -> Result<Complex64> {
    if n < 0 {
        return Err(Error::NegativePhotonNumber(n));
    }
    let base = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    Ok(base.powu((n + 1) as u32) * (n - 1) as f64)
}

/// Injects one photon into `ancilla`, mixes it with `signal` on a balanced
/// beam splitter and keeps the branch where exactly one photon leaves through
/// the ancilla port. The ancilla ends empty.
pub fn apply_s11(state: &FockState, signal: usize, ancilla: usize) -> Result<FockState> {
    let injected = state.inject(ancilla, 1)?;
    let mixed = apply_beam_splitter(&injected, &BeamSplitter::balanced(signal, ancilla)?)?;
    mixed.project_mode(ancilla, 1)
}

/// Closed form of a reflectivity-`r` beam splitter with a vacuum ancilla,
/// post-selected on zero reflected photons: each term picks up `(√(1−r))^n`.
pub fn apply_vacuum_attenuator(state: &FockState, mode: usize, r: f64) -> Result<FockState> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidReflectivity(r));
    }
    state.registry().check_index(mode)?;
    let t = (1.0 - r).sqrt();
    let terms = state
        .terms()
        .map(|(occ, amp)| (occ.clone(), amp * t.powi(i32::from(occ.get(mode)))))
        .collect();
    Ok(FockState::from_map(state.registry(), terms))
}

/// The same attenuator built explicitly from a temporary ancilla mode.
pub fn vacuum_attenuator_by_construction(
    state: &FockState,
    mode: usize,
    r: f64,
) -> Result<FockState> {
    let original = state.registry();
    original.check_index(mode)?;
    let mut ancilla_label = String::from("__attenuator_ancilla");
    while original.index_of(&ancilla_label).is_some() {
        ancilla_label.push('_');
    }
    let widened = Arc::new(original.extended([ancilla_label])?);
    let ancilla = widened.len() - 1;
    let lifted = state.embed(&widened)?;
    let mixed = apply_beam_splitter(&lifted, &BeamSplitter::new(mode, ancilla, r)?)?;
    mixed.project_mode(ancilla, 0)?.embed(original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    const TOL: f64 = 1e-12;

    fn reg(labels: &[&str]) -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::new(labels.iter().copied()).unwrap())
    }

    fn ket(r: &Arc<ModeRegistry>, c: &[u8]) -> FockState {
        FockState::basis(r, OccupationVector::new(c.to_vec())).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &FockState, b: &FockState) -> bool {
        let d = a.add(&b.scale(c(-1.0, 0.0))).unwrap();
        d.norm_sqr().sqrt() < TOL
    }

    #[test]
    fn bunching_of_one_one() {
        let r = reg(&["a", "b"]);
        let out = apply_beam_splitter(&ket(&r, &[1, 1]), &BeamSplitter::balanced(0, 1).unwrap())
            .unwrap();
        let expected = ket(&r, &[0, 2])
            .add(&ket(&r, &[2, 0]))
            .unwrap()
            .scale(c(0.0, FRAC_1_SQRT_2));
        assert!(close(&out, &expected), "{out}");
    }

    #[test]
    fn vacuum_passes_any_splitter() {
        let r = reg(&["a", "b"]);
        for refl in [0.0, 0.3, 0.75, 1.0] {
            let out =
                apply_beam_splitter(&FockState::vacuum(&r), &BeamSplitter::new(0, 1, refl).unwrap())
                    .unwrap();
            assert!(close(&out, &FockState::vacuum(&r)));
        }
    }

    #[test]
    fn two_photons_on_one_port() {
        // frozen from the polynomial oracle in tests/properties.rs
        let r = reg(&["a", "b"]);
        let out = apply_beam_splitter(&ket(&r, &[2, 0]), &BeamSplitter::balanced(0, 1).unwrap())
            .unwrap();
        let expected = FockState::from_terms(
            &r,
            [
                (OccupationVector::new(vec![2, 0]), c(0.5, 0.0)),
                (OccupationVector::new(vec![1, 1]), c(0.0, FRAC_1_SQRT_2)),
                (OccupationVector::new(vec![0, 2]), c(-0.5, 0.0)),
            ],
        )
        .unwrap();
        assert!(close(&out, &expected), "{out}");
    }

    #[test]
    fn splitter_rejects_bad_specs() {
        assert!(matches!(BeamSplitter::new(0, 0, 0.5), Err(Error::SameMode(0))));
        assert!(matches!(
            BeamSplitter::new(0, 1, 1.5),
            Err(Error::InvalidReflectivity(_))
        ));
        let r = reg(&["a", "b"]);
        let bs = BeamSplitter::new(0, 5, 0.5).unwrap();
        assert!(matches!(
            apply_beam_splitter(&ket(&r, &[1, 0]), &bs),
            Err(Error::InvalidMode(5))
        ));
    }

    #[test]
    fn splitter_cap_overflow() {
        let r = Arc::new(ModeRegistry::new(["a", "b"]).unwrap().with_cap(2).unwrap());
        let bs = BeamSplitter::balanced(0, 1).unwrap();
        assert!(matches!(
            apply_beam_splitter(&ket(&r, &[2, 1]), &bs),
            Err(Error::CapExceeded { count: 3, .. })
        ));
        // |1,1⟩ → |2,0⟩,|0,2⟩ fits a cap of 2
        assert!(apply_beam_splitter(&ket(&r, &[1, 1]), &bs).is_ok());
    }

    #[test]
    fn phase_examples() {
        let r = reg(&["a"]);
        let out = apply_phase(&ket(&r, &[1]), &PhaseShift::new(0, PI).unwrap()).unwrap();
        assert!(close(&out, &ket(&r, &[1]).scale(c(-1.0, 0.0))));
        let out = apply_phase(&FockState::vacuum(&r), &PhaseShift::new(0, 1.234).unwrap()).unwrap();
        assert!(close(&out, &FockState::vacuum(&r)));
        let out = apply_phase(&ket(&r, &[2]), &PhaseShift::new(0, PI / 2.0).unwrap()).unwrap();
        assert!(close(&out, &ket(&r, &[2]).scale(c(-1.0, 0.0))));
        assert!(apply_phase(&ket(&r, &[1]), &PhaseShift { mode: 3, phi: 0.0 }).is_err());
        assert!(PhaseShift::new(0, f64::NAN).is_err());
    }

    #[test]
    fn permutations() {
        let r = reg(&["a", "b", "c"]);
        let st = ket(&r, &[2, 0, 1]);
        let id = ModePermutation::identity(3);
        assert_eq!(permute_modes(&st, &id).unwrap(), st);

        let swap = ModePermutation::from_pairs(3, &[(0, 2), (2, 0)]).unwrap();
        let once = permute_modes(&st, &swap).unwrap();
        assert_eq!(once, ket(&r, &[1, 0, 2]));
        assert_eq!(permute_modes(&once, &swap).unwrap(), st);
        assert_eq!(swap.inverse(), swap);

        assert!(ModePermutation::new(vec![0, 0, 1]).is_err());
        assert!(ModePermutation::from_pairs(3, &[(0, 1)]).is_err());
        assert!(permute_modes(&st, &ModePermutation::identity(2)).is_err());
    }

    #[test]
    fn pbs_routes_rails() {
        // path/polarization inputs routed onto H and V rails
        let r = reg(&["in1H", "in1V", "in2H", "in2V", "railH1", "railV1", "railH2", "railV2"]);
        let pbs =
            ModePermutation::from_pairs(8, &[(0, 4), (4, 0), (1, 5), (5, 1), (2, 6), (6, 2), (3, 7), (7, 3)])
                .unwrap();
        let hv = FockState::from_labels(&r, &[("in1H", 1), ("in2V", 1)]).unwrap();
        let routed = permute_modes(&hv, &pbs).unwrap();
        assert_eq!(
            routed,
            FockState::from_labels(&r, &[("railH1", 1), ("railV2", 1)]).unwrap()
        );
    }

    #[test]
    fn s11_closed_form_values() {
        let s = FRAC_1_SQRT_2;
        assert!(s11_closed_form(1).unwrap().norm() < TOL);
        assert!((s11_closed_form(0).unwrap() - c(0.0, -s)).norm() < TOL);
        assert!((s11_closed_form(2).unwrap() - c(0.0, -1.0 / (2.0 * 2f64.sqrt()))).norm() < TOL);
        assert!(matches!(
            s11_closed_form(-1),
            Err(Error::NegativePhotonNumber(-1))
        ));
    }

    #[test]
    fn s11_composite() {
        let r = reg(&["s", "anc"]);
        assert!(apply_s11(&ket(&r, &[1, 0]), 0, 1).unwrap().is_empty());

        let zero = apply_s11(&ket(&r, &[0, 0]), 0, 1).unwrap();
        assert_eq!(zero.len(), 1);
        let amp = zero.amplitude(&OccupationVector::new(vec![0, 0]));
        assert!((amp.norm() - FRAC_1_SQRT_2).abs() < TOL);

        let two = apply_s11(&ket(&r, &[2, 0]), 0, 1).unwrap();
        let amp = two.amplitude(&OccupationVector::new(vec![2, 0]));
        assert_eq!(two.len(), 1);
        assert!((amp.norm() - 1.0 / (2.0 * 2f64.sqrt())).abs() < TOL);

        assert!(matches!(
            apply_s11(&ket(&r, &[0, 1]), 0, 1),
            Err(Error::NonVacuumMode(_))
        ));
    }

    #[test]
    fn attenuator_examples() {
        let r = reg(&["m"]);
        let one = apply_vacuum_attenuator(&ket(&r, &[1]), 0, 0.75).unwrap();
        assert!(close(&one, &ket(&r, &[1]).scale(c(0.5, 0.0))));
        let vac = apply_vacuum_attenuator(&ket(&r, &[0]), 0, 0.3).unwrap();
        assert!(close(&vac, &ket(&r, &[0])));
        let two = apply_vacuum_attenuator(&ket(&r, &[2]), 0, 0.75).unwrap();
        assert!(close(&two, &ket(&r, &[2]).scale(c(0.25, 0.0))));
        let built = vacuum_attenuator_by_construction(&ket(&r, &[2]), 0, 0.75).unwrap();
        assert!(close(&two, &built));
        assert!(apply_vacuum_attenuator(&ket(&r, &[1]), 0, -0.1).is_err());
    }
}
