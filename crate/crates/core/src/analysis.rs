//! Two-qubit polarization density matrices, concurrence and fidelity.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::detection::Ensemble;
use crate::error::{Error, Result};
use crate::polarization::{pair_occupation, PathModes};

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-10;
const TRACE_TOLERANCE: f64 = 1e-9;
const EIGEN_EPS: f64 = 1e-13;
const EIGEN_MAX_ITER: usize = 10_000;
// Eigenvalues of a unit-trace ρ below this are treated as rounding noise.
const RANK_FLOOR: f64 = 1e-13;

/// Density matrix over (HH, HV, VH, VV). May be sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    matrix: Matrix4<Complex64>,
}

fn hermitian_eigenvalues(m: &Matrix4<Complex64>) -> Result<SymmetricEigen<Complex64, nalgebra::U4>> {
    SymmetricEigen::try_new(*m, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::NoConvergence)
}

impl TwoQubitDensity {
    pub fn new(matrix: Matrix4<Complex64>) -> Result<Self> {
        let dev = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "density matrix is not Hermitian (deviation {dev:e})"
            )));
        }
        let rho = Self { matrix };
        let min = rho.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidInput(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        let tr = rho.trace();
        if !(0.0..=1.0 + TRACE_TOLERANCE).contains(&tr) {
            return Err(Error::InvalidInput(format!("trace {tr} outside [0, 1]")));
        }
        Ok(rho)
    }

    /// `|v⟩⟨v|` for an amplitude vector in basis order.
    pub fn from_pure(v: &[Complex64; 4]) -> Self {
        let col = Vector4::from_column_slice(v);
        Self {
            matrix: col * col.adjoint(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidInput("cannot normalize a zero density matrix".into()));
        }
        Ok(Self {
            matrix: self.matrix.unscale(tr),
        })
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        let eig = hermitian_eigenvalues(&self.matrix)?;
        let mut ev: [f64; 4] = std::array::from_fn(|i| eig.eigenvalues[i]);
        ev.sort_by(|a, b| b.total_cmp(a));
        Ok(ev)
    }

    /// `(U_a ⊗ U_b) ρ (U_a ⊗ U_b)†` for single-qubit unitaries on each path.
    pub fn rotate_locally(&self, ua: &[[Complex64; 2]; 2], ub: &[[Complex64; 2]; 2]) -> Self {
        let u = Matrix4::from_fn(|r, c| ua[r / 2][c / 2] * ub[r % 2][c % 2]);
        Self {
            matrix: u * self.matrix * u.adjoint(),
        }
    }

    fn check_normalized(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            Err(Error::Unnormalized(tr))
        } else {
            Ok(())
        }
    }
}

/// Polarization content of an ensemble on one pair of paths.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub density: TwoQubitDensity,
    /// Weight of branch components outside the one-photon-per-path subspace.
    pub leakage: f64,
}

/// Sums `weight · |v⟩⟨v|` over branches, where `v` holds each branch's
/// amplitudes on the four one-photon-per-path configurations (all other modes
/// empty). Whatever lies outside that subspace is reported as leakage.
pub fn reduce_to_polarization(ensemble: &Ensemble, pair: (PathModes, PathModes)) -> Result<Reduction> {
    let reg = ensemble.registry();
    let basis = (0..4)
        .map(|k| pair_occupation(reg, pair.0, pair.1, k))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = Matrix4::<Complex64>::zeros();
    let mut leakage = 0.0;
    for b in ensemble.branches() {
        let v = Vector4::from_fn(|k, _| b.state.amplitude(&basis[k]));
        let inside = v.norm_squared();
        matrix += (v * v.adjoint()).scale(b.weight);
        leakage += b.weight * (b.state.norm_sqr() - inside).max(0.0);
    }
    Ok(Reduction {
        density: TwoQubitDensity { matrix },
        leakage,
    })
}

/// Wootters concurrence of a normalized two-qubit state.
pub fn concurrence(rho: &TwoQubitDensity) -> Result<f64> {
    rho.check_normalized()?;
    // σy ⊗ σy in (HH, HV, VH, VV) order
    let mut flip = Matrix4::<Complex64>::zeros();
    flip[(0, 3)] = Complex64::new(-1.0, 0.0);
    flip[(1, 2)] = Complex64::new(1.0, 0.0);
    flip[(2, 1)] = Complex64::new(1.0, 0.0);
    flip[(3, 0)] = Complex64::new(-1.0, 0.0);

    // With ρ = W W†, the λ are the singular values of Wᵀ·flip·W. Working with
    // W avoids square roots of eigenvalues that are zero up to rounding.
    let eig = hermitian_eigenvalues(&rho.matrix)?;
    let mut w = eig.eigenvectors;
    for k in 0..4 {
        let p = eig.eigenvalues[k];
        let scale = if p > RANK_FLOOR { p.sqrt() } else { 0.0 };
        w.column_mut(k).scale_mut(scale);
    }
    let tau = w.transpose() * flip * w;
    let svd = tau
        .try_svd(false, false, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let mut lambdas: Vec<f64> = svd.singular_values.iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// `⟨target|ρ|target⟩` for a normalized density matrix and unit target.
pub fn fidelity_to_pure(rho: &TwoQubitDensity, target: &[Complex64; 4]) -> Result<f64> {
    rho.check_normalized()?;
    let t = Vector4::from_column_slice(target);
    let n = t.norm_squared();
    if (n - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::Unnormalized(n));
    }
    let f = (t.adjoint() * rho.matrix * t)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::Branch;
    use crate::fock::{FockState, ModeRegistry};
    use std::f64::consts::FRAC_1_SQRT_2;
    use std::sync::Arc;

    const TOL: f64 = 1e-9;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> [Complex64; 4] {
        [c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&TwoQubitDensity::from_pure(&bell())).unwrap() - 1.0).abs() < TOL);
        let hv = [c(0.0), c(1.0), c(0.0), c(0.0)];
        assert!(concurrence(&TwoQubitDensity::from_pure(&hv)).unwrap().abs() < TOL);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(0.5);
        m[(3, 3)] = c(0.5);
        let mix = TwoQubitDensity::new(m).unwrap();
        assert!(concurrence(&mix).unwrap().abs() < TOL);
    }

    #[test]
    fn concurrence_needs_unit_trace() {
        let half = TwoQubitDensity::from_pure(&[c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(0.0)]);
        assert!(matches!(concurrence(&half), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn fidelity_examples() {
        let t = bell();
        let rho = TwoQubitDensity::from_pure(&t);
        assert!((fidelity_to_pure(&rho, &t).unwrap() - 1.0).abs() < TOL);
        let orth = [c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(-FRAC_1_SQRT_2)];
        let rho_orth = TwoQubitDensity::from_pure(&orth);
        assert!(fidelity_to_pure(&rho_orth, &t).unwrap().abs() < TOL);
        let mix = TwoQubitDensity::new(rho.matrix().scale(0.7) + rho_orth.matrix().scale(0.3)).unwrap();
        assert!((fidelity_to_pure(&mix, &t).unwrap() - 0.7).abs() < TOL);
        assert!(fidelity_to_pure(&rho, &[c(1.0), c(1.0), c(0.0), c(0.0)]).is_err());
    }

    #[test]
    fn density_validation() {
        let mut m = Matrix4::zeros();
        m[(0, 1)] = c(0.5);
        assert!(TwoQubitDensity::new(m).is_err());
        let mut neg = Matrix4::zeros();
        neg[(0, 0)] = c(-0.5);
        assert!(TwoQubitDensity::new(neg).is_err());
    }

    #[test]
    fn reduction_with_leakage() {
        let reg = Arc::new(ModeRegistry::new(["aH", "aV", "bH", "bV"]).unwrap());
        let a = PathModes::new(0, 1);
        let b = PathModes::new(2, 3);
        let pair = crate::polarization::polarization_state(
            &reg,
            &[a, b],
            &[("HH", c(FRAC_1_SQRT_2)), ("VV", c(FRAC_1_SQRT_2))],
        )
        .unwrap();
        let single = FockState::from_labels(&reg, &[("aV", 1)]).unwrap();
        let ens = Ensemble::from_branches(
            &reg,
            vec![
                Branch { weight: 0.6, state: pair },
                Branch { weight: 0.3, state: single },
            ],
        )
        .unwrap();
        let red = reduce_to_polarization(&ens, (a, b)).unwrap();
        assert!((red.leakage - 0.3).abs() < 1e-12);
        assert!((red.density.trace() - 0.6).abs() < 1e-12);
        assert!((red.density.trace() + red.leakage - ens.acceptance_probability()).abs() < 1e-12);
        let norm = red.density.normalized().unwrap();
        assert!((concurrence(&norm).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn pure_bell_branch_is_rank_one() {
        let rho = TwoQubitDensity::from_pure(&bell());
        let ev = rho.eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < TOL);
        assert!(ev[1..].iter().all(|e| e.abs() < TOL));
    }
}
