//! Dense eigendecomposition and PT diagnostics.

use std::cmp::Ordering;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::HamiltonianMatrix;

/// `|Im e| < REALITY_TOL * max(1, |e|)` classifies an eigenvalue as real.
pub const REALITY_TOL: f64 = 1e-9;

/// Largest phase-optimal PT residual of a state still counted as PT-symmetric.
pub const PT_STATE_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub energy: Complex64,
    /// Unit-norm, phase-fixed so that its largest-magnitude entry is real positive.
    pub vector: Vec<Complex64>,
    pub is_real: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Sorted by real part, ties broken by imaginary part.
    pub pairs: Vec<EigenPair>,
    pub n_real: usize,
    /// Every eigenvalue real and every eigenvector PT-symmetric.
    pub pt_unbroken: bool,
}

impl SpectrumReport {
    pub fn energies(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.energy).collect()
    }

    pub fn real_energies(&self) -> Vec<f64> {
        self.pairs.iter().filter(|p| p.is_real).map(|p| p.energy.re).collect()
    }
}

pub fn is_real_energy(e: Complex64) -> bool {
    e.im.abs() < REALITY_TOL * e.norm().max(1.0)
}

/// Complete eigendecomposition of `h`, classified and sorted.
pub fn eigenpairs(h: &HamiltonianMatrix) -> Result<SpectrumReport> {
    let n = h.dim();
    let evd = h.entries().eigen().map_err(|_| Error::EigenNonConvergence)?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let bound = 1e-9 * scale * n as f64;
    let mut pairs = Vec::with_capacity(n);
    for col in 0..n {
        let energy = values[col];
        if !(energy.re.is_finite() && energy.im.is_finite()) {
            return Err(Error::EigenNonConvergence);
        }
        let mut vector: Vec<Complex64> = (0..n).map(|row| vectors[(row, col)]).collect();
        normalize(&mut vector);
        fix_phase(&mut vector);
        let residual = eigen_residual(h, energy, &vector);
        if !(residual < bound) {
            return Err(Error::EigenResidual { residual, bound });
        }
        pairs.push(EigenPair { energy, vector, is_real: is_real_energy(energy) });
    }
    pairs.sort_by(|a, b| cmp_energy(a.energy, b.energy));

    let n_real = pairs.iter().filter(|p| p.is_real).count();
    let pt_unbroken = n_real == n && pairs.iter().all(|p| pt_symmetry_residual(&p.vector) < PT_STATE_TOL);
    Ok(SpectrumReport { pairs, n_real, pt_unbroken })
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues come out real and ascending.
pub fn hermitian_eigenpairs(h: &HamiltonianMatrix) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let evd = h.entries().self_adjoint_eigen(faer::Side::Lower).map_err(|_| Error::EigenNonConvergence)?;
    let values = evd.S().column_vector().iter().map(|e| e.re).collect();
    Ok((values, evd.U().to_owned()))
}

fn cmp_energy(a: Complex64, b: Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `||H psi - e psi||_2`.
pub fn eigen_residual(h: &HamiltonianMatrix, energy: Complex64, psi: &[Complex64]) -> f64 {
    let hp = h.apply(psi);
    hp.iter().zip(psi).map(|(a, b)| (a - energy * b).norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(psi: &mut [Complex64]) {
    let n = norm(psi);
    if n > 0.0 {
        psi.iter_mut().for_each(|z| *z /= n);
    }
}

/// Rotates `psi` so its largest-magnitude entry (first one on ties) is real positive.
pub fn fix_phase(psi: &mut [Complex64]) {
    let Some(pivot) = psi.iter().copied().reduce(|best, z| if z.norm() > best.norm() { z } else { best }) else {
        return;
    };
    if pivot.norm() == 0.0 {
        return;
    }
    let rot = pivot.conj() / pivot.norm();
    psi.iter_mut().for_each(|z| *z *= rot);
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Combined parity (site reversal) and time reversal (conjugation).
pub fn pt_apply(psi: &[Complex64]) -> Vec<Complex64> {
    psi.iter().rev().map(|z| z.conj()).collect()
}

/// `min_theta || PT psi - e^{i theta} psi ||_2`.
pub fn pt_symmetry_residual(psi: &[Complex64]) -> f64 {
    let image = pt_apply(psi);
    let overlap = inner(psi, &image);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    image.iter().zip(psi).map(|(p, q)| (p - phase * q).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_pt_chain, LatticeSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dimer(gamma: f64) -> HamiltonianMatrix {
        build_pt_chain(&LatticeSpec::uniform(2, 0, 1.0, gamma).unwrap()).unwrap()
    }

    #[test]
    fn hermitian_dimer() {
        let s = eigenpairs(&dimer(0.0)).unwrap();
        let e = s.energies();
        assert!((e[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((e[1] - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(s.n_real, 2);
        assert!(s.pt_unbroken);
    }

    #[test]
    fn unbroken_pt_dimer() {
        let s = eigenpairs(&dimer(0.6)).unwrap();
        let e = s.energies();
        assert!((e[0] - c(-0.8, 0.0)).norm() < 1e-12);
        assert!((e[1] - c(0.8, 0.0)).norm() < 1e-12);
        assert!(s.pt_unbroken);
    }

    #[test]
    fn broken_pt_dimer() {
        let s = eigenpairs(&dimer(1.25)).unwrap();
        let e = s.energies();
        assert!((e[0] - c(0.0, -0.75)).norm() < 1e-12, "{e:?}");
        assert!((e[1] - c(0.0, 0.75)).norm() < 1e-12, "{e:?}");
        assert_eq!(s.n_real, 0);
        assert!(!s.pt_unbroken);
    }

    #[test]
    fn vectors_are_unit_and_phase_fixed() {
        let s = eigenpairs(&dimer(0.6)).unwrap();
        for p in &s.pairs {
            assert!((norm(&p.vector) - 1.0).abs() < 1e-12);
            let big = p.vector.iter().copied().fold(c(0.0, 0.0), |b, z| if z.norm() > b.norm() { z } else { b });
            assert!(big.im.abs() < 1e-15 && big.re > 0.0);
        }
    }

    #[test]
    fn pt_apply_examples() {
        let s = 6f64.sqrt();
        let v = vec![c(1.0 / s, 0.0), c(2.0 / s, 0.0), c(1.0 / s, 0.0)];
        assert_eq!(pt_apply(&v), v);
        assert_eq!(pt_apply(&[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]), vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        assert!(pt_symmetry_residual(&v) < 1e-15);
    }

    #[test]
    fn phase_optimal_residual_ignores_global_phase() {
        let s = 6f64.sqrt();
        let rot = Complex64::from_polar(1.0, 0.83);
        let v: Vec<_> = [1.0, 2.0, 1.0].iter().map(|x| rot * x / s).collect();
        assert!(pt_symmetry_residual(&v) < 1e-15);
        let w = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!((pt_symmetry_residual(&w) - 2f64.sqrt()).abs() < 1e-15);
    }

    // Closed-form dimer eigenvectors: for [[ig,-1],[-1,-ig]] the vector
    // (1, -(e - ig)) with e = +-sqrt(1-g^2) solves the first row.
    fn dimer_vector(gamma: f64, energy: Complex64) -> Vec<Complex64> {
        let mut v = vec![c(1.0, 0.0), -(energy - c(0.0, gamma))];
        normalize(&mut v);
        v
    }

    #[test]
    fn dimer_state_symmetry() {
        let e = c((1.0f64 - 0.36).sqrt(), 0.0);
        assert!(pt_symmetry_residual(&dimer_vector(0.6, e)) < 1e-10);
        let e = c(0.0, 0.75);
        assert!(pt_symmetry_residual(&dimer_vector(1.25, e)) > 0.1);
        let s = eigenpairs(&dimer(1.25)).unwrap();
        assert!(s.pairs.iter().all(|p| pt_symmetry_residual(&p.vector) > 0.1));
    }
}
