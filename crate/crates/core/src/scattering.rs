//! Scattering of a lattice plane wave off a finite device.
//!
//! Semi-infinite uniform leads are eliminated exactly. A lead of hopping
//! `J` attached to device site `a` through a bond `lambda` contributes the
//! on-site self-energy `(lambda^2 / J^2) * (-J e^{ik})` at `a`.
//!
//! Phase convention: lead sites are numbered `j = -1, -2, ...` away from
//! the attach site, and the wave in the incident lead is
//! `e^{ikj} + r e^{-ikj}`. Continued to `j = 0` it equals
//! `lambda psi_a / J`, so `r = lambda psi_a / J - 1`. In an outgoing lead
//! the wave is `t e^{ikj}` with `j = 1, 2, ...` and `t = lambda psi_b / J`.
//! The incident wave enters the device equations as the source
//! `2 i lambda sin k` on the incident attach site.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::HamiltonianMatrix;

/// Relative smallest singular value below which a device system is singular.
const SINGULAR_TOL: f64 = 1e-13;
/// Denominators of the closed form smaller than this are poles.
const POLE_TOL: f64 = 1e-12;

/// Exact boundary term of a semi-infinite uniform chain at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadClosure {
    pub energy: f64,
    /// `arccos(-E / 2J)`, in `(0, pi)`.
    pub k: f64,
    /// Retarded surface self-energy `-J e^{ik}`.
    pub sigma: Complex64,
    /// `sqrt(4 J^2 - E^2) = 2 J sin k`.
    pub omega: f64,
}

pub fn lead_closure(energy: f64, j: f64) -> Result<LeadClosure> {
    if !(j > 0.0) {
        return Err(Error::InvalidSpec(format!("hopping J must be positive, got {j}")));
    }
    if !(energy.abs() < 2.0 * j) {
        return Err(Error::OutOfBand { energy, bandwidth_half: 2.0 * j });
    }
    let k = (-energy / (2.0 * j)).acos();
    Ok(LeadClosure {
        energy,
        k,
        sigma: -j * Complex64::from_polar(1.0, k),
        omega: (4.0 * j * j - energy * energy).sqrt(),
    })
}

impl LeadClosure {
    pub fn from_momentum(k: f64, j: f64) -> Result<Self> {
        check_momentum(k)?;
        if !(j > 0.0) {
            return Err(Error::InvalidSpec(format!("hopping J must be positive, got {j}")));
        }
        Ok(LeadClosure {
            energy: -2.0 * j * k.cos(),
            k,
            sigma: -j * Complex64::from_polar(1.0, k),
            omega: 2.0 * j * k.sin(),
        })
    }

    /// Self-energy of the same lead attached through a bond of strength `coupling`.
    pub fn attached(&self, coupling: f64, j: f64) -> Complex64 {
        self.sigma * (coupling * coupling / (j * j))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub r: Complex64,
    /// Present for geometries with an outgoing lead.
    pub t: Option<Complex64>,
    /// Device amplitudes; empty for closed-form results.
    pub psi_device: Vec<Complex64>,
    /// Kernel of the closed-form amplitude, when it applies.
    pub xi: Option<Complex64>,
}

impl ScatteringSolution {
    /// `|r|^2 + |t|^2`.
    pub fn flux(&self) -> f64 {
        self.r.norm_sqr() + self.t.map_or(0.0, |t| t.norm_sqr())
    }
}

fn check_momentum(k: f64) -> Result<()> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::MomentumOutOfRange { k });
    }
    Ok(())
}

struct Lead {
    site: usize,
    coupling: f64,
}

/// Solves `(E - H - sum Sigma) psi = source` with the wave incident from `leads[0]`.
fn solve_with_leads(device: &HamiltonianMatrix, leads: &[Lead], k: f64, j: f64) -> Result<Vec<Complex64>> {
    let closure = LeadClosure::from_momentum(k, j)?;
    let n = device.dim();
    for lead in leads {
        if lead.site >= n {
            return Err(Error::DimensionMismatch { expected: n, found: lead.site + 1 });
        }
        if !lead.coupling.is_finite() {
            return Err(Error::InvalidSpec("lead coupling must be finite".into()));
        }
    }
    let energy = Complex64::new(closure.energy, 0.0);
    let mut a = Mat::from_fn(n, n, |r, c| {
        let diag = if r == c { energy } else { Complex64::new(0.0, 0.0) };
        diag - device.get(r, c)
    });
    for lead in leads {
        a[(lead.site, lead.site)] -= closure.attached(lead.coupling, j);
    }

    let sv = a.singular_values().map_err(|_| Error::EigenNonConvergence)?;
    let ratio = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
    if !(ratio > SINGULAR_TOL) {
        return Err(Error::SingularScattering { ratio });
    }

    let mut b = Mat::<Complex64>::zeros(n, 1);
    b[(leads[0].site, 0)] = Complex64::new(0.0, 2.0 * leads[0].coupling * k.sin());
    let x = a.full_piv_lu().solve(&b);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Device closed by a single lead of hopping `J` at matrix index `attach_site`.
pub fn solve_one_lead(device: &HamiltonianMatrix, attach_site: usize, k: f64, j: f64) -> Result<ScatteringSolution> {
    let psi = solve_with_leads(device, &[Lead { site: attach_site, coupling: j }], k, j)?;
    Ok(ScatteringSolution { r: psi[attach_site] - 1.0, t: None, psi_device: psi, xi: None })
}

/// Device between an incident lead at `left_site` and an outgoing lead at
/// `right_site` (matrix indices, possibly equal), attached through bonds
/// `left_coupling` and `right_coupling`.
pub fn solve_two_lead(
    device: &HamiltonianMatrix,
    left_site: usize,
    right_site: usize,
    left_coupling: f64,
    right_coupling: f64,
    k: f64,
    j: f64,
) -> Result<ScatteringSolution> {
    let leads =
        [Lead { site: left_site, coupling: left_coupling }, Lead { site: right_site, coupling: right_coupling }];
    let psi = solve_with_leads(device, &leads, k, j)?;
    let r = left_coupling * psi[left_site] / j - 1.0;
    let t = right_coupling * psi[right_site] / j;
    Ok(ScatteringSolution { r, t: Some(t), psi_device: psi, xi: None })
}

fn checked_sin(x: f64, what: &str) -> Result<f64> {
    let s = x.sin();
    if s.abs() < POLE_TOL {
        return Err(Error::Pole(format!("sin[{what}] = {s:e}")));
    }
    Ok(s)
}

/// `xi = V/J + sin[kN]/sin[k(N-1)] - (nu^2/J^2) e^{ik} - sin[k Ns]/sin[k(Ns+1)]`.
pub fn xi(k: f64, n: usize, ns: usize, v: f64, nu: f64, j: f64) -> Result<Complex64> {
    check_momentum(k)?;
    let s_nm1 = checked_sin(k * (n as f64 - 1.0), "k(N-1)")?;
    let s_ns1 = checked_sin(k * (ns as f64 + 1.0), "k(Ns+1)")?;
    Ok(Complex64::new(v / j + (k * n as f64).sin() / s_nm1 - (k * ns as f64).sin() / s_ns1, 0.0)
        - (nu * nu / (j * j)) * Complex64::from_polar(1.0, k))
}

/// Reflection amplitude of the symmetric two-lead lattice in closed form:
/// a uniform chain of `N + 2 Ns` sites, potential `V` on sites `Ns + 1` and
/// `Ns + N`, each coupled by `nu` to its own semi-infinite lead.
///
/// `r = 2 i nu^2 xi sin k sin^2[k(N-1)] / (J^2 sin^2 k - J^2 xi^2 sin^2[k(N-1)]) - 1`
pub fn closed_form_r(k: f64, n: usize, ns: usize, v: f64, nu: f64, j: f64) -> Result<ScatteringSolution> {
    let x = xi(k, n, ns, v, nu, j)?;
    let sk = k.sin();
    let s = (k * (n as f64 - 1.0)).sin();
    let num = Complex64::new(0.0, 2.0 * nu * nu * sk * s * s) * x;
    let den = Complex64::new(j * j * sk * sk, 0.0) - j * j * x * x * s * s;
    if den.norm() < POLE_TOL * j * j {
        return Err(Error::Pole(format!("reflection denominator {den}")));
    }
    Ok(ScatteringSolution { r: num / den - 1.0, t: None, psi_device: Vec::new(), xi: Some(x) })
}

/// LHS - RHS of the zero-reflection condition
/// `2 i nu^2 xi sin k sin^2[k(N-1)] = J^2 sin^2 k - J^2 xi^2 sin^2[k(N-1)]`.
pub fn resonance_residual(k: f64, n: usize, ns: usize, v: f64, nu: f64, j: f64) -> Result<Complex64> {
    let x = xi(k, n, ns, v, nu, j)?;
    let sk = k.sin();
    let s = (k * (n as f64 - 1.0)).sin();
    let lhs = Complex64::new(0.0, 2.0 * nu * nu * sk * s * s) * x;
    let rhs = Complex64::new(j * j * sk * sk, 0.0) - j * j * x * x * s * s;
    Ok(lhs - rhs)
}
