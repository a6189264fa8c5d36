//! Map from the PT chain to its Hermitian counterpart and the
//! state-by-state check that a real-energy eigenstate is a
//! zero-reflection scattering state of that counterpart.
//!
//! At momentum `k` an on-site `-i gamma` acts on a wave like a real
//! potential `V` plus an outgoing lead attached through `nu`, provided
//! `nu^2 sin k = gamma J` and `nu^2 cos k = V J`. The gain site maps onto
//! the incident lead and the loss site onto the outgoing one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bethe::{eigenfunction_from_root, find_real_roots, BetheRoot};
use crate::error::{Error, Result};
use crate::lattice::{build_hermitian_device, LatticeSpec, Side};
use crate::scattering::{solve_two_lead, LeadClosure};
use crate::spectral::{inner, norm};

/// Relative tolerance on the two forms of the mapping.
const MAP_TOL: f64 = 1e-12;
/// Alignment residual beyond which the correspondence is declared broken.
pub const ALIGN_FAILURE: f64 = 1e-6;
/// Amplitude on both potential sites below which a state is decoupled from them.
const NODE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterpartParams {
    pub nu: f64,
    pub v: f64,
    pub k: f64,
    pub gamma: f64,
    pub j: f64,
    pub energy: f64,
    /// `sqrt(4 J^2 - E^2)`.
    pub omega: f64,
}

/// Real potential and lead coupling replacing `-i gamma` at momentum `k`:
/// `nu = sqrt(2 gamma J^2 / Omega)`, `V = -gamma E / Omega`.
///
/// `nu` is taken non-negative; its sign is a gauge choice on the lead.
pub fn map_to_counterpart(k: f64, gamma: f64, j: f64) -> Result<CounterpartParams> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::MomentumOutOfRange { k });
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidSpec(format!("gamma must be non-negative, got {gamma}")));
    }
    let closure = LeadClosure::from_momentum(k, j)?;
    let omega = closure.omega;
    if !(omega > 0.0) || (omega / (2.0 * j)) < 1e-12 {
        return Err(Error::OutOfBand { energy: closure.energy, bandwidth_half: 2.0 * j });
    }
    let energy = closure.energy;
    let nu = (2.0 * gamma * j * j / omega).sqrt();
    let v = -gamma * energy / omega;

    let scale = gamma * j;
    let sin_form = nu * nu * k.sin() - gamma * j;
    let cos_form = nu * nu * k.cos() - v * j;
    if sin_form.abs() > MAP_TOL * scale.max(f64::MIN_POSITIVE)
        || cos_form.abs() > MAP_TOL * scale.max(f64::MIN_POSITIVE)
    {
        return Err(Error::InvalidSpec(format!(
            "counterpart mapping inconsistent at k = {k}: defects {sin_form:e}, {cos_form:e}"
        )));
    }
    Ok(CounterpartParams { nu, v, k, gamma, j, energy, omega })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrespondenceKind {
    /// Generic case: a zero-reflection state of the two-lead counterpart.
    ResonantTransmission,
    /// `gamma = 0`: the counterpart has detached leads and the chain is Hermitian.
    DetachedLeads,
    /// The state has nodes on both potential sites, so it never sees the
    /// potentials or the leads; it is a bound state in the continuum of the
    /// counterpart and the incident-wave problem is singular at its energy.
    BoundInContinuum,
}

impl CorrespondenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorrespondenceKind::ResonantTransmission => "resonant",
            CorrespondenceKind::DetachedLeads => "detached",
            CorrespondenceKind::BoundInContinuum => "bound_in_continuum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceReport {
    pub root: BetheRoot,
    pub params: CounterpartParams,
    pub kind: CorrespondenceKind,
    /// `|r|`; `None` unless `kind` is `ResonantTransmission`.
    pub r_abs: Option<f64>,
    pub t_abs: Option<f64>,
    /// `min_c ||psi_PT - c psi_scatter||` on the common region for resonant
    /// states; for the other kinds, the residual of `psi_PT` as a stationary
    /// state of the counterpart device with zero lead amplitude.
    pub align_residual: f64,
    pub scalar: Complex64,
}

impl CorrespondenceReport {
    /// Whether the report satisfies the correspondence at `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        let amplitudes = match (self.r_abs, self.t_abs) {
            (Some(r), Some(t)) => r < tol && (t - 1.0).abs() < tol,
            _ => self.kind != CorrespondenceKind::ResonantTransmission,
        };
        amplitudes && self.align_residual < tol
    }
}

/// Checks one real Bethe root of a uniform PT chain against the scattering
/// state of its Hermitian counterpart.
pub fn verify_root(spec: &LatticeSpec, root: &BetheRoot) -> Result<CorrespondenceReport> {
    let (_, psi_pt) = eigenfunction_from_root(root, spec)?;
    let gamma = spec.gamma.abs();
    let params = if gamma == 0.0 {
        let closure = LeadClosure::from_momentum(root.k, spec.j)?;
        CounterpartParams {
            nu: 0.0,
            v: 0.0,
            k: root.k,
            gamma: 0.0,
            j: spec.j,
            energy: closure.energy,
            omega: closure.omega,
        }
    } else {
        map_to_counterpart(root.k, gamma, spec.j)?
    };
    let device = build_hermitian_device(spec, params.v, Side::Both)?;
    let (gain_site, loss_site) = spec.gain_loss_sites();
    let gain_idx = gain_site - 1;
    let loss_idx = loss_site - 1;

    let decoupled = psi_pt[gain_idx].norm() < NODE_TOL && psi_pt[loss_idx].norm() < NODE_TOL;
    if gamma == 0.0 || decoupled {
        // psi_PT vanishes wherever the leads act, so it must solve the
        // closed counterpart device at the root energy by itself.
        let e = Complex64::new(params.energy, 0.0);
        let residual =
            device.apply(&psi_pt).iter().zip(&psi_pt).map(|(hp, p)| (hp - e * p).norm_sqr()).sum::<f64>().sqrt();
        let lead_leak = (params.nu / spec.j) * (psi_pt[gain_idx].norm() + psi_pt[loss_idx].norm());
        let kind = if gamma == 0.0 { CorrespondenceKind::DetachedLeads } else { CorrespondenceKind::BoundInContinuum };
        return Ok(CorrespondenceReport {
            root: *root,
            params,
            kind,
            r_abs: None,
            t_abs: None,
            align_residual: residual + lead_leak,
            scalar: Complex64::new(1.0, 0.0),
        });
    }

    let sol = solve_two_lead(&device, gain_idx, loss_idx, params.nu, params.nu, root.k, spec.j)?;
    let psi_s = &sol.psi_device;
    let scalar = inner(psi_s, &psi_pt) / inner(psi_s, psi_s);
    let diff: Vec<Complex64> = psi_pt.iter().zip(psi_s).map(|(a, b)| a - scalar * b).collect();
    let align_residual = norm(&diff);
    if !(align_residual < ALIGN_FAILURE) {
        return Err(Error::CorrespondenceFailure { k: root.k, align_residual });
    }
    Ok(CorrespondenceReport {
        root: *root,
        params,
        kind: CorrespondenceKind::ResonantTransmission,
        r_abs: Some(sol.r.norm()),
        t_abs: sol.t.map(|t| t.norm()),
        align_residual,
        scalar,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub spec_index: usize,
    /// Root momentum, when the failure belongs to one root.
    pub k: Option<f64>,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepItem {
    pub spec_index: usize,
    pub report: CorrespondenceReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    /// Reports in grid order, roots ascending within each spec.
    pub items: Vec<SweepItem>,
    pub failures: Vec<SweepFailure>,
    /// Number of real roots per grid entry.
    pub roots_per_spec: Vec<usize>,
}

impl SweepOutcome {
    pub fn reports(&self) -> impl Iterator<Item = &CorrespondenceReport> {
        self.items.iter().map(|i| &i.report)
    }

    /// Grid entries without any real-energy state (fully broken PT phase).
    pub fn specs_without_roots(&self) -> Vec<usize> {
        self.roots_per_spec.iter().enumerate().filter(|(_, &n)| n == 0).map(|(i, _)| i).collect()
    }
}

/// [`verify_root`] over every real root of every spec. Per-item failures are
/// collected instead of aborting the sweep.
pub fn sweep(grid: &[LatticeSpec]) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::Empty("correspondence sweep grid"));
    }
    let per_spec: Vec<(Vec<SweepItem>, Vec<SweepFailure>, usize)> = grid
        .par_iter()
        .enumerate()
        .map(|(spec_index, spec)| {
            let roots = match find_real_roots(spec) {
                Ok(r) => r,
                Err(error) => return (Vec::new(), vec![SweepFailure { spec_index, k: None, error }], 0),
            };
            let mut items = Vec::new();
            let mut failures = Vec::new();
            for root in &roots {
                match verify_root(spec, root) {
                    Ok(report) => items.push(SweepItem { spec_index, report }),
                    Err(error) => failures.push(SweepFailure { spec_index, k: Some(root.k), error }),
                }
            }
            (items, failures, roots.len())
        })
        .collect();

    let mut outcome = SweepOutcome::default();
    for (items, failures, count) in per_spec {
        outcome.items.extend(items);
        outcome.failures.extend(failures);
        outcome.roots_per_spec.push(count);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::closed_form_r;

    #[test]
    fn band_center_mapping() {
        let p = map_to_counterpart(PI / 2.0, 0.5, 1.0).unwrap();
        assert!(p.energy.abs() < 1e-15);
        assert!((p.omega - 2.0).abs() < 1e-15);
        assert!((p.nu - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(p.v.abs() < 1e-15);
    }

    #[test]
    fn third_band_mapping() {
        let p = map_to_counterpart(PI / 3.0, 1.0, 1.0).unwrap();
        let r3 = 3f64.sqrt();
        assert!((p.energy + 1.0).abs() < 1e-14);
        assert!((p.omega - r3).abs() < 1e-14);
        assert!((p.nu * p.nu - 2.0 / r3).abs() < 1e-14);
        assert!((p.v - 1.0 / r3).abs() < 1e-14);
        assert!((p.nu * p.nu * (PI / 3.0).sin() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_limit_mapping() {
        let p = map_to_counterpart(1.2, 0.0, 1.0).unwrap();
        assert_eq!((p.nu, p.v), (0.0, 0.0));
    }

    #[test]
    fn mapping_rejects_band_edges() {
        assert!(map_to_counterpart(0.0, 0.5, 1.0).is_err());
        assert!(map_to_counterpart(PI, 0.5, 1.0).is_err());
        assert!(map_to_counterpart(1e-14, 0.5, 1.0).is_err());
        assert!(map_to_counterpart(1.0, -0.5, 1.0).is_err());
    }

    #[test]
    fn dimer_state_is_resonant() {
        let spec = LatticeSpec::uniform(2, 0, 1.0, 0.6).unwrap();
        let root = find_real_roots(&spec).unwrap()[0];
        let rep = verify_root(&spec, &root).unwrap();
        assert_eq!(rep.kind, CorrespondenceKind::ResonantTransmission);
        assert!(rep.r_abs.unwrap() < 1e-8);
        assert!((rep.t_abs.unwrap() - 1.0).abs() < 1e-8);
        assert!(rep.align_residual < 1e-8);
    }

    #[test]
    fn all_states_of_a_longer_chain() {
        let spec = LatticeSpec::uniform(5, 2, 1.0, 1.2).unwrap();
        let roots = find_real_roots(&spec).unwrap();
        assert!(roots.len() >= 4, "{}", roots.len());
        for root in &roots {
            let rep = verify_root(&spec, root).unwrap();
            assert!(rep.holds(1e-8), "{rep:?}");
            // k = pi/4 sits on a removable pole of the closed form
            if let Ok(closed) = closed_form_r(root.k, 5, 2, rep.params.v, rep.params.nu, 1.0) {
                assert!((closed.r.norm() - rep.r_abs.unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hermitian_chain_is_vacuous() {
        let spec = LatticeSpec::uniform(3, 1, 1.0, 0.0).unwrap();
        for root in find_real_roots(&spec).unwrap() {
            let rep = verify_root(&spec, &root).unwrap();
            assert_eq!(rep.kind, CorrespondenceKind::DetachedLeads);
            assert!(rep.r_abs.is_none());
            assert!(rep.holds(1e-8));
        }
    }

    #[test]
    fn nodal_state_is_bound_in_continuum() {
        let spec = LatticeSpec::uniform(3, 1, 1.0, 0.5).unwrap();
        let roots = find_real_roots(&spec).unwrap();
        let mid = roots.iter().find(|r| (r.k - PI / 2.0).abs() < 1e-9).expect("k = pi/2 root");
        let rep = verify_root(&spec, mid).unwrap();
        assert_eq!(rep.kind, CorrespondenceKind::BoundInContinuum);
        assert!(rep.align_residual < 1e-8);
    }

    #[test]
    fn gain_on_the_right_uses_right_incidence() {
        let spec = LatticeSpec::uniform(4, 1, 1.0, 0.4).unwrap().with_swapped_gain_loss(true);
        for root in find_real_roots(&spec).unwrap() {
            assert!(verify_root(&spec, &root).unwrap().holds(1e-8));
        }
    }

    #[test]
    fn sweep_keeps_grid_order() {
        let grid = vec![
            LatticeSpec::uniform(3, 0, 1.0, 0.5).unwrap(),
            LatticeSpec::uniform(2, 0, 1.0, 1.5).unwrap(),
            LatticeSpec::uniform(2, 1, 1.0, 0.2).unwrap(),
        ];
        let out = sweep(&grid).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.specs_without_roots(), vec![1]);
        let idx: Vec<usize> = out.items.iter().map(|i| i.spec_index).collect();
        let mut sorted = idx.clone();
        sorted.sort();
        assert_eq!(idx, sorted);
        assert_eq!(out.items.len(), out.roots_per_spec.iter().sum::<usize>());
        assert!(matches!(sweep(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn sweep_records_failures_without_aborting() {
        let general = LatticeSpec::new(3, crate::lattice::SubNetwork::uniform_chain(2, 0.3), 1.0, 0.4, 1.0).unwrap();
        let grid = vec![general, LatticeSpec::uniform(2, 0, 1.0, 0.6).unwrap()];
        let out = sweep(&grid).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].spec_index, 0);
        assert_eq!(out.items.len(), 2);
    }
}
