//! Exact time evolution and the drain-versus-lead wave-packet experiment.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::correspondence::map_to_counterpart;
use crate::error::{Error, Result};
use crate::lattice::{HamiltonianMatrix, LatticeSpec, SiteLabel, SiteRole};
use crate::spectral::hermitian_eigenpairs;

/// Packet clearance from every boundary, in widths.
pub const TAIL_WIDTHS: f64 = 5.0;
const TAIL_MASS_TOL: f64 = 1e-10;
const HORIZON_MASS_TOL: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e12;

/// Gaussian-modulated plane wave `e^{i k0 j} exp(-(j - x0)^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    /// 1-based site of the envelope maximum.
    pub center: usize,
    pub momentum: f64,
    pub width: f64,
}

impl WavePacket {
    pub fn new(center: usize, momentum: f64, width: f64) -> Result<Self> {
        if !(momentum > 0.0 && momentum < std::f64::consts::PI) {
            return Err(Error::MomentumOutOfRange { k: momentum });
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidSpec(format!("packet width must be positive, got {width}")));
        }
        if center == 0 {
            return Err(Error::InvalidSpec("packet center is a 1-based site".into()));
        }
        Ok(Self { center, momentum, width })
    }

    /// Packet whose center sits `ceil(5 sigma) + 1` sites from the wall.
    pub fn with_clearance(momentum: f64, width: f64) -> Result<Self> {
        Self::new(clearance(width) + 1, momentum, width)
    }

    fn envelope(&self, site: i64) -> Complex64 {
        let x = (site - self.center as i64) as f64;
        Complex64::from_polar((-x * x / (2.0 * self.width * self.width)).exp(), self.momentum * x)
    }

    /// Probability the untruncated packet places outside sites `1..=sites`.
    pub fn tail_mass(&self, sites: usize) -> f64 {
        let reach = (40.0 * self.width).ceil() as i64 + 1;
        let c = self.center as i64;
        let range = (c - reach)..=(c + reach);
        let weight = |j: i64| self.envelope(j).norm_sqr();
        let total: f64 = range.clone().map(weight).sum();
        let outside: f64 = range.filter(|&j| j < 1 || j > sites as i64).map(weight).sum();
        outside / total
    }

    /// Unit-norm amplitudes on sites `1..=sites`, zero-padded to `len`.
    pub fn amplitudes(&self, sites: usize, len: usize) -> Result<Vec<Complex64>> {
        let tail_mass = self.tail_mass(sites);
        if !(tail_mass < TAIL_MASS_TOL) {
            return Err(Error::PacketTail { tail_mass });
        }
        let mut psi = vec![Complex64::new(0.0, 0.0); len.max(sites)];
        for (j, z) in psi.iter_mut().enumerate().take(sites) {
            *z = self.envelope(j as i64 + 1);
        }
        crate::spectral::normalize(&mut psi);
        Ok(psi)
    }
}

fn clearance(width: f64) -> usize {
    (TAIL_WIDTHS * width).ceil() as usize
}

/// Named groups of sites, resolved from site roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Explicit lead sites.
    Lead,
    /// Potential and sub-network sites.
    Device,
    /// Every site that is not a lead site.
    Common,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Lead, Region::Device, Region::Common];

    pub fn contains(&self, label: &SiteLabel) -> bool {
        match self {
            Region::Lead => label.role == SiteRole::Lead,
            Region::Device => matches!(label.role, SiteRole::Potential | SiteRole::SubNetwork),
            Region::Common => label.role != SiteRole::Lead,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Region::Lead => "lead",
            Region::Device => "device",
            Region::Common => "common",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// Total probability `||psi(t)||^2`.
    pub norms: Vec<f64>,
    pub region_masses: Vec<(Region, Vec<f64>)>,
}

impl EvolutionTrace {
    pub fn mass(&self, region: Region) -> &[f64] {
        self.region_masses.iter().find(|(r, _)| *r == region).map(|(_, m)| m.as_slice()).unwrap_or(&[])
    }
}

enum Modes {
    /// Unitary eigenvectors; the inverse is the adjoint.
    Hermitian {
        values: Vec<f64>,
        vectors: Mat<Complex64>,
    },
    General {
        values: Vec<Complex64>,
        vectors: Mat<Complex64>,
    },
}

/// `exp(-i H t)` through a dense eigendecomposition of `H`.
pub struct Propagator {
    modes: Modes,
    dim: usize,
}

impl Propagator {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self> {
        let dim = h.dim();
        if h.is_hermitian() {
            let (values, vectors) = hermitian_eigenpairs(h)?;
            return Ok(Self { modes: Modes::Hermitian { values, vectors }, dim });
        }
        let evd = h.entries().eigen().map_err(|_| Error::EigenNonConvergence)?;
        let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
        let vectors = evd.U().to_owned();
        let sv = vectors.singular_values().map_err(|_| Error::EigenNonConvergence)?;
        let smin = sv.last().copied().unwrap_or(0.0);
        let condition = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::ExceptionalPoint { condition });
        }
        Ok(Self { modes: Modes::General { values, vectors }, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn mode_coefficients(&self, psi0: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi0.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi0.len() });
        }
        let rhs = Mat::from_fn(self.dim, 1, |i, _| psi0[i]);
        let c = match &self.modes {
            Modes::Hermitian { vectors, .. } => vectors.adjoint() * &rhs,
            Modes::General { vectors, .. } => vectors.partial_piv_lu().solve(&rhs),
        };
        Ok((0..self.dim).map(|i| c[(i, 0)]).collect())
    }

    /// `exp(-i E_m t)` for mode `m`.
    fn phase(&self, m: usize, t: f64) -> Complex64 {
        match &self.modes {
            Modes::Hermitian { values, .. } => Complex64::from_polar(1.0, -values[m] * t),
            Modes::General { values, .. } => (Complex64::new(0.0, -t) * values[m]).exp(),
        }
    }

    fn vectors(&self) -> &Mat<Complex64> {
        match &self.modes {
            Modes::Hermitian { vectors, .. } | Modes::General { vectors, .. } => vectors,
        }
    }

    /// States `psi(t)` for every `t` in `times`.
    pub fn states(&self, psi0: &[Complex64], times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let coeffs = self.mode_coefficients(psi0)?;
        let n = self.dim;
        Ok(times
            .iter()
            .map(|&t| {
                let weights = Mat::from_fn(n, 1, |m, _| self.phase(m, t) * coeffs[m]);
                let psi = self.vectors() * &weights;
                (0..n).map(|i| psi[(i, 0)]).collect()
            })
            .collect())
    }
}

/// Evolves `psi0` under `h` and records probabilities at each time.
pub fn evolve(h: &HamiltonianMatrix, psi0: &[Complex64], times: &[f64]) -> Result<EvolutionTrace> {
    if times.is_empty() {
        return Err(Error::Empty("evolution times"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpec("evolution times must be finite and strictly increasing".into()));
    }
    let propagator = Propagator::new(h)?;
    let states = propagator.states(psi0, times)?;
    Ok(trace_from_states(h, times, &states))
}

fn trace_from_states(h: &HamiltonianMatrix, times: &[f64], states: &[Vec<Complex64>]) -> EvolutionTrace {
    let labels = h.site_labels();
    let norms = states.iter().map(|s| s.iter().map(|z| z.norm_sqr()).sum()).collect();
    let region_masses = Region::ALL
        .iter()
        .map(|region| {
            let masses = states
                .iter()
                .map(|s| s.iter().zip(labels).filter(|(_, l)| region.contains(l)).map(|(z, _)| z.norm_sqr()).sum())
                .collect();
            (*region, masses)
        })
        .collect();
    EvolutionTrace { times: times.to_vec(), norms, region_masses }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrainLeadOutcome {
    /// `1 - ||psi(T)||^2` with the imaginary drain.
    pub absorbed: f64,
    /// Probability inside the attached lead at `T`.
    pub transmitted: f64,
    pub discrepancy: f64,
    pub horizon: f64,
    pub lead_end_mass: f64,
    pub drain_sites: usize,
    pub lead_arm_sites: usize,
}

/// Layout shared by both arms: an incoming uniform chain on sites
/// `1..2 x0`, the potential site at `2 x0`, then the sub-network.
struct Layout {
    incoming: usize,
    potential: usize,
    device_end: usize,
    horizon: f64,
}

fn layout(spec: &LatticeSpec, packet: &WavePacket) -> Layout {
    let potential = 2 * packet.center;
    let velocity = 2.0 * spec.j * packet.momentum.sin();
    Layout {
        incoming: potential - 1,
        potential,
        device_end: potential + spec.ns(),
        horizon: potential as f64 / velocity,
    }
}

/// Smallest lead-arm site count satisfying `L_lead > 2 J T`.
pub fn minimal_lead_arm_sites(spec: &LatticeSpec, packet: &WavePacket) -> usize {
    let l = layout(spec, packet);
    l.device_end + (2.0 * spec.j * l.horizon).floor() as usize + 1
}

fn terminal_chain(
    spec: &LatticeSpec,
    l: &Layout,
    lead_sites: usize,
    onsite: Complex64,
    lead_bond: f64,
) -> HamiltonianMatrix {
    let dim = l.device_end + lead_sites;
    let labels: Vec<SiteLabel> = (1..=dim)
        .map(|site| SiteLabel {
            site,
            role: if site < l.potential {
                SiteRole::Segment
            } else if site == l.potential {
                SiteRole::Potential
            } else if site <= l.device_end {
                SiteRole::SubNetwork
            } else {
                SiteRole::Lead
            },
        })
        .collect();
    let mut m = Mat::<Complex64>::zeros(dim, dim);
    let mut hop = |a: usize, b: usize, amp: f64| {
        m[(a, b)] -= Complex64::new(amp, 0.0);
        m[(b, a)] -= Complex64::new(amp, 0.0);
    };
    for a in 0..l.potential - 1 {
        hop(a, a + 1, spec.j);
    }
    let p = l.potential - 1;
    let ns = spec.ns();
    if ns > 0 {
        hop(p, p + 1, spec.g);
    }
    if lead_sites > 0 {
        let first = l.device_end;
        hop(p, first, lead_bond);
        for a in first..dim - 1 {
            hop(a, a + 1, spec.j);
        }
    }
    for i in 0..ns {
        for jj in 0..ns {
            m[(p + 1 + i, p + 1 + jj)] += spec.sub.coupling(i, jj);
        }
    }
    m[(p, p)] += onsite;
    HamiltonianMatrix::new(m, labels).expect("layout is square and labelled")
}

/// Sends `packet` onto a `-i gamma` terminal site and, separately, onto
/// the same site carrying `V` and coupled by `nu` to a finite lead, with
/// `(nu, V)` mapped at the packet's central momentum. `l_total` is the
/// site count of the lead arm; only `spec.n` is unused.
pub fn drain_vs_lead_experiment(spec: &LatticeSpec, packet: &WavePacket, l_total: usize) -> Result<DrainLeadOutcome> {
    spec.validate()?;
    let l = layout(spec, packet);
    let lead_sites = l_total.saturating_sub(l.device_end);
    let needed = minimal_lead_arm_sites(spec, packet);
    if l_total < needed {
        return Err(Error::Horizon(format!(
            "lead arm has {l_total} sites, needs at least {needed} so that no wave returns before T = {}",
            l.horizon
        )));
    }
    let params = map_to_counterpart(packet.momentum, spec.gamma, spec.j)?;
    let psi0 = packet.amplitudes(l.incoming, l.device_end)?;

    let drain = terminal_chain(spec, &l, 0, Complex64::new(0.0, -spec.gamma), 0.0);
    let leaky = terminal_chain(spec, &l, lead_sites, Complex64::new(params.v, 0.0), params.nu);
    let mut psi_lead = psi0.clone();
    psi_lead.resize(leaky.dim(), Complex64::new(0.0, 0.0));

    let times = [l.horizon];
    let (a, b) = rayon::join(
        || evolve(&drain, &psi0, &times),
        || -> Result<_> { Propagator::new(&leaky)?.states(&psi_lead, &times) },
    );
    let drain_trace = a?;
    let lead_states = b?;
    let lead_trace = trace_from_states(&leaky, &times, &lead_states);

    let end_sites = packet.width.ceil() as usize;
    let lead_end_mass: f64 = lead_states[0].iter().rev().take(end_sites.min(lead_sites)).map(|z| z.norm_sqr()).sum();
    if !(lead_end_mass < HORIZON_MASS_TOL) {
        return Err(Error::Horizon(format!("mass {lead_end_mass:e} reached the far end of the lead")));
    }

    let absorbed = 1.0 - drain_trace.norms[0];
    let transmitted = lead_trace.mass(Region::Lead)[0];
    Ok(DrainLeadOutcome {
        absorbed,
        transmitted,
        discrepancy: (absorbed - transmitted).abs(),
        horizon: l.horizon,
        lead_end_mass,
        drain_sites: drain.dim(),
        lead_arm_sites: leaky.dim(),
    })
}
