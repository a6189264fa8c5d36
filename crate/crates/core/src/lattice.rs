//! Site-indexed single-particle Hamiltonians.
//!
//! Every builder returns a dense [`HamiltonianMatrix`] whose rows are
//! labelled by 1-based chain sites. Hopping enters with a minus sign
//! (`-J`, `-g`), on-site terms enter as written (`+i gamma`, `V`), and a
//! user-supplied sub-network block is copied verbatim.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-14;

/// Hermitian coupling block of an arbitrary finite sub-network, in energy units.
#[derive(Debug, Clone)]
pub struct SubNetwork {
    couplings: Mat<Complex64>,
}

impl SubNetwork {
    pub fn new(couplings: Mat<Complex64>) -> Result<Self> {
        if couplings.nrows() != couplings.ncols() {
            return Err(Error::InvalidSpec(format!(
                "sub-network block must be square, got {}x{}",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        let deviation = hermitian_deviation(&couplings);
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NonHermitianSubNetwork { deviation });
        }
        Ok(Self { couplings })
    }

    pub fn empty() -> Self {
        Self { couplings: Mat::zeros(0, 0) }
    }

    /// Open uniform chain of `size` sites with hopping `-hopping`.
    pub fn uniform_chain(size: usize, hopping: f64) -> Self {
        let couplings = Mat::from_fn(size, size, |i, j| {
            if i.abs_diff(j) == 1 {
                Complex64::new(-hopping, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self { couplings }
    }

    pub fn size(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn coupling(&self, i: usize, j: usize) -> Complex64 {
        self.couplings[(i, j)]
    }

    pub fn couplings(&self) -> &Mat<Complex64> {
        &self.couplings
    }

    fn is_uniform_chain(&self, hopping: f64) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let expected = if i.abs_diff(j) == 1 { -hopping } else { 0.0 };
                self.couplings[(i, j)] == Complex64::new(expected, 0.0)
            })
        })
    }
}

impl PartialEq for SubNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.size() == other.size()
            && (0..self.size()).all(|i| (0..self.size()).all(|j| self.couplings[(i, j)] == other.couplings[(i, j)]))
    }
}

/// Parameters of the finite PT chain and of the devices derived from it.
///
/// `gamma` is signed: a negative value turns every drain into a source,
/// which is how the time-reversed devices are built.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    /// Length of the segment between the two potential sites.
    pub n: usize,
    pub sub: SubNetwork,
    pub j: f64,
    pub gamma: f64,
    /// Hopping between a potential site and the first sub-network site.
    pub g: f64,
    /// Put the loss on the left potential site and the gain on the right.
    pub swap_gain_loss: bool,
}

impl LatticeSpec {
    pub fn new(n: usize, sub: SubNetwork, j: f64, gamma: f64, g: f64) -> Result<Self> {
        let spec = Self { n, sub, j, gamma, g, swap_gain_loss: false };
        spec.validate()?;
        Ok(spec)
    }

    /// The exactly solvable case: both sub-networks are uniform chains and
    /// the whole PT chain has hopping `j`.
    pub fn uniform(n: usize, ns: usize, j: f64, gamma: f64) -> Result<Self> {
        Self::new(n, SubNetwork::uniform_chain(ns, j), j, gamma, j)
    }

    pub fn with_swapped_gain_loss(mut self, swap: bool) -> Self {
        self.swap_gain_loss = swap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::InvalidSpec(format!("hopping J must be positive, got {}", self.j)));
        }
        if !self.gamma.is_finite() || !self.g.is_finite() {
            return Err(Error::InvalidSpec("gamma and g must be finite".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidSpec("segment length N must be positive".into()));
        }
        if self.chain_len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "PT chain needs at least 2 sites, N + 2 Ns = {}",
                self.chain_len()
            )));
        }
        Ok(())
    }

    pub fn ns(&self) -> usize {
        self.sub.size()
    }

    /// Site count `N + 2 Ns` of the PT chain.
    pub fn chain_len(&self) -> usize {
        self.n + 2 * self.ns()
    }

    /// 1-based label of the left potential site, `Ns + 1`.
    pub fn left_potential_site(&self) -> usize {
        self.ns() + 1
    }

    /// 1-based label of the right potential site, `Ns + N`.
    pub fn right_potential_site(&self) -> usize {
        self.ns() + self.n
    }

    /// 1-based labels of the (gain, loss) sites.
    pub fn gain_loss_sites(&self) -> (usize, usize) {
        if self.swap_gain_loss {
            (self.right_potential_site(), self.left_potential_site())
        } else {
            (self.left_potential_site(), self.right_potential_site())
        }
    }

    /// True when the spec is the uniform chain of hopping `J` end to end.
    pub fn is_uniform_chain(&self) -> bool {
        self.g == self.j && self.sub.is_uniform_chain(self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteRole {
    /// Site of the uniform segment joining the potentials (or of the incoming chain).
    Segment,
    /// Site carrying the imaginary or real on-site potential.
    Potential,
    SubNetwork,
    /// Site of an explicitly materialized lead.
    Lead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteLabel {
    /// 1-based position along the chain the matrix was built from.
    pub site: usize,
    pub role: SiteRole,
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    entries: Mat<Complex64>,
    site_labels: Vec<SiteLabel>,
}

impl HamiltonianMatrix {
    pub fn new(entries: Mat<Complex64>, site_labels: Vec<SiteLabel>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.nrows() != site_labels.len() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: site_labels.len() });
        }
        if entries.nrows() == 0 {
            return Err(Error::Empty("Hamiltonian with zero sites"));
        }
        Ok(Self { entries, site_labels })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn site_labels(&self) -> &[SiteLabel] {
        &self.site_labels
    }

    /// Matrix index of the given 1-based chain site.
    pub fn index_of(&self, site: usize) -> Option<usize> {
        self.site_labels.iter().position(|l| l.site == site)
    }

    pub fn indices_with_role(&self, role: SiteRole) -> Vec<usize> {
        self.site_labels.iter().enumerate().filter(|(_, l)| l.role == role).map(|(i, _)| i).collect()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.entries[(i, j)].norm());
            }
        }
        m
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.entries)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, &x) in psi.iter().enumerate().take(n) {
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.entries[(i, j)] * x;
            }
        }
        out
    }
}

pub(crate) fn hermitian_deviation(m: &Mat<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Which edge(s) of a device carry the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Both,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "both" => Ok(Side::Both),
            other => Err(Error::UnknownSide(other.to_string())),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Both => "both",
        })
    }
}

/// Accumulates a Hermitian-plus-diagonal matrix site by site.
struct Builder {
    entries: Mat<Complex64>,
    labels: Vec<SiteLabel>,
}

impl Builder {
    fn new(labels: Vec<SiteLabel>) -> Self {
        let n = labels.len();
        Self { entries: Mat::zeros(n, n), labels }
    }

    fn hop(&mut self, a: usize, b: usize, amplitude: f64) {
        self.entries[(a, b)] += Complex64::new(-amplitude, 0.0);
        self.entries[(b, a)] += Complex64::new(-amplitude, 0.0);
    }

    fn onsite(&mut self, a: usize, value: Complex64) {
        self.entries[(a, a)] += value;
    }

    /// Copies the sub-network block, sub site `i` landing on matrix index `place(i)`.
    fn sub_block(&mut self, sub: &SubNetwork, place: impl Fn(usize) -> usize, conjugate: bool) {
        let ns = sub.size();
        for i in 0..ns {
            for j in 0..ns {
                let c = sub.coupling(i, j);
                self.entries[(place(i), place(j))] += if conjugate { c.conj() } else { c };
            }
        }
    }

    fn finish(self) -> HamiltonianMatrix {
        HamiltonianMatrix { entries: self.entries, site_labels: self.labels }
    }
}

/// Lays out the full `N + 2 Ns` chain with the given on-site terms on the
/// two potential sites.
///
/// The right sub-network hangs off site `Ns + N` in its own orientation
/// (sub site `i` at chain site `Ns + N + i`); the left one is its parity
/// image (sub site `i` at chain site `Ns + 1 - i`) with conjugated
/// couplings, so that the layout commutes with PT whenever the on-site
/// terms are complex conjugates of each other.
fn full_chain(spec: &LatticeSpec, left: Complex64, right: Complex64) -> HamiltonianMatrix {
    let ns = spec.ns();
    let n = spec.n;
    let len = spec.chain_len();
    let labels = (1..=len)
        .map(|site| {
            let role = if site == ns + 1 || site == ns + n {
                SiteRole::Potential
            } else if site <= ns || site > ns + n {
                SiteRole::SubNetwork
            } else {
                SiteRole::Segment
            };
            SiteLabel { site, role }
        })
        .collect();
    let mut b = Builder::new(labels);

    for idx in ns..ns + n - 1 {
        b.hop(idx, idx + 1, spec.j);
    }
    if ns > 0 {
        b.sub_block(&spec.sub, |i| ns - 1 - i, true);
        b.sub_block(&spec.sub, |i| ns + n + i, false);
        b.hop(ns - 1, ns, spec.g);
        b.hop(ns + n - 1, ns + n, spec.g);
    }
    b.onsite(ns, left);
    b.onsite(ns + n - 1, right);
    b.finish()
}

/// Single potential site with the sub-network attached through `g`.
///
/// `Left` puts the potential on site 1 and the sub-network on sites
/// `2..=Ns+1` in its own orientation. `Right` is the parity image, laid out
/// exactly like the left end of the PT chain.
fn one_sided(spec: &LatticeSpec, side: Side, potential: Complex64) -> HamiltonianMatrix {
    let ns = spec.ns();
    let dim = ns + 1;
    let pot_idx = if side == Side::Left { 0 } else { ns };
    let labels = (1..=dim)
        .map(|site| SiteLabel {
            site,
            role: if site - 1 == pot_idx { SiteRole::Potential } else { SiteRole::SubNetwork },
        })
        .collect();
    let mut b = Builder::new(labels);
    if ns > 0 {
        match side {
            Side::Left => {
                b.sub_block(&spec.sub, |i| 1 + i, false);
                b.hop(0, 1, spec.g);
            }
            _ => {
                b.sub_block(&spec.sub, |i| ns - 1 - i, true);
                b.hop(ns - 1, ns, spec.g);
            }
        }
    }
    b.onsite(pot_idx, potential);
    b.finish()
}

/// The finite PT chain: `+i gamma` on site `Ns + 1`, `-i gamma` on site `Ns + N`
/// (reversed when `swap_gain_loss` is set).
pub fn build_pt_chain(spec: &LatticeSpec) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let gain = Complex64::new(0.0, spec.gamma);
    let (left, right) = if spec.swap_gain_loss { (gain.conj(), gain) } else { (gain, gain.conj()) };
    Ok(full_chain(spec, left, right))
}

/// Finite device carrying imaginary potentials.
///
/// One-sided devices carry the drain `-i gamma`; pass a negative `gamma`
/// for the time-reversed source. `Both` is the full chain geometry with the
/// drain on site `Ns + 1` and the source on site `Ns + N`.
pub fn build_device_with_drain(spec: &LatticeSpec, side: Side) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let drain = Complex64::new(0.0, -spec.gamma);
    Ok(match side {
        Side::Both => full_chain(spec, drain, drain.conj()),
        one => one_sided(spec, one, drain),
    })
}

/// Hermitian counterpart of [`build_device_with_drain`] with the real
/// on-site potential `v`. The attached leads are not part of the matrix.
pub fn build_hermitian_device(spec: &LatticeSpec, v: f64, side: Side) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    if !v.is_finite() {
        return Err(Error::InvalidSpec(format!("potential V must be finite, got {v}")));
    }
    let v = Complex64::new(v, 0.0);
    Ok(match side {
        Side::Both => full_chain(spec, v, v),
        one => one_sided(spec, one, v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense(h: &HamiltonianMatrix) -> Vec<Vec<Complex64>> {
        (0..h.dim()).map(|i| (0..h.dim()).map(|j| h.get(i, j)).collect()).collect()
    }

    #[test]
    fn uniform_dimer() {
        let h = build_pt_chain(&LatticeSpec::uniform(2, 0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(dense(&h), vec![vec![c(0., 0.), c(-1., 0.)], vec![c(-1., 0.), c(0., 0.)]]);
        assert!(h.is_hermitian());
    }

    #[test]
    fn pt_dimer_has_gain_then_loss() {
        let h = build_pt_chain(&LatticeSpec::uniform(2, 0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(dense(&h), vec![vec![c(0., 0.5), c(-1., 0.)], vec![c(-1., 0.), c(0., -0.5)]]);
    }

    #[test]
    fn potential_placement_with_subnetwork() {
        let h = build_pt_chain(&LatticeSpec::uniform(3, 1, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(h.dim(), 5);
        for i in 0..5 {
            let expected = match i {
                1 => c(0., 1.),
                3 => c(0., -1.),
                _ => c(0., 0.),
            };
            assert_eq!(h.get(i, i), expected, "diagonal {i}");
            for j in 0..5 {
                if i.abs_diff(j) == 1 {
                    assert_eq!(h.get(i, j), c(-1., 0.));
                } else if i != j {
                    assert_eq!(h.get(i, j), c(0., 0.));
                }
            }
        }
        assert_eq!(h.site_labels()[1].role, SiteRole::Potential);
        assert_eq!(h.site_labels()[0].role, SiteRole::SubNetwork);
        assert_eq!(h.site_labels()[2].role, SiteRole::Segment);
    }

    #[test]
    fn swap_flag_moves_gain_right() {
        let spec = LatticeSpec::uniform(3, 1, 1.0, 1.0).unwrap().with_swapped_gain_loss(true);
        let h = build_pt_chain(&spec).unwrap();
        assert_eq!(h.get(1, 1), c(0., -1.));
        assert_eq!(h.get(3, 3), c(0., 1.));
        assert_eq!(spec.gain_loss_sites(), (4, 2));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(LatticeSpec::uniform(1, 0, 1.0, 0.0), Err(Error::InvalidSpec(_))));
        assert!(matches!(LatticeSpec::uniform(2, 0, 0.0, 0.0), Err(Error::InvalidSpec(_))));
        assert!(matches!(LatticeSpec::uniform(2, 0, -1.0, 0.0), Err(Error::InvalidSpec(_))));
        assert!(LatticeSpec::uniform(1, 1, 1.0, 0.0).is_ok());
    }

    #[test]
    fn rejects_non_hermitian_subnetwork() {
        let mut k = Mat::<Complex64>::zeros(2, 2);
        k[(0, 1)] = c(0.0, 1.0);
        k[(1, 0)] = c(0.0, 1.0);
        assert!(matches!(SubNetwork::new(k), Err(Error::NonHermitianSubNetwork { .. })));
        assert!(SubNetwork::new(Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn bare_drain_site() {
        let spec = LatticeSpec::uniform(2, 0, 1.0, 0.3).unwrap();
        let h = build_device_with_drain(&spec, Side::Left).unwrap();
        assert_eq!(dense(&h), vec![vec![c(0., -0.3)]]);
    }

    #[test]
    fn drain_device_without_potential_is_a_dimer() {
        let sub = SubNetwork::new(Mat::zeros(1, 1)).unwrap();
        let spec = LatticeSpec::new(2, sub, 1.0, 0.0, 1.0).unwrap();
        let h = build_device_with_drain(&spec, Side::Left).unwrap();
        assert_eq!(dense(&h), vec![vec![c(0., 0.), c(-1., 0.)], vec![c(-1., 0.), c(0., 0.)]]);
    }

    #[test]
    fn two_sided_drain_device() {
        let spec = LatticeSpec::uniform(2, 2, 1.0, 0.4).unwrap();
        let h = build_device_with_drain(&spec, Side::Both).unwrap();
        assert_eq!(h.dim(), 6);
        for i in 0..6 {
            let expected = match i {
                2 => c(0., -0.4),
                3 => c(0., 0.4),
                _ => c(0., 0.),
            };
            assert_eq!(h.get(i, i), expected);
        }
    }

    #[test]
    fn right_device_mirrors_left_device() {
        let mut k = Mat::<Complex64>::zeros(2, 2);
        k[(0, 0)] = c(0.3, 0.);
        k[(0, 1)] = c(-0.7, 0.);
        k[(1, 0)] = c(-0.7, 0.);
        let spec = LatticeSpec::new(2, SubNetwork::new(k).unwrap(), 1.0, 0.2, 0.9).unwrap();
        let l = build_device_with_drain(&spec, Side::Left).unwrap();
        let r = build_device_with_drain(&spec, Side::Right).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.get(i, j), r.get(2 - i, 2 - j));
            }
        }
        assert_eq!(l.get(0, 1), c(-0.9, 0.));
        assert_eq!(l.get(1, 1), c(0.3, 0.));
    }

    #[test]
    fn hermitian_devices() {
        let spec = LatticeSpec::uniform(2, 0, 1.0, 0.0).unwrap();
        assert_eq!(dense(&build_hermitian_device(&spec, 0.7, Side::Left).unwrap()), vec![vec![c(0.7, 0.)]]);

        let spec = LatticeSpec::uniform(3, 0, 1.0, 0.0).unwrap();
        let h = build_hermitian_device(&spec, 0.0, Side::Both).unwrap();
        let open = build_pt_chain(&spec).unwrap();
        assert_eq!(dense(&h), dense(&open));

        let spec = LatticeSpec::uniform(2, 1, 1.0, 0.0).unwrap();
        let h = build_hermitian_device(&spec, -0.25, Side::Both).unwrap();
        assert_eq!(h.dim(), 4);
        let diag: Vec<_> = (0..4).map(|i| h.get(i, i).re).collect();
        assert_eq!(diag, vec![0.0, -0.25, -0.25, 0.0]);
        assert!(h.is_hermitian());
    }

    #[test]
    fn side_parsing() {
        assert_eq!("Both".parse::<Side>().unwrap(), Side::Both);
        assert!(matches!("middle".parse::<Side>(), Err(Error::UnknownSide(_))));
    }

    #[test]
    fn pt_conjugation_symmetry_with_general_subnetwork() {
        let mut k = Mat::<Complex64>::zeros(3, 3);
        k[(0, 1)] = c(0.2, 0.5);
        k[(1, 0)] = c(0.2, -0.5);
        k[(1, 2)] = c(-0.9, 0.1);
        k[(2, 1)] = c(-0.9, -0.1);
        k[(2, 2)] = c(0.4, 0.0);
        let spec = LatticeSpec::new(4, SubNetwork::new(k).unwrap(), 1.0, 0.7, 0.6).unwrap();
        let h = build_pt_chain(&spec).unwrap();
        let n = h.dim();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(h.get(n - 1 - i, n - 1 - j).conj(), h.get(i, j));
            }
        }
    }
}
