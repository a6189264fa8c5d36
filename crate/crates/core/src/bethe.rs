//! Real-momentum plane-wave solution of the uniform PT chain.
//!
//! With both sub-networks uniform, every eigenstate is piecewise a pair of
//! counter-propagating plane waves: `C_L, D_L` on sites `1..=Ns+1`, `A, B`
//! on `Ns+1..=Ns+N` and `C_R, D_R` on `Ns+N..=N+2Ns`, all sharing one
//! quasi-momentum `k` with energy `-2J cos k`. Matching the pieces on the
//! potential sites quantizes `k`:
//!
//! ```text
//! gamma^2 sin^2[k(Ns+1)] sin[k(1-N)] = J^2 sin^2(k) sin[k(N+2Ns+1)]
//! ```
//!
//! Only real roots are searched for here; complex-momentum states show up
//! as complex eigenvalues in the dense spectrum.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::spectral::{fix_phase, norm};

/// Roots closer than this are merged.
const DEDUP_TOL: f64 = 1e-9;
/// Scan window `(EDGE, pi - EDGE)`.
const EDGE: f64 = 1e-6;
/// Bisection stops once the bracket is narrower than this.
const BRACKET_TOL: f64 = 1e-13;
/// A touching (sign-preserving) root is accepted only below this residual.
const DOUBLE_ROOT_TOL: f64 = 1e-12;
/// Singular values below this fraction of the largest count as null directions.
const NULL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetheRoot {
    pub k: f64,
    pub energy: f64,
    /// `sin[k(Ns+1)] / sin k`, evaluated in exponential form.
    pub chi: Complex64,
    /// `|LHS - RHS|` of the quantization condition at `k`.
    pub residual: f64,
}

/// Amplitudes of the three-region plane-wave ansatz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveCoeffs {
    pub a: Complex64,
    pub b: Complex64,
    pub c_l: Complex64,
    pub d_l: Complex64,
    pub c_r: Complex64,
    pub d_r: Complex64,
}

impl PlaneWaveCoeffs {
    fn scaled(self, s: Complex64) -> Self {
        Self {
            a: self.a * s,
            b: self.b * s,
            c_l: self.c_l * s,
            d_l: self.d_l * s,
            c_r: self.c_r * s,
            d_r: self.d_r * s,
        }
    }

    pub fn left(&self, k: f64, j: i64) -> Complex64 {
        wave(self.c_l, self.d_l, k, j)
    }

    pub fn middle(&self, k: f64, j: i64) -> Complex64 {
        wave(self.a, self.b, k, j)
    }

    pub fn right(&self, k: f64, j: i64) -> Complex64 {
        wave(self.c_r, self.d_r, k, j)
    }
}

fn wave(c: Complex64, d: Complex64, k: f64, j: i64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, k * j as f64);
    c * phase + d * phase.conj()
}

fn require_uniform(spec: &LatticeSpec) -> Result<()> {
    spec.validate()?;
    if !spec.is_uniform_chain() {
        return Err(Error::NotUniformChain);
    }
    Ok(())
}

fn require_momentum(k: f64) -> Result<()> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::MomentumOutOfRange { k });
    }
    Ok(())
}

/// `chi_k = (e^{ik(Ns+1)} - e^{-ik(Ns+1)}) / (e^{ik} - e^{-ik})`.
pub fn chi(k: f64, ns: usize) -> Complex64 {
    let num = Complex64::from_polar(1.0, k * (ns + 1) as f64);
    let den = Complex64::from_polar(1.0, k);
    (num - num.conj()) / (den - den.conj())
}

/// LHS - RHS of the quantization condition in exponential form,
/// `-gamma^2 chi^2 (e^{ik(N-1)} - e^{-ik(N-1)}) - J^2 (e^{ik(L+1)} - e^{-ik(L+1)})`.
pub fn bethe_equation_residual(k: f64, spec: &LatticeSpec) -> Result<Complex64> {
    require_uniform(spec)?;
    require_momentum(k)?;
    let ch = chi(k, spec.ns());
    let twice_i_sin = |m: f64| {
        let z = Complex64::from_polar(1.0, k * m);
        z - z.conj()
    };
    let n = spec.n as f64;
    let len = spec.chain_len() as f64;
    Ok(-spec.gamma * spec.gamma * ch * ch * twice_i_sin(n - 1.0) - spec.j * spec.j * twice_i_sin(len + 1.0))
}

/// LHS - RHS of the real quantization condition
/// `gamma^2 sin^2[k(Ns+1)] sin[k(1-N)] = J^2 sin^2(k) sin[k(N+2Ns+1)]`,
/// obtained from [`bethe_equation_residual`] by multiplying through with
/// `sin^2(k) / 2i`. The value is real for real `k`.
pub fn quantization_residual(k: f64, spec: &LatticeSpec) -> Result<Complex64> {
    let exp_form = bethe_equation_residual(k, spec)?;
    let s = k.sin();
    let value = exp_form * (s * s) / Complex64::new(0.0, 2.0);
    debug_assert!(value.im.abs() < 1e-12 * (1.0 + value.re.abs()), "imaginary part {}", value.im);
    Ok(Complex64::new(value.re, 0.0))
}

/// Direct trigonometric evaluation used by the scan.
fn sin_form(k: f64, n: usize, ns: usize, gamma: f64, j: f64) -> f64 {
    let s1 = (k * (ns + 1) as f64).sin();
    let sk = k.sin();
    gamma * gamma * s1 * s1 * (k * (1.0 - n as f64)).sin() - j * j * sk * sk * (k * (n + 2 * ns + 1) as f64).sin()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo < BRACKET_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_lo < 0.0) == (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1).abs(), f(x2).abs());
    for _ in 0..200 {
        if hi - lo < BRACKET_TOL {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1).abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2).abs();
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of the quantization condition in `(0, pi)`, ascending.
///
/// The residual is a trigonometric polynomial of degree at most `L + 3`
/// (`L = N + 2Ns`), so a grid of `64 (L + 1)` intervals resolves every
/// sign change; touching roots are caught as sign-preserving local minima
/// of `|residual|`.
pub fn find_real_roots(spec: &LatticeSpec) -> Result<Vec<BetheRoot>> {
    require_uniform(spec)?;
    let (n, ns, gamma, j) = (spec.n, spec.ns(), spec.gamma, spec.j);
    let f = |k: f64| sin_form(k, n, ns, gamma, j);

    let intervals = 64 * (spec.chain_len() + 1);
    let step = (PI - 2.0 * EDGE) / intervals as f64;
    let ks: Vec<f64> = (0..=intervals).map(|i| EDGE + step * i as f64).collect();
    let fs: Vec<f64> = ks.iter().map(|&k| f(k)).collect();

    let mut found = Vec::new();
    for i in 0..intervals {
        if fs[i] == 0.0 {
            found.push(ks[i]);
        } else if fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0) {
            found.push(bisect(&f, ks[i], ks[i + 1]));
        }
        if i > 0
            && fs[i] != 0.0
            && (fs[i - 1] < 0.0) == (fs[i] < 0.0)
            && (fs[i + 1] < 0.0) == (fs[i] < 0.0)
            && fs[i].abs() < fs[i - 1].abs()
            && fs[i].abs() < fs[i + 1].abs()
        {
            let k = golden_min(&f, ks[i - 1], ks[i + 1]);
            if f(k).abs() < DOUBLE_ROOT_TOL {
                found.push(k);
            }
        }
    }
    if fs[intervals] == 0.0 {
        found.push(ks[intervals]);
    }

    found.sort_by(f64::total_cmp);
    found.dedup_by(|b, a| (*b - *a).abs() < DEDUP_TOL);

    Ok(found
        .into_iter()
        .map(|k| BetheRoot { k, energy: -2.0 * j * k.cos(), chi: chi(k, ns), residual: f(k).abs() })
        .collect())
}

/// Reconstructs the eigenstate of the PT chain belonging to `root`.
///
/// The six amplitudes solve a homogeneous system: the extended waves
/// vanish one site beyond each chain end (this encodes the two edge
/// equations), the pieces agree on both potential sites, and the
/// Schrödinger equation holds on both potential sites. The null vector is
/// the right singular vector of the smallest singular value. The returned
/// site vector has unit norm with its largest entry real positive, and the
/// coefficients carry the same normalization.
pub fn eigenfunction_from_root(root: &BetheRoot, spec: &LatticeSpec) -> Result<(PlaneWaveCoeffs, Vec<Complex64>)> {
    require_uniform(spec)?;
    require_momentum(root.k)?;
    if spec.n < 2 {
        return Err(Error::InvalidSpec("plane-wave matching needs N >= 2".into()));
    }
    let k = root.k;
    let jh = spec.j;
    let energy = Complex64::new(-2.0 * jh * k.cos(), 0.0);
    let p = spec.left_potential_site() as i64;
    let q = spec.right_potential_site() as i64;
    let len = spec.chain_len() as i64;
    let gain = Complex64::new(0.0, spec.gamma);
    let (u_p, u_q) = if spec.swap_gain_loss { (gain.conj(), gain) } else { (gain, gain.conj()) };

    let e = |j: i64| Complex64::from_polar(1.0, k * j as f64);
    let eb = |j: i64| Complex64::from_polar(1.0, -k * j as f64);
    let hop = Complex64::new(-jh, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    // Columns: A, B, C_L, D_L, C_R, D_R.
    let rows: [[Complex64; 6]; 6] = [
        [zero, zero, e(0), eb(0), zero, zero],
        [zero, zero, zero, zero, e(len + 1), eb(len + 1)],
        [-e(p), -eb(p), e(p), eb(p), zero, zero],
        [e(q), eb(q), zero, zero, -e(q), -eb(q)],
        [
            hop * e(p + 1) - (energy - u_p) * e(p),
            hop * eb(p + 1) - (energy - u_p) * eb(p),
            hop * e(p - 1),
            hop * eb(p - 1),
            zero,
            zero,
        ],
        [
            hop * e(q - 1) - (energy - u_q) * e(q),
            hop * eb(q - 1) - (energy - u_q) * eb(q),
            zero,
            zero,
            hop * e(q + 1),
            hop * eb(q + 1),
        ],
    ];
    let m = Mat::from_fn(6, 6, |i, j| rows[i][j]);
    let svd = m.svd().map_err(|_| Error::EigenNonConvergence)?;
    let s = svd.S().column_vector();
    let smax = s[0].re;
    let null_dim = (0..6).filter(|&i| s[i].re <= NULL_TOL * smax).count();
    if null_dim != 1 {
        return Err(Error::NullSpaceDimension { dimension: null_dim });
    }
    let v = svd.V();
    let coeffs =
        PlaneWaveCoeffs { a: v[(0, 5)], b: v[(1, 5)], c_l: v[(2, 5)], d_l: v[(3, 5)], c_r: v[(4, 5)], d_r: v[(5, 5)] };

    let mut psi: Vec<Complex64> = (1..=len)
        .map(|j| {
            if j <= p {
                coeffs.left(k, j)
            } else if j <= q {
                coeffs.middle(k, j)
            } else {
                coeffs.right(k, j)
            }
        })
        .collect();
    let before = psi.clone();
    let scale = norm(&psi);
    psi.iter_mut().for_each(|z| *z /= scale);
    fix_phase(&mut psi);
    let pivot = before
        .iter()
        .zip(&psi)
        .max_by(|a, b| a.0.norm().total_cmp(&b.0.norm()))
        .map(|(raw, fixed)| fixed / raw)
        .unwrap_or(Complex64::new(1.0, 0.0));
    Ok((coeffs.scaled(pivot), psi))
}
