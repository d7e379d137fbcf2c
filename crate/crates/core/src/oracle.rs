//! Exact population quantities for finite discrete joint distributions.
//!
//! Every expectation over independent copies `(X_1, Y_1), ..., (X_4, Y_4)` is
//! an explicit sum over tuples of atoms, so the identities and moment bounds
//! of the distance covariance theory can be checked without sampling error.
//! The atom cap keeps 4-fold enumerations at most `8^4` terms.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::statistics::kernel_from_pairs;

/// Default atom cap.
pub const ATOM_CAP: usize = 8;

const PROB_TOL: f64 = 1e-12;

/// One support point of a [`DiscreteJoint`].
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// `x` coordinates.
    pub x: Vec<f64>,
    /// `y` coordinates.
    pub y: Vec<f64>,
    /// Probability mass, strictly positive.
    pub prob: f64,
}

/// Selects the `X` or `Y` marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// First component.
    X,
    /// Second component.
    Y,
}

/// A finite joint distribution of `(X, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    atoms: Vec<Atom>,
    px_dim: usize,
    py_dim: usize,
}

impl DiscreteJoint {
    /// Validates atoms against the default cap.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        Self::with_cap(atoms, ATOM_CAP)
    }

    /// Validates atoms: positive probabilities summing to one, shared
    /// dimensions, finite coordinates, at most `cap` atoms.
    pub fn with_cap(atoms: Vec<Atom>, cap: usize) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms"));
        }
        if atoms.len() > cap {
            return Err(Error::AtomCap {
                atoms: atoms.len(),
                cap,
            });
        }
        let px_dim = atoms[0].x.len();
        let py_dim = atoms[0].y.len();
        if px_dim == 0 || py_dim == 0 {
            return Err(Error::InvalidDistribution("empty coordinate vector"));
        }
        let mut total = 0.0;
        for a in &atoms {
            if a.x.len() != px_dim {
                return Err(Error::DimensionMismatch(px_dim, a.x.len()));
            }
            if a.y.len() != py_dim {
                return Err(Error::DimensionMismatch(py_dim, a.y.len()));
            }
            if !(a.prob > 0.0) || !a.prob.is_finite() {
                return Err(Error::InvalidDistribution("probabilities must be positive"));
            }
            if a.x.iter().chain(&a.y).any(|v| !v.is_finite()) {
                return Err(Error::InvalidDistribution("non-finite coordinate"));
            }
            total += a.prob;
        }
        if libm::fabs(total - 1.0) > PROB_TOL {
            return Err(Error::InvalidDistribution("probabilities must sum to 1"));
        }
        Ok(Self {
            atoms,
            px_dim,
            py_dim,
        })
    }

    /// Independent coupling of two marginals given as `(point, prob)` lists.
    pub fn product(xs: &[(Vec<f64>, f64)], ys: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(xs.len() * ys.len());
        for (x, px) in xs {
            for (y, py) in ys {
                atoms.push(Atom {
                    x: x.clone(),
                    y: y.clone(),
                    prob: px * py,
                });
            }
        }
        Self::new(atoms)
    }

    /// Support points.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Dimension of `X`.
    pub fn px_dim(&self) -> usize {
        self.px_dim
    }

    /// Dimension of `Y`.
    pub fn py_dim(&self) -> usize {
        self.py_dim
    }

    fn probs(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.prob).collect()
    }

    fn points(&self, side: Side) -> Vec<&[f64]> {
        self.atoms
            .iter()
            .map(|a| match side {
                Side::X => &a.x[..],
                Side::Y => &a.y[..],
            })
            .collect()
    }

    /// Mean vector of one marginal.
    pub fn mean(&self, side: Side) -> Vec<f64> {
        let pts = self.points(side);
        let mut m = vec![0.0; pts[0].len()];
        for (pt, a) in pts.iter().zip(&self.atoms) {
            for (mj, v) in m.iter_mut().zip(pt.iter()) {
                *mj += a.prob * v;
            }
        }
        m
    }

    /// Whether both marginal means vanish (relative to the coordinate scale).
    pub fn is_centered(&self) -> bool {
        [Side::X, Side::Y].iter().all(|&s| {
            let scale = self
                .points(s)
                .iter()
                .flat_map(|p| p.iter())
                .fold(1.0_f64, |m, v| m.max(libm::fabs(*v)));
            self.mean(s).iter().all(|m| libm::fabs(*m) <= 1e-12 * scale)
        })
    }

    /// Copy with both marginals shifted to mean zero.
    pub fn centered(&self) -> Self {
        let mx = self.mean(Side::X);
        let my = self.mean(Side::Y);
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                x: a.x.iter().zip(&mx).map(|(v, m)| v - m).collect(),
                y: a.y.iter().zip(&my).map(|(v, m)| v - m).collect(),
                prob: a.prob,
            })
            .collect();
        Self {
            atoms,
            px_dim: self.px_dim,
            py_dim: self.py_dim,
        }
    }

    /// Copy with every `x` multiplied by `c`.
    pub fn scale_x(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.x.iter_mut().for_each(|v| *v *= c);
        }
        out
    }

    /// Draws an i.i.d. sample of size `n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<(SampleMatrix, SampleMatrix)> {
        let mut xs = Vec::with_capacity(n * self.px_dim);
        let mut ys = Vec::with_capacity(n * self.py_dim);
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.atoms.len() - 1;
            for (i, a) in self.atoms.iter().enumerate() {
                acc += a.prob;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            xs.extend_from_slice(&self.atoms[pick].x);
            ys.extend_from_slice(&self.atoms[pick].y);
        }
        Ok((
            SampleMatrix::new(xs, n, self.px_dim)?,
            SampleMatrix::new(ys, n, self.py_dim)?,
        ))
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Atom-indexed pairwise quantities of one marginal.
struct Marginal {
    probs: Vec<f64>,
    /// `|x_i - x_j|`.
    dist: Vec<Vec<f64>>,
    /// `d(x_i, x_j)`, the population double-centered distance.
    d: Vec<Vec<f64>>,
}

impl Marginal {
    fn new(joint: &DiscreteJoint, side: Side) -> Self {
        let probs = joint.probs();
        let pts = joint.points(side);
        let m = pts.len();
        let dist: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| euclid(pts[i], pts[j])).collect())
            .collect();
        // E|x_i - X| and E|X_1 - X_2|
        let cond: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| probs[j] * dist[i][j]).sum())
            .collect();
        let grand: f64 = (0..m).map(|i| probs[i] * cond[i]).sum();
        let d = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| dist[i][j] - cond[i] - cond[j] + grand)
                    .collect()
            })
            .collect();
        Self { probs, dist, d }
    }

    fn len(&self) -> usize {
        self.probs.len()
    }
}

/// `V^2(X, Y) = E|X1-X2||Y1-Y2| - 2E|X1-X2||Y1-Y3| + E|X1-X2| E|Y1-Y2|`,
/// by enumeration over pairs and triples of atoms.
pub fn pop_dcov_moments(joint: &DiscreteJoint) -> f64 {
    let mx = Marginal::new(joint, Side::X);
    let my = Marginal::new(joint, Side::Y);
    let p = &mx.probs;
    let m = mx.len();
    let (mut both, mut mean_a, mut mean_b) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let w = p[i] * p[j];
            both += w * mx.dist[i][j] * my.dist[i][j];
            mean_a += w * mx.dist[i][j];
            mean_b += w * my.dist[i][j];
        }
    }
    let mut shared = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                shared += p[i] * p[j] * p[k] * mx.dist[i][j] * my.dist[i][k];
            }
        }
    }
    both - 2.0 * shared + mean_a * mean_b
}

/// `V^2(X, Y) = E[d(X1, X2) d(Y1, Y2)]` with exact double-centered distances.
pub fn pop_dcov_via_d(joint: &DiscreteJoint) -> f64 {
    let mx = Marginal::new(joint, Side::X);
    let my = Marginal::new(joint, Side::Y);
    let p = &mx.probs;
    let mut s = 0.0;
    for i in 0..mx.len() {
        for j in 0..mx.len() {
            s += p[i] * p[j] * mx.d[i][j] * my.d[i][j];
        }
    }
    s
}

/// Squared distance variance `V^2(X)` or `V^2(Y)`.
pub fn pop_dvar(joint: &DiscreteJoint, side: Side) -> f64 {
    let mg = Marginal::new(joint, side);
    let p = &mg.probs;
    let mut s = 0.0;
    for i in 0..mg.len() {
        for j in 0..mg.len() {
            s += p[i] * p[j] * mg.d[i][j] * mg.d[i][j];
        }
    }
    s
}

/// `E[d(x, X)]` for every atom `x`; identically zero by construction.
pub fn conditional_d_means(joint: &DiscreteJoint, side: Side) -> Vec<f64> {
    let mg = Marginal::new(joint, side);
    (0..mg.len())
        .map(|i| (0..mg.len()).map(|j| mg.probs[j] * mg.d[i][j]).sum())
        .collect()
}

/// `E[g(X1, X2, X3, X4)]` with `g = d12 d13 d24 d34`, by 4-fold enumeration.
pub fn pop_g(joint: &DiscreteJoint, side: Side) -> f64 {
    let mg = Marginal::new(joint, side);
    let (p, d, m) = (&mg.probs, &mg.d, mg.len());
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    s += p[i] * p[j] * p[k] * p[l] * d[i][j] * d[i][k] * d[j][l] * d[k][l];
                }
            }
        }
    }
    s
}

/// `E[g]` through `E[eta(X1, X4)^2]` with `eta(x, x') = E[d(x, X) d(X, x')]`.
/// Conditioning on `X1, X4` factorizes `g` into two copies of `eta`.
pub fn pop_g_via_eta(joint: &DiscreteJoint, side: Side) -> f64 {
    let mg = Marginal::new(joint, side);
    let (p, d, m) = (&mg.probs, &mg.d, mg.len());
    let mut s = 0.0;
    for i in 0..m {
        for l in 0..m {
            let eta: f64 = (0..m).map(|j| p[j] * d[i][j] * d[j][l]).sum();
            s += p[i] * p[l] * eta * eta;
        }
    }
    s
}

/// Largest gap, over all 4-tuples of atoms, between the kernel `h` built
/// from raw distances and the same expression built from the double-centered
/// distances `d`.
pub fn kernel_identity_max_gap(joint: &DiscreteJoint) -> f64 {
    let mx = Marginal::new(joint, Side::X);
    let my = Marginal::new(joint, Side::Y);
    let m = mx.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let idx = [i, j, k, l];
                    let pick = |src: &Vec<Vec<f64>>| -> [[f64; 4]; 4] {
                        core::array::from_fn(|r| core::array::from_fn(|c| src[idx[r]][idx[c]]))
                    };
                    let raw = kernel_from_pairs(&pick(&mx.dist), &pick(&my.dist));
                    let centered = kernel_from_pairs(&pick(&mx.d), &pick(&my.d));
                    worst = worst.max(libm::fabs(raw - centered));
                }
            }
        }
    }
    worst
}

/// True iff the kernel representation through `d` matches `h` on every
/// 4-tuple of atoms to `1e-10` (scaled by the distance magnitudes).
pub fn pop_kernel_identity_check(joint: &DiscreteJoint) -> bool {
    let scale = |s: Side| {
        Marginal::new(joint, s)
            .dist
            .iter()
            .flatten()
            .fold(1.0_f64, |m, v| m.max(*v))
    };
    kernel_identity_max_gap(joint) <= 1e-10 * scale(Side::X) * scale(Side::Y)
}

/// Moment quantities of one mean-zero marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalMoments {
    /// `V^2(X)`.
    pub v2: f64,
    /// `B_X = E|X1 - X2|^2 = 2 E|X|^2`.
    pub b: f64,
    /// `E|X|^2`.
    pub e_norm_sq: f64,
    /// `E|X|^4`.
    pub e_norm_fourth: f64,
    /// `L_{x,tau} = E||X|^2 - E|X|^2|^{2+2tau} + E|X1'X2|^{2+2tau}`.
    pub l_tau: f64,
    /// `L_x = L_{x,1}`, the fourth-moment version.
    pub l_fourth: f64,
    /// `E[(X1'X2)^2]`.
    pub e_inner_sq: f64,
    /// `E[(X1' Sigma X2)^2]`.
    pub e_inner_sigma_sq: f64,
    /// `E[g(X1, X2, X3, X4)]`.
    pub e_g: f64,
    /// `E|d(X1, X2)|^{2+2tau}`.
    pub e_d_abs: f64,
    /// `E_x = (E[(X1'Sigma X2)^2] + B^{-2tau} L^{(2+tau)/(1+tau)}) / E[(X1'X2)^2]^2`;
    /// `None` when the denominator vanishes.
    pub e_ratio: Option<f64>,
    /// `E[W12^2]` with `W12 = (|X1 - X2|^2 - B) / B`; `None` when `B = 0`.
    pub e_w12_sq: Option<f64>,
}

/// Population moments of both marginals for a given `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    /// Moment exponent parameter.
    pub tau: f64,
    /// `V^2(X, Y)`.
    pub v2_xy: f64,
    /// `X` marginal.
    pub x: MarginalMoments,
    /// `Y` marginal.
    pub y: MarginalMoments,
}

fn check_tau(tau: f64, max: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= max) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
        });
    }
    Ok(())
}

fn marginal_moments(joint: &DiscreteJoint, side: Side, tau: f64) -> MarginalMoments {
    let mg = Marginal::new(joint, side);
    let pts = joint.points(side);
    let (p, m) = (&mg.probs, mg.len());
    let dim = pts[0].len();
    let exp = 2.0 + 2.0 * tau;

    let norm_sq: Vec<f64> = pts.iter().map(|x| dot(x, x)).collect();
    let e_norm_sq: f64 = (0..m).map(|i| p[i] * norm_sq[i]).sum();
    let e_norm_fourth: f64 = (0..m).map(|i| p[i] * norm_sq[i] * norm_sq[i]).sum();

    let mut sigma = vec![0.0; dim * dim];
    for (i, x) in pts.iter().enumerate() {
        for r in 0..dim {
            for c in 0..dim {
                sigma[r * dim + c] += p[i] * x[r] * x[c];
            }
        }
    }
    let sigma_times = |x: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|r| (0..dim).map(|c| sigma[r * dim + c] * x[c]).sum())
            .collect()
    };

    let (mut b, mut v2, mut e_inner_sq, mut e_inner_sigma_sq) = (0.0, 0.0, 0.0, 0.0);
    let (mut inner_tau, mut inner_fourth, mut e_d_abs) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let sx = sigma_times(pts[i]);
        for j in 0..m {
            let w = p[i] * p[j];
            let dij = mg.dist[i][j];
            b += w * dij * dij;
            v2 += w * mg.d[i][j] * mg.d[i][j];
            let ip = dot(pts[i], pts[j]);
            e_inner_sq += w * ip * ip;
            let ips = dot(&sx, pts[j]);
            e_inner_sigma_sq += w * ips * ips;
            inner_tau += w * libm::pow(libm::fabs(ip), exp);
            inner_fourth += w * ip * ip * ip * ip;
            e_d_abs += w * libm::pow(libm::fabs(mg.d[i][j]), exp);
        }
    }
    let mut dev_tau = 0.0;
    let mut dev_fourth = 0.0;
    for i in 0..m {
        let dev = norm_sq[i] - e_norm_sq;
        dev_tau += p[i] * libm::pow(libm::fabs(dev), exp);
        dev_fourth += p[i] * dev * dev * dev * dev;
    }
    let l_tau = dev_tau + inner_tau;
    let e_ratio = if e_inner_sq > 0.0 && b > 0.0 {
        let rem = libm::pow(b, -2.0 * tau) * libm::pow(l_tau, (2.0 + tau) / (1.0 + tau));
        Some((e_inner_sigma_sq + rem) / (e_inner_sq * e_inner_sq))
    } else {
        None
    };
    let e_w12_sq = (b > 0.0).then(|| {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let w12 = (mg.dist[i][j] * mg.dist[i][j] - b) / b;
                s += p[i] * p[j] * w12 * w12;
            }
        }
        s
    });
    MarginalMoments {
        v2,
        b,
        e_norm_sq,
        e_norm_fourth,
        l_tau,
        l_fourth: dev_fourth + inner_fourth,
        e_inner_sq,
        e_inner_sigma_sq,
        e_g: pop_g(joint, side),
        e_d_abs,
        e_ratio,
        e_w12_sq,
    }
}

/// All moment quantities, exact by enumeration. Needs mean-zero marginals and
/// `0 < tau <= 1`.
pub fn pop_momentset(joint: &DiscreteJoint, tau: f64) -> Result<MomentSet> {
    check_tau(tau, 1.0)?;
    if !joint.is_centered() {
        return Err(Error::NotCentered);
    }
    Ok(MomentSet {
        tau,
        v2_xy: pop_dcov_via_d(joint),
        x: marginal_moments(joint, Side::X, tau),
        y: marginal_moments(joint, Side::Y, tau),
    })
}

/// `E[W12^2]` predicted from norms and inner products:
/// `B^{-2} (2[E|X|^4 - (E|X|^2)^2] + 4 E[(X1'X2)^2])`.
pub fn w12_second_moment_formula(m: &MarginalMoments) -> Option<f64> {
    (m.b > 0.0).then(|| {
        let var_norm = m.e_norm_fourth - m.e_norm_sq * m.e_norm_sq;
        (2.0 * var_norm + 4.0 * m.e_inner_sq) / (m.b * m.b)
    })
}

/// One inequality evaluated on a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// Left-hand side.
    pub lhs: f64,
    /// Right-hand side without its absolute constant.
    pub bound: f64,
    /// `lhs / bound`, the constant the inequality needs; `None` if undefined.
    pub ratio: Option<f64>,
}

impl BoundCheck {
    fn new(lhs: f64, bound: f64) -> Self {
        let ratio = (bound > 0.0 && bound.is_finite()).then(|| lhs / bound);
        Self { lhs, bound, ratio }
    }
}

/// Moment-bound report for one marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalBounds {
    /// `E|d|^{2+2tau}` against `B^{-(1+tau)} L_tau` (constant unspecified).
    pub prop1: BoundCheck,
    /// `|V^2 - B^{-1} E[(X1'X2)^2]|` against `B^{-(1+2tau)} L_tau`.
    pub prop2: BoundCheck,
    /// Whether `prop2.lhs <= 9 * prop2.bound`.
    pub prop2_holds: bool,
    /// `|E g| - B^{-2} E[(X1' Sigma X2)^2]` against
    /// `B^{-(2+2tau)} L_tau^{(2+tau)/(1+tau)}`; a nonpositive lhs means the
    /// leading term alone already dominates.
    pub prop3: BoundCheck,
    /// Marginal is a point mass (`B = 0`).
    pub degenerate: bool,
}

/// Bound report for both marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropReport {
    /// Moment exponent parameter.
    pub tau: f64,
    /// `X` marginal.
    pub x: MarginalBounds,
    /// `Y` marginal.
    pub y: MarginalBounds,
}

impl PropReport {
    /// Explicit-constant bound holds on both marginals and the reported
    /// ratios are finite wherever the marginal is nondegenerate.
    pub fn all_pass(&self) -> bool {
        [self.x, self.y].iter().all(|m| {
            m.prop2_holds
                && (m.degenerate
                    || [m.prop1.ratio, m.prop3.ratio]
                        .iter()
                        .all(|r| r.is_some_and(f64::is_finite)))
        })
    }
}

fn marginal_bounds(m: &MarginalMoments, tau: f64) -> MarginalBounds {
    if m.b <= 0.0 {
        let zero = BoundCheck {
            lhs: 0.0,
            bound: 0.0,
            ratio: None,
        };
        return MarginalBounds {
            prop1: zero,
            prop2: zero,
            prop2_holds: m.v2 == 0.0,
            prop3: zero,
            degenerate: true,
        };
    }
    let b = m.b;
    let prop1 = BoundCheck::new(m.e_d_abs, libm::pow(b, -(1.0 + tau)) * m.l_tau);
    let prop2 = BoundCheck::new(
        libm::fabs(m.v2 - m.e_inner_sq / b),
        libm::pow(b, -(1.0 + 2.0 * tau)) * m.l_tau,
    );
    let slack = 1e-12 * (m.v2 + m.e_inner_sq / b);
    let prop2_holds = prop2.lhs <= 9.0 * prop2.bound + slack;
    let leading = m.e_inner_sigma_sq / (b * b);
    let prop3 = BoundCheck::new(
        libm::fabs(m.e_g) - leading,
        libm::pow(b, -(2.0 + 2.0 * tau)) * libm::pow(m.l_tau, (2.0 + tau) / (1.0 + tau)),
    );
    MarginalBounds {
        prop1,
        prop2,
        prop2_holds,
        prop3,
        degenerate: false,
    }
}

/// Evaluates the three moment bounds on a centered distribution for
/// `0 < tau <= 1/2`.
pub fn verify_prop_bounds(joint: &DiscreteJoint, tau: f64) -> Result<PropReport> {
    check_tau(tau, 0.5)?;
    let ms = pop_momentset(joint, tau)?;
    Ok(PropReport {
        tau,
        x: marginal_bounds(&ms.x, tau),
        y: marginal_bounds(&ms.y, tau),
    })
}
