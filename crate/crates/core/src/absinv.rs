//! Group inverses, absorption inverses of graph Laplacians, and the matrix
//! identities that tie them to the fundamental matrices of absorbing and
//! regular chains.
//!
//! Throughout, `ℒ = W - A` is the unnormalized Laplacian of the input graph,
//! `u` spans its kernel (normalized to sum 1), and `π = W u / (wᵀu)` is the
//! stationary distribution of `A W^-1`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{AbsorptionScaledGraph, WeightedDigraph};
use crate::linalg::{self, invert, norm1, ones};
use crate::markov::{regular_fundamental, stationary, StationaryDistribution, TransitionMatrix};

const RANK_TOL: f64 = 1e-10;

/// Group inverse by full-rank factorization `X = C F`, `X^# = C (F C)^-2 F`.
pub fn group_inverse(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: x.ncols(),
        });
    }
    let rank_x = linalg::rank(x, RANK_TOL);
    let rank_x2 = linalg::rank(&(x * x), RANK_TOL);
    if rank_x != rank_x2 {
        return Err(Error::RankDeficiencyMismatch { rank_x, rank_x2 });
    }
    if rank_x == 0 {
        return Ok(DMatrix::zeros(x.nrows(), x.ncols()));
    }
    let svd = linalg::svd(x);
    let mut c = svd.u.columns(0, rank_x).into_owned();
    for k in 0..rank_x {
        c.column_mut(k).scale_mut(svd.s[k]);
    }
    let f = svd.v.columns(0, rank_x).transpose();
    let fc_inv = invert(&(&f * &c))?;
    Ok(&c * (&fc_inv * &fc_inv) * f)
}

/// Residuals of `X X^# X = X`, `X^# X X^# = X^#` and `X X^# = X^# X`.
pub fn group_inverse_residuals(x: &DMatrix<f64>, xg: &DMatrix<f64>) -> [f64; 3] {
    [
        norm1(&(x * xg * x - x)),
        norm1(&(xg * x * xg - xg)),
        norm1(&(x * xg - xg * x)),
    ]
}

/// Normalized kernel vector of `W - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    u: DVector<f64>,
}

impl KernelVector {
    /// Requires a strongly connected graph; all entries are then positive.
    pub fn new(g: &WeightedDigraph) -> Result<Self> {
        if !g.is_strongly_connected() {
            return Err(Error::NotStronglyConnected);
        }
        let kv = Self::nonnegative(g)?;
        if kv.u.iter().any(|&x| x <= 0.0) {
            return Err(Error::NonConvergent(
                "kernel vector of a strongly connected graph has a non-positive entry".into(),
            ));
        }
        Ok(kv)
    }

    /// Accepts graphs whose Laplacian has a one-dimensional kernel spanned
    /// by a non-negative vector (a single closed class). Entries of nodes
    /// outside the closed class are zero.
    pub fn nonnegative(g: &WeightedDigraph) -> Result<Self> {
        g.require_no_dangling()?;
        let lap = g.laplacian();
        let mut u = linalg::normalized_kernel_vector(&lap)?;
        for x in u.iter_mut() {
            if *x < 0.0 && *x > -1e-12 {
                *x = 0.0;
            }
        }
        if u.iter().any(|&x| x < 0.0) {
            return Err(Error::NonConvergent("kernel vector has negative entries".into()));
        }
        let resid = linalg::vec_norm1(&(&lap * &u));
        if resid > 1e-10 {
            return Err(Error::NonConvergent(format!("kernel residual {resid:e}")));
        }
        Ok(Self { u })
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    /// `π = W u / (wᵀ u)`, stationary for `A W^-1`.
    pub fn stationary(&self, g: &WeightedDigraph) -> DVector<f64> {
        let wu = g.out_degrees().component_mul(&self.u);
        let s = wu.sum();
        wu / s
    }

    /// `U = u 1ᵀ / (dᵀ u)`.
    pub fn projector(&self, d: &DVector<f64>) -> DMatrix<f64> {
        &self.u * ones(self.u.len()).transpose() / d.dot(&self.u)
    }

    /// `α = δᵀu / (wᵀu + δᵀu)`.
    pub fn alpha(&self, g: &WeightedDigraph, delta: &DVector<f64>) -> f64 {
        let du = delta.dot(&self.u);
        du / (g.out_degrees().dot(&self.u) + du)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionInverse {
    matrix: DMatrix<f64>,
    rate_vector: DVector<f64>,
}

impl AbsorptionInverse {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rate_vector(&self) -> &DVector<f64> {
        &self.rate_vector
    }

    /// Largest residual of the two defining properties, checked on bases of
    /// `{x : D x ∈ Range ℒ}` and `{D x : x ∈ Ker ℒ}`.
    pub fn defining_property_residual(&self, g: &WeightedDigraph) -> f64 {
        let lap = g.laplacian();
        let d = &self.rate_vector;
        let n_basis = linalg::range_space(&lap, RANK_TOL).map_with_location(|i, _, x| x / d[i]);
        let r_basis = linalg::null_space(&lap, RANK_TOL).map_with_location(|i, _, x| x * d[i]);
        let inverse_on_n = norm1(&(&self.matrix * &lap * &n_basis - &n_basis));
        let kills_r = norm1(&(&self.matrix * &r_basis));
        inverse_on_n.max(kills_r)
    }
}

fn check_rates(g: &WeightedDigraph, d: &DVector<f64>) -> Result<()> {
    if d.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: d.len(),
        });
    }
    if let Some(i) = d.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidAbsorption(format!(
            "absorption rate of node {i} must be strictly positive, got {}",
            d[i]
        )));
    }
    Ok(())
}

/// `Z₀ = (I - A W^-1 + π 1ᵀ)^-1`, the fundamental matrix of the walk `A W^-1`.
fn z0(g: &WeightedDigraph, pi: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = g.n();
    invert(&(DMatrix::identity(n, n) - g.random_walk_matrix()? + pi * ones(n).transpose()))
}

/// `ℒ^d = (I - U D) W^-1 Z₀ (I - D U)`.
pub fn absorption_inverse(g: &WeightedDigraph, d: &DVector<f64>) -> Result<AbsorptionInverse> {
    check_rates(g, d)?;
    let kv = KernelVector::new(g)?;
    let n = g.n();
    let pi = kv.stationary(g);
    let z = linalg::scale_rows(&z0(g, &pi)?, &g.out_degrees().map(|w| 1.0 / w));
    let u_mat = kv.projector(d);
    let dm = DMatrix::from_diagonal(d);
    let ident = DMatrix::<f64>::identity(n, n);
    let matrix = (&ident - &u_mat * &dm) * z * (&ident - &dm * &u_mat);
    Ok(AbsorptionInverse {
        matrix,
        rate_vector: d.clone(),
    })
}

/// `(ℒ + D)^-1` assembled as `U + (I + ℒ^d D)^-1 ℒ^d`.
pub fn fundamental_from_absinv(g: &WeightedDigraph, d: &DVector<f64>) -> Result<DMatrix<f64>> {
    let ld = absorption_inverse(g, d)?;
    let kv = KernelVector::new(g)?;
    let n = g.n();
    let dm = DMatrix::from_diagonal(d);
    let core = invert(&(DMatrix::identity(n, n) + ld.matrix() * &dm))?;
    Ok(kv.projector(d) + core * ld.matrix())
}

/// The direct inverse `(ℒ + D)^-1`.
pub fn absorbing_fundamental(g: &WeightedDigraph, d: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_rates(g, d)?;
    invert(&(g.laplacian() + DMatrix::from_diagonal(d)))
}

/// Partial sum `U + Σ_{k≤K} (-ℒ^δ D)^k ℒ^δ` of the series for `(ℒ + D)^-1`.
pub fn fundamental_series(g: &WeightedDigraph, d: &DVector<f64>, terms: usize) -> Result<DMatrix<f64>> {
    let ld = absorption_inverse(g, d)?;
    let kv = KernelVector::new(g)?;
    let step = -(ld.matrix() * DMatrix::from_diagonal(d));
    let mut term = ld.matrix().clone();
    let mut sum = kv.projector(d) + &term;
    for _ in 0..terms {
        term = &step * term;
        sum += &term;
    }
    Ok(sum)
}

/// Spectral radius of `ℒ^δ D`, which governs the series above.
pub fn series_radius(g: &WeightedDigraph, d: &DVector<f64>) -> Result<f64> {
    let ld = absorption_inverse(g, d)?;
    Ok(linalg::spectral_radius(&(ld.matrix() * DMatrix::from_diagonal(d))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderError {
    /// `‖ℒ^δ - [(ℒ + D)^-1 - u 1ᵀ / (δᵀu)]‖₁`.
    pub error: f64,
    /// `‖D‖₁ / ‖ℒ‖₁`.
    pub epsilon: f64,
}

/// How well `(ℒ + D)^-1 - u 1ᵀ / (δᵀu)` approximates the absorption inverse.
pub fn absinv_first_order_error(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<FirstOrderError> {
    let rho = series_radius(g, delta)?;
    if rho >= 1.0 {
        return Err(Error::SpectralRadiusTooLarge(rho));
    }
    let ld = absorption_inverse(g, delta)?;
    let kv = KernelVector::new(g)?;
    let approx = absorbing_fundamental(g, delta)? - kv.projector(delta);
    let dm = DMatrix::from_diagonal(delta);
    Ok(FirstOrderError {
        error: norm1(&(ld.matrix() - approx)),
        epsilon: norm1(&dm) / norm1(&g.laplacian()),
    })
}

/// `P₁ = (A + D_δ)(W + D_δ)^-1`.
pub fn p1(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<TransitionMatrix> {
    check_rates(g, delta)?;
    let d = g.out_degrees() + delta;
    let m = linalg::scale_columns_inv(&(g.adjacency() + DMatrix::from_diagonal(delta)), &d);
    TransitionMatrix::raw(m)
}

/// Fundamental matrix of `P₁` computed directly from its definition.
pub fn z1_direct(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<DMatrix<f64>> {
    let p = p1(g, delta)?;
    let pi = stationary(&p)?;
    regular_fundamental(&p, &pi)
}

/// Fundamental matrix of `P₁` assembled from `Z₀`, `π`, `α` and `u`:
///
/// `Z₁ = W^-1 (W + D) [Z₀ + α(1-α) π 1ᵀ - α (Z₀ D U + W u δᵀ W^-1 Z₀ (I - α D U) / (δᵀu))]`.
///
/// Only a non-negative kernel vector is needed, so graphs with transient
/// nodes are accepted.
pub fn z1_from_z0(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_rates(g, delta)?;
    let kv = KernelVector::nonnegative(g)?;
    let n = g.n();
    let u = kv.u();
    let pi = kv.stationary(g);
    let z0 = z0(g, &pi)?;
    let alpha = kv.alpha(g, delta);
    let du = delta.dot(u);
    let w = g.out_degrees();
    let winv = w.map(|x| 1.0 / x);
    let dm = DMatrix::from_diagonal(delta);
    let u_mat = kv.projector(delta);
    let ident = DMatrix::<f64>::identity(n, n);

    let outer = linalg::scale_rows(&(u * delta.transpose()), w) / du;
    let tail = linalg::scale_columns_inv(&outer, w) * &z0 * (&ident - &dm * &u_mat * alpha);
    let bracket = &z0 + &pi * ones(n).transpose() * (alpha * (1.0 - alpha)) - (&z0 * &dm * &u_mat + tail) * alpha;
    let left = (w + delta).component_mul(&winv);
    Ok(linalg::scale_rows(&bracket, &left))
}

/// Residuals `‖F_k F_k^-1 - I‖₁` for the three rank-one updates that turn
/// `Z₀^-1` into the matrix whose inverse is the bracket in [`z1_from_z0`].
pub fn sherman_morrison_steps(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<[f64; 3]> {
    check_rates(g, delta)?;
    let kv = KernelVector::nonnegative(g)?;
    let n = g.n();
    let u = kv.u();
    let pi = kv.stationary(g);
    let z0 = z0(g, &pi)?;
    let alpha = kv.alpha(g, delta);
    let du = delta.dot(u);
    let w = g.out_degrees();
    let dm = DMatrix::from_diagonal(delta);
    let u_mat = kv.projector(delta);
    let ident = DMatrix::<f64>::identity(n, n);
    let one_t = ones(n).transpose();
    let du_vec = delta.component_mul(u) / du;

    let f0 = &ident - g.random_walk_matrix()? + &pi * &one_t;
    let f1 = &f0 - &pi * &one_t * alpha;
    let f2 = &f1 + &du_vec * &one_t * alpha;
    let mix = &pi * (1.0 - alpha) + &du_vec * alpha;
    let f3 = &f2 + linalg::scale_columns_inv(&(mix * &one_t * &dm), w);

    let f1_inv = &z0 + &pi * &one_t * (alpha / (1.0 - alpha));
    let f2_inv = &z0 + &pi * &one_t * alpha - &z0 * &dm * &u_mat * alpha;
    let outer = linalg::scale_rows(&(u * delta.transpose()), w) / du;
    let tail = linalg::scale_columns_inv(&outer, w) * &z0 * (&ident - &dm * &u_mat * alpha);
    let f3_inv = &z0 + &pi * &one_t * (alpha * (1.0 - alpha)) - (&z0 * &dm * &u_mat + tail) * alpha;

    Ok([
        norm1(&(f1 * f1_inv - &ident)),
        norm1(&(f2 * f2_inv - &ident)),
        norm1(&(f3 * f3_inv - &ident)),
    ])
}

/// Absorption inverses on the graph scaled by `W + D_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRelation {
    /// `L̃₁^{d₁}` computed on the scaled graph, with `d₁ = δ / (w + δ)`.
    pub scaled_absinv: DMatrix<f64>,
    /// `(W + D_δ) ℒ^δ`.
    pub rescaled_absinv: DMatrix<f64>,
    /// `(ℒ + D_δ)^-1` by direct inversion.
    pub fundamental_direct: DMatrix<f64>,
    /// `(W + D_δ)^-1 (U₁ + (I + L̃₁^{d₁} D₁)^-1 L̃₁^{d₁})`.
    pub fundamental_factored: DMatrix<f64>,
}

impl ScaledRelation {
    pub fn absinv_residual(&self) -> f64 {
        norm1(&(&self.scaled_absinv - &self.rescaled_absinv))
    }

    pub fn fundamental_residual(&self) -> f64 {
        norm1(&(&self.fundamental_direct - &self.fundamental_factored))
    }
}

pub fn l1_absinv_relation(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<ScaledRelation> {
    check_rates(g, delta)?;
    let n = g.n();
    let wd = g.out_degrees() + delta;
    let scaled = AbsorptionScaledGraph::new(g, &wd)?;
    let d1 = delta.component_div(&wd);
    let scaled_absinv = absorption_inverse(scaled.graph(), &d1)?.matrix().clone();
    let rescaled_absinv = linalg::scale_rows(absorption_inverse(g, delta)?.matrix(), &wd);

    let kv = KernelVector::new(g)?;
    let u1 = linalg::scale_rows(&kv.projector(delta), &wd);
    let core = invert(&(DMatrix::identity(n, n) + &scaled_absinv * DMatrix::from_diagonal(&d1)))?;
    let inner = u1 + core * &scaled_absinv;
    let fundamental_factored = linalg::scale_rows(&inner, &wd.map(|x| 1.0 / x));
    Ok(ScaledRelation {
        scaled_absinv,
        rescaled_absinv,
        fundamental_direct: absorbing_fundamental(g, delta)?,
        fundamental_factored,
    })
}

/// The absorption inverse with respect to `d' = w + δ`, computed directly and
/// as the `α`-weighted combination of `ℒ^δ` and `Z* = W^-1 (Z₀ - π 1ᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DprimeRelation {
    pub alpha: f64,
    pub direct: DMatrix<f64>,
    pub expansion: DMatrix<f64>,
    pub z_star: DMatrix<f64>,
    pub absinv_delta: DMatrix<f64>,
}

impl DprimeRelation {
    pub fn residual(&self) -> f64 {
        norm1(&(&self.direct - &self.expansion))
    }
}

pub fn dprime_absinv_relation(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<DprimeRelation> {
    check_rates(g, delta)?;
    let n = g.n();
    let kv = KernelVector::new(g)?;
    let pi = kv.stationary(g);
    let alpha = kv.alpha(g, delta);
    let lap = g.laplacian();
    let z_star = linalg::scale_rows(
        &(z0(g, &pi)? - &pi * ones(n).transpose()),
        &g.out_degrees().map(|w| 1.0 / w),
    );
    let ld = absorption_inverse(g, delta)?.matrix().clone();
    let direct = absorption_inverse(g, &(g.out_degrees() + delta))?.matrix().clone();
    let expansion = &ld * (alpha * alpha)
        + (&ld * &lap * &z_star + &z_star * &lap * &ld) * (alpha * (1.0 - alpha))
        + &z_star * ((1.0 - alpha) * (1.0 - alpha));
    Ok(DprimeRelation {
        alpha,
        direct,
        expansion,
        z_star,
        absinv_delta: ld,
    })
}

/// Residual of `(ℒ D^-1)^# = D ℒ^d`.
pub fn group_inverse_relation(g: &WeightedDigraph, d: &DVector<f64>) -> Result<f64> {
    let ld = absorption_inverse(g, d)?;
    let lhs = group_inverse(&linalg::scale_columns_inv(&g.laplacian(), d))?;
    Ok(norm1(&(lhs - linalg::scale_rows(ld.matrix(), d))))
}

/// 1-norm residuals of every identity for one graph and rate vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub z1_from_z0: f64,
    pub group_inverse_relation: f64,
    pub group_inverse_axioms: f64,
    pub fundamental_from_absinv: f64,
    pub scaled_absinv_relation: f64,
    pub scaled_fundamental_factorization: f64,
    pub absinv_defining_properties: f64,
    pub dprime_expansion: f64,
    pub sherman_morrison_steps: [f64; 3],
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.z1_from_z0,
            self.group_inverse_relation,
            self.group_inverse_axioms,
            self.fundamental_from_absinv,
            self.scaled_absinv_relation,
            self.scaled_fundamental_factorization,
            self.absinv_defining_properties,
            self.dprime_expansion,
        ]
        .into_iter()
        .chain(self.sherman_morrison_steps)
        .fold(0.0, f64::max)
    }

    /// `(name, residual)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("z1_from_z0", self.z1_from_z0),
            ("group_inverse_relation", self.group_inverse_relation),
            ("group_inverse_axioms", self.group_inverse_axioms),
            ("fundamental_from_absinv", self.fundamental_from_absinv),
            ("scaled_absinv_relation", self.scaled_absinv_relation),
            ("scaled_fundamental_factorization", self.scaled_fundamental_factorization),
            ("absinv_defining_properties", self.absinv_defining_properties),
            ("dprime_expansion", self.dprime_expansion),
            ("sherman_morrison_steps", self.sherman_morrison_steps.into_iter().fold(0.0, f64::max)),
        ]
    }
}

pub fn identity_report(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<IdentityReport> {
    check_rates(g, delta)?;
    let ld = absorption_inverse(g, delta)?;
    let x = linalg::scale_columns_inv(&g.laplacian(), delta);
    let xg = group_inverse(&x)?;
    let scaled = l1_absinv_relation(g, delta)?;
    Ok(IdentityReport {
        n: g.n(),
        z1_from_z0: norm1(&(z1_from_z0(g, delta)? - z1_direct(g, delta)?)),
        group_inverse_relation: group_inverse_relation(g, delta)?,
        group_inverse_axioms: group_inverse_residuals(&x, &xg).into_iter().fold(0.0, f64::max),
        fundamental_from_absinv: norm1(
            &(fundamental_from_absinv(g, delta)? - absorbing_fundamental(g, delta)?),
        ),
        scaled_absinv_relation: scaled.absinv_residual(),
        scaled_fundamental_factorization: scaled.fundamental_residual(),
        absinv_defining_properties: ld.defining_property_residual(g),
        dprime_expansion: dprime_absinv_relation(g, delta)?.residual(),
        sherman_morrison_steps: sherman_morrison_steps(g, delta)?,
    })
}

/// Random strongly connected digraph with `n` nodes, edge weights in (0, 1]
/// and absorption rates log-uniform in [1e-3, 10].
pub fn random_instance(n: usize, rng: &mut ChaCha8Rng) -> (WeightedDigraph, DVector<f64>) {
    loop {
        let density = rng.random_range(0.25..0.8);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(density) {
                    a[(i, j)] = 1.0 - rng.random::<f64>();
                }
            }
        }
        let Ok(g) = WeightedDigraph::from_adjacency(a) else {
            continue;
        };
        if g.is_strongly_connected() {
            let delta = DVector::from_fn(n, |_, _| 10f64.powf(rng.random_range(-3.0..1.0)));
            return (g, delta);
        }
    }
}

/// Identity reports over `trials` random instances with `n ∈ {3, …, 10}`.
/// Trial `k` draws from its own stream of the seeded generator.
pub fn random_identity_suite(trials: usize, seed: u64) -> Vec<Result<IdentityReport>> {
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = rng.random_range(3..=10);
            let (g, delta) = random_instance(n, &mut rng);
            identity_report(&g, &delta)
        })
        .collect()
}

/// Distribution helper for callers that need the kernel-based stationary vector.
pub fn kernel_stationary(g: &WeightedDigraph) -> Result<StationaryDistribution> {
    let kv = KernelVector::new(g)?;
    StationaryDistribution::normalized(kv.stationary(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks::three_node;

    fn pair() -> WeightedDigraph {
        WeightedDigraph::from_undirected_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn group_inverse_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let xg = group_inverse(&x).unwrap();
        assert!(norm1(&(xg - x.clone().try_inverse().unwrap())) < 1e-14);

        let x = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let xg = group_inverse(&x).unwrap();
        assert!(norm1(&(&xg - &x / 4.0)) < 1e-14);
        assert!(group_inverse_residuals(&x, &xg).iter().all(|&r| r < 1e-14));

        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            group_inverse(&nil),
            Err(Error::RankDeficiencyMismatch { rank_x: 1, rank_x2: 0 })
        ));
    }

    #[test]
    fn absorption_inverse_on_pair() {
        let d = DVector::from_element(2, 1.0);
        let ld = absorption_inverse(&pair(), &d).unwrap();
        let via_group = group_inverse(&pair().laplacian()).unwrap();
        assert!(norm1(&(ld.matrix() - via_group)) < 1e-14);
        assert!(ld.defining_property_residual(&pair()) < 1e-14);
    }

    #[test]
    fn not_strongly_connected() {
        assert!(matches!(
            absorption_inverse(&three_node(), &DVector::from_element(3, 1.0)),
            Err(Error::NotStronglyConnected)
        ));
    }

    #[test]
    fn large_rates_dominate() {
        let d = DVector::from_element(2, 1e6);
        let f = fundamental_from_absinv(&pair(), &d).unwrap();
        let expected = DMatrix::identity(2, 2) * 1e-6;
        assert!(norm1(&(&f - &expected)) <= 1e-5 * 1e-6);
    }

    #[test]
    fn first_order_error_small_rates() {
        // here L^δ = [[1,-1],[-1,1]]/4, so the remainder is L^δ D (I + L^δ D)^-1 L^δ
        let e = absinv_first_order_error(&pair(), &DVector::from_element(2, 0.01)).unwrap();
        assert!((e.error - 0.0025 / 1.005).abs() < 1e-12, "{}", e.error);
        assert!((e.epsilon - 0.005).abs() < 1e-15);
        let tenth = absinv_first_order_error(&pair(), &DVector::from_element(2, 0.001)).unwrap();
        assert!(tenth.error / e.error <= 0.3);
        assert!(matches!(
            absinv_first_order_error(&pair(), &DVector::from_element(2, 100.0)),
            Err(Error::SpectralRadiusTooLarge(_))
        ));
    }

    #[test]
    fn z1_on_three_node_graph() {
        let g = three_node();
        let delta = DVector::from_vec(vec![0.1, 1.0, 0.1]);
        let r = norm1(&(z1_from_z0(&g, &delta).unwrap() - z1_direct(&g, &delta).unwrap()));
        assert!(r <= 1e-10, "{r}");
        assert!(sherman_morrison_steps(&g, &delta).unwrap().iter().all(|&x| x < 1e-10));
    }

    #[test]
    fn random_suite_holds() {
        for r in random_identity_suite(12, 3) {
            let r = r.unwrap();
            assert!(r.max_residual() <= 1e-9, "{r:?}");
        }
    }
}
