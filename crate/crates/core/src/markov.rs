//! Transition matrices of absorption-scaled walks, the absorbing chain behind
//! them, fundamental matrices and stationary distributions.
//!
//! All matrices are column-stochastic: column `j` is the distribution of the
//! next state given the current state `j`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::graph::{scaled_laplacian, scaled_rate_vector, AbsorptionConfig, WeightedDigraph};
use crate::linalg::{self, ones};

pub const STOCHASTIC_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "t")]
pub enum TransitionKind {
    Linear(f64),
    Exponential(f64),
    PDelta,
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: DMatrix<f64>,
    kind: TransitionKind,
}

impl TransitionMatrix {
    /// Wraps a column-stochastic matrix, checking sums and signs.
    pub fn new(matrix: DMatrix<f64>, kind: TransitionKind) -> Result<Self> {
        check_column_stochastic(&matrix, STOCHASTIC_TOL)?;
        Ok(Self { matrix, kind })
    }

    pub fn raw(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix, TransitionKind::Raw)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.matrix[(to, from)]
    }
}

pub fn check_column_stochastic(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    for (j, col) in m.column_iter().enumerate() {
        if let Some(x) = col.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::NotStochastic(format!("column {j} has entry {x}")));
        }
        let s = col.sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::NotStochastic(format!("column {j} sums to {s}")));
        }
    }
    Ok(())
}

/// The standard random-walk input `A W^-1`.
pub fn random_walk(g: &WeightedDigraph) -> Result<TransitionMatrix> {
    TransitionMatrix::raw(g.random_walk_matrix()?)
}

/// Largest Markov time for which the linear input stays non-negative:
/// `1 / max_i ω_i / (h_i ω_i + δ_i)`.
pub fn linear_time_bound(g: &WeightedDigraph, cfg: &AbsorptionConfig) -> Result<f64> {
    let d = scaled_rate_vector(g, cfg)?;
    let worst = g
        .out_degrees()
        .iter()
        .zip(d.as_vector().iter())
        .map(|(w, d)| w / d)
        .fold(0.0, f64::max);
    Ok(if worst > 0.0 { 1.0 / worst } else { f64::INFINITY })
}

/// `P_l = I - t L̃(D_δ, H)`.
///
/// The bound is inclusive: at `t` equal to the bound the smallest diagonal
/// entry is exactly zero, which is how the standard input `A W^-1` is
/// recovered.
pub fn transition_linear(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    t: f64,
) -> Result<TransitionMatrix> {
    g.require_no_dangling()?;
    let bound = linear_time_bound(g, cfg)?;
    if !(t > 0.0 && t <= bound * (1.0 + 1e-12)) {
        return Err(Error::InfeasibleMarkovTime { t, bound });
    }
    let n = g.n();
    let mut p = DMatrix::identity(n, n) - scaled_laplacian(g, cfg)? * t;
    for i in 0..n {
        // the only entries that can dip below zero are diagonal, and only by roundoff at the bound
        if p[(i, i)] < 0.0 {
            p[(i, i)] = 0.0;
        }
    }
    TransitionMatrix::new(p, TransitionKind::Linear(t))
}

/// `P_e = exp(-t L̃(D_δ, H))`.
pub fn transition_exponential(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    t: f64,
) -> Result<TransitionMatrix> {
    g.require_no_dangling()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Markov time must be positive, got {t}"
        )));
    }
    let p = expm(&(scaled_laplacian(g, cfg)? * -t))?;
    TransitionMatrix::new(clean_stochastic(p)?, TransitionKind::Exponential(t))
}

/// Clamps roundoff negatives and renormalizes columns.
fn clean_stochastic(mut p: DMatrix<f64>) -> Result<DMatrix<f64>> {
    for (j, mut col) in p.column_iter_mut().enumerate() {
        for x in col.iter_mut() {
            if *x < -CLAMP_TOL {
                return Err(Error::NotStochastic(format!(
                    "column {j} has entry {x}, beyond roundoff"
                )));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let s = col.sum();
        col /= s;
    }
    Ok(p)
}

/// `P_δ = P_l(D_δ, I, 1) = D_r + Q`, the absorbing chain with absorption
/// replaced by a self-transition.
pub fn p_delta(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<TransitionMatrix> {
    let chain = absorbing_chain(g, delta)?;
    let p = chain.q() + DMatrix::from_diagonal(chain.r());
    TransitionMatrix::new(p, TransitionKind::PDelta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingChain {
    q: DMatrix<f64>,
    r: DVector<f64>,
}

impl AbsorbingChain {
    /// Transient-to-transient block `A (W + D_δ)^-1`.
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Absorption probabilities `δ_i / (ω_i + δ_i)`.
    pub fn r(&self) -> &DVector<f64> {
        &self.r
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }
}

pub fn absorbing_chain(g: &WeightedDigraph, delta: &DVector<f64>) -> Result<AbsorbingChain> {
    let cfg = AbsorptionConfig::uniform_h(delta.clone(), 1.0)?;
    let d = scaled_rate_vector(g, &cfg)?.into_vector();
    let q = linalg::scale_columns_inv(g.adjacency(), &d);
    let r = delta.component_div(&d);
    Ok(AbsorbingChain { q, r })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    n: DMatrix<f64>,
    t: DVector<f64>,
    n_hat: DMatrix<f64>,
}

impl FundamentalMatrix {
    /// `N = (I - Q)^-1`; entry `(i, j)` is the expected number of visits to
    /// `i` starting from `j` before absorption.
    pub fn n(&self) -> &DMatrix<f64> {
        &self.n
    }

    /// Expected steps before absorption from each start node, `Nᵀ 1`.
    pub fn t(&self) -> &DVector<f64> {
        &self.t
    }

    /// `N diag(t)^-1`; column `j` is the last-node-before-absorption
    /// distribution for a walk started at `j`.
    pub fn n_hat(&self) -> &DMatrix<f64> {
        &self.n_hat
    }
}

pub fn fundamental(chain: &AbsorbingChain) -> Result<FundamentalMatrix> {
    let n = chain.n();
    let n_mat = linalg::invert(&(DMatrix::identity(n, n) - chain.q()))?;
    let t = n_mat.transpose() * ones(n);
    let n_hat = linalg::scale_columns_inv(&n_mat, &t);
    Ok(FundamentalMatrix { n: n_mat, t, n_hat })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution(DVector<f64>);

impl StationaryDistribution {
    /// Validates a probability vector (non-negative, summing to 1 within 1e-12).
    pub fn new(p: DVector<f64>) -> Result<Self> {
        if let Some(x) = p.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidProbability(format!("entry {x}")));
        }
        let s = p.sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbability(format!("entries sum to {s}")));
        }
        Ok(Self(p))
    }

    /// Clamps roundoff negatives and renormalizes before validating.
    pub fn normalized(mut p: DVector<f64>) -> Result<Self> {
        let scale = linalg::vec_norm1(&p);
        for x in p.iter_mut() {
            if *x < 0.0 && *x > -1e-12 * scale {
                *x = 0.0;
            }
        }
        let s = p.sum();
        Self::new(p / s)
    }

    pub fn uniform(n: usize) -> Self {
        Self(DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `π_δ^(a) = N̂ π₀`: the distribution of the last node visited before absorption.
pub fn pi_delta_abs(
    fund: &FundamentalMatrix,
    pi0: &StationaryDistribution,
) -> Result<StationaryDistribution> {
    if pi0.len() != fund.n.nrows() {
        return Err(Error::DimensionMismatch {
            expected: fund.n.nrows(),
            found: pi0.len(),
        });
    }
    StationaryDistribution::normalized(fund.n_hat() * pi0.as_vector())
}

/// Stationary distribution of `P` by a bordered linear solve.
///
/// A unique stationary distribution is required (a single closed class).
/// Chains with transient nodes, such as a node without in-edges, are
/// accepted; their stationary mass is zero.
pub fn stationary(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = p.n();
    let m = DMatrix::identity(n, n) - p.matrix();
    let pi = linalg::normalized_kernel_vector(&m).map_err(|_| {
        Error::NotRegular("stationary distribution is not unique (several closed classes)".into())
    })?;
    let pi = StationaryDistribution::normalized(pi)
        .map_err(|e| Error::NotRegular(format!("stationary solve failed: {e}")))?;
    let resid = linalg::vec_norm1(&(p.matrix() * pi.as_vector() - pi.as_vector()));
    if resid > 1e-10 {
        return Err(Error::NotRegular(format!("stationary residual {resid:e}")));
    }
    Ok(pi)
}

/// Regularity test: some power of `P` is strictly positive.
///
/// Strong connectivity of the transition graph plus a positive diagonal entry
/// is sufficient; otherwise powers up to `(n-1)^2 + 1` (Wielandt's bound) are
/// checked.
pub fn is_regular(p: &TransitionMatrix) -> bool {
    let n = p.n();
    let support = p.matrix().map(|x| if x > 1e-15 { 1.0 } else { 0.0 });
    let Ok(g) = WeightedDigraph::with_self_edges(support.clone()) else {
        return false;
    };
    if !g.is_strongly_connected() {
        return false;
    }
    if (0..n).any(|i| support[(i, i)] > 0.0) {
        return true;
    }
    let limit = (n - 1) * (n - 1) + 1;
    let mut power = support.clone();
    for _ in 1..limit {
        if power.iter().all(|&x| x > 0.0) {
            return true;
        }
        power = (&power * &support).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
    }
    power.iter().all(|&x| x > 0.0)
}

/// `Z = (I - P + π 1ᵀ)^-1`.
pub fn regular_fundamental(p: &TransitionMatrix, pi: &StationaryDistribution) -> Result<DMatrix<f64>> {
    let n = p.n();
    if pi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pi.len(),
        });
    }
    let m = DMatrix::identity(n, n) - p.matrix() + pi.as_vector() * ones(n).transpose();
    linalg::invert(&m).map_err(|e| Error::NotRegular(e.to_string()))
}

/// Splits `P_δ = D_r + Q` back into its absorbing chain.
pub fn chain_of_p_delta(p: &TransitionMatrix) -> Result<AbsorbingChain> {
    if p.kind() != TransitionKind::PDelta {
        return Err(Error::InvalidParameter(format!(
            "expected a P_delta transition matrix, got {:?}",
            p.kind()
        )));
    }
    let r = p.matrix().diagonal();
    let mut q = p.matrix().clone();
    q.fill_diagonal(0.0);
    Ok(AbsorbingChain { q, r })
}

/// Expected time to the first self-transition of `P_δ` from each start node:
/// `θᵀ = 1ᵀ N`.
pub fn self_transition_times(p: &TransitionMatrix) -> Result<DVector<f64>> {
    let fund = fundamental(&chain_of_p_delta(p)?)?;
    Ok(fund.t().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    fn pair() -> WeightedDigraph {
        WeightedDigraph::from_undirected_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn three_node() -> WeightedDigraph {
        WeightedDigraph::from_adjacency(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
        ))
        .unwrap()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn linear_recovers_random_walk() {
        let g = WeightedDigraph::from_undirected_edges(
            4,
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5), (0, 2, 1.0)],
        )
        .unwrap();
        let ds = 0.3;
        let h = g.out_degrees().map(|w| ds * (w - 1.0) / w);
        let cfg = AbsorptionConfig::new(DVector::from_element(4, ds), h).unwrap();
        let p = transition_linear(&g, &cfg, ds).unwrap();
        assert!(close(p.matrix(), &g.random_walk_matrix().unwrap(), 1e-14));
    }

    #[test]
    fn linear_with_unit_h_is_p_delta() {
        let g = three_node();
        let delta = v(&[0.1, 10.0, 0.1]);
        let cfg = AbsorptionConfig::uniform_h(delta.clone(), 1.0).unwrap();
        let pl = transition_linear(&g, &cfg, 1.0).unwrap();
        let pd = p_delta(&g, &delta).unwrap();
        assert!(close(pl.matrix(), pd.matrix(), 1e-15));
    }

    #[test]
    fn infeasible_time() {
        let g = three_node();
        let cfg = AbsorptionConfig::unscaled(v(&[0.1, 0.1, 0.1])).unwrap();
        let bound = linear_time_bound(&g, &cfg).unwrap();
        assert!((bound - 0.05).abs() < 1e-15);
        assert!(matches!(
            transition_linear(&g, &cfg, 1.01 * bound),
            Err(Error::InfeasibleMarkovTime { .. })
        ));
        assert!(transition_linear(&g, &cfg, 0.0).is_err());
    }

    #[test]
    fn exponential_small_time_and_closed_form() {
        let g = pair();
        let cfg = AbsorptionConfig::uniform_h(v(&[1.0, 1.0]), 1.0).unwrap();
        let p = transition_exponential(&g, &cfg, 1e-14).unwrap();
        assert!(close(p.matrix(), &DMatrix::identity(2, 2), 1e-12));

        let p = transition_exponential(&g, &cfg, 1.0).unwrap();
        let e = (-1.0f64).exp();
        let expected = DMatrix::from_row_slice(2, 2, &[(1.0 + e) / 2.0, (1.0 - e) / 2.0, (1.0 - e) / 2.0, (1.0 + e) / 2.0]);
        assert!(close(p.matrix(), &expected, 1e-14));
    }

    #[test]
    fn exponential_matches_euler_product() {
        let g = three_node();
        let cfg = AbsorptionConfig::from_slices(&[0.1, 0.7, 0.3], &[0.5, 0.0, 2.0]).unwrap();
        let t = 0.8;
        let lt = scaled_laplacian(&g, &cfg).unwrap();
        let steps = 1 << 16;
        let step = DMatrix::identity(3, 3) - &lt * (t / steps as f64);
        let mut euler = DMatrix::identity(3, 3);
        for _ in 0..steps {
            euler = &step * euler;
        }
        let p = transition_exponential(&g, &cfg, t).unwrap();
        assert!(close(p.matrix(), &euler, 1e-3));
    }

    #[test]
    fn semigroup() {
        let g = three_node();
        let cfg = AbsorptionConfig::uniform_h(v(&[0.2, 1.0, 0.4]), 1.5).unwrap();
        let a = transition_exponential(&g, &cfg, 0.7).unwrap();
        let b = transition_exponential(&g, &cfg, 1.9).unwrap();
        let ab = transition_exponential(&g, &cfg, 2.6).unwrap();
        assert!(close(&(a.matrix() * b.matrix()), ab.matrix(), 1e-10));
    }

    #[test]
    fn absorbing_chain_examples() {
        let c = absorbing_chain(&pair(), &v(&[1.0, 1.0])).unwrap();
        assert!(close(c.q(), &(pair().adjacency() / 2.0), 1e-15));
        assert_eq!(c.r().as_slice(), &[0.5, 0.5]);

        let c = absorbing_chain(&pair(), &v(&[1e6, 1e6])).unwrap();
        assert!(c.q().max() < 1e-5);
        assert!(c.r().min() > 1.0 - 1e-5);

        // δ = (0.1, 10, 0.1), ω = (1, 2, 1)
        let c = absorbing_chain(&three_node(), &v(&[0.1, 10.0, 0.1])).unwrap();
        assert!((c.q()[(0, 1)] - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.q()[(2, 0)] - 1.0 / 1.1).abs() < 1e-15);
        assert!((c.r()[1] - 10.0 / 12.0).abs() < 1e-15);
        let sums = linalg::col_sums(c.q()) + c.r();
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn fundamental_pair() {
        let f = fundamental(&absorbing_chain(&pair(), &v(&[1.0, 1.0])).unwrap()).unwrap();
        let n = DMatrix::from_row_slice(2, 2, &[4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0]);
        assert!(close(f.n(), &n, 1e-14));
        assert_eq!(f.t().map(|x| (x * 1e12).round() / 1e12).as_slice(), &[2.0, 2.0]);
        let nh = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert!(close(f.n_hat(), &nh, 1e-14));

        let pi = pi_delta_abs(&f, &StationaryDistribution::new(v(&[1.0, 0.0])).unwrap()).unwrap();
        assert!((pi.as_vector()[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn fundamental_immediate_absorption() {
        let chain = AbsorbingChain {
            q: DMatrix::zeros(3, 3),
            r: DVector::from_element(3, 1.0),
        };
        let f = fundamental(&chain).unwrap();
        assert_eq!(f.n(), &DMatrix::identity(3, 3));
        assert_eq!(f.n_hat(), &DMatrix::identity(3, 3));
        let pi0 = StationaryDistribution::new(v(&[0.2, 0.3, 0.5])).unwrap();
        assert_eq!(pi_delta_abs(&f, &pi0).unwrap(), pi0);
    }

    #[test]
    fn fundamental_matches_neumann_series() {
        let c = absorbing_chain(&three_node(), &v(&[0.3, 0.5, 0.2])).unwrap();
        let f = fundamental(&c).unwrap();
        let mut sum = DMatrix::identity(3, 3);
        let mut term = DMatrix::identity(3, 3);
        while linalg::norm1(&term) > 1e-13 {
            term = c.q() * term;
            sum += &term;
        }
        assert!(close(f.n(), &sum, 1e-8));
    }

    #[test]
    fn stationary_examples() {
        let p = random_walk(&pair()).unwrap();
        assert!((stationary(&p).unwrap().as_vector()[0] - 0.5).abs() < 1e-15);

        let g = WeightedDigraph::from_undirected_edges(
            4,
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 0.5)],
        )
        .unwrap();
        let pi = stationary(&random_walk(&g).unwrap()).unwrap();
        let total: f64 = g.out_degrees().sum();
        for i in 0..4 {
            assert!((pi.as_vector()[i] - g.out_degrees()[i] / total).abs() < 1e-14);
        }

        let pd = p_delta(&three_node(), &v(&[0.1, 1.0, 0.1])).unwrap();
        let pi = stationary(&pd).unwrap();
        assert!(linalg::vec_norm1(&(pd.matrix() * pi.as_vector() - pi.as_vector())) <= 1e-12);
    }

    #[test]
    fn stationary_rejects_two_closed_classes() {
        let p = TransitionMatrix::raw(DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(stationary(&p), Err(Error::NotRegular(_))));
    }

    #[test]
    fn regularity() {
        assert!(!is_regular(&random_walk(&pair()).unwrap()));
        let p = TransitionMatrix::raw(DMatrix::from_element(2, 2, 0.5)).unwrap();
        assert!(is_regular(&p));
        // 3-cycle plus chord 0->2: strongly connected and aperiodic without self-loops
        let g = WeightedDigraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(is_regular(&random_walk(&g).unwrap()));
        assert!(!is_regular(&p_delta(&three_node(), &v(&[0.1, 0.1, 0.1])).unwrap()));
    }

    #[test]
    fn regular_fundamental_properties() {
        let pi = StationaryDistribution::new(v(&[0.2, 0.5, 0.3])).unwrap();
        let p = TransitionMatrix::raw(pi.as_vector() * ones(3).transpose()).unwrap();
        assert!(close(&regular_fundamental(&p, &pi).unwrap(), &DMatrix::identity(3, 3), 1e-14));

        let pd = p_delta(&three_node(), &v(&[0.1, 1.0, 0.1])).unwrap();
        let pi = stationary(&pd).unwrap();
        let z = regular_fundamental(&pd, &pi).unwrap();
        assert!(linalg::vec_norm1(&(&z * pi.as_vector() - pi.as_vector())) < 1e-10);
        assert!(linalg::vec_norm1(&(z.transpose() * ones(3) - ones(3))) < 1e-10);
    }

    #[test]
    fn self_transition_times_examples() {
        let pd = p_delta(&pair(), &v(&[1.0, 1.0])).unwrap();
        let theta = self_transition_times(&pd).unwrap();
        assert!((theta[0] - 2.0).abs() < 1e-14 && (theta[1] - 2.0).abs() < 1e-14);
        assert!(self_transition_times(&random_walk(&pair()).unwrap()).is_err());
    }
}
