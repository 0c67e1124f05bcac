//! Spectral data of the weighted transfer operator of the quotient map.
//!
//! The operator acts on functions over `[0, 1]` by
//!
//! ```text
//! (L_s f)(z) = sum_{n >= 1} (n + z)^{-s} f(1/(n + z))
//! ```
//!
//! At `s = 2` its leading eigenvalue is exactly 1 with eigenfunction
//! `1/(1+z)`; the first two derivatives of the leading eigenvalue `lambda(s)`
//! at `s = 2` give the drift and variance of the Birkhoff sums of `ln x`
//! under the invariant density, and from those the variance constant of the
//! digit-matching counter.
//!
//! Discretization: collocation on Chebyshev–Lobatto nodes with barycentric
//! interpolation, the first `M` branch terms summed explicitly and the rest
//! folded into Hurwitz-zeta tails through a first-order Taylor expansion of
//! `f` at 0.  The eigenvalue comes from power iteration (the spectral gap of
//! the operator is comfortable — second eigenvalue magnitude ~0.3), and the
//! derivatives from central differences with one Richardson sweep.
//!
//! This module is deliberately floating-point: its outputs feed Monte Carlo
//! normalization, not exact certificates.  Its own correctness is pinned by
//! three independently known quantities: `lambda(2) = 1`, the eigenfunction
//! `1/(1+z)`, and `lambda'(2) = -pi^2/(12 ln 2)`.

use crate::beta::BetaSystem;
use crate::bridge;
use crate::{Error, Result};

/// Discretization and iteration controls.
#[derive(Clone, Debug)]
pub struct SpectralParams {
    /// Polynomial degree: nodes are the `degree + 1` Lobatto points.
    pub degree: usize,
    /// Branches summed explicitly before the zeta tail takes over.
    pub explicit_terms: usize,
    /// Central-difference step in `s`.
    pub fd_step: f64,
    /// Power-iteration residual target.
    pub tolerance: f64,
    /// Power-iteration cap.
    pub max_iterations: usize,
    /// Bound allowed for the estimated tail-truncation error.
    pub tail_tolerance: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            degree: 32,
            explicit_terms: 2000,
            fd_step: 0.01,
            tolerance: 1e-13,
            max_iterations: 300,
            tail_tolerance: 1e-9,
        }
    }
}

/// Leading-eigenvalue data around `s = 2`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// `lambda(2)` (should be 1 to discretization accuracy).
    pub lambda: f64,
    /// `lambda'(2)` (should be minus the denominator growth rate).
    pub lambda_prime: f64,
    /// `lambda''(2)`.
    pub lambda_second: f64,
    /// Variance of the `ln x` Birkhoff sums: `lambda''(2) - lambda'(2)^2`.
    pub sigma1_sq: f64,
    /// Sup-norm residual of the converged eigenvector at `s = 2`.
    pub residual: f64,
    /// Power-iteration steps used at `s = 2`.
    pub iterations: usize,
}

/// Everything the Monte Carlo normalizations need, for one base.
#[derive(Clone, Debug)]
pub struct SigmaConstants {
    /// Almost-sure limit of `k_n/n`.
    pub lochs: f64,
    /// Almost-sure limit of `(ln q_m)/m`.
    pub levy: f64,
    /// Variance constant of the `ln x` Birkhoff sums.
    pub sigma1_sq: f64,
    /// Variance constant of the counter: `(lochs / levy^2) * sigma1_sq`.
    pub sigma_sq: f64,
    /// Its square root.
    pub sigma: f64,
}

/// Lobatto nodes mapped to `[0, 1]`, ascending: `x_j = (1 - cos(pi j/N))/2`.
fn lobatto_nodes(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()) / 2.0)
        .collect()
}

/// Barycentric weights for the Lobatto grid: `(-1)^j`, halved at both ends.
fn barycentric_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Values of all cardinal interpolants at `u`, by the barycentric formula.
fn cardinal_row(nodes: &[f64], weights: &[f64], u: f64, out: &mut [f64]) {
    for (j, x) in nodes.iter().enumerate() {
        if u == *x {
            out.fill(0.0);
            out[j] = 1.0;
            return;
        }
    }
    let mut denom = 0.0;
    for j in 0..nodes.len() {
        let term = weights[j] / (u - nodes[j]);
        out[j] = term;
        denom += term;
    }
    for v in out.iter_mut() {
        *v /= denom;
    }
}

/// Differentiation matrix on the Lobatto grid (row i: derivative at node i).
fn differentiation_matrix(nodes: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let mut d = vec![vec![0.0; m]; m];
    for i in 0..m {
        let mut diag = 0.0;
        for j in 0..m {
            if i != j {
                let v = (weights[j] / weights[i]) / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag -= v;
            }
        }
        d[i][i] = diag;
    }
    d
}

/// Hurwitz zeta `sum_{k>=0} (a+k)^{-s}` for real `s > 1`, `a > 0`, by direct
/// summation up to a comfortable offset plus Euler–Maclaurin corrections.
fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let mut sum = 0.0;
    let mut base = a;
    while base < 64.0 {
        sum += base.powf(-s);
        base += 1.0;
    }
    // Corrections at `base`: integral, half-term, and Bernoulli B2, B4, B6.
    let t_int = base.powf(1.0 - s) / (s - 1.0);
    let t_half = 0.5 * base.powf(-s);
    let t_b2 = s * base.powf(-s - 1.0) / 12.0;
    let t_b4 = -s * (s + 1.0) * (s + 2.0) * base.powf(-s - 3.0) / 720.0;
    let t_b6 =
        s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * base.powf(-s - 5.0) / 30240.0;
    sum + t_int + t_half + t_b2 + t_b4 + t_b6
}

/// Dense collocation matrix of the operator at parameter `s`.
fn build_matrix(s: f64, nodes: &[f64], weights: &[f64], d0: &[f64], m_terms: usize) -> Vec<Vec<f64>> {
    let dim = nodes.len();
    let mut mat = vec![vec![0.0; dim]; dim];
    let mut card = vec![0.0; dim];
    for i in 0..dim {
        let z = nodes[i];
        for n in 1..=m_terms {
            let npz = n as f64 + z;
            let w = npz.powf(-s);
            cardinal_row(nodes, weights, 1.0 / npz, &mut card);
            for j in 0..dim {
                mat[i][j] += w * card[j];
            }
        }
        // Tail via f(u) ~ f(0) + f'(0) u: node 0 sits at z = 0, so f(0) is
        // the 0th value and f'(0) the first differentiation row.
        let a = m_terms as f64 + 1.0 + z;
        let zeta_s = hurwitz_zeta(s, a);
        let zeta_s1 = hurwitz_zeta(s + 1.0, a);
        mat[i][0] += zeta_s;
        for j in 0..dim {
            mat[i][j] += zeta_s1 * d0[j];
        }
    }
    mat
}

fn apply(mat: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    for (i, row) in mat.iter().enumerate() {
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Leading eigenvalue and eigenvector by power iteration, warm-started from
/// the known `s = 2` eigenfunction.
fn leading_eigen(
    mat: &[Vec<f64>],
    nodes: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let dim = nodes.len();
    let mut v: Vec<f64> = nodes.iter().map(|z| 1.0 / (1.0 + z)).collect();
    let mut w = vec![0.0; dim];
    let mut lambda;
    for iter in 1..=max_iter {
        apply(mat, &v, &mut w);
        let num: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        lambda = num / den;
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..dim {
            residual = residual.max((w[i] - lambda * v[i]).abs());
            scale = scale.max(v[i].abs());
        }
        let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for x in w.iter_mut() {
            *x /= norm;
        }
        std::mem::swap(&mut v, &mut w);
        if residual <= tol * scale.max(1.0) {
            return Ok((lambda, v, residual, iter));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: f64::NAN,
    })
}

/// Compute the eigenvalue data around `s = 2`.
pub fn spectral_data(params: &SpectralParams) -> Result<SpectralData> {
    if params.degree < 8 || params.explicit_terms < 16 {
        return Err(Error::invalid("discretization too coarse"));
    }
    let n = params.degree;
    let nodes = lobatto_nodes(n);
    let weights = barycentric_weights(n);
    let dmat = differentiation_matrix(&nodes, &weights);
    let d0 = dmat[0].clone();
    let h = params.fd_step;

    let lambda_at = |s: f64| -> Result<(f64, Vec<f64>, f64, usize)> {
        let mat = build_matrix(s, &nodes, &weights, &d0, params.explicit_terms);
        leading_eigen(&mat, &nodes, params.tolerance, params.max_iterations)
    };

    let (l0, vec0, residual, iterations) = lambda_at(2.0)?;
    // Estimated truncation error of the linear tail: the neglected quadratic
    // term is below max|f''| / 2 * zeta(s+2, M+1) for the converged vector.
    let mut d1 = vec![0.0; n + 1];
    let mut d2 = vec![0.0; n + 1];
    apply(&dmat, &vec0, &mut d1);
    apply(&dmat, &d1, &mut d2);
    let f2max = d2.iter().take(4).fold(0.0f64, |m, x| m.max(x.abs()));
    let tail_bound =
        0.5 * f2max * hurwitz_zeta(4.0, params.explicit_terms as f64 + 1.0);
    if tail_bound > params.tail_tolerance {
        return Err(Error::TailBoundTooLarge {
            bound: tail_bound,
            tolerance: params.tail_tolerance,
        });
    }

    let (lph, _, _, _) = lambda_at(2.0 + h)?;
    let (lmh, _, _, _) = lambda_at(2.0 - h)?;
    let (lph2, _, _, _) = lambda_at(2.0 + h / 2.0)?;
    let (lmh2, _, _, _) = lambda_at(2.0 - h / 2.0)?;

    // Central differences at steps h and h/2, then one Richardson sweep.
    let d_h = (lph - lmh) / (2.0 * h);
    let d_h2 = (lph2 - lmh2) / h;
    let lambda_prime = (4.0 * d_h2 - d_h) / 3.0;
    let s_h = (lph - 2.0 * l0 + lmh) / (h * h);
    let s_h2 = (lph2 - 2.0 * l0 + lmh2) / (h * h / 4.0);
    let lambda_second = (4.0 * s_h2 - s_h) / 3.0;

    let sigma1_sq = lambda_second - lambda_prime * lambda_prime;
    if sigma1_sq <= 0.0 {
        return Err(Error::NegativeVariance(sigma1_sq));
    }
    Ok(SpectralData {
        lambda: l0,
        lambda_prime,
        lambda_second,
        sigma1_sq,
        residual,
        iterations,
    })
}

/// Maximum relative deviation of the computed fixed function at `s = 2`
/// from the known invariant density `1/(1+z)`, after matching
/// normalization at the first node.
pub fn gauss_density_deviation(params: &SpectralParams) -> Result<f64> {
    let nodes = lobatto_nodes(params.degree);
    let weights = barycentric_weights(params.degree);
    let dmat = differentiation_matrix(&nodes, &weights);
    let mat = build_matrix(2.0, &nodes, &weights, &dmat[0], params.explicit_terms);
    let (_, v, _, _) = leading_eigen(&mat, &nodes, params.tolerance, params.max_iterations)?;
    let scale = v[0];
    let mut worst = 0.0f64;
    for (z, val) in nodes.iter().zip(&v) {
        let expect = 1.0 / (1.0 + z);
        worst = worst.max((val / scale - expect).abs() / expect);
    }
    Ok(worst)
}

/// Variance constants for the counter under one base, combining the spectral
/// variance with the base's growth constants.
pub fn sigma_constants(system: &BetaSystem, params: &SpectralParams) -> Result<SigmaConstants> {
    let spectral = spectral_data(params)?;
    sigma_constants_from(system, &spectral)
}

/// Same combination, reusing an already-computed spectral solve.
pub fn sigma_constants_from(system: &BetaSystem, spectral: &SpectralData) -> Result<SigmaConstants> {
    let consts = bridge::constants(system)?;
    let lochs = consts.lochs.to_f64();
    let levy = consts.levy.to_f64();
    let sigma_sq = lochs / (levy * levy) * spectral.sigma1_sq;
    if sigma_sq <= 0.0 || !sigma_sq.is_finite() {
        return Err(Error::NegativeVariance(sigma_sq));
    }
    Ok(SigmaConstants {
        lochs,
        levy,
        sigma1_sq: spectral.sigma1_sq,
        sigma_sq,
        sigma: sigma_sq.sqrt(),
    })
}
