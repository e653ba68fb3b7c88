//! Stability exponents, quantitative constants, epsilon-dependent scales,
//! and the elementary parameter relations that the geometric construction
//! relies on.
//!
//! The exponent chain for steepness indices alpha_1..alpha_{n-1}:
//!   p_j = alpha_j ... alpha_{n-2},
//!   a_{n-1} = 1,  a_{n-2} = n(alpha_{n-2}-1)+1,
//!   a_j = n p_{j+1}(alpha_j - 1) + 1  (j <= n-3),
//!   q_{n-1} = 1,  q_j = q_{j+1} + a_j,
//! with the closed form q_j = n p_j - j, and the stability exponents
//! a = 1/(2 n p_1), b = a/alpha_{n-1}.
//!
//! The headline threshold eps0 underflows binary64 already for moderate n,
//! so every quantity derived from it is carried in log space alongside its
//! (possibly underflowed) f64 value.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::lattice::Lattice;
use crate::steepness::SteepnessProfile;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Analyticity and regularity data of a model on its domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticityEnvelope {
    /// Angle-analyticity width sigma.
    pub sigma: f64,
    /// Lower bound on |omega(I)| over the domain.
    pub omega_min: f64,
    /// Upper bound on |omega(I)| over the domain.
    pub omega_max: f64,
    /// Lipschitz constant of the frequency map on the extended domain.
    pub lipschitz_m: f64,
    /// Fourier norm of the perturbation.
    pub f_norm: f64,
    /// Which fields came from sampling or bounds rather than exact values.
    pub sampled_fields: Vec<String>,
}

impl AnalyticityEnvelope {
    pub fn new(
        sigma: f64,
        omega_min: f64,
        omega_max: f64,
        lipschitz_m: f64,
        f_norm: f64,
        sampled_fields: Vec<String>,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(CoreError::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
        }
        if !(omega_min > 0.0 && omega_min <= omega_max) {
            return Err(CoreError::InvalidArgument(format!(
                "need 0 < omega_min <= omega_max, got {omega_min}, {omega_max}"
            )));
        }
        if !(lipschitz_m > 0.0) {
            return Err(CoreError::InvalidArgument(format!("Lipschitz M must be > 0, got {lipschitz_m}")));
        }
        if !(f_norm >= 0.0) {
            return Err(CoreError::InvalidArgument(format!("f_norm must be >= 0, got {f_norm}")));
        }
        Ok(Self { sigma, omega_min, omega_max, lipschitz_m, f_norm, sampled_fields })
    }
}

/// The full exponent chain for given steepness indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentTable {
    pub n: usize,
    pub alphas: Vec<f64>,
    /// p_j = alpha_j ... alpha_{n-2}, j = 1..n-2.
    pub p: Vec<f64>,
    /// q_j, j = 1..n-1 (q_{n-1} = 1).
    pub q: Vec<f64>,
    /// a_j gaps, j = 1..n-1 (a_{n-1} = 1).
    pub a_gaps: Vec<f64>,
    /// beta_j = alpha_j + j(alpha_j - 1), j = 1..n-2.
    pub betas: Vec<f64>,
    /// Stability exponent a = 1/(2 n p_1).
    pub a: f64,
    /// Stability exponent b = a / alpha_{n-1}.
    pub b: f64,
}

impl ExponentTable {
    pub fn q_j(&self, j: usize) -> f64 {
        self.q[j - 1]
    }

    pub fn a_j(&self, j: usize) -> f64 {
        self.a_gaps[j - 1]
    }
}

fn validate_alphas(n: usize, alphas: &[f64]) -> Result<()> {
    if n < 3 {
        return Err(CoreError::InvalidArgument(format!("need n >= 3 degrees of freedom, got {n}")));
    }
    if alphas.len() != n - 1 {
        return Err(CoreError::DimensionMismatch { expected: n - 1, got: alphas.len() });
    }
    if let Some(bad) = alphas.iter().find(|&&a| !(a >= 1.0)) {
        return Err(CoreError::InvalidArgument(format!("steepness indices must be >= 1, got {bad}")));
    }
    Ok(())
}

/// Builds the exponent chain and cross-checks the recursion against the
/// closed form `q_j = n p_j - j`.
pub fn exponents(n: usize, alphas: &[f64]) -> Result<ExponentTable> {
    validate_alphas(n, alphas)?;
    // p_j, 1-based j in 1..=n-2 stored at index j-1
    let mut p = vec![1.0f64; n - 2];
    for j in (0..n - 2).rev() {
        p[j] = alphas[j] * if j + 1 < n - 2 { p[j + 1] } else { 1.0 };
    }
    let mut a_gaps = vec![1.0f64; n - 1];
    a_gaps[n - 2] = 1.0;
    if n >= 3 {
        a_gaps[n - 3] = n as f64 * (alphas[n - 3] - 1.0) + 1.0;
    }
    for j in (0..n.saturating_sub(3)).rev() {
        a_gaps[j] = n as f64 * p[j + 1] * (alphas[j] - 1.0) + 1.0;
    }
    let mut q = vec![0.0f64; n - 1];
    q[n - 2] = 1.0;
    for j in (0..n - 2).rev() {
        q[j] = q[j + 1] + a_gaps[j];
    }
    // closed-form cross-check (exact in f64 for integer indices)
    for j in 1..=n - 2 {
        let closed = n as f64 * p[j - 1] - j as f64;
        let diff = (q[j - 1] - closed).abs();
        let integral = alphas.iter().all(|a| a.fract() == 0.0);
        let tol = if integral { 0.0 } else { 1e-9 * closed.abs().max(1.0) };
        if diff > tol {
            return Err(CoreError::Precondition(format!(
                "exponent recursion disagrees with closed form at j={j}: {} vs {closed}",
                q[j - 1]
            )));
        }
    }
    let betas: Vec<f64> = (1..=n - 2).map(|j| alphas[j - 1] + j as f64 * (alphas[j - 1] - 1.0)).collect();
    let a = 1.0 / (2.0 * n as f64 * p[0]);
    let b = a / alphas[n - 2];
    Ok(ExponentTable { n, alphas: alphas.to_vec(), p, q, a_gaps, betas, a, b })
}

/// The explicit constants of the stability theorem. Quantities derived from
/// `eps0` carry a log-space companion because they underflow f64 quickly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantSet {
    /// Diameter coefficients l_j, j = 1..n-1.
    pub l: Vec<f64>,
    pub e_const: f64,
    /// ln E; `e_const` itself overflows once q_1 (alpha_1 - 1) is large.
    pub ln_e_const: f64,
    /// A = 6 E.
    pub a_const: f64,
    pub eps0: f64,
    pub ln_eps0: f64,
    pub eps_star: f64,
    pub ln_eps_star: f64,
    /// Deformation coefficient c = eps0^a * sigma/6.
    pub c: f64,
    /// Confinement coefficient R: drift radius is 2 R eps^b.
    pub r_confine: f64,
    pub ln_r_confine: f64,
    /// Time coefficient: stability time is (T/sqrt(eps)) exp(K sigma / 6).
    pub t: f64,
    pub ln_t: f64,
    pub mu0: f64,
}

/// Evaluates l_j, E, A and the headline constants from the steepness profile
/// and the analyticity envelope.
pub fn derived_constants(profile: &SteepnessProfile, env: &AnalyticityEnvelope) -> Result<ConstantSet> {
    let table = exponents(profile.n, &profile.alphas)?;
    let n = profile.n as f64;
    let (om, obar, m, delta, sigma) =
        (env.omega_min, env.omega_max, env.lipschitz_m, profile.delta, env.sigma);

    let l: Vec<f64> = (0..profile.n - 1)
        .map(|idx| {
            let alpha = profile.alphas[idx];
            let c = profile.coeffs[idx];
            (om / m) * (c / om).powf(1.0 / alpha)
                + 4.0 * (2.0 * (2.0 * obar + m * delta) / om).powf(1.0 / alpha)
        })
        .collect();

    let lambda_bar = om / (2.0 * SQRT2);
    // ln-space max: the 6^{q_j (alpha_j - 1)} factor overflows f64 well before
    // eps0 does.
    let mut ln_e_const = 4f64.ln();
    let mut e_const = 4.0f64;
    for j in 1..=profile.n - 2 {
        let alpha = profile.alphas[j - 1];
        let c = profile.coeffs[j - 1];
        let beta = table.betas[j - 1];
        let ln_val = (alpha * (4.0 * m * l[j - 1]).ln() + table.q[j - 1] * (alpha - 1.0) * 6f64.ln()
            - c.ln()
            - (alpha - 1.0) * lambda_bar.ln())
            / beta;
        ln_e_const = ln_e_const.max(ln_val);
        // linear recomputation keeps benign cases exact (no exp(ln x) detour)
        let val = ((4.0 * m * l[j - 1]).powf(alpha) * 6.0f64.powf(table.q[j - 1] * (alpha - 1.0))
            / (c * lambda_bar.powf(alpha - 1.0)))
            .powf(1.0 / beta);
        e_const = e_const.max(val);
    }
    if !e_const.is_finite() {
        e_const = ln_e_const.exp();
    }
    let a_const = 6.0 * e_const;

    let np1 = n * table.p[0];
    let ln_eps0 = -8.0 * 2f64.ln() - (4.0 * np1 - 5.0) * 6f64.ln() - (2.0 * np1 - 1.0) * ln_e_const
        + (om * om / (m * env.f_norm)).ln();
    let eps0 = ln_eps0.exp();

    let last = profile.n - 2; // index of alpha_{n-1}, C_{n-1}, l_{n-1}
    let ln_factors = [
        (6.0 * SQRT2 * m * delta / (n * om)).ln() / table.b,
        (18.0 * SQRT2 / n).ln() / table.b,
        (profile.delta / (4.0 * n * l[last])).ln() / table.b
            + ((12.0 * SQRT2 * profile.coeffs[last] / om).ln() + ln_e_const) / table.a,
        (sigma / 6.0).ln() / table.a,
        0.0,
    ];
    let ln_min = ln_factors.iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
    let ln_eps_star = ln_eps0 + ln_min;
    let eps_star = ln_eps_star.exp();

    let c = (table.a * ln_eps0).exp() * sigma / 6.0;

    let mu0 = (om / (24.0 * SQRT2 * m * delta))
        .max(1.0 / (72.0 * SQRT2))
        .max((l[last] / delta)
            * (((om / (12.0 * SQRT2 * profile.coeffs[last])).ln() - ln_e_const)
                / profile.alphas[last])
                .exp());

    let ln_r_confine = (delta * n * mu0).ln() - table.b * ln_eps0;
    let r_confine = ln_r_confine.exp();

    let ln_t = (sigma / (24.0 * SQRT2)).ln() + om.ln()
        - (m.ln() + (6f64.ln() + ln_e_const) / table.a + 0.5 * ln_eps0 + env.f_norm.ln());
    let t = ln_t.exp();

    debug_assert!(ln_e_const >= 4f64.ln() && ln_eps_star <= ln_eps0);
    Ok(ConstantSet {
        l,
        e_const,
        ln_e_const,
        a_const,
        eps0,
        ln_eps0,
        eps_star,
        ln_eps_star,
        c,
        r_confine,
        ln_r_confine,
        t,
        ln_t,
        mu0,
    })
}

/// Everything that depends on the perturbation size eps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonScales {
    pub eps: f64,
    pub ln_eps: f64,
    /// Fourier cutoff K = (eps0/eps)^a.
    pub k: f64,
    pub ln_k: f64,
    /// Confinement radius r = 2 R eps^b.
    pub r: f64,
    /// Margin m = r/(2n).
    pub margin: f64,
    /// lambda_bar = omega_min/(2 sqrt 2).
    pub lambda_bar: f64,
    /// lambda_j = lambda_bar/(A K)^{q_j}, j = 1..n-1.
    pub lambda: Vec<f64>,
    /// Fast-drift radii r_j = l_j (lambda_j/C_j)^{1/alpha_j}, j = 1..n-1.
    pub r_drift: Vec<f64>,
    /// rho_0 = lambda_1/(2 M K).
    pub rho0: f64,
    pub t0: f64,
    pub ln_t0: f64,
    /// Worst-case stability times per resonance dimension (at |L| = K^j).
    pub t_j: Vec<f64>,
    pub ln_t_j: Vec<f64>,
    pub t_exp: f64,
    pub ln_t_exp: f64,
    /// Set when eps exceeds the applicability threshold eps_star.
    pub warning: Option<String>,
}

/// Computes the eps-dependent parameter set; `eps > eps_star` produces a
/// warning field rather than an error.
pub fn epsilon_scales(
    consts: &ConstantSet,
    table: &ExponentTable,
    env: &AnalyticityEnvelope,
    profile: &SteepnessProfile,
    eps: f64,
) -> Result<EpsilonScales> {
    if !(eps > 0.0) {
        return Err(CoreError::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    epsilon_scales_ln(consts, table, env, profile, eps.ln())
}

/// Log-space entry point for eps values that underflow f64.
pub fn epsilon_scales_ln(
    consts: &ConstantSet,
    table: &ExponentTable,
    env: &AnalyticityEnvelope,
    profile: &SteepnessProfile,
    ln_eps: f64,
) -> Result<EpsilonScales> {
    let n = profile.n;
    let warning = if ln_eps > consts.ln_eps_star {
        Some(format!(
            "eps (ln = {ln_eps:.6}) exceeds eps_star (ln = {:.6}); relations may fail",
            consts.ln_eps_star
        ))
    } else {
        None
    };
    let ln_k = table.a * (consts.ln_eps0 - ln_eps);
    let k = ln_k.exp();
    let r = (2f64.ln() + consts.ln_r_confine + table.b * ln_eps).exp();
    let margin = r / (2.0 * n as f64);
    let lambda_bar = env.omega_min / (2.0 * SQRT2);
    let ln_ak = 6f64.ln() + consts.ln_e_const + ln_k;
    // the lambda chain underflows f64 long before eps0 does; keep ln
    // companions alive throughout
    let ln_lambda: Vec<f64> =
        (1..=n - 1).map(|j| lambda_bar.ln() - table.q_j(j) * ln_ak).collect();
    let lambda: Vec<f64> = ln_lambda.iter().map(|&x| x.exp()).collect();
    let r_drift: Vec<f64> = (1..=n - 1)
        .map(|j| {
            consts.l[j - 1]
                * ((ln_lambda[j - 1] - profile.coeffs[j - 1].ln()) / profile.alphas[j - 1]).exp()
        })
        .collect();
    let ln_rho0 = ln_lambda[0] - (2.0 * env.lipschitz_m).ln() - ln_k;
    let rho0 = ln_rho0.exp();

    let ks6 = k * env.sigma / 6.0;
    let ln_t0 = (env.sigma / (5.0 * env.f_norm)).ln() + ln_rho0 - ln_eps + ks6;
    let ln_t_j: Vec<f64> = (1..=n - 1)
        .map(|j| {
            // T at the extremal lattice volume K^j of dimension j
            1.0 + (env.sigma / (24.0 * env.lipschitz_m * env.f_norm)).ln() + ln_lambda[j - 1]
                - j as f64 * ln_k
                - ln_eps
                + ks6
        })
        .collect();
    let ln_t_exp = ln_t_j.iter().fold(ln_t0, |acc, &x| acc.min(x));
    Ok(EpsilonScales {
        eps: ln_eps.exp(),
        ln_eps,
        k,
        ln_k,
        r,
        margin,
        lambda_bar,
        lambda,
        r_drift,
        rho0,
        t0: ln_t0.exp(),
        ln_t0,
        t_j: ln_t_j.iter().map(|x| x.exp()).collect(),
        ln_t_j: ln_t_j.clone(),
        t_exp: ln_t_exp.exp(),
        ln_t_exp,
        warning,
    })
}

/// Per-lattice scales for a maximal K-lattice of dimension j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeScales {
    pub dim: usize,
    pub volume: f64,
    /// Zone half-width delta_L = lambda_j / |L|.
    pub zone_width: f64,
    /// Fast-drift disc radius rho_L = delta_L / M.
    pub disc_radius: f64,
    /// Small-divisor floor alpha_L = (E K)^{a_j} delta_L.
    pub divisor_floor: f64,
    /// Extension cap d_L = alpha_L / (4 M K).
    pub ext_cap: f64,
    pub t_l: f64,
    pub ln_t_l: f64,
}

pub fn lattice_scales(
    scales: &EpsilonScales,
    consts: &ConstantSet,
    table: &ExponentTable,
    env: &AnalyticityEnvelope,
    lat: &Lattice,
) -> Result<LatticeScales> {
    let j = lat.dim;
    if j == 0 || j > table.n - 1 {
        return Err(CoreError::InvalidArgument(format!(
            "lattice dimension {j} outside 1..={}",
            table.n - 1
        )));
    }
    let zone_width = scales.lambda[j - 1] / lat.volume;
    let disc_radius = zone_width / env.lipschitz_m;
    let divisor_floor = (table.a_j(j) * (consts.ln_e_const + scales.ln_k)).exp() * zone_width;
    let ext_cap = divisor_floor / (4.0 * env.lipschitz_m * scales.k);
    let ln_t_l = 1.0 + (env.sigma / 24.0).ln() + disc_radius.ln() - scales.ln_eps - env.f_norm.ln()
        + scales.k * env.sigma / 6.0;
    Ok(LatticeScales {
        dim: j,
        volume: lat.volume,
        zone_width,
        disc_radius,
        divisor_floor,
        ext_cap,
        t_l: ln_t_l.exp(),
        ln_t_l,
    })
}

/// One verified inequality, reported as a slack ratio rhs/lhs (>= 1 passes).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCheck {
    pub name: &'static str,
    /// Canonical basis of the lattice the check was evaluated on, if any.
    pub lattice: Option<Vec<Vec<i64>>>,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub eps: f64,
    pub checks: Vec<RelationCheck>,
    pub all_pass: bool,
}

const SLACK_TOL: f64 = 1e-10;

fn check(name: &'static str, lattice: Option<&Lattice>, slack: f64) -> RelationCheck {
    RelationCheck {
        name,
        lattice: lattice.map(|l| l.basis.clone()),
        slack,
        pass: slack >= 1.0 - SLACK_TOL,
    }
}

/// Evaluates the twelve elementary inequalities behind the covering
/// construction for the given eps and lattice sample. Each check records the
/// slack ratio (bound side over constrained side).
pub fn verify_parameter_relations(
    consts: &ConstantSet,
    table: &ExponentTable,
    env: &AnalyticityEnvelope,
    profile: &SteepnessProfile,
    eps: f64,
    lattice_sample: &[Lattice],
) -> Result<RelationReport> {
    if !(eps > 0.0) {
        return Err(CoreError::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    let s = epsilon_scales(consts, table, env, profile, eps)?;
    let n = profile.n;
    let mut checks = Vec::new();

    // A large enough for the divisor-floor bootstrap
    let mut rhs_a: f64 = 0.0;
    for j in 1..=n - 1 {
        let aj = table.a_j(j);
        let e_aj = consts.e_const.powf(aj);
        rhs_a = rhs_a
            .max(((e_aj + 1.0).powi(2) + 1.0).powf(1.0 / (2.0 * aj)))
            .max((4.0 / e_aj + 2.0).powf(1.0 / aj));
    }
    checks.push(check("divisor-floor bootstrap (A large enough)", None, consts.a_const / rhs_a));

    // cutoff large enough for the exponential remainder
    checks.push(check("cutoff-analyticity (K sigma >= 6)", None, s.k * env.sigma / 6.0));

    // drift radii fit inside the margin
    let r_max = s.r_drift.iter().fold(s.rho0, |a: f64, &x| a.max(x));
    checks.push(check("drift radii within margin", None, s.margin / r_max));
    checks.push(check("rho0 within steepness radius", None, profile.delta / s.rho0));
    let r_sum: f64 = s.rho0 + s.r_drift.iter().sum::<f64>();
    checks.push(check("drift radii sum within half confinement", None, (s.r / 2.0) / r_sum));
    checks.push(check("confinement radius within half extension", None, (profile.delta / 2.0) / s.r));

    for lat in lattice_sample {
        let ls = lattice_scales(&s, consts, table, env, lat)?;
        let j = ls.dim;
        checks.push(check(
            "disc radius within margin and cap",
            Some(lat),
            (s.margin / 2.0).min(ls.ext_cap) / ls.disc_radius,
        ));
        checks.push(check("extension cap within steepness radius", Some(lat), profile.delta / ls.ext_cap));
        if j <= n - 2 {
            let rhs = ((env.omega_min / profile.delta) * (s.margin / 4.0))
                .min((env.omega_min / (2.0 * profile.delta)) * (s.margin - ls.disc_radius))
                .min(s.lambda_bar);
            checks.push(check("zone width within transversality bound", Some(lat), rhs / ls.zone_width));
            let lhs = s.k
                * env.lipschitz_m
                * consts.l[j - 1]
                * (ls.zone_width / profile.coeffs[j - 1]).powf(1.0 / profile.alphas[j - 1]);
            checks.push(check("drift diameter within quarter floor", Some(lat), (ls.divisor_floor / 4.0) / lhs));
        }
        let rhs = (s.lambda[0] * s.rho0 / (256.0 * s.k))
            .min(ls.divisor_floor * ls.disc_radius / (512.0 * s.k))
            .min(ls.divisor_floor * ls.ext_cap / (512.0 * s.k));
        checks.push(check("perturbation below non-resonant threshold", Some(lat), rhs / (eps * env.f_norm)));
    }

    // stability time dominates the advertised exponential bound (log-space)
    let ln_rhs = consts.ln_t - 0.5 * s.ln_eps + s.k * env.sigma / 6.0;
    checks.push(check("exponential time bound", None, (s.ln_t_exp - ln_rhs).exp()));

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(RelationReport { eps, checks, all_pass })
}

/// The 1975/1977 exponents for comparison with the improved ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponents1977 {
    pub zeta: f64,
    pub a_old: f64,
    pub b_old: f64,
    /// Improvement ratio a_new / a_old for the same indices.
    pub improvement: f64,
}

/// Evaluates the original nested exponent formula. The nesting is only fully
/// defined for n >= 5; `strict` rejects smaller n, otherwise the empty chain
/// collapses to the innermost bracket.
pub fn nekhoroshev_1977_exponents(n: usize, alphas: &[f64], strict: bool) -> Result<Exponents1977> {
    validate_alphas(n, alphas)?;
    if strict && n < 5 {
        return Err(CoreError::Precondition(format!(
            "the nested 1977 exponent formula requires n >= 5 in strict mode, got {n}"
        )));
    }
    // s_{n-2} = n alpha_{n-2} + (n-2); s_i = alpha_i s_{i+1} + i
    let mut s = n as f64 * alphas[n - 3] + (n - 2) as f64;
    for i in (1..=n - 3).rev() {
        s = alphas[i - 1] * s + i as f64;
    }
    let zeta = s - 1.0;
    let a_old = 2.0 / (12.0 * zeta + 3.0 * n as f64 + 14.0);
    let b_old = 3.0 * a_old / (2.0 * alphas[n - 2]);
    let table = exponents(n, alphas)?;
    Ok(Exponents1977 { zeta, a_old, b_old, improvement: table.a / a_old })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_maximal_lattices, DEFAULT_ENUM_BUDGET};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_profile() -> SteepnessProfile {
        SteepnessProfile::new(3, vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap()
    }

    fn reference_env() -> AnalyticityEnvelope {
        AnalyticityEnvelope::new(1.0, 1.0, 2.0, 1.0, 1.0, vec![]).unwrap()
    }

    #[test]
    fn exponent_examples() {
        let t = exponents(3, &[1.0, 1.0]).unwrap();
        assert_eq!(t.p, vec![1.0]);
        assert_eq!(t.q, vec![2.0, 1.0]);
        assert_eq!(t.a_gaps, vec![1.0, 1.0]);
        assert_eq!(t.a, 1.0 / 6.0);
        assert_eq!(t.b, 1.0 / 6.0);

        let t = exponents(4, &[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.p, vec![2.0, 1.0]);
        assert_eq!(t.q, vec![7.0, 2.0, 1.0]);
        assert_eq!(t.a_gaps, vec![5.0, 1.0, 1.0]);
        assert_eq!(t.a, 1.0 / 16.0);
        assert_eq!(t.b, 1.0 / 16.0);

        let t = exponents(3, &[2.0, 1.0]).unwrap();
        assert_eq!(t.p, vec![2.0]);
        assert_eq!(t.q, vec![5.0, 1.0]);
        assert_eq!(t.a_gaps, vec![4.0, 1.0]);
        assert_eq!(t.a, 1.0 / 12.0);
        assert_eq!(t.b, 1.0 / 12.0);
    }

    #[test]
    fn exponent_preconditions() {
        assert!(exponents(2, &[1.0]).is_err());
        assert!(exponents(3, &[0.5, 1.0]).is_err());
        assert!(exponents(3, &[1.0]).is_err());
    }

    #[test]
    fn reference_constants() {
        let consts = derived_constants(&reference_profile(), &reference_env()).unwrap();
        assert_eq!(consts.l, vec![41.0, 41.0]);
        assert_eq!(consts.e_const, 164.0);
        assert_eq!(consts.a_const, 984.0);
        let expected_eps0 = 1.0 / (256.0 * 6f64.powi(7) * 164f64.powi(5));
        assert_relative_eq!(consts.eps0, expected_eps0, max_relative = 1e-12);
        // binding factor is (sigma/6)^{1/a} = 6^{-6}
        assert_relative_eq!(consts.eps_star, expected_eps0 / 6f64.powi(6), max_relative = 1e-12);
        assert!(consts.eps_star <= consts.eps0);
        assert_relative_eq!(consts.mu0, 1.0 / (24.0 * SQRT2), max_relative = 1e-12);
    }

    #[test]
    fn e_has_floor_four() {
        // tiny Lipschitz constant drives the max into its floor
        let profile = SteepnessProfile::new(3, vec![1.0, 1.0], vec![100.0, 100.0], 1.0).unwrap();
        let env = AnalyticityEnvelope::new(1.0, 100.0, 100.0, 1e-6, 1.0, vec![]).unwrap();
        let consts = derived_constants(&profile, &env).unwrap();
        // the formula value tends to 4 from above as M -> 0; the floor pins
        // the result at 4 + O(M)
        assert!(consts.e_const >= 4.0);
        assert_relative_eq!(consts.e_const, 4.0, max_relative = 1e-5);
        assert_relative_eq!(consts.a_const, 24.0, max_relative = 1e-5);
    }

    #[test]
    fn cutoff_examples() {
        let profile = reference_profile();
        let env = reference_env();
        let consts = derived_constants(&profile, &env).unwrap();
        let table = exponents(3, &[1.0, 1.0]).unwrap();
        let s = epsilon_scales(&consts, &table, &env, &profile, consts.eps0).unwrap();
        assert_relative_eq!(s.k, 1.0, max_relative = 1e-12);
        assert!(s.warning.is_some());

        let s = epsilon_scales(&consts, &table, &env, &profile, consts.eps0 / 64.0).unwrap();
        assert_relative_eq!(s.k, 2.0, max_relative = 1e-12);

        let s = epsilon_scales(&consts, &table, &env, &profile, consts.eps_star).unwrap();
        assert_relative_eq!(s.k, 6.0, max_relative = 1e-12);
        assert!(s.warning.is_none());
        assert!(s.lambda[0] < s.lambda[1] && s.lambda[1] < s.lambda_bar);
    }

    #[test]
    fn lattice_scale_examples() {
        let profile = reference_profile();
        let env = reference_env();
        let consts = derived_constants(&profile, &env).unwrap();
        let table = exponents(3, &[1.0, 1.0]).unwrap();
        let s = epsilon_scales(&consts, &table, &env, &profile, consts.eps_star).unwrap();
        let axis = crate::lattice::canonical_lattice(&[vec![1, 0, 0]]).unwrap();
        let ls = lattice_scales(&s, &consts, &table, &env, &axis).unwrap();
        assert_eq!(ls.zone_width, s.lambda[0]);
        assert_relative_eq!(
            ls.divisor_floor / ls.zone_width,
            (consts.e_const * s.k).powf(table.a_j(1)),
            max_relative = 1e-12
        );
        // independent recomputation of the chain
        let k = (consts.eps0 / consts.eps_star).powf(1.0 / 6.0);
        let lam1 = (env.omega_min / (2.0 * SQRT2)) / (consts.a_const * k).powf(2.0);
        assert_relative_eq!(ls.zone_width, lam1, max_relative = 1e-12);
        assert_relative_eq!(ls.disc_radius, lam1 / env.lipschitz_m, max_relative = 1e-12);
        assert_relative_eq!(
            ls.divisor_floor,
            (consts.e_const * k) * lam1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn relations_pass_below_threshold() {
        let profile = reference_profile();
        let env = reference_env();
        let consts = derived_constants(&profile, &env).unwrap();
        let table = exponents(3, &[1.0, 1.0]).unwrap();
        let eps = consts.eps_star / 2.0;
        let s = epsilon_scales(&consts, &table, &env, &profile, eps).unwrap();
        let k_cut = s.k.floor() as u32;
        let mut lats = enumerate_maximal_lattices(3, k_cut, 1, DEFAULT_ENUM_BUDGET).unwrap();
        lats.extend(enumerate_maximal_lattices(3, k_cut, 2, DEFAULT_ENUM_BUDGET).unwrap());
        let report = verify_parameter_relations(&consts, &table, &env, &profile, eps, &lats).unwrap();
        for c in &report.checks {
            assert!(c.pass, "relation '{}' failed with slack {}", c.name, c.slack);
        }
        assert!(report.all_pass);
    }

    #[test]
    fn cutoff_relation_fails_above_threshold() {
        let profile = reference_profile();
        let env = reference_env();
        let consts = derived_constants(&profile, &env).unwrap();
        let table = exponents(3, &[1.0, 1.0]).unwrap();
        let report =
            verify_parameter_relations(&consts, &table, &env, &profile, consts.eps0, &[]).unwrap();
        let ks = report.checks.iter().find(|c| c.name.contains("K sigma")).unwrap();
        assert!(!ks.pass);
        assert_relative_eq!(ks.slack, 1.0 / 6.0, max_relative = 1e-12);
        let a_check = report.checks.iter().find(|c| c.name.contains("A large")).unwrap();
        assert!(a_check.pass);
        assert!(!report.all_pass);
    }

    #[test]
    fn scale_monotonicity() {
        let profile = reference_profile();
        let env = reference_env();
        let consts = derived_constants(&profile, &env).unwrap();
        let table = exponents(3, &[1.0, 1.0]).unwrap();
        let mut prev_k = f64::INFINITY;
        let mut prev_r = 0.0;
        for i in 1..=8 {
            let eps = consts.eps_star * (i as f64) / 8.0;
            let s = epsilon_scales(&consts, &table, &env, &profile, eps).unwrap();
            assert!(s.k < prev_k, "K not strictly decreasing");
            assert!(s.r > prev_r, "r not strictly increasing");
            prev_k = s.k;
            prev_r = s.r;
        }
    }

    #[test]
    fn log_space_survives_underflow() {
        // large n drives eps0 far below the f64 underflow threshold
        let n = 12;
        let alphas = vec![3.0; n - 1];
        let coeffs = vec![1.0; n - 1];
        let profile = SteepnessProfile::new(n, alphas.clone(), coeffs, 1.0).unwrap();
        let env = reference_env();
        let consts = derived_constants(&profile, &env).unwrap();
        assert!(consts.ln_eps0 < -600.0);
        assert_eq!(consts.eps0, 0.0); // underflowed as f64, by design
        assert!(consts.ln_eps0.is_finite() && consts.ln_eps_star.is_finite());
        assert!(consts.ln_t.is_finite());
        let table = exponents(n, &alphas).unwrap();
        let s = epsilon_scales_ln(&consts, &table, &env, &profile, consts.ln_eps_star - 6f64.ln() / table.a)
            .unwrap();
        assert_relative_eq!(s.k, 36.0, max_relative = 1e-9);
        assert!(s.ln_t_exp.is_finite());
    }

    #[test]
    fn exponents_1977_example() {
        let e = nekhoroshev_1977_exponents(5, &[1.0, 1.0, 1.0, 1.0], true).unwrap();
        assert_eq!(e.zeta, 10.0);
        assert_relative_eq!(e.a_old, 2.0 / 149.0, max_relative = 1e-15);
        assert_relative_eq!(e.b_old, 3.0 / 149.0, max_relative = 1e-15);

        // independent closed form: zeta = n prod(alpha) + sum_i i prod_{k<i} alpha_k - 1
        for alphas in [[1.0, 2.0, 1.0, 3.0], [2.0, 2.0, 2.0, 2.0], [1.0, 1.0, 4.0, 1.0]] {
            let n = 5;
            let e = nekhoroshev_1977_exponents(n, &alphas, true).unwrap();
            let prod: f64 = alphas[..n - 2].iter().product();
            let mut zeta = n as f64 * prod - 1.0;
            let mut pref = 1.0;
            for i in 1..=n - 2 {
                zeta += i as f64 * pref;
                pref *= alphas[i - 1];
            }
            assert_relative_eq!(e.zeta, zeta, max_relative = 1e-12);
        }
    }

    #[test]
    fn exponents_1977_modes() {
        assert!(nekhoroshev_1977_exponents(3, &[2.0, 1.0], true).is_err());
        let e = nekhoroshev_1977_exponents(3, &[2.0, 1.0], false).unwrap();
        assert_eq!(e.zeta, 6.0); // collapses to n alpha_1 per the convention
        let e = nekhoroshev_1977_exponents(4, &[2.0, 3.0, 1.0], false).unwrap();
        assert_eq!(e.zeta, 2.0 * (4.0 * 3.0 + 2.0)); // alpha_1 (n alpha_2 + 2)
    }

    #[test]
    fn exponents_1977_footnote_growth() {
        for n in [6usize, 7, 8] {
            let a_n = nekhoroshev_1977_exponents(n, &vec![1.0; n - 1], true).unwrap().a_old;
            let a_prev = nekhoroshev_1977_exponents(n - 1, &vec![1.0; n - 2], true).unwrap().a_old;
            let growth = 1.0 / a_n - 1.0 / a_prev;
            assert!(growth >= 6.0 * (n - 1) as f64 - 1e-9, "n={n}: growth {growth}");
        }
    }

    proptest! {
        /// Closed form q_j = n p_j - j holds exactly for integer indices, and
        /// q_1 + 1 = n p_1 = 1/(2a).
        #[test]
        fn closed_form_identity(n in 3usize..=8, seed in proptest::collection::vec(1u32..=4, 7)) {
            let alphas: Vec<f64> = seed[..n - 1].iter().map(|&x| x as f64).collect();
            let t = exponents(n, &alphas).unwrap();
            for j in 1..=n - 2 {
                prop_assert_eq!(t.q[j - 1], n as f64 * t.p[j - 1] - j as f64);
            }
            prop_assert_eq!(t.q[0] + 1.0, n as f64 * t.p[0]);
            let inv = 1.0 / (2.0 * t.a);
            prop_assert!(((t.q[0] + 1.0) - inv).abs() <= 1e-12 * inv);
            for j in 1..n - 1 {
                prop_assert!(t.q[j] < t.q[j - 1], "q not strictly decreasing");
            }
        }

        /// The improved exponent dominates the 1977 one.
        #[test]
        fn improvement_claim(n in 5usize..=9, seed in proptest::collection::vec(1u32..=3, 8)) {
            let alphas: Vec<f64> = seed[..n - 1].iter().map(|&x| x as f64).collect();
            let old = nekhoroshev_1977_exponents(n, &alphas, true).unwrap();
            let t = exponents(n, &alphas).unwrap();
            prop_assert!(t.a >= old.a_old);
            prop_assert!(old.improvement >= 1.0);
        }

        /// eps_star never exceeds eps0, and E >= 4 always.
        #[test]
        fn constant_bounds(om in 0.5f64..3.0, spread in 1.0f64..3.0, m in 0.5f64..4.0,
                           fnorm in 0.1f64..10.0, delta in 0.2f64..2.0, sigma in 0.2f64..2.0) {
            let profile = SteepnessProfile::new(3, vec![1.0, 2.0], vec![0.7, 1.3], delta).unwrap();
            let env = AnalyticityEnvelope::new(sigma, om, om * spread, m, fnorm, vec![]).unwrap();
            let consts = derived_constants(&profile, &env).unwrap();
            prop_assert!(consts.e_const >= 4.0);
            prop_assert!(consts.ln_eps_star <= consts.ln_eps0 + 1e-12);
        }
    }
}
