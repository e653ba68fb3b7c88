//! Numerical falsification of the steepness condition.
//!
//! A frequency map omega is steep on a domain with indices alpha_j and
//! coefficients C_j if for every I, every proper subspace L orthogonal to
//! omega(I), and every radius 0 < xi <= delta,
//!
//!   max_{0 <= eta <= xi}  min_{u in L, |u| = eta}  |pi_L omega(I + u)|
//!     >=  C_j xi^{alpha_j},       j = dim L.
//!
//! The checker samples this minimax: the outer max over an eta grid, the
//! inner min over the sphere in L by multistart Nelder-Mead (comparisons
//! only, hence exactly covariant under scaling of omega). It gathers
//! evidence and counterexamples; it does not certify steepness.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::geometry::Subspace;

/// Steepness hypothesis data: indices, coefficients, and the steepness
/// radius delta (which doubles as the action-space extension width).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteepnessProfile {
    pub n: usize,
    /// alpha_1..alpha_{n-1}, each >= 1.
    pub alphas: Vec<f64>,
    /// C_1..C_{n-1}, each > 0.
    pub coeffs: Vec<f64>,
    /// delta > 0.
    pub delta: f64,
}

impl SteepnessProfile {
    pub fn new(n: usize, alphas: Vec<f64>, coeffs: Vec<f64>, delta: f64) -> Result<Self> {
        if n < 3 {
            return Err(CoreError::InvalidArgument(format!("need n >= 3, got {n}")));
        }
        if alphas.len() != n - 1 {
            return Err(CoreError::DimensionMismatch { expected: n - 1, got: alphas.len() });
        }
        if coeffs.len() != n - 1 {
            return Err(CoreError::DimensionMismatch { expected: n - 1, got: coeffs.len() });
        }
        if let Some(a) = alphas.iter().find(|&&a| !(a >= 1.0)) {
            return Err(CoreError::InvalidArgument(format!("steepness index {a} < 1")));
        }
        if let Some(c) = coeffs.iter().find(|&&c| !(c > 0.0)) {
            return Err(CoreError::InvalidArgument(format!("steepness coefficient {c} <= 0")));
        }
        if !(delta > 0.0) {
            return Err(CoreError::InvalidArgument(format!("steepness radius {delta} <= 0")));
        }
        Ok(Self { n, alphas, coeffs, delta })
    }
}

/// Grid and multistart controls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingConfig {
    /// Outer eta-grid size on [0, xi].
    pub n_eta: usize,
    /// Multistart count for the inner spherical minimization.
    pub multistarts: usize,
    /// Termination tolerance of the inner minimization.
    pub descent_tol: f64,
    /// Random subspace frames per (point, dimension) in [`check_steepness`].
    pub frames_per_dim: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { n_eta: 32, multistarts: 8, descent_tol: 1e-10, frames_per_dim: 16, seed: 0 }
    }
}

const ORTHO_ANGLE_TOL: f64 = 1e-8;

/// Detailed outcome of one minimax evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureOutcome {
    pub value: f64,
    /// eta at which the outer max was attained.
    pub eta_at_max: f64,
    /// Best minimizing direction found at that eta.
    pub minimizing_u: Vec<f64>,
    /// The inner min is a heuristic upper bound, not certified.
    pub heuristic: bool,
}

/// Sampled approximation of the steepness minimax at one (I, L, xi).
pub fn steepness_measure<F>(
    omega: &F,
    point: &[f64],
    l: &Subspace,
    xi: f64,
    delta: f64,
    sampling: &SamplingConfig,
) -> Result<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    steepness_measure_detailed(omega, point, l, xi, delta, sampling).map(|o| o.value)
}

pub fn steepness_measure_detailed<F>(
    omega: &F,
    point: &[f64],
    l: &Subspace,
    xi: f64,
    delta: f64,
    sampling: &SamplingConfig,
) -> Result<MeasureOutcome>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let n = l.ambient_dim();
    if point.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: point.len() });
    }
    let j = l.dim();
    if j == 0 || j >= n {
        return Err(CoreError::InvalidArgument(format!("dim L = {j} outside 1..={}", n - 1)));
    }
    if !(xi > 0.0 && xi <= delta) {
        return Err(CoreError::InvalidArgument(format!("xi = {xi} outside (0, {delta}]")));
    }
    let w = omega(point);
    let wn = w.norm();
    let defect = if wn > 0.0 { l.project(&w).norm() / wn } else { 0.0 };
    if defect > ORTHO_ANGLE_TOL {
        return Err(CoreError::NotOrthogonal { defect, tol: ORTHO_ANGLE_TOL });
    }

    let q = l.orthonormal_basis(); // n x j
    let objective = |u: &DVector<f64>| -> f64 {
        let shifted: Vec<f64> = point.iter().zip(u.iter()).map(|(&p, &du)| p + du).collect();
        l.project(&omega(&shifted)).norm()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut best = MeasureOutcome {
        value: f64::NEG_INFINITY,
        eta_at_max: 0.0,
        minimizing_u: vec![0.0; n],
        heuristic: j >= 2,
    };
    for gi in 0..sampling.n_eta {
        let eta = xi * gi as f64 / (sampling.n_eta - 1) as f64;
        let (val, u) = if eta == 0.0 {
            (objective(&DVector::zeros(n)), DVector::zeros(n))
        } else if j == 1 {
            // the sphere is two points
            let u_plus: DVector<f64> = q * DVector::from_element(1, eta);
            let u_minus = -&u_plus;
            let (vp, vm) = (objective(&u_plus), objective(&u_minus));
            if vp <= vm { (vp, u_plus) } else { (vm, u_minus) }
        } else {
            inner_sphere_min(&objective, &q, eta, sampling, &mut rng)
        };
        if val > best.value {
            best.value = val;
            best.eta_at_max = eta;
            best.minimizing_u = u.iter().copied().collect();
        }
    }
    Ok(best)
}

/// Multistart Nelder-Mead over the sphere |u| = eta in L, parametrized as
/// u(x) = eta Q x/|x|. Termination is scale-invariant in the objective, so
/// the search is exactly covariant under omega -> c omega.
fn inner_sphere_min<F>(
    objective: &F,
    q: &nalgebra::DMatrix<f64>,
    eta: f64,
    sampling: &SamplingConfig,
    rng: &mut ChaCha8Rng,
) -> (f64, DVector<f64>)
where
    F: Fn(&DVector<f64>) -> f64,
{
    let j = q.ncols();
    let embed = |x: &DVector<f64>| -> DVector<f64> {
        let norm = x.norm();
        q * (x * (eta / norm))
    };
    let g = |x: &DVector<f64>| objective(&embed(x));

    let mut best_val = f64::INFINITY;
    let mut best_x = DVector::from_element(j, 1.0);
    for _ in 0..sampling.multistarts.max(1) {
        let mut x0 = DVector::zeros(j);
        loop {
            for v in x0.iter_mut() {
                *v = rng.gen::<f64>() * 2.0 - 1.0;
            }
            if x0.norm() > 0.1 {
                break;
            }
        }
        x0 /= x0.norm();
        let (val, x) = nelder_mead(&g, &x0, 0.3, sampling.descent_tol, 250);
        if val < best_val {
            best_val = val;
            best_x = x;
        }
    }
    (best_val, embed(&best_x))
}

/// Plain Nelder-Mead. Termination: simplex diameter below `tol`, or relative
/// value spread below 1e-14 (both scale-invariant in the objective).
fn nelder_mead<F>(
    g: &F,
    x0: &DVector<f64>,
    init_step: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, DVector<f64>)
where
    F: Fn(&DVector<f64>) -> f64,
{
    let d = x0.len();
    let mut simplex: Vec<(f64, DVector<f64>)> = Vec::with_capacity(d + 1);
    simplex.push((g(x0), x0.clone()));
    for i in 0..d {
        let mut x = x0.clone();
        x[i] += init_step;
        simplex.push((g(&x), x));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let diam = simplex[1..]
            .iter()
            .map(|(_, x)| (x - &simplex[0].1).norm())
            .fold(0.0f64, f64::max);
        let spread = simplex[d].0 - simplex[0].0;
        if diam < tol || spread <= 1e-14 * simplex[d].0.abs() {
            break;
        }
        let centroid: DVector<f64> =
            simplex[..d].iter().fold(DVector::zeros(d), |acc, (_, x)| acc + x) / d as f64;
        let worst = simplex[d].clone();
        let reflect = &centroid + (&centroid - &worst.1);
        let fr = g(&reflect);
        if fr < simplex[0].0 {
            let expand = &centroid + (&reflect - &centroid) * 2.0;
            let fe = g(&expand);
            simplex[d] = if fe < fr { (fe, expand) } else { (fr, reflect) };
        } else if fr < simplex[d - 1].0 {
            simplex[d] = (fr, reflect);
        } else {
            let contract = &centroid + (&worst.1 - &centroid) * 0.5;
            let fc = g(&contract);
            if fc < worst.0 {
                simplex[d] = (fc, contract);
            } else {
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = (&entry.1 + &best) * 0.5;
                    *entry = (g(&x), x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    (simplex[0].0, simplex[0].1.clone())
}

/// One evaluated (point, subspace, radius) triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteepnessSample {
    pub point: Vec<f64>,
    /// Orthonormal basis columns of the tested subspace.
    pub subspace_basis: Vec<Vec<f64>>,
    pub dim: usize,
    pub xi: f64,
    pub measured: f64,
    pub required: f64,
    /// measured / required.
    pub margin: f64,
    pub outcome: MeasureOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Verdict {
    HoldsOnSamples,
    /// Index into `samples` of the first violation.
    Counterexample { sample_index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteepnessReport {
    pub samples: Vec<SteepnessSample>,
    pub verdict: Verdict,
    pub min_margin: f64,
    /// Inner minimization is heuristic; a passing report is evidence, not
    /// proof.
    pub heuristic: bool,
}

/// Random orthonormal frames spanning j-dimensional subspaces of the
/// orthogonal complement of `w`.
pub fn random_orthogonal_frames(
    w: &DVector<f64>,
    j: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Subspace>> {
    let n = w.len();
    let wn = w.norm();
    let mut frames = Vec::with_capacity(count);
    let mut guard = 0;
    while frames.len() < count {
        guard += 1;
        if guard > 100 * count {
            return Err(CoreError::Precondition("failed to draw orthogonal frames".into()));
        }
        let basis: Vec<DVector<f64>> = (0..j)
            .map(|_| {
                let mut v = DVector::zeros(n);
                for x in v.iter_mut() {
                    *x = rng.gen::<f64>() * 2.0 - 1.0;
                }
                // remove the omega component exactly enough for the tolerance
                let coeff = v.dot(w) / (wn * wn);
                v - w * coeff
            })
            .collect();
        if let Ok(sub) = Subspace::new(n, basis) {
            if sub.dim() == j {
                frames.push(sub);
            }
        }
    }
    Ok(frames)
}

/// Tests the steepness inequality on sampled points, random subspace frames
/// of every dimension, and the given xi grid.
pub fn check_steepness<F>(
    omega: &F,
    profile: &SteepnessProfile,
    domain_samples: &[Vec<f64>],
    xi_grid: &[f64],
    sampling: &SamplingConfig,
) -> Result<SteepnessReport>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let n = profile.n;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed.wrapping_add(1));
    let mut samples = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut violation: Option<usize> = None;
    for point in domain_samples {
        let w = omega(point);
        if w.norm() == 0.0 {
            return Err(CoreError::FrequencyVanishes { min_norm: 0.0 });
        }
        for j in 1..n {
            let frames = random_orthogonal_frames(&w, j, sampling.frames_per_dim, &mut rng)?;
            for l in &frames {
                for &xi in xi_grid {
                    if !(xi > 0.0 && xi <= profile.delta) {
                        continue;
                    }
                    let outcome =
                        steepness_measure_detailed(omega, point, l, xi, profile.delta, sampling)?;
                    let required = profile.coeffs[j - 1] * xi.powf(profile.alphas[j - 1]);
                    let margin = outcome.value / required;
                    let q = l.orthonormal_basis();
                    samples.push(SteepnessSample {
                        point: point.clone(),
                        subspace_basis: (0..q.ncols())
                            .map(|c| q.column(c).iter().copied().collect())
                            .collect(),
                        dim: j,
                        xi,
                        measured: outcome.value,
                        required,
                        margin,
                        outcome,
                    });
                    if margin < min_margin {
                        min_margin = margin;
                    }
                    if margin < 1.0 && violation.is_none() {
                        violation = Some(samples.len() - 1);
                    }
                }
            }
        }
    }
    Ok(SteepnessReport {
        verdict: match violation {
            None => Verdict::HoldsOnSamples,
            Some(i) => Verdict::Counterexample { sample_index: i },
        },
        min_margin,
        heuristic: true,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{frequency, quadratic_h};
    use approx::assert_relative_eq;

    fn omega_identity(i: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(i)
    }

    fn sub(n: usize, rows: &[&[f64]]) -> Subspace {
        Subspace::new(n, rows.iter().map(|r| DVector::from_column_slice(r)).collect()).unwrap()
    }

    #[test]
    fn measure_equals_radius_for_identity_map() {
        // omega(I) = I: pi_L omega(I+u) = u when L is orthogonal to I
        let point = [1.0, 0.0, 1.0];
        let l = sub(3, &[&[0.0, 1.0, 0.0]]);
        let cfg = SamplingConfig::default();
        let m = steepness_measure(&omega_identity, &point, &l, 0.5, 1.0, &cfg).unwrap();
        assert_relative_eq!(m, 0.5, max_relative = 1e-9);

        let l2 = sub(3, &[&[0.0, 1.0, 0.0], &[1.0, 0.0, -1.0]]);
        let m = steepness_measure(&omega_identity, &point, &l2, 0.5, 1.0, &cfg).unwrap();
        assert_relative_eq!(m, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn constant_frequency_measures_zero() {
        let omega = |_: &[f64]| DVector::from_column_slice(&[1.0, 1.0, 2.0]);
        let l = sub(3, &[&[1.0, 1.0, -1.0]]);
        let cfg = SamplingConfig::default();
        let m = steepness_measure(&omega, &[0.0, 0.0, 0.0], &l, 0.5, 1.0, &cfg).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn measure_matches_dense_oracle() {
        // h = (I1^2 + I2^2)/2 + I3, omega(I) = (I1, I2, 1)
        let omega = |i: &[f64]| DVector::from_column_slice(&[i[0], i[1], 1.0]);
        let point = [1.0, 0.0, 1.0];
        let dir = DVector::from_column_slice(&[1.0, 0.0, -1.0]) / 2f64.sqrt();
        let l = Subspace::new(3, vec![dir.clone()]).unwrap();
        let cfg = SamplingConfig::default();
        let xi = 0.25;
        let m = steepness_measure(&omega, &point, &l, xi, 1.0, &cfg).unwrap();

        // brute-force minimax on a 10x denser eta grid
        let mut oracle = f64::NEG_INFINITY;
        let dense = cfg.n_eta * 10;
        for gi in 0..dense {
            let eta = xi * gi as f64 / (dense - 1) as f64;
            let mut inner = f64::INFINITY;
            for s in [-1.0, 1.0] {
                let u = &dir * (s * eta);
                let shifted = [point[0] + u[0], point[1] + u[1], point[2] + u[2]];
                inner = inner.min(l.project(&omega(&shifted)).norm());
            }
            oracle = oracle.max(inner);
        }
        assert!(m > 0.0);
        assert!((m - oracle).abs() <= 0.05 * oracle, "measure {m} vs oracle {oracle}");
    }

    #[test]
    fn rejects_non_orthogonal_subspace_and_bad_radius() {
        let l = sub(3, &[&[1.0, 0.0, 0.0]]); // not orthogonal to omega(I) = I
        let cfg = SamplingConfig::default();
        let err = steepness_measure(&omega_identity, &[1.0, 0.0, 1.0], &l, 0.5, 1.0, &cfg);
        assert!(matches!(err, Err(CoreError::NotOrthogonal { .. })));

        let l = sub(3, &[&[0.0, 1.0, 0.0]]);
        assert!(steepness_measure(&omega_identity, &[1.0, 0.0, 1.0], &l, 1.5, 1.0, &cfg).is_err());
        assert!(steepness_measure(&omega_identity, &[1.0, 0.0, 1.0], &l, 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn scaling_covariance_is_exact() {
        let omega = |i: &[f64]| DVector::from_column_slice(&[i[0] + 0.3 * i[1], i[1], 1.0 + i[0] * i[2]]);
        let point = [1.0, 0.2, 0.5];
        let w = omega(&point);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frames = random_orthogonal_frames(&w, 2, 3, &mut rng).unwrap();
        let cfg = SamplingConfig::default();
        for c in [3.0, 0.125, 17.5] {
            let scaled = |i: &[f64]| omega(i) * c;
            for l in &frames {
                let m1 = steepness_measure(&omega, &point, l, 0.4, 1.0, &cfg).unwrap();
                let m2 = steepness_measure(&scaled, &point, l, 0.4, 1.0, &cfg).unwrap();
                assert!((m2 - c * m1).abs() <= 1e-12 * m2.abs().max(1e-300), "c={c}: {m2} vs {}", c * m1);
            }
        }
    }

    #[test]
    fn eta_refinement_monotone() {
        let omega = |i: &[f64]| DVector::from_column_slice(&[i[0], i[1] * i[1] + i[1], 1.0]);
        let point = [0.5, 0.3, 1.0];
        let w = omega(&point);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames = random_orthogonal_frames(&w, 2, 4, &mut rng).unwrap();
        let coarse = SamplingConfig::default();
        let fine = SamplingConfig { n_eta: coarse.n_eta * 2 - 1, ..coarse.clone() };
        for l in &frames {
            let mc = steepness_measure(&omega, &point, l, 0.5, 1.0, &coarse).unwrap();
            let mf = steepness_measure(&omega, &point, l, 0.5, 1.0, &fine).unwrap();
            assert!(mf >= mc - 1e-8, "refined {mf} < coarse {mc}");
        }
    }

    #[test]
    fn quadratic_h_holds_on_samples() {
        let h = quadratic_h(3);
        let omega = move |i: &[f64]| frequency(&h, i);
        // C = 0.95 leaves honest slack: the identity frequency map attains
        // measure = xi exactly, and a borderline margin of 1.0 would flip the
        // verdict on rounding noise
        let profile = SteepnessProfile::new(3, vec![1.0, 1.0], vec![0.95, 0.95], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                (0..3).map(|_| 1.0 + rng.gen::<f64>()).collect()
            })
            .collect();
        let cfg = SamplingConfig { frames_per_dim: 2, ..Default::default() };
        let report =
            check_steepness(&omega, &profile, &samples, &[0.1, 0.5, 1.0], &cfg).unwrap();
        assert!(matches!(report.verdict, Verdict::HoldsOnSamples));
        assert!(report.min_margin >= 1.04, "min margin {}", report.min_margin);
        assert!(report.heuristic);
    }

    #[test]
    fn linear_h_yields_counterexample() {
        let omega = |_: &[f64]| DVector::from_column_slice(&[1.0, 2f64.sqrt(), 3f64.sqrt()]);
        let profile = SteepnessProfile::new(3, vec![1.0, 1.0], vec![0.5, 0.5], 1.0).unwrap();
        let cfg = SamplingConfig { frames_per_dim: 1, ..Default::default() };
        let report =
            check_steepness(&omega, &profile, &[vec![1.0, 1.0, 1.0]], &[0.5], &cfg).unwrap();
        match report.verdict {
            Verdict::Counterexample { sample_index } => {
                let s = &report.samples[sample_index];
                assert!(s.margin < 1.0);
                assert_eq!(s.point, vec![1.0, 1.0, 1.0]);
                assert!(!s.subspace_basis.is_empty());
            }
            _ => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn hyperbolic_h_verdict_matches_dense_oracle() {
        // omega(I) = (I1, -I2, I3)
        let omega = |i: &[f64]| DVector::from_column_slice(&[i[0], -i[1], i[2]]);
        let profile = SteepnessProfile::new(3, vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        let samples = vec![vec![1.0, 1.0, 1.0], vec![1.1, 0.9, 1.0], vec![0.95, 1.05, 1.02]];
        let cfg = SamplingConfig { frames_per_dim: 2, n_eta: 16, ..Default::default() };
        let report = check_steepness(&omega, &profile, &samples, &[0.25, 0.5], &cfg).unwrap();

        // dense oracle on the very frames the report stored
        let mut oracle_violation = false;
        for s in &report.samples {
            let basis: Vec<DVector<f64>> =
                s.subspace_basis.iter().map(|b| DVector::from_column_slice(b)).collect();
            let l = Subspace::new(3, basis).unwrap();
            let dense_eta = 160;
            let mut measure = f64::NEG_INFINITY;
            for gi in 0..dense_eta {
                let eta = s.xi * gi as f64 / (dense_eta - 1) as f64;
                let mut inner = f64::INFINITY;
                if s.dim == 1 {
                    let q = l.orthonormal_basis();
                    for sign in [-1.0, 1.0] {
                        let u = q.column(0) * (sign * eta);
                        let shifted: Vec<f64> =
                            s.point.iter().zip(u.iter()).map(|(&p, &x)| p + x).collect();
                        inner = inner.min(l.project(&omega(&shifted)).norm());
                    }
                } else {
                    let q = l.orthonormal_basis();
                    for ai in 0..720 {
                        let th = 2.0 * std::f64::consts::PI * ai as f64 / 720.0;
                        let u = (q.column(0) * th.cos() + q.column(1) * th.sin()) * eta;
                        let shifted: Vec<f64> =
                            s.point.iter().zip(u.iter()).map(|(&p, &x)| p + x).collect();
                        inner = inner.min(l.project(&omega(&shifted)).norm());
                    }
                }
                measure = measure.max(inner);
            }
            if measure < s.required {
                oracle_violation = true;
            }
        }
        let reported_violation = matches!(report.verdict, Verdict::Counterexample { .. });
        assert_eq!(reported_violation, oracle_violation);
    }

    #[test]
    fn identity_hessian_recovers_unit_coefficient() {
        let point = [2.0, 0.0, 0.5];
        let w = omega_identity(&point);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frames = random_orthogonal_frames(&w, 1, 4, &mut rng).unwrap();
        let cfg = SamplingConfig::default();
        for l in &frames {
            for xi in [0.2, 0.6, 1.0] {
                let m = steepness_measure(&omega_identity, &point, l, xi, 1.0, &cfg).unwrap();
                assert_relative_eq!(m / xi, 1.0, max_relative = 1e-9);
            }
        }
    }
}
