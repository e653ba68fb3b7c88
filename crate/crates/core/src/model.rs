//! Concrete near-integrable Hamiltonians `H = h(I) + eps f(I, phi)`.
//!
//! `h` is a real polynomial in the actions with exact gradient and Hessian;
//! `f` is a finite trigonometric polynomial sum_k f_k(I) e^{i k.phi} whose
//! coefficients f_k are complex polynomials subject to the reality constraint
//! `f_{-k} = conj(f_k)`. The Fourier norm used by all stability constants is
//! the coefficient-sum bound sum_k sup|f_k| e^{|k|_1 sigma}, a rigorous upper
//! bound for the sup over the complex extension of the domain.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::AnalyticityEnvelope;
use crate::error::{CoreError, Result};

/// `coeff * prod_v I_v^{exponents[v]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

/// Real polynomial in the actions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialH {
    n: usize,
    terms: Vec<Monomial>,
}

impl PolynomialH {
    pub fn new(n: usize, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if t.exponents.len() != n {
                return Err(CoreError::DimensionMismatch { expected: n, got: t.exponents.len() });
            }
        }
        Ok(Self { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, i: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.exponents.iter().zip(i).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Exact gradient: each monomial differentiated term by term.
    pub fn gradient(&self, i: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        for t in &self.terms {
            for v in 0..self.n {
                let e = t.exponents[v];
                if e == 0 {
                    continue;
                }
                let mut p = t.coeff * e as f64;
                for (w, &x) in i.iter().enumerate() {
                    let ew = if w == v { t.exponents[w] - 1 } else { t.exponents[w] };
                    p *= x.powi(ew as i32);
                }
                g[v] += p;
            }
        }
        g
    }

    /// Exact Hessian.
    pub fn hessian(&self, i: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for t in &self.terms {
            for v in 0..self.n {
                for w in 0..self.n {
                    let (ev, ew) = (t.exponents[v], t.exponents[w]);
                    let factor = if v == w {
                        if ev < 2 {
                            continue;
                        }
                        (ev * (ev - 1)) as f64
                    } else {
                        if ev == 0 || ew == 0 {
                            continue;
                        }
                        (ev * ew) as f64
                    };
                    let mut p = t.coeff * factor;
                    for (u, &x) in i.iter().enumerate() {
                        let mut e = t.exponents[u];
                        if u == v {
                            e -= 1;
                        }
                        if u == w {
                            e -= 1;
                        }
                        p *= x.powi(e as i32);
                    }
                    h[(v, w)] += p;
                }
            }
        }
        h
    }

    /// Entry-wise sup bound of |Hessian| over the ball extended by `delta`,
    /// via coefficient sums.
    fn hessian_bound(&self, domain: &DomainBall, delta: f64) -> DMatrix<f64> {
        let radii: Vec<f64> =
            domain.center.iter().map(|c| c.abs() + domain.radius + delta).collect();
        let mut b = DMatrix::zeros(self.n, self.n);
        for t in &self.terms {
            for v in 0..self.n {
                for w in 0..self.n {
                    let (ev, ew) = (t.exponents[v], t.exponents[w]);
                    let factor = if v == w {
                        if ev < 2 {
                            continue;
                        }
                        (ev * (ev - 1)) as f64
                    } else {
                        if ev == 0 || ew == 0 {
                            continue;
                        }
                        (ev * ew) as f64
                    };
                    let mut p = t.coeff.abs() * factor;
                    for (u, &r) in radii.iter().enumerate() {
                        let mut e = t.exponents[u];
                        if u == v {
                            e -= 1;
                        }
                        if u == w {
                            e -= 1;
                        }
                        p *= r.powi(e as i32);
                    }
                    b[(v, w)] += p;
                }
            }
        }
        b
    }
}

/// The frequency map `omega(I) = grad h(I)`.
pub fn frequency(h: &PolynomialH, i: &[f64]) -> DVector<f64> {
    h.gradient(i)
}

/// Complex-polynomial coefficient of one harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct CMonomial {
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    pub k: Vec<i64>,
    pub poly: Vec<CMonomial>,
}

/// Finite trigonometric polynomial `sum_k f_k(I) e^{i k.phi}`, real-valued on
/// real arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolyF {
    n: usize,
    harmonics: Vec<Harmonic>,
}

const REALITY_TOL: f64 = 1e-12;

impl TrigPolyF {
    /// Validates the reality constraint `f_{-k} = conj(f_k)` term by term.
    pub fn new(n: usize, harmonics: Vec<Harmonic>) -> Result<Self> {
        for harm in &harmonics {
            if harm.k.len() != n {
                return Err(CoreError::DimensionMismatch { expected: n, got: harm.k.len() });
            }
            for m in &harm.poly {
                if m.exponents.len() != n {
                    return Err(CoreError::DimensionMismatch { expected: n, got: m.exponents.len() });
                }
            }
        }
        for harm in &harmonics {
            let neg: Vec<i64> = harm.k.iter().map(|&x| -x).collect();
            let partner = harmonics.iter().find(|h2| h2.k == neg);
            let ok = match partner {
                None => false,
                Some(p) => harm.poly.iter().all(|m| {
                    let conj = p
                        .poly
                        .iter()
                        .filter(|m2| m2.exponents == m.exponents)
                        .fold(Complex64::new(0.0, 0.0), |acc, m2| acc + m2.coeff);
                    let scale = 1.0f64.max(m.coeff.norm());
                    (conj.conj() - m.coeff).norm() <= REALITY_TOL * scale
                }),
            };
            if !ok {
                return Err(CoreError::RealityViolated { k: harm.k.clone() });
            }
        }
        Ok(Self { n, harmonics })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    fn eval_coeff(poly: &[CMonomial], i: &[f64]) -> Complex64 {
        poly.iter()
            .map(|m| {
                m.coeff
                    * m.exponents
                        .iter()
                        .zip(i)
                        .map(|(&e, &x)| x.powi(e as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval_complex(&self, i: &[f64], phi: &[f64]) -> Complex64 {
        self.harmonics
            .iter()
            .map(|h| {
                let theta: f64 = h.k.iter().zip(phi).map(|(&k, &p)| k as f64 * p).sum();
                Self::eval_coeff(&h.poly, i) * Complex64::from_polar(1.0, theta)
            })
            .sum()
    }

    /// Real value; the imaginary part is a pure rounding residual under the
    /// reality constraint.
    pub fn eval(&self, i: &[f64], phi: &[f64]) -> f64 {
        self.eval_complex(i, phi).re
    }

    /// `d f / d phi`, exact.
    pub fn grad_phi(&self, i: &[f64], phi: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        for h in &self.harmonics {
            let theta: f64 = h.k.iter().zip(phi).map(|(&k, &p)| k as f64 * p).sum();
            let base = Self::eval_coeff(&h.poly, i) * Complex64::from_polar(1.0, theta);
            for v in 0..self.n {
                g[v] += (Complex64::new(0.0, h.k[v] as f64) * base).re;
            }
        }
        g
    }

    /// `d f / d I`, exact.
    pub fn grad_i(&self, i: &[f64], phi: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        for h in &self.harmonics {
            let theta: f64 = h.k.iter().zip(phi).map(|(&k, &p)| k as f64 * p).sum();
            let phase = Complex64::from_polar(1.0, theta);
            for m in &h.poly {
                for v in 0..self.n {
                    let e = m.exponents[v];
                    if e == 0 {
                        continue;
                    }
                    let mut p = Complex64::new(e as f64, 0.0) * m.coeff;
                    for (w, &x) in i.iter().enumerate() {
                        let ew = if w == v { m.exponents[w] - 1 } else { m.exponents[w] };
                        p *= x.powi(ew as i32);
                    }
                    g[v] += (p * phase).re;
                }
            }
        }
        g
    }
}

/// Closed action-space ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl DomainBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(CoreError::InvalidArgument(format!("domain radius must be > 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, i: &[f64]) -> bool {
        self.dist_from_center(i) <= self.radius
    }

    pub fn dist_from_center(&self, i: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(i)
            .map(|(&c, &x)| (x - c) * (x - c))
            .sum::<f64>()
            .sqrt()
    }
}

/// Upper bound on the Fourier norm `sum_k sup|f_k| e^{|k|_1 sigma}`, with
/// each sup taken over the complex `delta`-extension of the domain and
/// bounded by coefficient sums.
pub fn fourier_norm(f: &TrigPolyF, domain: &DomainBall, delta: f64, sigma: f64) -> Result<f64> {
    if !(delta > 0.0) || !(sigma > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "extension widths must be positive: delta={delta}, sigma={sigma}"
        )));
    }
    let radii: Vec<f64> = domain.center.iter().map(|c| c.abs() + domain.radius + delta).collect();
    let mut total = 0.0;
    for h in f.harmonics() {
        let sup: f64 = h
            .poly
            .iter()
            .map(|m| {
                m.coeff.norm()
                    * m.exponents.iter().zip(&radii).map(|(&e, &r)| r.powi(e as i32)).product::<f64>()
            })
            .sum();
        let k1: i64 = h.k.iter().map(|x| x.abs()).sum();
        total += sup * (k1 as f64 * sigma).exp();
    }
    Ok(total)
}

/// Grid/sampling controls for [`envelope`].
#[derive(Debug, Clone)]
pub struct EnvelopeOptions {
    /// Grid points per axis for the frequency min/max scan.
    pub grid_per_axis: usize,
    /// Deflation applied to the sampled minimum of `|omega|`.
    pub deflate: f64,
    /// Inflation applied to the sampled maximum of `|omega|`.
    pub inflate: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { grid_per_axis: 9, deflate: 0.99, inflate: 1.01 }
    }
}

/// Deterministic scan points covering the ball: a cube product grid clipped
/// to the ball, plus each nonzero grid direction pushed to the sphere.
fn ball_grid(domain: &DomainBall, g: usize) -> Vec<Vec<f64>> {
    let n = domain.n();
    let mut pts = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| -1.0 + 2.0 * i as f64 / (g - 1) as f64).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1.0 {
            pts.push(
                domain.center.iter().zip(&x).map(|(&c, &v)| c + domain.radius * v).collect(),
            );
        }
        if norm > 0.0 {
            pts.push(
                domain
                    .center
                    .iter()
                    .zip(&x)
                    .map(|(&c, &v)| c + domain.radius * v / norm)
                    .collect(),
            );
        }
        let mut d = n;
        loop {
            if d == 0 {
                return pts;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < g {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Estimates the analyticity envelope of the model: frequency bounds from a
/// deterministic grid scan with safety factors, the Lipschitz constant of
/// `omega` from the Hessian (exact for quadratic `h`, else a rigorous
/// coefficient bound over the extension), and the Fourier norm of `f`.
pub fn envelope(
    h: &PolynomialH,
    f: &TrigPolyF,
    domain: &DomainBall,
    delta: f64,
    sigma: f64,
    opts: &EnvelopeOptions,
) -> Result<AnalyticityEnvelope> {
    let mut omega_min = f64::INFINITY;
    let mut omega_max = 0.0f64;
    for p in ball_grid(domain, opts.grid_per_axis.max(3)) {
        let w = frequency(h, &p).norm();
        omega_min = omega_min.min(w);
        omega_max = omega_max.max(w);
    }
    let omega_min = omega_min * opts.deflate;
    let omega_max = omega_max * opts.inflate;
    if !(omega_min > 0.0) {
        return Err(CoreError::FrequencyVanishes { min_norm: omega_min });
    }

    let quadratic = h.total_degree() <= 2;
    let hess = if quadratic {
        h.hessian(&domain.center)
    } else {
        h.hessian_bound(domain, delta)
    };
    let lipschitz_m = spectral_norm(&hess);
    if !(lipschitz_m > 0.0) {
        return Err(CoreError::Model("frequency map is constant: Lipschitz constant M = 0".into()));
    }

    let f_norm = fourier_norm(f, domain, delta, sigma)?;
    let mut sampled_fields = vec!["omega_min".to_string(), "omega_max".to_string()];
    if !quadratic {
        sampled_fields.push("lipschitz_m (coefficient bound, not sup)".to_string());
    }
    AnalyticityEnvelope::new(sigma, omega_min, omega_max, lipschitz_m, f_norm, sampled_fields)
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().fold(0.0, |a: f64, &s| a.max(s))
}

// --- JSON model files -----------------------------------------------------

/// Either a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonCoeff {
    Real(f64),
    Complex([f64; 2]),
}

impl From<JsonCoeff> for Complex64 {
    fn from(c: JsonCoeff) -> Self {
        match c {
            JsonCoeff::Real(r) => Complex64::new(r, 0.0),
            JsonCoeff::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonHarmonicTerm {
    exponents: Vec<u32>,
    coeff: JsonCoeff,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonHarmonic {
    k: Vec<i64>,
    poly: Vec<JsonHarmonicTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonModel {
    n: usize,
    h: Vec<Monomial>,
    f: Vec<JsonHarmonic>,
    domain: DomainBall,
}

/// Full model `H = h(I) + eps f(I, phi)` on a ball domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub n: usize,
    pub h: PolynomialH,
    pub f: TrigPolyF,
    pub domain: DomainBall,
}

impl HamiltonianModel {
    pub fn new(h: PolynomialH, f: TrigPolyF, domain: DomainBall) -> Result<Self> {
        let n = h.n();
        if f.n() != n || domain.n() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: f.n().max(domain.n()) });
        }
        Ok(Self { n, h, f, domain })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: JsonModel = serde_json::from_str(s)?;
        let h = PolynomialH::new(raw.n, raw.h)?;
        let harmonics = raw
            .f
            .into_iter()
            .map(|jh| Harmonic {
                k: jh.k,
                poly: jh
                    .poly
                    .into_iter()
                    .map(|t| CMonomial { exponents: t.exponents, coeff: t.coeff.into() })
                    .collect(),
            })
            .collect();
        let f = TrigPolyF::new(raw.n, harmonics)?;
        let domain = DomainBall::new(raw.domain.center, raw.domain.radius)?;
        Self::new(h, f, domain)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let raw = JsonModel {
            n: self.n,
            h: self.h.terms().to_vec(),
            f: self
                .f
                .harmonics()
                .iter()
                .map(|h| JsonHarmonic {
                    k: h.k.clone(),
                    poly: h
                        .poly
                        .iter()
                        .map(|m| JsonHarmonicTerm {
                            exponents: m.exponents.clone(),
                            coeff: if m.coeff.im == 0.0 {
                                JsonCoeff::Real(m.coeff.re)
                            } else {
                                JsonCoeff::Complex([m.coeff.re, m.coeff.im])
                            },
                        })
                        .collect(),
                })
                .collect(),
            domain: self.domain.clone(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}

/// `h = 1/2 |I|^2` in dimension `n`.
pub fn quadratic_h(n: usize) -> PolynomialH {
    let terms = (0..n)
        .map(|v| {
            let mut e = vec![0u32; n];
            e[v] = 2;
            Monomial { exponents: e, coeff: 0.5 }
        })
        .collect();
    PolynomialH::new(n, terms).expect("well-formed by construction")
}

/// `f = c * cos(k.phi)` as a reality-satisfying harmonic pair.
pub fn cosine_f(n: usize, k: Vec<i64>, c: f64) -> TrigPolyF {
    let half = Complex64::new(c / 2.0, 0.0);
    let term = |kk: Vec<i64>| Harmonic {
        k: kk,
        poly: vec![CMonomial { exponents: vec![0; n], coeff: half }],
    };
    let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
    TrigPolyF::new(n, vec![term(k), term(neg)]).expect("reality holds by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mono(n: usize, exps: &[u32], c: f64) -> Monomial {
        assert_eq!(exps.len(), n);
        Monomial { exponents: exps.to_vec(), coeff: c }
    }

    #[test]
    fn frequency_examples() {
        let h = quadratic_h(3);
        assert_eq!(frequency(&h, &[1.0, 2.0, 3.0]).as_slice(), &[1.0, 2.0, 3.0]);

        let h = PolynomialH::new(
            3,
            vec![mono(3, &[2, 0, 0], 0.5), mono(3, &[0, 2, 0], -0.5)],
        )
        .unwrap();
        assert_eq!(frequency(&h, &[1.0, 1.0, 0.0]).as_slice(), &[1.0, -1.0, 0.0]);
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let h = PolynomialH::new(
            3,
            vec![
                mono(3, &[3, 0, 0], 1.0 / 6.0),
                mono(3, &[1, 2, 0], 0.7),
                mono(3, &[0, 1, 1], -1.3),
                mono(3, &[2, 0, 1], 0.25),
            ],
        )
        .unwrap();
        let i = [0.4, -0.8, 1.1];
        let step = 1e-5;
        let g = h.gradient(&i);
        for v in 0..3 {
            let mut ip = i;
            let mut im = i;
            ip[v] += step;
            im[v] -= step;
            let fd = (h.eval(&ip) - h.eval(&im)) / (2.0 * step);
            assert_relative_eq!(g[v], fd, max_relative = 1e-8);
        }
        let hess = h.hessian(&i);
        for v in 0..3 {
            let mut ip = i;
            let mut im = i;
            ip[v] += step;
            im[v] -= step;
            let gp = h.gradient(&ip);
            let gm = h.gradient(&im);
            for w in 0..3 {
                let fd = (gp[w] - gm[w]) / (2.0 * step);
                assert_relative_eq!(hess[(v, w)], fd, epsilon = 1e-7, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn fourier_norm_examples() {
        let domain = DomainBall::new(vec![0.0; 3], 1.0).unwrap();
        let sigma = 0.8;
        let delta = 0.3;

        let f = cosine_f(3, vec![1, 0, 0], 1.0);
        assert_relative_eq!(
            fourier_norm(&f, &domain, delta, sigma).unwrap(),
            sigma.exp(),
            max_relative = 1e-14
        );

        let c = -2.5;
        let constant = TrigPolyF::new(
            3,
            vec![Harmonic {
                k: vec![0, 0, 0],
                poly: vec![CMonomial { exponents: vec![0; 3], coeff: Complex64::new(c, 0.0) }],
            }],
        )
        .unwrap();
        assert_relative_eq!(
            fourier_norm(&constant, &domain, delta, sigma).unwrap(),
            c.abs(),
            max_relative = 1e-14
        );

        // f = I_1 cos(phi_1) on B(0, r0): norm (r0 + delta) e^sigma.
        let r0 = 1.0;
        let half = Complex64::new(0.5, 0.0);
        let lin = |k: Vec<i64>| Harmonic {
            k,
            poly: vec![CMonomial { exponents: vec![1, 0, 0], coeff: half }],
        };
        let f = TrigPolyF::new(3, vec![lin(vec![1, 0, 0]), lin(vec![-1, 0, 0])]).unwrap();
        assert_relative_eq!(
            fourier_norm(&f, &domain, delta, sigma).unwrap(),
            (r0 + delta) * sigma.exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn fourier_norm_scales_linearly_and_splits_additively() {
        let domain = DomainBall::new(vec![0.5, -0.25, 0.0], 0.75).unwrap();
        let f1 = cosine_f(3, vec![1, 0, 0], 0.7);
        let f2 = cosine_f(3, vec![0, 2, -1], -1.2);
        let sum = TrigPolyF::new(
            3,
            f1.harmonics().iter().chain(f2.harmonics()).cloned().collect(),
        )
        .unwrap();
        let nf = |f: &TrigPolyF| fourier_norm(f, &domain, 0.2, 0.5).unwrap();
        assert_relative_eq!(nf(&sum), nf(&f1) + nf(&f2), max_relative = 1e-14);

        let scaled = cosine_f(3, vec![1, 0, 0], 0.7 * 3.0);
        assert_relative_eq!(nf(&scaled), 3.0 * nf(&f1), max_relative = 1e-14);
    }

    #[test]
    fn reality_enforced_and_evaluations_real() {
        // missing partner harmonic
        let bad = TrigPolyF::new(
            2,
            vec![Harmonic {
                k: vec![1, 0],
                poly: vec![CMonomial { exponents: vec![0, 0], coeff: Complex64::new(0.5, 0.0) }],
            }],
        );
        assert!(matches!(bad, Err(CoreError::RealityViolated { .. })));

        // sin + cos mixture with complex coefficients
        let f = TrigPolyF::new(
            2,
            vec![
                Harmonic {
                    k: vec![1, -1],
                    poly: vec![CMonomial { exponents: vec![1, 0], coeff: Complex64::new(0.3, -0.4) }],
                },
                Harmonic {
                    k: vec![-1, 1],
                    poly: vec![CMonomial { exponents: vec![1, 0], coeff: Complex64::new(0.3, 0.4) }],
                },
            ],
        )
        .unwrap();
        for s in 0..20 {
            let t = s as f64 * 0.37;
            let z = f.eval_complex(&[1.0 + t, -0.5], &[t, 2.0 - t]);
            assert!(z.im.abs() < 1e-12, "imaginary residue {}", z.im);
        }
    }

    #[test]
    fn trig_gradients_match_finite_differences() {
        let f = TrigPolyF::new(
            2,
            vec![
                Harmonic {
                    k: vec![2, 1],
                    poly: vec![CMonomial { exponents: vec![1, 1], coeff: Complex64::new(0.25, 0.1) }],
                },
                Harmonic {
                    k: vec![-2, -1],
                    poly: vec![CMonomial { exponents: vec![1, 1], coeff: Complex64::new(0.25, -0.1) }],
                },
            ],
        )
        .unwrap();
        let i = [0.8, -0.3];
        let phi = [0.9, 2.1];
        let step = 1e-6;
        let gp = f.grad_phi(&i, &phi);
        let gi = f.grad_i(&i, &phi);
        for v in 0..2 {
            let mut pp = phi;
            let mut pm = phi;
            pp[v] += step;
            pm[v] -= step;
            assert_relative_eq!(gp[v], (f.eval(&i, &pp) - f.eval(&i, &pm)) / (2.0 * step), epsilon = 1e-8);
            let mut ip = i;
            let mut im = i;
            ip[v] += step;
            im[v] -= step;
            assert_relative_eq!(gi[v], (f.eval(&ip, &phi) - f.eval(&im, &phi)) / (2.0 * step), epsilon = 1e-8);
        }
    }

    #[test]
    fn envelope_ball_example() {
        let h = quadratic_h(3);
        let f = cosine_f(3, vec![1, 0, 0], 1.0);
        let domain = DomainBall::new(vec![2.0, 0.0, 0.0], 0.5).unwrap();
        let env = envelope(&h, &f, &domain, 0.1, 1.0, &EnvelopeOptions::default()).unwrap();
        assert!(env.omega_min >= 1.485 - 1e-9 && env.omega_min <= 1.5, "omega_min = {}", env.omega_min);
        assert!(env.omega_max >= 2.5 && env.omega_max <= 2.525, "omega_max = {}", env.omega_max);
        assert_eq!(env.lipschitz_m, 1.0);
    }

    #[test]
    fn envelope_quadratic_m_exact() {
        let h = PolynomialH::new(
            3,
            vec![mono(3, &[2, 0, 0], 0.5), mono(3, &[0, 2, 0], 1.0), mono(3, &[0, 0, 2], 0.5)],
        )
        .unwrap();
        let f = cosine_f(3, vec![1, 0, 0], 1.0);
        let domain = DomainBall::new(vec![1.0, 1.0, 1.0], 0.25).unwrap();
        let env = envelope(&h, &f, &domain, 0.1, 1.0, &EnvelopeOptions::default()).unwrap();
        assert_relative_eq!(env.lipschitz_m, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn envelope_cubic_m_bound() {
        // h = I1^3/6 + linear escape so omega never vanishes
        let h = PolynomialH::new(
            3,
            vec![mono(3, &[3, 0, 0], 1.0 / 6.0), mono(3, &[0, 1, 0], 1.0)],
        )
        .unwrap();
        let f = cosine_f(3, vec![1, 0, 0], 1.0);
        let r_max = 1.5; // |I1| <= |center_1| + radius
        let delta = 0.2;
        let domain = DomainBall::new(vec![1.0, 0.0, 0.0], 0.5).unwrap();
        let env = envelope(&h, &f, &domain, delta, 1.0, &EnvelopeOptions::default()).unwrap();
        assert!(env.lipschitz_m >= r_max + delta - 1e-12);
        assert!(env.lipschitz_m <= 1.01 * (r_max + delta) + 1e-9, "M = {}", env.lipschitz_m);
        assert!(env.sampled_fields.iter().any(|s| s.contains("lipschitz_m")));
    }

    #[test]
    fn envelope_rejects_vanishing_frequency() {
        let h = quadratic_h(3); // omega(I) = I vanishes at the origin
        let f = cosine_f(3, vec![1, 0, 0], 1.0);
        let domain = DomainBall::new(vec![0.0; 3], 1.0).unwrap();
        let err = envelope(&h, &f, &domain, 0.1, 1.0, &EnvelopeOptions::default()).unwrap_err();
        assert!(matches!(err, CoreError::FrequencyVanishes { .. }));
    }

    #[test]
    fn json_roundtrip_and_reality_validation() {
        let model = HamiltonianModel::new(
            quadratic_h(3),
            cosine_f(3, vec![1, -1, 0], 0.5),
            DomainBall::new(vec![2.0, 0.0, 0.0], 0.5).unwrap(),
        )
        .unwrap();
        let json = model.to_json_string().unwrap();
        let back = HamiltonianModel::from_json_str(&json).unwrap();
        assert_eq!(model, back);

        let bad = r#"{"n":2,"h":[{"exponents":[2,0],"coeff":0.5}],
            "f":[{"k":[1,0],"poly":[{"exponents":[0,0],"coeff":1.0}]}],
            "domain":{"center":[0.0,0.0],"radius":1.0}}"#;
        assert!(matches!(
            HamiltonianModel::from_json_str(bad),
            Err(CoreError::RealityViolated { .. })
        ));
    }

    proptest! {
        /// Gradient of a random sparse cubic agrees with central differences.
        #[test]
        fn gradient_property(coeffs in proptest::collection::vec(-2.0f64..2.0, 4),
                             point in proptest::collection::vec(-1.5f64..1.5, 3)) {
            let h = PolynomialH::new(3, vec![
                Monomial { exponents: vec![3, 0, 0], coeff: coeffs[0] },
                Monomial { exponents: vec![1, 1, 0], coeff: coeffs[1] },
                Monomial { exponents: vec![0, 2, 1], coeff: coeffs[2] },
                Monomial { exponents: vec![0, 0, 2], coeff: coeffs[3] },
            ]).unwrap();
            let g = h.gradient(&point);
            let step = 1e-5;
            for v in 0..3 {
                let mut ip = [point[0], point[1], point[2]];
                let mut im = ip;
                ip[v] += step;
                im[v] -= step;
                let fd = (h.eval(&ip) - h.eval(&im)) / (2.0 * step);
                let scale = 1.0f64.max(g[v].abs());
                prop_assert!((g[v] - fd).abs() <= 1e-6 * scale);
            }
        }
    }
}
