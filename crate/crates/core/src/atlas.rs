//! Zone/block classification of action space and brute-force verification of
//! the covering lemmas.
//!
//! For each maximal K-lattice L of dimension j, the resonant zone is
//! `Z_L = { I : |pi_<L> omega(I)| < delta_L }` with `delta_L = lambda_j/|L|`;
//! the block `D_L` is the zone minus all zones of higher dimension, and `D_0`
//! is the complement of all zones. Fast-drift discs thicken the connected
//! component of the drift plane `I + <L>` inside the zone by the disc radius
//! `rho_L`.
//!
//! All geometric scales live in a [`Geometry`] that can be built from the
//! honest eps-chain or directly at a chosen cutoff K ("scaled mode", with the
//! parameter relations re-verified on the substituted values); the lemma
//! suites exercise the lemmas' hypotheses either way.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{
    derived_constants, exponents, AnalyticityEnvelope, ConstantSet, EpsilonScales, ExponentTable,
    RelationCheck,
};
use crate::error::{CoreError, Result};
use crate::geometry::Subspace;
use crate::lattice::{enumerate_maximal_lattices, vectors_within_l1, Lattice};
use crate::model::{DomainBall, PolynomialH};
use crate::steepness::SteepnessProfile;

/// All scales the covering construction needs, decoupled from eps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geometry {
    pub n: usize,
    /// The real cutoff K entering the scale formulas.
    pub k: f64,
    /// Integer cutoff for lattice enumeration and divisor scans.
    pub k_cutoff: u32,
    /// lambda_j, j = 1..n-1.
    pub lambda: Vec<f64>,
    pub lambda_bar: f64,
    pub e_const: f64,
    /// Exponent gaps a_j, j = 1..n-1.
    pub a_gaps: Vec<f64>,
    /// Diameter coefficients l_j.
    pub l: Vec<f64>,
    pub alphas: Vec<f64>,
    pub coeffs: Vec<f64>,
    /// Covering margin m.
    pub margin: f64,
    pub lipschitz: f64,
    pub omega_min: f64,
    /// Steepness radius delta.
    pub delta: f64,
    pub domain: DomainBall,
    pub budget: u128,
}

impl Geometry {
    /// Honest mode: every scale taken from the eps-chain.
    pub fn from_scales(
        scales: &EpsilonScales,
        consts: &ConstantSet,
        table: &ExponentTable,
        env: &AnalyticityEnvelope,
        profile: &SteepnessProfile,
        domain: DomainBall,
        budget: u128,
    ) -> Self {
        Self {
            n: profile.n,
            k: scales.k,
            k_cutoff: (scales.k.floor() as u32).max(1),
            lambda: scales.lambda.clone(),
            lambda_bar: scales.lambda_bar,
            e_const: consts.e_const,
            a_gaps: table.a_gaps.clone(),
            l: consts.l.clone(),
            alphas: profile.alphas.clone(),
            coeffs: profile.coeffs.clone(),
            margin: scales.margin,
            lipschitz: env.lipschitz_m,
            omega_min: env.omega_min,
            delta: profile.delta,
            domain,
            budget,
        }
    }

    /// Scaled mode: the cutoff K and the margin are chosen directly and the
    /// lambda chain is rebuilt from the honest constants at that K, so the
    /// zones have usable width while the parameter relations still hold
    /// (check with [`verify_geometry`]).
    pub fn scaled(
        profile: &SteepnessProfile,
        env: &AnalyticityEnvelope,
        domain: DomainBall,
        k: f64,
        margin: f64,
        budget: u128,
    ) -> Result<Self> {
        if !(k >= 1.0) || !(margin > 0.0) {
            return Err(CoreError::InvalidArgument(format!("need K >= 1 and margin > 0, got {k}, {margin}")));
        }
        let table = exponents(profile.n, &profile.alphas)?;
        let consts = derived_constants(profile, env)?;
        let lambda_bar = env.omega_min / (2.0 * std::f64::consts::SQRT_2);
        let ak = consts.a_const * k;
        let lambda: Vec<f64> =
            (1..=profile.n - 1).map(|j| lambda_bar / ak.powf(table.q_j(j))).collect();
        Ok(Self {
            n: profile.n,
            k,
            k_cutoff: (k.floor() as u32).max(1),
            lambda,
            lambda_bar,
            e_const: consts.e_const,
            a_gaps: table.a_gaps.clone(),
            l: consts.l.clone(),
            alphas: profile.alphas.clone(),
            coeffs: profile.coeffs.clone(),
            margin,
            lipschitz: env.lipschitz_m,
            omega_min: env.omega_min,
            delta: profile.delta,
            domain,
            budget,
        })
    }

    pub fn zone_width(&self, dim: usize, volume: f64) -> f64 {
        self.lambda[dim - 1] / volume
    }

    pub fn disc_radius(&self, dim: usize, volume: f64) -> f64 {
        self.zone_width(dim, volume) / self.lipschitz
    }

    pub fn divisor_floor(&self, dim: usize, volume: f64) -> f64 {
        (self.e_const * self.k).powf(self.a_gaps[dim - 1]) * self.zone_width(dim, volume)
    }

    pub fn ext_cap(&self, dim: usize, volume: f64) -> f64 {
        self.divisor_floor(dim, volume) / (4.0 * self.lipschitz * self.k)
    }

    /// Drift radius r_j = l_j (lambda_j/C_j)^{1/alpha_j}.
    pub fn drift_radius(&self, j: usize) -> f64 {
        self.l[j - 1] * (self.lambda[j - 1] / self.coeffs[j - 1]).powf(1.0 / self.alphas[j - 1])
    }

    /// rho_0 = lambda_1 / (2 M K).
    pub fn rho0(&self) -> f64 {
        self.lambda[0] / (2.0 * self.lipschitz * self.k)
    }

    /// True iff `point` lies in the shrunk domain D - m.
    pub fn in_shrunk_domain(&self, point: &[f64]) -> bool {
        self.domain.dist_from_center(point) <= self.domain.radius - self.margin
    }
}

const SLACK_TOL: f64 = 1e-10;

fn geom_check(name: &'static str, lattice: Option<&Lattice>, slack: f64) -> RelationCheck {
    RelationCheck {
        name,
        lattice: lattice.map(|l| l.basis.clone()),
        slack,
        pass: slack >= 1.0 - SLACK_TOL,
    }
}

/// Verifies the geometric subset of the parameter relations on the actual
/// scales of `geo` (whether honest or substituted) and the given lattice
/// sample.
pub fn verify_geometry(geo: &Geometry, lattices: &[Lattice]) -> Vec<RelationCheck> {
    let mut checks = Vec::new();
    let n = geo.n;
    let mut order_slack = f64::INFINITY;
    for j in 1..n - 1 {
        order_slack = order_slack.min(geo.lambda[j] / geo.lambda[j - 1]);
    }
    order_slack = order_slack.min(geo.lambda_bar / geo.lambda[n - 2]);
    checks.push(geom_check("lambda chain strictly ordered", None, order_slack));

    let r = 2.0 * n as f64 * geo.margin;
    checks.push(geom_check("confinement radius within half extension", None, (geo.delta / 2.0) / r));
    let r_max = (1..=n - 1).map(|j| geo.drift_radius(j)).fold(geo.rho0(), f64::max);
    checks.push(geom_check("drift radii within margin", None, geo.margin / r_max));
    let r_sum: f64 = geo.rho0() + (1..=n - 1).map(|j| geo.drift_radius(j)).sum::<f64>();
    checks.push(geom_check("drift radii sum within half confinement", None, (r / 2.0) / r_sum));
    checks.push(geom_check("rho0 within steepness radius", None, geo.delta / geo.rho0()));

    for lat in lattices {
        let (j, vol) = (lat.dim, lat.volume);
        let width = geo.zone_width(j, vol);
        let rho = geo.disc_radius(j, vol);
        let cap = geo.ext_cap(j, vol);
        checks.push(geom_check(
            "disc radius within margin and cap",
            Some(lat),
            (geo.margin / 2.0).min(cap) / rho,
        ));
        checks.push(geom_check("extension cap within steepness radius", Some(lat), geo.delta / cap));
        if j <= n - 2 {
            let rhs = ((geo.omega_min / geo.delta) * (geo.margin / 4.0))
                .min((geo.omega_min / (2.0 * geo.delta)) * (geo.margin - rho))
                .min(geo.lambda_bar);
            checks.push(geom_check("zone width within transversality bound", Some(lat), rhs / width));
            let lhs = geo.k
                * geo.lipschitz
                * geo.l[j - 1]
                * (width / geo.coeffs[j - 1]).powf(1.0 / geo.alphas[j - 1]);
            checks.push(geom_check(
                "drift diameter within quarter floor",
                Some(lat),
                (geo.divisor_floor(j, vol) / 4.0) / lhs,
            ));
        }
    }
    checks
}

/// A lattice together with its real span and cached scales.
#[derive(Debug, Clone)]
pub struct LatticeFrame {
    pub lattice: Lattice,
    pub span: Subspace,
    pub zone_width: f64,
    pub disc_radius: f64,
    pub divisor_floor: f64,
    pub ext_cap: f64,
}

/// Precomputed classification context: geometry, the frequency map's
/// polynomial, and all maximal K-lattices per dimension.
pub struct AtlasContext {
    pub geometry: Geometry,
    pub h: PolynomialH,
    /// frames[j-1] holds the frames of dimension j.
    pub frames: Vec<Vec<LatticeFrame>>,
}

impl AtlasContext {
    pub fn new(geometry: Geometry, h: PolynomialH) -> Result<Self> {
        let n = geometry.n;
        if h.n() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: h.n() });
        }
        let mut frames = Vec::with_capacity(n - 1);
        for j in 1..=n - 1 {
            let lats = enumerate_maximal_lattices(n, geometry.k_cutoff, j, geometry.budget)?;
            let mut row = Vec::with_capacity(lats.len());
            for lat in lats {
                let span = Subspace::from_integer_rows(n, &lat.basis)?;
                row.push(LatticeFrame {
                    zone_width: geometry.zone_width(j, lat.volume),
                    disc_radius: geometry.disc_radius(j, lat.volume),
                    divisor_floor: geometry.divisor_floor(j, lat.volume),
                    ext_cap: geometry.ext_cap(j, lat.volume),
                    span,
                    lattice: lat,
                });
            }
            frames.push(row);
        }
        Ok(Self { geometry, h, frames })
    }

    pub fn omega(&self, i: &[f64]) -> DVector<f64> {
        self.h.gradient(i)
    }

    pub fn frame(&self, dim: usize, idx: usize) -> &LatticeFrame {
        &self.frames[dim - 1][idx]
    }

    /// True iff `i` lies in some zone of dimension strictly above `dim`.
    fn in_higher_zone(&self, omega: &DVector<f64>, dim: usize) -> bool {
        (dim + 1..=self.geometry.n - 1)
            .any(|j| self.frames[j - 1].iter().any(|f| zone_membership(omega, f)))
    }
}

/// Zone test `|pi_<L> omega| < delta_L`; ties at machine precision resolve
/// toward resonant.
pub fn zone_membership(omega: &DVector<f64>, frame: &LatticeFrame) -> bool {
    frame.span.project(omega).norm() < frame.zone_width * (1.0 + 1e-14)
}

/// One zone containing a classified point, for audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneAudit {
    pub basis: Vec<Vec<i64>>,
    pub dim: usize,
    pub projection_norm: f64,
    pub zone_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockLabel {
    pub resonant: bool,
    /// Maximal resonant dimension, 0 for the nonresonant block.
    pub dim: usize,
    /// All lattices of the maximal dimension whose zone contains the point.
    pub lattices: Vec<Lattice>,
    /// Every zone (any dimension) containing the point.
    pub memberships: Vec<ZoneAudit>,
}

/// Classifies an action point, scanning dimensions top-down from n-1.
pub fn classify_point(ctx: &AtlasContext, i: &[f64]) -> Result<BlockLabel> {
    let n = ctx.geometry.n;
    if i.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: i.len() });
    }
    let omega = ctx.omega(i);
    let mut memberships = Vec::new();
    let mut top_dim = 0;
    let mut top: Vec<Lattice> = Vec::new();
    for j in (1..=n - 1).rev() {
        for f in &ctx.frames[j - 1] {
            if zone_membership(&omega, f) {
                memberships.push(ZoneAudit {
                    basis: f.lattice.basis.clone(),
                    dim: j,
                    projection_norm: f.span.project(&omega).norm(),
                    zone_width: f.zone_width,
                });
                if top_dim == 0 || top_dim == j {
                    top_dim = j;
                    top.push(f.lattice.clone());
                }
            }
        }
    }
    Ok(BlockLabel { resonant: top_dim > 0, dim: top_dim, lattices: top, memberships })
}

/// Finds points of the block `D_L` inside `D - m` by Newton projection onto
/// the zone core `pi_<L> omega(I) = 0` from seeded random starts.
pub fn sample_block_points(
    ctx: &AtlasContext,
    frame: &LatticeFrame,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = ctx.geometry.n;
    let q = frame.span.orthonormal_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let max_attempts = 400 * count.max(1);
    for _ in 0..max_attempts {
        if out.len() >= count {
            break;
        }
        // random start in the shrunk domain
        let mut p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let radius = (ctx.geometry.domain.radius - ctx.geometry.margin) * rng.gen::<f64>();
        for (v, c) in p.iter_mut().zip(&ctx.geometry.domain.center) {
            *v = c + *v / norm * radius;
        }
        // Newton on g(I) = Q^T omega(I)
        let mut converged = false;
        for _ in 0..60 {
            let g = q.transpose() * ctx.omega(&p);
            if g.norm() < frame.zone_width / 4.0 {
                converged = true;
                break;
            }
            let jmat: DMatrix<f64> = q.transpose() * ctx.h.hessian(&p);
            let svd = jmat.svd(true, true);
            let Ok(step) = svd.solve(&g, 1e-12) else { break };
            for (v, s) in p.iter_mut().zip(step.iter()) {
                *v -= s;
            }
        }
        if !converged {
            continue;
        }
        let omega = ctx.omega(&p);
        if !zone_membership(&omega, frame) {
            continue;
        }
        if ctx.in_higher_zone(&omega, frame.lattice.dim) {
            continue;
        }
        if !ctx.geometry.in_shrunk_domain(&p) {
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

/// Draws points of the nonresonant block `D_0` inside `D - m`.
pub fn sample_nonresonant_points(ctx: &AtlasContext, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = ctx.geometry.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..500 * count.max(1) {
        if out.len() >= count {
            break;
        }
        let mut p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let radius = (ctx.geometry.domain.radius - ctx.geometry.margin) * rng.gen::<f64>();
        for (v, c) in p.iter_mut().zip(&ctx.geometry.domain.center) {
            *v = c + *v / norm * radius;
        }
        let label = classify_point(ctx, &p)?;
        if !label.resonant {
            out.push(p);
        }
    }
    Ok(out)
}

/// Discretized fast-drift disc: connected component of the drift plane
/// inside the zone, thickened by the disc radius, clipped to `D - m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscSample {
    pub anchor: Vec<f64>,
    pub lattice: Lattice,
    pub grid_step: f64,
    pub members: Vec<Vec<f64>>,
}

pub fn fast_drift_disc(
    ctx: &AtlasContext,
    anchor: &[f64],
    frame: &LatticeFrame,
    grid_step: f64,
) -> Result<DiscSample> {
    let geo = &ctx.geometry;
    let n = geo.n;
    let j = frame.lattice.dim;
    let rho = frame.disc_radius;
    if !(grid_step > 0.0 && grid_step <= rho / 4.0) {
        return Err(CoreError::Precondition(format!(
            "grid step {grid_step} must be in (0, rho_L/4 = {}]",
            rho / 4.0
        )));
    }
    let omega = ctx.omega(anchor);
    if !zone_membership(&omega, frame) {
        return Err(CoreError::Precondition("anchor outside the resonant zone".into()));
    }
    if ctx.in_higher_zone(&omega, j) {
        return Err(CoreError::Precondition("anchor inside a higher-dimension zone".into()));
    }
    if !geo.in_shrunk_domain(anchor) {
        return Err(CoreError::Precondition("anchor outside the shrunk domain".into()));
    }

    let q = frame.span.orthonormal_basis(); // n x j
    let normal = frame
        .span
        .complement()
        .ok_or_else(|| CoreError::InvalidArgument("lattice spans the whole space".into()))?;
    let nq = normal.orthonormal_basis(); // n x (n - j)

    let plane_point = |c: &[i64]| -> Vec<f64> {
        let mut p = anchor.to_vec();
        for (col, &ci) in c.iter().enumerate() {
            let dir = q.column(col);
            for (v, d) in p.iter_mut().zip(dir.iter()) {
                *v += grid_step * ci as f64 * d;
            }
        }
        p
    };
    // plane cells must stay close enough to D - m for their balls to matter
    let plane_ok = |p: &Vec<f64>| -> bool {
        zone_membership(&ctx.omega(p), frame)
            && geo.domain.dist_from_center(p) <= geo.domain.radius - geo.margin + rho
    };

    // flood fill on the drift plane
    let mut component: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    component.insert(vec![0; j]);
    queue.push_back(vec![0; j]);
    let mut visited: u128 = 0;
    while let Some(cell) = queue.pop_front() {
        for dim in 0..j {
            for sgn in [-1i64, 1] {
                let mut next = cell.clone();
                next[dim] += sgn;
                if component.contains(&next) {
                    continue;
                }
                visited += 1;
                if visited > geo.budget {
                    return Err(CoreError::BudgetExceeded { count: visited, budget: geo.budget });
                }
                if plane_ok(&plane_point(&next)) {
                    component.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }

    // thicken each plane cell by the rho_L ball (span and normal offsets)
    let reach = (rho / grid_step).floor() as i64;
    let mut member_cells: BTreeSet<Vec<i64>> = BTreeSet::new();
    let offsets = ball_offsets(n, reach);
    for cell in &component {
        for off in &offsets {
            let r2: f64 = off.iter().map(|&o| (o as f64 * grid_step).powi(2)).sum();
            if r2.sqrt() > rho {
                continue;
            }
            let mut full = vec![0i64; n];
            full[..j].copy_from_slice(cell);
            for (fi, oi) in full.iter_mut().zip(off.iter()) {
                *fi += oi;
            }
            member_cells.insert(full);
        }
        if member_cells.len() as u128 > geo.budget {
            return Err(CoreError::BudgetExceeded {
                count: member_cells.len() as u128,
                budget: geo.budget,
            });
        }
    }
    let mut members = Vec::with_capacity(member_cells.len());
    for cell in &member_cells {
        let mut p = anchor.to_vec();
        for (col, &ci) in cell[..j].iter().enumerate() {
            let dir = q.column(col);
            for (v, d) in p.iter_mut().zip(dir.iter()) {
                *v += grid_step * ci as f64 * d;
            }
        }
        for (col, &ci) in cell[j..].iter().enumerate() {
            let dir = nq.column(col);
            for (v, d) in p.iter_mut().zip(dir.iter()) {
                *v += grid_step * ci as f64 * d;
            }
        }
        if geo.in_shrunk_domain(&p) {
            members.push(p);
        }
    }
    Ok(DiscSample {
        anchor: anchor.to_vec(),
        lattice: frame.lattice.clone(),
        grid_step,
        members,
    })
}

fn ball_offsets(n: usize, reach: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-reach; n];
    loop {
        out.push(cur.clone());
        let mut d = n;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            cur[d] += 1;
            if cur[d] <= reach {
                break;
            }
            cur[d] = -reach;
        }
    }
}

/// Diameter verdict for one disc against the bound
/// `l_j (delta_L/C_j)^{1/alpha_j} <= r_j`, with a one-grid-step honesty band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterReport {
    pub measured_max: f64,
    pub bound: f64,
    pub drift_radius: f64,
    pub pass: bool,
}

pub fn verify_diameter_lemma(disc: &DiscSample, geo: &Geometry) -> DiameterReport {
    let j = disc.lattice.dim;
    let width = geo.zone_width(j, disc.lattice.volume);
    let bound = geo.l[j - 1] * (width / geo.coeffs[j - 1]).powf(1.0 / geo.alphas[j - 1]);
    let measured_max = disc
        .members
        .iter()
        .map(|p| {
            p.iter()
                .zip(&disc.anchor)
                .map(|(&x, &a)| (x - a) * (x - a))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0f64, f64::max);
    let drift_radius = geo.drift_radius(j);
    DiameterReport {
        measured_max,
        bound,
        drift_radius,
        pass: measured_max <= bound + disc.grid_step && bound <= drift_radius * (1.0 + 1e-12),
    }
}

/// Result of a naive small-divisor scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisorReport {
    pub floor: f64,
    pub points_checked: usize,
    pub violations: usize,
    /// Smallest divisor seen across all points and admissible k.
    pub min_divisor: f64,
    pub attaining_k: Vec<i64>,
}

/// Independent brute-force check that `|k . omega(I)| >= floor` for every
/// `0 < |k|_1 <= K` with `k` outside the lattice (or every nonzero k when no
/// lattice is given).
pub fn verify_small_divisors(
    points: &[Vec<f64>],
    lattice: Option<&Lattice>,
    k_cutoff: u32,
    floor: f64,
    h: &PolynomialH,
    budget: u128,
) -> Result<DivisorReport> {
    let n = h.n();
    let ks = vectors_within_l1(n, k_cutoff, budget)?;
    let mut min_divisor = f64::INFINITY;
    let mut attaining_k = vec![0i64; n];
    let mut violations = 0usize;
    for p in points {
        let omega = h.gradient(p);
        let mut point_min = f64::INFINITY;
        for k in &ks {
            if let Some(lat) = lattice {
                if lat.contains(k)? {
                    continue;
                }
            }
            let div = k.iter().zip(omega.iter()).map(|(&ki, &w)| ki as f64 * w).sum::<f64>().abs();
            if div < point_min {
                point_min = div;
                if div < min_divisor {
                    min_divisor = div;
                    attaining_k = k.clone();
                }
            }
        }
        if point_min < floor * (1.0 - 1e-12) {
            violations += 1;
        }
    }
    Ok(DivisorReport { floor, points_checked: points.len(), violations, min_divisor, attaining_k })
}

/// Non-overlap verdict between the extended block of one lattice and the
/// zone of another lattice of the same dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonOverlapReport {
    pub samples_checked: usize,
    /// min over samples of |pi_<L2> omega| / delta_L2; >= 1 means disjoint.
    pub min_ratio: f64,
    pub violations: usize,
}

/// Samples the discretized extended block of `frame1` (discs over the given
/// anchors, dilated by one grid step; for dimension n-1 the block samples
/// themselves) and checks that no sample lies in the zone of `frame2`.
pub fn verify_nonoverlap(
    ctx: &AtlasContext,
    frame1: &LatticeFrame,
    frame2: &LatticeFrame,
    anchors: &[Vec<f64>],
    grid_step: f64,
) -> Result<NonOverlapReport> {
    if frame1.lattice.dim != frame2.lattice.dim {
        return Err(CoreError::InvalidArgument("lattices must have equal dimension".into()));
    }
    if frame1.lattice.basis == frame2.lattice.basis {
        return Err(CoreError::InvalidArgument("lattices must be distinct".into()));
    }
    let n = ctx.geometry.n;
    let j = frame1.lattice.dim;
    let mut samples: Vec<Vec<f64>> = Vec::new();
    if j == ctx.geometry.n - 1 {
        // extended block of maximal dimension is the block itself
        samples.extend(anchors.iter().cloned());
    } else {
        for anchor in anchors {
            let disc = fast_drift_disc(ctx, anchor, frame1, grid_step)?;
            for p in &disc.members {
                samples.push(p.clone());
                // dilate by one grid step in every axis direction
                for d in 0..n {
                    for sgn in [-1.0, 1.0] {
                        let mut q = p.clone();
                        q[d] += sgn * grid_step;
                        samples.push(q);
                    }
                }
            }
        }
    }
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0usize;
    for p in &samples {
        let ratio = frame2.span.project(&ctx.omega(p)).norm() / frame2.zone_width;
        if ratio < min_ratio {
            min_ratio = ratio;
        }
        if ratio < 1.0 {
            violations += 1;
        }
    }
    Ok(NonOverlapReport { samples_checked: samples.len(), min_ratio, violations })
}

/// One atlas record, CSV-friendly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRecord {
    pub point: Vec<f64>,
    pub dim: usize,
    /// Canonical basis of the first maximal-dimension lattice, empty for D_0.
    pub lattice: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub total: usize,
    pub labeled: usize,
    /// Counts per block dimension, index 0 = nonresonant.
    pub by_dim: Vec<usize>,
    /// Points inside D - m carrying more than one same-dimension zone at
    /// their own block dimension.
    pub uniqueness_violations: usize,
    pub records: Vec<CoverageRecord>,
}

/// Labels every grid point and checks the covering and the same-dimension
/// uniqueness inside D - m.
pub fn coverage_check(ctx: &AtlasContext, points: &[Vec<f64>]) -> Result<CoverageReport> {
    let mut by_dim = vec![0usize; ctx.geometry.n];
    let mut uniqueness_violations = 0usize;
    let mut records = Vec::with_capacity(points.len());
    for p in points {
        let label = classify_point(ctx, p)?;
        by_dim[label.dim] += 1;
        if label.dim > 0 && ctx.geometry.in_shrunk_domain(p) && label.lattices.len() > 1 {
            uniqueness_violations += 1;
        }
        records.push(CoverageRecord {
            point: p.clone(),
            dim: label.dim,
            lattice: label.lattices.first().map(|l| l.basis.clone()).unwrap_or_default(),
        });
    }
    Ok(CoverageReport {
        total: points.len(),
        labeled: points.len(),
        by_dim,
        uniqueness_violations,
        records,
    })
}
