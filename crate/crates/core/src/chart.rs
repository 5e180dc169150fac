//! Chart points, metric specifications and exact metric jets.
//!
//! A [`MetricSpec`] bundles a closed-form component function with its chart
//! metadata, open domain and orientation flag. Components are always
//! evaluated in jet arithmetic; an order-0 evaluation is an ordinary value.

use crate::jet::Jet;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// A point in a named coordinate chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub coords: [f64; 4],
    pub chart_id: &'static str,
}

impl ChartPoint {
    pub fn new(coords: [f64; 4], chart_id: &'static str) -> Self {
        ChartPoint { coords, chart_id }
    }
}

/// Orientation flag selecting which volume form is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Orientation {
    Plus,
    Minus,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Plus => 1.0,
            Orientation::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Plus => Orientation::Minus,
            Orientation::Minus => Orientation::Plus,
        }
    }
}

/// Static description of a coordinate chart.
#[derive(Clone, Debug)]
pub struct ChartInfo {
    pub chart_id: &'static str,
    pub coord_names: [&'static str; 4],
    /// Period of each coordinate, if periodic.
    pub periods: [Option<f64>; 4],
    /// Index of the asymptotic radial coordinate, when one exists.
    pub radial_axis: Option<usize>,
    /// Index of a polar angle θ ∈ (0, π); sampling and quadrature use u = cos θ.
    pub polar_axis: Option<usize>,
}

/// Open box domain, with chart singularities excluded by margins.
#[derive(Clone, Debug)]
pub struct Domain {
    /// Open interval per coordinate. Periodic coordinates use the full period.
    pub ranges: [(f64, f64); 4],
}

impl Domain {
    pub fn contains(&self, x: &[f64; 4]) -> bool {
        self.ranges
            .iter()
            .zip(x.iter())
            .all(|((lo, hi), v)| v > lo && v < hi)
    }
}

/// Metric components as a function of a jet-seeded chart point.
pub trait MetricComponents: Send + Sync {
    fn eval(&self, p: &[f64; 4], order: usize) -> [[Jet; 4]; 4];
}

/// Adapter for closed-form component functions written over jets.
pub struct ClosedForm<F>(pub F);

impl<F> MetricComponents for ClosedForm<F>
where
    F: Fn(&[Jet; 4]) -> [[Jet; 4]; 4] + Send + Sync,
{
    fn eval(&self, p: &[f64; 4], order: usize) -> [[Jet; 4]; 4] {
        let x = Jet::seed_point(p, order);
        (self.0)(&x)
    }
}

/// Adapter for derived metrics that need the requested jet order explicitly
/// (the conformally rescaled metric evaluates its base at a higher order).
pub struct OrderAware<F>(pub F);

impl<F> MetricComponents for OrderAware<F>
where
    F: Fn(&[f64; 4], usize) -> [[Jet; 4]; 4] + Send + Sync,
{
    fn eval(&self, p: &[f64; 4], order: usize) -> [[Jet; 4]; 4] {
        (self.0)(p, order)
    }
}

pub fn closed_over<F>(f: F) -> OrderAware<F>
where
    F: Fn(&[f64; 4], usize) -> [[Jet; 4]; 4] + Send + Sync,
{
    OrderAware(f)
}

/// A named explicit metric with chart, domain and orientation.
#[derive(Clone)]
pub struct MetricSpec {
    pub name: String,
    pub chart: ChartInfo,
    pub domain: Domain,
    pub orientation: Orientation,
    /// Box used for randomized sampling; well inside the domain.
    pub sample_box: [(f64, f64); 4],
    components: Arc<dyn MetricComponents>,
}

impl MetricSpec {
    pub fn new(
        name: impl Into<String>,
        chart: ChartInfo,
        domain: Domain,
        orientation: Orientation,
        components: Arc<dyn MetricComponents>,
    ) -> Self {
        let sample_box = std::array::from_fn(|i| {
            if let Some(t) = chart.periods[i] {
                (0.0, t)
            } else {
                let (lo, hi) = domain.ranges[i];
                if lo.is_finite() && hi.is_finite() {
                    let w = hi - lo;
                    (lo + 0.1 * w, hi - 0.1 * w)
                } else {
                    (-3.0, 3.0)
                }
            }
        });
        MetricSpec { name: name.into(), chart, domain, orientation, sample_box, components }
    }

    pub fn with_sample_box(mut self, sample_box: [(f64, f64); 4]) -> Self {
        self.sample_box = sample_box;
        self
    }

    /// Same metric with the opposite orientation. Flipping twice is the identity.
    pub fn flipped(&self) -> MetricSpec {
        let mut out = self.clone();
        out.orientation = self.orientation.flipped();
        out
    }

    pub fn with_orientation(&self, orientation: Orientation) -> MetricSpec {
        let mut out = self.clone();
        out.orientation = orientation;
        out
    }

    /// Raw component jets without domain or definiteness checks.
    pub fn components_at(&self, p: &[f64; 4], order: usize) -> [[Jet; 4]; 4] {
        self.components.eval(p, order)
    }

    pub fn point(&self, coords: [f64; 4]) -> ChartPoint {
        ChartPoint::new(coords, self.chart.chart_id)
    }

    pub fn contains(&self, p: &ChartPoint) -> bool {
        p.chart_id == self.chart.chart_id && self.domain.contains(&wrap_periodic(&self.chart, p.coords))
    }
}

/// Fold periodic coordinates back into their fundamental range for domain checks.
fn wrap_periodic(chart: &ChartInfo, mut x: [f64; 4]) -> [f64; 4] {
    for (v, period) in x.iter_mut().zip(chart.periods.iter()) {
        if let Some(t) = period {
            *v = v.rem_euclid(*t);
        }
    }
    x
}

/// Metric components and their exact partial derivatives at one point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub point: ChartPoint,
    pub order: usize,
    comp: [[Jet; 4]; 4],
}

impl MetricJet {
    pub fn from_components(point: ChartPoint, order: usize, comp: [[Jet; 4]; 4]) -> Self {
        MetricJet { point, order, comp }
    }

    pub fn components(&self) -> &[[Jet; 4]; 4] {
        &self.comp
    }

    /// g_ab at the point.
    pub fn g(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|b| self.comp[a][b].value()))
    }

    /// dg[c][a][b] = ∂_c g_ab.
    pub fn dg(&self) -> Result<[[[f64; 4]; 4]; 4]> {
        self.require(1)?;
        Ok(std::array::from_fn(|c| {
            std::array::from_fn(|a| {
                std::array::from_fn(|b| {
                    let mut e = [0u8; 4];
                    e[c] = 1;
                    self.comp[a][b].partial(&e)
                })
            })
        }))
    }

    /// d2g[c][d][a][b] = ∂_c ∂_d g_ab.
    pub fn d2g(&self) -> Result<[[[[f64; 4]; 4]; 4]; 4]> {
        self.require(2)?;
        Ok(std::array::from_fn(|c| {
            std::array::from_fn(|d| {
                std::array::from_fn(|a| {
                    std::array::from_fn(|b| {
                        let mut e = [0u8; 4];
                        e[c] += 1;
                        e[d] += 1;
                        self.comp[a][b].partial(&e)
                    })
                })
            })
        }))
    }

    /// ∂^β g_ab for an arbitrary multi-index.
    pub fn partial(&self, beta: &[u8; 4], a: usize, b: usize) -> Result<f64> {
        let total: usize = beta.iter().map(|&k| k as usize).sum();
        self.require(total)?;
        Ok(self.comp[a][b].partial(beta))
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.order < needed {
            Err(Error::InsufficientOrder { needed, available: self.order })
        } else {
            Ok(())
        }
    }
}

/// Run a Cholesky factorization; returns the failing pivot if not positive definite.
pub fn cholesky_check(g: &[[f64; 4]; 4]) -> std::result::Result<(), f64> {
    let mut l = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(s);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(())
}

/// Evaluate metric components and their exact derivatives via jet arithmetic.
///
/// Fails if the point is outside the declared domain or if the components do
/// not form a symmetric positive-definite matrix there.
pub fn evaluate_jet(spec: &MetricSpec, p: &ChartPoint, order: usize) -> Result<MetricJet> {
    if !spec.contains(p) {
        return Err(Error::OutsideDomain { chart: spec.chart.chart_id, point: p.coords });
    }
    let comp = spec.components_at(&p.coords, order);
    let g: [[f64; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|b| comp[a][b].value()));
    if g.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite { point: p.coords, pivot: f64::NAN });
    }
    let mut asym = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            asym = asym.max((g[a][b] - g[b][a]).abs());
        }
    }
    if asym > 1e-10 * (1.0 + g[0][0].abs()) {
        return Err(Error::NotSymmetric(asym));
    }
    if let Err(pivot) = cholesky_check(&g) {
        return Err(Error::NotPositiveDefinite { point: p.coords, pivot });
    }
    Ok(MetricJet::from_components(p.clone(), order, comp))
}

/// Central-difference oracle for [`evaluate_jet`], with one Richardson step.
///
/// Mixed partials are built by nested central differencing of the component
/// function; accuracy is O(step²) before extrapolation. This path never
/// touches the jet arithmetic, so agreement between the two is a genuine
/// cross-check.
pub fn finite_difference_jet(
    spec: &MetricSpec,
    p: &ChartPoint,
    order: usize,
    step: f64,
) -> Result<MetricJet> {
    if !spec.contains(p) {
        return Err(Error::OutsideDomain { chart: spec.chart.chart_id, point: p.coords });
    }

    let mut cache: HashMap<[i64; 4], [[f64; 4]; 4]> = HashMap::new();
    // Offsets are in units of step/2 so that both the h and h/2 stencils share the cache.
    let mut sample = |offset: [i64; 4]| -> Result<[[f64; 4]; 4]> {
        if let Some(v) = cache.get(&offset) {
            return Ok(*v);
        }
        let mut x = p.coords;
        for (xi, o) in x.iter_mut().zip(offset.iter()) {
            *xi += (*o as f64) * step / 2.0;
        }
        if !spec.domain.contains(&wrap_periodic(&spec.chart, x)) {
            return Err(Error::OutsideDomain { chart: spec.chart.chart_id, point: x });
        }
        let comp = spec.components_at(&x, 0);
        let g = std::array::from_fn(|a| std::array::from_fn(|b| comp[a][b].value()));
        cache.insert(offset, g);
        Ok(g)
    };

    // Recursive central differences at half-step granularity `scale` (1 = h/2, 2 = h).
    fn fd(
        beta: [u8; 4],
        offset: [i64; 4],
        scale: i64,
        step: f64,
        sample: &mut dyn FnMut([i64; 4]) -> Result<[[f64; 4]; 4]>,
    ) -> Result<[[f64; 4]; 4]> {
        let axis = match beta.iter().position(|&b| b > 0) {
            None => return sample(offset),
            Some(a) => a,
        };
        let mut lower = beta;
        lower[axis] -= 1;
        let mut plus = offset;
        plus[axis] += scale;
        let mut minus = offset;
        minus[axis] -= scale;
        let fp = fd(lower, plus, scale, step, sample)?;
        let fm = fd(lower, minus, scale, step, sample)?;
        let h = step * (scale as f64) / 2.0;
        Ok(std::array::from_fn(|a| {
            std::array::from_fn(|b| (fp[a][b] - fm[a][b]) / (2.0 * h))
        }))
    }

    let mut partials: Vec<([u8; 4], [[f64; 4]; 4])> = Vec::new();
    for i in 0..crate::jet::coeff_count(order) {
        let beta = crate::jet::exponent(i);
        let coarse = fd(beta, [0; 4], 2, step, &mut sample)?;
        let fine = fd(beta, [0; 4], 1, step, &mut sample)?;
        // Richardson: error is O(h²) per level, so (4·fine − coarse)/3.
        let extrapolated = std::array::from_fn(|a| {
            std::array::from_fn(|b| (4.0 * fine[a][b] - coarse[a][b]) / 3.0)
        });
        partials.push((beta, extrapolated));
    }

    let comp: [[Jet; 4]; 4] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let entries: Vec<([u8; 4], f64)> =
                partials.iter().map(|(beta, g)| (*beta, g[a][b])).collect();
            Jet::from_partials(order, &entries)
        })
    });
    Ok(MetricJet::from_components(p.clone(), order, comp))
}

/// Orthonormal oriented coframe from a metric value.
///
/// Gram-Schmidt over the coordinate coframe in index order 0,1,2,3 with the
/// inverse metric as inner product; e³ is flipped when the requested
/// orientation disagrees with the coordinate one. The construction is
/// deterministic: identical inputs give bit-identical frames.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    /// coframe[a][μ] = (e^a)_μ.
    pub coframe: [[f64; 4]; 4],
    /// frame[a][μ] = (E_a)^μ, the dual vector fields.
    pub frame: [[f64; 4]; 4],
}

pub fn orthonormal_frame(g: &[[f64; 4]; 4], orientation: Orientation) -> Result<Frame> {
    if let Err(pivot) = cholesky_check(g) {
        return Err(Error::NotPositiveDefinite { point: [f64::NAN; 4], pivot });
    }
    let ginv = crate::tensor::inv4_f64(g);
    let coframe = gram_schmidt_coframe(&ginv, orientation);
    // Dual frame: (E_a)^μ = g^{μν} (e^a)_ν.
    let frame = std::array::from_fn(|a| {
        std::array::from_fn(|mu| (0..4).map(|nu| ginv[mu][nu] * coframe[a][nu]).sum())
    });
    Ok(Frame { coframe, frame })
}

fn gram_schmidt_coframe(ginv: &[[f64; 4]; 4], orientation: Orientation) -> [[f64; 4]; 4] {
    let dot = |u: &[f64; 4], v: &[f64; 4]| -> f64 {
        let mut s = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                s += u[m] * ginv[m][n] * v[n];
            }
        }
        s
    };
    let mut e = [[0.0f64; 4]; 4];
    for a in 0..4 {
        let mut v = [0.0f64; 4];
        v[a] = 1.0;
        for b in 0..a {
            let proj = dot(&v, &e[b]);
            for m in 0..4 {
                v[m] -= proj * e[b][m];
            }
        }
        let norm = dot(&v, &v).sqrt();
        for m in 0..4 {
            e[a][m] = v[m] / norm;
        }
    }
    // Gram-Schmidt preserves the coordinate handedness; flip e³ for the other one.
    if orientation == Orientation::Minus {
        for m in 0..4 {
            e[3][m] = -e[3][m];
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use approx::assert_relative_eq;

    fn flat_spec() -> MetricSpec {
        zoo::MetricFamily::Flat.instantiate().unwrap()
    }

    #[test]
    fn flat_jet_is_identity_with_zero_derivatives() {
        let spec = flat_spec();
        let p = spec.point([0.3, -1.0, 2.0, 0.7]);
        let jet = evaluate_jet(&spec, &p, 2).unwrap();
        let g = jet.g();
        for a in 0..4 {
            for b in 0..4 {
                assert_relative_eq!(g[a][b], if a == b { 1.0 } else { 0.0 });
            }
        }
        let dg = jet.dg().unwrap();
        let d2g = jet.d2g().unwrap();
        assert!(dg.iter().flatten().flatten().all(|v| *v == 0.0));
        assert!(d2g.iter().flatten().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn polynomial_metric_first_derivative() {
        // g = diag(1,1,1,x0²): the only nonzero first derivative is ∂_0 g_33 = 2 x0.
        let chart = ChartInfo {
            chart_id: "cartesian",
            coord_names: ["x0", "x1", "x2", "x3"],
            periods: [None; 4],
            radial_axis: None,
            polar_axis: None,
        };
        let domain = Domain { ranges: [(0.1, 100.0), (-100.0, 100.0), (-100.0, 100.0), (-100.0, 100.0)] };
        let spec = MetricSpec::new(
            "poly-diag",
            chart,
            domain,
            Orientation::Plus,
            std::sync::Arc::new(ClosedForm(|x: &[Jet; 4]| {
                let zero = Jet::constant(0.0, x[0].order());
                let one = Jet::constant(1.0, x[0].order());
                let mut g: [[Jet; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
                g[0][0] = one.clone();
                g[1][1] = one.clone();
                g[2][2] = one;
                g[3][3] = &x[0] * &x[0];
                g
            })),
        );
        let p = spec.point([2.0, 0.0, 0.0, 0.0]);
        let jet = evaluate_jet(&spec, &p, 1).unwrap();
        let dg = jet.dg().unwrap();
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let expect = if (c, a, b) == (0, 3, 3) { 4.0 } else { 0.0 };
                    assert_relative_eq!(dg[c][a][b], expect, epsilon = 1e-14);
                }
            }
        }
        // Order-2 second derivative of the same entry is exactly 2; the
        // finite-difference oracle also nails it since the entry is quadratic.
        let jet2 = evaluate_jet(&spec, &p, 2).unwrap();
        assert_relative_eq!(jet2.partial(&[2, 0, 0, 0], 3, 3).unwrap(), 2.0, epsilon = 1e-14);
        // central differences are exact on quadratics, so a coarse step
        // keeps the rounding amplification below the 1e-10 target
        let fd = finite_difference_jet(&spec, &p, 2, 0.1).unwrap();
        assert_relative_eq!(fd.partial(&[2, 0, 0, 0], 3, 3).unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn fd_oracle_of_flat_metric_is_exactly_zero() {
        let spec = flat_spec();
        let p = spec.point([0.0, 1.0, 2.0, 3.0]);
        let fd = finite_difference_jet(&spec, &p, 2, 1e-2).unwrap();
        let dg = fd.dg().unwrap();
        assert!(dg.iter().flatten().flatten().all(|v| v.abs() == 0.0));
    }

    #[test]
    fn schwarzschild_jet_matches_fd_oracle() {
        let spec = zoo::MetricFamily::Schwarzschild { m: 1.0 }.instantiate().unwrap();
        let p = spec.point([0.0, 4.0, 1.1, 0.4]);
        let jet = evaluate_jet(&spec, &p, 2).unwrap();
        let fd = finite_difference_jet(&spec, &p, 2, 1e-4).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..crate::jet::coeff_count(2) {
            let beta = crate::jet::exponent(i);
            for a in 0..4 {
                for b in 0..4 {
                    let exact = jet.partial(&beta, a, b).unwrap();
                    let approx_v = fd.partial(&beta, a, b).unwrap();
                    let scale = exact.abs().max(1.0);
                    worst = worst.max((exact - approx_v).abs() / scale);
                }
            }
        }
        assert!(worst < 1e-6, "jet vs finite differences disagree: {worst:.3e}");
    }

    #[test]
    fn frame_is_orthonormal_and_deterministic() {
        let spec = zoo::MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.2, 5.0, 1.2, 2.5]);
        let jet = evaluate_jet(&spec, &p, 0).unwrap();
        let g = jet.g();
        let f1 = orthonormal_frame(&g, Orientation::Plus).unwrap();
        let f2 = orthonormal_frame(&g, Orientation::Plus).unwrap();
        assert_eq!(f1, f2);
        let ginv = crate::tensor::inv4_f64(&g);
        for a in 0..4 {
            for b in 0..4 {
                let mut dot = 0.0;
                for m in 0..4 {
                    for n in 0..4 {
                        dot += f1.coframe[a][m] * ginv[m][n] * f1.coframe[b][n];
                    }
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_scaling_frame() {
        let g = [
            [4.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let f = orthonormal_frame(&g, Orientation::Plus).unwrap();
        assert_relative_eq!(f.coframe[0][0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.coframe[1][1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn orientation_flip_is_involutive_and_flips_volume() {
        let spec = flat_spec();
        assert_eq!(spec.flipped().flipped().orientation, spec.orientation);
        let g: [[f64; 4]; 4] =
            std::array::from_fn(|a| std::array::from_fn(|b| if a == b { 1.0 } else { 0.0 }));
        let fp = orthonormal_frame(&g, Orientation::Plus).unwrap();
        let fm = orthonormal_frame(&g, Orientation::Minus).unwrap();
        let det = |c: &[[f64; 4]; 4]| {
            let m: [[crate::jet::Jet; 4]; 4] = std::array::from_fn(|a| {
                std::array::from_fn(|b| crate::jet::Jet::constant(c[a][b], 0))
            });
            crate::tensor::det4(&m).value()
        };
        assert_relative_eq!(det(&fp.coframe), 1.0, epsilon = 1e-14);
        assert_relative_eq!(det(&fm.coframe), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let spec = zoo::MetricFamily::Schwarzschild { m: 1.0 }.instantiate().unwrap();
        let p = spec.point([0.0, 1.5, 1.0, 0.0]); // inside the horizon exclusion
        assert!(matches!(evaluate_jet(&spec, &p, 1), Err(Error::OutsideDomain { .. })));
    }
}
