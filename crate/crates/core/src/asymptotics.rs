//! Hypersurface quadrature on ϱ = const slices, boundary-flux limits,
//! fall-off exponent fitting, weighted C^k₁ norms and the Killing-field
//! asymptote comparison.
//!
//! Product quadrature: Gauss-Legendre in cos θ on the polar direction (its
//! nodes then stay clear of the axes) and full-period trapezoid on the
//! periodic ones. Per-shell reductions use fixed-order pairwise summation.

use crate::chart::{ChartPoint, MetricSpec, Orientation};
use crate::curvature::CurvatureStack;
use crate::quadrature::{gauss_legendre_on, pairwise_sum, periodic_trapezoid};
use crate::tensor::{
    cov_deriv, ext_deriv_2form, form3_norm_sq, hodge_star_3form, j2, norm_sq_value,
    wedge_2form_1form, JetTensor, Variance, J2,
};
use crate::wu::{rescaled_jets, top_eigen_jet};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Node counts for the three hypersurface directions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NodeCounts {
    pub polar: usize,
    pub azimuth: usize,
    pub fiber: usize,
}

impl Default for NodeCounts {
    fn default() -> Self {
        NodeCounts { polar: 24, azimuth: 4, fiber: 4 }
    }
}

impl NodeCounts {
    pub fn doubled(self) -> Self {
        NodeCounts { polar: 2 * self.polar, azimuth: 2 * self.azimuth, fiber: 2 * self.fiber }
    }
}

/// Quadrature nodes with weights on a ϱ = const level set.
pub struct HypersurfaceGrid {
    pub rho: f64,
    pub nodes: Vec<ChartPoint>,
    /// Coordinate-measure weights dχ¹dχ²dχ³ per node.
    pub weights: Vec<f64>,
    /// Tangent coordinate axes; the boundary-orientation sign relative to
    /// this ordering is `orientation_sign`.
    pub tangent_axes: [usize; 3],
    pub orientation_sign: f64,
}

impl HypersurfaceGrid {
    /// Product grid on the slice: GL in cos θ, trapezoid on periodic axes.
    pub fn build(spec: &MetricSpec, rho: f64, counts: NodeCounts) -> Result<Self> {
        let radial = spec
            .chart
            .radial_axis
            .ok_or_else(|| Error::Config(format!("{} has no radial axis", spec.name)))?;
        let polar = spec
            .chart
            .polar_axis
            .ok_or_else(|| Error::Config(format!("{} has no polar axis", spec.name)))?;
        let (rlo, rhi) = spec.domain.ranges[radial];
        if rho <= rlo || rho >= rhi {
            return Err(Error::OutsideDomain {
                chart: spec.chart.chart_id,
                point: [rho, f64::NAN, f64::NAN, f64::NAN],
            });
        }

        let mut axes: Vec<usize> = (0..4).filter(|&i| i != radial).collect();
        // polar axis last; the fiber (first periodic axis) comes first
        axes.sort_by_key(|&i| if i == polar { 1 } else { 0 });
        let tangent_axes = [axes[0], axes[1], axes[2]];

        let mut rules: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for &axis in tangent_axes.iter() {
            if axis == polar {
                // Integrate over the full closed range: interior GL nodes
                // never touch the axis, so the chart margins don't apply.
                let (us, ws) = gauss_legendre_on(counts.polar, -1.0, 1.0);
                let thetas: Vec<f64> = us.iter().map(|u| u.acos()).collect();
                // dθ = du / sin θ
                let wts: Vec<f64> = thetas.iter().zip(&ws).map(|(t, w)| w / t.sin()).collect();
                rules.push((thetas, wts));
            } else if let Some(period) = spec.chart.periods[axis] {
                let n = if axis == tangent_axes[0] { counts.fiber } else { counts.azimuth };
                rules.push(periodic_trapezoid(n, period));
            } else {
                return Err(Error::Config(format!(
                    "axis {} of {} is neither polar nor periodic",
                    axis, spec.name
                )));
            }
        }

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (x0, w0) in rules[0].0.iter().zip(&rules[0].1) {
            for (x1, w1) in rules[1].0.iter().zip(&rules[1].1) {
                for (x2, w2) in rules[2].0.iter().zip(&rules[2].1) {
                    let mut coords = [0.0f64; 4];
                    coords[radial] = rho;
                    coords[tangent_axes[0]] = *x0;
                    coords[tangent_axes[1]] = *x1;
                    coords[tangent_axes[2]] = *x2;
                    nodes.push(spec.point(coords));
                    weights.push(w0 * w1 * w2);
                }
            }
        }

        // (outward radial, e₁, e₂, e₃) must be positively oriented.
        let orientation_sign = crate::tensor::permutation_sign([
            radial,
            tangent_axes[0],
            tangent_axes[1],
            tangent_axes[2],
        ]) * spec.orientation.sign();

        Ok(HypersurfaceGrid { rho, nodes, weights, tangent_axes, orientation_sign })
    }

    /// Weighted sum of per-node values, reduced in a fixed pairwise order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        pairwise_sum(&terms)
    }
}

/// Induced 3-volume density √det(g|Σ) at a node.
fn induced_density(g: &[[f64; 4]; 4], axes: &[usize; 3]) -> f64 {
    let m: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| g[axes[i]][axes[j]]));
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    det.max(0.0).sqrt()
}

/// Least-squares fit of log y against log x.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys.iter())
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return Err(Error::NonConvergence("not enough positive samples for a log-log fit".into()));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ssr = (syy - slope * sxy).max(0.0);
    let stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(FitResult { slope, stderr, r_squared, points_used: n })
}

/// Hypersurface integrals of the rescaled metric at one radius.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FluxRow {
    pub radius: f64,
    /// ∫ 1 dμ̌_g
    pub vol_g: f64,
    /// ∫ |W⁺_g| dμ̌_g
    pub wplus_int: f64,
    /// ∫ |s_g| dμ̌_g
    pub s_int: f64,
    /// ∫ ω ∧ ⋆dω
    pub omega_flux: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub rows: Vec<FluxRow>,
    pub vol_fit: FitResult,
    pub wplus_fit: FitResult,
    pub s_fit: FitResult,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FluxOptions {
    pub nodes: NodeCounts,
    /// Re-run each shell with doubled nodes and demand 1e-6 stability.
    pub convergence_check: bool,
}

impl Default for FluxOptions {
    fn default() -> Self {
        FluxOptions { nodes: NodeCounts::default(), convergence_check: true }
    }
}

/// Boundary integrals over a radius ladder, with fitted decay exponents for
/// the volume, |W⁺_g| and |s_g| columns. Everything is with respect to the
/// rescaled metric g of the given base metric.
pub fn boundary_integrals(
    h: &MetricSpec,
    orientation: Orientation,
    anchor: [f64; 3],
    radii: &[f64],
    opts: &FluxOptions,
) -> Result<FluxReport> {
    let mut rows = Vec::with_capacity(radii.len());
    for &rho in radii {
        let row = flux_row(h, orientation, anchor, rho, opts.nodes)?;
        if opts.convergence_check {
            let fine = flux_row(h, orientation, anchor, rho, opts.nodes.doubled())?;
            for (a, b, name) in [
                (row.vol_g, fine.vol_g, "vol_g"),
                (row.wplus_int, fine.wplus_int, "wplus_int"),
                (row.s_int, fine.s_int, "s_int"),
            ] {
                let rel = (a - b).abs() / b.abs().max(1e-300);
                if rel > 1e-6 {
                    return Err(Error::NonConvergence(format!(
                        "{name} at rho = {rho} changed by {rel:.3e} under node doubling"
                    )));
                }
            }
            // omega_flux tends to zero; judge its stability absolutely
            // against the shell volume.
            let drift = (row.omega_flux - fine.omega_flux).abs();
            if drift > 1e-6 * row.vol_g.max(1.0) {
                return Err(Error::NonConvergence(format!(
                    "omega_flux at rho = {rho} drifted {drift:.3e} under node doubling"
                )));
            }
        }
        rows.push(row);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let vol_fit = log_log_fit(&xs, &rows.iter().map(|r| r.vol_g).collect::<Vec<_>>())?;
    let wplus_fit = log_log_fit(&xs, &rows.iter().map(|r| r.wplus_int).collect::<Vec<_>>())?;
    let s_fit = log_log_fit(&xs, &rows.iter().map(|r| r.s_int).collect::<Vec<_>>())?;
    Ok(FluxReport { rows, vol_fit, wplus_fit, s_fit })
}

fn flux_row(
    h: &MetricSpec,
    orientation: Orientation,
    anchor: [f64; 3],
    rho: f64,
    nodes: NodeCounts,
) -> Result<FluxRow> {
    let grid = HypersurfaceGrid::build(h, rho, nodes)?;
    let per_node: Vec<(f64, f64, f64, f64)> = grid
        .nodes
        .par_iter()
        .map(|p| -> Result<(f64, f64, f64, f64)> {
            // order-3 g-jets cover both the scalar densities and the flux form
            let rj = rescaled_jets(h, &p.coords, 3, orientation)?;
            let stack_g = &rj.stack_g;
            let gv: [[f64; 4]; 4] =
                std::array::from_fn(|a| std::array::from_fn(|b| stack_g.comp[a][b].value()));
            let density = induced_density(&gv, &grid.tangent_axes);
            let w_norm: f64 = {
                let m = stack_g.wplus_value();
                m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
            };
            let s_g = stack_g.scalar.value();

            let omega = anchored_omega(stack_g, anchor)?;
            let eps = stack_g.epsilon();
            let d_omega = ext_deriv_2form(&omega);
            let star_d_omega = hodge_star_3form(&d_omega, &stack_g.ginv, &eps);
            let theta = wedge_2form_1form(&omega, &star_d_omega);
            let [a1, a2, a3] = grid.tangent_axes;
            let flux_3form = theta[a1][a2][a3].value() * grid.orientation_sign;
            Ok((density, w_norm * density, s_g.abs() * density, flux_3form))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FluxRow {
        radius: rho,
        vol_g: grid.integrate(&per_node.iter().map(|t| t.0).collect::<Vec<_>>()),
        wplus_int: grid.integrate(&per_node.iter().map(|t| t.1).collect::<Vec<_>>()),
        s_int: grid.integrate(&per_node.iter().map(|t| t.2).collect::<Vec<_>>()),
        omega_flux: grid.integrate(&per_node.iter().map(|t| t.3).collect::<Vec<_>>()),
    })
}

fn anchored_omega(stack_g: &CurvatureStack, anchor: [f64; 3]) -> Result<J2> {
    let (_, v) = top_eigen_jet(&stack_g.wplus)?;
    let vv = [v[0].value(), v[1].value(), v[2].value()];
    let flip = if vv[0] * anchor[0] + vv[1] * anchor[1] + vv[2] * anchor[2] < 0.0 {
        -1.0
    } else {
        1.0
    };
    Ok(j2(|m, n| {
        let mut acc = &stack_g.basis.plus[0][m][n] * &v[0];
        acc = acc + &stack_g.basis.plus[1][m][n] * &v[1];
        acc = acc + &stack_g.basis.plus[2][m][n] * &v[2];
        acc * flip
    }))
}

/// 4-dimensional annulus integral of ½|∇ω|² + 3|dω|² between two radii,
/// with the g-volume measure.
pub fn annulus_energy(
    h: &MetricSpec,
    orientation: Orientation,
    anchor: [f64; 3],
    rho0: f64,
    rho1: f64,
    radial_nodes: usize,
    shell_nodes: NodeCounts,
) -> Result<f64> {
    let (rs, rws) = gauss_legendre_on(radial_nodes, rho0, rho1);
    let mut shell_values = Vec::new();
    for (r, rw) in rs.iter().zip(&rws) {
        let grid = HypersurfaceGrid::build(h, *r, shell_nodes)?;
        let vals: Vec<f64> = grid
            .nodes
            .par_iter()
            .map(|p| -> Result<f64> {
                let rj = rescaled_jets(h, &p.coords, 3, orientation)?;
                let stack_g = &rj.stack_g;
                let omega = anchored_omega(stack_g, anchor)?;
                let omega_t =
                    JetTensor::from_fn(vec![Variance::Down; 2], |i| omega[i[0]][i[1]].clone());
                let grad = cov_deriv(&omega_t, &stack_g.gamma);
                let grad_sq = norm_sq_value(&grad, &stack_g.frame_value()) / 2.0;
                let d_omega = ext_deriv_2form(&omega);
                let d_sq = form3_norm_sq(&d_omega, &stack_g.ginv).value().max(0.0);
                Ok((0.5 * grad_sq + 3.0 * d_sq) * stack_g.sqrt_det.value())
            })
            .collect::<Result<Vec<_>>>()?;
        shell_values.push(rw * grid.integrate(&vals));
    }
    Ok(pairwise_sum(&shell_values))
}

/// Which quantity a fall-off fit tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FalloffQuantity {
    Riemann,
    WPlus,
    AlphaH,
    AlphaG,
    GradAlphaG,
}

impl FalloffQuantity {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "riemann" => FalloffQuantity::Riemann,
            "w_plus" => FalloffQuantity::WPlus,
            "alpha_h" => FalloffQuantity::AlphaH,
            "alpha_g" => FalloffQuantity::AlphaG,
            "grad_alpha_g" => FalloffQuantity::GradAlphaG,
            other => return Err(Error::Config(format!("unknown falloff quantity '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FalloffQuantity::Riemann => "riemann",
            FalloffQuantity::WPlus => "w_plus",
            FalloffQuantity::AlphaH => "alpha_h",
            FalloffQuantity::AlphaG => "alpha_g",
            FalloffQuantity::GradAlphaG => "grad_alpha_g",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FalloffReport {
    pub quantity: FalloffQuantity,
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    /// None when the quantity vanishes identically on every shell.
    pub fit: Option<FitResult>,
    pub exact_zero: bool,
    /// Number of innermost radii discarded before fitting.
    pub discarded: usize,
}

/// Fall-off exponent of sup_{Σ_ϱ} |quantity| over a radius ladder.
///
/// The innermost quarter of the ladder is discarded before the log-log fit
/// to avoid pre-asymptotic contamination.
pub fn falloff_fit(
    h: &MetricSpec,
    orientation: Orientation,
    quantity: FalloffQuantity,
    radii: &[f64],
    nodes: NodeCounts,
    discard_frac: f64,
) -> Result<FalloffReport> {
    let mut sups = Vec::with_capacity(radii.len());
    for &rho in radii {
        let grid = HypersurfaceGrid::build(h, rho, nodes)?;
        let vals: Vec<f64> = grid
            .nodes
            .par_iter()
            .map(|p| falloff_value(h, orientation, quantity, p))
            .collect::<Result<Vec<_>>>()?;
        sups.push(vals.iter().fold(0.0f64, |m, v| m.max(*v)));
    }
    let scale = sups.iter().fold(0.0f64, |m, v| m.max(*v));
    if scale < 1e-13 {
        return Ok(FalloffReport {
            quantity,
            radii: radii.to_vec(),
            sups,
            fit: None,
            exact_zero: true,
            discarded: 0,
        });
    }
    let discard = ((radii.len() as f64) * discard_frac).floor() as usize;
    let fit = log_log_fit(&radii[discard..], &sups[discard..])?;
    Ok(FalloffReport {
        quantity,
        radii: radii.to_vec(),
        sups,
        fit: Some(fit),
        exact_zero: false,
        discarded: discard,
    })
}

fn falloff_value(
    h: &MetricSpec,
    orientation: Orientation,
    quantity: FalloffQuantity,
    p: &ChartPoint,
) -> Result<f64> {
    match quantity {
        FalloffQuantity::Riemann => {
            let jet = crate::chart::evaluate_jet(h, p, 2)?;
            let stack = CurvatureStack::build(&jet, orientation)?;
            Ok(stack.ricci_and_riemann_norms().1)
        }
        FalloffQuantity::WPlus => {
            let jet = crate::chart::evaluate_jet(h, p, 2)?;
            let stack = CurvatureStack::build(&jet, orientation)?;
            let m = stack.wplus_value();
            Ok(m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt())
        }
        FalloffQuantity::AlphaH => {
            let jet = crate::chart::evaluate_jet(h, p, 2)?;
            let stack = CurvatureStack::build(&jet, orientation)?;
            Ok(crate::wu::cardano_alpha(&stack.wplus_value())?.alpha)
        }
        FalloffQuantity::AlphaG => {
            let jet = crate::chart::evaluate_jet(h, p, 2)?;
            let stack = CurvatureStack::build(&jet, orientation)?;
            let alpha_h = crate::wu::cardano_alpha(&stack.wplus_value())?.alpha;
            if alpha_h <= 0.0 {
                return Err(Error::WuFailure { det: alpha_h });
            }
            Ok(alpha_h.powf(1.0 / 3.0))
        }
        FalloffQuantity::GradAlphaG => {
            // |∇α_g|_h from first-order jets of α_h
            let comp = h.components_at(&p.coords, 3);
            let (alpha_h, stack) = crate::wu::alpha_jets(&comp, orientation)?;
            let alpha_g = alpha_h.powf(1.0 / 3.0);
            let grad: [f64; 4] = std::array::from_fn(|c| alpha_g.grad(c));
            let ginv = stack.ginv_value();
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += ginv[a][b] * grad[a] * grad[b];
                }
            }
            Ok(s.max(0.0).sqrt())
        }
    }
}

/// Weighted C^k₁ norm value over a sample plan.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedNorm {
    pub k: usize,
    pub value: f64,
    pub samples: usize,
}

/// Radially graded sample plan for sup-norm estimation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplePlan {
    pub shells: usize,
    pub per_shell: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
}

/// ‖h − h₀‖_{C^k₁} = sup Σ_j (1+dist)^{j+1} |∇ʲ(h−h₀)|: covariant
/// derivatives and norms are h₀'s, and dist(p) = ϱ(p) − ϱ(base) with the
/// base point at the inner edge of the plan.
pub fn weighted_distance(
    h: &MetricSpec,
    h0: &MetricSpec,
    k: usize,
    plan: &SamplePlan,
) -> Result<WeightedNorm> {
    if k > 3 {
        return Err(Error::Config(format!("C^k_1 norm supports k ≤ 3, got {k}")));
    }
    if h.chart.chart_id != h0.chart.chart_id {
        return Err(Error::Config(format!(
            "chart mismatch: {} vs {}",
            h.chart.chart_id, h0.chart.chart_id
        )));
    }
    let radial = h0
        .chart
        .radial_axis
        .ok_or_else(|| Error::Config("weighted norm needs a radial chart".into()))?;
    // log-spaced shells, denser toward the compact core
    let mut points = Vec::new();
    for i in 0..plan.shells {
        let t = i as f64 / (plan.shells.max(2) - 1) as f64;
        let rho = plan.r_min * (plan.r_max / plan.r_min).powf(t);
        points.extend(crate::sampling::sample_shell(h0, rho, plan.per_shell, plan.seed + i as u64));
    }

    let sums: Vec<f64> = points
        .par_iter()
        .map(|p| -> Result<f64> {
            let comp_h = h.components_at(&p.coords, k);
            let comp_h0 = h0.components_at(&p.coords, k);
            let stack0 = CurvatureStack::build_from_components(
                &h0.components_at(&p.coords, k.max(2)),
                h0.orientation,
            )?;
            let frame0 = stack0.frame_value();
            let diff: J2 = j2(|a, b| &comp_h[a][b] - &comp_h0[a][b]);
            let dist = p.coords[radial] - plan.r_min;
            let mut total = 0.0;
            let mut tensor =
                JetTensor::from_fn(vec![Variance::Down; 2], |i| diff[i[0]][i[1]].clone());
            for j in 0..=k {
                let norm = norm_sq_value(&tensor, &frame0).sqrt();
                total += (1.0 + dist).powi(j as i32 + 1) * norm;
                if j < k {
                    tensor = cov_deriv(&tensor, &stack0.gamma);
                }
            }
            Ok(total)
        })
        .collect::<Result<Vec<_>>>()?;
    let value = sums.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(WeightedNorm { k, value, samples: points.len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct KillingAsymptoteReport {
    pub radii: Vec<f64>,
    /// sup over each shell of |ξ/c − T|_h.
    pub deviation_sups: Vec<f64>,
    /// The normalization c, estimated on the outermost shell.
    pub c: f64,
    pub fit: Option<FitResult>,
}

/// Compares the constructed Killing field against the asymptotic fiber
/// field: ξ̂ = ξ/c should approach T at rate ϱ⁻¹. The eigenform sign is
/// chained shell to shell from the innermost reference node.
pub fn killing_asymptote(
    h: &MetricSpec,
    orientation: Orientation,
    radii: &[f64],
    nodes: NodeCounts,
    alf: &crate::zoo::AlfStructure,
) -> Result<KillingAsymptoteReport> {
    if radii.len() < 2 {
        return Err(Error::Config("killing_asymptote needs at least two radii".into()));
    }
    let mut anchor = {
        let p0 = reference_node(h, radii[0])?;
        let stack_g = crate::wu::rescaled_stack_jets(h, &p0.coords, 2, orientation)?;
        let (_, v) = top_eigen_jet(&stack_g.wplus)?;
        crate::wu::default_anchor(&[v[0].value(), v[1].value(), v[2].value()])
    };

    let t_vec = alf.t_components;
    let mut per_shell: Vec<Vec<([f64; 4], [[f64; 4]; 4])>> = Vec::new();
    for &rho in radii {
        // chain the sign along the radial path of reference nodes
        let p_ref = reference_node(h, rho)?;
        let stack_ref = crate::wu::rescaled_stack_jets(h, &p_ref.coords, 2, orientation)?;
        let (_, v_ref) = top_eigen_jet(&stack_ref.wplus)?;
        let mut v_ref = [v_ref[0].value(), v_ref[1].value(), v_ref[2].value()];
        if v_ref[0] * anchor[0] + v_ref[1] * anchor[1] + v_ref[2] * anchor[2] < 0.0 {
            v_ref = [-v_ref[0], -v_ref[1], -v_ref[2]];
        }
        anchor = v_ref;
        let xi = crate::wu::xi_field(h, orientation, anchor);
        let grid = HypersurfaceGrid::build(h, rho, nodes)?;
        let shell: Vec<([f64; 4], [[f64; 4]; 4])> = grid
            .nodes
            .par_iter()
            .map(|p| -> Result<([f64; 4], [[f64; 4]; 4])> {
                let xiv = xi(&p.coords, 0)?;
                let comp = h.components_at(&p.coords, 0);
                let g: [[f64; 4]; 4] =
                    std::array::from_fn(|a| std::array::from_fn(|b| comp[a][b].value()));
                Ok(([xiv[0].value(), xiv[1].value(), xiv[2].value(), xiv[3].value()], g))
            })
            .collect::<Result<Vec<_>>>()?;
        per_shell.push(shell);
    }

    let pair = |g: &[[f64; 4]; 4], u: &[f64; 4], v: &[f64; 4]| -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += g[a][b] * u[a] * v[b];
            }
        }
        s
    };

    // c = median over the outermost shell of ⟨ξ, T⟩ / |T|².
    let outer = per_shell.last().unwrap();
    let mut ratios: Vec<f64> =
        outer.iter().map(|(xi, g)| pair(g, xi, &t_vec) / pair(g, &t_vec, &t_vec)).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let c = ratios[ratios.len() / 2];
    let xi_scale =
        outer.iter().map(|(xi, g)| pair(g, xi, xi).sqrt()).fold(0.0f64, |m, v| m.max(v));
    let t_scale =
        outer.iter().map(|(_, g)| pair(g, &t_vec, &t_vec).sqrt()).fold(0.0f64, |m, v| m.max(v));
    if c.abs() * t_scale < 1e-8 * xi_scale.max(1e-300) {
        return Err(Error::DegenerateScale(c));
    }

    let deviation_sups: Vec<f64> = per_shell
        .iter()
        .map(|shell| {
            shell
                .iter()
                .map(|(xi, g)| {
                    let diff: [f64; 4] = std::array::from_fn(|i| xi[i] / c - t_vec[i]);
                    pair(g, &diff, &diff).max(0.0).sqrt()
                })
                .fold(0.0f64, |m, v| m.max(v))
        })
        .collect();
    let fit = log_log_fit(radii, &deviation_sups).ok();
    Ok(KillingAsymptoteReport { radii: radii.to_vec(), deviation_sups, c, fit })
}

fn reference_node(h: &MetricSpec, rho: f64) -> Result<ChartPoint> {
    let radial = h
        .chart
        .radial_axis
        .ok_or_else(|| Error::Config(format!("{} has no radial axis", h.name)))?;
    let mut coords = [0.0f64; 4];
    coords[radial] = rho;
    if let Some(polar) = h.chart.polar_axis {
        coords[polar] = std::f64::consts::FRAC_PI_2;
    }
    Ok(h.point(coords))
}
