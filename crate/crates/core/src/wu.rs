//! Top Weyl eigenvalue, eigenform, conformal rescaling and the Kähler,
//! Killing and ambitoric verifications built on them.
//!
//! The closed-form route to the top eigenvalue is the principal-branch
//! Cardano formula for the depressed cubic x³ − ½|W|²x − det W = 0; the
//! cyclic Jacobi solver is kept as a fully independent oracle. Taylor jets
//! of the eigenvalue and eigenform come from a Rayleigh-Schrödinger
//! fixed-point iteration seeded by the scalar solution, which stays smooth
//! through the β = γ locus (where the radicand of the explicit formula
//! degenerates but the top eigenvalue does not).

use crate::chart::{evaluate_jet, ChartPoint, MetricSpec, Orientation};
use crate::curvature::{CurvatureStack, FormField, ScalarField, VectorField};
use crate::jet::Jet;
use crate::tensor::{cov_deriv, j2, norm_value, sum1, JetTensor, Variance, J2};
use crate::{Error, Result};
use std::sync::Arc;

/// Sorted spectrum of a trace-free symmetric 3×3 operator.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct WuSpectrum {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub det_w: f64,
    pub norm_sq_w: f64,
}

fn frob_norm_sq(w: &[[f64; 3]; 3]) -> f64 {
    w.iter().flatten().map(|v| v * v).sum()
}

fn det3(w: &[[f64; 3]; 3]) -> f64 {
    w[0][0] * (w[1][1] * w[2][2] - w[1][2] * w[2][1])
        - w[0][1] * (w[1][0] * w[2][2] - w[1][2] * w[2][0])
        + w[0][2] * (w[1][0] * w[2][1] - w[1][1] * w[2][0])
}

fn validate_input(w: &[[f64; 3]; 3]) -> Result<(f64, f64)> {
    // Relative checks with an absolute floor at machine noise, so that
    // matrices that vanish up to rounding still count as valid input.
    const FLOOR: f64 = 2e-14;
    let scale = frob_norm_sq(w).sqrt();
    let mut asym = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            asym = asym.max((w[i][j] - w[j][i]).abs());
        }
    }
    if asym > (1e-10 * scale).max(FLOOR) {
        return Err(Error::NotSymmetric(asym));
    }
    let trace = w[0][0] + w[1][1] + w[2][2];
    if trace.abs() > (1e-11 * scale).max(FLOOR) {
        return Err(Error::NotTraceFree(trace));
    }
    Ok((scale, trace))
}

/// Spectrum by the principal-branch Cardano formula,
/// α = 2^{2/3} Re ∛(det W + i √(|W|⁶/54 − det²W)).
///
/// The radicand is clamped to zero when it is negative by rounding only;
/// anything below −10⁻¹²·|W|⁶ is treated as inconsistent input.
pub fn cardano_alpha(w: &[[f64; 3]; 3]) -> Result<WuSpectrum> {
    let (_, trace) = validate_input(w)?;
    // Project out the rounding-level trace so the depressed cubic sees a
    // matrix that is trace-free exactly; otherwise the radicand can go
    // negative far beyond rounding for noise-level input.
    let mut w = *w;
    for (i, row) in w.iter_mut().enumerate() {
        row[i] -= trace / 3.0;
    }
    let w = &w;
    let norm_sq = frob_norm_sq(w);
    let det = det3(w);
    let w6 = norm_sq * norm_sq * norm_sq;
    let radicand = w6 / 54.0 - det * det;
    let floor = -1e-12 * w6;
    if radicand < floor {
        return Err(Error::NegativeRadicand { radicand, floor });
    }
    let rad = radicand.max(0.0);
    // z = det + i√rad, principal cube root.
    let r = (det * det + rad).sqrt();
    let phi = rad.sqrt().atan2(det);
    let scale = 2.0f64.powf(2.0 / 3.0) * r.powf(1.0 / 3.0);
    let alpha = scale * (phi / 3.0).cos();
    // β, γ by deflation against the α-eigenvector: the explicit remaining
    // roots would split a degenerate pair by √(rounding), while the 2×2
    // problem on the orthogonal complement is perfectly conditioned.
    let (beta, gamma) = match deflated_pair(w, alpha) {
        Some(pair) => pair,
        None => {
            let mut rest = [
                scale * ((phi + 2.0 * std::f64::consts::PI) / 3.0).cos(),
                scale * ((phi + 4.0 * std::f64::consts::PI) / 3.0).cos(),
            ];
            rest.sort_by(|a, b| b.partial_cmp(a).unwrap());
            (rest[0], rest[1])
        }
    };
    Ok(WuSpectrum { alpha, beta, gamma, det_w: det, norm_sq_w: norm_sq })
}

/// Eigenvalues of W restricted to the orthogonal complement of the
/// α-eigenvector, as a closed-form 2×2 problem. None when the top
/// eigenvector itself cannot be resolved.
fn deflated_pair(w: &[[f64; 3]; 3], alpha: f64) -> Option<(f64, f64)> {
    let v = top_eigenvector(w, alpha).ok()?;
    // orthonormal basis of v⊥, seeded from the least-aligned axis
    let k = (0..3).min_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).unwrap()).unwrap();
    let mut u1 = [0.0f64; 3];
    u1[k] = 1.0;
    let d: f64 = (0..3).map(|i| u1[i] * v[i]).sum();
    for i in 0..3 {
        u1[i] -= d * v[i];
    }
    let n1: f64 = u1.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in u1.iter_mut() {
        *x /= n1;
    }
    let u2 = cross(v, u1);
    let quad = |p: &[f64; 3], q: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += p[i] * w[i][j] * q[j];
            }
        }
        s
    };
    let b11 = quad(&u1, &u1);
    let b22 = quad(&u2, &u2);
    let b12 = quad(&u1, &u2);
    let mean = 0.5 * (b11 + b22);
    let disc = (0.25 * (b11 - b22) * (b11 - b22) + b12 * b12).sqrt();
    Some((mean + disc, mean - disc))
}

/// Independent oracle: classical cyclic Jacobi iteration.
pub fn jacobi_eigen_oracle(w: &[[f64; 3]; 3]) -> Result<WuSpectrum> {
    validate_input(w)?;
    let norm_sq = frob_norm_sq(w);
    let det = det3(w);
    let mut a = *w;
    let scale = norm_sq.sqrt();
    if scale > 0.0 {
        for _sweep in 0..60 {
            let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
            if off <= 1e-14 * scale {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut b = a;
                for k in 0..3 {
                    b[k][p] = c * a[k][p] - s * a[k][q];
                    b[k][q] = s * a[k][p] + c * a[k][q];
                }
                let tmp = b;
                for k in 0..3 {
                    b[p][k] = c * tmp[p][k] - s * tmp[q][k];
                    b[q][k] = s * tmp[p][k] + c * tmp[q][k];
                }
                a = b;
            }
        }
    }
    let mut roots = [a[0][0], a[1][1], a[2][2]];
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(WuSpectrum {
        alpha: roots[0],
        beta: roots[1],
        gamma: roots[2],
        det_w: det,
        norm_sq_w: norm_sq,
    })
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit eigenvector for the (simple) top eigenvalue of a symmetric 3×3.
fn top_eigenvector(w: &[[f64; 3]; 3], alpha: f64) -> Result<[f64; 3]> {
    let rows: [[f64; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| w[i][j] - if i == j { alpha } else { 0.0 })
    });
    let candidates = [
        cross(rows[0], rows[1]),
        cross(rows[1], rows[2]),
        cross(rows[2], rows[0]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| {
            let na: f64 = a.iter().map(|v| v * v).sum();
            let nb: f64 = b.iter().map(|v| v * v).sum();
            na.partial_cmp(&nb).unwrap()
        })
        .unwrap();
    let n: f64 = best.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = frob_norm_sq(w).sqrt();
    if n <= 1e-13 * scale * scale {
        return Err(Error::DegenerateGap { gap: 0.0, scale });
    }
    Ok([best[0] / n, best[1] / n, best[2] / n])
}

fn inv3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let d = det3(m);
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    std::array::from_fn(|i| std::array::from_fn(|j| adj[i][j] / d))
}

/// Taylor jets of the top eigenvalue and unit eigenvector of a symmetric
/// 3×3 jet matrix, by Rayleigh-Schrödinger iteration around the scalar
/// solution. Requires the top eigenvalue to be simple at the base point.
pub fn top_eigen_jet(w: &[[Jet; 3]; 3]) -> Result<(Jet, [Jet; 3])> {
    let order = w[0][0].order();
    let w0: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| w[i][j].value()));
    let spectrum = cardano_alpha(&w0)?;
    let scale = spectrum.norm_sq_w.sqrt();
    let gap = spectrum.alpha - spectrum.beta;
    if gap <= 1e-10 * scale.max(1e-300) {
        return Err(Error::DegenerateGap { gap, scale });
    }
    let v0 = top_eigenvector(&w0, spectrum.alpha)?;
    // Solve (W0 − α0) on v0⊥ through the bordered matrix C = W0 − α0 I + v0 v0ᵀ.
    let c_mat: [[f64; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            w0[i][j] - if i == j { spectrum.alpha } else { 0.0 } + v0[i] * v0[j]
        })
    });
    let c_inv = inv3(&c_mat);

    let mut v: [Jet; 3] = std::array::from_fn(|i| Jet::constant(v0[i], order));
    for _ in 0..=order + 1 {
        let wv: [Jet; 3] = std::array::from_fn(|i| {
            (0..3).map(|j| &w[i][j] * &v[j]).reduce(|a, b| a + b).unwrap()
        });
        let alpha = (0..3).map(|i| &wv[i] * v0[i]).reduce(|a, b| a + b).unwrap();
        // residual r = Wv − αv, projected off v0
        let r: [Jet; 3] = std::array::from_fn(|i| &wv[i] - &alpha * &v[i]);
        let r_dot_v0 = (0..3).map(|i| &r[i] * v0[i]).reduce(|a, b| a + b).unwrap();
        let pr: [Jet; 3] = std::array::from_fn(|i| &r[i] - &r_dot_v0 * v0[i]);
        let correction: [Jet; 3] = std::array::from_fn(|i| {
            (0..3).map(|j| &pr[j] * c_inv[i][j]).reduce(|a, b| a + b).unwrap()
        });
        v = std::array::from_fn(|i| &v[i] - &correction[i]);
    }
    // Normalize and recompute the Rayleigh quotient.
    let norm = (0..3).map(|i| &v[i] * &v[i]).reduce(|a, b| a + b).unwrap().sqrt();
    let inv_norm = norm.recip();
    let v: [Jet; 3] = std::array::from_fn(|i| &v[i] * &inv_norm);
    let wv: [Jet; 3] = std::array::from_fn(|i| {
        (0..3).map(|j| &w[i][j] * &v[j]).reduce(|a, b| a + b).unwrap()
    });
    let alpha = (0..3).map(|i| &wv[i] * &v[i]).reduce(|a, b| a + b).unwrap();
    Ok((alpha, v))
}

/// Coefficients (in a |ω_i|² = 2 basis) of the top eigenform, sign-anchored.
///
/// The unit coefficient vector gives |ω|² = 2. Fails when det W ≤ 0 (Wu
/// criterion) or the top eigenvalue is numerically non-simple.
pub fn top_eigenform(w: &[[f64; 3]; 3], sign_anchor: &[f64; 3]) -> Result<[f64; 3]> {
    let spectrum = cardano_alpha(w)?;
    if spectrum.det_w <= 0.0 {
        return Err(Error::WuFailure { det: spectrum.det_w });
    }
    let scale = spectrum.norm_sq_w.sqrt();
    let gap = spectrum.alpha - spectrum.beta;
    if gap <= 1e-10 * scale {
        return Err(Error::DegenerateGap { gap, scale });
    }
    let mut v = top_eigenvector(w, spectrum.alpha)?;
    if dot3(&v, sign_anchor) < 0.0 {
        v = [-v[0], -v[1], -v[2]];
    }
    Ok(v)
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Deterministic default sign: largest-magnitude coefficient positive.
pub fn default_anchor(v: &[f64; 3]) -> [f64; 3] {
    let k = (0..3)
        .max_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).unwrap())
        .unwrap();
    let mut a = [0.0; 3];
    a[k] = v[k].signum();
    a
}

/// The conformal factor f = α_h^{-1/3}; the rescaled metric g = f⁻²h then
/// satisfies α_g f ≡ 1.
pub fn conformal_factor(alpha_h: f64) -> Result<f64> {
    if alpha_h <= 0.0 {
        return Err(Error::NonPositiveAlpha(alpha_h));
    }
    Ok(alpha_h.powf(-1.0 / 3.0))
}

/// Jets of α_h at a point, from component jets of the base metric.
///
/// Needs two more component orders than the requested eigenvalue order.
pub fn alpha_jets(comp: &J2, orientation: Orientation) -> Result<(Jet, CurvatureStack)> {
    let stack = CurvatureStack::build_from_components(comp, orientation)?;
    let w0 = stack.wplus_value();
    let spectrum = cardano_alpha(&w0)?;
    if spectrum.det_w <= 0.0 {
        return Err(Error::WuFailure { det: spectrum.det_w });
    }
    let (alpha, _) = top_eigen_jet(&stack.wplus)?;
    Ok((alpha, stack))
}

/// The conformally rescaled metric g = f⁻²h = α_h^{2/3} h as a first-class
/// metric spec; all downstream operations treat it like any other metric.
///
/// Evaluating its components at jet order k triggers an order-(k+2)
/// evaluation of h, because α_h consumes two derivatives.
pub fn rescaled_spec(h: &MetricSpec) -> MetricSpec {
    let base = h.clone();
    let orientation = h.orientation;
    let components = Arc::new(crate::chart::closed_over(move |p: &[f64; 4], order: usize| {
        let comp_h = base.components_at(p, order + 2);
        match alpha_jets(&comp_h, orientation) {
            Ok((alpha, _)) => {
                let scale = alpha.powf(2.0 / 3.0);
                j2(|a, b| &scale * &comp_h[a][b])
            }
            Err(_) => j2(|_, _| Jet::constant(f64::NAN, order)),
        }
    }));
    let mut out = MetricSpec::new(
        format!("{}_rescaled", h.name),
        h.chart.clone(),
        h.domain.clone(),
        h.orientation,
        components,
    );
    out = out.with_sample_box(h.sample_box);
    out
}

/// α spectrum, eigenform, conformal factor and rescaled-metric data at a point.
#[derive(Clone, Debug)]
pub struct WuData {
    /// Spectrum of W⁺ for the base metric h.
    pub spectrum_h: WuSpectrum,
    /// Spectrum of W⁺ for the rescaled metric g.
    pub spectrum_g: WuSpectrum,
    /// Conformal factor f = α_h^{-1/3}.
    pub f: f64,
    /// Top eigenform of W⁺_g, |ω|²_g = 2, coordinate components.
    pub omega: [[f64; 4]; 4],
    /// Its coefficients in the Λ⁺(g) basis.
    pub omega_coeff: [f64; 3],
    /// Almost-complex structure J^μ_ν with ω = g(J·,·).
    pub j_matrix: [[f64; 4]; 4],
    /// Scalar curvature of g.
    pub s_g: f64,
    /// ξ^μ = (J ∇s_g)^μ.
    pub xi: [f64; 4],
    pub alpha_g: f64,
}

/// Builds g = f⁻²h, recomputes its curvature, and returns the Wu data.
pub fn rescaled_stack(h: &MetricSpec, p: &ChartPoint, orientation: Orientation) -> Result<WuData> {
    rescaled_stack_anchored(h, p, orientation, None)
}

pub fn rescaled_stack_anchored(
    h: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
    anchor: Option<[f64; 3]>,
) -> Result<WuData> {
    let h_oriented = h.with_orientation(orientation);
    // Base-metric spectrum and Wu check.
    let jet_h = evaluate_jet(&h_oriented, p, 2)?;
    let stack_h = CurvatureStack::build(&jet_h, orientation)?;
    let spectrum_h = cardano_alpha(&stack_h.wplus_value())?;
    if spectrum_h.det_w <= 0.0 {
        return Err(Error::WuFailure { det: spectrum_h.det_w });
    }
    let f = conformal_factor(spectrum_h.alpha)?;

    // Rescaled metric: curvature recomputed from its own component jets.
    let g_spec = rescaled_spec(&h_oriented);
    let jet_g = evaluate_jet(&g_spec, p, 3)?;
    let stack_g = CurvatureStack::build(&jet_g, orientation)?;
    let spectrum_g = cardano_alpha(&stack_g.wplus_value())?;
    if spectrum_g.det_w <= 0.0 {
        return Err(Error::WuFailure { det: spectrum_g.det_w });
    }

    let v_raw = top_eigenvector(&stack_g.wplus_value(), spectrum_g.alpha)?;
    let anchor = anchor.unwrap_or_else(|| default_anchor(&v_raw));
    let coeff = top_eigenform(&stack_g.wplus_value(), &anchor)?;

    let basis_vals: Vec<[[f64; 4]; 4]> = stack_g
        .basis
        .plus
        .iter()
        .map(|f2| std::array::from_fn(|m| std::array::from_fn(|n| f2[m][n].value())))
        .collect();
    let omega: [[f64; 4]; 4] = std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            coeff[0] * basis_vals[0][m][n] + coeff[1] * basis_vals[1][m][n] + coeff[2] * basis_vals[2][m][n]
        })
    });
    let ginv = stack_g.ginv_value();
    let j_matrix: [[f64; 4]; 4] = std::array::from_fn(|m| {
        std::array::from_fn(|n| (0..4).map(|r| ginv[m][r] * omega[r][n]).sum())
    });

    let s_g = stack_g.scalar.value();
    // ∇s_g (vector) and ξ = J ∇s_g.
    let grad_s: [f64; 4] = std::array::from_fn(|c| stack_g.scalar.grad(c));
    let grad_s_up: [f64; 4] =
        std::array::from_fn(|m| (0..4).map(|c| ginv[m][c] * grad_s[c]).sum());
    let xi: [f64; 4] = std::array::from_fn(|m| (0..4).map(|n| j_matrix[m][n] * grad_s_up[n]).sum());

    Ok(WuData {
        spectrum_h,
        spectrum_g,
        f,
        omega,
        omega_coeff: coeff,
        j_matrix,
        s_g,
        xi,
        alpha_g: spectrum_g.alpha,
    })
}

/// α_h as a scalar field.
pub fn alpha_h_field(h: &MetricSpec, orientation: Orientation) -> ScalarField {
    let base = h.with_orientation(orientation);
    Arc::new(move |p: &[f64; 4], order: usize| {
        let comp = base.components_at(p, order + 2);
        let (alpha, _) = alpha_jets(&comp, orientation)?;
        Ok(alpha)
    })
}

/// f = α_h^{-1/3} as a scalar field.
pub fn f_field(h: &MetricSpec, orientation: Orientation) -> ScalarField {
    let alpha = alpha_h_field(h, orientation);
    Arc::new(move |p: &[f64; 4], order: usize| Ok(alpha(p, order)?.powf(-1.0 / 3.0)))
}

/// Jets of the base and rescaled curvature stacks at one point.
pub struct RescaledJets {
    /// α_h, at the requested g-component order.
    pub alpha_h: Jet,
    /// Base-metric stack, built at two orders above the request.
    pub stack_h: CurvatureStack,
    /// Rescaled-metric stack at the requested component order.
    pub stack_g: CurvatureStack,
}

/// Builds g's component jets at `order` directly from h (avoiding a second
/// pass through the rescaled-spec closure) and returns both stacks.
pub fn rescaled_jets(
    h: &MetricSpec,
    p: &[f64; 4],
    order: usize,
    orientation: Orientation,
) -> Result<RescaledJets> {
    let base = h.with_orientation(orientation);
    let comp_h = base.components_at(p, order + 2);
    let (alpha_h, stack_h) = alpha_jets(&comp_h, orientation)?;
    let scale = alpha_h.powf(2.0 / 3.0);
    let comp_g = j2(|a, b| &scale * &comp_h[a][b]);
    let stack_g = CurvatureStack::build_from_components(&comp_g, orientation)?;
    Ok(RescaledJets { alpha_h, stack_h, stack_g })
}

/// Jets of the rescaled-metric curvature stack at a point.
pub fn rescaled_stack_jets(
    h: &MetricSpec,
    p: &[f64; 4],
    order: usize,
    orientation: Orientation,
) -> Result<CurvatureStack> {
    Ok(rescaled_jets(h, p, order, orientation)?.stack_g)
}

/// ω_g as a 2-form field (coordinate components, |ω|²_g = 2).
pub fn omega_field(h: &MetricSpec, orientation: Orientation, anchor: [f64; 3]) -> FormField {
    let base = h.clone();
    Arc::new(move |p: &[f64; 4], order: usize| {
        let stack_g = rescaled_stack_jets(&base, p, order + 2, orientation)?;
        let (_, v) = top_eigen_jet(&stack_g.wplus)?;
        let flip = {
            let vv = [v[0].value(), v[1].value(), v[2].value()];
            if dot3(&vv, &anchor) < 0.0 {
                -1.0
            } else {
                1.0
            }
        };
        Ok(j2(|m, n| {
            let mut acc = &stack_g.basis.plus[0][m][n] * &v[0];
            acc = acc + &stack_g.basis.plus[1][m][n] * &v[1];
            acc = acc + &stack_g.basis.plus[2][m][n] * &v[2];
            acc * flip
        }))
    })
}

/// ξ = J ∇s_g as a vector field on the chart.
pub fn xi_field(h: &MetricSpec, orientation: Orientation, anchor: [f64; 3]) -> VectorField {
    let base = h.clone();
    Arc::new(move |p: &[f64; 4], order: usize| {
        let stack_g = rescaled_stack_jets(&base, p, order + 3, orientation)?;
        let (_, v) = top_eigen_jet(&stack_g.wplus)?;
        let flip = {
            let vv = [v[0].value(), v[1].value(), v[2].value()];
            if dot3(&vv, &anchor) < 0.0 {
                -1.0
            } else {
                1.0
            }
        };
        let omega: J2 = j2(|m, n| {
            let mut acc = &stack_g.basis.plus[0][m][n] * &v[0];
            acc = acc + &stack_g.basis.plus[1][m][n] * &v[1];
            acc = acc + &stack_g.basis.plus[2][m][n] * &v[2];
            acc * flip
        });
        let jmat: J2 = j2(|m, n| sum1(|r| &stack_g.ginv[m][r] * &omega[r][n]));
        let grad_s_up: [Jet; 4] =
            std::array::from_fn(|m| sum1(|c| &stack_g.ginv[m][c] * stack_g.scalar.deriv(c)));
        Ok(std::array::from_fn(|m| sum1(|n| &jmat[m][n] * &grad_s_up[n])))
    })
}

/// |∇ω|_g at a point: near-zero certifies the Kähler property of g.
pub fn nabla_omega_residual(
    h: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
    anchor: [f64; 3],
) -> Result<f64> {
    let omega = omega_field(h, orientation, anchor);
    form_cov_norm(h, p, orientation, &omega)
}

/// |∇φ|_g for any 2-form field, computed in the rescaled metric g.
pub fn form_cov_norm(
    h: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
    phi: &FormField,
) -> Result<f64> {
    let stack_g = rescaled_stack_jets(h, &p.coords, 3, orientation)?;
    let phi_jets = phi(&p.coords, 1)?;
    let t = JetTensor::from_fn(vec![Variance::Down; 2], |i| phi_jets[i[0]][i[1]].clone());
    let grad = cov_deriv(&t, &stack_g.gamma);
    Ok(norm_value(&grad, &stack_g.frame_value()))
}

/// Deliberately wrong eigenform: a unit section of the orthogonal complement
/// of ω inside Λ⁺. Its covariant derivative is the negative control for the
/// Kähler check.
pub fn perp_form_field(h: &MetricSpec, orientation: Orientation, anchor: [f64; 3]) -> FormField {
    let base = h.clone();
    Arc::new(move |p: &[f64; 4], order: usize| {
        let stack_g = rescaled_stack_jets(&base, p, order + 2, orientation)?;
        let (_, v) = top_eigen_jet(&stack_g.wplus)?;
        // pick the basis direction least aligned with v, project, normalize
        let vv = [v[0].value(), v[1].value(), v[2].value()];
        let k = (0..3).min_by(|&i, &j| vv[i].abs().partial_cmp(&vv[j].abs()).unwrap()).unwrap();
        let mut u: [Jet; 3] = std::array::from_fn(|i| {
            Jet::constant(if i == k { 1.0 } else { 0.0 }, v[0].order())
        });
        let udotv = (0..3).map(|i| &u[i] * &v[i]).reduce(|a, b| a + b).unwrap();
        u = std::array::from_fn(|i| &u[i] - &udotv * &v[i]);
        let norm = (0..3).map(|i| &u[i] * &u[i]).reduce(|a, b| a + b).unwrap().sqrt();
        let inv_norm = norm.recip();
        let u: [Jet; 3] = std::array::from_fn(|i| &u[i] * &inv_norm);
        let _ = anchor;
        Ok(j2(|m, n| {
            let mut acc = &stack_g.basis.plus[0][m][n] * &u[0];
            acc = acc + &stack_g.basis.plus[1][m][n] * &u[1];
            acc = acc + &stack_g.basis.plus[2][m][n] * &u[2];
            acc
        }))
    })
}

/// Symmetrized covariant derivative of a vector field, |∇_(a ξ_b)|,
/// measured in the given metric.
pub struct KillingReport {
    pub residual: f64,
    /// |∇ξ| for relative judging.
    pub scale: f64,
}

pub fn killing_residual(
    spec: &MetricSpec,
    xi: &VectorField,
    p: &ChartPoint,
) -> Result<KillingReport> {
    let jet = evaluate_jet(spec, p, 2)?;
    let stack = CurvatureStack::build(&jet, spec.orientation)?;
    let xi_jets = xi(&p.coords, 1)?;
    // lower the index: ξ_b = g_ba ξ^a
    let xi_low: [Jet; 4] = std::array::from_fn(|b| sum1(|a| &stack.comp[b][a] * &xi_jets[a]));
    let t = JetTensor::from_fn(vec![Variance::Down], |i| xi_low[i[0]].clone());
    let grad = cov_deriv(&t, &stack.gamma);
    let frame = stack.frame_value();
    let sym = JetTensor::from_fn(vec![Variance::Down; 2], |i| {
        (grad.get(&[i[0], i[1]]) + grad.get(&[i[1], i[0]])) * 0.5
    });
    Ok(KillingReport {
        residual: norm_value(&sym, &frame),
        scale: norm_value(&grad, &frame),
    })
}

/// |∇_a∇_b ξ^c − R^c_{bad} ξ^d|: vanishes for Killing fields along with the
/// statement that their restriction to geodesics is a Jacobi field.
pub fn jacobi_killing_residual(
    spec: &MetricSpec,
    xi: &VectorField,
    p: &ChartPoint,
) -> Result<KillingReport> {
    let jet = evaluate_jet(spec, p, 3)?;
    let stack = CurvatureStack::build(&jet, spec.orientation)?;
    let xi_jets = xi(&p.coords, 2)?;
    let t = JetTensor::from_fn(vec![Variance::Up], |i| xi_jets[i[0]].clone());
    let d1 = cov_deriv(&t, &stack.gamma);
    let d2 = cov_deriv(&d1, &stack.gamma);
    // R^c_{bad}: raise the first index of R_{ebad}.
    let ginv = stack.ginv_value();
    let riemann_val = |e: usize, b: usize, a: usize, d: usize| stack.riemann[e][b][a][d].value();
    let frame = stack.frame_value();
    let residual = JetTensor::from_fn(
        vec![Variance::Down, Variance::Down, Variance::Up],
        |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            let mut curv = 0.0;
            for e in 0..4 {
                for d in 0..4 {
                    curv += ginv[c][e] * riemann_val(e, b, a, d) * xi_jets[d].value();
                }
            }
            Jet::constant(d2.get(&[a, b, c]).value() - curv, 0)
        },
    );
    let scale = norm_value(&d2, &frame);
    Ok(KillingReport { residual: norm_value(&residual, &frame), scale })
}

/// Both conformal Kähler structures of a doubly Wu-positive metric, plus the
/// endomorphism 𝒮 = ½(α₊⁻² + α₋⁻²)I + (α₊α₋)⁻¹ J₊∘J₋ they generate.
pub struct AmbiKahlerPair {
    pub plus: WuData,
    pub minus: WuData,
    /// Estimated proportionality ξ₋ = κ ξ₊ between the two Killing fields.
    pub kappa: f64,
    /// 𝒮^μ_ν after the constant renormalization that aligns the Killing fields.
    pub s_matrix: [[f64; 4]; 4],
    /// |∇_(a S_bc)| of S = h(𝒮·,·), totally symmetrized.
    pub killing_tensor_residual: f64,
    /// |∇S| for relative judging.
    pub scale: f64,
    pub det_w_plus: f64,
    pub det_w_minus: f64,
}

/// Builds J± from the top eigenforms of W±_h, aligns the minus-side Killing
/// field with the plus one (constant rescaling plus a possible sign flip of
/// J₋), and measures the Killing-tensor residual of 𝒮.
///
/// Requires det W⁺ > 0 and det W⁻ > 0 at the point.
pub fn ambitoric_stack(spec: &MetricSpec, p: &ChartPoint) -> Result<AmbiKahlerPair> {
    let jet = evaluate_jet(spec, p, 3)?;
    let stack = CurvatureStack::build(&jet, spec.orientation)?;
    let spec_plus = cardano_alpha(&stack.wplus_value())?;
    let spec_minus = cardano_alpha(&stack.wminus_value())?;
    if spec_plus.det_w <= 0.0 {
        return Err(Error::WuFailure { det: spec_plus.det_w });
    }
    if spec_minus.det_w <= 0.0 {
        return Err(Error::WuFailure { det: spec_minus.det_w });
    }

    // Eigenforms of both halves, as jets; J is conformally invariant so the
    // base-metric normalization |ω|²_h = 2 gives the same J± as g± would.
    let (alpha_h_plus, v_plus) = top_eigen_jet(&stack.wplus)?;
    let (alpha_h_minus, v_minus) = top_eigen_jet(&stack.wminus)?;
    let omega_of = |v: &[Jet; 3], forms: &[J2; 3]| -> J2 {
        j2(|m, n| {
            let mut acc = &forms[0][m][n] * &v[0];
            acc = acc + &forms[1][m][n] * &v[1];
            acc = acc + &forms[2][m][n] * &v[2];
            acc
        })
    };
    let omega_plus = omega_of(&v_plus, &stack.basis.plus);
    let omega_minus = omega_of(&v_minus, &stack.basis.minus);
    let j_of = |omega: &J2| -> J2 { j2(|m, n| sum1(|r| &stack.ginv[m][r] * &omega[r][n])) };
    let j_plus = j_of(&omega_plus);
    let j_minus = j_of(&omega_minus);

    // g±-level eigenvalues and the extremal vector fields ξ± ∝ J± ∇^{g±} α±.
    let alpha_plus = alpha_h_plus.powf(1.0 / 3.0);
    let alpha_minus = alpha_h_minus.powf(1.0 / 3.0);
    let xi_of = |jm: &J2, alpha: &Jet| -> [f64; 4] {
        // (∇^{g} α)^a = α^{-2} h^{ab} ∂_b α, up to the overall constant.
        let a0 = alpha.value();
        let grad: [f64; 4] = std::array::from_fn(|b| alpha.grad(b));
        let up: [f64; 4] = std::array::from_fn(|a| {
            (0..4).map(|b| stack.ginv[a][b].value() * grad[b]).sum::<f64>() / (a0 * a0)
        });
        std::array::from_fn(|m| (0..4).map(|n| jm[m][n].value() * up[n]).sum())
    };
    let xi_plus = xi_of(&j_plus, &alpha_plus);
    let xi_minus = xi_of(&j_minus, &alpha_minus);
    let h_val: [[f64; 4]; 4] =
        std::array::from_fn(|a| std::array::from_fn(|b| stack.comp[a][b].value()));
    let pair = |u: &[f64; 4], v: &[f64; 4]| -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += h_val[a][b] * u[a] * v[b];
            }
        }
        s
    };
    let xi_plus_sq = pair(&xi_plus, &xi_plus);
    if xi_plus_sq <= 1e-24 {
        return Err(Error::DegenerateScale(xi_plus_sq.sqrt()));
    }
    let kappa = pair(&xi_minus, &xi_plus) / xi_plus_sq;
    if kappa == 0.0 {
        return Err(Error::DegenerateScale(0.0));
    }
    // Rescale g₋ by c² and flip J₋ if needed so that ξ₋ matches ξ₊:
    // under g₋ ↦ c²g₋ the pair (α₋, ξ₋) goes to (cα₋, c⁻⁴ξ₋).
    let c = kappa.abs().powf(0.25);
    let sigma = kappa.signum();
    let alpha_minus_scaled = &alpha_minus * c;
    let j_minus_aligned: J2 = j2(|m, n| &j_minus[m][n] * sigma);

    // 𝒮 = ½(1/α₊² + 1/α̃₋²) I + (α₊ α̃₋)⁻¹ J₊∘J̃₋, as jets of order 1.
    let inv_p2 = (&alpha_plus * &alpha_plus).recip();
    let inv_m2 = (&alpha_minus_scaled * &alpha_minus_scaled).recip();
    let inv_pm = (&alpha_plus * &alpha_minus_scaled).recip();
    let s_endo: J2 = j2(|m, n| {
        let diag = if m == n {
            (&inv_p2 + &inv_m2) * 0.5
        } else {
            Jet::constant(0.0, inv_p2.order())
        };
        diag + sum1(|k| &j_plus[m][k] * &j_minus_aligned[k][n]) * &inv_pm
    });
    let s_low = JetTensor::from_fn(vec![Variance::Down; 2], |i| {
        sum1(|r| &stack.comp[i[0]][r] * &s_endo[r][i[1]])
    });
    let grad = cov_deriv(&s_low, &stack.gamma);
    let frame = stack.frame_value();
    let sym = JetTensor::from_fn(vec![Variance::Down; 3], |i| {
        let (a, b, cx) = (i[0], i[1], i[2]);
        (grad.get(&[a, b, cx]) + grad.get(&[b, cx, a]) + grad.get(&[cx, a, b])) * (1.0 / 3.0)
    });
    let residual = norm_value(&sym, &frame);
    let scale = norm_value(&grad, &frame);

    let plus = rescaled_stack(spec, p, spec.orientation)?;
    let minus = rescaled_stack(spec, p, spec.orientation.flipped())?;
    let s_matrix: [[f64; 4]; 4] =
        std::array::from_fn(|m| std::array::from_fn(|n| s_endo[m][n].value()));
    Ok(AmbiKahlerPair {
        plus,
        minus,
        kappa,
        s_matrix,
        killing_tensor_residual: residual,
        scale,
        det_w_plus: spec_plus.det_w,
        det_w_minus: spec_minus.det_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::MetricFamily;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    fn random_tracefree(rng: &mut impl Rng) -> [[f64; 3]; 3] {
        let mut w = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = rng.gen_range(-1.0..1.0);
                w[i][j] = v;
                w[j][i] = v;
            }
        }
        let tr = (w[0][0] + w[1][1] + w[2][2]) / 3.0;
        for (i, row) in w.iter_mut().enumerate() {
            row[i] -= tr;
        }
        w
    }

    #[test]
    fn cardano_reads_diagonal_matrices() {
        let z = [[0.0; 3]; 3];
        let s = cardano_alpha(&z).unwrap();
        assert_eq!((s.alpha, s.beta, s.gamma), (0.0, 0.0, 0.0));

        let w = [[2.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        let s = cardano_alpha(&w).unwrap();
        assert_relative_eq!(s.alpha, 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.beta, -1.0, epsilon = 1e-12);
        assert_relative_eq!(s.gamma, -1.0, epsilon = 1e-12);
        // degenerate branch: |W|⁶/54 = det² exactly
        let w6 = s.norm_sq_w.powi(3);
        assert_relative_eq!(w6 / 54.0, s.det_w * s.det_w, epsilon = 1e-12);

        let w = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -2.0]];
        let s = cardano_alpha(&w).unwrap();
        assert_relative_eq!(s.alpha, 3.0, epsilon = 1e-12);
        let j = jacobi_eigen_oracle(&w).unwrap();
        assert_relative_eq!(s.alpha, j.alpha, epsilon = 1e-12);
    }

    #[test]
    fn cardano_matches_jacobi_on_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let w = random_tracefree(&mut rng);
            let c = cardano_alpha(&w).unwrap();
            let j = jacobi_eigen_oracle(&w).unwrap();
            worst = worst
                .max((c.alpha - j.alpha).abs())
                .max((c.beta - j.beta).abs())
                .max((c.gamma - j.gamma).abs());
        }
        assert!(worst < 1e-11, "cardano vs jacobi max discrepancy {worst:.3e}");
    }

    #[test]
    fn cardano_scale_equivariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let w = random_tracefree(&mut rng);
            let lam = rng.gen_range(0.1..10.0);
            let ws: [[f64; 3]; 3] =
                std::array::from_fn(|i| std::array::from_fn(|j| lam * w[i][j]));
            let a = cardano_alpha(&w).unwrap().alpha;
            let b = cardano_alpha(&ws).unwrap().alpha;
            assert_relative_eq!(b, lam * a, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_asymmetric_and_traceful_input() {
        let mut w = [[1.0, 0.2, 0.0], [0.0, 0.3, 0.0], [0.0, 0.0, -1.0]];
        assert!(matches!(cardano_alpha(&w), Err(Error::NotSymmetric(_))));
        w[1][0] = 0.2;
        assert!(matches!(cardano_alpha(&w), Err(Error::NotTraceFree(_))));
    }

    #[test]
    fn eigenform_sign_follows_anchor() {
        let w = [[2.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        let v = top_eigenform(&w, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(v[0], 1.0, epsilon = 1e-12);
        let v = top_eigenform(&w, &[-1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(v[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenform_requires_wu() {
        // det < 0: pattern (+, +, −)
        let w = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -2.0]];
        assert!(matches!(top_eigenform(&w, &[1.0, 0.0, 0.0]), Err(Error::WuFailure { .. })));
    }

    #[test]
    fn conformal_factor_basics() {
        assert_relative_eq!(conformal_factor(8.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(conformal_factor(1.0).unwrap(), 1.0, epsilon = 1e-14);
        assert!(conformal_factor(0.0).is_err());
        assert!(conformal_factor(-1.0).is_err());
    }

    #[test]
    fn top_eigen_jet_matches_fd_of_cardano_through_degenerate_branch() {
        // Schwarzschild has β = γ everywhere: the explicit radicand is
        // identically zero, yet α stays smooth. The jet path must agree with
        // finite differences of the pointwise Cardano values.
        let spec = MetricFamily::Schwarzschild { m: 1.0 }.instantiate().unwrap();
        let coords = [0.0, 5.0, 1.2, 0.4];
        let alpha = alpha_h_field(&spec, Orientation::Plus);
        let jet = alpha(&coords, 1).unwrap();
        let h = 1e-5;
        for axis in [1usize, 2] {
            let mut cp = coords;
            cp[axis] += h;
            let mut cm = coords;
            cm[axis] -= h;
            let fp = alpha(&cp, 0).unwrap().value();
            let fm = alpha(&cm, 0).unwrap().value();
            let fd = (fp - fm) / (2.0 * h);
            assert_relative_eq!(jet.grad(axis), fd, max_relative = 1e-6, epsilon = 1e-12);
        }
        // α_h = 2m/r³ for Schwarzschild in this convention.
        assert_relative_eq!(jet.value(), 2.0 / 125.0, max_relative = 1e-9);
    }

    #[test]
    fn rescaled_stack_satisfies_alpha_g_f_identity() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.3, 4.5, 1.1, 0.8]);
        let wu = rescaled_stack(&spec, &p, Orientation::Plus).unwrap();
        // α_g = f² α_h = α_h^{1/3} = 1/f
        assert_relative_eq!(
            wu.alpha_g,
            wu.f * wu.f * wu.spectrum_h.alpha,
            max_relative = 1e-9
        );
        assert_relative_eq!(wu.alpha_g * wu.f, 1.0, max_relative = 1e-9);
        // s_g = 6 α_g and s_g > 0
        assert!(wu.s_g > 0.0);
        assert_relative_eq!(wu.s_g, 6.0 * wu.alpha_g, max_relative = 1e-8);
        // J² = −I
        for m in 0..4 {
            for n in 0..4 {
                let jj: f64 = (0..4).map(|k| wu.j_matrix[m][k] * wu.j_matrix[k][n]).sum();
                let expect = if m == n { -1.0 } else { 0.0 };
                assert_relative_eq!(jj, expect, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn rescaled_stack_rejects_flat_metric() {
        let spec = MetricFamily::Flat.instantiate().unwrap();
        let p = spec.point([0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            rescaled_stack(&spec, &p, Orientation::Plus),
            Err(Error::WuFailure { .. })
        ));
    }

    #[test]
    fn omega_is_eigenform_with_norm_two() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.2, 5.0, 1.3, 1.9]);
        let wu = rescaled_stack(&spec, &p, Orientation::Plus).unwrap();
        let stack_g = rescaled_stack_jets(&spec, &p.coords, 2, Orientation::Plus).unwrap();
        let omega_j: J2 = j2(|m, n| Jet::constant(wu.omega[m][n], 0));
        let ginv = j2(|m, n| stack_g.ginv[m][n].truncate(0));
        let norm = crate::tensor::form2_inner(&omega_j, &omega_j, &ginv);
        assert_relative_eq!(norm.value(), 2.0, max_relative = 1e-9);
        // W⁺(ω) = α ω in the matrix picture
        let w = stack_g.wplus_value();
        let v = wu.omega_coeff;
        for i in 0..3 {
            let wv: f64 = (0..3).map(|j| w[i][j] * v[j]).sum();
            assert_relative_eq!(wv, wu.alpha_g * v[i], epsilon = 1e-9 * wu.alpha_g.abs());
        }
    }

    #[test]
    fn kerr_rescaled_metric_is_kahler_and_perp_control_is_not() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.1, 4.0, 1.0, 0.3]);
        let anchor = [1.0, 0.0, 0.0];
        let res = nabla_omega_residual(&spec, &p, Orientation::Plus, anchor).unwrap();
        assert!(res < 1e-6, "|∇ω| = {res:.3e} should vanish for Kerr");
        let perp = perp_form_field(&spec, Orientation::Plus, anchor);
        let res_perp = form_cov_norm(&spec, &p, Orientation::Plus, &perp).unwrap();
        assert!(res_perp > 1e-3, "perp control |∇φ| = {res_perp:.3e} should not vanish");
    }

    #[test]
    fn killing_residual_flat_controls() {
        let spec = MetricFamily::Flat.instantiate().unwrap();
        let p = spec.point([0.4, 1.0, 2.0, -0.5]);
        // rotation x1 ∂_2 − x2 ∂_1 is Killing
        let rot: VectorField = Arc::new(|x: &[f64; 4], order: usize| {
            let xs = Jet::seed_point(x, order);
            let zero = Jet::constant(0.0, order);
            Ok([zero.clone(), -&xs[2], xs[1].clone(), zero])
        });
        let rep = killing_residual(&spec, &rot, &p).unwrap();
        assert!(rep.residual < 1e-12);
        assert!(rep.scale > 0.1);
        let jac = jacobi_killing_residual(&spec, &rot, &p).unwrap();
        assert!(jac.residual < 1e-10);

        // dilation x1 ∂_1 is not Killing
        let dil: VectorField = Arc::new(|x: &[f64; 4], order: usize| {
            let xs = Jet::seed_point(x, order);
            let zero = Jet::constant(0.0, order);
            Ok([zero.clone(), xs[1].clone(), zero.clone(), zero])
        });
        let rep = killing_residual(&spec, &dil, &p).unwrap();
        assert!(rep.residual > 0.5);

        // (x1)² ∂_2 fails the Jacobi identity
        let quad: VectorField = Arc::new(|x: &[f64; 4], order: usize| {
            let xs = Jet::seed_point(x, order);
            let zero = Jet::constant(0.0, order);
            Ok([zero.clone(), zero.clone(), &xs[1] * &xs[1], zero])
        });
        let jac = jacobi_killing_residual(&spec, &quad, &p).unwrap();
        assert!(jac.residual > 1.0);
    }

    #[test]
    fn coordinate_killing_field_of_schwarzschild_passes() {
        // ∂_φ is Killing; pins the curvature-term convention in Eq. jack.
        let spec = MetricFamily::Schwarzschild { m: 1.0 }.instantiate().unwrap();
        let p = spec.point([0.0, 4.0, 1.1, 0.2]);
        let dphi: VectorField = Arc::new(|_x: &[f64; 4], order: usize| {
            let zero = Jet::constant(0.0, order);
            Ok([zero.clone(), zero.clone(), zero.clone(), Jet::constant(1.0, order)])
        });
        let rep = killing_residual(&spec, &dphi, &p).unwrap();
        assert!(rep.residual < 1e-12 * rep.scale.max(1.0));
        let jac = jacobi_killing_residual(&spec, &dphi, &p).unwrap();
        assert!(
            jac.residual < 1e-9 * jac.scale.max(1e-6),
            "jacobi residual {:.3e} scale {:.3e}",
            jac.residual,
            jac.scale
        );
    }

    #[test]
    fn xi_field_is_killing_for_kerr() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.5, 4.2, 1.4, 2.0]);
        let xi = xi_field(&spec, Orientation::Plus, [1.0, 0.0, 0.0]);
        let rep = killing_residual(&spec, &xi, &p).unwrap();
        assert!(
            rep.residual < 1e-6 * rep.scale.max(1e-8),
            "Killing residual {:.3e}, scale {:.3e}",
            rep.residual,
            rep.scale
        );
    }

    #[test]
    fn ambitoric_kerr_has_killing_tensor() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        for p in crate::sampling::sample_points(&spec, 3, 17) {
            let pair = ambitoric_stack(&spec, &p).unwrap();
            assert!(pair.det_w_plus > 0.0 && pair.det_w_minus > 0.0);
            // h(𝒮·,·) symmetric
            let jet = evaluate_jet(&spec, &p, 0).unwrap();
            let h = jet.g();
            for a in 0..4 {
                for b in 0..4 {
                    let sab: f64 = (0..4).map(|r| h[a][r] * pair.s_matrix[r][b]).sum();
                    let sba: f64 = (0..4).map(|r| h[b][r] * pair.s_matrix[r][a]).sum();
                    assert_relative_eq!(sab, sba, epsilon = 1e-9, max_relative = 1e-7);
                }
            }
            assert!(
                pair.killing_tensor_residual < 1e-5 * pair.scale.max(1e-10),
                "Killing-tensor residual {:.3e}, scale {:.3e}, kappa {:.6e} at {:?}",
                pair.killing_tensor_residual,
                pair.scale,
                pair.kappa,
                p.coords
            );
        }
    }

    #[test]
    fn ambitoric_rejects_taub_nut() {
        let spec = MetricFamily::TaubNut { n: 1.0 }.instantiate().unwrap();
        let p = spec.point([0.3, 4.0, 1.2, 0.7]);
        assert!(matches!(ambitoric_stack(&spec, &p), Err(Error::WuFailure { .. })));
    }
}
