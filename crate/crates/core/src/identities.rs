//! Pointwise residuals and inequality checks for the Weitzenböck and
//! Hodge identities, and the inequality chain that certifies the Kähler
//! property of the rescaled metric.
//!
//! Every report is judged relative to the largest constituent term, with an
//! absolute floor of 1e-14; inequalities get a one-sided rounding slack of
//! 1e-10 times the scale.

use crate::chart::{evaluate_jet, ChartPoint, MetricSpec, Orientation};
use crate::curvature::{
    project_value_tensor, rough_laplacian, CurvatureStack, DivergenceReport, FormField,
};
use crate::jet::Jet;
use crate::tensor::{
    cov_deriv, ext_deriv_1form, ext_deriv_2form, ext_deriv_3form_component, form2_norm_sq,
    form3_norm_sq, hodge_star_2form, hodge_star_3form, hodge_star_4form_component, j2,
    norm_sq_value, wedge_2form_1form, JetTensor, Variance, J2, J4,
};
use crate::wu::{rescaled_jets, top_eigen_jet};
use crate::{Error, Result};
use serde::Serialize;

/// Absolute scale floor for relative judging.
pub const SCALE_FLOOR: f64 = 1e-14;
/// One-sided rounding slack for inequality checks.
pub const INEQ_SLACK: f64 = 1e-10;

pub const TOL_EQ_EINSTEIN: f64 = 1e-5;
pub const TOL_EQ_RESCALED: f64 = 1e-4;
pub const TOL_HODGE: f64 = 1e-5;

/// One identity or inequality, judged at one point.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub point: [f64; 4],
    pub residual: f64,
    /// Magnitude of the largest constituent term.
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Signed slack for inequalities (how far inside the allowed region).
    pub margin: f64,
}

impl ResidualReport {
    pub(crate) fn judge(name: &str, point: [f64; 4], residual: f64, scale: f64, tol: f64) -> Self {
        Self::judge_with_noise(name, point, residual, scale, tol, 0.0)
    }

    /// `char_scale` is the coordinate-level magnitude of the differentiation
    /// pipeline at the point; residuals at its rounding level pass even when
    /// every term of the identity vanishes (Weyl-flat metrics).
    pub(crate) fn judge_with_noise(
        name: &str,
        point: [f64; 4],
        residual: f64,
        scale: f64,
        tol: f64,
        char_scale: f64,
    ) -> Self {
        let pass = residual <= (tol * scale.max(SCALE_FLOOR)).max(1e-11 * char_scale);
        ResidualReport {
            name: name.to_string(),
            point,
            residual,
            scale,
            tolerance: tol,
            pass,
            margin: 0.0,
        }
    }

    /// `noise_floor` is the pre-cancellation magnitude of the expression's
    /// constituents; several of these inequalities are exact cancellations on
    /// conformally Kähler metrics, so the computed terms alone sit at
    /// rounding level and cannot carry the slack.
    pub(crate) fn judge_inequality(
        name: &str,
        point: [f64; 4],
        violation: f64,
        scale: f64,
        noise_floor: f64,
    ) -> Self {
        let slack = INEQ_SLACK * scale.max(noise_floor).max(SCALE_FLOOR);
        ResidualReport {
            name: name.to_string(),
            point,
            residual: violation.max(0.0),
            scale,
            tolerance: INEQ_SLACK,
            pass: violation <= slack,
            margin: -violation,
        }
    }
}

type V2 = [[f64; 4]; 4];
type V4 = [[[[f64; 4]; 4]; 4]; 4];

fn values2(j: &J2) -> V2 {
    std::array::from_fn(|a| std::array::from_fn(|b| j[a][b].value()))
}

fn values4(j: &J4) -> V4 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| std::array::from_fn(|d| j[a][b][c][d].value()))
        })
    })
}

fn raise2(phi: &V2, ginv: &V2) -> V2 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for m in 0..4 {
                for n in 0..4 {
                    s += ginv[a][m] * ginv[b][n] * phi[m][n];
                }
            }
            s
        })
    })
}

/// Quadratic form of a Weyl-type value tensor on a pair of 2-forms:
/// A(φ, ψ) = ¼ A^{abcd} φ_{ab} ψ_{cd}.
fn weyl_quadform(a: &V4, ginv: &V2, phi: &V2, psi: &V2) -> f64 {
    let phi_up = raise2(phi, ginv);
    let psi_up = raise2(psi, ginv);
    let mut s = 0.0;
    for x in 0..4 {
        for y in 0..4 {
            if phi_up[x][y] == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    inner += a[x][y][c][d] * psi_up[c][d];
                }
            }
            s += phi_up[x][y] * inner;
        }
    }
    0.25 * s
}

/// Endomorphism action [A(φ)]_{cd} = ½ A^{ab}_{cd} φ_{ab} at the value level.
fn weyl_action(a: &V4, ginv: &V2, phi: &V2) -> V2 {
    let phi_up = raise2(phi, ginv);
    std::array::from_fn(|c| {
        std::array::from_fn(|d| {
            let mut s = 0.0;
            for x in 0..4 {
                for y in 0..4 {
                    s += a[x][y][c][d] * phi_up[x][y];
                }
            }
            0.5 * s
        })
    })
}

fn frob3(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Residual of the Weitzenböck identity for a harmonic-Weyl metric:
/// 0 = ∇*∇W⁺ + (s/2)W⁺ − 6 W⁺∘W⁺ + 2|W⁺|² I, as Λ⁺-basis matrices.
///
/// Requires an Einstein metric (so that δW⁺ = 0 holds) and fourth-order jets.
pub fn weitzenbock_einstein_residual(
    spec: &MetricSpec,
    p: &ChartPoint,
    tol: f64,
) -> Result<ResidualReport> {
    let jet = evaluate_jet(spec, p, 4)?;
    let stack = CurvatureStack::build(&jet, spec.orientation)?;
    // Einstein ⟺ the trace-free Ricci vanishes.
    let s = stack.scalar.value();
    let ric0 = crate::tensor::JetTensor::from_fn(vec![Variance::Down; 2], |i| {
        Jet::constant(
            stack.ricci[i[0]][i[1]].value() - 0.25 * s * stack.comp[i[0]][i[1]].value(),
            0,
        )
    });
    let ric0_norm = norm_sq_value(&ric0, &stack.frame_value()).sqrt();
    let (_, rie) = stack.ricci_and_riemann_norms();
    let rel = ric0_norm / rie.max(SCALE_FLOOR);
    if rie > SCALE_FLOOR && rel > 1e-6 {
        return Err(Error::NotEinstein { point: p.coords, rel });
    }
    let wp = stack.weyl_half_tensor(1.0);
    let wp_tensor = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
        wp[i[0]][i[1]][i[2]][i[3]].clone()
    });
    let lap = rough_laplacian(&wp_tensor, &stack);
    let m_lap = project_value_tensor(&lap, &stack)?;
    let m = stack.wplus_value();
    let s = stack.scalar.value();
    residual_from_terms("weitzenbock_einstein", p, tol, &m_lap, &m, s, 1.0, stack.characteristic_scale())
}

#[allow(clippy::too_many_arguments)]
fn residual_from_terms(
    name: &str,
    p: &ChartPoint,
    tol: f64,
    m_lap: &[[f64; 3]; 3],
    m: &[[f64; 3]; 3],
    s: f64,
    f: f64,
    char_scale: f64,
) -> Result<ResidualReport> {
    // m_lap + (s/2) f·m − 6 f·m² + 2 f |m|² I
    let norm_sq: f64 = m.iter().flatten().map(|v| v * v).sum();
    let mut t_scal = [[0.0f64; 3]; 3];
    let mut t_quad = [[0.0f64; 3]; 3];
    let mut t_id = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t_scal[i][j] = 0.5 * s * f * m[i][j];
            let m2: f64 = (0..3).map(|k| m[i][k] * m[k][j]).sum();
            t_quad[i][j] = -6.0 * f * m2;
            t_id[i][j] = if i == j { 2.0 * f * norm_sq } else { 0.0 };
        }
    }
    let total: [[f64; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| m_lap[i][j] + t_scal[i][j] + t_quad[i][j] + t_id[i][j])
    });
    let scale = frob3(m_lap).max(frob3(&t_scal)).max(frob3(&t_quad)).max(frob3(&t_id));
    Ok(ResidualReport::judge_with_noise(name, p.coords, frob3(&total), scale, tol, char_scale))
}

/// Residual of the rescaled Weitzenböck identity
/// 0 = ∇*∇(fW⁺) + (s/2) fW⁺ − 6 fW⁺∘W⁺ + 2 f|W⁺|² I,
/// every term computed with respect to g = f⁻²h, f = α_h^{-1/3}.
pub fn weitzenbock_rescaled_residual(
    h: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
    tol: f64,
) -> Result<ResidualReport> {
    if !h.contains(p) {
        return Err(Error::OutsideDomain { chart: h.chart.chart_id, point: p.coords });
    }
    let rj = rescaled_jets(h, &p.coords, 4, orientation)?;
    let stack_g = &rj.stack_g;
    let f = rj.alpha_h.powf(-1.0 / 3.0);
    let wp = stack_g.weyl_half_tensor(1.0);
    let a_tensor = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
        &f * &wp[i[0]][i[1]][i[2]][i[3]]
    });
    let lap = rough_laplacian(&a_tensor, stack_g);
    let m_lap = project_value_tensor(&lap, stack_g)?;
    let m = stack_g.wplus_value();
    let s = stack_g.scalar.value();
    residual_from_terms(
        "weitzenbock_rescaled",
        p,
        tol,
        &m_lap,
        &m,
        s,
        f.value(),
        stack_g.characteristic_scale(),
    )
}

/// δ_g(fW⁺) = −∇·(fW⁺) with respect to the rescaled metric: the weighted
/// conformal invariance of the harmonic-Weyl equation.
pub fn divergence_fw(
    h: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
) -> Result<DivergenceReport> {
    if !h.contains(p) {
        return Err(Error::OutsideDomain { chart: h.chart.chart_id, point: p.coords });
    }
    let rj = rescaled_jets(h, &p.coords, 3, orientation)?;
    let stack_g = &rj.stack_g;
    let f = rj.alpha_h.powf(-1.0 / 3.0);
    let wp = stack_g.weyl_half_tensor(1.0);
    let a_tensor = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
        &f * &wp[i[0]][i[1]][i[2]][i[3]]
    });
    let grad = cov_deriv(&a_tensor, &stack_g.gamma);
    let ginv = stack_g.ginv_value();
    let components: [[[f64; 4]; 4]; 4] = std::array::from_fn(|b| {
        std::array::from_fn(|c| {
            std::array::from_fn(|d| {
                let mut s = 0.0;
                for e in 0..4 {
                    for a in 0..4 {
                        s -= ginv[e][a] * grad.get(&[e, a, b, c, d]).value();
                    }
                }
                s
            })
        })
    });
    let frame = stack_g.frame_value();
    let div_tensor = JetTensor::from_fn(vec![Variance::Down; 3], |i| {
        Jet::constant(components[i[0]][i[1]][i[2]], 0)
    });
    Ok(DivergenceReport {
        components,
        norm: norm_sq_value(&div_tensor, &frame).sqrt(),
        scale: norm_sq_value(&grad, &frame).sqrt(),
    })
}

/// The Hodge Laplacian (d+d*)²φ on a 2-form, computed purely by exterior
/// calculus (d and ⋆), with no covariant derivatives. One side of the
/// two-sided Weitzenböck check.
pub fn hodge_laplacian_exterior(stack: &CurvatureStack, phi: &J2) -> J2 {
    let eps = stack.epsilon();
    let ginv = &stack.ginv;
    // δφ = −⋆d⋆φ
    let star_phi = hodge_star_2form(phi, ginv, &eps);
    let d_star_phi = ext_deriv_2form(&star_phi);
    let delta_phi: [Jet; 4] = {
        let s = hodge_star_3form(&d_star_phi, ginv, &eps);
        std::array::from_fn(|i| -&s[i])
    };
    // d δφ
    let d_delta = ext_deriv_1form(&delta_phi);
    // δ dφ = −⋆d⋆dφ
    let d_phi = ext_deriv_2form(phi);
    let star_d_phi = hodge_star_3form(&d_phi, ginv, &eps);
    let d_star_d_phi = ext_deriv_1form(&star_d_phi);
    let delta_d = {
        let s = hodge_star_2form(&d_star_d_phi, ginv, &eps);
        j2(|a, b| -&s[a][b])
    };
    j2(|a, b| &d_delta[a][b] + &delta_d[a][b])
}

/// Two-sided residual of the Weitzenböck formula for the Hodge Laplacian
/// on self-dual 2-forms: (d+d*)²φ = ∇*∇φ − 2W⁺(φ) + (s/3)φ.
///
/// Valid for any metric. The left side is pure exterior calculus, the right
/// side pure covariant calculus; agreement cross-checks both pipelines.
pub fn hodge_weitzenbock_residual(
    spec: &MetricSpec,
    p: &ChartPoint,
    phi: &FormField,
    tol: f64,
) -> Result<ResidualReport> {
    let jet = evaluate_jet(spec, p, 2)?;
    let stack = CurvatureStack::build(&jet, spec.orientation)?;
    let phi_jets = phi(&p.coords, 2)?;
    let lhs = values2(&hodge_laplacian_exterior(&stack, &phi_jets));

    // ∇*∇φ
    let t = JetTensor::from_fn(vec![Variance::Down; 2], |i| phi_jets[i[0]][i[1]].clone());
    let d1 = cov_deriv(&t, &stack.gamma);
    let d2 = cov_deriv(&d1, &stack.gamma);
    let ginv = stack.ginv_value();
    let rough: V2 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for e in 0..4 {
                for f in 0..4 {
                    s -= ginv[e][f] * d2.get(&[e, f, a, b]).value();
                }
            }
            s
        })
    });
    let wp4 = values4(&stack.weyl_half_tensor(1.0));
    let phi_vals = values2(&phi_jets);
    let w_phi = weyl_action(&wp4, &ginv, &phi_vals);
    let s = stack.scalar.value();
    let rhs: V2 = std::array::from_fn(|a| {
        std::array::from_fn(|b| rough[a][b] - 2.0 * w_phi[a][b] + s / 3.0 * phi_vals[a][b])
    });

    let ginv_j = j2(|a, b| Jet::constant(ginv[a][b], 0));
    let norm_of = |v: &V2| -> f64 {
        let vj = j2(|a, b| Jet::constant(v[a][b], 0));
        form2_norm_sq(&vj, &ginv_j).value().max(0.0).sqrt()
    };
    let diff: V2 = std::array::from_fn(|a| std::array::from_fn(|b| lhs[a][b] - rhs[a][b]));
    let term_w: V2 = std::array::from_fn(|a| std::array::from_fn(|b| 2.0 * w_phi[a][b]));
    let term_s: V2 = std::array::from_fn(|a| std::array::from_fn(|b| s / 3.0 * phi_vals[a][b]));
    let scale = norm_of(&lhs)
        .max(norm_of(&rough))
        .max(norm_of(&term_w))
        .max(norm_of(&term_s));
    Ok(ResidualReport::judge("hodge_weitzenbock", p.coords, norm_of(&diff), scale, tol))
}

/// The six pointwise inequalities of the conformal-Kähler argument, plus the
/// derived bound 4√3 α_g ≥ s₊, all evaluated in the rescaled metric g.
pub fn inequality_battery(
    h: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
    anchor: [f64; 3],
) -> Result<Vec<ResidualReport>> {
    if !h.contains(p) {
        return Err(Error::OutsideDomain { chart: h.chart.chart_id, point: p.coords });
    }
    let rj = rescaled_jets(h, &p.coords, 4, orientation)?;
    let stack_g = &rj.stack_g;
    let ginv = stack_g.ginv_value();
    let frame = stack_g.frame_value();

    // ω as order-2 jets, sign-anchored.
    let (_, v) = top_eigen_jet(&stack_g.wplus)?;
    let vv = [v[0].value(), v[1].value(), v[2].value()];
    let flip = if vv[0] * anchor[0] + vv[1] * anchor[1] + vv[2] * anchor[2] < 0.0 {
        -1.0
    } else {
        1.0
    };
    let omega: J2 = j2(|m, n| {
        let mut acc = &stack_g.basis.plus[0][m][n] * &v[0];
        acc = acc + &stack_g.basis.plus[1][m][n] * &v[1];
        acc = acc + &stack_g.basis.plus[2][m][n] * &v[2];
        acc * flip
    });
    let omega_vals = values2(&omega);

    // ∇ω and its norms.
    let omega_t = JetTensor::from_fn(vec![Variance::Down; 2], |i| omega[i[0]][i[1]].clone());
    let grad_omega = cov_deriv(&omega_t, &stack_g.gamma);
    let grad_omega_sq = norm_sq_value(&grad_omega, &frame) / 2.0; // form convention
    let grad_omega_norm = grad_omega_sq.sqrt();

    let wp4 = values4(&stack_g.weyl_half_tensor(1.0));
    let m = stack_g.wplus_value();
    let w_norm: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let s_g = stack_g.scalar.value();
    let alpha_g = crate::wu::cardano_alpha(&m)?.alpha;

    // Pre-cancellation constituent magnitudes.
    let omega_max = omega_vals.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut gamma_max = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                gamma_max = gamma_max.max(stack_g.gamma[a][b][c].value().abs());
            }
        }
    }
    let mut domega_raw = 0.0f64;
    for e in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                domega_raw = domega_raw.max(omega[a][b].grad(e).abs());
            }
        }
    }
    // magnitude of the raw terms entering ∇ω, dω and friends
    let dscale = domega_raw + gamma_max * omega_max;
    let noise = (1.0 + w_norm + s_g.abs()) * (1.0 + dscale) * (1.0 + dscale);

    let mut out = Vec::new();

    // (a) W⁺(∇ᵃω, ∇_aω) ≤ 0
    let mut q_a = 0.0;
    for e in 0..4 {
        for ep in 0..4 {
            if ginv[e][ep] == 0.0 {
                continue;
            }
            let de: V2 = std::array::from_fn(|a| {
                std::array::from_fn(|b| grad_omega.get(&[e, a, b]).value())
            });
            let dep: V2 = std::array::from_fn(|a| {
                std::array::from_fn(|b| grad_omega.get(&[ep, a, b]).value())
            });
            q_a += ginv[e][ep] * weyl_quadform(&wp4, &ginv, &de, &dep);
        }
    }
    let scale_a = w_norm * grad_omega_sq;
    out.push(ResidualReport::judge_inequality(
        "w_grad_omega_nonpositive",
        p.coords,
        q_a,
        scale_a,
        noise,
    ));

    // (b) ⟨∇*∇(fW⁺), ω⊗ω⟩ ≥ 2|∇ω|²
    let f_jet = rj.alpha_h.powf(-1.0 / 3.0);
    let wp_jets = stack_g.weyl_half_tensor(1.0);
    let a_tensor = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
        &f_jet * &wp_jets[i[0]][i[1]][i[2]][i[3]]
    });
    let lap = rough_laplacian(&a_tensor, stack_g);
    let m_lap = project_value_tensor(&lap, stack_g)?;
    let lhs_b = weyl_quadform(&lap, &ginv, &omega_vals, &omega_vals);
    let rhs_b = 2.0 * grad_omega_sq;
    let lap_norm = frob3(&m_lap);
    out.push(ResidualReport::judge_inequality(
        "rough_laplacian_fw_bound",
        p.coords,
        rhs_b - lhs_b,
        lhs_b.abs().max(rhs_b).max(2.0 * lap_norm),
        noise,
    ));

    // (c) 0 ≥ ½|∇ω|² + (3/2)⟨ω, (d+d*)²ω⟩
    let hodge = values2(&hodge_laplacian_exterior(stack_g, &omega));
    let ginv_j = j2(|a, b| Jet::constant(ginv[a][b], 0));
    let omega_j0 = j2(|a, b| Jet::constant(omega_vals[a][b], 0));
    let hodge_j0 = j2(|a, b| Jet::constant(hodge[a][b], 0));
    let inner_c = crate::tensor::form2_inner(&omega_j0, &hodge_j0, &ginv_j).value();
    let v_c = 0.5 * grad_omega_sq + 1.5 * inner_c;
    // the Hodge Laplacian of ω is a cancellation of O(α)-sized pieces
    let hodge_constituents = 1.5 * 2.0 * (2.0 * w_norm + s_g.abs() / 3.0);
    out.push(ResidualReport::judge_inequality(
        "hodge_pointwise_bound",
        p.coords,
        v_c,
        (0.5 * grad_omega_sq).max(1.5 * inner_c.abs()).max(hodge_constituents),
        noise,
    ));

    // (d) 2√6 |W⁺| − s ≥ 2|∇ω|²; the left side itself cancels exactly in
    // the degenerate-spectrum case, so both pieces set the scale.
    let lhs_d = 2.0 * 6.0f64.sqrt() * w_norm - s_g;
    let v_d = 2.0 * grad_omega_sq - lhs_d;
    out.push(ResidualReport::judge_inequality(
        "weyl_scalar_gradient_bound",
        p.coords,
        v_d,
        (2.0 * 6.0f64.sqrt() * w_norm).max(s_g.abs()).max(2.0 * grad_omega_sq),
        noise,
    ));

    // (e) 2√2 |∇ω| ≥ |ω ∧ ⋆dω|, plus the sharp variant with constant 1
    let eps_t = stack_g.epsilon();
    let d_omega = ext_deriv_2form(&omega);
    let star_d_omega = hodge_star_3form(&d_omega, &stack_g.ginv, &eps_t);
    let theta = wedge_2form_1form(&omega, &star_d_omega);
    let theta_norm = form3_norm_sq(&theta, &stack_g.ginv).value().max(0.0).sqrt();
    out.push(ResidualReport::judge_inequality(
        "flux_form_bound",
        p.coords,
        theta_norm - 2.0 * 2.0f64.sqrt() * grad_omega_norm,
        theta_norm.max(2.0 * 2.0f64.sqrt() * grad_omega_norm),
        noise,
    ));
    out.push(ResidualReport::judge_inequality(
        "flux_form_bound_sharp",
        p.coords,
        theta_norm - grad_omega_norm,
        theta_norm.max(grad_omega_norm),
        noise,
    ));

    // (f) 3 d[ω∧⋆dω] ≥ ⋆(½|∇ω|² + 3|dω|²) as scalars
    let d_theta = ext_deriv_3form_component(&theta);
    let lam = hodge_star_4form_component(&d_theta, &stack_g.sqrt_det, orientation.sign()).value();
    let d_omega_sq = form3_norm_sq(&d_omega, &stack_g.ginv).value().max(0.0);
    let rhs_f = 0.5 * grad_omega_sq + 3.0 * d_omega_sq;
    out.push(ResidualReport::judge_inequality(
        "flux_divergence_bound",
        p.coords,
        rhs_f - 3.0 * lam,
        rhs_f.max((3.0 * lam).abs()),
        noise * (1.0 + dscale),
    ));

    // derived: 4√3 α_g ≥ s₊
    let s_plus = s_g.max(0.0);
    out.push(ResidualReport::judge_inequality(
        "alpha_scalar_bound",
        p.coords,
        s_plus - 4.0 * 3.0f64.sqrt() * alpha_g,
        s_plus.max(4.0 * 3.0f64.sqrt() * alpha_g),
        noise,
    ));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::MetricFamily;
    use std::sync::Arc;

    #[test]
    fn einstein_weitzenbock_on_flat_and_sphere_vanishes() {
        let flat = MetricFamily::Flat.instantiate().unwrap();
        let r = weitzenbock_einstein_residual(&flat, &flat.point([0.1, 0.2, 0.3, 0.4]), 1e-10)
            .unwrap();
        assert!(r.pass, "flat residual {:.3e}", r.residual);

        let sphere = MetricFamily::RoundSphere { r: 1.0 }.instantiate().unwrap();
        let r = weitzenbock_einstein_residual(&sphere, &sphere.point([0.2, -0.4, 0.1, 0.5]), 1e-8)
            .unwrap();
        assert!(r.pass, "sphere residual {:.3e} scale {:.3e}", r.residual, r.scale);
    }

    #[test]
    fn einstein_weitzenbock_on_schwarzschild() {
        let spec = MetricFamily::Schwarzschild { m: 1.0 }.instantiate().unwrap();
        for r in [3.0, 5.0, 8.0] {
            let p = spec.point([0.0, r, 1.2, 0.7]);
            let rep = weitzenbock_einstein_residual(&spec, &p, TOL_EQ_EINSTEIN).unwrap();
            assert!(
                rep.pass,
                "residual {:.3e} vs scale {:.3e} at r={r}",
                rep.residual,
                rep.scale
            );
        }
    }

    #[test]
    fn einstein_weitzenbock_rejects_non_einstein() {
        let model =
            MetricFamily::AlfModel { link: crate::zoo::LinkType::S3, fiber: 1.0 }.instantiate().unwrap();
        let p = model.point([0.1, 5.0, 1.1, 0.4]);
        assert!(matches!(
            weitzenbock_einstein_residual(&model, &p, 1e-5),
            Err(Error::NotEinstein { .. })
        ));
    }

    #[test]
    fn rescaled_weitzenbock_on_kerr_and_taub_bolt() {
        for (fam, pt) in [
            (MetricFamily::Kerr { m: 1.0, a: 0.3 }, [0.1, 4.0, 1.2, 0.6]),
            (MetricFamily::TaubBolt { n: 1.0 }, [0.3, 4.5, 1.0, 1.4]),
        ] {
            let spec = fam.instantiate().unwrap();
            let p = spec.point(pt);
            let rep = weitzenbock_rescaled_residual(&spec, &p, Orientation::Plus, TOL_EQ_RESCALED)
                .unwrap();
            assert!(
                rep.pass,
                "{}: residual {:.3e} scale {:.3e}",
                spec.name,
                rep.residual,
                rep.scale
            );
            let div = divergence_fw(&spec, &p, Orientation::Plus).unwrap();
            assert!(
                div.norm < 1e-6 * div.scale.max(1e-6),
                "{}: |δ_g(fW+)| = {:.3e} scale {:.3e}",
                spec.name,
                div.norm,
                div.scale
            );
        }
    }

    #[test]
    fn hodge_weitzenbock_flat_polynomial_two_sided() {
        // φ = x2 (dx0∧dx1 + dx2∧dx3) on flat space: both sides computed
        // independently must agree to rounding.
        let spec = MetricFamily::Flat.instantiate().unwrap();
        let p = spec.point([0.7, -0.3, 1.4, 0.2]);
        let phi: FormField = Arc::new(|x: &[f64; 4], order: usize| {
            let xs = Jet::seed_point(x, order);
            let f = xs[2].clone();
            let zero = Jet::constant(0.0, order);
            let mut phi = j2(|_, _| zero.clone());
            phi[0][1] = f.clone();
            phi[1][0] = -&f;
            phi[2][3] = f.clone();
            phi[3][2] = -&f;
            Ok(phi)
        });
        let rep = hodge_weitzenbock_residual(&spec, &p, &phi, 1e-10).unwrap();
        assert!(rep.pass, "two-sided residual {:.3e} scale {:.3e}", rep.residual, rep.scale);

        // constant-coefficient φ: both sides vanish identically
        let phi_const: FormField = Arc::new(|_x: &[f64; 4], order: usize| {
            let zero = Jet::constant(0.0, order);
            let one = Jet::constant(1.0, order);
            let mut phi = j2(|_, _| zero.clone());
            phi[0][1] = one.clone();
            phi[1][0] = -&one;
            Ok(phi)
        });
        let rep = hodge_weitzenbock_residual(&spec, &p, &phi_const, 1e-12).unwrap();
        assert!(rep.residual < 1e-13);
    }

    #[test]
    fn hodge_weitzenbock_on_kerr_omega() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.4, 4.4, 1.3, 0.9]);
        let g = crate::wu::rescaled_spec(&spec);
        let omega = crate::wu::omega_field(&spec, Orientation::Plus, [1.0, 0.0, 0.0]);
        let rep = hodge_weitzenbock_residual(&g, &p, &omega, TOL_HODGE).unwrap();
        assert!(rep.pass, "residual {:.3e} scale {:.3e}", rep.residual, rep.scale);
    }

    #[test]
    fn battery_passes_on_kerr_and_rejects_flat() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        for p in crate::sampling::sample_points(&spec, 5, 23) {
            let reports =
                inequality_battery(&spec, &p, Orientation::Plus, [1.0, 0.0, 0.0]).unwrap();
            assert_eq!(reports.len(), 8);
            for r in &reports {
                assert!(
                    r.pass,
                    "{} violated at {:?}: residual {:.3e} scale {:.3e}",
                    r.name,
                    r.point,
                    r.residual,
                    r.scale
                );
            }
        }
        let flat = MetricFamily::Flat.instantiate().unwrap();
        assert!(matches!(
            inequality_battery(
                &flat,
                &flat.point([0.0, 1.0, 0.0, 0.0]),
                Orientation::Plus,
                [1.0, 0.0, 0.0]
            ),
            Err(Error::WuFailure { .. })
        ));
    }
}
