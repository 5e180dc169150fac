//! Curvature stack and the self-dual/anti-self-dual Weyl split at a point.
//!
//! Conventions, frozen here and pinned by the unit tests below:
//!   Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc}),
//!   R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb},
//!   R_{bd} = R^a_{bad},  s = g^{bd} R_{bd}  (round unit 4-sphere: s = 12).
//!
//! W± act on 2-forms by φ ↦ ½ W^{ab}_{cd} φ_{ab}; in the Λ± bases normalized
//! by |ω_i|² = 2 the matrix entries are W_ij = ⅛ W^{abcd}(ω_i)_{ab}(ω_j)_{cd},
//! so eigenvalues are exactly the α ≥ β ≥ γ of the spectral theory, with
//! |W|² = α² + β² + γ² and α = s/6 on a Kähler surface.

use crate::chart::{evaluate_jet, ChartPoint, Frame, MetricJet, MetricSpec, Orientation};
use crate::jet::Jet;
use crate::tensor::{
    cov_deriv, epsilon_lower, inv4, j2, j3, j4, norm_value, sum1, sum2, JetTensor, Variance, J2,
    J3, J4,
};
use crate::{Error, Result};
use std::sync::Arc;

/// Scalar field on a chart, evaluable as a jet of any order.
pub type ScalarField = Arc<dyn Fn(&[f64; 4], usize) -> Result<Jet> + Send + Sync>;

/// 2-form field (coordinate components ω_{μν}).
pub type FormField = Arc<dyn Fn(&[f64; 4], usize) -> Result<J2> + Send + Sync>;

/// Vector field (coordinate components ξ^μ).
pub type VectorField = Arc<dyn Fn(&[f64; 4], usize) -> Result<[Jet; 4]> + Send + Sync>;

/// The three self-dual and three anti-self-dual basis 2-forms, |ω_i|² = 2.
pub struct SelfDualBasis {
    pub plus: [J2; 3],
    pub minus: [J2; 3],
}

/// Frame, curvature tensors and Weyl blocks at one point, all jet-valued.
pub struct CurvatureStack {
    pub orientation: Orientation,
    /// Jet order of the metric components this stack was built from.
    pub comp_order: usize,
    pub comp: J2,
    pub ginv: J2,
    /// Γ^a_{bc}, one jet order below the components.
    pub gamma: J3,
    /// R_{abcd}, two jet orders below the components.
    pub riemann: J4,
    pub ricci: J2,
    pub scalar: Jet,
    pub sqrt_det: Jet,
    /// Orthonormal coframe e^a_μ (algebraic in g, full component order).
    pub coframe: J2,
    /// Dual frame vectors E_a^μ.
    pub framev: J2,
    pub basis: SelfDualBasis,
    /// W⁺ in the Λ⁺ basis, 3×3 symmetric trace-free.
    pub wplus: [[Jet; 3]; 3],
    pub wminus: [[Jet; 3]; 3],
}

impl CurvatureStack {
    pub fn build(jet: &MetricJet, orientation: Orientation) -> Result<Self> {
        Self::build_from_components(jet.components(), orientation)
    }

    pub fn build_from_components(comp: &J2, orientation: Orientation) -> Result<Self> {
        let k = comp[0][0].order();
        if k < 2 {
            return Err(Error::InsufficientOrder { needed: 2, available: k });
        }
        let ginv = inv4(comp);
        let gamma: J3 = j3(|a, b, c| {
            sum1(|d| &ginv[a][d] * (comp[d][c].deriv(b) + comp[d][b].deriv(c) - comp[b][c].deriv(d)))
                * 0.5
        });
        let riemann_up: J4 = j4(|a, b, c, d| {
            gamma[a][d][b].deriv(c) - gamma[a][c][b].deriv(d)
                + sum1(|e| &gamma[a][c][e] * &gamma[e][d][b] - &gamma[a][d][e] * &gamma[e][c][b])
        });
        let riemann: J4 = j4(|a, b, c, d| sum1(|e| &comp[a][e] * &riemann_up[e][b][c][d]));
        let ricci: J2 = j2(|b, d| sum1(|a| riemann_up[a][b][a][d].clone()));
        let scalar = sum2(|b, d| &ginv[b][d] * &ricci[b][d]);
        let sqrt_det = crate::tensor::det4(comp).sqrt();

        let coframe = coframe_jets(&ginv, orientation, [0, 1, 2, 3]);
        let framev: J2 = j2(|a, mu| sum1(|nu| &ginv[mu][nu] * &coframe[a][nu]));
        let basis = self_dual_basis(&coframe);

        let (wplus, wminus) = weyl_blocks(&riemann, &ginv, &scalar, &basis);

        Ok(CurvatureStack {
            orientation,
            comp_order: k,
            comp: comp.clone(),
            ginv,
            gamma,
            riemann,
            ricci,
            scalar,
            sqrt_det,
            coframe,
            framev,
            basis,
            wplus,
            wminus,
        })
    }

    pub fn frame_value(&self) -> Frame {
        Frame {
            coframe: std::array::from_fn(|a| std::array::from_fn(|m| self.coframe[a][m].value())),
            frame: std::array::from_fn(|a| std::array::from_fn(|m| self.framev[a][m].value())),
        }
    }

    pub fn ginv_value(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|b| self.ginv[a][b].value()))
    }

    pub fn wplus_value(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.wplus[i][j].value()))
    }

    pub fn wminus_value(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.wminus[i][j].value()))
    }

    /// Coordinate-level magnitude of the curvature pipeline at this point,
    /// used as a rounding-noise reference for residual judging.
    pub fn characteristic_scale(&self) -> f64 {
        let mut gamma_max = 0.0f64;
        let mut riem_max = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    gamma_max = gamma_max.max(self.gamma[a][b][c].value().abs());
                    for d in 0..4 {
                        riem_max = riem_max.max(self.riemann[a][b][c][d].value().abs());
                    }
                }
            }
        }
        (1.0 + gamma_max) * (1.0 + gamma_max) * (1.0 + riem_max)
    }

    /// Pointwise |Ricci| and |Riemann| in the orthonormal frame.
    pub fn ricci_and_riemann_norms(&self) -> (f64, f64) {
        let frame = self.frame_value();
        let ric = JetTensor::from_fn(vec![Variance::Down; 2], |i| self.ricci[i[0]][i[1]].truncate(0));
        let rie = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
            self.riemann[i[0]][i[1]][i[2]][i[3]].truncate(0)
        });
        (norm_value(&ric, &frame), norm_value(&rie, &frame))
    }

    /// ε_{abcd} with the stack's orientation baked in.
    pub fn epsilon(&self) -> J4 {
        epsilon_lower(&self.sqrt_det, self.orientation.sign())
    }

    /// Weyl tensor W_{abcd}.
    pub fn weyl_tensor(&self) -> J4 {
        let g = &self.comp;
        let ric = &self.ricci;
        let s = &self.scalar;
        j4(|a, b, c, d| {
            let kn = &g[a][c] * &ric[b][d] - &g[a][d] * &ric[b][c] + &g[b][d] * &ric[a][c]
                - &g[b][c] * &ric[a][d];
            let gg = &g[a][c] * &g[b][d] - &g[a][d] * &g[b][c];
            &self.riemann[a][b][c][d] - kn * 0.5 + gg * s * (1.0 / 6.0)
        })
    }

    /// Self-dual (sign = +1) or anti-self-dual (−1) Weyl half as a 4-tensor:
    /// W± = ½ (W ± ⋆W) with the star acting on the first index pair.
    pub fn weyl_half_tensor(&self, sign: f64) -> J4 {
        let w = self.weyl_tensor();
        let eps = self.epsilon();
        // (⋆W)_{abcd} = ½ ε_{ab}^{mn} W_{mncd}
        let eps_mixed: J4 = j4(|a, b, m, n| {
            sum2(|p, q| &eps[a][b][p][q] * &self.ginv[p][m] * &self.ginv[q][n])
        });
        let star_w: J4 = j4(|a, b, c, d| sum2(|m, n| &eps_mixed[a][b][m][n] * &w[m][n][c][d]) * 0.5);
        j4(|a, b, c, d| (&w[a][b][c][d] + &star_w[a][b][c][d] * sign) * 0.5)
    }

    /// Project a Weyl-type 4-tensor onto the 3×3 matrix in the Λ± basis:
    /// M_ij = ⅛ A^{abcd}(ω_i)_{ab}(ω_j)_{cd}.
    pub fn project_to_basis(&self, a4: &J4, plus: bool) -> [[Jet; 3]; 3] {
        let forms = if plus { &self.basis.plus } else { &self.basis.minus };
        let raised: Vec<J2> = forms.iter().map(|f| raise_form(f, &self.ginv)).collect();
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                crate::tensor::sum4(|a, b, c, d| {
                    &raised[i][a][b] * &a4[a][b][c][d] * &raised[j][c][d]
                }) * 0.125
            })
        })
    }
}

/// Gram-Schmidt coframe in jets, in the given index order, with e³ flipped
/// for the minus orientation.
pub(crate) fn coframe_jets(ginv: &J2, orientation: Orientation, order: [usize; 4]) -> J2 {
    let k = ginv[0][0].order();
    let dot =
        |u: &[Jet; 4], v: &[Jet; 4]| sum2(|m, n| &u[m] * &ginv[m][n] * &v[n]);
    let zero = Jet::constant(0.0, k);
    let mut rows: Vec<[Jet; 4]> = Vec::with_capacity(4);
    for &axis in order.iter() {
        let mut v: [Jet; 4] = std::array::from_fn(|_| zero.clone());
        v[axis] = Jet::constant(1.0, k);
        for prev in rows.iter() {
            let proj = dot(&v, prev);
            for m in 0..4 {
                v[m] = &v[m] - &proj * &prev[m];
            }
        }
        let inv_norm = dot(&v, &v).sqrt().recip();
        for m in 0..4 {
            v[m] = &v[m] * &inv_norm;
        }
        rows.push(v);
    }
    let mut e: J2 = j2(|a, m| rows[a][m].clone());
    // Restore coordinate handedness if the index order permutation is odd,
    // then apply the requested orientation.
    let perm_sign = crate::tensor::permutation_sign(order);
    let flip = perm_sign * orientation.sign() < 0.0;
    if flip {
        for m in 0..4 {
            e[3][m] = -&e[3][m];
        }
    }
    e
}

/// ω₁ = e⁰∧e¹ ± e²∧e³, ω₂ = e⁰∧e² ± e³∧e¹, ω₃ = e⁰∧e³ ± e¹∧e².
fn self_dual_basis(coframe: &J2) -> SelfDualBasis {
    let wedge = |a: usize, b: usize| -> J2 {
        j2(|m, n| &coframe[a][m] * &coframe[b][n] - &coframe[a][n] * &coframe[b][m])
    };
    let pairs = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))];
    let make = |sign: f64| -> [J2; 3] {
        std::array::from_fn(|i| {
            let ((a, b), (c, d)) = pairs[i];
            let w1 = wedge(a, b);
            let w2 = wedge(c, d);
            j2(|m, n| &w1[m][n] + &w2[m][n] * sign)
        })
    };
    SelfDualBasis { plus: make(1.0), minus: make(-1.0) }
}

fn raise_form(f: &J2, ginv: &J2) -> J2 {
    j2(|a, b| sum2(|m, n| &ginv[a][m] * &ginv[b][n] * &f[m][n]))
}

/// Λ± blocks of the curvature operator, with the scalar part removed:
/// W±_ij = ⅛ R^{abcd}(ω_i)_{ab}(ω_j)_{cd} − (s/12) δ_ij.
fn weyl_blocks(
    riemann: &J4,
    ginv: &J2,
    scalar: &Jet,
    basis: &SelfDualBasis,
) -> ([[Jet; 3]; 3], [[Jet; 3]; 3]) {
    let block = |forms: &[J2; 3]| -> [[Jet; 3]; 3] {
        let raised: Vec<J2> = forms.iter().map(|f| raise_form(f, ginv)).collect();
        let half: Vec<J2> = raised
            .iter()
            .map(|r| j2(|c, d| sum2(|a, b| &r[a][b] * &riemann[a][b][c][d])))
            .collect();
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let m = sum2(|c, d| &half[i][c][d] * &raised[j][c][d]) * 0.125;
                if i == j {
                    m - scalar * (1.0 / 12.0)
                } else {
                    m
                }
            })
        })
    };
    (block(&basis.plus), block(&basis.minus))
}

/// −∇·W⁺ at a point, with its norm and the |∇W⁺| scale for relative judging.
pub struct DivergenceReport {
    /// (δW⁺)_{bcd} coordinate components.
    pub components: [[[f64; 4]; 4]; 4],
    pub norm: f64,
    pub scale: f64,
}

/// Divergence of the self-dual Weyl tensor, δW⁺ = −∇·W⁺.
///
/// Vanishes identically for Einstein metrics (second Bianchi); the measured
/// norm is the first gate on the whole differentiation pipeline.
pub fn divergence_w_plus(
    spec: &MetricSpec,
    p: &ChartPoint,
    orientation: Orientation,
) -> Result<DivergenceReport> {
    let jet = evaluate_jet(spec, p, 3)?;
    let stack = CurvatureStack::build(&jet, orientation)?;
    let wp = stack.weyl_half_tensor(1.0);
    let wp_tensor = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
        wp[i[0]][i[1]][i[2]][i[3]].clone()
    });
    let grad = cov_deriv(&wp_tensor, &stack.gamma);
    let ginv = stack.ginv_value();
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
    let frame = stack.frame_value();
    let div_tensor = JetTensor::from_fn(vec![Variance::Down; 3], |i| {
        Jet::constant(components[i[0]][i[1]][i[2]], 0)
    });
    let norm = norm_value(&div_tensor, &frame);
    let scale = norm_value(&grad, &frame);
    Ok(DivergenceReport { components, norm, scale })
}

/// ∇*∇(f W⁺) as a 3×3 matrix in the Λ⁺ basis at p, all with respect to `spec`.
///
/// `f_field` must be smooth and positive near p; the frame's own derivatives
/// enter through the Christoffel corrections of the coordinate expression,
/// never through transported stencils.
pub fn rough_laplacian_fw(
    spec: &MetricSpec,
    p: &ChartPoint,
    f_field: &ScalarField,
    orientation: Orientation,
) -> Result<[[f64; 3]; 3]> {
    let jet = evaluate_jet(spec, p, 4)?;
    let stack = CurvatureStack::build(&jet, orientation)?;
    let f = f_field(&p.coords, 2)?;
    if f.value() <= 0.0 {
        return Err(Error::NonPositiveField(f.value()));
    }
    let wp = stack.weyl_half_tensor(1.0);
    let a_tensor = JetTensor::from_fn(vec![Variance::Down; 4], |i| {
        &f * &wp[i[0]][i[1]][i[2]][i[3]]
    });
    let lap = rough_laplacian(&a_tensor, &stack);
    project_value_tensor(&lap, &stack)
}

/// −g^{ef} ∇_e ∇_f A for a rank-4 jet tensor; returns point values.
pub(crate) fn rough_laplacian(a: &JetTensor, stack: &CurvatureStack) -> [[[[f64; 4]; 4]; 4]; 4] {
    let d1 = cov_deriv(a, &stack.gamma);
    let d2 = cov_deriv(&d1, &stack.gamma);
    let ginv = stack.ginv_value();
    std::array::from_fn(|a0| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                std::array::from_fn(|d| {
                    let mut s = 0.0;
                    for e in 0..4 {
                        for f in 0..4 {
                            s -= ginv[e][f] * d2.get(&[e, f, a0, b, c, d]).value();
                        }
                    }
                    s
                })
            })
        })
    })
}

/// Project a rank-4 value tensor onto the Λ⁺ basis matrix at the point.
pub(crate) fn project_value_tensor(
    a: &[[[[f64; 4]; 4]; 4]; 4],
    stack: &CurvatureStack,
) -> Result<[[f64; 3]; 3]> {
    let ginv = stack.ginv_value();
    let raised: Vec<[[f64; 4]; 4]> = stack
        .basis
        .plus
        .iter()
        .map(|f| {
            let fv: [[f64; 4]; 4] =
                std::array::from_fn(|m| std::array::from_fn(|n| f[m][n].value()));
            std::array::from_fn(|x| {
                std::array::from_fn(|y| {
                    let mut s = 0.0;
                    for m in 0..4 {
                        for n in 0..4 {
                            s += ginv[x][m] * ginv[y][n] * fv[m][n];
                        }
                    }
                    s
                })
            })
        })
        .collect();
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for a0 in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            s += raised[i][a0][b] * a[a0][b][c][d] * raised[j][c][d];
                        }
                    }
                }
            }
            0.125 * s
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{ClosedForm, Domain};
    use crate::zoo::MetricFamily;
    use approx::assert_relative_eq;

    fn stack_at(spec: &MetricSpec, coords: [f64; 4], order: usize) -> CurvatureStack {
        let p = spec.point(coords);
        let jet = evaluate_jet(spec, &p, order).unwrap();
        CurvatureStack::build(&jet, spec.orientation).unwrap()
    }

    /// S²×S² with unit factors: s = 4 and both Weyl halves have the Kähler
    /// spectrum (s/6, −s/12, −s/12). Pins the basis normalization by hand.
    fn product_sphere_spec() -> MetricSpec {
        let chart = crate::chart::ChartInfo {
            chart_id: "product_spheres",
            coord_names: ["theta1", "phi1", "theta2", "phi2"],
            periods: [
                None,
                Some(2.0 * std::f64::consts::PI),
                None,
                Some(2.0 * std::f64::consts::PI),
            ],
            radial_axis: None,
            polar_axis: None,
        };
        let eps = 0.2;
        let domain = Domain {
            ranges: [
                (eps, std::f64::consts::PI - eps),
                (f64::NEG_INFINITY, f64::INFINITY),
                (eps, std::f64::consts::PI - eps),
                (f64::NEG_INFINITY, f64::INFINITY),
            ],
        };
        MetricSpec::new(
            "s2xs2",
            chart,
            domain,
            Orientation::Plus,
            std::sync::Arc::new(ClosedForm(|x: &[Jet; 4]| {
                let o = x[0].order();
                let zero = Jet::constant(0.0, o);
                let one = Jet::constant(1.0, o);
                let mut g = j2(|_, _| zero.clone());
                g[0][0] = one.clone();
                g[1][1] = x[0].sin() * x[0].sin();
                g[2][2] = one;
                g[3][3] = x[2].sin() * x[2].sin();
                g
            })),
        )
    }

    #[test]
    fn flat_curvature_vanishes() {
        let spec = MetricFamily::Flat.instantiate().unwrap();
        let st = stack_at(&spec, [0.1, 0.4, -1.0, 2.0], 2);
        let (ric, rie) = st.ricci_and_riemann_norms();
        assert!(rie < 1e-14);
        assert!(ric < 1e-14);
        assert!(st.scalar.value().abs() < 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                assert!(st.wplus_value()[i][j].abs() < 1e-14);
                assert!(st.wminus_value()[i][j].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn round_sphere_scalar_curvature_is_twelve() {
        let spec = MetricFamily::RoundSphere { r: 1.0 }.instantiate().unwrap();
        let st = stack_at(&spec, [0.3, -0.2, 0.5, 0.1], 2);
        assert_relative_eq!(st.scalar.value(), 12.0, epsilon = 1e-10);
        // Weyl-flat: both blocks vanish.
        let wp = st.wplus_value();
        let wm = st.wminus_value();
        for i in 0..3 {
            for j in 0..3 {
                assert!(wp[i][j].abs() < 1e-10, "W+ = {:?}", wp);
                assert!(wm[i][j].abs() < 1e-10, "W- = {:?}", wm);
            }
        }
        // Einstein with λ = 3: Ric = 3 g.
        let g = st.comp[0][0].value();
        assert_relative_eq!(st.ricci[0][0].value(), 3.0 * g, max_relative = 1e-10);
    }

    #[test]
    fn product_spheres_have_kahler_weyl_spectrum() {
        let spec = product_sphere_spec();
        let st = stack_at(&spec, [1.1, 0.3, 2.0, 0.9], 2);
        assert_relative_eq!(st.scalar.value(), 4.0, max_relative = 1e-10);
        for plus in [true, false] {
            let m = if plus { st.wplus_value() } else { st.wminus_value() };
            let spec3 = crate::wu::jacobi_eigen_oracle(&m).unwrap();
            assert_relative_eq!(spec3.alpha, 2.0 / 3.0, max_relative = 1e-9);
            assert_relative_eq!(spec3.beta, -1.0 / 3.0, max_relative = 1e-9);
            assert_relative_eq!(spec3.gamma, -1.0 / 3.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn schwarzschild_is_ricci_flat_with_degenerate_positive_top() {
        let spec = MetricFamily::Schwarzschild { m: 1.0 }.instantiate().unwrap();
        let st = stack_at(&spec, [0.0, 4.0, 1.2, 0.7], 2);
        let (ric, rie) = st.ricci_and_riemann_norms();
        assert!(ric < 1e-9 * rie.max(1.0), "|Ricci| = {ric:.3e}");
        let w = st.wplus_value();
        let s3 = crate::wu::jacobi_eigen_oracle(&w).unwrap();
        // Conformally Kähler pattern (2λ, −λ, −λ) with λ = m/r³ > 0.
        let lam = 1.0 / (4.0f64).powi(3);
        assert_relative_eq!(s3.alpha, 2.0 * lam, max_relative = 1e-8);
        assert_relative_eq!(s3.beta, -lam, max_relative = 1e-8);
        assert_relative_eq!(s3.gamma, -lam, max_relative = 1e-8);
    }

    #[test]
    fn orientation_swap_exchanges_weyl_blocks() {
        let spec = MetricFamily::TaubNut { n: 1.0 }.instantiate().unwrap();
        let coords = [0.5, 3.0, 1.0, 2.0];
        let st_plus = stack_at(&spec, coords, 2);
        let st_minus = stack_at(&spec.flipped(), coords, 2);
        let sp = crate::wu::jacobi_eigen_oracle(&st_plus.wplus_value()).unwrap();
        let sm = crate::wu::jacobi_eigen_oracle(&st_minus.wminus_value()).unwrap();
        assert_relative_eq!(sp.alpha, sm.alpha, max_relative = 1e-9, epsilon = 1e-12);
        let sp2 = crate::wu::jacobi_eigen_oracle(&st_plus.wminus_value()).unwrap();
        let sm2 = crate::wu::jacobi_eigen_oracle(&st_minus.wplus_value()).unwrap();
        assert_relative_eq!(sp2.alpha, sm2.alpha, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn basis_forms_are_self_dual_with_norm_two() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let st = stack_at(&spec, [0.3, 5.0, 1.1, 0.4], 2);
        let eps = st.epsilon();
        for (i, f) in st.basis.plus.iter().enumerate() {
            let star = crate::tensor::hodge_star_2form(f, &st.ginv, &eps);
            for m in 0..4 {
                for n in 0..4 {
                    assert_relative_eq!(star[m][n].value(), f[m][n].value(), epsilon = 1e-10);
                }
            }
            let norm = crate::tensor::form2_inner(f, f, &st.ginv);
            assert_relative_eq!(norm.value(), 2.0, epsilon = 1e-10, max_relative = 1e-10);
            for (j, f2) in st.basis.plus.iter().enumerate() {
                if i != j {
                    let inner = crate::tensor::form2_inner(f, f2, &st.ginv);
                    assert!(inner.value().abs() < 1e-10);
                }
            }
        }
        for f in st.basis.minus.iter() {
            let star = crate::tensor::hodge_star_2form(f, &st.ginv, &eps);
            for m in 0..4 {
                for n in 0..4 {
                    assert_relative_eq!(star[m][n].value(), -f[m][n].value(), epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn weyl_tensor_projection_matches_blocks() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let st = stack_at(&spec, [0.1, 4.0, 1.3, 0.9], 2);
        let wp4 = st.weyl_half_tensor(1.0);
        let projected = st.project_to_basis(&wp4, true);
        let direct = st.wplus_value();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    projected[i][j].value(),
                    direct[i][j],
                    epsilon = 1e-12,
                    max_relative = 1e-9
                );
            }
        }
        // The self-dual half has no Λ⁻ content.
        let cross = st.project_to_basis(&wp4, false);
        for i in 0..3 {
            for j in 0..3 {
                assert!(cross[i][j].value().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn riemann_symmetries_and_first_bianchi() {
        for fam in [
            MetricFamily::Kerr { m: 1.0, a: 0.3 },
            MetricFamily::TaubBolt { n: 1.0 },
            MetricFamily::EguchiHanson { a: 1.0 },
        ] {
            let spec = fam.instantiate().unwrap();
            for p in crate::sampling::sample_points(&spec, 5, 11) {
                let jet = evaluate_jet(&spec, &p, 2).unwrap();
                let st = CurvatureStack::build(&jet, Orientation::Plus).unwrap();
                let r = |a: usize, b: usize, c: usize, d: usize| st.riemann[a][b][c][d].value();
                // relative to the largest coordinate component
                let mut scale = 1e-14f64;
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            for d in 0..4 {
                                scale = scale.max(r(a, b, c, d).abs());
                            }
                        }
                    }
                }
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            for d in 0..4 {
                                assert!((r(a, b, c, d) + r(b, a, c, d)).abs() < 1e-10 * scale);
                                assert!((r(a, b, c, d) + r(a, b, d, c)).abs() < 1e-10 * scale);
                                assert!((r(a, b, c, d) - r(c, d, a, b)).abs() < 1e-10 * scale);
                                let bianchi = r(a, b, c, d) + r(a, c, d, b) + r(a, d, b, c);
                                assert!(bianchi.abs() < 1e-10 * scale);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn frame_choice_leaves_spectra_invariant() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let p = spec.point([0.4, 4.5, 1.0, 1.7]);
        let jet = evaluate_jet(&spec, &p, 2).unwrap();
        let st = CurvatureStack::build(&jet, Orientation::Plus).unwrap();
        let base = crate::wu::jacobi_eigen_oracle(&st.wplus_value()).unwrap();
        // Rebuild the Λ⁺ block from a rotated Gram-Schmidt order.
        for order in [[1usize, 0, 2, 3], [2, 3, 0, 1], [3, 1, 2, 0]] {
            let coframe = coframe_jets(&st.ginv, Orientation::Plus, order);
            let basis = self_dual_basis(&coframe);
            let (wp, _) = weyl_blocks(&st.riemann, &st.ginv, &st.scalar, &basis);
            let wpv: [[f64; 3]; 3] =
                std::array::from_fn(|i| std::array::from_fn(|j| wp[i][j].value()));
            let rot = crate::wu::jacobi_eigen_oracle(&wpv).unwrap();
            assert_relative_eq!(base.alpha, rot.alpha, max_relative = 1e-10, epsilon = 1e-13);
            assert_relative_eq!(base.beta, rot.beta, max_relative = 1e-10, epsilon = 1e-13);
            assert_relative_eq!(base.gamma, rot.gamma, max_relative = 1e-10, epsilon = 1e-13);
        }
    }

    #[test]
    fn divergence_vanishes_for_einstein_metrics() {
        let spec = MetricFamily::Flat.instantiate().unwrap();
        let rep = divergence_w_plus(&spec, &spec.point([0.0, 1.0, 0.0, 0.0]), Orientation::Plus)
            .unwrap();
        assert!(rep.norm < 1e-14);

        let kerr = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        for p in crate::sampling::sample_points(&kerr, 4, 3) {
            let rep = divergence_w_plus(&kerr, &p, Orientation::Plus).unwrap();
            assert!(
                rep.norm < 1e-7 * rep.scale.max(1e-3),
                "|δW+| = {:.3e} (scale {:.3e}) at {:?}",
                rep.norm,
                rep.scale,
                p.coords
            );
        }
    }

    #[test]
    fn divergence_detects_non_einstein_perturbation() {
        // g = Schwarzschild + ε q with a non-Einstein bump: δW⁺ = O(ε) ≠ 0.
        let eps = 1e-3;
        let chart = crate::chart::ChartInfo {
            chart_id: "boyer_lindquist",
            coord_names: ["tau", "r", "theta", "phi"],
            periods: [Some(8.0 * std::f64::consts::PI), None, None, Some(2.0 * std::f64::consts::PI)],
            radial_axis: Some(1),
            polar_axis: Some(2),
        };
        let domain = Domain {
            ranges: [
                (f64::NEG_INFINITY, f64::INFINITY),
                (2.5, 100.0),
                (1e-3, std::f64::consts::PI - 1e-3),
                (f64::NEG_INFINITY, f64::INFINITY),
            ],
        };
        let spec = MetricSpec::new(
            "schwarzschild_perturbed",
            chart,
            domain,
            Orientation::Plus,
            std::sync::Arc::new(ClosedForm(move |x: &[Jet; 4]| {
                let r = &x[1];
                let f = -(r.recip() * 2.0) + 1.0;
                let sin = x[2].sin();
                let o = x[0].order();
                let zero = Jet::constant(0.0, o);
                let mut g = j2(|_, _| zero.clone());
                g[0][0] = f.clone();
                g[1][1] = f.recip() * (r.recip() * eps + 1.0); // non-Einstein bump
                g[2][2] = r * r;
                g[3][3] = r * r * &sin * &sin;
                g
            })),
        );
        let rep = divergence_w_plus(&spec, &spec.point([0.0, 4.0, 1.2, 0.7]), Orientation::Plus)
            .unwrap();
        assert!(
            rep.norm > 1e-6,
            "perturbed metric should have nonzero δW+, got {:.3e}",
            rep.norm
        );
    }
}
