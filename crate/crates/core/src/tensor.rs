//! Small tensor-calculus layer over jet scalars.
//!
//! Fixed-rank nested arrays (`J2`, `J3`, `J4`) cover the metric objects;
//! [`JetTensor`] handles arbitrary rank with variance-aware covariant
//! derivatives. Everything is coordinate-based: covariant derivatives are
//! assembled from partial-derivative jets and Christoffel jets, never
//! from stencils.

use crate::chart::Frame;
use crate::jet::Jet;

pub type J1 = [Jet; 4];
pub type J2 = [[Jet; 4]; 4];
pub type J3 = [[[Jet; 4]; 4]; 4];
pub type J4 = [[[[Jet; 4]; 4]; 4]; 4];

pub fn j1(mut f: impl FnMut(usize) -> Jet) -> J1 {
    std::array::from_fn(|i| f(i))
}

pub fn j2(mut f: impl FnMut(usize, usize) -> Jet) -> J2 {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn j3(mut f: impl FnMut(usize, usize, usize) -> Jet) -> J3 {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k))))
}

pub fn j4(mut f: impl FnMut(usize, usize, usize, usize) -> Jet) -> J4 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| f(i, j, k, l))))
    })
}

/// Σ_i f(i) as a jet.
pub fn sum1(mut f: impl FnMut(usize) -> Jet) -> Jet {
    let mut acc = f(0);
    for i in 1..4 {
        acc = acc + f(i);
    }
    acc
}

pub fn sum2(mut f: impl FnMut(usize, usize) -> Jet) -> Jet {
    sum1(|i| sum1(|j| f(i, j)))
}

pub fn sum3(mut f: impl FnMut(usize, usize, usize) -> Jet) -> Jet {
    sum1(|i| sum1(|j| sum1(|k| f(i, j, k))))
}

pub fn sum4(mut f: impl FnMut(usize, usize, usize, usize) -> Jet) -> Jet {
    sum1(|i| sum1(|j| sum1(|k| sum1(|l| f(i, j, k, l)))))
}

fn det3_of(m: &J2, rows: [usize; 3], cols: [usize; 3]) -> Jet {
    let e = |i: usize, j: usize| &m[rows[i]][cols[j]];
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
        - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

pub fn det4(m: &J2) -> Jet {
    let mut acc = Jet::constant(0.0, m[0][0].order());
    let cols = [1usize, 2, 3];
    for (k, sign) in [(0usize, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
        let sub_cols: [usize; 3] = {
            let mut c = [0usize; 3];
            let mut idx = 0;
            for j in 0..4 {
                if j != k {
                    c[idx] = j;
                    idx += 1;
                }
            }
            c
        };
        acc = acc + &m[0][k] * det3_of(m, cols, sub_cols) * sign;
    }
    acc
}

/// Inverse of a 4×4 jet matrix via the adjugate.
pub fn inv4(m: &J2) -> J2 {
    let det = det4(m);
    let inv_det = det.recip();
    j2(|i, j| {
        // cofactor C_ji (note the transpose for the adjugate)
        let mut rows = [0usize; 3];
        let mut cols = [0usize; 3];
        let mut ri = 0;
        let mut ci = 0;
        for k in 0..4 {
            if k != j {
                rows[ri] = k;
                ri += 1;
            }
            if k != i {
                cols[ci] = k;
                ci += 1;
            }
        }
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        det3_of(m, rows, cols) * sign * &inv_det
    })
}

pub fn inv4_f64(m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let jm: J2 = j2(|i, j| Jet::constant(m[i][j], 0));
    let ji = inv4(&jm);
    std::array::from_fn(|i| std::array::from_fn(|j| ji[i][j].value()))
}

/// Index variance for [`JetTensor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Up,
    Down,
}

/// Dense tensor of jets with all dimensions equal to 4.
#[derive(Clone, Debug)]
pub struct JetTensor {
    pub variance: Vec<Variance>,
    data: Vec<Jet>,
}

impl JetTensor {
    pub fn zeros(variance: Vec<Variance>, order: usize) -> Self {
        let n = 4usize.pow(variance.len() as u32);
        JetTensor { variance, data: vec![Jet::constant(0.0, order); n] }
    }

    pub fn from_fn(variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let rank = variance.len();
        let n = 4usize.pow(rank as u32);
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; rank];
        for flat in 0..n {
            unflatten(flat, &mut idx);
            data.push(f(&idx));
        }
        JetTensor { variance, data }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[flatten(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Jet {
        &mut self.data[flatten(idx)]
    }

    /// Extract all component values at the base point.
    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(|j| j.value()).collect()
    }
}

fn flatten(idx: &[usize]) -> usize {
    idx.iter().fold(0usize, |acc, &i| acc * 4 + i)
}

fn unflatten(mut flat: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % 4;
        flat /= 4;
    }
}

/// Covariant derivative of a tensor field; the new derivative index comes first.
///
/// Down index a:  −Γ^d_{c a} T[.. d ..];  Up index a:  +Γ^a_{c d} T[.. d ..].
pub fn cov_deriv(t: &JetTensor, gamma: &J3) -> JetTensor {
    let rank = t.rank();
    let mut variance = Vec::with_capacity(rank + 1);
    variance.push(Variance::Down);
    variance.extend_from_slice(&t.variance);
    JetTensor::from_fn(variance, |idx| {
        let c = idx[0];
        let inner = &idx[1..];
        let mut acc = t.get(inner).deriv(c);
        let mut swapped = inner.to_vec();
        for (pos, var) in t.variance.iter().enumerate() {
            let a = inner[pos];
            for d in 0..4 {
                swapped[pos] = d;
                let term = match var {
                    Variance::Down => -(&gamma[d][c][a] * t.get(&swapped)),
                    Variance::Up => &gamma[a][c][d] * t.get(&swapped),
                };
                acc = acc + term;
                swapped[pos] = a;
            }
        }
        acc
    })
}

/// Pointwise norm of a tensor's value, using an orthonormal frame.
///
/// Up indices contract with the coframe, down indices with the frame, after
/// which the metric is the identity and the norm is Euclidean.
pub fn norm_value(t: &JetTensor, frame: &Frame) -> f64 {
    norm_sq_value(t, frame).sqrt()
}

pub fn norm_sq_value(t: &JetTensor, frame: &Frame) -> f64 {
    let rank = t.rank();
    let n = 4usize.pow(rank as u32);
    let mut comp: Vec<f64> = t.data.iter().map(|j| j.value()).collect();
    // Contract one index at a time into the orthonormal frame.
    let mut scratch = vec![0.0f64; n];
    for pos in 0..rank {
        let basis = match t.variance[pos] {
            Variance::Up => &frame.coframe,
            Variance::Down => &frame.frame,
        };
        let stride = 4usize.pow((rank - 1 - pos) as u32);
        scratch.iter_mut().for_each(|v| *v = 0.0);
        for (flat, value) in comp.iter().enumerate() {
            if *value == 0.0 {
                continue;
            }
            let mu = (flat / stride) % 4;
            let base = flat - mu * stride;
            for a in 0..4 {
                scratch[base + a * stride] += basis[a][mu] * value;
            }
        }
        std::mem::swap(&mut comp, &mut scratch);
    }
    comp.iter().map(|v| v * v).sum()
}

/// Totally antisymmetric tensor ε_{abcd} with ε_{0123} = ±√det g.
pub fn epsilon_lower(sqrt_det: &Jet, orientation_sign: f64) -> J4 {
    j4(|a, b, c, d| {
        let s = permutation_sign([a, b, c, d]);
        if s == 0.0 {
            Jet::constant(0.0, sqrt_det.order())
        } else {
            sqrt_det * (s * orientation_sign)
        }
    })
}

pub fn permutation_sign(idx: [usize; 4]) -> f64 {
    let mut seen = [false; 4];
    for &i in &idx {
        if seen[i] {
            return 0.0;
        }
        seen[i] = true;
    }
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Hodge star on a 2-form: (⋆φ)_{cd} = ½ ε_{cd}^{ab} φ_{ab}.
pub fn hodge_star_2form(phi: &J2, ginv: &J2, eps: &J4) -> J2 {
    // Raise the last two indices of ε.
    let eps_mixed = j4(|c, d, a, b| {
        sum2(|m, n| &eps[c][d][m][n] * &ginv[m][a] * &ginv[n][b])
    });
    j2(|c, d| sum2(|a, b| &eps_mixed[c][d][a][b] * &phi[a][b]) * 0.5)
}

/// Inner product of 2-forms: ⟨φ, ψ⟩ = ½ φ_{ab} ψ^{ab}.
pub fn form2_inner(phi: &J2, psi: &J2, ginv: &J2) -> Jet {
    sum4(|a, b, c, d| &phi[a][b] * &psi[c][d] * &ginv[a][c] * &ginv[b][d]) * 0.5
}

/// Exterior derivative of a 1-form: (dξ)_{ab} = ∂_a ξ_b − ∂_b ξ_a.
pub fn ext_deriv_1form(xi: &J1) -> J2 {
    j2(|a, b| xi[b].deriv(a) - xi[a].deriv(b))
}

/// Exterior derivative of a 2-form: (dφ)_{abc} = ∂_a φ_{bc} + ∂_b φ_{ca} + ∂_c φ_{ab}.
pub fn ext_deriv_2form(phi: &J2) -> J3 {
    j3(|a, b, c| phi[b][c].deriv(a) + phi[c][a].deriv(b) + phi[a][b].deriv(c))
}

/// The single component (dΘ)_{0123} of the exterior derivative of a 3-form.
pub fn ext_deriv_3form_component(theta: &J3) -> Jet {
    theta[1][2][3].deriv(0) - theta[0][2][3].deriv(1) + theta[0][1][3].deriv(2)
        - theta[0][1][2].deriv(3)
}

/// Hodge star of a 1-form: (⋆ξ)_{bcd} = ξ^a ε_{abcd}.
pub fn hodge_star_1form(xi: &J1, ginv: &J2, eps: &J4) -> J3 {
    let up = j1(|a| sum1(|m| &ginv[a][m] * &xi[m]));
    j3(|b, c, d| sum1(|a| &up[a] * &eps[a][b][c][d]))
}

/// Hodge star of a 3-form: (⋆Θ)_d = (1/3!) Θ^{abc} ε_{abcd}.
pub fn hodge_star_3form(theta: &J3, ginv: &J2, eps: &J4) -> J1 {
    let up = j3(|a, b, c| {
        sum3(|m, n, p| &ginv[a][m] * &ginv[b][n] * &ginv[c][p] * &theta[m][n][p])
    });
    j1(|d| sum3(|a, b, c| &up[a][b][c] * &eps[a][b][c][d]) * (1.0 / 6.0))
}

/// Hodge star of a 4-form given its 0123 component: ⋆Φ = Φ_{0123} ε^{0123}.
pub fn hodge_star_4form_component(phi_0123: &Jet, sqrt_det: &Jet, orientation_sign: f64) -> Jet {
    phi_0123 * sqrt_det.recip() * orientation_sign
}

/// Wedge of a 2-form with a 1-form:
/// (φ∧ξ)_{abc} = φ_{ab} ξ_c + φ_{bc} ξ_a + φ_{ca} ξ_b.
pub fn wedge_2form_1form(phi: &J2, xi: &J1) -> J3 {
    j3(|a, b, c| &phi[a][b] * &xi[c] + &phi[b][c] * &xi[a] + &phi[c][a] * &xi[b])
}

/// Pointwise norm² of a 2-form: |φ|² = ½ φ_{ab} φ^{ab}.
pub fn form2_norm_sq(phi: &J2, ginv: &J2) -> Jet {
    form2_inner(phi, phi, ginv)
}

/// Pointwise norm² of a 3-form: |Θ|² = (1/3!) Θ_{abc} Θ^{abc}.
pub fn form3_norm_sq(theta: &J3, ginv: &J2) -> Jet {
    let up = j3(|a, b, c| {
        sum3(|m, n, p| &ginv[a][m] * &ginv[b][n] * &ginv[c][p] * &theta[m][n][p])
    });
    sum3(|a, b, c| &theta[a][b][c] * &up[a][b][c]) * (1.0 / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inv4_round_trips() {
        let order = 2;
        let [x, y, _, _] = Jet::seed_point(&[0.4, 1.3, 0.0, 0.0], order);
        let m: J2 = j2(|i, j| {
            let base = if i == j { 2.0 + i as f64 } else { 0.1 * (i as f64 - j as f64) };
            Jet::constant(base, order) + &x * (0.05 * (i + j) as f64) + &y * 0.01
        });
        let mi = inv4(&m);
        for i in 0..4 {
            for j in 0..4 {
                let prod = sum1(|k| &m[i][k] * &mi[k][j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod.value(), expect, epsilon = 1e-12);
                // first derivatives of the identity vanish too
                assert!(prod.deriv(0).value().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cov_deriv_of_metric_vanishes() {
        // For any metric, ∇g = 0; flat space in "polar-like" coordinates via
        // a hand-made curvilinear metric exercises the Christoffel terms.
        let order = 3;
        let [r, th, _, _] = Jet::seed_point(&[2.0, 0.7, 0.0, 0.0], order);
        let zero = Jet::constant(0.0, order);
        let one = Jet::constant(1.0, order);
        let comp: J2 = j2(|i, j| match (i, j) {
            (0, 0) => one.clone(),
            (1, 1) => &r * &r,
            (2, 2) => &r * &r * th.sin() * th.sin(),
            (3, 3) => one.clone(),
            _ => zero.clone(),
        });
        let ginv = inv4(&comp);
        let gamma: J3 = j3(|a, b, c| {
            sum1(|d| {
                &ginv[a][d]
                    * (comp[d][c].deriv(b) + comp[d][b].deriv(c) - comp[b][c].deriv(d))
            }) * 0.5
        });
        let g_tensor = JetTensor::from_fn(vec![Variance::Down, Variance::Down], |idx| {
            comp[idx[0]][idx[1]].truncate(order - 1)
        });
        let nabla_g = cov_deriv(&g_tensor, &gamma);
        for v in nabla_g.values() {
            assert!(v.abs() < 1e-12, "∇g component = {v:.3e}");
        }
    }

    #[test]
    fn hodge_star_squares_to_identity_on_two_forms() {
        let order = 0;
        let g: J2 = j2(|i, j| Jet::constant(if i == j { 1.0 } else { 0.0 }, order));
        let eps = epsilon_lower(&Jet::constant(1.0, order), 1.0);
        // φ = dx0 ∧ dx1
        let mut phi: J2 = j2(|_, _| Jet::constant(0.0, order));
        phi[0][1] = Jet::constant(1.0, order);
        phi[1][0] = Jet::constant(-1.0, order);
        let star = hodge_star_2form(&phi, &g, &eps);
        assert_relative_eq!(star[2][3].value(), 1.0, epsilon = 1e-14);
        let star2 = hodge_star_2form(&star, &g, &eps);
        for a in 0..4 {
            for b in 0..4 {
                assert_relative_eq!(star2[a][b].value(), phi[a][b].value(), epsilon = 1e-14);
            }
        }
    }
}
