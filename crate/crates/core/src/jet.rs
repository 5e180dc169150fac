//! Truncated multivariate Taylor arithmetic in four variables.
//!
//! A [`Jet`] holds the Taylor coefficients of a smooth function of the four
//! chart coordinates around a base point, up to a chosen total degree.
//! Arithmetic on jets propagates derivatives exactly (to machine rounding),
//! so every derivative the curvature pipeline consumes comes out of closed
//! forms rather than finite differencing.
//!
//! Coefficients are stored in graded-lexicographic order; `c[idx(β)]` is
//! `∂^β f / β!` evaluated at the base point.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

/// Number of independent variables (chart coordinates).
pub const VARS: usize = 4;

/// Largest supported truncation degree.
pub const MAX_ORDER: usize = 8;

struct Tables {
    /// Multi-indices in graded-lex order.
    exponents: Vec<[u8; VARS]>,
    /// Reverse lookup keyed by packed exponents.
    index: Vec<u16>,
    /// `count[k]` = number of multi-indices with total degree ≤ k.
    count: Vec<usize>,
    /// `prod[i * len + j]` = position of `exponents[i] + exponents[j]`.
    prod: Vec<u16>,
}

fn pack(e: &[u8; VARS]) -> usize {
    let b = (MAX_ORDER + 1) as usize;
    (((e[0] as usize * b) + e[1] as usize) * b + e[2] as usize) * b + e[3] as usize
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exponents = Vec::new();
        let mut count = vec![0usize; MAX_ORDER + 1];
        for total in 0..=MAX_ORDER as u8 {
            for a in (0..=total).rev() {
                for b in (0..=total - a).rev() {
                    for c in (0..=total - a - b).rev() {
                        let d = total - a - b - c;
                        exponents.push([a, b, c, d]);
                    }
                }
            }
            count[total as usize] = exponents.len();
        }
        let mut index = vec![u16::MAX; pack(&[MAX_ORDER as u8; VARS]) + 1];
        for (i, e) in exponents.iter().enumerate() {
            index[pack(e)] = i as u16;
        }
        let n = exponents.len();
        let mut prod = vec![u16::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: usize = (0..VARS).map(|k| (exponents[i][k] + exponents[j][k]) as usize).sum();
                if s <= MAX_ORDER {
                    let mut e = [0u8; VARS];
                    for k in 0..VARS {
                        e[k] = exponents[i][k] + exponents[j][k];
                    }
                    prod[i * n + j] = index[pack(&e)];
                }
            }
        }
        Tables { exponents, index, count, prod }
    })
}

/// Number of Taylor coefficients for total degree ≤ `order`.
pub fn coeff_count(order: usize) -> usize {
    tables().count[order]
}

/// Multi-index of the coefficient at position `i`.
pub fn exponent(i: usize) -> [u8; VARS] {
    tables().exponents[i]
}

fn factorial(n: u8) -> f64 {
    const F: [f64; 9] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0];
    F[n as usize]
}

/// `β!` for a multi-index.
pub fn multi_factorial(e: &[u8; VARS]) -> f64 {
    e.iter().map(|&k| factorial(k)).product()
}

/// Truncated Taylor expansion of a scalar function of the four coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: Vec<f64>,
}

impl Jet {
    /// Constant jet (all derivatives zero).
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        let mut c = vec![0.0; coeff_count(order)];
        c[0] = value;
        Jet { order, c }
    }

    /// Jet of the coordinate function `x_axis` around base value `value`.
    pub fn variable(value: f64, axis: usize, order: usize) -> Self {
        let mut j = Jet::constant(value, order);
        if order >= 1 {
            j.c[1 + axis] = 1.0;
        }
        j
    }

    /// Seed all four coordinates at once.
    pub fn seed_point(p: &[f64; VARS], order: usize) -> [Jet; VARS] {
        [
            Jet::variable(p[0], 0, order),
            Jet::variable(p[1], 1, order),
            Jet::variable(p[2], 2, order),
            Jet::variable(p[3], 3, order),
        ]
    }

    /// Build a jet directly from `(multi-index, ∂^β f)` pairs.
    pub fn from_partials(order: usize, partials: &[([u8; VARS], f64)]) -> Self {
        let mut j = Jet::constant(0.0, order);
        for (e, v) in partials {
            let i = tables().index[pack(e)] as usize;
            j.c[i] = v / multi_factorial(e);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value at the base point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Partial derivative `∂^β f` at the base point.
    pub fn partial(&self, e: &[u8; VARS]) -> f64 {
        let total: usize = e.iter().map(|&k| k as usize).sum();
        assert!(total <= self.order, "jet order {} too low for |β|={}", self.order, total);
        let i = tables().index[pack(e)] as usize;
        self.c[i] * multi_factorial(e)
    }

    /// First derivative along `axis`.
    pub fn grad(&self, axis: usize) -> f64 {
        let mut e = [0u8; VARS];
        e[axis] = 1;
        self.partial(&e)
    }

    /// The jet of `∂f/∂x_axis`, truncated to one order lower.
    pub fn deriv(&self, axis: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let t = tables();
        let out_order = self.order - 1;
        let mut c = vec![0.0; coeff_count(out_order)];
        for (i, ci) in c.iter_mut().enumerate() {
            let mut e = t.exponents[i];
            e[axis] += 1;
            let src = t.index[pack(&e)] as usize;
            *ci = self.c[src] * (e[axis] as f64);
        }
        Jet { order: out_order, c }
    }

    /// Truncate to a lower order (copying).
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order);
        Jet { order, c: self.c[..coeff_count(order)].to_vec() }
    }

    fn min_order(&self, rhs: &Jet) -> usize {
        self.order.min(rhs.order)
    }

    fn mul_impl(&self, rhs: &Jet) -> Jet {
        let t = tables();
        let n = self.min_order(rhs);
        let mut c = vec![0.0; coeff_count(n)];
        let stride = t.exponents.len();
        for i in 0..coeff_count(n) {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            let di: usize = t.exponents[i].iter().map(|&k| k as usize).sum();
            let jmax = coeff_count(n - di);
            let row = &t.prod[i * stride..];
            for j in 0..jmax {
                let b = rhs.c[j];
                if b != 0.0 {
                    c[row[j] as usize] += a * b;
                }
            }
        }
        Jet { order: n, c }
    }

    fn zip(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let n = self.min_order(rhs);
        let len = coeff_count(n);
        let c = (0..len).map(|i| f(self.c[i], rhs.c[i])).collect();
        Jet { order: n, c }
    }

    /// Composition `f ∘ self` where `series[k] = f^{(k)}(self.value()) / k!`.
    ///
    /// Standard Horner evaluation in the nilpotent part of the jet.
    pub fn compose(&self, series: &[f64]) -> Jet {
        assert!(series.len() >= self.order + 1);
        let mut hat = self.clone();
        hat.c[0] = 0.0;
        let mut acc = Jet::constant(series[self.order], self.order);
        for k in (0..self.order).rev() {
            acc = acc.mul_impl(&hat);
            acc.c[0] += series[k];
        }
        acc
    }

    /// Reciprocal; the base value must be nonzero.
    pub fn recip(&self) -> Jet {
        let u = self.value();
        assert!(u != 0.0, "reciprocal of a jet with zero value");
        let mut series = vec![0.0; self.order + 1];
        let mut p = 1.0 / u;
        for s in series.iter_mut() {
            *s = p;
            p *= -1.0 / u;
        }
        self.compose(&series)
    }

    /// Square root; the base value must be positive.
    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    /// Real power with a positive base value.
    pub fn powf(&self, p: f64) -> Jet {
        let u = self.value();
        assert!(u > 0.0, "powf of a jet with non-positive value {u}");
        let mut series = vec![0.0; self.order + 1];
        let mut coeff = u.powf(p);
        for (k, s) in series.iter_mut().enumerate() {
            *s = coeff;
            coeff *= (p - k as f64) / (k as f64 + 1.0) / u;
        }
        self.compose(&series)
    }

    /// Integer power (any base value).
    pub fn powi(&self, n: i32) -> Jet {
        match n {
            0 => Jet::constant(1.0, self.order),
            n if n < 0 => self.powi(-n).recip(),
            _ => {
                let mut acc = self.clone();
                for _ in 1..n {
                    acc = acc.mul_impl(self);
                }
                acc
            }
        }
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut series = vec![0.0; self.order + 1];
        let mut fact = 1.0;
        for (k, s) in series.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *s = e / fact;
        }
        self.compose(&series)
    }

    pub fn ln(&self) -> Jet {
        let u = self.value();
        assert!(u > 0.0, "ln of a jet with non-positive value");
        let mut series = vec![0.0; self.order + 1];
        series[0] = u.ln();
        let mut p = 1.0 / u;
        for k in 1..=self.order {
            series[k] = p / k as f64;
            p *= -1.0 / u;
        }
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&trig_series(self.order, [s, c, -s, -c]))
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&trig_series(self.order, [c, -s, -c, s]))
    }

    /// Max absolute coefficient, handy for scale estimates.
    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn trig_series(order: usize, cycle: [f64; 4]) -> Vec<f64> {
    let mut series = vec![0.0; order + 1];
    let mut fact = 1.0;
    for (k, v) in series.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *v = cycle[k % 4] / fact;
    }
    series
}

macro_rules! binop {
    ($trait:ident, $fn:ident, $impl:expr) => {
        impl $trait for &Jet {
            type Output = Jet;
            fn $fn(self, rhs: &Jet) -> Jet {
                $impl(self, rhs)
            }
        }
        impl $trait for Jet {
            type Output = Jet;
            fn $fn(self, rhs: Jet) -> Jet {
                $impl(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $fn(self, rhs: &Jet) -> Jet {
                $impl(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $fn(self, rhs: Jet) -> Jet {
                $impl(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Jet, b: &Jet| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a: &Jet, b: &Jet| a.mul_impl(b));
binop!(Div, div, |a: &Jet, b: &Jet| a.mul_impl(&b.recip()));

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -self.clone()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.clone() + rhs
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.clone() - rhs
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v *= rhs;
        }
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.clone() * rhs
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs * self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_partials_are_exact() {
        // f = x0^2 x3 + 3 x1 - x2^3
        let order = 4;
        let p = [2.0, -1.0, 0.5, 3.0];
        let [x0, x1, x2, x3] = Jet::seed_point(&p, order);
        let f = &x0 * &x0 * &x3 + &x1 * 3.0 - &x2 * &x2 * &x2;
        assert_relative_eq!(f.value(), 4.0 * 3.0 - 3.0 - 0.125, epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[1, 0, 0, 0]), 2.0 * 2.0 * 3.0, epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[2, 0, 0, 1]), 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[0, 0, 3, 0]), -6.0, epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[0, 2, 0, 0]), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn transcendental_partials_match_closed_forms() {
        let order = 5;
        let p = [0.3, 0.7, 0.0, 0.0];
        let [x, y, _, _] = Jet::seed_point(&p, order);
        // f = sin(x y)
        let f = (&x * &y).sin();
        let (sx, cx) = (0.3f64 * 0.7).sin_cos();
        assert_relative_eq!(f.value(), sx, epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[1, 0, 0, 0]), 0.7 * cx, epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[0, 1, 0, 0]), 0.3 * cx, epsilon = 1e-14);
        // ∂x∂y sin(xy) = cos(xy) - xy sin(xy)
        assert_relative_eq!(f.partial(&[1, 1, 0, 0]), cx - 0.21 * sx, epsilon = 1e-13);
        // ∂x^2 = -y^2 sin
        assert_relative_eq!(f.partial(&[2, 0, 0, 0]), -0.49 * sx, epsilon = 1e-13);
    }

    #[test]
    fn division_and_powf_round_trip() {
        let order = 6;
        let [x, y, _, _] = Jet::seed_point(&[1.7, 0.4, 0.0, 0.0], order);
        let f = (&x + &y * &y).powf(1.5);
        let g = &f * &f; // = (x + y^2)^3
        let direct = (&x + &y * &y).powi(3);
        for i in 0..coeff_count(order) {
            assert_relative_eq!(g.c[i], direct.c[i], epsilon = 1e-12, max_relative = 1e-12);
        }
        let one = &f / &f;
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-14);
        assert!(one.c[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn deriv_extracts_shifted_series() {
        let order = 4;
        let [x, y, _, _] = Jet::seed_point(&[0.2, 1.3, 0.0, 0.0], order);
        let f = (&x * &x * &y).sin();
        let fx = f.deriv(0);
        assert_eq!(fx.order(), order - 1);
        assert_relative_eq!(fx.value(), f.partial(&[1, 0, 0, 0]), epsilon = 1e-14);
        assert_relative_eq!(
            fx.partial(&[1, 1, 0, 0]),
            f.partial(&[2, 1, 0, 0]),
            epsilon = 1e-13
        );
    }

    #[test]
    fn finite_difference_oracle_agrees() {
        // Independent check of the jet arithmetic against central differences.
        let f = |p: &[f64; 4]| (p[0] * p[1]).exp() * (p[2] + 2.0 * p[3]).cos() / (1.0 + p[0] * p[0]);
        let p = [0.4, -0.3, 0.8, 0.1];
        let [x0, x1, x2, x3] = Jet::seed_point(&p, 2);
        let jet = (&x0 * &x1).exp() * (&x2 + &x3 * 2.0).cos() / (&x0 * &x0 + 1.0);

        let h = 1e-5;
        for axis in 0..4 {
            let mut pp = p;
            let mut pm = p;
            pp[axis] += h;
            pm[axis] -= h;
            let fd = (f(&pp) - f(&pm)) / (2.0 * h);
            let mut e = [0u8; 4];
            e[axis] = 1;
            assert_relative_eq!(jet.partial(&e), fd, epsilon = 1e-8, max_relative = 1e-8);
        }
        // one mixed second derivative
        let (a, b) = (0, 2);
        let mut pp = p;
        pp[a] += h;
        pp[b] += h;
        let mut pm = p;
        pm[a] += h;
        pm[b] -= h;
        let mut mp = p;
        mp[a] -= h;
        mp[b] += h;
        let mut mm = p;
        mm[a] -= h;
        mm[b] -= h;
        let fd = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
        assert_relative_eq!(jet.partial(&[1, 0, 1, 0]), fd, epsilon = 1e-6, max_relative = 1e-6);
    }

    #[test]
    fn min_order_semantics() {
        let a = Jet::variable(2.0, 0, 4);
        let b = Jet::variable(3.0, 1, 2);
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).order(), 2);
    }
}
