//! Catalog of explicit metric families.
//!
//! Component formulas are transcribed from the standard literature forms
//! (see `docs/metric-zoo.md` for the exact expressions and references).
//! None of the expected flags are trusted: the Einstein/Ricci-flat ones are
//! gated by [`ricci_flat_selfcheck`], the Weyl-sign ones by the wu module's
//! measurements.

use crate::chart::{ChartInfo, ClosedForm, Domain, MetricSpec, Orientation};
use crate::curvature;
use crate::jet::Jet;
use crate::tensor::j2;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Which Weyl half vanishes identically, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperkahlerSide {
    None,
    Plus,
    Minus,
    Both,
}

/// Expected properties of a family; verified by measurement, not trusted.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FamilyFlags {
    pub einstein: bool,
    pub ricci_flat: bool,
    pub wu_plus: bool,
    pub wu_minus: bool,
    pub hyperkahler_side: HyperkahlerSide,
    pub alf: bool,
}

/// A named explicit metric family with parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricFamily {
    Flat,
    Schwarzschild { m: f64 },
    Kerr { m: f64, a: f64 },
    TaubNut { n: f64 },
    TaubBolt { n: f64 },
    EguchiHanson { a: f64 },
    RoundSphere { r: f64 },
    AlfModel { link: LinkType, fiber: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkType {
    S3,
    S2xS1,
}

/// Chart margins and extents; all per-family knobs live here.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FamilyConfig {
    /// Radial distance kept clear of horizons, bolts and NUTs.
    pub horizon_margin: f64,
    /// Angular distance kept clear of the polar axes.
    pub axis_margin: f64,
    /// Outer radial cut of the chart domain.
    pub r_max: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { horizon_margin: 0.5, axis_margin: 1e-3, r_max: 1e4 }
    }
}

impl MetricFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MetricFamily::Flat => "flat",
            MetricFamily::Schwarzschild { .. } => "schwarzschild",
            MetricFamily::Kerr { .. } => "kerr",
            MetricFamily::TaubNut { .. } => "taub_nut",
            MetricFamily::TaubBolt { .. } => "taub_bolt",
            MetricFamily::EguchiHanson { .. } => "eguchi_hanson",
            MetricFamily::RoundSphere { .. } => "round_sphere",
            MetricFamily::AlfModel { .. } => "alf_model",
        }
    }

    /// Every family in the catalog, at reference parameters.
    pub fn catalog() -> Vec<MetricFamily> {
        vec![
            MetricFamily::Flat,
            MetricFamily::Schwarzschild { m: 1.0 },
            MetricFamily::Kerr { m: 1.0, a: 0.3 },
            MetricFamily::TaubNut { n: 1.0 },
            MetricFamily::TaubBolt { n: 1.0 },
            MetricFamily::EguchiHanson { a: 1.0 },
            MetricFamily::RoundSphere { r: 1.0 },
            MetricFamily::AlfModel { link: LinkType::S2xS1, fiber: 1.0 },
        ]
    }

    pub fn flags(&self) -> FamilyFlags {
        match self {
            MetricFamily::Flat => FamilyFlags {
                einstein: true,
                ricci_flat: true,
                wu_plus: false,
                wu_minus: false,
                hyperkahler_side: HyperkahlerSide::Both,
                alf: false,
            },
            MetricFamily::Schwarzschild { .. } | MetricFamily::Kerr { .. } => FamilyFlags {
                einstein: true,
                ricci_flat: true,
                wu_plus: true,
                wu_minus: true,
                hyperkahler_side: HyperkahlerSide::None,
                alf: true,
            },
            MetricFamily::TaubNut { .. } => FamilyFlags {
                einstein: true,
                ricci_flat: true,
                wu_plus: true,
                wu_minus: false,
                hyperkahler_side: HyperkahlerSide::Minus,
                alf: true,
            },
            MetricFamily::TaubBolt { .. } => FamilyFlags {
                einstein: true,
                ricci_flat: true,
                wu_plus: true,
                wu_minus: true,
                hyperkahler_side: HyperkahlerSide::None,
                alf: true,
            },
            MetricFamily::EguchiHanson { .. } => FamilyFlags {
                einstein: true,
                ricci_flat: true,
                wu_plus: false,
                wu_minus: true,
                hyperkahler_side: HyperkahlerSide::Plus,
                alf: false,
            },
            MetricFamily::RoundSphere { .. } => FamilyFlags {
                einstein: true,
                ricci_flat: false,
                wu_plus: false,
                wu_minus: false,
                hyperkahler_side: HyperkahlerSide::Both,
                alf: false,
            },
            MetricFamily::AlfModel { link, .. } => FamilyFlags {
                einstein: matches!(link, LinkType::S2xS1),
                ricci_flat: matches!(link, LinkType::S2xS1),
                wu_plus: false,
                wu_minus: false,
                hyperkahler_side: match link {
                    LinkType::S2xS1 => HyperkahlerSide::Both,
                    LinkType::S3 => HyperkahlerSide::None,
                },
                alf: true,
            },
        }
    }

    fn check_params(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match *self {
            MetricFamily::Flat => Ok(()),
            MetricFamily::Schwarzschild { m } if m <= 0.0 => bad(format!("schwarzschild needs m > 0, got {m}")),
            MetricFamily::Kerr { m, a } if m <= 0.0 || a.abs() >= m => {
                bad(format!("kerr needs m > 0 and |a| < m, got m={m}, a={a}"))
            }
            MetricFamily::TaubNut { n } | MetricFamily::TaubBolt { n } if n <= 0.0 => {
                bad(format!("NUT parameter must be positive, got {n}"))
            }
            MetricFamily::EguchiHanson { a } if a <= 0.0 => bad(format!("eguchi_hanson needs a > 0, got {a}")),
            MetricFamily::RoundSphere { r } if r <= 0.0 => bad(format!("round_sphere needs r > 0, got {r}")),
            MetricFamily::AlfModel { fiber, .. } if fiber <= 0.0 => {
                bad(format!("alf_model needs fiber > 0, got {fiber}"))
            }
            _ => Ok(()),
        }
    }

    /// Inner radial boundary of the chart (horizon, bolt, NUT or axis scale).
    pub fn inner_radius(&self, cfg: &FamilyConfig) -> f64 {
        match *self {
            MetricFamily::Flat | MetricFamily::RoundSphere { .. } => f64::NEG_INFINITY,
            MetricFamily::Schwarzschild { m } => 2.0 * m + cfg.horizon_margin,
            MetricFamily::Kerr { m, a } => m + (m * m + a * a).sqrt() + cfg.horizon_margin,
            MetricFamily::TaubNut { n } => 0.3 * n,
            MetricFamily::TaubBolt { n } => 2.0 * n + cfg.horizon_margin * n,
            MetricFamily::EguchiHanson { a } => a + cfg.horizon_margin * a,
            MetricFamily::AlfModel { .. } => 0.1,
        }
    }

    pub fn instantiate(&self) -> Result<MetricSpec> {
        self.instantiate_with(&FamilyConfig::default())
    }

    pub fn instantiate_with(&self, cfg: &FamilyConfig) -> Result<MetricSpec> {
        self.check_params()?;
        let spec = match *self {
            MetricFamily::Flat => {
                let chart = ChartInfo {
                    chart_id: "cartesian",
                    coord_names: ["x0", "x1", "x2", "x3"],
                    periods: [None; 4],
                    radial_axis: None,
                    polar_axis: None,
                };
                let b = cfg.r_max;
                MetricSpec::new(
                    "flat",
                    chart,
                    Domain { ranges: [(-b, b); 4] },
                    Orientation::Plus,
                    Arc::new(ClosedForm(|x: &[Jet; 4]| {
                        let o = x[0].order();
                        j2(|i, j| Jet::constant(if i == j { 1.0 } else { 0.0 }, o))
                    })),
                )
            }
            MetricFamily::Schwarzschild { m } => {
                // Same chart and formulas as Kerr with a = 0; kept as a
                // dedicated family so the coincidence is testable.
                kerr_like("schwarzschild", m, 0.0, cfg)?
            }
            MetricFamily::Kerr { m, a } => kerr_like("kerr", m, a, cfg)?,
            MetricFamily::TaubNut { n } => {
                let chart = polar_fiber_chart("taub_nut_gh", 8.0 * std::f64::consts::PI * n, cfg);
                let domain = polar_domain(self.inner_radius(cfg), cfg);
                MetricSpec::new(
                    "taub_nut",
                    chart,
                    domain,
                    Orientation::Plus,
                    Arc::new(ClosedForm(move |x: &[Jet; 4]| taub_nut_components(n, x))),
                )
            }
            MetricFamily::TaubBolt { n } => {
                let chart = polar_fiber_chart("taub_bolt", 8.0 * std::f64::consts::PI * n, cfg);
                let domain = polar_domain(self.inner_radius(cfg), cfg);
                MetricSpec::new(
                    "taub_bolt",
                    chart,
                    domain,
                    Orientation::Plus,
                    Arc::new(ClosedForm(move |x: &[Jet; 4]| taub_bolt_components(n, x))),
                )
            }
            MetricFamily::EguchiHanson { a } => {
                let chart = polar_fiber_chart("eguchi_hanson", 2.0 * std::f64::consts::PI, cfg);
                let domain = polar_domain(self.inner_radius(cfg), cfg);
                MetricSpec::new(
                    "eguchi_hanson",
                    chart,
                    domain,
                    Orientation::Plus,
                    Arc::new(ClosedForm(move |x: &[Jet; 4]| eguchi_hanson_components(a, x))),
                )
            }
            MetricFamily::RoundSphere { r } => {
                let chart = ChartInfo {
                    chart_id: "stereographic",
                    coord_names: ["x0", "x1", "x2", "x3"],
                    periods: [None; 4],
                    radial_axis: None,
                    polar_axis: None,
                };
                let b = 3.0 * r;
                MetricSpec::new(
                    "round_sphere",
                    chart,
                    Domain { ranges: [(-b, b); 4] },
                    Orientation::Plus,
                    Arc::new(ClosedForm(move |x: &[Jet; 4]| {
                        let r2 = r * r;
                        let norm2 = crate::tensor::sum1(|i| &x[i] * &x[i]);
                        let lam = (norm2 + r2).recip() * (2.0 * r2);
                        let lam2 = &lam * &lam;
                        j2(|i, j| {
                            if i == j {
                                lam2.clone()
                            } else {
                                Jet::constant(0.0, x[0].order())
                            }
                        })
                    })),
                )
            }
            MetricFamily::AlfModel { link, fiber } => {
                let (chart, comps): (ChartInfo, Arc<dyn crate::chart::MetricComponents>) = match link {
                    LinkType::S2xS1 => (
                        polar_fiber_chart("alf_model_s2s1", fiber, cfg),
                        Arc::new(ClosedForm(|x: &[Jet; 4]| alf_model_flat_components(x))),
                    ),
                    LinkType::S3 => (
                        polar_fiber_chart("alf_model_s3", 8.0 * std::f64::consts::PI * fiber, cfg),
                        Arc::new(ClosedForm(move |x: &[Jet; 4]| alf_model_nut_components(fiber, x))),
                    ),
                };
                let domain = polar_domain(self.inner_radius(cfg), cfg);
                MetricSpec::new("alf_model", chart, domain, Orientation::Plus, comps)
            }
        };
        Ok(spec.with_sample_box(self.sample_box(cfg)))
    }

    /// Default randomized-sampling box: generic points at moderate radius,
    /// clear of axes and inner boundaries.
    fn sample_box(&self, cfg: &FamilyConfig) -> [(f64, f64); 4] {
        let pi = std::f64::consts::PI;
        let theta = (0.2, pi - 0.2);
        let two_pi = (0.0, 2.0 * pi);
        match *self {
            MetricFamily::Flat => [(-3.0, 3.0); 4],
            MetricFamily::RoundSphere { r } => [(-1.5 * r, 1.5 * r); 4],
            MetricFamily::Schwarzschild { m } => {
                let rin = self.inner_radius(cfg) + 0.1 * m;
                [(0.0, 8.0 * pi * m), (rin, 12.0 * m), theta, two_pi]
            }
            MetricFamily::Kerr { m, a } => {
                let rin = self.inner_radius(cfg) + 0.1 * m;
                let rp = m + (m * m + a * a).sqrt();
                let beta = 2.0 * pi * (rp * rp - a * a) / (m * m + a * a).sqrt();
                [(0.0, beta), (rin, 12.0 * m), theta, two_pi]
            }
            MetricFamily::TaubNut { n } => [(0.0, 8.0 * pi * n), (0.4 * n, 12.0 * n), theta, two_pi],
            MetricFamily::TaubBolt { n } => {
                let rin = self.inner_radius(cfg) + 0.1 * n;
                [(0.0, 8.0 * pi * n), (rin, 12.0 * n), theta, two_pi]
            }
            MetricFamily::EguchiHanson { a } => {
                let rin = self.inner_radius(cfg) + 0.1 * a;
                [(0.0, 2.0 * pi), (rin, 12.0 * a), theta, two_pi]
            }
            MetricFamily::AlfModel { fiber, link } => {
                let period = match link {
                    LinkType::S2xS1 => fiber,
                    LinkType::S3 => 8.0 * pi * fiber,
                };
                [(0.0, period), (1.0, 40.0), theta, two_pi]
            }
        }
    }

    /// The asymptotic model metric dϱ² + ϱ²γ + η², for ALF families.
    pub fn alf_structure(&self, cfg: &FamilyConfig) -> Option<AlfStructure> {
        let (model_family, fiber_scale) = match *self {
            MetricFamily::Schwarzschild { m } => {
                (MetricFamily::AlfModel { link: LinkType::S2xS1, fiber: 8.0 * std::f64::consts::PI * m }, 0.0)
            }
            MetricFamily::Kerr { m, a } => {
                let rp = m + (m * m + a * a).sqrt();
                let beta = 2.0 * std::f64::consts::PI * (rp * rp - a * a) / (m * m + a * a).sqrt();
                (MetricFamily::AlfModel { link: LinkType::S2xS1, fiber: beta }, 0.0)
            }
            MetricFamily::TaubNut { n } | MetricFamily::TaubBolt { n } => {
                (MetricFamily::AlfModel { link: LinkType::S3, fiber: n }, n)
            }
            MetricFamily::AlfModel { link, fiber } => (
                MetricFamily::AlfModel { link, fiber },
                match link {
                    LinkType::S2xS1 => 0.0,
                    LinkType::S3 => fiber,
                },
            ),
            _ => return None,
        };
        let model = model_family.instantiate_with(cfg).ok()?;
        Some(AlfStructure {
            link: match model_family {
                MetricFamily::AlfModel { link, .. } => link,
                _ => unreachable!(),
            },
            fiber_axis: 0,
            rho_axis: 1,
            t_components: [1.0, 0.0, 0.0, 0.0],
            eta_fiber_scale: fiber_scale,
            model,
        })
    }
}

/// Fibered ALF end data: T, η and the background model metric.
///
/// For every shipped family T = ∂/∂τ in chart coordinates and
/// η = dτ + 2n cosθ dφ (n = 0 for the trivial circle bundle).
#[derive(Clone)]
pub struct AlfStructure {
    pub link: LinkType,
    pub fiber_axis: usize,
    pub rho_axis: usize,
    pub t_components: [f64; 4],
    pub eta_fiber_scale: f64,
    pub model: MetricSpec,
}

impl AlfStructure {
    /// η components at a point, as jets.
    pub fn eta(&self, x: &[Jet; 4]) -> [Jet; 4] {
        let o = x[0].order();
        let mut eta = [
            Jet::constant(1.0, o),
            Jet::constant(0.0, o),
            Jet::constant(0.0, o),
            Jet::constant(0.0, o),
        ];
        if self.eta_fiber_scale != 0.0 {
            eta[3] = x[2].cos() * (2.0 * self.eta_fiber_scale);
        }
        eta
    }
}

fn polar_fiber_chart(chart_id: &'static str, fiber_period: f64, _cfg: &FamilyConfig) -> ChartInfo {
    ChartInfo {
        chart_id,
        coord_names: ["tau", "r", "theta", "phi"],
        periods: [Some(fiber_period), None, None, Some(2.0 * std::f64::consts::PI)],
        radial_axis: Some(1),
        polar_axis: Some(2),
    }
}

fn polar_domain(r_min: f64, cfg: &FamilyConfig) -> Domain {
    Domain {
        ranges: [
            (f64::NEG_INFINITY, f64::INFINITY),
            (r_min, cfg.r_max),
            (cfg.axis_margin, std::f64::consts::PI - cfg.axis_margin),
            (f64::NEG_INFINITY, f64::INFINITY),
        ],
    }
}

fn kerr_like(name: &'static str, m: f64, a: f64, cfg: &FamilyConfig) -> Result<MetricSpec> {
    let rp = m + (m * m + a * a).sqrt();
    let beta = 2.0 * std::f64::consts::PI * (rp * rp - a * a) / (m * m + a * a).sqrt();
    let chart = polar_fiber_chart("boyer_lindquist", beta, cfg);
    let domain = polar_domain(rp + cfg.horizon_margin, cfg);
    Ok(MetricSpec::new(
        name,
        chart,
        domain,
        Orientation::Plus,
        Arc::new(ClosedForm(move |x: &[Jet; 4]| kerr_components(m, a, x))),
    ))
}

/// Riemannian Kerr in Boyer-Lindquist coordinates (τ, r, θ, φ).
///
/// Obtained from the Lorentzian form by t ↦ -iτ, a ↦ ia:
///   Σ = r² - a²cos²θ,  Δ = r² - 2mr - a²,
///   h = (1 - 2mr/Σ) dτ² - (4mar sin²θ/Σ) dτ dφ + (Σ/Δ) dr² + Σ dθ²
///       + (r² - a² - 2ma²r sin²θ/Σ) sin²θ dφ².
fn kerr_components(m: f64, a: f64, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let o = x[0].order();
    let r = &x[1];
    let theta = &x[2];
    let sin = theta.sin();
    let cos = theta.cos();
    let sin2 = &sin * &sin;
    let cos2 = &cos * &cos;
    let r2 = r * r;
    let sigma = &r2 - &cos2 * (a * a);
    let delta = &r2 - r * (2.0 * m) - a * a;
    let sigma_inv = sigma.recip();

    let zero = Jet::constant(0.0, o);
    let mut g = j2(|_, _| zero.clone());
    g[0][0] = -(r * (2.0 * m) * &sigma_inv) + 1.0;
    g[0][3] = -(r * &sin2 * &sigma_inv * (2.0 * m * a));
    g[3][0] = g[0][3].clone();
    g[1][1] = &sigma * delta.recip();
    g[2][2] = sigma.clone();
    g[3][3] = (&r2 - r * &sin2 * &sigma_inv * (2.0 * m * a * a) - a * a) * &sin2;
    g
}

/// Self-dual Taub-NUT in Gibbons-Hawking form, coordinates (τ, ρ, θ, φ):
///   V = 1 + 2n/ρ,
///   h = V⁻¹ (dτ + 2n cosθ dφ)² + V (dρ² + ρ²dθ² + ρ²sin²θ dφ²),
/// with τ of period 8πn.
fn taub_nut_components(n: f64, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let o = x[0].order();
    let rho = &x[1];
    let theta = &x[2];
    let v = rho.recip() * (2.0 * n) + 1.0;
    let vinv = v.recip();
    let cos = theta.cos();
    let sin = theta.sin();
    let a_phi = &cos * (2.0 * n);

    let zero = Jet::constant(0.0, o);
    let mut g = j2(|_, _| zero.clone());
    g[0][0] = vinv.clone();
    g[0][3] = &vinv * &a_phi;
    g[3][0] = g[0][3].clone();
    g[1][1] = v.clone();
    g[2][2] = &v * rho * rho;
    g[3][3] = &vinv * &a_phi * &a_phi + &v * rho * rho * &sin * &sin;
    g
}

/// Taub-bolt, coordinates (τ, r, θ, φ):
///   F = (r² - 2.5 n r + n²)/(r² - n²),
///   h = F (dτ + 2n cosθ dφ)² + F⁻¹ dr² + (r² - n²)(dθ² + sin²θ dφ²),
/// with τ of period 8πn and the bolt at r = 2n.
fn taub_bolt_components(n: f64, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let o = x[0].order();
    let r = &x[1];
    let theta = &x[2];
    let r2 = r * r;
    let quad = &r2 - r * (2.5 * n) + n * n;
    let denom = &r2 - n * n;
    let f = &quad * denom.recip();
    let cos = theta.cos();
    let sin = theta.sin();
    let a_phi = &cos * (2.0 * n);

    let zero = Jet::constant(0.0, o);
    let mut g = j2(|_, _| zero.clone());
    g[0][0] = f.clone();
    g[0][3] = &f * &a_phi;
    g[3][0] = g[0][3].clone();
    g[1][1] = f.recip();
    g[2][2] = denom.clone();
    g[3][3] = &f * &a_phi * &a_phi + &denom * &sin * &sin;
    g
}

/// Eguchi-Hanson, coordinates (ψ, r, θ, φ) with ψ of period 2π:
///   f = 1 - a⁴/r⁴,
///   h = f⁻¹ dr² + (r²/4) f (dψ + cosθ dφ)² + (r²/4)(dθ² + sin²θ dφ²).
fn eguchi_hanson_components(a: f64, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let o = x[0].order();
    let r = &x[1];
    let theta = &x[2];
    let r2 = r * r;
    let q = &r2 * &r2;
    let f = -(q.recip() * (a * a * a * a)) + 1.0;
    let quarter_r2 = &r2 * 0.25;
    let cos = theta.cos();
    let sin = theta.sin();

    let zero = Jet::constant(0.0, o);
    let mut g = j2(|_, _| zero.clone());
    g[0][0] = &quarter_r2 * &f;
    g[0][3] = &g[0][0] * &cos;
    g[3][0] = g[0][3].clone();
    g[1][1] = f.recip();
    g[2][2] = quarter_r2.clone();
    g[3][3] = &g[0][0] * &cos * &cos + &quarter_r2 * &sin * &sin;
    g
}

/// Flat R³ × S¹ model: h = dτ² + dρ² + ρ²(dθ² + sin²θ dφ²).
fn alf_model_flat_components(x: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let o = x[0].order();
    let rho = &x[1];
    let sin = x[2].sin();
    let zero = Jet::constant(0.0, o);
    let one = Jet::constant(1.0, o);
    let mut g = j2(|_, _| zero.clone());
    g[0][0] = one.clone();
    g[1][1] = one;
    g[2][2] = rho * rho;
    g[3][3] = rho * rho * &sin * &sin;
    g
}

/// NUT-type model: h = (dτ + 2n cosθ dφ)² + dρ² + ρ²(dθ² + sin²θ dφ²).
fn alf_model_nut_components(n: f64, x: &[Jet; 4]) -> [[Jet; 4]; 4] {
    let o = x[0].order();
    let rho = &x[1];
    let cos = x[2].cos();
    let sin = x[2].sin();
    let a_phi = &cos * (2.0 * n);
    let zero = Jet::constant(0.0, o);
    let one = Jet::constant(1.0, o);
    let mut g = j2(|_, _| zero.clone());
    g[0][0] = one.clone();
    g[0][3] = a_phi.clone();
    g[3][0] = a_phi.clone();
    g[1][1] = one;
    g[2][2] = rho * rho;
    g[3][3] = &a_phi * &a_phi + rho * rho * &sin * &sin;
    g
}

/// Measured Ricci health of a family over random sample points.
#[derive(Clone, Debug, Serialize)]
pub struct RicciReport {
    pub family: String,
    pub samples: usize,
    pub max_ricci: f64,
    pub max_relative_ricci: f64,
}

/// Sample the domain and report max |Ricci| and max |Ricci|/|Riemann|.
///
/// This is the gate every Einstein-dependent claim rests on: a transcription
/// error in a component formula shows up here immediately.
pub fn ricci_flat_selfcheck(spec: &MetricSpec, sample_count: usize, seed: u64) -> Result<RicciReport> {
    let points = crate::sampling::sample_points(spec, sample_count, seed);
    let mut max_ricci = 0.0f64;
    let mut max_rel = 0.0f64;
    for p in &points {
        let jet = crate::chart::evaluate_jet(spec, p, 2)?;
        let stack = curvature::CurvatureStack::build(&jet, spec.orientation)?;
        let (ricci_norm, riemann_norm) = stack.ricci_and_riemann_norms();
        max_ricci = max_ricci.max(ricci_norm);
        if riemann_norm > 0.0 {
            max_rel = max_rel.max(ricci_norm / riemann_norm);
        } else {
            max_rel = max_rel.max(ricci_norm);
        }
    }
    Ok(RicciReport {
        family: spec.name.clone(),
        samples: points.len(),
        max_ricci,
        max_relative_ricci: max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kerr_at_zero_spin_matches_schwarzschild() {
        let kerr = MetricFamily::Kerr { m: 1.3, a: 0.0 };
        let schw = MetricFamily::Schwarzschild { m: 1.3 };
        // Kerr rejects a = 0? No: |a| < m admits a = 0.
        let ks = kerr.instantiate().unwrap();
        let ss = schw.instantiate().unwrap();
        for &(r, th) in &[(4.0, 0.9), (7.3, 2.0), (3.1, 1.5)] {
            let x = [0.4, r, th, 1.1];
            let gk = ks.components_at(&x, 1);
            let gs = ss.components_at(&x, 1);
            for a in 0..4 {
                for b in 0..4 {
                    assert_relative_eq!(gk[a][b].value(), gs[a][b].value(), epsilon = 1e-14);
                    assert_relative_eq!(gk[a][b].grad(1), gs[a][b].grad(1), epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn inadmissible_parameters_are_rejected() {
        assert!(MetricFamily::Kerr { m: 1.0, a: 1.0 }.instantiate().is_err());
        assert!(MetricFamily::Kerr { m: 1.0, a: -1.5 }.instantiate().is_err());
        assert!(MetricFamily::Schwarzschild { m: -1.0 }.instantiate().is_err());
        assert!(MetricFamily::TaubNut { n: 0.0 }.instantiate().is_err());
    }

    #[test]
    fn zoo_metrics_are_positive_definite_at_samples() {
        for fam in MetricFamily::catalog() {
            let spec = fam.instantiate().unwrap();
            let pts = crate::sampling::sample_points(&spec, 25, 7);
            for p in pts {
                crate::chart::evaluate_jet(&spec, &p, 0)
                    .unwrap_or_else(|e| panic!("{} failed at {:?}: {e}", spec.name, p.coords));
            }
        }
    }

    #[test]
    fn flat_alf_model_is_flat() {
        let spec = MetricFamily::AlfModel { link: LinkType::S2xS1, fiber: 2.0 }.instantiate().unwrap();
        let p = spec.point([0.3, 5.0, 1.0, 2.0]);
        let jet = crate::chart::evaluate_jet(&spec, &p, 2).unwrap();
        let stack = curvature::CurvatureStack::build(&jet, Orientation::Plus).unwrap();
        let (_, riemann) = stack.ricci_and_riemann_norms();
        assert!(riemann < 1e-12, "flat ALF model has |Riemann| = {riemann:.3e}");
    }

    #[test]
    fn ricci_selfcheck_passes_zoo_and_catches_corruption() {
        let spec = MetricFamily::Kerr { m: 1.0, a: 0.3 }.instantiate().unwrap();
        let rep = ricci_flat_selfcheck(&spec, 30, 5).unwrap();
        assert!(rep.max_relative_ricci < 1e-8, "kerr rel Ricci {:.3e}", rep.max_relative_ricci);

        // Corrupted Schwarzschild: m ↦ m(1 + 1e-3 r) is no longer Einstein.
        let chart = crate::chart::ChartInfo {
            chart_id: "boyer_lindquist",
            coord_names: ["tau", "r", "theta", "phi"],
            periods: [Some(8.0 * std::f64::consts::PI), None, None, Some(2.0 * std::f64::consts::PI)],
            radial_axis: Some(1),
            polar_axis: Some(2),
        };
        let domain = polar_domain(2.8, &FamilyConfig::default());
        let bad = crate::chart::MetricSpec::new(
            "schwarzschild_corrupted",
            chart,
            domain,
            Orientation::Plus,
            Arc::new(crate::chart::ClosedForm(|x: &[Jet; 4]| {
                let r = &x[1];
                let m = r * 1e-3 + 1.0;
                let f = -(&m * 2.0 * r.recip()) + 1.0;
                let sin = x[2].sin();
                let o = x[0].order();
                let zero = Jet::constant(0.0, o);
                let mut g = j2(|_, _| zero.clone());
                g[0][0] = f.clone();
                g[1][1] = f.recip();
                g[2][2] = r * r;
                g[3][3] = r * r * &sin * &sin;
                g
            })),
        )
        .with_sample_box([(0.0, 25.0), (3.0, 12.0), (0.3, 2.8), (0.0, 6.0)]);
        let rep = ricci_flat_selfcheck(&bad, 30, 5).unwrap();
        assert!(
            rep.max_relative_ricci > 1e-5,
            "corrupted metric must fail the self-check, got {:.3e}",
            rep.max_relative_ricci
        );
    }

    #[test]
    fn weyl_sign_flags_match_measurement() {
        for fam in MetricFamily::catalog() {
            let spec = match fam.instantiate() {
                Ok(s) => s,
                Err(_) => continue,
            };
            let flags = fam.flags();
            for p in crate::sampling::sample_points(&spec, 8, 21) {
                let jet = crate::chart::evaluate_jet(&spec, &p, 2).unwrap();
                let st = curvature::CurvatureStack::build(&jet, Orientation::Plus).unwrap();
                let wp = st.wplus_value();
                let wm = st.wminus_value();
                let np: f64 = wp.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                let nm: f64 = wm.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                let (_, rie) = st.ricci_and_riemann_norms();
                let floor = (1e-9 * rie).max(1e-13);
                match flags.hyperkahler_side {
                    HyperkahlerSide::Plus => assert!(np < floor, "{}: |W+|={np:.3e}", spec.name),
                    HyperkahlerSide::Minus => assert!(nm < floor, "{}: |W-|={nm:.3e}", spec.name),
                    HyperkahlerSide::Both => assert!(np < floor && nm < floor),
                    HyperkahlerSide::None => {}
                }
                // Wu positivity is only meaningful above the noise floor.
                let wu_of = |w: &[[f64; 3]; 3], norm: f64| {
                    norm > floor
                        && crate::wu::cardano_alpha(w).map(|s| s.det_w > 0.0).unwrap_or(false)
                };
                assert_eq!(wu_of(&wp, np), flags.wu_plus, "{} wu_plus at {:?}", spec.name, p.coords);
                assert_eq!(wu_of(&wm, nm), flags.wu_minus, "{} wu_minus at {:?}", spec.name, p.coords);
            }
        }
    }

    #[test]
    fn alf_structure_eta_pairs_with_t() {
        // T ⌟ η = 1 for every ALF family.
        for fam in [
            MetricFamily::Schwarzschild { m: 1.0 },
            MetricFamily::Kerr { m: 1.0, a: 0.3 },
            MetricFamily::TaubNut { n: 1.0 },
            MetricFamily::TaubBolt { n: 1.0 },
        ] {
            let alf = fam.alf_structure(&FamilyConfig::default()).unwrap();
            let x = Jet::seed_point(&[0.1, 30.0, 1.2, 0.7], 1);
            let eta = alf.eta(&x);
            let pairing: f64 = (0..4).map(|i| alf.t_components[i] * eta[i].value()).sum();
            assert_relative_eq!(pairing, 1.0, epsilon = 1e-14);
            // T ⌟ dη = 0: η is τ-independent and has no dτ-dependence beyond the constant.
            for i in 0..4 {
                assert_relative_eq!(eta[i].grad(0), 0.0, epsilon = 1e-14);
            }
        }
    }
}
