//! Hidden-variable correlations and the Bell observable.
//!
//! In the projection model the outcomes at analyzers `a` and `b` are the
//! continuous projections `cos α` and `cos(α + θ)` of a planar hidden unit
//! vector at angle `α`, and the correlation is
//!
//! ```text
//! M(θ) = (1/π) ∫₀^{2π} cos α cos(α + θ) dα = cos θ.
//! ```
//!
//! The `1/π` weight integrates to 2 over the circle, so `M(0) = 1`; the
//! Monte Carlo estimator therefore doubles the sample mean taken under the
//! uniform density `1/(2π)`.
//!
//! The sign model is a separate comparator with dichotomic `±1` outcomes.
//! Its correlation is the sawtooth `1 - 2|θ|/π`, and its Bell observable
//! never exceeds 1 in magnitude.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::background::sample_lambda;
use crate::error::{ensure_finite, Error, Result};
use crate::numeric::{fmt_f64, reduce_angle, simpson, wrap_angle, RunningStats};
use crate::rng;

/// Monte Carlo runs are always split into this many substreams, whatever
/// the number of worker threads.
pub const MC_SHARDS: u64 = 16;

pub const MIN_SAMPLES: usize = 100;

/// Bound on `|S|` for dichotomic local hidden-variable models.
pub const CLASSIC_BOUND: f64 = 1.0;

/// Bound on `|S|` for the projection model, also the experimental value.
pub const REFINED_BOUND: f64 = SQRT_2;

/// Number of standard errors of slack granted to statistical estimates.
pub const SIGMA_SLACK: f64 = 4.0;

/// Absolute slack absorbing floating-point rounding in bound checks.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Zero for deterministic methods.
    pub n_samples: u64,
    pub method: Method,
}

impl CorrelationEstimate {
    fn exact(value: f64, method: Method) -> Self {
        CorrelationEstimate { value, stderr: 0.0, n_samples: 0, method }
    }
}

/// Four analyzer orientations in the polarizer plane, stored in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl AnalyzerConfig {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(AnalyzerConfig {
            a: reduce_angle(ensure_finite(a, "a")?),
            a_prime: reduce_angle(ensure_finite(a_prime, "a_prime")?),
            b: reduce_angle(ensure_finite(b, "b")?),
            b_prime: reduce_angle(ensure_finite(b_prime, "b_prime")?),
        })
    }

    /// `(0, -π/2, -π/4, π/4)`, successive separations of `π/4`.
    pub fn maximal() -> Self {
        Self::sweep_family(PI / 4.0).expect("finite angles")
    }

    /// `a = 0, a' = -2φ, b = -φ, b' = φ`.
    pub fn sweep_family(phi: f64) -> Result<Self> {
        Self::new(0.0, -2.0 * phi, -phi, phi)
    }

    /// Same configuration rotated by `offset`.
    pub fn rotated(&self, offset: f64) -> Result<Self> {
        Self::new(self.a + offset, self.a_prime + offset, self.b + offset, self.b_prime + offset)
    }

    /// Analyzer differences `(b - a, b - a', b' - a, b' - a')` in `(-π, π]`.
    pub fn differences(&self) -> [f64; 4] {
        [
            wrap_angle(self.b - self.a),
            wrap_angle(self.b - self.a_prime),
            wrap_angle(self.b_prime - self.a),
            wrap_angle(self.b_prime - self.a_prime),
        ]
    }
}

pub fn correlation_closed_form(theta: f64) -> Result<CorrelationEstimate> {
    Ok(CorrelationEstimate::exact(ensure_finite(theta, "theta")?.cos(), Method::ClosedForm))
}

/// Composite Simpson evaluation of `(1/π) ∫₀^{2π} cos α cos(α + θ) dα`.
pub fn correlation_quadrature(theta: f64, panels: usize) -> Result<CorrelationEstimate> {
    ensure_finite(theta, "theta")?;
    let integral = simpson(|alpha| alpha.cos() * (alpha + theta).cos(), 0.0, TAU, panels)?;
    Ok(CorrelationEstimate::exact(integral / PI, Method::Quadrature))
}

/// Runs `n` draws of `α` split over [`MC_SHARDS`] substreams of `seed`.
fn sharded_stats<F>(n: usize, seed: u64, sample: F) -> RunningStats
where
    F: Fn(f64) -> f64 + Sync,
{
    let base = n as u64 / MC_SHARDS;
    let extra = n as u64 % MC_SHARDS;
    let shards: Vec<RunningStats> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = base + u64::from(shard < extra);
            let mut rng = rng::substream(seed, shard);
            let mut stats = RunningStats::default();
            for _ in 0..count {
                stats.push(sample(sample_lambda(&mut rng).alpha()));
            }
            stats
        })
        .collect();
    shards.into_iter().fold(RunningStats::default(), RunningStats::merge)
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        Err(Error::TooFewSamples(n))
    } else {
        Ok(())
    }
}

/// Projection-model estimate `2 · mean(cos α cos(α + θ))` over uniform `α`.
pub fn correlation_monte_carlo(theta: f64, n: usize, seed: u64) -> Result<CorrelationEstimate> {
    ensure_finite(theta, "theta")?;
    check_samples(n)?;
    let stats = sharded_stats(n, seed, |alpha| alpha.cos() * (alpha + theta).cos());
    Ok(CorrelationEstimate {
        value: 2.0 * stats.mean(),
        stderr: 2.0 * stats.std_error(),
        n_samples: n as u64,
        method: Method::MonteCarlo,
    })
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Dichotomic comparator: `A = sign(cos α)`, `B = sign(cos(α - θ))`.
pub fn correlation_sign_model(theta: f64, n: usize, seed: u64) -> Result<CorrelationEstimate> {
    ensure_finite(theta, "theta")?;
    check_samples(n)?;
    let stats = sharded_stats(n, seed, |alpha| sign(alpha.cos()) * sign((alpha - theta).cos()));
    Ok(CorrelationEstimate {
        value: stats.mean(),
        stderr: stats.std_error(),
        n_samples: n as u64,
        method: Method::MonteCarlo,
    })
}

/// Population correlation of the sign model, `1 - 2|θ|/π` for `θ` in `(-π, π]`.
pub fn sign_model_population(theta: f64) -> Result<CorrelationEstimate> {
    let t = wrap_angle(ensure_finite(theta, "theta")?).abs();
    Ok(CorrelationEstimate::exact(1.0 - t / FRAC_PI_2, Method::ClosedForm))
}

/// Correlation estimator used for each analyzer pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Correlator {
    ClosedForm,
    Quadrature { panels: usize },
    MonteCarlo { n: usize, seed: u64 },
    SignModel { n: usize, seed: u64 },
    SignPopulation,
}

impl Correlator {
    pub fn estimate(&self, theta: f64) -> Result<CorrelationEstimate> {
        match *self {
            Correlator::ClosedForm => correlation_closed_form(theta),
            Correlator::Quadrature { panels } => correlation_quadrature(theta, panels),
            Correlator::MonteCarlo { n, seed } => correlation_monte_carlo(theta, n, seed),
            Correlator::SignModel { n, seed } => correlation_sign_model(theta, n, seed),
            Correlator::SignPopulation => sign_model_population(theta),
        }
    }

    /// Copy whose random streams are derived from `(seed, index)`.
    pub fn reseeded(&self, index: u64) -> Self {
        match *self {
            Correlator::MonteCarlo { n, seed } => Correlator::MonteCarlo { n, seed: rng::mix_seed(seed, index) },
            Correlator::SignModel { n, seed } => Correlator::SignModel { n, seed: rng::mix_seed(seed, index) },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    /// `⟨AB⟩`
    pub m_ab: CorrelationEstimate,
    /// `⟨A'B⟩`
    pub m_apb: CorrelationEstimate,
    /// `⟨AB'⟩`
    pub m_abp: CorrelationEstimate,
    /// `⟨A'B'⟩`
    pub m_apbp: CorrelationEstimate,
    pub s: f64,
    pub s_stderr: f64,
}

impl ChshResult {
    pub fn combine(
        m_ab: CorrelationEstimate,
        m_apb: CorrelationEstimate,
        m_abp: CorrelationEstimate,
        m_apbp: CorrelationEstimate,
    ) -> Self {
        let s = 0.5 * (m_ab.value + m_apb.value + m_abp.value - m_apbp.value);
        let var = m_ab.stderr.powi(2) + m_apb.stderr.powi(2) + m_abp.stderr.powi(2) + m_apbp.stderr.powi(2);
        ChshResult { m_ab, m_apb, m_abp, m_apbp, s, s_stderr: 0.5 * var.sqrt() }
    }

    /// `½(M_ab + M_a'b + M_ab' - M_a'b')` from the stored parts.
    pub fn recomputed_s(&self) -> f64 {
        0.5 * (self.m_ab.value + self.m_apb.value + self.m_abp.value - self.m_apbp.value)
    }

    pub fn correlations(&self) -> [&CorrelationEstimate; 4] {
        [&self.m_ab, &self.m_apb, &self.m_abp, &self.m_apbp]
    }
}

/// Bell observable at `config`. Stochastic correlators draw each of the four
/// pairs from an independent stream derived from their seed.
pub fn bell_s(config: &AnalyzerConfig, correlator: &Correlator) -> Result<ChshResult> {
    let [ab, apb, abp, apbp] = config.differences();
    Ok(ChshResult::combine(
        correlator.reseeded(0).estimate(ab)?,
        correlator.reseeded(1).estimate(apb)?,
        correlator.reseeded(2).estimate(abp)?,
        correlator.reseeded(3).estimate(apbp)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub s: f64,
    pub s_stderr: f64,
    pub classic_bound_satisfied: bool,
    pub refined_bound_satisfied: bool,
    /// `|S| <= √2` with no statistical slack.
    #[serde(skip)]
    pub agrees_with_experiment: bool,
    /// `1 + 4σ - |S|`; negative when violated.
    pub margin_classic: f64,
    /// `√2 + 4σ - |S|`; negative when violated.
    pub margin_refined: f64,
}

impl BoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn check_bounds(result: &ChshResult) -> BoundReport {
    let magnitude = result.s.abs();
    let slack = SIGMA_SLACK * result.s_stderr;
    let margin_classic = CLASSIC_BOUND + slack - magnitude;
    let margin_refined = REFINED_BOUND + slack - magnitude;
    BoundReport {
        s: result.s,
        s_stderr: result.s_stderr,
        classic_bound_satisfied: margin_classic >= -ROUNDING_SLACK,
        refined_bound_satisfied: margin_refined >= -ROUNDING_SLACK,
        agrees_with_experiment: magnitude <= REFINED_BOUND + ROUNDING_SLACK,
        margin_classic,
        margin_refined,
    }
}

/// `steps` equal intervals from `min` to `max`; a single point when `min == max`.
pub fn phi_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    ensure_finite(min, "phi_min")?;
    ensure_finite(max, "phi_max")?;
    if max < min {
        return Err(Error::Empty("phi range (max < min)"));
    }
    if min == max {
        return Ok(vec![min]);
    }
    if steps == 0 {
        return Err(Error::Empty("phi grid (steps = 0)"));
    }
    let h = (max - min) / steps as f64;
    Ok((0..=steps).map(|i| if i == steps { max } else { min + i as f64 * h }).collect())
}

/// Bell observable along `a = 0, a' = -2φ, b = -φ, b' = φ`.
///
/// With the closed-form correlator `S(φ) = ½(3 cos φ - cos 3φ)`, maximal at
/// `φ = π/4`. Stochastic correlators use a stream per grid index.
pub fn sweep_s(phi_grid: &[f64], correlator: &Correlator) -> Result<Vec<(f64, ChshResult)>> {
    if phi_grid.is_empty() {
        return Err(Error::Empty("phi grid"));
    }
    phi_grid
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let config = AnalyzerConfig::sweep_family(phi)?;
            Ok((phi, bell_s(&config, &correlator.reseeded(i as u64))?))
        })
        .collect()
}

/// Row with the largest `S`; the first one on ties.
pub fn argmax_s(rows: &[(f64, ChshResult)]) -> Option<&(f64, ChshResult)> {
    rows.iter().fold(None, |best: Option<&(f64, ChshResult)>, row| match best {
        Some(b) if b.1.s >= row.1.s => Some(b),
        _ => Some(row),
    })
}

pub const SWEEP_CSV_HEADER: &str = "phi,S,S_stderr,m_ab,m_apb,m_abp,m_apbp,method,n_samples";

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[(f64, ChshResult)]) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for (phi, r) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(*phi),
            fmt_f64(r.s),
            fmt_f64(r.s_stderr),
            fmt_f64(r.m_ab.value),
            fmt_f64(r.m_apb.value),
            fmt_f64(r.m_abp.value),
            fmt_f64(r.m_apbp.value),
            r.m_ab.method,
            r.m_ab.n_samples
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_4;

    /// Brute-force sign-model correlation by midpoint enumeration over α.
    fn sign_model_enumerated(theta: f64, cells: usize) -> f64 {
        let h = TAU / cells as f64;
        (0..cells)
            .map(|i| {
                let a = (i as f64 + 0.5) * h;
                sign(a.cos()) * sign((a - theta).cos())
            })
            .sum::<f64>()
            / cells as f64
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn closed_form_examples() {
        assert_eq!(correlation_closed_form(0.0).unwrap().value, 1.0);
        assert!(correlation_closed_form(FRAC_PI_2).unwrap().value.abs() < 1e-16);
        let m = correlation_closed_form(FRAC_PI_4).unwrap();
        assert!((m.value - 0.707_106_78).abs() < 1e-8);
        assert_eq!((m.stderr, m.n_samples, m.method), (0.0, 0, Method::ClosedForm));
        assert!(correlation_closed_form(f64::NAN).is_err());
    }

    #[test]
    fn quadrature_examples() {
        for (theta, expected) in [(0.0, 1.0), (PI / 3.0, 0.5), (PI, -1.0)] {
            let m = correlation_quadrature(theta, 64).unwrap();
            assert!((m.value - expected).abs() < 1e-10, "{theta}: {}", m.value);
            assert_eq!(m.method, Method::Quadrature);
        }
        assert!(matches!(correlation_quadrature(0.0, 7), Err(Error::InvalidPanels(7))));
        assert!(matches!(correlation_quadrature(0.0, 4), Err(Error::InvalidPanels(4))));
    }

    #[test]
    fn monte_carlo_examples() {
        for theta in [0.0, FRAC_PI_2, FRAC_PI_4] {
            let m = correlation_monte_carlo(theta, 1_000_000, 42).unwrap();
            let reference = correlation_quadrature(theta, 64).unwrap().value;
            assert!((m.value - reference).abs() < 4.0 * m.stderr, "{theta}: {} ± {}", m.value, m.stderr);
            assert_eq!(m.n_samples, 1_000_000);
        }
        // Var(cos² α) = 1/8 under uniform α
        let m = correlation_monte_carlo(0.0, 1_000_000, 42).unwrap();
        assert!((m.stderr - 2.0 * (0.125f64).sqrt() / 1e3).abs() < 2e-5);
        assert!(matches!(correlation_monte_carlo(0.0, 99, 1), Err(Error::TooFewSamples(99))));
    }

    #[test]
    fn monte_carlo_is_deterministic_across_thread_counts() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(5).build().unwrap();
        let a = one.install(|| correlation_monte_carlo(0.3, 10_007, 9).unwrap());
        let b = many.install(|| correlation_monte_carlo(0.3, 10_007, 9).unwrap());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn sign_model_examples() {
        let m = correlation_sign_model(0.0, 1000, 3).unwrap();
        assert_eq!((m.value, m.stderr), (1.0, 0.0));
        for (theta, expected) in [(FRAC_PI_2, 0.0), (FRAC_PI_4, 0.5)] {
            let m = correlation_sign_model(theta, 1_000_000, 7).unwrap();
            assert!((m.value - expected).abs() < 4.0 * m.stderr);
            assert!((sign_model_enumerated(theta, 10_000) - expected).abs() < 1e-3);
        }
    }

    #[test]
    fn sign_population_matches_enumeration() {
        let mut r = rng::seeded(1);
        for _ in 0..50 {
            let theta = r.random_range(-PI..PI);
            let pop = sign_model_population(theta).unwrap().value;
            assert!((pop - sign_model_enumerated(theta, 40_000)).abs() < 2e-4, "{theta}");
        }
    }

    #[test]
    fn maximal_configuration_gives_sqrt_two() {
        let r = bell_s(&AnalyzerConfig::maximal(), &Correlator::ClosedForm).unwrap();
        assert!((r.s - SQRT_2).abs() < 1e-12);
        assert_eq!(r.s_stderr, 0.0);
        let report = check_bounds(&r);
        assert!(!report.classic_bound_satisfied);
        assert!(report.refined_bound_satisfied);
        assert!(report.agrees_with_experiment);
    }

    #[test]
    fn degenerate_angles_give_one() {
        let c = AnalyzerConfig::new(0.4, 0.4, 0.4, 0.4).unwrap();
        let r = bell_s(&c, &Correlator::ClosedForm).unwrap();
        assert!((r.s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_model_maximal_angles_give_one() {
        let r = bell_s(&AnalyzerConfig::maximal(), &Correlator::SignModel { n: 1_000_000, seed: 7 }).unwrap();
        assert!((r.s - 1.0).abs() < 4.0 * r.s_stderr, "{} ± {}", r.s, r.s_stderr);
        let p = bell_s(&AnalyzerConfig::maximal(), &Correlator::SignPopulation).unwrap();
        assert!((p.s - 1.0).abs() < 1e-15);
        assert!((p.m_apbp.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn stderr_propagation() {
        let r = bell_s(&AnalyzerConfig::maximal(), &Correlator::MonteCarlo { n: 10_000, seed: 1 }).unwrap();
        let expected = 0.5 * r.correlations().iter().map(|m| m.stderr.powi(2)).sum::<f64>().sqrt();
        assert_eq!(r.s_stderr, expected);
        assert!(r.s_stderr > 0.0);
        // the four pairs use distinct streams
        assert_ne!(r.m_abp.value, r.m_apb.value);
    }

    #[test]
    fn bound_report_examples() {
        let exact = |s: f64, stderr: f64| {
            let m = CorrelationEstimate::exact(0.0, Method::ClosedForm);
            check_bounds(&ChshResult { m_ab: m, m_apb: m, m_abp: m, m_apbp: m, s, s_stderr: stderr })
        };
        let r = exact(SQRT_2, 0.0);
        assert!(!r.classic_bound_satisfied && r.refined_bound_satisfied);
        assert_eq!(r.margin_refined, 0.0);
        let r = exact(0.5, 0.0);
        assert!(r.classic_bound_satisfied && r.refined_bound_satisfied);
        assert!((r.margin_classic - 0.5).abs() < 1e-15);
        let r = exact(1.5, 0.0);
        assert!(!r.classic_bound_satisfied && !r.refined_bound_satisfied && !r.agrees_with_experiment);
        let r = exact(-1.1, 0.05);
        assert!(r.classic_bound_satisfied);
    }

    #[test]
    fn bound_report_json_keys() {
        let r = check_bounds(&bell_s(&AnalyzerConfig::maximal(), &Correlator::ClosedForm).unwrap());
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["classic_bound_satisfied", "margin_classic", "margin_refined", "refined_bound_satisfied", "s", "s_stderr"]
        );
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep_s(&[FRAC_PI_4, 0.0], &Correlator::ClosedForm).unwrap();
        assert!((rows[0].1.s - SQRT_2).abs() < 1e-12);
        assert!((rows[1].1.s - 1.0).abs() < 1e-15);
        assert_eq!(rows[1].0, 0.0);

        let grid = phi_grid(0.0, FRAC_PI_2, 180).unwrap();
        assert!((grid[1] - PI / 360.0).abs() < 1e-15);
        let rows = sweep_s(&grid, &Correlator::ClosedForm).unwrap();
        let (phi, best) = argmax_s(&rows).unwrap();
        assert!((phi - FRAC_PI_4).abs() <= PI / 360.0);
        assert!((best.s - SQRT_2).abs() < 1e-10);
        for (phi, r) in &rows {
            let formula = 0.5 * (3.0 * phi.cos() - (3.0 * phi).cos());
            assert!((r.s - formula).abs() < 1e-14);
        }
        assert!(sweep_s(&[], &Correlator::ClosedForm).is_err());
    }

    #[test]
    fn grid_edges() {
        assert_eq!(phi_grid(0.0, 0.0, 10).unwrap(), vec![0.0]);
        assert_eq!(phi_grid(1.0, 2.0, 4).unwrap().len(), 5);
        assert_eq!(*phi_grid(1.0, 2.0, 3).unwrap().last().unwrap(), 2.0);
        assert!(phi_grid(1.0, 0.0, 4).is_err());
        assert!(phi_grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = sweep_s(&[0.0, 0.5], &Correlator::MonteCarlo { n: 200, seed: 2 }).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        let cells: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[0].parse::<f64>().unwrap(), 0.5);
        assert_eq!(cells[1].parse::<f64>().unwrap().to_bits(), rows[1].1.s.to_bits());
        assert_eq!(cells[7], "monte_carlo");
        assert_eq!(cells[8], "200");
    }

    #[test]
    fn correlator_serializes_with_kind_tag() {
        let c = Correlator::MonteCarlo { n: 1000, seed: 5 };
        let v = serde_json::to_value(c).unwrap();
        assert_eq!(v["kind"], "monte_carlo");
        assert_eq!(serde_json::from_value::<Correlator>(v).unwrap(), c);
    }

    #[test]
    fn projection_symmetry_under_shared_seed() {
        for theta in [0.3, 1.1, 2.5] {
            let plus = correlation_monte_carlo(theta, 100_000, 17).unwrap();
            let minus = correlation_monte_carlo(-theta, 100_000, 17).unwrap();
            assert!((plus.value - minus.value).abs() < 4.0 * SQRT_2 * plus.stderr);
        }
    }

    fn arb_angle() -> impl Strategy<Value = f64> {
        -10.0f64..10.0
    }

    proptest! {
        #[test]
        fn closed_form_and_quadrature_agree(theta in 0.0..TAU) {
            let q = correlation_quadrature(theta, 64).unwrap().value;
            let c = correlation_closed_form(theta).unwrap().value;
            prop_assert!((q - c).abs() < 1e-10);
            prop_assert!((-1.0..=1.0).contains(&c));
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&q));
            prop_assert_eq!(c, correlation_closed_form(-theta).unwrap().value);
        }

        #[test]
        fn global_rotation_leaves_s_unchanged(a in arb_angle(), ap in arb_angle(), b in arb_angle(),
                                              bp in arb_angle(), offset in arb_angle()) {
            let c = AnalyzerConfig::new(a, ap, b, bp).unwrap();
            let r = c.rotated(offset).unwrap();
            for corr in [Correlator::ClosedForm, Correlator::SignPopulation] {
                let s0 = bell_s(&c, &corr).unwrap().s;
                let s1 = bell_s(&r, &corr).unwrap().s;
                prop_assert!((s0 - s1).abs() < 1e-12);
            }
        }

        #[test]
        fn projection_model_never_exceeds_sqrt_two(a in arb_angle(), ap in arb_angle(), b in arb_angle(), bp in arb_angle()) {
            let r = bell_s(&AnalyzerConfig::new(a, ap, b, bp).unwrap(), &Correlator::ClosedForm).unwrap();
            prop_assert!(r.s.abs() <= SQRT_2 + 1e-12);
            prop_assert!((r.recomputed_s() - r.s).abs() <= 1e-15);
        }

        #[test]
        fn sign_population_never_exceeds_one(a in arb_angle(), ap in arb_angle(), b in arb_angle(), bp in arb_angle()) {
            let r = bell_s(&AnalyzerConfig::new(a, ap, b, bp).unwrap(), &Correlator::SignPopulation).unwrap();
            prop_assert!(r.s.abs() <= 1.0 + 1e-12);
        }
    }
}
