use std::io::Write;

use gravlam_core::background::{heisenberg_diagnostic, sample_ensemble, SpectrumConfig};
use gravlam_core::correlation::{
    argmax_s, check_bounds, phi_grid, sweep_s, write_sweep_csv, AnalyzerConfig, ChshResult, CorrelationEstimate,
    Correlator, MIN_SAMPLES,
};
use gravlam_core::numeric::fmt_f64;
use gravlam_core::oscillator::{integrate_background, superpose_background};
use gravlam_core::stats::{chi_square_uniform, ks_uniform};
use gravlam_core::{bell_s, Error};
use serde_json::{json, Map, Value};

use crate::args::{
    finite, to_radians, BackgroundArgs, ChshArgs, CorrelationArgs, DeviationArgs, Format, MethodArg, SweepArgs,
};
use crate::error::{usage, CliError};
use crate::output::{write_artifact, write_text, Metadata};

pub struct RunContext {
    pub workers: usize,
}

fn correlator(method: MethodArg, n: usize, seed: u64, panels: usize) -> Result<Correlator, CliError> {
    if method == MethodArg::Quadrature && (panels < 8 || panels % 2 != 0) {
        return Err(usage(format!("--panels must be even and >= 8, got {panels}")));
    }
    if method.is_sampled() && n < MIN_SAMPLES {
        return Err(usage(format!("--n must be >= {MIN_SAMPLES}, got {n}")));
    }
    Ok(match method {
        MethodArg::ClosedForm => Correlator::ClosedForm,
        MethodArg::Quadrature => Correlator::Quadrature { panels },
        MethodArg::MonteCarlo => Correlator::MonteCarlo { n, seed },
        MethodArg::SignModel => Correlator::SignModel { n, seed },
        MethodArg::SignPopulation => Correlator::SignPopulation,
    })
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map,
        _ => unreachable!("payloads are built with json!({{...}})"),
    }
}

fn estimate_line(label: &str, m: &CorrelationEstimate) -> String {
    format!("{label} = {} ± {} (n = {})", fmt_f64(m.value), fmt_f64(m.stderr), m.n_samples)
}

pub fn correlation(args: CorrelationArgs, ctx: &RunContext) -> Result<(), CliError> {
    let args = args.with_defaults()?;
    let theta = finite(to_radians(args.theta.unwrap_or_default(), args.degrees), "--theta")?;
    let method = args.method.unwrap_or(MethodArg::ClosedForm);
    let corr =
        correlator(method, args.n.unwrap_or_default(), args.seed.unwrap_or_default(), args.panels.unwrap_or_default())?;
    let estimate = corr.estimate(theta)?;
    let reference = match method {
        MethodArg::SignModel | MethodArg::SignPopulation => {
            gravlam_core::correlation::sign_model_population(theta)?.value
        }
        _ => theta.cos(),
    };

    println!("method: {}", estimate.method);
    println!("theta = {} rad", fmt_f64(theta));
    println!("{}", estimate_line("M(theta)", &estimate));
    println!("reference = {}", fmt_f64(reference));

    if let Some(path) = &args.out {
        let meta = Metadata::new("correlation", ctx.workers, &args)?;
        let payload = object(json!({ "theta": theta, "estimate": estimate, "reference": reference }));
        write_artifact(
            path,
            args.format.unwrap_or(Format::Csv),
            &meta,
            |out| {
                writeln!(out, "theta,value,stderr,n_samples,method,reference")?;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(theta),
                    fmt_f64(estimate.value),
                    fmt_f64(estimate.stderr),
                    estimate.n_samples,
                    estimate.method,
                    fmt_f64(reference)
                )?;
                Ok(())
            },
            payload,
        )?;
    }
    Ok(())
}

fn print_chsh(result: &ChshResult) {
    println!("{}", estimate_line("M(a,b)  ", &result.m_ab));
    println!("{}", estimate_line("M(a',b) ", &result.m_apb));
    println!("{}", estimate_line("M(a,b') ", &result.m_abp));
    println!("{}", estimate_line("M(a',b')", &result.m_apbp));
    println!("S = {} ± {}", fmt_f64(result.s), fmt_f64(result.s_stderr));
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "satisfied"
    } else {
        "violated"
    }
}

pub fn chsh(args: ChshArgs, ctx: &RunContext) -> Result<(), CliError> {
    let args = args.with_defaults()?;
    let angle = |v: Option<f64>, flag| finite(to_radians(v.unwrap_or_default(), args.degrees), flag);
    let config = AnalyzerConfig::new(
        angle(args.a, "--a")?,
        angle(args.a_prime, "--a-prime")?,
        angle(args.b, "--b")?,
        angle(args.b_prime, "--b-prime")?,
    )?;
    let corr = correlator(
        args.method.unwrap_or(MethodArg::ClosedForm),
        args.n.unwrap_or_default(),
        args.seed.unwrap_or_default(),
        args.panels.unwrap_or_default(),
    )?;
    let result = bell_s(&config, &corr)?;
    let report = check_bounds(&result);

    println!(
        "a = {}, a' = {}, b = {}, b' = {} rad",
        fmt_f64(config.a),
        fmt_f64(config.a_prime),
        fmt_f64(config.b),
        fmt_f64(config.b_prime)
    );
    println!("method: {}", result.m_ab.method);
    print_chsh(&result);
    println!(
        "classic bound |S| <= 1: {} (margin {})",
        verdict(report.classic_bound_satisfied),
        fmt_f64(report.margin_classic)
    );
    println!(
        "refined bound |S| <= sqrt(2): {} (margin {})",
        verdict(report.refined_bound_satisfied),
        fmt_f64(report.margin_refined)
    );

    if let Some(path) = &args.out {
        let meta = Metadata::new("chsh", ctx.workers, &args)?;
        let payload = object(json!({ "analyzers": config, "result": result, "bounds": report }));
        write_artifact(
            path,
            args.format.unwrap_or(Format::Csv),
            &meta,
            |out| {
                writeln!(out, "a,a_prime,b,b_prime,S,S_stderr,m_ab,m_apb,m_abp,m_apbp,method,n_samples,classic_bound_satisfied,refined_bound_satisfied,margin_classic,margin_refined")?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt_f64(config.a),
                    fmt_f64(config.a_prime),
                    fmt_f64(config.b),
                    fmt_f64(config.b_prime),
                    fmt_f64(result.s),
                    fmt_f64(result.s_stderr),
                    fmt_f64(result.m_ab.value),
                    fmt_f64(result.m_apb.value),
                    fmt_f64(result.m_abp.value),
                    fmt_f64(result.m_apbp.value),
                    result.m_ab.method,
                    result.m_ab.n_samples,
                    report.classic_bound_satisfied,
                    report.refined_bound_satisfied,
                    fmt_f64(report.margin_classic),
                    fmt_f64(report.margin_refined)
                )?;
                Ok(())
            },
            payload,
        )?;
    }
    Ok(())
}

pub fn sweep(args: SweepArgs, ctx: &RunContext) -> Result<(), CliError> {
    let args = args.with_defaults()?;
    let phi_min = finite(to_radians(args.phi_min.unwrap_or_default(), args.degrees), "--phi-min")?;
    let phi_max = finite(to_radians(args.phi_max.unwrap_or_default(), args.degrees), "--phi-max")?;
    let steps = args.steps.unwrap_or_default();
    if phi_max < phi_min {
        return Err(usage(format!("--phi-max ({phi_max}) must be >= --phi-min ({phi_min})")));
    }
    if steps == 0 && phi_max > phi_min {
        return Err(usage("--steps must be >= 1 for a non-empty range"));
    }
    let corr = correlator(
        args.method.unwrap_or(MethodArg::ClosedForm),
        args.n.unwrap_or_default(),
        args.seed.unwrap_or_default(),
        args.panels.unwrap_or_default(),
    )?;
    let grid = phi_grid(phi_min, phi_max, steps)?;
    let rows = sweep_s(&grid, &corr)?;
    let (phi_star, best) = argmax_s(&rows).expect("grid is non-empty");

    println!("points: {}", rows.len());
    println!("argmax: phi = {} rad, S = {} ± {}", fmt_f64(*phi_star), fmt_f64(best.s), fmt_f64(best.s_stderr));

    if let Some(path) = &args.out {
        let meta = Metadata::new("sweep", ctx.workers, &args)?;
        let json_rows: Vec<Value> = rows
            .iter()
            .map(|(phi, r)| {
                json!({
                    "phi": phi, "S": r.s, "S_stderr": r.s_stderr,
                    "m_ab": r.m_ab.value, "m_apb": r.m_apb.value, "m_abp": r.m_abp.value, "m_apbp": r.m_apbp.value,
                    "method": r.m_ab.method, "n_samples": r.m_ab.n_samples,
                })
            })
            .collect();
        let payload = object(json!({ "rows": json_rows }));
        write_artifact(
            path,
            args.format.unwrap_or(Format::Csv),
            &meta,
            |out| Ok(write_sweep_csv(out, &rows)?),
            payload,
        )?;
    }
    Ok(())
}

fn step_count(t_max: f64, dt: f64) -> usize {
    let ratio = t_max / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

pub fn deviation(args: DeviationArgs, ctx: &RunContext) -> Result<(), CliError> {
    let args = args.with_defaults()?;
    let spectrum = SpectrumConfig {
        omega_min: finite(args.omega_min.unwrap_or_default(), "--omega-min")?,
        omega_max: finite(args.omega_max.unwrap_or_default(), "--omega-max")?,
        strain: finite(args.strain.unwrap_or_default(), "--strain")?,
        mode_count: args.modes.unwrap_or_default(),
    };
    let ell0 = finite(args.ell0.unwrap_or_default(), "--ell0")?;
    let t_max = finite(args.t_max.unwrap_or_default(), "--t-max")?;
    let dt = finite(args.dt.unwrap_or_default(), "--dt")?;
    let mass = finite(args.mass.unwrap_or_default(), "--mass")?;
    if ell0 <= 0.0 {
        return Err(usage("--ell0 must be positive"));
    }
    if t_max <= 0.0 {
        return Err(usage("--t-max must be positive"));
    }
    if dt <= 0.0 {
        return Err(usage("--dt must be positive"));
    }
    if mass <= 0.0 {
        return Err(usage("--mass must be positive"));
    }
    let ensemble = sample_ensemble(&spectrum, args.seed.unwrap_or_default()).map_err(|e| match e {
        Error::StrainOutOfRange(s) => usage(format!("--strain must lie in [0, 1e-3], got {s}")),
        Error::InvalidSpectrum(msg) => usage(format!("spectrum flags (--omega-min/--omega-max/--modes): {msg}")),
        other => other.into(),
    })?;
    let steps = step_count(t_max, dt);
    let run = integrate_background(&ensemble, ell0, dt, steps).map_err(|e| match e {
        Error::StepTooLarge { omega_dt, max_dt } => usage(format!(
            "--dt too large: omega_max*dt = {omega_dt} exceeds 0.1 (stability limit); reduce --dt to at most {max_dt} s"
        )),
        other => other.into(),
    })?;

    let traj = &run.trajectory;
    let first = traj.first();
    let last = traj.last();
    let closed = ell0 + superpose_background(&ensemble, ell0, last.t)?;
    let diagnostics: Vec<_> =
        ensemble.modes.iter().map(|m| heisenberg_diagnostic(m, mass, ell0)).collect::<Result<_, _>>()?;
    let worst = diagnostics
        .iter()
        .copied()
        .max_by(|a, b| a.product_over_hbar.total_cmp(&b.product_over_hbar))
        .expect("ensemble is non-empty");
    let relative_change = (last.ell - first.ell).abs() / first.ell.abs();

    println!("modes: {}, steps: {}, dt = {} s, t_end = {} s", ensemble.len(), steps, fmt_f64(dt), fmt_f64(last.t));
    println!("ell(0) = {} m, ell(t_end) = {} m", fmt_f64(first.ell), fmt_f64(last.ell));
    println!("relative change: {}", fmt_f64(relative_change));
    println!(
        "closed-form superposition at t_end: {} m (difference {})",
        fmt_f64(closed),
        fmt_f64((closed - last.ell).abs())
    );
    println!("max energy drift: {}", fmt_f64(run.max_energy_drift));
    println!(
        "heisenberg (largest mode): dx = {} m, dp = {} kg m/s, dx*dp/hbar = {}",
        fmt_f64(worst.delta_x),
        fmt_f64(worst.delta_p),
        fmt_f64(worst.product_over_hbar)
    );

    if let Some(path) = &args.out {
        let meta = Metadata::new("deviation", ctx.workers, &args)?;
        let rows: Vec<Value> =
            traj.states.iter().map(|s| json!({ "t": s.t, "ell": s.ell, "ell_dot": s.ell_dot })).collect();
        let payload = object(json!({
            "diagnostics": {
                "max_energy_drift": run.max_energy_drift,
                "closed_form_final_ell": closed,
                "heisenberg": diagnostics,
            },
            "rows": rows,
        }));
        write_artifact(path, args.format.unwrap_or(Format::Csv), &meta, |out| Ok(traj.write_csv(out)?), payload)?;
    }
    Ok(())
}

pub fn background(args: BackgroundArgs) -> Result<(), CliError> {
    let args = args.with_defaults()?;
    let spectrum = SpectrumConfig {
        omega_min: finite(args.omega_min.unwrap_or_default(), "--omega-min")?,
        omega_max: finite(args.omega_max.unwrap_or_default(), "--omega-max")?,
        strain: finite(args.strain.unwrap_or_default(), "--strain")?,
        mode_count: args.modes.unwrap_or_default(),
    };
    let ensemble = sample_ensemble(&spectrum, args.seed.unwrap_or_default())?;
    let mut text = ensemble.to_json()?;
    text.push('\n');

    match &args.out {
        Some(path) => {
            write_text(path, &text)?;
            let n = ensemble.len() as f64;
            let phases: Vec<f64> = ensemble.modes.iter().map(|m| m.phase()).collect();
            let cos_polar: Vec<f64> = ensemble.modes.iter().map(|m| m.direction()[2]).collect();
            println!("modes: {}, seed: {}", ensemble.len(), ensemble.seed);
            println!("phase KS sqrt(n)*D = {}", fmt_f64(n.sqrt() * ks_uniform(&phases, 0.0, std::f64::consts::TAU)));
            println!("cos(polar) chi-square (16 bins) = {}", fmt_f64(chi_square_uniform(&cos_polar, -1.0, 1.0, 16)));
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(step_count(1.0, 1e-3), 1000);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(step_count(0.5, 0.5), 1);
    }

    #[test]
    fn correlator_validation_names_flags() {
        let e = correlator(MethodArg::Quadrature, 0, 0, 7).unwrap_err();
        assert!(e.to_string().contains("--panels"));
        let e = correlator(MethodArg::MonteCarlo, 10, 0, 64).unwrap_err();
        assert!(e.to_string().contains("--n"));
        assert!(correlator(MethodArg::ClosedForm, 0, 0, 0).is_ok());
    }
}
