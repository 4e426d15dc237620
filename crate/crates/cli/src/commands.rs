use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rotdop_core::hom_interference::beat_frequency;
use rotdop_core::joint_spectrum::MIN_GRID;
use rotdop_core::phase_match::intersection;
use rotdop_core::{
    estimate as fit_trace, jsa_grid, observability, peak_locations, run_pipeline,
    synthesize_trace, trace, visibility, CrystalConfig, EmissionCurve, EstimateResult, HomConfig,
    HomTrace, Method, NoisyTrace, PhaseMatchGaussian, PumpSpectrum, RdeShift,
};
use serde::Serialize;

use crate::config::{
    echo, EstimateParams, HomParams, JsaParams, MethodArg, PhasematchParams, PipelineParams,
    DEFAULT_CENTER,
};
use crate::csv::{format_number, CsvDocument, TIMESTAMP_KEY};
use crate::error::{CliError, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::svg;
use crate::TOOL;

pub const MAX_GRID: usize = 4096;

fn timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
        .to_string()
}

fn header<T: Serialize>(command: &str, params: &T) -> Vec<(String, String)> {
    let mut meta = vec![
        ("tool".to_string(), TOOL.to_string()),
        ("command".to_string(), command.to_string()),
    ];
    meta.extend(echo(params));
    meta
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::failure(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::failure(format!("cannot write to standard output: {e}"))),
    }
}

fn finish(mut doc: CsvDocument, output: Option<&Path>) -> Result<(), CliError> {
    doc.meta(TIMESTAMP_KEY, timestamp());
    write_output(output, &doc.render())
}

pub fn pipeline(p: &PipelineParams) -> Result<i32, CliError> {
    let stages = run_pipeline(p.l, p.omega, p.center)?;
    let names = [
        "polarization-entangled pair from the crystal",
        "after the quarter-wave plates (spin)",
        "after the rotating q-plates (spin, OAM and frequency)",
        "after the inverse quarter-wave plates and polarizers (OAM and frequency)",
    ];
    let mut out = String::new();
    for (k, v) in header("pipeline", p) {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# {TIMESTAMP_KEY}={}", timestamp());
    for (i, (name, state)) in names.iter().zip(stages.as_array()).enumerate() {
        let _ = writeln!(out, "stage {}: {name}", i + 1);
        let _ = writeln!(out, "{state}");
    }
    write_output(p.output.as_deref(), &out)?;
    Ok(EXIT_OK)
}

pub fn jsa(p: &JsaParams) -> Result<i32, CliError> {
    if !(MIN_GRID..=MAX_GRID).contains(&p.grid) {
        return Err(CliError::usage(format!(
            "--grid must lie in [{MIN_GRID}, {MAX_GRID}], got {}",
            p.grid
        )));
    }
    let pump = PumpSpectrum::new(DEFAULT_CENTER, p.sigma)?;
    let pm = match p.a_coef {
        Some(a) => PhaseMatchGaussian::new(p.gamma, a)?,
        None => PhaseMatchGaussian::reference(p.sigma, p.gamma)?,
    };
    let resolved = JsaParams {
        a_coef: Some(pm.a_coef()),
        ..p.clone()
    };
    let shift = (p.rde_l > 0 && p.rde_omega != 0.0).then_some(RdeShift {
        l: p.rde_l,
        omega_rot: p.rde_omega,
    });
    let grid = jsa_grid(&pump, &pm, shift, p.half_width, p.grid)?;

    let mut doc = CsvDocument::new(&["nu1", "nu2", "amplitude"]);
    doc.metadata = header("jsa", &resolved);
    let peaks: Vec<String> = peak_locations(&grid)
        .iter()
        .map(|(a, b)| format!("{}:{}", format_number(*a), format_number(*b)))
        .collect();
    doc.meta("peaks", peaks.join(";"));
    for (i, &a) in grid.axis1.iter().enumerate() {
        for (j, &b) in grid.axis2.iter().enumerate() {
            doc.push_row(vec![Some(a), Some(b), Some(grid.value(i, j))]);
        }
    }
    if let Some(path) = &p.svg {
        let title = match shift {
            Some(s) => format!("|JSA|, l = {}, Ω = {} rad/s", s.l, format_number(s.omega_rot)),
            None => "|JSA|".to_string(),
        };
        let figure = svg::heatmap(
            &title,
            "ν1 − ω̄ (rad/s)",
            "ν2 − ω̄ (rad/s)",
            &grid.axis1,
            &grid.axis2,
            &grid.values,
        );
        write_output(Some(path), &figure)?;
    }
    finish(doc, p.output.as_deref())?;
    Ok(EXIT_OK)
}

pub fn hom(p: &HomParams) -> Result<i32, CliError> {
    let cfg = HomConfig::symmetric(p.tau_c, p.l, p.omega, p.tau_span, p.points)?;
    let result = if p.noise_sigma != 0.0 {
        if p.method != MethodArg::Closed {
            return Err(CliError::usage("--noise-sigma requires --method closed"));
        }
        let noisy = synthesize_trace(&cfg, p.noise_sigma, p.seed)?;
        HomTrace {
            samples: noisy.samples,
            within_validity_window: false,
        }
    } else {
        let method = match p.method {
            MethodArg::Closed => Method::Closed,
            MethodArg::Numeric => Method::Numeric,
        };
        trace(&cfg, method)?
    };

    let mut doc = CsvDocument::new(&["tau_s", "p"]);
    doc.metadata = header("hom", p);
    let (observable, fwhm) = observability(p.l, p.omega, p.tau_c);
    doc.meta("beat_rad_s", format_number(beat_frequency(p.l, p.omega)));
    doc.meta("fwhm_rad_s", format_number(fwhm));
    doc.meta("beat_observable", observable.to_string());
    if let Ok(v) = visibility(&result) {
        doc.meta("visibility", format_number(v));
    }
    for &(t, prob) in &result.samples {
        doc.push_row(vec![Some(t), Some(prob)]);
    }
    if let Some(path) = &p.svg {
        let label = format!("l = {}, Ω = {} rad/s", p.l, format_number(p.omega));
        let figure = svg::line_plot(
            &format!("HOM coincidence, τc = {} s", format_number(p.tau_c)),
            "delay τ (s)",
            "coincidence probability",
            &[svg::Series::new(label, result.samples.clone())],
        );
        write_output(Some(path), &figure)?;
    }
    finish(doc, p.output.as_deref())?;
    Ok(EXIT_OK)
}

/// Splits a curve where unsolvable frequencies interrupt it.
fn segments(curve: &EmissionCurve, grid: &[f64]) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut k = 0;
    let mut current = Vec::new();
    for &f in grid {
        match curve.samples.get(k) {
            Some(&(fs, a)) if fs == f => {
                current.push((fs, a));
                k += 1;
            }
            _ => {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

pub fn phasematch(p: &PhasematchParams) -> Result<i32, CliError> {
    p.sellmeier.validate()?;
    let crystal = CrystalConfig {
        cut_angle_deg: p.cut_angle,
        pump_frequency_thz: p.pump_thz,
        sellmeier: p.sellmeier.clone(),
    };
    crystal.validate()?;
    let (curves, hit) = intersection(&crystal, (p.f_min, p.f_max), p.points)?;

    let mut doc = CsvDocument::new(&["freq_thz", "angle_o_deg", "angle_e_deg"]);
    doc.metadata = header("phasematch", p);
    if hit.exists {
        doc.meta("intersection", format_number(hit.frequency_thz));
        doc.meta("intersection_angle_deg", format_number(hit.outside_angle_deg));
    } else {
        doc.meta("intersection", "none");
    }
    doc.meta("solver_failures", curves.failed.to_string());
    let (mut io, mut ie) = (0, 0);
    let take = |samples: &[(f64, f64)], idx: &mut usize, f: f64| match samples.get(*idx) {
        Some(&(fs, a)) if fs == f => {
            *idx += 1;
            Some(a)
        }
        _ => None,
    };
    for &f in &curves.frequencies_thz {
        let o = take(&curves.ordinary.samples, &mut io, f);
        let e = take(&curves.extraordinary.samples, &mut ie, f);
        doc.push_row(vec![Some(f), o, e]);
    }
    if let Some(path) = &p.svg {
        let series = [
            svg::Series {
                label: "o signal".into(),
                segments: segments(&curves.ordinary, &curves.frequencies_thz),
            },
            svg::Series {
                label: "e signal".into(),
                segments: segments(&curves.extraordinary, &curves.frequencies_thz),
            },
        ];
        let figure = svg::line_plot(
            &format!("Outside angle, cut {}°", format_number(p.cut_angle)),
            "signal frequency (THz)",
            "outside angle (degrees)",
            &series,
        );
        write_output(Some(path), &figure)?;
    }
    finish(doc, p.output.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    tool: &'a str,
    input: String,
    samples: usize,
    #[serde(flatten)]
    result: EstimateResult,
    generated_unix: String,
}

/// Reads a trace written by `hom` (or any CSV with `tau_s` and `p` columns).
pub fn read_trace(path: &Path) -> Result<NoisyTrace, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let doc = CsvDocument::parse(&text)?;
    let (ti, pi) = match (doc.column("tau_s"), doc.column("p")) {
        (Some(t), Some(p)) => (t, p),
        _ => return Err(CliError::usage("trace CSV needs columns tau_s and p")),
    };
    let samples = doc
        .rows
        .iter()
        .enumerate()
        .map(|(n, row)| match (row[ti], row[pi]) {
            (Some(t), Some(p)) => Ok((t, p)),
            _ => Err(CliError::usage(format!("data row {} has an empty cell", n + 1))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NoisyTrace::new(samples)?)
}

pub fn estimate(p: &EstimateParams) -> Result<i32, CliError> {
    let input = p
        .input
        .as_deref()
        .ok_or_else(|| CliError::usage("estimate needs --input"))?;
    let trace = read_trace(input)?;
    let result = fit_trace(&trace)?;
    let report = EstimateReport {
        tool: TOOL,
        input: input.display().to_string(),
        samples: trace.samples.len(),
        result,
        generated_unix: timestamp(),
    };
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::failure(format!("cannot encode result: {e}")))?;
    json.push('\n');
    write_output(p.output.as_deref(), &json)?;
    if !result.converged {
        let _ = writeln!(
            std::io::stderr(),
            "rotdop: fit did not converge after {} iterations",
            result.iterations
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}
