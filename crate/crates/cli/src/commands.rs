//! Subcommand implementations. Each returns the artifact text and an exit code.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{generator, inner_product, load_mesh, parse_diagonal, parse_p_range, parse_scale, EigArgs, Format, InterpArgs, MeshArgs, VerifyArgs};
use pnedelec::eigen::{analytic_cube_spectrum, maxwell_spectrum, spectrum_csv, SpectrumOptions, SpectrumReport};
use pnedelec::interp::operator::set_fault_injection;
use pnedelec::interp::study::{error_table_csv, interp_error_study, loglog_slope, AnalyticField, ErrorRow};
use pnedelec::localspace::{dim_p, dim_w1, dim_w2};
use pnedelec::meshasm::assembly::{diagonal_tensor, identity_tensor};
use pnedelec::meshasm::{Mesh, MaterialSpec};
use pnedelec::suite::{run_suite, SuiteOptions, SuiteReport};

pub struct Outcome {
    pub artifact: String,
    pub summary: Vec<String>,
    pub code: i32,
}

fn with_config_json(config: &Value, body: Value) -> String {
    let mut doc = json!({ "config": config });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

fn with_config_csv(config: &Value, table: String) -> String {
    format!("# config: {config}\n{table}")
}

fn format_or(f: Option<Format>, default: Format) -> Result<Format> {
    match f.unwrap_or(default) {
        Format::Text => bail!("--format text is only available for the mesh subcommand"),
        f => Ok(f),
    }
}

#[derive(Serialize)]
struct VerifyEntry<'a> {
    p: usize,
    dim_w1: usize,
    dim_w2: usize,
    dim_scalar: usize,
    passed: bool,
    failures: Vec<&'a str>,
    checks: &'a [pnedelec::derham::Check],
}

pub fn verify(args: &VerifyArgs, config: &Value) -> Result<Outcome> {
    let ps = parse_p_range(&args.p)?;
    let format = format_or(args.common.format, Format::Json)?;
    set_fault_injection(args.inject_fault);
    let opts = SuiteOptions {
        samples: args.samples,
        seed: args.common.seed,
    };
    let reports: Vec<SuiteReport> = ps.par_iter().map(|&p| run_suite(p, &opts)).collect();
    set_fault_injection(false);
    let entries: Vec<VerifyEntry> = reports
        .iter()
        .map(|r| {
            let pi = r.p as i32;
            VerifyEntry {
                p: r.p,
                dim_w1: dim_w1(pi),
                dim_w2: dim_w2(pi),
                dim_scalar: dim_p(3, pi + 1),
                passed: r.passed,
                failures: r.failures(),
                checks: &r.checks,
            }
        })
        .collect();
    let passed = reports.iter().all(|r| r.passed);
    let artifact = match format {
        Format::Json => with_config_json(config, json!({ "passed": passed, "results": entries })),
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["p", "check", "holds"])?;
            for r in &reports {
                for c in &r.checks {
                    w.write_record([r.p.to_string(), c.name.clone(), c.holds.to_string()])?;
                }
            }
            with_config_csv(config, String::from_utf8(w.into_inner()?)?)
        }
    };
    let mut summary: Vec<String> = entries
        .iter()
        .map(|e| {
            let status = if e.passed { "ok".to_string() } else { format!("FAILED: {}", e.failures.join(", ")) };
            format!("p={} dimension W1={} W2={} P={} checks={} {}", e.p, e.dim_w1, e.dim_w2, e.dim_scalar, e.checks.len(), status)
        })
        .collect();
    let failing: Vec<String> = entries.iter().flat_map(|e| e.failures.iter().map(move |f| format!("p{}:{f}", e.p))).collect();
    if !failing.is_empty() {
        summary.push(format!("failed checks: {}", failing.join(" ")));
    }
    Ok(Outcome {
        artifact,
        summary,
        code: if passed { 0 } else { 1 },
    })
}

pub fn interp(args: &InterpArgs, config: &Value) -> Result<Outcome> {
    let ps = parse_p_range(&args.p)?;
    let format = format_or(args.common.format, Format::Csv)?;
    let field = AnalyticField::from_name(&args.field).ok_or_else(|| anyhow::anyhow!("unknown field `{}`; expected grad_sine, curl_sine or exp_cycle", args.field))?;
    let ip = inner_product(args.ip, args.ip_eps)?;
    let mesh = load_mesh(&args.source, "reference")?.mesh;
    let rows: Vec<Vec<ErrorRow>> = ps.par_iter().map(|&p| interp_error_study(&mesh, field, &[p], &ip)).collect::<Result<_, _>>()?;
    let rows: Vec<ErrorRow> = rows.into_iter().flatten().collect();
    let slope = (rows.len() >= 2).then(|| loglog_slope(&rows));
    let artifact = match format {
        Format::Json => with_config_json(config, json!({ "field": field.name(), "loglog_slope": slope, "rows": rows })),
        _ => with_config_csv(config, error_table_csv(&rows)),
    };
    let mut summary: Vec<String> = rows.iter().map(|r| format!("p={} dofs={} L2={:.6e} Hcurl={:.6e}", r.p, r.dofs, r.l2_error, r.hcurl_error)).collect();
    if let Some(s) = slope {
        summary.push(format!("log-log slope {s:.3}"));
    }
    Ok(Outcome { artifact, summary, code: 0 })
}

fn material(args: &EigArgs) -> Result<(MaterialSpec, bool)> {
    let eps = args.eps.as_deref().map(parse_diagonal).transpose()?;
    let mu = args.mu.as_deref().map(parse_diagonal).transpose()?;
    let isotropic = eps.is_none() && mu.is_none();
    let spec = MaterialSpec::uniform(eps.map_or_else(identity_tensor, diagonal_tensor), mu.map_or_else(identity_tensor, diagonal_tensor))?;
    Ok((spec, isotropic))
}

pub fn eig(args: &EigArgs, config: &Value) -> Result<Outcome> {
    let ps = parse_p_range(&args.p)?;
    let format = format_or(args.common.format, Format::Csv)?;
    let loaded = load_mesh(&args.source, "cube6")?;
    let (spec, isotropic) = material(args)?;
    let bc = args.bc.into();
    let analytic = match (loaded.cube_side, isotropic, bc) {
        (Some(side), true, pnedelec::meshasm::BoundaryCondition::Dirichlet) => Some(analytic_cube_spectrum(side, 4096)),
        _ => None,
    };
    let opts = SpectrumOptions {
        analytic,
        window: args.window,
        ..Default::default()
    };
    let reports: Vec<SpectrumReport> = ps.par_iter().map(|&p| maxwell_spectrum(&loaded.mesh, p, &spec, bc, &opts)).collect::<Result<_, _>>()?;
    let artifact = match format {
        Format::Json => with_config_json(config, json!({ "reports": reports })),
        _ => with_config_csv(config, spectrum_csv(&reports)),
    };
    let summary = reports
        .iter()
        .map(|r| {
            let first = r.first_physical().map_or("none".to_string(), |l| format!("{l:.8}"));
            format!("p={} dofs={} kernel={} (gradients {}) spurious={} first={}", r.p, r.dofs, r.kernel_count, r.expected_kernel, r.spurious_count, first)
        })
        .collect();
    Ok(Outcome { artifact, summary, code: 0 })
}

#[derive(Serialize)]
struct MeshJson {
    vertices: Vec<Vec<String>>,
    tets: Vec<[usize; 4]>,
    regions: Vec<usize>,
    num_edges: usize,
    num_faces: usize,
}

pub fn mesh(args: &MeshArgs, config: &Value) -> Result<Outcome> {
    let mesh = match (&args.gen, &args.input) {
        (Some(g), None) => Mesh::generate(generator(g, args.n)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading `{}`: {e}", path.display()))?;
            Mesh::from_text(&text)?
        }
        _ => bail!("give exactly one of --gen or --input"),
    };
    let mesh = match args.scale.as_deref().map(parse_scale).transpose()? {
        Some(s) => mesh.scaled(&s),
        None => mesh,
    };
    let artifact = match args.common.format.unwrap_or(Format::Text) {
        Format::Text => format!("# config: {config}\n{}", mesh.to_text()),
        Format::Json => with_config_json(
            config,
            json!({ "mesh": MeshJson {
                vertices: mesh.vertices.iter().map(|v| v.iter().map(|x| x.to_exact_string()).collect()).collect(),
                tets: mesh.tets.clone(),
                regions: mesh.regions.clone(),
                num_edges: mesh.edges.len(),
                num_faces: mesh.faces.len(),
            } }),
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["tet", "v0", "v1", "v2", "v3", "region"])?;
            for (t, (tet, r)) in mesh.tets.iter().zip(&mesh.regions).enumerate() {
                w.write_record([t, tet[0], tet[1], tet[2], tet[3], *r].map(|x| x.to_string()))?;
            }
            with_config_csv(config, String::from_utf8(w.into_inner()?)?)
        }
    };
    let summary = vec![format!(
        "vertices={} edges={} faces={} tets={}",
        mesh.num_vertices(),
        mesh.edges.len(),
        mesh.faces.len(),
        mesh.num_tets()
    )];
    Ok(Outcome { artifact, summary, code: 0 })
}
