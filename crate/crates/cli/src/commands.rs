use crate::{CheckArgs, CliError, GenArgs, NormsArgs, OracleArgs, SolveArgs, VerifyArgs};
use roughacs::acs::{
    beltrami_from_structure, gen_structure, integrability_residual, nijenhuis,
    structure_from_beltrami, BeltramiMatrix, GenKind, GenParams, ProductRoute, StructureField,
    VectorField,
};
use roughacs::dbar::{compare_charts, cr_residual, second_derivatives, solve_beltrami, DbarConfig};
use roughacs::grid::io::{self, AcsfKind};
use roughacs::grid::{Field, InterpConfig};
use roughacs::malgrange::{ContinuationConfig, HomotopyKind};
use roughacs::pipeline::{solve_chart, NormIndices};
use roughacs::spaces::{
    bmo_norm, lipschitz_seminorm, regularity_profile, sobolev_norm, sup_norm_report, zygmund_norm,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

type CmdResult = Result<(), CliError>;

fn read_beltrami(path: &Path) -> Result<BeltramiMatrix, CliError> {
    let (kind, field) = io::read(path)?;
    Ok(match kind {
        AcsfKind::Beltrami | AcsfKind::Field => BeltramiMatrix::new(field)?,
        AcsfKind::Structure => beltrami_from_structure(&StructureField::new(field)?)?,
        AcsfKind::MapDisplacement => {
            return Err(CliError::validation(format!(
                "{} holds a map, expected a structure",
                path.display()
            )))
        }
    })
}

/// Writes the report to `path`, or prints it when no path is given.
fn emit(report: &Value, path: Option<&PathBuf>, summary: &[String]) -> CmdResult {
    let text = serde_json::to_string_pretty(report).expect("reports serialise") + "\n";
    match path {
        Some(p) => {
            io::write_atomic(p, text.as_bytes())?;
            for line in summary {
                println!("{line}");
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn profile_json(u: &Field) -> Value {
    match regularity_profile(u) {
        Ok(p) => json!(p),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn check_positive(name: &str, v: f64) -> CmdResult {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

pub fn gen(a: &GenArgs) -> CmdResult {
    let kind: GenKind = a.kind.parse()?;
    let grid = roughacs::Grid::new(a.n, a.size, a.period)?;
    let params = GenParams {
        amp: a.amp,
        r: a.r,
        radius: (!a.no_cutoff).then_some(a.radius),
        mollify: a.mollify,
        modes: a.modes,
        ..GenParams::default()
    };
    let mut out = gen_structure(kind, &grid, &params, a.seed)?;
    let mut files = vec![a.out.display().to_string()];
    if let Some(f) = &out.f_true {
        let path = a.out.with_extension("ftrue.acsf");
        io::write_map(&path, f)?;
        out.metadata.ground_truth = Some(path.display().to_string());
        files.push(path.display().to_string());
    }
    io::write(&a.out, out.a.field(), AcsfKind::Beltrami)?;
    let meta = serde_json::to_vec_pretty(&out.metadata).expect("metadata serialises");
    let mut meta_path = a.out.as_os_str().to_owned();
    meta_path.push(".meta.json");
    io::write_atomic(Path::new(&meta_path), &meta)?;
    let report = json!({ "command": "gen", "config": a, "metadata": out.metadata, "files": files });
    emit(
        &report,
        a.report.as_ref(),
        &[format!(
            "wrote {} (sup |A| = {:.6})",
            a.out.display(),
            out.metadata.sup_norm
        )],
    )
}

pub fn check(a: &CheckArgs) -> CmdResult {
    check_positive("threshold", a.threshold)?;
    let b = read_beltrami(&a.input)?;
    let integ = integrability_residual(&b, a.s, a.p, ProductRoute::Auto)?;
    let j = structure_from_beltrami(&b)?;
    let grid = *b.grid();
    let d = 2 * grid.n();
    let mut nij: f64 = 0.0;
    for x in 0..d {
        for y in x + 1..d {
            let vx = VectorField::coordinate(grid, x)?;
            let vy = VectorField::coordinate(grid, y)?;
            nij = nij.max(
                nijenhuis(&j, &vx, &vy, ProductRoute::Auto)?
                    .field()
                    .sup_norm(),
            );
        }
    }
    let integrable = integ.sup <= a.threshold;
    let report = json!({
        "command": "check",
        "config": a,
        "integrable": integrable,
        "integrability": {
            "sup": integ.sup,
            "sobolev": integ.sobolev,
            "pairs": integ.pairs,
            "vacuous": integ.vacuous,
        },
        "nijenhuis_sup": nij,
        "norms": {
            "sup": b.sup_norm(),
            "zygmund": zygmund_norm(b.field(), a.r),
            "sobolev": sobolev_norm(b.field(), a.s, a.p)?,
            "bmo": bmo_norm(b.field()),
        },
        "regularity_profile": profile_json(b.field()),
    });
    emit(
        &report,
        a.report.as_ref(),
        &[format!(
            "integrable: {integrable} (residual {:.3e}, Nijenhuis {:.3e})",
            integ.sup, nij
        )],
    )
}

pub fn solve(a: &SolveArgs) -> CmdResult {
    check_positive("threshold", a.threshold)?;
    let homotopy: HomotopyKind = a.homotopy.parse()?;
    let cont = ContinuationConfig {
        t_steps: a.steps,
        newton_tol: a.newton_tol,
        newton_max_iter: a.newton_max_iter,
        homotopy,
        ..ContinuationConfig::default()
    };
    cont.validate()?;
    let dbar = DbarConfig::default();
    let b = read_beltrami(&a.input)?;
    let interp = InterpConfig::for_grid(b.grid());
    let idx = NormIndices {
        r: a.r,
        s: a.s,
        p: a.p,
    };
    std::fs::create_dir_all(&a.out).map_err(roughacs::AcsError::from)?;
    let config = json!({ "args": a, "continuation": cont, "dbar": dbar, "interp_tol": interp.tol });

    let sol = match solve_chart(&b, &cont, &dbar, &interp, idx) {
        Ok(s) => s,
        Err(e) => {
            if let Some(h) = &e.last_good {
                io::write_map(&a.out.join("H.partial.acsf"), h)?;
            }
            let report = json!({
                "command": "solve",
                "config": config,
                "status": "failed",
                "stage": e.stage,
                "error": e.error.to_string(),
                "trace": e.trace,
            });
            emit(&report, a.report.as_ref(), &[])?;
            let mut err = CliError::from(e.error);
            err.message = format!("{} stage: {}", e.stage, err.message);
            return Err(err);
        }
    };

    io::write_map(&a.out.join("H.acsf"), &sol.h)?;
    io::write(
        &a.out.join("B.acsf"),
        sol.extraction.b.field(),
        AcsfKind::Beltrami,
    )?;
    io::write_map(&a.out.join("G.acsf"), &sol.g.g)?;
    io::write_map(&a.out.join("F.acsf"), &sol.f)?;

    let df = sol.f.derivatives().dz;
    let d2f = second_derivatives(&sol.f)?;
    let last = sol.trace.steps.last();
    let holomorphic = sol.residual.relative_sup <= a.threshold;
    let report = json!({
        "command": "solve",
        "config": config,
        "status": "ok",
        "holomorphic": holomorphic,
        "trace": sol.trace,
        "div_b_residual": last.map(|s| s.div_b_residual),
        "mean_defect": last.map(|s| s.mean_defect),
        "b": {
            "origin": sol.extraction.b_origin,
            "zygmund": sol.extraction.zygmund,
            "sobolev": sol.extraction.sobolev,
            "divergence_sup": sol.extraction.div_residual,
            "integrability_sup": sol.extraction.integrability.sup,
            "integrability_sobolev": sol.extraction.integrability.sobolev,
        },
        "g": {
            "iterations": sol.g.iterations,
            "increments": sol.g.increments,
            "residual": sol.g.residual,
            "compatibility": sol.g.compatibility,
            "warning": sol.g.warning,
        },
        "f": sol.residual,
        "diagnostics": {
            "df_regularity": profile_json(&df),
            "d2f_bmo": bmo_norm(&d2f),
            "d2f_sup": d2f.sup_norm(),
        },
        "files": ["H.acsf", "B.acsf", "G.acsf", "F.acsf"],
    });
    emit(
        &report,
        a.report.as_ref(),
        &[format!(
            "chart written to {}; relative residual {:.3e}, holomorphic: {holomorphic}",
            a.out.display(),
            sol.residual.relative_sup
        )],
    )
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    check_positive("threshold", a.threshold)?;
    check_positive("compare-threshold", a.compare_threshold)?;
    let f = io::read_map(&a.coords)?;
    let b = read_beltrami(&a.structure)?;
    let cr = cr_residual(&f, &b, a.s, a.p, ProductRoute::Auto)?;
    let mut pass = cr.relative_sup <= a.threshold;
    let comparison = match &a.truth {
        Some(t) => {
            let truth = io::read_map(t)?;
            let radius = a.radius.map(|r| r * b.grid().period());
            let c = compare_charts(&truth, &f, radius)?;
            pass &= c.residual <= a.compare_threshold;
            Some(c)
        }
        None => None,
    };
    let report = json!({
        "command": "verify",
        "config": a,
        "pass": pass,
        "residual": cr,
        "comparison": comparison,
    });
    let mut summary = vec![format!("relative residual {:.3e}", cr.relative_sup)];
    if let Some(c) = &comparison {
        summary.push(format!("chart comparison {:.3e}", c.residual));
    }
    emit(&report, a.report.as_ref(), &summary)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::threshold("verification thresholds exceeded"))
    }
}

pub fn norms(a: &NormsArgs) -> CmdResult {
    let (kind, field) = io::read(&a.input)?;
    let m = field.grid().dim();
    let specs: Vec<String> = if a.specs.is_empty() {
        ["sup", "zygmund:0.5", "sobolev:1:2", "bmo"]
            .map(String::from)
            .to_vec()
    } else {
        a.specs.clone()
    };
    let num = |s: &str, spec: &str| -> Result<f64, CliError> {
        s.parse()
            .map_err(|_| CliError::validation(format!("bad number `{s}` in norm spec `{spec}`")))
    };
    let mut results = Vec::new();
    let mut summary = Vec::new();
    for spec in &specs {
        let parts: Vec<&str> = spec.split(':').collect();
        let entry = match parts.as_slice() {
            ["sup"] => json!({ "spec": spec, "report": sup_norm_report(&field) }),
            ["lipschitz"] => json!({ "spec": spec, "report": lipschitz_seminorm(&field) }),
            ["bmo"] => json!({ "spec": spec, "report": bmo_norm(&field) }),
            ["profile"] => json!({ "spec": spec, "report": profile_json(&field) }),
            ["zygmund", r] => {
                json!({ "spec": spec, "report": zygmund_norm(&field, num(r, spec)?) })
            }
            ["sobolev", s, p] => {
                let (s, p) = (num(s, spec)?, num(p, spec)?);
                let sp = s * p;
                summary.push(format!(
                    "{spec}: sp = {sp} (sp >= m = {m}: {}; sp > 2n = {m}: {})",
                    sp >= m as f64,
                    sp > m as f64
                ));
                json!({
                    "spec": spec,
                    "report": sobolev_norm(&field, s, p)?,
                    "sp": sp,
                    "sp_at_least_dimension": sp >= m as f64,
                    "sp_above_dimension": sp > m as f64,
                })
            }
            _ => return Err(CliError::validation(format!("unknown norm spec `{spec}`"))),
        };
        if let Some(v) = entry["report"]["value"].as_f64() {
            summary.push(format!("{spec}: {v:.6e}"));
        }
        results.push(entry);
    }
    let hypotheses = match (a.r, a.s, a.p) {
        (Some(r), Some(s), Some(p)) => Some(json!({
            "r_plus_s_above_one": r + s > 1.0,
            "sp_above_dimension": s * p > m as f64,
            "holds": r + s > 1.0 && s * p > m as f64,
        })),
        (None, None, None) => None,
        _ => {
            return Err(CliError::validation(
                "--r, --s and --p must be given together",
            ))
        }
    };
    let report = json!({
        "command": "norms",
        "config": a,
        "kind": format!("{kind:?}"),
        "real_dimension": m,
        "norms": results,
        "hypotheses": hypotheses,
    });
    emit(&report, a.report.as_ref(), &summary)
}

pub fn oracle(a: &OracleArgs) -> CmdResult {
    let mu = read_beltrami(&a.input)?;
    if mu.n() != 1 {
        return Err(CliError::validation("oracle-beltrami needs n = 1 data"));
    }
    let cfg = DbarConfig::default();
    let s = solve_beltrami(mu.field(), &cfg)?;
    io::write_map(&a.out, &s.f)?;
    let cr = cr_residual(&s.f, &mu, 1.0, 2.0, ProductRoute::Auto)?;
    let report = json!({
        "command": "oracle-beltrami",
        "config": { "args": a, "dbar": cfg },
        "terms": s.terms,
        "ratios": s.ratios,
        "residual": s.residual,
        "cr": cr,
    });
    emit(
        &report,
        a.report.as_ref(),
        &[format!(
            "wrote {} after {} Neumann terms",
            a.out.display(),
            s.terms
        )],
    )
}
