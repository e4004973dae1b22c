use std::path::Path;

use anyhow::{Context, Result};

use gpe_core::arith::count_t_usize;
use gpe_core::classify::{
    admissible_embeddings, automorphism_family, best_over_family, build_normal_form,
    EMPTY_LIST_CAVEAT,
};
use gpe_core::crframe::{check_frame_invariants, frame_field, frame_labels};
use gpe_core::dangelo::{h_map as build_h, norm_identity_exact, sample_gaussian_rational};
use gpe_core::geometry::{sample_boundary, sample_interior_unbounded};
use gpe_core::holomap::{self, block_structure, BoundaryDifferential, DEFAULT_HIT_THRESHOLD};
use gpe_core::{BlockSignature, ClassificationProblem, PolyMap};

use crate::report::{AdmissibleEntry, Check, ConfigEcho, Report, TermRow};
use crate::Common;

/// Structural zeros in frame decompositions.
const STRUCTURE_TOL: f64 = 1e-9;
const CR_TOL: f64 = 1e-10;
const FRAME_TOL: f64 = 1e-10;
const FD_REL_TOL: f64 = 1e-6;
/// Points used for the finite-difference and pullback checks.
const SLOW_SAMPLES: usize = 100;

fn echo(c: &Common) -> ConfigEcho {
    ConfigEcho {
        samples: c.samples,
        seed: c.seed,
        tol: c.tol,
        sp_margin: c.sp_margin,
        ..ConfigEcho::default()
    }
}

fn display(p: &Path) -> Option<String> {
    Some(p.display().to_string())
}

/// Properness, CR residual and theta pullback checks for one map.
fn map_checks(c: &Common, map: &PolyMap, prefix: &str, out: &mut Vec<Check>) -> Result<bool> {
    let proper = holomap::verify_proper(map, c.samples, c.samples, c.seed, c.tol)?;
    out.push(Check::bounded(
        format!("{prefix}boundary_to_boundary"),
        proper.max_boundary_residual,
        c.tol,
    ));
    out.push(Check::bounded(
        format!("{prefix}interior_to_interior"),
        1.0 - proper.interior_pass_fraction,
        0.0,
    ));
    if proper.boundary_pass_fraction < 1.0 {
        return Ok(false);
    }
    let points = sample_boundary(map.source(), c.samples.min(SLOW_SAMPLES), c.seed, c.sp_margin)?;
    let diff = BoundaryDifferential::new(map);
    let mut cr: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut min_f = f64::INFINITY;
    for pt in &points {
        for label in frame_labels(map.source()) {
            let v = frame_field(map.source(), pt, label)?;
            cr = cr.max(diff.pushforward(pt, &v)?.2);
        }
        let pull = diff.theta_pullback_factor(pt)?;
        residual = residual.max(pull.residual);
        min_f = min_f.min(pull.f);
    }
    out.push(Check::bounded(format!("{prefix}cr_residual"), cr, CR_TOL));
    let mut pull = Check::bounded(format!("{prefix}theta_pullback"), residual, STRUCTURE_TOL);
    pull.pass &= min_f > 0.0;
    out.push(pull);
    out.push(Check::info(format!("{prefix}theta_pullback_min_f"), min_f));
    Ok(true)
}

pub fn classify(c: &Common, source: &Path, target: &Path, emit: Option<&Path>) -> Result<Report> {
    let src = BlockSignature::load(source)?;
    let tgt = BlockSignature::load(target)?;
    let problem = ClassificationProblem::new(src, tgt)?;
    let list = admissible_embeddings(&problem)?;
    let mut report = Report::new(
        "classify",
        ConfigEcho {
            source: display(source),
            target: display(target),
            ..echo(c)
        },
    );
    if let Some(dir) = emit {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut entries = Vec::with_capacity(list.len());
    for (k, a) in list.iter().enumerate() {
        let label = format!("#{}", k + 1);
        let nf = build_normal_form(&problem, a)?;
        let prefix = format!("{label} ");
        if map_checks(c, &nf, &prefix, &mut report.checks)? {
            let points = sample_boundary(problem.source(), c.samples.min(SLOW_SAMPLES), c.seed, c.sp_margin)?;
            let st = block_structure(&nf, &points, DEFAULT_HIT_THRESHOLD)?;
            let assign = a.assignment();
            let mut leak = st.max_e_component.max(st.radial_w_leak);
            for (i, row) in st.w_magnitudes.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    if l != assign[i] {
                        leak = leak.max(*v);
                    }
                }
            }
            for (i, row) in st.radial_magnitudes.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    if l != assign[i] {
                        leak = leak.max(*v);
                    }
                }
            }
            let mut check = Check::bounded(format!("{prefix}block_structure"), leak, STRUCTURE_TOL);
            check.pass &= st.matches_assignment(problem.source(), &assign, STRUCTURE_TOL);
            report.checks.push(check);
        }
        let normal_form_file = match emit {
            Some(dir) => {
                let path = dir.join(format!("normal_form_{}.toml", k + 1));
                std::fs::write(&path, nf.to_toml_string())
                    .with_context(|| format!("writing {}", path.display()))?;
                Some(path.display().to_string())
            }
            None => None,
        };
        entries.push(AdmissibleEntry {
            label,
            sigma: a.full_sigma().iter().map(|i| i + 1).collect(),
            multipliers: a.multipliers.clone(),
            normal_form_file,
        });
    }
    if entries.is_empty() {
        report.caveat = Some(EMPTY_LIST_CAVEAT.to_string());
    }
    report.admissible = Some(entries);
    Ok(report)
}

pub fn verify_proper(c: &Common, map_path: &Path) -> Result<Report> {
    let map = PolyMap::load(map_path)?;
    let mut report = Report::new(
        "verify-proper",
        ConfigEcho {
            map: display(map_path),
            ..echo(c)
        },
    );
    map_checks(c, &map, "", &mut report.checks)?;
    Ok(report)
}

pub fn verify_frame(c: &Common, sig_path: &Path) -> Result<Report> {
    let sig = BlockSignature::load(sig_path)?;
    let points = sample_boundary(&sig, c.samples, c.seed, c.sp_margin)?;
    let r = check_frame_invariants(&sig, &points, SLOW_SAMPLES, c.seed)?;
    let mut report = Report::new(
        "verify-frame",
        ConfigEcho {
            sig: display(sig_path),
            ..echo(c)
        },
    );
    report.checks = vec![
        Check::bounded("theta_annihilation", r.theta_annihilation, FRAME_TOL),
        Check::bounded("kernel_relation", r.kernel_relation, FRAME_TOL),
        Check::bounded("levi_zero_entries", r.levi_zero_entries, FRAME_TOL),
        Check::bounded("q_idempotence", r.q_idempotence, FRAME_TOL),
        Check::bounded("q_levi_orthogonal_to_e", r.q_orthogonality, FRAME_TOL),
        Check::bounded("frame_reconstruction", r.reconstruction, FRAME_TOL),
        Check::bounded("levi_e_diagonal_fd_relative", r.e_diagonal_fd_relative, FD_REL_TOL),
        Check::bounded("levi_w_diagonal_fd_vs_bracket", r.w_diagonal_bracket_gap, FD_REL_TOL),
        Check::info("levi_w_diagonal_fd_vs_table", r.w_diagonal_table_gap),
    ];
    if r.w_diagonal_table_gap > FD_REL_TOL {
        report.notes.push(
            "the closed-form W-diagonal Levi entries differ from the finite-difference value; \
             the bracket form 2a|w|^(2a-2)(delta + (a-1) conj(w^l) w^m / |w|^2) agrees"
                .into(),
        );
    }
    Ok(report)
}

fn monomial(exponents: &[u32]) -> String {
    let parts: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("z{}", i + 1) } else { format!("z{}^{e}", i + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn h_map(c: &Common, dim: usize, degree: u32) -> Result<Report> {
    let h = build_h(dim, degree)?;
    let mut report = Report::new(
        "h-map",
        ConfigEcho {
            dim: Some(dim),
            degree: Some(degree),
            ..echo(c)
        },
    );
    report.terms = Some(
        h.terms()
            .iter()
            .map(|(coeff, p)| TermRow {
                coefficient: coeff.to_string(),
                monomial: monomial(p.entries()),
            })
            .collect(),
    );
    let expected = count_t_usize(degree, dim as u32)?;
    report.checks.push(Check::bounded(
        "dimension_formula",
        (h.target_dim() as f64 - expected as f64).abs(),
        0.0,
    ));
    let points = sample_gaussian_rational(dim, c.samples.min(SLOW_SAMPLES), c.seed);
    let mut failures = 0usize;
    for z in &points {
        if !norm_identity_exact(dim, degree, z)? {
            failures += 1;
        }
    }
    report
        .checks
        .push(Check::bounded("exact_norm_identity_failures", failures as f64, 0.0));
    Ok(report)
}

pub fn equivalence(c: &Common, map1: &Path, map2: &Path) -> Result<Report> {
    let m1 = PolyMap::load(map1)?;
    let m2 = PolyMap::load(map2)?;
    let samples = sample_interior_unbounded(m1.source(), c.samples.min(SLOW_SAMPLES), c.seed, c.sp_margin)?;
    let family = automorphism_family(m2.target(), c.seed);
    let best = best_over_family(&m1, &m2, &family, &samples, c.tol)?;
    let mut report = Report::new(
        "equivalence",
        ConfigEcho {
            map: display(map1),
            map2: display(map2),
            ..echo(c)
        },
    );
    report.notes.push(format!(
        "searched {} post-compositions (identity, affine, real translations, block unitaries)",
        family.len()
    ));
    report
        .checks
        .push(Check::bounded("equivalent_at_samples", best.max_deviation, c.tol));
    Ok(report)
}
