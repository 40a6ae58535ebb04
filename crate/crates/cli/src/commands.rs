use polyball::berezin::{berezin_kernel, berezin_transform, minimal_dilation, moment_check, series_identity_residual, vn_check};
use polyball::beurling::{
    beurling_conditions, beurling_factorize, check_coinvariant, coinvariant_span, compression_model, inner_symbol,
    invariant_closure, lifted_defect, rank_one_verdict,
};
use polyball::fockmodel::apply_word;
use polyball::linalg::{hermitian_eigen, norm_on_columns, principal};
use polyball::polyball::{check_membership, check_pure};
use polyball::rewrite::{normalize, parse_word, reduce_monomial, Strategy};
use polyball::wold::{assemble, equivalence_check, wandering_data, wold_projections, WanderingData};
use polyball::{Error, PhaseMatrix, SubspaceHandle, Tolerances, TupleSpec};
use serde_json::{json, Value};

use crate::config::{self as cfg, lib_error, CliResult};
use crate::report::{subset_label, Report};

/// Records a numerical rejection as a failed check; other library errors
/// are configuration problems.
fn gate<T>(r: polyball::Result<T>, report: &mut Report, name: &str, pointer: &str) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Rejected(msg)) => {
            report.fail(name, msg);
            Ok(None)
        }
        Err(e) => Err(lib_error(pointer, e)),
    }
}

const R_VALUES: [f64; 3] = [0.3, 0.5, 0.7];

fn r_values(config: &Value) -> CliResult<Vec<f64>> {
    Ok(cfg::reals(config, "r_values")?.unwrap_or_else(|| R_VALUES.to_vec()))
}

fn nonincreasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + slack)
}

pub fn check(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let t = cfg::tuple(config, &lam)?;
    let rep = check_membership(&t, &tol);
    let purity = match cfg::usize_field(config, "max_power")? {
        Some(p) => check_pure(&t, &tol, p).map_err(|e| lib_error("/max_power", e))?,
        None => rep.purity.clone(),
    };

    let worst_row = rep.row_norms.iter().copied().fold(0.0, f64::max);
    report.at_most("row_contraction", worst_row, 1.0 + tol.residual);
    report.at_most("lambda_commuting", rep.commuting_residual, tol.residual);
    for p in &rep.positivity {
        report.holds(
            format!("positivity {}", subset_label(&p.subset)),
            Some(p.min_eigenvalue),
            p.min_eigenvalue >= -tol.eigen,
            format!("min eigenvalue {:.3e}", p.min_eigenvalue),
        );
    }
    let grid_min = rep.r_grid.iter().map(|g| g.min_eigenvalue).fold(f64::INFINITY, f64::min);
    report.holds(
        "r_grid_consistency",
        Some(grid_min),
        rep.r_grid_consistent,
        format!("min eigenvalue over r ∈ (0,1) grid {grid_min:.3e}"),
    );

    report.result("is_member", rep.is_member);
    report.result("is_pure", purity.is_pure);
    report.result("is_doubly", rep.is_doubly);
    report.result("is_row_contraction", rep.is_row_contraction);
    report.result("is_lambda_commuting", rep.is_lambda_commuting);
    report.result("row_norms", &rep.row_norms);
    report.result("commuting_residual", rep.commuting_residual);
    report.result("doubly_residual", rep.doubly_residual);
    report.result(
        "positivity",
        rep.positivity.iter().map(|p| json!({"subset": p.subset, "min_eigenvalue": p.min_eigenvalue})).collect::<Vec<_>>(),
    );
    report.result(
        "r_grid",
        rep.r_grid.iter().map(|g| json!({"r": g.r, "min_eigenvalue": g.min_eigenvalue})).collect::<Vec<_>>(),
    );
    report.result("purity_max_power", purity.max_power);
    report.result("purity_norms", &purity.norms);
    report.result("nilpotency_orders", &purity.nilpotency_orders);
    report.result("joint_nilpotency_order", t.joint_nilpotency_order());

    let defect = t.defect(1.0);
    report.spectra = hermitian_eigen(&defect).0;
    report.matrix("defect", &defect);
    Ok(())
}

pub fn rewrite(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let texts: Vec<&str> = config["words"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
    let mut words = Vec::new();
    for (idx, text) in texts.iter().enumerate() {
        words.push(parse_word(text, lam.n()).map_err(|e| lib_error(&format!("/words/{idx}"), e))?);
    }
    let creators = |w: &[polyball::Letter]| w.iter().filter(|l| !l.starred).count();
    let degree = match cfg::usize_field(config, "degree")? {
        Some(d) => d,
        None => words.iter().map(|w| creators(w)).max().unwrap_or(0),
    };
    let model = cfg::model(&lam, degree)?;

    let mut forms = Vec::new();
    for (text, w) in texts.iter().zip(&words) {
        let left = normalize(&lam, w, Strategy::Leftmost);
        let right = normalize(&lam, w, Strategy::Rightmost);
        report.holds(
            format!("confluence {text}"),
            None,
            left == right,
            if left == right { "leftmost and rightmost strategies agree" } else { "strategies disagree" },
        );

        let nf = reduce_monomial(&lam, w);
        let mismatches = model
            .basis()
            .iter()
            .filter(|chi| {
                let direct = apply_word(&lam, w, chi);
                let via = nf.as_ref().and_then(|m| apply_word(&lam, &m.letters(), chi).map(|(p, x)| (p * m.phase, x)));
                direct != via
            })
            .count();
        report.holds(
            format!("symbolic_faithfulness {text}"),
            Some(mismatches as f64),
            mismatches == 0,
            format!("{mismatches} of {} basis vectors disagree", model.dim()),
        );

        let inner = model.interior(creators(w));
        if inner.is_empty() {
            report.skip(format!("matrix_faithfulness {text}"), format!("interior of degree ≤ {degree} − {} is empty", creators(w)));
        } else {
            let built = model.build_matrix(&polyball::reduce_word(&lam, w)).map_err(|e| lib_error("/words", e))?.matrix;
            let r = norm_on_columns(&(built - model.word_matrix(w).matrix), &inner);
            report.at_most(format!("matrix_faithfulness {text}"), r, tol.residual);
        }
        let normal_form = match &nf {
            Some(m) => m.to_string(),
            None => "0".to_string(),
        };
        forms.push(json!({"word": text, "normal_form": normal_form}));
    }
    report.result("degree", degree);
    report.result("normal_forms", forms);
    Ok(())
}

pub fn vn(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let t = cfg::tuple(config, &lam)?;
    let f = cfg::polynomial(&config["polynomial"], "/polynomial", &lam)?;
    let degree = match (cfg::usize_field(config, "model_degree")?, t.joint_nilpotency_order()) {
        (Some(d), _) => d,
        (None, Some(d)) => d + f.creator_degree(),
        (None, None) => return Err(cfg::at("/model_degree", "tuple is not jointly nilpotent: give model_degree")),
    };
    if let Some(rep) = gate(vn_check(&t, &f, degree, &tol), report, "von_neumann", "/polynomial")? {
        report.holds(
            "von_neumann",
            Some(rep.rhs - rep.lhs),
            rep.pass,
            format!("‖p(T)‖ = {:.6} vs ‖p(S)‖ = {:.6} at degree {}", rep.lhs, rep.rhs, rep.model_degree),
        );
        report.result("lhs", rep.lhs);
        report.result("rhs", rep.rhs);
        report.result("pass", rep.pass);
        report.result("nilpotency_order", rep.nilpotency_order);
        report.result("model_degree", rep.model_degree);
    }
    report.result("polynomial", f.to_string());
    Ok(())
}

pub fn berezin(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let t = cfg::tuple(config, &lam)?;
    let degree = cfg::usize_field(config, "degree")?;
    let rep = check_membership(&t, &tol);
    let nilpotent = t.joint_nilpotency_order();

    if rep.is_member && rep.is_pure {
        if let Some(k) = gate(berezin_kernel(&t, &tol, degree), report, "kernel", "/degree")? {
            let bound = if nilpotent.is_some() { tol.residual } else { tol.residual + k.tail_bound };
            report.at_most("isometry", k.isometry_residual, bound);
            report.at_most("intertwining", k.intertwining_residual, tol.residual);
            report.result("defect_dim", k.defect_dim);
            report.result("kernel_degree", k.model.max_degree());
            report.result("tail_bound", k.tail_bound);
            report.matrix("kernel", &k.matrix);
        }
    } else {
        let why = if rep.is_member { "member is not pure" } else { "not a member" };
        report.skip("isometry", why);
        report.skip("intertwining", why);
    }
    match nilpotent {
        Some(d) if rep.is_member => report.at_most("series_identity", series_identity_residual(&t, d), tol.residual),
        Some(_) => report.skip("series_identity", "not a member"),
        None => report.skip("series_identity", "tuple is not jointly nilpotent"),
    }
    report.result("is_member", rep.is_member);
    report.result("is_pure", rep.is_pure);
    report.result("nilpotency_order", nilpotent);

    let Some(polys) = config.get("polynomials").and_then(Value::as_array) else { return Ok(()) };
    let rs = r_values(config)?;
    let mut transforms = Vec::new();
    for idx in 0..polys.len() {
        let ptr = format!("/polynomials/{idx}");
        let f = cfg::polynomial(&polys[idx], &ptr, &lam)?;
        let name = format!("transform {idx}");
        let deg = match (degree, nilpotent) {
            (Some(d), _) => d,
            (None, Some(d)) => d + f.creator_degree(),
            (None, None) => return Err(cfg::at("/degree", "tuple is not jointly nilpotent: give a truncation degree")),
        };
        let Some(tr) = gate(berezin_transform(&t, &f, &rs, deg, &tol), report, &name, &ptr)? else { continue };
        if tr.exact {
            report.at_most(name, tr.residual, tol.residual);
        } else {
            let ok = nonincreasing(&tr.residuals, tol.residual);
            report.holds(
                name,
                Some(tr.residual),
                ok,
                format!("residuals along r {:?}: {}", tr.r_values, if ok { "non-increasing" } else { "not monotone" }),
            );
        }
        report.matrix(format!("transform_{idx}"), &tr.matrix);
        transforms.push(json!({"polynomial": f.to_string(), "report": tr}));
    }
    report.result("transforms", transforms);
    Ok(())
}

pub fn dilate(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let t = cfg::tuple(config, &lam)?;
    let rep = check_membership(&t, &tol);
    report.result("is_member", rep.is_member);
    report.result("is_pure", rep.is_pure);

    if rep.is_member && rep.is_pure {
        let extra = cfg::usize_field(config, "extra")?.unwrap_or(t.k() + 1);
        if let Some(d) = gate(minimal_dilation(&t, &tol, extra), report, "dilation", "/extra")? {
            report.at_most("dilation_adjoint", d.adjoint_residual, tol.residual);
            if d.interior_dim == 0 {
                report.skip("dilation_minimality", format!("extra = {extra} leaves no interior; needs more than k"));
            } else {
                report.at_most("dilation_minimality", d.span_residual, tol.residual);
            }
            report.result("dilation_degree", d.kernel.model.max_degree());
            report.result("defect_dim", d.kernel.defect_dim);
            report.result("span_dim", d.span_dim);
            report.result("interior_dim", d.interior_dim);
            report.matrix("embedding", &d.kernel.matrix);
        }
    } else {
        report.skip("dilation", if rep.is_member { "member is not pure" } else { "not a member" });
    }

    if t.n().iter().any(|&a| a != 1) {
        report.skip("moments", "moment identities need n = (1,…,1)");
        return Ok(());
    }
    let bound = cfg::usize_field(config, "moment_bound")?.unwrap_or(3);
    let degree = cfg::usize_field(config, "degree")?.unwrap_or(12);
    let rs = r_values(config)?;
    if let Some(m) = gate(moment_check(&t, bound, &rs, degree, &tol), report, "moments", "/r_values")? {
        if m.exact {
            report.at_most("moments", m.max_residual, tol.eigen);
        } else {
            let trend: Vec<f64> = m.trend.iter().map(|x| x.max_residual).collect();
            let ok = nonincreasing(&trend, tol.residual);
            report.holds(
                "moments",
                Some(m.max_residual),
                ok,
                format!(
                    "max residual along r {:?}: {}",
                    m.trend.iter().map(|x| x.r).collect::<Vec<_>>(),
                    if ok { "non-increasing" } else { "not monotone" }
                ),
            );
        }
        report.result("moments", m);
    }
    Ok(())
}

fn spec_from(config: &Value, key: &str, lam: &PhaseMatrix) -> CliResult<TupleSpec> {
    let pieces = cfg::pieces(&config[key], &format!("/{key}"))?;
    TupleSpec::new(lam, pieces).map_err(|e| cfg::at(format!("/{key}"), e.to_string()))
}

fn wandering_json(w: &WanderingData) -> Value {
    w.entries
        .iter()
        .map(|e| {
            json!({
                "A": e.subset,
                "dim": e.dim,
                "kernel_residual": e.kernel_residual,
                "unitarity_residual": e.unitarity_residual,
            })
        })
        .collect()
}

pub fn wold(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let degree = cfg::usize_field(config, "degree")?.expect("schema requires degree");
    let spec = spec_from(config, "pieces", &lam)?;
    let t = assemble(&spec, degree).map_err(|e| lib_error("/pieces", e))?;
    report.result("dim", t.tuple.dim());

    if let Some(w) = gate(wold_projections(&t, &tol), report, "wold_projections", "/pieces")? {
        report.at_most("idempotent", w.idempotent_residual, tol.residual);
        report.at_most("orthogonal", w.orthogonality_residual, tol.residual);
        report.at_most("sum_to_identity", w.sum_residual, tol.residual);
        report.at_most("commute_with_tuple", w.commutation_residual, tol.residual);
        report.result("projection_power", w.power);
        report.result(
            "projection_ranks",
            w.subsets.iter().zip(&w.ranks).map(|(a, r)| json!({"A": a, "rank": r})).collect::<Vec<_>>(),
        );
        report.result("stabilization_residual", w.stabilization_residual);
    }
    let Some(data) = gate(wandering_data(&t, &tol), report, "wandering_data", "/pieces")? else { return Ok(()) };
    let planted = spec.planted_dims();
    let found = data.dims();
    for (a, dim) in &found {
        let want = planted.get(a).copied().unwrap_or(0);
        report.holds(
            format!("wandering_dim {}", subset_label(a)),
            Some(*dim as f64),
            *dim == want,
            format!("recovered {dim}, planted {want}"),
        );
    }
    for e in data.entries.iter().filter(|e| e.dim > 0) {
        report.at_most(format!("wandering_kernel {}", subset_label(&e.subset)), e.kernel_residual, tol.residual);
        if !e.unitaries.is_empty() {
            report.at_most(format!("unitarity {}", subset_label(&e.subset)), e.unitarity_residual, tol.residual);
        }
    }
    report.result("defect_rank", data.defect_rank);
    report.result("wandering", wandering_json(&data));

    if config.get("compare").is_some() {
        let other = spec_from(config, "compare", &lam)?;
        let u = assemble(&other, degree).map_err(|e| lib_error("/compare", e))?;
        if let Some(od) = gate(wandering_data(&u, &tol), report, "compare", "/compare")? {
            let eq = equivalence_check(&data, &od, 1e-8).map_err(|e| lib_error("/compare", e))?;
            report.result("compare", json!({"wandering": wandering_json(&od), "equivalence": eq}));
        }
    }
    Ok(())
}

fn interior_defect_spectrum(h: &SubspaceHandle, buffer: usize) -> Vec<f64> {
    let inner = h.interior(buffer);
    if inner.is_empty() {
        return Vec::new();
    }
    hermitian_eigen(&principal(&lifted_defect(h.model(), h.aux(), &h.projector()), &inner)).0
}

/// Conditions for an invariant subspace, then a factorization when they hold.
fn invariant_checks(h: &SubspaceHandle, buffer: usize, tol: &Tolerances, report: &mut Report, ptr: &str) -> CliResult<()> {
    if h.interior(buffer).is_empty() {
        report.skip("beurling_conditions", format!("interior of degree ≤ D − {buffer} is empty"));
        return Ok(());
    }
    let Some(c) = gate(beurling_conditions(h, buffer, tol), report, "invariance", ptr)? else { return Ok(()) };
    report.at_most("invariance", c.invariance_residual, tol.residual);
    report.holds(
        "defect_iff_doubly",
        Some(c.min_defect_eigenvalue),
        c.consistent,
        format!(
            "defect positive {} (min eigenvalue {:.3e}), doubly commuting {} (residual {:.3e})",
            c.defect_positive, c.min_defect_eigenvalue, c.doubly, c.doubly_residual
        ),
    );
    report.result("conditions", &c);
    report.spectra = interior_defect_spectrum(h, buffer);
    if !c.is_beurling {
        report.skip("factorization", "subspace is not of Beurling type");
        return Ok(());
    }
    let p = h.projector();
    if let Some(f) = gate(beurling_factorize(h.model(), h.aux(), &p, tol), report, "factorization", ptr)? {
        report.at_most("factorization", f.residual, 1e-8);
        report.at_most("multi_analytic", f.multi_analytic_residual, 1e-8);
        report.result("factorization", &f);
        report.matrix("factor", &f.a);
    }
    Ok(())
}

pub fn beurling(config: &Value, report: &mut Report) -> CliResult<()> {
    let lam = cfg::lambda(config)?;
    let tol = cfg::tolerances(config)?;
    let degree = cfg::usize_field(config, "degree")?.expect("schema requires degree");
    let aux = cfg::usize_field(config, "aux")?.unwrap_or(1);
    let model = cfg::model(&lam, degree)?;
    let rows = model.dim() * aux;
    report.result("model_dim", model.dim());

    if let Some(co) = config.get("coinvariant") {
        let v = cfg::vectors(&co["vectors"], "/coinvariant/vectors", rows)?;
        let h = SubspaceHandle::from_vectors(&model, aux, &v, tol.rank).map_err(|e| lib_error("/coinvariant/vectors", e))?;
        if gate(check_coinvariant(&h, tol.residual), report, "coinvariance", "/coinvariant")?.is_some() {
            report.holds("coinvariance", None, true, format!("dimension {}", h.dim()));
            if let Some((_, span)) = gate(coinvariant_span(&h, &tol), report, "coinvariant_span", "/coinvariant")? {
                report.holds(
                    "coinvariant_span",
                    Some(span.span_residual),
                    span.holds,
                    format!("span dim {} vs {}, residual {:.3e}", span.span_dim, span.target_dim, span.span_residual),
                );
                report.result("span", &span);
            }
            if let Some(c) = gate(compression_model(&h, &tol), report, "compression", "/coinvariant")? {
                report.holds("compression_member", None, c.is_member, format!("pure {}", c.is_pure));
                report.holds(
                    "compression_ranks",
                    Some(c.defect_rank as f64),
                    c.ranks_agree,
                    format!("defect rank {}, vacuum rank {}", c.defect_rank, c.vacuum_rank),
                );
                report.result("compression", &c);
            }
            if let Some(other) = co.get("compare") {
                let w = cfg::vectors(other, "/coinvariant/compare", rows)?;
                let h2 = SubspaceHandle::from_vectors(&model, aux, &w, tol.rank)
                    .map_err(|e| lib_error("/coinvariant/compare", e))?;
                if aux != 1 {
                    return Err(cfg::at("/aux", "comparison of compressions needs aux = 1"));
                }
                if gate(check_coinvariant(&h2, tol.residual), report, "compare_coinvariance", "/coinvariant/compare")?
                    .is_some()
                {
                    if let Some(v) = gate(rank_one_verdict(&h, &h2, &tol), report, "compare", "/coinvariant/compare")? {
                        report.result("compare", v);
                    }
                }
            }
        }
    }

    if let Some(inv) = config.get("invariant") {
        let v = cfg::vectors(&inv["vectors"], "/invariant/vectors", rows)?;
        let buffer = inv.get("buffer").and_then(Value::as_u64).unwrap_or(2) as usize;
        let q = if inv.get("close").and_then(Value::as_bool).unwrap_or(false) {
            invariant_closure(&model, aux, &v, tol.rank)
        } else {
            v
        };
        let h = SubspaceHandle::from_vectors(&model, aux, &q, tol.rank).map_err(|e| lib_error("/invariant/vectors", e))?;
        report.result("invariant_dim", h.dim());
        invariant_checks(&h, buffer, &tol, report, "/invariant")?;
    }

    if let Some(sym) = config.get("symbol") {
        let betas: Vec<&str> = sym["betas"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
        let mut words = Vec::new();
        for (idx, b) in betas.iter().enumerate() {
            words.push(cfg::multiword(b, &format!("/symbol/betas/{idx}"), &lam)?);
        }
        let thetas_json = sym["thetas"].as_array().map(Vec::as_slice).unwrap_or(&[]);
        let mut thetas = Vec::new();
        for (idx, m) in thetas_json.iter().enumerate() {
            thetas.push(cfg::matrix(m, &format!("/symbol/thetas/{idx}"))?);
        }
        let buffer = sym.get("buffer").and_then(Value::as_u64).unwrap_or(2) as usize;
        let psi = inner_symbol(&model, words, thetas).map_err(|e| lib_error("/symbol", e))?;
        let h = SubspaceHandle::from_range(&model, psi.out_dim, &psi.range_projection(), tol.rank).map_err(|e| lib_error("/symbol", e))?;
        report.result("symbol", json!({"in_dim": psi.in_dim, "out_dim": psi.out_dim, "range_dim": h.dim()}));
        invariant_checks(&h, buffer, &tol, report, "/symbol")?;
    }
    Ok(())
}
