//! Seeded property sweep over the two reference models.

use polyball::berezin::{berezin_kernel, series_identity_residual, vn_check};
use polyball::beurling::{beurling_factorize, positive_degree_subspace, random_inner_symbol};
use polyball::fockmodel::apply_word;
use polyball::linalg::norm_on_columns;
use polyball::rewrite::{normalize, reduce_monomial, Strategy};
use polyball::sampling::{random_nilpotent_member, random_polynomial, random_word, stream};
use polyball::wold::{assemble, random_tuple_spec, wandering_data, wold_projections};
use polyball::{reduce_word, validate_lambda, LambdaEntry, Letter, PhaseMatrix, Tolerances, TruncatedModel};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{self as cfg, CliResult};
use crate::report::Report;

pub const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_SAMPLES: usize = 20;
const DEFAULT_DEGREE: usize = 4;

pub fn default_config() -> Value {
    json!({ "seed": DEFAULT_SEED })
}

fn references() -> [(&'static str, PhaseMatrix); 2] {
    let a = validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).expect("reference model");
    let b = validate_lambda(&[2, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4), LambdaEntry::new(1, 2, 2, 1, 1, 2)])
        .expect("reference model");
    [("cfg-a", a), ("cfg-b", b)]
}

fn letters(lam: &PhaseMatrix) -> Vec<(usize, usize)> {
    (1..=lam.k()).flat_map(|i| (1..=lam.n()[i - 1]).map(move |s| (i, s))).collect()
}

struct Ctx<'a> {
    seed: u64,
    samples: usize,
    degree: usize,
    tol: Tolerances,
    report: &'a mut Report,
}

pub fn run(config: &Value, report: &mut Report) -> CliResult<()> {
    let tol = cfg::tolerances(config)?;
    let mut ctx = Ctx {
        seed: cfg::u64_field(config, "seed")?.expect("schema requires seed"),
        samples: cfg::usize_field(config, "samples")?.unwrap_or(DEFAULT_SAMPLES),
        degree: cfg::usize_field(config, "degree")?.unwrap_or(DEFAULT_DEGREE),
        tol,
        report,
    };
    for (name, lam) in references() {
        let model = cfg::model(&lam, ctx.degree)?;
        confluence(&mut ctx, name, &lam, &model);
        interior_relations(&mut ctx, name, &lam, &model);
        berezin(&mut ctx, name, &lam);
        von_neumann(&mut ctx, name, &lam);
        beurling(&mut ctx, name, &model);
    }
    wold(&mut ctx);
    ctx.report.result("seed", ctx.seed);
    ctx.report.result("samples", ctx.samples);
    ctx.report.result("degree", ctx.degree);
    Ok(())
}

fn confluence(ctx: &mut Ctx, name: &str, lam: &PhaseMatrix, model: &TruncatedModel) {
    let mut rng = stream(ctx.seed, &format!("suite-confluence-{name}"));
    let (mut split, mut unfaithful, mut checked) = (0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.samples {
        let len = rng.random_range(0..=12);
        let w = random_word(&mut rng, lam.n(), len);
        if normalize(lam, &w, Strategy::Leftmost) != normalize(lam, &w, Strategy::Rightmost) {
            split += 1;
        }
        let nf = reduce_monomial(lam, &w);
        for chi in model.basis() {
            let via = nf.as_ref().and_then(|m| apply_word(lam, &m.letters(), chi).map(|(p, x)| (p * m.phase, x)));
            if apply_word(lam, &w, chi) != via {
                unfaithful += 1;
            }
        }
        let inner = model.interior(w.iter().filter(|l| !l.starred).count());
        if !inner.is_empty() {
            checked += 1;
            match model.build_matrix(&reduce_word(lam, &w)) {
                Ok(m) => worst = worst.max(norm_on_columns(&(m.matrix - model.word_matrix(&w).matrix), &inner)),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    let n = ctx.samples;
    ctx.report.holds(format!("{name} confluence"), Some(split as f64), split == 0, format!("{split} of {n} words split"));
    ctx.report.holds(
        format!("{name} symbolic_faithfulness"),
        Some(unfaithful as f64),
        unfaithful == 0,
        format!("{unfaithful} mismatched basis actions"),
    );
    if checked == 0 {
        ctx.report.skip(format!("{name} matrix_faithfulness"), "no sampled word has a nonempty interior");
    } else {
        ctx.report.at_most(format!("{name} matrix_faithfulness"), worst, ctx.tol.residual);
    }
}

fn interior_relations(ctx: &mut Ctx, name: &str, lam: &PhaseMatrix, model: &TruncatedModel) {
    let check = format!("{name} interior_relations");
    let inner = model.interior(2);
    if inner.is_empty() {
        ctx.report.skip(check, format!("interior of degree ≤ {} − 2 is empty", model.max_degree()));
        return;
    }
    let (mut count, mut bad) = (0usize, 0usize);
    for &b in &inner {
        let chi = &model.basis()[b];
        for (i, s) in letters(lam) {
            for (j, t) in letters(lam) {
                let mut pairs = Vec::new();
                if i != j {
                    let l = lam.lambda(i, j, s, t);
                    pairs.push((
                        apply_word(lam, &[Letter::s(i, s), Letter::s(j, t)], chi),
                        apply_word(lam, &[Letter::s(j, t), Letter::s(i, s)], chi).map(|(p, x)| (p * l, x)),
                    ));
                    pairs.push((
                        apply_word(lam, &[Letter::star(i, s), Letter::s(j, t)], chi),
                        apply_word(lam, &[Letter::s(j, t), Letter::star(i, s)], chi).map(|(p, x)| (p * l.conj(), x)),
                    ));
                } else {
                    let id = (s == t).then(|| (polyball::Phase::ONE, chi.clone()));
                    pairs.push((apply_word(lam, &[Letter::star(i, s), Letter::s(i, t)], chi), id));
                }
                for (x, y) in pairs {
                    count += 1;
                    if x != y {
                        bad += 1;
                    }
                }
            }
        }
    }
    ctx.report.holds(check, Some(bad as f64), bad == 0, format!("{bad} of {count} relation instances differ"));
}

fn berezin(ctx: &mut Ctx, name: &str, lam: &PhaseMatrix) {
    let mut rng = stream(ctx.seed, &format!("suite-berezin-{name}"));
    let (mut iso, mut inter, mut series): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..ctx.samples {
        let t = random_nilpotent_member(&mut rng, lam, 6, 3);
        match berezin_kernel(&t, &ctx.tol, None) {
            Ok(k) => {
                iso = iso.max(k.isometry_residual);
                inter = inter.max(k.intertwining_residual);
            }
            Err(e) => {
                ctx.report.fail(format!("{name} berezin_kernel"), e.to_string());
                return;
            }
        }
        let d = t.joint_nilpotency_order().expect("sampled members are nilpotent");
        series = series.max(series_identity_residual(&t, d));
    }
    ctx.report.at_most(format!("{name} berezin_isometry"), iso, ctx.tol.residual);
    ctx.report.at_most(format!("{name} berezin_intertwining"), inter, ctx.tol.residual);
    ctx.report.at_most(format!("{name} series_identity"), series, ctx.tol.residual);
}

fn von_neumann(ctx: &mut Ctx, name: &str, lam: &PhaseMatrix) {
    let mut rng = stream(ctx.seed, &format!("suite-vn-{name}"));
    let mut violations = 0usize;
    let mut slack = f64::INFINITY;
    for _ in 0..ctx.samples {
        let t = random_nilpotent_member(&mut rng, lam, 6, 3);
        let f = random_polynomial(&mut rng, lam.n(), 3, 4);
        let d = t.joint_nilpotency_order().expect("sampled members are nilpotent");
        match vn_check(&t, &f, d + 3, &ctx.tol) {
            Ok(rep) => {
                slack = slack.min(rep.rhs - rep.lhs);
                violations += usize::from(!rep.pass);
            }
            Err(e) => {
                ctx.report.fail(format!("{name} von_neumann"), e.to_string());
                return;
            }
        }
    }
    ctx.report.holds(
        format!("{name} von_neumann"),
        Some(slack),
        violations == 0,
        format!("{violations} violations, min slack {slack:.3e}"),
    );
}

fn beurling(ctx: &mut Ctx, name: &str, model: &TruncatedModel) {
    let check = format!("{name} beurling_factorization");
    if model.max_degree() < 2 {
        ctx.report.skip(check, format!("truncation degree {} < 2 leaves no interior for products", model.max_degree()));
        ctx.report.skip(format!("{name} beurling_counterexample"), "truncation degree < 2");
        return;
    }
    let mut rng = stream(ctx.seed, &format!("suite-beurling-{name}"));
    let (mut res, mut analytic): (f64, f64) = (0.0, 0.0);
    for _ in 0..ctx.samples {
        let psi = random_inner_symbol(&mut rng, model, 2.min(model.max_degree()), 2);
        match beurling_factorize(model, psi.out_dim, &psi.range_projection(), &ctx.tol) {
            Ok(f) => {
                res = res.max(f.residual);
                analytic = analytic.max(f.multi_analytic_residual);
            }
            Err(e) => {
                ctx.report.fail(check, format!("planted symbol rejected: {e}"));
                return;
            }
        }
    }
    ctx.report.at_most(check, res, 1e-8);
    ctx.report.at_most(format!("{name} multi_analytic"), analytic, 1e-8);
    let counter = positive_degree_subspace(model);
    let rejected = beurling_factorize(model, 1, &counter.projector(), &ctx.tol);
    ctx.report.holds(
        format!("{name} beurling_counterexample"),
        None,
        rejected.is_err(),
        match rejected {
            Err(e) => e.to_string(),
            Ok(_) => "factorization unexpectedly succeeded".to_string(),
        },
    );
}

fn wold(ctx: &mut Ctx) {
    let mut rng = stream(ctx.seed, "suite-wold");
    let (mut mismatched, mut worst): (usize, f64) = (0, 0.0);
    for _ in 0..ctx.samples {
        let (spec, d) = random_tuple_spec(&mut rng, 80);
        let outcome = assemble(&spec, d).and_then(|t| Ok((wold_projections(&t, &ctx.tol)?, wandering_data(&t, &ctx.tol)?)));
        match outcome {
            Ok((w, data)) => {
                worst = [w.idempotent_residual, w.orthogonality_residual, w.sum_residual, w.commutation_residual]
                    .into_iter()
                    .fold(worst, f64::max);
                mismatched += usize::from(data.dims() != spec.planted_dims());
            }
            Err(e) => {
                ctx.report.fail("wold_round_trip", e.to_string());
                return;
            }
        }
    }
    ctx.report.at_most("wold_projections", worst, ctx.tol.residual);
    ctx.report.holds(
        "wold_round_trip",
        Some(mismatched as f64),
        mismatched == 0,
        format!("{mismatched} of {} specs recover different wandering dimensions", ctx.samples),
    );
}
