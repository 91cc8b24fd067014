//! Named verification checks behind the `verify-lemma` and `suite`
//! commands. Each check id maps to one library verifier (or a trial matrix
//! over one) and reports a uniform list of link results.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use fqgeom::census::{
    hinge_upper_bound, mainlm_embedding, nu_square_bound_planar, nu_square_bound_product,
    power_sum_check, theorem_chain_report,
};
use fqgeom::motions::MotionSweep;
use fqgeom::pointset::{hinge_counts, hinge_counts_direct, isotropic_report, PointSet};
use fqgeom::specgraph::{
    build_er_graph, build_reflection_graph, mixing_trials, NdlGraph, ParameterCheck,
};
use fqgeom::{Caps, Error, LinkCheck, PrimeField};

use crate::fixtures::{full_grid, random_plane_product, seeded_rng};

/// Identifiers accepted by `verify-lemma` and suite cells.
pub const CHECK_IDS: &[&str] = &[
    "2.1",
    "2.2",
    "2.3",
    "3.1",
    "4.1",
    "4.2",
    "4.3",
    "remark-4.4",
    "eq-2-chain",
];

/// Parameters of one check run; unused fields are ignored by checks that
/// do not need them. Doubles as the suite cell schema.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lam: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_mult: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub override_lambda_sq: Option<u64>,
}

impl CheckParams {
    pub fn named(check: &str) -> Self {
        CheckParams {
            check: check.to_string(),
            ..Default::default()
        }
    }

    fn q(&self) -> Result<u64, Error> {
        self.q
            .ok_or_else(|| Error::invalid(format!("check {} needs --q", self.check)))
    }

    fn field(&self) -> Result<PrimeField, Error> {
        PrimeField::new(self.q()?)
    }

    /// The point set to run on: an explicit `input` file wins, otherwise
    /// the full plane grid over `F_q`.
    fn point_set(&self) -> Result<PointSet, Error> {
        match &self.input {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::invalid(format!("cannot read {path}: {e}"))
                })?;
                fqgeom::pointset::parse_pointset(&text)
            }
            None => Ok(full_grid(self.field()?)),
        }
    }
}

/// Outcome of one check: link rows plus check-specific detail.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub links: Vec<LinkCheck>,
    pub detail: Value,
    pub pass: bool,
}

fn plain_link(id: &str, lhs: String, rhs: String, pass: bool) -> LinkCheck {
    LinkCheck {
        id: id.to_string(),
        lhs,
        rhs,
        pass,
        advisory: false,
        ratio_float: None,
        note: None,
    }
}

fn float_link(id: &str, lhs: f64, rhs: f64, pass: bool) -> LinkCheck {
    LinkCheck {
        id: id.to_string(),
        lhs: format!("{lhs:.9}"),
        rhs: format!("{rhs:.9}"),
        pass,
        advisory: false,
        ratio_float: if rhs != 0.0 { Some(lhs / rhs) } else { None },
        note: Some("float, tol=1e-6".into()),
    }
}

fn parameter_links(prefix: &str, check: &ParameterCheck) -> Vec<LinkCheck> {
    vec![
        plain_link(
            &format!("{prefix}-order"),
            check.measured_n.to_string(),
            check.declared_n.to_string(),
            check.measured_n == check.declared_n,
        ),
        plain_link(
            &format!("{prefix}-degree"),
            format!("{}..{}", check.degree_min, check.degree_max),
            check.declared_degree.to_string(),
            check.degree_min == check.degree_max && check.degree_min == check.declared_degree,
        ),
        float_link(
            &format!("{prefix}-lambda2"),
            check.lambda2,
            check.declared_lambda + 1e-6,
            check.lambda2 <= check.declared_lambda + 1e-6,
        ),
    ]
}

fn apply_override(graph: &mut NdlGraph, params: &CheckParams) {
    if let Some(forced) = params.override_lambda_sq {
        graph.declared_lambda_sq = forced as u128;
    }
}

pub fn run_check(params: &CheckParams, caps: &Caps) -> Result<CheckReport, Error> {
    let links;
    let mut detail = json!({});
    match params.check.as_str() {
        "2.2" => {
            let field = params.field()?;
            let m = params
                .m
                .ok_or_else(|| Error::invalid("check 2.2 needs --m"))?;
            let mut er = build_er_graph(field, m, caps)?;
            apply_override(&mut er.graph, params);
            let check = er.graph.check_parameters(caps)?;
            links = parameter_links("er", &check);
            detail = json!({
                "declared_lambda_sq": er.graph.declared_lambda_sq.to_string(),
            });
        }
        "4.3" => {
            let field = params.field()?;
            let lams: Vec<u64> = match params.lam {
                Some(l) => vec![l],
                None => (1..field.q()).collect(),
            };
            let mut all = Vec::new();
            let mut branch = None;
            for lam in lams {
                let mut rg = build_reflection_graph(field, lam, caps)?;
                apply_override(&mut rg.graph, params);
                branch = Some(format!("{:?}", rg.branch));
                let check = rg.graph.check_parameters(caps)?;
                for mut link in parameter_links(&format!("reflection-lam{lam}"), &check) {
                    link.note
                        .get_or_insert_with(|| format!("branch {:?}", rg.branch));
                    all.push(link);
                }
            }
            links = all;
            detail = json!({ "branch": branch });
        }
        "2.1" => {
            let field = params.field()?;
            let m = params.m.unwrap_or(3);
            let trials = params.trials.unwrap_or(200);
            let seed = params.seed.unwrap_or(0x6d69780a);
            let max_mult = params.max_mult.unwrap_or(3);
            let mut er = build_er_graph(field, m, caps)?;
            apply_override(&mut er.graph, params);
            let check = er.graph.check_parameters(caps)?;
            let mut all = parameter_links("er", &check);
            let t = mixing_trials(&er.graph, trials, max_mult, seed)?;
            all.push(plain_link(
                "mixing-violations",
                t.violations.to_string(),
                "0".into(),
                t.violations == 0,
            ));
            if let Some(lam) = params.lam {
                let mut rg = build_reflection_graph(field, lam, caps)?;
                apply_override(&mut rg.graph, params);
                let rcheck = rg.graph.check_parameters(caps)?;
                all.extend(parameter_links("reflection", &rcheck));
                let t = mixing_trials(&rg.graph, trials, max_mult, seed ^ 1)?;
                all.push(plain_link(
                    "reflection-mixing-violations",
                    t.violations.to_string(),
                    "0".into(),
                    t.violations == 0,
                ));
            }
            links = all;
            detail = json!({ "trials": trials, "seed": seed, "max_mult": max_mult });
        }
        "2.3" => {
            use rand::Rng;
            let trials = params.trials.unwrap_or(1000);
            let seed = params.seed.unwrap_or(0x70736d);
            let mut rng = seeded_rng(seed);
            let mut violations = 0u32;
            let mut equalities = 0u32;
            for _ in 0..trials {
                let len = rng.random_range(1..=50usize);
                let profile: Vec<u64> = (0..len).map(|_| rng.random_range(0..40)).collect();
                let n = rng.random_range(2..=5);
                let c = power_sum_check(&profile, n)?;
                if !c.pass {
                    violations += 1;
                }
                if c.equality {
                    equalities += 1;
                }
            }
            let mut all = vec![plain_link(
                "power-sum-random-trials",
                violations.to_string(),
                "0".into(),
                violations == 0,
            )];
            // constant profiles must sit exactly on the bound
            let constant_ok = (1..=5u64).all(|v| {
                power_sum_check(&[v; 12], 4)
                    .map(|c| c.pass && c.equality)
                    .unwrap_or(false)
            });
            all.push(plain_link(
                "power-sum-constant-equality",
                if constant_ok { "equality" } else { "violated" }.into(),
                "equality".into(),
                constant_ok,
            ));
            // profiles of an actual motion sweep, all requested powers
            if params.q.is_some() {
                let set = params.point_set()?;
                let sweep = MotionSweep::new(&set, caps)?;
                let mut sweep_violations = 0u32;
                let mut checked = 0u32;
                for profile in &sweep.profiles {
                    for n in [2u32, 3, 4] {
                        let c = power_sum_check(profile, n)?;
                        checked += 1;
                        if !c.pass {
                            sweep_violations += 1;
                        }
                    }
                }
                all.push(plain_link(
                    "power-sum-sweep-profiles",
                    sweep_violations.to_string(),
                    "0".into(),
                    sweep_violations == 0,
                ));
                detail = json!({
                    "trials": trials, "seed": seed,
                    "sweep_profiles_checked": checked,
                    "equalities_seen": equalities,
                });
            } else {
                detail = json!({ "trials": trials, "seed": seed, "equalities_seen": equalities });
            }
            links = all;
        }
        "3.1" => {
            let set = params.point_set()?;
            if !set.is_product() {
                return Err(Error::invalid("check 3.1 needs a product set"));
            }
            let (rotated, _) = set.with_min_set_last()?;
            let energy = nu_square_bound_product(&rotated)?;
            let mut all = energy.links.clone();
            let last = rotated.coordinate_sets().unwrap().last().unwrap().clone();
            let mut failing_pairs = 0u64;
            let mut pairs = 0u64;
            let mut max_mult = 0u64;
            for &a in &last {
                for &b in &last {
                    let rep = mainlm_embedding(&rotated, a, b, caps)?;
                    pairs += 1;
                    max_mult = max_mult.max(rep.max_mult_u).max(rep.max_mult_v);
                    if !rep.pass {
                        failing_pairs += 1;
                    }
                }
            }
            all.push(plain_link(
                "embedding-failing-pairs",
                failing_pairs.to_string(),
                "0".into(),
                failing_pairs == 0,
            ));
            links = all;
            detail = json!({ "pinned_pairs": pairs, "max_multiplicity": max_mult });
        }
        "4.1" => {
            let set = params.point_set()?;
            let c = params.c.unwrap_or(4);
            let report = nu_square_bound_planar(&set, c)?;
            detail = json!({
                "set_size": report.set_size,
                "isotropic_pairs": report.isotropic_pairs,
                "four_q_gate": report.four_q_gate,
                "q_mod_4": report.q_mod_4,
                "best_constant_float": report.best_constant_float,
            });
            links = report.links;
        }
        "4.2" => {
            let set = params.point_set()?;
            let field = set.field();
            let fast = hinge_counts(&set);
            let direct = hinge_counts_direct(field, &set.materialize());
            let iso = isotropic_report(&set);
            let mut all = vec![plain_link(
                "hinge-path-identity",
                fast.iter().sum::<u128>().to_string(),
                direct.iter().sum::<u128>().to_string(),
                fast == direct,
            )];
            let planar = nu_square_bound_planar(&set, params.c.unwrap_or(4))?;
            all.extend(
                planar
                    .links
                    .into_iter()
                    .filter(|l| l.id.starts_with("energy-vs-hinges")),
            );
            links = all;
            detail = json!({
                "set_size": set.len(),
                "four_q_gate": set.len() >= 4 * field.q(),
                "isotropic_pairs": iso.nonzero_pair_count,
                "q_mod_4": field.q() % 4,
            });
        }
        "remark-4.4" => {
            let set = params.point_set()?;
            let report = hinge_upper_bound(&set)?;
            detail = json!({
                "set_size": report.set_size,
                "hinge_total": report.hinge_total,
                "cube_threshold_met": report.cube_threshold_met,
                "best_constant": report.best_constant,
            });
            links = report.links;
        }
        "eq-2-chain" => {
            let set = params.point_set()?;
            let k = params.k.unwrap_or(1);
            let report = theorem_chain_report(&set, k, caps)?;
            detail = json!({
                "set_size": report.set_size,
                "census_support": report.census_support,
                "s1": report.s1,
                "s_top": report.s_top,
                "w": report.w,
                "order_d": report.order_d,
                "order_d_minus_1": report.order_d_minus_1,
            });
            links = report.links;
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown check id `{other}`; known ids: {}",
                CHECK_IDS.join(", ")
            )));
        }
    }
    let pass = links.iter().filter(|l| !l.advisory).all(|l| l.pass);
    Ok(CheckReport {
        check: params.check.clone(),
        params: serde_json::to_value(params).expect("serializable params"),
        links,
        detail,
        pass,
    })
}

/// The built-in desk-scale matrix: every check over small parameters.
pub fn default_suite() -> Vec<CheckParams> {
    let mut cells = Vec::new();
    for q in [3u64, 5, 7] {
        for m in [2usize, 3] {
            let mut p = CheckParams::named("2.2");
            p.q = Some(q);
            p.m = Some(m);
            cells.push(p);
        }
    }
    for q in [3u64, 5, 7] {
        let mut p = CheckParams::named("4.3");
        p.q = Some(q);
        cells.push(p);
    }
    let mut p = CheckParams::named("2.1");
    p.q = Some(7);
    p.m = Some(3);
    p.lam = Some(1);
    cells.push(p);
    for q in [3u64, 5] {
        let mut p = CheckParams::named("2.3");
        p.q = Some(q);
        cells.push(p);
    }
    for q in [3u64, 5, 7] {
        let mut p = CheckParams::named("3.1");
        p.q = Some(q);
        cells.push(p);
    }
    for q in [3u64, 5, 7] {
        for check in ["4.1", "4.2", "remark-4.4"] {
            let mut p = CheckParams::named(check);
            p.q = Some(q);
            cells.push(p);
        }
    }
    for q in [3u64, 5] {
        for k in [1u32, 2] {
            let mut p = CheckParams::named("eq-2-chain");
            p.q = Some(q);
            p.k = Some(k);
            cells.push(p);
        }
    }
    cells
}

/// A short deterministic label for suite rows.
pub fn cell_label(params: &CheckParams) -> String {
    let mut label = params.check.clone();
    let mut push = |key: &str, v: String| {
        label.push_str(&format!(",{key}={v}"));
    };
    if let Some(q) = params.q {
        push("q", q.to_string());
    }
    if let Some(m) = params.m {
        push("m", m.to_string());
    }
    if let Some(lam) = params.lam {
        push("lam", lam.to_string());
    }
    if let Some(k) = params.k {
        push("k", k.to_string());
    }
    if let Some(input) = &params.input {
        push("input", input.clone());
    }
    format!("[{label}]")
}

/// Runs a whole matrix; the boolean is the conjunction of the asserted
/// links. Any parameter or cap error aborts with context.
pub fn run_suite(cells: &[CheckParams], caps: &Caps) -> Result<(Vec<CheckReport>, bool), Error> {
    let mut reports = Vec::with_capacity(cells.len());
    let mut all_pass = true;
    for cell in cells {
        let report = run_check(cell, caps).map_err(|e| {
            Error::invalid(format!("cell {}: {e}", cell_label(cell)))
        })?;
        all_pass &= report.pass;
        reports.push(report);
    }
    Ok((reports, all_pass))
}

/// Random-product chain cells used by trial commands: products over `F_q`
/// with factor sizes in `[2, 4]`.
pub fn random_product_chain_trials(
    q: u64,
    count: u32,
    k: u32,
    seed: u64,
    caps: &Caps,
) -> Result<(u32, u32), Error> {
    let field = PrimeField::new(q)?;
    let mut rng = seeded_rng(seed);
    let mut failures = 0;
    for _ in 0..count {
        let set = random_plane_product(field, 2, 4, &mut rng);
        let report = theorem_chain_report(&set, k, caps)?;
        if !report.pass {
            failures += 1;
        }
    }
    Ok((count, failures))
}
