use anyhow::{anyhow, bail, Context, Result};
use intermed::applications::{
    cara_transform, make_car_sales, make_taxation, CarSalesParams, InsuranceEconomy, TaxationEconomy, Technology,
};
use intermed::game::{
    construct_bad_equilibrium, gross_profit, deviation_search, enumerate_equilibria,
    monopoly_verify, settle, verify_full_implementation, verify_partial_implementation, AdversarialGoal, FullVerdict,
    GoodPreference, MenuProfile, PriceGrid, SearchConfig, SingleCrossingSpec, TieBreakRule,
};
use intermed::incentives::{self, construct_transfers, find_indifferent_pairs, TransferMode, TransferOutcome};
use intermed::policies::{
    assess_fee, build_distribution_policy, build_hat_per_unit, hat_fees, DistributionVariant, FeeOutcome, Policy,
    PolicyKind,
};
use intermed::{economy_to_json, load_economy, target_good_distribution, Economy, Error, SocialChoiceRule};
use serde_json::{json, Value};

use crate::convert::{self, load_profile, parse_fees, ProfileDocument};
use crate::report::{Report, Verdict};
use crate::{ModeName, Options, Output, PolicyName, TechnologyName, TieBreakName};

fn load(opts: &Options) -> Result<(Economy, SocialChoiceRule)> {
    let path = opts.economy.as_ref().ok_or_else(|| anyhow!("--economy FILE is required"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    load_economy(&text).with_context(|| format!("invalid economy {}", path.display()))
}

fn tiebreak(opts: &Options) -> TieBreakRule {
    match opts.tiebreak {
        TieBreakName::FavorTarget => TieBreakRule::FavorTarget,
        TieBreakName::LowestIndex => TieBreakRule::LowestIntermediaryIndex,
        TieBreakName::SplitUniform => TieBreakRule::SplitUniform,
        TieBreakName::Adversarial => TieBreakRule::Adversarial(AdversarialGoal::ProDeviation),
        TieBreakName::AdversarialAnti => TieBreakRule::Adversarial(AdversarialGoal::AntiImplementation),
    }
}

fn policy(opts: &Options, e: &Economy, scr: &SocialChoiceRule) -> Result<Policy> {
    let distr = |v| build_distribution_policy(e, scr, v);
    let mut p = match opts.policy {
        PolicyName::HatPerUnit => build_hat_per_unit(e, scr)?,
        PolicyName::PerUnit => build_hat_per_unit(e, scr)?,
        PolicyName::HatDistr => distr(DistributionVariant::Target)?,
        PolicyName::MatchEachOther => distr(DistributionVariant::Match)?,
        PolicyName::FullLine => distr(DistributionVariant::FullLine)?,
        PolicyName::Monopoly => distr(DistributionVariant::Monopoly)?,
    };
    if let Some(spec) = &opts.fees {
        if opts.policy == PolicyName::HatPerUnit {
            bail!("--fees conflicts with --policy hat-per-unit; use --policy per-unit");
        }
        let new = parse_fees(e, spec)?;
        match &mut p.kind {
            PolicyKind::PerUnit { fees }
            | PolicyKind::TargetDistribution { fees, .. }
            | PolicyKind::MatchEachOther { fees }
            | PolicyKind::FullLineForcing { fees }
            | PolicyKind::MonopolyRefinement { fees, .. } => *fees = new,
        }
    }
    Ok(p.with_distr_tol(opts.distr_tol).with_punish_inactive(opts.punish_inactive))
}

fn search_config(opts: &Options, scr: &SocialChoiceRule) -> Result<SearchConfig> {
    let around = PriceGrid::around(scr, opts.grid_step, 5.0)?;
    let grid = PriceGrid::new(
        opts.grid_lo.unwrap_or(around.lo),
        opts.grid_hi.unwrap_or(around.hi),
        opts.grid_step,
    )?;
    let jobs = opts
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let mut cfg = SearchConfig::new(grid)
        .with_max_menu_size(opts.max_menu_size)
        .with_jobs(jobs)
        .with_tol(opts.tol);
    cfg.dev_tol = opts.dev_tol;
    Ok(cfg)
}

fn settings(opts: &Options, p: &Policy, e: &Economy, cfg: &SearchConfig) -> Value {
    json!({
        "policy": p.name(),
        "fees": convert::per_good(e, p.fees()),
        "tiebreak": tiebreak(opts).name(),
        "grid": { "lo": cfg.grid.lo, "hi": cfg.grid.hi, "step": cfg.grid.step },
        "max_menu_size": cfg.max_menu_size,
        "intermediaries": opts.intermediaries,
    })
}

fn profile_and_preference(
    opts: &Options,
    e: &Economy,
    scr: &SocialChoiceRule,
) -> Result<(MenuProfile, GoodPreference)> {
    match &opts.profile {
        Some(path) => load_profile(&path.to_string_lossy(), e, scr),
        None => Ok((
            MenuProfile::symmetric(scr, opts.intermediaries, opts.tol),
            GoodPreference::from_target(scr),
        )),
    }
}

pub fn validate(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    Ok(Report::new("validate", Verdict::Holds)
        .witness("types", json!(e.type_count()))
        .witness("goods", json!(e.good_count()))
        .witness("private_values", json!(e.has_private_values(opts.tol)))
        .witness("active_mass", json!(scr.active_mass(&e))))
}

pub fn check_ic(opts: &Options, ir: bool) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let r = incentives::check_ic_ir(&e, &scr, opts.tol);
    if ir {
        let v: Vec<Value> = r
            .ir_violations
            .iter()
            .map(|v| json!({ "type": e.type_name(v.agent), "utility": v.utility }))
            .collect();
        return Ok(Report::new("check ir", Verdict::holds_if(r.ir_holds())).witness("violations", json!(v)));
    }
    let v: Vec<Value> = r
        .violations
        .iter()
        .map(|v| json!({ "type": e.type_name(v.agent), "mimics": e.type_name(v.mimicked), "slack": v.slack }))
        .collect();
    Ok(Report::new("check ic", Verdict::holds_if(r.ic_holds())).witness("violations", json!(v)))
}

pub fn check_cmon(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let r = incentives::check_cmon(&e, &scr.consumption(), opts.tol);
    let witness = r
        .witness
        .map(|c| json!({ "cycle": convert::types(&e, &c.types), "total": c.total }))
        .unwrap_or(Value::Null);
    Ok(Report::new("check cmon", Verdict::holds_if(r.holds)).witness("negative_cycle", witness))
}

pub fn check_du(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let r = incentives::check_du(&e, &scr.consumption(), opts.tol, opts.force)?;
    let v: Vec<Value> = r
        .violations
        .iter()
        .map(|v| json!({ "cycle": convert::types(&e, &v.cycle), "gap": v.gap }))
        .collect();
    Ok(Report::new("check du", Verdict::holds_if(r.holds)).witness("violations", json!(v)))
}

pub fn check_indifference(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let r = find_indifferent_pairs(&e, &scr, opts.tol)?;
    let pairs: Vec<Value> = r
        .pairs
        .iter()
        .map(|p| {
            json!({
                "type": e.type_name(p.who),
                "own": convert::bundle(&e, &p.own),
                "other": convert::bundle(&e, &p.other),
                "other_owner": e.type_name(p.other_owner),
            })
        })
        .collect();
    Ok(Report::new("check indifference", Verdict::holds_if(r.is_empty()))
        .witness("pairs", json!(pairs))
        .witness("ir_binding", convert::types(&e, &r.ir_binding)))
}

pub fn transfers(opts: &Options, mode: ModeName, anchor_utility: f64, anchor: Option<&str>) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let anchor = anchor
        .map(|name| e.type_id(name).ok_or_else(|| anyhow!("unknown type `{name}`")))
        .transpose()?;
    let mode = match mode {
        ModeName::Maximal => TransferMode::Maximal,
        ModeName::Minimal => TransferMode::Minimal,
    };
    let x = scr.consumption();
    let report = match construct_transfers(&e, &x, mode, anchor_utility, anchor, opts.tol)? {
        TransferOutcome::Feasible(rule) => Report::new("transfers", Verdict::Holds)
            .witness("prices", convert::per_type(&e, &rule.prices))
            .witness("anchor", json!(e.type_name(rule.anchor)))
            .witness("mode", json!(format!("{:?}", rule.mode).to_lowercase())),
        TransferOutcome::Infeasible(c) => Report::new("transfers", Verdict::Infeasible)
            .witness("negative_cycle", json!({ "cycle": convert::types(&e, &c.types), "total": c.total }))
            .diagnostic("the target consumption rule is not implementable by any prices"),
    };
    Ok(report)
}

pub fn policy_eval(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let p = policy(opts, &e, &scr)?;
    let (profile, pref) = profile_and_preference(opts, &e, &scr)?;
    let rule = tiebreak(opts).on_path();
    let (alloc, profits) = settle(&e, &profile, &pref, &p, rule, opts.tol);
    let even = profits.iter().all(|n| n.value().is_some_and(|v| v.abs() <= opts.tol));
    let rows: Vec<Value> = profits
        .iter()
        .enumerate()
        .map(|(i, net)| {
            let others: Vec<&[f64]> = (0..profile.intermediaries())
                .filter(|j| *j != i)
                .map(|j| alloc.measures[j].as_slice())
                .collect();
            let fee = match assess_fee(&p, &alloc.measures[i], &others) {
                FeeOutcome::Fee(f) => json!(f),
                FeeOutcome::Violation(reason) => json!({ "violation": reason }),
            };
            json!({
                "intermediary": i,
                "gross": gross_profit(&e, &alloc, i),
                "fee": fee,
                "net": convert::net_profit(net),
            })
        })
        .collect();
    Ok(Report::new("policy eval", Verdict::holds_if(even))
        .witness("policy", json!(p.name()))
        .witness("fees", convert::per_good(&e, p.fees()))
        .witness("target_profit_fees", convert::per_good(&e, &hat_fees(&e, &scr)?))
        .witness("intermediaries", json!(rows))
        .witness("allocation", convert::allocation(&e, &alloc)))
}

pub fn verify_partial(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let p = policy(opts, &e, &scr)?;
    let cfg = search_config(opts, &scr)?;
    let v = verify_partial_implementation(&e, &scr, &p, tiebreak(opts), &cfg, opts.intermediaries)?;
    let mut r = Report::new("verify partial", Verdict::supported_if(v.supported))
        .witness("settings", settings(opts, &p, &e, &cfg))
        .witness("on_path_profits", json!(v.search.baseline_profits.iter().map(convert::net_profit).collect::<Vec<_>>()))
        .witness("on_path_allocation", convert::allocation(&e, &v.search.baseline))
        .witness("candidates_evaluated", json!(v.search.candidates_evaluated))
        .witness("deviation", v.search.witness.as_ref().map_or(Value::Null, |w| convert::deviation(&e, w)));
    for issue in v.issues {
        r = r.diagnostic(issue);
    }
    Ok(r)
}

pub fn verify_full(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let p = policy(opts, &e, &scr)?;
    let cfg = search_config(opts, &scr)?;
    let v = verify_full_implementation(&e, &scr, &p, &cfg, opts.intermediaries, opts.force)?;
    let r = Report::new("verify full", Verdict::supported_if(v.is_supported())).witness("policy", json!(p.name()));
    Ok(match v {
        FullVerdict::Supported => r,
        FullVerdict::Indifferent(ind) => {
            let pairs: Vec<Value> = ind
                .pairs
                .iter()
                .map(|q| {
                    json!({
                        "type": e.type_name(q.who),
                        "other": convert::bundle(&e, &q.other),
                        "other_owner": e.type_name(q.other_owner),
                    })
                })
                .collect();
            r.witness("indifferent", json!(pairs))
                .witness("ir_binding", convert::types(&e, &ind.ir_binding))
                .diagnostic("an indifferent type can switch bundles, so another equilibrium outcome exists")
        }
        FullVerdict::DistinctUtilityFails { violation, bad_equilibrium, diagnostic } => {
            let mut r = r.witness(
                "cycle",
                json!({ "types": convert::types(&e, &violation.cycle), "gap": violation.gap }),
            );
            if let Some(w) = bad_equilibrium {
                r = r.witness("bad_equilibrium", bad_witness(&e, &w));
            }
            if let Some(d) = diagnostic {
                r = r.diagnostic(d);
            }
            r
        }
    })
}

pub fn find_deviation(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let p = policy(opts, &e, &scr)?;
    let cfg = search_config(opts, &scr)?;
    let (profile, pref) = profile_and_preference(opts, &e, &scr)?;
    let s = deviation_search(&e, &pref, &p, &profile, tiebreak(opts), &cfg)?;
    Ok(Report::new("find-deviation", Verdict::holds_if(s.witness.is_none()))
        .witness("settings", settings(opts, &p, &e, &cfg))
        .witness("profile", json!(ProfileDocument::from_model(&e, &profile, None)))
        .witness("baseline_profits", json!(s.baseline_profits.iter().map(convert::net_profit).collect::<Vec<_>>()))
        .witness("candidates_evaluated", json!(s.candidates_evaluated))
        .witness("deviation", s.witness.as_ref().map_or(Value::Null, |w| convert::deviation(&e, w))))
}

fn bad_witness(e: &Economy, w: &intermed::game::BadEquilibriumWitness) -> Value {
    json!({
        "cycle": convert::types(e, &w.cycle.cycle),
        "swap_mass": w.swap_mass,
        "shift": w.shift,
        "profile": json!(ProfileDocument::from_model(e, &w.profile, Some(&w.preference))),
        "allocation": convert::allocation(e, &w.allocation),
        "utilities": convert::per_type(e, &w.utilities),
        "target_utilities": convert::per_type(e, &w.target_utilities),
        "profits": w.profits.iter().map(convert::net_profit).collect::<Vec<_>>(),
        "candidates_evaluated": w.candidates_evaluated,
        "deviation": w.deviation.as_ref().map_or(Value::Null, |d| convert::deviation(e, d)),
    })
}

pub fn bad_equilibrium(opts: &Options) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let p = policy(opts, &e, &scr)?;
    let cfg = search_config(opts, &scr)?;
    let du = incentives::check_du(&e, &scr.consumption(), opts.tol, opts.force)?;
    let Some(cycle) = du.violations.first() else {
        return Ok(Report::new("bad-equilibrium", Verdict::Holds)
            .diagnostic("every cycle of goods changes total utility; no agents are forced to be indifferent"));
    };
    let r = Report::new("bad-equilibrium", Verdict::Refuted).witness("settings", settings(opts, &p, &e, &cfg));
    match construct_bad_equilibrium(&e, &scr, cycle, &p, &cfg, opts.intermediaries) {
        Ok(w) => {
            let mut r = r.witness("bad_equilibrium", bad_witness(&e, &w));
            if !w.survives() {
                r.verdict = Verdict::Infeasible;
                r = r.diagnostic("the swap profile admits a profitable deviation on this grid");
            }
            Ok(r)
        }
        Err(err @ (Error::Precondition(_) | Error::NoActiveTypes)) => Ok(Report::new("bad-equilibrium", Verdict::Infeasible)
            .witness("cycle", json!({ "types": convert::types(&e, &cycle.cycle), "gap": cycle.gap }))
            .diagnostic(err.to_string())),
        Err(err) => Err(err.into()),
    }
}

pub fn enumerate(opts: &Options, show: usize) -> Result<Report> {
    let (e, scr) = load(opts)?;
    let p = policy(opts, &e, &scr)?;
    let cfg = search_config(opts, &scr)?;
    let mut prefs = vec![GoodPreference::from_target(&scr)];
    let mut labels = vec!["target".to_string()];
    let mut notes = Vec::new();
    match incentives::check_du(&e, &scr.consumption(), opts.tol, opts.force) {
        Ok(du) => {
            for v in &du.violations {
                let q = v.cycle.iter().map(|t| e.mass(*t)).fold(f64::INFINITY, f64::min);
                prefs.push(GoodPreference::swapped(&e, &scr, v, q)?);
                let names: Vec<&str> = v.cycle.iter().map(|t| e.type_name(*t)).collect();
                labels.push(format!("swap {}", names.join(" -> ")));
            }
        }
        Err(err) => notes.push(format!("swap preferences skipped: {err}")),
    }
    let en = enumerate_equilibria(&e, &prefs, &p, tiebreak(opts), &cfg, opts.intermediaries)?;
    let target_u: Vec<f64> = e.type_ids().map(|t| e.utility_of(&scr.bundle(t), t)).collect::<Result<_, _>>()?;
    let gap = |u: &[f64]| u.iter().zip(&target_u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_gap = en.equilibria.iter().map(|q| gap(&q.allocation.utilities)).fold(0.0, f64::max);
    let mut outcomes: Vec<Vec<f64>> = en.equilibria.iter().map(|q| q.allocation.utilities.clone()).collect();
    outcomes.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    outcomes.dedup();
    let listed: Vec<Value> = en
        .equilibria
        .iter()
        .take(show)
        .map(|q| {
            json!({
                "preference": labels[q.preference],
                "menus": q.profile.menus.iter().map(|m| convert::menu(&e, m)).collect::<Vec<_>>(),
                "utilities": convert::per_type(&e, &q.allocation.utilities),
                "profits": q.profits,
            })
        })
        .collect();
    let ok = !en.equilibria.is_empty() && max_gap <= cfg.grid.step + opts.tol;
    let mut r = Report::new("enumerate-equilibria", Verdict::supported_if(ok))
        .witness("settings", settings(opts, &p, &e, &cfg))
        .witness("preferences", json!(labels))
        .witness("equilibrium_count", json!(en.equilibria.len()))
        .witness("profiles_evaluated", json!(en.profiles_evaluated))
        .witness("menus_per_intermediary", json!(en.menus_per_intermediary))
        .witness("target_utilities", convert::per_type(&e, &target_u))
        .witness("max_utility_gap", json!(max_gap))
        .witness(
            "utility_outcomes",
            json!(outcomes.iter().take(show).map(|u| convert::per_type(&e, u)).collect::<Vec<_>>()),
        )
        .witness("distinct_outcomes", json!(outcomes.len()))
        .witness("equilibria", json!(listed));
    if en.equilibria.is_empty() {
        r = r.diagnostic("no equilibrium on this grid");
    } else if !ok {
        r = r.diagnostic(format!(
            "some equilibrium leaves a type {max_gap} away from its target utility, more than the grid step"
        ));
    }
    for n in notes {
        r = r.diagnostic(n);
    }
    Ok(r)
}

/// Three quality levels on θ in [1, 2] with cut-offs at 1.3 and 1.7.
pub fn default_screening() -> SingleCrossingSpec {
    SingleCrossingSpec {
        theta_lo: 1.0,
        theta_hi: 2.0,
        qualities: vec![1.0, 2.0, 3.0],
        costs: vec![0.5, 1.0, 2.0],
        thresholds: vec![1.3, 1.7],
        base_utility: 0.5,
    }
}

pub fn monopoly(opts: &Options, types: usize, personalized: bool, step: f64, radius: usize) -> Result<Report> {
    let (e, scr) = match &opts.economy {
        Some(_) => load(opts)?,
        None => default_screening().discretize(types)?,
    };
    let m = monopoly_verify(&e, &scr, step, radius, personalized, opts.tol)?;
    Ok(Report::new("monopoly", Verdict::supported_if(m.supported()))
        .witness("types", json!(e.type_count()))
        .witness("personalized", json!(m.personalized))
        .witness("maximal_prices", convert::per_type(&e, &m.maximal_prices))
        .witness("rebates", convert::per_type(&e, &m.rebates))
        .witness("uniform_rebate", json!(m.uniform_rebate))
        .witness("constancy_gap", json!(m.constancy_gap))
        .witness("discretization_bound", json!(m.discretization_bound))
        .witness("net_price_error", json!(m.net_price_error))
        .witness("maximal_menu_is_best", json!(m.maximal_menu_is_best))
        .witness("best_local_profit", json!(m.best_local_profit))
        .witness("menus_checked", json!(m.menus_checked)))
}

fn demo_report(name: &str, opts: &Options, e: &Economy, scr: &SocialChoiceRule) -> Result<Report> {
    let ic = incentives::check_ic_ir(e, scr, opts.tol);
    let du = incentives::check_du(e, &scr.consumption(), opts.tol, opts.force)?;
    let dist = target_good_distribution(e, scr)?;
    let mut r = Report::new(name, Verdict::holds_if(ic.holds))
        .witness("target", json!(e.type_ids().map(|t| (e.type_name(t).to_string(), convert::bundle(e, &scr.bundle(t)))).collect::<serde_json::Map<_, _>>()))
        .witness("private_values", json!(e.has_private_values(opts.tol)))
        .witness("ic_ir", json!(ic.holds))
        .witness("distinct_utility", json!(du.holds))
        .witness("target_distribution", convert::per_good(e, dist.weights()))
        .witness("target_profit_fees", convert::per_good(e, &hat_fees(e, scr)?));
    r = if e.has_private_values(opts.tol) {
        r.diagnostic("private values: the target-profit per-unit schedule supports the target")
    } else {
        r.diagnostic("interdependent values: use the distribution regulation (policy hat-distr)")
    };
    Ok(r)
}

pub fn demo_car_sales(opts: &Options, interdependent: bool, masses: Option<&[f64]>, emit: bool) -> Result<Output> {
    let mut params = if interdependent { CarSalesParams::interdependent() } else { CarSalesParams::private() };
    if let Some(m) = masses {
        params = params.with_masses(m)?;
    }
    let (e, scr) = make_car_sales(&params)?;
    if emit {
        return Ok(Output::Document(economy_to_json(&e, &scr)));
    }
    Ok(Output::Report(demo_report("demo car-sales", opts, &e, &scr)?))
}

pub fn demo_insurance(opts: &Options, emit: bool) -> Result<Output> {
    let ins = InsuranceEconomy::example();
    let (e, scr) = cara_transform(&ins)?;
    if emit {
        return Ok(Output::Document(economy_to_json(&e, &scr)));
    }
    let r = demo_report("demo insurance", opts, &e, &scr)?
        .witness("risk_aversion", json!(ins.risk_aversion))
        .witness("certainty_equivalents", json!(e.utility_table()));
    Ok(Output::Report(r))
}

pub fn demo_taxation(opts: &Options, technology: TechnologyName, emit: bool) -> Result<Output> {
    let technology = match technology {
        TechnologyName::EffectiveOutput => Technology::EffectiveOutput,
        TechnologyName::LaborHours => Technology::LaborHours,
    };
    let inst = make_taxation(&TaxationEconomy::example(technology))?;
    if emit {
        return Ok(Output::Document(economy_to_json(&inst.economy, &inst.scr)));
    }
    let conventions: serde_json::Map<String, Value> =
        inst.conventions.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let r = demo_report("demo taxation", opts, &inst.economy, &inst.scr)?
        .witness("technology", json!(format!("{technology:?}")))
        .witness("sign_conventions", Value::Object(conventions));
    Ok(Output::Report(r))
}
