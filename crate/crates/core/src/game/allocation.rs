//! Agents' choice stage: each type spreads its mass over its utility-maximal
//! offers in the posted menus, or stays out.

use crate::economy::{Bundle, Economy, GoodId, Offer, SocialChoiceRule, TypeId};
use crate::error::{Error, Result};
use crate::incentives::DuViolation;

/// What an adversarial tie-break is trying to achieve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversarialGoal {
    /// Help a deviating intermediary: a deviation counts if any tie-break makes it pay.
    ProDeviation,
    /// Undermine the target outcome on the equilibrium path.
    AntiImplementation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakRule {
    FavorTarget,
    LowestIntermediaryIndex,
    SplitUniform,
    Adversarial(AdversarialGoal),
}

impl TieBreakRule {
    pub fn name(&self) -> &'static str {
        match self {
            TieBreakRule::FavorTarget => "favor-target",
            TieBreakRule::LowestIntermediaryIndex => "lowest-index",
            TieBreakRule::SplitUniform => "split-uniform",
            TieBreakRule::Adversarial(AdversarialGoal::ProDeviation) => "adversarial",
            TieBreakRule::Adversarial(AdversarialGoal::AntiImplementation) => "adversarial-anti",
        }
    }

    /// The rule used for the candidate profile itself. The other rules only
    /// govern deviation subgames; on the path agents lean toward their
    /// reference goods and spread evenly over the intermediaries selling them.
    pub fn on_path(self) -> TieBreakRule {
        TieBreakRule::SplitUniform
    }
}

/// For each type, the goods it leans toward when indifferent, with the share
/// of its mass that goes to each.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodPreference {
    per_type: Vec<Vec<(GoodId, f64)>>,
}

impl GoodPreference {
    pub fn new(per_type: Vec<Vec<(GoodId, f64)>>) -> Self {
        GoodPreference { per_type }
    }

    /// Every type leans toward its target good.
    pub fn from_target(scr: &SocialChoiceRule) -> Self {
        GoodPreference {
            per_type: scr
                .bundles()
                .iter()
                .map(|b| b.good().map(|g| vec![(g, 1.0)]).unwrap_or_default())
                .collect(),
        }
    }

    /// Mass `q` of every type on the cycle leans toward its successor's
    /// target good; the rest keeps its own.
    pub fn swapped(e: &Economy, scr: &SocialChoiceRule, cycle: &DuViolation, q: f64) -> Result<Self> {
        let mut pref = GoodPreference::from_target(scr);
        for &t in &cycle.cycle {
            let next = cycle.successor(t).expect("type lies on its own cycle");
            let (own, theirs) = match (scr.bundle(t).good(), scr.bundle(next).good()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Precondition("cycle contains a type assigned the null bundle".into())),
            };
            let moved = (q / e.mass(t)).min(1.0);
            let mut list = vec![(theirs, moved)];
            if moved < 1.0 {
                list.push((own, 1.0 - moved));
            }
            pref.per_type[t.0] = list;
        }
        Ok(pref)
    }

    pub fn for_type(&self, t: TypeId) -> &[(GoodId, f64)] {
        &self.per_type[t.0]
    }

    pub fn as_slice(&self) -> &[Vec<(GoodId, f64)>] {
        &self.per_type
    }
}

/// One menu per intermediary. The null bundle is always available and never listed.
#[derive(Debug, Clone, PartialEq)]
pub struct MenuProfile {
    pub menus: Vec<Vec<Offer>>,
}

impl MenuProfile {
    pub fn new(menus: Vec<Vec<Offer>>) -> Self {
        MenuProfile { menus }
    }

    /// Every intermediary posts the distinct target bundles.
    pub fn symmetric(scr: &SocialChoiceRule, intermediaries: usize, tol: f64) -> Self {
        MenuProfile {
            menus: vec![scr.target_menu(tol); intermediaries],
        }
    }

    pub fn intermediaries(&self) -> usize {
        self.menus.len()
    }

    pub fn with_menu(&self, i: usize, menu: Vec<Offer>) -> Self {
        let mut menus = self.menus.clone();
        menus[i] = menu;
        MenuProfile { menus }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Share {
    pub agent: TypeId,
    pub intermediary: usize,
    pub offer: Offer,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub shares: Vec<Share>,
    /// Mass of each type taking the null bundle.
    pub null_mass: Vec<f64>,
    /// Realized utility of each type.
    pub utilities: Vec<f64>,
    /// `ν_i`: mass of each good sold by each intermediary.
    pub measures: Vec<Vec<f64>>,
}

impl Allocation {
    /// Bundles a type consumes, with the mass on each.
    pub fn consumed(&self, t: TypeId) -> Vec<(Bundle, f64)> {
        let mut out: Vec<(Bundle, f64)> = self
            .shares
            .iter()
            .filter(|s| s.agent == t)
            .map(|s| (Bundle::Offer(s.offer), s.mass))
            .collect();
        if self.null_mass[t.0] > 0.0 {
            out.push((Bundle::Null, self.null_mass[t.0]));
        }
        out
    }
}

/// A type's choice: `(intermediary, offer index, fraction of its mass)`;
/// empty means the null bundle.
type Choice = Vec<(usize, usize, f64)>;

struct Options {
    best: f64,
    maximizers: Vec<(usize, usize)>,
}

fn options(e: &Economy, profile: &MenuProfile, t: TypeId, tol: f64) -> Options {
    let mut best = f64::NEG_INFINITY;
    for menu in &profile.menus {
        for o in menu {
            best = best.max(e.value(o.good, t) - o.price);
        }
    }
    let mut maximizers = Vec::new();
    if best >= -tol {
        for (i, menu) in profile.menus.iter().enumerate() {
            for (k, o) in menu.iter().enumerate() {
                if e.value(o.good, t) - o.price >= best - tol {
                    maximizers.push((i, k));
                }
            }
        }
    }
    Options { best, maximizers }
}

fn preferred(
    profile: &MenuProfile,
    maximizers: &[(usize, usize)],
    pref: &[(GoodId, f64)],
    split: bool,
) -> Option<Choice> {
    let offered = |g: GoodId| {
        maximizers
            .iter()
            .copied()
            .filter(move |&(i, k)| profile.menus[i][k].good == g)
    };
    let available: Vec<(GoodId, f64)> = pref
        .iter()
        .copied()
        .filter(|&(g, w)| w > 0.0 && offered(g).next().is_some())
        .collect();
    let total: f64 = available.iter().map(|(_, w)| w).sum();
    if available.is_empty() || total <= 0.0 {
        return None;
    }
    let mut choice = Choice::new();
    for (g, w) in available {
        let w = w / total;
        if split {
            choice.extend(split_by_intermediary(offered(g), w));
        } else {
            let (i, k) = offered(g).next().expect("checked above");
            choice.push((i, k, w));
        }
    }
    Some(choice)
}

/// First offer of each intermediary among `candidates`, sharing `weight` equally.
fn split_by_intermediary(candidates: impl Iterator<Item = (usize, usize)>, weight: f64) -> Choice {
    let mut firsts: Vec<(usize, usize)> = Vec::new();
    for (i, k) in candidates {
        if !firsts.iter().any(|(j, _)| *j == i) {
            firsts.push((i, k));
        }
    }
    let n = firsts.len() as f64;
    firsts.into_iter().map(|(i, k)| (i, k, weight / n)).collect()
}

fn choose(profile: &MenuProfile, opts: &Options, pref: &[(GoodId, f64)], rule: TieBreakRule) -> Choice {
    let Some(&first) = opts.maximizers.first() else {
        return Choice::new();
    };
    match rule {
        TieBreakRule::FavorTarget => {
            preferred(profile, &opts.maximizers, pref, false).unwrap_or_else(|| vec![(first.0, first.1, 1.0)])
        }
        TieBreakRule::SplitUniform => preferred(profile, &opts.maximizers, pref, true).unwrap_or_else(|| {
            let g = profile.menus[first.0][first.1].good;
            let same = opts.maximizers.iter().copied().filter(|&(i, k)| profile.menus[i][k].good == g);
            split_by_intermediary(same, 1.0)
        }),
        TieBreakRule::LowestIntermediaryIndex | TieBreakRule::Adversarial(_) => vec![(first.0, first.1, 1.0)],
    }
}

fn build(e: &Economy, profile: &MenuProfile, choices: &[Choice], best: &[f64]) -> Allocation {
    let mut shares = Vec::new();
    let mut null_mass = vec![0.0; e.type_count()];
    let mut measures = vec![vec![0.0; e.good_count()]; profile.intermediaries()];
    let mut utilities = vec![0.0; e.type_count()];
    for t in e.type_ids() {
        let m = e.mass(t);
        let choice = &choices[t.0];
        if choice.is_empty() {
            null_mass[t.0] = m;
            continue;
        }
        utilities[t.0] = best[t.0];
        for &(i, k, w) in choice {
            let offer = profile.menus[i][k];
            shares.push(Share {
                agent: t,
                intermediary: i,
                offer,
                mass: m * w,
            });
            measures[i][offer.good.0] += m * w;
        }
    }
    Allocation {
        shares,
        null_mass,
        utilities,
        measures,
    }
}

/// Agents' choices under a deterministic tie-break. Adversarial rules fall
/// back to the lowest-index selection here; use [`allocations`] to see them all.
pub fn allocate(e: &Economy, profile: &MenuProfile, pref: &GoodPreference, rule: TieBreakRule, tol: f64) -> Allocation {
    let opts: Vec<Options> = e.type_ids().map(|t| options(e, profile, t, tol)).collect();
    let choices: Vec<Choice> = e
        .type_ids()
        .map(|t| choose(profile, &opts[t.0], pref.for_type(t), rule))
        .collect();
    let best: Vec<f64> = opts.iter().map(|o| o.best).collect();
    build(e, profile, &choices, &best)
}

/// Every allocation consistent with `rule`: a single one for deterministic
/// rules, every pure maximizer selection (including staying out when that
/// ties) for adversarial ones.
pub fn allocations(
    e: &Economy,
    profile: &MenuProfile,
    pref: &GoodPreference,
    rule: TieBreakRule,
    tol: f64,
    limit: usize,
) -> Result<Vec<Allocation>> {
    if !matches!(rule, TieBreakRule::Adversarial(_)) {
        return Ok(vec![allocate(e, profile, pref, rule, tol)]);
    }
    let opts: Vec<Options> = e.type_ids().map(|t| options(e, profile, t, tol)).collect();
    let per_type: Vec<Vec<Choice>> = opts
        .iter()
        .map(|o| {
            let mut list: Vec<Choice> = o.maximizers.iter().map(|&(i, k)| vec![(i, k, 1.0)]).collect();
            if o.best <= tol {
                list.push(Choice::new());
            }
            list
        })
        .collect();
    let count = per_type.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len().max(1)));
    match count {
        Some(n) if n <= limit => {}
        _ => {
            return Err(Error::SearchSpace {
                candidates: per_type.iter().map(|l| l.len().max(1) as u128).product(),
                limit: limit as u128,
                hint: "too many tie-break selections; use a deterministic tie-break".into(),
            })
        }
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_type.len()];
    loop {
        let choices: Vec<Choice> = per_type
            .iter()
            .zip(&idx)
            .map(|(l, &j)| l.get(j).cloned().unwrap_or_default())
            .collect();
        let best: Vec<f64> = opts.iter().map(|o| o.best).collect();
        out.push(build(e, profile, &choices, &best));
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < per_type[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
