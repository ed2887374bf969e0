//! Brute-force unilateral deviations and equilibrium enumeration over a
//! finite price grid.

use rayon::prelude::*;

use crate::economy::{round_for_display, Economy, Offer, SocialChoiceRule, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::game::allocation::{allocate, allocations, Allocation, GoodPreference, MenuProfile, TieBreakRule};
use crate::game::profit::{intermediary_profit, NetProfit};
use crate::policies::Policy;

/// Minimum gain for a deviation to count as profitable.
pub const DEFAULT_DEV_TOL: f64 = 1e-6;

/// Default cap on the number of candidate menus per search.
pub const DEFAULT_CANDIDATE_LIMIT: u128 = 5_000_000;

/// Cap on menus per intermediary when enumerating equilibria.
pub const EQUILIBRIUM_MENU_LIMIT: u128 = 2048;

/// Cap on the number of tie-break selections examined per subgame.
const SELECTION_LIMIT: usize = 100_000;

/// Prices `lo + k·step` up to `hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl PriceGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::validation("grid-step", "must be positive"));
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation("grid", "bounds must be finite"));
        }
        Ok(PriceGrid { lo, hi, step })
    }

    /// `step` on `[min target price − margin, max target price + margin]`.
    pub fn around(scr: &SocialChoiceRule, step: f64, margin: f64) -> Result<Self> {
        let prices: Vec<f64> = scr.bundles().iter().filter(|b| !b.is_null()).map(|b| b.price()).collect();
        if prices.is_empty() {
            return PriceGrid::new(-margin, margin, step);
        }
        let lo = prices.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = prices.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        PriceGrid::new(lo - margin, hi + margin, step)
    }

    pub fn points(&self) -> Vec<f64> {
        if self.hi < self.lo {
            return Vec::new();
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| round_for_display(self.lo + k as f64 * self.step)).collect()
    }

    pub fn contains(&self, price: f64, tol: f64) -> bool {
        self.points().iter().any(|p| (p - price).abs() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub grid: PriceGrid,
    pub max_menu_size: usize,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    pub tol: f64,
    pub dev_tol: f64,
    pub candidate_limit: u128,
}

impl SearchConfig {
    pub fn new(grid: PriceGrid) -> Self {
        SearchConfig {
            grid,
            max_menu_size: 2,
            jobs: 1,
            tol: DEFAULT_TOL,
            dev_tol: DEFAULT_DEV_TOL,
            candidate_limit: DEFAULT_CANDIDATE_LIMIT,
        }
    }

    pub fn with_max_menu_size(mut self, k: usize) -> Self {
        self.max_menu_size = k;
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Every (good, grid price) pair, good-major.
    pub fn candidate_bundles(&self, e: &Economy) -> Vec<Offer> {
        let points = self.grid.points();
        e.good_ids()
            .flat_map(|g| points.iter().map(move |&p| Offer::new(g, p)))
            .collect()
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker threads: {e}")))
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Menus of up to `k` distinct bundles out of `n`, ordered by size and then
/// lexicographically by bundle index.
#[derive(Debug, Clone)]
struct MenuSpace {
    n: usize,
    /// Cumulative menu counts by size.
    offsets: Vec<u128>,
}

impl MenuSpace {
    fn new(n: usize, k: usize) -> Self {
        let mut offsets = vec![0u128];
        for size in 0..=k.min(n) {
            let last = *offsets.last().unwrap();
            offsets.push(last + binomial(n, size));
        }
        MenuSpace { n, offsets }
    }

    fn len(&self) -> u128 {
        *self.offsets.last().unwrap()
    }

    fn menu(&self, rank: u128) -> Vec<usize> {
        let size = self.offsets.windows(2).position(|w| rank < w[1]).expect("rank in range");
        let mut r = rank - self.offsets[size];
        let mut out = Vec::with_capacity(size);
        let mut x = 0;
        for i in 0..size {
            loop {
                let c = binomial(self.n - x - 1, size - i - 1);
                if r < c {
                    out.push(x);
                    x += 1;
                    break;
                }
                r -= c;
                x += 1;
            }
        }
        out
    }
}

fn same_menu(a: &[Offer], b: &[Offer], tol: f64) -> bool {
    let key = |m: &[Offer]| {
        let mut v: Vec<(usize, f64)> = m.iter().map(|o| (o.good.0, o.price)).collect();
        v.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        v
    };
    let (ka, kb) = (key(a), key(b));
    ka.len() == kb.len() && ka.iter().zip(&kb).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationWitness {
    pub deviator: usize,
    pub menu: Vec<Offer>,
    /// Deviation profit minus baseline profit; with a violating baseline,
    /// the deviation profit itself.
    pub profit_gain: f64,
    pub deviation_profit: f64,
    pub baseline_profit: NetProfit,
    pub allocation: Allocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSearch {
    pub witness: Option<DeviationWitness>,
    pub candidates_evaluated: u64,
    /// On-path allocation of the candidate profile.
    pub baseline: Allocation,
    pub baseline_profits: Vec<NetProfit>,
}

/// Best profit `i` can reach in a subgame, over every allocation the rule allows.
fn best_subgame_profit(
    e: &Economy,
    profile: &MenuProfile,
    pref: &GoodPreference,
    policy: &Policy,
    rule: TieBreakRule,
    i: usize,
    tol: f64,
) -> Result<Option<(f64, Allocation)>> {
    let mut best: Option<(f64, Allocation)> = None;
    for a in allocations(e, profile, pref, rule, tol, SELECTION_LIMIT)? {
        if let NetProfit::Profit(p) = intermediary_profit(e, &a, policy, i) {
            if best.as_ref().map_or(true, |(b, _)| p > *b) {
                best = Some((p, a));
            }
        }
    }
    Ok(best)
}

/// On-path allocation and per-intermediary profits of a profile.
pub fn settle(
    e: &Economy,
    profile: &MenuProfile,
    pref: &GoodPreference,
    policy: &Policy,
    rule: TieBreakRule,
    tol: f64,
) -> (Allocation, Vec<NetProfit>) {
    let a = allocate(e, profile, pref, rule.on_path(), tol);
    let profits = (0..profile.intermediaries())
        .map(|i| intermediary_profit(e, &a, policy, i))
        .collect();
    (a, profits)
}

/// Searches every unilateral menu change on the grid for a profitable one.
///
/// On the candidate profile agents follow `rule.on_path()`; in deviation
/// subgames they follow `rule`. Among profitable deviations the largest gain
/// wins, then the lowest deviator index, then the earliest menu (smaller
/// menus first, then by good and price).
pub fn deviation_search(
    e: &Economy,
    pref: &GoodPreference,
    policy: &Policy,
    profile: &MenuProfile,
    rule: TieBreakRule,
    cfg: &SearchConfig,
) -> Result<DeviationSearch> {
    let bundles = cfg.candidate_bundles(e);
    let space = MenuSpace::new(bundles.len(), cfg.max_menu_size);
    let n_int = profile.intermediaries();
    let total = space.len() * n_int as u128;
    if total > cfg.candidate_limit {
        return Err(Error::SearchSpace {
            candidates: total,
            limit: cfg.candidate_limit,
            hint: "coarsen --grid-step, narrow --grid-lo/--grid-hi or lower --max-menu-size".into(),
        });
    }
    let (baseline, baseline_profits) = settle(e, profile, pref, policy, rule, cfg.tol);

    type Found = (f64, usize, u128, f64);
    let pick = |a: Option<Found>, b: Option<Found>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let ord = y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2));
            Some(if ord.is_le() { x } else { y })
        }
    };
    let evaluate = |idx: u128| -> Result<(bool, Option<Found>)> {
        let i = (idx / space.len()) as usize;
        let rank = idx % space.len();
        let menu: Vec<Offer> = space.menu(rank).into_iter().map(|j| bundles[j]).collect();
        if same_menu(&menu, &profile.menus[i], 1e-12) {
            return Ok((false, None));
        }
        let deviated = profile.with_menu(i, menu);
        let best = best_subgame_profit(e, &deviated, pref, policy, rule, i, cfg.tol)?;
        let found = best.and_then(|(p, _)| match &baseline_profits[i] {
            NetProfit::Profit(b) => (p - b > cfg.dev_tol).then_some((p - b, i, rank, p)),
            NetProfit::Violation(_) => Some((p, i, rank, p)),
        });
        Ok((true, found))
    };

    let pool = cfg.pool()?;
    let (evaluated, best) = pool.install(|| {
        (0..total as u64)
            .into_par_iter()
            .map(|idx| evaluate(idx as u128).map(|(ev, f)| (ev as u64, f)))
            .try_reduce(|| (0, None), |a, b| Ok((a.0 + b.0, pick(a.1, b.1))))
    })?;

    let witness = match best {
        None => None,
        Some((gain, i, rank, p)) => {
            let menu: Vec<Offer> = space.menu(rank).into_iter().map(|j| bundles[j]).collect();
            let deviated = profile.with_menu(i, menu.clone());
            let (_, allocation) = best_subgame_profit(e, &deviated, pref, policy, rule, i, cfg.tol)?
                .expect("profitable deviation has a non-violating allocation");
            Some(DeviationWitness {
                deviator: i,
                menu,
                profit_gain: gain,
                deviation_profit: p,
                baseline_profit: baseline_profits[i].clone(),
                allocation,
            })
        }
    };
    Ok(DeviationSearch {
        witness,
        candidates_evaluated: evaluated,
        baseline,
        baseline_profits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub profile: MenuProfile,
    pub allocation: Allocation,
    pub profits: Vec<f64>,
    /// Index into the preferences passed to [`enumerate_equilibria`].
    pub preference: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumEnumeration {
    pub equilibria: Vec<Equilibrium>,
    pub menus_per_intermediary: u64,
    pub profiles_evaluated: u64,
}

fn profit_or_floor(p: &NetProfit) -> f64 {
    p.value().unwrap_or(f64::NEG_INFINITY)
}

/// Keeps the two largest values with their indices.
#[derive(Debug, Clone, Copy)]
struct Top2 {
    first: (f64, usize),
    second: f64,
}

impl Top2 {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut t = Top2 {
            first: (f64::NEG_INFINITY, usize::MAX),
            second: f64::NEG_INFINITY,
        };
        for (j, v) in values.enumerate() {
            if v > t.first.0 {
                t.second = t.first.0;
                t.first = (v, j);
            } else if v > t.second {
                t.second = v;
            }
        }
        t
    }

    /// Best value over indices other than `j`.
    fn excluding(&self, j: usize) -> f64 {
        if self.first.1 == j {
            self.second
        } else {
            self.first.0
        }
    }
}

/// All two-intermediary menu profiles on the grid from which no intermediary
/// gains more than `dev_tol` by switching menus. Each preference is tried in
/// turn as the agents' tie-break reference.
pub fn enumerate_equilibria(
    e: &Economy,
    prefs: &[GoodPreference],
    policy: &Policy,
    rule: TieBreakRule,
    cfg: &SearchConfig,
    intermediaries: usize,
) -> Result<EquilibriumEnumeration> {
    if intermediaries != 2 {
        return Err(Error::Unsupported("equilibrium enumeration handles exactly two intermediaries".into()));
    }
    if cfg.max_menu_size > 2 {
        return Err(Error::Unsupported("equilibrium enumeration handles menus of at most two bundles".into()));
    }
    let bundles = cfg.candidate_bundles(e);
    let space = MenuSpace::new(bundles.len(), cfg.max_menu_size);
    if space.len() > EQUILIBRIUM_MENU_LIMIT {
        return Err(Error::SearchSpace {
            candidates: space.len(),
            limit: EQUILIBRIUM_MENU_LIMIT,
            hint: "coarsen --grid-step or narrow --grid-lo/--grid-hi".into(),
        });
    }
    let m = space.len() as usize;
    let menus: Vec<Vec<Offer>> = (0..m as u128)
        .map(|r| space.menu(r).into_iter().map(|j| bundles[j]).collect())
        .collect();
    let off_differs = rule.on_path() != rule;
    let pool = cfg.pool()?;

    let mut equilibria = Vec::new();
    for (pi, pref) in prefs.iter().enumerate() {
        // rows[a][b] = (on-path profits, deviation-subgame profits) at (menus[a], menus[b])
        let rows: Vec<Vec<([f64; 2], [f64; 2])>> = pool.install(|| {
            (0..m)
                .into_par_iter()
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            let profile = MenuProfile::new(vec![menus[a].clone(), menus[b].clone()]);
                            let (_, on) = settle(e, &profile, pref, policy, rule, cfg.tol);
                            let on = [profit_or_floor(&on[0]), profit_or_floor(&on[1])];
                            let off = if off_differs {
                                let mut off = [f64::NEG_INFINITY; 2];
                                for (i, slot) in off.iter_mut().enumerate() {
                                    *slot = best_subgame_profit(e, &profile, pref, policy, rule, i, cfg.tol)?
                                        .map_or(f64::NEG_INFINITY, |(p, _)| p);
                                }
                                off
                            } else {
                                on
                            };
                            Ok((on, off))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })?;
        // Best response of intermediary 0 to each menu b, and of 1 to each a.
        let br0: Vec<Top2> = (0..m).map(|b| Top2::of((0..m).map(|a| rows[a][b].1[0]))).collect();
        let br1: Vec<Top2> = (0..m).map(|a| Top2::of((0..m).map(|b| rows[a][b].1[1]))).collect();
        for a in 0..m {
            for b in 0..m {
                let (on, _) = rows[a][b];
                let ok0 = on[0] >= br0[b].excluding(a) - cfg.dev_tol;
                let ok1 = on[1] >= br1[a].excluding(b) - cfg.dev_tol;
                if ok0 && ok1 {
                    let profile = MenuProfile::new(vec![menus[a].clone(), menus[b].clone()]);
                    let (allocation, _) = settle(e, &profile, pref, policy, rule, cfg.tol);
                    equilibria.push(Equilibrium {
                        profile,
                        allocation,
                        profits: on.to_vec(),
                        preference: pi,
                    });
                }
            }
        }
    }
    Ok(EquilibriumEnumeration {
        equilibria,
        menus_per_intermediary: m as u64,
        profiles_evaluated: (m * m * prefs.len()) as u64,
    })
}
