//! Finite-type quasi-linear economies and target social choice rules.
//!
//! Agents of type `θ` get `v(x, θ) - y` from a bundle `(x, y)`; an
//! intermediary serving that bundle earns `y - c(x, θ)`. The null bundle is
//! worth zero to everyone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of types and on distribution weights.
pub const MASS_TOL: f64 = 1e-9;

/// Default absolute tolerance for comparing utilities and profits.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoodId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentType {
    pub name: String,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Good {
    pub name: String,
    #[serde(default)]
    pub vector: Vec<f64>,
}

/// A non-null bundle: a good sold at a price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    pub good: GoodId,
    pub price: f64,
}

impl Offer {
    pub fn new(good: GoodId, price: f64) -> Self {
        Offer { good, price }
    }

    pub fn shifted(self, d: f64) -> Self {
        Offer {
            good: self.good,
            price: self.price + d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bundle {
    Null,
    Offer(Offer),
}

impl Bundle {
    pub fn offer(good: GoodId, price: f64) -> Self {
        Bundle::Offer(Offer::new(good, price))
    }

    pub fn good(&self) -> Option<GoodId> {
        match self {
            Bundle::Null => None,
            Bundle::Offer(o) => Some(o.good),
        }
    }

    /// Price paid; zero for the null bundle.
    pub fn price(&self) -> f64 {
        match self {
            Bundle::Null => 0.0,
            Bundle::Offer(o) => o.price,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Bundle::Null)
    }

    /// Same good, price moved by `d`. The null bundle is left alone.
    pub fn shifted(self, d: f64) -> Self {
        match self {
            Bundle::Null => Bundle::Null,
            Bundle::Offer(o) => Bundle::Offer(o.shifted(d)),
        }
    }

    /// Equal goods and prices within `tol`.
    pub fn same_as(&self, other: &Bundle, tol: f64) -> bool {
        match (self, other) {
            (Bundle::Null, Bundle::Null) => true,
            (Bundle::Offer(a), Bundle::Offer(b)) => a.good == b.good && (a.price - b.price).abs() <= tol,
            _ => false,
        }
    }
}

/// Validated economy. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Economy {
    types: Vec<AgentType>,
    goods: Vec<Good>,
    utility: Vec<Vec<f64>>,
    cost: Vec<Vec<f64>>,
}

impl Economy {
    /// Builds an economy from tables indexed `[type][good]`.
    pub fn new(
        types: Vec<AgentType>,
        goods: Vec<Good>,
        utility: Vec<Vec<f64>>,
        cost: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::validation("types", "at least one type is required"));
        }
        if goods.is_empty() {
            return Err(Error::validation("goods", "at least one good is required"));
        }
        check_unique(types.iter().map(|t| t.name.as_str()), "types")?;
        check_unique(goods.iter().map(|g| g.name.as_str()), "goods")?;
        for t in &types {
            if !(t.mass.is_finite() && t.mass > 0.0 && t.mass <= 1.0) {
                return Err(Error::validation(
                    format!("types.{}.mass", t.name),
                    format!("mass {} is outside (0, 1]", t.mass),
                ));
            }
        }
        let total: f64 = types.iter().map(|t| t.mass).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::validation(
                "types",
                format!("masses sum to {}", round_for_display(total)),
            ));
        }
        let dim = goods[0].vector.len();
        if let Some(g) = goods.iter().find(|g| g.vector.len() != dim) {
            return Err(Error::validation(
                format!("goods.{}.vector", g.name),
                format!("dimension {} differs from {}", g.vector.len(), dim),
            ));
        }
        for (label, table) in [("utility", &utility), ("cost", &cost)] {
            if table.len() != types.len() {
                return Err(Error::validation(
                    label,
                    format!("expected {} rows, found {}", types.len(), table.len()),
                ));
            }
            for (t, row) in types.iter().zip(table.iter()) {
                if row.len() != goods.len() {
                    return Err(Error::validation(
                        format!("{label}.{}", t.name),
                        format!("expected {} entries, found {}", goods.len(), row.len()),
                    ));
                }
                if let Some((g, v)) = goods.iter().zip(row).find(|(_, v)| !v.is_finite()) {
                    return Err(Error::validation(
                        format!("{label}.{}.{}", t.name, g.name),
                        format!("entry {v} is not finite"),
                    ));
                }
            }
        }
        Ok(Economy {
            types,
            goods,
            utility,
            cost,
        })
    }

    pub fn types(&self) -> &[AgentType] {
        &self.types
    }

    pub fn goods(&self) -> &[Good] {
        &self.goods
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn good_count(&self) -> usize {
        self.goods.len()
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.types.len()).map(TypeId)
    }

    pub fn good_ids(&self) -> impl Iterator<Item = GoodId> + '_ {
        (0..self.goods.len()).map(GoodId)
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.types.iter().position(|t| t.name == name).map(TypeId)
    }

    pub fn good_id(&self, name: &str) -> Option<GoodId> {
        self.goods.iter().position(|g| g.name == name).map(GoodId)
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.types[t.0].name
    }

    pub fn good_name(&self, g: GoodId) -> &str {
        &self.goods[g.0].name
    }

    pub fn mass(&self, t: TypeId) -> f64 {
        self.types[t.0].mass
    }

    /// `v(x, θ)`.
    pub fn value(&self, g: GoodId, t: TypeId) -> f64 {
        self.utility[t.0][g.0]
    }

    /// `c(x, θ)`.
    pub fn cost(&self, g: GoodId, t: TypeId) -> f64 {
        self.cost[t.0][g.0]
    }

    /// Consumption value of an optional good; zero for the null bundle.
    pub fn value_of(&self, g: Option<GoodId>, t: TypeId) -> f64 {
        g.map_or(0.0, |g| self.value(g, t))
    }

    pub fn utility_table(&self) -> &[Vec<f64>] {
        &self.utility
    }

    pub fn cost_table(&self) -> &[Vec<f64>] {
        &self.cost
    }

    fn check_bundle(&self, b: &Bundle, t: TypeId) -> Result<()> {
        if t.0 >= self.types.len() {
            return Err(Error::UnknownType(t.0));
        }
        match b.good() {
            Some(g) if g.0 >= self.goods.len() => Err(Error::UnknownGood(g.0)),
            _ => Ok(()),
        }
    }

    /// `u(x, y, θ) = v(x, θ) - y`, zero for the null bundle.
    pub fn utility_of(&self, b: &Bundle, t: TypeId) -> Result<f64> {
        self.check_bundle(b, t)?;
        Ok(self.utility_unchecked(b, t))
    }

    /// `π(x, y, θ) = y - c(x, θ)`, zero for the null bundle.
    pub fn profit_of(&self, b: &Bundle, t: TypeId) -> Result<f64> {
        self.check_bundle(b, t)?;
        Ok(self.profit_unchecked(b, t))
    }

    pub(crate) fn utility_unchecked(&self, b: &Bundle, t: TypeId) -> f64 {
        match b {
            Bundle::Null => 0.0,
            Bundle::Offer(o) => self.value(o.good, t) - o.price,
        }
    }

    pub(crate) fn profit_unchecked(&self, b: &Bundle, t: TypeId) -> f64 {
        match b {
            Bundle::Null => 0.0,
            Bundle::Offer(o) => o.price - self.cost(o.good, t),
        }
    }

    /// Intermediary profit does not depend on the agent's type.
    pub fn has_private_values(&self, tol: f64) -> bool {
        self.good_ids().all(|g| {
            let first = self.cost(g, TypeId(0));
            self.type_ids().all(|t| (self.cost(g, t) - first).abs() <= tol)
        })
    }
}

fn check_unique<'a>(names: impl Iterator<Item = &'a str>, field: &str) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if n.is_empty() {
            return Err(Error::validation(field, "empty name"));
        }
        if !seen.insert(n) {
            return Err(Error::validation(field, format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

pub(crate) fn round_for_display(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Which good each type consumes; `None` is the null bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionRule(Vec<Option<GoodId>>);

impl ConsumptionRule {
    pub fn new(goods: Vec<Option<GoodId>>) -> Self {
        ConsumptionRule(goods)
    }

    /// Builds a rule from good names, one per type in economy order.
    pub fn from_names(e: &Economy, names: &[&str]) -> Result<Self> {
        if names.len() != e.type_count() {
            return Err(Error::validation(
                "consumption",
                format!("expected {} entries, found {}", e.type_count(), names.len()),
            ));
        }
        names
            .iter()
            .map(|n| {
                if *n == "null" {
                    Ok(None)
                } else {
                    e.good_id(n)
                        .map(Some)
                        .ok_or_else(|| Error::validation("consumption", format!("unknown good `{n}`")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(ConsumptionRule)
    }

    pub fn good(&self, t: TypeId) -> Option<GoodId> {
        self.0[t.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Option<GoodId>] {
        &self.0
    }
}

/// Target social choice rule `θ ↦ (x̂(θ), ŷ(θ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialChoiceRule {
    assignment: Vec<Bundle>,
}

impl SocialChoiceRule {
    pub fn new(e: &Economy, assignment: Vec<Bundle>) -> Result<Self> {
        if assignment.len() != e.type_count() {
            return Err(Error::validation(
                "target",
                format!(
                    "expected one bundle per type ({}), found {}",
                    e.type_count(),
                    assignment.len()
                ),
            ));
        }
        for (t, b) in assignment.iter().enumerate() {
            if let Bundle::Offer(o) = b {
                if o.good.0 >= e.good_count() {
                    return Err(Error::validation(
                        format!("target.{}", e.types[t].name),
                        format!("unknown good index {}", o.good.0),
                    ));
                }
                if !o.price.is_finite() {
                    return Err(Error::validation(
                        format!("target.{}.price", e.types[t].name),
                        "price is not finite",
                    ));
                }
            }
        }
        Ok(SocialChoiceRule { assignment })
    }

    pub fn bundle(&self, t: TypeId) -> Bundle {
        self.assignment[t.0]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.assignment
    }

    pub fn consumption(&self) -> ConsumptionRule {
        ConsumptionRule(self.assignment.iter().map(Bundle::good).collect())
    }

    /// All prices moved by the same constant.
    pub fn shifted(&self, d: f64) -> Self {
        SocialChoiceRule {
            assignment: self.assignment.iter().map(|b| b.shifted(d)).collect(),
        }
    }

    /// Replaces one type's bundle.
    pub fn with_bundle(&self, t: TypeId, b: Bundle) -> Self {
        let mut assignment = self.assignment.clone();
        assignment[t.0] = b;
        SocialChoiceRule { assignment }
    }

    /// Distinct target bundles in type order; the menu every intermediary
    /// posts in the target profile.
    pub fn target_menu(&self, tol: f64) -> Vec<Offer> {
        let mut menu: Vec<Offer> = Vec::new();
        for b in &self.assignment {
            if let Bundle::Offer(o) = b {
                if !menu
                    .iter()
                    .any(|m| m.good == o.good && (m.price - o.price).abs() <= tol)
                {
                    menu.push(*o);
                }
            }
        }
        menu
    }

    /// `ŷ(x)`, the unique target price of a good in the image.
    pub fn target_price(&self, e: &Economy, x: GoodId, tol: f64) -> Result<f64> {
        let mut price: Option<f64> = None;
        for b in &self.assignment {
            if let Bundle::Offer(o) = b {
                if o.good == x {
                    match price {
                        None => price = Some(o.price),
                        Some(p) if (p - o.price).abs() > tol => {
                            return Err(Error::AmbiguousPrice {
                                good: e.good_name(x).to_string(),
                                first: p,
                                second: o.price,
                            })
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        price.ok_or_else(|| Error::NotInImage(e.good_name(x).to_string()))
    }

    /// Total mass of types assigned a non-null good.
    pub fn active_mass(&self, e: &Economy) -> f64 {
        e.type_ids()
            .filter(|t| !self.bundle(*t).is_null())
            .map(|t| e.mass(t))
            .sum()
    }
}

/// A probability distribution over the economy's goods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodDistribution {
    weights: Vec<f64>,
}

impl GoodDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(0.0..=1.0 + MASS_TOL).contains(w)) {
            return Err(Error::validation("distribution", "weights must lie in [0, 1]"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::validation(
                "distribution",
                format!("weights sum to {}", round_for_display(total)),
            ));
        }
        Ok(GoodDistribution { weights })
    }

    pub fn weight(&self, g: GoodId) -> f64 {
        self.weights[g.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Goods carrying positive weight.
    pub fn support(&self) -> Vec<GoodId> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > MASS_TOL)
            .map(|(i, _)| GoodId(i))
            .collect()
    }
}

/// `π̂(x)`: mass-weighted average profit from serving `(x, ŷ(x))` to the
/// types targeted at `x`.
pub fn target_profit_of_good(e: &Economy, scr: &SocialChoiceRule, x: GoodId) -> Result<f64> {
    if x.0 >= e.good_count() {
        return Err(Error::UnknownGood(x.0));
    }
    let price = scr.target_price(e, x, DEFAULT_TOL)?;
    let (mut mass, mut profit) = (0.0, 0.0);
    for t in e.type_ids() {
        if scr.bundle(t).good() == Some(x) {
            mass += e.mass(t);
            profit += e.mass(t) * (price - e.cost(x, t));
        }
    }
    Ok(profit / mass)
}

/// `P̂_x`: share of the active population targeted at each good.
pub fn target_good_distribution(e: &Economy, scr: &SocialChoiceRule) -> Result<GoodDistribution> {
    let active = scr.active_mass(e);
    if active <= 0.0 {
        return Err(Error::NoActiveTypes);
    }
    let mut weights = vec![0.0; e.good_count()];
    for t in e.type_ids() {
        if let Some(g) = scr.bundle(t).good() {
            weights[g.0] += e.mass(t) / active;
        }
    }
    GoodDistribution::new(weights)
}

/// The target measure on goods (unnormalized, total = active mass).
pub fn target_measure(e: &Economy, scr: &SocialChoiceRule) -> Vec<f64> {
    let mut masses = vec![0.0; e.good_count()];
    for t in e.type_ids() {
        if let Some(g) = scr.bundle(t).good() {
            masses[g.0] += e.mass(t);
        }
    }
    masses
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn utility_and_profit_on_fixtures() {
        let (e1, _) = fixtures::e1();
        let (e2, _) = fixtures::e2();
        let l = e1.good_id("L").unwrap();
        let h = e1.good_id("H").unwrap();
        let (t1, t2) = (TypeId(0), TypeId(1));
        assert_eq!(e1.utility_of(&Bundle::offer(l, 10.0), t1).unwrap(), 0.0);
        assert_eq!(e1.utility_of(&Bundle::offer(h, 18.0), t2).unwrap(), 2.0);
        assert_eq!(e2.profit_of(&Bundle::offer(l, 10.0), t2).unwrap(), 7.0);
        assert_eq!(e2.profit_of(&Bundle::offer(l, 10.0), t1).unwrap(), 5.0);
        for t in [t1, t2] {
            assert_eq!(e1.utility_of(&Bundle::Null, t).unwrap(), 0.0);
            assert_eq!(e1.profit_of(&Bundle::Null, t).unwrap(), 0.0);
        }
        assert_eq!(
            e1.utility_of(&Bundle::offer(GoodId(7), 1.0), t1),
            Err(Error::UnknownGood(7))
        );
    }

    #[test]
    fn target_profit_per_good() {
        let (e1, s1) = fixtures::e1();
        let (e2, s2) = fixtures::e2();
        assert_eq!(target_profit_of_good(&e2, &s2, GoodId(0)).unwrap(), 5.0);
        assert_eq!(target_profit_of_good(&e2, &s2, GoodId(1)).unwrap(), 11.0);
        assert_eq!(target_profit_of_good(&e1, &s1, GoodId(1)).unwrap(), 9.0);
    }

    #[test]
    fn target_profit_rejects_off_image_and_ambiguous_prices() {
        let (e1, s1) = fixtures::e1();
        let pooled = SocialChoiceRule::new(&e1, vec![Bundle::offer(GoodId(0), 10.0); 2]).unwrap();
        assert!(matches!(
            target_profit_of_good(&e1, &pooled, GoodId(1)),
            Err(Error::NotInImage(_))
        ));
        let ambiguous = s1.with_bundle(TypeId(1), Bundle::offer(GoodId(0), 9.0));
        assert!(matches!(
            target_profit_of_good(&e1, &ambiguous, GoodId(0)),
            Err(Error::AmbiguousPrice { .. })
        ));
    }

    #[test]
    fn target_distribution_matches_population_shares() {
        let (e1, s1) = fixtures::e1();
        let d = target_good_distribution(&e1, &s1).unwrap();
        assert!((d.weight(GoodId(0)) - 0.8).abs() < MASS_TOL);
        assert!((d.weight(GoodId(1)) - 0.2).abs() < MASS_TOL);
        let (e3, s3) = fixtures::e3();
        let d = target_good_distribution(&e3, &s3).unwrap();
        assert_eq!(d.weights(), &[0.5, 0.5]);

        let single = Economy::new(
            vec![AgentType { name: "a".into(), mass: 1.0 }],
            vec![Good { name: "x".into(), vector: vec![] }],
            vec![vec![3.0]],
            vec![vec![1.0]],
        )
        .unwrap();
        let rule = SocialChoiceRule::new(&single, vec![Bundle::offer(GoodId(0), 2.0)]).unwrap();
        assert_eq!(target_good_distribution(&single, &rule).unwrap().weights(), &[1.0]);
        let none = SocialChoiceRule::new(&single, vec![Bundle::Null]).unwrap();
        assert_eq!(target_good_distribution(&single, &none), Err(Error::NoActiveTypes));
    }

    #[test]
    fn masses_must_sum_to_one() {
        let err = Economy::new(
            vec![
                AgentType { name: "a".into(), mass: 0.5 },
                AgentType { name: "b".into(), mass: 0.6 },
            ],
            vec![Good { name: "x".into(), vector: vec![] }],
            vec![vec![1.0], vec![1.0]],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "invalid types: masses sum to 1.1");
    }

    #[test]
    fn empty_goods_rejected() {
        let err = Economy::new(
            vec![AgentType { name: "a".into(), mass: 1.0 }],
            vec![],
            vec![vec![]],
            vec![vec![]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "goods"));
    }

    #[test]
    fn private_values_detection() {
        assert!(fixtures::e1().0.has_private_values(DEFAULT_TOL));
        assert!(!fixtures::e2().0.has_private_values(DEFAULT_TOL));
    }
}
