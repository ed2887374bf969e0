//! JSON encodings of model objects, and the menu-profile document read by
//! `--profile`.
//!
//! ```json
//! {
//!   "menus": [[{"good": "H", "price": 13}, {"good": "L", "price": 9}], [...]],
//!   "preference": {"theta1": {"H": 1.0}, "theta2": {"L": 1.0}}
//! }
//! ```
//!
//! `preference` is optional; by default every type leans toward its target good.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use intermed::game::{Allocation, DeviationWitness, GoodPreference, MenuProfile, NetProfit};
use intermed::{Bundle, Economy, Offer, SocialChoiceRule, TypeId};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OfferDoc {
    pub good: String,
    pub price: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub menus: Vec<Vec<OfferDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<BTreeMap<String, BTreeMap<String, f64>>>,
}

impl ProfileDocument {
    pub fn into_model(self, e: &Economy, scr: &SocialChoiceRule) -> Result<(MenuProfile, GoodPreference)> {
        let good = |name: &str| e.good_id(name).ok_or_else(|| anyhow!("profile names unknown good `{name}`"));
        let menus = self
            .menus
            .iter()
            .map(|m| m.iter().map(|o| Ok(Offer::new(good(&o.good)?, o.price))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if menus.is_empty() {
            bail!("profile has no intermediaries");
        }
        let pref = match self.preference {
            None => GoodPreference::from_target(scr),
            Some(map) => {
                if let Some(extra) = map.keys().find(|k| e.type_id(k).is_none()) {
                    bail!("preference names unknown type `{extra}`");
                }
                let per_type = e
                    .types()
                    .iter()
                    .map(|t| {
                        map.get(&t.name)
                            .map(|row| row.iter().map(|(g, w)| Ok((good(g)?, *w))).collect::<Result<Vec<_>>>())
                            .unwrap_or_else(|| Ok(Vec::new()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GoodPreference::new(per_type)
            }
        };
        Ok((MenuProfile::new(menus), pref))
    }

    pub fn from_model(e: &Economy, profile: &MenuProfile, pref: Option<&GoodPreference>) -> Self {
        ProfileDocument {
            menus: profile.menus.iter().map(|m| m.iter().map(|o| offer_doc(e, o)).collect()).collect(),
            preference: pref.map(|p| {
                e.type_ids()
                    .map(|t| {
                        let row = p.for_type(t).iter().map(|(g, w)| (e.good_name(*g).to_string(), *w)).collect();
                        (e.type_name(t).to_string(), row)
                    })
                    .collect()
            }),
        }
    }
}

pub fn load_profile(path: &str, e: &Economy, scr: &SocialChoiceRule) -> Result<(MenuProfile, GoodPreference)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
    let doc: ProfileDocument = serde_json::from_str(&text).with_context(|| format!("{path} is not a profile document"))?;
    doc.into_model(e, scr)
}

fn offer_doc(e: &Economy, o: &Offer) -> OfferDoc {
    OfferDoc { good: e.good_name(o.good).to_string(), price: o.price }
}

pub fn offer(e: &Economy, o: &Offer) -> Value {
    json!({ "good": e.good_name(o.good), "price": o.price })
}

pub fn menu(e: &Economy, m: &[Offer]) -> Value {
    Value::Array(m.iter().map(|o| offer(e, o)).collect())
}

pub fn bundle(e: &Economy, b: &Bundle) -> Value {
    match b {
        Bundle::Null => Value::String("null".into()),
        Bundle::Offer(o) => offer(e, o),
    }
}

pub fn types(e: &Economy, ts: &[TypeId]) -> Value {
    Value::Array(ts.iter().map(|t| Value::String(e.type_name(*t).into())).collect())
}

/// Map from type name to a per-type number.
pub fn per_type(e: &Economy, values: &[f64]) -> Value {
    Value::Object(
        e.type_ids()
            .map(|t| (e.type_name(t).to_string(), num(values[t.0])))
            .collect::<Map<_, _>>(),
    )
}

/// Map from good name to a per-good number.
pub fn per_good(e: &Economy, values: &[f64]) -> Value {
    Value::Object(
        e.good_ids()
            .map(|g| (e.good_name(g).to_string(), num(values[g.0])))
            .collect::<Map<_, _>>(),
    )
}

/// Drops the sign of negative zero, which break-even sums often produce.
pub fn num(v: f64) -> Value {
    json!(v + 0.0)
}

pub fn net_profit(p: &NetProfit) -> Value {
    match p {
        NetProfit::Profit(v) => num(*v),
        NetProfit::Violation(r) => json!({ "violation": r }),
    }
}

pub fn allocation(e: &Economy, a: &Allocation) -> Value {
    let shares: Vec<Value> = a
        .shares
        .iter()
        .map(|s| {
            json!({
                "type": e.type_name(s.agent),
                "intermediary": s.intermediary,
                "good": e.good_name(s.offer.good),
                "price": s.offer.price,
                "mass": s.mass,
            })
        })
        .collect();
    json!({
        "shares": shares,
        "utilities": per_type(e, &a.utilities),
        "unserved": per_type(e, &a.null_mass),
    })
}

pub fn deviation(e: &Economy, w: &DeviationWitness) -> Value {
    json!({
        "deviator": w.deviator,
        "menu": menu(e, &w.menu),
        "profit_gain": w.profit_gain,
        "deviation_profit": w.deviation_profit,
        "baseline_profit": net_profit(&w.baseline_profit),
        "allocation": allocation(e, &w.allocation),
    })
}

/// Parses `L=5,H=6.8` into a fee per good; every good must be listed.
pub fn parse_fees(e: &Economy, spec: &str) -> Result<Vec<f64>> {
    let mut fees = vec![None; e.good_count()];
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(|| anyhow!("fee `{part}` is not GOOD=VALUE"))?;
        let g = e.good_id(name.trim()).ok_or_else(|| anyhow!("unknown good `{name}` in --fees"))?;
        fees[g.0] = Some(value.trim().parse::<f64>().with_context(|| format!("bad fee `{value}`"))?);
    }
    e.good_ids()
        .map(|g| fees[g.0].ok_or_else(|| anyhow!("--fees is missing good `{}`", e.good_name(g))))
        .collect()
}
