//! The economy-spec JSON document.
//!
//! ```json
//! {
//!   "types":   [{"name": "theta1", "mass": 0.8}, ...],
//!   "goods":   [{"name": "L", "vector": [1.0]}, ...],
//!   "utility": {"theta1": {"L": 10, "H": 14}, ...},
//!   "cost":    {"theta1": {"L": 5,  "H": 9},  ...},
//!   "target":  {"theta1": {"good": "L", "price": 10}, "theta3": "null"}
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::economy::{AgentType, Bundle, Economy, Good, SocialChoiceRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetEntry {
    Bundle { good: String, price: f64 },
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyDocument {
    pub types: Vec<AgentType>,
    pub goods: Vec<Good>,
    pub utility: BTreeMap<String, BTreeMap<String, f64>>,
    pub cost: BTreeMap<String, BTreeMap<String, f64>>,
    pub target: BTreeMap<String, Option<TargetEntry>>,
}

fn table(
    field: &str,
    rows: &BTreeMap<String, BTreeMap<String, f64>>,
    types: &[AgentType],
    goods: &[Good],
) -> Result<Vec<Vec<f64>>> {
    if let Some(extra) = rows.keys().find(|k| !types.iter().any(|t| &t.name == *k)) {
        return Err(Error::validation(format!("{field}.{extra}"), "unknown type"));
    }
    types
        .iter()
        .map(|t| {
            let row = rows
                .get(&t.name)
                .ok_or_else(|| Error::validation(format!("{field}.{}", t.name), "missing row"))?;
            if let Some(extra) = row.keys().find(|k| !goods.iter().any(|g| &g.name == *k)) {
                return Err(Error::validation(
                    format!("{field}.{}.{extra}", t.name),
                    "unknown good",
                ));
            }
            goods
                .iter()
                .map(|g| {
                    row.get(&g.name).copied().ok_or_else(|| {
                        Error::validation(format!("{field}.{}.{}", t.name, g.name), "missing entry")
                    })
                })
                .collect()
        })
        .collect()
}

impl EconomyDocument {
    pub fn into_model(self) -> Result<(Economy, SocialChoiceRule)> {
        let utility = table("utility", &self.utility, &self.types, &self.goods)?;
        let cost = table("cost", &self.cost, &self.types, &self.goods)?;
        let economy = Economy::new(self.types, self.goods, utility, cost)?;
        if let Some(extra) = self.target.keys().find(|k| economy.type_id(k).is_none()) {
            return Err(Error::validation(format!("target.{extra}"), "unknown type"));
        }
        let mut assignment = Vec::with_capacity(economy.type_count());
        for t in economy.types() {
            let field = format!("target.{}", t.name);
            let bundle = match self.target.get(&t.name) {
                None => return Err(Error::validation(field, "missing target bundle")),
                Some(None) => Bundle::Null,
                Some(Some(TargetEntry::Keyword(k))) if k == "null" => Bundle::Null,
                Some(Some(TargetEntry::Keyword(k))) => {
                    return Err(Error::validation(field, format!("expected a bundle or \"null\", found \"{k}\"")))
                }
                Some(Some(TargetEntry::Bundle { good, price })) => {
                    let g = economy
                        .good_id(good)
                        .ok_or_else(|| Error::validation(format!("{field}.good"), format!("unknown good `{good}`")))?;
                    Bundle::offer(g, *price)
                }
            };
            assignment.push(bundle);
        }
        let scr = SocialChoiceRule::new(&economy, assignment)?;
        Ok((economy, scr))
    }

    pub fn from_model(e: &Economy, scr: &SocialChoiceRule) -> Self {
        let rows = |tab: &[Vec<f64>]| -> BTreeMap<String, BTreeMap<String, f64>> {
            e.types()
                .iter()
                .zip(tab)
                .map(|(t, row)| {
                    let row = e
                        .goods()
                        .iter()
                        .zip(row)
                        .map(|(g, v)| (g.name.clone(), *v))
                        .collect();
                    (t.name.clone(), row)
                })
                .collect()
        };
        let target = e
            .type_ids()
            .map(|t| {
                let entry = match scr.bundle(t) {
                    Bundle::Null => TargetEntry::Keyword("null".into()),
                    Bundle::Offer(o) => TargetEntry::Bundle {
                        good: e.good_name(o.good).to_string(),
                        price: o.price,
                    },
                };
                (e.type_name(t).to_string(), Some(entry))
            })
            .collect();
        EconomyDocument {
            types: e.types().to_vec(),
            goods: e.goods().to_vec(),
            utility: rows(e.utility_table()),
            cost: rows(e.cost_table()),
            target,
        }
    }
}

/// Parses and validates an economy document.
pub fn load_economy(text: &str) -> Result<(Economy, SocialChoiceRule)> {
    let doc: EconomyDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_model()
}

/// Serializes an economy and target rule as a pretty-printed document.
pub fn economy_to_json(e: &Economy, scr: &SocialChoiceRule) -> String {
    serde_json::to_string_pretty(&EconomyDocument::from_model(e, scr)).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{GoodId, TypeId};
    use crate::fixtures;

    const E1: &str = include_str!("../fixtures/e1.json");

    #[test]
    fn loads_e1_fixture_file() {
        let (e, scr) = load_economy(E1).unwrap();
        assert_eq!((e, scr), fixtures::e1());
    }

    #[test]
    fn fixture_files_match_builders() {
        let e2 = load_economy(include_str!("../fixtures/e2.json")).unwrap();
        let e3 = load_economy(include_str!("../fixtures/e3.json")).unwrap();
        assert_eq!(e2, fixtures::e2());
        assert_eq!(e3, fixtures::e3());
    }

    #[test]
    fn round_trips_through_json() {
        let (e, scr) = fixtures::e3();
        let text = economy_to_json(&e, &scr);
        assert_eq!(load_economy(&text).unwrap(), (e, scr));
    }

    #[test]
    fn null_target_forms() {
        let text = E1.replace(r#"{ "good": "L", "price": 10 }"#, r#""null""#);
        let (_, scr) = load_economy(&text).unwrap();
        assert!(scr.bundle(TypeId(0)).is_null());
        let text = E1.replace(r#"{ "good": "L", "price": 10 }"#, "null");
        let (_, scr) = load_economy(&text).unwrap();
        assert!(scr.bundle(TypeId(0)).is_null());
        assert_eq!(scr.bundle(TypeId(1)).good(), Some(GoodId(1)));
    }

    #[test]
    fn reports_offending_fields() {
        let err = load_economy("{").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));

        let text = E1.replace(r#""mass": 0.8"#, r#""mass": 0.5"#).replace(r#""mass": 0.2"#, r#""mass": 0.6"#);
        assert_eq!(
            load_economy(&text).unwrap_err().to_string(),
            "invalid types: masses sum to 1.1"
        );

        let text = E1.replace(r#""good": "H""#, r#""good": "Z""#);
        let err = load_economy(&text).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "target.theta2.good"));

        let text = E1.replace(r#""L": 10, "H": 14"#, r#""L": 10"#);
        let err = load_economy(&text).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "utility.theta1.H"));
    }
}
