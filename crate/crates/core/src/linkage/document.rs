//! JSON linkage documents.
//!
//! ```json
//! {
//!   "name": "pair",
//!   "bodies": ["A", "B"],
//!   "joints": [
//!     {"id": "a", "kind": "revolute", "from": "A", "to": "B", "screws": [["0","0","1","0","-1","0"]]},
//!     {"id": "b", "kind": "revolute", "from": "A", "to": "B", "screws": [["0","0","1","0","-1","0"]]}
//!   ]
//! }
//! ```
//!
//! Optional keys: `root` (body to grow the spanning tree from), `tree` (joint
//! ids), `cycles` (`[{"joints": [{"id", "sub", "sign"}]}]`, `sub` 1-based),
//! `q0` (joint id to one rational per sub-joint) and `current_screws` (joint id
//! to exact screws at `q0`). Rationals are strings `[-]digits[/digits]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{CycleSpec, Joint, JointKind, Linkage, LinkageError};
use crate::scalar::{parse_rational, Q};
use crate::screw::Twist;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkageDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub bodies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    pub joints: Vec<JointDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<Vec<CycleDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_screws: Option<BTreeMap<String, Vec<Vec<String>>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDocument {
    pub id: String,
    pub kind: JointKind,
    pub from: String,
    pub to: String,
    pub screws: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleDocument {
    pub joints: Vec<CycleEntryDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleEntryDocument {
    pub id: String,
    #[serde(default = "one")]
    pub sub: usize,
    pub sign: i64,
}

fn one() -> usize {
    1
}

/// Parses and validates a linkage document.
pub fn parse_linkage(text: &str) -> Result<Linkage, LinkageError> {
    let doc: LinkageDocument = serde_json::from_str(text).map_err(|e| LinkageError::Syntax {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: strip_position(&e.to_string()),
    })?;
    doc.build()
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn rational(location: String, s: &str) -> Result<Q, LinkageError> {
    parse_rational(s).map_err(|_| LinkageError::MalformedRational { location, literal: s.to_string() })
}

fn twist(location: &str, entries: &[String]) -> Result<Twist<Q>, LinkageError> {
    if entries.len() != 6 {
        return Err(LinkageError::Syntax {
            location: location.to_string(),
            message: format!("a screw needs 6 entries, found {}", entries.len()),
        });
    }
    let mut c: [Q; 6] = Default::default();
    for (k, s) in entries.iter().enumerate() {
        c[k] = rational(format!("{location}[{k}]"), s)?;
    }
    Ok(Twist::from_array(c))
}

impl LinkageDocument {
    pub fn build(&self) -> Result<Linkage, LinkageError> {
        let mut body_ix = BTreeMap::new();
        for (i, b) in self.bodies.iter().enumerate() {
            if body_ix.insert(b.as_str(), i).is_some() {
                return Err(LinkageError::Duplicate { location: format!("bodies[{i}]"), id: b.clone() });
            }
        }
        let body = |loc: String, name: &str| {
            body_ix.get(name).copied().ok_or_else(|| LinkageError::UnknownBody { location: loc, name: name.to_string() })
        };

        let mut joints = Vec::with_capacity(self.joints.len());
        let mut joint_ix: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, j) in self.joints.iter().enumerate() {
            let loc = format!("joints[{i}]");
            if joint_ix.insert(j.id.as_str(), i).is_some() {
                return Err(LinkageError::Duplicate { location: loc, id: j.id.clone() });
            }
            let screws = j
                .screws
                .iter()
                .enumerate()
                .map(|(k, s)| twist(&format!("{loc}.screws[{k}]"), s))
                .collect::<Result<Vec<_>, _>>()?;
            joints.push(Joint {
                id: j.id.clone(),
                kind: j.kind,
                from: body(format!("{loc}.from"), &j.from)?,
                to: body(format!("{loc}.to"), &j.to)?,
                screws,
            });
        }

        let tree = self
            .tree
            .as_ref()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(k, id)| {
                        joint_ix.get(id.as_str()).copied().ok_or_else(|| LinkageError::UnknownJoint {
                            location: format!("tree[{k}]"),
                            id: id.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let root = match &self.root {
            Some(r) => body("root".into(), r)?,
            None => 0,
        };

        let cycles = self
            .cycles
            .as_ref()
            .map(|cs| {
                cs.iter()
                    .enumerate()
                    .map(|(l, c)| {
                        let entries = c
                            .joints
                            .iter()
                            .enumerate()
                            .map(|(k, e)| {
                                let location = format!("cycles[{l}].joints[{k}]");
                                let j = *joint_ix.get(e.id.as_str()).ok_or_else(|| {
                                    LinkageError::UnknownJointInCycle { location: location.clone(), id: e.id.clone() }
                                })?;
                                if e.sign != 1 && e.sign != -1 {
                                    return Err(LinkageError::BadSign { location, sign: e.sign });
                                }
                                if e.sub == 0 || e.sub > joints[j].screws.len() {
                                    return Err(LinkageError::BadSubIndex { location, id: e.id.clone(), sub: e.sub });
                                }
                                Ok((j, e.sub - 1, e.sign as i8))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(CycleSpec { entries })
                    })
                    .collect::<Result<Vec<_>, LinkageError>>()
            })
            .transpose()?;

        let mut link = Linkage::new(self.name.clone().unwrap_or_default(), self.bodies.clone(), joints, tree, root, cycles)?;

        if let Some(q0) = &self.q0 {
            for (id, values) in q0 {
                let loc = format!("q0.{id}");
                let j = *joint_ix.get(id.as_str()).ok_or_else(|| LinkageError::UnknownJoint { location: loc.clone(), id: id.clone() })?;
                let subs = link.joints[j].screws.len();
                if values.len() != subs {
                    return Err(LinkageError::BadConfiguration {
                        location: loc,
                        reason: format!("joint {id:?} has {subs} coordinates, found {}", values.len()),
                    });
                }
                for (k, v) in values.iter().enumerate() {
                    let c = link.coord_index(j, k).expect("sub exists");
                    link.q0[c] = rational(format!("{loc}[{k}]"), v)?;
                }
            }
        }

        if let Some(cur) = &self.current_screws {
            let mut screws: Vec<Option<Twist<Q>>> = vec![None; link.n()];
            for (id, list) in cur {
                let loc = format!("current_screws.{id}");
                let j = *joint_ix.get(id.as_str()).ok_or_else(|| LinkageError::UnknownJoint { location: loc.clone(), id: id.clone() })?;
                let subs = link.joints[j].screws.len();
                if list.len() != subs {
                    return Err(LinkageError::BadConfiguration {
                        location: loc,
                        reason: format!("joint {id:?} needs {subs} screws, found {}", list.len()),
                    });
                }
                for (k, s) in list.iter().enumerate() {
                    let c = link.coord_index(j, k).expect("sub exists");
                    screws[c] = Some(twist(&format!("{loc}[{k}]"), s)?);
                }
            }
            let missing = screws.iter().position(Option::is_none);
            if let Some(c) = missing {
                return Err(LinkageError::BadConfiguration {
                    location: "current_screws".into(),
                    reason: format!("no screw given for coordinate {}", link.coord_label(c)),
                });
            }
            link.current_screws = Some(screws.into_iter().map(Option::unwrap).collect());
        }
        Ok(link)
    }
}
