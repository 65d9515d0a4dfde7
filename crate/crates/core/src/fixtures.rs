//! Bundled example scenarios.
//!
//! `mini`, `college` and `campaign` ship hand-built networks. `ibm-hr` is
//! learned from the embedded attrition extract. `campus` is learned from the
//! public placement CSV, which is not redistributed: set `FEO_CAMPUS_CSV` to
//! its path, or place `Placement_Data_Full_Class.csv` in `FEO_DATA_DIR` or in
//! `fixtures/campus/`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learning::{discretize, fit_parameters, ingest_csv, ingest_reader, Dataset, FitReport, LearningError, Schema, StructureDoc};
use crate::network::{Network, NetworkError};
use crate::roles::{scenario_from_docs, FeoScenario, RoleError, RolesDoc};
use crate::solver::{parse_constraints, MarginalConstraint, SolverError};

pub const CAMPUS_FILE: &str = "Placement_Data_Full_Class.csv";

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture {0}")]
    Unknown(String),
    #[error("data for fixture {fixture} not found: {hint}")]
    DataUnavailable { fixture: String, hint: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Roles(#[from] RoleError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl FixtureError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Unknown(_) => "UnknownFixture",
            Self::DataUnavailable { .. } => "DataUnavailable",
            Self::Network(e) => e.kind(),
            Self::Roles(e) => e.kind(),
            Self::Learning(e) => e.kind(),
            Self::Solver(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Network(&'static str),
    Learned { schema: &'static str, structure: &'static str, data: Data },
}

#[derive(Debug, Clone, Copy)]
enum Data {
    Embedded(&'static str),
    Campus,
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    source: Source,
    roles: &'static str,
    constraints: &'static str,
}

/// Listing entry for a fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureInfo {
    pub name: String,
    pub description: String,
    pub learned: bool,
    pub available: bool,
}

static FIXTURES: [Fixture; 5] = [
    Fixture {
        name: "college",
        description: "College admissions: talent and SES feed test scores, admission and job outcomes",
        source: Source::Network(include_str!("../fixtures/college/network.json")),
        roles: include_str!("../fixtures/college/roles.json"),
        constraints: include_str!("../fixtures/college/constraints.json"),
    },
    Fixture {
        name: "campaign",
        description: "Campaign finance: funding decisions and a three-state election outcome",
        source: Source::Network(include_str!("../fixtures/campaign/network.json")),
        roles: include_str!("../fixtures/campaign/roles.json"),
        constraints: include_str!("../fixtures/campaign/constraints.json"),
    },
    Fixture {
        name: "mini",
        description: "Four binary nodes with a single free control entry",
        source: Source::Network(include_str!("../fixtures/mini/network.json")),
        roles: include_str!("../fixtures/mini/roles.json"),
        constraints: include_str!("../fixtures/mini/constraints.json"),
    },
    Fixture {
        name: "ibm-hr",
        description: "IBM HR attrition: education, gender, work-life balance and recent promotion",
        source: Source::Learned {
            schema: include_str!("../fixtures/ibm-hr/schema.json"),
            structure: include_str!("../fixtures/ibm-hr/structure.json"),
            data: Data::Embedded(include_str!("../fixtures/ibm-hr/attrition.csv")),
        },
        roles: include_str!("../fixtures/ibm-hr/roles.json"),
        constraints: include_str!("../fixtures/ibm-hr/constraints.json"),
    },
    Fixture {
        name: "campus",
        description: "Campus recruitment: school scores, gender, internships and salary",
        source: Source::Learned {
            schema: include_str!("../fixtures/campus/schema.json"),
            structure: include_str!("../fixtures/campus/structure.json"),
            data: Data::Campus,
        },
        roles: include_str!("../fixtures/campus/roles.json"),
        constraints: include_str!("../fixtures/campus/constraints.json"),
    },
];

pub const COLLEGE_CAP: &str = include_str!("../fixtures/college/cap.json");
pub const CAMPUS_SCHEMA_FILL: &str = include_str!("../fixtures/campus/schema-fill.json");

pub fn all() -> &'static [Fixture] {
    &FIXTURES
}

pub fn get(name: &str) -> Result<&'static Fixture, FixtureError> {
    FIXTURES.iter().find(|f| f.name == name).ok_or_else(|| FixtureError::Unknown(name.to_string()))
}

pub fn list() -> Vec<FixtureInfo> {
    FIXTURES.iter().map(Fixture::info).collect()
}

/// The campus CSV, if it can be found.
pub fn campus_csv() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("FEO_CAMPUS_CSV").map(PathBuf::from),
        std::env::var_os("FEO_DATA_DIR").map(|d| PathBuf::from(d).join(CAMPUS_FILE)),
        Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/campus").join(CAMPUS_FILE)),
    ];
    candidates.into_iter().flatten().find(|p| p.is_file())
}

/// The 50% cap on college admissions.
pub fn college_cap() -> Vec<MarginalConstraint> {
    parse_constraints(COLLEGE_CAP).expect("bundled constraints parse")
}

/// Ingests, discretizes and fits a learned fixture's data.
pub fn learn(schema: &Schema, structure: &StructureDoc, data: Dataset) -> Result<(Network, Dataset, FitReport), FixtureError> {
    let data = discretize(&data, &schema.policy())?;
    let (network, report) = fit_parameters(structure, &data, 0.0)?;
    Ok((network, data, report))
}

impl Fixture {
    pub fn info(&self) -> FixtureInfo {
        FixtureInfo {
            name: self.name.to_string(),
            description: self.description.to_string(),
            learned: matches!(self.source, Source::Learned { .. }),
            available: !matches!(self.source, Source::Learned { data: Data::Campus, .. }) || campus_csv().is_some(),
        }
    }

    pub fn roles_json(&self) -> &'static str {
        self.roles
    }

    pub fn constraints_json(&self) -> &'static str {
        self.constraints
    }

    pub fn roles(&self) -> RolesDoc {
        RolesDoc::from_json(self.roles).expect("bundled roles parse")
    }

    pub fn constraints(&self) -> Vec<MarginalConstraint> {
        parse_constraints(self.constraints).expect("bundled constraints parse")
    }

    pub fn schema(&self) -> Option<Schema> {
        match self.source {
            Source::Learned { schema, .. } => Some(Schema::from_json(schema).expect("bundled schema parses")),
            Source::Network(_) => None,
        }
    }

    pub fn structure(&self) -> Option<StructureDoc> {
        match self.source {
            Source::Learned { structure, .. } => Some(StructureDoc::from_json(structure).expect("bundled structure parses")),
            Source::Network(_) => None,
        }
    }

    /// Source CSV text when it ships with the crate.
    pub fn raw_csv(&self) -> Option<&'static str> {
        match self.source {
            Source::Learned { data: Data::Embedded(text), .. } => Some(text),
            _ => None,
        }
    }

    /// Raw (undiscretized) data of a learned fixture.
    pub fn raw_data(&self) -> Result<Option<Dataset>, FixtureError> {
        let Source::Learned { data, .. } = self.source else { return Ok(None) };
        let schema = self.schema().expect("learned fixtures have a schema");
        let ds = match data {
            Data::Embedded(text) => ingest_reader(text.as_bytes(), &schema)?,
            Data::Campus => {
                let path = campus_csv().ok_or_else(|| FixtureError::DataUnavailable {
                    fixture: self.name.to_string(),
                    hint: format!("set FEO_CAMPUS_CSV or place {CAMPUS_FILE} in FEO_DATA_DIR"),
                })?;
                ingest_csv(path, &schema)?
            }
        };
        Ok(Some(ds))
    }

    pub fn network(&self) -> Result<Network, FixtureError> {
        match self.source {
            Source::Network(text) => Ok(Network::from_json(text)?),
            Source::Learned { .. } => {
                let data = self.raw_data()?.expect("learned fixture");
                let (net, _, _) = learn(&self.schema().expect("schema"), &self.structure().expect("structure"), data)?;
                Ok(net)
            }
        }
    }

    pub fn scenario(&self) -> Result<FeoScenario, FixtureError> {
        Ok(scenario_from_docs(&self.network()?, &self.roles())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_documents_parse() {
        for f in all() {
            f.roles();
            f.constraints();
            if f.name != "campus" || campus_csv().is_some() {
                f.scenario().unwrap();
            }
        }
        assert_eq!(college_cap().len(), 1);
        Schema::from_json(CAMPUS_SCHEMA_FILL).unwrap();
    }

    #[test]
    fn listing_covers_every_fixture() {
        let names: Vec<String> = list().into_iter().map(|i| i.name).collect();
        assert_eq!(names, ["college", "campaign", "mini", "ibm-hr", "campus"]);
        assert!(matches!(get("nope"), Err(FixtureError::Unknown(_))));
    }

    #[test]
    fn ibm_data_is_complete() {
        let data = get("ibm-hr").unwrap().raw_data().unwrap().unwrap();
        assert_eq!(data.len(), 1470);
        assert_eq!(data.provenance().rows_dropped, 0);
    }
}
