use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WeibullParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Transition {
    #[serde(rename = "G-V")]
    GV,
    #[serde(rename = "V-D")]
    VD,
    #[serde(rename = "D-C")]
    DC,
    #[serde(rename = "C-G")]
    CG,
    #[serde(rename = "V-F")]
    VF,
    #[serde(rename = "F-G")]
    FG,
}

impl Transition {
    pub const ALL: [Transition; 6] = [Self::GV, Self::VD, Self::DC, Self::CG, Self::VF, Self::FG];

    pub fn name(&self) -> &'static str {
        match self {
            Self::GV => "G-V",
            Self::VD => "V-D",
            Self::DC => "D-C",
            Self::CG => "C-G",
            Self::VF => "V-F",
            Self::FG => "F-G",
        }
    }
}

impl std::str::FromStr for Transition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphabetic()).collect::<String>().to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|t| t.name().replace('-', "") == key)
            .ok_or_else(|| Error::Validation(format!("unknown transition '{s}' (expected one of G-V, V-D, D-C, C-G, V-F, F-G)")))
    }
}

/// One Weibull law per transition of the attack lifecycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmpSpec {
    pub time_unit: String,
    pub gv: WeibullParams,
    pub vd: WeibullParams,
    pub dc: WeibullParams,
    pub cg: WeibullParams,
    pub vf: WeibullParams,
    pub fg: WeibullParams,
}

impl SmpSpec {
    /// Parameters for the general cyber-attack lifecycle, in hours.
    pub fn reference() -> Self {
        Self {
            time_unit: "hours".into(),
            gv: WeibullParams { scale: 2.0675, shape: 18.8178 },
            vd: WeibullParams { scale: 1.9293, shape: 16.0712 },
            dc: WeibullParams { scale: 1.5698, shape: 18.4858 },
            cg: WeibullParams { scale: 1.3816, shape: 15.7033 },
            vf: WeibullParams { scale: 0.7, shape: 400.0 },
            fg: WeibullParams { scale: 0.6783, shape: 13.4487 },
        }
    }

    pub fn get(&self, t: Transition) -> WeibullParams {
        match t {
            Transition::GV => self.gv,
            Transition::VD => self.vd,
            Transition::DC => self.dc,
            Transition::CG => self.cg,
            Transition::VF => self.vf,
            Transition::FG => self.fg,
        }
    }

    pub fn get_mut(&mut self, t: Transition) -> &mut WeibullParams {
        match t {
            Transition::GV => &mut self.gv,
            Transition::VD => &mut self.vd,
            Transition::DC => &mut self.dc,
            Transition::CG => &mut self.cg,
            Transition::VF => &mut self.vf,
            Transition::FG => &mut self.fg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in Transition::ALL {
            self.get(t)
                .validate()
                .map_err(|e| Error::Validation(format!("transition {}: {e}", t.name())))?;
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionFile {
    time_unit: String,
    transitions: std::collections::BTreeMap<Transition, WeibullParams>,
}

/// Parses the `smp` section of a JSON document; a bare section is accepted too.
pub fn parse_smp_spec(text: &str, origin: &str) -> Result<SmpSpec> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
    let section = doc.get("smp").cloned().unwrap_or(doc);
    let file: SectionFile = serde_json::from_value(section).map_err(|e| Error::parse(origin, e))?;
    let unit = file.time_unit.to_ascii_lowercase();
    let factor = match unit.as_str() {
        "hours" | "hour" | "h" => 1.0,
        "minutes" | "minute" | "min" => 1.0 / 60.0,
        "days" | "day" | "d" => 24.0,
        other => return Err(Error::parse(origin, format!("unsupported time_unit '{other}'"))),
    };
    let get = |t: Transition| {
        file.transitions
            .get(&t)
            .map(|p| WeibullParams { scale: p.scale * factor, shape: p.shape })
            .ok_or_else(|| Error::parse(origin, format!("missing transition {}", t.name())))
    };
    let spec = SmpSpec {
        time_unit: "hours".into(),
        gv: get(Transition::GV)?,
        vd: get(Transition::VD)?,
        dc: get(Transition::DC)?,
        cg: get(Transition::CG)?,
        vf: get(Transition::VF)?,
        fg: get(Transition::FG)?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_smp_spec(path: impl AsRef<Path>) -> Result<SmpSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_smp_spec(&text, &path.display().to_string())
}
