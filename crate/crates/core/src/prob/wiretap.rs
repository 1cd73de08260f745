use serde::{Deserialize, Serialize};

use super::{Alphabet, Channel, MASS_TOLERANCE};
use crate::error::{mismatch, Result};

/// A wiretap channel described by its two marginal channels.
///
/// `joint`, when present, is a channel to `Y x Z` (lexicographic order) whose
/// marginalizations must agree with `legit` and `eaves`. No bound consumes
/// it; all capacity expressions depend on the marginals only.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapChannel {
    legit: Channel,
    eaves: Channel,
    joint: Option<Channel>,
}

impl WiretapChannel {
    pub fn new(legit: Channel, eaves: Channel) -> Result<Self> {
        if legit.input() != eaves.input() {
            return Err(mismatch(format!(
                "legitimate input {} differs from eavesdropper input {}",
                legit.input(),
                eaves.input()
            )));
        }
        Ok(Self {
            legit,
            eaves,
            joint: None,
        })
    }

    pub fn with_joint(mut self, joint: Channel) -> Result<Self> {
        let (ny, nz) = (self.legit.output_size(), self.eaves.output_size());
        if joint.input() != self.legit.input() || joint.output_size() != ny * nz {
            return Err(mismatch("joint channel shape does not match the marginals"));
        }
        for x in 0..joint.input_size() {
            let row = joint.row(x);
            for y in 0..ny {
                let s: f64 = row[y * nz..(y + 1) * nz].iter().sum();
                if (s - self.legit.get(x, y)).abs() > MASS_TOLERANCE {
                    return Err(mismatch(format!("joint Y-marginal differs at input {x}")));
                }
            }
            for z in 0..nz {
                let s: f64 = (0..ny).map(|y| row[y * nz + z]).sum();
                if (s - self.eaves.get(x, z)).abs() > MASS_TOLERANCE {
                    return Err(mismatch(format!("joint Z-marginal differs at input {x}")));
                }
            }
        }
        self.joint = Some(joint);
        Ok(self)
    }

    pub fn input(&self) -> &Alphabet {
        self.legit.input()
    }

    pub fn legit(&self) -> &Channel {
        &self.legit
    }

    pub fn eaves(&self) -> &Channel {
        &self.eaves
    }

    pub fn joint(&self) -> Option<&Channel> {
        self.joint.as_ref()
    }
}

#[derive(Serialize, Deserialize)]
struct WiretapRepr {
    input: Vec<String>,
    legit: Channel,
    eaves: Channel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint: Option<Channel>,
}

impl Serialize for WiretapChannel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WiretapRepr {
            input: self.input().symbols().to_vec(),
            legit: self.legit.clone(),
            eaves: self.eaves.clone(),
            joint: self.joint.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WiretapChannel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = WiretapRepr::deserialize(deserializer)?;
        let build = || -> Result<WiretapChannel> {
            let input = Alphabet::new(r.input)?;
            if &input != r.legit.input() {
                return Err(mismatch("wiretap input differs from legitimate channel input"));
            }
            let w = WiretapChannel::new(r.legit, r.eaves)?;
            match r.joint {
                Some(j) => w.with_joint(j),
                None => Ok(w),
            }
        };
        build().map_err(serde::de::Error::custom)
    }
}
