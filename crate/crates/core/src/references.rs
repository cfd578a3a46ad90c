//! Bundled reference sequences and the constants their timings are quoted in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::Target;
use crate::sequence::{parse, GateSequence};

/// `arccos(-1/sqrt 3) / pi`.
pub fn p1() -> f64 {
    (-1.0 / 3f64.sqrt()).acos() / std::f64::consts::PI
}

/// `arcsin(1/3) / pi`.
pub fn p2() -> f64 {
    (1.0f64 / 3.0).asin() / std::f64::consts::PI
}

/// Known times of the FW family in units of `pi/J`, used as benchmark lines.
pub const FW_T_SEQUENTIAL: f64 = 24.0;
pub const INVERSE_FW_T_SEQUENTIAL: f64 = 20.0;
pub const FW_T_PARALLEL: f64 = 15.89;
pub const INVERSE_FW_T_PARALLEL: f64 = 13.89;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Reference {
    /// Fong-Wandzura CNOT on the "11" chain.
    FwCnot,
    /// Reverse-and-negate of [`Reference::FwCnot`].
    InverseFwCnot,
    /// Fastest CZ, built on the inverse-FW nonlocal core.
    CzA,
    /// Inverse of [`Reference::CzA`], built on the FW core.
    CzB,
    /// CNOT on the "33" chain with re-optimized single-qubit dressing.
    Linear33Rl,
    /// CNOT on the "33" chain with eight reordering SWAPs.
    Linear33Weinstein,
}

impl Reference {
    pub const ALL: [Reference; 6] = [
        Reference::FwCnot,
        Reference::InverseFwCnot,
        Reference::CzA,
        Reference::CzB,
        Reference::Linear33Rl,
        Reference::Linear33Weinstein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Reference::FwCnot => "fw_cnot",
            Reference::InverseFwCnot => "inverse_fw_cnot",
            Reference::CzA => "cz_a",
            Reference::CzB => "cz_b",
            Reference::Linear33Rl => "linear33_rl_cnot",
            Reference::Linear33Weinstein => "linear33_weinstein_cnot",
        }
    }

    pub fn target(self) -> Target {
        match self {
            Reference::CzA | Reference::CzB => Target::Cz,
            _ => Target::Cnot,
        }
    }

    /// Raw file contents.
    pub fn text(self) -> &'static str {
        match self {
            Reference::FwCnot => include_str!("../data/fw_cnot.seq"),
            Reference::InverseFwCnot => include_str!("../data/inverse_fw_cnot.seq"),
            Reference::CzA => include_str!("../data/cz_a.seq"),
            Reference::CzB => include_str!("../data/cz_b.seq"),
            Reference::Linear33Rl => include_str!("../data/linear33_rl_cnot.seq"),
            Reference::Linear33Weinstein => include_str!("../data/linear33_weinstein_cnot.seq"),
        }
    }

    pub fn sequence(self) -> GateSequence {
        parse(self.text()).expect("bundled sequences parse")
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_end_matches(".seq");
        Reference::ALL
            .iter()
            .copied()
            .find(|r| r.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Parse(format!("unknown reference sequence {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((p1() - 0.695_913_276_015_303_6).abs() < 1e-15);
        assert!((p2() - 0.108_173_447_969_392_72).abs() < 1e-15);
    }

    #[test]
    fn all_bundled_files_parse() {
        for r in Reference::ALL {
            let seq = r.sequence();
            assert!(!seq.is_empty(), "{r}");
            assert_eq!(r.name().parse::<Reference>().unwrap(), r);
        }
    }
}
