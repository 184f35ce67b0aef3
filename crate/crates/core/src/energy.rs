//! Bookkeeping for the terms of the internal energy decomposition.

use serde::{Deserialize, Serialize};

/// Exchange-correlation energy of one species, split into the interaction
/// part ½∬(γ − ρρ′)u and the kinetic-correlation part T_int − T_KS.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct XcParts {
    pub interaction: f64,
    pub kinetic: f64,
}

impl XcParts {
    pub fn total(&self) -> f64 {
        self.interaction + self.kinetic
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// Noninteracting (Kohn-Sham) kinetic energy per species.
    pub kinetic_ks: [f64; 2],
    /// False when no reference KS state was supplied; the KS kinetic is then
    /// reported as zero and the full interacting kinetic sits in `xc[l].kinetic`.
    pub kinetic_ks_available: bool,
    pub hartree: [f64; 2],
    pub hartree_12: f64,
    pub xc: [XcParts; 2],
    pub c12: f64,
    pub v_int: [f64; 2],
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn sum_of_parts(&self) -> f64 {
        self.kinetic_ks[0]
            + self.kinetic_ks[1]
            + self.hartree[0]
            + self.hartree[1]
            + self.hartree_12
            + self.xc[0].total()
            + self.xc[1].total()
            + self.c12
            + self.v_int[0]
            + self.v_int[1]
    }

    pub fn finalize(mut self) -> Self {
        self.total = self.sum_of_parts();
        self
    }

    /// Named scalar columns for tabular output.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("T_KS_1", self.kinetic_ks[0]),
            ("T_KS_2", self.kinetic_ks[1]),
            ("E_H_1", self.hartree[0]),
            ("E_H_2", self.hartree[1]),
            ("E_H_12", self.hartree_12),
            ("E_XC_1_interaction", self.xc[0].interaction),
            ("E_XC_1_kinetic", self.xc[0].kinetic),
            ("E_XC_2_interaction", self.xc[1].interaction),
            ("E_XC_2_kinetic", self.xc[1].kinetic),
            ("E_C_12", self.c12),
            ("V_int_1", self.v_int[0]),
            ("V_int_2", self.v_int[1]),
            ("E_total", self.total),
        ]
    }
}
