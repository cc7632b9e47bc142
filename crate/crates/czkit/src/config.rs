//! Run configuration: a sectioned key-value file (TOML syntax).
//!
//! Every key has a default, unknown keys and sections are rejected, and
//! [`RunConfig::normalized`] prints the fully populated form, which parses
//! back to the same value.

use std::path::Path;

use czk_core::admissible::AdmissibleTriple;
use czk_core::dyadic::LagomWindow;
use czk_core::kernels::SampleSpec;
use czk_core::operators::{BoundParameters, QuadratureSpec};
use czk_core::wavelets::BasisParams;
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSection,
    pub window: WindowSection,
    pub basis: BasisSection,
    pub quadrature: QuadratureSection,
    pub sampling: SamplingSection,
    pub compactness: CompactnessSection,
    pub paraproduct: ParaproductSection,
    pub t1: T1Section,
    pub cmo: CmoSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// `NAME[:params]`.
    pub spec: String,
    /// `fitted`, or a builtin triple (`power:α`, `exp`, `zero`).
    pub triple: String,
    /// Declared constant; the builtin's own when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection { spec: "commutator_gauss".into(), triple: "fitted".into(), constant: None, delta: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub m: u32,
    pub radius: f64,
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for WindowSection {
    fn default() -> Self {
        let w = LagomWindow::default();
        WindowSection { m: w.m, radius: w.radius, j_min: w.j_min, j_max: w.j_max }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSection {
    pub vanishing_moments: usize,
    pub table_level: u32,
    pub hilbert_level: u32,
    pub coeff_level: u32,
    pub tau_orth: f64,
}

impl Default for BasisSection {
    fn default() -> Self {
        let b = BasisParams::default();
        BasisSection {
            vanishing_moments: b.vanishing_moments,
            table_level: b.table_level,
            hilbert_level: b.hilbert_level,
            coeff_level: b.coeff_level,
            tau_orth: b.tau_orth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub regular_level: u32,
    pub kernel_step: f64,
    pub singular_level: u32,
    pub function_level: u32,
    pub entry_tolerance: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        QuadratureSection {
            regular_level: q.regular_level,
            kernel_step: q.kernel_step,
            singular_level: q.singular_level,
            function_level: q.function_level,
            entry_tolerance: q.entry_tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub count: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub anchor_min: f64,
    pub anchor_max: f64,
    pub offset: u64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        let s = SampleSpec::default();
        SamplingSection { count: s.count, d_min: s.d_min, d_max: s.d_max, anchor_min: s.anchor_min, anchor_max: s.anchor_max, offset: s.offset }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompactnessSection {
    pub ms: Vec<u32>,
    pub epsilon: f64,
    pub weak_triple: String,
    pub theta: f64,
    pub n: usize,
    /// Exponent of the necessity bound.
    pub p: f64,
}

impl Default for CompactnessSection {
    fn default() -> Self {
        CompactnessSection { ms: vec![1, 2, 3, 4], epsilon: 1e-3, weak_triple: "power:1".into(), theta: 0.1, n: 6, p: 4.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParaproductSection {
    /// `gauss_cos`, `bump`, `zero` or `single_wavelet:j,k`.
    pub b: String,
    /// Coefficient-map JSON; overrides `b`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_file: Option<String>,
    pub ms: Vec<u32>,
}

impl Default for ParaproductSection {
    fn default() -> Self {
        ParaproductSection { b: "gauss_cos".into(), b_file: None, ms: vec![1, 2, 3, 4] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T1Section {
    pub interval_left: f64,
    pub interval_length: f64,
    pub seed: u64,
    pub p: f64,
    /// Plateau center.
    pub a: f64,
    pub k_min: i32,
    pub k_max: i32,
}

impl Default for T1Section {
    fn default() -> Self {
        T1Section { interval_left: 0.0, interval_length: 1.0, seed: 0, p: 2.0, a: 0.5, k_min: 2, k_max: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmoSection {
    pub b: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_file: Option<String>,
    pub ms: Vec<u32>,
    /// Also run the T(1) ∈ CMO test for the configured kernel.
    pub t1: bool,
}

impl Default for CmoSection {
    fn default() -> Self {
        CmoSection { b: "gauss_cos".into(), b_file: None, ms: vec![1, 2, 3, 4], t1: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig { path: path.to_path_buf(), source })?;
        RunConfig::parse(&text)
    }

    /// Every key spelled out, sections in a fixed order.
    pub fn normalized(&self) -> String {
        toml::to_string(self).expect("config types serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.window()?;
        self.basis_params().validate()?;
        self.quadrature_spec().validate()?;
        let s = &self.sampling;
        if s.count == 0 || !(0.0 < s.d_min && s.d_min < s.d_max) || !(0.0 < s.anchor_min && s.anchor_min < s.anchor_max) {
            return Err(config("sampling needs count > 0, 0 < d_min < d_max and 0 < anchor_min < anchor_max"));
        }
        if self.kernel.triple != "fitted" {
            AdmissibleTriple::builtin(&self.kernel.triple).map_err(|e| config(format!("kernel.triple: {e}")))?;
        }
        if let Some(c) = self.kernel.constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(config("kernel.constant must be positive"));
            }
        }
        if let Some(d) = self.kernel.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(config("kernel.delta must be in (0, 1]"));
            }
        }
        let c = &self.compactness;
        AdmissibleTriple::builtin(&c.weak_triple).map_err(|e| config(format!("compactness.weak_triple: {e}")))?;
        if !(c.epsilon > 0.0) {
            return Err(config("compactness.epsilon must be positive"));
        }
        if !(c.p > 1.0 && c.p.is_finite()) {
            return Err(config("compactness.p must be in (1, inf)"));
        }
        let delta = self.kernel.delta.unwrap_or(1.0);
        BoundParameters::new(c.theta, delta, c.n, self.window.m).map_err(|e| config(format!("compactness: {e}")))?;
        for (name, ms) in [("compactness.ms", &c.ms), ("paraproduct.ms", &self.paraproduct.ms), ("cmo.ms", &self.cmo.ms)] {
            if ms.is_empty() || ms.contains(&0) {
                return Err(config(format!("{name} must be a nonempty list of M >= 1")));
            }
        }
        let t = &self.t1;
        if !(t.interval_length > 0.0) || !t.interval_left.is_finite() {
            return Err(config("t1 interval must have positive length"));
        }
        if !(t.p > 1.0 && t.p.is_finite()) {
            return Err(config("t1.p must be in (1, inf)"));
        }
        if t.k_min > t.k_max || t.k_max - t.k_min < 1 {
            return Err(config("t1 needs k_min < k_max"));
        }
        Ok(())
    }

    pub fn window(&self) -> Result<LagomWindow> {
        let w = &self.window;
        if w.j_min > w.j_max {
            return Err(config("window needs j_min <= j_max"));
        }
        LagomWindow::new(w.m, w.radius, w.j_min, w.j_max).map_err(|e| config(e.to_string()))
    }

    pub fn basis_params(&self) -> BasisParams {
        let b = &self.basis;
        BasisParams {
            vanishing_moments: b.vanishing_moments,
            table_level: b.table_level,
            hilbert_level: b.hilbert_level,
            coeff_level: b.coeff_level,
            tau_orth: b.tau_orth,
        }
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let q = &self.quadrature;
        QuadratureSpec {
            regular_level: q.regular_level,
            kernel_step: q.kernel_step,
            singular_level: q.singular_level,
            function_level: q.function_level,
            entry_tolerance: q.entry_tolerance,
        }
    }

    pub fn sample_spec(&self) -> SampleSpec {
        let s = &self.sampling;
        SampleSpec { count: s.count, d_min: s.d_min, d_max: s.d_max, anchor_min: s.anchor_min, anchor_max: s.anchor_max, offset: s.offset }
    }

    /// Applies `--window M,R,jmin,jmax`.
    pub fn override_window(&mut self, text: &str) -> Result<()> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(config(format!("--window expects M,R,jmin,jmax, got `{text}`")));
        }
        let bad = |what: &str| config(format!("--window: bad {what} in `{text}`"));
        self.window = WindowSection {
            m: parts[0].parse().map_err(|_| bad("M"))?,
            radius: parts[1].parse().map_err(|_| bad("R"))?,
            j_min: parts[2].parse().map_err(|_| bad("jmin"))?,
            j_max: parts[3].parse().map_err(|_| bad("jmax"))?,
        };
        self.validate()
    }
}

trait Validate {
    fn validate(&self) -> Result<()>;
}

impl Validate for BasisParams {
    fn validate(&self) -> Result<()> {
        if !(1..=10).contains(&self.vanishing_moments) {
            return Err(config("basis.vanishing_moments must be in 1..=10"));
        }
        if !(4..=16).contains(&self.table_level) || !(4..=14).contains(&self.hilbert_level) || !(2..=14).contains(&self.coeff_level) {
            return Err(config("basis levels out of range (table 4..=16, hilbert 4..=14, coeff 2..=14)"));
        }
        if !(self.tau_orth > 0.0) {
            return Err(config("basis.tau_orth must be positive"));
        }
        Ok(())
    }
}

impl Validate for QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.regular_level > 12 || self.singular_level > 14 || self.function_level > 12 {
            return Err(config("quadrature levels too large"));
        }
        if !(self.kernel_step > 0.0) || !(self.entry_tolerance > 0.0) {
            return Err(config("quadrature kernel_step and entry_tolerance must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[window]\nwidth = 3\n").is_err());
        assert!(RunConfig::parse("[extras]\n").is_err());
        assert!(RunConfig::parse("top = 1\n").is_err());
    }

    #[test]
    fn normalized_round_trip() {
        let cfg = RunConfig::parse("[kernel]\nspec = \"hilbert\"\nconstant = 2.5\n[window]\nradius = 3.0\n").unwrap();
        let text = cfg.normalized();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.normalized(), text);
    }

    #[test]
    fn window_override() {
        let mut cfg = RunConfig::default();
        cfg.override_window("4,2,-2,2").unwrap();
        assert_eq!(cfg.window, WindowSection { m: 4, radius: 2.0, j_min: -2, j_max: 2 });
        assert!(cfg.override_window("4,2,2").is_err());
        assert!(cfg.override_window("0,2,-2,2").is_err());
    }
}
