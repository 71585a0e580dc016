//! Experiment description as read from disk, and its resolution into SI physics inputs.
//!
//! Files are sectioned `key = value` text (parsed as TOML) or JSON; both map onto
//! [`SystemConfig`]. Frequencies are given in Hz and converted to rad/s on resolution.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constants::{hz_to_rad, PhysConstants, CODATA_2018};
use crate::damping::NonIdealityConfig;
use crate::error::{Error, Result};
use crate::physics::{auto_antenna_length, derive_modes, AntennaConfig, CavityConfig, ElectronModes, TrapConfig};
use crate::spectra::{ElectrodeMaterial, MagnetMaterial, TlsMaterial, P0_CGS_TO_SI};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Shorthand filling every section temperature that is not given explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    pub trap: TrapSection,
    pub cavity: CavitySection,
    pub antenna: AntennaSection,
    pub electrode: ElectrodeSection,
    pub magnet: MagnetSection,
    pub tls: TlsSection,
    #[serde(default)]
    pub nonideal: NonIdealityConfig,
    #[serde(default)]
    pub budget: BudgetSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub v0_volts: f64,
    pub b0_tesla: f64,
    /// Either (z0, rho0), z0 alone (rho0 = sqrt(2) z0), or d alone (z0 = d).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_m: Option<f64>,
    #[serde(default = "one")]
    pub alpha_geom: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub f_k_hz: f64,
    pub q_int: f64,
    pub q_ext: f64,
    pub lx_m: f64,
    pub ly_m: f64,
    pub lz_m: f64,
    /// Drive frequency; defaults to the cavity resonance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_in_hz: Option<f64>,
    #[serde(default = "phase_quadrature")]
    pub theta_lo_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum AntennaLength {
    /// Half wavelength at the axial frequency.
    #[default]
    Auto,
    Meters(f64),
}

impl Serialize for AntennaLength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AntennaLength::Auto => s.serialize_str("auto"),
            AntennaLength::Meters(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AntennaLength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(AntennaLength::Meters(v)),
            Raw::Text(t) if t == "auto" => Ok(AntennaLength::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected \"auto\" or a length in m, got {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSection {
    #[serde(default)]
    pub length_m: AntennaLength,
    pub width_m: f64,
    pub thickness_m: f64,
    pub resistivity_ohm_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeSection {
    pub resistivity_ohm_m: f64,
    pub t_metal_m: f64,
    pub t_dielectric_m: f64,
    /// Film permittivity relative to eps0.
    pub eps_dielectric_rel: f64,
    pub loss_tangent: f64,
    /// Electron to electrode distance; defaults to z0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standoff_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetSection {
    pub g_s: f64,
    pub unit_cell_m3: f64,
    pub t_curie_k: f64,
    /// Relaxation rate band alpha / 2 pi, Hz.
    pub alpha_decay_lo_hz: f64,
    pub alpha_decay_hi_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsSection {
    /// Density of states in erg^-1 cm^-3, converted to SI on resolution.
    pub p0_per_erg_cm3: f64,
    pub a_rate_per_s_k3: f64,
    pub dipole_debye: f64,
    pub eps_r: f64,
    pub t_exp_s: f64,
    /// Defaults to l * 2d * w.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_m3: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    /// Add the Barkhausen and TLS channels to the total.
    #[serde(default)]
    pub include_uncertain: bool,
    /// Re-derive an "auto" antenna length at each voltage of a sweep.
    #[serde(default = "yes")]
    pub retune_antenna: bool,
}

impl Default for BudgetSection {
    fn default() -> Self {
        BudgetSection { include_uncertain: false, retune_antenna: true }
    }
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn phase_quadrature() -> f64 {
    std::f64::consts::FRAC_PI_2
}

/// One debye in C m.
pub fn debye(k: &PhysConstants) -> f64 {
    1e-21 / k.c_light
}

/// Everything the physics needs, in SI and rad/s.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedSystem {
    #[serde(skip)]
    pub constants: PhysConstants,
    pub trap: TrapConfig,
    pub modes: ElectronModes,
    pub cavity: CavityConfig,
    pub antenna: AntennaConfig,
    pub electrode: ElectrodeMaterial,
    pub magnet_lo: MagnetMaterial,
    pub magnet_hi: MagnetMaterial,
    pub tls: TlsMaterial,
    pub nonideal: NonIdealityConfig,
    pub include_uncertain: bool,
}

/// The bundled design point at 4 K, the contents of `design_point.cfg`.
pub const DESIGN_POINT_CFG: &str = include_str!("../design_point.cfg");

impl SystemConfig {
    pub fn design_point() -> Self {
        Self::from_ini_str(DESIGN_POINT_CFG).expect("bundled config parses")
    }

    pub fn from_ini_str(s: &str) -> Result<Self> {
        let de = toml::Deserializer::new(s);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::InvalidConfig(format!("at `{}`: {}", path, e.into_inner().message().trim()))
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| Error::InvalidConfig(format!("at `{}`: {}", e.path(), e.inner())))
    }

    /// JSON when the extension is `.json`, sectioned text otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|x| x == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_ini_str(&text)
        }
    }

    pub fn to_ini_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn temperature(&self, section: Option<f64>, name: &str) -> Result<f64> {
        section
            .or(self.temperature_k)
            .ok_or_else(|| Error::InvalidConfig(format!("no temperature for [{name}] and no top-level temperature_k")))
    }

    /// (z0, rho0) from whichever geometry keys were given.
    pub fn trap_geometry(&self) -> Result<(f64, f64)> {
        let t = &self.trap;
        match (t.z0_m, t.rho0_m, t.d_m) {
            (Some(z0), Some(rho0), None) => Ok((z0, rho0)),
            (Some(z0), None, None) => Ok((z0, z0 * 2f64.sqrt())),
            (None, None, Some(d)) => Ok((d, d * 2f64.sqrt())),
            _ => Err(Error::InvalidConfig(
                "trap geometry: give z0_m and rho0_m, z0_m alone, or d_m alone".into(),
            )),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedSystem> {
        self.resolve_with(CODATA_2018)
    }

    pub fn resolve_with(&self, k: PhysConstants) -> Result<ResolvedSystem> {
        let (z0, rho0) = self.trap_geometry()?;
        let t_trap = self.temperature(self.trap.temperature_k, "trap")?;
        let t_cav = self.temperature(self.cavity.temperature_k, "cavity")?;
        let t_mag = self.temperature(self.magnet.temperature_k, "magnet")?;
        let trap = TrapConfig {
            v0: self.trap.v0_volts,
            b0: self.trap.b0_tesla,
            z0,
            rho0,
            alpha_geom: self.trap.alpha_geom,
            temperature: t_trap,
        };
        let modes = derive_modes(&k, &trap)?;

        let c = &self.cavity;
        let omega_k = hz_to_rad(c.f_k_hz);
        let cavity = CavityConfig {
            omega_k,
            q_int: c.q_int,
            q_ext: c.q_ext,
            dims: [c.lx_m, c.ly_m, c.lz_m],
            omega_in: c.f_in_hz.map(hz_to_rad).unwrap_or(omega_k),
            theta_lo: c.theta_lo_rad,
            temperature: t_cav,
        };
        cavity.validate()?;

        let a = &self.antenna;
        let length = match a.length_m {
            AntennaLength::Auto => auto_antenna_length(&k, modes.omega_z),
            AntennaLength::Meters(v) => v,
        };
        let antenna = AntennaConfig {
            length,
            width: a.width_m,
            thickness: a.thickness_m,
            resistivity: a.resistivity_ohm_m,
        };
        antenna.validate()?;

        let e = &self.electrode;
        let electrode = ElectrodeMaterial {
            resistivity: e.resistivity_ohm_m,
            t_metal: e.t_metal_m,
            t_dielectric: e.t_dielectric_m,
            eps_dielectric: e.eps_dielectric_rel * k.eps0,
            loss_tangent_d: e.loss_tangent,
            standoff_z: e.standoff_m.unwrap_or(z0),
        };
        electrode.validate()?;

        let m = &self.magnet;
        if !(m.g_s > 0.0 && m.unit_cell_m3 > 0.0 && m.t_curie_k > 0.0 && m.alpha_decay_lo_hz > 0.0)
            || m.alpha_decay_hi_hz < m.alpha_decay_lo_hz
        {
            return Err(Error::InvalidConfig(format!("magnet parameters out of range: {m:?}")));
        }
        let magnet_lo = MagnetMaterial {
            g_s: m.g_s,
            v_uc: m.unit_cell_m3,
            t_c: m.t_curie_k,
            alpha_decay: hz_to_rad(m.alpha_decay_lo_hz),
            temperature: t_mag,
        };
        let magnet_hi = MagnetMaterial { alpha_decay: hz_to_rad(m.alpha_decay_hi_hz), ..magnet_lo };

        let s = &self.tls;
        let tls = TlsMaterial {
            p0: s.p0_per_erg_cm3 * P0_CGS_TO_SI,
            a_rate: s.a_rate_per_s_k3,
            dipole_p: s.dipole_debye * debye(&k),
            eps_r: s.eps_r,
            t_exp: s.t_exp_s,
            v_tls: s.volume_m3.unwrap_or(length * 2.0 * trap.d() * antenna.width),
        };
        if !(tls.p0 >= 0.0 && tls.a_rate > 0.0 && tls.eps_r > 1.0 && tls.t_exp > 0.0 && tls.v_tls > 0.0) {
            return Err(Error::InvalidConfig(format!("TLS parameters out of range: {s:?}")));
        }

        Ok(ResolvedSystem {
            constants: k,
            trap,
            modes,
            cavity,
            antenna,
            electrode,
            magnet_lo,
            magnet_hi,
            tls,
            nonideal: self.nonideal,
            include_uncertain: self.budget.include_uncertain,
        })
    }

    /// Fix an "auto" antenna length at its value for the current trap.
    pub fn pin_antenna_length(&mut self) -> Result<()> {
        if self.antenna.length_m == AntennaLength::Auto {
            let r = self.resolve()?;
            self.antenna.length_m = AntennaLength::Meters(r.antenna.length);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_design_point() {
        let c = SystemConfig::design_point();
        assert_eq!(c.trap.v0_volts, 19.3);
        assert_eq!(c.cavity.q_ext, 1e3);
        assert_eq!(c.antenna.length_m, AntennaLength::Auto);
        let r = c.resolve().unwrap();
        assert_eq!(r.trap.z0, 50e-6);
        assert!((r.trap.rho0 / r.trap.z0 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.cavity.temperature, 4.0);
        assert_eq!(r.cavity.omega_in, r.cavity.omega_k);
        assert!((r.tls.p0 / 4.35e44 - 1.0).abs() < 1e-12);
        assert!((r.tls.dipole_p / (0.5e-21 / 299_792_458.0) - 1.0).abs() < 1e-12);
        assert!(!r.include_uncertain);
    }

    #[test]
    fn round_trips() {
        let mut c = SystemConfig::design_point();
        c.antenna.length_m = AntennaLength::Meters(0.0123);
        c.electrode.standoff_m = Some(7e-5);
        let ini = SystemConfig::from_ini_str(&c.to_ini_string()).unwrap();
        assert_eq!(ini, c);
        let json = SystemConfig::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(json, c);
    }

    #[test]
    fn unknown_key_names_its_path() {
        let text = DESIGN_POINT_CFG.replace("b0_tesla = 0.5", "b0_tesla = 0.5\nbogus = 1");
        let msg = SystemConfig::from_ini_str(&text).unwrap_err().to_string();
        assert!(msg.contains("trap.bogus") || msg.contains("`trap`"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");

        let mut v: serde_json::Value = serde_json::from_str(&SystemConfig::design_point().to_json_string()).unwrap();
        v["cavity"]["q_ext"] = serde_json::json!("many");
        let msg = SystemConfig::from_json_str(&v.to_string()).unwrap_err().to_string();
        assert!(msg.contains("cavity.q_ext"), "{msg}");
    }

    #[test]
    fn integers_are_accepted_for_reals() {
        let text = DESIGN_POINT_CFG.replace("b0_tesla = 0.5", "b0_tesla = 1").replace("temperature_k = 4.0", "temperature_k = 4");
        let c = SystemConfig::from_ini_str(&text).unwrap();
        assert_eq!(c.trap.b0_tesla, 1.0);
        assert_eq!(c.temperature_k, Some(4.0));
    }

    #[test]
    fn section_temperature_overrides_shorthand() {
        let mut c = SystemConfig::design_point();
        c.cavity.temperature_k = Some(0.05);
        let r = c.resolve().unwrap();
        assert_eq!(r.cavity.temperature, 0.05);
        assert_eq!(r.trap.temperature, 4.0);
        c.temperature_k = None;
        assert!(matches!(c.resolve(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn geometry_choices() {
        let mut c = SystemConfig::design_point();
        c.trap.d_m = None;
        c.trap.z0_m = Some(1e-4);
        assert_eq!(c.trap_geometry().unwrap(), (1e-4, 1e-4 * 2f64.sqrt()));
        c.trap.rho0_m = Some(3e-4);
        assert_eq!(c.trap_geometry().unwrap(), (1e-4, 3e-4));
        c.trap.d_m = Some(1e-4);
        assert!(c.trap_geometry().is_err());
    }

    #[test]
    fn pinned_length_matches_auto() {
        let mut c = SystemConfig::design_point();
        let auto = c.resolve().unwrap().antenna.length;
        c.pin_antenna_length().unwrap();
        assert_eq!(c.antenna.length_m, AntennaLength::Meters(auto));
        assert!(SystemConfig::from_ini_str(&DESIGN_POINT_CFG.replace("\"auto\"", "\"long\"")).is_err());
    }
}
