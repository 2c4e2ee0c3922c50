//! System parameters and the flat key-value configuration file.
//!
//! A configuration file is a single flat TOML table. Keys not present take
//! the defaults below; unknown keys are rejected so typos surface early.
//! Ricean factors accept either a number or the string `"inf"`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::SweepSpec;

/// Angle-spread parameters of one clustered channel, in degrees.
///
/// `mu` and `sigma_c` are the mean and spread of the Normal cluster-centre
/// azimuth; `sigma_s` is the Laplacian subray azimuth spread; `sigmahat_c`
/// and `sigmahat_s` are the Laplacian cluster and subray elevation spreads.
/// Spreads are standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSpread {
    pub mu: f64,
    pub sigma_c: f64,
    pub sigma_s: f64,
    pub sigmahat_c: f64,
    pub sigmahat_s: f64,
}

impl AngleSpread {
    /// Broad spread used for the user channels.
    pub const USER: AngleSpread = AngleSpread {
        mu: 0.0,
        sigma_c: 31.64,
        sigma_s: 24.25,
        sigmahat_c: 6.12,
        sigmahat_s: 1.84,
    };
    /// Narrow spread used for the RIS-BS channel.
    pub const RIS_BS: AngleSpread = AngleSpread {
        mu: 0.0,
        sigma_c: 14.4,
        sigma_s: 6.24,
        sigmahat_c: 1.9,
        sigmahat_s: 1.37,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "M_y")]
    pub m_y: usize,
    #[serde(rename = "M_z")]
    pub m_z: usize,
    #[serde(rename = "N_y")]
    pub n_y: usize,
    #[serde(rename = "N_z")]
    pub n_z: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub d_b: f64,
    pub d_r: f64,
    #[serde(rename = "P_ref_db")]
    pub p_ref_db: f64,
    pub gamma_d: f64,
    pub gamma_ru: f64,
    pub noise_dbm: f64,
    pub d_br: f64,
    pub cell_radius: f64,
    pub exclusion_radius: f64,
    #[serde(with = "kappa_serde")]
    pub kappa_d: f64,
    #[serde(with = "kappa_serde")]
    pub kappa_ru: f64,
    #[serde(with = "kappa_serde")]
    pub kappa_br: f64,
    #[serde(rename = "C_d")]
    pub c_d: usize,
    #[serde(rename = "S_d")]
    pub s_d: usize,
    #[serde(rename = "C_ru")]
    pub c_ru: usize,
    #[serde(rename = "S_ru")]
    pub s_ru: usize,
    #[serde(rename = "C_br")]
    pub c_br: usize,
    #[serde(rename = "S_br")]
    pub s_br: usize,
    pub mu_d: f64,
    pub sigma_c_d: f64,
    pub sigma_s_d: f64,
    pub sigmahat_c_d: f64,
    pub sigmahat_s_d: f64,
    pub mu_ru: f64,
    pub sigma_c_ru: f64,
    pub sigma_s_ru: f64,
    pub sigmahat_c_ru: f64,
    pub sigmahat_s_ru: f64,
    pub mu_br: f64,
    pub sigma_c_br: f64,
    pub sigma_s_br: f64,
    pub sigmahat_c_br: f64,
    pub sigmahat_s_br: f64,
    pub b: u32,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: u64,
    /// Accept equal-valued candidates in MUIQ (last tie wins) instead of
    /// keeping the incumbent.
    pub muiq_tie_accept: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            m_y: 8,
            m_z: 4,
            n_y: 8,
            n_z: 8,
            k: 2,
            d_b: 0.5,
            d_r: 0.2,
            p_ref_db: -30.0,
            gamma_d: 3.5,
            gamma_ru: 2.8,
            noise_dbm: -80.0,
            d_br: 51.0,
            cell_radius: 70.0,
            exclusion_radius: 5.0,
            kappa_d: 1.0,
            kappa_ru: 1.0,
            kappa_br: f64::INFINITY,
            c_d: 20,
            s_d: 20,
            c_ru: 20,
            s_ru: 20,
            c_br: 3,
            s_br: 16,
            mu_d: AngleSpread::USER.mu,
            sigma_c_d: AngleSpread::USER.sigma_c,
            sigma_s_d: AngleSpread::USER.sigma_s,
            sigmahat_c_d: AngleSpread::USER.sigmahat_c,
            sigmahat_s_d: AngleSpread::USER.sigmahat_s,
            mu_ru: AngleSpread::USER.mu,
            sigma_c_ru: AngleSpread::USER.sigma_c,
            sigma_s_ru: AngleSpread::USER.sigma_s,
            sigmahat_c_ru: AngleSpread::USER.sigmahat_c,
            sigmahat_s_ru: AngleSpread::USER.sigmahat_s,
            mu_br: AngleSpread::RIS_BS.mu,
            sigma_c_br: AngleSpread::RIS_BS.sigma_c,
            sigma_s_br: AngleSpread::RIS_BS.sigma_s,
            sigmahat_c_br: AngleSpread::RIS_BS.sigmahat_c,
            sigmahat_s_br: AngleSpread::RIS_BS.sigmahat_s,
            b: 1,
            l: 1,
            seed: 1,
            muiq_tie_accept: false,
        }
    }
}

impl SystemConfig {
    pub fn m(&self) -> usize {
        self.m_y * self.m_z
    }

    pub fn n(&self) -> usize {
        self.n_y * self.n_z
    }

    /// Path loss at the 1 m reference distance, linear.
    pub fn p_ref(&self) -> f64 {
        10f64.powf(self.p_ref_db / 10.0)
    }

    /// Noise power in watts.
    pub fn sigma2(&self) -> f64 {
        10f64.powf((self.noise_dbm - 30.0) / 10.0)
    }

    pub fn spread_d(&self) -> AngleSpread {
        AngleSpread {
            mu: self.mu_d,
            sigma_c: self.sigma_c_d,
            sigma_s: self.sigma_s_d,
            sigmahat_c: self.sigmahat_c_d,
            sigmahat_s: self.sigmahat_s_d,
        }
    }

    pub fn spread_ru(&self) -> AngleSpread {
        AngleSpread {
            mu: self.mu_ru,
            sigma_c: self.sigma_c_ru,
            sigma_s: self.sigma_s_ru,
            sigmahat_c: self.sigmahat_c_ru,
            sigmahat_s: self.sigmahat_s_ru,
        }
    }

    pub fn spread_br(&self) -> AngleSpread {
        AngleSpread {
            mu: self.mu_br,
            sigma_c: self.sigma_c_br,
            sigma_s: self.sigma_s_br,
            sigmahat_c: self.sigmahat_c_br,
            sigmahat_s: self.sigmahat_s_br,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("M_y", self.m_y),
            ("M_z", self.m_z),
            ("N_y", self.n_y),
            ("N_z", self.n_z),
            ("K", self.k),
            ("C_d", self.c_d),
            ("S_d", self.s_d),
            ("C_ru", self.c_ru),
            ("S_ru", self.s_ru),
            ("C_br", self.c_br),
            ("S_br", self.s_br),
            ("L", self.l),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.b == 0 {
            return Err(Error::Config("b must be at least 1".into()));
        }
        if !(self.d_b > 0.0 && self.d_r > 0.0) {
            return Err(Error::Config("element spacings must be positive".into()));
        }
        if !(self.exclusion_radius > 0.0 && self.cell_radius > self.exclusion_radius) {
            return Err(Error::Config(
                "need cell_radius > exclusion_radius > 0".into(),
            ));
        }
        for s in [self.spread_d(), self.spread_ru(), self.spread_br()] {
            let spreads = [s.sigma_c, s.sigma_s, s.sigmahat_c, s.sigmahat_s];
            if spreads.iter().any(|v| !(*v >= 0.0)) || !s.mu.is_finite() {
                return Err(Error::Config(
                    "angle spreads must be finite and >= 0".into(),
                ));
            }
        }
        if !(self.d_br > 0.0) {
            return Err(Error::Config("d_br must be positive".into()));
        }
        for (name, kappa) in [
            ("kappa_d", self.kappa_d),
            ("kappa_ru", self.kappa_ru),
            ("kappa_br", self.kappa_br),
        ] {
            if kappa.is_nan() || kappa < 0.0 {
                return Err(Error::Config(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Ricean amplitude split `(eta, zeta)` with `eta^2 + zeta^2 = 1`.
pub fn ricean_split(kappa: f64) -> (f64, f64) {
    if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
    }
}

/// Formats a Ricean factor for config and CSV output.
pub fn format_kappa(kappa: f64) -> String {
    if kappa.is_infinite() && kappa > 0.0 {
        "inf".to_string()
    } else {
        crate::harness::format_g12(kappa)
    }
}

pub fn parse_kappa(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t == "+inf" {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .map_err(|_| Error::Config(format!("invalid K-factor {s:?}")))
}

pub(crate) mod kappa_serde {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub(crate) struct KappaVisitor;

    impl Visitor<'_> for KappaVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a non-negative number or \"inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            super::parse_kappa(v).map_err(|e| E::custom(e.to_string()))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(KappaVisitor)
    }
}

pub(crate) mod kappa_list_serde {
    use serde::de::{SeqAccess, Visitor};
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            if x.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(x)?;
            }
        }
        seq.end()
    }

    struct ListVisitor;

    struct Kappa(f64);

    impl<'de> serde::Deserialize<'de> for Kappa {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            d.deserialize_any(super::kappa_serde::KappaVisitor)
                .map(Kappa)
        }
    }

    impl<'de> Visitor<'de> for ListVisitor {
        type Value = Vec<f64>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a list of K-factors")
        }
        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<f64>, A::Error> {
            let mut out = Vec::new();
            while let Some(Kappa(k)) = seq.next_element()? {
                out.push(k);
            }
            Ok(out)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        d.deserialize_seq(ListVisitor)
    }
}

fn table_keys<T: Serialize>(value: &T) -> BTreeSet<String> {
    match toml::Table::try_from(value) {
        Ok(t) => t.keys().cloned().collect(),
        Err(_) => BTreeSet::new(),
    }
}

/// Parses a configuration document into system parameters and sweep spec.
pub fn parse_config(text: &str) -> Result<(SystemConfig, SweepSpec)> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;

    let sys_keys = table_keys(&SystemConfig::default());
    let sweep_keys = table_keys(&SweepSpec::default());
    let unknown: Vec<&String> = table
        .keys()
        .filter(|k| !sys_keys.contains(*k) && !sweep_keys.contains(*k))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {unknown:?}")));
    }

    let sys_table: toml::Table = table
        .iter()
        .filter(|(k, _)| sys_keys.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let sweep_table: toml::Table = table
        .iter()
        .filter(|(k, _)| sweep_keys.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    let cfg: SystemConfig = sys_table
        .try_into()
        .map_err(|e| Error::Config(format!("system parameters: {e}")))?;
    let spec: SweepSpec = sweep_table
        .try_into()
        .map_err(|e| Error::Config(format!("sweep parameters: {e}")))?;
    cfg.validate()?;
    Ok((cfg, spec))
}

pub fn load_config(path: &Path) -> Result<(SystemConfig, SweepSpec)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
