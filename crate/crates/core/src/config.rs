//! Interaction configurations, weights and the on-disk config schema.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn norm3(a: &Point3) -> f64 {
    distance(a, &[0.0; 3])
}

/// Coupling `α_j ∈ (−∞, +∞]`. `Infinite` is the inert (free) center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strength {
    Finite(f64),
    Infinite,
}

impl Strength {
    pub fn finite(self) -> Option<f64> {
        match self {
            Strength::Finite(a) => Some(a),
            Strength::Infinite => None,
        }
    }
}

impl From<f64> for Strength {
    fn from(a: f64) -> Self {
        if a == f64::INFINITY {
            Strength::Infinite
        } else {
            Strength::Finite(a)
        }
    }
}

impl std::str::FromStr for Strength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(Strength::Infinite),
            t => t
                .parse::<f64>()
                .map(Strength::Finite)
                .map_err(|_| Error::ConfigParse(format!("bad strength {t:?}"))),
        }
    }
}

impl std::fmt::Display for Strength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strength::Finite(a) => write!(f, "{a}"),
            Strength::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Strength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Strength::Finite(a) => s.serialize_f64(*a),
            Strength::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Strength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(a) => Ok(Strength::Finite(a)),
            Raw::Int(a) => Ok(Strength::Finite(a as f64)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Centers `Y` and strengths `α` of `H_{α,Y}`. Constructed only through
/// [`InteractionConfig::new`], so every instance satisfies the invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionConfig {
    centers: Vec<Point3>,
    strengths: Vec<Strength>,
}

impl InteractionConfig {
    pub fn new(centers: Vec<Point3>, strengths: Vec<Strength>) -> Result<Self> {
        validate_config(InteractionConfig { centers, strengths })
    }

    /// One center at the origin.
    pub fn single(alpha: impl Into<Strength>) -> Self {
        InteractionConfig {
            centers: vec![[0.0; 3]],
            strengths: vec![alpha.into()],
        }
    }

    pub fn centers(&self) -> &[Point3] {
        &self.centers
    }

    pub fn strengths(&self) -> &[Strength] {
        &self.strengths
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Centers with finite strength; `+∞` centers are inert and dropped.
    pub fn active(&self) -> (Vec<Point3>, Vec<f64>) {
        self.centers
            .iter()
            .zip(&self.strengths)
            .filter_map(|(y, a)| a.finite().map(|a| (*y, a)))
            .unzip()
    }

    pub fn min_pairwise_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                let d = distance(&self.centers[i], &self.centers[j]);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    /// The single strength of an `N = 1` configuration.
    pub fn single_strength(&self) -> Result<Strength> {
        match self.strengths.as_slice() {
            [a] => Ok(*a),
            s => Err(Error::NotSingleCenter(s.len())),
        }
    }
}

pub fn validate_config(cfg: InteractionConfig) -> Result<InteractionConfig> {
    if cfg.centers.len() != cfg.strengths.len() {
        return Err(Error::LengthMismatch {
            centers: cfg.centers.len(),
            strengths: cfg.strengths.len(),
        });
    }
    if cfg.centers.is_empty() {
        return Err(Error::Empty);
    }
    for i in 0..cfg.centers.len() {
        for j in i + 1..cfg.centers.len() {
            if distance(&cfg.centers[i], &cfg.centers[j]) == 0.0 {
                return Err(Error::DuplicateCenter(i, j));
            }
        }
    }
    Ok(cfg)
}

/// Inner profile of a [`WeightSpec::LocalCutoff`] weight on `|x − c| < radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `1 + ln(radius / |x − c|)`.
    Log,
    /// `(radius / |x − c|)^exponent`.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w ≡ 1`.
    Unit,
    /// `w(x) = Σ_j (1 + 1/|x − y_j|)`.
    SingularSum { centers: Vec<Point3> },
    /// `w_q(x) = 1 + |x − c|^{3/q − 1}`; `q = ∞` is allowed.
    ConjQ { q: f64, center: Point3 },
    /// `w ≡ 1` outside the ball, `profile` inside.
    LocalCutoff {
        center: Point3,
        radius: f64,
        profile: CutoffProfile,
    },
}

impl WeightSpec {
    pub fn singular_sum_origin() -> Self {
        WeightSpec::SingularSum {
            centers: vec![[0.0; 3]],
        }
    }

    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            WeightSpec::Unit => "unit".into(),
            WeightSpec::SingularSum { centers } => format!("singular-sum[N={}]", centers.len()),
            WeightSpec::ConjQ { q, .. } => format!("conj-q[q={q}]"),
            WeightSpec::LocalCutoff { radius, profile, .. } => {
                format!("local-cutoff[R={radius},{profile:?}]")
            }
        }
    }

    fn base(&self, x: &Point3) -> Result<f64> {
        match self {
            WeightSpec::Unit => Ok(1.0),
            WeightSpec::SingularSum { centers } => {
                let mut s = 0.0;
                for y in centers {
                    let d = distance(x, y);
                    if d == 0.0 {
                        return Err(Error::SingularPoint);
                    }
                    s += 1.0 + 1.0 / d;
                }
                Ok(s)
            }
            WeightSpec::ConjQ { q, center } => {
                let e = 3.0 / q - 1.0;
                let d = distance(x, center);
                if e == 0.0 {
                    return Ok(2.0);
                }
                if d == 0.0 && e < 0.0 {
                    return Err(Error::SingularPoint);
                }
                Ok(1.0 + d.powf(e))
            }
            WeightSpec::LocalCutoff {
                center,
                radius,
                profile,
            } => {
                let d = distance(x, center);
                if d >= *radius {
                    return Ok(1.0);
                }
                if d == 0.0 {
                    return Err(Error::SingularPoint);
                }
                Ok(match profile {
                    CutoffProfile::Log => 1.0 + (radius / d).ln(),
                    CutoffProfile::Power { exponent } => (radius / d).powf(*exponent).max(1.0),
                })
            }
        }
    }
}

/// `w(x)^power`.
pub fn evaluate_weight(w: &WeightSpec, x: &Point3, power: f64) -> Result<f64> {
    if power == 0.0 {
        return Ok(1.0);
    }
    match w.base(x) {
        Ok(v) => Ok(v.powf(power)),
        // A diverging weight raised to a negative power vanishes.
        Err(Error::SingularPoint) if power < 0.0 => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Radial grid parameters in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    #[serde(default = "GridParams::default_r_min")]
    pub r_min: f64,
    #[serde(default = "GridParams::default_r_max")]
    pub r_max: f64,
    /// Upper bound on the width of uniform panels beyond `r = 1`.
    #[serde(default = "GridParams::default_panel")]
    pub panel_width: f64,
    /// Only `"geometric-uniform"` is supported: geometric panels on
    /// `[r_min, 1]`, uniform panels on `[1, r_max]`.
    #[serde(default = "GridParams::default_law")]
    pub spacing: String,
}

impl GridParams {
    fn default_r_min() -> f64 {
        1e-3
    }
    fn default_r_max() -> f64 {
        40.0
    }
    fn default_panel() -> f64 {
        0.25
    }
    fn default_law() -> String {
        "geometric-uniform".into()
    }
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            r_min: Self::default_r_min(),
            r_max: Self::default_r_max(),
            panel_width: Self::default_panel(),
            spacing: Self::default_law(),
        }
    }
}

/// Cartesian box used by brute-force oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxParams {
    pub half_extent: f64,
    pub n: usize,
}

impl Default for BoxParams {
    fn default() -> Self {
        BoxParams {
            half_extent: 5.0,
            n: 24,
        }
    }
}

/// Top-level config file (TOML).
///
/// ```toml
/// centers = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
/// strengths = [-0.5, "inf"]
///
/// [grid]
/// r_min = 1e-3
/// r_max = 40.0
/// panel_width = 0.25
/// spacing = "geometric-uniform"
///
/// [box]
/// half_extent = 5.0
/// n = 24
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub centers: Vec<Point3>,
    pub strengths: Vec<Strength>,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default, rename = "box")]
    pub oracle_box: BoxParams,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        if file.grid.spacing != "geometric-uniform" {
            return Err(Error::ConfigParse(format!(
                "unsupported spacing law {:?}",
                file.grid.spacing
            )));
        }
        if !(file.grid.r_min > 0.0 && file.grid.r_max > file.grid.r_min && file.grid.panel_width > 0.0) {
            return Err(Error::ConfigParse("grid parameters out of range".into()));
        }
        if file.oracle_box.n < 2 || file.oracle_box.half_extent <= 0.0 {
            return Err(Error::ConfigParse("box parameters out of range".into()));
        }
        Ok(file)
    }

    pub fn interaction(&self) -> Result<InteractionConfig> {
        InteractionConfig::new(self.centers.clone(), self.strengths.clone())
    }
}
