//! Run configuration: a flat `key = value` file merged with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;
use relcurrent::{Spin, C64};

/// Bad input from the user; maps to exit code 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Keys accepted in a config file, with their defaults. `None` means unset.
const KEYS: &[(&str, Option<&str>)] = &[
    ("spin", Some("1/2")),
    ("sweep", None),
    ("sigma", Some("0.5")),
    ("width", None),
    ("p0", Some("0,0,0")),
    ("x0", Some("0,0,0")),
    ("weights", None),
    ("nodes", Some("24")),
    ("levels", Some("2")),
    ("threads", None),
    ("seed", Some("1")),
    ("out", Some("relcurrent-out")),
    ("compare-analytic", Some("false")),
    ("boost", None),
    ("rotate", None),
    ("suite", None),
    ("spinor-samples", Some("1000")),
    ("group-samples", Some("500")),
    ("geometry", Some("line")),
    ("origin", Some("0,0,0")),
    ("dir-a", Some("1,0,0")),
    ("dir-b", Some("0,1,0")),
    ("dir-c", Some("0,0,1")),
    ("extent", Some("6")),
    ("points", Some("121")),
    ("time", Some("0")),
];

/// Raw settings after merging defaults, the config file and flags, in that order.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(config: Option<&Path>) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (k, v) in KEYS {
            if let Some(v) = v {
                values.insert(k.to_string(), v.to_string());
            }
        }
        let mut settings = Self { values };
        if let Some(path) = config {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            settings.merge_file(&text)?;
        }
        Ok(settings)
    }

    fn merge_file(&mut self, text: &str) -> Result<(), UsageError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), Some(value.trim().to_string()))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: Option<String>) -> Result<(), UsageError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(usage(format!("unknown setting '{key}'")));
        }
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| usage(format!("invalid value '{v}' for {key}")))
            })
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, UsageError> {
        self.parse(key)?
            .ok_or_else(|| usage(format!("missing value for {key}")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, UsageError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse()
                            .map_err(|_| usage(format!("invalid entry '{item}' in {key}")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn vector(&self, key: &str) -> Result<Option<Vector3<f64>>, UsageError> {
        match self.list::<f64>(key)? {
            None => Ok(None),
            Some(v) if v.len() == 3 => Ok(Some(Vector3::new(v[0], v[1], v[2]))),
            Some(_) => Err(usage(format!("{key} needs three components"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Line,
    Plane,
    Volume,
}

impl Geometry {
    pub fn dimension(self) -> usize {
        match self {
            Geometry::Line => 1,
            Geometry::Plane => 2,
            Geometry::Volume => 3,
        }
    }
}

impl FromStr for Geometry {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "line" => Ok(Geometry::Line),
            "plane" => Ok(Geometry::Plane),
            "volume" => Ok(Geometry::Volume),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Line => "line",
            Geometry::Plane => "plane",
            Geometry::Volume => "volume",
        })
    }
}

/// Largest density grid accepted.
pub const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub geometry: Geometry,
    pub origin: Vector3<f64>,
    pub directions: [Vector3<f64>; 3],
    pub extent: f64,
    pub points: usize,
    pub time: f64,
}

impl DensityGrid {
    pub fn total_points(&self) -> usize {
        (0..self.geometry.dimension()).fold(1usize, |acc, _| acc.saturating_mul(self.points))
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.points - 1) as f64
    }

    /// Measure of one grid cell: spacing^k times the volume spanned by the directions used.
    pub fn cell(&self) -> f64 {
        let h = self.spacing();
        let [a, b, c] = &self.directions;
        match self.geometry {
            Geometry::Line => h * a.norm(),
            Geometry::Plane => h * h * a.cross(b).norm(),
            Geometry::Volume => h * h * h * a.dot(&b.cross(c)).abs(),
        }
    }

    /// Grid points in row-major order, first direction slowest.
    pub fn positions(&self) -> Vec<Vector3<f64>> {
        let n = self.points;
        let coord = |i: usize| -self.extent + i as f64 * self.spacing();
        let dims = self.geometry.dimension();
        let mut out = Vec::with_capacity(self.total_points());
        let mut idx = vec![0usize; dims];
        loop {
            let mut x = self.origin;
            for (k, i) in idx.iter().enumerate() {
                x += self.directions[k] * coord(*i);
            }
            out.push(x);
            let mut k = dims;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub spins: Vec<Spin>,
    pub sigmas: Vec<f64>,
    pub width: Option<Vector3<f64>>,
    pub p0: Vector3<f64>,
    pub x0: Vector3<f64>,
    pub weights: Option<Vec<C64>>,
    pub nodes: usize,
    pub levels: usize,
    pub threads: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub compare_analytic: bool,
    pub boost: Option<Vector3<f64>>,
    pub rotate: Option<Vector3<f64>>,
    pub suites: Vec<String>,
    pub spinor_samples: usize,
    pub group_samples: usize,
    pub grid: DensityGrid,
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("{},{},{}", v.x, v.y, v.z)
}

fn fmt_complex(z: &C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

impl RunConfig {
    pub fn resolve(command: &str, s: &Settings) -> Result<Self, UsageError> {
        let spins: Vec<Spin> = match s.list::<Spin>("sweep")? {
            Some(v) => v,
            None => vec![s.required("spin")?],
        };
        let sigmas: Vec<f64> = s.list("sigma")?.unwrap_or_default();
        if sigmas.is_empty() || sigmas.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(usage("sigma must be a list of positive widths"));
        }
        let width = s.vector("width")?;
        if let Some(w) = width {
            if w.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
                return Err(usage("width components must be positive"));
            }
        }
        let weights = match s.list::<C64>("weights")? {
            None => None,
            Some(w) => {
                let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(usage("weights must not all vanish"));
                }
                if let Some(spin) = spins.iter().find(|sp| sp.dim() != w.len()) {
                    return Err(usage(format!(
                        "{} weights given but spin {spin} has {} components",
                        w.len(),
                        spin.dim()
                    )));
                }
                Some(w.iter().map(|z| z / norm).collect())
            }
        };
        let nodes: usize = s.required("nodes")?;
        if nodes < 8 {
            return Err(usage("nodes per axis must be at least 8"));
        }
        let levels: usize = s.required("levels")?;
        let threads = match s.parse::<usize>("threads")? {
            Some(0) => return Err(usage("threads must be positive")),
            Some(t) => t,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let boost = s.vector("boost")?;
        if let Some(b) = boost {
            if b.norm() >= 1.0 {
                return Err(usage("boost velocity must be below 1"));
            }
        }
        let grid = DensityGrid {
            geometry: s
                .parse("geometry")?
                .ok_or_else(|| usage("geometry must be line, plane or volume"))?,
            origin: s.vector("origin")?.unwrap_or_default(),
            directions: [
                s.vector("dir-a")?.unwrap_or_else(Vector3::x),
                s.vector("dir-b")?.unwrap_or_else(Vector3::y),
                s.vector("dir-c")?.unwrap_or_else(Vector3::z),
            ],
            extent: s.required("extent")?,
            points: s.required("points")?,
            time: s.required("time")?,
        };
        if grid.points < 2 || grid.extent <= 0.0 || !grid.extent.is_finite() {
            return Err(usage("density grid needs points ≥ 2 and a positive extent"));
        }
        Ok(Self {
            command: command.to_string(),
            spins,
            sigmas,
            width,
            p0: s.vector("p0")?.unwrap_or_default(),
            x0: s.vector("x0")?.unwrap_or_default(),
            weights,
            nodes,
            levels,
            threads,
            seed: s.required("seed")?,
            out: PathBuf::from(s.raw("out").unwrap_or("relcurrent-out")),
            compare_analytic: s.required("compare-analytic")?,
            boost,
            rotate: s.vector("rotate")?,
            suites: s.list("suite")?.unwrap_or_default(),
            spinor_samples: s.required("spinor-samples")?,
            group_samples: s.required("group-samples")?,
            grid,
        })
    }

    /// Canonical `key = value` echo of everything that can change a result.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("command".into(), self.command.clone()),
            (
                "spins".into(),
                self.spins
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "sigma".into(),
                self.sigmas
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "width".into(),
                self.width.as_ref().map_or("isotropic".into(), fmt_vec),
            ),
            ("p0".into(), fmt_vec(&self.p0)),
            ("x0".into(), fmt_vec(&self.x0)),
            (
                "weights".into(),
                self.weights.as_ref().map_or("highest-weight".into(), |w| {
                    w.iter().map(fmt_complex).collect::<Vec<_>>().join(",")
                }),
            ),
            ("nodes".into(), self.nodes.to_string()),
            ("levels".into(), self.levels.to_string()),
            ("threads".into(), self.threads.to_string()),
            ("seed".into(), self.seed.to_string()),
            (
                "boost".into(),
                self.boost.as_ref().map_or("none".into(), fmt_vec),
            ),
            (
                "rotate".into(),
                self.rotate.as_ref().map_or("none".into(), fmt_vec),
            ),
        ];
        match self.command.as_str() {
            "nogo" => out.push(("compare-analytic".into(), self.compare_analytic.to_string())),
            "check" => {
                out.push((
                    "suites".into(),
                    if self.suites.is_empty() {
                        "all".into()
                    } else {
                        self.suites.join(",")
                    },
                ));
                out.push(("spinor-samples".into(), self.spinor_samples.to_string()));
                out.push(("group-samples".into(), self.group_samples.to_string()));
            }
            "density" => {
                let g = &self.grid;
                out.push(("geometry".into(), g.geometry.to_string()));
                out.push(("origin".into(), fmt_vec(&g.origin)));
                for (k, d) in g.directions.iter().take(g.geometry.dimension()).enumerate() {
                    out.push((format!("dir-{}", ["a", "b", "c"][k]), fmt_vec(d)));
                }
                out.push(("extent".into(), g.extent.to_string()));
                out.push(("points".into(), g.points.to_string()));
                out.push(("time".into(), g.time.to_string()));
            }
            _ => {}
        }
        out
    }
}
