use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::InputError;
use crate::geodesics::{ComplexPath, GeodesicState};
use crate::geometry::{check_domain, ChartPoint, Family, GeometrySpec};
use crate::reconstruct::SignMode;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const TOL_ENV: &str = "GEODESY_DEFAULT_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Curvature,
    Geodesic,
    Solve,
    Riccati,
    KnVerify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Geodesic => "geodesic",
            Command::Solve => "solve",
            Command::Riccati => "riccati",
            Command::KnVerify => "kn-verify",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Command::Curvature,
            Command::Geodesic,
            Command::Solve,
            Command::Riccati,
            Command::KnVerify,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Curvature => &["points"],
            Command::Geodesic => &["start", "velocity", "s_span"],
            Command::Solve => &[
                "x0",
                "value",
                "slope",
                "span",
                "path",
                "path_b",
                "path_tol",
                "coefficients",
                "constant",
            ],
            Command::Riccati => &["x0", "theta0", "span"],
            Command::KnVerify => &[
                "points",
                "start",
                "velocity",
                "s_span",
                "hyperbolic_start",
                "hyperbolic_velocity",
                "ads_start",
                "ads_velocity",
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Pass,
    Fail,
}

const COMMON_KEYS: &[&str] = &["command", "family", "h", "tol", "seed", "expect", "samples"];

/// One `[section]` of a scenario or pool file.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<(String, String, usize)>,
}

/// Flat `key = value` text with `[name]` headers. `#` starts a comment.
/// Keys before the first header form a section named `scenario`.
pub fn parse_sections(text: &str) -> Result<Vec<Section>, InputError> {
    let mut out: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| InputError::syntax(n, "unterminated section header"))?
                .trim();
            if name.is_empty() {
                return Err(InputError::syntax(n, "empty section name"));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(InputError::syntax(n, format!("duplicate section `{name}`")));
            }
            out.push(Section {
                name: name.to_string(),
                line: n,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| InputError::syntax(n, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(InputError::syntax(n, "missing key"));
        }
        if out.is_empty() {
            out.push(Section {
                name: "scenario".into(),
                line: n,
                entries: Vec::new(),
            });
        }
        let sec = out.last_mut().expect("section exists");
        if sec.entries.iter().any(|(k, _, _)| k == key) {
            return Err(InputError::syntax(
                n,
                format!("duplicate key `{key}` in [{}]", sec.name),
            ));
        }
        sec.entries.push((key.to_string(), value.to_string(), n));
    }
    Ok(out)
}

/// Values given on the command line; they win over file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub family: Option<Family>,
    pub h: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub default_tol: Option<f64>,
}

fn family_name<S: Serializer>(f: &Family, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(f.name())
}

/// A validated unit of work, echoed into the report.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub name: String,
    pub command: Command,
    #[serde(serialize_with = "family_name")]
    pub family: Family,
    pub h: String,
    pub tol: f64,
    pub seed: u64,
    pub expect: Expect,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub enum SolveData {
    Interval {
        x0: f64,
        lo: f64,
        hi: f64,
        value: f64,
        slope: f64,
    },
    Path {
        path: ComplexPath,
        value: Complex64,
        slope: Complex64,
    },
    /// A constant fibre coordinate, not a geodesic in general.
    Constant { x0: f64, lo: f64, hi: f64, value: f64 },
}

#[derive(Clone, Debug)]
pub struct PlaneData {
    pub start: [f64; 2],
    pub velocity: [f64; 2],
}

#[derive(Clone, Debug)]
pub enum Task {
    Curvature {
        points: usize,
    },
    Geodesic {
        initial: GeodesicState,
        s_span: (f64, f64),
    },
    Solve {
        data: SolveData,
        coefficients: Vec<(Complex64, Complex64)>,
        path_b: Option<ComplexPath>,
        path_tol: f64,
    },
    Riccati {
        x0: f64,
        theta0: Complex64,
        span: (f64, f64),
        mode: SignMode,
    },
    KnVerify {
        points: usize,
        split: Option<(GeodesicState, (f64, f64))>,
        hyperbolic: Option<PlaneData>,
        ads: Option<PlaneData>,
        s_span: (f64, f64),
    },
}

#[derive(Clone, Debug)]
pub struct Job {
    pub scenario: Scenario,
    pub spec: GeometrySpec,
    pub task: Task,
    pub samples: usize,
}

struct Reader<'a> {
    section: &'a str,
    params: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> InputError {
        InputError::invalid(format!("[{}] {key}: {msg}", self.section))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn numbers(&self, key: &str, text: &str) -> Result<Vec<f64>, InputError> {
        text.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(key, format!("`{t}` is not a finite number")))
            })
            .collect()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, InputError> {
        match self.raw(key) {
            None => Ok(default),
            Some(t) => match self.numbers(key, t)?.as_slice() {
                [v] => Ok(*v),
                _ => Err(self.err(key, "expected one number")),
            },
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, InputError> {
        match self.raw(key) {
            None => Ok(default),
            Some(t) => t
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| self.err(key, "expected a positive integer")),
        }
    }

    fn complex_or(&self, key: &str, default: Complex64) -> Result<Complex64, InputError> {
        match self.raw(key) {
            None => Ok(default),
            Some(t) => match self.numbers(key, t)?.as_slice() {
                [re] => Ok(Complex64::new(*re, 0.0)),
                [re, im] => Ok(Complex64::new(*re, *im)),
                _ => Err(self.err(key, "expected `re` or `re,im`")),
            },
        }
    }

    fn span_or(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64), InputError> {
        match self.raw(key) {
            None => Ok(default),
            Some(t) => match self.numbers(key, t)?.as_slice() {
                [a, b] if a < b => Ok((*a, *b)),
                [_, _] => Err(self.err(key, "the interval must be increasing")),
                _ => Err(self.err(key, "expected `lo,hi`")),
            },
        }
    }

    fn array<const N: usize>(&self, key: &str) -> Result<Option<[f64; N]>, InputError> {
        match self.raw(key) {
            None => Ok(None),
            Some(t) => {
                let v = self.numbers(key, t)?;
                v.try_into()
                    .map(Some)
                    .map_err(|_| self.err(key, format!("expected {N} comma-separated numbers")))
            }
        }
    }

    fn path(&self, key: &str) -> Result<Option<ComplexPath>, InputError> {
        self.raw(key)
            .map(|t| ComplexPath::parse(t).map_err(|e| self.err(key, e)))
            .transpose()
    }

    fn coefficients(&self) -> Result<Vec<(Complex64, Complex64)>, InputError> {
        let text = self.raw("coefficients").unwrap_or("1,0;0,1");
        text.split(';')
            .map(|pair| match self.numbers("coefficients", pair)?.as_slice() {
                [a, b] => Ok((Complex64::from(*a), Complex64::from(*b))),
                _ => Err(self.err("coefficients", "expected pairs `A,B` separated by `;`")),
            })
            .collect()
    }
}

fn state(family: Family, start: &[f64], velocity: &[f64]) -> Option<GeodesicState> {
    let (coords, velocity) = match (family, start, velocity) {
        (Family::ComplexSphere, [zr, zi, qr, qi], [vzr, vzi, vqr, vqi]) => (
            ChartPoint::complex(Complex64::new(*zr, *zi), Complex64::new(*qr, *qi)),
            ChartPoint::complex(Complex64::new(*vzr, *vzi), Complex64::new(*vqr, *vqi)),
        ),
        (Family::KahlerNorden, [x, phi, y, psi], [a, b, c, d]) => {
            (ChartPoint::kn(*x, *phi, *y, *psi), ChartPoint::kn(*a, *b, *c, *d))
        }
        (_, [x, q], [vx, vq]) if family.dim() == 2 && family != Family::ComplexSphere => {
            (ChartPoint::real(*x, *q), ChartPoint::real(*vx, *vq))
        }
        _ => return None,
    };
    Some(GeodesicState {
        coords,
        velocity,
        s: 0.0,
    })
}

fn default_state(family: Family) -> (&'static str, &'static str) {
    match family {
        Family::ComplexSphere => ("0,0,1,0", "1,0,0,0"),
        Family::KahlerNorden => ("0,1,0,0.5", "1,0,0.5,0"),
        _ => ("0,1", "1,0"),
    }
}

impl Job {
    /// Turn a section into a job, checking every value against the
    /// preconditions of the module that will run it.
    pub fn from_section(section: &Section, ov: &Overrides) -> Result<Job, InputError> {
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        for (k, v, _) in &section.entries {
            params.insert(k.clone(), v.clone());
        }
        let name = section.name.clone();
        let invalid = |msg: String| InputError::invalid(format!("[{name}] {msg}"));

        let file_command = params.remove("command");
        let command = match (ov.command, file_command.as_deref()) {
            (Some(c), None) => c,
            (Some(c), Some(f)) if f == c.name() => c,
            (Some(c), Some(f)) => {
                return Err(invalid(format!(
                    "command `{f}` does not match the `{}` subcommand",
                    c.name()
                )))
            }
            (None, Some(f)) => Command::from_name(f).ok_or_else(|| invalid(format!("unknown command `{f}`")))?,
            (None, None) => return Err(invalid("missing `command`".into())),
        };
        for key in params.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !command.keys().contains(&key.as_str()) {
                return Err(invalid(format!("unknown key `{key}` for {}", command.name())));
            }
        }

        let family_text = params.remove("family");
        let family = match (ov.family, family_text.as_deref()) {
            (Some(f), _) => f,
            (None, Some(t)) => Family::from_name(t).ok_or_else(|| invalid(format!("unknown family `{t}`")))?,
            (None, None) if command == Command::KnVerify => Family::KahlerNorden,
            (None, None) => return Err(invalid("missing `family`".into())),
        };
        let h_text = params.remove("h");
        let h = ov.h.clone().or(h_text).ok_or_else(|| invalid("missing `h`".into()))?;
        let spec = GeometrySpec::parse(family, &h).map_err(|e| InputError::expression(&name, &h, e))?;

        let r = Reader {
            section: &name,
            params: &params,
        };
        let tol = match ov.tol {
            Some(t) => t,
            None => r.f64_or("tol", ov.default_tol.unwrap_or(DEFAULT_TOL))?,
        };
        if !(tol > 0.0) {
            return Err(invalid("tolerance must be positive".into()));
        }
        let seed = match (ov.seed, params.get("seed")) {
            (Some(s), _) => s,
            (None, Some(t)) => t
                .parse::<u64>()
                .map_err(|_| r.err("seed", "expected an unsigned integer"))?,
            (None, None) => 0,
        };
        let expect = match params.get("expect").map(String::as_str) {
            None | Some("pass") => Expect::Pass,
            Some("fail") => Expect::Fail,
            Some(t) => return Err(r.err("expect", format!("`{t}` is neither `pass` nor `fail`"))),
        };
        let samples = r.usize_or("samples", 50)?;

        let task = match command {
            Command::Curvature => Task::Curvature {
                points: r.usize_or("points", 100)?,
            },
            Command::Geodesic => {
                let (ds, dv) = default_state(family);
                let start = r.numbers("start", r.raw("start").unwrap_or(ds))?;
                let vel = r.numbers("velocity", r.raw("velocity").unwrap_or(dv))?;
                let initial = state(family, &start, &vel)
                    .ok_or_else(|| invalid(format!("wrong number of coordinates for {family}")))?;
                check_domain(&spec, &initial.coords).map_err(|e| r.err("start", e))?;
                Task::Geodesic {
                    initial,
                    s_span: r.span_or("s_span", (0.0, 1.0))?,
                }
            }
            Command::Solve => {
                let data = if let Some(t) = r.raw("constant") {
                    if family.mode() != crate::Mode::Real {
                        return Err(r.err("constant", "only for real families"));
                    }
                    let value = r
                        .f64_or("constant", 0.0)
                        .map_err(|_| r.err("constant", format!("`{t}`")))?;
                    let (lo, hi) = r.span_or("span", (0.0, 1.0))?;
                    let x0 = r.f64_or("x0", lo)?;
                    check_domain(&spec, &ChartPoint::real(x0, value)).map_err(|e| r.err("constant", e))?;
                    SolveData::Constant { x0, lo, hi, value }
                } else if family.mode() == crate::Mode::Real {
                    let (lo, hi) = r.span_or("span", (0.0, 1.0))?;
                    let x0 = r.f64_or("x0", lo)?;
                    if !(lo <= x0 && x0 <= hi) {
                        return Err(r.err("x0", "outside the interval"));
                    }
                    let value = r.f64_or("value", 1.0)?;
                    check_domain(&spec, &ChartPoint::real(x0, value)).map_err(|e| r.err("value", e))?;
                    SolveData::Interval {
                        x0,
                        lo,
                        hi,
                        value,
                        slope: r.f64_or("slope", 0.0)?,
                    }
                } else if family == Family::ComplexSphere {
                    let path = r
                        .path("path")?
                        .ok_or_else(|| r.err("path", "required for the complex family"))?;
                    let value = r.complex_or("value", Complex64::new(1.0, 0.0))?;
                    check_domain(&spec, &ChartPoint::complex(path.start(), value)).map_err(|e| r.err("value", e))?;
                    SolveData::Path {
                        path,
                        value,
                        slope: r.complex_or("slope", Complex64::new(0.0, 0.0))?,
                    }
                } else {
                    return Err(invalid("solve runs on the hyperbolic, ads and complex families".into()));
                };
                let path_b = r.path("path_b")?;
                if let (Some(b), SolveData::Path { path, .. }) = (&path_b, &data) {
                    if b.start() != path.start() || b.end() != path.end() {
                        return Err(r.err("path_b", "must share both end points with `path`"));
                    }
                } else if path_b.is_some() {
                    return Err(r.err("path_b", "only for the complex family"));
                }
                Task::Solve {
                    data,
                    coefficients: r.coefficients()?,
                    path_b,
                    path_tol: r.f64_or("path_tol", 1e-8)?,
                }
            }
            Command::Riccati => {
                let mode = match family {
                    Family::ComplexSphere => SignMode::Imaginary,
                    Family::KahlerNorden => return Err(invalid("riccati runs on 2D families".into())),
                    _ => SignMode::Real,
                };
                let span = r.span_or("span", (0.0, 1.0))?;
                let x0 = r.f64_or("x0", span.0)?;
                if !(span.0 <= x0 && x0 <= span.1) {
                    return Err(r.err("x0", "outside the interval"));
                }
                Task::Riccati {
                    x0,
                    theta0: r.complex_or("theta0", Complex64::new(1.0, 0.0))?,
                    span,
                    mode,
                }
            }
            Command::KnVerify => {
                if family != Family::KahlerNorden {
                    return Err(invalid("kn-verify needs the kn family".into()));
                }
                let split = match (r.array::<4>("start")?, r.array::<4>("velocity")?) {
                    (Some(s), Some(v)) => {
                        let st = state(family, &s, &v).expect("four coordinates");
                        check_domain(&spec, &st.coords).map_err(|e| r.err("start", e))?;
                        Some((st, r.span_or("s_span", (0.0, 1.0))?))
                    }
                    (None, None) => None,
                    _ => return Err(invalid("`start` and `velocity` go together".into())),
                };
                let plane = |a: &str, b: &str| -> Result<Option<PlaneData>, InputError> {
                    match (r.array::<2>(a)?, r.array::<2>(b)?) {
                        (Some(start), Some(velocity)) => Ok(Some(PlaneData { start, velocity })),
                        (None, None) => Ok(None),
                        _ => Err(invalid(format!("`{a}` and `{b}` go together"))),
                    }
                };
                let hyperbolic = plane("hyperbolic_start", "hyperbolic_velocity")?;
                let ads = plane("ads_start", "ads_velocity")?;
                if (hyperbolic.is_some() || ads.is_some()) && spec.h().to_real().is_err() {
                    return Err(invalid(
                        "submanifold checks need an h that is real on the real axis".into(),
                    ));
                }
                Task::KnVerify {
                    points: r.usize_or("points", 100)?,
                    split,
                    hyperbolic,
                    ads,
                    s_span: r.span_or("s_span", (0.0, 1.0))?,
                }
            }
        };

        let mut echo = params.clone();
        echo.retain(|k, _| !matches!(k.as_str(), "tol" | "seed" | "expect"));
        Ok(Job {
            scenario: Scenario {
                name,
                command,
                family,
                h,
                tol,
                seed,
                expect,
                params: echo,
            },
            spec,
            task,
            samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let s = parse_sections("# pool\n[a]\nh = x # trailing\nfamily=hyperbolic\n\n[b]\npath = 0,0;1,1\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].entries[0].0, "h");
        assert_eq!(s[0].entries[0].1, "x");
        assert_eq!(s[1].entries[0].1, "0,0;1,1");
    }

    #[test]
    fn headerless_file_is_one_scenario() {
        let s = parse_sections("command = curvature\nfamily = ads\nh = 1\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].name, "scenario");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_sections("[a\nh=1").is_err());
        assert!(parse_sections("[a]\njust text").is_err());
        assert!(parse_sections("[a]\nh=1\nh=2").is_err());
        assert!(parse_sections("[a]\n[a]").is_err());
    }

    fn job(text: &str) -> Result<Job, InputError> {
        Job::from_section(&parse_sections(text).unwrap()[0], &Overrides::default())
    }

    #[test]
    fn validation() {
        assert!(job("command=curvature\nfamily=hyperbolic\nh=sin(x)+3").is_ok());
        assert!(job("command=curvature\nfamily=hyperbolic\nh=sin(").is_err());
        assert!(job("command=curvature\nfamily=complex\nh=conj(z)").is_err());
        assert!(job("command=curvature\nfamily=nowhere\nh=1").is_err());
        assert!(job("command=curvature\nfamily=ads\nh=1\nspan=0,1").is_err());
        assert!(job("command=solve\nfamily=hyperbolic\nh=1\nvalue=1").is_err());
        assert!(job("command=solve\nfamily=hyperbolic\nh=-1\nspan=1,0").is_err());
        assert!(job("command=solve\nfamily=complex\nh=1").is_err());
        assert!(job("command=kn-verify\nfamily=hyperbolic\nh=1").is_err());
        assert!(job("command=kn-verify\nh=z\nstart=0,1,0,0.5").is_err());
        assert!(job("command=curvature\nfamily=ads\nh=1\nexpect=maybe").is_err());
    }

    #[test]
    fn overrides_win() {
        let sec = &parse_sections("command=curvature\nfamily=ads\nh=1\ntol=1e-3\nseed=4").unwrap()[0];
        let ov = Overrides {
            h: Some("2".into()),
            tol: Some(1e-9),
            seed: Some(7),
            ..Overrides::default()
        };
        let j = Job::from_section(sec, &ov).unwrap();
        assert_eq!((j.scenario.h.as_str(), j.scenario.tol, j.scenario.seed), ("2", 1e-9, 7));
    }
}
