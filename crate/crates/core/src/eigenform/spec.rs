use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::angles::{angles_for, mix_seed, usp4_angle_pairs, AngleDistribution, AngleStreamModel};
use super::newform::{load_newform, NewformFormat, NewformGL2};
use super::EigenformError;
use crate::satake::{lambda_p, SpinFactor};
use crate::sums::{sieve, PrimeTable};

/// Number of leading unramified primes on which two sources must disagree.
pub const DISTINCTNESS_PRIMES: usize = 10;

/// Values closer than this are treated as equal when certifying distinctness.
const AGREEMENT_TOLERANCE: f64 = 1e-9;

/// Imaginary part allowed on a root-table eigenvalue before it is rejected as non-real.
const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EigenformClass {
    G,
    Y,
}

impl EigenformClass {
    /// The constant `m` in `Σ λ(p)² ~ m·x/log x`.
    pub fn m(self) -> u32 {
        match self {
            EigenformClass::G => 1,
            EigenformClass::Y => 2,
        }
    }
}

/// A genus-1 source: either a newform with known coefficients or a synthetic angle stream.
#[derive(Clone, Debug, PartialEq)]
pub enum Gl2Source {
    Newform(NewformGL2),
    Angles { label: String, model: AngleStreamModel },
}

impl Gl2Source {
    pub fn label(&self) -> &str {
        match self {
            Gl2Source::Newform(f) => &f.label,
            Gl2Source::Angles { label, .. } => label,
        }
    }

    pub fn is_ramanujan(&self) -> bool {
        match self {
            Gl2Source::Newform(f) => f.is_ramanujan(),
            Gl2Source::Angles { .. } => true,
        }
    }

    fn level_primes(&self) -> Vec<u64> {
        match self {
            Gl2Source::Newform(f) => crate::symplectic::factorize(f.level).into_iter().map(|(p, _)| p).collect(),
            Gl2Source::Angles { .. } => Vec::new(),
        }
    }

    /// `ã(p)` for the primes of `all` not in `excluded`. Angle streams draw over
    /// all of `all`, so values do not depend on the excluded set.
    fn values(&self, all: &[u64], excluded: &BTreeSet<u64>) -> Result<Vec<f64>, EigenformError> {
        match self {
            Gl2Source::Newform(f) => {
                all.iter().filter(|p| !excluded.contains(p)).map(|&p| f.normalized_ap(p)).collect()
            }
            Gl2Source::Angles { model, .. } => {
                let angles = angles_for(model, all)?;
                Ok(all
                    .iter()
                    .zip(angles)
                    .filter(|(p, _)| !excluded.contains(p))
                    .map(|(_, t)| 2.0 * t.cos())
                    .collect())
            }
        }
    }
}

/// A class-G source: the GL(4) eigenvalue `a_π(p)` at each prime.
#[derive(Clone, Debug, PartialEq)]
pub enum Gl4Source {
    /// Satake angles of a Haar-random USp(4) element at each prime; roots `e^{±iθ₁}, e^{±iθ₂}`.
    Usp4Haar { label: String, seed: u64 },
    /// The same roots at every prime.
    FixedRoots { label: String, roots: Vec<Complex64> },
    /// Explicit roots per prime.
    RootTable { label: String, roots: BTreeMap<u64, Vec<Complex64>> },
    /// A constant eigenvalue, not tied to Satake data.
    Constant { label: String, value: f64 },
}

impl Gl4Source {
    pub fn label(&self) -> &str {
        match self {
            Gl4Source::Usp4Haar { label, .. }
            | Gl4Source::FixedRoots { label, .. }
            | Gl4Source::RootTable { label, .. }
            | Gl4Source::Constant { label, .. } => label,
        }
    }

    /// Whether every value comes from unit-modulus roots (or, for constants, obeys `|λ| ≤ 4`).
    pub fn is_ramanujan(&self) -> bool {
        let unit = |r: &Complex64| (r.norm() - 1.0).abs() <= 1e-12;
        match self {
            Gl4Source::Usp4Haar { .. } => true,
            Gl4Source::FixedRoots { roots, .. } => roots.iter().all(unit),
            Gl4Source::RootTable { roots, .. } => roots.values().flatten().all(unit),
            Gl4Source::Constant { value, .. } => crate::satake::check_weissauer(*value),
        }
    }

    fn values(&self, all: &[u64], excluded: &BTreeSet<u64>) -> Result<Vec<f64>, EigenformError> {
        let real = |p: u64, roots: &[Complex64]| {
            let l = lambda_p(&SpinFactor::new(p, roots.to_vec()));
            if l.im.abs() > REAL_TOLERANCE {
                Err(EigenformError::InvalidSpec(format!("non-real eigenvalue {l} at p = {p}")))
            } else {
                Ok(l.re)
            }
        };
        let keep = |p: &u64| !excluded.contains(p);
        match self {
            Gl4Source::Usp4Haar { seed, .. } => Ok(all
                .iter()
                .zip(usp4_angle_pairs(*seed, all.len()))
                .filter(|(p, _)| keep(p))
                .map(|(_, (a, b))| 2.0 * a.cos() + 2.0 * b.cos())
                .collect()),
            Gl4Source::FixedRoots { roots, .. } => {
                let v = real(2, roots)?;
                Ok(all.iter().filter(|p| keep(p)).map(|_| v).collect())
            }
            Gl4Source::RootTable { roots, .. } => all
                .iter()
                .filter(|p| keep(p))
                .map(|&p| roots.get(&p).ok_or(EigenformError::MissingCoefficient(p)).and_then(|r| real(p, r)))
                .collect(),
            Gl4Source::Constant { value, .. } => Ok(all.iter().filter(|p| keep(p)).map(|_| *value).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Sources {
    G(Gl4Source),
    Y(Box<[Gl2Source; 2]>),
}

/// The source of a normalized eigenvalue sequence, with its ramified set `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenformSpec {
    pub label: String,
    sources: Sources,
    ramified: BTreeSet<u64>,
}

impl EigenformSpec {
    pub fn general(label: impl Into<String>, source: Gl4Source, ramified: impl IntoIterator<Item = u64>) -> Self {
        Self { label: label.into(), sources: Sources::G(source), ramified: ramified.into_iter().collect() }
    }

    /// A Yoshida-type spec `λ = ã_f + ã_g`. The two sources must have different
    /// labels and disagree at one of the first [`DISTINCTNESS_PRIMES`] unramified primes.
    /// Primes dividing either newform level are added to `S`.
    pub fn yoshida(
        label: impl Into<String>,
        f: Gl2Source,
        g: Gl2Source,
        ramified: impl IntoIterator<Item = u64>,
    ) -> Result<Self, EigenformError> {
        let mut ramified: BTreeSet<u64> = ramified.into_iter().collect();
        ramified.extend(f.level_primes());
        ramified.extend(g.level_primes());
        certify_distinct(&[SourceRef::Gl2(&f), SourceRef::Gl2(&g)], &ramified)?;
        Ok(Self { label: label.into(), sources: Sources::Y(Box::new([f, g])), ramified })
    }

    pub fn class(&self) -> EigenformClass {
        match self.sources {
            Sources::G(_) => EigenformClass::G,
            Sources::Y(_) => EigenformClass::Y,
        }
    }

    pub fn ramified(&self) -> &BTreeSet<u64> {
        &self.ramified
    }

    pub fn source_labels(&self) -> Vec<&str> {
        match &self.sources {
            Sources::G(s) => vec![s.label()],
            Sources::Y(pair) => pair.iter().map(Gl2Source::label).collect(),
        }
    }

    pub fn is_ramanujan(&self) -> bool {
        match &self.sources {
            Sources::G(s) => s.is_ramanujan(),
            Sources::Y(pair) => pair.iter().all(Gl2Source::is_ramanujan),
        }
    }

    fn source_refs(&self) -> Vec<SourceRef<'_>> {
        match &self.sources {
            Sources::G(s) => vec![SourceRef::Gl4(s)],
            Sources::Y(pair) => pair.iter().map(SourceRef::Gl2).collect(),
        }
    }

    fn values(&self, all: &[u64]) -> Result<Vec<f64>, EigenformError> {
        match &self.sources {
            Sources::G(s) => s.values(all, &self.ramified),
            Sources::Y(pair) => {
                let a = pair[0].values(all, &self.ramified)?;
                let b = pair[1].values(all, &self.ramified)?;
                Ok(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
            }
        }
    }
}

#[derive(Clone, Copy)]
enum SourceRef<'a> {
    Gl2(&'a Gl2Source),
    Gl4(&'a Gl4Source),
}

impl SourceRef<'_> {
    fn label(&self) -> &str {
        match self {
            SourceRef::Gl2(s) => s.label(),
            SourceRef::Gl4(s) => s.label(),
        }
    }

    /// Values on `primes`; `None` where a coefficient is unavailable.
    fn probe(&self, primes: &[u64]) -> Vec<Option<f64>> {
        let none = BTreeSet::new();
        let all = match primes.last() {
            Some(&pmax) => sieve(pmax).primes,
            None => return Vec::new(),
        };
        let pick = |vals: Vec<f64>| -> Vec<Option<f64>> {
            all.iter().zip(vals).filter(|(p, _)| primes.contains(p)).map(|(_, v)| Some(v)).collect()
        };
        let full = match self {
            SourceRef::Gl2(s) => s.values(&all, &none),
            SourceRef::Gl4(s) => s.values(&all, &none),
        };
        match full {
            Ok(v) => pick(v),
            // Newforms and tables can be sparse or ramified: probe prime by prime.
            Err(_) => primes
                .iter()
                .map(|&p| match self {
                    SourceRef::Gl2(Gl2Source::Newform(f)) => f.normalized_ap(p).ok(),
                    SourceRef::Gl4(s) => s.values(&[p], &none).ok().and_then(|v| v.first().copied()),
                    SourceRef::Gl2(s) => s.values(&[p], &none).ok().and_then(|v| v.first().copied()),
                })
                .collect(),
        }
    }
}

fn first_unramified_primes(ramified: &BTreeSet<u64>, count: usize) -> Vec<u64> {
    let mut limit = 64;
    loop {
        let primes: Vec<u64> = sieve(limit).primes.into_iter().filter(|p| !ramified.contains(p)).take(count).collect();
        if primes.len() == count {
            return primes;
        }
        limit *= 2;
    }
}

fn certify_distinct(sources: &[SourceRef<'_>], ramified: &BTreeSet<u64>) -> Result<(), EigenformError> {
    let primes = first_unramified_primes(ramified, DISTINCTNESS_PRIMES);
    let probes: Vec<Vec<Option<f64>>> = sources.iter().map(|s| s.probe(&primes)).collect();
    for i in 0..sources.len() {
        for j in i + 1..sources.len() {
            let (a, b) = (&sources[i], &sources[j]);
            if a.label() == b.label() {
                return Err(EigenformError::SourcesNotDistinct(format!("label `{}` appears twice", a.label())));
            }
            let same_kind = matches!((a, b), (SourceRef::Gl2(_), SourceRef::Gl2(_)) | (SourceRef::Gl4(_), SourceRef::Gl4(_)));
            if !same_kind {
                continue;
            }
            let differs = probes[i]
                .iter()
                .zip(&probes[j])
                .any(|(x, y)| matches!((x, y), (Some(x), Some(y)) if (x - y).abs() > AGREEMENT_TOLERANCE));
            if !differs {
                return Err(EigenformError::SourcesNotDistinct(format!(
                    "`{}` and `{}` agree on the first {} unramified primes",
                    a.label(),
                    b.label(),
                    DISTINCTNESS_PRIMES
                )));
            }
        }
    }
    Ok(())
}

/// Every underlying GL(2)/GL(4) source of `f` and `g` is pairwise distinct.
pub fn check_distinct_sources(f: &EigenformSpec, g: &EigenformSpec) -> Result<(), EigenformError> {
    let mut refs = f.source_refs();
    refs.extend(g.source_refs());
    let ramified: BTreeSet<u64> = f.ramified.union(&g.ramified).copied().collect();
    certify_distinct(&refs, &ramified)
}

/// `(p, λ(p))` for `p ≤ pmax`, `p ∉ S`, ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaStream {
    pub label: String,
    pub values: Vec<(u64, f64)>,
}

impl LambdaStream {
    pub fn new(label: impl Into<String>, values: Vec<(u64, f64)>) -> Self {
        Self { label: label.into(), values }
    }

    /// `λ ↦ t·λ`.
    pub fn scaled(&self, t: f64) -> Self {
        Self { label: format!("{}*{t}", self.label), values: self.values.iter().map(|&(p, v)| (p, t * v)).collect() }
    }

    /// Constant `λ(p) = value` on the primes of `table` up to `pmax`.
    pub fn constant(value: f64, table: &PrimeTable, pmax: u64) -> Self {
        Self::new(format!("constant:{value}"), table.primes_up_to(pmax).iter().map(|&p| (p, value)).collect())
    }
}

/// The normalized eigenvalue sequence of `spec` up to `pmax`.
pub fn lambda_stream(spec: &EigenformSpec, pmax: u64) -> Result<LambdaStream, EigenformError> {
    let table = sieve(pmax.max(2));
    lambda_stream_on(spec, &table, pmax)
}

/// As [`lambda_stream`], reusing an existing prime table (`pmax ≤ table.limit`).
pub fn lambda_stream_on(spec: &EigenformSpec, table: &PrimeTable, pmax: u64) -> Result<LambdaStream, EigenformError> {
    let all = table.primes_up_to(pmax);
    let values = spec.values(all)?;
    let kept = all.iter().copied().filter(|p| !spec.ramified.contains(p));
    Ok(LambdaStream::new(spec.label.clone(), kept.zip(values).collect()))
}

/// One source entry of an eigenform spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    /// Built-in Δ with coefficients up to `nterms` (default 2000).
    Delta {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        nterms: Option<usize>,
    },
    /// A newform file, resolved relative to the spec file.
    Newform {
        path: PathBuf,
        #[serde(default)]
        format: Option<NewformFormat>,
    },
    Semicircle {
        seed: u64,
        #[serde(default)]
        label: Option<String>,
    },
    Uniform {
        seed: u64,
        #[serde(default)]
        label: Option<String>,
    },
    /// Angles keyed by prime (as strings in JSON), with an optional fallback.
    AngleTable {
        angles: BTreeMap<String, f64>,
        #[serde(default)]
        default: Option<f64>,
        #[serde(default)]
        label: Option<String>,
    },
    Usp4 {
        seed: u64,
        #[serde(default)]
        label: Option<String>,
    },
    FixedRoots {
        roots: Vec<Complex64>,
        #[serde(default)]
        label: Option<String>,
    },
    RootTable {
        roots: BTreeMap<String, Vec<Complex64>>,
        #[serde(default)]
        label: Option<String>,
    },
    Constant {
        value: f64,
        #[serde(default)]
        label: Option<String>,
    },
}

enum Resolved {
    Gl2(Gl2Source),
    Gl4(Gl4Source),
}

fn prime_keys<V: Clone>(map: &BTreeMap<String, V>) -> Result<BTreeMap<u64, V>, EigenformError> {
    map.iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<u64>()
                .map(|p| (p, v.clone()))
                .map_err(|_| EigenformError::InvalidSpec(format!("table key `{k}` is not a prime")))
        })
        .collect()
}

impl SourceConfig {
    fn resolve(&self, base: &Path, seed: Option<u64>) -> Result<Resolved, EigenformError> {
        let seeded = |s: u64| seed.map_or(s, |g| mix_seed(g, s));
        let name = |label: &Option<String>, default: String| label.clone().unwrap_or(default);
        Ok(match self {
            SourceConfig::Delta { label, nterms } => {
                let mut f = NewformGL2::delta(nterms.unwrap_or(2000))?;
                if let Some(l) = label {
                    f.label = l.clone();
                }
                Resolved::Gl2(Gl2Source::Newform(f))
            }
            SourceConfig::Newform { path, format } => {
                let full = base.join(path);
                let format = format.unwrap_or_else(|| NewformFormat::from_path(&full));
                Resolved::Gl2(Gl2Source::Newform(load_newform(&full, format)?))
            }
            SourceConfig::Semicircle { seed: s, label } => Resolved::Gl2(Gl2Source::Angles {
                label: name(label, format!("semicircle:{s}")),
                model: AngleStreamModel::semicircle(seeded(*s)),
            }),
            SourceConfig::Uniform { seed: s, label } => Resolved::Gl2(Gl2Source::Angles {
                label: name(label, format!("uniform:{s}")),
                model: AngleStreamModel::uniform(seeded(*s)),
            }),
            SourceConfig::AngleTable { angles, default, label } => Resolved::Gl2(Gl2Source::Angles {
                label: name(label, "angle_table".into()),
                model: AngleStreamModel {
                    kind: AngleDistribution::FixedTable { angles: prime_keys(angles)?, default: *default },
                    seed: 0,
                },
            }),
            SourceConfig::Usp4 { seed: s, label } => {
                Resolved::Gl4(Gl4Source::Usp4Haar { label: name(label, format!("usp4:{s}")), seed: seeded(*s) })
            }
            SourceConfig::FixedRoots { roots, label } => {
                if roots.len() > 4 {
                    return Err(EigenformError::InvalidSpec("at most four roots".into()));
                }
                Resolved::Gl4(Gl4Source::FixedRoots { label: name(label, "fixed_roots".into()), roots: roots.clone() })
            }
            SourceConfig::RootTable { roots, label } => {
                let roots = prime_keys(roots)?;
                if roots.values().any(|r| r.len() > 4) {
                    return Err(EigenformError::InvalidSpec("at most four roots per prime".into()));
                }
                Resolved::Gl4(Gl4Source::RootTable { label: name(label, "root_table".into()), roots })
            }
            SourceConfig::Constant { value, label } => {
                Resolved::Gl4(Gl4Source::Constant { label: name(label, format!("constant:{value}")), value: *value })
            }
        })
    }
}

/// JSON form of an [`EigenformSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default)]
    pub label: Option<String>,
    pub class: EigenformClass,
    #[serde(default)]
    pub ramified: Vec<u64>,
    pub sources: Vec<SourceConfig>,
}

impl SpecFile {
    pub fn load(path: &Path) -> Result<Self, EigenformError> {
        let io = |msg: String| EigenformError::Io { path: path.display().to_string(), msg };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| io(e.to_string()))
    }

    /// Builds the spec. Relative newform paths are taken from `base`; when
    /// `seed` is given, synthetic source seeds are mixed with it.
    pub fn resolve(&self, base: &Path, seed: Option<u64>) -> Result<EigenformSpec, EigenformError> {
        let resolved = self.sources.iter().map(|s| s.resolve(base, seed)).collect::<Result<Vec<_>, _>>()?;
        match (self.class, resolved.as_slice()) {
            (EigenformClass::G, [Resolved::Gl4(s)]) => {
                let label = self.label.clone().unwrap_or_else(|| s.label().to_string());
                Ok(EigenformSpec::general(label, s.clone(), self.ramified.iter().copied()))
            }
            (EigenformClass::Y, [Resolved::Gl2(f), Resolved::Gl2(g)]) => {
                let label = self.label.clone().unwrap_or_else(|| format!("{}+{}", f.label(), g.label()));
                EigenformSpec::yoshida(label, f.clone(), g.clone(), self.ramified.iter().copied())
            }
            (EigenformClass::G, _) => Err(EigenformError::InvalidSpec(
                "class G takes exactly one of usp4, fixed_roots, root_table, constant".into(),
            )),
            (EigenformClass::Y, _) => Err(EigenformError::InvalidSpec(
                "class Y takes exactly two of delta, newform, semicircle, uniform, angle_table".into(),
            )),
        }
    }
}
