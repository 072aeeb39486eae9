//! Run configuration: a flat `key = value` file plus flag overrides.

use std::fmt::Write as _;
use std::path::PathBuf;

use ffquad::ffpoly::{Fq, MonicPoly};
use ffquad::moments::Mode;
use ffquad::report::Format;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub q: u32,
    pub g: Vec<usize>,
    pub x: Vec<u32>,
    pub k: Vec<u32>,
    pub sample: bool,
    /// Sample size (discriminants or matrices).
    pub n: usize,
    pub seed: u64,
    pub ell: Vec<String>,
    /// Matrix size N for `rmt`.
    pub dim: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub k_max: usize,
    pub d_max: usize,
    /// Symbol evaluations above which full enumeration triggers a warning.
    pub budget: f64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            q: 5,
            g: vec![1, 2, 3],
            x: vec![2],
            k: vec![1, 2, 3],
            sample: false,
            n: 1000,
            seed: 0,
            ell: vec!["1".into()],
            dim: vec![1],
            out: None,
            format: Format::Csv,
            workers: None,
            cache_dir: None,
            k_max: ffquad::eulerhadamard::DEFAULT_K_MAX,
            d_max: ffquad::constants::DEFAULT_D_MAX,
            budget: 1e10,
        }
    }
}

pub const KEYS: [&str; 16] = [
    "q", "g", "x", "k", "mode", "n", "seed", "ell", "dim", "out", "format", "workers", "cache_dir", "k_max", "d_max",
    "budget",
];

/// `3`, `1,2,4` or the inclusive range `1..3`.
pub fn parse_list<T>(s: &str) -> Result<Vec<T>, String>
where
    T: std::str::FromStr + Copy + Into<u64> + TryFrom<u64>,
{
    let num = |t: &str| t.trim().parse::<T>().map_err(|_| format!("bad number {t:?}"));
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (num(a)?.into(), num(b)?.into());
            if a > b {
                return Err(format!("empty range {part:?}"));
            }
            for v in a..=b {
                out.push(T::try_from(v).map_err(|_| format!("{v} out of range"))?);
            }
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err(format!("empty list {s:?}"));
    }
    Ok(out)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let num_err = |_| format!("bad value {value:?} for {key}");
        match key {
            "q" => self.q = value.parse().map_err(num_err)?,
            "g" => self.g = parse_list::<u32>(value)?.into_iter().map(|v| v as usize).collect(),
            "x" => self.x = parse_list(value)?,
            "k" => self.k = parse_list(value)?,
            "mode" => {
                self.sample = match value {
                    "full" => false,
                    "sample" => true,
                    _ => return Err(format!("mode must be full or sample, got {value:?}")),
                }
            }
            "n" => self.n = value.parse().map_err(num_err)?,
            "seed" => self.seed = value.parse().map_err(num_err)?,
            "ell" => self.ell = value.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            "dim" => self.dim = parse_list::<u32>(value)?.into_iter().map(|v| v as usize).collect(),
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            "format" => self.format = value.parse().map_err(|e: ffquad::Error| e.to_string())?,
            "workers" => self.workers = (!value.is_empty()).then(|| value.parse()).transpose().map_err(num_err)?,
            "cache_dir" => self.cache_dir = (!value.is_empty()).then(|| PathBuf::from(value)),
            "k_max" => self.k_max = value.parse().map_err(num_err)?,
            "d_max" => self.d_max = value.parse().map_err(num_err)?,
            "budget" => self.budget = value.parse().map_err(|_| format!("bad value {value:?} for {key}"))?,
            _ => return Err(format!("unknown config key {key:?}")),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            self.set(k.trim(), v).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    #[cfg(test)]
    pub fn parse_text(text: &str) -> Result<RunConfig, String> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    fn value_of(&self, key: &str) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        match key {
            "q" => self.q.to_string(),
            "g" => join(&self.g),
            "x" => join(&self.x),
            "k" => join(&self.k),
            "mode" => if self.sample { "sample" } else { "full" }.into(),
            "n" => self.n.to_string(),
            "seed" => self.seed.to_string(),
            "ell" => self.ell.join(";"),
            "dim" => join(&self.dim),
            "out" => path(&self.out),
            "format" => self.format.to_string(),
            "workers" => self.workers.map(|w| w.to_string()).unwrap_or_default(),
            "cache_dir" => path(&self.cache_dir),
            "k_max" => self.k_max.to_string(),
            "d_max" => self.d_max.to_string(),
            "budget" => format!("{:e}", self.budget),
            _ => unreachable!("unknown key {key}"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            let _ = writeln!(s, "{k} = {}", self.value_of(k));
        }
        s
    }

    /// Key/value pairs recorded in report metadata; output location excluded.
    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .filter(|k| !matches!(**k, "out" | "workers" | "cache_dir"))
            .map(|k| (*k, self.value_of(k)))
            .collect()
    }

    pub fn field(&self) -> Result<Fq, String> {
        Fq::new(self.q).map_err(|e| e.to_string())
    }

    pub fn mode(&self) -> Mode {
        if self.sample {
            Mode::Sample {
                count: self.n,
                seed: self.seed,
            }
        } else {
            Mode::Full
        }
    }

    pub fn ells(&self) -> Result<Vec<MonicPoly>, String> {
        let fq = self.field()?;
        self.ell
            .iter()
            .map(|s| MonicPoly::parse(fq, s).map_err(|e| format!("ell {s:?}: {e}")))
            .collect()
    }

    /// Checks everything that can be checked before any compute.
    pub fn validate(&self) -> Result<(), String> {
        self.field()?;
        if self.g.contains(&0) {
            return Err("g must be at least 1".into());
        }
        if self.sample && self.n == 0 {
            return Err("sample mode needs n ≥ 1".into());
        }
        if self.workers == Some(0) {
            return Err("workers must be at least 1".into());
        }
        if self.dim.contains(&0) {
            return Err("dim must be at least 1".into());
        }
        self.ells()?;
        Ok(())
    }

    /// Warnings for full enumerations above the op budget.
    pub fn budget_warnings(&self) -> Vec<String> {
        if self.sample {
            return Vec::new();
        }
        self.g
            .iter()
            .filter_map(|&g| {
                let ops = ffquad::moments::full_enumeration_ops(self.q, g);
                (ops > self.budget).then(|| {
                    format!(
                        "full enumeration at q={} g={g} needs about {ops:.1e} symbol evaluations (budget {:.1e}); consider --mode sample",
                        self.q, self.budget
                    )
                })
            })
            .collect()
    }
}
