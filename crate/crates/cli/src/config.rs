//! Run configuration: built-in defaults, then an optional `key = value` file,
//! then command-line flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub hamiltonian: String,
    pub psi: String,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub cfl: f64,
    pub seeds: usize,
    pub eps: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hamiltonian: "quadratic:0.5,0,0".into(),
            psi: "cos".into(),
            n: 512,
            t: 0.5,
            cfl: 0.4,
            seeds: 64,
            eps: None,
            out: PathBuf::from("hjlab-out"),
            seed: 7,
        }
    }
}

/// Flag values; `None` keeps whatever the file or the defaults say.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub hamiltonian: Option<String>,
    pub psi: Option<String>,
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub cfl: Option<f64>,
    pub seeds: Option<usize>,
    pub eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Parses `key = value` lines. `#` starts a comment, blank lines are
    /// skipped, values may be double-quoted.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let value = unquote(value.trim());
            cfg.set(key.trim(), value).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("invalid value {v:?} for {key}"))
        }
        match key {
            "hamiltonian" => self.hamiltonian = value.to_string(),
            "psi" => self.psi = value.to_string(),
            "n" => self.n = num(key, value)?,
            "T" => self.t = num(key, value)?,
            "cfl" => self.cfl = num(key, value)?,
            "seeds" => self.seeds = num(key, value)?,
            "eps" => self.eps = if value == "none" { None } else { Some(num(key, value)?) },
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = num(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        let Overrides { hamiltonian, psi, n, t, cfl, seeds, eps, out, seed } = o.clone();
        self.hamiltonian = hamiltonian.unwrap_or(std::mem::take(&mut self.hamiltonian));
        self.psi = psi.unwrap_or(std::mem::take(&mut self.psi));
        self.n = n.unwrap_or(self.n);
        self.t = t.unwrap_or(self.t);
        self.cfl = cfl.unwrap_or(self.cfl);
        self.seeds = seeds.unwrap_or(self.seeds);
        self.eps = eps.or(self.eps);
        self.out = out.unwrap_or(std::mem::take(&mut self.out));
        self.seed = seed.unwrap_or(self.seed);
    }

    /// Serializes in the file format; floats use the shortest exact form so
    /// parsing the result reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let eps = self.eps.map_or("none".to_string(), |e| format!("{e:?}"));
        format!(
            "hamiltonian = \"{}\"\npsi = \"{}\"\nn = {}\nT = {:?}\ncfl = {:?}\nseeds = {}\neps = {eps}\nout = \"{}\"\nseed = {}\n",
            self.hamiltonian,
            self.psi,
            self.n,
            self.t,
            self.cfl,
            self.seeds,
            self.out.display(),
            self.seed
        )
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}
