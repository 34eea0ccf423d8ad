use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use ideal_clock::export::{Format, Metadata};
use ideal_clock::state::{seed_cm_state, transform_state};
use ideal_clock::{ClockParams, FourVector, LorentzTransform, PhaseSpacePoint, Projection, Sigma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Flags shared by every subcommand. Anything left unset falls back to the
/// `--config` file and then to the built-in defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// key=value file with run settings; flags override it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    #[arg(long, global = true)]
    pub ell: Option<f64>,
    /// +1 or -1
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// evolution step (default ell/1000)
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// number of clocking cycles to cover (default 3 when --steps is absent)
    #[arg(long, global = true)]
    pub cycles: Option<f64>,
    /// boost the seed: rapidity and axis (x, y, z or a1,a2,a3)
    #[arg(long, global = true, num_args = 2, value_names = ["RAPIDITY", "AXIS"], allow_hyphen_values = true)]
    pub boost: Option<Vec<String>>,
    /// constraint projection after each step: on or off
    #[arg(long, global = true)]
    pub projection: Option<String>,
    #[arg(long, global = true, conflicts_with = "projection")]
    pub no_projection: bool,
    /// rk4 or exact
    #[arg(long, global = true)]
    pub integrator: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// push the seed off shell by this relative amount
    #[arg(long, global = true)]
    pub perturb: Option<f64>,
    /// experiment name recorded in the metadata
    #[arg(long, global = true)]
    pub name: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegratorChoice {
    Rk4,
    Exact,
}

impl IntegratorChoice {
    fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(IntegratorChoice::Rk4),
            "exact" => Ok(IntegratorChoice::Exact),
            other => Err(format!("unknown integrator {other:?} (expected rk4 or exact)")),
        }
    }

    fn name(self) -> &'static str {
        match self {
            IntegratorChoice::Rk4 => "rk4",
            IntegratorChoice::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ClockParams,
    pub dt: f64,
    pub steps: usize,
    pub boost: Option<(f64, [f64; 3])>,
    pub projection: Projection,
    pub integrator: IntegratorChoice,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub perturb: f64,
    pub n0: [f64; 3],
    pub t0: [f64; 3],
    pub name: String,
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_f64(key: &str, v: &str) -> Result<f64, String> {
    v.parse().map_err(|_| format!("{key}: not a number: {v:?}"))
}

fn parse_vec3(key: &str, v: &str) -> Result<[f64; 3], String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "x" => return Ok([1.0, 0.0, 0.0]),
        "y" => return Ok([0.0, 1.0, 0.0]),
        "z" => return Ok([0.0, 0.0, 1.0]),
        _ => {}
    }
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("{key}: expected x, y, z or three comma-separated numbers, got {v:?}"));
    }
    Ok([parse_f64(key, parts[0])?, parse_f64(key, parts[1])?, parse_f64(key, parts[2])?])
}

fn parse_sigma(v: &str) -> Result<Sigma, String> {
    match v.trim() {
        "+1" | "1" | "+" | "plus" => Ok(Sigma::Plus),
        "-1" | "-" | "minus" => Ok(Sigma::Minus),
        other => Err(format!("sigma: expected +1 or -1, got {other:?}")),
    }
}

fn parse_switch(key: &str, v: &str) -> Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(format!("{key}: expected on or off, got {other:?}")),
    }
}

fn parse_boost(v: &str) -> Result<(f64, [f64; 3]), String> {
    let mut it = v.split_whitespace();
    let (Some(r), Some(axis), None) = (it.next(), it.next(), it.next()) else {
        return Err(format!("boost: expected \"<rapidity> <axis>\", got {v:?}"));
    };
    Ok((parse_f64("boost", r)?, parse_vec3("boost axis", axis)?))
}

impl RunConfig {
    /// Merges flags over the config file (if any) over the defaults.
    pub fn resolve(args: &RunArgs) -> Result<Self, String> {
        let mut file = match &args.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let mut set = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                file.insert(key.to_string(), v);
            }
        };
        set("mass", args.mass.map(|v| v.to_string()));
        set("ell", args.ell.map(|v| v.to_string()));
        set("sigma", args.sigma.clone());
        set("dt", args.dt.map(|v| v.to_string()));
        set("steps", args.steps.map(|v| v.to_string()));
        set("cycles", args.cycles.map(|v| v.to_string()));
        set("boost", args.boost.as_ref().map(|b| b.join(" ")));
        set("projection", if args.no_projection { Some("off".into()) } else { args.projection.clone() });
        set("integrator", args.integrator.clone());
        set("out", args.out.as_ref().map(|p| p.display().to_string()));
        set("format", args.format.clone());
        set("seed", args.seed.map(|v| v.to_string()));
        set("perturb", args.perturb.map(|v| v.to_string()));
        set("name", args.name.clone());
        Self::from_map(&file)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, String> {
        const KNOWN: [&str; 17] = [
            "mass",
            "ell",
            "sigma",
            "dt",
            "steps",
            "cycles",
            "boost",
            "projection",
            "integrator",
            "out",
            "format",
            "seed",
            "perturb",
            "name",
            "n0",
            "t0",
            "command",
        ];
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str()) && !k.starts_with("meta.")) {
            return Err(format!("unknown setting {k:?}"));
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let mass = get("mass").map(|v| parse_f64("mass", v)).transpose()?.unwrap_or(1.0);
        let ell = get("ell").map(|v| parse_f64("ell", v)).transpose()?.unwrap_or(1.0);
        let sigma = get("sigma").map(parse_sigma).transpose()?.unwrap_or(Sigma::Plus);
        let params = ClockParams::new(mass, ell, sigma).map_err(|e| e.to_string())?;

        let mut dt = get("dt").map(|v| parse_f64("dt", v)).transpose()?.unwrap_or(ell / 1000.0);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(format!("dt must be positive, got {dt}"));
        }
        let cycles = get("cycles").map(|v| parse_f64("cycles", v)).transpose()?;
        if let Some(c) = cycles {
            if !(c.is_finite() && c >= 0.0) {
                return Err(format!("cycles must be non-negative, got {c}"));
            }
        }
        let period = params.cycle_period();
        let steps = match get("steps") {
            Some(v) => {
                let s: usize = v.parse().map_err(|_| format!("steps: not a count: {v:?}"))?;
                if let Some(c) = cycles {
                    // dt * steps must cover what was asked for
                    if dt * (s as f64) < c * period * (1.0 - 1e-12) {
                        return Err(format!(
                            "{s} steps of dt = {dt} span {:.6} cycles, fewer than the requested {c}",
                            dt * s as f64 / period
                        ));
                    }
                }
                s
            }
            None => {
                // shrink dt slightly so the run ends exactly on the last cycle
                let span = cycles.unwrap_or(DEFAULT_CYCLES) * period;
                let s = (span / dt - 1e-9).ceil().max(0.0) as usize;
                if s > 0 {
                    dt = span / s as f64;
                }
                s
            }
        };

        let boost = get("boost").map(parse_boost).transpose()?;
        let projection = match get("projection").map(|v| parse_switch("projection", v)).transpose()? {
            Some(false) => Projection::Off,
            _ => Projection::On,
        };
        let integrator = get("integrator").map(IntegratorChoice::parse).transpose()?.unwrap_or(IntegratorChoice::Rk4);
        let format = match get("format") {
            Some(v) => v.parse::<Format>().map_err(|e| e.to_string())?,
            None => Format::Csv,
        };
        let seed = match get("seed") {
            Some(v) => v.parse().map_err(|_| format!("seed: not an integer: {v:?}"))?,
            None => 0,
        };
        let perturb = get("perturb").map(|v| parse_f64("perturb", v)).transpose()?.unwrap_or(0.0);
        let n0 = get("n0").map(|v| parse_vec3("n0", v)).transpose()?.unwrap_or([1.0, 0.0, 0.0]);
        let t0 = get("t0").map(|v| parse_vec3("t0", v)).transpose()?.unwrap_or([0.0, 1.0, 0.0]);
        Ok(RunConfig {
            params,
            dt,
            steps,
            boost,
            projection,
            integrator,
            out: get("out").map(PathBuf::from),
            format,
            seed,
            perturb,
            n0,
            t0,
            name: get("name").unwrap_or("run").to_string(),
        })
    }

    /// Canonical rest-frame seed, then the optional perturbation, then the
    /// optional boost.
    pub fn seed_state(&self) -> Result<PhaseSpacePoint, String> {
        let mut pt = seed_cm_state(&self.params, self.n0, self.t0).map_err(|e| e.to_string())?;
        if self.perturb != 0.0 {
            let mut rng = self.rng();
            let mut jitter = |scale: f64| {
                let r: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                FourVector(r) * (self.perturb * scale)
            };
            let (m, l) = (self.params.mass, self.params.length);
            pt.p = pt.p + jitter(m);
            pt.k = pt.k + jitter(1.0);
            pt.pi = pt.pi + jitter(m * l);
        }
        if let Some((rapidity, axis)) = self.boost {
            let lt = LorentzTransform::boost(rapidity, axis).map_err(|e| e.to_string())?;
            pt = transform_state(&pt, &lt, FourVector::ZERO);
        }
        Ok(pt)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn cycles(&self) -> f64 {
        self.dt * self.steps as f64 / self.params.cycle_period()
    }

    pub fn out_path(&self, default_stem: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(format!("{default_stem}.{}", self.format)))
    }

    /// Everything needed to rerun; CSV outputs get it as a sidecar that
    /// `--config` accepts back.
    pub fn metadata(&self, command: &str) -> Metadata {
        let mut m = Metadata::new();
        m.insert("command".into(), command.into());
        m.insert("name".into(), self.name.clone());
        m.insert("mass".into(), self.params.mass.to_string());
        m.insert("ell".into(), self.params.length.to_string());
        m.insert("sigma".into(), format!("{:+}", self.params.sigma.value()));
        m.insert("dt".into(), self.dt.to_string());
        m.insert("steps".into(), self.steps.to_string());
        if let Some((r, a)) = self.boost {
            m.insert("boost".into(), format!("{r} {},{},{}", a[0], a[1], a[2]));
        }
        m.insert("projection".into(), if self.projection.is_on() { "on" } else { "off" }.into());
        m.insert("integrator".into(), self.integrator.name().into());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("perturb".into(), self.perturb.to_string());
        m.insert("n0".into(), format!("{},{},{}", self.n0[0], self.n0[1], self.n0[2]));
        m.insert("t0".into(), format!("{},{},{}", self.t0[0], self.t0[1], self.t0[2]));
        m.insert("meta.version".into(), env!("CARGO_PKG_VERSION").into());
        m
    }
}

pub fn render_metadata(meta: &Metadata) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

/// Default run length in cycles, used when neither steps nor cycles is set.
pub const DEFAULT_CYCLES: f64 = 3.0;
