//! File formats: CSV tables for networks, covariates, panels and per-unit
//! results; JSON for configurations and reports; SHA-256 run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complete_info::UnitBounds;
use crate::equilibrium::CcpProfile;
use crate::error::{Error, Result};
use crate::estimation::ObservedPanel;
use crate::game::{Allocation, Covariates, Game, Theta};
use crate::network::Network;
use crate::shock::ShockDistribution;
use crate::sim::RegretRow;

/// Floats in CSV output carry 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    path: PathBuf,
    header: Option<(u64, Vec<String>)>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn parse_err(&self, line: u64, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            column,
            message: message.into(),
        }
    }

    fn field<T: std::str::FromStr>(&self, line: u64, row: &[String], column: usize, what: &str) -> Result<T> {
        let raw = row
            .get(column)
            .ok_or_else(|| self.parse_err(line, column + 1, format!("missing {what}")))?;
        raw.parse()
            .map_err(|_| self.parse_err(line, column + 1, format!("cannot parse {what} from {raw:?}")))
    }

    fn expect_width(&self, width: usize) -> Result<()> {
        for (line, row) in &self.rows {
            if row.len() != width {
                return Err(self.parse_err(*line, row.len().min(width) + 1, format!("expected {width} fields, found {}", row.len())));
            }
        }
        Ok(())
    }

    fn require_header(&self, leading: &[&str]) -> Result<&[String]> {
        let (line, h) = self
            .header
            .as_ref()
            .ok_or_else(|| self.parse_err(1, 1, format!("missing header starting with {}", leading.join(","))))?;
        for (c, want) in leading.iter().enumerate() {
            if h.get(c).map(String::as_str) != Some(*want) {
                return Err(self.parse_err(*line, c + 1, format!("expected header column {want:?}")));
            }
        }
        Ok(h)
    }

    /// Rows keyed by a `unit_id` in column 0, returned in unit order.
    fn by_unit(&self) -> Result<Vec<(u64, &Vec<String>)>> {
        let n = self.rows.len();
        let mut slots: Vec<Option<(u64, &Vec<String>)>> = vec![None; n];
        for (line, row) in &self.rows {
            let id: usize = self.field(*line, row, 0, "unit_id")?;
            if id >= n {
                return Err(self.parse_err(*line, 1, format!("unit_id {id} outside 0..{n}")));
            }
            if slots[id].is_some() {
                return Err(self.parse_err(*line, 1, format!("duplicate unit_id {id}")));
            }
            slots[id] = Some((*line, row));
        }
        Ok(slots.into_iter().map(|s| s.expect("ids are a permutation")).collect())
    }
}

fn looks_like_header(row: &[String]) -> bool {
    row.iter().any(|f| f.parse::<f64>().is_err())
}

fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut header = None;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|f| f.trim().to_string()).collect();
        if header.is_none() && rows.is_empty() && looks_like_header(&fields) {
            header = Some((line, fields));
        } else {
            rows.push((line, fields));
        }
    }
    Ok(Table {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Network file: an edge list with a `src,dst` header, or a dense 0/1 matrix.
/// Edge lists take their size from `n` when given, else the largest index.
pub fn read_network(path: &Path, n: Option<usize>, directed: bool) -> Result<Network> {
    let t = read_table(path)?;
    let is_edge_list = match &t.header {
        Some((_, h)) => h.first().map(String::as_str) == Some("src"),
        None => {
            let square = t.rows.iter().all(|(_, r)| r.len() == t.rows.len());
            let binary = t.rows.iter().flat_map(|(_, r)| r).all(|f| f == "0" || f == "1");
            !(square && binary)
        }
    };
    if is_edge_list {
        if t.header.is_some() {
            t.require_header(&["src", "dst"])?;
        }
        t.expect_width(2)?;
        let mut edges = Vec::with_capacity(t.rows.len());
        for (line, row) in &t.rows {
            let src: usize = t.field(*line, row, 0, "src")?;
            let dst: usize = t.field(*line, row, 1, "dst")?;
            if let Some(n) = n {
                if src >= n || dst >= n {
                    let col = if src >= n { 1 } else { 2 };
                    return Err(t.parse_err(*line, col, format!("unit index outside 0..{n}")));
                }
            }
            if src == dst {
                return Err(t.parse_err(*line, 1, "self-link"));
            }
            edges.push((src, dst));
        }
        let size = n.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
        Network::from_edges(size, &edges, directed)
    } else {
        let width = t.rows.len();
        t.expect_width(width)?;
        let mut dense = Vec::with_capacity(width);
        for (line, row) in &t.rows {
            let mut r = Vec::with_capacity(width);
            for c in 0..width {
                let v: u8 = t.field(*line, row, c, "adjacency entry")?;
                if v > 1 {
                    return Err(t.parse_err(*line, c + 1, "adjacency entries must be 0 or 1"));
                }
                r.push(v);
            }
            dense.push(r);
        }
        Network::from_dense(&dense, directed)
    }
}

/// Writes an edge list; undirected links appear once with `src < dst`.
pub fn write_network(path: &Path, net: &Network) -> Result<()> {
    let mut s = String::from("src,dst\n");
    let edges: Vec<(usize, usize)> = if net.is_directed() {
        (0..net.len()).flat_map(|i| net.neighbors(i).iter().map(move |&j| (i, j))).collect()
    } else {
        net.edges()
    };
    for (a, b) in edges {
        s.push_str(&format!("{a},{b}\n"));
    }
    write_text(path, &s)
}

pub fn read_covariates(path: &Path) -> Result<Covariates> {
    let t = read_table(path)?;
    let h = t.require_header(&["unit_id"])?;
    let k = h.len() - 1;
    t.expect_width(k + 1)?;
    let mut values = Vec::with_capacity(t.rows.len() * k);
    for (line, row) in t.by_unit()? {
        for c in 1..=k {
            let v: f64 = t.field(line, row, c, "covariate")?;
            if !v.is_finite() || v < 0.0 {
                return Err(t.parse_err(line, c + 1, "covariates must be finite and nonnegative"));
            }
            values.push(v);
        }
    }
    Covariates::new(t.rows.len(), k, values)
}

fn covariate_header(k: usize) -> String {
    (1..=k).map(|c| format!(",x{c}")).collect()
}

pub fn write_covariates(path: &Path, cov: &Covariates) -> Result<()> {
    let mut s = format!("unit_id{}\n", covariate_header(cov.k()));
    for (i, row) in cov.rows().enumerate() {
        s.push_str(&i.to_string());
        for v in row {
            s.push(',');
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    write_text(path, &s)
}

/// Game configuration JSON: utility parameters plus the shock law.
/// Missing scalar parameters default to zero and a missing `theta3` to zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub theta1: f64,
    pub theta2: Vec<f64>,
    #[serde(default)]
    pub theta3: Option<Vec<f64>>,
    #[serde(default)]
    pub theta4: f64,
    #[serde(default)]
    pub theta5: f64,
    #[serde(default)]
    pub theta6: f64,
    #[serde(default)]
    pub shock: ShockDistribution,
}

impl GameConfig {
    pub fn new(theta: &Theta, shock: ShockDistribution) -> Self {
        GameConfig {
            theta0: theta.theta0,
            theta1: theta.theta1,
            theta2: theta.theta2.clone(),
            theta3: Some(theta.theta3.clone()),
            theta4: theta.theta4,
            theta5: theta.theta5,
            theta6: theta.theta6,
            shock,
        }
    }

    pub fn theta(&self) -> Theta {
        Theta {
            theta0: self.theta0,
            theta1: self.theta1,
            theta2: self.theta2.clone(),
            theta3: self.theta3.clone().unwrap_or_else(|| vec![0.0; self.theta2.len()]),
            theta4: self.theta4,
            theta5: self.theta5,
            theta6: self.theta6,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_game_config(path: &Path) -> Result<GameConfig> {
    let cfg: GameConfig = read_json(path)?;
    cfg.theta().validate()?;
    Ok(cfg)
}

/// Loads and validates a game; isolated units are reported as warnings.
pub fn load_game(network: &Path, covariates: &Path, config: &Path, directed: bool) -> Result<Game> {
    let cov = read_covariates(covariates)?;
    let mut net = read_network(network, None, directed)?;
    if net.len() < cov.n() {
        // trailing units without links only appear in the covariates
        net = read_network(network, Some(cov.n()), directed)?;
    }
    if net.len() != cov.n() {
        return Err(Error::DimensionMismatch {
            what: "covariate rows vs network size",
            expected: net.len(),
            found: cov.n(),
        });
    }
    let cfg = read_game_config(config)?;
    let iso = net.isolated_units();
    if !iso.is_empty() {
        log::warn!("{} isolated units; their network terms are zero", iso.len());
    }
    Game::new(net, cov, cfg.theta(), cfg.shock)
}

/// Paths of a saved game, as written by [`save_game`].
pub struct GameFiles {
    pub network: PathBuf,
    pub covariates: PathBuf,
    pub config: PathBuf,
}

pub fn save_game(dir: &Path, game: &Game) -> Result<GameFiles> {
    let files = GameFiles {
        network: dir.join("network.csv"),
        covariates: dir.join("covariates.csv"),
        config: dir.join("game.json"),
    };
    write_network(&files.network, game.network())?;
    write_covariates(&files.covariates, game.covariates())?;
    write_json(&files.config, &GameConfig::new(game.theta(), game.shock()))?;
    Ok(files)
}

fn read_unit_column(path: &Path, name: &str) -> Result<Vec<(u64, String)>> {
    let t = read_table(path)?;
    t.require_header(&["unit_id", name])?;
    t.expect_width(2)?;
    Ok(t.by_unit()?.into_iter().map(|(l, r)| (l, r[1].clone())).collect())
}

pub fn read_ccp(path: &Path) -> Result<CcpProfile> {
    let mut v = Vec::new();
    for (line, raw) in read_unit_column(path, "sigma")? {
        let s: f64 = raw.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            column: 2,
            message: format!("cannot parse sigma from {raw:?}"),
        })?;
        v.push(s);
    }
    CcpProfile::new(v)
}

pub fn write_ccp(path: &Path, sigma: &CcpProfile) -> Result<()> {
    let mut s = String::from("unit_id,sigma\n");
    for (i, v) in sigma.as_slice().iter().enumerate() {
        s.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    write_text(path, &s)
}

fn parse_bit(path: &Path, line: u64, column: usize, raw: &str, what: &str) -> Result<bool> {
    match raw {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: format!("{what} must be 0 or 1, found {raw:?}"),
        }),
    }
}

/// Reads `unit_id,d`; capacity defaults to the treated count.
pub fn read_allocation(path: &Path, kappa: Option<usize>) -> Result<Allocation> {
    let d = read_unit_column(path, "d")?
        .into_iter()
        .map(|(line, raw)| parse_bit(path, line, 2, &raw, "d"))
        .collect::<Result<Vec<_>>>()?;
    let kappa = kappa.unwrap_or_else(|| d.iter().filter(|x| **x).count());
    Allocation::new(d, kappa)
}

pub fn write_allocation(path: &Path, alloc: &Allocation) -> Result<()> {
    let mut s = String::from("unit_id,d\n");
    for (i, d) in alloc.as_slice().iter().enumerate() {
        s.push_str(&format!("{i},{}\n", u8::from(*d)));
    }
    write_text(path, &s)
}

/// Reads `unit_id,y,d,x1..xK` and pairs it with `network`.
pub fn read_panel(path: &Path, network: Network) -> Result<ObservedPanel> {
    let t = read_table(path)?;
    let h = t.require_header(&["unit_id", "y", "d"])?;
    let k = h.len() - 3;
    t.expect_width(k + 3)?;
    let n = t.rows.len();
    if network.len() != n {
        return Err(Error::DimensionMismatch {
            what: "panel rows vs network size",
            expected: network.len(),
            found: n,
        });
    }
    let (mut y, mut d, mut x) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n * k));
    for (line, row) in t.by_unit()? {
        y.push(parse_bit(path, line, 2, &row[1], "y")?);
        d.push(parse_bit(path, line, 3, &row[2], "d")?);
        for c in 3..3 + k {
            x.push(t.field::<f64>(line, row, c, "covariate")?);
        }
    }
    ObservedPanel::new(y, d, Covariates::new(n, k, x)?, network)
}

pub fn write_panel(path: &Path, panel: &ObservedPanel) -> Result<()> {
    let cov = panel.covariates();
    let mut s = format!("unit_id,y,d{}\n", covariate_header(cov.k()));
    for i in 0..panel.n() {
        s.push_str(&format!("{i},{},{}", u8::from(panel.y()[i]), u8::from(panel.d()[i])));
        for v in cov.row(i) {
            s.push(',');
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    write_text(path, &s)
}

pub fn write_unit_bounds(path: &Path, b: &UnitBounds) -> Result<()> {
    let mut s = String::from("unit_id,lower,upper\n");
    for (i, (lo, hi)) in b.lower.iter().zip(&b.upper).enumerate() {
        s.push_str(&format!("{i},{},{}\n", fmt_f64(*lo), fmt_f64(*hi)));
    }
    write_text(path, &s)
}

pub fn write_regret_rows(path: &Path, rows: &[RegretRow]) -> Result<()> {
    let mut s = String::from("n_train,rep,regret,estimation_gap,greedy_gap,theta_l1_error,projected\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n_train,
            r.rep,
            fmt_f64(r.regret),
            fmt_f64(r.estimation_gap),
            fmt_f64(r.greedy_gap),
            fmt_f64(r.theta_l1_error),
            u8::from(r.projected)
        ));
    }
    write_text(path, &s)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn start(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed,
            started_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_clock_seconds: 0.0,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn finish(&mut self, elapsed: std::time::Duration) {
        self.wall_clock_seconds = elapsed.as_secs_f64();
    }
}
