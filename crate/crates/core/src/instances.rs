//! Procedural generators for the seven instance families and their
//! difficulty-level parameter ranges.

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Bernoulli, Distribution};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit, Provenance};
use crate::solver::{solve, SolveStatus, SolverConfig, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "sr")]
    Sr,
    #[serde(rename = "3-sat")]
    ThreeSat,
    #[serde(rename = "ca")]
    Ca,
    #[serde(rename = "ps")]
    Ps,
    #[serde(rename = "k-clique")]
    KClique,
    #[serde(rename = "k-domset")]
    KDomset,
    #[serde(rename = "k-vercov")]
    KVercov,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Sr,
        Family::ThreeSat,
        Family::Ca,
        Family::Ps,
        Family::KClique,
        Family::KDomset,
        Family::KVercov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sr => "sr",
            Family::ThreeSat => "3-sat",
            Family::Ca => "ca",
            Family::Ps => "ps",
            Family::KClique => "k-clique",
            Family::KDomset => "k-domset",
            Family::KVercov => "k-vercov",
        }
    }

    /// SR is the only family whose generator emits SAT/UNSAT pairs directly.
    pub fn is_paired(self) -> bool {
        self == Family::Sr
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| {
                f.name() == normalized
                    || f.name().replace('-', "") == normalized
                    || f.name().strip_prefix("k-") == Some(normalized.as_str())
            })
            .ok_or_else(|| GenError::UnknownName(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Difficulty {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Difficulty::ALL
            .into_iter()
            .find(|d| d.name() == s.to_ascii_lowercase())
            .ok_or_else(|| GenError::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no community of size >= {k} found after {retries} retries")]
    CommunityTooSmall { k: usize, retries: usize },
    #[error("could not bracket the normalisation constant (n={n}, m={m}, k={k}, beta={beta}, beta'={beta_prime}, T={temperature})")]
    NoBracket {
        n: usize,
        m: usize,
        k: f64,
        beta: f64,
        beta_prime: f64,
        temperature: f64,
    },
    #[error("clause {clause} stayed empty after {retries} resamples")]
    EmptyClause { clause: usize, retries: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Parameters drawn for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    Sr {
        n: usize,
        b: f64,
        g: f64,
    },
    ThreeSat {
        n: usize,
        m: usize,
    },
    Ca {
        n: usize,
        m: usize,
        k: usize,
        c: usize,
        q: f64,
    },
    Ps {
        n: usize,
        m: usize,
        k: usize,
        beta: f64,
        beta_prime: f64,
        temperature: f64,
    },
    /// Shared by the three graph families.
    Graph {
        v: usize,
        k: usize,
        p: f64,
    },
}

impl FamilyParams {
    /// Name/value pairs in a fixed order, for formula provenance.
    pub fn to_pairs(&self) -> Vec<(String, f64)> {
        let pairs: Vec<(&str, f64)> = match *self {
            FamilyParams::Sr { n, b, g } => vec![("n", n as f64), ("b", b), ("g", g)],
            FamilyParams::ThreeSat { n, m } => vec![("n", n as f64), ("m", m as f64)],
            FamilyParams::Ca { n, m, k, c, q } => vec![
                ("n", n as f64),
                ("m", m as f64),
                ("k", k as f64),
                ("c", c as f64),
                ("q", q),
            ],
            FamilyParams::Ps {
                n,
                m,
                k,
                beta,
                beta_prime,
                temperature,
            } => vec![
                ("n", n as f64),
                ("m", m as f64),
                ("k", k as f64),
                ("beta", beta),
                ("beta_prime", beta_prime),
                ("temperature", temperature),
            ],
            FamilyParams::Graph { v, k, p } => vec![("v", v as f64), ("k", k as f64), ("p", p)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Per-family sampling parameters fixed across difficulty levels.
pub const SR_B: f64 = 0.3;
pub const SR_G: f64 = 0.4;

/// Inclusive integer range of the primary size parameter (`n` or `v`).
pub fn size_range(family: Family, difficulty: Difficulty) -> (usize, usize) {
    use Difficulty::*;
    use Family::*;
    match (family, difficulty) {
        (Sr | Ca, Easy) | (ThreeSat | Ps, Easy) => (10, 40),
        (Sr | Ca | ThreeSat | Ps, Medium) => (40, 200),
        (Sr | Ca, Hard) => (200, 400),
        (ThreeSat | Ps, Hard) => (200, 300),
        (KClique | KDomset | KVercov, Easy) => (5, 15),
        (KClique | KDomset, Medium) => (15, 20),
        (KVercov, Medium) => (10, 20),
        (KClique | KDomset, Hard) => (20, 25),
        (KVercov, Hard) => (15, 25),
    }
}

/// Inclusive range of `k` for the graph families.
pub fn graph_k_range(family: Family, difficulty: Difficulty) -> Option<(usize, usize)> {
    use Difficulty::*;
    use Family::*;
    Some(match (family, difficulty) {
        (KClique, Easy) => (3, 4),
        (KClique, Medium) => (3, 5),
        (KClique, Hard) => (4, 6),
        (KDomset, Easy) => (2, 3),
        (KDomset, Medium) => (3, 5),
        (KDomset, Hard) => (4, 6),
        (KVercov, Easy) => (3, 5),
        (KVercov, Medium) => (6, 8),
        (KVercov, Hard) => (9, 10),
        _ => return None,
    })
}

/// Draws the family parameters for one instance from its difficulty ranges.
pub fn draw_params<R: Rng>(family: Family, difficulty: Difficulty, rng: &mut R) -> FamilyParams {
    let (lo, hi) = size_range(family, difficulty);
    match family {
        Family::Sr => FamilyParams::Sr {
            n: rng.gen_range(lo..=hi),
            b: SR_B,
            g: SR_G,
        },
        Family::ThreeSat => {
            let n = rng.gen_range(lo..=hi);
            FamilyParams::ThreeSat {
                n,
                m: clause_count_3sat(n),
            }
        }
        Family::Ca => loop {
            let n = rng.gen_range(lo..=hi);
            let m = rng.gen_range(13 * n..=15 * n);
            let k = rng.gen_range(4..=5);
            let c = rng.gen_range(3..=10);
            let q = rng.gen_range(0.7..=0.9);
            // every community must hold k variables and inter-community
            // clauses need k distinct communities
            if c >= k && n >= c * k {
                break FamilyParams::Ca { n, m, k, c, q };
            }
        },
        Family::Ps => {
            let n = rng.gen_range(lo..=hi);
            FamilyParams::Ps {
                n,
                m: rng.gen_range(6 * n..=8 * n),
                k: rng.gen_range(4..=5),
                beta: rng.gen_range(0.0..=1.0),
                beta_prime: 1.0,
                temperature: rng.gen_range(0.75..=1.5),
            }
        }
        Family::KClique | Family::KDomset | Family::KVercov => loop {
            let (klo, khi) = graph_k_range(family, difficulty).expect("graph family");
            let v = rng.gen_range(lo..=hi);
            let k = rng.gen_range(klo..=khi);
            let p = match family {
                Family::KClique => clique_edge_prob(v, k),
                Family::KDomset => domset_edge_prob(v, k),
                _ => vercov_edge_prob(v, k),
            };
            // the smallest vertex-cover graphs leave no room for the hidden clique
            let Ok(p) = p else { continue };
            break FamilyParams::Graph { v, k, p };
        },
    }
}

/// Seed of the instance `index` of a dataset, mixed with SplitMix64 so that
/// neighbouring indices give unrelated streams.
pub fn instance_seed(master_seed: u64, family: Family, difficulty: Difficulty, index: u64) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ family.tag());
    h = splitmix64(h ^ (difficulty as u64 + 1).wrapping_mul(0x9e37_79b9));
    splitmix64(h ^ index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub family: Family,
    pub difficulty: Difficulty,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Single(CnfFormula),
    Pair { sat: CnfFormula, unsat: CnfFormula },
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub index: u64,
    pub seed: u64,
    pub params: FamilyParams,
    pub instance: Instance,
}

/// Generates instance `index` of the dataset described by `config`.
pub fn sample_instance(config: &GeneratorConfig, index: u64) -> Result<GeneratedInstance, GenError> {
    let seed = instance_seed(config.master_seed, config.family, config.difficulty, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = draw_params(config.family, config.difficulty, &mut rng);
    let instance = generate_with(&params, config.family, &mut rng)?;
    let provenance = Provenance {
        family: config.family.name().to_string(),
        difficulty: config.difficulty.name().to_string(),
        index,
        seed,
        params: params.to_pairs(),
    };
    let instance = match instance {
        Instance::Single(f) => Instance::Single(f.with_provenance(provenance)),
        Instance::Pair { sat, unsat } => Instance::Pair {
            sat: sat.with_provenance(provenance.clone()),
            unsat: unsat.with_provenance(provenance),
        },
    };
    Ok(GeneratedInstance {
        index,
        seed,
        params,
        instance,
    })
}

/// Runs the family generator for already drawn parameters.
pub fn generate_with<R: Rng>(
    params: &FamilyParams,
    family: Family,
    rng: &mut R,
) -> Result<Instance, GenError> {
    Ok(match (params.clone(), family) {
        (FamilyParams::Sr { n, b, g }, Family::Sr) => {
            let (sat, unsat) = gen_sr_pair(n, b, g, rng)?;
            Instance::Pair { sat, unsat }
        }
        (FamilyParams::ThreeSat { n, .. }, Family::ThreeSat) => Instance::Single(gen_3sat(n, rng)?),
        (FamilyParams::Ca { n, m, k, c, q }, Family::Ca) => {
            Instance::Single(gen_ca(n, m, k, c, q, rng)?)
        }
        (
            FamilyParams::Ps {
                n,
                m,
                k,
                beta,
                beta_prime,
                temperature,
            },
            Family::Ps,
        ) => Instance::Single(gen_ps(n, m, k as f64, beta, beta_prime, temperature, rng)?),
        (FamilyParams::Graph { v, k, p }, Family::KClique) => {
            Instance::Single(encode_k_clique(&er_graph(v, p, rng), k)?)
        }
        (FamilyParams::Graph { v, k, p }, Family::KDomset) => {
            Instance::Single(encode_k_domset(&er_graph(v, p, rng), k)?)
        }
        (FamilyParams::Graph { v, k, p }, Family::KVercov) => {
            Instance::Single(encode_k_vercov(&er_graph(v, p, rng).complement(), k)?)
        }
        (params, family) => {
            return Err(GenError::InvalidParams(format!(
                "{params:?} do not belong to family {family}"
            )))
        }
    })
}

fn random_clause<R: Rng>(vars: impl IntoIterator<Item = usize>, rng: &mut R) -> Clause {
    Clause::new(
        vars.into_iter()
            .map(|v| Lit::new(v as u32, rng.gen_bool(0.5)))
            .collect(),
    )
}

/// Distinct variables drawn uniformly from `1..=n`.
fn distinct_vars<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    sample(rng, n, k).into_iter().map(|i| i + 1).collect()
}

/// SR pair generator. Clauses are added until the formula becomes
/// unsatisfiable. A clause has a base width of 1 with probability `b` and 2
/// otherwise, plus a geometric number of trials (`>= 1`) with success
/// probability `g`, capped at `n`. The
/// satisfiable twin negates the first literal of the final clause.
/// Returns `(sat, unsat)`.
pub fn gen_sr_pair<R: Rng>(
    n: usize,
    b: f64,
    g: f64,
    rng: &mut R,
) -> Result<(CnfFormula, CnfFormula), GenError> {
    if n < 2 {
        return Err(GenError::InvalidParams(format!("SR needs n >= 2, got {n}")));
    }
    let bernoulli =
        Bernoulli::new(b).map_err(|e| GenError::InvalidParams(format!("b={b}: {e}")))?;
    let geometric = Geometric::new(g).map_err(|e| GenError::InvalidParams(format!("g={g}: {e}")))?;
    let config = SolverConfig {
        record_learned: false,
        ..SolverConfig::default()
    };

    let mut formula = CnfFormula::new(n, Vec::new());
    let mut last_model = None;
    loop {
        let base = if bernoulli.sample(rng) { 1 } else { 2 };
        let width = base + 1 + geometric.sample(rng) as usize;
        let vars = distinct_vars(n, width.min(n), rng);
        let clause = random_clause(vars, rng);
        // a model of the prefix that also satisfies the new clause settles it
        let still_sat = matches!(&last_model, Some(m) if clause.is_satisfied_by(m));
        formula.clauses.push(clause);
        if still_sat {
            continue;
        }
        match solve(&formula, &config)?.status {
            SolveStatus::Sat(model) => last_model = Some(model),
            SolveStatus::Unsat => break,
        }
    }
    let unsat = formula.clone();
    let mut sat = formula;
    let last = sat.clauses.last_mut().expect("at least one clause");
    let first = &mut last.lits_mut()[0];
    *first = !*first;
    Ok((sat, unsat))
}

/// Clause count at the random 3-SAT phase transition,
/// `round(4.258 n + 58.26 n^(-2/3))` with halves rounded up.
pub fn clause_count_3sat(n: usize) -> usize {
    let n = n as f64;
    (4.258 * n + 58.26 * n.powf(-2.0 / 3.0) + 0.5).floor() as usize
}

pub fn gen_3sat<R: Rng>(n: usize, rng: &mut R) -> Result<CnfFormula, GenError> {
    if n < 3 {
        return Err(GenError::InvalidParams(format!("3-SAT needs n >= 3, got {n}")));
    }
    let m = clause_count_3sat(n);
    let clauses = (0..m)
        .map(|_| {
            let vars = distinct_vars(n, 3, rng);
            random_clause(vars, rng)
        })
        .collect();
    Ok(CnfFormula::new(n, clauses))
}

/// Near-equal contiguous blocks of `0..n`.
fn communities(n: usize, c: usize) -> Vec<std::ops::Range<usize>> {
    (0..c).map(|i| i * n / c..(i + 1) * n / c).collect()
}

const CA_COMMUNITY_RETRIES: usize = 100;

/// Community-attachment generator. Each clause is intra-community with
/// probability `min(q + 1/c, 1)` and otherwise takes one variable from each of
/// `k` distinct communities. Clauses repeating an earlier one are dropped, so
/// the result can have fewer than `m` clauses.
pub fn gen_ca<R: Rng>(
    n: usize,
    m: usize,
    k: usize,
    c: usize,
    q: f64,
    rng: &mut R,
) -> Result<CnfFormula, GenError> {
    if c == 0 || c > n || k == 0 || k > n {
        return Err(GenError::InvalidParams(format!(
            "CA needs 1 <= c <= n and 1 <= k <= n (n={n}, k={k}, c={c})"
        )));
    }
    let blocks = communities(n, c);
    let intra = (q + 1.0 / c as f64).clamp(0.0, 1.0);
    let mut seen: HashSet<Vec<Lit>> = HashSet::with_capacity(m);
    let mut clauses = Vec::with_capacity(m);

    for _ in 0..m {
        let vars: Vec<usize> = if rng.gen_bool(intra) {
            let mut chosen = None;
            for _ in 0..CA_COMMUNITY_RETRIES {
                let block = &blocks[rng.gen_range(0..c)];
                if block.len() >= k {
                    chosen = Some(block.clone());
                    break;
                }
            }
            let block = chosen.ok_or(GenError::CommunityTooSmall {
                k,
                retries: CA_COMMUNITY_RETRIES,
            })?;
            sample(rng, block.len(), k)
                .into_iter()
                .map(|i| block.start + i + 1)
                .collect()
        } else {
            if c < k {
                return Err(GenError::InvalidParams(format!(
                    "inter-community clause of width {k} needs at least {k} communities, got {c}"
                )));
            }
            sample(rng, c, k)
                .into_iter()
                .map(|b| {
                    let block = &blocks[b];
                    rng.gen_range(block.clone()) + 1
                })
                .collect()
        };
        let clause = random_clause(vars, rng);
        let mut key = clause.lits().to_vec();
        key.sort_unstable();
        if seen.insert(key) {
            clauses.push(clause);
        }
    }
    Ok(CnfFormula::new(n, clauses))
}

/// Inclusion probability of variable `i` in clause `j` (both 1-based) of
/// the popularity-similarity model.
pub fn ps_edge_probability(
    i: usize,
    j: usize,
    angle: f64,
    r: f64,
    beta: f64,
    beta_prime: f64,
    temperature: f64,
) -> f64 {
    let distance = (i as f64).powf(beta) * (j as f64).powf(beta_prime) * angle;
    1.0 / (1.0 + (distance / r).powf(temperature))
}

/// Angular distance on the circle, `π − |π − |a − b||`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    PI - (PI - (a - b).abs()).abs()
}

/// Finds `R` such that the expected number of variable/clause incidences,
/// `Σ P(i, j)`, equals `target` within relative `1e-3`, by bisection on the
/// logarithm of `R`.
pub fn ps_normalization(
    distances: &[f64],
    temperature: f64,
    target: f64,
) -> Option<f64> {
    let expected = |r: f64| -> f64 {
        distances
            .iter()
            .map(|&d| 1.0 / (1.0 + (d / r).powf(temperature)))
            .sum()
    };
    let within = |value: f64| (value - target).abs() <= 1e-3 * target;

    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut steps = 0;
    while expected(hi) < target {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 || !hi.is_finite() {
            return None;
        }
    }
    steps = 0;
    while expected(lo) > target {
        lo /= 2.0;
        steps += 1;
        if steps > 2000 || lo == 0.0 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let value = expected(mid);
        if within(value) {
            return Some(mid);
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo * hi).sqrt();
    within(expected(mid)).then_some(mid)
}

const PS_EMPTY_RETRIES: usize = 100_000;

/// Popularity-similarity generator. Variables and clauses get random angles;
/// variable `i` joins clause `j` with probability
/// `1 / (1 + (i^β j^β' θ_ij / R)^T)` where `R` makes the expected number of
/// incidences `k·m`. Empty clauses are redrawn.
pub fn gen_ps<R: Rng>(
    n: usize,
    m: usize,
    k: f64,
    beta: f64,
    beta_prime: f64,
    temperature: f64,
    rng: &mut R,
) -> Result<CnfFormula, GenError> {
    if n == 0 || m == 0 || temperature <= 0.0 || k <= 0.0 {
        return Err(GenError::InvalidParams(format!(
            "PS needs n, m >= 1, k > 0 and T > 0 (n={n}, m={m}, k={k}, T={temperature})"
        )));
    }
    let var_angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let clause_angles: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let mut distances = Vec::with_capacity(n * m);
    for (j, &phi) in clause_angles.iter().enumerate() {
        let jw = ((j + 1) as f64).powf(beta_prime);
        for (i, &theta) in var_angles.iter().enumerate() {
            distances.push(((i + 1) as f64).powf(beta) * jw * angular_distance(theta, phi));
        }
    }
    let r = ps_normalization(&distances, temperature, k * m as f64).ok_or(GenError::NoBracket {
        n,
        m,
        k,
        beta,
        beta_prime,
        temperature,
    })?;

    let mut clauses = Vec::with_capacity(m);
    for j in 0..m {
        let row = &distances[j * n..(j + 1) * n];
        let probs: Vec<f64> = row
            .iter()
            .map(|&d| 1.0 / (1.0 + (d / r).powf(temperature)))
            .collect();
        let mut vars = Vec::new();
        for _ in 0..PS_EMPTY_RETRIES {
            vars = (0..n).filter(|&i| rng.gen::<f64>() < probs[i]).map(|i| i + 1).collect();
            if !vars.is_empty() {
                break;
            }
        }
        if vars.is_empty() {
            return Err(GenError::EmptyClause {
                clause: j,
                retries: PS_EMPTY_RETRIES,
            });
        }
        clauses.push(random_clause(vars, rng));
    }
    Ok(CnfFormula::new(n, clauses))
}

/// Simple undirected graph on vertices `0..num_vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErGraph {
    pub num_vertices: usize,
    /// Pairs `(u, w)` with `u < w`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl ErGraph {
    pub fn new(num_vertices: usize) -> ErGraph {
        ErGraph {
            num_vertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(num_vertices: usize) -> ErGraph {
        let mut g = ErGraph::new(num_vertices);
        for u in 0..num_vertices {
            for w in u + 1..num_vertices {
                g.edges.insert((u, w));
            }
        }
        g
    }

    /// # Panics
    ///
    /// On self-loops or vertices out of range.
    pub fn add_edge(&mut self, u: usize, w: usize) {
        assert!(u != w && u < self.num_vertices && w < self.num_vertices);
        self.edges.insert((u.min(w), u.max(w)));
    }

    pub fn has_edge(&self, u: usize, w: usize) -> bool {
        self.edges.contains(&(u.min(w), u.max(w)))
    }

    pub fn complement(&self) -> ErGraph {
        let mut g = ErGraph::new(self.num_vertices);
        for u in 0..self.num_vertices {
            for w in u + 1..self.num_vertices {
                if !self.has_edge(u, w) {
                    g.edges.insert((u, w));
                }
            }
        }
        g
    }

    /// `w` and its neighbours.
    pub fn closed_neighborhood(&self, w: usize) -> Vec<usize> {
        (0..self.num_vertices)
            .filter(|&u| u == w || self.has_edge(u, w))
            .collect()
    }
}

/// G(v, p): each pair is an edge independently with probability `p`.
pub fn er_graph<R: Rng>(v: usize, p: f64, rng: &mut R) -> ErGraph {
    let mut g = ErGraph::new(v);
    for u in 0..v {
        for w in u + 1..v {
            if rng.gen::<f64>() < p {
                g.edges.insert((u, w));
            }
        }
    }
    g
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Edge probability `C(v,k)^(-1/C(k,2))` at which a G(v, p) graph has one
/// k-clique in expectation.
pub fn clique_edge_prob(v: usize, k: usize) -> Result<f64, GenError> {
    if k > v || k < 2 {
        return Err(GenError::InvalidParams(format!(
            "clique probability needs 2 <= k <= v (v={v}, k={k})"
        )));
    }
    let pairs = (k * (k - 1) / 2) as f64;
    Ok((-ln_binomial(v, k) / pairs).exp())
}

/// Edge probability `1 − (1 − C(v,k)^(−1/(v−k)))^(1/k)` used for the
/// dominating-set family.
pub fn domset_edge_prob(v: usize, k: usize) -> Result<f64, GenError> {
    if k == 0 || k >= v {
        return Err(GenError::InvalidParams(format!(
            "domset probability needs 1 <= k < v (v={v}, k={k})"
        )));
    }
    let inner = (-ln_binomial(v, k) / (v - k) as f64).exp();
    Ok(1.0 - (1.0 - inner).powf(1.0 / k as f64))
}

/// Edge probability of the Erdős–Rényi graph whose complement feeds the
/// vertex-cover family: one `(v−k)`-clique is expected, so the complement
/// has a minimum vertex cover of about `k`.
pub fn vercov_edge_prob(v: usize, k: usize) -> Result<f64, GenError> {
    if k + 2 > v {
        return Err(GenError::InvalidParams(format!(
            "vertex-cover probability needs k <= v - 2 (v={v}, k={k})"
        )));
    }
    clique_edge_prob(v, v - k)
}

fn check_k(graph: &ErGraph, k: usize) -> Result<(), GenError> {
    if k == 0 || k > graph.num_vertices {
        return Err(GenError::InvalidParams(format!(
            "k={k} must lie in 1..={}",
            graph.num_vertices
        )));
    }
    Ok(())
}

/// Clauses `¬a ∨ ¬b` for every pair of `vars`.
fn pairwise_at_most_one(clauses: &mut Vec<Clause>, vars: &[u32]) {
    for (a, &x) in vars.iter().enumerate() {
        for &y in &vars[a + 1..] {
            clauses.push(Clause::new(vec![Lit::neg(x), Lit::neg(y)]));
        }
    }
}

/// Unary mapping from a domain of `rows` elements to a range of `cols`
/// elements; `x(r, c)` is variable `first + r·cols + c`.
struct Mapping {
    first: u32,
    rows: usize,
    cols: usize,
}

impl Mapping {
    fn x(&self, r: usize, c: usize) -> u32 {
        self.first + (r * self.cols + c) as u32
    }

    fn row(&self, r: usize) -> Vec<u32> {
        (0..self.cols).map(|c| self.x(r, c)).collect()
    }

    fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.x(r, c)).collect()
    }

    fn last_var(&self) -> usize {
        self.first as usize + self.rows * self.cols - 1
    }

    /// Every domain element maps somewhere.
    fn complete(&self, clauses: &mut Vec<Clause>) {
        for r in 0..self.rows {
            clauses.push(Clause::new(self.row(r).into_iter().map(Lit::pos).collect()));
        }
    }

    /// Every domain element maps at most once.
    fn functional(&self, clauses: &mut Vec<Clause>) {
        for r in 0..self.rows {
            pairwise_at_most_one(clauses, &self.row(r));
        }
    }

    /// Every range element is hit at most once.
    fn injective(&self, clauses: &mut Vec<Clause>) {
        for c in 0..self.cols {
            pairwise_at_most_one(clauses, &self.column(c));
        }
    }

    /// `r1 < r2` never maps to `c1 > c2`.
    fn nondecreasing(&self, clauses: &mut Vec<Clause>) {
        self.forbid_orders(clauses, |c1, c2| c1 > c2);
    }

    /// `r1 < r2` never maps to `c1 >= c2`. The `c1 == c2` clauses repeat
    /// the injectivity clauses.
    fn increasing(&self, clauses: &mut Vec<Clause>) {
        self.forbid_orders(clauses, |c1, c2| c1 >= c2);
    }

    fn forbid_orders(&self, clauses: &mut Vec<Clause>, forbidden: impl Fn(usize, usize) -> bool) {
        for r1 in 0..self.rows {
            for r2 in r1 + 1..self.rows {
                for c1 in 0..self.cols {
                    for c2 in 0..self.cols {
                        if forbidden(c1, c2) {
                            clauses.push(Clause::new(vec![
                                Lit::neg(self.x(r1, c1)),
                                Lit::neg(self.x(r2, c2)),
                            ]));
                        }
                    }
                }
            }
        }
    }
}

/// "The graph has a clique of size k". Variable `i·v + u + 1` places vertex
/// `u` at position `i`; positions hold distinct vertices in increasing
/// order, and positions holding non-adjacent vertices conflict.
pub fn encode_k_clique(graph: &ErGraph, k: usize) -> Result<CnfFormula, GenError> {
    check_k(graph, k)?;
    let v = graph.num_vertices;
    let s = Mapping {
        first: 1,
        rows: k,
        cols: v,
    };
    let mut clauses = Vec::new();
    s.complete(&mut clauses);
    s.functional(&mut clauses);
    s.injective(&mut clauses);
    s.nondecreasing(&mut clauses);
    for i1 in 0..k {
        for i2 in i1 + 1..k {
            for u in 0..v {
                for w in u + 1..v {
                    if !graph.has_edge(u, w) {
                        clauses.push(Clause::new(vec![Lit::neg(s.x(i1, u)), Lit::neg(s.x(i2, w))]));
                    }
                }
            }
        }
    }
    Ok(CnfFormula::new(s.last_var(), clauses))
}

/// Selection variables `1..=v` plus an injective, order-preserving map of
/// the selected vertices into `k` indices (variables `v + u·k + i + 1`),
/// which bounds the selection to `k` vertices.
fn bounded_selection(clauses: &mut Vec<Clause>, v: usize, k: usize, strict: bool) -> Mapping {
    let m = Mapping {
        first: v as u32 + 1,
        rows: v,
        cols: k,
    };
    m.injective(clauses);
    if strict {
        m.increasing(clauses);
    } else {
        m.nondecreasing(clauses);
    }
    for i in 0..k {
        for u in 0..v {
            clauses.push(Clause::new(vec![Lit::neg(m.x(u, i)), Lit::pos(u as u32 + 1)]));
        }
    }
    for u in 0..v {
        let mut lits = vec![Lit::neg(u as u32 + 1)];
        lits.extend(m.row(u).into_iter().map(Lit::pos));
        clauses.push(Clause::new(lits));
    }
    m
}

/// "The graph has a dominating set of at most k vertices": a bounded
/// selection with strictly increasing indices that meets every distinct
/// closed neighbourhood.
pub fn encode_k_domset(graph: &ErGraph, k: usize) -> Result<CnfFormula, GenError> {
    check_k(graph, k)?;
    let v = graph.num_vertices;
    let mut clauses = Vec::new();
    let m = bounded_selection(&mut clauses, v, k, true);
    let neighborhoods: BTreeSet<Vec<usize>> = (0..v).map(|w| graph.closed_neighborhood(w)).collect();
    for hood in neighborhoods {
        clauses.push(Clause::new(hood.into_iter().map(|u| Lit::pos(u as u32 + 1)).collect()));
    }
    Ok(CnfFormula::new(m.last_var(), clauses))
}

/// "The graph has a vertex cover of at most k vertices": a bounded selection
/// that touches every edge. The family feeds it the complement of an
/// Erdős–Rényi graph.
pub fn encode_k_vercov(graph: &ErGraph, k: usize) -> Result<CnfFormula, GenError> {
    check_k(graph, k)?;
    let v = graph.num_vertices;
    let mut clauses = Vec::new();
    let m = bounded_selection(&mut clauses, v, k, false);
    for &(u, w) in &graph.edges {
        clauses.push(Clause::new(vec![Lit::pos(u as u32 + 1), Lit::pos(w as u32 + 1)]));
    }
    Ok(CnfFormula::new(m.last_var(), clauses))
}
