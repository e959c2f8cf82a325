//! Invariants for the conjugation action of permutations on weighted
//! adjacency matrices, `A -> P A P^T`.
//!
//! Two separators with very different cost profiles:
//!
//! * [`graph_generic_invariant`] — sorted row sums plus the sorted
//!   off-diagonal weight multiset. Polynomial time at any size, but only
//!   generically separating: graphs with repeated weights can collide.
//! * [`graph_full_invariant`] — the product of `|P A P^T - W|_F^2` over all
//!   `n!` permutations. Fully separating, exponential cost, hard-capped at
//!   tiny vertex counts.
//!
//! Callers should note that genericity of a given input (all subset sums of
//! its weights distinct) is not checked here; near-ties are a judgement the
//! caller has to make.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::ToleranceConfig;

/// Hard cap on the factorial permutation product.
pub const FULL_INVARIANT_LIMIT: usize = 8;
/// Hard cap on exact orbit testing.
pub const ORBIT_LIMIT: usize = 10;
/// Vertex count from which the full invariant defaults to log-domain
/// evaluation (the plain product of that many factors overflows quickly).
pub const LOG_DOMAIN_DEFAULT_FROM: usize = 6;

/// A weighted graph: symmetric nonnegative adjacency with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: DMatrix<f64>,
}

impl WeightedGraph {
    pub fn new(adj: DMatrix<f64>) -> Result<Self> {
        if adj.nrows() != adj.ncols() || adj.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "adjacency must be square and nonempty, got {}x{}",
                adj.nrows(),
                adj.ncols()
            )));
        }
        for i in 0..adj.nrows() {
            if adj[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry ({i},{i}) must be zero"
                )));
            }
            for j in 0..adj.ncols() {
                let w = adj[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "weight ({i},{j}) must be finite and nonnegative, got {w}"
                    )));
                }
                if adj[(i, j)] != adj[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "adjacency not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { adj })
    }

    /// Builds from undirected edges `(i, j, w)`; missing pairs get weight 0.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj = DMatrix::zeros(n, n);
        let mut seen = std::collections::HashSet::new();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i},{j}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!(
                    "self loop at vertex {i} not allowed"
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i},{j})")));
            }
            adj[(i, j)] = w;
            adj[(j, i)] = w;
        }
        Self::new(adj)
    }

    /// Convenience constructor for unweighted graphs; entries must be 0 or 1.
    pub fn binary(adj: DMatrix<f64>) -> Result<Self> {
        if adj.iter().any(|&w| w != 0.0 && w != 1.0) {
            return Err(Error::InvalidArgument(
                "binary graph entries must be 0 or 1".into(),
            ));
        }
        Self::new(adj)
    }

    pub fn n(&self) -> usize {
        self.adj.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adj
    }

    /// The conjugated graph `P A P^T` for the permutation `sigma`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.n() {
            return Err(Error::ShapeMismatch("permutation length".into()));
        }
        let adj = DMatrix::from_fn(self.n(), self.n(), |i, j| self.adj[(sigma[i], sigma[j])]);
        Self::new(adj)
    }

    /// Parses the edge-list text format:
    ///
    /// ```text
    /// n 4
    /// 0 1 0.5
    /// 2 3 1.25
    /// ```
    ///
    /// First non-empty line is `n <vertex count>`, then one `i j w` line per
    /// edge with 0-based vertices. Symmetric closure is applied; duplicate
    /// edges (in either order) are rejected.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedDocument("empty graph document".into()))?;
        let mut parts = header.split_whitespace();
        let n = match (parts.next(), parts.next(), parts.next()) {
            (Some("n"), Some(count), None) => count.parse::<usize>().map_err(|_| {
                Error::MalformedDocument(format!("bad vertex count in header: {header:?}"))
            })?,
            _ => {
                return Err(Error::MalformedDocument(format!(
                    "expected header 'n <count>', got {header:?}"
                )))
            }
        };
        let mut edges = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::MalformedDocument(format!(
                    "expected 'i j w', got {line:?}"
                )));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| Error::MalformedDocument(format!("bad vertex in {line:?}")))?;
            let j: usize = fields[1]
                .parse()
                .map_err(|_| Error::MalformedDocument(format!("bad vertex in {line:?}")))?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| Error::MalformedDocument(format!("bad weight in {line:?}")))?;
            edges.push((i, j, w));
        }
        Self::from_edges(n, &edges)
    }

    /// Inverse of [`Self::from_edge_list`]; weights print in shortest
    /// round-trip decimal so reload is bit-exact.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n());
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                if self.adj[(i, j)] != 0.0 {
                    out.push_str(&format!("{} {} {}\n", i, j, self.adj[(i, j)]));
                }
            }
        }
        out
    }
}

/// `(sort(A 1), sort of upper-triangle weights)`.
///
/// Row sums accumulate their addends in ascending order, so conjugated
/// inputs produce bit-identical output, not just tolerance-equal output.
pub fn graph_generic_invariant(a: &WeightedGraph) -> (Vec<f64>, Vec<f64>) {
    let n = a.n();
    let mut row_sums = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<f64> = (0..n).map(|j| a.adjacency()[(i, j)]).collect();
        row.sort_unstable_by(f64::total_cmp);
        row_sums.push(row.iter().sum());
    }
    row_sums.sort_unstable_by(f64::total_cmp);

    let mut weights = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            weights.push(a.adjacency()[(i, j)]);
        }
    }
    weights.sort_unstable_by(f64::total_cmp);
    (row_sums, weights)
}

/// `prod over all permutations P of |P A P^T - W|_F^2`, or its natural log.
///
/// In log domain an exactly zero factor yields `-inf`. Out of log domain an
/// overflowing product reports `NonFinite`.
pub fn graph_full_invariant(
    a: &WeightedGraph,
    w: &DMatrix<f64>,
    log_domain: bool,
) -> Result<f64> {
    let n = a.n();
    if n > FULL_INVARIANT_LIMIT {
        return Err(Error::SizeLimit(format!(
            "full invariant capped at n = {FULL_INVARIANT_LIMIT}, got {n}"
        )));
    }
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "W must be {n}x{n}, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    let factor = |sigma: &[usize]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let delta = a.adjacency()[(sigma[i], sigma[j])] - w[(i, j)];
                acc += delta * delta;
            }
        }
        acc
    };

    let mut acc = if log_domain { 0.0 } else { 1.0 };
    let mut step = |sigma: &[usize]| {
        let f = factor(sigma);
        if log_domain {
            acc += f.ln(); // f == 0 contributes -inf, by design
        } else {
            acc *= f;
        }
    };

    let mut sigma: Vec<usize> = (0..n).collect();
    step(&sigma);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(c[i], i);
            }
            step(&sigma);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    if !log_domain && !acc.is_finite() {
        return Err(Error::NonFinite(
            "permutation product overflowed; use log-domain evaluation".into(),
        ));
    }
    Ok(acc)
}

/// True iff some permutation conjugates `a` onto `b` within `eq_tol` of the
/// graph scale. Exhaustive (backtracking with entry-level pruning), capped
/// at [`ORBIT_LIMIT`] vertices.
pub fn graph_orbit_equal(
    a: &WeightedGraph,
    b: &WeightedGraph,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::ShapeMismatch("vertex counts differ".into()));
    }
    if n > ORBIT_LIMIT {
        return Err(Error::SizeLimit(format!(
            "exact graph orbit test capped at n = {ORBIT_LIMIT}, got {n}"
        )));
    }
    let scale = a.adjacency().norm().max(b.adjacency().norm()).max(1.0);
    let tol = cfg.eq_tol * scale;
    // any single entry differing by more than the Frobenius budget already
    // sinks the permutation, so entry-level pruning keeps the search exact
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(assign(a, b, &mut sigma, &mut used, 0, tol))
}

fn assign(
    a: &WeightedGraph,
    b: &WeightedGraph,
    sigma: &mut [usize],
    used: &mut [bool],
    depth: usize,
    tol: f64,
) -> bool {
    let n = sigma.len();
    if depth == n {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let delta = a.adjacency()[(sigma[i], sigma[j])] - b.adjacency()[(i, j)];
                acc += delta * delta;
            }
        }
        return acc.sqrt() <= tol;
    }
    'candidates: for cand in 0..n {
        if used[cand] {
            continue;
        }
        for prev in 0..depth {
            if (a.adjacency()[(cand, sigma[prev])] - b.adjacency()[(depth, prev)]).abs() > tol {
                continue 'candidates;
            }
        }
        sigma[depth] = cand;
        used[cand] = true;
        if assign(a, b, sigma, used, depth + 1, tol) {
            return true;
        }
        used[cand] = false;
        sigma[depth] = usize::MAX;
    }
    false
}
