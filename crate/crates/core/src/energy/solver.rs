//! Dirichlet minimization of the discrete p-energy by alternating optimal
//! matchings with minimization over the branch-lifted graph.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::discrete::{discrete_energy, edge_term, EnergyReport};
use super::fill::fill_from;
use super::grid::{Edge, Grid, GridFunction, NodeKind};
use crate::error::{invalid, Error, Result};
use crate::extend::SamplePoint;
use crate::qspace::{dist, squared_distance, MetricKind, QTuple};
use crate::random::seeded;

/// Minimizer used in the branch step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    /// Linear solve for p = 2, gradient descent otherwise.
    Auto,
    P2Linear,
    Gradient,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_outer: usize,
    /// Outer stopping rule: decrease below `tol * (1 + energy)`.
    pub tol: f64,
    pub inner: InnerSolver,
    /// Number of runs; the first starts from the extension of the boundary
    /// data, the others from random matchings.
    pub restarts: usize,
    pub seed: u64,
    /// Relative residual for the conjugate-gradient solve.
    pub cg_tol: f64,
    /// Iteration cap for one branch step (CG iterations per coordinate or
    /// gradient steps).
    pub max_inner: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_outer: 500,
            tol: 1e-10,
            inner: InnerSolver::Auto,
            restarts: 3,
            seed: 0,
            cg_tol: 1e-13,
            max_inner: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub solution: GridFunction,
    pub report: EnergyReport,
    /// Energy after the initial matching step and after every outer iteration
    /// of the best run.
    pub history: Vec<f64>,
    pub runs: Vec<RunSummary>,
}

/// Labeled working copy: `x[(node * q + i) * n + k]`.
struct State<'a> {
    grid: &'a Grid,
    q: usize,
    n: usize,
    p: f64,
    edges: Vec<Edge>,
    x: Vec<f64>,
    sigma: Vec<Vec<usize>>,
}

impl State<'_> {
    fn tuple(&self, node: usize) -> QTuple {
        let s = node * self.q * self.n;
        QTuple::from_flat(self.n, self.x[s..s + self.q * self.n].to_vec()).expect("stored tuples are well formed")
    }

    fn edge_sq(&self, x: &[f64], e: &Edge, sigma: &[usize]) -> f64 {
        let (q, n) = (self.q, self.n);
        (0..q)
            .map(|i| {
                let a = (e.a * q + i) * n;
                let b = (e.b * q + sigma[i]) * n;
                squared_distance(&x[a..a + n], &x[b..b + n])
            })
            .sum()
    }

    fn energy_of(&self, x: &[f64]) -> f64 {
        let (h, m) = (self.grid.h(), self.grid.dim());
        self.edges
            .iter()
            .zip(&self.sigma)
            .map(|(e, s)| edge_term(self.edge_sq(x, e, s).sqrt(), h, m, self.p))
            .sum()
    }

    fn energy(&self) -> f64 {
        self.energy_of(&self.x)
    }

    /// Replaces a pairing only when the optimal one is strictly cheaper.
    fn matching_step(&mut self) -> Result<()> {
        let indices: Vec<usize> = (0..self.edges.len()).collect();
        let updates = crate::par::map(&indices, |&k| -> Result<Option<Vec<usize>>> {
            let e = &self.edges[k];
            let (_, m) = dist(&self.tuple(e.a), &self.tuple(e.b), MetricKind::G2)?;
            let old = self.edge_sq(&self.x, e, &self.sigma[k]);
            let new = self.edge_sq(&self.x, e, m.perm());
            Ok((new < old).then(|| m.perm().to_vec()))
        });
        for (k, u) in updates.into_iter().enumerate() {
            if let Some(s) = u? {
                self.sigma[k] = s;
            }
        }
        Ok(())
    }

    fn random_matchings(&mut self, seed: u64) {
        let mut rng = seeded(seed);
        for s in &mut self.sigma {
            s.shuffle(&mut rng);
        }
    }

    /// Lifted neighbours of every lifted vertex `node * q + i`.
    fn lifted_adjacency(&self) -> Vec<Vec<usize>> {
        let q = self.q;
        let mut adj = vec![Vec::new(); self.grid.len() * q];
        for (e, s) in self.edges.iter().zip(&self.sigma) {
            for i in 0..q {
                let u = e.a * q + i;
                let v = e.b * q + s[i];
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        adj
    }

    fn is_free(&self, lifted: usize) -> bool {
        self.grid.kind(lifted / self.q) == NodeKind::Interior
    }

    /// Exact minimization for p = 2 with the pairings frozen: the graph
    /// Laplacian system on free lifted vertices, one coordinate at a time,
    /// by Jacobi-preconditioned conjugate gradients.
    fn linear_step(&mut self, opts: &SolveOptions) -> Result<Vec<f64>> {
        let adj = self.lifted_adjacency();
        let free: Vec<usize> = (0..adj.len()).filter(|&u| self.is_free(u)).collect();
        let mut slot = vec![usize::MAX; adj.len()];
        for (k, &u) in free.iter().enumerate() {
            slot[u] = k;
        }
        let deg: Vec<f64> = free.iter().map(|&u| adj[u].len() as f64).collect();
        let n = self.n;
        let mut out = self.x.clone();
        let apply = |v: &[f64], out: &mut [f64]| {
            for (k, &u) in free.iter().enumerate() {
                let mut s = deg[k] * v[k];
                for &w in &adj[u] {
                    if slot[w] != usize::MAX {
                        s -= v[slot[w]];
                    }
                }
                out[k] = s;
            }
        };
        for c in 0..n {
            let rhs: Vec<f64> = free
                .iter()
                .map(|&u| {
                    adj[u]
                        .iter()
                        .filter(|&&w| slot[w] == usize::MAX)
                        .map(|&w| self.x[w * n + c])
                        .sum()
                })
                .collect();
            let mut sol: Vec<f64> = free.iter().map(|&u| self.x[u * n + c]).collect();
            conjugate_gradient(&apply, &deg, &rhs, &mut sol, opts.cg_tol, opts.max_inner)?;
            for (k, &u) in free.iter().enumerate() {
                out[u * n + c] = sol[k];
            }
        }
        Ok(out)
    }

    fn gradient(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (q, n) = (self.q, self.n);
        let (h, m, p) = (self.grid.h(), self.grid.dim(), self.p);
        let c = h.powf(m as f64 - p) * p;
        let sq: Vec<f64> = self
            .edges
            .iter()
            .zip(&self.sigma)
            .map(|(e, s)| self.edge_sq(x, e, s))
            .collect();
        let mean = sq.iter().sum::<f64>() / sq.len().max(1) as f64;
        let floor = 1e-12 * mean.max(f64::MIN_POSITIVE);
        let mut grad = vec![0.0; x.len()];
        let mut diag = vec![0.0; self.grid.len() * q];
        for ((e, s), &sqe) in self.edges.iter().zip(&self.sigma).zip(&sq) {
            let w = if sqe > 0.0 { c * sqe.powf(0.5 * p - 1.0) } else { 0.0 };
            let wd = c * sqe.max(floor).powf(0.5 * p - 1.0);
            for i in 0..q {
                let u = e.a * q + i;
                let v = e.b * q + s[i];
                diag[u] += wd;
                diag[v] += wd;
                for k in 0..n {
                    let d = w * (x[u * n + k] - x[v * n + k]);
                    grad[u * n + k] += d;
                    grad[v * n + k] -= d;
                }
            }
        }
        for u in 0..diag.len() {
            if !self.is_free(u) {
                grad[u * n..(u + 1) * n].iter_mut().for_each(|g| *g = 0.0);
            }
        }
        (grad, diag)
    }

    /// Diagonally scaled gradient descent with Armijo backtracking on the
    /// frozen-pairing energy.
    fn gradient_step(&mut self, opts: &SolveOptions) -> Vec<f64> {
        let n = self.n;
        let mut x = self.x.clone();
        let mut e = self.energy_of(&x);
        for _ in 0..opts.max_inner {
            let (g, diag) = self.gradient(&x);
            let dir: Vec<f64> = g
                .iter()
                .enumerate()
                .map(|(k, gk)| {
                    let d = diag[k / n];
                    if d > 0.0 {
                        -gk / d
                    } else {
                        0.0
                    }
                })
                .collect();
            let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..50 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
                let et = self.energy_of(&trial);
                if et <= e + 1e-4 * alpha * slope {
                    accepted = Some((trial, et));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((trial, et)) = accepted else { break };
            let decrease = e - et;
            x = trial;
            e = et;
            if decrease < opts.tol * (1.0 + e) {
                break;
            }
        }
        x
    }

    fn uses_linear(&self, opts: &SolveOptions) -> bool {
        match opts.inner {
            InnerSolver::Auto | InnerSolver::P2Linear => self.p == 2.0,
            InnerSolver::Gradient => false,
        }
    }

    fn branch_step(&mut self, opts: &SolveOptions) -> Result<()> {
        let candidate = if self.uses_linear(opts) {
            self.linear_step(opts)?
        } else {
            self.gradient_step(opts)
        };
        if self.energy_of(&candidate) <= self.energy() {
            self.x = candidate;
        }
        Ok(())
    }

    fn to_function(&self) -> Result<GridFunction> {
        let values = (0..self.grid.len())
            .map(|i| self.grid.kind(i).is_active().then(|| self.tuple(i).canonical()))
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }
}

fn conjugate_gradient(
    apply: &impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<()> {
    let len = rhs.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let mut ax = vec![0.0; len];
    apply(x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let target = tol * dot(rhs, rhs).sqrt().max(1e-300);
    let precond = |r: &[f64]| -> Vec<f64> {
        r.iter()
            .zip(diag)
            .map(|(a, d)| if *d > 0.0 { a / d } else { *a })
            .collect()
    };
    let mut z = precond(&r);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut ad = vec![0.0; len];
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= target {
            return Ok(());
        }
        apply(&dir, &mut ad);
        let dad = dot(&dir, &ad);
        if !(dad > 0.0) {
            break;
        }
        let alpha = rz / dad;
        for k in 0..len {
            x[k] += alpha * dir[k];
            r[k] -= alpha * ad[k];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..len {
            dir[k] = z[k] + beta * dir[k];
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("conjugate gradients produced non-finite values".into()));
    }
    Ok(())
}

fn initial_values(f: &GridFunction) -> Vec<Option<QTuple>> {
    let grid = f.grid();
    let boundary: Vec<usize> = grid.boundary_nodes().collect();
    let interior: Vec<usize> = grid.interior_nodes().collect();
    let mut values = f.values().to_vec();
    for (i, v) in fill_from(f, &boundary, &interior) {
        values[i] = Some(v);
    }
    values
}

fn run<'a>(
    f0: &'a GridFunction,
    p: f64,
    opts: &SolveOptions,
    random_seed: Option<u64>,
) -> Result<(State<'a>, Vec<f64>, usize, bool)> {
    let grid = f0.grid();
    let (q, n) = (f0.q(), f0.n());
    let mut x = vec![0.0; grid.len() * q * n];
    for i in grid.active_nodes() {
        x[i * q * n..(i + 1) * q * n].copy_from_slice(f0.value(i).coords());
    }
    let edges = grid.edges();
    let sigma = vec![(0..q).collect(); edges.len()];
    let mut st = State {
        grid,
        q,
        n,
        p,
        edges,
        x,
        sigma,
    };
    if let Some(seed) = random_seed {
        // The run starts from the minimizer for random pairings, whatever its energy.
        st.random_matchings(seed);
        st.x = if st.uses_linear(opts) {
            st.linear_step(opts)?
        } else {
            st.gradient_step(opts)
        };
    }
    st.matching_step()?;
    let mut e = st.energy();
    if !e.is_finite() {
        return Err(Error::Numeric(format!("initial energy is {e}")));
    }
    let mut history = vec![e];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_outer {
        iterations += 1;
        st.branch_step(opts)?;
        st.matching_step()?;
        let e_new = st.energy();
        if !e_new.is_finite() {
            return Err(Error::Numeric(format!("energy became {e_new}")));
        }
        history.push(e_new);
        let decrease = e - e_new;
        e = e_new;
        if decrease < opts.tol * (1.0 + e) {
            converged = true;
            break;
        }
    }
    Ok((st, history, iterations, converged))
}

/// Minimizes the discrete p-energy over grid functions that agree with `data`
/// on the boundary nodes. Interior values of `data` are ignored.
pub fn solve_dirichlet(data: &GridFunction, p: f64, opts: &SolveOptions) -> Result<DirichletSolution> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("p must be a finite number > 1, got {p}"));
    }
    if opts.restarts == 0 || !(opts.tol >= 0.0) {
        return invalid("need at least one run and a nonnegative tolerance");
    }
    let grid = data.grid();
    if grid.boundary_nodes().next().is_none() {
        return Err(Error::NoBoundary);
    }
    let start = GridFunction::new(grid.clone(), initial_values(data))?;
    let mut best: Option<(f64, GridFunction, Vec<f64>, usize, bool)> = None;
    let mut runs = Vec::new();
    for r in 0..opts.restarts {
        let seed = (r > 0).then(|| opts.seed.wrapping_add(r as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
        let (st, history, iterations, converged) = run(&start, p, opts, seed)?;
        let e = *history.last().unwrap();
        runs.push(RunSummary {
            energy: e,
            iterations,
            converged,
        });
        if best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, st.to_function()?, history, iterations, converged));
        }
    }
    let (_, solution, history, iterations, converged) = best.unwrap();
    let mut report = discrete_energy(&solution, p)?;
    report.iterations = iterations;
    report.converged = converged;
    Ok(DirichletSolution {
        solution,
        report,
        history,
        runs,
    })
}

/// Domain shapes for boundary data given as curve samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainShape {
    /// Unit ball.
    Disk,
    /// The cube `[-1, 1]^m`.
    Square,
}

/// Boundary data as samples on the boundary of a standard domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub domain: DomainShape,
    pub samples: Vec<SamplePoint>,
}

impl BoundaryData {
    pub fn new(domain: DomainShape, samples: Vec<SamplePoint>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidInput("boundary data has no samples".into()))?;
        let (m, q, n) = (first.location.len(), first.value.q(), first.value.dim());
        if samples
            .iter()
            .any(|s| s.location.len() != m || s.value.q() != q || s.value.dim() != n)
        {
            return invalid("samples must share the location dimension, Q and n");
        }
        Ok(Self { domain, samples })
    }

    pub fn m(&self) -> usize {
        self.samples[0].location.len()
    }

    /// Grid with `nodes` points per axis covering the domain.
    pub fn grid(&self, nodes: usize) -> Result<Grid> {
        match self.domain {
            DomainShape::Disk => Grid::ball(self.m(), nodes, 1.0),
            DomainShape::Square => Grid::cube(self.m(), nodes, -1.0, 1.0),
        }
    }

    /// Grid function whose boundary nodes carry the nearest sample and whose
    /// interior holds placeholders.
    pub fn on_grid(&self, grid: &Grid) -> Result<GridFunction> {
        if grid.dim() != self.m() {
            return invalid(format!("grid has m = {}, samples have m = {}", grid.dim(), self.m()));
        }
        let placeholder = QTuple::zero(self.samples[0].value.q(), self.samples[0].value.dim());
        let values = (0..grid.len())
            .map(|i| match grid.kind(i) {
                NodeKind::Outside => None,
                NodeKind::Interior => Some(placeholder.clone()),
                NodeKind::Boundary => {
                    let x = grid.coord(i);
                    let s = self
                        .samples
                        .iter()
                        .min_by(|a, b| squared_distance(&a.location, &x).total_cmp(&squared_distance(&b.location, &x)))
                        .unwrap();
                    Some(s.value.clone())
                }
            })
            .collect();
        GridFunction::new(grid.clone(), values)
    }

    /// Samples of `g` at `count` equally spaced points of the unit circle.
    pub fn circle(count: usize, g: impl Fn(f64, f64) -> QTuple) -> Result<Self> {
        if count < 3 {
            return invalid("need at least 3 circle samples");
        }
        let samples = (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                let (y, x) = t.sin_cos();
                SamplePoint {
                    location: vec![x, y],
                    value: g(x, y),
                }
            })
            .collect();
        Self::new(DomainShape::Disk, samples)
    }
}

/// The pair of complex square roots of `x + iy`, as points of R^2.
pub fn complex_sqrt_pair(x: f64, y: f64) -> QTuple {
    let r = num_complex::Complex64::new(x, y).sqrt();
    QTuple::new(vec![vec![r.re, r.im], vec![-r.re, -r.im]]).expect("two points in R^2")
}
