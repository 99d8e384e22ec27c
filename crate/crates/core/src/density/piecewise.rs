//! Joint densities of the form
//!
//! ```text
//! f(x) = Σ_i  Π_j I(p_ij(x) >= 0) · Π_l I(q_il(x) < 0) · h_i(x)
//! ```
//!
//! Regions are found by a fixed decision procedure over the predicates: walk
//! the factors in vertex order, test each observed factor's guard literals
//! left to right (stopping at the first that fails), and resolve every
//! conditional reached inside an active factor's parameters. The set of
//! literals consulted is the region key. Any state that satisfies those
//! literals drives the procedure down the same path, so keys index disjoint
//! sets that cover the whole space. Regions are built lazily and memoized.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use super::error::DensityError;
use super::node::Node;
use super::tape::{Op, Slot, Tape};
use crate::frontend::{DistKind, PrimOp};
use crate::graph::{classify_coordinates, CoordClass, GraphModel, GuardLiteral, Polarity, PredId};

pub const DEFAULT_REGION_CAP: usize = 1_000_000;

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<f64>, Vec<f64>)> = const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// Predicate polarities decided so far, as two bitsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionKey {
    decided: Vec<u64>,
    neg: Vec<u64>,
}

impl RegionKey {
    fn empty(predicates: usize) -> Self {
        let words = predicates.div_ceil(64);
        RegionKey {
            decided: vec![0; words],
            neg: vec![0; words],
        }
    }

    pub fn get(&self, p: usize) -> Option<Polarity> {
        let (w, b) = (p / 64, 1u64 << (p % 64));
        if self.decided[w] & b == 0 {
            None
        } else if self.neg[w] & b != 0 {
            Some(Polarity::Neg)
        } else {
            Some(Polarity::Nonneg)
        }
    }

    fn set(&mut self, p: usize, pol: Polarity) {
        let (w, b) = (p / 64, 1u64 << (p % 64));
        self.decided[w] |= b;
        match pol {
            Polarity::Neg => self.neg[w] |= b,
            Polarity::Nonneg => self.neg[w] &= !b,
        }
    }

    /// Literals in predicate order.
    pub fn literals(&self) -> Vec<GuardLiteral> {
        let n = self.decided.len() * 64;
        (0..n)
            .filter_map(|p| self.get(p).map(|pol| GuardLiteral::new(PredId(p), pol)))
            .collect()
    }
}

/// One piece of the partition: a conjunction of guard literals and the log
/// of its smooth term.
#[derive(Debug)]
pub struct Region {
    key: RegionKey,
    /// Predicates required to be `>= 0`.
    pub nonneg_guards: Vec<PredId>,
    /// Predicates required to be `< 0`.
    pub neg_guards: Vec<PredId>,
    /// Names of the vertices whose factors make up the smooth term.
    pub active_vertices: Vec<String>,
    tape: Tape,
}

impl Region {
    pub fn key(&self) -> &RegionKey {
        &self.key
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    /// Whether the guard conjunction holds for the given predicate values.
    pub fn contains(&self, predicate_values: &[f64]) -> bool {
        self.neg_guards.iter().all(|p| predicate_values[p.0] < 0.0)
            && self
                .nonneg_guards
                .iter()
                .all(|p| predicate_values[p.0] >= 0.0)
    }

    /// Log of the smooth term at `x`, ignoring the guards.
    pub fn log_smooth_term(&self, x: &[f64]) -> f64 {
        nan_to_neg_inf(self.tape.forward(x, &mut Vec::new()))
    }
}

#[derive(Debug, Clone)]
enum FactorValue {
    Coord(usize),
    Datum(f64),
}

#[derive(Debug, Clone)]
struct Factor {
    vertex: String,
    kind: DistKind,
    params: Vec<Node>,
    value: FactorValue,
    /// `None` for latent vertices, whose prior is always active.
    guard: Option<Vec<GuardLiteral>>,
}

#[derive(Debug)]
pub struct PiecewiseDensity {
    coords: Vec<String>,
    classes: Vec<CoordClass>,
    predicates: Vec<Node>,
    factors: Vec<Factor>,
    region_cap: usize,
    memo: RwLock<HashMap<RegionKey, Arc<Region>>>,
}

fn nan_to_neg_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Build the density of a compiled model with the default region cap.
pub fn build_density(model: &GraphModel) -> Result<PiecewiseDensity, DensityError> {
    build_density_with_cap(model, DEFAULT_REGION_CAP)
}

pub fn build_density_with_cap(
    model: &GraphModel,
    region_cap: usize,
) -> Result<PiecewiseDensity, DensityError> {
    let coords = model.latent_names();
    let index: HashMap<&str, usize> = coords
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let classes_by_name = classify_coordinates(model);
    let classes = coords.iter().map(|c| classes_by_name[c]).collect();

    let predicates = model
        .predicates
        .iter()
        .map(|p| Node::from_term(&p.expr, &index))
        .collect::<Result<Vec<_>, _>>()?;

    let mut factors = Vec::with_capacity(model.vertices.len());
    for v in &model.vertices {
        let params = v
            .dist
            .params
            .iter()
            .map(|t| Node::from_term(t, &index))
            .collect::<Result<Vec<_>, _>>()?;
        if params.len() != v.dist.kind.arity() {
            return Err(DensityError::Malformed(format!(
                "vertex {} has wrong parameter count",
                v.name
            )));
        }
        if v.guard.iter().any(|g| g.pred.0 >= predicates.len()) {
            return Err(DensityError::Malformed(format!(
                "vertex {} has a dangling guard",
                v.name
            )));
        }
        let (value, guard) = if v.is_latent() {
            (FactorValue::Coord(index[v.name.as_str()]), None)
        } else {
            let datum = v.datum.ok_or_else(|| {
                DensityError::Malformed(format!("observed vertex {} has no datum", v.name))
            })?;
            (FactorValue::Datum(datum), Some(v.guard.clone()))
        };
        factors.push(Factor {
            vertex: v.name.clone(),
            kind: v.dist.kind,
            params,
            value,
            guard,
        });
    }

    let pd = PiecewiseDensity {
        coords,
        classes,
        predicates,
        factors,
        region_cap,
        memo: RwLock::new(HashMap::new()),
    };
    let bound_fits = pd.predicates.len() < 64 && (1usize << pd.predicates.len()) <= region_cap;
    if !bound_fits {
        pd.count_regions(region_cap)?;
    }
    Ok(pd)
}

impl PiecewiseDensity {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn classes(&self) -> &[CoordClass] {
        &self.classes
    }

    pub fn discontinuous_coords(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.classes[i] == CoordClass::Discontinuous)
            .collect()
    }

    pub fn continuous_coords(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.classes[i] == CoordClass::Continuous)
            .collect()
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn predicate_nodes(&self) -> &[Node] {
        &self.predicates
    }

    pub fn region_cap(&self) -> usize {
        self.region_cap
    }

    /// Number of regions materialized so far.
    pub fn materialized_regions(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    fn check_state(&self, x: &[f64]) -> Result<(), DensityError> {
        if x.len() != self.dim() {
            return Err(DensityError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(DensityError::NonFinite { index, value });
        }
        Ok(())
    }

    fn resolve<F>(&self, p: usize, key: &mut RegionKey, oracle: &mut F) -> Result<Polarity, usize>
    where
        F: FnMut(usize, &RegionKey) -> Option<Polarity>,
    {
        if let Some(pol) = key.get(p) {
            return Ok(pol);
        }
        self.resolve_conds(&self.predicates[p], key, oracle)?;
        let pol = oracle(p, key).ok_or(p)?;
        key.set(p, pol);
        Ok(pol)
    }

    fn resolve_conds<F>(
        &self,
        node: &Node,
        key: &mut RegionKey,
        oracle: &mut F,
    ) -> Result<(), usize>
    where
        F: FnMut(usize, &RegionKey) -> Option<Polarity>,
    {
        match node {
            Node::Const(_) | Node::Coord(_) => Ok(()),
            Node::Prim(_, args) => args
                .iter()
                .try_for_each(|a| self.resolve_conds(a, key, oracle)),
            Node::Cond(p, a, b) => match self.resolve(*p, key, oracle)? {
                Polarity::Neg => self.resolve_conds(a, key, oracle),
                Polarity::Nonneg => self.resolve_conds(b, key, oracle),
            },
        }
    }

    /// The decision procedure. `oracle` supplies predicate polarities; if it
    /// returns `None` the walk stops and reports which predicate it needed.
    fn trace<F>(&self, oracle: &mut F) -> Result<RegionKey, usize>
    where
        F: FnMut(usize, &RegionKey) -> Option<Polarity>,
    {
        let mut key = RegionKey::empty(self.predicates.len());
        for f in &self.factors {
            if let Some(guard) = &f.guard {
                let mut active = true;
                for lit in guard {
                    if self.resolve(lit.pred.0, &mut key, oracle)? != lit.polarity {
                        active = false;
                        break;
                    }
                }
                if !active {
                    continue;
                }
            }
            for p in &f.params {
                self.resolve_conds(p, &mut key, oracle)?;
            }
        }
        Ok(key)
    }

    /// Key of the region containing `x`. Assumes a checked state.
    fn key_at(&self, x: &[f64]) -> RegionKey {
        let preds = &self.predicates;
        let mut oracle = |p: usize, key: &RegionKey| {
            let v = preds[p].eval_with(x, &mut |q| {
                key.get(q).expect("conditionals resolve before use")
            });
            Some(Polarity::of(v))
        };
        self.trace(&mut oracle)
            .expect("numeric oracle always answers")
    }

    fn region_for_key(&self, key: RegionKey) -> Arc<Region> {
        if let Some(r) = self.memo.read().unwrap().get(&key) {
            return Arc::clone(r);
        }
        let region = Arc::new(self.build_region(key.clone()));
        let mut memo = self.memo.write().unwrap();
        if let Some(r) = memo.get(&key) {
            return Arc::clone(r);
        }
        if memo.len() < self.region_cap {
            memo.insert(key, Arc::clone(&region));
        }
        region
    }

    /// The region whose guard conjunction holds at `x`.
    pub fn active_region(&self, x: &[f64]) -> Result<Arc<Region>, DensityError> {
        self.check_state(x)?;
        Ok(self.region_for_key(self.key_at(x)))
    }

    fn factor_active(f: &Factor, key: &RegionKey) -> bool {
        match &f.guard {
            None => true,
            Some(guard) => guard
                .iter()
                .all(|lit| key.get(lit.pred.0) == Some(lit.polarity)),
        }
    }

    fn build_region(&self, key: RegionKey) -> Region {
        let mut tape = Tape::new();
        let mut inputs: HashMap<usize, Slot> = HashMap::new();
        let mut total: Option<Slot> = None;
        let mut active_vertices = Vec::new();
        for f in &self.factors {
            if !Self::factor_active(f, &key) {
                continue;
            }
            active_vertices.push(f.vertex.clone());
            let p0 = emit(&f.params[0], &mut tape, &mut inputs, &key);
            let p1 = emit(&f.params[1], &mut tape, &mut inputs, &key);
            let xv = match f.value {
                FactorValue::Coord(c) => {
                    *inputs.entry(c).or_insert_with(|| tape.push(Op::Input(c)))
                }
                FactorValue::Datum(d) => tape.constant(d),
            };
            let term = match f.kind {
                DistKind::Normal => tape.push(Op::NormalLp(xv, p0, p1)),
                DistKind::Uniform => tape.push(Op::UniformLp(xv, p0, p1)),
            };
            total = Some(match total {
                None => term,
                Some(acc) => tape.push(Op::Add(acc, term)),
            });
        }
        if total.is_none() {
            tape.constant(0.0);
        }
        let literals = key.literals();
        Region {
            nonneg_guards: literals
                .iter()
                .filter(|l| l.polarity == Polarity::Nonneg)
                .map(|l| l.pred)
                .collect(),
            neg_guards: literals
                .iter()
                .filter(|l| l.polarity == Polarity::Neg)
                .map(|l| l.pred)
                .collect(),
            active_vertices,
            key,
            tape,
        }
    }

    /// Depth-first walk of the decision procedure, calling `visit` on every
    /// leaf key. Fails once more than `cap` leaves are found.
    fn walk_regions(
        &self,
        cap: usize,
        visit: &mut dyn FnMut(RegionKey),
    ) -> Result<usize, DensityError> {
        let mut stack = vec![RegionKey::empty(self.predicates.len())];
        let mut leaves = 0usize;
        while let Some(assignment) = stack.pop() {
            match self.trace(&mut |p, _| assignment.get(p)) {
                Ok(key) => {
                    leaves += 1;
                    if leaves > cap {
                        return Err(DensityError::RegionExplosion { cap });
                    }
                    visit(key);
                }
                Err(p) => {
                    for pol in [Polarity::Nonneg, Polarity::Neg] {
                        let mut next = assignment.clone();
                        next.set(p, pol);
                        stack.push(next);
                    }
                }
            }
        }
        Ok(leaves)
    }

    /// Number of regions in the partition (counting geometrically empty
    /// ones), failing past `cap`.
    pub fn count_regions(&self, cap: usize) -> Result<usize, DensityError> {
        self.walk_regions(cap, &mut |_| {})
    }

    /// Materialize every region of the partition.
    pub fn all_regions(&self) -> Result<Vec<Arc<Region>>, DensityError> {
        let mut keys = Vec::new();
        self.walk_regions(self.region_cap, &mut |k| keys.push(k))?;
        Ok(keys.into_iter().map(|k| self.region_for_key(k)).collect())
    }

    /// Log joint density at `x`; `-inf` outside the support.
    pub fn log_density(&self, x: &[f64]) -> Result<f64, DensityError> {
        self.check_state(x)?;
        let region = self.region_for_key(self.key_at(x));
        let v = SCRATCH.with(|s| region.tape.forward(x, &mut s.borrow_mut().0));
        Ok(nan_to_neg_inf(v))
    }

    /// Log density and its gradient with respect to every coordinate, using
    /// the active region's smooth term. The gradient is zeroed outside the
    /// support.
    pub fn value_and_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, DensityError> {
        self.check_state(x)?;
        if grad.len() != self.dim() {
            return Err(DensityError::DimensionMismatch {
                expected: self.dim(),
                got: grad.len(),
            });
        }
        let region = self.region_for_key(self.key_at(x));
        let v = SCRATCH.with(|s| {
            let (vals, adj) = &mut *s.borrow_mut();
            nan_to_neg_inf(region.tape.gradient(x, vals, adj, grad))
        });
        if v == f64::NEG_INFINITY {
            grad.iter_mut().for_each(|g| *g = 0.0);
        }
        Ok(v)
    }

    /// Gradient of the log density with respect to the listed coordinates.
    pub fn grad_log_density(&self, x: &[f64], wrt: &[usize]) -> Result<Vec<f64>, DensityError> {
        if let Some(&bad) = wrt.iter().find(|&&i| i >= self.dim()) {
            return Err(DensityError::CoordinateOutOfRange(bad));
        }
        let mut grad = vec![0.0; self.dim()];
        let v = self.value_and_grad(x, &mut grad)?;
        if !v.is_finite() {
            return Err(DensityError::OutsideSupport);
        }
        Ok(wrt.iter().map(|&i| grad[i]).collect())
    }

    /// Like [`Self::grad_log_density`] with coordinates named.
    pub fn grad_log_density_by_name(
        &self,
        x: &[f64],
        wrt: &[&str],
    ) -> Result<Vec<f64>, DensityError> {
        let idx = wrt
            .iter()
            .map(|n| {
                self.coord_index(n)
                    .ok_or_else(|| DensityError::UnknownCoordinate(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.grad_log_density(x, &idx)
    }

    /// Values of every predicate expression at `x`, in predicate order.
    pub fn predicate_values(&self, x: &[f64]) -> Vec<f64> {
        self.predicates
            .iter()
            .map(|p| p.eval_direct(x, &self.predicates))
            .collect()
    }

    /// Bounds `[a, b)` of coordinate `c`'s prior at state `x` when that prior
    /// is uniform.
    pub fn uniform_prior_bounds(&self, c: usize, x: &[f64]) -> Option<(f64, f64)> {
        self.factors.iter().find_map(|f| match (f.kind, &f.value) {
            (DistKind::Uniform, FactorValue::Coord(i)) if *i == c => Some((
                f.params[0].eval_direct(x, &self.predicates),
                f.params[1].eval_direct(x, &self.predicates),
            )),
            _ => None,
        })
    }

    /// Draw latent values from the priors in vertex order, evaluating guards
    /// as values become available. `None` if a parameter turned out invalid.
    pub fn ancestral_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        let mut x = vec![0.0; self.dim()];
        for f in &self.factors {
            let FactorValue::Coord(c) = f.value else {
                continue;
            };
            let a = f.params[0].eval_direct(&x, &self.predicates);
            let b = f.params[1].eval_direct(&x, &self.predicates);
            let v = match f.kind {
                DistKind::Normal => {
                    if !(b > 0.0 && a.is_finite() && b.is_finite()) {
                        return None;
                    }
                    let z: f64 = StandardNormal.sample(rng);
                    a + b * z
                }
                DistKind::Uniform => {
                    if !(a < b && a.is_finite() && b.is_finite()) {
                        return None;
                    }
                    let u: f64 = rng.random();
                    let v = a + (b - a) * u;
                    if v < b {
                        v
                    } else {
                        a
                    }
                }
            };
            x[c] = v;
        }
        Some(x)
    }

    /// Debug dump of the materialized regions.
    pub fn region_table_json(&self) -> Value {
        let memo = self.memo.read().unwrap();
        let mut rows: Vec<(Vec<GuardLiteral>, &Arc<Region>)> =
            memo.iter().map(|(k, r)| (k.literals(), r)).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        Value::Array(
            rows.into_iter()
                .map(|(_, r)| {
                    json!({
                        "neg_guards": r.neg_guards.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                        "nonneg_guards": r.nonneg_guards.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                        "factors": r.active_vertices,
                        "tape_len": r.tape.len(),
                    })
                })
                .collect(),
        )
    }
}

fn emit(node: &Node, tape: &mut Tape, inputs: &mut HashMap<usize, Slot>, key: &RegionKey) -> Slot {
    match node {
        Node::Const(v) => tape.constant(*v),
        Node::Coord(c) => *inputs.entry(*c).or_insert_with(|| tape.push(Op::Input(*c))),
        Node::Cond(p, a, b) => match key.get(*p).expect("conditional resolved by the region key") {
            Polarity::Neg => emit(a, tape, inputs, key),
            Polarity::Nonneg => emit(b, tape, inputs, key),
        },
        Node::Prim(op, args) => {
            let slots: Vec<Slot> = match op {
                PrimOp::Pow => vec![emit(&args[0], tape, inputs, key)],
                _ => args.iter().map(|a| emit(a, tape, inputs, key)).collect(),
            };
            let fold = |tape: &mut Tape, f: fn(Slot, Slot) -> Op| {
                slots[1..]
                    .iter()
                    .fold(slots[0], |acc, &s| tape.push(f(acc, s)))
            };
            match op {
                PrimOp::Add => fold(tape, Op::Add),
                PrimOp::Mul => fold(tape, Op::Mul),
                PrimOp::Sub if slots.len() == 1 => tape.push(Op::Neg(slots[0])),
                PrimOp::Sub => fold(tape, Op::Sub),
                PrimOp::Div => tape.push(Op::Div(slots[0], slots[1])),
                PrimOp::Exp => tape.push(Op::Exp(slots[0])),
                PrimOp::Log => tape.push(Op::Log(slots[0])),
                PrimOp::Pow => {
                    let Node::Const(e) = args[1] else {
                        unreachable!("pow exponent checked when the node was built")
                    };
                    tape.push(Op::Powf(slots[0], e))
                }
                PrimOp::Identity => slots[0],
            }
        }
    }
}
