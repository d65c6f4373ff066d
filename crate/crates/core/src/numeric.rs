//! Floating-point cross-checks: RK4 trajectories of the field and
//! evaluation of certificate towers along them.
//!
//! Towers are evaluated along the axis-aligned path from the base point
//! `(b1, b2)` to `(p1, b2)` and then to `(p1, p2)`. The path to any point of
//! this path is a prefix of it, so nested integrals stay consistent.

use serde::Serialize;

use crate::certificate::{CertificateTower, Node, NodeExpr};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::poly::Poly;
use crate::rat::rat_to_f64;
use crate::ratfunc::RatFunc;

const BLOWUP: f64 = 1e6;
const SAMPLES_PER_SEGMENT: usize = 1024;
const SIMPSON_TOL: f64 = 1e-10;
const SIMPSON_DEPTH: u32 = 40;
const MIN_SAMPLES: usize = 32;

#[derive(Clone, Debug)]
struct CPoly(Vec<(f64, i32, i32)>);

impl CPoly {
    fn new(p: &Poly) -> Self {
        CPoly(p.terms().map(|(m, c)| (rat_to_f64(c), m.e1 as i32, m.e2 as i32)).collect())
    }

    fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.0.iter().map(|&(c, a, b)| c * x1.powi(a) * x2.powi(b)).sum()
    }
}

#[derive(Clone, Debug)]
struct CRat {
    num: CPoly,
    den: CPoly,
}

impl CRat {
    fn new(f: &RatFunc) -> Self {
        CRat { num: CPoly::new(f.num()), den: CPoly::new(f.den()) }
    }

    fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.num.eval(x1, x2) / self.den.eval(x1, x2)
    }
}

/// Evaluates a rational function in floating point.
pub fn eval_ratfunc(f: &RatFunc, x1: f64, x2: f64) -> f64 {
    CRat::new(f).eval(x1, x2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    /// `(t, x1, x2)`.
    pub points: Vec<(f64, f64, f64)>,
    pub h: f64,
    pub method: &'static str,
}

/// Classical RK4 for `x' = X(x)` from `start` up to `t_end`.
pub fn flow(vf: &VectorField, start: (f64, f64), t_end: f64, h: f64) -> Result<Trajectory> {
    if h.is_nan() || t_end.is_nan() || h <= 0.0 || t_end <= 0.0 {
        return Err(Error::InvalidArgument("flow needs h > 0 and t_end > 0".into()));
    }
    let (f1, f2) = (CPoly::new(vf.x1()), CPoly::new(vf.x2()));
    let rhs = |x: f64, y: f64| (f1.eval(x, y), f2.eval(x, y));
    let steps = (t_end / h - 1e-9).ceil() as usize;
    let (mut x, mut y) = start;
    let mut points = Vec::with_capacity(steps + 1);
    points.push((0.0, x, y));
    for k in 1..=steps {
        let (a1, a2) = rhs(x, y);
        let (b1, b2) = rhs(x + 0.5 * h * a1, y + 0.5 * h * a2);
        let (c1, c2) = rhs(x + 0.5 * h * b1, y + 0.5 * h * b2);
        let (d1, d2) = rhs(x + h * c1, y + h * c2);
        x += h / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
        y += h / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
        if !x.is_finite() || !y.is_finite() || x.hypot(y) > BLOWUP {
            return Err(Error::TrajectoryBlowup);
        }
        points.push((k as f64 * h, x, y));
    }
    Ok(Trajectory { points, h, method: "rk4" })
}

#[derive(Clone, Debug)]
struct CExpr {
    constant: CRat,
    terms: Vec<(CRat, usize)>,
}

impl CExpr {
    fn new(e: &NodeExpr) -> Self {
        CExpr { constant: CRat::new(&e.constant), terms: e.terms.iter().map(|(c, id)| (CRat::new(c), *id)).collect() }
    }

    fn eval(&self, x1: f64, x2: f64, vals: &[f64]) -> f64 {
        self.constant.eval(x1, x2) + self.terms.iter().map(|(c, id)| c.eval(x1, x2) * vals[*id]).sum::<f64>()
    }
}

#[derive(Clone, Debug)]
enum CNode {
    Leaf(CRat),
    Root(CRat, u32),
    Path(CExpr, CExpr),
    Exp(CExpr, CExpr),
    Riccati(CExpr),
}

struct Compiled {
    nodes: Vec<CNode>,
    /// `X2/X1` and its first two δ2-derivatives.
    slope: [CRat; 3],
    /// Every denominator plus root radicands, checked along the path.
    guards: Vec<CPoly>,
    base: (f64, f64),
}

impl Compiled {
    fn new(t: &CertificateTower) -> Self {
        let s = t.vf.ratio();
        let s1 = s.d2();
        let s2 = s1.d2();
        let mut guards = Vec::new();
        let mut nodes = Vec::new();
        for n in &t.nodes {
            for f in n.rational_parts() {
                if !f.den().is_constant() {
                    guards.push(CPoly::new(f.den()));
                }
            }
            nodes.push(match n {
                Node::RationalLeaf(f) => CNode::Leaf(CRat::new(f)),
                Node::Root { a, n } => {
                    guards.push(CPoly::new(a.num()));
                    CNode::Root(CRat::new(a), *n)
                }
                Node::PathIntegral { v, u } => CNode::Path(CExpr::new(v), CExpr::new(u)),
                Node::ExpPathIntegral { v, u } => CNode::Exp(CExpr::new(v), CExpr::new(u)),
                Node::RiccatiLayer { u } => CNode::Riccati(CExpr::new(u)),
            });
        }
        if nodes.iter().any(|n| matches!(n, CNode::Riccati(_))) && !t.vf.x1().is_constant() {
            guards.push(CPoly::new(t.vf.x1()));
        }
        Compiled { nodes, slope: [CRat::new(&s), CRat::new(&s1), CRat::new(&s2)], guards, base: (t.base.x1(), t.base.x2()) }
    }

    fn has_riccati(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n, CNode::Riccati(_)))
    }

    fn check_path(&self, p: (f64, f64)) -> Result<()> {
        let (b1, b2) = self.base;
        let segs = [((b1, b2), (p.0, b2)), ((p.0, b2), p)];
        for g in &self.guards {
            let scale = g.0.iter().map(|(c, _, _)| c.abs()).fold(0.0, f64::max).max(1.0);
            for (from, to) in segs {
                if from == to {
                    continue;
                }
                let mut prev: Option<f64> = None;
                for k in 0..=SAMPLES_PER_SEGMENT {
                    let t = k as f64 / SAMPLES_PER_SEGMENT as f64;
                    let v = g.eval(from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1));
                    if !v.is_finite() || v.abs() <= 1e-12 * scale || prev.is_some_and(|q| q.signum() != v.signum()) {
                        return Err(Error::PathSingular);
                    }
                    prev = Some(v);
                }
            }
        }
        Ok(())
    }

    /// Value of node `id` at `q`, integrating along the L-path from the base.
    fn node_value(&self, id: usize, q: (f64, f64)) -> Result<f64> {
        match &self.nodes[id] {
            CNode::Leaf(f) => Ok(f.eval(q.0, q.1)),
            CNode::Root(a, n) => Ok(a.eval(q.0, q.1).abs().powf(1.0 / *n as f64)),
            CNode::Path(v, u) => self.line_integral(v, u, q),
            CNode::Exp(v, u) => Ok(self.line_integral(v, u, q)?.exp()),
            CNode::Riccati(_) => Err(Error::InvalidArgument("Riccati layers need the coupled evaluator".into())),
        }
    }

    fn expr_value(&self, e: &CExpr, x1: f64, x2: f64) -> Result<f64> {
        let mut vals = vec![0.0; self.nodes.len()];
        for (_, id) in &e.terms {
            vals[*id] = self.node_value(*id, (x1, x2))?;
        }
        Ok(e.eval(x1, x2, &vals))
    }

    fn line_integral(&self, v: &CExpr, u: &CExpr, q: (f64, f64)) -> Result<f64> {
        let (b1, b2) = self.base;
        let h = adaptive_simpson(&|x| self.expr_value(v, x, b2), b1, q.0, SIMPSON_TOL)?;
        let w = adaptive_simpson(&|y| self.expr_value(u, q.0, y), b2, q.1, SIMPSON_TOL)?;
        Ok(h + w)
    }

    /// Derivatives of the integrated state along the x1 (`horizontal`) or x2 direction.
    fn rates(&self, x1: f64, x2: f64, state: &[f64], horizontal: bool) -> Vec<f64> {
        let mut vals = vec![0.0; self.nodes.len()];
        let mut rates = vec![0.0; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            vals[id] = match n {
                CNode::Leaf(f) => f.eval(x1, x2),
                CNode::Root(a, k) => a.eval(x1, x2).abs().powf(1.0 / *k as f64),
                CNode::Path(..) | CNode::Riccati(_) => state[id],
                CNode::Exp(..) => state[id].exp(),
            };
            rates[id] = match n {
                CNode::Leaf(_) | CNode::Root(..) => 0.0,
                CNode::Path(v, u) | CNode::Exp(v, u) => {
                    if horizontal {
                        v.eval(x1, x2, &vals)
                    } else {
                        u.eval(x1, x2, &vals)
                    }
                }
                CNode::Riccati(u) => {
                    let uu = u.eval(x1, x2, &vals);
                    let w = state[id];
                    if horizontal {
                        let [s, s1, s2] = &self.slope;
                        let (s, s1, s2) = (s.eval(x1, x2), s1.eval(x1, x2), s2.eval(x1, x2));
                        -s2 - s * uu - s1 * w - 0.5 * s * w * w
                    } else {
                        uu + 0.5 * w * w
                    }
                }
            };
        }
        rates
    }

    fn rk4_path(&self, q: (f64, f64), steps: usize) -> Vec<f64> {
        let (b1, b2) = self.base;
        let mut state = vec![0.0; self.nodes.len()];
        for (horizontal, from, to) in [(true, b1, q.0), (false, b2, q.1)] {
            if from == to {
                continue;
            }
            let h = (to - from) / steps as f64;
            let at = |s: f64| if horizontal { (s, b2) } else { (q.0, s) };
            for k in 0..steps {
                let s = from + k as f64 * h;
                let add = |a: &[f64], b: &[f64], c: f64| a.iter().zip(b).map(|(x, y)| x + c * y).collect::<Vec<_>>();
                let (p0, p1, p2) = (at(s), at(s + 0.5 * h), at(s + h));
                let k1 = self.rates(p0.0, p0.1, &state, horizontal);
                let k2 = self.rates(p1.0, p1.1, &add(&state, &k1, 0.5 * h), horizontal);
                let k3 = self.rates(p1.0, p1.1, &add(&state, &k2, 0.5 * h), horizontal);
                let k4 = self.rates(p2.0, p2.1, &add(&state, &k3, h), horizontal);
                for i in 0..state.len() {
                    state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        state
    }

    fn coupled_value(&self, q: (f64, f64)) -> Result<f64> {
        let root = self.nodes.len() - 1;
        let finish = |state: &[f64]| match self.nodes[root] {
            CNode::Exp(..) => state[root].exp(),
            _ => state[root],
        };
        let mut steps = 256;
        let mut prev = finish(&self.rk4_path(q, steps));
        while steps < (1 << 20) {
            steps *= 2;
            let cur = finish(&self.rk4_path(q, steps));
            if !cur.is_finite() {
                return Err(Error::PathSingular);
            }
            if (cur - prev).abs() <= SIMPSON_TOL * cur.abs().max(1.0) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::QuadratureNonConvergent)
    }

    fn value(&self, q: (f64, f64)) -> Result<f64> {
        self.check_path(q)?;
        if self.has_riccati() {
            self.coupled_value(q)
        } else {
            self.node_value(self.nodes.len() - 1, q)
        }
    }
}

fn simpson_step(f: &dyn Fn(f64) -> Result<f64>, a: f64, fa: f64, b: f64, fb: f64) -> Result<(f64, f64, f64)> {
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    Ok((m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (lm, flm, left) = simpson_step(f, a, fa, m, fm)?;
    let (rm, frm, right) = simpson_step(f, m, fm, b, fb)?;
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::PathSingular);
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureNonConvergent);
    }
    Ok(simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)?
        + simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)?)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let (m, fm, whole) = simpson_step(f, a, fa, b, fb)?;
    simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, SIMPSON_DEPTH)
}

/// Value of the tower's first integral at `p`.
pub fn eval_tower(t: &CertificateTower, p: (f64, f64)) -> Result<f64> {
    if !t.verified {
        return Err(Error::InvalidArgument("tower has not been verified".into()));
    }
    eval_tower_unverified(t, p)
}

/// Same as [`eval_tower`] without the verification gate; for mutation tests.
pub fn eval_tower_unverified(t: &CertificateTower, p: (f64, f64)) -> Result<f64> {
    Compiled::new(t).value(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericReport {
    pub samples: usize,
    pub max_abs_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

fn sample_indices(n: usize) -> Vec<usize> {
    let count = MIN_SAMPLES.max(64).min(n);
    (0..count).map(|k| k * (n - 1) / (count - 1).max(1)).collect()
}

fn constancy(t: &CertificateTower, traj: &Trajectory, tol: f64, gated: bool) -> Result<NumericReport> {
    if traj.points.len() < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("trajectory needs at least {MIN_SAMPLES} points")));
    }
    let compiled = Compiled::new(t);
    if gated && !t.verified {
        return Err(Error::InvalidArgument("tower has not been verified".into()));
    }
    let idx = sample_indices(traj.points.len());
    let mut first = None;
    let mut max_dev: f64 = 0.0;
    for &i in &idx {
        let (_, x1, x2) = traj.points[i];
        let v = compiled.value((x1, x2))?;
        let f0 = *first.get_or_insert(v);
        max_dev = max_dev.max((v - f0).abs());
    }
    Ok(NumericReport { samples: idx.len(), max_abs_deviation: max_dev, tol, pass: max_dev < tol })
}

/// Evaluates the tower at evenly spaced trajectory samples and reports the
/// largest deviation from the first one.
pub fn check_constancy(vf: &VectorField, t: &CertificateTower, traj: &Trajectory, tol: f64) -> Result<NumericReport> {
    if *vf != t.vf {
        return Err(Error::InvalidArgument("tower was built for a different field".into()));
    }
    constancy(t, traj, tol, true)
}

/// [`check_constancy`] without the verification gate; for mutation tests.
pub fn check_constancy_unverified(t: &CertificateTower, traj: &Trajectory, tol: f64) -> Result<NumericReport> {
    constancy(t, traj, tol, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{certify_r0, certify_r1, corrupt_outer_v, BasePoint};
    use crate::expr::parse_ratfunc;

    fn vf(a: &str, b: &str) -> VectorField {
        VectorField::parse(a, b).unwrap()
    }

    #[test]
    fn flow_examples() {
        let t = flow(&vf("1", "x2"), (0.0, 1.0), 1.0, 1e-3).unwrap();
        let &(tt, x, y) = t.points.last().unwrap();
        assert!((tt - 1.0).abs() < 1e-12);
        assert!((x - 1.0).abs() < 1e-9 && (y - std::f64::consts::E).abs() < 1e-9);
        let t = flow(&vf("x2", "-x1"), (1.0, 0.0), 1.0, 1e-3).unwrap();
        let &(_, x, y) = t.points.last().unwrap();
        assert!((x.hypot(y) - 1.0).abs() < 1e-9);
        assert!(flow(&vf("1", "x2"), (0.0, 1.0), 1.0, 0.0).is_err());
        assert_eq!(flow(&vf("1", "x2^2"), (0.0, 1.0), 2.0, 1e-3), Err(Error::TrajectoryBlowup));
    }

    #[test]
    fn level1_tower_values() {
        let v = vf("1", "x2");
        let t = certify_r1(&v, &parse_ratfunc("1/x2").unwrap(), 1, Some(BasePoint::new(0, 1, 1))).unwrap();
        assert!(eval_tower(&t, (1.0, std::f64::consts::E)).unwrap().abs() < 1e-6);
        assert_eq!(eval_tower(&t, (0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(eval_tower(&t, (0.5, -1.0)), Err(Error::PathSingular));
        let traj = flow(&v, (0.2, 1.3), 1.0, 1e-3).unwrap();
        let rep = check_constancy(&v, &t, &traj, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.samples >= 32);
        let bad = corrupt_outer_v(&t);
        assert!(!check_constancy_unverified(&bad, &traj, 1e-6).unwrap().pass);
    }

    #[test]
    fn level0_leaf() {
        let v = vf("x2", "-x1");
        let t = certify_r0(&v, &parse_ratfunc("x1^2 + x2^2").unwrap(), None).unwrap();
        let traj = flow(&v, (1.0, 0.0), 1.0, 1e-3).unwrap();
        let rep = check_constancy(&v, &t, &traj, 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn pipeline_towers_are_constant() {
        use crate::certificate::certify;
        use crate::witness::{classify, SearchBounds};
        for (a, b) in [("1", "x2"), ("1", "x2^2 - 1"), ("1", "x1*x2 + 1"), ("x2", "-x1"), ("1", "x2^2 + x1")] {
            let v = vf(a, b);
            let c = classify(&v, &SearchBounds::default()).unwrap();
            let w = c.witness.expect("witness");
            let t = certify(&v, &w, None).unwrap();
            assert!(t.verified);
            let traj = flow(&v, (0.2, 0.3), 1.0, 1e-3).unwrap();
            let rep = check_constancy(&v, &t, &traj, 1e-6).unwrap();
            assert!(rep.pass, "{a}, {b}: {rep:?}");
        }
    }
}
