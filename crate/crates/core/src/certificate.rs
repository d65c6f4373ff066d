//! Liouvillian first-integral towers built from witnesses.
//!
//! A tower is a list of nodes where every node refers only to earlier ones;
//! the last node is the first integral. Integrals stay unevaluated. A tower
//! is verified by giving each node a jet symbol whose δ1/δ2 images are the
//! node's defining rules and checking that the rules commute and that the
//! last node is annihilated by `X`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::print_ratfunc;
use crate::field::VectorField;
use crate::jet::{DerivationSystem, JetExpr, JetMode, Sym};
use crate::poly::Var;
use crate::rat::{fmt_rat, Rat};
use crate::ratfunc::RatFunc;
use crate::witness::{verify_witness, Witness};

pub type NodeId = usize;

/// `constant + Σ coeff · node`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeExpr {
    pub constant: RatFunc,
    pub terms: Vec<(RatFunc, NodeId)>,
}

impl NodeExpr {
    pub fn rational(f: RatFunc) -> Self {
        NodeExpr { constant: f, terms: vec![] }
    }

    pub fn node(id: NodeId) -> Self {
        NodeExpr::scaled(RatFunc::one(), id)
    }

    pub fn scaled(c: RatFunc, id: NodeId) -> Self {
        NodeExpr { constant: RatFunc::zero(), terms: vec![(c, id)] }
    }

    pub fn plus(mut self, c: RatFunc, id: NodeId) -> Self {
        self.terms.push((c, id));
        self
    }

    fn to_json(&self) -> Value {
        json!({
            "constant": print_ratfunc(&self.constant),
            "terms": self.terms.iter().map(|(c, id)| json!({"coeff": print_ratfunc(c), "node": id})).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    RationalLeaf(RatFunc),
    /// `a^{1/n}`.
    Root { a: RatFunc, n: u32 },
    /// `∫ v dx1 + u dx2` from the base point.
    PathIntegral { v: NodeExpr, u: NodeExpr },
    /// `exp ∫ v dx1 + u dx2` from the base point.
    ExpPathIntegral { v: NodeExpr, u: NodeExpr },
    /// `w` with `δ2 w = u + w²/2`,
    /// `δ1 w = -δ2²(X2/X1) - (X2/X1) u - δ2(X2/X1) w - (1/2)(X2/X1) w²`, `w(base) = 0`.
    RiccatiLayer { u: NodeExpr },
}

impl Node {
    fn kind(&self) -> &'static str {
        match self {
            Node::RationalLeaf(_) => "rational",
            Node::Root { .. } => "root",
            Node::PathIntegral { .. } => "path_integral",
            Node::ExpPathIntegral { .. } => "exp_path_integral",
            Node::RiccatiLayer { .. } => "riccati",
        }
    }

    pub fn children(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = match self {
            Node::RationalLeaf(_) | Node::Root { .. } => vec![],
            Node::PathIntegral { v, u } | Node::ExpPathIntegral { v, u } => {
                v.terms.iter().chain(&u.terms).map(|(_, id)| *id).collect()
            }
            Node::RiccatiLayer { u } => u.terms.iter().map(|(_, id)| *id).collect(),
        };
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Rational functions appearing in the node, for singularity checks.
    pub fn rational_parts(&self) -> Vec<&RatFunc> {
        fn from(e: &NodeExpr) -> Vec<&RatFunc> {
            std::iter::once(&e.constant).chain(e.terms.iter().map(|(c, _)| c)).collect()
        }
        match self {
            Node::RationalLeaf(f) => vec![f],
            Node::Root { a, .. } => vec![a],
            Node::PathIntegral { v, u } | Node::ExpPathIntegral { v, u } => {
                let mut out = from(v);
                out.extend(from(u));
                out
            }
            Node::RiccatiLayer { u } => from(u),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasePoint {
    p1: i64,
    p2: i64,
    q: i64,
}

impl BasePoint {
    /// `(p1/q, p2/q)`.
    pub fn new(p1: i64, p2: i64, q: i64) -> Self {
        assert!(q > 0);
        BasePoint { p1, p2, q }
    }

    pub fn x1(&self) -> f64 {
        self.p1 as f64 / self.q as f64
    }

    pub fn x2(&self) -> f64 {
        self.p2 as f64 / self.q as f64
    }

    pub fn from_rats(x1: &Rat, x2: &Rat) -> Result<Self> {
        let q = x1.denom() * x2.denom() / num_integer::Integer::gcd(x1.denom(), x2.denom());
        let to_i64 = |b: BigInt| -> Result<i64> {
            i64::try_from(b).map_err(|_| Error::InvalidArgument("base point coordinates too large".into()))
        };
        let p1 = to_i64((x1 * Rat::from_integer(q.clone())).to_integer())?;
        let p2 = to_i64((x2 * Rat::from_integer(q.clone())).to_integer())?;
        Ok(BasePoint::new(p1, p2, to_i64(q)?))
    }

    pub fn origin() -> Self {
        BasePoint::new(0, 0, 1)
    }

    pub fn exact(&self) -> (Rat, Rat) {
        (Rat::new(self.p1.into(), self.q.into()), Rat::new(self.p2.into(), self.q.into()))
    }

    /// Parses `"p,q"` with rational entries.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidArgument(format!("base point must be \"p,q\", got {s:?}")));
        }
        let coord = |t: &str| -> Result<Rat> {
            let f = crate::expr::parse_ratfunc(t)?;
            if !f.is_constant() {
                return Err(Error::InvalidArgument(format!("base coordinate {t:?} is not a number")));
            }
            Ok(f.num().constant_value().unwrap_or_else(Rat::zero))
        };
        BasePoint::from_rats(&coord(parts[0])?, &coord(parts[1])?)
    }

    /// `(0,0)` first, then rings of points with spacing 1/4 outwards.
    pub fn spiral() -> impl Iterator<Item = BasePoint> {
        std::iter::once(BasePoint::origin()).chain((1..=24i64).flat_map(|k| {
            let mut ring = Vec::new();
            for i in -k..=k {
                for j in -k..=k {
                    if i.abs().max(j.abs()) == k {
                        ring.push((i, j));
                    }
                }
            }
            ring.sort_by_key(|&(i, j)| (i.abs() + j.abs(), -i, -j));
            ring.into_iter().map(|(i, j)| BasePoint::new(i, j, 4))
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateTower {
    pub vf: VectorField,
    pub level: u8,
    pub nodes: Vec<Node>,
    pub base: BasePoint,
    pub verified: bool,
}

impl CertificateTower {
    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let mut obj = json!({"id": id, "type": n.kind(), "children": n.children()});
                let m = obj.as_object_mut().unwrap();
                match n {
                    Node::RationalLeaf(f) => {
                        m.insert("value".into(), json!(print_ratfunc(f)));
                    }
                    Node::Root { a, n } => {
                        m.insert("a".into(), json!(print_ratfunc(a)));
                        m.insert("n".into(), json!(n));
                    }
                    Node::PathIntegral { v, u } | Node::ExpPathIntegral { v, u } => {
                        m.insert("v".into(), v.to_json());
                        m.insert("u".into(), u.to_json());
                    }
                    Node::RiccatiLayer { u } => {
                        m.insert("u".into(), u.to_json());
                    }
                }
                obj
            })
            .collect();
        let (b1, b2) = self.base.exact();
        json!({
            "level": self.level,
            "base": [fmt_rat(&b1), fmt_rat(&b2)],
            "root": self.root(),
            "nodes": nodes,
            "verified": self.verified,
        })
    }
}

fn is_well_founded(nodes: &[Node]) -> bool {
    nodes.iter().enumerate().all(|(id, n)| n.children().iter().all(|&c| c < id))
}

struct JetModel {
    sys: DerivationSystem,
    reps: Vec<JetExpr>,
    syms: Vec<Option<Sym>>,
}

impl JetModel {
    fn expr(&self, e: &NodeExpr) -> JetExpr {
        let mut out = JetExpr::constant(e.constant.clone());
        for (c, id) in &e.terms {
            out = out.add(&self.reps[*id].scale(c));
        }
        out
    }

    fn build(vf: &VectorField, nodes: &[Node]) -> Result<JetModel> {
        let mut m = JetModel { sys: DerivationSystem::new(vf, JetMode::Reduced), reps: Vec::new(), syms: Vec::new() };
        let s = vf.ratio();
        let s1 = s.d2();
        let s2 = s1.d2();
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        for (id, node) in nodes.iter().enumerate() {
            if let Node::RationalLeaf(f) = node {
                m.reps.push(JetExpr::constant(f.clone()));
                m.syms.push(None);
                continue;
            }
            let sym = m.sys.declare(&format!("n{id}"));
            let sj = JetExpr::sym(sym);
            let (d1, d2) = match node {
                Node::RationalLeaf(_) => unreachable!(),
                Node::Root { a, n } => {
                    let na = a.scale(&Rat::from_integer((*n).into()));
                    let l1 = a.d1().checked_div(&na).map_err(|_| Error::WitnessInvalid)?;
                    let l2 = a.d2().checked_div(&na).map_err(|_| Error::WitnessInvalid)?;
                    (sj.scale(&l1), sj.scale(&l2))
                }
                Node::PathIntegral { v, u } => (m.expr(v), m.expr(u)),
                Node::ExpPathIntegral { v, u } => (sj.mul(&m.expr(v)), sj.mul(&m.expr(u))),
                Node::RiccatiLayer { u } => {
                    let ue = m.expr(u);
                    let w2 = sj.mul(&sj);
                    let d2 = ue.add(&w2.scale_rat(&half));
                    let d1 = JetExpr::constant(-s2.clone())
                        .sub(&ue.scale(&s))
                        .sub(&sj.scale(&s1))
                        .sub(&w2.scale(&s.scale(&half)));
                    (d1, d2)
                }
            };
            m.sys.set_rules(sym, Some(d1), Some(d2));
            m.reps.push(sj);
            m.syms.push(Some(sym));
        }
        Ok(m)
    }
}

/// Residuals that must all vanish for the tower to be a first integral.
pub fn verification_residuals(vf: &VectorField, nodes: &[Node]) -> Result<Vec<(String, JetExpr)>> {
    if nodes.is_empty() || !is_well_founded(nodes) {
        return Err(Error::InvalidArgument("tower must be non-empty and reference only earlier nodes".into()));
    }
    let m = JetModel::build(vf, nodes)?;
    let mut out = Vec::new();
    for (id, node) in nodes.iter().enumerate() {
        let Some(sym) = m.syms[id] else { continue };
        let e = JetExpr::sym(sym);
        let d1 = m.sys.derive(Var::X1, &e)?;
        let d2 = m.sys.derive(Var::X2, &e)?;
        let r = m.sys.derive(Var::X1, &d2)?.sub(&m.sys.derive(Var::X2, &d1)?);
        out.push((format!("{} n{id}: d1 d2 - d2 d1", node.kind()), r));
    }
    let top = &m.reps[nodes.len() - 1];
    out.push(("X(first integral)".into(), m.sys.apply_x(top)?));
    Ok(out)
}

/// True iff every residual reduces to zero and the top node is non-constant.
pub fn verify_tower(vf: &VectorField, nodes: &[Node]) -> Result<bool> {
    let res = verification_residuals(vf, nodes)?;
    if !res.iter().all(|(_, r)| r.is_zero()) {
        return Ok(false);
    }
    let m = JetModel::build(vf, nodes)?;
    let top = &m.reps[nodes.len() - 1];
    let d1 = m.sys.derive(Var::X1, top)?;
    let d2 = m.sys.derive(Var::X2, top)?;
    Ok(!(d1.is_zero() && d2.is_zero()))
}

fn eval_exact(f: &RatFunc, base: &BasePoint) -> Option<Rat> {
    let (x1, x2) = base.exact();
    f.eval(&x1, &x2).ok()
}

/// Whether `X1`, every layer denominator and every root radicand are nonzero at `base`.
pub fn base_is_valid(vf: &VectorField, nodes: &[Node], base: &BasePoint) -> bool {
    let (x1, x2) = base.exact();
    if vf.x1().eval(&x1, &x2).is_zero() {
        return false;
    }
    nodes.iter().all(|n| {
        let finite = n.rational_parts().iter().all(|f| eval_exact(f, base).is_some());
        let root_ok = match n {
            Node::Root { a, .. } => eval_exact(a, base).is_some_and(|v| !v.is_zero()),
            _ => true,
        };
        finite && root_ok
    })
}

fn choose_base(vf: &VectorField, nodes: &[Node], base: Option<BasePoint>) -> Result<BasePoint> {
    match base {
        Some(b) if base_is_valid(vf, nodes, &b) => Ok(b),
        Some(_) => Err(Error::BasePointSingular),
        None => BasePoint::spiral().find(|b| base_is_valid(vf, nodes, b)).ok_or(Error::BasePointSingular),
    }
}

fn finish(vf: &VectorField, level: u8, nodes: Vec<Node>, base: Option<BasePoint>) -> Result<CertificateTower> {
    let base = choose_base(vf, &nodes, base)?;
    if !verify_tower(vf, &nodes)? {
        return Err(Error::InternalVerifyFailed(format!("level-{level} tower does not verify")));
    }
    Ok(CertificateTower { vf: vf.clone(), level, nodes, base, verified: true })
}

fn minus_slope(vf: &VectorField) -> RatFunc {
    -vf.ratio()
}

/// Tower for a rational first integral.
pub fn certify_r0(vf: &VectorField, omega: &RatFunc, base: Option<BasePoint>) -> Result<CertificateTower> {
    if !verify_witness(vf, &Witness::level0(omega.clone())) {
        return Err(Error::WitnessInvalid);
    }
    finish(vf, 0, vec![Node::RationalLeaf(omega.clone())], base)
}

/// `ω = ∫ -(X2/X1) u dx1 + u dx2` with `u = a^{1/n}`.
pub fn certify_r1(vf: &VectorField, a: &RatFunc, n: u32, base: Option<BasePoint>) -> Result<CertificateTower> {
    if !verify_witness(vf, &Witness::level1(a.clone(), n)) {
        return Err(Error::WitnessInvalid);
    }
    let u = if n == 1 { Node::RationalLeaf(a.clone()) } else { Node::Root { a: a.clone(), n } };
    let nodes = vec![u, Node::PathIntegral { v: NodeExpr::scaled(minus_slope(vf), 0), u: NodeExpr::node(0) }];
    finish(vf, 1, nodes, base)
}

/// `η = exp ∫ v dx1 + a dx2` with `v = -(X2/X1) a + B0/X1`, then
/// `ω = ∫ -(X2/X1) η dx1 + η dx2`.
pub fn certify_r2(vf: &VectorField, a: &RatFunc, base: Option<BasePoint>) -> Result<CertificateTower> {
    if !verify_witness(vf, &Witness::higher(2, a.clone())) {
        return Err(Error::WitnessInvalid);
    }
    let b0 = vf.b_sequence(0).get(0).clone();
    let x1 = RatFunc::from(vf.x1().clone());
    let v = &(&minus_slope(vf) * a) + &(&b0 / &x1);
    let nodes = vec![
        Node::ExpPathIntegral { v: NodeExpr::rational(v), u: NodeExpr::rational(a.clone()) },
        Node::PathIntegral { v: NodeExpr::scaled(minus_slope(vf), 0), u: NodeExpr::node(0) },
    ];
    finish(vf, 2, nodes, base)
}

/// Riccati layer `w` over `u = a`, then `ω2 = exp ∫ v dx1 + w dx2` with
/// `v = -δ2(X2/X1) - (X2/X1) w`, then `ω = ∫ -(X2/X1) ω2 dx1 + ω2 dx2`.
pub fn certify_r3(vf: &VectorField, a: &RatFunc, base: Option<BasePoint>) -> Result<CertificateTower> {
    if !verify_witness(vf, &Witness::higher(3, a.clone())) {
        return Err(Error::WitnessInvalid);
    }
    finish(vf, 3, level3_nodes(vf, a), base)
}

/// The unverified level-3 node list.
pub fn level3_nodes(vf: &VectorField, a: &RatFunc) -> Vec<Node> {
    let s = vf.ratio();
    vec![
        Node::RiccatiLayer { u: NodeExpr::rational(a.clone()) },
        Node::ExpPathIntegral {
            v: NodeExpr { constant: -s.d2(), terms: vec![(-s.clone(), 0)] },
            u: NodeExpr::node(0),
        },
        Node::PathIntegral { v: NodeExpr::scaled(-s, 1), u: NodeExpr::node(1) },
    ]
}

/// Dispatches on the witness level.
pub fn certify(vf: &VectorField, w: &Witness, base: Option<BasePoint>) -> Result<CertificateTower> {
    match w.level {
        0 => certify_r0(vf, w.first_integral.as_ref().unwrap_or(&w.a), base),
        1 => certify_r1(vf, &w.a, w.n.ok_or(Error::WitnessInvalid)?, base),
        2 => certify_r2(vf, &w.a, base),
        3 => certify_r3(vf, &w.a, base),
        _ => Err(Error::WitnessInvalid),
    }
}

/// Flips the sign of the `v` part of the outermost integral (a rational root
/// gets `x1` added instead); used to check that verification catches
/// corrupted towers.
pub fn corrupt_outer_v(t: &CertificateTower) -> CertificateTower {
    let mut t = t.clone();
    let root = t.root();
    if let Node::PathIntegral { v, .. } | Node::ExpPathIntegral { v, .. } = &mut t.nodes[root] {
        v.constant = -v.constant.clone();
        for (c, _) in v.terms.iter_mut() {
            *c = -c.clone();
        }
    } else if let Node::RationalLeaf(f) = &mut t.nodes[root] {
        *f = &*f + &RatFunc::from(crate::poly::Poly::x1());
    }
    t.verified = false;
    t
}
