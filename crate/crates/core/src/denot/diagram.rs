//! String diagrams over canonical atoms. Each wire carries one non-tensor object and has one
//! producer and one consumer. Symbolic boxes are eliminated by local laws (cut of `eps`
//! against `Lambda`, discarding into `Lambda`/`L`/`eta`, naturality of `eta`, duplication
//! through `nabla`, and absorption of neighbours into case boxes) until every box is a
//! concrete matrix, after which the diagram is contracted.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::normalize::NORMALIZE_BUDGET;
use super::{to_concrete, DenotError, MorIR, SemObject};
use crate::syntax::CMatrix;
use crate::vna::{self, VnaMorphism, VnaObject};

type W = usize;

#[derive(Clone, Debug)]
enum Kind {
    Conc(Arc<VnaMorphism>),
    /// ins: atoms of `B`; outs: `[Hom(A, B)] ++ atoms(A)`
    Eps,
    /// ins: `[Hom(A, B)]`; outs: context atoms. Body outputs: outs ++ atoms(A).
    Lam(Diagram),
    EtaHom,
    /// ins: `[L Hom]`; body: `[Hom] -> atoms(Y)`; outs: atoms of `L Y`.
    Lmap(Diagram),
    Nabla,
    Unit,
    /// `theta o <b1, b2>`: outs are `gamma` shared wires then the sum wire (if any).
    /// Branch outputs are the shared wires then the summand atoms.
    Case { branches: Box<[Diagram; 2]>, gamma: usize, summands: [Vec<SemObject>; 2], stuck: bool },
    Opaque(String),
}

impl Kind {
    fn name(&self) -> String {
        match self {
            Kind::Conc(f) => format!("conc[{} -> {}]", f.dom(), f.cod()),
            Kind::Eps => "eps".into(),
            Kind::Lam(_) => "Lambda".into(),
            Kind::EtaHom => "eta".into(),
            Kind::Lmap(_) => "L".into(),
            Kind::Nabla => "nabla".into(),
            Kind::Unit => "unit".into(),
            Kind::Case { .. } => "case".into(),
            Kind::Opaque(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    kind: Kind,
    ins: Vec<W>,
    outs: Vec<W>,
}

#[derive(Clone, Debug, Default)]
struct Diagram {
    wires: Vec<SemObject>,
    nodes: Vec<Option<Node>>,
    inputs: Vec<W>,
    outputs: Vec<W>,
}

/// Compile, eliminate symbolic boxes and contract.
pub(super) fn evaluate(e: &MorIR) -> Result<VnaMorphism, DenotError> {
    let mut d = Diagram::from_ir(e)?;
    let mut budget = NORMALIZE_BUDGET;
    d.rewrite(&mut budget)?;
    d.contract()
}

fn malformed(msg: impl Into<String>) -> DenotError {
    DenotError::Malformed(msg.into())
}

fn tick(budget: &mut usize) -> Result<(), DenotError> {
    if *budget == 0 {
        return Err(DenotError::Budget(NORMALIZE_BUDGET));
    }
    *budget -= 1;
    Ok(())
}

impl Diagram {
    fn from_ir(e: &MorIR) -> Result<Diagram, DenotError> {
        let (dom, cod) = e.typ()?;
        let mut d = Diagram::default();
        let ins = d.fresh_all(&dom.atoms());
        let outs = d.compile(e, ins.clone())?;
        let outs = d.regroup(outs, &cod.atoms())?;
        d.inputs = ins;
        d.outputs = outs;
        Ok(d)
    }

    fn fresh(&mut self, atom: SemObject) -> W {
        self.wires.push(atom);
        self.wires.len() - 1
    }

    fn fresh_all(&mut self, atoms: &[SemObject]) -> Vec<W> {
        atoms.iter().map(|a| self.fresh(a.clone())).collect()
    }

    fn atoms_of(&self, ws: &[W]) -> Vec<SemObject> {
        ws.iter().map(|w| self.wires[*w].clone()).collect()
    }

    fn add(&mut self, kind: Kind, ins: Vec<W>, outs: Vec<W>) -> usize {
        self.nodes.push(Some(Node { kind, ins, outs }));
        self.nodes.len() - 1
    }

    fn conc(&mut self, ins: Vec<W>, f: VnaMorphism) -> Vec<W> {
        let outs = self.fresh_all(&SemObject::Concrete(f.cod().clone()).atoms());
        self.add(Kind::Conc(Arc::new(f)), ins, outs.clone());
        outs
    }

    /// Wires carrying the unit of `obj`.
    fn units(&mut self, obj: &SemObject) -> Vec<W> {
        let mut out = Vec::new();
        for a in obj.atoms() {
            match &a {
                SemObject::Concrete(v) => out.extend(self.conc(vec![], vna::unit_map(v))),
                _ => {
                    let w = self.fresh(a);
                    self.add(Kind::Unit, vec![], vec![w]);
                    out.push(w);
                }
            }
        }
        out
    }

    /// Re-split wires so their atoms are exactly `target`, inserting identity boxes between
    /// runs of concrete atoms whose products agree.
    fn regroup(&mut self, ws: Vec<W>, target: &[SemObject]) -> Result<Vec<W>, DenotError> {
        let src = self.atoms_of(&ws);
        if src == target {
            return Ok(ws);
        }
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        loop {
            let si = i;
            while i < ws.len() && src[i].is_concrete() {
                i += 1;
            }
            let tj = j;
            while j < target.len() && target[j].is_concrete() {
                j += 1;
            }
            if src[si..i] == target[tj..j] {
                out.extend(&ws[si..i]);
            } else {
                let prod = |xs: &[SemObject]| vna::tensor_all(xs.iter().filter_map(|x| x.concrete()));
                let (sp, tp) = (prod(&src[si..i]), prod(&target[tj..j]));
                if sp != tp {
                    return Err(malformed(format!("cannot regroup {sp} as {tp}")));
                }
                let outs = self.fresh_all(&target[tj..j]);
                self.add(Kind::Conc(Arc::new(VnaMorphism::identity(&sp))), ws[si..i].to_vec(), outs.clone());
                out.extend(outs);
            }
            match (i < ws.len(), j < target.len()) {
                (false, false) => break,
                (true, true) if src[i] == target[j] => {
                    out.push(ws[i]);
                    i += 1;
                    j += 1;
                }
                _ => {
                    return Err(malformed(format!(
                        "cannot regroup {} as {}",
                        SemObject::from_atoms(src.clone()),
                        SemObject::from_atoms(target.to_vec())
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Regroup by factor: returns one wire list per factor.
    fn split(&mut self, ws: Vec<W>, factors: &[SemObject]) -> Result<Vec<Vec<W>>, DenotError> {
        let target: Vec<SemObject> = factors.iter().flat_map(|f| f.atoms()).collect();
        let ws = self.regroup(ws, &target)?;
        let mut it = ws.into_iter();
        Ok(factors.iter().map(|f| it.by_ref().take(f.atoms().len()).collect()).collect())
    }

    fn sub_diagram(&self, e: &MorIR, ins: &[SemObject], outs: &[SemObject]) -> Result<Diagram, DenotError> {
        let mut d = Diagram::default();
        let i = d.fresh_all(ins);
        let o = d.compile(e, i.clone())?;
        d.outputs = d.regroup(o, outs)?;
        d.inputs = i;
        Ok(d)
    }

    fn producer(&self, w: W) -> Option<usize> {
        self.nodes.iter().position(|n| n.as_ref().is_some_and(|n| n.outs.contains(&w)))
    }

    fn compile(&mut self, e: &MorIR, ins: Vec<W>) -> Result<Vec<W>, DenotError> {
        use MorIR as M;
        match e {
            M::Id(_) => Ok(ins),
            M::Conc(f) => Ok(self.conc(ins, (**f).clone())),
            M::Comp(g, f) => {
                let mid = self.compile(f, ins)?;
                self.compile(g, mid)
            }
            M::Tens(f, g) => {
                let parts = self.split(ins, &[f.dom()?, g.dom()?])?;
                let mut it = parts.into_iter();
                let mut out = self.compile(f, it.next().unwrap_or_default())?;
                out.extend(self.compile(g, it.next().unwrap_or_default())?);
                Ok(out)
            }
            M::Lam { body, arg, ctx } => {
                let b_obj = body.dom()?;
                let ins = self.regroup(ins, &[SemObject::hom(arg.clone(), b_obj.clone())])?;
                let mut target = ctx.atoms();
                target.extend(arg.atoms());
                let bd = self.sub_diagram(body, &b_obj.atoms(), &target)?;
                let outs = self.fresh_all(&ctx.atoms());
                self.add(Kind::Lam(bd), ins, outs.clone());
                Ok(outs)
            }
            M::Eps(a, b) => {
                let ins = self.regroup(ins, &b.atoms())?;
                let mut outs = vec![self.fresh(SemObject::hom(a.clone(), b.clone()))];
                outs.extend(self.fresh_all(&a.atoms()));
                self.add(Kind::Eps, ins, outs.clone());
                Ok(outs)
            }
            M::Lmap(h) => self.compile_lmap(h, ins),
            M::Eta(x) => {
                let ws = self.regroup(ins, &x.atoms())?;
                self.eta_atoms(ws)
            }
            M::EtaInv(x) => {
                if !x.is_l_form() {
                    return Err(malformed(format!("eta is not invertible at {x}")));
                }
                Ok(ins)
            }
            M::Mu(_) | M::DL(..) | M::DLInv(..) | M::EL(..) | M::ELInv(..) => {
                let (dom, cod) = e.typ()?;
                if let (Some(_), Some(_)) = (dom.concrete(), cod.concrete()) {
                    Ok(self.conc(ins, super::normalize::eval_concrete(e)?))
                } else if dom == cod {
                    Ok(ins)
                } else {
                    Err(malformed(format!("{e} between distinct objects")))
                }
            }
            M::Nabla(x) => {
                let lx = x.bang();
                let parts = self.split(ins, &[lx.clone(), lx.clone()])?;
                self.nabla_pairs(&parts[0], &parts[1])
            }
            M::Gamma(a, b) => {
                let mut parts = self.split(ins, &[a.clone(), b.clone()])?;
                let second = parts.pop().unwrap_or_default();
                let mut out = second;
                out.extend(parts.pop().unwrap_or_default());
                Ok(out)
            }
            M::Iota { factors, present } => {
                let kept: Vec<SemObject> = factors.iter().zip(present).filter(|(_, p)| **p).map(|(f, _)| f.clone()).collect();
                let mut parts = self.split(ins, &kept)?.into_iter();
                let mut out = Vec::new();
                for (f, p) in factors.iter().zip(present) {
                    if *p {
                        out.extend(parts.next().unwrap_or_default());
                    } else {
                        out.extend(self.units(f));
                    }
                }
                Ok(out)
            }
            M::Merge { target, left, left_to, right, right_to } => {
                let all: Vec<SemObject> = left.iter().chain(right).cloned().collect();
                let parts = self.split(ins, &all)?;
                let mut slots: Vec<Vec<Vec<W>>> = vec![vec![]; target.len()];
                for (ws, &t) in parts.into_iter().zip(left_to.iter().chain(right_to)) {
                    slots[t].push(ws);
                }
                let mut out = Vec::new();
                for s in slots {
                    match s.len() {
                        1 => out.extend(s.into_iter().next().unwrap_or_default()),
                        2 => out.extend(self.nabla_pairs(&s[0], &s[1])?),
                        _ => return Err(malformed("merge coverage")),
                    }
                }
                Ok(out)
            }
            M::Bang(x) => Ok(self.units(x)),
            M::Tuple(f, g) => {
                let dom = f.dom()?;
                let ins = self.regroup(ins, &dom.atoms())?;
                let (cf, cg) = (f.cod()?, g.cod()?);
                let b1 = self.sub_diagram(f, &dom.atoms(), &cf.atoms())?;
                let b2 = self.sub_diagram(g, &dom.atoms(), &cg.atoms())?;
                let outs = self.fresh_all(&SemObject::sum(&cf, &cg).atoms());
                let kind = Kind::Case { branches: Box::new([b1, b2]), gamma: 0, summands: [cf.atoms(), cg.atoms()], stuck: false };
                self.add(kind, ins, outs.clone());
                Ok(outs)
            }
            M::Oplus(..) | M::Proj { .. } | M::Theta(..) | M::ThetaInv(..) => {
                let (dom, cod) = e.typ()?;
                if dom.is_concrete() && cod.is_concrete() {
                    let f = match e {
                        M::Oplus(f, g) => vna::oplus(&to_concrete(f)?, &to_concrete(g)?),
                        _ => super::normalize::eval_concrete(e)?,
                    };
                    return Ok(self.conc(ins, f));
                }
                self.compile_on_sum(e, ins)
            }
        }
    }

    /// Sum-shaped maps applied to a symbolic sum produced by a case box.
    fn compile_on_sum(&mut self, e: &MorIR, ins: Vec<W>) -> Result<Vec<W>, DenotError> {
        use MorIR as M;
        let opaque = |d: &mut Diagram, ins: Vec<W>| -> Result<Vec<W>, DenotError> {
            let outs = d.fresh_all(&e.cod()?.atoms());
            d.add(Kind::Opaque(e.to_string()), ins, outs.clone());
            Ok(outs)
        };
        let dom = e.dom()?;
        let ins = self.regroup(ins, &dom.atoms())?;
        let Some(&sum_wire) = ins.last() else { return opaque(self, ins) };
        let Some(c) = self.producer(sum_wire) else { return opaque(self, ins) };
        let mut node = self.nodes[c].take().expect("live node");
        let Kind::Case { branches, gamma, summands, .. } = &mut node.kind else {
            self.nodes[c] = Some(node);
            return opaque(self, ins);
        };
        if ins.len() != 1 || node.outs.get(*gamma) != Some(&sum_wire) {
            self.nodes[c] = Some(node);
            return opaque(self, ins);
        }
        let g = *gamma;
        let result = match e {
            M::Proj { which, .. } => {
                let fresh = self.fresh_all(&summands[*which]);
                let mut outs = node.outs[..g].to_vec();
                outs.extend(&fresh);
                let br = branches[*which].clone();
                self.inline(&br, &node.ins, &outs);
                return Ok(fresh);
            }
            M::Oplus(f, h) => {
                for (k, m) in [f, h].into_iter().enumerate() {
                    let (md, mc) = m.typ()?;
                    let br = &mut branches[k];
                    let sw = br.outputs[g..].to_vec();
                    let sw = br.regroup(sw, &md.atoms())?;
                    let new = br.compile(m, sw)?;
                    let new = br.regroup(new, &mc.atoms())?;
                    br.outputs.truncate(g);
                    br.outputs.extend(new);
                    summands[k] = mc.atoms();
                }
                let sum = SemObject::sum(&SemObject::from_atoms(summands[0].clone()), &SemObject::from_atoms(summands[1].clone()));
                let fresh = self.fresh_all(&sum.atoms());
                node.outs.truncate(g);
                node.outs.extend(&fresh);
                fresh
            }
            M::Theta(a, b1, b2) => {
                let a_atoms = a.atoms();
                for (k, bk) in [b1, b2].into_iter().enumerate() {
                    let br = &mut branches[k];
                    let sw = br.outputs[g..].to_vec();
                    let mut target = a_atoms.clone();
                    target.extend(bk.atoms());
                    let sw = br.regroup(sw, &target)?;
                    br.outputs.truncate(g);
                    br.outputs.extend(sw);
                    summands[k] = bk.atoms();
                }
                *gamma = g + a_atoms.len();
                let mut fresh = self.fresh_all(&a_atoms);
                fresh.extend(self.fresh_all(&SemObject::sum(b1, b2).atoms()));
                node.outs.truncate(g);
                node.outs.extend(&fresh);
                fresh
            }
            _ => {
                self.nodes[c] = Some(node);
                return opaque(self, ins);
            }
        };
        self.nodes[c] = Some(node);
        Ok(result)
    }

    fn compile_lmap(&mut self, h: &MorIR, ins: Vec<W>) -> Result<Vec<W>, DenotError> {
        use MorIR as M;
        let (x, y) = h.typ()?;
        if x.is_concrete() && y.is_concrete() {
            let f = vna::l_mor(&to_concrete(h)?)?;
            return Ok(self.conc(ins, f));
        }
        let lm = |k: &MorIR| M::Lmap(Box::new(k.clone()));
        match h {
            M::Id(_) => Ok(ins),
            M::Comp(g, f) => self.compile(&M::comp(lm(g), lm(f)), ins),
            M::Tens(f, g) => self.compile(&M::tens(lm(f), lm(g)), ins),
            M::Oplus(f, g) => self.compile(&M::Oplus(Box::new(lm(f)), Box::new(lm(g))), ins),
            M::Lmap(k) => self.compile_lmap(k, ins),
            _ if x.is_l_form() => self.compile(&M::comp(M::Eta(y), h.clone()), ins),
            _ => {
                let ins = self.regroup(ins, &x.bang().atoms())?;
                let outs = self.fresh_all(&y.bang().atoms());
                if let [SemObject::Hom(..)] = x.atoms().as_slice() {
                    let body = self.sub_diagram(h, &x.atoms(), &y.atoms())?;
                    self.add(Kind::Lmap(body), ins, outs.clone());
                } else {
                    self.add(Kind::Opaque(format!("L({h})")), ins, outs.clone());
                }
                Ok(outs)
            }
        }
    }

    fn eta_atoms(&mut self, ws: Vec<W>) -> Result<Vec<W>, DenotError> {
        let mut out = Vec::new();
        for w in ws {
            match self.wires[w].clone() {
                SemObject::Concrete(v) => out.extend(self.conc(vec![w], vna::eta(&v))),
                a @ SemObject::Hom(..) => {
                    let o = self.fresh(a.bang());
                    self.add(Kind::EtaHom, vec![w], vec![o]);
                    out.push(o);
                }
                SemObject::LFormal(_) => out.push(w),
                a => {
                    let o = self.fresh(a.bang());
                    self.add(Kind::Opaque(format!("eta[{a}]")), vec![w], vec![o]);
                    out.push(o);
                }
            }
        }
        Ok(out)
    }

    fn nabla_pairs(&mut self, a: &[W], b: &[W]) -> Result<Vec<W>, DenotError> {
        if a.len() != b.len() {
            return Err(malformed("nabla on unequal factors"));
        }
        let mut out = Vec::new();
        for (&x, &y) in a.iter().zip(b) {
            match self.wires[x].clone() {
                SemObject::Concrete(v) => out.extend(self.conc(vec![x, y], vna::nabla(&v)?)),
                l @ SemObject::LFormal(_) => {
                    let o = self.fresh(l);
                    self.add(Kind::Nabla, vec![x, y], vec![o]);
                    out.push(o);
                }
                other => return Err(malformed(format!("nabla on {other}"))),
            }
        }
        Ok(out)
    }

    /// Replace `from` by `to` wherever it is consumed.
    fn rename(&mut self, from: W, to: W) {
        for n in self.nodes.iter_mut().flatten() {
            for w in n.ins.iter_mut() {
                if *w == from {
                    *w = to;
                }
            }
        }
        for w in self.outputs.iter_mut() {
            if *w == from {
                *w = to;
            }
        }
    }

    /// Copy `sub` in, plugging its inputs into `ins` and its outputs into `outs` (wires of
    /// `self` that currently have no producer).
    fn inline(&mut self, sub: &Diagram, ins: &[W], outs: &[W]) {
        let mut map: HashMap<W, W> = HashMap::new();
        for (&w, &x) in sub.inputs.iter().zip(ins) {
            map.insert(w, x);
        }
        let mut renames = Vec::new();
        for (&w, &x) in sub.outputs.iter().zip(outs) {
            match map.get(&w) {
                Some(&src) => renames.push((x, src)),
                None => {
                    map.insert(w, x);
                }
            }
        }
        for n in sub.nodes.iter().flatten() {
            let mut conv = |ws: &[W], d: &mut Diagram| -> Vec<W> {
                ws.iter()
                    .map(|w| match map.get(w) {
                        Some(&x) => x,
                        None => {
                            let x = d.fresh(sub.wires[*w].clone());
                            map.insert(*w, x);
                            x
                        }
                    })
                    .collect()
            };
            let ins2 = conv(&n.ins, self);
            let outs2 = conv(&n.outs, self);
            self.add(n.kind.clone(), ins2, outs2);
        }
        for (from, to) in renames {
            self.rename(from, to);
        }
    }

    fn consumers(&self) -> HashMap<W, usize> {
        let mut m = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(n) = n {
                for &w in &n.ins {
                    m.insert(w, i);
                }
            }
        }
        m
    }

    fn producers(&self) -> HashMap<W, usize> {
        let mut m = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(n) = n {
                for &w in &n.outs {
                    m.insert(w, i);
                }
            }
        }
        m
    }

    /// Whether `to` is reachable from `from` other than along a direct wire.
    fn indirect_path(&self, from: usize, to: usize, cons: &HashMap<W, usize>) -> bool {
        let node = |i: usize| self.nodes[i].as_ref().expect("live node");
        let mut stack: Vec<usize> = node(from).outs.iter().filter_map(|w| cons.get(w).copied()).filter(|&j| j != to).collect();
        let mut seen = HashSet::new();
        while let Some(i) = stack.pop() {
            if i == to {
                return true;
            }
            if !seen.insert(i) {
                continue;
            }
            stack.extend(node(i).outs.iter().filter_map(|w| cons.get(w).copied()));
        }
        false
    }

    fn rewrite(&mut self, budget: &mut usize) -> Result<(), DenotError> {
        loop {
            tick(budget)?;
            if !self.step(budget)? {
                return Ok(());
            }
        }
    }

    fn kind(&self, i: usize) -> &Kind {
        &self.nodes[i].as_ref().expect("live node").kind
    }

    /// Apply the first applicable rule; false at a fixpoint.
    fn step(&mut self, budget: &mut usize) -> Result<bool, DenotError> {
        let cons = self.consumers();
        let prods = self.producers();
        for i in 0..self.nodes.len() {
            let Some(n) = &self.nodes[i] else { continue };
            let first_consumer = n.outs.first().and_then(|w| cons.get(w).copied());
            match (&n.kind, first_consumer) {
                (Kind::Eps, Some(j)) if matches!(self.kind(j), Kind::Lam(_)) => {
                    self.cut(i, j);
                    return Ok(true);
                }
                (Kind::Unit, Some(j)) if matches!(self.kind(j), Kind::Lam(_) | Kind::Lmap(_) | Kind::EtaHom) => {
                    let x = self.nodes[j].take().expect("live node");
                    self.nodes[i] = None;
                    for w in x.outs {
                        match self.wires[w].clone() {
                            SemObject::Concrete(v) => {
                                self.add(Kind::Conc(Arc::new(vna::unit_map(&v))), vec![], vec![w]);
                            }
                            _ => {
                                self.add(Kind::Unit, vec![], vec![w]);
                            }
                        }
                    }
                    return Ok(true);
                }
                (Kind::Unit, Some(j)) if matches!(self.kind(j), Kind::Nabla) => {
                    let u = n.outs[0];
                    let x = self.nodes[j].take().expect("live node");
                    self.nodes[i] = None;
                    let other = if x.ins[0] == u { x.ins[1] } else { x.ins[0] };
                    self.rename(x.outs[0], other);
                    return Ok(true);
                }
                (Kind::EtaHom, Some(j)) if matches!(self.kind(j), Kind::Lmap(_)) => {
                    self.eta_rule(i, j)?;
                    return Ok(true);
                }
                (Kind::Nabla, Some(j)) if matches!(self.kind(j), Kind::Lmap(_)) => {
                    self.nabla_dup(i, j)?;
                    return Ok(true);
                }
                (Kind::Case { .. }, _) => {
                    // a guard would hold the node borrow across the mutation
                    #[allow(clippy::collapsible_match)]
                    if self.case_step(i, &cons, &prods, budget)? {
                        return Ok(true);
                    }
                }
                _ => {}
            }
        }
        Ok(false)
    }

    fn cut(&mut self, e: usize, l: usize) {
        let en = self.nodes[e].take().expect("live node");
        let ln = self.nodes[l].take().expect("live node");
        let Kind::Lam(body) = ln.kind else { unreachable!("cut against a non-lambda") };
        let mut outs = ln.outs;
        outs.extend(&en.outs[1..]);
        self.inline(&body, &en.ins, &outs);
    }

    /// `L h o eta = eta o h`
    fn eta_rule(&mut self, t: usize, m: usize) -> Result<(), DenotError> {
        let tn = self.nodes[t].take().expect("live node");
        let mn = self.nodes[m].take().expect("live node");
        let Kind::Lmap(body) = mn.kind else { unreachable!("eta rule against a non-L box") };
        let ys = self.fresh_all(&body.atoms_of(&body.outputs));
        self.inline(&body, &tn.ins, &ys);
        let etas = self.eta_atoms(ys)?;
        let target = self.atoms_of(&mn.outs);
        let etas = self.regroup(etas, &target)?;
        for (src, dst) in etas.into_iter().zip(mn.outs) {
            self.rename(dst, src);
        }
        Ok(())
    }

    /// `L h o nabla = nabla o (L h (x) L h)`
    fn nabla_dup(&mut self, n: usize, m: usize) -> Result<(), DenotError> {
        let nn = self.nodes[n].take().expect("live node");
        let mn = self.nodes[m].take().expect("live node");
        let atoms = self.atoms_of(&mn.outs);
        let o1 = self.fresh_all(&atoms);
        let o2 = self.fresh_all(&atoms);
        self.add(mn.kind.clone(), vec![nn.ins[0]], o1.clone());
        self.add(mn.kind, vec![nn.ins[1]], o2.clone());
        for (k, &dst) in mn.outs.iter().enumerate() {
            match self.wires[dst].clone() {
                SemObject::Concrete(v) => {
                    self.add(Kind::Conc(Arc::new(vna::nabla(&v)?)), vec![o1[k], o2[k]], vec![dst]);
                }
                _ => {
                    self.add(Kind::Nabla, vec![o1[k], o2[k]], vec![dst]);
                }
            }
        }
        Ok(())
    }

    fn case_step(
        &mut self,
        c: usize,
        cons: &HashMap<W, usize>,
        prods: &HashMap<W, usize>,
        budget: &mut usize,
    ) -> Result<bool, DenotError> {
        let node = self.nodes[c].as_ref().expect("live node");
        let Kind::Case { gamma, stuck, .. } = &node.kind else { return Ok(false) };
        let gamma = *gamma;
        let symbolic = |w: &W| !self.wires[*w].is_concrete();
        for w in node.ins.iter().filter(|w| symbolic(w)) {
            if let Some(&p) = prods.get(w) {
                if !matches!(self.kind(p), Kind::Opaque(_)) && !self.indirect_path(p, c, cons) {
                    self.absorb_upstream(p, c);
                    return Ok(true);
                }
            }
        }
        for w in node.outs[..gamma].iter().filter(|w| symbolic(w)) {
            if let Some(&x) = cons.get(w) {
                let xn = self.nodes[x].as_ref().expect("live node");
                let takes_sum = xn.ins.iter().any(|v| node.outs[gamma..].contains(v));
                if !takes_sum && !matches!(self.kind(x), Kind::Opaque(_)) && !self.indirect_path(c, x, cons) {
                    self.absorb_downstream(c, x);
                    return Ok(true);
                }
            }
        }
        if *stuck || node.ins.iter().chain(&node.outs).any(symbolic) {
            return Ok(false);
        }
        let mut node = self.nodes[c].take().expect("live node");
        let Kind::Case { branches, summands, stuck, .. } = &mut node.kind else { unreachable!("checked above") };
        let mut maps = Vec::new();
        for br in branches.iter() {
            let mut br = br.clone();
            br.rewrite(budget)?;
            match br.contract() {
                Ok(f) => maps.push(f),
                Err(DenotError::Residual(_)) => {
                    *stuck = true;
                    self.nodes[c] = Some(node);
                    return Ok(false);
                }
                Err(e) => return Err(e),
            }
        }
        let obj = |xs: &[SemObject]| vna::tensor_all(xs.iter().filter_map(|x| x.concrete()));
        let shared = self.atoms_of(&node.outs[..gamma]);
        let (g, s1, s2) = (obj(&shared), obj(&summands[0]), obj(&summands[1]));
        let f = vna::theta(&g, &s1, &s2).after(&vna::tuple(&maps[0], &maps[1])?)?;
        self.nodes[c] = Some(Node { kind: Kind::Conc(Arc::new(f)), ins: node.ins, outs: node.outs });
        Ok(true)
    }

    /// Move box `x`, which feeds case box `c`, into both branches.
    fn absorb_upstream(&mut self, x: usize, c: usize) {
        let xn = self.nodes[x].take().expect("live node");
        let mut cn = self.nodes[c].take().expect("live node");
        let Kind::Case { branches, gamma, stuck, .. } = &mut cn.kind else { unreachable!("case box") };
        let g = *gamma;
        let ext: Vec<W> = xn.outs.iter().copied().filter(|w| !cn.ins.contains(w)).collect();
        let rest: Vec<W> = cn.ins.iter().copied().filter(|w| !xn.outs.contains(w)).collect();
        for br in branches.iter_mut() {
            let mut nb = Diagram::default();
            let xin: Vec<W> = xn.ins.iter().map(|w| nb.fresh(self.wires[*w].clone())).collect();
            let rin: Vec<W> = rest.iter().map(|w| nb.fresh(self.wires[*w].clone())).collect();
            let xout: Vec<W> = xn.outs.iter().map(|w| nb.fresh(self.wires[*w].clone())).collect();
            nb.add(xn.kind.clone(), xin.clone(), xout.clone());
            let bins: Vec<W> = cn
                .ins
                .iter()
                .map(|w| match xn.outs.iter().position(|v| v == w) {
                    Some(k) => xout[k],
                    None => rin[rest.iter().position(|v| v == w).expect("case input")],
                })
                .collect();
            let bouts = nb.fresh_all(&br.atoms_of(&br.outputs));
            nb.inputs = xin.into_iter().chain(rin).collect();
            let ext_inner = ext.iter().map(|w| xout[xn.outs.iter().position(|v| v == w).expect("output")]);
            nb.outputs = bouts[..g].iter().copied().chain(ext_inner).chain(bouts[g..].iter().copied()).collect();
            nb.inline(br, &bins, &bouts);
            *br = nb;
        }
        *gamma = g + ext.len();
        *stuck = false;
        cn.ins = xn.ins.iter().copied().chain(rest).collect();
        cn.outs = cn.outs[..g].iter().copied().chain(ext).chain(cn.outs[g..].iter().copied()).collect();
        self.nodes[c] = Some(cn);
    }

    /// Move box `x`, which consumes shared outputs of case box `c`, into both branches.
    fn absorb_downstream(&mut self, c: usize, x: usize) {
        let xn = self.nodes[x].take().expect("live node");
        let mut cn = self.nodes[c].take().expect("live node");
        let Kind::Case { branches, gamma, stuck, .. } = &mut cn.kind else { unreachable!("case box") };
        let g = *gamma;
        let shared = cn.outs[..g].to_vec();
        let ext: Vec<W> = xn.ins.iter().copied().filter(|w| !shared.contains(w)).collect();
        let keep: Vec<usize> = (0..g).filter(|&k| !xn.ins.contains(&shared[k])).collect();
        for br in branches.iter_mut() {
            let mut nb = Diagram::default();
            let bin: Vec<W> = cn.ins.iter().map(|w| nb.fresh(self.wires[*w].clone())).collect();
            let ein: Vec<W> = ext.iter().map(|w| nb.fresh(self.wires[*w].clone())).collect();
            let bouts = nb.fresh_all(&br.atoms_of(&br.outputs));
            let xins: Vec<W> = xn
                .ins
                .iter()
                .map(|w| match shared.iter().position(|v| v == w) {
                    Some(k) => bouts[k],
                    None => ein[ext.iter().position(|v| v == w).expect("external input")],
                })
                .collect();
            let xout: Vec<W> = xn.outs.iter().map(|w| nb.fresh(self.wires[*w].clone())).collect();
            nb.add(xn.kind.clone(), xins, xout.clone());
            nb.inputs = bin.iter().copied().chain(ein).collect();
            nb.outputs = keep.iter().map(|&k| bouts[k]).chain(xout).chain(bouts[g..].iter().copied()).collect();
            nb.inline(br, &bin, &bouts);
            *br = nb;
        }
        *gamma = keep.len() + xn.outs.len();
        *stuck = false;
        cn.ins = cn.ins.iter().copied().chain(ext).collect();
        cn.outs = keep.iter().map(|&k| shared[k]).chain(xn.outs.iter().copied()).chain(cn.outs[g..].iter().copied()).collect();
        self.nodes[c] = Some(cn);
    }

    /// Contract a diagram of concrete boxes into one matrix.
    fn contract(&self) -> Result<VnaMorphism, DenotError> {
        let mut pending: Vec<usize> = Vec::new();
        let mut stuck = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(n) = n {
                match &n.kind {
                    Kind::Conc(_) => pending.push(i),
                    k => stuck.push(k.name()),
                }
            }
        }
        if !stuck.is_empty() {
            stuck.sort();
            stuck.dedup();
            return Err(DenotError::Residual(format!("symbolic boxes remain: {}", stuck.join(", "))));
        }
        let obj = |w: &W| -> Result<VnaObject, DenotError> {
            self.wires[*w].concrete().cloned().ok_or_else(|| DenotError::Residual(format!("symbolic wire {}", self.wires[*w])))
        };
        let in_objs: Vec<VnaObject> = self.inputs.iter().map(obj).collect::<Result<_, _>>()?;
        let dom = vna::tensor_all(&in_objs);
        let mut frontier: Vec<W> = self.inputs.clone();
        let mut state = CMatrix::identity(dom.dim(), dom.dim());
        let mut available: HashSet<W> = self.inputs.iter().copied().collect();
        while !pending.is_empty() {
            let pos = pending
                .iter()
                .position(|&i| self.nodes[i].as_ref().is_some_and(|n| n.ins.iter().all(|w| available.contains(w))))
                .ok_or_else(|| malformed("diagram has a cycle or a dangling wire"))?;
            let i = pending.remove(pos);
            let n = self.nodes[i].as_ref().expect("live node");
            let Kind::Conc(f) = &n.kind else { unreachable!("only concrete boxes remain") };
            let rest: Vec<W> = frontier.iter().copied().filter(|w| !n.ins.contains(w)).collect();
            let order: Vec<W> = rest.iter().chain(&n.ins).copied().collect();
            let objs = |ws: &[W]| -> Result<Vec<VnaObject>, DenotError> { ws.iter().map(obj).collect() };
            state = reorder(&state, &objs(&frontier)?, &frontier, &order)?;
            let rest_obj = vna::tensor_all(&objs(&rest)?);
            state = apply_last(&state, &rest_obj, f)?;
            for w in &n.ins {
                available.remove(w);
            }
            available.extend(&n.outs);
            frontier = rest.into_iter().chain(n.outs.iter().copied()).collect();
        }
        let fobjs: Vec<VnaObject> = frontier.iter().map(obj).collect::<Result<_, _>>()?;
        let state = reorder(&state, &fobjs, &frontier, &self.outputs)?;
        let out_objs: Vec<VnaObject> = self.outputs.iter().map(obj).collect::<Result<_, _>>()?;
        Ok(VnaMorphism::new(dom, vna::tensor_all(&out_objs), state)?)
    }
}

/// `table[r]` is the tensor index of the elementary tensor whose per-factor vector indices
/// are the mixed-radix digits of `r` (first factor most significant).
fn kron_table(objs: &[VnaObject]) -> Vec<usize> {
    let mut table = vec![0usize];
    let mut acc = VnaObject::scalar();
    for o in objs {
        let d = o.dim();
        let perm = vna::tensor_perm(&acc, o);
        let mut next = vec![0usize; table.len() * d];
        for (r, &t) in table.iter().enumerate() {
            for i in 0..d {
                next[r * d + i] = perm[t * d + i];
            }
        }
        table = next;
        acc = vna::tensor(&acc, o);
    }
    table
}

/// Permute the tensor factors indexing the rows of `m` from order `from` to order `to`.
fn reorder(m: &CMatrix, objs: &[VnaObject], from: &[W], to: &[W]) -> Result<CMatrix, DenotError> {
    if from == to {
        return Ok(m.clone());
    }
    if from.len() != to.len() {
        return Err(malformed("frontier does not match the diagram outputs"));
    }
    let pos: Vec<usize> = to
        .iter()
        .map(|w| from.iter().position(|v| v == w).ok_or_else(|| malformed("frontier does not match the diagram outputs")))
        .collect::<Result<_, _>>()?;
    let new_objs: Vec<VnaObject> = pos.iter().map(|&p| objs[p].clone()).collect();
    let (t_old, t_new) = (kron_table(objs), kron_table(&new_objs));
    let dims: Vec<usize> = objs.iter().map(|o| o.dim()).collect();
    let new_dims: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    let mut digits = vec![0usize; dims.len()];
    for &src in &t_old {
        let mut r_new = 0;
        for (k, &p) in pos.iter().enumerate() {
            r_new = r_new * new_dims[k] + digits[p];
        }
        out.set_row(t_new[r_new], &m.row(src));
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(out)
}

/// Apply `id_rest (x) f` to the rows of `m`, which index `rest (x) dom f`.
fn apply_last(m: &CMatrix, rest: &VnaObject, f: &VnaMorphism) -> Result<CMatrix, DenotError> {
    let (din, dout, dr) = (f.dom().dim(), f.cod().dim(), rest.dim());
    if m.nrows() != dr * din {
        return Err(malformed("frontier dimension mismatch"));
    }
    let p_in = vna::tensor_perm(rest, f.dom());
    let p_out = vna::tensor_perm(rest, f.cod());
    let mut out = CMatrix::zeros(dr * dout, m.ncols());
    let mut v = CMatrix::zeros(din, dr);
    for c in 0..m.ncols() {
        for ir in 0..dr {
            for ib in 0..din {
                v[(ib, ir)] = m[(p_in[ir * din + ib], c)];
            }
        }
        let o = f.matrix() * &v;
        for ir in 0..dr {
            for ob in 0..dout {
                out[(p_out[ir * dout + ob], c)] = o[(ob, ir)];
            }
        }
    }
    Ok(out)
}
