//! Evaluation of Caddy and Extended Caddy down to Core Caddy.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{AffineKind, Binding, Expr, PrimKind};
use crate::scalar::{round_sig, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0:?}")]
    UnboundVariable(String),
    #[error("{context}: expected length {expected}, found {found}")]
    LengthMismatch { context: &'static str, expected: usize, found: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{context}: expected {expected}, found {found}")]
    TypeMismatch { context: &'static str, expected: &'static str, found: &'static str },
}

#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    Vec(Vec<f64>),
    Cad(Expr),
    List(Vec<Value>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Num(_) => "a number",
            Value::Vec(_) => "a vector",
            Value::Cad(_) => "a solid",
            Value::List(_) => "a list",
        }
    }

    fn into_expr(self) -> Expr {
        match self {
            Value::Num(v) => Expr::Num(v),
            Value::Vec(v) if v.len() == 2 => Expr::v2(v[0], v[1]),
            Value::Vec(v) => Expr::v3(v[0], v[1], v[2]),
            Value::Cad(e) => e,
            Value::List(items) => Expr::List(items.into_iter().map(Value::into_expr).collect()),
        }
    }
}

fn mismatch(context: &'static str, expected: &'static str, found: &Value) -> EvalError {
    EvalError::TypeMismatch { context, expected, found: found.kind() }
}

fn expect_len(context: &'static str, expected: usize, found: usize) -> Result<(), EvalError> {
    if expected == found {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch { context, expected, found })
    }
}

fn spherical_point(context: &'static str, v: Value) -> Result<[f64; 3], EvalError> {
    match v {
        Value::Vec(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        other => Err(mismatch(context, "a 3-vector", &other)),
    }
}

/// Cartesian coordinates of the spherical triple `[r, azimuth, inclination]`
/// (degrees; azimuth from +x in the xy-plane, inclination from +z).
pub fn to_cartesian([r, phi, theta]: [f64; 3]) -> [f64; 3] {
    let (sp, cp) = phi.sin_cos_degrees().expect("f64 has trigonometry");
    let (st, ct) = theta.sin_cos_degrees().expect("f64 has trigonometry");
    [round_sig(r * st * cp), round_sig(r * st * sp), round_sig(r * ct)]
}

/// Inverse of [`to_cartesian`]; the angles of the origin are defined as zero
/// and the azimuth is normalised to `[0, 360)`.
pub fn to_spherical([x, y, z]: [f64; 3]) -> [f64; 3] {
    let r = (x * x + y * y + z * z).sqrt();
    if r == 0.0 {
        return [0.0; 3];
    }
    let theta = round_sig((z / r).clamp(-1.0, 1.0).acos().to_degrees());
    let mut phi = round_sig(y.atan2(x).to_degrees());
    if phi < 0.0 {
        phi = round_sig(phi + 360.0);
    }
    if phi >= 360.0 {
        phi = 0.0;
    }
    [round_sig(r), phi, theta]
}

struct Evaluator {
    env: Vec<(String, f64)>,
}

impl Evaluator {
    fn lookup(&self, name: &str) -> Result<f64, EvalError> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
    }

    fn num(&mut self, context: &'static str, e: &Expr) -> Result<f64, EvalError> {
        match self.eval(e)? {
            Value::Num(v) => Ok(v),
            other => Err(mismatch(context, "a number", &other)),
        }
    }

    fn vector(&mut self, context: &'static str, e: &Expr, len: usize) -> Result<Vec<f64>, EvalError> {
        match self.eval(e)? {
            Value::Vec(v) if v.len() == len => Ok(v),
            other => Err(mismatch(context, if len == 2 { "a 2-vector" } else { "a 3-vector" }, &other)),
        }
    }

    fn cad(&mut self, context: &'static str, e: &Expr) -> Result<Expr, EvalError> {
        match self.eval(e)? {
            Value::Cad(c) => Ok(c),
            other => Err(mismatch(context, "a solid", &other)),
        }
    }

    fn list(&mut self, context: &'static str, e: &Expr) -> Result<Vec<Value>, EvalError> {
        match self.eval(e)? {
            Value::List(items) => Ok(items),
            other => Err(mismatch(context, "a list", &other)),
        }
    }

    fn affine(kind: AffineKind, params: Vec<f64>, child: Expr) -> Expr {
        let (kind, params) = match kind {
            AffineKind::TranslateSpherical => {
                (AffineKind::Translate, to_cartesian([params[0], params[1], params[2]]).to_vec())
            }
            k => (k, params),
        };
        Expr::affine(kind, Expr::v3(params[0], params[1], params[2]), child)
    }

    fn tabulate(&mut self, bindings: &[Binding], body: &Expr, out: &mut Vec<Value>) -> Result<(), EvalError> {
        let Some((first, rest)) = bindings.split_first() else {
            out.push(self.eval(body)?);
            return Ok(());
        };
        for i in 0..first.bound {
            self.env.push((first.var.clone(), i as f64));
            let r = self.tabulate(rest, body, out);
            self.env.pop();
            r?;
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        Ok(match e {
            Expr::Num(v) => Value::Num(*v),
            Expr::Var(name) => Value::Num(self.lookup(name)?),
            Expr::Arith(op, a, b) => {
                let a = self.num("arithmetic", a)?;
                let b = self.num("arithmetic", b)?;
                Value::Num(op.apply(a, b).ok_or(EvalError::DivisionByZero)?)
            }
            Expr::Vec2(v) => Value::Vec(vec![self.num("vector", &v[0])?, self.num("vector", &v[1])?]),
            Expr::Vec3(v) => {
                Value::Vec(vec![self.num("vector", &v[0])?, self.num("vector", &v[1])?, self.num("vector", &v[2])?])
            }
            Expr::Prim(k, p) => {
                let param = match k {
                    PrimKind::Sphere => Expr::Num(self.num("Sphere", p)?),
                    PrimKind::Cuboid => Value::Vec(self.vector("Cuboid", p, 3)?).into_expr(),
                    PrimKind::Cylinder | PrimKind::HexPrism => Value::Vec(self.vector(k.name(), p, 2)?).into_expr(),
                };
                Value::Cad(Expr::prim(*k, param))
            }
            Expr::Affine(k, p, c) => {
                let params = self.vector("affine parameters", p, 3)?;
                let child = self.cad("affine child", c)?;
                Value::Cad(Self::affine(*k, params, child))
            }
            Expr::Binop(k, a, b) => {
                let a = self.cad("set operand", a)?;
                let b = self.cad("set operand", b)?;
                Value::Cad(Expr::binop(*k, a, b))
            }
            Expr::Fold(k, l) => {
                let items = self.list("Fold", l)?;
                let mut cads = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Cad(c) => cads.push(c),
                        other => return Err(mismatch("Fold element", "a solid", &other)),
                    }
                }
                let n = cads.len();
                Value::Cad(Expr::chain(*k, cads).ok_or(EvalError::LengthMismatch {
                    context: "Fold",
                    expected: 1,
                    found: n,
                })?)
            }
            Expr::List(xs) => Value::List(xs.iter().map(|x| self.eval(x)).collect::<Result<_, _>>()?),
            Expr::Concat(ls) => {
                let mut out = Vec::new();
                for l in ls {
                    out.extend(self.list("Concat", l)?);
                }
                Value::List(out)
            }
            Expr::Tabulate(bindings, body) => {
                let mut out = Vec::new();
                self.tabulate(bindings, body, &mut out)?;
                Value::List(out)
            }
            Expr::Map2(k, ps, cs) => {
                let ps = self.list("Map2 parameters", ps)?;
                let cs = self.list("Map2 solids", cs)?;
                expect_len("Map2", ps.len(), cs.len())?;
                let mut out = Vec::with_capacity(ps.len());
                for (p, c) in ps.into_iter().zip(cs) {
                    let p = match p {
                        Value::Vec(v) if v.len() == 3 => v,
                        other => return Err(mismatch("Map2 parameter", "a 3-vector", &other)),
                    };
                    let c = match c {
                        Value::Cad(c) => c,
                        other => return Err(mismatch("Map2 solid", "a solid", &other)),
                    };
                    out.push(Value::Cad(Self::affine(*k, p, c)));
                }
                Value::List(out)
            }
            Expr::Repeat(n, x) => {
                let v = self.eval(x)?;
                Value::List(vec![v; *n as usize])
            }
            Expr::Sort(p, l) | Expr::Unsort(p, l) => {
                let items = self.list("Sort", l)?;
                expect_len("permutation", p.len(), items.len())?;
                Value::List(if matches!(e, Expr::Sort(..)) { p.gather(&items) } else { p.scatter(&items) })
            }
            Expr::Part(p, l) => {
                let items = self.list("Part", l)?;
                let parts = p.split(&items).ok_or(EvalError::LengthMismatch {
                    context: "partitioning",
                    expected: p.total(),
                    found: items.len(),
                })?;
                Value::List(parts.into_iter().map(Value::List).collect())
            }
            Expr::Unpart(p, ls) => {
                expect_len("Unpart sublists", p.lengths().len(), ls.len())?;
                let mut out = Vec::new();
                for (l, &len) in ls.iter().zip(p.lengths()) {
                    let items = self.list("Unpart", l)?;
                    expect_len("Unpart sublist", len, items.len())?;
                    out.extend(items);
                }
                Value::List(out)
            }
            Expr::Spherical(n, c, l) | Expr::Unspherical(n, c, l) => {
                let center = spherical_point("center", Value::Vec(self.vector("center", c, 3)?))?;
                let items = self.list("spherical list", l)?;
                expect_len("spherical list", *n as usize, items.len())?;
                let forward = matches!(e, Expr::Spherical(..));
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    let v = spherical_point("spherical element", item)?;
                    let w = if forward {
                        to_spherical(std::array::from_fn(|k| v[k] - center[k]))
                    } else {
                        let q = to_cartesian(v);
                        std::array::from_fn(|k| round_sig(q[k] + center[k]))
                    };
                    out.push(Value::Vec(w.to_vec()));
                }
                Value::List(out)
            }
        })
    }
}

/// Reduces a closed expression to Core Caddy, or to a `List` of Core Caddy
/// values when the expression denotes a list.
pub fn eval_to_core(e: &Expr) -> Result<Expr, EvalError> {
    Evaluator { env: Vec::new() }.eval(e).map(Value::into_expr)
}

fn collect_free(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match e {
        Expr::Var(name) => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        Expr::Tabulate(bindings, body) => {
            let depth = bound.len();
            bound.extend(bindings.iter().map(|b| b.var.clone()));
            collect_free(body, bound, out);
            bound.truncate(depth);
        }
        _ => e.children().into_iter().for_each(|c| collect_free(c, bound, out)),
    }
}

pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

/// Replaces free occurrences of `var` with the literal `value`.
pub fn substitute(e: &Expr, var: &str, value: i64) -> Expr {
    match e {
        Expr::Var(name) if name == var => Expr::Num(value as f64),
        Expr::Tabulate(bindings, _) if bindings.iter().any(|b| b.var == var) => e.clone(),
        _ => {
            let (op, children) = e.to_op();
            if children.is_empty() {
                return e.clone();
            }
            Expr::from_op(op, children.into_iter().map(|c| substitute(c, var, value)).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn core(s: &str) -> Expr {
        eval_to_core(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn nested_tabulate_varies_last_binding_fastest() {
        let got = core("(Tabulate (i 2) (j 3) (Cuboid [2*i+2, 7, j+1]))");
        let want = parse(
            "(List (Cuboid [2,7,1]) (Cuboid [2,7,2]) (Cuboid [2,7,3]) (Cuboid [4,7,1]) (Cuboid [4,7,2]) (Cuboid [4,7,3]))",
        )
        .unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn map2_zips_parameters_onto_solids() {
        let got = core("(Map2 Scale (List [2,2,2] [3,3,3]) (Repeat 2 (Sphere 1)))");
        assert_eq!(got, parse("(List (Scale [2,2,2] (Sphere 1)) (Scale [3,3,3] (Sphere 1)))").unwrap());
    }

    #[test]
    fn unsort_inverts_sort() {
        let p = "(1 5 0 3 4 2)";
        let l = "(List (Sphere 1) (Sphere 2) (Sphere 3) (Sphere 4) (Sphere 5) (Sphere 6))";
        assert_eq!(core(&format!("(Unsort {p} (Sort {p} {l}))")), core(l));
        assert_eq!(core(&format!("(Sort {p} {l})")), core("(List (Sphere 2) (Sphere 6) (Sphere 1) (Sphere 4) (Sphere 5) (Sphere 3))"));
    }

    #[test]
    fn unpart_checks_sublist_lengths() {
        assert_eq!(
            core("(Unpart (1 2) (List (Sphere 1)) (Repeat 2 (Sphere 2)))"),
            core("(List (Sphere 1) (Sphere 2) (Sphere 2))")
        );
        let err = eval_to_core(&parse("(Unpart (2 1) (List (Sphere 1)) (Repeat 2 (Sphere 2)))").unwrap()).unwrap_err();
        assert!(matches!(err, EvalError::LengthMismatch { .. }));
    }

    #[test]
    fn errors() {
        let e = |s: &str| eval_to_core(&parse(s).unwrap()).unwrap_err();
        assert_eq!(e("(Sphere i)"), EvalError::UnboundVariable("i".into()));
        assert_eq!(e("(Sphere 1/0)"), EvalError::DivisionByZero);
        assert!(matches!(e("(Map2 Translate (List [1,1,1]) (Repeat 2 (Sphere 1)))"), EvalError::LengthMismatch { .. }));
        assert!(matches!(e("(Union (Sphere 1) [1, 2, 3])"), EvalError::TypeMismatch { .. }));
    }

    #[test]
    fn translate_spherical_becomes_cartesian() {
        let got = core("(TranslateSpherical [2, 90, 90] (Sphere 1))");
        assert_eq!(got, parse("(Translate [0, 2, 0] (Sphere 1))").unwrap());
    }

    #[test]
    fn spherical_round_trip() {
        for v in [[1.0, 2.0, 3.0], [-1.0, -0.5, 0.25], [0.0, 0.0, -4.0], [0.0, 0.0, 0.0]] {
            let back = to_cartesian(to_spherical(v));
            for k in 0..3 {
                assert!((back[k] - v[k]).abs() < 1e-9, "{v:?} -> {back:?}");
            }
        }
        assert_eq!(to_spherical([0.0, -2.0, 0.0]), [2.0, 270.0, 90.0]);
    }

    #[test]
    fn free_variables_and_substitution() {
        let e = parse("(Rotate [0, 0, 60*i] (Cuboid [10, 1, 1]))").unwrap();
        assert_eq!(free_vars(&e), BTreeSet::from(["i".to_string()]));
        let t = parse("(Tabulate (i 3) (Sphere i))").unwrap();
        assert!(free_vars(&t).is_empty());
        assert_eq!(substitute(&t, "i", 9), t);
        let c = parse("(Cuboid [2*i+2, 7, j+1])").unwrap();
        assert_eq!(substitute(&c, "i", 1), parse("(Cuboid [2*1+2, 7, j+1])").unwrap());
    }
}
