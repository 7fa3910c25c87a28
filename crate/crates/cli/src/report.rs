//! JSON reports for each subcommand. Keys come out sorted and no timings are
//! recorded, so a report is a pure function of its embedded config.

use serde_json::{json, Map, Value};

use qhsing::complete::{
    build_completion_with, verify_admissible, AdmissibleCollection, Provenance,
};
use qhsing::graphs::classify_three_variable;
use qhsing::groebner::milnor_number;
use qhsing::{
    build_f_kappa, iterate_resolution, jacobian_ideal, loop_admissible, nondegen, rat, support,
    verify_psi, ChoiceGraph, Completion, Error, Exponent, OrbifoldAlgebra, Pipeline, Polynomial,
    PowerAssignment, Rational, Resolution, WeightSystem,
};

use crate::config::{Input, JobConfig};

pub struct Report {
    pub body: Map<String, Value>,
    pub dot: Option<String>,
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn monomial(e: &Exponent) -> String {
    Polynomial::monomial(e.clone(), rat(1)).to_string()
}

fn rationals(q: &[Rational]) -> Vec<String> {
    q.iter().map(|r| r.to_string()).collect()
}

fn weights(w: &WeightSystem) -> Value {
    json!({
        "weights": w.weights(),
        "degree": w.degree(),
        "q": rationals(&w.reduced()),
        "milnor_orlik": w.milnor_orlik().to_string(),
    })
}

fn graph(g: &ChoiceGraph) -> Value {
    let comps: Vec<Value> = g
        .components()
        .iter()
        .map(|c| json!({"vertices": one_based(&c.vertices), "cycle": one_based(&c.cycle)}))
        .collect();
    json!({
        "kappa": one_based(g.kappa_values()),
        "components": comps,
        "leaves": one_based(&g.leaves()),
    })
}

fn collection(c: &AdmissibleCollection) -> Value {
    let members: Vec<Value> = c
        .sets
        .iter()
        .zip(&c.provenance)
        .map(|(j, p)| {
            let (from, vertex) = match p {
                Provenance::Loop(m) => ("loop", Some(m + 1)),
                Provenance::Branch(m) => ("branch", Some(m + 1)),
                Provenance::User => ("user", None),
            };
            let mut m = json!({"set": j.to_one_based(), "from": from});
            if let Some(v) = vertex {
                m["vertex"] = json!(v);
            }
            m
        })
        .collect();
    Value::Array(members)
}

fn completion(c: &Completion) -> Value {
    let multipowers: Vec<Value> = c
        .multipowers
        .iter()
        .map(|m| {
            json!({
                "set": m.support.to_one_based(),
                "exponent": (0..m.exponent.arity()).map(|i| m.exponent.get(i)).collect::<Vec<_>>(),
                "monomial": monomial(&m.exponent),
            })
        })
        .collect();
    json!({
        "collection": collection(&c.collection),
        "admissibility": c.admissibility,
        "multipowers": multipowers,
        "epsilon": rationals(&c.epsilon),
        "attempts": c.attempts,
        "seed": c.seed,
        "milnor": c.milnor,
        "f": c.f.to_string(),
        "f_kappa": c.f_kappa.to_string(),
        "f_add": c.f_add().to_string(),
    })
}

fn stage(t: usize, s: &Resolution) -> Value {
    json!({
        "flip": t + 1,
        "f": s.input.f.to_string(),
        "f_bar": s.f_bar.to_string(),
        "f_add": s.f_add().to_string(),
        "weights": weights(&s.weights),
        "graph": graph(&s.graph),
        "powers": s.powers.as_slice(),
        "dot": s.graph.to_dot(),
        "chart2_smooth": s.chart2_smooth,
        "milnor": s.milnor,
        "bookkeeping": s.bookkeeping,
    })
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("reports are objects"),
    }
}

pub fn analyze(cfg: &JobConfig) -> Result<Report, Error> {
    match cfg.input()? {
        Input::Polynomial(f) => {
            let w = WeightSystem::from_polynomial(&f)?;
            let r = support(&f, &w)?;
            Ok(Report {
                body: object(json!({
                    "polynomial": f.to_string(),
                    "weights": weights(&w),
                    "failing_sets": nondegen::report(&r),
                })),
                dot: None,
            })
        }
        Input::Graph(g, a) => {
            let w = qhsing::solve_weights(&g, &a)?;
            let f = build_f_kappa(&g, &a)?;
            let r = support(&f, &w)?;
            let coll = loop_admissible(&g, &r)?;
            let mut body = object(json!({
                "graph": graph(&g),
                "weights": weights(&w),
                "f_kappa": f.to_string(),
                "failing_sets": nondegen::report(&r),
                "loop_collection": {
                    "members": collection(&coll),
                    "admissibility": verify_admissible(&coll, &r),
                },
            }));
            if g.n_vertices() == 3 {
                let t = classify_three_variable(&g, &a)?;
                body.insert(
                    "three_variable".into(),
                    json!({
                        "type": t.label,
                        "relabel": one_based(&t.relabel),
                        "divisibility": t.divisibility,
                    }),
                );
            }
            Ok(Report {
                body,
                dot: Some(g.to_dot()),
            })
        }
    }
}

pub fn complete(cfg: &JobConfig) -> Result<Report, Error> {
    let (g, a) = cfg.graph()?;
    let c = build_completion_with(&g, &a, &cfg.policy(), &cfg.options(g.n_vertices())?)?;
    Ok(Report {
        body: object(json!({
            "graph": graph(&g),
            "weights": weights(&c.weights),
            "completion": completion(&c),
        })),
        dot: Some(g.to_dot()),
    })
}

pub fn milnor(cfg: &JobConfig, basis: bool) -> Result<Report, Error> {
    let f = match cfg.input()? {
        Input::Polynomial(f) => f,
        Input::Graph(g, a) => build_f_kappa(&g, &a)?,
    };
    let mut body = object(json!({
        "polynomial": f.to_string(),
        "milnor": milnor_number(&f)?,
    }));
    if basis {
        let q = jacobian_ideal(&f)?.quotient_basis()?;
        let mons: Vec<String> = q.standard_monomials.iter().map(monomial).collect();
        body.insert(
            "basis".into(),
            json!({"finite": q.finite, "standard_monomials": mons}),
        );
    }
    Ok(Report { body, dot: None })
}

fn pipeline(
    cfg: &JobConfig,
) -> Result<(ChoiceGraph, PowerAssignment, Pipeline, Vec<usize>), Error> {
    let (g, a) = cfg.graph()?;
    let flips = cfg.flips0()?;
    if flips.is_empty() {
        return Err(Error::Config("at least one --flip is required".into()));
    }
    let p = iterate_resolution(&g, &a, &flips, &cfg.policy(), &cfg.options(g.n_vertices())?)?;
    Ok((g, a, p, flips))
}

pub fn resolve(cfg: &JobConfig) -> Result<Report, Error> {
    let (g, _, p, flips) = pipeline(cfg)?;
    let stages: Vec<Value> = flips
        .iter()
        .zip(&p.stages)
        .map(|(&t, s)| stage(t, s))
        .collect();
    let last = p.stages.last().expect("one stage per flip");
    Ok(Report {
        body: object(json!({
            "graph": graph(&g),
            "completion": completion(&p.completion),
            "stages": stages,
        })),
        dot: Some(last.graph.to_dot()),
    })
}

/// The isomorphism check runs on the last stage.
pub fn orbifold_iso(cfg: &JobConfig) -> Result<Report, Error> {
    let (_, _, p, flips) = pipeline(cfg)?;
    let res = p.stages.last().expect("one stage per flip");
    let g = res.input.group.clone();
    let alg = OrbifoldAlgebra::new(&res.input.f, &[g.clone()])?;
    let id = alg.identity();
    let dims: Map<String, Value> = alg
        .invariant_dimensions()
        .into_iter()
        .map(|(h, d)| (h.to_string(), json!(d)))
        .collect();
    let sigma = alg.sigma(&g, &g)?.to_string();
    let rep = verify_psi(&alg, res)?;
    Ok(Report {
        body: object(json!({
            "flip": flips.last().map(|t| t + 1),
            "f": res.input.f.to_string(),
            "f_bar": res.f_bar.to_string(),
            "group": g.to_string(),
            "identity": id.to_string(),
            "sector_dimensions": dims,
            "sigma_gg": sigma,
            "psi": rep,
            "passed": rep.passed(),
        })),
        dot: Some(res.graph.to_dot()),
    })
}
