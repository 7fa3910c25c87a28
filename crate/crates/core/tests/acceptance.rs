//! End-to-end checks, one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use qhsing::complete::{
    build_completion_with, select_multipower, solve_multipower, verify_admissible,
    vertex_admissible,
};
use qhsing::groebner::{milnor_number_exact, Restriction};
use qhsing::hochschild::check_laws;
use qhsing::{
    build_bar_f, build_completion, build_f_kappa, build_orbifold_input, failing_sets,
    loop_admissible, milnor_number, predicts_nondegenerate, rat, ratio, solve_weights, support,
    verify_psi, ChoiceGraph, CompletionOptions, EpsilonPolicy, Exponent, IndexSet, Milnor,
    OrbifoldAlgebra, Polynomial, PowerAssignment, Rational, SupportSet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn graph(k: &[usize]) -> ChoiceGraph {
    ChoiceGraph::from_one_based(k).unwrap()
}

fn powers(p: &[u32]) -> PowerAssignment {
    PowerAssignment::new(p.to_vec()).unwrap()
}

fn set(ix: &[usize]) -> IndexSet {
    IndexSet::from_one_based(ix).unwrap()
}

fn pa(s: &str, n: usize) -> Polynomial {
    Polynomial::parse_with_arity(s, n).unwrap()
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    check(e < limit, format!("{what} took {e:?}, limit {limit:?}"))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let g = graph(&[4, 3, 4, 4]);
    let a = powers(&[6, 9, 3, 7]);
    let w = solve_weights(&g, &a).map_err(|e| e.to_string())?;
    let r = support(&build_f_kappa(&g, &a).unwrap(), &w).unwrap();
    let fs = failing_sets(&r);
    within(t, Duration::from_secs(1), "enumeration")?;
    check(fs == vec![set(&[1, 3])], format!("failing sets {fs:?}"))?;
    Ok(format!("failing sets {{1,3}} in {:?}", t.elapsed()))
}

fn criterion_2() -> Outcome {
    let g = graph(&[4, 3, 4, 4]);
    let a = powers(&[6, 9, 3, 7]);
    let w = solve_weights(&g, &a).unwrap();
    check(
        w.weights() == [9, 5, 18, 9] && w.degree() == 63,
        format!("weights {w:?}"),
    )?;
    let t = Instant::now();
    let c = build_completion(&g, &a, &EpsilonPolicy::default()).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(60), "completion")?;
    check(
        c.f_add() == pa("x1^3*x3^2", 4),
        format!("f_add {}", c.f_add()),
    )?;
    let mu = milnor_number_exact(&c.f).unwrap();
    check(
        milnor_number(&c.f).unwrap() == mu,
        "certified and exact disagree",
    )?;
    check(w.milnor_orlik() == rat(1044), "product formula")?;
    check(
        mu == Milnor::Finite(1044) && c.milnor == 1044,
        format!("mu {mu}"),
    )?;
    Ok(format!("mu 1044 in {:?}", t.elapsed()))
}

fn criterion_3() -> Outcome {
    let g = graph(&[2, 3, 1, 5, 1, 1]);
    let a = powers(&[3, 2, 4, 3, 2, 4]);
    let w = solve_weights(&g, &a).unwrap();
    let r = support(&build_f_kappa(&g, &a).unwrap(), &w).unwrap();
    let c = loop_admissible(&g, &r).unwrap();
    let want = vec![set(&[3, 5]), set(&[3, 6]), set(&[5, 6]), set(&[3, 5, 6])];
    check(c.sets == want, format!("collection {:?}", c.sets))?;
    let done = build_completion(&g, &a, &EpsilonPolicy::default()).map_err(|e| e.to_string())?;
    check(done.attempts == 1, "epsilon = 1 not certified")?;
    check(done.milnor == 576, format!("mu {}", done.milnor))?;
    let exact = milnor_number_exact(&done.f).unwrap();
    check(exact == Milnor::Finite(576), format!("exact mu {exact}"))?;
    for (j, e) in [
        (&[3, 5][..], vec![0, 0, 1, 0, 2, 0]),
        (&[3, 6], vec![0, 0, 2, 0, 0, 3]),
        (&[5, 6], vec![0, 0, 0, 0, 2, 1]),
        (&[3, 5, 6], vec![0, 0, 2, 0, 1, 1]),
    ] {
        let sols = solve_multipower(set(j), &w).unwrap();
        let e = Exponent::from(e);
        check(
            sols.iter().any(|m| m.exponent == e),
            format!("{e} not a solution"),
        )?;
    }
    Ok("collection, mu 576, all four monomials found".into())
}

fn three_variable() -> Result<(qhsing::Resolution, OrbifoldAlgebra), String> {
    let (_, inp) = build_orbifold_input(
        &graph(&[1, 1, 1]),
        &powers(&[3, 4, 8]),
        1,
        &EpsilonPolicy::default(),
    )
    .map_err(|e| e.to_string())?;
    let res = build_bar_f(&inp).map_err(|e| e.to_string())?;
    let alg = OrbifoldAlgebra::new(&inp.f, &[inp.group.clone()]).map_err(|e| e.to_string())?;
    Ok((res, alg))
}

fn criterion_4() -> Outcome {
    let (res, _) = three_variable()?;
    let want = pa("x1^3 + x2^2*x1 + x3^8*x1 + x2^2*x3^4 + x4^2*x2", 4);
    check(res.f_bar == want, format!("f_bar {}", res.f_bar))?;
    let q = res.weights.reduced();
    check(
        q == [ratio(1, 3), ratio(1, 3), ratio(1, 12), ratio(1, 3)],
        format!("weights {q:?}"),
    )?;
    let unit = qhsing::groebner::is_unit_ideal(&res.charts.second.gradient()).unwrap();
    check(unit && res.chart2_smooth, "second chart not smooth")?;
    let mu = milnor_number_exact(&res.f_bar).unwrap();
    check(
        mu == Milnor::Finite(88) && res.milnor == 88,
        format!("mu {mu}"),
    )?;
    Ok("f_bar, weights, unit chart ideal, mu 88".into())
}

fn criterion_5() -> Outcome {
    let (res, alg) = three_variable()?;
    let b = res.bookkeeping;
    check(
        (b.total, b.invariant_untwisted, b.twisted) == (88, 66, 22),
        format!("bookkeeping {b:?}"),
    )?;
    let dims = alg.invariant_dimensions();
    check(
        dims[&alg.identity()] == 66 && dims[&res.input.group] == 22,
        format!("sector dimensions {dims:?}"),
    )?;
    let g = res.input.group.clone();
    let id = alg.identity();
    let jac = &alg.sector(&id).unwrap().gb;
    let expect = jac.normal_form(&pa("-2*x2^2*x1 - 2*x2^2*x3^4", 4)).unwrap();
    let sq = alg.sigma(&g, &g).map_err(|e| e.to_string())?;
    check(*sq == expect, format!("sigma_gg {sq}"))?;
    let xi = alg.xi(&g).unwrap();
    let xi2 = alg.product(&xi, &xi).map_err(|e| e.to_string())?;
    check(xi2 == alg.element(&id, &expect).unwrap(), "xi_g squared")?;
    let rep = verify_psi(&alg, &res).map_err(|e| e.to_string())?;
    check(
        rep.generator_square.matches,
        format!("{:?}", rep.generator_square),
    )?;
    check(rep.passed(), format!("psi report {rep:?}"))?;
    Ok(format!(
        "88 = 66 + 22; sigma_gg = {}; x4^2 -> {}",
        rep.generator_square.sigma, rep.generator_square.normal_form_bar
    ))
}

/// A connected loop-with-branches graph on `n` vertices, relabelled.
fn random_instance(rng: &mut ChaCha8Rng) -> (ChoiceGraph, PowerAssignment) {
    let n = rng.gen_range(2..=7);
    let l = rng.gen_range(1..=n);
    let mut kappa = vec![0; n];
    for v in 0..n {
        kappa[v] = if v < l {
            (v + 1) % l
        } else {
            rng.gen_range(0..v)
        };
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut k = vec![0; n];
    let mut a = vec![0; n];
    for v in 0..n {
        k[perm[v]] = perm[kappa[v]];
        a[perm[v]] = rng.gen_range(2..=5);
    }
    (
        ChoiceGraph::new(k).unwrap(),
        PowerAssignment::new(a).unwrap(),
    )
}

fn random_coefficients(r: &SupportSet, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut p = Polynomial::zero(r.arity());
    for e in r.elements() {
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-1000..=1000);
        }
        p.add_term(e.clone(), rat(c));
    }
    p
}

/// Fixed loci of the maximal diagonal symmetry group of `f`, whose terms are
/// `f_kappa` plus `extra`. Phases are `n_i / den` with `den` a common
/// denominator of the group of `f_kappa`.
fn symmetry_fixed_loci(
    g: &ChoiceGraph,
    a: &PowerAssignment,
    extra: &[Exponent],
) -> BTreeSet<IndexSet> {
    let n = g.n_vertices();
    let comps = g.components();
    assert_eq!(comps.len(), 1);
    let cycle = &comps[0].cycle;
    let cyc_den: u64 = if cycle.len() == 1 {
        a.get(cycle[0]) as u64
    } else {
        let prod: u64 = cycle.iter().map(|&c| a.get(c) as u64).product();
        if cycle.len() % 2 == 0 {
            prod - 1
        } else {
            prod + 1
        }
    };
    // branch vertices ordered so parents come first
    let mut order = Vec::new();
    let mut placed: BTreeSet<usize> = cycle.iter().copied().collect();
    while placed.len() < n {
        for v in 0..n {
            if !placed.contains(&v) && placed.contains(&g.kappa(v)) {
                order.push(v);
                placed.insert(v);
            }
        }
    }
    let den: u64 = cyc_den * order.iter().map(|&v| a.get(v) as u64).product::<u64>();
    let mut thetas: Vec<Vec<u64>> = (0..cyc_den)
        .map(|k| {
            let mut th = vec![0u64; n];
            th[cycle[0]] = k * (den / cyc_den);
            for i in 1..cycle.len() {
                let prev = cycle[i - 1];
                th[cycle[i]] = (den - (a.get(prev) as u64 * th[prev]) % den) % den;
            }
            th
        })
        .collect();
    for &v in &order {
        let av = a.get(v) as u64;
        let mut next = Vec::new();
        for th in &thetas {
            let neg = (den - th[g.kappa(v)]) % den;
            assert_eq!(neg % av, 0);
            for k in 0..av {
                let mut t = th.clone();
                t[v] = (neg / av + k * (den / av)) % den;
                next.push(t);
            }
        }
        thetas = next;
    }
    let mut loci = BTreeSet::new();
    for th in thetas {
        let phase = |e: &Exponent| (0..n).map(|i| e.get(i) as u64 * th[i]).sum::<u64>() % den;
        debug_assert!((0..n).all(|j| phase(&qhsing::graphs::kappa_exponent(g, a, j)) == 0));
        if extra.iter().all(|e| phase(e) == 0) {
            loci.insert((0..n).filter(|&i| th[i] == 0).collect());
        }
    }
    loci
}

#[derive(Default)]
struct Tally {
    instances: usize,
    a_pass: usize,
    a_fail: Vec<String>,
    b_checked: usize,
    b_fail: Vec<String>,
    c_checked: usize,
    c_fail: Vec<String>,
    d_certified: usize,
    d_uncertified: BTreeMap<&'static str, usize>,
    d_loci: usize,
    d_fail: Vec<String>,
}

const INSTANCES: usize = 1000;

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut tally = Tally::default();
    while tally.instances < INSTANCES {
        let (g, a) = random_instance(&mut rng);
        let Ok(w) = solve_weights(&g, &a) else {
            continue;
        };
        tally.instances += 1;
        let one_based: Vec<usize> = g.kappa_values().iter().map(|k| k + 1).collect();
        let label = format!("kappa {one_based:?} powers {:?}", a.as_slice());
        let r = support(&build_f_kappa(&g, &a).unwrap(), &w).unwrap();

        // (a)
        let coll = loop_admissible(&g, &r).unwrap();
        let rep = verify_admissible(&coll, &r);
        if rep.admissible {
            tally.a_pass += 1;
        } else {
            tally
                .a_fail
                .push(format!("{label}: uncovered {:?}", rep.uncovered));
        }

        // (b) on f_kappa and on f_kappa plus the multipowers of each
        // collection; (c) on f_kappa itself
        let expected: Rational = w.milnor_orlik();
        let mut nondegenerate = Vec::new();
        if predicts_nondegenerate(&r) {
            nondegenerate.push(r.clone());
        } else {
            tally.c_checked += 1;
            for _ in 0..5 {
                let p = random_coefficients(&r, &mut rng);
                if milnor_number(&p).unwrap().is_finite() {
                    tally.c_fail.push(format!("{label}: {p}"));
                    break;
                }
            }
        }
        for c in [coll, vertex_admissible(&g, &r).unwrap()] {
            let ms: Vec<Exponent> = c
                .sets
                .iter()
                .filter_map(|&j| select_multipower(j, &w, IndexSet::empty()).unwrap())
                .map(|m| m.exponent)
                .collect();
            if !ms.is_empty() {
                let s = r.with(ms).unwrap();
                if predicts_nondegenerate(&s) && !nondegenerate.contains(&s) {
                    nondegenerate.push(s);
                }
            }
        }
        for s in &nondegenerate {
            tally.b_checked += 1;
            let ok = (0..3).any(|_| {
                let p = random_coefficients(s, &mut rng);
                matches!(milnor_number(&p).unwrap(), Milnor::Finite(m) if rat(m as i64) == expected)
            });
            if !ok {
                tally.b_fail.push(label.clone());
            }
        }

        // (d)
        let policy = EpsilonPolicy {
            seed: rng.gen(),
            max_attempts: 8,
        };
        let certified = build_completion(&g, &a, &policy).or_else(|_| {
            let opts = CompletionOptions {
                all_vertices: true,
                ..Default::default()
            };
            build_completion_with(&g, &a, &policy, &opts)
        });
        if let Err(e) = &certified {
            let kind = match e {
                qhsing::Error::NoMultipower(_) => "no multipower",
                qhsing::Error::RetriesExhausted { .. } => "retries exhausted",
                _ => "other",
            };
            *tally.d_uncertified.entry(kind).or_default() += 1;
        }
        if let Ok(c) = certified {
            tally.d_certified += 1;
            let extra: Vec<Exponent> = c.multipowers.iter().map(|m| m.exponent.clone()).collect();
            for fixed in symmetry_fixed_loci(&g, &a, &extra) {
                tally.d_loci += 1;
                let moved = fixed.complement(g.n_vertices()).to_vec();
                let res = Restriction {
                    fixed,
                    poly: c.f.set_zero(&moved),
                };
                if !res.milnor_number(c.weights.weights()).unwrap().is_finite() {
                    tally.d_fail.push(format!("{label}: fixed {fixed}"));
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let summary = format!(
        "{} instances in {elapsed:?}; (a) {}/{} admissible; (b) {} checked, {} failed; \
         (c) {} checked, {} failed; (d) {} certified ({:?} not), {} fixed loci, {} failed",
        tally.instances,
        tally.a_pass,
        tally.instances,
        tally.b_checked,
        tally.b_fail.len(),
        tally.c_checked,
        tally.c_fail.len(),
        tally.d_certified,
        tally.d_uncertified,
        tally.d_loci,
        tally.d_fail.len(),
    );
    let mut problems: Vec<String> = Vec::new();
    problems.extend(tally.a_fail.iter().take(3).map(|s| format!("(a) {s}")));
    problems.extend(tally.b_fail.iter().take(3).map(|s| format!("(b) {s}")));
    problems.extend(tally.c_fail.iter().take(3).map(|s| format!("(c) {s}")));
    problems.extend(tally.d_fail.iter().take(3).map(|s| format!("(d) {s}")));
    if elapsed >= Duration::from_secs(600) {
        problems.push("runtime over 10 min".into());
    }
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}\n    {}", problems.join("\n    ")))
    }
}

fn criterion_7() -> Outcome {
    let (res, alg) = three_variable()?;
    let g = &res.input.group;
    let id = alg.identity();
    let mut span = Vec::new();
    for p in ["1", "x1", "x3", "x2^2", "x2*x4", "x4^2"] {
        span.push(alg.element(&id, &pa(p, 4)).unwrap());
    }
    for p in ["1", "x1", "x3"] {
        span.push(alg.element(g, &pa(p, 4)).unwrap());
    }
    let rep = check_laws(&alg, &span).map_err(|e| e.to_string())?;
    check(rep.passed(), format!("laws: {:?}", rep.counterexamples))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let mut f = Polynomial::zero(n);
        for _ in 0..rng.gen_range(1..=6) {
            let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
            f.add_term(
                Exponent::from(e),
                ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4)),
            );
        }
        let mut sum = Polynomial::zero(2 * n);
        for i in 0..n {
            let gap = &Polynomial::var(2 * n, i) - &Polynomial::var(2 * n, n + i);
            sum = &sum + &(&f.difference_derivative(i).unwrap() * &gap);
        }
        let diff = &f.embed(2 * n, 0).unwrap() - &f.embed(2 * n, n).unwrap();
        check(sum == diff, format!("reconstruction fails on {f}"))?;
    }
    Ok(format!(
        "unit, equivariance, associativity over {} products; 100 reconstructions",
        rep.products_checked
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        (
            "failing sets of the degenerate four-variable example",
            criterion_1,
        ),
        ("four-variable completion and Milnor number", criterion_2),
        ("six-variable loop collection and completion", criterion_3),
        ("resolved polynomial, weights and charts", criterion_4),
        ("sector bookkeeping and generator square", criterion_5),
        ("random loop-with-branches suite", criterion_6),
        (
            "orbifold algebra laws and difference derivatives",
            criterion_7,
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(run) {
            Ok(Ok(msg)) => println!("PASS {}: {name}: {msg}", i + 1),
            Ok(Err(msg)) => {
                failed += 1;
                println!("FAIL {}: {name}: {msg}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {}: {name}: panicked", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 7 criteria failed");
        std::process::exit(1);
    }
    println!("all 7 criteria passed");
}
