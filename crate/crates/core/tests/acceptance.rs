//! End-to-end acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lgck::cohft::{narrow_sector_data, virdim, CohftData, FrobeniusAlgebra};
use lgck::exactalg::rational::{int, rat};
use lgck::exactalg::{parse_poly, Coeff, Form, Monomial, MultiPoly, Rational};
use lgck::glsm::GlsmModel;
use lgck::matfact::{
    borel_serre_check, chern_char, chern_form, koszul, splitting_degree_check, tensor, unit_class, Factorization,
};
use lgck::orbifold::GroupElement;
use lgck::simplicial::{
    analyze_sheaf, order_complex_cohomology, sheaf_corpus, simplex_ring, stokes_sides, PolyForm,
};
use lgck::statespace::{kunneth_sum, quasi_homogeneous_weights, StateSpace};

type Outcome = Result<String, String>;

fn seed() -> u64 {
    std::env::var("LGCK_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20_240_917)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// LG model with charges from the quasi-homogeneous weights, `J` plus extra generators.
fn lg(name: &str, vars: &[&str], w: &str, extra: &[Vec<Rational>]) -> GlsmModel {
    let ring = MultiPoly::ring(vars);
    let poly = parse_poly(w, &ring).unwrap();
    let q = quasi_homogeneous_weights(&poly).unwrap();
    let d = q.iter().fold(num_bigint::BigInt::one(), |l, x| l.lcm(x.denom()));
    let d_w: u32 = d.clone().try_into().unwrap();
    let charges: Vec<Rational> = q.iter().map(|x| x * Rational::from_integer(d.clone())).collect();
    let mut gens = vec![q.clone()];
    gens.extend(extra.iter().cloned());
    GlsmModel::landau_ginzburg(vars, w, &charges, d_w, gens).unwrap().with_name(name)
}

fn corpus() -> Vec<GlsmModel> {
    let t = |a, b| rat(a, b);
    vec![
        lg("A1", &["x"], "x^2", &[]),
        lg("A2", &["x"], "x^3", &[]),
        lg("A3", &["x"], "x^4", &[]),
        lg("A4", &["x"], "x^5", &[]),
        lg("A5", &["x"], "x^6", &[]),
        lg("D4", &["x", "y"], "x^3+x*y^2", &[]),
        lg("D5", &["x", "y"], "x^4+x*y^2", &[]),
        lg("E6", &["x", "y"], "x^3+y^4", &[]),
        lg("E7", &["x", "y"], "x^3+x*y^3", &[]),
        lg("E8", &["x", "y"], "x^3+y^5", &[]),
        lg("fermat_3_3", &["x", "y"], "x^3+y^3", &[vec![t(1, 3), t(0, 1)]]),
        lg("fermat_4_4", &["x", "y"], "x^4+y^4", &[]),
        lg("fermat_cubic", &["x", "y", "z"], "x^3+y^3+z^3", &[]),
        lg("quadric_4", &["x", "y", "z", "u"], "x^2+y^2+z^2+u^2", &[]),
        lg("loop_2_2", &["x", "y"], "x^2*y+y^2*x", &[]),
        lg("loop_3_3", &["x", "y"], "x^3*y+y^3*x", &[]),
        lg("loop_2_3", &["x", "y"], "x^2*y+y^3*x", &[]),
        lg("chain_2_3", &["x", "y"], "x^2*y+y^3", &[]),
        lg("chain_3_2", &["x", "y"], "x^3*y+y^2", &[]),
        lg("chain_2_4", &["x", "y"], "x^2*y+y^4", &[]),
    ]
}

fn quintic() -> GlsmModel {
    lg("quintic", &["x1", "x2", "x3", "x4", "x5"], "x1^5+x2^5+x3^5+x4^5+x5^5", &[])
}

fn quintic_glsm(r_subgroup: [i64; 2], r: [i64; 6], d_w: u32) -> GlsmModel {
    let cfg = serde_json::json!({
        "variables": ["x1","x2","x3","x4","x5","x6"],
        "torus_weights": [[1,1,1,1,1,-5],[0,0,0,0,0,1]],
        "chi": [0,1],
        "nu": [1,0],
        "characters": {"nu_plus": [1,0], "nu_minus": [-5,1]},
        "r_charges": r,
        "r_subgroup": r_subgroup,
        "d_w": d_w,
        "potential": "x6*(x1^5+x2^5+x3^5+x4^5+x5^5)"
    });
    GlsmModel::from_json(&cfg.to_string()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s = StateSpace::new(&quintic(), 1000).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut dims = s.dims();
    dims.sort();
    ensure(dims == vec![1, 1, 1, 1, 204], format!("dims {dims:?}"))?;
    let broad = s.sectors().iter().find(|x| !x.narrow()).ok_or("no broad sector")?;
    let hist = broad.poly_degree_histogram();
    let want: BTreeMap<String, usize> = [("0", 1), ("5", 101), ("10", 101), ("15", 1)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    ensure(hist == want, format!("profile {hist:?}"))?;
    ensure(elapsed.as_secs_f64() < 10.0, format!("took {elapsed:?}"))?;
    Ok(format!("dims (1,1,1,1,204), profile (1,101,101,1), {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let s = StateSpace::new(&quintic(), 1000).map_err(|e| e.to_string())?;
    let mut narrow: Vec<Rational> = s.sectors().iter().filter(|x| x.narrow()).map(|x| x.degree.clone()).collect();
    narrow.sort();
    ensure(narrow == vec![int(0), int(2), int(4), int(6)], format!("narrow {narrow:?}"))?;
    let broad: Vec<(usize, Rational)> = s.sectors().iter().filter(|x| !x.narrow()).map(|x| (x.dim(), x.degree.clone())).collect();
    ensure(broad == vec![(204, int(3))], format!("broad {broad:?}"))?;
    let hist = s.degree_histogram();
    ensure(hist.get(&int(3)) == Some(&204), "histogram")?;
    Ok("narrow {0,2,4,6}, broad 204-dim in degree 3".into())
}

fn criterion_3() -> Outcome {
    let plus_r = quintic_glsm([0, 1], [0, 0, 0, 0, 0, 1], 1);
    let minus_r = quintic_glsm([1, 5], [1, 1, 1, 1, 1, 0], 5);
    let nu_p = vec![int(1), int(0)];
    let nu_m = vec![int(-5), int(1)];
    let p = minus_r.semistable_locus(&nu_p).map_err(|e| e.to_string())?;
    let m = minus_r.semistable_locus(&nu_m).map_err(|e| e.to_string())?;
    ensure(p.description == "V^ss = complement of {x1=x2=x3=x4=x5=0}", p.description.clone())?;
    ensure(m.description == "V^ss = complement of {x6=0}", m.description.clone())?;
    ensure(p.stable_equals_semistable && m.stable_equals_semistable, "V^ss ≠ V^s")?;
    let pattern = [
        plus_r.check_dagger(&nu_p).unwrap().holds,
        plus_r.check_dagger(&nu_m).unwrap().holds,
        minus_r.check_dagger(&nu_p).unwrap().holds,
        minus_r.check_dagger(&nu_m).unwrap().holds,
    ];
    ensure(pattern == [true, false, false, true], format!("(†) pattern {pattern:?}"))?;
    Ok("ν₊/ν₋ loci and (†) pattern match".into())
}

fn criterion_4() -> Outcome {
    let plus = quintic_glsm([0, 1], [0, 0, 0, 0, 0, 1], 1);
    let minus = quintic_glsm([1, 5], [1, 1, 1, 1, 1, 0], 5);
    for m in [&plus, &minus] {
        ensure(m.q() == int(1), format!("q = {}", m.q()))?;
        ensure(m.c_hat() == int(3), format!("ĉ = {}", m.c_hat()))?;
    }
    ensure(quintic().c_hat() == int(3), "LG ĉ")?;
    Ok("ĉ = 3 under both R-charges".into())
}

fn criterion_5() -> Outcome {
    let mut sectors = 0;
    let mut pairings = 0;
    for m in corpus() {
        let s = StateSpace::new(&m, 1000).map_err(|e| format!("{}: {e}", m.name()))?;
        s.check_nondegenerate().map_err(|e| format!("{}: {e}", m.name()))?;
        let two_c = m.c_hat() * int(2);
        for i in 0..s.sectors().len() {
            sectors += 1;
            let j = s.inverse_index(i);
            let g = s.gram(i);
            let nonzero = (0..g.rows()).any(|a| (0..g.cols()).any(|b| !g[(a, b)].is_zero()));
            if nonzero {
                pairings += 1;
                let total = &s.sectors()[i].degree + &s.sectors()[j].degree;
                ensure(total == two_c, format!("{}: degrees add to {total}", m.name()))?;
            }
            // pairings between non-inverse sectors vanish
            for k in 0..s.sectors().len() {
                if k != j && s.sectors()[i].dim() > 0 && s.sectors()[k].dim() > 0 {
                    let a = s.basis_vector(i, 0);
                    let b = s.basis_vector(k, 0);
                    ensure(s.pairing(&a, &b).unwrap().is_zero(), format!("{}: stray pairing", m.name()))?;
                }
            }
        }
    }
    Ok(format!("20 models, {sectors} sectors nondegenerate, {pairings} pairings in degree 2ĉ"))
}

fn rescale(m: &GlsmModel, d: u32) -> GlsmModel {
    let k = int((d / m.d_w()) as i64);
    let charges: Vec<Rational> = m.r_charges().iter().map(|c| c * &k).collect();
    let vars: Vec<&str> = m.variables().iter().map(String::as_str).collect();
    let gens: Vec<Vec<Rational>> = m.finite_generators().iter().map(|g| g.phases().to_vec()).collect();
    GlsmModel::landau_ginzburg(&vars, &m.potential().to_string(), &charges, d, gens).unwrap().with_name(m.name())
}

fn renamed(m: &GlsmModel, suffix: &str) -> GlsmModel {
    let vars: Vec<String> = m.variables().iter().map(|v| format!("{v}{suffix}")).collect();
    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    let ring = MultiPoly::ring(&refs);
    let w = m.potential().substitute(&(0..vars.len()).map(|i| MultiPoly::var(ring.clone(), i)).collect::<Vec<_>>());
    let gens: Vec<Vec<Rational>> = m.finite_generators().iter().map(|g| g.phases().to_vec()).collect();
    GlsmModel::landau_ginzburg(&refs, &w.to_string(), m.r_charges(), m.d_w(), gens).unwrap().with_name(m.name())
}

fn criterion_6() -> Outcome {
    let c = corpus();
    let small: Vec<&GlsmModel> = c.iter().filter(|m| StateSpace::new(m, 1000).unwrap().total_dim() <= 12).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let mut names = Vec::new();
    for _ in 0..10 {
        let a = small[rng.gen_range(0..small.len())];
        let b = small[rng.gen_range(0..small.len())];
        let d = a.d_w().lcm(&b.d_w());
        let (m1, m2) = (rescale(a, d), renamed(&rescale(b, d), "_2"));
        let w = kunneth_sum(&m1, &m2, 10_000, 64).map_err(|e| format!("{} ⊞ {}: {e}", a.name(), b.name()))?;
        ensure(w.is_isomorphism(), format!("{} ⊞ {} fails", a.name(), b.name()))?;
        for e in &w.entries {
            ensure(e.dim_sum == e.dim1 * e.dim2, format!("{} ⊞ {}: dimension", a.name(), b.name()))?;
        }
        names.push(format!("{}⊞{}", a.name(), b.name()));
    }
    Ok(format!("10 pairs: {}", names.join(", ")))
}

fn random_poly(rng: &mut ChaCha8Rng, ring: &Arc<Vec<String>>, max_deg: u32) -> MultiPoly {
    let mut p = MultiPoly::zero(ring.clone());
    for _ in 0..rng.gen_range(1..4) {
        let e: Vec<u32> = (0..ring.len()).map(|_| rng.gen_range(0..=max_deg)).collect();
        let c = rng.gen_range(-3i64..4);
        p = p.add(&MultiPoly::term(ring.clone(), Monomial(e), Coeff::from_i64(c)));
    }
    p
}

/// `ch` of a rank-1 factorization by the super sign rule `(E⊗α)(F⊗β) = (−1)^{|α||F|} EF ⊗ αβ`.
fn brute_force_rank_one_ch(f: &Factorization) -> Form {
    let m = f.full_matrix();
    let a = Form::from_poly(m[0][1].clone()).d();
    let b = Form::from_poly(m[1][0].clone()).d();
    // (E01⊗a)(E10⊗b) = −E00⊗a∧b ; (E10⊗b)(E01⊗a) = −E11⊗b∧a ; str = (00) − (11)
    let sq = a.wedge(&b).neg().sub(&b.wedge(&a).neg());
    sq.scale(&Coeff::from(rat(1, 2)))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 7);
    let ring = MultiPoly::ring(&["x", "y", "z"]);
    let mut squares = 0;
    let mut split = 0;
    while squares < 200 {
        let r = rng.gen_range(1..=2);
        let tau: Vec<MultiPoly> = (0..r).map(|_| random_poly(&mut rng, &ring, 2)).collect();
        let sigma: Vec<MultiPoly> = (0..r).map(|_| random_poly(&mut rng, &ring, 2)).collect();
        let f = koszul(&tau, &sigma).map_err(|e| e.to_string())?;
        ensure(f.check_square(), "δ² ≠ W on a Koszul factorization")?;
        squares += 1;
        if squares % 10 == 0 {
            ensure(splitting_degree_check(&f).map_err(|e| e.to_string())?, "splitting bound")?;
            split += 1;
        }
        if squares % 4 == 0 {
            let other = MultiPoly::ring(&["u", "v"]);
            let g = koszul(&[random_poly(&mut rng, &other, 2)], &[random_poly(&mut rng, &other, 2)]).map_err(|e| e.to_string())?;
            let t = tensor(&f, &g).map_err(|e| e.to_string())?;
            ensure(t.check_square(), "δ² ≠ W on a tensor product")?;
            squares += 1;
        }
    }
    let (r1, r2) = (MultiPoly::ring(&["x", "y"]), MultiPoly::ring(&["z", "u"]));
    for _ in 0..20 {
        let f1 = koszul(&[random_poly(&mut rng, &r1, 2)], &[random_poly(&mut rng, &r1, 2)]).unwrap();
        let f2 = koszul(&[random_poly(&mut rng, &r2, 2)], &[random_poly(&mut rng, &r2, 2)]).unwrap();
        let t = tensor(&f1, &f2).map_err(|e| e.to_string())?;
        let all = t.vars().clone();
        let embed = |form: &Form, offset: usize| {
            let imgs: Vec<MultiPoly> = (0..2).map(|i| MultiPoly::var(all.clone(), i + offset)).collect();
            form.pullback(&imgs)
        };
        let lhs = chern_form(&t).map_err(|e| e.to_string())?;
        let rhs = embed(&chern_form(&f1).unwrap(), 0).wedge(&embed(&chern_form(&f2).unwrap(), 2));
        ensure(lhs == rhs, "ch is not multiplicative")?;
    }
    for r in 1..=3 {
        ensure(borel_serre_check(r, 6).map_err(|e| e.to_string())?, format!("Borel–Serre r = {r}"))?;
    }
    let xy = MultiPoly::ring(&["x", "y"]);
    let f = koszul(&[MultiPoly::var(xy.clone(), 1)], &[MultiPoly::var(xy.clone(), 0)]).unwrap();
    let ch = chern_char(&f).map_err(|e| e.to_string())?;
    let oracle = brute_force_rank_one_ch(&f);
    ensure(ch.form.as_ref() == Some(&oracle), "golden form differs from the 2×2 oracle")?;
    let c = oracle.top_coefficient().constant_term();
    ensure(ch.jac_class == MultiPoly::constant(xy, c.clone()) && (c == Coeff::from_i64(1) || c == Coeff::from_i64(-1)), "golden class")?;
    Ok(format!("{squares} δ² checks, 20 ch products, Borel–Serre r ≤ 3, {split} splitting bounds, ch{{y,x}} = {c}"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 8);
    for _ in 0..100 {
        let n = rng.gen_range(1..=4usize);
        let ring = simplex_ring(n);
        let mut form = Form::zero(ring.clone());
        for mask in (0..1u64 << n).filter(|m| m.count_ones() as usize == n - 1) {
            let mut p = MultiPoly::zero(ring.clone());
            for _ in 0..3 {
                let mut e = vec![0u32; n];
                for _ in 0..rng.gen_range(0..=4) {
                    e[rng.gen_range(0..n)] += 1;
                }
                p = p.add(&MultiPoly::term(ring.clone(), Monomial(e), Coeff::from_i64(rng.gen_range(-5..6))));
            }
            form.add_component(mask, p);
        }
        let (l, r) = stokes_sides(&PolyForm::new(n, form)).map_err(|e| e.to_string())?;
        ensure(l == r, format!("Stokes fails on Δ^{n}: {l} vs {r}"))?;
    }
    let mut names = Vec::new();
    for (name, f) in sheaf_corpus().into_iter().take(5) {
        let rep = analyze_sheaf(&name, &f, 3).map_err(|e| e.to_string())?;
        ensure(rep.flasque_levels.len() == 4 && rep.flasque_levels.iter().all(|&b| b), format!("{name}: flasque"))?;
        ensure(rep.passed(), format!("{name}: triangle"))?;
        if f.stalk_dims().iter().all(|&d| d == 1) {
            let oracle = order_complex_cohomology(&f, f.whole_space(), 2);
            ensure(rep.global_cohomology == oracle, format!("{name}: {:?} vs {oracle:?}", rep.global_cohomology))?;
        }
        names.push(name);
    }
    Ok(format!("Stokes on 100 random forms; triangle + flasque (N = 3) on {}", names.join(", ")))
}

fn perturbations_detected(d: &CohftData) -> Result<(), String> {
    let one = Coeff::one();
    let mut p = d.clone();
    p.perturb("omega_0_3", &[0, 1, 0], 0, &one);
    ensure(!p.check_metric_axiom().unwrap().passed(), "metric perturbation")?;
    let mut p = d.clone();
    p.perturb("omega_0_3", &[0, 1, 2], 0, &one);
    ensure(!p.check_sr_covariance().unwrap().passed(), "S_r perturbation")?;
    let mut p = d.clone();
    p.perturb("omega_0_4", &[0, 1, 2, 1], 0, &one);
    ensure(!p.check_tree_gluing().unwrap().passed(), "tree perturbation")?;
    let mut p = d.clone();
    p.perturb("omega_1_1", &[0], 0, &one);
    ensure(!p.check_loop_gluing().unwrap().passed(), "loop perturbation")?;
    let mut p = d.clone();
    p.perturb("omega_0_4", &[1, 1, 1, 0], 0, &one);
    ensure(!p.check_forgetting_tails().unwrap().passed(), "tails perturbation")?;
    let mut p = d.clone();
    p.perturb("omega_0_4", &[0, 0, 0, 0], 1, &one);
    ensure(!p.check_selection_rules().unwrap().passed(), "degree perturbation")?;
    Ok(())
}

fn criterion_9() -> Outcome {
    let toy = FrobeniusAlgebra::toy().cohft_data().map_err(|e| e.to_string())?;
    let m = quintic();
    let s = StateSpace::new(&m, 1000).map_err(|e| e.to_string())?;
    let u = unit_class(&m, &[]).map_err(|e| e.to_string())?;
    let narrow = narrow_sector_data(&s, &u.coefficients).map_err(|e| e.to_string())?;
    for (label, d) in [("toy", &toy), ("quintic narrow", &narrow)] {
        for (name, r) in d.check_all() {
            let r = r.map_err(|e| format!("{label}/{name}: {e}"))?;
            ensure(r.passed(), format!("{label}/{name}: {:?}", r.failures().first()))?;
        }
        perturbations_detected(d).map_err(|e| format!("{label}: {e}"))?;
    }
    // (ξ¹, ξ¹, 𝟙) ≠ 0 violates h₁h₂ = 1
    let mut p = narrow.clone();
    p.perturb("omega_0_3", &[0, 0, 0], 0, &Coeff::one());
    let sel = p.check_selection_rules().unwrap();
    ensure(sel.failures().iter().any(|e| e.axiom == "selection_h1h2"), "h₁h₂ = 1 not flagged")?;
    Ok("all six checks pass on both; every single perturbation detected".into())
}

/// Independent evaluation: `∑_i (1 − age_i + q) + (1 − g)(n − 2q − 3) + d`.
fn virdim_oracle(charges: &[Rational], d_w: u32, g: u32, d: &Rational, phases: &[Vec<Rational>]) -> Rational {
    let n = Rational::from_integer(charges.len().into());
    let q: Rational = charges.iter().sum::<Rational>() / Rational::from_integer(d_w.into());
    let mut total = d.clone() + (int(1) - int(g as i64)) * (n - &q * int(2) - int(3));
    for ph in phases {
        let age: Rational = ph.iter().map(|x| x - x.floor()).sum();
        total += int(1) - age + &q;
    }
    total
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 10);
    let mut models = corpus();
    models.push(quintic());
    for _ in 0..20 {
        let m = &models[rng.gen_range(0..models.len())];
        let s = StateSpace::new(m, 1000).map_err(|e| e.to_string())?;
        let g = rng.gen_range(0..4u32);
        let r = rng.gen_range(0..5usize);
        let d = rat(rng.gen_range(-6..7), rng.gen_range(1..4));
        let ins: Vec<GroupElement> = (0..r).map(|_| s.group()[rng.gen_range(0..s.group().len())].clone()).collect();
        let got = virdim(m, g, r as u32, &d, &ins);
        let phases: Vec<Vec<Rational>> = ins.iter().map(|h| h.phases().to_vec()).collect();
        let want = virdim_oracle(m.r_charges(), m.d_w(), g, &d, &phases);
        ensure(got == want, format!("{}: g={g} r={r}: {got} vs {want}", m.name()))?;
    }
    Ok("20 random (g, r, d, sectors) tuples agree".into())
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, f) in criteria {
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match out {
            Ok(detail) => println!("criterion {k:>2}: PASS  {detail}"),
            Err(why) => {
                println!("criterion {k:>2}: FAIL  {why}");
                failed.push(k);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
