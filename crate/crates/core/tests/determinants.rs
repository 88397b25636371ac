use catafind_core::scenarios::{rd_printed_b, Branch};
use catafind_core::{
    linalg, make_reaction_diffusion, parse_vector_field, sym_det, DeterminantSet, Expr, IndexString, Point,
    RdKind, RdReference, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn rd_jacobian_entries() {
    let d = DeterminantSet::new(make_reaction_diffusion());
    let j = d.jacobian();
    let (u, v) = (Expr::var(0), Expr::var(1));
    let p = Expr::param;
    assert_eq!(j[0][0], -p(4));
    assert_eq!(j[0][1], -(p(2) + 3.0 * v.pow(2)));
    assert_eq!(j[1][0], -(p(3) + 3.0 * u.pow(2)));
    assert_eq!(j[1][1], -p(5));
}

#[test]
fn rd_b_levels_match_closed_forms() {
    let d = DeterminantSet::new(make_reaction_diffusion());
    let b = d.canonical_b(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        for (lvl, e) in b.iter().enumerate() {
            let got = e.eval_at(&x, &p).unwrap();
            let want = rd_printed_b(lvl + 1, &x, &p);
            assert!(rel_close(got, want, 1e-10), "B{} {got} vs {want}", lvl + 1);
        }
    }
}

#[test]
fn sym_det_matches_lu_on_random_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let vals: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let m: Vec<Vec<Expr>> = vals.iter().map(|r| r.iter().map(|&v| Expr::constant(v)).collect()).collect();
        let sym = sym_det(&m).as_const().unwrap();
        let lu = linalg::determinant(&linalg::to_matrix(&vals));
        assert!(rel_close(sym, lu, 1e-10), "{sym} vs {lu}");
    }
}

fn butterfly_g(k1: f64, k2: f64, order: &[&str], branch: Branch) -> Vec<(IndexString, f64, f64)> {
    let rd = RdReference::new(k1, k2).unwrap();
    let f = make_reaction_diffusion().fix_params(&[("k1".into(), k1), ("k2".into(), k2)]).unwrap();
    let names: Vec<String> = order.iter().map(|s| s.to_string()).collect();
    let f = f.reorder_params(&names).unwrap();
    let full = rd.point(RdKind::Butterfly { branch }).unwrap();
    let alpha: Vec<f64> = names.iter().map(|n| full.alpha[f_index(n)]).collect();
    let p = Point::new(full.x.clone(), alpha);
    let d = DeterminantSet::new(f);
    IndexString::all(2, 3)
        .into_iter()
        .map(|k| {
            let e = k.entries().to_vec();
            let g = d.eval_g(4, &k, &p).unwrap().value;
            (k, g, rd.butterfly_g(e[0], e[1], e[2]))
        })
        .collect()
}

fn f_index(name: &str) -> usize {
    catafind_core::scenarios::RD_PARAMS.iter().position(|p| *p == name).unwrap()
}

#[test]
fn butterfly_g_matches_closed_form_in_alphabetical_order() {
    for (k1, k2) in [(1.0, 1.0), (1.0, 2.0), (3.0, 0.5)] {
        for branch in [Branch::Plus, Branch::Minus] {
            for (k, got, want) in butterfly_g(k1, k2, &["a", "b", "g", "d"], branch) {
                assert!(rel_close(got, want, 1e-6), "{k1},{k2} {branch:?} K={k}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn butterfly_g_sign_follows_column_order() {
    // (b, d, a, g) is an odd permutation of (a, b, g, d)
    for (k, got, want) in butterfly_g(1.0, 2.0, &["b", "d", "a", "g"], Branch::Plus) {
        assert!(rel_close(got, -want, 1e-6), "K={k}: {got} vs {}", -want);
    }
}

#[test]
fn symbolic_g_agrees_with_lu_g() {
    let f = make_reaction_diffusion().fix_params(&[("k1".into(), 1.0), ("k2".into(), 2.0)]).unwrap();
    let d = DeterminantSet::new(f);
    let p = Point::new(vec![0.3, -0.2], vec![0.1, 0.4, -0.5, 0.7]);
    for r in 1..=2 {
        for k in IndexString::all(2, r - 1) {
            let sym = d.build_g(r, &k).unwrap().evaluate(&p).unwrap();
            let lu = d.eval_g(r, &k, &p).unwrap().value;
            assert!(rel_close(sym, lu, 1e-10), "r={r} K={k}: {sym} vs {lu}");
        }
    }
}

#[test]
fn all_b_vanish_at_butterfly() {
    let tol = Tolerances::default();
    for (k1, k2) in [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0)] {
        let rd = RdReference::new(k1, k2).unwrap();
        let d = DeterminantSet::new(make_reaction_diffusion());
        let p = rd.point(RdKind::Butterfly { branch: Branch::Plus }).unwrap();
        let idx = d.all_b_indices(4);
        assert_eq!(idx.len(), 2usize.pow(4) - 1);
        for (i, k) in idx {
            let v = d.eval_b(i, &k, &p).unwrap();
            assert!(tol.is_zero(&v), "B_{i},{k} = {v:?}");
        }
    }
}

#[test]
fn cusp_set_makes_second_row_choice_vanish_too() {
    let tol = Tolerances::default();
    let rd = RdReference::new(1.0, 1.0).unwrap();
    let d = DeterminantSet::new(make_reaction_diffusion());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let u: f64 = rng.random_range(0.1..1.5);
        let v: f64 = rng.random_range(0.1..1.5);
        let p = rd.point(RdKind::Cusp { u, v }).unwrap();
        for k in [1, 2] {
            let val = d.eval_b(2, &IndexString::new(vec![k], 2).unwrap(), &p).unwrap();
            assert!(tol.is_zero(&val), "B_2,{k} = {val:?} at u={u} v={v}");
        }
    }
}

#[test]
fn fold_point_has_nonzero_g1() {
    let tol = Tolerances::default();
    let rd = RdReference::new(1.0, 1.0).unwrap();
    let full = rd.point(RdKind::Fold { u: 0.2, v: 0.0, gamma: 1.0 }).unwrap();
    let d = DeterminantSet::new(make_reaction_diffusion().fix_params(&[("k1".into(), 1.0), ("k2".into(), 1.0)]).unwrap());
    let p = Point::new(full.x.clone(), full.alpha[..4].to_vec());
    assert!(tol.is_zero(&d.eval_b(1, &IndexString::empty(), &p).unwrap()));
    assert!(tol.is_nonzero(&d.eval_g(1, &IndexString::empty(), &p).unwrap()));
}

#[test]
fn counterexample_levels() {
    let tol = Tolerances::default();
    let f = parse_vector_field("vars: x y\nparams: a1 a2 k\neq: x + y^2\neq: x^2 + a1*x + a2 + y^2 + k*x").unwrap();
    let f = f.fix_params(&[("k".into(), 0.0)]).unwrap();
    let d = DeterminantSet::new(f.clone());
    let origin = Point::new(vec![0.0, 0.0], vec![0.0, 0.0]);
    assert!(tol.is_zero(&d.eval_b(1, &IndexString::empty(), &origin).unwrap()));
    assert!(tol.is_zero(&d.eval_b(2, &IndexString::canonical(1), &origin).unwrap()));
    let b22 = d.eval_b(2, &IndexString::new(vec![2], 2).unwrap(), &origin).unwrap();
    assert!(!tol.is_zero(&b22));
    assert_eq!(b22.value.abs(), 2.0);
    assert_eq!(catafind_core::subrank(&f, &origin, tol.tol_b).unwrap(), 0);
}

#[test]
fn scaling_a_component_keeps_verdicts() {
    let tol = Tolerances::default();
    let rd = RdReference::new(1.0, 2.0).unwrap();
    let base = make_reaction_diffusion().fix_params(&[("k1".into(), 1.0), ("k2".into(), 2.0)]).unwrap();
    let full = rd.point(RdKind::Swallowtail { p: 0.7, branch: Branch::Minus }).unwrap();
    let p = Point::new(full.x.clone(), full.alpha[..4].to_vec());
    let verdicts = |f: catafind_core::VectorField| {
        let d = DeterminantSet::new(f);
        let mut out: Vec<bool> = d.all_b_indices(4).into_iter().map(|(i, k)| tol.is_zero(&d.eval_b(i, &k, &p).unwrap())).collect();
        out.extend(IndexString::all(2, 2).iter().map(|k| tol.is_nonzero(&d.eval_g(3, k, &p).unwrap())));
        out
    };
    let reference = verdicts(base.clone());
    for (j, c) in [(0, 3.0), (1, -2.5), (0, 0.1)] {
        assert_eq!(verdicts(base.scale_component(j, c)), reference, "component {j} x {c}");
    }
}
