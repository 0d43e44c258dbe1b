mod common;

use std::sync::Arc;

use common::SubspaceLattice;
use flagval::af::{check_af, AFVerdict};
use flagval::geometry::{
    find_three_point_reduction, image_shape, phi_image, three_point_analysis, verify_proposition, ImageShape, ProjectiveSpace, Proposition,
    Ring, ThreePointInstance, ThreePointReduction, VerifyOptions,
};
use flagval::{Value, ValueSet};

/// Oracle values listed in the library's point order.
fn reorder(space: &ProjectiveSpace, oracle: &SubspaceLattice, lib_values: &[u16]) -> Vec<u16> {
    let mut out = vec![0; lib_values.len()];
    for (i, p) in space.points().iter().enumerate() {
        out[oracle.position_of(p)] = lib_values[i];
    }
    out
}

#[test]
fn z2p_counts_match_oracle() {
    for q in [3u64, 5] {
        let space = ProjectiveSpace::new(q, 2).unwrap();
        let oracle = SubspaceLattice::new(q as i64, 2);
        let n = space.points().len();
        let af = (0u64..1 << n)
            .filter(|mask| {
                let vals: Vec<u16> = (0..n).map(|i| (mask >> i & 1) as u16).collect();
                oracle.is_af(&reorder(&space, &oracle, &vals))
            })
            .count() as u64;
        let report = verify_proposition(Proposition::Z2P, q, &VerifyOptions::default()).unwrap();
        assert_eq!(report.instances, 1 << n);
        assert_eq!(report.hypothesis_satisfied, af, "q = {q}");
        assert!(report.passed(), "{:?}", report.violations);
    }
}

#[test]
fn red2p_hypothesis_count_matches_oracle() {
    let space = ProjectiveSpace::new(3, 3).unwrap();
    let oracle = SubspaceLattice::new(3, 3);
    let lines = oracle.lines();
    assert_eq!(lines.len(), 13);
    let mut line_af = 0;
    for mask in 0u64..1 << 13 {
        let vals: Vec<u16> = (0..13).map(|i| (mask >> i & 1) as u16).collect();
        let vals = reorder(&space, &oracle, &vals);
        if lines.iter().all(|&l| oracle.is_af_on(&vals, l)) {
            line_af += 1;
            assert!(oracle.is_af(&vals), "oracle counterexample {mask}");
        }
    }
    let report = verify_proposition(Proposition::Red2P, 3, &VerifyOptions::default()).unwrap();
    assert_eq!(report.instances, 8192);
    assert_eq!(report.hypothesis_satisfied, line_af);
    assert_eq!(report.conclusion_holds, line_af);
}

#[test]
fn fano_is_the_only_binary_exception_over_f2() {
    let space = ProjectiveSpace::new(2, 3).unwrap();
    let oracle = SubspaceLattice::new(2, 3);
    let lines = oracle.lines();
    let mut exceptions = Vec::new();
    for mask in 0u64..1 << 7 {
        let vals: Vec<u16> = (0..7).map(|i| (mask >> i & 1) as u16).collect();
        let o = reorder(&space, &oracle, &vals);
        let lib = check_af(&space.label_table(&vals).unwrap()).unwrap();
        if lines.iter().all(|&l| oracle.is_af_on(&o, l)) && !oracle.is_af(&o) {
            exceptions.push(mask);
            assert!(matches!(lib, AFVerdict::Exceptional { .. }), "{mask}: {}", lib.label());
        } else {
            assert_eq!(lib.is_certified(), oracle.is_af(&o), "{mask}");
        }
    }
    // Lines over F_2 are always AF, so the exceptions are the non-AF
    // functions: the Fano pattern's orbit, closed under flipping values.
    assert!(!exceptions.is_empty());
    assert!(exceptions.iter().all(|m| exceptions.contains(&(m ^ 0x7f))));
    assert!(verify_proposition(Proposition::Fano, 2, &VerifyOptions::default()).unwrap().passed());
}

#[test]
fn two_coeff_counts_match_oracle() {
    let space = ProjectiveSpace::new(3, 3).unwrap();
    let oracle = SubspaceLattice::new(3, 3);
    let lines = oracle.lines();
    let perm: Vec<usize> = space.points().iter().map(|p| oracle.position_of(p)).collect();
    let (mut hyp, mut ok) = (0u64, 0u64);
    for index in 0..3u64.pow(13) {
        let mut labels = [0u16; 13];
        let mut rest = index;
        for &slot in &perm {
            labels[slot] = (rest % 3) as u16;
            rest /= 3;
        }
        let mixed = lines.iter().any(|&l| {
            let seen: u16 = (0..13).filter(|i| l >> i & 1 == 1).fold(0, |m, i| m | 1 << labels[i]);
            seen == 0b111
        });
        if mixed {
            continue;
        }
        hyp += 1;
        let fs = [1u16, 2, 0].map(|zero_of| labels.map(|l| (l != 0 && l != zero_of) as u16));
        if fs.iter().any(|f| lines.iter().all(|&l| oracle.is_af_on(f, l))) {
            ok += 1;
        }
    }
    let report = verify_proposition(Proposition::TwoCoeff, 3, &VerifyOptions::default()).unwrap();
    assert_eq!(report.instances, 3u64.pow(13));
    assert_eq!(report.hypothesis_satisfied, hyp);
    assert_eq!(report.conclusion_holds, ok);
    assert_eq!(hyp, ok);
}

#[test]
fn three_point_analysis_agrees_with_oracle_on_sample() {
    let space = Arc::new(ProjectiveSpace::new(3, 3).unwrap());
    let oracle = SubspaceLattice::new(3, 3);
    let lines = oracle.lines();
    let mut checked = 0;
    let mut valid = 0;
    for index in 0..3u64.pow(13) {
        let labels: Vec<u8> = (0..13).map(|i| (index / 3u64.pow(i) % 3) as u8).collect();
        let Ok(inst) = ThreePointInstance::from_labels(space.clone(), &labels) else {
            continue;
        };
        valid += 1;
        if valid % 37 != 0 {
            continue;
        }
        let got = three_point_analysis(&inst).unwrap().functions;
        let o = reorder(&space, &oracle, &labels.iter().map(|&l| l as u16).collect::<Vec<_>>());
        let f1: Vec<u16> = o.iter().map(|&l| (l == 1) as u16).collect();
        let f2: Vec<u16> = o.iter().map(|&l| (l == 2) as u16).collect();
        let f3: Vec<u16> = o.iter().map(|&l| (l != 0) as u16).collect();
        let want: Vec<u8> = [f1, f2, f3]
            .iter()
            .enumerate()
            .filter(|(_, f)| lines.iter().all(|&l| oracle.is_af_on(f, l)))
            .map(|(i, _)| i as u8 + 1)
            .collect();
        assert_eq!(got, want, "labels {labels:?}");
        checked += 1;
    }
    assert!(checked > 100);
}

/// Every pair of `Z/3`-valued functions on `P^2(F_3)` whose image obeys the
/// line law, enumerated by depth-first search with pruning on lines.
fn c_pairs_mod3(space: &ProjectiveSpace, mut visit: impl FnMut(&[(u64, u64)])) {
    fn collinear(pts: &[(u64, u64)]) -> bool {
        let mut d: Vec<(u64, u64)> = pts.to_vec();
        d.sort();
        d.dedup();
        if d.len() <= 2 {
            return true;
        }
        let (a, b) = (d[0], d[1]);
        d[2..].iter().all(|c| {
            let det = (b.0 + 3 - a.0) * (c.1 + 3 - a.1) + 9 * 3 - (b.1 + 3 - a.1) * (c.0 + 3 - a.0);
            det % 3 == 0
        })
    }
    fn rec(i: usize, space: &ProjectiveSpace, img: &mut Vec<Option<(u64, u64)>>, visit: &mut dyn FnMut(&[(u64, u64)])) {
        if i == img.len() {
            let full: Vec<(u64, u64)> = img.iter().map(|x| x.unwrap()).collect();
            visit(&full);
            return;
        }
        for v in 0..9 {
            img[i] = Some((v % 3, v / 3));
            let ok = space.lines_through(i).iter().all(|&l| {
                let pts: Vec<(u64, u64)> = space.lines()[l].iter().filter_map(|&p| img[p]).collect();
                collinear(&pts)
            });
            if ok {
                rec(i + 1, space, img, visit);
            }
        }
        img[i] = None;
    }
    let mut img = vec![None; space.points().len()];
    rec(0, space, &mut img, &mut visit);
}

#[test]
fn no_mod3_c_pair_lacks_an_af_span_element() {
    let space = ProjectiveSpace::new(3, 3).unwrap();
    let mut total = 0u64;
    let mut sampled = 0;
    c_pairs_mod3(&space, |img| {
        total += 1;
        if total % 499 != 0 {
            return;
        }
        let f1 = space.table(ValueSet::Residue(3), &img.iter().map(|p| Value::Residue(p.0)).collect::<Vec<_>>()).unwrap();
        let f2 = space.table(ValueSet::Residue(3), &img.iter().map(|p| Value::Residue(p.1)).collect::<Vec<_>>()).unwrap();
        let pm = phi_image(&f1, &f2, Ring::Residue { p: 3 }).unwrap();
        assert!(matches!(image_shape(&pm, true).unwrap(), ImageShape::PointAndLine { .. }));
        let out = find_three_point_reduction(&f1, &f2, Ring::Residue { p: 3 }).unwrap();
        assert!(matches!(out, ThreePointReduction::NoReduction { .. }), "{img:?}");
        sampled += 1;
    });
    assert!(sampled > 1000, "only {total} c-pairs");
}
