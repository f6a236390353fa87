use perclap::isoperimetry::{
    check_cheeger, check_crude_cheeger, cubic_bound_check, estimate_fk_constant, fk_ratio,
    IsoperimetryReport,
};
use perclap::spectral::Ensemble;
use perclap::{clusters, make_cubic_cluster, Cluster, LatticeBox};

fn sampled_clusters(
    dim: usize,
    side: usize,
    p: f64,
    seed: u64,
    realizations: usize,
) -> Vec<Cluster> {
    let ens = Ensemble {
        lattice: LatticeBox::new(dim, side).unwrap(),
        p,
        master_seed: seed,
        realizations,
    };
    (0..realizations)
        .flat_map(|i| clusters(&ens.graph(i).unwrap()))
        .collect()
}

#[test]
fn bounds_hold_on_sampled_clusters() {
    for (dim, side, p) in [(1, 2000, 0.3), (2, 12, 0.3), (3, 8, 0.2)] {
        for c in sampled_clusters(dim, side, p, 40, 10)
            .iter()
            .filter(|c| c.len() >= 2)
        {
            if c.len() <= 18 {
                let check = check_cheeger(c).unwrap();
                assert!(
                    check.holds(),
                    "d={dim} |V|={} margin {}",
                    c.len(),
                    check.margin
                );
            }
            assert!(check_crude_cheeger(c).unwrap().holds());
            let report = IsoperimetryReport::analyse(0, c).unwrap().unwrap();
            assert!(report.certified());
            assert!(report.e1_pseudo_dirichlet <= report.e1_dirichlet + 1e-12);
        }
    }
}

#[test]
fn faber_krahn_estimate_is_positive_and_stable() {
    let small = sampled_clusters(2, 12, 0.3, 50, 100);
    let large = sampled_clusters(2, 12, 0.3, 50, 200);
    let a = estimate_fk_constant(&small).unwrap();
    let b = estimate_fk_constant(&large).unwrap();
    assert!(a > 0.0 && b > 0.0);
    assert!(b <= a);
    for c in small.iter().filter(|c| c.len() >= 2) {
        assert!(fk_ratio(c).unwrap() >= a);
    }
    assert!((a - b).abs() / a < 0.05, "{a} vs {b}");
}

#[test]
fn cubic_family_scaling() {
    let ratio = |l| fk_ratio(&make_cubic_cluster(l, 2).unwrap()).unwrap();
    let (r16, r24) = (ratio(16), ratio(24));
    assert!((r24 - r16).abs() / r16 < 0.1, "{r16} vs {r24}");
    for l in 2..=12 {
        assert!(cubic_bound_check(l, 2).unwrap().holds());
    }
}
