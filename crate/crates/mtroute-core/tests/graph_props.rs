mod common;

use common::{build, delay_of, links_of, simple_paths_from, specs};
use mtroute_core::graph::{path_delay, residual, shortest_path, LinkLoadMap, NodeId, Path};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn shortest_path_matches_exhaustive_search((n, links) in specs(6, 3, 0.4), s in 0usize..6, t in 0usize..6) {
        let net = build(n, &links);
        let (s, t) = (NodeId(s % n), NodeId((s % n + 1 + t % (n - 1)) % n));
        // Integer weights make ties exact, so the tie-break is checked too.
        let w_by_id: Vec<f64> = net.links().map(|(_, l)| (l.capacity_mbps - 10.0) % 4.0).collect();

        let best = simple_paths_from(&net, s)
            .into_iter()
            .filter(|seq| seq.last() == Some(&t))
            .map(|seq| {
                let w: f64 = links_of(&net, &seq).iter().map(|l| w_by_id[l.0]).sum();
                (w as u64, seq)
            })
            .min();
        let got = shortest_path(&net, &w_by_id, s, t).unwrap();
        match (best, got) {
            (None, None) => {}
            (Some((w, seq)), Some(p)) => {
                prop_assert_eq!(p.weight(&w_by_id) as u64, w);
                prop_assert_eq!(p.nodes(), &seq[..]);
            }
            (b, g) => prop_assert!(false, "oracle {:?} vs found {:?}", b, g),
        }
    }

    #[test]
    fn delay_is_additive_over_concatenation((n, links) in specs(6, 4, 0.45), pick in any::<prop::sample::Index>(), cut in any::<prop::sample::Index>()) {
        let net = build(n, &links);
        let paths: Vec<_> = simple_paths_from(&net, NodeId(0)).into_iter().filter(|p| p.len() >= 3).collect();
        if paths.is_empty() {
            return Ok(());
        }
        let seq = pick.get(&paths);
        let k = 1 + cut.index(seq.len() - 2);
        let p1 = Path::from_nodes(&net, &seq[..=k]).unwrap();
        let p2 = Path::from_nodes(&net, &seq[k..]).unwrap();
        let whole = p1.concat(&net, &p2).unwrap();
        prop_assert_eq!(whole.delay_ms(), p1.delay_ms() + p2.delay_ms());
        prop_assert_eq!(path_delay(&whole), delay_of(&net, seq));
        prop_assert_eq!(whole.nodes(), &seq[..]);
    }

    #[test]
    fn residual_of_zero_load_is_capacity((n, links) in specs(6, 2, 0.5)) {
        let net = build(n, &links);
        let r = residual(&net, &LinkLoadMap::zeros(&net));
        for (id, l) in net.links() {
            prop_assert_eq!(r[id.0], l.capacity_mbps);
        }
    }
}
