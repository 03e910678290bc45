use ngmac_core::capacity::{
    best_deterministic_rate, classical_capacity_exact, classical_upper_bound, linear_grid,
    pseudo_telepathy_capacity, quantum_lower_bound_chsh, resource_dependent_bound, sweep,
    vertex_bound, BoundKind, OptimizerConfig, SweepResource, WinCeiling,
};
use ngmac_core::correlations::{local_deterministic_boxes, magic_square_box, mpp_box, pr_box};
use ngmac_core::games::{chsh_game, magic_square_game, mpp_game};
use ngmac_core::{noise_f, ChannelType, MacChannel, Resource};

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn published_table_values() {
    let ch = MacChannel::type_ii(&chsh_game(), 1.0).unwrap();
    let exact = classical_capacity_exact(&ch, &cfg()).unwrap();
    assert!((exact.value - 1.44).abs() <= 0.01, "{}", exact.value);
    assert_eq!(exact.kind, BoundKind::Exact);
    let bound = classical_upper_bound(&ch, 0.75, &cfg()).unwrap();
    assert!((bound.value - 1.63).abs() <= 0.01, "{}", bound.value);
    assert!(exact.value <= bound.value + 1e-6);

    let ms = MacChannel::type_ii(&magic_square_game(), 1.0).unwrap();
    let ms_bound = classical_upper_bound(&ms, 8.0 / 9.0, &cfg()).unwrap();
    assert!((ms_bound.value - 2.93).abs() <= 0.01, "{}", ms_bound.value);
    let ms_q = pseudo_telepathy_capacity(&ms, &magic_square_box()).unwrap();
    assert!((ms_q.value - 3.17).abs() <= 0.01);

    let m3 = MacChannel::type_ii(&mpp_game(3).unwrap(), 1.0).unwrap();
    let m3_bound = classical_upper_bound(&m3, 7.0 / 8.0, &cfg()).unwrap();
    assert!((m3_bound.value - 2.72).abs() <= 0.01, "{}", m3_bound.value);
    let m3_q = pseudo_telepathy_capacity(&m3, &mpp_box(3).unwrap()).unwrap();
    assert!((m3_q.value - 3.0).abs() < 1e-12);
}

#[test]
fn type_i_at_zero_is_type_ii_at_one() {
    let g = chsh_game();
    let a = classical_capacity_exact(&MacChannel::type_i(&g, 0.0).unwrap(), &cfg()).unwrap();
    let b = classical_capacity_exact(&MacChannel::type_ii(&g, 1.0).unwrap(), &cfg()).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn chsh_ordering_and_ceiling() {
    let g = chsh_game();
    for eta in [0.1, 0.5, 0.9] {
        for ch in [MacChannel::type_i(&g, eta).unwrap(), MacChannel::type_ii(&g, eta).unwrap()] {
            let exact = classical_capacity_exact(&ch, &cfg()).unwrap();
            let bound = classical_upper_bound(&ch, 0.75, &cfg()).unwrap();
            let q = quantum_lower_bound_chsh(&ch, &cfg()).unwrap();
            let ns = pseudo_telepathy_capacity(&ch, &pr_box()).unwrap();
            for v in [exact.value, bound.value, q.value, ns.value] {
                assert!(v <= ch.rate_ceiling() + 1e-9);
            }
            assert!(exact.value <= bound.value + 1e-6);
            assert!(q.value <= ns.value + 1e-9);
            let (det, _) = best_deterministic_rate(&ch, q.argmax_pi.as_ref().unwrap(), &cfg()).unwrap();
            assert!(q.value >= det - 1e-9, "eta {eta}: {} < {det}", q.value);
        }
    }
}

#[test]
fn quantum_lower_bound_type_i_limit() {
    let ch = MacChannel::type_i(&chsh_game(), 0.0).unwrap();
    assert!(quantum_lower_bound_chsh(&ch, &cfg()).unwrap().value <= 2.0);
    let ms = MacChannel::type_i(&magic_square_game(), 0.0).unwrap();
    assert!(quantum_lower_bound_chsh(&ms, &cfg()).is_err());
}

#[test]
fn classical_bound_equals_top_message_ceiling() {
    let ch = MacChannel::type_ii(&chsh_game(), 0.6).unwrap();
    let a = classical_upper_bound(&ch, 0.75, &cfg()).unwrap();
    let b = resource_dependent_bound(&ch, WinCeiling::TopMessages(3), &cfg()).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.resource, Resource::Local);
}

#[test]
fn local_vertices_stay_below_classical_capacity() {
    let g = chsh_game();
    let ch = MacChannel::type_ii(&g, 0.8).unwrap();
    let boxes: Vec<_> = local_deterministic_boxes(2, 2, 2, 100).unwrap().collect();
    let v = vertex_bound(&ch, &boxes, "L", &cfg()).unwrap();
    let exact = classical_capacity_exact(&ch, &cfg()).unwrap();
    assert!(v.value <= exact.value + 1e-9);
    assert!(v.value > 0.5);

    let mut with_pr = boxes.clone();
    with_pr.push(pr_box());
    let v = vertex_bound(&ch, &with_pr, "NS", &cfg()).unwrap();
    let ns = pseudo_telepathy_capacity(&ch, &pr_box()).unwrap();
    assert!(v.value >= ns.value - 1e-9);
    assert_eq!(v.resource.label(), "NS");
    assert!(vertex_bound(&ch, &[], "empty", &cfg()).is_err());
}

#[test]
fn closed_form_sweeps() {
    let etas = linear_grid(0.0, 1.0, 11).unwrap();
    let rows = sweep(
        &chsh_game(),
        ChannelType::TypeII,
        &etas,
        &[SweepResource::NoSignalingExact],
        &cfg(),
    )
    .unwrap();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let expected = 2.0 - noise_f(4, r.eta_used).unwrap();
        assert!((r.result.value - expected).abs() < 1e-12);
    }
    assert!(rows.windows(2).all(|w| w[0].result.value <= w[1].result.value));

    let rows = sweep(
        &magic_square_game(),
        ChannelType::TypeI,
        &etas,
        &[SweepResource::QuantumExact, SweepResource::LocalBound],
        &cfg(),
    )
    .unwrap();
    for r in rows.iter().filter(|r| r.resource == "Q-exact") {
        assert!((r.result.value - 9f64.log2()).abs() < 1e-12);
    }
}

#[test]
fn mpp_gap_closes_near_noiseless() {
    let g = mpp_game(3).unwrap();
    let ch = MacChannel::type_i(&g, 1.0 - 1e-9).unwrap();
    let b = classical_upper_bound(&ch, 7.0 / 8.0, &cfg()).unwrap();
    assert!((b.value - 3.0).abs() < 1e-6, "{}", b.value);
}

#[test]
fn degenerate_branches_give_unassisted_rate() {
    let g = chsh_game();
    let delta = g.message_count();
    let mut k = vec![0.0; delta * delta];
    for i in 0..delta {
        for j in 0..delta {
            k[i * delta + j] = if i == j { 0.55 } else { 0.15 };
        }
    }
    let ch = MacChannel::two_branch(&g, &k, &k).unwrap();
    let q = quantum_lower_bound_chsh(&ch, &cfg()).unwrap();
    let exact = classical_capacity_exact(&ch, &cfg()).unwrap();
    assert!((q.value - exact.value).abs() < 1e-6, "{} vs {}", q.value, exact.value);
}
