use pnedelec::derham::{verify_local_sequence, verify_zero_trace_sequence, RowReport, SequenceReport};
use pnedelec::localspace::{dim_p, dim_w1, dim_w2};
use pnedelec::polycore::Simplex;
use pnedelec::suite::random_tet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn row<'a>(r: &'a SequenceReport, name: &str) -> &'a RowReport {
    r.rows.iter().find(|x| x.name == name).unwrap()
}

#[test]
fn cell_row_ranks() {
    let t = Simplex::reference(3);
    for p in 0..4 {
        let r = verify_local_sequence(&t, p).unwrap();
        let c = row(&r, "cell");
        let pi = p as i32;
        assert_eq!(c.dims, vec![dim_p(3, pi + 1), dim_w1(pi), dim_w2(pi), dim_p(3, pi)]);
        assert_eq!(c.ranks[0], dim_p(3, pi + 1) - 1);
        assert_eq!(c.kernel_dims[1], dim_p(3, pi + 1) - 1);
        assert_eq!(c.ranks[2], dim_p(3, pi));
        assert_eq!(c.alternating_sum, 0);
        assert!(c.passed());
    }
}

#[test]
fn lowest_order_alternating_sum() {
    let r = verify_local_sequence(&Simplex::reference(3), 0).unwrap();
    assert_eq!(row(&r, "cell").dims, vec![4, 6, 4, 1]);
    assert_eq!(1 - 4 + 6 - 4 + 1, 0);
}

#[test]
fn edge_and_face_rows() {
    let t = Simplex::reference(3);
    let r = verify_local_sequence(&t, 1).unwrap();
    assert!(row(&r, "face").exact.iter().all(|&b| b));
    for p in 0..4 {
        let z = verify_zero_trace_sequence(&t, p).unwrap();
        let e = row(&z, "edge0");
        // d/dxi maps the edge bubbles of degree p + 1 onto the zero-mean P_p
        assert_eq!(e.dims, vec![p, p]);
        assert_eq!(e.ranks, vec![p]);
    }
}

#[test]
fn full_and_zero_trace_sequences_on_random_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tets = [Simplex::reference(3), random_tet(&mut rng)];
    for t in &tets {
        for p in 0..4 {
            let r = verify_local_sequence(t, p).unwrap();
            assert!(r.passed, "p={p}: {:?}", r.failures());
            let z = verify_zero_trace_sequence(t, p).unwrap();
            assert!(z.passed, "p={p}: {:?}", z.failures());
        }
    }
}
