use std::cmp::Ordering;

use maxstable_core::functionals::{check_anchoring, exceed_count, first_exceed, first_max, sum_alpha, AnchorResult};
use maxstable_core::lattice::{order_compare, shift_field, window_points};
use maxstable_core::mc::stream;
use maxstable_core::spectral::{sample_theta, sample_y};
use maxstable_core::{FieldSample, FieldTag, LatticeOrder, LatticePoint, ModelSpec, Variogram, Window};

const LEX: LatticeOrder = LatticeOrder::Lexicographic;

fn pt(c: &[i64]) -> LatticePoint {
    LatticePoint::new(c.to_vec())
}

fn line(lo: i64, values: &[f64], tag: FieldTag) -> FieldSample {
    let w = Window::cube(1, lo, lo + values.len() as i64 - 1).unwrap();
    FieldSample::new(w, values.to_vec(), tag).unwrap()
}

#[test]
fn order_examples() {
    assert_eq!(order_compare(LEX, &pt(&[0]), &pt(&[0])).unwrap(), Ordering::Equal);
    assert_eq!(order_compare(LEX, &pt(&[0, 1]), &pt(&[1, 0])).unwrap(), Ordering::Less);
    assert_eq!(
        order_compare(LatticeOrder::ReversedLexicographic, &pt(&[0, 1]), &pt(&[1, 0])).unwrap(),
        Ordering::Greater
    );
    let h = pt(&[5, -3]);
    let (a, b) = (pt(&[-2, 7]), pt(&[1, -4]));
    assert_eq!(order_compare(LEX, &(&a + &h), &(&b + &h)).unwrap(), Ordering::Less);
    assert!(order_compare(LEX, &pt(&[0]), &pt(&[0, 0])).is_err());
}

#[test]
fn window_point_sequences() {
    let one: Vec<LatticePoint> = window_points(&Window::cube(1, 0, 2).unwrap(), LEX);
    assert_eq!(one, vec![pt(&[0]), pt(&[1]), pt(&[2])]);
    let two = window_points(&Window::cube(2, 0, 1).unwrap(), LEX);
    assert_eq!(two, vec![pt(&[0, 0]), pt(&[0, 1]), pt(&[1, 0]), pt(&[1, 1])]);
    assert_eq!(window_points(&Window::cube(3, -1, 2).unwrap(), LEX).len(), 64);
}

#[test]
fn shift_examples() {
    let f = line(0, &[1.0, 2.0], FieldTag::Theta);
    let g = shift_field(&f, &pt(&[1]));
    assert_eq!((g.get(&pt(&[1])), g.get(&pt(&[2])), g.get(&pt(&[0]))), (1.0, 2.0, 0.0));
    assert_eq!(shift_field(&f, &pt(&[0])), f);
    assert_eq!(shift_field(&g, &pt(&[-1])), f);
}

#[test]
fn anchor_examples() {
    let f = line(-1, &[0.2, 1.0, 0.7], FieldTag::Theta);
    assert_eq!(first_max(&f, LEX).result, AnchorResult::At(pt(&[0])));
    let ties = line(-1, &[1.0, 0.0, 0.0, 0.0, 1.0], FieldTag::Theta);
    assert_eq!(first_max(&ties, LEX).result, AnchorResult::At(pt(&[-1])));
    assert_eq!(first_max(&line(-1, &[0.0; 3], FieldTag::Theta), LEX).result, AnchorResult::Infinity);
    assert_eq!(first_exceed(&line(-1, &[0.5, 2.0, 3.0], FieldTag::Y), LEX).result, AnchorResult::At(pt(&[0])));
    assert_eq!(first_exceed(&line(-1, &[1.5, 2.0], FieldTag::Y), LEX).result, AnchorResult::At(pt(&[-1])));
    assert_eq!(first_exceed(&line(-1, &[1.0, 0.3], FieldTag::Y), LEX).result, AnchorResult::Infinity);
}

#[test]
fn path_statistics() {
    let w = Window::centered(1, 10).unwrap();
    let mut rng = stream(1, 0);
    let alt = sample_theta(&ModelSpec::Alternating, &w, &mut rng).unwrap();
    let s = sum_alpha(&alt, 1.0);
    assert_eq!(s.value, 11.0);
    assert!(s.tail_flag);
    let y = sample_y(&ModelSpec::Alternating, &w, 1.0, &mut rng).unwrap();
    let b = exceed_count(&y).unwrap();
    assert_eq!((b.value, b.tail_flag), (11.0, true));
    let seq = ModelSpec::sequence(&[3.0, 1.0], 1.0).unwrap();
    for _ in 0..100 {
        let th = sample_theta(&seq, &w, &mut rng).unwrap();
        let s = sum_alpha(&th, 1.0).value;
        assert!((s - 4.0 / 3.0).abs() < 1e-12 || (s - 4.0).abs() < 1e-12, "{s}");
        let y = sample_y(&ModelSpec::Independent { dim: 1 }, &w, 1.0, &mut rng).unwrap();
        assert_eq!(exceed_count(&y).unwrap().value, 1.0);
    }
    assert!(exceed_count(&alt).is_err());
}

#[test]
fn builtin_maps_are_anchoring() {
    let w = Window::centered(1, 8).unwrap();
    let br = ModelSpec::brown_resnick(Variogram::linear(1.0), 1);
    let mut rng = stream(2, 0);
    let thetas: Vec<FieldSample> = (0..1000).map(|_| sample_theta(&br, &w, &mut rng).unwrap()).collect();
    let ys: Vec<FieldSample> = (0..1000).map(|_| sample_y(&br, &w, 1.0, &mut rng).unwrap()).collect();
    let shifts = [pt(&[-3]), pt(&[1]), pt(&[4])];
    assert!(check_anchoring(|f| first_max(f, LEX).result, &thetas, &shifts).pass);
    assert!(check_anchoring(|f| first_exceed(f, LEX).result, &ys, &shifts).pass);
    let constant = check_anchoring(|_| AnchorResult::At(pt(&[0])), &thetas, &shifts);
    assert!(!constant.pass && constant.shift_violations > 0);
}
