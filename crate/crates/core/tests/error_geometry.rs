//! Score matching errors on the cut family concentrate along the direction
//! that separates the two statistics.

use smlab::expcli::config::SweepParams;
use smlab::expcli::experiments::run_bimodal_cut;
use smlab::expcli::rows::select;
use smlab::expcli::{Method, Metric};

#[test]
fn principal_error_direction_at_a6() {
    let out = run_bimodal_cut(&SweepParams { offsets: vec![6.0], ..Default::default() }).unwrap();
    let angle = select(&out.rows, 6.0, Method::Sm, Metric::ErrorAlignmentDeg);
    assert_eq!(angle.len(), 1);
    assert!(angle[0] <= 15.0, "alignment {} degrees", angle[0]);
    let major50 = select(&out.rows, 6.0, Method::Sm, Metric::Ellipse50Major)[0];
    let major90 = select(&out.rows, 6.0, Method::Sm, Metric::Ellipse90Major)[0];
    let minor50 = select(&out.rows, 6.0, Method::Sm, Metric::Ellipse50Minor)[0];
    // Level-set radii scale as sqrt(-2 ln(1 - p)).
    let expected = ((-2.0 * 0.1f64.ln()) / (-2.0 * 0.5f64.ln())).sqrt();
    assert!((major90 / major50 - expected).abs() < 1e-12);
    assert!(major50 > 100.0 * minor50);
}
