//! Array-formula fixtures: broadcasting layouts, matrix-product splicing
//! restrictions, and elementwise function application over regions.

use gridbp::{CellAddr, ErrorCode, Scalar, Workbook};

fn num(wb: &Workbook, sheet: usize, a: &str) -> f64 {
    match wb.get(sheet, CellAddr::parse(a).unwrap()) {
        Scalar::Number(v) => *v,
        other => panic!("expected number at {a}, got {other:?}"),
    }
}

fn grid(wb: &Workbook, sheet: usize, cells: &[&str]) -> Vec<f64> {
    cells.iter().map(|a| num(wb, sheet, a)).collect()
}

#[test]
fn row_times_column_is_the_outer_product() {
    let wb = Workbook::load_script(
        "SET s!A1 1\nSET s!B1 2\nSET s!C1 3\n\
         SET s!E1 4\nSET s!E2 5\n\
         ARRAY s!G1:I2 =A1:C1*E1:E2\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    assert_eq!(
        grid(&wb, s, &["G1", "H1", "I1", "G2", "H2", "I2"]),
        vec![4.0, 8.0, 12.0, 5.0, 10.0, 15.0]
    );
}

/// One matrix product spliced into three region sizes: the full 3x1
/// result, a 2x1 restriction, and a single-cell restriction.
#[test]
fn matrix_product_restrictions() {
    let wb = Workbook::load_script(
        "SET s!A4 1\nSET s!B4 2\nSET s!C4 3\n\
         SET s!A5 4\nSET s!B5 5\nSET s!C5 6\n\
         SET s!A6 0\nSET s!B6 1\nSET s!C6 1\n\
         SET s!E4 3\nSET s!E5 5\nSET s!E6 1\n\
         ARRAY s!G4:G6 =MMULT(A4:C6,E4:E6)\n\
         ARRAY s!I4:I5 =MMULT(A4:C6,E4:E6)\n\
         ARRAY s!K4 =MMULT(A4:C6,E4:E6)\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    assert_eq!(grid(&wb, s, &["G4", "G5", "G6"]), vec![16.0, 43.0, 6.0]);
    assert_eq!(grid(&wb, s, &["I4", "I5"]), vec![16.0, 43.0]);
    assert_eq!(num(&wb, s, "K4"), 16.0);
}

#[test]
fn region_larger_than_result_pads_with_na() {
    let wb = Workbook::load_script(
        "SET s!A1 1\nSET s!A2 2\nSET s!A3 3\n\
         ARRAY s!C1:C4 =A1:A3*2\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    assert_eq!(grid(&wb, s, &["C1", "C2", "C3"]), vec![2.0, 4.0, 6.0]);
    assert_eq!(
        wb.get(s, CellAddr::parse("C4").unwrap()),
        &Scalar::Error(ErrorCode::Na)
    );
}

#[test]
fn elementwise_add_and_hadamard_keep_layout() {
    let wb = Workbook::load_script(
        "SET s!A1 1\nSET s!B1 2\nSET s!C1 3\n\
         SET s!A2 4\nSET s!B2 5\nSET s!C2 6\n\
         SET s!A4 10\nSET s!B4 20\nSET s!C4 30\n\
         SET s!A5 40\nSET s!B5 50\nSET s!C5 60\n\
         ARRAY s!E1:G2 =A1:C2+A4:C5\n\
         ARRAY s!E4:G5 =A1:C2*A4:C5\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    assert_eq!(
        grid(&wb, s, &["E1", "F1", "G1", "E2", "F2", "G2"]),
        vec![11.0, 22.0, 33.0, 44.0, 55.0, 66.0]
    );
    assert_eq!(
        grid(&wb, s, &["E4", "F4", "G4", "E5", "F5", "G5"]),
        vec![10.0, 40.0, 90.0, 160.0, 250.0, 360.0]
    );
}

#[test]
fn scalar_function_maps_over_a_region() {
    let wb = Workbook::load_script(
        "SET s!A1 0\nSET s!B1 1\n\
         SET s!A2 2\nSET s!B2 -1\n\
         ARRAY s!D1:E2 =EXP(A1:B2)\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    let got = grid(&wb, s, &["D1", "E1", "D2", "E2"]);
    let want = [0.0f64, 1.0, 2.0, -1.0].map(f64::exp);
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-15, "{g} vs {w}");
    }
}

#[test]
fn weighted_sum_of_columns_broadcasts_scalars() {
    let wb = Workbook::load_script(
        "SET s!A1 2\nSET s!A2 4\n\
         SET s!B1 10\nSET s!B2 20\n\
         ARRAY s!D1:D2 =0.4*A1:A2+0.6*B1:B2\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    assert_eq!(grid(&wb, s, &["D1", "D2"]), vec![0.4 * 2.0 + 0.6 * 10.0, 0.4 * 4.0 + 0.6 * 20.0]);
}

#[test]
fn incompatible_shapes_fill_with_value_errors() {
    let wb = Workbook::load_script(
        "SET s!A1 1\nSET s!A2 2\nSET s!A3 3\n\
         SET s!C1 1\nSET s!C2 2\n\
         ARRAY s!E1:E3 =A1:A3+C1:C2\n",
    )
    .unwrap();
    let s = wb.sheet_index("s").unwrap();
    for a in ["E1", "E2", "E3"] {
        assert_eq!(
            wb.get(s, CellAddr::parse(a).unwrap()),
            &Scalar::Error(ErrorCode::Value),
            "{a}"
        );
    }
}
