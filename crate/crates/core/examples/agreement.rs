//! Krippendorff's alpha on a small reliability matrix, nominal vs ordinal.

use persona_audit::agreement::{krippendorff_alpha, Level, ReliabilityData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Rows are posts, columns are personas; None marks a failed parse.
    let rows = vec![
        vec![Some(0), Some(0), Some(1)],
        vec![Some(2), Some(2), Some(2)],
        vec![Some(1), Some(2), None],
        vec![Some(0), Some(0), Some(0)],
        vec![Some(2), Some(1), Some(2)],
        vec![Some(0), None, None],
    ];
    let nominal = ReliabilityData::from_matrix(rows.clone(), Level::Nominal);
    let ordinal = ReliabilityData::from_matrix(rows, Level::Ordinal);
    println!("nominal alpha {:?}", krippendorff_alpha(&nominal)?);
    println!("ordinal alpha {:?}", krippendorff_alpha(&ordinal)?);

    let one_category = ReliabilityData::from_matrix(vec![vec![Some(1), Some(1)]; 4], Level::Nominal);
    println!("single category {:?}", krippendorff_alpha(&one_category)?);
    Ok(())
}
