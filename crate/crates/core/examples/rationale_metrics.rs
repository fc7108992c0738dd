//! Label and rationale metrics on a handful of predictions.

use persona_audit::label::{Label, Mask, OrdinalScale};
use persona_audit::metrics::{iou, iou_f1, macro_f1, mae, mean_error, mean_token_f1, overflag_matrix, token_f1, MaskConventions};

fn mask(bits: &[u8]) -> Mask {
    Mask::from_bits(bits.iter().copied())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use Label::{HateSpeech as H, Normal as N, Offensive as O};
    let gold = [N, N, O, H, H];
    let pred = [N, O, O, H, O];
    let classes = [N, O, H];
    println!("macro-F1 {:.3}", macro_f1(&pred, &gold, &classes, &[])?);
    println!("MAE {:.1}  ME {:.1}", mae(&pred, &gold, OrdinalScale)?, mean_error(&pred, &gold, OrdinalScale)?);
    for ((g, p), rate) in overflag_matrix(&pred, &gold, &classes)? {
        if rate > 0.0 {
            println!("  {} -> {}: {:.2}", g.short(), p.short(), rate);
        }
    }

    let p = mask(&[1, 1, 0, 0]);
    let g = mask(&[1, 0, 1, 0]);
    println!("token-F1 {:.3}  IOU {:.3}", token_f1(&p, &g)?, iou(&p, &g)?);

    let same = mask(&[0, 1, 1, 0]);
    let pairs = [(&p, &g), (&same, &same)];
    let conv = MaskConventions::default();
    println!("mean token-F1 {:.3}  IOU-F1@{} {:.3}", mean_token_f1(&pairs, &conv)?, conv.iou_threshold, iou_f1(&pairs, &conv)?);
    Ok(())
}
