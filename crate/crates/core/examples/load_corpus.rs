//! Load the bundled HateXplain sample, apply the agreement filter and slice
//! by target community.

use persona_audit::corpus::{filter_hatexplain, load_corpus, sample_subset, slice_by_target, CorpusFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/hatexplain_sample.jsonl");
    let all = load_corpus(path, CorpusFormat::HatexplainJson)?;
    let kept = filter_hatexplain(all.clone());
    println!("loaded {} instances, {} survive the filter", all.len(), kept.len());

    for inst in kept.iter().take(3) {
        let gold = inst.canonical.as_ref().expect("filtered items have a majority");
        let marked: Vec<&str> = inst
            .tokens
            .iter()
            .zip(gold.rationale_mask.iter())
            .filter(|(_, m)| *m)
            .map(|(t, _)| t.surface.as_str())
            .collect();
        println!("{:>7}  {:<20} {:?}  \"{}\"", inst.id, gold.label.to_string(), marked, inst.text());
    }

    for (group, insts) in slice_by_target(&kept) {
        println!("{:<15} {}", group.name(), insts.len());
    }

    let sample = sample_subset(&kept, 5, 42)?;
    println!("seeded sample: {:?}", sample.iter().map(|i| i.id.as_str()).collect::<Vec<_>>());
    Ok(())
}
