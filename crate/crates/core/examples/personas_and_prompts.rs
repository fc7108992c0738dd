//! Browse the persona registry, render prompts and size a run plan.

use persona_audit::corpus::synthetic_hate3;
use persona_audit::personas::{baseline, by_id, composites, singles};
use persona_audit::prompting::{plan_run, render, PromptSpec, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p in singles().take(5) {
        println!("{:<28} who {}", p.id, p.predicate());
    }
    for p in composites().take(3) {
        println!("{:<28} {} (group {})", p.id, p.description, p.brwrr_group().unwrap_or_default());
    }

    let corpus = synthetic_hate3(1, 0);
    let persona = by_id("education_no_formal").expect("registered persona");
    let spec = PromptSpec {
        task: corpus[0].task,
        persona,
        variant: Variant::Cot,
        reasoning_field: false,
    };
    let prompt = render(&spec, &corpus[0])?;
    println!("\n--- {} / cot ---\n{}", persona.id, prompt.text);

    let no_cot = render(&PromptSpec { persona: baseline(), variant: Variant::NoCot, ..spec }, &corpus[0])?;
    println!("\n--- baseline / no-cot, expects keys {:?} ---", no_cot.schema.keys);

    let hate = synthetic_hate3(500, 1);
    let singles: Vec<_> = singles().collect();
    println!("\nsingle-attribute plan: {} work items", plan_run(&hate, &singles, 3)?.len());
    Ok(())
}
