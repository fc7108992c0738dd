//! Word counts and Flesch Reading Ease of chain-of-thought text.

use persona_audit::linguistics::{profile, syllables};

fn main() {
    let texts = [
        "Go. Go. Go.",
        "As someone who has no formal education, I see mean words. They hurt people.",
        "Considering the sociopolitical ramifications, the utterance constitutes derogatory generalization.",
        "",
    ];
    for t in texts {
        match profile(t) {
            Some(p) => println!(
                "{:>3} words {:>2} sentences {:>3} syllables  flesch {:>7.2}  {t:.40}",
                p.word_count, p.sentence_count, p.syllable_count, p.flesch
            ),
            None => println!("(no words, excluded)"),
        }
    }
    for w in ["make", "reading", "beautiful", "rhythm"] {
        println!("{w}: {}", syllables(w));
    }
}
