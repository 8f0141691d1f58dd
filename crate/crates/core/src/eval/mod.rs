//! The evaluation tasks and the significance tests used to compare systems.

pub mod correlation;
pub mod datasets;
pub mod dialogue;
pub mod paraphrase;
pub mod report;
pub mod significance;

pub use correlation::{eval_disambiguation, eval_sentence_similarity};
pub use datasets::{DialogueRecord, DisambigItem, ParaphrasePair, SentencePairItem, Svo};
pub use dialogue::{eval_dialogue_acts, preprocess_utterance, DialogueOptions, Utterance};
pub use paraphrase::eval_paraphrase;
pub use report::{EvaluationReport, ItemScore, Task};
pub use significance::{chi_square_accuracy_test, correlation_difference_test};
