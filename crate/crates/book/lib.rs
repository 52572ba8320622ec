// Chapters of the guide compiled as doc comments so `cargo test --doc` runs
// every snippet in the book. One module per chapter keeps failures traceable.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../book/src/distributions.md")]
pub mod distributions {}
#[doc = include_str!("../../book/src/scenario.md")]
pub mod scenario {}
#[doc = include_str!("../../book/src/novelty.md")]
pub mod novelty {}
#[doc = include_str!("../../book/src/campaigns.md")]
pub mod campaigns {}
#[doc = include_str!("../../book/src/agents.md")]
pub mod agents {}
#[doc = include_str!("../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../book/src/formats.md")]
pub mod formats {}
