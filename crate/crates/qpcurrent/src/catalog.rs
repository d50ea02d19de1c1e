//! The built-in scenarios and their frozen outputs.

use crate::exec::run_source;
use crate::report::{first_diff, RunReport, Verdict};
use crate::session::Options;

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
    /// Expected text report under default options.
    pub golden: &'static str,
}

macro_rules! scenario {
    ($name:literal, $summary:literal) => {
        Scenario {
            name: $name,
            summary: $summary,
            source: include_str!(concat!("../scenarios/", $name, ".qp")),
            golden: include_str!(concat!("../golden/v1/", $name, ".out")),
        }
    };
}

static SCENARIOS: [Scenario; 7] = [
    scenario!("poisson_sigma", "Poisson sigma model: twisted basis q + pi p, commutators -d pi J"),
    scenario!("twisted_poisson", "Twisted Poisson structure as the canonical-function condition"),
    scenario!("alekseev_strobl", "n = 1 currents: Dorfman bracket and the inner product anomaly"),
    scenario!("kac_moody", "n = 1 currents from linear vector fields of a Lie algebra"),
    scenario!("threed_algebroid", "n = 2 currents on T*[2]E[1]: anomalies and the bar-quantities"),
    scenario!("n_brane_3", "Topological 3-brane: higher Dorfman bracket and pairing"),
    scenario!("courant_sigma", "Courant sigma model: twisted basis and its current algebra"),
];

pub fn scenarios() -> &'static [Scenario] {
    &SCENARIOS
}

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

impl Scenario {
    pub fn file_name(&self) -> String {
        format!("{}.qp", self.name)
    }

    pub fn run(&self, options: &Options, timing: bool) -> RunReport {
        run_source(&self.file_name(), self.source, options, timing)
    }

    /// Runs under default semantics (the `jobs` setting is kept) and
    /// compares the text report with the golden file byte for byte.
    pub fn verify(&self, jobs: usize) -> Verdict {
        let options = Options { jobs, ..Options::default() };
        let text = self.run(&options, false).to_text();
        let diff = first_diff(self.golden, &text);
        Verdict { scenario: self.name.into(), passed: diff.is_none(), diff }
    }
}
