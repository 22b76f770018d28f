//! Runner for the acceptance criteria in `tests/acceptance.rs`.
//!
//! Each criterion prints one `PASS`, `FAIL` or `SKIP` line. `ACCEPTANCE_ONLY=1,4`
//! restricts the run to the listed criteria (a prefix such as `8` selects `8a` and `8b`).

pub enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

impl Outcome {
    pub fn check(ok: bool, detail: String) -> Self {
        if ok {
            Outcome::Pass(detail)
        } else {
            Outcome::Fail(detail)
        }
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub run: fn() -> Outcome,
}

fn selected(id: &str, only: &Option<Vec<String>>) -> bool {
    only.as_ref().is_none_or(|list| list.iter().any(|o| id.starts_with(o.as_str())))
}

/// Runs the selected criteria and returns the ids that failed.
pub fn run_all(criteria: &[Criterion]) -> Vec<&'static str> {
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect());
    let mut failed = Vec::new();
    for c in criteria.iter().filter(|c| selected(c.id, &only)) {
        let start = std::time::Instant::now();
        let (tag, detail) = match (c.run)() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed.push(c.id);
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag}  criterion {:<3} {}: {detail} [{:.1?}]", c.id, c.name, start.elapsed());
    }
    failed
}
