use crate::catalog;
use crate::control::{self, ControlEngine};
use crate::fuzzy::RuleBase;
use crate::temporal::{self, TemporalEngine};

use super::{load_mapping, load_rules, RuntimeConfig};

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    /// Differences from the stock variable catalog. Allowed, but worth a look.
    pub warnings: Vec<String>,
    /// (system, output variable, rules concluding on it)
    pub rule_counts: Vec<(String, String, usize)>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

fn count_rules(report: &mut ValidationReport, system: &str, rb: &RuleBase) {
    for o in rb.outputs() {
        let name = o.var.name();
        report
            .rule_counts
            .push((system.to_string(), name.to_string(), rb.rule_count_for(name)));
    }
}

/// Checks a configuration without running it: both rule files, the engine
/// wiring and the drummer mapping. Reports every problem it finds rather
/// than stopping at the first.
pub fn validate(config: &RuntimeConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let Err(e) = config.validate() {
        report.errors.push(e.to_string());
        return report;
    }
    let bar = config.bar_seconds();
    let bindings = [("T", bar), ("eps", config.epsilon_bar_seconds)];

    match load_rules(&config.temporal_rules, temporal::DEFAULT_RULES, &bindings, config.resolution) {
        Err(e) => report.errors.push(e.to_string()),
        Ok((name, rb)) => {
            count_rules(&mut report, "temporal", &rb);
            for m in catalog::compare(&rb, &catalog::temporal_variables()) {
                report.warnings.push(format!("{name}: {m}"));
            }
            if let Err(e) = TemporalEngine::new(rb, config.temporal(), bar) {
                report.errors.push(format!("{name}: {e}"));
            }
        }
    }

    match load_rules(&config.control_rules, control::DEFAULT_RULES, &bindings, config.resolution) {
        Err(e) => report.errors.push(e.to_string()),
        Ok((name, rb)) => {
            count_rules(&mut report, "control", &rb);
            match catalog::control_variables(bar, config.epsilon_bar_seconds) {
                Ok(reference) => {
                    for m in catalog::compare(&rb, &reference) {
                        report.warnings.push(format!("{name}: {m}"));
                    }
                }
                Err(e) => report.errors.push(e.to_string()),
            }
            if let Err(e) = ControlEngine::new(rb, config.control(), bar, config.no_note_sentinel_seconds) {
                report.errors.push(format!("{name}: {e}"));
            }
        }
    }

    if let Err(e) = load_mapping(&config.mapping) {
        report.errors.push(e.to_string());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_clean() {
        let r = validate(&RuntimeConfig::default());
        assert!(r.errors.is_empty(), "{:?}", r.errors);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        let control: Vec<_> = r.rule_counts.iter().filter(|c| c.0 == "control").collect();
        assert_eq!(control.len(), 5);
        assert!(control.iter().all(|c| c.2 > 0), "{control:?}");
    }

    #[test]
    fn reports_bad_period() {
        let c = RuntimeConfig {
            cycle_period_seconds: 0.0,
            ..RuntimeConfig::default()
        };
        assert!(!validate(&c).ok());
    }
}
