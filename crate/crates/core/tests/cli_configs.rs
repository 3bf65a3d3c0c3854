mod common;

use common::{configs_dir, sample_configs};
use knightian::cli::{self, Command, Overrides, ProblemConfig};

const COMMANDS: [Command; 3] = [Command::Solve, Command::Oracle, Command::NaCheck];

#[test]
fn sample_configs_meet_their_expectations() {
    let configs = sample_configs();
    assert!(configs.len() >= 10, "sample configs missing");
    for (name, text) in configs {
        let cfg = ProblemConfig::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let expect = cfg.expect.clone().unwrap_or_else(|| panic!("{name}: no expect block"));
        for command in COMMANDS {
            let o = cli::run_config(command, &cfg, &Overrides::default());
            let label = format!("{name} {}", command.name());
            assert_eq!(o.exit_code, expect.exit_code_for(command), "{label}: {:?}", o.messages);
            if o.exit_code != 0 {
                if let Some(m) = &expect.message_contains {
                    assert!(o.messages.iter().any(|x| x.contains(m.as_str())), "{label}: {:?}", o.messages);
                }
                continue;
            }
            let report = o.report.unwrap_or_else(|| panic!("{label}: no report"));
            for c in &report.checks {
                assert!(c.passed, "{label}: check {} failed: {}", c.name, c.detail);
            }
        }
    }
}

#[test]
fn reports_are_stable_across_reruns() {
    for (name, text) in sample_configs() {
        let a = cli::run(Command::Solve, &text, &Overrides::default());
        let b = cli::run(Command::Solve, &text, &Overrides::default());
        assert_eq!(a.exit_code, b.exit_code, "{name}");
        assert_eq!(a.report.map(|r| r.to_json()), b.report.map(|r| r.to_json()), "{name}");
    }
}

#[test]
fn dump_values_includes_the_field() {
    let text = std::fs::read_to_string(configs_dir().join("binomial.json")).unwrap();
    let o = cli::run(Command::DumpValues, &text, &Overrides::default());
    assert_eq!(o.exit_code, 0);
    let json: serde_json::Value = serde_json::from_str(&o.report.unwrap().to_json()).unwrap();
    let values = json["values"].as_array().unwrap();
    assert!(!values.is_empty());
    assert_eq!(values[0]["depth"], 0);
}

#[test]
fn malformed_configs_are_validation_errors() {
    for text in [
        "{",
        r#"{"schema_version": 2}"#,
        r#"{"schema_version": 1, "tree": {"stages": []}, "unknown": 1}"#,
    ] {
        let o = cli::run(Command::Solve, text, &Overrides::default());
        assert_eq!(o.exit_code, cli::EXIT_VALIDATION, "{text}");
        assert!(o.report.is_none());
    }
}

#[test]
fn budget_overrides_apply() {
    let text = std::fs::read_to_string(configs_dir().join("binomial.json")).unwrap();
    let tight = Overrides {
        budget_strategies: Some(1),
        ..Overrides::default()
    };
    assert_eq!(cli::run(Command::Oracle, &text, &tight).exit_code, cli::EXIT_BUDGET);
}

#[test]
fn binary_exit_codes_match_expectations() {
    let bin = env!("CARGO_BIN_EXE_knightian");
    for (name, text) in sample_configs() {
        let cfg = ProblemConfig::parse(&text).unwrap();
        let expect = cfg.expect.unwrap();
        let status = std::process::Command::new(bin)
            .args(["solve", "--config"])
            .arg(configs_dir().join(&name))
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(expect.exit_code_for(Command::Solve)), "{name}");
    }
    let status = std::process::Command::new(bin)
        .args(["solve", "--config", "/nonexistent/config.json"])
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_VALIDATION));
}
