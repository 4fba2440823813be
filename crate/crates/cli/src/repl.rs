//! Line-oriented front end over a [`Service`]. Each command prints the JSON
//! payload the HTTP API would return.

use std::io::{BufRead, Write};

use serde_json::Value;

use crate::service::{ApiError, Service};

pub const HELP: &str = "commands:
  task <text>                classify a task
  label <category> <text>    label a task and learn if needed
  rules                      show learned rules
  history                    show past labels
  reset                      forget examples, rules and history
  quit";

/// Runs one command. `None` means quit.
pub fn execute(service: &Service, line: &str) -> Option<Value> {
    let line = line.trim();
    let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let reply = match cmd {
        "quit" | "exit" => return None,
        "task" => service.task(rest),
        "label" => match rest.split_once(char::is_whitespace) {
            Some((category, text)) => service.label(text.trim(), category),
            None => Err(ApiError::bad_request("usage: label <category> <text>")),
        },
        "rules" => Ok(service.rules()),
        "history" => Ok(service.history()),
        "reset" => service.reset(),
        other => Err(ApiError::bad_request(format!("unknown command `{other}`"))),
    };
    Some(reply.unwrap_or_else(|e| e.to_json()))
}

pub fn run(service: &Service, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if line.trim() == "help" {
            writeln!(output, "{HELP}")?;
            continue;
        }
        match execute(service, &line) {
            Some(v) => writeln!(output, "{v}")?,
            None => break,
        }
    }
    Ok(())
}
