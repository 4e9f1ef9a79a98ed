//! Line commands for the interactive loop and for aggregation scripts.

use std::io::{BufRead, Write};

use skm::modcheck::Move;

use crate::session::{Session, SessionError, TreeMode};

pub const HELP: &str = "\
commands:
  list                       clusters with labels and separators
  aggregate I J              merge adjacent clusters I and J
  copy SPECIES FROM TO       copy a species from module FROM into module TO
  undo | redo
  reset cliques|mpd
  report [json]              module checks
  tree [json|dot]            current junction tree
  help
  quit";

pub enum Reply {
    Text(String),
    Quit,
}

fn index(s: Option<&str>, what: &str) -> Result<usize, String> {
    let s = s.ok_or_else(|| format!("missing {what}"))?;
    s.parse().map_err(|_| format!("{what} must be a cluster index, got {s:?}"))
}

fn session_err(e: SessionError) -> String {
    format!("{}: {e}", e.code())
}

/// Runs one command against the session.
pub fn execute(session: &mut Session, line: &str) -> Result<Reply, String> {
    let mut words = line.split_whitespace();
    let Some(cmd) = words.next() else { return Ok(Reply::Text(String::new())) };
    let rest: Vec<&str> = words.collect();
    let arity = |n: usize| {
        if rest.len() > n {
            Err(format!("{cmd}: too many arguments"))
        } else {
            Ok(())
        }
    };
    match cmd {
        "list" | "ls" => {
            arity(0)?;
            Ok(Reply::Text(session.listing()))
        }
        "aggregate" | "agg" => {
            arity(2)?;
            let i = index(rest.first().copied(), "first cluster")?;
            let j = index(rest.get(1).copied(), "second cluster")?;
            session.aggregate(i, j).map_err(session_err)?;
            Ok(Reply::Text(session.listing()))
        }
        "copy" => {
            arity(3)?;
            let species = rest.first().ok_or("copy: missing species")?.to_string();
            let from = index(rest.get(1).copied(), "source module")?;
            let to = index(rest.get(2).copied(), "target module")?;
            session.copy(&[Move { species, from, to }]).map_err(session_err)?;
            Ok(Reply::Text(session.listing()))
        }
        "undo" => {
            arity(0)?;
            session.undo().map_err(session_err)?;
            Ok(Reply::Text(session.listing()))
        }
        "redo" => {
            arity(0)?;
            session.redo().map_err(session_err)?;
            Ok(Reply::Text(session.listing()))
        }
        "reset" => {
            arity(1)?;
            let mode = match rest.first().copied() {
                Some("cliques") => TreeMode::Cliques,
                Some("mpd") | None => TreeMode::Mpd,
                Some(other) => return Err(format!("reset: unknown mode {other:?}")),
            };
            session.reset(mode).map_err(session_err)?;
            Ok(Reply::Text(session.listing()))
        }
        "report" => {
            arity(1)?;
            match rest.first().copied() {
                Some("json") => Ok(Reply::Text(serde_json::to_string_pretty(session.report()).expect("report JSON"))),
                None => Ok(Reply::Text(session.report().to_markdown())),
                Some(other) => Err(format!("report: unknown format {other:?}")),
            }
        }
        "tree" => {
            arity(1)?;
            match rest.first().copied() {
                Some("json") => Ok(Reply::Text(serde_json::to_string_pretty(&session.tree_json()).expect("tree JSON"))),
                Some("dot") | None => Ok(Reply::Text(session.tree().to_dot())),
                Some(other) => Err(format!("tree: unknown format {other:?}")),
            }
        }
        "help" | "?" => Ok(Reply::Text(HELP.to_string())),
        "quit" | "exit" | "q" => Ok(Reply::Quit),
        other => Err(format!("unknown command {other:?}; try help")),
    }
}

/// Splits a script into commands: one per line or `;`-separated, with `#`
/// comments.
pub fn script_lines(script: &str) -> Vec<String> {
    script
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(';'))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

/// Applies a script, stopping at the first failing command.
pub fn run_script(session: &mut Session, script: &str) -> Result<(), String> {
    for (n, line) in script_lines(script).iter().enumerate() {
        match execute(session, line) {
            Ok(Reply::Quit) => break,
            Ok(Reply::Text(_)) => {}
            Err(e) => return Err(format!("script command {} ({line}): {e}", n + 1)),
        }
    }
    Ok(())
}

/// Interactive loop; errors are printed and the loop continues.
pub fn run<R: BufRead, W: Write>(session: &mut Session, input: R, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", session.listing().trim_end())?;
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        match execute(session, &line?) {
            Ok(Reply::Quit) => return Ok(()),
            Ok(Reply::Text(t)) if t.is_empty() => {}
            Ok(Reply::Text(t)) => writeln!(out, "{}", t.trim_end())?,
            Err(e) => writeln!(out, "error: {e}")?,
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use skm::netmodel::parse_network;

    fn session() -> Session {
        let net = parse_network("trc: g -> g + R\ntrl: R -> R + P\nd: 2 P -> P2\nrd: P2 -> 2 P\nb: g + P2 -> gP2\nub: gP2 -> g + P2").unwrap();
        Session::new(net, TreeMode::Cliques).unwrap()
    }

    #[test]
    fn script_forms() {
        assert_eq!(script_lines("aggregate 0 1; list\n# note\nundo # trailing"), ["aggregate 0 1", "list", "undo"]);
        let mut s = session();
        run_script(&mut s, "aggregate 0 1").unwrap();
        assert_eq!(s.tree().len(), 2);
        let err = run_script(&mut s, "undo; aggregate 1 2").unwrap_err();
        assert!(err.contains("not_adjacent"), "{err}");
    }

    #[test]
    fn interactive_session() {
        let mut s = session();
        let input = b"list\naggregate 0 1\nbogus\ncopy gP2 1 0\nreport\nundo\nredo\nquit\nlist\n";
        let mut out = Vec::new();
        run(&mut s, &input[..], &mut out).unwrap();
        let out = String::from_utf8(out).unwrap();
        assert!(out.contains("error: unknown command \"bogus\""));
        assert!(out.contains("## Modularization: certified"));
        assert_eq!(s.copies().len(), 1);
        assert_eq!(s.revision(), 4);
    }

    #[test]
    fn argument_errors() {
        let mut s = session();
        assert!(execute(&mut s, "aggregate 0").is_err());
        assert!(execute(&mut s, "aggregate a b").is_err());
        assert!(execute(&mut s, "list extra").is_err());
        assert!(execute(&mut s, "reset sideways").is_err());
        assert!(matches!(execute(&mut s, "tree json"), Ok(Reply::Text(t)) if t.contains("\"clusters\"")));
    }
}
