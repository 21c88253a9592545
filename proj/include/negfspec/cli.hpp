#pragma once

/// Command-line front end.
///
/// Subcommands: validate, diagrams, sle, pump-probe, wave-mixing, ensemble,
/// oracle.  Exit codes: 0 success, 2 usage, 3 configuration, 4 numerical
/// guard.  Errors are single lines on stderr ("error: <category>: <detail>").
/// All file output is byte-deterministic for fixed inputs.
namespace negf {

int run_cli(int argc, char** argv);

}  // namespace negf
